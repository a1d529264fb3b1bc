//! Dense complex linear-algebra helpers shared by the modules.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar, C};

pub(crate) type CMat<R> = DMatrix<C<R>>;
pub(crate) type CVec<R> = DVector<C<R>>;

/// Eigenpairs of a Hermitian matrix, eigenvalues sorted descending.
///
/// Each eigenvector has its first non-negligible coordinate real and positive.
pub(crate) struct HermEigen<R: Scalar> {
    pub values: Vec<R>,
    pub vectors: CMat<R>,
}

pub(crate) fn hermitize<R: Scalar>(m: &CMat<R>) -> CMat<R> {
    (m + m.adjoint()).scale(R::lit(0.5))
}

/// Largest entrywise modulus of `m - m^dagger`.
pub(crate) fn hermiticity_defect<R: Scalar>(m: &CMat<R>) -> R {
    let d = m - m.adjoint();
    d.iter().fold(R::zero(), |acc, z| acc.max(z.modulus()))
}

pub(crate) fn herm_eigen<R: Scalar>(m: &CMat<R>) -> HermEigen<R> {
    let n = m.nrows();
    if n == 0 {
        return HermEigen {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        };
    }
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut vectors = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    HermEigen { values, vectors }
}

fn fix_phase<R: Scalar>(col: &mut CVec<R>) {
    let peak = col.iter().fold(R::zero(), |acc, z| acc.max(z.modulus()));
    let cut = peak * R::lit(1e-8);
    if let Some(z) = col.iter().find(|z| z.modulus() > cut).copied() {
        let phase = z.conj() / real(z.modulus());
        col.apply(|w| *w *= phase);
    }
}

pub(crate) fn min_eigenvalue<R: Scalar>(m: &CMat<R>) -> R {
    herm_eigen(m).values.last().copied().unwrap_or(R::zero())
}

/// Applies `f` to a Hermitian matrix through its spectral decomposition.
pub(crate) fn spectral_map<R: Scalar>(m: &CMat<R>, f: impl Fn(R) -> R) -> CMat<R> {
    let e = herm_eigen(m);
    let diag = CVec::from_iterator(e.values.len(), e.values.iter().map(|&v| real(f(v))));
    &e.vectors * CMat::from_diagonal(&diag) * e.vectors.adjoint()
}

/// Largest singular value.
pub(crate) fn operator_norm<R: Scalar>(m: &CMat<R>) -> R {
    if m.is_empty() {
        return R::zero();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(R::zero(), |acc, &s| acc.max(s))
}

pub(crate) fn singular_values<R: Scalar>(m: &CMat<R>) -> Vec<R> {
    if m.is_empty() {
        return vec![];
    }
    let mut s: Vec<R> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub(crate) fn frobenius<R: Scalar>(m: &CMat<R>) -> R {
    m.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Largest `lambda` with `a x = lambda b x` for Hermitian `a` and positive definite `b`.
pub(crate) fn max_generalized_eigenvalue<R: Scalar>(a: &CMat<R>, b: &CMat<R>) -> Result<R> {
    if a.is_empty() {
        return Ok(R::zero());
    }
    let chol = hermitize(b)
        .cholesky()
        .ok_or_else(|| Error::Linalg("right-hand form is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Linalg("singular Cholesky factor".into()))?;
    let reduced = &l_inv * a * l_inv.adjoint();
    Ok(herm_eigen(&reduced).values[0])
}
