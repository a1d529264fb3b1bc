//! Pullback of a covariance along a model.
//!
//! The differential `a -> Re Tr(dD a)` on self-adjoint `a` is represented, with respect to
//! the real part of the covariance on GNS coordinates, by a vector `v` in the real span of
//! the classes of self-adjoint elements; the metric is `g_ij = Re c(v_i, v_j)`. Everything
//! is done one algebra block at a time.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::algebra::AlgebraElement;
use crate::channels::CongruentEmbedding;
use crate::covariance::{covariance_gram, CovarianceGram, CovarianceKind};
use crate::error::{Error, Result};
use crate::gns::GnsSpace;
use crate::linalg::CMat;
use crate::scalar::{cplx, real, Scalar, C};
use crate::tol;

use super::{DerivativeMode, EmbeddedModel, StatModel};

/// Relative eigenvalue cutoff when solving the Riesz system on the range of its matrix.
const RANGE_CUTOFF: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Pullback<R: Scalar> {
    /// `g_ij = Re c(v_i, v_j)`.
    pub metric: DMatrix<R>,
    /// Score vectors `v_i` in GNS coordinates.
    pub scores: Vec<DVector<C<R>>>,
    /// Norm of the residual of each Riesz system.
    pub residuals: Vec<R>,
}

/// Real basis of the self-adjoint `n x n` matrices as columns of element coordinates:
/// `e_ii`, then `e_ij + e_ji` and `i (e_ij - e_ji)` for `i < j`.
fn self_adjoint_basis<R: Scalar>(n: usize) -> CMat<R> {
    let mut h = CMat::zeros(n * n, n * n);
    let mut col = 0;
    for i in 0..n {
        h[(i * n + i, col)] = real(R::one());
        col += 1;
    }
    for i in 0..n {
        for j in i + 1..n {
            h[(i * n + j, col)] = real(R::one());
            h[(j * n + i, col)] = real(R::one());
            h[(i * n + j, col + 1)] = cplx(R::zero(), R::one());
            h[(j * n + i, col + 1)] = cplx(R::zero(), -R::one());
            col += 2;
        }
    }
    h
}

/// Minimum-norm solution of `a x = b` for symmetric positive semidefinite `a`.
fn solve_on_range<R: Scalar>(a: DMatrix<R>, b: &DMatrix<R>) -> DMatrix<R> {
    let eig = SymmetricEigen::new(a);
    let top = eig
        .eigenvalues
        .iter()
        .fold(R::zero(), |m, &v| m.max(v.abs()));
    let cut = top * R::lit(RANGE_CUTOFF);
    let coeffs = eig.eigenvectors.transpose() * b;
    let scaled = DMatrix::from_fn(coeffs.nrows(), coeffs.ncols(), |i, j| {
        let l = eig.eigenvalues[i];
        if top > R::zero() && l > cut {
            coeffs[(i, j)] / l
        } else {
            R::zero()
        }
    });
    eig.eigenvectors * scaled
}

/// Scores and metric for tangent vectors `derivatives` at the state of `cov`.
pub fn pullback_at<R: Scalar>(
    cov: &CovarianceGram<R>,
    derivatives: &[AlgebraElement<R>],
) -> Result<Pullback<R>> {
    let space: &GnsSpace<R> = cov.space();
    let shape = space.state().shape();
    for d in derivatives {
        shape.ensure_eq(d.shape())?;
    }
    let p = derivatives.len();
    let mut metric = DMatrix::<R>::zeros(p, p);
    let mut scores = vec![DVector::<C<R>>::zeros(space.dim()); p];
    let mut res_sq = vec![R::zero(); p];

    for (k, &n) in shape.blocks().iter().enumerate() {
        let h = self_adjoint_basis::<R>(n);
        let u = space.block_iso(k) * &h;
        let a = (u.adjoint() * cov.block(k) * &u).map(|z| z.re);
        let a = (&a + a.transpose()) * R::lit(0.5);
        // Tr(X h) pairs the row-major coordinates of X^T with those of h; these are the
        // column-major entries of X.
        let b = DMatrix::<R>::from_fn(n * n, p, |alpha, i| {
            let x = derivatives[i].block(k).as_slice();
            h.column(alpha)
                .iter()
                .zip(x)
                .fold(R::zero(), |acc, (hc, xc)| acc + (*hc * *xc).re)
        });
        let x = solve_on_range(a.clone(), &b);
        let r = &a * &x - &b;
        for (i, acc) in res_sq.iter_mut().enumerate() {
            *acc += r.column(i).norm_squared();
        }
        metric += x.transpose() * &a * &x;
        let v = &u * x.map(real);
        let range = space.block_range(k);
        for (i, s) in scores.iter_mut().enumerate() {
            s.rows_mut(range.start, range.len()).copy_from(&v.column(i));
        }
    }

    let residuals: Vec<R> = res_sq.into_iter().map(|v| v.sqrt()).collect();
    if let Some((parameter, r)) = residuals.iter().enumerate().find(|(_, r)| {
        !matches!(
            (**r).partial_cmp(&R::lit(tol::RIESZ_RESIDUAL)),
            Some(Ordering::Less | Ordering::Equal)
        )
    }) {
        return Err(Error::ScoreNotRepresentable {
            parameter,
            residual: r.as_f64(),
        });
    }
    let metric = (&metric + metric.transpose()) * R::lit(0.5);
    Ok(Pullback {
        metric,
        scores,
        residuals,
    })
}

/// Pullback of the covariance `kind` along `model` at `theta`.
pub fn pullback<R: Scalar, M: StatModel<R> + ?Sized>(
    model: &M,
    theta: &[R],
    kind: CovarianceKind,
    mode: DerivativeMode,
) -> Result<Pullback<R>> {
    let state = model.state_at(theta)?;
    let derivatives = model.derivatives(theta, mode)?;
    let cov = covariance_gram(kind, &GnsSpace::build(&state, R::lit(tol::MODEL_SUPPORT)))?;
    pullback_at(&cov, &derivatives)
}

/// Score vectors `v_1..v_p` in GNS coordinates, with analytic derivatives.
pub fn riesz_score<R: Scalar, M: StatModel<R> + ?Sized>(
    model: &M,
    theta: &[R],
    kind: CovarianceKind,
) -> Result<Vec<DVector<C<R>>>> {
    Ok(pullback(model, theta, kind, DerivativeMode::Analytic)?.scores)
}

/// The pulled-back metric `g_ij = Re c(v_i, v_j)`, with analytic derivatives.
pub fn metric_pullback<R: Scalar, M: StatModel<R> + ?Sized>(
    model: &M,
    theta: &[R],
    kind: CovarianceKind,
) -> Result<DMatrix<R>> {
    Ok(pullback(model, theta, kind, DerivativeMode::Analytic)?.metric)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CongruenceReport {
    pub samples: usize,
    /// Largest entrywise `|g_embedded - g|` over all samples.
    pub max_deviation: f64,
    pub per_sample: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

/// GNS-kind pullbacks of `model` and of its image under `embedding` at each sample.
pub fn congruence_invariance_check<R: Scalar, M: StatModel<R> + Clone>(
    model: &M,
    embedding: &CongruentEmbedding<R>,
    thetas: &[Vec<R>],
    tol: f64,
) -> Result<CongruenceReport> {
    let embedded = EmbeddedModel::new(model.clone(), embedding.map().clone())?;
    let per_sample = thetas
        .iter()
        .map(|theta| {
            let g = metric_pullback(model, theta, CovarianceKind::Gns)?;
            let ge = metric_pullback(&embedded, theta, CovarianceKind::Gns)?;
            Ok((ge - g).amax().as_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_deviation = per_sample.iter().copied().fold(0.0, f64::max);
    Ok(CongruenceReport {
        samples: thetas.len(),
        max_deviation,
        per_sample,
        tol,
        pass: max_deviation <= tol,
    })
}
