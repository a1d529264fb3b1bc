//! Fields of covariances: Hermitian products on GNS coordinates that agree with the GNS
//! space as vector spaces, with the GNS product itself and Petz-type products built from
//! operator monotone functions.
//!
//! For a faithful density with eigenbasis `U` and eigenvalues `d_i`, the Petz product of
//! `x, y` is `sum_ij d_j f(d_i/d_j) conj(x'_ij) y'_ij` with `x' = U^dagger x U`. The constant
//! function `f = 1` gives back `rho(x^dagger y)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{gaussian_c, AlgebraElement, AlgebraShape};
use crate::channels::NcpMorphism;
use crate::error::{Error, Result};
use crate::gns::{GnsContraction, GnsSpace};
use crate::linalg::{
    herm_eigen, hermitize, max_generalized_eigenvalue, min_eigenvalue, spectral_map, CMat,
};
use crate::scalar::{real, Scalar, C};
use crate::states::NormalState;

/// Operator monotone functions `f: (0, inf) -> (0, inf)` parametrizing Petz products.
///
/// Formulas are the standard ones from the monotone-metric literature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorMonotoneFunction {
    /// `(1 + t) / 2`, symmetric logarithmic derivative (Bures) kernel.
    Sld,
    /// `(t - 1) / ln t`, Kubo-Mori-Bogoliubov kernel.
    Kmb,
    /// `((1 + sqrt t) / 2)^2`, Wigner-Yanase kernel.
    Wy,
    /// `2t / (1 + t)`, right logarithmic derivative kernel.
    Rld,
    /// `f = 1`, reproducing the GNS product.
    Unit,
}

impl OperatorMonotoneFunction {
    /// The named functions of the catalog (the unit function is excluded).
    pub fn catalog() -> [Self; 4] {
        [Self::Sld, Self::Kmb, Self::Wy, Self::Rld]
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sld => "sld",
            Self::Kmb => "kmb",
            Self::Wy => "wy",
            Self::Rld => "rld",
            Self::Unit => "unit",
        }
    }

    pub fn eval<R: Scalar>(self, t: R) -> R {
        let one = R::one();
        let two = R::lit(2.0);
        match self {
            Self::Sld => (one + t) / two,
            Self::Kmb => {
                let u = t - one;
                if u.abs() < R::lit(1e-6) {
                    // series of u / ln(1 + u)
                    one + u / two - u * u / R::lit(12.0)
                } else {
                    u / u.ln_1p()
                }
            }
            Self::Wy => {
                let h = (one + t.sqrt()) / two;
                h * h
            }
            Self::Rld => two * t / (one + t),
            Self::Unit => one,
        }
    }

    pub fn is_normalized(self) -> bool {
        true
    }

    /// `f(t) = t f(1/t)`.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Self::Unit)
    }

    /// Normalization, monotonicity on a log grid of `1e3` points in `[1e-6, 1e6]`, and a
    /// `2x2` matrix monotonicity spot check on `pairs` random pairs `0 < A <= B`.
    pub fn check(self, pairs: usize, seed: u64) -> OmfCheck {
        let f_at_one = self.eval(1.0f64);
        let grid: Vec<f64> = (0..1000)
            .map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / 999.0))
            .collect();
        let values: Vec<f64> = grid.iter().map(|&t| self.eval(t)).collect();
        let monotone_on_grid =
            values.windows(2).all(|w| w[1] >= w[0]) && values.iter().all(|&v| v > 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..pairs {
            let a = random_pd::<f64, _>(2, &mut rng);
            let p = {
                let g = CMat::<f64>::from_fn(2, 2, |_, _| gaussian_c(&mut rng));
                &g * g.adjoint()
            };
            let b = &a + p;
            let diff = spectral_map(&b, |t| self.eval(t)) - spectral_map(&a, |t| self.eval(t));
            worst = worst.min(min_eigenvalue(&hermitize(&diff)));
        }
        let pass = (f_at_one - 1.0).abs() <= 1e-12 && monotone_on_grid && worst >= -1e-8;
        OmfCheck {
            name: self.name().to_string(),
            f_at_one,
            monotone_on_grid,
            matrix_monotone_min_eig: worst,
            normalized: self.is_normalized(),
            symmetric: self.is_symmetric(),
            pass,
        }
    }
}

impl fmt::Display for OperatorMonotoneFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn random_pd<R: Scalar, G: Rng + ?Sized>(n: usize, rng: &mut G) -> CMat<R> {
    let g = CMat::<R>::from_fn(n, n + 1, |_, _| gaussian_c(rng));
    hermitize(&(&g * g.adjoint())) + CMat::identity(n, n) * real(R::lit(1e-3))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmfCheck {
    pub name: String,
    pub f_at_one: f64,
    pub monotone_on_grid: bool,
    /// Smallest eigenvalue of `f(B) - f(A)` over the sampled pairs.
    pub matrix_monotone_min_eig: f64,
    pub normalized: bool,
    pub symmetric: bool,
    pub pass: bool,
}

/// Which field of covariances to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CovarianceKind {
    Gns,
    Petz(OperatorMonotoneFunction),
}

impl CovarianceKind {
    /// GNS followed by the Petz kinds of the catalog.
    pub fn catalog() -> Vec<Self> {
        std::iter::once(Self::Gns)
            .chain(
                OperatorMonotoneFunction::catalog()
                    .into_iter()
                    .map(Self::Petz),
            )
            .collect()
    }

    pub fn name(self) -> String {
        match self {
            Self::Gns => "gns".into(),
            Self::Petz(f) => f.name().into(),
        }
    }
}

impl fmt::Display for CovarianceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for CovarianceKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        use OperatorMonotoneFunction::*;
        Ok(match s.to_ascii_lowercase().as_str() {
            "gns" => Self::Gns,
            "sld" | "bures" => Self::Petz(Sld),
            "kmb" | "bkm" => Self::Petz(Kmb),
            "wy" => Self::Petz(Wy),
            "rld" => Self::Petz(Rld),
            "unit" => Self::Petz(Unit),
            other => return Err(format!("unknown covariance kind `{other}`")),
        })
    }
}

/// A covariance at `rho` as a Hermitian Gram matrix on the GNS coordinates of `rho`.
///
/// Covariances never mix algebra blocks, so the Gram is stored as one square block per
/// algebra block, laid out along [`GnsSpace::block_range`].
#[derive(Clone, Debug)]
pub struct CovarianceGram<R: Scalar> {
    space: GnsSpace<R>,
    kind: CovarianceKind,
    blocks: Vec<CMat<R>>,
}

impl<R: Scalar> CovarianceGram<R> {
    pub fn space(&self) -> &GnsSpace<R> {
        &self.space
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Gram block of algebra block `k`.
    pub fn block(&self, k: usize) -> &DMatrix<C<R>> {
        &self.blocks[k]
    }

    /// The full `d x d` Gram matrix.
    pub fn gram(&self) -> DMatrix<C<R>> {
        let d = self.space.dim();
        let mut out = CMat::zeros(d, d);
        for (k, b) in self.blocks.iter().enumerate() {
            let r = self.space.block_range(k);
            out.view_mut((r.start, r.start), (r.len(), r.len()))
                .copy_from(b);
        }
        out
    }

    /// `xi^dagger G eta` for GNS coordinate vectors.
    pub fn pair(&self, xi: &DVector<C<R>>, eta: &DVector<C<R>>) -> C<R> {
        let mut acc = C::new(R::zero(), R::zero());
        for (k, b) in self.blocks.iter().enumerate() {
            let r = self.space.block_range(k);
            let x = xi.rows(r.start, r.len());
            let y = eta.rows(r.start, r.len());
            acc += (x.adjoint() * b * y)[(0, 0)];
        }
        acc
    }

    /// Multiplies the product by a positive constant.
    pub fn scaled(mut self, factor: R) -> Self {
        for b in &mut self.blocks {
            *b *= real(factor);
        }
        self
    }
}

/// Petz quadratic form on the element coordinates of one block.
fn petz_block_form<R: Scalar>(density: &CMat<R>, f: OperatorMonotoneFunction) -> CMat<R> {
    let n = density.nrows();
    let e = herm_eigen(density);
    let u = &e.vectors;
    // row-major vec(U^dagger x U) = (U^dagger (x) U^T) vec(x)
    let t = u.adjoint().kronecker(&u.transpose());
    let w = DVector::from_iterator(
        n * n,
        (0..n * n).map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let (di, dj) = (e.values[i], e.values[j]);
            real(dj * f.eval(di / dj))
        }),
    );
    t.adjoint() * DMatrix::from_diagonal(&w) * t
}

fn require_faithful<R: Scalar>(kind: CovarianceKind, space: &GnsSpace<R>) -> Result<()> {
    let state = space.state();
    let min_eig = state.min_eigenvalue();
    if space.dim() < state.shape().element_dim() || min_eig <= R::zero() {
        return Err(Error::UnsupportedKind {
            kind: kind.name(),
            min_eig: min_eig.as_f64(),
        });
    }
    Ok(())
}

/// The covariance of `kind` at the state of `space`, as a Gram matrix on its coordinates.
pub fn covariance_gram<R: Scalar>(
    kind: CovarianceKind,
    space: &GnsSpace<R>,
) -> Result<CovarianceGram<R>> {
    let state = space.state();
    let n_blocks = state.shape().num_blocks();
    let blocks = match kind {
        CovarianceKind::Gns => (0..n_blocks)
            .map(|k| {
                let d = space.block_range(k).len();
                CMat::identity(d, d)
            })
            .collect(),
        CovarianceKind::Petz(f) => {
            require_faithful(kind, space)?;
            state
                .densities()
                .iter()
                .enumerate()
                .map(|(k, density)| {
                    let r = space.block_reps(k);
                    hermitize(&(r.adjoint() * petz_block_form(density, f) * r))
                })
                .collect()
        }
    };
    Ok(CovarianceGram {
        space: space.clone(),
        kind,
        blocks,
    })
}

/// The covariance of `kind` at the state of `space` between algebra elements.
pub fn covariance_eval<R: Scalar>(
    kind: CovarianceKind,
    space: &GnsSpace<R>,
    x: &AlgebraElement<R>,
    y: &AlgebraElement<R>,
) -> Result<C<R>> {
    let state = space.state();
    state.shape().ensure_eq(x.shape())?;
    state.shape().ensure_eq(y.shape())?;
    match kind {
        CovarianceKind::Gns => state.evaluate(&x.adjoint().multiply(y)?),
        CovarianceKind::Petz(f) => {
            require_faithful(kind, space)?;
            let mut acc = C::new(R::zero(), R::zero());
            for (k, density) in state.densities().iter().enumerate() {
                let q = petz_block_form(density, f);
                let n = density.nrows();
                let xv = DVector::from_row_slice(x.block(k).transpose().as_slice());
                let yv = DVector::from_row_slice(y.block(k).transpose().as_slice());
                debug_assert_eq!(xv.len(), n * n);
                acc += (xv.adjoint() * q * yv)[(0, 0)];
            }
            Ok(acc)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub kind: String,
    /// Largest sampled `c_rho(M xi, M xi) / c_sigma(xi, xi)`.
    pub worst_ratio: f64,
    /// Largest generalized eigenvalue of `(M^dagger G_rho M, G_sigma)`.
    pub exact_max_eig: f64,
    pub samples: usize,
    pub sampled_pass: bool,
    pub tol: f64,
    /// Decided by the exact criterion.
    pub pass: bool,
}

/// Checks `c_rho(M xi, M xi) <= c_sigma(xi, xi)` for an induced map `M: H_sigma -> H_rho`.
pub fn monotonicity_from_grams<R: Scalar>(
    kind_label: &str,
    contraction: &DMatrix<C<R>>,
    target_gram: &DMatrix<C<R>>,
    source_gram: &DMatrix<C<R>>,
    n_samples: usize,
    seed: u64,
    tol: R,
) -> Result<MonotonicityReport> {
    let pulled = hermitize(&(contraction.adjoint() * target_gram * contraction));
    let exact = max_generalized_eigenvalue(&pulled, source_gram)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = source_gram.nrows();
    let mut worst = R::zero();
    let mut sampled_pass = true;
    for _ in 0..n_samples {
        let xi = DVector::<C<R>>::from_fn(d, |_, _| gaussian_c(&mut rng));
        let num = (xi.adjoint() * &pulled * &xi)[(0, 0)].re;
        let den = (xi.adjoint() * source_gram * &xi)[(0, 0)].re;
        worst = worst.max(num / den);
        if num > den + tol * xi.norm_squared() {
            sampled_pass = false;
        }
    }
    Ok(MonotonicityReport {
        kind: kind_label.to_string(),
        worst_ratio: worst.as_f64(),
        exact_max_eig: exact.as_f64(),
        samples: n_samples,
        sampled_pass,
        tol: tol.as_f64(),
        pass: exact <= R::one() + tol,
    })
}

/// Monotonicity of `kind` along a morphism `(A, rho) -> (B, sigma)`.
pub fn monotonicity_check<R: Scalar>(
    kind: CovarianceKind,
    morphism: &NcpMorphism<R>,
    n_samples: usize,
    seed: u64,
    tol: R,
) -> Result<MonotonicityReport> {
    let g = GnsContraction::induced(morphism)?;
    let src = covariance_gram(kind, g.source_space())?;
    let tgt = covariance_gram(kind, g.target_space())?;
    monotonicity_from_grams(
        &kind.name(),
        g.matrix(),
        &tgt.gram(),
        &src.gram(),
        n_samples,
        seed,
        tol,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracialCollapseReport {
    pub states_checked: usize,
    /// Largest `|| G_petz - G_gns ||_F` per catalog kind.
    pub per_kind: Vec<(String, f64)>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// On random tracial states every catalog Petz Gram must coincide with the GNS Gram.
///
/// State `i` lives on `shapes[i % shapes.len()]` and is drawn from its own seed, so the
/// report does not depend on the order in which trials run.
pub fn tracial_collapse_check(
    shapes: &[AlgebraShape],
    n_states: usize,
    seed: u64,
    tol: f64,
) -> Result<TracialCollapseReport> {
    if shapes.is_empty() {
        return Err(Error::InvalidShape("no shapes given".into()));
    }
    let kinds = OperatorMonotoneFunction::catalog();
    let per_state: Vec<Vec<f64>> = (0..n_states)
        .into_par_iter()
        .map(|i| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9).wrapping_add(i as u64));
            let tau = NormalState::<f64>::random_tracial(&shapes[i % shapes.len()], &mut rng);
            let space = GnsSpace::new(&tau);
            let gns = covariance_gram(CovarianceKind::Gns, &space)?;
            kinds
                .iter()
                .map(|&f| {
                    let petz = covariance_gram(CovarianceKind::Petz(f), &space)?;
                    Ok((petz.gram() - gns.gram()).norm())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let per_kind: Vec<(String, f64)> = kinds
        .iter()
        .enumerate()
        .map(|(j, f)| {
            (
                f.name().to_string(),
                per_state.iter().map(|r| r[j]).fold(0.0, f64::max),
            )
        })
        .collect();
    let max_deviation = per_kind.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    Ok(TracialCollapseReport {
        states_checked: n_states,
        per_kind,
        max_deviation,
        tol,
        pass: max_deviation <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::basis;
    use crate::channels::CpuMap;
    use proptest::prelude::*;

    fn diag_state(d: &[f64]) -> NormalState<f64> {
        let shape = AlgebraShape::new([d.len()]).unwrap();
        let m = DMatrix::from_diagonal(&DVector::from_iterator(
            d.len(),
            d.iter().map(|&v| C::new(v, 0.)),
        ));
        NormalState::new(shape, vec![m]).unwrap()
    }

    #[test]
    fn catalog_values() {
        use OperatorMonotoneFunction::*;
        assert_eq!(Sld.eval(1.0), 1.0);
        assert_eq!(Kmb.eval(1.0), 1.0);
        assert_eq!(Wy.eval(4.0), 2.25);
        assert!((Rld.eval(3.0f64) - 1.5).abs() < 1e-15);
        // continuity of the KMB series branch
        for t in [1.0 - 2e-6, 1.0 + 2e-6, 1.0 - 5e-7, 1.0 + 5e-7] {
            let exact = (t - 1.0) / f64::ln(t);
            assert!((Kmb.eval(t) - exact).abs() < 1e-9);
        }
        for f in OperatorMonotoneFunction::catalog() {
            for t in [1e-3f64, 0.3, 2.0, 50.0] {
                assert!((f.eval(t) - t * f.eval(1.0 / t)).abs() < 1e-12 * (1.0 + f.eval(t)));
            }
            let c = f.check(100, 3);
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn gns_and_unit_grams_are_identity() {
        let rho = NormalState::<f64>::random(&AlgebraShape::new([2]).unwrap(), true, 4);
        let space = GnsSpace::new(&rho);
        let gns = covariance_gram(CovarianceKind::Gns, &space).unwrap();
        assert_eq!(gns.gram(), DMatrix::identity(4, 4));
        let unit =
            covariance_gram(CovarianceKind::Petz(OperatorMonotoneFunction::Unit), &space).unwrap();
        assert!((unit.gram() - DMatrix::identity(4, 4)).norm() < 1e-10);
        assert_eq!(unit.gram().nrows(), space.dim());
    }

    #[test]
    fn maximally_mixed_collapse() {
        let space = GnsSpace::new(&diag_state(&[0.5, 0.5]));
        for f in OperatorMonotoneFunction::catalog() {
            let g = covariance_gram(CovarianceKind::Petz(f), &space).unwrap();
            assert!((g.gram() - DMatrix::identity(4, 4)).norm() < 1e-10);
        }
    }

    #[test]
    fn petz_rejects_pure_states() {
        let space = GnsSpace::new(&diag_state(&[1.0, 0.0]));
        let kind = CovarianceKind::Petz(OperatorMonotoneFunction::Sld);
        assert!(matches!(
            covariance_gram(kind, &space),
            Err(Error::UnsupportedKind { .. })
        ));
        assert!(covariance_gram(CovarianceKind::Gns, &space).is_ok());
    }

    #[test]
    fn evaluation_examples() {
        let p = NormalState::from_probabilities(&[0.2, 0.5, 0.3]).unwrap();
        let space = GnsSpace::new(&p);
        let units = basis::<f64>(p.shape());
        for (i, fi) in units.iter().enumerate() {
            for (j, fj) in units.iter().enumerate() {
                let want = if i == j { [0.2, 0.5, 0.3][i] } else { 0.0 };
                let got = covariance_eval(CovarianceKind::Gns, &space, fi, fj).unwrap();
                assert!((got - C::new(want, 0.)).norm() < 1e-15);
            }
        }

        let rho = NormalState::<f64>::random(&AlgebraShape::new([2, 1]).unwrap(), true, 8);
        let space = GnsSpace::new(&rho);
        let one = AlgebraElement::identity(rho.shape());
        for kind in CovarianceKind::catalog() {
            let v = covariance_eval(kind, &space, &one, &one).unwrap();
            assert!((v - C::new(1., 0.)).norm() < 1e-12, "{kind}: {v}");
        }

        // SLD weight on the off-diagonal unit at diag(3/4, 1/4) is (3/4 + 1/4) / 2.
        let rho = diag_state(&[0.75, 0.25]);
        let space = GnsSpace::new(&rho);
        let e12 = &basis::<f64>(rho.shape())[1];
        let sld = CovarianceKind::Petz(OperatorMonotoneFunction::Sld);
        let w = covariance_eval(sld, &space, e12, e12).unwrap();
        assert!((w - C::new(0.5, 0.)).norm() < 1e-15);
    }

    #[test]
    fn eval_agrees_with_gram_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for dims in [vec![2], vec![3], vec![2, 1]] {
            let shape = AlgebraShape::new(dims).unwrap();
            let rho = NormalState::<f64>::random_with(&shape, true, &mut rng);
            let space = GnsSpace::new(&rho);
            for kind in CovarianceKind::catalog() {
                let g = covariance_gram(kind, &space).unwrap();
                for _ in 0..10 {
                    let x = AlgebraElement::random(&shape, &mut rng);
                    let y = AlgebraElement::random(&shape, &mut rng);
                    let direct = covariance_eval(kind, &space, &x, &y).unwrap();
                    let via = g.pair(&space.embed(&x).unwrap(), &space.embed(&y).unwrap());
                    assert!(
                        (direct - via).norm() < 1e-9 * (1.0 + direct.norm()),
                        "{kind}"
                    );
                }
                let e = herm_eigen(&g.gram());
                assert!(*e.values.last().unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn abelian_states_collapse_every_kind() {
        let p = NormalState::<f64>::random(&AlgebraShape::abelian(5).unwrap(), true, 3);
        let space = GnsSpace::new(&p);
        for f in OperatorMonotoneFunction::catalog() {
            let g = covariance_gram(CovarianceKind::Petz(f), &space).unwrap();
            assert!((g.gram() - DMatrix::identity(5, 5)).norm() < 1e-10);
        }
    }

    #[test]
    fn monotonicity_examples() {
        let rho = NormalState::<f64>::random(&AlgebraShape::new([2]).unwrap(), true, 1);
        for kind in CovarianceKind::catalog() {
            let r = monotonicity_check(kind, &NcpMorphism::identity(&rho), 50, 1, 1e-9).unwrap();
            assert!((r.exact_max_eig - 1.0).abs() < 1e-12 && (r.worst_ratio - 1.0).abs() < 1e-12);
        }

        let rho = diag_state(&[0.75, 0.25]);
        let dep = NcpMorphism::from_predual(rho, CpuMap::depolarizing(2, 0.5).unwrap()).unwrap();
        for kind in CovarianceKind::catalog() {
            let r = monotonicity_check(kind, &dep, 200, 2, 1e-9).unwrap();
            assert!(r.pass && r.sampled_pass, "{r:?}");
        }
    }

    #[test]
    fn corrupted_gram_fails() {
        let rho = NormalState::<f64>::random(&AlgebraShape::new([2]).unwrap(), true, 1);
        let space = GnsSpace::new(&rho);
        let g = covariance_gram(CovarianceKind::Gns, &space).unwrap();
        let id = DMatrix::identity(4, 4);
        let r = monotonicity_from_grams(
            "gns",
            &id,
            &(g.gram() * C::new(2.0, 0.0)),
            &g.gram(),
            20,
            1,
            1e-9,
        )
        .unwrap();
        assert!(!r.pass && !r.sampled_pass);
        assert!((r.exact_max_eig - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tracial_collapse_examples() {
        let shapes: Vec<AlgebraShape> = [vec![2], vec![1, 1, 1], vec![2, 3]]
            .into_iter()
            .map(|d| AlgebraShape::new(d).unwrap())
            .collect();
        let r = tracial_collapse_check(&shapes, 30, 5, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.per_kind.len(), 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn omf_monotone_along_rays(a in 1e-5f64..1e5, b in 1e-5f64..1e5) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for f in OperatorMonotoneFunction::catalog() {
                prop_assert!(f.eval(lo) <= f.eval(hi) * (1.0 + 1e-14));
            }
        }

        #[test]
        fn random_faithful_morphisms_are_monotone(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shapes = [vec![2], vec![1, 1], vec![2, 1], vec![3]];
            let a = AlgebraShape::new(shapes[(seed % 4) as usize].clone()).unwrap();
            let b = AlgebraShape::new(shapes[(seed / 4 % 4) as usize].clone()).unwrap();
            let phi = CpuMap::<f64>::random(&b, &a, 3, &mut rng);
            let rho = NormalState::random_with(&a, true, &mut rng);
            let m = NcpMorphism::from_predual(rho, phi).unwrap();
            prop_assume!(m.target().min_eigenvalue() > 1e-6);
            for kind in CovarianceKind::catalog() {
                let r = monotonicity_check(kind, &m, 20, seed, 1e-8).unwrap();
                prop_assert!(r.pass, "{:?}", r);
            }
        }
    }
}
