//! Normal states `rho(a) = sum_k Tr(D_k a_k)` on block-diagonal algebras.
//!
//! Probability vectors are states on abelian shapes; there is no separate classical type.

use nalgebra::{ComplexField, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{basis, gaussian_c, AlgebraElement, AlgebraShape};
use crate::error::{Error, Result};
use crate::linalg::{herm_eigen, hermiticity_defect, hermitize, min_eigenvalue, CMat};
use crate::scalar::{real, Scalar, C};
use crate::tol;

#[derive(Clone, Debug, PartialEq)]
pub struct NormalState<R: Scalar> {
    shape: AlgebraShape,
    densities: Vec<CMat<R>>,
}

impl<R: Scalar> NormalState<R> {
    /// Validates densities at the default tolerance (`1e-10`).
    pub fn new(shape: AlgebraShape, densities: Vec<DMatrix<C<R>>>) -> Result<Self> {
        Self::with_tolerance(shape, densities, R::lit(tol::POSITIVITY))
    }

    /// Each block must be Hermitian and positive semidefinite within `tol`, and the total
    /// trace must be one within `tol`. Blocks are stored Hermitized.
    pub fn with_tolerance(
        shape: AlgebraShape,
        densities: Vec<DMatrix<C<R>>>,
        tol: R,
    ) -> Result<Self> {
        let elem = AlgebraElement::new(shape, densities)?;
        for (k, d) in elem.blocks().iter().enumerate() {
            let defect = hermiticity_defect(d);
            if defect > tol {
                return Err(Error::InvalidState {
                    block: k,
                    reason: format!("not Hermitian (defect {:e})", defect.as_f64()),
                });
            }
            let low = min_eigenvalue(d);
            if low < -tol {
                return Err(Error::InvalidState {
                    block: k,
                    reason: format!("negative eigenvalue {:e}", low.as_f64()),
                });
            }
        }
        let tr = elem.trace();
        if (tr.re - R::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidTrace {
                trace: tr.re.as_f64(),
            });
        }
        let shape = elem.shape().clone();
        let densities = elem.blocks().iter().map(hermitize).collect();
        Ok(Self { shape, densities })
    }

    /// State on the abelian algebra `C^n` given by a probability vector.
    pub fn from_probabilities(p: &[R]) -> Result<Self> {
        let shape = AlgebraShape::abelian(p.len())?;
        let densities = p
            .iter()
            .map(|&v| CMat::from_element(1, 1, real(v)))
            .collect();
        Self::new(shape, densities)
    }

    /// Block-scalar (tracial) state with block masses `weights`, `D_k = w_k I / n_k`.
    pub fn tracial(shape: &AlgebraShape, weights: &[R]) -> Result<Self> {
        if weights.len() != shape.num_blocks() {
            return Err(Error::Dimension(format!(
                "expected {} block weights, got {}",
                shape.num_blocks(),
                weights.len()
            )));
        }
        let densities = shape
            .blocks()
            .iter()
            .zip(weights)
            .map(|(&n, &w)| CMat::identity(n, n) * real(w / R::lit(n as f64)))
            .collect();
        Self::new(shape.clone(), densities)
    }

    /// Deterministic random state: Wishart-type blocks normalized to unit trace.
    ///
    /// With `faithful` every block has full rank and the smallest eigenvalue is at least
    /// `1e-3`; otherwise block ranks are drawn uniformly and may be deficient or zero.
    pub fn random(shape: &AlgebraShape, faithful: bool, seed: u64) -> Self {
        Self::random_with(shape, faithful, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn random_with<G: Rng + ?Sized>(shape: &AlgebraShape, faithful: bool, rng: &mut G) -> Self {
        let ranks: Vec<usize> = loop {
            let ranks: Vec<usize> = shape
                .blocks()
                .iter()
                .map(|&n| {
                    if faithful {
                        n + 1
                    } else {
                        rng.random_range(0..=n)
                    }
                })
                .collect();
            if ranks.iter().any(|&r| r > 0) {
                break ranks;
            }
        };
        let mut blocks: Vec<CMat<R>> = shape
            .blocks()
            .iter()
            .zip(&ranks)
            .map(|(&n, &r)| {
                let g = CMat::<R>::from_fn(n, r, |_, _| gaussian_c(rng));
                hermitize(&(&g * g.adjoint()))
            })
            .collect();
        let total = blocks.iter().fold(R::zero(), |acc, b| acc + b.trace().re);
        for b in &mut blocks {
            *b /= real(total);
        }
        if faithful {
            let n_total = R::lit(shape.matrix_dim() as f64);
            let inv_n = R::one() / n_total;
            let floor = R::lit(1.01 * tol::FAITHFUL_FLOOR).min(inv_n * R::lit(0.5));
            let low = blocks
                .iter()
                .map(min_eigenvalue)
                .fold(R::one(), |a, b| a.min(b));
            if low < floor {
                let s = (floor - low) / (inv_n - low);
                for b in &mut blocks {
                    let n = b.nrows();
                    *b = &*b * real(R::one() - s) + CMat::identity(n, n) * real(s * inv_n);
                }
            }
        }
        Self {
            shape: shape.clone(),
            densities: blocks,
        }
    }

    /// Random block-scalar state with strictly positive block masses.
    pub fn random_tracial<G: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut G) -> Self {
        let raw: Vec<f64> = (0..shape.num_blocks())
            .map(|_| 0.05 + rng.random::<f64>())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<R> = raw.iter().map(|w| R::lit(w / total)).collect();
        Self::tracial(shape, &weights).expect("block-scalar weights form a state")
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn densities(&self) -> &[DMatrix<C<R>>] {
        &self.densities
    }

    pub fn density(&self, k: usize) -> &DMatrix<C<R>> {
        &self.densities[k]
    }

    /// The densities as an algebra element (useful for distances between states).
    pub fn as_element(&self) -> AlgebraElement<R> {
        AlgebraElement::from_parts_unchecked(self.shape.clone(), self.densities.clone())
    }

    /// `rho(a) = sum_k Tr(D_k a_k)`.
    pub fn evaluate(&self, a: &AlgebraElement<R>) -> Result<C<R>> {
        self.shape.ensure_eq(a.shape())?;
        Ok(self.evaluate_blocks(a.blocks()))
    }

    pub(crate) fn evaluate_blocks(&self, blocks: &[CMat<R>]) -> C<R> {
        self.densities
            .iter()
            .zip(blocks)
            .fold(C::new(R::zero(), R::zero()), |acc, (d, a)| {
                acc + d.component_mul(&a.transpose()).sum()
            })
    }

    /// Eigenvalues of every block, each sorted descending.
    pub fn block_spectra(&self) -> Vec<Vec<R>> {
        self.densities
            .iter()
            .map(|d| herm_eigen(d).values)
            .collect()
    }

    pub fn max_eigenvalue(&self) -> R {
        self.block_spectra()
            .iter()
            .filter_map(|s| s.first().copied())
            .fold(R::zero(), |a, b| a.max(b))
    }

    pub fn min_eigenvalue(&self) -> R {
        self.densities
            .iter()
            .map(min_eigenvalue)
            .fold(R::max_value().unwrap(), |a, b| a.min(b))
    }

    /// Rank of each block, counting eigenvalues above `rel_tol * max eigenvalue`.
    pub fn ranks(&self, rel_tol: R) -> Vec<usize> {
        let cut = rel_tol * self.max_eigenvalue();
        self.block_spectra()
            .iter()
            .map(|s| s.iter().filter(|&&v| v > cut).count())
            .collect()
    }

    /// Spectral projection onto eigenvalues above `rel_tol * max eigenvalue`, per block.
    pub fn support(&self, rel_tol: R) -> AlgebraElement<R> {
        let cut = rel_tol * self.max_eigenvalue();
        let blocks = self
            .densities
            .iter()
            .map(|d| {
                let e = herm_eigen(d);
                let n = d.nrows();
                let mut p = CMat::zeros(n, n);
                for (j, &v) in e.values.iter().enumerate() {
                    if v > cut {
                        let u = e.vectors.column(j);
                        p += u * u.adjoint();
                    }
                }
                p
            })
            .collect();
        AlgebraElement::from_parts_unchecked(self.shape.clone(), blocks)
    }

    /// Every block has full rank with smallest eigenvalue above `tol`.
    pub fn is_faithful(&self, tol: R) -> bool {
        self.min_eigenvalue() > tol
    }

    /// Traciality by sweeping `rho(ab) = rho(ba)` over all pairs of matrix units.
    ///
    /// Products of units from different blocks vanish, so only same-block pairs are visited.
    pub fn is_tracial(&self, tol: R) -> bool {
        self.tracial_defect() <= tol
    }

    /// Largest `|rho(ab) - rho(ba)|` over pairs of matrix units.
    pub fn tracial_defect(&self) -> R {
        let units = basis::<R>(&self.shape);
        let offsets = self.shape.coord_offsets();
        let mut worst = R::zero();
        for (k, &n) in self.shape.blocks().iter().enumerate() {
            let block = &units[offsets[k]..offsets[k] + n * n];
            for a in block {
                for b in block {
                    let ab = self.evaluate_blocks(a.multiply(b).expect("same shape").blocks());
                    let ba = self.evaluate_blocks(b.multiply(a).expect("same shape").blocks());
                    worst = worst.max((ab - ba).modulus());
                }
            }
        }
        worst
    }

    /// Traciality by the block-scalar criterion: each `D_k` is a multiple of the identity.
    pub fn is_block_scalar(&self, tol: R) -> bool {
        self.densities.iter().all(|d| {
            let n = d.nrows();
            let mean = d.trace() / real(R::lit(n as f64));
            let dev = d - CMat::identity(n, n) * mean;
            dev.iter().all(|z| z.modulus() <= tol)
        })
    }

    pub fn hs_distance(&self, other: &Self) -> Result<R> {
        self.as_element().hs_distance(&other.as_element())
    }
}
