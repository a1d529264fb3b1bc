//! Linear maps between block-diagonal algebras, CPU maps and NCP morphisms.
//!
//! Maps are stored in the Heisenberg direction `phi: B -> A` as a matrix acting on
//! element coordinates; the predual on states is always derived from it.

use nalgebra::{ComplexField, DMatrix};
use rand::Rng;

use crate::algebra::{basis, gaussian_c, AlgebraElement, AlgebraShape};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, herm_eigen, hermitize, CMat};
use crate::scalar::{real, Scalar, C};
use crate::states::NormalState;
use crate::tol;

/// A linear map `phi: B -> A` between block-diagonal algebras.
///
/// Construction only checks dimensions; complete positivity and unitality are verified by
/// [`CpuMap::cp_report`] and [`CpuMap::unitality_defect`], and enforced by [`NcpMorphism`].
#[derive(Clone, Debug)]
pub struct CpuMap<R: Scalar> {
    source: AlgebraShape,
    target: AlgebraShape,
    linear: CMat<R>,
    kraus: Option<Vec<CMat<R>>>,
}

/// Outcome of the Choi-matrix positivity test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpReport<R> {
    pub cp: bool,
    pub min_eig: R,
    pub trace: R,
    pub tol: R,
}

impl<R: Scalar> CpuMap<R> {
    /// `linear` has one column per coordinate of `source` and one row per coordinate of `target`.
    pub fn from_linear(
        source: AlgebraShape,
        target: AlgebraShape,
        linear: DMatrix<C<R>>,
    ) -> Result<Self> {
        if linear.nrows() != target.element_dim() || linear.ncols() != source.element_dim() {
            return Err(Error::Dimension(format!(
                "linear action must be {}x{}, got {}x{}",
                target.element_dim(),
                source.element_dim(),
                linear.nrows(),
                linear.ncols()
            )));
        }
        Ok(Self {
            source,
            target,
            linear,
            kraus: None,
        })
    }

    /// Tabulates `f` on the matrix-unit basis of `source`.
    pub fn from_fn(
        source: AlgebraShape,
        target: AlgebraShape,
        f: impl Fn(&AlgebraElement<R>) -> AlgebraElement<R>,
    ) -> Result<Self> {
        let mut linear = CMat::zeros(target.element_dim(), source.element_dim());
        for (j, e) in basis::<R>(&source).iter().enumerate() {
            let img = f(e);
            target.ensure_eq(img.shape())?;
            linear.set_column(j, &img.coords());
        }
        Self::from_linear(source, target, linear)
    }

    /// `phi(b) = E_A(sum_i K_i^dagger b K_i)` with `K_i` of size `N_B x N_A` and `E_A` the
    /// block pinching of `A`. Requires `sum_i K_i^dagger K_i = 1` within `1e-10`.
    pub fn from_kraus(
        source: AlgebraShape,
        target: AlgebraShape,
        kraus: Vec<DMatrix<C<R>>>,
    ) -> Result<Self> {
        let (nb, na) = (source.matrix_dim(), target.matrix_dim());
        if kraus.is_empty() {
            return Err(Error::Dimension("empty Kraus list".into()));
        }
        let mut completeness = CMat::<R>::zeros(na, na);
        for k in &kraus {
            if k.nrows() != nb || k.ncols() != na {
                return Err(Error::Dimension(format!(
                    "Kraus operators must be {nb}x{na}, got {}x{}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            completeness += k.adjoint() * k;
        }
        let deviation = frobenius(&(completeness - CMat::identity(na, na)));
        if deviation > R::lit(tol::UNITALITY) {
            return Err(Error::NotUnital {
                deviation: deviation.as_f64(),
            });
        }
        let mut map = Self::from_fn(source, target.clone(), |b| {
            let dense = b.to_dense();
            let mut out = CMat::zeros(na, na);
            for k in &kraus {
                out += k.adjoint() * &dense * k;
            }
            AlgebraElement::pinch(&target, &out).expect("Kraus output has the target size")
        })?;
        map.kraus = Some(kraus);
        Ok(map)
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let d = shape.element_dim();
        Self {
            source: shape.clone(),
            target: shape.clone(),
            linear: CMat::identity(d, d),
            kraus: None,
        }
    }

    /// `b -> u^dagger b u` for a block-diagonal unitary `u`.
    pub fn unitary_conjugation(u: &AlgebraElement<R>) -> Result<Self> {
        let shape = u.shape().clone();
        Self::from_kraus(shape.clone(), shape, vec![u.to_dense()])
    }

    /// `b -> (1 - lambda) b + lambda Tr(b) / n * 1` on `M_n`.
    pub fn depolarizing(n: usize, lambda: R) -> Result<Self> {
        let shape = AlgebraShape::new([n])?;
        let id = AlgebraElement::identity(&shape);
        let inv_n = R::one() / R::lit(n as f64);
        Self::from_fn(shape.clone(), shape, |b| {
            b.scale(real(R::one() - lambda))
                .add(&id.scale(b.trace() * real(lambda * inv_n)))
                .expect("same shape")
        })
    }

    /// Transposition on `M_n`: positive and unital but not completely positive for `n > 1`.
    pub fn transpose_map(n: usize) -> Result<Self> {
        let shape = AlgebraShape::new([n])?;
        Self::from_fn(shape.clone(), shape.clone(), |b| {
            AlgebraElement::new(shape.clone(), vec![b.block(0).transpose()]).expect("same shape")
        })
    }

    /// Random CPU map from Gaussian Kraus operators, rescaled to completeness.
    ///
    /// At least `ceil(N_A / N_B)` operators are drawn so that `sum K^dagger K` is invertible.
    pub fn random<G: Rng + ?Sized>(
        source: &AlgebraShape,
        target: &AlgebraShape,
        n_kraus: usize,
        rng: &mut G,
    ) -> Self {
        let (nb, na) = (source.matrix_dim(), target.matrix_dim());
        let count = n_kraus.max(na.div_ceil(nb)).max(1);
        let raw: Vec<CMat<R>> = (0..count)
            .map(|_| CMat::from_fn(nb, na, |_, _| gaussian_c(rng)))
            .collect();
        let s = raw
            .iter()
            .fold(CMat::<R>::zeros(na, na), |acc, k| acc + k.adjoint() * k);
        let e = herm_eigen(&s);
        let inv_sqrt = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            na,
            e.values.iter().map(|&v| real(R::one() / v.sqrt())),
        ));
        let s_inv_sqrt = &e.vectors * inv_sqrt * e.vectors.adjoint();
        let kraus = raw.iter().map(|k| k * &s_inv_sqrt).collect();
        Self::from_kraus(source.clone(), target.clone(), kraus).expect("normalized Kraus family")
    }

    /// Random block-diagonal unitary conjugation (an automorphism of `shape`).
    pub fn random_automorphism<G: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut G) -> Self {
        let blocks = shape
            .blocks()
            .iter()
            .map(|&n| {
                let g = CMat::<R>::from_fn(n, n, |_, _| gaussian_c(rng));
                g.qr().q()
            })
            .collect();
        let u = AlgebraElement::new(shape.clone(), blocks).expect("unitary blocks");
        Self::unitary_conjugation(&u).expect("unitaries are complete")
    }

    /// Domain `B` of `phi: B -> A`.
    pub fn source(&self) -> &AlgebraShape {
        &self.source
    }

    /// Codomain `A` of `phi: B -> A`.
    pub fn target(&self) -> &AlgebraShape {
        &self.target
    }

    pub fn linear(&self) -> &DMatrix<C<R>> {
        &self.linear
    }

    pub fn kraus(&self) -> Option<&[DMatrix<C<R>>]> {
        self.kraus.as_deref()
    }

    pub fn apply(&self, b: &AlgebraElement<R>) -> Result<AlgebraElement<R>> {
        self.source.ensure_eq(b.shape())?;
        let v = &self.linear * b.coords();
        AlgebraElement::from_coords(&self.target, v.as_slice())
    }

    /// Hilbert-Schmidt norm of `phi(1) - 1`.
    pub fn unitality_defect(&self) -> R {
        let one = AlgebraElement::identity(&self.source);
        let img = self.apply(&one).expect("identity has the source shape");
        img.hs_distance(&AlgebraElement::identity(&self.target))
            .expect("same shape")
    }

    pub fn is_unital(&self, tol: R) -> bool {
        self.unitality_defect() <= tol
    }

    /// Normalized Choi matrix `(1/N_B) sum_ij e_ij (x) phi(E(e_ij))` of the extension of `phi`
    /// to `M_{N_B}` through the block pinching `E` of `B`.
    pub fn choi(&self) -> DMatrix<C<R>> {
        let (nb, na) = (self.source.matrix_dim(), self.target.matrix_dim());
        let mut choi = CMat::zeros(nb * na, nb * na);
        let scale = real(R::one() / R::lit(nb as f64));
        let coord_off = self.source.coord_offsets();
        for (k, (&n, moff)) in self
            .source
            .blocks()
            .iter()
            .zip(self.source.matrix_offsets())
            .enumerate()
        {
            for i in 0..n {
                for j in 0..n {
                    let col = self.linear.column(coord_off[k] + i * n + j);
                    let img = AlgebraElement::from_coords(&self.target, col.as_slice())
                        .expect("column has target size")
                        .to_dense();
                    let (gi, gj) = (moff + i, moff + j);
                    choi.view_mut((gi * na, gj * na), (na, na))
                        .copy_from(&(img * scale));
                }
            }
        }
        hermitize(&choi)
    }

    /// Complete positivity: smallest Choi eigenvalue `>= -tol * Tr(choi)`.
    pub fn cp_report(&self, tol: R) -> CpReport<R> {
        let choi = self.choi();
        let trace = choi.trace().re;
        let min_eig = herm_eigen(&choi)
            .values
            .last()
            .copied()
            .unwrap_or(R::zero());
        CpReport {
            cp: min_eig >= -tol * trace.abs().max(R::one()),
            min_eig,
            trace,
            tol,
        }
    }

    pub fn is_cp(&self, tol: R) -> bool {
        self.cp_report(tol).cp
    }

    /// Linear dual on densities: returns `S` with `Tr(S b) = Tr(D phi(b))` for all `b`,
    /// without validating positivity (used for tangent vectors).
    pub fn predual_element(&self, density: &AlgebraElement<R>) -> Result<AlgebraElement<R>> {
        self.target.ensure_eq(density.shape())?;
        let pairing = density_pairing(density);
        let s = self.linear.transpose() * pairing;
        let t = AlgebraElement::from_coords(&self.source, s.as_slice())?;
        Ok(pairing_to_density(&t))
    }

    /// The state `phi_*(rho) = rho o phi` on the domain algebra.
    pub fn predual(&self, rho: &NormalState<R>) -> Result<NormalState<R>> {
        let s = self.predual_element(&rho.as_element())?;
        NormalState::with_tolerance(self.source.clone(), s.blocks().to_vec(), R::lit(1e-9))
            .map_err(|e| Error::NonCpuInput(e.to_string()))
    }

    /// `self o inner`: apply `inner: C -> B` first, then `self: B -> A`.
    pub fn after(&self, inner: &CpuMap<R>) -> Result<CpuMap<R>> {
        self.source.ensure_eq(&inner.target)?;
        let linear = &self.linear * &inner.linear;
        let kraus = match (&self.kraus, &inner.kraus) {
            (Some(outer_k), Some(inner_k)) => Some(compose_kraus(outer_k, inner_k, &self.source)),
            _ => None,
        };
        Ok(CpuMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            linear,
            kraus,
        })
    }
}

/// Kraus operators of `E_A(sum K1^dagger E_B(sum K2^dagger c K2) K1)`: `{K2 P_k K1}`.
fn compose_kraus<R: Scalar>(
    outer: &[CMat<R>],
    inner: &[CMat<R>],
    middle: &AlgebraShape,
) -> Vec<CMat<R>> {
    let n = middle.matrix_dim();
    let projections: Vec<CMat<R>> = middle
        .blocks()
        .iter()
        .zip(middle.matrix_offsets())
        .map(|(&nk, off)| {
            let mut p = CMat::zeros(n, n);
            for i in off..off + nk {
                p[(i, i)] = real(R::one());
            }
            p
        })
        .collect();
    let mut out = Vec::new();
    for k2 in inner {
        for p in &projections {
            for k1 in outer {
                let k = k2 * p * k1;
                if frobenius(&k) > R::lit(1e-14) {
                    out.push(k);
                }
            }
        }
    }
    out
}

/// Coordinates `r` with `Tr(D a) = r . coords(a)`, i.e. the coordinates of `D^T`.
fn density_pairing<R: Scalar>(d: &AlgebraElement<R>) -> nalgebra::DVector<C<R>> {
    pairing_to_density(d).coords()
}

fn pairing_to_density<R: Scalar>(t: &AlgebraElement<R>) -> AlgebraElement<R> {
    let blocks = t.blocks().iter().map(|b| b.transpose()).collect();
    AlgebraElement::new(t.shape().clone(), blocks).expect("transpose keeps block sizes")
}

/// Markov map between abelian algebras from a column-stochastic `m x n` matrix `s`.
///
/// The map acts on functions as `phi(f)_j = sum_i s_ij f_i` (domain `C^m`, codomain `C^n`)
/// and its predual sends probability vectors `p` to `s p`.
pub fn markov_from_stochastic<R: Scalar>(s: &DMatrix<R>) -> Result<CpuMap<R>> {
    let (m, n) = s.shape();
    if m == 0 || n == 0 {
        return Err(Error::NotStochastic("empty matrix".into()));
    }
    let eps = R::lit(1e-12);
    if let Some(v) = s.iter().find(|&&v| v < R::zero()) {
        return Err(Error::NotStochastic(format!("negative entry {v}")));
    }
    for j in 0..n {
        let sum = s.column(j).sum();
        if (sum - R::one()).abs() > eps {
            return Err(Error::NotStochastic(format!("column {j} sums to {sum}")));
        }
    }
    let linear = s.transpose().map(real);
    CpuMap::from_linear(AlgebraShape::abelian(m)?, AlgebraShape::abelian(n)?, linear)
}

/// A congruent embedding of the simplex of `n` points into that of `m` points, given by a
/// surjective partition `{0..m} -> {0..n}` and positive weights summing to one on each fiber.
#[derive(Clone, Debug)]
pub struct CongruentEmbedding<R: Scalar> {
    partition: Vec<usize>,
    weights: Vec<R>,
    n: usize,
    map: CpuMap<R>,
}

impl<R: Scalar> CongruentEmbedding<R> {
    pub fn new(partition: Vec<usize>, n: usize, weights: Vec<R>) -> Result<Self> {
        let m = partition.len();
        if weights.len() != m {
            return Err(Error::InvalidEmbedding(format!(
                "{m} points but {} weights",
                weights.len()
            )));
        }
        let mut fiber_sum = vec![R::zero(); n];
        for (i, (&j, &w)) in partition.iter().zip(&weights).enumerate() {
            if j >= n {
                return Err(Error::InvalidEmbedding(format!(
                    "point {i} maps to {j} >= {n}"
                )));
            }
            if w <= R::zero() {
                return Err(Error::InvalidEmbedding(format!(
                    "weight {i} is not positive"
                )));
            }
            fiber_sum[j] += w;
        }
        for (j, &s) in fiber_sum.iter().enumerate() {
            if (s - R::one()).abs() > R::lit(1e-12) {
                return Err(Error::InvalidEmbedding(format!("fiber {j} has weight {s}")));
            }
        }
        let stochastic = DMatrix::from_fn(m, n, |i, j| {
            if partition[i] == j {
                weights[i]
            } else {
                R::zero()
            }
        });
        let map = markov_from_stochastic(&stochastic)?;
        Ok(Self {
            partition,
            weights,
            n,
            map,
        })
    }

    /// Random surjective partition of `m` points onto `n` with random positive weights.
    pub fn random<G: Rng + ?Sized>(n: usize, m: usize, rng: &mut G) -> Result<Self> {
        if m < n || n == 0 {
            return Err(Error::InvalidEmbedding(format!(
                "cannot split {n} points into {m}"
            )));
        }
        let mut partition: Vec<usize> = (0..n).collect();
        partition.extend((n..m).map(|_| rng.random_range(0..n)));
        for i in (1..m).rev() {
            let j = rng.random_range(0..=i);
            partition.swap(i, j);
        }
        let raw: Vec<f64> = (0..m).map(|_| 0.1 + rng.random::<f64>()).collect();
        let mut fiber = vec![0.0; n];
        for (&j, &w) in partition.iter().zip(&raw) {
            fiber[j] += w;
        }
        let weights = partition
            .iter()
            .zip(&raw)
            .map(|(&j, &w)| R::lit(w / fiber[j]))
            .collect();
        Self::new(partition, n, weights)
    }

    /// Each of the `n` points split into `parts` equally weighted points.
    pub fn refinement(n: usize, parts: usize) -> Result<Self> {
        let partition = (0..n * parts).map(|i| i / parts).collect();
        let w = R::one() / R::lit(parts as f64);
        Self::new(partition, n, vec![w; n * parts])
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    /// The Markov map `C^m -> C^n` whose predual performs the embedding.
    pub fn map(&self) -> &CpuMap<R> {
        &self.map
    }

    /// The fiber-summing Markov map, whose predual sends `q` to `p_j = sum_{i in fiber j} q_i`.
    pub fn left_inverse(&self) -> CpuMap<R> {
        let m = self.partition.len();
        let s = DMatrix::from_fn(self.n, m, |j, i| {
            if self.partition[i] == j {
                R::one()
            } else {
                R::zero()
            }
        });
        markov_from_stochastic(&s).expect("fiber sums are stochastic")
    }
}

/// A morphism `(A, rho) -> (B, sigma)` carried by a CPU map `phi: B -> A` with `rho o phi = sigma`.
#[derive(Clone, Debug)]
pub struct NcpMorphism<R: Scalar> {
    source: NormalState<R>,
    target: NormalState<R>,
    cpu: CpuMap<R>,
    preservation_defect: R,
}

impl<R: Scalar> NcpMorphism<R> {
    /// Verifies unitality (`1e-10`), complete positivity (`1e-9`) and state preservation (`tol`).
    pub fn new(
        source: NormalState<R>,
        target: NormalState<R>,
        cpu: CpuMap<R>,
        tol: R,
    ) -> Result<Self> {
        source.shape().ensure_eq(cpu.target())?;
        target.shape().ensure_eq(cpu.source())?;
        let unital = cpu.unitality_defect();
        if unital > R::lit(tol::UNITALITY) {
            return Err(Error::NotUnital {
                deviation: unital.as_f64(),
            });
        }
        let cp = cpu.cp_report(R::lit(tol::CHOI));
        if !cp.cp {
            return Err(Error::NotCompletelyPositive {
                min_eig: cp.min_eig.as_f64(),
            });
        }
        let preservation_defect = preservation_defect(&source, &target, &cpu);
        if preservation_defect > tol {
            return Err(Error::StatePreservation {
                deviation: preservation_defect.as_f64(),
            });
        }
        Ok(Self {
            source,
            target,
            cpu,
            preservation_defect,
        })
    }

    /// The morphism out of `(A, rho)` whose target state is the predual `phi_*(rho)`.
    pub fn from_predual(source: NormalState<R>, cpu: CpuMap<R>) -> Result<Self> {
        let target = cpu.predual(&source)?;
        Self::new(source, target, cpu, R::lit(tol::STATE_PRESERVATION))
    }

    pub fn identity(state: &NormalState<R>) -> Self {
        Self {
            source: state.clone(),
            target: state.clone(),
            cpu: CpuMap::identity(state.shape()),
            preservation_defect: R::zero(),
        }
    }

    /// `second o first : (A, rho) -> (C, gamma)` for `first: (A, rho) -> (B, sigma)` and
    /// `second: (B, sigma) -> (C, gamma)`; the CPU map is `phi_first o phi_second`.
    pub fn compose(second: &Self, first: &Self) -> Result<Self> {
        first.target.shape().ensure_eq(second.source.shape())?;
        let gap = first.target.hs_distance(&second.source)?;
        if gap > R::lit(tol::STATE_PRESERVATION) {
            return Err(Error::ObjectMismatch {
                deviation: gap.as_f64(),
            });
        }
        let cpu = first.cpu.after(&second.cpu)?;
        let preservation_defect = preservation_defect(&first.source, &second.target, &cpu);
        Ok(Self {
            source: first.source.clone(),
            target: second.target.clone(),
            cpu,
            preservation_defect,
        })
    }

    /// `(A, rho)`.
    pub fn source(&self) -> &NormalState<R> {
        &self.source
    }

    /// `(B, sigma)`.
    pub fn target(&self) -> &NormalState<R> {
        &self.target
    }

    pub fn cpu(&self) -> &CpuMap<R> {
        &self.cpu
    }

    /// `max_b |rho(phi(b)) - sigma(b)|` over the matrix units of `B`.
    pub fn preservation_defect(&self) -> R {
        self.preservation_defect
    }
}

fn preservation_defect<R: Scalar>(
    rho: &NormalState<R>,
    sigma: &NormalState<R>,
    cpu: &CpuMap<R>,
) -> R {
    let pulled = cpu.linear().transpose() * density_pairing(&rho.as_element());
    let direct = density_pairing(&sigma.as_element());
    (pulled - direct)
        .iter()
        .fold(R::zero(), |acc, z| acc.max(z.modulus()))
}
