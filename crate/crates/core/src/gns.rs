//! The GNS construction for a normal state and the GNS functor on morphisms.
//!
//! The Gram matrix `G_ij = rho(e_i^dagger e_j)` over the matrix-unit basis is block diagonal
//! along the algebra blocks, so each block is eigendecomposed separately. Eigenvectors whose
//! eigenvalue exceeds `rel_tol * (largest Gram eigenvalue)` span the quotient by the Gelfand
//! ideal; rescaling them by `sqrt(lambda)` gives orthonormal GNS coordinates. Inside a block
//! the coordinates follow descending eigenvalues; blocks appear in algebra order.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::AlgebraElement;
use crate::channels::NcpMorphism;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, herm_eigen, operator_norm, singular_values, CMat, CVec};
use crate::scalar::{real, Scalar, C};
use crate::states::NormalState;
use crate::tol;

#[derive(Clone, Debug)]
struct GnsBlock<R: Scalar> {
    coords: Range<usize>,
    gns: Range<usize>,
    /// `d_k x n_k^2`: element coordinates to orthonormal GNS coordinates.
    iso: CMat<R>,
    /// `n_k^2 x d_k`: coordinates of the representatives of the orthonormal basis.
    reps: CMat<R>,
    /// `n_k^2 x (n_k^2 - d_k)`: orthonormal coordinates spanning the Gelfand ideal.
    null: CMat<R>,
}

/// The GNS Hilbert space `H_rho`, realized on orthonormal coordinates.
#[derive(Clone, Debug)]
pub struct GnsSpace<R: Scalar> {
    state: NormalState<R>,
    blocks: Vec<GnsBlock<R>>,
    dim: usize,
    cyclic: CVec<R>,
    gram_eigenvalues: Vec<R>,
    cutoff: R,
}

impl<R: Scalar> GnsSpace<R> {
    /// GNS space with the default relative cutoff `1e-9`.
    pub fn new(state: &NormalState<R>) -> Self {
        Self::build(state, R::lit(tol::SUPPORT))
    }

    pub fn build(state: &NormalState<R>, rel_tol: R) -> Self {
        let shape = state.shape();
        let spectra: Vec<_> = state
            .densities()
            .iter()
            .map(block_gram)
            .map(|g| herm_eigen(&g))
            .collect();
        let top = spectra
            .iter()
            .filter_map(|e| e.values.first().copied())
            .fold(R::zero(), |a, b| a.max(b));
        let cutoff = rel_tol * top;

        let mut blocks = Vec::with_capacity(spectra.len());
        let mut gram_eigenvalues = Vec::new();
        let mut gns_at = 0;
        for ((eig, &n), off) in spectra
            .iter()
            .zip(shape.blocks())
            .zip(shape.coord_offsets())
        {
            gram_eigenvalues.extend_from_slice(&eig.values);
            let keep = eig.values.iter().take_while(|&&v| v > cutoff).count();
            let m = n * n;
            let kept = eig.vectors.columns(0, keep);
            let sqrt: Vec<R> = eig.values[..keep].iter().map(|v| v.sqrt()).collect();
            let iso = CMat::from_fn(keep, m, |i, j| kept[(j, i)].conj() * real(sqrt[i]));
            let reps = CMat::from_fn(m, keep, |i, j| kept[(i, j)] / real(sqrt[j]));
            let null = eig.vectors.columns(keep, m - keep).into_owned();
            blocks.push(GnsBlock {
                coords: off..off + m,
                gns: gns_at..gns_at + keep,
                iso,
                reps,
                null,
            });
            gns_at += keep;
        }
        gram_eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));

        let mut space = Self {
            state: state.clone(),
            blocks,
            dim: gns_at,
            cyclic: CVec::zeros(0),
            gram_eigenvalues,
            cutoff,
        };
        space.cyclic = space.embed_coords(&AlgebraElement::identity(shape).coords());
        space
    }

    pub fn state(&self) -> &NormalState<R> {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The class `[1]`.
    pub fn cyclic(&self) -> &DVector<C<R>> {
        &self.cyclic
    }

    /// All Gram eigenvalues (kept and discarded), descending.
    pub fn gram_eigenvalues(&self) -> &[R] {
        &self.gram_eigenvalues
    }

    /// Absolute eigenvalue cutoff separating the quotient from the Gelfand ideal.
    pub fn cutoff(&self) -> R {
        self.cutoff
    }

    /// GNS coordinates belonging to algebra block `k`.
    pub fn block_range(&self, k: usize) -> Range<usize> {
        self.blocks[k].gns.clone()
    }

    /// `d_k x n_k^2` block of the isometry for algebra block `k`.
    pub(crate) fn block_iso(&self, k: usize) -> &CMat<R> {
        &self.blocks[k].iso
    }

    /// `n_k^2 x d_k` representatives' coordinates for algebra block `k`.
    pub(crate) fn block_reps(&self, k: usize) -> &CMat<R> {
        &self.blocks[k].reps
    }

    /// Dense `d x sum n_k^2` matrix from element coordinates to GNS coordinates.
    pub fn iso_matrix(&self) -> DMatrix<C<R>> {
        let mut out = CMat::zeros(self.dim, self.state.shape().element_dim());
        for b in &self.blocks {
            out.view_mut((b.gns.start, b.coords.start), b.iso.shape())
                .copy_from(&b.iso);
        }
        out
    }

    /// Dense `sum n_k^2 x d` matrix whose columns are the representatives' coordinates.
    pub fn reps_matrix(&self) -> DMatrix<C<R>> {
        let mut out = CMat::zeros(self.state.shape().element_dim(), self.dim);
        for b in &self.blocks {
            out.view_mut((b.coords.start, b.gns.start), b.reps.shape())
                .copy_from(&b.reps);
        }
        out
    }

    /// Algebra elements whose classes form the orthonormal basis.
    pub fn rep_elements(&self) -> Vec<AlgebraElement<R>> {
        let reps = self.reps_matrix();
        (0..self.dim)
            .map(|j| {
                let col = reps.column(j).into_owned();
                AlgebraElement::from_coords(self.state.shape(), col.as_slice())
                    .expect("coordinate length")
            })
            .collect()
    }

    /// Orthonormal (in Hilbert-Schmidt coordinates) basis of the Gelfand ideal.
    pub fn gelfand_basis(&self) -> Vec<AlgebraElement<R>> {
        let e = self.state.shape().element_dim();
        let mut out = Vec::new();
        for b in &self.blocks {
            for col in b.null.column_iter() {
                let mut v = CVec::zeros(e);
                v.rows_mut(b.coords.start, b.coords.len()).copy_from(&col);
                out.push(
                    AlgebraElement::from_coords(self.state.shape(), v.as_slice()).expect("length"),
                );
            }
        }
        out
    }

    pub fn embed(&self, a: &AlgebraElement<R>) -> Result<DVector<C<R>>> {
        self.state.shape().ensure_eq(a.shape())?;
        Ok(self.embed_coords(&a.coords()))
    }

    pub(crate) fn embed_coords(&self, coords: &CVec<R>) -> CVec<R> {
        let mut out = CVec::zeros(self.dim);
        for b in &self.blocks {
            let part = &b.iso * coords.rows(b.coords.start, b.coords.len());
            out.rows_mut(b.gns.start, b.gns.len()).copy_from(&part);
        }
        out
    }

    /// `<a|b>_rho = rho(a^dagger b)`.
    pub fn inner(&self, a: &AlgebraElement<R>, b: &AlgebraElement<R>) -> Result<C<R>> {
        self.state.evaluate(&a.adjoint().multiply(b)?)
    }
}

/// Gram block `G_{(a,b),(c,d)} = delta_ac D_db` of the matrix units of one algebra block.
fn block_gram<R: Scalar>(d: &CMat<R>) -> CMat<R> {
    let n = d.nrows();
    CMat::from_fn(n * n, n * n, |r, c| {
        let (a, b) = (r / n, r % n);
        let (cc, dd) = (c / n, c % n);
        if a == cc {
            d[(dd, b)]
        } else {
            C::new(R::zero(), R::zero())
        }
    })
}

/// The contraction `H_sigma -> H_rho`, `[b] -> [phi(b)]`, induced by a morphism
/// `(A, rho) -> (B, sigma)`.
#[derive(Clone, Debug)]
pub struct GnsContraction<R: Scalar> {
    source_space: GnsSpace<R>,
    target_space: GnsSpace<R>,
    matrix: CMat<R>,
    leakage: R,
}

impl<R: Scalar> GnsContraction<R> {
    /// `source_space` is built on the morphism's target state `sigma`, `target_space` on its
    /// source state `rho`.
    pub fn new(
        morphism: &NcpMorphism<R>,
        source_space: &GnsSpace<R>,
        target_space: &GnsSpace<R>,
    ) -> Result<Self> {
        check_same_object(source_space.state(), morphism.target())?;
        check_same_object(target_space.state(), morphism.source())?;
        let linear = morphism.cpu().linear();

        let mut leakage = R::zero();
        for b in &source_space.blocks {
            for col in b.null.column_iter() {
                let image = linear.columns(b.coords.start, b.coords.len()) * col;
                let v = target_space.embed_coords(&image);
                leakage = leakage.max(v.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr()));
            }
        }
        if leakage > R::lit(tol::WELL_DEFINED) {
            return Err(Error::IllDefinedContraction {
                leakage: leakage.as_f64(),
            });
        }

        let images = linear * source_space.reps_matrix();
        let mut matrix = CMat::zeros(target_space.dim(), source_space.dim());
        for (j, col) in images.column_iter().enumerate() {
            matrix.set_column(j, &target_space.embed_coords(&col.into_owned()));
        }
        Ok(Self {
            source_space: source_space.clone(),
            target_space: target_space.clone(),
            matrix,
            leakage,
        })
    }

    /// Builds both GNS spaces with the default cutoff.
    pub fn induced(morphism: &NcpMorphism<R>) -> Result<Self> {
        let src = GnsSpace::new(morphism.target());
        let tgt = GnsSpace::new(morphism.source());
        Self::new(morphism, &src, &tgt)
    }

    pub fn matrix(&self) -> &DMatrix<C<R>> {
        &self.matrix
    }

    /// GNS space of the morphism's target state `sigma` (the domain of the contraction).
    pub fn source_space(&self) -> &GnsSpace<R> {
        &self.source_space
    }

    /// GNS space of the morphism's source state `rho` (the codomain of the contraction).
    pub fn target_space(&self) -> &GnsSpace<R> {
        &self.target_space
    }

    /// Largest squared GNS norm of an image of a Gelfand-ideal basis element.
    pub fn leakage(&self) -> R {
        self.leakage
    }

    pub fn operator_norm(&self) -> R {
        operator_norm(&self.matrix)
    }

    pub fn singular_values(&self) -> Vec<R> {
        singular_values(&self.matrix)
    }

    pub fn is_contraction(&self, tol: R) -> bool {
        self.operator_norm() <= R::one() + tol
    }

    /// `|| M cyclic_sigma - cyclic_rho ||`.
    pub fn cyclic_defect(&self) -> R {
        (&self.matrix * self.source_space.cyclic() - self.target_space.cyclic()).norm()
    }
}

fn check_same_object<R: Scalar>(a: &NormalState<R>, b: &NormalState<R>) -> Result<()> {
    a.shape().ensure_eq(b.shape())?;
    let gap = a.hs_distance(b)?;
    if gap > R::lit(tol::STATE_PRESERVATION) {
        return Err(Error::ObjectMismatch {
            deviation: gap.as_f64(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctorLawReport {
    /// Largest `|| G(id) - 1 ||_F` over the objects of the chain.
    pub identity_deviation: f64,
    /// Largest `|| G(Phi_j o ... o Phi_i) - G(Phi_i) ... G(Phi_j) ||_F` over contiguous sub-chains.
    pub composition_deviation: f64,
    pub compositions_checked: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Checks `G(id) = id` and contravariance `G(Phi_2 o Phi_1) = G(Phi_1) G(Phi_2)` along a
/// composable chain `Phi_1, Phi_2, ...` (each target equal to the next source).
pub fn check_functor_laws<R: Scalar>(chain: &[NcpMorphism<R>], tol: R) -> Result<FunctorLawReport> {
    if chain.is_empty() {
        return Err(Error::Dimension("empty morphism chain".into()));
    }
    let mut objects = vec![chain[0].source().clone()];
    objects.extend(chain.iter().map(|m| m.target().clone()));
    let spaces: Vec<GnsSpace<R>> = objects.iter().map(GnsSpace::new).collect();

    let mut identity_deviation = R::zero();
    for (obj, space) in objects.iter().zip(&spaces) {
        let g = GnsContraction::new(&NcpMorphism::identity(obj), space, space)?;
        let d = space.dim();
        identity_deviation =
            identity_deviation.max(frobenius(&(g.matrix() - CMat::identity(d, d))));
    }

    let induced: Vec<CMat<R>> = chain
        .iter()
        .enumerate()
        .map(|(i, m)| GnsContraction::new(m, &spaces[i + 1], &spaces[i]).map(|g| g.matrix))
        .collect::<Result<_>>()?;

    let mut composition_deviation = R::zero();
    let mut checked = 0;
    for i in 0..chain.len() {
        let mut composite = chain[i].clone();
        let mut product = induced[i].clone();
        for j in i + 1..chain.len() {
            composite = NcpMorphism::compose(&chain[j], &composite)?;
            product = &product * &induced[j];
            let direct = GnsContraction::new(&composite, &spaces[j + 1], &spaces[i])?;
            composition_deviation =
                composition_deviation.max(frobenius(&(direct.matrix() - &product)));
            checked += 1;
        }
    }
    let worst = identity_deviation.max(composition_deviation);
    Ok(FunctorLawReport {
        identity_deviation: identity_deviation.as_f64(),
        composition_deviation: composition_deviation.as_f64(),
        compositions_checked: checked,
        tol: tol.as_f64(),
        pass: worst <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{basis, AlgebraShape};
    use crate::channels::CpuMap;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag_state(d: &[f64]) -> NormalState<f64> {
        let shape = AlgebraShape::new([d.len()]).unwrap();
        let m = DMatrix::from_diagonal(&DVector::from_iterator(
            d.len(),
            d.iter().map(|&v| C::new(v, 0.)),
        ));
        NormalState::new(shape, vec![m]).unwrap()
    }

    /// Gram matrix from the definition, through `evaluate`.
    fn gram_by_definition(rho: &NormalState<f64>) -> DMatrix<C<f64>> {
        let units = basis::<f64>(rho.shape());
        DMatrix::from_fn(units.len(), units.len(), |i, j| {
            rho.evaluate(&units[i].adjoint().multiply(&units[j]).unwrap())
                .unwrap()
        })
    }

    #[test]
    fn dimension_examples() {
        let faithful = NormalState::<f64>::random(&AlgebraShape::new([2]).unwrap(), true, 1);
        assert_eq!(GnsSpace::new(&faithful).dim(), 4);
        assert_eq!(GnsSpace::new(&diag_state(&[1., 0.])).dim(), 2);
    }

    #[test]
    fn classical_inner_product() {
        let p = NormalState::from_probabilities(&[0.5, 0.5]).unwrap();
        let space = GnsSpace::new(&p);
        assert_eq!(space.dim(), 2);
        let f = AlgebraElement::from_function(&[1., -1.]).unwrap();
        assert!((space.embed(&f).unwrap().norm() - 1.0f64).abs() < 1e-15);
        let g = AlgebraElement::from_function(&[2., 3.]).unwrap();
        // sum p_i conj(f_i) g_i = 0.5 * (2 - 3)
        assert!((space.inner(&f, &g).unwrap() - C::new(-0.5, 0.)).norm() < 1e-15);
    }

    #[test]
    fn embedding_examples() {
        let pure = diag_state(&[1., 0.]);
        let space = GnsSpace::new(&pure);
        let one = AlgebraElement::identity(pure.shape());
        assert!((space.inner(&one, &one).unwrap() - C::new(1., 0.)).norm() < 1e-15);
        let e12 = &basis::<f64>(pure.shape())[1];
        assert!(space.embed(e12).unwrap().norm() < 1e-12);
    }

    #[test]
    fn block_gram_matches_definition() {
        for (dims, seed) in [(vec![2], 1), (vec![2, 3], 2), (vec![1, 2], 3)] {
            let rho = NormalState::<f64>::random(&AlgebraShape::new(dims).unwrap(), false, seed);
            let space = GnsSpace::new(&rho);
            let iso = space.iso_matrix();
            let g = gram_by_definition(&rho);
            assert!((iso.adjoint() * &iso - &g).norm() < 1e-12);
        }
    }

    #[test]
    fn space_invariants_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for dims in [vec![2], vec![3], vec![1, 1], vec![2, 1], vec![2, 3]] {
            let shape = AlgebraShape::new(dims).unwrap();
            for _ in 0..100 {
                let rho = NormalState::<f64>::random_with(&shape, rng.random::<bool>(), &mut rng);
                let space = GnsSpace::new(&rho);
                let ranks = rho.ranks(1e-9);
                let formula: usize = shape.blocks().iter().zip(&ranks).map(|(n, r)| n * r).sum();
                assert_eq!(space.dim(), formula);
                let g = gram_by_definition(&rho);
                let g_rank = herm_eigen(&g)
                    .values
                    .iter()
                    .filter(|&&v| v > 1e-9 * rho.max_eigenvalue())
                    .count();
                assert_eq!(space.dim(), g_rank);

                let reps = space.rep_elements();
                for (i, a) in reps.iter().enumerate() {
                    for (j, b) in reps.iter().enumerate() {
                        let want = if i == j { 1. } else { 0. };
                        assert!((space.inner(a, b).unwrap() - C::new(want, 0.)).norm() < 1e-9);
                    }
                }
                assert!((space.cyclic().norm() - 1.).abs() < 1e-10);

                let supp = rho.support(1e-9);
                let x = AlgebraElement::random(&shape, &mut rng);
                let killed = x.sub(&x.multiply(&supp).unwrap()).unwrap();
                assert!(space.embed(&killed).unwrap().norm() < 1e-9);

                let y = AlgebraElement::random(&shape, &mut rng);
                let direct = space.inner(&x, &y).unwrap();
                let via = space.embed(&x).unwrap().dotc(&space.embed(&y).unwrap());
                assert!((direct - via).norm() < 1e-9 * (1. + direct.norm()));
            }
        }
    }

    #[test]
    fn contraction_examples() {
        let rho = NormalState::<f64>::random(&AlgebraShape::new([2, 1]).unwrap(), false, 12);
        let id = GnsContraction::induced(&NcpMorphism::identity(&rho)).unwrap();
        let d = id.matrix().nrows();
        assert!((id.matrix() - DMatrix::identity(d, d)).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = AlgebraShape::new([2]).unwrap();
        let rho = NormalState::<f64>::random(&s, true, 5);
        let u = NcpMorphism::from_predual(rho, CpuMap::random_automorphism(&s, &mut rng)).unwrap();
        let g = GnsContraction::induced(&u).unwrap();
        assert!(g.singular_values().iter().all(|v| (v - 1.).abs() < 1e-12));

        let half = diag_state(&[0.5, 0.5]);
        let dep = NcpMorphism::new(
            half.clone(),
            half,
            CpuMap::depolarizing(2, 0.5).unwrap(),
            1e-9,
        )
        .unwrap();
        let sv = GnsContraction::induced(&dep).unwrap().singular_values();
        assert_eq!(sv.len(), 4);
        assert!(sv.iter().all(|&v| v <= 1. + 1e-12));
        // [1] is fixed, traceless directions shrink by 1 - lambda.
        assert!((sv[0] - 1.).abs() < 1e-12);
        assert!(sv[1..].iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let s = AlgebraShape::new([2]).unwrap();
        let rho = NormalState::<f64>::random(&s, true, 1);
        let other = GnsSpace::new(&NormalState::random(&s, true, 2));
        let id = NcpMorphism::identity(&rho);
        assert!(matches!(
            GnsContraction::new(&id, &other, &other),
            Err(Error::ObjectMismatch { .. })
        ));
    }

    #[test]
    fn random_contractions() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let shapes: Vec<AlgebraShape> = [vec![2], vec![3], vec![1, 1], vec![2, 1]]
            .into_iter()
            .map(|d| AlgebraShape::new(d).unwrap())
            .collect();
        for t in 0..200 {
            let a = &shapes[rng.random_range(0..4)];
            let b = &shapes[rng.random_range(0..4)];
            let phi = CpuMap::random(b, a, 1 + t % 3, &mut rng);
            let rho = NormalState::random_with(a, t % 3 != 0, &mut rng);
            let m = NcpMorphism::from_predual(rho, phi).unwrap();
            let g = GnsContraction::induced(&m).unwrap();
            assert!(g.is_contraction(1e-9), "norm {}", g.operator_norm());
            assert!(g.cyclic_defect() < 1e-9);
        }
    }

    #[test]
    fn functor_laws_on_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let s = AlgebraShape::new([2]).unwrap();
        let rho = NormalState::<f64>::random(&s, true, 3);
        let r = check_functor_laws(&[NcpMorphism::identity(&rho)], 1e-12).unwrap();
        assert!(r.identity_deviation < 1e-12 && r.pass);

        let u1 = NcpMorphism::from_predual(rho, CpuMap::random_automorphism(&s, &mut rng)).unwrap();
        let u2 = NcpMorphism::from_predual(
            u1.target().clone(),
            CpuMap::random_automorphism(&s, &mut rng),
        )
        .unwrap();
        let r = check_functor_laws(&[u1, u2], 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.compositions_checked, 1);

        let shapes: Vec<AlgebraShape> = [vec![2], vec![3], vec![1, 1], vec![2, 1]]
            .into_iter()
            .map(|d| AlgebraShape::new(d).unwrap())
            .collect();
        for _ in 0..20 {
            let mut state = NormalState::random_with(
                &shapes[rng.random_range(0..4)],
                rng.random::<bool>(),
                &mut rng,
            );
            let mut chain = Vec::new();
            for _ in 0..3 {
                let next = &shapes[rng.random_range(0..4)];
                let phi = CpuMap::random(next, state.shape(), 2, &mut rng);
                let m = NcpMorphism::from_predual(state, phi).unwrap();
                state = m.target().clone();
                chain.push(m);
            }
            let r = check_functor_laws(&chain, 1e-9).unwrap();
            assert!(r.pass, "{r:?}");
            assert_eq!(r.compositions_checked, 3);
        }
    }

    #[test]
    fn single_precision_gns() {
        let s = AlgebraShape::new([2]).unwrap();
        let rho = NormalState::<f32>::random(&s, true, 6);
        let space = GnsSpace::build(&rho, 1e-5);
        assert_eq!(space.dim(), 4);
        assert!((space.cyclic().norm() - 1.0).abs() < 1e-5);
    }
}
