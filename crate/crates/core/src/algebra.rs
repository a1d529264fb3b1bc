//! Finite-dimensional W*-algebras `M_{n_1}(C) + ... + M_{n_K}(C)` and their elements.
//!
//! Coordinates of an element are its matrix entries listed block-major, then row-major
//! inside each block; [`basis`] returns the matrix units in the same order.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, min_eigenvalue, CMat, CVec};
use crate::scalar::{cplx, real, Scalar, C};

/// Block dimensions `(n_1, ..., n_K)` of a direct sum of full matrix algebras.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr", into = "ShapeRepr")]
pub struct AlgebraShape {
    blocks: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct ShapeRepr {
    blocks: Vec<usize>,
}

impl TryFrom<ShapeRepr> for AlgebraShape {
    type Error = Error;
    fn try_from(r: ShapeRepr) -> Result<Self> {
        AlgebraShape::new(r.blocks)
    }
}

impl From<AlgebraShape> for ShapeRepr {
    fn from(s: AlgebraShape) -> Self {
        ShapeRepr { blocks: s.blocks }
    }
}

impl AlgebraShape {
    pub fn new(blocks: impl Into<Vec<usize>>) -> Result<Self> {
        let blocks = blocks.into();
        if blocks.is_empty() {
            return Err(Error::InvalidShape("no blocks".into()));
        }
        if let Some(k) = blocks.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("block {k} has dimension 0")));
        }
        Ok(Self { blocks })
    }

    /// The commutative algebra `C^n`.
    pub fn abelian(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Complex dimension of the algebra, `sum n_k^2`.
    pub fn element_dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Size `N = sum n_k` of the enveloping full matrix algebra `M_N`.
    pub fn matrix_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn is_abelian(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }

    /// Offset of each block in the coordinate vector.
    pub fn coord_offsets(&self) -> Vec<usize> {
        offsets(self.blocks.iter().map(|n| n * n))
    }

    /// Offset of each block along the diagonal of `M_N`.
    pub fn matrix_offsets(&self) -> Vec<usize> {
        offsets(self.blocks.iter().copied())
    }

    pub(crate) fn ensure_eq(&self, other: &AlgebraShape) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.blocks.clone(),
                found: other.blocks.clone(),
            })
        }
    }
}

fn offsets(sizes: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut acc = 0;
    sizes
        .map(|s| {
            let o = acc;
            acc += s;
            o
        })
        .collect()
}

/// An element of a block-diagonal algebra: one complex `n_k x n_k` matrix per block.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement<R: Scalar> {
    shape: AlgebraShape,
    blocks: Vec<CMat<R>>,
}

impl<R: Scalar> AlgebraElement<R> {
    pub fn new(shape: AlgebraShape, blocks: Vec<DMatrix<C<R>>>) -> Result<Self> {
        check_blocks(&shape, &blocks)?;
        Ok(Self { shape, blocks })
    }

    pub(crate) fn from_parts_unchecked(shape: AlgebraShape, blocks: Vec<CMat<R>>) -> Self {
        debug_assert!(check_blocks(&shape, &blocks).is_ok());
        Self { shape, blocks }
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        let blocks = shape.blocks().iter().map(|&n| CMat::zeros(n, n)).collect();
        Self {
            shape: shape.clone(),
            blocks,
        }
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .blocks()
            .iter()
            .map(|&n| CMat::identity(n, n))
            .collect();
        Self {
            shape: shape.clone(),
            blocks,
        }
    }

    /// Element of an abelian algebra from its values, one per point.
    pub fn from_function(values: &[R]) -> Result<Self> {
        let shape = AlgebraShape::abelian(values.len())?;
        let blocks = values
            .iter()
            .map(|&v| CMat::from_element(1, 1, real(v)))
            .collect();
        Ok(Self { shape, blocks })
    }

    /// Block-diagonal element from a full matrix of size `N`, discarding off-diagonal blocks.
    ///
    /// This is the trace-preserving conditional expectation of `M_N` onto the algebra.
    pub fn pinch(shape: &AlgebraShape, dense: &DMatrix<C<R>>) -> Result<Self> {
        let n = shape.matrix_dim();
        if dense.nrows() != n || dense.ncols() != n {
            return Err(Error::Dimension(format!(
                "expected {n}x{n} matrix, got {}x{}",
                dense.nrows(),
                dense.ncols()
            )));
        }
        let blocks = shape
            .blocks()
            .iter()
            .zip(shape.matrix_offsets())
            .map(|(&nk, off)| dense.view((off, off), (nk, nk)).into_owned())
            .collect();
        Ok(Self {
            shape: shape.clone(),
            blocks,
        })
    }

    /// Embeds the element block-diagonally into `M_N`.
    pub fn to_dense(&self) -> DMatrix<C<R>> {
        let n = self.shape.matrix_dim();
        let mut out = CMat::zeros(n, n);
        for (b, off) in self.blocks.iter().zip(self.shape.matrix_offsets()) {
            out.view_mut((off, off), b.shape()).copy_from(b);
        }
        out
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[DMatrix<C<R>>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &DMatrix<C<R>> {
        &self.blocks[k]
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `a b - b a`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b - b * a)
    }

    pub fn scale(&self, s: C<R>) -> Self {
        self.map(|a| a * s)
    }

    pub fn adjoint(&self) -> Self {
        self.map(|a| a.adjoint())
    }

    /// `sum_k Tr(a_k)`.
    pub fn trace(&self) -> C<R> {
        self.blocks
            .iter()
            .fold(C::new(R::zero(), R::zero()), |acc, b| acc + b.trace())
    }

    /// Hilbert-Schmidt norm `(sum_k Tr(a_k^dagger a_k))^{1/2}`.
    pub fn hs_norm(&self) -> R {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .fold(R::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn hs_distance(&self, other: &Self) -> Result<R> {
        Ok(self.sub(other)?.hs_norm())
    }

    /// True iff every block is Hermitian within `tol` and has spectrum `>= -tol`.
    pub fn is_positive(&self, tol: R) -> bool {
        self.blocks
            .iter()
            .all(|b| hermiticity_defect(b) <= tol && min_eigenvalue(b) >= -tol)
    }

    pub fn is_self_adjoint(&self, tol: R) -> bool {
        self.blocks.iter().all(|b| hermiticity_defect(b) <= tol)
    }

    /// Coordinates in the matrix-unit basis (length `sum n_k^2`).
    pub fn coords(&self) -> DVector<C<R>> {
        let mut v = Vec::with_capacity(self.shape.element_dim());
        for b in &self.blocks {
            for i in 0..b.nrows() {
                for j in 0..b.ncols() {
                    v.push(b[(i, j)]);
                }
            }
        }
        CVec::from_vec(v)
    }

    pub fn from_coords(shape: &AlgebraShape, coords: &[C<R>]) -> Result<Self> {
        if coords.len() != shape.element_dim() {
            return Err(Error::Dimension(format!(
                "expected {} coordinates, got {}",
                shape.element_dim(),
                coords.len()
            )));
        }
        let mut blocks = Vec::with_capacity(shape.num_blocks());
        let mut at = 0;
        for &n in shape.blocks() {
            blocks.push(CMat::from_row_slice(n, n, &coords[at..at + n * n]));
            at += n * n;
        }
        Ok(Self {
            shape: shape.clone(),
            blocks,
        })
    }

    /// Entries drawn independently from the standard complex normal distribution.
    pub fn random<G: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut G) -> Self {
        let blocks = shape
            .blocks()
            .iter()
            .map(|&n| CMat::from_fn(n, n, |_, _| gaussian_c(rng)))
            .collect();
        Self {
            shape: shape.clone(),
            blocks,
        }
    }

    fn map(&self, f: impl Fn(&CMat<R>) -> CMat<R>) -> Self {
        Self {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMat<R>, &CMat<R>) -> CMat<R>) -> Result<Self> {
        self.shape.ensure_eq(&other.shape)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            blocks,
        })
    }
}

/// The matrix-unit basis `e^{(k)}_{ij}`, block-major then row-major.
pub fn basis<R: Scalar>(shape: &AlgebraShape) -> Vec<AlgebraElement<R>> {
    let mut out = Vec::with_capacity(shape.element_dim());
    for (k, &n) in shape.blocks().iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let mut e = AlgebraElement::zero(shape);
                e.blocks[k][(i, j)] = real(R::one());
                out.push(e);
            }
        }
    }
    out
}

pub(crate) fn gaussian_c<R: Scalar, G: Rng + ?Sized>(rng: &mut G) -> C<R> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    cplx(R::lit(re), R::lit(im))
}

fn check_blocks<R: Scalar>(shape: &AlgebraShape, blocks: &[CMat<R>]) -> Result<()> {
    if blocks.len() != shape.num_blocks() {
        return Err(Error::Dimension(format!(
            "expected {} blocks, got {}",
            shape.num_blocks(),
            blocks.len()
        )));
    }
    for (k, (b, &n)) in blocks.iter().zip(shape.blocks()).enumerate() {
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::Dimension(format!(
                "block {k} should be {n}x{n}, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
    }
    Ok(())
}
