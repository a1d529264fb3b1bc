use nalgebra::DMatrix;

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::error::{Error, Result};
use crate::scalar::{cplx, real, Scalar, C};

use super::{check_len, StatModel};

/// Interior of the probability simplex on `n + 1` points, parametrized by the first `n`
/// probabilities.
#[derive(Clone, Debug)]
pub struct SimplexModel {
    n: usize,
    shape: AlgebraShape,
}

impl SimplexModel {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("simplex dimension must be at least 1".into()));
        }
        Ok(Self {
            n,
            shape: AlgebraShape::abelian(n + 1)?,
        })
    }

    /// All `n + 1` probabilities.
    pub fn probabilities<R: Scalar>(&self, theta: &[R]) -> Vec<R> {
        let last = theta.iter().fold(R::one(), |acc, &t| acc - t);
        theta.iter().copied().chain(std::iter::once(last)).collect()
    }
}

impl<R: Scalar> StatModel<R> for SimplexModel {
    fn name(&self) -> String {
        format!("simplex:{}", self.n)
    }

    fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    fn param_dim(&self) -> usize {
        self.n
    }

    fn check_domain(&self, theta: &[R]) -> Result<()> {
        check_len(theta, self.n)?;
        if let Some(i) = self
            .probabilities(theta)
            .iter()
            .position(|&p| p <= R::zero())
        {
            return Err(Error::Domain(format!("probability {i} is not positive")));
        }
        Ok(())
    }

    fn density_at(&self, theta: &[R]) -> Result<AlgebraElement<R>> {
        check_len(theta, self.n)?;
        AlgebraElement::from_function(&self.probabilities(theta))
    }

    fn analytic_derivatives(&self, _theta: &[R]) -> Option<Result<Vec<AlgebraElement<R>>>> {
        Some(
            (0..self.n)
                .map(|i| {
                    let mut v = vec![R::zero(); self.n + 1];
                    v[i] = R::one();
                    v[self.n] = -R::one();
                    AlgebraElement::from_function(&v)
                })
                .collect(),
        )
    }
}

/// `(I + r n . sigma) / 2` and its partial derivatives in `(r, theta, phi)`.
fn bloch<R: Scalar>(r: R, theta: R, phi: R) -> [DMatrix<C<R>>; 4] {
    let half = R::lit(0.5);
    let (st, ct) = (theta.sin(), theta.cos());
    let (sp, cp) = (phi.sin(), phi.cos());
    // n . sigma = [[z, x - iy], [x + iy, -z]]
    let pauli = |x: R, y: R, z: R| {
        DMatrix::from_row_slice(2, 2, &[real(z), cplx(x, -y), cplx(x, y), real(-z)])
    };
    let n_sigma = pauli(st * cp, st * sp, ct);
    let d_theta = pauli(ct * cp, ct * sp, -st);
    let d_phi = pauli(-st * sp, st * cp, R::zero());
    let id = DMatrix::<C<R>>::identity(2, 2);
    [
        (id + &n_sigma * real(r)) * real(half),
        n_sigma * real(half),
        d_theta * real(half * r),
        d_phi * real(half * r),
    ]
}

fn m2<R: Scalar>(m: DMatrix<C<R>>) -> AlgebraElement<R> {
    AlgebraElement::new(AlgebraShape::new([2]).expect("valid"), vec![m]).expect("2x2 block")
}

/// Faithful qubit states in Bloch-ball coordinates `(r, theta, phi)`, `0 < r < 1`.
#[derive(Clone, Debug)]
pub struct QubitFaithfulModel {
    shape: AlgebraShape,
}

impl QubitFaithfulModel {
    pub fn new() -> Self {
        Self {
            shape: AlgebraShape::new([2]).expect("valid"),
        }
    }
}

impl Default for QubitFaithfulModel {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Scalar> StatModel<R> for QubitFaithfulModel {
    fn name(&self) -> String {
        "qubit".into()
    }

    fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    fn param_dim(&self) -> usize {
        3
    }

    fn check_domain(&self, theta: &[R]) -> Result<()> {
        check_len(theta, 3)?;
        if theta[0] <= R::zero() || theta[0] >= R::one() {
            return Err(Error::Domain(format!(
                "Bloch radius {} outside (0, 1)",
                theta[0]
            )));
        }
        Ok(())
    }

    fn density_at(&self, theta: &[R]) -> Result<AlgebraElement<R>> {
        check_len(theta, 3)?;
        let [d, ..] = bloch(theta[0], theta[1], theta[2]);
        Ok(m2(d))
    }

    fn analytic_derivatives(&self, theta: &[R]) -> Option<Result<Vec<AlgebraElement<R>>>> {
        let [_, dr, dt, dp] = bloch(theta[0], theta[1], theta[2]);
        Some(Ok(vec![m2(dr), m2(dt), m2(dp)]))
    }
}

/// Pure qubit states on the Bloch sphere, coordinates `(theta, phi)`.
#[derive(Clone, Debug)]
pub struct QubitPureModel {
    shape: AlgebraShape,
}

impl QubitPureModel {
    pub fn new() -> Self {
        Self {
            shape: AlgebraShape::new([2]).expect("valid"),
        }
    }
}

impl Default for QubitPureModel {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Scalar> StatModel<R> for QubitPureModel {
    fn name(&self) -> String {
        "qubit-pure".into()
    }

    fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    fn param_dim(&self) -> usize {
        2
    }

    fn check_domain(&self, theta: &[R]) -> Result<()> {
        check_len(theta, 2)
    }

    fn density_at(&self, theta: &[R]) -> Result<AlgebraElement<R>> {
        check_len(theta, 2)?;
        let [d, ..] = bloch(R::one(), theta[0], theta[1]);
        Ok(m2(d))
    }

    fn analytic_derivatives(&self, theta: &[R]) -> Option<Result<Vec<AlgebraElement<R>>>> {
        let [_, _, dt, dp] = bloch(R::one(), theta[0], theta[1]);
        Some(Ok(vec![m2(dt), m2(dp)]))
    }
}
