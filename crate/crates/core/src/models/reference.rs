//! Closed-form metrics used as references for pullbacks.
//!
//! Normalization: quantum Fisher information without the factor `1/4`, so pure qubit
//! states carry the round metric of the unit sphere, four times the Fubini-Study metric.

use nalgebra::DMatrix;

use crate::linalg::{herm_eigen, CMat};
use crate::scalar::{real, Scalar};

/// `g_ij = sum_x d_i p_x d_j p_x / p_x`.
pub fn classical_fisher<R: Scalar>(p: &[R], dp: &[Vec<R>]) -> DMatrix<R> {
    DMatrix::from_fn(dp.len(), dp.len(), |i, j| {
        p.iter()
            .enumerate()
            .fold(R::zero(), |acc, (x, &px)| acc + dp[i][x] * dp[j][x] / px)
    })
}

/// Fisher-Rao metric of the simplex in the coordinates `(p_1, .., p_n)`:
/// `delta_ij / p_i + 1 / p_{n+1}`.
pub fn fisher_rao_simplex<R: Scalar>(theta: &[R]) -> DMatrix<R> {
    let last = theta.iter().fold(R::one(), |acc, &t| acc - t);
    DMatrix::from_fn(theta.len(), theta.len(), |i, j| {
        let diag = if i == j {
            R::one() / theta[i]
        } else {
            R::zero()
        };
        diag + R::one() / last
    })
}

/// Fisher-Rao metric of `N(mu, sigma^2)` in `(mu, sigma)`.
pub fn gaussian_fisher<R: Scalar>(sigma: R) -> DMatrix<R> {
    let s2 = sigma * sigma;
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        R::one() / s2,
        R::lit(2.0) / s2,
    ]))
}

/// Quantum Fisher information of `(I + r n . sigma) / 2` in `(r, theta, phi)`.
pub fn qubit_qfi<R: Scalar>(r: R, theta: R) -> DMatrix<R> {
    let r2 = r * r;
    let s = theta.sin();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        R::one() / (R::one() - r2),
        r2,
        r2 * s * s,
    ]))
}

/// Round metric `d theta^2 + sin^2 theta d phi^2`.
pub fn unit_sphere<R: Scalar>(theta: R) -> DMatrix<R> {
    let s = theta.sin();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![R::one(), s * s]))
}

/// Fubini-Study metric of `CP^1` on the Bloch sphere, `(d theta^2 + sin^2 theta d phi^2) / 4`.
pub fn fubini_study<R: Scalar>(theta: R) -> DMatrix<R> {
    unit_sphere(theta) * R::lit(0.25)
}

/// Symmetric logarithmic derivative: the solution `L` of `dD = (D L + L D) / 2` for faithful
/// `D`, computed in the eigenbasis of `D`.
pub fn symmetric_log_derivative<R: Scalar>(d: &CMat<R>, dd: &CMat<R>) -> CMat<R> {
    let e = herm_eigen(d);
    let u = &e.vectors;
    let x = u.adjoint() * dd * u;
    let l = CMat::from_fn(x.nrows(), x.ncols(), |a, b| {
        x[(a, b)] * real(R::lit(2.0) / (e.values[a] + e.values[b]))
    });
    u * l * u.adjoint()
}
