//! Statistical models as parametrized families of normal states on a fixed algebra, and
//! the pullback of covariances along them.

mod families;
mod gaussian;
mod pullback;
pub mod reference;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::channels::CpuMap;
use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use crate::states::NormalState;
use crate::tol;

pub use families::{QubitFaithfulModel, QubitPureModel, SimplexModel};
pub use gaussian::{
    affine_compose, affine_pushforward_check, Affine, CompositionReport, EquivarianceReport,
    GaussianGroupModel, GaussianModel, PushforwardReport, MAX_MASS_LEAK,
};
pub use pullback::{
    congruence_invariance_check, metric_pullback, pullback, pullback_at, riesz_score,
    CongruenceReport, Pullback,
};

/// How tangent vectors `d rho / d theta_i` are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Closed-form derivatives when the model has them, central differences otherwise.
    #[default]
    Analytic,
    FiniteDifference {
        h: f64,
    },
}

impl DerivativeMode {
    pub fn central(h: f64) -> Self {
        Self::FiniteDifference { h }
    }
}

/// A smooth family `theta -> rho_theta` of normal states on a fixed algebra.
pub trait StatModel<R: Scalar>: Send + Sync {
    fn name(&self) -> String;

    fn shape(&self) -> &AlgebraShape;

    fn param_dim(&self) -> usize;

    /// `Ok` when `theta` lies in the open parameter domain.
    fn check_domain(&self, theta: &[R]) -> Result<()>;

    /// The density at `theta`, without the domain check.
    fn density_at(&self, theta: &[R]) -> Result<AlgebraElement<R>>;

    fn analytic_derivatives(&self, _theta: &[R]) -> Option<Result<Vec<AlgebraElement<R>>>> {
        None
    }

    fn in_domain(&self, theta: &[R]) -> bool {
        self.check_domain(theta).is_ok()
    }

    fn state_at(&self, theta: &[R]) -> Result<NormalState<R>> {
        self.check_domain(theta)?;
        let d = self.density_at(theta)?;
        NormalState::new(self.shape().clone(), d.blocks().to_vec())
    }

    /// `d D / d theta_i` for every parameter.
    fn derivatives(&self, theta: &[R], mode: DerivativeMode) -> Result<Vec<AlgebraElement<R>>> {
        self.check_domain(theta)?;
        match mode {
            DerivativeMode::Analytic => match self.analytic_derivatives(theta) {
                Some(d) => d,
                None => central_differences(self, theta, R::lit(tol::FD_STEP)),
            },
            DerivativeMode::FiniteDifference { h } => central_differences(self, theta, R::lit(h)),
        }
    }
}

impl<R: Scalar, M: StatModel<R> + ?Sized> StatModel<R> for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn shape(&self) -> &AlgebraShape {
        (**self).shape()
    }
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn check_domain(&self, theta: &[R]) -> Result<()> {
        (**self).check_domain(theta)
    }
    fn density_at(&self, theta: &[R]) -> Result<AlgebraElement<R>> {
        (**self).density_at(theta)
    }
    fn analytic_derivatives(&self, theta: &[R]) -> Option<Result<Vec<AlgebraElement<R>>>> {
        (**self).analytic_derivatives(theta)
    }
}

fn central_differences<R: Scalar, M: StatModel<R> + ?Sized>(
    model: &M,
    theta: &[R],
    h: R,
) -> Result<Vec<AlgebraElement<R>>> {
    if h <= R::zero() {
        return Err(Error::Domain(format!(
            "finite-difference step {h} must be positive"
        )));
    }
    let inv = real(R::one() / (h + h));
    (0..theta.len())
        .map(|i| {
            let mut plus = theta.to_vec();
            let mut minus = theta.to_vec();
            plus[i] += h;
            minus[i] -= h;
            Ok(model
                .density_at(&plus)?
                .sub(&model.density_at(&minus)?)?
                .scale(inv))
        })
        .collect()
}

pub(crate) fn check_len<R: Scalar>(theta: &[R], expected: usize) -> Result<()> {
    if theta.len() != expected {
        return Err(Error::Domain(format!(
            "expected {expected} parameters, got {}",
            theta.len()
        )));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("non-finite parameter".into()));
    }
    Ok(())
}

/// A model pushed forward along the predual of a CPU map `phi: B -> A`, with the base model
/// living on `A`. Congruent embeddings of simplices are the main instance.
#[derive(Clone, Debug)]
pub struct EmbeddedModel<R: Scalar, M> {
    base: M,
    map: CpuMap<R>,
}

impl<R: Scalar, M: StatModel<R>> EmbeddedModel<R, M> {
    pub fn new(base: M, map: CpuMap<R>) -> Result<Self> {
        base.shape().ensure_eq(map.target())?;
        Ok(Self { base, map })
    }

    pub fn base(&self) -> &M {
        &self.base
    }

    pub fn map(&self) -> &CpuMap<R> {
        &self.map
    }
}

impl<R: Scalar, M: StatModel<R>> StatModel<R> for EmbeddedModel<R, M> {
    fn name(&self) -> String {
        format!("embedded({})", self.base.name())
    }

    fn shape(&self) -> &AlgebraShape {
        self.map.source()
    }

    fn param_dim(&self) -> usize {
        self.base.param_dim()
    }

    fn check_domain(&self, theta: &[R]) -> Result<()> {
        self.base.check_domain(theta)
    }

    fn density_at(&self, theta: &[R]) -> Result<AlgebraElement<R>> {
        self.map.predual_element(&self.base.density_at(theta)?)
    }

    fn analytic_derivatives(&self, theta: &[R]) -> Option<Result<Vec<AlgebraElement<R>>>> {
        let base = self.base.analytic_derivatives(theta)?;
        Some(base.and_then(|ds| ds.iter().map(|d| self.map.predual_element(d)).collect()))
    }
}

#[cfg(test)]
mod tests;
