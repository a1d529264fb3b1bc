//! Univariate normal distributions discretized on a uniform grid of bins, and the affine
//! group acting on them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::channels::{markov_from_stochastic, CpuMap};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{check_len, StatModel};

/// Largest Gaussian mass allowed outside the binning range.
pub const MAX_MASS_LEAK: f64 = 1e-6;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn std_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn std_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn std_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// `P(za < Z < zb)` without cancellation in either tail.
fn std_mass(za: f64, zb: f64) -> f64 {
    if za >= 0.0 {
        std_sf(za) - std_sf(zb)
    } else if zb <= 0.0 {
        std_cdf(zb) - std_cdf(za)
    } else {
        1.0 - std_cdf(za) - std_sf(zb)
    }
}

/// Normal density with mean `mu` and standard deviation `sigma`.
pub fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    std_pdf((x - mu) / sigma) / sigma
}

/// The affine map `x -> sigma x + mu`, `sigma > 0`; also the parameters `(mu, sigma)` of a
/// normal distribution, which is the image of the standard one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub mu: f64,
    pub sigma: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        mu: 0.0,
        sigma: 1.0,
    };

    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() || !mu.is_finite() {
            return Err(Error::Domain(format!(
                "affine parameters ({mu}, {sigma}) need finite mu and sigma > 0"
            )));
        }
        Ok(Self { mu, sigma })
    }

    pub fn apply(self, x: f64) -> f64 {
        self.sigma * x + self.mu
    }

    pub fn apply_inverse(self, y: f64) -> f64 {
        (y - self.mu) / self.sigma
    }

    pub fn to_vec<R: Scalar>(self) -> Vec<R> {
        vec![R::lit(self.mu), R::lit(self.sigma)]
    }
}

/// `a o b`, the map `x -> a(b(x))`: `(mu + sigma mu', sigma sigma')`.
pub fn affine_compose(a: Affine, b: Affine) -> Result<Affine> {
    Affine::new(a.mu, a.sigma)?;
    Affine::new(b.mu, b.sigma)?;
    Affine::new(a.mu + a.sigma * b.mu, a.sigma * b.sigma)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PushforwardReport {
    pub composed: Affine,
    pub points: usize,
    /// `max_x |p_{xi o xi'}(x) - p_{xi'}(xi^{-1}(x)) / sigma|`.
    pub max_deviation: f64,
}

/// Compares the density of `xi o xi'` with the pushforward of `p_{xi'}` along `xi`.
pub fn affine_pushforward_check(
    xi: Affine,
    xi_prime: Affine,
    grid: &[f64],
) -> Result<PushforwardReport> {
    let composed = affine_compose(xi, xi_prime)?;
    let max_deviation = grid
        .iter()
        .map(|&x| {
            let direct = normal_pdf(x, composed.mu, composed.sigma);
            let pushed = normal_pdf(xi.apply_inverse(x), xi_prime.mu, xi_prime.sigma) / xi.sigma;
            (direct - pushed).abs()
        })
        .fold(0.0, f64::max);
    Ok(PushforwardReport {
        composed,
        points: grid.len(),
        max_deviation,
    })
}

/// Normal distributions `N(mu, sigma^2)` as probability vectors over `n_bins` equal bins of
/// `[x_min, x_max]`, with exact bin masses renormalized to the range.
#[derive(Clone, Debug)]
pub struct GaussianModel {
    n_bins: usize,
    x_min: f64,
    x_max: f64,
    shape: AlgebraShape,
}

struct BinMasses {
    p: Vec<f64>,
    dp: [Vec<f64>; 2],
    leak: f64,
}

impl GaussianModel {
    pub fn new(n_bins: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::Domain(format!("need at least 2 bins, got {n_bins}")));
        }
        if x_min >= x_max || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Domain(format!("invalid range [{x_min}, {x_max}]")));
        }
        Ok(Self {
            n_bins,
            x_min,
            x_max,
            shape: AlgebraShape::abelian(n_bins)?,
        })
    }

    /// Range `[mu - half_width sigma, mu + half_width sigma]`.
    pub fn centered(n_bins: usize, mu: f64, sigma: f64, half_width: f64) -> Result<Self> {
        Affine::new(mu, sigma)?;
        Self::new(n_bins, mu - half_width * sigma, mu + half_width * sigma)
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn bin_width(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_bins as f64
    }

    /// Left edge of bin `i`; `edge(n_bins)` is the right end of the range.
    pub fn edge(&self, i: usize) -> f64 {
        if i == self.n_bins {
            self.x_max
        } else {
            self.x_min + i as f64 * self.bin_width()
        }
    }

    /// Gaussian mass outside the range.
    pub fn leaked_mass(&self, a: Affine) -> f64 {
        std_cdf(a.apply_inverse(self.x_min)) + std_sf(a.apply_inverse(self.x_max))
    }

    /// Renormalized bin probabilities of `N(mu, sigma^2)`.
    pub fn probabilities(&self, a: Affine) -> Vec<f64> {
        self.masses(a, false).p
    }

    fn masses(&self, a: Affine, with_derivatives: bool) -> BinMasses {
        let s = a.sigma;
        let z: Vec<f64> = (0..=self.n_bins)
            .map(|i| a.apply_inverse(self.edge(i)))
            .collect();
        let raw: Vec<f64> = z.windows(2).map(|w| std_mass(w[0], w[1])).collect();
        let total = std_mass(z[0], z[self.n_bins]);
        let p: Vec<f64> = raw.iter().map(|m| m / total).collect();
        let dp = if with_derivatives {
            // d z / d mu = -1 / sigma, d z / d sigma = -z / sigma
            let dmu = |za: f64, zb: f64| (std_pdf(za) - std_pdf(zb)) / s;
            let dsig = |za: f64, zb: f64| (za * std_pdf(za) - zb * std_pdf(zb)) / s;
            let renorm = |d: &dyn Fn(f64, f64) -> f64| {
                let dt = d(z[0], z[self.n_bins]);
                z.windows(2)
                    .zip(&p)
                    .map(|(w, &pi)| (d(w[0], w[1]) - pi * dt) / total)
                    .collect::<Vec<_>>()
            };
            [renorm(&dmu), renorm(&dsig)]
        } else {
            [Vec::new(), Vec::new()]
        };
        BinMasses {
            p,
            dp,
            leak: self.leaked_mass(a),
        }
    }

    fn affine<R: Scalar>(theta: &[R]) -> Result<Affine> {
        check_len(theta, 2)?;
        Affine::new(theta[0].as_f64(), theta[1].as_f64())
    }
}

impl<R: Scalar> StatModel<R> for GaussianModel {
    fn name(&self) -> String {
        format!("gaussian:{}:{}:{}", self.n_bins, self.x_min, self.x_max)
    }

    fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    fn param_dim(&self) -> usize {
        2
    }

    fn check_domain(&self, theta: &[R]) -> Result<()> {
        let a = Self::affine(theta)?;
        let leaked = self.leaked_mass(a);
        if leaked.is_nan() || leaked > MAX_MASS_LEAK {
            return Err(Error::MassLeak { leaked });
        }
        Ok(())
    }

    fn density_at(&self, theta: &[R]) -> Result<AlgebraElement<R>> {
        let p = self.probabilities(Self::affine(theta)?);
        AlgebraElement::from_function(&p.iter().map(|&v| R::lit(v)).collect::<Vec<_>>())
    }

    fn analytic_derivatives(&self, theta: &[R]) -> Option<Result<Vec<AlgebraElement<R>>>> {
        let a = match Self::affine(theta) {
            Ok(a) => a,
            Err(e) => return Some(Err(e)),
        };
        let m = self.masses(a, true);
        debug_assert!(m.leak.is_finite());
        Some(
            m.dp.iter()
                .map(|d| {
                    AlgebraElement::from_function(&d.iter().map(|&v| R::lit(v)).collect::<Vec<_>>())
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivarianceReport {
    pub group_element: Affine,
    pub theta: Affine,
    pub mapped_theta: Affine,
    /// `max_i |(S_g p_theta)_i - (p_{g o theta})_i|`.
    pub max_deviation: f64,
    pub l1_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionReport {
    pub first: Affine,
    pub second: Affine,
    pub composed: Affine,
    /// `max_i |(S_g S_h p)_i - (S_{g o h} p)_i|` on the model state `p`.
    pub map_deviation: f64,
    /// `max_i |(S_g S_h p_theta)_i - (p_{(g o h) o theta})_i|`.
    pub state_deviation: f64,
}

/// The affine group acting on a binned Gaussian model through bin-overlap Markov maps.
///
/// `g` moves bin `j` to the interval `g(bin j)` and spreads its mass uniformly over the bins
/// it overlaps; mass pushed past either end of the range stays in the edge bin. The predual
/// of `automorphism_at(g)` is the column-stochastic matrix `S_g`, and `S_{g o h} = S_g S_h`
/// holds exactly only when the maps send bins onto bins.
#[derive(Clone, Debug)]
pub struct GaussianGroupModel {
    base: GaussianModel,
}

impl GaussianGroupModel {
    pub fn new(base: GaussianModel) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &GaussianModel {
        &self.base
    }

    pub fn act_on_params(&self, g: Affine, theta: Affine) -> Result<Affine> {
        affine_compose(g, theta)
    }

    /// Column-stochastic `S_g` acting on probability vectors.
    pub fn stochastic_at(&self, g: Affine) -> Result<DMatrix<f64>> {
        let g = Affine::new(g.mu, g.sigma)?;
        let n = self.base.n_bins;
        let (x_min, x_max) = self.base.range();
        let w = self.base.bin_width();
        let mut s = DMatrix::zeros(n, n);
        for j in 0..n {
            let lo = g.apply(self.base.edge(j));
            let hi = g.apply(self.base.edge(j + 1));
            let mut col = vec![0.0; n];
            col[0] += (hi.min(x_min) - lo).max(0.0);
            col[n - 1] += (hi - lo.max(x_max)).max(0.0);
            let first = (((lo - x_min) / w).floor().max(0.0) as usize).min(n - 1);
            let last = (((hi - x_min) / w).ceil().max(0.0) as usize).min(n);
            for (i, c) in col.iter_mut().enumerate().take(last).skip(first) {
                *c += (hi.min(self.base.edge(i + 1)) - lo.max(self.base.edge(i))).max(0.0);
            }
            let total: f64 = col.iter().sum();
            for (i, c) in col.into_iter().enumerate() {
                s[(i, j)] = c / total;
            }
        }
        Ok(s)
    }

    /// The Markov map `phi_g: f -> f o g` on functions of the bins.
    pub fn automorphism_at(&self, g: Affine) -> Result<CpuMap<f64>> {
        markov_from_stochastic(&self.stochastic_at(g)?)
    }

    fn state_vector(&self, theta: Affine) -> Result<DVector<f64>> {
        <GaussianModel as StatModel<f64>>::check_domain(&self.base, &theta.to_vec::<f64>())?;
        Ok(DVector::from_vec(self.base.probabilities(theta)))
    }

    pub fn equivariance(&self, g: Affine, theta: Affine) -> Result<EquivarianceReport> {
        let mapped_theta = self.act_on_params(g, theta)?;
        let pushed = self.stochastic_at(g)? * self.state_vector(theta)?;
        let diff = pushed - self.state_vector(mapped_theta)?;
        Ok(EquivarianceReport {
            group_element: g,
            theta,
            mapped_theta,
            max_deviation: diff.amax(),
            l1_deviation: diff.abs().sum(),
        })
    }

    /// Compares `S_g S_h` with `S_{g o h}` on the state at `theta`.
    pub fn composition_check(
        &self,
        g: Affine,
        h: Affine,
        theta: Affine,
    ) -> Result<CompositionReport> {
        let composed = affine_compose(g, h)?;
        let p = self.state_vector(theta)?;
        let stepwise = self.stochastic_at(g)? * (self.stochastic_at(h)? * &p);
        let direct = self.stochastic_at(composed)? * &p;
        let target = self.state_vector(affine_compose(composed, theta)?)?;
        Ok(CompositionReport {
            first: h,
            second: g,
            composed,
            map_deviation: (&stepwise - direct).amax(),
            state_deviation: (stepwise - target).amax(),
        })
    }
}
