use std::path::PathBuf;
use std::str::FromStr;

use clap::Subcommand;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use ncp_lab::covariance::{covariance_gram, monotonicity_from_grams, tracial_collapse_check};
use ncp_lab::io::{ChannelRepr, MorphismRepr, StateRepr};
use ncp_lab::models::{
    affine_pushforward_check, congruence_invariance_check, pullback, reference, Affine,
    GaussianGroupModel, GaussianModel, QubitFaithfulModel, QubitPureModel, SimplexModel,
};
use ncp_lab::{
    tol, AlgebraShape, CongruentEmbedding, CovarianceKind, DerivativeMode, GnsContraction,
    GnsSpace, OperatorMonotoneFunction, StatModel,
};

use crate::report::{read_json, InputError, Report};

pub struct Options {
    pub seed: u64,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// GNS space of a state, or the contraction induced by a morphism.
    Gns {
        #[arg(
            long,
            conflicts_with = "morphism",
            required_unless_present = "morphism"
        )]
        state: Option<PathBuf>,
        #[arg(long)]
        morphism: Option<PathBuf>,
    },
    /// Complete positivity and unitality of a channel.
    CheckChannel {
        #[arg(long)]
        channel: PathBuf,
    },
    /// Monotonicity of a covariance along a morphism.
    Monotonicity {
        #[arg(long, default_value = "gns")]
        kind: CovarianceKind,
        #[arg(long)]
        morphism: PathBuf,
        /// Fault injection: multiply the covariance at the source object by this factor.
        #[arg(long, hide = true)]
        corrupt_gram: Option<f64>,
    },
    /// Metric pulled back along a model at one parameter point.
    Pullback {
        /// simplex:N, qubit, qubit-pure, gaussian:BINS or gaussian:BINS:XMIN:XMAX
        #[arg(long)]
        model: ModelSpec,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Vec<f64>,
        #[arg(long, default_value = "gns")]
        kind: CovarianceKind,
        /// Use central differences with this step instead of analytic derivatives.
        #[arg(long)]
        fd_step: Option<f64>,
    },
    /// Discretized Gaussian model: metric convergence and the affine group action.
    GaussianDemo {
        #[arg(long, default_value_t = 4096)]
        bins: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
    /// Every catalog Petz covariance agrees with the GNS one on tracial states.
    TracialUniqueness {
        /// Semicolon-separated block lists, e.g. "2;1,1,1;2,3".
        #[arg(long, default_value = "2;3;1,1,1;2,1;2,3")]
        shapes: String,
    },
    /// Invariance of the pulled-back metric under random congruent embeddings.
    CongruenceInvariance {
        #[arg(long)]
        model: ModelSpec,
        /// Parameter points per embedding.
        #[arg(long, default_value_t = 5)]
        points: usize,
    },
    /// Operator monotone functions and their sanity checks.
    OmfCatalog,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Simplex(usize),
    Qubit,
    QubitPure,
    Gaussian {
        bins: usize,
        range: Option<(f64, f64)>,
    },
}

impl FromStr for ModelSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let int = |t: &str| t.parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
        match parts.as_slice() {
            ["simplex", n] => Ok(Self::Simplex(int(n)?)),
            ["qubit"] => Ok(Self::Qubit),
            ["qubit-pure"] => Ok(Self::QubitPure),
            ["gaussian", b] => Ok(Self::Gaussian {
                bins: int(b)?,
                range: None,
            }),
            ["gaussian", b, lo, hi] => Ok(Self::Gaussian {
                bins: int(b)?,
                range: Some((num(lo)?, num(hi)?)),
            }),
            _ => Err(format!("unknown model `{s}`")),
        }
    }
}

/// Half-width, in standard deviations, of the default Gaussian binning range.
const GAUSSIAN_HALF_WIDTH: f64 = 10.0;

impl ModelSpec {
    fn build(&self, theta: &[f64]) -> Result<Box<dyn StatModel<f64>>, InputError> {
        Ok(match self {
            Self::Simplex(n) => Box::new(SimplexModel::new(*n)?),
            Self::Qubit => Box::new(QubitFaithfulModel::new()),
            Self::QubitPure => Box::new(QubitPureModel::new()),
            Self::Gaussian { bins, range } => Box::new(self.gaussian(*bins, *range, theta)?),
        })
    }

    fn gaussian(
        &self,
        bins: usize,
        range: Option<(f64, f64)>,
        theta: &[f64],
    ) -> Result<GaussianModel, InputError> {
        Ok(match range {
            Some((lo, hi)) => GaussianModel::new(bins, lo, hi)?,
            None => {
                let (mu, sigma) = match theta {
                    [mu, sigma] => (*mu, *sigma),
                    _ => (0.0, 1.0),
                };
                GaussianModel::centered(bins, mu, sigma, GAUSSIAN_HALF_WIDTH)?
            }
        })
    }

    /// Reference metric and whether the deviation is measured relative to its size.
    fn oracle(&self, theta: &[f64], kind: CovarianceKind) -> Option<(DMatrix<f64>, bool)> {
        let abelian = matches!(self, Self::Simplex(_) | Self::Gaussian { .. });
        let qfi_kind = matches!(
            kind,
            CovarianceKind::Gns | CovarianceKind::Petz(OperatorMonotoneFunction::Sld)
        );
        if !(abelian || qfi_kind) {
            return None;
        }
        match self {
            Self::Simplex(_) => Some((reference::fisher_rao_simplex(theta), false)),
            Self::Qubit => Some((reference::qubit_qfi(theta[0], theta[1]), false)),
            Self::QubitPure => Some((reference::unit_sphere(theta[0]), false)),
            Self::Gaussian { .. } => Some((reference::gaussian_fisher(theta[1]), true)),
        }
    }

    fn default_tol(&self) -> f64 {
        match self {
            Self::Simplex(_) => 1e-9,
            Self::Qubit | Self::QubitPure => 1e-8,
            Self::Gaussian { .. } => 1e-2,
        }
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn run(command: &Command, o: &Options) -> Result<Report, InputError> {
    match command {
        Command::Gns { state, morphism } => match (state, morphism) {
            (Some(path), _) => gns_state(&read_json::<StateRepr>(path)?, o),
            (None, Some(path)) => gns_morphism(&read_json::<MorphismRepr>(path)?, o),
            (None, None) => Err(InputError::msg("one of --state or --morphism is required")),
        },
        Command::CheckChannel { channel } => check_channel(&read_json::<ChannelRepr>(channel)?, o),
        Command::Monotonicity {
            kind,
            morphism,
            corrupt_gram,
        } => monotonicity(
            *kind,
            &read_json::<MorphismRepr>(morphism)?,
            *corrupt_gram,
            o,
        ),
        Command::Pullback {
            model,
            theta,
            kind,
            fd_step,
        } => pullback_cmd(model, theta, *kind, *fd_step, o),
        Command::GaussianDemo { bins, mu, sigma } => gaussian_demo(*bins, *mu, *sigma, o),
        Command::TracialUniqueness { shapes } => tracial(shapes, o),
        Command::CongruenceInvariance { model, points } => congruence(model, *points, o),
        Command::OmfCatalog => omf_catalog(o),
    }
}

fn gns_state(repr: &StateRepr, o: &Options) -> Result<Report, InputError> {
    let state = repr.state()?;
    let space = GnsSpace::new(&state);
    let cyclic_norm = space.cyclic().norm();
    let tol = o.tol.unwrap_or(1e-12);
    let pass = (cyclic_norm - 1.0).abs() <= tol;
    let body = json!({
        "shape": state.shape(),
        "dim": space.dim(),
        "gelfand_dim": state.shape().element_dim() - space.dim(),
        "cutoff": space.cutoff(),
        "gram_eigenvalues": space.gram_eigenvalues(),
        "cyclic_norm": cyclic_norm,
    });
    Ok(Report::new("gns", o.seed, body, pass)
        .tol("cyclic_norm", tol)
        .tol("support", tol::SUPPORT))
}

fn gns_morphism(repr: &MorphismRepr, o: &Options) -> Result<Report, InputError> {
    let m = repr.morphism()?;
    let g = GnsContraction::induced(&m)?;
    let tol = o.tol.unwrap_or(tol::CONTRACTION);
    let leak_ok = g.leakage() <= tol::WELL_DEFINED;
    let body = json!({
        "source_dim": g.source_space().dim(),
        "target_dim": g.target_space().dim(),
        "operator_norm": g.operator_norm(),
        "singular_values": g.singular_values(),
        "leakage": g.leakage(),
        "cyclic_defect": g.cyclic_defect(),
        "is_contraction": g.is_contraction(tol),
    });
    Ok(
        Report::new("gns", o.seed, body, g.is_contraction(tol) && leak_ok)
            .tol("contraction", tol)
            .tol("well_defined", tol::WELL_DEFINED),
    )
}

fn check_channel(repr: &ChannelRepr, o: &Options) -> Result<Report, InputError> {
    let phi = repr.channel()?;
    let tol = o.tol.unwrap_or(tol::CHOI);
    let cp = phi.cp_report(tol);
    let unital = phi.is_unital(tol::UNITALITY);
    let body = json!({
        "source": phi.source(),
        "target": phi.target(),
        "cp": cp.cp,
        "unital": unital,
        "min_choi_eig": cp.min_eig,
        "choi_trace": cp.trace,
        "unitality_defect": phi.unitality_defect(),
    });
    Ok(Report::new("check-channel", o.seed, body, cp.cp && unital)
        .tol("choi", tol)
        .tol("unitality", tol::UNITALITY))
}

fn monotonicity(
    kind: CovarianceKind,
    repr: &MorphismRepr,
    corrupt: Option<f64>,
    o: &Options,
) -> Result<Report, InputError> {
    let m = repr.morphism()?;
    let g = GnsContraction::induced(&m)?;
    let source = covariance_gram(kind, g.source_space())?;
    let mut target = covariance_gram(kind, g.target_space())?;
    if let Some(f) = corrupt {
        target = target.scaled(f);
    }
    let tol = o.tol.unwrap_or(1e-8);
    let samples = o.samples.unwrap_or(1000);
    let r = monotonicity_from_grams(
        &kind.name(),
        g.matrix(),
        &target.gram(),
        &source.gram(),
        samples,
        o.seed,
        tol,
    )?;
    let pass = r.pass;
    let mut body = serde_json::to_value(&r).expect("serializable");
    body["corrupt_gram"] = json!(corrupt);
    Ok(Report::new("monotonicity", o.seed, body, pass).tol("monotonicity", tol))
}

#[derive(Serialize)]
struct PullbackBody {
    model: String,
    theta: Vec<f64>,
    kind: String,
    derivatives: DerivativeMode,
    metric: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    oracle: Option<Vec<Vec<f64>>>,
    deviation: Option<f64>,
    deviation_is_relative: bool,
}

fn pullback_cmd(
    spec: &ModelSpec,
    theta: &[f64],
    kind: CovarianceKind,
    fd_step: Option<f64>,
    o: &Options,
) -> Result<Report, InputError> {
    let model = spec.build(theta)?;
    let mode = fd_step.map_or(DerivativeMode::Analytic, DerivativeMode::central);
    let pb = pullback(&model, theta, kind, mode)?;
    let tol = o.tol.unwrap_or(spec.default_tol());
    let oracle = spec.oracle(theta, kind);
    let deviation = oracle.as_ref().map(|(g, relative)| {
        let d = (&pb.metric - g).amax();
        if *relative {
            d / g.amax()
        } else {
            d
        }
    });
    let body = PullbackBody {
        model: model.name(),
        theta: theta.to_vec(),
        kind: kind.name(),
        derivatives: mode,
        metric: rows(&pb.metric),
        residuals: pb.residuals.clone(),
        oracle: oracle.as_ref().map(|(g, _)| rows(g)),
        deviation,
        deviation_is_relative: oracle.as_ref().is_some_and(|(_, r)| *r),
    };
    let pass = deviation.is_none_or(|d| d <= tol);
    Ok(Report::new("pullback", o.seed, body, pass)
        .tol("oracle", tol)
        .tol("riesz_residual", tol::RIESZ_RESIDUAL))
}

fn gaussian_demo(bins: usize, mu: f64, sigma: f64, o: &Options) -> Result<Report, InputError> {
    let a = Affine::new(mu, sigma)?;
    let tol = o.tol.unwrap_or(1e-2);
    let oracle = reference::gaussian_fisher(sigma);
    let mut sweep: Vec<usize> = [bins / 16, bins / 4, bins]
        .into_iter()
        .filter(|&b| b >= 2)
        .collect();
    sweep.dedup();
    let errors = sweep
        .par_iter()
        .map(|&b| {
            let m = GaussianModel::centered(b, mu, sigma, GAUSSIAN_HALF_WIDTH)?;
            let g = pullback(
                &m,
                &[mu, sigma],
                CovarianceKind::Gns,
                DerivativeMode::Analytic,
            )?
            .metric;
            Ok(((&g - &oracle).amax() / oracle.amax(), rows(&g)))
        })
        .collect::<Result<Vec<_>, ncp_lab::Error>>()?;
    let monotone = errors.windows(2).all(|w| w[1].0 < w[0].0);
    let (final_error, final_metric) = errors.last().cloned().expect("at least one bin count");

    let grid: Vec<f64> = (0..1000)
        .map(|i| mu - 8.0 * sigma + 16.0 * sigma * i as f64 / 999.0)
        .collect();
    let xi = Affine::new(1.0, 2.0)?;
    let push = affine_pushforward_check(xi, a, &grid)?;

    // group action on a wider range so that the moved states stay inside it
    let group = GaussianGroupModel::new(GaussianModel::centered(bins.min(2048), mu, sigma, 16.0)?);
    let w = group.base().bin_width();
    let shift = Affine::new(4.0 * w, 1.0)?;
    let back = Affine::new(-7.0 * w, 1.0)?;
    let aligned = group.composition_check(shift, back, a)?;
    // g o (mu, sigma) = (mu + 0.3 sigma, 1.2 sigma)
    let general = group.equivariance(Affine::new(0.3 * sigma - 0.2 * mu, 1.2)?, a)?;
    let aligned_tol = 1e-10;

    let pass = final_error < tol
        && monotone
        && push.max_deviation < 1e-12
        && aligned.map_deviation < aligned_tol
        && aligned.state_deviation < aligned_tol;
    let body = json!({
        "mu": mu,
        "sigma": sigma,
        "bins": bins,
        "metric": final_metric,
        "oracle": rows(&oracle),
        "relative_error": final_error,
        "sweep": sweep.iter().zip(&errors).map(|(b, e)| json!({"bins": b, "relative_error": e.0})).collect::<Vec<_>>(),
        "monotone_convergence": monotone,
        "pushforward": push,
        "aligned_composition": aligned,
        "equivariance": general,
    });
    Ok(Report::new("gaussian-demo", o.seed, body, pass)
        .tol("relative_error", tol)
        .tol("pushforward", 1e-12)
        .tol("aligned_composition", aligned_tol))
}

fn parse_shapes(text: &str) -> Result<Vec<AlgebraShape>, InputError> {
    text.split(';')
        .map(|s| {
            let blocks = s
                .split(',')
                .map(|b| {
                    b.trim()
                        .parse::<usize>()
                        .map_err(|e| InputError::msg(format!("shape `{s}`: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(AlgebraShape::new(blocks)?)
        })
        .collect()
}

fn tracial(shapes: &str, o: &Options) -> Result<Report, InputError> {
    let shapes = parse_shapes(shapes)?;
    let tol = o.tol.unwrap_or(1e-9);
    let r = tracial_collapse_check(&shapes, o.samples.unwrap_or(100), o.seed, tol)?;
    let pass = r.pass;
    let body = json!({ "shapes": shapes, "report": r });
    Ok(Report::new("tracial-uniqueness", o.seed, body, pass).tol("collapse", tol))
}

fn congruence(spec: &ModelSpec, points: usize, o: &Options) -> Result<Report, InputError> {
    let tol = o.tol.unwrap_or(1e-9);
    let trials = o.samples.unwrap_or(20);
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(o.seed.wrapping_mul(0x9E37_79B9).wrapping_add(t as u64));
            let (n_points, thetas) = match spec {
                ModelSpec::Simplex(n) => {
                    let thetas: Vec<Vec<f64>> = (0..points)
                        .map(|_| {
                            let w: Vec<f64> = (0..=*n).map(|_| 0.05 + rng.random::<f64>()).collect();
                            let s: f64 = w.iter().sum();
                            w[..*n].iter().map(|v| v / s).collect()
                        })
                        .collect();
                    (n + 1, thetas)
                }
                ModelSpec::Gaussian { bins, .. } => {
                    let thetas: Vec<Vec<f64>> = (0..points)
                        .map(|_| vec![rng.random_range(-0.5..0.5), rng.random_range(0.8..1.2)])
                        .collect();
                    (*bins, thetas)
                }
                _ => return Err(InputError::msg("congruent embeddings need an abelian model")),
            };
            let extra = rng.random_range(1..=n_points.min(16));
            let embedding = CongruentEmbedding::random(n_points, n_points + extra, &mut rng)?;
            let r = match spec {
                ModelSpec::Simplex(n) => congruence_invariance_check(&SimplexModel::new(*n)?, &embedding, &thetas, tol)?,
                ModelSpec::Gaussian { bins, range } => {
                    let (lo, hi) = range.unwrap_or((-12.0, 12.0));
                    congruence_invariance_check(&GaussianModel::new(*bins, lo, hi)?, &embedding, &thetas, tol)?
                }
                _ => unreachable!(),
            };
            Ok(json!({"points": n_points + extra, "max_deviation": r.max_deviation, "pass": r.pass}))
        })
        .collect::<Result<Vec<_>, InputError>>()?;
    let max_deviation = results
        .iter()
        .map(|r| r["max_deviation"].as_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let pass = max_deviation <= tol;
    let body = json!({ "model": format!("{spec:?}"), "embeddings": results, "max_deviation": max_deviation });
    Ok(Report::new("congruence-invariance", o.seed, body, pass).tol("invariance", tol))
}

fn omf_catalog(o: &Options) -> Result<Report, InputError> {
    let pairs = o.samples.unwrap_or(100);
    let checks: Vec<_> = OperatorMonotoneFunction::catalog()
        .iter()
        .map(|f| f.check(pairs, o.seed))
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report::new("omf-catalog", o.seed, checks, pass)
        .tol("normalization", 1e-12)
        .tol("matrix_monotone", 1e-8))
}
