use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::AlgebraElement;
use crate::channels::{markov_from_stochastic, CongruentEmbedding};
use crate::covariance::{CovarianceKind, OperatorMonotoneFunction};
use crate::error::Error;
use crate::gns::GnsSpace;
use crate::scalar::C;

fn random_interior(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..=n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w[..n].iter().map(|v| v / s).collect()
}

/// `sum_x d_i p_x d_j p_x / p_x` with `d_i p = e_i - e_last`, written out term by term.
fn simplex_oracle(theta: &[f64]) -> DMatrix<f64> {
    let n = theta.len();
    let mut p = theta.to_vec();
    p.push(1.0 - theta.iter().sum::<f64>());
    let dp = |i: usize, x: usize| -> f64 {
        if x == i {
            1.0
        } else if x == n {
            -1.0
        } else {
            0.0
        }
    };
    DMatrix::from_fn(n, n, |i, j| {
        (0..=n).map(|x| dp(i, x) * dp(j, x) / p[x]).sum()
    })
}

fn gns() -> CovarianceKind {
    CovarianceKind::Gns
}

#[test]
fn simplex_examples() {
    let m = SimplexModel::new(1).unwrap();
    let s = StatModel::<f64>::state_at(&m, &[0.5]).unwrap();
    assert_eq!(s.densities()[0][(0, 0)].re, 0.5);
    assert_eq!(s.densities()[1][(0, 0)].re, 0.5);

    let m = SimplexModel::new(3).unwrap();
    let d = m
        .derivatives(&[0.1, 0.2, 0.3], DerivativeMode::Analytic)
        .unwrap();
    let first: Vec<f64> = d[0].blocks().iter().map(|b| b[(0, 0)].re).collect();
    assert_eq!(first, vec![1.0, 0.0, 0.0, -1.0]);
    assert!(d.iter().all(|e| e.trace().norm() == 0.0));
    assert!(!m.in_domain(&[0.0, 0.5, 0.2]));
    assert!(!m.in_domain(&[0.5, 0.3, 0.2]));
    assert!(matches!(m.state_at(&[0.5, 0.3]), Err(Error::Domain(_))));
}

#[test]
fn simplex_pullback_is_fisher_rao() {
    let m = SimplexModel::new(2).unwrap();
    let theta = [0.5, 1.0 / 3.0];
    let g = metric_pullback(&m, &theta, gns()).unwrap();
    assert!((&g - simplex_oracle(&theta)).amax() < 1e-10);
    assert!((&g - reference::fisher_rao_simplex(&theta)).amax() < 1e-10);

    let g = metric_pullback(&m, &[1.0 / 3.0, 1.0 / 3.0], gns()).unwrap();
    assert!((g - DMatrix::from_row_slice(2, 2, &[6.0, 3.0, 3.0, 6.0])).amax() < 1e-10);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=6 {
        for _ in 0..5 {
            let theta = random_interior(n, &mut rng);
            let g = metric_pullback(&m_n(n), &theta, gns()).unwrap();
            let oracle = simplex_oracle(&theta);
            assert!((&g - &oracle).amax() < 1e-9 * oracle.amax().max(1.0));
        }
    }
}

fn m_n(n: usize) -> SimplexModel {
    SimplexModel::new(n).unwrap()
}

#[test]
fn simplex_score_is_classical_score() {
    let m = m_n(2);
    let theta = [0.2, 0.5];
    let p = [0.2, 0.5, 0.3];
    let scores = riesz_score(&m, &theta, gns()).unwrap();
    let space = GnsSpace::new(&m.state_at(&theta).unwrap());
    for (i, v) in scores.iter().enumerate() {
        let mut dp = [0.0; 3];
        dp[i] = 1.0;
        dp[2] = -1.0;
        let f: Vec<f64> = (0..3).map(|x| dp[x] / p[x]).collect();
        let want = space
            .embed(&AlgebraElement::from_function(&f).unwrap())
            .unwrap();
        assert!((v - want).norm() < 1e-12);
    }
}

#[test]
fn qubit_model_examples() {
    let m = QubitFaithfulModel::new();
    let s = m.state_at(&[0.4f64, 1.1, 2.3]).unwrap();
    let spec = &s.block_spectra()[0];
    assert!((s.as_element().trace() - C::new(1.0, 0.0)).norm() < 1e-15);
    assert!((spec[0] - 0.7).abs() < 1e-14 && (spec[1] - 0.3).abs() < 1e-14);
    for bad in [[0.0, 0.1, 0.1], [1.0, 0.1, 0.1], [-0.2, 0.1, 0.1]] {
        assert!(!StatModel::<f64>::in_domain(&m, &bad));
    }

    let pure = QubitPureModel::new();
    let s = pure.state_at(&[0.0, 0.7]).unwrap();
    let d = &s.densities()[0];
    assert!(
        (d - DMatrix::from_diagonal(&DVector::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 0.0)])))
            .norm()
            < 1e-15
    );

    for model in [&m as &dyn StatModel<f64>, &pure] {
        let theta: Vec<f64> = if model.param_dim() == 3 {
            vec![0.6, 0.9, 0.4]
        } else {
            vec![0.9, 0.4]
        };
        for d in model.derivatives(&theta, DerivativeMode::Analytic).unwrap() {
            assert!(d.trace().norm() < 1e-12);
            assert!(d.is_self_adjoint(1e-12));
        }
    }
}

#[test]
fn qubit_diagonal_direction() {
    // D = diag(3/4, 1/4), dD = sigma_z / 2: g_rr = (1/4)/(3/4) + (1/4)/(1/4)
    let g = metric_pullback(&QubitFaithfulModel::new(), &[0.5f64, 0.0, 0.0], gns()).unwrap();
    assert!((g[(0, 0)] - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn qubit_pullback_is_qfi() {
    let m = QubitFaithfulModel::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let r: f64 = rng.random_range(0.05..0.95);
        let th: f64 = rng.random_range(0.1..3.0);
        let ph = rng.random_range(0.0..std::f64::consts::TAU);
        let g = metric_pullback(&m, &[r, th, ph], gns()).unwrap();
        let s = th.sin();
        let oracle = DMatrix::from_diagonal(&DVector::from_vec(vec![
            1.0 / (1.0 - r * r),
            r * r,
            r * r * s * s,
        ]));
        assert!((g - oracle).amax() < 1e-8);
    }
}

#[test]
fn qubit_score_is_sld() {
    let m = QubitFaithfulModel::new();
    let theta = [0.7, 0.8, 1.9];
    let state = m.state_at(&theta).unwrap();
    let space = GnsSpace::new(&state);
    let scores = riesz_score(&m, &theta, gns()).unwrap();
    let derivs = m.derivatives(&theta, DerivativeMode::Analytic).unwrap();
    for (v, d) in scores.iter().zip(&derivs) {
        let l = reference::symmetric_log_derivative(&state.densities()[0], d.block(0));
        let dd = &state.densities()[0];
        assert!(((dd * &l + &l * dd) * C::new(0.5, 0.0) - d.block(0)).norm() < 1e-12);
        let want = space
            .embed(&AlgebraElement::new(state.shape().clone(), vec![l]).unwrap())
            .unwrap();
        assert!((v - want).norm() < 1e-10);
    }
}

#[test]
fn pure_qubit_is_unit_sphere() {
    let m = QubitPureModel::new();
    let scores = riesz_score(&m, &[0.0, 0.3], gns()).unwrap();
    let v = &scores[0];
    assert_eq!(v.len(), 2);
    let big: Vec<f64> = v.iter().map(|z| z.norm()).filter(|&a| a > 1e-12).collect();
    assert_eq!(big.len(), 1);
    assert!((big[0] - 1.0).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let th: f64 = rng.random_range(0.05..3.1);
        let ph = rng.random_range(0.0..std::f64::consts::TAU);
        let g = metric_pullback(&m, &[th, ph], gns()).unwrap();
        let oracle = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, th.sin().powi(2)]));
        assert!((&g - oracle).amax() < 1e-8);
        assert!((g * 0.25 - reference::fubini_study(th)).amax() < 1e-8);
    }
}

#[test]
fn finite_differences_match_analytic() {
    let h = DerivativeMode::central(1e-5);
    let cases: Vec<(Box<dyn StatModel<f64>>, Vec<f64>)> = vec![
        (Box::new(m_n(3)), vec![0.1, 0.25, 0.4]),
        (Box::new(QubitFaithfulModel::new()), vec![0.6, 1.2, 0.5]),
        (Box::new(QubitPureModel::new()), vec![1.2, 0.5]),
        (
            Box::new(GaussianModel::centered(128, 0.0, 1.0, 10.0).unwrap()),
            vec![0.2, 1.1],
        ),
    ];
    for (model, theta) in cases {
        let a = pullback(&model, &theta, gns(), DerivativeMode::Analytic)
            .unwrap()
            .metric;
        let f = pullback(&model, &theta, gns(), h).unwrap().metric;
        assert!((a - f).amax() < 1e-6, "{}", model.name());
    }
}

#[test]
fn petz_kinds_are_ordered_on_qubits() {
    use OperatorMonotoneFunction::*;
    let m = QubitFaithfulModel::new();
    let theta = [0.8f64, 1.0, 0.3];
    let g = |f| metric_pullback(&m, &theta, CovarianceKind::Petz(f)).unwrap();
    let gns_metric = metric_pullback(&m, &theta, gns()).unwrap();
    assert!((g(Sld) - &gns_metric).amax() < 1e-10);
    let chain = [g(Sld), g(Wy), g(Kmb), g(Rld)];
    for w in chain.windows(2) {
        let diff = &w[1] - &w[0];
        assert!(SymmetricEigen::new(diff).eigenvalues.min() > -1e-10);
    }
    // classical (radial) direction is kind independent
    assert!(chain
        .iter()
        .all(|c| (c[(0, 0)] - gns_metric[(0, 0)]).abs() < 1e-10));
}

struct Edge;

impl StatModel<f64> for Edge {
    fn name(&self) -> String {
        "edge".into()
    }
    fn shape(&self) -> &crate::algebra::AlgebraShape {
        static SHAPE: std::sync::OnceLock<crate::algebra::AlgebraShape> =
            std::sync::OnceLock::new();
        SHAPE.get_or_init(|| crate::algebra::AlgebraShape::abelian(2).unwrap())
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn check_domain(&self, _: &[f64]) -> crate::Result<()> {
        Ok(())
    }
    fn density_at(&self, t: &[f64]) -> crate::Result<AlgebraElement<f64>> {
        AlgebraElement::from_function(&[1.0 - t[0], t[0]])
    }
}

#[test]
fn rank_changing_direction_is_rejected() {
    let err = pullback(&Edge, &[0.0], gns(), DerivativeMode::central(1e-6)).unwrap_err();
    assert!(
        matches!(err, Error::ScoreNotRepresentable { parameter: 0, .. }),
        "{err:?}"
    );
}

#[test]
fn coarse_graining_decreases_the_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let base = m_n(3);
    for _ in 0..10 {
        let s = DMatrix::from_fn(3, 4, |_, _| 0.1 + rng.random::<f64>());
        let s = DMatrix::from_fn(3, 4, |i, j| s[(i, j)] / s.column(j).sum());
        let coarse = EmbeddedModel::new(base.clone(), markov_from_stochastic(&s).unwrap()).unwrap();
        let theta = random_interior(3, &mut rng);
        let g = metric_pullback(&base, &theta, gns()).unwrap();
        let gc = metric_pullback(&coarse, &theta, gns()).unwrap();
        assert!(SymmetricEigen::new(g - gc).eigenvalues.min() > -1e-10);
    }
}

#[test]
fn gaussian_model_examples() {
    let m = GaussianModel::new(2, -8.0, 8.0).unwrap();
    let p = m.probabilities(Affine::IDENTITY);
    assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);

    let m = GaussianModel::new(300, -9.0, 11.0).unwrap();
    let p = m.probabilities(Affine::new(0.7, 1.3).unwrap());
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let a = m.state_at(&[0.0, 1.0]).unwrap();
    let b = m.state_at(&[0.1, 1.0]).unwrap();
    assert!(a.hs_distance(&b).unwrap() > 1e-8);
    match StatModel::<f64>::check_domain(&m, &[0.0, 2.0]) {
        Err(Error::MassLeak { leaked }) => assert!(leaked > 1e-6 && leaked < 1e-4),
        other => panic!("{other:?}"),
    }
    assert!(!StatModel::<f64>::in_domain(&m, &[0.0, -1.0]));

    for d in m
        .derivatives(&[0.3, 1.1], DerivativeMode::Analytic)
        .unwrap()
    {
        assert!(d.trace().norm() < 1e-12);
    }
}

#[test]
fn gaussian_metric_converges() {
    let (mu, sigma) = (0.4, 2.0);
    let oracle = DMatrix::from_diagonal(&DVector::from_vec(vec![
        1.0 / (sigma * sigma),
        2.0 / (sigma * sigma),
    ]));
    let mut last = f64::INFINITY;
    for bins in [64, 256, 1024] {
        let m = GaussianModel::centered(bins, mu, sigma, 10.0).unwrap();
        let g = metric_pullback(&m, &[mu, sigma], gns()).unwrap();
        let err = (&g - &oracle).amax() / oracle.amax();
        assert!(err < last, "{bins}: {err} >= {last}");
        last = err;
    }
    assert!(last < 1e-2);
}

#[test]
fn affine_group() {
    let a = Affine::new(1.0, 2.0).unwrap();
    let b = Affine::new(3.0, 4.0).unwrap();
    assert_eq!(
        affine_compose(a, b).unwrap(),
        Affine {
            mu: 7.0,
            sigma: 8.0
        }
    );
    assert_eq!(affine_compose(Affine::IDENTITY, b).unwrap(), b);
    assert!(affine_compose(
        a,
        Affine {
            mu: 0.0,
            sigma: 0.0
        }
    )
    .is_err());

    let grid: Vec<f64> = (0..1000).map(|i| -10.0 + 20.0 * i as f64 / 999.0).collect();
    let r = affine_pushforward_check(a, Affine::IDENTITY, &grid).unwrap();
    assert_eq!(r.points, 1000);
    assert!(r.max_deviation < 1e-12);
}

#[test]
fn gaussian_group_actions() {
    let g = GaussianGroupModel::new(GaussianModel::new(256, -12.0, 12.0).unwrap());
    let id = g.stochastic_at(Affine::IDENTITY).unwrap();
    assert!((id - DMatrix::identity(256, 256)).amax() < 1e-15);
    let theta = Affine::IDENTITY;
    assert!(
        g.equivariance(Affine::IDENTITY, theta)
            .unwrap()
            .max_deviation
            < 1e-15
    );

    let w = g.base().bin_width();
    let shift = Affine::new(5.0 * w, 1.0).unwrap();
    assert!(g.equivariance(shift, theta).unwrap().max_deviation < 1e-10);
    let back = Affine::new(-3.0 * w, 1.0).unwrap();
    let c = g
        .composition_check(shift, back, Affine::new(0.2, 0.9).unwrap())
        .unwrap();
    assert!(
        c.map_deviation < 1e-10 && c.state_deviation < 1e-10,
        "{c:?}"
    );

    let xi = Affine::new(0.3, 1.2).unwrap();
    let coarse = g.equivariance(xi, theta).unwrap().max_deviation;
    let fine = GaussianGroupModel::new(GaussianModel::new(2048, -12.0, 12.0).unwrap())
        .equivariance(xi, theta)
        .unwrap()
        .max_deviation;
    assert!(fine < coarse, "{fine} vs {coarse}");

    // the Markov map and its predual agree with the stochastic matrix
    let small = GaussianGroupModel::new(GaussianModel::new(16, -8.0, 8.0).unwrap());
    let phi = small.automorphism_at(xi).unwrap();
    assert!(phi.is_unital(1e-12) && phi.is_cp(1e-9));
    let p = small.base().probabilities(theta);
    let pushed = phi
        .predual_element(&AlgebraElement::from_function(&p).unwrap())
        .unwrap();
    let direct = small.stochastic_at(xi).unwrap() * DVector::from_vec(p);
    for (k, b) in pushed.blocks().iter().enumerate() {
        assert!((b[(0, 0)].re - direct[k]).abs() < 1e-15);
    }
}

#[test]
fn congruent_embeddings() {
    let m = m_n(2);
    let thetas = vec![vec![0.2, 0.3], vec![0.6, 0.1]];
    let id = CongruentEmbedding::refinement(3, 1).unwrap();
    let r = congruence_invariance_check(&m, &id, &thetas, 1e-12).unwrap();
    assert_eq!(r.max_deviation, 0.0);

    let split = CongruentEmbedding::new(vec![0, 1, 1], 2, vec![1.0, 0.5, 0.5]).unwrap();
    let r = congruence_invariance_check(&m_n(1), &split, &[vec![0.3], vec![0.8]], 1e-10).unwrap();
    assert!(r.pass, "{r:?}");

    let gm = GaussianModel::centered(200, 0.0, 1.0, 10.0).unwrap();
    let refine = CongruentEmbedding::refinement(200, 2).unwrap();
    let r =
        congruence_invariance_check(&gm, &refine, &[vec![0.0, 1.0], vec![0.5, 1.2]], 1e-9).unwrap();
    assert!(r.pass, "{r:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let e = CongruentEmbedding::random(3, 7, &mut rng).unwrap();
    let thetas: Vec<Vec<f64>> = (0..5).map(|_| random_interior(2, &mut rng)).collect();
    assert!(
        congruence_invariance_check(&m, &e, &thetas, 1e-9)
            .unwrap()
            .pass
    );
}

#[test]
fn injectivity_at_test_resolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let q = QubitFaithfulModel::new();
    let pts: Vec<Vec<f64>> = (0..10)
        .map(|_| {
            vec![
                rng.random_range(0.1..0.9),
                rng.random_range(0.2..2.9),
                rng.random_range(0.0..6.0),
            ]
        })
        .collect();
    for i in 0..pts.len() {
        for j in 0..i {
            let a = q.state_at(&pts[i]).unwrap();
            let b = q.state_at(&pts[j]).unwrap();
            assert!(a.hs_distance(&b).unwrap() > 1e-8);
        }
    }
}

#[test]
fn f32_pullback() {
    let g = metric_pullback(&m_n(2), &[0.25f32, 0.25], CovarianceKind::Gns).unwrap();
    assert!((g[(0, 0)] - 6.0).abs() < 1e-4 && (g[(0, 1)] - 2.0).abs() < 1e-4);
}
