//! Statistical checks of the sampler and the dynamics.

use ntband_core::ensemble::path_rng;
use ntband_core::strategy::rebalance_in_place;
use ntband_core::*;
use rand_distr::{Distribution, StandardNormal};

fn reference_market(k: f64, dt: f64) -> MarketParams {
    let rho = Matrix::from_rows(&[[1.0, 0.5], [0.5, 1.0]]).unwrap();
    MarketParams::new(1.0, vec![1.3, 1.5], vec![1.0, 1.0], rho, k, 1.0, dt).unwrap()
}

fn sample_correlation(xs: &[(f64, f64)]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = xs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[test]
fn correlated_normals_reproduce_rho() {
    let rho = Matrix::from_rows(&[[1.0, 0.5], [0.5, 1.0]]).unwrap();
    let l = cholesky(&build_covariance(&[1.0, 1.0], &rho).unwrap()).unwrap();
    let mut rng = path_rng(11, 0);
    let draws: Vec<(f64, f64)> = (0..1_000_000)
        .map(|_| {
            let z = [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)];
            let c = correlated_normals(&l, &z).unwrap();
            (c[0], c[1])
        })
        .collect();
    assert!((sample_correlation(&draws) - 0.5).abs() < 0.005);
    let var0 = draws.iter().map(|d| d.0 * d.0).sum::<f64>() / draws.len() as f64;
    assert!((var0 - 1.0).abs() < 0.01);
}

#[test]
fn correlated_normals_three_assets() {
    let rows = [[1.0, -0.3, 0.6], [-0.3, 1.0, 0.2], [0.6, 0.2, 1.0]];
    let rho = Matrix::from_rows(&rows).unwrap();
    let l = cholesky(&build_covariance(&[1.0, 1.0, 1.0], &rho).unwrap()).unwrap();
    let mut rng = path_rng(12, 0);
    let draws: Vec<Vec<f64>> = (0..100_000)
        .map(|_| {
            let z: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
            correlated_normals(&l, &z).unwrap()
        })
        .collect();
    for i in 0..3 {
        for j in 0..i {
            let pairs: Vec<(f64, f64)> = draws.iter().map(|d| (d[i], d[j])).collect();
            assert!((sample_correlation(&pairs) - rows[i][j]).abs() < 0.02, "rho[{i}][{j}]");
        }
    }
}

#[test]
fn unmanaged_asset_has_gbm_log_drift() {
    let params = reference_market(0.0, 1e-3);
    let model = LtgmModel::new(&params).unwrap();
    // Everything in asset 1, never traded: log Π(T) = log A₁(T).
    let spec = StrategySpec::new(StrategyKind::BuyAndHold).with_weights(vec![1.0, 0.0]);
    let s = run_ensemble(&params, &spec, &model, 2024, 4000, &PathOptions::default()).unwrap();
    assert_eq!(s.aborted, 0);
    let expected = 1.3 - 0.5;
    assert!((s.final_mean() - expected).abs() < 3.0 * s.final_sem(), "{} ± {}", s.final_mean(), s.final_sem());
}

#[test]
fn all_bond_book_matches_continuous_compounding() {
    let params = reference_market(0.0, 1e-3);
    let model = LtgmModel::new(&params).unwrap();
    let spec = StrategySpec::new(StrategyKind::BuyAndHold).with_weights(vec![0.0, 0.0]);
    let s = run_ensemble(&params, &spec, &model, 1, 8, &PathOptions::default()).unwrap();
    assert!((s.final_mean() - params.r() * params.horizon()).abs() < 1e-3);
    assert_eq!(s.final_sem(), 0.0);
}

/// Frictionless rebalanced path driven by explicit per-step normals.
fn frictionless_terminal(params: &MarketParams, p: &[f64], normals: impl Iterator<Item = [f64; 2]>) -> f64 {
    let mut state = PortfolioState::new(1.0 - p[0] - p[1], vec![p[0], p[1]]);
    for iid in normals {
        let pi = state.wealth();
        let policy = BandPolicy::new(vec![p[0] * pi, p[1] * pi], vec![0.0, 0.0], 0.0).unwrap();
        rebalance_in_place(&mut state, &policy, |_| {}).unwrap();
        let z = correlated_normals(params.cholesky(), &iid).unwrap();
        state = euler_step(&state, params, &z).unwrap();
    }
    state.wealth().ln()
}

#[test]
fn halving_dt_moves_the_mean_by_less_than_one_sem() {
    let fine = reference_market(0.0, 1e-3);
    let coarse = reference_market(0.0, 2e-3);
    let p = optimal_weights(&fine).unwrap();
    let paths = 4000;
    let (mut f, mut c) = (Vec::with_capacity(paths), Vec::with_capacity(paths));
    for i in 0..paths as u64 {
        // The coarse path sees the sum of each pair of fine increments.
        let mut rng = path_rng(77, i);
        let draws: Vec<[f64; 2]> =
            (0..fine.steps()).map(|_| [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)]).collect();
        f.push(frictionless_terminal(&fine, &p, draws.iter().copied()));
        let merged = draws.chunks(2).map(|w| [(w[0][0] + w[1][0]) / 2f64.sqrt(), (w[0][1] + w[1][1]) / 2f64.sqrt()]);
        c.push(frictionless_terminal(&coarse, &p, merged));
    }
    let stats = |xs: &[f64]| {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    };
    let (mf, sf) = stats(&f);
    let (mc, sc) = stats(&c);
    assert!((mf - mc).abs() < sf.min(sc), "fine {mf} coarse {mc} sem {sf}");
}

#[test]
fn sem_scales_as_inverse_root_paths() {
    let params = reference_market(0.0, 1e-2);
    let model = LtgmModel::new(&params).unwrap();
    let spec = StrategySpec::new(StrategyKind::Frictionless);
    let small = run_ensemble(&params, &spec, &model, 5, 1000, &PathOptions::default()).unwrap();
    let large = run_ensemble(&params, &spec, &model, 6, 4000, &PathOptions::default()).unwrap();
    let ratio = small.final_sem() / large.final_sem();
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn wealth_identity_holds_along_frictionless_paths() {
    let params = reference_market(0.0, 1e-3);
    let model = LtgmModel::new(&params).unwrap();
    let spec = StrategySpec::new(StrategyKind::BuyAndHold);
    let opts = PathOptions { record_states: true, ..PathOptions::default() };
    let res = run_path(&params, &spec, &model, 3, 0, &opts).unwrap();
    for s in &res.states {
        let direct = s.bond + s.holdings.iter().sum::<f64>();
        assert!((s.wealth() - direct).abs() <= 1e-12 * direct);
    }
    assert_eq!(res.states.len() as u64, params.steps() + 1);
}
