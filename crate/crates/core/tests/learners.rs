use gadvoice_core::dataset::sample_weight;
use gadvoice_core::learners::{
    fit_gbc_staged, fit_logreg_l1, fit_svm_rbf_dual, kkt_residuals, lambda_max, linear_shapley_importance, predict_scores,
    FitConfig, LogisticObjective, ModelParams,
};
use gadvoice_core::synth::standard_normal;
use gadvoice_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn problem(seed: u64, n: usize, d: usize) -> (Matrix, Vec<u8>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| standard_normal(&mut rng)).collect()).collect();
    let mut y: Vec<u8> = rows.iter().map(|r| u8::from(r[0] + 0.8 * standard_normal(&mut rng) > 0.0)).collect();
    y[0] = 0;
    y[1] = 1;
    let w = (0..n).map(|_| sample_weight(rng.random_range(0..=21)).unwrap()).collect();
    (Matrix::from_rows(&rows).unwrap(), y, w)
}

#[test]
fn duplicating_a_row_equals_doubling_its_weight() {
    let (x, y, w) = problem(1, 30, 4);
    let beta = [0.3, -0.2, 0.1, 0.5];
    let mut rows: Vec<Vec<f64>> = x.iter_rows().map(<[f64]>::to_vec).collect();
    rows.push(rows[7].clone());
    let xd = Matrix::from_rows(&rows).unwrap();
    let mut yd = y.clone();
    yd.push(y[7]);
    let mut wd = w.clone();
    wd.push(w[7]);
    let mut w2 = w.clone();
    w2[7] *= 2.0;
    let a = LogisticObjective::new(&xd, &yd, &wd).value(&beta, 0.2);
    let b = LogisticObjective::new(&x, &y, &w2).value(&beta, 0.2);
    assert!((a - b).abs() < 1e-10);
}

#[test]
fn strong_penalty_zeroes_every_coefficient() {
    for seed in 0..5 {
        let (x, y, w) = problem(seed, 40, 6);
        let z = gadvoice_core::learners::Scaler::fit(&x).transform(&x).unwrap();
        let lmax = lambda_max(&z, &y, &w);
        let m = fit_logreg_l1(&x, &y, Some(&w), &FitConfig { lambda: lmax * 1.0001, ..FitConfig::default() }).unwrap();
        let ModelParams::LogregL1 { coef, .. } = &m.params else { unreachable!() };
        assert!(coef.iter().all(|&c| c == 0.0), "{coef:?}");
        let m = fit_logreg_l1(&x, &y, Some(&w), &FitConfig { lambda: lmax * 0.5, ..FitConfig::default() }).unwrap();
        let ModelParams::LogregL1 { coef, .. } = &m.params else { unreachable!() };
        assert!(coef.iter().any(|&c| c != 0.0));
    }
}

#[test]
fn svm_dual_solutions_satisfy_kkt() {
    for seed in 0..8 {
        let (x, y, w) = problem(100 + seed, 30 + 3 * seed as usize, 3);
        let fit = fit_svm_rbf_dual(&x, &y, Some(&w), &FitConfig::default()).unwrap();
        assert!(fit.converged);
        let worst = kkt_residuals(&fit, &x).unwrap().into_iter().fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
        let balance: f64 = fit.alpha.iter().zip(&fit.signed_labels).map(|(a, s)| a * s).sum();
        assert!(balance.abs() < 1e-6);
        assert!(fit.alpha.iter().zip(&fit.upper).all(|(a, u)| *a >= 0.0 && a <= u));
    }
}

#[test]
fn boosting_fits_a_nonlinear_boundary() {
    let (x, _, _) = problem(5, 200, 2);
    let y: Vec<u8> = x.iter_rows().map(|r| u8::from(r[0] * r[1] > 0.0)).collect();
    let fit = fit_gbc_staged(&x, &y, None, &FitConfig { n_trees: 60, ..FitConfig::default() }).unwrap();
    assert!(fit.staged_loss.windows(2).all(|p| p[1] <= p[0] + 1e-12));
    let s = predict_scores(&fit.model, &x).unwrap();
    let acc = s.iter().zip(&y).filter(|(p, &l)| (**p >= 0.5) == (l == 1)).count() as f64 / y.len() as f64;
    assert!(acc > 0.9, "{acc}");
}

#[test]
fn shapley_ranks_the_informative_feature_first() {
    let (x, y, _) = problem(11, 150, 5);
    let m = fit_logreg_l1(&x, &y, None, &FitConfig { lambda: 1e-3, ..FitConfig::default() }).unwrap();
    let names: Vec<String> = (0..5).map(|j| format!("f{j}")).collect();
    let ranked = linear_shapley_importance(&m, &x, &names).unwrap();
    assert_eq!(ranked[0].name, "f0");
    assert!(ranked.windows(2).all(|p| p[0].importance >= p[1].importance));
}
