//! Analytic probabilities against the brute-force sampler, plus the
//! sampler's own sanity properties (edge effects, law of the empirical
//! interference CDF, nearest-adversary signal law).

use covertd2d::analytics::{
    interference_cdf, nearest_adversary_signal_survival, ph_prob, sinr_prob, DetectionModel,
    InterferenceFieldParams,
};
use covertd2d::montecarlo::{empirical_cdf, estimate, interference_samples, SimWindow, Target};
use covertd2d::{NetworkConfig, QuadratureSpec, Scheme, Strategy};

fn cfg() -> NetworkConfig {
    NetworkConfig::default()
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn assert_close(analytic: f64, mc: covertd2d::ProbabilityEstimate, what: &str) {
    let tol = 0.02f64.max(3.0 * mc.ci_halfwidth);
    assert!(
        (analytic - mc.value).abs() <= tol,
        "{what}: analytic {analytic:.4} vs mc {:.4} (ci {:.4})",
        mc.value,
        mc.ci_halfwidth
    );
}

#[test]
fn link_metrics_agree_with_sampler() {
    let cfg = cfg();
    let quad = quad();
    let trials = 30_000;
    for (i, &rho) in [0.1, 0.4, 0.7, 1.0].iter().enumerate() {
        let w = SimWindow::new(30.0, trials, 100 + i as u64);
        let ps = Strategy::new(Scheme::Ps, 10.0, rho);
        assert_close(sinr_prob(&ps, &cfg).unwrap(), estimate(&Target::Sinr(ps), &cfg, &w).unwrap(), "sinr-ps");
        assert_close(ph_prob(&ps, &cfg, &quad).unwrap(), estimate(&Target::Ph(ps), &cfg, &w).unwrap(), "ph-ps");
        let ts = Strategy::new(Scheme::Ts, 10.0, rho);
        assert_close(sinr_prob(&ts, &cfg).unwrap(), estimate(&Target::Sinr(ts), &cfg, &w).unwrap(), "sinr-ts");
        assert_close(ph_prob(&ts, &cfg, &quad).unwrap(), estimate(&Target::Ph(ts), &cfg, &w).unwrap(), "ph-ts");
    }
}

#[test]
fn detection_metrics_agree_with_sampler() {
    let cfg = cfg();
    let model = DetectionModel::new(10.0, &cfg, &quad()).unwrap();
    let trials = 30_000;
    for (i, &tau) in [0.05, 0.3, 1.0, 3.0, 12.0, 45.0].iter().enumerate() {
        let w = SimWindow::new(30.0, trials, 300 + i as u64);
        assert_close(model.fa_prob(tau), estimate(&Target::Fa { p_s: 10.0, tau }, &cfg, &w).unwrap(), "fa");
        assert_close(model.md_prob(tau), estimate(&Target::Md { p_s: 10.0, tau }, &cfg, &w).unwrap(), "md");
    }
}

#[test]
fn interference_empirical_cdf_matches_inversion() {
    let cfg = cfg();
    let quad = quad();
    let params = InterferenceFieldParams::from_config(10.0, &cfg);
    let samples = interference_samples(10.0, &cfg, &SimWindow::new(30.0, 100_000, 77)).unwrap();
    assert_eq!(samples.len(), 100_000);
    // 20 quantile-ish points spanning the distribution
    let grid: Vec<f64> = (0..20).map(|i| 0.03 * (4000f64).powf(i as f64 / 19.0)).collect();
    let emp = empirical_cdf(&samples, &grid);
    let mut sup = 0.0f64;
    for (t, fhat) in emp {
        let f = interference_cdf(t, &params, &quad).unwrap();
        sup = sup.max((f - fhat).abs());
    }
    assert!(sup <= 0.02, "sup distance {sup}");
}

#[test]
fn nearest_adversary_signal_law_matches_sampler() {
    // Kolmogorov-Smirnov distance between sampled p_s g r^-alpha and the
    // analytic law, 1e5 draws
    use rand::Rng;
    use rand::SeedableRng;
    let cfg = cfg();
    let quad = quad();
    let p_s = 10.0;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
    let n = 100_000;
    let mut samples: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            let r = (-(1.0 - u).ln() / (std::f64::consts::PI * cfg.lambda_a)).sqrt();
            let g: f64 = -(1.0 - rng.gen::<f64>()).ln();
            p_s * g * r.powf(-cfg.alpha)
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let mut ks = 0.0f64;
    for i in (0..n).step_by(997) {
        let t = samples[i];
        let f_emp = (i + 1) as f64 / n as f64;
        let f = 1.0 - nearest_adversary_signal_survival(t, p_s, &cfg, &quad).unwrap();
        ks = ks.max((f - f_emp).abs());
    }
    assert!(ks <= 0.02, "KS distance {ks}");
}

#[test]
fn window_doubling_is_within_noise() {
    // edge-effect control: going from the default 30 m radius to 60 m moves
    // estimates by less than the combined CI of the two runs
    let cfg = cfg();
    let trials = 40_000;
    let targets = [
        Target::Sinr(Strategy::new(Scheme::Ps, 10.0, 0.5)),
        Target::Fa { p_s: 10.0, tau: 1.0 },
        Target::InterferenceCdf { p_s: 10.0, t: 2.0 },
    ];
    for (i, t) in targets.iter().enumerate() {
        let a = estimate(t, &cfg, &SimWindow::new(30.0, trials, 500 + i as u64)).unwrap();
        let b = estimate(t, &cfg, &SimWindow::new(60.0, trials, 500 + i as u64)).unwrap();
        assert!(
            (a.value - b.value).abs() <= a.ci_halfwidth + b.ci_halfwidth,
            "target {i}: {} vs {} (ci {} + {})",
            a.value,
            b.value,
            a.ci_halfwidth,
            b.ci_halfwidth
        );
    }
}

#[test]
fn interference_cdf_point_estimate_agrees() {
    let cfg = cfg();
    let quad = quad();
    let params = InterferenceFieldParams::from_config(10.0, &cfg);
    for (i, &t) in [0.3, 2.0, 9.0].iter().enumerate() {
        let w = SimWindow::new(30.0, 30_000, 900 + i as u64);
        let mc = estimate(&Target::InterferenceCdf { p_s: 10.0, t }, &cfg, &w).unwrap();
        assert_close(interference_cdf(t, &params, &quad).unwrap(), mc, "interference cdf");
    }
}
