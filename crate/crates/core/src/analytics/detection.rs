//! The adversary's side of the model: the signal law from the typical
//! transmitter to its nearest adversary, false-alarm and miss-detection
//! probabilities, and the detection-error objective the follower minimizes.
//!
//! The nearest-adversary distance follows f_r(r) = 2 pi lambda_a r
//! exp(-pi lambda_a r^2); conditioned on r the received signal
//! p_s g r^-alpha is exponential, so its marginal survival is
//! S(u) = E_r[exp(-u r^alpha / p_s)].

use std::sync::OnceLock;

use super::inversion::InterferenceDistribution;
use super::laplace::{AnalyticsError, InterferenceFieldParams};
use crate::config::NetworkConfig;
use crate::quad::{integrate_segmented, QuadratureSpec};
use crate::special::gamma;

/// Density of the signal power received from the typical transmitter at its
/// nearest adversary, by direct quadrature over the nearest-point law.
pub fn nearest_adversary_signal_pdf(
    t: f64,
    p_s: f64,
    cfg: &NetworkConfig,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticsError> {
    if t <= 0.0 {
        return Err(AnalyticsError::Domain(format!("signal pdf needs t > 0, got {t}")));
    }
    signal_integral(t, p_s, cfg, spec, true)
}

/// Survival P[p_s g r^-alpha > u] of the same law.
pub fn nearest_adversary_signal_survival(
    u: f64,
    p_s: f64,
    cfg: &NetworkConfig,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticsError> {
    if u <= 0.0 {
        return Ok(1.0);
    }
    signal_integral(u, p_s, cfg, spec, false)
}

/// Common integral over the nearest-adversary distance: with weight
/// (r^alpha / p_s) it is the signal pdf at t, without it the survival.
fn signal_integral(
    t: f64,
    p_s: f64,
    cfg: &NetworkConfig,
    spec: &QuadratureSpec,
    pdf_weight: bool,
) -> Result<f64, AnalyticsError> {
    let lam = cfg.lambda_a;
    let alpha = cfg.alpha;
    let two_pi_lam = 2.0 * std::f64::consts::PI * lam;
    // truncate where the nearest-point density has decayed below tolerance
    let r_max = ((-(spec.abs_tol.min(1e-12)).ln()) / (std::f64::consts::PI * lam)).sqrt();
    // the exponential factor transitions around r* = (p_s/t)^(1/alpha)
    let r_star = (p_s / t).powf(1.0 / alpha);
    let r_scale = (std::f64::consts::PI * lam).sqrt().recip();
    let mut bp = vec![0.0, r_max];
    for s in [
        r_star * 0.25,
        r_star,
        r_star * 4.0,
        r_scale * 0.5,
        r_scale,
        r_scale * 2.0,
    ] {
        if s > 0.0 && s < r_max {
            bp.push(s);
        }
    }
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    let integrand = |r: f64| -> f64 {
        let ra = r.powf(alpha);
        let weight = if pdf_weight { ra / p_s } else { 1.0 };
        two_pi_lam * r * (-std::f64::consts::PI * lam * r * r - t * ra / p_s).exp() * weight
    };
    Ok(integrate_segmented(integrand, &bp, spec)?.value.max(0.0))
}

/// Everything the adversary-side probabilities need for one SWIPT power:
/// the interference law plus log-grid tables of the nearest-adversary
/// signal survival and density. Building one costs a few milliseconds;
/// evaluations after that are table lookups, which is what makes the
/// bi-level solver affordable.
#[derive(Debug)]
pub struct DetectionModel {
    p_s: f64,
    noise_adv: f64,
    dist: InterferenceDistribution,
    spec: QuadratureSpec,
    lambda_a: f64,
    alpha: f64,
    /// natural scale of the signal law: p_s at the median adversary distance
    u_scale: f64,
    survival: SignalTable,
    pdf: OnceLock<SignalTable>,
    cfg: NetworkConfig,
}

#[derive(Debug, Clone)]
struct SignalTable {
    z0: f64,
    h: f64,
    y: Vec<f64>,
    y2: Vec<f64>,
    u_lo: f64,
    u_hi: f64,
}

const SIGNAL_TABLE_POINTS: usize = 1200;
const SIGNAL_SPAN_LO: f64 = 1e-8;
const SIGNAL_SPAN_HI: f64 = 1e10;

impl SignalTable {
    fn build(
        u_scale: f64,
        p_s: f64,
        cfg: &NetworkConfig,
        spec: &QuadratureSpec,
        pdf_weight: bool,
    ) -> Result<Self, AnalyticsError> {
        let u_lo = u_scale * SIGNAL_SPAN_LO;
        let u_hi = u_scale * SIGNAL_SPAN_HI;
        let z0 = u_lo.ln();
        let h = (u_hi.ln() - z0) / (SIGNAL_TABLE_POINTS - 1) as f64;
        // node values only need the spline's own accuracy (~1e-7), not the
        // caller's full tolerance; this halves the build cost
        let build_spec = QuadratureSpec {
            rel_tol: spec.rel_tol.max(1e-7),
            abs_tol: spec.abs_tol.max(1e-12),
            ..*spec
        };
        let mut y = Vec::with_capacity(SIGNAL_TABLE_POINTS);
        for i in 0..SIGNAL_TABLE_POINTS {
            let u = (z0 + i as f64 * h).exp();
            y.push(signal_integral(u, p_s, cfg, &build_spec, pdf_weight)?);
        }
        // natural cubic spline coefficients in z = ln u
        let n = y.len();
        let mut y2 = vec![0.0f64; n];
        let mut buf = vec![0.0f64; n];
        for i in 1..n - 1 {
            let p = 0.5 * y2[i - 1] + 2.0;
            y2[i] = -0.5 / p;
            let dd = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
            buf[i] = (3.0 * dd / h - 0.5 * buf[i - 1]) / p;
        }
        for i in (1..n - 1).rev() {
            y2[i] = y2[i] * y2[i + 1] + buf[i];
        }
        y2[0] = 0.0;
        y2[n - 1] = 0.0;
        Ok(SignalTable { z0, h, y, y2, u_lo, u_hi })
    }

    fn eval_spline(&self, z: f64) -> f64 {
        let n = self.y.len();
        let pos = (z - self.z0) / self.h;
        let i = (pos.floor() as isize).clamp(0, n as isize - 2) as usize;
        let a = (self.z0 + (i + 1) as f64 * self.h - z) / self.h;
        let b = 1.0 - a;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.y2[i] + (b * b * b - b) * self.y2[i + 1]) * self.h * self.h / 6.0
    }
}

impl DetectionModel {
    pub fn new(p_s: f64, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<Self, AnalyticsError> {
        if !(p_s > 0.0) {
            return Err(AnalyticsError::Domain(format!("p_s must be positive, got {p_s}")));
        }
        let dist = InterferenceDistribution::new(InterferenceFieldParams::from_config(p_s, cfg), spec)?;
        let median_r2 = (2f64).ln() / (std::f64::consts::PI * cfg.lambda_a);
        let u_scale = p_s / median_r2.powf(cfg.alpha / 2.0);
        let survival = SignalTable::build(u_scale, p_s, cfg, spec, false)?;
        Ok(DetectionModel {
            p_s,
            noise_adv: cfg.noise_adv,
            dist,
            spec: *spec,
            lambda_a: cfg.lambda_a,
            alpha: cfg.alpha,
            u_scale,
            survival,
            pdf: OnceLock::new(),
            cfg: cfg.clone(),
        })
    }

    pub fn p_s(&self) -> f64 {
        self.p_s
    }

    pub fn noise_adv(&self) -> f64 {
        self.noise_adv
    }

    /// Natural scale of the interference law (its median).
    pub fn interference_scale(&self) -> f64 {
        self.dist.median()
    }

    /// Signal survival S(u) via the table, with series tail beyond it.
    fn signal_survival(&self, u: f64) -> f64 {
        if u <= self.survival.u_lo {
            return 1.0;
        }
        if u >= self.survival.u_hi {
            return self.signal_tail(u, false);
        }
        self.survival.eval_spline(u.ln()).clamp(0.0, 1.0)
    }

    fn signal_pdf_table(&self) -> &SignalTable {
        self.pdf.get_or_init(|| {
            SignalTable::build(self.u_scale, self.p_s, &self.cfg, &self.spec, true)
                .expect("signal pdf table build failed")
        })
    }

    fn signal_pdf(&self, u: f64) -> f64 {
        let table = self.signal_pdf_table();
        if u <= table.u_lo {
            // flat limit: E[r^alpha] / p_s
            return table.y[0];
        }
        if u >= table.u_hi {
            return self.signal_tail(u, true);
        }
        table.eval_spline(u.ln()).max(0.0)
    }

    /// Far-tail series of the signal law: expand exp(-pi lam r^2) inside
    /// the distance integral; three terms are plenty past the table edge.
    fn signal_tail(&self, u: f64, pdf_weight: bool) -> f64 {
        let lam_pi = std::f64::consts::PI * self.lambda_a;
        let a = 2.0 / self.alpha;
        let mut total = 0.0;
        let mut fact = 1.0;
        for j in 0..3u32 {
            if j > 0 {
                fact *= j as f64;
            }
            let e = (2.0 * j as f64 + 2.0) / self.alpha;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let base = sign * lam_pi.powi(j as i32 + 1) / fact * a * gamma(e) * (self.p_s / u).powf(e);
            total += if pdf_weight { base * e / u } else { base };
        }
        total.max(0.0)
    }

    /// False-alarm probability at threshold tau: the adversary sees only
    /// interference plus noise under the inactive hypothesis.
    pub fn fa_prob(&self, tau: f64) -> f64 {
        let t = tau - self.noise_adv;
        if t <= 0.0 {
            return 1.0;
        }
        (1.0 - self.dist.cdf(t)).clamp(0.0, 1.0)
    }

    /// Miss-detection probability at threshold tau: signal plus interference
    /// plus noise stays under tau while the transmitter is active.
    pub fn md_prob(&self, tau: f64) -> f64 {
        let t = tau - self.noise_adv;
        if t <= 0.0 {
            return 0.0;
        }
        let bp = self.left_refined_breakpoints(t);
        let integral = integrate_segmented(
            |x| self.signal_pdf(x) * self.dist.cdf(t - x),
            &bp,
            &self.spec,
        )
        .map(|r| r.value)
        .unwrap_or_else(|_| self.md_prob_fallback(t));
        integral.clamp(0.0, 1.0)
    }

    fn md_prob_fallback(&self, t: f64) -> f64 {
        // plain two-panel integral if the refined one hits its budget
        let integral = integrate_segmented(
            |x| self.signal_pdf(x) * self.dist.cdf(t - x),
            &[0.0, t * 0.5, t],
            &QuadratureSpec { max_subdivisions: 4000, rel_tol: 1e-6, ..self.spec },
        );
        integral.map(|r| r.value).unwrap_or(f64::NAN)
    }

    /// Detection error FA + MD as the single rewritten integral
    ///   1 - int_0^{tau - Na} f_I(x) S(tau - Na - x) dx,
    /// unimodal in tau beyond the noise floor.
    pub fn detection_error(&self, tau: f64) -> f64 {
        let t = tau - self.noise_adv;
        if t <= 0.0 {
            return 1.0;
        }
        let bp = self.right_refined_breakpoints(t);
        let integral = integrate_segmented(
            |x| self.dist.pdf(x) * self.signal_survival(t - x),
            &bp,
            &self.spec,
        );
        match integral {
            Ok(r) => (1.0 - r.value).clamp(0.0, 1.0),
            Err(_) => 1.0 - self.fa_md_sum_fallback(tau),
        }
    }

    fn fa_md_sum_fallback(&self, tau: f64) -> f64 {
        1.0 - (self.fa_prob(tau) + self.md_prob(tau)).clamp(0.0, 1.0)
    }

    /// Breakpoints refined toward x = 0 where the signal density spikes
    /// (the nearest adversary is far, so most signal mass is tiny).
    fn left_refined_breakpoints(&self, t: f64) -> Vec<f64> {
        let mut bp = vec![0.0, t];
        let mut s = self.u_scale * 1e-4;
        while s < t {
            bp.push(s);
            s *= 10.0;
        }
        let i_scale = self.dist.median();
        for f in [t - i_scale, t - 0.1 * i_scale, 0.5 * t] {
            if f > 0.0 && f < t {
                bp.push(f);
            }
        }
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        bp
    }

    /// Breakpoints refined toward x = t where the signal survival factor
    /// S(t - x) turns over, plus coverage of the interference bulk.
    fn right_refined_breakpoints(&self, t: f64) -> Vec<f64> {
        let mut bp = vec![0.0, t];
        let mut off = self.u_scale * 1e-4;
        while off < t {
            let p = t - off;
            if p > 0.0 {
                bp.push(p);
            }
            off *= 10.0;
        }
        let i_scale = self.dist.median();
        for s in [i_scale * 0.01, i_scale * 0.1, i_scale, i_scale * 10.0, 0.5 * t] {
            if s > 0.0 && s < t {
                bp.push(s);
            }
        }
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        bp
    }
}

/// False-alarm probability for one-off use: builds the model and evaluates.
pub fn fa_prob(p_s: f64, tau: f64, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64, AnalyticsError> {
    Ok(DetectionModel::new(p_s, cfg, spec)?.fa_prob(tau))
}

/// Miss-detection probability for one-off use.
pub fn md_prob(p_s: f64, tau: f64, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64, AnalyticsError> {
    Ok(DetectionModel::new(p_s, cfg, spec)?.md_prob(tau))
}

/// Detection error FA + MD for one-off use.
pub fn detection_error(p_s: f64, tau: f64, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64, AnalyticsError> {
    Ok(DetectionModel::new(p_s, cfg, spec)?.detection_error(tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::erfc;
    use approx::assert_relative_eq;

    fn cfg() -> NetworkConfig {
        NetworkConfig::default()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn survival_matches_closed_form_at_alpha_four() {
        // for alpha = 4 the distance integral is Gaussian-quartic:
        // S(u) = pi lam sqrt(pi p/(4u)) exp(a^2 p/(4u)) erfc(a sqrt(p/(4u))),
        // a = pi lam
        let cfg = cfg();
        let p_s = 10.0;
        for &u in &[1e-4, 1e-3, 1e-2, 0.1, 1.0] {
            let got = nearest_adversary_signal_survival(u, p_s, &cfg, &spec()).unwrap();
            let a = std::f64::consts::PI * cfg.lambda_a;
            let b = u / p_s;
            let z = a / (2.0 * b.sqrt());
            let expect = a * (std::f64::consts::PI / b).sqrt() / 2.0 * (z * z).exp() * erfc(z);
            assert_relative_eq!(got, expect, max_relative = 1e-7);
        }
    }

    #[test]
    fn signal_pdf_power_rescaling() {
        // pdf(t; c p) = pdf(t/c; p)/c
        let cfg = cfg();
        let c = 7.0;
        for &t in &[1e-3, 0.02, 0.4] {
            let a = nearest_adversary_signal_pdf(t, c * 10.0, &cfg, &spec()).unwrap();
            let b = nearest_adversary_signal_pdf(t / c, 10.0, &cfg, &spec()).unwrap() / c;
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
    }

    #[test]
    fn model_tables_match_direct_quadrature() {
        let cfg = cfg();
        let model = DetectionModel::new(10.0, &cfg, &spec()).unwrap();
        for i in 0..30 {
            let u = model.u_scale * 10f64.powf(-6.0 + 12.0 * i as f64 / 29.0);
            let direct = nearest_adversary_signal_survival(u, 10.0, &cfg, &spec()).unwrap();
            assert_relative_eq!(model.signal_survival(u), direct, epsilon = 1e-8, max_relative = 1e-5);
            let direct_pdf = nearest_adversary_signal_pdf(u, 10.0, &cfg, &spec()).unwrap();
            assert_relative_eq!(model.signal_pdf(u), direct_pdf, epsilon = 1e-10, max_relative = 1e-4);
        }
    }

    #[test]
    fn fa_md_boundary_values() {
        let cfg = cfg();
        let model = DetectionModel::new(10.0, &cfg, &spec()).unwrap();
        let na = cfg.noise_adv;
        assert_eq!(model.fa_prob(na), 1.0);
        assert_eq!(model.md_prob(na), 0.0);
        assert_eq!(model.detection_error(na), 1.0);
        // tau -> infinity; the laws are heavy-tailed (survival ~ tau^(-2/alpha)),
        // so the approach to the limits is polynomial
        let huge = 1e9;
        assert!(model.fa_prob(huge) < 1e-4);
        assert!(model.md_prob(huge) > 1.0 - 1e-4);
        assert!(model.detection_error(huge) > 1.0 - 1e-4);
    }

    #[test]
    fn fa_nonincreasing_md_nondecreasing() {
        let cfg = cfg();
        let model = DetectionModel::new(10.0, &cfg, &spec()).unwrap();
        let mut fa_prev = 2.0;
        let mut md_prev = -1.0;
        for i in 0..40 {
            let tau = cfg.noise_adv + 1e-3 * 10f64.powf(5.0 * i as f64 / 39.0);
            let fa = model.fa_prob(tau);
            let md = model.md_prob(tau);
            assert!(fa <= fa_prev + 1e-9);
            assert!(md >= md_prev - 1e-9);
            fa_prev = fa;
            md_prev = md;
        }
    }

    #[test]
    fn single_integral_form_matches_fa_plus_md() {
        let cfg = cfg();
        let model = DetectionModel::new(10.0, &cfg, &spec()).unwrap();
        for i in 0..20 {
            let tau = cfg.noise_adv + 0.02 * 10f64.powf(3.5 * i as f64 / 19.0);
            let single = model.detection_error(tau);
            let dual = model.fa_prob(tau) + model.md_prob(tau);
            assert_relative_eq!(single, dual, epsilon = 1e-6);
        }
    }

    #[test]
    fn vanishing_power_makes_hypotheses_indistinguishable() {
        let cfg = cfg();
        let model = DetectionModel::new(1e-12, &cfg, &spec()).unwrap();
        for i in 0..12 {
            let tau = cfg.noise_adv + 1e-2 * 10f64.powf(4.0 * i as f64 / 11.0);
            let d = model.detection_error(tau);
            assert!((d - 1.0).abs() <= 1e-3, "tau={tau}: D={d}");
        }
    }
}
