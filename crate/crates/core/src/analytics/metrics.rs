//! Link reliability and harvested-power probabilities for the PS and TS
//! schemes, conditioned on the typical transmitter being active.

use super::inversion::InterferenceDistribution;
use super::laplace::{derivative_magnitudes, AnalyticsError, InterferenceFieldParams};
use crate::config::{NetworkConfig, Scheme, Strategy};
use crate::quad::{integrate_segmented, QuadratureSpec};
use crate::special::{binomial, factorial};

fn require_scheme(s: &Strategy, want: Scheme) -> Result<(), AnalyticsError> {
    if s.scheme != want {
        return Err(AnalyticsError::Domain(format!(
            "expected {} strategy, got {}",
            want.as_str(),
            s.scheme.as_str()
        )));
    }
    Ok(())
}

/// Gamma(M, 1) survival of a + b*I averaged over the interference law:
///   E[ P(g >= a I + b) ] = e^{-b} sum_{m<M} 1/m! sum_{n<=m} C(m,n)
///                          a^n b^{m-n} (-1)^n L^(n)(a),
/// where every (-1)^n L^(n)(a) is nonnegative, so the double sum has no
/// cancellation.
fn gamma_mixture_survival(a: f64, b: f64, m_antennas: u32, params: &InterferenceFieldParams) -> f64 {
    let q = params.q();
    // underflow guards: if either exponential factor is zero at f64 scale,
    // the probability is zero (and a^m could overflow before multiplying)
    if params.nu * a.powf(q) > 700.0 || b > 700.0 {
        return 0.0;
    }
    let n_max = m_antennas - 1;
    let k = derivative_magnitudes(a, n_max, params.nu, q);
    let mut total = 0.0;
    for m in 0..=n_max {
        let mut inner = 0.0;
        for n in 0..=m {
            inner += binomial(m, n) * a.powi(n as i32) * b.powi((m - n) as i32) * k[n as usize];
        }
        total += inner / factorial(m);
    }
    ((-b).exp() * total).clamp(0.0, 1.0)
}

/// P[SINR_PS >= 2^(l/dt) - 1 | active] for the power-splitting scheme.
pub fn sinr_prob_ps(strategy: &Strategy, cfg: &NetworkConfig) -> Result<f64, AnalyticsError> {
    require_scheme(strategy, Scheme::Ps)?;
    let thr = (2f64).powf(cfg.packet_bits / cfg.slot_s) - 1.0;
    let a = thr * cfg.r_link.powf(cfg.alpha) / strategy.p_s;
    let b = a / strategy.rho * (strategy.rho * cfg.noise_rf + cfg.noise_rx);
    let params = InterferenceFieldParams::from_config(strategy.p_s, cfg);
    Ok(gamma_mixture_survival(a, b, cfg.m_antennas, &params))
}

/// P[SINR_TS >= 2^(l/(rho dt)) - 1 | active] for the time-switching scheme.
/// The decoding window shrinks to rho of the slot, so the rate threshold
/// steepens as rho falls.
pub fn sinr_prob_ts(strategy: &Strategy, cfg: &NetworkConfig) -> Result<f64, AnalyticsError> {
    require_scheme(strategy, Scheme::Ts)?;
    if strategy.rho <= 0.0 {
        return Err(AnalyticsError::Domain("TS scheme needs rho > 0".into()));
    }
    let thr = (2f64).powf(cfg.packet_bits / (strategy.rho * cfg.slot_s)) - 1.0;
    let a = thr * cfg.r_link.powf(cfg.alpha) / strategy.p_s;
    let b = a * (cfg.noise_rf + cfg.noise_rx);
    let params = InterferenceFieldParams::from_config(strategy.p_s, cfg);
    Ok(gamma_mixture_survival(a, b, cfg.m_antennas, &params))
}

/// Direct-link received power p_s g R^-alpha has a Gamma(M) law; its
/// density at t.
fn direct_gamma_pdf(t: f64, p_s: f64, cfg: &NetworkConfig) -> f64 {
    let rate = cfg.r_link.powf(cfg.alpha) / p_s;
    let x = t * rate;
    if x <= 0.0 {
        return 0.0;
    }
    let m = cfg.m_antennas;
    rate * x.powi(m as i32 - 1) * (-x).exp() / factorial(m - 1)
}

/// Shared harvested-power outage integral:
///   P[direct + I >= t0] = 1 - int_0^{t0} f_direct(t) F_I(t0 - t) dt.
fn harvest_prob(t0: f64, p_s: f64, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64, AnalyticsError> {
    if t0 <= 0.0 {
        return Ok(1.0);
    }
    let dist = InterferenceDistribution::new(InterferenceFieldParams::from_config(p_s, cfg), spec)?;
    // integrand scales: the Gamma bulk around M p_s R^-alpha and the
    // interference scale around its median; when t0 sits far beyond the
    // bulk the gap needs geometric panels or the quadrature nodes miss
    // the density spike entirely
    let gamma_scale = cfg.m_antennas as f64 * p_s / cfg.r_link.powf(cfg.alpha);
    let i_scale = dist.median();
    let mut bp = vec![0.0, t0];
    let push = |s: f64, bp: &mut Vec<f64>| {
        if s > 0.0 && s < t0 {
            bp.push(s);
        }
    };
    for m in [0.05, 0.15, 0.35, 0.6, 1.0, 1.5, 2.2, 3.2] {
        push(gamma_scale * m, &mut bp);
    }
    let mut s = gamma_scale * 3.2;
    while s < t0 {
        push(s, &mut bp);
        s *= 4.0;
    }
    for m in [100.0, 10.0, 1.0, 0.1] {
        push(t0 - i_scale * m, &mut bp);
    }
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    let integral = integrate_segmented(|t| direct_gamma_pdf(t, p_s, cfg) * dist.cdf(t0 - t), &bp, spec)?;
    Ok((1.0 - integral.value).clamp(0.0, 1.0))
}

/// P[PH_PS >= PH0 | active]: harvested power in the PS scheme meets the
/// threshold. At rho = 1 nothing is harvested beyond receiver noise.
pub fn ph_prob_ps(strategy: &Strategy, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64, AnalyticsError> {
    require_scheme(strategy, Scheme::Ps)?;
    if strategy.rho >= 1.0 {
        return Ok(if cfg.noise_rx >= cfg.ph_threshold { 1.0 } else { 0.0 });
    }
    let t0 = (cfg.ph_threshold - cfg.noise_rx) / (1.0 - strategy.rho) - cfg.noise_rf;
    harvest_prob(t0, strategy.p_s, cfg, spec)
}

/// P[PH_TS >= PH0/(1-rho) | active]: the TS receiver must harvest the whole
/// slot budget within the (1-rho) harvesting window.
pub fn ph_prob_ts(strategy: &Strategy, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64, AnalyticsError> {
    require_scheme(strategy, Scheme::Ts)?;
    if strategy.rho >= 1.0 {
        return Ok(0.0);
    }
    let t1 = cfg.ph_threshold / (1.0 - strategy.rho) - cfg.noise_rx - cfg.noise_rf;
    harvest_prob(t1, strategy.p_s, cfg, spec)
}
