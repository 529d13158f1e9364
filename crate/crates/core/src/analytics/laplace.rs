//! Laplace transform of the aggregate interference field and its exact
//! derivatives.
//!
//! Both the receiver-observed and adversary-observed aggregates have the
//! same transform exp(-nu * s^(2/alpha)), with nu combining node densities,
//! activity probabilities, and powers raised to 2/alpha.

use crate::config::NetworkConfig;
use crate::special::sinc;

/// Parameters of the aggregate interference field: the composite constant
/// nu and the path-loss exponent it was built with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceFieldParams {
    pub nu: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticsError {
    Domain(String),
    Quadrature(crate::quad::QuadError),
}

impl std::fmt::Display for AnalyticsError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnalyticsError::Domain(msg) => write!(f, "domain error: {msg}"),
            AnalyticsError::Quadrature(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AnalyticsError {}

impl From<crate::quad::QuadError> for AnalyticsError {
    fn from(e: crate::quad::QuadError) -> Self {
        AnalyticsError::Quadrature(e)
    }
}

impl InterferenceFieldParams {
    /// nu = pi / sinc(2/alpha) * [lambda_d P_H1 p_s^(2/alpha)
    ///                            + lambda_b P_C1 p_cell^(2/alpha)]
    pub fn from_config(p_s: f64, cfg: &NetworkConfig) -> Self {
        let q = 2.0 / cfg.alpha;
        let nu = std::f64::consts::PI / sinc(q)
            * (cfg.lambda_d * cfg.p_active_d * p_s.powf(q)
                + cfg.lambda_b * cfg.p_active_b * cfg.p_cell.powf(q));
        InterferenceFieldParams { nu, alpha: cfg.alpha }
    }

    /// Tail exponent q = 2/alpha in (0, 1).
    pub fn q(&self) -> f64 {
        2.0 / self.alpha
    }
}

/// L(s) = exp(-nu * s^(2/alpha)); equals 1 at s = 0 and is strictly
/// decreasing.
pub fn interference_laplace(s: f64, params: &InterferenceFieldParams) -> Result<f64, AnalyticsError> {
    if s < 0.0 {
        return Err(AnalyticsError::Domain(format!("laplace argument must be nonnegative, got {s}")));
    }
    Ok((-params.nu * s.powf(params.q())).exp())
}

/// Exact n-th derivative of L(s) = exp(h(s)), h(s) = -nu s^q.
///
/// Computed through a sign-separated Faa di Bruno recursion: with
/// K_n = (-1)^n L^(n) and G_j = (-1)^j h^(j) = nu q (1-q)(2-q)...(j-1-q) s^(q-j),
/// every K_n is a sum of nonnegative products
///     K_{n+1} = sum_k C(n,k) K_k G_{n+1-k},
/// so there is no cancellation for any n. The returned value is L^(n)(s);
/// (-1)^n times it is nonnegative (it is a moment-weighted expectation of
/// the interference).
pub fn laplace_nth_derivative(s: f64, n: u32, params: &InterferenceFieldParams) -> Result<f64, AnalyticsError> {
    if n == 0 {
        return interference_laplace(s, params);
    }
    if s <= 0.0 {
        return Err(AnalyticsError::Domain(format!(
            "derivative order {n} needs s > 0, got {s}"
        )));
    }
    let q = params.q();
    let k = derivative_magnitudes(s, n, params.nu, q);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * k[n as usize])
}

/// Magnitudes K_0..K_n of the alternating derivatives (see above).
pub(crate) fn derivative_magnitudes(s: f64, n: u32, nu: f64, q: f64) -> Vec<f64> {
    let n = n as usize;
    // G_j = nu * q * prod_{i=1}^{j-1} (i - q) * s^(q - j), j >= 1
    let mut g = vec![0.0f64; n + 1];
    if n >= 1 {
        let mut coef = nu * q;
        for (j, slot) in g.iter_mut().enumerate().skip(1) {
            *slot = coef * s.powf(q - j as f64);
            coef *= j as f64 - q;
        }
    }
    let mut k = vec![0.0f64; n + 1];
    k[0] = (-nu * s.powf(q)).exp();
    let mut binom_row = vec![1.0f64];
    for m in 0..n {
        // binomial row C(m, .)
        let mut acc = 0.0;
        for (j, b) in binom_row.iter().enumerate() {
            acc += b * k[j] * g[m + 1 - j];
        }
        k[m + 1] = acc;
        // extend Pascal row to C(m+1, .)
        let mut next = vec![1.0f64; m + 2];
        for j in 1..=m {
            next[j] = binom_row[j - 1] + binom_row[j];
        }
        binom_row = next;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn defaults_params(p_s: f64) -> InterferenceFieldParams {
        InterferenceFieldParams::from_config(p_s, &NetworkConfig::default())
    }

    #[test]
    fn nu_matches_hand_evaluation_at_defaults() {
        // alpha = 4: pi/sinc(1/2) = pi^2/2, and the Table-1 densities give
        // nu = (pi^2/2) (0.05 sqrt(10) + 0.005 sqrt(1000))
        let params = defaults_params(10.0);
        let hand = std::f64::consts::PI.powi(2) / 2.0
            * (0.05 * 10f64.sqrt() + 0.005 * 1000f64.sqrt());
        assert_relative_eq!(params.nu, hand, max_relative = 1e-14);
        assert_relative_eq!(params.nu, 1.5606, max_relative = 1e-4);
        assert_relative_eq!(
            interference_laplace(1.0, &params).unwrap(),
            0.2100,
            max_relative = 1e-3
        );
    }

    #[test]
    fn laplace_at_origin_is_one_and_decreasing() {
        let params = defaults_params(10.0);
        assert_eq!(interference_laplace(0.0, &params).unwrap(), 1.0);
        assert!(
            interference_laplace(2.0, &params).unwrap() < interference_laplace(1.0, &params).unwrap()
        );
        assert!(interference_laplace(-1.0, &params).is_err());
    }

    #[test]
    fn log_of_laplace_is_linear_in_s_to_q() {
        let params = defaults_params(25.0);
        for &s in &[1e-3, 0.1, 1.0, 7.0, 400.0] {
            let l = interference_laplace(s, &params).unwrap();
            assert_relative_eq!(l.ln(), -params.nu * s.powf(params.q()), max_relative = 1e-12);
        }
    }

    #[test]
    fn first_derivative_matches_hand_formula() {
        // d/ds exp(-nu sqrt(s)) = -nu/(2 sqrt(s)) exp(-nu sqrt(s))
        let params = defaults_params(10.0);
        let d = laplace_nth_derivative(1.0, 1, &params).unwrap();
        let hand = -params.nu / 2.0 * (-params.nu).exp();
        assert_relative_eq!(d, hand, max_relative = 1e-13);
        assert_relative_eq!(d, -0.7803 * 0.2100, max_relative = 2e-3);
    }

    #[test]
    fn zeroth_derivative_is_laplace() {
        let params = defaults_params(3.0);
        assert_eq!(
            laplace_nth_derivative(0.7, 0, &params).unwrap(),
            interference_laplace(0.7, &params).unwrap()
        );
    }

    #[test]
    fn alternating_signs_are_nonnegative() {
        let params = defaults_params(10.0);
        for n in 0..=9u32 {
            for &s in &[0.01, 0.3, 1.0, 12.0] {
                let d = laplace_nth_derivative(s, n, &params).unwrap();
                let signed = if n % 2 == 0 { d } else { -d };
                assert!(signed >= 0.0, "n={n} s={s} gave {d}");
            }
        }
    }

    #[test]
    fn derivative_domain_errors() {
        let params = defaults_params(10.0);
        assert!(laplace_nth_derivative(0.0, 1, &params).is_err());
        assert!(laplace_nth_derivative(-1.0, 2, &params).is_err());
    }
}
