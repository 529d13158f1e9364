//! The two-stage Stackelberg game: the adversary (follower) picks the
//! detection threshold minimizing its detection error; the D2D network
//! (leader) picks (p_s, rho) maximizing utility subject to covertness and
//! power-outage constraints, anticipating the follower's best response.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::analytics::{ph_prob, sinr_prob, AnalyticsError, DetectionModel};
use crate::config::{NetworkConfig, Scheme, Strategy};
use crate::quad::QuadratureSpec;
use crate::solvers::{
    ga_maximize, rosenbrock_minimize, rosenbrock_minimize_from, Feasibility, GaSpec,
    RosenbrockSpec, SolverError,
};

/// The follower's best response for one SWIPT power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerStageSolution {
    /// Optimal detection threshold, mW.
    pub tau_star: f64,
    /// Detection error achieved there (1 means the transmitter is
    /// perfectly hidden).
    pub error_star: f64,
    /// True when the detection error was flat at 1 (vanishing power): any
    /// threshold is a best response and tau_star is just the bracket
    /// midpoint.
    pub degenerate: bool,
}

/// The leader's solution with its audit trail.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub strategy: Strategy,
    pub utility: f64,
    pub lower: LowerStageSolution,
    /// Link reliability at the equilibrium strategy.
    pub p_sinr: f64,
    /// Harvested-power probability at the equilibrium strategy.
    pub p_ph: f64,
    /// P_PH - (1 - eps_power); nonnegative when feasible.
    pub slack_power: f64,
    /// error_star - (1 - eps_covert); nonnegative when feasible.
    pub slack_covert: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GameError {
    Analytics(AnalyticsError),
    Solver(SolverError),
    /// The doubling bracket for the threshold search hit its cap while the
    /// detection error was still descending.
    Bracketing { p_s: f64 },
    /// No (p_s, rho) satisfied both constraints; carries the least
    /// violating strategy and its slacks for diagnostics.
    Infeasible {
        scheme: Scheme,
        strategy: Strategy,
        slack_power: f64,
        slack_covert: f64,
    },
}

impl std::fmt::Display for GameError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GameError::Analytics(e) => write!(f, "{e}"),
            GameError::Solver(e) => write!(f, "{e}"),
            GameError::Bracketing { p_s } => {
                write!(f, "failed to bracket the detection-error minimum at p_s = {p_s} mW")
            }
            GameError::Infeasible { scheme, strategy, slack_power, slack_covert } => write!(
                f,
                "no feasible strategy for the {} scheme; closest candidate p_s = {:.6} mW, rho = {:.4} \
                 (power slack {:.3e}, covert slack {:.3e})",
                scheme.as_str(),
                strategy.p_s,
                strategy.rho,
                slack_power,
                slack_covert
            ),
        }
    }
}

impl std::error::Error for GameError {}

impl From<AnalyticsError> for GameError {
    fn from(e: AnalyticsError) -> Self {
        GameError::Analytics(e)
    }
}

impl From<SolverError> for GameError {
    fn from(e: SolverError) -> Self {
        GameError::Solver(e)
    }
}

/// Detection error flatter than this (entire curve within FLAT_TOL of 1)
/// counts as the degenerate lower stage.
const FLAT_TOL: f64 = 1e-4;
const MAX_DOUBLINGS: usize = 90;

/// Minimize the follower's detection error over the threshold for a given
/// SWIPT power. The minimum is bracketed by doubling the offset above the
/// adversary noise floor, then resolved by the expand/contract line search.
/// tau_star depends only on p_s: the detection statistics involve neither
/// rho nor the scheme.
pub fn best_response_tau(p_s: f64, cfg: &NetworkConfig, quad: &QuadratureSpec) -> Result<LowerStageSolution, GameError> {
    let model = DetectionModel::new(p_s, cfg, quad)?;
    best_response_from_model(&model, cfg)
}

fn best_response_from_model(model: &DetectionModel, cfg: &NetworkConfig) -> Result<LowerStageSolution, GameError> {
    let na = cfg.noise_adv;
    let mut offset = na * 1e-9;
    let mut prev_err = model.detection_error(na + offset);
    let mut min_err = prev_err;
    let mut doublings = 0usize;
    let bracket = loop {
        if doublings >= MAX_DOUBLINGS {
            if min_err >= 1.0 - 10.0 * FLAT_TOL {
                // flat at 1: any threshold is optimal; report the midpoint
                let lo = na * (1.0 + 1e-9);
                let hi = na + offset;
                let mid = 0.5 * (lo + hi);
                return Ok(LowerStageSolution {
                    tau_star: mid,
                    error_star: model.detection_error(mid),
                    degenerate: true,
                });
            }
            return Err(GameError::Bracketing { p_s: model.p_s() });
        }
        doublings += 1;
        let next = offset * 2.0;
        let err = model.detection_error(na + next);
        let dipped = min_err < 1.0 - FLAT_TOL;
        if err >= prev_err && dipped {
            break (na + next / 4.0, na + next);
        }
        min_err = min_err.min(err);
        prev_err = err;
        offset = next;
    };

    let spec = RosenbrockSpec::on_interval(bracket.0, bracket.1);
    let r = rosenbrock_minimize(|tau| model.detection_error(tau), &spec).map_err(GameError::from)?;
    Ok(LowerStageSolution { tau_star: r.x, error_star: r.f, degenerate: false })
}

/// Leader utility: reliability reward minus the power cost
/// u_price * rho * p_s (p_s scaled by `u_power_scale`, by default pricing
/// power in watts so utilities stay O(1)).
pub fn network_utility(strategy: &Strategy, cfg: &NetworkConfig) -> Result<f64, GameError> {
    let p = sinr_prob(strategy, cfg)?;
    Ok(cfg.u_reward * p - cfg.u_price * strategy.rho * strategy.p_s * cfg.u_power_scale)
}

/// Signed constraint slacks (power, covert); the strategy is feasible iff
/// both are nonnegative.
pub fn constraints(strategy: &Strategy, cfg: &NetworkConfig, quad: &QuadratureSpec) -> Result<(f64, f64), GameError> {
    let p_ph = ph_prob(strategy, cfg, quad)?;
    let lower = best_response_tau(strategy.p_s, cfg, quad)?;
    Ok((p_ph - (1.0 - cfg.eps_power), lower.error_star - (1.0 - cfg.eps_covert)))
}

/// Memo for the follower's best response, keyed on a 1e-6-relative grid of
/// p_s (finer distinctions are below the line-search tolerance).
pub struct BestResponseCache {
    map: Mutex<HashMap<i64, LowerStageSolution>>,
}

impl BestResponseCache {
    pub fn new() -> Self {
        BestResponseCache { map: Mutex::new(HashMap::new()) }
    }

    fn key(p_s: f64) -> i64 {
        (p_s.ln() * 1e6).round() as i64
    }

    pub fn get_or_compute(
        &self,
        p_s: f64,
        cfg: &NetworkConfig,
        quad: &QuadratureSpec,
    ) -> Result<LowerStageSolution, GameError> {
        let key = Self::key(p_s);
        if let Some(hit) = self.map.lock().unwrap().get(&key) {
            return Ok(*hit);
        }
        let solution = best_response_tau(p_s, cfg, quad)?;
        self.map.lock().unwrap().insert(key, solution);
        Ok(solution)
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for BestResponseCache {
    fn default() -> Self {
        Self::new()
    }
}

/// Covertness screen built on the monotone structure of the lower stage:
/// error_star is nonincreasing in p_s, so the covert constraint is an upper
/// bound on p_s. Exact best responses are solved (and cached) only near the
/// boundary; everything below a power already proven covert, or above one
/// already proven detectable, is answered from the bracket.
struct CovertScreen<'a> {
    cache: &'a BestResponseCache,
    cfg: &'a NetworkConfig,
    quad: &'a QuadratureSpec,
    /// (largest p_s proven covert-feasible, smallest p_s proven infeasible)
    bracket: Mutex<(f64, f64)>,
}

impl<'a> CovertScreen<'a> {
    fn new(cache: &'a BestResponseCache, cfg: &'a NetworkConfig, quad: &'a QuadratureSpec) -> Self {
        CovertScreen { cache, cfg, quad, bracket: Mutex::new((0.0, f64::INFINITY)) }
    }

    /// (covert-feasible, violation magnitude). The violation for screened
    /// points is a monotone proxy, good enough for ranking; exact slacks
    /// are recomputed wherever results are reported.
    fn check(&self, p_s: f64, exact: bool) -> Result<(bool, f64), GameError> {
        if !exact {
            let (ok_below, bad_above) = *self.bracket.lock().unwrap();
            if p_s <= ok_below {
                return Ok((true, 0.0));
            }
            if p_s >= bad_above {
                return Ok((false, self.cfg.eps_covert * (1.0 + p_s / bad_above)));
            }
        }
        let lower = self.cache.get_or_compute(p_s, self.cfg, self.quad)?;
        let slack = lower.error_star - (1.0 - self.cfg.eps_covert);
        let mut b = self.bracket.lock().unwrap();
        if slack >= 0.0 {
            b.0 = b.0.max(p_s);
        } else {
            b.1 = b.1.min(p_s);
        }
        Ok((slack >= 0.0, (-slack).max(0.0)))
    }
}

/// Solve the upper stage for one scheme: GA over (p_s, rho) with the
/// follower's tau* folded into the covertness constraint, followed by a
/// deterministic coordinate line-search polish (the utility is nearly flat
/// in rho for the PS scheme, which a population method resolves slowly).
pub fn solve_equilibrium(
    scheme: Scheme,
    cfg: &NetworkConfig,
    ga: &GaSpec,
    quad: &QuadratureSpec,
) -> Result<EquilibriumResult, GameError> {
    cfg.validated().map_err(|e| GameError::Analytics(AnalyticsError::Domain(e.to_string())))?;
    let cache = BestResponseCache::new();
    let screen = CovertScreen::new(&cache, cfg, quad);
    // the screen's bracket shortcut is only sound for a feasible/infeasible
    // verdict; adaptive penalties need exact violation magnitudes
    let exact_only = ga.constraint_mode == crate::solvers::ConstraintMode::AdaptivePenalty;
    // power is searched on its log axis: the covert bound typically leaves
    // a feasible window spanning a small fraction of the linear mW range
    // but a healthy share of the dB range
    let bounds = [(cfg.ps_min.ln(), cfg.ps_max.ln()), (cfg.rho_min, 1.0)];

    let objective = |x: &[f64]| -> f64 {
        let s = Strategy::new(scheme, x[0].exp(), x[1]);
        network_utility(&s, cfg).unwrap_or(f64::NEG_INFINITY)
    };
    let feasibility = |x: &[f64]| -> Feasibility {
        let s = Strategy::new(scheme, x[0].exp(), x[1]);
        let p_ph = match ph_prob(&s, cfg, quad) {
            Ok(p) => p,
            Err(_) => return Feasibility::violated(f64::INFINITY),
        };
        let slack_power = p_ph - (1.0 - cfg.eps_power);
        let (covert_ok, covert_violation) = match screen.check(s.p_s, exact_only) {
            Ok(v) => v,
            Err(_) => return Feasibility::violated(f64::INFINITY),
        };
        if slack_power >= 0.0 && covert_ok {
            Feasibility::feasible()
        } else {
            Feasibility::violated((-slack_power).max(0.0) + covert_violation)
        }
    };

    match ga_maximize(objective, feasibility, &bounds, ga) {
        Ok(r) => {
            let polished = polish(scheme, [r.best_x[0], r.best_x[1]], &bounds, &objective, &feasibility);
            let strategy = Strategy::new(scheme, polished[0].exp(), polished[1]);
            let p_sinr = sinr_prob(&strategy, cfg)?;
            let p_ph = ph_prob(&strategy, cfg, quad)?;
            let lower = cache.get_or_compute(strategy.p_s, cfg, quad)?;
            Ok(EquilibriumResult {
                utility: cfg.u_reward * p_sinr - cfg.u_price * strategy.rho * strategy.p_s * cfg.u_power_scale,
                strategy,
                lower,
                p_sinr,
                p_ph,
                slack_power: p_ph - (1.0 - cfg.eps_power),
                slack_covert: lower.error_star - (1.0 - cfg.eps_covert),
            })
        }
        Err(SolverError::Infeasible { at, .. }) => {
            let strategy = Strategy::new(scheme, at[0].exp(), at[1]);
            let (slack_power, slack_covert) = constraints(&strategy, cfg, quad)?;
            Err(GameError::Infeasible { scheme, strategy, slack_power, slack_covert })
        }
        Err(e) => Err(GameError::Solver(e)),
    }
}

/// Alternate feasible line searches along each coordinate from the GA's
/// best point; never returns a worse point than it was given.
fn polish(
    _scheme: Scheme,
    start: [f64; 2],
    bounds: &[(f64, f64); 2],
    objective: &dyn Fn(&[f64]) -> f64,
    feasibility: &dyn Fn(&[f64]) -> Feasibility,
) -> [f64; 2] {
    let mut x = start;
    let penalized = |x: &[f64]| -> f64 {
        if feasibility(x).feasible {
            -objective(x)
        } else {
            f64::INFINITY
        }
    };
    for _ in 0..3 {
        for coord in [1usize, 0usize] {
            let (lo, hi) = bounds[coord];
            let mut spec = RosenbrockSpec::on_interval(lo, hi);
            spec.initial_step = (hi - lo) / 16.0;
            let f = |v: f64| {
                let mut cand = x;
                cand[coord] = v;
                penalized(&cand)
            };
            if let Ok(r) = rosenbrock_minimize_from(f, &spec, x[coord]) {
                if r.f <= penalized(&x) {
                    x[coord] = r.x;
                }
            }
        }
    }
    x
}
