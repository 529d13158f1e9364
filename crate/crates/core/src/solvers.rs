//! Derivative-free optimizers: a one-dimensional expand/contract line
//! search for the follower's threshold, exhaustive grids as oracles, and a
//! real-coded genetic algorithm for the leader's two-dimensional problem.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    MaxIterations { best_x: f64, best_f: f64, iters: u64 },
    Infeasible { least_violation: f64, at: Vec<f64> },
    BadSpec(String),
}

impl std::fmt::Display for SolverError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverError::MaxIterations { best_x, best_f, iters } => {
                write!(f, "iteration budget exhausted after {iters} steps (best f({best_x}) = {best_f})")
            }
            SolverError::Infeasible { least_violation, at } => {
                write!(f, "no feasible point found (least violation {least_violation:.3e} at {at:?})")
            }
            SolverError::BadSpec(m) => write!(f, "bad solver spec: {m}"),
        }
    }
}

impl std::error::Error for SolverError {}

/// One-dimensional line-search settings. The method walks with an adaptive
/// step: tripled after an improving move, halved and reversed otherwise,
/// stopping once the step is below `tol`.
#[derive(Debug, Clone, Copy)]
pub struct RosenbrockSpec {
    pub initial_step: f64,
    pub expand: f64,
    pub contract: f64,
    pub tol: f64,
    pub max_iters: u64,
    pub lo: f64,
    pub hi: f64,
}

impl RosenbrockSpec {
    /// Classic coefficients over a search interval: expansion x3,
    /// contraction x(-0.5), tolerance 1e-6 of the span.
    pub fn on_interval(lo: f64, hi: f64) -> Self {
        RosenbrockSpec {
            initial_step: (hi - lo) / 8.0,
            expand: 3.0,
            contract: 0.5,
            tol: 1e-6 * (hi - lo),
            max_iters: 400,
            lo,
            hi,
        }
    }

    fn validate(&self) -> Result<(), SolverError> {
        if !(self.lo < self.hi) {
            return Err(SolverError::BadSpec(format!("need lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if !(self.tol > 0.0) {
            return Err(SolverError::BadSpec("tol must be positive".into()));
        }
        if !(self.expand > 1.0) || !(self.contract > 0.0 && self.contract < 1.0) {
            return Err(SolverError::BadSpec("need expand > 1 and contract in (0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub x: f64,
    pub f: f64,
    pub iters: u64,
}

/// Minimize a unimodal f on [lo, hi] without derivatives.
pub fn rosenbrock_minimize<F: FnMut(f64) -> f64>(
    f: F,
    spec: &RosenbrockSpec,
) -> Result<LineSearchResult, SolverError> {
    let start = 0.5 * (spec.lo + spec.hi);
    rosenbrock_minimize_from(f, spec, start)
}

/// As [`rosenbrock_minimize`] but walking from a caller-chosen start point;
/// the result never scores worse than the start.
pub fn rosenbrock_minimize_from<F: FnMut(f64) -> f64>(
    mut f: F,
    spec: &RosenbrockSpec,
    start: f64,
) -> Result<LineSearchResult, SolverError> {
    spec.validate()?;
    let mut x = start.clamp(spec.lo, spec.hi);
    let mut fx = f(x);
    let mut step = spec.initial_step;
    let mut iters: u64 = 0;
    // resolve slightly below tol so the final point sits within tol of the
    // minimizer, not just the final step
    while step.abs() >= spec.tol / 8.0 {
        if iters >= spec.max_iters {
            return Err(SolverError::MaxIterations { best_x: x, best_f: fx, iters });
        }
        iters += 1;
        let cand = (x + step).clamp(spec.lo, spec.hi);
        let fc = if cand == x { f64::INFINITY } else { f(cand) };
        if fc < fx {
            x = cand;
            fx = fc;
            step *= spec.expand;
        } else {
            step *= -spec.contract;
        }
    }
    Ok(LineSearchResult { x, f: fx, iters })
}

/// Grid argmin over [lo, hi] with `n_points` samples; ties break toward
/// smaller x.
pub fn exhaustive_min<F: FnMut(f64) -> f64>(mut f: F, interval: (f64, f64), n_points: usize) -> (f64, f64) {
    assert!(n_points >= 2, "need at least two grid points");
    let (lo, hi) = interval;
    let mut best = (lo, f(lo));
    for i in 1..n_points {
        let x = lo + (hi - lo) * i as f64 / (n_points - 1) as f64;
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Constraint-handling mode for the GA.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintMode {
    /// Infeasible individuals never outrank feasible ones; among
    /// themselves they rank by (smaller) violation, so the population can
    /// still walk toward the feasible set when it starts outside it.
    DeathPenalty,
    /// Fitness = objective - coefficient * violation, coefficient ramping
    /// over the run.
    AdaptivePenalty,
}

#[derive(Debug, Clone, Copy)]
pub struct GaSpec {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism_count: usize,
    pub seed: u64,
    pub constraint_mode: ConstraintMode,
}

impl Default for GaSpec {
    fn default() -> Self {
        GaSpec {
            population: 60,
            generations: 120,
            crossover_rate: 0.9,
            mutation_rate: 0.25,
            elitism_count: 2,
            seed: 1,
            constraint_mode: ConstraintMode::DeathPenalty,
        }
    }
}

impl GaSpec {
    fn validate(&self) -> Result<(), SolverError> {
        if self.population < 4 {
            return Err(SolverError::BadSpec("population must be at least 4".into()));
        }
        if self.elitism_count >= self.population {
            return Err(SolverError::BadSpec("elitism_count must be below population".into()));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(SolverError::BadSpec("rates must lie in [0, 1]".into()));
        }
        if self.generations == 0 {
            return Err(SolverError::BadSpec("generations must be positive".into()));
        }
        Ok(())
    }
}

/// Feasibility report for one candidate: `violation` is 0 when feasible
/// and grows with the constraint breach otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub violation: f64,
}

impl Feasibility {
    pub fn feasible() -> Self {
        Feasibility { feasible: true, violation: 0.0 }
    }

    pub fn violated(amount: f64) -> Self {
        Feasibility { feasible: false, violation: amount.max(0.0) }
    }
}

#[derive(Debug, Clone)]
pub struct GaResult {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    /// Best feasible objective seen up to each generation (monotone under
    /// elitism); empty prefix until the first feasible individual appears.
    pub history: Vec<f64>,
}

struct Evaluated {
    x: Vec<f64>,
    objective: f64,
    feas: Feasibility,
}

/// Maximize `objective` over a box subject to `feasibility`, with a
/// real-coded GA: tournament selection, blend crossover, Gaussian mutation
/// whose scale halves every quarter of the run, and elitism. Objective and
/// feasibility evaluations run in parallel; evolution itself consumes the
/// seeded RNG sequentially, so results are reproducible for a fixed seed.
pub fn ga_maximize<F, G>(
    objective: F,
    feasibility: G,
    bounds: &[(f64, f64)],
    spec: &GaSpec,
) -> Result<GaResult, SolverError>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Feasibility + Sync,
{
    spec.validate()?;
    if bounds.is_empty() || bounds.iter().any(|(lo, hi)| !(lo < hi)) {
        return Err(SolverError::BadSpec("bounds must be nonempty with lo < hi".into()));
    }
    let dim = bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let evaluate = |pop: Vec<Vec<f64>>| -> Vec<Evaluated> {
        pop.into_par_iter()
            .map(|x| {
                let feas = feasibility(&x);
                let objective = objective(&x);
                Evaluated { x, objective, feas }
            })
            .collect()
    };

    let fitness = |e: &Evaluated, gen: usize| -> f64 {
        if e.feas.feasible {
            e.objective
        } else {
            match spec.constraint_mode {
                ConstraintMode::DeathPenalty => -1e12 - e.feas.violation,
                ConstraintMode::AdaptivePenalty => {
                    let coef = 1e3 * (gen + 1) as f64 / spec.generations as f64;
                    e.objective - coef * (1.0 + e.feas.violation)
                }
            }
        }
    };

    let mut pop: Vec<Vec<f64>> = (0..spec.population)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect())
        .collect();
    let mut evaluated = evaluate(pop);

    let mut best_feasible: Option<(Vec<f64>, f64)> = None;
    let mut least_violation: (f64, Vec<f64>) = (f64::INFINITY, evaluated[0].x.clone());
    let mut history = Vec::with_capacity(spec.generations);

    for gen in 0..spec.generations {
        for e in &evaluated {
            if e.feas.feasible {
                if best_feasible.as_ref().is_none_or(|(_, v)| e.objective > *v) {
                    best_feasible = Some((e.x.clone(), e.objective));
                }
            } else if e.feas.violation < least_violation.0 {
                least_violation = (e.feas.violation, e.x.clone());
            }
        }
        if let Some((_, v)) = &best_feasible {
            history.push(*v);
        }

        // rank by fitness for elitism
        let mut order: Vec<usize> = (0..evaluated.len()).collect();
        order.sort_by(|&i, &j| fitness(&evaluated[j], gen).total_cmp(&fitness(&evaluated[i], gen)));

        let sigma_frac = 0.1 / (2f64).powi((4 * gen / spec.generations).min(3) as i32);
        let mut next: Vec<Vec<f64>> = order.iter().take(spec.elitism_count).map(|&i| evaluated[i].x.clone()).collect();

        let tournament = |rng: &mut ChaCha8Rng, evaluated: &[Evaluated]| -> usize {
            let mut best = rng.gen_range(0..evaluated.len());
            for _ in 0..2 {
                let c = rng.gen_range(0..evaluated.len());
                if fitness(&evaluated[c], gen) > fitness(&evaluated[best], gen) {
                    best = c;
                }
            }
            best
        };

        while next.len() < spec.population {
            let a = tournament(&mut rng, &evaluated);
            let b = tournament(&mut rng, &evaluated);
            let mut child: Vec<f64> = if rng.gen::<f64>() < spec.crossover_rate {
                (0..dim)
                    .map(|k| {
                        let u: f64 = rng.gen_range(-0.5..1.5);
                        evaluated[a].x[k] + u * (evaluated[b].x[k] - evaluated[a].x[k])
                    })
                    .collect()
            } else {
                evaluated[a].x.clone()
            };
            for (k, gene) in child.iter_mut().enumerate() {
                if rng.gen::<f64>() < spec.mutation_rate {
                    let (lo, hi) = bounds[k];
                    let normal: f64 = {
                        // Box-Muller on the shared stream
                        let u1: f64 = rng.gen_range(1e-12..1.0);
                        let u2: f64 = rng.gen::<f64>();
                        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                    };
                    *gene += normal * sigma_frac * (hi - lo);
                }
                let (lo, hi) = bounds[k];
                *gene = gene.clamp(lo, hi);
            }
            next.push(child);
        }
        pop = next;
        evaluated = evaluate(pop);
    }
    for e in &evaluated {
        if e.feas.feasible {
            if best_feasible.as_ref().is_none_or(|(_, v)| e.objective > *v) {
                best_feasible = Some((e.x.clone(), e.objective));
            }
        } else if e.feas.violation < least_violation.0 {
            least_violation = (e.feas.violation, e.x.clone());
        }
    }
    if let Some((_, v)) = &best_feasible {
        history.push(*v);
    }

    match best_feasible {
        Some((best_x, best_value)) => Ok(GaResult { best_x, best_value, history }),
        None => Err(SolverError::Infeasible { least_violation: least_violation.0, at: least_violation.1 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum() {
        let spec = RosenbrockSpec::on_interval(0.0, 10.0);
        let r = rosenbrock_minimize(|x| (x - 3.0) * (x - 3.0), &spec).unwrap();
        assert!((r.x - 3.0).abs() <= spec.tol, "x = {}", r.x);
    }

    #[test]
    fn kinked_minimum() {
        let spec = RosenbrockSpec::on_interval(-2.0, 5.0);
        let r = rosenbrock_minimize(|x| (x - 1.25).abs(), &spec).unwrap();
        assert!((r.x - 1.25).abs() <= spec.tol, "x = {}", r.x);
    }

    #[test]
    fn random_unimodal_family() {
        // shifted |x - a|^p for p in [1, 3] across seeded draws
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let a = rng.gen_range(0.05..0.95);
            let p = rng.gen_range(1.0..3.0);
            let spec = RosenbrockSpec::on_interval(0.0, 1.0);
            let r = rosenbrock_minimize(|x| (x - a).abs().powf(p), &spec).unwrap();
            assert!((r.x - a).abs() <= spec.tol * 2.0, "a={a} p={p} got {}", r.x);
        }
    }

    #[test]
    fn budget_error_returns_best_so_far() {
        let mut spec = RosenbrockSpec::on_interval(0.0, 1.0);
        spec.max_iters = 3;
        spec.tol = 1e-15;
        match rosenbrock_minimize(|x| (x - 0.25) * (x - 0.25), &spec) {
            Err(SolverError::MaxIterations { iters, .. }) => assert_eq!(iters, 3),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn exhaustive_grid_endpoints_and_ties() {
        assert_eq!(exhaustive_min(|x| x, (0.0, 1.0), 11), (0.0, 0.0));
        assert_eq!(exhaustive_min(|x| -x, (0.0, 1.0), 11), (1.0, -1.0));
        // constant: tie broken toward lo
        assert_eq!(exhaustive_min(|_| 4.0, (2.0, 3.0), 11), (2.0, 4.0));
    }

    #[test]
    fn ga_finds_unconstrained_bowl() {
        let spec = GaSpec { seed: 11, ..GaSpec::default() };
        let r = ga_maximize(
            |x| -((x[0] - 0.3).powi(2) + (x[1] - 0.7).powi(2)),
            |_| Feasibility::feasible(),
            &[(0.0, 1.0), (0.0, 1.0)],
            &spec,
        )
        .unwrap();
        assert!((r.best_x[0] - 0.3).abs() < 0.01, "{:?}", r.best_x);
        assert!((r.best_x[1] - 0.7).abs() < 0.01, "{:?}", r.best_x);
    }

    #[test]
    fn ga_respects_linear_constraint() {
        // optimum of the bowl projected onto x + y <= 0.5 is (0.05, 0.45)
        let spec = GaSpec { seed: 4, ..GaSpec::default() };
        let r = ga_maximize(
            |x| -((x[0] - 0.3).powi(2) + (x[1] - 0.7).powi(2)),
            |x| {
                let slack = 0.5 - (x[0] + x[1]);
                if slack >= 0.0 {
                    Feasibility::feasible()
                } else {
                    Feasibility::violated(-slack)
                }
            },
            &[(0.0, 1.0), (0.0, 1.0)],
            &spec,
        )
        .unwrap();
        assert!((r.best_x[0] - 0.05).abs() < 0.02, "{:?}", r.best_x);
        assert!((r.best_x[1] - 0.45).abs() < 0.02, "{:?}", r.best_x);
    }

    #[test]
    fn ga_history_is_monotone_and_deterministic() {
        let spec = GaSpec { seed: 21, ..GaSpec::default() };
        let run = |spec: &GaSpec| {
            ga_maximize(
                |x| -(x[0] - 0.6).powi(2),
                |_| Feasibility::feasible(),
                &[(0.0, 1.0)],
                spec,
            )
            .unwrap()
        };
        let a = run(&spec);
        let b = run(&spec);
        assert_eq!(a.best_x, b.best_x);
        assert_eq!(a.history, b.history);
        for w in a.history.windows(2) {
            assert!(w[1] >= w[0], "history not monotone: {:?}", a.history);
        }
    }

    #[test]
    fn ga_reports_infeasible_problems() {
        let spec = GaSpec { seed: 2, generations: 10, ..GaSpec::default() };
        let err = ga_maximize(
            |x| x[0],
            |x| Feasibility::violated(1.0 + x[0]),
            &[(0.0, 1.0)],
            &spec,
        )
        .unwrap_err();
        match err {
            SolverError::Infeasible { least_violation, .. } => assert!(least_violation >= 1.0),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
