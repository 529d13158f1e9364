//! The four batch commands: validate, lower-stage, equilibrium, sweep.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use covertd2d::analytics::{ph_prob, sinr_prob, DetectionModel};
use covertd2d::game::{best_response_tau, network_utility, solve_equilibrium, BestResponseCache, GameError};
use covertd2d::montecarlo::{estimate, SimWindow, Target};
use covertd2d::solvers::{ConstraintMode, GaSpec};
use covertd2d::{dbm_to_mw, mw_to_dbm, NetworkConfig, QuadratureSpec, Scheme, Strategy};

use crate::csvout::{f, CsvTable};
use crate::error::CliError;

pub fn load_config(path: Option<&Path>) -> Result<NetworkConfig, CliError> {
    match path {
        None => Ok(NetworkConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            text.parse::<NetworkConfig>().map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

/// Measurement kinds the validate command understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    SinrPs,
    PhPs,
    SinrTs,
    PhTs,
    Fa,
    Md,
}

pub const ALL_KINDS: [Kind; 6] = [Kind::SinrPs, Kind::PhPs, Kind::SinrTs, Kind::PhTs, Kind::Fa, Kind::Md];

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::SinrPs => "sinr-ps",
            Kind::PhPs => "ph-ps",
            Kind::SinrTs => "sinr-ts",
            Kind::PhTs => "ph-ts",
            Kind::Fa => "fa",
            Kind::Md => "md",
        }
    }

    pub fn parse(s: &str) -> Result<Kind, CliError> {
        ALL_KINDS
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = ALL_KINDS.iter().map(|k| k.name()).collect();
                CliError::Usage(format!("unknown kind '{s}'; valid kinds: {}", valid.join(", ")))
            })
    }
}

pub struct ValidateArgs {
    pub config: Option<PathBuf>,
    pub kinds: Vec<Kind>,
    pub trials: u64,
    pub seed: u64,
    pub ps_dbm: f64,
    pub rho_points: usize,
    pub tau_points: usize,
    pub tau_min_dbm: f64,
    pub tau_max_dbm: f64,
    pub radius: f64,
    pub out: Option<PathBuf>,
}

struct ValidationRow {
    kind: &'static str,
    param: &'static str,
    value: f64,
    analytic: f64,
    mc: f64,
    ci: f64,
    tol: f64,
    pass: bool,
}

#[allow(clippy::too_many_arguments)]
fn validation_rows(
    kinds: &[Kind],
    cfg: &NetworkConfig,
    trials: u64,
    seed: u64,
    radius: f64,
    p_s: f64,
    rho_grid: &[f64],
    tau_grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<ValidationRow>, CliError> {
    let mut jobs: Vec<(Kind, f64, u64)> = Vec::new();
    let mut point_seed = seed;
    for &kind in kinds {
        let params: &[f64] = match kind {
            Kind::Fa | Kind::Md => tau_grid,
            _ => rho_grid,
        };
        for &p in params {
            jobs.push((kind, p, point_seed));
            point_seed = point_seed.wrapping_add(1);
        }
    }
    // analytic detection curves share one model per p_s
    let det = if kinds.iter().any(|k| matches!(k, Kind::Fa | Kind::Md)) {
        Some(DetectionModel::new(p_s, cfg, quad)?)
    } else {
        None
    };
    let rows: Result<Vec<ValidationRow>, CliError> = jobs
        .par_iter()
        .map(|&(kind, param, pseed)| {
            let (target, analytic, pname): (Target, f64, &'static str) = match kind {
                Kind::SinrPs => {
                    let s = Strategy::new(Scheme::Ps, p_s, param);
                    (Target::Sinr(s), sinr_prob(&s, cfg)?, "rho")
                }
                Kind::PhPs => {
                    let s = Strategy::new(Scheme::Ps, p_s, param);
                    (Target::Ph(s), ph_prob(&s, cfg, quad)?, "rho")
                }
                Kind::SinrTs => {
                    let s = Strategy::new(Scheme::Ts, p_s, param);
                    (Target::Sinr(s), sinr_prob(&s, cfg)?, "rho")
                }
                Kind::PhTs => {
                    let s = Strategy::new(Scheme::Ts, p_s, param);
                    (Target::Ph(s), ph_prob(&s, cfg, quad)?, "rho")
                }
                Kind::Fa => (
                    Target::Fa { p_s, tau: param },
                    det.as_ref().expect("model").fa_prob(param),
                    "tau_mw",
                ),
                Kind::Md => (
                    Target::Md { p_s, tau: param },
                    det.as_ref().expect("model").md_prob(param),
                    "tau_mw",
                ),
            };
            let mc = estimate(&target, cfg, &SimWindow::new(radius, trials, pseed))
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let tol = 0.02f64.max(3.0 * mc.ci_halfwidth);
            Ok(ValidationRow {
                kind: kind.name(),
                param: pname,
                value: param,
                analytic,
                mc: mc.value,
                ci: mc.ci_halfwidth,
                tol,
                pass: (analytic - mc.value).abs() <= tol,
            })
        })
        .collect();
    rows
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let cfg = load_config(args.config.as_deref())?;
    if args.trials == 0 {
        return Err(CliError::Usage("trials must be positive".into()));
    }
    if args.rho_points < 1 || args.tau_points < 1 {
        return Err(CliError::Usage("grids need at least one point".into()));
    }
    let quad = QuadratureSpec::default();
    let p_s = dbm_to_mw(args.ps_dbm);
    let rho_grid = linear_grid(0.1, 1.0, args.rho_points);
    let tau_grid = geometric_grid(dbm_to_mw(args.tau_min_dbm), dbm_to_mw(args.tau_max_dbm), args.tau_points);
    if tau_grid[0] <= cfg.noise_adv {
        return Err(CliError::Usage(format!(
            "tau grid must start above the adversary noise floor ({} dBm)",
            mw_to_dbm(cfg.noise_adv)
        )));
    }
    let rows = validation_rows(
        &args.kinds, &cfg, args.trials, args.seed, args.radius, p_s, &rho_grid, &tau_grid, &quad,
    )?;
    let mut table = CsvTable::new(
        "validate",
        args.seed,
        &cfg,
        &["kind", "param", "value", "analytic", "mc", "ci_halfwidth", "tolerance", "pass"],
    );
    let mut failures = 0;
    for r in &rows {
        if !r.pass {
            failures += 1;
        }
        table.row(&[
            r.kind.to_string(),
            r.param.to_string(),
            f(r.value),
            f(r.analytic),
            f(r.mc),
            f(r.ci),
            f(r.tol),
            (r.pass as u8).to_string(),
        ]);
    }
    table.write(args.out.as_deref())?;
    if failures > 0 {
        return Err(CliError::ValidationFailed { failures, total: rows.len() });
    }
    Ok(())
}

pub struct LowerStageArgs {
    pub config: Option<PathBuf>,
    pub ps_dbm: f64,
    pub grid: usize,
    pub tau_min_dbm: f64,
    pub tau_max_dbm: f64,
    pub out: Option<PathBuf>,
}

pub fn cmd_lower_stage(args: &LowerStageArgs) -> Result<(), CliError> {
    let cfg = load_config(args.config.as_deref())?;
    if args.grid < 2 {
        return Err(CliError::Usage("grid needs at least two points".into()));
    }
    let quad = QuadratureSpec::default();
    let p_s = dbm_to_mw(args.ps_dbm);
    let tau_lo = dbm_to_mw(args.tau_min_dbm);
    let tau_hi = dbm_to_mw(args.tau_max_dbm);
    if tau_lo <= cfg.noise_adv {
        return Err(CliError::Usage(format!(
            "tau grid start {} mW is at or below the adversary noise floor {} mW; \
             the detection error is only defined above it",
            tau_lo, cfg.noise_adv
        )));
    }
    if !(tau_lo < tau_hi) {
        return Err(CliError::Usage("tau grid needs tau_min < tau_max".into()));
    }
    let model = DetectionModel::new(p_s, &cfg, &quad)?;
    let taus = geometric_grid(tau_lo, tau_hi, args.grid);
    let errors: Vec<f64> = taus.par_iter().map(|&t| model.detection_error(t)).collect();

    let mut table = CsvTable::new(
        "lower-stage",
        0,
        &cfg,
        &["row", "tau_mw", "tau_dbm", "detection_error"],
    );
    for (&tau, &err) in taus.iter().zip(&errors) {
        table.row(&["grid".into(), f(tau), f(mw_to_dbm(tau)), f(err)]);
    }
    let (gx, gf) = {
        let mut best = (taus[0], errors[0]);
        for (&t, &e) in taus.iter().zip(&errors) {
            if e < best.1 {
                best = (t, e);
            }
        }
        best
    };
    table.row(&["grid_argmin".into(), f(gx), f(mw_to_dbm(gx)), f(gf)]);
    let sol = best_response_tau(p_s, &cfg, &quad)?;
    table.row(&["optimum".into(), f(sol.tau_star), f(mw_to_dbm(sol.tau_star)), f(sol.error_star)]);
    table.write(args.out.as_deref())?;
    Ok(())
}

pub struct EquilibriumArgs {
    pub config: Option<PathBuf>,
    pub scheme: Scheme,
    pub seed: u64,
    pub population: usize,
    pub generations: usize,
    pub adaptive_penalty: bool,
    pub out: Option<PathBuf>,
    pub surface: Option<PathBuf>,
    pub surface_grid: usize,
}

pub fn cmd_equilibrium(args: &EquilibriumArgs) -> Result<(), CliError> {
    let cfg = load_config(args.config.as_deref())?;
    cfg.validated().map_err(|e| CliError::Usage(e.to_string()))?;
    let quad = QuadratureSpec::default();
    let ga = GaSpec {
        population: args.population,
        generations: args.generations,
        seed: args.seed,
        constraint_mode: if args.adaptive_penalty {
            ConstraintMode::AdaptivePenalty
        } else {
            ConstraintMode::DeathPenalty
        },
        ..GaSpec::default()
    };
    if let Some(surface) = &args.surface {
        write_surface(&cfg, args.scheme, args.surface_grid, args.seed, surface, &quad)?;
    }
    let columns = [
        "status", "scheme", "p_s_mw", "p_s_dbm", "rho", "utility", "p_sinr", "p_ph", "tau_star_mw",
        "error_star", "slack_power", "slack_covert",
    ];
    let mut table = CsvTable::new("equilibrium", args.seed, &cfg, &columns);
    match solve_equilibrium(args.scheme, &cfg, &ga, &quad) {
        Ok(eq) => {
            table.row(&[
                "ok".into(),
                args.scheme.as_str().into(),
                f(eq.strategy.p_s),
                f(mw_to_dbm(eq.strategy.p_s)),
                f(eq.strategy.rho),
                f(eq.utility),
                f(eq.p_sinr),
                f(eq.p_ph),
                f(eq.lower.tau_star),
                f(eq.lower.error_star),
                f(eq.slack_power),
                f(eq.slack_covert),
            ]);
            table.write(args.out.as_deref())?;
            Ok(())
        }
        Err(GameError::Infeasible { scheme, strategy, slack_power, slack_covert }) => {
            table.row(&[
                "infeasible".into(),
                scheme.as_str().into(),
                f(strategy.p_s),
                f(mw_to_dbm(strategy.p_s)),
                f(strategy.rho),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                f(slack_power),
                f(slack_covert),
            ]);
            table.write(args.out.as_deref())?;
            Err(CliError::Infeasible(format!(
                "no feasible strategy for scheme {}; least-violating p_s={:.4} mW rho={:.4} \
                 (slack_power={:.4}, slack_covert={:.5})",
                scheme.as_str(),
                strategy.p_s,
                strategy.rho,
                slack_power,
                slack_covert
            )))
        }
        Err(e) => Err(e.into()),
    }
}

/// Utility surface over (p_s, rho) with feasibility flags; reproduces the
/// equilibrium landscape plots.
fn write_surface(
    cfg: &NetworkConfig,
    scheme: Scheme,
    n: usize,
    seed: u64,
    path: &Path,
    quad: &QuadratureSpec,
) -> Result<(), CliError> {
    let cache = BestResponseCache::new();
    let ps_grid = geometric_grid(cfg.ps_min, cfg.ps_max, n);
    let rho_grid = linear_grid(cfg.rho_min, 1.0, n);
    let mut table = CsvTable::new("equilibrium-surface", seed, cfg, &["p_s_mw", "rho", "utility", "feasible"]);
    // covert slack depends only on p_s; precompute per column (parallel)
    let covert_ok: Vec<bool> = ps_grid
        .par_iter()
        .map(|&p| {
            cache
                .get_or_compute(p, cfg, quad)
                .map(|l| l.error_star >= 1.0 - cfg.eps_covert)
                .unwrap_or(false)
        })
        .collect();
    for (i, &p_s) in ps_grid.iter().enumerate() {
        for &rho in &rho_grid {
            let s = Strategy::new(scheme, p_s, rho);
            let u = network_utility(&s, cfg)?;
            let feasible = covert_ok[i] && ph_prob(&s, cfg, quad)? >= 1.0 - cfg.eps_power;
            table.row(&[f(p_s), f(rho), f(u), (feasible as u8).to_string()]);
        }
    }
    table.write(Some(path))?;
    Ok(())
}

/// One parsed sweep specification.
pub struct SweepSpec {
    pub field: String,
    pub values: Vec<f64>,
    pub task: SweepTask,
    pub schemes: Vec<Scheme>,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub trials: u64,
    pub seed: u64,
    pub ps_dbm: f64,
    pub rho: f64,
    pub tau_mw: f64,
    pub population: usize,
    pub generations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepTask {
    Equilibrium,
    LowerStage,
    Validate,
}

pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec, CliError> {
    let mut spec = SweepSpec {
        field: String::new(),
        values: Vec::new(),
        task: SweepTask::Equilibrium,
        schemes: vec![Scheme::Ps, Scheme::Ts],
        config: None,
        out: None,
        trials: 20_000,
        seed: 1,
        ps_dbm: 10.0,
        rho: 0.5,
        tau_mw: 1.0,
        population: 48,
        generations: 80,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, val)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("sweep spec line {}: expected key = value", i + 1)));
        };
        let (key, val) = (key.trim(), val.trim());
        let parse_f64 = |v: &str| -> Result<f64, CliError> {
            v.parse().map_err(|e| CliError::Usage(format!("sweep spec line {}: {e}", i + 1)))
        };
        match key {
            "field" => spec.field = val.to_string(),
            "values" => {
                spec.values = val
                    .split(',')
                    .map(|v| parse_f64(v.trim()))
                    .collect::<Result<Vec<f64>, CliError>>()?;
            }
            "task" => {
                spec.task = match val {
                    "equilibrium" => SweepTask::Equilibrium,
                    "lower-stage" => SweepTask::LowerStage,
                    "validate" => SweepTask::Validate,
                    other => {
                        return Err(CliError::Usage(format!(
                            "unknown task '{other}' (expected equilibrium, lower-stage, or validate)"
                        )))
                    }
                }
            }
            "scheme" => {
                spec.schemes = match val {
                    "both" => vec![Scheme::Ps, Scheme::Ts],
                    one => vec![one.parse().map_err(CliError::Usage)?],
                }
            }
            "config" => spec.config = Some(PathBuf::from(val)),
            "out" => spec.out = Some(PathBuf::from(val)),
            "trials" => spec.trials = parse_f64(val)? as u64,
            "seed" => spec.seed = parse_f64(val)? as u64,
            "ps_dbm" => spec.ps_dbm = parse_f64(val)?,
            "rho" => spec.rho = parse_f64(val)?,
            "tau_mw" => spec.tau_mw = parse_f64(val)?,
            "population" => spec.population = parse_f64(val)? as usize,
            "generations" => spec.generations = parse_f64(val)? as usize,
            other => return Err(CliError::Usage(format!("unknown sweep spec key '{other}'"))),
        }
    }
    if spec.field.is_empty() {
        return Err(CliError::Usage("sweep spec needs a 'field' entry".into()));
    }
    if spec.values.is_empty() {
        return Err(CliError::Usage("sweep spec needs a nonempty 'values' list".into()));
    }
    Ok(spec)
}

pub fn cmd_sweep(spec_path: &Path, out_override: Option<&Path>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(spec_path)?;
    let spec = parse_sweep_spec(&text)?;
    let base = load_config(spec.config.as_deref())?;
    let out = out_override.or(spec.out.as_deref());
    let quad = QuadratureSpec::default();

    // the swept field is either a config field or a probe-strategy field
    // (p_s / rho, for the tasks that evaluate a fixed strategy)
    let strategy_field = matches!(spec.field.as_str(), "p_s_dbm" | "p_s_mw" | "rho");
    if strategy_field && spec.task == SweepTask::Equilibrium {
        return Err(CliError::Usage(format!(
            "field '{}' belongs to the strategy, which the equilibrium task optimizes; sweep a config field instead",
            spec.field
        )));
    }

    // one (probe power, rho, config) triple per swept value
    let mut configs: Vec<(f64, f64, f64, NetworkConfig)> = Vec::with_capacity(spec.values.len());
    for &v in &spec.values {
        let mut cfg = base.clone();
        let mut ps = dbm_to_mw(spec.ps_dbm);
        let mut rho = spec.rho;
        match spec.field.as_str() {
            "p_s_dbm" => ps = dbm_to_mw(v),
            "p_s_mw" => ps = v,
            "rho" => rho = v,
            field => {
                cfg.set_field(field, v).map_err(|e| CliError::Usage(e.to_string()))?;
            }
        }
        cfg.validated().map_err(|e| CliError::Usage(e.to_string()))?;
        if !(ps > 0.0) || !(0.0..=1.0).contains(&rho) {
            return Err(CliError::Usage(format!("swept strategy value {v} is out of range")));
        }
        configs.push((v, ps, rho, cfg));
    }

    match spec.task {
        SweepTask::Equilibrium => {
            let jobs: Vec<(usize, f64, &NetworkConfig, Scheme)> = configs
                .iter()
                .flat_map(|(v, _, _, cfg)| spec.schemes.iter().map(move |&s| (*v, cfg, s)))
                .enumerate()
                .map(|(i, (v, cfg, s))| (i, v, cfg, s))
                .collect();
            let results: Vec<(usize, Result<covertd2d::game::EquilibriumResult, GameError>)> = jobs
                .par_iter()
                .map(|&(i, _, cfg, scheme)| {
                    let ga = GaSpec {
                        population: spec.population,
                        generations: spec.generations,
                        seed: spec.seed.wrapping_add(1000 * i as u64),
                        ..GaSpec::default()
                    };
                    (i, solve_equilibrium(scheme, cfg, &ga, &quad))
                })
                .collect();
            let mut table = CsvTable::new(
                "sweep",
                spec.seed,
                &base,
                &[
                    "field", "value", "scheme", "status", "p_s_mw", "rho", "utility", "slack_power",
                    "slack_covert",
                ],
            );
            let mut sorted = results;
            sorted.sort_by_key(|(i, _)| *i);
            for ((i, res), &(_, v, _, scheme)) in sorted.iter().zip(&jobs) {
                debug_assert_eq!(*i, jobs[*i].0);
                match res {
                    Ok(eq) => table.row(&[
                        spec.field.clone(),
                        f(v),
                        scheme.as_str().into(),
                        "ok".into(),
                        f(eq.strategy.p_s),
                        f(eq.strategy.rho),
                        f(eq.utility),
                        f(eq.slack_power),
                        f(eq.slack_covert),
                    ]),
                    Err(GameError::Infeasible { strategy, slack_power, slack_covert, .. }) => {
                        table.row(&[
                            spec.field.clone(),
                            f(v),
                            scheme.as_str().into(),
                            "infeasible".into(),
                            f(strategy.p_s),
                            f(strategy.rho),
                            String::new(),
                            f(*slack_power),
                            f(*slack_covert),
                        ])
                    }
                    Err(e) => return Err(CliError::from(e.clone())),
                }
            }
            table.write(out)?;
            Ok(())
        }
        SweepTask::LowerStage => {
            let results: Vec<Result<(f64, f64), GameError>> = configs
                .par_iter()
                .map(|(_, ps, _, cfg)| {
                    best_response_tau(*ps, cfg, &quad).map(|l| (l.tau_star, l.error_star))
                })
                .collect();
            let mut table = CsvTable::new(
                "sweep",
                spec.seed,
                &base,
                &["field", "value", "tau_star_mw", "error_star"],
            );
            for ((v, _, _, _), res) in configs.iter().zip(results) {
                let (tau, err) = res.map_err(CliError::from)?;
                table.row(&[spec.field.clone(), f(*v), f(tau), f(err)]);
            }
            table.write(out)?;
            Ok(())
        }
        SweepTask::Validate => {
            let mut table = CsvTable::new(
                "sweep",
                spec.seed,
                &base,
                &["field", "value", "kind", "analytic", "mc", "ci_halfwidth", "pass"],
            );
            let mut failures = 0usize;
            let mut total = 0usize;
            let rows: Vec<Vec<ValidationRow>> = configs
                .par_iter()
                .enumerate()
                .map(|(i, (_, ps, rho, cfg))| {
                    let rho = [*rho];
                    let tau = [spec.tau_mw];
                    validation_rows(
                        &ALL_KINDS,
                        cfg,
                        spec.trials,
                        spec.seed.wrapping_add(1000 * i as u64),
                        SimWindow::default().radius,
                        *ps,
                        &rho,
                        &tau,
                        &quad,
                    )
                })
                .collect::<Result<_, CliError>>()?;
            for ((v, _, _, _), point_rows) in configs.iter().zip(rows) {
                for r in point_rows {
                    total += 1;
                    if !r.pass {
                        failures += 1;
                    }
                    table.row(&[
                        spec.field.clone(),
                        f(*v),
                        r.kind.to_string(),
                        f(r.analytic),
                        f(r.mc),
                        f(r.ci),
                        (r.pass as u8).to_string(),
                    ]);
                }
            }
            table.write(out)?;
            if failures > 0 {
                return Err(CliError::ValidationFailed { failures, total });
            }
            Ok(())
        }
    }
}

pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo * (hi / lo).powf(i as f64 / (n - 1) as f64) })
        .collect()
}
