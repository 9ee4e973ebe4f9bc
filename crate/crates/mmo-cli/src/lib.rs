//! Experiment harness: config parsing, the Monte Carlo sweeps, CSV output
//! and the CLI-level verification checks.
//!
//! Every sweep is deterministic for a fixed seed: trial t of SNR point s
//! draws its channels from `base_seed + (s·trials + t)·hops + hop_index`,
//! and aggregation is a sequential sum, so rerunning a config reproduces the
//! output byte for byte.

use mmo::bench::{self, IterConfig};
use mmo::channel::{self, ExpCorrModel};
use mmo::linalg::{self, CMatrix, EigOrder};
use mmo::mmop::{self, BoundMode, ProblemSpec};
use mmo::multihop::{self, Hop};
use mmo::objectives::{self, AllocationRule, ObjectiveCase, ScalarObjective};
use mmo::verify::{CheckResult, VerifyReport};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config:\n{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("experiment failed: {0}")]
    Run(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    BoundGap,
    SumMseCompare,
    MultiHopCapacity,
    MultiHopMaxMse,
    Solve,
}

/// Parsed experiment configuration with all defaults applied.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub alpha_t: f64,
    pub beta_r: f64,
    pub sigma_e2: f64,
    pub n_t: usize,
    pub n_r: usize,
    pub snr_db_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub hops: usize,
    pub objective: &'static ScalarObjective,
    pub mode: BoundMode,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let objective = match experiment {
            Experiment::MultiHopCapacity => "capacity",
            Experiment::MultiHopMaxMse => "max-mse",
            _ => "sum-mse",
        };
        Self {
            experiment,
            alpha_t: 0.45,
            beta_r: 0.45,
            sigma_e2: 0.01,
            n_t: 4,
            n_r: 4,
            snr_db_grid: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials: 500,
            seed: 42,
            hops: 3,
            objective: objectives::lookup_objective(objective).unwrap(),
            mode: BoundMode::Lower,
            output_path: None,
        }
    }

    pub fn model(&self) -> Result<ExpCorrModel, CliError> {
        ExpCorrModel::new(self.alpha_t, self.beta_r, self.sigma_e2, self.n_t, self.n_r)
            .map_err(|e| CliError::Run(e.to_string()))
    }
}

/// One output row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub snr_db: f64,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

fn parse_snr_grid(text: &str) -> Result<Vec<f64>, String> {
    let grid: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("snr grid {text:?}: want start:step:stop"));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| format!("bad snr start {:?}", parts[0]))?;
        let step: f64 = parts[1].trim().parse().map_err(|_| format!("bad snr step {:?}", parts[1]))?;
        let stop: f64 = parts[2].trim().parse().map_err(|_| format!("bad snr stop {:?}", parts[2]))?;
        if step <= 0.0 || stop < start {
            return Err(format!("snr grid {text:?} is not increasing"));
        }
        let mut v = Vec::new();
        let mut x = start;
        while x <= stop + 1e-9 {
            v.push(x);
            x += step;
        }
        v
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad snr value {s:?}")))
            .collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err("snr grid is empty".into());
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err("snr grid must be strictly increasing".into());
        }
    }
    Ok(grid)
}

/// Parse a line-oriented `key = value` config file. Unknown keys are
/// rejected and every invalid field is reported at once. `MMO_SEED`
/// overrides the seed.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, CliError> {
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    let mut errors: Vec<String> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().to_string();
                if fields.insert(key.clone(), v.trim().to_string()).is_some() {
                    errors.push(format!("line {}: duplicate key {key:?}", lineno + 1));
                }
            }
            None => errors.push(format!("line {}: expected `key = value`, got {line:?}", lineno + 1)),
        }
    }

    let experiment = match fields.remove("experiment").as_deref() {
        Some("bound-gap") => Some(Experiment::BoundGap),
        Some("sum-mse-compare") => Some(Experiment::SumMseCompare),
        Some("multihop-capacity") => Some(Experiment::MultiHopCapacity),
        Some("multihop-max-mse") => Some(Experiment::MultiHopMaxMse),
        Some("solve") => Some(Experiment::Solve),
        Some(other) => {
            errors.push(format!(
                "experiment: unknown value {other:?} (want bound-gap | sum-mse-compare | multihop-capacity | multihop-max-mse | solve)"
            ));
            None
        }
        None => {
            errors.push("experiment: missing required field".into());
            None
        }
    };
    let mut cfg = ExperimentConfig::defaults(experiment.unwrap_or(Experiment::Solve));

    macro_rules! take {
        ($key:literal, $slot:expr, $parse:expr) => {
            if let Some(v) = fields.remove($key) {
                match $parse(v.as_str()) {
                    Ok(parsed) => $slot = parsed,
                    Err(e) => errors.push(format!("{}: {e}", $key)),
                }
            }
        };
    }
    let parse_f64 = |s: &str| s.parse::<f64>().map_err(|_| format!("not a number: {s:?}"));
    let parse_usize = |s: &str| s.parse::<usize>().map_err(|_| format!("not a count: {s:?}"));
    let parse_u64 = |s: &str| s.parse::<u64>().map_err(|_| format!("not an integer: {s:?}"));

    take!("alpha_t", cfg.alpha_t, parse_f64);
    take!("beta_r", cfg.beta_r, parse_f64);
    take!("sigma_e2", cfg.sigma_e2, parse_f64);
    take!("n_t", cfg.n_t, parse_usize);
    take!("n_r", cfg.n_r, parse_usize);
    take!("snr_db", cfg.snr_db_grid, parse_snr_grid);
    take!("trials", cfg.trials, parse_usize);
    take!("seed", cfg.seed, parse_u64);
    take!("hops", cfg.hops, parse_usize);
    take!("mode", cfg.mode, |s: &str| match s {
        "exact" => Ok(BoundMode::Exact),
        "lower" => Ok(BoundMode::Lower),
        "upper" => Ok(BoundMode::Upper),
        other => Err(format!("unknown mode {other:?} (want exact | lower | upper)")),
    });
    take!("objective", cfg.objective, |s: &str| objectives::lookup_objective(s)
        .map_err(|e| e.to_string()));
    take!("out", cfg.output_path, |s: &str| Ok::<_, String>(Some(PathBuf::from(s))));

    for key in fields.keys() {
        errors.push(format!("{key}: unknown key"));
    }
    if cfg.trials == 0 {
        errors.push("trials: must be at least 1".into());
    }
    if !(0.0..1.0).contains(&cfg.alpha_t) {
        errors.push(format!("alpha_t: {} outside [0, 1)", cfg.alpha_t));
    }
    if !(0.0..1.0).contains(&cfg.beta_r) {
        errors.push(format!("beta_r: {} outside [0, 1)", cfg.beta_r));
    }
    if !(cfg.sigma_e2 > 0.0 && cfg.sigma_e2 < 1.0) {
        errors.push(format!("sigma_e2: {} outside (0, 1)", cfg.sigma_e2));
    }
    if cfg.hops == 0 {
        errors.push("hops: must be at least 1".into());
    }
    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }
    if let Ok(seed) = std::env::var("MMO_SEED") {
        cfg.seed = seed
            .parse()
            .map_err(|_| CliError::Config(vec![format!("MMO_SEED: not an integer: {seed:?}")]))?;
    }
    Ok(cfg)
}

/// Seed for (SNR index, trial, hop) under a config.
fn draw_seed(cfg: &ExperimentConfig, snr_idx: usize, trial: usize, hop: usize, n_hops: usize) -> u64 {
    let global = (snr_idx * cfg.trials + trial) as u64;
    cfg.seed.wrapping_add(global.wrapping_mul(n_hops as u64)).wrapping_add(hop as u64)
}

struct Accumulator {
    sums: BTreeMap<String, (f64, f64, usize)>,
    order: Vec<String>,
}

impl Accumulator {
    fn new() -> Self {
        Self { sums: BTreeMap::new(), order: Vec::new() }
    }

    fn push(&mut self, metric: &str, value: f64) {
        if !self.sums.contains_key(metric) {
            self.order.push(metric.to_string());
        }
        let e = self.sums.entry(metric.to_string()).or_insert((0.0, 0.0, 0));
        e.0 += value;
        e.1 += value * value;
        e.2 += 1;
    }

    fn rows(&self, snr_db: f64, trials: usize, seed: u64) -> Vec<Row> {
        self.order
            .iter()
            .map(|metric| {
                let (s, s2, n) = self.sums[metric];
                let n_f = n as f64;
                let mean = s / n_f;
                let var = if n > 1 { ((s2 - s * s / n_f) / (n_f - 1.0)).max(0.0) } else { 0.0 };
                Row {
                    snr_db,
                    metric: metric.clone(),
                    mean,
                    stderr: (var / n_f).sqrt(),
                    trials,
                    seed,
                }
            })
            .collect()
    }
}

fn design_spec(cfg: &ExperimentConfig, h_bar: CMatrix, power: f64) -> Result<ProblemSpec, CliError> {
    let model = cfg.model()?;
    let (psi, sigma) = channel::build_correlations(&model);
    let n = h_bar.nrows().min(h_bar.ncols());
    ProblemSpec::new(h_bar, psi, sigma, 1.0, power, ObjectiveCase::sum_mse(n))
        .map_err(|e| CliError::Run(e.to_string()))
}

fn solve_with_rule(
    spec: &ProblemSpec,
    mode: BoundMode,
    rule: AllocationRule,
) -> Result<mmop::PrecoderSolution, CliError> {
    let basis = mmop::reduce_to_mmop(spec, mode).map_err(|e| CliError::Run(e.to_string()))?;
    let f_sq = objectives::allocate(rule, &basis.gains(), spec.power)
        .map_err(|e| CliError::Run(e.to_string()))?;
    mmop::assemble_solution(&basis, &spec.psi, spec.noise_var, &f_sq, mode)
        .map_err(|e| CliError::Run(e.to_string()))
}

fn true_sum_mse(f: &CMatrix, spec: &ProblemSpec) -> Result<f64, CliError> {
    let eigs = mmop::true_eigenvalues(f, spec).map_err(|e| CliError::Run(e.to_string()))?;
    Ok(eigs.iter().map(|&l| 1.0 / (1.0 + l)).sum())
}

fn run_bound_gap(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let model = cfg.model()?;
    let mut rows = Vec::new();
    for (si, &snr_db) in cfg.snr_db_grid.iter().enumerate() {
        let power = channel::snr_db_to_linear(snr_db);
        let mut acc = Accumulator::new();
        for t in 0..cfg.trials {
            let draw = channel::sample_channel(&model, draw_seed(cfg, si, t, 0, 1));
            let spec = design_spec(cfg, draw.h_bar, power)?;
            let lo = solve_with_rule(&spec, BoundMode::Lower, cfg.objective.alloc)?;
            let up = solve_with_rule(&spec, BoundMode::Upper, cfg.objective.alloc)?;
            let b_lo = lo.bound_eigenvalues();
            let b_up = up.bound_eigenvalues();
            let mut mse_gap = 0.0;
            for (n, (l, u)) in b_lo.iter().zip(&b_up).enumerate() {
                acc.push(&format!("eig{}_lower", n + 1), *l);
                acc.push(&format!("eig{}_upper", n + 1), *u);
                mse_gap += 1.0 / (1.0 + l) - 1.0 / (1.0 + u);
            }
            acc.push("mse_scale_gap", mse_gap / b_lo.len() as f64);
            acc.push("summse_true_lower", true_sum_mse(&lo.f_opt, &spec)?);
            acc.push("summse_true_upper", true_sum_mse(&up.f_opt, &spec)?);
        }
        rows.extend(acc.rows(snr_db, cfg.trials, cfg.seed));
    }
    Ok(rows)
}

fn run_sum_mse_compare(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let model = cfg.model()?;
    let mut rows = Vec::new();
    for (si, &snr_db) in cfg.snr_db_grid.iter().enumerate() {
        let power = channel::snr_db_to_linear(snr_db);
        let mut acc = Accumulator::new();
        for t in 0..cfg.trials {
            let draw = channel::sample_channel(&model, draw_seed(cfg, si, t, 0, 1));
            let spec = design_spec(cfg, draw.h_bar, power)?;
            let lo = solve_with_rule(&spec, BoundMode::Lower, AllocationRule::SumMseWaterfill)?;
            let up = solve_with_rule(&spec, BoundMode::Upper, AllocationRule::SumMseWaterfill)?;
            acc.push("summse_lower", true_sum_mse(&lo.f_opt, &spec)?);
            acc.push("summse_upper", true_sum_mse(&up.f_opt, &spec)?);
            let out = bench::iterative_lmmse(&spec, &IterConfig::default())
                .map_err(|e| CliError::Run(e.to_string()))?;
            acc.push("summse_iterative", *out.trace.last().unwrap());
            acc.push("iterations", (out.trace.len() - 1) as f64);
        }
        rows.extend(acc.rows(snr_db, cfg.trials, cfg.seed));
    }
    Ok(rows)
}

struct ChainDesign {
    precoders: Vec<CMatrix>,
    rotations: Vec<CMatrix>,
}

fn design_chain(
    hops: &[Hop],
    mode: BoundMode,
    objective: &ScalarObjective,
    perceived_perfect: bool,
) -> Result<ChainDesign, CliError> {
    let mut sols = Vec::with_capacity(hops.len());
    for hop in hops {
        let design_hop = if perceived_perfect {
            Hop {
                h: hop.h.clone(),
                psi: CMatrix::zeros(hop.psi.nrows(), hop.psi.ncols()),
                sigma: linalg::identity(hop.sigma.nrows()),
                noise_var: hop.noise_var,
                power: hop.power,
            }
        } else {
            hop.clone()
        };
        let mode = if perceived_perfect { BoundMode::Exact } else { mode };
        sols.push(
            multihop::solve_hop_with_rule(&design_hop, mode, objective.alloc)
                .map_err(|e| CliError::Run(e.to_string()))?,
        );
    }
    // Rotations come from the composites as the designer perceives them.
    let rotations = multihop::chain_rotations(&sols, objective.family, objective.kind)
        .map_err(|e| CliError::Run(e.to_string()))?;
    Ok(ChainDesign { precoders: sols.into_iter().map(|s| s.f_k).collect(), rotations })
}

fn chain_metric(
    hops: &[Hop],
    design: &ChainDesign,
    objective: &ScalarObjective,
) -> Result<f64, CliError> {
    let e = multihop::evaluate_chain_mse(hops, &design.precoders, &design.rotations)
        .map_err(|e| CliError::Run(e.to_string()))?;
    Ok(match objective.name {
        "capacity" => {
            let eigs = linalg::herm_eig(&e, EigOrder::Descending)
                .map_err(|er| CliError::Run(er.to_string()))?
                .eigenvalues;
            -eigs.iter().map(|&v| v.max(1e-300).log2()).sum::<f64>()
        }
        "max-mse" => (0..e.nrows()).map(|i| e[(i, i)].re).fold(f64::MIN, f64::max),
        other => return Err(CliError::Run(format!("unsupported chain metric {other:?}"))),
    })
}

fn run_multihop(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let model = cfg.model()?;
    let (psi, sigma) = channel::build_correlations(&model);
    let metric = cfg.objective.name;
    let mut rows = Vec::new();
    for (si, &snr_db) in cfg.snr_db_grid.iter().enumerate() {
        let power = channel::snr_db_to_linear(snr_db);
        let mut acc = Accumulator::new();
        for t in 0..cfg.trials {
            let hops: Vec<Hop> = (0..cfg.hops)
                .map(|k| {
                    let draw = channel::sample_channel(&model, draw_seed(cfg, si, t, k, cfg.hops));
                    Hop {
                        h: draw.h_bar,
                        psi: psi.clone(),
                        sigma: sigma.clone(),
                        noise_var: 1.0,
                        power,
                    }
                })
                .collect();
            let robust = design_chain(&hops, cfg.mode, cfg.objective, false)?;
            let naive = design_chain(&hops, cfg.mode, cfg.objective, true)?;
            let v_robust = chain_metric(&hops, &robust, cfg.objective)?;
            let v_naive = chain_metric(&hops, &naive, cfg.objective)?;
            acc.push(&format!("{metric}_robust"), v_robust);
            acc.push(&format!("{metric}_nonrobust"), v_naive);
            acc.push(&format!("{metric}_diff"), v_robust - v_naive);
        }
        rows.extend(acc.rows(snr_db, cfg.trials, cfg.seed));
    }
    Ok(rows)
}

fn run_solve(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let model = cfg.model()?;
    let snr_db = cfg.snr_db_grid[0];
    let power = channel::snr_db_to_linear(snr_db);
    let draw = channel::sample_channel(&model, cfg.seed);
    let spec = design_spec(cfg, draw.h_bar, power)?;
    let sol = solve_with_rule(&spec, cfg.mode, cfg.objective.alloc)?;
    let mut rows = Vec::new();
    let mut push = |metric: String, value: f64| {
        rows.push(Row { snr_db, metric, mean: value, stderr: 0.0, trials: 1, seed: cfg.seed });
    };
    for (n, s) in sol.basis.lambda_pi.iter().enumerate() {
        push(format!("lambda_pi_{}", n + 1), *s);
    }
    for (n, f) in sol.lambda_f.iter().enumerate() {
        push(format!("f_sq_{}", n + 1), f * f);
    }
    push("eta_f".into(), sol.eta_f);
    push("spent_power".into(), sol.spent_power());
    push("alpha".into(), sol.basis.alpha);
    Ok(rows)
}

/// Run one experiment, returning the aggregated table. Writes the CSV when
/// the config names an output path.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let rows = match cfg.experiment {
        Experiment::BoundGap => run_bound_gap(cfg)?,
        Experiment::SumMseCompare => run_sum_mse_compare(cfg)?,
        Experiment::MultiHopCapacity | Experiment::MultiHopMaxMse => run_multihop(cfg)?,
        Experiment::Solve => run_solve(cfg)?,
    };
    if let Some(path) = &cfg.output_path {
        write_csv(&rows, path)?;
    }
    Ok(rows)
}

/// Format a float with 12 significant digits.
fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

/// Render rows with the fixed schema `snr_db,metric,mean,stderr,trials,seed`.
pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from("snr_db,metric,mean,stderr,trials,seed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(r.snr_db),
            r.metric,
            fmt_f64(r.mean),
            fmt_f64(r.stderr),
            r.trials,
            r.seed
        );
    }
    out
}

pub fn write_csv(rows: &[Row], path: &Path) -> Result<(), CliError> {
    std::fs::write(path, to_csv(rows)).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Human-readable factor dump for the solve subcommand.
pub fn solve_report(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let rows = run_solve(cfg)?;
    let mut out = String::new();
    let _ = writeln!(out, "single-instance solution (snr_db = {}, mode = {:?}):", rows[0].snr_db, cfg.mode);
    for r in &rows {
        let _ = writeln!(out, "  {:<14} {:.9}", r.metric, r.mean);
    }
    Ok(out)
}

/// CLI-level checks appended to the library invariant suite by `mmo verify`:
/// byte-identical reruns and the 1/√trials standard-error scaling.
pub fn cli_checks(seed: u64) -> Vec<CheckResult> {
    let mut checks = Vec::new();

    let mut small = ExperimentConfig::defaults(Experiment::BoundGap);
    small.trials = 25;
    small.seed = seed;
    small.snr_db_grid = vec![5.0, 15.0];
    let repro = match (run(&small), run(&small)) {
        (Ok(a), Ok(b)) => {
            if to_csv(&a) == to_csv(&b) {
                (true, "identical config and seed reproduce identical bytes".to_string())
            } else {
                (false, "rerun produced different CSV bytes".to_string())
            }
        }
        (Err(e), _) | (_, Err(e)) => (false, format!("run failed: {e}")),
    };
    checks.push(CheckResult { name: "cli.reproducibility", passed: repro.0, detail: repro.1 });

    let mut cell = ExperimentConfig::defaults(Experiment::BoundGap);
    cell.seed = seed;
    cell.snr_db_grid = vec![10.0];
    let stderr_of = |trials: usize| -> Result<f64, CliError> {
        let mut c = cell.clone();
        c.trials = trials;
        let rows = run(&c)?;
        Ok(rows
            .iter()
            .find(|r| r.metric == "summse_true_lower")
            .map(|r| r.stderr)
            .unwrap_or(f64::NAN))
    };
    let scaling = match (stderr_of(100), stderr_of(400)) {
        (Ok(s100), Ok(s400)) if s400 > 0.0 => {
            let ratio = s100 / s400;
            if (1.4..=2.8).contains(&ratio) {
                (true, format!("stderr ratio 100→400 trials is {ratio:.2} (≈2 expected)"))
            } else {
                (false, format!("stderr ratio {ratio:.2} outside [1.4, 2.8]"))
            }
        }
        (Err(e), _) | (_, Err(e)) => (false, format!("run failed: {e}")),
        _ => (false, "degenerate standard error".into()),
    };
    checks.push(CheckResult { name: "cli.stderr_scaling", passed: scaling.0, detail: scaling.1 });
    checks
}

/// Library invariant suite plus the CLI-level checks.
pub fn full_verify(seed: u64) -> VerifyReport {
    let mut report = mmo::verify::run_verify(seed);
    report.checks.extend(cli_checks(seed));
    report
}
