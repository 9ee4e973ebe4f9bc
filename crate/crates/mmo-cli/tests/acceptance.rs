//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test -p mmo-cli --test acceptance -- --nocapture` to see
//! the per-criterion lines and timings.

use mmo::linalg::{self, CMatrix};
use mmo::mmop::{self, BoundMode, ProblemSpec, WaterfillInput};
use mmo::multihop;
use mmo::objectives::{self, ObjectiveCase, SchurKind};
use mmo::unitary::{self, middle};
use mmo_cli::{run, Experiment, ExperimentConfig, Row};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

type MiddleFn = fn(&CMatrix, &CMatrix, &CMatrix) -> f64;
type CaseMaker = Box<dyn Fn(&mut ChaCha8Rng) -> ObjectiveCase>;

fn criterion(n: u32, title: &str, f: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    match f() {
        Ok(detail) => {
            println!("ACCEPTANCE {n} ({title}): PASS — {detail} [{:.1?}]", start.elapsed());
        }
        Err(msg) => {
            println!("ACCEPTANCE {n} ({title}): FAIL — {msg} [{:.1?}]", start.elapsed());
            panic!("criterion {n} failed: {msg}");
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weights satisfying the ordering constraint for the given gains:
/// √(w_n g_n) is drawn descending, so w_n = t_n²/g_n.
fn admissible_weights(gains: &[f64], r: &mut ChaCha8Rng) -> Vec<f64> {
    let mut targets: Vec<f64> = gains.iter().map(|_| r.gen_range(0.2..1.0)).collect();
    targets.sort_by(|a, b| b.total_cmp(a));
    gains
        .iter()
        .zip(&targets)
        .map(|(&g, &t)| if g > 1e-12 { t * t / g } else { 1.0 })
        .collect()
}

#[test]
fn acceptance_1_pareto_oracle_equivalence() {
    criterion(1, "Pareto oracle equivalence", || {
        let mut r = rng(1001);
        let mut worst_margin = f64::NEG_INFINITY;
        for i in 0..50 {
            let h = linalg::complex_gaussian(2, 2, &mut r);
            let psi = linalg::random_psd(2, 0.05, &mut r).scale(0.1);
            let spec = ProblemSpec::new(
                h,
                psi,
                linalg::identity(2),
                1.0,
                2.0,
                ObjectiveCase::sum_mse(2),
            )
            .map_err(|e| e.to_string())?;
            let basis = mmop::reduce_to_mmop(&spec, BoundMode::Exact).map_err(|e| e.to_string())?;
            let weights = admissible_weights(&basis.gains(), &mut r);
            let sol = mmop::solve(&spec, BoundMode::Exact, &weights).map_err(|e| e.to_string())?;
            let mine = mmop::true_eigenvalues(&sol.f_opt, &spec).map_err(|e| e.to_string())?;
            let points = mmop::pareto_oracle(&spec, BoundMode::Exact, 200).map_err(|e| e.to_string())?;
            for p in &points {
                let margin = p
                    .eigenvalues
                    .iter()
                    .zip(&mine)
                    .map(|(g, m)| g - m)
                    .fold(f64::INFINITY, f64::min);
                worst_margin = worst_margin.max(margin);
                if margin > 1e-6 {
                    return Err(format!(
                        "instance {i}: allocation {:?} dominates by {margin:.2e}",
                        p.allocation
                    ));
                }
            }
        }
        Ok(format!(
            "50 instances non-dominated on the 200-per-axis grid (worst margin {worst_margin:.2e})"
        ))
    });
}

#[test]
fn acceptance_2_waterfill_kkt() {
    criterion(2, "water-filling KKT", || {
        let mut r = rng(1002);
        for i in 0..1000 {
            let n = r.gen_range(1..=6);
            let mut gains: Vec<f64> = (0..n).map(|_| r.gen_range(0.05..4.0)).collect();
            gains.sort_by(|a, b| b.total_cmp(a));
            if n >= 3 && r.gen_bool(0.3) {
                let len = gains.len();
                gains[len - 1] = 0.0;
            }
            if gains.iter().all(|&g| g <= 0.0) {
                continue;
            }
            let weights = admissible_weights(&gains, &mut r);
            let power = r.gen_range(0.1..50.0);
            let input = WaterfillInput::new(gains.clone(), weights.clone(), power)
                .map_err(|e| format!("instance {i}: {e}"))?;
            let (f_sq, mu) = mmop::waterfill(&input).map_err(|e| format!("instance {i}: {e}"))?;
            let total: f64 = f_sq.iter().sum();
            if (total - power).abs() > 1e-10 * power {
                return Err(format!("instance {i}: power {total} vs {power}"));
            }
            let g_max = gains.iter().cloned().fold(0.0, f64::max);
            for ((&g, &w), &f) in gains.iter().zip(&weights).zip(&f_sq) {
                if f > 0.0 && g > 1e-12 * g_max {
                    let stat = w * g / (g * f + 1.0).powi(2);
                    if (stat - mu).abs() > 1e-9 * mu {
                        return Err(format!("instance {i}: stationarity {stat} vs μ {mu}"));
                    }
                }
            }
            let products: Vec<f64> = gains.iter().zip(&f_sq).map(|(&g, &f)| g * f).collect();
            for w in products.windows(2) {
                if w[1] > w[0] + 1e-10 * w[0].max(1.0) {
                    return Err(format!("instance {i}: λ²f² not descending: {products:?}"));
                }
            }
        }
        Ok("10³ random instances: budget 1e-10, stationarity 1e-9, ordering preserved".into())
    });
}

#[test]
fn acceptance_3_inequality_suite() {
    criterion(3, "matrix inequality suite", || {
        let mut r = rng(1003);
        let mut samples = 0usize;
        for pair_idx in 0..100 {
            let dim = 2 + pair_idx % 5;
            let a = linalg::random_psd(dim, 0.0, &mut r);
            let b = linalg::random_psd(dim, 0.05, &mut r);
            let checks: [(&str, unitary::IneqBound, MiddleFn); 4] = [
                (
                    "trace-product",
                    unitary::ineq_trace_product(&a, &b).map_err(|e| e.to_string())?,
                    middle::trace_product,
                ),
                (
                    "det-sum",
                    unitary::ineq_logdet_sum(&a, &b).map_err(|e| e.to_string())?,
                    middle::det_sum,
                ),
                (
                    "det-product-plus-i",
                    unitary::ineq_logdet_product_plus_i(&a, &b).map_err(|e| e.to_string())?,
                    middle::det_product_plus_i,
                ),
                (
                    "trace-inv-sum",
                    unitary::ineq_trace_inv_sum(&a, &b).map_err(|e| e.to_string())?,
                    middle::trace_inv_sum,
                ),
            ];
            for (name, bound, f) in &checks {
                let scale = bound.upper.abs().max(1.0);
                if (f(&bound.q_lower, &a, &b) - bound.lower).abs() > 1e-9 * scale {
                    return Err(format!("pair {pair_idx} {name}: lower extremizer misses"));
                }
                if (f(&bound.q_upper, &a, &b) - bound.upper).abs() > 1e-9 * scale {
                    return Err(format!("pair {pair_idx} {name}: upper extremizer misses"));
                }
            }
            for _ in 0..1000 {
                let q = linalg::haar_unitary(dim, &mut r);
                for (name, bound, f) in &checks {
                    let v = f(&q, &a, &b);
                    let slack = 1e-9 * bound.upper.abs().max(1.0);
                    if v < bound.lower - slack || v > bound.upper + slack {
                        return Err(format!(
                            "pair {pair_idx} {name}: {v} outside [{}, {}]",
                            bound.lower, bound.upper
                        ));
                    }
                    samples += 1;
                }
            }
        }
        Ok(format!("100 pairs, {samples} sampled middles contained; all extremizers attain"))
    });
}

#[test]
fn acceptance_4_per_case_q_optimality() {
    criterion(4, "per-case rotation optimality", || {
        let n = 4;
        let mut r = rng(1004);
        let variants: Vec<(&str, CaseMaker)> = vec![
            ("case1", Box::new(|r| ObjectiveCase::Case1 { n_mat: linalg::random_psd(4, 0.4, r) })),
            ("case2", Box::new(|r| ObjectiveCase::Case2 { a_mat: linalg::complex_gaussian(4, 4, r) })),
            ("case3", Box::new(|r| ObjectiveCase::Case3 { n_mat: linalg::random_psd(4, 0.4, r) })),
            (
                "case4",
                Box::new(|r| ObjectiveCase::Case4 {
                    n_mat: linalg::random_psd(4, 0.4, r),
                    m_mat: linalg::random_psd(2, 0.4, r),
                }),
            ),
            (
                "case5",
                Box::new(|r| ObjectiveCase::Case5 {
                    a_mat: linalg::complex_gaussian(4, 4, r),
                    n_mat: linalg::random_psd(4, 0.4, r),
                }),
            ),
            ("case6", Box::new(|r| ObjectiveCase::Case6 { a_mat: linalg::complex_gaussian(4, 4, r) })),
            (
                "case7-concave",
                Box::new(|_| ObjectiveCase::Case7 {
                    schur: SchurKind::Concave,
                    objective: objectives::lookup_objective("sum-mse").unwrap(),
                }),
            ),
            (
                "case7-convex",
                Box::new(|_| ObjectiveCase::Case7 {
                    schur: SchurKind::Convex,
                    objective: objectives::lookup_objective("max-mse").unwrap(),
                }),
            ),
            (
                "case8-concave",
                Box::new(|_| ObjectiveCase::Case8 {
                    schur: SchurKind::Concave,
                    objective: objectives::lookup_objective("prod-mse").unwrap(),
                }),
            ),
            (
                "case8-convex",
                Box::new(|_| ObjectiveCase::Case8 {
                    schur: SchurKind::Convex,
                    objective: objectives::lookup_objective("prod-mse").unwrap(),
                }),
            ),
        ];
        // 20 instances per named case, 10³ sampled rotations each.
        for (label, make) in &variants {
            for i in 0..20 {
                let case = make(&mut r);
                let spec = ProblemSpec::new(
                    linalg::complex_gaussian(n, n, &mut r),
                    linalg::random_psd(n, 0.05, &mut r).scale(0.02),
                    linalg::random_psd(n, 0.1, &mut r),
                    1.0,
                    4.0,
                    case.clone(),
                )
                .map_err(|e| e.to_string())?;
                let f = linalg::complex_gaussian(n, n, &mut r);
                let m_f = objectives::inner_matrix(&f, &spec).map_err(|e| e.to_string())?;
                let q = unitary::optimal_q(&case, &m_f).map_err(|e| e.to_string())?;
                let ours =
                    objectives::eval_f_matrix(&case, &(&f * &q.q), &spec).map_err(|e| e.to_string())?;
                let mut best = f64::INFINITY;
                for _ in 0..1000 {
                    let u = linalg::haar_unitary(n, &mut r);
                    let v = objectives::eval_f_matrix(&case, &(&f * u), &spec)
                        .map_err(|e| e.to_string())?;
                    best = best.min(v);
                }
                if ours > best + 1e-9 * ours.abs().max(1.0) {
                    return Err(format!("{label} instance {i}: {ours} beaten by sampled {best}"));
                }
            }
        }
        Ok("10 case variants × 20 instances: constructed rotation undominated by 10³ samples".into())
    });
}

#[test]
fn acceptance_5_theorem3() {
    criterion(5, "singular-value product bound", || {
        let mut r = rng(1005);
        for i in 0..1000 {
            let d0 = r.gen_range(1..=5);
            let d1 = r.gen_range(1..=5);
            let d2 = r.gen_range(1..=5);
            let d3 = r.gen_range(1..=5);
            let mats = vec![
                linalg::complex_gaussian(d0, d1, &mut r),
                linalg::complex_gaussian(d1, d2, &mut r),
                linalg::complex_gaussian(d2, d3, &mut r),
            ];
            if !multihop::theorem3_check(&mats).map_err(|e| e.to_string())? {
                return Err(format!("counterexample at triple {i}"));
            }
        }
        // aligned diagonal construction attains equality
        for _ in 0..50 {
            let n = r.gen_range(2..=5);
            let mut d1: Vec<f64> = (0..n).map(|_| r.gen_range(0.1..3.0)).collect();
            let mut d2: Vec<f64> = (0..n).map(|_| r.gen_range(0.1..3.0)).collect();
            d1.sort_by(|a, b| b.total_cmp(a));
            d2.sort_by(|a, b| b.total_cmp(a));
            let a = linalg::diag(&d1);
            let b = linalg::diag(&d2);
            let prod_sv = linalg::svd(&(&a * &b)).map_err(|e| e.to_string())?.singular_values;
            let mut lhs = 1.0;
            let mut rhs = 1.0;
            for k in 0..n {
                lhs *= prod_sv[k];
                rhs *= d1[k] * d2[k];
                if (lhs - rhs).abs() > 1e-10 * rhs.max(1e-30) {
                    return Err(format!("aligned diagonals miss equality at k={}", k + 1));
                }
            }
        }
        Ok("no counterexample in 10³ random triples; aligned diagonals attain equality".into())
    });
}

fn mean_of(rows: &[Row], snr_db: f64, metric: &str) -> Result<f64, String> {
    rows.iter()
        .find(|r| r.snr_db == snr_db && r.metric == metric)
        .map(|r| r.mean)
        .ok_or_else(|| format!("missing metric {metric} at {snr_db} dB"))
}

#[test]
fn acceptance_6_bound_gap() {
    criterion(6, "bound-gap behavior", || {
        let mut gaps = Vec::new();
        for &se2 in &[0.1, 0.01, 0.001] {
            let mut cfg = ExperimentConfig::defaults(Experiment::BoundGap);
            cfg.sigma_e2 = se2;
            cfg.trials = 500;
            cfg.seed = 2006;
            let rows = run(&cfg).map_err(|e| e.to_string())?;
            // per-eigenvalue mean Upper ≥ Lower at every SNR point
            for &snr in &cfg.snr_db_grid {
                for n in 1..=4 {
                    let lo = mean_of(&rows, snr, &format!("eig{n}_lower"))?;
                    let up = mean_of(&rows, snr, &format!("eig{n}_upper"))?;
                    if up < lo - 1e-9 * lo.abs().max(1.0) {
                        return Err(format!(
                            "σ_e²={se2}, {snr} dB, eigenvalue {n}: upper {up} below lower {lo}"
                        ));
                    }
                }
            }
            let mean_gap = cfg
                .snr_db_grid
                .iter()
                .map(|&snr| mean_of(&rows, snr, "mse_scale_gap"))
                .collect::<Result<Vec<_>, _>>()?
                .iter()
                .sum::<f64>()
                / cfg.snr_db_grid.len() as f64;
            gaps.push(mean_gap);
        }
        if !(gaps[0] > gaps[1] && gaps[1] > gaps[2]) {
            return Err(format!("gap not monotone across σ_e²: {gaps:?}"));
        }
        if gaps[2] > 0.02 {
            return Err(format!("gap {} at σ_e²=0.001 exceeds 2%", gaps[2]));
        }
        Ok(format!(
            "upper ≥ lower per eigenvalue everywhere; mean MSE-scale gaps {:.4}/{:.4}/{:.4} \
             decrease and end ≤ 2%",
            gaps[0], gaps[1], gaps[2]
        ))
    });
}

#[test]
fn acceptance_7_closed_form_vs_iterative() {
    criterion(7, "closed form vs iterative benchmark", || {
        let mut worst = 0.0f64;
        for &(alpha_t, beta_r) in &[(0.9, 0.3), (0.3, 0.9)] {
            let mut cfg = ExperimentConfig::defaults(Experiment::SumMseCompare);
            cfg.alpha_t = alpha_t;
            cfg.beta_r = beta_r;
            cfg.sigma_e2 = 0.01;
            cfg.snr_db_grid = vec![5.0, 15.0, 25.0];
            cfg.trials = 500;
            cfg.seed = 2007;
            let rows = run(&cfg).map_err(|e| e.to_string())?;
            for &snr in &cfg.snr_db_grid {
                let closed = mean_of(&rows, snr, "summse_lower")?;
                let iterative = mean_of(&rows, snr, "summse_iterative")?;
                let rel = (closed - iterative).abs() / iterative;
                worst = worst.max(rel);
                if rel > 0.02 {
                    return Err(format!(
                        "(α_t, β_r) = ({alpha_t}, {beta_r}), {snr} dB: closed {closed} vs \
                         iterative {iterative} ({rel:.3} relative)"
                    ));
                }
            }
        }
        Ok(format!("all 6 sweep points agree within 2% (worst {worst:.4})"))
    });
}

#[test]
fn acceptance_8_three_hop_robust_vs_nonrobust() {
    criterion(8, "three-hop robust vs non-robust", || {
        let base = |exp| {
            let mut cfg = ExperimentConfig::defaults(exp);
            cfg.alpha_t = 0.6;
            cfg.beta_r = 0.3;
            cfg.sigma_e2 = 0.01;
            cfg.snr_db_grid = vec![20.0];
            cfg.trials = 500;
            cfg.seed = 2008;
            cfg.hops = 3;
            cfg
        };
        let cap = run(&base(Experiment::MultiHopCapacity)).map_err(|e| e.to_string())?;
        let diff = cap
            .iter()
            .find(|r| r.metric == "capacity_diff")
            .ok_or("missing capacity_diff")?;
        let cap_margin = diff.mean - 1.96 * diff.stderr;
        if cap_margin <= 0.0 {
            return Err(format!(
                "capacity: robust−nonrobust = {} ± {}, 95% margin not positive",
                diff.mean, diff.stderr
            ));
        }
        let mse = run(&base(Experiment::MultiHopMaxMse)).map_err(|e| e.to_string())?;
        let diff = mse
            .iter()
            .find(|r| r.metric == "max-mse_diff")
            .ok_or("missing max-mse_diff")?;
        let mse_margin = diff.mean + 1.96 * diff.stderr;
        if mse_margin >= 0.0 {
            return Err(format!(
                "max-MSE: robust−nonrobust = {} ± {}, 95% margin not negative",
                diff.mean, diff.stderr
            ));
        }
        Ok(format!(
            "capacity gain CI low {cap_margin:.3} bits > 0; max-MSE reduction CI high \
             {mse_margin:.5} < 0 (500 paired trials)"
        ))
    });
}

#[test]
fn acceptance_9_verify_suite() {
    criterion(9, "verify suite", || {
        let report = mmo_cli::full_verify(42);
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        if !failed.is_empty() {
            return Err(failed.join("; "));
        }
        // the actual binary must agree on the exit code
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_mmo"))
            .args(["verify", "--seed", "42"])
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "mmo verify exited nonzero: {}",
                String::from_utf8_lossy(&out.stdout)
            ));
        }
        Ok(format!("{} named checks pass in-process and via the binary", report.checks.len()))
    });
}
