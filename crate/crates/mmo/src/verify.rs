//! Runnable invariant suite behind `mmo verify`.
//!
//! Every module's documented invariants are re-checked here at runtime on
//! seeded random instances, one named check per invariant. The CLI prints
//! one line per check and exits nonzero if any fails; the same report is
//! used by the acceptance tests.

use crate::bench::{self, IterConfig};
use crate::channel::{self, ExpCorrModel};
use crate::linalg::{self, CMatrix, EigOrder};
use crate::mmop::{self, BoundMode, ProblemSpec};
use crate::multihop::{self, Hop};
use crate::objectives::{self, AllocationRule, ObjectiveCase, SchurKind};
use crate::unitary::{self, middle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type MiddleFn = fn(&CMatrix, &CMatrix, &CMatrix) -> f64;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn run(&mut self, name: &'static str, f: impl FnOnce() -> Result<String, String>) {
        let (passed, detail) = match f() {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(CheckResult { name, passed, detail });
    }
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt))
}

fn random_sum_mse_spec(r: &mut ChaCha8Rng, n: usize, psi_scale: f64) -> ProblemSpec {
    let h = linalg::complex_gaussian(n, n, r);
    let psi = if psi_scale == 0.0 {
        CMatrix::zeros(n, n)
    } else {
        linalg::random_psd(n, 0.05, r).scale(psi_scale)
    };
    let sigma = linalg::random_psd(n, 0.1, r);
    ProblemSpec::new(h, psi, sigma, 1.0, 4.0, ObjectiveCase::sum_mse(n)).expect("valid spec")
}

/// Run the whole library invariant suite with a base seed.
pub fn run_verify(seed: u64) -> VerifyReport {
    let mut report = VerifyReport::default();

    report.run("linalg.ordering", || {
        let mut r = rng(seed, 1);
        for _ in 0..20 {
            let m = linalg::random_psd(5, 0.0, &mut r) - linalg::identity(5).scale(0.4);
            let d = linalg::herm_eig(&m, EigOrder::Descending).map_err(|e| e.to_string())?;
            for w in d.eigenvalues.windows(2) {
                if w[1] > w[0] {
                    return Err(format!("descending spectrum rose: {:?}", d.eigenvalues));
                }
            }
            let a = linalg::herm_eig(&m, EigOrder::Ascending).map_err(|e| e.to_string())?;
            for w in a.eigenvalues.windows(2) {
                if w[1] < w[0] {
                    return Err(format!("ascending spectrum fell: {:?}", a.eigenvalues));
                }
            }
            let s = linalg::svd(&linalg::complex_gaussian(4, 6, &mut r)).map_err(|e| e.to_string())?;
            for w in s.singular_values.windows(2) {
                if w[1] > w[0] || w[1] < 0.0 {
                    return Err(format!("singular values not descending: {:?}", s.singular_values));
                }
            }
        }
        Ok("descending/ascending contracts hold on 20 random instances".into())
    });

    report.run("linalg.unitarity", || {
        let mut r = rng(seed, 2);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let m = linalg::random_psd(5, 0.0, &mut r);
            let e = linalg::herm_eig(&m, EigOrder::Descending).map_err(|e| e.to_string())?;
            let dev = (e.eigenvectors.adjoint() * &e.eigenvectors - linalg::identity(5)).norm();
            worst = worst.max(dev / 5f64.sqrt());
            let rect = linalg::complex_gaussian(3, 5, &mut r);
            let s = linalg::svd(&rect).map_err(|e| e.to_string())?;
            let du = (s.u.adjoint() * &s.u - linalg::identity(s.u.ncols())).norm();
            let dv = (s.v.adjoint() * &s.v - linalg::identity(s.v.ncols())).norm();
            worst = worst.max(du / (s.u.ncols() as f64).sqrt()).max(dv / (s.v.ncols() as f64).sqrt());
        }
        if worst <= 1e-9 {
            Ok(format!("worst scaled unitarity deviation {worst:.2e}"))
        } else {
            Err(format!("unitarity deviation {worst:.2e} > 1e-9"))
        }
    });

    report.run("linalg.psd_sqrt_idempotence", || {
        let mut r = rng(seed, 3);
        for _ in 0..20 {
            let m = linalg::random_psd(4, 0.0, &mut r);
            let s = linalg::psd_sqrt(&m).map_err(|e| e.to_string())?;
            let res = (&s * &s - &m).norm() / m.norm();
            if res > 1e-9 {
                return Err(format!("square residual {res:.2e}"));
            }
        }
        Ok("psd_sqrt squares back within 1e-9 on 20 instances".into())
    });

    report.run("linalg.kron_mixed_product", || {
        let mut r = rng(seed, 4);
        for _ in 0..20 {
            let (a, b) = (linalg::complex_gaussian(2, 3, &mut r), linalg::complex_gaussian(3, 2, &mut r));
            let (c, d) = (linalg::complex_gaussian(3, 2, &mut r), linalg::complex_gaussian(2, 3, &mut r));
            let lhs = linalg::kron(&a, &b) * linalg::kron(&c, &d);
            let rhs = linalg::kron(&(&a * &c), &(&b * &d));
            let res = (lhs - &rhs).norm() / rhs.norm();
            if res > 1e-12 {
                return Err(format!("mixed-product residual {res:.2e}"));
            }
        }
        Ok("(A⊗B)(C⊗D) = (AC)⊗(BD) on 20 random quadruples".into())
    });

    report.run("channel.covariance_identity", || {
        let model = ExpCorrModel::new(0.6, 0.5, 0.09, 4, 4).map_err(|e| e.to_string())?;
        let (psi, sigma) = channel::build_correlations(&model);
        let trials = 10_000u64;
        let pairs = [((0, 0), (1, 1)), ((0, 1), (0, 2)), ((2, 3), (3, 3))];
        let mut acc = [linalg::C64::new(0.0, 0.0); 3];
        for t in 0..trials {
            let d = channel::sample_channel(&model, seed.wrapping_add(t));
            for (p, &((i, j), (k, l))) in pairs.iter().enumerate() {
                acc[p] += d.delta_h[(i, j)] * d.delta_h[(k, l)].conj();
            }
        }
        let tol = 3.0 * model.sigma_e2 / (trials as f64).sqrt();
        for (p, &((i, j), (k, l))) in pairs.iter().enumerate() {
            let got = acc[p] / linalg::C64::new(trials as f64, 0.0);
            let want = sigma[(i, k)].re * psi[(j, l)].re;
            if (got.re - want).abs() > tol || got.im.abs() > tol {
                return Err(format!("pair {p}: {got} vs {want} ± {tol:.2e}"));
            }
        }
        Ok(format!("coloring covariance matches on 3 index pairs over {trials} draws"))
    });

    report.run("channel.estimate_error_independence", || {
        let model = ExpCorrModel::new(0.5, 0.4, 0.25, 3, 3).map_err(|e| e.to_string())?;
        let trials = 10_000u64;
        let mut acc = linalg::C64::new(0.0, 0.0);
        for t in 0..trials {
            let d = channel::sample_channel(&model, seed.wrapping_add(31_000 + t));
            acc += d.h_bar[(0, 0)] * d.delta_h[(0, 0)].conj();
        }
        let got = acc / linalg::C64::new(trials as f64, 0.0);
        // H̄ entry has variance (1−σ_e²); ΔH entry σ_e²; 3 SE of the cross term.
        let tol = 3.0 * ((1.0 - model.sigma_e2) * model.sigma_e2).sqrt() / (trials as f64).sqrt();
        if got.norm() > tol {
            Err(format!("cross moment {got} exceeds {tol:.2e}"))
        } else {
            Ok(format!("cross moment {:.2e} within {tol:.2e}", got.norm()))
        }
    });

    report.run("channel.snr_bookkeeping", || {
        for db in [-7.5, 0.0, 12.0, 30.0] {
            let round = channel::snr_linear_to_db(channel::snr_db_to_linear(db));
            if (round - db).abs() > 1e-10 {
                return Err(format!("round trip {db} → {round}"));
            }
        }
        if (channel::snr_db_to_linear(20.0) - 100.0).abs() > 1e-10 {
            return Err("20 dB is not 100x".into());
        }
        Ok("dB/linear conversions are inverse within 1e-10".into())
    });

    report.run("mmop.boundary_power", || {
        let mut r = rng(seed, 5);
        for _ in 0..10 {
            let spec = random_sum_mse_spec(&mut r, 4, 0.05);
            for mode in [BoundMode::Lower, BoundMode::Upper] {
                let sol = mmop::solve(&spec, mode, &[1.0; 4]).map_err(|e| e.to_string())?;
                let rel = (sol.spent_power() - spec.power).abs() / spec.power;
                if rel > 1e-8 {
                    return Err(format!("power off by {rel:.2e}"));
                }
            }
        }
        Ok("Tr(FFᴴ) = P within 1e-8 on 10 instances, both modes".into())
    });

    report.run("mmop.eta_double_formula", || {
        let mut r = rng(seed, 6);
        for _ in 0..10 {
            let spec = random_sum_mse_spec(&mut r, 4, 0.05);
            let sol = mmop::solve(&spec, BoundMode::Lower, &[1.0; 4]).map_err(|e| e.to_string())?;
            let f_sq: Vec<f64> = sol.lambda_f.iter().map(|&v| v * v).collect();
            let closed = mmop::eta_closed_form(&sol.basis, spec.power, &f_sq);
            let rel = (closed - sol.eta_f).abs() / closed.abs();
            if rel > 1e-8 {
                return Err(format!("fixed-point vs closed-form η differ by {rel:.2e}"));
            }
        }
        Ok("both η_f expressions agree within 1e-8 on 10 instances".into())
    });

    report.run("mmop.lemma2_equivalence", || {
        let mut r = rng(seed, 7);
        for _ in 0..10 {
            let spec = random_sum_mse_spec(&mut r, 4, 0.05);
            let sol = mmop::solve(&spec, BoundMode::Lower, &[1.0; 4]).map_err(|e| e.to_string())?;
            let s = spec.psi.scale(sol.basis.alpha * spec.power)
                + linalg::identity(4).scale(spec.noise_var);
            let lhs = linalg::real_trace(&(&sol.f_opt * sol.f_opt.adjoint() * s)) / sol.eta_f;
            let rel = (lhs - spec.power).abs() / spec.power;
            if rel > 1e-8 {
                return Err(format!("Tr[FFᴴ(αPΨ+σ²I)]/η ≠ P by {rel:.2e}"));
            }
        }
        Ok("power identity holds within 1e-8 on 10 instances".into())
    });

    report.run("mmop.lemma4_ordering", || {
        let mut r = rng(seed, 8);
        for _ in 0..10 {
            let spec = random_sum_mse_spec(&mut r, 4, 0.05);
            let sol = mmop::solve(&spec, BoundMode::Lower, &[1.0; 4]).map_err(|e| e.to_string())?;
            let be = sol.bound_eigenvalues();
            for w in be.windows(2) {
                if w[1] > w[0] + 1e-10 * w[0].max(1.0) {
                    return Err(format!("λ²f² not descending: {be:?}"));
                }
            }
        }
        Ok("λ_Π,n² f_n² non-increasing on 10 instances".into())
    });

    report.run("mmop.loewner_sandwich", || {
        let mut r = rng(seed, 9);
        for _ in 0..10 {
            let spec = random_sum_mse_spec(&mut r, 4, 0.05);
            let sol = mmop::solve(&spec, BoundMode::Lower, &[1.0; 4]).map_err(|e| e.to_string())?;
            let k_f = mmop::effective_noise_cov(&sol.f_opt, &spec.psi, &spec.sigma, spec.noise_var);
            let ok = linalg::loewner_geq(&sol.basis.k_psi, &k_f.scale(1.0 / sol.eta_f))
                .map_err(|e| e.to_string())?;
            if !ok {
                return Err("K_F/η_f ⪯ K_Ψ violated in Lower mode".into());
            }
        }
        Ok("K_F/η_f ⪯ K_Ψ on 10 Lower-mode instances".into())
    });

    report.run("mmop.bound_gap_monotone", || {
        let mut r = rng(seed, 10);
        let h = linalg::complex_gaussian(4, 4, &mut r);
        let model = ExpCorrModel::new(0.45, 0.45, 0.5, 4, 4).map_err(|e| e.to_string())?;
        let (psi1, sigma) = channel::build_correlations(&model);
        let shape = psi1.scale(2.0); // unit-scale correlation shape
        let mut prev = f64::INFINITY;
        let mut final_rel = f64::NAN;
        for &se2 in &[1e-1, 1e-2, 1e-3, 1e-6, 1e-9] {
            let spec = ProblemSpec::new(
                h.clone(),
                shape.scale(se2),
                sigma.clone(),
                1.0,
                1.0,
                ObjectiveCase::sum_mse(4),
            )
            .map_err(|e| e.to_string())?;
            let lo = mmop::solve(&spec, BoundMode::Lower, &[1.0; 4])
                .map_err(|e| e.to_string())?
                .bound_eigenvalues();
            let up = mmop::solve(&spec, BoundMode::Upper, &[1.0; 4])
                .map_err(|e| e.to_string())?
                .bound_eigenvalues();
            let mut gap: f64 = 0.0;
            let mut rel: f64 = 0.0;
            for (l, u) in lo.iter().zip(&up) {
                if *u < l - 1e-10 {
                    return Err(format!("upper {u} below lower {l} at σ_e²={se2}"));
                }
                gap = gap.max(u - l);
                rel = rel.max((u - l) / u.max(linalg::ABS_FLOOR));
            }
            if gap > prev + 1e-12 {
                return Err(format!("gap grew to {gap:.2e} at σ_e²={se2}"));
            }
            prev = gap;
            final_rel = rel;
        }
        if final_rel <= 1e-6 {
            Ok(format!("gap shrinks monotonically; limit relative gap {final_rel:.2e}"))
        } else {
            Err(format!("limit relative gap {final_rel:.2e} > 1e-6"))
        }
    });

    report.run("mmop.exact_degeneracy", || {
        let mut r = rng(seed, 11);
        let h = linalg::complex_gaussian(4, 4, &mut r);
        let psi = linalg::random_psd(4, 0.1, &mut r).scale(0.1);
        let spec = ProblemSpec::new(
            h,
            psi,
            linalg::identity(4).scale(0.8),
            1.0,
            4.0,
            ObjectiveCase::sum_mse(4),
        )
        .map_err(|e| e.to_string())?;
        let lo = mmop::solve(&spec, BoundMode::Lower, &[1.0; 4]).map_err(|e| e.to_string())?;
        let up = mmop::solve(&spec, BoundMode::Upper, &[1.0; 4]).map_err(|e| e.to_string())?;
        let dev = (lo.f_opt - up.f_opt).norm();
        if dev <= 1e-10 {
            Ok(format!("Σ ∝ I: Lower and Upper coincide (dev {dev:.2e})"))
        } else {
            Err(format!("Σ ∝ I but modes differ by {dev:.2e}"))
        }
    });

    report.run("unitary.containment", || {
        let mut r = rng(seed, 12);
        let mut samples = 0usize;
        for pair_idx in 0..20 {
            let dim = 2 + (pair_idx % 5);
            let a = linalg::random_psd(dim, 0.0, &mut r);
            let b = linalg::random_psd(dim, 0.05, &mut r);
            let bounds: [(unitary::IneqBound, MiddleFn); 4] = [
                (unitary::ineq_trace_product(&a, &b).map_err(|e| e.to_string())?, middle::trace_product),
                (unitary::ineq_logdet_sum(&a, &b).map_err(|e| e.to_string())?, middle::det_sum),
                (
                    unitary::ineq_logdet_product_plus_i(&a, &b).map_err(|e| e.to_string())?,
                    middle::det_product_plus_i,
                ),
                (unitary::ineq_trace_inv_sum(&a, &b).map_err(|e| e.to_string())?, middle::trace_inv_sum),
            ];
            for _ in 0..1000 {
                let q = linalg::haar_unitary(dim, &mut r);
                for (bound, f) in &bounds {
                    let v = f(&q, &a, &b);
                    let slack = 1e-9 * bound.upper.abs().max(1.0);
                    if v < bound.lower - slack || v > bound.upper + slack {
                        return Err(format!(
                            "middle {v} escapes [{}, {}] at dim {dim}",
                            bound.lower, bound.upper
                        ));
                    }
                    samples += 1;
                }
            }
        }
        Ok(format!("{samples} sampled rotations stayed inside all four bounds"))
    });

    report.run("unitary.attainment", || {
        let mut r = rng(seed, 13);
        for pair_idx in 0..20 {
            let dim = 2 + (pair_idx % 5);
            let a = linalg::random_psd(dim, 0.0, &mut r);
            let b = linalg::random_psd(dim, 0.05, &mut r);
            let bounds: [(unitary::IneqBound, MiddleFn); 4] = [
                (unitary::ineq_trace_product(&a, &b).map_err(|e| e.to_string())?, middle::trace_product),
                (unitary::ineq_logdet_sum(&a, &b).map_err(|e| e.to_string())?, middle::det_sum),
                (
                    unitary::ineq_logdet_product_plus_i(&a, &b).map_err(|e| e.to_string())?,
                    middle::det_product_plus_i,
                ),
                (unitary::ineq_trace_inv_sum(&a, &b).map_err(|e| e.to_string())?, middle::trace_inv_sum),
            ];
            for (bound, f) in &bounds {
                let scale = bound.upper.abs().max(1.0);
                if (f(&bound.q_lower, &a, &b) - bound.lower).abs() > 1e-9 * scale {
                    return Err(format!("lower extremizer misses at dim {dim}"));
                }
                if (f(&bound.q_upper, &a, &b) - bound.upper).abs() > 1e-9 * scale {
                    return Err(format!("upper extremizer misses at dim {dim}"));
                }
            }
        }
        Ok("all extremizers reproduce their bounds within 1e-9".into())
    });

    report.run("unitary.det_commutation", || {
        let mut r = rng(seed, 14);
        for _ in 0..30 {
            let a = linalg::complex_gaussian(4, 4, &mut r);
            let b = linalg::complex_gaussian(4, 4, &mut r);
            let lhs = (&a * &b + linalg::identity(4)).determinant();
            let rhs = (&b * &a + linalg::identity(4)).determinant();
            if (lhs - rhs).norm() > 1e-10 * lhs.norm().max(1.0) {
                return Err(format!("|AB+I| = {lhs} vs |BA+I| = {rhs}"));
            }
        }
        Ok("|AB+I| = |BA+I| within 1e-10 on 30 random pairs".into())
    });

    report.run("unitary.case4_factorization", || {
        let mut r = rng(seed, 15);
        for _ in 0..10 {
            let m = linalg::random_psd(3, 0.0, &mut r);
            let n_mat = linalg::random_psd(3, 0.3, &mut r);
            let m2 = linalg::random_psd(2, 0.3, &mut r);
            let q = linalg::haar_unitary(3, &mut r);
            let inner = linalg::herm_part(&(q.adjoint() * &m * &q + &n_mat));
            let lhs = linalg::real_trace(
                &linalg::kron(&inner, &m2).cholesky().ok_or("kron not PD")?.inverse(),
            );
            let rhs = linalg::real_trace(&inner.clone().cholesky().ok_or("inner not PD")?.inverse())
                * linalg::real_trace(&m2.clone().cholesky().ok_or("M₂ not PD")?.inverse());
            if (lhs - rhs).abs() > 1e-10 * rhs.abs().max(1.0) {
                return Err(format!("kron trace factorization off: {lhs} vs {rhs}"));
            }
        }
        Ok("Tr[((QᴴMQ+N)⊗M₂)⁻¹] factorizes on 10 instances".into())
    });

    report.run("unitary.optimality_certificates", || {
        let mut r = rng(seed, 16);
        let n = 4;
        let variants: Vec<(&str, ObjectiveCase)> = all_case_variants(n, &mut r);
        for (label, case) in variants {
            for _ in 0..2 {
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
                for _ in 0..1000 {
                    let u = linalg::haar_unitary(n, &mut r);
                    let v = objectives::eval_f_matrix(&case, &(&f * u), &spec)
                        .map_err(|e| e.to_string())?;
                    if ours > v + 1e-9 * ours.abs().max(1.0) {
                        return Err(format!("{label}: constructed Q beaten ({ours} > {v})"));
                    }
                }
            }
        }
        Ok("constructed rotations undominated over 10³ samples per case".into())
    });

    report.run("objectives.matrix_vector_consistency", || {
        let mut r = rng(seed, 17);
        let n = 4;
        for (label, case) in all_case_variants(n, &mut r) {
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
            let eigs: Vec<f64> = linalg::herm_eig(&m_f, EigOrder::Descending)
                .map_err(|e| e.to_string())?
                .eigenvalues
                .iter()
                .map(|&v| v.max(0.0))
                .collect();
            let floor = objectives::eval_f_vector(&case, &eigs);
            let q = unitary::optimal_q(&case, &m_f).map_err(|e| e.to_string())?;
            let attained =
                objectives::eval_f_matrix(&case, &(&f * &q.q), &spec).map_err(|e| e.to_string())?;
            if (attained - floor).abs() > 1e-9 * floor.abs().max(1.0) {
                return Err(format!("{label}: attainment {attained} vs vector form {floor}"));
            }
            for _ in 0..200 {
                let u = linalg::haar_unitary(n, &mut r);
                let v = objectives::eval_f_matrix(&case, &(&f * u), &spec).map_err(|e| e.to_string())?;
                if v < floor - 1e-9 * floor.abs().max(1.0) {
                    return Err(format!("{label}: sampled rotation below the vector-form floor"));
                }
            }
        }
        Ok("vector form is the attained floor for every case".into())
    });

    report.run("objectives.monotonicity", || {
        let mut r = rng(seed, 18);
        for (label, case) in all_case_variants(3, &mut r) {
            let base = vec![2.0, 1.0, 0.5];
            let v0 = objectives::eval_f_vector(&case, &base);
            for k in 0..3 {
                let mut bumped = base.clone();
                bumped[k] += 1e-4;
                if objectives::eval_f_vector(&case, &bumped) > v0 + 1e-12 {
                    return Err(format!("{label}: objective rose when eigenvalue {k} grew"));
                }
            }
        }
        Ok("each case decreases in every eigenvalue".into())
    });

    report.run("objectives.unitary_invariance", || {
        let mut r = rng(seed, 19);
        let case = ObjectiveCase::Case3 { n_mat: linalg::random_psd(4, 0.5, &mut r) };
        let m = linalg::random_psd(4, 0.0, &mut r);
        let base = linalg::herm_eig(&m, EigOrder::Descending)
            .map_err(|e| e.to_string())?
            .eigenvalues;
        let v0 = objectives::eval_f_vector(&case, &base);
        for _ in 0..20 {
            let u = linalg::haar_unitary(4, &mut r);
            let eigs = linalg::herm_eig(&(u.adjoint() * &m * &u), EigOrder::Descending)
                .map_err(|e| e.to_string())?
                .eigenvalues;
            let v = objectives::eval_f_vector(&case, &eigs);
            if (v - v0).abs() > 1e-10 * v0.abs().max(1.0) {
                return Err(format!("value moved under conjugation: {v0} → {v}"));
            }
        }
        Ok("spectrum-only dependence confirmed on 20 conjugations".into())
    });

    report.run("objectives.maxmse_dft_link", || {
        let eigs = [2.0, 0.7, 0.1, 0.05];
        let convex = ObjectiveCase::Case7 {
            schur: SchurKind::Convex,
            objective: objectives::lookup_objective("max-mse").map_err(|e| e.to_string())?,
        };
        let concave = ObjectiveCase::Case7 {
            schur: SchurKind::Concave,
            objective: objectives::lookup_objective("sum-mse").map_err(|e| e.to_string())?,
        };
        let lhs = objectives::eval_f_vector(&convex, &eigs);
        let rhs = objectives::eval_f_vector(&concave, &eigs) / 4.0;
        if (lhs - rhs).abs() > 1e-12 {
            Err(format!("max-MSE after equalization {lhs} vs sum/N {rhs}"))
        } else {
            Ok("max-MSE after the equalizing rotation equals sum-MSE/N".into())
        }
    });

    report.run("multihop.per_hop_independence", || {
        let mut r = rng(seed, 20);
        let hops: Vec<Hop> = (0..3)
            .map(|_| Hop {
                h: linalg::complex_gaussian(3, 3, &mut r),
                psi: linalg::random_psd(3, 0.05, &mut r).scale(0.03),
                sigma: linalg::random_psd(3, 0.1, &mut r),
                noise_var: 1.0,
                power: 3.0,
            })
            .collect();
        let all: Vec<_> = hops
            .iter()
            .map(|h| multihop::solve_hop(h, BoundMode::Lower, &[1.0; 3]))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let again = multihop::solve_hop(&hops[1], BoundMode::Lower, &[1.0; 3]).map_err(|e| e.to_string())?;
        let all1: &multihop::HopSolution = &all[1];
        if (&all1.f_k - &again.f_k).norm() > 0.0 {
            Err("re-solving a frozen hop changed its solution".into())
        } else {
            Ok("hops decouple exactly".into())
        }
    });

    report.run("multihop.chain_bound_attainment", || {
        let mut r = rng(seed, 21);
        let hops: Vec<multihop::HopSolution> = (0..3)
            .map(|_| {
                let hop = Hop {
                    h: linalg::complex_gaussian(4, 4, &mut r),
                    psi: linalg::random_psd(4, 0.05, &mut r).scale(0.03),
                    sigma: linalg::random_psd(4, 0.1, &mut r),
                    noise_var: 1.0,
                    power: 3.0,
                };
                multihop::solve_hop(&hop, BoundMode::Lower, &[1.0; 4])
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let qs = multihop::chain_rotations(
            &hops,
            objectives::SchurFamily::Additive,
            SchurKind::Concave,
        )
        .map_err(|e| e.to_string())?;
        let t = multihop::chain_matrix(&hops, &qs).map_err(|e| e.to_string())?;
        let sv = linalg::svd(&t).map_err(|e| e.to_string())?.singular_values;
        let per: Vec<Vec<f64>> = hops
            .iter()
            .map(|h| linalg::svd(&h.m_k).map(|s| s.singular_values))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let mut lhs = 1.0;
        let mut rhs = 1.0;
        for i in 0..4 {
            lhs *= sv[i];
            rhs *= per.iter().map(|s| s[i]).product::<f64>();
            if (lhs - rhs).abs() > 1e-8 * rhs.max(1e-30) {
                return Err(format!("leading product {lhs} vs bound {rhs} at k={}", i + 1));
            }
        }
        let e = multihop::chain_mse_matrix(&hops, &qs).map_err(|e| e.to_string())?;
        let eigs = linalg::herm_eig(&e, EigOrder::Descending).map_err(|e| e.to_string())?.eigenvalues;
        for v in &eigs {
            if !(*v > 0.0 && *v <= 1.0 + 1e-12) {
                return Err(format!("chain MSE eigenvalue {v} outside (0,1]"));
            }
        }
        Ok("constructed rotations attain the product bound; MSE spectrum in (0,1]".into())
    });

    report.run("multihop.theorem3_random", || {
        let mut r = rng(seed, 22);
        for _ in 0..1000 {
            let mats = vec![
                linalg::complex_gaussian(4, 3, &mut r),
                linalg::complex_gaussian(3, 5, &mut r),
                linalg::complex_gaussian(5, 2, &mut r),
            ];
            if !multihop::theorem3_check(&mats).map_err(|e| e.to_string())? {
                return Err("singular-value product bound violated".into());
            }
        }
        Ok("no counterexample among 10³ random triples".into())
    });

    report.run("multihop.concave_diagonalization", || {
        let mut r = rng(seed, 23);
        let hops: Vec<multihop::HopSolution> = (0..2)
            .map(|_| {
                let hop = Hop {
                    h: linalg::complex_gaussian(3, 3, &mut r),
                    psi: linalg::random_psd(3, 0.05, &mut r).scale(0.03),
                    sigma: linalg::random_psd(3, 0.1, &mut r),
                    noise_var: 1.0,
                    power: 3.0,
                };
                multihop::solve_hop(&hop, BoundMode::Lower, &[1.0; 3])
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let qs =
            multihop::chain_rotations(&hops, objectives::SchurFamily::Additive, SchurKind::Concave)
                .map_err(|e| e.to_string())?;
        let t = multihop::chain_matrix(&hops, &qs).map_err(|e| e.to_string())?;
        let gram = t.adjoint() * &t;
        let mut off: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    off = off.max(gram[(i, j)].norm());
                }
            }
        }
        if off <= 1e-8 {
            Ok(format!("chain product diagonal (off-diagonal mass {off:.2e})"))
        } else {
            Err(format!("off-diagonal mass {off:.2e} > 1e-8"))
        }
    });

    report.run("multihop.convex_equal_diag", || {
        let mut r = rng(seed, 24);
        let hops: Vec<multihop::HopSolution> = (0..3)
            .map(|_| {
                let hop = Hop {
                    h: linalg::complex_gaussian(4, 4, &mut r),
                    psi: linalg::random_psd(4, 0.05, &mut r).scale(0.03),
                    sigma: linalg::random_psd(4, 0.1, &mut r),
                    noise_var: 1.0,
                    power: 3.0,
                };
                multihop::solve_hop(&hop, BoundMode::Lower, &[1.0; 4])
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let qs =
            multihop::chain_rotations(&hops, objectives::SchurFamily::Additive, SchurKind::Convex)
                .map_err(|e| e.to_string())?;
        let e = multihop::chain_mse_matrix(&hops, &qs).map_err(|e| e.to_string())?;
        let d: Vec<f64> = (0..4).map(|i| e[(i, i)].re).collect();
        let spread = d.iter().cloned().fold(f64::MIN, f64::max) - d.iter().cloned().fold(f64::MAX, f64::min);
        if spread <= 1e-8 {
            Ok(format!("final MSE diagonal equal within {spread:.2e}"))
        } else {
            Err(format!("MSE diagonal spread {spread:.2e} > 1e-8"))
        }
    });

    report.run("bench.descent_monotone", || {
        let mut r = rng(seed, 25);
        for _ in 0..5 {
            let spec = random_sum_mse_spec(&mut r, 4, 0.05);
            let out = bench::iterative_lmmse(&spec, &IterConfig::default()).map_err(|e| e.to_string())?;
            for w in out.trace.windows(2) {
                if w[1] > w[0] + 1e-12 * w[0].abs().max(1.0) {
                    return Err(format!("objective rose: {} → {}", w[0], w[1]));
                }
            }
        }
        Ok("coordinate-descent trace non-increasing on 5 instances".into())
    });

    report.run("bench.overlap_agreement", || {
        let mut r = rng(seed, 26);
        for _ in 0..3 {
            let h = linalg::complex_gaussian(3, 3, &mut r);
            let psi = linalg::random_psd(3, 0.05, &mut r).scale(0.05);
            let spec = ProblemSpec::new(
                h,
                psi,
                linalg::identity(3),
                1.0,
                4.0,
                ObjectiveCase::sum_mse(3),
            )
            .map_err(|e| e.to_string())?;
            let basis = mmop::reduce_to_mmop(&spec, BoundMode::Exact).map_err(|e| e.to_string())?;
            let f_sq = objectives::allocate(AllocationRule::SumMseWaterfill, &basis.gains(), spec.power)
                .map_err(|e| e.to_string())?;
            let sol = mmop::assemble_solution(&basis, &spec.psi, spec.noise_var, &f_sq, BoundMode::Exact)
                .map_err(|e| e.to_string())?;
            let closed = {
                let m = objectives::inner_matrix(&sol.f_opt, &spec).map_err(|e| e.to_string())?;
                let eigs = linalg::herm_eig(&m, EigOrder::Descending).map_err(|e| e.to_string())?;
                eigs.eigenvalues.iter().map(|&l| 1.0 / (1.0 + l.max(0.0))).sum::<f64>()
            };
            let cfg = IterConfig { max_iters: 2000, tol: 1e-13, seed: 0 };
            let iterative = *bench::iterative_lmmse(&spec, &cfg)
                .map_err(|e| e.to_string())?
                .trace
                .last()
                .unwrap();
            let rel = (iterative - closed).abs() / closed;
            if rel > 1e-5 {
                return Err(format!("closed {closed} vs iterative {iterative} ({rel:.2e})"));
            }
        }
        Ok("closed form and descent agree within 1e-5 on Σ ∝ I instances".into())
    });

    report
}

fn all_case_variants(n: usize, r: &mut ChaCha8Rng) -> Vec<(&'static str, ObjectiveCase)> {
    vec![
        ("case1", ObjectiveCase::Case1 { n_mat: linalg::random_psd(n, 0.4, r) }),
        ("case2", ObjectiveCase::Case2 { a_mat: linalg::complex_gaussian(n, n, r) }),
        ("case3", ObjectiveCase::Case3 { n_mat: linalg::random_psd(n, 0.4, r) }),
        (
            "case4",
            ObjectiveCase::Case4 {
                n_mat: linalg::random_psd(n, 0.4, r),
                m_mat: linalg::random_psd(2, 0.4, r),
            },
        ),
        (
            "case5",
            ObjectiveCase::Case5 {
                a_mat: linalg::complex_gaussian(n, n, r),
                n_mat: linalg::random_psd(n, 0.4, r),
            },
        ),
        ("case6", ObjectiveCase::Case6 { a_mat: linalg::complex_gaussian(n, n, r) }),
        (
            "case7-concave",
            ObjectiveCase::Case7 {
                schur: SchurKind::Concave,
                objective: objectives::lookup_objective("sum-mse").unwrap(),
            },
        ),
        (
            "case7-convex",
            ObjectiveCase::Case7 {
                schur: SchurKind::Convex,
                objective: objectives::lookup_objective("max-mse").unwrap(),
            },
        ),
        (
            "case8-concave",
            ObjectiveCase::Case8 {
                schur: SchurKind::Concave,
                objective: objectives::lookup_objective("prod-mse").unwrap(),
            },
        ),
        (
            "case8-convex",
            ObjectiveCase::Case8 {
                schur: SchurKind::Convex,
                objective: objectives::lookup_objective("prod-mse").unwrap(),
            },
        ),
    ]
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {} — {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_passes() {
        let report = run_verify(42);
        for c in &report.checks {
            assert!(c.passed, "{} failed: {}", c.name, c.detail);
        }
        assert!(report.checks.len() >= 25);
    }
}
