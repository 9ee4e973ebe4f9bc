//! Single-variable matrix-monotonic optimization engine.
//!
//! The pipeline is: whiten the problem into the composite channel
//! Π = K_Ψ^{-1/2} H (αPΨ + σ_n²I)^{-1/2}, take its SVD, allocate power over
//! the squared singular values by weighted water-filling, and assemble
//!
//! ```text
//! F = √η_f (αPΨ + σ_n²I)^{-1/2} V_Π Λ_F
//! ```
//!
//! with η_f = P / Tr[(αPΨ + σ_n²I)^{-1} V_Π Λ_F Λ_Fᴴ V_Πᴴ]. The inner
//! unitary is fixed to identity here; the objective-specific rotation is the
//! [`crate::unitary`] module's job. α = λ_min(Σ) gives the exact solution
//! when Ψ ∝ I or Σ ∝ I and a lower-bound design otherwise; α = λ_max(Σ)
//! gives the matching upper-bound design.

use crate::linalg::{self, CMatrix, EigOrder, LinalgError};
use crate::objectives::ObjectiveCase;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MmopError {
    #[error("exact mode requires Psi or Sigma proportional to the identity")]
    ExactModeUnavailable,
    #[error("weights violate the ordering constraint at position {position}")]
    WeightOrderViolation { position: usize },
    #[error("all eigenmode gains are zero")]
    AllGainsZero,
    #[error("a positive target sits on a zero-gain mode (index {index})")]
    InfeasibleTarget { index: usize },
    #[error("oracle instance too large: {0}")]
    TooLarge(String),
    #[error("invalid problem data: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which design surrogate the solver targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// True optimum; only valid when Ψ ∝ I or Σ ∝ I (uses α = λ_min(Σ)).
    Exact,
    /// Lower-bound design, α = λ_min(Σ); exact in the proportional cases.
    Lower,
    /// Upper-bound design, α = λ_max(Σ).
    Upper,
}

/// One single-hop design instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    /// Channel, N_R×N_T.
    pub h: CMatrix,
    /// Transmit-side error correlation, N_T×N_T PSD.
    pub psi: CMatrix,
    /// Receive-side error correlation, N_R×N_R PSD.
    pub sigma: CMatrix,
    /// Noise power σ_n² > 0.
    pub noise_var: f64,
    /// Transmit power budget P > 0.
    pub power: f64,
    pub objective: ObjectiveCase,
}

impl ProblemSpec {
    pub fn new(
        h: CMatrix,
        psi: CMatrix,
        sigma: CMatrix,
        noise_var: f64,
        power: f64,
        objective: ObjectiveCase,
    ) -> Result<Self, MmopError> {
        let (n_r, n_t) = (h.nrows(), h.ncols());
        if psi.shape() != (n_t, n_t) {
            return Err(MmopError::InvalidSpec(format!(
                "Psi is {}x{}, want {n_t}x{n_t}",
                psi.nrows(),
                psi.ncols()
            )));
        }
        if sigma.shape() != (n_r, n_r) {
            return Err(MmopError::InvalidSpec(format!(
                "Sigma is {}x{}, want {n_r}x{n_r}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if !noise_var.is_finite() || noise_var <= 0.0 {
            return Err(MmopError::InvalidSpec("noise_var must be positive".into()));
        }
        if !power.is_finite() || power <= 0.0 {
            return Err(MmopError::InvalidSpec("power must be positive".into()));
        }
        for (name, m) in [("Psi", &psi), ("Sigma", &sigma)] {
            if linalg::herm_asymmetry(m) > linalg::HERM_TOL {
                return Err(MmopError::InvalidSpec(format!("{name} is not Hermitian")));
            }
            let (lam_max, lam_min) = linalg::eig_range(m)?;
            if lam_min < -1e-8 * lam_max.max(linalg::ABS_FLOOR) {
                return Err(MmopError::InvalidSpec(format!("{name} is not PSD")));
            }
        }
        Ok(Self { h, psi, sigma, noise_var, power, objective })
    }

    /// Number of spatial streams, min(N_T, N_R).
    pub fn streams(&self) -> usize {
        self.h.nrows().min(self.h.ncols())
    }
}

/// Effective noise covariance K_X = Tr(XXᴴΨ)Σ + σ_n²I.
pub fn effective_noise_cov(x: &CMatrix, psi: &CMatrix, sigma: &CMatrix, noise_var: f64) -> CMatrix {
    let t = linalg::real_trace(&(x * x.adjoint() * psi));
    sigma.scale(t) + linalg::identity(sigma.nrows()).scale(noise_var)
}

/// Whitened eigen-basis of one problem instance.
#[derive(Debug, Clone)]
pub struct EigenmodeBasis {
    pub u_pi: CMatrix,
    /// Singular values of Π, descending.
    pub lambda_pi: Vec<f64>,
    pub v_pi: CMatrix,
    pub k_psi: CMatrix,
    /// λ_min(Σ) in Exact/Lower mode, λ_max(Σ) in Upper mode.
    pub alpha: f64,
    /// (αPΨ + σ_n²I)^{-1/2}, cached for assembly.
    pub whitener: CMatrix,
}

impl EigenmodeBasis {
    /// Squared singular values λ_Π,n², the water-filling gains.
    pub fn gains(&self) -> Vec<f64> {
        self.lambda_pi.iter().map(|&v| v * v).collect()
    }
}

/// The assembled design with its factors.
#[derive(Debug, Clone)]
pub struct PrecoderSolution {
    /// F with the inner unitary fixed to identity; the final design is
    /// `f_opt * q_opt`.
    pub f_opt: CMatrix,
    /// Diagonal of Λ_F (amplitudes, not powers).
    pub lambda_f: Vec<f64>,
    pub eta_f: f64,
    pub q_opt: CMatrix,
    pub mode: BoundMode,
    pub basis: EigenmodeBasis,
}

impl PrecoderSolution {
    /// Tr(F Fᴴ), the spent power.
    pub fn spent_power(&self) -> f64 {
        linalg::real_trace(&(&self.f_opt * self.f_opt.adjoint()))
    }

    /// Surrogate objective eigenvalues λ_Π,n² f_n² (descending by Lemma-4
    /// ordering).
    pub fn bound_eigenvalues(&self) -> Vec<f64> {
        self.basis
            .gains()
            .iter()
            .zip(&self.lambda_f)
            .map(|(&g, &f)| g * f * f)
            .collect()
    }
}

fn proportional_to_identity(m: &CMatrix) -> bool {
    let n = m.nrows();
    let mean = m.trace().re / n as f64;
    let dev = (m - linalg::identity(n).scale(mean)).norm();
    dev <= 1e-9 * m.norm().max(linalg::ABS_FLOOR)
}

/// Reduce an instance to its whitened eigen-basis.
pub fn reduce_to_mmop(spec: &ProblemSpec, mode: BoundMode) -> Result<EigenmodeBasis, MmopError> {
    if mode == BoundMode::Exact
        && !(proportional_to_identity(&spec.psi) || proportional_to_identity(&spec.sigma))
    {
        return Err(MmopError::ExactModeUnavailable);
    }
    let (sigma_max, sigma_min) = linalg::eig_range(&spec.sigma)?;
    let alpha = match mode {
        BoundMode::Exact | BoundMode::Lower => sigma_min.max(0.0),
        BoundMode::Upper => sigma_max.max(0.0),
    };
    let (psi_max, _) = linalg::eig_range(&spec.psi)?;
    let psi_max = psi_max.max(0.0);

    let n_r = spec.h.nrows();
    let denom = spec.power * psi_max * alpha + spec.noise_var;
    debug_assert!(denom > 0.0, "sigma_n^2 > 0 keeps the scaling positive");
    let k_psi = spec.sigma.scale(spec.power * psi_max / denom)
        + linalg::identity(n_r).scale(spec.noise_var / denom);

    let s = spec.psi.scale(alpha * spec.power)
        + linalg::identity(spec.h.ncols()).scale(spec.noise_var);
    let whitener = linalg::psd_inv_sqrt(&s)?;
    let k_psi_inv_sqrt = linalg::psd_inv_sqrt(&k_psi)?;

    let pi = &k_psi_inv_sqrt * &spec.h * &whitener;
    let svd = linalg::svd(&pi)?;
    Ok(EigenmodeBasis {
        u_pi: svd.u,
        lambda_pi: svd.singular_values,
        v_pi: svd.v,
        k_psi,
        alpha,
        whitener,
    })
}

/// Weighted water-filling problem over eigenmode gains.
#[derive(Debug, Clone)]
pub struct WaterfillInput {
    gains: Vec<f64>,
    weights: Vec<f64>,
    power: f64,
}

impl WaterfillInput {
    /// Validates the ordering constraint √(w_n g_n) non-increasing; weights
    /// that violate it are rejected, not reordered.
    pub fn new(gains: Vec<f64>, weights: Vec<f64>, power: f64) -> Result<Self, MmopError> {
        if gains.len() != weights.len() {
            return Err(MmopError::InvalidSpec(format!(
                "{} gains vs {} weights",
                gains.len(),
                weights.len()
            )));
        }
        if !power.is_finite() || power <= 0.0 {
            return Err(MmopError::InvalidSpec("power must be positive".into()));
        }
        if gains.iter().any(|&g| g < 0.0) || weights.iter().any(|&w| !w.is_finite() || w <= 0.0) {
            return Err(MmopError::InvalidSpec(
                "gains must be nonnegative and weights positive".into(),
            ));
        }
        for (i, pair) in gains.windows(2).enumerate() {
            if pair[0] < pair[1] - 1e-12 * pair[0].abs().max(1.0) {
                return Err(MmopError::InvalidSpec(format!("gains not descending at {i}")));
            }
        }
        let ordered: Vec<f64> = gains.iter().zip(&weights).map(|(&g, &w)| (w * g).sqrt()).collect();
        for (i, pair) in ordered.windows(2).enumerate() {
            if pair[1] > pair[0] + 1e-12 * pair[0].max(1.0) {
                return Err(MmopError::WeightOrderViolation { position: i + 1 });
            }
        }
        Ok(Self { gains, weights, power })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn power(&self) -> f64 {
        self.power
    }
}

/// Water-filling solution f_n² = (√(w_n/(g_n μ)) − 1/g_n)⁺ with Σf_n² = P.
///
/// Total power is strictly decreasing in μ wherever positive, so the dual
/// level is found by bisection. Modes whose singular value λ_Π,n falls below
/// 1e-12 of the largest are treated as dead and receive zero.
pub fn waterfill(input: &WaterfillInput) -> Result<(Vec<f64>, f64), MmopError> {
    let g_max = input.gains.iter().cloned().fold(0.0, f64::max);
    if g_max <= 0.0 {
        return Err(MmopError::AllGainsZero);
    }
    // gains are squared singular values, so the λ cutoff squares too
    let cutoff = 1e-24 * g_max;
    let active: Vec<bool> = input.gains.iter().map(|&g| g > cutoff).collect();
    let alloc = |mu: f64| -> Vec<f64> {
        input
            .gains
            .iter()
            .zip(&input.weights)
            .zip(&active)
            .map(|((&g, &w), &a)| {
                if a {
                    ((w / (g * mu)).sqrt() - 1.0 / g).max(0.0)
                } else {
                    0.0
                }
            })
            .collect()
    };
    let total = |mu: f64| -> f64 { alloc(mu).iter().sum() };

    // All powers clamp to zero once mu >= max_n w_n g_n.
    let mut hi = input
        .gains
        .iter()
        .zip(&input.weights)
        .zip(&active)
        .filter(|(_, &a)| a)
        .map(|((&g, &w), _)| w * g)
        .fold(0.0, f64::max)
        .max(linalg::ABS_FLOOR);
    let mut lo = hi;
    while total(lo) < input.power {
        lo *= 0.5;
        if lo < 1e-300 {
            break;
        }
    }
    if total(lo) < input.power {
        return Err(MmopError::InvalidSpec("cannot bracket the water level".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > input.power {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    let f_sq = alloc(mu);
    debug_assert!((f_sq.iter().sum::<f64>() - input.power).abs() <= 1e-9 * input.power);
    Ok((f_sq, mu))
}

/// Assemble the structured precoder on a basis for a given allocation of
/// squared amplitudes (Tr Λ_FΛ_Fᴴ = spent F̃-power).
///
/// η_f comes from the self-consistency fixed point, which coincides with the
/// closed form whenever the allocation exhausts the P embedded in the basis.
pub fn assemble_solution(
    basis: &EigenmodeBasis,
    psi: &CMatrix,
    noise_var: f64,
    f_sq: &[f64],
    mode: BoundMode,
) -> Result<PrecoderSolution, MmopError> {
    let n_modes = basis.lambda_pi.len();
    if f_sq.len() != n_modes {
        return Err(MmopError::InvalidSpec(format!(
            "{} allocations vs {} modes",
            f_sq.len(),
            n_modes
        )));
    }
    let lambda_f: Vec<f64> = f_sq.iter().map(|&v| v.max(0.0).sqrt()).collect();
    // V_Π is thin (N_T×n_modes); pad the diagonal factor accordingly.
    let v_lambda = {
        let v_cols = basis.v_pi.ncols();
        let lf = linalg::rect_diag(v_cols, n_modes, &lambda_f);
        &basis.v_pi * lf
    };
    let core = &basis.whitener * &v_lambda; // (αPΨ+σ²I)^{-1/2} V_Π Λ_F
    // η_f fixed point: η = α·Tr(F Fᴴ Ψ) + σ², with F = √η·core.
    let coupling = linalg::real_trace(&(&core * core.adjoint() * psi)) * basis.alpha;
    if coupling >= 1.0 {
        return Err(MmopError::InfeasibleTarget { index: 0 });
    }
    let eta_f = noise_var / (1.0 - coupling);
    let f_opt = core.scale(eta_f.sqrt());
    Ok(PrecoderSolution {
        f_opt,
        lambda_f,
        eta_f,
        q_opt: linalg::identity(n_modes),
        mode,
        basis: basis.clone(),
    })
}

/// Closed-form η_f of the structured solution, P / Tr[(αPΨ+σ²I)^{-1} V Λ² Vᴴ].
pub fn eta_closed_form(basis: &EigenmodeBasis, power: f64, f_sq: &[f64]) -> f64 {
    let v_cols = basis.v_pi.ncols();
    let lf2 = linalg::rect_diag(v_cols, v_cols, &f_sq.iter().map(|&v| v.max(0.0)).collect::<Vec<_>>());
    let inner = &basis.v_pi * lf2 * basis.v_pi.adjoint();
    let s_inv = &basis.whitener * &basis.whitener;
    power / linalg::real_trace(&(s_inv * inner))
}

/// Solve one instance for a caller-supplied weight vector.
pub fn solve(spec: &ProblemSpec, mode: BoundMode, weights: &[f64]) -> Result<PrecoderSolution, MmopError> {
    let basis = reduce_to_mmop(spec, mode)?;
    let input = WaterfillInput::new(basis.gains(), weights.to_vec(), spec.power)?;
    let (f_sq, _mu) = waterfill(&input)?;
    let sol = assemble_solution(&basis, &spec.psi, spec.noise_var, &f_sq, mode)?;
    debug_assert!({
        let closed = eta_closed_form(&basis, spec.power, &f_sq);
        (closed - sol.eta_f).abs() <= 1e-8 * closed.abs().max(1.0)
    });
    Ok(sol)
}

/// Minimum-power design achieving a target spectrum t_n = λ_Π,n² f_n² on the
/// given basis.
pub fn solve_qos(
    basis: &EigenmodeBasis,
    targets: &[f64],
    psi: &CMatrix,
    noise_var: f64,
    alpha: f64,
) -> Result<PrecoderSolution, MmopError> {
    if (alpha - basis.alpha).abs() > 1e-12 * basis.alpha.abs().max(1.0) {
        return Err(MmopError::InvalidSpec("alpha does not match the basis".into()));
    }
    let gains = basis.gains();
    if targets.len() != gains.len() {
        return Err(MmopError::InvalidSpec(format!(
            "{} targets vs {} modes",
            targets.len(),
            gains.len()
        )));
    }
    for (i, pair) in targets.windows(2).enumerate() {
        if pair[1] > pair[0] + 1e-12 * pair[0].max(1.0) {
            return Err(MmopError::InvalidSpec(format!("targets not descending at {i}")));
        }
    }
    let g_max = gains.iter().cloned().fold(0.0, f64::max).max(linalg::ABS_FLOOR);
    let cutoff = 1e-24 * g_max;
    let mut f_sq = Vec::with_capacity(targets.len());
    for (i, (&t, &g)) in targets.iter().zip(&gains).enumerate() {
        if t < 0.0 {
            return Err(MmopError::InvalidSpec(format!("negative target at {i}")));
        }
        if g <= cutoff {
            if t > 0.0 {
                return Err(MmopError::InfeasibleTarget { index: i });
            }
            f_sq.push(0.0);
        } else {
            f_sq.push(t / g);
        }
    }
    let mode = BoundMode::Lower;
    assemble_solution(basis, psi, noise_var, &f_sq, mode)
}

/// One enumerated allocation with its honestly evaluated objective spectrum.
#[derive(Debug, Clone)]
pub struct ParetoPoint {
    pub allocation: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

/// Brute-force grid oracle over the power simplex.
///
/// Every allocation keeps the structured rotation V_Π but is evaluated
/// through the true pipeline: F is assembled, K_F is rebuilt from F, and the
/// eigenvalues of FᴴHᴴK_F⁻¹HF are computed directly. Nothing about the
/// water-filling shortcut is trusted here.
pub fn pareto_oracle(
    spec: &ProblemSpec,
    mode: BoundMode,
    grid: usize,
) -> Result<Vec<ParetoPoint>, MmopError> {
    let n_modes = spec.streams();
    if n_modes > 3 {
        return Err(MmopError::TooLarge(format!("{n_modes} modes, oracle supports up to 3")));
    }
    if grid > 200 || grid == 0 {
        return Err(MmopError::TooLarge(format!("grid {grid}, want 1..=200")));
    }
    let basis = reduce_to_mmop(spec, mode)?;
    let mut points = Vec::new();
    let step = spec.power / grid as f64;
    let mut evaluate = |alloc: &[f64]| -> Result<(), MmopError> {
        let sol = assemble_solution(&basis, &spec.psi, spec.noise_var, alloc, mode)?;
        let m = crate::objectives::inner_matrix(&sol.f_opt, spec)
            .map_err(|e| MmopError::InvalidSpec(e.to_string()))?;
        let eigs = linalg::herm_eig(&m, EigOrder::Descending)?
            .eigenvalues
            .iter()
            .map(|&v| v.max(0.0))
            .collect();
        points.push(ParetoPoint { allocation: alloc.to_vec(), eigenvalues: eigs });
        Ok(())
    };
    match n_modes {
        1 => {
            evaluate(&[spec.power])?;
        }
        2 => {
            for i in 0..=grid {
                for j in 0..=(grid - i) {
                    evaluate(&[i as f64 * step, j as f64 * step])?;
                }
            }
        }
        _ => {
            for i in 0..=grid {
                for j in 0..=(grid - i) {
                    let k = grid - i - j;
                    evaluate(&[i as f64 * step, j as f64 * step, k as f64 * step])?;
                }
            }
        }
    }
    Ok(points)
}

/// True (unrotated-invariant) objective spectrum of a design under the
/// spec's statistics: λ(FᴴHᴴK_F⁻¹HF), descending.
pub fn true_eigenvalues(f: &CMatrix, spec: &ProblemSpec) -> Result<Vec<f64>, MmopError> {
    let m = crate::objectives::inner_matrix(f, spec).map_err(|e| MmopError::InvalidSpec(e.to_string()))?;
    Ok(linalg::herm_eig(&m, EigOrder::Descending)?
        .eigenvalues
        .iter()
        .map(|&v| v.max(0.0))
        .collect())
}
