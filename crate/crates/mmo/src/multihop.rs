//! Multiple matrix variables: per-hop structured solutions, the serial
//! amplify-and-forward chain with its rotation alignment, and the parallel
//! multicarrier form with a joint water level.
//!
//! Per hop the single-variable structure applies unchanged (the joint
//! problem decouples), so `solve_hop` delegates to [`crate::mmop`]. What is
//! genuinely multi-hop is the rotation chain: with M_k the whitened,
//! saturated per-hop composite (all singular values in [0,1)), the
//! interleaved rotations Q_k = V_{M_k} U_{M_{k−1}}ᴴ collapse the chain
//! product M_K Q_K ⋯ M_1 Q_1 to a diagonal of singular-value products, which
//! attains the leading-product upper bound checked by [`theorem3_check`].
//! Evaluation walks the chain strictly left to right: hop 1 is the source
//! precoder, hop K the last relay before the destination.

use crate::linalg::{self, CMatrix, LinalgError};
use crate::mmop::{self, BoundMode, EigenmodeBasis, MmopError, ProblemSpec};
use crate::objectives::{self, AllocationRule, ObjectiveCase, ScalarObjective, SchurFamily, SchurKind};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MultihopError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("topology does not match the operation: {0}")]
    WrongTopology(String),
    #[error(transparent)]
    Mmop(#[from] MmopError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Per-hop problem data.
#[derive(Debug, Clone)]
pub struct Hop {
    pub h: CMatrix,
    pub psi: CMatrix,
    pub sigma: CMatrix,
    pub noise_var: f64,
    pub power: f64,
}

impl Hop {
    fn to_problem_spec(&self, power: f64) -> Result<ProblemSpec, MmopError> {
        let n = self.h.nrows().min(self.h.ncols());
        ProblemSpec::new(
            self.h.clone(),
            self.psi.clone(),
            self.sigma.clone(),
            self.noise_var,
            power,
            ObjectiveCase::sum_mse(n),
        )
    }
}

#[derive(Debug, Clone)]
pub enum Topology {
    Serial,
    Parallel { total_power: f64 },
}

/// Multi-hop design instance. The objective is one of the named scalar
/// objectives, which carries exactly the Schur family/kind the serial
/// rotation rules need.
#[derive(Debug, Clone)]
pub struct MultiHopSpec {
    pub hops: Vec<Hop>,
    pub topology: Topology,
    pub objective: &'static ScalarObjective,
}

/// One hop of a structured solution.
#[derive(Debug, Clone)]
pub struct HopSolution {
    pub f_k: CMatrix,
    /// Chain rotation; identity until [`chain_rotations`] has run.
    pub q_k: CMatrix,
    pub eta_fk: f64,
    pub basis_k: EigenmodeBasis,
    /// Diagonal of Λ_F (amplitudes).
    pub lambda_f: Vec<f64>,
    /// Whitened saturated composite [(K⁻¹ᐟ²HF)(K⁻¹ᐟ²HF)ᴴ + I]⁻¹ᐟ² (K⁻¹ᐟ²HF).
    pub m_k: CMatrix,
}

/// Whitened saturated composite of a hop design under the hop's statistics.
pub fn saturated_composite(hop: &Hop, f: &CMatrix) -> Result<CMatrix, MultihopError> {
    let k = mmop::effective_noise_cov(f, &hop.psi, &hop.sigma, hop.noise_var);
    let k_inv_sqrt = linalg::psd_inv_sqrt(&k)?;
    let g = k_inv_sqrt * &hop.h * f;
    let gram = linalg::herm_part(&(&g * g.adjoint())) + linalg::identity(g.nrows());
    let w = linalg::psd_inv_sqrt(&gram)?;
    Ok(w * g)
}

/// Solve one hop with the single-variable engine and attach its saturated
/// composite.
pub fn solve_hop(hop: &Hop, mode: BoundMode, weights: &[f64]) -> Result<HopSolution, MultihopError> {
    let spec = hop.to_problem_spec(hop.power)?;
    let sol = mmop::solve(&spec, mode, weights)?;
    let m_k = saturated_composite(hop, &sol.f_opt)?;
    Ok(HopSolution {
        q_k: linalg::identity(sol.f_opt.ncols()),
        f_k: sol.f_opt,
        eta_fk: sol.eta_f,
        basis_k: sol.basis,
        lambda_f: sol.lambda_f,
        m_k,
    })
}

/// Solve one hop with a named allocation rule instead of explicit weights.
pub fn solve_hop_with_rule(hop: &Hop, mode: BoundMode, rule: AllocationRule) -> Result<HopSolution, MultihopError> {
    let spec = hop.to_problem_spec(hop.power)?;
    let basis = mmop::reduce_to_mmop(&spec, mode)?;
    let f_sq = objectives::allocate(rule, &basis.gains(), hop.power)
        .map_err(|e| MultihopError::DimensionMismatch(e.to_string()))?;
    let sol = mmop::assemble_solution(&basis, &hop.psi, hop.noise_var, &f_sq, mode)?;
    let m_k = saturated_composite(hop, &sol.f_opt)?;
    Ok(HopSolution {
        q_k: linalg::identity(sol.f_opt.ncols()),
        f_k: sol.f_opt,
        eta_fk: sol.eta_f,
        basis_k: sol.basis,
        lambda_f: sol.lambda_f,
        m_k,
    })
}

/// Chain rotations Q_k = V_{M_k} U_{M_{k−1}}ᴴ for k ≥ 2, with Q_1 chosen by
/// the objective's Schur family and kind:
/// concave families diagonalize the chain; the additive Schur-convex family
/// equalizes the chain's diagonal via a DFT rotation; the multiplicative
/// Schur-convex family equalizes the Cholesky diagonal of the chain MSE.
pub fn chain_rotations(
    hops: &[HopSolution],
    family: SchurFamily,
    kind: SchurKind,
) -> Result<Vec<CMatrix>, MultihopError> {
    if hops.is_empty() {
        return Err(MultihopError::DimensionMismatch("empty chain".into()));
    }
    let svds: Vec<linalg::Svd> = hops
        .iter()
        .map(|h| linalg::svd(&h.m_k))
        .collect::<Result<_, _>>()?;
    for (k, pair) in svds.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        if next.v.nrows() != next.v.nrows() || prev.u.nrows() != hops[k].m_k.nrows() {
            return Err(MultihopError::DimensionMismatch("chain SVD shapes".into()));
        }
        if next.v.ncols() != prev.u.ncols() {
            return Err(MultihopError::DimensionMismatch(format!(
                "hop {} output rank {} vs hop {} input rank {}",
                k,
                prev.u.ncols(),
                k + 1,
                next.v.ncols()
            )));
        }
    }
    let mut qs = Vec::with_capacity(hops.len());
    // Q_1: start from the diagonalizer V_{M_1}.
    let v1 = &svds[0].v;
    let n1 = v1.nrows();
    if v1.ncols() != n1 {
        return Err(MultihopError::DimensionMismatch(
            "rank-deficient first hop; chain rotation needs a full basis".into(),
        ));
    }
    let q1 = match kind {
        SchurKind::Concave => v1.clone(),
        SchurKind::Convex => match family {
            SchurFamily::Additive => v1 * crate::unitary::dft_matrix(n1).adjoint(),
            SchurFamily::Multiplicative => {
                // Equal-diagonal Cholesky of the diagonal chain MSE.
                let prod = chain_singular_products(&svds);
                let mse: Vec<f64> = prod.iter().map(|&p| (1.0 - p * p).max(1e-300)).collect();
                let rot = crate::unitary::equal_diag_cholesky_rotation(&linalg::diag(&mse))
                    .map_err(|e| MultihopError::DimensionMismatch(e.to_string()))?;
                v1 * rot.q
            }
        },
    };
    qs.push(q1);
    for k in 1..hops.len() {
        qs.push(&svds[k].v * svds[k - 1].u.adjoint());
    }
    Ok(qs)
}

/// Per-mode products Π_k σ_i(M_k) of the aligned chain.
fn chain_singular_products(svds: &[linalg::Svd]) -> Vec<f64> {
    let n = svds.iter().map(|s| s.singular_values.len()).min().unwrap_or(0);
    (0..n)
        .map(|i| svds.iter().map(|s| s.singular_values[i]).product())
        .collect()
}

/// T = M_K Q_K ⋯ M_1 Q_1 for given designs.
pub fn chain_matrix(hops: &[HopSolution], qs: &[CMatrix]) -> Result<CMatrix, MultihopError> {
    if hops.len() != qs.len() || hops.is_empty() {
        return Err(MultihopError::DimensionMismatch("hops vs rotations".into()));
    }
    let mut t = &hops[0].m_k * &qs[0];
    for k in 1..hops.len() {
        t = &hops[k].m_k * &qs[k] * t;
    }
    Ok(t)
}

/// Chain MSE matrix I − TᴴT.
pub fn chain_mse_matrix(hops: &[HopSolution], qs: &[CMatrix]) -> Result<CMatrix, MultihopError> {
    let t = chain_matrix(hops, qs)?;
    let n = t.ncols();
    Ok(linalg::herm_part(&(linalg::identity(n) - t.adjoint() * t)))
}

/// Chain MSE matrix of externally designed hops: per-hop composites are
/// rebuilt from the given precoders under each hop's (true) statistics, then
/// interleaved with the given rotations. Used to score a design chain under
/// statistics it may not have been designed for.
pub fn evaluate_chain_mse(
    hops: &[Hop],
    precoders: &[CMatrix],
    qs: &[CMatrix],
) -> Result<CMatrix, MultihopError> {
    if hops.len() != precoders.len() || hops.len() != qs.len() || hops.is_empty() {
        return Err(MultihopError::DimensionMismatch("hops vs designs vs rotations".into()));
    }
    let mut t = saturated_composite(&hops[0], &precoders[0])? * &qs[0];
    for k in 1..hops.len() {
        t = saturated_composite(&hops[k], &precoders[k])? * &qs[k] * t;
    }
    let n = t.ncols();
    Ok(linalg::herm_part(&(linalg::identity(n) - t.adjoint() * t)))
}

/// Leading singular-value product inequality for an ordered matrix list:
/// Π_{i≤k} σ_i(A_1⋯A_K) ≤ Π_{i≤k} Π_j σ_i(A_j) for every k up to the
/// smallest dimension.
pub fn theorem3_check(mats: &[CMatrix]) -> Result<bool, MultihopError> {
    if mats.is_empty() {
        return Err(MultihopError::DimensionMismatch("empty list".into()));
    }
    for pair in mats.windows(2) {
        if pair[0].ncols() != pair[1].nrows() {
            return Err(MultihopError::DimensionMismatch(format!(
                "{}x{} then {}x{}",
                pair[0].nrows(),
                pair[0].ncols(),
                pair[1].nrows(),
                pair[1].ncols()
            )));
        }
    }
    let mut prod = mats[0].clone();
    for m in &mats[1..] {
        prod = &prod * m;
    }
    let sv_prod = linalg::svd(&prod)?.singular_values;
    let sv_each: Vec<Vec<f64>> = mats
        .iter()
        .map(|m| linalg::svd(m).map(|s| s.singular_values))
        .collect::<Result<_, _>>()?;
    let dim = mats
        .iter()
        .map(|m| m.nrows().min(m.ncols()))
        .min()
        .unwrap();
    let mut lhs = 1.0;
    let mut rhs = 1.0;
    for k in 0..dim.min(sv_prod.len()) {
        lhs *= sv_prod[k];
        rhs *= sv_each.iter().map(|s| s[k]).product::<f64>();
        if lhs > rhs + 1e-9 * rhs.max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Joint allocation for the parallel (multicarrier) topology: one water
/// level across the union of all carriers' eigenmodes under the shared
/// budget. Each carrier keeps its single-variable structure; the whitening
/// constants use the shared budget as the per-carrier power cap.
pub fn solve_parallel(spec: &MultiHopSpec, mode: BoundMode) -> Result<Vec<HopSolution>, MultihopError> {
    let total_power = match spec.topology {
        Topology::Parallel { total_power } => total_power,
        Topology::Serial => {
            return Err(MultihopError::WrongTopology("solve_parallel needs Parallel".into()))
        }
    };
    let mut bases = Vec::with_capacity(spec.hops.len());
    let mut pooled: Vec<(usize, usize, f64)> = Vec::new(); // (carrier, mode, gain)
    for (c, hop) in spec.hops.iter().enumerate() {
        let pspec = hop.to_problem_spec(total_power)?;
        let basis = mmop::reduce_to_mmop(&pspec, mode)?;
        for (i, g) in basis.gains().iter().enumerate() {
            pooled.push((c, i, *g));
        }
        bases.push(basis);
    }
    let gains: Vec<f64> = pooled.iter().map(|&(_, _, g)| g).collect();
    let f_sq = pooled_waterfill(spec.objective.alloc, &gains, total_power)?;

    let mut out = Vec::with_capacity(spec.hops.len());
    for (c, (hop, basis)) in spec.hops.iter().zip(bases).enumerate() {
        let alloc: Vec<f64> = pooled
            .iter()
            .zip(&f_sq)
            .filter(|(&(cc, _, _), _)| cc == c)
            .map(|(_, &f)| f)
            .collect();
        let sol = mmop::assemble_solution(&basis, &hop.psi, hop.noise_var, &alloc, mode)?;
        let m_k = saturated_composite(hop, &sol.f_opt)?;
        out.push(HopSolution {
            q_k: linalg::identity(sol.f_opt.ncols()),
            f_k: sol.f_opt,
            eta_fk: sol.eta_f,
            basis_k: sol.basis,
            lambda_f: sol.lambda_f,
            m_k,
        });
    }
    Ok(out)
}

/// Shared-level allocation across an unordered pool of gains.
fn pooled_waterfill(rule: AllocationRule, gains: &[f64], power: f64) -> Result<Vec<f64>, MultihopError> {
    let g_max = gains.iter().cloned().fold(0.0, f64::max);
    if g_max <= 0.0 {
        return Err(MultihopError::DimensionMismatch("all carrier gains are zero".into()));
    }
    let active: Vec<bool> = gains.iter().map(|&g| g > 1e-24 * g_max).collect();
    let alloc_at = |level: f64| -> Vec<f64> {
        gains
            .iter()
            .zip(&active)
            .map(|(&g, &a)| {
                if !a {
                    return 0.0;
                }
                match rule {
                    AllocationRule::CapacityWaterfill => (level - 1.0 / g).max(0.0),
                    // level plays the role of 1/√μ here
                    AllocationRule::SumMseWaterfill => (level / g.sqrt() - 1.0 / g).max(0.0),
                }
            })
            .collect()
    };
    let total = |level: f64| -> f64 { alloc_at(level).iter().sum() };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while total(hi) < power {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > power {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(alloc_at(0.5 * (lo + hi)))
}
