//! The eight design objectives in their matrix form, their spectrum-level
//! reductions, and the registry of named scalar objectives used by the
//! experiment harness.
//!
//! `eval_f_matrix` evaluates an objective exactly as written on a candidate
//! matrix X (minimization sense). `eval_f_vector` evaluates the same
//! objective after the optimal inner rotation has been absorbed, as a
//! function of the eigenvalues of XᴴHᴴK_X⁻¹HX alone; the two agree at the
//! rotation produced by [`crate::unitary::optimal_q`], which is what the
//! consistency tests pin down.

use crate::linalg::{self, CMatrix, LinalgError};
use crate::mmop::{self, ProblemSpec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("effective noise covariance is singular")]
    SingularK,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix argument must be positive definite")]
    NotPd,
    #[error("unknown objective {0:?}")]
    UnknownObjective(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Schur direction of a scalarized objective within its family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurKind {
    Concave,
    Convex,
}

/// Whether the objective acts on MSE diagonals (additive family) or on the
/// squared Cholesky diagonals (multiplicative family).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurFamily {
    Additive,
    Multiplicative,
}

/// Closed-form power allocation family for a named objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationRule {
    /// f_n² = (ν − 1/g_n)⁺, common water level ν.
    CapacityWaterfill,
    /// f_n² = (√(1/(g_n μ)) − 1/g_n)⁺, the unit-weight case of the general
    /// weighted rule.
    SumMseWaterfill,
}

/// A named scalar objective: evaluation plus its Schur classification and
/// allocation rule. Entries are static; look them up by CLI name.
#[derive(Clone, Copy)]
pub struct ScalarObjective {
    pub name: &'static str,
    pub family: SchurFamily,
    pub kind: SchurKind,
    pub alloc: AllocationRule,
    /// Minimization-sense value on the family's diagonal vector.
    pub eval: fn(&[f64]) -> f64,
}

impl std::fmt::Debug for ScalarObjective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarObjective").field("name", &self.name).finish()
    }
}

fn sum(d: &[f64]) -> f64 {
    d.iter().sum()
}
fn max(d: &[f64]) -> f64 {
    d.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}
fn log_sum(d: &[f64]) -> f64 {
    d.iter().map(|&x| x.ln()).sum()
}
fn product(d: &[f64]) -> f64 {
    d.iter().product()
}

static REGISTRY: [ScalarObjective; 4] = [
    ScalarObjective {
        name: "sum-mse",
        family: SchurFamily::Additive,
        kind: SchurKind::Concave,
        alloc: AllocationRule::SumMseWaterfill,
        eval: sum,
    },
    ScalarObjective {
        name: "max-mse",
        family: SchurFamily::Additive,
        kind: SchurKind::Convex,
        alloc: AllocationRule::SumMseWaterfill,
        eval: max,
    },
    ScalarObjective {
        // Minimization form Σ ln d_i; the achieved rate in nats is the
        // negative of this value.
        name: "capacity",
        family: SchurFamily::Additive,
        kind: SchurKind::Concave,
        alloc: AllocationRule::CapacityWaterfill,
        eval: log_sum,
    },
    ScalarObjective {
        name: "prod-mse",
        family: SchurFamily::Multiplicative,
        kind: SchurKind::Concave,
        alloc: AllocationRule::CapacityWaterfill,
        eval: product,
    },
];

/// The shipped scalar objectives (sum-mse, max-mse, capacity, prod-mse).
pub fn named_scalar_objectives() -> &'static [ScalarObjective] {
    &REGISTRY
}

pub fn lookup_objective(name: &str) -> Result<&'static ScalarObjective, ObjectiveError> {
    REGISTRY
        .iter()
        .find(|o| o.name == name)
        .ok_or_else(|| ObjectiveError::UnknownObjective(name.to_string()))
}

/// Achieved rate in bits for a vector of per-stream MSE diagonals.
pub fn capacity_bits_from_mse_diag(d: &[f64]) -> f64 {
    -d.iter().map(|&x| x.log2()).sum::<f64>()
}

/// Tagged union over the eight design objectives with their constant
/// matrices.
#[derive(Debug, Clone)]
pub enum ObjectiveCase {
    /// −log|XᴴHᴴK⁻¹HX + N|, N positive definite.
    Case1 { n_mat: CMatrix },
    /// −log|AᴴXᴴHᴴK⁻¹HXA + I|, A arbitrary complex.
    Case2 { a_mat: CMatrix },
    /// Tr[(XᴴHᴴK⁻¹HX + N)⁻¹], N positive definite.
    Case3 { n_mat: CMatrix },
    /// Tr[((XᴴHᴴK⁻¹HX)⊗M + N⊗M)⁻¹], M positive definite.
    Case4 { n_mat: CMatrix, m_mat: CMatrix },
    /// log|Aᴴ(XᴴHᴴK⁻¹HX + I)⁻¹A + N|.
    Case5 { a_mat: CMatrix, n_mat: CMatrix },
    /// Tr[Aᴴ(XᴴHᴴK⁻¹HX + I)⁻¹A].
    Case6 { a_mat: CMatrix },
    /// f(d[(XᴴHᴴK⁻¹HX + I)⁻¹]) with f increasing and additively
    /// Schur-concave/convex.
    Case7 { schur: SchurKind, objective: &'static ScalarObjective },
    /// f(d²\[L\]), LLᴴ = (XᴴHᴴK⁻¹HX + I)⁻¹, f increasing and multiplicatively
    /// Schur-concave/convex.
    Case8 { schur: SchurKind, objective: &'static ScalarObjective },
}

impl ObjectiveCase {
    /// Sum-MSE instance of Case 3 (N = I), the default experiment objective.
    pub fn sum_mse(streams: usize) -> Self {
        ObjectiveCase::Case3 { n_mat: linalg::identity(streams) }
    }
}

/// MSE matrix (QᴴFᴴHᴴK_F⁻¹HFQ + I)⁻¹ of a linear design.
#[derive(Debug, Clone)]
pub struct MseMatrix {
    pub value: CMatrix,
}

fn logdet_pd(m: &CMatrix) -> Result<f64, ObjectiveError> {
    let chol = m.clone().cholesky().ok_or(ObjectiveError::NotPd)?;
    let l = chol.l();
    Ok(2.0 * (0..m.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>())
}

fn inverse_pd(m: &CMatrix) -> Result<CMatrix, ObjectiveError> {
    Ok(m.clone().cholesky().ok_or(ObjectiveError::NotPd)?.inverse())
}

/// XᴴHᴴK_X⁻¹HX for a candidate X under the spec's statistics.
pub fn inner_matrix(x: &CMatrix, spec: &ProblemSpec) -> Result<CMatrix, ObjectiveError> {
    if spec.h.ncols() != x.nrows() {
        return Err(ObjectiveError::DimensionMismatch(format!(
            "H is {}x{} but X has {} rows",
            spec.h.nrows(),
            spec.h.ncols(),
            x.nrows()
        )));
    }
    let k = mmop::effective_noise_cov(x, &spec.psi, &spec.sigma, spec.noise_var);
    let k_inv = k.clone().cholesky().ok_or(ObjectiveError::SingularK)?.inverse();
    let hx = &spec.h * x;
    Ok(linalg::herm_part(&(hx.adjoint() * k_inv * hx)))
}

/// Evaluate a case objective exactly as written (minimization sense).
pub fn eval_f_matrix(case: &ObjectiveCase, x: &CMatrix, spec: &ProblemSpec) -> Result<f64, ObjectiveError> {
    let m_x = inner_matrix(x, spec)?;
    let n_streams = m_x.nrows();
    let eye = linalg::identity(n_streams);
    match case {
        ObjectiveCase::Case1 { n_mat } => {
            check_square(n_mat, n_streams)?;
            Ok(-logdet_pd(&linalg::herm_part(&(&m_x + n_mat)))?)
        }
        ObjectiveCase::Case2 { a_mat } => {
            if a_mat.nrows() != n_streams {
                return Err(ObjectiveError::DimensionMismatch("A rows vs streams".into()));
            }
            let inner = a_mat.adjoint() * &m_x * a_mat + linalg::identity(a_mat.ncols());
            Ok(-logdet_pd(&linalg::herm_part(&inner))?)
        }
        ObjectiveCase::Case3 { n_mat } => {
            check_square(n_mat, n_streams)?;
            let inv = inverse_pd(&linalg::herm_part(&(&m_x + n_mat)))?;
            Ok(linalg::real_trace(&inv))
        }
        ObjectiveCase::Case4 { n_mat, m_mat } => {
            check_square(n_mat, n_streams)?;
            let big = linalg::kron(&linalg::herm_part(&(&m_x + n_mat)), m_mat);
            let inv = inverse_pd(&linalg::herm_part(&big))?;
            Ok(linalg::real_trace(&inv))
        }
        ObjectiveCase::Case5 { a_mat, n_mat } => {
            if a_mat.nrows() != n_streams {
                return Err(ObjectiveError::DimensionMismatch("A rows vs streams".into()));
            }
            let inv = inverse_pd(&linalg::herm_part(&(&m_x + &eye)))?;
            let inner = a_mat.adjoint() * inv * a_mat + n_mat;
            Ok(logdet_pd(&linalg::herm_part(&inner))?)
        }
        ObjectiveCase::Case6 { a_mat } => {
            if a_mat.nrows() != n_streams {
                return Err(ObjectiveError::DimensionMismatch("A rows vs streams".into()));
            }
            let inv = inverse_pd(&linalg::herm_part(&(&m_x + &eye)))?;
            Ok(linalg::real_trace(&(a_mat.adjoint() * inv * a_mat)))
        }
        ObjectiveCase::Case7 { objective, .. } => {
            let inv = inverse_pd(&linalg::herm_part(&(&m_x + &eye)))?;
            let d: Vec<f64> = (0..n_streams).map(|i| inv[(i, i)].re).collect();
            Ok((objective.eval)(&d))
        }
        ObjectiveCase::Case8 { objective, .. } => {
            let inv = inverse_pd(&linalg::herm_part(&(&m_x + &eye)))?;
            let chol = inv.cholesky().ok_or(ObjectiveError::NotPd)?;
            let l = chol.l();
            let d2: Vec<f64> = (0..n_streams).map(|i| l[(i, i)].re.powi(2)).collect();
            Ok((objective.eval)(&d2))
        }
    }
}

fn check_square(m: &CMatrix, n: usize) -> Result<(), ObjectiveError> {
    if m.nrows() != n || m.ncols() != n {
        return Err(ObjectiveError::DimensionMismatch(format!(
            "constant matrix is {}x{}, want {n}x{n}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Evaluate a case objective at its optimal inner rotation, as a function of
/// the eigenvalues (descending) of FᴴHᴴK_F⁻¹HF.
pub fn eval_f_vector(case: &ObjectiveCase, eigs: &[f64]) -> f64 {
    let n = eigs.len();
    match case {
        ObjectiveCase::Case1 { n_mat } => {
            // aligned against N ascending
            let nu = herm_eigs_ascending(n_mat);
            assert_eq!(nu.len(), n, "N dimension vs spectrum length");
            -eigs.iter().zip(&nu).map(|(&l, &v)| (l + v).ln()).sum::<f64>()
        }
        ObjectiveCase::Case2 { a_mat } => {
            let s2 = gram_eigs_descending(a_mat);
            assert_eq!(s2.len(), n, "AAᴴ dimension vs spectrum length");
            -eigs.iter().zip(&s2).map(|(&l, &s)| (s * l + 1.0).ln()).sum::<f64>()
        }
        ObjectiveCase::Case3 { n_mat } => {
            let nu = herm_eigs_ascending(n_mat);
            assert_eq!(nu.len(), n, "N dimension vs spectrum length");
            eigs.iter().zip(&nu).map(|(&l, &v)| 1.0 / (l + v)).sum::<f64>()
        }
        ObjectiveCase::Case4 { n_mat, m_mat } => {
            let case3 = eval_f_vector(&ObjectiveCase::Case3 { n_mat: n_mat.clone() }, eigs);
            let m_inv_trace: f64 = herm_eigs_ascending(m_mat).iter().map(|&v| 1.0 / v).sum();
            case3 * m_inv_trace
        }
        ObjectiveCase::Case5 { a_mat, n_mat } => {
            let ana = build_ana(a_mat, n_mat);
            let mut omega = crate::linalg::herm_eig(&ana, linalg::EigOrder::Descending)
                .expect("A N⁻¹ Aᴴ is Hermitian")
                .eigenvalues;
            omega.iter_mut().for_each(|v| *v = v.max(0.0));
            assert_eq!(omega.len(), n, "A N⁻¹ Aᴴ dimension vs spectrum length");
            let logdet_n: f64 = herm_eigs_ascending(n_mat).iter().map(|&v| v.ln()).sum();
            logdet_n
                + eigs
                    .iter()
                    .zip(&omega)
                    .map(|(&l, &w)| (w + 1.0 + l).ln() - (1.0 + l).ln())
                    .sum::<f64>()
        }
        ObjectiveCase::Case6 { a_mat } => {
            let s2 = gram_eigs_descending(a_mat);
            assert_eq!(s2.len(), n, "AAᴴ dimension vs spectrum length");
            eigs.iter().zip(&s2).map(|(&l, &s)| s / (1.0 + l)).sum::<f64>()
        }
        ObjectiveCase::Case7 { schur, objective } => {
            let d: Vec<f64> = eigs.iter().map(|&l| 1.0 / (1.0 + l)).collect();
            match schur {
                SchurKind::Concave => (objective.eval)(&d),
                SchurKind::Convex => {
                    let mean = d.iter().sum::<f64>() / n as f64;
                    (objective.eval)(&vec![mean; n])
                }
            }
        }
        ObjectiveCase::Case8 { schur, objective } => {
            let d: Vec<f64> = eigs.iter().map(|&l| 1.0 / (1.0 + l)).collect();
            match schur {
                SchurKind::Concave => (objective.eval)(&d),
                SchurKind::Convex => {
                    let geo = (d.iter().map(|&x| x.ln()).sum::<f64>() / n as f64).exp();
                    (objective.eval)(&vec![geo; n])
                }
            }
        }
    }
}

fn herm_eigs_ascending(m: &CMatrix) -> Vec<f64> {
    crate::linalg::herm_eig(m, linalg::EigOrder::Ascending)
        .expect("constant matrix must be Hermitian")
        .eigenvalues
}

/// Eigenvalues of A Aᴴ, descending (squared singular values of A).
fn gram_eigs_descending(a: &CMatrix) -> Vec<f64> {
    let s = crate::linalg::svd(a).expect("finite matrix");
    let mut out: Vec<f64> = s.singular_values.iter().map(|&v| v * v).collect();
    out.resize(a.nrows(), 0.0);
    out
}

/// A N⁻¹ Aᴴ, hermitized.
pub fn build_ana(a_mat: &CMatrix, n_mat: &CMatrix) -> CMatrix {
    let n_inv = n_mat
        .clone()
        .cholesky()
        .expect("N must be positive definite")
        .inverse();
    linalg::herm_part(&(a_mat * n_inv * a_mat.adjoint()))
}

/// MSE matrix of a linear design (F, Q).
pub fn mse_matrix(f: &CMatrix, q: &CMatrix, spec: &ProblemSpec) -> Result<MseMatrix, ObjectiveError> {
    let x = f * q;
    let m_x = inner_matrix(&x, spec)?;
    let eye = linalg::identity(m_x.nrows());
    let value = inverse_pd(&linalg::herm_part(&(&m_x + &eye)))?;
    Ok(MseMatrix { value: linalg::herm_part(&value) })
}

impl MseMatrix {
    /// Eigenvalues, descending; all must lie in (0, 1].
    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::linalg::herm_eig(&self.value, linalg::EigOrder::Descending)
            .expect("MSE matrix is Hermitian")
            .eigenvalues
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.value.nrows()).map(|i| self.value[(i, i)].re).collect()
    }
}

/// Closed-form power allocation over eigenmode gains (descending λ_Π,n²).
pub fn allocate(rule: AllocationRule, gains: &[f64], power: f64) -> Result<Vec<f64>, ObjectiveError> {
    match rule {
        AllocationRule::SumMseWaterfill => {
            let input = mmop::WaterfillInput::new(gains.to_vec(), vec![1.0; gains.len()], power)
                .map_err(|e| ObjectiveError::DimensionMismatch(e.to_string()))?;
            let (f_sq, _) = mmop::waterfill(&input).map_err(|e| ObjectiveError::DimensionMismatch(e.to_string()))?;
            Ok(f_sq)
        }
        AllocationRule::CapacityWaterfill => Ok(capacity_waterfill(gains, power)),
    }
}

/// Classic water-filling f_n² = (ν − 1/g_n)⁺ with Σ f_n² = power.
fn capacity_waterfill(gains: &[f64], power: f64) -> Vec<f64> {
    let g_max = gains.iter().cloned().fold(0.0, f64::max);
    // gains are squared singular values; dead modes sit below (1e-12 λ_max)²
    let active: Vec<bool> = gains.iter().map(|&g| g > 1e-24 * g_max && g > 0.0).collect();
    let fill = |nu: f64| -> f64 {
        gains
            .iter()
            .zip(&active)
            .map(|(&g, &a)| if a { (nu - 1.0 / g).max(0.0) } else { 0.0 })
            .sum()
    };
    let mut lo = 0.0;
    let mut hi = 1.0 / gains.iter().zip(&active).filter(|(_, &a)| a).map(|(&g, _)| g).fold(f64::INFINITY, f64::min)
        + power;
    while fill(hi) < power {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fill(mid) > power {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let nu = 0.5 * (lo + hi);
    gains
        .iter()
        .zip(&active)
        .map(|(&g, &a)| if a { (nu - 1.0 / g).max(0.0) } else { 0.0 })
        .collect()
}
