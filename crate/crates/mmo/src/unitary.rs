//! Unitary-matrix layer: the four basic trace/determinant inequalities with
//! their extremizing rotations, and the optimal inner unitary for each
//! design objective.
//!
//! All four inequalities share one mechanism: conjugating A by a unitary Q
//! can only re-pair A's eigenvalues against B's. Pairing descending against
//! ascending or descending against descending produces the two extremes, and
//! the extremizers are products of the eigenbases, Q = U_A Ū_Bᴴ or
//! Q = U_A U_Bᴴ.

use crate::linalg::{self, CMatrix, EigOrder, LinalgError};
use crate::objectives::{ObjectiveCase, SchurKind};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UnitaryError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Q^H A Q + B is singular for some alignment")]
    SingularSum,
    #[error("matrix argument must be positive definite")]
    NotPd,
    #[error("malformed case payload: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Extremal values of one matrix inequality together with the rotations that
/// attain them.
#[derive(Debug, Clone)]
pub struct IneqBound {
    pub lower: f64,
    pub upper: f64,
    pub q_lower: CMatrix,
    pub q_upper: CMatrix,
}

/// How an optimal rotation was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QConstruction {
    /// Descending eigenbasis of the inner matrix against a descending basis.
    EigAlign,
    /// Descending against ascending.
    EigAntiAlign,
    Dft,
    EqualDiagCholesky,
    Identity,
}

#[derive(Debug, Clone)]
pub struct QSolution {
    pub q: CMatrix,
    pub construction: QConstruction,
}

struct PsdPair {
    /// A's eigenvalues descending with basis.
    a_desc: Vec<f64>,
    u_a: CMatrix,
    /// B's eigenvalues descending, plus the ascending basis Ū_B.
    b_desc: Vec<f64>,
    u_b: CMatrix,
    u_b_asc: CMatrix,
}

fn decompose_pair(a: &CMatrix, b: &CMatrix) -> Result<PsdPair, UnitaryError> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(UnitaryError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let ea = linalg::herm_eig(a, EigOrder::Descending)?;
    let eb = linalg::herm_eig(b, EigOrder::Descending)?;
    let eb_asc = linalg::herm_eig(b, EigOrder::Ascending)?;
    Ok(PsdPair {
        a_desc: ea.eigenvalues,
        u_a: ea.eigenvectors,
        b_desc: eb.eigenvalues,
        u_b: eb.eigenvectors,
        u_b_asc: eb_asc.eigenvectors,
    })
}

/// Bounds of Tr(QᴴAQB): Σλ_i(A)λ_{N−i+1}(B) ≤ · ≤ Σλ_i(A)λ_i(B).
pub fn ineq_trace_product(a: &CMatrix, b: &CMatrix) -> Result<IneqBound, UnitaryError> {
    let p = decompose_pair(a, b)?;
    let n = p.a_desc.len();
    let lower = (0..n).map(|i| p.a_desc[i] * p.b_desc[n - 1 - i]).sum();
    let upper = (0..n).map(|i| p.a_desc[i] * p.b_desc[i]).sum();
    Ok(IneqBound {
        lower,
        upper,
        q_lower: &p.u_a * p.u_b_asc.adjoint(),
        q_upper: &p.u_a * p.u_b.adjoint(),
    })
}

/// Bounds of |QᴴAQ + B|: Π(λ_i(A)+λ_i(B)) ≤ · ≤ Π(λ_i(A)+λ_{N−i+1}(B)).
///
/// Aligning the spectra minimizes the determinant of the sum; anti-aligning
/// maximizes it.
pub fn ineq_logdet_sum(a: &CMatrix, b: &CMatrix) -> Result<IneqBound, UnitaryError> {
    let p = decompose_pair(a, b)?;
    let n = p.a_desc.len();
    let lower = (0..n).map(|i| p.a_desc[i] + p.b_desc[i]).product();
    let upper = (0..n).map(|i| p.a_desc[i] + p.b_desc[n - 1 - i]).product();
    Ok(IneqBound {
        lower,
        upper,
        q_lower: &p.u_a * p.u_b.adjoint(),
        q_upper: &p.u_a * p.u_b_asc.adjoint(),
    })
}

/// Bounds of |QᴴAQB + I|: Π(λ_i(A)λ_{N−i+1}(B)+1) ≤ · ≤ Π(λ_i(A)λ_i(B)+1).
pub fn ineq_logdet_product_plus_i(a: &CMatrix, b: &CMatrix) -> Result<IneqBound, UnitaryError> {
    let p = decompose_pair(a, b)?;
    let n = p.a_desc.len();
    let lower = (0..n).map(|i| p.a_desc[i] * p.b_desc[n - 1 - i] + 1.0).product();
    let upper = (0..n).map(|i| p.a_desc[i] * p.b_desc[i] + 1.0).product();
    Ok(IneqBound {
        lower,
        upper,
        q_lower: &p.u_a * p.u_b_asc.adjoint(),
        q_upper: &p.u_a * p.u_b.adjoint(),
    })
}

/// Bounds of Tr[(QᴴAQ + B)⁻¹]: Σ(λ_i(A)+λ_{N−i+1}(B))⁻¹ ≤ · ≤ Σ(λ_i(A)+λ_i(B))⁻¹.
pub fn ineq_trace_inv_sum(a: &CMatrix, b: &CMatrix) -> Result<IneqBound, UnitaryError> {
    let p = decompose_pair(a, b)?;
    let n = p.a_desc.len();
    let scale = p.a_desc[0].max(p.b_desc[0]).max(1.0);
    if p.a_desc[n - 1] + p.b_desc[n - 1] <= 1e-12 * scale {
        return Err(UnitaryError::SingularSum);
    }
    let lower = (0..n).map(|i| 1.0 / (p.a_desc[i] + p.b_desc[n - 1 - i])).sum();
    let upper = (0..n).map(|i| 1.0 / (p.a_desc[i] + p.b_desc[i])).sum();
    Ok(IneqBound {
        lower,
        upper,
        q_lower: &p.u_a * p.u_b_asc.adjoint(),
        q_upper: &p.u_a * p.u_b.adjoint(),
    })
}

/// Unitary DFT matrix, entries (1/√n)·exp(−2πi·jk/n).
///
/// Conjugating a diagonal matrix by it equalizes the diagonal at the mean.
pub fn dft_matrix(n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |j, k| {
        let angle = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
        linalg::C64::new(angle.cos() * scale, angle.sin() * scale)
    })
}

/// Unitary R such that the Cholesky factor of Rᴴ m R has all diagonal
/// entries equal to det(m)^{1/(2N)}.
///
/// Sweeps Givens-style 2×2 kernels that set each adjacent diagonal pair of
/// the triangular factor to its pairwise geometric mean; the product of the
/// diagonal is invariant, so the sweep converges to the global geometric
/// mean. Bounded at 100 sweeps with a 1e-10 deviation target.
pub fn equal_diag_cholesky_rotation(m: &CMatrix) -> Result<QSolution, UnitaryError> {
    let n = m.nrows();
    if !m.is_square() {
        return Err(UnitaryError::DimensionMismatch("not square".into()));
    }
    let chol = m.clone().cholesky().ok_or(UnitaryError::NotPd)?;
    // Work on the upper factor: RᴴmR = TᴴT with T upper triangular.
    let mut t = chol.l().adjoint();
    let mut r = linalg::identity(n);
    if n == 1 {
        return Ok(QSolution { q: r, construction: QConstruction::EqualDiagCholesky });
    }
    for _sweep in 0..100 {
        let diag: Vec<f64> = (0..n).map(|i| t[(i, i)].re).collect();
        let dmax = diag.iter().cloned().fold(f64::MIN, f64::max);
        let dmin = diag.iter().cloned().fold(f64::MAX, f64::min);
        if dmax - dmin <= 1e-10 * dmax.max(linalg::ABS_FLOOR) {
            break;
        }
        for k in 0..n - 1 {
            apply_pair_kernel(&mut t, &mut r, k);
        }
    }
    Ok(QSolution { q: r, construction: QConstruction::EqualDiagCholesky })
}

/// One 2×2 kernel: right-rotate columns (k, k+1) of the upper factor so both
/// diagonal entries become the pairwise geometric mean, then restore
/// triangularity with a left rotation (which leaves TᴴT's conjugation class
/// unchanged).
fn apply_pair_kernel(t: &mut CMatrix, r: &mut CMatrix, k: usize) {
    let a = t[(k, k)].re;
    let q12 = t[(k, k + 1)];
    let b = t[(k + 1, k + 1)].re;
    let block = CMatrix::from_row_slice(2, 2, &[t[(k, k)], q12, linalg::C64::new(0.0, 0.0), t[(k + 1, k + 1)]]);
    let svd = linalg::svd(&block).expect("finite 2x2 block");
    let s1 = svd.singular_values[0];
    let s2 = svd.singular_values[1];
    let delta = (s1 * s2).sqrt();
    if s1 - s2 <= 1e-15 * s1.max(linalg::ABS_FLOOR) || delta <= 0.0 {
        let _ = (a, b);
        return;
    }
    let c = ((delta * delta - s2 * s2) / (s1 * s1 - s2 * s2)).max(0.0).sqrt();
    let s = (1.0 - c * c).max(0.0).sqrt();
    let re = |x: f64| linalg::C64::new(x, 0.0);
    // g̃ᴴ diag(s1,s2) w̃ = [δ *; 0 *] for these rotations.
    let w_tilde = CMatrix::from_row_slice(2, 2, &[re(c), re(-s), re(s), re(c)]);
    let g_tilde = CMatrix::from_row_slice(
        2,
        2,
        &[re(c * s1 / delta), re(-s * s2 / delta), re(s * s2 / delta), re(c * s1 / delta)],
    );
    let w = &svd.v * &w_tilde;
    let g = &svd.u * &g_tilde;
    let gh = g.adjoint();

    let n = t.nrows();
    // columns k, k+1 of T and R by w; rows k, k+1 of T by gᴴ
    for i in 0..n {
        let (t0, t1) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = t0 * w[(0, 0)] + t1 * w[(1, 0)];
        t[(i, k + 1)] = t0 * w[(0, 1)] + t1 * w[(1, 1)];
        let (r0, r1) = (r[(i, k)], r[(i, k + 1)]);
        r[(i, k)] = r0 * w[(0, 0)] + r1 * w[(1, 0)];
        r[(i, k + 1)] = r0 * w[(0, 1)] + r1 * w[(1, 1)];
    }
    for j in 0..n {
        let (t0, t1) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = gh[(0, 0)] * t0 + gh[(0, 1)] * t1;
        t[(k + 1, j)] = gh[(1, 0)] * t0 + gh[(1, 1)] * t1;
    }
    // Clean the re-triangularized fill and keep the diagonal real.
    t[(k + 1, k)] = linalg::C64::new(0.0, 0.0);
    for idx in [k, k + 1] {
        let d = t[(idx, idx)];
        if d.im.abs() > 0.0 || d.re < 0.0 {
            let mag = d.norm();
            if mag > 0.0 {
                let phase = (d / mag).conj();
                for j in 0..n {
                    t[(idx, j)] *= phase;
                }
            }
        }
    }
}

/// Optimal inner unitary for a case objective, given M = FᴴHᴴK_F⁻¹HF.
pub fn optimal_q(case: &ObjectiveCase, m: &CMatrix) -> Result<QSolution, UnitaryError> {
    let em = linalg::herm_eig(m, EigOrder::Descending)?;
    let u_m = em.eigenvectors;
    let n = m.nrows();
    let check = |rows: usize, what: &str| -> Result<(), UnitaryError> {
        if rows != n {
            return Err(UnitaryError::NotApplicable(format!(
                "{what} has {rows} rows, inner matrix is {n}x{n}"
            )));
        }
        Ok(())
    };
    match case {
        ObjectiveCase::Case1 { n_mat } | ObjectiveCase::Case3 { n_mat } | ObjectiveCase::Case4 { n_mat, .. } => {
            check(n_mat.nrows(), "N")?;
            let en = linalg::herm_eig(n_mat, EigOrder::Ascending)?;
            Ok(QSolution {
                q: &u_m * en.eigenvectors.adjoint(),
                construction: QConstruction::EigAntiAlign,
            })
        }
        ObjectiveCase::Case2 { a_mat } | ObjectiveCase::Case6 { a_mat } => {
            check(a_mat.nrows(), "A")?;
            let sa = linalg::svd(a_mat)?;
            // thin U may have fewer than n columns for a wide A; complete via
            // the eigenbasis of AAᴴ, which shares the leading columns.
            let gram = linalg::herm_part(&(a_mat * a_mat.adjoint()));
            let ua = linalg::herm_eig(&gram, EigOrder::Descending)?.eigenvectors;
            let _ = sa;
            Ok(QSolution { q: &u_m * ua.adjoint(), construction: QConstruction::EigAlign })
        }
        ObjectiveCase::Case5 { a_mat, n_mat } => {
            check(a_mat.nrows(), "A")?;
            let ana = crate::objectives::build_ana(a_mat, n_mat);
            let eana = linalg::herm_eig(&ana, EigOrder::Descending)?;
            Ok(QSolution {
                q: &u_m * eana.eigenvectors.adjoint(),
                construction: QConstruction::EigAlign,
            })
        }
        ObjectiveCase::Case7 { schur, .. } => match schur {
            SchurKind::Concave => Ok(QSolution { q: u_m, construction: QConstruction::EigAlign }),
            SchurKind::Convex => Ok(QSolution {
                q: &u_m * dft_matrix(n).adjoint(),
                construction: QConstruction::Dft,
            }),
        },
        ObjectiveCase::Case8 { schur, .. } => match schur {
            SchurKind::Concave => Ok(QSolution { q: u_m, construction: QConstruction::EigAlign }),
            SchurKind::Convex => {
                let d: Vec<f64> = em.eigenvalues.iter().map(|&l| 1.0 / (1.0 + l.max(0.0))).collect();
                let rot = equal_diag_cholesky_rotation(&linalg::diag(&d))?;
                Ok(QSolution { q: &u_m * rot.q, construction: QConstruction::EqualDiagCholesky })
            }
        },
    }
}

/// Middle expressions of the four inequalities, for tests and certificates.
pub mod middle {
    use super::*;

    pub fn trace_product(q: &CMatrix, a: &CMatrix, b: &CMatrix) -> f64 {
        linalg::real_trace(&(q.adjoint() * a * q * b))
    }

    pub fn det_sum(q: &CMatrix, a: &CMatrix, b: &CMatrix) -> f64 {
        let m = linalg::herm_part(&(q.adjoint() * a * q + b));
        linalg::herm_eig(&m, EigOrder::Descending)
            .expect("hermitian")
            .eigenvalues
            .iter()
            .product()
    }

    pub fn det_product_plus_i(q: &CMatrix, a: &CMatrix, b: &CMatrix) -> f64 {
        let n = a.nrows();
        let m = q.adjoint() * a * q * b + linalg::identity(n);
        // |M| of a product-plus-identity is real for PSD A,B; read it off a
        // complex LU determinant.
        m.determinant().re
    }

    pub fn trace_inv_sum(q: &CMatrix, a: &CMatrix, b: &CMatrix) -> f64 {
        let m = linalg::herm_part(&(q.adjoint() * a * q + b));
        linalg::herm_eig(&m, EigOrder::Descending)
            .expect("hermitian")
            .eigenvalues
            .iter()
            .map(|&v| 1.0 / v)
            .sum()
    }
}
