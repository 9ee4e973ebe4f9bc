//! Dense complex linear-algebra kernels with explicit ordering conventions.
//!
//! Everything downstream leans on three contracts established here: spectra
//! come out sorted the way the caller asked (descending or ascending),
//! returned eigen/singular bases are (semi-)unitary, and PSD square roots are
//! Hermitian. Backed by [`nalgebra`]; the wrappers exist to pin those
//! conventions down and to fail loudly on bad input instead of returning
//! garbage.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Dense complex matrix, the working type for every channel/precoder quantity.
pub type CMatrix = DMatrix<C64>;

/// Absolute floor under all relative tolerances.
pub const ABS_FLOOR: f64 = 1e-14;
/// Relative asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERM_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NonHermitian { asymmetry: f64 },
    #[error("matrix is not positive semi-definite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },
    #[error("matrix is singular or too ill-conditioned")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Requested ordering of a returned spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigOrder {
    Descending,
    Ascending,
}

/// Eigendecomposition of a Hermitian matrix, spectrum sorted per `order`.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the same order as `eigenvalues`.
    pub eigenvectors: CMatrix,
    pub order: EigOrder,
}

/// Thin singular value decomposition, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// m×r, semi-unitary columns.
    pub u: CMatrix,
    /// Non-increasing, all ≥ 0.
    pub singular_values: Vec<f64>,
    /// n×r, semi-unitary columns (not transposed: input ≈ U Σ Vᴴ).
    pub v: CMatrix,
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Hermitian part (M + Mᴴ)/2.
pub fn herm_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// n×n identity.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Complex diagonal matrix from real entries.
pub fn diag(entries: &[f64]) -> CMatrix {
    CMatrix::from_fn(entries.len(), entries.len(), |i, j| {
        if i == j {
            C64::new(entries[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Rectangular diagonal matrix (rows×cols) with `entries` on the main diagonal.
pub fn rect_diag(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for (i, &e) in entries.iter().enumerate().take(rows.min(cols)) {
        m[(i, i)] = C64::new(e, 0.0);
    }
    m
}

/// Relative Frobenius asymmetry ‖M − Mᴴ‖ / max(‖M‖, floor).
pub fn herm_asymmetry(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm() / m.norm().max(ABS_FLOOR)
}

pub fn real_trace(m: &CMatrix) -> f64 {
    m.trace().re
}

/// Eigendecomposition of a Hermitian matrix with the requested spectrum order.
pub fn herm_eig(m: &CMatrix, order: EigOrder) -> Result<HermEig, LinalgError> {
    if !is_finite(m) {
        return Err(LinalgError::NonFinite);
    }
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let asymmetry = herm_asymmetry(m);
    if asymmetry > HERM_TOL {
        return Err(LinalgError::NonHermitian { asymmetry });
    }
    let eig = nalgebra::SymmetricEigen::new(herm_part(m));
    let n = m.nrows();
    // nalgebra leaves the spectrum unsorted; sort pairs stably per `order`.
    let mut idx: Vec<usize> = (0..n).collect();
    match order {
        EigOrder::Descending => idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a])),
        EigOrder::Ascending => idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])),
    }
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    Ok(HermEig {
        eigenvalues,
        eigenvectors,
        order,
    })
}

/// Largest and smallest eigenvalue of a Hermitian matrix.
pub fn eig_range(m: &CMatrix) -> Result<(f64, f64), LinalgError> {
    let e = herm_eig(m, EigOrder::Descending)?;
    Ok((e.eigenvalues[0], *e.eigenvalues.last().unwrap()))
}

/// Thin SVD with singular values sorted descending.
pub fn svd(m: &CMatrix) -> Result<Svd, LinalgError> {
    if !is_finite(m) {
        return Err(LinalgError::NonFinite);
    }
    let s = nalgebra::SVD::new(m.clone(), true, true);
    let u = s.u.expect("u requested");
    let v_t = s.v_t.expect("v_t requested");
    Ok(Svd {
        u,
        singular_values: s.singular_values.iter().copied().collect(),
        v: v_t.adjoint(),
    })
}

impl Svd {
    /// U Σ Vᴴ, for residual checks.
    pub fn reconstruct(&self) -> CMatrix {
        let r = self.singular_values.len();
        let sigma = rect_diag(r, r, &self.singular_values);
        &self.u * sigma * self.v.adjoint()
    }
}

impl HermEig {
    /// U Λ Uᴴ, for residual checks.
    pub fn reconstruct(&self) -> CMatrix {
        &self.eigenvectors * diag(&self.eigenvalues) * self.eigenvectors.adjoint()
    }
}

fn psd_spectrum(m: &CMatrix) -> Result<HermEig, LinalgError> {
    let mut e = herm_eig(m, EigOrder::Descending)?;
    let lam_max = e.eigenvalues[0].max(ABS_FLOOR);
    let min_eig = *e.eigenvalues.last().unwrap();
    // Round-off from floating-point products drifts slightly negative; a
    // genuinely indefinite matrix is rejected.
    if min_eig < -1e-8 * lam_max {
        return Err(LinalgError::NotPsd { min_eig });
    }
    for v in &mut e.eigenvalues {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(e)
}

/// Hermitian square root Z^{1/2} of a PSD matrix, with Z^{1/2}Z^{1/2} = Z.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix, LinalgError> {
    let e = psd_spectrum(m)?;
    let roots: Vec<f64> = e.eigenvalues.iter().map(|&v| v.sqrt()).collect();
    Ok(&e.eigenvectors * diag(&roots) * e.eigenvectors.adjoint())
}

/// Hermitian inverse square root of a positive definite matrix.
pub fn psd_inv_sqrt(m: &CMatrix) -> Result<CMatrix, LinalgError> {
    let e = herm_eig(m, EigOrder::Descending)?;
    let lam_max = e.eigenvalues[0].max(ABS_FLOOR);
    let lam_min = *e.eigenvalues.last().unwrap();
    if lam_min <= 1e-12 * lam_max {
        return Err(LinalgError::Singular);
    }
    let inv_roots: Vec<f64> = e.eigenvalues.iter().map(|&v| 1.0 / v.sqrt()).collect();
    Ok(&e.eigenvectors * diag(&inv_roots) * e.eigenvectors.adjoint())
}

/// Kronecker product with the standard block layout.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Loewner order test: a ⪰ b iff λ_min(a − b) ≥ −1e-10·max(1, λ_max(a − b)).
pub fn loewner_geq(a: &CMatrix, b: &CMatrix) -> Result<bool, LinalgError> {
    if a.shape() != b.shape() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let d = a - b;
    let (lam_max, lam_min) = eig_range(&d)?;
    Ok(lam_min >= -1e-10 * lam_max.max(1.0))
}

/// Haar-distributed random unitary via QR of a Ginibre matrix with the
/// R-diagonal phase fix.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = complex_gaussian(n, n, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Matrix of iid CN(0, 1) entries (variance 1/2 per real and imaginary part).
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// Random Hermitian PSD matrix A Aᴴ + ridge·I, handy for tests and sampling.
pub fn random_psd<R: Rng + ?Sized>(n: usize, ridge: f64, rng: &mut R) -> CMatrix {
    let a = complex_gaussian(n, n, rng);
    herm_part(&(&a * a.adjoint())) + identity(n).scale(ridge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn herm_eig_diagonal_orderings() {
        let m = diag(&[1.0, 3.0, 2.0]);
        let d = herm_eig(&m, EigOrder::Descending).unwrap();
        assert_eq!(d.eigenvalues, vec![3.0, 2.0, 1.0]);
        let a = herm_eig(&m, EigOrder::Ascending).unwrap();
        assert_eq!(a.eigenvalues, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn herm_eig_reconstructs_random_hermitian() {
        let mut r = rng(1);
        for _ in 0..20 {
            let m = random_psd(4, 0.0, &mut r) - identity(4).scale(0.7);
            let e = herm_eig(&m, EigOrder::Descending).unwrap();
            let res = (e.reconstruct() - &m).norm() / m.norm();
            assert!(res <= 1e-9, "residual {res}");
            let gram = e.eigenvectors.adjoint() * &e.eigenvectors;
            assert!((gram - identity(4)).norm() <= 1e-9 * 2.0);
        }
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(5.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(
            herm_eig(&m, EigOrder::Descending),
            Err(LinalgError::NonHermitian { .. })
        ));
    }

    #[test]
    fn herm_eig_rejects_non_finite() {
        let mut m = identity(2);
        m[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(
            herm_eig(&m, EigOrder::Descending),
            Err(LinalgError::NonFinite)
        ));
    }

    #[test]
    fn svd_zero_and_sign() {
        let z = CMatrix::zeros(3, 2);
        let s = svd(&z).unwrap();
        assert!(s.singular_values.iter().all(|&v| v == 0.0));

        let m = diag(&[2.0, -1.0]);
        let s = svd(&m).unwrap();
        assert_relative_eq!(s.singular_values[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(s.singular_values[1], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let mut r = rng(2);
        for _ in 0..20 {
            let m = complex_gaussian(3, 5, &mut r);
            let s = svd(&m).unwrap();
            assert!((s.reconstruct() - &m).norm() / m.norm() <= 1e-9);
            let mut prev = f64::INFINITY;
            for &v in &s.singular_values {
                assert!(v >= 0.0 && v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn psd_sqrt_examples_and_square() {
        assert_relative_eq!((psd_sqrt(&identity(3)).unwrap() - identity(3)).norm(), 0.0, epsilon = 1e-12);
        let s = psd_sqrt(&diag(&[4.0, 9.0])).unwrap();
        assert!((s - diag(&[2.0, 3.0])).norm() < 1e-12);

        let mut r = rng(3);
        for _ in 0..20 {
            let m = random_psd(4, 0.0, &mut r);
            let s = psd_sqrt(&m).unwrap();
            assert!((&s * &s - &m).norm() / m.norm() <= 1e-9);
            assert!(herm_asymmetry(&s) <= 1e-10);
        }
    }

    #[test]
    fn psd_sqrt_rejects_indefinite() {
        let m = diag(&[1.0, -0.5]);
        assert!(matches!(psd_sqrt(&m), Err(LinalgError::NotPsd { .. })));
    }

    #[test]
    fn psd_inv_sqrt_sandwich() {
        assert!((psd_inv_sqrt(&identity(2)).unwrap() - identity(2)).norm() < 1e-12);
        let s = psd_inv_sqrt(&diag(&[4.0])).unwrap();
        assert_relative_eq!(s[(0, 0)].re, 0.5, max_relative = 1e-12);

        let mut r = rng(4);
        for _ in 0..20 {
            let m = random_psd(4, 0.3, &mut r);
            let s = psd_inv_sqrt(&m).unwrap();
            assert!((&s * &m * &s - identity(4)).norm() <= 1e-8);
        }
        assert!(matches!(psd_inv_sqrt(&diag(&[1.0, 0.0])), Err(LinalgError::Singular)));
    }

    #[test]
    fn kron_examples_and_mixed_product() {
        assert!((kron(&identity(2), &identity(3)) - identity(6)).norm() < 1e-15);
        let k = kron(&diag(&[1.0, 2.0]), &diag(&[3.0]));
        assert!((k - diag(&[3.0, 6.0])).norm() < 1e-15);

        let mut r = rng(5);
        for _ in 0..20 {
            let (a, b) = (complex_gaussian(2, 2, &mut r), complex_gaussian(2, 2, &mut r));
            let (c, d) = (complex_gaussian(2, 2, &mut r), complex_gaussian(2, 2, &mut r));
            let lhs = kron(&a, &b) * kron(&c, &d);
            let rhs = kron(&(&a * &c), &(&b * &d));
            assert!((lhs - &rhs).norm() / rhs.norm() <= 1e-12);
        }
    }

    #[test]
    fn loewner_examples() {
        let i2 = identity(2);
        assert!(loewner_geq(&i2.scale(2.0), &i2).unwrap());
        assert!(!loewner_geq(&i2, &i2.scale(2.0)).unwrap());
        assert!(!loewner_geq(&diag(&[2.0, 0.0]), &diag(&[1.0, 1.0])).unwrap());
        assert!(matches!(
            loewner_geq(&identity(2), &identity(3)),
            Err(LinalgError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut r = rng(6);
        for n in [1usize, 2, 4, 6] {
            let q = haar_unitary(n, &mut r);
            assert!((q.adjoint() * &q - identity(n)).norm() <= 1e-9 * (n as f64).sqrt());
        }
    }
}
