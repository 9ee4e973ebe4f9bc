//! Kronecker-correlated channel ensemble with the exponential correlation
//! model.
//!
//! An estimate/error pair is drawn as ΔH = Σ^{1/2} W Ψ^{1/2} with W iid
//! CN(0,1), and H̄ scaled by √((1−σ_e²)/σ_e²) so the composite H = H̄ + ΔH
//! has unit entry variance. Row (receive) covariance is Σ, column (transmit)
//! covariance is Ψ; this is the coloring convention matching a Σ⊗Ψᵀ
//! column-stacking covariance, and the entry-moment tests pin it down.

use crate::linalg::{self, CMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
}

/// Exponential correlation model for the estimate/error ensemble.
///
/// `psi[i][j] = sigma_e2 * alpha_t^|i-j|` (transmit side, carries the error
/// variance), `sigma[i][j] = beta_r^|i-j|` (receive side, unit diagonal).
#[derive(Debug, Clone, Copy)]
pub struct ExpCorrModel {
    pub alpha_t: f64,
    pub beta_r: f64,
    pub sigma_e2: f64,
    pub n_t: usize,
    pub n_r: usize,
}

impl ExpCorrModel {
    pub fn new(alpha_t: f64, beta_r: f64, sigma_e2: f64, n_t: usize, n_r: usize) -> Result<Self, ChannelError> {
        if !(0.0..1.0).contains(&alpha_t) {
            return Err(ChannelError::InvalidParameter(format!("alpha_t = {alpha_t}, want [0,1)")));
        }
        if !(0.0..1.0).contains(&beta_r) {
            return Err(ChannelError::InvalidParameter(format!("beta_r = {beta_r}, want [0,1)")));
        }
        if !sigma_e2.is_finite() || sigma_e2 <= 0.0 || sigma_e2 >= 1.0 {
            return Err(ChannelError::InvalidParameter(format!("sigma_e2 = {sigma_e2}, want (0,1)")));
        }
        if n_t == 0 || n_r == 0 {
            return Err(ChannelError::InvalidParameter("antenna counts must be positive".into()));
        }
        Ok(Self { alpha_t, beta_r, sigma_e2, n_t, n_r })
    }
}

/// One draw of the ensemble: estimate, error and their sum.
#[derive(Debug, Clone)]
pub struct ChannelDraw {
    pub h_bar: CMatrix,
    pub delta_h: CMatrix,
    pub h: CMatrix,
}

fn exp_corr(rho: f64, n: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        let d = i.abs_diff(j) as u32;
        linalg::C64::new(scale * rho.powi(d as i32), 0.0)
    })
}

/// Error and estimate correlation matrices (Ψ, Σ) for the model.
pub fn build_correlations(model: &ExpCorrModel) -> (CMatrix, CMatrix) {
    (
        exp_corr(model.alpha_t, model.n_t, model.sigma_e2),
        exp_corr(model.beta_r, model.n_r, 1.0),
    )
}

/// Deterministic draw of (H̄, ΔH, H) for the given seed.
///
/// The estimate and the error come from separate ChaCha streams of the same
/// seed, so they are independent and each is reproducible on its own.
pub fn sample_channel(model: &ExpCorrModel, rng_seed: u64) -> ChannelDraw {
    let (psi, sigma) = build_correlations(model);
    // Correlation matrices of the exponential family are PD for |rho| < 1.
    let psi_sqrt = linalg::psd_sqrt(&psi).expect("exponential Psi is PSD");
    let sigma_sqrt = linalg::psd_sqrt(&sigma).expect("exponential Sigma is PSD");

    let mut rng_err = ChaCha8Rng::seed_from_u64(rng_seed);
    rng_err.set_stream(0);
    let mut rng_est = ChaCha8Rng::seed_from_u64(rng_seed);
    rng_est.set_stream(1);

    let w_err = linalg::complex_gaussian(model.n_r, model.n_t, &mut rng_err);
    let w_est = linalg::complex_gaussian(model.n_r, model.n_t, &mut rng_est);

    let delta_h = &sigma_sqrt * w_err * &psi_sqrt;
    let gain = ((1.0 - model.sigma_e2) / model.sigma_e2).sqrt();
    let h_bar = (&sigma_sqrt * w_est * &psi_sqrt).scale(gain);
    let h = &h_bar + &delta_h;
    ChannelDraw { h_bar, delta_h, h }
}

/// SNR = P/σ_n², dB → linear.
pub fn snr_db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// SNR = P/σ_n², linear → dB.
pub fn snr_linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
