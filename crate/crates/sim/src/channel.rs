//! Partial-CSIT channel model.
//!
//! Each user's channel is `h_i = ĥ_i + h̃_i`. The error has i.i.d.
//! `CN(0, σ_i²)` entries with `σ_i² = min(1, P^{-α_i})`, and the estimate has
//! i.i.d. `CN(0, 1 - σ_i²)` entries, independent of the error.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CVector = DVector<Complex64>;

#[derive(Clone, Debug)]
pub struct ChannelRealization {
    pub channels: Vec<CVector>,
    pub estimates: Vec<CVector>,
    pub errors: Vec<CVector>,
}

/// Estimation-error variance for exponent `alpha` at SNR `p`.
pub fn error_variance(alpha: f64, p: f64) -> f64 {
    p.powf(-alpha).min(1.0)
}

/// Vector of i.i.d. circularly-symmetric complex Gaussians with the given
/// variance.
pub fn complex_gaussian<R: Rng + ?Sized>(len: usize, variance: f64, rng: &mut R) -> CVector {
    let scale = (variance / 2.0).sqrt();
    DVector::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    })
}

pub fn sample_channel<R: Rng + ?Sized>(alphas: &[f64], antennas: usize, p: f64, rng: &mut R) -> ChannelRealization {
    let mut channels = Vec::with_capacity(alphas.len());
    let mut estimates = Vec::with_capacity(alphas.len());
    let mut errors = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let var = error_variance(alpha, p);
        let est = complex_gaussian(antennas, 1.0 - var, rng);
        let err = complex_gaussian(antennas, var, rng);
        channels.push(&est + &err);
        estimates.push(est);
        errors.push(err);
    }
    ChannelRealization { channels, estimates, errors }
}
