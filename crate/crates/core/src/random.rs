//! Seeded band-limited random states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::harmonics::{index_to_lm, SpectralState};

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child seed for member `index` of a run seeded with `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the combined word
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Gaussian coefficients with spectral weight `l^(-decay)`, rescaled so that
/// `‖u_K‖ = norm_k` and `‖u_NK‖ = norm_nk`.
pub fn random_state<R: Rng>(
    rng: &mut R,
    degree: usize,
    norm_k: f64,
    norm_nk: f64,
    decay: f64,
) -> SpectralState {
    let mut s = SpectralState::zeros(degree);
    for (i, c) in s.coeffs.iter_mut().enumerate() {
        let (l, _) = index_to_lm(i);
        let z: f64 = rng.sample(StandardNormal);
        *c = z * (l as f64).powf(-decay);
    }
    let (k, nk) = (s.killing_norm_sq().sqrt(), s.non_killing_norm_sq().sqrt());
    for (i, c) in s.coeffs.iter_mut().enumerate() {
        if i < 3 {
            *c *= if k > 0.0 { norm_k / k } else { 0.0 };
        } else {
            *c *= if nk > 0.0 { norm_nk / nk } else { 0.0 };
        }
    }
    s
}

/// Random state with total norm drawn log-uniformly from `[lo, hi]`.
pub fn random_amplitude_state<R: Rng>(rng: &mut R, degree: usize, lo: f64, hi: f64) -> SpectralState {
    let amp = (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
    let frac: f64 = rng.random();
    let s = random_state(rng, degree, frac.sqrt(), (1.0 - frac).sqrt(), 1.0);
    s.scaled(amp)
}
