//! Deterministic seed derivation and the few sampling primitives shared by
//! the plant, oracle and empirical checkers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for a labelled consumer (agent, module, sample index) of a
/// run-level seed.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = splitmix64(seed);
    for b in label.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ index.wrapping_mul(GOLDEN))
}

pub fn rng_for(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, label, index))
}

/// Uniform sample from the open unit ball of dimension `k`.
pub fn unit_ball<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    loop {
        let g: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            continue;
        }
        let r: f64 = rng.random::<f64>().powf(1.0 / k as f64);
        if r >= 1.0 {
            continue;
        }
        return g.into_iter().map(|v| v / norm * r).collect();
    }
}
