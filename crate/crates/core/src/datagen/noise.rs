use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::CMatrix;

fn unit_open(bits: u64) -> f64 {
    // (0, 1]
    ((bits >> 11) + 1) as f64 / (1u64 << 53) as f64
}

fn unit_half_open(bits: u64) -> f64 {
    // [0, 1)
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

/// Standard complex normal draws for one row. Entry `col` consumes words
/// `4 col .. 4 col + 4` of stream `row`, so any entry can be regenerated on
/// its own.
fn row_draws(seed: u64, row: usize, cols: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    rng.set_word_pos(0);
    (0..cols)
        .map(|_| {
            let u1 = unit_open(rng.next_u64());
            let u2 = unit_half_open(rng.next_u64());
            let radius = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
            Complex64::new(radius * c, radius * s)
        })
        .collect()
}

/// Adds independent Gaussian noise of standard deviation `sigma` to the real
/// and imaginary part of every entry. Deterministic in `(seed, row, col)`.
pub fn add_noise(x: &CMatrix, sigma: f64, seed: u64) -> Result<CMatrix> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise level must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let (n, m) = x.shape();
    let rows: Vec<Vec<Complex64>> = (0..n).into_par_iter().map(|i| row_draws(seed, i, m)).collect();
    let mut out = x.clone();
    for (i, draws) in rows.iter().enumerate() {
        for (k, z) in draws.iter().enumerate() {
            out[(i, k)] += z * sigma;
        }
    }
    Ok(out)
}
