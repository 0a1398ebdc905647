//! Seeded Monte Carlo estimate of the nonselected information, used to
//! cross-check the quadrature.
//!
//! Samples are split over [`MC_STREAMS`] independent ChaCha streams of one
//! seed; per-stream sums are merged in stream order, so the estimate does
//! not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::tensor_vec;
use crate::states::{BlochAngles, DensityMatrix};

pub const MC_STREAMS: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
    pub seed: u64,
}

fn uniform_angles(rng: &mut ChaCha8Rng) -> BlochAngles {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    BlochAngles { theta: z.acos(), phi }
}

/// `E[f log₂ f]` over independent uniform orientations `α, β`, where `f` is
/// the joint outcome density divided by the product of its marginals.
pub fn nonselected_monte_carlo(rho_ab: &DensityMatrix, samples: usize, seed: u64) -> Result<McEstimate> {
    if rho_ab.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got dimension {}",
            rho_ab.dim()
        )));
    }
    if samples < 2 {
        return Err(Error::OutOfRange {
            name: "samples",
            value: samples as f64,
            range: ">= 2",
        });
    }
    let rho_a = rho_ab.reduce(&[2, 2], &[0])?;
    let rho_b = rho_ab.reduce(&[2, 2], &[1])?;

    let stream = |k: u64| -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k);
        let n = samples / MC_STREAMS as usize + usize::from((k as usize) < samples % MC_STREAMS as usize);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let (a, b) = (uniform_angles(&mut rng).ket(), uniform_angles(&mut rng).ket());
            let joint = 4.0 * rho_ab.matrix().expectation(&tensor_vec(&a, &b)).re;
            let pa = 2.0 * rho_a.matrix().expectation(&a).re;
            let pb = 2.0 * rho_b.matrix().expectation(&b).re;
            let f = joint / (pa * pb);
            let v = if f > 0.0 { f * f.log2() } else { 0.0 };
            sum += v;
            sum_sq += v * v;
        }
        (sum, sum_sq)
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<(f64, f64)> = (0..MC_STREAMS).into_par_iter().map(stream).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<(f64, f64)> = (0..MC_STREAMS).map(stream).collect();

    let (sum, sum_sq) = parts.iter().fold((0.0, 0.0), |(s, q), &(a, b)| (s + a, q + b));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(McEstimate {
        mean,
        std_err: (var / n).sqrt(),
        samples,
        seed,
    })
}
