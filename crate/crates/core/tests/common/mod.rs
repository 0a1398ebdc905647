#![allow(dead_code)]

use std::f64::consts::PI;

use qinfo_core::channels::KrausChannel;
use qinfo_core::experiment::{Psm, PsmFlavor, PsmOutcome};
use qinfo_core::linalg::{eig_hermitian, ComplexMatrix, C64};
use qinfo_core::states::{BlochAngles, DensityMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Full-rank or rank-deficient density matrix `G G† / Tr`.
pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
    let rank = rng.gen_range(1..=dim);
    let g = random_matrix(rng, dim, rank);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr)).unwrap()
}

pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, dim);
    eig_hermitian(&(&g + &g.adjoint())).unwrap().eigenvectors
}

/// First `cols` columns of a random unitary.
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let u = random_unitary(rng, rows);
    ComplexMatrix::from_fn(rows, cols, |r, c| u[(r, c)])
}

/// Splits a `(k·dim_out) × dim_in` isometry into `k` Kraus operators.
pub fn random_kraus_ops(rng: &mut impl Rng, dim_in: usize, dim_out: usize, k: usize) -> Vec<ComplexMatrix> {
    let w = random_isometry(rng, k * dim_out, dim_in);
    (0..k)
        .map(|j| ComplexMatrix::from_fn(dim_out, dim_in, |r, c| w[(j * dim_out + r, c)]))
        .collect()
}

pub fn random_channel(rng: &mut impl Rng, dim_in: usize, dim_out: usize) -> KrausChannel {
    let k = rng.gen_range(1..=3).max(dim_in.div_ceil(dim_out));
    KrausChannel::new(dim_in, dim_out, random_kraus_ops(rng, dim_in, dim_out, k)).unwrap()
}

pub fn random_angles(rng: &mut impl Rng) -> BlochAngles {
    let z: f64 = rng.gen_range(-1.0..1.0);
    BlochAngles::new(z.acos(), rng.gen_range(0.0..2.0 * PI)).unwrap()
}

/// One of the three measure flavors, on a `dim`-dimensional input.
pub fn random_psm(rng: &mut impl Rng, dim: usize, dim_out_general: usize) -> Psm {
    match rng.gen_range(0..3) {
        0 => {
            let n = rng.gen_range(1..=4);
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let us = (0..n).map(|_| random_unitary(rng, dim)).collect();
            Psm::unitary_family(us, Some(raw.iter().map(|w| w / total).collect())).unwrap()
        }
        1 => {
            let u = random_unitary(rng, dim);
            Psm::projective((0..dim).map(|c| u.column(c)).collect(), None).unwrap()
        }
        _ => {
            let n = rng.gen_range(1..=3);
            let per = rng.gen_range(1..=2usize).max(dim.div_ceil(n * dim_out_general));
            let ops = random_kraus_ops(rng, dim, dim_out_general, n * per);
            let outcomes = ops
                .chunks(per)
                .enumerate()
                .map(|(a, chunk)| PsmOutcome {
                    label: format!("g{a}"),
                    weight: 1.0,
                    branch: chunk.to_vec(),
                })
                .collect();
            Psm::new(PsmFlavor::General, outcomes).unwrap()
        }
    }
}
