#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use postselect::numerics::{self, HermitianMatrix};
use postselect::DensityOperator;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `G G† / Tr` for a `dim × rank` Ginibre matrix.
pub fn random_density(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> DensityOperator {
    let g = ginibre(rng, dim, rank);
    let m = HermitianMatrix::hermitize(&g * g.adjoint());
    let t = m.trace();
    DensityOperator::new(vec![dim], m.scale(1.0 / t)).unwrap()
}

/// Random effect `0 ⪯ E ⪯ I`.
pub fn random_effect(rng: &mut ChaCha8Rng, dim: usize) -> HermitianMatrix {
    let g = ginibre(rng, dim, dim);
    let m = HermitianMatrix::hermitize(&g * g.adjoint());
    let top = numerics::hermitian_eig(&m).max();
    m.scale(rng.gen_range(0.1..1.0) / top)
}

pub fn unit_coeffs(rng: &mut ChaCha8Rng) -> [Complex64; 3] {
    let raw: Vec<Complex64> = (0..3)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    [raw[0] / norm, raw[1] / norm, raw[2] / norm]
}
