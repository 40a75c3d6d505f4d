//! Von Neumann entropy and the Holevo bound, in bits.

use crate::fock::{self, DensityOperator, Ensemble};
use crate::numerics::{self, HermitianMatrix};

/// Eigenvalues below this are treated as exact zeros.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

fn plogp(p: f64) -> f64 {
    if p < ENTROPY_CUTOFF {
        0.0
    } else {
        -p * p.log2()
    }
}

pub fn matrix_entropy(m: &HermitianMatrix) -> f64 {
    numerics::hermitian_eig(m).eigenvalues.iter().map(|&l| plogp(l)).sum::<f64>().max(0.0)
}

/// `S(ρ) = −Tr ρ log₂ ρ`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    matrix_entropy(rho.matrix())
}

/// `H(p) = −Σ p_i log₂ p_i`.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    probabilities.iter().map(|&p| plogp(p)).sum()
}

/// `χ = S(Σ p_i ρ_i) − Σ p_i S(ρ_i)`.
pub fn holevo_chi(e: &Ensemble) -> f64 {
    let average = von_neumann_entropy(&fock::mix(e));
    let members: f64 = e.members().iter().map(|(p, rho)| p * von_neumann_entropy(rho)).sum();
    (average - members).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplifier_channel, apply_channel, TransferMatrix};
    use crate::fock::{coherent_state, number_state, transform_density};
    use num_complex::Complex64;

    #[test]
    fn simple_entropies() {
        let pure = coherent_state(Complex64::new(0.7, 0.1), 12).unwrap().to_density();
        assert!(von_neumann_entropy(&pure).abs() < 1e-10);
        let half = DensityOperator::diagonal(&[0.5, 0.5]).unwrap();
        assert!((von_neumann_entropy(&half) - 1.0).abs() < 1e-14);
        assert!((shannon_entropy(&[0.5, 0.25, 0.25]) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn thermal_entropy_matches_bose_formula() {
        let nbar: f64 = 0.5;
        let thermal = apply_channel(&amplifier_channel(1.5, 80).unwrap(), &DensityOperator::vacuum(vec![80]), 0).unwrap();
        let bose = (nbar + 1.0) * (nbar + 1.0).log2() - nbar * nbar.log2();
        assert!((von_neumann_entropy(&thermal) - bose).abs() < 1e-8);
    }

    #[test]
    fn holevo_limits() {
        let rho = coherent_state(Complex64::new(0.5, 0.0), 8).unwrap().to_density();
        let same = Ensemble::new(vec![(0.3, rho.clone()), (0.7, rho)]).unwrap();
        assert!(holevo_chi(&same).abs() < 1e-10);

        let orthogonal = Ensemble::new(
            [0.5, 0.25, 0.25]
                .iter()
                .enumerate()
                .map(|(n, &p)| (p, number_state(n, 4).unwrap().to_density()))
                .collect(),
        )
        .unwrap();
        assert!((holevo_chi(&orthogonal) - 1.5).abs() < 1e-12);
        assert!(holevo_chi(&orthogonal) <= shannon_entropy(&orthogonal.probabilities()) + 1e-12);
    }

    #[test]
    fn entropy_is_unitarily_invariant() {
        let bs = TransferMatrix::beamsplitter(Complex64::new(0.8, 0.0), Complex64::new(0.6, 0.0)).unwrap();
        let mixed = DensityOperator::diagonal(&[0.7, 0.2, 0.1]).unwrap();
        let vac = DensityOperator::vacuum(vec![3]);
        let two = fock::tensor(&mixed, &vac);
        let out = transform_density(&two, &bs, &[0, 1]).unwrap();
        assert!((von_neumann_entropy(&out) - von_neumann_entropy(&two)).abs() < 1e-10);
    }
}
