//! Photodetector models as POVMs.
//!
//! An inefficient detector is a perfect counter behind an attenuator; a
//! preamplified one has a quantum-limited amplifier in front of that. The
//! readout-`m` effect is the Heisenberg-picture image of `|m⟩⟨m|` under
//! amplifier-then-loss, computed on a widened working space and cropped.

use crate::channels::{self, KrausChannel};
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, Ensemble};
use crate::numerics::{self, HermitianMatrix};

const POVM_TOL: f64 = 1e-10;
/// Amplifier population allowed to escape the working space.
const WORKING_TAIL: f64 = 1e-15;
const MAX_WORKING_DIM: usize = 4096;

/// One outcome of a measurement: `0 ⪯ E ⪯ I`.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    matrix: HermitianMatrix,
    outcome: usize,
}

impl PovmElement {
    pub fn new(matrix: HermitianMatrix, outcome: usize) -> Result<Self> {
        let eig = numerics::hermitian_eig(&matrix);
        if eig.min() < -POVM_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.min(),
            });
        }
        if eig.max() > 1.0 + POVM_TOL {
            return Err(Error::invalid("largest POVM eigenvalue", eig.max(), "effects must satisfy E <= I"));
        }
        Ok(PovmElement { matrix, outcome })
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn outcome(&self) -> usize {
        self.outcome
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Tr(ρ E)`, clamped to `[0, 1]`.
    pub fn probability(&self, rho: &DensityOperator) -> Result<f64> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        Ok(rho.matrix().trace_product(&self.matrix).clamp(0.0, 1.0))
    }
}

/// Detector efficiency `eta` behind a quantum-limited preamplifier of gain `gain`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    eta: f64,
    gain: f64,
}

impl DetectorModel {
    pub fn new(eta: f64, gain: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid("eta", eta, "efficiency must lie in (0, 1]"));
        }
        if !(gain >= 1.0 && gain.is_finite()) {
            return Err(Error::invalid("gain", gain, "gain must be >= 1"));
        }
        Ok(DetectorModel { eta, gain })
    }

    pub fn perfect() -> Self {
        DetectorModel { eta: 1.0, gain: 1.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn is_perfect(&self) -> bool {
        self.eta == 1.0 && self.gain == 1.0
    }
}

/// `|m⟩⟨m|` on a `dim`-level space.
pub fn ideal_projector(m: usize, dim: usize) -> Result<PovmElement> {
    if m >= dim {
        return Err(Error::invalid("readout", m as f64, "count must be below the truncation dimension"));
    }
    let mut diag = vec![0.0; dim];
    diag[m] = 1.0;
    Ok(PovmElement {
        matrix: HermitianMatrix::from_diagonal(&diag),
        outcome: m,
    })
}

/// Smallest working dimension in which the amplified top level `dim − 1`
/// loses less than [`WORKING_TAIL`] of its population.
fn working_dim(d: &DetectorModel, m: usize, dim: usize) -> Result<usize> {
    let base = (dim + dim.max(8)).max(m + 1);
    if d.gain == 1.0 {
        return Ok(base);
    }
    // P(n + k | n) = C(n+k, k) g^{−(n+1)} (1 − 1/g)^k for n = dim − 1. Past the
    // mode the term ratio falls monotonically, so the tail after term k is
    // bounded by a geometric series with the current ratio.
    let n = dim - 1;
    let excess = 1.0 - 1.0 / d.gain;
    let mut p = d.gain.powi(-(n as i32 + 1));
    for k in 0..MAX_WORKING_DIM {
        let ratio = (n + k + 1) as f64 / (k + 1) as f64 * excess;
        let next = p * ratio;
        if n + k + 1 >= base && ratio < 1.0 && next / (1.0 - ratio) < WORKING_TAIL {
            return Ok(n + k + 1);
        }
        p = next;
    }
    Err(Error::Truncation(format!(
        "gain {} needs a working space above {MAX_WORKING_DIM} levels for dim {dim}",
        d.gain
    )))
}

/// Effect of reading `m` counts, restricted to the first `dim` levels.
pub fn smeared_povm(d: &DetectorModel, m: usize, dim: usize) -> Result<PovmElement> {
    if d.is_perfect() {
        return ideal_projector(m, dim);
    }
    let w = working_dim(d, m, dim)?;
    let loss: KrausChannel = channels::loss_channel(d.eta, w)?;
    let amp: KrausChannel = channels::amplifier_channel(d.gain, w)?;
    let seen = loss.adjoint_matrix(ideal_projector(m, w)?.matrix())?;
    let effect = amp.adjoint_matrix(&seen)?;
    PovmElement::new(effect.crop(dim), m)
}

/// `P^p(m | ρ) = Tr(ρ E_m)`.
pub fn predictive_prob(d: &DetectorModel, readout: usize, arm_state: &DensityOperator) -> Result<f64> {
    if arm_state.n_modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: arm_state.n_modes(),
        });
    }
    smeared_povm(d, readout, arm_state.dim())?.probability(arm_state)
}

/// Posterior over the prior's members given `readout`, by Bayes' rule.
pub fn retrodictive_distribution(d: &DetectorModel, prior: &Ensemble, readout: usize) -> Result<Vec<f64>> {
    let dim = prior.members()[0].1.dim();
    let effect = smeared_povm(d, readout, dim)?;
    posterior(&effect, prior, readout)
}

/// Bayes posterior for a precomputed effect.
pub fn posterior(effect: &PovmElement, prior: &Ensemble, readout: usize) -> Result<Vec<f64>> {
    let joint = prior
        .members()
        .iter()
        .map(|(p, rho)| Ok(p * effect.probability(rho)?))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = joint.iter().sum();
    if !(total > 0.0) {
        return Err(Error::UndefinedPosterior { readout });
    }
    Ok(joint.into_iter().map(|j| j / total).collect())
}

/// `P^r(m | n)`: probability that the arm held prior member `hypothesis`
/// given that the detector read `readout`.
pub fn retrodictive_prob(d: &DetectorModel, prior: &Ensemble, hypothesis: usize, readout: usize) -> Result<f64> {
    if hypothesis >= prior.len() {
        return Err(Error::invalid("hypothesis", hypothesis as f64, "index outside the prior"));
    }
    Ok(retrodictive_distribution(d, prior, readout)?[hypothesis])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, number_state};
    use num_complex::Complex64;

    fn zero_count_series(eta: f64, g: f64, dim: usize) -> Vec<f64> {
        // Σ_n (1−η)^n / g^{n+1} Σ_{m≤n} C(n,m) (g−1)^{n−m} |m⟩⟨m|, summed literally
        let mut diag = vec![0.0; dim];
        for n in 0..=10 * dim {
            let prefactor = (1.0 - eta).powi(n as i32) / g.powi(n as i32 + 1);
            let mut binom = 1.0;
            let mut largest = 0.0f64;
            for m in 0..=n {
                if m > 0 {
                    binom *= (n - m + 1) as f64 / m as f64;
                }
                if m < dim {
                    let term = prefactor * binom * (g - 1.0).powi((n - m) as i32);
                    diag[m] += term;
                    largest = largest.max(term);
                }
            }
            if n >= dim && largest < 1e-15 {
                break;
            }
        }
        diag
    }

    #[test]
    fn ideal_projectors() {
        let p = ideal_projector(0, 4).unwrap();
        assert_eq!(p.matrix().diagonal(), vec![1.0, 0.0, 0.0, 0.0]);
        let sum = (0..4).fold(HermitianMatrix::zeros(4), |acc, m| {
            acc.add_scaled(ideal_projector(m, 4).unwrap().matrix(), 1.0)
        });
        assert_eq!(sum, HermitianMatrix::identity(4));
        assert!(ideal_projector(3, 2).is_err());
    }

    #[test]
    fn povm_element_bounds() {
        assert!(PovmElement::new(HermitianMatrix::from_diagonal(&[1.2, 0.0]), 0).is_err());
        assert!(PovmElement::new(HermitianMatrix::from_diagonal(&[-0.1, 0.0]), 0).is_err());
    }

    #[test]
    fn detector_ranges() {
        assert!(DetectorModel::new(0.0, 1.0).is_err());
        assert!(DetectorModel::new(0.5, 0.99).is_err());
        assert!(DetectorModel::new(1.0, 1.0).unwrap().is_perfect());
    }

    #[test]
    fn lossy_zero_count_operator() {
        let eta = 0.3;
        let e = smeared_povm(&DetectorModel::new(eta, 1.0).unwrap(), 0, 10).unwrap();
        for (n, v) in e.matrix().diagonal().iter().enumerate() {
            assert!((v - (1.0 - eta).powi(n as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_count_matches_literal_series() {
        for &(eta, g) in &[(0.25, 1.0), (0.5, 1.5), (0.9, 2.0), (0.75, 3.0), (0.25, 3.0)] {
            let dim = 32;
            let e = smeared_povm(&DetectorModel::new(eta, g).unwrap(), 0, dim).unwrap();
            let series = zero_count_series(eta, g, dim);
            for (k, (got, want)) in e.matrix().diagonal().iter().zip(&series).enumerate() {
                assert!((got - want).abs() < 1e-12, "eta={eta} g={g} k={k}: {got} vs {want}");
                let closed = (1.0 - eta).powi(k as i32) / (1.0 + eta * (g - 1.0)).powi(k as i32 + 1);
                assert!((got - closed).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn preamplified_vacuum_probability() {
        let d = DetectorModel::new(0.9, 1.5).unwrap();
        let p = predictive_prob(&d, 0, &DensityOperator::vacuum(vec![16])).unwrap();
        assert!((p - 1.0 / 1.45).abs() < 1e-12);
    }

    #[test]
    fn predictive_examples() {
        let rho = number_state(3, 6).unwrap().to_density();
        assert_eq!(predictive_prob(&DetectorModel::perfect(), 3, &rho).unwrap(), 1.0);
        let one = number_state(1, 6).unwrap().to_density();
        let p = predictive_prob(&DetectorModel::new(0.5, 1.0).unwrap(), 0, &one).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn completeness_without_gain() {
        let dim = 12;
        let d = DetectorModel::new(0.6, 1.0).unwrap();
        let mut sum = HermitianMatrix::zeros(dim);
        for m in 0..dim {
            sum = sum.add_scaled(smeared_povm(&d, m, dim).unwrap().matrix(), 1.0);
        }
        assert!(sum.max_abs_diff(&HermitianMatrix::identity(dim)) < 1e-8);
    }

    #[test]
    fn partial_sums_with_gain_increase_toward_identity() {
        let dim = 8;
        let d = DetectorModel::new(0.7, 2.0).unwrap();
        let mut sum = vec![0.0; dim];
        let mut previous_gap = f64::INFINITY;
        for m in 0..120 {
            let e = smeared_povm(&d, m, dim).unwrap().matrix().diagonal();
            for (s, v) in sum.iter_mut().zip(&e) {
                assert!(*v >= 0.0);
                *s += v;
            }
            let gap = sum.iter().map(|s| 1.0 - s).fold(0.0, f64::max);
            assert!(gap <= previous_gap + 1e-15);
            previous_gap = gap;
        }
        assert!(previous_gap < 1e-8);
    }

    #[test]
    fn retrodiction_with_orthogonal_priors() {
        let dim = 4;
        let prior = Ensemble::new(
            (0..3)
                .map(|n| (1.0 / 3.0, number_state(n, dim).unwrap().to_density()))
                .collect(),
        )
        .unwrap();
        for n in 0..3 {
            let dist = retrodictive_distribution(&DetectorModel::perfect(), &prior, n).unwrap();
            for (m, p) in dist.iter().enumerate() {
                assert_eq!(*p, if m == n { 1.0 } else { 0.0 });
            }
        }
        assert!(matches!(
            retrodictive_prob(&DetectorModel::perfect(), &prior, 0, 3),
            Err(Error::UndefinedPosterior { readout: 3 })
        ));
    }

    fn comparison_prior(alpha: f64, dim: usize) -> Ensemble {
        // detector arm: ½|0⟩⟨0| + ¼(|β⟩⟨β| + |−β⟩⟨−β|), β = √2 α, split by perfect readout
        let beta = Complex64::new(2f64.sqrt() * alpha, 0.0);
        let plus = coherent_state(beta, dim).unwrap().to_density();
        let minus = coherent_state(-beta, dim).unwrap().to_density();
        let mut diag: Vec<f64> = (0..dim)
            .map(|n| 0.25 * (plus.population(&[n]) + minus.population(&[n])))
            .collect();
        diag[0] += 0.5;
        let p0 = diag[0];
        diag[0] = 0.0;
        let rest: Vec<f64> = diag.iter().map(|v| v / (1.0 - p0)).collect();
        Ensemble::new(vec![
            (p0, DensityOperator::vacuum(vec![dim])),
            (1.0 - p0, DensityOperator::diagonal(&rest).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn comparison_retrodiction_without_gain() {
        let prior = comparison_prior(1.0, 64);
        assert!((prior.probabilities()[0] - 0.5 * (1.0 + (-2f64).exp())).abs() < 1e-12);
        let d = DetectorModel::new(0.5, 1.0).unwrap();
        let p = retrodictive_prob(&d, &prior, 0, 0).unwrap();
        let expected = (1.0 + (-2f64).exp()) / (1.0 + (-1f64).exp());
        assert!((p - expected).abs() < 1e-12);
        assert!((p - 0.82999).abs() < 1e-5);
        let dist = retrodictive_distribution(&d, &prior, 0).unwrap();
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uninformative_detector_returns_prior() {
        let prior = comparison_prior(1.0, 32);
        let d = DetectorModel::new(1e-6, 1.0).unwrap();
        let dist = retrodictive_distribution(&d, &prior, 0).unwrap();
        for (post, p) in dist.iter().zip(prior.probabilities()) {
            assert!((post - p).abs() < 1e-6);
        }
    }
}
