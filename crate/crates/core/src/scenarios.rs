//! End-to-end postselection devices.
//!
//! * Coherent-state comparison: two inputs drawn from `{|α⟩, |−α⟩}` meet on a
//!   50/50 splitter and arm 1 is kept when the arm-2 detector reads zero.
//! * Two-photon generator: `|1,1⟩` on a uniformly lossy splitter, kept when
//!   arm 2 is empty.
//! * Nonlinear sign shift: signal plus ancillas `|1⟩|0⟩` on two splitters,
//!   kept when the ancillas read `(1, 0)`.

use num_complex::Complex64;

use crate::channels::{self, TransferMatrix};
use crate::detection::{self, DetectorModel, PovmElement};
use crate::error::{Error, Result};
use crate::fidelity::{self, DenominatorSign};
use crate::fock::{self, coherent_state, number_state, DensityOperator, Ensemble, ProductMixture, ProductTerm, PureState};
use crate::information;
use crate::numerics::HermitianMatrix;

/// Working truncation for the comparison detector arm.
pub const COMPARISON_DIM: usize = 64;
/// Per-mode truncation for the sign-shift gate.
pub const NS_DIM: usize = 5;
/// Largest distance tolerated between the two constructions of the
/// comparison output.
pub const CONSTRUCTION_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub alpha: f64,
    pub eta: f64,
    pub gain: f64,
    pub p_max: f64,
    pub pr00_povm: f64,
    pub pr00_closed: f64,
    pub f_c: f64,
    pub f_uhlmann: f64,
    pub p_zero_counts: f64,
    pub chi_unprocessed: f64,
    pub chi_attenuated: f64,
    pub chi_amp_att: f64,
    pub tail_mass: f64,
}

/// `½|0⟩⟨0| + ¼|α⟩⟨α| + ¼|−α⟩⟨−α|`, the same form as the detector-arm state.
pub fn probe_ensemble(alpha: f64, dim: usize) -> Result<Ensemble> {
    Ensemble::new(vec![
        (0.5, DensityOperator::vacuum(vec![dim])),
        (0.25, coherent_state(c(alpha, 0.0), dim)?.to_density()),
        (0.25, coherent_state(c(-alpha, 0.0), dim)?.to_density()),
    ])
}

fn coherent(beta: Complex64, dim: usize) -> Result<DensityOperator> {
    Ok(coherent_state(beta, dim)?.to_density())
}

/// Joint output written down term by term: each of the four input pairs
/// leaves `|±√2α⟩` in one arm and vacuum in the other.
pub fn comparison_output_direct(alpha: f64, dim: usize) -> Result<ProductMixture> {
    let b = c(2f64.sqrt() * alpha, 0.0);
    let vac = coherent(c(0.0, 0.0), dim)?;
    ProductMixture::new(vec![
        ProductTerm {
            weight: 0.25,
            first: coherent(b, dim)?,
            second: vac.clone(),
        },
        ProductTerm {
            weight: 0.25,
            first: coherent(-b, dim)?,
            second: vac.clone(),
        },
        ProductTerm {
            weight: 0.25,
            first: vac.clone(),
            second: coherent(-b, dim)?,
        },
        ProductTerm {
            weight: 0.25,
            first: vac,
            second: coherent(b, dim)?,
        },
    ])
}

/// Joint output obtained by sending each input pair through the 50/50
/// splitter with a π reflection phase from arm 2.
pub fn comparison_output_evolved(alpha: f64, dim: usize) -> Result<ProductMixture> {
    let h = 1.0 / 2f64.sqrt();
    let bs = TransferMatrix::beamsplitter(c(h, 0.0), c(h, 0.0))?;
    let mut terms = Vec::with_capacity(4);
    for a in [alpha, -alpha] {
        for b in [alpha, -alpha] {
            let out = bs.apply_to_amplitudes(&[c(a, 0.0), c(b, 0.0)]);
            terms.push(ProductTerm {
                weight: 0.25,
                first: coherent(out[0], dim)?,
                second: coherent(out[1], dim)?,
            });
        }
    }
    ProductMixture::new(terms)
}

/// Perfect-readout split of the detector-arm state: the zero-count measured
/// state (vacuum) with `p₀ = ½(1 + e^{−2|α|²})` and the dephased `m > 0`
/// remainder.
pub fn comparison_prior(arm: &DensityOperator) -> Result<Ensemble> {
    let mut populations = arm.matrix().diagonal();
    let p0 = populations[0].clamp(0.0, 1.0);
    let mut members = vec![(p0, DensityOperator::vacuum(arm.mode_dims().to_vec()))];
    populations[0] = 0.0;
    let rest: f64 = populations.iter().sum();
    if rest > 0.0 {
        let normalized: Vec<f64> = populations.iter().map(|p| p / rest).collect();
        members[0].0 = 1.0 - rest;
        members.push((rest, DensityOperator::diagonal(&normalized)?));
    } else {
        members[0].0 = 1.0;
    }
    Ensemble::new(members)
}

/// Largest space the probe ensemble is grown to when amplification pushes
/// it past the requested truncation.
pub const MAX_PROBE_DIM: usize = 512;

/// Holevo bounds of the probe ensemble raw, after loss, and after
/// amplification followed by loss. Amplified probes outgrow `dim` quickly, so
/// the space is doubled until the amplifier keeps its trace.
pub fn probe_information(alpha: f64, eta: f64, gain: f64, dim: usize) -> Result<(f64, f64, f64)> {
    let mut d = dim;
    loop {
        let probes = probe_ensemble(alpha, d)?;
        let amp = channels::amplifier_channel(gain, d)?;
        match probes.map_states(|rho| channels::apply_channel(&amp, rho, 0)) {
            Ok(amplified) => {
                let loss = channels::loss_channel(eta, d)?;
                let attenuated = probes.map_states(|rho| channels::apply_channel(&loss, rho, 0))?;
                let amp_att = amplified.map_states(|rho| channels::apply_channel(&loss, rho, 0))?;
                return Ok((
                    information::holevo_chi(&probes),
                    information::holevo_chi(&attenuated),
                    information::holevo_chi(&amp_att),
                ));
            }
            Err(Error::Truncation(_)) if d < MAX_PROBE_DIM => d = (2 * d).min(MAX_PROBE_DIM),
            Err(e) => return Err(e),
        }
    }
}

/// Full comparison pipeline at truncation `dim`.
///
/// At `α = 0` the correct and incorrect branches coincide and the mixing
/// weight is degenerate; `p_max` is reported as its `α → 0⁺` limit of ½.
pub fn coherent_comparison(alpha: f64, eta: f64, gain: f64, dim: usize, sign: DenominatorSign) -> Result<ComparisonResult> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", alpha, "amplitude must be a finite nonnegative real"));
    }
    if alpha > 0.0 && alpha < 1e-3 {
        return Err(Error::invalid("alpha", alpha, "amplitudes in (0, 1e-3) cannot be resolved from the vacuum"));
    }
    let detector = DetectorModel::new(eta, gain)?;

    let joint = comparison_output_evolved(alpha, dim)?;
    let direct = comparison_output_direct(alpha, dim)?;
    match joint.termwise_distance(&direct, CONSTRUCTION_TOL) {
        Some(d) if d <= CONSTRUCTION_TOL => {}
        other => {
            return Err(Error::Convention(format!(
                "splitter output disagrees with the direct construction (distance {other:?})"
            )))
        }
    }

    let b = c(2f64.sqrt() * alpha, 0.0);
    let target = DensityOperator::from_unnormalized(
        vec![dim],
        coherent(b, dim)?.matrix().scale(0.5).add_scaled(coherent(-b, dim)?.matrix(), 0.5),
    )?
    .0;

    let conditioned = |effect: &PovmElement| -> Result<(DensityOperator, f64)> {
        let (rho, prob) = DensityOperator::from_unnormalized(vec![dim], joint.condition_first(effect.matrix()))?;
        Ok((rho.with_tail_mass(joint.tail_mass()), prob))
    };
    let (perfect_output, _) = conditioned(&detection::ideal_projector(0, dim)?)?;
    let zero_effect = detection::smeared_povm(&detector, 0, dim)?;
    let (output, p_zero_counts) = conditioned(&zero_effect)?;

    let prior = comparison_prior(&joint.second_marginal())?;
    let pr00_povm = detection::posterior(&zero_effect, &prior, 0)?[0];
    let pr00_closed = fidelity::closed_form_pr00(alpha, eta, gain, sign)?;

    let p_max = if alpha == 0.0 {
        fidelity::closed_form_pmax(0.0)
    } else {
        fidelity::decompose_pmax(&perfect_output, &target)?.p_max
    };
    let f_uhlmann = fidelity::uhlmann_fidelity(&output, &target)?;

    let (chi_unprocessed, chi_attenuated, chi_amp_att) = probe_information(alpha, eta, gain, dim)?;

    Ok(ComparisonResult {
        alpha,
        eta,
        gain,
        p_max,
        pr00_povm,
        pr00_closed,
        f_c: p_max * pr00_povm,
        f_uhlmann,
        p_zero_counts: p_zero_counts.clamp(0.0, 1.0),
        chi_unprocessed,
        chi_attenuated,
        chi_amp_att,
        tail_mass: joint.tail_mass(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonResult {
    pub t: Complex64,
    pub r: Complex64,
    pub p20: f64,
    pub p10: f64,
    pub p00: f64,
    pub p01: f64,
    pub p02: f64,
    pub f_c_formula: f64,
    pub f_c_simulated: f64,
}

/// Closed-form `(p20, p10, p00)` for `|1,1⟩` on a lossy splitter.
pub fn two_photon_formula(t: Complex64, r: Complex64) -> Result<(f64, f64, f64)> {
    let k = t.norm_sqr() + r.norm_sqr();
    if k > 1.0 + 1e-12 {
        return Err(Error::invalid("|t|^2 + |r|^2", k, "a passive splitter cannot exceed 1"));
    }
    let cross = (t * r.conj() + r * t.conj()).re;
    let p20 = 2.0 * t.norm_sqr() * r.norm_sqr();
    let p10 = k * (1.0 - k) - cross * cross;
    let p00 = (1.0 - k) * (1.0 - k) + cross * cross;
    if p10 < -1e-12 {
        return Err(Error::Convention(format!(
            "phase of t r* = {:.6} makes p10 = {p10:.3e} negative",
            t * r.conj()
        )));
    }
    Ok((p20, p10.max(0.0), p00))
}

/// Two-photon generator by formula and by simulating `|1,1⟩` through the
/// symmetric splitter `[[t, r], [r, t]]`, kept on vacuum in arm 2.
pub fn two_photon_generator(t: Complex64, r: Complex64, dim: usize) -> Result<TwoPhotonResult> {
    if dim < 3 {
        return Err(Error::invalid("dim", dim as f64, "two photons need at least 3 levels per mode"));
    }
    let (p20, p10, p00) = two_photon_formula(t, r)?;
    let one = number_state(1, dim)?;
    let input = one.tensor(&one).to_density();
    let out = channels::lossy_beamsplitter(&input, t, r)?;

    let vacuum = detection::ideal_projector(0, dim)?;
    let (arm1, _) = fock::condition(&out, &[0], vacuum.matrix())?;
    let target = number_state(2, dim)?.to_density();
    let f_c_simulated = fidelity::decompose_pmax(&arm1, &target)?.p_max;

    Ok(TwoPhotonResult {
        t,
        r,
        p20,
        p10,
        p00,
        p01: out.population(&[0, 1]),
        p02: out.population(&[0, 2]),
        f_c_formula: p20 / (p20 + p10 + p00),
        f_c_simulated,
    })
}

/// Which side of a splitter carries the π reflection phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreySide {
    Signal,
    Ancilla,
}

/// Reflection-phase placement for both sign-shift splitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NsConvention {
    pub first: GreySide,
    pub second: GreySide,
}

/// Placement that reproduces the sign shift; checked against
/// [`calibrate_ns_convention`] in the tests.
pub const NS_CONVENTION: NsConvention = NsConvention {
    first: GreySide::Signal,
    second: GreySide::Ancilla,
};

/// `|r₁|² = 5 − 3√2`, `|r₂|² = (3 − √2)/7`.
pub fn ns_reflectivities() -> (f64, f64) {
    let s = 2f64.sqrt();
    (5.0 - 3.0 * s, (3.0 - s) / 7.0)
}

pub fn ns_success_probability() -> f64 {
    ns_reflectivities().1
}

/// `[[±r, t], [t, ±r]]` in (signal, ancilla) order; reflection keeps a photon
/// in its own mode.
fn ns_splitter(reflectivity: f64, grey: GreySide, k_loss: f64) -> Result<TransferMatrix> {
    let r = reflectivity.sqrt();
    let t = (1.0 - reflectivity).sqrt();
    let (rs, ra) = match grey {
        GreySide::Signal => (-r, r),
        GreySide::Ancilla => (r, -r),
    };
    let scale = k_loss.sqrt();
    TransferMatrix::new(
        fock_matrix(&[rs, t, t, ra]).scale(scale),
    )
}

fn fock_matrix(entries: &[f64; 4]) -> crate::numerics::CMatrix {
    crate::numerics::CMatrix::from_row_slice(2, 2, &entries.map(|v| c(v, 0.0)))
}

fn ns_input(coeffs: &[Complex64; 3], dim: usize) -> Result<PureState> {
    let mut signal = vec![c(0.0, 0.0); dim];
    signal[..3].copy_from_slice(coeffs);
    let signal = PureState::new(vec![dim], signal)?;
    Ok(signal.tensor(&number_state(1, dim)?).tensor(&number_state(0, dim)?))
}

fn ns_target(coeffs: &[Complex64; 3], dim: usize) -> Result<PureState> {
    let mut v = vec![c(0.0, 0.0); dim];
    v[0] = coeffs[0];
    v[1] = coeffs[1];
    v[2] = -coeffs[2];
    PureState::new(vec![dim], v)
}

/// Effect for ancilla readout `(1, 0)` on the joint ancilla space.
fn ns_herald(dim: usize) -> HermitianMatrix {
    let mut diag = vec![0.0; dim * dim];
    diag[dim] = 1.0;
    HermitianMatrix::from_diagonal(&diag)
}

/// Lossless gate on a pure input; returns the heralded signal state and
/// the heralding probability.
fn ns_lossless(convention: NsConvention, coeffs: &[Complex64; 3], dim: usize) -> Result<(DensityOperator, f64)> {
    let (r1, r2) = ns_reflectivities();
    let state = ns_input(coeffs, dim)?;
    let state = fock::apply_mode_transform_on(&state, &ns_splitter(r1, convention.first, 1.0)?, &[0, 2], fock::DEFAULT_MAX_PHOTONS)?;
    let state = fock::apply_mode_transform_on(&state, &ns_splitter(r2, convention.second, 1.0)?, &[0, 1], fock::DEFAULT_MAX_PHOTONS)?;
    fock::condition(&state.to_density(), &[0], &ns_herald(dim))
}

fn ns_passes(convention: NsConvention) -> Result<bool> {
    let norm = 3f64.sqrt();
    let probes = [
        [c(1.0 / norm, 0.0), c(1.0 / norm, 0.0), c(1.0 / norm, 0.0)],
        [c(0.3, 0.1), c(0.5, -0.2), c(0.0, 0.0)],
    ];
    for raw in probes {
        let scale = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let coeffs = raw.map(|z| z / scale);
        let (out, prob) = ns_lossless(convention, &coeffs, NS_DIM)?;
        let target = ns_target(&coeffs, NS_DIM)?.to_density();
        let overlap = out.matrix().trace_product(target.matrix());
        if overlap < 1.0 - 1e-9 || (prob - ns_success_probability()).abs() > 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All four reflection-phase placements in enumeration order.
pub fn ns_candidates() -> [NsConvention; 4] {
    let sides = [GreySide::Signal, GreySide::Ancilla];
    let mut out = [NS_CONVENTION; 4];
    for (i, &first) in sides.iter().enumerate() {
        for (j, &second) in sides.iter().enumerate() {
            out[2 * i + j] = NsConvention { first, second };
        }
    }
    out
}

/// Placements for which the lossless gate realizes the sign shift.
pub fn passing_ns_conventions() -> Result<Vec<NsConvention>> {
    let mut passing = Vec::new();
    for candidate in ns_candidates() {
        if ns_passes(candidate)? {
            passing.push(candidate);
        }
    }
    Ok(passing)
}

/// First passing placement; fails loudly when none works.
pub fn calibrate_ns_convention() -> Result<NsConvention> {
    passing_ns_conventions()?
        .first()
        .copied()
        .ok_or_else(|| Error::Convention("no reflection-phase placement realizes the sign shift".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlssResult {
    pub k_loss: f64,
    pub input_coeffs: [Complex64; 3],
    pub success_prob: f64,
    pub conditional_output: DensityOperator,
    /// `⟨ψ_target| ρ |ψ_target⟩`.
    pub target_fidelity: f64,
    pub p_max: f64,
    pub k4_ratio: f64,
}

/// Sign-shift gate with both splitters scaled by `√K`, realized as the
/// lossless splitter followed by `loss(K)` on both of its outputs.
pub fn nlss_gate(k_loss: f64, input_coeffs: [Complex64; 3], dim: usize) -> Result<NlssResult> {
    if !(k_loss > 0.0 && k_loss <= 1.0) {
        return Err(Error::invalid("K", k_loss, "loss factor must lie in (0, 1]"));
    }
    if dim < 4 {
        return Err(Error::invalid("dim", dim as f64, "the signal mode needs at least 4 levels"));
    }
    let norm: f64 = input_coeffs.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("input norm", norm, "coefficients must have unit norm"));
    }
    let (r1, r2) = ns_reflectivities();
    let rho = ns_input(&input_coeffs, dim)?.to_density();
    let rho = channels::apply_lossy_transform(&rho, &ns_splitter(r1, NS_CONVENTION.first, k_loss)?, &[0, 2])?;
    let rho = channels::apply_lossy_transform(&rho, &ns_splitter(r2, NS_CONVENTION.second, k_loss)?, &[0, 1])?;
    let (output, success_prob) = fock::condition(&rho, &[0], &ns_herald(dim))?;

    let target = ns_target(&input_coeffs, dim)?.to_density();
    let target_fidelity = output.matrix().trace_product(target.matrix()).clamp(0.0, 1.0);
    let p_max = fidelity::decompose_pmax(&output, &target)?.p_max;
    Ok(NlssResult {
        k_loss,
        input_coeffs,
        success_prob,
        conditional_output: output,
        target_fidelity,
        p_max,
        k4_ratio: p_max / k_loss.powi(4),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_constructions_agree() {
        for alpha in [0.5, 1.0, 2.0] {
            let a = comparison_output_direct(alpha, 32).unwrap();
            let b = comparison_output_evolved(alpha, 32).unwrap();
            assert!(a.termwise_distance(&b, CONSTRUCTION_TOL).unwrap() <= CONSTRUCTION_TOL);
            assert!(a.max_abs_diff(&b) <= 1e-10);
        }
    }

    #[test]
    fn perfect_detector_comparison() {
        let r = coherent_comparison(1.0, 1.0, 1.0, COMPARISON_DIM, DenominatorSign::Plus).unwrap();
        assert!((r.f_c - 0.880797077978).abs() < 1e-8);
        assert!((r.pr00_povm - 1.0).abs() < 1e-12);
        assert!((r.pr00_closed - 1.0).abs() < 1e-15);
        assert!(r.f_c <= r.f_uhlmann + 1e-8);
    }

    #[test]
    fn lossy_comparison_matches_closed_forms() {
        let r = coherent_comparison(1.0, 0.5, 1.0, COMPARISON_DIM, DenominatorSign::Plus).unwrap();
        assert!((r.pr00_povm - 0.8299965984).abs() < 1e-8);
        assert!((r.f_c - 0.7310585786).abs() < 1e-8);
        let g2 = coherent_comparison(1.0, 0.5, 2.0, COMPARISON_DIM, DenominatorSign::Plus).unwrap();
        assert!((g2.pr00_povm - g2.pr00_closed).abs() < 1e-8);
        assert!((g2.pr00_povm - 0.8984946618).abs() < 1e-8);
    }

    #[test]
    fn lossy_detectors_overreport_zero() {
        let lossy = coherent_comparison(1.0, 0.25, 1.0, 32, DenominatorSign::Plus).unwrap();
        let ideal = coherent_comparison(1.0, 1.0, 1.0, 32, DenominatorSign::Plus).unwrap();
        assert!(lossy.p_zero_counts > ideal.p_zero_counts);
    }

    #[test]
    fn vacuum_inputs() {
        let r = coherent_comparison(0.0, 0.7, 2.0, 40, DenominatorSign::Plus).unwrap();
        assert_eq!(r.f_c, 0.5);
        assert!(r.chi_unprocessed.abs() < 1e-9);
        assert!((r.p_zero_counts - 1.0 / 1.7).abs() < 1e-12);
        assert!(coherent_comparison(1e-5, 0.7, 2.0, 40, DenominatorSign::Plus).is_err());
    }

    #[test]
    fn two_photon_lossless_and_lossy() {
        let h = 1.0 / 2f64.sqrt();
        let lossless = two_photon_generator(c(h, 0.0), c(0.0, h), 4).unwrap();
        assert!((lossless.f_c_formula - 1.0).abs() < 1e-12);
        assert!((lossless.f_c_simulated - 1.0).abs() < 1e-9);

        let r = two_photon_generator(c(0.6, 0.0), c(0.0, 0.6), 4).unwrap();
        assert!((r.p20 - 0.2592).abs() < 1e-12);
        assert!((r.p10 - 0.2016).abs() < 1e-12);
        assert!((r.p00 - 0.0784).abs() < 1e-12);
        assert!((r.f_c_formula - 0.480712).abs() < 1e-6);
        assert!((r.f_c_formula - r.f_c_simulated).abs() < 1e-8);
        assert!((r.p02 - r.p20).abs() < 1e-12);
    }

    #[test]
    fn two_photon_equal_split_curve() {
        let mut last = 0.0;
        for i in 1..=20 {
            let x = i as f64 / 20.0 / 2f64.sqrt();
            let r = two_photon_generator(c(x, 0.0), c(0.0, x), 4).unwrap();
            let x2 = x * x;
            let closed = 2.0 * x2 * x2 / (2.0 * x2 * x2 - 2.0 * x2 + 1.0);
            assert!((r.f_c_formula - closed).abs() < 1e-12);
            assert!((r.f_c_simulated - closed).abs() < 1e-8);
            assert!(r.f_c_formula > last);
            last = r.f_c_formula;
        }
    }

    #[test]
    fn two_photon_rejections() {
        assert!(two_photon_generator(c(0.8, 0.0), c(0.0, 0.8), 4).is_err());
        // real t and r put the whole cross term in the denominator
        assert!(matches!(two_photon_formula(c(0.6, 0.0), c(0.6, 0.0)), Err(Error::Convention(_))));
    }

    #[test]
    fn ns_calibration() {
        let passing = passing_ns_conventions().unwrap();
        assert_eq!(passing.len(), 2);
        assert_eq!(calibrate_ns_convention().unwrap(), NS_CONVENTION);
    }

    #[test]
    fn ns_lossless_gate() {
        let s = 1.0 / 3f64.sqrt();
        let r = nlss_gate(1.0, [c(s, 0.0); 3], NS_DIM).unwrap();
        assert!((r.success_prob - 0.2265409197).abs() < 1e-9);
        assert!((r.target_fidelity - 1.0).abs() < 1e-9);
        assert!((r.p_max - 1.0).abs() < 1e-9);

        let vac = nlss_gate(1.0, [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], NS_DIM).unwrap();
        assert!((vac.conditional_output.population(&[0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ns_lossy_gate() {
        let s = 1.0 / 3f64.sqrt();
        let mut last = 0.0;
        for k in [0.9, 0.95, 0.99] {
            let r = nlss_gate(k, [c(s, 0.0); 3], NS_DIM).unwrap();
            assert!(r.p_max < 1.0 && r.p_max > last);
            assert!((0.0..=1.0).contains(&r.success_prob));
            last = r.p_max;
        }
        assert!(nlss_gate(0.0, [c(s, 0.0); 3], NS_DIM).is_err());
        assert!(nlss_gate(1.0, [c(0.5, 0.0); 3], NS_DIM).is_err());
    }
}
