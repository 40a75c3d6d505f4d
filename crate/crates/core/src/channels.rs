//! Optical elements and single-mode quantum channels.
//!
//! Both channel kinds used here (pure loss and the quantum-limited
//! phase-insensitive amplifier) have Kraus operators that move every number
//! state by a fixed photon shift, so they are stored as [`ShiftOperator`]s
//! rather than dense matrices. Kraus coefficients are exact; truncation only
//! drops the population pushed above the top level, and [`apply_channel`]
//! refuses to hide more than 1e-6 of it.

use num_complex::Complex64;

use crate::detection::PovmElement;
use crate::error::{Error, Result};
use crate::fock::{self, DensityOperator};
use crate::numerics::{self, CMatrix, HermitianMatrix};

/// Largest trace deficit [`apply_channel`] tolerates.
pub const TRACE_DEFICIT_LIMIT: f64 = 1e-6;

const UNITARY_TOL: f64 = 1e-10;
const CONTRACTION_TOL: f64 = 1e-12;

/// Mode-space linear map `a†_i ↦ Σ_j M_ji a†_j`. Coherent amplitudes
/// transform as `β = M α`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    entries: CMatrix,
    unitary: bool,
}

impl TransferMatrix {
    /// Any square contraction (all singular values ≤ 1).
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        let gram = HermitianMatrix::hermitize(entries.adjoint() * &entries);
        let top = numerics::hermitian_eig(&gram).max();
        if top.sqrt() > 1.0 + CONTRACTION_TOL {
            return Err(Error::invalid(
                "largest singular value",
                top.sqrt(),
                "transfer matrices must be contractions",
            ));
        }
        let n = entries.nrows();
        let unitary = gram.max_abs_diff(&HermitianMatrix::identity(n)) <= UNITARY_TOL;
        Ok(TransferMatrix { entries, unitary })
    }

    pub fn identity(n: usize) -> Self {
        TransferMatrix {
            entries: CMatrix::identity(n, n),
            unitary: true,
        }
    }

    /// Lossless splitter `[[t, r], [−r, t]]`: a π phase on reflection from
    /// the second input, so `|α⟩|β⟩ ↦ |tα + rβ⟩|tβ − rα⟩`.
    pub fn beamsplitter(t: Complex64, r: Complex64) -> Result<Self> {
        let k = t.norm_sqr() + r.norm_sqr();
        if (k - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("|t|^2 + |r|^2", k, "lossless splitter needs unit row norm"));
        }
        let m = TransferMatrix::new(CMatrix::from_row_slice(2, 2, &[t, r, -r, t]))?;
        if !m.unitary {
            return Err(Error::invalid(
                "Im(conj(t) r)",
                (t.conj() * r).im,
                "[[t, r], [-r, t]] is unitary only for real conj(t) r",
            ));
        }
        Ok(m)
    }

    /// Symmetric splitter `[[t, r], [r, t]]`, lossy when `|t|² + |r|² < 1`.
    /// Lossless exactly when `Re(t r*) = 0`, e.g. real `t` and imaginary `r`.
    pub fn symmetric(t: Complex64, r: Complex64) -> Result<Self> {
        TransferMatrix::new(CMatrix::from_row_slice(2, 2, &[t, r, r, t]))
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// Output coherent amplitudes for coherent inputs `amplitudes`.
    pub fn apply_to_amplitudes(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        (0..self.size())
            .map(|i| (0..self.size()).map(|j| self.entries[(i, j)] * amplitudes[j]).sum())
            .collect()
    }

    /// Splits `M = √K · U` with `U` unitary. Fails for non-uniform loss.
    pub fn uniform_loss_factor(&self) -> Result<(f64, TransferMatrix)> {
        let n = self.size();
        let gram = self.entries.adjoint() * &self.entries;
        let k = (0..n).map(|i| gram[(i, i)].re).sum::<f64>() / n as f64;
        if !(k > 0.0) {
            return Err(Error::UnsupportedDilation("transfer matrix is zero".into()));
        }
        let k = k.min(1.0);
        let u = self.entries.scale(1.0 / k.sqrt());
        let defect = (u.adjoint() * &u - CMatrix::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > UNITARY_TOL {
            return Err(Error::UnsupportedDilation(format!(
                "M is not sqrt(K) times a unitary (defect {defect:.3e}); only uniform loss is supported"
            )));
        }
        Ok((
            k,
            TransferMatrix {
                entries: u,
                unitary: true,
            },
        ))
    }
}

/// Kraus operator with `⟨n + shift| K |n⟩ = coefficients[n]` and no other
/// nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOperator {
    pub shift: isize,
    pub coefficients: Vec<f64>,
}

impl ShiftOperator {
    fn target(&self, n: usize, dim: usize) -> Option<usize> {
        let t = n as isize + self.shift;
        (t >= 0 && (t as usize) < dim).then_some(t as usize)
    }

    pub fn to_matrix(&self) -> CMatrix {
        let dim = self.coefficients.len();
        let mut m = CMatrix::zeros(dim, dim);
        for (n, &c) in self.coefficients.iter().enumerate() {
            if let Some(t) = self.target(n, dim) {
                m[(t, n)] = Complex64::new(c, 0.0);
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    Loss { eta: f64 },
    Amplifier { gain: f64 },
}

/// Single-mode channel realized by Kraus operators on a `dim`-level space.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kind: ChannelKind,
    dim: usize,
    operators: Vec<ShiftOperator>,
}

/// Pure-loss channel of transmissivity `eta`:
/// `⟨n−k|K_k|n⟩ = √(C(n,k) η^{n−k} (1−η)^k)`.
pub fn loss_channel(eta: f64, dim: usize) -> Result<KrausChannel> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid("eta", eta, "efficiency must lie in (0, 1]"));
    }
    let kmax = if eta < 1.0 { dim } else { 1 };
    let operators = (0..kmax)
        .map(|k| {
            // c(k) = (1−η)^{k/2}, c(n+1)/c(n) = √((n+1) η / (n+1−k))
            let mut coefficients = vec![0.0; dim];
            let mut c = (1.0 - eta).powf(k as f64 / 2.0);
            for n in k..dim {
                if n > k {
                    c *= (n as f64 * eta / (n - k) as f64).sqrt();
                }
                coefficients[n] = c;
            }
            ShiftOperator {
                shift: -(k as isize),
                coefficients,
            }
        })
        .collect();
    Ok(KrausChannel {
        kind: ChannelKind::Loss { eta },
        dim,
        operators,
    })
}

/// Quantum-limited phase-insensitive amplifier of gain `g` (two-mode squeezer
/// with a vacuum idler that is traced out):
/// `⟨n+k|A_k|n⟩ = √(C(n+k,k) g^{−(n+1)} (1 − 1/g)^k)`.
pub fn amplifier_channel(g: f64, dim: usize) -> Result<KrausChannel> {
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::invalid("gain", g, "gain must be >= 1"));
    }
    let excess = 1.0 - 1.0 / g;
    let kmax = if g > 1.0 { dim } else { 1 };
    let operators = (0..kmax)
        .map(|k| {
            // c(0) = √(g^{−1} e^k), c(n+1)/c(n) = √((n+1+k) / ((n+1) g))
            let mut coefficients = vec![0.0; dim];
            let mut c = (excess.powi(k as i32) / g).sqrt();
            for n in 0..dim.saturating_sub(k) {
                if n > 0 {
                    c *= ((n + k) as f64 / (n as f64 * g)).sqrt();
                }
                coefficients[n] = c;
            }
            ShiftOperator {
                shift: k as isize,
                coefficients,
            }
        })
        .collect();
    Ok(KrausChannel {
        kind: ChannelKind::Amplifier { gain: g },
        dim,
        operators,
    })
}

impl KrausChannel {
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ShiftOperator] {
        &self.operators
    }

    /// `Σ_k K_k† K_k` on the truncated space.
    pub fn completeness(&self) -> HermitianMatrix {
        let mut diag = vec![0.0; self.dim];
        for op in &self.operators {
            for (n, &c) in op.coefficients.iter().enumerate() {
                if op.target(n, self.dim).is_some() {
                    diag[n] += c * c;
                }
            }
        }
        HermitianMatrix::from_diagonal(&diag)
    }

    /// Schrödinger-picture map `ρ ↦ Σ_k K_k ρ K_k†` on a bare single-mode
    /// matrix, without renormalizing what the truncation drops.
    pub fn apply_matrix(&self, rho: &HermitianMatrix) -> Result<HermitianMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        let d = self.dim;
        let src = rho.as_matrix();
        let mut out = CMatrix::zeros(d, d);
        for op in &self.operators {
            for n in 0..d {
                let Some(tn) = op.target(n, d) else { continue };
                let cn = op.coefficients[n];
                if cn == 0.0 {
                    continue;
                }
                for m in 0..d {
                    let Some(tm) = op.target(m, d) else { continue };
                    out[(tn, tm)] += src[(n, m)] * (cn * op.coefficients[m]);
                }
            }
        }
        Ok(HermitianMatrix::hermitize(out))
    }

    /// Heisenberg-picture map `E ↦ Σ_k K_k† E K_k` on a bare matrix.
    pub fn adjoint_matrix(&self, e: &HermitianMatrix) -> Result<HermitianMatrix> {
        if e.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: e.dim(),
            });
        }
        let d = self.dim;
        let src = e.as_matrix();
        let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || src[(i, j)] == Complex64::new(0.0, 0.0)));
        if diagonal {
            let mut diag = vec![0.0; d];
            for op in &self.operators {
                for (n, &c) in op.coefficients.iter().enumerate() {
                    if let Some(t) = op.target(n, d) {
                        diag[n] += c * c * src[(t, t)].re;
                    }
                }
            }
            return Ok(HermitianMatrix::from_diagonal(&diag));
        }
        let mut out = CMatrix::zeros(d, d);
        for op in &self.operators {
            for n in 0..d {
                let Some(tn) = op.target(n, d) else { continue };
                let cn = op.coefficients[n];
                if cn == 0.0 {
                    continue;
                }
                for m in 0..d {
                    let Some(tm) = op.target(m, d) else { continue };
                    out[(n, m)] += src[(tn, tm)] * (cn * op.coefficients[m]);
                }
            }
        }
        Ok(HermitianMatrix::hermitize(out))
    }
}

/// `Σ_k K_k ρ K_k†` on one mode of a (possibly multimode) state.
///
/// Population pushed above the truncation is dropped; if that deficit exceeds
/// [`TRACE_DEFICIT_LIMIT`] the call fails, otherwise the state is renormalized
/// and the deficit is added to its `tail_mass`.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityOperator, mode: usize) -> Result<DensityOperator> {
    let dims = rho.mode_dims();
    if mode >= dims.len() {
        return Err(Error::InvalidState(format!("mode {mode} out of range")));
    }
    if dims[mode] != ch.dim {
        return Err(Error::DimensionMismatch {
            expected: ch.dim,
            found: dims[mode],
        });
    }
    let d = ch.dim;
    let stride: usize = dims[mode + 1..].iter().product();
    let n_total = rho.dim();
    // level of `mode` in each joint index, and the index with that level zeroed
    let level: Vec<usize> = (0..n_total).map(|i| (i / stride) % d).collect();
    let base: Vec<usize> = (0..n_total).map(|i| i - level[i] * stride).collect();

    let src = rho.matrix().as_matrix();
    let mut out = CMatrix::zeros(n_total, n_total);
    for op in &ch.operators {
        for i in 0..n_total {
            let ci = op.coefficients[level[i]];
            if ci == 0.0 {
                continue;
            }
            let Some(ti) = op.target(level[i], d) else { continue };
            let row = base[i] + ti * stride;
            for j in 0..n_total {
                let cj = op.coefficients[level[j]];
                if cj == 0.0 {
                    continue;
                }
                let Some(tj) = op.target(level[j], d) else { continue };
                out[(row, base[j] + tj * stride)] += src[(i, j)] * (ci * cj);
            }
        }
    }
    let out = HermitianMatrix::hermitize(out);
    let deficit = rho.trace() - out.trace();
    if deficit > TRACE_DEFICIT_LIMIT {
        return Err(Error::Truncation(format!(
            "{:?} lost {deficit:.3e} of trace at dim {d}; increase the truncation",
            ch.kind
        )));
    }
    let trace = out.trace();
    Ok(DensityOperator::from_parts(
        dims.to_vec(),
        out.scale(1.0 / trace),
        rho.tail_mass() + deficit.max(0.0),
    ))
}

/// Heisenberg-picture image of a POVM element, `Σ_k K_k† E K_k`.
pub fn adjoint_apply(ch: &KrausChannel, e: &PovmElement) -> Result<PovmElement> {
    PovmElement::new(ch.adjoint_matrix(e.matrix())?, e.outcome())
}

/// Uniformly lossy passive transform: `M = √K·U` is realized as `U` followed
/// by `loss(K)` on every mode it touches.
pub fn apply_lossy_transform(rho: &DensityOperator, m: &TransferMatrix, modes: &[usize]) -> Result<DensityOperator> {
    let (k, u) = m.uniform_loss_factor()?;
    let mut out = fock::transform_density(rho, &u, modes)?;
    if k < 1.0 {
        for &mode in modes {
            let loss = loss_channel(k, out.mode_dims()[mode])?;
            out = apply_channel(&loss, &out, mode)?;
        }
    }
    Ok(out)
}

/// Two-mode state through the symmetric splitter `[[t, r], [r, t]]` with
/// `K = |t|² + |r|² ≤ 1`, realized by unitary dilation (uniform loss only).
pub fn lossy_beamsplitter(rho: &DensityOperator, t: Complex64, r: Complex64) -> Result<DensityOperator> {
    if rho.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.n_modes(),
        });
    }
    let k = t.norm_sqr() + r.norm_sqr();
    if k > 1.0 + 1e-12 {
        return Err(Error::invalid("|t|^2 + |r|^2", k, "a passive splitter cannot have gain"));
    }
    apply_lossy_transform(rho, &TransferMatrix::symmetric(t, r)?, &[0, 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, number_state};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_parameters_give_identity() {
        let rho = coherent_state(c(0.7, 0.2), 20).unwrap().to_density();
        for ch in [loss_channel(1.0, 20).unwrap(), amplifier_channel(1.0, 20).unwrap()] {
            assert_eq!(ch.operators().len(), 1);
            let out = apply_channel(&ch, &rho, 0).unwrap();
            assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
            let e = PovmElement::new(HermitianMatrix::from_diagonal(&[1.0; 20]).scale(0.5), 0).unwrap();
            assert!(adjoint_apply(&ch, &e).unwrap().matrix().max_abs_diff(e.matrix()) < 1e-15);
        }
    }

    #[test]
    fn parameter_ranges() {
        assert!(loss_channel(0.0, 4).is_err());
        assert!(loss_channel(1.2, 4).is_err());
        assert!(amplifier_channel(0.9, 4).is_err());
    }

    #[test]
    fn single_photon_loss() {
        let eta = 0.3;
        let out = apply_channel(&loss_channel(eta, 4).unwrap(), &number_state(1, 4).unwrap().to_density(), 0).unwrap();
        assert!((out.population(&[1]) - eta).abs() < 1e-15);
        assert!((out.population(&[0]) - (1.0 - eta)).abs() < 1e-15);
    }

    #[test]
    fn loss_keeps_coherent_states_coherent() {
        let (alpha, eta) = (c(1.2, -0.4), 0.6);
        let rho = coherent_state(alpha, 40).unwrap().to_density();
        let out = apply_channel(&loss_channel(eta, 40).unwrap(), &rho, 0).unwrap();
        let expected = coherent_state(alpha * eta.sqrt(), 40).unwrap().to_density();
        assert!(out.matrix().max_abs_diff(expected.matrix()) < 1e-8);
    }

    #[test]
    fn amplifier_on_vacuum_is_thermal() {
        let g = 1.8;
        let out = apply_channel(&amplifier_channel(g, 60).unwrap(), &DensityOperator::vacuum(vec![60]), 0).unwrap();
        for n in 0..20 {
            let expected = (g - 1.0).powi(n as i32) / g.powi(n as i32 + 1);
            assert!((out.population(&[n]) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn amplifier_moments_match_displaced_thermal() {
        // amplitude √g α on top of thermal occupation g − 1
        let (g, alpha) = (2.0, c(0.9, 0.3));
        let dim = 64;
        let out = apply_channel(
            &amplifier_channel(g, dim).unwrap(),
            &coherent_state(alpha, dim).unwrap().to_density(),
            0,
        )
        .unwrap();
        let nbar = g - 1.0;
        let mean_expected = g * alpha.norm_sqr() + nbar;
        assert!((out.mean_photons(0) - mean_expected).abs() < 1e-6);
        // ⟨n²⟩ of a displaced thermal state: |β|⁴ + (4n̄+1)|β|² + n̄(2n̄+1) with |β|² = g|α|²
        let b2 = g * alpha.norm_sqr();
        let second_expected = b2 * b2 + (4.0 * nbar + 1.0) * b2 + nbar * (2.0 * nbar + 1.0);
        let second: f64 = (0..dim).map(|n| (n * n) as f64 * out.population(&[n])).sum();
        assert!((second - second_expected).abs() < 1e-6);
        // ⟨a⟩ = √g α
        let a_mean: Complex64 = (1..dim).map(|n| out.matrix().get(n, n - 1) * (n as f64).sqrt()).sum();
        assert!((a_mean - alpha * g.sqrt()).norm() < 1e-8);
    }

    #[test]
    fn loss_and_amplification_do_not_commute() {
        let (eta, g, dim) = (0.5, 2.0, 40);
        let vac = DensityOperator::vacuum(vec![dim]);
        let loss = loss_channel(eta, dim).unwrap();
        let amp = amplifier_channel(g, dim).unwrap();
        let la = apply_channel(&amp, &apply_channel(&loss, &vac, 0).unwrap(), 0).unwrap();
        let al = apply_channel(&loss, &apply_channel(&amp, &vac, 0).unwrap(), 0).unwrap();
        assert!(la.matrix().max_abs_diff(al.matrix()) > 1e-3);
    }

    #[test]
    fn loss_completeness_is_exact() {
        for eta in [0.25, 0.5, 0.75, 1.0] {
            let comp = loss_channel(eta, 64).unwrap().completeness();
            assert!(comp.max_abs_diff(&HermitianMatrix::identity(64)) < 1e-12);
        }
    }

    #[test]
    fn amplifier_completeness_on_levels_that_stay_inside() {
        // Σ_k A_k†A_k|n⟩ = P(output < dim | n); exact wherever the amplified
        // distribution of |n⟩ fits in the space.
        let dim = 64;
        for g in [1.0, 1.5, 2.0, 3.0] {
            let comp = amplifier_channel(g, dim).unwrap().completeness().diagonal();
            for (n, &value) in comp.iter().enumerate() {
                // negative-binomial tail Σ_{m ≥ dim} P(m | n)
                let mut p = g.powi(-(n as i32 + 1));
                let mut missing = 0.0;
                for k in 0..6000 {
                    if n + k >= dim {
                        missing += p;
                    }
                    p *= (n + k + 1) as f64 / (k + 1) as f64 * (1.0 - 1.0 / g);
                }
                if missing < 1e-9 {
                    assert!((value - 1.0).abs() < 1e-8, "g={g} n={n} value={value}");
                }
                assert!((value + missing - 1.0).abs() < 1e-8, "g={g} n={n}");
            }
            assert!((comp[0] - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn loss_composes_multiplicatively() {
        let rho = coherent_state(c(1.0, 1.0), 40).unwrap().to_density();
        let twice = apply_channel(
            &loss_channel(0.7, 40).unwrap(),
            &apply_channel(&loss_channel(0.6, 40).unwrap(), &rho, 0).unwrap(),
            0,
        )
        .unwrap();
        let once = apply_channel(&loss_channel(0.42, 40).unwrap(), &rho, 0).unwrap();
        assert!(twice.matrix().max_abs_diff(once.matrix()) < 1e-8);
    }

    #[test]
    fn adjoint_of_loss_on_vacuum_projector() {
        let eta = 0.35;
        let mut diag = vec![0.0; 12];
        diag[0] = 1.0;
        let e = PovmElement::new(HermitianMatrix::from_diagonal(&diag), 0).unwrap();
        let out = adjoint_apply(&loss_channel(eta, 12).unwrap(), &e).unwrap();
        for n in 0..12 {
            assert!((out.matrix().get(n, n).re - (1.0 - eta).powi(n as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn truncation_guard_fires() {
        let rho = number_state(10, 20).unwrap().to_density();
        assert!(matches!(
            apply_channel(&amplifier_channel(3.0, 20).unwrap(), &rho, 0),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn channel_on_second_mode() {
        let one = number_state(1, 3).unwrap();
        let rho = one.tensor(&one).to_density();
        let out = apply_channel(&loss_channel(0.5, 3).unwrap(), &rho, 1).unwrap();
        assert!((out.population(&[1, 1]) - 0.5).abs() < 1e-15);
        assert!((out.population(&[1, 0]) - 0.5).abs() < 1e-15);
        assert!(apply_channel(&loss_channel(0.5, 4).unwrap(), &rho, 1).is_err());
    }

    #[test]
    fn beamsplitter_on_coherent_amplitudes() {
        let id = TransferMatrix::beamsplitter(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(id.entries(), TransferMatrix::identity(2).entries());

        let h = 1.0 / 2f64.sqrt();
        let bs = TransferMatrix::beamsplitter(c(h, 0.0), c(h, 0.0)).unwrap();
        let a = c(0.8, -0.3);
        let same = bs.apply_to_amplitudes(&[a, a]);
        assert!((same[0] - a * 2f64.sqrt()).norm() < 1e-15);
        assert!(same[1].norm() < 1e-15);
        let opposite = bs.apply_to_amplitudes(&[a, -a]);
        assert!(opposite[0].norm() < 1e-15);
        assert!((opposite[1] + a * 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn beamsplitter_rejects_bad_rows() {
        assert!(TransferMatrix::beamsplitter(c(0.6, 0.0), c(0.6, 0.0)).is_err());
        assert!(TransferMatrix::beamsplitter(c(0.6, 0.0), c(0.0, 0.8)).is_err());
        assert!(TransferMatrix::new(CMatrix::identity(2, 2).scale(1.1)).is_err());
    }

    #[test]
    fn lossless_symmetric_splitter_matches_unitary_path() {
        let one = number_state(1, 3).unwrap();
        let rho = one.tensor(&one).to_density();
        let (t, r) = (c(0.8, 0.0), c(0.0, 0.6));
        let lossy = lossy_beamsplitter(&rho, t, r).unwrap();
        let bs = TransferMatrix::symmetric(t, r).unwrap();
        assert!(bs.is_unitary());
        let direct = fock::transform_density(&rho, &bs, &[0, 1]).unwrap();
        assert!(lossy.matrix().max_abs_diff(direct.matrix()) < 1e-14);
    }

    #[test]
    fn lossy_splitter_two_photon_statistics() {
        let one = number_state(1, 3).unwrap();
        let rho = one.tensor(&one).to_density();
        let out = lossy_beamsplitter(&rho, c(0.6, 0.0), c(0.0, 0.6)).unwrap();
        assert!((out.population(&[2, 0]) - 0.2592).abs() < 1e-12);
        let total: f64 = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).map(|(a, b)| out.population(&[a, b])).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lossy_splitter_rejects_non_uniform_loss() {
        let one = number_state(1, 3).unwrap();
        let rho = one.tensor(&one).to_density();
        assert!(matches!(
            lossy_beamsplitter(&rho, c(0.5, 0.0), c(0.3, 0.0)),
            Err(Error::UnsupportedDilation(_))
        ));
    }
}
