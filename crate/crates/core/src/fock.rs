//! Multimode truncated Fock-space states.
//!
//! Joint bases are mode-major and little-endian in the sense that the last
//! listed mode varies fastest: for `mode_dims = [d0, d1]` the basis vector
//! `|n0, n1⟩` sits at index `n0 * d1 + n1`. Tensor products follow the same
//! convention (Kronecker product with the first factor outermost).

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::channels::TransferMatrix;
use crate::error::{Error, Result};
use crate::numerics::{self, CMatrix, HermitianMatrix};

/// Largest probability weight a truncated coherent state may drop.
pub const DEFAULT_TAIL_BUDGET: f64 = 1e-9;
/// Photon-number ceiling for mode transforms done by polynomial expansion.
pub const DEFAULT_MAX_PHOTONS: usize = 4;

const TRACE_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;
// weight that may sit above the photon ceiling and be dropped
const PHOTON_LIMIT_WEIGHT: f64 = 1e-18;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub(crate) fn total_dim(mode_dims: &[usize]) -> usize {
    mode_dims.iter().product()
}

pub(crate) fn occupation(mut index: usize, mode_dims: &[usize]) -> Vec<usize> {
    let mut occ = vec![0; mode_dims.len()];
    for (slot, &d) in occ.iter_mut().zip(mode_dims).rev() {
        *slot = index % d;
        index /= d;
    }
    occ
}

pub(crate) fn index_of(occ: &[usize], mode_dims: &[usize]) -> usize {
    occ.iter().zip(mode_dims).fold(0, |acc, (&n, &d)| acc * d + n)
}

fn check_modes(modes: &[usize], n_modes: usize) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::InvalidState("empty mode selection".into()));
    }
    for (i, &m) in modes.iter().enumerate() {
        if m >= n_modes {
            return Err(Error::InvalidState(format!(
                "mode {m} out of range for a {n_modes}-mode register"
            )));
        }
        if modes[..i].contains(&m) {
            return Err(Error::InvalidState(format!("mode {m} selected twice")));
        }
    }
    Ok(())
}

/// Normalized state vector over a multimode truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    mode_dims: Vec<usize>,
    amplitudes: Vec<Complex64>,
    tail_mass: f64,
}

impl PureState {
    pub fn new(mode_dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = total_dim(&mode_dims);
        if mode_dims.is_empty() || dim != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm² = {norm}")));
        }
        Ok(PureState {
            mode_dims,
            amplitudes,
            tail_mass: 0.0,
        })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn from_unnormalized(mode_dims: Vec<usize>, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        PureState::new(mode_dims, amplitudes)
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, occ: &[usize]) -> Complex64 {
        self.amplitudes[index_of(occ, &self.mode_dims)]
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut mode_dims = self.mode_dims.clone();
        mode_dims.extend_from_slice(&other.mode_dims);
        PureState {
            mode_dims,
            amplitudes,
            tail_mass: combine_tails(self.tail_mass, other.tail_mass),
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            mode_dims: self.mode_dims.clone(),
            matrix: HermitianMatrix::projector(&self.amplitudes),
            tail_mass: self.tail_mass,
        }
    }
}

fn combine_tails(a: f64, b: f64) -> f64 {
    1.0 - (1.0 - a) * (1.0 - b)
}

pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<PureState> {
    coherent_state_with_budget(alpha, dim, DEFAULT_TAIL_BUDGET)
}

/// Truncated, renormalized coherent state `|α⟩`. The probability mass lost
/// above `dim - 1` is kept as `tail_mass` and must not exceed `budget`.
pub fn coherent_state_with_budget(alpha: Complex64, dim: usize, budget: f64) -> Result<PureState> {
    if dim < 2 {
        return Err(Error::invalid("dim", dim as f64, "coherent states need dim >= 2"));
    }
    let mut amplitudes = Vec::with_capacity(dim);
    let mut a = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amplitudes.push(a);
    for n in 1..dim {
        a = a * alpha / (n as f64).sqrt();
        amplitudes.push(a);
    }
    let kept: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let tail_mass = (1.0 - kept).max(0.0);
    if tail_mass > budget {
        return Err(Error::Truncation(format!(
            "coherent state |alpha| = {} loses {tail_mass:.3e} above dim {dim} (budget {budget:.1e})",
            alpha.norm()
        )));
    }
    let norm = kept.sqrt();
    for a in &mut amplitudes {
        *a /= norm;
    }
    Ok(PureState {
        mode_dims: vec![dim],
        amplitudes,
        tail_mass,
    })
}

pub fn number_state(n: usize, dim: usize) -> Result<PureState> {
    if n >= dim {
        return Err(Error::invalid("n", n as f64, "photon number must be below the truncation dim"));
    }
    let mut amplitudes = vec![zero(); dim];
    amplitudes[n] = Complex64::new(1.0, 0.0);
    Ok(PureState {
        mode_dims: vec![dim],
        amplitudes,
        tail_mass: 0.0,
    })
}

/// Unit-trace positive semidefinite operator on a multimode truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    mode_dims: Vec<usize>,
    matrix: HermitianMatrix,
    tail_mass: f64,
}

impl DensityOperator {
    /// Validating constructor: dimensions, unit trace, positivity.
    pub fn new(mode_dims: Vec<usize>, matrix: HermitianMatrix) -> Result<Self> {
        let rho = DensityOperator {
            mode_dims,
            matrix,
            tail_mass: 0.0,
        };
        rho.validate()?;
        Ok(rho)
    }

    /// Normalizes a nonzero PSD operator, returning the state and the original trace.
    pub fn from_unnormalized(mode_dims: Vec<usize>, matrix: HermitianMatrix) -> Result<(Self, f64)> {
        let trace = matrix.trace();
        if !(trace > 0.0) || !trace.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize operator with trace {trace}")));
        }
        let rho = DensityOperator::new(mode_dims, matrix.scale(1.0 / trace))?;
        Ok((rho, trace))
    }

    pub(crate) fn from_parts(mode_dims: Vec<usize>, matrix: HermitianMatrix, tail_mass: f64) -> Self {
        debug_assert_eq!(total_dim(&mode_dims), matrix.dim());
        DensityOperator {
            mode_dims,
            matrix,
            tail_mass,
        }
    }

    /// Checks trace and positivity invariants.
    pub fn validate(&self) -> Result<()> {
        let dim = total_dim(&self.mode_dims);
        if self.mode_dims.is_empty() || dim != self.matrix.dim() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.matrix.dim(),
            });
        }
        let trace = self.matrix.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace = {trace}")));
        }
        let min = numerics::min_eigenvalue(&self.matrix);
        if min < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        Ok(())
    }

    pub fn vacuum(mode_dims: Vec<usize>) -> Self {
        let dim = total_dim(&mode_dims);
        let mut diag = vec![0.0; dim];
        diag[0] = 1.0;
        DensityOperator::from_parts(mode_dims, HermitianMatrix::from_diagonal(&diag), 0.0)
    }

    /// Diagonal state `Σ p_n |n⟩⟨n|` on one mode.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        DensityOperator::new(vec![populations.len()], HermitianMatrix::from_diagonal(populations))
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn n_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn with_tail_mass(mut self, tail_mass: f64) -> Self {
        self.tail_mass = tail_mass;
        self
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `⟨n|ρ|n⟩` for a joint occupation `n`.
    pub fn population(&self, occ: &[usize]) -> f64 {
        let i = index_of(occ, &self.mode_dims);
        self.matrix.get(i, i).re
    }

    /// Mean photon number of one mode.
    pub fn mean_photons(&self, mode: usize) -> f64 {
        (0..self.dim())
            .map(|i| occupation(i, &self.mode_dims)[mode] as f64 * self.matrix.get(i, i).re)
            .sum()
    }
}

/// Probability-weighted collection of states over a common space.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, DensityOperator)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, DensityOperator)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::InvalidState("empty ensemble".into()));
        };
        let dims = first.mode_dims().to_vec();
        let mut total = 0.0;
        for (p, rho) in &members {
            if !(*p >= 0.0) {
                return Err(Error::invalid("probability", *p, "ensemble weights must be nonnegative"));
            }
            if rho.mode_dims() != dims.as_slice() {
                return Err(Error::DimensionMismatch {
                    expected: total_dim(&dims),
                    found: rho.dim(),
                });
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("probability sum", total, "ensemble weights must sum to 1"));
        }
        Ok(Ensemble { members })
    }

    pub fn members(&self) -> &[(f64, DensityOperator)] {
        &self.members
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.members.iter().map(|(p, _)| *p).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Applies `f` to every member state, keeping the weights.
    pub fn map_states(&self, f: impl Fn(&DensityOperator) -> Result<DensityOperator>) -> Result<Ensemble> {
        let members = self
            .members
            .iter()
            .map(|(p, rho)| Ok((*p, f(rho)?)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(members)
    }
}

pub fn mix(ensemble: &Ensemble) -> DensityOperator {
    let (_, first) = &ensemble.members[0];
    let mut acc = HermitianMatrix::zeros(first.dim());
    let mut tail = 0.0;
    for (p, rho) in &ensemble.members {
        acc = acc.add_scaled(&rho.matrix, *p);
        tail += p * rho.tail_mass;
    }
    DensityOperator::from_parts(first.mode_dims.clone(), acc, tail)
}

pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    let m = a.matrix.as_matrix().kronecker(b.matrix.as_matrix());
    let mut mode_dims = a.mode_dims.clone();
    mode_dims.extend_from_slice(&b.mode_dims);
    DensityOperator::from_parts(
        mode_dims,
        HermitianMatrix::hermitize(m),
        combine_tails(a.tail_mass, b.tail_mass),
    )
}

/// `Tr_T[ρ (1_K ⊗ E)]` where `T` is the complement of `keep` (ascending mode
/// order) and `E` acts on the joint space of `T`. With no effect this is the
/// ordinary partial trace.
pub(crate) fn reduce(
    mode_dims: &[usize],
    m: &CMatrix,
    keep: &[usize],
    effect: Option<&CMatrix>,
) -> (Vec<usize>, CMatrix) {
    let traced: Vec<usize> = (0..mode_dims.len()).filter(|i| !keep.contains(i)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&i| mode_dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| mode_dims[i]).collect();
    let n = total_dim(mode_dims);
    let mut kmap = Vec::with_capacity(n);
    let mut tmap = Vec::with_capacity(n);
    for i in 0..n {
        let occ = occupation(i, mode_dims);
        let k: Vec<usize> = keep.iter().map(|&j| occ[j]).collect();
        let t: Vec<usize> = traced.iter().map(|&j| occ[j]).collect();
        kmap.push(index_of(&k, &keep_dims));
        tmap.push(index_of(&t, &traced_dims));
    }
    let kd = total_dim(&keep_dims);
    let mut out = CMatrix::zeros(kd, kd);
    for i in 0..n {
        for j in 0..n {
            let rho_ij = m[(i, j)];
            if rho_ij == zero() {
                continue;
            }
            let w = match effect {
                None if tmap[i] == tmap[j] => Complex64::new(1.0, 0.0),
                None => continue,
                Some(e) => e[(tmap[j], tmap[i])],
            };
            out[(kmap[i], kmap[j])] += rho_ij * w;
        }
    }
    (keep_dims, out)
}

fn normalized_keep(rho: &DensityOperator, keep: &[usize]) -> Result<Vec<usize>> {
    check_modes(keep, rho.n_modes())?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    Ok(keep)
}

/// Reduced state on `keep` (kept modes stay in ascending order).
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let keep = normalized_keep(rho, keep)?;
    let (dims, m) = reduce(&rho.mode_dims, rho.matrix.as_matrix(), &keep, None);
    Ok(DensityOperator::from_parts(dims, HermitianMatrix::hermitize(m), rho.tail_mass))
}

/// State of the `keep` modes conditioned on the effect `effect` (acting on the
/// remaining modes jointly) having fired. Returns the normalized state and the
/// probability `Tr[ρ (1 ⊗ E)]`.
pub fn condition(
    rho: &DensityOperator,
    keep: &[usize],
    effect: &HermitianMatrix,
) -> Result<(DensityOperator, f64)> {
    let keep = normalized_keep(rho, keep)?;
    let traced_dim: usize = (0..rho.n_modes())
        .filter(|i| !keep.contains(i))
        .map(|i| rho.mode_dims[i])
        .product();
    if effect.dim() != traced_dim {
        return Err(Error::DimensionMismatch {
            expected: traced_dim,
            found: effect.dim(),
        });
    }
    let (dims, m) = reduce(&rho.mode_dims, rho.matrix.as_matrix(), &keep, Some(effect.as_matrix()));
    let m = HermitianMatrix::hermitize(m);
    let prob = m.trace();
    if !(prob > 0.0) {
        return Err(Error::InvalidState("conditioning outcome has zero probability".into()));
    }
    Ok((DensityOperator::from_parts(dims, m.scale(1.0 / prob), rho.tail_mass), prob))
}

/// Expands `Π_p (a†_p)^{n_p}/√n_p!` under `a†_p ↦ Σ_q M_{qp} a†_q` and returns
/// the resulting number-basis amplitudes keyed by output occupation.
fn expand_occupation(occ: &[usize], m: &CMatrix) -> BTreeMap<Vec<usize>, Complex64> {
    let modes = occ.len();
    let input_norm: f64 = occ.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
    let mut poly: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
    poly.insert(vec![0; modes], Complex64::new(1.0 / input_norm, 0.0));
    for (p, &n) in occ.iter().enumerate() {
        for _ in 0..n {
            let mut next = BTreeMap::new();
            for (mono, coef) in &poly {
                for q in 0..modes {
                    let w = m[(q, p)];
                    if w == zero() {
                        continue;
                    }
                    let mut k = mono.clone();
                    k[q] += 1;
                    *next.entry(k).or_insert_with(zero) += coef * w;
                }
            }
            poly = next;
        }
    }
    for (k, amp) in poly.iter_mut() {
        *amp *= k.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
    }
    poly
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn require_unitary(m: &TransferMatrix, modes: &[usize]) -> Result<()> {
    if m.size() != modes.len() {
        return Err(Error::DimensionMismatch {
            expected: modes.len(),
            found: m.size(),
        });
    }
    if !m.is_unitary() {
        return Err(Error::UnsupportedDilation(
            "non-unitary transfer matrix; route lossy optics through the uniform-loss path".into(),
        ));
    }
    Ok(())
}

/// Passive linear-optical transform of a pure state acting on all modes.
pub fn apply_mode_transform(state: &PureState, m: &TransferMatrix) -> Result<PureState> {
    let modes: Vec<usize> = (0..state.mode_dims.len()).collect();
    apply_mode_transform_on(state, m, &modes, DEFAULT_MAX_PHOTONS)
}

/// Passive transform of the selected `modes` (in transfer-matrix order). The
/// state must carry at most `max_photons` in those modes, up to a dropped
/// weight of 1e-18.
pub fn apply_mode_transform_on(
    state: &PureState,
    m: &TransferMatrix,
    modes: &[usize],
    max_photons: usize,
) -> Result<PureState> {
    check_modes(modes, state.mode_dims.len())?;
    require_unitary(m, modes)?;
    let dims = &state.mode_dims;
    let mut out = vec![zero(); state.dim()];
    let mut dropped = 0.0;
    for (i, &a) in state.amplitudes.iter().enumerate() {
        if a == zero() {
            continue;
        }
        let occ = occupation(i, dims);
        let acted: Vec<usize> = modes.iter().map(|&j| occ[j]).collect();
        if acted.iter().sum::<usize>() > max_photons {
            dropped += a.norm_sqr();
            continue;
        }
        for (k, amp) in expand_occupation(&acted, m.entries()) {
            let mut target = occ.clone();
            for (q, &j) in modes.iter().enumerate() {
                target[j] = k[q];
            }
            if target.iter().zip(dims).any(|(&n, &d)| n >= d) {
                if (a * amp).norm() > 1e-15 {
                    return Err(Error::Truncation(format!(
                        "mode transform output {target:?} exceeds truncation {dims:?}"
                    )));
                }
                continue;
            }
            out[index_of(&target, dims)] += a * amp;
        }
    }
    if dropped > PHOTON_LIMIT_WEIGHT {
        return Err(Error::Truncation(format!(
            "state carries weight {dropped:.3e} above the {max_photons}-photon transform limit"
        )));
    }
    let norm: f64 = out.iter().map(|a| a.norm_sqr()).sum();
    if (norm - (1.0 - dropped)).abs() > 1e-9 {
        return Err(Error::Truncation(format!("mode transform changed the norm to {norm}")));
    }
    let scale = norm.sqrt();
    for a in &mut out {
        *a /= scale;
    }
    Ok(PureState {
        mode_dims: dims.clone(),
        amplitudes: out,
        tail_mass: combine_tails(state.tail_mass, dropped),
    })
}

/// Matrix of the Fock-space unitary induced by `m` on `modes`, restricted to
/// basis states whose transformed-mode photon number is at most `max_photons`
/// and whose image fits the truncation. Other columns are zero and flagged
/// `false` in the returned mask.
pub(crate) fn mode_unitary(
    mode_dims: &[usize],
    m: &TransferMatrix,
    modes: &[usize],
    max_photons: usize,
) -> Result<(CMatrix, Vec<bool>)> {
    check_modes(modes, mode_dims.len())?;
    require_unitary(m, modes)?;
    let n = total_dim(mode_dims);
    let mut u = CMatrix::zeros(n, n);
    let mut supported = vec![true; n];
    let mut cache: BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, Complex64>> = BTreeMap::new();
    for i in 0..n {
        let occ = occupation(i, mode_dims);
        let acted: Vec<usize> = modes.iter().map(|&j| occ[j]).collect();
        if acted.iter().sum::<usize>() > max_photons {
            supported[i] = false;
            continue;
        }
        let image = cache
            .entry(acted.clone())
            .or_insert_with(|| expand_occupation(&acted, m.entries()));
        for (k, amp) in image.iter() {
            if amp.norm() < 1e-15 {
                continue;
            }
            let mut target = occ.clone();
            for (q, &j) in modes.iter().enumerate() {
                target[j] = k[q];
            }
            if target.iter().zip(mode_dims).any(|(&t, &d)| t >= d) {
                supported[i] = false;
                break;
            }
            u[(index_of(&target, mode_dims), i)] += amp;
        }
        if !supported[i] {
            u.column_mut(i).fill(zero());
        }
    }
    Ok((u, supported))
}

/// `U ρ U†` for the Fock-space unitary of a lossless transform on `modes`.
pub fn transform_density(rho: &DensityOperator, m: &TransferMatrix, modes: &[usize]) -> Result<DensityOperator> {
    let (u, supported) = mode_unitary(&rho.mode_dims, m, modes, DEFAULT_MAX_PHOTONS)?;
    let outside: f64 = (0..rho.dim())
        .filter(|&i| !supported[i])
        .map(|i| rho.matrix.get(i, i).re.abs())
        .sum();
    if outside > 1e-14 {
        return Err(Error::Truncation(format!(
            "density operator has weight {outside:.3e} outside the transformable subspace"
        )));
    }
    Ok(DensityOperator::from_parts(
        rho.mode_dims.clone(),
        rho.matrix.conjugate_by(&u),
        rho.tail_mass,
    ))
}

/// One product term `w · A ⊗ B` of a separable two-party state.
#[derive(Debug, Clone)]
pub struct ProductTerm {
    pub weight: f64,
    pub first: DensityOperator,
    pub second: DensityOperator,
}

/// Separable two-party state `Σ_i w_i A_i ⊗ B_i` stored by its factors.
///
/// Detector-arm scenarios with coherent inputs are mixtures of product states;
/// keeping the factors avoids forming the `d² × d²` joint matrix.
#[derive(Debug, Clone)]
pub struct ProductMixture {
    terms: Vec<ProductTerm>,
}

impl ProductMixture {
    pub fn new(terms: Vec<ProductTerm>) -> Result<Self> {
        let Some(head) = terms.first() else {
            return Err(Error::InvalidState("empty product mixture".into()));
        };
        let (d1, d2) = (head.first.mode_dims().to_vec(), head.second.mode_dims().to_vec());
        let mut total = 0.0;
        for t in &terms {
            if t.first.mode_dims() != d1.as_slice() || t.second.mode_dims() != d2.as_slice() {
                return Err(Error::InvalidState("product terms have inconsistent dimensions".into()));
            }
            if !(t.weight >= 0.0) {
                return Err(Error::invalid("weight", t.weight, "weights must be nonnegative"));
            }
            total += t.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("weight sum", total, "weights must sum to 1"));
        }
        Ok(ProductMixture { terms })
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn tail_mass(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * combine_tails(t.first.tail_mass, t.second.tail_mass))
            .sum()
    }

    pub fn first_marginal(&self) -> DensityOperator {
        self.marginal(|t| &t.first)
    }

    pub fn second_marginal(&self) -> DensityOperator {
        self.marginal(|t| &t.second)
    }

    fn marginal(&self, pick: impl Fn(&ProductTerm) -> &DensityOperator) -> DensityOperator {
        let head = pick(&self.terms[0]);
        let mut acc = HermitianMatrix::zeros(head.dim());
        let mut tail = 0.0;
        for t in &self.terms {
            acc = acc.add_scaled(&pick(t).matrix, t.weight);
            tail += t.weight * pick(t).tail_mass;
        }
        DensityOperator::from_parts(head.mode_dims.clone(), acc, tail)
    }

    /// Unnormalized `Tr_2[ρ (1 ⊗ E)] = Σ_i w_i Tr(B_i E) A_i`.
    pub fn condition_first(&self, effect: &HermitianMatrix) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.terms[0].first.dim());
        for t in &self.terms {
            let w = t.weight * t.second.matrix.trace_product(effect);
            acc = acc.add_scaled(&t.first.matrix, w);
        }
        acc
    }

    pub fn to_dense(&self) -> DensityOperator {
        let head = &self.terms[0];
        let mut acc = HermitianMatrix::zeros(head.first.dim() * head.second.dim());
        for t in &self.terms {
            acc = acc.add_scaled(tensor(&t.first, &t.second).matrix(), t.weight);
        }
        let mut dims = head.first.mode_dims.clone();
        dims.extend_from_slice(&head.second.mode_dims);
        DensityOperator::from_parts(dims, acc, self.tail_mass())
    }

    /// Max-norm distance of the two joint operators, evaluated entry by entry
    /// without materializing either.
    pub fn max_abs_diff(&self, other: &ProductMixture) -> f64 {
        let (n1, n2) = (self.terms[0].first.dim(), self.terms[0].second.dim());
        let mut worst = 0.0f64;
        for i in 0..n1 {
            for k in 0..n1 {
                for j in 0..n2 {
                    for l in 0..n2 {
                        let entry = |mix: &ProductMixture| -> Complex64 {
                            mix.terms
                                .iter()
                                .map(|t| t.first.matrix.get(i, k) * t.second.matrix.get(j, l) * t.weight)
                                .sum()
                        };
                        worst = worst.max((entry(self) - entry(other)).norm());
                    }
                }
            }
        }
        worst
    }

    /// Upper bound on the max-norm distance obtained by pairing terms
    /// one-to-one. `None` when no pairing brings every term within `tol`.
    pub fn termwise_distance(&self, other: &ProductMixture, tol: f64) -> Option<f64> {
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let mut used = vec![false; other.terms.len()];
        let mut bound = 0.0;
        for t in &self.terms {
            let mut best: Option<(usize, f64)> = None;
            for (j, u) in other.terms.iter().enumerate() {
                if used[j] {
                    continue;
                }
                let d = (t.weight - u.weight).abs()
                    + t.weight
                        * (t.first.matrix.max_abs_diff(&u.first.matrix)
                            + t.second.matrix.max_abs_diff(&u.second.matrix));
                if d <= tol && best.is_none_or(|(_, b)| d < b) {
                    best = Some((j, d));
                }
            }
            let (j, d) = best?;
            used[j] = true;
            bound += d;
        }
        Some(bound)
    }
}
