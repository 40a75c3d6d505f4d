//! Fidelity measures for postselected outputs.
//!
//! `P^max` is the largest weight of the target that can be split off the
//! produced state with a positive remainder; the correct output fidelity
//! multiplies it by the retrodictive probability that the detector readout
//! really identified the wanted measured state.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fock::DensityOperator;
use crate::numerics::{self, HermitianMatrix};

/// `rho = p_max · rho_c + gamma` with `gamma ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingDecomposition {
    pub p_max: f64,
    pub gamma: HermitianMatrix,
}

fn same_dims(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.mode_dims() != b.mode_dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Uhlmann fidelity `{Tr √(√a b √a)}²`.
pub fn uhlmann_fidelity(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    same_dims(a, b)?;
    let root = numerics::psd_sqrt(a.matrix())?;
    let inner = b.matrix().conjugate_by(root.as_matrix());
    let eig = numerics::hermitian_eig(&inner);
    let floor = inner.dim() as f64 * f64::EPSILON * eig.max().max(0.0);
    let trace: f64 = eig.eigenvalues.iter().filter(|&&l| l > floor).map(|l| l.sqrt()).sum();
    Ok((trace * trace).clamp(0.0, 1.0))
}

pub fn decompose_pmax(rho: &DensityOperator, rho_c: &DensityOperator) -> Result<MixingDecomposition> {
    same_dims(rho, rho_c)?;
    let p_max = numerics::max_mixing_weight(rho.matrix(), rho_c.matrix(), numerics::DEFAULT_SUPPORT_TOL)?;
    Ok(MixingDecomposition {
        p_max,
        gamma: rho.matrix().add_scaled(rho_c.matrix(), -p_max),
    })
}

/// `F_c = P^max · P^r(n|n)`, with `P^max` taken from the state the device
/// would produce behind a perfect detector.
pub fn correct_output_fidelity(rho_perfect: &DensityOperator, rho_c: &DensityOperator, pr_nn: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&pr_nn) {
        return Err(Error::invalid("P^r(n|n)", pr_nn, "probability must lie in [0, 1]"));
    }
    Ok(decompose_pmax(rho_perfect, rho_c)?.p_max * pr_nn)
}

/// Sign inside the effective-efficiency denominator `1 ± η(G − 1)`.
///
/// `Plus` is the resummed zero-count operator; `Minus` reproduces the form
/// printed in the literature, which diverges once `η(G − 1) ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenominatorSign {
    #[default]
    Plus,
    Minus,
}

impl fmt::Display for DenominatorSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DenominatorSign::Plus => "plus",
            DenominatorSign::Minus => "minus",
        })
    }
}

impl FromStr for DenominatorSign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plus" => Ok(DenominatorSign::Plus),
            "minus" => Ok(DenominatorSign::Minus),
            other => Err(format!("expected plus or minus, got {other:?}")),
        }
    }
}

/// `ηG / (1 ± η(G − 1))`: the efficiency of a plain detector with the same
/// zero-count statistics on coherent light.
pub fn effective_efficiency(eta: f64, g: f64, sign: DenominatorSign) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid("eta", eta, "efficiency must lie in (0, 1]"));
    }
    if !(g >= 1.0) {
        return Err(Error::invalid("gain", g, "gain must be >= 1"));
    }
    let denominator = match sign {
        DenominatorSign::Plus => 1.0 + eta * (g - 1.0),
        DenominatorSign::Minus => 1.0 - eta * (g - 1.0),
    };
    if !(denominator > 0.0) {
        return Err(Error::invalid("1 - eta (G - 1)", denominator, "denominator must stay positive"));
    }
    Ok(eta * g / denominator)
}

/// `P^max = 1 / (1 + e^{−2|α|²})` for the coherent-state comparison.
pub fn closed_form_pmax(alpha: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * alpha * alpha).exp())
}

/// `P^r(0|0) = (1 + e^{−2|α|²}) / (1 + e^{−2|α|² η_eff})`.
pub fn closed_form_pr00(alpha: f64, eta: f64, g: f64, sign: DenominatorSign) -> Result<f64> {
    let x = 2.0 * alpha * alpha;
    Ok((1.0 + (-x).exp()) / (1.0 + (-x * effective_efficiency(eta, g, sign)?).exp()))
}

/// `F_c = 1 / (1 + e^{−2|α|² η_eff})`.
pub fn closed_form_fc(alpha: f64, eta: f64, g: f64, sign: DenominatorSign) -> Result<f64> {
    let x = 2.0 * alpha * alpha;
    Ok(1.0 / (1.0 + (-x * effective_efficiency(eta, g, sign)?).exp()))
}
