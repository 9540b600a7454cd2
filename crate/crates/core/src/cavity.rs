//! Single-photon reflection and transmission amplitudes of a two-sided cavity
//! holding `N` resonantly coupled atoms.
//!
//! All rates are expressed as fractions of the total cavity linewidth κ, so a
//! parameter set is fully described by `κ₁/κ`, `κ₂/κ`, `κ_sc/κ` and the
//! cooperativity `C`. On resonance the amplitudes are
//!
//! ```text
//! r_N = (2κ₁/κ) / (1 + N·C) − 1
//! t_N = (2√(κ₁κ₂)/κ) / (1 + N·C)
//! ```
//!
//! which puts the empty-cavity reflection at `r₀ = −(1 − 2κ₁/κ)` and pushes
//! `r_N → −1` for coupled atoms as `C → ∞`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `κ₁ + κ₂ + κ_sc = κ`.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Atomic linewidth in units of κ used when none is given (`κ₁ = κ₂ = 200γ`).
pub const DEFAULT_ATOM_LINEWIDTH_FRAC: f64 = 1.0 / 400.0;

/// The physical knob set of a two-sided cavity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Input mirror coupling κ₁/κ.
    pub kappa1_frac: f64,
    /// Output mirror coupling κ₂/κ.
    pub kappa2_frac: f64,
    /// Intracavity scattering and absorption loss κ_sc/κ.
    pub kappa_sc_frac: f64,
    /// Cooperativity `C = 4g²/(κγ)`.
    pub cooperativity: f64,
    /// Probe detuning in units of κ. Atom and cavity are taken to be degenerate.
    pub detuning_frac: f64,
    /// Atomic linewidth γ/κ. Only enters off resonance.
    pub atom_linewidth_frac: f64,
}

impl CavityParams {
    /// Resonant parameter set; does not validate.
    pub fn new(kappa1_frac: f64, kappa2_frac: f64, kappa_sc_frac: f64, cooperativity: f64) -> Self {
        Self {
            kappa1_frac,
            kappa2_frac,
            kappa_sc_frac,
            cooperativity,
            detuning_frac: 0.0,
            atom_linewidth_frac: DEFAULT_ATOM_LINEWIDTH_FRAC,
        }
    }

    /// Symmetric lossless cavity, `κ₁ = κ₂ = κ/2`.
    pub fn symmetric(cooperativity: f64) -> Self {
        Self::new(0.5, 0.5, 0.0, cooperativity)
    }

    /// One-sided cavity with equal input and loss channels, the configuration
    /// of the two-photon protocol.
    pub fn one_sided(cooperativity: f64) -> Self {
        Self::new(0.5, 0.0, 0.5, cooperativity)
    }

    pub fn with_detuning(mut self, detuning_frac: f64) -> Self {
        self.detuning_frac = detuning_frac;
        self
    }

    /// Empty-cavity reflection error `ε₁ = 1 − 2κ₁/κ`.
    pub fn epsilon1(&self) -> f64 {
        1.0 - 2.0 * self.kappa1_frac
    }

    pub fn validate(self) -> Result<Self> {
        validate_params(self)
    }
}

/// Checks the parameter invariants and renormalizes fractions that miss a
/// unit sum by no more than [`SUM_TOLERANCE`].
pub fn validate_params(params: CavityParams) -> Result<CavityParams> {
    let fractions = [
        ("kappa1_frac", params.kappa1_frac),
        ("kappa2_frac", params.kappa2_frac),
        ("kappa_sc_frac", params.kappa_sc_frac),
    ];
    for (name, value) in fractions {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidParams(format!(
                "{name} = {value} is outside [0, 1]"
            )));
        }
    }
    let sum = params.kappa1_frac + params.kappa2_frac + params.kappa_sc_frac;
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidParams(format!(
            "kappa fractions sum to {sum}, expected 1 (kappa1 + kappa2 + kappa_sc = kappa)"
        )));
    }
    if !params.cooperativity.is_finite() || params.cooperativity <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "cooperativity = {} must be positive and finite",
            params.cooperativity
        )));
    }
    if !params.detuning_frac.is_finite() {
        return Err(Error::InvalidParams("detuning_frac must be finite".into()));
    }
    if !params.atom_linewidth_frac.is_finite() || params.atom_linewidth_frac <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "atom_linewidth_frac = {} must be positive and finite",
            params.atom_linewidth_frac
        )));
    }

    let mut out = params;
    if sum != 1.0 {
        out.kappa1_frac /= sum;
        out.kappa2_frac /= sum;
        out.kappa_sc_frac /= sum;
    }
    Ok(out)
}

/// Reflection and transmission amplitudes for one atom number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterCoeffs {
    pub r: C64,
    pub t: C64,
    /// Probability that the photon leaves through κ_sc or the atoms.
    pub loss_prob: f64,
}

impl ScatterCoeffs {
    pub fn new(r: C64, t: C64) -> Self {
        let loss_prob = (1.0 - r.norm_sqr() - t.norm_sqr()).max(0.0);
        Self { r, t, loss_prob }
    }
}

/// Amplitudes for `N = n_atoms` coupled atoms.
pub fn coefficients(params: &CavityParams, n_atoms: usize) -> Result<ScatterCoeffs> {
    let p = validate_params(*params)?;
    Ok(coefficients_unchecked(&p, n_atoms))
}

pub(crate) fn coefficients_unchecked(p: &CavityParams, n_atoms: usize) -> ScatterCoeffs {
    let n = n_atoms as f64;
    let denom = if p.detuning_frac == 0.0 {
        C64::new(1.0 + n * p.cooperativity, 0.0)
    } else {
        // Cavity Lorentzian with half-width κ/2 plus N atoms with half-width γ/2,
        // both detuned by Δ from the probe.
        let cavity = C64::new(1.0, -2.0 * p.detuning_frac);
        let atom = C64::new(1.0, -2.0 * p.detuning_frac / p.atom_linewidth_frac);
        cavity + n * p.cooperativity / atom
    };
    let r = C64::new(2.0 * p.kappa1_frac, 0.0) / denom - 1.0;
    let t = C64::new(2.0 * (p.kappa1_frac * p.kappa2_frac).sqrt(), 0.0) / denom;
    ScatterCoeffs::new(r, t)
}

/// Amplitudes for 0, 1 and 2 coupled atoms, the only cases two atoms can produce.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffSet {
    pub by_atoms: [ScatterCoeffs; 3],
}

impl CoeffSet {
    pub fn for_params(params: &CavityParams) -> Result<Self> {
        let p = validate_params(*params)?;
        Ok(Self::from_validated(&p))
    }

    pub(crate) fn from_validated(p: &CavityParams) -> Self {
        Self {
            by_atoms: [0, 1, 2].map(|n| coefficients_unchecked(p, n)),
        }
    }

    /// `C → ∞` with `κ₁ = κ₂ = κ/2`, `κ_sc = 0`: the empty cavity transmits,
    /// any coupled atom turns it into a perfect mirror.
    pub fn ideal() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self {
            by_atoms: [
                ScatterCoeffs::new(zero, one),
                ScatterCoeffs::new(-one, zero),
                ScatterCoeffs::new(-one, zero),
            ],
        }
    }

    /// Coefficients for the number of atoms in `|1⟩` in a two-atom basis state
    /// `|ab⟩` indexed as `2a + b`.
    pub fn for_basis_state(&self, state: usize) -> &ScatterCoeffs {
        &self.by_atoms[(state >> 1) + (state & 1)]
    }

    pub fn r(&self, n: usize) -> C64 {
        self.by_atoms[n].r
    }

    pub fn t(&self, n: usize) -> C64 {
        self.by_atoms[n].t
    }
}
