//! Two-atom state carving by photon scattering.
//!
//! The efficient protocol sends one photon through the cavity twice. On the
//! first pass the photon is transmitted (`t`) or reflected (`r`); the
//! reflected part is returned to the cavity by a mirror after NOT gates on
//! both atoms and is transmitted (`rt`) or reflected again (`rr`). The two
//! transmitted paths meet on a 50/50 beam splitter feeding D2 and D3, and the
//! double reflection goes to D1.
//!
//! The standard protocol uses two photons that must both be reflected, with
//! the same NOT gates between them.
//!
//! Two-atom amplitudes are stored as `[C64; 4]` over `|00⟩, |01⟩, |10⟩, |11⟩`
//! (index `2a + b`).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cavity::{validate_params, CavityParams, CoeffSet};
use crate::error::{Error, Result};

pub type TwoQubitAmps = [C64; 4];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Detector {
    /// Double reflection.
    D1,
    /// Beam-splitter port `(t + rt)/√2`.
    D2,
    /// Beam-splitter port `(t − rt)/√2`.
    D3,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::D1, Detector::D2, Detector::D3];

    /// The ideal-limit heralded state for this detector.
    pub fn target(self) -> BellTarget {
        match self {
            Detector::D1 => BellTarget::OddPlus,
            Detector::D2 => BellTarget::EvenMinus,
            Detector::D3 => BellTarget::EvenPlus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Detector::D1 => "D1",
            Detector::D2 => "D2",
            Detector::D3 => "D3",
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "D1" => Ok(Detector::D1),
            "D2" => Ok(Detector::D2),
            "D3" => Ok(Detector::D3),
            _ => Err(Error::UnknownDetector(s.to_string(), "efficient".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Two photons, each heralded on reflection.
    Standard,
    /// One photon, two passes, three detectors.
    Efficient,
}

impl Mode {
    pub fn detectors(self) -> &'static [Detector] {
        match self {
            Mode::Standard => &Detector::ALL[..1],
            Mode::Efficient => &Detector::ALL,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Efficient => "efficient",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(Mode::Standard),
            "efficient" => Ok(Mode::Efficient),
            other => Err(Error::InvalidParams(format!(
                "unknown mode '{other}' (expected standard or efficient)"
            ))),
        }
    }
}

/// Bell states heralded in the ideal limit. With `r_N → −1` for coupled atoms,
/// D2 carries `(|11⟩ − |00⟩)/√2` and D3 carries `(|00⟩ + |11⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellTarget {
    /// `(|01⟩ + |10⟩)/√2`
    OddPlus,
    /// `(|00⟩ + |11⟩)/√2`
    EvenPlus,
    /// `(|11⟩ − |00⟩)/√2`
    EvenMinus,
}

impl BellTarget {
    /// Integer sign pattern of the state before the `1/√2`.
    fn pattern(self) -> [f64; 4] {
        match self {
            BellTarget::OddPlus => [0.0, 1.0, 1.0, 0.0],
            BellTarget::EvenPlus => [1.0, 0.0, 0.0, 1.0],
            BellTarget::EvenMinus => [-1.0, 0.0, 0.0, 1.0],
        }
    }

    pub fn ket(self) -> TwoQubitAmps {
        self.pattern()
            .map(|x| C64::new(x * std::f64::consts::FRAC_1_SQRT_2, 0.0))
    }

    /// `|⟨target|ψ⟩|² / ⟨ψ|ψ⟩`, or `None` for a zero vector.
    ///
    /// Evaluated on the unnormalized integer pattern so that a state
    /// proportional to the target scores exactly 1.
    pub fn fidelity(self, amps: &TwoQubitAmps) -> Option<f64> {
        let pattern = self.pattern();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm == 0.0 {
            return None;
        }
        let overlap: C64 = pattern.iter().zip(amps).map(|(p, a)| a * *p).sum();
        let f = overlap.norm_sqr() / (2.0 * norm);
        Some(f.min(1.0))
    }
}

/// 50/50 beam splitter on the two transmitted paths: `((t+rt)/√2, (t−rt)/√2)`.
pub fn beam_split(t_amp: C64, rt_amp: C64) -> (C64, C64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ((t_amp + rt_amp) * s, (t_amp - rt_amp) * s)
}

/// Single-qubit Pauli `Z^z X^x` (X acts first).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pauli {
    pub x: bool,
    pub z: bool,
}

impl Pauli {
    pub const I: Pauli = Pauli { x: false, z: false };
    pub const X: Pauli = Pauli { x: true, z: false };
    pub const Z: Pauli = Pauli { x: false, z: true };
    /// `Z·X`: `|0⟩ → −|1⟩`, `|1⟩ → |0⟩`.
    pub const ZX: Pauli = Pauli { x: true, z: true };

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let one = C64::new(1.0, 0.0);
        let mut m = [[one, ZERO], [ZERO, one]];
        if self.x {
            m = [[ZERO, one], [one, ZERO]];
        }
        if self.z {
            m[1] = [-m[1][0], -m[1][1]];
        }
        m
    }

    pub fn label(self) -> &'static str {
        match (self.x, self.z) {
            (false, false) => "I",
            (true, false) => "X",
            (false, true) => "Z",
            (true, true) => "ZX",
        }
    }
}

/// Local correction `first ⊗ second` applied after a detector click.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliFrame {
    pub first: Pauli,
    pub second: Pauli,
}

impl PauliFrame {
    pub const IDENTITY: PauliFrame = PauliFrame {
        first: Pauli::I,
        second: Pauli::I,
    };

    pub fn apply(&self, amps: &TwoQubitAmps) -> TwoQubitAmps {
        let a = self.first.matrix();
        let b = self.second.matrix();
        let mut out = [ZERO; 4];
        for (row, slot) in out.iter_mut().enumerate() {
            let (ra, rb) = (row >> 1, row & 1);
            for (col, amp) in amps.iter().enumerate() {
                let (ca, cb) = (col >> 1, col & 1);
                *slot += a[ra][ca] * b[rb][cb] * amp;
            }
        }
        out
    }

    /// As a 4×4 matrix over the pair basis.
    pub fn matrix(&self) -> [[C64; 4]; 4] {
        let mut m = [[ZERO; 4]; 4];
        for col in 0..4 {
            let mut e = [ZERO; 4];
            e[col] = C64::new(1.0, 0.0);
            let image = self.apply(&e);
            for row in 0..4 {
                m[row][col] = image[row];
            }
        }
        m
    }
}

impl fmt::Display for PauliFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}⊗{}", self.first.label(), self.second.label())
    }
}

/// Local Pauli correction taking the detector's target to `(|01⟩ + |10⟩)/√2`.
pub fn correction_for(detector: Detector) -> PauliFrame {
    match detector {
        Detector::D1 => PauliFrame::IDENTITY,
        Detector::D2 => PauliFrame {
            first: Pauli::I,
            second: Pauli::ZX,
        },
        Detector::D3 => PauliFrame {
            first: Pauli::I,
            second: Pauli::X,
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorOutcome {
    pub detector: Detector,
    /// Unnormalized atomic amplitudes conditioned on this click.
    pub amplitudes: TwoQubitAmps,
    pub probability: f64,
    /// Fidelity with `target`; 0 when the click never happens.
    pub fidelity: f64,
    pub fidelity_defined: bool,
    pub target: TwoQubitAmps,
}

impl DetectorOutcome {
    pub fn new(detector: Detector, amplitudes: TwoQubitAmps) -> Self {
        let probability = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let target = detector.target();
        let fidelity = target.fidelity(&amplitudes);
        Self {
            detector,
            amplitudes,
            probability,
            fidelity: fidelity.unwrap_or(0.0),
            fidelity_defined: fidelity.is_some(),
            target: target.ket(),
        }
    }

    /// Normalized conditional state, if the click can happen.
    pub fn normalized(&self) -> Option<TwoQubitAmps> {
        if self.probability == 0.0 {
            return None;
        }
        let s = self.probability.sqrt();
        Some(self.amplitudes.map(|a| a / s))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarveResult {
    pub mode: Mode,
    pub params: CavityParams,
    pub outcomes: Vec<DetectorOutcome>,
    /// Probability that no detector clicks.
    pub p_loss: f64,
    pub p_total: f64,
    /// `ΣFᵢPᵢ / ΣPᵢ` over clicks that can happen; 0 if none can.
    pub f_avg: f64,
    /// `ΣFᵢPᵢ`
    pub f_weighted: f64,
}

impl CarveResult {
    fn assemble(
        mode: Mode,
        params: CavityParams,
        outcomes: Vec<DetectorOutcome>,
        p_loss: f64,
    ) -> Self {
        let p_total: f64 = outcomes.iter().map(|o| o.probability).sum();
        let f_weighted: f64 = outcomes
            .iter()
            .filter(|o| o.fidelity_defined)
            .map(|o| o.fidelity * o.probability)
            .sum();
        let f_avg = if p_total > 0.0 {
            f_weighted / p_total
        } else {
            0.0
        };
        Self {
            mode,
            params,
            outcomes,
            p_loss,
            p_total,
            f_avg,
            f_weighted,
        }
    }

    pub fn outcome(&self, detector: Detector) -> Option<&DetectorOutcome> {
        self.outcomes.iter().find(|o| o.detector == detector)
    }
}

const HALF: C64 = C64 { re: 0.5, im: 0.0 };

/// One pass of the photon: per basis state, the transmitted and reflected
/// amplitudes.
fn scatter(coeffs: &CoeffSet, amps: &TwoQubitAmps) -> (TwoQubitAmps, TwoQubitAmps) {
    let mut t = [ZERO; 4];
    let mut r = [ZERO; 4];
    for (s, a) in amps.iter().enumerate() {
        let k = coeffs.for_basis_state(s);
        t[s] = k.t * a;
        r[s] = k.r * a;
    }
    (t, r)
}

/// NOT on both atoms.
fn flip_both(amps: &TwoQubitAmps) -> TwoQubitAmps {
    let mut out = [ZERO; 4];
    for (s, a) in amps.iter().enumerate() {
        out[s ^ 0b11] = *a;
    }
    out
}

/// Photon paths of the efficient protocol after the second pass, from `|++⟩`.
struct EfficientPaths {
    t: TwoQubitAmps,
    rt: TwoQubitAmps,
    rr: TwoQubitAmps,
}

fn propagate_efficient(coeffs: &CoeffSet, initial: &TwoQubitAmps) -> EfficientPaths {
    let (t, r) = scatter(coeffs, initial);
    let t = flip_both(&t);
    let r = flip_both(&r);
    let (rt, rr) = scatter(coeffs, &r);
    EfficientPaths { t, rt, rr }
}

/// Detector amplitudes of the efficient protocol from `|++⟩`, by stage-wise
/// propagation of the photon paths.
pub fn efficient_amplitudes(coeffs: &CoeffSet) -> [TwoQubitAmps; 3] {
    let paths = propagate_efficient(coeffs, &[HALF; 4]);
    let mut d2 = [ZERO; 4];
    let mut d3 = [ZERO; 4];
    for s in 0..4 {
        (d2[s], d3[s]) = beam_split(paths.t[s], paths.rt[s]);
    }
    [paths.rr, d2, d3]
}

/// Heralded amplitudes of the standard protocol from `|++⟩`.
pub fn standard_amplitudes(coeffs: &CoeffSet) -> TwoQubitAmps {
    let (_, r) = scatter(coeffs, &[HALF; 4]);
    let (_, rr) = scatter(coeffs, &flip_both(&r));
    rr
}

/// Closed-form detector amplitudes of the efficient protocol, written out per
/// final atomic state.
pub fn closed_form_amplitudes(coeffs: &CoeffSet, detector: Detector) -> TwoQubitAmps {
    let (r0, r1, r2) = (coeffs.r(0), coeffs.r(1), coeffs.r(2));
    let (t0, t1, t2) = (coeffs.t(0), coeffs.t(1), coeffs.t(2));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match detector {
        Detector::D1 => {
            let even = 0.5 * r0 * r2;
            let odd = 0.5 * r1 * r1;
            [even, odd, odd, even]
        }
        Detector::D2 | Detector::D3 => {
            let sign = if detector == Detector::D2 { 1.0 } else { -1.0 };
            let a00 = 0.5 * (t2 + sign * r2 * t0) * s;
            let a11 = 0.5 * (t0 + sign * r0 * t2) * s;
            let odd = 0.5 * t1 * (1.0 + sign * r1) * s;
            [a00, odd, odd, a11]
        }
    }
}

/// Probability that the photon is scattered out on either pass, from `|++⟩`.
fn efficient_loss(coeffs: &CoeffSet) -> f64 {
    (0..4)
        .map(|s| {
            let first = coeffs.for_basis_state(s);
            let second = coeffs.for_basis_state(s ^ 0b11);
            0.25 * (first.loss_prob + first.r.norm_sqr() * second.loss_prob)
        })
        .sum()
}

/// Probability that either photon of the standard protocol is not reflected.
fn standard_loss(coeffs: &CoeffSet) -> f64 {
    (0..4)
        .map(|s| {
            let first = coeffs.for_basis_state(s).r.norm_sqr();
            let second = coeffs.for_basis_state(s ^ 0b11).r.norm_sqr();
            0.25 * ((1.0 - first) + first * (1.0 - second))
        })
        .sum()
}

pub fn carve_efficient(params: &CavityParams) -> Result<CarveResult> {
    let params = validate_params(*params)?;
    let coeffs = CoeffSet::from_validated(&params);
    let outcomes = Detector::ALL
        .iter()
        .zip(efficient_amplitudes(&coeffs))
        .map(|(d, amps)| DetectorOutcome::new(*d, amps))
        .collect();
    Ok(CarveResult::assemble(
        Mode::Efficient,
        params,
        outcomes,
        efficient_loss(&coeffs),
    ))
}

pub fn carve_standard(params: &CavityParams) -> Result<CarveResult> {
    let params = validate_params(*params)?;
    let coeffs = CoeffSet::from_validated(&params);
    let outcome = DetectorOutcome::new(Detector::D1, standard_amplitudes(&coeffs));
    Ok(CarveResult::assemble(
        Mode::Standard,
        params,
        vec![outcome],
        standard_loss(&coeffs),
    ))
}

pub fn carve(params: &CavityParams, mode: Mode) -> Result<CarveResult> {
    match mode {
        Mode::Standard => carve_standard(params),
        Mode::Efficient => carve_efficient(params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn beam_splitter_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = beam_split(c(1.0), c(0.0));
        assert!((a - c(s)).norm() < 1e-15 && (b - c(s)).norm() < 1e-15);
        let (a, b) = beam_split(c(1.0), c(1.0));
        assert!((a - c(2f64.sqrt())).norm() < 1e-15 && b.norm() < 1e-15);
    }

    #[test]
    fn beam_splitter_ideal_branch() {
        // |11⟩ branch at ideal coefficients: t₀ = 1 on the direct path, r₀t₂ = 0 on the return.
        let ideal = CoeffSet::ideal();
        let (a, b) = beam_split(ideal.t(0), ideal.r(0) * ideal.t(2));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!((a, b), (c(s), c(s)));
    }

    #[test]
    fn ideal_limit_outputs_match_targets() {
        let amps = efficient_amplitudes(&CoeffSet::ideal());
        for (d, a) in Detector::ALL.iter().zip(amps) {
            let p: f64 = a.iter().map(|x| x.norm_sqr()).sum();
            let norm = p.sqrt();
            let target = d.target().ket();
            for s in 0..4 {
                assert!((a[s] / norm - target[s]).norm() < 1e-15, "{d} {s}");
            }
        }
    }

    #[test]
    fn corrections_map_targets_to_canonical() {
        let canonical = BellTarget::OddPlus.ket();
        assert_eq!(correction_for(Detector::D1), PauliFrame::IDENTITY);
        for d in Detector::ALL {
            let mapped = correction_for(d).apply(&d.target().ket());
            for s in 0..4 {
                assert!((mapped[s] - canonical[s]).norm() < 1e-15, "{d}");
            }
        }
        // D2 differs from D3 by a phase flip on the corrected qubit.
        let (d2, d3) = (correction_for(Detector::D2), correction_for(Detector::D3));
        assert_eq!(d2.second.x, d3.second.x);
        assert!(d2.second.z && !d3.second.z);
    }

    #[test]
    fn target_fidelity_is_phase_blind() {
        let mut a = BellTarget::EvenMinus.ket();
        for x in a.iter_mut() {
            *x *= C64::from_polar(0.3, 1.1);
        }
        assert!((BellTarget::EvenMinus.fidelity(&a).unwrap() - 1.0).abs() < 1e-15);
        assert!(BellTarget::EvenPlus.fidelity(&a).unwrap() < 1e-15);
        assert_eq!(BellTarget::OddPlus.fidelity(&[ZERO; 4]), None);
    }

    #[test]
    fn c20_reflection_detector() {
        let res = carve_efficient(&CavityParams::symmetric(20.0)).unwrap();
        let d1 = res.outcome(Detector::D1).unwrap();
        let expected = 0.5 * (20.0f64 / 21.0).powi(4);
        assert!((d1.probability - expected).abs() < 1e-15);
        assert!((d1.probability - 0.41135).abs() < 1e-5);
        assert_eq!(d1.fidelity, 1.0);
    }

    #[test]
    fn decoupled_input() {
        let res = carve_efficient(&CavityParams::new(0.0, 0.5, 0.5, 20.0)).unwrap();
        let d1 = res.outcome(Detector::D1).unwrap();
        assert_eq!(d1.probability, 1.0);
        assert!((d1.fidelity - 0.5).abs() < 1e-15);
        for d in [Detector::D2, Detector::D3] {
            let o = res.outcome(d).unwrap();
            assert_eq!(o.probability, 0.0);
            assert!(!o.fidelity_defined);
            assert_eq!(o.fidelity, 0.0);
        }
        assert_eq!(res.f_avg, 0.5);
    }

    #[test]
    fn standard_examples() {
        let ideal = carve_standard(&CavityParams::one_sided(1e12)).unwrap();
        assert!((ideal.p_total - 0.5).abs() < 1e-9);
        assert_eq!(ideal.outcomes[0].fidelity, 1.0);

        let res = carve_standard(&CavityParams::one_sided(20.0)).unwrap();
        assert!((res.p_total - 0.5 * (20.0f64 / 21.0).powi(4)).abs() < 1e-15);
        for cval in [1.0, 2.5, 20.0, 1e3] {
            let res = carve_standard(&CavityParams::one_sided(cval)).unwrap();
            assert_eq!(res.outcomes[0].fidelity, 1.0);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(carve_efficient(&CavityParams::new(0.6, 0.6, 0.0, 1.0)).is_err());
        assert!(carve_standard(&CavityParams::new(0.5, 0.5, 0.0, -1.0)).is_err());
    }

    #[test]
    fn detector_and_mode_parsing() {
        assert_eq!("d2".parse::<Detector>().unwrap(), Detector::D2);
        assert!("D4".parse::<Detector>().is_err());
        assert_eq!("Efficient".parse::<Mode>().unwrap(), Mode::Efficient);
        assert!("fast".parse::<Mode>().is_err());
    }
}
