//! Growing entangled chains by repeated two-qubit carving.
//!
//! Two estimates are provided. The product model multiplies single-carve
//! probabilities and fidelities. The exact-register method keeps a dense state
//! vector, applies the heralded Kraus map of every detector at every step and
//! sums over all heralding records.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{validate_params, CavityParams, CoeffSet};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, MetricsReport};
use crate::protocol::{
    carve, correction_for, efficient_amplitudes, standard_amplitudes, Detector, Mode,
};

/// Largest register the dense simulator will allocate.
pub const MAX_QUBITS: usize = 20;

/// Upper bound on `records × 2ⁿ` visited by the exact chain simulation.
pub const EXACT_WORK_BUDGET: u64 = 1 << 31;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub type Matrix2 = [[C64; 2]; 2];
pub type Matrix4 = [[C64; 4]; 4];

/// Dense amplitudes over `n` qubits; qubit `q` is bit `q` of the basis index.
/// The squared norm may drop below one to carry a heralding probability.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitRegister {
    n: usize,
    amps: Vec<C64>,
}

impl QubitRegister {
    fn check_size(n: usize) -> Result<()> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Register(format!(
                "{n} qubits, allowed 1..={MAX_QUBITS}"
            )));
        }
        Ok(())
    }

    /// `|+⟩^⊗n`
    pub fn plus_state(n: usize) -> Result<Self> {
        Self::check_size(n)?;
        let dim = 1usize << n;
        let a = C64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self {
            n,
            amps: vec![a; dim],
        })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        Self::check_size(n)?;
        if amps.len() != 1 << n {
            return Err(Error::Register(format!(
                "{} amplitudes for {n} qubits, expected {}",
                amps.len(),
                1usize << n
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || norm > 1.0 + 1e-12 {
            return Err(Error::Register(format!("squared norm {norm} exceeds 1")));
        }
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &QubitRegister) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn normalized(&self) -> Option<QubitRegister> {
        let norm = self.norm_sqr().sqrt();
        (norm > 0.0).then(|| QubitRegister {
            n: self.n,
            amps: self.amps.iter().map(|a| a / norm).collect(),
        })
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange {
                index: q,
                n: self.n,
            });
        }
        Ok(())
    }

    fn check_pair(&self, (a, b): (usize, usize)) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::PairCollision(a));
        }
        Ok(())
    }

    pub fn apply_single(&mut self, q: usize, m: &Matrix2) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Applies `m` on `pair`, with the pair basis `|ab⟩` indexed `2a + b` where
    /// `a` is qubit `pair.0`.
    pub fn apply_pair(&mut self, pair: (usize, usize), m: &Matrix4) -> Result<()> {
        self.check_pair(pair)?;
        let (ba, bb) = (1usize << pair.0, 1usize << pair.1);
        let offsets = [0, bb, ba, ba | bb];
        for i in 0..self.amps.len() {
            if i & (ba | bb) != 0 {
                continue;
            }
            let v = offsets.map(|o| self.amps[i | o]);
            for (row, o) in offsets.iter().enumerate() {
                self.amps[i | o] = (0..4).map(|col| m[row][col] * v[col]).sum();
            }
        }
        Ok(())
    }

    /// Reduced density matrix of one qubit (unnormalized if the register is).
    pub fn reduced_density(&self, q: usize) -> Result<Matrix2> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let mut rho = [[ZERO; 2]; 2];
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                rho[0][0] += a0 * a0.conj();
                rho[0][1] += a0 * a1.conj();
                rho[1][0] += a1 * a0.conj();
                rho[1][1] += a1 * a1.conj();
            }
        }
        Ok(rho)
    }

    /// Rényi-2 entropy `−log₂ Tr ρ²` in bits of the reduced state on
    /// `qubits`, for normalized registers. Equals the von Neumann entropy for
    /// flat spectra such as those of graph states.
    pub fn renyi2_entropy(&self, qubits: &[usize]) -> Result<f64> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let rest: Vec<usize> = (0..self.n).filter(|q| !qubits.contains(q)).collect();
        let gather = |i: usize, idx: &[usize]| {
            idx.iter()
                .enumerate()
                .fold(0usize, |acc, (j, &q)| acc | (((i >> q) & 1) << j))
        };
        // ψ as a (2^k × 2^m) matrix; Tr ρ² = Σ |(ψψ†)_rc|².
        let mut psi = vec![vec![ZERO; 1 << rest.len()]; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            psi[gather(i, qubits)][gather(i, &rest)] = *a;
        }
        let mut purity = 0.0;
        for r in &psi {
            for c in &psi {
                let rho: C64 = r.iter().zip(c).map(|(x, y)| x * y.conj()).sum();
                purity += rho.norm_sqr();
            }
        }
        Ok(-purity.log2())
    }
}

/// Local basis change `U_first ⊗ U_second` on a carve pair. A carve map `K`
/// is applied as `F† K F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalFrame {
    pub first: Matrix2,
    pub second: Matrix2,
}

impl LocalFrame {
    pub fn identity() -> Self {
        let id = [[ONE, ZERO], [ZERO, ONE]];
        Self {
            first: id,
            second: id,
        }
    }

    /// `H` on the first (existing) qubit: the carve acts in its X basis.
    pub fn hadamard_first() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = [
            [C64::new(h, 0.0), C64::new(h, 0.0)],
            [C64::new(h, 0.0), C64::new(-h, 0.0)],
        ];
        Self {
            first: had,
            ..Self::identity()
        }
    }

    /// `H·S†` on the first (existing) qubit: the carve acts in its Y basis.
    pub fn y_hadamard_first() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = [
            [C64::new(h, 0.0), C64::new(0.0, -h)],
            [C64::new(h, 0.0), C64::new(0.0, h)],
        ];
        Self {
            first: m,
            ..Self::identity()
        }
    }

    /// Frame used by [`grow_chain`]. With real resonant amplitudes the
    /// existing qubit's Y-basis populations stay balanced after every click,
    /// so each step succeeds with the single-carve probability.
    pub fn default_chain() -> Self {
        Self::y_hadamard_first()
    }

    fn matrix(&self) -> Matrix4 {
        kron(&self.first, &self.second)
    }
}

fn kron(a: &Matrix2, b: &Matrix2) -> Matrix4 {
    let mut m = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = a[r >> 1][c >> 1] * b[r & 1][c & 1];
        }
    }
    m
}

fn matmul(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut m = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    m
}

fn adjoint(a: &Matrix4) -> Matrix4 {
    let mut m = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = a[c][r].conj();
        }
    }
    m
}

/// Per-final-state Kraus amplitudes of one click, for an arbitrary two-atom input.
/// These are the `|++⟩` detector amplitudes without its `½` amplitude.
pub fn kraus_amplitudes(mode: Mode, detector: Detector, coeffs: &CoeffSet) -> Result<[C64; 4]> {
    let amps = match (mode, detector) {
        (Mode::Efficient, d) => efficient_amplitudes(coeffs)[d as usize],
        (Mode::Standard, Detector::D1) => standard_amplitudes(coeffs),
        (Mode::Standard, d) => {
            return Err(Error::UnknownDetector(d.to_string(), mode.to_string()));
        }
    };
    Ok(amps.map(|a| 2.0 * a))
}

/// The full heralded map on a pair: Pauli correction after the detector's
/// diagonal amplitudes, after the NOT gates on both atoms, all inside `frame`.
pub fn carve_matrix(
    mode: Mode,
    detector: Detector,
    coeffs: &CoeffSet,
    frame: Option<&LocalFrame>,
) -> Result<Matrix4> {
    let diag = kraus_amplitudes(mode, detector, coeffs)?;
    // Input |s⟩ lands on |s ⊕ 11⟩ with that final state's amplitude.
    let mut kraus = [[ZERO; 4]; 4];
    for s in 0..4 {
        kraus[s ^ 0b11][s] = diag[s ^ 0b11];
    }
    let corrected = matmul(&correction_for(detector).matrix(), &kraus);
    Ok(match frame {
        None => corrected,
        Some(f) => {
            let fm = f.matrix();
            matmul(&adjoint(&fm), &matmul(&corrected, &fm))
        }
    })
}

/// Applies one heralded carve outcome to `pair` and returns the subnormalized
/// post-click register; its squared norm is the click probability.
pub fn apply_carve_map(
    register: &QubitRegister,
    pair: (usize, usize),
    mode: Mode,
    detector: Detector,
    coeffs: &CoeffSet,
    frame: Option<&LocalFrame>,
) -> Result<QubitRegister> {
    register.check_pair(pair)?;
    let m = carve_matrix(mode, detector, coeffs, frame)?;
    let mut out = register.clone();
    out.apply_pair(pair, &m)?;
    Ok(out)
}

/// Probability that a carve on `pair` ends with no click, from the photon
/// loss channels alone.
pub fn carve_loss(
    register: &QubitRegister,
    pair: (usize, usize),
    mode: Mode,
    coeffs: &CoeffSet,
    frame: Option<&LocalFrame>,
) -> Result<f64> {
    register.check_pair(pair)?;
    let weight = |s: usize| {
        let first = coeffs.for_basis_state(s);
        let second = coeffs.for_basis_state(s ^ 0b11);
        match mode {
            Mode::Efficient => first.loss_prob + first.r.norm_sqr() * second.loss_prob,
            Mode::Standard => 1.0 - first.r.norm_sqr() * second.r.norm_sqr(),
        }
    };
    let mut rotated = register.clone();
    if let Some(f) = frame {
        rotated.apply_pair(pair, &f.matrix())?;
    }
    let (ba, bb) = (1usize << pair.0, 1usize << pair.1);
    Ok(rotated
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let s = (usize::from(i & ba != 0) << 1) | usize::from(i & bb != 0);
            a.norm_sqr() * weight(s)
        })
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    ProductModel,
    ExactRegister,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ProductModel => "product-model",
            Method::ExactRegister => "exact-register",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "product" | "product-model" => Ok(Method::ProductModel),
            "exact" | "exact-register" => Ok(Method::ExactRegister),
            other => Err(Error::InvalidParams(format!(
                "unknown method '{other}' (expected product-model or exact-register)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphResult {
    pub n_nodes: usize,
    pub p_total: f64,
    pub f_estimate: f64,
    pub mode: Mode,
    pub method: Method,
}

/// Independent-step estimate: `p^(n−1)` and `f^(n−1)`.
pub fn product_model(n: usize, per_step: &MetricsReport, mode: Mode) -> Result<GraphResult> {
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let steps = (n - 1) as i32;
    Ok(GraphResult {
        n_nodes: n,
        p_total: per_step.p_total.powi(steps),
        f_estimate: per_step.f_avg.powi(steps),
        mode,
        method: Method::ProductModel,
    })
}

/// Frame used at carve step `step` (1-based). The first carve joins two fresh
/// `|+⟩` qubits and needs no basis change.
fn step_frame(step: usize, frame: &LocalFrame) -> Option<&LocalFrame> {
    (step > 1).then_some(frame)
}

/// Ideal chain: every carve replaced by its `C → ∞` symmetric-cavity map.
pub fn chain_target(n: usize, frame: &LocalFrame) -> Result<QubitRegister> {
    let mut reg = QubitRegister::plus_state(n)?;
    let ideal = CoeffSet::ideal();
    for step in 1..n {
        let f = step_frame(step, frame);
        reg = apply_carve_map(
            &reg,
            (step - 1, step),
            Mode::Efficient,
            Detector::D1,
            &ideal,
            f,
        )?;
    }
    reg.normalized()
        .ok_or_else(|| Error::Register("ideal chain has zero norm".into()))
}

pub fn exact_work(n: usize, mode: Mode) -> u64 {
    let records = (mode.detectors().len() as u64).saturating_pow((n - 1) as u32);
    records.saturating_mul(1u64 << n.min(63))
}

pub fn grow_chain(
    n: usize,
    params: &CavityParams,
    mode: Mode,
    method: Method,
) -> Result<GraphResult> {
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let params = validate_params(*params)?;
    match method {
        Method::ProductModel => {
            let per_step = aggregate(&carve(&params, mode)?)?;
            product_model(n, &per_step, mode)
        }
        Method::ExactRegister => grow_chain_exact(n, &params, mode, &LocalFrame::default_chain()),
    }
}

/// Exact-register chain growth with a caller-chosen frame on the existing
/// qubit for every carve after the first.
pub fn grow_chain_exact(
    n: usize,
    params: &CavityParams,
    mode: Mode,
    frame: &LocalFrame,
) -> Result<GraphResult> {
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let params = &validate_params(*params)?;
    if n > MAX_QUBITS {
        return Err(Error::RegisterCap {
            n,
            reason: format!("dense registers hold at most {MAX_QUBITS} qubits"),
        });
    }
    let work = exact_work(n, mode);
    if work > EXACT_WORK_BUDGET {
        return Err(Error::RegisterCap {
            n,
            reason: format!(
                "summing all {}^{} heralding records needs ~{work} amplitude updates (budget {EXACT_WORK_BUDGET})",
                mode.detectors().len(),
                n - 1
            ),
        });
    }
    let coeffs = CoeffSet::from_validated(params);
    let target = chain_target(n, frame)?;
    let start = QubitRegister::plus_state(n)?;
    let walker = RecordWalker {
        n,
        mode,
        coeffs: &coeffs,
        target: &target,
        frame,
    };
    let (p_total, overlap) = walker.walk(start, 1)?;
    Ok(GraphResult {
        n_nodes: n,
        p_total,
        f_estimate: if p_total > 0.0 {
            (overlap / p_total).min(1.0)
        } else {
            0.0
        },
        mode,
        method: Method::ExactRegister,
    })
}

struct RecordWalker<'a> {
    n: usize,
    mode: Mode,
    coeffs: &'a CoeffSet,
    target: &'a QubitRegister,
    frame: &'a LocalFrame,
}

impl RecordWalker<'_> {
    /// Returns `(Σ‖ψ‖², Σ|⟨target|ψ⟩|²)` over all records below this node.
    fn walk(&self, reg: QubitRegister, step: usize) -> Result<(f64, f64)> {
        if step == self.n {
            return Ok((reg.norm_sqr(), self.target.inner(&reg).norm_sqr()));
        }
        let frame = step_frame(step, self.frame);
        let branch = |d: &Detector| -> Result<(f64, f64)> {
            let next = apply_carve_map(&reg, (step - 1, step), self.mode, *d, self.coeffs, frame)?;
            if next.norm_sqr() == 0.0 {
                return Ok((0.0, 0.0));
            }
            self.walk(next, step + 1)
        };
        // Results are collected in detector order, so the sum is schedule independent.
        let parts: Vec<(f64, f64)> = if step <= 3 {
            self.mode
                .detectors()
                .par_iter()
                .map(branch)
                .collect::<Result<_>>()?
        } else {
            self.mode
                .detectors()
                .iter()
                .map(branch)
                .collect::<Result<_>>()?
        };
        Ok(parts
            .iter()
            .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1)))
    }
}
