//! Parameter grids and cooperativity scaling curves.
//!
//! Grid points are evaluated in parallel and collected in row-major order
//! (last axis fastest), so a spec always yields the same table.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::cavity::{validate_params, CavityParams, CoeffSet, SUM_TOLERANCE};
use crate::error::{Error, Result};
use crate::graph::{grow_chain, Method};
use crate::metrics::{aggregate, analytic_f_avg, fit_power_law, PowerLawFit};
use crate::protocol::{carve, Mode};
use crate::table::{Cell, Table};

pub const STATUS_OK: &str = "ok";
pub const STATUS_SKIPPED: &str = "skipped";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepParam {
    Kappa1,
    Kappa2,
    KappaSc,
    Cooperativity,
    NNodes,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Kappa1 => "kappa1_frac",
            SweepParam::Kappa2 => "kappa2_frac",
            SweepParam::KappaSc => "kappa_sc_frac",
            SweepParam::Cooperativity => "cooperativity",
            SweepParam::NNodes => "n_nodes",
        }
    }

    fn is_kappa(self) -> bool {
        matches!(
            self,
            SweepParam::Kappa1 | SweepParam::Kappa2 | SweepParam::KappaSc
        )
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "kappa1_frac" | "kappa1" => SweepParam::Kappa1,
            "kappa2_frac" | "kappa2" => SweepParam::Kappa2,
            "kappa_sc_frac" | "kappa_sc" => SweepParam::KappaSc,
            "cooperativity" | "C" => SweepParam::Cooperativity,
            "n_nodes" | "n" => SweepParam::NNodes,
            other => return Err(Error::Sweep(format!("unknown sweep parameter '{other}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    /// Geometric instead of linear spacing.
    pub log: bool,
}

impl Axis {
    pub fn linear(param: SweepParam, min: f64, max: f64, steps: usize) -> Self {
        Self {
            param,
            min,
            max,
            steps,
            log: false,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    return self.max;
                }
                let u = i as f64 / last as f64;
                if self.log {
                    (self.min.ln() + u * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + u * (self.max - self.min)
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let name = self.param.name();
        if self.steps < 2 {
            return Err(Error::Sweep(format!("axis {name} needs at least 2 steps")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::Sweep(format!(
                "axis {name} range [{}, {}] is not an ordered finite interval",
                self.min, self.max
            )));
        }
        let ok = match self.param {
            p if p.is_kappa() => self.min >= 0.0 && self.max <= 1.0,
            SweepParam::Cooperativity => self.min > 0.0,
            _ => self.min >= 2.0 && self.max <= 1e6,
        };
        if !ok {
            return Err(Error::Sweep(format!(
                "axis {name} range [{}, {}] leaves the parameter domain",
                self.min, self.max
            )));
        }
        if self.log && self.min <= 0.0 {
            return Err(Error::Sweep(format!("log axis {name} must start above 0")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    FAvg,
    PTotal,
    FWeighted,
    PLoss,
    Analytic,
    /// `P_Di`, `F_Di` for every detector of the mode.
    Detectors,
    /// `r_N`, `t_N`, loss for `N = 0, 1, 2`.
    Coefficients,
    /// Chain probability and fidelity at `n_nodes`.
    Chain,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::FAvg,
        Quantity::PTotal,
        Quantity::FWeighted,
        Quantity::PLoss,
        Quantity::Analytic,
        Quantity::Detectors,
        Quantity::Coefficients,
        Quantity::Chain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::FAvg => "f_avg",
            Quantity::PTotal => "p_total",
            Quantity::FWeighted => "f_weighted",
            Quantity::PLoss => "p_loss",
            Quantity::Analytic => "analytic_f_avg",
            Quantity::Detectors => "detectors",
            Quantity::Coefficients => "coefficients",
            Quantity::Chain => "chain",
        }
    }

    fn columns(self, mode: Mode) -> Vec<String> {
        match self {
            Quantity::Detectors => mode
                .detectors()
                .iter()
                .flat_map(|d| [format!("p_{d}"), format!("f_{d}")])
                .collect(),
            Quantity::Coefficients => (0..3)
                .flat_map(|n| ["r_re", "r_im", "t_re", "t_im", "loss"].map(|c| format!("{c}_{n}")))
                .collect(),
            Quantity::Chain => vec!["chain_p_total".into(), "chain_f_estimate".into()],
            q => vec![q.name().into()],
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s.trim())
            .ok_or_else(|| Error::Sweep(format!("unknown quantity '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    /// Values of every parameter not on an axis.
    pub fixed: CavityParams,
    pub n_nodes: usize,
    pub quantities: Vec<Quantity>,
    pub mode: Mode,
    /// κ fraction filled in as `1 − (other two)`.
    pub dependent: SweepParam,
    /// Method for [`Quantity::Chain`].
    pub method: Method,
}

impl SweepSpec {
    pub fn new(fixed: CavityParams, mode: Mode) -> Self {
        Self {
            axes: Vec::new(),
            fixed,
            n_nodes: 2,
            quantities: vec![Quantity::FAvg, Quantity::PTotal, Quantity::FWeighted],
            mode,
            dependent: SweepParam::KappaSc,
            method: Method::ProductModel,
        }
    }

    pub fn axis(mut self, axis: Axis) -> Self {
        self.axes.push(axis);
        self
    }

    pub fn quantities(mut self, quantities: &[Quantity]) -> Self {
        self.quantities = quantities.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.len() > 2 {
            return Err(Error::Sweep(format!(
                "at most 2 axes, got {}",
                self.axes.len()
            )));
        }
        if !self.dependent.is_kappa() {
            return Err(Error::Sweep(format!(
                "dependent parameter must be a kappa fraction, got {}",
                self.dependent
            )));
        }
        for (i, a) in self.axes.iter().enumerate() {
            a.validate()?;
            if a.param == self.dependent {
                return Err(Error::Sweep(format!(
                    "{} is the dependent kappa fraction and cannot be swept",
                    a.param
                )));
            }
            if self.axes[..i].iter().any(|b| b.param == a.param) {
                return Err(Error::Sweep(format!("axis {} given twice", a.param)));
            }
        }
        if self.quantities.is_empty() {
            return Err(Error::Sweep("no quantities requested".into()));
        }
        if self.n_nodes < 2 {
            return Err(Error::Sweep(format!(
                "n_nodes = {} must be at least 2",
                self.n_nodes
            )));
        }
        if !(self.fixed.cooperativity.is_finite() && self.fixed.cooperativity > 0.0) {
            return Err(Error::Sweep("fixed cooperativity must be positive".into()));
        }
        Ok(())
    }

    fn has_axis(&self, p: SweepParam) -> bool {
        self.axes.iter().any(|a| a.param == p)
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = [
            "kappa1_frac",
            "kappa2_frac",
            "kappa_sc_frac",
            "cooperativity",
            "detuning_frac",
        ]
        .map(String::from)
        .to_vec();
        if self.has_axis(SweepParam::NNodes) || self.quantities.contains(&Quantity::Chain) {
            cols.push("n_nodes".into());
        }
        cols.push("status".into());
        for q in &self.quantities {
            cols.extend(q.columns(self.mode));
        }
        cols
    }

    /// Grid points in row-major order.
    fn points(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axes {
            let values = axis.values();
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

fn dependent_slot(p: &mut CavityParams, dependent: SweepParam) -> &mut f64 {
    match dependent {
        SweepParam::Kappa1 => &mut p.kappa1_frac,
        SweepParam::Kappa2 => &mut p.kappa2_frac,
        _ => &mut p.kappa_sc_frac,
    }
}

/// Parameters and chain length of one grid point, and whether the dependent
/// κ fraction came out non-negative.
fn resolve(spec: &SweepSpec, point: &[f64]) -> (CavityParams, usize, bool) {
    let mut p = spec.fixed;
    let mut n_nodes = spec.n_nodes;
    for (axis, &v) in spec.axes.iter().zip(point) {
        match axis.param {
            SweepParam::Kappa1 => p.kappa1_frac = v,
            SweepParam::Kappa2 => p.kappa2_frac = v,
            SweepParam::KappaSc => p.kappa_sc_frac = v,
            SweepParam::Cooperativity => p.cooperativity = v,
            SweepParam::NNodes => n_nodes = v.round() as usize,
        }
    }
    *dependent_slot(&mut p, spec.dependent) = 0.0;
    let rest = 1.0 - (p.kappa1_frac + p.kappa2_frac + p.kappa_sc_frac);
    let feasible = (-SUM_TOLERANCE..=1.0 + SUM_TOLERANCE).contains(&rest);
    *dependent_slot(&mut p, spec.dependent) = rest.clamp(0.0, 1.0);
    (p, n_nodes, feasible)
}

fn evaluate(spec: &SweepSpec, point: &[f64], width: usize) -> Result<Vec<Cell>> {
    let (params, n_nodes, feasible) = resolve(spec, point);
    let mut row: Vec<Cell> = vec![
        params.kappa1_frac.into(),
        params.kappa2_frac.into(),
        params.kappa_sc_frac.into(),
        params.cooperativity.into(),
        params.detuning_frac.into(),
    ];
    if spec.has_axis(SweepParam::NNodes) || spec.quantities.contains(&Quantity::Chain) {
        row.push(n_nodes.into());
    }
    if !feasible {
        row.push(STATUS_SKIPPED.into());
        row.resize(width, Cell::Empty);
        return Ok(row);
    }
    let params = validate_params(params)?;
    let result = carve(&params, spec.mode)?;
    let report = aggregate(&result).ok();
    row.push(
        if report.is_some() {
            STATUS_OK
        } else {
            "no-herald"
        }
        .into(),
    );

    for q in &spec.quantities {
        match q {
            Quantity::FAvg => row.push(report.map_or(Cell::Empty, |r| r.f_avg.into())),
            Quantity::PTotal => row.push(result.p_total.into()),
            Quantity::FWeighted => row.push(result.f_weighted.into()),
            Quantity::PLoss => row.push(result.p_loss.into()),
            Quantity::Analytic => {
                row.push(analytic_f_avg(params.epsilon1(), params.cooperativity).into())
            }
            Quantity::Detectors => {
                for d in spec.mode.detectors() {
                    let o = result.outcome(*d).expect("mode detector present");
                    row.push(o.probability.into());
                    row.push(if o.fidelity_defined {
                        o.fidelity.into()
                    } else {
                        Cell::Empty
                    });
                }
            }
            Quantity::Coefficients => {
                for k in CoeffSet::for_params(&params)?.by_atoms {
                    row.extend([k.r.re, k.r.im, k.t.re, k.t.im, k.loss_prob].map(Cell::Num));
                }
            }
            Quantity::Chain => {
                let g = grow_chain(n_nodes, &params, spec.mode, spec.method)?;
                row.push(g.p_total.into());
                row.push(g.f_estimate.into());
            }
        }
    }
    Ok(row)
}

/// Evaluates every grid point of `spec`. Points where the dependent κ
/// fraction would be negative are kept with status `skipped`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let mut table = Table::new(spec.columns());
    let width = table.columns.len();
    let rows: Vec<Vec<Cell>> = spec
        .points()
        .par_iter()
        .map(|p| evaluate(spec, p, width))
        .collect::<Result<_>>()?;
    for row in rows {
        table.push(row);
    }
    Ok(table)
}

/// Quantities whose shortfall from 1 is fitted against C.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalingQuantity {
    FAvg,
    PTotal,
    FWeighted,
}

impl ScalingQuantity {
    pub fn name(self) -> &'static str {
        match self {
            ScalingQuantity::FAvg => "f_avg",
            ScalingQuantity::PTotal => "p_total",
            ScalingQuantity::FWeighted => "f_weighted",
        }
    }
}

impl FromStr for ScalingQuantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "f_avg" => Ok(ScalingQuantity::FAvg),
            "p_total" => Ok(ScalingQuantity::PTotal),
            "f_weighted" => Ok(ScalingQuantity::FWeighted),
            other => Err(Error::Sweep(format!(
                "unknown scaling quantity '{other}' (f_avg, p_total or f_weighted)"
            ))),
        }
    }
}

/// Evaluates `quantity` at each C of `c_values` with the other parameters
/// from `template`, and fits `1 − quantity ≈ a·C^b`.
pub fn scaling_curve(
    c_values: &[f64],
    template: &CavityParams,
    quantity: ScalingQuantity,
    mode: Mode,
) -> Result<(Table, PowerLawFit)> {
    if c_values.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 C values, got {}",
            c_values.len()
        )));
    }
    if let Some(c) = c_values.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(Error::Fit(format!("C values must be positive, got {c}")));
    }
    let mut table = Table::new(["cooperativity", quantity.name(), "deficit"]);
    let mut deficits = Vec::with_capacity(c_values.len());
    for &c in c_values {
        let params = CavityParams {
            cooperativity: c,
            ..*template
        };
        let result = carve(&params, mode)?;
        let value = match quantity {
            ScalingQuantity::FAvg => aggregate(&result)?.f_avg,
            ScalingQuantity::PTotal => result.p_total,
            ScalingQuantity::FWeighted => result.f_weighted,
        };
        let deficit = 1.0 - value;
        deficits.push(deficit);
        table.push(vec![c.into(), value.into(), deficit.into()]);
    }
    let fit = fit_power_law(c_values, &deficits)?;
    Ok((table, fit))
}
