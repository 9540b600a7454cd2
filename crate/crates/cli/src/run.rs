//! Turns a resolved [`RunConfig`] into a result table.

use carvesim::cavity::{coefficients, validate_params, CavityParams};
use carvesim::graph::grow_chain;
use carvesim::sweep::{run_sweep, scaling_curve, Quantity, SweepSpec};
use carvesim::table::{Cell, Table};
use carvesim::Mode;

use crate::config::{Command, RunConfig};
use crate::error::CliError;

const PARAM_COLUMNS: [&str; 5] = [
    "kappa1_frac",
    "kappa2_frac",
    "kappa_sc_frac",
    "cooperativity",
    "detuning_frac",
];

fn param_cells(p: &CavityParams) -> Vec<Cell> {
    [
        p.kappa1_frac,
        p.kappa2_frac,
        p.kappa_sc_frac,
        p.cooperativity,
        p.detuning_frac,
    ]
    .map(Cell::Num)
    .to_vec()
}

fn with_params(extra: &[&str]) -> Table {
    Table::new(PARAM_COLUMNS.iter().chain(extra).copied())
}

pub fn execute(cfg: &RunConfig) -> Result<Table, CliError> {
    match cfg.command {
        Command::Coeffs => coeffs(cfg),
        Command::Carve => single(cfg, Mode::Efficient),
        Command::Standard => single(cfg, Mode::Standard),
        Command::Sweep => sweep(cfg),
        Command::Scaling => scaling(cfg),
        Command::Graph => graph(cfg),
    }
}

fn coeffs(cfg: &RunConfig) -> Result<Table, CliError> {
    let params = validate_params(cfg.params)?;
    let mut t = with_params(&[
        "n_atoms",
        "r_re",
        "r_im",
        "t_re",
        "t_im",
        "r_abs2",
        "t_abs2",
        "loss_prob",
    ]);
    for &n in &cfg.atoms {
        let c = coefficients(&params, n)?;
        let mut row = param_cells(&params);
        row.push(n.into());
        row.extend(
            [
                c.r.re,
                c.r.im,
                c.t.re,
                c.t.im,
                c.r.norm_sqr(),
                c.t.norm_sqr(),
                c.loss_prob,
            ]
            .map(Cell::Num),
        );
        t.push(row);
    }
    Ok(t)
}

fn single(cfg: &RunConfig, mode: Mode) -> Result<Table, CliError> {
    let params = validate_params(cfg.params)?;
    let spec = SweepSpec::new(params, mode).quantities(&[
        Quantity::Detectors,
        Quantity::PTotal,
        Quantity::PLoss,
        Quantity::FAvg,
        Quantity::FWeighted,
        Quantity::Analytic,
    ]);
    Ok(run_sweep(&spec)?)
}

fn sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut spec = SweepSpec::new(cfg.params, cfg.mode).quantities(&cfg.quantities);
    spec.axes = cfg.axes.iter().flatten().copied().collect();
    spec.dependent = cfg.dependent;
    spec.n_nodes = cfg.n_nodes;
    spec.method = cfg.method;
    Ok(run_sweep(&spec)?)
}

fn scaling(cfg: &RunConfig) -> Result<Table, CliError> {
    let params = validate_params(cfg.params)?;
    let (curve, fit) = scaling_curve(&cfg.c_values, &params, cfg.quantity, cfg.mode)?;
    let mut t = Table::new(curve.columns.iter().map(String::as_str).chain([
        "fit_exponent",
        "fit_coefficient",
        "fit_r_squared",
    ]));
    for mut row in curve.rows {
        row.extend([fit.exponent, fit.coefficient, fit.r_squared].map(Cell::Num));
        t.push(row);
    }
    Ok(t)
}

fn graph(cfg: &RunConfig) -> Result<Table, CliError> {
    let params = validate_params(cfg.params)?;
    if cfg.n_nodes < 2 {
        return Err(carvesim::Error::TooFewNodes(cfg.n_nodes).into());
    }
    let mut t = with_params(&[
        "mode",
        "method",
        "n_nodes",
        "p_total",
        "f_estimate",
        "p_standard_ideal",
    ]);
    // Longest chain first, so a size the exact method refuses fails before
    // any work on the shorter ones.
    let chains = (2..=cfg.n_nodes)
        .rev()
        .map(|n| grow_chain(n, &params, cfg.mode, cfg.method).map(|g| (n, g)))
        .collect::<Result<Vec<_>, _>>()?;
    for (n, g) in chains.into_iter().rev() {
        let mut row = param_cells(&params);
        row.extend([
            cfg.mode.as_str().into(),
            cfg.method.as_str().into(),
            n.into(),
            g.p_total.into(),
            g.f_estimate.into(),
            0.5f64.powi(n as i32 - 1).into(),
        ]);
        t.push(row);
    }
    Ok(t)
}
