//! Run configuration: defaults per command, a `key=value` file, then
//! command-line settings, in that order of precedence.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use carvesim::graph::Method;
use carvesim::sweep::{Axis, Quantity, ScalingQuantity, SweepParam};
use carvesim::{CavityParams, Mode};
use clap::ValueEnum;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Reflection/transmission coefficients for given atom numbers.
    Coeffs,
    /// One run of the single-photon two-pass protocol.
    Carve,
    /// One run of the two-photon reflection protocol.
    Standard,
    /// A one- or two-axis parameter grid.
    Sweep,
    /// Deficit of a figure of merit against C, with a power-law fit.
    Scaling,
    /// Chain growth by repeated carving.
    Graph,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Carve => "carve",
            Command::Standard => "standard",
            Command::Sweep => "sweep",
            Command::Scaling => "scaling",
            Command::Graph => "graph",
        }
    }

    /// Keys that may be set for this command, in echo order.
    pub fn keys(self) -> Vec<&'static str> {
        let mut keys = PARAM_KEYS.to_vec();
        keys.extend_from_slice(match self {
            Command::Coeffs => &["atoms"][..],
            Command::Carve | Command::Standard => &[],
            Command::Sweep => &[
                "mode",
                "axis1",
                "axis2",
                "dependent",
                "quantities",
                "n_nodes",
                "method",
            ],
            Command::Scaling => &["mode", "c_values", "quantity"],
            Command::Graph => &["mode", "n_nodes", "method"],
        });
        keys
    }
}

const PARAM_KEYS: [&str; 6] = [
    "kappa1_frac",
    "kappa2_frac",
    "kappa_sc_frac",
    "cooperativity",
    "detuning_frac",
    "atom_linewidth_frac",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        <Format as ValueEnum>::from_str(s, false)
            .map_err(|_| CliError::Config(format!("unknown format '{s}' (csv or json)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: CavityParams,
    pub mode: Mode,
    pub atoms: Vec<usize>,
    pub axes: [Option<Axis>; 2],
    pub dependent: SweepParam,
    pub quantities: Vec<Quantity>,
    pub n_nodes: usize,
    pub method: Method,
    pub c_values: Vec<f64>,
    pub quantity: ScalingQuantity,
    pub format: Format,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let params = match command {
            Command::Standard => CavityParams::one_sided(20.0),
            _ => CavityParams::symmetric(20.0),
        };
        Self {
            command,
            params,
            mode: Mode::Efficient,
            atoms: vec![0, 1, 2],
            axes: [None, None],
            dependent: SweepParam::KappaSc,
            quantities: vec![Quantity::FAvg, Quantity::PTotal, Quantity::FWeighted],
            n_nodes: 5,
            method: Method::ProductModel,
            c_values: vec![50.0, 100.0, 200.0, 400.0],
            quantity: ScalingQuantity::FAvg,
            format: Format::Csv,
            output: None,
        }
    }

    /// Sets one key. Keys outside [`Command::keys`] (plus `format` and
    /// `output`) are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        let bad = |e: &dyn std::fmt::Display| CliError::Config(format!("{key}={value}: {e}"));
        match key {
            "format" => return value.parse().map(|f| self.format = f),
            "output" => {
                self.output = (value != "-").then(|| PathBuf::from(value));
                return Ok(());
            }
            _ if !self.command.keys().contains(&key) => {
                return Err(CliError::Config(format!(
                    "unknown key '{key}' for command {} (accepted: {}, format, output)",
                    self.command.name(),
                    self.command.keys().join(", ")
                )));
            }
            _ => {}
        }
        let p = &mut self.params;
        match key {
            "kappa1_frac" => p.kappa1_frac = parse_f64(value).map_err(|e| bad(&e))?,
            "kappa2_frac" => p.kappa2_frac = parse_f64(value).map_err(|e| bad(&e))?,
            "kappa_sc_frac" => p.kappa_sc_frac = parse_f64(value).map_err(|e| bad(&e))?,
            "cooperativity" => p.cooperativity = parse_f64(value).map_err(|e| bad(&e))?,
            "detuning_frac" => p.detuning_frac = parse_f64(value).map_err(|e| bad(&e))?,
            "atom_linewidth_frac" => {
                p.atom_linewidth_frac = parse_f64(value).map_err(|e| bad(&e))?
            }
            "mode" => self.mode = value.parse().map_err(|e| bad(&e))?,
            "atoms" => {
                self.atoms = parse_list(value, |s| s.parse::<usize>().map_err(|e| e.to_string()))
                    .map_err(|e| bad(&e))?
            }
            "axis1" => self.axes[0] = parse_axis(value).map_err(|e| bad(&e))?,
            "axis2" => self.axes[1] = parse_axis(value).map_err(|e| bad(&e))?,
            "dependent" => self.dependent = value.parse().map_err(|e| bad(&e))?,
            "quantities" => {
                self.quantities =
                    parse_list(value, |s| s.parse::<Quantity>().map_err(|e| e.to_string()))
                        .map_err(|e| bad(&e))?
            }
            "n_nodes" => self.n_nodes = value.parse().map_err(|e| bad(&e))?,
            "method" => self.method = value.parse().map_err(|e| bad(&e))?,
            "c_values" => self.c_values = parse_list(value, parse_f64).map_err(|e| bad(&e))?,
            "quantity" => self.quantity = value.parse().map_err(|e| bad(&e))?,
            _ => unreachable!("key list and match arms disagree on '{key}'"),
        }
        Ok(())
    }

    /// Applies a `key=value` setting.
    pub fn set_pair(&mut self, setting: &str) -> Result<(), CliError> {
        let (k, v) = setting
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got '{setting}'")))?;
        self.set(k.trim(), v)
    }

    /// Applies every setting of a config file: one `key=value` per line,
    /// `#` starts a comment, blank lines are ignored.
    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_pair(line).map_err(|e| {
                CliError::Config(format!("{}:{}: {}", path.display(), i + 1, e.detail()))
            })?;
        }
        Ok(())
    }

    /// The resolved settings as `key=value` pairs that reproduce this run
    /// when fed back in. Output destination and format are left out.
    pub fn echo(&self) -> Vec<(String, String)> {
        let p = &self.params;
        self.command
            .keys()
            .into_iter()
            .filter_map(|k| {
                let v = match k {
                    "kappa1_frac" => p.kappa1_frac.to_string(),
                    "kappa2_frac" => p.kappa2_frac.to_string(),
                    "kappa_sc_frac" => p.kappa_sc_frac.to_string(),
                    "cooperativity" => p.cooperativity.to_string(),
                    "detuning_frac" => p.detuning_frac.to_string(),
                    "atom_linewidth_frac" => p.atom_linewidth_frac.to_string(),
                    "mode" => self.mode.as_str().to_string(),
                    "atoms" => join(&self.atoms),
                    "axis1" => render_axis(self.axes[0].as_ref()?),
                    "axis2" => render_axis(self.axes[1].as_ref()?),
                    "dependent" => self.dependent.name().to_string(),
                    "quantities" => {
                        join(&self.quantities.iter().map(|q| q.name()).collect::<Vec<_>>())
                    }
                    "n_nodes" => self.n_nodes.to_string(),
                    "method" => self.method.as_str().to_string(),
                    "c_values" => join(&self.c_values),
                    "quantity" => self.quantity.name().to_string(),
                    _ => return None,
                };
                Some((k.to_string(), v))
            })
            .collect()
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    s.split(',').map(|x| item(x.trim())).collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// `param:min:max:steps`, optionally followed by `:log`; `none` clears the axis.
fn parse_axis(s: &str) -> Result<Option<Axis>, String> {
    if s == "none" || s.is_empty() {
        return Ok(None);
    }
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let log = match parts.get(4) {
        None => false,
        Some(&"log") => true,
        Some(&"lin") => false,
        Some(other) => {
            return Err(format!(
                "axis spacing must be 'lin' or 'log', got '{other}'"
            ))
        }
    };
    if !(4..=5).contains(&parts.len()) {
        return Err("axis must look like param:min:max:steps[:log]".into());
    }
    Ok(Some(Axis {
        param: parts[0]
            .parse()
            .map_err(|e: carvesim::Error| e.to_string())?,
        min: parse_f64(parts[1])?,
        max: parse_f64(parts[2])?,
        steps: parts[3]
            .parse()
            .map_err(|_| format!("steps '{}' is not a count", parts[3]))?,
        log,
    }))
}

fn render_axis(a: &Axis) -> String {
    let mut s = format!("{}:{}:{}:{}", a.param.name(), a.min, a.max, a.steps);
    if a.log {
        let _ = write!(s, ":log");
    }
    s
}
