//! Figures of merit for a carving run and the analytic fidelity predictor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::CarveResult;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub f_avg: f64,
    pub p_total: f64,
    pub f_weighted: f64,
    pub analytic_f_avg: f64,
    pub epsilon1: f64,
}

/// Collapses the detector outcomes into average fidelity, total probability
/// and fidelity-weighted probability. Fails when no detector can click.
pub fn aggregate(result: &CarveResult) -> Result<MetricsReport> {
    let clicks = || result.outcomes.iter().filter(|o| o.probability > 0.0);
    let p_total: f64 = clicks().map(|o| o.probability).sum();
    if p_total <= 0.0 {
        return Err(Error::NoHerald);
    }
    let f_weighted: f64 = clicks().map(|o| o.fidelity * o.probability).sum();
    let epsilon1 = result.params.epsilon1();
    Ok(MetricsReport {
        f_avg: f_weighted / p_total,
        p_total,
        f_weighted,
        analytic_f_avg: analytic_f_avg(epsilon1, result.params.cooperativity),
        epsilon1,
    })
}

/// Analytic average fidelity `(1 − ε₁²/2) − (17/16)/C²`.
pub fn analytic_f_avg(epsilon1: f64, cooperativity: f64) -> f64 {
    (1.0 - epsilon1 * epsilon1 / 2.0) - 17.0 / 16.0 / (cooperativity * cooperativity)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficient * x.powf(self.exponent)
    }
}

/// Ordinary least squares of `ln y` against `ln x`, giving `y ≈ a·x^b`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!(
            "{} x values but {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 samples, got {}",
            xs.len()
        )));
    }
    if let Some((x, y)) = xs
        .iter()
        .zip(ys)
        .find(|(x, y)| !(x.is_finite() && y.is_finite() && **x > 0.0 && **y > 0.0))
    {
        return Err(Error::Fit(format!(
            "samples must be positive and finite, got ({x}, {y})"
        )));
    }

    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all x values are equal".into()));
    }

    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };

    Ok(PowerLawFit {
        exponent: slope,
        coefficient: intercept.exp(),
        r_squared,
    })
}
