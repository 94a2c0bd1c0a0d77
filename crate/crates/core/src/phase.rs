//! Worst-case phase-transition curve in `(β, η)` and `(α, β)` coordinates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-width of the band around the curve reported as `Boundary`.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Recoverable,
    NotRecoverable,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PTPoint {
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub region: Region,
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must lie in (0,1), got {v}")))
    }
}

/// Observed fraction of entries, `1 − (1−η)²`.
pub fn alpha_of_eta(eta: f64) -> f64 {
    1.0 - (1.0 - eta) * (1.0 - eta)
}

/// `1/2 − sqrt(η − η²)`.
pub fn beta_wc(eta: f64) -> Result<f64> {
    check_open_unit("eta", eta)?;
    Ok(0.5 - (eta - eta * eta).max(0.0).sqrt())
}

/// `1/2 − sqrt(sqrt(1−α) − 1 + α)`.
pub fn beta_wc_from_alpha(alpha: f64) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    Ok(0.5 - ((1.0 - alpha).sqrt() - 1.0 + alpha).max(0.0).sqrt())
}

pub fn classify(beta: f64, eta: f64, tol: f64) -> Result<PTPoint> {
    check_open_unit("eta", eta)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::param(format!("beta must lie in [0,1), got {beta}")));
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::param(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    let region = if beta > 0.5 {
        Region::NotRecoverable
    } else {
        let b = beta_wc(eta)?;
        if beta < b - tol {
            Region::Recoverable
        } else if beta > b + tol {
            Region::NotRecoverable
        } else {
            Region::Boundary
        }
    };
    Ok(PTPoint {
        eta,
        alpha: alpha_of_eta(eta),
        beta,
        region,
    })
}

/// Points on the curve itself; every `region` is `Boundary`.
pub fn pt_curve(grid: &[f64]) -> Result<Vec<PTPoint>> {
    grid.iter()
        .map(|&eta| {
            Ok(PTPoint {
                eta,
                alpha: alpha_of_eta(eta),
                beta: beta_wc(eta)?,
                region: Region::Boundary,
            })
        })
        .collect()
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

pub const PT_CURVE_HEADER: &str = "eta,alpha,beta_wc";

pub fn pt_curve_csv(points: &[PTPoint]) -> String {
    let mut out = String::from(PT_CURVE_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.eta, p.alpha, p.beta);
    }
    out
}
