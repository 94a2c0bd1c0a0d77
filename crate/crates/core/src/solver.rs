//! Nuclear-norm completion `min ‖X‖_* s.t. M∘X = Y` by ADMM.
//!
//! Splitting `X = Z` with `Z` constrained to the affine set of matrices that
//! agree with `Y` on the mask, each iteration is one singular-value
//! shrinkage, one exact projection (overwrite observed entries) and a scaled
//! dual update.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::randmat::{LowRankInstance, MaskMatrix};

/// Singular values below this fraction of `σ_max` do not count toward rank.
pub const RANK_REL_THRESHOLD: f64 = 1e-8;

/// `ℓ_p` of the singular-value vector. `p = 1` is the nuclear norm, `p = 0`
/// the numerical rank.
pub fn ell_p_star(x: &DMatrix<f64>, p: f64) -> f64 {
    let sv = singular_values(x);
    let smax = sv.first().copied().unwrap_or(0.0);
    if p == 0.0 {
        if smax == 0.0 {
            return 0.0;
        }
        return sv
            .iter()
            .filter(|&&s| s > RANK_REL_THRESHOLD * smax)
            .count() as f64;
    }
    if p == 1.0 {
        return sv.iter().sum();
    }
    sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Proximal map of `τ‖·‖_*`: shrink every singular value by `τ`.
pub fn svt(x: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    svt_with_norm(x, tau).0
}

/// [`svt`] that also returns the nuclear norm of the result.
fn svt_with_norm(x: &DMatrix<f64>, tau: f64) -> (DMatrix<f64>, f64) {
    if x.is_empty() {
        return (x.clone(), 0.0);
    }
    let tau = tau.max(0.0);
    let svd = x.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let (rows, cols) = x.shape();
    let mut out = DMatrix::zeros(rows, cols);
    let mut nuc = 0.0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let shrunk = s - tau;
        if shrunk > 0.0 {
            nuc += shrunk;
            out += shrunk * u.column(i) * vt.row(i);
        }
    }
    (out, nuc)
}

/// Frobenius norm of `x_hat − x_sol`.
pub fn rmse(x_hat: &DMatrix<f64>, x_sol: &DMatrix<f64>) -> Result<f64> {
    if x_hat.shape() != x_sol.shape() {
        return Err(Error::param(format!(
            "shape mismatch: {:?} vs {:?}",
            x_hat.shape(),
            x_sol.shape()
        )));
    }
    Ok((x_hat - x_sol).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// ADMM penalty `ρ`; the shrinkage threshold is `1/ρ`.
    pub step: f64,
    pub tol_primal: f64,
    pub tol_rel_change: f64,
    pub success_rmse_rel: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 2000,
            step: 1.0,
            tol_primal: 1e-8,
            tol_rel_change: 1e-10,
            success_rmse_rel: 1e-4,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::param("max_iters must be at least 1"));
        }
        for (name, v) in [
            ("step", self.step),
            ("tol_primal", self.tol_primal),
            ("tol_rel_change", self.tol_rel_change),
            ("success_rmse_rel", self.success_rmse_rel),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub x_hat: DMatrix<f64>,
    /// `‖X̂ − X_sol‖_F`, present when ground truth was supplied.
    pub rmse: Option<f64>,
    /// `rmse / ‖X_sol‖_F` (plain `rmse` when `X_sol = 0`).
    pub rmse_rel: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub success: Option<bool>,
    /// `‖X̂‖_*`
    pub objective: f64,
    /// `‖M∘X̂ − Y‖_F`
    pub feasibility_residual: f64,
}

/// Solve `min ‖X‖_* s.t. M∘X = Y`.
///
/// The returned `x_hat` is always a projected iterate, so it matches `Y` on
/// the mask exactly. If the run stops at `max_iters`, the feasible iterate
/// with the smallest nuclear norm seen is returned instead of the last one.
pub fn complete_nuclear(
    y: &DMatrix<f64>,
    mask: &MaskMatrix,
    opts: &SolveOptions,
    truth: Option<&LowRankInstance>,
) -> Result<SolveReport> {
    opts.validate()?;
    let n = mask.n();
    if y.shape() != (n, n) {
        return Err(Error::param(format!(
            "observations are {}x{} but mask is {n}x{n}",
            y.nrows(),
            y.ncols()
        )));
    }
    if y.iter()
        .zip(mask.entries().iter())
        .any(|(&v, &m)| m == 0.0 && v != 0.0)
    {
        return Err(Error::param("observations are nonzero outside the mask"));
    }
    if let Some(t) = truth {
        if t.n != n {
            return Err(Error::param("ground truth size does not match the mask"));
        }
    }

    let tau = 1.0 / opts.step;
    let feas_tol = opts.tol_primal * (1.0 + y.norm());
    let mut z = y.clone();
    let mut w = DMatrix::<f64>::zeros(n, n);
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=opts.max_iters {
        iterations = it;
        let (x, x_nuc) = svt_with_norm(&(&z - &w), tau);
        let mut z_next = &x + &w;
        mask.project_onto(&mut z_next, y);
        let primal = (&x - &z_next).norm();
        let change = (&z_next - &z).norm() / (1.0 + z.norm());
        w += &x - &z_next;
        z = z_next;

        // Z is always feasible; its score is only trusted once Z is close to X.
        if primal <= 1e3 * feas_tol {
            let score = x_nuc + primal * (n as f64).sqrt();
            if best.as_ref().is_none_or(|(b, _)| score < *b) {
                best = Some((score, z.clone()));
            }
        }
        if primal <= feas_tol && change <= opts.tol_rel_change {
            converged = true;
            break;
        }
    }

    let x_hat = match (converged, best) {
        (false, Some((_, b))) => b,
        _ => z,
    };
    let objective = ell_p_star(&x_hat, 1.0);
    let feasibility_residual = (mask.entries().component_mul(&x_hat) - y).norm();
    let (rmse_abs, rmse_rel, success) = match truth {
        Some(t) => {
            let e = rmse(&x_hat, &t.x_sol)?;
            let scale = t.x_sol.norm();
            let rel = if scale > 0.0 { e / scale } else { e };
            (Some(e), Some(rel), Some(rel <= opts.success_rmse_rel))
        }
        None => (None, None, None),
    };
    Ok(SolveReport {
        x_hat,
        rmse: rmse_abs,
        rmse_rel,
        iterations,
        converged,
        success,
        objective,
        feasibility_residual,
    })
}
