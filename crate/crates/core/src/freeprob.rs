//! Closed-form spectral laws of products of Haar-rotated projectors.
//!
//! With `𝒱 = V̄⊥(V̄⊥)ᵀ` (rank `(1−β)n`) and `𝒰 = Ū_D⊥(Ū_D⊥)ᵀ` (rank
//! `(1−η)n`) freely independent, the product `D̃ = 𝒱𝒰` has S-transform
//! `(z+1)² / ((z+1−β)(z+1−η))`. Everything below follows from that: the
//! Stieltjes transform of `D̃`, its atoms and bulk, the compressed matrix
//! `D = (I^(l))ᵀ𝒱 I^(l)` and `Q = D⁻¹ − I`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// `(β, η)` with the derived bulk edges of the `D̃` law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub beta: f64,
    pub eta: f64,
    pub x_l: f64,
    pub x_u: f64,
    pub x_c: f64,
}

impl SpectralParams {
    pub fn new(beta: f64, eta: f64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("eta", eta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::param(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        let x_c = beta + eta - 2.0 * beta * eta;
        // x_c² − (β−η)² factors as 4βη(1−β)(1−η); the product form of the
        // lower root avoids cancellation when β ≈ η.
        let half_width = 2.0 * (beta * eta * (1.0 - beta) * (1.0 - eta)).sqrt();
        let x_u = x_c + half_width;
        let x_l = (beta - eta).powi(2) / x_u;
        Ok(SpectralParams {
            beta,
            eta,
            x_l,
            x_u,
            x_c,
        })
    }
}

fn check_pole(den: Complex64, z: Complex64) -> Result<()> {
    if den.norm() <= 8.0 * f64::EPSILON * (1.0 + z.norm()) {
        Err(Error::Pole { re: z.re, im: z.im })
    } else {
        Ok(())
    }
}

/// S-transform of a Haar projector whose kernel has relative dimension `gamma`:
/// `(z+1)/(z+1−γ)`.
pub fn s_projector(z: Complex64, gamma: f64) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::param(format!(
            "gamma must lie in [0, 1], got {gamma}"
        )));
    }
    let den = z + 1.0 - gamma;
    check_pole(den, z)?;
    Ok((z + 1.0) / den)
}

/// S-transform of `D̃`, the free product of the two projector laws.
pub fn s_dtilde(z: Complex64, beta: f64, eta: f64) -> Result<Complex64> {
    Ok(s_projector(z, beta)? * s_projector(z, eta)?)
}

/// Stieltjes transform of the `D̃` law.
///
/// Root of `G²(z³−z²) − G(z²−z(β+η)) − βη = 0`. With the principal square
/// root of `(z−(β+η))² + 4βη(z−1)`, the `+` root is taken when the radicand
/// has positive imaginary part and the `−` root when it is negative; a real
/// radicand uses the limit from the upper half-plane. Lower half-plane
/// arguments are handled through `G(z̄) = conj G(z)`.
pub fn g_dtilde(z: Complex64, beta: f64, eta: f64) -> Result<Complex64> {
    if z.im < 0.0 {
        return g_dtilde(z.conj(), beta, eta).map(|g| g.conj());
    }
    let den = 2.0 * (z * z - z);
    check_pole(den, z)?;
    let a = z - (beta + eta);
    let rad = a * a + 4.0 * beta * eta * (z - 1.0);
    let root = rad.sqrt();
    let plus = if rad.im != 0.0 {
        rad.im > 0.0
    } else {
        // Im(rad) = 2·Im(z)·(Re(z) − x_c) just above the real axis.
        z.re >= beta + eta - 2.0 * beta * eta
    };
    let num = if plus { a + root } else { a - root };
    Ok(num / den)
}

/// Residual of the defining quadratic of `G_D̃` at `z`.
pub fn g_dtilde_residual(g: Complex64, z: Complex64, beta: f64, eta: f64) -> f64 {
    let z2 = z * z;
    (g * g * (z2 * z - z2) - g * (z2 - z * (beta + eta)) - beta * eta).norm()
}

/// Density recovered from a Stieltjes transform: `max(0, −Im G(x+iε)/π)`.
pub fn stieltjes_invert<F>(g: F, x: f64, eps: f64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if !(eps > 0.0) {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    let v = g(Complex64::new(x, eps))?;
    Ok((-v.im / PI).max(0.0))
}

/// R-transform at `w` from an S-transform, using `S(z) = 1/R(z·S(z))`:
/// solve `z = w / S(z)` by fixed-point iteration, then `R(w) = 1/S(z)`.
pub fn r_from_s<F>(s: F, w: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut z = w;
    for _ in 0..1000 {
        let next = w / s(z)?;
        if (next - z).norm() <= 1e-15 * (1.0 + z.norm()) {
            return Ok(1.0 / s(next)?);
        }
        z = next;
    }
    Err(Error::NoConvergence(format!("R-transform at w = {w}")))
}

/// Which limiting law a [`Density`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// `D̃ = 𝒱𝒰`, an `n × n` product of projectors.
    Dtilde,
    /// `D = (I^(l))ᵀ𝒱 I^(l)`, the `(n−l) × (n−l)` hidden-block compression.
    D,
    /// `Q = D⁻¹ − I`.
    Q,
}

/// Limiting spectral distribution: point masses plus an absolutely
/// continuous bulk on `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub law: Law,
    pub params: SpectralParams,
    /// `(location, mass)` pairs; zero-mass atoms are kept so callers can
    /// compare against empirical counts at fixed locations.
    pub atoms: Vec<(f64, f64)>,
    pub support: (f64, f64),
}

/// Serialized form for plotting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityJson {
    pub atoms: Vec<[f64; 2]>,
    pub support: [f64; 2],
    pub samples: Vec<[f64; 2]>,
}

const QUAD_TOL: f64 = 1e-10;

impl Density {
    /// Bulk density at `x`; zero outside the support.
    pub fn bulk(&self, x: f64) -> f64 {
        let (a, b) = self.support;
        if !(x >= a && x <= b) {
            return 0.0;
        }
        let SpectralParams { beta, eta, .. } = self.params;
        let s = beta + eta;
        let be = beta * eta;
        match self.law {
            Law::Dtilde | Law::D => {
                let den = 2.0 * PI * (x - x * x);
                if den <= 0.0 {
                    return 0.0;
                }
                let r = (-(x - s).powi(2) - 4.0 * be * (x - 1.0)).max(0.0);
                let v = r.sqrt() / den;
                if self.law == Law::D {
                    v / (1.0 - eta)
                } else {
                    v
                }
            }
            Law::Q => {
                // Pushforward of the D bulk under x ↦ 1/x − 1.
                let den = 2.0 * PI * x * (x + 1.0) * (1.0 - eta);
                if den <= 0.0 {
                    return 0.0;
                }
                let r = (-(1.0 - (x + 1.0) * s).powi(2) + 4.0 * be * x * (x + 1.0)).max(0.0);
                r.sqrt() / den
            }
        }
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, m)| m).sum()
    }

    /// Bulk mass on `[lo, hi] ∩ support`.
    pub fn bulk_mass_between(&self, lo: f64, hi: f64) -> f64 {
        let a = lo.max(self.support.0);
        let b = hi.min(self.support.1);
        if b <= a {
            return 0.0;
        }
        // The edge substitution also absorbs a support endpoint that falls
        // inside a partial window.
        quad::integrate_sqrt_edges(|x| self.bulk(x), a, b, QUAD_TOL)
    }

    pub fn bulk_mass(&self) -> f64 {
        self.bulk_mass_between(self.support.0, self.support.1)
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_mass() + self.bulk_mass()
    }

    pub fn to_json(&self, samples: usize) -> DensityJson {
        let (a, b) = self.support;
        let pts = match samples {
            0 => Vec::new(),
            1 => vec![[0.5 * (a + b), self.bulk(0.5 * (a + b))]],
            _ => (0..samples)
                .map(|i| {
                    let x = a + (b - a) * i as f64 / (samples - 1) as f64;
                    [x, self.bulk(x)]
                })
                .collect(),
        };
        DensityJson {
            atoms: self.atoms.iter().map(|&(x, m)| [x, m]).collect(),
            support: [a, b],
            samples: pts,
        }
    }
}

/// Limiting law of `D̃`: atoms `max(β,η)` at 0 and `max(1−β−η, 0)` at 1,
/// bulk on `[x_l, x_u]`.
pub fn density_dtilde(params: SpectralParams) -> Density {
    let SpectralParams { beta, eta, .. } = params;
    Density {
        law: Law::Dtilde,
        params,
        atoms: vec![(0.0, beta.max(eta)), (1.0, (1.0 - beta - eta).max(0.0))],
        support: (params.x_l, params.x_u),
    }
}

/// Limiting law of `D` (equivalently `D̄`): the `D̃` law with `ηn` zeros
/// removed and renormalized by `1/(1−η)`.
pub fn density_d(params: SpectralParams) -> Density {
    let SpectralParams { beta, eta, .. } = params;
    let scale = 1.0 / (1.0 - eta);
    Density {
        law: Law::D,
        params,
        atoms: vec![
            (0.0, (beta.max(eta) - eta) * scale),
            (1.0, (1.0 - beta - eta).max(0.0) * scale),
        ],
        support: (params.x_l, params.x_u),
    }
}

/// Limiting law of `Q = D⁻¹ − I`: the `D` law with its bulk pushed through
/// `x ↦ 1/x − 1` and its atom at 1 moved to 0. Needs `β ≤ η` (so `D` is invertible) and
/// `β ≠ η` (otherwise `x_l = 0` and the support is unbounded).
pub fn density_q(params: SpectralParams) -> Result<Density> {
    let SpectralParams {
        beta,
        eta,
        x_l,
        x_u,
        ..
    } = params;
    if beta > eta {
        return Err(Error::AssumptionViolated(format!(
            "Q needs beta <= eta, got beta={beta}, eta={eta}"
        )));
    }
    if x_l <= 0.0 {
        return Err(Error::UnboundedSupport(format!(
            "beta = eta = {beta} puts the lower D edge at 0"
        )));
    }
    Ok(Density {
        law: Law::Q,
        params,
        atoms: vec![(0.0, (1.0 - beta - eta).max(0.0) / (1.0 - eta))],
        support: (1.0 / x_u - 1.0, 1.0 / x_l - 1.0),
    })
}

/// Asymptotic top eigenvalue of `Q`: `1/x_l − 1`.
pub fn lambda_max_q_theory(params: SpectralParams) -> Result<f64> {
    let SpectralParams { beta, eta, x_l, .. } = params;
    if beta > eta {
        return Err(Error::AssumptionViolated(format!(
            "Q needs beta <= eta, got beta={beta}, eta={eta}"
        )));
    }
    if x_l <= 0.0 {
        return Err(Error::UnboundedSupport(format!(
            "lambda_max(Q) is infinite at beta = eta = {beta}"
        )));
    }
    Ok(1.0 / x_l - 1.0)
}
