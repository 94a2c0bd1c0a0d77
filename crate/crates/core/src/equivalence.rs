//! Finite-n certificates for exact recovery by nuclear-norm minimization
//! under a block mask.
//!
//! Recovery succeeds iff some `Λ` with `ΛᵀΛ ⪯ I` makes the hidden block of
//! `V̄Ūᵀ + V̄⊥Λ(Ū⊥)ᵀ` vanish. With `B = (I^(l))ᵀV̄⊥`, `C = (I^(l))ᵀŪ⊥` and
//!
//! ```text
//! Λ_V = B⁺ (I^(l))ᵀV̄,   Λ_U = C⁺ (I^(l))ᵀŪ,   Λ_opt = −Λ_V Λ_Uᵀ
//! ```
//!
//! the minimal-norm annihilator is `Λ_opt`, so the test reduces to
//! `λ_max(Λ_VᵀΛ_V Λ_UᵀΛ_U) ≤ 1`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lambda_max_sym, pinv, sym_eigenvalues, symmetrize, tail_rows};
use crate::randmat::{LowRankInstance, MaskMatrix};

/// Relative singular-value cutoff for the pseudo-inverses.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Slack on the `λ_max ≤ 1` test.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Smallest admissible reciprocal condition number of `D`.
pub const RCOND_MIN: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LambdaFactors {
    /// `(n−k) × k`
    pub lambda_v: DMatrix<f64>,
    /// `(n−k) × k`
    pub lambda_u: DMatrix<f64>,
    /// Set when a pseudo-inverse dropped singular values below the cutoff.
    pub ill_conditioned: bool,
}

impl LambdaFactors {
    /// `Λ_opt = −Λ_V Λ_Uᵀ`, the certificate that annihilates the hidden block.
    pub fn lambda_opt(&self) -> DMatrix<f64> {
        -(&self.lambda_v * self.lambda_u.transpose())
    }
}

fn block_l(inst: &LowRankInstance, mask: &MaskMatrix) -> Result<usize> {
    let l = mask
        .l()
        .ok_or_else(|| Error::param("certificates are defined for block masks only"))?;
    if mask.n() != inst.n {
        return Err(Error::param(format!(
            "mask is {}x{} but instance is {}x{}",
            mask.n(),
            mask.n(),
            inst.n,
            inst.n
        )));
    }
    if inst.k > l {
        return Err(Error::AssumptionViolated(format!(
            "certificate needs k <= l, got k={}, l={l}",
            inst.k
        )));
    }
    Ok(l)
}

fn lambda_factor(perp: &DMatrix<f64>, bar: &DMatrix<f64>, l: usize) -> (DMatrix<f64>, bool) {
    let (b_pinv, cut) = pinv(&tail_rows(perp, l), PINV_CUTOFF);
    (b_pinv * tail_rows(bar, l), cut)
}

pub fn build_lambda_factors(inst: &LowRankInstance, mask: &MaskMatrix) -> Result<LambdaFactors> {
    let l = block_l(inst, mask)?;
    let (lambda_v, cut_v) = lambda_factor(&inst.vperp, &inst.vbar, l);
    let (lambda_u, cut_u) = lambda_factor(&inst.uperp, &inst.ubar, l);
    Ok(LambdaFactors {
        lambda_v,
        lambda_u,
        ill_conditioned: cut_v || cut_u,
    })
}

fn residual_with(inst: &LowRankInstance, l: usize, factors: &LambdaFactors) -> f64 {
    let n = inst.n;
    if inst.k == 0 || l == n {
        return 0.0;
    }
    let vh = tail_rows(&inst.vbar, l);
    let uh = tail_rows(&inst.ubar, l);
    let vph = tail_rows(&inst.vperp, l);
    let uph = tail_rows(&inst.uperp, l);
    let block = &vh * uh.transpose() + vph * factors.lambda_opt() * uph.transpose();
    block.norm()
}

/// Frobenius norm of `(I^(l))ᵀ(V̄Ūᵀ + V̄⊥Λ_opt(Ū⊥)ᵀ)I^(l)`.
pub fn certificate_residual(inst: &LowRankInstance, mask: &MaskMatrix) -> Result<f64> {
    let l = block_l(inst, mask)?;
    let factors = build_lambda_factors(inst, mask)?;
    Ok(residual_with(inst, l, &factors))
}

fn q_from_gram(mut d: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = d.nrows();
    if m == 0 {
        return Ok(d);
    }
    symmetrize(&mut d);
    let eig = d.symmetric_eigen();
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    if !(lmin > RCOND_MIN * lmax) {
        return Err(Error::Singular(format!(
            "masked Gram block has eigenvalue range [{lmin:e}, {lmax:e}]"
        )));
    }
    let shifted = eig.eigenvalues.map(|v| 1.0 / v - 1.0);
    let w = &eig.eigenvectors;
    let mut q = w * DMatrix::from_diagonal(&shifted) * w.transpose();
    symmetrize(&mut q);
    Ok(q)
}

/// The `(n−l) × (n−l)` Gram block `D = (I^(l))ᵀV̄⊥(V̄⊥)ᵀI^(l)`.
pub fn masked_gram(vperp: &DMatrix<f64>, l: usize) -> Result<DMatrix<f64>> {
    if l > vperp.nrows() {
        return Err(Error::param(format!("l={l} exceeds n={}", vperp.nrows())));
    }
    let b = tail_rows(vperp, l);
    Ok(&b * b.transpose())
}

/// `Q = D⁻¹ − I` from the complement basis `V̄⊥`.
pub fn build_q(vperp: &DMatrix<f64>, l: usize) -> Result<DMatrix<f64>> {
    q_from_gram(masked_gram(vperp, l)?)
}

/// `Q` from the factor `V̄` instead of its complement, using
/// `V̄⊥(V̄⊥)ᵀ = I − V̄V̄ᵀ`. Avoids forming the `n × (n−k)` complement, which
/// matters for spectra at large `n`.
pub fn build_q_from_factor(vbar: &DMatrix<f64>, l: usize) -> Result<DMatrix<f64>> {
    let n = vbar.nrows();
    if l > n {
        return Err(Error::param(format!("l={l} exceeds n={n}")));
    }
    let vh = tail_rows(vbar, l);
    let d = DMatrix::identity(n - l, n - l) - &vh * vh.transpose();
    q_from_gram(d)
}

/// `Q₁ = Λ_VᵀΛ_V`, which shares its nonzero spectrum with `Q`.
pub fn build_q1(lambda_v: &DMatrix<f64>) -> DMatrix<f64> {
    let mut g = lambda_v.transpose() * lambda_v;
    symmetrize(&mut g);
    g
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `λ_max(Λ_VᵀΛ_V Λ_UᵀΛ_U)`
    pub lambda_max_product: f64,
    /// `λ_max(Λ_VᵀΛ_V)`
    pub lambda_max_v: f64,
    /// `λ_max(Λ_UᵀΛ_U)`
    pub lambda_max_u: f64,
    pub certificate_residual: f64,
    /// Necessary and sufficient verdict: `lambda_max_product ≤ 1 + tol`.
    pub equivalent: bool,
    /// The product of the individual spectral radii is already `≤ 1`.
    pub sufficient_only: bool,
    /// `lambda_max_product` lies within tolerance of 1.
    pub boundary: bool,
    pub ill_conditioned: bool,
}

pub fn check_equivalence(inst: &LowRankInstance, mask: &MaskMatrix) -> Result<CertificateReport> {
    let l = block_l(inst, mask)?;
    let factors = build_lambda_factors(inst, mask)?;
    let lambda_max_v = lambda_max_sym(&build_q1(&factors.lambda_v));
    let lambda_max_u = lambda_max_sym(&build_q1(&factors.lambda_u));
    // λ_max(Λ_VᵀΛ_VΛ_UᵀΛ_U) = λ_max(SSᵀ) with S = Λ_UΛ_Vᵀ: same nonzero
    // spectrum, but symmetric.
    let s = &factors.lambda_u * factors.lambda_v.transpose();
    let lambda_max_product = lambda_max_sym(&(&s * s.transpose())).max(0.0);
    let certificate_residual = residual_with(inst, l, &factors);
    Ok(CertificateReport {
        lambda_max_product,
        lambda_max_v,
        lambda_max_u,
        certificate_residual,
        equivalent: lambda_max_product <= 1.0 + BOUNDARY_TOL,
        sufficient_only: lambda_max_v * lambda_max_u <= 1.0,
        boundary: (lambda_max_product - 1.0).abs() <= BOUNDARY_TOL,
        ill_conditioned: factors.ill_conditioned,
    })
}

/// Nonzero parts of two spectra, matched in ascending order after deleting
/// the `|len_a − len_b|` smallest-magnitude eigenvalues of the longer one.
pub fn match_nonzero_spectra(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut ea = sym_eigenvalues(a);
    let mut eb = sym_eigenvalues(b);
    let drop_small = |v: &mut Vec<f64>, count: usize| {
        v.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
        v.drain(..count);
        v.sort_by(|x, y| x.total_cmp(y));
    };
    if ea.len() > eb.len() {
        let d = ea.len() - eb.len();
        drop_small(&mut ea, d);
    } else {
        let d = eb.len() - ea.len();
        drop_small(&mut eb, d);
    }
    (ea, eb)
}
