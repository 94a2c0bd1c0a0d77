//! Random test objects: Haar frames, low-rank ground truths and block
//! treatment masks.
//!
//! Documentation uses 1-based row/column indices to match the usual panel
//! notation; storage is 0-based, so "row `l+1`" is `row(l)` in code.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the row and column spaces of a ground truth relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `V̄ = Ū` and unit singular values: the adversarial alignment that
    /// saturates the product bound of the certificate.
    WorstCase,
    /// Independent Haar row and column spaces.
    Independent,
}

/// Singular value profile of a generated ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSpec {
    UnitOnes,
    /// i.i.d. uniform on `[0.5, 1.5]`.
    RandomPositive,
}

fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Orthonormalize the columns of a tall matrix with Householder QR and flip
/// each column by the sign of the matching diagonal entry of `R`, which pins
/// the factorization down uniquely.
fn sign_fixed_q(a: DMatrix<f64>) -> DMatrix<f64> {
    let d = a.ncols();
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn haar_frame<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> DMatrix<f64> {
    if d == 0 {
        return DMatrix::zeros(n, 0);
    }
    sign_fixed_q(gaussian(n, d, rng))
}

/// Draw an `n × d` matrix with orthonormal columns from the Haar measure on
/// the Stiefel manifold.
pub fn sample_haar_basis<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if d < 1 || d > n {
        return Err(Error::param(format!(
            "Haar frame needs 1 <= d <= n, got n={n}, d={d}"
        )));
    }
    Ok(haar_frame(n, d, rng))
}

/// Complete an orthonormal `n × d` frame to a full orthogonal matrix by
/// orthonormalizing the residual of a Gaussian block; returns the `n × (n−d)`
/// complement.
pub fn complete_basis<R: Rng + ?Sized>(q: &DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
    let (n, d) = q.shape();
    if d == n {
        return DMatrix::zeros(n, 0);
    }
    if d == 0 {
        return haar_frame(n, n, rng);
    }
    let mut g = gaussian(n, n - d, rng);
    // Two projection passes keep the complement orthogonal to working precision.
    for _ in 0..2 {
        let proj = q * (q.transpose() * &g);
        g -= proj;
    }
    let mut c = sign_fixed_q(g);
    let proj = q * (q.transpose() * &c);
    c -= proj;
    sign_fixed_q(c)
}

/// An `n × n` observation pattern. Block masks (`l` set) observe entry
/// `(i, j)` iff `min(i, j) ≤ l` in 1-based indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskMatrix {
    n: usize,
    l: Option<usize>,
    entries: DMatrix<f64>,
    m: usize,
}

impl MaskMatrix {
    /// Wrap an arbitrary square 0/1 matrix. No block structure is assumed.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::param(format!(
                "mask must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::param("mask entries must be 0 or 1"));
        }
        let m = entries.iter().filter(|&&v| v == 1.0).count();
        Ok(MaskMatrix {
            n: entries.nrows(),
            l: None,
            entries,
            m,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Treatment-time index of a block mask, `None` for arbitrary masks.
    pub fn l(&self) -> Option<usize> {
        self.l
    }

    /// Number of observed entries.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.entries[(i, j)] == 1.0
    }

    /// The column selector `I^(l) = [0_{l×(n−l)}; I_{n−l}]` onto the hidden
    /// rows `l+1..n`. Only defined for block masks.
    pub fn hidden_selector(&self) -> Option<DMatrix<f64>> {
        let l = self.l?;
        let n = self.n;
        Some(DMatrix::from_fn(n, n - l, |i, j| {
            if i >= l && i - l == j {
                1.0
            } else {
                0.0
            }
        }))
    }

    /// Overwrite the observed entries of `x` with those of `y`, leaving the
    /// hidden entries untouched. This is the exact projection onto
    /// `{X : M∘X = M∘Y}`.
    pub fn project_onto(&self, x: &mut DMatrix<f64>, y: &DMatrix<f64>) {
        for ((xv, &yv), &mv) in x.iter_mut().zip(y.iter()).zip(self.entries.iter()) {
            if mv == 1.0 {
                *xv = yv;
            }
        }
    }
}

/// Block causal-inference mask: everyone is untreated up to time `l`, and
/// the trailing `(n−l) × (n−l)` block is hidden.
pub fn make_block_mask(n: usize, l: usize) -> Result<MaskMatrix> {
    if n == 0 {
        return Err(Error::param("mask side n must be positive"));
    }
    if l > n {
        return Err(Error::param(format!("block index l={l} exceeds n={n}")));
    }
    let entries = DMatrix::from_fn(n, n, |i, j| if i.min(j) < l { 1.0 } else { 0.0 });
    Ok(MaskMatrix {
        n,
        l: Some(l),
        entries,
        m: n * n - (n - l) * (n - l),
    })
}

/// Entrywise product `M ∘ X`.
pub fn apply_mask(mask: &MaskMatrix, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.shape() != (mask.n, mask.n) {
        return Err(Error::param(format!(
            "mask is {n}x{n} but matrix is {}x{}",
            x.nrows(),
            x.ncols(),
            n = mask.n
        )));
    }
    Ok(mask.entries.component_mul(x))
}

/// Ground truth `X_sol = Ū diag(σ) V̄ᵀ` together with the orthonormal
/// complements of its column and row spaces.
#[derive(Debug, Clone)]
pub struct LowRankInstance {
    pub n: usize,
    pub k: usize,
    pub ubar: DMatrix<f64>,
    pub vbar: DMatrix<f64>,
    pub uperp: DMatrix<f64>,
    pub vperp: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub x_sol: DMatrix<f64>,
    pub mode: Mode,
}

pub fn make_lowrank<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    mode: Mode,
    sigma_spec: SigmaSpec,
    rng: &mut R,
) -> Result<LowRankInstance> {
    if n == 0 {
        return Err(Error::param("matrix side n must be positive"));
    }
    if k > n {
        return Err(Error::param(format!("rank k={k} exceeds n={n}")));
    }
    let (ubar, uperp, vbar, vperp, sigma) = match mode {
        Mode::WorstCase => {
            if sigma_spec != SigmaSpec::UnitOnes {
                return Err(Error::param(
                    "worst-case instances carry unit singular values",
                ));
            }
            let ubar = haar_frame(n, k, rng);
            let uperp = complete_basis(&ubar, rng);
            let sigma = DVector::from_element(k, 1.0);
            (ubar.clone(), uperp.clone(), ubar, uperp, sigma)
        }
        Mode::Independent => {
            let ubar = haar_frame(n, k, rng);
            let vbar = haar_frame(n, k, rng);
            let uperp = complete_basis(&ubar, rng);
            let vperp = complete_basis(&vbar, rng);
            let sigma = match sigma_spec {
                SigmaSpec::UnitOnes => DVector::from_element(k, 1.0),
                SigmaSpec::RandomPositive => {
                    let dist = Uniform::new_inclusive(0.5, 1.5).expect("valid range");
                    DVector::from_fn(k, |_, _| dist.sample(rng))
                }
            };
            (ubar, uperp, vbar, vperp, sigma)
        }
    };
    let x_sol = if k == 0 {
        DMatrix::zeros(n, n)
    } else {
        &ubar * DMatrix::from_diagonal(&sigma) * vbar.transpose()
    };
    Ok(LowRankInstance {
        n,
        k,
        ubar,
        vbar,
        uperp,
        vperp,
        sigma,
        x_sol,
        mode,
    })
}
