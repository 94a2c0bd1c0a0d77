//! Small dense helpers shared by the certificate, solver and harness code.

use nalgebra::{DMatrix, DVector};

/// Symmetrize in place: `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Eigenvalues of a symmetric matrix in ascending order. Empty input gives an empty vector.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s = a.clone();
    symmetrize(&mut s);
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Largest eigenvalue of a symmetric matrix; 0 over an empty spectrum.
pub fn lambda_max_sym(a: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(a).last().copied().unwrap_or(0.0)
}

/// Singular values in descending order. Empty input gives an empty vector.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Moore–Penrose pseudo-inverse with singular values below `rel_cutoff · σ_max` discarded.
///
/// Returns the pseudo-inverse together with a flag that is set when the cutoff
/// removed at least one singular value of the full-rank count `min(rows, cols)`.
pub fn pinv(a: &DMatrix<f64>, rel_cutoff: f64) -> (DMatrix<f64>, bool) {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return (DMatrix::zeros(c, r), false);
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    let cut = rel_cutoff * smax;
    let mut truncated = false;
    let inv: DVector<f64> = svd.singular_values.map(|s| {
        if s > cut && s > 0.0 {
            1.0 / s
        } else {
            truncated = true;
            0.0
        }
    });
    let pinv = vt.transpose() * DMatrix::from_diagonal(&inv) * u.transpose();
    (pinv, truncated)
}

/// Rows `from..nrows` of `a`, i.e. `(I^(l))ᵀ a` for the hidden-block selector.
pub fn tail_rows(a: &DMatrix<f64>, from: usize) -> DMatrix<f64> {
    let n = a.nrows();
    a.rows(from, n - from).into_owned()
}
