//! Experiment runner: Monte Carlo phase-transition grids, finite-n spectra
//! against the closed forms, single-instance checks, and file output.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equivalence::{check_equivalence, CertificateReport};
use crate::error::{Error, Result};
use crate::freeprob::{
    density_d, density_dtilde, density_q, lambda_max_q_theory, Density, Law, SpectralParams,
};
use crate::linalg::{sym_eigenvalues, tail_rows};
use crate::phase::{self, PTPoint};
use crate::randmat::{
    apply_mask, make_block_mask, make_lowrank, sample_haar_basis, Mode, SigmaSpec,
};
use crate::solver::{complete_nuclear, SolveOptions, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PtSimulate,
    Spectrum,
    CheckInstance,
    PtCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything needed to reproduce one run. Fields not used by a given
/// `kind` are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    pub eta_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    pub out_path: PathBuf,
    pub solver_opts: SolveOptions,
    /// Histogram bins for `Spectrum`.
    pub bins: usize,
    /// Which matrix `Spectrum` samples.
    pub which: Law,
    /// Explicit sizes for `CheckInstance`; otherwise rounded from the first
    /// grid entries.
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub format: OutputFormat,
    pub plot_script: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::PtSimulate,
            n: 80,
            eta_grid: vec![0.8],
            beta_grid: vec![0.025, 0.05, 0.1, 0.15, 0.2],
            trials: 20,
            seed: 0,
            mode: Mode::WorstCase,
            out_path: PathBuf::from("out.csv"),
            solver_opts: SolveOptions::default(),
            bins: 100,
            which: Law::Dtilde,
            k: None,
            l: None,
            format: OutputFormat::Csv,
            plot_script: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Config {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        self.solver_opts.validate()?;
        let sweep = matches!(
            self.kind,
            ExperimentKind::PtSimulate | ExperimentKind::PtCurve
        );
        if sweep && self.eta_grid.is_empty() {
            return Err(Error::param("eta grid is empty"));
        }
        if self.kind == ExperimentKind::PtSimulate && self.beta_grid.is_empty() {
            return Err(Error::param("beta grid is empty"));
        }
        if let Some(e) = self.eta_grid.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::param(format!("eta must lie in (0,1), got {e}")));
        }
        if let Some(b) = self.beta_grid.iter().find(|b| !(**b >= 0.0 && **b < 1.0)) {
            return Err(Error::param(format!("beta must lie in [0,1), got {b}")));
        }
        if self.kind == ExperimentKind::Spectrum && self.bins == 0 {
            return Err(Error::param("bins must be positive"));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one trial; depends only on its coordinates, never on
/// scheduling order.
pub fn trial_seed(master: u64, eta_idx: usize, beta_idx: usize, trial_idx: usize) -> u64 {
    let mut h = mix64(master);
    for v in [eta_idx, beta_idx, trial_idx] {
        h = mix64(h ^ v as u64);
    }
    h
}

/// `(k, l) = (round(βn), round(ηn))` with `k ≤ l`.
pub fn discretize(beta: f64, eta: f64, n: usize) -> (usize, usize) {
    let l = ((eta * n as f64).round() as usize).min(n);
    let k = ((beta * n as f64).round() as usize).min(l);
    (k, l)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PTRow {
    pub eta: f64,
    pub beta: f64,
    pub k: usize,
    pub l: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_rmse_rel: f64,
    pub mean_lambda_max_product: f64,
    /// Trials whose certificate verdict matched the solver outcome.
    pub agreements: usize,
    /// Whether the cell sits at least `0.2·β_wc(η)` away from the curve.
    pub off_boundary: bool,
}

pub const PT_GRID_HEADER: &str =
    "eta,beta,k,l,trials,successes,success_rate,mean_rmse_rel,mean_lambda_max_product";

impl PTRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.eta,
            self.beta,
            self.k,
            self.l,
            self.trials,
            self.successes,
            self.success_rate,
            self.mean_rmse_rel,
            self.mean_lambda_max_product
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PTGridResult {
    pub n: usize,
    pub mode: Mode,
    pub seed: u64,
    pub rows: Vec<PTRow>,
}

impl PTGridResult {
    /// `(agreeing trials, total trials)` over off-boundary cells.
    pub fn off_boundary_agreement(&self) -> (usize, usize) {
        self.rows
            .iter()
            .filter(|r| r.off_boundary)
            .fold((0, 0), |(a, t), r| (a + r.agreements, t + r.trials))
    }
}

struct TrialOutcome {
    success: bool,
    rmse_rel: f64,
    lambda_max_product: f64,
    agree: bool,
}

fn run_trial(
    n: usize,
    k: usize,
    l: usize,
    mode: Mode,
    opts: &SolveOptions,
    seed: u64,
) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = make_lowrank(n, k, mode, SigmaSpec::UnitOnes, &mut rng)?;
    let mask = make_block_mask(n, l)?;
    let y = apply_mask(&mask, &inst.x_sol)?;
    let solve = complete_nuclear(&y, &mask, opts, Some(&inst))?;
    let cert = check_equivalence(&inst, &mask)?;
    let success = solve.success.unwrap_or(false);
    Ok(TrialOutcome {
        success,
        rmse_rel: solve.rmse_rel.unwrap_or(f64::NAN),
        lambda_max_product: cert.lambda_max_product,
        agree: success == cert.equivalent,
    })
}

pub fn run_pt_simulation(cfg: &ExperimentConfig) -> Result<PTGridResult> {
    run_pt_simulation_with(cfg, |_| Ok(()))
}

/// [`run_pt_simulation`] that hands each finished cell to `on_row` before
/// starting the next, so callers can persist partial results. An error from
/// `on_row` aborts the run.
pub fn run_pt_simulation_with<F>(cfg: &ExperimentConfig, mut on_row: F) -> Result<PTGridResult>
where
    F: FnMut(&PTRow) -> Result<()>,
{
    if cfg.kind != ExperimentKind::PtSimulate {
        return Err(Error::param("config kind is not pt_simulate"));
    }
    cfg.validate()?;
    let n = cfg.n;
    let mut rows = Vec::with_capacity(cfg.eta_grid.len() * cfg.beta_grid.len());
    for (ei, &eta) in cfg.eta_grid.iter().enumerate() {
        let b_wc = phase::beta_wc(eta)?;
        for (bi, &beta) in cfg.beta_grid.iter().enumerate() {
            let (k, l) = discretize(beta, eta, n);
            let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    run_trial(
                        n,
                        k,
                        l,
                        cfg.mode,
                        &cfg.solver_opts,
                        trial_seed(cfg.seed, ei, bi, t),
                    )
                })
                .collect::<Result<_>>()?;
            let trials = outcomes.len();
            let successes = outcomes.iter().filter(|o| o.success).count();
            let row = PTRow {
                eta,
                beta,
                k,
                l,
                trials,
                successes,
                success_rate: successes as f64 / trials as f64,
                mean_rmse_rel: outcomes.iter().map(|o| o.rmse_rel).sum::<f64>() / trials as f64,
                mean_lambda_max_product: outcomes.iter().map(|o| o.lambda_max_product).sum::<f64>()
                    / trials as f64,
                agreements: outcomes.iter().filter(|o| o.agree).count(),
                off_boundary: (beta - b_wc).abs() >= 0.2 * b_wc,
            };
            on_row(&row)?;
            rows.push(row);
        }
    }
    Ok(PTGridResult {
        n,
        mode: cfg.mode,
        seed: cfg.seed,
        rows,
    })
}

/// Eigenvalues closer than this to an atom location count toward the atom.
pub const ATOM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomRow {
    pub location: f64,
    pub empirical_mass: f64,
    pub theory_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub lo: f64,
    pub hi: f64,
    pub empirical_mass: f64,
    pub theory_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub law: Law,
    pub beta: f64,
    pub eta: f64,
    pub n: usize,
    pub seed: u64,
    /// Dimension of the sampled matrix.
    pub dim: usize,
    pub atoms: Vec<AtomRow>,
    pub bins: Vec<BinRow>,
    /// Empirical mass that is neither an atom nor inside the histogram range.
    pub overflow: f64,
    pub total_variation: f64,
    pub lambda_max_empirical: f64,
    pub lambda_max_theory: f64,
}

pub const SPECTRUM_ATOM_HEADER: &str = "location,empirical_mass,theory_mass";
pub const SPECTRUM_BIN_HEADER: &str = "bin_lo,bin_hi,empirical_mass,theory_mass";

/// Eigenvalues of the requested matrix for one Haar draw.
///
/// `D̃ = 𝒱𝒰` has `l` zeros plus the spectrum of `I − BBᵀ`, `B = U_D⊥ᵀV̄`,
/// with `U_D⊥` an independent Haar frame of dimension `n − l`. `D` is
/// `I − V̄_hV̄_hᵀ` on the hidden rows, and `Q` maps each eigenvalue of `D`
/// through `x ↦ 1/x − 1`.
pub fn sample_spectrum(
    law: Law,
    n: usize,
    k: usize,
    l: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if k == 0 || k > n || l >= n {
        return Err(Error::param(format!(
            "need 1 <= k <= n and l < n, got n={n}, k={k}, l={l}"
        )));
    }
    let vbar = sample_haar_basis(n, k, rng)?;
    match law {
        Law::Dtilde => {
            let ud = sample_haar_basis(n, n - l, rng)?;
            let b = ud.transpose() * &vbar;
            let mut ev = compress_eigs(&b);
            ev.extend(std::iter::repeat_n(0.0, l));
            ev.sort_by(f64::total_cmp);
            Ok(ev)
        }
        Law::D => Ok(compress_eigs(&tail_rows(&vbar, l))),
        Law::Q => {
            let d = compress_eigs(&tail_rows(&vbar, l));
            if d.first().is_some_and(|&x| x <= 1e-12) {
                return Err(Error::Singular(
                    "D has a zero eigenvalue, Q is undefined".into(),
                ));
            }
            let mut q: Vec<f64> = d.iter().map(|&x| 1.0 / x - 1.0).collect();
            q.sort_by(f64::total_cmp);
            Ok(q)
        }
    }
}

/// Spectrum of `I − BBᵀ`, clipped to `[0, 1]`.
fn compress_eigs(b: &DMatrix<f64>) -> Vec<f64> {
    let m = b.nrows();
    let g = DMatrix::<f64>::identity(m, m) - b * b.transpose();
    sym_eigenvalues(&g)
        .into_iter()
        .map(|x| x.clamp(0.0, 1.0))
        .collect()
}

fn theory_density(law: Law, params: SpectralParams) -> Result<Density> {
    match law {
        Law::Dtilde => Ok(density_dtilde(params)),
        Law::D => Ok(density_d(params)),
        Law::Q => density_q(params),
    }
}

/// Bin the eigenvalues of one draw and compare with the closed form.
pub fn run_spectrum_experiment(
    law: Law,
    beta: f64,
    eta: f64,
    n: usize,
    bins: usize,
    seed: u64,
) -> Result<SpectrumResult> {
    if n < 100 {
        return Err(Error::param(format!(
            "spectrum experiments need n >= 100, got {n}"
        )));
    }
    if bins == 0 {
        return Err(Error::param("bins must be positive"));
    }
    let params = SpectralParams::new(beta, eta)?;
    let density = theory_density(law, params)?;
    let (k, l) = discretize(beta, eta, n);
    if k == 0 {
        return Err(Error::param(format!("beta={beta} rounds to k=0 at n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ev = sample_spectrum(law, n, k, l, &mut rng)?;
    let dim = ev.len();
    let unit = 1.0 / dim as f64;

    let mut atom_counts = vec![0usize; density.atoms.len()];
    let mut rest = Vec::with_capacity(dim);
    for &x in &ev {
        match density
            .atoms
            .iter()
            .position(|&(loc, _)| (x - loc).abs() <= ATOM_TOL)
        {
            Some(i) => atom_counts[i] += 1,
            None => rest.push(x),
        }
    }
    let atoms: Vec<AtomRow> = density
        .atoms
        .iter()
        .zip(&atom_counts)
        .map(|(&(location, theory_mass), &c)| AtomRow {
            location,
            empirical_mass: c as f64 * unit,
            theory_mass,
        })
        .collect();

    let (a, b) = density.support;
    let pad = 0.05 * (b - a);
    let (lo, hi) = (a - pad, b + pad);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut outside = 0usize;
    for &x in &rest {
        if x < lo || x > hi {
            outside += 1;
        } else {
            counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
        }
    }
    let bin_rows: Vec<BinRow> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let blo = lo + i as f64 * width;
            let bhi = if i + 1 == bins { hi } else { blo + width };
            BinRow {
                lo: blo,
                hi: bhi,
                empirical_mass: c as f64 * unit,
                theory_mass: density.bulk_mass_between(blo, bhi),
            }
        })
        .collect();
    let overflow = outside as f64 * unit;
    let total_variation = 0.5
        * (atoms
            .iter()
            .map(|r| (r.empirical_mass - r.theory_mass).abs())
            .sum::<f64>()
            + bin_rows
                .iter()
                .map(|r| (r.empirical_mass - r.theory_mass).abs())
                .sum::<f64>()
            + overflow);

    let lambda_max_theory = match law {
        Law::Q => lambda_max_q_theory(params)?,
        _ => density
            .atoms
            .iter()
            .filter(|&&(_, m)| m > 0.0)
            .map(|&(x, _)| x)
            .fold(b, f64::max),
    };
    Ok(SpectrumResult {
        law,
        beta,
        eta,
        n,
        seed,
        dim,
        atoms,
        bins: bin_rows,
        overflow,
        total_variation,
        lambda_max_empirical: ev.last().copied().unwrap_or(0.0),
        lambda_max_theory,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub mode: Mode,
    pub seed: u64,
    pub certificate: CertificateReport,
    pub solve: SolveReport,
    /// Certificate verdict equals solver outcome.
    pub agreement: bool,
}

/// Certificate and solver on one seeded instance.
pub fn run_check_instance(cfg: &ExperimentConfig) -> Result<CheckReport> {
    if cfg.kind != ExperimentKind::CheckInstance {
        return Err(Error::param("config kind is not check_instance"));
    }
    cfg.validate()?;
    let n = cfg.n;
    let (k, l) = match (cfg.k, cfg.l) {
        (Some(k), Some(l)) => (k, l),
        _ => {
            let beta = cfg
                .beta_grid
                .first()
                .copied()
                .ok_or_else(|| Error::param("need k or a beta value"))?;
            let eta = cfg
                .eta_grid
                .first()
                .copied()
                .ok_or_else(|| Error::param("need l or an eta value"))?;
            let (dk, dl) = discretize(beta, eta, n);
            (cfg.k.unwrap_or(dk), cfg.l.unwrap_or(dl))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let inst = make_lowrank(n, k, cfg.mode, SigmaSpec::UnitOnes, &mut rng)?;
    let mask = make_block_mask(n, l)?;
    let certificate = check_equivalence(&inst, &mask)?;
    let y = apply_mask(&mask, &inst.x_sol)?;
    let solve = complete_nuclear(&y, &mask, &cfg.solver_opts, Some(&inst))?;
    let agreement = solve.success == Some(certificate.equivalent);
    Ok(CheckReport {
        n,
        k,
        l,
        mode: cfg.mode,
        seed: cfg.seed,
        certificate,
        solve,
        agreement,
    })
}

pub enum ExperimentOutput {
    PtCurve(Vec<PTPoint>),
    PtGrid(PTGridResult),
    Spectrum(SpectrumResult),
    Check(CheckReport),
}

impl ExperimentOutput {
    pub fn to_csv(&self) -> String {
        match self {
            ExperimentOutput::PtCurve(pts) => phase::pt_curve_csv(pts),
            ExperimentOutput::PtGrid(g) => {
                let mut out = String::from(PT_GRID_HEADER);
                out.push('\n');
                for r in &g.rows {
                    out.push_str(&r.csv_line());
                    out.push('\n');
                }
                out
            }
            ExperimentOutput::Spectrum(s) => {
                let mut out = String::new();
                let _ = writeln!(out, "# atoms\n{SPECTRUM_ATOM_HEADER}");
                for a in &s.atoms {
                    let _ = writeln!(out, "{},{},{}", a.location, a.empirical_mass, a.theory_mass);
                }
                let _ = writeln!(out, "# bins\n{SPECTRUM_BIN_HEADER}");
                for b in &s.bins {
                    let _ = writeln!(out, "{},{},{},{}", b.lo, b.hi, b.empirical_mass, b.theory_mass);
                }
                out
            }
            ExperimentOutput::Check(c) => format!(
                "n,k,l,seed,equivalent,lambda_max_product,certificate_residual,success,rmse_rel,iterations,agreement\n{},{},{},{},{},{},{},{},{},{},{}\n",
                c.n,
                c.k,
                c.l,
                c.seed,
                c.certificate.equivalent,
                c.certificate.lambda_max_product,
                c.certificate.certificate_residual,
                c.solve.success.unwrap_or(false),
                c.solve.rmse_rel.unwrap_or(f64::NAN),
                c.solve.iterations,
                c.agreement
            ),
        }
    }

    pub fn to_json(&self) -> String {
        let v = match self {
            ExperimentOutput::PtCurve(p) => serde_json::to_string_pretty(p),
            ExperimentOutput::PtGrid(g) => serde_json::to_string_pretty(g),
            ExperimentOutput::Spectrum(s) => serde_json::to_string_pretty(s),
            ExperimentOutput::Check(c) => serde_json::to_string_pretty(c),
        };
        let mut s = v.expect("result types serialize infallibly");
        s.push('\n');
        s
    }

    fn plot_body(&self, csv_name: &str) -> String {
        let load = format!(
            "import csv, os, sys\nimport matplotlib.pyplot as plt\n\nhere = os.path.dirname(os.path.abspath(__file__))\npath = os.path.join(here, {csv_name:?})\n"
        );
        let body = match self {
            ExperimentOutput::PtCurve(_) => "rows = list(csv.DictReader(open(path)))\n\
plt.plot([float(r['eta']) for r in rows], [float(r['beta_wc']) for r in rows])\n\
plt.xlabel('eta'); plt.ylabel('beta_wc')\n",
            ExperimentOutput::PtGrid(_) => "rows = list(csv.DictReader(open(path)))\n\
for eta in sorted({r['eta'] for r in rows}, key=float):\n\
    sel = [r for r in rows if r['eta'] == eta]\n\
    plt.plot([float(r['beta']) for r in sel], [float(r['success_rate']) for r in sel], 'o-', label='eta=' + eta)\n\
plt.xlabel('beta'); plt.ylabel('success rate'); plt.legend()\n",
            ExperimentOutput::Spectrum(_) => "lines = open(path).read().splitlines()\n\
start = lines.index('# bins') + 2\n\
rows = [list(map(float, l.split(','))) for l in lines[start:] if l]\n\
mid = [(r[0] + r[1]) / 2 for r in rows]\n\
w = [r[1] - r[0] for r in rows]\n\
plt.bar(mid, [r[2] / d for r, d in zip(rows, w)], width=w, alpha=0.5, label='empirical')\n\
plt.plot(mid, [r[3] / d for r, d in zip(rows, w)], 'r-', label='closed form')\n\
plt.legend()\n",
            ExperimentOutput::Check(_) => "print(open(path).read())\nsys.exit(0)\n",
        };
        format!("{load}{body}plt.savefig(os.path.splitext(path)[0] + '.png', dpi=120)\n")
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Path of the companion plot script for `out_path`.
pub fn plot_script_path(out_path: &Path) -> PathBuf {
    let stem = out_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("out");
    out_path.with_file_name(format!("{stem}_plot.py"))
}

/// Write `result` to `out_path`, plus a plot script next to it when asked
/// (CSV only). Returns the paths written.
pub fn emit_outputs(
    result: &ExperimentOutput,
    out_path: &Path,
    format: OutputFormat,
    plot_script: bool,
) -> Result<Vec<PathBuf>> {
    let body = match format {
        OutputFormat::Csv => result.to_csv(),
        OutputFormat::Json => result.to_json(),
    };
    write_file(out_path, &body)?;
    let mut written = vec![out_path.to_path_buf()];
    if plot_script && format == OutputFormat::Csv {
        written.push(write_plot_script(result, out_path)?);
    }
    Ok(written)
}

/// Write the plot script for a CSV already at `csv_path`.
pub fn write_plot_script(result: &ExperimentOutput, csv_path: &Path) -> Result<PathBuf> {
    let name = csv_path
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("out.csv");
    let script = plot_script_path(csv_path);
    write_file(&script, &result.plot_body(name))?;
    Ok(script)
}

/// Streams PT rows to a CSV file, flushing after every cell.
pub struct PtCsvWriter {
    path: PathBuf,
    inner: BufWriter<File>,
}

impl PtCsvWriter {
    pub fn create(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = PtCsvWriter {
            path: path.to_path_buf(),
            inner: BufWriter::new(file),
        };
        w.line(PT_GRID_HEADER)?;
        Ok(w)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.inner, "{s}")
            .and_then(|_| self.inner.flush())
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn row(&mut self, r: &PTRow) -> Result<()> {
        self.line(&r.csv_line())
    }

    /// Best-effort trailer recording why a run stopped early.
    pub fn abort(&mut self, err: &Error) {
        let _ = self.line(&format!("# aborted: {err}"));
    }
}

/// `x` as CSV, one matrix row per line.
pub fn matrix_csv(x: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..x.nrows() {
        let line: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
