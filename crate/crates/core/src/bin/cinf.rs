use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, Parser, Subcommand};

use cinf_core::freeprob::Law;
use cinf_core::harness::{
    emit_outputs, matrix_csv, run_check_instance, run_pt_simulation, run_pt_simulation_with,
    run_spectrum_experiment, write_plot_script, ExperimentConfig, ExperimentKind, ExperimentOutput,
    OutputFormat, PtCsvWriter,
};
use cinf_core::phase::{linspace, pt_curve};
use cinf_core::randmat::Mode;
use cinf_core::solver::SolveOptions;
use cinf_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "cinf",
    version,
    about = "Block-mask matrix completion experiments"
)]
struct Cli {
    /// Run the experiment described by a JSON ExperimentConfig instead of a subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Also write a matplotlib script next to a CSV output.
    #[arg(long)]
    plot_script: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Worst-case phase-transition curve beta_wc(eta).
    PtCurve {
        #[arg(long, default_value_t = 0.01)]
        eta_min: f64,
        #[arg(long, default_value_t = 0.99)]
        eta_max: f64,
        #[arg(long, default_value_t = 99)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo success rates over an (eta, beta) grid.
    PtSimulate {
        #[arg(long, default_value_t = 80)]
        n: usize,
        #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = [0.8])]
        eta: Vec<f64>,
        #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = [0.025, 0.05, 0.1, 0.15, 0.2])]
        beta_grid: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::WorstCase)]
        mode: Mode,
        #[arg(long, default_value_t = SolveOptions::default().max_iters)]
        max_iters: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Empirical spectrum of one draw against the closed form.
    Spectrum {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        #[arg(long, value_enum, default_value_t = Law::Dtilde)]
        which: Law,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Certificate and solver on a single instance.
    Check {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, value_enum, default_value_t = Mode::WorstCase)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the recovered matrix as CSV to this path.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match (cli.config, cli.command) {
        (Some(path), None) => run_config(&ExperimentConfig::from_json_file(&path)?),
        (Some(_), Some(_)) => Err(Error::Parameter(
            "--config cannot be combined with a subcommand".into(),
        )),
        (None, None) => Err(Error::Parameter("no subcommand given; see --help".into())),
        (None, Some(cmd)) => run_command(cmd),
    }
}

fn run_command(cmd: Command) -> Result<()> {
    let base = ExperimentConfig::default();
    let (cfg, dump) = match cmd {
        Command::PtCurve {
            eta_min,
            eta_max,
            points,
            output,
        } => {
            if points == 0 {
                return Err(Error::Parameter("points must be positive".into()));
            }
            let cfg = ExperimentConfig {
                kind: ExperimentKind::PtCurve,
                eta_grid: linspace(eta_min, eta_max, points),
                ..with_output(base, output, "pt_curve")
            };
            (cfg, None)
        }
        Command::PtSimulate {
            n,
            eta,
            beta_grid,
            trials,
            seed,
            mode,
            max_iters,
            output,
        } => {
            let cfg = ExperimentConfig {
                kind: ExperimentKind::PtSimulate,
                n,
                eta_grid: eta,
                beta_grid,
                trials,
                seed,
                mode,
                solver_opts: SolveOptions {
                    max_iters,
                    ..SolveOptions::default()
                },
                ..with_output(base, output, "pt_grid")
            };
            (cfg, None)
        }
        Command::Spectrum {
            beta,
            eta,
            n,
            bins,
            which,
            seed,
            output,
        } => {
            let cfg = ExperimentConfig {
                kind: ExperimentKind::Spectrum,
                n,
                eta_grid: vec![eta],
                beta_grid: vec![beta],
                bins,
                which,
                seed,
                ..with_output(base, output, "spectrum")
            };
            (cfg, None)
        }
        Command::Check {
            n,
            k,
            l,
            mode,
            seed,
            dump_matrix,
            output,
        } => {
            let to_stdout = output.out.is_none();
            let mut cfg = ExperimentConfig {
                kind: ExperimentKind::CheckInstance,
                n,
                k: Some(k),
                l: Some(l),
                mode,
                seed,
                ..with_output(base, output, "check")
            };
            if to_stdout {
                cfg.out_path = PathBuf::new();
            }
            (cfg, dump_matrix)
        }
    };
    run_config_with(&cfg, dump.as_deref())
}

fn with_output(base: ExperimentConfig, out: OutputArgs, stem: &str) -> ExperimentConfig {
    let ext = match out.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    ExperimentConfig {
        out_path: out
            .out
            .unwrap_or_else(|| PathBuf::from(format!("{stem}.{ext}"))),
        format: out.format,
        plot_script: out.plot_script,
        ..base
    }
}

fn run_config(cfg: &ExperimentConfig) -> Result<()> {
    run_config_with(cfg, None)
}

fn run_config_with(cfg: &ExperimentConfig, dump: Option<&Path>) -> Result<()> {
    cfg.validate()?;
    let output = match cfg.kind {
        ExperimentKind::PtCurve => ExperimentOutput::PtCurve(pt_curve(&cfg.eta_grid)?),
        ExperimentKind::PtSimulate => {
            let grid = if cfg.format == OutputFormat::Csv {
                let mut w = PtCsvWriter::create(&cfg.out_path)?;
                let res = run_pt_simulation_with(cfg, |row| {
                    eprintln!(
                        "eta={} beta={} k={} l={}: {}/{} recovered",
                        row.eta, row.beta, row.k, row.l, row.successes, row.trials
                    );
                    w.row(row)
                });
                let grid = res.inspect_err(|e| w.abort(e))?;
                let out = ExperimentOutput::PtGrid(grid);
                if cfg.plot_script {
                    write_plot_script(&out, &cfg.out_path)?;
                }
                report_agreement(&out);
                println!("wrote {}", cfg.out_path.display());
                return Ok(());
            } else {
                run_pt_simulation(cfg)?
            };
            ExperimentOutput::PtGrid(grid)
        }
        ExperimentKind::Spectrum => {
            let beta = single(&cfg.beta_grid, "beta")?;
            let eta = single(&cfg.eta_grid, "eta")?;
            let r = run_spectrum_experiment(cfg.which, beta, eta, cfg.n, cfg.bins, cfg.seed)?;
            eprintln!(
                "total variation {:.4}; lambda_max {:.6} (closed form {:.6})",
                r.total_variation, r.lambda_max_empirical, r.lambda_max_theory
            );
            ExperimentOutput::Spectrum(r)
        }
        ExperimentKind::CheckInstance => {
            let r = run_check_instance(cfg)?;
            if let Some(path) = dump {
                write_text(path, &matrix_csv(&r.solve.x_hat))?;
            }
            let out = ExperimentOutput::Check(r);
            if cfg.out_path.as_os_str().is_empty() {
                print!("{}", out.to_json());
                return Ok(());
            }
            out
        }
    };
    report_agreement(&output);
    for p in emit_outputs(&output, &cfg.out_path, cfg.format, cfg.plot_script)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn report_agreement(out: &ExperimentOutput) {
    if let ExperimentOutput::PtGrid(g) = out {
        let (agree, total) = g.off_boundary_agreement();
        if total > 0 {
            eprintln!("certificate/solver agreement off the curve: {agree}/{total}");
        }
    }
}

fn single(v: &[f64], name: &str) -> Result<f64> {
    match v {
        [x] => Ok(*x),
        _ => Err(Error::Parameter(format!(
            "spectrum needs exactly one {name} value"
        ))),
    }
}

fn write_text(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
