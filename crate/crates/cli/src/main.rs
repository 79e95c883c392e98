//! `b92` command-line front end.

use std::f64::consts::{FRAC_PI_3, PI};
use std::fs;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use b92_core::harness::{
    control_curves, emit_outputs, load_config_with_base, parse_angle, run_scenario, write_curves_csv,
    HarnessError, Preset,
};
use b92_core::security::{gain_threshold, BuiltinBound, OPTIMIZED_BOUND_THRESHOLD_RAD};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "b92", version, about = "B92 phase-drift compensation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a seeded feedback simulation and write kicks.csv and summary.json.
    Run {
        /// Configuration file, applied on top of the preset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Base scenario: fig3-top, fig3-bottom or zero-noise.
        #[arg(long, default_value = "fig3-top")]
        preset: Preset,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicas: Option<u32>,
        /// Output directory (overrides out_dir from the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a decimated events.csv per replica.
        #[arg(long)]
        events_csv: bool,
    },
    /// Largest misalignment with positive secure gain.
    Threshold {
        /// Characteristic angle, e.g. 1.047 or pi/3.
        #[arg(long, default_value = "pi/3", value_parser = angle)]
        theta: f64,
        /// Phase-error bound: naive or worst-case.
        #[arg(long, default_value = "naive")]
        bound: BuiltinBound,
    },
    /// Tabulate R_0 and R_1 over ε ∈ [−π, π] as CSV.
    Curves {
        /// Characteristic angles (repeatable); defaults to 5π/18, π/3, 4π/9.
        #[arg(long, value_parser = angle)]
        theta: Vec<f64>,
        #[arg(long, default_value_t = 721)]
        points: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s).ok_or_else(|| format!("'{s}' is not an angle"))
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            preset,
            seed,
            replicas,
            out,
            events_csv,
        } => {
            let text = match &config {
                Some(path) => fs::read_to_string(path).map_err(|e| HarnessError::Io {
                    path: path.clone(),
                    source: e,
                })?,
                None => String::new(),
            };
            let mut cfg = load_config_with_base(&text, preset.config())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = replicas {
                cfg.replicas = r;
            }
            if events_csv {
                cfg.output.events_csv = true;
            }
            if let Some(o) = out {
                cfg.output.out_dir = Some(o);
            }
            cfg.validate().map_err(HarnessError::Validation)?;
            let out_dir = cfg.output.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));

            let run = run_scenario(&cfg)?;
            let paths = emit_outputs(&run, &out_dir)?;
            let s = &run.summary;
            println!(
                "mode={} window={} replicas={} seed={}",
                cfg.feedback.mode.as_str(),
                cfg.feedback.window,
                cfg.replicas,
                cfg.seed
            );
            println!("residual mean = {:.4} rad, std = {:.4} rad", s.residual_mean, s.residual_std);
            println!(
                "kicks = {}, abstained = {}, excluded = {}",
                s.kick_count, s.abstain_count, s.excluded_count
            );
            println!("summary: {}", paths.summary.display());
            Ok(())
        }
        Command::Threshold { theta, bound } => {
            match gain_threshold(theta, &bound) {
                Ok(t) if t >= PI => println!("gain positive for all |eps| < pi"),
                Ok(t) => println!("threshold = {t:.5} rad"),
                Err(b92_core::Error::NoPositiveRegion(g)) => println!("no positive-gain region (G(0) = {g})"),
                Err(e) => return Err(HarnessError::Validation(e)),
            }
            println!("reference (optimized phase-error bound, theta = pi/3): {OPTIMIZED_BOUND_THRESHOLD_RAD} rad");
            Ok(())
        }
        Command::Curves { theta, points, out } => {
            let thetas = if theta.is_empty() {
                vec![5.0 * PI / 18.0, FRAC_PI_3, 4.0 * PI / 9.0]
            } else {
                theta
            };
            let rows = control_curves(&thetas, points).map_err(HarnessError::Validation)?;
            match out {
                Some(path) => {
                    let f = fs::File::create(&path).map_err(|e| HarnessError::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    write_curves_csv(&rows, BufWriter::new(f)).map_err(|e| HarnessError::Io { path, source: e })
                }
                None => write_curves_csv(&rows, io::stdout().lock()).map_err(|e| HarnessError::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                }),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
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
