use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ewi::config::{parse_list, ExperimentConfig};
use ewi::io::{export_report, report_text, write_snapshot};
use ewi::selftest::run_selftest;
use ewi::sweep::build_problem;
use ewi::{run_convergence, HarnessError, RustFft};
use ewi_core::analysis::lp_norm;
use ewi_core::integrator::run;

/// Filtered exponential wave integrator for Schrödinger equations with singular potentials.
#[derive(Parser)]
#[command(name = "ewi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single simulation at one step size.
    Run(Common),
    /// Sweep the step sizes, fit convergence orders and check the bands.
    Converge(Common),
    /// Run the property checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// Preset name (delta1d, smooth1d, power2d, power2d-full, power3d-l2, power3d-l2-full,
    /// power3d-l127, power3d-l127-full).
    #[arg(long)]
    preset: Option<String>,
    /// Config file; a `preset` key inside it or `--preset` seeds the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated step sizes (`2^-k` allowed); `run` uses the first.
    #[arg(long)]
    tau: Option<String>,
    /// Divide the points per dimension by this factor.
    #[arg(long)]
    scale: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), preset) => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                match preset {
                    Some(name) if !text.contains("preset") => ExperimentConfig::parse(&format!(
                        "[problem]\npreset = {name}\n{}",
                        strip_problem_header(&text)
                    ))?,
                    _ => ExperimentConfig::parse(&text)?,
                }
            }
            (None, Some(name)) => ExperimentConfig::preset(name)?,
            (None, None) => return Err(HarnessError::config("need --preset or --config")),
        };
        if let Some(list) = &self.tau {
            cfg.taus = parse_list(list)
                .ok_or_else(|| HarnessError::config("--tau expects a list of numbers"))?;
        }
        if let Some(f) = self.scale {
            cfg = cfg.scaled(f)?;
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Drops a leading `[problem]` header so preset injection keeps one section.
fn strip_problem_header(text: &str) -> String {
    let mut seen = false;
    text.lines()
        .filter(|l| {
            if !seen && l.trim() == "[problem]" {
                seen = true;
                return false;
            }
            true
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn single_run(cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    let backend = RustFft::new();
    let problem = build_problem(cfg, &backend)?;
    let tau = cfg.taus[0];
    let traj = run(&problem, tau, cfg.profile, &backend, &cfg.snapshots)?;
    println!(
        "{}: tau = {tau:e}, steps = {}, ||psi(T)||_L2 = {:.12e}, ||psi_0||_L2 = {:.12e}",
        cfg.name,
        traj.steps,
        lp_norm(&traj.final_field, 2.0)?,
        lp_norm(&problem.initial, 2.0)?
    );
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for (t, field) in &traj.snapshots {
            let path = dir.join(format!("psi_t{t}.bin"));
            write_snapshot(&path, field, *t)?;
            println!("wrote {}", path.display());
        }
        let path = dir.join("psi_final.bin");
        write_snapshot(&path, &traj.final_field, cfg.final_time)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn converge(cfg: &ExperimentConfig) -> Result<bool, HarnessError> {
    let report = run_convergence(cfg)?;
    print!("{}", report_text(&report));
    if let Some(dir) = &cfg.out_dir {
        for path in export_report(&report, dir)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Selftest { seed } => {
            let summary = run_selftest(seed);
            for c in &summary.checks {
                println!(
                    "{} {}: {:.3e} (threshold {:.3e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold
                );
            }
            println!(
                "selftest finished in {:.2} s",
                summary.elapsed.as_secs_f64()
            );
            Ok(summary.passed())
        }
        Command::Run(common) => common
            .resolve()
            .and_then(|cfg| single_run(&cfg))
            .map(|_| true),
        Command::Converge(common) => common.resolve().and_then(|cfg| converge(&cfg)),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
