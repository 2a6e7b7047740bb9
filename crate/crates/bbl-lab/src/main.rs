use anyhow::Context;
use bbl_lab::emit::{emit, Format};
use bbl_lab::generate::{random_suite, SuiteParams};
use bbl_lab::report::Outcome;
use bbl_lab::runner::run_suite;
use bbl_lab::scenario::{parse_suite, Kind};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "bbl-lab", version, about = "Verifies convexity inequalities on scenario suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a suite file and emit reports.
    Verify {
        /// Suite JSON: {"schema": 1, "scenarios": [...]} or one bare
        /// scenario object.
        scenario: PathBuf,
        /// Output directory for reports.{json,csv,svg}.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Comma-separated subset of json, csv, svg.
        #[arg(long, default_value = "json,csv,svg", value_delimiter = ',')]
        formats: Vec<Format>,
        /// Worker threads; scenarios always collect in input order.
        #[arg(long, env = "BBL_LAB_JOBS")]
        jobs: Option<usize>,
    },
    /// Generate a seeded suite of one kind as JSON (stdout or --out).
    RandomSuite {
        #[arg(long)]
        kind: Kind,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        mesh_h: Option<f64>,
        #[arg(long)]
        quad_tol: Option<f64>,
        #[arg(long)]
        angle_count: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the explicit theorem constants for the given shape data.
    Constants {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        lambda: f64,
        /// Body volumes; default unit.
        #[arg(long, default_value_t = 1.0)]
        vol0: f64,
        #[arg(long, default_value_t = 1.0)]
        vol1: f64,
        /// Body diameters; default a plausible unit-volume body.
        #[arg(long, default_value_t = 1.5)]
        diam0: f64,
        #[arg(long, default_value_t = 1.5)]
        diam1: f64,
        /// Function integrals; default unit.
        #[arg(long, default_value_t = 1.0)]
        i0: f64,
        #[arg(long, default_value_t = 1.0)]
        i1: f64,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Verify {
            scenario,
            out,
            formats,
            jobs,
        } => {
            let scenarios = parse_suite(&scenario)
                .with_context(|| format!("loading {}", scenario.display()))?;
            let reports = run_suite(&scenarios, jobs);
            let paths = emit(&reports, &formats, &out)?;
            let mut all_ok = true;
            for r in &reports {
                let verdict = match (&r.outcome, r.all_ok()) {
                    (Outcome::Error(msg), _) => format!("ERROR {msg}"),
                    (_, true) => "PASS".to_string(),
                    (_, false) => "FAIL".to_string(),
                };
                all_ok &= r.all_ok();
                println!("{:>5} ms  {:<12} {:<28} {verdict}", r.wall_time_ms, r.kind, r.name);
            }
            for p in paths {
                println!("wrote {}", p.display());
            }
            if !all_ok {
                std::process::exit(1);
            }
            Ok(())
        }
        Command::RandomSuite {
            kind,
            count,
            seed,
            p,
            lambda,
            mesh_h,
            quad_tol,
            angle_count,
            out,
        } => {
            let defaults = SuiteParams::default();
            let params = SuiteParams {
                p: p.unwrap_or(defaults.p),
                lambda: lambda.unwrap_or(defaults.lambda),
                mesh_h: mesh_h.unwrap_or(defaults.mesh_h),
                quad_tol: quad_tol.unwrap_or(defaults.quad_tol),
                angle_count: angle_count.unwrap_or(defaults.angle_count),
            };
            let suite = random_suite(kind, count, seed, &params)?;
            let mut text = serde_json::to_string_pretty(&suite)?;
            text.push('\n');
            match out {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Constants {
            n,
            p,
            lambda,
            vol0,
            vol1,
            diam0,
            diam1,
            i0,
            i1,
        } => {
            let bundle =
                bbl_core::means::bbl_constants(n, p, lambda, vol0, vol1, diam0, diam1, i0, i1)?;
            println!("{}", serde_json::to_string_pretty(&bundle)?);
            Ok(())
        }
    }
}
