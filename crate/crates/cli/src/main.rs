use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;

use picmm_cli::config::{Distribution, KindArg, RunConfig, TileProfile};
use picmm_cli::io::{write_run_json, write_sweep_csv, write_sweep_json};
use picmm_cli::runner::{run, sweep, SweepAxis, SweepPoint};

/// Benchmark and verify tiled mass-matrix assembly against the naive
/// scatter-loop kernel on synthetic particle sets.
#[derive(Debug, Parser)]
#[command(name = "picmm", version, about)]
struct Cli {
    /// Cells per axis, e.g. `16,16,16` or `32x32` (1 to 3 axes).
    #[arg(long, default_value = "16,16,16")]
    dims: DimsArg,

    /// Grid spacing (uniform across axes).
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,

    /// Interpolation order: 1 (CIC) or 2 (TSC).
    #[arg(long, default_value_t = 1)]
    order: usize,

    /// Scalar or tensorial mass matrix.
    #[arg(long, value_enum, default_value_t = KindArg::Scalar)]
    kind: KindArg,

    /// Particles per cell.
    #[arg(long, default_value_t = 16)]
    ppc: usize,

    /// Tile/precision profile; defaults to fp64-8x8x4 for order 1 and
    /// tf32-16x16x8 for order 2.
    #[arg(long, value_enum)]
    profile: Option<TileProfile>,

    /// RNG seed for particle synthesis.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Timing repetitions per kernel.
    #[arg(long, default_value_t = 3)]
    repeats: usize,

    /// Worker threads for the tiled path.
    #[arg(long, default_value_t = 1)]
    threads: usize,

    /// Particle placement within cells.
    #[arg(long, value_enum, default_value_t = Distribution::Uniform)]
    distribution: Distribution,

    /// Sweep particles per cell, e.g. `1,13,64,128`.
    #[arg(long, value_delimiter = ',', conflicts_with = "sweep_grid")]
    sweep_ppc: Option<Vec<usize>>,

    /// Sweep cubic grid sizes, e.g. `8,16,32`.
    #[arg(long, value_delimiter = ',')]
    sweep_grid: Option<Vec<usize>>,

    /// Output directory for report.json and sweep.csv.
    #[arg(long, default_value = "picmm-out")]
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct DimsArg(Vec<usize>);

impl std::str::FromStr for DimsArg {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let dims: Result<Vec<usize>, _> = text
            .split([',', 'x'])
            .filter(|part| !part.is_empty())
            .map(str::parse)
            .collect();
        match dims {
            Ok(dims) if (1..=3).contains(&dims.len()) => Ok(DimsArg(dims)),
            Ok(dims) => Err(format!("expected 1 to 3 axes, got {}", dims.len())),
            Err(e) => Err(e.to_string()),
        }
    }
}

fn print_point(point: &SweepPoint) {
    match (&point.report, &point.error) {
        (Some(report), _) => {
            let speedup = match report.speedup {
                Some(s) => format!("{s:.3}x"),
                None => "withheld (checks failed)".to_string(),
            };
            println!(
                "  axis {:>6}: naive {:>10.3} ms, tiled {:>10.3} ms, speedup {}, max rel err {:.3e}, checks {}",
                point.axis,
                report.naive_min_ms,
                report.tiled_min_ms,
                speedup,
                report.max_rel_err,
                if report.checks_passed { "ok" } else { "FAILED" },
            );
        }
        (None, Some(error)) => println!("  axis {:>6}: failed: {error}", point.axis),
        (None, None) => unreachable!(),
    }
}

fn execute(cli: Cli) -> Result<bool> {
    let config = RunConfig {
        dims: cli.dims.0,
        spacing: cli.spacing,
        order: cli.order,
        kind: cli.kind,
        ppc: cli.ppc,
        profile: cli
            .profile
            .unwrap_or_else(|| TileProfile::default_for_order(cli.order)),
        seed: cli.seed,
        repeats: cli.repeats,
        threads: cli.threads,
        distribution: cli.distribution,
    };
    fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;

    let axis = match (cli.sweep_ppc, cli.sweep_grid) {
        (Some(values), None) => Some(SweepAxis::Ppc(values)),
        (None, Some(values)) => Some(SweepAxis::Grid(values)),
        (None, None) => None,
        (Some(_), Some(_)) => bail!("choose one sweep axis"),
    };

    match axis {
        Some(axis) => {
            if match &axis {
                SweepAxis::Ppc(v) | SweepAxis::Grid(v) => v.is_empty(),
            } {
                bail!("sweep axis is empty");
            }
            let points = sweep(&config, &axis);
            write_sweep_json(&cli.out.join("report.json"), &config, &points)?;
            write_sweep_csv(&cli.out.join("sweep.csv"), &points)?;
            println!("sweep over {} points:", points.len());
            for point in &points {
                print_point(point);
            }
            println!(
                "wrote {} and {}",
                cli.out.join("report.json").display(),
                cli.out.join("sweep.csv").display()
            );
            Ok(points
                .iter()
                .all(|p| p.report.as_ref().is_some_and(|r| r.checks_passed)))
        }
        None => {
            let report = run(&config)?;
            write_run_json(&cli.out.join("report.json"), &report)?;
            println!(
                "{} particles, sort {:.3} ms",
                report.particles, report.sort_ms
            );
            println!(
                "naive  min {:>10.3} ms  median {:>10.3} ms",
                report.naive_min_ms, report.naive_median_ms
            );
            println!(
                "tiled  min {:>10.3} ms  median {:>10.3} ms",
                report.tiled_min_ms, report.tiled_median_ms
            );
            match report.speedup {
                Some(s) => println!("speedup {s:.3}x"),
                None => println!("speedup withheld (invariant checks failed)"),
            }
            println!(
                "max rel err {:.3e}, frobenius rel err {:.3e}",
                report.max_rel_err, report.frobenius_rel_err
            );
            println!(
                "checks: partition-of-unity {}, symmetry {}, conservation {}",
                report.checks.partition_of_unity, report.checks.symmetry, report.checks.conservation
            );
            for message in &report.checks.messages {
                println!("  {message}");
            }
            println!("wrote {}", cli.out.join("report.json").display());
            Ok(report.checks_passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: invariant checks failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
