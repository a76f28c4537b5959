use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use irs_core::alt_opt::OuterTraceRow;
use irs_sim::aggregate::{aggregate, Aggregate};
use irs_sim::chart::{emit_chart, swept_axes, Axis};
use irs_sim::error::{Error, Result};
use irs_sim::output::{emit_csv, emit_summary, read_records, to_csv_string};
use irs_sim::schemes::{solve_trial, Cell};
use irs_sim::suite::{run_tiny_suite, TinySuite};
use irs_sim::{run_sweep, ExperimentSpec, Preset, Scheme};

#[derive(Parser)]
#[command(name = "irs-sim", about = "Monte Carlo sweeps for IRS-assisted multi-user MIMO precoding")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment spec (flat TOML). Keys not given take preset values.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Base settings when no spec file is given.
    #[arg(long, default_value = "desk")]
    preset: Preset,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `base_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of the experiment spec and write trials.csv, summary.csv and charts.
    Run {
        #[command(flatten)]
        common: Common,
        /// Record per-trial wall time in the `ms` column.
        #[arg(long)]
        timing: bool,
    },
    /// Per-iteration objective, NRMSE and sum-rate of one trial.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long, default_value = "vamp_unimodular")]
        scheme: String,
        /// Remove the BS-user link before optimizing.
        #[arg(long)]
        exclude_direct: bool,
    },
    /// Tiny-instance comparison of the optimizer with the exhaustive grid.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 64)]
        grid_points: usize,
    },
    /// Re-render summary and charts from a trials CSV.
    Chart {
        /// trials.csv written by `run`.
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load_spec(c: &Common) -> Result<ExperimentSpec> {
    let mut spec = match &c.spec {
        Some(p) => ExperimentSpec::load(p)?,
        None => ExperimentSpec::preset(c.preset),
    };
    if let Some(seed) = c.seed {
        spec.base_seed = seed;
    }
    Ok(spec)
}

fn ensure_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|source| Error::Io {
        path: p.to_path_buf(),
        source,
    })
}

fn write_text(p: &Path, text: &str) -> Result<()> {
    std::fs::write(p, text).map_err(|source| Error::Io {
        path: p.to_path_buf(),
        source,
    })
}

fn write_charts(out: &Path, aggs: &[Aggregate]) -> Result<Vec<PathBuf>> {
    let mut axes = swept_axes(aggs);
    if axes.is_empty() {
        axes.push(Axis::K);
    }
    let mut written = Vec::new();
    for ax in axes {
        let p = out.join(format!("sum_rate_vs_{}.svg", ax.slug()));
        emit_chart(&p, aggs, ax)?;
        written.push(p);
    }
    Ok(written)
}

fn print_summary(aggs: &[Aggregate]) {
    println!(
        "{:<18} {:>4} {:>3} {:>5} {:>7} {:>6} {:>9} {:>9} {:>9} {:>9} {:>6}",
        "scheme", "N", "M", "K", "P_dBm", "kappa", "median", "mean", "p10", "p90", "iters"
    );
    for a in aggs {
        println!(
            "{:<18} {:>4} {:>3} {:>5} {:>7} {:>6} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>6}",
            a.scheme, a.n, a.m, a.k, a.power_dbm, a.kappa, a.median, a.mean, a.p10, a.p90, a.iters_median
        );
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { common, timing } => {
            let mut spec = load_spec(&common)?;
            spec.record_wall_time |= timing;
            spec.validate()?;
            ensure_dir(&common.out)?;
            let res = run_sweep(&spec, common.threads)?;
            write_text(&common.out.join("spec.toml"), &spec.to_toml())?;
            emit_csv(common.out.join("trials.csv"), &res.records)?;
            emit_summary(common.out.join("summary.csv"), &res.aggregates)?;
            let charts = write_charts(&common.out, &res.aggregates)?;
            print_summary(&res.aggregates);
            println!("wrote {} trials to {}", res.records.len(), common.out.display());
            for c in charts {
                println!("chart {}", c.display());
            }
        }
        Command::Trace {
            common,
            trial,
            scheme,
            exclude_direct,
        } => {
            let mut spec = load_spec(&common)?;
            spec.exclude_direct |= exclude_direct;
            let scheme = Scheme::from_name(&scheme).ok_or_else(|| Error::Spec {
                path: "--scheme".into(),
                msg: format!("unknown scheme '{scheme}'"),
            })?;
            spec.validate()?;
            let cell = Cell {
                scheme,
                n: spec.n[0],
                m: spec.m[0],
                k: spec.k[0],
                power_dbm: spec.power_dbm[0],
                kappa: spec.kappa[0],
            };
            let sol = solve_trial(&spec, &cell, trial)?.solution;
            ensure_dir(&common.out)?;
            let mut text = String::from(OuterTraceRow::<f64>::CSV_HEADER);
            text.push('\n');
            for row in &sol.trace {
                text.push_str(&row.csv_row());
                text.push('\n');
            }
            let path = common.out.join("trace.csv");
            write_text(&path, &text)?;
            print!("{text}");
            println!(
                "{} iterations, converged: {}, written to {}",
                sol.iterations,
                sol.converged,
                path.display()
            );
        }
        Command::Oracle {
            common,
            trials,
            grid_points,
        } => {
            let spec = load_spec(&common)?;
            let suite = TinySuite {
                trials,
                base_seed: spec.base_seed,
                grid_points,
                power_dbm: 30.0,
                noise_dbm: spec.noise_dbm,
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(common.threads.unwrap_or(0))
                .build()
                .map_err(|e| Error::Spec {
                    path: "--threads".into(),
                    msg: e.to_string(),
                })?;
            let rows = pool.install(|| run_tiny_suite(&suite))?;
            ensure_dir(&common.out)?;
            let path = common.out.join("oracle.csv");
            write_text(&path, &to_csv_string(&rows)?)?;
            let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
            ratios.sort_by(|a, b| a.total_cmp(b));
            let med = irs_sim::aggregate::percentile(&ratios, 0.5);
            let reactive_ok = rows.iter().filter(|r| r.e_reactive >= r.e_unimodular).count();
            println!("median E_vamp / E_grid = {med:.4} over {} trials", rows.len());
            println!("reactive E >= unimodular E on {reactive_ok}/{} trials", rows.len());
            println!("{} (threshold 1.05)", if med <= 1.05 { "PASS" } else { "FAIL" });
            println!("written to {}", path.display());
        }
        Command::Chart { csv, out } => {
            let records = read_records(&csv)?;
            let aggs = aggregate(&records);
            ensure_dir(&out)?;
            emit_summary(out.join("summary.csv"), &aggs)?;
            for c in write_charts(&out, &aggs)? {
                println!("chart {}", c.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
