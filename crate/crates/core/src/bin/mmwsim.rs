use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mmwsim::array::ArrayConfig;
use mmwsim::beamforming::{generate_codebook, write_codebook};
use mmwsim::channel::{parse_trace, write_trace, RayTraceSet};
use mmwsim::config::{dump_config, load_config};
use mmwsim::engine;
use mmwsim::output::{emit_cdf, emit_timeseries, write_atomic};
use mmwsim::scenario::{build_synthetic_scenario, SyntheticSpec};
use mmwsim::{Error, Result};

#[derive(Parser)]
#[command(name = "mmwsim", version, about = "Trace-driven mmWave link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    TwoCellSynthetic,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write per-link timeseries and CDF files.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a DFT-style codebook for a rows x cols array.
    GenerateCodebook {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0.5)]
        spacing: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a ready-to-run scenario (configuration and trace).
    MakeScenario {
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse a trace file and report its contents.
    Validate {
        #[arg(long)]
        trace: PathBuf,
    },
}

fn read_trace(path: &Path) -> Result<RayTraceSet> {
    let f = File::open(path)
        .map_err(|e| Error::Config(format!("cannot open trace {}: {e}", path.display())))?;
    parse_trace(BufReader::new(f))
}

fn run(config: &Path, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let trace = read_trace(&cfg.trace_path)?;
    let result = engine::run(&cfg, &trace)?;
    std::fs::create_dir_all(out)?;
    let meta = &result.metadata;
    for s in &result.series {
        let tag = format!("{}_{}", s.bs, s.ut);
        emit_timeseries(&s.records, meta, &out.join(format!("timeseries_{tag}.csv")))?;
        let snr: Vec<f64> = s.records.iter().map(|r| r.snr_db).collect();
        let sinr: Vec<f64> = s.records.iter().map(|r| r.sinr_db).collect();
        emit_cdf(
            &snr,
            "snr_db",
            meta,
            &out.join(format!("cdf_snr_{tag}.csv")),
        )?;
        emit_cdf(
            &sinr,
            "sinr_db",
            meta,
            &out.join(format!("cdf_sinr_{tag}.csv")),
        )?;
        let mean_tp = s.throughput_bps.iter().sum::<f64>() / s.throughput_bps.len() as f64;
        println!(
            "{} -> {}: {} samples, mean throughput {:.3} Mbit/s",
            s.bs,
            s.ut,
            s.records.len(),
            mean_tp / 1e6
        );
    }
    println!(
        "{} codebook searches, config sha256 {}",
        result.search_instants.len(),
        meta.config_sha256
    );
    Ok(())
}

fn generate(rows: usize, cols: usize, spacing: f64, out: &Path) -> Result<()> {
    let a = ArrayConfig::new(rows, cols)?.with_spacing(spacing, spacing)?;
    let cb = generate_codebook(&a);
    write_atomic(out, &write_codebook(&cb))?;
    println!("{} codewords written to {}", cb.len(), out.display());
    Ok(())
}

fn make_scenario(preset: Preset, out: &Path) -> Result<()> {
    let spec = match preset {
        Preset::TwoCellSynthetic => SyntheticSpec::default(),
    };
    let (cfg, trace) = build_synthetic_scenario(&spec)?;
    std::fs::create_dir_all(out)?;
    write_atomic(&out.join(&spec.trace_file), &write_trace(&trace))?;
    write_atomic(&out.join("scenario.cfg"), &dump_config(&cfg))?;
    println!(
        "wrote {} and {}",
        out.join("scenario.cfg").display(),
        out.join(&spec.trace_file).display()
    );
    Ok(())
}

fn validate(path: &Path) -> Result<()> {
    let t = read_trace(path)?;
    println!(
        "{} links, {} samples at {} s",
        t.links.len(),
        t.n_samples,
        t.sampling_period_s
    );
    for l in &t.links {
        let blocked = l.samples.iter().filter(|s| s.is_empty()).count();
        let max_rays = l.samples.iter().map(Vec::len).max().unwrap_or(0);
        println!(
            "  {} -> {}: up to {max_rays} rays, {blocked} empty samples",
            l.tx, l.rx
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run { config, out } => run(config, out),
        Command::GenerateCodebook {
            rows,
            cols,
            spacing,
            out,
        } => generate(*rows, *cols, *spacing, out),
        Command::MakeScenario { preset, out } => make_scenario(*preset, out),
        Command::Validate { trace } => validate(trace),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mmwsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
