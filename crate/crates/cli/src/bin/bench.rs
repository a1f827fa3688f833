//! Streams a generated archive of a given decompressed size through the
//! build pipeline in a child process and reports wall time and peak RSS.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::Parser;
use emolabel_core::pipeline::{run_build, BuildConfig};
use emolabel_core::synth::{write_sized_archive, SynthConfig};

#[derive(Parser)]
#[command(name = "emolabel-bench", about = "Throughput and peak-memory benchmark for the build pipeline")]
struct Opts {
    /// Decompressed fixture size in MiB
    #[arg(long, default_value_t = 1024)]
    size_mb: u64,
    /// Peak resident memory allowed for the build, in MiB
    #[arg(long, default_value_t = 512)]
    budget_mb: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Work directory; a temporary one is used when unset
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Filler bytes per tweet line
    #[arg(long, default_value_t = 2048)]
    pad_bytes: usize,
    /// Internal: run the build on INPUT into OUTPUT and exit
    #[arg(long, num_args = 2, value_names = ["INPUT", "OUTPUT"], hide = true)]
    child: Option<Vec<PathBuf>>,
}

/// Peak RSS of terminated children, in KiB.
fn children_max_rss_kib() -> u64 {
    let mut usage = std::mem::MaybeUninit::<libc::rusage>::zeroed();
    // SAFETY: getrusage only writes into the provided struct.
    let rc = unsafe { libc::getrusage(libc::RUSAGE_CHILDREN, usage.as_mut_ptr()) };
    if rc != 0 {
        return 0;
    }
    // SAFETY: initialised by the successful call above.
    unsafe { usage.assume_init() }.ru_maxrss as u64
}

fn run_child(input: PathBuf, output: PathBuf, workers: usize) -> anyhow::Result<()> {
    let config = BuildConfig {
        inputs: vec![input],
        output,
        workers,
        ..BuildConfig::default()
    };
    let outcome = run_build(&config)?;
    println!("{}", serde_json::to_string(&outcome.report)?);
    Ok(())
}

fn run(opts: Opts) -> anyhow::Result<bool> {
    if let Some(paths) = opts.child {
        let [input, output]: [PathBuf; 2] = paths.try_into().expect("clap enforces two values");
        run_child(input, output, opts.workers)?;
        return Ok(true);
    }

    let tmp;
    let dir = match &opts.dir {
        Some(d) => d.clone(),
        None => {
            tmp = tempfile::tempdir()?;
            tmp.path().to_path_buf()
        }
    };
    let input = dir.join("archive");
    let output = dir.join("out");
    let target = opts.size_mb << 20;

    let started = Instant::now();
    let written = write_sized_archive(
        &input,
        SynthConfig {
            pad_bytes: opts.pad_bytes,
            ..SynthConfig::default()
        },
        target,
        64 << 20,
    )
    .context("generating fixture")?;
    let generated = started.elapsed();

    let started = Instant::now();
    let status = Command::new(std::env::current_exe()?)
        .arg("--workers")
        .arg(opts.workers.to_string())
        .arg("--child")
        .arg(&input)
        .arg(&output)
        .status()
        .context("spawning build")?;
    let elapsed = started.elapsed();
    if !status.success() {
        bail!("build exited with {status}");
    }
    let peak_mib = children_max_rss_kib() as f64 / 1024.0;
    let mib_per_s = written as f64 / (1 << 20) as f64 / elapsed.as_secs_f64();
    let within = peak_mib <= opts.budget_mb as f64;
    println!(
        "{}",
        serde_json::json!({
            "input_bytes": written,
            "generate_seconds": generated.as_secs_f64(),
            "build_seconds": elapsed.as_secs_f64(),
            "mib_per_second": mib_per_s,
            "peak_rss_mib": peak_mib,
            "budget_mib": opts.budget_mb,
            "within_budget": within,
        })
    );
    Ok(within)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Opts::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
