//! Command-line front end: derive parameters, transform vector files,
//! sketch turnstile streams, run the Monte Carlo verification harness,
//! and benchmark the fast paths.
//!
//! Machine-readable output goes to stdout (or the --output file);
//! warnings and skip notices go to stderr and never interleave with it.

mod sketch_file;
mod vecfile;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sparse_jl::{
    auto_apply, estimate_failure_rate, goodness_rate, infnorm_tail_rate, l1_estimator_report,
    DistortionPath, DistortionReport, HadamardJl, JlParams, L1Embed, SparseJl, VectorFamily,
};
use std::io::BufRead;
use std::path::PathBuf;
use std::time::Instant;

/// Default master seed; fixed (not wall-clock) so naive invocations are
/// reproducible.
pub const DEFAULT_SEED: u64 = 0x5a17_5eed;

#[derive(Parser)]
#[command(
    name = "sparse-jl",
    version,
    about = "Sparse Johnson-Lindenstrauss projections, turnstile sketches, and Monte Carlo verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive and print the transform constants for (epsilon, delta).
    Params(ParamsArgs),
    /// Project a vector file down to k dimensions.
    Transform(TransformArgs),
    /// Sketch an `<index> <delta>` stream from stdin, or merge sketch files.
    Sketch(SketchArgs),
    /// Run Monte Carlo checks against the probability bounds.
    Verify(VerifyArgs),
    /// Measure wall-clock scaling of the fast paths.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Target relative distortion, 0 < epsilon < 1.
    #[arg(long)]
    epsilon: f64,
    /// Per-vector failure budget, 0 < delta < 1/10.
    #[arg(long)]
    delta: f64,
    /// Master randomness seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PathChoice {
    Phi,
    Hg,
    Auto,
    L1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyChoice {
    Sphere,
    E1,
    Heavy,
    Flat,
}

impl From<FamilyChoice> for VectorFamily {
    fn from(f: FamilyChoice) -> Self {
        match f {
            FamilyChoice::Sphere => VectorFamily::UniformOnSphere,
            FamilyChoice::E1 => VectorFamily::SingleCoordinate,
            FamilyChoice::Heavy => VectorFamily::HeavyPlusNoise,
            FamilyChoice::Flat => VectorFamily::FlatSigned,
        }
    }
}

#[derive(Args)]
struct ParamsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Input dimension.
    #[arg(long)]
    d: usize,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which composed transform to apply.
    #[arg(long, value_enum, default_value_t = PathChoice::Phi)]
    path: PathChoice,
    /// Input vector file (sparse or dense format).
    #[arg(long)]
    input: PathBuf,
    /// Output file for the k-vector (dense format).
    #[arg(long)]
    output: PathBuf,
    /// Also print input/output squared norms and the relative distortion.
    #[arg(long)]
    report_norms: bool,
}

#[derive(Args)]
struct SketchArgs {
    /// Target relative distortion, 0 < epsilon < 1 (stream mode).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Per-vector failure budget, 0 < delta < 1/10 (stream mode).
    #[arg(long)]
    delta: Option<f64>,
    /// Input dimension of the streamed vector (stream mode).
    #[arg(long)]
    d: Option<usize>,
    /// Master randomness seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Abort on the first malformed line instead of skipping it.
    #[arg(long)]
    strict: bool,
    /// Write the serialized sketch here instead of printing the k-vector.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Merge these serialized sketch files instead of reading stdin.
    #[arg(long, num_args = 1..)]
    merge: Vec<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Input dimension; defaults to 64, or to the smallest power of two
    /// above the block-Hadamard threshold for the hg checks.
    #[arg(long)]
    d: Option<usize>,
    /// Monte Carlo trials per check; defaults to 2000, or 5000 for the
    /// l1 check whose 2% ratio tolerance needs the larger sample.
    #[arg(long)]
    trials: Option<usize>,
    /// Which check to run; `auto` runs the whole battery.
    #[arg(long, value_enum, default_value_t = PathChoice::Auto)]
    path: PathChoice,
    /// Input family for the distortion checks.
    #[arg(long, value_enum, default_value_t = FamilyChoice::Sphere)]
    family: FamilyChoice,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which fast path to time (phi or hg).
    #[arg(long, value_enum, default_value_t = PathChoice::Phi)]
    path: PathChoice,
}

fn main() -> std::process::ExitCode {
    let result = match Cli::parse().command {
        Command::Params(a) => cmd_params(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Sketch(a) => cmd_sketch(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn cmd_params(a: ParamsArgs) -> Result<()> {
    let params = JlParams::derive(a.common.epsilon, a.common.delta, a.d, a.common.seed)?;
    print!("{}", params.to_record());
    for w in params.assumption_warnings() {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn cmd_transform(a: TransformArgs) -> Result<()> {
    let vf = vecfile::VectorFile::read(&a.input)?;
    let params = JlParams::derive(a.common.epsilon, a.common.delta, vf.d(), a.common.seed)?;

    let y = match a.path {
        PathChoice::Phi => SparseJl::new(&params).apply_sparse(&vf.entries())?,
        PathChoice::Hg => HadamardJl::new(&params)?.apply(&vf.to_dense())?,
        PathChoice::Auto => {
            let (y, tag) = auto_apply(&params, &vf.entries())?;
            println!("path={}", tag.name());
            y
        }
        PathChoice::L1 => {
            let t = L1Embed::new(&params);
            let y = t.bucket_values(&vf.to_dense())?;
            let estimate =
                y.iter().map(|v| v.abs()).sum::<f64>() / (t.beta0() * (t.k() as f64).sqrt());
            println!("l1_estimate={estimate}");
            y
        }
    };
    vecfile::write_dense(&a.output, &y)?;

    if a.report_norms {
        let in_sq = sq_norm(&vf.to_dense());
        let out_sq = sq_norm(&y);
        println!("input_sq_norm={in_sq}");
        println!("output_sq_norm={out_sq}");
        println!("relative_distortion={}", (out_sq - in_sq) / in_sq);
    }
    Ok(())
}

fn cmd_sketch(a: SketchArgs) -> Result<()> {
    let sketch = if a.merge.is_empty() {
        let epsilon = a
            .epsilon
            .ok_or_else(|| anyhow!("--epsilon is required when sketching a stream"))?;
        let delta = a
            .delta
            .ok_or_else(|| anyhow!("--delta is required when sketching a stream"))?;
        let d =
            a.d.ok_or_else(|| anyhow!("--d is required when sketching a stream"))?;
        let params = JlParams::derive(epsilon, delta, d, a.seed)?;
        let t = SparseJl::new(&params);
        let mut sketch = t.new_sketch();

        let stdin = std::io::stdin();
        for (i, line) in stdin.lock().lines().enumerate() {
            let n = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match parse_update(&line, d) {
                Ok((j, delta)) => t.sketch_update(&mut sketch, j, delta)?,
                Err(e) if a.strict => bail!("line {n}: {e}"),
                Err(e) => eprintln!("line {n}: skipped: {e}"),
            }
        }
        sketch
    } else {
        let mut files = a.merge.iter();
        let mut merged = sketch_file::read(files.next().unwrap())?;
        for path in files {
            merged = merged.merge(&sketch_file::read(path)?)?;
        }
        merged
    };

    match &a.output {
        Some(path) => sketch_file::write(path, &sketch)?,
        None => {
            print!("{}", vecfile::format_dense(sketch.accumulator()));
            println!("sq_norm={}", sketch.sq_norm());
        }
    }
    Ok(())
}

fn parse_update(line: &str, d: usize) -> Result<(usize, f64)> {
    let mut tok = line.split_whitespace();
    let j: usize = tok
        .next()
        .ok_or_else(|| anyhow!("empty update"))?
        .parse()
        .map_err(|_| anyhow!("invalid index in '{line}'"))?;
    let delta: f64 = tok
        .next()
        .ok_or_else(|| anyhow!("missing delta in '{line}'"))?
        .parse()
        .map_err(|_| anyhow!("invalid delta in '{line}'"))?;
    if tok.next().is_some() {
        bail!("trailing tokens in '{line}'");
    }
    if j >= d {
        bail!("index {j} out of range for dimension {d}");
    }
    Ok((j, delta))
}

/// Smallest power of two strictly above the block-Hadamard threshold.
fn hg_default_d(epsilon: f64, delta: f64, seed: u64) -> Result<usize> {
    let probe = JlParams::derive(epsilon, delta, 1, seed)?;
    let mut d = probe.b;
    if (d as f64) <= probe.hadamard_dim_threshold() {
        d *= 2;
    }
    Ok(d)
}

fn print_report(check: &str, report: &DistortionReport) -> bool {
    println!("check={check}");
    print!("{}", report.to_record());
    println!("pass={}", report.passes());
    println!();
    report.passes()
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let eps = a.common.epsilon;
    let delta = a.common.delta;
    let seed = a.common.seed;
    let family: VectorFamily = a.family.into();
    let trials = a.trials.unwrap_or(2000);

    let mut all_pass = true;
    match a.path {
        PathChoice::Phi => {
            let params = JlParams::derive(eps, delta, a.d.unwrap_or(64), seed)?;
            let r = estimate_failure_rate(&params, DistortionPath::Phi, trials, family)?;
            all_pass &= print_report(&format!("phi/{}", family.name()), &r);
        }
        PathChoice::Hg => {
            let d = match a.d {
                Some(d) => d,
                None => hg_default_d(eps, delta, seed)?,
            };
            let params = JlParams::derive(eps, delta, d, seed)?;
            let r = estimate_failure_rate(&params, DistortionPath::Hadamard, trials, family)?;
            all_pass &= print_report(&format!("hg/{}", family.name()), &r);
        }
        PathChoice::L1 => {
            let params = JlParams::derive(eps, delta, a.d.unwrap_or(64), seed)?;
            let x = VectorFamily::UniformOnSphere.generate(params.d, params.seed ^ 0x11);
            let r = l1_estimator_report(&params, a.trials.unwrap_or(5000), &x)?;
            let mean_err = (r.mean_estimate - r.mean_conditional).abs() / r.mean_conditional;
            let ratio_err = (r.bucket_ratio() - r.beta0).abs() / r.beta0;
            let pass = mean_err <= 0.05 && ratio_err <= 0.02;
            println!("check=l1");
            print!("{}", r.to_record());
            println!("mean_rel_err={mean_err}");
            println!("ratio_rel_err={ratio_err}");
            println!("pass={pass}");
            println!();
            all_pass &= pass;
        }
        PathChoice::Auto => {
            // Full battery: distortion on both paths and all families,
            // then goodness and the inf-norm tail.
            let phi_params = JlParams::derive(eps, delta, a.d.unwrap_or(64), seed)?;
            let hg_d = match a.d {
                Some(d)
                    if {
                        let p = JlParams::derive(eps, delta, d, seed)?;
                        (d as f64) > p.hadamard_dim_threshold()
                    } =>
                {
                    d
                }
                _ => hg_default_d(eps, delta, seed)?,
            };
            let hg_params = JlParams::derive(eps, delta, hg_d, seed)?;
            for fam in [
                VectorFamily::UniformOnSphere,
                VectorFamily::SingleCoordinate,
                VectorFamily::HeavyPlusNoise,
            ] {
                let r = estimate_failure_rate(&phi_params, DistortionPath::Phi, trials, fam)?;
                all_pass &= print_report(&format!("phi/{}", fam.name()), &r);
                let r = estimate_failure_rate(&hg_params, DistortionPath::Hadamard, trials, fam)?;
                all_pass &= print_report(&format!("hg/{}", fam.name()), &r);
            }
            let r = goodness_rate(&phi_params, trials)?;
            all_pass &= print_report("goodness", &r);
            let e1 = VectorFamily::SingleCoordinate.generate(hg_params.d, 0);
            let r = infnorm_tail_rate(&hg_params, trials, &e1)?;
            all_pass &= print_report("tail", &r);
        }
    }
    if !all_pass {
        bail!("verification failed: an empirical rate exceeded its bound");
    }
    Ok(())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let eps = a.common.epsilon;
    let delta = a.common.delta;
    let seed = a.common.seed;

    match a.path {
        PathChoice::Phi => {
            let d = 1usize << 20;
            let params = JlParams::derive(eps, delta, d, seed)?;
            let t = SparseJl::new(&params);
            println!("path=phi k={} c={}", params.k, params.c);
            for exp in 10..=15u32 {
                let nnz = 1usize << exp;
                let x = bench_entries(nnz, d, seed ^ exp as u64);
                let ns = time_median(|| {
                    std::hint::black_box(t.apply_sparse(&x).unwrap());
                });
                println!(
                    "nnz={nnz} d={d} median_ns={ns:.0} ns_per_nnz={:.2}",
                    ns / nnz as f64
                );
            }
            // d sweep at fixed nnz: update cost should not move.
            let nnz = 1usize << 13;
            for dexp in [16u32, 18, 20] {
                let d = 1usize << dexp;
                let params = JlParams::derive(eps, delta, d, seed)?;
                let t = SparseJl::new(&params);
                let x = bench_entries(nnz, d, seed ^ 0xD0 ^ dexp as u64);
                let ns = time_median(|| {
                    std::hint::black_box(t.apply_sparse(&x).unwrap());
                });
                println!(
                    "nnz={nnz} d={d} median_ns={ns:.0} ns_per_nnz={:.2}",
                    ns / nnz as f64
                );
            }
        }
        PathChoice::Hg => {
            let base = hg_default_d(eps, delta, seed)?;
            println!("path=hg");
            for mult in [1usize, 2, 4] {
                let d = base * mult;
                let params = JlParams::derive(eps, delta, d, seed)?;
                let t = HadamardJl::new(&params)?;
                let x = VectorFamily::UniformOnSphere.generate(d, seed ^ mult as u64);
                let ns = time_median(|| {
                    std::hint::black_box(t.apply(&x).unwrap());
                });
                println!(
                    "d={d} k={} median_ns={ns:.0} ns_per_coord={:.2}",
                    params.k,
                    ns / d as f64
                );
            }
        }
        _ => bail!("bench supports --path phi or --path hg"),
    }
    Ok(())
}

fn bench_entries(nnz: usize, d: usize, seed: u64) -> Vec<(usize, f64)> {
    use sparse_jl::{DomainTag, SeededSource};
    let idx = SeededSource::new(seed, DomainTag::FamilyVectors);
    let val = SeededSource::new(seed ^ 0xBEEF, DomainTag::Gaussians);
    (0..nnz)
        .map(|e| {
            (
                idx.bucket_at(e as u64, d as u64) as usize,
                val.gaussian_at(e as u64),
            )
        })
        .collect()
}

fn time_median(mut f: impl FnMut()) -> f64 {
    f(); // warmup
    let times: Vec<f64> = (0..3)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_nanos() as f64
        })
        .collect();
    median(times)
}
