mod commands;
mod data;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

/// Point-cloud reconstruction with neural parameterization priors.
#[derive(Debug, Parser)]
#[command(name = "chartfit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a prior to a noisy point cloud and write the reconstructed mesh.
    Denoise(FitArgs),
    /// Fit one regularized chart to a subsampled point cloud.
    Interpolate(FitArgs),
    /// Check Monte-Carlo network statistics against the analytic kernels.
    GpVerify(GpArgs),
    /// Draw curves or surfaces from randomly initialized networks.
    SamplePrior(SampleArgs),
    /// Run every prior configuration on procedural or user-supplied shapes.
    Benchmark(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Mlp,
    Conv,
    Levelset,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input point cloud (`.xyz`) or mesh (`.obj`, sampled with `--eval-samples` points).
    #[arg(long)]
    pub input: PathBuf,
    /// Reference surface or point cloud for evaluation.
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    /// Output mesh; metrics go next to it with a `.csv` extension.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub charts: usize,
    /// Manifold dimension of each chart.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: u8,
    #[arg(long, value_enum, default_value_t = KindArg::Mlp)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gaussian noise added to the input before fitting.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, default_value_t = 16384)]
    pub eval_samples: usize,
    /// Random subset size taken from the input before fitting.
    #[arg(long)]
    pub subsample: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GpArgs {
    /// Deepest network checked against the recursion.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 20000)]
    pub draws: usize,
    /// Width of the 2-layer networks; deeper networks use at most 256.
    #[arg(long, default_value_t = 4096)]
    pub width: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    /// 1 for curves, 2 for surfaces.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: u8,
    /// Build curves from a tangent angle instead of coordinates.
    #[arg(long)]
    pub arclength: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Results CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory of `.obj` ground truths; procedural shapes when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2e-3)]
    pub noise: f64,
    #[arg(long, default_value_t = 16384)]
    pub eval_samples: usize,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or unreadable/unwritable files.
    Usage(anyhow::Error),
    /// A check or fit did not succeed.
    Check(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: impl std::fmt::Display) -> Self {
        Failure::Usage(anyhow::anyhow!("{msg}"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Denoise(a) => commands::denoise(&a, false),
        Command::Interpolate(a) => commands::denoise(&a, true),
        Command::GpVerify(a) => commands::gp_verify(&a),
        Command::SamplePrior(a) => commands::sample_prior(&a),
        Command::Benchmark(a) => commands::benchmark(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
