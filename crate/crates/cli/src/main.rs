use clap::{Parser, Subcommand};
use nsclab::{StudyName, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nsclab", version, about = "Spectral laboratory for the Navier-Stokes-Cattaneo system")]
struct Cli {
    #[command(subcommand)]
    study: Study,
}

#[derive(clap::Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<String>,
    /// Random seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    threads: Option<usize>,
    /// Validate and print the resolved parameters without computing.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Study {
    /// Eigenvalues of the symbol along a ray.
    Spectrum(Common),
    /// Kalman rank condition for random directions.
    SkCheck(Common),
    /// Linear or nonlinear evolution on the torus.
    Evolve(Common),
    /// Large-time decay exponents on radial data.
    DecayFit(Common),
    /// Relaxation error against eps.
    RelaxSweep(Common),
    /// Initial layer of the effective heat flux.
    InitialLayer(Common),
    /// Lyapunov functionals.
    Lyapunov(Common),
    /// Bernstein-type inequalities on random fields.
    Bernstein(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, c) = match cli.study {
        Study::Spectrum(c) => (StudyName::Spectrum, c),
        Study::SkCheck(c) => (StudyName::SkCheck, c),
        Study::Evolve(c) => (StudyName::Evolve, c),
        Study::DecayFit(c) => (StudyName::DecayFit, c),
        Study::RelaxSweep(c) => (StudyName::RelaxSweep, c),
        Study::InitialLayer(c) => (StudyName::InitialLayer, c),
        Study::Lyapunov(c) => (StudyName::Lyapunov, c),
        Study::Bernstein(c) => (StudyName::Bernstein, c),
    };
    match run(name, &c) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nsclab {}: {e}", name.as_str());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(name: StudyName, c: &Common) -> Result<(), CliError> {
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads: need >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    }
    let resolved = nsclab::load(&c.config, name, c.seed, c.out.as_deref())?;
    if c.dry_run {
        print!("{}", nsclab::dry_run_text(&resolved));
        return Ok(());
    }
    let dir = nsclab::run(&resolved)?;
    println!("{}", dir.display());
    Ok(())
}
