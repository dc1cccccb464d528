use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qasep::transfer::Truncation;
use qasep::{BoundaryRates, Result, SystemSpec, C64};

/// Environment variable naming the default directory for written files.
pub const OUTPUT_DIR_ENV: &str = "QASEP_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "qasep", version, about = "Exclusion-process transfer matrices, current cumulants and steady states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check functional identities of the transfer matrices and the steady state.
    Verify(VerifyArgs),
    /// Cumulants of the current from the Bethe pipeline and the exact generator.
    Cumulants(CumulantArgs),
    /// Write the matrix-product steady state as CSV.
    Steady(SteadyArgs),
    /// Write the Bethe functions W_n(z) on the unit circle as CSV.
    Export(ExportArgs),
}

/// The system and its numerical resolution.
#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    /// Number of sites.
    #[arg(long = "L", value_name = "L")]
    pub l: usize,
    /// Backward hopping rate.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    /// Counting parameter (real part).
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub mu: f64,
    /// Counting parameter (imaginary part).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu_im: f64,
    /// Boundary rates alpha,beta,gamma,delta.
    #[arg(long, value_name = "A,B,G,D", value_delimiter = ',', conflicts_with_all = ["tasep", "periodic"])]
    pub rates: Option<Vec<f64>>,
    /// Totally asymmetric boundaries: gamma = delta = 0.
    #[arg(long, requires_all = ["alpha", "beta"], conflicts_with = "periodic")]
    pub tasep: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Ring instead of an open chain.
    #[arg(long, requires = "particles")]
    pub periodic: bool,
    /// Particle number of the ring sector.
    #[arg(long)]
    pub particles: Option<usize>,
    /// Fixed auxiliary truncation; automatic when absent.
    #[arg(long)]
    pub truncation: Option<usize>,
}

impl SystemArgs {
    pub fn rates(&self) -> std::result::Result<Option<BoundaryRates>, String> {
        if self.periodic {
            return Ok(None);
        }
        if let Some(r) = &self.rates {
            if r.len() != 4 {
                return Err(format!("--rates takes four values alpha,beta,gamma,delta, got {}", r.len()));
            }
            return Ok(Some(BoundaryRates::new(r[0], r[1], r[2], r[3])));
        }
        if self.tasep {
            return Ok(Some(BoundaryRates::tasep(self.alpha.unwrap_or(0.0), self.beta.unwrap_or(0.0))));
        }
        Err("an open chain needs --rates a,b,g,d or --tasep --alpha A --beta B; a ring needs --periodic --particles N".into())
    }

    /// The system at counting parameter `mu`.
    pub fn spec_at(&self, mu: C64) -> std::result::Result<SystemSpec, String> {
        Ok(match self.rates()? {
            Some(r) => SystemSpec::open(self.l, self.q, mu, r),
            None => SystemSpec::periodic(self.l, self.q, mu, self.particles.unwrap_or(0)),
        })
    }

    pub fn spec(&self) -> std::result::Result<SystemSpec, String> {
        self.spec_at(C64::new(self.mu, self.mu_im))
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation.map_or_else(Truncation::default, Truncation::Fixed)
    }

    pub fn validated(&self) -> Result<SystemSpec> {
        let spec = self.spec().map_err(qasep::Error::Domain)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    Commutation,
    Exchange,
    Decomposition,
    TqFusion,
    Reconstruction,
    RMatrix,
    Ratios,
    Limits,
    Stationarity,
    Boundary,
    Lax,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Commutation => "commutation",
            Check::Exchange => "exchange",
            Check::Decomposition => "decomposition",
            Check::TqFusion => "tq-fusion",
            Check::Reconstruction => "reconstruction",
            Check::RMatrix => "r-matrix",
            Check::Ratios => "ratios",
            Check::Limits => "limits",
            Check::Stationarity => "stationarity",
            Check::Boundary => "boundary",
            Check::Lax => "lax",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Run every check that applies to the geometry.
    #[arg(long, conflicts_with = "check")]
    pub all: bool,
    /// Checks to run (repeatable).
    #[arg(long, value_enum)]
    pub check: Vec<Check>,
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.35, allow_negative_numbers = true)]
    pub y: f64,
    /// Largest accepted residual.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also write the result document to this file.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CumulantArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Number of cumulants.
    #[arg(long, default_value_t = 3)]
    pub orders: usize,
    /// Initial number of points on the unit circle.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Skip the exact-generator column.
    #[arg(long)]
    pub no_oracle: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SteadyArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Free parameter of the matrix representation.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x: f64,
    /// Output directory; defaults to $QASEP_OUTPUT_DIR, then the current directory.
    #[arg(long, env = OUTPUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, default_value_t = 3)]
    pub orders: usize,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}
