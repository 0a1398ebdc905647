use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Quantum information measures: distinguishability, coherent-information
/// rates and compatible information of joint measurements.
#[derive(Debug, Parser)]
#[command(name = "qinfo", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub run: RunConfig,

    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Args)]
pub struct RunConfig {
    /// Gauss–Legendre nodes in cos ϑ for Bloch-sphere integrals (at least 8)
    #[arg(long, global = true, default_value_t = 32)]
    pub n_theta: usize,

    /// Uniform nodes in φ (at least 16)
    #[arg(long, global = true, default_value_t = 64)]
    pub n_phi: usize,

    /// Write to this file instead of stdout
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Seed for Monte Carlo estimates
    #[arg(long, global = true, default_value_t = 20261019)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Pure,
    Mixed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Information carried by the overlap of two random pure states in D dimensions
    Distinguish {
        #[arg(long = "dim", value_parser = clap::value_parser!(u64).range(2..))]
        dim: u64,
    },

    /// Spectrum of the incompatibility operator on two qubits
    Epsilon {
        /// Rebuild the operator by Bloch-sphere quadrature and compare (exit 4 on mismatch)
        #[arg(long)]
        verify_quadrature: bool,
    },

    /// Coherent information of the Λ-atom channel over (t, θ)
    LambdaScan {
        #[arg(long, default_value_t = 1.0)]
        gamma1: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma2: f64,
        /// Largest Γt of the scan, Γ = γ₁ + γ₂
        #[arg(long, default_value_t = 10.0)]
        max_total_rate_t: f64,
        #[arg(long, default_value_t = 41)]
        n_t: usize,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        theta_max: f64,
        #[arg(long, default_value_t = 33)]
        n_angle: usize,
    },

    /// Optimal coherent-information rate of the Λ-atom channel (JSON)
    Rate {
        #[arg(long, default_value_t = 1.0)]
        gamma1: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma2: f64,
        #[arg(long, default_value_t = 64)]
        n_t: usize,
        #[arg(long, default_value_t = 64)]
        n_angle: usize,
        /// Smallest time of the scan; defaults to a grid over (0, 10/Γ]
        #[arg(long, requires = "t_max")]
        t_min: Option<f64>,
        #[arg(long, requires = "t_min")]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        theta_min: f64,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        theta_max: f64,
        /// Skip golden-section refinement
        #[arg(long)]
        no_refine: bool,
        /// Include every objective evaluation in the report
        #[arg(long)]
        trace: bool,
    },

    /// Nonselected and selected information sweeps over (q, χ, ϑ)
    Compatible {
        #[arg(long, value_enum, default_value_t = Family::Pure)]
        family: Family,
        /// Entanglement parameter: a value, a list `a,b,c` or a range `start:stop:count`
        #[arg(long, default_value = "0:1:11")]
        q: Grid,
        /// Degree of selectivity, same syntax as --q
        #[arg(long, default_value = "0")]
        chi: Grid,
        /// Readout basis rotation, same syntax as --q
        #[arg(long, default_value = "0")]
        vartheta: Grid,
        /// Report the orientation-averaged selective information next to the nonselected one
        #[arg(long, conflicts_with_all = ["chi", "vartheta"])]
        orientation_average: bool,
    },

    /// Seeded Monte Carlo estimate of the nonselected information against the quadrature
    Oracle {
        #[arg(long, value_enum, default_value_t = Family::Pure)]
        family: Family,
        #[arg(long, default_value = "1")]
        q: Grid,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },

    /// Evaluate (and optionally optimize) an experiment scheme file (JSON)
    Experiment {
        scheme: PathBuf,
        /// Tune the scheme's controls for maximal information
        #[arg(long)]
        optimize: bool,
        /// Objective evaluations for the coarse grid
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(9..))]
        budget: u64,
    },
}

/// Sample points given as a value, a comma list or `start:stop:count`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let values = if let Some((start, rest)) = s.split_once(':') {
            let (stop, count) = rest.split_once(':').ok_or("range needs start:stop:count")?;
            let (a, b) = (num(start)?, num(stop)?);
            let n: usize = count.trim().parse().map_err(|e| format!("`{count}`: {e}"))?;
            match n {
                0 => return Err("range count must be positive".into()),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        } else {
            s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err("values must be finite".into());
        }
        Ok(Grid(values))
    }
}
