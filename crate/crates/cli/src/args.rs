use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pldp_core::Model;

/// Phase transitions, large-deviation rates and Monte Carlo checks for
/// partial and hidden-partial l1 recovery.
#[derive(Debug, Parser)]
#[command(name = "pldp", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weak phase-transition threshold beta_w(alpha).
    Pt(PtArgs),
    /// Closed-form LDP optimizers and rate per alpha.
    Ldp(LdpArgs),
    /// Cross-check the analytic results against independent routes.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Monte Carlo failure-probability estimate.
    Sim(SimArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Partial,
    Hidden,
}

impl ModelArg {
    pub fn model(self) -> Model {
        match self {
            ModelArg::Partial => Model::Partial,
            ModelArg::Hidden => Model::HiddenPartial,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelArg::Partial => "partial",
            ModelArg::Hidden => "hidden",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// `start:stop:step`, inclusive of `stop`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub text: String,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let v = self.start + i as f64 * self.step;
                // Strip the representation noise of repeated decimal steps.
                (v * 1e12).round() / 1e12
            })
            .collect()
    }
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:step, got '{s}'"));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}"));
    let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(step > 0.0 && step.is_finite()) {
        return Err(format!("step must be positive, got {step}"));
    }
    if !(stop >= start && start.is_finite() && stop.is_finite()) {
        return Err(format!("need start <= stop, got {start}:{stop}"));
    }
    if (stop - start) / step > 1e6 {
        return Err("grid has more than a million points".into());
    }
    Ok(Grid { start, stop, step, text: s.to_string() })
}

fn parse_unit_closed(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn parse_unit_open(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

#[derive(Debug, Args)]
pub struct PtArgs {
    #[arg(long, value_enum, default_value = "partial")]
    pub model: ModelArg,
    /// Known fraction of the support.
    #[arg(long, value_parser = parse_unit_closed)]
    pub eta: f64,
    /// A single measurement ratio m/n.
    #[arg(long, value_parser = parse_unit_open, required_unless_present = "alpha_grid", conflicts_with = "alpha_grid")]
    pub alpha: Option<f64>,
    /// Grid of measurement ratios, start:stop:step.
    #[arg(long, value_parser = parse_grid)]
    pub alpha_grid: Option<Grid>,
    /// Write CSV here (with a manifest alongside) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LdpArgs {
    #[arg(long, value_enum, default_value = "partial")]
    pub model: ModelArg,
    #[arg(long, value_parser = parse_unit_closed)]
    pub eta: f64,
    /// Sparsity ratio k/n.
    #[arg(long, value_parser = parse_unit_open)]
    pub beta: f64,
    /// Comma-separated measurement ratios.
    #[arg(long, value_delimiter = ',', value_parser = parse_unit_open, required_unless_present = "alpha_grid", conflicts_with = "alpha_grid")]
    pub alphas: Vec<f64>,
    #[arg(long, value_parser = parse_grid)]
    pub alpha_grid: Option<Grid>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Geometry decomposition against the closed-form rate.
    Geometry(VerifyGridArgs),
    /// Gradient of the zeta objective at the closed-form point, and an
    /// independent numeric optimization.
    Stationarity(VerifyGridArgs),
    /// Closed-form Gaussian width against a projected-gradient oracle.
    Width(VerifyWidthArgs),
}

#[derive(Debug, Args)]
pub struct VerifyGridArgs {
    #[arg(long, value_enum, default_value = "partial")]
    pub model: ModelArg,
    #[arg(long, value_parser = parse_unit_closed, default_value = "0.5")]
    pub eta: f64,
    #[arg(long, value_parser = parse_unit_open, default_value = "0.25896")]
    pub beta: f64,
    #[arg(long, value_parser = parse_grid, default_value = "0.40:0.60:0.05")]
    pub alpha_grid: Grid,
    /// Largest acceptable deviation; defaults per check.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyWidthArgs {
    #[arg(long, value_enum, default_value = "partial")]
    pub model: ModelArg,
    /// Ambient dimension.
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(2..=2000))]
    pub n: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub cases: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, value_enum, default_value = "partial")]
    pub model: ModelArg,
    /// Ambient dimension.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// m = round(alpha n), unless --m is given.
    #[arg(long, value_parser = parse_unit_open, required_unless_present = "m")]
    pub alpha: Option<f64>,
    /// k = round(beta n), unless --k is given.
    #[arg(long, value_parser = parse_unit_open, required_unless_present = "k")]
    pub beta: Option<f64>,
    /// known = round(eta k), unless --known is given.
    #[arg(long, value_parser = parse_unit_closed, required_unless_present = "known")]
    pub eta: Option<f64>,
    /// Explicit number of rows.
    #[arg(long)]
    pub m: Option<u64>,
    /// Explicit support size.
    #[arg(long)]
    pub k: Option<u64>,
    /// Explicit number of correctly known support indices.
    #[arg(long)]
    pub known: Option<u64>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Does not change results.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub threads: Option<u64>,
    /// Write the JSON record here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-trial CSV (with a manifest alongside).
    #[arg(long)]
    pub trials_csv: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        let g = parse_grid("0.3:0.9:0.01").unwrap();
        let p = g.points();
        assert_eq!(p.len(), 61);
        assert_eq!(p[0], 0.3);
        assert_eq!(p[60], 0.9);
        assert_eq!(p[17], 0.47);
        assert!(parse_grid("0.3:0.2:0.1").is_err());
        assert!(parse_grid("0.3:0.4").is_err());
        assert!(parse_grid("0.3:0.4:0").is_err());
        assert_eq!(parse_grid("0.5:0.5:0.1").unwrap().points(), vec![0.5]);
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
