use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phasebound::verify::CheckKind;
use phasebound::{MomentMode, ProbeFamily, ProbeSpec};

use crate::exit::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "phasebound",
    version,
    about = "Optimised quantum Fisher information bounds for phase estimation through lossy thermal channels",
    propagate_version = true
)]
pub struct Cli {
    /// Seed for the verification draws.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Fock cutoff (levels per mode) for oracle computations.
    #[arg(long, global = true)]
    pub dim: Option<usize>,

    /// Flat `key = value` file supplying flags; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Write results here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form optimised bound for one channel and probe.
    Bound(BoundArgs),
    /// Closed-form bound over a grid of channels (defaults to the two-mode preset).
    Sweep(SweepArgs),
    /// Cross-check the closed forms against the Fock-space oracle.
    Verify(VerifyArgs),
    /// Exact QFI of the channel output next to the closed-form bound.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct ChannelArgs {
    /// Transmissivity in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,

    /// Mean thermal photon number of the environment.
    #[arg(long = "nbar-b", allow_negative_numbers = true)]
    pub nbar_b: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeKind {
    Coherent,
    Fock,
    #[value(alias = "thermal_probe")]
    Thermal,
    #[value(alias = "squeezed_vacuum")]
    Squeezed,
    #[value(alias = "entangled_coherent")]
    Ecs,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MomentArg {
    Published,
    Oracle,
}

impl From<MomentArg> for MomentMode {
    fn from(m: MomentArg) -> Self {
        match m {
            MomentArg::Published => MomentMode::PublishedMoments,
            MomentArg::Oracle => MomentMode::OracleMoments,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct ProbeArgs {
    #[arg(long, value_enum)]
    pub probe: Option<ProbeKind>,

    /// Coherent amplitude |α| (coherent, ecs).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,

    /// Photon number (fock).
    #[arg(long)]
    pub photons: Option<u32>,

    /// Mean photon number (thermal, custom).
    #[arg(long, allow_negative_numbers = true)]
    pub mean: Option<f64>,

    /// Squeezing parameter r (squeezed).
    #[arg(long, allow_negative_numbers = true)]
    pub squeeze: Option<f64>,

    /// Photon-number variance (custom).
    #[arg(long, allow_negative_numbers = true)]
    pub var: Option<f64>,

    /// Number of identical modes; the ecs probe is always two-mode.
    #[arg(long)]
    pub modes: Option<u32>,

    /// Source of the entangled-coherent-state moments.
    #[arg(long, value_enum)]
    pub moments: Option<MomentArg>,
}

impl ProbeArgs {
    /// The requested probe, or `None` when `--probe` is absent.
    pub fn spec(&self) -> Result<Option<ProbeSpec>, CliError> {
        let Some(kind) = self.probe else {
            let stray = self
                .given()
                .into_iter()
                .filter(|f| *f != "moments")
                .collect::<Vec<_>>();
            if let Some(f) = stray.first() {
                return Err(CliError::Usage(format!("--{f} needs --probe")));
            }
            return Ok(None);
        };
        let allowed: &[&str] = match kind {
            ProbeKind::Coherent => &["alpha", "modes"],
            ProbeKind::Fock => &["photons", "modes"],
            ProbeKind::Thermal => &["mean", "modes"],
            ProbeKind::Squeezed => &["squeeze", "modes"],
            ProbeKind::Ecs => &["alpha", "modes", "moments"],
            ProbeKind::Custom => &["mean", "var", "modes"],
        };
        let name = format!("{kind:?}").to_lowercase();
        if let Some(f) = self
            .given()
            .into_iter()
            .find(|f| !allowed.contains(f) && *f != "moments")
        {
            return Err(CliError::Usage(format!(
                "--{f} does not apply to the {name} probe"
            )));
        }
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| CliError::Usage(format!("the {name} probe needs --{flag}")))
        };
        let family = match kind {
            ProbeKind::Coherent => ProbeFamily::Coherent {
                alpha: need(self.alpha, "alpha")?,
            },
            ProbeKind::Fock => ProbeFamily::Fock {
                photons: self
                    .photons
                    .ok_or_else(|| CliError::Usage("the fock probe needs --photons".into()))?,
            },
            ProbeKind::Thermal => ProbeFamily::Thermal {
                mean: need(self.mean, "mean")?,
            },
            ProbeKind::Squeezed => ProbeFamily::SqueezedVacuum {
                squeeze: need(self.squeeze, "squeeze")?,
            },
            ProbeKind::Ecs => ProbeFamily::EntangledCoherent {
                alpha: need(self.alpha, "alpha")?,
            },
            ProbeKind::Custom => ProbeFamily::Custom {
                mean: need(self.mean, "mean")?,
                var: need(self.var, "var")?,
            },
        };
        let default_modes = if kind == ProbeKind::Ecs { 2 } else { 1 };
        let spec = ProbeSpec {
            family,
            n_modes: self.modes.unwrap_or(default_modes),
        };
        spec.validate()?;
        Ok(Some(spec))
    }

    pub fn moment_mode(&self) -> MomentMode {
        self.moments.map(MomentMode::from).unwrap_or_default()
    }

    fn given(&self) -> Vec<&'static str> {
        [
            ("alpha", self.alpha.is_some()),
            ("photons", self.photons.is_some()),
            ("mean", self.mean.is_some()),
            ("squeeze", self.squeeze.is_some()),
            ("var", self.var.is_some()),
            ("modes", self.modes.is_some()),
            ("moments", self.moments.is_some()),
        ]
        .into_iter()
        .filter_map(|(n, set)| set.then_some(n))
        .collect()
    }
}

#[derive(Args, Debug, Clone)]
pub struct BoundArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub probe: ProbeArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GoldenArgs {
    /// Rewrite the golden files for this command instead of printing.
    #[arg(long)]
    pub regen_golden: bool,

    /// Confirms `--regen-golden`.
    #[arg(long)]
    pub i_know: bool,

    /// Directory holding the golden files.
    #[arg(long, value_name = "PATH")]
    pub golden_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    /// Transmissivities, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub etas: Option<Vec<f64>>,

    #[arg(long = "nbar-b-start", allow_negative_numbers = true)]
    pub nbar_b_start: Option<f64>,

    #[arg(long = "nbar-b-stop", allow_negative_numbers = true)]
    pub nbar_b_stop: Option<f64>,

    #[arg(long = "nbar-b-count")]
    pub nbar_b_count: Option<usize>,

    #[command(flatten)]
    pub probe: ProbeArgs,

    #[command(flatten)]
    pub golden: GoldenArgs,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Number of random single-mode draws.
    #[arg(long, default_value_t = 200)]
    pub draws: usize,

    /// Run a single check group.
    #[arg(long, value_parser = parse_check)]
    pub only: Option<CheckKind>,

    /// Channel for a targeted dominance check (with `--probe`).
    #[command(flatten)]
    pub channel: ChannelArgs,

    #[command(flatten)]
    pub probe: ProbeArgs,
}

fn parse_check(s: &str) -> Result<CheckKind, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = CheckKind::ALL.iter().map(|k| k.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,

    #[command(flatten)]
    pub probe: ProbeArgs,

    /// Phase at which the output state is evaluated.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,

    #[command(flatten)]
    pub golden: GoldenArgs,
}
