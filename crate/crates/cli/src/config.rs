//! Common flags, presets and the resolved run configuration.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use splitlab::{BlaschkeMap, MapParams, Precision, Real};

use crate::error::{CliError, CliResult};
use crate::output::Format;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// μ = 0.7, α = 0.3, L = 200, 113 bits and the figure grid sizes.
    Paper,
    /// Default parameters on 10×10 grids and short manifolds.
    Desk,
    /// The unperturbed cat map (μ = 0) on desk-sized grids.
    Cat,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
            Preset::Cat => "cat",
        }
    }

    pub fn sizes(self) -> Sizes {
        match self {
            Preset::Paper => Sizes { grid: 100, diff: 100, hscan: 40, max_points: 100_000 },
            Preset::Desk | Preset::Cat => Sizes { grid: 10, diff: 10, hscan: 10, max_points: 2_000 },
        }
    }

    fn mu(self) -> &'static str {
        match self {
            Preset::Cat => "0",
            _ => "0.7",
        }
    }
}

/// Per-command defaults a preset supplies.
#[derive(Clone, Copy, Debug)]
pub struct Sizes {
    pub grid: usize,
    pub diff: usize,
    pub hscan: usize,
    pub max_points: usize,
}

#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// Deformation amplitude, 0 <= mu < 1 (decimal, parsed at working precision).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Deformation phase in radians, -pi <= alpha < pi.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Mantissa bits, at least 113.
    #[arg(long, global = true)]
    pub prec_bits: Option<u32>,
    /// Orbit length used by the power iteration.
    #[arg(long, global = true)]
    pub orbit_len: Option<usize>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Named bundle of defaults; explicit flags still take precedence.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub map: BlaschkeMap,
    pub prec: Precision,
    pub mu_text: String,
    pub alpha_text: String,
    pub orbit_len: usize,
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub preset: Preset,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> CliResult<Self> {
        let preset = args.preset.unwrap_or(Preset::Paper);
        let prec = Precision::new(args.prec_bits.unwrap_or(Precision::QUAD.bits()))?;
        let mu_text = args.mu.clone().unwrap_or_else(|| preset.mu().to_owned());
        let alpha_text = args.alpha.clone().unwrap_or_else(|| "0.3".to_owned());
        let params = MapParams::from_decimal(prec, &mu_text, &alpha_text)?;
        let orbit_len = args.orbit_len.unwrap_or(splitlab::DEFAULT_ORBIT_LEN);
        if orbit_len == 0 {
            return Err(CliError::Validation("--orbit-len must be at least 1".into()));
        }
        let threads = match args.threads {
            Some(0) => return Err(CliError::Validation("--threads must be at least 1".into())),
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Ok(RunConfig {
            map: BlaschkeMap::new(params),
            prec,
            mu_text,
            alpha_text,
            orbit_len,
            threads,
            out: args.out.clone(),
            format: args.format,
            preset,
        })
    }

    pub fn sizes(&self) -> Sizes {
        self.preset.sizes()
    }

    pub fn real(&self, flag: &str, text: &str) -> CliResult<Real> {
        Real::parse(self.prec, text).map_err(|_| CliError::Validation(format!("--{flag}: not a number: {text:?}")))
    }

    /// Provenance shared by every command.
    pub fn provenance(&self) -> Vec<(String, String)> {
        let p = self.map.params();
        vec![
            ("preset".into(), self.preset.name().into()),
            ("mu".into(), self.mu_text.clone()),
            ("mu_value".into(), p.mu().to_sci(36)),
            ("alpha".into(), self.alpha_text.clone()),
            ("alpha_value".into(), p.alpha().to_sci(36)),
            ("prec_bits".into(), self.prec.bits().to_string()),
            ("orbit_len".into(), self.orbit_len.to_string()),
        ]
    }
}
