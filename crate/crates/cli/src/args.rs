use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Single-ion resonance fluorescence experiments. All frequencies on the
/// command line and in files are plain Hz.
#[derive(Debug, Parser)]
#[command(name = "ionfluor", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every random draw of the run.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// JSON file overriding the defaults; flags override the file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Laser and field overrides of the Bloch model.
#[derive(Debug, Clone, Default, Args)]
pub struct LaserArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub cooling_detuning_hz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub repump_detuning_hz: Option<f64>,
    /// mW/cm².
    #[arg(long)]
    pub cooling_intensity: Option<f64>,
    /// mW/cm².
    #[arg(long)]
    pub repump_intensity: Option<f64>,
    #[arg(long)]
    pub b_gauss: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WindowArg {
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AxisArg {
    Cooling,
    Repump,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Joint,
    Separate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Decibel,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum ParamArg {
    CoolingDetuning,
    CoolingIntensity,
    RepumpIntensity,
    BField,
    Scale,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emulated analyzer trace around the mixed-down elastic peak.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Micromotion modulation index.
        #[arg(long)]
        m_micro: Option<f64>,
        /// Noiseless trace.
        #[arg(long)]
        no_noise: bool,
        #[arg(long)]
        rbw_hz: Option<f64>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        averages: Option<usize>,
        #[arg(long, value_enum)]
        window: Option<WindowArg>,
        /// Carrier SNR in a 1 Hz bandwidth, set through the mode matching.
        #[arg(long)]
        snr_db: Option<f64>,
    },
    /// Steady-state P1/2 population versus one laser detuning.
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        laser: LaserArgs,
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
        #[arg(long, allow_hyphen_values = true)]
        start_hz: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        stop_hz: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Laser-cooling rate α from the slope of the excitation spectrum.
    CoolingRate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        laser: LaserArgs,
        /// Use the built-in reference parameters only.
        #[arg(long, conflicts_with = "config")]
        defaults: bool,
        /// Finite-difference step of the derivative.
        #[arg(long)]
        step_hz: Option<f64>,
    },
    /// Fit carrier and first-sideband heights versus drive frequency.
    /// Without input files the bundled synthetic dataset is generated and fitted.
    FitSidebands {
        #[command(flatten)]
        common: Common,
        #[arg(long, requires = "sideband")]
        carrier: Option<PathBuf>,
        #[arg(long, requires = "carrier")]
        sideband: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, value_enum)]
        scale: Option<ScaleArg>,
    },
    /// Fit the Bloch model to a repumper-detuning scan. Without a data file
    /// the bundled synthetic scan is generated and fitted.
    FitScan {
        #[command(flatten)]
        common: Common,
        /// CSV with columns detuning_hz,p_population.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum, value_delimiter = ',')]
        free: Option<Vec<ParamArg>>,
        /// Noise of the bundled scan, as a fraction of its maximum.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Micromotion modulation index, sideband ratios and detection limit.
    Micromotion {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "mod_index")]
        amplitude_nm: Option<f64>,
        #[arg(long)]
        mod_index: Option<f64>,
        /// SNR at which the detection limit is quoted.
        #[arg(long)]
        snr_db: Option<f64>,
        /// Highest sideband order reported.
        #[arg(long)]
        orders: Option<u32>,
        /// Also write an analyzer trace of each line.
        #[arg(long)]
        traces: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Scan { .. } => "scan",
            Command::CoolingRate { .. } => "cooling-rate",
            Command::FitSidebands { .. } => "fit-sidebands",
            Command::FitScan { .. } => "fit-scan",
            Command::Micromotion { .. } => "micromotion",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Spectrum { common, .. }
            | Command::Scan { common, .. }
            | Command::CoolingRate { common, .. }
            | Command::FitSidebands { common, .. }
            | Command::FitScan { common, .. }
            | Command::Micromotion { common, .. } => common,
        }
    }
}
