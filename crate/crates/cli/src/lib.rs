//! Command-line front end for synthetic measurements, scans, fits and the
//! cooling-rate report. Every run writes its outputs and `<command>.config.json`, an echo
//! that can be passed back through `--config` to repeat the run.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;

use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Serialize;

use args::{Cli, Command};
use commands::*;
use config::{resolve, Echo, Metadata, Output};
pub use error::CliError;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command, &argv) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn finish<T: Serialize>(
    command: &Command,
    argv: &[OsString],
    run: &T,
    mut out: Output,
    summary: serde_json::Value,
) -> Result<serde_json::Value, CliError> {
    let name = command.name();
    let echo_name = format!("{}.config.json", name.replace('-', "_"));
    let mut outputs = out.written().to_vec();
    outputs.push(echo_name.clone());
    let echo = Echo {
        metadata: Metadata {
            program: "ionfluor",
            version: env!("CARGO_PKG_VERSION"),
            command: name,
            argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
            outputs,
        },
        run,
    };
    out.json(&echo_name, &echo)?;
    Ok(summary)
}

fn load<T: Default + Serialize + DeserializeOwned>(command: &Command) -> Result<T, CliError> {
    resolve(&T::default(), command.common().config.as_deref())
}

/// Resolves the run configuration (defaults, then file, then flags), runs
/// it and writes the echo. Returns a short summary.
pub fn run(command: &Command, argv: &[OsString]) -> Result<serde_json::Value, CliError> {
    let common = command.common();
    match command {
        Command::Spectrum {
            m_micro,
            no_noise,
            rbw_hz,
            bins,
            averages,
            window,
            snr_db,
            ..
        } => {
            let mut cfg: SpectrumRun = load(command)?;
            cfg.apply(&SpectrumFlags {
                seed: common.seed,
                m_micro: *m_micro,
                no_noise: *no_noise,
                rbw_hz: *rbw_hz,
                bins: *bins,
                averages: *averages,
                window: *window,
                snr_db: *snr_db,
            });
            cfg.finalize()?;
            let mut out = Output::new(&common.out)?;
            let summary = cfg.execute(&mut out)?;
            finish(command, argv, &cfg, out, summary)
        }
        Command::Scan {
            laser,
            axis,
            start_hz,
            stop_hz,
            points,
            ..
        } => {
            let mut cfg: ScanRun = load(command)?;
            apply_laser(&mut cfg.bloch, laser);
            set(&mut cfg.axis, axis.map(Into::into));
            set(&mut cfg.start_hz, *start_hz);
            set(&mut cfg.stop_hz, *stop_hz);
            set(&mut cfg.points, *points);
            let mut out = Output::new(&common.out)?;
            let summary = cfg.execute(&mut out)?;
            finish(command, argv, &cfg, out, summary)
        }
        Command::CoolingRate {
            laser,
            defaults,
            step_hz,
            ..
        } => {
            let mut cfg: CoolingRun = load(command)?;
            if !*defaults {
                apply_laser(&mut cfg.bloch, laser);
                set(&mut cfg.derivative_step_hz, *step_hz);
            }
            let mut out = Output::new(&common.out)?;
            let summary = cfg.execute(&mut out)?;
            finish(command, argv, &cfg, out, summary)
        }
        Command::FitSidebands {
            carrier,
            sideband,
            mode,
            scale,
            ..
        } => {
            let mut cfg: FitSidebandsRun = load(command)?;
            set(&mut cfg.scan.seed, common.seed);
            if let (Some(c), Some(s)) = (carrier, sideband) {
                cfg.carrier_csv = Some(c.display().to_string());
                cfg.sideband_csv = Some(s.display().to_string());
            }
            set(&mut cfg.options.mode, mode.map(Into::into));
            set(&mut cfg.options.scale, scale.map(Into::into));
            let mut out = Output::new(&common.out)?;
            let summary = cfg.execute(&mut out)?;
            finish(command, argv, &cfg, out, summary)
        }
        Command::FitScan { data, free, noise, .. } => {
            let mut cfg: FitScanRun = load(command)?;
            set(&mut cfg.dataset.seed, common.seed);
            set(&mut cfg.dataset.relative_noise, *noise);
            if let Some(d) = data {
                cfg.data_csv = Some(d.display().to_string());
            }
            if let Some(f) = free {
                cfg.spec.free = f.iter().map(|&p| p.into()).collect();
            }
            let mut out = Output::new(&common.out)?;
            let summary = cfg.execute(&mut out)?;
            finish(command, argv, &cfg, out, summary)
        }
        Command::Micromotion {
            amplitude_nm,
            mod_index,
            snr_db,
            orders,
            traces,
            ..
        } => {
            let mut cfg: MicromotionRun = load(command)?;
            set(&mut cfg.seed, common.seed);
            // A flag for one of the two exclusive inputs clears the other.
            if amplitude_nm.is_some() {
                cfg.amplitude_nm = *amplitude_nm;
                cfg.mod_index = None;
            }
            if mod_index.is_some() {
                cfg.mod_index = *mod_index;
                cfg.amplitude_nm = None;
            }
            set(&mut cfg.snr_db, *snr_db);
            set(&mut cfg.orders, *orders);
            if *traces {
                cfg.traces = true;
            }
            let mut out = Output::new(&common.out)?;
            let summary = cfg.execute(&mut out)?;
            finish(command, argv, &cfg, out, summary)
        }
    }
}
