//! One function per subcommand.

use crate::manifest::RunManifest;
use board_sim::adaptive::{write_coefficients_csv, write_run_csv};
use board_sim::apps::config::{parse_bcm, parse_ident, parse_predict, reseed};
use board_sim::apps::{run_bcm_experiment, run_ident, run_predict, AppError};
use board_sim::board::{AdcModel, Board, DacModel};
use board_sim::dualcore::{mac_budget, FilterKind};
use board_sim::signal::SignalSpec;
use board_sim::vme::{
    parse_script, run_conformance, Backing, ConformanceReport, VmeRam, VmeSlave, BOARD_WINDOW,
};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

/// Board watchdog timeout for VME runs, in steps. Nothing advances the
/// clock during a script, so it never fires.
const VME_WATCHDOG_STEPS: u64 = 1000;
/// Window of the RAM-backed slave.
const RAM_WINDOW: u32 = 0x2_0000;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or invalid configuration.
    Config(String),
    /// Anything that failed after the inputs were accepted.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<AppError> for CliError {
    fn from(e: AppError) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Output directory plus the list of files written to it.
struct OutDir<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl<'a> OutDir<'a> {
    fn create(dir: &'a Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            written: Vec::new(),
        })
    }

    fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let io =
            |e: std::io::Error| CliError::Runtime(format!("cannot write {}: {e}", path.display()));
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        f(&mut w).and_then(|_| w.flush()).map_err(io)?;
        log::info!("wrote {}", path.display());
        self.written.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write(name, |w| w.write_all(text.as_bytes()))
    }

    fn finish(mut self, mut manifest: RunManifest) -> Result<(), CliError> {
        manifest.outputs = std::mem::take(&mut self.written);
        manifest.outputs.push("manifest.toml".into());
        self.text("manifest.toml", &manifest.to_toml())
    }
}

fn noise_seeds(spec: &SignalSpec) -> Vec<u64> {
    spec.components.iter().filter_map(|c| c.seed()).collect()
}

fn manifest_for(
    command: &str,
    argv: &[String],
    config: &Path,
    text: &str,
    out: &Path,
    seed: Option<u64>,
) -> RunManifest {
    let mut m = RunManifest::new(command, argv, out);
    m.config_path = Some(config.display().to_string());
    m.config_text = Some(text.to_string());
    m.seed_override = seed;
    m
}

pub fn bcm(config: &Path, out: &Path, seed: Option<u64>, argv: &[String]) -> Result<(), CliError> {
    let text = read_config(config)?;
    let mut exp = parse_bcm(&text)?;
    if let Some(s) = seed {
        reseed(&mut exp.signal, s);
    }
    let mut manifest = manifest_for("bcm", argv, config, &text, out, seed);
    manifest.noise_seeds = noise_seeds(&exp.signal);

    let report = run_bcm_experiment(&exp)?;
    let mut dir = OutDir::create(out)?;
    dir.write("report.csv", |w| report.write_csv(w))?;
    dir.write("run.csv", |w| write_run_csv(&report.input, &report.run, w))?;
    dir.write("trip.csv", |w| {
        report.trip.write_csv(report.input.rate_hz(), w)
    })?;
    dir.write("coefficients.csv", |w| {
        write_coefficients_csv(&report.run.final_coeffs.b, w)
    })?;
    dir.text("summary.txt", &report.summary())?;
    dir.finish(manifest)?;
    print!("{}", report.summary());
    Ok(())
}

pub fn ident(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    argv: &[String],
) -> Result<(), CliError> {
    let text = read_config(config)?;
    let mut exp = parse_ident(&text)?;
    if let Some(s) = seed {
        reseed(&mut exp.signal, s);
        let used = noise_seeds(&exp.signal).len() as u64;
        exp.noise_seed = s.wrapping_add(used);
    }
    let mut manifest = manifest_for("ident", argv, config, &text, out, seed);
    manifest.noise_seeds = noise_seeds(&exp.signal);
    if exp.noise_sigma_v > 0.0 {
        manifest.noise_seeds.push(exp.noise_seed);
    }

    let outcome = run_ident(&exp)?;
    let mut dir = OutDir::create(out)?;
    dir.write("run.csv", |w| {
        write_run_csv(&outcome.input, &outcome.run, w)
    })?;
    dir.write("coefficients.csv", |w| {
        write_coefficients_csv(&outcome.run.final_coeffs.b, w)
    })?;
    if let Some(a) = &outcome.run.final_coeffs.a {
        dir.write("feedback.csv", |w| write_coefficients_csv(a, w))?;
    }
    dir.text("summary.txt", &outcome.summary())?;
    dir.finish(manifest)?;
    print!("{}", outcome.summary());
    Ok(())
}

pub fn predict(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    argv: &[String],
) -> Result<(), CliError> {
    let text = read_config(config)?;
    let mut exp = parse_predict(&text)?;
    if let Some(s) = seed {
        reseed(&mut exp.signal, s);
    }
    let mut manifest = manifest_for("predict", argv, config, &text, out, seed);
    manifest.noise_seeds = noise_seeds(&exp.signal);

    let outcome = run_predict(&exp)?;
    let mut dir = OutDir::create(out)?;
    dir.write("run.csv", |w| {
        write_run_csv(&outcome.input, &outcome.run, w)
    })?;
    dir.write("coefficients.csv", |w| {
        write_coefficients_csv(&outcome.run.final_coeffs.b, w)
    })?;
    dir.text("summary.txt", &outcome.summary())?;
    dir.finish(manifest)?;
    print!("{}", outcome.summary());
    Ok(())
}

fn conformance_summary(report: &ConformanceReport) -> String {
    let failed: Vec<_> = report.failures().collect();
    let mut s = format!(
        "transactions        {}\npassed              {}\nfailed              {}\nbus cycles          {}\n",
        report.entries.len(),
        report.entries.len() - failed.len(),
        failed.len(),
        report.total_cycles()
    );
    for e in failed {
        let got = if e.detail.is_empty() {
            e.data
                .iter()
                .map(|w| format!(" {w:04X}"))
                .collect::<String>()
        } else {
            format!(" {}", e.detail)
        };
        s += &format!(
            "FAIL line {}: {} expected {}, got {}{got}\n",
            e.line, e.op, e.expected, e.outcome
        );
    }
    s
}

fn run_script<B: Backing>(
    slave: &mut VmeSlave<B>,
    text: &str,
) -> Result<ConformanceReport, CliError> {
    let script = parse_script(text).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(run_conformance(slave, &script))
}

pub fn vme(
    config: &Path,
    out: &Path,
    base: u32,
    on_board: bool,
    argv: &[String],
) -> Result<(), CliError> {
    let text = read_config(config)?;
    let bad_window = |e| CliError::Config(format!("--base {base:08X}: {e}"));
    let report = if on_board {
        let board = Board::new(AdcModel::default(), DacModel::default(), VME_WATCHDOG_STEPS)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        run_script(
            &mut VmeSlave::new(base, BOARD_WINDOW, board).map_err(bad_window)?,
            &text,
        )?
    } else {
        let ram = VmeRam::new(RAM_WINDOW);
        run_script(
            &mut VmeSlave::new(base, RAM_WINDOW, ram).map_err(bad_window)?,
            &text,
        )?
    };
    let manifest = manifest_for("vme", argv, config, &text, out, None);
    let summary = conformance_summary(&report);
    let mut dir = OutDir::create(out)?;
    dir.write("report.csv", |w| report.write_csv(w))?;
    dir.text("summary.txt", &summary)?;
    dir.finish(manifest)?;
    print!("{summary}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "{} conformance expectation(s) failed",
            report.failures().count()
        )))
    }
}

pub fn budget(
    taps: usize,
    kind: FilterKind,
    rate: f64,
    out: Option<&Path>,
    argv: &[String],
) -> Result<(), CliError> {
    if taps == 0 {
        return Err(CliError::Config("taps must be at least 1".into()));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(CliError::Config(format!(
            "rate must be positive, got {rate}"
        )));
    }
    let b = mac_budget(taps, kind, rate);
    print!("{}", b.to_table());
    if let Some(out) = out {
        let mut dir = OutDir::create(out)?;
        dir.text("budget.csv", &b.to_csv())?;
        dir.finish(RunManifest::new("budget", argv, out))?;
    }
    Ok(())
}
