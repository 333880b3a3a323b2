//! Output files: the results CSV, its gnuplot `.dat` mirror and the run manifest.
//!
//! CSV columns are `algorithm,axis_name,axis_value,sinr_db,trials,snapshots,seed`,
//! one row per (algorithm, axis value), LF line endings, reals printed with nine
//! significant digits. The manifest is itself a valid config file: feeding it
//! back to `relaybeam run --config` reproduces the CSV byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};

use crate::config::ScenarioConfig;
use crate::simulator::{Algorithm, SinrReport};
use crate::Result;

pub const CSV_HEADER: [&str; 7] = [
    "algorithm",
    "axis_name",
    "axis_value",
    "sinr_db",
    "trials",
    "snapshots",
    "seed",
];

/// Formats like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan" } else if x > 0.0 { "inf" } else { "-inf" }.to_owned();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_owned()
        } else {
            s.to_owned()
        }
    };
    if (-4..9).contains(&exp) {
        trim(&format!("{:.*}", (8 - exp) as usize, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

pub fn to_csv(report: &SinrReport) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| std::io::Error::other(e);
    writer.write_record(CSV_HEADER).map_err(io)?;
    let axis = report.axis.to_string();
    let trials = report.config.trials.to_string();
    let snapshots = report.config.snapshots.to_string();
    let seed = report.seed.to_string();
    for algorithm in Algorithm::ALL {
        let series = report.series(algorithm);
        for (value, sinr) in report.axis_values.iter().zip(&series.sinr_db) {
            writer
                .write_record([
                    algorithm.name(),
                    &axis,
                    &format_sig9(*value),
                    &format_sig9(*sinr),
                    &trials,
                    &snapshots,
                    &seed,
                ])
                .map_err(io)?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ASCII output"))
}

/// Whitespace-separated columns: axis value then the SINR in dB of each algorithm.
pub fn to_dat(report: &SinrReport) -> String {
    let mut out = format!(
        "# {} {}\n",
        report.axis,
        Algorithm::ALL.map(|a| a.name()).join(" ")
    );
    for (i, value) in report.axis_values.iter().enumerate() {
        out.push_str(&format_sig9(*value));
        for algorithm in Algorithm::ALL {
            out.push(' ');
            out.push_str(&format_sig9(report.series(algorithm).sinr_db[i]));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: ScenarioConfig,
    pub tool_version: String,
    pub seed: u64,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::from("# relaybeam run manifest\n");
        s.push_str(&format!("# tool_version: {}\n", self.tool_version));
        s.push_str(&format!("# seed: {}\n", self.seed));
        s.push_str(&format!(
            "# started: {}\n",
            self.started.to_rfc3339_opts(SecondsFormat::Millis, true)
        ));
        s.push_str(&format!(
            "# finished: {}\n",
            self.finished.to_rfc3339_opts(SecondsFormat::Millis, true)
        ));
        for path in &self.outputs {
            s.push_str(&format!("# output: {}\n", path.display()));
        }
        s.push_str(&self.config.to_config_text());
        s
    }
}

/// Writes `results.csv`, `results.dat` and `manifest.txt` into `out_dir`.
pub fn write_outputs(
    report: &SinrReport,
    out_dir: &Path,
    started: DateTime<Utc>,
) -> Result<RunManifest> {
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("results.csv");
    let dat_path = out_dir.join("results.dat");
    let manifest_path = out_dir.join("manifest.txt");
    fs::write(&csv_path, to_csv(report)?)?;
    fs::write(&dat_path, to_dat(report))?;
    let manifest = RunManifest {
        config: report.config.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        seed: report.seed,
        started,
        finished: Utc::now(),
        outputs: vec![csv_path, dat_path, manifest_path.clone()],
    };
    fs::write(&manifest_path, manifest.to_text())?;
    Ok(manifest)
}
