//! Scenario configuration and its flat `key = value` text format.
//!
//! Keys match the field names used in experiment files (`M`, `K`, `P_T_dbw`,
//! ...). `#` starts a comment. Values that are derived from other keys accept
//! the literal `auto`.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::estimator::ComponentCount;
use crate::simulator::{Sweep, SweepAxis};
use crate::{db_to_linear, Error, Result};

/// How the measured SINR of a trial is read out for P_T and SNR sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    /// SINR at the last snapshot.
    Final,
    /// Mean linear SINR over all snapshots of the trial.
    TimeAverage,
}

/// Temporal behaviour of the true channels within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    /// Channels drawn once per trial; CSI errors are redrawn every snapshot.
    QuasiStatic,
    /// Channels redrawn independently at every snapshot.
    Block,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Number of relays.
    pub m: usize,
    /// Number of sources; source 1 is the desired one.
    pub k: usize,
    /// Explicit source powers in watts; `None` derives them from SNR/INR.
    pub source_powers: Option<Vec<f64>>,
    /// Explicit noise power in watts; `None` derives it from `snr_db`.
    pub p_n: Option<f64>,
    pub snr_db: f64,
    pub inr_db: f64,
    /// Power ratio of the strongest interferer over each of the others.
    pub interferer_power_ratio: f64,
    pub p_t_dbw: f64,
    pub epsilon_max: f64,
    pub rho: f64,
    pub l_db: f64,
    pub sigma_s_db: f64,
    pub snapshots: usize,
    pub trials: usize,
    pub n_components: ComponentCount,
    /// Also corrupt `g` when injecting CSI mismatch.
    pub g_mismatch: bool,
    /// Solve against `P_n I + Ũ` instead of `P_n I + P_T Ũ`; the prediction
    /// then only matches the evaluated SINR at `P_T = 1`.
    pub literal_denominator: bool,
    pub seed: u64,
    pub sinr_readout: Readout,
    pub fading: Fading,
    pub sweep: Sweep,
}

/// Desired-source transmit power when powers are derived from SNR/INR.
pub const REFERENCE_SOURCE_POWER: f64 = 1.0;

const REQUIRED_KEYS: [&str; 2] = ["M", "K"];

impl Default for ScenarioConfig {
    /// The equal-power interferer scenario swept over `P_T`.
    fn default() -> Self {
        ScenarioConfig {
            m: 8,
            k: 3,
            source_powers: None,
            p_n: None,
            snr_db: 10.0,
            inr_db: 10.0,
            interferer_power_ratio: 1.0,
            p_t_dbw: 1.0,
            epsilon_max: 0.5,
            rho: 2.0,
            l_db: 10.0,
            sigma_s_db: 3.0,
            snapshots: 100,
            trials: 500,
            n_components: ComponentCount::Fixed(1),
            g_mismatch: false,
            literal_denominator: false,
            seed: 0x5eed_cc5b,
            sinr_readout: Readout::Final,
            fading: Fading::QuasiStatic,
            sweep: Sweep {
                axis: SweepAxis::PtDbw,
                grid: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            },
        }
    }
}

impl ScenarioConfig {
    /// SINR versus `P_T` in 1..5 dBW, SNR = INR = 10 dB, ε_max = 0.5.
    pub fn pt_sweep() -> Self {
        Self::default()
    }

    /// Strong unbalanced interferers (INR 20 dB, 10:1 split), P_T = 1 dBW,
    /// ε_max = 0.2, swept over SNR in 0..20 dB.
    pub fn snr_sweep() -> Self {
        ScenarioConfig {
            inr_db: 20.0,
            interferer_power_ratio: 10.0,
            p_t_dbw: 1.0,
            epsilon_max: 0.2,
            sweep: Sweep {
                axis: SweepAxis::SnrDb,
                grid: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            },
            ..Self::default()
        }
    }

    /// Same interference scenario as [`Self::snr_sweep`] at SNR = 10 dB,
    /// reported per snapshot.
    pub fn snapshot_sweep() -> Self {
        ScenarioConfig {
            snr_db: 10.0,
            sweep: Sweep {
                axis: SweepAxis::Snapshots,
                grid: vec![1.0, 5.0, 10.0, 20.0, 50.0, 100.0],
            },
            ..Self::snr_sweep()
        }
    }

    pub fn p_t(&self) -> f64 {
        db_to_linear(self.p_t_dbw)
    }

    fn desired_power(&self) -> f64 {
        match &self.source_powers {
            Some(p) => p[0],
            None => REFERENCE_SOURCE_POWER,
        }
    }

    /// Noise power shared by the relays and the destination.
    pub fn noise_power(&self) -> f64 {
        self.p_n
            .unwrap_or_else(|| self.desired_power() / db_to_linear(self.snr_db))
    }

    /// Transmit power of every source, desired source first.
    ///
    /// Derived interferer powers keep their sum at `(K-1)·INR·P_n` while the
    /// first interferer is `interferer_power_ratio` times stronger than each of
    /// the others.
    pub fn source_power_vec(&self) -> Vec<f64> {
        if let Some(p) = &self.source_powers {
            return p.clone();
        }
        let mut powers = vec![REFERENCE_SOURCE_POWER];
        let n_int = self.k.saturating_sub(1);
        if n_int > 0 {
            let total = n_int as f64 * db_to_linear(self.inr_db) * self.noise_power();
            let weak = total / (self.interferer_power_ratio + n_int as f64 - 1.0);
            powers.push(self.interferer_power_ratio * weak);
            powers.extend(std::iter::repeat_n(weak, n_int - 1));
        }
        powers
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be positive and finite, got {v}")))
            }
        }
        fn finite(key: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, "must be finite"))
            }
        }
        if self.m == 0 {
            return Err(Error::config("M", "must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::config("K", "must be at least 1"));
        }
        if self.snapshots == 0 {
            return Err(Error::config("snapshots", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if let Some(p) = &self.source_powers {
            if p.len() != self.k {
                return Err(Error::config(
                    "source_powers",
                    format!("expected {} entries, found {}", self.k, p.len()),
                ));
            }
            for &v in p {
                positive("source_powers", v)?;
            }
        }
        if let Some(p) = self.p_n {
            positive("P_n", p)?;
        }
        finite("snr_db", self.snr_db)?;
        finite("inr_db", self.inr_db)?;
        positive("interferer_power_ratio", self.interferer_power_ratio)?;
        finite("P_T_dbw", self.p_t_dbw)?;
        positive("epsilon_max", self.epsilon_max)?;
        finite("rho", self.rho)?;
        finite("L_db", self.l_db)?;
        if !(self.sigma_s_db.is_finite() && self.sigma_s_db >= 0.0) {
            return Err(Error::config("sigma_s_db", "must be nonnegative"));
        }
        if let ComponentCount::Fixed(n) = self.n_components {
            if n == 0 || n > self.m {
                return Err(Error::config(
                    "n_components",
                    format!("must be auto or in 1..={}, got {n}", self.m),
                ));
            }
        }
        self.sweep.validate(self.snapshots)?;
        Ok(())
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |msg: &str| Error::config(key, format!("{msg}, got `{value}`"));
        let float = || f64::from_str(value).map_err(|_| bad("expected a real number"));
        let uint = || usize::from_str(value).map_err(|_| bad("expected a nonnegative integer"));
        let flag = || match value {
            "true" | "1" | "yes" | "on" => Ok(true),
            "false" | "0" | "no" | "off" => Ok(false),
            _ => Err(bad("expected true or false")),
        };
        match key {
            "M" => self.m = uint()?,
            "K" => self.k = uint()?,
            "source_powers" => {
                self.source_powers = if value == "auto" {
                    None
                } else {
                    Some(
                        value
                            .split(',')
                            .map(|s| f64::from_str(s.trim()))
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| bad("expected auto or a comma separated list"))?,
                    )
                }
            }
            "P_n" => self.p_n = if value == "auto" { None } else { Some(float()?) },
            "snr_db" => self.snr_db = float()?,
            "inr_db" => self.inr_db = float()?,
            "interferer_power_ratio" => self.interferer_power_ratio = float()?,
            "P_T_dbw" => self.p_t_dbw = float()?,
            "epsilon_max" => self.epsilon_max = float()?,
            "rho" => self.rho = float()?,
            "L_db" => self.l_db = float()?,
            "sigma_s_db" => self.sigma_s_db = float()?,
            "snapshots" => self.snapshots = uint()?,
            "trials" => self.trials = uint()?,
            "n_components" => {
                self.n_components = if value == "auto" {
                    ComponentCount::Auto
                } else {
                    ComponentCount::Fixed(uint()?)
                }
            }
            "g_mismatch" => self.g_mismatch = flag()?,
            "literal_denominator" => self.literal_denominator = flag()?,
            "seed" => self.seed = u64::from_str(value).map_err(|_| bad("expected a u64"))?,
            "sinr_readout" => {
                self.sinr_readout = match value {
                    "final" => Readout::Final,
                    "time_average" => Readout::TimeAverage,
                    _ => return Err(bad("expected final or time_average")),
                }
            }
            "fading" => {
                self.fading = match value {
                    "quasi_static" => Fading::QuasiStatic,
                    "block" => Fading::Block,
                    _ => return Err(bad("expected quasi_static or block")),
                }
            }
            "sweep_axis" => {
                self.sweep.axis = SweepAxis::from_str(value).map_err(|e| bad(&e))?
            }
            "sweep_grid" => {
                self.sweep.grid = Sweep::parse_grid(value).map_err(|e| bad(&e))?
            }
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Parses a config file. `M` and `K` must be present; every other key
    /// falls back to [`ScenarioConfig::default`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ScenarioConfig::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            let key = key.trim();
            config.set(key, value)?;
            seen.push(key.to_owned());
        }
        for key in REQUIRED_KEYS {
            if !seen.iter().any(|k| k == key) {
                return Err(Error::config(key, "required key is missing"));
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Serialises every key, defaults included, in a form [`Self::parse`]
    /// reads back to an identical config.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let powers = match &self.source_powers {
            None => "auto".to_owned(),
            Some(p) => p.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(","),
        };
        let p_n = self.p_n.map_or("auto".to_owned(), |v| format!("{v:?}"));
        let n_components = match self.n_components {
            ComponentCount::Auto => "auto".to_owned(),
            ComponentCount::Fixed(n) => n.to_string(),
        };
        let readout = match self.sinr_readout {
            Readout::Final => "final",
            Readout::TimeAverage => "time_average",
        };
        let fading = match self.fading {
            Fading::QuasiStatic => "quasi_static",
            Fading::Block => "block",
        };
        let _ = writeln!(s, "M = {}", self.m);
        let _ = writeln!(s, "K = {}", self.k);
        let _ = writeln!(s, "source_powers = {powers}");
        let _ = writeln!(s, "P_n = {p_n}");
        let _ = writeln!(s, "snr_db = {:?}", self.snr_db);
        let _ = writeln!(s, "inr_db = {:?}", self.inr_db);
        let _ = writeln!(s, "interferer_power_ratio = {:?}", self.interferer_power_ratio);
        let _ = writeln!(s, "P_T_dbw = {:?}", self.p_t_dbw);
        let _ = writeln!(s, "epsilon_max = {:?}", self.epsilon_max);
        let _ = writeln!(s, "rho = {:?}", self.rho);
        let _ = writeln!(s, "L_db = {:?}", self.l_db);
        let _ = writeln!(s, "sigma_s_db = {:?}", self.sigma_s_db);
        let _ = writeln!(s, "snapshots = {}", self.snapshots);
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "n_components = {n_components}");
        let _ = writeln!(s, "g_mismatch = {}", self.g_mismatch);
        let _ = writeln!(s, "literal_denominator = {}", self.literal_denominator);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "sinr_readout = {readout}");
        let _ = writeln!(s, "fading = {fading}");
        let _ = writeln!(s, "sweep_axis = {}", self.sweep.axis);
        let _ = writeln!(s, "sweep_grid = {}", self.sweep.grid_text());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_scenario() {
        let c = ScenarioConfig::default();
        assert_eq!((c.m, c.k), (8, 3));
        assert_eq!(c.rho, 2.0);
        assert_eq!(c.l_db, 10.0);
        assert_eq!(c.sigma_s_db, 3.0);
        assert_eq!(c.snapshots, 100);
        assert!((c.noise_power() - 0.1).abs() < 1e-15);
        let p = c.source_power_vec();
        assert_eq!(p.len(), 3);
        assert!((p[1] - 1.0).abs() < 1e-12 && (p[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbalanced_interferers_keep_sum_and_ratio() {
        let c = ScenarioConfig::snr_sweep();
        let p = c.source_power_vec();
        let pn = c.noise_power();
        assert!((p[1] / p[2] - 10.0).abs() < 1e-12);
        assert!(((p[1] + p[2]) / pn - 200.0).abs() < 1e-9);
    }

    #[test]
    fn text_round_trip() {
        let mut c = ScenarioConfig::snapshot_sweep();
        c.source_powers = Some(vec![1.5, 0.25, 3.0]);
        c.p_n = Some(0.125);
        c.n_components = ComponentCount::Auto;
        c.seed = u64::MAX;
        let back = ScenarioConfig::parse(&c.to_config_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn missing_m_names_the_key() {
        let err = ScenarioConfig::parse("K = 3\n").unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "M"), "{err}");
    }

    #[test]
    fn unknown_and_malformed_keys_are_rejected() {
        assert!(matches!(
            ScenarioConfig::parse("M = 8\nK = 3\nbogus = 1\n"),
            Err(Error::Config { key, .. }) if key == "bogus"
        ));
        assert!(matches!(
            ScenarioConfig::parse("M = 8\nK = x\n"),
            Err(Error::Config { key, .. }) if key == "K"
        ));
        assert!(matches!(
            ScenarioConfig::parse("M = 8\nK = 3\nn_components = 9\n"),
            Err(Error::Config { key, .. }) if key == "n_components"
        ));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let c = ScenarioConfig::parse("# header\nM = 4 # relays\n\nK = 2\n").unwrap();
        assert_eq!((c.m, c.k), (4, 2));
    }
}
