//! Experiment configuration, read from a flat TOML file.
//!
//! ```toml
//! scheme = "gpim"
//! n = 4
//! modulation = "qam"
//! m = 4
//! snr_db_start = 0.0
//! snr_db_stop = 30.0
//! snr_db_step = 2.5
//! seed = 7
//! theory = true
//! ```
//!
//! Every omitted key takes its default; unknown keys are rejected.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{BenchmarkConfig, BenchmarkScheme};
use crate::detection::Detector;
use crate::error::{Error, Result};
use crate::modem::{build_lookup_table, Constellation, ImModem, ModulationKind, PulseSet};
use crate::pulses::{PulseGrid, DEFAULT_HALF_WIDTH, DEFAULT_NUM_SAMPLES, DEFAULT_TRUNCATED_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Pim,
    Gpim,
    Classic,
    Sm,
    Qsm,
}

impl Scheme {
    /// Benchmark counterpart, if this is not a pulse-index scheme.
    pub fn benchmark(self) -> Option<BenchmarkScheme> {
        match self {
            Scheme::Pim | Scheme::Gpim => None,
            Scheme::Classic => Some(BenchmarkScheme::Classic),
            Scheme::Sm => Some(BenchmarkScheme::Sm),
            Scheme::Qsm => Some(BenchmarkScheme::Qsm),
        }
    }

    fn active_pulses(self) -> usize {
        match self {
            Scheme::Gpim => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Pim => "pim",
            Scheme::Gpim => "gpim",
            Scheme::Classic => "classic",
            Scheme::Sm => "sm",
            Scheme::Qsm => "qsm",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pim" => Ok(Scheme::Pim),
            "gpim" => Ok(Scheme::Gpim),
            "classic" => Ok(Scheme::Classic),
            "sm" => Ok(Scheme::Sm),
            "qsm" => Ok(Scheme::Qsm),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scheme: Scheme,
    /// Number of pulses (PIM/GPIM).
    pub n: usize,
    pub modulation: ModulationKind,
    pub m: usize,
    pub num_samples: usize,
    pub half_width: f64,
    /// Samples kept around the pulse center; 0 keeps the full grid.
    pub truncate_to: usize,
    pub snr_db_start: f64,
    pub snr_db_stop: f64,
    pub snr_db_step: f64,
    pub min_bit_errors: u64,
    pub max_bits: u64,
    /// Stop the sweep after the first point whose BER falls below this value.
    pub ber_floor: Option<f64>,
    pub seed: u64,
    pub workers: usize,
    /// Channel uses per worker between stopping-rule checks.
    pub batch: u64,
    pub detector: Detector,
    pub noiseless: bool,
    /// Co-generate the union bound (PIM/GPIM only).
    pub theory: bool,
    /// Transmit antennas (SM/QSM).
    pub nt: usize,
    /// Receive antennas (benchmarks).
    pub nr: usize,
    /// Required bits per channel use, checked when set.
    pub target_bpcu: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Pim,
            n: 4,
            modulation: ModulationKind::Psk,
            m: 4,
            num_samples: DEFAULT_NUM_SAMPLES,
            half_width: DEFAULT_HALF_WIDTH,
            truncate_to: DEFAULT_TRUNCATED_LEN,
            snr_db_start: 0.0,
            snr_db_stop: 30.0,
            snr_db_step: 5.0,
            min_bit_errors: 100,
            max_bits: 100_000_000,
            ber_floor: None,
            seed: 1,
            workers: 1,
            batch: 2000,
            detector: Detector::Correlator,
            noiseless: false,
            theory: false,
            nt: 4,
            nr: 1,
            target_bpcu: None,
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.snr_db_step > 0.0 && self.snr_db_step.is_finite()) {
            return bad(format!("snr_db_step must be positive, got {}", self.snr_db_step));
        }
        if !(self.snr_db_start.is_finite() && self.snr_db_stop.is_finite()) || self.snr_db_stop < self.snr_db_start {
            return bad(format!(
                "snr sweep [{}, {}] is empty",
                self.snr_db_start, self.snr_db_stop
            ));
        }
        if self.min_bit_errors == 0 || self.max_bits == 0 || self.batch == 0 {
            return bad("min_bit_errors, max_bits and batch must be positive".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if let Some(floor) = self.ber_floor {
            if !(floor > 0.0 && floor < 1.0) {
                return bad(format!("ber_floor must lie in (0, 1), got {floor}"));
            }
        }
        if self.theory && self.scheme.benchmark().is_some() {
            return bad(format!("no union bound is available for {}", self.scheme));
        }
        // building the objects runs every domain check
        let bpcu = match self.scheme.benchmark() {
            Some(_) => self.benchmark()?.bits_per_use(),
            None => self.modem()?.bits_per_use(),
        };
        if let Some(target) = self.target_bpcu {
            if bpcu != target {
                return bad(format!("{} carries {bpcu} bits per use, target is {target}", self.scheme));
            }
        }
        Ok(())
    }

    /// SNR points `start + i step` up to `stop` (inclusive, with rounding slack).
    pub fn snr_points(&self) -> Vec<f64> {
        let count = ((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.snr_db_start + i as f64 * self.snr_db_step).collect()
    }

    pub fn pulse_grid(&self) -> PulseGrid {
        PulseGrid {
            num_samples: self.num_samples,
            half_width: self.half_width,
            truncate_to: (self.truncate_to > 0).then_some(self.truncate_to),
        }
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::new(self.modulation, self.m)
    }

    /// PIM/GPIM modem described by this configuration.
    pub fn modem(&self) -> Result<ImModem> {
        if self.scheme.benchmark().is_some() {
            return Err(Error::Config(format!("{} is not a pulse index scheme", self.scheme)));
        }
        let table = build_lookup_table(self.n, self.scheme.active_pulses())?;
        let pulses = PulseSet::new(self.pulse_grid().family(self.n)?)?;
        ImModem::new(table, self.constellation()?, pulses)
    }

    pub fn benchmark(&self) -> Result<BenchmarkConfig> {
        let scheme = self
            .scheme
            .benchmark()
            .ok_or_else(|| Error::Config(format!("{} is not a benchmark scheme", self.scheme)))?;
        BenchmarkConfig::new(scheme, self.nt, self.nr, self.constellation()?)
    }

    /// `key = value` lines covering every field, in declaration order.
    pub fn echo(&self) -> Vec<String> {
        toml::to_string(self)
            .expect("configuration always serializes")
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::to_owned)
            .collect()
    }
}
