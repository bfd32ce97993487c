//! Reference links at equal bits per channel use: spatial modulation (SM),
//! quadrature SM (QSM) and plain M-PSK/M-QAM.
//!
//! All three use i.i.d. `CN(0, 1)` channel coefficients per transmit/receive
//! antenna pair, held for one channel use, and exhaustive ML detection.
//! Channel matrices are stored receive-major: `h[rx * nt + tx]`.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_gaussian, snr_to_n0};
use crate::error::{Error, Result};
use crate::modem::{to_bits, Constellation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkScheme {
    Classic,
    Sm,
    Qsm,
}

impl fmt::Display for BenchmarkScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchmarkScheme::Classic => "classic",
            BenchmarkScheme::Sm => "sm",
            BenchmarkScheme::Qsm => "qsm",
        })
    }
}

/// Up to two active antennas with their (complex) drive values.
type TxPattern = [(usize, Complex64); 2];

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    scheme: BenchmarkScheme,
    tx_antennas: usize,
    rx_antennas: usize,
    constellation: Constellation,
    patterns: Vec<TxPattern>,
}

impl BenchmarkConfig {
    pub fn new(
        scheme: BenchmarkScheme,
        tx_antennas: usize,
        rx_antennas: usize,
        constellation: Constellation,
    ) -> Result<Self> {
        let tx_antennas = if scheme == BenchmarkScheme::Classic { 1 } else { tx_antennas };
        if !tx_antennas.is_power_of_two() {
            return Err(Error::AntennaCount(tx_antennas));
        }
        // a vanishing real or imaginary part hides the antenna it was routed to
        if scheme == BenchmarkScheme::Qsm && constellation.points().iter().any(|s| s.re.abs() < 1e-9 || s.im.abs() < 1e-9) {
            return Err(Error::Config(format!(
                "QSM needs points off both axes; {}-{} has points on an axis",
                constellation.order(),
                constellation.kind()
            )));
        }
        if rx_antennas == 0 {
            return Err(Error::Config("at least one receive antenna is required".into()));
        }
        let mut cfg = Self {
            scheme,
            tx_antennas,
            rx_antennas,
            constellation,
            patterns: Vec::new(),
        };
        cfg.patterns = (0..1usize << cfg.bits_per_use()).map(|m| cfg.pattern(m)).collect();
        Ok(cfg)
    }

    pub fn scheme(&self) -> BenchmarkScheme {
        self.scheme
    }

    pub fn tx_antennas(&self) -> usize {
        self.tx_antennas
    }

    pub fn rx_antennas(&self) -> usize {
        self.rx_antennas
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn antenna_bits(&self) -> usize {
        let per = self.tx_antennas.trailing_zeros() as usize;
        match self.scheme {
            BenchmarkScheme::Classic => 0,
            BenchmarkScheme::Sm => per,
            BenchmarkScheme::Qsm => 2 * per,
        }
    }

    pub fn bits_per_use(&self) -> usize {
        self.antenna_bits() + self.constellation.bits_per_symbol()
    }

    /// Rejects a configuration whose bit split does not add up to `target`.
    pub fn check_bpcu(&self, target: usize) -> Result<()> {
        if self.bits_per_use() != target {
            return Err(Error::Config(format!(
                "{} with nt = {}, M = {} carries {} bits per use, not {target}",
                self.scheme,
                self.tx_antennas,
                self.constellation.order(),
                self.bits_per_use()
            )));
        }
        Ok(())
    }

    /// Message layout: `[antenna bits | symbol bits]`; for QSM the antenna
    /// bits are `[real-part antenna | imaginary-part antenna]`.
    fn pattern(&self, message: usize) -> TxPattern {
        let b = self.constellation.bits_per_symbol();
        let s = self.constellation.point(message & ((1 << b) - 1));
        let antennas = message >> b;
        let zero = Complex64::new(0.0, 0.0);
        match self.scheme {
            BenchmarkScheme::Classic => [(0, s), (0, zero)],
            BenchmarkScheme::Sm => [(antennas, s), (0, zero)],
            BenchmarkScheme::Qsm => {
                let per = self.tx_antennas.trailing_zeros();
                let (re_ant, im_ant) = (antennas >> per, antennas & (self.tx_antennas - 1));
                if re_ant == im_ant {
                    [(re_ant, s), (0, zero)]
                } else {
                    [(re_ant, Complex64::new(s.re, 0.0)), (im_ant, Complex64::new(0.0, s.im))]
                }
            }
        }
    }

    /// Transmit vector over the `nt` antennas.
    pub fn tx_vector(&self, message: usize) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); self.tx_antennas];
        for (a, v) in self.patterns[message] {
            x[a] += v;
        }
        x
    }

    /// Noise-free receive vector `H x`.
    pub fn receive(&self, h: &[Complex64], message: usize) -> Vec<Complex64> {
        let nt = self.tx_antennas;
        (0..self.rx_antennas)
            .map(|rx| self.patterns[message].iter().map(|&(a, v)| h[rx * nt + a] * v).sum())
            .collect()
    }

    /// Exhaustive ML; ties go to the lowest message index.
    pub fn detect(&self, h: &[Complex64], y: &[Complex64]) -> usize {
        let nt = self.tx_antennas;
        let mut best = (f64::INFINITY, 0);
        for (m, pat) in self.patterns.iter().enumerate() {
            let metric: f64 = y
                .iter()
                .enumerate()
                .map(|(rx, &yr)| {
                    let hx: Complex64 = pat.iter().map(|&(a, v)| h[rx * nt + a] * v).sum();
                    (yr - hx).norm_sqr()
                })
                .sum();
            if metric < best.0 {
                best = (metric, m);
            }
        }
        best.1
    }

    /// Random `nr x nt` channel.
    pub fn draw_channel<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        (0..self.rx_antennas * self.tx_antennas)
            .map(|_| complex_gaussian(rng, 1.0))
            .collect()
    }

    /// One channel use through `H` at `Es/N0 = snr_db`, returning the sent
    /// and the detected message.
    pub fn run_message<R: Rng + ?Sized>(&self, h: &[Complex64], snr_db: f64, rng: &mut R) -> (usize, usize) {
        let message = rng.random_range(0..self.patterns.len());
        let var = snr_to_n0(snr_db, 1.0) / 2.0;
        let mut y = self.receive(h, message);
        if var > 0.0 {
            y.iter_mut().for_each(|v| *v += complex_gaussian(rng, var));
        }
        (message, self.detect(h, &y))
    }

    fn run_trial<R: Rng + ?Sized>(&self, h: &[Complex64], snr_db: f64, rng: &mut R) -> (Vec<bool>, Vec<bool>) {
        let (tx, rx) = self.run_message(h, snr_db, rng);
        (to_bits(tx, self.bits_per_use()), to_bits(rx, self.bits_per_use()))
    }

    fn expect(&self, scheme: BenchmarkScheme) -> Result<()> {
        if self.scheme != scheme {
            return Err(Error::Config(format!("expected a {scheme} benchmark, got {}", self.scheme)));
        }
        Ok(())
    }
}

/// Single-antenna symbol through `r = h s + n` (per receive antenna).
pub fn run_classic_trial<R: Rng + ?Sized>(
    cfg: &BenchmarkConfig,
    h: &[Complex64],
    snr_db: f64,
    rng: &mut R,
) -> Result<(Vec<bool>, Vec<bool>)> {
    cfg.expect(BenchmarkScheme::Classic)?;
    Ok(cfg.run_trial(h, snr_db, rng))
}

pub fn run_sm_trial<R: Rng + ?Sized>(
    cfg: &BenchmarkConfig,
    h: &[Complex64],
    snr_db: f64,
    rng: &mut R,
) -> Result<(Vec<bool>, Vec<bool>)> {
    cfg.expect(BenchmarkScheme::Sm)?;
    Ok(cfg.run_trial(h, snr_db, rng))
}

pub fn run_qsm_trial<R: Rng + ?Sized>(
    cfg: &BenchmarkConfig,
    h: &[Complex64],
    snr_db: f64,
    rng: &mut R,
) -> Result<(Vec<bool>, Vec<bool>)> {
    cfg.expect(BenchmarkScheme::Qsm)?;
    Ok(cfg.run_trial(h, snr_db, rng))
}
