//! Maximum-likelihood joint detection of pulse selection and symbols.
//!
//! Two equivalent paths are provided. [`Detector::Direct`] evaluates the
//! residual `||r - h x||^2` over all `L` samples for every candidate.
//! [`Detector::Correlator`] projects `r` onto the `n` basis pulses once and
//! scores candidates from those projections and the pulse Gram matrix.
//!
//! Candidates are visited in (row, labels) lexicographic order and a later
//! candidate only wins if it improves the best metric by more than a
//! relative tolerance, so exact ties go to the lowest pulse row, then the
//! lowest symbol labels.

use std::f64::consts::SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modem::{ImModem, PulseSet};

/// Relative tolerance below which two metrics count as tied.
pub const TIE_RTOL: f64 = 1e-12;

/// Above this constellation size the correlator path solves the second GPIM
/// symbol by nearest-point slicing instead of enumerating it.
pub const GPIM_ENUMERATE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Direct,
    #[default]
    Correlator,
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detector::Direct => "direct",
            Detector::Correlator => "correlator",
        })
    }
}

impl std::str::FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "correlator" => Ok(Self::Correlator),
            other => Err(Error::Config(format!("unknown detector `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub row: usize,
    pub pulse_indices: Vec<usize>,
    pub labels: Vec<usize>,
    pub symbols: Vec<Complex64>,
    /// `||r - h x||^2` of the chosen candidate.
    pub metric: f64,
    pub decoded_bits: Vec<bool>,
}

fn norm_sqr(r: &[Complex64]) -> f64 {
    r.iter().map(|v| v.norm_sqr()).sum()
}

fn tie_tolerance(r: &[Complex64], h: Complex64) -> f64 {
    TIE_RTOL * (norm_sqr(r) + h.norm_sqr())
}

/// `||r - h x||^2` for candidate `(row, labels)`, computed sample by sample.
pub fn residual(r: &[Complex64], h: Complex64, modem: &ImModem, row: usize, labels: &[usize]) -> f64 {
    let mut x = vec![Complex64::new(0.0, 0.0); r.len()];
    modem.synthesize_into(row, labels, &mut x);
    r.iter().zip(&x).map(|(&rv, &xv)| (rv - h * xv).norm_sqr()).sum()
}

fn finish(modem: &ImModem, r: &[Complex64], h: Complex64, row: usize, labels: Vec<usize>) -> DetectionResult {
    DetectionResult {
        row,
        pulse_indices: modem.table().row(row).to_vec(),
        symbols: labels.iter().map(|&l| modem.constellation().point(l)).collect(),
        metric: residual(r, h, modem, row, &labels),
        decoded_bits: modem.demap_labels(row, &labels),
        labels,
    }
}

fn require_k(modem: &ImModem, k: usize) -> Result<()> {
    if modem.k() != k {
        return Err(Error::WrongActiveCount {
            expected: k,
            got: modem.k(),
        });
    }
    Ok(())
}

/// Exhaustive direct-residual ML for PIM.
pub fn ml_detect_pim(r: &[Complex64], h: Complex64, modem: &ImModem) -> Result<DetectionResult> {
    require_k(modem, 1)?;
    let tol = tie_tolerance(r, h);
    let c = modem.constellation();
    let mut best = (f64::INFINITY, 0, 0);
    for row in 0..modem.table().rows().len() {
        let basis = modem.pulses().basis(modem.table().row(row)[0]);
        for label in 0..c.order() {
            let hs = h * c.point(label);
            let mut metric = 0.0;
            for (&rv, &b) in r.iter().zip(basis) {
                metric += (rv - hs * b).norm_sqr();
                if metric >= best.0 - tol {
                    break;
                }
            }
            if metric < best.0 - tol {
                best = (metric, row, label);
            }
        }
    }
    Ok(finish(modem, r, h, best.1, vec![best.2]))
}

/// Exhaustive direct-residual ML for GPIM.
pub fn ml_detect_gpim(r: &[Complex64], h: Complex64, modem: &ImModem) -> Result<DetectionResult> {
    require_k(modem, 2)?;
    let tol = tie_tolerance(r, h);
    let c = modem.constellation();
    let gain = h / SQRT_2;
    let mut partial = vec![Complex64::new(0.0, 0.0); r.len()];
    let mut best = (f64::INFINITY, 0, 0, 0);
    for row in 0..modem.table().rows().len() {
        let sel = modem.table().row(row);
        let (bj, bl) = (modem.pulses().basis(sel[0]), modem.pulses().basis(sel[1]));
        for a in 0..c.order() {
            let ha = gain * c.point(a);
            for ((p, &rv), &b) in partial.iter_mut().zip(r).zip(bj) {
                *p = rv - ha * b;
            }
            for q in 0..c.order() {
                let hq = gain * c.point(q);
                let mut metric = 0.0;
                for (&p, &b) in partial.iter().zip(bl) {
                    metric += (p - hq * b).norm_sqr();
                    if metric >= best.0 - tol {
                        break;
                    }
                }
                if metric < best.0 - tol {
                    best = (metric, row, a, q);
                }
            }
        }
    }
    Ok(finish(modem, r, h, best.1, vec![best.2, best.3]))
}

/// Projections `<r, psi_m>` of the received vector onto each unit-norm pulse.
pub fn correlator_stats(r: &[Complex64], pulses: &PulseSet) -> Vec<Complex64> {
    (0..pulses.len())
        .map(|m| r.iter().zip(pulses.basis(m)).map(|(&rv, &b)| rv * b).sum())
        .collect()
}

/// PIM ML from the pulse projections.
pub fn ml_detect_pim_correlator(r: &[Complex64], h: Complex64, modem: &ImModem) -> Result<DetectionResult> {
    require_k(modem, 1)?;
    let y = correlator_stats(r, modem.pulses());
    let base = norm_sqr(r);
    let tol = tie_tolerance(r, h);
    let gram = modem.pulses().gram();
    let c = modem.constellation();
    let h2 = h.norm_sqr();
    let mut best = (f64::INFINITY, 0, 0);
    for row in 0..modem.table().rows().len() {
        let j = modem.table().row(row)[0];
        let hy = h.conj() * y[j];
        for label in 0..c.order() {
            let s = c.point(label);
            let metric = base + h2 * s.norm_sqr() * gram[j][j] - 2.0 * (s.conj() * hy).re;
            if metric < best.0 - tol {
                best = (metric, row, label);
            }
        }
    }
    Ok(finish(modem, r, h, best.1, vec![best.2]))
}

/// GPIM ML from the pulse projections.
///
/// The metric of candidate `(j, l, s_a, s_q)` is
/// `||r||^2 + A(s_a) + B(s_q) + |h|^2 G_jl Re(s_a conj(s_q))`. For large
/// constellations the best `s_q` given `s_a` is the point nearest to
/// `w / c` with `c = |h|^2 G_ll / 2` and
/// `w = conj(h) y_l / sqrt(2) - |h|^2 G_jl s_a / 2`.
pub fn ml_detect_gpim_correlator(r: &[Complex64], h: Complex64, modem: &ImModem) -> Result<DetectionResult> {
    require_k(modem, 2)?;
    let y = correlator_stats(r, modem.pulses());
    let base = norm_sqr(r);
    let tol = tie_tolerance(r, h);
    let gram = modem.pulses().gram();
    let c = modem.constellation();
    let h2 = h.norm_sqr();
    let enumerate = c.order() <= GPIM_ENUMERATE_LIMIT;
    let mut best = (f64::INFINITY, 0, 0, 0);
    let mut slot_b = vec![0.0; c.order()];
    for row in 0..modem.table().rows().len() {
        let sel = modem.table().row(row);
        let (j, l) = (sel[0], sel[1]);
        let (hyj, hyl) = (h.conj() * y[j], h.conj() * y[l]);
        let cross = h2 * gram[j][l];
        for (q, b) in slot_b.iter_mut().enumerate() {
            let s = c.point(q);
            *b = 0.5 * h2 * s.norm_sqr() * gram[l][l] - SQRT_2 * (s.conj() * hyl).re;
        }
        for a in 0..c.order() {
            let sa = c.point(a);
            let slot_a = base + 0.5 * h2 * sa.norm_sqr() * gram[j][j] - SQRT_2 * (sa.conj() * hyj).re;
            let score = |q: usize| slot_a + slot_b[q] + cross * (sa * c.point(q).conj()).re;
            if enumerate {
                for q in 0..c.order() {
                    let metric = score(q);
                    if metric < best.0 - tol {
                        best = (metric, row, a, q);
                    }
                }
            } else {
                let curv = 0.5 * h2 * gram[l][l];
                let w = hyl / SQRT_2 - 0.5 * cross * sa;
                let q = c.nearest(w / curv);
                let metric = score(q);
                if metric < best.0 - tol {
                    best = (metric, row, a, q);
                }
            }
        }
    }
    Ok(finish(modem, r, h, best.1, vec![best.2, best.3]))
}

/// Dispatches on the modem's active-pulse count and the chosen path.
pub fn detect(r: &[Complex64], h: Complex64, modem: &ImModem, detector: Detector) -> Result<DetectionResult> {
    match (modem.k(), detector) {
        (1, Detector::Direct) => ml_detect_pim(r, h, modem),
        (1, Detector::Correlator) => ml_detect_pim_correlator(r, h, modem),
        (2, Detector::Direct) => ml_detect_gpim(r, h, modem),
        (2, Detector::Correlator) => ml_detect_gpim_correlator(r, h, modem),
        (k, _) => Err(Error::WrongActiveCount { expected: 2, got: k }),
    }
}
