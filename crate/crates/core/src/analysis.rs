//! Union-bound average bit error probability for PIM and GPIM.
//!
//! Every ordered pair of distinct messages contributes its average pairwise
//! error probability over Rayleigh fading, weighted by the Hamming distance
//! of the two bit labels:
//!
//! ```text
//! P <= 1 / (2^p p) * sum_d sum_z N(d, z) * (1 - sqrt(s2 / (1 + s2))) / 2
//! ```
//!
//! The exponent `s2` of each pair is `Es/N0` times a pair coefficient that
//! only depends on which pulses coincide and on the symbols, so the pairs are
//! enumerated once and binned by coefficient; sweeping SNR afterwards only
//! touches the bins.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modem::{Constellation, LookupTable};

/// Largest message length the pair enumeration accepts.
pub const MAX_ENUMERATION_BITS: usize = 16;

/// Channel variance `sigma_h^2`.
const SIGMA_H2: f64 = 1.0;

/// Pair exponent for PIM.
pub fn sigma2_pim(s: Complex64, s_hat: Complex64, same_pulse: bool, es_over_n0: f64) -> f64 {
    let scale = es_over_n0 / 2.0 * SIGMA_H2;
    if same_pulse {
        scale * (s - s_hat).norm_sqr()
    } else {
        scale * (s.norm_sqr() + s_hat.norm_sqr())
    }
}

/// Pair exponent for GPIM; `j_match` / `l_match` say whether the first and
/// second (ascending) pulses of the two selections coincide.
pub fn sigma2_gpim(
    s_i: Complex64,
    s_i_hat: Complex64,
    s_q: Complex64,
    s_q_hat: Complex64,
    j_match: bool,
    l_match: bool,
    es_over_n0: f64,
) -> f64 {
    let scale = es_over_n0 / 2.0 * SIGMA_H2;
    let slot = |s: Complex64, s_hat: Complex64, matched: bool| {
        if matched {
            (s - s_hat).norm_sqr()
        } else {
            s.norm_sqr() + s_hat.norm_sqr()
        }
    };
    scale * (slot(s_i, s_i_hat, j_match) + slot(s_q, s_q_hat, l_match))
}

/// Average pairwise error probability, `(1 - sqrt(s2 / (1 + s2))) / 2`.
pub fn pep(sigma2: f64) -> f64 {
    if sigma2.is_infinite() {
        return 0.0;
    }
    0.5 * (1.0 - (sigma2 / (1.0 + sigma2)).sqrt())
}

/// Union bound for one PIM/GPIM configuration, with the pair enumeration
/// already done.
#[derive(Debug, Clone)]
pub struct UnionBound {
    bits: usize,
    // pair coefficient (as f64 bits, non-negative so ordering is numeric) -> summed N(d, z)
    bins: BTreeMap<u64, u64>,
}

impl UnionBound {
    pub fn new(table: &LookupTable, constellation: &Constellation) -> Result<Self> {
        let k = table.k();
        if k > 2 {
            return Err(Error::WrongActiveCount { expected: 2, got: k });
        }
        let b = constellation.bits_per_symbol();
        let bits = table.index_bits() + k * b;
        if bits > MAX_ENUMERATION_BITS {
            return Err(Error::EnumerationCap {
                bits,
                cap: MAX_ENUMERATION_BITS,
            });
        }
        let count = 1usize << bits;
        let mask = (1usize << b) - 1;
        let split = |m: usize| -> (&[usize], [Complex64; 2]) {
            let row = table.row(m >> (b * k));
            let mut s = [Complex64::new(0.0, 0.0); 2];
            for (t, slot) in s.iter_mut().enumerate().take(k) {
                *slot = constellation.point((m >> (b * (k - 1 - t))) & mask);
            }
            (row, s)
        };
        let per_d: Vec<BTreeMap<u64, u64>> = (0..count)
            .into_par_iter()
            .map(|d| {
                let (row_d, sd) = split(d);
                let mut bins = BTreeMap::new();
                for z in 0..count {
                    let hamming = (d ^ z).count_ones() as u64;
                    if hamming == 0 {
                        continue;
                    }
                    let (row_z, sz) = split(z);
                    let coeff = if k == 1 {
                        sigma2_pim(sd[0], sz[0], row_d[0] == row_z[0], 1.0)
                    } else {
                        sigma2_gpim(sd[0], sz[0], sd[1], sz[1], row_d[0] == row_z[0], row_d[1] == row_z[1], 1.0)
                    };
                    *bins.entry(coeff.to_bits()).or_insert(0) += hamming;
                }
                bins
            })
            .collect();
        let mut bins = BTreeMap::new();
        for partial in per_d {
            for (key, w) in partial {
                *bins.entry(key).or_insert(0) += w;
            }
        }
        Ok(Self { bits, bins })
    }

    pub fn bits_per_use(&self) -> usize {
        self.bits
    }

    /// ABEP bound at `Es/N0` in dB. Values above 1 are returned as is.
    pub fn abep_db(&self, es_over_n0_db: f64) -> f64 {
        self.abep_linear(10f64.powf(es_over_n0_db / 10.0))
    }

    pub fn abep_linear(&self, es_over_n0: f64) -> f64 {
        if self.bits == 0 {
            return 0.0;
        }
        let total: f64 = self
            .bins
            .iter()
            .map(|(&key, &w)| w as f64 * pep(es_over_n0 * f64::from_bits(key)))
            .sum();
        total / ((1u64 << self.bits) as f64 * self.bits as f64)
    }
}

/// One-shot bound evaluation.
pub fn abep(table: &LookupTable, constellation: &Constellation, es_over_n0_db: f64) -> Result<f64> {
    Ok(UnionBound::new(table, constellation)?.abep_db(es_over_n0_db))
}
