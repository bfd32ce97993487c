//! Bit mapping and waveform synthesis for PIM (one active pulse) and GPIM
//! (two active pulses scaled by `1/sqrt(2)`).
//!
//! A message of `p = p1 + k * log2(M)` bits is laid out MSB first as
//! `[index bits | symbol 1 | symbol 2]`. The index bits pick a lookup table
//! row, the symbol fields pick constellation labels, and the `t`-th symbol
//! rides the `t`-th (ascending) pulse of the selected row.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulses::SampledPulse;

/// Largest family size accepted by [`build_lookup_table`].
pub const MAX_PULSES: usize = 8;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn floor_log2(x: usize) -> usize {
    (usize::BITS - 1 - x.leading_zeros()) as usize
}

fn log2_exact(m: usize) -> Option<usize> {
    m.is_power_of_two().then(|| m.trailing_zeros() as usize)
}

/// Bits per channel use, `floor(log2 C(n, k)) + k * log2(M)`.
pub fn spectral_efficiency(n: usize, k: usize, order: usize) -> Result<usize> {
    if k == 0 || k > n {
        return Err(Error::BadTable { n, k });
    }
    let bits = log2_exact(order).ok_or_else(|| Error::UnsupportedConstellation {
        kind: "any".into(),
        order,
    })?;
    Ok(floor_log2(binomial(n, k)) + k * bits)
}

/// Writes `value` as `width` bits, MSB first.
pub fn to_bits(value: usize, width: usize) -> Vec<bool> {
    (0..width).rev().map(|b| (value >> b) & 1 == 1).collect()
}

/// Reads bits MSB first.
pub fn from_bits(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Maps index bits to pulse selections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupTable {
    n: usize,
    k: usize,
    index_bits: usize,
    rows: Vec<Vec<usize>>,
}

impl LookupTable {
    /// Builds a table from explicit rows. Row `r` is addressed by the index
    /// bits spelling `r`; each row is stored in ascending order.
    pub fn from_rows(n: usize, k: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 || k > n || !rows.len().is_power_of_two() {
            return Err(Error::BadTable { n, k });
        }
        let mut sorted = Vec::with_capacity(rows.len());
        for mut row in rows {
            row.sort_unstable();
            let distinct = row.windows(2).all(|w| w[0] < w[1]);
            if row.len() != k || !distinct || row.iter().any(|&p| p >= n) || sorted.contains(&row) {
                return Err(Error::UnknownSelection(row));
            }
            sorted.push(row);
        }
        Ok(Self {
            n,
            k,
            index_bits: floor_log2(sorted.len()),
            rows: sorted,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `p1`, the number of index bits.
    pub fn index_bits(&self) -> usize {
        self.index_bits
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> &[usize] {
        &self.rows[index]
    }

    /// Row index of a selection given in any order.
    pub fn find(&self, selection: &[usize]) -> Option<usize> {
        let mut key = selection.to_vec();
        key.sort_unstable();
        self.rows.iter().position(|r| *r == key)
    }
}

/// Builds the index table for `n` pulses with `k` active.
///
/// `(4, 2)` uses the fixed reference pairs `{0,1}, {0,2}, {1,2}, {1,3}`; every
/// other case takes the first `2^p1` k-subsets in lexicographic order, which
/// for `(4, 1)` is the identity map.
pub fn build_lookup_table(n: usize, k: usize) -> Result<LookupTable> {
    if k == 0 || k > n || n > MAX_PULSES {
        return Err(Error::BadTable { n, k });
    }
    if (n, k) == (4, 2) {
        return LookupTable::from_rows(4, 2, vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![1, 3]]);
    }
    let count = 1usize << floor_log2(binomial(n, k));
    let mut rows = Vec::with_capacity(count);
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        rows.push(subset.clone());
        if rows.len() == count {
            break;
        }
        // next lexicographic k-subset
        let mut i = k;
        while i > 0 && subset[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        subset[i - 1] += 1;
        for j in i..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    LookupTable::from_rows(n, k, rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationKind {
    Psk,
    Qam,
}

impl fmt::Display for ModulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModulationKind::Psk => "psk",
            ModulationKind::Qam => "qam",
        })
    }
}

impl std::str::FromStr for ModulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psk" => Ok(Self::Psk),
            "qam" => Ok(Self::Qam),
            other => Err(Error::Config(format!("unknown modulation `{other}`"))),
        }
    }
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Gray-labeled unit-average-energy constellation; `points[label]` is the
/// point carrying the bits of `label` (MSB first).
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ModulationKind,
    points: Vec<Complex64>,
    bits_per_symbol: usize,
    // QAM: per-axis levels indexed by position, and position -> gray code
    side: usize,
    scale: f64,
}

impl Constellation {
    pub fn new(kind: ModulationKind, order: usize) -> Result<Self> {
        let unsupported = || Error::UnsupportedConstellation {
            kind: kind.to_string(),
            order,
        };
        let bits = log2_exact(order).filter(|&b| b >= 1).ok_or_else(unsupported)?;
        let mut points = vec![Complex64::new(0.0, 0.0); order];
        let (side, scale) = match kind {
            ModulationKind::Psk if order == 2 => {
                points[0] = Complex64::new(-1.0, 0.0);
                points[1] = Complex64::new(1.0, 0.0);
                (2, 1.0)
            }
            ModulationKind::Psk => {
                for i in 0..order {
                    points[gray(i)] = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / order as f64);
                }
                (order, 1.0)
            }
            ModulationKind::Qam => {
                if bits % 2 != 0 || !(4..=1024).contains(&order) {
                    return Err(unsupported());
                }
                let side = 1usize << (bits / 2);
                let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
                for pi in 0..side {
                    for pq in 0..side {
                        let label = (gray(pi) << (bits / 2)) | gray(pq);
                        points[label] = Complex64::new(level(pi, side), level(pq, side)) / scale;
                    }
                }
                (side, scale)
            }
        };
        Ok(Self {
            kind,
            points,
            bits_per_symbol: bits,
            side,
            scale,
        })
    }

    pub fn kind(&self) -> ModulationKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Label of the point exactly equal (to within 1e-9) to `symbol`.
    pub fn label_of(&self, symbol: Complex64) -> Option<usize> {
        let label = self.nearest(symbol);
        ((self.points[label] - symbol).norm() < 1e-9).then_some(label)
    }

    /// Label of the closest point; equidistant ties go to the lower label.
    pub fn nearest(&self, u: Complex64) -> usize {
        match self.kind {
            ModulationKind::Psk if self.points.len() == 2 => (u.re > 0.0) as usize,
            ModulationKind::Psk => {
                if u.norm_sqr() == 0.0 {
                    return 0;
                }
                let m = self.points.len() as f64;
                let pos = (u.arg() * m / (2.0 * PI)).round().rem_euclid(m) as usize;
                gray(pos)
            }
            ModulationKind::Qam => {
                let half = self.bits_per_symbol / 2;
                let pi = self.axis_position(u.re);
                let pq = self.axis_position(u.im);
                (gray(pi) << half) | gray(pq)
            }
        }
    }

    fn axis_position(&self, x: f64) -> usize {
        let pos = ((x * self.scale + (self.side as f64 - 1.0)) / 2.0).round();
        pos.clamp(0.0, (self.side - 1) as f64) as usize
    }
}

fn level(position: usize, side: usize) -> f64 {
    2.0 * position as f64 - (side as f64 - 1.0)
}

/// The pulse family as seen by the link: unit-norm basis vectors and their
/// Euclidean Gram matrix.
#[derive(Debug, Clone)]
pub struct PulseSet {
    pulses: Vec<SampledPulse>,
    basis: Vec<Vec<f64>>,
    gram: Vec<Vec<f64>>,
}

impl PulseSet {
    pub fn new(pulses: Vec<SampledPulse>) -> Result<Self> {
        let gram = crate::pulses::gram_matrix(&pulses)?;
        if pulses.is_empty() {
            return Err(Error::PulseCount { have: 0, need: 1 });
        }
        let basis = pulses.iter().map(SampledPulse::basis_vector).collect();
        Ok(Self { pulses, basis, gram })
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Samples per waveform.
    pub fn waveform_len(&self) -> usize {
        self.basis[0].len()
    }

    pub fn pulses(&self) -> &[SampledPulse] {
        &self.pulses
    }

    pub fn basis(&self, index: usize) -> &[f64] {
        &self.basis[index]
    }

    pub fn gram(&self) -> &[Vec<f64>] {
        &self.gram
    }
}

/// One modulated channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct TxFrame {
    pub bits: Vec<bool>,
    pub row: usize,
    pub pulse_indices: Vec<usize>,
    pub labels: Vec<usize>,
    pub symbols: Vec<Complex64>,
    pub waveform: Vec<Complex64>,
}

/// Table, constellation and pulses bundled for one PIM/GPIM configuration.
#[derive(Debug, Clone)]
pub struct ImModem {
    table: LookupTable,
    constellation: Constellation,
    pulses: PulseSet,
}

impl ImModem {
    pub fn new(table: LookupTable, constellation: Constellation, pulses: PulseSet) -> Result<Self> {
        if pulses.len() < table.n() {
            return Err(Error::PulseCount {
                have: pulses.len(),
                need: table.n(),
            });
        }
        Ok(Self {
            table,
            constellation,
            pulses,
        })
    }

    pub fn table(&self) -> &LookupTable {
        &self.table
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn pulses(&self) -> &PulseSet {
        &self.pulses
    }

    pub fn k(&self) -> usize {
        self.table.k()
    }

    /// Message length `p1 + k log2 M`.
    pub fn bits_per_use(&self) -> usize {
        self.table.index_bits() + self.table.k() * self.constellation.bits_per_symbol()
    }

    pub fn message_count(&self) -> usize {
        1 << self.bits_per_use()
    }

    /// Splits a message integer into (row, labels).
    pub fn split_message(&self, message: usize) -> (usize, Vec<usize>) {
        let b = self.constellation.bits_per_symbol();
        let k = self.table.k();
        let mask = (1 << b) - 1;
        let labels = (0..k).map(|t| (message >> (b * (k - 1 - t))) & mask).collect();
        (message >> (b * k), labels)
    }

    pub fn join_message(&self, row: usize, labels: &[usize]) -> usize {
        let b = self.constellation.bits_per_symbol();
        labels.iter().fold(row, |acc, &l| (acc << b) | l)
    }

    /// Waveform `(1/sqrt(k)) sum_t s_t b_{row_t}` written into `out`.
    pub fn synthesize_into(&self, row: usize, labels: &[usize], out: &mut [Complex64]) {
        let gain = 1.0 / (labels.len() as f64).sqrt();
        out.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (&pulse, &label) in self.table.row(row).iter().zip(labels) {
            let s = self.constellation.point(label) * gain;
            for (x, &b) in out.iter_mut().zip(self.pulses.basis(pulse)) {
                *x += s * b;
            }
        }
    }

    pub fn modulate_message(&self, message: usize) -> TxFrame {
        let (row, labels) = self.split_message(message);
        let mut waveform = vec![Complex64::new(0.0, 0.0); self.pulses.waveform_len()];
        self.synthesize_into(row, &labels, &mut waveform);
        TxFrame {
            bits: to_bits(message, self.bits_per_use()),
            row,
            pulse_indices: self.table.row(row).to_vec(),
            symbols: labels.iter().map(|&l| self.constellation.point(l)).collect(),
            labels,
            waveform,
        }
    }

    pub fn modulate(&self, bits: &[bool]) -> Result<TxFrame> {
        if bits.len() != self.bits_per_use() {
            return Err(Error::BitLength {
                expected: self.bits_per_use(),
                got: bits.len(),
            });
        }
        Ok(self.modulate_message(from_bits(bits)))
    }

    /// Bits for a detected (row, labels) pair.
    pub fn demap_labels(&self, row: usize, labels: &[usize]) -> Vec<bool> {
        to_bits(self.join_message(row, labels), self.bits_per_use())
    }

    /// Inverse of [`ImModem::modulate`] given the pulse selection and symbols.
    pub fn demap(&self, pulse_indices: &[usize], symbols: &[Complex64]) -> Result<Vec<bool>> {
        if pulse_indices.len() != self.k() || symbols.len() != self.k() {
            return Err(Error::WrongActiveCount {
                expected: self.k(),
                got: pulse_indices.len(),
            });
        }
        let row = self
            .table
            .find(pulse_indices)
            .ok_or_else(|| Error::UnknownSelection(pulse_indices.to_vec()))?;
        // symbols follow the ascending pulse order of the row
        let mut pairs: Vec<_> = pulse_indices.iter().zip(symbols).collect();
        pairs.sort_by_key(|(p, _)| **p);
        let labels = pairs
            .into_iter()
            .map(|(_, &s)| self.constellation.label_of(s).ok_or(Error::UnknownSymbol(s)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.demap_labels(row, &labels))
    }
}

/// PIM frame, `x = s_i psi_j`.
pub fn pim_modulate(bits: &[bool], modem: &ImModem) -> Result<TxFrame> {
    if modem.k() != 1 {
        return Err(Error::WrongActiveCount {
            expected: 1,
            got: modem.k(),
        });
    }
    modem.modulate(bits)
}

/// GPIM frame, `x = (s_i psi_j + s_q psi_l) / sqrt(2)`.
pub fn gpim_modulate(bits: &[bool], modem: &ImModem) -> Result<TxFrame> {
    if modem.k() != 2 {
        return Err(Error::WrongActiveCount {
            expected: 2,
            got: modem.k(),
        });
    }
    modem.modulate(bits)
}
