//! Hermite-Gaussian pulse family and the SRRC reference pulse.
//!
//! Pulses are stored as uniformly sampled real vectors together with their
//! sampling interval. Energies and inner products carry the `T_s` factor so
//! the discrete values approximate the continuous-time integrals.

use std::f64::consts::{PI, SQRT_2};

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// Default number of samples per pulse on the generation grid.
pub const DEFAULT_NUM_SAMPLES: usize = 127;
/// Default half width of the generation grid, in seconds.
pub const DEFAULT_HALF_WIDTH: f64 = 4.0;
/// Pulse length used for link simulations after edge truncation.
pub const DEFAULT_TRUNCATED_LEN: usize = 61;
/// Level, relative to the spectral peak, that defines the band edge.
pub const BAND_EDGE_DB: f64 = -40.0;

/// Physicists' Hermite polynomial `H_v(t)` by the three-term recurrence.
pub fn hermite_poly(order: usize, t: f64) -> f64 {
    let mut prev = 1.0;
    if order == 0 {
        return prev;
    }
    let mut cur = 2.0 * t;
    for v in 1..order {
        let next = 2.0 * t * cur - 2.0 * v as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Continuous-time Hermite-Gaussian function of order `v`, unit energy.
pub fn hg_value(order: usize, t: f64) -> f64 {
    let mut scale = 1.0;
    for v in 1..=order {
        scale *= 2.0 * v as f64;
    }
    2f64.powf(0.25) / scale.sqrt() * hermite_poly(order, (2.0 * PI).sqrt() * t) * (-PI * t * t).exp()
}

/// One real pulse on a uniform, center-symmetric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPulse {
    order: usize,
    samples: Vec<f64>,
    sample_interval: f64,
}

impl SampledPulse {
    pub fn new(order: usize, samples: Vec<f64>, sample_interval: f64) -> Self {
        assert!(!samples.is_empty(), "pulse needs at least one sample");
        assert!(sample_interval > 0.0, "sample interval must be positive");
        Self {
            order,
            samples,
            sample_interval,
        }
    }

    /// Hermite order, or 0 for pulses outside the family (SRRC).
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    /// Discrete energy, `sum(x^2) * T_s`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() * self.sample_interval
    }

    /// Sample instants, centered on zero.
    pub fn times(&self) -> Vec<f64> {
        centered_grid(self.samples.len(), self.sample_interval)
    }

    /// Scales the samples to unit discrete energy.
    pub fn normalized(mut self) -> Self {
        let norm = self.energy().sqrt();
        for x in &mut self.samples {
            *x /= norm;
        }
        self
    }

    /// Samples scaled by `sqrt(T_s)`, giving a unit Euclidean norm vector
    /// whose plain dot products equal the `T_s`-weighted inner products.
    pub fn basis_vector(&self) -> Vec<f64> {
        let scale = self.sample_interval.sqrt();
        self.samples.iter().map(|x| x * scale).collect()
    }
}

fn centered_grid(num_samples: usize, sample_interval: f64) -> Vec<f64> {
    let center = (num_samples as f64 - 1.0) / 2.0;
    (0..num_samples)
        .map(|i| (i as f64 - center) * sample_interval)
        .collect()
}

fn check_grid(num_samples: usize, half_width: f64) -> Result<f64> {
    if num_samples.is_multiple_of(2) {
        return Err(Error::EvenSampleCount(num_samples));
    }
    if half_width.is_nan() || half_width <= 0.0 {
        return Err(Error::BadHalfWidth(half_width));
    }
    if num_samples == 1 {
        return Ok(2.0 * half_width);
    }
    Ok(2.0 * half_width / (num_samples - 1) as f64)
}

/// Samples `psi_v` on `num_samples` points spanning `[-half_width, half_width]`
/// without any renormalization.
pub fn sample_hg_pulse_raw(order: usize, num_samples: usize, half_width: f64) -> Result<SampledPulse> {
    let ts = check_grid(num_samples, half_width)?;
    let samples = centered_grid(num_samples, ts)
        .into_iter()
        .map(|t| hg_value(order, t))
        .collect();
    Ok(SampledPulse::new(order, samples, ts))
}

/// Samples `psi_v` and normalizes it to unit discrete energy.
pub fn sample_hg_pulse(order: usize, num_samples: usize, half_width: f64) -> Result<SampledPulse> {
    Ok(sample_hg_pulse_raw(order, num_samples, half_width)?.normalized())
}

/// Keeps the centered `target_len` samples and restores unit energy.
pub fn truncate_and_renormalize(pulse: &SampledPulse, target_len: usize) -> Result<SampledPulse> {
    let len = pulse.len();
    if target_len == 0 || target_len > len || !(len - target_len).is_multiple_of(2) {
        return Err(Error::BadTruncation {
            len,
            target: target_len,
        });
    }
    let start = (len - target_len) / 2;
    let samples = pulse.samples[start..start + target_len].to_vec();
    Ok(SampledPulse::new(pulse.order, samples, pulse.sample_interval).normalized())
}

/// Sampling grid used to build a pulse family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseGrid {
    pub num_samples: usize,
    pub half_width: f64,
    pub truncate_to: Option<usize>,
}

impl Default for PulseGrid {
    fn default() -> Self {
        Self {
            num_samples: DEFAULT_NUM_SAMPLES,
            half_width: DEFAULT_HALF_WIDTH,
            truncate_to: None,
        }
    }
}

impl PulseGrid {
    /// The grid used by the link simulations: 127 samples cut down to 61.
    pub fn link_default() -> Self {
        Self {
            truncate_to: Some(DEFAULT_TRUNCATED_LEN),
            ..Self::default()
        }
    }

    /// Pulses `psi_0 .. psi_{n-1}` on this grid.
    pub fn family(&self, n: usize) -> Result<Vec<SampledPulse>> {
        (0..n)
            .map(|v| {
                let p = sample_hg_pulse(v, self.num_samples, self.half_width)?;
                match self.truncate_to {
                    Some(len) => truncate_and_renormalize(&p, len),
                    None => Ok(p),
                }
            })
            .collect()
    }
}

/// Matrix of `T_s`-weighted inner products.
pub fn gram_matrix(pulses: &[SampledPulse]) -> Result<Vec<Vec<f64>>> {
    if let Some(first) = pulses.first() {
        let same_grid = pulses
            .iter()
            .all(|p| p.len() == first.len() && p.sample_interval == first.sample_interval);
        if !same_grid {
            return Err(Error::GridMismatch);
        }
    }
    let n = pulses.len();
    let mut gram = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let dot: f64 = pulses[i]
                .samples
                .iter()
                .zip(&pulses[j].samples)
                .map(|(a, b)| a * b)
                .sum();
            let value = dot * pulses[i].sample_interval;
            gram[i][j] = value;
            gram[j][i] = value;
        }
    }
    Ok(gram)
}

/// Peak-normalized magnitude spectrum of a pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpectrum {
    /// Bin frequencies in Hz, ascending and symmetric about zero.
    pub frequencies: Vec<f64>,
    pub magnitude_db: Vec<f64>,
    /// Band edge: the smallest positive frequency beyond which the magnitude
    /// stays below [`BAND_EDGE_DB`].
    pub first_null_bandwidth: f64,
}

/// Magnitudes `|X_k|` for `k = 0 ..= N/2` of the zero-padded DFT.
fn half_spectrum(pulse: &SampledPulse, transform_size: usize) -> Result<Vec<f64>> {
    if transform_size < pulse.len() {
        return Err(Error::TransformTooSmall {
            size: transform_size,
            len: pulse.len(),
        });
    }
    let mut buf: Vec<Complex<f64>> = pulse
        .samples
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(transform_size)
        .collect();
    FftPlanner::new().plan_fft_forward(transform_size).process(&mut buf);
    Ok(buf[..=transform_size / 2].iter().map(|c| c.norm()).collect())
}

pub fn spectrum(pulse: &SampledPulse, transform_size: usize) -> Result<PulseSpectrum> {
    let half = half_spectrum(pulse, transform_size)?;
    let df = 1.0 / (transform_size as f64 * pulse.sample_interval);
    let peak = half.iter().cloned().fold(0.0, f64::max);
    let half_db: Vec<f64> = half
        .iter()
        .map(|&m| 20.0 * (m.max(f64::MIN_POSITIVE) / peak).log10())
        .collect();

    let last_above = half_db
        .iter()
        .rposition(|&db| db >= BAND_EDGE_DB)
        .expect("peak bin is at 0 dB");
    if last_above + 1 >= half_db.len() {
        return Err(Error::NoSpectralEdge(BAND_EDGE_DB));
    }
    let (a, b) = (half_db[last_above], half_db[last_above + 1]);
    let first_null_bandwidth = (last_above as f64 + (a - BAND_EDGE_DB) / (a - b)) * df;

    let k_max = half.len() - 1;
    let mut frequencies = Vec::with_capacity(2 * k_max + 1);
    let mut magnitude_db = Vec::with_capacity(2 * k_max + 1);
    for k in (1..=k_max).rev() {
        frequencies.push(-(k as f64) * df);
        magnitude_db.push(half_db[k]);
    }
    for (k, &db) in half_db.iter().enumerate() {
        frequencies.push(k as f64 * df);
        magnitude_db.push(db);
    }
    Ok(PulseSpectrum {
        frequencies,
        magnitude_db,
        first_null_bandwidth,
    })
}

/// RMS bandwidth (Hz) of the average power spectrum of `pulses`, i.e. the
/// spectrum of a PIM transmitter that uses every pulse equally often.
pub fn rms_bandwidth(pulses: &[SampledPulse], transform_size: usize) -> Result<f64> {
    let first = pulses.first().ok_or(Error::GridMismatch)?;
    let df = 1.0 / (transform_size as f64 * first.sample_interval);
    let mut power = vec![0.0; transform_size / 2 + 1];
    for p in pulses {
        if p.sample_interval != first.sample_interval {
            return Err(Error::GridMismatch);
        }
        for (acc, m) in power.iter_mut().zip(half_spectrum(p, transform_size)?) {
            *acc += m * m;
        }
    }
    // one-sided sums; the spectrum is even so the ratio is unchanged
    let (mut num, mut den) = (0.0, 0.0);
    for (k, &pw) in power.iter().enumerate() {
        let w = if k == 0 { 1.0 } else { 2.0 };
        let f = k as f64 * df;
        num += w * f * f * pw;
        den += w * pw;
    }
    Ok((num / den).sqrt())
}

/// Shape of the SRRC impulse response at `x = t / T`, before scaling.
pub fn srrc_value(beta: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-9;
    if x.abs() < EPS {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (x.abs() - 1.0 / (4.0 * beta)).abs() < EPS {
        let arg = PI / (4.0 * beta);
        return beta / SQRT_2 * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    let num = (PI * x * (1.0 - beta)).sin() + 4.0 * beta * x * (PI * x * (1.0 + beta)).cos();
    let den = PI * x * (1.0 - (4.0 * beta * x).powi(2));
    num / den
}

/// Unit-energy SRRC pulse on a centered grid of `num_samples` points with
/// spacing `sample_interval` and symbol period `samples_per_symbol * T_s`.
pub fn srrc_pulse(
    beta: f64,
    num_samples: usize,
    samples_per_symbol: f64,
    sample_interval: f64,
) -> Result<SampledPulse> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::BadRollOff(beta));
    }
    if num_samples.is_multiple_of(2) {
        return Err(Error::EvenSampleCount(num_samples));
    }
    if !(samples_per_symbol.is_finite() && samples_per_symbol > 0.0 && sample_interval > 0.0) {
        return Err(Error::Config(
            "SRRC needs positive samples per symbol and sample interval".into(),
        ));
    }
    let samples = centered_grid(num_samples, 1.0)
        .into_iter()
        .map(|i| srrc_value(beta, i / samples_per_symbol))
        .collect();
    Ok(SampledPulse::new(0, samples, sample_interval).normalized())
}

/// `kappa` such that an SRRC link with symbol period `T` has RMS bandwidth
/// `kappa / T`. Integrates the raised-cosine power shape numerically.
pub fn srrc_rms_factor(beta: f64) -> f64 {
    let rc = |u: f64| {
        let u = u.abs();
        let flat = (1.0 - beta) / 2.0;
        if u <= flat {
            1.0
        } else if u <= (1.0 + beta) / 2.0 {
            0.5 * (1.0 + (PI / beta * (u - flat)).cos())
        } else {
            0.0
        }
    };
    // Simpson on [0, (1+beta)/2]
    let upper = (1.0 + beta) / 2.0;
    let steps = 20_000;
    let h = upper / steps as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=steps {
        let u = i as f64 * h;
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        num += w * u * u * rc(u);
        den += w * rc(u);
    }
    (num / den).sqrt()
}

/// SRRC symbol period whose RMS bandwidth equals that of the average PIM
/// transmit spectrum built from `pulses`.
pub fn matched_srrc_symbol_period(pulses: &[SampledPulse], beta: f64, transform_size: usize) -> Result<f64> {
    Ok(srrc_rms_factor(beta) / rms_bandwidth(pulses, transform_size)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family127() -> Vec<SampledPulse> {
        PulseGrid::default().family(4).unwrap()
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_poly(0, 0.7), 1.0);
        assert_eq!(hermite_poly(3, 1.0), -4.0);
        assert_eq!(hermite_poly(2, 0.0), -2.0);
        assert_eq!(hermite_poly(1, 1.5), 3.0);
    }

    #[test]
    fn center_sample_of_psi0() {
        let raw = sample_hg_pulse_raw(0, 127, 4.0).unwrap();
        assert!((raw.samples()[63] - 2f64.powf(0.25)).abs() < 1e-12);
        assert!((raw.samples()[63] - 1.18921).abs() < 1e-5);
        let odd = sample_hg_pulse(1, 127, 4.0).unwrap();
        assert_eq!(odd.samples()[63], 0.0);
    }

    #[test]
    fn even_length_is_rejected() {
        assert!(matches!(sample_hg_pulse(0, 128, 4.0), Err(Error::EvenSampleCount(128))));
        assert!(matches!(srrc_pulse(0.5, 64, 8.0, 1.0), Err(Error::EvenSampleCount(64))));
        assert!(sample_hg_pulse(0, 127, 0.0).is_err());
    }

    /// Composite Simpson rule on a dense grid, independent of the pulse grid.
    fn quad_energy(order: usize) -> f64 {
        let (a, b, steps) = (-8.0, 8.0, 40_000);
        let h = (b - a) / steps as f64;
        (0..=steps)
            .map(|i| {
                let w = if i == 0 || i == steps {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * hg_value(order, a + i as f64 * h).powi(2)
            })
            .sum::<f64>()
            * h
            / 3.0
    }

    #[test]
    fn raw_energy_matches_quadrature() {
        for v in 0..4 {
            let oracle = quad_energy(v);
            assert!((oracle - 1.0).abs() < 1e-9, "quadrature for v={v}: {oracle}");
            let raw = sample_hg_pulse_raw(v, 127, 4.0).unwrap();
            assert!((raw.energy() - oracle).abs() < 1e-6, "v={v}: {}", raw.energy());
        }
    }

    #[test]
    fn parity_is_exact() {
        for p in family127() {
            let s = p.samples();
            let sign = if p.order() % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..s.len() {
                assert!((s[i] - sign * s[s.len() - 1 - i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncation() {
        let psi0 = sample_hg_pulse(0, 127, 4.0).unwrap();
        let t = truncate_and_renormalize(&psi0, 61).unwrap();
        assert_eq!(t.len(), 61);
        assert!((t.energy() - 1.0).abs() < 1e-9);
        assert_eq!(truncate_and_renormalize(&psi0, 127).unwrap(), psi0);
        assert!(truncate_and_renormalize(&psi0, 60).is_err());
        assert!(truncate_and_renormalize(&psi0, 129).is_err());
    }

    #[test]
    fn truncated_tail_energy_is_small() {
        let raw = sample_hg_pulse_raw(3, 127, 4.0).unwrap();
        let s = raw.samples();
        let total: f64 = s.iter().map(|x| x * x).sum();
        let tail: f64 = s[..33].iter().chain(&s[94..]).map(|x| x * x).sum();
        assert!(tail / total < 1e-3, "tail fraction {}", tail / total);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn gram_is_near_identity() {
        let fam = family127();
        let g = gram_matrix(&fam[..2]).unwrap();
        assert!(g[0][1].abs() < 1e-12);
        let g = gram_matrix(&fam).unwrap();
        for i in 0..4 {
            assert!((g[i][i] - 1.0).abs() < 1e-9);
            for j in 0..4 {
                assert_eq!(g[i][j], g[j][i]);
                if i != j {
                    assert!(g[i][j].abs() < 1e-3);
                }
            }
        }
        let short = PulseGrid::link_default().family(4).unwrap();
        let g = gram_matrix(&short).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - target).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn gram_rejects_mixed_grids() {
        let a = sample_hg_pulse(0, 127, 4.0).unwrap();
        let b = sample_hg_pulse(1, 61, 4.0).unwrap();
        assert!(matches!(gram_matrix(&[a, b]), Err(Error::GridMismatch)));
    }

    #[test]
    fn spectrum_shape() {
        let fam = family127();
        let spectra: Vec<_> = fam.iter().map(|p| spectrum(p, 4096).unwrap()).collect();
        for s in &spectra {
            let max = s.magnitude_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(max, 0.0);
            let n = s.magnitude_db.len();
            for i in 0..n {
                assert!((s.frequencies[i] + s.frequencies[n - 1 - i]).abs() < 1e-9);
                assert!((s.magnitude_db[i] - s.magnitude_db[n - 1 - i]).abs() < 1e-9);
            }
        }
        for w in spectra.windows(2) {
            assert!(w[0].first_null_bandwidth < w[1].first_null_bandwidth);
        }
        assert!(spectrum(&fam[0], 100).is_err());
    }

    #[test]
    fn gaussian_band_edge_matches_closed_form() {
        // |Psi_0(f)| = 2^{1/4} exp(-pi f^2); the -40 dB point solves exp(-pi f^2) = 0.01
        let p = sample_hg_pulse(0, 127, 4.0).unwrap();
        let s = spectrum(&p, 1 << 14).unwrap();
        let expected = (100f64.ln() / PI).sqrt();
        assert!((s.first_null_bandwidth - expected).abs() < 1e-3, "{}", s.first_null_bandwidth);
    }

    #[test]
    fn srrc_limits() {
        // beta = 0 degenerates to sinc
        let p = srrc_pulse(0.0, 41, 4.0, 0.25).unwrap();
        let raw: Vec<f64> = centered_grid(41, 1.0)
            .iter()
            .map(|&i| {
                let x = i / 4.0;
                if x == 0.0 {
                    1.0
                } else {
                    (PI * x).sin() / (PI * x)
                }
            })
            .collect();
        let norm = (raw.iter().map(|x| x * x).sum::<f64>() * 0.25).sqrt();
        for (a, b) in p.samples().iter().zip(&raw) {
            assert!((a - b / norm).abs() < 1e-12);
        }
        for beta in [0.0, 0.25, 0.5, 1.0] {
            let p = srrc_pulse(beta, 127, 10.0, 0.05).unwrap();
            assert!((p.energy() - 1.0).abs() < 1e-9);
        }
        // singular points against a small numeric offset
        for beta in [0.25, 0.5, 1.0] {
            let x0 = 1.0 / (4.0 * beta);
            let limit = srrc_value(beta, x0);
            let near = 0.5 * (srrc_value(beta, x0 + 1e-6) + srrc_value(beta, x0 - 1e-6));
            assert!((limit - near).abs() < 1e-6, "beta={beta}");
            let near0 = srrc_value(beta, 1e-6);
            assert!((srrc_value(beta, 0.0) - near0).abs() < 1e-6);
        }
        assert!(matches!(srrc_pulse(1.5, 11, 4.0, 1.0), Err(Error::BadRollOff(_))));
    }

    #[test]
    fn srrc_rms_factor_closed_form() {
        let exact = (1.0 / 3.0 - 2.0 / (PI * PI)).sqrt();
        assert!((srrc_rms_factor(1.0) - exact).abs() < 1e-9);
        // brick wall at beta = 0: sqrt(1/12)
        assert!((srrc_rms_factor(0.0) - (1.0f64 / 12.0).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn family_rms_bandwidth() {
        // continuous psi_v has sigma_f^2 = (2v + 1) / (4 pi); the mean over v = 0..3 is 4 / (4 pi)
        let rms = rms_bandwidth(&family127(), 8192).unwrap();
        assert!((rms - (1.0 / PI).sqrt()).abs() < 1e-6, "{rms}");
    }
}
