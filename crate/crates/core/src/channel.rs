//! Flat Rayleigh fading with additive white Gaussian noise.
//!
//! One fading coefficient `h ~ CN(0, 1)` multiplies every sample of a frame;
//! each noise sample is `CN(0, N0/2)`, so its real and imaginary parts have
//! variance `N0/4`. An infinite SNR disables the noise entirely.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// `N0 = Es * 10^(-snr/10)`; zero for an infinite SNR.
pub fn snr_to_n0(es_over_n0_db: f64, es: f64) -> f64 {
    es * 10f64.powf(-es_over_n0_db / 10.0)
}

/// Circularly-symmetric complex Gaussian sample with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let sd = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sd, im * sd)
}

/// Draws `h ~ CN(0, 1)`.
pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    complex_gaussian(rng, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelUse {
    pub h: Complex64,
    pub noise: Vec<Complex64>,
    pub received: Vec<Complex64>,
    pub es_over_n0_db: f64,
}

/// Sends `x` through `r = x h + n` at the given `Es/N0` (with `Es = 1`).
pub fn transmit<R: Rng + ?Sized>(x: &[Complex64], h: Complex64, es_over_n0_db: f64, rng: &mut R) -> ChannelUse {
    let mut received = vec![Complex64::new(0.0, 0.0); x.len()];
    let mut noise = vec![Complex64::new(0.0, 0.0); x.len()];
    let var = snr_to_n0(es_over_n0_db, 1.0) / 2.0;
    if var > 0.0 {
        noise.iter_mut().for_each(|n| *n = complex_gaussian(rng, var));
    }
    for ((r, &xs), &n) in received.iter_mut().zip(x).zip(&noise) {
        *r = xs * h + n;
    }
    ChannelUse {
        h,
        noise,
        received,
        es_over_n0_db,
    }
}

/// Allocation-free variant of [`transmit`] that writes only `r`.
pub fn transmit_into<R: Rng + ?Sized>(
    x: &[Complex64],
    h: Complex64,
    noise_var: f64,
    rng: &mut R,
    out: &mut [Complex64],
) {
    if noise_var > 0.0 {
        for (r, &xs) in out.iter_mut().zip(x) {
            *r = xs * h + complex_gaussian(rng, noise_var);
        }
    } else {
        for (r, &xs) in out.iter_mut().zip(x) {
            *r = xs * h;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn snr_conversion() {
        assert_eq!(snr_to_n0(0.0, 1.0), 1.0);
        assert!((snr_to_n0(10.0, 1.0) - 0.1).abs() < 1e-15);
        assert!((snr_to_n0(3.0, 1.0) - 10f64.powf(-0.3)).abs() < 1e-15);
        assert!((snr_to_n0(3.0, 1.0) - 0.50119).abs() < 1e-5);
        assert_eq!(snr_to_n0(f64::INFINITY, 1.0), 0.0);
    }

    #[test]
    fn fading_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let (mut power, mut above) = (0.0, 0usize);
        for _ in 0..n {
            let p = draw_fading(&mut rng).norm_sqr();
            power += p;
            above += (p > 1.0) as usize;
        }
        assert!((power / n as f64 - 1.0).abs() < 0.01);
        assert!((above as f64 / n as f64 - (-1f64).exp()).abs() < 0.005);
    }

    #[test]
    fn seeds_are_reproducible() {
        let a: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(1);
            (0..8).map(|_| draw_fading(&mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(1);
            (0..8).map(|_| draw_fading(&mut r)).collect()
        };
        let c: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(2);
            (0..8).map(|_| draw_fading(&mut r)).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<_> = (0..61).map(|i| Complex64::new(i as f64 * 0.01, -0.2)).collect();
        let h = Complex64::new(0.3, -1.1);
        let use_ = transmit(&x, h, f64::INFINITY, &mut rng);
        for (r, xs) in use_.received.iter().zip(&x) {
            assert_eq!(*r, xs * h);
        }
    }

    #[test]
    fn noise_variance_and_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = vec![Complex64::new(1.0, 0.0); 1000];
        let h = Complex64::new(0.5, 0.5);
        let mut total = 0.0;
        let mut cross = Complex64::new(0.0, 0.0);
        let mut count = 0usize;
        for _ in 0..1000 {
            let u = transmit(&x, h, 0.0, &mut rng);
            for (i, n) in u.noise.iter().enumerate() {
                total += n.norm_sqr();
                assert_eq!(u.received[i], x[i] * h + n);
            }
            for w in u.noise.windows(2) {
                cross += w[0] * w[1].conj();
                count += 1;
            }
        }
        let mean = total / 1e6;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
        // E[n_a conj(n_b)] = 0; std of the estimator is (N0/2) / sqrt(count)
        let sigma = 0.5 / (count as f64).sqrt();
        assert!((cross / count as f64).norm() < 3.0 * sigma * std::f64::consts::SQRT_2);
    }

    #[test]
    fn transmit_into_matches_transmit() {
        let x: Vec<_> = (0..16).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let h = Complex64::new(0.1, 0.9);
        let a = transmit(&x, h, 5.0, &mut ChaCha8Rng::seed_from_u64(5));
        let mut out = vec![Complex64::new(0.0, 0.0); 16];
        transmit_into(&x, h, snr_to_n0(5.0, 1.0) / 2.0, &mut ChaCha8Rng::seed_from_u64(5), &mut out);
        assert_eq!(a.received, out);
    }
}
