//! Fractional Brownian motion on dyadic grids.
//!
//! Increments (fractional Gaussian noise) are drawn exactly in distribution by
//! circulant embedding of their Toeplitz covariance. When the embedding
//! spectrum has a genuinely negative eigenvalue the sampler falls back to the
//! Durbin–Levinson factorisation of the same Toeplitz matrix, which is exact
//! but quadratic, and is therefore limited to `n <= 12`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::fft::Fft;
use crate::grid::GridFunction;
use crate::rng::{stream, StreamRng};

/// Largest `n` for which the quadratic fallback is attempted.
pub const TOEPLITZ_MAX_LEVEL: u32 = 12;
/// Largest supported `n` overall.
pub const MAX_LEVEL: u32 = 26;
/// Negative embedding eigenvalues below `-EIGEN_TOLERANCE * max` reject the
/// embedding; those above are clamped to zero.
pub const EIGEN_TOLERANCE: f64 = 1e-9;

fn check_hurst(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid("alpha", "Hurst index must lie in (0, 1)"))
    }
}

/// `E[B(s) B(t)] = (|t|^{2α} + |s|^{2α} - |t-s|^{2α}) / 2`.
pub fn covariance(s: f64, t: f64, alpha: f64) -> Result<f64> {
    check_hurst(alpha)?;
    let h2 = 2.0 * alpha;
    Ok(0.5 * (t.abs().powf(h2) + s.abs().powf(h2) - (t - s).abs().powf(h2)))
}

/// Autocovariance of unit-step fractional Gaussian noise at integer lag.
fn unit_fgn_autocov(lag: u64, alpha: f64) -> f64 {
    let h2 = 2.0 * alpha;
    let k = lag as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Autocovariance of the increments `B((i+1)2^{-n}) - B(i 2^{-n})` at lag `h`.
pub fn fgn_autocovariance(lag: u64, alpha: f64, n: u32) -> f64 {
    unit_fgn_autocov(lag, alpha) * 2f64.powf(-2.0 * alpha * n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Circulant embedding, falling back to Durbin–Levinson when needed.
    Auto,
    Circulant,
    /// Durbin–Levinson factorisation of the Toeplitz covariance.
    Toeplitz,
}

#[derive(Debug, Clone)]
enum Kind {
    Circulant { scale: Vec<f64>, fft: Fft },
    Toeplitz { phi: Vec<Vec<f64>>, sd: Vec<f64> },
}

/// Reusable exact sampler for `2^n` fractional Gaussian noise increments.
#[derive(Debug, Clone)]
pub struct FgnSampler {
    n: u32,
    alpha: f64,
    kind: Kind,
}

impl FgnSampler {
    pub fn new(n: u32, alpha: f64) -> Result<Self> {
        Self::with_method(n, alpha, Method::Auto)
    }

    pub fn with_method(n: u32, alpha: f64, method: Method) -> Result<Self> {
        check_hurst(alpha)?;
        if n > MAX_LEVEL {
            return Err(invalid("n", "resolution above 2^26 increments is not supported"));
        }
        let kind = match method {
            Method::Circulant => circulant(n, alpha)?,
            Method::Toeplitz => toeplitz(n, alpha)?,
            Method::Auto => match circulant(n, alpha) {
                Ok(k) => k,
                Err(_) if n <= TOEPLITZ_MAX_LEVEL => toeplitz(n, alpha)?,
                Err(_) => {
                    return Err(Error::NoExactSampler {
                        n,
                        reason: "circulant embedding is not nonnegative and the Toeplitz fallback is capped at n = 12",
                    })
                }
            },
        };
        Ok(FgnSampler { n, alpha, kind })
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn hurst(&self) -> f64 {
        self.alpha
    }

    pub fn uses_circulant(&self) -> bool {
        matches!(self.kind, Kind::Circulant { .. })
    }

    /// Draws the `2^n` increments using `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let len = 1usize << self.n;
        let step_scale = 2f64.powf(-self.alpha * self.n as f64);
        match &self.kind {
            Kind::Circulant { scale, fft } => {
                let m = fft.len();
                let mut re = Vec::with_capacity(m);
                let mut im = Vec::with_capacity(m);
                for s in scale {
                    let a: f64 = rng.sample(StandardNormal);
                    let b: f64 = rng.sample(StandardNormal);
                    re.push(s * a);
                    im.push(s * b);
                }
                fft.forward(&mut re, &mut im);
                re.truncate(len);
                for v in re.iter_mut() {
                    *v *= step_scale;
                }
                re
            }
            Kind::Toeplitz { phi, sd } => {
                let mut x = vec![0.0; len];
                for t in 0..len {
                    let z: f64 = rng.sample(StandardNormal);
                    let mean: f64 = phi[t].iter().enumerate().map(|(j, p)| p * x[t - 1 - j]).sum();
                    x[t] = mean + sd[t] * z;
                }
                for v in x.iter_mut() {
                    *v *= step_scale;
                }
                x
            }
        }
    }
}

fn circulant(n: u32, alpha: f64) -> Result<Kind> {
    let len = 1usize << n;
    let m = 2 * len;
    let mut re: Vec<f64> = (0..m)
        .map(|j| unit_fgn_autocov(j.min(m - j) as u64, alpha))
        .collect();
    let mut im = vec![0.0; m];
    let fft = Fft::new(m);
    fft.forward(&mut re, &mut im);
    let max = re.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = re.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -EIGEN_TOLERANCE * max {
        return Err(Error::NoExactSampler { n, reason: "negative circulant embedding eigenvalue" });
    }
    let scale = re.iter().map(|&l| (l.max(0.0) / m as f64).sqrt()).collect();
    Ok(Kind::Circulant { scale, fft })
}

fn toeplitz(n: u32, alpha: f64) -> Result<Kind> {
    if n > TOEPLITZ_MAX_LEVEL {
        return Err(Error::NoExactSampler { n, reason: "Toeplitz factorisation is capped at n = 12" });
    }
    let len = 1usize << n;
    let r: Vec<f64> = (0..len as u64).map(|k| unit_fgn_autocov(k, alpha)).collect();
    let mut phi: Vec<Vec<f64>> = Vec::with_capacity(len);
    let mut sd = Vec::with_capacity(len);
    let mut v = r[0];
    phi.push(Vec::new());
    sd.push(v.sqrt());
    for t in 1..len {
        let prev = &phi[t - 1];
        let acc: f64 = prev.iter().enumerate().map(|(j, p)| p * r[t - 1 - j]).sum();
        let reflection = (r[t] - acc) / v;
        let mut row = Vec::with_capacity(t);
        for j in 0..t - 1 {
            row.push(prev[j] - reflection * prev[t - 2 - j]);
        }
        row.push(reflection);
        v *= 1.0 - reflection * reflection;
        if !(v > 0.0) {
            return Err(Error::NoExactSampler { n, reason: "Toeplitz covariance is not positive definite" });
        }
        phi.push(row);
        sd.push(v.sqrt());
    }
    Ok(Kind::Toeplitz { phi, sd })
}

/// Increments of fractional Brownian motion on `{i 2^{-n}}` from `seed`.
pub fn sample_fgn(n: u32, alpha: f64, seed: u64) -> Result<Vec<f64>> {
    Ok(FgnSampler::new(n, alpha)?.sample(&mut stream(seed, 0)))
}

/// A fractional Brownian path on the dyadic grid of step `2^{-resolution}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub resolution: u32,
    /// `values[i] = B(i 2^{-resolution})`, length `2^resolution + 1`.
    pub values: Vec<f64>,
    pub hurst: f64,
    pub seed: u64,
}

impl FbmPath {
    pub fn from_increments(increments: &[f64], hurst: f64, seed: u64) -> Result<Self> {
        if !increments.len().is_power_of_two() {
            return Err(invalid("increments", "length must be a power of two"));
        }
        let resolution = increments.len().trailing_zeros();
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for x in increments {
            acc += x;
            values.push(acc);
        }
        Ok(FbmPath { resolution, values, hurst, seed })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / (1u64 << self.resolution) as f64
    }

    pub fn to_grid(&self) -> GridFunction {
        GridFunction {
            base: 2,
            resolution: self.resolution,
            offset: 0,
            values: self.values.clone(),
            exponent_hint: Some(self.hurst),
        }
    }
}

/// Path for `(n, alpha, seed)`; equal inputs give bit-identical output.
pub fn sample_path(n: u32, alpha: f64, seed: u64) -> Result<FbmPath> {
    let sampler = FgnSampler::new(n, alpha)?;
    Ok(sample_path_with(&sampler, seed, 0))
}

/// Path number `index` of the batch keyed by `seed`.
pub fn sample_path_with(sampler: &FgnSampler, seed: u64, index: u64) -> FbmPath {
    let mut rng: StreamRng = stream(seed, index);
    let inc = sampler.sample(&mut rng);
    FbmPath::from_increments(&inc, sampler.hurst(), seed).expect("sampler emits 2^n increments")
}

/// `max |B(t+h) - B(t)| / sqrt(2 h^{2α} log(1/h))` over grid pairs with
/// `h <= 1/2`.
pub fn modulus_ratio(path: &FbmPath) -> Result<f64> {
    modulus_ratio_up_to(path, 1)
}

/// [`modulus_ratio`] restricted to lags `h <= 2^{-min_level}`.
pub fn modulus_ratio_up_to(path: &FbmPath, min_level: u32) -> Result<f64> {
    if path.resolution < 2 {
        return Err(Error::InsufficientResolution { have: path.resolution, need: 2 });
    }
    if min_level == 0 || min_level > path.resolution {
        return Err(invalid("min_level", "lag cap must lie between 1/2 and one grid step"));
    }
    let cells = 1usize << path.resolution;
    let v = &path.values;
    let alpha = path.hurst;
    let mut best = 0.0f64;
    for lag in 1..=cells >> min_level {
        let h = lag as f64 / cells as f64;
        let denom = (2.0 * h.powf(2.0 * alpha) * (1.0 / h).ln()).sqrt();
        let mut worst = 0.0f64;
        for (a, b) in v.iter().zip(&v[lag..]) {
            worst = worst.max((b - a).abs());
        }
        best = best.max(worst / denom);
    }
    Ok(best)
}
