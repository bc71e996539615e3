//! Heavy-tailed renewal sets, their interval measures and energies, greedy
//! increasing subsets of random walks, and survival-tail fitting.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::fbm::FbmPath;
use crate::rng::{open01, stream};
use crate::stats::linear_fit;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid("alpha", "must lie in (0, 1)"))
    }
}

/// `ceil(u^{-1/α})`, saturating at `u64::MAX`.
pub fn tau_from_uniform(u: f64, alpha: f64) -> u64 {
    let t = u.powf(-1.0 / alpha).ceil();
    if t >= u64::MAX as f64 {
        u64::MAX
    } else {
        (t as u64).max(1)
    }
}

/// A waiting time with `P(τ > n) = n^{-α}` for every integer `n >= 1`.
pub fn sample_tau<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> u64 {
    tau_from_uniform(open01(rng), alpha)
}

/// One waiting time from the stream `(seed, 0)`.
pub fn sample_tau_synthetic(alpha: f64, seed: u64) -> Result<u64> {
    check_alpha(alpha)?;
    Ok(sample_tau(&mut stream(seed, 0), alpha))
}

/// Waiting times drawn until their sum reaches `horizon`.
pub fn sample_taus_until<R: Rng + ?Sized>(rng: &mut R, alpha: f64, horizon: u64) -> Result<Vec<u64>> {
    check_alpha(alpha)?;
    let mut taus = Vec::new();
    let mut sum = 0u64;
    while sum < horizon {
        let t = sample_tau(rng, alpha);
        sum = sum.saturating_add(t);
        taus.push(t);
    }
    Ok(taus)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenewalSample {
    pub taus: Vec<u64>,
    /// `T_k = τ_1 + … + τ_k`.
    pub partial_sums: Vec<u64>,
    pub horizon: u64,
    /// `m_n = |{k >= 1 : T_k < n}|`.
    pub count: u64,
    pub alpha: f64,
}

/// Equal-length half-open intervals `[s·cell, (s+1)·cell)` carrying a
/// uniform density.
#[derive(Debug, Clone, PartialEq)]
pub struct MassedIntervals {
    pub cell: f64,
    /// Sorted distinct lattice indices `s`.
    pub starts: Vec<u64>,
    pub density: f64,
}

impl MassedIntervals {
    pub fn new(cell: f64, mut starts: Vec<u64>, density: f64) -> Result<Self> {
        if !(cell > 0.0) || !(density > 0.0) {
            return Err(invalid("density", "cell length and density must be positive"));
        }
        starts.sort_unstable();
        starts.dedup();
        Ok(MassedIntervals { cell, starts, density })
    }

    pub fn total_mass(&self) -> f64 {
        self.starts.len() as f64 * self.cell * self.density
    }

    pub fn with_density(&self, density: f64) -> Self {
        MassedIntervals { density, ..self.clone() }
    }

    /// Left endpoints `s·cell`.
    pub fn lefts(&self) -> impl Iterator<Item = f64> + '_ {
        self.starts.iter().map(move |&s| s as f64 * self.cell)
    }
}

/// Renewal times below `n`, the set `S_n = 𝒯 ∩ [0, n) + [0, 1)` as unit
/// intervals, and `μ_n` on `C_n = S_n / n` with density `n^{1-α}`.
pub fn renewal_sets(taus: &[u64], n: u64, alpha: f64) -> Result<(RenewalSample, MassedIntervals)> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(invalid("n", "horizon must be positive"));
    }
    if taus.contains(&0) {
        return Err(invalid("taus", "waiting times must be positive"));
    }
    let sum: u128 = taus.iter().map(|&t| t as u128).sum();
    if sum < n as u128 {
        return Err(Error::InsufficientWaitingTimes { sum, horizon: n });
    }
    let mut partial_sums = Vec::with_capacity(taus.len());
    let mut acc = 0u64;
    for &t in taus {
        acc = acc.saturating_add(t);
        partial_sums.push(acc);
    }
    let hits: Vec<u64> = partial_sums.iter().copied().take_while(|&t| t < n).collect();
    let count = hits.len() as u64;
    let nf = n as f64;
    let mu = MassedIntervals::new(1.0 / nf, hits, nf.powf(1.0 - alpha))?;
    let sample = RenewalSample { taus: taus.to_vec(), partial_sums, horizon: n, count, alpha };
    Ok((sample, mu))
}

/// `S_n` with Lebesgue measure: unit intervals at the renewal times below `n`.
pub fn unit_cells(sample: &RenewalSample) -> MassedIntervals {
    let starts = sample.partial_sums.iter().copied().take_while(|&t| t < sample.horizon).collect();
    MassedIntervals { cell: 1.0, starts, density: 1.0 }
}

fn binomial(p: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (p - i as f64) / (i + 1) as f64)
}

/// `∫_0^1 ∫_0^1 |x - y + d|^{-γ} dx dy` for integer `d >= 0`.
pub fn unit_kernel(d: u64, gamma: f64) -> f64 {
    let p = 2.0 - gamma;
    let norm = (1.0 - gamma) * (2.0 - gamma);
    if d == 0 {
        return 2.0 / norm;
    }
    let df = d as f64;
    if d < 8 {
        return ((df + 1.0).powf(p) - 2.0 * df.powf(p) + (df - 1.0).powf(p)) / norm;
    }
    // (d+1)^p + (d-1)^p - 2d^p = 2 Σ_{j>=1} C(p, 2j) d^{p-2j}
    let mut sum = 0.0;
    let mut j = 1;
    loop {
        let term = binomial(p, 2 * j) * df.powf(p - 2.0 * j as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || j > 40 {
            break;
        }
        j += 1;
    }
    2.0 * sum / norm
}

/// `∫∫ |x - y|^{-γ} dμ(x) dμ(y)`.
pub fn gamma_energy(mi: &MassedIntervals, gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(invalid("gamma", "must lie in [0, 1)"));
    }
    let s = &mi.starts;
    let mut total = s.len() as f64 * unit_kernel(0, gamma);
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            total += 2.0 * unit_kernel(s[j] - s[i], gamma);
        }
    }
    Ok(mi.density * mi.density * mi.cell.powf(2.0 - gamma) * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrant {
    /// All coordinates at least 1.
    #[default]
    Strict,
    /// All coordinates at least 0.
    Weak,
}

impl Quadrant {
    fn contains(self, v: &[i64]) -> bool {
        match self {
            Quadrant::Strict => v.iter().all(|&c| c >= 1),
            Quadrant::Weak => v.iter().all(|&c| c >= 0),
        }
    }
}

/// Nearest-neighbour walk in `ℤ^d` starting at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkPath {
    dim: usize,
    /// Positions flattened row by row.
    coords: Vec<i64>,
}

impl WalkPath {
    pub fn new(dim: usize, positions: &[Vec<i64>]) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("dim", "need d >= 2"));
        }
        if positions.iter().any(|p| p.len() != dim) {
            return Err(invalid("positions", "wrong dimension"));
        }
        for w in positions.windows(2) {
            let dist: i64 = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum();
            if dist != 1 {
                return Err(invalid("positions", "consecutive positions must differ by a unit vector"));
            }
        }
        Ok(WalkPath { dim, coords: positions.concat() })
    }

    /// Simple random walk with `steps` steps.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, steps: usize) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("dim", "need d >= 2"));
        }
        let mut coords = vec![0i64; dim * (steps + 1)];
        for t in 1..=steps {
            let dir = rng.random_range(0..2 * dim);
            let (prev, cur) = coords.split_at_mut(t * dim);
            cur[..dim].copy_from_slice(&prev[(t - 1) * dim..]);
            cur[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
        }
        Ok(WalkPath { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of positions (steps + 1).
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn position(&self, i: usize) -> &[i64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
}

/// First `k > 0` with `S(k)` in the quadrant, or `None` if it exceeds `cap`.
pub fn quadrant_tau_with<R: Rng + ?Sized>(rng: &mut R, dim: usize, cap: u64, quadrant: Quadrant) -> Option<u64> {
    let mut pos = vec![0i64; dim];
    for k in 1..=cap {
        let dir = rng.random_range(0..2 * dim);
        pos[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
        if quadrant.contains(&pos) {
            return Some(k);
        }
    }
    None
}

/// [`quadrant_tau_with`] on the stream `(seed, 0)`, strict quadrant.
pub fn quadrant_tau(dim: usize, seed: u64, cap: u64) -> Result<Option<u64>> {
    if dim < 2 {
        return Err(invalid("dim", "need d >= 2"));
    }
    Ok(quadrant_tau_with(&mut stream(seed, 0), dim, cap, Quadrant::Strict))
}

/// `a_0 = 0` and `a_{i+1}` the first later index with
/// `S(a_{i+1}) - S(a_i)` in the strict quadrant.
pub fn greedy_subset(walk: &WalkPath) -> Vec<usize> {
    let mut out = vec![0];
    if walk.is_empty() {
        return out;
    }
    let mut anchor = walk.position(0).to_vec();
    for i in 1..walk.len() {
        let p = walk.position(i);
        if p.iter().zip(&anchor).all(|(a, b)| a - b >= 1) {
            out.push(i);
            anchor.copy_from_slice(p);
        }
    }
    out
}

/// Greedy indices `a_i`, `i >= 1`, below `n`.
pub fn greedy_count(indices: &[usize], n: usize) -> u64 {
    indices.iter().skip(1).take_while(|&&a| a < n).count() as u64
}

/// Survivor counts `|{τ > n}|` at chosen `n` out of `total` samples;
/// censored samples exceed `cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalTable {
    pub total: u64,
    pub cap: Option<u64>,
    /// `(n, survivors)` in increasing `n`.
    pub rows: Vec<(u64, u64)>,
}

impl SurvivalTable {
    /// `None` entries are censored above `cap`.
    pub fn from_samples(samples: &[Option<u64>], cap: Option<u64>, ns: &[u64]) -> Self {
        let mut sorted: Vec<u64> = samples.iter().map(|s| s.unwrap_or(u64::MAX)).collect();
        sorted.sort_unstable();
        let rows = ns
            .iter()
            .map(|&n| (n, (sorted.len() - sorted.partition_point(|&t| t <= n)) as u64))
            .collect();
        SurvivalTable { total: samples.len() as u64, cap, rows }
    }

    pub fn probability(&self, survivors: u64) -> f64 {
        survivors as f64 / self.total as f64
    }
}

/// Log-log least-squares fit with a curvature diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub stderr: f64,
    pub points: usize,
    /// Slope over the upper half of the points minus slope over the lower
    /// half; near zero for a power law.
    pub curvature: f64,
    pub power_law: bool,
}

impl LogLogFit {
    /// `-slope`, the tail exponent of a survival curve.
    pub fn exponent(&self) -> f64 {
        -self.slope
    }
}

/// Largest `|curvature|` still accepted as a power law.
pub const CURVATURE_TOLERANCE: f64 = 0.25;

/// Fit of `log y` against `log x` for positive pairs.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<LogLogFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys)?;
    let half = xs.len() / 2;
    let slope_of = |a: &[f64], b: &[f64]| -> f64 {
        if a.len() >= 2 {
            let (x0, x1) = (a[0], a[a.len() - 1]);
            let (y0, y1) = (b[0], b[b.len() - 1]);
            (y1 - y0) / (x1 - x0)
        } else {
            fit.slope
        }
    };
    let lower = slope_of(&xs[..=half.min(xs.len() - 1)], &ys[..=half.min(ys.len() - 1)]);
    let upper = slope_of(&xs[half..], &ys[half..]);
    let curvature = upper - lower;
    Ok(LogLogFit {
        slope: fit.slope,
        stderr: fit.stderr,
        points: fit.points,
        curvature,
        power_law: curvature.abs() <= CURVATURE_TOLERANCE,
    })
}

/// Survival slope over rows with `lo <= n <= hi`, at least `min_count`
/// survivors, and `n < cap / 4` when censored.
pub fn tail_exponent(table: &SurvivalTable, window: (u64, u64), min_count: u64) -> Result<LogLogFit> {
    let points: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|(n, s)| {
            *n >= window.0 && *n <= window.1 && *s >= min_count && table.cap.is_none_or(|c| *n < c / 4)
        })
        .map(|&(n, s)| (n as f64, table.probability(s)))
        .collect();
    if points.len() < 3 {
        return Err(Error::DegenerateWindow(format!("{} usable survival points", points.len())));
    }
    loglog_fit(&points)
}

/// Time of the first maximum of the path.
pub fn tau_max(path: &FbmPath) -> f64 {
    let mut best = 0;
    for (i, &v) in path.values.iter().enumerate() {
        if v > path.values[best] {
            best = i;
        }
    }
    path.time(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn tau_examples() {
        assert_eq!(tau_from_uniform(0.5, 0.5), 4);
        assert_eq!(tau_from_uniform(1.0, 0.3), 1);
        assert_eq!(tau_from_uniform(1e-300, 0.1), u64::MAX);
        assert!(sample_tau_synthetic(0.5, 1).unwrap() >= 1);
        assert!(sample_tau_synthetic(1.5, 1).is_err());
    }

    #[test]
    fn renewal_examples() {
        let (s, mu) = renewal_sets(&[1; 10], 10, 0.5).unwrap();
        assert_eq!(s.count, 9);
        assert_eq!(s.partial_sums[4], 5);
        assert_relative_eq!(mu.total_mass(), 9.0 * 10f64.powf(-0.5), max_relative = 1e-14);
        let (s, _) = renewal_sets(&[2, 3], 5, 0.5).unwrap();
        assert_eq!(s.count, 1);
        assert!(matches!(renewal_sets(&[2, 2], 5, 0.5), Err(Error::InsufficientWaitingTimes { .. })));
    }

    #[test]
    fn kernel_examples() {
        let unit = MassedIntervals::new(1.0, vec![0], 1.0).unwrap();
        assert_abs_diff_eq!(gamma_energy(&unit, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gamma_energy(&unit, 0.5).unwrap(), 8.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(unit_kernel(1, 0.5), (2f64.powf(1.5) - 2.0) / 0.75, epsilon = 1e-14);
        assert!(gamma_energy(&unit, 1.0).is_err());
    }

    #[test]
    fn kernel_series_matches_closed_form_at_switch() {
        for g in [0.0, 0.25, 0.5, 0.9] {
            let p = 2.0 - g;
            let norm = (1.0 - g) * (2.0 - g);
            for d in [8u64, 9, 12] {
                let df = d as f64;
                let direct = ((df + 1.0).powf(p) - 2.0 * df.powf(p) + (df - 1.0).powf(p)) / norm;
                assert_relative_eq!(unit_kernel(d, g), direct, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn walk_and_greedy() {
        let w = WalkPath::new(2, &[vec![0, 0], vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(greedy_subset(&w), vec![0, 2]);
        let w = WalkPath::new(2, &[vec![0, 0], vec![-1, 0], vec![-1, 1]]).unwrap();
        assert_eq!(greedy_subset(&w), vec![0]);
        assert!(WalkPath::new(2, &[vec![0, 0], vec![1, 1]]).is_err());
        assert_eq!(greedy_count(&[0, 3, 7, 20], 8), 2);
    }

    #[test]
    fn quadrant_tau_at_least_two() {
        for seed in 0..200 {
            if let Some(t) = quadrant_tau(2, seed, 1000).unwrap() {
                assert!(t >= 2);
            }
        }
    }

    #[test]
    fn exact_power_law_table() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|i| {
            let n = (1u64 << i) as f64;
            (n, n.powf(-1.0 / 3.0))
        }).collect();
        let fit = loglog_fit(&pts).unwrap();
        assert_abs_diff_eq!(fit.exponent(), 1.0 / 3.0, epsilon = 1e-12);
        assert!(fit.stderr < 1e-12 && fit.power_law);
        let exp: Vec<(f64, f64)> = (1..=10).map(|i| {
            let n = (1u64 << i) as f64;
            (n, (-n / 50.0).exp())
        }).collect();
        assert!(!loglog_fit(&exp).unwrap().power_law);
    }

    #[test]
    fn argmax_time() {
        let p = FbmPath { resolution: 1, values: vec![0.0, 1.0, 0.5], hurst: 0.5, seed: 0 };
        assert_eq!(tau_max(&p), 0.5);
        let p = FbmPath { resolution: 2, values: vec![0.0, -1.0, -2.0, -3.0, -4.0], hurst: 0.5, seed: 0 };
        assert_eq!(tau_max(&p), 0.0);
    }
}
