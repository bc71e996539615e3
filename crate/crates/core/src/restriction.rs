//! Restriction sets of sampled paths, box counting and β-variation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::fbm::FbmPath;
use crate::stats::{linear_fit, LinearFit};

/// A subset of `[0, 1]` described on the dyadic lattice `2^{-resolution} ℤ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexSet {
    /// Lattice points `i 2^{-N}`, sorted and distinct, `i <= 2^N`.
    Points { resolution: u32, indices: Vec<u64> },
    /// Half-open `[a 2^{-N}, b 2^{-N})`, sorted and disjoint, `b <= 2^N`.
    Intervals { resolution: u32, spans: Vec<(u64, u64)> },
}

impl IndexSet {
    pub fn points(resolution: u32, mut indices: Vec<u64>) -> Result<Self> {
        check_resolution(resolution)?;
        indices.sort_unstable();
        indices.dedup();
        if indices.last().is_some_and(|&i| i > 1 << resolution) {
            return Err(invalid("indices", "point beyond x = 1"));
        }
        Ok(IndexSet::Points { resolution, indices })
    }

    /// Spans are sorted and adjacent ones merged; overlapping input is rejected.
    pub fn intervals(resolution: u32, mut spans: Vec<(u64, u64)>) -> Result<Self> {
        check_resolution(resolution)?;
        spans.retain(|(a, b)| a < b);
        spans.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(spans.len());
        for (a, b) in spans {
            if b > 1 << resolution {
                return Err(invalid("spans", "interval beyond x = 1"));
            }
            match merged.last_mut() {
                Some(last) if a < last.1 => return Err(invalid("spans", "intervals overlap")),
                Some(last) if a == last.1 => last.1 = b,
                _ => merged.push((a, b)),
            }
        }
        Ok(IndexSet::Intervals { resolution, spans: merged })
    }

    pub fn resolution(&self) -> u32 {
        match self {
            IndexSet::Points { resolution, .. } | IndexSet::Intervals { resolution, .. } => *resolution,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            IndexSet::Points { indices, .. } => indices.is_empty(),
            IndexSet::Intervals { spans, .. } => spans.is_empty(),
        }
    }
}

fn check_resolution(resolution: u32) -> Result<()> {
    if resolution > 62 {
        Err(invalid("resolution", "at most 62"))
    } else {
        Ok(())
    }
}

/// `N_n(A, M)`: order-`n` base-`M` intervals meeting `A`.
pub fn box_count(set: &IndexSet, n: u32, base: u32) -> Result<u64> {
    if base < 2 {
        return Err(invalid("base", "must be at least 2"));
    }
    let res = set.resolution();
    let boxes = (base as u128).checked_pow(n).filter(|b| *b <= 1u128 << res);
    let Some(boxes) = boxes else {
        return Err(invalid("n", format!("{base}^{n} boxes exceed the lattice 2^{res}")));
    };
    let cell = 1u128 << res;
    // Box of lattice coordinate t is floor(t · boxes / 2^N).
    let ranges: Vec<(u128, u128)> = match set {
        IndexSet::Points { indices, .. } => indices
            .iter()
            .map(|&t| t as u128 * boxes / cell)
            .filter(|&b| b < boxes)
            .map(|b| (b, b))
            .collect(),
        IndexSet::Intervals { spans, .. } => spans
            .iter()
            .map(|&(a, b)| (a as u128 * boxes / cell, (b as u128 * boxes).div_ceil(cell) - 1))
            .collect(),
    };
    let mut total = 0u128;
    let mut covered: Option<u128> = None;
    for (lo, hi) in ranges {
        let start = match covered {
            Some(c) if c >= lo => c + 1,
            _ => lo,
        };
        if hi >= start {
            total += hi - start + 1;
        }
        covered = Some(covered.map_or(hi, |c| c.max(hi)));
    }
    Ok(total as u64)
}

/// Box counts of one set over a range of orders, with a fit window.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountProfile {
    pub base: u32,
    /// `(n, N_n)` in increasing `n`.
    pub counts: Vec<(u32, u64)>,
    pub window: (u32, u32),
}

impl BoxCountProfile {
    /// Counts for every `n` in `window`.
    pub fn measure(set: &IndexSet, base: u32, window: (u32, u32)) -> Result<Self> {
        if window.0 > window.1 {
            return Err(Error::DegenerateWindow(format!("empty window {window:?}")));
        }
        let counts = (window.0..=window.1)
            .map(|n| box_count(set, n, base).map(|c| (n, c)))
            .collect::<Result<_>>()?;
        Ok(BoxCountProfile { base, counts, window })
    }

    /// Default window `[N/2, N-2]` for a set on the `2^{-N}` lattice.
    pub fn default_window(resolution: u32) -> (u32, u32) {
        (resolution / 2, resolution.saturating_sub(2))
    }

    /// `(n·log M, log N_n)` over the window, dropping empty levels.
    pub fn log_points(&self) -> (Vec<f64>, Vec<f64>) {
        let lb = (self.base as f64).ln();
        self.counts
            .iter()
            .filter(|(n, c)| *c > 0 && *n >= self.window.0 && *n <= self.window.1)
            .map(|&(n, c)| (n as f64 * lb, (c as f64).ln()))
            .unzip()
    }
}

/// Least-squares slope of `log N_n` against `n log M` over the window.
pub fn dim_slope(profile: &BoxCountProfile) -> Result<LinearFit> {
    let (xs, ys) = profile.log_points();
    linear_fit(&xs, &ys)
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Grid cells on which the path changes sign or touches zero.
pub fn zero_set(path: &FbmPath) -> Result<IndexSet> {
    if path.resolution < 4 {
        return Err(Error::InsufficientResolution { have: path.resolution, need: 4 });
    }
    let spans = path
        .values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| sign(w[0]) * sign(w[1]) <= 0)
        .map(|(i, _)| (i as u64, i as u64 + 1))
        .collect();
    IndexSet::intervals(path.resolution, spans)
}

/// Grid indices where the path equals its running maximum (ties included).
pub fn record_set(path: &FbmPath) -> IndexSet {
    let mut best = f64::NEG_INFINITY;
    let mut indices = Vec::new();
    for (i, &v) in path.values.iter().enumerate() {
        if v >= best {
            best = v;
            indices.push(i as u64);
        }
    }
    IndexSet::Points { resolution: path.resolution, indices }
}

/// `(t_i, B(t_i))` for the lattice points of a point set.
pub fn restrict(path: &FbmPath, set: &IndexSet) -> Result<Vec<(f64, f64)>> {
    match set {
        IndexSet::Points { resolution, indices } if *resolution == path.resolution => {
            Ok(indices.iter().map(|&i| (path.time(i as usize), path.values[i as usize])).collect())
        }
        _ => Err(invalid("set", "need a point set on the path's own lattice")),
    }
}

fn check_increasing(points: &[(f64, f64)]) -> Result<()> {
    if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(invalid("points", "abscissae must be strictly increasing"));
    }
    Ok(())
}

/// `sup Σ |f(x_i) - f(x_{i-1})|^β` over increasing subsequences of `points`.
pub fn beta_variation(points: &[(f64, f64)], beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(invalid("beta", "must be positive"));
    }
    check_increasing(points)?;
    let mut best = vec![0.0f64; points.len()];
    for i in 1..points.len() {
        let yi = points[i].1;
        best[i] = (0..i)
            .map(|j| best[j] + (yi - points[j].1).abs().powf(beta))
            .fold(0.0, f64::max);
    }
    Ok(best.into_iter().fold(0.0, f64::max))
}

/// Largest point count accepted by [`beta_variation_exhaustive`].
pub const EXHAUSTIVE_MAX_POINTS: usize = 20;

/// The same supremum by enumerating every subsequence.
pub fn beta_variation_exhaustive(points: &[(f64, f64)], beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(invalid("beta", "must be positive"));
    }
    check_increasing(points)?;
    if points.len() > EXHAUSTIVE_MAX_POINTS {
        return Err(Error::CapExceeded {
            what: "exhaustive subsequences",
            need: 1u128 << points.len(),
            cap: 1 << EXHAUSTIVE_MAX_POINTS,
        });
    }
    let mut best = 0.0f64;
    for mask in 1u32..1 << points.len() {
        let mut prev: Option<f64> = None;
        let mut sum = 0.0;
        for (i, p) in points.iter().enumerate() {
            if mask >> i & 1 == 1 {
                if let Some(y) = prev {
                    sum += (p.1 - y).abs().powf(beta);
                }
                prev = Some(p.1);
            }
        }
        best = best.max(sum);
    }
    Ok(best)
}

/// `max |f(x) - f(y)| / |x - y|^β` over pairs of `points`.
pub fn restricted_holder_constant(points: &[(f64, f64)], beta: f64) -> Result<f64> {
    if points.len() < 2 {
        return Err(invalid("points", "need at least two points"));
    }
    check_increasing(points)?;
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max((b.1 - a.1).abs() / (b.0 - a.0).powf(beta));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn path(values: Vec<f64>) -> FbmPath {
        FbmPath { resolution: (values.len() - 1).trailing_zeros(), values, hurst: 0.5, seed: 0 }
    }

    #[test]
    fn box_count_examples() {
        let full = IndexSet::intervals(10, vec![(0, 1024)]).unwrap();
        assert_eq!(box_count(&full, 6, 3).unwrap(), 729);
        assert_eq!(box_count(&full, 10, 2).unwrap(), 1024);
        let origin = IndexSet::points(10, vec![0]).unwrap();
        assert_eq!(box_count(&origin, 5, 2).unwrap(), 1);
        // {0, 0.5, 0.999} on a 2^10 lattice.
        let three = IndexSet::points(10, vec![0, 512, 1023]).unwrap();
        assert_eq!(box_count(&three, 1, 2).unwrap(), 2);
        assert!(box_count(&three, 11, 2).is_err());
        let one = IndexSet::points(4, vec![16]).unwrap();
        assert_eq!(box_count(&one, 2, 2).unwrap(), 0);
    }

    #[test]
    fn intervals_merge_and_reject_overlap() {
        let s = IndexSet::intervals(4, vec![(3, 5), (0, 2), (2, 3)]).unwrap();
        assert_eq!(s, IndexSet::Intervals { resolution: 4, spans: vec![(0, 5)] });
        assert!(IndexSet::intervals(4, vec![(0, 3), (2, 5)]).is_err());
    }

    #[test]
    fn slope_examples() {
        let exact = BoxCountProfile { base: 2, counts: (1..=10).map(|n| (n, 1u64 << n)).collect(), window: (1, 10) };
        let fit = dim_slope(&exact).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-12);
        let few = BoxCountProfile { base: 2, counts: vec![(1, 2), (2, 4)], window: (1, 2) };
        assert!(dim_slope(&few).is_err());
    }

    #[test]
    fn zero_and_record_sets() {
        let mut v = vec![0.5; 17];
        v[0] = 0.0;
        assert_eq!(
            zero_set(&path(v)).unwrap(),
            IndexSet::Intervals { resolution: 4, spans: vec![(0, 1)] }
        );
        let alt: Vec<f64> = (0..17).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(zero_set(&path(alt)).unwrap(), IndexSet::Intervals { resolution: 4, spans: vec![(0, 16)] });
        let r = record_set(&FbmPath { resolution: 2, values: vec![0.0, 1.0, 0.5, 2.0, 2.0], hurst: 0.5, seed: 0 });
        assert_eq!(r, IndexSet::Points { resolution: 2, indices: vec![0, 1, 3, 4] });
    }

    #[test]
    fn variation_examples() {
        let id = [(0.0, 0.0), (1.0, 1.0)];
        for b in [0.3, 1.0, 4.0] {
            assert_eq!(beta_variation(&id, b).unwrap(), 1.0);
        }
        let tent = [(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)];
        assert_eq!(beta_variation(&tent, 1.0).unwrap(), 2.0);
        assert_eq!(beta_variation(&tent, 2.0).unwrap(), 2.0);
        assert_eq!(beta_variation_exhaustive(&tent, 2.0).unwrap(), 2.0);
        assert!(beta_variation(&[(0.0, 0.0), (0.0, 1.0)], 1.0).is_err());
    }

    #[test]
    fn holder_constant_examples() {
        assert_eq!(restricted_holder_constant(&[(0.0, 2.0), (0.3, 2.0), (1.0, 2.0)], 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(
            restricted_holder_constant(&[(0.0, 0.0), (0.25, 0.25), (1.0, 1.0)], 1.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }
}
