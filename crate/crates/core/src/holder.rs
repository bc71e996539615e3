//! Piecewise-linear functions, Hölder extension and the splice construction
//! that replaces each small piece of a piecewise-linear `f0` by a rescaled
//! copy of a self-affine function.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::grid::GridFunction;
use crate::selfaffine::{evaluate_f64, SelfAffineParams};

/// Continuous piecewise-linear function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    /// Breakpoints must increase strictly from `0` to `1`.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(invalid("breakpoints", "need at least two breakpoints with one value each"));
        }
        if xs[0] != 0.0 || xs[xs.len() - 1] != 1.0 {
            return Err(invalid("breakpoints", "must start at 0 and end at 1"));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("breakpoints", "must be strictly increasing"));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(invalid("values", "must be finite"));
        }
        Ok(PiecewiseLinear { xs, ys })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn segments(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn has_nonzero_slopes(&self) -> bool {
        self.ys.windows(2).all(|w| w[0] != w[1])
    }

    /// Shortest segment length.
    pub fn theta(&self) -> f64 {
        self.xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Largest rise over one segment.
    pub fn xi(&self) -> f64 {
        self.ys.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }

    /// Index of the segment containing `x`, clamped to `[0, 1]`.
    pub fn segment_of(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&b| b <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = self.segment_of(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        if x == x1 {
            return y1;
        }
        y0 + (x - x0) / (x1 - x0) * (y1 - y0)
    }

    pub fn sample(&self, base: u32, resolution: u32) -> Result<GridFunction> {
        GridFunction::sample(base, resolution, |x| self.eval(x))
    }
}

fn check_pairs(xs: &[f64], ys: &[f64], alpha: f64, c: f64) -> Result<()> {
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let lhs = (ys[j] - ys[i]).abs();
            let rhs = c * (xs[j] - xs[i]).abs().powf(alpha);
            if lhs > rhs {
                return Err(Error::HolderViolation { i, j, lhs, rhs });
            }
        }
    }
    Ok(())
}

/// Extends `c`-Hölder data on finitely many points of `[0, 1]` to the whole
/// interval: linear between consecutive points, constant outside them.
pub fn holder_extend(points: &[(f64, f64)], alpha: f64, c: f64) -> Result<PiecewiseLinear> {
    if points.is_empty() {
        return Err(invalid("points", "need at least one point"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) || !(c >= 0.0) {
        return Err(invalid("alpha", "need 0 < α <= 1 and c >= 0"));
    }
    let mut pts = points.to_vec();
    if pts.iter().any(|(x, y)| !(0.0..=1.0).contains(x) || !y.is_finite()) {
        return Err(invalid("points", "abscissae must lie in [0, 1] and values be finite"));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(invalid("points", "abscissae must be distinct"));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    check_pairs(&xs, &ys, alpha, c)?;

    let mut out_x = Vec::with_capacity(xs.len() + 2);
    let mut out_y = Vec::with_capacity(xs.len() + 2);
    if xs[0] > 0.0 {
        out_x.push(0.0);
        out_y.push(ys[0]);
    }
    out_x.extend_from_slice(&xs);
    out_y.extend_from_slice(&ys);
    if xs[xs.len() - 1] < 1.0 {
        out_x.push(1.0);
        out_y.push(ys[ys.len() - 1]);
    }
    if out_x.len() == 1 {
        // A single point at 0 or 1.
        out_x = alloc::vec![0.0, 1.0];
        out_y = alloc::vec![ys[0], ys[0]];
    }
    PiecewiseLinear::new(out_x, out_y)
}

/// Inputs of the splice construction besides `f0` and `n0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpliceSettings {
    /// Target exponent `α`; must be below the self-affine exponent.
    pub alpha: f64,
    /// Hölder constant of `f0` at exponent `α`, below 1.
    pub c0: f64,
    /// Radius of the ball around `f0` that `f` must stay in.
    pub r0: f64,
    pub params: SelfAffineParams,
}

impl SpliceSettings {
    /// Hölder constant of the self-affine function at its own exponent.
    pub fn c1(&self) -> f64 {
        2.0 * self.params.k() as f64
    }
}

fn validate(f0: &PiecewiseLinear, s: &SpliceSettings) -> Result<()> {
    if !f0.has_nonzero_slopes() {
        return Err(invalid("f0", "every segment must have a nonzero slope"));
    }
    if !(s.c0 > 0.0 && s.c0 < 1.0) {
        return Err(invalid("c0", "Hölder constant of f0 must lie in (0, 1)"));
    }
    if !(s.alpha > 0.0 && s.alpha < s.params.alpha()) {
        return Err(invalid("alpha", "must lie strictly between 0 and the self-affine exponent"));
    }
    if !(s.r0 > 0.0) {
        return Err(invalid("r0", "must be positive"));
    }
    check_pairs(f0.breakpoints(), f0.values(), s.alpha, s.c0)
}

/// Smallest `n0` allowed by the three lower bounds of the construction.
pub fn min_n0(f0: &PiecewiseLinear, s: &SpliceSettings) -> Result<u64> {
    validate(f0, s)?;
    let (theta, xi) = (f0.theta(), f0.xi());
    let gamma = s.params.alpha();
    let b1 = 2.0 * xi / s.r0;
    let b2 = (2.0 * xi / ((1.0 - s.c0) * theta.powf(s.alpha))).powf(1.0 / (1.0 - s.alpha));
    let b3 = (2.0 * xi * s.c1() / theta.powf(gamma)).powf(1.0 / (1.0 - gamma));
    Ok(libm::ceil(b1.max(b2).max(b3)).max(1.0) as u64)
}

/// `f0` with every `1/n0`-th of each segment replaced by a copy of `f_{k,m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplicedFunction {
    pub f0: PiecewiseLinear,
    pub settings: SpliceSettings,
    pub n0: u64,
}

impl SplicedFunction {
    pub fn new(f0: PiecewiseLinear, settings: SpliceSettings, n0: u64) -> Result<Self> {
        let need = min_n0(&f0, &settings)?;
        if n0 < need {
            return Err(invalid("n0", format!("{n0} is below the required {need}")));
        }
        Ok(SplicedFunction { f0, settings, n0 })
    }

    /// The node `x_{i,j}`.
    pub fn node(&self, i: usize, j: u64) -> f64 {
        let xs = self.f0.breakpoints();
        xs[i] + j as f64 / self.n0 as f64 * (xs[i + 1] - xs[i])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let xs = self.f0.breakpoints();
        let ys = self.f0.values();
        let i = self.f0.segment_of(x);
        let u = (x - xs[i]) / (xs[i + 1] - xs[i]);
        let mut s = u * self.n0 as f64;
        if (s - libm::round(s)).abs() < 1e-9 {
            s = libm::round(s);
        }
        let j = (libm::floor(s) as u64).min(self.n0 - 1);
        let a = (s - j as f64).clamp(0.0, 1.0);
        let rise = ys[i + 1] - ys[i];
        let y_ij = ys[i] + j as f64 / self.n0 as f64 * rise;
        y_ij + evaluate_f64(self.settings.params, a) / self.n0 as f64 * rise
    }

    /// `ξ / n0`.
    pub fn distance_bound(&self) -> f64 {
        self.f0.xi() / self.n0 as f64
    }

    /// Depth of the base-`km` grid that resolves every copy.
    pub fn grid_depth(&self) -> u32 {
        let b = self.settings.params.base() as f64;
        let copies = (self.n0 * self.f0.segments() as u64) as f64;
        libm::ceil(libm::log(copies) / libm::log(b)).max(0.0) as u32 + 6
    }

    pub fn to_grid(&self) -> Result<GridFunction> {
        let mut g = GridFunction::sample(self.settings.params.base(), self.grid_depth(), |x| self.eval(x))?;
        g.exponent_hint = Some(self.settings.alpha);
        Ok(g)
    }
}

/// Builds the spliced function and samples it on its resolving grid.
pub fn splice(f0: PiecewiseLinear, settings: SpliceSettings, n0: u64) -> Result<(SplicedFunction, GridFunction)> {
    let f = SplicedFunction::new(f0, settings, n0)?;
    let g = f.to_grid()?;
    Ok((f, g))
}

/// Largest `max(window) - min(window)` over windows of `width` samples.
fn max_oscillation(values: &[f64], width: usize) -> f64 {
    let mut hi: VecDeque<usize> = VecDeque::new();
    let mut lo: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0f64;
    for (t, &v) in values.iter().enumerate() {
        while hi.back().is_some_and(|&b| values[b] <= v) {
            hi.pop_back();
        }
        hi.push_back(t);
        while lo.back().is_some_and(|&b| values[b] >= v) {
            lo.pop_back();
        }
        lo.push_back(t);
        if t + 1 >= width {
            let start = t + 1 - width;
            while hi[0] < start {
                hi.pop_front();
            }
            while lo[0] < start {
                lo.pop_front();
            }
            best = best.max(values[hi[0]] - values[lo[0]]);
        }
    }
    if values.len() < width && !values.is_empty() {
        let (mn, mx) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        best = mx - mn;
    }
    best
}

/// Checks `|g(x) - g(y)| <= c |x - y|^α` for every pair of grid points.
///
/// Lags are handled in bands `[lo, hi)`: when the largest oscillation over
/// `hi` consecutive samples is already below `c (lo·h)^α` the whole band
/// holds; otherwise the band is split, down to single lags checked pairwise.
pub fn check_holder_grid(g: &GridFunction, alpha: f64, c: f64) -> Result<()> {
    let v = &g.values;
    let h = g.step();
    let n = v.len();
    if n < 2 {
        return Ok(());
    }
    let mut stack = Vec::new();
    let mut lo = 1usize;
    while lo < n {
        stack.push((lo, (2 * lo).min(n)));
        lo *= 2;
    }
    while let Some((lo, hi)) = stack.pop() {
        let bound = c * (lo as f64 * h).powf(alpha);
        if max_oscillation(v, hi) <= bound {
            continue;
        }
        if hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            stack.push((lo, mid));
            stack.push((mid, hi));
            continue;
        }
        for i in 0..n - lo {
            let lhs = (v[i + lo] - v[i]).abs();
            if lhs > bound {
                return Err(Error::HolderViolation { i, j: i + lo, lhs, rhs: bound });
            }
        }
    }
    Ok(())
}
