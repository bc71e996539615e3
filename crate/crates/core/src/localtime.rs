//! Scaled and discrete local times of sampled functions.
//!
//! Time intervals are `I_{n,p} = [p M^{-n}, (p+1) M^{-n})` and value intervals
//! `J_{n,q} = [q w_n, (q+1) w_n)` with `w_n = M^{-αn}`. A sampled function
//! hits `J_{n,q}` on `I_{n,p}` when the range of its samples over the closed
//! interval (optionally widened by the fBm modulus) meets `J_{n,q}`.
//!
//! Membership reports aggregate per-leaf hit ranges up the `M`-ary tree of
//! time intervals with dense count arrays, one merge per level.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::grid::{checked_pow, GridFunction};
use crate::selfaffine::SelfAffineParams;

/// Widest q-span a single tree node may carry.
pub const MAX_NODE_SPAN: u64 = 1 << 26;

/// Base `M`, exponent `α` and hence the value widths `M^{-αn}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueScale {
    pub base: u32,
    pub alpha: f64,
    /// When `M^α` is the integer `k`, widths are taken as exactly `k^{-n}`.
    pub ratio: Option<u32>,
}

impl ValueScale {
    pub fn new(base: u32, alpha: f64) -> Result<Self> {
        if base < 2 {
            return Err(invalid("base", "must be at least 2"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid("alpha", "must lie in (0, 1)"));
        }
        Ok(ValueScale { base, alpha, ratio: None })
    }

    /// Scale of `f_{k,m}`: base `km`, widths `k^{-n}`.
    pub fn self_affine(params: SelfAffineParams) -> Self {
        ValueScale { base: params.base(), alpha: params.alpha(), ratio: Some(params.k()) }
    }

    /// `1 / w_n`.
    pub fn cells_per_unit(&self, n: u32) -> f64 {
        match self.ratio {
            Some(k) => (k as f64).powi(n as i32),
            None => (self.base as f64).powf(self.alpha * n as f64),
        }
    }

    /// The `q` with `v ∈ J_{n,q}`.
    pub fn index(&self, v: f64, n: u32) -> i64 {
        let t = v * self.cells_per_unit(n);
        if self.ratio.is_some() {
            // Exact lattice values that picked up rounding error.
            let r = t.round();
            if (t - r).abs() <= 1e-9 * r.abs().max(1.0) {
                return r as i64;
            }
        }
        t.floor() as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Padding {
    #[default]
    None,
    /// Widen each leaf range by `sqrt(2 h^{2α} log(1/h))` at grid step `h`.
    Modulus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTimeConfig {
    pub scale: ValueScale,
    pub padding: Padding,
    /// Required excess of grid resolution over `n`.
    pub guard: u32,
}

impl LocalTimeConfig {
    pub fn new(scale: ValueScale) -> Self {
        LocalTimeConfig { scale, padding: Padding::None, guard: 0 }
    }

    pub fn with_padding(mut self, padding: Padding) -> Self {
        self.padding = padding;
        self
    }

    pub fn with_guard(mut self, guard: u32) -> Self {
        self.guard = guard;
        self
    }

    fn pad(&self, f: &GridFunction) -> f64 {
        match self.padding {
            Padding::None => 0.0,
            Padding::Modulus => {
                let h = f.step();
                if h >= 1.0 {
                    return 0.0;
                }
                (2.0 * h.powf(2.0 * self.scale.alpha) * (1.0 / h).ln()).sqrt()
            }
        }
    }
}

/// Samples per order-`n` interval, after resolution checks.
fn stride(f: &GridFunction, n: u32, cfg: &LocalTimeConfig) -> Result<u64> {
    if f.base != cfg.scale.base {
        return Err(invalid("base", "grid base differs from the time base M"));
    }
    let need = n + cfg.guard;
    if f.resolution < need {
        return Err(Error::InsufficientResolution { have: f.resolution, need });
    }
    Ok(checked_pow(f.base as u64, f.resolution - n).expect("grid size is bounded"))
}

/// `(lo, hi)` such that the leaf `I_{n,p}` hits exactly `J_{n,q}`, `lo <= q <= hi`.
fn leaf_range(f: &GridFunction, n: u32, p: u64, stride: u64, pad: f64, cfg: &LocalTimeConfig) -> Result<(i64, i64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in p * stride..=(p + 1) * stride {
        let v = f.at(i).ok_or_else(|| invalid("f", "samples do not cover the requested interval"))?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((cfg.scale.index(lo - pad, n), cfg.scale.index(hi + pad, n)))
}

fn check_indices(base: u32, n: u32, m: u32, p: u64) -> Result<u64> {
    if m > n {
        return Err(invalid("m", "coarse order exceeds n"));
    }
    let width = checked_pow(base as u64, m).ok_or_else(|| invalid("m", "order too large"))?;
    if p >= width {
        return Err(invalid("p", "time index beyond M^m"));
    }
    Ok(checked_pow(base as u64, n - m).ok_or_else(|| invalid("n", "order too large"))?)
}

/// `A_{n,m,p,q}(f)`: order-`n` intervals inside `I_{m,p}` on which `f` hits
/// `J_{n,q}`. Without padding this is a lower bound for the continuous
/// function; with modulus padding it is the upper-bound variant.
pub fn scaled_local_time(f: &GridFunction, n: u32, m: u32, p: u64, q: i64, cfg: &LocalTimeConfig) -> Result<u64> {
    let s = stride(f, n, cfg)?;
    let leaves = check_indices(cfg.scale.base, n, m, p)?;
    let pad = cfg.pad(f);
    let mut count = 0;
    for leaf in p * leaves..(p + 1) * leaves {
        let (lo, hi) = leaf_range(f, n, leaf, s, pad, cfg)?;
        count += u64::from(lo <= q && q <= hi);
    }
    Ok(count)
}

/// Worst ratio at one coarse order `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelWorst {
    pub m: u32,
    pub max_count: u64,
    pub threshold: f64,
    pub p: u64,
    pub q: i64,
}

impl LevelWorst {
    pub fn ratio(&self) -> f64 {
        self.max_count as f64 / self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeReport {
    pub n: u32,
    /// Largest count / threshold over all `(m, p, q)`.
    pub worst_ratio: f64,
    /// `(m, p, q)` attaining the worst ratio.
    pub argmax: (u32, u64, i64),
    pub member: bool,
    /// The bound is vacuous at this `n` and the check was skipped.
    pub degenerate: bool,
    pub levels: Vec<LevelWorst>,
}

impl LocalTimeReport {
    fn from_levels(n: u32, levels: Vec<LevelWorst>) -> Self {
        let mut worst = 0.0;
        let mut argmax = (0, 0, 0);
        for l in &levels {
            let r = l.ratio();
            if r > worst {
                worst = r;
                argmax = (l.m, l.p, l.q);
            }
        }
        LocalTimeReport { n, worst_ratio: worst, argmax, member: worst <= 1.0, degenerate: false, levels }
    }

    fn degenerate(n: u32) -> Self {
        LocalTimeReport {
            n,
            worst_ratio: f64::INFINITY,
            argmax: (0, 0, 0),
            member: false,
            degenerate: true,
            levels: Vec::new(),
        }
    }
}

/// Hit counts over the q-span of one tree node.
struct Node {
    lo: i64,
    counts: Vec<u32>,
}

impl Node {
    fn leaf(lo: i64, hi: i64) -> Result<Self> {
        let span = (hi - lo + 1) as u64;
        if span > MAX_NODE_SPAN {
            return Err(Error::CapExceeded { what: "value span of one interval", need: span as u128, cap: MAX_NODE_SPAN as u128 });
        }
        Ok(Node { lo, counts: vec![1; span as usize] })
    }

    fn merge(children: &[Node]) -> Result<Self> {
        let lo = children.iter().map(|c| c.lo).min().expect("at least one child");
        let hi = children.iter().map(|c| c.lo + c.counts.len() as i64).max().expect("at least one child");
        let span = (hi - lo) as u64;
        if span > MAX_NODE_SPAN {
            return Err(Error::CapExceeded { what: "value span of one interval", need: span as u128, cap: MAX_NODE_SPAN as u128 });
        }
        let mut counts = vec![0u32; span as usize];
        for c in children {
            let off = (c.lo - lo) as usize;
            for (slot, v) in counts[off..off + c.counts.len()].iter_mut().zip(&c.counts) {
                *slot += v;
            }
        }
        Ok(Node { lo, counts })
    }

    /// Largest count and its `q` among `q` in `allowed`.
    fn peak(&self, allowed: (i64, i64)) -> (u64, i64) {
        let mut best = (0u64, self.lo.max(allowed.0));
        for (t, &c) in self.counts.iter().enumerate() {
            let q = self.lo + t as i64;
            if q >= allowed.0 && q <= allowed.1 && c as u64 > best.0 {
                best = (c as u64, q);
            }
        }
        best
    }
}

/// Aggregates leaf ranges up a `base`-ary tree of depth `n`, returning the
/// worst count per level `m = n, n-1, …, 0` (indexed by `m`).
fn aggregate(
    base: u32,
    n: u32,
    leaves: Vec<Node>,
    allowed: (i64, i64),
    threshold: impl Fn(u32) -> f64,
) -> Result<Vec<LevelWorst>> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut nodes = leaves;
    let b = base as usize;
    for m in (0..=n).rev() {
        if m < n {
            nodes = nodes.chunks(b).map(Node::merge).collect::<Result<_>>()?;
        }
        let mut worst = LevelWorst { m, max_count: 0, threshold: threshold(m), p: 0, q: 0 };
        for (p, node) in nodes.iter().enumerate() {
            let (c, q) = node.peak(allowed);
            if c > worst.max_count {
                worst.max_count = c;
                worst.p = p as u64;
                worst.q = q;
            }
        }
        out.push(worst);
    }
    out.reverse();
    Ok(out)
}

fn class_a_threshold(n: u32, m: u32, scale: &ValueScale) -> f64 {
    let nf = n as f64;
    nf * nf * (scale.base as f64).powf((1.0 - scale.alpha) * (n - m) as f64)
}

fn require_full(f: &GridFunction) -> Result<()> {
    if f.is_full() {
        Ok(())
    } else {
        Err(invalid("f", "membership needs samples on all of [0, 1]"))
    }
}

/// Checks `A_{n,m,p,q}(f) <= n² M^{(1-α)(n-m)}` for all `m <= n`, `p`, `q`.
pub fn class_a_membership(f: &GridFunction, n: u32, cfg: &LocalTimeConfig) -> Result<LocalTimeReport> {
    require_full(f)?;
    let s = stride(f, n, cfg)?;
    let pad = cfg.pad(f);
    let count = checked_pow(cfg.scale.base as u64, n).expect("bounded by the grid");
    let leaves = (0..count)
        .map(|p| leaf_range(f, n, p, s, pad, cfg).and_then(|(lo, hi)| Node::leaf(lo, hi)))
        .collect::<Result<Vec<_>>>()?;
    let levels = aggregate(cfg.scale.base, n, leaves, (i64::MIN, i64::MAX), |m| {
        class_a_threshold(n, m, &cfg.scale)
    })?;
    Ok(LocalTimeReport::from_levels(n, levels))
}

/// Triple loop over `(m, p, q)`; reference for [`class_a_membership`].
pub fn class_a_membership_direct(f: &GridFunction, n: u32, cfg: &LocalTimeConfig) -> Result<LocalTimeReport> {
    require_full(f)?;
    let s = stride(f, n, cfg)?;
    let pad = cfg.pad(f);
    let count = checked_pow(cfg.scale.base as u64, n).expect("bounded by the grid");
    let ranges = (0..count).map(|p| leaf_range(f, n, p, s, pad, cfg)).collect::<Result<Vec<_>>>()?;
    let qlo = ranges.iter().map(|r| r.0).min().unwrap_or(0);
    let qhi = ranges.iter().map(|r| r.1).max().unwrap_or(0);
    let mut levels = Vec::new();
    for m in 0..=n {
        let per = checked_pow(cfg.scale.base as u64, n - m).unwrap() as usize;
        let mut worst = LevelWorst { m, max_count: 0, threshold: class_a_threshold(n, m, &cfg.scale), p: 0, q: 0 };
        for p in 0..count as usize / per {
            for q in qlo..=qhi {
                let c = ranges[p * per..(p + 1) * per].iter().filter(|r| r.0 <= q && q <= r.1).count() as u64;
                if c > worst.max_count {
                    worst = LevelWorst { max_count: c, p: p as u64, q, ..worst };
                }
            }
        }
        levels.push(worst);
    }
    Ok(LocalTimeReport::from_levels(n, levels))
}

/// Values on `{i 2^{-n} : 0 <= i < 2^n}`.
fn lattice(f: &GridFunction, n: u32) -> Result<&[f64]> {
    if f.base != 2 || f.resolution != n || f.offset != 0 {
        return Err(invalid("f", "discrete local times need a full dyadic grid at resolution n"));
    }
    let len = 1usize << n;
    if f.values.len() < len {
        return Err(invalid("f", "too few samples"));
    }
    Ok(&f.values[..len])
}

/// `S_{n,m,p,q}(f)`: points of `I_{m,p} ∩ 2^{-n}ℤ` where `f ∈ J_{n,q}`, with
/// `J_{n,q}` of width `2^{-αn}`.
pub fn discrete_local_time(f: &GridFunction, n: u32, m: u32, p: u64, q: i64, alpha: f64) -> Result<u64> {
    let scale = ValueScale::new(2, alpha)?;
    let values = lattice(f, n)?;
    let per = check_indices(2, n, m, p)? as usize;
    let start = p as usize * per;
    Ok(values[start..start + per].iter().filter(|&&v| scale.index(v, n) == q).count() as u64)
}

/// Checks `S_{n,m,p,q} <= (n log n) 2^{(1-α)(n-m)}` for all `m <= n`, `p`
/// and `|q| <= n 2^{αn}`. The bound is vacuous for `n <= 1`, which is
/// reported as degenerate.
pub fn class_s_membership(f: &GridFunction, n: u32, alpha: f64) -> Result<LocalTimeReport> {
    let scale = ValueScale::new(2, alpha)?;
    let values = lattice(f, n)?;
    if n <= 1 {
        return Ok(LocalTimeReport::degenerate(n));
    }
    let qmax = ((n as f64) * 2f64.powf(alpha * n as f64)).floor() as i64;
    let leaves = values
        .iter()
        .map(|&v| {
            let q = scale.index(v, n);
            Node::leaf(q, q)
        })
        .collect::<Result<Vec<_>>>()?;
    let nf = n as f64;
    let levels = aggregate(2, n, leaves, (-qmax, qmax), |m| {
        nf * nf.ln() * 2f64.powf((1.0 - alpha) * (n - m) as f64)
    })?;
    Ok(LocalTimeReport::from_levels(n, levels))
}
