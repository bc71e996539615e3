//! The self-affine functions `f_{k,m}`.
//!
//! The graph of `f_{k,m}` is the attractor of the `M = km` affine maps
//!
//! ```text
//! F_{ik+j}(x, y) = ((x + ik + j) / M, (i mod 2) + (-1)^i (y + j) / k)
//! ```
//!
//! with `0 <= i < m`, `0 <= j < k` and `m` odd. Values at base-`M` rationals
//! are rationals with denominator dividing a power of `k`, so everything here
//! is computed in integers: evaluation, approximants, interval images and
//! scaled local time counts.

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::grid::{checked_pow, GridFunction};

/// Vertex cap for exact approximants.
pub const MAX_APPROXIMANT_VERTICES: u64 = 1 << 24;
/// Largest leaf count for which certification also runs the literal sweep.
pub const LITERAL_SWEEP_LEAVES: u64 = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SelfAffineParams {
    k: u32,
    m: u32,
}

impl SelfAffineParams {
    pub fn new(k: u32, m: u32) -> Result<Self> {
        if k < 2 {
            return Err(invalid("k", "must be at least 2"));
        }
        if m < 2 || m % 2 == 0 {
            return Err(invalid("m", "must be odd and at least 3"));
        }
        if k.checked_mul(m).is_none_or(|b| b > 1 << 16) {
            return Err(invalid("k", "k·m must not exceed 2^16"));
        }
        Ok(SelfAffineParams { k, m })
    }

    pub fn k(self) -> u32 {
        self.k
    }

    pub fn m(self) -> u32 {
        self.m
    }

    /// `M = km`.
    pub fn base(self) -> u32 {
        self.k * self.m
    }

    pub fn alpha(self) -> f64 {
        holder_exponent(self)
    }

    /// `d = ik + j` as `(i, j)`.
    fn split(self, d: u32) -> (u32, u32) {
        (d / self.k, d % self.k)
    }

    fn check_digit(self, d: u32) -> Result<()> {
        if d < self.base() {
            Ok(())
        } else {
            Err(invalid("digits", "digit out of range for base km"))
        }
    }
}

/// `log k / log(km)`.
pub fn holder_exponent(params: SelfAffineParams) -> f64 {
    libm::log(params.k as f64) / libm::log(params.base() as f64)
}

/// `k^t` and the numerator of `f(Σ d_r M^{-r})` over it.
fn exact_numerator(params: SelfAffineParams, digits: &[u32]) -> Result<(BigInt, BigInt)> {
    let k = BigInt::from(params.k);
    let mut den = BigInt::one();
    let mut num = BigInt::zero();
    for &d in digits.iter().rev() {
        params.check_digit(d)?;
        let (i, j) = params.split(d);
        let shifted = num + BigInt::from(j) * &den;
        den *= &k;
        num = if i % 2 == 0 { shifted } else { &den - shifted };
    }
    Ok((num, den))
}

/// Exact value of `f_{k,m}` at the base-`M` rational with the given digits.
pub fn evaluate_exact(params: SelfAffineParams, digits: &[u32]) -> Result<BigRational> {
    let (num, den) = exact_numerator(params, digits)?;
    Ok(BigRational::new(num, den))
}

/// Exact value at `index · M^{-level}`, including the right endpoint `x = 1`.
pub fn evaluate_grid_exact(params: SelfAffineParams, level: u32, index: u64) -> Result<BigRational> {
    let cells = cells(params, level)?;
    if index > cells {
        return Err(invalid("index", "grid index beyond x = 1"));
    }
    if index == cells {
        return Ok(BigRational::one());
    }
    evaluate_exact(params, &digits(params, level, index))
}

/// Base-`M` digits of `index` at `level`, most significant first.
pub fn digits(params: SelfAffineParams, level: u32, mut index: u64) -> Vec<u32> {
    let b = params.base() as u64;
    let mut out = vec![0u32; level as usize];
    for slot in out.iter_mut().rev() {
        *slot = (index % b) as u32;
        index /= b;
    }
    out
}

fn cells(params: SelfAffineParams, level: u32) -> Result<u64> {
    checked_pow(params.base() as u64, level).ok_or(Error::CapExceeded {
        what: "base-M grid",
        need: (params.base() as u128).saturating_pow(level),
        cap: u64::MAX as u128,
    })
}

/// Floating-point value at `x ∈ [0, 1]`.
///
/// A rounding error `ε` in `x` moves the result by up to `2k ε^α`, so values
/// at non-dyadic `x` are good to roughly `1e-6`; use [`sample_window`] for
/// grid points.
pub fn evaluate_f64(params: SelfAffineParams, x: f64) -> f64 {
    if x >= 1.0 {
        return 1.0;
    }
    let b = params.base() as f64;
    let k = params.k as f64;
    // f(x) = offset + scale · f(u) after each digit is peeled off.
    let mut offset = 0.0;
    let mut scale = 1.0f64;
    let mut u = x.max(0.0);
    while scale.abs() > 1e-17 {
        let t = u * b;
        let d = (t as u32).min(params.base() - 1);
        u = t - d as f64;
        let (i, j) = params.split(d);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        offset += scale * ((i % 2) as f64 + sign * j as f64 / k);
        scale *= sign / k;
    }
    offset + scale * u
}

/// Float samples of `f` at `(offset + t) · M^{-level}`, `t < len`.
pub fn sample_window(params: SelfAffineParams, level: u32, offset: u64, len: u64) -> Result<GridFunction> {
    let total = cells(params, level)?;
    if offset.saturating_add(len) > total + 1 || len == 0 {
        return Err(invalid("len", "window exceeds the unit interval"));
    }
    let k = params.k as f64;
    let values = (offset..offset + len)
        .map(|idx| {
            if idx == total {
                return 1.0;
            }
            let mut v = 0.0;
            let mut rest = idx;
            for _ in 0..level {
                let d = (rest % params.base() as u64) as u32;
                rest /= params.base() as u64;
                let (i, j) = params.split(d);
                v = if i % 2 == 0 { (v + j as f64) / k } else { 1.0 - (v + j as f64) / k };
            }
            v
        })
        .collect();
    GridFunction::window(params.base(), level, offset, values, Some(params.alpha()))
}

/// Float samples of `f` on the whole base-`M` grid of depth `level`.
pub fn sample_grid(params: SelfAffineParams, level: u32) -> Result<GridFunction> {
    let total = cells(params, level)?;
    sample_window(params, level, 0, total + 1)
}

/// The piecewise-linear iterate `f^i = Γ^i(D)` with exact vertex values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactApproximant {
    pub params: SelfAffineParams,
    pub level: u32,
    /// `numerators[t] / k^level` is the value at `t · M^{-level}`.
    pub numerators: Vec<BigInt>,
}

impl ExactApproximant {
    pub fn denominator(&self) -> BigInt {
        BigInt::from(self.params.k).pow(self.level)
    }

    pub fn value(&self, t: usize) -> BigRational {
        BigRational::new(self.numerators[t].clone(), self.denominator())
    }
}

/// Builds `Γ^level(D)` by applying every `F_d` to the previous iterate.
pub fn approximant_exact(params: SelfAffineParams, level: u32) -> Result<ExactApproximant> {
    let need = cells(params, level).ok().filter(|c| *c < MAX_APPROXIMANT_VERTICES);
    if need.is_none() {
        return Err(Error::CapExceeded {
            what: "approximant vertices",
            need: (params.base() as u128).saturating_pow(level) + 1,
            cap: MAX_APPROXIMANT_VERTICES as u128,
        });
    }
    let k = BigInt::from(params.k);
    let mut den = BigInt::one();
    let mut verts = vec![BigInt::zero(), BigInt::one()];
    for _ in 0..level {
        let next_den = &den * &k;
        let mut next = Vec::with_capacity((verts.len() - 1) * params.base() as usize + 1);
        for d in 0..params.base() {
            let (i, j) = params.split(d);
            let lift = BigInt::from(j) * &den;
            let skip = usize::from(d > 0);
            for v in &verts[skip..] {
                let s = v + &lift;
                next.push(if i % 2 == 0 { s } else { &next_den - s });
            }
        }
        verts = next;
        den = next_den;
    }
    Ok(ExactApproximant { params, level, numerators: verts })
}

/// `f^level` as a float piecewise-linear function.
pub fn approximant(params: SelfAffineParams, level: u32) -> Result<crate::holder::PiecewiseLinear> {
    let exact = approximant_exact(params, level)?;
    let n = exact.numerators.len() - 1;
    let scale = libm::pow(params.k as f64, -(level as f64));
    let xs = (0..=n).map(|t| t as f64 / n as f64).collect();
    let ys = exact
        .numerators
        .iter()
        .map(|v| v.to_f64().unwrap_or(f64::NAN) * scale)
        .collect();
    crate::holder::PiecewiseLinear::new(xs, ys)
}

/// The exact image `[q k^{-n}, (q+1) k^{-n}]` of a closed order-`n` interval,
/// with the direction in which `f` traverses it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImageInterval {
    pub level: u32,
    pub q: u64,
    /// `f` maps the left endpoint to the lower end of the image.
    pub increasing: bool,
}

impl ImageInterval {
    pub const ROOT: ImageInterval = ImageInterval { level: 0, q: 0, increasing: true };

    /// Image of the sub-interval with digit `d`.
    pub fn child(self, params: SelfAffineParams, d: u32) -> ImageInterval {
        let (i, j) = params.split(d);
        let k = params.k as u64;
        let local = if i % 2 == 0 { j } else { params.k - 1 - j } as u64;
        let q = if self.increasing { self.q * k + local } else { self.q * k + (k - 1 - local) };
        ImageInterval { level: self.level + 1, q, increasing: self.increasing == (i % 2 == 0) }
    }

    pub fn lower(self, params: SelfAffineParams) -> BigRational {
        BigRational::new(BigInt::from(self.q), BigInt::from(params.k).pow(self.level))
    }

    pub fn upper(self, params: SelfAffineParams) -> BigRational {
        BigRational::new(BigInt::from(self.q + 1), BigInt::from(params.k).pow(self.level))
    }

    /// Whether the closed image meets `J_{level,q} = [q k^{-n}, (q+1) k^{-n})`.
    pub fn hits(self, q: i64) -> bool {
        let lo = self.q as i128;
        let q = q as i128;
        q == lo || q == lo + 1
    }
}

fn value_cells(params: SelfAffineParams, level: u32) -> Result<u64> {
    checked_pow(params.k as u64, level).filter(|v| *v < 1 << 62).ok_or(Error::CapExceeded {
        what: "value intervals",
        need: (params.k as u128).saturating_pow(level),
        cap: 1 << 62,
    })
}

/// Exact image of `f` on the closure of `I_{n,p}`.
pub fn interval_image(params: SelfAffineParams, n: u32, p: u64) -> Result<ImageInterval> {
    value_cells(params, n)?;
    if p >= cells(params, n)? {
        return Err(invalid("p", "time index beyond M^n"));
    }
    Ok(digits(params, n, p)
        .into_iter()
        .fold(ImageInterval::ROOT, |img, d| img.child(params, d)))
}

/// `hist[r]` counts order-`j` intervals of `[0, 1]` whose image has index `r`.
pub fn leaf_histogram(params: SelfAffineParams, j: u32) -> Result<Vec<u64>> {
    let width = value_cells(params, j)?;
    if width > 1 << 28 {
        return Err(Error::CapExceeded { what: "leaf histogram", need: width as u128, cap: 1 << 28 });
    }
    let mut hist = vec![1u64];
    for level in 1..=j {
        let sub = hist.len();
        let span = sub * params.k as usize;
        let mut next = vec![0u64; span];
        for d in 0..params.base() {
            let (i, jj) = params.split(d);
            let base = jj as usize * sub;
            for (r, &c) in hist.iter().enumerate() {
                let slot = if i % 2 == 0 { base + r } else { span - 1 - base - r };
                next[slot] += c;
            }
        }
        debug_assert_eq!(next.len() as u64, checked_pow(params.k as u64, level).unwrap());
        hist = next;
    }
    Ok(hist)
}

fn check_tuple(params: SelfAffineParams, n: u32, ell: u32, p: u64) -> Result<()> {
    if ell > n {
        return Err(invalid("l", "coarse order exceeds n"));
    }
    if p >= cells(params, ell)? {
        return Err(invalid("p", "time index beyond M^l"));
    }
    value_cells(params, n)?;
    Ok(())
}

/// Count of order-`n` intervals in `I_{ℓ,p}` whose image meets `J_{n,q}`.
pub fn scaled_localtime_exact(params: SelfAffineParams, n: u32, ell: u32, p: u64, q: i64) -> Result<u64> {
    check_tuple(params, n, ell, p)?;
    let node = interval_image(params, ell, p)?;
    let hist = leaf_histogram(params, n - ell)?;
    Ok(count_from_histogram(&hist, node, q))
}

fn count_from_histogram(hist: &[u64], node: ImageInterval, q: i64) -> u64 {
    let span = hist.len() as i128;
    let base = node.q as i128 * span;
    [q as i128, q as i128 - 1]
        .into_iter()
        .map(|t| if node.increasing { t - base } else { base + span - 1 - t })
        .filter(|r| (0..span).contains(r))
        .map(|r| hist[r as usize])
        .sum()
}

/// Reference count by walking every order-`n` sub-interval of `I_{ℓ,p}`.
pub fn scaled_localtime_enumerated(params: SelfAffineParams, n: u32, ell: u32, p: u64, q: i64) -> Result<u64> {
    check_tuple(params, n, ell, p)?;
    let leaves = cells(params, n - ell)?;
    if leaves > 1 << 32 {
        return Err(Error::CapExceeded { what: "enumerated leaves", need: leaves as u128, cap: 1 << 32 });
    }
    let mut stack = vec![interval_image(params, ell, p)?];
    let mut count = 0;
    while let Some(node) = stack.pop() {
        if node.level == n {
            count += u64::from(node.hits(q));
            continue;
        }
        stack.extend((0..params.base()).map(|d| node.child(params, d)));
    }
    Ok(count)
}

/// Worst count at one `(n, ℓ)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCertificate {
    pub n: u32,
    pub ell: u32,
    pub max_count: u64,
    /// `3 M^{(1-α)(n-ℓ)} = 3 m^{n-ℓ}`.
    pub bound: u64,
    pub witness_p: u64,
    pub witness_q: i64,
    /// Maximum found by sweeping every `(p, q)` literally, when affordable.
    pub literal_max: Option<u64>,
}

impl LevelCertificate {
    pub fn ratio(&self) -> f64 {
        self.max_count as f64 / self.bound as f64
    }

    pub fn pass(&self) -> bool {
        self.max_count <= self.bound && self.literal_max.is_none_or(|l| l <= self.bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certification {
    pub params: SelfAffineParams,
    pub n_max: u32,
    pub levels: Vec<LevelCertificate>,
}

impl Certification {
    pub fn max_ratio(&self) -> f64 {
        self.levels.iter().map(LevelCertificate::ratio).fold(0.0, f64::max)
    }

    pub fn pass(&self) -> bool {
        self.levels.iter().all(LevelCertificate::pass)
    }
}

/// Checks `A_{n,ℓ,p,q}(f) <= 3 m^{n-ℓ}` for every `n <= n_max`, `ℓ <= n`,
/// `p`, `q`.
///
/// Every order-`ℓ` interval carries a shifted or reflected copy of the
/// order-`(n-ℓ)` leaf histogram, so the maximum over `(p, q)` is the maximum
/// over `r` of `hist[r] + hist[r-1]`. Where `M^n` leaves are affordable the
/// maximum is also computed by aggregating every leaf image up the tree.
pub fn certify(params: SelfAffineParams, n_max: u32) -> Result<Certification> {
    value_cells(params, n_max)?;
    let mut by_depth = Vec::with_capacity(n_max as usize + 1);
    for j in 0..=n_max {
        let hist = leaf_histogram(params, j)?;
        let (count, r) = (0..=hist.len())
            .map(|r| {
                let a = hist.get(r).copied().unwrap_or(0);
                let b = if r > 0 { hist[r - 1] } else { 0 };
                (a + b, r)
            })
            .fold((0, 0), |best, cur| if cur.0 > best.0 { cur } else { best });
        by_depth.push((count, r as i64));
    }
    let mut levels = Vec::new();
    for n in 0..=n_max {
        let literal = match cells(params, n) {
            Ok(c) if c <= LITERAL_SWEEP_LEAVES => Some(literal_sweep(params, n)),
            _ => None,
        };
        for ell in 0..=n {
            let j = n - ell;
            let (max_count, witness_q) = by_depth[j as usize];
            levels.push(LevelCertificate {
                n,
                ell,
                max_count,
                bound: 3 * (params.m as u64).pow(j),
                witness_p: 0,
                witness_q,
                literal_max: literal.as_ref().map(|l| l[ell as usize]),
            });
        }
    }
    Ok(Certification { params, n_max, levels })
}

/// `out[ℓ] = max_{p,q} A_{n,ℓ,p,q}` from all `M^n` leaf images.
fn literal_sweep(params: SelfAffineParams, n: u32) -> Vec<u64> {
    let mut nodes = vec![ImageInterval::ROOT];
    let mut layers = Vec::with_capacity(n as usize + 1);
    for _ in 0..n {
        let next: Vec<_> = nodes
            .iter()
            .flat_map(|node| (0..params.base()).map(move |d| node.child(params, d)))
            .collect();
        layers.push(nodes);
        nodes = next;
    }
    layers.push(nodes);

    let k = params.k as usize;
    let mut out = vec![0; n as usize + 1];
    // Each node keeps counts of leaf image indices over its own span of
    // `k^{n-ℓ}` value cells.
    let mut hists: Vec<Vec<u64>> = vec![vec![1]; layers[n as usize].len()];
    for ell in (0..=n as usize).rev() {
        if ell < n as usize {
            let span = hists[0].len() * k;
            let parents = &layers[ell];
            let children = &layers[ell + 1];
            let b = params.base() as usize;
            hists = parents
                .iter()
                .enumerate()
                .map(|(p, parent)| {
                    let mut h = vec![0u64; span];
                    for c in p * b..(p + 1) * b {
                        let shift = (children[c].q - parent.q * k as u64) as usize * hists[c].len();
                        for (r, v) in hists[c].iter().enumerate() {
                            h[shift + r] += v;
                        }
                    }
                    h
                })
                .collect();
        }
        out[ell] = hists
            .iter()
            .map(|h| (0..=h.len()).map(|r| h.get(r).copied().unwrap_or(0) + if r > 0 { h[r - 1] } else { 0 }).max().unwrap_or(0))
            .max()
            .unwrap_or(0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p23() -> SelfAffineParams {
        SelfAffineParams::new(2, 3).unwrap()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn params_validation() {
        assert!(SelfAffineParams::new(1, 3).is_err());
        assert!(SelfAffineParams::new(2, 4).is_err());
        assert!(SelfAffineParams::new(2, 1).is_err());
        assert_eq!(p23().base(), 6);
    }

    #[test]
    fn exponents() {
        assert_abs_diff_eq!(holder_exponent(p23()), 0.386_852_807_234_541_6, epsilon = 1e-15);
        assert_abs_diff_eq!(holder_exponent(SelfAffineParams::new(3, 3).unwrap()), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(holder_exponent(SelfAffineParams::new(9, 3).unwrap()), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_values() {
        assert_eq!(evaluate_exact(p23(), &[]).unwrap(), rat(0, 1));
        assert_eq!(evaluate_grid_exact(p23(), 3, 216).unwrap(), rat(1, 1));
        let p35 = SelfAffineParams::new(3, 5).unwrap();
        assert_eq!(evaluate_exact(p35, &[1]).unwrap(), rat(1, 3));
        assert_eq!(evaluate_exact(p23(), &[2]).unwrap(), rat(1, 1));
        assert_eq!(evaluate_exact(p23(), &[1]).unwrap(), rat(1, 2));
        assert!(evaluate_exact(p23(), &[6]).is_err());
    }

    #[test]
    fn float_evaluation_matches_exact() {
        let p = SelfAffineParams::new(3, 5).unwrap();
        for idx in [0u64, 1, 7, 100, 3374] {
            let exact = evaluate_grid_exact(p, 3, idx).unwrap();
            let x = idx as f64 / 3375.0;
            let f = exact.to_f64().unwrap();
            assert_abs_diff_eq!(evaluate_f64(p, x), f, epsilon = 1e-5);
        }
        assert_eq!(evaluate_f64(p, 1.0), 1.0);
    }

    #[test]
    fn approximant_level_one() {
        let a = approximant_exact(p23(), 1).unwrap();
        assert_eq!(a.value(1), rat(1, 2));
        assert_eq!(a.value(2), rat(1, 1));
        assert_eq!(a.value(6), rat(1, 1));
        let id = approximant(p23(), 0).unwrap();
        assert_eq!(id.eval(0.3), 0.3);
        assert!(approximant_exact(p23(), 12).is_err());
    }

    #[test]
    fn child_images_match_figure_layout() {
        let p = SelfAffineParams::new(3, 5).unwrap();
        let qs: Vec<u64> = (0..15).map(|d| ImageInterval::ROOT.child(p, d).q).collect();
        assert_eq!(qs, [0, 1, 2, 2, 1, 0, 0, 1, 2, 2, 1, 0, 0, 1, 2]);
        assert_eq!(interval_image(p23(), 1, 1).unwrap().q, 1);
        assert_eq!(interval_image(p23(), 0, 0).unwrap(), ImageInterval::ROOT);
    }

    #[test]
    fn localtime_small_example() {
        assert_eq!(scaled_localtime_exact(p23(), 1, 0, 0, 0).unwrap(), 3);
        assert_eq!(scaled_localtime_enumerated(p23(), 1, 0, 0, 0).unwrap(), 3);
        assert_eq!(scaled_localtime_exact(p23(), 1, 0, 0, 1).unwrap(), 6);
        assert_eq!(scaled_localtime_exact(p23(), 1, 0, 0, 2).unwrap(), 3);
        assert_eq!(scaled_localtime_exact(p23(), 1, 0, 0, -1).unwrap(), 0);
    }

    #[test]
    fn histogram_is_uniform() {
        for (k, m) in [(2, 3), (3, 5), (4, 3)] {
            let p = SelfAffineParams::new(k, m).unwrap();
            for j in 0..6 {
                let h = leaf_histogram(p, j).unwrap();
                assert!(h.iter().all(|&c| c == (m as u64).pow(j)));
            }
        }
    }

    #[test]
    fn certificate_small() {
        let c = certify(p23(), 4).unwrap();
        assert!(c.pass());
        for lvl in &c.levels {
            assert_eq!(Some(lvl.max_count), lvl.literal_max);
        }
        assert_abs_diff_eq!(c.max_ratio(), 2.0 / 3.0, epsilon = 1e-15);
    }
}
