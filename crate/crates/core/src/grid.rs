//! Functions sampled on uniform base-`b` grids.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Samples `values[i] = f((offset + i) · base^{-resolution})`.
///
/// A full grid has `offset == 0` and `base^resolution + 1` samples covering
/// `[0, 1]`; a window covers a sub-range of the same lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub base: u32,
    pub resolution: u32,
    pub offset: u64,
    pub values: Vec<f64>,
    /// Hurst or Hölder exponent the samples are expected to have, if known.
    pub exponent_hint: Option<f64>,
}

pub(crate) fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp)
}

impl GridFunction {
    pub fn new(base: u32, resolution: u32, values: Vec<f64>, exponent_hint: Option<f64>) -> Result<Self> {
        let cells = Self::cells_for(base, resolution)?;
        if values.len() as u64 != cells + 1 {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", cells + 1, values.len()),
            ));
        }
        Ok(GridFunction { base, resolution, offset: 0, values, exponent_hint })
    }

    pub fn window(
        base: u32,
        resolution: u32,
        offset: u64,
        values: Vec<f64>,
        exponent_hint: Option<f64>,
    ) -> Result<Self> {
        let cells = Self::cells_for(base, resolution)?;
        if values.is_empty() || offset + values.len() as u64 > cells + 1 {
            return Err(invalid("values", "window exceeds the unit interval"));
        }
        Ok(GridFunction { base, resolution, offset, values, exponent_hint })
    }

    /// Samples a closure on the full grid.
    pub fn sample(base: u32, resolution: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        let cells = Self::cells_for(base, resolution)?;
        let step = 1.0 / cells as f64;
        let values = (0..=cells).map(|i| f(i as f64 * step)).collect();
        Ok(GridFunction { base, resolution, offset: 0, values, exponent_hint: None })
    }

    fn cells_for(base: u32, resolution: u32) -> Result<u64> {
        if base < 2 {
            return Err(invalid("base", "must be at least 2"));
        }
        checked_pow(base as u64, resolution)
            .filter(|c| *c < (1u64 << 40))
            .ok_or_else(|| invalid("resolution", format!("{base}^{resolution} grid is too large")))
    }

    /// Number of grid cells in the whole unit interval.
    pub fn cells(&self) -> u64 {
        (self.base as u64).pow(self.resolution)
    }

    pub fn step(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    pub fn is_full(&self) -> bool {
        self.offset == 0 && self.values.len() as u64 == self.cells() + 1
    }

    /// Value at absolute lattice index `i`, if it is inside the window.
    pub fn at(&self, i: u64) -> Option<f64> {
        i.checked_sub(self.offset).and_then(|j| self.values.get(j as usize).copied())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Keeps every `base^(resolution - level)`-th sample of a full grid.
    pub fn downsample(&self, level: u32) -> Result<Self> {
        if !self.is_full() {
            return Err(invalid("grid", "downsampling needs a full grid"));
        }
        if level > self.resolution {
            return Err(crate::Error::InsufficientResolution { have: self.resolution, need: level });
        }
        let stride = (self.base as u64).pow(self.resolution - level) as usize;
        let values = self.values.iter().step_by(stride).copied().collect();
        Ok(GridFunction {
            base: self.base,
            resolution: level,
            offset: 0,
            values,
            exponent_hint: self.exponent_hint,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn length_is_checked() {
        assert!(GridFunction::new(2, 3, vec![0.0; 9], None).is_ok());
        assert!(GridFunction::new(2, 3, vec![0.0; 8], None).is_err());
        assert!(GridFunction::new(1, 3, vec![0.0; 2], None).is_err());
    }

    #[test]
    fn downsample_keeps_lattice_points() {
        let g = GridFunction::sample(2, 4, |x| x).unwrap();
        let d = g.downsample(2).unwrap();
        assert_eq!(d.values, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn window_lookup() {
        let g = GridFunction::window(6, 2, 10, vec![1.0, 2.0, 3.0], None).unwrap();
        assert_eq!(g.at(11), Some(2.0));
        assert_eq!(g.at(9), None);
        assert_eq!(g.at(13), None);
        assert!(GridFunction::window(6, 2, 35, vec![0.0, 0.0, 0.0], None).is_err());
    }
}
