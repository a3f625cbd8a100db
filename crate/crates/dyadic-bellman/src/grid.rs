//! Dense sampled functions on rectangular grids with axis-wise linear
//! interpolation; the carrier for the dynamic-programming envelopes.

use serde::Serialize;

use crate::error::{Error, Result};

/// A real function sampled on an N-dimensional rectangular grid, row-major
/// with the last axis fastest.
///
/// Multilinear interpolation of a concave function under-estimates it; DP
/// constructors set `concave_minorant` to record that the stored values are
/// meant as lower bounds under interpolation. The flag is a statement about
/// the construction, not re-checked at runtime.
#[derive(Clone, Debug, Serialize)]
pub struct GridFunction {
    axes: Vec<Vec<f64>>,
    values: Vec<f64>,
    strides: Vec<usize>,
    pub concave_minorant: bool,
}

impl GridFunction {
    pub fn new(axes: Vec<Vec<f64>>, fill: f64) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Config("grid needs at least one axis".into()));
        }
        for axis in &axes {
            if axis.len() < 2 {
                return Err(Error::Config("each axis needs at least two nodes".into()));
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config("axis coordinates must be strictly increasing".into()));
            }
        }
        let mut strides = vec![0usize; axes.len()];
        let mut total = 1usize;
        for (i, axis) in axes.iter().enumerate().rev() {
            strides[i] = total;
            total = total.checked_mul(axis.len()).ok_or_else(|| Error::Config("grid too large".into()))?;
        }
        Ok(Self { axes, values: vec![fill; total], strides, concave_minorant: false })
    }

    /// Uniform axis helper: n nodes from lo to hi inclusive.
    pub fn uniform_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let step = (hi - lo) / (n - 1) as f64;
        (0..n).map(|i| lo + step * i as f64).collect()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.axes.len());
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Multi-index of a flat position.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (k, s) in self.strides.iter().enumerate() {
            idx[k] = flat / s;
            flat %= s;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let f = self.flat_index(idx);
        self.values[f] = v;
    }

    /// Grid coordinates of a node.
    pub fn node_coords(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.axes).map(|(i, a)| a[*i]).collect()
    }

    fn locate(&self, dim: usize, x: f64) -> (usize, f64) {
        let axis = &self.axes[dim];
        // partition_point gives the first node > x
        let mut hi = axis.partition_point(|&a| a <= x);
        if hi == 0 {
            return (0, 0.0);
        }
        if hi >= axis.len() {
            hi = axis.len() - 1;
        }
        let lo = hi - 1;
        let t = (x - axis[lo]) / (axis[hi] - axis[lo]);
        (lo, t.clamp(0.0, 1.0))
    }

    /// Multilinear interpolation; `None` outside the grid's bounding box.
    pub fn interpolate(&self, point: &[f64]) -> Option<f64> {
        for (d, &x) in point.iter().enumerate() {
            let axis = &self.axes[d];
            if x < axis[0] || x > *axis.last().unwrap() {
                return None;
            }
        }
        Some(self.interpolate_clamped(point))
    }

    /// Multilinear interpolation with every coordinate clamped into range.
    /// Callers are responsible for the soundness of clamping.
    pub fn interpolate_clamped(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.axes.len());
        let dims = self.axes.len();
        let mut base = Vec::with_capacity(dims);
        let mut frac = Vec::with_capacity(dims);
        for (d, &x) in point.iter().enumerate() {
            let (lo, t) = self.locate(d, x.clamp(self.axes[d][0], *self.axes[d].last().unwrap()));
            base.push(lo);
            frac.push(t);
        }
        // accumulate over the 2^dims cell corners
        let corners = 1usize << dims;
        let mut acc = 0.0;
        for c in 0..corners {
            let mut weight = 1.0;
            let mut flat = 0usize;
            for d in 0..dims {
                if c & (1 << d) != 0 {
                    weight *= frac[d];
                    flat += (base[d] + 1) * self.strides[d];
                } else {
                    weight *= 1.0 - frac[d];
                    flat += base[d] * self.strides[d];
                }
            }
            if weight != 0.0 {
                acc += weight * self.values[flat];
            }
        }
        acc
    }

    pub fn has_non_finite(&self) -> bool {
        self.values.iter().any(|v| !v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid_2d() -> GridFunction {
        let mut g = GridFunction::new(
            vec![GridFunction::uniform_axis(0.0, 1.0, 3), GridFunction::uniform_axis(0.0, 2.0, 5)],
            0.0,
        )
        .unwrap();
        for i in 0..3 {
            for j in 0..5 {
                let x = i as f64 * 0.5;
                let y = j as f64 * 0.5;
                g.set(&[i, j], 2.0 * x - y + 0.25 * x * y);
            }
        }
        g
    }

    #[test]
    fn interpolation_at_nodes_is_exact() {
        let g = grid_2d();
        for i in 0..3 {
            for j in 0..5 {
                let p = g.node_coords(&[i, j]);
                assert_eq!(g.interpolate(&p).unwrap(), g.get(&[i, j]));
            }
        }
    }

    #[test]
    fn bilinear_reproduces_bilinear_functions() {
        let g = grid_2d();
        for (x, y) in [(0.3, 1.1), (0.75, 0.2), (0.5, 1.997)] {
            let expect = 2.0 * x - y + 0.25 * x * y;
            let got = g.interpolate(&[x, y]).unwrap();
            assert!((got - expect).abs() < 1e-12, "at ({x},{y}): {got} vs {expect}");
        }
    }

    #[test]
    fn out_of_range_is_none_and_clamping_clamps() {
        let g = grid_2d();
        assert!(g.interpolate(&[-0.1, 0.0]).is_none());
        assert!(g.interpolate(&[0.0, 2.5]).is_none());
        assert_eq!(g.interpolate_clamped(&[-5.0, 0.0]), g.get(&[0, 0]));
        assert_eq!(g.interpolate_clamped(&[1.7, 2.5]), g.get(&[2, 4]));
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(GridFunction::new(vec![vec![0.0]], 0.0).is_err());
        assert!(GridFunction::new(vec![vec![0.0, 0.0]], 0.0).is_err());
        assert!(GridFunction::new(vec![], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn interpolation_stays_within_cell_bounds(x in 0.0f64..1.0, y in 0.0f64..2.0) {
            let g = grid_2d();
            let v = g.interpolate(&[x, y]).unwrap();
            let lo = g.values().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = g.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }
}
