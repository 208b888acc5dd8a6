//! Discrete parallel-beam Radon transform.
//!
//! The image is an n x n grid of unit-square pixels covering
//! [-n/2, n/2] x [-n/2, n/2]. For a projection angle theta the rays travel
//! along (cos theta, sin theta) at unit detector spacing, centered on the
//! origin. Each matrix entry is the exact Euclidean length of the
//! intersection of a ray with a pixel, found by a Siddon-style traversal of
//! the grid-line crossings.
//!
//! Matrix columns use column-major pixel stacking: pixel (r, c) owns column
//! c*n + r. The operator is partitioned into b blocks of equal contiguous
//! column ranges.

use crate::error::{Error, Result};
use crate::operators::{BlockOperator, CsrMatrix};

#[derive(Debug, Clone)]
pub struct RadonGeometry {
    /// Grid side; the image is n x n.
    pub n: usize,
    /// Projection angles in degrees.
    pub angles_deg: Vec<f64>,
    /// Rays per projection at unit spacing, centered.
    pub rays_per_angle: usize,
}

impl RadonGeometry {
    /// Default ray count round(sqrt(2) * n), covering the grid diagonal.
    pub fn new(n: usize, angles_deg: Vec<f64>) -> Self {
        let rays = ((n as f64) * std::f64::consts::SQRT_2).round() as usize;
        Self { n, angles_deg, rays_per_angle: rays.max(1) }
    }

    pub fn with_rays(mut self, rays_per_angle: usize) -> Self {
        self.rays_per_angle = rays_per_angle;
        self
    }

    /// `count` angles evenly spaced over [start, start + span) degrees.
    pub fn spread_angles(start: f64, span: f64, count: usize) -> Vec<f64> {
        (0..count)
            .map(|k| start + span * (k as f64) / (count as f64))
            .collect()
    }

    pub fn data_dim(&self) -> usize {
        self.angles_deg.len() * self.rays_per_angle
    }

    /// Detector offset of ray `j`, unit spacing centered on zero.
    pub fn ray_offset(&self, j: usize) -> f64 {
        j as f64 - (self.rays_per_angle as f64 - 1.0) / 2.0
    }

    /// Nonzero entries (flat column index, intersection length) of one row.
    pub fn trace_ray(&self, angle_deg: f64, offset: f64) -> Vec<(u32, f64)> {
        trace(self.n, angle_deg, offset)
    }
}

/// Siddon-style traversal of one ray through the n x n grid.
fn trace(n: usize, angle_deg: f64, offset: f64) -> Vec<(u32, f64)> {
    let half = n as f64 / 2.0;
    let theta = angle_deg.to_radians();
    let (dx, dy) = (theta.cos(), theta.sin());
    // Ray: (px, py) + t (dx, dy), offset along the normal.
    let (px, py) = (-offset * theta.sin(), offset * theta.cos());

    // Clip the ray to the grid bounding box.
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for (p, d) in [(px, dx), (py, dy)] {
        if d.abs() < 1e-15 {
            if p < -half || p > half {
                return Vec::new();
            }
        } else {
            let ta = (-half - p) / d;
            let tb = (half - p) / d;
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
        }
    }
    if t0 >= t1 {
        return Vec::new();
    }

    // Parameters of all grid-line crossings inside (t0, t1).
    let mut ts = Vec::with_capacity(2 * n + 2);
    ts.push(t0);
    ts.push(t1);
    for (p, d) in [(px, dx), (py, dy)] {
        if d.abs() < 1e-15 {
            continue;
        }
        for k in 0..=n {
            let line = -half + k as f64;
            let t = (line - p) / d;
            if t > t0 && t < t1 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);

    let mut entries: Vec<(u32, f64)> = Vec::new();
    for w in ts.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        let len = tb - ta; // |direction| = 1
        if len <= 1e-12 {
            continue;
        }
        let tm = 0.5 * (ta + tb);
        let (xm, ym) = (px + tm * dx, py + tm * dy);
        let c = (xm + half).floor() as i64;
        let r = (half - ym).floor() as i64;
        if c < 0 || c >= n as i64 || r < 0 || r >= n as i64 {
            continue;
        }
        let col = (c as usize) * n + r as usize;
        // Crossings dedupe themselves through the zero-length filter, but a
        // corner graze can still split one pixel into two segments.
        if let Some(last) = entries.last_mut() {
            if last.0 == col as u32 {
                last.1 += len;
                continue;
            }
        }
        entries.push((col as u32, len));
    }
    entries
}

/// Builds the parallel-beam operator partitioned by columns into `blocks`
/// equal contiguous ranges.
pub fn make_parallel_radon(geometry: &RadonGeometry, blocks: usize) -> Result<BlockOperator> {
    let n = geometry.n;
    let pixels = n * n;
    if geometry.angles_deg.is_empty() {
        return Err(Error::Config("radon geometry needs at least one angle".into()));
    }
    if blocks == 0 || !pixels.is_multiple_of(blocks) {
        return Err(Error::Config(format!(
            "block count {blocks} does not divide pixel count {pixels}"
        )));
    }
    if geometry.rays_per_angle == 0 {
        return Err(Error::Config("rays_per_angle must be at least 1".into()));
    }
    let stride = pixels / blocks;
    let m = geometry.data_dim();
    let mut per_block_rows: Vec<Vec<Vec<(u32, f64)>>> =
        vec![vec![Vec::new(); m]; blocks];

    let mut row = 0;
    for &angle in &geometry.angles_deg {
        for j in 0..geometry.rays_per_angle {
            let entries = geometry.trace_ray(angle, geometry.ray_offset(j));
            for (col, w) in entries {
                let b = col as usize / stride;
                let local = col as usize - b * stride;
                per_block_rows[b][row].push((local as u32, w));
            }
            row += 1;
        }
    }

    let matrices = per_block_rows
        .into_iter()
        .map(|rows| CsrMatrix::from_rows(m, stride, rows))
        .collect();
    Ok(BlockOperator::from_sparse(matrices))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pixel_horizontal_center_ray() {
        // n = 1: one ray through the pixel center, length = pixel side.
        let geo = RadonGeometry::new(1, vec![0.0]);
        assert_eq!(geo.rays_per_angle, 1);
        let entries = geo.trace_ray(0.0, 0.0);
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].0, 0);
        assert!((entries[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ray_outside_grid_is_empty() {
        let geo = RadonGeometry::new(2, vec![0.0]);
        assert!(geo.trace_ray(0.0, 5.0).is_empty());
    }

    #[test]
    fn main_diagonal_ray_on_2x2() {
        // 45-degree ray through the origin crosses two pixels, sqrt(2) each.
        let geo = RadonGeometry::new(2, vec![45.0]);
        let entries = geo.trace_ray(45.0, 0.0);
        assert_eq!(entries.len(), 2);
        for (_, len) in &entries {
            assert!((len - std::f64::consts::SQRT_2).abs() < 1e-12);
        }
        // Bottom-left pixel (r=1, c=0) -> column 0*2+1 = 1;
        // top-right (r=0, c=1) -> column 1*2+0 = 2.
        let cols: Vec<u32> = entries.iter().map(|e| e.0).collect();
        assert!(cols.contains(&1) && cols.contains(&2));
    }

    #[test]
    fn row_sums_bounded_by_diagonal() {
        let n = 8;
        let geo = RadonGeometry::new(n, RadonGeometry::spread_angles(1.0, 179.0, 10));
        let bound = (n as f64) * std::f64::consts::SQRT_2 + 1e-12;
        for &angle in &geo.angles_deg {
            for j in 0..geo.rays_per_angle {
                let entries = geo.trace_ray(angle, geo.ray_offset(j));
                let sum: f64 = entries.iter().map(|e| e.1).sum();
                assert!(entries.iter().all(|e| e.1 >= 0.0));
                assert!(sum <= bound, "row sum {sum} exceeds {bound}");
            }
        }
    }

    #[test]
    fn partition_requires_divisibility() {
        let geo = RadonGeometry::new(4, vec![10.0]);
        assert!(make_parallel_radon(&geo, 3).is_err());
        assert!(make_parallel_radon(&geo, 4).is_ok());
    }
}
