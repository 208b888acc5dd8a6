//! Head phantom built from the modified (high-contrast) ten-ellipse table.
//! A pixel's value is the sum of the intensities of all ellipses containing
//! its center; raw sums are kept without clamping.

use crate::image::Image;

/// (intensity, semi-axis a, semi-axis b, center x, center y, rotation deg)
const ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

/// Sum of ellipse intensities at a point of [-1, 1]^2.
pub fn intensity_at(x: f64, y: f64) -> f64 {
    let mut v = 0.0;
    for &(a0, a, b, x0, y0, phi_deg) in &ELLIPSES {
        let phi = phi_deg.to_radians();
        let (dx, dy) = (x - x0, y - y0);
        let xr = phi.cos() * dx + phi.sin() * dy;
        let yr = -phi.sin() * dx + phi.cos() * dy;
        if (xr / a).powi(2) + (yr / b).powi(2) <= 1.0 {
            v += a0;
        }
    }
    v
}

/// n x n phantom sampled at pixel centers of [-1, 1]^2, row 0 at the top.
pub fn shepp_logan(n: usize) -> Image {
    assert!(n >= 1);
    let mut img = Image::zeros(n, n);
    let step = 2.0 / n as f64;
    for r in 0..n {
        let y = 1.0 - (r as f64 + 0.5) * step;
        for c in 0..n {
            let x = -1.0 + (c as f64 + 0.5) * step;
            img.set(r, c, intensity_at(x, y));
        }
    }
    img
}
