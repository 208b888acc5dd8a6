//! Image-quality metrics: PSNR, SSIM, and relative reconstruction error.

use crate::block::BlockVector;
use crate::error::{Error, Result};
use crate::image::Image;

/// 10 log10(peak^2 / MSE); +infinity for identical images.
pub fn psnr(reference: &Image, test: &Image, peak: f64) -> Result<f64> {
    check_same_dims(reference, test)?;
    if peak <= 0.0 {
        return Err(Error::Config(format!("peak must be positive, got {peak}")));
    }
    let n = reference.data.len() as f64;
    let mse = reference
        .data
        .iter()
        .zip(&test.data)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Window side of the local SSIM statistics.
const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Mean local SSIM over all fully interior 11x11 Gaussian windows, with the
/// standard constants and dynamic range `peak`.
pub fn ssim(reference: &Image, test: &Image, peak: f64) -> Result<f64> {
    check_same_dims(reference, test)?;
    if peak <= 0.0 {
        return Err(Error::Config(format!("peak must be positive, got {peak}")));
    }
    if reference.rows < SSIM_WINDOW || reference.cols < SSIM_WINDOW {
        return Err(Error::Config(format!(
            "ssim needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {}x{}",
            reference.rows, reference.cols
        )));
    }

    let w = gaussian_window();
    let c1 = (SSIM_K1 * peak).powi(2);
    let c2 = (SSIM_K2 * peak).powi(2);

    // Separable weighted moments.
    let mu_x = filter(reference, &w);
    let mu_y = filter(test, &w);
    let xx = filter(&pointwise(reference, reference), &w);
    let yy = filter(&pointwise(test, test), &w);
    let xy = filter(&pointwise(reference, test), &w);

    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..mu_x.data.len() {
        let (mx, my) = (mu_x.data[i], mu_y.data[i]);
        let sx = xx.data[i] - mx * mx;
        let sy = yy.data[i] - my * my;
        let sxy = xy.data[i] - mx * my;
        let num = (2.0 * mx * my + c1) * (2.0 * sxy + c2);
        let den = (mx * mx + my * my + c1) * (sx + sy + c2);
        total += num / den;
        count += 1;
    }
    Ok(total / count as f64)
}

/// ||x - reference|| / ||reference||, optionally squared.
pub fn relative_error(reference: &BlockVector, x: &BlockVector, squared: bool) -> Result<f64> {
    let norm_sq = reference.norm_sq();
    if norm_sq == 0.0 {
        return Err(Error::Config("reference has zero norm".into()));
    }
    let ratio_sq = x.sub(reference).norm_sq() / norm_sq;
    Ok(if squared { ratio_sq } else { ratio_sq.sqrt() })
}

fn check_same_dims(a: &Image, b: &Image) -> Result<()> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::Config(format!(
            "image dims differ: {}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(())
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut w: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    w
}

fn pointwise(a: &Image, b: &Image) -> Image {
    Image::new(
        a.rows,
        a.cols,
        a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    )
}

/// Valid-mode separable convolution with a symmetric 1-D window.
fn filter(img: &Image, w: &[f64]) -> Image {
    let k = w.len();
    let out_rows = img.rows - k + 1;
    let out_cols = img.cols - k + 1;
    // Horizontal pass.
    let mut tmp = Image::zeros(img.rows, out_cols);
    for r in 0..img.rows {
        for c in 0..out_cols {
            let mut acc = 0.0;
            for (j, wj) in w.iter().enumerate() {
                acc += wj * img.get(r, c + j);
            }
            tmp.set(r, c, acc);
        }
    }
    // Vertical pass.
    let mut out = Image::zeros(out_rows, out_cols);
    for r in 0..out_rows {
        for c in 0..out_cols {
            let mut acc = 0.0;
            for (j, wj) in w.iter().enumerate() {
                acc += wj * tmp.get(r + j, c);
            }
            out.set(r, c, acc);
        }
    }
    out
}
