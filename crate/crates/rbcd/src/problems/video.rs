//! Synthetic piecewise-constant test videos: a bright rectangle over a flat
//! background, translating one pixel per frame (wrapping at the right edge).

use crate::block::BlockVector;
use crate::image::Image;

pub const BACKGROUND: f64 = 0.25;
pub const FOREGROUND: f64 = 0.75;

#[derive(Debug, Clone, Copy)]
pub struct MovingRect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

/// Rectangle placement used by [`synthetic_video`] for a rows x cols frame.
pub fn default_rect(rows: usize, cols: usize) -> MovingRect {
    let height = (rows / 3).max(2);
    let width = (cols / 4).max(2);
    MovingRect { top: (rows - height) / 2, left: 2.min(cols - width), height, width }
}

/// Frame `i` has the rectangle at horizontal offset left + i, modulo cols.
pub fn frame(rows: usize, cols: usize, rect: MovingRect, shift: usize) -> Image {
    let mut img = Image::constant(rows, cols, BACKGROUND);
    for dr in 0..rect.height {
        let r = rect.top + dr;
        for dc in 0..rect.width {
            let c = (rect.left + shift + dc) % cols;
            img.set(r, c, FOREGROUND);
        }
    }
    img
}

/// b frames as a block vector (one column-major flattened frame per block).
pub fn synthetic_video(frames: usize, rows: usize, cols: usize) -> BlockVector {
    assert!(rows >= 8 && cols >= 8, "frames must be at least 8x8");
    assert!(frames >= 1);
    let rect = default_rect(rows, cols);
    BlockVector::new(
        (0..frames)
            .map(|i| frame(rows, cols, rect, i).to_column_major())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_translates_one_pixel_per_frame() {
        let (rows, cols) = (16, 16);
        let rect = default_rect(rows, cols);
        let video = synthetic_video(4, rows, cols);
        for i in 0..4 {
            let img = Image::from_column_major(rows, cols, video.block(i));
            assert_eq!(img.get(rect.top, (rect.left + i) % cols), FOREGROUND);
            if rect.left + i >= 1 {
                assert_eq!(img.get(rect.top, rect.left + i - 1), BACKGROUND);
            }
        }
    }

    #[test]
    fn frames_have_two_values_in_unit_range() {
        let video = synthetic_video(6, 12, 20);
        for i in 0..6 {
            let mut vals: Vec<f64> = video.block(i).to_vec();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            assert!(vals.len() <= 2);
            assert!(vals.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn frame_tv_matches_the_rectangle_formula() {
        // For an interior h x w rectangle of contrast t, the forward-difference
        // isotropic TV is t*(2(h+w) - 2 + sqrt(2)): every boundary pixel
        // contributes t except the bottom-right inside corner, which carries
        // both a horizontal and a vertical jump and contributes t*sqrt(2).
        let (rows, cols) = (24, 24);
        let rect = default_rect(rows, cols);
        let t = FOREGROUND - BACKGROUND;
        let video = synthetic_video(3, rows, cols);
        for i in 0..3 {
            // The rectangle stays interior for these shifts.
            assert!(rect.left + i + rect.width < cols - 1);
            let tv = crate::penalties::tv_value(video.block(i), rows, cols);
            let expect =
                t * (2.0 * (rect.height + rect.width) as f64 - 2.0 + std::f64::consts::SQRT_2);
            assert!((tv - expect).abs() < 1e-12, "frame {i}: {tv} vs {expect}");
        }
    }
}
