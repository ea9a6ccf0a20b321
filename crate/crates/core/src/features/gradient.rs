//! Sobel orientation histograms per zone.

use alloc::vec;
use alloc::vec::Vec;

use super::zoning::ZoneGrid;
use crate::image::GrayImage;

pub const ORIENTATION_BINS: usize = 8;

/// Sobel response `(gx, gy)` at `(x, y)` with replicated borders; `gy`
/// grows downwards.
pub fn sobel(img: &GrayImage, x: usize, y: usize) -> (f64, f64) {
    let (x, y) = (x as isize, y as isize);
    let p = |dx: isize, dy: isize| f64::from(img.get_clamped(x + dx, y + dy));
    let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
    let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
    (gx, gy)
}

/// 45-degree bin of a gradient direction, bin 0 centred on 0 degrees.
pub fn orientation_bin(gx: f64, gy: f64) -> usize {
    let mut deg = libm::atan2(gy, gx).to_degrees();
    if deg < 0.0 {
        deg += 360.0;
    }
    (libm::floor((deg + 22.5) / 45.0) as usize) % ORIENTATION_BINS
}

/// Magnitude-weighted orientation histogram of every zone, each scaled to
/// unit L2 norm (all-zero histograms stay zero), concatenated in zone order.
pub fn zone_histograms(img: &GrayImage, grid: &ZoneGrid) -> Vec<f64> {
    let mut hist = vec![0.0; grid.zones.len() * ORIENTATION_BINS];
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (gx, gy) = sobel(img, x, y);
            let mag = libm::hypot(gx, gy);
            if mag > 0.0 {
                hist[grid.zone_of(x, y) * ORIENTATION_BINS + orientation_bin(gx, gy)] += mag;
            }
        }
    }
    for zone in hist.chunks_mut(ORIENTATION_BINS) {
        let norm = libm::sqrt(zone.iter().map(|v| v * v).sum::<f64>());
        if norm > 0.0 {
            zone.iter_mut().for_each(|v| *v /= norm);
        }
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins() {
        assert_eq!(orientation_bin(1.0, 0.0), 0);
        assert_eq!(orientation_bin(1.0, -0.1), 0);
        assert_eq!(orientation_bin(1.0, 1.0), 1);
        assert_eq!(orientation_bin(0.0, 1.0), 2);
        assert_eq!(orientation_bin(-1.0, 0.0), 4);
        assert_eq!(orientation_bin(0.0, -1.0), 6);
    }

    #[test]
    fn sobel_on_a_vertical_step() {
        // dark left half, light right half
        let img = GrayImage::new(4, 3, alloc::vec![0, 0, 255, 255, 0, 0, 255, 255, 0, 0, 255, 255]).unwrap();
        // columns 1 and 2 straddle the step: gx = 4 * 255, gy = 0
        assert_eq!(sobel(&img, 1, 1), (1020.0, 0.0));
        assert_eq!(sobel(&img, 2, 0), (1020.0, 0.0));
        assert_eq!(sobel(&img, 0, 1), (0.0, 0.0));
    }
}
