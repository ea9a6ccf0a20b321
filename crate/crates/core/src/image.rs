//! Pixel grids and labeled datasets.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if data.len() != width * height {
            return Err(Error::BufferSize { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    /// A `width`x`height` image filled with `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from interleaved 8-bit RGB using BT.601 luma weights.
    pub fn from_rgb(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != 3 * width * height {
            return Err(Error::BufferSize { width, height, len: rgb.len() / 3 });
        }
        let data = rgb.chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Pixel value with coordinates clamped to the border (replicate padding).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    /// 256-bin intensity histogram.
    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &v in &self.data {
            hist[v as usize] += 1;
        }
        hist
    }

    /// Copies the pixels inside `bbox`.
    pub fn crop(&self, bbox: &BoundingBox) -> GrayImage {
        let (w, h) = (bbox.width(), bbox.height());
        let mut data = Vec::with_capacity(w * h);
        for y in bbox.y0..=bbox.y1 {
            let row = y * self.width;
            data.extend_from_slice(&self.data[row + bbox.x0..=row + bbox.x1]);
        }
        GrayImage { width: w, height: h, data }
    }

    /// Grows the image to at least `min_w`x`min_h` by replicating border
    /// pixels, keeping the original roughly centered.
    pub fn pad_to(&self, min_w: usize, min_h: usize) -> GrayImage {
        let (left, new_w) = centered_pad(self.width, min_w);
        let (top, new_h) = centered_pad(self.height, min_h);
        if new_w == self.width && new_h == self.height {
            return self.clone();
        }
        let mut data = Vec::with_capacity(new_w * new_h);
        for y in 0..new_h {
            for x in 0..new_w {
                data.push(self.get_clamped(x as isize - left as isize, y as isize - top as isize));
            }
        }
        GrayImage { width: new_w, height: new_h, data }
    }
}

/// BT.601 luma, rounded to the nearest integer.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    libm::round(y).clamp(0.0, 255.0) as u8
}

fn centered_pad(len: usize, min: usize) -> (usize, usize) {
    if len >= min {
        (0, len)
    } else {
        ((min - len) / 2, min)
    }
}

/// Boolean foreground mask, row-major; `true` marks a character pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

/// Offsets of the eight neighbours in Zhang–Suen order P2..P9
/// (N, NE, E, SE, S, SW, W, NW) with y pointing down.
pub const NEIGHBOURS: [(isize, isize); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

impl BinaryImage {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if mask.len() != width * height {
            return Err(Error::BufferSize { width, height, len: mask.len() });
        }
        Ok(Self { width, height, mask })
    }

    /// All-background image.
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    /// Builds a mask from a list of foreground coordinates.
    pub fn from_points(width: usize, height: usize, points: &[(usize, usize)]) -> Result<Self> {
        let mut img = Self::empty(width, height)?;
        for &(x, y) in points {
            if x >= width || y >= height {
                return Err(Error::InvalidConfig(alloc::format!("point ({x}, {y}) outside {width}x{height}")));
            }
            img.set(x, y, true);
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    /// Foreground test that treats everything outside the image as background.
    #[inline]
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.mask[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.mask[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// Foreground coordinates in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// Number of foreground 8-neighbours of `(x, y)`.
    pub fn neighbour_count(&self, x: usize, y: usize) -> usize {
        NEIGHBOURS.iter().filter(|(dx, dy)| self.get_signed(x as isize + dx, y as isize + dy)).count()
    }

    /// 8-connected component labels (0 = background, components numbered
    /// from 1 in row-major order of their first pixel) and the component count.
    pub fn label_components(&self) -> (Vec<u32>, usize) {
        let mut labels = vec![0u32; self.mask.len()];
        let mut next = 0u32;
        let mut stack = Vec::new();
        for start in 0..self.mask.len() {
            if !self.mask[start] || labels[start] != 0 {
                continue;
            }
            next += 1;
            labels[start] = next;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (x, y) = ((i % self.width) as isize, (i / self.width) as isize);
                for (dx, dy) in NEIGHBOURS {
                    let (nx, ny) = (x + dx, y + dy);
                    if self.get_signed(nx, ny) {
                        let j = ny as usize * self.width + nx as usize;
                        if labels[j] == 0 {
                            labels[j] = next;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        (labels, next as usize)
    }

    /// Number of 8-connected foreground components.
    pub fn component_count(&self) -> usize {
        self.label_components().1
    }

    /// Copies the pixels inside `bbox`.
    pub fn crop(&self, bbox: &BoundingBox) -> BinaryImage {
        let (w, h) = (bbox.width(), bbox.height());
        let mut mask = Vec::with_capacity(w * h);
        for y in bbox.y0..=bbox.y1 {
            let row = y * self.width;
            mask.extend_from_slice(&self.mask[row + bbox.x0..=row + bbox.x1]);
        }
        BinaryImage { width: w, height: h, mask }
    }

    /// Grows the mask to at least `min_w`x`min_h` with background, keeping
    /// the original roughly centered.
    pub fn pad_to(&self, min_w: usize, min_h: usize) -> BinaryImage {
        let (left, new_w) = centered_pad(self.width, min_w);
        let (top, new_h) = centered_pad(self.height, min_h);
        if new_w == self.width && new_h == self.height {
            return self.clone();
        }
        let mut out = BinaryImage { width: new_w, height: new_h, mask: vec![false; new_w * new_h] };
        for (x, y) in self.points() {
            out.set(x + left, y + top, true);
        }
        out
    }

    /// Renders the mask as a grayscale image with foreground `fg` and background `bg`.
    pub fn to_gray(&self, fg: u8, bg: u8) -> GrayImage {
        let data = self.mask.iter().map(|&b| if b { fg } else { bg }).collect();
        GrayImage { width: self.width, height: self.height, data }
    }
}

/// Inclusive axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.y0..=self.y1).contains(&y)
    }
}

/// Labeled character images plus the ordered class alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    samples: Vec<(GrayImage, usize)>,
    alphabet: Vec<String>,
    provenance: String,
}

impl LabeledDataset {
    pub fn new(samples: Vec<(GrayImage, usize)>, alphabet: Vec<String>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for name in &alphabet {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateClass(name.clone()));
            }
        }
        for &(_, label) in &samples {
            if label >= alphabet.len() {
                return Err(Error::LabelOutOfRange { label, classes: alphabet.len() });
            }
        }
        Ok(Self { samples, alphabet, provenance: provenance.into() })
    }

    pub fn samples(&self) -> &[(GrayImage, usize)] {
        &self.samples
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample indices of each class, in dataset order.
    pub fn indices_by_class(&self) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); self.alphabet.len()];
        for (i, &(_, label)) in self.samples.iter().enumerate() {
            by_class[label].push(i);
        }
        by_class
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn luma_examples() {
        assert_eq!(luma(255, 255, 255), 255);
        assert_eq!(luma(0, 0, 0), 0);
        // 29.9 + 29.35 + 22.8 = 82.05
        assert_eq!(luma(100, 50, 200), 82);
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(GrayImage::new(2, 2, vec![0; 3]), Err(Error::BufferSize { .. })));
        assert_eq!(GrayImage::new(0, 2, vec![]), Err(Error::EmptyImage));
        assert!(BinaryImage::new(3, 1, vec![true; 3]).is_ok());
    }

    #[test]
    fn components_use_8_connectivity() {
        // diagonal pair is one component, the far pixel another
        let img = BinaryImage::from_points(5, 5, &[(0, 0), (1, 1), (4, 4)]).unwrap();
        assert_eq!(img.component_count(), 2);
        let (labels, n) = img.label_components();
        assert_eq!(n, 2);
        assert_eq!(labels[0], 1);
        assert_eq!(labels[6], 1);
        assert_eq!(labels[24], 2);
    }

    #[test]
    fn pad_keeps_content_centered() {
        let img = BinaryImage::from_points(1, 4, &[(0, 0), (0, 3)]).unwrap();
        let padded = img.pad_to(3, 3);
        assert_eq!((padded.width(), padded.height()), (3, 4));
        assert!(padded.get(1, 0) && padded.get(1, 3));
        assert_eq!(padded.count(), 2);

        let gray = GrayImage::new(1, 1, vec![9]).unwrap().pad_to(3, 3);
        assert!(gray.data().iter().all(|&v| v == 9));
    }

    #[test]
    fn dataset_invariants() {
        let img = GrayImage::filled(2, 2, 0).unwrap();
        let abc = vec!["A".to_string(), "B".to_string()];
        assert!(LabeledDataset::new(vec![(img.clone(), 1)], abc.clone(), "t").is_ok());
        assert_eq!(
            LabeledDataset::new(vec![(img.clone(), 2)], abc, "t"),
            Err(Error::LabelOutOfRange { label: 2, classes: 2 })
        );
        let dup = vec!["A".to_string(), "A".to_string()];
        assert_eq!(LabeledDataset::new(vec![], dup, "t"), Err(Error::DuplicateClass("A".to_string())));
    }
}
