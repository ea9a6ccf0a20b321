//! Zone-based feature extraction.
//!
//! The proposed descriptor concatenates three sets:
//!
//! * set 1: a 3x3 grid, 9 values per zone (4 line counts, 4 line lengths,
//!   skeleton area), 81 values;
//! * set 2: the three horizontal bands then the three vertical bands, the
//!   same 9 values plus an intersection count, 60 values;
//! * set 3: centroid offset, second moment, object count and spread of
//!   the whole character, 4 values.
//!
//! Counts use [`encode_count`] and lengths use [`normalized_length`]. The
//! geometric, zone-based hybrid and gradient baselines reuse the same
//! primitives.

mod gradient;
mod strokes;
mod zoning;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

pub use self::gradient::{orientation_bin, sobel, zone_histograms, ORIENTATION_BINS};
pub use self::strokes::{
    classify_direction, count_intersections, directed_strokes, direction_of_angle, extract_segments, junction_clusters,
    segment_angle, split_at_turns, Direction, Segment, SegmentKind, MIN_SEGMENT_LEN,
};
pub use self::zoning::{partition_zones, split_lengths, Zone, ZoneGrid};
use crate::error::{Error, Result};
use crate::image::{BinaryImage, GrayImage};
use crate::preprocess::{Preprocessed, Skeleton};

/// Which feature extractor produced a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractorKind {
    Proposed,
    Geometric,
    Hybrid,
    Gradient,
}

impl ExtractorKind {
    pub const ALL: [ExtractorKind; 4] =
        [ExtractorKind::Proposed, ExtractorKind::Geometric, ExtractorKind::Hybrid, ExtractorKind::Gradient];

    /// Length of the vectors this extractor emits.
    pub fn dimension(self) -> usize {
        match self {
            ExtractorKind::Proposed => 145,
            ExtractorKind::Geometric => 81,
            ExtractorKind::Hybrid => 90,
            ExtractorKind::Gradient => 72,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExtractorKind::Proposed => "proposed",
            ExtractorKind::Geometric => "geometric",
            ExtractorKind::Hybrid => "hybrid",
            ExtractorKind::Gradient => "gradient",
        }
    }
}

impl fmt::Display for ExtractorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExtractorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExtractorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown extractor {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub extractor: ExtractorKind,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Count encoding `1 - 2 * n / 10`, clamped at -1 for `n > 10`.
pub fn encode_count(n: usize) -> f64 {
    (1.0 - 2.0 * (n as f64) / 10.0).max(-1.0)
}

/// Line pixels over zone pixels, capped at 1.
pub fn normalized_length(line_pixels: usize, zone_pixels: usize) -> Result<f64> {
    if zone_pixels == 0 {
        return Err(Error::EmptyZone);
    }
    Ok(line_pixels.min(zone_pixels) as f64 / zone_pixels as f64)
}

/// Whole-character descriptors: centroid offset, normalized second moment,
/// encoded object count and spread.
pub fn global_features(binary: &BinaryImage) -> Result<[f64; 4]> {
    let n = binary.count();
    if n == 0 {
        return Err(Error::BlankImage);
    }
    let (w, h) = (binary.width() as f64, binary.height() as f64);
    let nf = n as f64;
    let (sx, sy) = binary.points().fold((0.0, 0.0), |(a, b), (x, y)| (a + x as f64, b + y as f64));
    let (cx, cy) = (sx / nf, sy / nf);
    let (ox, oy) = (cx - (w - 1.0) / 2.0, cy - (h - 1.0) / 2.0);
    let half_diag = libm::sqrt(w * w + h * h) / 2.0;
    let centroid = libm::sqrt(ox * ox + oy * oy) / half_diag;

    let spread_sq = binary.points().fold(0.0, |acc, (x, y)| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        acc + dx * dx + dy * dy
    });
    let moment = spread_sq / (nf * (w * w + h * h));
    let objects = encode_count(binary.component_count());
    let spread = nf / (w * h);
    Ok([centroid, moment, objects, spread])
}

/// The 9 stroke features of one zone, plus the encoded intersection count
/// when `with_intersections` is set.
struct ZoneTally {
    counts: [usize; 4],
    lengths: [usize; 4],
    skeleton: usize,
    area: usize,
    intersections: usize,
}

impl ZoneTally {
    fn push_into(&self, out: &mut Vec<f64>, with_intersections: bool) -> Result<()> {
        out.extend(self.counts.iter().map(|&c| encode_count(c)));
        for &l in &self.lengths {
            out.push(normalized_length(l, self.area)?);
        }
        out.push(normalized_length(self.skeleton, self.area)?);
        if with_intersections {
            out.push(encode_count(self.intersections));
        }
        Ok(())
    }
}

fn tally_zones(skel: &Skeleton, strokes: &[(Segment, Direction)], grid: &ZoneGrid) -> Vec<ZoneTally> {
    let mut tallies: Vec<ZoneTally> = grid
        .zones
        .iter()
        .map(|z| ZoneTally { counts: [0; 4], lengths: [0; 4], skeleton: 0, area: z.area(), intersections: 0 })
        .collect();
    for (seg, dir) in strokes {
        let (ax, ay) = seg.anchor();
        tallies[grid.zone_of(ax, ay)].counts[dir.index()] += 1;
        for &(x, y) in &seg.pixels {
            tallies[grid.zone_of(x, y)].lengths[dir.index()] += 1;
        }
    }
    for (x, y) in skel.image().points() {
        tallies[grid.zone_of(x, y)].skeleton += 1;
    }
    for (x, y) in junction_clusters(skel) {
        tallies[grid.zone_of(x, y)].intersections += 1;
    }
    tallies
}

/// Grows inputs narrower or shorter than 3 pixels so every 3-zone grid fits.
fn padded_skeleton(skel: &Skeleton) -> Skeleton {
    if skel.width() >= 3 && skel.height() >= 3 {
        skel.clone()
    } else {
        Skeleton::from_thin(skel.image().pad_to(3, 3))
    }
}

fn check_same_size(skel: &Skeleton, binary: &BinaryImage) -> Result<()> {
    if skel.width() != binary.width() {
        return Err(Error::DimensionMismatch { expected: skel.width(), found: binary.width() });
    }
    if skel.height() != binary.height() {
        return Err(Error::DimensionMismatch { expected: skel.height(), found: binary.height() });
    }
    Ok(())
}

/// Set 1 followed (optionally) by set 2, computed on a 3-pixel-padded skeleton.
fn stroke_features(skel: &Skeleton, set2: bool) -> Result<Vec<f64>> {
    let skel = padded_skeleton(skel);
    let (w, h) = (skel.width(), skel.height());
    let strokes = directed_strokes(&skel);
    let mut out = Vec::with_capacity(145);
    let grid = partition_zones(w, h, 3, 3)?;
    for t in tally_zones(&skel, &strokes, &grid) {
        t.push_into(&mut out, false)?;
    }
    if set2 {
        for grid in [partition_zones(w, h, 3, 1)?, partition_zones(w, h, 1, 3)?] {
            for t in tally_zones(&skel, &strokes, &grid) {
                t.push_into(&mut out, true)?;
            }
        }
    }
    Ok(out)
}

/// The 145-value multi-zone descriptor.
pub fn extract_proposed(skel: &Skeleton, binary: &BinaryImage) -> Result<FeatureVector> {
    check_same_size(skel, binary)?;
    let mut values = stroke_features(skel, true)?;
    values.extend(global_features(binary)?);
    Ok(FeatureVector { extractor: ExtractorKind::Proposed, values })
}

/// Feature set 1 alone: 81 values.
pub fn extract_geometric(skel: &Skeleton, binary: &BinaryImage) -> Result<FeatureVector> {
    check_same_size(skel, binary)?;
    let values = stroke_features(skel, false)?;
    Ok(FeatureVector { extractor: ExtractorKind::Geometric, values })
}

/// 3x3 zones with the 10 set-2 features each: 90 values.
pub fn extract_hybrid(skel: &Skeleton, binary: &BinaryImage) -> Result<FeatureVector> {
    check_same_size(skel, binary)?;
    let skel = padded_skeleton(skel);
    let strokes = directed_strokes(&skel);
    let grid = partition_zones(skel.width(), skel.height(), 3, 3)?;
    let mut values = Vec::with_capacity(90);
    for t in tally_zones(&skel, &strokes, &grid) {
        t.push_into(&mut values, true)?;
    }
    Ok(FeatureVector { extractor: ExtractorKind::Hybrid, values })
}

/// Sobel orientation histograms over a 3x3 grid on the grayscale crop: 72 values.
pub fn extract_gradient(gray: &GrayImage, binary: &BinaryImage) -> Result<FeatureVector> {
    if gray.width() != binary.width() {
        return Err(Error::DimensionMismatch { expected: binary.width(), found: gray.width() });
    }
    if gray.height() != binary.height() {
        return Err(Error::DimensionMismatch { expected: binary.height(), found: gray.height() });
    }
    let gray = gray.pad_to(3, 3);
    let grid = partition_zones(gray.width(), gray.height(), 3, 3)?;
    Ok(FeatureVector { extractor: ExtractorKind::Gradient, values: zone_histograms(&gray, &grid) })
}

/// Runs one extractor on a preprocessed character.
pub fn extract(kind: ExtractorKind, pre: &Preprocessed) -> Result<FeatureVector> {
    match kind {
        ExtractorKind::Proposed => extract_proposed(&pre.skeleton, &pre.binary),
        ExtractorKind::Geometric => extract_geometric(&pre.skeleton, &pre.binary),
        ExtractorKind::Hybrid => extract_hybrid(&pre.skeleton, &pre.binary),
        ExtractorKind::Gradient => extract_gradient(&pre.gray, &pre.binary),
    }
}
