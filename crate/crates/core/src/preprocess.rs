//! Grayscale → Otsu binarization → Zhang–Suen thinning → bounding-box crop.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryImage, BoundingBox, GrayImage, NEIGHBOURS};

/// Which side of the threshold is ink.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Intensities `<= t` are foreground (dark ink on light paper).
    #[default]
    DarkForeground,
    /// Intensities `> t` are foreground.
    LightForeground,
}

/// Otsu threshold of an image.
pub fn otsu_threshold(img: &GrayImage) -> u8 {
    otsu_threshold_from_histogram(&img.histogram())
}

/// Threshold `t` minimizing the weighted within-class variance of the split
/// `{i <= t}` / `{i > t}`, smallest `t` on ties.
///
/// Thresholds below the lowest occupied bin leave class 0 empty and are
/// never better than the first occupied bin, so the search starts there;
/// a constant image therefore maps to its own intensity. An empty
/// histogram yields 0.
pub fn otsu_threshold_from_histogram(hist: &[u64; 256]) -> u8 {
    let Some(first) = hist.iter().position(|&h| h > 0) else {
        return 0;
    };
    let total: u64 = hist.iter().sum();
    let total_sum: u128 = hist.iter().enumerate().map(|(i, &h)| i as u128 * h as u128).sum();

    // Within-class variance = const - (M0^2/w0 + M1^2/w1), so we maximize
    // the bracket, kept as an exact fraction num/den.
    let score = |w0: u64, m0: u128| -> (u128, u128) {
        let w1 = total - w0;
        let m1 = total_sum - m0;
        if w1 == 0 {
            (m0 * m0, w0 as u128)
        } else {
            let (w0, w1) = (w0 as u128, w1 as u128);
            (m0 * m0 * w1 + m1 * m1 * w0, w0 * w1)
        }
    };

    let mut w0 = 0u64;
    let mut m0 = 0u128;
    for (i, &h) in hist.iter().enumerate().take(first + 1) {
        w0 += h;
        m0 += i as u128 * h as u128;
    }
    let mut best_t = first;
    let mut best = score(w0, m0);
    for (t, &h) in hist.iter().enumerate().skip(first + 1) {
        w0 += h;
        m0 += t as u128 * h as u128;
        let cand = score(w0, m0);
        if fraction_gt(cand, best) {
            best = cand;
            best_t = t;
        }
    }
    best_t as u8
}

/// `a.0/a.1 > b.0/b.1`, exact when the cross products fit in `u128`.
fn fraction_gt(a: (u128, u128), b: (u128, u128)) -> bool {
    match (a.0.checked_mul(b.1), b.0.checked_mul(a.1)) {
        (Some(l), Some(r)) => l > r,
        _ => (a.0 as f64 / a.1 as f64) > (b.0 as f64 / b.1 as f64),
    }
}

/// Thresholds an image at `t`.
pub fn binarize(img: &GrayImage, t: u8, polarity: Polarity) -> BinaryImage {
    let mask = img
        .data()
        .iter()
        .map(|&v| match polarity {
            Polarity::DarkForeground => v <= t,
            Polarity::LightForeground => v > t,
        })
        .collect();
    BinaryImage::new(img.width(), img.height(), mask).expect("dimensions come from a valid image")
}

/// A one-pixel-wide medial representation plus its junction and endpoint pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    image: BinaryImage,
    junctions: Vec<(usize, usize)>,
    endpoints: Vec<(usize, usize)>,
}

impl Skeleton {
    /// Wraps an already-thin mask, computing junctions (>= 3 neighbours) and
    /// endpoints (exactly 1 neighbour) in row-major order.
    pub fn from_thin(image: BinaryImage) -> Self {
        let mut junctions = Vec::new();
        let mut endpoints = Vec::new();
        for (x, y) in image.points() {
            match image.neighbour_count(x, y) {
                1 => endpoints.push((x, y)),
                n if n >= 3 => junctions.push((x, y)),
                _ => {}
            }
        }
        Self { image, junctions, endpoints }
    }

    pub fn image(&self) -> &BinaryImage {
        &self.image
    }

    pub fn into_image(self) -> BinaryImage {
        self.image
    }

    pub fn junctions(&self) -> &[(usize, usize)] {
        &self.junctions
    }

    pub fn endpoints(&self) -> &[(usize, usize)] {
        &self.endpoints
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    pub fn crop(&self, bbox: &BoundingBox) -> Skeleton {
        Skeleton::from_thin(self.image.crop(bbox))
    }
}

/// The two Zhang–Suen sub-iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThinningPass {
    First,
    Second,
}

/// Whether `(x, y)` satisfies the Zhang–Suen deletion condition of `pass`.
pub fn zhang_suen_deletable(img: &BinaryImage, x: usize, y: usize, pass: ThinningPass) -> bool {
    if !img.get(x, y) {
        return false;
    }
    let (xi, yi) = (x as isize, y as isize);
    // p[0..8] = P2..P9
    let mut p = [false; 8];
    for (k, (dx, dy)) in NEIGHBOURS.iter().enumerate() {
        p[k] = img.get_signed(xi + dx, yi + dy);
    }
    let b = p.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8).filter(|&k| !p[k] && p[(k + 1) % 8]).count();
    if a != 1 {
        return false;
    }
    let [p2, _, p4, _, p6, _, p8, _] = p;
    match pass {
        ThinningPass::First => !(p2 && p4 && p6) && !(p4 && p6 && p8),
        ThinningPass::Second => !(p2 && p4 && p8) && !(p2 && p6 && p8),
    }
}

/// Zhang–Suen thinning iterated to a fixpoint, alternated with removal of
/// redundant staircase corners until neither step changes the image.
///
/// Plain Zhang–Suen leaves 4-connected corners on diagonal strokes, where
/// a pixel has three 8-neighbours without being a stroke junction. Those
/// corners are removed one at a time in row-major order when they are
/// simple points, so connectivity is kept and the result is 8-thin. The
/// output is a fixpoint of Zhang–Suen: no pixel satisfies either deletion
/// condition.
///
/// Pure parallel Zhang–Suen also erases an isolated 2x2 block entirely;
/// when a sub-iteration would remove every pixel of a component, the
/// component's first pixel in row-major order is kept, which leaves it
/// isolated.
pub fn skeletonize(img: &BinaryImage) -> Result<Skeleton> {
    if img.is_blank() {
        return Err(Error::BlankImage);
    }
    let mut current = img.clone();
    loop {
        zhang_suen(&mut current);
        if !remove_staircase_corners(&mut current) {
            break;
        }
    }
    Ok(Skeleton::from_thin(current))
}

/// Runs Zhang–Suen passes until neither sub-iteration deletes anything.
fn zhang_suen(current: &mut BinaryImage) {
    let mut marked = Vec::new();
    loop {
        let mut changed = false;
        for pass in [ThinningPass::First, ThinningPass::Second] {
            marked.clear();
            marked.extend(current.points().filter(|&(x, y)| zhang_suen_deletable(current, x, y, pass)));
            if marked.is_empty() {
                continue;
            }
            let keep = survivors_of_vanishing_components(current, &marked);
            for &(x, y) in &marked {
                current.set(x, y, false);
            }
            for (x, y) in keep {
                current.set(x, y, true);
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
}

/// Sequentially deletes simple pixels that sit on a 4-connected corner.
fn remove_staircase_corners(img: &mut BinaryImage) -> bool {
    let mut changed = false;
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) && is_staircase_corner(img, x, y) {
                img.set(x, y, false);
                changed = true;
            }
        }
    }
    changed
}

/// A pixel with two perpendicular 4-neighbours whose removal keeps its
/// neighbourhood one 8-connected piece without opening a hole.
fn is_staircase_corner(img: &BinaryImage, x: usize, y: usize) -> bool {
    let (xi, yi) = (x as isize, y as isize);
    let mut p = [false; 8];
    for (k, (dx, dy)) in NEIGHBOURS.iter().enumerate() {
        p[k] = img.get_signed(xi + dx, yi + dy);
    }
    let [n, _, e, _, s, _, w, _] = p;
    let corner = (n || s) && (e || w);
    let four_background = !(n && e && s && w);
    let b = p.iter().filter(|&&v| v).count();
    corner && four_background && b >= 2 && ring_components(&p) == 1
}

/// Number of 8-connected groups among the foreground neighbours of a pixel.
fn ring_components(p: &[bool; 8]) -> usize {
    let mut group = [usize::MAX; 8];
    let mut groups = 0;
    for start in 0..8 {
        if !p[start] || group[start] != usize::MAX {
            continue;
        }
        group[start] = groups;
        let mut stack = alloc::vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..8 {
                if p[j] && group[j] == usize::MAX && offsets_adjacent(NEIGHBOURS[i], NEIGHBOURS[j]) {
                    group[j] = groups;
                    stack.push(j);
                }
            }
        }
        groups += 1;
    }
    groups
}

fn offsets_adjacent(a: (isize, isize), b: (isize, isize)) -> bool {
    a != b && (a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1
}

/// For every component whose pixels are all in `marked`, its first pixel.
fn survivors_of_vanishing_components(img: &BinaryImage, marked: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let (labels, n) = img.label_components();
    let mut size = alloc::vec![0usize; n + 1];
    for &l in &labels {
        size[l as usize] += 1;
    }
    let mut hit = alloc::vec![0usize; n + 1];
    let mut first = alloc::vec![None; n + 1];
    for &(x, y) in marked {
        let l = labels[y * img.width() + x] as usize;
        hit[l] += 1;
        // marked is row-major, so the first hit is the component's first pixel
        first[l].get_or_insert((x, y));
    }
    (1..=n).filter(|&l| hit[l] == size[l]).filter_map(|l| first[l]).collect()
}

/// Tight box around the foreground.
pub fn bounding_box(img: &BinaryImage) -> Result<BoundingBox> {
    let mut points = img.points();
    let (x, y) = points.next().ok_or(Error::BlankImage)?;
    let mut bbox = BoundingBox { x0: x, y0: y, x1: x, y1: y };
    for (x, y) in points {
        bbox.x0 = bbox.x0.min(x);
        bbox.x1 = bbox.x1.max(x);
        bbox.y1 = bbox.y1.max(y);
    }
    Ok(bbox)
}

/// Output of [`preprocess`]: everything cropped to the skeleton's bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub threshold: u8,
    pub bbox: BoundingBox,
    pub skeleton: Skeleton,
    /// Un-thinned binary mask.
    pub binary: BinaryImage,
    /// Source grayscale pixels.
    pub gray: GrayImage,
}

/// Runs the full preprocessing chain on one character image.
///
/// A constant image carries no ink whatever its intensity and is reported
/// as blank.
pub fn preprocess(img: &GrayImage, polarity: Polarity) -> Result<Preprocessed> {
    if img.histogram().iter().filter(|&&h| h > 0).count() < 2 {
        return Err(Error::BlankImage);
    }
    let threshold = otsu_threshold(img);
    let binary = binarize(img, threshold, polarity);
    let skeleton = skeletonize(&binary)?;
    let bbox = bounding_box(skeleton.image())?;
    Ok(Preprocessed {
        threshold,
        bbox,
        skeleton: skeleton.crop(&bbox),
        binary: binary.crop(&bbox),
        gray: img.crop(&bbox),
    })
}
