//! Skeleton segments and their line-direction classes.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::zoning::Zone;
use crate::image::{BinaryImage, NEIGHBOURS};
use crate::preprocess::Skeleton;

/// Shortest segment kept; shorter pieces are treated as thinning noise.
pub const MIN_SEGMENT_LEN: usize = 3;

/// Half-width of the pixel window used to locate the sharpest turn.
const TURN_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Horizontal,
    Vertical,
    /// Rising to the right, shaped like `/`.
    RightDiagonal,
    /// Falling to the right, shaped like `\`.
    LeftDiagonal,
}

impl Direction {
    pub const ALL: [Direction; 4] =
        [Direction::Horizontal, Direction::Vertical, Direction::RightDiagonal, Direction::LeftDiagonal];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentKind {
    Path,
    Loop,
}

/// A maximal junction-free run of skeleton pixels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    /// Pixels in walking order; consecutive pixels are 8-neighbours.
    pub pixels: Vec<(usize, usize)>,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Topmost, then leftmost pixel.
    pub fn anchor(&self) -> (usize, usize) {
        *self.pixels.iter().min_by_key(|&&(x, y)| (y, x)).expect("segments are nonempty")
    }
}

/// Splits the skeleton at its junction pixels and returns every remaining
/// path or loop of at least [`MIN_SEGMENT_LEN`] pixels, ordered by anchor.
///
/// Removing the junctions leaves pixels with at most two neighbours, so
/// each component is a simple path or a simple cycle.
pub fn extract_segments(skel: &Skeleton) -> Vec<Segment> {
    let img = skel.image();
    let w = img.width();
    let mut rest = img.clone();
    for &(x, y) in skel.junctions() {
        rest.set(x, y, false);
    }
    let (labels, n) = rest.label_components();
    let mut members: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (x, y) in rest.points() {
        members[labels[y * w + x] as usize - 1].push((x, y));
    }

    let mut segments: Vec<Segment> =
        members.into_iter().filter(|m| m.len() >= MIN_SEGMENT_LEN).map(|m| walk_component(&rest, m)).collect();
    segments.sort_by_key(|s| {
        let (x, y) = s.anchor();
        (y, x)
    });
    segments
}

fn neighbours_in(img: &BinaryImage, (x, y): (usize, usize)) -> impl Iterator<Item = (usize, usize)> + '_ {
    NEIGHBOURS.iter().filter_map(move |(dx, dy)| {
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        img.get_signed(nx, ny).then_some((nx as usize, ny as usize))
    })
}

/// Orders the pixels of one degree-<=2 component. `members` is row-major.
fn walk_component(img: &BinaryImage, members: Vec<(usize, usize)>) -> Segment {
    let start_end = members.iter().copied().find(|&p| neighbours_in(img, p).count() <= 1);
    let (start, kind) = match start_end {
        Some(p) => (p, SegmentKind::Path),
        None => (members[0], SegmentKind::Loop),
    };
    let mut pixels = Vec::with_capacity(members.len());
    let mut visited = vec![false; members.len()];
    let index_of =
        |p: (usize, usize)| members.binary_search_by_key(&(p.1, p.0), |&(x, y)| (y, x)).expect("neighbour is a member");
    let mut current = Some(start);
    while let Some(p) = current {
        visited[index_of(p)] = true;
        pixels.push(p);
        current = neighbours_in(img, p).find(|&q| !visited[index_of(q)]);
    }
    Segment { pixels, kind }
}

/// Octant (multiple of 45 degrees, counter-clockwise on screen) of a unit step.
fn octant(a: (usize, usize), b: (usize, usize)) -> i32 {
    let dx = b.0 as i64 - a.0 as i64;
    let dy = b.1 as i64 - a.1 as i64;
    match (dx, dy) {
        (1, 0) => 0,
        (1, -1) => 1,
        (0, -1) => 2,
        (-1, -1) => 3,
        (-1, 0) => 4,
        (-1, 1) => 5,
        (0, 1) => 6,
        _ => 7,
    }
}

/// Spread of the cumulative signed turning along a path, in 45-degree units.
fn turning_range(pixels: &[(usize, usize)]) -> i32 {
    let octants: Vec<i32> = pixels.windows(2).map(|w| octant(w[0], w[1])).collect();
    let (mut cum, mut lo, mut hi) = (0i32, 0i32, 0i32);
    for pair in octants.windows(2) {
        let mut turn = (pair[1] - pair[0]).rem_euclid(8);
        if turn > 4 {
            turn -= 8;
        }
        cum += turn;
        lo = lo.min(cum);
        hi = hi.max(cum);
    }
    hi - lo
}

/// Unsigned angle (radians) between the incoming and outgoing chords at `i`.
fn chord_turn(pixels: &[(usize, usize)], i: usize) -> f64 {
    let back = pixels[i.saturating_sub(TURN_WINDOW)];
    let fwd = pixels[(i + TURN_WINDOW).min(pixels.len() - 1)];
    let p = pixels[i];
    let u = (p.0 as f64 - back.0 as f64, p.1 as f64 - back.1 as f64);
    let v = (fwd.0 as f64 - p.0 as f64, fwd.1 as f64 - p.1 as f64);
    libm::fabs(libm::atan2(u.0 * v.1 - u.1 * v.0, u.0 * v.0 + u.1 * v.1))
}

/// Splits a path whose cumulative turning spans more than 45 degrees at its
/// sharpest turn, recursively, as long as both pieces keep at least
/// [`MIN_SEGMENT_LEN`] pixels. Loops are returned unchanged.
pub fn split_at_turns(seg: &Segment) -> Vec<Segment> {
    let mut out = Vec::new();
    split_into(seg.clone(), &mut out);
    out
}

fn split_into(seg: Segment, out: &mut Vec<Segment>) {
    let n = seg.pixels.len();
    if seg.kind == SegmentKind::Loop || n < 2 * MIN_SEGMENT_LEN || turning_range(&seg.pixels) <= 1 {
        out.push(seg);
        return;
    }
    // the first piece is pixels[..=s], the second pixels[s + 1..]
    let lo = MIN_SEGMENT_LEN - 1;
    let hi = n - 1 - MIN_SEGMENT_LEN;
    let mut best = lo;
    let mut best_turn = chord_turn(&seg.pixels, lo);
    for i in lo + 1..=hi {
        let t = chord_turn(&seg.pixels, i);
        if t > best_turn {
            best = i;
            best_turn = t;
        }
    }
    let mut first = seg.pixels;
    let second = first.split_off(best + 1);
    split_into(Segment { pixels: first, kind: SegmentKind::Path }, out);
    split_into(Segment { pixels: second, kind: SegmentKind::Path }, out);
}

/// Loops whose principal axes differ by less than this ratio count as horizontal.
const ISOTROPIC_RATIO: f64 = 1.1;

/// Orientation of a segment in degrees, folded to (-90, 90], y pointing down.
pub fn segment_angle(seg: &Segment) -> f64 {
    match seg.kind {
        SegmentKind::Path => {
            let a = seg.pixels[0];
            let b = *seg.pixels.last().expect("segments are nonempty");
            let dx = b.0 as f64 - a.0 as f64;
            let dy = b.1 as f64 - a.1 as f64;
            if dx == 0.0 {
                90.0
            } else {
                libm::atan(dy / dx).to_degrees()
            }
        }
        SegmentKind::Loop => {
            let (mu20, mu02, mu11) = central_moments(&seg.pixels);
            let theta = 0.5 * libm::atan2(2.0 * mu11, mu20 - mu02).to_degrees();
            if theta <= -90.0 {
                theta + 180.0
            } else {
                theta
            }
        }
    }
}

fn central_moments(pixels: &[(usize, usize)]) -> (f64, f64, f64) {
    let n = pixels.len() as f64;
    let cx = pixels.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let cy = pixels.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    pixels.iter().fold((0.0, 0.0, 0.0), |(a, b, c), &(x, y)| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        (a + dx * dx, b + dy * dy, c + dx * dy)
    })
}

/// Buckets a segment's orientation into one of the four line classes.
///
/// `|θ| <= 22.5` is horizontal, `|θ| >= 67.5` vertical, negative angles in
/// between are `/` and positive ones `\`. Near-isotropic loops are horizontal.
pub fn classify_direction(seg: &Segment) -> Direction {
    if seg.kind == SegmentKind::Loop {
        let (mu20, mu02, mu11) = central_moments(&seg.pixels);
        let mean = 0.5 * (mu20 + mu02);
        let spread = libm::sqrt(0.25 * (mu20 - mu02) * (mu20 - mu02) + mu11 * mu11);
        let (major, minor) = (mean + spread, mean - spread);
        if minor > 0.0 && libm::sqrt(major / minor) < ISOTROPIC_RATIO {
            return Direction::Horizontal;
        }
    }
    direction_of_angle(segment_angle(seg))
}

pub fn direction_of_angle(theta: f64) -> Direction {
    if libm::fabs(theta) <= 22.5 {
        Direction::Horizontal
    } else if libm::fabs(theta) >= 67.5 {
        Direction::Vertical
    } else if theta < 0.0 {
        Direction::RightDiagonal
    } else {
        Direction::LeftDiagonal
    }
}

/// Segments of a skeleton after turning splits, each with its direction class.
pub fn directed_strokes(skel: &Skeleton) -> Vec<(Segment, Direction)> {
    extract_segments(skel)
        .iter()
        .flat_map(split_at_turns)
        .map(|s| {
            let d = classify_direction(&s);
            (s, d)
        })
        .collect()
}

/// One representative pixel (topmost, then leftmost) per 8-connected cluster
/// of junction pixels.
///
/// Where two strokes cross at right angles the pixels flanking the crossing
/// also have three or more neighbours; the cluster is one intersection.
pub fn junction_clusters(skel: &Skeleton) -> Vec<(usize, usize)> {
    let img = skel.image();
    let mut junctions = BinaryImage::empty(img.width(), img.height()).expect("skeleton is nonempty");
    for &(x, y) in skel.junctions() {
        junctions.set(x, y, true);
    }
    let (labels, n) = junctions.label_components();
    let mut anchors = vec![None; n];
    // row-major scan: the first pixel seen is the anchor
    for (x, y) in junctions.points() {
        anchors[labels[y * img.width() + x] as usize - 1].get_or_insert((x, y));
    }
    anchors.into_iter().flatten().collect()
}

/// Intersections whose cluster anchor lies inside `zone`. Neighbours are
/// counted across the zone border.
pub fn count_intersections(skel: &Skeleton, zone: &Zone) -> usize {
    junction_clusters(skel).into_iter().filter(|&(x, y)| zone.contains(x, y)).count()
}
