use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-open pixel rectangle `[x, x + width) x [y, y + height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Zone {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Zone {
    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }
}

/// A `rows` x `cols` tiling of an image, zones in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneGrid {
    pub rows: usize,
    pub cols: usize,
    pub zones: Vec<Zone>,
    col_starts: Vec<usize>,
    row_starts: Vec<usize>,
}

impl ZoneGrid {
    /// Index of the zone containing `(x, y)`.
    pub fn zone_of(&self, x: usize, y: usize) -> usize {
        let col = self.col_starts.partition_point(|&s| s <= x) - 1;
        let row = self.row_starts.partition_point(|&s| s <= y) - 1;
        row * self.cols + col
    }
}

/// Splits `len` into `parts` near-equal pieces, larger pieces first.
pub fn split_lengths(len: usize, parts: usize) -> Vec<usize> {
    let (base, rem) = (len / parts, len % parts);
    (0..parts).map(|i| base + usize::from(i < rem)).collect()
}

fn starts(lengths: &[usize]) -> Vec<usize> {
    lengths
        .iter()
        .scan(0, |acc, &l| {
            let s = *acc;
            *acc += l;
            Some(s)
        })
        .collect()
}

pub fn partition_zones(width: usize, height: usize, rows: usize, cols: usize) -> Result<ZoneGrid> {
    if rows == 0 || cols == 0 || width < cols || height < rows {
        return Err(Error::GridTooLarge { width, height, rows, cols });
    }
    let widths = split_lengths(width, cols);
    let heights = split_lengths(height, rows);
    let col_starts = starts(&widths);
    let row_starts = starts(&heights);
    let mut zones = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            zones.push(Zone { x: col_starts[c], y: row_starts[r], width: widths[c], height: heights[r] });
        }
    }
    Ok(ZoneGrid { rows, cols, zones, col_starts, row_starts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn nine_by_nine_into_three_by_three() {
        let grid = partition_zones(9, 9, 3, 3).unwrap();
        assert_eq!(grid.zones.len(), 9);
        assert!(grid.zones.iter().all(|z| z.width == 3 && z.height == 3));
        assert_eq!(grid.zones[5], Zone { x: 6, y: 3, width: 3, height: 3 });
    }

    #[test]
    fn larger_parts_first() {
        assert_eq!(split_lengths(10, 3), vec![4, 3, 3]);
        assert_eq!(split_lengths(11, 3), vec![4, 4, 3]);
        let grid = partition_zones(10, 3, 1, 3).unwrap();
        assert_eq!(grid.zones.iter().map(|z| z.width).collect::<Vec<_>>(), vec![4, 3, 3]);
    }

    #[test]
    fn too_small_is_an_error() {
        assert!(matches!(partition_zones(2, 9, 3, 3), Err(Error::GridTooLarge { .. })));
        assert!(matches!(partition_zones(9, 9, 0, 3), Err(Error::GridTooLarge { .. })));
    }

    proptest! {
        #[test]
        fn zones_tile_exactly(w in 1usize..40, h in 1usize..40, r in 1usize..6, c in 1usize..6) {
            prop_assume!(w >= c && h >= r);
            let grid = partition_zones(w, h, r, c).unwrap();
            // coverage oracle: every pixel lies in exactly one zone, and zone_of agrees
            let mut hits = vec![0u32; w * h];
            for z in &grid.zones {
                for y in z.y..z.y + z.height {
                    for x in z.x..z.x + z.width {
                        hits[y * w + x] += 1;
                    }
                }
            }
            prop_assert!(hits.iter().all(|&n| n == 1));
            prop_assert_eq!(grid.zones.iter().map(Zone::area).sum::<usize>(), w * h);
            for y in 0..h {
                for x in 0..w {
                    prop_assert!(grid.zones[grid.zone_of(x, y)].contains(x, y));
                }
            }
            for row in grid.zones.chunks(c) {
                let (lo, hi) = row.iter().fold((usize::MAX, 0), |(lo, hi), z| (lo.min(z.width), hi.max(z.width)));
                prop_assert!(hi - lo <= 1);
            }
        }
    }
}
