//! Deterministic synthetic handwriting: uppercase stroke templates rendered
//! with per-sample translation and stroke-width jitter.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{GrayImage, LabeledDataset};

/// Ink and paper intensities of rendered glyphs.
pub const INK: u8 = 0;
pub const PAPER: u8 = 255;

/// A polyline on the unit square, x to the right and y down.
pub type Polyline = &'static [(f64, f64)];

/// Stroke template for one character.
pub type Template = &'static [Polyline];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlyphGenConfig {
    /// Side of the square canvas in pixels.
    pub canvas: usize,
    pub stroke_width: usize,
    /// Maximum absolute per-sample shift in pixels, applied to x and y independently.
    pub jitter_translate: usize,
    /// Maximum absolute per-sample change of the stroke width.
    pub jitter_stroke: usize,
    pub samples_per_class: usize,
    pub seed: u64,
}

impl Default for GlyphGenConfig {
    fn default() -> Self {
        Self { canvas: 32, stroke_width: 2, jitter_translate: 0, jitter_stroke: 0, samples_per_class: 4, seed: 0 }
    }
}

impl GlyphGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.canvas < 24 {
            return Err(Error::InvalidConfig(format!("canvas {} < 24", self.canvas)));
        }
        if self.stroke_width < 1 {
            return Err(Error::InvalidConfig("stroke_width must be >= 1".to_string()));
        }
        if self.samples_per_class < 1 {
            return Err(Error::InvalidConfig("samples_per_class must be >= 1".to_string()));
        }
        // keeps every glyph at least partly on the canvas
        if self.jitter_translate >= self.canvas / 4 {
            return Err(Error::InvalidConfig(format!(
                "jitter_translate {} must be below canvas/4 = {}",
                self.jitter_translate,
                self.canvas / 4
            )));
        }
        Ok(())
    }

    /// Blank border, in pixels, between the unit square and the canvas edge.
    pub fn margin(&self) -> usize {
        self.canvas / 6
    }
}

/// Uppercase Latin letters.
pub fn latin_uppercase() -> Vec<String> {
    (b'A'..=b'Z').map(|c| (c as char).to_string()).collect()
}

/// Built-in stroke template of a class name, if any.
pub fn template(name: &str) -> Option<Template> {
    let t: Template = match name {
        "A" => &[&[(0.0, 1.0), (0.5, 0.0), (1.0, 1.0)], &[(0.25, 0.5), (0.75, 0.5)]],
        "B" => &[
            &[(0.0, 0.0), (0.0, 1.0)],
            &[(0.0, 0.0), (0.7, 0.0), (0.9, 0.12), (0.9, 0.38), (0.7, 0.5), (0.0, 0.5)],
            &[(0.7, 0.5), (1.0, 0.62), (1.0, 0.88), (0.8, 1.0), (0.0, 1.0)],
        ],
        "C" => &[&[(1.0, 0.1), (0.8, 0.0), (0.2, 0.0), (0.0, 0.2), (0.0, 0.8), (0.2, 1.0), (0.8, 1.0), (1.0, 0.9)]],
        "D" => &[&[(0.0, 0.0), (0.0, 1.0), (0.6, 1.0), (1.0, 0.7), (1.0, 0.3), (0.6, 0.0), (0.0, 0.0)]],
        "E" => &[&[(1.0, 0.0), (0.0, 0.0), (0.0, 1.0), (1.0, 1.0)], &[(0.0, 0.5), (0.8, 0.5)]],
        "F" => &[&[(1.0, 0.0), (0.0, 0.0), (0.0, 1.0)], &[(0.0, 0.5), (0.8, 0.5)]],
        "G" => &[&[
            (1.0, 0.1),
            (0.8, 0.0),
            (0.2, 0.0),
            (0.0, 0.2),
            (0.0, 0.8),
            (0.2, 1.0),
            (0.8, 1.0),
            (1.0, 0.8),
            (1.0, 0.5),
            (0.55, 0.5),
        ]],
        "H" => &[&[(0.0, 0.0), (0.0, 1.0)], &[(1.0, 0.0), (1.0, 1.0)], &[(0.0, 0.5), (1.0, 0.5)]],
        "I" => &[&[(0.5, 0.0), (0.5, 1.0)]],
        "J" => &[&[(1.0, 0.0), (1.0, 0.8), (0.8, 1.0), (0.2, 1.0), (0.0, 0.8)]],
        "K" => &[&[(0.0, 0.0), (0.0, 1.0)], &[(1.0, 0.0), (0.0, 0.55)], &[(0.3, 0.4), (1.0, 1.0)]],
        "L" => &[&[(0.0, 0.0), (0.0, 1.0)], &[(0.0, 1.0), (1.0, 1.0)]],
        "M" => &[&[(0.0, 1.0), (0.0, 0.0), (0.5, 0.6), (1.0, 0.0), (1.0, 1.0)]],
        "N" => &[&[(0.0, 1.0), (0.0, 0.0), (1.0, 1.0), (1.0, 0.0)]],
        "O" => &[&[
            (0.3, 0.0),
            (0.7, 0.0),
            (1.0, 0.3),
            (1.0, 0.7),
            (0.7, 1.0),
            (0.3, 1.0),
            (0.0, 0.7),
            (0.0, 0.3),
            (0.3, 0.0),
        ]],
        "P" => &[&[(0.0, 1.0), (0.0, 0.0), (0.8, 0.0), (1.0, 0.15), (1.0, 0.4), (0.8, 0.55), (0.0, 0.55)]],
        "Q" => &[
            &[
                (0.3, 0.0),
                (0.7, 0.0),
                (1.0, 0.3),
                (1.0, 0.7),
                (0.7, 1.0),
                (0.3, 1.0),
                (0.0, 0.7),
                (0.0, 0.3),
                (0.3, 0.0),
            ],
            &[(0.6, 0.65), (1.0, 1.0)],
        ],
        "R" => &[
            &[(0.0, 1.0), (0.0, 0.0), (0.8, 0.0), (1.0, 0.15), (1.0, 0.4), (0.8, 0.55), (0.0, 0.55)],
            &[(0.4, 0.55), (1.0, 1.0)],
        ],
        "S" => &[&[
            (1.0, 0.1),
            (0.8, 0.0),
            (0.2, 0.0),
            (0.0, 0.15),
            (0.0, 0.4),
            (0.2, 0.5),
            (0.8, 0.5),
            (1.0, 0.6),
            (1.0, 0.85),
            (0.8, 1.0),
            (0.2, 1.0),
            (0.0, 0.9),
        ]],
        "T" => &[&[(0.0, 0.0), (1.0, 0.0)], &[(0.5, 0.0), (0.5, 1.0)]],
        "U" => &[&[(0.0, 0.0), (0.0, 0.8), (0.2, 1.0), (0.8, 1.0), (1.0, 0.8), (1.0, 0.0)]],
        "V" => &[&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]],
        "W" => &[&[(0.0, 0.0), (0.25, 1.0), (0.5, 0.4), (0.75, 1.0), (1.0, 0.0)]],
        "X" => &[&[(0.0, 0.0), (1.0, 1.0)], &[(1.0, 0.0), (0.0, 1.0)]],
        "Y" => &[&[(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)], &[(0.5, 0.5), (0.5, 1.0)]],
        "Z" => &[&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]],
        _ => return None,
    };
    Some(t)
}

/// Pixels of the segment `a`-`b`, stepping one pixel along the major axis
/// and rounding the minor coordinate half away from zero. Both endpoints
/// are included.
pub fn rasterize_line(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let steps = dx.abs().max(dy.abs());
    if steps == 0 {
        return alloc::vec![a];
    }
    // a + round(d * t / steps), computed in integers
    let offset = |d: i64, t: i64| {
        let num = d * t;
        let q = (2 * num.abs() + steps) / (2 * steps);
        if num < 0 {
            -q
        } else {
            q
        }
    };
    (0..=steps).map(|t| (a.0 + offset(dx, t), a.1 + offset(dy, t))).collect()
}

/// Maps a unit-square point to canvas pixels for the given margin and shift.
fn to_canvas(p: (f64, f64), canvas: usize, margin: usize, shift: (i64, i64)) -> (i64, i64) {
    let span = (canvas - 1 - 2 * margin) as f64;
    let x = libm::round(margin as f64 + p.0 * span) as i64 + shift.0;
    let y = libm::round(margin as f64 + p.1 * span) as i64 + shift.1;
    (x, y)
}

/// Draws `template` in ink on a blank canvas using a square brush of side
/// `stroke_width`; pixels falling off the canvas are clipped.
pub fn render_template(
    template: Template,
    canvas: usize,
    margin: usize,
    stroke_width: usize,
    shift: (i64, i64),
) -> GrayImage {
    let mut img = GrayImage::filled(canvas, canvas, PAPER).expect("canvas is nonempty");
    let lo = (stroke_width as i64 - 1) / 2;
    let hi = stroke_width as i64 - 1 - lo;
    let n = canvas as i64;
    for line in template {
        for pair in line.windows(2) {
            let a = to_canvas(pair[0], canvas, margin, shift);
            let b = to_canvas(pair[1], canvas, margin, shift);
            for (x, y) in rasterize_line(a, b) {
                for by in y - lo..=y + hi {
                    for bx in x - lo..=x + hi {
                        if (0..n).contains(&bx) && (0..n).contains(&by) {
                            img.set(bx as usize, by as usize, INK);
                        }
                    }
                }
            }
        }
    }
    img
}

/// Renders `samples_per_class` jittered samples of every alphabet entry.
///
/// Samples are ordered class by class; one ChaCha8 stream seeded from
/// `cfg.seed` drives all jitter, so equal seeds give bit-identical output.
pub fn generate_glyphs(cfg: &GlyphGenConfig, alphabet: &[String]) -> Result<LabeledDataset> {
    cfg.validate()?;
    let templates = alphabet
        .iter()
        .map(|name| template(name).ok_or_else(|| Error::MissingTemplate(name.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let jt = cfg.jitter_translate as i64;
    let js = cfg.jitter_stroke as i64;
    let mut samples = Vec::with_capacity(alphabet.len() * cfg.samples_per_class);
    for (label, tpl) in templates.into_iter().enumerate() {
        for _ in 0..cfg.samples_per_class {
            let shift = (rng.gen_range(-jt..=jt), rng.gen_range(-jt..=jt));
            let width = (cfg.stroke_width as i64 + rng.gen_range(-js..=js)).max(1) as usize;
            samples.push((render_template(tpl, cfg.canvas, cfg.margin(), width, shift), label));
        }
    }
    LabeledDataset::new(
        samples,
        alphabet.to_vec(),
        format!(
            "synthetic canvas={} stroke={} jitter_translate={} jitter_stroke={} seed={}",
            cfg.canvas, cfg.stroke_width, cfg.jitter_translate, cfg.jitter_stroke, cfg.seed
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_uppercase_letter_has_a_template() {
        for name in latin_uppercase() {
            let tpl = template(&name).unwrap();
            for line in tpl {
                assert!(line.len() >= 2);
                assert!(line.iter().all(|&(x, y)| (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)));
            }
        }
        assert!(template("a").is_none());
    }

    #[test]
    fn line_raster_includes_endpoints_and_is_8_connected() {
        let pts = rasterize_line((0, 0), (7, -3));
        assert_eq!(pts.first(), Some(&(0, 0)));
        assert_eq!(pts.last(), Some(&(7, -3)));
        for w in pts.windows(2) {
            assert!((w[1].0 - w[0].0).abs() <= 1 && (w[1].1 - w[0].1).abs() <= 1);
        }
        assert_eq!(rasterize_line((2, 2), (2, 2)), alloc::vec![(2, 2)]);
    }

    #[test]
    fn zero_jitter_samples_are_identical() {
        let cfg = GlyphGenConfig { samples_per_class: 2, ..Default::default() };
        let ds = generate_glyphs(&cfg, &latin_uppercase()).unwrap();
        assert_eq!(ds.len(), 52);
        for pair in ds.samples().chunks(2) {
            assert_eq!(pair[0], pair[1]);
        }
    }

    #[test]
    fn missing_template_is_an_error() {
        let cfg = GlyphGenConfig::default();
        let alphabet = alloc::vec!["A".to_string(), "ka".to_string()];
        assert_eq!(generate_glyphs(&cfg, &alphabet), Err(Error::MissingTemplate("ka".to_string())));
    }

    #[test]
    fn config_validation() {
        let bad = GlyphGenConfig { canvas: 20, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = GlyphGenConfig { stroke_width: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = GlyphGenConfig { samples_per_class: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = GlyphGenConfig { jitter_translate: 8, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
