//! Image files and labeled dataset directories.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use hcr_core::image::{GrayImage, LabeledDataset};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};

use crate::error::{HcrError, Result};

/// Reads an 8-bit grayscale or RGB PNG or PGM; RGB is reduced to luma.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let image_error = |message: String| HcrError::Image { path: path.to_path_buf(), message };
    let reader =
        ImageReader::open(path).and_then(ImageReader::with_guessed_format).map_err(|e| HcrError::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Pnm) => {}
        Some(other) => return Err(image_error(format!("unsupported format {other:?}"))),
        None => return Err(image_error("unrecognized image format".to_string())),
    }
    let decoded = reader.decode().map_err(|e| image_error(e.to_string()))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let gray = match decoded {
        DynamicImage::ImageLuma8(buf) => GrayImage::new(w, h, buf.into_raw()),
        DynamicImage::ImageRgb8(buf) => GrayImage::from_rgb(w, h, buf.as_raw()),
        other => {
            return Err(image_error(format!("unsupported pixel type {:?}, expected 8-bit gray or RGB", other.color())))
        }
    };
    gray.map_err(|e| HcrError::core(path.display().to_string(), e))
}

/// Writes a binary (P5) PGM.
pub fn save_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| HcrError::io(path, e))?;
    let encoder = PnmEncoder::new(BufWriter::new(file)).with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary));
    encoder
        .write_image(img.data(), img.width() as u32, img.height() as u32, ExtendedColorType::L8)
        .map_err(|e| HcrError::Image { path: path.to_path_buf(), message: e.to_string() })
}

/// A dataset read from disk together with where each sample came from.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedDataset {
    pub dataset: LabeledDataset,
    /// File name of every sample, parallel to `dataset.samples()`.
    pub files: Vec<String>,
    /// File names that did not match `<LABEL>_<id>.<ext>` for a known label.
    pub skipped: Vec<String>,
}

/// Class name encoded in a `<LABEL>_<id>.<ext>` file name.
pub fn label_of(file_name: &str) -> Option<&str> {
    let (stem, _ext) = file_name.rsplit_once('.')?;
    let (label, id) = stem.rsplit_once('_')?;
    (!label.is_empty() && !id.is_empty()).then_some(label)
}

/// Loads every `<LABEL>_<id>.<ext>` image in `dir` whose label is in
/// `alphabet`, ordered by file name.
pub fn ingest_dataset(dir: &Path, alphabet: &[String]) -> Result<IngestedDataset> {
    let entries = std::fs::read_dir(dir).map_err(|e| HcrError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| HcrError::io(dir, e))?;
        if entry.file_type().map_err(|e| HcrError::io(entry.path(), e))?.is_file() {
            paths.push(entry.path());
        }
    }
    if paths.is_empty() {
        return Err(HcrError::Data(format!("{}: empty directory", dir.display())));
    }
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    let mut samples = Vec::new();
    let mut files = Vec::new();
    let mut skipped = Vec::new();
    for path in paths {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        match label_of(&name).and_then(|l| alphabet.iter().position(|a| a == l)) {
            Some(label) => {
                samples.push((load_image(&path)?, label));
                files.push(name);
            }
            None => skipped.push(name),
        }
    }
    if samples.is_empty() {
        return Err(HcrError::Data(format!("{}: zero matching files ({} skipped)", dir.display(), skipped.len())));
    }
    let dataset = LabeledDataset::new(samples, alphabet.to_vec(), format!("directory {}", dir.display()))
        .map_err(|e| HcrError::core(dir.display().to_string(), e))?;
    Ok(IngestedDataset { dataset, files, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_from_file_names() {
        assert_eq!(label_of("A_001.png"), Some("A"));
        assert_eq!(label_of("Q_1.pgm"), Some("Q"));
        assert_eq!(label_of("my_class_7.png"), Some("my_class"));
        assert_eq!(label_of("A001.png"), None);
        assert_eq!(label_of("A_.png"), None);
        assert_eq!(label_of("_3.png"), None);
        assert_eq!(label_of("A_1"), None);
    }
}
