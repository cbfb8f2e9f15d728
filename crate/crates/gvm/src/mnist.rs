//! MNIST IDX files.
//!
//! Images: big-endian magic `0x00000803`, count, rows, cols, then unsigned
//! bytes row-major. Labels: magic `0x00000801`, count, then one byte each.

use std::path::{Path, PathBuf};

use gvm_core::data::{IMAGE_PIXELS, IMAGE_SIDE, PIXEL_SCALE};
use gvm_core::Dataset;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const CLASSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn prefix(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "t10k",
        }
    }

    pub fn image_path(self, dir: &Path) -> PathBuf {
        dir.join(format!("{}-images-idx3-ubyte", self.prefix()))
    }

    pub fn label_path(self, dir: &Path) -> PathBuf {
        dir.join(format!("{}-labels-idx1-ubyte", self.prefix()))
    }
}

fn be_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Data(format!("{what}: truncated header")))
}

/// Returns the image count and the raw pixel bytes.
pub fn parse_images(bytes: &[u8]) -> Result<(usize, &[u8])> {
    let magic = be_u32(bytes, 0, "image file")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Data(format!("image file: bad magic {magic:#010x}")));
    }
    let count = be_u32(bytes, 4, "image file")? as usize;
    let rows = be_u32(bytes, 8, "image file")? as usize;
    let cols = be_u32(bytes, 12, "image file")? as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(Error::Data(format!("image file: expected 28x28 images, found {rows}x{cols}")));
    }
    let body = &bytes[16..];
    if body.len() < count * IMAGE_PIXELS {
        return Err(Error::Data(format!(
            "image file: truncated, {count} images need {} bytes, found {}",
            count * IMAGE_PIXELS,
            body.len()
        )));
    }
    Ok((count, &body[..count * IMAGE_PIXELS]))
}

pub fn parse_labels(bytes: &[u8]) -> Result<&[u8]> {
    let magic = be_u32(bytes, 0, "label file")?;
    if magic != LABEL_MAGIC {
        return Err(Error::Data(format!("label file: bad magic {magic:#010x}")));
    }
    let count = be_u32(bytes, 4, "label file")? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(Error::Data(format!("label file: truncated, expected {count} labels")));
    }
    let labels = &body[..count];
    if let Some(bad) = labels.iter().find(|&&l| l as usize >= CLASSES) {
        return Err(Error::Data(format!("label file: label {bad} out of range")));
    }
    Ok(labels)
}

/// Number of samples taken for `fraction` of `count`: `⌈fraction·count⌉`.
pub fn subset_size(fraction: f64, count: usize) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    // Guard against 0.01 * 60000 = 600.0000000000001 rounding up.
    let exact = fraction * count as f64;
    let rounded = exact.round();
    let n = if (exact - rounded).abs() < 1e-9 { rounded } else { exact.ceil() };
    Ok((n as usize).min(count))
}

/// First `⌈fraction·count⌉` samples, pixels scaled by 0.1.
pub fn mnist_from_bytes(images: &[u8], labels: &[u8], fraction: f64) -> Result<Dataset> {
    let (count, pixels) = parse_images(images)?;
    let labels = parse_labels(labels)?;
    if labels.len() != count {
        return Err(Error::Data(format!("image file has {count} samples but label file has {}", labels.len())));
    }
    let n = subset_size(fraction, count)?;
    let inputs = pixels[..n * IMAGE_PIXELS].iter().map(|&b| b as f64 * PIXEL_SCALE).collect();
    let labels = labels[..n].iter().map(|&l| l as usize).collect();
    Ok(Dataset::classification(IMAGE_PIXELS, inputs, CLASSES, labels)?)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn load_mnist(images: &Path, labels: &Path, fraction: f64) -> Result<Dataset> {
    let data = mnist_from_bytes(&read(images)?, &read(labels)?, fraction)?;
    let name = format!(
        "mnist {} {fraction}",
        images.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    );
    Ok(data.with_name(name))
}

/// Loads one split from a directory holding the four standard file names.
pub fn load_split(dir: &Path, split: Split, fraction: f64) -> Result<Dataset> {
    load_mnist(&split.image_path(dir), &split.label_path(dir), fraction)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn idx_images(images: &[Vec<u8>]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend(IMAGE_MAGIC.to_be_bytes());
        out.extend((images.len() as u32).to_be_bytes());
        out.extend(28u32.to_be_bytes());
        out.extend(28u32.to_be_bytes());
        for img in images {
            out.extend(img);
        }
        out
    }

    pub fn idx_labels(labels: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend(LABEL_MAGIC.to_be_bytes());
        out.extend((labels.len() as u32).to_be_bytes());
        out.extend(labels);
        out
    }

    fn sample_files(n: usize) -> (Vec<u8>, Vec<u8>) {
        let images: Vec<Vec<u8>> = (0..n).map(|k| (0..IMAGE_PIXELS).map(|p| ((p + k) % 256) as u8).collect()).collect();
        let labels: Vec<u8> = (0..n).map(|k| (k % 10) as u8).collect();
        (idx_images(&images), idx_labels(&labels))
    }

    #[test]
    fn parses_and_rescales() {
        let (img, lbl) = sample_files(3);
        let d = mnist_from_bytes(&img, &lbl, 1.0).unwrap();
        assert_eq!((d.len(), d.input_dim(), d.output_dim()), (3, 784, 10));
        assert_eq!(d.labels().unwrap(), &[0, 1, 2]);
        assert_eq!(d.input(0)[255], 25.5);
        assert_eq!(d.input(1)[0], 0.1);
    }

    #[test]
    fn fraction_is_a_prefix() {
        assert_eq!(subset_size(0.01, 60000).unwrap(), 600);
        assert_eq!(subset_size(1.0, 60000).unwrap(), 60000);
        assert_eq!(subset_size(0.1, 60000).unwrap(), 6000);
        assert_eq!(subset_size(0.5, 3).unwrap(), 2);
        assert!(subset_size(0.0, 10).is_err());
        let (img, lbl) = sample_files(10);
        let small = mnist_from_bytes(&img, &lbl, 0.3).unwrap();
        let big = mnist_from_bytes(&img, &lbl, 0.7).unwrap();
        assert_eq!(small.len(), 3);
        for mu in 0..3 {
            assert_eq!(small.input(mu), big.input(mu));
        }
    }

    #[test]
    fn rejects_bad_files() {
        let (img, lbl) = sample_files(4);
        let mut bad = img.clone();
        bad[3] = 0x04;
        assert!(matches!(mnist_from_bytes(&bad, &lbl, 1.0), Err(Error::Data(m)) if m.contains("magic")));
        assert!(
            matches!(mnist_from_bytes(&img[..img.len() - 1], &lbl, 1.0), Err(Error::Data(m)) if m.contains("truncated"))
        );
        assert!(mnist_from_bytes(&img[..10], &lbl, 1.0).is_err());
        let (_, lbl3) = sample_files(3);
        assert!(matches!(mnist_from_bytes(&img, &lbl3, 1.0), Err(Error::Data(m)) if m.contains("label file has")));
        assert!(mnist_from_bytes(&lbl, &img, 1.0).is_err());
    }
}
