//! IDX containers (the MNIST file format): big-endian headers, `u8` payload.

use std::fs;
use std::path::Path;

use super::{Examples, ImageSet};
use crate::binio::ByteReader;
use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

/// Parses an image/label file pair. Pixels are scaled to `[0, 1]`.
pub fn parse_idx(images: &[u8], labels: &[u8]) -> Result<ImageSet> {
    let mut r = ByteReader::new(images, "IDX images");
    let magic = r.u32_be()?;
    if magic != IMAGES_MAGIC {
        return Err(Error::BadMagic {
            expected: IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = r.u32_be()? as usize;
    let rows = r.u32_be()? as usize;
    let cols = r.u32_be()? as usize;
    let pixels = r.take(count * rows * cols)?;

    let mut l = ByteReader::new(labels, "IDX labels");
    let magic = l.u32_be()?;
    if magic != LABELS_MAGIC {
        return Err(Error::BadMagic {
            expected: LABELS_MAGIC,
            found: magic,
        });
    }
    let label_count = l.u32_be()? as usize;
    if label_count != count {
        return Err(Error::CountMismatch {
            images: count,
            labels: label_count,
        });
    }
    let label_bytes = l.take(count)?;

    let dim = rows * cols;
    let features = if dim == 0 {
        vec![Vec::new(); count]
    } else {
        pixels
            .chunks_exact(dim)
            .map(|px| px.iter().map(|&p| f32::from(p) / 255.0).collect())
            .collect()
    };
    Ok(ImageSet {
        rows,
        cols,
        examples: Examples {
            features,
            labels: label_bytes.iter().map(|&b| usize::from(b)).collect(),
        },
    })
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<ImageSet> {
    parse_idx(&read(images_path)?, &read(labels_path)?)
}

/// Encodes an image set back into the IDX byte layout (pixels rounded from
/// `[0, 1]` to `u8`). Returns `(images, labels)`.
pub fn encode_idx(set: &ImageSet) -> (Vec<u8>, Vec<u8>) {
    let n = set.examples.len() as u32;
    let mut images = Vec::new();
    for v in [IMAGES_MAGIC, n, set.rows as u32, set.cols as u32] {
        images.extend_from_slice(&v.to_be_bytes());
    }
    for x in &set.examples.features {
        images.extend(x.iter().map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8));
    }
    let mut labels = Vec::new();
    for v in [LABELS_MAGIC, n] {
        labels.extend_from_slice(&v.to_be_bytes());
    }
    labels.extend(set.examples.labels.iter().map(|&y| y as u8));
    (images, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ImageSet {
        ImageSet {
            rows: 2,
            cols: 3,
            examples: Examples {
                features: vec![
                    vec![0.0, 1.0, 0.2, 0.4, 0.6, 0.8],
                    vec![1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                ],
                labels: vec![7, 2],
            },
        }
    }

    #[test]
    fn valid_pair_parses() {
        let (img, lab) = encode_idx(&sample());
        let set = parse_idx(&img, &lab).unwrap();
        assert_eq!((set.rows, set.cols), (2, 3));
        assert_eq!(set.examples.len(), 2);
        assert_eq!(set.examples.features[0].len(), 6);
        assert_eq!(set.examples.labels, vec![7, 2]);
        assert_eq!(set.examples.features[1], vec![1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((set.examples.features[0][2] - 51.0 / 255.0).abs() < 1e-7);
    }

    #[test]
    fn wrong_magic() {
        let (mut img, lab) = encode_idx(&sample());
        img[3] = 0x01;
        assert!(matches!(
            parse_idx(&img, &lab),
            Err(Error::BadMagic { expected: IMAGES_MAGIC, found: 0x0801 })
        ));
        let (img, mut lab) = encode_idx(&sample());
        lab[3] = 0x03;
        assert!(matches!(parse_idx(&img, &lab), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn truncated_reports_offset() {
        let (img, lab) = encode_idx(&sample());
        let err = parse_idx(&img[..20], &lab).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("byte offset 20"), "{err}");
    }

    #[test]
    fn count_mismatch() {
        let (img, mut lab) = encode_idx(&sample());
        lab[7] = 3;
        lab.push(0);
        assert!(matches!(
            parse_idx(&img, &lab),
            Err(Error::CountMismatch { images: 2, labels: 3 })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_idx(Path::new("/nonexistent/a"), Path::new("/nonexistent/b")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
