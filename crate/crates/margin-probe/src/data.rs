//! MNIST IDX ingestion: big-endian headers, optional gzip, byte/255
//! normalization, and indexed access to the train/test splits.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Raw images straight from an IDX file, one byte per pixel.
#[derive(Clone, Debug)]
pub struct RawImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

/// A normalized split: pixels in `[0, 1]` (exactly `byte / 255`), labels in
/// `0..=9`, plus an FNV-1a checksum of the source bytes for provenance.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub images: Tensor<f32>,
    pub labels: Vec<u8>,
    pub split: Split,
    pub source_checksum: u64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Borrowed view of one image as a `[1, rows, cols]` tensor.
    pub fn image(&self, index: usize) -> Result<Tensor<f32>> {
        let n = self.len();
        if index >= n {
            return Err(Error::Index { index, bound: n });
        }
        let shape = self.images.shape();
        let per = shape[1] * shape[2] * shape[3];
        Tensor::from_vec(
            vec![shape[1], shape[2], shape[3]],
            self.images.data()[index * per..(index + 1) * per].to_vec(),
        )
    }

    pub fn label(&self, index: usize) -> usize {
        self.labels[index] as usize
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Reads a file, transparently gunzipping when the gzip magic is present.
fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path)?.read_to_end(&mut raw)?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out)?;
        return Ok(out);
    }
    Ok(raw)
}

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(Error::Length { what: "idx header", expected: end, got: bytes.len() });
    }
    Ok(u32::from_be_bytes([bytes[offset], bytes[offset + 1], bytes[offset + 2], bytes[offset + 3]]))
}

/// Parses an IDX image file (magic `0x00000803`).
pub fn load_idx_images(path: impl AsRef<Path>) -> Result<RawImages> {
    let bytes = read_maybe_gz(path.as_ref())?;
    parse_idx_images(&bytes)
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<RawImages> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Format(format!(
            "image file magic is {magic:#010x}, expected {IMAGE_MAGIC:#010x}"
        )));
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let expected = 16 + count * rows * cols;
    if bytes.len() != expected {
        return Err(Error::Length { what: "idx image payload", expected, got: bytes.len() });
    }
    Ok(RawImages { count, rows, cols, pixels: bytes[16..].to_vec() })
}

/// Parses an IDX label file (magic `0x00000801`); labels must be 0..=9.
pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let bytes = read_maybe_gz(path.as_ref())?;
    parse_idx_labels(&bytes)
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::Format(format!(
            "label file magic is {magic:#010x}, expected {LABEL_MAGIC:#010x}"
        )));
    }
    let count = be_u32(bytes, 4)? as usize;
    let expected = 8 + count;
    if bytes.len() != expected {
        return Err(Error::Length { what: "idx label payload", expected, got: bytes.len() });
    }
    let labels = bytes[8..].to_vec();
    if let Some(pos) = labels.iter().position(|&l| l > 9) {
        return Err(Error::Value(format!("label byte {} at index {pos} is not a digit", labels[pos])));
    }
    Ok(labels)
}

/// Lifts raw bytes into a normalized dataset: `pixel = byte / 255`, images
/// shaped `[N, 1, rows, cols]`.
pub fn normalize(raw: &RawImages, labels: Vec<u8>, split: Split) -> Result<Dataset> {
    if raw.count != labels.len() {
        return Err(Error::Consistency(format!(
            "{} images but {} labels",
            raw.count,
            labels.len()
        )));
    }
    let data: Vec<f32> = raw.pixels.iter().map(|&b| b as f32 / 255.0).collect();
    let images = Tensor::from_vec(vec![raw.count, 1, raw.rows, raw.cols], data)?;
    let mut checksum_input = raw.pixels.clone();
    checksum_input.extend_from_slice(&labels);
    Ok(Dataset { images, labels, split, source_checksum: fnv1a(&checksum_input) })
}

/// Maps a normalized pixel back to its source byte.
pub fn denormalize(value: f32) -> u8 {
    (value * 255.0).round() as u8
}

fn find_file(dir: &Path, stems: &[&str]) -> Result<PathBuf> {
    for stem in stems {
        for ext in ["", ".gz"] {
            let candidate = dir.join(format!("{stem}{ext}"));
            if candidate.is_file() {
                return Ok(candidate);
            }
        }
    }
    Err(Error::Config(format!(
        "none of {:?} (optionally .gz) found in {}",
        stems,
        dir.display()
    )))
}

/// Loads one split from a directory holding the canonical MNIST file names
/// (`train-images-idx3-ubyte`, `t10k-labels-idx1-ubyte`, ... with optional
/// `.gz` suffix and either dash or dot before the `idx` token).
pub fn load_split(dir: impl AsRef<Path>, split: Split) -> Result<Dataset> {
    let dir = dir.as_ref();
    let (img_stems, lbl_stems): (&[&str], &[&str]) = match split {
        Split::Train => (
            &["train-images-idx3-ubyte", "train-images.idx3-ubyte"],
            &["train-labels-idx1-ubyte", "train-labels.idx1-ubyte"],
        ),
        Split::Test => (
            &["t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"],
            &["t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"],
        ),
    };
    let images = load_idx_images(find_file(dir, img_stems)?)?;
    let labels = load_idx_labels(find_file(dir, lbl_stems)?)?;
    normalize(&images, labels, split)
}
