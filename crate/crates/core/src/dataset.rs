//! IDX image ingestion, support binarization, prior-parameter fitting and
//! synthetic Gauss-Bernoulli signals.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// IDX magic for unsigned-byte, rank-3 tensors.
pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;

/// Lower bound on the fitted slab variance.
pub const SIGMA2_FLOOR: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct ImageSet {
    /// `count × (rows·cols)`, pixel values in `[0, 1]`.
    pub images: Array2<f64>,
    pub rows: usize,
    pub cols: usize,
}

impl ImageSet {
    pub fn new(images: Array2<f64>, rows: usize, cols: usize) -> Result<Self> {
        Error::check_dim("image size (rows*cols)", rows * cols, images.ncols())?;
        if let Some(bad) = images.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid("pixel", format!("{bad} outside [0, 1]")));
        }
        Ok(Self { images, rows, cols })
    }

    pub fn count(&self) -> usize {
        self.images.nrows()
    }

    pub fn pixels(&self) -> usize {
        self.images.ncols()
    }

    /// The first `n` images (or all of them if fewer).
    pub fn head(&self, n: usize) -> ImageSet {
        let n = n.min(self.count());
        ImageSet {
            images: self.images.slice(s![..n, ..]).to_owned(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// Images `start..end`, clipped to the set.
    pub fn range(&self, start: usize, end: usize) -> ImageSet {
        let end = end.min(self.count());
        let start = start.min(end);
        ImageSet {
            images: self.images.slice(s![start..end, ..]).to_owned(),
            rows: self.rows,
            cols: self.cols,
        }
    }
}

fn read_u32_be(bytes: &[u8], offset: usize) -> Result<u32> {
    match bytes.get(offset..offset + 4) {
        Some(b) => Ok(u32::from_be_bytes(b.try_into().unwrap())),
        None => Err(Error::Truncated {
            offset: bytes.len(),
            needed: offset + 4 - bytes.len(),
        }),
    }
}

/// Parses an IDX image file (big-endian header, unsigned bytes scaled by
/// 1/255). Gzip-compressed input is detected by its magic bytes.
pub fn parse_idx(bytes: &[u8]) -> Result<ImageSet> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut raw = Vec::new();
        GzDecoder::new(bytes).read_to_end(&mut raw)?;
        return parse_idx(&raw);
    }
    let magic = read_u32_be(bytes, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::WrongMagic {
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = read_u32_be(bytes, 4)? as usize;
    let rows = read_u32_be(bytes, 8)? as usize;
    let cols = read_u32_be(bytes, 12)? as usize;
    let pixels = rows * cols;
    let payload = &bytes[16..];
    let needed = count * pixels;
    if payload.len() < needed {
        return Err(Error::Truncated {
            offset: bytes.len(),
            needed: needed - payload.len(),
        });
    }
    if payload.len() > needed {
        return Err(Error::TrailingBytes {
            offset: 16 + needed,
            extra: payload.len() - needed,
        });
    }
    let images = Array2::from_shape_fn((count, pixels), |(k, p)| f64::from(payload[k * pixels + p]) / 255.0);
    Ok(ImageSet { images, rows, cols })
}

/// Inverse of [`parse_idx`]; pixels are rounded to the nearest multiple of 1/255.
pub fn serialize_idx(set: &ImageSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + set.images.len());
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(set.count() as u32).to_be_bytes());
    out.extend_from_slice(&(set.rows as u32).to_be_bytes());
    out.extend_from_slice(&(set.cols as u32).to_be_bytes());
    out.extend(set.images.iter().map(|&p| (p * 255.0).round() as u8));
    out
}

pub fn load_idx(path: impl AsRef<Path>) -> Result<ImageSet> {
    parse_idx(&fs::read(path)?)
}

/// `1` where a pixel exceeds `threshold`, else `0`.
pub fn binarize(images: ArrayView2<f64>, threshold: f64) -> Array2<f64> {
    images.mapv(|p| if p > threshold { 1.0 } else { 0.0 })
}

/// Fraction of pixels above zero, per image.
pub fn image_sparsity(images: ArrayView2<f64>) -> Array1<f64> {
    binarize(images, 0.0).mean_axis(Axis(1)).unwrap_or_else(|| Array1::zeros(0))
}

/// Mean and (population) variance of all non-zero pixels, variance floored
/// at [`SIGMA2_FLOOR`].
pub fn fit_gb_params(images: ArrayView2<f64>) -> Result<(f64, f64)> {
    let (mut count, mut sum) = (0usize, 0.0);
    for &p in images.iter().filter(|&&p| p != 0.0) {
        count += 1;
        sum += p;
    }
    if count == 0 {
        return Err(Error::NoSupport);
    }
    let mu = sum / count as f64;
    let var = images
        .iter()
        .filter(|&&p| p != 0.0)
        .map(|&p| (p - mu) * (p - mu))
        .sum::<f64>()
        / count as f64;
    Ok((mu, var.max(SIGMA2_FLOOR)))
}

/// Each coordinate is zero with probability `1 - rho`, else `N(mu, sigma2)`.
pub fn synth_gb_signal<R: Rng + ?Sized>(n: usize, rho: f64, mu: f64, sigma2: f64, rng: &mut R) -> Result<Array1<f64>> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid("rho", format!("{rho} outside [0, 1]")));
    }
    let normal = Normal::new(mu, sigma2.sqrt())
        .map_err(|e| Error::invalid("sigma2", e.to_string()))?;
    Ok(Array1::from_shape_fn(n, |_| {
        let on = rng.random::<f64>() < rho;
        let value = normal.sample(rng);
        if on {
            value
        } else {
            0.0
        }
    }))
}

#[cfg(test)]
mod tests {
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn header(magic: u32, count: u32, rows: u32, cols: u32) -> Vec<u8> {
        [magic, count, rows, cols].iter().flat_map(|v| v.to_be_bytes()).collect()
    }

    #[test]
    fn label_file_is_wrong_magic() {
        let bytes = header(0x0000_0801, 1, 1, 1);
        let err = parse_idx(&bytes).unwrap_err();
        assert!(err.to_string().starts_with("wrong magic"), "{err}");
    }

    #[test]
    fn minimal_file() {
        let mut bytes = header(IDX_IMAGES_MAGIC, 1, 1, 1);
        bytes.push(255);
        let set = parse_idx(&bytes).unwrap();
        assert_eq!(set.images, array![[1.0]]);
    }

    #[test]
    fn truncated_payload_names_offset() {
        let mut bytes = header(IDX_IMAGES_MAGIC, 2, 2, 2);
        bytes.extend_from_slice(&[1, 2, 3]);
        let err = parse_idx(&bytes).unwrap_err();
        assert!(matches!(err, Error::Truncated { offset: 19, needed: 5 }), "{err}");
        let err = parse_idx(&bytes[..10]).unwrap_err();
        assert!(matches!(err, Error::Truncated { offset: 10, .. }), "{err}");
    }

    #[test]
    fn gzip_input_is_sniffed() {
        use std::io::Write;
        let mut raw = header(IDX_IMAGES_MAGIC, 2, 1, 2);
        raw.extend_from_slice(&[0, 51, 102, 255]);
        let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(&raw).unwrap();
        let gz = enc.finish().unwrap();
        assert_eq!(parse_idx(&gz).unwrap(), parse_idx(&raw).unwrap());
    }

    #[test]
    fn binarize_rules() {
        let img = array![[0.0, 0.003, 0.5, 1.0]];
        assert_eq!(binarize(img.view(), 0.0), array![[0.0, 1.0, 1.0, 1.0]]);
        assert_eq!(binarize(img.view(), 1.0), array![[0.0, 0.0, 0.0, 0.0]]);
        assert_eq!(image_sparsity(array![[0.0, 0.0]].view()), array![0.0]);
    }

    #[test]
    fn gb_params() {
        let (mu, s2) = fit_gb_params(array![[1.0, 0.0, 1.0]].view()).unwrap();
        assert_eq!((mu, s2), (1.0, SIGMA2_FLOOR));
        let (mu, s2) = fit_gb_params(array![[0.2, 0.0], [0.0, 0.8]].view()).unwrap();
        assert!((mu - 0.5).abs() < 1e-15);
        assert!((s2 - 0.09).abs() < 1e-15);
        assert!(matches!(fit_gb_params(array![[0.0]].view()), Err(Error::NoSupport)));
    }

    #[test]
    fn synthetic_signal_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(synth_gb_signal(100, 0.0, 1.0, 1.0, &mut rng).unwrap().iter().all(|&x| x == 0.0));
        let x = synth_gb_signal(100, 1.0, 0.7, 1e-12, &mut rng).unwrap();
        assert!(x.iter().all(|&v| (v - 0.7).abs() < 1e-5));
    }

    #[test]
    fn synthetic_support_fraction_concentrates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (n, rho) = (100_000, 0.1);
        let x = synth_gb_signal(n, rho, 0.0, 1.0, &mut rng).unwrap();
        let frac = x.iter().filter(|&&v| v != 0.0).count() as f64 / n as f64;
        assert!((frac - rho).abs() <= 3.0 * (rho * (1.0 - rho) / n as f64).sqrt(), "{frac}");
    }
}
