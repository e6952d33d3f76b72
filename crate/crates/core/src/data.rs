//! Dataset ingestion: the Digits CSV export and MNIST IDX files.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::sampling::{derive_seed, rng_from_seed};

pub const DIGITS_PIXELS: usize = 64;
pub const MNIST_PIXELS: usize = 784;
pub const CLASSES: usize = 10;
pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;

/// Flattened images (row-major `n × pixels`) with labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageSet {
    pub pixels: usize,
    pub images: Vec<f64>,
    pub labels: Vec<usize>,
}

impl ImageSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[f64] {
        &self.images[i * self.pixels..(i + 1) * self.pixels]
    }

    pub fn select(&self, indices: &[usize]) -> ImageSet {
        let mut images = Vec::with_capacity(indices.len() * self.pixels);
        for &i in indices {
            images.extend_from_slice(self.image(i));
        }
        ImageSet {
            pixels: self.pixels,
            images,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub train: ImageSet,
    pub test: ImageSet,
}

/// Reads a headerless (or auto-detected header) CSV of 64 pixel values then a label.
pub fn load_digits(path: impl AsRef<Path>) -> Result<ImageSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut images = Vec::new();
    let mut labels = Vec::new();
    let columns = DIGITS_PIXELS + 1;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if labels.is_empty() && images.is_empty() && fields[0].parse::<f64>().is_err() {
            // Header row.
            if fields.len() != columns {
                return Err(format_error(path, "header", format!("expected {columns} columns, found {}", fields.len())));
            }
            continue;
        }
        if fields.len() != columns {
            return Err(format_error(
                path,
                &format!("line {line_no}"),
                format!("expected {columns} columns, found {}", fields.len()),
            ));
        }
        for f in &fields[..DIGITS_PIXELS] {
            let v: f64 = f.parse().map_err(|e| Error::Parse {
                path: path.into(),
                line: line_no,
                reason: format!("pixel `{f}`: {e}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.into(),
                    line: line_no,
                    reason: format!("non-finite pixel `{f}`"),
                });
            }
            images.push(v);
        }
        let label_field = fields[DIGITS_PIXELS];
        let label: i64 = label_field.parse().map_err(|e| Error::Parse {
            path: path.into(),
            line: line_no,
            reason: format!("label `{label_field}`: {e}"),
        })?;
        if !(0..CLASSES as i64).contains(&label) {
            return Err(Error::Validation(format!(
                "{}:{line_no}: label {label} outside 0..={}",
                path.display(),
                CLASSES - 1
            )));
        }
        labels.push(label as usize);
    }
    if labels.is_empty() {
        return Err(format_error(path, "rows", "file contains no samples".into()));
    }
    Ok(ImageSet {
        pixels: DIGITS_PIXELS,
        images,
        labels,
    })
}

fn format_error(path: &Path, field: &str, reason: String) -> Error {
    Error::Format {
        path: path.into(),
        field: field.into(),
        reason,
    }
}

/// Reads a file, transparently inflating gzip content.
fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out).map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path, field: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| format_error(path, field, "truncated header".into()))
}

/// Parses an IDX3 image file: magic 2051, count, rows, cols, then unsigned bytes.
pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<(usize, usize, usize, Vec<f64>)> {
    let magic = be_u32(bytes, 0, path, "magic")?;
    if magic != IMAGE_MAGIC {
        return Err(format_error(path, "magic", format!("expected {IMAGE_MAGIC}, found {magic}")));
    }
    let count = be_u32(bytes, 4, path, "count")? as usize;
    let rows = be_u32(bytes, 8, path, "rows")? as usize;
    let cols = be_u32(bytes, 12, path, "cols")? as usize;
    let payload = &bytes[16..];
    let expected = count * rows * cols;
    if payload.len() < expected {
        return Err(format_error(
            path,
            "payload",
            format!("truncated: expected {expected} pixel bytes, found {}", payload.len()),
        ));
    }
    let pixels = payload[..expected].iter().map(|&b| f64::from(b) / 255.0).collect();
    Ok((count, rows, cols, pixels))
}

/// Parses an IDX1 label file: magic 2049, count, then unsigned bytes.
pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<usize>> {
    let magic = be_u32(bytes, 0, path, "magic")?;
    if magic != LABEL_MAGIC {
        return Err(format_error(path, "magic", format!("expected {LABEL_MAGIC}, found {magic}")));
    }
    let count = be_u32(bytes, 4, path, "count")? as usize;
    let payload = &bytes[8..];
    if payload.len() < count {
        return Err(format_error(
            path,
            "payload",
            format!("truncated: expected {count} labels, found {}", payload.len()),
        ));
    }
    let labels: Vec<usize> = payload[..count].iter().map(|&b| b as usize).collect();
    if let Some(l) = labels.iter().find(|&&l| l >= CLASSES) {
        return Err(Error::Validation(format!("{}: label {l} outside 0..=9", path.display())));
    }
    Ok(labels)
}

/// Loads one pair of IDX files (optionally gzip-compressed) with pixels scaled to `[0, 1]`.
pub fn load_mnist(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<ImageSet> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let (count, rows, cols, images) = parse_idx_images(&read_maybe_gzip(images_path)?, images_path)?;
    let labels = parse_idx_labels(&read_maybe_gzip(labels_path)?, labels_path)?;
    if labels.len() != count {
        return Err(format_error(
            labels_path,
            "count",
            format!("{} labels for {count} images", labels.len()),
        ));
    }
    Ok(ImageSet {
        pixels: rows * cols,
        images,
        labels,
    })
}

fn locate(dir: &Path, stem: &str) -> Result<PathBuf> {
    for candidate in [dir.join(stem), dir.join(format!("{stem}.gz"))] {
        if candidate.exists() {
            return Ok(candidate);
        }
    }
    Err(Error::io(
        dir.join(stem),
        std::io::Error::new(std::io::ErrorKind::NotFound, "MNIST file not found"),
    ))
}

/// Loads the standard 60,000/10,000 split from a directory of IDX files.
pub fn load_mnist_dir(dir: impl AsRef<Path>) -> Result<Split> {
    let dir = dir.as_ref();
    Ok(Split {
        train: load_mnist(locate(dir, "train-images-idx3-ubyte")?, locate(dir, "train-labels-idx1-ubyte")?)?,
        test: load_mnist(locate(dir, "t10k-images-idx3-ubyte")?, locate(dir, "t10k-labels-idx1-ubyte")?)?,
    })
}

/// Seeded shuffle into disjoint train/test index sets.
pub fn train_test_split(n: usize, n_train: usize, n_test: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n_train + n_test > n {
        return Err(Error::Config(format!(
            "split {n_train}+{n_test} exceeds {n} available samples"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(derive_seed(seed, &[0x5e1d])));
    let test = order[n_train..n_train + n_test].to_vec();
    order.truncate(n_train);
    Ok((order, test))
}

pub fn split_images(set: &ImageSet, n_train: usize, n_test: usize, seed: u64) -> Result<Split> {
    let (train, test) = train_test_split(set.len(), n_train, n_test, seed)?;
    Ok(Split {
        train: set.select(&train),
        test: set.select(&test),
    })
}

/// Seeded class-stratified subset of size `n`, returned in ascending index order.
///
/// Each class receives its proportional share, with leftover slots going to the
/// classes with the largest fractional remainders (lowest label on ties).
pub fn stratified_subsample(labels: &[usize], n: usize, seed: u64) -> Result<Vec<usize>> {
    if n > labels.len() {
        return Err(Error::Config(format!("cannot subsample {n} of {} samples", labels.len())));
    }
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let total = labels.len();
    let mut quota: Vec<usize> = by_class.iter().map(|c| c.len() * n / total).collect();
    let mut remainders: Vec<(usize, usize)> = by_class
        .iter()
        .enumerate()
        .map(|(k, c)| ((c.len() * n) % total, k))
        .collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut missing = n - quota.iter().sum::<usize>();
    for &(_, k) in &remainders {
        if missing == 0 {
            break;
        }
        if quota[k] < by_class[k].len() {
            quota[k] += 1;
            missing -= 1;
        }
    }
    let mut chosen = Vec::with_capacity(n);
    for (k, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng_from_seed(derive_seed(seed, &[0x57a7, k as u64])));
        chosen.extend_from_slice(&members[..quota[k]]);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn digits_line(label: i64) -> String {
        let mut fields: Vec<String> = (0..64).map(|i| (i % 17).to_string()).collect();
        fields.push(label.to_string());
        fields.join(",")
    }

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn digits_rows_and_header() {
        let body: Vec<String> = (0..5).map(|i| digits_line(i % 10)).collect();
        let f = write_tmp(&body.join("\n"));
        let set = load_digits(f.path()).unwrap();
        assert_eq!(set.len(), 5);
        assert_eq!(set.image(0).len(), 64);

        let header: Vec<String> = (0..64).map(|i| format!("p{i}")).chain(["label".into()]).collect();
        let f = write_tmp(&format!("{}\n{}\n", header.join(","), digits_line(3)));
        assert_eq!(load_digits(f.path()).unwrap().labels, vec![3]);
    }

    #[test]
    fn digits_errors() {
        let f = write_tmp("");
        assert!(matches!(load_digits(f.path()), Err(Error::Format { .. })));
        let f = write_tmp(&digits_line(10));
        assert!(matches!(load_digits(f.path()), Err(Error::Validation(_))));
        let f = write_tmp(&format!("{}\n1,2,3\n", digits_line(1)));
        match load_digits(f.path()) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "line 2"),
            other => panic!("{other:?}"),
        }
        let bad = digits_line(1).replacen('0', "x", 1);
        let f = write_tmp(&format!("{}\n{bad}\n", digits_line(1)));
        assert!(matches!(load_digits(f.path()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn digits_standard_split_sizes() {
        let (train, test) = train_test_split(1797, 1347, 450, 0).unwrap();
        assert_eq!((train.len(), test.len()), (1347, 450));
        let mut all: Vec<_> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 1797);
        assert!(train_test_split(10, 8, 3, 0).is_err());
    }

    fn idx_images(magic: u32, count: u32, rows: u32, cols: u32, payload: usize) -> Vec<u8> {
        let mut v = Vec::new();
        for x in [magic, count, rows, cols] {
            v.extend_from_slice(&x.to_be_bytes());
        }
        v.extend((0..payload).map(|i| (i % 256) as u8));
        v
    }

    #[test]
    fn idx_header_accepted() {
        let bytes = idx_images(IMAGE_MAGIC, 2, 28, 28, 2 * 784);
        let (count, rows, cols, px) = parse_idx_images(&bytes, Path::new("img")).unwrap();
        assert_eq!((count, rows, cols), (2, 28, 28));
        assert_eq!(px[255], 1.0);
        assert!(px.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn idx_errors_name_field() {
        let swapped = idx_images(LABEL_MAGIC, 2, 28, 28, 2 * 784);
        match parse_idx_images(&swapped, Path::new("img")) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "magic"),
            other => panic!("{other:?}"),
        }
        let short = idx_images(IMAGE_MAGIC, 2, 28, 28, 100);
        match parse_idx_images(&short, Path::new("img")) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "payload"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mnist_count_mismatch_and_gzip() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("img");
        fs::write(&img, idx_images(IMAGE_MAGIC, 3, 2, 2, 12)).unwrap();
        let mut labels = Vec::new();
        labels.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
        labels.extend_from_slice(&2u32.to_be_bytes());
        labels.extend_from_slice(&[1, 2]);
        let lab = dir.path().join("lab.gz");
        let mut gz = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        gz.write_all(&labels).unwrap();
        fs::write(&lab, gz.finish().unwrap()).unwrap();
        match load_mnist(&img, &lab) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "count"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stratified_subsample_is_deterministic_and_balanced() {
        let labels: Vec<usize> = (0..1000).map(|i| i % 10).collect();
        let a = stratified_subsample(&labels, 100, 7).unwrap();
        let b = stratified_subsample(&labels, 100, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        for k in 0..10 {
            assert_eq!(a.iter().filter(|&&i| labels[i] == k).count(), 10);
        }
        assert_ne!(a, stratified_subsample(&labels, 100, 8).unwrap());
    }

    #[test]
    fn stratified_subsample_uneven_classes() {
        let labels: Vec<usize> = (0..97).map(|i| usize::from(i % 3 == 0)).collect();
        let s = stratified_subsample(&labels, 50, 1).unwrap();
        assert_eq!(s.len(), 50);
    }
}
