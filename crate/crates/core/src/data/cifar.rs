//! CIFAR binary batch loader.
//!
//! CIFAR-10 records are `1 label byte + 3072 pixel bytes`; CIFAR-100 records
//! are `coarse byte + fine byte + 3072` (the fine label is used). Pixels are
//! channel-planar (1024 red, 1024 green, 1024 blue), scaled to `[0, 1]` and
//! then channel-normalized with the standard per-dataset constants.

use super::Dataset;
use crate::error::{Error, Result};
use crate::tensor::Matrix;
use std::fs;
use std::path::Path;

pub const CIFAR10_MEAN: [f64; 3] = [0.4914, 0.4822, 0.4465];
pub const CIFAR10_STD: [f64; 3] = [0.2023, 0.1994, 0.2010];
pub const CIFAR100_MEAN: [f64; 3] = [0.5071, 0.4867, 0.4408];
pub const CIFAR100_STD: [f64; 3] = [0.2675, 0.2565, 0.2761];

const PIXELS: usize = 3072;
const CHANNEL: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CifarVariant {
    C10,
    C100,
}

impl CifarVariant {
    fn record_len(self) -> usize {
        match self {
            CifarVariant::C10 => 1 + PIXELS,
            CifarVariant::C100 => 2 + PIXELS,
        }
    }

    fn class_count(self) -> usize {
        match self {
            CifarVariant::C10 => 10,
            CifarVariant::C100 => 100,
        }
    }

    fn stats(self) -> ([f64; 3], [f64; 3]) {
        match self {
            CifarVariant::C10 => (CIFAR10_MEAN, CIFAR10_STD),
            CifarVariant::C100 => (CIFAR100_MEAN, CIFAR100_STD),
        }
    }

    fn train_files(self) -> Vec<&'static str> {
        match self {
            CifarVariant::C10 => vec![
                "data_batch_1.bin",
                "data_batch_2.bin",
                "data_batch_3.bin",
                "data_batch_4.bin",
                "data_batch_5.bin",
            ],
            CifarVariant::C100 => vec!["train.bin"],
        }
    }

    fn test_file(self) -> &'static str {
        match self {
            CifarVariant::C10 => "test_batch.bin",
            CifarVariant::C100 => "test.bin",
        }
    }

    fn name(self) -> &'static str {
        match self {
            CifarVariant::C10 => "cifar10",
            CifarVariant::C100 => "cifar100",
        }
    }
}

/// Parses one batch file, appending normalized rows and labels.
fn load_file(
    path: &Path,
    variant: CifarVariant,
    data: &mut Vec<f64>,
    labels: &mut Vec<usize>,
) -> Result<usize> {
    let bytes = fs::read(path).map_err(|e| Error::Ingestion {
        path: path.display().to_string(),
        offset: 0,
        reason: e.to_string(),
    })?;
    let record = variant.record_len();
    if bytes.is_empty() || bytes.len() % record != 0 {
        return Err(Error::Ingestion {
            path: path.display().to_string(),
            offset: (bytes.len() / record * record) as u64,
            reason: format!(
                "file length {} is not a multiple of the {record}-byte record",
                bytes.len()
            ),
        });
    }
    let (mean, std) = variant.stats();
    let count = bytes.len() / record;
    data.reserve(count * PIXELS);
    labels.reserve(count);
    for r in 0..count {
        let rec = &bytes[r * record..(r + 1) * record];
        let label = match variant {
            CifarVariant::C10 => rec[0] as usize,
            CifarVariant::C100 => rec[1] as usize, // fine label
        };
        if label >= variant.class_count() {
            return Err(Error::Ingestion {
                path: path.display().to_string(),
                offset: (r * record) as u64,
                reason: format!("label {label} out of range"),
            });
        }
        labels.push(label);
        let pixels = &rec[record - PIXELS..];
        for (p, &byte) in pixels.iter().enumerate() {
            let ch = p / CHANNEL;
            data.push((byte as f64 / 255.0 - mean[ch]) / std[ch]);
        }
    }
    Ok(count)
}

fn assemble(
    dir: &Path,
    variant: CifarVariant,
    files: &[&str],
    suffix: &str,
) -> Result<Dataset> {
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for file in files {
        load_file(&dir.join(file), variant, &mut data, &mut labels)?;
    }
    let rows = labels.len();
    Dataset::new(
        Matrix::new(rows, PIXELS, data)?,
        labels,
        variant.class_count(),
        &format!("{}{suffix}", variant.name()),
    )
}

/// Loads the official train partition (50,000 rows).
pub fn load_cifar_train(dir: impl AsRef<Path>, variant: CifarVariant) -> Result<Dataset> {
    assemble(dir.as_ref(), variant, &variant.train_files(), "-train")
}

/// Loads the official test partition (10,000 rows).
pub fn load_cifar_test(dir: impl AsRef<Path>, variant: CifarVariant) -> Result<Dataset> {
    assemble(dir.as_ref(), variant, &[variant.test_file()], "-test")
}

/// Loads the full dataset (60,000 rows): train batches in order, then the
/// test batch.
pub fn load_cifar(dir: impl AsRef<Path>, variant: CifarVariant) -> Result<Dataset> {
    let mut files = variant.train_files();
    files.push(variant.test_file());
    assemble(dir.as_ref(), variant, &files, "")
}
