//! Dataset ingestion, splitting, and synthetic data generation.
//!
//! Loaded datasets are immutable and freely shareable. Loaders are
//! deterministic: byte-identical inputs produce bit-identical datasets.

mod cifar;
mod idx;

pub use cifar::{load_cifar, load_cifar_test, load_cifar_train, CifarVariant};
pub use idx::load_idx;

use crate::error::{Error, Result};
use crate::tensor::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Feature rows with class labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub class_count: usize,
    pub name: String,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, class_count: usize, name: &str) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= class_count) {
            return Err(Error::Data(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        Ok(Self {
            features,
            labels,
            class_count,
            name: name.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    /// Row subset in the given index order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let dim = self.feature_dim();
        let mut data = Vec::with_capacity(indices.len() * dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.features.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features: Matrix::new(indices.len(), dim, data).expect("consistent dims"),
            labels,
            class_count: self.class_count,
            name: self.name.clone(),
        }
    }

    /// Contiguous batch `[start, end)` as a feature matrix plus labels.
    pub fn batch(&self, start: usize, end: usize) -> (Matrix, &[usize]) {
        let dim = self.feature_dim();
        let rows = end - start;
        let mut data = Vec::with_capacity(rows * dim);
        for i in start..end {
            data.extend_from_slice(self.features.row(i));
        }
        (
            Matrix::new(rows, dim, data).expect("consistent dims"),
            &self.labels[start..end],
        )
    }
}

/// Train/validation/test fractions and the permutation seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_frac: 0.8,
            val_frac: 0.1,
            test_frac: 0.1,
            seed: 17,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("train_frac", self.train_frac),
            ("val_frac", self.val_frac),
            ("test_frac", self.test_frac),
        ] {
            if !(f > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {f}")));
            }
        }
        let sum = self.train_frac + self.val_frac + self.test_frac;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "split fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

/// Seeded-permutation split into disjoint, exhaustive train/val/test parts.
/// Validation and test sizes are `floor(frac * n)`; the remainder goes to
/// train. Any empty part is a config error.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    spec.validate()?;
    let n = ds.len();
    let n_val = (spec.val_frac * n as f64).floor() as usize;
    let n_test = (spec.test_frac * n as f64).floor() as usize;
    let n_train = n - n_val - n_test;
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::Config(format!(
            "split of {n} samples produces an empty part ({n_train}/{n_val}/{n_test})"
        )));
    }

    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }

    let train = ds.select(&perm[..n_train]);
    let val = ds.select(&perm[n_train..n_train + n_val]);
    let test = ds.select(&perm[n_train + n_val..]);
    Ok((train, val, test))
}

/// Gaussian blobs: one isotropic cluster (sigma 0.5) per class, centered at
/// a seeded random unit-norm mean. Deterministic per seed; rows are ordered
/// class-major.
pub fn synthetic_gaussian(
    classes: usize,
    samples_per_class: usize,
    dim: usize,
    seed: u64,
) -> Result<Dataset> {
    if classes == 0 || samples_per_class == 0 || dim == 0 {
        return Err(Error::Config(
            "synthetic dataset needs positive classes, samples, and dim".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut data = Vec::with_capacity(classes * samples_per_class * dim);
    let mut labels = Vec::with_capacity(classes * samples_per_class);
    for c in 0..classes {
        let mut mean: Vec<f64> = (0..dim).map(|_| normal.sample(&mut rng)).collect();
        let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        for m in &mut mean {
            *m /= norm;
        }
        for _ in 0..samples_per_class {
            for m in &mean {
                let noise: f64 = normal.sample(&mut rng);
                data.push(m + 0.5 * noise);
            }
            labels.push(c);
        }
    }
    Dataset::new(
        Matrix::new(classes * samples_per_class, dim, data)?,
        labels,
        classes,
        "synthetic",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn synthetic_shape_and_determinism() {
        let a = synthetic_gaussian(3, 10, 8, 1).unwrap();
        assert_eq!(a.len(), 30);
        assert_eq!(a.feature_dim(), 8);
        assert_eq!(a.class_count, 3);
        assert!(a.labels.iter().all(|&y| y < 3));
        let b = synthetic_gaussian(3, 10, 8, 1).unwrap();
        assert_eq!(a.features.as_slice(), b.features.as_slice());
        assert_eq!(a.labels, b.labels);
        let c = synthetic_gaussian(3, 10, 8, 2).unwrap();
        assert_ne!(a.features.as_slice(), c.features.as_slice());
    }

    #[test]
    fn split_sizes_80_10_10() {
        let ds = synthetic_gaussian(2, 50, 4, 0).unwrap();
        let (train, val, test) = split(&ds, &SplitSpec::default()).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (80, 10, 10));

        let tiny = synthetic_gaussian(2, 5, 4, 0).unwrap();
        let (train, val, test) = split(&tiny, &SplitSpec::default()).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (8, 1, 1));
    }

    #[test]
    fn split_rejects_empty_parts_and_bad_fractions() {
        let ds = synthetic_gaussian(2, 3, 4, 0).unwrap(); // n = 6
        let spec = SplitSpec {
            train_frac: 0.9,
            val_frac: 0.05,
            test_frac: 0.05,
            seed: 0,
        };
        assert!(split(&ds, &spec).is_err()); // floor(0.05*6) = 0

        let bad = SplitSpec {
            train_frac: 0.5,
            val_frac: 0.2,
            test_frac: 0.2,
            seed: 0,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn split_determinism() {
        let ds = synthetic_gaussian(3, 20, 5, 9).unwrap();
        let spec = SplitSpec::default();
        let (a, _, _) = split(&ds, &spec).unwrap();
        let (b, _, _) = split(&ds, &spec).unwrap();
        assert_eq!(a.features.as_slice(), b.features.as_slice());
        assert_eq!(a.labels, b.labels);
    }

    proptest! {
        #[test]
        fn split_is_a_partition(n_per in 4usize..40, seed in 0u64..100) {
            let ds = synthetic_gaussian(3, n_per, 2, seed).unwrap();
            let spec = SplitSpec { seed, ..Default::default() };
            let (train, val, test) = split(&ds, &spec).unwrap();
            prop_assert_eq!(train.len() + val.len() + test.len(), ds.len());

            // Feature rows are distinguishable with overwhelming probability,
            // so recover indices by matching rows.
            let key = |m: &Matrix, i: usize| {
                m.row(i).iter().map(|x| x.to_bits()).collect::<Vec<u64>>()
            };
            let mut seen = std::collections::HashSet::new();
            for part in [&train, &val, &test] {
                for i in 0..part.len() {
                    prop_assert!(seen.insert(key(&part.features, i)), "duplicate row across splits");
                }
            }
            for i in 0..ds.len() {
                prop_assert!(seen.contains(&key(&ds.features, i)), "row {i} lost by split");
            }
        }
    }
}
