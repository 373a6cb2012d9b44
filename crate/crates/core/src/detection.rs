//! Dead-neuron detection from forward-pass activation sums.
//!
//! A ledger keeps one running sum of post-activation outputs per hidden
//! neuron over an evaluation pass. A rectifier neuron whose total is zero
//! never fired on any sample and is classified dead; a small positive
//! threshold relaxes this to "mostly dead". Gradient-based detection is
//! deliberately not offered: a zero gradient cannot distinguish a dead
//! neuron from a frozen one.

use crate::error::{Error, Result};
use crate::network::{DenseNetwork, ForwardTrace};
use serde::{Deserialize, Serialize};

/// Which split the detection pass ran over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionSource {
    ValidationSet,
    TrainingSet,
}

/// Running per-neuron activation sums for the hidden layers.
///
/// Accumulation is sequential with a fixed order, so streaming over batches
/// produces the same sums as a single concatenated pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationLedger {
    sums: Vec<Vec<f64>>,
    samples_seen: usize,
}

impl ActivationLedger {
    /// Fresh ledger sized to the network's hidden widths.
    pub fn new(net: &DenseNetwork) -> Self {
        let hidden = net.num_hidden_layers();
        Self {
            sums: net.layers()[..hidden]
                .iter()
                .map(|l| vec![0.0; l.fan_out()])
                .collect(),
            samples_seen: 0,
        }
    }

    pub fn samples_seen(&self) -> usize {
        self.samples_seen
    }

    /// Per-neuron sums for hidden layer `h`.
    pub fn layer_sums(&self, h: usize) -> &[f64] {
        &self.sums[h]
    }

    /// Adds every sample's post-activations from `trace` into the sums.
    pub fn accumulate(&mut self, trace: &ForwardTrace) -> Result<()> {
        if trace.post.len() != self.sums.len() + 1 {
            return Err(Error::Usage(format!(
                "trace has {} layers but ledger tracks {} hidden layers",
                trace.post.len(),
                self.sums.len()
            )));
        }
        for (h, sums) in self.sums.iter_mut().enumerate() {
            let post = &trace.post[h];
            if post.cols() != sums.len() {
                return Err(Error::shape(
                    "ledger accumulate",
                    (1, sums.len()),
                    post.shape(),
                ));
            }
            for row in 0..post.rows() {
                for (sum, &x) in sums.iter_mut().zip(post.row(row)) {
                    *sum += x;
                }
            }
        }
        self.samples_seen += trace.batch_size();
        Ok(())
    }

    /// Classifies neurons whose activation sum is `<= threshold` as dead.
    /// Only ReLU layers are inspected; other activations have no exact-zero
    /// plateau and yield empty dead sets.
    pub fn find_dead(
        &self,
        net: &DenseNetwork,
        threshold: f64,
        source: DetectionSource,
    ) -> Result<DeadSet> {
        if self.samples_seen == 0 {
            return Err(Error::Usage(
                "ledger was never populated; run an evaluation pass first".into(),
            ));
        }
        if threshold < 0.0 {
            return Err(Error::Config(format!(
                "detection threshold must be >= 0, got {threshold}"
            )));
        }
        let layers = self
            .sums
            .iter()
            .enumerate()
            .map(|(h, sums)| {
                if !net.layers()[h].activation.supports_dead_detection() {
                    return Vec::new();
                }
                sums.iter()
                    .enumerate()
                    .filter(|(_, &s)| s <= threshold)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Ok(DeadSet {
            layers,
            threshold,
            source,
        })
    }
}

/// Dead neuron indices per hidden layer, strictly increasing within a layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DeadSet {
    pub layers: Vec<Vec<usize>>,
    pub threshold: f64,
    pub source: DetectionSource,
}

impl DeadSet {
    /// Dead set with no entries, shaped for `net`.
    pub fn empty(net: &DenseNetwork, source: DetectionSource) -> Self {
        Self {
            layers: vec![Vec::new(); net.num_hidden_layers()],
            threshold: 0.0,
            source,
        }
    }

    /// Total dead neurons across all hidden layers.
    pub fn total(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn contains(&self, layer: usize, neuron: usize) -> bool {
        self.layers
            .get(layer)
            .is_some_and(|l| l.binary_search(&neuron).is_ok())
    }

    /// Checks indices against the network's hidden widths.
    pub fn validate(&self, net: &DenseNetwork) -> Result<()> {
        if self.layers.len() != net.num_hidden_layers() {
            return Err(Error::Usage(format!(
                "dead set covers {} layers but network has {} hidden layers",
                self.layers.len(),
                net.num_hidden_layers()
            )));
        }
        for (h, indices) in self.layers.iter().enumerate() {
            let width = net.layers()[h].fan_out();
            if indices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Usage(format!(
                    "dead indices in layer {h} are not strictly increasing"
                )));
            }
            if let Some(&bad) = indices.iter().find(|&&j| j >= width) {
                return Err(Error::Usage(format!(
                    "dead index {bad} out of range for layer {h} of width {width}"
                )));
            }
        }
        Ok(())
    }
}
