//! Synaptic stripping: pruning the most negative remaining incoming weights
//! of dead neurons so the survivors shift the weight distribution positive
//! and the neuron can fire again.
//!
//! Pruning is permanent: a mask entry never transitions back to 1. A pass
//! removes `ceil(fraction * remaining)` connections per dead neuron, so
//! progress is at least one connection per pass, and `min_remaining` keeps a
//! neuron from being fully severed.

use crate::detection::DeadSet;
use crate::error::{Error, Result};
use crate::network::DenseNetwork;
use serde::{Deserialize, Serialize};

/// How much and how often to strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrippingPolicy {
    /// Fraction of the remaining fan-in pruned per pass, in (0, 1].
    pub fraction: f64,
    /// Floor on the number of unmasked fan-in connections a neuron keeps.
    pub min_remaining: usize,
    /// Epochs between stripping passes.
    pub cadence: usize,
}

impl Default for StrippingPolicy {
    fn default() -> Self {
        Self {
            fraction: 0.10,
            min_remaining: 1,
            cadence: 1,
        }
    }
}

impl StrippingPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::Config(format!(
                "stripping fraction must lie in (0, 1], got {}",
                self.fraction
            )));
        }
        if self.cadence == 0 {
            return Err(Error::Config("stripping cadence must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-layer outcome of one stripping pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStripStats {
    pub layer: usize,
    /// Dead neuron indices this pass acted on.
    pub dead: Vec<usize>,
    /// Connections pruned in this pass.
    pub pruned: usize,
    /// Total mask-zero positions in the layer after this pass.
    pub cumulative_pruned: usize,
}

/// Record of one stripping pass across the network.
#[derive(Debug, Clone, PartialEq)]
pub struct StrippingReport {
    pub epoch: usize,
    pub layers: Vec<LayerStripStats>,
    pub pruned_this_pass: usize,
    pub cumulative_pruned: usize,
}

/// Prunes the most negative remaining incoming weights of every dead neuron.
///
/// For each dead neuron, `n = ceil(fraction * remaining)` unmasked fan-in
/// positions with the smallest weight values are masked off and zeroed,
/// capped so at least `min_remaining` connections survive. Ties on equal
/// weight break toward the lowest fan-in index. Neurons outside the dead
/// set are untouched. Callers maintaining Adam state should call
/// [`crate::optimizer::AdamState::zero_masked`] afterwards so pruned
/// positions carry no stale moments.
pub fn strip(
    net: &mut DenseNetwork,
    dead: &DeadSet,
    policy: &StrippingPolicy,
    epoch: usize,
) -> Result<StrippingReport> {
    policy.validate()?;
    dead.validate(net)?;
    for (h, indices) in dead.layers.iter().enumerate() {
        if !indices.is_empty() && !net.layers()[h].activation.supports_dead_detection() {
            return Err(Error::Usage(format!(
                "layer {h} has dead entries but its activation admits no dead state"
            )));
        }
    }

    let mut layers = Vec::with_capacity(dead.layers.len());
    let mut pass_total = 0;
    for (h, indices) in dead.layers.iter().enumerate() {
        let layer = &mut net.layers_mut()[h];
        let fan_in = layer.fan_in();
        let mut pruned_here = 0;
        for &j in indices {
            let remaining: Vec<usize> = (0..fan_in)
                .filter(|&i| layer.mask.get(i, j) != 0.0)
                .collect();
            if remaining.len() <= policy.min_remaining {
                continue;
            }
            // ceil with a tiny guard against fp overshoot on exact
            // multiples; fraction > 0 keeps the count at least 1.
            let quota = (policy.fraction * remaining.len() as f64 - 1e-9)
                .ceil()
                .max(1.0) as usize;
            let n = quota.min(remaining.len() - policy.min_remaining);

            let mut candidates: Vec<(f64, usize)> = remaining
                .iter()
                .map(|&i| (layer.weights.get(i, j), i))
                .collect();
            candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            for &(_, i) in candidates.iter().take(n) {
                layer.mask.set(i, j, 0.0);
                layer.weights.set(i, j, 0.0);
            }
            pruned_here += n;
        }
        pass_total += pruned_here;
        layers.push(LayerStripStats {
            layer: h,
            dead: indices.clone(),
            pruned: pruned_here,
            cumulative_pruned: net.layers()[h].pruned_count(),
        });
    }

    let cumulative = net.layers().iter().map(|l| l.pruned_count()).sum();
    Ok(StrippingReport {
        epoch,
        layers,
        pruned_this_pass: pass_total,
        cumulative_pruned: cumulative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::ActivationKind;
    use crate::detection::{ActivationLedger, DetectionSource};
    use crate::network::InitScheme;
    use crate::tensor::Matrix;

    fn single_neuron_net(fan_in_weights: &[f64]) -> DenseNetwork {
        let n = fan_in_weights.len();
        let mut net = DenseNetwork::init(
            &[n, 1, 2],
            ActivationKind::Relu,
            0,
            InitScheme::KaimingUniform,
        )
        .unwrap();
        net.layers_mut()[0].weights = Matrix::new(n, 1, fan_in_weights.to_vec()).unwrap();
        net
    }

    fn dead_at(net: &DenseNetwork, layer: usize, neurons: &[usize]) -> DeadSet {
        let mut dead = DeadSet::empty(net, DetectionSource::ValidationSet);
        dead.layers[layer] = neurons.to_vec();
        dead
    }

    fn unmasked_fan_in(net: &DenseNetwork, layer: usize, j: usize) -> Vec<(usize, f64)> {
        let l = &net.layers()[layer];
        (0..l.fan_in())
            .filter(|&i| l.mask.get(i, j) != 0.0)
            .map(|i| (i, l.weights.get(i, j)))
            .collect()
    }

    #[test]
    fn ten_percent_of_ten_prunes_the_single_most_negative() {
        let mut net =
            single_neuron_net(&[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let dead = dead_at(&net, 0, &[0]);
        let policy = StrippingPolicy::default();

        let report = strip(&mut net, &dead, &policy, 0).unwrap();
        assert_eq!(report.pruned_this_pass, 1);
        assert_eq!(net.layers()[0].mask.get(0, 0), 0.0);
        assert_eq!(net.layers()[0].weights.get(0, 0), 0.0);

        // Next pass: ceil(0.1 * 9) = 1 more, the -2 entry.
        let report = strip(&mut net, &dead, &policy, 1).unwrap();
        assert_eq!(report.pruned_this_pass, 1);
        assert_eq!(net.layers()[0].mask.get(1, 0), 0.0);
        assert_eq!(report.cumulative_pruned, 2);
        assert_eq!(unmasked_fan_in(&net, 0, 0).len(), 8);
    }

    #[test]
    fn empty_dead_set_is_identity() {
        let mut net = single_neuron_net(&[-1.0, 2.0, -3.0]);
        let before = net.clone();
        let report = strip(
            &mut net,
            &DeadSet::empty(&net, DetectionSource::ValidationSet),
            &StrippingPolicy::default(),
            3,
        )
        .unwrap();
        assert_eq!(net, before);
        assert_eq!(report.pruned_this_pass, 0);
        assert_eq!(report.cumulative_pruned, 0);
    }

    #[test]
    fn ties_break_toward_lowest_fan_in_index() {
        let mut net = single_neuron_net(&[-1.0, -1.0, -1.0, 0.5]);
        let dead = dead_at(&net, 0, &[0]);
        let policy = StrippingPolicy {
            fraction: 0.25,
            ..Default::default()
        };
        strip(&mut net, &dead, &policy, 0).unwrap();
        assert_eq!(net.layers()[0].mask.get(0, 0), 0.0);
        assert_eq!(net.layers()[0].mask.get(1, 0), 1.0);
    }

    #[test]
    fn min_remaining_floors_the_fan_in() {
        let mut net = single_neuron_net(&[-5.0, -4.0, -3.0]);
        let dead = dead_at(&net, 0, &[0]);
        let policy = StrippingPolicy {
            fraction: 1.0,
            min_remaining: 1,
            cadence: 1,
        };
        strip(&mut net, &dead, &policy, 0).unwrap();
        let left = unmasked_fan_in(&net, 0, 0);
        assert_eq!(left, vec![(2, -3.0)]);

        // Already at the floor: further passes are no-ops.
        let report = strip(&mut net, &dead, &policy, 1).unwrap();
        assert_eq!(report.pruned_this_pass, 0);
        assert_eq!(unmasked_fan_in(&net, 0, 0), vec![(2, -3.0)]);
    }

    #[test]
    fn remaining_mean_never_decreases() {
        let mut net = single_neuron_net(&[-9.0, -3.0, -0.5, 0.2, 1.0, -2.2, 4.0, -1.1]);
        let dead = dead_at(&net, 0, &[0]);
        let policy = StrippingPolicy {
            fraction: 0.2,
            ..Default::default()
        };
        let mean = |net: &DenseNetwork| {
            let vals: Vec<f64> = unmasked_fan_in(net, 0, 0).iter().map(|&(_, w)| w).collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        let mut prev = mean(&net);
        for epoch in 0..6 {
            strip(&mut net, &dead, &policy, epoch).unwrap();
            let cur = mean(&net);
            assert!(cur >= prev - 1e-15, "mean dropped {prev} -> {cur}");
            prev = cur;
        }
    }

    #[test]
    fn non_dead_neurons_are_untouched_and_outputs_preserved() {
        let mut net = DenseNetwork::init(
            &[4, 6, 3],
            ActivationKind::Relu,
            31,
            InitScheme::KaimingUniform,
        )
        .unwrap();
        // Force neuron 2 dead on nonnegative inputs.
        for i in 0..4 {
            net.layers_mut()[0].weights.set(i, 2, -0.7 - i as f64 * 0.1);
        }
        let eval = Matrix::from_fn(10, 4, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0);
        let before = net.forward(&eval).unwrap();

        let mut ledger = ActivationLedger::new(&net);
        ledger.accumulate(&before).unwrap();
        let dead = ledger
            .find_dead(&net, 0.0, DetectionSource::ValidationSet)
            .unwrap();
        assert!(dead.contains(0, 2));

        let untouched: Vec<Vec<(usize, f64)>> = (0..6)
            .filter(|&j| !dead.contains(0, j))
            .map(|j| unmasked_fan_in(&net, 0, j))
            .collect();

        strip(&mut net, &dead, &StrippingPolicy::default(), 0).unwrap();

        let after_cols: Vec<Vec<(usize, f64)>> = (0..6)
            .filter(|&j| !dead.contains(0, j))
            .map(|j| unmasked_fan_in(&net, 0, j))
            .collect();
        assert_eq!(untouched, after_cols);

        // Dead neurons output zero, so removing their fan-in leaves every
        // downstream value bit-identical.
        let after = net.forward(&eval).unwrap();
        assert_eq!(before.logits().as_slice(), after.logits().as_slice());
    }

    #[test]
    fn mask_never_returns_to_one() {
        let mut net = single_neuron_net(&[-4.0, -3.0, -2.0, -1.0, 0.5, 1.5]);
        let dead = dead_at(&net, 0, &[0]);
        let policy = StrippingPolicy {
            fraction: 0.34,
            ..Default::default()
        };
        let mut zeroed: Vec<(usize, usize)> = Vec::new();
        for epoch in 0..5 {
            strip(&mut net, &dead, &policy, epoch).unwrap();
            let mask = &net.layers()[0].mask;
            for &(i, j) in &zeroed {
                assert_eq!(mask.get(i, j), 0.0, "mask resurrected at ({i},{j})");
            }
            for i in 0..6 {
                if mask.get(i, 0) == 0.0 && !zeroed.contains(&(i, 0)) {
                    zeroed.push((i, 0));
                }
            }
        }
        assert_eq!(zeroed.len(), 5); // min_remaining=1 floors the rest
    }

    #[test]
    fn out_of_range_dead_index_is_rejected() {
        let mut net = single_neuron_net(&[-1.0, 1.0]);
        let mut dead = DeadSet::empty(&net, DetectionSource::ValidationSet);
        dead.layers[0] = vec![5];
        let err = strip(&mut net, &dead, &StrippingPolicy::default(), 0).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }
}
