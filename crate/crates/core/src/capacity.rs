//! Active-parameter accounting.
//!
//! A dead neuron always outputs zero, so the parameters attached to it carry
//! no signal and cannot train; pruned connections are inert by construction.
//! Active parameters are everything else. The scope is the hidden
//! parameters: all weights into or out of hidden neurons (which is every
//! weight in an MLP, including last-hidden to output) plus hidden biases;
//! output-layer biases attach to no hidden neuron and are excluded.

use crate::detection::DeadSet;
use crate::error::Result;
use crate::network::DenseNetwork;

/// Partition of the in-scope parameters. Every parameter lands in exactly
/// one of `{active, pruned, dead_attached}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityReport {
    pub total_params: usize,
    pub pruned_params: usize,
    /// Unpruned parameters attached to at least one dead neuron.
    pub dead_attached_params: usize,
    pub active_params: usize,
    /// `100 * active / total`.
    pub active_pct: f64,
    pub dead_neurons: usize,
}

/// Classifies every in-scope parameter given the current masks and dead set.
///
/// A weight is inactive when masked, or when either endpoint is a dead
/// hidden neuron (counted once); a dead neuron's bias is inactive.
pub fn active_parameters(net: &DenseNetwork, dead: &DeadSet) -> Result<CapacityReport> {
    dead.validate(net)?;

    let hidden_layers = net.num_hidden_layers();
    let dead_flags: Vec<Vec<bool>> = (0..hidden_layers)
        .map(|h| {
            let width = net.layers()[h].fan_out();
            let mut flags = vec![false; width];
            for &j in &dead.layers[h] {
                flags[j] = true;
            }
            flags
        })
        .collect();

    let mut total = 0usize;
    let mut pruned = 0usize;
    let mut dead_attached = 0usize;
    let mut active = 0usize;

    for (l, layer) in net.layers().iter().enumerate() {
        let in_side_dead = if l > 0 { Some(&dead_flags[l - 1]) } else { None };
        let out_side_dead = if l < hidden_layers {
            Some(&dead_flags[l])
        } else {
            None
        };
        for i in 0..layer.fan_in() {
            for j in 0..layer.fan_out() {
                total += 1;
                if layer.mask.get(i, j) == 0.0 {
                    pruned += 1;
                } else if in_side_dead.is_some_and(|d| d[i])
                    || out_side_dead.is_some_and(|d| d[j])
                {
                    dead_attached += 1;
                } else {
                    active += 1;
                }
            }
        }
        // Hidden biases only; the output layer's biases are out of scope.
        if l < hidden_layers {
            for j in 0..layer.fan_out() {
                total += 1;
                if dead_flags[l][j] {
                    dead_attached += 1;
                } else {
                    active += 1;
                }
            }
        }
    }

    let active_pct = if total > 0 {
        100.0 * active as f64 / total as f64
    } else {
        100.0
    };
    Ok(CapacityReport {
        total_params: total,
        pruned_params: pruned,
        dead_attached_params: dead_attached,
        active_params: active,
        active_pct,
        dead_neurons: dead.total(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::ActivationKind;
    use crate::detection::DetectionSource;
    use crate::network::InitScheme;

    fn relu_net(widths: &[usize], seed: u64) -> DenseNetwork {
        DenseNetwork::init(widths, ActivationKind::Relu, seed, InitScheme::KaimingUniform)
            .unwrap()
    }

    #[test]
    fn pristine_network_is_fully_active() {
        let net = relu_net(&[7, 5, 4, 3], 0);
        let dead = DeadSet::empty(&net, DetectionSource::ValidationSet);
        let report = active_parameters(&net, &dead).unwrap();
        // Weights 7*5 + 5*4 + 4*3 = 67, hidden biases 5 + 4 = 9.
        assert_eq!(report.total_params, 76);
        assert_eq!(report.active_params, 76);
        assert_eq!(report.pruned_params, 0);
        assert_eq!(report.dead_attached_params, 0);
        assert_eq!(report.active_pct, 100.0);
    }

    #[test]
    fn one_dead_neuron_detaches_fan_in_bias_and_fan_out() {
        let (d, h1, h2, c) = (6, 4, 5, 3);
        let net = relu_net(&[d, h1, h2, c], 1);
        let mut dead = DeadSet::empty(&net, DetectionSource::ValidationSet);
        dead.layers[0] = vec![2];
        let report = active_parameters(&net, &dead).unwrap();
        assert_eq!(report.dead_attached_params, d + 1 + h2);
        assert_eq!(
            report.active_params,
            report.total_params - (d + 1 + h2)
        );
        assert_eq!(report.dead_neurons, 1);
    }

    #[test]
    fn weight_between_two_dead_neurons_counts_once() {
        let net = relu_net(&[2, 2, 2, 2], 2);
        let mut dead = DeadSet::empty(&net, DetectionSource::ValidationSet);
        dead.layers[0] = vec![0];
        dead.layers[1] = vec![1];
        let report = active_parameters(&net, &dead).unwrap();
        // Each bucket partitions the total exactly.
        assert_eq!(
            report.active_params + report.pruned_params + report.dead_attached_params,
            report.total_params
        );
        // Layer-1 weight (0,1) touches both dead neurons; hand count:
        // dead (0,0): fan-in 2 + bias 1 + fan-out 2 = 5
        // dead (1,1): fan-in 2 + bias 1 + fan-out 2 = 5, overlap (0,1) once.
        assert_eq!(report.dead_attached_params, 9);
    }

    #[test]
    fn pruned_and_dead_buckets_are_disjoint() {
        let mut net = relu_net(&[3, 2, 2], 3);
        let mut dead = DeadSet::empty(&net, DetectionSource::ValidationSet);
        dead.layers[0] = vec![0];
        // Prune one weight inside the dead column and one outside it.
        net.layers_mut()[0].mask.set(1, 0, 0.0);
        net.layers_mut()[0].weights.set(1, 0, 0.0);
        net.layers_mut()[0].mask.set(2, 1, 0.0);
        net.layers_mut()[0].weights.set(2, 1, 0.0);
        let report = active_parameters(&net, &dead).unwrap();
        assert_eq!(report.pruned_params, 2);
        // Dead column keeps 2 unpruned fan-in + bias + 2 fan-out.
        assert_eq!(report.dead_attached_params, 5);
        assert_eq!(
            report.active_params + report.pruned_params + report.dead_attached_params,
            report.total_params
        );
    }

    #[test]
    fn monotone_in_dead_set() {
        let net = relu_net(&[5, 6, 6, 4], 4);
        let mut dead = DeadSet::empty(&net, DetectionSource::ValidationSet);
        let mut prev = active_parameters(&net, &dead).unwrap().active_params;
        for j in 0..6 {
            dead.layers[1] = (0..=j).collect();
            let cur = active_parameters(&net, &dead).unwrap().active_params;
            assert!(cur <= prev);
            prev = cur;
        }
    }
}
