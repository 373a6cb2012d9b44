//! Finite-difference gradient verification.
//!
//! [`finite_diff_gradients`] evaluates the loss through the forward pass
//! only, so it is an oracle independent of the backprop path and stays valid
//! no matter how `backward` is implemented.

use crate::error::Result;
use crate::network::{DenseNetwork, Gradients};
use crate::tensor::Matrix;

/// Central-difference gradients of the mean loss over `(batch, labels)` with
/// respect to every weight and bias. Perturbations at masked weight
/// positions cannot reach the output, so those entries come back exactly
/// zero, matching the masked analytic gradient.
pub fn finite_diff_gradients(
    net: &DenseNetwork,
    batch: &Matrix,
    labels: &[usize],
    h: f64,
) -> Result<Gradients> {
    let mut grads = Gradients::zeros_like(net);
    let mut probe = net.clone();
    for l in 0..net.num_layers() {
        let (rows, cols) = net.layers()[l].weights.shape();
        for i in 0..rows {
            for j in 0..cols {
                let orig = net.layers()[l].weights.get(i, j);
                probe.layers_mut()[l].weights.set(i, j, orig + h);
                let (up, _) = probe.loss_and_accuracy(batch, labels)?;
                probe.layers_mut()[l].weights.set(i, j, orig - h);
                let (down, _) = probe.loss_and_accuracy(batch, labels)?;
                probe.layers_mut()[l].weights.set(i, j, orig);
                grads.weights[l].set(i, j, (up - down) / (2.0 * h));
            }
        }
        for j in 0..cols {
            let orig = net.layers()[l].bias[j];
            probe.layers_mut()[l].bias[j] = orig + h;
            let (up, _) = probe.loss_and_accuracy(batch, labels)?;
            probe.layers_mut()[l].bias[j] = orig - h;
            let (down, _) = probe.loss_and_accuracy(batch, labels)?;
            probe.layers_mut()[l].bias[j] = orig;
            grads.biases[l][j] = (up - down) / (2.0 * h);
        }
    }
    Ok(grads)
}

/// Largest relative error between two gradient sets.
///
/// The denominator is floored at `floor` because central differences carry
/// roundoff noise of roughly `eps * |loss| / h` in absolute terms; below the
/// floor the comparison is effectively absolute.
pub fn max_relative_error(a: &Gradients, b: &Gradients, floor: f64) -> f64 {
    let mut worst = 0.0f64;
    let mut update = |x: f64, y: f64| {
        let rel = (x - y).abs() / x.abs().max(y.abs()).max(floor);
        if rel > worst {
            worst = rel;
        }
    };
    for (ga, gb) in a.weights.iter().zip(&b.weights) {
        for (&x, &y) in ga.as_slice().iter().zip(gb.as_slice()) {
            update(x, y);
        }
    }
    for (ba, bb) in a.biases.iter().zip(&b.biases) {
        for (&x, &y) in ba.iter().zip(bb) {
            update(x, y);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::ActivationKind;
    use crate::network::InitScheme;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn backprop_matches_finite_difference_on_small_net() {
        let net = DenseNetwork::init(
            &[5, 8, 4, 3],
            ActivationKind::Relu,
            17,
            InitScheme::KaimingUniform,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let batch = Matrix::from_fn(6, 5, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let labels = vec![0, 1, 2, 0, 1, 2];
        let trace = net.forward(&batch).unwrap();
        let analytic = net.backward(&trace, &labels).unwrap();
        let numeric = finite_diff_gradients(&net, &batch, &labels, 1e-5).unwrap();
        let err = max_relative_error(&analytic, &numeric, 1e-3);
        assert!(err < 1e-6, "max relative error {err}");
    }
}
