//! Multilayer perceptron with per-weight binary masks.
//!
//! Every weight carries a mask entry; a masked (0) position is a permanently
//! pruned connection. Masks are applied by Hadamard product on every forward
//! and backward pass, and masked weights are additionally hard-zeroed after
//! each optimizer step, so pruned connections stay exactly zero even under
//! adaptive updates.
//!
//! The final layer always uses [`ActivationKind::Identity`]: the network
//! outputs logits, and softmax lives inside the loss for numerical
//! stability.

use crate::activations::ActivationKind;
use crate::error::{Error, Result};
use crate::tensor::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Weight initialization scheme.
///
/// Kaiming-uniform draws from `U(-b, b)` with `b = sqrt(6 / fan_in)`, the
/// conventional choice for rectifier networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    KaimingUniform,
}

/// One dense layer: `fan_in x fan_out` weights, a bias per output unit, a
/// binary mask congruent with the weights, and the activation applied to the
/// layer output.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub mask: Matrix,
    pub activation: ActivationKind,
}

impl LayerSpec {
    #[inline]
    pub fn fan_in(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    pub fn fan_out(&self) -> usize {
        self.weights.cols()
    }

    /// Weights with the mask applied.
    pub fn masked_weights(&self) -> Matrix {
        self.weights
            .hadamard(&self.mask)
            .expect("mask shape always matches weights")
    }

    /// Count of mask-zero (pruned) positions.
    pub fn pruned_count(&self) -> usize {
        self.mask.as_slice().iter().filter(|&&m| m == 0.0).count()
    }

    /// Hard-zeroes weights at masked positions.
    pub fn enforce_mask(&mut self) {
        let mask = self.mask.as_slice();
        for (w, &m) in self.weights.as_mut_slice().iter_mut().zip(mask) {
            if m == 0.0 {
                *w = 0.0;
            }
        }
    }
}

/// A feed-forward network of dense masked layers.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    pub(crate) layers: Vec<LayerSpec>,
    seed: u64,
}

/// Per-layer pre- and post-activations recorded during a forward pass,
/// kept for backprop and for dead-neuron detection.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub(crate) input: Matrix,
    pub pre: Vec<Matrix>,
    pub post: Vec<Matrix>,
}

impl ForwardTrace {
    /// Final-layer outputs (logits).
    pub fn logits(&self) -> &Matrix {
        self.post.last().expect("trace has at least one layer")
    }

    pub fn batch_size(&self) -> usize {
        self.input.rows()
    }

    /// Post-activations of hidden layer `h` (all layers except the last).
    pub fn hidden_post(&self, h: usize) -> &Matrix {
        &self.post[h]
    }
}

/// Gradients of the mean loss with respect to every weight and bias.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNetwork) -> Self {
        Self {
            weights: net
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.fan_in(), l.fan_out()))
                .collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.fan_out()]).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(Matrix::is_finite)
            && self
                .biases
                .iter()
                .all(|b| b.iter().all(|x| x.is_finite()))
    }
}

impl DenseNetwork {
    /// Initializes a network from the full width list `[input, hidden...,
    /// output]`. Hidden layers use `activation`; the final layer is always
    /// `Identity`. Weights are drawn i.i.d. from the scheme, biases start at
    /// zero, masks start all-ones. Deterministic given `seed`.
    pub fn init(
        widths: &[usize],
        activation: ActivationKind,
        seed: u64,
        scheme: InitScheme,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 layer widths (input and output), got {}",
                widths.len()
            )));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        activation.validate()?;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_layers = widths.len() - 1;
        let mut layers = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let InitScheme::KaimingUniform = scheme;
            let bound = (6.0 / fan_in as f64).sqrt();
            let weights = Matrix::new(
                fan_in,
                fan_out,
                (0..fan_in * fan_out)
                    .map(|_| {
                        let u: f64 = rng.random();
                        (2.0 * u - 1.0) * bound
                    })
                    .collect(),
            )?;
            layers.push(LayerSpec {
                weights,
                bias: vec![0.0; fan_out],
                mask: Matrix::ones(fan_in, fan_out),
                activation: if l + 1 == n_layers {
                    ActivationKind::Identity
                } else {
                    activation
                },
            });
        }
        Ok(Self { layers, seed })
    }

    /// Builds a network directly from layers; used by the checkpoint loader
    /// and by tests that construct exact weight patterns.
    pub fn from_layers(layers: Vec<LayerSpec>, seed: u64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[0].fan_out() != pair[1].fan_in() {
                return Err(Error::Config(format!(
                    "layer {} output width {} does not match layer {} input width {}",
                    l,
                    pair[0].fan_out(),
                    l + 1,
                    pair[1].fan_in()
                )));
            }
        }
        for (l, layer) in layers.iter().enumerate() {
            if layer.weights.shape() != layer.mask.shape() {
                return Err(Error::shape(
                    "from_layers mask",
                    layer.weights.shape(),
                    layer.mask.shape(),
                ));
            }
            if layer.bias.len() != layer.fan_out() {
                return Err(Error::Config(format!(
                    "layer {l} bias length {} does not match fan_out {}",
                    layer.bias.len(),
                    layer.fan_out()
                )));
            }
        }
        Ok(Self { layers, seed })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerSpec] {
        &mut self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Number of hidden layers (all but the output layer).
    pub fn num_hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().unwrap().fan_out()
    }

    /// Full width list `[input, hidden..., output]`.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_width()];
        w.extend(self.layers.iter().map(LayerSpec::fan_out));
        w
    }

    /// Hard-zeroes masked weights in every layer.
    pub fn enforce_masks(&mut self) {
        for layer in &mut self.layers {
            layer.enforce_mask();
        }
    }

    /// Runs the batch through the network, recording pre- and
    /// post-activations per layer. The mask is applied to the weights on
    /// every call, so values at masked positions can never leak into the
    /// output.
    pub fn forward(&self, batch: &Matrix) -> Result<ForwardTrace> {
        if batch.cols() != self.input_width() {
            return Err(Error::shape(
                "forward",
                batch.shape(),
                (self.input_width(), self.layers[0].fan_out()),
            ));
        }
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        let mut current = batch;
        for layer in &self.layers {
            let z = current
                .matmul(&layer.masked_weights())?
                .add_row_broadcast(&layer.bias)?;
            let a = z.map(|x| layer.activation.apply(x));
            pre.push(z);
            post.push(a);
            current = post.last().unwrap();
        }
        Ok(ForwardTrace {
            input: batch.clone(),
            pre,
            post,
        })
    }

    /// Backpropagates mean softmax-cross-entropy through the trace.
    ///
    /// Weight gradients are multiplied entrywise by the mask, so masked
    /// positions have exactly-zero gradient.
    pub fn backward(&self, trace: &ForwardTrace, labels: &[usize]) -> Result<Gradients> {
        let n = trace.batch_size();
        if labels.len() != n {
            return Err(Error::Data(format!(
                "got {} labels for a batch of {}",
                labels.len(),
                n
            )));
        }
        let classes = self.output_width();
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::Data(format!(
                "label {bad} out of range for {classes} classes"
            )));
        }

        // d(mean NLL)/d(logits) = (softmax - onehot) / batch.
        let logits = trace.logits();
        let mut delta = softmax(logits);
        for (i, &y) in labels.iter().enumerate() {
            let row = delta.row_mut(i);
            row[y] -= 1.0;
        }
        let mut delta = delta.scale(1.0 / n as f64);

        let mut grads = Gradients::zeros_like(self);
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = if l == 0 {
                &trace.input
            } else {
                &trace.post[l - 1]
            };
            grads.weights[l] = input.transpose().matmul(&delta)?.hadamard(&layer.mask)?;
            grads.biases[l] = delta.col_sums();
            if l > 0 {
                let upstream = delta.matmul(&layer.masked_weights().transpose())?;
                let prev = &self.layers[l - 1];
                let gate = trace.pre[l - 1].map(|x| prev.activation.derivative(x));
                delta = upstream.hadamard(&gate)?;
            }
        }
        Ok(grads)
    }

    /// Mean softmax cross-entropy (natural log) and argmax accuracy over the
    /// batch.
    pub fn loss_and_accuracy(&self, batch: &Matrix, labels: &[usize]) -> Result<(f64, f64)> {
        let trace = self.forward(batch)?;
        softmax_nll_accuracy(trace.logits(), labels)
    }
}

/// Row-wise softmax with max-subtraction for stability.
pub fn softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
    out
}

/// Mean NLL and accuracy computed directly from logits, shared by training
/// (which already has logits in hand) and by [`DenseNetwork::loss_and_accuracy`].
pub fn softmax_nll_accuracy(logits: &Matrix, labels: &[usize]) -> Result<(f64, f64)> {
    let n = logits.rows();
    if labels.len() != n {
        return Err(Error::Data(format!(
            "got {} labels for {} logit rows",
            labels.len(),
            n
        )));
    }
    let classes = logits.cols();
    if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::Data(format!(
            "label {bad} out of range for {classes} classes"
        )));
    }
    if n == 0 {
        return Err(Error::Data("empty batch".into()));
    }
    let mut nll = 0.0;
    let mut correct = 0usize;
    for (i, &y) in labels.iter().enumerate() {
        let row = logits.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
        nll += lse - row[y];
        let mut best = 0;
        for (j, &z) in row.iter().enumerate() {
            if z > row[best] {
                best = j;
            }
        }
        if best == y {
            correct += 1;
        }
    }
    Ok((nll / n as f64, correct as f64 / n as f64))
}
