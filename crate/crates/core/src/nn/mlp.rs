use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};

/// Fully-connected network: ReLU on hidden layers, raw logits at the output.
///
/// Parameters are stored as `f32`; forward and backward passes accumulate in
/// `f64`. Weight matrix `l` is row-major with shape
/// `layer_sizes[l + 1] × layer_sizes[l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    pub(crate) weights: Vec<Vec<f32>>,
    pub(crate) biases: Vec<Vec<f32>>,
}

/// Per-parameter gradients laid out exactly like the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

impl Mlp {
    /// All-zero network.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "layer sizes {layer_sizes:?} need at least two positive entries"
            )));
        }
        let weights = layer_sizes
            .windows(2)
            .map(|w| vec![0.0; w[0] * w[1]])
            .collect();
        let biases = layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Mlp {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
        })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn new<R: Rng + ?Sized>(layer_sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes)?;
        for (l, w) in net.weights.iter_mut().enumerate() {
            let (fan_in, fan_out) = (layer_sizes[l], layer_sizes[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt() as f32;
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
            for x in w.iter_mut() {
                *x = dist.sample(rng);
            }
        }
        Ok(net)
    }

    pub fn from_parts(
        layer_sizes: &[usize],
        weights: Vec<Vec<f32>>,
        biases: Vec<Vec<f32>>,
    ) -> Result<Self> {
        let shape = Self::zeros(layer_sizes)?;
        let ok = weights.len() == shape.weights.len()
            && biases.len() == shape.biases.len()
            && weights.iter().zip(&shape.weights).all(|(a, b)| a.len() == b.len())
            && biases.iter().zip(&shape.biases).all(|(a, b)| a.len() == b.len());
        if !ok {
            return Err(Error::shape(
                format!("parameters for layers {layer_sizes:?}"),
                "differently shaped parameters",
            ));
        }
        Ok(Mlp {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Row-major weight matrix of layer `l`.
    pub fn weights(&self, l: usize) -> &[f32] {
        &self.weights[l]
    }

    pub fn weights_mut(&mut self, l: usize) -> &mut [f32] {
        &mut self.weights[l]
    }

    pub fn biases(&self, l: usize) -> &[f32] {
        &self.biases[l]
    }

    pub fn biases_mut(&mut self, l: usize) -> &mut [f32] {
        &mut self.biases[l]
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    fn check_inputs(&self, inputs: &[&[f32]]) -> Result<()> {
        for x in inputs {
            if x.len() != self.input_dim() {
                return Err(Error::shape(
                    format!("input width {}", self.input_dim()),
                    format!("width {}", x.len()),
                ));
            }
        }
        Ok(())
    }

    /// Pre-activations of every layer for one example; entry 0 is the input.
    fn activations(&self, x: &[f32]) -> Vec<Vec<f64>> {
        let depth = self.weights.len();
        let mut acts = Vec::with_capacity(depth + 1);
        acts.push(x.iter().map(|&v| f64::from(v)).collect::<Vec<f64>>());
        for l in 0..depth {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let prev = &acts[l];
            let w = &self.weights[l];
            let mut z = Vec::with_capacity(n_out);
            for r in 0..n_out {
                let row = &w[r * n_in..(r + 1) * n_in];
                let mut s = f64::from(self.biases[l][r]);
                for (wi, ai) in row.iter().zip(prev) {
                    s += f64::from(*wi) * ai;
                }
                z.push(s);
            }
            if l + 1 < depth {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            acts.push(z);
        }
        acts
    }

    /// Logits for each input row.
    pub fn forward(&self, inputs: &[&[f32]]) -> Result<Vec<Vec<f64>>> {
        self.check_inputs(inputs)?;
        Ok(inputs
            .iter()
            .map(|x| self.activations(x).pop().unwrap())
            .collect())
    }

    /// Index of the largest logit per input (first wins ties).
    pub fn predict(&self, inputs: &[&[f32]]) -> Result<Vec<usize>> {
        Ok(self.forward(inputs)?.iter().map(|z| argmax(z)).collect())
    }

    /// Fraction of inputs classified correctly; 0 for an empty set.
    pub fn accuracy(&self, inputs: &[&[f32]], labels: &[usize]) -> Result<f64> {
        if inputs.len() != labels.len() {
            return Err(Error::shape(inputs.len(), labels.len()));
        }
        if inputs.is_empty() {
            return Ok(0.0);
        }
        let predicted = self.predict(inputs)?;
        let correct = predicted.iter().zip(labels).filter(|(p, y)| p == y).count();
        Ok(correct as f64 / inputs.len() as f64)
    }

    /// Mean softmax cross-entropy over the batch and its exact gradient.
    pub fn backward_cross_entropy(
        &self,
        inputs: &[&[f32]],
        labels: &[usize],
    ) -> Result<(f64, Gradients)> {
        self.check_inputs(inputs)?;
        if inputs.len() != labels.len() {
            return Err(Error::shape(
                format!("{} labels", inputs.len()),
                format!("{} labels", labels.len()),
            ));
        }
        let classes = self.output_dim();
        if let Some(&label) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::InvalidLabel { label, classes });
        }
        let mut grads = Gradients::zeros_like(self);
        if inputs.is_empty() {
            return Ok((0.0, grads));
        }
        let scale = 1.0 / inputs.len() as f64;
        let depth = self.weights.len();
        let mut loss = 0.0;

        for (x, &y) in inputs.iter().zip(labels) {
            let acts = self.activations(x);
            let logits = &acts[depth];
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            loss += (sum.ln() + max - logits[y]) * scale;

            let mut delta: Vec<f64> = exps.iter().map(|e| e / sum * scale).collect();
            delta[y] -= scale;

            for l in (0..depth).rev() {
                let n_in = self.layer_sizes[l];
                let prev = &acts[l];
                let gw = &mut grads.weights[l];
                for (r, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    grads.biases[l][r] += d;
                    let row = &mut gw[r * n_in..(r + 1) * n_in];
                    for (g, a) in row.iter_mut().zip(prev) {
                        *g += d * a;
                    }
                }
                if l == 0 {
                    break;
                }
                let w = &self.weights[l];
                let mut back = vec![0.0; n_in];
                for (r, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (b, wi) in back.iter_mut().zip(&w[r * n_in..(r + 1) * n_in]) {
                        *b += d * f64::from(*wi);
                    }
                }
                // prev holds post-ReLU values; zero means the unit was inactive.
                for (b, a) in back.iter_mut().zip(prev) {
                    if *a <= 0.0 {
                        *b = 0.0;
                    }
                }
                delta = back;
            }
        }
        Ok((loss, grads))
    }

    /// Plain SGD: `w <- w - lr * g` for every parameter.
    pub fn sgd_step(&mut self, grads: &Gradients, lr: f64) {
        let update = |params: &mut [f32], g: &[f64]| {
            for (p, gi) in params.iter_mut().zip(g) {
                *p = (f64::from(*p) - lr * gi) as f32;
            }
        };
        for (w, g) in self.weights.iter_mut().zip(&grads.weights) {
            update(w, g);
        }
        for (b, g) in self.biases.iter_mut().zip(&grads.biases) {
            update(b, g);
        }
    }
}

pub(crate) fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in z.iter().enumerate() {
        if *v > z[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rows(data: &[Vec<f32>]) -> Vec<&[f32]> {
        data.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn zero_net_gives_zero_logits() {
        let net = Mlp::zeros(&[3, 4, 2]).unwrap();
        let x = vec![vec![0.3, -1.0, 2.0]];
        assert_eq!(net.forward(&rows(&x)).unwrap(), vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let mut net = Mlp::zeros(&[3, 3]).unwrap();
        for i in 0..3 {
            net.weights_mut(0)[i * 3 + i] = 1.0;
        }
        let x = vec![vec![0.5, -2.0, 7.25]];
        assert_eq!(net.forward(&rows(&x)).unwrap(), vec![vec![0.5, -2.0, 7.25]]);
    }

    #[test]
    fn forward_matches_straight_line_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut net = Mlp::new(&[3, 4, 2], &mut rng).unwrap();
        for b in net.biases.iter_mut().flatten() {
            *b = rng.random_range(-0.5..0.5);
        }
        let x: Vec<f32> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (w0, b0, w1, b1) = (net.weights(0), net.biases(0), net.weights(1), net.biases(1));
        let mut h = [0.0f64; 4];
        for r in 0..4 {
            h[r] = b0[r] as f64
                + w0[r * 3] as f64 * x[0] as f64
                + w0[r * 3 + 1] as f64 * x[1] as f64
                + w0[r * 3 + 2] as f64 * x[2] as f64;
            h[r] = h[r].max(0.0);
        }
        let mut out = [0.0f64; 2];
        for r in 0..2 {
            out[r] = b1[r] as f64 + (0..4).map(|c| w1[r * 4 + c] as f64 * h[c]).sum::<f64>();
        }
        let got = net.forward(&[&x]).unwrap();
        for r in 0..2 {
            assert!((got[0][r] - out[r]).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_logits_loss_is_ln_classes() {
        let net = Mlp::zeros(&[2, 5]).unwrap();
        let x = vec![vec![1.0, 2.0], vec![0.0, 0.0]];
        let (loss, _) = net.backward_cross_entropy(&rows(&x), &[0, 3]).unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn duplicated_batch_keeps_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = Mlp::new(&[4, 3, 3], &mut rng).unwrap();
        let x = vec![vec![0.1, 0.2, 0.3, 0.4], vec![-0.5, 0.5, 0.0, 1.0]];
        let (l1, g1) = net.backward_cross_entropy(&rows(&x), &[0, 2]).unwrap();
        let x2: Vec<Vec<f32>> = x.iter().chain(&x).cloned().collect();
        let (l2, g2) = net.backward_cross_entropy(&rows(&x2), &[0, 2, 0, 2]).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.weights.iter().flatten().zip(g2.weights.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_and_label_errors() {
        let net = Mlp::zeros(&[2, 3]).unwrap();
        let bad = vec![vec![1.0, 2.0, 3.0]];
        assert!(matches!(net.forward(&rows(&bad)), Err(Error::ShapeMismatch { .. })));
        let ok = vec![vec![1.0, 2.0]];
        assert!(matches!(
            net.backward_cross_entropy(&rows(&ok), &[3]),
            Err(Error::InvalidLabel { label: 3, classes: 3 })
        ));
        assert!(matches!(
            net.backward_cross_entropy(&rows(&ok), &[0, 1]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn sgd_examples() {
        let mut net = Mlp::zeros(&[1, 1]).unwrap();
        net.weights_mut(0)[0] = 0.5;
        let before = net.clone();
        net.sgd_step(&Gradients::zeros_like(&net), 0.1);
        assert_eq!(net, before);

        let mut g = Gradients::zeros_like(&net);
        g.weights[0][0] = 0.2;
        net.sgd_step(&g, 1.0);
        assert_eq!(net.weights(0)[0], 0.3);

        let mut a = before.clone();
        let mut b = before.clone();
        a.sgd_step(&g, 0.5);
        b.sgd_step(&g, 0.25);
        b.sgd_step(&g, 0.25);
        assert!((a.weights(0)[0] - b.weights(0)[0]).abs() < 1e-7);
    }

    #[test]
    fn init_is_bounded_and_seeded() {
        let a = Mlp::new(&[10, 6], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = Mlp::new(&[10, 6], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
        let limit = (6.0f64 / 16.0).sqrt() as f32;
        assert!(a.weights(0).iter().all(|w| w.abs() <= limit));
        assert!(a.biases(0).iter().all(|&b| b == 0.0));
    }
}
