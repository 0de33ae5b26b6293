use rand::Rng;

use super::{Matrix, NnError};

/// Affine layer `y = W x + b` with `W` stored `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: Matrix,
    /// `1 x out`.
    pub bias: Matrix,
}

impl Linear {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self { weight: Matrix::zeros(output, input), bias: Matrix::zeros(1, output) }
    }

    /// Fan-in scaled uniform weights (variance `2 / fan_in`), zero bias.
    pub fn init<R: Rng + ?Sized>(input: usize, output: usize, rng: &mut R) -> Self {
        let limit = (6.0 / input as f64).sqrt();
        let mut layer = Self::zeros(input, output);
        for w in layer.weight.as_mut_slice() {
            *w = rng.random_range(-limit..limit);
        }
        layer
    }

    pub fn input_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.rows()
    }

    fn forward(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), self.output_dim());
        for r in 0..x.rows() {
            out.row_mut(r).copy_from_slice(self.bias.as_slice());
        }
        Matrix::gemm(1.0, x, false, &self.weight, true, 1.0, &mut out);
        out
    }
}

/// Multilayer perceptron: rectifier on hidden layers, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Linear>,
}

/// Activations kept from a forward pass for the matching backward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    input: Matrix,
    /// Post-rectifier output of each hidden layer.
    hidden: Vec<Matrix>,
}

impl Mlp {
    /// `dims = [input, hidden.., output]`.
    pub fn init<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Self {
        Self { layers: dims.windows(2).map(|w| Linear::init(w[0], w[1], rng)).collect() }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self { layers: dims.windows(2).map(|w| Linear::zeros(w[0], w[1])).collect() }
    }

    pub fn from_layers(layers: Vec<Linear>) -> Result<Self, NnError> {
        for pair in layers.windows(2) {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(NnError::DimensionMismatch { expected: pair[1].input_dim(), found: pair[0].output_dim() });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Linear] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Linear] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim()).chain(self.layers.iter().map(Linear::output_dim)).collect()
    }

    /// Forward pass over a batch of row vectors.
    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, MlpCache), NnError> {
        if x.cols() != self.input_dim() {
            return Err(NnError::DimensionMismatch { expected: self.input_dim(), found: x.cols() });
        }
        let mut hidden = Vec::with_capacity(self.layers.len() - 1);
        let last = self.layers.len() - 1;
        let mut current = self.layers[0].forward(x);
        for layer in &self.layers[1..] {
            for a in current.as_mut_slice() {
                *a = a.max(0.0);
            }
            let next = layer.forward(&current);
            hidden.push(current);
            current = next;
        }
        debug_assert_eq!(hidden.len(), last);
        Ok((current, MlpCache { input: x.clone(), hidden }))
    }

    pub fn forward_vec(&self, x: &[f64]) -> Result<(Vec<f64>, MlpCache), NnError> {
        let (out, cache) = self.forward(&Matrix::from_vec(1, x.len(), x.to_vec()))?;
        Ok((out.as_slice().to_vec(), cache))
    }

    /// Reverse pass: adds parameter gradients into `grads` and returns the
    /// gradient with respect to the input batch.
    pub fn backward(&self, cache: &MlpCache, upstream: &Matrix, grads: &mut Mlp) -> Result<Matrix, NnError> {
        if upstream.cols() != self.output_dim() || upstream.rows() != cache.input.rows() {
            return Err(NnError::DimensionMismatch { expected: self.output_dim(), found: upstream.cols() });
        }
        let mut delta = upstream.clone();
        for i in (0..self.layers.len()).rev() {
            let input = if i == 0 { &cache.input } else { &cache.hidden[i - 1] };
            let g = &mut grads.layers[i];
            Matrix::gemm(1.0, &delta, true, input, false, 1.0, &mut g.weight);
            for (b, d) in g.bias.as_mut_slice().iter_mut().zip(delta.sum_rows()) {
                *b += d;
            }
            let mut prev = Matrix::zeros(delta.rows(), self.layers[i].input_dim());
            Matrix::gemm(1.0, &delta, false, &self.layers[i].weight, false, 0.0, &mut prev);
            if i > 0 {
                // Rectifier: gradient passes only where the activation was positive.
                for (d, a) in prev.as_mut_slice().iter_mut().zip(cache.hidden[i - 1].as_slice()) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            delta = prev;
        }
        Ok(delta)
    }

    pub fn backward_vec(&self, cache: &MlpCache, upstream: &[f64], grads: &mut Mlp) -> Result<Vec<f64>, NnError> {
        let up = Matrix::from_vec(1, upstream.len(), upstream.to_vec());
        Ok(self.backward(cache, &up, grads)?.as_slice().to_vec())
    }

    pub fn tensors(&self) -> impl Iterator<Item = &Matrix> {
        self.layers.iter().flat_map(|l| [&l.weight, &l.bias])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Matrix> {
        self.layers.iter_mut().flat_map(|l| [&mut l.weight, &mut l.bias])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_input(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    #[test]
    fn zero_net_outputs_zero() {
        let net = Mlp::zeros(&[8, 256, 256, 8]);
        let (y, _) = net.forward_vec(&[1.0, -2.0, 3.0, 0.5, 0.0, 9.0, -1.0, 2.0]).unwrap();
        assert_eq!(y, vec![0.0; 8]);
    }

    #[test]
    fn identity_layer_passes_input() {
        let net = Mlp::from_layers(vec![Linear { weight: Matrix::identity(4), bias: Matrix::zeros(1, 4) }]).unwrap();
        let x = [1.5, -2.0, 0.0, 7.0];
        assert_eq!(net.forward_vec(&x).unwrap().0, x.to_vec());
    }

    #[test]
    fn forward_matches_straight_line_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::init(&[8, 256, 256, 8], &mut rng);
        for layer in net.layers.iter() {
            assert!(layer.bias.as_slice().iter().all(|&b| b == 0.0));
        }
        let mut net = net;
        for layer in net.layers_mut() {
            for b in layer.bias.as_mut_slice() {
                *b = rng.random_range(-0.5..0.5);
            }
        }
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (y, _) = net.forward_vec(&x).unwrap();

        // Plain loops, no gemm.
        let mut a = x.clone();
        for (i, layer) in net.layers().iter().enumerate() {
            let mut z = vec![0.0; layer.output_dim()];
            for (o, zo) in z.iter_mut().enumerate() {
                let mut s = layer.bias.as_slice()[o];
                for (k, ak) in a.iter().enumerate() {
                    s += layer.weight[(o, k)] * ak;
                }
                *zo = if i + 1 < net.layers().len() { s.max(0.0) } else { s };
            }
            a = z;
        }
        for (p, q) in y.iter().zip(&a) {
            assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0), "{p} vs {q}");
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let net = Mlp::zeros(&[3, 4, 1]);
        assert!(matches!(net.forward_vec(&[1.0, 2.0]), Err(NnError::DimensionMismatch { expected: 3, found: 2 })));
    }

    #[test]
    fn linear_gradient_is_input_times_upstream() {
        let net =
            Mlp::from_layers(vec![Linear { weight: Matrix::from_vec(1, 1, vec![2.5]), bias: Matrix::zeros(1, 1) }])
                .unwrap();
        let (_, cache) = net.forward_vec(&[3.0]).unwrap();
        let mut grads = Mlp::zeros(&[1, 1]);
        let dx = net.backward_vec(&cache, &[0.5], &mut grads).unwrap();
        assert_eq!(grads.layers[0].weight[(0, 0)], 1.5);
        assert_eq!(grads.layers[0].bias[(0, 0)], 0.5);
        assert_eq!(dx, vec![1.25]);
    }

    #[test]
    fn dead_rectifier_has_zero_gradient() {
        // Hidden unit pre-activation is -1 for input 1.
        let net = Mlp::from_layers(vec![
            Linear { weight: Matrix::from_vec(1, 1, vec![-1.0]), bias: Matrix::zeros(1, 1) },
            Linear { weight: Matrix::from_vec(1, 1, vec![3.0]), bias: Matrix::zeros(1, 1) },
        ])
        .unwrap();
        let (_, cache) = net.forward_vec(&[1.0]).unwrap();
        let mut grads = Mlp::zeros(&[1, 1, 1]);
        let dx = net.backward_vec(&cache, &[1.0], &mut grads).unwrap();
        assert_eq!(dx, vec![0.0]);
        assert_eq!(grads.layers[0].weight[(0, 0)], 0.0);
        assert_eq!(grads.layers[1].weight[(0, 0)], 0.0);
    }

    #[test]
    fn batch_forward_equals_row_by_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::init(&[5, 16, 16, 3], &mut rng);
        let x = random_input(7, 5, &mut rng);
        let (y, _) = net.forward(&x).unwrap();
        for r in 0..7 {
            let (yr, _) = net.forward_vec(x.row(r)).unwrap();
            for (a, b) in y.row(r).iter().zip(&yr) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences_on_every_store_shape() {
        use crate::nn::gradcheck::{central_difference, relative_error};
        use crate::nn::NetKey;

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for key in NetKey::ALL {
            let dims = key.dims();
            let mut net = Mlp::init(&dims, &mut rng);
            for layer in net.layers_mut() {
                for b in layer.bias.as_mut_slice() {
                    *b = rng.random_range(-0.1..0.1);
                }
            }
            let x = random_input(1, dims[0], &mut rng);
            let c: Vec<f64> = (0..dims[3]).map(|_| rng.random_range(-1.0..1.0)).collect();
            let loss = |net: &Mlp, x: &Matrix| -> f64 {
                let (y, _) = net.forward(x).unwrap();
                y.as_slice().iter().zip(&c).map(|(a, b)| a * b).sum()
            };

            let (_, cache) = net.forward(&x).unwrap();
            let mut grads = Mlp::zeros(&dims);
            let up = Matrix::from_vec(1, c.len(), c.clone());
            let dx = net.backward(&cache, &up, &mut grads).unwrap();

            let mut worst = 0.0f64;
            for i in 0..dims[0] {
                let mut xp = x.clone();
                let num = central_difference(x.as_slice()[i], 1e-5, |v| {
                    xp.as_mut_slice()[i] = v;
                    loss(&net, &xp)
                });
                worst = worst.max(relative_error(dx.as_slice()[i], num, 1e-6));
            }
            // A sample of coordinates from every tensor.
            let tensor_count = grads.tensors().count();
            for t in 0..tensor_count {
                let len = grads.tensors().nth(t).unwrap().as_slice().len();
                for _ in 0..40 {
                    let j = rng.random_range(0..len);
                    let analytic = grads.tensors().nth(t).unwrap().as_slice()[j];
                    let x0 = net.tensors().nth(t).unwrap().as_slice()[j];
                    let mut probe = net.clone();
                    let num = central_difference(x0, 1e-5, |v| {
                        probe.tensors_mut().nth(t).unwrap().as_mut_slice()[j] = v;
                        loss(&probe, &x)
                    });
                    worst = worst.max(relative_error(analytic, num, 1e-6));
                }
            }
            assert!(worst < 1e-4, "{key:?}: worst relative error {worst}");
        }
    }

    #[test]
    fn forward_is_bitwise_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let net = Mlp::init(&[48, 256, 256, 8], &mut rng);
        let x = random_input(5, 48, &mut rng);
        assert_eq!(net.forward(&x).unwrap().0, net.forward(&x).unwrap().0);
    }
}
