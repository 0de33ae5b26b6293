use super::{Matrix, Mlp, NnError, ParamStore};

/// Anything exposing its tensors in a fixed order.
pub trait Parameters {
    fn tensors(&self) -> Vec<&Matrix>;
    fn tensors_mut(&mut self) -> Vec<&mut Matrix>;
}

impl Parameters for Mlp {
    fn tensors(&self) -> Vec<&Matrix> {
        Mlp::tensors(self).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        Mlp::tensors_mut(self).collect()
    }
}

impl Parameters for ParamStore {
    fn tensors(&self) -> Vec<&Matrix> {
        ParamStore::tensors(self).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        ParamStore::tensors_mut(self).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 2.5e-4, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Bias-corrected adaptive-moment optimizer state. Moments are allocated on
/// the first step and must keep matching the parameter shapes afterwards.
#[derive(Debug, Clone)]
pub struct AdamState {
    config: AdamConfig,
    step: u64,
    first: Vec<Matrix>,
    second: Vec<Matrix>,
}

impl AdamState {
    pub fn new(config: AdamConfig) -> Self {
        Self { config, step: 0, first: Vec::new(), second: Vec::new() }
    }

    pub fn config(&self) -> AdamConfig {
        self.config
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// One update; `maximize` ascends the gradient instead of descending.
    pub fn step<P: Parameters + ?Sized>(&mut self, params: &mut P, grads: &P, maximize: bool) -> Result<(), NnError> {
        let mut ps = params.tensors_mut();
        let gs = grads.tensors();
        if ps.len() != gs.len() {
            return Err(NnError::DimensionMismatch { expected: ps.len(), found: gs.len() });
        }
        for (p, g) in ps.iter().zip(&gs) {
            if p.shape() != g.shape() {
                return Err(NnError::ShapeMismatch(p.shape(), g.shape()));
            }
        }
        if self.first.is_empty() {
            self.first = gs.iter().map(|g| Matrix::zeros(g.rows(), g.cols())).collect();
            self.second = self.first.clone();
        } else if self.first.len() != gs.len() || self.first.iter().zip(&gs).any(|(m, g)| m.shape() != g.shape()) {
            return Err(NnError::ShapeMismatch(self.first[0].shape(), gs[0].shape()));
        }

        self.step += 1;
        let AdamConfig { learning_rate, beta1, beta2, epsilon } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        let sign = if maximize { 1.0 } else { -1.0 };
        for (i, p) in ps.iter_mut().enumerate() {
            let g = gs[i].as_slice();
            let m = self.first[i].as_mut_slice();
            let v = self.second[i].as_mut_slice();
            for (j, w) in p.as_mut_slice().iter_mut().enumerate() {
                m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
                v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
                let m_hat = m[j] / c1;
                let v_hat = v[j] / c2;
                *w += sign * learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}
