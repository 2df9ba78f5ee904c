//! Fully connected cost-Q network with ReLU hidden layers and a linear head
//! producing one value per action.
//!
//! Parameters live in one flat vector, layer by layer: the `out × in`
//! weight matrix row-major, then the `out` biases.

use rand::Rng;

use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    dims: Vec<usize>,
    params: Vec<f64>,
}

fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl QNetwork {
    /// He-uniform weights, zero biases.
    pub fn new(dims: &[usize], rng: &mut SimRng) -> Self {
        assert!(dims.len() >= 2 && dims.iter().all(|&d| d > 0), "bad layer dims {dims:?}");
        let mut params = Vec::with_capacity(param_count(dims));
        for w in dims.windows(2) {
            let bound = (6.0 / w[0] as f64).sqrt();
            params.extend((0..w[0] * w[1]).map(|_| rng.gen_range(-bound..bound)));
            params.extend(std::iter::repeat(0.0).take(w[1]));
        }
        Self { dims: dims.to_vec(), params }
    }

    /// Network with the given flat parameters; `None` if the count is wrong.
    pub fn from_params(dims: &[usize], params: Vec<f64>) -> Option<Self> {
        (dims.len() >= 2 && dims.iter().all(|&d| d > 0) && params.len() == param_count(dims))
            .then(|| Self { dims: dims.to_vec(), params })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_len(&self) -> usize {
        self.dims[0]
    }

    pub fn num_outputs(&self) -> usize {
        *self.dims.last().expect("non-empty dims")
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.activations(x).pop().expect("output layer")
    }

    /// Activations of every layer, input first, output last.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        assert_eq!(x.len(), self.dims[0], "feature length");
        let last = self.dims.len() - 2;
        let mut acts = vec![x.to_vec()];
        let mut offset = 0;
        for (l, w) in self.dims.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let bias = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let input = &acts[l];
            let mut out = Vec::with_capacity(n_out);
            for o in 0..n_out {
                let row = &weights[o * n_in..(o + 1) * n_in];
                let z = bias[o] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                out.push(if l < last { z.max(0.0) } else { z });
            }
            acts.push(out);
            offset += n_in * n_out + n_out;
        }
        acts
    }

    /// Mean squared error of `Q(x)[a]` against `y` over `batch`, and its
    /// gradient with respect to the flat parameters.
    pub fn loss_and_grad(&self, batch: &[(&[f64], usize, f64)]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let scale = 1.0 / batch.len().max(1) as f64;
        let n_layers = self.dims.len() - 1;
        let offsets: Vec<usize> = self
            .dims
            .windows(2)
            .scan(0, |acc, w| {
                let o = *acc;
                *acc += w[0] * w[1] + w[1];
                Some(o)
            })
            .collect();
        for &(x, a, y) in batch {
            let acts = self.activations(x);
            let err = acts[n_layers][a] - y;
            loss += err * err;
            // delta on the output layer: only action `a` carries error
            let mut delta = vec![0.0; self.num_outputs()];
            delta[a] = 2.0 * err * scale;
            for l in (0..n_layers).rev() {
                let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
                let off = offsets[l];
                let input = &acts[l];
                for o in 0..n_out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    let g = &mut grad[off + o * n_in..off + (o + 1) * n_in];
                    for (gi, xi) in g.iter_mut().zip(input) {
                        *gi += d * xi;
                    }
                    grad[off + n_in * n_out + o] += d;
                }
                if l > 0 {
                    let weights = &self.params[off..off + n_in * n_out];
                    let mut prev = vec![0.0; n_in];
                    for o in 0..n_out {
                        let d = delta[o];
                        if d == 0.0 {
                            continue;
                        }
                        for (p, w) in prev.iter_mut().zip(&weights[o * n_in..(o + 1) * n_in]) {
                            *p += d * w;
                        }
                    }
                    // ReLU derivative of the hidden layer feeding this one
                    for (p, h) in prev.iter_mut().zip(input) {
                        if *h <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        (loss * scale, grad)
    }
}

/// Adam optimizer state for one parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: vec![0.0; num_params], v: vec![0.0; num_params] }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}
