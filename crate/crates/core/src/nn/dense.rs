use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Rng;

/// Fully connected regressor: `layers` tanh hidden layers of equal width and
/// a linear scalar head.
///
/// Parameters live in one flat vector. Hidden layer `l` stores its weight
/// matrix row-major (`nodes x fan_in`) followed by its bias; the head stores
/// `nodes` weights and one bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    pub input_dim: usize,
    pub layers: usize,
    pub nodes: usize,
    pub params: Vec<f64>,
}

/// Activations kept from a forward pass for backpropagation.
pub(crate) struct DenseTrace {
    /// Layer inputs: `inputs[0]` is the record, `inputs[l]` the (dropped-out)
    /// output of hidden layer `l - 1`. The last entry feeds the head.
    inputs: Vec<Vec<f64>>,
    /// tanh outputs before dropout.
    tanh: Vec<Vec<f64>>,
    /// Inverted-dropout multipliers, empty when no dropout was applied.
    masks: Vec<Vec<f64>>,
    pub output: f64,
}

impl DenseNet {
    pub fn n_params_for(input_dim: usize, layers: usize, nodes: usize) -> usize {
        let first = nodes * input_dim + nodes;
        let rest = (layers - 1) * (nodes * nodes + nodes);
        first + rest + nodes + 1
    }

    pub fn zeros(input_dim: usize, layers: usize, nodes: usize) -> Result<Self> {
        if input_dim == 0 || layers == 0 || nodes == 0 {
            return Err(Error::Config(format!(
                "dense net needs positive sizes, got input {input_dim}, layers {layers}, nodes {nodes}"
            )));
        }
        Ok(DenseNet {
            input_dim,
            layers,
            nodes,
            params: vec![0.0; Self::n_params_for(input_dim, layers, nodes)],
        })
    }

    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` weights and zero biases.
    pub fn init(input_dim: usize, layers: usize, nodes: usize, rng: &mut Rng) -> Result<Self> {
        let mut net = Self::zeros(input_dim, layers, nodes)?;
        let mut off = 0;
        for l in 0..=layers {
            let fan_in = net.fan_in(l);
            let rows = if l == layers { 1 } else { nodes };
            let bound = 1.0 / (fan_in as f64).sqrt();
            for w in &mut net.params[off..off + rows * fan_in] {
                *w = rng.gen_range(-bound..bound);
            }
            off += rows * fan_in + rows;
        }
        debug_assert_eq!(off, net.params.len());
        Ok(net)
    }

    fn fan_in(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input_dim
        } else {
            self.nodes
        }
    }

    /// Offset of layer `l`'s weights; `l == layers` is the head.
    fn offset(&self, layer: usize) -> usize {
        (0..layer)
            .map(|l| self.nodes * self.fan_in(l) + self.nodes)
            .sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension {
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Inference-mode prediction.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.trace(x, 0.0, None).output)
    }

    /// Training-mode prediction: inverted dropout with a fresh mask from
    /// `rng` on every hidden layer output.
    pub fn forward_dropout(&self, x: &[f64], dropout: f64, rng: &mut Rng) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.trace(x, dropout, Some(rng)).output)
    }

    /// Forward pass keeping activations. Dropout is applied to every hidden
    /// layer output when `rng` is given and `dropout > 0`.
    pub(crate) fn trace(&self, x: &[f64], dropout: f64, mut rng: Option<&mut Rng>) -> DenseTrace {
        let mut inputs = Vec::with_capacity(self.layers + 1);
        let mut tanh = Vec::with_capacity(self.layers);
        let mut masks = Vec::new();
        inputs.push(x.to_vec());
        let mut off = 0;
        for l in 0..self.layers {
            let fan_in = self.fan_in(l);
            let w = &self.params[off..off + self.nodes * fan_in];
            let b = &self.params[off + self.nodes * fan_in..off + self.nodes * fan_in + self.nodes];
            let a = inputs.last().expect("input pushed");
            let h: Vec<f64> = (0..self.nodes)
                .map(|j| (dot(&w[j * fan_in..(j + 1) * fan_in], a) + b[j]).tanh())
                .collect();
            let out = match rng.as_deref_mut() {
                Some(r) if dropout > 0.0 => {
                    let keep = 1.0 - dropout;
                    let mask: Vec<f64> = (0..self.nodes)
                        .map(|_| {
                            if r.gen::<f64>() < dropout {
                                0.0
                            } else {
                                1.0 / keep
                            }
                        })
                        .collect();
                    let out = h.iter().zip(&mask).map(|(v, m)| v * m).collect();
                    masks.push(mask);
                    out
                }
                _ => h.clone(),
            };
            tanh.push(h);
            inputs.push(out);
            off += self.nodes * fan_in + self.nodes;
        }
        let head = &self.params[off..off + self.nodes];
        let output =
            dot(head, inputs.last().expect("hidden output")) + self.params[off + self.nodes];
        DenseTrace {
            inputs,
            tanh,
            masks,
            output,
        }
    }

    /// Adds `d_out * d(output)/d(params)` into `grad`.
    pub(crate) fn backward(&self, trace: &DenseTrace, d_out: f64, grad: &mut [f64]) {
        let head_off = self.offset(self.layers);
        let last = &trace.inputs[self.layers];
        for j in 0..self.nodes {
            grad[head_off + j] += d_out * last[j];
        }
        grad[head_off + self.nodes] += d_out;
        let mut delta: Vec<f64> = self.params[head_off..head_off + self.nodes]
            .iter()
            .map(|w| w * d_out)
            .collect();
        for l in (0..self.layers).rev() {
            let fan_in = self.fan_in(l);
            let off = self.offset(l);
            // Through dropout and tanh.
            for j in 0..self.nodes {
                if let Some(mask) = trace.masks.get(l) {
                    delta[j] *= mask[j];
                }
                let t = trace.tanh[l][j];
                delta[j] *= 1.0 - t * t;
            }
            let a = &trace.inputs[l];
            for j in 0..self.nodes {
                let row = &mut grad[off + j * fan_in..off + (j + 1) * fan_in];
                for (g, x) in row.iter_mut().zip(a) {
                    *g += delta[j] * x;
                }
                grad[off + self.nodes * fan_in + j] += delta[j];
            }
            if l > 0 {
                let w = &self.params[off..off + self.nodes * fan_in];
                let mut prev = vec![0.0; fan_in];
                for j in 0..self.nodes {
                    for (p, wij) in prev.iter_mut().zip(&w[j * fan_in..(j + 1) * fan_in]) {
                        *p += delta[j] * wij;
                    }
                }
                delta = prev;
            }
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
