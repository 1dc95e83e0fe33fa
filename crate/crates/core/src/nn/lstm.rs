use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::dense::dot;
use crate::error::{Error, Result};
use crate::seed::Rng;

/// Single-layer many-to-many LSTM with a shared linear head.
///
/// Layout of `params`: gate weights `W` (`4H x (D + H)`, row-major, acting on
/// `[x_t, h_{t-1}]`, gate blocks in the order input, forget, candidate,
/// output), gate biases (`4H`), head weights (`H`), head bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmNet {
    pub input_dim: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
}

struct Step {
    z: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
    /// `h` after dropout, as seen by the head.
    h_head: Vec<f64>,
    mask: Option<Vec<f64>>,
}

pub(crate) struct LstmTrace {
    steps: Vec<Step>,
    pub outputs: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmNet {
    pub fn n_params_for(input_dim: usize, hidden: usize) -> usize {
        4 * hidden * (input_dim + hidden) + 4 * hidden + hidden + 1
    }

    pub fn zeros(input_dim: usize, hidden: usize) -> Result<Self> {
        if input_dim == 0 || hidden == 0 {
            return Err(Error::Config(format!(
                "lstm needs positive sizes, got input {input_dim}, hidden {hidden}"
            )));
        }
        Ok(LstmNet {
            input_dim,
            hidden,
            params: vec![0.0; Self::n_params_for(input_dim, hidden)],
        })
    }

    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` weights, zero biases
    /// except a forget-gate bias of 1.
    pub fn init(input_dim: usize, hidden: usize, rng: &mut Rng) -> Result<Self> {
        let mut net = Self::zeros(input_dim, hidden)?;
        let width = input_dim + hidden;
        let bound = 1.0 / (width as f64).sqrt();
        let n_w = 4 * hidden * width;
        for w in &mut net.params[..n_w] {
            *w = rng.gen_range(-bound..bound);
        }
        for b in &mut net.params[n_w + hidden..n_w + 2 * hidden] {
            *b = 1.0;
        }
        let head_bound = 1.0 / (hidden as f64).sqrt();
        let head = n_w + 4 * hidden;
        for w in &mut net.params[head..head + hidden] {
            *w = rng.gen_range(-head_bound..head_bound);
        }
        Ok(net)
    }

    fn width(&self) -> usize {
        self.input_dim + self.hidden
    }

    fn bias_offset(&self) -> usize {
        4 * self.hidden * self.width()
    }

    fn head_offset(&self) -> usize {
        self.bias_offset() + 4 * self.hidden
    }

    fn check(&self, seq: &[Vec<f64>]) -> Result<()> {
        if seq.is_empty() {
            return Err(Error::Domain("lstm input sequence is empty".into()));
        }
        if let Some(bad) = seq.iter().find(|x| x.len() != self.input_dim) {
            return Err(Error::Dimension {
                expected: self.input_dim,
                actual: bad.len(),
            });
        }
        Ok(())
    }

    /// Inference-mode outputs, one per input step.
    pub fn forward(&self, seq: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check(seq)?;
        Ok(self.trace(seq, 0.0, None).outputs)
    }

    /// Training-mode outputs: inverted dropout on the hidden state seen by
    /// the head, a fresh mask per step.
    pub fn forward_dropout(
        &self,
        seq: &[Vec<f64>],
        dropout: f64,
        rng: &mut Rng,
    ) -> Result<Vec<f64>> {
        self.check(seq)?;
        Ok(self.trace(seq, dropout, Some(rng)).outputs)
    }

    pub(crate) fn trace(
        &self,
        seq: &[Vec<f64>],
        dropout: f64,
        mut rng: Option<&mut Rng>,
    ) -> LstmTrace {
        let hn = self.hidden;
        let width = self.width();
        let w = &self.params[..self.bias_offset()];
        let b = &self.params[self.bias_offset()..self.head_offset()];
        let head = &self.params[self.head_offset()..self.head_offset() + hn];
        let head_b = self.params[self.head_offset() + hn];
        let mut h = vec![0.0; hn];
        let mut c = vec![0.0; hn];
        let mut steps = Vec::with_capacity(seq.len());
        let mut outputs = Vec::with_capacity(seq.len());
        for x in seq {
            let mut z = Vec::with_capacity(width);
            z.extend_from_slice(x);
            z.extend_from_slice(&h);
            let pre = |row: usize| dot(&w[row * width..(row + 1) * width], &z) + b[row];
            let i: Vec<f64> = (0..hn).map(|j| sigmoid(pre(j))).collect();
            let f: Vec<f64> = (0..hn).map(|j| sigmoid(pre(hn + j))).collect();
            let g: Vec<f64> = (0..hn).map(|j| pre(2 * hn + j).tanh()).collect();
            let o: Vec<f64> = (0..hn).map(|j| sigmoid(pre(3 * hn + j))).collect();
            let c_prev = c.clone();
            for j in 0..hn {
                c[j] = f[j] * c_prev[j] + i[j] * g[j];
            }
            let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
            for j in 0..hn {
                h[j] = o[j] * tanh_c[j];
            }
            let mask = match rng.as_deref_mut() {
                Some(r) if dropout > 0.0 => Some(
                    (0..hn)
                        .map(|_| {
                            if r.gen::<f64>() < dropout {
                                0.0
                            } else {
                                1.0 / (1.0 - dropout)
                            }
                        })
                        .collect::<Vec<f64>>(),
                ),
                _ => None,
            };
            let h_head: Vec<f64> = match &mask {
                Some(m) => h.iter().zip(m).map(|(a, b)| a * b).collect(),
                None => h.clone(),
            };
            outputs.push(dot(head, &h_head) + head_b);
            steps.push(Step {
                z,
                i,
                f,
                g,
                o,
                c_prev,
                tanh_c,
                h_head,
                mask,
            });
        }
        LstmTrace { steps, outputs }
    }

    /// Backpropagation through time: adds `sum_t d_out[t] * d(y_t)/d(params)`
    /// into `grad`.
    pub(crate) fn backward(&self, trace: &LstmTrace, d_out: &[f64], grad: &mut [f64]) {
        let hn = self.hidden;
        let width = self.width();
        let b_off = self.bias_offset();
        let h_off = self.head_offset();
        let mut dh_next = vec![0.0; hn];
        let mut dc_next = vec![0.0; hn];
        let mut da = vec![0.0; 4 * hn];
        for (step, &dy) in trace.steps.iter().zip(d_out).rev() {
            for j in 0..hn {
                grad[h_off + j] += dy * step.h_head[j];
            }
            grad[h_off + hn] += dy;
            for j in 0..hn {
                let dh = dh_next[j]
                    + dy * self.params[h_off + j] * step.mask.as_ref().map_or(1.0, |m| m[j]);
                let (i, f, g, o, tc) = (step.i[j], step.f[j], step.g[j], step.o[j], step.tanh_c[j]);
                let d_o = dh * tc;
                let dc = dc_next[j] + dh * o * (1.0 - tc * tc);
                da[j] = dc * g * i * (1.0 - i);
                da[hn + j] = dc * step.c_prev[j] * f * (1.0 - f);
                da[2 * hn + j] = dc * i * (1.0 - g * g);
                da[3 * hn + j] = d_o * o * (1.0 - o);
                dc_next[j] = dc * f;
            }
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            for (row, &d) in da.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let wrow = row * width;
                for (k, zk) in step.z.iter().enumerate() {
                    grad[wrow + k] += d * zk;
                }
                grad[b_off + row] += d;
                let recurrent = &self.params[wrow + self.input_dim..wrow + self.input_dim + hn];
                for (dh, w) in dh_next.iter_mut().zip(recurrent) {
                    *dh += d * w;
                }
            }
        }
    }
}
