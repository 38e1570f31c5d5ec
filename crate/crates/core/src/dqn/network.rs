//! Two-layer fully connected Q network: linear → ReLU → linear.
//!
//! Weights are stored input-major: `w1[i * hidden + j]` connects input `i` to
//! hidden unit `j`, `w2[j * outputs + a]` connects hidden unit `j` to output
//! `a`.
//!
//! Serialized layout (all little-endian):
//!
//! | bytes | content                           |
//! |-------|-----------------------------------|
//! | 8     | magic `SSQNET01`                  |
//! | 3×8   | `u64` inputs, hidden, outputs     |
//! | ...   | `f64` w1, b1, w2, b2 in order     |

use std::io::{self, Read, Write};

use crate::error::{Error, Result};
use crate::rng::Rng;

pub const MAGIC: [u8; 8] = *b"SSQNET01";

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    inputs: usize,
    hidden: usize,
    outputs: usize,
    pub(crate) w1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    pub(crate) w2: Vec<f64>,
    pub(crate) b2: Vec<f64>,
}

/// Parameter gradients with the same layout as [`QNetwork`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    pub fn flat(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }
}

/// One regression sample: push `Q(input)[action]` toward `target`.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub input: &'a [f64],
    pub action: usize,
    pub target: f64,
}

impl QNetwork {
    pub fn zeros(inputs: usize, hidden: usize, outputs: usize) -> Self {
        Self {
            inputs,
            hidden,
            outputs,
            w1: vec![0.0; inputs * hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden * outputs],
            b2: vec![0.0; outputs],
        }
    }

    /// Weights uniform in `±1/√fan_in`, biases zero.
    pub fn random(inputs: usize, hidden: usize, outputs: usize, rng: &mut Rng) -> Self {
        let mut net = Self::zeros(inputs, hidden, outputs);
        let a1 = 1.0 / (inputs as f64).sqrt();
        let a2 = 1.0 / (hidden as f64).sqrt();
        for w in &mut net.w1 {
            *w = rng.uniform_range(-a1, a1);
        }
        for w in &mut net.w2 {
            *w = rng.uniform_range(-a2, a2);
        }
        net
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// All parameters in serialization order.
    pub fn params(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }

    pub fn param_mut(&mut self, index: usize) -> &mut f64 {
        let mut i = index;
        for block in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            if i < block.len() {
                return &mut block[i];
            }
            i -= block.len();
        }
        panic!("parameter index {index} out of range");
    }

    pub fn set_layer1(&mut self, weights: &[f64], bias: &[f64]) {
        self.w1.copy_from_slice(weights);
        self.b1.copy_from_slice(bias);
    }

    pub fn set_layer2(&mut self, weights: &[f64], bias: &[f64]) {
        self.w2.copy_from_slice(weights);
        self.b2.copy_from_slice(bias);
    }

    fn hidden_pre(&self, input: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.b1);
        for (i, &x) in input.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let row = &self.w1[i * self.hidden..(i + 1) * self.hidden];
            for (o, w) in out.iter_mut().zip(row) {
                *o += x * w;
            }
        }
    }

    fn head(&self, hidden: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.b2);
        for (j, &h) in hidden.iter().enumerate() {
            if h == 0.0 {
                continue;
            }
            let row = &self.w2[j * self.outputs..(j + 1) * self.outputs];
            for (o, w) in out.iter_mut().zip(row) {
                *o += h * w;
            }
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.inputs {
            return Err(Error::Dimension {
                expected: self.inputs,
                got: input.len(),
            });
        }
        let mut h = vec![0.0; self.hidden];
        self.hidden_pre(input, &mut h);
        for v in &mut h {
            *v = v.max(0.0);
        }
        let mut q = vec![0.0; self.outputs];
        self.head(&h, &mut q);
        Ok(q)
    }

    /// Mean squared error over the batch and its gradient.
    pub fn loss_and_grad(&self, batch: &[Sample<'_>]) -> Result<(f64, Gradients)> {
        let mut g = Gradients {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: vec![0.0; self.b2.len()],
        };
        if batch.is_empty() {
            return Ok((0.0, g));
        }
        let scale = 1.0 / batch.len() as f64;
        let mut pre = vec![0.0; self.hidden];
        let mut h = vec![0.0; self.hidden];
        let mut loss = 0.0;
        for s in batch {
            if s.input.len() != self.inputs {
                return Err(Error::Dimension {
                    expected: self.inputs,
                    got: s.input.len(),
                });
            }
            if s.action >= self.outputs {
                return Err(Error::Dimension {
                    expected: self.outputs,
                    got: s.action + 1,
                });
            }
            self.hidden_pre(s.input, &mut pre);
            for (hv, p) in h.iter_mut().zip(&pre) {
                *hv = p.max(0.0);
            }
            let a = s.action;
            let q = self.b2[a]
                + h.iter()
                    .enumerate()
                    .map(|(j, hv)| hv * self.w2[j * self.outputs + a])
                    .sum::<f64>();
            let err = q - s.target;
            loss += err * err * scale;

            let dq = 2.0 * err * scale;
            g.b2[a] += dq;
            for j in 0..self.hidden {
                if pre[j] <= 0.0 {
                    continue;
                }
                g.w2[j * self.outputs + a] += dq * h[j];
                let dh = dq * self.w2[j * self.outputs + a];
                g.b1[j] += dh;
                for (i, &x) in s.input.iter().enumerate() {
                    g.w1[i * self.hidden + j] += dh * x;
                }
            }
        }
        Ok((loss, g))
    }

    pub fn apply_sgd(&mut self, grads: &Gradients, learning_rate: f64) {
        let pairs = [
            (&mut self.w1, &grads.w1),
            (&mut self.b1, &grads.b1),
            (&mut self.w2, &grads.w2),
            (&mut self.b2, &grads.b2),
        ];
        for (params, g) in pairs {
            for (p, d) in params.iter_mut().zip(g) {
                *p -= learning_rate * d;
            }
        }
    }

    pub fn copy_from(&mut self, other: &QNetwork) {
        self.clone_from(other);
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&MAGIC)?;
        for dim in [self.inputs, self.hidden, self.outputs] {
            w.write_all(&(dim as u64).to_le_bytes())?;
        }
        for p in self.params() {
            w.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(32 + 8 * self.param_count());
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let io_err = |e: io::Error| Error::Malformed(format!("network file: {e}"));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io_err)?;
        if magic != MAGIC {
            return Err(Error::Malformed("network file: bad magic".into()));
        }
        let mut word = [0u8; 8];
        let mut dims = [0usize; 3];
        for d in &mut dims {
            r.read_exact(&mut word).map_err(io_err)?;
            *d = u64::from_le_bytes(word) as usize;
        }
        let [inputs, hidden, outputs] = dims;
        if inputs == 0 || hidden == 0 || outputs == 0 || inputs * hidden > 1 << 28 {
            return Err(Error::Malformed(
                "network file: implausible dimensions".into(),
            ));
        }
        let mut net = Self::zeros(inputs, hidden, outputs);
        for i in 0..net.param_count() {
            r.read_exact(&mut word).map_err(io_err)?;
            *net.param_mut(i) = f64::from_le_bytes(word);
        }
        Ok(net)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }
}
