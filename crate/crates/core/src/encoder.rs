//! Random-code encoder.
//!
//! Items have no features, so each item gets a fixed code `x_i ~ N(0, I)` and
//! a shared one-hidden-layer network maps it to its Gaussian:
//!
//! ```text
//! h     = relu(x_i W + b)
//! mu    = h W_mu + b_mu
//! sigma = exp(h W_sigma + b_sigma)
//! ```
//!
//! Matrices are stored row-major with shape `(fan_in, fan_out)`. Backward
//! recomputes the forward intermediates instead of caching them per item.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::gaussian::GaussianEmbedding;
use crate::rng;

pub const DEFAULT_INPUT_DIM: usize = 50;
pub const DEFAULT_HIDDEN_DIM: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub n: usize,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub out_dim: usize,
    /// Trunk weights, `input_dim × hidden_dim`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    /// Location head, `hidden_dim × out_dim`.
    pub w_mu: Vec<f64>,
    pub b_mu: Vec<f64>,
    /// Scale head, `hidden_dim × out_dim`.
    pub w_sigma: Vec<f64>,
    pub b_sigma: Vec<f64>,
    /// Fixed per-item inputs, `n × input_dim`. Never trained.
    pub codes: Vec<f64>,
}

/// Gradients for every trainable block of [`EncoderParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderGrads {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub w_mu: Vec<f64>,
    pub b_mu: Vec<f64>,
    pub w_sigma: Vec<f64>,
    pub b_sigma: Vec<f64>,
}

impl EncoderGrads {
    pub fn zeros_like(p: &EncoderParams) -> Self {
        Self {
            w: alloc::vec![0.0; p.w.len()],
            b: alloc::vec![0.0; p.b.len()],
            w_mu: alloc::vec![0.0; p.w_mu.len()],
            b_mu: alloc::vec![0.0; p.b_mu.len()],
            w_sigma: alloc::vec![0.0; p.w_sigma.len()],
            b_sigma: alloc::vec![0.0; p.b_sigma.len()],
        }
    }

    pub fn clear(&mut self) {
        for block in self.blocks_mut() {
            block.fill(0.0);
        }
    }

    pub fn blocks(&self) -> [&[f64]; 6] {
        [&self.w, &self.b, &self.w_mu, &self.b_mu, &self.w_sigma, &self.b_sigma]
    }

    pub fn blocks_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.w,
            &mut self.b,
            &mut self.w_mu,
            &mut self.b_mu,
            &mut self.w_sigma,
            &mut self.b_sigma,
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|&v| v == 0.0))
    }
}

/// Intermediates of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    /// Trunk pre-activation `x W + b`.
    pub hidden_pre: Vec<f64>,
    pub mu: Vec<f64>,
    /// Scale-head pre-activation; `sigma = exp(sigma_pre)`.
    pub sigma_pre: Vec<f64>,
    pub sigma: Vec<f64>,
}

fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    libm::sqrt(6.0 / (fan_in + fan_out) as f64)
}

impl EncoderParams {
    /// Xavier-uniform weights, zero biases, standard-normal codes.
    pub fn init(n: usize, out_dim: usize, input_dim: usize, hidden_dim: usize, seed: u64) -> Result<Self> {
        for (what, v) in [("n", n), ("output dim", out_dim), ("input dim", input_dim), ("hidden dim", hidden_dim)] {
            if v == 0 {
                return Err(Error::InvalidArgument(alloc::format!("encoder {what} must be >= 1")));
            }
        }
        let mut rng = rng::stream(seed);
        let codes = (0..n * input_dim)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let mut xavier = |fan_in: usize, fan_out: usize| -> Vec<f64> {
            let a = xavier_bound(fan_in, fan_out);
            // bound is finite and positive for nonzero fans
            let dist = Uniform::new_inclusive(-a, a).expect("valid xavier bound");
            (0..fan_in * fan_out).map(|_| dist.sample(&mut rng)).collect()
        };
        let w = xavier(input_dim, hidden_dim);
        let w_mu = xavier(hidden_dim, out_dim);
        let w_sigma = xavier(hidden_dim, out_dim);
        Ok(Self {
            n,
            input_dim,
            hidden_dim,
            out_dim,
            w,
            b: alloc::vec![0.0; hidden_dim],
            w_mu,
            b_mu: alloc::vec![0.0; out_dim],
            w_sigma,
            b_sigma: alloc::vec![0.0; out_dim],
            codes,
        })
    }

    pub fn with_defaults(n: usize, out_dim: usize, seed: u64) -> Result<Self> {
        Self::init(n, out_dim, DEFAULT_INPUT_DIM, DEFAULT_HIDDEN_DIM, seed)
    }

    pub fn code(&self, i: usize) -> &[f64] {
        &self.codes[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn blocks(&self) -> [&[f64]; 6] {
        [&self.w, &self.b, &self.w_mu, &self.b_mu, &self.w_sigma, &self.b_sigma]
    }

    pub fn blocks_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.w,
            &mut self.b,
            &mut self.w_mu,
            &mut self.b_mu,
            &mut self.w_sigma,
            &mut self.b_sigma,
        ]
    }

    /// Checks that every block has the length its dimensions imply.
    pub fn validate(&self) -> Result<()> {
        let expect = [
            self.input_dim * self.hidden_dim,
            self.hidden_dim,
            self.hidden_dim * self.out_dim,
            self.out_dim,
            self.hidden_dim * self.out_dim,
            self.out_dim,
        ];
        for (block, want) in self.blocks().iter().zip(expect) {
            if block.len() != want {
                return Err(Error::DimensionMismatch {
                    expected: want,
                    actual: block.len(),
                });
            }
        }
        if self.codes.len() != self.n * self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.input_dim,
                actual: self.codes.len(),
            });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        Ok(())
    }

    pub fn activations(&self, i: usize) -> Result<Activations> {
        self.check_index(i)?;
        let (h_dim, d) = (self.hidden_dim, self.out_dim);
        let mut hidden_pre = self.b.clone();
        for (a, &x) in self.code(i).iter().enumerate() {
            let row = &self.w[a * h_dim..(a + 1) * h_dim];
            for (acc, &wv) in hidden_pre.iter_mut().zip(row) {
                *acc += x * wv;
            }
        }
        let mut mu = self.b_mu.clone();
        let mut sigma_pre = self.b_sigma.clone();
        for (u, &pre) in hidden_pre.iter().enumerate() {
            if pre <= 0.0 {
                continue;
            }
            let (rm, rs) = (&self.w_mu[u * d..(u + 1) * d], &self.w_sigma[u * d..(u + 1) * d]);
            for k in 0..d {
                mu[k] += pre * rm[k];
                sigma_pre[k] += pre * rs[k];
            }
        }
        let sigma = sigma_pre.iter().map(|&z| libm::exp(z)).collect();
        Ok(Activations {
            hidden_pre,
            mu,
            sigma_pre,
            sigma,
        })
    }

    pub fn forward(&self, i: usize) -> Result<GaussianEmbedding> {
        let act = self.activations(i)?;
        GaussianEmbedding::new(act.mu, act.sigma)
    }

    /// Gradients of a scalar loss given its gradients wrt `mu` and `sigma`
    /// (post-exp) for item `i`.
    pub fn backward(&self, i: usize, grad_mu: &[f64], grad_sigma: &[f64]) -> Result<EncoderGrads> {
        let mut grads = EncoderGrads::zeros_like(self);
        self.backward_into(i, grad_mu, grad_sigma, &mut grads)?;
        Ok(grads)
    }

    /// Accumulating form of [`backward`](Self::backward).
    pub fn backward_into(&self, i: usize, grad_mu: &[f64], grad_sigma: &[f64], grads: &mut EncoderGrads) -> Result<()> {
        let act = self.activations(i)?;
        for g in [grad_mu, grad_sigma] {
            if g.len() != self.out_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.out_dim,
                    actual: g.len(),
                });
            }
        }
        // d sigma / d sigma_pre = sigma
        let grad_sigma_pre: Vec<f64> = grad_sigma.iter().zip(&act.sigma).map(|(g, s)| g * s).collect();
        self.backward_pre(i, &act.hidden_pre, grad_mu, &grad_sigma_pre, grads);
        Ok(())
    }

    /// Backward from head pre-activation gradients with known trunk
    /// pre-activations. No bounds checks.
    pub(crate) fn backward_pre(
        &self,
        i: usize,
        hidden_pre: &[f64],
        grad_mu: &[f64],
        grad_sigma_pre: &[f64],
        grads: &mut EncoderGrads,
    ) {
        let (h_dim, d) = (self.hidden_dim, self.out_dim);
        for k in 0..d {
            grads.b_mu[k] += grad_mu[k];
            grads.b_sigma[k] += grad_sigma_pre[k];
        }
        let mut grad_hidden_pre = alloc::vec![0.0; h_dim];
        for (u, &pre) in hidden_pre.iter().enumerate() {
            // relu'(0) = 0
            if pre <= 0.0 {
                continue;
            }
            let (rm, rs) = (&self.w_mu[u * d..(u + 1) * d], &self.w_sigma[u * d..(u + 1) * d]);
            let (gm, gs) = (&mut grads.w_mu[u * d..(u + 1) * d], &mut grads.w_sigma[u * d..(u + 1) * d]);
            let mut acc = 0.0;
            for k in 0..d {
                gm[k] += pre * grad_mu[k];
                gs[k] += pre * grad_sigma_pre[k];
                acc += rm[k] * grad_mu[k] + rs[k] * grad_sigma_pre[k];
            }
            grad_hidden_pre[u] = acc;
        }
        for (gb, &g) in grads.b.iter_mut().zip(&grad_hidden_pre) {
            *gb += g;
        }
        for (a, &x) in self.code(i).iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let row = &mut grads.w[a * h_dim..(a + 1) * h_dim];
            for (gw, &g) in row.iter_mut().zip(&grad_hidden_pre) {
                *gw += x * g;
            }
        }
    }

    /// Order-sensitive FNV-1a digest of the code bits.
    pub fn codes_checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.codes {
            for byte in v.to_bits().to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}
