//! Adam over the encoder's parameter blocks.

use alloc::vec::Vec;

use crate::encoder::{EncoderGrads, EncoderParams};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam with inverse-time learning-rate decay: step `t` (0-based) uses
/// `lr / (1 + decay · t)`.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    decay: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(params: &EncoderParams, lr: f64, decay: f64) -> Self {
        let zeros: Vec<Vec<f64>> = params.blocks().iter().map(|b| alloc::vec![0.0; b.len()]).collect();
        Self {
            lr,
            decay,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn current_lr(&self) -> f64 {
        self.lr / (1.0 + self.decay * self.step as f64)
    }

    pub fn step(&mut self, params: &mut EncoderParams, grads: &EncoderGrads) {
        let lr = self.current_lr();
        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - libm::pow(BETA1, f64::from(t));
        let bias2 = 1.0 - libm::pow(BETA2, f64::from(t));
        for (((p, g), m), v) in params
            .blocks_mut()
            .into_iter()
            .zip(grads.blocks())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            for idx in 0..p.len() {
                let gi = g[idx];
                m[idx] = BETA1 * m[idx] + (1.0 - BETA1) * gi;
                v[idx] = BETA2 * v[idx] + (1.0 - BETA2) * gi * gi;
                let m_hat = m[idx] / bias1;
                let v_hat = v[idx] / bias2;
                p[idx] -= lr * m_hat / (libm::sqrt(v_hat) + EPSILON);
            }
        }
    }
}
