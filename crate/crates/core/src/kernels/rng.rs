//! Seedable sampler suite.
//!
//! A master seed plus a stream id identify every random stream in the
//! toolkit (one per replicate, per study, per purpose), so simulation and
//! initialization are reproducible bit-for-bit and workers never share a
//! stream.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution, Gamma, Normal, Poisson};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RngSuite {
    seed: u64,
}

impl RngSuite {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent sampler for the given stream id.
    pub fn stream(&self, id: u64) -> Sampler {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(id.into());
        Sampler { rng }
    }
}

pub struct Sampler {
    rng: ChaCha12Rng,
}

impl Sampler {
    pub fn rng(&mut self) -> &mut ChaCha12Rng {
        &mut self.rng
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn standard_normal(&mut self) -> f64 {
        rand_distr::StandardNormal.sample(&mut self.rng)
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> Result<f64> {
        let d = Normal::new(mean, sd)
            .map_err(|e| Error::domain("normal", format!("mean {mean}, sd {sd}: {e}")))?;
        Ok(d.sample(&mut self.rng))
    }

    /// Gamma with shape/rate parameterization.
    pub fn gamma(&mut self, shape: f64, rate: f64) -> Result<f64> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::domain("gamma", format!("rate must be positive, got {rate}")));
        }
        let d = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::domain("gamma", format!("shape {shape}: {e}")))?;
        Ok(d.sample(&mut self.rng))
    }

    pub fn poisson(&mut self, lambda: f64) -> Result<u64> {
        if lambda == 0.0 {
            return Ok(0);
        }
        let d = Poisson::new(lambda)
            .map_err(|e| Error::domain("poisson", format!("lambda {lambda}: {e}")))?;
        let v: f64 = d.sample(&mut self.rng);
        Ok(v as u64)
    }

    pub fn bernoulli(&mut self, p: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain("bernoulli", format!("p must lie in [0,1], got {p}")));
        }
        Ok(self.rng.random::<f64>() < p)
    }

    /// Dirichlet draw via normalized Gamma variates.
    pub fn dirichlet(&mut self, alpha: &[f64]) -> Result<Vec<f64>> {
        if alpha.is_empty() {
            return Err(Error::domain("dirichlet", "concentration vector is empty"));
        }
        loop {
            let mut draws = Vec::with_capacity(alpha.len());
            let mut sum = 0.0;
            for &a in alpha {
                let g = self.gamma(a, 1.0)?;
                sum += g;
                draws.push(g);
            }
            // Tiny concentrations can underflow every component; redraw.
            if sum > 0.0 {
                for d in &mut draws {
                    *d /= sum;
                }
                return Ok(draws);
            }
        }
    }

    /// Multinomial draw by conditional binomial splitting.
    pub fn multinomial(&mut self, n: u64, probs: &[f64]) -> Result<Vec<u64>> {
        if probs.is_empty() {
            return Err(Error::domain("multinomial", "probability vector is empty"));
        }
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) || probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::domain(
                "multinomial",
                "probabilities must be non-negative with positive sum",
            ));
        }
        let mut out = vec![0u64; probs.len()];
        let mut remaining = n;
        let mut rest = total;
        for (r, &p) in probs.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            if r + 1 == probs.len() {
                out[r] = remaining;
                break;
            }
            let frac = (p / rest).clamp(0.0, 1.0);
            let draw = if frac >= 1.0 {
                remaining
            } else {
                Binomial::new(remaining, frac)
                    .map_err(|e| Error::domain("multinomial", e.to_string()))?
                    .sample(&mut self.rng)
            };
            out[r] = draw;
            remaining -= draw;
            rest -= p;
        }
        Ok(out)
    }
}
