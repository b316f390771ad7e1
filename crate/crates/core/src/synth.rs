//! Ground-truth quasiperiodically driven systems.
//!
//! A torus rotation `theta_{n+1} = theta_n + rho (mod 2 pi)` drives a
//! contracting map additively:
//!
//! ```text
//! x_{n+1} = g_per(theta_n) + g_chaos(x_n)
//! ```
//!
//! The additive form makes `d x_{n+1} / d x_n = g_chaos'(x_n)` independent of
//! `theta` for every chaos family below.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TimeSeries;
use crate::scalar::Real;

/// One lattice term `Re(c_ch exp(i <j, theta>))` of the forcing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingTerm {
    /// Integer lattice vector `j`, one entry per torus angle.
    pub lattice: Vec<i64>,
    /// Complex coefficient per channel as `[re, im]`.
    pub coeffs: Vec<[f64; 2]>,
}

/// Componentwise contraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ChaosMap {
    Zero,
    /// `x -> a x`
    Linear { a: f64 },
    /// `x -> a tanh(b x)`
    Tanh { a: f64, b: f64 },
}

impl ChaosMap {
    /// Global Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            ChaosMap::Zero => 0.0,
            ChaosMap::Linear { a } => a.abs(),
            ChaosMap::Tanh { a, b } => (a * b).abs(),
        }
    }

    /// `sup |g_chaos|`, infinite for unbounded families.
    pub fn sup(&self) -> f64 {
        match *self {
            ChaosMap::Zero => 0.0,
            ChaosMap::Linear { a } if a == 0.0 => 0.0,
            ChaosMap::Linear { .. } => f64::INFINITY,
            ChaosMap::Tanh { a, .. } => a.abs(),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            ChaosMap::Zero => 0.0,
            ChaosMap::Linear { a } => a * x,
            ChaosMap::Tanh { a, b } => a * (b * x).tanh(),
        }
    }

    /// `d/dx` of the map; depends on `x` only.
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            ChaosMap::Zero => 0.0,
            ChaosMap::Linear { a } => a,
            ChaosMap::Tanh { a, b } => {
                let c = (b * x).cosh();
                a * b / (c * c)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Rotation increment per step for each torus angle, radians.
    pub rho: Vec<f64>,
    pub forcing: Vec<ForcingTerm>,
    pub chaos: ChaosMap,
    #[serde(default)]
    pub noise_sd: f64,
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
    #[serde(default)]
    pub burn_in: usize,
    /// Initial angles; zeros when empty.
    #[serde(default)]
    pub theta0: Vec<f64>,
}

impl SynthSpec {
    /// Two-angle benchmark on a grid of `grid` samples with generators at
    /// bins 55 and 89 and `0.5 tanh` chaos.
    pub fn two_torus(grid: usize, n: usize, seed: u64) -> Self {
        let g = grid as f64;
        Self {
            rho: vec![TAU * 55.0 / g, TAU * 89.0 / g],
            forcing: vec![
                ForcingTerm {
                    lattice: vec![1, 0],
                    coeffs: vec![[1.0, 0.0], [0.4, 0.0]],
                },
                ForcingTerm {
                    lattice: vec![0, 1],
                    coeffs: vec![[0.0, -0.5], [0.0, -1.0]],
                },
            ],
            chaos: ChaosMap::Tanh { a: 0.5, b: 1.0 },
            noise_sd: 0.0,
            n,
            dt: 1.0,
            seed,
            burn_in: 500,
            theta0: Vec::new(),
        }
    }

    pub fn channels(&self) -> usize {
        self.forcing.first().map_or(0, |t| t.coeffs.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.is_empty() {
            return Err(Error::InvalidArgument("rho must have at least one angle".into()));
        }
        if let Some(r) = self.rho.iter().find(|r| !(**r > 0.0 && **r < TAU)) {
            return Err(Error::InvalidArgument(format!("rotation {r} outside (0, 2 pi)")));
        }
        if self.forcing.is_empty() || self.channels() == 0 {
            return Err(Error::InvalidArgument("forcing needs at least one term and channel".into()));
        }
        let k = self.channels();
        for t in &self.forcing {
            if t.lattice.len() != self.rho.len() {
                return Err(Error::Shape(format!(
                    "lattice vector {:?} does not match {} angles",
                    t.lattice,
                    self.rho.len()
                )));
            }
            if t.coeffs.len() != k {
                return Err(Error::Shape(format!(
                    "term {:?} has {} coefficients, expected {k}",
                    t.lattice,
                    t.coeffs.len()
                )));
            }
        }
        if !(self.theta0.is_empty() || self.theta0.len() == self.rho.len()) {
            return Err(Error::Shape("theta0 length must match rho".into()));
        }
        if !(self.chaos.lipschitz() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "chaos map is not a contraction (Lipschitz constant {})",
                self.chaos.lipschitz()
            )));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidArgument("noise_sd must be a nonnegative number".into()));
        }
        if self.n < 2 || !(self.dt > 0.0) {
            return Err(Error::InvalidArgument("need n >= 2 and dt > 0".into()));
        }
        Ok(())
    }

    /// `theta_n`, computed directly from the start angles.
    pub fn theta(&self, n: usize) -> Vec<f64> {
        self.rho
            .iter()
            .enumerate()
            .map(|(i, r)| (self.theta0.get(i).copied().unwrap_or(0.0) + n as f64 * r).rem_euclid(TAU))
            .collect()
    }

    pub fn gper(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.channels()];
        for t in &self.forcing {
            let phase: f64 = t.lattice.iter().zip(theta).map(|(j, th)| *j as f64 * th).sum();
            let (s, c) = phase.sin_cos();
            for (o, [re, im]) in out.iter_mut().zip(&t.coeffs) {
                *o += re * c - im * s;
            }
        }
        out
    }

    /// `sup |g_per|` per channel, bounded by the coefficient moduli.
    pub fn gper_bound(&self) -> Vec<f64> {
        (0..self.channels())
            .map(|c| self.forcing.iter().map(|t| t.coeffs[c][0].hypot(t.coeffs[c][1])).sum())
            .collect()
    }

    /// Angular frequency `<j, rho> / dt` of a lattice vector.
    pub fn lattice_frequency(&self, lattice: &[i64]) -> f64 {
        lattice.iter().zip(&self.rho).map(|(j, r)| *j as f64 * r).sum::<f64>() / self.dt
    }
}

/// Exact components of a generated series.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Generator frequencies `rho / dt`.
    pub frequencies: Vec<f64>,
    /// `N x k`: `g_per(theta)` contribution of each output sample.
    pub gper_samples: DMatrix<f64>,
    /// `N x k`: `g_chaos(x_prev)` contribution of each output sample.
    pub chaos_increments: DMatrix<f64>,
    pub seed: u64,
}

/// JSON summary written next to a generated series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthSummary {
    pub frequencies: Vec<f64>,
    pub rho: Vec<f64>,
    pub dt: f64,
    pub forcing: Vec<ForcingTerm>,
    pub chaos: ChaosMap,
    pub noise_sd: f64,
    pub seed: u64,
}

impl GroundTruthSummary {
    pub fn new(spec: &SynthSpec) -> Self {
        Self {
            frequencies: spec.rho.iter().map(|r| r / spec.dt).collect(),
            rho: spec.rho.clone(),
            dt: spec.dt,
            forcing: spec.forcing.clone(),
            chaos: spec.chaos,
            noise_sd: spec.noise_sd,
            seed: spec.seed,
        }
    }
}

/// Iterates the system. Output sample `n` is `x_{burn_in + n + 1}`, produced
/// from `theta_{burn_in + n}`; `x_0 = 0`.
pub fn generate<T: Real>(spec: &SynthSpec) -> Result<(TimeSeries<T>, GroundTruth)> {
    spec.validate()?;
    let k = spec.channels();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let mut x = vec![0.0; k];
    for n in 0..spec.burn_in {
        let g = spec.gper(&spec.theta(n));
        for (xi, gi) in x.iter_mut().zip(g) {
            *xi = gi + spec.chaos.apply(*xi);
        }
    }
    let mut values = DMatrix::zeros(spec.n, k);
    let mut gper_samples = DMatrix::zeros(spec.n, k);
    let mut chaos_increments = DMatrix::zeros(spec.n, k);
    for n in 0..spec.n {
        let g = spec.gper(&spec.theta(spec.burn_in + n));
        for c in 0..k {
            let h = spec.chaos.apply(x[c]);
            x[c] = g[c] + h;
            gper_samples[(n, c)] = g[c];
            chaos_increments[(n, c)] = h;
            let obs = if spec.noise_sd > 0.0 {
                x[c] + noise.sample(&mut rng)
            } else {
                x[c]
            };
            values[(n, c)] = T::lit(obs);
        }
    }
    let ts = TimeSeries::new(values, T::lit(spec.dt))?;
    Ok((
        ts,
        GroundTruth {
            frequencies: spec.rho.iter().map(|r| r / spec.dt).collect(),
            gper_samples,
            chaos_increments,
            seed: spec.seed,
        },
    ))
}
