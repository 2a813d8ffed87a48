//! Classical stochastic ensemble for cross-validating the high-temperature
//! displacement.
//!
//! The memoryless Langevin velocity with Lorentz force is a linear process,
//! so its one-step propagator is known in closed form: a damped rotation
//! `e^{-gamma dt} [cos(omega_c dt) I + sin(omega_c dt) J]` plus a Gaussian
//! increment whose covariance `(k_B T / m)(1 - e^{-2 gamma dt}) I` makes
//! the discretization exact in distribution (the rotation commutes with
//! isotropic noise). Only the trapezoidal position update carries a step
//! error, of order `dt^2`.
//!
//! The simulator is classical by design: it exists to validate the
//! high-temperature formula from an independent direction, not to model
//! the quantum noise spectrum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{QbmError, Result};
use crate::model::ReducedParams;

/// Particles per reduction chunk. Partial sums are accumulated per chunk
/// and folded in chunk order, so the result is independent of how many
/// threads execute the chunks.
const CHUNK: usize = 256;

/// Ensemble integration setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Time step; bounded by `0.05 / max(gamma, omega_c)` so the position
    /// trapezoid resolves both the damping and the cyclotron arc.
    pub dt: f64,
    pub n_steps: usize,
    pub n_particles: usize,
    /// Root seed; particle `p` draws from stream `p` of this seed.
    pub seed: u64,
    pub params: ReducedParams,
}

impl SimConfig {
    /// Checks the documented invariants.
    ///
    /// # Errors
    /// [`QbmError::Config`] naming the offending field.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(QbmError::Config(format!(
                "dt = {}, must be finite and > 0",
                self.dt
            )));
        }
        let bound = 0.05 / this_scale(&self.params);
        if self.dt > bound {
            return Err(QbmError::Config(format!(
                "dt = {} exceeds the accuracy bound 0.05 / max(gamma, omega_c) = {bound}",
                self.dt
            )));
        }
        if self.n_steps == 0 {
            return Err(QbmError::Config("n_steps = 0, must be >= 1".to_string()));
        }
        if self.n_particles == 0 {
            return Err(QbmError::Config(
                "n_particles = 0, must be >= 1".to_string(),
            ));
        }
        Ok(())
    }
}

fn this_scale(params: &ReducedParams) -> f64 {
    params.gamma.max(params.omega_c)
}

/// Ensemble displacement statistics on the step grid `t_k = k dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    /// Mean of `|r(t) - r(0)|^2` over particles (both transverse
    /// components), length squared.
    pub msd_mean: Vec<f64>,
    /// Standard error of that mean; zero for a single particle.
    pub msd_stderr: Vec<f64>,
}

/// One exact velocity step: damped rotation plus the supplied stochastic
/// increment.
///
/// `J v = (v_y, -v_x)`, so the noiseless map rotates by `-omega_c dt` while
/// contracting by `e^{-gamma dt}`. The caller owns the noise law; pass
/// zeros for the deterministic flow. No validation happens here, the hot
/// loop trusts its [`SimConfig`].
pub fn step_velocity(v: [f64; 2], params: &ReducedParams, dt: f64, noise: [f64; 2]) -> [f64; 2] {
    let damp = (-params.gamma * dt).exp();
    let (sin, cos) = (params.omega_c * dt).sin_cos();
    [
        damp * (cos * v[0] + sin * v[1]) + noise[0],
        damp * (-sin * v[0] + cos * v[1]) + noise[1],
    ]
}

/// Runs the ensemble and reduces displacement statistics.
///
/// Velocities start from the stationary Maxwell distribution at `k_B T =
/// hbar omega_th / 2`; positions advance by the trapezoid `x' = x + (v +
/// v') dt / 2`. Each particle consumes its own counter-based stream of the
/// root seed, and chunk partial sums are folded in index order, so the
/// result is bit-identical for a fixed seed regardless of thread count.
///
/// # Errors
/// [`QbmError::Config`] via [`SimConfig::validate`].
pub fn run_ensemble(config: &SimConfig) -> Result<EnsembleStats> {
    config.validate()?;
    let n_times = config.n_steps + 1;
    let n = config.n_particles;
    let kt_over_m = config.params.thermal_energy() / config.params.mass;
    let sigma_v = kt_over_m.sqrt();
    // 1 - e^{-2 gamma dt} through exp_m1 to keep precision at small steps.
    let sigma_step = (kt_over_m * -(-2.0 * config.params.gamma * config.dt).exp_m1()).sqrt();

    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sum = vec![0.0; n_times];
            let mut sum_sq = vec![0.0; n_times];
            for p in chunk * CHUNK..(n.min((chunk + 1) * CHUNK)) {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(p as u64);
                let mut draw = |scale: f64| -> f64 {
                    let z: f64 = rng.sample(StandardNormal);
                    scale * z
                };
                let mut v = [draw(sigma_v), draw(sigma_v)];
                let mut x = [0.0f64, 0.0f64];
                for k in 1..n_times {
                    let noise = [draw(sigma_step), draw(sigma_step)];
                    let v_next = step_velocity(v, &config.params, config.dt, noise);
                    x[0] += 0.5 * config.dt * (v[0] + v_next[0]);
                    x[1] += 0.5 * config.dt * (v[1] + v_next[1]);
                    v = v_next;
                    let d2 = x[0] * x[0] + x[1] * x[1];
                    sum[k] += d2;
                    sum_sq[k] += d2 * d2;
                }
            }
            (sum, sum_sq)
        })
        .collect();

    let mut sum = vec![0.0; n_times];
    let mut sum_sq = vec![0.0; n_times];
    for (part_sum, part_sq) in partials {
        for k in 0..n_times {
            sum[k] += part_sum[k];
            sum_sq[k] += part_sq[k];
        }
    }

    let nf = n as f64;
    let times = (0..n_times).map(|k| k as f64 * config.dt).collect();
    let msd_mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let msd_stderr = if n > 1 {
        sum_sq
            .iter()
            .zip(&msd_mean)
            .map(|(&sq, &mean)| ((sq - nf * mean * mean).max(0.0) / (nf * (nf - 1.0))).sqrt())
            .collect()
    } else {
        vec![0.0; n_times]
    };
    Ok(EnsembleStats {
        times,
        msd_mean,
        msd_stderr,
    })
}
