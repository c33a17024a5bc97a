//! Log-domain Sinkhorn: entropic optimal transport and its debiased
//! divergence between uniformly weighted point clouds.
//!
//! The entropic cost `OT_ε` penalizes the KL divergence of the plan against
//! the product measure and is evaluated through the dual value
//! `Σ_i a_i f_i + Σ_j b_j g_j`. The divergence debiases it with the
//! self-transport terms: `S_ε(A,B) = OT_ε(A,B) − ½OT_ε(A,A) − ½OT_ε(B,B)`,
//! which cancels the entropic bias so `S_ε(A,A)` is exactly zero.
//!
//! Iterations that hit the cap report `converged: false` instead of failing;
//! callers decide whether a partially converged value is acceptable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

use super::dist2;

/// Parameters of the entropic transport solves.
#[derive(Debug, Clone, Copy)]
pub struct SinkhornConfig {
    /// Entropic regularization strength in m² (the cost is squared distance).
    pub epsilon: f64,
    /// Upper bound on Sinkhorn iterations per solve.
    pub max_iterations: usize,
    /// Convergence threshold on the largest dual-potential change.
    pub tolerance: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        SinkhornConfig {
            epsilon: 1e-3,
            max_iterations: 500,
            tolerance: 1e-9,
        }
    }
}

impl SinkhornConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::argument(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::argument("max_iterations must be at least 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::argument(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Value of a transport solve plus convergence bookkeeping.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SinkhornOutcome {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Entropic transport cost `OT_ε(A, B)` with uniform weights.
///
/// Always at least the unregularized optimal transport cost, and decreases
/// toward it as `epsilon` decreases.
pub fn entropic_transport_cost(
    a: &PointCloud,
    b: &PointCloud,
    config: &SinkhornConfig,
) -> Result<SinkhornOutcome> {
    config.validate()?;
    Ok(solve(a, b, config))
}

/// Debiased divergence `S_ε(A,B) = OT_ε(A,B) − ½OT_ε(A,A) − ½OT_ε(B,B)`.
pub fn sinkhorn_divergence(
    a: &PointCloud,
    b: &PointCloud,
    config: &SinkhornConfig,
) -> Result<SinkhornOutcome> {
    config.validate()?;
    let cross = solve(a, b, config);
    let self_a = solve(a, a, config);
    let self_b = solve(b, b, config);
    Ok(SinkhornOutcome {
        value: cross.value - 0.5 * self_a.value - 0.5 * self_b.value,
        converged: cross.converged && self_a.converged && self_b.converged,
        iterations: cross
            .iterations
            .max(self_a.iterations)
            .max(self_b.iterations),
    })
}

fn solve(a: &PointCloud, b: &PointCloud, config: &SinkhornConfig) -> SinkhornOutcome {
    let xs = a.points();
    let ys = b.points();
    let (n, m) = (xs.len(), ys.len());
    let inv_eps = 1.0 / config.epsilon;
    let log_a = -(n as f64).ln();
    let log_b = -(m as f64).ln();

    // Row-major squared-distance cost matrix.
    let mut cost = vec![0.0f64; n * m];
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            cost[i * m + j] = dist2(x, y);
        }
    }

    let mut f = vec![0.0f64; n];
    let mut g = vec![0.0f64; m];
    let mut scratch = vec![0.0f64; n.max(m)];
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.max_iterations {
        iterations += 1;
        let mut delta = 0.0f64;

        // g_j = −ε · LSE_i( log a_i + (f_i − C_ij)/ε )
        for j in 0..m {
            for i in 0..n {
                scratch[i] = log_a + (f[i] - cost[i * m + j]) * inv_eps;
            }
            let new_g = -config.epsilon * log_sum_exp(&scratch[..n]);
            delta = delta.max((new_g - g[j]).abs());
            g[j] = new_g;
        }
        // f_i = −ε · LSE_j( log b_j + (g_j − C_ij)/ε )
        for i in 0..n {
            let row = &cost[i * m..(i + 1) * m];
            for j in 0..m {
                scratch[j] = log_b + (g[j] - row[j]) * inv_eps;
            }
            let new_f = -config.epsilon * log_sum_exp(&scratch[..m]);
            delta = delta.max((new_f - f[i]).abs());
            f[i] = new_f;
        }

        if delta < config.tolerance {
            converged = true;
            break;
        }
    }

    let mean_f = f.iter().sum::<f64>() / n as f64;
    let mean_g = g.iter().sum::<f64>() / m as f64;
    SinkhornOutcome {
        value: mean_f + mean_g,
        converged,
        iterations,
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
