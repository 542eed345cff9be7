//! Effective capacity under a statistical QoS exponent `θ`.

use super::capacity::{capacity_r1, r_hat, Denominator};
use super::qca::{delta, signal_dof};
use super::quad::{semi_infinite_quad_scaled, QuadratureSpec};
use super::utility::LinkContext;
use crate::{Error, Result};

const NEAR_EQUAL: f64 = 1e-9;
const PERTURBATION: f64 = 1e-6;

/// `n`-th derivative of `O(z) = e^(-βz) Π_i 1/(1 + α_i z)`.
///
/// The product is expanded in partial fractions, each differentiated in
/// closed form and combined with the exponential by the Leibniz rule. A pair
/// of nearly coincident `α` (relative gap below 1e-9) is split by a relative
/// 1e-6 perturbation in both directions and the two results averaged; three
/// or more coincident values would cancel too many digits that way and use
/// the recursion on `ln O` instead.
pub fn o_func_derivative(z: f64, order: usize, alphas: &[f64], beta: f64) -> f64 {
    let alphas: Vec<f64> = alphas.iter().copied().filter(|&a| a > 0.0).collect();
    let ranks: Vec<usize> = (0..alphas.len())
        .map(|i| {
            (0..i)
                .filter(|&j| {
                    let (a, b) = (alphas[i], alphas[j]);
                    (a - b).abs() < NEAR_EQUAL * a.max(b)
                })
                .count()
        })
        .collect();
    if ranks.iter().all(|&r| r == 0) {
        return derivative_distinct(z, order, &alphas, beta);
    }
    if ranks.iter().any(|&r| r >= 2) {
        return derivative_by_log(z, order, &alphas, beta);
    }
    let shifted = |sign: f64| -> Vec<f64> {
        alphas
            .iter()
            .zip(&ranks)
            .map(|(a, &r)| a * (1.0 + sign * PERTURBATION * r as f64))
            .collect()
    };
    0.5 * (derivative_distinct(z, order, &shifted(1.0), beta)
        + derivative_distinct(z, order, &shifted(-1.0), beta))
}

/// Derivatives of `O = exp(g)` from those of `g = -βz - Σ ln(1 + α_i z)`
/// via `O^(n+1) = Σ_k C(n,k) g^(k+1) O^(n-k)`. Every term carries the sign
/// `(-1)^(n+1)`, so the sum never cancels.
fn derivative_by_log(z: f64, order: usize, alphas: &[f64], beta: f64) -> f64 {
    // g[k] = g^(k+1)(z)
    let mut g = vec![0.0; order];
    for (k, gk) in g.iter_mut().enumerate() {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        *gk = sign
            * fact
            * alphas
                .iter()
                .map(|a| (a / (1.0 + a * z)).powi(k as i32 + 1))
                .sum::<f64>();
    }
    if let Some(g0) = g.first_mut() {
        *g0 -= beta;
    }
    let mut o = Vec::with_capacity(order + 1);
    o.push((-beta * z).exp() / alphas.iter().map(|a| 1.0 + a * z).product::<f64>());
    for n in 0..order {
        let mut sum = 0.0;
        let mut binom = 1.0;
        for k in 0..=n {
            sum += binom * g[k] * o[n - k];
            binom = binom * (n - k) as f64 / (k as f64 + 1.0);
        }
        o.push(sum);
    }
    o[order]
}

fn derivative_distinct(z: f64, order: usize, alphas: &[f64], beta: f64) -> f64 {
    // Partial-fraction residues: Π_i 1/(1+α_i z) = Σ_i A_i / (1 + α_i z).
    let residues: Vec<f64> = alphas
        .iter()
        .enumerate()
        .map(|(i, &ai)| {
            alphas
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &aj)| ai / (ai - aj))
                .product()
        })
        .collect();
    // q[k] = d^k/dz^k Π_i 1/(1 + α_i z)
    let mut q = vec![0.0; order + 1];
    if alphas.is_empty() {
        q[0] = 1.0;
    } else {
        for (&a, &r) in alphas.iter().zip(&residues) {
            let base = 1.0 / (1.0 + a * z);
            let mut term = r * base;
            for (k, qk) in q.iter_mut().enumerate() {
                *qk += term;
                term *= -a * (k as f64 + 1.0) * base;
            }
        }
    }
    let mut sum = 0.0;
    let mut binom = 1.0;
    for (k, qk) in q.iter().enumerate() {
        sum += binom * (-beta).powi((order - k) as i32) * qk;
        binom = binom * (order - k) as f64 / (k as f64 + 1.0);
    }
    (-beta * z).exp() * sum
}

/// Effective capacity from the Gamma-type signal model and the exact
/// interference transform (Result 3 form).
pub fn eff_capacity_r3(ctx: &LinkContext, spec: &QuadratureSpec) -> Result<f64> {
    let theta = ctx.theta;
    if theta.is_nan() || theta <= 0.0 {
        return Err(Error::Domain(format!("theta must be > 0, got {theta}")));
    }
    let signal = ctx.signal_scale();
    if signal == 0.0 {
        return Ok(0.0);
    }
    let m = signal_dof(ctx.n_t, ctx.active_count);
    let n_t = ctx.n_t as f64;
    let d = delta(ctx.own_bits(), ctx.n_t)?;
    let scale = signal * (1.0 - d * (n_t - 1.0) / n_t);
    let den = Denominator::new(ctx)?;
    let beta = den.noise / scale;
    let alphas: Vec<f64> = den.coeffs.iter().map(|c| c / scale).collect();
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let gamma_m: f64 = (1..m).map(|k| k as f64).product();
    let pdf =
        |z: f64| sign * z.powi(m as i32 - 1) / gamma_m * o_func_derivative(z, m, &alphas, beta);
    let width = m as f64 / (beta + alphas.iter().sum::<f64>());
    let complement =
        semi_infinite_quad_scaled(|z| pdf(z) * -(-theta * z.ln_1p()).exp_m1(), width, spec)?;
    let value = 1.0 - complement;
    if !(value > -1e-6 && value <= 1.0 + 1e-6) {
        return Err(Error::NumericConsistency(format!(
            "Laplace functional {value} outside (0, 1]"
        )));
    }
    let complement = complement.clamp(0.0, 1.0 - f64::EPSILON);
    Ok(-(-complement).ln_1p() / theta)
}

/// Effective capacity from the second-order expansion
/// `1 - θR̄ + θ²R̂/2`; when that value leaves `(0, 1]` the Result 3 form is
/// returned instead.
pub fn eff_capacity_r4(ctx: &LinkContext, spec: &QuadratureSpec) -> Result<f64> {
    let theta = ctx.theta;
    if theta.is_nan() || theta <= 0.0 {
        return Err(Error::Domain(format!("theta must be > 0, got {theta}")));
    }
    if ctx.signal_scale() == 0.0 {
        return Ok(0.0);
    }
    let mean = capacity_r1(ctx, spec)?;
    let second = r_hat(ctx, spec)?;
    let x = -theta * mean + 0.5 * theta * theta * second;
    let m = 1.0 + x;
    if m > 0.0 && m <= 1.0 {
        Ok(-x.ln_1p() / theta)
    } else {
        eff_capacity_r3(ctx, spec)
    }
}

/// Whether the second-order expansion is usable for `ctx`.
pub fn r4_window_holds(ctx: &LinkContext, spec: &QuadratureSpec) -> Result<bool> {
    let mean = capacity_r1(ctx, spec)?;
    let second = r_hat(ctx, spec)?;
    let m = 1.0 - ctx.theta * mean + 0.5 * ctx.theta * ctx.theta * second;
    Ok(m > 0.0 && m <= 1.0)
}
