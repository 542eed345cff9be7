//! Quantization-cell model of a `B`-bit direction codebook and the
//! signal-strength proxy `δ̂` derived from it.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use super::quad::{adaptive_quad, QuadratureSpec};
use crate::{Error, Result};

/// Support bound `2^(-B/(N_t-1))` of the quantization error `sin²θ`.
pub fn delta(bits: u32, n_t: usize) -> Result<f64> {
    if n_t < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 antennas, got {n_t}"
        )));
    }
    Ok((-(bits as f64) / (n_t as f64 - 1.0)).exp2())
}

/// Degrees of freedom left to the desired signal by zero-forcing towards
/// `active - 1` interferers.
pub fn signal_dof(n_t: usize, active: usize) -> usize {
    n_t + 1 - active
}

/// Density of `sin²θ`: `(N_t-1) x^(N_t-2) / δ^(N_t-1)` on `[0, δ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QcaDensity {
    pub delta: f64,
    pub n_t: usize,
}

impl QcaDensity {
    pub fn new(bits: u32, n_t: usize) -> Result<Self> {
        Ok(QcaDensity {
            delta: delta(bits, n_t)?,
            n_t,
        })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=self.delta).contains(&x) {
            return 0.0;
        }
        let k = self.n_t as f64 - 1.0;
        k * (x / self.delta).powi(self.n_t as i32 - 2) / self.delta
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= self.delta {
            1.0
        } else {
            (x / self.delta).powi(self.n_t as i32 - 1)
        }
    }

    /// `E[sin²θ] = δ (N_t-1)/N_t`.
    pub fn mean(&self) -> f64 {
        self.delta * (self.n_t as f64 - 1.0) / self.n_t as f64
    }
}

/// Upper bound on `E|sin 2θ|` from the density of `|sin 2θ|`, each branch
/// restricted to where its argument `(1 ± √(1-x²))/2` stays inside `[0, δ]`.
///
/// With `x = sin φ` both branches become smooth integrals in `φ`.
pub fn sin2theta_bound(q: &QcaDensity, spec: &QuadratureSpec) -> Result<f64> {
    let d = q.delta;
    let top = d.min(1.0).asin();
    let minus_hi = top.min(2.0 * d.sqrt().min(1.0).asin());
    let minus = adaptive_quad(
        |phi| {
            let s = phi.sin();
            0.5 * s * s * q.pdf((0.5 * phi).sin().powi(2))
        },
        0.0,
        minus_hi,
        spec,
    )?;
    let plus_lo = 2.0 * d.sqrt().min(1.0).acos();
    let plus = if plus_lo < top {
        adaptive_quad(
            |phi| {
                let s = phi.sin();
                0.5 * s * s * q.pdf((0.5 * phi).cos().powi(2))
            },
            plus_lo,
            top,
            spec,
        )?
    } else {
        0.0
    };
    Ok(minus + plus)
}

/// Mean signal-strength term before the monotone envelope:
/// `m(1 - δ(N_t-1)/N_t) + δ + N_t Ê`.
pub fn delta_hat_raw(bits: u32, n_t: usize, dof: usize) -> Result<f64> {
    let q = QcaDensity::new(bits, n_t)?;
    let spec = QuadratureSpec {
        rel_tol: 1e-10,
        abs_tol: 1e-14,
        max_subdivisions: 200,
    };
    let e = sin2theta_bound(&q, &spec)?;
    Ok(dof as f64 * (1.0 - q.mean()) + q.delta + n_t as f64 * e)
}

/// Number of bits beyond which the raw expression is already monotone.
fn envelope_horizon(n_t: usize) -> u32 {
    4 * (n_t as u32 - 1)
}

/// `δ̂` for `bits` of own-direction feedback, `n_t` antennas and `dof`
/// signal degrees of freedom.
///
/// The raw bound over-counts the cross term at coarse quantization and is not
/// monotone in the bit count there; the value returned is the lower monotone
/// envelope `min(dof, min_{b >= bits} raw(b))`, which tends to `dof` as the
/// feedback becomes perfect.
pub fn delta_hat(bits: u32, n_t: usize, dof: usize) -> Result<f64> {
    type Cache = RwLock<HashMap<(u32, usize, usize), f64>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (bits, n_t, dof);
    if let Some(v) = cache.read().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(*v);
    }
    let mut v = dof as f64;
    for b in bits..=bits.max(envelope_horizon(n_t)) {
        v = v.min(delta_hat_raw(b, n_t, dof)?);
    }
    cache
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, v);
    Ok(v)
}
