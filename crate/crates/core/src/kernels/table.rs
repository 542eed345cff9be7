//! Cached evaluation of the own-signal Laplace transform
//! `J(a) = E[(1 + a(1 - x))^(-m)]`, `x` drawn from the quantization-error density.
//!
//! Capacity and second-moment integrals query `J` at thousands of points per
//! link, so each `(bits, N_t, m)` triple gets a log-spaced table with exact
//! derivatives, interpolated by cubic Hermite polynomials in `ln a`. Values are
//! stored as `ln J` and `ln(1 - J)` so that both `J` and its complement keep
//! full relative precision.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::qca::QcaDensity;
use super::quad::{adaptive_quad, QuadratureSpec};
use crate::{Error, Result};

const LN_A_MIN: f64 = -18.420_680_743_952_367; // ln 1e-8
const DECADES: usize = 24;
const PER_DECADE: usize = 32;

#[derive(Debug)]
pub struct JTable {
    delta: f64,
    dof: f64,
    mean_y: f64,
    mean_y2: f64,
    step: f64,
    ln_j: Vec<f64>,
    d_ln_j: Vec<f64>,
    ln_c: Vec<f64>,
    d_ln_c: Vec<f64>,
}

/// Table entries are only interpolated to about 1e-8, so a quadrature that
/// stalls at the rounding floor with an error estimate well below that is
/// accepted.
fn table_quad<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    match adaptive_quad(f, a, b, spec) {
        Err(Error::Accuracy {
            estimate, error, ..
        }) if error <= 1e-9 * estimate.abs() => Ok(estimate),
        other => other,
    }
}

/// `∫_0^δ f(x, 1 - x) dx`. Up to `x = 1/2` the integral runs in `x`; beyond
/// it runs in `y = 1 - x`, with breakpoints accumulating at the lower end so
/// features of width `1/a` next to `y = 0` (large `a`, `δ` near 1) are
/// resolved.
fn split_quad(q: &QcaDensity, f: &dyn Fn(f64, f64) -> f64, spec: &QuadratureSpec) -> Result<f64> {
    let d = q.delta;
    let head = table_quad(|x| f(x, 1.0 - x), 0.0, d.min(0.5), spec)?;
    if d <= 0.5 {
        return Ok(head);
    }
    let lo = 1.0 - d;
    let mut cuts = vec![lo];
    cuts.extend((0..=24).rev().map(|k| lo + (0.5 - lo) * 10f64.powi(-k)));
    let tail: Result<f64> = cuts
        .windows(2)
        .map(|w| table_quad(|y| f(1.0 - y, y), w[0], w[1], spec))
        .sum();
    Ok(head + tail?)
}

impl JTable {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn build(bits: u32, n_t: usize, dof: usize) -> Result<Self> {
        let q = QcaDensity::new(bits, n_t)?;
        let m = dof as f64;
        let spec = QuadratureSpec {
            rel_tol: 1e-11,
            abs_tol: 1e-300,
            max_subdivisions: 400,
        };
        let n = DECADES * PER_DECADE + 1;
        let step = std::f64::consts::LN_10 / PER_DECADE as f64;
        let mut table = JTable {
            delta: q.delta,
            dof: m,
            mean_y: 1.0 - q.mean(),
            mean_y2: {
                let k = n_t as f64;
                let ex2 = q.delta * q.delta * (k - 1.0) / (k + 1.0);
                1.0 - 2.0 * q.mean() + ex2
            },
            step,
            ln_j: Vec::with_capacity(n),
            d_ln_j: Vec::with_capacity(n),
            ln_c: Vec::with_capacity(n),
            d_ln_c: Vec::with_capacity(n),
        };
        let quad = |f: &dyn Fn(f64, f64) -> f64| split_quad(&q, f, &spec);
        for k in 0..n {
            let a = (LN_A_MIN + step * k as f64).exp();
            let j = quad(&|x, y| q.pdf(x) * (-m * (a * y).ln_1p()).exp())?;
            let c = quad(&|x, y| q.pdf(x) * -(-m * (a * y).ln_1p()).exp_m1())?;
            let dj = quad(&|x, y| -m * q.pdf(x) * y * (-(m + 1.0) * (a * y).ln_1p()).exp())?;
            table.ln_j.push(j.ln());
            table.d_ln_j.push(a * dj / j);
            table.ln_c.push(c.ln());
            table.d_ln_c.push(-a * dj / c);
        }
        Ok(table)
    }

    /// Shared table for one quantizer and signal dimension.
    pub fn get(bits: u32, n_t: usize, dof: usize) -> Result<Arc<JTable>> {
        type Cache = RwLock<HashMap<(u32, usize, usize), Arc<JTable>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = (bits, n_t, dof);
        if let Some(t) = cache.read().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(Self::build(bits, n_t, dof)?);
        Ok(cache
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .entry(key)
            .or_insert(table)
            .clone())
    }

    /// `(J(a), 1 - J(a))` for `a >= 0`.
    pub fn eval(&self, a: f64) -> (f64, f64) {
        if a <= 0.0 {
            return (1.0, 0.0);
        }
        let y = a.ln();
        let pos = (y - LN_A_MIN) / self.step;
        if pos < 0.0 {
            let m = self.dof;
            let c = m * a * self.mean_y - 0.5 * m * (m + 1.0) * a * a * self.mean_y2;
            return (1.0 - c, c);
        }
        let last = self.ln_j.len() - 1;
        if pos >= last as f64 {
            let dy = y - (LN_A_MIN + self.step * last as f64);
            let j = (self.ln_j[last] + self.d_ln_j[last] * dy).exp();
            return (j, 1.0 - j);
        }
        let k = pos as usize;
        let t = pos - k as f64;
        let h = self.step;
        let herm = |v: &[f64], d: &[f64]| {
            let t2 = t * t;
            let t3 = t2 * t;
            (2.0 * t3 - 3.0 * t2 + 1.0) * v[k]
                + (t3 - 2.0 * t2 + t) * h * d[k]
                + (-2.0 * t3 + 3.0 * t2) * v[k + 1]
                + (t3 - t2) * h * d[k + 1]
        };
        if self.ln_j[k] < -std::f64::consts::LN_2 {
            let j = herm(&self.ln_j, &self.d_ln_j).exp();
            (j, 1.0 - j)
        } else {
            let c = herm(&self.ln_c, &self.d_ln_c).exp();
            (1.0 - c, c)
        }
    }

    /// `1 - L(a)` with `L(a) = J(a) / (1 + a δ)`: the complement of the
    /// Laplace transform of the approximate own-signal gain.
    pub fn one_minus_l(&self, a: f64) -> f64 {
        let (_, c) = self.eval(a);
        let ad = a * self.delta;
        (c + ad) / (1.0 + ad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(bits: u32, n_t: usize, dof: usize, a: f64) -> (f64, f64) {
        let q = QcaDensity::new(bits, n_t).unwrap();
        let m = dof as f64;
        let spec = QuadratureSpec {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            max_subdivisions: 400,
        };
        // x up to min(δ, 1/2), then y = 1 - x with geometric breakpoints
        let d = q.delta;
        let piecewise = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
            let mut v = adaptive_quad(|x| f(x, 1.0 - x), 0.0, d.min(0.5), &spec).unwrap();
            if d > 0.5 {
                let lo = 1.0 - d;
                let mut cuts = vec![lo];
                cuts.extend((0..=24).rev().map(|k| lo + (0.5 - lo) * 10f64.powi(-k)));
                for w in cuts.windows(2) {
                    v += adaptive_quad(|y| f(1.0 - y, y), w[0], w[1], &spec).unwrap();
                }
            }
            v
        };
        let j = piecewise(&|x, y| q.pdf(x) * (1.0 + a * y).powf(-m));
        let c = piecewise(&|x, y| q.pdf(x) * -(-m * (a * y).ln_1p()).exp_m1());
        (j, c)
    }

    #[test]
    fn interpolation_matches_direct_quadrature() {
        for (bits, n_t, dof) in [(8, 5, 3), (0, 5, 5), (3, 8, 6), (20, 4, 1)] {
            let t = JTable::get(bits, n_t, dof).unwrap();
            for &a in &[
                1e-12, 3e-9, 1e-5, 0.37, 1.0, 2.9, 41.0, 1e3, 7.7e6, 1e12, 1e17,
            ] {
                let (j, c) = t.eval(a);
                let (dj, dc) = direct(bits, n_t, dof, a);
                let tol = if a > 1e16 { 1e-3 } else { 1e-7 };
                assert!(
                    ((j - dj) / dj).abs() < tol,
                    "J bits={bits} a={a}: {j} vs {dj}"
                );
                assert!(
                    ((c - dc) / dc).abs() < tol,
                    "1-J bits={bits} a={a}: {c} vs {dc}"
                );
            }
        }
    }

    #[test]
    fn complement_is_consistent() {
        let t = JTable::get(6, 5, 3).unwrap();
        for k in 0..200 {
            let a = 10f64.powf(-9.0 + k as f64 * 0.1);
            let (j, c) = t.eval(a);
            assert!((j + c - 1.0).abs() < 1e-12);
            assert!(j > 0.0 && j <= 1.0);
        }
    }
}
