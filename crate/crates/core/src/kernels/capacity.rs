//! Ergodic capacity of a limited-feedback link and its second moment.

use super::qca::{delta, delta_hat, signal_dof};
use super::quad::{semi_infinite_quad_scaled, GaussLegendre, QuadratureSpec};
use super::table::JTable;
use super::utility::LinkContext;
use crate::Result;

/// Below this value of `w ρ P` the capacity integrand uses its first-order
/// expansion instead of the cancelling difference `1 - L`.
const TAYLOR_SWITCH: f64 = 1e-6;

/// Noise and residual-interference terms shared by all capacity integrals.
pub(crate) struct Denominator {
    /// `σ² N_t`.
    pub noise: f64,
    /// `ρ̃ P δ` of every interferer with nonzero power.
    pub coeffs: Vec<f64>,
}

impl Denominator {
    pub fn new(ctx: &LinkContext) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(ctx.rho_int.len());
        for ((rho, p), &b) in ctx
            .rho_int
            .iter()
            .zip(&ctx.power_int)
            .zip(ctx.interferer_bits())
        {
            let c = rho * p * delta(b, ctx.n_t)?;
            if c > 0.0 {
                coeffs.push(c);
            }
        }
        Ok(Denominator {
            noise: ctx.sigma2 * ctx.n_t as f64,
            coeffs,
        })
    }

    /// `E exp(-w (σ² N_t + Σ ρ̃ P J))`.
    pub fn laplace(&self, w: f64) -> f64 {
        let mut v = (-self.noise * w).exp();
        for c in &self.coeffs {
            v /= 1.0 + c * w;
        }
        v
    }

    /// Natural width of [`Self::laplace`].
    pub fn scale(&self) -> f64 {
        1.0 / (self.noise + self.coeffs.iter().sum::<f64>())
    }

    /// `E (σ² N_t + Σ ρ̃ P J)^(-1)`.
    pub fn mean_inverse(&self, spec: &QuadratureSpec) -> Result<f64> {
        if self.coeffs.is_empty() {
            return Ok(1.0 / self.noise);
        }
        semi_infinite_quad_scaled(|w| self.laplace(w), self.scale(), spec)
    }
}

/// Ergodic capacity in nats from the rate-splitting integral over the
/// quantization-error density (Result 1 form).
pub fn capacity_r1(ctx: &LinkContext, spec: &QuadratureSpec) -> Result<f64> {
    let signal = ctx.signal_scale();
    if signal == 0.0 {
        return Ok(0.0);
    }
    let m = signal_dof(ctx.n_t, ctx.active_count);
    let table = JTable::get(ctx.own_bits(), ctx.n_t, m)?;
    let d = table.delta();
    let den = Denominator::new(ctx)?;
    let mean_gain = m as f64 * (1.0 - d * (ctx.n_t as f64 - 1.0) / ctx.n_t as f64) + d;
    let v = semi_infinite_quad_scaled(
        |w| {
            let a = w * signal;
            let outer = den.laplace(w);
            if outer == 0.0 {
                0.0
            } else if a < TAYLOR_SWITCH {
                outer * signal * mean_gain
            } else {
                outer * table.one_minus_l(a) / w
            }
        },
        den.scale(),
        spec,
    )?;
    Ok(v.max(0.0))
}

/// Jensen-type capacity `ln(1 + ρ P δ̂ E[1/(σ²N_t + Y)])` (Result 2 form).
pub fn capacity_r2(ctx: &LinkContext, spec: &QuadratureSpec) -> Result<f64> {
    let signal = ctx.signal_scale();
    if signal == 0.0 {
        return Ok(0.0);
    }
    let m = signal_dof(ctx.n_t, ctx.active_count);
    let dh = delta_hat(ctx.own_bits(), ctx.n_t, m)?;
    let inv = Denominator::new(ctx)?.mean_inverse(spec)?;
    Ok((signal * dh * inv).ln_1p())
}

/// Second moment `E[ln²(1 + γ)]` in nats².
///
/// In `y = ln w` coordinates the double integral is analytic in a strip around
/// the real axis and decays at both ends, so a tensor trapezoid rule with step
/// 0.5 converges to near machine precision over the truncated range.
pub fn r_hat(ctx: &LinkContext, _spec: &QuadratureSpec) -> Result<f64> {
    let signal = ctx.signal_scale();
    if signal == 0.0 {
        return Ok(0.0);
    }
    let m = signal_dof(ctx.n_t, ctx.active_count);
    let table = JTable::get(ctx.own_bits(), ctx.n_t, m)?;
    let den = Denominator::new(ctx)?;

    let w_lo = 1e-11 / ((m as f64 + 1.0) * signal);
    let mut w_hi = den.scale();
    for _ in 0..400 {
        if den.laplace(w_hi) < 1e-15 {
            break;
        }
        w_hi *= 2.0;
    }
    if w_hi <= w_lo {
        return Ok(0.0);
    }
    let span = (w_hi / w_lo).ln();
    let n = (span / 0.5).ceil() as usize + 1;
    let h = span / (n - 1) as f64;
    let w: Vec<f64> = (0..n).map(|k| w_lo * (h * k as f64).exp()).collect();
    let oml: Vec<f64> = w.iter().map(|&x| table.one_minus_l(signal * x)).collect();

    let pair = |i: usize, j: usize| {
        let s = w[i] + w[j];
        let d = oml[i] + oml[j] - table.one_minus_l(signal * s);
        if d <= 0.0 {
            0.0
        } else {
            den.laplace(s) * d
        }
    };
    let mut total = 0.0;
    for i in 0..n {
        total += pair(i, i);
        for j in (i + 1)..n {
            total += 2.0 * pair(i, j);
        }
    }
    Ok(total * h * h)
}

/// Second moment on a tensor product of the mapped Gauss–Legendre rule,
/// `w = s·u/(1-u)` on each axis. With `transpose` the roles of the two axes
/// are exchanged; the value must not change beyond rounding.
pub fn r_hat_tensor(ctx: &LinkContext, nodes: usize, transpose: bool) -> Result<f64> {
    let signal = ctx.signal_scale();
    if signal == 0.0 {
        return Ok(0.0);
    }
    let m = signal_dof(ctx.n_t, ctx.active_count);
    let table = JTable::get(ctx.own_bits(), ctx.n_t, m)?;
    let den = Denominator::new(ctx)?;
    let scale = den.scale();
    let rule = GaussLegendre::get(nodes);
    let pts: Vec<(f64, f64, f64)> = rule
        .on(0.0, 1.0)
        .map(|(u, wt)| {
            let w = scale * u / (1.0 - u);
            let jac = wt * scale / ((1.0 - u) * (1.0 - u));
            (w, jac / w, table.one_minus_l(signal * w))
        })
        .collect();
    let integrand = |p: &(f64, f64, f64), q: &(f64, f64, f64)| {
        let s = p.0 + q.0;
        let d = p.2 + q.2 - table.one_minus_l(signal * s);
        if d <= 0.0 {
            0.0
        } else {
            p.1 * q.1 * den.laplace(s) * d
        }
    };
    let mut total = 0.0;
    for a in &pts {
        for b in &pts {
            total += if transpose {
                integrand(b, a)
            } else {
                integrand(a, b)
            };
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::utility::{LinkEnergy, UtilityKind};

    pub(crate) fn fig1(power: f64) -> LinkContext {
        let g = |d: f64| (1.0 + d).powi(-4);
        LinkContext {
            rho_own: g(300.0),
            rho_int: vec![g(400.0), g(500.0)],
            power_own: power,
            power_int: vec![power, power],
            sigma2: 1e-10,
            n_t: 5,
            active_count: 3,
            bit_split: vec![8, 6, 5],
            theta: 1.0,
            energy: LinkEnergy::default(),
            kind: UtilityKind::Wsc,
        }
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn zero_power_gives_zero() {
        let ctx = fig1(0.0);
        assert_eq!(capacity_r1(&ctx, &spec()).unwrap(), 0.0);
        assert_eq!(capacity_r2(&ctx, &spec()).unwrap(), 0.0);
        assert_eq!(r_hat(&ctx, &spec()).unwrap(), 0.0);
        let tiny = fig1(1e-15);
        assert!(capacity_r1(&tiny, &spec()).unwrap() < 1e-9);
    }

    #[test]
    fn r2_isolated_perfect_feedback_closed_form() {
        let ctx = LinkContext::isolated(1e-8, 0.5, 1e-10, 5, 200);
        let v = capacity_r2(&ctx, &spec()).unwrap();
        let m = signal_dof(5, 1) as f64;
        let expect = (0.5 * 1e-8 * m / (1e-10 * 5.0)).ln_1p();
        assert!((v - expect).abs() < 1e-12, "{v} vs {expect}");
    }

    #[test]
    fn r1_perfect_feedback_matches_gamma_expectation() {
        // With δ → 0 the own gain is Gamma(m, 1): E ln(1 + g X) by quadrature.
        let ctx = LinkContext::isolated(1e-8, 0.5, 1e-10, 5, 200);
        let m = signal_dof(5, 1) as i32;
        let g = 0.5 * 1e-8 / (1e-10 * 5.0);
        let fact: f64 = (1..m).map(f64::from).product();
        let expect = crate::kernels::quad::semi_infinite_quad_scaled(
            |x| x.powi(m - 1) * (-x).exp() / fact * (g * x).ln_1p(),
            m as f64,
            &spec(),
        )
        .unwrap();
        let v = capacity_r1(&ctx, &spec()).unwrap();
        assert!((v - expect).abs() / expect < 1e-6, "{v} vs {expect}");
    }

    #[test]
    fn r_hat_rules_agree_and_are_symmetric() {
        for p in [0.1, 1.0, 10.0] {
            let ctx = fig1(p);
            let fast = r_hat(&ctx, &spec()).unwrap();
            let t = r_hat_tensor(&ctx, 128, false).unwrap();
            let tt = r_hat_tensor(&ctx, 128, true).unwrap();
            assert!((t - tt).abs() <= 1e-9 * t.abs(), "{t} vs {tt}");
            assert!((fast - t).abs() / t < 1e-3, "P={p}: {fast} vs {t}");
            let r1 = capacity_r1(&ctx, &spec()).unwrap();
            assert!(fast >= r1 * r1 * 0.999, "second moment below squared mean");
        }
    }

    #[test]
    fn capacities_increase_with_feedback() {
        let mut prev1 = 0.0;
        let mut prev2 = 0.0;
        for b in 0..24 {
            let mut ctx = fig1(1.0);
            ctx.bit_split = vec![8, b, 5];
            let r1 = capacity_r1(&ctx, &spec()).unwrap();
            let r2 = capacity_r2(&ctx, &spec()).unwrap();
            assert!(
                r1 >= prev1 - 1e-9 && r2 >= prev2 - 1e-9,
                "interferer bits {b}"
            );
            prev1 = r1;
            prev2 = r2;
        }
    }
}
