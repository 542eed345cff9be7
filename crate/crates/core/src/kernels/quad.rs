//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite ranges, plus
//! fixed Gauss–Legendre rules.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::{Error, Result};

/// Error control for every adaptive integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-7,
            abs_tol: 1e-12,
            max_subdivisions: 500,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("quadrature tolerances must be > 0".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("quad_max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

/// One 15-point Kronrod evaluation with the QUADPACK error heuristic.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        a,
        b,
        value,
        error,
        abs_value: res_abs,
    }
}

/// Globally adaptive integral of `f` over `[a, b]`.
pub fn adaptive_quad<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut segments = vec![gk15(&mut f, a, b)];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let abs_value: f64 = segments.iter().map(|s| s.abs_value).sum();
        if !value.is_finite() {
            return Err(Error::Accuracy {
                estimate: value,
                error,
                subdivisions: segments.len(),
            });
        }
        let target = (spec.rel_tol * value.abs())
            .max(spec.abs_tol)
            .max(50.0 * f64::EPSILON * abs_value);
        if error <= target {
            return Ok(value);
        }
        if segments.len() >= spec.max_subdivisions {
            return Err(Error::Accuracy {
                estimate: value,
                error,
                subdivisions: segments.len(),
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // Interval exhausted at machine precision; keep it as converged.
            segments.push(Segment { error: 0.0, ..s });
            continue;
        }
        segments.push(gk15(&mut f, s.a, mid));
        segments.push(gk15(&mut f, mid, s.b));
    }
}

/// `∫_0^∞ f(w) dw` through the map `w = u / (1 - u)`.
pub fn semi_infinite_quad<F: FnMut(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    semi_infinite_quad_scaled(f, 1.0, spec)
}

/// `∫_0^∞ f(w) dw` through `w = s·u / (1 - u)`; `scale` should be the
/// natural width of the integrand so the mapped function is well spread on (0, 1).
pub fn semi_infinite_quad_scaled<F: FnMut(f64) -> f64>(
    mut f: F,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!(
            "quadrature scale must be > 0, got {scale}"
        )));
    }
    adaptive_quad(
        |u| {
            let one_minus = 1.0 - u;
            let w = scale * u / one_minus;
            if !w.is_finite() {
                return 0.0;
            }
            let v = f(w);
            if v == 0.0 {
                0.0
            } else {
                v * scale / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        spec,
    )
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 0 {
                    1.0
                } else if n == 1 {
                    x
                } else {
                    p1
                };
                let pnm1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared rule with `n` points.
    pub fn get(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(rule) = cache.read().unwrap_or_else(|e| e.into_inner()).get(&n) {
            return rule.clone();
        }
        let rule = Arc::new(Self::compute(n));
        cache
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .entry(n)
            .or_insert(rule)
            .clone()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn exponential_integrals() {
        let v = semi_infinite_quad(|w| (-w).exp(), &spec()).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        let v = semi_infinite_quad(|w| w * (-w).exp(), &spec()).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exponential_over_one_plus_w_against_trapezoid() {
        // Trapezoid oracle with 10^6 nodes on the mapped interval.
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        let g = |u: f64| {
            if u >= 1.0 {
                return 0.0;
            }
            let w = u / (1.0 - u);
            (-w).exp() / (1.0 + w) / ((1.0 - u) * (1.0 - u))
        };
        let mut oracle = 0.5 * (g(0.0) + g(1.0));
        for i in 1..n {
            oracle += g(i as f64 * h);
        }
        oracle *= h;
        let v = semi_infinite_quad(|w| (-w).exp() / (1.0 + w), &spec()).unwrap();
        assert!((v - oracle).abs() < 1e-6);
        assert!((v - 0.596_347_362_323_194).abs() < 1e-6);
    }

    #[test]
    fn scaled_map_handles_wide_integrands() {
        let c = 1e-9;
        let v = semi_infinite_quad_scaled(|w| (-c * w).exp(), 1.0 / c, &spec()).unwrap();
        assert!((v * c - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_convergence_reports_estimate() {
        let tight = QuadratureSpec {
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            max_subdivisions: 3,
        };
        match adaptive_quad(|x| (1.0 / x).sin(), 1e-4, 1.0, &tight) {
            Err(Error::Accuracy {
                subdivisions,
                estimate,
                ..
            }) => {
                assert_eq!(subdivisions, 3);
                assert!(estimate.is_finite());
            }
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 64, 128] {
            let rule = GaussLegendre::get(n);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let v = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }
}
