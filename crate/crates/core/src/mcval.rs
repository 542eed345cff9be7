//! Monte-Carlo oracles for link capacity, its second moment, effective
//! capacity and energy efficiency.
//!
//! Every trial draws its own rng stream from `(seed, trial index)`, so an
//! estimate does not depend on how trials are partitioned or ordered.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Gamma};

use crate::channel::{draw_channel, icic_beamformer, quantize_direction, ComplexVector};
use crate::kernels::{delta, signal_dof, LinkContext};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSpec {
    pub trials: usize,
    pub seed: u64,
    /// Width of the confidence band, in standard errors.
    pub confidence_z: f64,
}

impl McSpec {
    pub fn new(trials: usize, seed: u64) -> Self {
        McSpec {
            trials,
            seed,
            confidence_z: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("Monte-Carlo needs at least one trial".into()));
        }
        Ok(())
    }

    fn rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec::new(100_000, 1)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        if samples.len() < 2 {
            return McEstimate {
                mean,
                std_error: 0.0,
            };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        McEstimate {
            mean,
            std_error: (var / n).sqrt(),
        }
    }

    /// Whether `value` lies within `z` standard errors of the mean.
    pub fn covers(&self, value: f64, z: f64) -> bool {
        (value - self.mean).abs() <= z * self.std_error
    }
}

fn random_direction<R: Rng + ?Sized>(n_t: usize, rng: &mut R) -> ComplexVector {
    draw_channel(n_t, rng).direction()
}

/// `log(1 + γ)` of one fading realization of the link.
///
/// The serving beam nulls `|C^a| - 1` independent isotropic directions
/// standing in for the other cells' UEs. Each interfering BS serves a random
/// direction and nulls this UE's quantized direction towards it plus
/// `|C^a| - 2` further random directions. The interference uses the true
/// channel, so only the quantization error leaks through.
pub fn sample_rate<R: Rng + ?Sized>(ctx: &LinkContext, rng: &mut R) -> Result<f64> {
    let n_t = ctx.n_t;
    let k = ctx.active_count;
    let h = draw_channel(n_t, rng);
    let (h_q, _) = quantize_direction(&h.direction(), ctx.own_bits(), rng)?;
    let nulls: Vec<ComplexVector> = (1..k).map(|_| random_direction(n_t, rng)).collect();
    let f = icic_beamformer(&h_q, &nulls)?;
    let signal = ctx.rho_own * ctx.power_own / n_t as f64 * h.inner(&f).norm_sqr();
    let mut interference = 0.0;
    for i in 0..ctx.rho_int.len() {
        let g = draw_channel(n_t, rng);
        let (g_q, _) = quantize_direction(&g.direction(), ctx.interferer_bits()[i], rng)?;
        let mut nulls = Vec::with_capacity(k - 1);
        nulls.push(g_q);
        nulls.extend((2..k).map(|_| random_direction(n_t, rng)));
        let target = random_direction(n_t, rng);
        let f_i = icic_beamformer(&target, &nulls)?;
        interference += ctx.rho_int[i] * ctx.power_int[i] / n_t as f64 * g.inner(&f_i).norm_sqr();
    }
    Ok((signal / (ctx.sigma2 + interference)).max(0.0).ln_1p())
}

/// Per-trial rates `log(1 + γ)`.
pub fn rate_samples(ctx: &LinkContext, spec: &McSpec) -> Result<Vec<f64>> {
    ctx.validate()?;
    spec.validate()?;
    if ctx.signal_scale() == 0.0 {
        return Ok(vec![0.0; spec.trials]);
    }
    (0..spec.trials)
        .map(|t| sample_rate(ctx, &mut spec.rng(t)))
        .collect()
}

/// `-(1/θ) log(mean e^{-θ r})` of a set of rate samples, computed stably.
pub fn effective_from_samples(samples: &[f64], theta: f64) -> f64 {
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = samples
        .iter()
        .map(|r| (-theta * (r - min)).exp())
        .sum::<f64>()
        / samples.len() as f64;
    min - mean.ln() / theta
}

/// Ergodic capacity `E log(1 + γ)`.
pub fn mc_capacity(ctx: &LinkContext, spec: &McSpec) -> Result<McEstimate> {
    Ok(McEstimate::from_samples(&rate_samples(ctx, spec)?))
}

/// `E (log(1 + γ))²`.
pub fn mc_second_moment(ctx: &LinkContext, spec: &McSpec) -> Result<McEstimate> {
    let sq: Vec<f64> = rate_samples(ctx, spec)?.iter().map(|r| r * r).collect();
    Ok(McEstimate::from_samples(&sq))
}

/// Effective capacity at QoS exponent `theta` (log of a sample mean, so
/// slightly biased for few trials).
pub fn mc_effective_capacity(ctx: &LinkContext, theta: f64, spec: &McSpec) -> Result<f64> {
    if theta.is_nan() || theta <= 0.0 {
        return Err(Error::Domain(format!("theta must be > 0, got {theta}")));
    }
    Ok(effective_from_samples(&rate_samples(ctx, spec)?, theta))
}

/// Energy efficiency with the MC ergodic capacity plugged into the power model.
pub fn mc_ee(ctx: &LinkContext, spec: &McSpec) -> Result<f64> {
    let r = mc_capacity(ctx, spec)?.mean;
    Ok(crate::kernels::energy_eff(ctx, r))
}

/// Capacity `E log(1 + Z)` under the simplified signal model behind the
/// effective-capacity transform: a Gamma(m) signal scaled by
/// `ρP(1 - δ(N_t-1)/N_t)` over noise plus exponential residual interference.
pub fn mc_z_model_capacity(ctx: &LinkContext, spec: &McSpec) -> Result<McEstimate> {
    ctx.validate()?;
    spec.validate()?;
    let n_t = ctx.n_t as f64;
    let d = delta(ctx.own_bits(), ctx.n_t)?;
    let scale = ctx.signal_scale() * (1.0 - d * (n_t - 1.0) / n_t);
    if scale == 0.0 {
        return Ok(McEstimate {
            mean: 0.0,
            std_error: 0.0,
        });
    }
    let m = signal_dof(ctx.n_t, ctx.active_count) as f64;
    let gamma = Gamma::new(m, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let mut coeffs = Vec::with_capacity(ctx.rho_int.len());
    for i in 0..ctx.rho_int.len() {
        coeffs.push(ctx.rho_int[i] * ctx.power_int[i] * delta(ctx.interferer_bits()[i], ctx.n_t)?);
    }
    let noise = ctx.sigma2 * n_t;
    let samples: Vec<f64> = (0..spec.trials)
        .map(|t| {
            let mut rng = spec.rng(t);
            let x: f64 = rng.sample(gamma);
            let den = noise
                + coeffs
                    .iter()
                    .map(|c| c * rng.sample::<f64, _>(Exp1))
                    .sum::<f64>();
            (scale * x / den).ln_1p()
        })
        .collect();
    Ok(McEstimate::from_samples(&samples))
}
