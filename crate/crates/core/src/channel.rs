//! Rayleigh channel draws, quantization-error sampling, zero-forcing
//! beamformers and instantaneous SINR: the ground-truth layer that the
//! analytic utilities are checked against.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::kernels::{delta, LinkContext};
use crate::{Error, Result};

/// Residual norm under which a beam is considered to have no usable direction.
pub const DEGENERATE_BEAM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    pub entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        ComplexVector { entries }
    }

    pub fn from_real(values: &[f64]) -> Self {
        ComplexVector::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// `k`-th standard basis vector of dimension `n`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[k] = Complex64::new(1.0, 0.0);
        ComplexVector::new(e)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `self† other`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scaled(&self, s: Complex64) -> ComplexVector {
        ComplexVector::new(self.entries.iter().map(|z| z * s).collect())
    }

    /// `self - c·other`, in place.
    fn sub_scaled(&mut self, c: Complex64, other: &ComplexVector) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a -= c * b;
        }
    }

    /// Unit vector along `self`.
    pub fn direction(&self) -> ComplexVector {
        let n = self.norm();
        self.scaled(Complex64::new(1.0 / n, 0.0))
    }

    fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() < 1e-9
    }
}

/// Circularly-symmetric complex Gaussian vector with unit-variance entries.
pub fn draw_channel<R: Rng + ?Sized>(n_t: usize, rng: &mut R) -> ComplexVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexVector::new(
        (0..n_t)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * s, im * s)
            })
            .collect(),
    )
}

/// Quantization error `sin²θ = δ U^(1/(N_t-1))` of a `bits`-bit codebook.
pub fn sample_qca_error<R: Rng + ?Sized>(bits: u32, n_t: usize, rng: &mut R) -> Result<f64> {
    let d = delta(bits, n_t)?;
    let u: f64 = rng.random();
    Ok(d * u.powf(1.0 / (n_t as f64 - 1.0)))
}

/// Uniformly distributed unit vector orthogonal to the unit vector `dir`.
fn orthogonal_direction<R: Rng + ?Sized>(dir: &ComplexVector, rng: &mut R) -> ComplexVector {
    loop {
        let mut e = draw_channel(dir.len(), rng);
        let c = dir.inner(&e);
        e.sub_scaled(c, dir);
        let n = e.norm();
        if n > 1e-8 {
            return e.scaled(Complex64::new(1.0 / n, 0.0));
        }
    }
}

/// Quantized version of a unit direction: `cosθ·dir + sinθ·e` with `e`
/// uniform in the orthogonal complement and `sin²θ` from the cell model.
pub fn quantize_direction<R: Rng + ?Sized>(
    true_dir: &ComplexVector,
    bits: u32,
    rng: &mut R,
) -> Result<(ComplexVector, f64)> {
    if !true_dir.is_unit() {
        return Err(Error::Domain(format!(
            "direction must be unit-norm, got norm {}",
            true_dir.norm()
        )));
    }
    let n_t = true_dir.len();
    let s2 = sample_qca_error(bits, n_t, rng)?;
    if n_t < 2 || s2 == 0.0 {
        return Ok((true_dir.clone(), s2));
    }
    let e = orthogonal_direction(true_dir, rng);
    let (c, s) = ((1.0 - s2).sqrt(), s2.sqrt());
    let q = ComplexVector::new(
        true_dir
            .entries
            .iter()
            .zip(&e.entries)
            .map(|(a, b)| a * c + b * s)
            .collect(),
    );
    Ok((q, s2))
}

/// Orthonormal basis of the span of `vectors` by modified Gram–Schmidt;
/// numerically dependent columns are dropped.
pub fn orthonormalize(vectors: &[ComplexVector]) -> Vec<ComplexVector> {
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.inner(&r);
                r.sub_scaled(c, b);
            }
        }
        let n = r.norm();
        if n > 1e-10 * scale {
            basis.push(r.scaled(Complex64::new(1.0 / n, 0.0)));
        }
    }
    basis
}

/// Zero-forcing beam: `own_dir` projected onto the null space of the
/// quantized interfering directions, normalized.
pub fn icic_beamformer(
    own_dir: &ComplexVector,
    interfering_dirs: &[ComplexVector],
) -> Result<ComplexVector> {
    if !own_dir.is_unit() {
        return Err(Error::Domain("own direction must be unit-norm".into()));
    }
    if interfering_dirs.len() >= own_dir.len() {
        return Err(Error::Domain(format!(
            "{} interferers cannot be nulled with {} antennas",
            interfering_dirs.len(),
            own_dir.len()
        )));
    }
    let basis = orthonormalize(interfering_dirs);
    let mut f = own_dir.clone();
    for _ in 0..2 {
        for b in &basis {
            let c = b.inner(&f);
            f.sub_scaled(c, b);
        }
    }
    let n = f.norm();
    if n < DEGENERATE_BEAM {
        return Err(Error::DegenerateBeam(n));
    }
    Ok(f.scaled(Complex64::new(1.0 / n, 0.0)))
}

/// One channel vector together with its quantized feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEntry {
    pub channel: ComplexVector,
    pub direction: ComplexVector,
    pub quantized: ComplexVector,
    /// `sin²θ` between `direction` and `quantized`.
    pub error: f64,
}

impl ChannelEntry {
    pub fn draw<R: Rng + ?Sized>(n_t: usize, bits: u32, rng: &mut R) -> Result<Self> {
        let channel = draw_channel(n_t, rng);
        let direction = channel.direction();
        let (quantized, error) = quantize_direction(&direction, bits, rng)?;
        Ok(ChannelEntry {
            channel,
            direction,
            quantized,
            error,
        })
    }
}

/// Channels of every (UE, BS, subcarrier) triple in one fading block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub num_ue: usize,
    pub num_bs: usize,
    pub num_subcarriers: usize,
    entries: Vec<ChannelEntry>,
}

impl ChannelRealization {
    /// Draws all channels; `bits(u, c, n)` gives the feedback bits spent on each.
    pub fn draw<R: Rng + ?Sized>(
        n_t: usize,
        num_ue: usize,
        num_bs: usize,
        num_subcarriers: usize,
        bits: impl Fn(usize, usize, usize) -> u32,
        rng: &mut R,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(num_ue * num_bs * num_subcarriers);
        for u in 0..num_ue {
            for c in 0..num_bs {
                for n in 0..num_subcarriers {
                    entries.push(ChannelEntry::draw(n_t, bits(u, c, n), rng)?);
                }
            }
        }
        Ok(ChannelRealization {
            num_ue,
            num_bs,
            num_subcarriers,
            entries,
        })
    }

    pub fn get(&self, ue: usize, bs: usize, subcarrier: usize) -> &ChannelEntry {
        &self.entries[(ue * self.num_bs + bs) * self.num_subcarriers + subcarrier]
    }

    /// Serving and interfering channels of one UE on one subcarrier, with the
    /// interferers ordered as `active` minus `cell`.
    pub fn link(
        &self,
        ue: usize,
        cell: usize,
        subcarrier: usize,
        active: &[usize],
    ) -> LinkChannels {
        LinkChannels {
            own: self.get(ue, cell, subcarrier).clone(),
            interferers: active
                .iter()
                .filter(|&&c| c != cell)
                .map(|&c| self.get(ue, c, subcarrier).clone())
                .collect(),
        }
    }
}

/// The channels one SINR depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannels {
    pub own: ChannelEntry,
    pub interferers: Vec<ChannelEntry>,
}

/// Instantaneous SINR of the link described by `ctx`, with `own_beam` used by
/// the serving BS and `interferer_beams[i]` by the BS of `ctx.rho_int[i]`.
pub fn instantaneous_sinr(
    ctx: &LinkContext,
    channels: &LinkChannels,
    own_beam: &ComplexVector,
    interferer_beams: &[ComplexVector],
) -> f64 {
    let n_t = ctx.n_t as f64;
    let signal =
        ctx.rho_own * ctx.power_own / n_t * channels.own.channel.inner(own_beam).norm_sqr();
    let mut interference = 0.0;
    for (i, (entry, beam)) in channels
        .interferers
        .iter()
        .zip(interferer_beams)
        .enumerate()
    {
        interference +=
            ctx.rho_int[i] * ctx.power_int[i] / n_t * entry.channel.inner(beam).norm_sqr();
    }
    (signal / (ctx.sigma2 + interference)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn channel_energy_mean() {
        let mut r = rng(1);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| draw_channel(5, &mut r).norm_sqr())
            .sum::<f64>()
            / n as f64;
        // std of ‖h‖² is √5, so 3σ of the mean is about 0.021
        assert!((mean - 5.0).abs() < 0.05, "{mean}");
        let mean1: f64 = (0..n)
            .map(|_| draw_channel(1, &mut r).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean1 - 1.0).abs() < 0.03, "{mean1}");
    }

    #[test]
    fn channel_draw_is_deterministic() {
        assert_eq!(draw_channel(4, &mut rng(7)), draw_channel(4, &mut rng(7)));
    }

    #[test]
    fn qca_samples_respect_support_and_mean() {
        let mut r = rng(2);
        let n = 100_000;
        let s: Vec<f64> = (0..n)
            .map(|_| sample_qca_error(8, 5, &mut r).unwrap())
            .collect();
        assert!(s.iter().all(|&x| (0.0..=0.25).contains(&x)));
        let mean = s.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.2).abs() < 0.005, "{mean}");
        let mean0 = (0..n)
            .map(|_| sample_qca_error(0, 5, &mut r).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean0 - 0.8).abs() < 0.01, "{mean0}");
        assert!(matches!(
            sample_qca_error(3, 1, &mut r),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn quantization_identity() {
        let mut r = rng(3);
        for bits in [0, 2, 6, 12] {
            let d = draw_channel(5, &mut r).direction();
            let (q, s2) = quantize_direction(&d, bits, &mut r).unwrap();
            assert!((q.norm() - 1.0).abs() < 1e-12);
            assert!((1.0 - d.inner(&q).norm_sqr() - s2).abs() < 1e-10);
        }
        let d = draw_channel(5, &mut r).direction();
        let (q, _) = quantize_direction(&d, 200, &mut r).unwrap();
        assert!(1.0 - d.inner(&q).norm_sqr() < 1e-12);
        let not_unit = ComplexVector::from_real(&[1.0, 1.0]);
        assert!(quantize_direction(&not_unit, 3, &mut r).is_err());
    }

    #[test]
    fn two_antenna_hand_example() {
        let h = ComplexVector::basis(2, 0);
        let g = ComplexVector::from_real(&[1.0, 1.0]).direction();
        let f = icic_beamformer(&h, &[g]).unwrap();
        let expect = ComplexVector::from_real(&[1.0, -1.0]).direction();
        assert!((f.inner(&expect).norm() - 1.0).abs() < 1e-12);
        assert_eq!(icic_beamformer(&h, &[]).unwrap(), h);
    }

    #[test]
    fn beam_nulls_interferers() {
        let mut r = rng(4);
        for k in 0..4 {
            let own = draw_channel(5, &mut r).direction();
            let ints: Vec<_> = (0..k)
                .map(|_| draw_channel(5, &mut r).direction())
                .collect();
            let f = icic_beamformer(&own, &ints).unwrap();
            assert!((f.norm() - 1.0).abs() < 1e-12);
            for g in &ints {
                assert!(g.inner(&f).norm_sqr() < 1e-18);
            }
        }
    }

    #[test]
    fn degenerate_and_rank_deficient_inputs() {
        let own = ComplexVector::basis(3, 0);
        let err = icic_beamformer(&own, std::slice::from_ref(&own)).unwrap_err();
        assert!(matches!(err, Error::DegenerateBeam(_)));
        // Repeated interferer columns are handled by orthonormalization.
        let g = ComplexVector::from_real(&[1.0, 1.0, 0.0]).direction();
        let f = icic_beamformer(&own, &[g.clone(), g.clone()]).unwrap();
        assert!(g.inner(&f).norm() < 1e-12);
    }

    #[test]
    fn sinr_formula_collapses_without_interference() {
        let mut r = rng(5);
        let ctx = LinkContext::isolated(1e-9, 2.0, 1e-10, 4, 0);
        let e = ChannelEntry::draw(4, 0, &mut r).unwrap();
        let beam = e.direction.clone();
        let link = LinkChannels {
            own: e.clone(),
            interferers: vec![],
        };
        let g = instantaneous_sinr(&ctx, &link, &beam, &[]);
        let expect = 1e-9 * 2.0 * e.channel.norm_sqr() / (4.0 * 1e-10);
        assert!((g - expect).abs() < 1e-9 * expect);
        let mut zero = ctx.clone();
        zero.power_own = 0.0;
        assert_eq!(instantaneous_sinr(&zero, &link, &beam, &[]), 0.0);
    }
}
