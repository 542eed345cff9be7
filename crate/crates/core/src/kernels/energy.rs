//! Energy-efficiency ratios of a single link.

use super::utility::LinkContext;

fn ratio(ctx: &LinkContext, rate: f64) -> f64 {
    if rate <= 0.0 {
        return 0.0;
    }
    let e = &ctx.energy;
    rate / (e.processing_w + (1.0 + e.tau) * ctx.power_own + e.zeta * rate)
}

/// Rate per unit of consumed power, `R / (P^s + (1+τ)P + ζR)`.
pub fn energy_eff(ctx: &LinkContext, r_bar: f64) -> f64 {
    ratio(ctx, r_bar)
}

/// Same ratio with the effective capacity in place of the ergodic rate.
pub fn eff_energy_eff(ctx: &LinkContext, ec: f64) -> f64 {
    ratio(ctx, ec)
}
