//! Analytic link utilities: capacity, its second moment, effective capacity
//! and energy efficiency of a zero-forcing link with quantized channel
//! directions, plus the quadrature engine they share.

mod capacity;
mod effective;
mod energy;
mod qca;
pub mod quad;
mod table;
mod utility;

pub use capacity::{capacity_r1, capacity_r2, r_hat, r_hat_tensor};
pub use effective::{eff_capacity_r3, eff_capacity_r4, o_func_derivative, r4_window_holds};
pub use energy::{eff_energy_eff, energy_eff};
pub use qca::{delta, delta_hat, delta_hat_raw, signal_dof, sin2theta_bound, QcaDensity};
pub use quad::{adaptive_quad, semi_infinite_quad, semi_infinite_quad_scaled, QuadratureSpec};
pub use table::JTable;
pub use utility::{link_capacity, link_utility, Evaluator, LinkContext, LinkEnergy, UtilityKind};

/// Mean interference-plus-noise inverse `E[1/(σ²N_t + Σ ρ̃ P J)]`.
pub fn interference_integral(ctx: &LinkContext, spec: &QuadratureSpec) -> crate::Result<f64> {
    ctx.validate()?;
    capacity::Denominator::new(ctx)?.mean_inverse(spec)
}
