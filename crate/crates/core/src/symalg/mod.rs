//! Exact symbolic algebra: rational polynomials, radial forms closed under
//! Cartesian derivatives, and reduced trigonometric forms closed under
//! angle derivatives. Numbers enter only at evaluation.

mod poly;
mod radial;
mod sampling;
mod trig;

pub use poly::{f64_to_rat, monomials_of_degree, rat, rat_int, rat_to_f64, CompiledPoly, Exponent, Polynomial};
pub use radial::{CompiledRadial, RadialForm};
pub use sampling::{
    angle_box_samples, sphere_angle_samples, sphere_samples, sup_norm_on_angle_box, sup_norm_on_sphere, SupEstimate,
};
pub use trig::{param_point, parametrization, to_spherical, CompiledTrig, Frame, TrigForm};

/// `∂^α` of a radial form; `α = 0` returns the input unchanged.
pub fn diff_cartesian(f: &RadialForm, alpha: &[u32]) -> RadialForm {
    f.diff_multi(alpha)
}

/// `∂^α_θ` of a trigonometric form.
pub fn diff_spherical(g: &TrigForm, alpha: &[u32]) -> crate::Result<TrigForm> {
    g.diff_multi(alpha)
}
