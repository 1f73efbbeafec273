//! The flow of `cos²u` on the line at unit time, `ρ(u) = arctan(tan u + 1)`,
//! whose exchanged-direction entropy is not convex at the cut `π/4`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_exchanged_derivative_formula, entropy_half_line_derivatives, Direction};
use crate::error::Result;
use crate::fields::VectorField;
use crate::flows::{exponentiate, FlowConfig};
use crate::quad::QuadConfig;

pub const INTEGRAL_TARGET: f64 = 1.4;
pub const RATIO_TARGET: f64 = -1.0;

/// Grid used to compare the numerical flow with the closed form.
const CHECK_POINTS: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub c: f64,
    /// Max of `|ρ(u) − arctan(tan u + 1)|` over a grid in `(−π/2, π/2)`.
    pub closed_form_residual: f64,
    /// `ρ''(0)/ρ'(0)`.
    pub ratio_at_zero: f64,
    /// `∫_0^{π/2} (ρ''/ρ')²`.
    pub integral: f64,
    /// `S''(π/4)/4`, from the exchanged identity at the cut `0`.
    pub s2_quarter: f64,
    /// The same quantity from the direct second-derivative formula at `π/4`.
    pub s2_quarter_direct: f64,
    /// `−c/60`.
    pub s2_target: f64,
    pub quad_err: f64,
}

pub fn counterexample(c: f64, flow_cfg: &FlowConfig, cfg: &QuadConfig) -> Result<CounterexampleReport> {
    let rho = exponentiate(&VectorField::cos2(), 1.0, flow_cfg)?;
    let mut residual = 0.0f64;
    for i in 1..CHECK_POINTS {
        let u = -FRAC_PI_2 + std::f64::consts::PI * i as f64 / CHECK_POINTS as f64;
        residual = residual.max((rho.value(u)? - (u.tan() + 1.0).atan()).abs());
    }
    let ex = entropy_exchanged_derivative_formula(&rho, 0.0, c, cfg)?;
    let direct = entropy_half_line_derivatives(&rho, FRAC_PI_4, c, Direction::VacuumVsState, cfg)?;
    Ok(CounterexampleReport {
        c,
        closed_form_residual: residual,
        ratio_at_zero: rho.jet(0.0)?.log_ratio(),
        integral: ex.tail_integral,
        s2_quarter: ex.rhs2,
        s2_quarter_direct: direct.d2 / 4.0,
        s2_target: -c / 60.0,
        quad_err: ex.quad_err + direct.quad_err,
    })
}
