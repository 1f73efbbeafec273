//! One-parameter flows `Exp(t f)` of vector fields, with third-order jet
//! transport along each trajectory.

use serde::{Deserialize, Serialize};

use crate::diffeo::{Diffeomorphism, Jet3};
use crate::error::{Error, Result};
use crate::fields::{Picture, Support, VectorField};
use crate::ode::{dopri5, OdeConfig, OdeFailure};
use crate::quad::{self, QuadConfig};
use crate::roots::bracketed_newton;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMethod {
    AdaptiveEmbeddedRungeKutta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// `None` means 5% of the support width of the field being integrated.
    pub max_step: Option<f64>,
    pub method: FlowMethod,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_step: None,
            method: FlowMethod::AdaptiveEmbeddedRungeKutta,
        }
    }
}

const MAX_STEPS: usize = 1_000_000;

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.abs_tol) || !ok(self.rel_tol) || !self.max_step.map_or(true, ok) {
            return Err(Error::InvalidParameter(format!("flow tolerances must be positive and finite: {self:?}")));
        }
        Ok(())
    }

    fn ode(&self, field: &VectorField) -> OdeConfig {
        let max_step = self.max_step.unwrap_or_else(|| match (field.support(), field.picture()) {
            (Support::Interval(lo, hi), _) if hi > lo => 0.05 * (hi - lo),
            (_, Picture::Circle) => 0.1 * std::f64::consts::PI,
            _ => 0.05,
        });
        OdeConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_step,
            max_steps: MAX_STEPS,
        }
    }
}

fn outside(field: &VectorField, u: f64) -> bool {
    match field.support() {
        Support::Empty => true,
        Support::Interval(lo, hi) => u < lo || u > hi,
        Support::Full => false,
    }
}

fn ode_error(e: OdeFailure, u: f64, t: f64) -> Error {
    match e {
        OdeFailure::StepUnderflow { .. } => Error::StepUnderflow { u, t },
        OdeFailure::TooManySteps { steps, .. } => Error::TooManySteps { u, t, steps },
    }
}

/// `Exp(t f)(u)` alone, without derivatives.
pub fn flow_value(field: &VectorField, t: f64, u: f64, cfg: &FlowConfig) -> Result<f64> {
    if t == 0.0 || outside(field, u) {
        return Ok(u);
    }
    let y = dopri5(|y: &[f64; 1]| [field.jet(y[0]).f], [u], t, &cfg.ode(field)).map_err(|e| ode_error(e, u, t))?;
    if !y[0].is_finite() {
        return Err(Error::NonFinite { op: "flow", u });
    }
    Ok(y[0])
}

/// `(ρ_t(u), ρ_t'(u), ρ_t''(u), ρ_t'''(u))` for `ρ_t = Exp(t f)`, from the
/// variational system along the trajectory through `u`.
pub fn flow_jet(field: &VectorField, t: f64, u: f64, cfg: &FlowConfig) -> Result<Jet3> {
    if t == 0.0 || outside(field, u) {
        return Ok(Jet3::identity(u));
    }
    let rhs = |y: &[f64; 4]| {
        let j = field.jet(y[0]);
        let (p1, p2, p3) = (y[1], y[2], y[3]);
        [
            j.f,
            j.d1 * p1,
            j.d2 * p1 * p1 + j.d1 * p2,
            j.d3 * p1 * p1 * p1 + 3.0 * j.d2 * p1 * p2 + j.d1 * p3,
        ]
    };
    let y = dopri5(rhs, [u, 1.0, 0.0, 0.0], t, &cfg.ode(field)).map_err(|e| ode_error(e, u, t))?;
    Jet3::new(y[0], y[1], y[2], y[3]).map_err(|_| Error::NonFinite { op: "flow jet", u })
}

/// `Exp(t f)` as a diffeomorphism; queries integrate the flow from the query point.
pub fn exponentiate(field: &VectorField, t: f64, cfg: &FlowConfig) -> Result<Diffeomorphism> {
    cfg.validate()?;
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("flow time must be finite, got {t}")));
    }
    Ok(Diffeomorphism::flow(field.clone(), t, *cfg))
}

/// `Exp(−t f)`, the inverse of [`exponentiate`].
pub fn inverse_flow(field: &VectorField, t: f64, cfg: &FlowConfig) -> Result<Diffeomorphism> {
    exponentiate(field, -t, cfg)
}

/// `ρ_t(u) = F_u⁻¹(t)` with `F_u(s) = ∫_u^s dv/f(v)`, by marching outward in
/// panels and inverting the monotone `F_u` on the panel that overshoots `t`.
/// Fails if `f` vanishes before `F_u` reaches `t`.
pub fn closed_form_flow(field: &VectorField, t: f64, u: f64) -> Result<f64> {
    if !t.is_finite() || !u.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite input t = {t}, u = {u}")));
    }
    if t == 0.0 {
        return Ok(u);
    }
    let f0 = field.value(u);
    if f0 == 0.0 {
        return Err(Error::VanishingField { u });
    }
    let qcfg = QuadConfig {
        abs_tol: 1e-14,
        rel_tol: 1e-14,
        max_depth: 50,
        ..QuadConfig::default()
    };
    let target = t.abs();
    // Motion direction in u: sign(f)·sign(t). Along it, g = dir/f > 0.
    let dir = f0.signum() * t.signum();
    let g = |v: f64| -> Result<f64> {
        let fv = field.value(v);
        if fv == 0.0 || fv.signum() != f0.signum() {
            return Err(Error::VanishingField { u });
        }
        Ok(1.0 / fv.abs())
    };
    let seg = |a: f64, b: f64| -> Result<f64> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let r = quad::integrate(&g, &[lo, hi], &qcfg)?;
        Ok(r.value)
    };
    let scale = match field.support() {
        Support::Interval(lo, hi) => 0.05 * (hi - lo),
        _ => 0.05,
    };
    let mut h = scale.min(0.5 * target * f0.abs()).max(1e-6);
    let mut s = u;
    let mut acc = 0.0;
    loop {
        let next = s + dir * h;
        let fn_ = field.value(next);
        if fn_ == 0.0 || fn_.signum() != f0.signum() {
            h *= 0.5;
            if h < 1e-15 * (1.0 + s.abs()) {
                return Err(Error::VanishingField { u });
            }
            continue;
        }
        // The step may jump over a zero of f, or 1/f may overflow next to a
        // flat zero; either way the target lies closer in.
        let piece = match seg(s, next) {
            Ok(p) => p,
            Err(Error::VanishingField { .. }) => f64::NAN,
            Err(e) => return Err(e),
        };
        if !piece.is_finite() {
            h *= 0.5;
            if h < 1e-15 * (1.0 + s.abs()) {
                return Err(Error::VanishingField { u });
            }
            continue;
        }
        if acc + piece >= target {
            let start = s;
            let base = acc;
            let root = bracketed_newton(
                |x| {
                    let val = base + seg(start, x)? - target;
                    Ok((dir * val, g(x)?))
                },
                start.min(next),
                start.max(next),
                1e-15 * (1.0 + start.abs()),
            )?;
            return Ok(root);
        }
        acc += piece;
        s = next;
        h = (2.0 * h).min(scale.max(h));
    }
}
