//! Relative entropies, their cut derivatives, vacuum energies and the
//! Bekenstein-type bounds, all as quadratures over diffeomorphism jets.
//!
//! Direction names are fixed as:
//! * `StateVsVacuum`: `S(ω_{V(ρ)} ‖ ω)`
//! * `VacuumVsState`: `S(ω ‖ ω_{V(ρ)})`

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diffeo::Diffeomorphism;
use crate::error::{Error, Result};
use crate::fields::Support;
use crate::quad::{self, Integral, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    StateVsVacuum,
    VacuumVsState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interval {
    HalfLine { t: f64 },
    Bounded { a: f64, b: f64 },
}

impl Interval {
    pub fn half_line(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("cut point must be finite, got {t}")));
        }
        Ok(Interval::HalfLine { t })
    }

    pub fn bounded(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidParameter(format!("interval needs finite a < b, got ({a}, {b})")));
        }
        Ok(Interval::Bounded { a, b })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub value: f64,
    pub direction: Direction,
    pub interval: Interval,
    pub central_charge: f64,
    pub quad_err: f64,
}

/// Uniform panels laid over the active hull of every integrand, so scans in
/// the cut point reuse the same nodes away from the cut.
const HULL_PANELS: usize = 32;

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("central charge must be positive, got {c}")))
    }
}

/// `None` for maps that are affine everywhere.
fn hull_of(map: &Diffeomorphism) -> Result<Option<(f64, f64)>> {
    match map.active_hull() {
        Support::Empty => Ok(None),
        Support::Interval(lo, hi) => Ok(Some((lo, hi))),
        Support::Full => Err(Error::NotLocalized),
    }
}

/// `(ρ''/ρ')²`.
fn k(map: &Diffeomorphism, u: f64) -> Result<f64> {
    let l = map.jet(u)?.log_ratio();
    Ok(l * l)
}

fn checked(r: Integral) -> Result<Integral> {
    if !r.value.is_finite() || !r.abs_err.is_finite() {
        return Err(Error::QuadratureFailed { err: r.abs_err });
    }
    if !r.converged && r.abs_err > 1e-6 * (1.0 + r.value.abs()) {
        return Err(Error::QuadratureFailed { err: r.abs_err });
    }
    Ok(r)
}

/// `∫_lo^hi g` clipped to the active hull of `map`, with panels at the
/// map's breakpoints and a fixed grid over the hull.
fn integrate_over<G>(map: &Diffeomorphism, lo: f64, hi: f64, extra: &[f64], cfg: &QuadConfig, mut g: G) -> Result<Integral>
where
    G: FnMut(f64) -> Result<f64>,
{
    let Some((h0, h1)) = hull_of(map)? else {
        return Ok(Integral::ZERO);
    };
    let (a, b) = (lo.max(h0), hi.min(h1));
    if a >= b {
        return Ok(Integral::ZERO);
    }
    let mut marks: Vec<f64> = map.breakpoints().to_vec();
    marks.extend_from_slice(extra);
    let pts = quad::breakpoints(a, b, &marks, Some((h0, h1, HULL_PANELS)));
    let r = quad::integrate(
        |u| {
            let v = g(u)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { op: "entropy integrand", u })
            }
        },
        &pts,
        cfg,
    )?;
    checked(r)
}

/// `D_{(a,b)}(u) = (b − u)(u − a)/(b − a)`.
pub fn dilation_density(a: f64, b: f64, u: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("dilation density needs a < b, got ({a}, {b})")));
    }
    Ok((b - u) * (u - a) / (b - a))
}

fn density(a: f64, b: f64, u: f64) -> f64 {
    (b - u) * (u - a) / (b - a)
}

/// Half-line entropy on `(t, ∞)`:
/// `StateVsVacuum = (c/24) ∫_t^∞ (u − t)(η''/η')² du` with `η = ρ⁻¹`;
/// `VacuumVsState = (c/24) ∫_{η(t)}^∞ (u − η(t))(ρ''/ρ')² du`.
pub fn entropy_half_line(rho: &Diffeomorphism, t: f64, c: f64, direction: Direction, cfg: &QuadConfig) -> Result<EntropyReport> {
    check_c(c)?;
    let interval = Interval::half_line(t)?;
    let (map, s) = match direction {
        Direction::StateVsVacuum => (rho.inverse(), t),
        Direction::VacuumVsState => (rho.clone(), rho.inverse_value(t)?),
    };
    let r = integrate_over(&map, s, f64::INFINITY, &[s], cfg, |u| Ok((u - s) * k(&map, u)?))?;
    Ok(EntropyReport {
        value: c / 24.0 * r.value,
        direction,
        interval,
        central_charge: c,
        quad_err: c / 24.0 * r.abs_err,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutDerivatives {
    pub d1: f64,
    pub d2: f64,
    pub quad_err: f64,
}

/// `(S'(t), S''(t))` for the half-line entropy as a function of the cut.
///
/// For `StateVsVacuum`, `S' = −(c/24) ∫_t^∞ (η''/η')²` and
/// `S'' = (c/24)(η''(t)/η'(t))²`. For `VacuumVsState`, with `s = η(t)`,
/// `S' = −(c/24) ∫_s^∞ (ρ''/ρ')² / ρ'(s)` and
/// `S'' = [(c/24)(ρ''(s)/ρ'(s))² − S' ρ''(s)] / ρ'(s)²`.
pub fn entropy_half_line_derivatives(rho: &Diffeomorphism, t: f64, c: f64, direction: Direction, cfg: &QuadConfig) -> Result<CutDerivatives> {
    check_c(c)?;
    Interval::half_line(t)?;
    match direction {
        Direction::StateVsVacuum => {
            let eta = rho.inverse();
            let r = integrate_over(&eta, t, f64::INFINITY, &[t], cfg, |u| k(&eta, u))?;
            Ok(CutDerivatives {
                d1: -c / 24.0 * r.value,
                d2: c / 24.0 * k(&eta, t)?,
                quad_err: c / 24.0 * r.abs_err,
            })
        }
        Direction::VacuumVsState => {
            let s = rho.inverse_value(t)?;
            let r = integrate_over(rho, s, f64::INFINITY, &[s], cfg, |u| k(rho, u))?;
            let j = rho.jet(s)?;
            let g1 = -c / 24.0 * r.value;
            let d1 = g1 / j.d1;
            let l = j.log_ratio();
            let d2 = (c / 24.0 * l * l - d1 * j.d2) / (j.d1 * j.d1);
            Ok(CutDerivatives {
                d1,
                d2,
                quad_err: c / 24.0 * r.abs_err / j.d1,
            })
        }
    }
}

/// The two right-hand sides of the exchanged-direction derivative identities
/// at the cut `ρ(t)`, and the derivatives they encode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangedDerivatives {
    /// `S'(ρ(t))·ρ'(t) = −(c/24) ∫_t^∞ (ρ''/ρ')²`.
    pub rhs1: f64,
    /// `S''(ρ(t))·ρ'(t)² = (c/24) L(t) (L(t) + ∫_t^∞ (ρ''/ρ')²)`, `L = ρ''/ρ'`.
    pub rhs2: f64,
    pub d1_at_image: f64,
    pub d2_at_image: f64,
    /// `∫_t^∞ (ρ''/ρ')²`.
    pub tail_integral: f64,
    pub quad_err: f64,
}

pub fn entropy_exchanged_derivative_formula(rho: &Diffeomorphism, t: f64, c: f64, cfg: &QuadConfig) -> Result<ExchangedDerivatives> {
    check_c(c)?;
    Interval::half_line(t)?;
    let r = integrate_over(rho, t, f64::INFINITY, &[t], cfg, |u| k(rho, u))?;
    let j = rho.jet(t)?;
    let l = j.log_ratio();
    let rhs1 = -c / 24.0 * r.value;
    let rhs2 = c / 24.0 * l * (l + r.value);
    Ok(ExchangedDerivatives {
        rhs1,
        rhs2,
        d1_at_image: rhs1 / j.d1,
        d2_at_image: rhs2 / (j.d1 * j.d1),
        tail_integral: r.value,
        quad_err: c / 24.0 * r.abs_err,
    })
}

/// Bounded-interval entropy on `(a, b)`. With `m = (η(b) − η(a))/(b − a)`:
///
/// `VacuumVsState = −(c/12) ∫_{η(a)}^{η(b)} D_{(η(a),η(b))} Sρ
///   + (c/12) log(ρ'(η(a)) ρ'(η(b))) + (c/12) log m²`,
///
/// `StateVsVacuum = −(c/12) ∫_a^b D_{(a,b)} Sη + (c/12) log(η'(a) η'(b)) − (c/12) log m²`.
pub fn entropy_interval(rho: &Diffeomorphism, a: f64, b: f64, c: f64, direction: Direction, cfg: &QuadConfig) -> Result<EntropyReport> {
    check_c(c)?;
    let interval = Interval::bounded(a, b)?;
    let eta = rho.inverse();
    let (ea, eb) = (eta.value(a)?, eta.value(b)?);
    let log_m2 = 2.0 * ((eb - ea) / (b - a)).ln();
    let (map, lo, hi, sign) = match direction {
        Direction::VacuumVsState => (rho.clone(), ea, eb, 1.0),
        Direction::StateVsVacuum => (eta, a, b, -1.0),
    };
    let r = integrate_over(&map, lo, hi, &[lo, hi], cfg, |u| Ok(density(lo, hi, u) * map.jet(u)?.schwarzian()))?;
    let ends = map.jet(lo)?.d1.ln() + map.jet(hi)?.d1.ln();
    let value = c / 12.0 * (-r.value + ends + sign * log_m2);
    Ok(EntropyReport {
        value,
        direction,
        interval,
        central_charge: c,
        quad_err: c / 12.0 * r.abs_err,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedEndpointForms {
    /// `(c/24) ∫ D (ρ''/ρ')² + (c/6)/(b − a) ∫ log ρ'`.
    pub form1: f64,
    /// `−(c/12) ∫ D Sρ + (c/12) log(ρ'(a) ρ'(b))`.
    pub form2: f64,
    /// `(1/(b − a)) ∫_a^b log ρ'`, nonpositive by Jensen.
    pub jensen_mean: f64,
    pub quad_err: f64,
}

/// Both fixed-endpoint expressions of the interval entropy for a map with
/// `ρ(a) = a`, `ρ(b) = b`.
pub fn entropy_interval_fixed_endpoint_forms(rho: &Diffeomorphism, a: f64, b: f64, c: f64, cfg: &QuadConfig) -> Result<FixedEndpointForms> {
    check_c(c)?;
    Interval::bounded(a, b)?;
    for p in [a, b] {
        let image = rho.value(p)?;
        if (image - p).abs() > 1e-10 * (1.0 + p.abs()) {
            return Err(Error::EndpointNotFixed { point: p, image });
        }
    }
    let dk = integrate_over(rho, a, b, &[a, b], cfg, |u| Ok(density(a, b, u) * k(rho, u)?))?;
    let ds = integrate_over(rho, a, b, &[a, b], cfg, |u| Ok(density(a, b, u) * rho.jet(u)?.schwarzian()))?;
    let logd = if rho.identity_outside() {
        integrate_over(rho, a, b, &[a, b], cfg, |u| Ok(rho.jet(u)?.d1.ln()))?
    } else {
        let pts = quad::breakpoints(a, b, rho.breakpoints(), Some((a, b, HULL_PANELS)));
        checked(quad::integrate(|u| Ok::<f64, Error>(rho.jet(u)?.d1.ln()), &pts, cfg)?)?
    };
    let ends = rho.jet(a)?.d1.ln() + rho.jet(b)?.d1.ln();
    let w = b - a;
    Ok(FixedEndpointForms {
        form1: c / 24.0 * dk.value + c / 6.0 / w * logd.value,
        form2: -c / 12.0 * ds.value + c / 12.0 * ends,
        jensen_mean: logd.value / w,
        quad_err: c / 24.0 * dk.abs_err + c / 12.0 * ds.abs_err + c / 6.0 / w * logd.abs_err,
    })
}

/// `E = (c/48π) ∫ (ρ''/ρ')²` for `VacuumVsState`, and the conjugate
/// `Ē = (c/48π) ∫ (η''/η')²` for `StateVsVacuum`.
pub fn vacuum_energy(rho: &Diffeomorphism, c: f64, direction: Direction, cfg: &QuadConfig) -> Result<Integral> {
    check_c(c)?;
    let map = match direction {
        Direction::VacuumVsState => rho.clone(),
        Direction::StateVsVacuum => rho.inverse(),
    };
    let r = integrate_over(&map, f64::NEG_INFINITY, f64::INFINITY, &[], cfg, |u| k(&map, u))?;
    Ok(r.scale(c / (48.0 * PI)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BekensteinRecord {
    pub r: f64,
    pub direction: Direction,
    pub entropy: f64,
    /// `π r E` (or `π r Ē`).
    pub bound: f64,
    pub margin: f64,
    pub quad_err: f64,
    pub pass: bool,
}

/// Compares `S_{(−r,r)}` with `π r E` in the given direction.
pub fn bekenstein_check(rho: &Diffeomorphism, r: f64, c: f64, direction: Direction, cfg: &QuadConfig) -> Result<BekensteinRecord> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let s = entropy_interval(rho, -r, r, c, direction, cfg)?;
    let e = vacuum_energy(rho, c, direction, cfg)?;
    let bound = PI * r * e.value;
    let margin = bound - s.value;
    let quad_err = s.quad_err + PI * r * e.abs_err;
    Ok(BekensteinRecord {
        r,
        direction,
        entropy: s.value,
        bound,
        margin,
        quad_err,
        pass: margin >= -quad_err.max(1e-12),
    })
}

/// Windowed energy `Ē(t, t') = (c/24π) ∫_t^{t'} (η''/η')²`.
pub fn qnec_energy_density(rho: &Diffeomorphism, t: f64, t_prime: f64, c: f64, cfg: &QuadConfig) -> Result<f64> {
    check_c(c)?;
    if !(t.is_finite() && t_prime.is_finite()) || t >= t_prime {
        return Err(Error::InvalidParameter(format!("need t < t', got {t}, {t_prime}")));
    }
    let eta = rho.inverse();
    let r = integrate_over(&eta, t, t_prime, &[t, t_prime], cfg, |u| k(&eta, u))?;
    Ok(c / (24.0 * PI) * r.value)
}
