//! The Bott 2-cocycle, the Virasoro central term and the Schwarzian anomaly,
//! evaluated on the circle in the angle coordinate.
//!
//! A circle map is handled through its lift `φ`, with `z = e^{iθ}` and
//! `log ρ'(z) = log φ'(θ) + i(φ(θ) − θ)`. The lift itself supplies the
//! continuous branch of the logarithm.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::diffeo::{compose, Diffeomorphism};
use crate::error::{Error, Result};
use crate::fields::{Picture, VectorField};
use crate::quad::{self, Integral, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CocycleValue {
    pub value: f64,
    pub quad_err: f64,
}

impl CocycleValue {
    fn from_integral(r: Integral, k: f64) -> Self {
        Self {
            value: k * r.value,
            quad_err: k.abs() * r.abs_err,
        }
    }
}

const CIRCLE_PANELS: usize = 32;
const BRANCH_NODES: usize = 256;

fn on_circle(pic: Picture) -> Result<()> {
    if pic == Picture::Circle {
        Ok(())
    } else {
        Err(Error::PictureMismatch {
            expected: Picture::Circle,
            got: pic,
        })
    }
}

fn circle_integral<F>(f: F, cfg: &QuadConfig) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    let r = quad::integrate_uniform(f, 0.0, TAU, CIRCLE_PANELS, cfg)?;
    if !r.value.is_finite() {
        return Err(Error::QuadratureFailed { err: r.abs_err });
    }
    Ok(r)
}

/// Checks that the imaginary part `φ(θ) − θ` of `log ρ'` moves by less than
/// `π` between neighbouring nodes of a uniform grid.
fn check_branch(map: &Diffeomorphism) -> Result<()> {
    let mut prev = map.value(0.0)?;
    for i in 1..=BRANCH_NODES {
        let th = TAU * i as f64 / BRANCH_NODES as f64;
        let cur = map.value(th)? - th;
        let jump = (cur - prev).abs();
        if jump > PI || !jump.is_finite() {
            return Err(Error::BranchTracking { theta: th, jump });
        }
        prev = cur;
    }
    Ok(())
}

/// `B(ρ₁, ρ₂) = −(1/48π) Re ∫ log(ρ₁ρ₂)'(z) d log ρ₂'(z)`. In the angle
/// coordinate the real part of the integrand is
/// `log((φ₁∘φ₂)') · φ₂''/φ₂' − (φ₁(φ₂(θ)) − θ)(φ₂' − 1)`.
pub fn bott_cocycle(rho1: &Diffeomorphism, rho2: &Diffeomorphism, cfg: &QuadConfig) -> Result<CocycleValue> {
    on_circle(rho1.picture())?;
    on_circle(rho2.picture())?;
    let prod = compose(rho1, rho2)?;
    check_branch(&prod)?;
    check_branch(rho2)?;
    let r = circle_integral(
        |th| {
            let j2 = rho2.jet(th)?;
            let j1 = rho1.jet(j2.value)?;
            let a = (j1.d1 * j2.d1).ln();
            let p = j1.value - th;
            Ok(a * j2.log_ratio() - p * (j2.d1 - 1.0))
        },
        cfg,
    )?;
    Ok(CocycleValue::from_integral(r, -1.0 / (48.0 * PI)))
}

/// The four Bott values of a triple and the coboundary residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct CoboundaryRecord {
    pub B12: f64,
    pub B12_3: f64,
    pub B1_23: f64,
    pub B23: f64,
    pub coboundary_residual: f64,
    pub quad_err: f64,
}

/// `(δB)(g₁, g₂, g₃) = B(g₂, g₃) − B(g₁g₂, g₃) + B(g₁, g₂g₃) − B(g₁, g₂)`.
pub fn coboundary_check(g1: &Diffeomorphism, g2: &Diffeomorphism, g3: &Diffeomorphism, cfg: &QuadConfig) -> Result<CoboundaryRecord> {
    let g12 = compose(g1, g2)?;
    let g23 = compose(g2, g3)?;
    let b12 = bott_cocycle(g1, g2, cfg)?;
    let b12_3 = bott_cocycle(&g12, g3, cfg)?;
    let b1_23 = bott_cocycle(g1, &g23, cfg)?;
    let b23 = bott_cocycle(g2, g3, cfg)?;
    Ok(CoboundaryRecord {
        B12: b12.value,
        B12_3: b12_3.value,
        B1_23: b1_23.value,
        B23: b23.value,
        coboundary_residual: b23.value - b12_3.value + b1_23.value - b12.value,
        quad_err: b12.quad_err + b12_3.quad_err + b1_23.quad_err + b23.quad_err,
    })
}

/// `ω(f, g) = −(1/48π) ∫_0^{2π} (f g''' − f''' g) dθ`, without the factor `c`.
pub fn central_term_omega(f: &VectorField, g: &VectorField, cfg: &QuadConfig) -> Result<CocycleValue> {
    on_circle(f.picture())?;
    on_circle(g.picture())?;
    let r = circle_integral(
        |th| {
            let (a, b) = (f.jet(th), g.jet(th));
            Ok(a.f * b.d3 - a.d3 * b.f)
        },
        cfg,
    )?;
    Ok(CocycleValue::from_integral(r, -1.0 / (48.0 * PI)))
}

/// `β(ρ, g) = −(1/24π) ∫_0^{2π} g(θ) Sφ(θ) dθ`, without the factor `c`.
pub fn anomaly_beta(rho: &Diffeomorphism, g: &VectorField, cfg: &QuadConfig) -> Result<CocycleValue> {
    on_circle(rho.picture())?;
    on_circle(g.picture())?;
    if rho.is_moebius() {
        return Ok(CocycleValue { value: 0.0, quad_err: 0.0 });
    }
    let r = circle_integral(|th| Ok(g.value(th) * rho.jet(th)?.schwarzian()), cfg)?;
    Ok(CocycleValue::from_integral(r, -1.0 / (24.0 * PI)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{exponentiate, FlowConfig};

    fn q() -> QuadConfig {
        QuadConfig::default()
    }

    fn trig(cos: &[f64], sin: &[f64]) -> VectorField {
        VectorField::trig_poly(cos.to_vec(), sin.to_vec()).unwrap()
    }

    fn flow(f: &VectorField, t: f64) -> Diffeomorphism {
        exponentiate(f, t, &FlowConfig::default()).unwrap()
    }

    fn pair() -> (Diffeomorphism, Diffeomorphism) {
        (
            flow(&trig(&[0.1, 0.2, 0.0, 0.05], &[0.0, -0.1, 0.15]), 1.0),
            flow(&trig(&[-0.2, 0.0, 0.1], &[0.0, 0.2, 0.0, -0.05]), 0.8),
        )
    }

    /// `∫_0^{2π} f g''' dθ` for trig polynomials, mode by mode.
    fn trig_fg3(f: (&[f64], &[f64]), g: (&[f64], &[f64])) -> f64 {
        let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        let n = f.0.len().max(f.1.len()).max(g.0.len()).max(g.1.len());
        (1..n)
            .map(|k| {
                let k3 = (k * k * k) as f64;
                PI * k3 * (get(f.1, k) * get(g.0, k) - get(f.0, k) * get(g.1, k))
            })
            .sum()
    }

    #[test]
    fn bott_vanishes_with_identity() {
        let id = Diffeomorphism::identity(Picture::Circle);
        let (r, _) = pair();
        assert!(bott_cocycle(&id, &r, &q()).unwrap().value.abs() < 1e-12);
        assert!(bott_cocycle(&r, &id, &q()).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn bott_matches_trapezoid_oracle() {
        let (r1, r2) = pair();
        let b = bott_cocycle(&r1, &r2, &q()).unwrap();
        let n = 100_000;
        let h = TAU / n as f64;
        // Periodic integrand: the plain trapezoid rule is spectrally accurate.
        let s: f64 = (0..n)
            .map(|i| {
                let th = h * i as f64;
                let j2 = r2.jet(th).unwrap();
                let j1 = r1.jet(j2.value).unwrap();
                (j1.d1 * j2.d1).ln() * j2.d2 / j2.d1 - (j1.value - th) * (j2.d1 - 1.0)
            })
            .sum::<f64>()
            * h;
        assert!((b.value + s / (48.0 * PI)).abs() < 1e-7);
        assert!(b.value.abs() > 1e-6);
    }

    #[test]
    fn coboundary_vanishes() {
        let (r1, r2) = pair();
        let r3 = flow(&trig(&[0.05, -0.1], &[0.0, 0.1, 0.1]), 1.2);
        let rec = coboundary_check(&r1, &r2, &r3, &q()).unwrap();
        assert!(rec.coboundary_residual.abs() < 1e-7, "{rec:?}");
        let rec = coboundary_check(&r1, &r1.inverse(), &r1, &q()).unwrap();
        assert!(rec.coboundary_residual.abs() < 1e-7, "{rec:?}");
        let id = Diffeomorphism::identity(Picture::Circle);
        for (a, b, c) in [(&id, &r1, &r2), (&r1, &id, &r2), (&r1, &r2, &id)] {
            assert!(coboundary_check(a, b, c, &q()).unwrap().coboundary_residual.abs() < 1e-10);
        }
    }

    #[test]
    fn omega_examples() {
        let c = trig(&[0.0, 1.0], &[]);
        let s = trig(&[], &[0.0, 1.0]);
        let w = central_term_omega(&c, &s, &q()).unwrap();
        assert!((w.value - 1.0 / 24.0).abs() < 1e-12);
        assert!(central_term_omega(&c, &c, &q()).unwrap().value.abs() < 1e-14);
        let (fc, fs) = (vec![0.3, -0.2, 0.1, 0.4], vec![0.0, 0.5, -0.3]);
        let (gc, gs) = (vec![0.1, 0.0, 0.2], vec![0.0, 0.1, 0.0, -0.6]);
        let w = central_term_omega(&trig(&fc, &fs), &trig(&gc, &gs), &q()).unwrap();
        let exact = -(trig_fg3((&fc, &fs), (&gc, &gs)) - trig_fg3((&gc, &gs), (&fc, &fs))) / (48.0 * PI);
        assert!((w.value - exact).abs() < 1e-10);
    }

    #[test]
    fn beta_examples() {
        let g = trig(&[0.2, 0.1], &[0.0, 0.3]);
        let id = Diffeomorphism::identity(Picture::Circle);
        assert_eq!(anomaly_beta(&id, &g, &q()).unwrap().value, 0.0);
        let rot = Diffeomorphism::affine(Picture::Circle, 1.0, 0.7).unwrap();
        assert_eq!(anomaly_beta(&rot, &g, &q()).unwrap().value, 0.0);
        let (r, _) = pair();
        let b = anomaly_beta(&r, &g, &q()).unwrap();
        let n = 20_000;
        let h = TAU / n as f64;
        let s: f64 = (0..n).map(|i| g.value(h * i as f64) * r.jet(h * i as f64).unwrap().schwarzian()).sum::<f64>() * h;
        assert!((b.value + s / (24.0 * PI)).abs() < 1e-8);
    }

    #[test]
    fn beta_linearizes_to_minus_omega() {
        // d/dt β(Exp(t f), g) at t = 0 equals −ω(f, g).
        let f = trig(&[0.0, 0.3, 0.2], &[0.0, 0.1, 0.0, 0.2]);
        let g = trig(&[0.1, 0.0, 0.0, 0.3], &[0.0, 0.4, 0.2]);
        let h = 1e-4;
        let bp = anomaly_beta(&flow(&f, h), &g, &q()).unwrap().value;
        let bm = anomaly_beta(&flow(&f, -h), &g, &q()).unwrap().value;
        let w = central_term_omega(&f, &g, &q()).unwrap().value;
        assert!(((bp - bm) / (2.0 * h) + w).abs() < 1e-6);
    }

    #[test]
    fn line_maps_rejected() {
        let id = Diffeomorphism::identity(Picture::Line);
        assert!(bott_cocycle(&id, &id, &q()).is_err());
        assert!(central_term_omega(&VectorField::cos2(), &VectorField::cos2(), &q()).is_err());
    }
}
