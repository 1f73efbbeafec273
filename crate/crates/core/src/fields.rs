//! Real vector fields on the line and on the circle.
//!
//! A field is an immutable expression tree (bumps, the piecewise `cos²`
//! field, trigonometric polynomials, linear combinations, Cayley
//! pushforwards). Every node supplies its jet `(f, f', f'', f''')`
//! analytically. Circle fields are functions of the angle `θ`, 2π-periodic.

use std::f64::consts::{FRAC_PI_2, PI};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Line,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Empty,
    /// Closed interval in the field's coordinate.
    Interval(f64, f64),
    /// The whole line, or the whole circle.
    Full,
}

impl Support {
    pub fn contains(&self, u: f64) -> bool {
        match *self {
            Support::Empty => false,
            Support::Interval(lo, hi) => u >= lo && u <= hi,
            Support::Full => true,
        }
    }

    pub fn hull(self, other: Support) -> Support {
        match (self, other) {
            (Support::Empty, s) | (s, Support::Empty) => s,
            (Support::Full, _) | (_, Support::Full) => Support::Full,
            (Support::Interval(a, b), Support::Interval(c, d)) => Support::Interval(a.min(c), b.max(d)),
        }
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            Support::Interval(lo, hi) => Some((lo, hi)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothness {
    Smooth,
    PiecewiseC1,
}

/// Value and first three derivatives of a field at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    /// Set when the point is an exceptional point of a piecewise-C¹ field and
    /// `d2`, `d3` are one-sided limits from inside the support.
    pub one_sided: bool,
}

impl FieldJet {
    pub const ZERO: FieldJet = FieldJet {
        f: 0.0,
        d1: 0.0,
        d2: 0.0,
        d3: 0.0,
        one_sided: false,
    };

    pub fn as_array(&self) -> [f64; 4] {
        [self.f, self.d1, self.d2, self.d3]
    }

    fn scaled(self, k: f64) -> FieldJet {
        FieldJet {
            f: k * self.f,
            d1: k * self.d1,
            d2: k * self.d2,
            d3: k * self.d3,
            one_sided: self.one_sided,
        }
    }

    fn plus(self, o: FieldJet) -> FieldJet {
        FieldJet {
            f: self.f + o.f,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d3: self.d3 + o.d3,
            one_sided: self.one_sided || o.one_sided,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Constant(f64),
    Bump {
        center: f64,
        halfwidth: f64,
        amplitude: f64,
    },
    Cos2,
    TrigPoly {
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    Sum(Vec<(f64, VectorField)>),
    Pushforward(Box<VectorField>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    picture: Picture,
    kind: Kind,
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {x}")))
    }
}

/// Jet of `exp(1 - 1/(1 - x²))` in `x`, zero for `|x| >= 1`.
fn standard_bump(x: f64) -> [f64; 4] {
    let q = 1.0 - x * x;
    if q <= 0.0 {
        return [0.0; 4];
    }
    let g = 1.0 - 1.0 / q;
    if g < -700.0 {
        return [0.0; 4];
    }
    let phi = g.exp();
    let q2 = q * q;
    let q3 = q2 * q;
    let g1 = -2.0 * x / q2;
    let g2 = -2.0 / q2 - 8.0 * x * x / q3;
    let g3 = -24.0 * x / q3 - 48.0 * x * x * x / (q3 * q);
    [
        phi,
        g1 * phi,
        (g2 + g1 * g1) * phi,
        (g3 + 3.0 * g1 * g2 + g1 * g1 * g1) * phi,
    ]
}

impl VectorField {
    /// `amplitude · exp(1 − 1/(1 − x²))`, `x = (u − center)/halfwidth`, on the line.
    pub fn bump(center: f64, halfwidth: f64, amplitude: f64) -> Result<Self> {
        finite("center", center)?;
        finite("amplitude", amplitude)?;
        if !(finite("halfwidth", halfwidth)? > 0.0) {
            return Err(Error::InvalidParameter(format!("halfwidth must be positive, got {halfwidth}")));
        }
        Ok(Self {
            picture: Picture::Line,
            kind: Kind::Bump {
                center,
                halfwidth,
                amplitude,
            },
        })
    }

    /// `cos² u` on `[−π/2, π/2]`, zero elsewhere. C¹ with exceptional points `±π/2`.
    pub fn cos2() -> Self {
        Self {
            picture: Picture::Line,
            kind: Kind::Cos2,
        }
    }

    /// Constant field on the whole line.
    pub fn constant(value: f64) -> Result<Self> {
        Ok(Self {
            picture: Picture::Line,
            kind: Kind::Constant(finite("value", value)?),
        })
    }

    pub fn zero(picture: Picture) -> Self {
        Self {
            picture,
            kind: Kind::Sum(Vec::new()),
        }
    }

    /// `Σ_k cos[k]·cos(kθ) + sin[k]·sin(kθ)` on the circle; index = mode number.
    pub fn trig_poly(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        for (i, &c) in cos.iter().chain(sin.iter()).enumerate() {
            finite(&format!("coefficient {i}"), c)?;
        }
        Ok(Self {
            picture: Picture::Circle,
            kind: Kind::TrigPoly { cos, sin },
        })
    }

    /// Linear combination of fields sharing one picture.
    pub fn sum(terms: Vec<(f64, VectorField)>) -> Result<Self> {
        let picture = terms.first().map(|t| t.1.picture).unwrap_or(Picture::Line);
        for (c, f) in &terms {
            finite("coefficient", *c)?;
            if f.picture != picture {
                return Err(Error::PictureMismatch {
                    expected: picture,
                    got: f.picture,
                });
            }
        }
        Ok(Self {
            picture,
            kind: Kind::Sum(terms),
        })
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            Kind::Sum(t) => t.iter().all(|(c, f)| *c == 0.0 || f.is_zero()),
            Kind::Constant(c) => *c == 0.0,
            Kind::Bump { amplitude, .. } => *amplitude == 0.0,
            Kind::TrigPoly { cos, sin } => cos.iter().chain(sin).all(|&c| c == 0.0),
            Kind::Pushforward(f) => f.is_zero(),
            Kind::Cos2 => false,
        }
    }

    pub fn support(&self) -> Support {
        match &self.kind {
            Kind::Constant(c) if *c == 0.0 => Support::Empty,
            Kind::Constant(_) => Support::Full,
            Kind::Bump {
                center,
                halfwidth,
                amplitude,
            } => {
                if *amplitude == 0.0 {
                    Support::Empty
                } else {
                    Support::Interval(center - halfwidth, center + halfwidth)
                }
            }
            Kind::Cos2 => Support::Interval(-FRAC_PI_2, FRAC_PI_2),
            Kind::TrigPoly { .. } => {
                if self.is_zero() {
                    Support::Empty
                } else {
                    Support::Full
                }
            }
            Kind::Sum(terms) => terms
                .iter()
                .filter(|(c, _)| *c != 0.0)
                .fold(Support::Empty, |s, (_, f)| s.hull(f.support())),
            Kind::Pushforward(f) => match f.support() {
                Support::Empty => Support::Empty,
                Support::Full => Support::Full,
                Support::Interval(lo, hi) => Support::Interval(2.0 * lo.atan(), 2.0 * hi.atan()),
            },
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        if self.exceptional_points().is_empty() {
            Smoothness::Smooth
        } else {
            Smoothness::PiecewiseC1
        }
    }

    /// Points where the field is only C¹.
    pub fn exceptional_points(&self) -> Vec<f64> {
        let mut pts = match &self.kind {
            Kind::Cos2 => vec![-FRAC_PI_2, FRAC_PI_2],
            Kind::Sum(terms) => terms.iter().flat_map(|(_, f)| f.exceptional_points()).collect(),
            Kind::Pushforward(f) => f.exceptional_points().into_iter().map(|u| 2.0 * u.atan()).collect(),
            _ => Vec::new(),
        };
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts
    }

    /// Exceptional points plus the support endpoints of every component;
    /// suitable as quadrature panel boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = self.exceptional_points();
        match &self.kind {
            Kind::Sum(terms) => pts.extend(terms.iter().flat_map(|(_, f)| f.breakpoints())),
            Kind::Pushforward(f) => pts.extend(f.breakpoints().into_iter().map(|u| 2.0 * u.atan())),
            _ => {}
        }
        if let Some((lo, hi)) = self.support().bounds() {
            pts.push(lo);
            pts.push(hi);
        }
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts
    }

    /// Full jet at `u`. Outside the support every entry is zero.
    pub fn jet(&self, u: f64) -> FieldJet {
        match &self.kind {
            Kind::Constant(c) => FieldJet { f: *c, ..FieldJet::ZERO },
            Kind::Bump {
                center,
                halfwidth,
                amplitude,
            } => {
                let x = (u - center) / halfwidth;
                if x.abs() >= 1.0 {
                    return FieldJet::ZERO;
                }
                let j = standard_bump(x);
                let w = *halfwidth;
                FieldJet {
                    f: amplitude * j[0],
                    d1: amplitude * j[1] / w,
                    d2: amplitude * j[2] / (w * w),
                    d3: amplitude * j[3] / (w * w * w),
                    one_sided: false,
                }
            }
            Kind::Cos2 => {
                if u.abs() > FRAC_PI_2 {
                    return FieldJet::ZERO;
                }
                let (s2, c2) = (2.0 * u).sin_cos();
                let c = u.cos();
                FieldJet {
                    f: c * c,
                    d1: -s2,
                    d2: -2.0 * c2,
                    d3: 4.0 * s2,
                    one_sided: u.abs() == FRAC_PI_2,
                }
            }
            Kind::TrigPoly { cos, sin } => {
                let mut j = FieldJet::ZERO;
                for (k, &a) in cos.iter().enumerate() {
                    let kf = k as f64;
                    let (s, c) = (kf * u).sin_cos();
                    j.f += a * c;
                    j.d1 -= a * kf * s;
                    j.d2 -= a * kf * kf * c;
                    j.d3 += a * kf * kf * kf * s;
                }
                for (k, &b) in sin.iter().enumerate() {
                    let kf = k as f64;
                    let (s, c) = (kf * u).sin_cos();
                    j.f += b * s;
                    j.d1 += b * kf * c;
                    j.d2 -= b * kf * kf * s;
                    j.d3 -= b * kf * kf * kf * c;
                }
                j
            }
            Kind::Sum(terms) => terms
                .iter()
                .fold(FieldJet::ZERO, |acc, (c, f)| acc.plus(f.jet(u).scaled(*c))),
            Kind::Pushforward(f) => pushforward_jet(f, u),
        }
    }

    /// `(f(u), …, f^(order)(u))` together with the one-sided flag.
    pub fn eval_jet(&self, u: f64, order: usize) -> Result<(Vec<f64>, bool)> {
        if order > 3 {
            return Err(Error::OrderOutOfRange(order));
        }
        let j = self.jet(u);
        Ok((j.as_array()[..=order].to_vec(), j.one_sided && order >= 2))
    }

    pub fn value(&self, u: f64) -> f64 {
        self.jet(u).f
    }

    /// Pointwise `a·f1 + b·f2`.
    pub fn combine(f1: &VectorField, f2: &VectorField, a: f64, b: f64) -> Result<Self> {
        if f1.picture != f2.picture {
            return Err(Error::PictureMismatch {
                expected: f1.picture,
                got: f2.picture,
            });
        }
        Self::sum(vec![(a, f1.clone()), (b, f2.clone())])
    }

    /// Pushforward of a line field through the Cayley transform, expressed in
    /// the angle `θ = 2·arctan(u)` of `C(u) = e^{iθ}`.
    pub fn cayley_pushforward(&self) -> Result<Self> {
        if self.picture != Picture::Line {
            return Err(Error::PictureMismatch {
                expected: Picture::Line,
                got: self.picture,
            });
        }
        Ok(Self {
            picture: Picture::Circle,
            kind: Kind::Pushforward(Box::new(self.clone())),
        })
    }

    /// Sup norm of `f''` sampled at `samples` points over the support.
    pub fn sup_second_derivative(&self, samples: usize) -> f64 {
        let (lo, hi) = match self.support() {
            Support::Empty => return 0.0,
            Support::Interval(lo, hi) => (lo, hi),
            Support::Full => match self.picture {
                Picture::Circle => (-PI, PI),
                Picture::Line => return f64::INFINITY,
            },
        };
        let n = samples.max(2);
        (0..n)
            .map(|i| self.jet(lo + (hi - lo) * i as f64 / (n - 1) as f64).d2.abs())
            .fold(0.0, f64::max)
    }

    /// Partial sum `Σ_n |f̂_n| (1+|n|)^s` of the `W^{s,1}` norm, with Fourier
    /// coefficients from an `n_modes`-point uniform sampling in `θ`.
    pub fn sobolev_norm(&self, s: f64, n_modes: usize) -> Result<f64> {
        if self.picture != Picture::Circle {
            return Err(Error::PictureMismatch {
                expected: Picture::Circle,
                got: self.picture,
            });
        }
        if n_modes < 16 {
            return Err(Error::InvalidParameter(format!("n_modes must be >= 16, got {n_modes}")));
        }
        let n = n_modes;
        let mut buf: Vec<Complex<f64>> = (0..n)
            .map(|j| Complex::new(self.value(2.0 * PI * j as f64 / n as f64), 0.0))
            .collect();
        let scale: f64 = buf.iter().map(|c| c.re.abs()).sum::<f64>() / n as f64;
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        // Coefficients at the round-off floor of the transform are dropped;
        // otherwise the (1+|n|)^s weight amplifies them into the sum.
        let floor = 64.0 * f64::EPSILON * scale;
        Ok(buf
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let mode = if k < n / 2 { k as f64 } else { (n - k) as f64 };
                let a = c.norm() / n as f64;
                if a <= floor {
                    0.0
                } else {
                    a * (1.0 + mode).powf(s)
                }
            })
            .sum())
    }
}

/// `F(θ) = w(θ)·f(u(θ))` with `u = tan(θ/2)`, `w = du/dθ⁻¹ = 1 + cos θ`.
fn pushforward_jet(f: &VectorField, theta: f64) -> FieldJet {
    let th = (theta + PI).rem_euclid(2.0 * PI) - PI;
    let u = (0.5 * th).tan();
    if !u.is_finite() {
        return FieldJet::ZERO;
    }
    if let Support::Interval(lo, hi) = f.support() {
        if u < lo || u > hi {
            return FieldJet::ZERO;
        }
    }
    let fj = f.jet(u);
    let s = 1.0 + u * u;
    let u1 = 0.5 * s;
    let u2 = u * u1;
    let u3 = u1 * u1 + u * u2;
    let g0 = fj.f;
    let g1 = fj.d1 * u1;
    let g2 = fj.d2 * u1 * u1 + fj.d1 * u2;
    let g3 = fj.d3 * u1 * u1 * u1 + 3.0 * fj.d2 * u1 * u2 + fj.d1 * u3;
    let (sn, cs) = th.sin_cos();
    let (w0, w1, w2, w3) = (1.0 + cs, -sn, -cs, sn);
    FieldJet {
        f: w0 * g0,
        d1: w1 * g0 + w0 * g1,
        d2: w2 * g0 + 2.0 * w1 * g1 + w0 * g2,
        d3: w3 * g0 + 3.0 * w2 * g1 + 3.0 * w1 * g2 + w0 * g3,
        one_sided: fj.one_sided,
    }
}

/// JSON description of a field, as read by the command-line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldSpec {
    Bump {
        center: f64,
        halfwidth: f64,
        amplitude: f64,
    },
    Cos2,
    Constant {
        value: f64,
    },
    Sum {
        terms: Vec<SumTerm>,
    },
    #[serde(rename = "trigpoly")]
    TrigPoly {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// Cayley pushforward of a line field onto the circle.
    Cayley {
        field: Box<FieldSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumTerm {
    #[serde(flatten)]
    pub spec: FieldSpec,
    #[serde(default = "one")]
    pub coef: f64,
}

fn one() -> f64 {
    1.0
}

impl FieldSpec {
    pub fn build(&self) -> Result<VectorField> {
        match self {
            FieldSpec::Bump {
                center,
                halfwidth,
                amplitude,
            } => VectorField::bump(*center, *halfwidth, *amplitude),
            FieldSpec::Cos2 => Ok(VectorField::cos2()),
            FieldSpec::Constant { value } => VectorField::constant(*value),
            FieldSpec::Sum { terms } => VectorField::sum(
                terms
                    .iter()
                    .map(|t| Ok((t.coef, t.spec.build()?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            FieldSpec::TrigPoly { cos, sin } => VectorField::trig_poly(cos.clone(), sin.clone()),
            FieldSpec::Cayley { field } => field.build()?.cayley_pushforward(),
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<FieldSpec, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent closed form of the bump, written out directly.
    fn bump_oracle(c: f64, w: f64, a: f64, u: f64) -> f64 {
        let x = (u - c) / w;
        if x.abs() >= 1.0 {
            0.0
        } else {
            a * (1.0 - 1.0 / (1.0 - x * x)).exp()
        }
    }

    fn central_diff(f: impl Fn(f64) -> f64, u: f64, h: f64) -> f64 {
        (-f(u + 2.0 * h) + 8.0 * f(u + h) - 8.0 * f(u - h) + f(u - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn bump_examples() {
        let b = VectorField::bump(0.0, 1.0, 1.0).unwrap();
        let j = b.jet(0.0);
        assert_eq!(j.f, 1.0);
        assert_eq!(j.d1, 0.0);
        assert_eq!(b.jet(1.5).as_array(), [0.0; 4]);
        let b = VectorField::bump(2.0, 0.5, -0.3).unwrap();
        assert!((b.value(2.1) - bump_oracle(2.0, 0.5, -0.3, 2.1)).abs() < 1e-14);
        let (v, _) = VectorField::bump(0.0, 1.0, 1.0).unwrap().eval_jet(0.5, 0).unwrap();
        assert!((v[0] - bump_oracle(0.0, 1.0, 1.0, 0.5)).abs() < 1e-15);
    }

    #[test]
    fn bump_rejects_bad_parameters() {
        assert!(VectorField::bump(0.0, 0.0, 1.0).is_err());
        assert!(VectorField::bump(f64::NAN, 1.0, 1.0).is_err());
        assert!(VectorField::bump(0.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let b = VectorField::bump(0.3, 0.7, 0.45).unwrap();
        for &u in &[-0.2, 0.1, 0.3, 0.55, 0.8] {
            let j = b.jet(u);
            let h = 1e-4;
            assert!((central_diff(|x| b.jet(x).f, u, h) - j.d1).abs() < 1e-8);
            assert!((central_diff(|x| b.jet(x).d1, u, h) - j.d2).abs() < 1e-7);
            assert!((central_diff(|x| b.jet(x).d2, u, h) - j.d3).abs() < 1e-6);
        }
    }

    #[test]
    fn bump_near_edge_is_finite() {
        let b = VectorField::bump(0.0, 1.0, 1.0).unwrap();
        for &u in &[0.999_999, 1.0 - 1e-12, -1.0 + 1e-15] {
            assert!(b.jet(u).as_array().iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn cos2_examples() {
        let f = VectorField::cos2();
        let j = f.jet(0.0);
        assert_eq!((j.f, j.d1, j.d2), (1.0, 0.0, -2.0));
        let j = f.jet(FRAC_PI_2);
        assert!(j.f.abs() < 1e-16 && j.d1.abs() < 1e-15);
        assert!(j.one_sided);
        assert_eq!(f.value(2.0), 0.0);
        assert_eq!(f.smoothness(), Smoothness::PiecewiseC1);
        let (v, flag) = f.eval_jet(0.0, 1).unwrap();
        assert_eq!(v, vec![1.0, 0.0]);
        assert!(!flag);
        let (v, flag) = f.eval_jet(-FRAC_PI_2, 3).unwrap();
        assert!(flag);
        // one-sided limit from inside: f'' = -2 cos(2u) -> 2
        assert!((v[2] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eval_jet_order_checked() {
        assert_eq!(VectorField::cos2().eval_jet(0.0, 4), Err(Error::OrderOutOfRange(4)));
        let (v, _) = VectorField::cos2().eval_jet(7.0, 3).unwrap();
        assert_eq!(v, vec![0.0; 4]);
    }

    #[test]
    fn combine_examples() {
        let a = VectorField::bump(0.0, 1.0, 0.4).unwrap();
        let b = VectorField::bump(0.5, 0.8, -0.2).unwrap();
        let z = VectorField::combine(&a, &a, 1.0, -1.0).unwrap();
        for i in 0..50 {
            let u = -1.2 + 0.05 * i as f64;
            assert_eq!(z.jet(u).as_array(), [0.0; 4]);
        }
        let far = VectorField::bump(5.0, 1.0, 0.3).unwrap();
        let s = VectorField::combine(&a, &far, 1.0, 1.0).unwrap();
        assert_eq!(s.jet(0.2).as_array(), a.jet(0.2).as_array());
        let s = VectorField::combine(&a, &b, 2.0, 3.0).unwrap();
        let u = 0.3;
        assert!((s.value(u) - (2.0 * bump_oracle(0.0, 1.0, 0.4, u) + 3.0 * bump_oracle(0.5, 0.8, -0.2, u))).abs() < 1e-15);
        assert_eq!(s.support(), Support::Interval(-1.0, 1.3));
    }

    #[test]
    fn combine_picture_mismatch() {
        let a = VectorField::cos2();
        let c = VectorField::trig_poly(vec![0.0, 1.0], vec![]).unwrap();
        assert!(matches!(VectorField::combine(&a, &c, 1.0, 1.0), Err(Error::PictureMismatch { .. })));
    }

    #[test]
    fn support_invariant_sampled() {
        let f = VectorField::sum(vec![
            (1.0, VectorField::bump(-1.0, 0.5, 0.3).unwrap()),
            (0.5, VectorField::cos2()),
        ])
        .unwrap();
        let (lo, hi) = f.support().bounds().unwrap();
        for i in 0..200 {
            let d = 0.01 + 0.05 * i as f64;
            assert_eq!(f.jet(lo - d).as_array(), [0.0; 4]);
            assert_eq!(f.jet(hi + d).as_array(), [0.0; 4]);
        }
    }

    #[test]
    fn trig_poly_jets() {
        let f = VectorField::trig_poly(vec![0.1, 0.0, 0.3], vec![0.0, -0.2]).unwrap();
        for &th in &[0.0, 1.0, 2.5, -2.0] {
            let j = f.jet(th);
            let exact = 0.1 + 0.3 * (2.0 * th).cos() - 0.2 * th.sin();
            assert!((j.f - exact).abs() < 1e-15);
            let d3 = 0.3 * 8.0 * (2.0 * th).sin() + 0.2 * th.cos();
            assert!((j.d3 - d3).abs() < 1e-14);
        }
    }

    #[test]
    fn cayley_pushforward_identity() {
        let f = VectorField::bump(0.5, 2.0, 0.35).unwrap();
        let g = f.cayley_pushforward().unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..50 {
            let u = -10.0 + 20.0 * i as f64 / 49.0;
            let theta = 2.0 * u.atan();
            // Complex-picture check: i e^{iθ} F(θ) = C'(u) f(u), C'(u) = 2i/(1 - iu)².
            let (s, c) = theta.sin_cos();
            let lhs = Complex::new(-s, c) * g.value(theta);
            let denom = Complex::new(1.0, -u);
            let rhs = Complex::new(0.0, 2.0) / (denom * denom) * f.value(u);
            worst = worst.max((lhs - rhs).norm());
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn cayley_pushforward_jets_and_support() {
        let f = VectorField::bump(-0.3, 1.1, 0.25).unwrap();
        let g = f.cayley_pushforward().unwrap();
        for &th in &[-1.2, -0.4, 0.1, 0.6] {
            let j = g.jet(th);
            let h = 1e-4;
            assert!((central_diff(|x| g.jet(x).f, th, h) - j.d1).abs() < 1e-8);
            assert!((central_diff(|x| g.jet(x).d1, th, h) - j.d2).abs() < 1e-7);
            assert!((central_diff(|x| g.jet(x).d2, th, h) - j.d3).abs() < 1e-6);
        }
        // vanishes near θ = π, the image of infinity
        for i in 0..20 {
            let th = PI - 0.5 + 0.05 * i as f64;
            assert_eq!(g.value(th), 0.0);
        }
        let zero = VectorField::zero(Picture::Line).cayley_pushforward().unwrap();
        assert_eq!(zero.value(0.3), 0.0);
        assert_eq!(zero.support(), Support::Empty);
    }

    #[test]
    fn sobolev_examples() {
        let c = VectorField::trig_poly(vec![0.0, 1.0], vec![]).unwrap();
        assert!((c.sobolev_norm(1.5, 1024).unwrap() - 2f64.powf(1.5)).abs() < 1e-12);
        let s = VectorField::trig_poly(vec![], vec![0.0, 0.0, 1.0]).unwrap();
        assert!((s.sobolev_norm(0.0, 64).unwrap() - 1.0).abs() < 1e-12);
        let z = VectorField::zero(Picture::Circle);
        assert_eq!(z.sobolev_norm(1.5, 16).unwrap(), 0.0);
        assert!(VectorField::cos2().sobolev_norm(1.0, 64).is_err());
        assert!(c.sobolev_norm(1.0, 8).is_err());
    }

    #[test]
    fn sobolev_converges_for_smooth_field() {
        let g = VectorField::bump(0.0, 1.5, 0.4).unwrap().cayley_pushforward().unwrap();
        let vals: Vec<f64> = [64, 128, 256, 512, 1024]
            .iter()
            .map(|&n| g.sobolev_norm(1.5, n).unwrap())
            .collect();
        let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(diffs.windows(2).all(|d| d[1] <= d[0] + 1e-12), "{vals:?}");
        assert!(diffs.last().unwrap() < &1e-4, "{vals:?}");
    }

    #[test]
    fn json_specs_parse() {
        let spec = FieldSpec::from_json(
            r#"{"kind":"sum","terms":[{"kind":"bump","center":0.5,"halfwidth":1,"amplitude":0.2,"coef":2},{"kind":"cos2","coef":-1}]}"#,
        )
        .unwrap();
        let f = spec.build().unwrap();
        let u = 0.7;
        let expect = 2.0 * bump_oracle(0.5, 1.0, 0.2, u) - u.cos().powi(2);
        assert!((f.value(u) - expect).abs() < 1e-15);
        let empty = FieldSpec::from_json(r#"{"kind":"sum","terms":[]}"#).unwrap().build().unwrap();
        assert!(empty.is_zero());
        let trig = FieldSpec::from_json(r#"{"kind":"trigpoly","cos":[0,1],"sin":[]}"#).unwrap().build().unwrap();
        assert_eq!(trig.picture(), Picture::Circle);
        assert!(FieldSpec::from_json(r#"{"kind":"wiggle"}"#).is_err());
        let bad = FieldSpec::from_json(r#"{"kind":"sum","terms":[{"kind":"cos2"},{"kind":"trigpoly","cos":[1]}]}"#).unwrap();
        assert!(bad.build().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn combine_is_linear(c1 in -2.0..2.0f64, w1 in 0.2..1.5f64, c2 in -2.0..2.0f64, w2 in 0.2..1.5f64,
                                 a in -3.0..3.0f64, b in -3.0..3.0f64, u in -4.0..4.0f64) {
                let f1 = VectorField::bump(c1, w1, 0.4).unwrap();
                let f2 = VectorField::bump(c2, w2, -0.3).unwrap();
                let s = VectorField::combine(&f1, &f2, a, b).unwrap().jet(u).as_array();
                let (j1, j2) = (f1.jet(u).as_array(), f2.jet(u).as_array());
                for k in 0..4 {
                    let expect = a * j1[k] + b * j2[k];
                    prop_assert!((s[k] - expect).abs() <= 1e-14 * (1.0 + expect.abs()));
                }
            }
        }
    }
}
