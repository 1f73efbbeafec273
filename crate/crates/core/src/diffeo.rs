//! Orientation-preserving diffeomorphisms of the line (or angle lifts of
//! circle maps) with third-order jets.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{Picture, Support, VectorField};
use crate::flows::{self, FlowConfig};
use crate::roots::{bracketed_newton, expand_bracket};

/// Value and first three derivatives of a map at a point; `d1 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet3 {
    pub fn new(value: f64, d1: f64, d2: f64, d3: f64) -> Result<Self> {
        if !(value.is_finite() && d1.is_finite() && d2.is_finite() && d3.is_finite()) {
            return Err(Error::NonFinite { op: "jet", u: value });
        }
        if d1 <= 0.0 {
            return Err(Error::NonMonotonic { u: value });
        }
        Ok(Self { value, d1, d2, d3 })
    }

    pub fn identity(u: f64) -> Self {
        Self {
            value: u,
            d1: 1.0,
            d2: 0.0,
            d3: 0.0,
        }
    }

    /// Jet of `outer ∘ inner`, where `outer` is evaluated at `inner.value`.
    pub fn chain(outer: Jet3, inner: Jet3) -> Jet3 {
        let (s1, s2, s3) = (inner.d1, inner.d2, inner.d3);
        Jet3 {
            value: outer.value,
            d1: outer.d1 * s1,
            d2: outer.d2 * s1 * s1 + outer.d1 * s2,
            d3: outer.d3 * s1 * s1 * s1 + 3.0 * outer.d2 * s1 * s2 + outer.d1 * s3,
        }
    }

    /// Jet of the inverse map at `self.value`, given the jet of the map at `x`.
    pub fn invert_at(self, x: f64) -> Jet3 {
        let (p1, p2, p3) = (self.d1, self.d2, self.d3);
        Jet3 {
            value: x,
            d1: 1.0 / p1,
            d2: -p2 / (p1 * p1 * p1),
            d3: -p3 / (p1 * p1 * p1 * p1) + 3.0 * p2 * p2 / (p1 * p1 * p1 * p1 * p1),
        }
    }

    /// `ρ''/ρ'`.
    pub fn log_ratio(&self) -> f64 {
        self.d2 / self.d1
    }

    /// `ρ'''/ρ' − (3/2)(ρ''/ρ')²`.
    pub fn schwarzian(&self) -> f64 {
        let l = self.d2 / self.d1;
        self.d3 / self.d1 - 1.5 * l * l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassTag {
    Identity,
    /// Affine `u ↦ m u + q`, `m > 0`; the only Möbius maps built here.
    Moebius,
    Flow,
    Composition,
    Inverse,
    Explicit,
}

type JetFn = dyn Fn(f64) -> Result<Jet3> + Send + Sync;

enum Node {
    Identity,
    Affine { slope: f64, shift: f64 },
    Flow { field: VectorField, t: f64, cfg: FlowConfig },
    Compose { outer: Diffeomorphism, inner: Diffeomorphism },
    Inverse { inner: Diffeomorphism, bracket: Option<(f64, f64)> },
    Explicit { label: String, jet: Arc<JetFn> },
}

/// An immutable, cheaply clonable map. Circle maps are represented by their
/// angle lift `φ(θ + 2π) = φ(θ) + 2π`.
#[derive(Clone)]
pub struct Diffeomorphism {
    picture: Picture,
    node: Arc<Node>,
    /// Closed hull of the set where the map is not affine.
    active: Support,
    /// Whether the map is the identity outside `active`.
    identity_outside: bool,
    breakpoints: Arc<Vec<f64>>,
}

impl fmt::Debug for Diffeomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Diffeomorphism");
        d.field("picture", &self.picture);
        match &*self.node {
            Node::Identity => d.field("kind", &"identity"),
            Node::Affine { slope, shift } => d.field("affine", &(slope, shift)),
            Node::Flow { t, .. } => d.field("flow_time", t),
            Node::Compose { .. } => d.field("kind", &"composition"),
            Node::Inverse { .. } => d.field("kind", &"inverse"),
            Node::Explicit { label, .. } => d.field("explicit", label),
        };
        d.field("active", &self.active).finish()
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.retain(|x| x.is_finite());
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

impl Diffeomorphism {
    pub fn identity(picture: Picture) -> Self {
        Self {
            picture,
            node: Arc::new(Node::Identity),
            active: Support::Empty,
            identity_outside: true,
            breakpoints: Arc::new(Vec::new()),
        }
    }

    /// `u ↦ slope·u + shift`. On the circle only rotations (`slope = 1`) are lifts.
    pub fn affine(picture: Picture, slope: f64, shift: f64) -> Result<Self> {
        if !(slope.is_finite() && shift.is_finite()) || slope <= 0.0 {
            return Err(Error::InvalidParameter(format!("affine map needs finite slope > 0, got {slope}, {shift}")));
        }
        if picture == Picture::Circle && slope != 1.0 {
            return Err(Error::InvalidParameter("circle lifts of affine maps must have slope 1".into()));
        }
        if slope == 1.0 && shift == 0.0 {
            return Ok(Self::identity(picture));
        }
        Ok(Self {
            picture,
            node: Arc::new(Node::Affine { slope, shift }),
            active: Support::Empty,
            identity_outside: false,
            breakpoints: Arc::new(Vec::new()),
        })
    }

    pub(crate) fn flow(field: VectorField, t: f64, cfg: FlowConfig) -> Self {
        let picture = field.picture();
        if t == 0.0 || field.is_zero() {
            return Self::identity(picture);
        }
        let active = field.support();
        let breakpoints = Arc::new(field.breakpoints());
        Self {
            picture,
            node: Arc::new(Node::Flow { field, t, cfg }),
            active,
            identity_outside: true,
            breakpoints,
        }
    }

    /// A map given by a closed-form jet. `active` must contain every point
    /// where the map is not affine; if `identity_outside` the map is the
    /// identity off `active`.
    pub fn explicit<F>(picture: Picture, label: &str, active: Support, identity_outside: bool, breakpoints: Vec<f64>, jet: F) -> Self
    where
        F: Fn(f64) -> Result<Jet3> + Send + Sync + 'static,
    {
        Self {
            picture,
            node: Arc::new(Node::Explicit {
                label: label.to_string(),
                jet: Arc::new(jet),
            }),
            active,
            identity_outside,
            breakpoints: Arc::new(sorted(breakpoints)),
        }
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn active_hull(&self) -> Support {
        self.active
    }

    pub fn identity_outside(&self) -> bool {
        self.identity_outside
    }

    /// Bounded non-affine region: required by every entropy formula.
    pub fn is_localized(&self) -> bool {
        !matches!(self.active, Support::Full)
    }

    /// Points where jets of order ≥ 2 may jump, plus active-hull endpoints.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn tags(&self) -> Vec<ClassTag> {
        match &*self.node {
            Node::Identity => vec![ClassTag::Identity, ClassTag::Moebius],
            Node::Affine { .. } => vec![ClassTag::Moebius],
            Node::Flow { .. } => vec![ClassTag::Flow],
            Node::Compose { outer, inner } => {
                let mut t = vec![ClassTag::Composition];
                if outer.is_moebius() && inner.is_moebius() {
                    t.push(ClassTag::Moebius);
                }
                t
            }
            Node::Inverse { inner, .. } => {
                let mut t = vec![ClassTag::Inverse];
                if inner.is_moebius() {
                    t.push(ClassTag::Moebius);
                }
                t
            }
            Node::Explicit { .. } => vec![ClassTag::Explicit],
        }
    }

    pub fn is_moebius(&self) -> bool {
        self.tags().contains(&ClassTag::Moebius)
    }

    /// Generating field and time, for flow nodes.
    pub fn flow_data(&self) -> Option<(&VectorField, f64)> {
        match &*self.node {
            Node::Flow { field, t, .. } => Some((field, *t)),
            _ => None,
        }
    }

    /// Endpoints of a bounded active hull with the map's derivative there.
    /// For maps in `B(a, b)` these are `(a, 1)` and `(b, 1)`.
    pub fn fixed_point_data(&self) -> Option<Vec<(f64, f64)>> {
        if !self.identity_outside {
            return None;
        }
        let (lo, hi) = self.active.bounds()?;
        let mut out = Vec::new();
        for p in [lo, hi] {
            out.push((p, self.jet(p).ok()?.d1));
        }
        Some(out)
    }

    pub fn jet(&self, u: f64) -> Result<Jet3> {
        if !u.is_finite() {
            return Err(Error::NonFinite { op: "jet query", u });
        }
        match &*self.node {
            Node::Identity => Ok(Jet3::identity(u)),
            Node::Affine { slope, shift } => Ok(Jet3 {
                value: slope * u + shift,
                d1: *slope,
                d2: 0.0,
                d3: 0.0,
            }),
            Node::Flow { field, t, cfg } => flows::flow_jet(field, *t, u, cfg),
            Node::Compose { outer, inner } => {
                let ji = inner.jet(u)?;
                let jo = outer.jet(ji.value)?;
                let j = Jet3::chain(jo, ji);
                Jet3::new(j.value, j.d1, j.d2, j.d3)
            }
            Node::Inverse { inner, .. } => {
                if self.identity_outside && !self.active.contains(u) {
                    return Ok(Jet3::identity(u));
                }
                let x = self.solve_inverse(inner, u)?;
                let j = inner.jet(x)?;
                Ok(j.invert_at(x))
            }
            Node::Explicit { jet, .. } => {
                let j = jet(u)?;
                Jet3::new(j.value, j.d1, j.d2, j.d3)
            }
        }
    }

    pub fn value(&self, u: f64) -> Result<f64> {
        match &*self.node {
            Node::Flow { field, t, cfg } => flows::flow_value(field, *t, u, cfg),
            Node::Compose { outer, inner } => outer.value(inner.value(u)?),
            Node::Affine { slope, shift } => Ok(slope * u + shift),
            Node::Identity => Ok(u),
            _ => Ok(self.jet(u)?.value),
        }
    }

    fn solve_inverse(&self, inner: &Diffeomorphism, y: f64) -> Result<f64> {
        let bracket = match &*self.node {
            Node::Inverse { bracket, .. } => *bracket,
            _ => None,
        };
        let g = |x: f64| inner.value(x).map(|v| v - y);
        let (lo, hi) = match bracket {
            Some((lo, hi)) if g(lo)? <= 0.0 && g(hi)? >= 0.0 => (lo, hi),
            _ => match inner.active.bounds() {
                Some((lo, hi)) if inner.identity_outside && y >= lo && y <= hi => (lo, hi),
                _ => expand_bracket(&g, y, 1.0)?,
            },
        };
        let scale = 1.0 + lo.abs().max(hi.abs());
        bracketed_newton(
            |x| {
                let j = inner.jet(x)?;
                Ok((j.value - y, j.d1))
            },
            lo,
            hi,
            4.0 * f64::EPSILON * scale,
        )
    }

    /// `ρ⁻¹(y)`.
    pub fn inverse_value(&self, y: f64) -> Result<f64> {
        self.inverse().value(y)
    }

    /// The inverse map. Flows invert exactly (`Exp(−t f)`), affine maps in
    /// closed form; anything else solves `ρ(x) = y` per query.
    pub fn inverse(&self) -> Diffeomorphism {
        match &*self.node {
            Node::Identity => self.clone(),
            Node::Affine { slope, shift } => {
                Self::affine(self.picture, 1.0 / slope, -shift / slope).expect("inverse of a valid affine map")
            }
            Node::Flow { field, t, cfg } => Self::flow(field.clone(), -t, *cfg),
            Node::Inverse { inner, .. } => inner.clone(),
            Node::Compose { outer, inner } => Self::compose_unchecked(inner.inverse(), outer.inverse()),
            Node::Explicit { .. } => self.generic_inverse(None),
        }
    }

    fn generic_inverse(&self, bracket: Option<(f64, f64)>) -> Diffeomorphism {
        let map = |x: f64| self.value(x).ok();
        let active = image_support(self.active, map);
        let breakpoints = self.breakpoints.iter().filter_map(|&b| map(b)).collect();
        Self {
            picture: self.picture,
            node: Arc::new(Node::Inverse {
                inner: self.clone(),
                bracket,
            }),
            active,
            identity_outside: self.identity_outside,
            breakpoints: Arc::new(sorted(breakpoints)),
        }
    }

    fn compose_unchecked(outer: Diffeomorphism, inner: Diffeomorphism) -> Diffeomorphism {
        if matches!(*outer.node, Node::Identity) {
            return inner;
        }
        if matches!(*inner.node, Node::Identity) {
            return outer;
        }
        if let (Node::Affine { slope: m1, shift: q1 }, Node::Affine { slope: m2, shift: q2 }) = (&*outer.node, &*inner.node) {
            if let Ok(d) = Self::affine(outer.picture, m1 * m2, m1 * q2 + q1) {
                return d;
            }
        }
        let pre = |y: f64| inner.inverse_value(y).ok();
        let active = inner.active.hull(image_support(outer.active, pre));
        let mut bps: Vec<f64> = inner.breakpoints.to_vec();
        bps.extend(outer.breakpoints.iter().filter_map(|&b| pre(b)));
        Self {
            picture: outer.picture,
            identity_outside: outer.identity_outside && inner.identity_outside,
            node: Arc::new(Node::Compose { outer, inner }),
            active,
            breakpoints: Arc::new(sorted(bps)),
        }
    }
}

/// Image of a support set under an increasing map; unknown images widen to `Full`.
fn image_support(s: Support, map: impl Fn(f64) -> Option<f64>) -> Support {
    match s {
        Support::Interval(lo, hi) => match (map(lo), map(hi)) {
            (Some(a), Some(b)) => Support::Interval(a.min(b), a.max(b)),
            _ => Support::Full,
        },
        other => other,
    }
}

/// `outer ∘ inner`.
pub fn compose(outer: &Diffeomorphism, inner: &Diffeomorphism) -> Result<Diffeomorphism> {
    if outer.picture != inner.picture {
        return Err(Error::PictureMismatch {
            expected: outer.picture,
            got: inner.picture,
        });
    }
    Ok(Diffeomorphism::compose_unchecked(outer.clone(), inner.clone()))
}

/// Inverse of `rho`, after checking that it increases on 64 samples of `[lo, hi]`.
pub fn invert(rho: &Diffeomorphism, lo: f64, hi: f64) -> Result<Diffeomorphism> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::InvalidParameter(format!("invert needs lo < hi, got [{lo}, {hi}]")));
    }
    let n = 64;
    let mut prev = rho.value(lo)?;
    for i in 1..=n {
        let u = lo + (hi - lo) * i as f64 / n as f64;
        let v = rho.value(u)?;
        if v <= prev {
            return Err(Error::NonMonotonic { u });
        }
        prev = v;
    }
    Ok(match &*rho.node {
        Node::Explicit { .. } => rho.generic_inverse(Some((lo, hi))),
        _ => rho.inverse(),
    })
}

/// Affine `α(u) = c u + d` with `α(pa) = a`, `α(pb) = b`.
pub fn moebius_fixing(a: f64, b: f64, pa: f64, pb: f64) -> Result<Diffeomorphism> {
    if pa == pb {
        return Err(Error::InvalidParameter(format!("degenerate source points pa = pb = {pa}")));
    }
    let slope = (b - a) / (pb - pa);
    Diffeomorphism::affine(Picture::Line, slope, a - slope * pa)
}

pub fn schwarzian(rho: &Diffeomorphism, u: f64) -> Result<f64> {
    Ok(rho.jet(u)?.schwarzian())
}

/// `ρ''(u)/ρ'(u)`.
pub fn log_derivative_ratio(rho: &Diffeomorphism, u: f64) -> Result<f64> {
    Ok(rho.jet(u)?.log_ratio())
}
