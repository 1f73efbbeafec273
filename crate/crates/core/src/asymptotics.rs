//! Approximation sequences for maps with non-trivial endpoint derivatives,
//! the limit integrals `I_n`, `J_n`, and the extensivity deviation with its
//! bound.

use serde::{Deserialize, Serialize};

use crate::diffeo::{Diffeomorphism, Jet3};
use crate::entropy::{entropy_half_line, Direction};
use crate::error::{Error, Result};
use crate::fields::{Picture, Support, VectorField};
use crate::flows::{exponentiate, flow_value, FlowConfig};
use crate::quad::{self, Integral, QuadConfig};
use crate::roots::bracketed_newton;

fn check_rate(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("rate must be finite and positive, got {r}")))
    }
}

/// `h(1/n) = (r − 1)/(n log r)`, the image of the right end of `[0, 1/n]`.
fn h_end(r: f64, n: f64) -> f64 {
    let l = r.ln();
    if l == 0.0 {
        1.0 / n
    } else {
        l.exp_m1() / (n * l)
    }
}

fn h_jet(l: f64, n: f64, x: f64) -> Jet3 {
    let k = n * l;
    let e = (k * x).exp();
    let value = if k == 0.0 { x } else { (k * x).exp_m1() / k };
    Jet3 { value, d1: e, d2: k * e, d3: k * k * e }
}

/// `h_n(u) = (n log r)⁻¹(e^{n log r · u} − 1)`, meant for `u ∈ [0, 1/n]`.
/// `r = 1` gives the identity.
pub fn h_seq(r: f64, n: usize) -> Result<Diffeomorphism> {
    check_rate(r)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if r == 1.0 {
        return Ok(Diffeomorphism::identity(Picture::Line));
    }
    let (l, nf) = (r.ln(), n as f64);
    Ok(Diffeomorphism::explicit(
        Picture::Line,
        "h_n",
        Support::Interval(0.0, 1.0 / nf),
        false,
        vec![0.0, 1.0 / nf],
        move |u| Ok(h_jet(l, nf, u)),
    ))
}

/// `∫_0^{1/n} u (h_n''/h_n')² du` by quadrature; equals `(log r)²/2`.
pub fn h_seq_integral(r: f64, n: usize, cfg: &QuadConfig) -> Result<Integral> {
    let h = h_seq(r, n)?;
    let r = quad::integrate(
        |u| {
            let l = h.jet(u)?.log_ratio();
            Ok::<_, Error>(u * l * l)
        },
        &[0.0, 1.0 / n as f64],
        cfg,
    )?;
    Ok(r)
}

/// Which second exponent to use in `σ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaExponent {
    /// `log(n/r)/log n` in both places, so that `σ_n(0) = 0`.
    #[default]
    Consistent,
    /// `log(n/r)/log r` in the subtracted constant, as printed.
    Printed,
}

/// `σ_n(u) = (log n/log(n/r))[(u + 1/n)^p − (1/n)^q]` with
/// `p = log(n/r)/log n`, meant for `u ∈ [0, 1 − 1/n]`.
pub fn sigma_seq(r: f64, n: usize, exponent: SigmaExponent) -> Result<Diffeomorphism> {
    check_rate(r)?;
    let nf = n as f64;
    if n < 2 || nf <= r {
        return Err(Error::InvalidParameter(format!("sigma_n needs n ≥ 2 and n > r, got n = {n}, r = {r}")));
    }
    let p = (nf / r).ln() / nf.ln();
    let q = match exponent {
        SigmaExponent::Consistent => p,
        SigmaExponent::Printed => (nf / r).ln() / r.ln(),
    };
    let scale = 1.0 / p;
    let offset = (1.0 / nf).powf(q);
    Ok(Diffeomorphism::explicit(
        Picture::Line,
        "sigma_n",
        Support::Interval(0.0, 1.0 - 1.0 / nf),
        false,
        vec![0.0, 1.0 - 1.0 / nf],
        move |u| {
            let x = u + 1.0 / nf;
            if x <= 0.0 {
                return Err(Error::InvalidParameter(format!("sigma_n is defined for u > -1/n, got {u}")));
            }
            let d1 = x.powf(p - 1.0);
            Jet3::new(scale * (x.powf(p) - offset), d1, (p - 1.0) * d1 / x, (p - 1.0) * (p - 2.0) * d1 / (x * x))
        },
    ))
}

/// `ζ_n` on `[−1/n, 0]`, evaluated through `w = (1 + nu)^{1/n}`:
/// `ζ_n(u) = −1/n + ∫_0^w s^{n−1} e^{s log r} ds`.
#[derive(Debug, Clone, Copy)]
pub struct ZetaSeq {
    l: f64,
    n: f64,
    cfg: QuadConfig,
}

impl ZetaSeq {
    fn w(&self, u: f64) -> Result<f64> {
        let v = 1.0 + self.n * u;
        if v < 0.0 {
            return Err(Error::InvalidParameter(format!("zeta_n is defined for u ≥ -1/n, got {u}")));
        }
        Ok(v.powf(1.0 / self.n))
    }

    pub fn value(&self, u: f64) -> Result<f64> {
        let w = self.w(u)?;
        let (l, n) = (self.l, self.n);
        let r = quad::integrate_uniform(|s: f64| Ok::<_, Error>(s.powf(n - 1.0) * (l * s).exp()), 0.0, w, 4, &self.cfg)?;
        Ok(-1.0 / n + r.value)
    }

    /// `ζ_n'(u) = exp[(log r)(1 + nu)^{1/n}]`.
    pub fn d1(&self, u: f64) -> Result<f64> {
        Ok((self.l * self.w(u)?).exp())
    }

    /// `(log ζ_n')' = (log r)(1 + nu)^{1/n − 1}`; infinite at `u = −1/n` for `n > 1`.
    pub fn log_derivative(&self, u: f64) -> Result<f64> {
        let v = 1.0 + self.n * u;
        Ok(self.l * v.powf(1.0 / self.n - 1.0))
    }

    fn jet(&self, u: f64) -> Result<Jet3> {
        let v = 1.0 + self.n * u;
        let d1 = self.d1(u)?;
        let g = self.log_derivative(u)?;
        let dg = self.l * (1.0 / self.n - 1.0) * self.n * v.powf(1.0 / self.n - 2.0);
        Jet3::new(self.value(u)?, d1, d1 * g, d1 * (g * g + dg))
    }
}

pub fn zeta_seq_parts(r: f64, n: usize, cfg: &QuadConfig) -> Result<ZetaSeq> {
    check_rate(r)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(ZetaSeq { l: r.ln(), n: n as f64, cfg: *cfg })
}

/// `ζ_n` as a map. Jets at `u = −1/n` itself are infinite for `n > 1`;
/// use [`ZetaSeq`] for the endpoint value and first derivative.
pub fn zeta_seq(r: f64, n: usize, cfg: &QuadConfig) -> Result<Diffeomorphism> {
    let z = zeta_seq_parts(r, n, cfg)?;
    let nf = n as f64;
    Ok(Diffeomorphism::explicit(
        Picture::Line,
        "zeta_n",
        Support::Interval(-1.0 / nf, 0.0),
        false,
        vec![-1.0 / nf, 0.0],
        move |u| z.jet(u),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuLimits {
    pub n: usize,
    pub i_n: f64,
    pub j_n: f64,
    pub quad_err: f64,
}

/// `I_n` and `J_n` on the interval `(−1/n, 3 + 1/n)`, with the weight in
/// `I_n` taken as the dilation density of that interval.
pub fn nu_limit_integrals(r0: f64, r3: f64, n: usize, cfg: &QuadConfig) -> Result<NuLimits> {
    check_rate(r0)?;
    check_rate(r3)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let nf = n as f64;
    let (lo, hi) = (-1.0 / nf, 3.0 + 1.0 / nf);
    let width = hi - lo;
    // Both end layers in the variable v = 1 + n·dist ∈ [0, 1], where
    // dist is the distance from the inner end (0 or 3). Near the outer end
    // D = v·(width − v/n)/(n·width), so one factor of v joins the weight.
    let d_over_v = |v: f64| Ok::<_, Error>((width - v / nf) / (nf * width));
    let alpha = -1.0 + 2.0 / nf;
    let layer_i = quad::integrate_power_weight(d_over_v, alpha, cfg)?.scale(1.0 / nf);
    let layer_j = quad::integrate_power_weight(|_| Ok::<_, Error>(1.0), 1.0 / nf, cfg)?.scale(1.0 / nf);
    let (l0, l3) = (r0.ln(), r3.ln());
    let sq = l0 * l0 + l3 * l3;
    Ok(NuLimits {
        n,
        i_n: sq * layer_i.value,
        j_n: (l0 + l3) * layer_j.value,
        quad_err: sq * layer_i.abs_err + (l0.abs() + l3.abs()) * layer_j.abs_err,
    })
}

/// Pieces of the glued map on `[a, b]`.
#[derive(Debug, Clone, Copy)]
struct Glue {
    a: f64,
    b: f64,
    an: f64,
    bn: f64,
    n: f64,
    l1: f64,
    l2: f64,
    left_end: f64,
    m1: f64,
    m2: f64,
}

/// The glued approximant `ρ_n`: identity outside `[a, b]`, exponential
/// layers `a + h^{r₁}(u − a)` on `[a, a_n]` and `b − h^{r₂}(b − u)` on
/// `[b_n, b]`, and an affinely conjugated copy of `ρ` in between. The rates
/// `r₁ = λρ'(a)`, `r₂ = λρ'(b)` are solved for so that the map is exactly
/// `C¹`; `λ → 1` as `n → ∞`.
pub fn glued_sequence(rho: &Diffeomorphism, a: f64, b: f64, n: usize) -> Result<Diffeomorphism> {
    let (glue, rho) = glue(rho, a, b, n)?;
    Ok(Diffeomorphism::explicit(
        Picture::Line,
        "glued rho_n",
        Support::Interval(a, b),
        true,
        vec![glue.a, glue.an, glue.bn, glue.b],
        move |u| glue.jet(&rho, u),
    ))
}

fn glue(rho: &Diffeomorphism, a: f64, b: f64, n: usize) -> Result<(Glue, Diffeomorphism)> {
    if rho.picture() != Picture::Line {
        return Err(Error::PictureMismatch { expected: Picture::Line, got: rho.picture() });
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidParameter(format!("need finite a < b, got ({a}, {b})")));
    }
    let nf = n as f64;
    let (an, bn) = (a + 1.0 / nf, b - 1.0 / nf);
    if n == 0 || an >= bn {
        return Err(Error::InvalidParameter(format!("n = {n} leaves no middle piece in ({a}, {b})")));
    }
    let (ja, jb) = (rho.jet(a)?, rho.jet(b)?);
    for (p, j) in [(a, ja), (b, jb)] {
        if (j.value - p).abs() > 1e-9 * (1.0 + p.abs()) {
            return Err(Error::EndpointNotFixed { point: p, image: j.value });
        }
    }
    let (ra, rb) = (ja.d1, jb.d1);
    let m2 = (b - a) / (bn - an);
    let gap = |lam: f64| (b - a) - h_end(lam * ra, nf) - h_end(lam * rb, nf);
    let lam = bracketed_newton(|lam| Ok((lam - m2 * gap(lam) / (b - a), 1.0)), 1e-12, 4.0 * m2 + 1.0, 1e-15)?;
    let span = gap(lam);
    if !(span > 0.0) {
        return Err(Error::NonMonotonic { u: an });
    }
    let (r1, r2) = (lam * ra, lam * rb);
    let glue = Glue {
        a,
        b,
        an,
        bn,
        n: nf,
        l1: r1.ln(),
        l2: r2.ln(),
        left_end: a + h_end(r1, nf),
        m1: span / (b - a),
        m2,
    };
    Ok((glue, rho.clone()))
}

impl Glue {
    fn jet(&self, rho: &Diffeomorphism, u: f64) -> Result<Jet3> {
        if u <= self.a || u >= self.b {
            return Ok(Jet3::identity(u));
        }
        if u < self.an {
            let j = h_jet(self.l1, self.n, u - self.a);
            return Ok(Jet3 { value: self.a + j.value, ..j });
        }
        if u > self.bn {
            let j = h_jet(self.l2, self.n, self.b - u);
            return Ok(Jet3 { value: self.b - j.value, d1: j.d1, d2: -j.d2, d3: j.d3 });
        }
        let (m1, m2) = (self.m1, self.m2);
        let j = rho.jet(self.a + m2 * (u - self.an))?;
        Jet3::new(
            self.left_end + m1 * (j.value - self.a),
            m1 * m2 * j.d1,
            m1 * m2 * m2 * j.d2,
            m1 * m2 * m2 * m2 * j.d3,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitTerm {
    pub n: usize,
    pub value: f64,
    pub diff: f64,
    pub quad_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTrace {
    pub target: f64,
    pub terms: Vec<LimitTerm>,
}

/// Number of panels over the middle piece.
const MIDDLE_PANELS: usize = 32;

fn weighted_schwarzian(map: &Diffeomorphism, a: f64, b: f64, marks: &[f64], cfg: &QuadConfig) -> Result<Integral> {
    let pts = quad::breakpoints(a, b, marks, Some((a, b, MIDDLE_PANELS)));
    let r = quad::integrate(
        |u| {
            let s = map.jet(u)?.schwarzian();
            if s.is_finite() {
                Ok((b - u) * (u - a) / (b - a) * s)
            } else {
                Err(Error::NonFinite { op: "schwarzian", u })
            }
        },
        &pts,
        cfg,
    )?;
    if !r.value.is_finite() {
        return Err(Error::QuadratureFailed { err: r.abs_err });
    }
    Ok(r)
}

/// `∫_a^b D_{(a,b)} Sρ_n` for each `n`, against the limit
/// `−((log ρ'(a))² + (log ρ'(b))²)/4 + ∫_a^b D_{(a,b)} Sρ`.
/// The Schwarzian of `ρ_n` is integrated piecewise between the junctions.
pub fn schwarzian_limit_check(rho: &Diffeomorphism, a: f64, b: f64, ns: &[usize], cfg: &QuadConfig) -> Result<LimitTrace> {
    let (la, lb) = (rho.jet(a)?.d1.ln(), rho.jet(b)?.d1.ln());
    let base = weighted_schwarzian(rho, a, b, rho.breakpoints(), cfg)?;
    let target = -(la * la + lb * lb) / 4.0 + base.value;
    let mut terms = Vec::with_capacity(ns.len());
    for &n in ns {
        let (g, _) = glue(rho, a, b, n)?;
        let rho_n = glued_sequence(rho, a, b, n)?;
        let mut marks = vec![g.an, g.bn];
        marks.extend(rho.breakpoints().iter().map(|&x| g.an + (x - a) / g.m2));
        let r = weighted_schwarzian(&rho_n, a, b, &marks, cfg)?;
        terms.push(LimitTerm {
            n,
            value: r.value,
            diff: r.value - target,
            quad_err: r.abs_err + base.abs_err,
        });
    }
    Ok(LimitTrace { target, terms })
}

fn sum_field(f1: &VectorField, f2: &VectorField) -> Result<VectorField> {
    VectorField::sum(vec![(1.0, f1.clone()), (1.0, f2.clone())])
}

/// `δ(f₁, f₂)(u) = f'(η(u)) − f₁'(η₁(u)) − f₂'(η₂(u))` with `f = f₁ + f₂`
/// and `η`, `η_i` the time `−1` flows.
pub fn extensivity_delta(f1: &VectorField, f2: &VectorField, u: f64, cfg: &FlowConfig) -> Result<f64> {
    let f = sum_field(f1, f2)?;
    let mut out = 0.0;
    for (g, sign) in [(&f, 1.0), (f1, -1.0), (f2, -1.0)] {
        let eta = flow_value(g, -1.0, u, cfg)?;
        out += sign * g.jet(eta).d1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensivityReport {
    pub t: f64,
    pub s_exact: f64,
    pub eps0: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub quad_err: f64,
}

/// Sampling density for `‖f''‖_∞`.
pub const SUP_SAMPLES: usize = 10_000;

/// `s_t = S_{f₁+f₂}(t) − S_{f₁}(t) − S_{f₂}(t)` in the `StateVsVacuum`
/// direction, with
/// * `ε₀ = (c/24)(‖f₁''‖ + ‖f₂''‖)²(b − a)²(b₁ − t)₊²/2`
/// * `ε_i = (c/12)√(S_{f_i} ε₀)`
/// * `ε₃ = 2√(S_{f₁} S_{f₂})`
///
/// where `[a, b]` is the hull of both supports and `b₁ ≤ b₂` are their
/// right ends.
pub fn extensivity_report(
    f1: &VectorField,
    f2: &VectorField,
    t: f64,
    c: f64,
    flow_cfg: &FlowConfig,
    cfg: &QuadConfig,
) -> Result<ExtensivityReport> {
    for g in [f1, f2] {
        if g.picture() != Picture::Line {
            return Err(Error::PictureMismatch { expected: Picture::Line, got: g.picture() });
        }
        if g.support() == Support::Full {
            return Err(Error::NotLocalized);
        }
    }
    let entropy = |g: &VectorField| -> Result<(f64, f64)> {
        let rho = exponentiate(g, 1.0, flow_cfg)?;
        let r = entropy_half_line(&rho, t, c, Direction::StateVsVacuum, cfg)?;
        Ok((r.value, r.quad_err))
    };
    let f = sum_field(f1, f2)?;
    let (s12, e12) = entropy(&f)?;
    let (s1, e1) = entropy(f1)?;
    let (s2, e2) = entropy(f2)?;
    let s_exact = s12 - s1 - s2;
    let quad_err = e12 + e1 + e2;

    let b1 = match (f1.support().bounds(), f2.support().bounds()) {
        (Some((_, x)), Some((_, y))) => x.min(y),
        _ => t,
    };
    let (lo, hi) = f.support().bounds().unwrap_or((0.0, 0.0));
    let norms = f1.sup_second_derivative(SUP_SAMPLES) + f2.sup_second_derivative(SUP_SAMPLES);
    let lag = (b1 - t).max(0.0);
    let eps0 = c / 24.0 * norms * norms * (hi - lo).powi(2) * lag * lag / 2.0;
    let eps1 = c / 12.0 * (s1.max(0.0) * eps0).sqrt();
    let eps2 = c / 12.0 * (s2.max(0.0) * eps0).sqrt();
    let eps3 = 2.0 * (s1.max(0.0) * s2.max(0.0)).sqrt();
    let bound = eps0 + eps1 + eps2 + eps3;
    Ok(ExtensivityReport {
        t,
        s_exact,
        eps0,
        eps1,
        eps2,
        eps3,
        bound,
        satisfied: s_exact.abs() <= bound + quad_err.max(1e-12),
        quad_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn h_seq_identity_and_endpoint_data() {
        assert!(h_seq(1.0, 3).unwrap().tags().contains(&crate::diffeo::ClassTag::Identity));
        assert_eq!(h_seq_integral(1.0, 3, &cfg()).unwrap().value, 0.0);
        let h = h_seq(2.0, 5).unwrap();
        let j0 = h.jet(0.0).unwrap();
        assert_eq!((j0.value, j0.d1), (0.0, 1.0));
        assert!((h.jet(0.2).unwrap().d1 - 2.0).abs() < 1e-12);
        assert!(h_seq(0.0, 5).is_err());
        assert!(h_seq(-1.0, 5).is_err());
    }

    #[test]
    fn h_seq_integral_identity() {
        for r in [0.5, 2.0, E, 10.0] {
            for n in [1, 5, 50] {
                let v = h_seq_integral(r, n, &cfg()).unwrap().value;
                let want = r.ln().powi(2) / 2.0;
                assert!((v - want).abs() < 1e-10, "r={r} n={n}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn sigma_endpoint_data() {
        for n in [10, 100, 1000] {
            let s = sigma_seq(2.0, n, SigmaExponent::Consistent).unwrap();
            assert!(s.jet(0.0).unwrap().value.abs() < 1e-15);
            assert!((s.jet(0.0).unwrap().d1 - 2.0).abs() < 1e-12);
            let end = 1.0 - 1.0 / n as f64;
            let j = s.jet(end).unwrap();
            assert!((j.d1 - 1.0).abs() < 1e-12);
            let nf = n as f64;
            let closed = nf.ln() / (nf / 2.0).ln() * (1.0 - 2.0 / nf);
            assert!((j.value - closed).abs() < 1e-12);
        }
        assert!(sigma_seq(5.0, 4, SigmaExponent::Consistent).is_err());
        assert!(sigma_seq(2.0, 1, SigmaExponent::Consistent).is_err());
    }

    #[test]
    fn sigma_end_value_tends_to_one() {
        let gaps: Vec<f64> = [1e3, 1e6, 1e12]
            .iter()
            .map(|&n| {
                let s = sigma_seq(2.0, n as usize, SigmaExponent::Consistent).unwrap();
                (s.jet(1.0 - 1.0 / n).unwrap().value - 1.0).abs()
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 0.03, "{gaps:?}");
    }

    #[test]
    fn printed_sigma_exponent_misses_origin() {
        let s = sigma_seq(2.0, 10, SigmaExponent::Printed).unwrap();
        assert!(s.jet(0.0).unwrap().value.abs() > 0.1);
    }

    #[test]
    fn zeta_endpoint_data() {
        for n in [10, 100, 1000] {
            let z = zeta_seq_parts(2.0, n, &cfg()).unwrap();
            let nf = n as f64;
            assert!((z.value(-1.0 / nf).unwrap() + 1.0 / nf).abs() < 1e-15);
            assert_eq!(z.d1(-1.0 / nf).unwrap(), 1.0);
            assert!((z.d1(0.0).unwrap() - 2.0).abs() < 1e-15);
        }
        let ends: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| zeta_seq_parts(2.0, n, &cfg()).unwrap().value(0.0).unwrap())
            .collect();
        assert!(ends[0].abs() > ends[1].abs() && ends[1].abs() > ends[2].abs(), "{ends:?}");
        assert!(ends[2].abs() < 2e-3);
    }

    #[test]
    fn zeta_value_matches_direct_quadrature() {
        let (n, r) = (7usize, 3.0f64);
        let z = zeta_seq_parts(r, n, &cfg()).unwrap();
        let nf = n as f64;
        // Direct integral of exp[(log r)(ns + 1)^{1/n}] in s, through its
        // mild endpoint singularity.
        let direct = quad::integrate_uniform(
            |s: f64| Ok::<_, Error>((r.ln() * (nf * s + 1.0).max(0.0).powf(1.0 / nf)).exp()),
            -1.0 / nf,
            -0.05,
            64,
            &QuadConfig { abs_tol: 1e-13, ..cfg() },
        )
        .unwrap();
        assert!((z.value(-0.05).unwrap() - (-1.0 / nf + direct.value)).abs() < 1e-9);
    }

    #[test]
    fn zeta_log_derivative_vs_finite_difference() {
        let z = zeta_seq_parts(2.0, 10, &cfg()).unwrap();
        let map = zeta_seq(2.0, 10, &cfg()).unwrap();
        for u in [-0.09, -0.05, -0.01, 0.0] {
            let cd = |h: f64| ((z.d1(u + h).unwrap()).ln() - (z.d1(u - h).unwrap()).ln()) / (2.0 * h);
            let fd = (4.0 * cd(1e-5) - cd(2e-5)) / 3.0;
            assert!((fd - z.log_derivative(u).unwrap()).abs() < 1e-8, "u={u}");
            assert!((map.jet(u).unwrap().log_ratio() - z.log_derivative(u).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn nu_limits_closed_forms() {
        for n in [2usize, 10, 100, 1000] {
            let nf = n as f64;
            let (l0, l3) = (2f64.ln(), 0.5f64.ln());
            let r = nu_limit_integrals(2.0, 0.5, n, &cfg()).unwrap();
            let j = (l0 + l3) / (nf + 1.0);
            let i = (l0 * l0 + l3 * l3) / (nf * nf) * (nf / 2.0 - 1.0 / (nf * (3.0 + 2.0 / nf) * (1.0 + 2.0 / nf)));
            assert!((r.j_n - j).abs() < 1e-12, "n={n}");
            assert!((r.i_n - i).abs() < 1e-10 * (1.0 + i), "n={n}: {} vs {i}", r.i_n);
        }
        let trivial = nu_limit_integrals(1.0, 1.0, 10, &cfg()).unwrap();
        assert_eq!((trivial.i_n, trivial.j_n), (0.0, 0.0));
    }

    #[test]
    fn nu_limits_by_direct_weighting() {
        // The left layer with the dilation density evaluated as is, on the
        // graded mesh 1 + nu = w^10.
        let n = 10usize;
        let nf = n as f64;
        let (lo, hi) = (-1.0 / nf, 3.0 + 1.0 / nf);
        let direct = quad::integrate_uniform(
            |w: f64| {
                let v = w.powi(10);
                let u = lo + v / nf;
                let jac = 10.0 * w.powi(9) / nf;
                // u − lo taken as v/n; the subtraction would cancel near the end.
                Ok::<_, Error>((hi - u) * (v / nf) / (hi - lo) * v.powf(-2.0 * (1.0 - 1.0 / nf)) * jac)
            },
            0.0,
            1.0,
            16,
            &cfg(),
        )
        .unwrap();
        let r = nu_limit_integrals(E, 1.0, n, &cfg()).unwrap();
        assert!((r.i_n - direct.value).abs() < 1e-10, "{} vs {}", r.i_n, direct.value);
    }

    #[test]
    fn glued_map_is_c1_with_unit_endpoint_slopes() {
        let f = VectorField::sum(vec![
            (1.0, VectorField::bump(-0.5, 1.0, 0.4).unwrap()),
            (-1.0, VectorField::bump(0.5, 1.0, 0.4).unwrap()),
        ])
        .unwrap();
        let rho = exponentiate(&f, 1.0, &FlowConfig::default()).unwrap();
        let n = 50;
        let g = glued_sequence(&rho, 0.0, 2.0, n).unwrap();
        let an = 1.0 / n as f64;
        let bn = 2.0 - an;
        for x in [0.0, an, bn, 2.0] {
            let (l, r) = (g.jet(x - 1e-12).unwrap(), g.jet(x + 1e-12).unwrap());
            assert!((l.value - r.value).abs() < 1e-10, "value at {x}");
            assert!((l.d1 - r.d1).abs() < 1e-9, "slope at {x}: {} {}", l.d1, r.d1);
        }
        assert!((g.jet(1e-13).unwrap().d1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bump_pair_limit_trace() {
        let f = VectorField::sum(vec![
            (1.0, VectorField::bump(-0.5, 1.0, 0.2).unwrap()),
            (-1.0, VectorField::bump(0.5, 1.0, 0.2).unwrap()),
        ])
        .unwrap();
        let rho = exponentiate(&f, 1.0, &FlowConfig::default()).unwrap();
        assert!((rho.jet(0.0).unwrap().d1 - 1.0).abs() > 0.1);
        let tr = schwarzian_limit_check(&rho, 0.0, 3.0, &[10, 100, 1000], &cfg()).unwrap();
        let d: Vec<f64> = tr.terms.iter().map(|t| t.diff.abs()).collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
        assert!(d[2] < 1e-3, "{d:?}");
    }

    #[test]
    fn identity_limit_is_zero() {
        let id = Diffeomorphism::identity(Picture::Line);
        let tr = schwarzian_limit_check(&id, 0.0, 3.0, &[10, 100], &cfg()).unwrap();
        assert_eq!(tr.target, 0.0);
        assert!(tr.terms.iter().all(|t| t.value.abs() < 1e-14));
    }

    #[test]
    fn unfixed_endpoints_rejected() {
        let rho = exponentiate(&VectorField::bump(0.0, 1.0, 0.3).unwrap(), 1.0, &FlowConfig::default()).unwrap();
        assert!(matches!(
            glued_sequence(&rho, 0.0, 2.0, 10),
            Err(Error::EndpointNotFixed { .. })
        ));
    }

    fn bumps(c1: f64, c2: f64) -> (VectorField, VectorField) {
        (VectorField::bump(c1, 1.0, 0.4).unwrap(), VectorField::bump(c2, 1.0, -0.3).unwrap())
    }

    #[test]
    fn delta_vanishes_for_disjoint_or_zero() {
        let fc = FlowConfig::default();
        let (f1, f2) = bumps(-2.0, 2.0);
        for u in [-2.5, -1.5, 0.0, 1.7, 2.9] {
            assert!(extensivity_delta(&f1, &f2, u, &fc).unwrap().abs() < 1e-9);
        }
        let zero = VectorField::zero(Picture::Line);
        for u in [-1.5, 0.3] {
            assert!(extensivity_delta(&f1, &zero, u, &fc).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn delta_matches_closed_form_chain() {
        // Inverse flows from the quadrature-and-root closed form instead of the ODE.
        let fc = FlowConfig::default();
        let (f1, f2) = bumps(-0.3, 0.4);
        let f = sum_field(&f1, &f2).unwrap();
        let term = |g: &VectorField, u: f64| {
            let eta = if g.value(u) == 0.0 { u } else { crate::flows::closed_form_flow(g, -1.0, u).unwrap() };
            g.jet(eta).d1
        };
        for u in [-0.5, 0.0, 0.2, 0.9] {
            let d = extensivity_delta(&f1, &f2, u, &fc).unwrap();
            let chain = term(&f, u) - term(&f1, u) - term(&f2, u);
            assert!((d - chain).abs() < 1e-10, "u={u}: {d} vs {chain}");
        }
    }

    #[test]
    fn disjoint_supports_are_additive() {
        let (f1, f2) = bumps(-2.0, 2.0);
        for t in [-3.0, -2.0, 0.0, 1.5] {
            let r = extensivity_report(&f1, &f2, t, 1.0, &FlowConfig::default(), &cfg()).unwrap();
            assert!(r.s_exact.abs() < 1e-8, "t={t}: {}", r.s_exact);
            assert!(r.satisfied);
        }
    }

    #[test]
    fn zero_partner_is_trivial() {
        let (f1, _) = bumps(0.0, 0.0);
        let zero = VectorField::zero(Picture::Line);
        let r = extensivity_report(&f1, &zero, -0.5, 1.0, &FlowConfig::default(), &cfg()).unwrap();
        assert!(r.s_exact.abs() < 1e-12);
        assert_eq!((r.eps0, r.eps2, r.eps3), (0.0, 0.0, 0.0));
        assert!(r.satisfied);
    }

    #[test]
    fn overlapping_bound_holds_on_grid() {
        let (f1, f2) = bumps(-0.3, 0.4);
        for i in 0..10 {
            let t = -1.3 + 2.0 * i as f64 / 9.0;
            let r = extensivity_report(&f1, &f2, t, 1.0, &FlowConfig::default(), &cfg()).unwrap();
            assert!(r.satisfied, "t={t}: {r:?}");
        }
    }

    #[test]
    fn deviation_survives_past_first_support() {
        // The backward flow of f2 from u > t carries points into supp f1, so
        // f1 still contributes although the printed bound is zero there.
        let f1 = VectorField::bump(-0.5, 0.4, 0.3).unwrap();
        let f2 = VectorField::bump(-0.2, 1.0, 0.5).unwrap();
        let eta2 = exponentiate(&f2, -1.0, &FlowConfig::default()).unwrap();
        assert!(eta2.value(0.0).unwrap() < -0.1);
        let r = extensivity_report(&f1, &f2, 0.0, 1.0, &FlowConfig::default(), &cfg()).unwrap();
        assert_eq!(r.bound, 0.0);
        assert!(r.s_exact.abs() > 1e-4, "{r:?}");
        assert!(!r.satisfied);
    }
}
