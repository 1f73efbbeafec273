//! Seeded invariant suites. Each property draws its own fields, records the
//! largest residual it sees and compares it with a fixed tolerance.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    extensivity_delta, extensivity_report, h_seq, h_seq_integral, nu_limit_integrals, schwarzian_limit_check, sigma_seq, zeta_seq_parts,
    SigmaExponent,
};
use crate::cocycles::{anomaly_beta, bott_cocycle, central_term_omega, coboundary_check};
use crate::diffeo::{compose, moebius_fixing, Diffeomorphism};
use crate::entropy::{
    bekenstein_check, entropy_half_line, entropy_half_line_derivatives, entropy_interval, entropy_interval_fixed_endpoint_forms, Direction,
};
use crate::error::{Error, Result};
use crate::fields::{Picture, Support, VectorField};
use crate::flows::{closed_form_flow, exponentiate, flow_jet, flow_value, FlowConfig};
use crate::quad::QuadConfig;
use crate::random::FieldSampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Flows,
    Schwarzian,
    Entropy,
    Cocycles,
    Asymptotics,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Flows, Suite::Schwarzian, Suite::Entropy, Suite::Cocycles, Suite::Asymptotics];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Flows => "flows",
            Suite::Schwarzian => "schwarzian",
            Suite::Entropy => "entropy",
            Suite::Cocycles => "cocycles",
            Suite::Asymptotics => "asymptotics",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub c: f64,
    pub quad: QuadConfig,
    pub flow: FlowConfig,
    /// Random fields (or triples, pairs) drawn per property.
    pub samples: usize,
    /// Multiplies every tolerance; only useful for exercising the failure path.
    pub tolerance_scale: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            c: 1.0,
            quad: QuadConfig::default(),
            flow: FlowConfig::default(),
            samples: 4,
            tolerance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub suite: Suite,
    pub property: String,
    pub checks: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub error: Option<String>,
}

struct Ctx<'a> {
    rng: FieldSampler,
    cfg: &'a VerifyConfig,
    worst: f64,
    checks: usize,
}

impl Ctx<'_> {
    fn record(&mut self, r: f64) {
        self.checks += 1;
        if r.is_nan() || self.worst.is_nan() {
            self.worst = f64::NAN;
        } else {
            self.worst = self.worst.max(r.abs());
        }
    }

    /// Records `max(0, −margin)`.
    fn record_at_least(&mut self, margin: f64) {
        self.record(if margin.is_nan() { f64::NAN } else { (-margin).max(0.0) });
    }

    fn q(&self) -> &QuadConfig {
        &self.cfg.quad
    }

    fn fc(&self) -> &FlowConfig {
        &self.cfg.flow
    }

    fn line_flow(&mut self, t: f64) -> Result<(VectorField, Diffeomorphism)> {
        let f = self.rng.bump_sum()?;
        let rho = exponentiate(&f, t, self.fc())?;
        Ok((f, rho))
    }

    fn circle_field(&mut self) -> Result<VectorField> {
        self.rng.trig_poly(3, 0.12)
    }

    fn circle_flow(&mut self) -> Result<Diffeomorphism> {
        let f = self.circle_field()?;
        let t = self.rng.uniform(0.5, 1.0);
        exponentiate(&f, t, self.fc())
    }

    /// Points spread over the support with some margin outside it.
    fn points(&mut self, f: &VectorField, k: usize) -> Vec<f64> {
        let (lo, hi) = f.support().bounds().unwrap_or((-1.0, 1.0));
        (0..k).map(|_| self.rng.uniform(lo - 0.3, hi + 0.3)).collect()
    }
}

type Body = fn(&mut Ctx) -> Result<()>;

struct Property {
    suite: Suite,
    name: &'static str,
    tolerance: f64,
    body: Body,
}

const fn prop(suite: Suite, name: &'static str, tolerance: f64, body: Body) -> Property {
    Property { suite, name, tolerance, body }
}

const PROPERTIES: &[Property] = &[
    prop(Suite::Flows, "group_law", 1e-8, group_law),
    prop(Suite::Flows, "inverse_roundtrip", 1e-8, inverse_roundtrip),
    prop(Suite::Flows, "transport_identity", 1e-8, transport_identity),
    prop(Suite::Flows, "closed_form_vs_ode", 1e-8, closed_form_vs_ode),
    prop(Suite::Flows, "identity_off_support", 0.0, identity_off_support),
    prop(Suite::Flows, "orientation_preserving", 0.0, orientation_preserving),
    prop(Suite::Schwarzian, "moebius_vanishing", 1e-12, moebius_vanishing),
    prop(Suite::Schwarzian, "flow_not_moebius", 0.0, flow_not_moebius),
    prop(Suite::Schwarzian, "chain_rule", 1e-8, chain_rule),
    prop(Suite::Schwarzian, "inverse_rule", 1e-8, inverse_rule),
    prop(Suite::Schwarzian, "jet_finite_differences", 1e-6, jet_finite_differences),
    prop(Suite::Entropy, "qnec_second_derivative", 1e-4, qnec_second_derivative),
    prop(Suite::Entropy, "qnec_nonnegative", 1e-10, qnec_nonnegative),
    prop(Suite::Entropy, "exchange_identity", 1e-8, exchange_identity),
    prop(Suite::Entropy, "affine_covariance", 1e-8, affine_covariance),
    prop(Suite::Entropy, "fixed_endpoint_forms", 1e-8, fixed_endpoint_forms),
    prop(Suite::Entropy, "bekenstein", 1e-9, bekenstein),
    prop(Suite::Entropy, "positivity", 1e-10, positivity),
    prop(Suite::Entropy, "interval_monotonicity", 1e-9, interval_monotonicity),
    prop(Suite::Entropy, "central_charge_scaling", 1e-12, central_charge_scaling),
    prop(Suite::Cocycles, "coboundary", 1e-7, coboundary),
    prop(Suite::Cocycles, "bott_identity", 1e-12, bott_identity),
    prop(Suite::Cocycles, "omega_antisymmetry", 1e-10, omega_antisymmetry),
    prop(Suite::Cocycles, "omega_bilinearity", 1e-10, omega_bilinearity),
    prop(Suite::Cocycles, "omega_fourier", 1e-10, omega_fourier),
    prop(Suite::Cocycles, "beta_linearization", 1e-6, beta_linearization),
    prop(Suite::Asymptotics, "h_integral_identity", 1e-10, h_integral_identity),
    prop(Suite::Asymptotics, "sequence_endpoints", 1e-12, sequence_endpoints),
    prop(Suite::Asymptotics, "nu_limits_decrease", 0.0, nu_limits_decrease),
    prop(Suite::Asymptotics, "schwarzian_limit", 1e-3, schwarzian_limit),
    prop(Suite::Asymptotics, "extensivity_bound", 0.0, extensivity_bound),
    prop(Suite::Asymptotics, "disjoint_additivity", 1e-8, disjoint_additivity),
];

/// Properties that check a bound which does not hold in general, with the
/// reason. They are still run and reported as failures when violated.
pub const KNOWN_UNATTAINABLE: &[(Suite, &str, &str)] = &[(
    Suite::Asymptotics,
    "extensivity_bound",
    "the printed bound vanishes for t >= b1, but the backward flow of f1+f2 can carry points from (t, inf) into supp f1",
)];

/// Reason a property is listed in [`KNOWN_UNATTAINABLE`], if it is.
pub fn known_unattainable(suite: Suite, property: &str) -> Option<&'static str> {
    KNOWN_UNATTAINABLE.iter().find(|(s, p, _)| *s == suite && *p == property).map(|(_, _, why)| *why)
}

/// Names of the properties in `suite`, in run order.
pub fn property_names(suite: Suite) -> Vec<&'static str> {
    PROPERTIES.iter().filter(|p| p.suite == suite).map(|p| p.name).collect()
}

fn property_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn run_property(index: usize, p: &Property, cfg: &VerifyConfig) -> PropertyOutcome {
    let mut ctx = Ctx {
        rng: FieldSampler::new(property_seed(cfg.seed, index)),
        cfg,
        worst: 0.0,
        checks: 0,
    };
    let error = (p.body)(&mut ctx).err().map(|e| e.to_string());
    let tolerance = p.tolerance * cfg.tolerance_scale;
    PropertyOutcome {
        suite: p.suite,
        property: p.name.to_string(),
        checks: ctx.checks,
        max_residual: ctx.worst,
        tolerance,
        pass: error.is_none() && ctx.checks > 0 && ctx.worst <= tolerance,
        error,
    }
}

/// Runs every property of `suite`, each seeded independently of the others.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Vec<PropertyOutcome> {
    PROPERTIES
        .iter()
        .enumerate()
        .filter(|(_, p)| p.suite == suite)
        .map(|(i, p)| run_property(i, p, cfg))
        .collect()
}

/// Runs a single named property.
pub fn run_property_named(suite: Suite, name: &str, cfg: &VerifyConfig) -> Option<PropertyOutcome> {
    PROPERTIES
        .iter()
        .enumerate()
        .find(|(_, p)| p.suite == suite && p.name == name)
        .map(|(i, p)| run_property(i, p, cfg))
}

fn group_law(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let f = ctx.rng.bump_sum()?;
        let (s, t) = (ctx.rng.uniform(-1.0, 1.0), ctx.rng.uniform(-1.0, 1.0));
        for u in ctx.points(&f, 10) {
            let lhs = flow_value(&f, s + t, u, ctx.fc())?;
            let rhs = flow_value(&f, s, flow_value(&f, t, u, ctx.fc())?, ctx.fc())?;
            ctx.record(lhs - rhs);
        }
    }
    Ok(())
}

fn inverse_roundtrip(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let t = ctx.rng.uniform(-1.0, 1.0);
        let (f, rho) = ctx.line_flow(t)?;
        let eta = rho.inverse();
        for u in ctx.points(&f, 10) {
            ctx.record(eta.value(rho.value(u)?)? - u);
        }
    }
    Ok(())
}

fn transport_identity(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let f = ctx.rng.bump_sum()?;
        let t = ctx.rng.uniform(-1.0, 1.0);
        for u in ctx.points(&f, 20) {
            let fu = f.value(u);
            if fu.abs() < 0.05 {
                continue;
            }
            let j = flow_jet(&f, t, u, ctx.fc())?;
            ctx.record(j.d1 - f.value(j.value) / fu);
        }
    }
    Ok(())
}

fn closed_form_vs_ode(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let f = ctx.rng.bump_sum()?;
        let t = ctx.rng.uniform(-1.0, 1.0);
        for u in ctx.points(&f, 20) {
            if f.value(u).abs() < 0.05 {
                continue;
            }
            ctx.record(closed_form_flow(&f, t, u)? - flow_value(&f, t, u, ctx.fc())?);
        }
    }
    Ok(())
}

fn identity_off_support(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (f, rho) = ctx.line_flow(1.0)?;
        let Some((lo, hi)) = f.support().bounds() else { continue };
        for u in [lo - 2.0, lo - 1e-3, lo, hi, hi + 1e-3, hi + 2.0] {
            ctx.record(rho.value(u)? - u);
            let j = rho.jet(u)?;
            ctx.record(j.d1 - 1.0);
        }
    }
    Ok(())
}

fn orientation_preserving(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let t = ctx.rng.uniform(-1.0, 1.0);
        let (f, rho) = ctx.line_flow(t)?;
        for u in ctx.points(&f, 20) {
            ctx.record_at_least(rho.jet(u)?.d1);
        }
    }
    Ok(())
}

fn moebius_vanishing(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (a, b) = (ctx.rng.uniform(-3.0, 0.0), ctx.rng.uniform(0.5, 3.0));
        let (pa, pb) = (ctx.rng.uniform(-3.0, 0.0), ctx.rng.uniform(0.5, 3.0));
        let m = moebius_fixing(a, b, pa, pb)?;
        if !m.is_moebius() {
            return Err(Error::InvalidParameter("affine map not tagged as Moebius".into()));
        }
        for _ in 0..10 {
            let u = ctx.rng.uniform(-5.0, 5.0);
            ctx.record(m.jet(u)?.schwarzian());
        }
    }
    Ok(())
}

fn flow_not_moebius(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (f, rho) = ctx.line_flow(1.0)?;
        let mut top: f64 = 0.0;
        for u in ctx.points(&f, 40) {
            top = top.max(rho.jet(u)?.schwarzian().abs());
        }
        ctx.record(if rho.is_moebius() || top < 1e-8 { 1.0 } else { 0.0 });
    }
    Ok(())
}

fn chain_rule(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (f1, r1) = ctx.line_flow(1.0)?;
        let t2 = ctx.rng.uniform(-1.0, 1.0);
        let (_, r2) = ctx.line_flow(t2)?;
        let both = compose(&r1, &r2)?;
        for u in ctx.points(&f1, 10) {
            let j2 = r2.jet(u)?;
            let want = j2.d1 * j2.d1 * r1.jet(j2.value)?.schwarzian() + j2.schwarzian();
            let got = both.jet(u)?.schwarzian();
            ctx.record((got - want) / (1.0 + want.abs()));
        }
    }
    Ok(())
}

fn inverse_rule(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (f, rho) = ctx.line_flow(1.0)?;
        let eta = rho.inverse();
        for u in ctx.points(&f, 10) {
            let j = rho.jet(u)?;
            let want = -j.schwarzian() / (j.d1 * j.d1);
            ctx.record((eta.jet(j.value)?.schwarzian() - want) / (1.0 + want.abs()));
        }
    }
    Ok(())
}

fn jet_finite_differences(ctx: &mut Ctx) -> Result<()> {
    let rich = |g: &dyn Fn(f64) -> Result<f64>, u: f64| -> Result<f64> {
        let c = |h: f64| -> Result<f64> { Ok((g(u + h)? - g(u - h)?) / (2.0 * h)) };
        Ok((4.0 * c(5e-4)? - c(1e-3)?) / 3.0)
    };
    for _ in 0..ctx.cfg.samples {
        let (f, rho) = ctx.line_flow(1.0)?;
        for u in ctx.points(&f, 5) {
            let j = rho.jet(u)?;
            let d1 = rich(&|x| rho.value(x), u)?;
            let d2 = rich(&|x| Ok(rho.jet(x)?.d1), u)?;
            let d3 = rich(&|x| Ok(rho.jet(x)?.d2), u)?;
            ctx.record((d1 - j.d1) / (1.0 + j.d1.abs()));
            ctx.record((d2 - j.d2) / (1.0 + j.d2.abs()));
            ctx.record((d3 - j.d3) / (1.0 + j.d3.abs()));
        }
    }
    Ok(())
}

/// `S''` from the closed form, and from central differences of `S` at
/// steps `1e−3` and `5e−4` combined by one Richardson step.
pub fn qnec_pair(rho: &Diffeomorphism, t: f64, c: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    let dir = Direction::StateVsVacuum;
    let s = |x: f64| entropy_half_line(rho, x, c, dir, cfg).map(|r| r.value);
    let s0 = s(t)?;
    let c2 = |h: f64| -> Result<f64> { Ok((s(t + h)? - 2.0 * s0 + s(t - h)?) / (h * h)) };
    let fd = (4.0 * c2(5e-4)? - c2(1e-3)?) / 3.0;
    let closed = entropy_half_line_derivatives(rho, t, c, dir, cfg)?.d2;
    Ok((closed, fd))
}

fn cut_points(ctx: &mut Ctx, f: &VectorField, k: usize) -> Vec<f64> {
    let (lo, hi) = f.support().bounds().unwrap_or((-1.0, 1.0));
    (0..k).map(|_| ctx.rng.uniform(lo - 0.2, hi + 0.1)).collect()
}

fn qnec_second_derivative(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (f, rho) = ctx.line_flow(1.0)?;
        for t in cut_points(ctx, &f, 3) {
            let (closed, fd) = qnec_pair(&rho, t, ctx.cfg.c, ctx.q())?;
            ctx.record((closed - fd) / (1.0 + closed.abs()));
        }
    }
    Ok(())
}

fn qnec_nonnegative(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (f, rho) = ctx.line_flow(1.0)?;
        for t in cut_points(ctx, &f, 10) {
            let d = entropy_half_line_derivatives(&rho, t, ctx.cfg.c, Direction::StateVsVacuum, ctx.q())?;
            ctx.record_at_least(d.d2);
        }
    }
    Ok(())
}

fn exchange_identity(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg.c;
    for _ in 0..ctx.cfg.samples {
        let (f, rho) = ctx.line_flow(1.0)?;
        let eta = rho.inverse();
        for t in cut_points(ctx, &f, 3) {
            let lhs = entropy_half_line(&rho, t, c, Direction::VacuumVsState, ctx.q())?.value;
            let rhs = entropy_half_line(&eta, eta.value(t)?, c, Direction::StateVsVacuum, ctx.q())?.value;
            ctx.record(lhs - rhs);
        }
    }
    Ok(())
}

fn affine_covariance(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg.c;
    for _ in 0..ctx.cfg.samples {
        let (f, rho) = ctx.line_flow(1.0)?;
        let alpha = Diffeomorphism::affine(Picture::Line, ctx.rng.uniform(0.5, 2.0), ctx.rng.uniform(-1.0, 1.0))?;
        let conj = compose(&alpha, &compose(&rho, &alpha.inverse())?)?;
        for t in cut_points(ctx, &f, 2) {
            for dir in [Direction::StateVsVacuum, Direction::VacuumVsState] {
                let a = entropy_half_line(&rho, t, c, dir, ctx.q())?.value;
                let b = entropy_half_line(&conj, alpha.value(t)?, c, dir, ctx.q())?.value;
                ctx.record(a - b);
            }
        }
    }
    Ok(())
}

fn fixed_endpoint_forms(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg.c;
    for _ in 0..ctx.cfg.samples {
        let (a, b) = (ctx.rng.uniform(-2.0, 0.0), ctx.rng.uniform(0.5, 2.5));
        let f = ctx.rng.fixing_field(a, b)?;
        let rho = exponentiate(&f, 1.0, ctx.fc())?;
        let forms = entropy_interval_fixed_endpoint_forms(&rho, a, b, c, ctx.q())?;
        ctx.record(forms.form1 - forms.form2);
        let s = entropy_interval(&rho, a, b, c, Direction::VacuumVsState, ctx.q())?;
        ctx.record(s.value - forms.form2);
    }
    Ok(())
}

pub const BEKENSTEIN_RADII: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

fn bekenstein(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (_, rho) = ctx.line_flow(1.0)?;
        for r in BEKENSTEIN_RADII {
            for dir in [Direction::StateVsVacuum, Direction::VacuumVsState] {
                ctx.record_at_least(bekenstein_check(&rho, r, ctx.cfg.c, dir, ctx.q())?.margin);
            }
        }
    }
    Ok(())
}

fn positivity(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg.c;
    for _ in 0..ctx.cfg.samples {
        let (f, rho) = ctx.line_flow(1.0)?;
        for t in cut_points(ctx, &f, 2) {
            for dir in [Direction::StateVsVacuum, Direction::VacuumVsState] {
                ctx.record_at_least(entropy_half_line(&rho, t, c, dir, ctx.q())?.value);
                let w = ctx.rng.uniform(0.2, 3.0);
                ctx.record_at_least(entropy_interval(&rho, t, t + w, c, dir, ctx.q())?.value);
            }
        }
    }
    Ok(())
}

fn interval_monotonicity(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg.c;
    for _ in 0..ctx.cfg.samples {
        let (f, rho) = ctx.line_flow(1.0)?;
        let (lo, hi) = f.support().bounds().unwrap_or((-1.0, 1.0));
        let a = ctx.rng.uniform(lo - 0.5, hi);
        let b = ctx.rng.uniform(a + 0.1, hi + 0.5);
        let (a2, b2) = (a - ctx.rng.uniform(0.0, 1.0), b + ctx.rng.uniform(0.0, 1.0));
        for dir in [Direction::StateVsVacuum, Direction::VacuumVsState] {
            let inner = entropy_interval(&rho, a, b, c, dir, ctx.q())?.value;
            let outer = entropy_interval(&rho, a2, b2, c, dir, ctx.q())?.value;
            ctx.record_at_least(outer - inner);
        }
    }
    Ok(())
}

fn central_charge_scaling(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (f, rho) = ctx.line_flow(1.0)?;
        let c2 = ctx.rng.uniform(0.5, 30.0);
        for t in cut_points(ctx, &f, 2) {
            let s1 = entropy_half_line(&rho, t, 1.0, Direction::StateVsVacuum, ctx.q())?.value;
            let s2 = entropy_half_line(&rho, t, c2, Direction::StateVsVacuum, ctx.q())?.value;
            ctx.record((s2 - c2 * s1) / (1.0 + s2.abs()));
        }
    }
    Ok(())
}

fn coboundary(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (g1, g2, g3) = (ctx.circle_flow()?, ctx.circle_flow()?, ctx.circle_flow()?);
        ctx.record(coboundary_check(&g1, &g2, &g3, ctx.q())?.coboundary_residual);
    }
    Ok(())
}

fn bott_identity(ctx: &mut Ctx) -> Result<()> {
    let id = Diffeomorphism::identity(Picture::Circle);
    for _ in 0..ctx.cfg.samples {
        let g = ctx.circle_flow()?;
        ctx.record(bott_cocycle(&id, &g, ctx.q())?.value);
        ctx.record(bott_cocycle(&g, &id, ctx.q())?.value);
    }
    Ok(())
}

fn omega_antisymmetry(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (f, g) = (ctx.circle_field()?, ctx.circle_field()?);
        let fg = central_term_omega(&f, &g, ctx.q())?.value;
        let gf = central_term_omega(&g, &f, ctx.q())?.value;
        ctx.record(fg + gf);
        ctx.record(central_term_omega(&f, &f, ctx.q())?.value);
    }
    Ok(())
}

fn omega_bilinearity(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (f, h, g) = (ctx.circle_field()?, ctx.circle_field()?, ctx.circle_field()?);
        let (a, b) = (ctx.rng.uniform(-2.0, 2.0), ctx.rng.uniform(-2.0, 2.0));
        let mix = VectorField::combine(&f, &h, a, b)?;
        let lhs = central_term_omega(&mix, &g, ctx.q())?.value;
        let rhs = a * central_term_omega(&f, &g, ctx.q())?.value + b * central_term_omega(&h, &g, ctx.q())?.value;
        ctx.record(lhs - rhs);
    }
    Ok(())
}

fn omega_fourier(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let deg = ctx.rng.index(1, 5);
        let draw = |ctx: &mut Ctx| -> Vec<f64> { (0..=deg).map(|k| if k == 0 { 0.0 } else { ctx.rng.uniform(-0.3, 0.3) }).collect() };
        let (fc, fs, gc, gs) = (draw(ctx), draw(ctx), draw(ctx), draw(ctx));
        let f = VectorField::trig_poly(fc.clone(), fs.clone())?;
        let g = VectorField::trig_poly(gc.clone(), gs.clone())?;
        // ∫ f g''' = π Σ k³ (f_s g_c − f_c g_s) per mode.
        let fg3 = |ac: &[f64], as_: &[f64], bc: &[f64], bs: &[f64]| -> f64 {
            (1..=deg).map(|k| PI * (k * k * k) as f64 * (as_[k] * bc[k] - ac[k] * bs[k])).sum()
        };
        let exact = -(fg3(&fc, &fs, &gc, &gs) - fg3(&gc, &gs, &fc, &fs)) / (48.0 * PI);
        ctx.record(central_term_omega(&f, &g, ctx.q())?.value - exact);
    }
    Ok(())
}

fn beta_linearization(ctx: &mut Ctx) -> Result<()> {
    let h = 1e-4;
    for _ in 0..ctx.cfg.samples {
        let (f, g) = (ctx.circle_field()?, ctx.circle_field()?);
        let bp = anomaly_beta(&exponentiate(&f, h, ctx.fc())?, &g, ctx.q())?.value;
        let bm = anomaly_beta(&exponentiate(&f, -h, ctx.fc())?, &g, ctx.q())?.value;
        let w = central_term_omega(&f, &g, ctx.q())?.value;
        ctx.record((bp - bm) / (2.0 * h) + w);
    }
    Ok(())
}

fn h_integral_identity(ctx: &mut Ctx) -> Result<()> {
    for r in [0.5, 2.0, E, 10.0] {
        for n in [1, 5, 50] {
            ctx.record(h_seq_integral(r, n, ctx.q())?.value - r.ln().powi(2) / 2.0);
        }
    }
    Ok(())
}

fn sequence_endpoints(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let r = ctx.rng.uniform(0.2, 5.0);
        let n = ctx.rng.index(6, 2000);
        let nf = n as f64;
        let h = h_seq(r, n)?;
        let (h0, h1) = (h.jet(0.0)?, h.jet(1.0 / nf)?);
        ctx.record(h0.value);
        ctx.record(h0.d1 - 1.0);
        ctx.record((h1.d1 - r) / r);
        let s = sigma_seq(r, n, SigmaExponent::Consistent)?;
        ctx.record(s.jet(0.0)?.value);
        ctx.record(s.jet(1.0 - 1.0 / nf)?.d1 - 1.0);
        let z = zeta_seq_parts(r, n, ctx.q())?;
        ctx.record(z.value(-1.0 / nf)? + 1.0 / nf);
        ctx.record(z.d1(-1.0 / nf)? - 1.0);
        ctx.record((z.d1(0.0)? - r) / r);
    }
    Ok(())
}

fn nu_limits_decrease(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (r0, r3) = (ctx.rng.uniform(0.2, 5.0), ctx.rng.uniform(0.2, 5.0));
        let seq = [10, 100, 1000]
            .iter()
            .map(|&n| nu_limit_integrals(r0, r3, n, ctx.q()))
            .collect::<Result<Vec<_>>>()?;
        for w in seq.windows(2) {
            ctx.record_at_least(w[0].i_n.abs() - w[1].i_n.abs());
            ctx.record_at_least(w[0].j_n.abs() - w[1].j_n.abs());
            if w[1].i_n.abs() >= w[0].i_n.abs() || w[1].j_n.abs() >= w[0].j_n.abs() {
                ctx.record(1.0);
            }
        }
    }
    Ok(())
}

/// The bump pair `A·(φ_{−1/2} − φ_{1/2})`, which fixes 0 with slope `≠ 1`.
pub fn fixing_bump_pair(amplitude: f64) -> Result<VectorField> {
    VectorField::sum(vec![
        (1.0, VectorField::bump(-0.5, 1.0, amplitude)?),
        (-1.0, VectorField::bump(0.5, 1.0, amplitude)?),
    ])
}

fn schwarzian_limit(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples.min(2) {
        let amp = ctx.rng.uniform(0.05, 0.15) * if ctx.rng.index(0, 1) == 0 { 1.0 } else { -1.0 };
        let rho = exponentiate(&fixing_bump_pair(amp)?, 1.0, ctx.fc())?;
        let trace = schwarzian_limit_check(&rho, 0.0, 3.0, &[1000], ctx.q())?;
        ctx.record(trace.terms[0].diff);
    }
    Ok(())
}

fn extensivity_bound(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (f1, f2) = ctx.rng.overlapping_pair()?;
        let (lo, hi) = VectorField::sum(vec![(1.0, f1.clone()), (1.0, f2.clone())])?
            .support()
            .bounds()
            .unwrap_or((-1.0, 1.0));
        for i in 0..5 {
            let t = lo - 0.2 + (hi - lo + 0.2) * i as f64 / 4.0;
            let r = extensivity_report(&f1, &f2, t, ctx.cfg.c, ctx.fc(), ctx.q())?;
            ctx.record((r.s_exact.abs() - r.bound - r.quad_err.max(1e-12)).max(0.0));
        }
    }
    Ok(())
}

fn disjoint_additivity(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..ctx.cfg.samples {
        let (c1, w1, w2) = (ctx.rng.uniform(-3.0, 0.0), ctx.rng.uniform(0.2, 1.0), ctx.rng.uniform(0.2, 1.0));
        let c2 = c1 + w1 + w2 + ctx.rng.uniform(0.01, 1.0);
        let f1 = VectorField::bump(c1, w1, ctx.rng.uniform(-0.5, 0.5))?;
        let f2 = VectorField::bump(c2, w2, ctx.rng.uniform(-0.5, 0.5))?;
        let Support::Interval(lo, _) = f1.support() else { continue };
        for t in [lo - 0.5, c1, c2] {
            ctx.record(extensivity_report(&f1, &f2, t, ctx.cfg.c, ctx.fc(), ctx.q())?.s_exact);
        }
        for u in [c1, 0.5 * (c1 + c2), c2] {
            ctx.record(extensivity_delta(&f1, &f2, u, ctx.fc())?);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyConfig {
        VerifyConfig { samples: 1, seed: 3, ..VerifyConfig::default() }
    }

    #[test]
    fn enough_properties() {
        assert!(PROPERTIES.len() >= 20);
        for s in Suite::ALL {
            assert!(property_names(s).len() >= 4, "{s}");
        }
        let mut names: Vec<_> = PROPERTIES.iter().map(|p| (p.suite, p.name)).collect();
        names.dedup();
        assert_eq!(names.len(), PROPERTIES.len());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn flows_suite_passes() {
        for o in run_suite(Suite::Flows, &quick()) {
            assert!(o.pass, "{o:?}");
        }
    }

    #[test]
    fn zero_tolerance_fails_equalities() {
        let cfg = VerifyConfig { tolerance_scale: 0.0, ..quick() };
        let o = run_property_named(Suite::Flows, "group_law", &cfg).unwrap();
        assert!(!o.pass);
    }

    #[test]
    fn same_seed_same_residuals() {
        let a = run_property_named(Suite::Flows, "inverse_roundtrip", &quick()).unwrap();
        let b = run_property_named(Suite::Flows, "inverse_roundtrip", &quick()).unwrap();
        assert_eq!(a, b);
    }
}
