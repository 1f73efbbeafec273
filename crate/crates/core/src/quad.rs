//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Integration runs panel by panel: the caller supplies a sorted list of
//! breakpoints and each panel is refined by bisecting its worst part until
//! the panel's error estimate meets its share of the tolerance. Panels never exchange work, so
//! two integrals that share a panel evaluate the integrand at exactly the same
//! nodes there. Finite-difference checks of parameter-dependent integrals rely
//! on that.

/// Kronrod abscissae on [-1, 1] (positive half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth inside one panel.
    pub max_depth: u32,
    /// Maximum number of bisections spent on one panel.
    pub limit: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_depth: 40,
            limit: 200,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
    pub converged: bool,
}

impl Integral {
    pub const ZERO: Integral = Integral {
        value: 0.0,
        abs_err: 0.0,
        evals: 0,
        converged: true,
    };

    pub fn scale(self, k: f64) -> Integral {
        Integral {
            value: self.value * k,
            abs_err: self.abs_err * k.abs(),
            ..self
        }
    }

    pub fn add(self, other: Integral) -> Integral {
        Integral {
            value: self.value + other.value,
            abs_err: self.abs_err + other.abs_err,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
        }
    }
}

struct Panel {
    kronrod: f64,
    err: f64,
    /// The error estimate sits at the round-off floor; bisecting further
    /// cannot reduce it.
    at_floor: bool,
}

fn gk15<F, E>(f: &mut F, a: f64, b: f64) -> Result<Panel, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [0.0f64; 15];
    fv[7] = f(centre)?;
    for j in 0..7 {
        let dx = half * XGK[j];
        fv[j] = f(centre - dx)?;
        fv[14 - j] = f(centre + dx)?;
    }
    let mut resk = WGK[7] * fv[7];
    let mut resg = WG[3] * fv[7];
    let mut resabs = resk.abs();
    for j in 0..7 {
        let pair = fv[j] + fv[14 - j];
        resk += WGK[j] * pair;
        resabs += WGK[j] * (fv[j].abs() + fv[14 - j].abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * pair;
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fv[7] - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let hl = half.abs();
    let resk = resk * half;
    resasc *= hl;
    resabs *= hl;
    let mut err = ((resk - resg * half).abs()).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let mut at_floor = false;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * resabs;
        if err <= floor {
            err = floor;
            at_floor = true;
        }
    }
    Ok(Panel {
        kronrod: resk,
        err,
        at_floor,
    })
}

struct Part {
    a: f64,
    b: f64,
    depth: u32,
    panel: Panel,
}

impl Part {
    fn splittable(&self, cfg: &QuadConfig) -> bool {
        !self.panel.at_floor
            && self.panel.err.is_finite()
            && self.depth < cfg.max_depth
            && (self.b - self.a).abs() > 4.0 * f64::EPSILON * self.a.abs().max(self.b.abs())
    }
}

/// Refines one panel by repeatedly bisecting its worst part until the summed
/// error meets `tol`, or until no part can be split or `cfg.limit` splits are
/// spent. The last two outcomes leave the result marked unconverged.
fn adapt<F, E>(f: &mut F, a: f64, b: f64, whole: Panel, tol: f64, cfg: &QuadConfig, out: &mut Integral) -> Result<(), E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut parts = vec![Part { a, b, depth: 0, panel: whole }];
    let mut converged = true;
    let mut splits = 0;
    loop {
        let value: f64 = parts.iter().map(|p| p.panel.kronrod).sum();
        let err: f64 = parts.iter().map(|p| p.panel.err).sum();
        if !err.is_finite() {
            converged = false;
            break;
        }
        if err <= tol.max(cfg.rel_tol * value.abs()) {
            break;
        }
        let worst = parts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable(cfg))
            .max_by(|x, y| x.1.panel.err.total_cmp(&y.1.panel.err))
            .map(|(i, _)| i);
        let (Some(i), true) = (worst, splits < cfg.limit) else {
            converged = false;
            break;
        };
        let p = parts.swap_remove(i);
        let mid = 0.5 * (p.a + p.b);
        let left = gk15(f, p.a, mid)?;
        let right = gk15(f, mid, p.b)?;
        out.evals += 30;
        splits += 1;
        parts.push(Part { a: p.a, b: mid, depth: p.depth + 1, panel: left });
        parts.push(Part { a: mid, b: p.b, depth: p.depth + 1, panel: right });
    }
    // Summed in position order so the result does not depend on split order.
    parts.sort_by(|x, y| x.a.total_cmp(&y.a));
    for p in &parts {
        out.value += p.panel.kronrod;
        out.abs_err += p.panel.err;
    }
    out.converged &= converged;
    Ok(())
}

/// Integrates `f` over `[points[0], points[last]]`, treating every entry of
/// `points` as a panel boundary. `points` must be nondecreasing; empty panels
/// are skipped.
pub fn integrate<F, E>(mut f: F, points: &[f64], cfg: &QuadConfig) -> Result<Integral, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut out = Integral::ZERO;
    if points.len() < 2 {
        return Ok(out);
    }
    let total = (points[points.len() - 1] - points[0]).abs();
    if total == 0.0 {
        return Ok(out);
    }
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let share = cfg.abs_tol * (b - a) / total;
        let panel = gk15(&mut f, a, b)?;
        out.evals += 15;
        adapt(&mut f, a, b, panel, share, cfg, &mut out)?;
    }
    Ok(out)
}

/// Convenience wrapper for a single interval split into `panels` equal pieces.
pub fn integrate_uniform<F, E>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    cfg: &QuadConfig,
) -> Result<Integral, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    integrate(f, &uniform_points(a, b, panels), cfg)
}

pub fn uniform_points(a: f64, b: f64, panels: usize) -> Vec<f64> {
    let n = panels.max(1);
    (0..=n)
        .map(|i| {
            if i == n {
                b
            } else {
                a + (b - a) * i as f64 / n as f64
            }
        })
        .collect()
}

/// `∫_0^1 v^alpha g(v) dv` for `alpha > -1`, via `w = v^(alpha+1)`, which
/// removes the algebraic endpoint singularity.
pub fn integrate_power_weight<F, E>(
    mut g: F,
    alpha: f64,
    cfg: &QuadConfig,
) -> Result<Integral, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let p = alpha + 1.0;
    let r = integrate_uniform(|w: f64| g(w.powf(1.0 / p)), 0.0, 1.0, 4, cfg)?;
    Ok(r.scale(1.0 / p))
}

/// Builds a sorted, deduplicated breakpoint list covering `[lo, hi]`: the
/// endpoints, every interior entry of `extra`, and a uniform grid of `grid`
/// panels laid over `[grid_lo, grid_hi]` (clipped to `[lo, hi]`).
pub fn breakpoints(lo: f64, hi: f64, extra: &[f64], grid: Option<(f64, f64, usize)>) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    if let Some((g0, g1, n)) = grid {
        if g1 > g0 && n > 0 {
            pts.extend(
                uniform_points(g0, g1, n)
                    .into_iter()
                    .filter(|&x| x > lo && x < hi),
            );
        }
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + a.abs()));
    pts
}
