//! Dormand–Prince 5(4) with FSAL and an elementary step-size controller.
//!
//! Only autonomous systems are needed here: every flow in this crate is the
//! flow of a time-independent vector field.

// Stage nodes; the system is autonomous so they only appear in tests.
#[cfg(test)]
const C2: f64 = 1.0 / 5.0;
#[cfg(test)]
const C3: f64 = 3.0 / 10.0;
#[cfg(test)]
const C4: f64 = 4.0 / 5.0;
#[cfg(test)]
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 35.0 / 384.0 - 5179.0 / 57600.0;
const E3: f64 = 500.0 / 1113.0 - 7571.0 / 16695.0;
const E4: f64 = 125.0 / 192.0 - 393.0 / 640.0;
const E5: f64 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
const E6: f64 = 11.0 / 84.0 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeFailure {
    /// Step size fell below round-off level at the given time.
    StepUnderflow { at: f64 },
    TooManySteps { at: f64, steps: usize },
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = rhs(y)` from time 0 to `t_end` (either sign) and returns
/// the final state.
pub fn dopri5<const N: usize, F>(mut rhs: F, y0: [f64; N], t_end: f64, cfg: &OdeConfig) -> Result<[f64; N], OdeFailure>
where
    F: FnMut(&[f64; N]) -> [f64; N],
{
    if t_end == 0.0 {
        return Ok(y0);
    }
    let dir = t_end.signum();
    let span = t_end.abs();
    let mut f = |y: &[f64; N]| {
        let mut d = rhs(y);
        if dir < 0.0 {
            d.iter_mut().for_each(|x| *x = -*x);
        }
        d
    };
    let mut y = y0;
    let mut t = 0.0;
    let mut k1 = f(&y);
    let mut h = span.min(cfg.max_step);
    let mut steps = 0usize;
    while t < span {
        if steps >= cfg.max_steps {
            return Err(OdeFailure::TooManySteps { at: dir * t, steps });
        }
        let last = t + h >= span;
        if last {
            h = span - t;
        }
        if h <= 1e-14 * span.max(1.0) && !last {
            return Err(OdeFailure::StepUnderflow { at: dir * t });
        }
        let k2 = f(&axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(&axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(&axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(&axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(&y_new);
        let mut err = 0.0f64;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            err = err.max(e.abs() / sc);
        }
        steps += 1;
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t = if last { span } else { t + h };
            y = y_new;
            k1 = k7;
            h = (h * fac).min(cfg.max_step);
        } else {
            h *= fac.min(1.0);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> OdeConfig {
        OdeConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_step: 0.1,
            max_steps: 100_000,
        }
    }

    #[test]
    fn stage_rows_sum_to_nodes() {
        assert!((A21 - C2).abs() < 1e-16);
        assert!((A31 + A32 - C3).abs() < 1e-16);
        assert!((A41 + A42 + A43 - C4).abs() < 1e-15);
        assert!((A51 + A52 + A53 + A54 - C5).abs() < 1e-14);
        assert!((A61 + A62 + A63 + A64 + A65 - 1.0).abs() < 1e-14);
        assert!((A71 + A73 + A74 + A75 + A76 - 1.0).abs() < 1e-15);
        assert!((E1 + E3 + E4 + E5 + E6 + E7).abs() < 1e-16);
    }

    #[test]
    fn exponential_growth() {
        let y = dopri5(|y: &[f64; 1]| [y[0]], [1.0], 2.0, &cfg()).unwrap();
        assert!((y[0] - 2f64.exp()).abs() < 1e-10);
        let y = dopri5(|y: &[f64; 1]| [y[0]], [1.0], -2.0, &cfg()).unwrap();
        assert!((y[0] - (-2f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let y = dopri5(|y: &[f64; 2]| [y[1], -y[0]], [1.0, 0.0], 2.0 * std::f64::consts::PI, &cfg()).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn zero_time_is_identity() {
        let y = dopri5(|_: &[f64; 3]| [1.0, 2.0, 3.0], [0.5, 0.25, 0.0], 0.0, &cfg()).unwrap();
        assert_eq!(y, [0.5, 0.25, 0.0]);
    }

    #[test]
    fn step_budget_enforced() {
        let c = OdeConfig { max_steps: 3, ..cfg() };
        let r = dopri5(|y: &[f64; 1]| [y[0]], [1.0], 10.0, &c);
        assert!(matches!(r, Err(OdeFailure::TooManySteps { .. })));
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y², y(0) = 1 blows up at t = 1.
        let r = dopri5(|y: &[f64; 1]| [y[0] * y[0]], [1.0], 2.0, &cfg());
        assert!(r.is_err());
    }
}
