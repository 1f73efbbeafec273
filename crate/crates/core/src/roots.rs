//! Safeguarded Newton iteration on a sign-change bracket.

use crate::error::{Error, Result};

/// Finds a root of `f` in `[lo, hi]`. `f` returns the value and derivative.
///
/// Starts with bisection until the bracket is small relative to its initial
/// width, then takes Newton steps, falling back to bisection whenever a step
/// leaves the bracket or fails to halve the residual.
pub fn bracketed_newton<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (fa, _) = f(a)?;
    if fa == 0.0 {
        return Ok(a);
    }
    let (fb, _) = f(b)?;
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoBracket { lo: a, hi: b });
    }
    let rising = fb > 0.0;
    let width0 = b - a;
    let mut x = 0.5 * (a + b);
    let mut last_abs = f64::INFINITY;
    for iter in 0..200 {
        let (fx, dfx) = f(x)?;
        if !fx.is_finite() {
            return Err(Error::NonFinite { op: "root iteration", u: x });
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == rising {
            b = x;
        } else {
            a = x;
        }
        if b - a <= xtol {
            return Ok(0.5 * (a + b));
        }
        let warm = iter >= 3 || b - a < 0.125 * width0;
        let newton = x - fx / dfx;
        let ok = warm && dfx.is_finite() && dfx != 0.0 && newton > a && newton < b && fx.abs() <= 0.5 * last_abs;
        let next = if ok { newton } else { 0.5 * (a + b) };
        last_abs = fx.abs();
        if ok && (next - x).abs() <= xtol {
            return Ok(next);
        }
        x = next;
    }
    Ok(0.5 * (a + b))
}

/// Expands `[x0 - step, x0 + step]` geometrically until `f` changes sign.
pub fn expand_bracket<F>(mut f: F, x0: f64, step: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut h = step.abs().max(1e-8);
    for _ in 0..80 {
        let (a, b) = (x0 - h, x0 + h);
        let (fa, fb) = (f(a)?, f(b)?);
        if fa.signum() != fb.signum() || fa == 0.0 || fb == 0.0 {
            return Ok((a, b));
        }
        h *= 2.0;
    }
    Err(Error::NoBracket { lo: x0 - h, hi: x0 + h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_of_two() {
        let r = bracketed_newton(|x| Ok((x * x * x - 2.0, 3.0 * x * x)), 0.0, 3.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn flat_derivative_falls_back_to_bisection() {
        // Derivative reported as zero everywhere: pure bisection still converges.
        let r = bracketed_newton(|x| Ok((x - 0.3, 0.0)), -1.0, 1.0, 1e-13).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
    }

    #[test]
    fn decreasing_function() {
        let r = bracketed_newton(|x: f64| Ok(((-x).exp() - 0.5, -(-x).exp())), 0.0, 5.0, 1e-14).unwrap();
        assert!((r - 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn no_sign_change() {
        assert!(matches!(
            bracketed_newton(|x| Ok((x * x + 1.0, 2.0 * x)), -1.0, 1.0, 1e-12),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn expand_finds_far_root() {
        let (a, b) = expand_bracket(|x| Ok(x - 100.0), 0.0, 1.0).unwrap();
        assert!(a <= 100.0 && b >= 100.0);
    }
}
