//! Bracketing scalar root finders used by the amplitude and shooting solvers.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RootError {
    #[error("endpoints do not bracket a root: f({a}) = {fa:e}, f({b}) = {fb:e}")]
    NoBracket { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("root finder failed to converge within {0} iterations")]
    NoConvergence(usize),
}

/// Brent's method on a bracketing interval `[a, b]`.
///
/// Converges when the interval shrinks below `xtol` (absolute, plus a
/// machine-relative term) or when `|f| <= ftol`.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, ftol: f64) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket { a, b, fa, fb });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = b - a;

    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() <= ftol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation / secant
            let s = fb / fa;
            let (mut p, mut qd);
            if a == c {
                p = 2.0 * xm * s;
                qd = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                qd = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                qd = -qd;
            }
            p = p.abs();
            let min1 = 3.0 * xm * qd.abs() - (tol1 * qd).abs();
            let min2 = (e * qd).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / qd;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
        if fb == 0.0 {
            return Ok(b);
        }
    }
    Err(RootError::NoConvergence(200))
}

/// Expands `[lo, hi]` geometrically upward until `f` changes sign, assuming
/// `f(lo)` is already evaluated. Returns the bracketing pair.
pub fn expand_upward<F>(mut f: F, lo: f64, factor: f64, cap: f64) -> Result<(f64, f64), RootError>
where
    F: FnMut(f64) -> f64,
{
    let flo = f(lo);
    let mut a = lo;
    let mut fa = flo;
    let mut b = lo * factor;
    for _ in 0..512 {
        if b > cap {
            return Err(RootError::NoBracket { a, b, fa, fb: f64::NAN });
        }
        let fb = f(b);
        if fa.signum() != fb.signum() || fb == 0.0 {
            return Ok((a, b));
        }
        a = b;
        fa = fb;
        b *= factor;
    }
    Err(RootError::NoConvergence(512))
}
