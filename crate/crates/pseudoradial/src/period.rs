//! Period functions of the closed-orbit regions: `T(s)` for orbits through
//! `(0, s)` around the origin and through `(c, s)` around an off-origin
//! center, via tanh-sinh quadrature of the singular action integrals, plus
//! their closed-form endpoint limits and monotonicity per case.

use crate::phase::{potential, potential_diff, Params};
use crate::quad::{tanh_sinh, QuadError};
use crate::roots::{brent, RootError};
use std::f64::consts::PI;
use thiserror::Error;

const QUAD_TOL: f64 = 1e-12;
/// refuse launch parameters this close to the separatrix level
const BOUNDARY_GUARD: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PeriodError {
    #[error("no such closed-orbit region for this (eps, q, mu) case")]
    WrongCase,
    #[error("launch parameter s = {s} outside the admissible range {range}")]
    OutOfRange { s: f64, range: String },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("turning-point solver failed: {0}")]
    Solver(#[from] RootError),
}

/// Which one-parameter family of closed orbits a period refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// orbits through `(0, s)` encircling the origin (sign-changing `w`)
    Origin,
    /// orbits through `(c, s)` encircling an off-origin center (positive `w`)
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotone {
    Increasing,
    Decreasing,
}

/// One point `(s, T(s))` of a period function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodSample {
    pub s: f64,
    pub t: f64,
}

/// Closed-form endpoint limits of `T` on its admissible `s`-range
/// `(0, gamma)` or `(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodLimits {
    /// limit of `T(s)` as `s -> 0+`
    pub at_inner: f64,
    /// limit of `T(s)` as `s` approaches `gamma` (or infinity)
    pub at_outer: f64,
    pub monotone: Monotone,
    /// separatrix bound of the `s`-range; `None` when the range is `(0, inf)`
    pub gamma: Option<f64>,
}

impl PeriodLimits {
    /// Range of attained periods as `(min, max)`.
    pub fn t_range(&self) -> (f64, f64) {
        (
            self.at_inner.min(self.at_outer),
            self.at_inner.max(self.at_outer),
        )
    }
}

/// Admissible `s`-range of the origin-centered region.
pub(crate) enum OriginRange {
    None,
    AllPositive,
    UpTo(f64),
}

pub(crate) fn origin_range(p: &Params) -> OriginRange {
    let (e, q, mu) = (p.epsilon(), p.q(), p.mu());
    match e {
        -1 => {
            if mu >= 0.0 || q > 1.0 {
                OriginRange::AllPositive
            } else {
                // 0 < q < 1, mu < 0: bounded by the heteroclinic level
                let c = p.off_origin_c().expect("saddles exist");
                OriginRange::UpTo(potential(p, c).sqrt())
            }
        }
        1 => {
            if mu <= 0.0 {
                OriginRange::None
            } else if q > 1.0 {
                let c = p.off_origin_c().expect("saddles exist");
                OriginRange::UpTo(potential(p, c).sqrt())
            } else {
                OriginRange::AllPositive
            }
        }
        _ => unreachable!(),
    }
}

/// Separatrix bound of the center region, when that region exists.
pub(crate) fn center_gamma(p: &Params) -> Option<f64> {
    let (e, q, mu) = (p.epsilon(), p.q(), p.mu());
    let has_center = (e == 1 && q < 1.0 && mu > 0.0) || (e == -1 && q > 1.0 && mu < 0.0);
    if has_center {
        let c = p.off_origin_c().expect("centers exist");
        Some((-potential(p, c)).sqrt())
    } else {
        None
    }
}

/// The amplitude `x(s) > 0` of the origin-region orbit through `(0, s)`:
/// the unique root of `U(x) = s^2` on the outer monotone branch.
pub fn amplitude_from_speed(p: &Params, s: f64) -> Result<f64, PeriodError> {
    let range = origin_range(p);
    let branch_start = match range {
        OriginRange::None => return Err(PeriodError::WrongCase),
        OriginRange::UpTo(gamma) => {
            if s <= 0.0 || s >= gamma - BOUNDARY_GUARD {
                return Err(PeriodError::OutOfRange {
                    s,
                    range: format!("(0, {gamma})"),
                });
            }
            0.0
        }
        OriginRange::AllPositive => {
            if s <= 0.0 {
                return Err(PeriodError::OutOfRange {
                    s,
                    range: "(0, inf)".into(),
                });
            }
            // monotone branch starts at 0, or past the zero-energy crossing
            // x_* when U dips negative first
            if p.eps() * p.mu() > 0.0 {
                p.separatrix_x_star().unwrap()
            } else {
                0.0
            }
        }
    };

    let target = s * s;
    let f = |x: f64| potential(p, x) - target;
    let (lo, hi) = match range {
        OriginRange::UpTo(_) => (0.0, p.off_origin_c().expect("bounded case has c")),
        _ => {
            // geometric expansion above the branch start
            let mut hi = (branch_start * 2.0).max(s.powf(2.0 / (p.q() + 1.0))).max(1e-8);
            let mut tries = 0;
            while f(hi) < 0.0 {
                hi *= 2.0;
                tries += 1;
                assert!(tries < 2100, "amplitude bracket expansion ran away");
            }
            (branch_start, hi)
        }
    };
    let x = brent(f, lo, hi, 0.0, 1e-14 * target.max(1.0))?;
    debug_assert!(
        (potential(p, x) - target).abs() <= 1e-12 * target.max(1.0),
        "amplitude residual too large"
    );
    Ok(x)
}

/// Turning points `y < c < z` of the positive orbit through `(c, s)`:
/// the two roots of `U(.) = U(c) + s^2` flanking the center.
pub fn turning_points(p: &Params, s: f64) -> Result<(f64, f64), PeriodError> {
    let gamma = center_gamma(p).ok_or(PeriodError::WrongCase)?;
    if s <= 0.0 || s >= gamma - BOUNDARY_GUARD {
        return Err(PeriodError::OutOfRange {
            s,
            range: format!("(0, {gamma})"),
        });
    }
    let c = p.off_origin_c().expect("center exists");
    let x_star = p.separatrix_x_star().expect("separatrix exists");
    let target = potential(p, c) + s * s;
    let f = |x: f64| potential(p, x) - target;
    let scale = target.abs().max(s * s);
    let y = brent(&f, 0.0, c, 0.0, 1e-14 * scale)?;
    let z = brent(&f, c, x_star, 0.0, 1e-14 * scale)?;
    Ok((y, z))
}

/// Period of the origin-region orbit through `(0, s)`, via the rescaled
/// quadrature `T = 4 x(s) \int_0^1 dtau / sqrt(U(x(s)) - U(x(s) tau))` with
/// tanh-sinh resolving the `(1 - tau)^(-1/2)` endpoint singularity.
pub fn period_origin(p: &Params, s: f64) -> Result<f64, PeriodError> {
    let z = amplitude_from_speed(p, s)?;
    let (mu, eps, q) = (p.mu(), p.eps(), p.q());
    let zq = z.powf(q + 1.0);
    // U(z) - U(z tau), stable in the distance db = 1 - tau
    let g = |_tau: f64, _da: f64, db: f64| -> f64 {
        let quad = mu * z * z * db * (2.0 - db);
        let pw = 2.0 * eps / (q + 1.0) * zq * ((q + 1.0) * (-db).ln_1p()).exp_m1();
        quad + pw
    };
    let integral = tanh_sinh(|tau, da, db| 1.0 / g(tau, da, db).sqrt(), 0.0, 1.0, QUAD_TOL)?;
    Ok(4.0 * z * integral)
}

/// Same period computed directly on `[0, x(s)]` without the `tau`
/// rescaling; used as an internal cross-check of the substituted form.
pub fn period_origin_direct(p: &Params, s: f64) -> Result<f64, PeriodError> {
    let z = amplitude_from_speed(p, s)?;
    let f = |x: f64, _da: f64, db: f64| {
        // db = z - x exactly as supplied by the quadrature
        let g = if db < 0.25 * z {
            potential_diff(p, z, x)
        } else {
            potential(p, z) - potential(p, x)
        };
        1.0 / g.sqrt()
    };
    let integral = tanh_sinh(f, 0.0, z, QUAD_TOL)?;
    Ok(4.0 * integral)
}

/// Period of the positive orbit through `(c, s)` around an off-origin
/// center: `T = 2 \int_y^z du / sqrt(s^2 - U(u) + U(c))` with both turning
/// points resolved by tanh-sinh.
pub fn period_center(p: &Params, s: f64) -> Result<f64, PeriodError> {
    let (y, z) = turning_points(p, s)?;
    let c = p.off_origin_c().expect("center exists");
    let width = z - y;
    let s2 = s * s;
    let f = |x: f64, da: f64, db: f64| {
        let g = if db < 0.25 * width {
            potential_diff(p, z, x)
        } else if da < 0.25 * width {
            potential_diff(p, y, x)
        } else {
            s2 + potential_diff(p, c, x)
        };
        1.0 / g.sqrt()
    };
    let integral = tanh_sinh(f, y, z, QUAD_TOL)?;
    Ok(2.0 * integral)
}

/// Period at `s` in the given region.
pub fn period(p: &Params, region: Region, s: f64) -> Result<f64, PeriodError> {
    match region {
        Region::Origin => period_origin(p, s),
        Region::Center => period_center(p, s),
    }
}

/// Closed-form endpoint limits and monotone direction of `T(s)` for the
/// requested region, assembled from the case table.
pub fn period_limits(p: &Params, region: Region) -> Result<PeriodLimits, PeriodError> {
    let (q, mu) = (p.q(), p.mu());
    match region {
        Region::Origin => {
            let range = origin_range(p);
            match (p.epsilon(), q > 1.0) {
                (-1, true) => {
                    if mu > 0.0 {
                        Ok(PeriodLimits {
                            at_inner: 2.0 * PI / mu.sqrt(),
                            at_outer: 0.0,
                            monotone: Monotone::Decreasing,
                            gamma: None,
                        })
                    } else {
                        // mu = 0: limit from the origin is infinite;
                        // mu < 0: the orbits shrink onto the double homoclinic
                        // loop through the origin saddle, so T -> inf as well
                        Ok(PeriodLimits {
                            at_inner: f64::INFINITY,
                            at_outer: 0.0,
                            monotone: Monotone::Decreasing,
                            gamma: None,
                        })
                    }
                }
                (-1, false) => match range {
                    OriginRange::AllPositive => Ok(PeriodLimits {
                        at_inner: 0.0,
                        at_outer: if mu > 0.0 {
                            2.0 * PI / mu.sqrt()
                        } else {
                            f64::INFINITY
                        },
                        monotone: Monotone::Increasing,
                        gamma: None,
                    }),
                    OriginRange::UpTo(gamma) => Ok(PeriodLimits {
                        at_inner: 0.0,
                        at_outer: f64::INFINITY,
                        monotone: Monotone::Increasing,
                        gamma: Some(gamma),
                    }),
                    OriginRange::None => unreachable!(),
                },
                (1, true) => match range {
                    OriginRange::UpTo(gamma) => Ok(PeriodLimits {
                        at_inner: 2.0 * PI / mu.sqrt(),
                        at_outer: f64::INFINITY,
                        monotone: Monotone::Increasing,
                        gamma: Some(gamma),
                    }),
                    _ => Err(PeriodError::WrongCase),
                },
                (1, false) => match range {
                    OriginRange::AllPositive => Ok(PeriodLimits {
                        at_inner: 4.0 * PI / ((1.0 - q) * mu.sqrt()),
                        at_outer: 2.0 * PI / mu.sqrt(),
                        monotone: Monotone::Decreasing,
                        gamma: None,
                    }),
                    _ => Err(PeriodError::WrongCase),
                },
                _ => unreachable!(),
            }
        }
        Region::Center => {
            let gamma = center_gamma(p).ok_or(PeriodError::WrongCase)?;
            if p.epsilon() == 1 {
                // 0 < q < 1, mu > 0
                Ok(PeriodLimits {
                    at_inner: 2.0 * PI / (mu * (1.0 - q)).sqrt(),
                    at_outer: 2.0 * PI / ((1.0 - q) * mu.sqrt()),
                    monotone: Monotone::Increasing,
                    gamma: Some(gamma),
                })
            } else {
                // q > 1, mu < 0: loop closes onto a genuine saddle
                // separatrix, so the outer limit is infinite
                Ok(PeriodLimits {
                    at_inner: 2.0 * PI / (-mu * (q - 1.0)).sqrt(),
                    at_outer: f64::INFINITY,
                    monotone: Monotone::Increasing,
                    gamma: Some(gamma),
                })
            }
        }
    }
}
