//! The planar system `(S)`: `x' = y`, `y' = Q(x) = -mu*x + eps*x|x|^(q-1)`,
//! its potential/energy structure, critical-point classification, and the
//! closed-form special orbits (heteroclinic and homoclinic-like separatrices).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PhaseError {
    #[error("epsilon must be +1 or -1, got {0}")]
    InvalidEpsilon(i32),
    #[error("exponent q must be positive and different from 1, got {0}")]
    InvalidExponent(f64),
    #[error("spectral parameter mu must be finite, got {0}")]
    InvalidMu(f64),
    #[error("no heteroclinic or homoclinic orbit exists for this (eps, q, mu)")]
    NoSpecialOrbit,
    #[error("critical point at x = {x} is degenerate (|U''| = {udd:e}); kind not classified")]
    DegenerateCritical { x: f64, udd: f64 },
}

/// Parameter triple of the angular ODE `w'' + mu*w = eps*w|w|^(q-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    epsilon: i32,
    q: f64,
    mu: f64,
}

impl Params {
    pub fn new(epsilon: i32, q: f64, mu: f64) -> Result<Self, PhaseError> {
        if epsilon != 1 && epsilon != -1 {
            return Err(PhaseError::InvalidEpsilon(epsilon));
        }
        if !(q > 0.0) || q == 1.0 || !q.is_finite() {
            return Err(PhaseError::InvalidExponent(q));
        }
        if !mu.is_finite() {
            return Err(PhaseError::InvalidMu(mu));
        }
        Ok(Params { epsilon, q, mu })
    }

    pub fn epsilon(&self) -> i32 {
        self.epsilon
    }

    /// Epsilon as a float factor.
    pub fn eps(&self) -> f64 {
        f64::from(self.epsilon)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// True in the sublinear regime `0 < q < 1`, where the vector field is
    /// non-Lipschitz at the origin.
    pub fn sublinear(&self) -> bool {
        self.q < 1.0
    }

    /// The odd power `x|x|^(q-1)`, evaluated as `sign(x)*|x|^q` so that
    /// fractional exponents are safe for negative `x`.
    pub fn odd_pow(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else if x > 0.0 {
            x.abs().powf(self.q)
        } else {
            -x.abs().powf(self.q)
        }
    }

    /// Location `c = |mu|^(1/(q-1))` of the off-origin equilibria `(±c, 0)`,
    /// when they exist (`eps*mu > 0`).
    pub fn off_origin_c(&self) -> Option<f64> {
        if self.eps() * self.mu > 0.0 {
            Some(self.mu.abs().powf(1.0 / (self.q - 1.0)))
        } else {
            None
        }
    }

    /// Positive root `x_*` of `U(x) = 0`, i.e. `x_* = ((q+1)|mu|*eps_U/2)^...`
    /// expressed as `(2/((1+q)mu))^(1/(1-q))` in the homoclinic case and the
    /// analogous formula when the origin is a saddle. `None` when `U` has no
    /// positive root besides 0.
    pub fn separatrix_x_star(&self) -> Option<f64> {
        // U(x) = mu x^2 - (2 eps/(q+1)) x^(q+1) vanishes at
        // x^(q-1) = (q+1) mu / (2 eps); needs mu*eps > 0.
        if self.eps() * self.mu > 0.0 {
            let base = (self.q + 1.0) * self.mu.abs() / 2.0;
            Some(base.powf(1.0 / (self.q - 1.0)))
        } else {
            None
        }
    }
}

/// A state `(x, y) = (w, w')` of the planar system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64) -> Self {
        PhasePoint { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Unified potential `U(x) = mu*x^2 - (2*eps/(q+1))*|x|^(q+1)`.
///
/// All four sign cases of the system share the one first integral
/// `E = y^2 + U(x)` with this convention.
pub fn potential(p: &Params, x: f64) -> f64 {
    let ax = x.abs();
    p.mu() * x * x - 2.0 * p.eps() / (p.q() + 1.0) * ax.powf(p.q() + 1.0)
}

/// `U'(x) = 2*mu*x - 2*eps*sign(x)*|x|^q = -2*Q(x)`.
pub fn potential_d(p: &Params, x: f64) -> f64 {
    2.0 * p.mu() * x - 2.0 * p.eps() * p.odd_pow(x)
}

/// `U''(x) = 2*mu - 2*eps*q*|x|^(q-1)` for `x != 0`.
pub fn potential_dd(p: &Params, x: f64) -> f64 {
    2.0 * p.mu() - 2.0 * p.eps() * p.q() * x.abs().powf(p.q() - 1.0)
}

/// Right-hand side of the planar system: `(y, Q(x))` with
/// `Q(x) = -mu*x + eps*x|x|^(q-1)`, extended by `Q(0) = 0` for `q < 1`.
pub fn vector_field(p: &Params, s: PhasePoint) -> PhasePoint {
    PhasePoint::new(s.y, -p.mu() * s.x + p.eps() * p.odd_pow(s.x))
}

/// First integral `E(x, y) = y^2 + U(x)`, constant along exact orbits.
pub fn energy(p: &Params, s: PhasePoint) -> f64 {
    s.y * s.y + potential(p, s.x)
}

/// Stable evaluation of `U(anchor) - U(x)`.
///
/// Written so that the difference keeps full relative precision when
/// `x` is close to `anchor` (turning points of the action integrals),
/// where direct subtraction of the two potentials would cancel.
pub fn potential_diff(p: &Params, anchor: f64, x: f64) -> f64 {
    debug_assert!(anchor >= 0.0 && x >= 0.0);
    let quad = p.mu() * (anchor - x) * (anchor + x);
    let pw = if anchor == 0.0 {
        -x.powf(p.q() + 1.0)
    } else if (x - anchor).abs() <= 0.5 * anchor {
        // anchor^(q+1) - x^(q+1) = -anchor^(q+1) * expm1((q+1) ln(x/anchor))
        let r = (x - anchor) / anchor;
        -anchor.powf(p.q() + 1.0) * ((p.q() + 1.0) * r.ln_1p()).exp_m1()
    } else {
        anchor.powf(p.q() + 1.0) - x.powf(p.q() + 1.0)
    };
    quad - 2.0 * p.eps() / (p.q() + 1.0) * pw
}

/// Classification of an equilibrium (or of the singular origin) of `(S)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    /// Surrounded by closed orbits (`U` has a strict local minimum there).
    Center,
    /// Separatrices pass through it (`U` has a strict local maximum there).
    Saddle,
    /// The origin for `0 < q < 1`: the field is non-Lipschitz and orbits
    /// on the zero-energy level reach it in finite time.
    SingularOrigin,
    /// Reserved for flows whose origin is a regular (non-equilibrium) point.
    /// The extended field of `(S)` always vanishes at the origin, so this
    /// kind is never produced here.
    RegularOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub location: PhasePoint,
    pub kind: CriticalKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSet {
    pub points: Vec<CriticalPoint>,
}

impl CriticalSet {
    /// The off-origin abscissa `c`, when present.
    pub fn off_origin(&self) -> Option<&CriticalPoint> {
        self.points.iter().find(|cp| cp.location.x > 0.0)
    }

    pub fn origin(&self) -> &CriticalPoint {
        self.points
            .iter()
            .find(|cp| cp.location.x == 0.0)
            .expect("origin is always listed")
    }
}

/// All equilibria of `(S)` with their kinds.
///
/// The origin is always listed (as `SingularOrigin` for `q < 1`). Off-origin
/// points `(±c, 0)` with `c = |mu|^(1/(q-1))` exist exactly when
/// `eps*mu > 0`; their kind follows the sign of `U''(c)`.
pub fn critical_points(p: &Params) -> Result<CriticalSet, PhaseError> {
    let mut points = Vec::new();

    let origin_kind = if p.sublinear() {
        CriticalKind::SingularOrigin
    } else if p.mu() > 0.0 {
        CriticalKind::Center
    } else if p.mu() < 0.0 {
        CriticalKind::Saddle
    } else {
        // mu = 0: the |x|^(q+1) term decides the local shape of U
        if p.epsilon() < 0 {
            CriticalKind::Center
        } else {
            CriticalKind::Saddle
        }
    };
    points.push(CriticalPoint {
        location: PhasePoint::new(0.0, 0.0),
        kind: origin_kind,
    });

    if let Some(c) = p.off_origin_c() {
        let udd = potential_dd(p, c);
        if udd.abs() < 1e-12 {
            return Err(PhaseError::DegenerateCritical { x: c, udd });
        }
        let kind = if udd > 0.0 {
            CriticalKind::Center
        } else {
            CriticalKind::Saddle
        };
        for x in [-c, c] {
            points.push(CriticalPoint {
                location: PhasePoint::new(x, 0.0),
                kind,
            });
        }
    }

    Ok(CriticalSet { points })
}

/// The orbit through `s0` as the level set `y^2 = E(s0) - U(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitEquation {
    params: Params,
    energy: f64,
}

impl OrbitEquation {
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// `y^2` on the orbit at abscissa `x` (negative values mean the orbit
    /// does not reach that `x`).
    pub fn y_squared(&self, x: f64) -> f64 {
        self.energy - potential(&self.params, x)
    }
}

pub fn orbit_equation(p: &Params, s0: PhasePoint) -> OrbitEquation {
    OrbitEquation {
        params: *p,
        energy: energy(p, s0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialOrbitKind {
    /// Upper half-plane connection from `(-c,0)` to `(c,0)`.
    HeteroclinicUpper,
    /// Lower half-plane connection from `(c,0)` to `(-c,0)`.
    HeteroclinicLower,
    /// Loop from the singular origin around `(c, 0)` and back, `x >= 0`.
    HomoclinicRight,
    /// Mirror loop around `(-c, 0)`, `x <= 0`.
    HomoclinicLeft,
}

/// A separatrix at its exact critical energy level, as the evaluable map
/// `x -> y^2 = E - U(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialOrbit {
    pub kind: SpecialOrbitKind,
    pub energy: f64,
    pub x_range: (f64, f64),
    params: Params,
}

impl SpecialOrbit {
    pub fn y_squared(&self, x: f64) -> f64 {
        self.energy - potential(&self.params, x)
    }
}

/// The special orbits of the case, if any:
/// heteroclinic pairs for `(eps=+1, q>1, mu>0)` and `(eps=-1, q<1, mu<0)`,
/// homoclinic-like pairs for `(eps=+1, q<1, mu>0)`.
pub fn special_orbits(p: &Params) -> Result<Vec<SpecialOrbit>, PhaseError> {
    let heteroclinic = (p.epsilon() == 1 && p.q() > 1.0 && p.mu() > 0.0)
        || (p.epsilon() == -1 && p.q() < 1.0 && p.mu() < 0.0);
    let homoclinic = p.epsilon() == 1 && p.q() < 1.0 && p.mu() > 0.0;

    if heteroclinic {
        let c = p.off_origin_c().expect("saddles exist in this case");
        let level = potential(p, c);
        Ok(vec![
            SpecialOrbit {
                kind: SpecialOrbitKind::HeteroclinicUpper,
                energy: level,
                x_range: (-c, c),
                params: *p,
            },
            SpecialOrbit {
                kind: SpecialOrbitKind::HeteroclinicLower,
                energy: level,
                x_range: (-c, c),
                params: *p,
            },
        ])
    } else if homoclinic {
        let xs = p.separatrix_x_star().expect("x_* exists in this case");
        Ok(vec![
            SpecialOrbit {
                kind: SpecialOrbitKind::HomoclinicRight,
                energy: 0.0,
                x_range: (0.0, xs),
                params: *p,
            },
            SpecialOrbit {
                kind: SpecialOrbitKind::HomoclinicLeft,
                energy: 0.0,
                x_range: (-xs, 0.0),
                params: *p,
            },
        ])
    } else {
        Err(PhaseError::NoSpecialOrbit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(e: i32, q: f64, mu: f64) -> Params {
        Params::new(e, q, mu).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Params::new(2, 3.0, 1.0).is_err());
        assert!(Params::new(1, 1.0, 1.0).is_err());
        assert!(Params::new(1, -0.5, 1.0).is_err());
        assert!(Params::new(1, 0.5, f64::NAN).is_err());
    }

    #[test]
    fn potential_values() {
        // eps=-1, q=3, mu=1: U(x) = x^2 + x^4/2
        let p = params(-1, 3.0, 1.0);
        assert!((potential(&p, 1.0) - 1.5).abs() < 1e-15);
        assert_eq!(potential(&p, 0.0), 0.0);

        // homoclinic level touches zero at x_* = 1/144
        let p = params(1, 0.5, 16.0);
        let xs = 1.0 / 144.0;
        assert!(potential(&p, xs).abs() < 1e-18);
        assert!((p.separatrix_x_star().unwrap() - xs).abs() < 1e-18);
    }

    #[test]
    fn potential_is_even() {
        let p = params(1, 2.5, 3.0);
        for &x in &[0.3, 1.7, 4.0] {
            assert_eq!(potential(&p, x), potential(&p, -x));
        }
    }

    #[test]
    fn vector_field_values() {
        let p = params(1, 3.0, 4.0);
        let f = vector_field(&p, PhasePoint::new(0.0, 1.0));
        assert_eq!((f.x, f.y), (1.0, 0.0));
        // c = mu^(1/(q-1)) = 2 is an equilibrium
        let f = vector_field(&p, PhasePoint::new(2.0, 0.0));
        assert_eq!((f.x, f.y), (0.0, 0.0));

        let p = params(-1, 2.0, 1.0);
        let f = vector_field(&p, PhasePoint::new(-1.0, 0.0));
        assert!((f.y - 2.0).abs() < 1e-15);
    }

    #[test]
    fn energy_values() {
        let p = params(-1, 3.0, 1.0);
        assert!((energy(&p, PhasePoint::new(0.0, 2.0)) - 4.0).abs() < 1e-15);

        let p = params(1, 3.0, 4.0);
        assert!((energy(&p, PhasePoint::new(2.0, 0.0)) - 8.0).abs() < 1e-15);

        let p = params(1, 0.5, 16.0);
        assert!(energy(&p, PhasePoint::new(1.0 / 144.0, 0.0)).abs() < 1e-18);
    }

    #[test]
    fn orbit_equation_values() {
        let p = params(1, 3.0, 1.0);
        let m = orbit_equation(&p, PhasePoint::new(1.0, 0.0));
        assert!((m.y_squared(0.0) - 0.5).abs() < 1e-15);

        // self-consistency at the launch point
        let p = params(-1, 2.3, -0.7);
        let s0 = PhasePoint::new(0.4, 1.1);
        let m = orbit_equation(&p, s0);
        assert!((m.y_squared(s0.x) - s0.y * s0.y).abs() < 1e-14);

        let p = params(-1, 3.0, 0.0);
        let m = orbit_equation(&p, PhasePoint::new(0.0, std::f64::consts::SQRT_2));
        assert!(m.y_squared(std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn critical_points_superlinear_focusing() {
        // eps=+1, q=3, mu=4: center at origin, saddles at (±2, 0)
        let cs = critical_points(&params(1, 3.0, 4.0)).unwrap();
        assert_eq!(cs.origin().kind, CriticalKind::Center);
        let off = cs.off_origin().unwrap();
        assert!((off.location.x - 2.0).abs() < 1e-14);
        assert_eq!(off.kind, CriticalKind::Saddle);
        assert_eq!(cs.points.len(), 3);
    }

    #[test]
    fn critical_points_sublinear_focusing() {
        // eps=+1, q=1/2, mu=4: singular origin, centers at ±mu^(-2) = ±1/16
        let cs = critical_points(&params(1, 0.5, 4.0)).unwrap();
        assert_eq!(cs.origin().kind, CriticalKind::SingularOrigin);
        let off = cs.off_origin().unwrap();
        assert!((off.location.x - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(off.kind, CriticalKind::Center);
    }

    #[test]
    fn critical_points_unique_zero() {
        // eps=+1, q=3, mu=-1: Q(x) = x + x^3 has only the origin as zero
        let cs = critical_points(&params(1, 3.0, -1.0)).unwrap();
        assert_eq!(cs.points.len(), 1);
        assert_eq!(cs.origin().kind, CriticalKind::Saddle);
    }

    #[test]
    fn critical_points_defocusing_negative_mu() {
        // eps=-1, q=3, mu=-4: origin saddle between two centers at ±2
        let cs = critical_points(&params(-1, 3.0, -4.0)).unwrap();
        assert_eq!(cs.origin().kind, CriticalKind::Saddle);
        let off = cs.off_origin().unwrap();
        assert!((off.location.x - 2.0).abs() < 1e-14);
        assert_eq!(off.kind, CriticalKind::Center);
    }

    #[test]
    fn kind_matches_potential_curvature() {
        for (e, q, mu) in [(1, 3.0, 4.0), (1, 0.5, 36.0), (-1, 3.0, -4.0), (-1, 0.5, -1.0)] {
            let p = params(e, q, mu);
            let cs = critical_points(&p).unwrap();
            let off = cs.off_origin().unwrap();
            let udd = potential_dd(&p, off.location.x);
            let expect = if udd > 0.0 {
                CriticalKind::Center
            } else {
                CriticalKind::Saddle
            };
            assert_eq!(off.kind, expect, "case ({e}, {q}, {mu})");
        }
    }

    #[test]
    fn field_vanishes_at_critical_points() {
        for (e, q, mu) in [(1, 3.0, 4.0), (1, 0.5, 36.0), (-1, 2.0, -3.0)] {
            let p = params(e, q, mu);
            for cp in critical_points(&p).unwrap().points {
                let f = vector_field(&p, cp.location);
                assert!(f.norm() < 1e-12, "field at {:?} is {:?}", cp.location, f);
            }
        }
    }

    #[test]
    fn heteroclinic_pair() {
        let p = params(1, 3.0, 1.0);
        let orbits = special_orbits(&p).unwrap();
        assert_eq!(orbits.len(), 2);
        assert_eq!(orbits[0].kind, SpecialOrbitKind::HeteroclinicUpper);
        // passes through (±1, 0) with y^2(0) = 1/2
        assert!(orbits[0].y_squared(1.0).abs() < 1e-15);
        assert!(orbits[0].y_squared(-1.0).abs() < 1e-15);
        assert!((orbits[0].y_squared(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn homoclinic_pair() {
        let p = params(1, 0.5, 16.0);
        let orbits = special_orbits(&p).unwrap();
        let right = &orbits[0];
        assert_eq!(right.kind, SpecialOrbitKind::HomoclinicRight);
        let xs = 1.0 / 144.0;
        assert!((right.x_range.1 - xs).abs() < 1e-18);
        // y^2 = (4/3) x^(3/2) - 16 x^2 on the loop
        for &x in &[xs / 7.0, xs / 2.0, 0.9 * xs] {
            let expect = 4.0 / 3.0 * x.powf(1.5) - 16.0 * x * x;
            assert!((right.y_squared(x) - expect).abs() < 1e-16);
            assert!(right.y_squared(x) >= 0.0);
        }
        assert!(right.y_squared(0.0).abs() < 1e-18);
        assert!(right.y_squared(xs).abs() < 1e-18);
    }

    #[test]
    fn no_special_orbit_when_everything_is_periodic() {
        assert_eq!(
            special_orbits(&params(-1, 3.0, 1.0)).unwrap_err(),
            PhaseError::NoSpecialOrbit
        );
    }

    #[test]
    fn special_orbits_symmetric_under_reflection() {
        let p = params(1, 3.0, 1.0);
        for orb in special_orbits(&p).unwrap() {
            for &x in &[0.1, 0.5, 0.9] {
                assert_eq!(orb.y_squared(x), orb.y_squared(-x));
            }
        }
    }

    #[test]
    fn potential_diff_is_accurate_near_anchor() {
        let p = params(1, 0.5, 36.0);
        let z = 3.4e-3;
        // moderate offsets: agrees with direct subtraction
        for &d in &[1e-3, 1e-4, 1e-6] {
            let x = z - d;
            let stable = potential_diff(&p, z, x);
            let direct = potential(&p, z) - potential(&p, x);
            assert!(
                (stable - direct).abs() <= 1e-9 * stable.abs(),
                "d={d:e}: {stable:e} vs {direct:e}"
            );
        }
        // tiny offsets, where direct subtraction loses all digits:
        // must match U'(z)*d to first order
        for &d in &[1e-10, 1e-13] {
            let x = z - d;
            let stable = potential_diff(&p, z, x);
            let approx = potential_d(&p, z) * d;
            assert!(
                (stable - approx).abs() <= 1e-5 * approx.abs(),
                "d={d:e}: {stable:e} vs {approx:e}"
            );
        }
    }
}
