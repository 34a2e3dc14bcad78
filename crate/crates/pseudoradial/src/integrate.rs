//! Adaptive Dormand–Prince 5(4) integration of the planar system with
//! axis-crossing event detection. The first-return time measured here is
//! the brute-force oracle against which the quadrature period functions
//! are validated.

use crate::phase::{energy, potential, vector_field, Params, PhasePoint};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IntegrateError {
    #[error("trajectory entered the singular origin (q < 1, non-unique continuation) at t = {t}")]
    SingularOriginReached { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("no return to the section detected within the safety horizon")]
    NotClosed,
    #[error("operation not defined for this (eps, q, mu) case")]
    WrongCase,
    #[error("initial state sits at the singular origin")]
    StartAtSingularOrigin,
}

/// A time-sampled orbit of the system together with its launch energy.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, PhasePoint)>,
    pub energy0: f64,
}

impl Trajectory {
    /// Largest deviation `|E(sample) - E(start)|` over the samples.
    pub fn max_energy_drift(&self, p: &Params) -> f64 {
        self.samples
            .iter()
            .map(|(_, s)| (energy(p, *s) - self.energy0).abs())
            .fold(0.0, f64::max)
    }
}

// Dormand-Prince 5(4) tableau
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State = [f64; 2];

fn field(p: &Params, y: State) -> State {
    let f = vector_field(p, PhasePoint::new(y[0], y[1]));
    [f.x, f.y]
}

/// One accepted adaptive step.
#[derive(Debug, Clone, Copy)]
struct Step {
    t0: f64,
    t1: f64,
    y0: State,
    y1: State,
    /// derivatives at the endpoints (FSAL)
    f0: State,
    f1: State,
}

struct Dopri5<'p> {
    p: &'p Params,
    tol: f64,
    t: f64,
    y: State,
    f: State,
    h: f64,
    err_prev: f64,
    pub accepted: usize,
    /// refuse to continue once the state falls into the singular funnel
    singular_guard: bool,
}

const SINGULAR_RADIUS: f64 = 1e-7;
const SINGULAR_ENERGY: f64 = 1e-12;

impl<'p> Dopri5<'p> {
    fn new(p: &'p Params, s0: PhasePoint, tol: f64, singular_guard: bool) -> Self {
        let y = [s0.x, s0.y];
        let f = field(p, y);
        // conservative first step from the field magnitude
        let scale = (f[0].hypot(f[1])).max(1e-3);
        let h = (tol.powf(0.2) / scale).clamp(1e-10, 0.1);
        Dopri5 {
            p,
            tol,
            t: 0.0,
            y,
            f,
            h,
            err_prev: 1.0,
            accepted: 0,
            singular_guard,
        }
    }

    fn in_singular_funnel(&self, y: State) -> bool {
        if !self.p.sublinear() {
            return false;
        }
        let r = y[0].hypot(y[1]);
        if r > SINGULAR_RADIUS {
            return false;
        }
        let e = energy(self.p, PhasePoint::new(y[0], y[1]));
        e.abs() <= SINGULAR_ENERGY
    }

    /// Advances by one accepted step of size at most `h_cap`.
    fn advance(&mut self, h_cap: f64) -> Result<Step, IntegrateError> {
        let mut h = self.h.min(h_cap);
        for _attempt in 0..64 {
            let y = self.y;
            let k1 = self.f;
            let k2 = field(self.p, add(y, h, &[(A21, k1)]));
            let k3 = field(self.p, add(y, h, &[(A31, k1), (A32, k2)]));
            let k4 = field(self.p, add(y, h, &[(A41, k1), (A42, k2), (A43, k3)]));
            let k5 = field(
                self.p,
                add(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]),
            );
            let k6 = field(
                self.p,
                add(
                    y,
                    h,
                    &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
                ),
            );
            let y1 = add(
                y,
                h,
                &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)],
            );
            let k7 = field(self.p, y1);

            let mut err = 0.0_f64;
            for i in 0..2 {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = self.tol * (1.0 + y[i].abs().max(y1[i].abs()));
                err += (e / sc) * (e / sc);
            }
            // error per unit step
            let err_n = ((err / 2.0).sqrt() / h).max(1e-30);

            if err_n <= 1.0 {
                let step = Step {
                    t0: self.t,
                    t1: self.t + h,
                    y0: y,
                    y1,
                    f0: k1,
                    f1: k7,
                };
                self.t += h;
                self.y = y1;
                self.f = k7;
                self.accepted += 1;
                // PI controller (order 4 in error-per-unit-step mode)
                let fac = 0.9 * err_n.powf(-0.7 / 4.0) * self.err_prev.powf(0.4 / 4.0);
                self.err_prev = err_n;
                self.h = (h * fac.clamp(0.2, 5.0)).min(1e3);
                if self.singular_guard && self.in_singular_funnel(y1) {
                    return Err(IntegrateError::SingularOriginReached { t: self.t });
                }
                return Ok(step);
            }
            let fac = 0.9 * err_n.powf(-0.25);
            h *= if fac.is_finite() { fac.clamp(0.1, 0.9) } else { 0.1 };
            if h < 1e-14 * self.t.abs().max(1.0) {
                return Err(IntegrateError::StepSizeUnderflow { t: self.t });
            }
        }
        Err(IntegrateError::StepSizeUnderflow { t: self.t })
    }

    /// Advances exactly to `t_target`, robust to rounding in the last step.
    fn advance_to(&mut self, t_target: f64) -> Result<(), IntegrateError> {
        while self.t < t_target {
            let rem = t_target - self.t;
            if rem <= 4.0 * f64::EPSILON * t_target.abs().max(1.0) {
                self.t = t_target;
                break;
            }
            self.advance(rem)?;
        }
        Ok(())
    }
}

fn add(y: State, h: f64, terms: &[(f64, State)]) -> State {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Two-point quintic Hermite evaluation of `x(t)` and `y(t) = x'(t)` inside
/// an accepted step, using positions, velocities and the exact accelerations
/// from the vector field at both endpoints.
fn dense_eval(s: &Step, t: f64) -> PhasePoint {
    let h = s.t1 - s.t0;
    let tau = ((t - s.t0) / h).clamp(0.0, 1.0);
    let (x0, v0) = (s.y0[0], s.y0[1]);
    let (x1, v1) = (s.y1[0], s.y1[1]);
    let a0 = s.f0[1];
    let a1 = s.f1[1];

    // quintic two-point Taylor interpolation in tau with steps scaled by h
    let (v0, v1) = (v0 * h, v1 * h);
    let (a0, a1) = (a0 * h * h, a1 * h * h);
    let t2 = tau * tau;
    let t3 = t2 * tau;
    let t4 = t3 * tau;
    let t5 = t4 * tau;
    // basis for value
    let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h10 = tau - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h21 = 0.5 * t3 - t4 + 0.5 * t5;
    let x = h00 * x0 + h10 * v0 + h20 * a0 + h01 * x1 + h11 * v1 + h21 * a1;
    // derivative of the same polynomial
    let d00 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let d10 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let d20 = tau - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
    let d01 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let d11 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let d21 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
    let v = (d00 * x0 + d10 * v0 + d20 * a0 + d01 * x1 + d11 * v1 + d21 * a1) / h;
    PhasePoint::new(x, v)
}

/// Adaptive-step trajectory of the system from `s0` over `[0, t_max]`.
///
/// Samples are the accepted step endpoints. For `q < 1` the integration
/// refuses to continue through the singular origin.
pub fn integrate(
    p: &Params,
    s0: PhasePoint,
    t_max: f64,
    tol: f64,
) -> Result<Trajectory, IntegrateError> {
    assert!(t_max > 0.0, "t_max must be positive");
    assert!(
        (1e-14..=1e-4).contains(&tol),
        "tolerance {tol} outside [1e-14, 1e-4]"
    );
    if p.sublinear() && s0.norm() < SINGULAR_RADIUS && energy(p, s0).abs() <= SINGULAR_ENERGY {
        return Err(IntegrateError::StartAtSingularOrigin);
    }

    let mut stepper = Dopri5::new(p, s0, tol, true);
    let mut samples = vec![(0.0, s0)];
    let energy0 = energy(p, s0);
    while stepper.t < t_max {
        let remaining = t_max - stepper.t;
        let step = stepper.advance(remaining)?;
        samples.push((step.t1, PhasePoint::new(step.y1[0], step.y1[1])));
        if stepper.accepted > 2_000_000 {
            return Err(IntegrateError::StepSizeUnderflow { t: stepper.t });
        }
    }
    Ok(Trajectory { samples, energy0 })
}

/// Integrates from `s0` and reports the state at each requested time.
/// Times must be non-negative and non-decreasing.
pub fn integrate_to_grid(
    p: &Params,
    s0: PhasePoint,
    times: &[f64],
    tol: f64,
) -> Result<Vec<PhasePoint>, IntegrateError> {
    let mut out = Vec::with_capacity(times.len());
    let mut stepper = Dopri5::new(p, s0, tol, true);
    for &t in times {
        debug_assert!(t >= 0.0);
        stepper.advance_to(t)?;
        out.push(PhasePoint::new(stepper.y[0], stepper.y[1]));
    }
    Ok(out)
}

/// Poincaré sections used for return-time detection.
#[derive(Debug, Clone, Copy)]
enum Section {
    /// crossing of `x = x0` with `sign(y) = ysign`
    Vertical { x0: f64, ysign: f64 },
    /// crossing of `y = 0` on the branch where `sign(U'(x)) = usign`
    Turning { usign: f64 },
}

impl Section {
    fn g(&self, s: PhasePoint) -> f64 {
        match self {
            Section::Vertical { x0, .. } => s.x - x0,
            Section::Turning { .. } => s.y,
        }
    }

    fn accepts(&self, p: &Params, s: PhasePoint) -> bool {
        match self {
            Section::Vertical { ysign, .. } => s.y * ysign > 0.0,
            Section::Turning { usign } => {
                crate::phase::potential_d(p, s.x) * usign > 0.0
            }
        }
    }
}

/// Localizes the zero of `g` inside an accepted step by bisection on fresh
/// sub-integrations from the step start.
fn localize_crossing(
    p: &Params,
    step: &Step,
    g: impl Fn(PhasePoint) -> f64,
    tol_t: f64,
    integ_tol: f64,
) -> Result<(f64, PhasePoint), IntegrateError> {
    let state_at = |dt: f64| -> Result<PhasePoint, IntegrateError> {
        if dt <= 0.0 {
            return Ok(PhasePoint::new(step.y0[0], step.y0[1]));
        }
        let from = PhasePoint::new(step.y0[0], step.y0[1]);
        let mut st = Dopri5::new(p, from, integ_tol, false);
        st.advance_to(dt)?;
        Ok(PhasePoint::new(st.y[0], st.y[1]))
    };

    let h = step.t1 - step.t0;
    let mut lo = 0.0_f64;
    let mut hi = h;
    let mut g_lo = g(PhasePoint::new(step.y0[0], step.y0[1]));
    for _ in 0..128 {
        if hi - lo <= tol_t {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let state_mid = state_at(mid)?;
        let g_mid = g(state_mid);
        if g_mid == 0.0 {
            return Ok((step.t0 + mid, state_mid));
        }
        if g_lo.signum() != g_mid.signum() {
            hi = mid;
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
    let t_mid = 0.5 * (lo + hi);
    let s = state_at(t_mid)?;
    Ok((step.t0 + t_mid, s))
}

const ORACLE_HORIZON_STEPS: usize = 1_000_000;

/// All located crossing times of the given section, in order, until `count`
/// accepted crossings have been found.
fn section_crossings(
    p: &Params,
    s0: PhasePoint,
    section: Section,
    count: usize,
    tol: f64,
) -> Result<Vec<f64>, IntegrateError> {
    let f0 = vector_field(p, s0);
    if f0.norm() < 1e-300 {
        return Err(IntegrateError::NotClosed); // fixed point
    }
    let integ_tol = tol.min(1e-12).max(1e-14);
    let mut stepper = Dopri5::new(p, s0, integ_tol, true);
    let mut found = Vec::new();
    let mut g_prev: Option<f64> = None;
    while found.len() < count {
        if stepper.accepted > ORACLE_HORIZON_STEPS {
            return Err(IntegrateError::NotClosed);
        }
        let step = stepper.advance(f64::INFINITY)?;
        let g0 = match g_prev {
            Some(g) => g,
            None => section.g(PhasePoint::new(step.y0[0], step.y0[1])),
        };
        let g1 = section.g(PhasePoint::new(step.y1[0], step.y1[1]));
        g_prev = Some(g1);
        // skip until the trajectory has left the section it was launched on
        if g0 == 0.0 {
            continue;
        }
        if g0.signum() != g1.signum() || g1 == 0.0 {
            let (t_c, s_c) = localize_crossing(p, &step, |s| section.g(s), tol, integ_tol)?;
            if section.accepts(p, s_c) {
                found.push(t_c);
            }
        }
    }
    Ok(found)
}

/// First-return time of the closed orbit through `s0`, localized to `|dt| <= tol`.
///
/// The section is the vertical line `x = x0` (matching the launch `y` sign)
/// when `y0 != 0`, and the turning condition `y = 0` on the launch branch of
/// `U'` otherwise.
pub fn period_oracle(p: &Params, s0: PhasePoint, tol: f64) -> Result<f64, IntegrateError> {
    let section = if s0.y != 0.0 {
        Section::Vertical {
            x0: s0.x,
            ysign: s0.y.signum(),
        }
    } else {
        let u = crate::phase::potential_d(p, s0.x);
        if u == 0.0 {
            return Err(IntegrateError::NotClosed); // launched at an equilibrium
        }
        Section::Turning { usign: u.signum() }
    };
    let t = section_crossings(p, s0, section, 1, tol)?;
    Ok(t[0])
}

/// First-return time plus the four inter-axis-crossing intervals, for
/// launches `(0, s)` on orbits symmetric about both axes.
pub fn period_oracle_quarters(
    p: &Params,
    s: f64,
    tol: f64,
) -> Result<(f64, [f64; 4]), IntegrateError> {
    assert!(s != 0.0);
    let s0 = PhasePoint::new(0.0, s);
    // y = 0 crossings happen twice per period (at ±amplitude), x = 0
    // crossings likewise; interleaved they cut the period in quarters.
    let y_cross = section_crossings(
        p,
        s0,
        Section::Turning { usign: 1.0 },
        1,
        tol,
    )?;
    let y_cross2 = section_crossings(
        p,
        s0,
        Section::Turning { usign: -1.0 },
        1,
        tol,
    )?;
    let x_half = section_crossings(
        p,
        s0,
        Section::Vertical {
            x0: 0.0,
            ysign: -s.signum(),
        },
        1,
        tol,
    )?;
    let x_full = section_crossings(
        p,
        s0,
        Section::Vertical {
            x0: 0.0,
            ysign: s.signum(),
        },
        1,
        tol,
    )?;
    let (t1, t2, t3, t4) = (y_cross[0], x_half[0], y_cross2[0], x_full[0]);
    Ok((t4, [t1, t2 - t1, t3 - t2, t4 - t3]))
}

/// Near-origin expansion of the homoclinic-like solution: along the loop
/// `w(t) = kappa * tau^pexp * (1 + a2 tau^2 + b4 tau^4)` with `tau` the time
/// from the origin touch.
#[derive(Debug, Clone, Copy)]
struct TouchAsymptotics {
    kappa: f64,
    pexp: f64,
    a2: f64,
    b4: f64,
}

impl TouchAsymptotics {
    fn new(p: &Params) -> Self {
        let q = p.q();
        let pexp = 2.0 / (1.0 - q);
        let kappa = ((1.0 - q) * (1.0 - q) / (2.0 * (1.0 + q))).powf(1.0 / (1.0 - q));
        let pp = pexp * (pexp - 1.0);
        let a2 = -p.mu() / ((pexp + 2.0) * (pexp + 1.0) - q * pp);
        let b4 = (pp * q * (q - 1.0) / 2.0 * a2 * a2 - p.mu() * a2)
            / ((pexp + 4.0) * (pexp + 3.0) - q * pp);
        TouchAsymptotics { kappa, pexp, a2, b4 }
    }

    fn x(&self, tau: f64) -> f64 {
        let t2 = tau * tau;
        self.kappa * tau.powf(self.pexp) * (1.0 + self.a2 * t2 + self.b4 * t2 * t2)
    }

    fn v(&self, tau: f64) -> f64 {
        let t2 = tau * tau;
        self.kappa
            * (self.pexp * tau.powf(self.pexp - 1.0) * (1.0 + self.a2 * t2 + self.b4 * t2 * t2)
                + tau.powf(self.pexp) * (2.0 * self.a2 * tau + 4.0 * self.b4 * t2 * tau))
    }

    /// Inverts `x(tau) = xc` by Newton from the leading-order guess.
    fn tau_of_x(&self, xc: f64) -> f64 {
        let mut tau = (xc / self.kappa).powf(1.0 / self.pexp);
        for _ in 0..8 {
            let f = self.x(tau) - xc;
            let d = self.v(tau);
            let step = f / d;
            tau -= step;
            if step.abs() <= 1e-16 * tau {
                break;
            }
        }
        tau
    }
}

/// One period of the nonnegative homoclinic-like solution.
#[derive(Debug, Clone)]
pub struct HomoclinicSolution {
    pub trajectory: Trajectory,
    /// the exact period `2*pi / ((1-q) sqrt(mu))`
    pub period: f64,
    /// loop time actually measured by integration + near-origin asymptotics
    pub measured_period: f64,
}

pub(crate) struct HomoclinicProfile {
    p: Params,
    asym: TouchAsymptotics,
    x_star: f64,
    half: f64,
    tau_cut: f64,
    /// falling-half steps from the apex, for dense evaluation
    steps: Vec<Step>,
    /// time scale factor mapping nominal time onto measured time
    sigma: f64,
    pub measured_period: f64,
    pub period: f64,
    closed_form_mu: bool,
}

impl HomoclinicProfile {
    pub fn new(p: &Params) -> Result<Self, IntegrateError> {
        if !(p.epsilon() == 1 && p.sublinear() && p.mu() > 0.0) {
            return Err(IntegrateError::WrongCase);
        }
        let q = p.q();
        let mu = p.mu();
        let x_star = p.separatrix_x_star().expect("homoclinic case");
        let period = 2.0 * std::f64::consts::PI / ((1.0 - q) * mu.sqrt());
        let asym = TouchAsymptotics::new(p);

        // integrate the falling half from the apex down to the cutoff
        let cutoff = 1e-7 * x_star;
        let apex = PhasePoint::new(x_star, 0.0);
        let mut stepper = Dopri5::new(p, apex, 1e-13, false);
        let mut steps = Vec::new();
        let crossing_step;
        loop {
            let step = stepper.advance(f64::INFINITY)?;
            if step.y1[0] <= cutoff {
                crossing_step = step;
                break;
            }
            steps.push(step);
            if stepper.accepted > 200_000 {
                return Err(IntegrateError::StepSizeUnderflow { t: stepper.t });
            }
        }
        // localize x = cutoff inside the last step
        let (t_cut, s_cut) = localize_crossing(
            p,
            &crossing_step,
            |s| s.x - cutoff,
            1e-14,
            1e-13,
        )?;
        let mut trimmed = crossing_step;
        trimmed.t1 = t_cut;
        trimmed.y1 = [s_cut.x, s_cut.y];
        trimmed.f1 = field(p, trimmed.y1);
        steps.push(trimmed);

        let tau_cut = asym.tau_of_x(s_cut.x);
        let half = t_cut + tau_cut;
        let measured = 2.0 * half;

        let euclid_mu = 4.0 / ((1.0 - q) * (1.0 - q));
        let closed_form_mu = (mu - euclid_mu).abs() <= 1e-12 * euclid_mu;

        Ok(HomoclinicProfile {
            p: *p,
            asym,
            x_star,
            half,
            tau_cut,
            steps,
            sigma: measured / period,
            measured_period: measured,
            period,
            closed_form_mu,
        })
    }

    /// `(x, x')` at nominal time `t` in `[0, period]`, zero touch at `t = 0`.
    pub fn eval(&self, t: f64) -> PhasePoint {
        let t = t.rem_euclid(self.period);
        if self.closed_form_mu {
            // x(t) = x_* |sin t'|^sqrt(mu) with t' = t * pi / period
            let smu = self.p.mu().sqrt();
            let scale = std::f64::consts::PI / self.period;
            let tt = t * scale;
            let s = tt.sin().abs();
            let x = self.x_star * s.powf(smu);
            let v = if s == 0.0 {
                0.0
            } else {
                self.x_star * smu * s.powf(smu - 1.0) * tt.cos() * tt.sin().signum() * scale
            };
            return PhasePoint::new(x, v);
        }

        // mirror onto the rising half [0, period/2], then map through the
        // measured time scale
        let half_nom = 0.5 * self.period;
        let (t_half, vsign) = if t <= half_nom {
            (t, 1.0)
        } else {
            (self.period - t, -1.0)
        };
        let ti = t_half * self.sigma; // internal (measured) time from the touch
        if ti <= self.tau_cut {
            let x = self.asym.x(ti);
            let v = self.asym.v(ti);
            return PhasePoint::new(x, vsign * v);
        }
        // time after the apex on the falling branch
        let s_fall = (self.half - ti).max(0.0);
        let step = match self
            .steps
            .binary_search_by(|st| st.t1.partial_cmp(&s_fall).unwrap())
        {
            Ok(i) => &self.steps[i],
            Err(i) => &self.steps[i.min(self.steps.len() - 1)],
        };
        let s = dense_eval(step, s_fall);
        PhasePoint::new(s.x, -vsign * s.y)
    }
}

/// One period of the nonnegative homoclinic-like solution sampled at `n`
/// points (endpoints included). Uses the explicit `x_*|sin t|^sqrt(mu)`
/// form when `mu = 4/(1-q)^2`; otherwise the loop is integrated from a
/// point on the separatrix with the near-origin asymptotics spliced in.
/// The measured loop time is always reported for validation.
pub fn homoclinic_time_param(p: &Params, n: usize) -> Result<HomoclinicSolution, IntegrateError> {
    assert!(n >= 2);
    let profile = HomoclinicProfile::new(p)?;
    let mut samples = Vec::with_capacity(n);
    for j in 0..n {
        let t = profile.period * j as f64 / (n - 1) as f64;
        samples.push((t, profile.eval(t)));
    }
    Ok(HomoclinicSolution {
        trajectory: Trajectory {
            samples,
            energy0: 0.0,
        },
        period: profile.period,
        measured_period: profile.measured_period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(e: i32, q: f64, mu: f64) -> Params {
        Params::new(e, q, mu).unwrap()
    }

    #[test]
    fn energy_drift_is_tiny_on_closed_orbit() {
        let p = params(-1, 3.0, 1.0);
        let tr = integrate(&p, PhasePoint::new(0.0, 1.0), 20.0, 1e-12).unwrap();
        let drift = tr.max_energy_drift(&p);
        assert!(drift <= 1e-9 * tr.energy0.abs().max(1.0), "drift {drift:e}");
        assert!(tr.samples.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn fixed_point_stays_fixed() {
        let p = params(1, 3.0, 4.0);
        let tr = integrate(&p, PhasePoint::new(2.0, 0.0), 10.0, 1e-12).unwrap();
        for (_, s) in &tr.samples {
            assert!((s.x - 2.0).abs() < 1e-12 && s.y.abs() < 1e-12);
        }
    }

    #[test]
    fn homoclinic_start_hits_singular_origin() {
        // launch exactly on the separatrix level, heading for the origin
        let p = params(1, 0.5, 16.0);
        let x0 = 1.0 / 144.0 - 1e-6;
        let y0 = -(-potential(&p, x0)).sqrt();
        let r = integrate(&p, PhasePoint::new(x0, y0), PI, 1e-12);
        assert!(
            matches!(r, Err(IntegrateError::SingularOriginReached { t }) if t < PI),
            "got {r:?}"
        );
    }

    #[test]
    fn oracle_matches_linearized_period_near_center() {
        // near (c, 0) the linearization has period 2 pi / sqrt(mu (1-q))
        let p = params(1, 0.5, 36.0);
        let c = 36.0_f64.powf(1.0 / (0.5 - 1.0));
        let t = period_oracle(&p, PhasePoint::new(c + 1e-5, 0.0), 1e-12).unwrap();
        let lin = 2.0 * PI / (36.0 * 0.5).sqrt();
        assert!((t - lin).abs() <= 1e-3 * lin, "t = {t}, lin = {lin}");
    }

    #[test]
    fn oracle_approaches_harmonic_limit_from_below() {
        let p = params(-1, 3.0, 4.0);
        let lim = PI; // 2 pi / sqrt(mu)
        let mut last = 0.0;
        for &s in &[0.5, 0.1, 0.02] {
            let t = period_oracle(&p, PhasePoint::new(0.0, s), 1e-12).unwrap();
            assert!(t < lim);
            assert!(t > last);
            last = t;
        }
        assert!((last - lim).abs() < 1e-3);
    }

    #[test]
    fn quarter_symmetry() {
        let p = params(-1, 3.0, 1.0);
        let (t, quarters) = period_oracle_quarters(&p, 1.0, 1e-12).unwrap();
        let q0 = quarters[0];
        for &q in &quarters {
            assert!((q - q0).abs() < 1e-8, "quarters {quarters:?}");
        }
        assert!((4.0 * q0 - t).abs() < 1e-8);
    }

    #[test]
    fn time_reversal_mirror() {
        let p = params(-1, 3.0, 1.0);
        let s0 = PhasePoint::new(0.3, 0.8);
        let t_period = period_oracle(&p, s0, 1e-12).unwrap();
        let n = 40;
        let times: Vec<f64> = (0..=n).map(|j| t_period * j as f64 / n as f64).collect();
        let fwd = integrate_to_grid(&p, s0, &times, 1e-12).unwrap();
        let mirrored_start = PhasePoint::new(s0.x, -s0.y);
        let rev = integrate_to_grid(&p, mirrored_start, &times, 1e-12).unwrap();
        // trajectory from (x0, -y0) run forward equals the time-reversed
        // mirror: rev(t) = (x(T - t), -y(T - t))
        for j in 0..=n {
            let a = fwd[n - j];
            let b = rev[j];
            assert!(
                (a.x - b.x).abs() < 1e-8 && (a.y + b.y).abs() < 1e-8,
                "j={j}: {a:?} vs {b:?}"
            );
        }
    }

    #[test]
    fn homoclinic_closed_form_case() {
        let p = params(1, 0.5, 16.0);
        let hs = homoclinic_time_param(&p, 1001).unwrap();
        assert!((hs.period - PI).abs() < 1e-15);
        // x(t) = (1/144) sin^4 t
        for &(t, s) in hs.trajectory.samples.iter().step_by(97) {
            let expect = (1.0 / 144.0) * t.sin().powi(4);
            assert!((s.x - expect).abs() < 1e-15, "t={t}: {} vs {expect}", s.x);
        }
        // measured loop time agrees with pi to high accuracy
        assert!(
            (hs.measured_period - PI).abs() < 1e-10,
            "measured {} vs pi",
            hs.measured_period
        );
    }

    #[test]
    fn homoclinic_general_mu_period_identity() {
        let p = params(1, 0.5, 36.0);
        let hs = homoclinic_time_param(&p, 1001).unwrap();
        let expect = 2.0 * PI / 3.0;
        assert!((hs.period - expect).abs() < 1e-15);
        assert!(
            (hs.measured_period - expect).abs() < 1e-6,
            "measured {} vs {expect}",
            hs.measured_period
        );
    }

    #[test]
    fn homoclinic_samples_satisfy_ode() {
        // residual of the closed form against w'' = -mu w + w^q via central
        // differences on a fine grid, away from the touches
        let p = params(1, 0.5, 16.0);
        let n = 16001;
        let hs = homoclinic_time_param(&p, n).unwrap();
        let h = hs.period / (n - 1) as f64;
        let xs: Vec<f64> = hs.trajectory.samples.iter().map(|(_, s)| s.x).collect();
        let mut worst = 0.0_f64;
        for i in 1..n - 1 {
            if xs[i] < 1e-6 / 144.0 {
                continue;
            }
            let d2 = (xs[i + 1] - 2.0 * xs[i] + xs[i - 1]) / (h * h);
            let rhs = -16.0 * xs[i] + xs[i].sqrt();
            worst = worst.max((d2 - rhs).abs());
        }
        assert!(worst <= 1e-8, "residual {worst:e}");
    }

    #[test]
    fn wrong_case_for_homoclinic() {
        assert_eq!(
            homoclinic_time_param(&params(1, 3.0, 4.0), 100).unwrap_err(),
            IntegrateError::WrongCase
        );
    }

    #[test]
    fn heteroclinic_level_never_returns() {
        // launch just outside the heteroclinic level: the orbit is unbounded
        // and the oracle must fail cleanly rather than report a period
        let p = params(1, 3.0, 4.0);
        let y0 = 8.0_f64.sqrt() * (1.0 + 1e-12);
        let r = period_oracle(&p, PhasePoint::new(0.0, y0), 1e-10);
        assert!(r.is_err(), "got {r:?}");
    }
}
