//! Which `2*pi/k`-periodic solutions the angular ODE admits for a given
//! `(eps, q, mu)`, and construction of the unique (up to sign and phase)
//! solution of each admitted mode by monotone bisection on the period
//! function.

use crate::integrate::{integrate_to_grid, HomoclinicProfile, IntegrateError};
use crate::period::{
    center_gamma, period, period_limits, turning_points, Monotone, PeriodError, PeriodLimits,
    Region,
};
use crate::phase::{Params, PhasePoint};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModeError {
    #[error("mode k = {k} ({kind:?}) is not admitted for this (eps, q, mu)")]
    NoSuchMode { k: u32, kind: ModeKind },
    #[error("failed to bracket the period target: {0}")]
    BracketFailure(String),
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

/// Snap a float to the nearest integer when it is within a relative 1e-9,
/// so that interval endpoints like `(1-q)*sqrt(mu) = 3` are treated exactly.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// A set of admitted mode numbers: empty, all integers from a bound up, or
/// a finite integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSet {
    Empty,
    /// every integer `k >= min`
    AllFrom(u32),
    /// every integer `min <= k <= max`
    Range(u32, u32),
}

impl ModeSet {
    /// Integers strictly inside the open interval `(lo, hi)`.
    fn open_interval(lo: f64, hi: f64) -> ModeSet {
        let (lo, hi) = (snap(lo), snap(hi));
        let k_min = (lo.floor() as i64 + 1).max(1);
        let k_max = (hi.ceil() as i64) - 1;
        if k_max < k_min {
            ModeSet::Empty
        } else {
            ModeSet::Range(k_min as u32, k_max as u32)
        }
    }

    /// Integers strictly above `lo`.
    fn open_lower(lo: f64) -> ModeSet {
        let lo = snap(lo);
        ModeSet::AllFrom(((lo.floor() as i64 + 1).max(1)) as u32)
    }

    pub fn contains(&self, k: u32) -> bool {
        match *self {
            ModeSet::Empty => false,
            ModeSet::AllFrom(m) => k >= m,
            ModeSet::Range(a, b) => (a..=b).contains(&k),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ModeSet::Empty)
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, ModeSet::AllFrom(_))
    }

    /// Lists the members up to `cap` inclusive.
    pub fn materialize(&self, cap: u32) -> Vec<u32> {
        match *self {
            ModeSet::Empty => vec![],
            ModeSet::AllFrom(m) => (m..=cap).collect(),
            ModeSet::Range(a, b) => (a..=b.min(cap)).collect(),
        }
    }
}

/// Qualitative type of a periodic solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    /// vanishes transversally, `2k` zeros per `2*pi`
    SignChanging,
    /// strictly positive orbit around an off-origin center
    Positive,
    /// touches zero with even tangency `k` times per `2*pi`
    Nonnegative,
}

/// The admitted modes of each kind for one parameter triple.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseClassification {
    pub sign_changing: ModeSet,
    pub positive: ModeSet,
    pub nonnegative: Option<u32>,
    pub trivial_only: bool,
}

/// Decides, purely by interval arithmetic on the case table, which
/// `2*pi/k`-periodic solutions exist.
pub fn classify_case(p: &Params) -> CaseClassification {
    let (q, mu) = (p.q(), p.mu());
    let (sign_changing, positive, nonnegative) = match (p.epsilon(), q > 1.0) {
        (-1, true) => {
            if mu >= 0.0 {
                (ModeSet::open_lower(mu.sqrt()), ModeSet::Empty, None)
            } else {
                // double-well outer orbits cover every period; positive
                // orbits live inside the wells
                let bound = (-mu * (q - 1.0)).sqrt();
                let positive = match ModeSet::open_interval(1.0, bound) {
                    ModeSet::Range(a, b) => ModeSet::Range(a.max(2), b),
                    other => other,
                };
                (ModeSet::AllFrom(1), positive, None)
            }
        }
        (-1, false) => {
            if mu >= 0.0 {
                (ModeSet::open_lower(mu.sqrt()), ModeSet::Empty, None)
            } else {
                (ModeSet::AllFrom(1), ModeSet::Empty, None)
            }
        }
        (1, true) => {
            if mu > 0.0 {
                (ModeSet::open_interval(0.0, mu.sqrt()), ModeSet::Empty, None)
            } else {
                (ModeSet::Empty, ModeSet::Empty, None)
            }
        }
        (1, false) => {
            if mu > 0.0 {
                let smu = mu.sqrt();
                let sc = ModeSet::open_interval((1.0 - q) * smu / 2.0, smu);
                let pos = ModeSet::open_interval((1.0 - q) * smu, (mu * (1.0 - q)).sqrt());
                let k0 = snap((1.0 - q) * smu);
                let nn = if k0 >= 1.0 && k0.fract() == 0.0 {
                    Some(k0 as u32)
                } else {
                    None
                };
                (sc, pos, nn)
            } else {
                (ModeSet::Empty, ModeSet::Empty, None)
            }
        }
        _ => unreachable!(),
    };
    let trivial_only = sign_changing.is_empty() && positive.is_empty() && nonnegative.is_none();
    CaseClassification {
        sign_changing,
        positive,
        nonnegative,
        trivial_only,
    }
}

/// A `2*pi/k`-periodic solution of the angular ODE in canonical phase.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub params: Params,
    pub k: u32,
    pub kind: ModeKind,
    /// canonical initial state: `(0, s*)` for sign-changing, `(min w, 0)`
    /// for positive, the zero touch for nonnegative
    pub launch: PhasePoint,
    /// `(theta, w, w')` on a uniform grid over `[0, 2*pi)`
    pub w_samples: Vec<(f64, f64, f64)>,
    /// achieved period mismatch `|T(s*) - 2*pi/k|`
    pub period_error: f64,
}

const DEFAULT_SAMPLES: usize = 2048;

/// Finds a bracket `[s_lo, s_hi]` with `T(s) - target` changing sign.
fn bracket_target(
    p: &Params,
    region: Region,
    lim: &PeriodLimits,
    target: f64,
) -> Result<(f64, f64, f64, f64), ModeError> {
    let t_of = |s: f64| period(p, region, s);
    match lim.gamma {
        Some(g) => {
            let mut lo_frac = 1e-4;
            let mut hi_frac = 1e-4;
            for _ in 0..6 {
                let lo = g * lo_frac;
                let hi = g * (1.0 - hi_frac);
                let f_lo = t_of(lo)? - target;
                let f_hi = t_of(hi)? - target;
                if f_lo == 0.0 {
                    return Ok((lo, lo, f_lo, f_lo));
                }
                if f_hi == 0.0 {
                    return Ok((hi, hi, f_hi, f_hi));
                }
                if f_lo.signum() != f_hi.signum() {
                    return Ok((lo, hi, f_lo, f_hi));
                }
                lo_frac *= 1e-2;
                hi_frac *= 1e-2;
                if hi_frac < 1e-11 {
                    break;
                }
            }
            Err(ModeError::BracketFailure(format!(
                "target period {target} not bracketed on (0, {g})"
            )))
        }
        None => {
            let mut lo = 1.0;
            let mut hi = 1.0;
            let mut f_lo = t_of(lo)? - target;
            let mut f_hi = f_lo;
            for _ in 0..220 {
                if f_lo.signum() != f_hi.signum() {
                    return Ok((lo, hi, f_lo, f_hi));
                }
                // march both ends outward until the target is straddled
                lo *= 0.25;
                hi *= 4.0;
                f_lo = t_of(lo)? - target;
                f_hi = t_of(hi)? - target;
                if lo < 1e-150 || hi > 1e150 {
                    break;
                }
            }
            Err(ModeError::BracketFailure(format!(
                "target period {target} not bracketed on (0, inf)"
            )))
        }
    }
}

/// Bisects the monotone period function to `|T(s) - target| <= tol`.
fn solve_period_equation(
    p: &Params,
    region: Region,
    target: f64,
    tol: f64,
) -> Result<(f64, f64), ModeError> {
    let lim = period_limits(p, region)?;
    let (mut a, mut b, mut fa, _fb) = bracket_target(p, region, &lim, target)?;
    if a == b {
        return Ok((a, 0.0));
    }
    let mut best = (a, fa.abs());
    for _ in 0..256 {
        let m = 0.5 * (a + b);
        let fm = period(p, region, m)? - target;
        if fm.abs() < best.1 {
            best = (m, fm.abs());
        }
        if fm.abs() <= tol {
            return Ok((m, fm.abs()));
        }
        if fa.signum() != fm.signum() {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if (b - a) <= f64::EPSILON * b.abs() {
            break;
        }
    }
    if best.1 <= tol {
        Ok(best)
    } else {
        Err(ModeError::BracketFailure(format!(
            "bisection stalled at |T - target| = {:e}",
            best.1
        )))
    }
}

/// Produces the admitted mode `(k, kind)` with canonical phase.
///
/// Sign-changing and positive solutions are found by bisection on the
/// region's period function; the nonnegative solution is assembled from the
/// homoclinic-like loop tiled `k` times, never by bisection.
pub fn solve_mode(p: &Params, k: u32, kind: ModeKind) -> Result<ModeSolution, ModeError> {
    let cls = classify_case(p);
    let admitted = match kind {
        ModeKind::SignChanging => cls.sign_changing.contains(k),
        ModeKind::Positive => cls.positive.contains(k),
        ModeKind::Nonnegative => cls.nonnegative == Some(k),
    };
    if !admitted {
        return Err(ModeError::NoSuchMode { k, kind });
    }
    let target = 2.0 * PI / f64::from(k);

    match kind {
        ModeKind::SignChanging => {
            let (s_star, period_error) =
                solve_period_equation(p, Region::Origin, target, 1e-10)?;
            let launch = PhasePoint::new(0.0, s_star);
            let w_samples = sample_states(p, launch, DEFAULT_SAMPLES)?;
            Ok(ModeSolution {
                params: *p,
                k,
                kind,
                launch,
                w_samples,
                period_error,
            })
        }
        ModeKind::Positive => {
            let (s_star, period_error) =
                solve_period_equation(p, Region::Center, target, 1e-10)?;
            let (y_min, _z) = turning_points(p, s_star)?;
            let launch = PhasePoint::new(y_min, 0.0);
            let w_samples = sample_states(p, launch, DEFAULT_SAMPLES)?;
            Ok(ModeSolution {
                params: *p,
                k,
                kind,
                launch,
                w_samples,
                period_error,
            })
        }
        ModeKind::Nonnegative => {
            let hs = homoclinic_time_param(p, 8)?; // cheap: only for the period check
            let profile = HomoclinicProfile::new(p)?;
            let mut w_samples = Vec::with_capacity(DEFAULT_SAMPLES);
            for j in 0..DEFAULT_SAMPLES {
                let theta = 2.0 * PI * j as f64 / DEFAULT_SAMPLES as f64;
                let s = profile.eval(theta);
                w_samples.push((theta, s.x, s.y));
            }
            // the loop period 2 pi / ((1-q) sqrt(mu)) equals 2 pi / k exactly
            // when the mode is admitted
            let period_error = (hs.period - target).abs();
            Ok(ModeSolution {
                params: *p,
                k,
                kind,
                launch: PhasePoint::new(0.0, 0.0),
                w_samples,
                period_error,
            })
        }
    }
}

fn sample_states(
    p: &Params,
    launch: PhasePoint,
    n: usize,
) -> Result<Vec<(f64, f64, f64)>, ModeError> {
    let thetas: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let states = integrate_to_grid(p, launch, &thetas, 1e-12)?;
    Ok(thetas
        .iter()
        .zip(states)
        .map(|(&t, s)| (t, s.x, s.y))
        .collect())
}

/// Resamples the mode on a uniform grid of `n` intervals over `[0, 2*pi]`,
/// returning `n + 1` points with both endpoints included (the last is the
/// wrap-around value, recomputed rather than copied).
pub fn sample_w(m: &ModeSolution, n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 4 * m.k as usize, "need at least 4k samples");
    let thetas: Vec<f64> = (0..=n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    match m.kind {
        ModeKind::Nonnegative => {
            let profile = HomoclinicProfile::new(&m.params).expect("mode exists");
            thetas.iter().map(|&t| (t, profile.eval(t).x)).collect()
        }
        _ => {
            let states = integrate_to_grid(&m.params, m.launch, &thetas, 1e-12)
                .expect("resampling a solved mode");
            thetas.iter().zip(states).map(|(&t, s)| (t, s.x)).collect()
        }
    }
}

/// Max-norm second-difference residual of the angular ODE over uniformly
/// spaced samples of one full period (wrap-around indexing). Second-order
/// accurate for smooth solutions.
pub fn ode_residual(p: &Params, samples: &[(f64, f64)]) -> f64 {
    ode_residual_filtered(p, samples, 0.0)
}

/// Same residual, ignoring points with `|w| <= w_floor` (used for the
/// nonnegative modes, which lose smoothness at their zero touches).
pub fn ode_residual_filtered(p: &Params, samples: &[(f64, f64)], w_floor: f64) -> f64 {
    // drop an explicit duplicated wrap point if present
    let n_total = samples.len();
    assert!(n_total >= 64, "need at least 64 samples");
    let span = samples[n_total - 1].0 - samples[0].0;
    let n = if (span - 2.0 * PI).abs() < 1e-9 {
        n_total - 1
    } else {
        n_total
    };
    let h = samples[1].0 - samples[0].0;
    for w in samples[..n].windows(2) {
        debug_assert!(
            ((w[1].0 - w[0].0) - h).abs() < 1e-9,
            "samples must be uniformly spaced"
        );
    }
    let w_at = |i: usize| samples[i % n].1;
    let mut worst = 0.0_f64;
    for i in 0..n {
        let w = w_at(i);
        if w.abs() <= w_floor {
            continue;
        }
        let d2 = (w_at(i + 1) - 2.0 * w + w_at(i + n - 1)) / (h * h);
        let r = d2 + p.mu() * w - p.eps() * p.odd_pow(w);
        worst = worst.max(r.abs());
    }
    worst
}

/// Counts the zeros of a sampled periodic function on `[0, 2*pi)`:
/// sign changes plus even-order touches, treating `|w| <= floor` as zero.
pub fn count_zeros(samples: &[(f64, f64)], floor: f64) -> usize {
    let n_total = samples.len();
    let span = samples[n_total - 1].0 - samples[0].0;
    let n = if (span - 2.0 * PI).abs() < 1e-9 {
        n_total - 1
    } else {
        n_total
    };

    // collapse into circular runs of sign tokens: -1, 0, +1
    let token = |w: f64| {
        if w.abs() <= floor {
            0i8
        } else if w > 0.0 {
            1
        } else {
            -1
        }
    };
    let mut runs: Vec<i8> = Vec::new();
    for i in 0..n {
        let t = token(samples[i].1);
        if runs.last() != Some(&t) {
            runs.push(t);
        }
    }
    if runs.len() > 1 && runs.first() == runs.last() {
        runs.pop();
    }
    if runs.iter().all(|&t| t == 0) {
        return 0;
    }

    let nonzero: Vec<(usize, i8)> = runs
        .iter()
        .enumerate()
        .filter(|(_, &t)| t != 0)
        .map(|(i, &t)| (i, t))
        .collect();
    let m = nonzero.len();
    let mut zeros = 0;
    for j in 0..m {
        let (i_cur, t_cur) = nonzero[j];
        let (i_next, t_next) = nonzero[(j + 1) % m];
        // gap between consecutive nonzero runs (circular)
        let gap = if j + 1 < m {
            i_next - i_cur - 1
        } else {
            runs.len() - i_cur - 1 + i_next
        };
        if t_cur != t_next {
            zeros += 1; // crossing, possibly through a tiny cluster
        } else if gap > 0 {
            zeros += 1; // touch without sign change
        }
    }
    zeros
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(e: i32, q: f64, mu: f64) -> Params {
        Params::new(e, q, mu).unwrap()
    }

    #[test]
    fn classification_sublinear_focusing() {
        let cls = classify_case(&params(1, 0.5, 36.0));
        assert_eq!(cls.sign_changing, ModeSet::Range(2, 5));
        assert_eq!(cls.positive, ModeSet::Range(4, 4));
        assert_eq!(cls.nonnegative, Some(3));
        assert!(!cls.trivial_only);
    }

    #[test]
    fn classification_superlinear_focusing_cutoff() {
        let cls = classify_case(&params(1, 3.0, 4.0));
        assert_eq!(cls.sign_changing, ModeSet::Range(1, 1));
        assert_eq!(cls.positive, ModeSet::Empty);

        assert!(classify_case(&params(1, 3.0, 0.5)).trivial_only);
        assert!(classify_case(&params(1, 3.0, 1.0)).trivial_only);
        assert!(classify_case(&params(1, 3.0, -2.0)).trivial_only);
        assert!(classify_case(&params(1, 0.5, -2.0)).trivial_only);
    }

    #[test]
    fn classification_defocusing() {
        let cls = classify_case(&params(-1, 3.0, -4.0));
        assert_eq!(cls.sign_changing, ModeSet::AllFrom(1));
        assert_eq!(cls.positive, ModeSet::Range(2, 2));

        let cls = classify_case(&params(-1, 3.0, 1.0));
        assert_eq!(cls.sign_changing, ModeSet::AllFrom(2));
        assert_eq!(cls.positive, ModeSet::Empty);

        let cls = classify_case(&params(-1, 0.5, 0.0));
        assert_eq!(cls.sign_changing, ModeSet::AllFrom(1));

        let cls = classify_case(&params(-1, 0.5, -1.0));
        assert_eq!(cls.sign_changing, ModeSet::AllFrom(1));
        assert_eq!(cls.positive, ModeSet::Empty);
    }

    #[test]
    fn strict_boundary_integers_are_excluded() {
        // k > sqrt(mu) with sqrt(mu) = 2 exactly: k starts at 3
        let cls = classify_case(&params(-1, 3.0, 4.0));
        assert_eq!(cls.sign_changing, ModeSet::AllFrom(3));
        // k < sqrt(mu) = 2: only k = 1
        let cls = classify_case(&params(1, 3.0, 4.0));
        assert!(cls.sign_changing.contains(1) && !cls.sign_changing.contains(2));
    }

    #[test]
    fn mode_set_materialization() {
        assert_eq!(ModeSet::AllFrom(3).materialize(6), vec![3, 4, 5, 6]);
        assert_eq!(ModeSet::Range(2, 4).materialize(64), vec![2, 3, 4]);
        assert_eq!(ModeSet::Empty.materialize(64), Vec::<u32>::new());
        assert!(ModeSet::AllFrom(1).contains(1000));
        assert!(!ModeSet::Range(2, 5).contains(6));
    }

    #[test]
    fn solve_sign_changing_mode() {
        let p = params(-1, 3.0, 1.0);
        let m = solve_mode(&p, 2, ModeKind::SignChanging).unwrap();
        assert!(m.period_error <= 1e-10);
        assert!(m.launch.x == 0.0 && m.launch.y > 0.0);
        let samples = sample_w(&m, 2048);
        let max_w = samples.iter().fold(0.0_f64, |a, s| a.max(s.1.abs()));
        assert_eq!(count_zeros(&samples, 1e-7 * max_w), 4);
        // periodic wrap
        let wrap = (samples[0].1 - samples[samples.len() - 1].1).abs();
        assert!(wrap <= 1e-9, "wrap error {wrap:e}");
    }

    #[test]
    fn refuses_unadmitted_mode() {
        let p = params(1, 3.0, 4.0);
        assert!(matches!(
            solve_mode(&p, 3, ModeKind::SignChanging),
            Err(ModeError::NoSuchMode { .. })
        ));
    }

    #[test]
    fn solve_positive_mode() {
        let p = params(1, 0.5, 36.0);
        let m = solve_mode(&p, 4, ModeKind::Positive).unwrap();
        assert!(m.period_error <= 1e-10);
        assert!(m.launch.x > 0.0 && m.launch.y == 0.0);
        let samples = sample_w(&m, 2048);
        let min_w = samples.iter().fold(f64::INFINITY, |a, s| a.min(s.1));
        assert!(min_w > 0.0);
        assert_eq!(count_zeros(&samples, 0.0), 0);
        // canonical phase: starts at the minimum
        assert!((samples[0].1 - min_w).abs() <= 1e-6 * min_w);
    }

    #[test]
    fn solve_nonnegative_mode() {
        let p = params(1, 0.5, 36.0);
        let m = solve_mode(&p, 3, ModeKind::Nonnegative).unwrap();
        let samples = sample_w(&m, 2048);
        let max_w = samples.iter().fold(0.0_f64, |a, s| a.max(s.1));
        assert!(samples.iter().all(|s| s.1 >= 0.0));
        assert_eq!(count_zeros(&samples, 1e-6 * max_w), 3);
    }

    #[test]
    fn least_period_shift_invariance() {
        let p = params(-1, 3.0, 1.0);
        let m = solve_mode(&p, 2, ModeKind::SignChanging).unwrap();
        let n = 2048;
        let samples = sample_w(&m, n);
        let shift = n / 2; // shift by 2 pi / k = pi
        let mut worst = 0.0_f64;
        for j in 0..n {
            let diff = (samples[j].1 - samples[(j + shift) % n].1).abs();
            worst = worst.max(diff);
        }
        assert!(worst <= 1e-8, "least-period shift mismatch {worst:e}");
    }

    #[test]
    fn residual_zero_for_equilibria() {
        let p = params(1, 3.0, 4.0);
        let n = 256;
        let flat: Vec<(f64, f64)> = (0..n)
            .map(|j| (2.0 * PI * j as f64 / n as f64, 0.0))
            .collect();
        assert_eq!(ode_residual(&p, &flat), 0.0);

        let c = 2.0; // mu^(1/(q-1))
        let cst: Vec<(f64, f64)> = (0..n)
            .map(|j| (2.0 * PI * j as f64 / n as f64, c))
            .collect();
        assert!(ode_residual(&p, &cst) < 1e-12);
    }

    #[test]
    fn residual_second_order_convergence() {
        let p = params(-1, 3.0, 1.0);
        let m = solve_mode(&p, 2, ModeKind::SignChanging).unwrap();
        let r1 = ode_residual(&p, &sample_w(&m, 512));
        let r2 = ode_residual(&p, &sample_w(&m, 1024));
        let ratio = r1 / r2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_counting_handles_touches() {
        // |sin| has touches at 0 and pi: two zeros, no sign change
        let n = 512;
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                (t, t.sin().abs())
            })
            .collect();
        assert_eq!(count_zeros(&samples, 1e-8), 2);

        // sin has crossings at 0 and pi
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                (t, t.sin())
            })
            .collect();
        assert_eq!(count_zeros(&samples, 1e-8), 2);
    }
}
