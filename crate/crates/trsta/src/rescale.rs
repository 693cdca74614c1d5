//! The time-rescaling map t = f(τ) that turns a reference protocol of
//! duration `t_f` into one of duration `t_f / a`, together with its
//! derivative, numerical inverse, and a validator for the four shortcut
//! properties (shared start time, shorter duration, matched initial and
//! final generators).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative tolerance for the numerical inverse of the map.
pub const TOL_ROOT: f64 = 1e-12;

const MAX_BISECTIONS: usize = 200;
const MAX_NEWTON: usize = 60;

/// Smooth monotone map from the compressed time axis [0, t_f/a] onto the
/// reference axis [0, t_f]:
///
///   f(τ) = a·τ − ((a−1)/(2πa))·t_f·sin(2πaτ/t_f)
///
/// Exact properties, for any a > 0: f(0) = 0, f(t_f/a) = t_f,
/// f′(0) = f′(t_f/a) = 1. For a ≥ 1, f′ ∈ [1, 2a−1] so f is strictly
/// increasing and the compressed protocol runs `a` times faster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaleMap {
    a: f64,
    t_f: f64,
}

impl RescaleMap {
    pub fn new(a: f64, t_f: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "contraction parameter a must be finite and > 0, got {a}"
            )));
        }
        if !(t_f.is_finite() && t_f > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "duration t_f must be finite and > 0, got {t_f}"
            )));
        }
        Ok(Self { a, t_f })
    }

    pub fn contraction(&self) -> f64 {
        self.a
    }

    pub fn reference_duration(&self) -> f64 {
        self.t_f
    }

    /// Duration of the rescaled protocol, t_f / a.
    pub fn duration(&self) -> f64 {
        self.t_f / self.a
    }

    fn check_domain(&self, name: &'static str, tau: f64, hi: f64) -> Result<()> {
        if !(0.0..=hi).contains(&tau) || !tau.is_finite() {
            return Err(Error::OutOfDomain {
                name,
                value: tau,
                lo: 0.0,
                hi,
            });
        }
        Ok(())
    }

    /// f(τ) for τ in [0, t_f/a].
    pub fn eval(&self, tau: f64) -> Result<f64> {
        self.check_domain("tau", tau, self.duration())?;
        Ok(self.eval_unchecked(tau))
    }

    fn eval_unchecked(&self, tau: f64) -> f64 {
        let (a, t_f) = (self.a, self.t_f);
        let phase = 2.0 * PI * a * tau / t_f;
        a * tau - (a - 1.0) / (2.0 * PI * a) * t_f * phase.sin()
    }

    /// f′(τ) = a − (a−1)·cos(2πaτ/t_f), in [1, 2a−1] for a ≥ 1.
    pub fn derivative(&self, tau: f64) -> Result<f64> {
        self.check_domain("tau", tau, self.duration())?;
        Ok(self.derivative_unchecked(tau))
    }

    fn derivative_unchecked(&self, tau: f64) -> f64 {
        let (a, t_f) = (self.a, self.t_f);
        a - (a - 1.0) * (2.0 * PI * a * tau / t_f).cos()
    }

    /// f″(τ), used by the drive-rate chain rule.
    pub fn second_derivative(&self, tau: f64) -> Result<f64> {
        self.check_domain("tau", tau, self.duration())?;
        let (a, t_f) = (self.a, self.t_f);
        let w = 2.0 * PI * a / t_f;
        Ok((a - 1.0) * w * (w * tau).sin())
    }

    /// Numerical inverse: the τ in [0, t_f/a] with |f(τ) − t| ≤ tol·t_f.
    ///
    /// Bracketed bisection down to 1e-6 relative, then Newton polish; the
    /// Newton step is safe because f′ ≥ 1 when a ≥ 1.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        self.check_domain("t", t, self.t_f)?;
        if self.a < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "inverse requires a >= 1 for guaranteed monotonicity, got a = {}",
                self.a
            )));
        }
        // endpoints are exact analytically; return them without iterating
        if t == 0.0 {
            return Ok(0.0);
        }
        if t == self.t_f {
            return Ok(self.duration());
        }

        let (mut lo, mut hi) = (0.0_f64, self.duration());
        for _ in 0..MAX_BISECTIONS {
            if (hi - lo) <= 1e-6 * self.duration() {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.eval_unchecked(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }

        let mut tau = 0.5 * (lo + hi);
        let mut residual = self.eval_unchecked(tau) - t;
        for _ in 0..MAX_NEWTON {
            if residual.abs() <= TOL_ROOT * self.t_f {
                return Ok(tau);
            }
            tau = (tau - residual / self.derivative_unchecked(tau)).clamp(0.0, self.duration());
            residual = self.eval_unchecked(tau) - t;
        }
        if residual.abs() <= TOL_ROOT * self.t_f {
            Ok(tau)
        } else {
            Err(Error::NoConvergence {
                residual: residual.abs(),
                iterations: MAX_BISECTIONS + MAX_NEWTON,
            })
        }
    }

    /// Check the shortcut properties and report residuals.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let dur = self.duration();
        let mut checks = vec![
            PropertyCheck::new("start time preserved: f(0) = 0", self.eval_unchecked(0.0).abs(), tol),
            PropertyCheck::new(
                "reference endpoint reached: f(t_f/a) = t_f",
                (self.eval_unchecked(dur) - self.t_f).abs(),
                tol,
            ),
            PropertyCheck::new(
                "initial generator matched: f'(0) = 1",
                (self.derivative_unchecked(0.0) - 1.0).abs(),
                tol,
            ),
            PropertyCheck::new(
                "final generator matched: f'(t_f/a) = 1",
                (self.derivative_unchecked(dur) - 1.0).abs(),
                tol,
            ),
        ];
        if self.a >= 1.0 {
            let min_slope = (0..=VALIDATE_GRID)
                .map(|k| self.derivative_unchecked(dur * k as f64 / VALIDATE_GRID as f64))
                .fold(f64::INFINITY, f64::min);
            checks.push(PropertyCheck::new(
                "monotone: min f' over grid >= 1",
                (1.0 - min_slope).max(0.0),
                tol,
            ));
            // exercise the numerical inverse end to end
            let inv_residual = match self.inverse(self.t_f / 3.0) {
                Ok(tau) => (self.eval_unchecked(tau) - self.t_f / 3.0).abs() / self.t_f,
                Err(_) => f64::INFINITY,
            };
            checks.push(PropertyCheck::new(
                "inverse round trip at t_f/3",
                inv_residual,
                TOL_ROOT.max(tol),
            ));
        }
        ValidationReport {
            a: self.a,
            t_f: self.t_f,
            speedup: Speedup::classify(self.a),
            checks,
        }
    }
}

const VALIDATE_GRID: usize = 4096;

/// Whether the map actually shortens the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Speedup {
    /// a > 1: rescaled protocol is faster than the reference.
    Faster,
    /// a = 1: the map is the identity.
    Identity,
    /// 0 < a < 1: rescaled protocol is slower than the reference.
    Slower,
}

impl Speedup {
    fn classify(a: f64) -> Self {
        if a > 1.0 {
            Speedup::Faster
        } else if a == 1.0 {
            Speedup::Identity
        } else {
            Speedup::Slower
        }
    }
}

/// One validated property with its residual.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl PropertyCheck {
    fn new(name: &'static str, residual: f64, tolerance: f64) -> Self {
        Self {
            name,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

/// Outcome of [`RescaleMap::validate`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub a: f64,
    pub t_f: f64,
    pub speedup: Speedup,
    pub checks: Vec<PropertyCheck>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(a: f64) -> RescaleMap {
        RescaleMap::new(a, 8.0).unwrap()
    }

    #[test]
    fn boundary_identities_are_exact() {
        for a in [1.0, 2.0, 5.0, 10.0, 0.5, 3.7] {
            let m = map(a);
            assert_eq!(m.eval(0.0).unwrap(), 0.0);
            assert_eq!(m.derivative(0.0).unwrap(), 1.0);
            // sin(2π)/cos(2π) are not exactly 0/1 in floats, so allow an ulp-scale slack
            assert!((m.eval(m.duration()).unwrap() - 8.0).abs() < 1e-13);
            assert!((m.derivative(m.duration()).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn interior_values_a2() {
        let m = map(2.0);
        // sin(π) kills the correction at the window midpoint
        assert!((m.eval(2.0).unwrap() - 4.0).abs() < 1e-14);
        // cos(π) = −1 puts the slope at its ceiling 2a−1
        assert!((m.derivative(2.0).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_stays_in_band() {
        for a in [1.0, 2.0, 5.0, 10.0] {
            let m = map(a);
            for k in 0..=1000 {
                let tau = m.duration() * k as f64 / 1000.0;
                let d = m.derivative(tau).unwrap();
                assert!(d >= 1.0 - 1e-12 && d <= 2.0 * a - 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn domain_errors() {
        let m = map(2.0);
        assert!(matches!(m.eval(-0.1), Err(Error::OutOfDomain { .. })));
        assert!(matches!(m.eval(4.0 + 1e-9), Err(Error::OutOfDomain { .. })));
        assert!(matches!(m.derivative(5.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(m.inverse(8.1), Err(Error::OutOfDomain { .. })));
        // spec example sits outside the a=10 window [0, 0.8]
        assert!(matches!(map(10.0).derivative(4.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn inverse_trivial_points() {
        let m = map(2.0);
        assert_eq!(m.inverse(0.0).unwrap(), 0.0);
        assert_eq!(m.inverse(8.0).unwrap(), 4.0);
        assert!((m.inverse(4.0).unwrap() - 2.0).abs() < 1e-11);
    }

    #[test]
    fn inverse_round_trip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for &a in &[1.0, 2.0, 5.0, 10.0] {
            let m = map(a);
            for _ in 0..250 {
                let tau: f64 = rng.random_range(0.0..m.duration());
                let t = m.eval(tau).unwrap();
                let back = m.inverse(t).unwrap();
                assert!(
                    (back - tau).abs() <= 10.0 * TOL_ROOT * m.reference_duration(),
                    "round trip failed: a={a} tau={tau} back={back}"
                );
            }
        }
    }

    #[test]
    fn strictly_increasing_for_a_ge_1() {
        for a in [1.0, 2.0, 10.0] {
            let m = map(a);
            let mut prev = -1.0;
            for k in 0..=4000 {
                let v = m.eval(m.duration() * k as f64 / 4000.0).unwrap();
                assert!(v > prev, "not increasing at k={k} for a={a}");
                prev = v;
            }
        }
    }

    #[test]
    fn validation_reports() {
        let r = map(2.0).validate(1e-12);
        assert!(r.pass(), "{r:?}");
        assert_eq!(r.speedup, Speedup::Faster);

        let r = map(1.0).validate(1e-12);
        assert!(r.pass());
        assert_eq!(r.speedup, Speedup::Identity);
        assert_eq!(map(1.0).inverse(8.0).unwrap(), 8.0);

        // a < 1 still satisfies the boundary identities but is not a shortcut
        let r = map(0.5).validate(1e-12);
        assert_eq!(r.speedup, Speedup::Slower);
        assert!(r.checks.iter().all(|c| c.pass));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RescaleMap::new(0.0, 8.0).is_err());
        assert!(RescaleMap::new(-1.0, 8.0).is_err());
        assert!(RescaleMap::new(2.0, 0.0).is_err());
        assert!(RescaleMap::new(f64::NAN, 8.0).is_err());
    }
}
