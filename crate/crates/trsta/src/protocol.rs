//! The driven two-level system: hyperbolic-secant Rabi pulse with a tanh
//! detuning chirp (the Allen-Eberly passage), its instantaneous eigensystem,
//! and the compressed drive obtained by applying a [`RescaleMap`] to it.
//!
//! Units are natural: ħ = 1, times in units of t₀, frequencies in 1/t₀.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::mat2::{Mat2, Vec2};
use crate::rescale::RescaleMap;

/// Parameters of the Allen-Eberly passage. The protocol window is
/// [0, 8·t₀]: the pulse peaks at 4·t₀ and the chirp crosses zero there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeParams {
    omega0: f64,
    beta_chirp: f64,
    t0: f64,
}

impl Default for AeParams {
    /// Ω₀ = 2, β = √2, t₀ = 1: the parameter set used throughout the tests
    /// and as CLI defaults.
    fn default() -> Self {
        Self {
            omega0: 2.0,
            beta_chirp: std::f64::consts::SQRT_2,
            t0: 1.0,
        }
    }
}

impl AeParams {
    pub fn new(omega0: f64, beta_chirp: f64, t0: f64) -> Result<Self> {
        for (name, v) in [("omega0", omega0), ("beta_chirp", beta_chirp), ("t0", t0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(Self {
            omega0,
            beta_chirp,
            t0,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn beta_chirp(&self) -> f64 {
        self.beta_chirp
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Total protocol duration, 8·t₀.
    pub fn total_duration(&self) -> f64 {
        8.0 * self.t0
    }

    /// Systematic amplitude error: Ω₀ → Ω₀(1+ε).
    pub fn with_rabi_error(&self, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "rabi error fraction must be finite and > -1, got {eps}"
            )));
        }
        Self::new(self.omega0 * (1.0 + eps), self.beta_chirp, self.t0)
    }

    /// Systematic chirp error: β² → β²(1+δ).
    pub fn with_chirp_error(&self, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "chirp error fraction must be finite and > -1, got {delta}"
            )));
        }
        Self::new(
            self.omega0,
            self.beta_chirp * (1.0 + delta).sqrt(),
            self.t0,
        )
    }

    fn check_window(&self, t: f64) -> Result<()> {
        let hi = self.total_duration();
        if !(0.0..=hi).contains(&t) {
            return Err(Error::OutOfDomain {
                name: "t",
                value: t,
                lo: 0.0,
                hi,
            });
        }
        Ok(())
    }

    /// Dimensionless pulse argument π(t − 4t₀)/(2t₀).
    #[inline]
    fn pulse_phase(&self, t: f64) -> f64 {
        PI * (t - 4.0 * self.t0) / (2.0 * self.t0)
    }

    /// d/dt of the pulse argument, π/(2t₀).
    #[inline]
    fn pulse_phase_rate(&self) -> f64 {
        PI / (2.0 * self.t0)
    }

    /// Detuning amplitude 2β²t₀/π.
    #[inline]
    fn chirp_amplitude(&self) -> f64 {
        2.0 * self.beta_chirp * self.beta_chirp * self.t0 / PI
    }

    /// Rabi frequency Ω₀·sech[π(t−4t₀)/(2t₀)].
    pub fn rabi(&self, t: f64) -> Result<f64> {
        self.check_window(t)?;
        Ok(self.omega0 * sech(self.pulse_phase(t)))
    }

    /// Detuning (2β²t₀/π)·tanh[π(t−4t₀)/(2t₀)].
    pub fn detuning(&self, t: f64) -> Result<f64> {
        self.check_window(t)?;
        Ok(self.chirp_amplitude() * self.pulse_phase(t).tanh())
    }

    /// Analytic dΩ_R/dt.
    pub fn rabi_rate(&self, t: f64) -> Result<f64> {
        self.check_window(t)?;
        let u = self.pulse_phase(t);
        Ok(-self.omega0 * self.pulse_phase_rate() * sech(u) * u.tanh())
    }

    /// Analytic dΔ/dt.
    pub fn detuning_rate(&self, t: f64) -> Result<f64> {
        self.check_window(t)?;
        let s = sech(self.pulse_phase(t));
        Ok(self.chirp_amplitude() * self.pulse_phase_rate() * s * s)
    }

    /// Populations an ideally adiabatic evolution would show at time t when
    /// started in the lower-energy eigenstate: (sin²(θ/2), cos²(θ/2)).
    /// The pair sums to one exactly.
    pub fn adiabatic_populations(&self, t: f64) -> Result<(f64, f64)> {
        let sample = DriveSample::on_resonance_phase(self.rabi(t)?, self.detuning(t)?);
        let eig = eigensystem(&sample)?;
        let p1 = (0.5 * eig.theta).sin().powi(2);
        Ok((p1, 1.0 - p1))
    }

    /// First-order adiabaticity parameter |Ω_R·Δ̇ − Ω̇_R·Δ| / Ω³, built from
    /// the analytic drive rates. Values well below one indicate the state
    /// tracks the instantaneous eigenbasis.
    pub fn adiabaticity_metric(&self, t: f64) -> Result<f64> {
        adiabaticity_from(
            self.rabi(t)?,
            self.detuning(t)?,
            self.rabi_rate(t)?,
            self.detuning_rate(t)?,
        )
    }
}

#[inline]
fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn adiabaticity_from(rabi: f64, detuning: f64, rabi_rate: f64, detuning_rate: f64) -> Result<f64> {
    let omega = rabi.hypot(detuning);
    if omega == 0.0 {
        return Err(Error::DegenerateHamiltonian);
    }
    Ok((rabi * detuning_rate - rabi_rate * detuning).abs() / omega.powi(3))
}

/// Instantaneous drive values: Rabi frequency, detuning, and drive phase φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSample {
    pub rabi: f64,
    pub detuning: f64,
    pub phase: f64,
}

impl DriveSample {
    pub fn new(rabi: f64, detuning: f64, phase: f64) -> Self {
        Self {
            rabi,
            detuning,
            phase,
        }
    }

    /// φ = 0 sample, the convention used by both protocols here.
    pub fn on_resonance_phase(rabi: f64, detuning: f64) -> Self {
        Self::new(rabi, detuning, 0.0)
    }
}

/// (1/2)·[[Δ, Ω_R e^{iφ}], [Ω_R e^{−iφ}, −Δ]] — Hermitian and traceless by
/// construction (ħ = 1).
pub fn hamiltonian(s: &DriveSample) -> Mat2 {
    let off = C64::from_polar(0.5 * s.rabi, s.phase);
    Mat2::new(
        C64::new(0.5 * s.detuning, 0.0),
        off,
        off.conj(),
        C64::new(-0.5 * s.detuning, 0.0),
    )
}

/// Instantaneous eigensystem of [`hamiltonian`].
///
/// `theta = arccos(Δ/Ω)` is the mixing angle and `omega_gen = √(Δ²+Ω_R²)`
/// the generalized Rabi frequency. `n_plus` spans the +Ω/2 level and
/// `n_minus` the −Ω/2 level:
///
///   n₊ = (cos(θ/2), e^{−iφ} sin(θ/2)),  n₋ = (−e^{iφ} sin(θ/2), cos(θ/2)).
///
/// At θ → π (large negative detuning) the lower level approaches |1⟩, which
/// is where the passage protocols start.
#[derive(Debug, Clone, Copy)]
pub struct Eigensystem2 {
    pub theta: f64,
    pub omega_gen: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub n_plus: Vec2,
    pub n_minus: Vec2,
}

/// Closed-form eigensystem of the two-level Hamiltonian for a drive sample.
/// Fails with [`Error::DegenerateHamiltonian`] when Ω = 0.
pub fn eigensystem(s: &DriveSample) -> Result<Eigensystem2> {
    let omega = s.rabi.hypot(s.detuning);
    if omega == 0.0 {
        return Err(Error::DegenerateHamiltonian);
    }
    let cos_theta = (s.detuning / omega).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();
    // half-angle forms stay accurate at both poles
    let cos_half = (0.5 * (1.0 + cos_theta)).sqrt();
    let sin_half = (0.5 * (1.0 - cos_theta)).sqrt();
    let phase = C64::from_polar(1.0, s.phase);
    Ok(Eigensystem2 {
        theta,
        omega_gen: omega,
        e_plus: 0.5 * omega,
        e_minus: -0.5 * omega,
        n_plus: [C64::new(cos_half, 0.0), phase.conj() * sin_half],
        n_minus: [-phase * sin_half, C64::new(cos_half, 0.0)],
    })
}

/// A control waveform the propagator can sample on a time window.
pub trait Drive {
    /// Closed interval on which `sample` is defined.
    fn window(&self) -> (f64, f64);

    fn sample(&self, t: f64) -> Result<DriveSample>;
}

/// The Allen-Eberly reference drive on [0, 8t₀], with φ = 0.
#[derive(Debug, Clone, Copy)]
pub struct AeDrive {
    params: AeParams,
}

impl AeDrive {
    pub fn new(params: AeParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &AeParams {
        &self.params
    }
}

impl Drive for AeDrive {
    fn window(&self) -> (f64, f64) {
        (0.0, self.params.total_duration())
    }

    fn sample(&self, t: f64) -> Result<DriveSample> {
        Ok(DriveSample::on_resonance_phase(
            self.params.rabi(t)?,
            self.params.detuning(t)?,
        ))
    }
}

/// The compressed drive on [0, t_f/a]: the closed-form waveforms whose
/// generator reproduces the reference evolution in an `a`-times shorter
/// window. Both waveforms carry the slope envelope a − (a−1)cos(2πaτ/t_f)
/// and evaluate the reference pulse shapes at the remapped time, so they
/// match the reference drive exactly at both window ends.
#[derive(Debug, Clone, Copy)]
pub struct TrDrive {
    params: AeParams,
    map: RescaleMap,
}

impl TrDrive {
    /// The map's reference duration must equal the protocol duration 8·t₀.
    pub fn new(params: AeParams, map: RescaleMap) -> Result<Self> {
        if map.reference_duration() != params.total_duration() {
            return Err(Error::InvalidParameter(format!(
                "rescale map spans t_f = {} but the protocol window is {}",
                map.reference_duration(),
                params.total_duration()
            )));
        }
        Ok(Self { params, map })
    }

    /// Convenience constructor from the contraction parameter alone.
    pub fn with_contraction(params: AeParams, a: f64) -> Result<Self> {
        let map = RescaleMap::new(a, params.total_duration())?;
        Self::new(params, map)
    }

    pub fn params(&self) -> &AeParams {
        &self.params
    }

    pub fn map(&self) -> &RescaleMap {
        &self.map
    }

    /// Protocol duration t_f/a.
    pub fn duration(&self) -> f64 {
        self.map.duration()
    }

    fn check_window(&self, tau: f64) -> Result<()> {
        let hi = self.duration();
        if !(0.0..=hi).contains(&tau) {
            return Err(Error::OutOfDomain {
                name: "tau",
                value: tau,
                lo: 0.0,
                hi,
            });
        }
        Ok(())
    }

    /// Slope envelope a − (a−1)·cos(2πaτ/t_f); equals one at both ends and
    /// peaks at 2a−1 mid-window.
    #[inline]
    fn envelope(&self, tau: f64) -> f64 {
        let a = self.map.contraction();
        let t_f = self.map.reference_duration();
        a - (a - 1.0) * (2.0 * PI * a * tau / t_f).cos()
    }

    /// The remapped time a·τ − ((a−1)/(2πa))·t_f·sin(2πaτ/t_f), written out
    /// so the waveform is a single self-contained expression.
    #[inline]
    fn remapped(&self, tau: f64) -> f64 {
        let a = self.map.contraction();
        let t_f = self.map.reference_duration();
        a * tau - (a - 1.0) / (2.0 * PI * a) * t_f * (2.0 * PI * a * tau / t_f).sin()
    }

    /// Compressed Rabi waveform
    /// Ω₀·[a − (a−1)cos(2πaτ/t_f)]·sech{π(a·τ − ((a−1)/(2πa))·t_f·sin(2πaτ/t_f) − 4t₀)/(2t₀)}.
    pub fn rabi(&self, tau: f64) -> Result<f64> {
        self.check_window(tau)?;
        let shape = sech(self.params.pulse_phase(self.remapped(tau)));
        Ok(self.params.omega0 * (self.envelope(tau) * shape))
    }

    /// Compressed detuning waveform, same envelope with the tanh shape.
    pub fn detuning(&self, tau: f64) -> Result<f64> {
        self.check_window(tau)?;
        let shape = self.params.pulse_phase(self.remapped(tau)).tanh();
        Ok(self.params.chirp_amplitude() * (self.envelope(tau) * shape))
    }

    /// Largest Rabi amplitude over the window, (2a−1)·Ω₀, reached at
    /// τ = t_f/(2a) where both the envelope and the pulse shape peak.
    pub fn peak_rabi(&self) -> f64 {
        (2.0 * self.map.contraction() - 1.0) * self.params.omega0
    }

    /// dΩ̃_R/dτ by the chain rule on the remapped time.
    pub fn rabi_rate(&self, tau: f64) -> Result<f64> {
        self.check_window(tau)?;
        let t = self.remapped_clamped(tau)?;
        Ok(self.map.second_derivative(tau)? * self.params.rabi(t)?
            + self.map.derivative(tau)?.powi(2) * self.params.rabi_rate(t)?)
    }

    /// dΔ̃/dτ by the chain rule on the remapped time.
    pub fn detuning_rate(&self, tau: f64) -> Result<f64> {
        self.check_window(tau)?;
        let t = self.remapped_clamped(tau)?;
        Ok(self.map.second_derivative(tau)? * self.params.detuning(t)?
            + self.map.derivative(tau)?.powi(2) * self.params.detuning_rate(t)?)
    }

    /// Remapped time pinned to the reference window; f(τ) can escape it by
    /// an ulp at the far end.
    fn remapped_clamped(&self, tau: f64) -> Result<f64> {
        Ok(self.map.eval(tau)?.clamp(0.0, self.params.total_duration()))
    }

    /// Adiabaticity parameter of the compressed drive at τ.
    pub fn adiabaticity_metric(&self, tau: f64) -> Result<f64> {
        adiabaticity_from(
            self.rabi(tau)?,
            self.detuning(tau)?,
            self.rabi_rate(tau)?,
            self.detuning_rate(tau)?,
        )
    }
}

impl Drive for TrDrive {
    fn window(&self) -> (f64, f64) {
        (0.0, self.duration())
    }

    fn sample(&self, tau: f64) -> Result<DriveSample> {
        Ok(DriveSample::on_resonance_phase(
            self.rabi(tau)?,
            self.detuning(tau)?,
        ))
    }
}

/// Time-independent drive, handy for resonant square pulses and tests.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDrive {
    pub sample: DriveSample,
}

impl ConstantDrive {
    pub fn new(sample: DriveSample) -> Self {
        Self { sample }
    }
}

impl Drive for ConstantDrive {
    fn window(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn sample(&self, _t: f64) -> Result<DriveSample> {
        Ok(self.sample)
    }
}
