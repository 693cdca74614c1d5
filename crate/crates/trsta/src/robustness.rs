//! Fidelity of the compressed passage under systematic control errors:
//! amplitude miscalibration Ω₀ → Ω₀(1+ε) and chirp miscalibration
//! β² → β²(1+δ), swept over grids of error fractions and contraction
//! parameters, with the square π-pulse closed form as a baseline.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagate::{evolve, PureState2, TimeGrid, DEFAULT_STEPS};
use crate::protocol::{AeParams, TrDrive};

/// Which control parameter the systematic error perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Ω₀ → Ω₀(1+ε)
    RabiError,
    /// β² → β²(1+δ)
    DetuningError,
}

impl SweepKind {
    pub fn label(&self) -> &'static str {
        match self {
            SweepKind::RabiError => "rabi_error",
            SweepKind::DetuningError => "detuning_error",
        }
    }
}

/// A grid of error fractions crossed with contraction parameters.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub values: Vec<f64>,
    pub a_values: Vec<f64>,
    pub base: AeParams,
    pub steps: usize,
}

impl SweepSpec {
    pub fn new(kind: SweepKind, values: Vec<f64>, a_values: Vec<f64>, base: AeParams) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one error value".into()));
        }
        if a_values.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one contraction parameter".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > -1.0)) {
            return Err(Error::InvalidParameter(format!(
                "error fractions must be finite and > -1, got {v}"
            )));
        }
        if let Some(a) = a_values.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "contraction parameters must be finite and > 0, got {a}"
            )));
        }
        Ok(Self {
            kind,
            values,
            a_values,
            base,
            steps: DEFAULT_STEPS,
        })
    }

    /// Default grid matching the error band the protocol is judged over:
    /// 41 uniform points on [−0.2, 0.2].
    pub fn default_values() -> Vec<f64> {
        uniform_grid(-0.2, 0.2, 41)
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }
}

/// Uniform grid with exact endpoints.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// One fidelity evaluation of the sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub error_value: f64,
    pub fidelity: f64,
}

/// All rows of a sweep, ordered by (a, error value) regardless of how the
/// evaluations were scheduled.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn min_fidelity(&self) -> f64 {
        self.rows.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min)
    }

    /// Largest spread of fidelity across contraction parameters at any
    /// shared error value.
    pub fn max_spread_across_a(&self) -> f64 {
        let mut spread: f64 = 0.0;
        let mut by_error: std::collections::BTreeMap<u64, (f64, f64)> = Default::default();
        for r in &self.rows {
            let key = r.error_value.to_bits();
            let e = by_error.entry(key).or_insert((f64::INFINITY, f64::NEG_INFINITY));
            e.0 = e.0.min(r.fidelity);
            e.1 = e.1.max(r.fidelity);
        }
        for (lo, hi) in by_error.values() {
            spread = spread.max(hi - lo);
        }
        spread
    }
}

/// Final |2⟩ population after driving |1⟩ with the compressed protocol whose
/// amplitude and chirp carry the given systematic errors.
pub fn fidelity(params: &AeParams, a: f64, eps: f64, delta_err: f64, steps: usize) -> Result<f64> {
    let perturbed = params.with_rabi_error(eps)?.with_chirp_error(delta_err)?;
    let drive = TrDrive::with_contraction(perturbed, a)?;
    let grid = TimeGrid::new(0.0, drive.duration(), steps)?;
    let u = evolve(&drive, &grid)?;
    let (_, p2) = u.apply(&PureState2::basis_1()).populations();
    Ok(p2)
}

/// Evaluate the whole sweep. Points run in parallel; failures are collected
/// with their (a, error) coordinates.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let points: Vec<(f64, f64)> = spec
        .a_values
        .iter()
        .flat_map(|&a| spec.values.iter().map(move |&v| (a, v)))
        .collect();

    let evaluated: Vec<Result<SweepRow>> = points
        .par_iter()
        .map(|&(a, v)| {
            let (eps, delta) = match spec.kind {
                SweepKind::RabiError => (v, 0.0),
                SweepKind::DetuningError => (0.0, v),
            };
            fidelity(&spec.base, a, eps, delta, spec.steps).map(|f| SweepRow {
                a,
                error_value: v,
                fidelity: f,
            })
        })
        .collect();

    let mut rows = Vec::with_capacity(evaluated.len());
    for (idx, r) in evaluated.into_iter().enumerate() {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                let (a, v) = points[idx];
                return Err(Error::InvalidParameter(format!(
                    "sweep point a={a}, error={v} failed: {e}"
                )));
            }
        }
    }
    Ok(SweepResult { kind: spec.kind, rows })
}

/// Fidelity of a resonant square π pulse under the same amplitude error:
/// sin²[(1+ε)·π/2].
pub fn pi_pulse_fidelity(eps: f64) -> f64 {
    ((1.0 + eps) * std::f64::consts::FRAC_PI_2).sin().powi(2)
}
