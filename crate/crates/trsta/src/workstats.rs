//! Two-point-measurement work statistics: the system starts in a Gibbs
//! state of the initial Hamiltonian, its energy is measured, a unitary
//! protocol runs, and the final energy is measured. Work is the difference
//! of outcomes. For a two-level system the distribution has exactly four
//! atoms, which doubles as a brute-force oracle for the operator-trace
//! expressions of the characteristic function and the moments.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mat2::{expi_hermitian, inner, outer, C64, HermitianEigen, Mat2, Vec2};
use crate::propagate::{evolve, Propagator2, TimeGrid};
use crate::protocol::{hamiltonian, AeDrive, AeParams, Drive, TrDrive};

/// Largest unitarity defect accepted on propagators entering the TPM.
const UNITARITY_GATE: f64 = 1e-8;

/// Inverse temperature of the pre-measurement thermal state (k_B = 1).
/// β = 0 is the maximally mixed limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalSpec {
    pub beta: f64,
}

impl ThermalSpec {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inverse temperature must be finite and >= 0, got {beta}"
            )));
        }
        Ok(Self { beta })
    }
}

/// Thermal occupation of the two levels of a Hamiltonian, with the
/// eigendata the occupations refer to.
#[derive(Debug, Clone, Copy)]
pub struct GibbsState {
    pub p_plus: f64,
    pub p_minus: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub v_plus: Vec2,
    pub v_minus: Vec2,
}

impl GibbsState {
    /// ρ(0) = p₋|−⟩⟨−| + p₊|+⟩⟨+|.
    pub fn density_matrix(&self) -> Mat2 {
        outer(&self.v_minus, &self.v_minus).scale(C64::new(self.p_minus, 0.0))
            + outer(&self.v_plus, &self.v_plus).scale(C64::new(self.p_plus, 0.0))
    }
}

/// Boltzmann weights e^{−βE}/Z over the eigenlevels of `h_i`. The weights
/// are computed from the level gap alone, so large β cannot overflow.
pub fn gibbs_probabilities(h_i: &Mat2, spec: &ThermalSpec) -> GibbsState {
    let eig = HermitianEigen::new(h_i);
    let gap = eig.values[1] - eig.values[0];
    let w = (-spec.beta * gap).exp();
    let z = 1.0 + w;
    GibbsState {
        p_plus: w / z,
        p_minus: 1.0 / z,
        e_plus: eig.values[1],
        e_minus: eig.values[0],
        v_plus: eig.vectors[1],
        v_minus: eig.vectors[0],
    }
}

fn require_unitary(u: &Propagator2) -> Result<()> {
    let defect = u.unitarity_defect();
    if defect > UNITARITY_GATE {
        return Err(Error::NotUnitary { defect });
    }
    Ok(())
}

/// Jump probabilities |⟨m|U|n⟩|² between the eigenlevels of `h_i` (row
/// index n) and `h_f` (column index m); index 0 is the lower level, 1 the
/// upper. Doubly stochastic for unitary input.
pub fn transition_matrix(u: &Propagator2, h_i: &Mat2, h_f: &Mat2) -> Result<[[f64; 2]; 2]> {
    require_unitary(u)?;
    let ei = HermitianEigen::new(h_i);
    let ef = HermitianEigen::new(h_f);
    let mut p = [[0.0; 2]; 2];
    for (n, row) in p.iter_mut().enumerate() {
        let un = u.u.mul_vec(&ei.vectors[n]);
        for (m, entry) in row.iter_mut().enumerate() {
            *entry = inner(&ef.vectors[m], &un).norm_sqr();
        }
    }
    Ok(p)
}

/// Which eigenlevel a TPM outcome refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Minus,
    Plus,
}

impl Level {
    const BOTH: [Level; 2] = [Level::Minus, Level::Plus];

    fn index(self) -> usize {
        match self {
            Level::Minus => 0,
            Level::Plus => 1,
        }
    }
}

/// One transition n → m with its work value and joint probability.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WorkAtom {
    pub from: Level,
    pub to: Level,
    pub work: f64,
    pub probability: f64,
}

/// The four-atom TPM work distribution of a two-level protocol.
#[derive(Debug, Clone, Serialize)]
pub struct WorkDistribution {
    pub atoms: [WorkAtom; 4],
    /// Eigenvalues of the initial Hamiltonian, ascending.
    pub initial_levels: [f64; 2],
    /// Eigenvalues of the final Hamiltonian, ascending.
    pub final_levels: [f64; 2],
}

impl WorkDistribution {
    pub fn total_probability(&self) -> f64 {
        self.atoms.iter().map(|a| a.probability).sum()
    }

    /// Moments summed directly over the four atoms. This is the brute-force
    /// route; [`moments`] computes the same quantities from operator traces.
    pub fn moments(&self) -> WorkMoments {
        let mean: f64 = self.atoms.iter().map(|a| a.probability * a.work).sum();
        let second: f64 = self.atoms.iter().map(|a| a.probability * a.work * a.work).sum();
        WorkMoments::from_mean_and_second(mean, second)
    }

    /// χ(r) = Σ_k p_k·e^{i r W_k}, the Fourier sum over the atoms.
    pub fn characteristic_sum(&self, r: f64) -> C64 {
        self.atoms
            .iter()
            .map(|a| C64::from_polar(a.probability, r * a.work))
            .sum()
    }
}

/// Mean, raw second moment, variance, and fluctuation ΔW = √variance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WorkMoments {
    pub mean: f64,
    pub second: f64,
    pub variance: f64,
    pub fluctuation: f64,
}

impl WorkMoments {
    fn from_mean_and_second(mean: f64, second: f64) -> Self {
        let variance = second - mean * mean;
        Self {
            mean,
            second,
            variance,
            fluctuation: variance.max(0.0).sqrt(),
        }
    }
}

/// Enumerate the four TPM outcomes: thermal weight on the initial level
/// times the jump probability, with work E_m^f − E_n^i.
pub fn work_distribution(
    u: &Propagator2,
    h_i: &Mat2,
    h_f: &Mat2,
    spec: &ThermalSpec,
) -> Result<WorkDistribution> {
    let gibbs = gibbs_probabilities(h_i, spec);
    let jumps = transition_matrix(u, h_i, h_f)?;
    let e_i = [gibbs.e_minus, gibbs.e_plus];
    let p_i = [gibbs.p_minus, gibbs.p_plus];
    let ef = HermitianEigen::new(h_f);

    let mut atoms = Vec::with_capacity(4);
    for from in Level::BOTH {
        for to in Level::BOTH {
            atoms.push(WorkAtom {
                from,
                to,
                work: ef.values[to.index()] - e_i[from.index()],
                probability: p_i[from.index()] * jumps[from.index()][to.index()],
            });
        }
    }
    Ok(WorkDistribution {
        atoms: atoms.try_into().expect("exactly four atoms"),
        initial_levels: e_i,
        final_levels: ef.values,
    })
}

/// Characteristic function from operator traces:
/// χ(r) = tr{U†·e^{irH_f}·U·e^{−irH_i}·ρ(0)}.
pub fn characteristic_function(
    r: f64,
    u: &Propagator2,
    h_i: &Mat2,
    h_f: &Mat2,
    spec: &ThermalSpec,
) -> Result<C64> {
    require_unitary(u)?;
    let rho = gibbs_probabilities(h_i, spec).density_matrix();
    let phase_f = expi_hermitian(h_f, r);
    let phase_i = expi_hermitian(h_i, -r);
    Ok((u.u.adjoint() * phase_f * u.u * phase_i * rho).trace())
}

fn expectation(op: &Mat2, rho: &Mat2) -> f64 {
    (*op * *rho).trace().re
}

/// Work moments from operator traces: the mean is the Heisenberg-picture
/// energy difference ⟨U†H_fU⟩ − ⟨H_i⟩; the raw second moment carries the
/// cross term −2·tr{U†H_fU·H_i·ρ}; the variance follows as ⟨W²⟩ − ⟨W⟩².
pub fn moments(u: &Propagator2, h_i: &Mat2, h_f: &Mat2, spec: &ThermalSpec) -> Result<WorkMoments> {
    require_unitary(u)?;
    let rho = gibbs_probabilities(h_i, spec).density_matrix();
    let hf_heis = u.u.adjoint() * *h_f * u.u;
    let mean = expectation(&hf_heis, &rho) - expectation(h_i, &rho);
    let second = expectation(&(u.u.adjoint() * *h_f * *h_f * u.u), &rho)
        + expectation(&(*h_i * *h_i), &rho)
        - 2.0 * expectation(&(hf_heis * *h_i), &rho);
    Ok(WorkMoments::from_mean_and_second(mean, second))
}

/// Reference-versus-compressed work statistics for one contraction value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EqualityRow {
    pub a: f64,
    pub beta: f64,
    pub mean_ref: f64,
    pub mean_tr: f64,
    pub fluct_ref: f64,
    pub fluct_tr: f64,
    pub mean_gap: f64,
    pub fluct_gap: f64,
}

/// Rows for every requested contraction value at one temperature.
#[derive(Debug, Clone, Serialize)]
pub struct EqualityReport {
    pub rows: Vec<EqualityRow>,
}

impl EqualityReport {
    pub fn max_gap(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.mean_gap.max(r.fluct_gap))
            .fold(0.0, f64::max)
    }

    pub fn all_within(&self, tol: f64) -> bool {
        self.max_gap() <= tol
    }
}

fn protocol_moments<D: Drive>(drive: &D, steps: usize, spec: &ThermalSpec) -> Result<WorkMoments> {
    let (lo, hi) = drive.window();
    let grid = TimeGrid::new(lo, hi, steps)?;
    let u = evolve(drive, &grid)?;
    let h_i = hamiltonian(&drive.sample(lo)?);
    let h_f = hamiltonian(&drive.sample(hi)?);
    moments(&u, &h_i, &h_f, spec)
}

/// Compare mean work and work fluctuation between the reference protocol
/// and its compressed versions. Both use `steps` integration steps on their
/// own windows; each protocol's endpoint Hamiltonians define its TPM, so
/// the comparison also exercises the endpoint-matching of the drives.
pub fn compare_protocols(
    params: &AeParams,
    a_values: &[f64],
    spec: &ThermalSpec,
    steps: usize,
) -> Result<EqualityReport> {
    let reference = protocol_moments(&AeDrive::new(*params), steps, spec)?;
    let rows: Vec<Result<EqualityRow>> = a_values
        .par_iter()
        .map(|&a| {
            let drive = TrDrive::with_contraction(*params, a)?;
            let tr = protocol_moments(&drive, steps, spec)?;
            Ok(EqualityRow {
                a,
                beta: spec.beta,
                mean_ref: reference.mean,
                mean_tr: tr.mean,
                fluct_ref: reference.fluctuation,
                fluct_tr: tr.fluctuation,
                mean_gap: (tr.mean - reference.mean).abs(),
                fluct_gap: (tr.fluctuation - reference.fluctuation).abs(),
            })
        })
        .collect();
    Ok(EqualityReport {
        rows: rows.into_iter().collect::<Result<Vec<_>>>()?,
    })
}
