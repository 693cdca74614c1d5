use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A time argument fell outside the window a protocol is defined on.
    #[error("{name} = {value} outside the protocol window [{lo}, {hi}]")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A root solve failed to reach its tolerance within the iteration budget.
    #[error("root solve did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    /// The generalized Rabi frequency vanished, so the eigensystem is undefined.
    #[error("degenerate Hamiltonian: generalized Rabi frequency is zero")]
    DegenerateHamiltonian,

    /// An operator expected to be unitary was not, within tolerance.
    #[error("matrix is not unitary: defect {defect:.3e}")]
    NotUnitary { defect: f64 },

    /// A constructor argument violated a structural requirement.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
