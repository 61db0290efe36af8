use thiserror::Error;

/// Errors produced by solvers, oracles, and training.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    /// Non-finite (or absurdly large) state detected after a step.
    #[error("solution blew up at step {step}")]
    Blowup { step: usize },

    /// Inverse transform input failed the Hermitian-symmetry check.
    #[error("spectrum is not Hermitian: relative imaginary residue {residue:e}")]
    NonHermitianInput { residue: f64 },

    /// Characteristics crossed; the implicit relation has no bracketed root.
    #[error("no root bracket at x={x}, t={t}: characteristics crossed")]
    NoRoot { x: f64, t: f64 },

    /// Trajectories of different lengths were compared.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Incompatible network/field shapes.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Training produced only blowup-sentinel losses for a whole epoch.
    #[error("training diverged: {0}")]
    Diverged(String),
}
