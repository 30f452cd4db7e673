use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter violates an operation's precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("particles {first} and {second} overlap: minimum node distance {distance:e} is below the threshold {threshold:e}")]
    Overlap {
        first: usize,
        second: usize,
        distance: f64,
        threshold: f64,
    },

    #[error("eigensolver did not converge for a {size}x{size} matrix (1-norm {norm:e})")]
    EigenNonConvergence { size: usize, norm: f64 },

    /// `(lambda I - K*)` is numerically singular: `lambda` hits the spectrum.
    #[error("near-singular resolvent at lambda = {lambda}: rcond {rcond:e}{}", nearest_note(.nearest_eigenvalue))]
    NearSingular {
        lambda: Complex64,
        rcond: f64,
        nearest_eigenvalue: Option<Complex64>,
    },

    #[error("degenerate contrast: {0}")]
    DegenerateContrast(String),

    /// `lambda` sits on a pole of a closed-form polarization tensor.
    #[error("lambda = {lambda} is a pole of the {tensor} polarization tensor")]
    Pole { lambda: Complex64, tensor: &'static str },

    #[error("evaluation point {index} is inside the exclusion shell: |x - z| = {distance:e} < r_min = {r_min:e}")]
    InsideShell {
        index: usize,
        distance: f64,
        r_min: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

fn nearest_note(eig: &Option<Complex64>) -> String {
    match eig {
        Some(e) => format!(", nearest eigenvalue {e}"),
        None => String::new(),
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
