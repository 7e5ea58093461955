use thiserror::Error;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input data.
    Input,
    /// A numerical routine failed or produced an inconsistent result.
    Numerical,
    /// Well-formed input that violates a mathematical precondition.
    Precondition,
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("non-finite entry in {0}")]
    NonFinite(String),

    #[error("not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("operators do not commute (residual {0:.3e})")]
    NotCommuting(f64),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("basis closure exceeded {0} elements")]
    DimensionOverflow(usize),

    #[error("structure constant residual {0:.3e}")]
    StructureResidual(f64),

    #[error("map is not completely positive (min Gram eigenvalue {0:.3e})")]
    NotCp(f64),

    #[error("map is not unital (residual {0:.3e})")]
    NotUnital(f64),

    #[error("dilation is not a homomorphism (residual {0:.3e}); rank cutoff too loose")]
    HomomorphismResidual(f64),

    #[error("algebra is not the full matrix algebra")]
    NotFullAlgebra,

    #[error("map is not dominated by the base map (min eigenvalue {0:.3e})")]
    NotDominated(f64),

    #[error("operator is not in the commutant (residual {0:.3e})")]
    NotInCommutant(f64),

    #[error("operator spectrum outside [0, 1] (excess {0:.3e})")]
    NotInInterval(f64),

    #[error("dilation is not minimal")]
    NotMinimal,

    #[error("weights sum to {0}, expected 1")]
    WeightSumInvalid(f64),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("sum of the pair is not unital (residual {0:.3e})")]
    SumNotUnital(f64),

    #[error("base dilation does not belong to the barycenter (distance {0:.3e})")]
    BaseMismatch(f64),

    #[error("atom Gram forms do not sum to the barycenter Gram form (residual {0:.3e})")]
    BarycenterMismatch(f64),

    #[error("U_mu is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("measure is not orthogonal (max defect {0:.3e})")]
    NotOrthogonalMeasure(f64),

    #[error("subalgebra is not sub-orthogonal: projection {index} compresses V to a non-scalar (defect {defect:.3e})")]
    NotSubOrthogonal { index: usize, defect: f64 },

    #[error("not a state: {0}")]
    NotState(String),

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("no orthogonal subalgebra found after {0} attempts")]
    NoSubalgebraFound(usize),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            ShapeMismatch(_) | NotSquare(..) | NonFinite(_) | WeightSumInvalid(_)
            | InvalidMeasure(_) | BadParameters(_) | NotFullAlgebra => ErrorKind::Input,
            NumericalFailure(_)
            | DimensionOverflow(_)
            | StructureResidual(_)
            | HomomorphismResidual(_)
            | NoSubalgebraFound(_) => ErrorKind::Numerical,
            NotHermitian(_)
            | NotCommuting(_)
            | NotCp(_)
            | NotUnital(_)
            | NotDominated(_)
            | NotInCommutant(_)
            | NotInInterval(_)
            | NotMinimal
            | SumNotUnital(_)
            | BaseMismatch(_)
            | BarycenterMismatch(_)
            | NotUnitary(_)
            | NotOrthogonalMeasure(_)
            | NotSubOrthogonal { .. }
            | NotState(_) => ErrorKind::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
