use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyLayout,
    DuplicateRegister(String),
    DimensionTooSmall { register: String, dimension: usize },
    Capacity { requested: Option<usize>, cap: usize },
    UnknownRegister(String),
    MissingRegister(String),
    LabelCount { expected: usize, found: usize },
    LabelOutOfRange { register: String, label: usize, dimension: usize },
    LayoutMismatch,
    DimensionMismatch { expected: usize, found: usize },
    DegenerateState { norm: f64 },
    EmptySuperposition,
    ObserverTooSmall { register: String, dimension: usize, required: usize },
    InvalidClassicalConfig(String),
    IdenticalSpan,
    InvalidSpan(String),
    InvalidPerturbation { leakage: f64 },
    NonHermitian { residual: f64 },
    InvalidDensityMatrix(String),
    OverlappingRegisters(String),
    EmptyRegisterSet,
    SubsystemTooLarge { dimension: usize, cap: usize },
    InvalidSpec(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyLayout => write!(f, "layout needs at least one register"),
            Error::DuplicateRegister(name) => write!(f, "duplicate register name `{name}`"),
            Error::DimensionTooSmall { register, dimension } => {
                write!(f, "register `{register}` has dimension {dimension}, need at least 2")
            }
            Error::Capacity { requested: Some(n), cap } => {
                write!(f, "total dimension {n} exceeds the cap of {cap}")
            }
            Error::Capacity { requested: None, cap } => {
                write!(f, "total dimension overflows (cap is {cap})")
            }
            Error::UnknownRegister(name) => write!(f, "no register named `{name}`"),
            Error::MissingRegister(what) => write!(f, "layout is missing {what}"),
            Error::LabelCount { expected, found } => {
                write!(f, "expected {expected} labels, got {found}")
            }
            Error::LabelOutOfRange { register, label, dimension } => write!(
                f,
                "label {label} out of range for register `{register}` of dimension {dimension}"
            ),
            Error::LayoutMismatch => write!(f, "states belong to different layouts"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::DegenerateState { norm } => {
                write!(f, "cannot normalize a state of norm {norm:e}")
            }
            Error::EmptySuperposition => write!(f, "superposition needs at least one term"),
            Error::ObserverTooSmall { register, dimension, required } => write!(
                f,
                "observer register `{register}` has {dimension} levels, needs {required}"
            ),
            Error::InvalidClassicalConfig(msg) => write!(f, "invalid classical configuration: {msg}"),
            Error::IdenticalSpan => write!(f, "rotation span labels are identical"),
            Error::InvalidSpan(msg) => write!(f, "invalid rotation span: {msg}"),
            Error::InvalidPerturbation { leakage } => write!(
                f,
                "perturbation is not the identity on the protected branch (leakage {leakage:e})"
            ),
            Error::NonHermitian { residual } => {
                write!(f, "matrix is not Hermitian (max deviation {residual:e})")
            }
            Error::InvalidDensityMatrix(msg) => write!(f, "invalid density matrix: {msg}"),
            Error::OverlappingRegisters(name) => {
                write!(f, "register `{name}` appears in both sets")
            }
            Error::EmptyRegisterSet => write!(f, "register set is empty"),
            Error::SubsystemTooLarge { dimension, cap } => {
                write!(f, "subsystem dimension {dimension} exceeds {cap}")
            }
            Error::InvalidSpec(msg) => write!(f, "invalid experiment: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
