use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("constant term A must be positive, got {0}")]
    NonPositiveA(f64),
    #[error("constant term A must be non-negative, got {0}")]
    NegativeA(f64),
    #[error("coefficients sum to {0}, expected 1")]
    CoefficientsDontSumToOne(f64),
    #[error("turning points must be strictly increasing")]
    NonMonotoneTurningPoints,
    #[error("coefficient a_{index} = {value} must be positive")]
    NonPositiveCoefficient { index: usize, value: f64 },
    #[error("a profile needs at least one turning point")]
    NoTurningPoints,
    #[error("slope undefined at turning point z = {0}")]
    TurningPointSlopeUndefined(f64),
    #[error("interval index {index} out of range (r = {r})")]
    IntervalOutOfRange { index: usize, r: usize },
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("evaluation requires rho > 0, got {0}")]
    AxisEvaluation(f64),
    #[error("z = {0} is a turning point on the axis")]
    TurningPointOnAxis(f64),
    #[error("{0} diverges logarithmically on the axis")]
    AxisLogDivergence(&'static str),
    #[error("finite-difference step {step} too large for rho = {rho}")]
    StepTooLarge { step: f64, rho: f64 },
    #[error("closed axis formula invalid on zero-slope interval at z = {0}")]
    ZeroSlopeInterval(f64),
    #[error("metric condition estimate {0:e} exceeds 1e12")]
    IllConditioned(f64),
    #[error("H_z vanishes at (rho, z) = ({0}, {1})")]
    DegenerateHz(f64, f64),
    #[error("cone angle parameter alpha_{index} = {value} must be positive")]
    AngleNonPositive { index: usize, value: f64 },
    #[error("expected {expected} angle parameters, got {got}")]
    AngleCountMismatch { expected: usize, got: usize },
    #[error("Killing vectors v_{0} and v_{1} are parallel")]
    DegeneratePair(usize, usize),
    #[error("degenerate denominator in NUT charge")]
    DegenerateDenominator,
    #[error("no positive angle solution for n = {0}")]
    NoPositiveAngleSolution(i64),
    #[error("NUT charge {0} is not an integer")]
    NonIntegerNut(f64),
    #[error("expected 3 turning points, got {0}")]
    WrongTurningPointCount(usize),
    #[error("adjacent slopes both vanish at turning point {0}")]
    AdjacentSlopesBothZero(usize),
}
