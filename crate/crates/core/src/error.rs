use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("score {0} is outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),
    #[error("histogram edges do not match")]
    EdgeMismatch,
    #[error("invalid calibration curve: {0}")]
    InvalidCurve(String),
    #[error(
        "degenerate class split: prevalence {0} leaves one class-conditional density undefined"
    )]
    DegenerateClass(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate fit: calibration sample contains a single class")]
    DegenerateFit,
    #[error("allocation infeasible: {0}")]
    AllocationInfeasible(String),
    #[error("unstable threshold {threshold}: |tpr - fpr| = {gap} is below the guard {guard}")]
    UnstableThreshold {
        threshold: f64,
        gap: f64,
        guard: f64,
    },
    #[error("no threshold passes the denominator guard {0}")]
    NoValidThreshold(f64),
    #[error("bootstrap unstable: {failures} of {reps} replicates failed")]
    BootstrapUnstable { failures: usize, reps: usize },
    #[error("unknown {kind} name `{name}`")]
    UnknownName { kind: &'static str, name: String },
}
