use thiserror::Error;

pub type Result<T> = std::result::Result<T, SqgError>;

#[derive(Error, Debug)]
pub enum SqgError {
    #[error("grid: {0}")]
    Grid(String),

    #[error("multiplier symbol is not Hermitian at k=({0}, {1}); real output requested")]
    NonHermitianSymbol(i64, i64),

    #[error("field has nonzero mean {0:.3e}; operation requires mean zero")]
    NonzeroMean(f64),

    #[error("mollifier width {eps:.3e} below grid spacing {spacing:.3e}")]
    MollifierTooNarrow { eps: f64, spacing: f64 },

    #[error("moment order {0} exceeds supported maximum 12")]
    MomentOrderTooHigh(usize),

    #[error("amplitude argument leaves the admissible neighborhood: {0}")]
    Inadmissible(String),

    #[error("negative squared amplitude {value:.3e} inside the admissible neighborhood (direction {direction:?})")]
    NegativeAmplitude { value: f64, direction: [i64; 2] },

    #[error("CFL violation: dt={dt:.3e} exceeds limit {limit:.3e}; use dt <= {limit:.3e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("time coverage [{have_lo:.3e}, {have_hi:.3e}] insufficient, need [{need_lo:.3e}, {need_hi:.3e}]")]
    TimeCoverage {
        have_lo: f64,
        have_hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("phase functions have mismatched birth data")]
    PhaseBirthMismatch,

    #[error("sigma-line quadrature failed to converge for frequency pair ({0:?}, {1:?})")]
    SigmaQuadrature([i64; 2], [i64; 2]),

    #[error("fixed point iteration failed to contract: {0}")]
    NoContraction(String),

    #[error("frequency pairing exceeds the Nyquist range; caller must pad (max |k| = {0:.1})")]
    NyquistOverflow(f64),

    #[error("phase gradient escapes admissible neighborhood at stage {stage}: deviation {deviation:.3e} > {limit:.3e}")]
    PhaseEscape {
        stage: String,
        deviation: f64,
        limit: f64,
    },

    #[error("scheduler: {0}")]
    Scheduler(String),

    #[error("driver: {0}")]
    Driver(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),
}
