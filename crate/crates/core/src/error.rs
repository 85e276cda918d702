use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid tree spec: {0}")]
    Semantic(String),

    #[error("depth {requested} exceeds the configured cap {cap}")]
    DepthCap { requested: usize, cap: usize },

    #[error("condition (star) fails: isolated planar end along cycle [{}]", witness.join(" -> "))]
    StarViolated { witness: Vec<String> },

    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("inconsistent complex: {0}")]
    InconsistentComplex(String),

    #[error("boundary index {index} of piece {piece} is outside the truncation range {holes}")]
    IndexOutOfRange { piece: String, index: u32, holes: u32 },

    #[error("circle {0} is not a free boundary circle")]
    CircleNotFree(u64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("rotation number {alpha} is within 1e-12 of {p}/{q}")]
    RationalRotation { alpha: f64, p: u64, q: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("flow integration tolerance unmet (achieved {achieved:e})")]
    ToleranceUnmet { achieved: f64 },

    #[error("density horizon exhausted: no admissible point of family {family} below index {horizon}")]
    HorizonExhausted { family: u32, horizon: u64 },

    #[error("families {0} and {1} overlap within the tested horizon")]
    OverlappingFamilies(u32, u32),

    #[error("dangling family reference: {0}")]
    DanglingFamily(String),

    #[error("budget unmet at step {step}: estimate {estimate:e} >= bound {bound:e}")]
    BudgetUnmet { step: usize, estimate: f64, bound: f64 },
}

impl Error {
    /// True for errors caused by input violating an operation's precondition,
    /// as opposed to malformed input or internal failures.
    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::StarViolated { .. } | Error::DepthCap { .. })
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::Semantic(_) => "semantic",
            Error::DepthCap { .. } => "depth_cap",
            Error::StarViolated { .. } => "star_violated",
            Error::MalformedTree(_) => "malformed_tree",
            Error::InconsistentComplex(_) => "inconsistent_complex",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::CircleNotFree(_) => "circle_not_free",
            Error::InvalidSchedule(_) => "invalid_schedule",
            Error::RationalRotation { .. } => "rational_rotation",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::ToleranceUnmet { .. } => "tolerance_unmet",
            Error::HorizonExhausted { .. } => "horizon_exhausted",
            Error::OverlappingFamilies(..) => "overlapping_families",
            Error::DanglingFamily(_) => "dangling_family",
            Error::BudgetUnmet { .. } => "budget_unmet",
        }
    }
}
