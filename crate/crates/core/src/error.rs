use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("degenerate pairing: kernel vector {0}")]
    DegeneratePairing(String),
    #[error("degree mismatch in pairing entry <{a},{b}>: {da} + {db} != {d}")]
    DegreeMismatch {
        a: String,
        b: String,
        da: u32,
        db: u32,
        d: u32,
    },
    #[error("graded symmetry violated for <{0},{1}>")]
    SymmetryViolation(String, String),
    #[error("unit: {0}")]
    Unit(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("space or dimension mismatch: {0}")]
    Mismatch(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("d∘d != 0: entry ({row},{col}) of the composite is {value}")]
    NonzeroComposite {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("window too large: {what} has {size} elements, cap is {cap}")]
    CapExceeded {
        what: String,
        size: usize,
        cap: usize,
    },
    #[error("not a Maurer-Cartan element: residual has {0} terms")]
    NotMaurerCartan(usize),
    #[error("membership: {0}")]
    Membership(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
