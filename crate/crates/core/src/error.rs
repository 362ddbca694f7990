use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "exponents violate the critical hyperbola: 1/(p+1) + 1/(q+1) = {lhs:.6} <= (N-2)/N = {rhs:.6} \
         for p = {p}, q = {q}, N = {dim}"
    )]
    HyperbolaViolated {
        p: f64,
        q: f64,
        dim: usize,
        lhs: f64,
        rhs: f64,
    },

    #[error("exponent bootstrap needs no iteration: alpha* or beta* is infinite")]
    InvalidExponents,

    #[error("{context}: Newton iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NonConvergence {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{context}: positivity lost after exhausting the damping floor")]
    PositivityLost { context: &'static str },

    #[error("Krylov iteration stalled after {iterations} iterations (relative residual {residual:.3e})")]
    KrylovStall { iterations: usize, residual: f64 },

    #[error("decay tail not resolved: extrapolated tail carries {tail_fraction:.3e} of the integral")]
    DecayNotResolved { tail_fraction: f64 },

    #[error("decay fit window contains non-positive samples")]
    WindowUnderflow,

    #[error("spike unresolved: only {nodes} grid nodes across the spike core (need 8)")]
    SpikeUnresolved { nodes: usize },

    #[error("ray has no positive maximum: cross term {cross:.3e} is not positive")]
    NoPositiveMax { cross: f64 },

    #[error("decay annulus contains no usable nodes")]
    AnnulusEmpty,

    #[error("expansion fit needs at least 4 entries spanning a factor 4 in eps (got {entries} entries, span {span:.3})")]
    InsufficientSpan { entries: usize, span: f64 },

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("continuation failed at eps = {eps}: {source}")]
    Continuation {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
