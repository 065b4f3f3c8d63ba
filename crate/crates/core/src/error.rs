use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Problem data violates one of its declared bounds.
    #[error("configuration error: {0}")]
    Config(String),

    /// Mesh breakpoints collide or are out of order for the requested resolution.
    #[error("mesh refinement required: {0}")]
    RefineRequest(String),

    #[error("assembly failure: {0}")]
    Assembly(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("numerical failure after {iterations} iterations: {message}")]
    Numerical { message: String, iterations: usize },

    /// Eigenvalue index is not simple; the caller should compare clusters instead.
    #[error("eigenvalue {index} is not simple (gap {gap:.3e}); use a cluster distance")]
    AmbiguousEigenvalue { index: usize, gap: f64 },

    #[error("no spectral gap at cut {m}: nearby gaps {gaps:?}")]
    CutSelection { m: usize, gaps: Vec<f64> },

    #[error("newton did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("equilibrium {index} is not hyperbolic (margin {margin:.3e}, mean value {mean:.6})")]
    Hyperbolicity { index: usize, margin: f64, mean: f64 },

    #[error("continued equilibrium left the uniqueness ball: distance {distance:.3e} > delta {delta:.3e}")]
    UniquenessViolation { distance: f64, delta: f64 },

    #[error("time step rejected {halvings} times at t = {t:.6}")]
    Stiffness { halvings: usize, t: f64 },

    #[error("dense oracle limited to n <= {limit}, got {n}")]
    OracleGuard { n: usize, limit: usize },

    #[error("backward slow trajectory left the box (|eta| = {reached:.4}, allowed {allowed:.4}); enlarge rho_box")]
    BoxEscape { reached: f64, allowed: f64 },

    #[error("Lyapunov-Perron iteration does not contract (observed factor {kappa:.4}); try a larger slow dimension or a smaller box")]
    NoContraction { kappa: f64 },

    #[error("basis alignment failed for slow mode {mode} (overlap {overlap:.3e})")]
    Alignment { mode: usize, overlap: f64 },

    #[error("trajectory anomaly: {0}")]
    DynamicsAnomaly(String),

    #[error("equilibria count changed across the sweep: {0}")]
    StructuralChange(String),

    #[error("fit rejected: {reason}; excluded rows {excluded:?}")]
    FitRejected { reason: String, excluded: Vec<usize> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
