//! Superadiabatic dressing: order-by-order construction of `A_p`, the
//! dressed projector `Π = VPV*` with `V = exp(iΣ ε^p A_p)`, its rest term,
//! and the diabatic-error sweeps that expose the resulting ε-scaling.

mod chebyshev;
mod dressing;
mod series;
mod sweep;

pub use chebyshev::{ChebyshevGrid, DEFAULT_NODES};
pub use dressing::{
    build_dressing, dressed_evolution_residual, dressed_projector_and_rest, dressing_diagnostics,
    exp_derivative_left, DressedProjector, DressingSequence, OrderDiagnostics, MAX_ORDER,
};
pub use series::{adjoint_series_coefficients, compositions, k_coefficient, t_coefficient, SeriesCoefficients};
pub use sweep::{diabatic_error_sweep, SweepFit, SweepRow, SweepTable};
