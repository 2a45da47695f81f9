//! Lyapunov certificates for accelerated first-order methods.
//!
//! The crate builds state-space models of Nesterov-type iterations and of the
//! damped-oscillator ODE behind them, assembles the matrix inequalities whose
//! feasibility certifies a linear convergence rate, solves for the best
//! certifiable rate along one-parameter families, and simulates or integrates
//! the dynamics to check the resulting Lyapunov functions.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`.

pub mod certify_continuous;
pub mod certify_discrete;
pub mod discrete;
pub mod error;
pub mod integrate;
pub mod matrices;
pub mod objectives;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use certify_continuous::{
    assemble_tbar, branch_point, build_certificate, closed_form_p_bar, closed_form_tbar_hat,
    continuous_rate, convergence_bound_continuous, delta_discriminant, polyak_system,
    psd_baseline_p, psd_baseline_rate, quadratic_sharp_rate, verify_continuous,
    ContinuousCertificate, ContinuousRate, ContinuousSystem,
};
pub use certify_discrete::{
    assemble_t, baseline_psd_rate, certify_by_search, closed_form_p, closed_form_that,
    obstruction_c, phi, solve_rate, trace_baseline, trace_curve, verify_certificate,
    verify_certificate_with_tol, CertificateReport, DiscreteCertificate, Obstruction,
    RateCurvePoint, SearchOutcome, HAT_TOL,
};
pub use discrete::{
    generalized_system, gradient_descent_system, lyapunov_discrete, nesterov_system,
    nesterov_system_lenient, run, standard_nesterov, step, DiscreteSystem, MethodParams,
    Trajectory,
};
pub use integrate::{
    ark_step, limit_consistency, lyapunov_continuous, polyak_field, reference_integrate,
    sample_grid, ArkStep, LimitRow, PhaseState, PolyakField, SampledTrajectory,
};
pub use matrices::{congruence, is_nsd, is_pd, sym_eigvals, Matrix, SymMatrix};
pub use objectives::{
    validate_class, Fun1, Objective, Quadratic, Scaled, ValidationReport, WithModuli,
};

pub type Matrix64 = Matrix<f64>;
pub type SymMatrix64 = SymMatrix<f64>;
pub type Quadratic64 = Quadratic<f64>;
pub type Fun1_64 = Fun1<f64>;
pub type DiscreteSystem64 = DiscreteSystem<f64>;
pub type DiscreteCertificate64 = DiscreteCertificate<f64>;
pub type ContinuousSystem64 = ContinuousSystem<f64>;
pub type ContinuousCertificate64 = ContinuousCertificate<f64>;
pub type PhaseState64 = PhaseState<f64>;
