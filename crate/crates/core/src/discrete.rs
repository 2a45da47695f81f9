//! State-space form `ξ_{k+1} = A ξ_k + B u_k`, `u_k = ∇f(C ξ_k)`, `x_k = E ξ_k`
//! of momentum methods, with simulation and Lyapunov evaluation.
//!
//! For the momentum family the state is `ξ = [d; x]` where
//! `x_{k+1} = x_k + δ d_{k+1}` and `δ = √(mα)` is the nondimensional step.

use crate::certify_discrete::DiscreteCertificate;
use crate::error::{check_dim, Error, Result};
use crate::matrices::{Matrix, SymMatrix};
use crate::objectives::Objective;
use crate::scalar::{all_finite, norm, norm_sq, sub, Scalar};

/// Parameters of a member of the momentum family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
    /// Friction with `β = 1 - bδ`.
    pub b: T,
    pub m: T,
    pub l: T,
}

/// Kronecker factors: the full matrices are `Â ⊗ I_d` and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct HatFactors<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub c: Matrix<T>,
    pub e: Matrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem<T> {
    a: Matrix<T>,
    b: Matrix<T>,
    c: Matrix<T>,
    e: Matrix<T>,
    hat: Option<HatFactors<T>>,
    params: Option<MethodParams<T>>,
}

impl<T: Scalar> DiscreteSystem<T> {
    /// A general system. Shapes must be `A: n×n`, `B: n×d`, `C: d×n`, `E: d×n`.
    pub fn new(a: Matrix<T>, b: Matrix<T>, c: Matrix<T>, e: Matrix<T>) -> Result<Self> {
        let n = a.rows();
        let d = b.cols();
        check_dim("DiscreteSystem A cols", n, a.cols())?;
        check_dim("DiscreteSystem B rows", n, b.rows())?;
        check_dim("DiscreteSystem C rows", d, c.rows())?;
        check_dim("DiscreteSystem C cols", n, c.cols())?;
        check_dim("DiscreteSystem E rows", d, e.rows())?;
        check_dim("DiscreteSystem E cols", n, e.cols())?;
        Ok(Self {
            a,
            b,
            c,
            e,
            hat: None,
            params: None,
        })
    }

    fn from_hat(hat: HatFactors<T>, d: usize, params: Option<MethodParams<T>>) -> Result<Self> {
        let mut sys = Self::new(
            hat.a.kron_identity(d),
            hat.b.kron_identity(d),
            hat.c.kron_identity(d),
            hat.e.kron_identity(d),
        )?;
        sys.hat = Some(hat);
        sys.params = params;
        Ok(sys)
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }
    pub fn b(&self) -> &Matrix<T> {
        &self.b
    }
    pub fn c(&self) -> &Matrix<T> {
        &self.c
    }
    pub fn e(&self) -> &Matrix<T> {
        &self.e
    }
    pub fn hat(&self) -> Option<&HatFactors<T>> {
        self.hat.as_ref()
    }
    pub fn params(&self) -> Option<&MethodParams<T>> {
        self.params.as_ref()
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// Dimension of the decision variable.
    pub fn d(&self) -> usize {
        self.b.cols()
    }

    /// The same method with `d = 1`, i.e. the hat factors as a system.
    pub fn hat_system(&self) -> Option<Self> {
        self.hat
            .clone()
            .map(|h| Self::from_hat(h, 1, self.params).expect("hat factors are conformable"))
    }

    /// `EA - C`, which vanishes exactly for the Nesterov family.
    pub fn ea_minus_c(&self) -> Matrix<T> {
        self.e
            .mul(&self.a)
            .and_then(|ea| ea.sub(&self.c))
            .expect("shapes checked at construction")
    }

    /// `Eᵀ x`: the state with zero momentum at `x`. This is both the starting
    /// state convention `d₀ = 0` and the fixed point `ξ*` when `x = x*`.
    pub fn state_at(&self, x: &[T]) -> Result<Vec<T>> {
        self.e.tr_mul_vec(x)
    }

    pub fn iterate(&self, xi: &[T]) -> Result<Vec<T>> {
        self.e.mul_vec(xi)
    }

    pub fn output(&self, xi: &[T]) -> Result<Vec<T>> {
        self.c.mul_vec(xi)
    }
}

fn validate_moduli<T: Scalar>(m: T, l: T) -> Result<()> {
    if !(m.is_finite() && l.is_finite() && m > T::zero() && l >= m) {
        return Err(Error::Parameter(format!(
            "need 0 < m <= L, got m={m}, L={l}"
        )));
    }
    Ok(())
}

fn momentum_hat<T: Scalar>(p: &MethodParams<T>) -> Result<HatFactors<T>> {
    let (beta, delta, alpha, gamma) = (p.beta, p.delta, p.alpha, p.gamma);
    Ok(HatFactors {
        a: Matrix::from_rows(&[&[beta, T::zero()], &[delta * beta, T::one()]])?,
        b: Matrix::from_rows(&[&[-alpha / delta], &[-alpha]])?,
        c: Matrix::from_rows(&[&[delta * gamma, T::one()]])?,
        e: Matrix::from_rows(&[&[T::zero(), T::one()]])?,
    })
}

fn momentum_params<T: Scalar>(alpha: T, beta: T, gamma: T, m: T, l: T) -> Result<MethodParams<T>> {
    validate_moduli(m, l)?;
    if !(alpha.is_finite() && alpha > T::zero()) {
        return Err(Error::Parameter(format!(
            "step must be positive, got {alpha}"
        )));
    }
    if !(beta.is_finite() && gamma.is_finite()) {
        return Err(Error::Parameter(
            "momentum parameters must be finite".into(),
        ));
    }
    let delta = (m * alpha).sqrt();
    Ok(MethodParams {
        alpha,
        beta,
        gamma,
        delta,
        b: (T::one() - beta) / delta,
        m,
        l,
    })
}

/// Nesterov's method with `β = 1 - bδ` and `γ = β`. Requires `bδ <= 1`
/// (nonnegative momentum) when `b > 0`.
pub fn nesterov_system<T: Scalar>(
    alpha: T,
    b: T,
    m: T,
    l: T,
    d: usize,
) -> Result<DiscreteSystem<T>> {
    let sys = nesterov_system_lenient(alpha, b, m, l, d)?;
    let delta = sys.params.as_ref().expect("params set").delta;
    if b > T::zero() && delta * b > T::one() {
        return Err(Error::Parameter(format!(
            "δ = {delta} must not exceed 1/b = {}",
            b.recip()
        )));
    }
    Ok(sys)
}

/// As [`nesterov_system`] without the momentum sign check.
pub fn nesterov_system_lenient<T: Scalar>(
    alpha: T,
    b: T,
    m: T,
    l: T,
    d: usize,
) -> Result<DiscreteSystem<T>> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    if !b.is_finite() {
        return Err(Error::Parameter("friction must be finite".into()));
    }
    validate_moduli(m, l)?;
    let delta = (m * alpha).sqrt();
    let beta = T::one() - b * delta;
    let mut p = momentum_params(alpha, beta, beta, m, l)?;
    p.b = b;
    DiscreteSystem::from_hat(momentum_hat(&p)?, d, Some(p))
}

/// The classical choice `α = 1/L`, `β = (√κ - 1)/(√κ + 1)`, i.e. `b = 2/(1+δ)`.
pub fn standard_nesterov<T: Scalar>(m: T, l: T, d: usize) -> Result<DiscreteSystem<T>> {
    validate_moduli(m, l)?;
    let delta = (m / l).sqrt();
    nesterov_system(l.recip(), T::two() / (T::one() + delta), m, l, d)
}

/// `y_k = x_k + γ(x_k - x_{k-1})` with momentum `β`; `γ = 0` is heavy ball.
pub fn generalized_system<T: Scalar>(
    alpha: T,
    beta: T,
    gamma: T,
    m: T,
    l: T,
    d: usize,
) -> Result<DiscreteSystem<T>> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    let p = momentum_params(alpha, beta, gamma, m, l)?;
    DiscreteSystem::from_hat(momentum_hat(&p)?, d, Some(p))
}

/// Gradient descent `x_{k+1} = x_k - δ_step ∇f(x_k)` as a system with `n = d`.
pub fn gradient_descent_system<T: Scalar>(delta_step: T, d: usize) -> Result<DiscreteSystem<T>> {
    if !(delta_step.is_finite() && delta_step > T::zero()) {
        return Err(Error::Parameter(format!(
            "step must be positive, got {delta_step}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    let hat = HatFactors {
        a: Matrix::identity(1),
        b: Matrix::from_rows(&[&[-delta_step]])?,
        c: Matrix::identity(1),
        e: Matrix::identity(1),
    };
    DiscreteSystem::from_hat(hat, d, None)
}

/// One step `Aξ + B∇f(Cξ)`.
pub fn step<T: Scalar, O: Objective<T> + ?Sized>(
    sys: &DiscreteSystem<T>,
    oracle: &O,
    xi: &[T],
) -> Result<Vec<T>> {
    check_dim("step (oracle dimension)", sys.d(), oracle.dim())?;
    check_dim("step (state)", sys.n(), xi.len())?;
    let y = sys.output(xi)?;
    let u = oracle.gradient(&y);
    let mut next = sys.a.mul_vec(xi)?;
    for (nx, bu) in next.iter_mut().zip(sys.b.mul_vec(&u)?) {
        *nx += bu;
    }
    Ok(next)
}

/// Per-step records of a simulation. `f_gap` and `dist_sq` are empty when
/// the oracle has no known minimizer; `lyapunov` and `bound` are empty
/// without a certificate. Present sequences all have `len()` entries.
#[derive(Debug, Clone, Default)]
pub struct Trajectory<T> {
    pub states: Vec<Vec<T>>,
    pub iterates: Vec<Vec<T>>,
    pub outputs: Vec<Vec<T>>,
    pub gradients: Vec<Vec<T>>,
    pub f_gap: Vec<T>,
    pub dist_sq: Vec<T>,
    pub lyapunov: Vec<T>,
    pub bound: Vec<T>,
}

impl<T> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Iterates `steps` times from `xi0`, recording every state. With a
/// certificate, also records `V_k` and the bound
/// `(max σ(EᵀE) / min σ(P̃)) ρ^{2k} V_0` on `‖x_k - x*‖²`.
pub fn run<T: Scalar, O: Objective<T> + ?Sized>(
    sys: &DiscreteSystem<T>,
    oracle: &O,
    xi0: &[T],
    steps: usize,
    cert: Option<&DiscreteCertificate<T>>,
) -> Result<Trajectory<T>> {
    check_dim("run (oracle dimension)", sys.d(), oracle.dim())?;
    check_dim("run (state)", sys.n(), xi0.len())?;
    if !all_finite(xi0) {
        return Err(Error::InvalidInput("initial state must be finite".into()));
    }
    let x_star = oracle.minimizer().map(<[T]>::to_vec);
    let bound_factor = match cert {
        Some(c) => {
            if x_star.is_none() {
                return Err(Error::UnsupportedOracle(
                    "Lyapunov values need a known minimizer",
                ));
            }
            check_dim("run (certificate order)", sys.n(), c.p.order())?;
            let ete = SymMatrix::from_matrix(&sys.e.transpose().mul(&sys.e)?)?;
            let pt_min = c.ptilde(sys)?.min_eig()?;
            if pt_min <= T::zero() {
                return Err(Error::InvalidCertificate(format!(
                    "P~ is not positive definite (min eigenvalue {pt_min})"
                )));
            }
            Some(ete.max_eig()? / pt_min)
        }
        None => None,
    };
    let limit = T::lit(1e12) * (T::one() + norm(xi0));
    let mut tr = Trajectory {
        states: Vec::with_capacity(steps + 1),
        ..Trajectory::default()
    };
    let mut xi = xi0.to_vec();
    let mut v0 = T::zero();
    for k in 0..=steps {
        if !all_finite(&xi) || norm(&xi) > limit {
            return Err(Error::Divergence { step: k });
        }
        let x = sys.iterate(&xi)?;
        let y = sys.output(&xi)?;
        let u = oracle.gradient(&y);
        if let Some(xs) = &x_star {
            tr.f_gap.push(oracle.gap(&x).expect("minimizer known"));
            tr.dist_sq.push(norm_sq(&sub(&x, xs)));
        }
        if let (Some(c), Some(factor)) = (cert, bound_factor) {
            let v = lyapunov_discrete(c, sys, oracle, k, &xi)?;
            if k == 0 {
                v0 = v;
            }
            tr.lyapunov.push(v);
            tr.bound.push(factor * c.rho2.powi(k as i32) * v0);
        }
        let next = if k < steps {
            let mut next = sys.a.mul_vec(&xi)?;
            for (nx, bu) in next.iter_mut().zip(sys.b.mul_vec(&u)?) {
                *nx += bu;
            }
            Some(next)
        } else {
            None
        };
        tr.states.push(xi.clone());
        tr.iterates.push(x);
        tr.outputs.push(y);
        tr.gradients.push(u);
        if let Some(n) = next {
            xi = n;
        }
    }
    Ok(tr)
}

/// `ρ^{-2k} (a₀ (f(x) - f(x*)) + (ξ - ξ*)ᵀ P (ξ - ξ*))` with `x = Eξ`.
pub fn lyapunov_discrete<T: Scalar, O: Objective<T> + ?Sized>(
    cert: &DiscreteCertificate<T>,
    sys: &DiscreteSystem<T>,
    oracle: &O,
    k: usize,
    xi: &[T],
) -> Result<T> {
    check_dim(
        "lyapunov_discrete (certificate order)",
        sys.n(),
        cert.p.order(),
    )?;
    check_dim("lyapunov_discrete (state)", sys.n(), xi.len())?;
    let xs = oracle.minimizer().ok_or(Error::UnsupportedOracle(
        "Lyapunov values need a known minimizer",
    ))?;
    let xi_star = sys.state_at(xs)?;
    let e = sub(xi, &xi_star);
    let x = sys.iterate(xi)?;
    let gap = oracle.gap(&x).expect("minimizer known");
    let weight = cert.rho2.powi(k as i32).recip();
    Ok(weight * (cert.a0 * gap + cert.p.quad_form(&e)?))
}
