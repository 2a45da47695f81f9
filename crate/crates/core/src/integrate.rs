//! Integration of the Polyak ODE in phase variables `z = [v; x]`,
//! `v = ẋ/√m`, with the field split as friction + potential + inertia:
//!
//! `g¹ = [-b̄√m v; 0]`, `g² = [-∇f(x)/√m; 0]`, `g³ = [0; √m v]`.
//!
//! One step of the four-stage additive Runge-Kutta scheme in [`ark_step`]
//! with step `h` is exactly one Nesterov step with `α = h²` and `b = b̄`.

use crate::certify_continuous::ContinuousCertificate;
use crate::discrete::{nesterov_system_lenient, run};
use crate::error::{check_dim, Error, Result};
use crate::objectives::Objective;
use crate::scalar::{all_finite, norm, sub, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState<T> {
    pub v: Vec<T>,
    pub x: Vec<T>,
    pub t: T,
}

impl<T: Scalar> PhaseState<T> {
    pub fn new(v: Vec<T>, x: Vec<T>, t: T) -> Result<Self> {
        check_dim("PhaseState", v.len(), x.len())?;
        if !(all_finite(&v) && all_finite(&x) && t.is_finite()) {
            return Err(Error::InvalidInput("phase state must be finite".into()));
        }
        Ok(Self { v, x, t })
    }

    /// At rest at `x`.
    pub fn at_rest(x: Vec<T>) -> Self {
        Self {
            v: vec![T::zero(); x.len()],
            x,
            t: T::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `[v; x]`, the state `ξ` of the state-space form.
    pub fn stacked(&self) -> Vec<T> {
        self.v.iter().chain(&self.x).copied().collect()
    }

    fn from_stacked(z: &[T], t: T) -> Self {
        let d = z.len() / 2;
        Self {
            v: z[..d].to_vec(),
            x: z[d..].to_vec(),
            t,
        }
    }
}

/// The split Polyak field for one oracle. With `potential = false` the
/// gradient piece is identically zero.
pub struct PolyakField<'a, T, O: ?Sized> {
    oracle: &'a O,
    b_bar: T,
    sqrt_m: T,
    potential: bool,
}

pub fn polyak_field<T: Scalar, O: Objective<T> + ?Sized>(
    oracle: &O,
    b_bar: T,
) -> Result<PolyakField<'_, T, O>> {
    if !(b_bar.is_finite() && b_bar >= T::zero()) {
        return Err(Error::Parameter(format!("b̄ must be >= 0, got {b_bar}")));
    }
    Ok(PolyakField {
        oracle,
        b_bar,
        sqrt_m: oracle.m().sqrt(),
        potential: true,
    })
}

impl<'a, T: Scalar, O: Objective<T> + ?Sized> PolyakField<'a, T, O> {
    pub fn without_potential(mut self) -> Self {
        self.potential = false;
        self
    }

    pub fn b_bar(&self) -> T {
        self.b_bar
    }

    pub fn oracle(&self) -> &'a O {
        self.oracle
    }

    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    /// Friction `[-b̄√m v; 0]`.
    pub fn g1(&self, z: &[T]) -> Vec<T> {
        let d = z.len() / 2;
        let c = -self.b_bar * self.sqrt_m;
        z[..d]
            .iter()
            .map(|&v| c * v)
            .chain(std::iter::repeat_n(T::zero(), d))
            .collect()
    }

    /// Potential force `[-∇f(x)/√m; 0]`.
    pub fn g2(&self, z: &[T]) -> Vec<T> {
        let d = z.len() / 2;
        let mut out = vec![T::zero(); 2 * d];
        if self.potential {
            for (o, g) in out.iter_mut().zip(self.oracle.gradient(&z[d..])) {
                *o = -g / self.sqrt_m;
            }
        }
        out
    }

    /// Inertia `[0; √m v]`.
    pub fn g3(&self, z: &[T]) -> Vec<T> {
        let d = z.len() / 2;
        std::iter::repeat_n(T::zero(), d)
            .chain(z[..d].iter().map(|&v| self.sqrt_m * v))
            .collect()
    }

    pub fn full(&self, z: &[T]) -> Vec<T> {
        let (a, b, c) = (self.g1(z), self.g2(z), self.g3(z));
        a.iter()
            .zip(&b)
            .zip(&c)
            .map(|((&x, &y), &w)| x + y + w)
            .collect()
    }
}

/// One ARK step together with its stage vectors.
#[derive(Debug, Clone)]
pub struct ArkStep<T> {
    pub next: PhaseState<T>,
    /// `Z₁ .. Z₄`, each stacked as `[v; x]`.
    pub stages: [Vec<T>; 4],
    pub gradient_evals: usize,
}

fn axpy<T: Scalar>(base: &[T], h: T, dir: &[T]) -> Vec<T> {
    base.iter().zip(dir).map(|(&b, &d)| b + h * d).collect()
}

/// `Z₁ = z`, `Z₂ = z + h g¹(Z₁)`, `Z₃ = Z₂ + h g³(Z₂)`, `Z₄ = Z₃ + h g²(Z₃)`,
/// `z⁺ = z + h g¹(Z₁) + h g²(Z₃) + h g³(Z₄)`; the gradient is evaluated
/// once, at `Z₃`.
pub fn ark_step<T: Scalar, O: Objective<T> + ?Sized>(
    z: &PhaseState<T>,
    h: T,
    field: &PolyakField<'_, T, O>,
) -> Result<ArkStep<T>> {
    if !(h.is_finite() && h > T::zero()) {
        return Err(Error::Parameter(format!("step must be positive, got {h}")));
    }
    check_dim("ark_step", field.dim(), z.dim())?;
    let z1 = z.stacked();
    let k1 = field.g1(&z1);
    let z2 = axpy(&z1, h, &k1);
    let k3a = field.g3(&z2);
    let z3 = axpy(&z2, h, &k3a);
    let k2 = field.g2(&z3);
    let z4 = axpy(&z3, h, &k2);
    let k3b = field.g3(&z4);
    let next: Vec<T> = (0..z1.len())
        .map(|i| z1[i] + h * k1[i] + h * k2[i] + h * k3b[i])
        .collect();
    Ok(ArkStep {
        next: PhaseState::from_stacked(&next, z.t + h),
        stages: [z1, z2, z3, z4],
        gradient_evals: usize::from(field.potential),
    })
}

#[derive(Debug, Clone, Default)]
pub struct SampledTrajectory<T> {
    pub states: Vec<PhaseState<T>>,
}

impl<T> SampledTrajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn rk4_step<T: Scalar, O: Objective<T> + ?Sized>(
    field: &PolyakField<'_, T, O>,
    z: &[T],
    h: T,
) -> Vec<T> {
    let half = T::half();
    let k1 = field.full(z);
    let k2 = field.full(&axpy(z, h * half, &k1));
    let k3 = field.full(&axpy(z, h * half, &k2));
    let k4 = field.full(&axpy(z, h, &k3));
    let sixth = h / T::lit(6.0);
    (0..z.len())
        .map(|i| z[i] + sixth * (k1[i] + T::two() * (k2[i] + k3[i]) + k4[i]))
        .collect()
}

/// Equally spaced output times `0, every, 2·every, ..` up to `t_end`.
pub fn sample_grid<T: Scalar>(t_end: T, every: T) -> Vec<T> {
    let n = (t_end / every + T::lit(1e-9))
        .floor()
        .to_usize()
        .unwrap_or(0);
    (0..=n).map(|i| every * T::from_count(i)).collect()
}

/// Classical fourth-order Runge-Kutta on the summed field with
/// `N = ⌈t_end/h_ref⌉` equal steps ending at `t_end`. Each requested time is
/// served by the nearest step; `t_end = 0` returns `z0` alone.
pub fn reference_integrate<T: Scalar, O: Objective<T> + ?Sized>(
    field: &PolyakField<'_, T, O>,
    z0: &PhaseState<T>,
    t_end: T,
    h_ref: T,
    sample_times: &[T],
) -> Result<SampledTrajectory<T>> {
    if !(h_ref.is_finite() && h_ref > T::zero()) {
        return Err(Error::Parameter(format!(
            "h_ref must be positive, got {h_ref}"
        )));
    }
    if !(t_end.is_finite() && t_end >= T::zero()) {
        return Err(Error::Parameter(format!("t_end must be >= 0, got {t_end}")));
    }
    check_dim("reference_integrate", field.dim(), z0.dim())?;
    if t_end == T::zero() {
        return Ok(SampledTrajectory {
            states: vec![z0.clone()],
        });
    }
    let n = (t_end / h_ref - T::lit(1e-9))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let h = t_end / T::from_count(n);
    let mut wanted: Vec<usize> = sample_times
        .iter()
        .filter(|&&t| t >= T::zero() && t <= t_end * (T::one() + T::lit(1e-12)))
        .map(|&t| (t / h).round().to_usize().unwrap_or(0).min(n))
        .collect();
    wanted.sort_unstable();
    wanted.dedup();
    let limit = T::lit(1e12) * (T::one() + norm(&z0.stacked()));
    let mut out = Vec::with_capacity(wanted.len());
    let mut z = z0.stacked();
    let mut next_sample = wanted.iter().peekable();
    for k in 0..=n {
        if !all_finite(&z) || norm(&z) > limit {
            return Err(Error::Divergence { step: k });
        }
        while next_sample.peek() == Some(&&k) {
            out.push(PhaseState::from_stacked(&z, z0.t + h * T::from_count(k)));
            next_sample.next();
        }
        if k < n {
            z = rk4_step(field, &z, h);
        }
    }
    Ok(SampledTrajectory { states: out })
}

/// `e^{λt} (f(x) - f(x*) + (ξ - ξ*)ᵀ P̄ (ξ - ξ*))` with `ξ = [v; x]`.
pub fn lyapunov_continuous<T: Scalar, O: Objective<T> + ?Sized>(
    cert: &ContinuousCertificate<T>,
    oracle: &O,
    z: &PhaseState<T>,
) -> Result<T> {
    let xs = oracle.minimizer().ok_or(Error::UnsupportedOracle(
        "Lyapunov values need a known minimizer",
    ))?;
    check_dim("lyapunov_continuous", cert.p_bar.order(), 2 * z.dim())?;
    let e: Vec<T> = z.v.iter().copied().chain(sub(&z.x, xs)).collect();
    let gap = oracle.gap(&z.x).expect("minimizer known");
    Ok((cert.lambda * z.t).exp() * (gap + cert.p_bar.quad_form(&e)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow<T> {
    pub h: T,
    pub steps: usize,
    /// `max_k ‖x_k - x(kh)‖` against the reference ODE solution.
    pub max_deviation: T,
}

/// Runs Nesterov with `α = h²`, `β = 1 - h b̄√m` from rest at `x0` for
/// `⌈t_end/h⌉` steps for each `h`, and compares with the ODE solution
/// integrated by RK4 with substeps of at most `1e-3`.
pub fn limit_consistency<T: Scalar, O: Objective<T> + ?Sized>(
    x0: &[T],
    b_bar: T,
    oracle: &O,
    t_end: T,
    h_sequence: &[T],
) -> Result<Vec<LimitRow<T>>> {
    if h_sequence.windows(2).any(|w| !(w[1] < w[0])) || h_sequence.iter().any(|&h| h <= T::zero()) {
        return Err(Error::InvalidInput(
            "h sequence must be positive and decreasing".into(),
        ));
    }
    check_dim("limit_consistency", oracle.dim(), x0.len())?;
    let field = polyak_field(oracle, b_bar)?;
    let (m, l) = (oracle.m(), oracle.l());
    let h_sub = T::lit(1e-3);
    let mut rows = Vec::with_capacity(h_sequence.len());
    for &h in h_sequence {
        let steps = (t_end / h - T::lit(1e-9)).ceil().to_usize().unwrap_or(0);
        let sys = nesterov_system_lenient(h * h, b_bar, m, l, x0.len())?;
        let tr = run(&sys, oracle, &sys.state_at(x0)?, steps, None)?;
        let sub_n = (h / h_sub).ceil().to_usize().unwrap_or(1).max(1);
        let dt = h / T::from_count(sub_n);
        let mut z = PhaseState::at_rest(x0.to_vec()).stacked();
        let mut worst = T::zero();
        for (k, xk) in tr.iterates.iter().enumerate() {
            if k > 0 {
                for _ in 0..sub_n {
                    z = rk4_step(&field, &z, dt);
                }
            }
            worst = worst.max(norm(&sub(xk, &z[x0.len()..])));
        }
        rows.push(LimitRow {
            h,
            steps,
            max_deviation: worst,
        });
    }
    Ok(rows)
}
