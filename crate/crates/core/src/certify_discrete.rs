//! Matrix-inequality certificates for the discrete methods.
//!
//! A certificate `(P, a₀, ρ², ℓ)` is valid when
//! `T = M⁰ + a₀ρ²(N¹+N²) + a₀(1-ρ²)(N¹+N³) + ℓN⁴ ⪯ 0` and
//! `P̃ = P + (a₀m/2)EᵀE ≻ 0`; then the iterates satisfy
//! `‖x_k - x*‖² ≤ (max σ(EᵀE)/min σ(P̃)) ρ^{2k} V₀`.
//!
//! For the Nesterov family the hat matrices are 3×3 and the closed-form `P`
//! below zeroes the coupling entries `t₁₃`, `t₂₃`, leaving the scalar rate
//! equation `φ(r, b; δ) = t₁₁t₂₂ - t₁₂² = 0` with `β = 1-bδ`, `ρ² = 1-rδ`.
//!
//! Every feasibility decision on hat matrices is made with `m` normalized to 1
//! (`L = κ`); `δ`, `b` and `r` are invariant under that rescaling.

use rayon::prelude::*;

use crate::discrete::{DiscreteSystem, MethodParams};
use crate::error::{check_dim, Error, Result};
use crate::matrices::{congruence, sym_block_diag, Matrix, SymMatrix};
use crate::scalar::Scalar;

/// Absolute eigenvalue tolerance on `m`-normalized hat matrices.
pub const HAT_TOL: f64 = 1e-9;

const SCAN_STEPS: usize = 400;
const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCertificate<T> {
    pub p: SymMatrix<T>,
    pub a0: T,
    pub rho2: T,
    pub ell: T,
    pub m: T,
    pub l: T,
}

impl<T: Scalar> DiscreteCertificate<T> {
    pub fn new(p: SymMatrix<T>, a0: T, rho2: T, ell: T, m: T, l: T) -> Result<Self> {
        if !(a0.is_finite() && a0 > T::zero()) {
            return Err(Error::InvalidCertificate(format!(
                "a0 must be positive, got {a0}"
            )));
        }
        if !(rho2 > T::zero() && rho2 <= T::one()) {
            return Err(Error::InvalidCertificate(format!(
                "rho^2 must lie in (0, 1], got {rho2}"
            )));
        }
        if !(ell.is_finite() && ell >= T::zero()) {
            return Err(Error::InvalidCertificate(format!(
                "ell must be >= 0, got {ell}"
            )));
        }
        if !(m > T::zero() && l >= m && l.is_finite()) {
            return Err(Error::InvalidCertificate(format!(
                "need 0 < m <= L, got m={m}, L={l}"
            )));
        }
        Ok(Self {
            p,
            a0,
            rho2,
            ell,
            m,
            l,
        })
    }

    /// The closed-form certificate at rate `r` for friction `b`: `P = P̂ ⊗ I_d`,
    /// `a₀ = 1`, `ρ² = 1 - rδ`, `ℓ = 0`.
    pub fn from_rate(b: T, r: T, delta: T, m: T, l: T, d: usize) -> Result<Self> {
        let (p11, p12, p22) = closed_form_p(delta, b, r, m)?;
        let phat = SymMatrix::new(2, vec![p11, p12, p22])?;
        Self::new(
            phat.kron_identity(d),
            T::one(),
            T::one() - r * delta,
            T::zero(),
            m,
            l,
        )
    }

    pub fn ptilde(&self, sys: &DiscreteSystem<T>) -> Result<SymMatrix<T>> {
        check_dim("ptilde", sys.n(), self.p.order())?;
        let ete = SymMatrix::from_matrix(&sys.e().transpose().mul(sys.e())?)?;
        self.p.add(&ete.scale(self.a0 * self.m * T::half()))
    }

    pub fn t_matrix(&self, sys: &DiscreteSystem<T>) -> Result<SymMatrix<T>> {
        assemble_t(sys, &self.p, self.a0, self.rho2, self.ell, self.m, self.l)
    }
}

/// The individual terms of `T`; `m0` already contains `-ρ²P`.
#[derive(Debug, Clone)]
pub struct LmiTerms<T> {
    pub m0: SymMatrix<T>,
    pub n1: SymMatrix<T>,
    pub n2: SymMatrix<T>,
    pub n3: SymMatrix<T>,
    pub n4: SymMatrix<T>,
}

fn weight<T: Scalar>(w11: T, w12: T, w22: T, d: usize) -> SymMatrix<T> {
    SymMatrix::new(2, vec![w11, w12, w22])
        .expect("finite weights")
        .kron_identity(d)
}

pub fn lmi_terms<T: Scalar>(
    sys: &DiscreteSystem<T>,
    p: &SymMatrix<T>,
    rho2: T,
    m: T,
    l: T,
) -> Result<LmiTerms<T>> {
    let (n, d) = (sys.n(), sys.d());
    check_dim("assemble_t (P order)", n, p.order())?;
    let half = T::half();
    let id = Matrix::identity(d);
    let zd_n = Matrix::zeros(d, n);
    let zd_d = Matrix::zeros(d, d);

    let ab = Matrix::block(&[&[sys.a(), sys.b()]])?;
    let m0 = congruence(&ab, p)?.sub(&sym_block_diag(&p.scale(rho2), &SymMatrix::zeros(d)))?;

    let eb = sys.e().mul(sys.b())?;
    let f1 = Matrix::block(&[&[&sys.ea_minus_c(), &eb], &[&zd_n, &id]])?;
    let c_minus_e = sys.c().sub(sys.e())?;
    let f2 = Matrix::block(&[&[&c_minus_e, &zd_d], &[&zd_n, &id]])?;
    let f3 = Matrix::block(&[&[sys.c(), &zd_d], &[&zd_n, &id]])?;

    let w1 = weight(l * half, half, T::zero(), d);
    let w2 = weight(-m * half, half, T::zero(), d);
    let w4 = weight(-m * l / (m + l), half, -(m + l).recip(), d);
    Ok(LmiTerms {
        m0,
        n1: congruence(&f1, &w1)?,
        n2: congruence(&f2, &w2)?,
        n3: congruence(&f3, &w2)?,
        n4: congruence(&f3, &w4)?,
    })
}

/// Assembles `T` of order `n + d` directly from the system matrices.
pub fn assemble_t<T: Scalar>(
    sys: &DiscreteSystem<T>,
    p: &SymMatrix<T>,
    a0: T,
    rho2: T,
    ell: T,
    m: T,
    l: T,
) -> Result<SymMatrix<T>> {
    let t = lmi_terms(sys, p, rho2, m, l)?;
    let first = t.n1.add(&t.n2)?.scale(a0 * rho2);
    let second = t.n1.add(&t.n3)?.scale(a0 * (T::one() - rho2));
    t.m0.add(&first)?.add(&second)?.add(&t.n4.scale(ell))
}

/// The 3×3 hat matrix `T̂` of the Nesterov family with `a₀ = 1`, `ℓ = 0`
/// and `P̂ = [[p11, p12], [p12, p22]]`, entry by entry.
#[allow(clippy::too_many_arguments)]
pub fn closed_form_that<T: Scalar>(
    delta: T,
    b: T,
    r: T,
    m: T,
    l: T,
    p11: T,
    p12: T,
    p22: T,
) -> SymMatrix<T> {
    let half = T::half();
    let alpha = delta * delta / m;
    let beta = T::one() - b * delta;
    let rho2 = T::one() - r * delta;
    let b2 = beta * beta;
    let d2 = delta * delta;
    let t11 =
        b2 * p11 + T::two() * delta * b2 * p12 + d2 * b2 * p22 - rho2 * p11 - d2 * b2 * m * half;
    let t12 = beta * p12 + delta * beta * p22 - rho2 * p12 - delta * beta * m * half
        + rho2 * delta * beta * m * half;
    let t13 =
        -alpha * beta * p11 / delta - T::two() * alpha * beta * p12 - delta * alpha * beta * p22
            + delta * beta * half;
    let t22 = p22 - rho2 * p22 - m * half + rho2 * m * half;
    let t23 = -alpha * p12 / delta - alpha * p22 + half - rho2 * half;
    let t33 = alpha * alpha * p11 / d2
        + T::two() * alpha * alpha * p12 / delta
        + alpha * alpha * p22
        + alpha * alpha * l * half
        - alpha;
    SymMatrix::new(3, vec![t11, t12, t13, t22, t23, t33]).expect("finite closed-form entries")
}

/// The closed-form `P̂ = (p11, p12, p22)` that zeroes `t₁₃` and `t₂₃`.
pub fn closed_form_p<T: Scalar>(delta: T, b: T, r: T, m: T) -> Result<(T, T, T)> {
    let denom = T::lit(4.0) * delta * r - T::lit(4.0);
    if denom.abs() <= T::lit(4.0) * T::epsilon() {
        return Err(Error::SingularParameter(format!(
            "δr = 1 (δ = {delta}, r = {r})"
        )));
    }
    let (d2, d3) = (delta * delta, delta * delta * delta);
    let b2 = b * b;
    let two = T::two();
    let num = b2 * d3 - b2 * delta - two * r * b * d3 + two * r * b * delta + T::lit(3.0) * r * d2
        - two * delta
        - r;
    let p22 = m * r * num / denom;
    let p11 = p22 * d2 - m * r * delta + m * T::half();
    let p12 = m * r * T::half() - delta * p22;
    Ok((p11, p12, p22))
}

/// `t₁₁t₂₂ - t₁₂²` at the closed-form `P̂`.
pub fn phi<T: Scalar>(r: T, b: T, delta: T, m: T, l: T) -> Result<T> {
    let (p11, p12, p22) = closed_form_p(delta, b, r, m)?;
    let t = closed_form_that(delta, b, r, m, l, p11, p12, p22);
    Ok(t.get(0, 0) * t.get(1, 1) - t.get(0, 1) * t.get(0, 1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCurvePoint<T> {
    pub b: T,
    pub r: T,
    pub feasible: bool,
    /// Largest eigenvalue of the (normalized) hat matrix at the solution.
    pub margin: T,
}

fn check_step<T: Scalar>(delta: T, m: T, l: T) -> Result<T> {
    if !(m > T::zero() && l >= m && l.is_finite()) {
        return Err(Error::Parameter(format!(
            "need 0 < m <= L, got m={m}, L={l}"
        )));
    }
    let kappa = l / m;
    let delta_max = kappa.sqrt().recip();
    if !(delta > T::zero() && delta <= delta_max * (T::one() + T::lit(1e-12))) {
        return Err(Error::Parameter(format!(
            "δ = {delta} must lie in (0, 1/√κ = {delta_max}]"
        )));
    }
    Ok(kappa)
}

/// Feasibility of the closed-form certificate at `r` with `m = 1`, `L = κ`.
fn closed_form_hat_check<T: Scalar>(delta: T, b: T, r: T, kappa: T) -> Result<(bool, T)> {
    let (p11, p12, p22) = closed_form_p(delta, b, r, T::one())?;
    let t = closed_form_that(delta, b, r, T::one(), kappa, p11, p12, p22);
    let margin = t.max_eig()?;
    let pt = SymMatrix::new(2, vec![p11, p12, p22 + T::half()])?;
    let tol = T::lit(HAT_TOL);
    Ok((margin <= tol && pt.min_eig()? > tol, margin))
}

fn bisect_root<T: Scalar>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, flo: T) -> (T, T) {
    let tol = T::lit(ROOT_TOL);
    while hi - lo > tol {
        let mid = (lo + hi) * T::half();
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) * flo > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

fn scan_upper<T: Scalar>(delta: T) -> T {
    let inv = delta.recip();
    if inv <= T::two() {
        inv * (T::one() - T::lit(1e-9))
    } else {
        T::two()
    }
}

/// The largest certified rate for friction `b`: the largest root of `φ` in
/// `(0, min(1/δ, 2))` at which the closed-form certificate is feasible, or
/// the trivially feasible `r = 0` when no root qualifies.
pub fn solve_rate<T: Scalar>(b: T, delta: T, m: T, l: T) -> Result<RateCurvePoint<T>> {
    let kappa = check_step(delta, m, l)?;
    let f = |r: T| phi(r, b, delta, T::one(), kappa).unwrap_or(T::nan());
    let upper = scan_upper(delta);
    let grid: Vec<T> = (0..=SCAN_STEPS)
        .map(|i| upper * T::from_count(i) / T::from_count(SCAN_STEPS))
        .collect();
    let vals: Vec<T> = grid.iter().map(|&r| f(r)).collect();
    for i in (1..SCAN_STEPS).rev() {
        let (fa, fb) = (vals[i], vals[i + 1]);
        if !(fa * fb < T::zero() || fb == T::zero()) {
            continue;
        }
        let (lo, hi) = if fb == T::zero() {
            (grid[i + 1], grid[i + 1])
        } else {
            bisect_root(f, grid[i], grid[i + 1], fa)
        };
        // prefer the larger endpoint; fall back to the other side of the root
        for r in [hi, lo] {
            let (ok, margin) = closed_form_hat_check(delta, b, r, kappa)?;
            if ok {
                return Ok(RateCurvePoint {
                    b,
                    r,
                    feasible: true,
                    margin,
                });
            }
        }
    }
    let (ok, margin) = closed_form_hat_check(delta, b, T::zero(), kappa)?;
    Ok(RateCurvePoint {
        b,
        r: T::zero(),
        feasible: ok,
        margin,
    })
}

/// [`solve_rate`] over a grid of `b`, evaluated in parallel and returned in
/// grid order.
pub fn trace_curve<T: Scalar>(
    delta: T,
    m: T,
    l: T,
    b_grid: &[T],
) -> Result<Vec<RateCurvePoint<T>>> {
    if b_grid.is_empty() {
        return Err(Error::InvalidInput("b grid must be nonempty".into()));
    }
    b_grid
        .par_iter()
        .map(|&b| solve_rate(b, delta, m, l))
        .collect()
}

/// Like [`trace_curve`] for the `P ⪰ 0` baseline.
pub fn trace_baseline<T: Scalar>(
    delta: T,
    m: T,
    l: T,
    b_grid: &[T],
) -> Result<Vec<RateCurvePoint<T>>> {
    if b_grid.is_empty() {
        return Err(Error::InvalidInput("b grid must be nonempty".into()));
    }
    b_grid
        .par_iter()
        .map(|&b| baseline_psd_rate(b, delta, m, l))
        .collect()
}

/// Congruence that balances the hat matrix of the momentum family at small
/// `δ`, so one absolute tolerance is meaningful for all entries.
fn balanced_max_eig<T: Scalar>(t: &SymMatrix<T>, delta: T) -> T {
    let s1 = delta.sqrt().recip();
    let s = [s1, s1, delta.recip()];
    let scaled = SymMatrix::from_fn(3, |i, j| t.get(i, j) * s[i] * s[j]).expect("finite");
    scaled.max_eig().expect("finite")
}

fn from_cholesky<T: Scalar>(c: [T; 3]) -> (T, T, T) {
    let (l11, l21, l22) = (c[0].abs(), c[1], c[2].abs());
    (l11 * l11, l11 * l21, l21 * l21 + l22 * l22)
}

fn to_cholesky<T: Scalar>(p11: T, p12: T, p22: T) -> [T; 3] {
    let l11 = p11.max(T::zero()).sqrt();
    let l21 = if l11 > T::zero() {
        p12 / l11
    } else {
        T::zero()
    };
    let l22 = (p22 - l21 * l21).max(T::zero()).sqrt();
    [l11, l21, l22]
}

/// Nested grid refinement minimizing `objective` over `N` coordinates,
/// returning early once a value at or below `stop` is seen.
fn grid_refine<T: Scalar, const N: usize>(
    start: [T; N],
    mut half_width: T,
    points: usize,
    rounds: usize,
    shrink: T,
    stop: T,
    objective: impl Fn(&[T; N]) -> T,
) -> ([T; N], T) {
    let mut best = start;
    let mut best_val = objective(&best);
    if best_val <= stop {
        return (best, best_val);
    }
    let total = points.pow(N as u32);
    let step = |w: T, i: usize| -w + T::two() * w * T::from_count(i) / T::from_count(points - 1);
    for _ in 0..rounds {
        let center = best;
        for flat in 0..total {
            let mut idx = flat;
            let mut cand = center;
            for c in cand.iter_mut() {
                *c += step(half_width, idx % points);
                idx /= points;
            }
            let v = objective(&cand);
            if v < best_val {
                best_val = v;
                best = cand;
                if v <= stop {
                    return (best, best_val);
                }
            }
        }
        half_width /= shrink;
    }
    (best, best_val)
}

fn baseline_min_eig<T: Scalar>(delta: T, b: T, r: T, kappa: T) -> T {
    let one = T::one();
    let p22_opt = closed_form_p(delta, b, r, one)
        .map(|p| p.2)
        .unwrap_or(r * r * T::half());
    let p22 = p22_opt.max(r * r * T::half()).min(T::half());
    let seed = to_cholesky(
        p22 * delta * delta - r * delta + T::half(),
        r * T::half() - delta * p22,
        p22,
    );
    let (_, val) = grid_refine(seed, T::half(), 21, 3, T::lit(5.0), T::lit(HAT_TOL), |c| {
        let (p11, p12, p22) = from_cholesky(*c);
        balanced_max_eig(
            &closed_form_that(delta, b, r, one, kappa, p11, p12, p22),
            delta,
        )
    });
    val
}

/// The best rate provable when `P̂` itself is required to be positive
/// semidefinite: bisection on `r` with an inner search over `P̂ = LLᵀ`.
pub fn baseline_psd_rate<T: Scalar>(b: T, delta: T, m: T, l: T) -> Result<RateCurvePoint<T>> {
    let kappa = check_step(delta, m, l)?;
    let tol = T::lit(HAT_TOL);
    let mut lo = T::zero();
    let mut hi = delta.recip().min(T::two());
    let mut lo_val = baseline_min_eig(delta, b, lo, kappa);
    if lo_val > tol {
        return Ok(RateCurvePoint {
            b,
            r: lo,
            feasible: false,
            margin: lo_val,
        });
    }
    while hi - lo > T::lit(1e-7) {
        let mid = (lo + hi) * T::half();
        let v = baseline_min_eig(delta, b, mid, kappa);
        if v <= tol {
            lo = mid;
            lo_val = v;
        } else {
            hi = mid;
        }
    }
    Ok(RateCurvePoint {
        b,
        r: lo,
        feasible: true,
        margin: lo_val,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateReport<T> {
    pub t_max_eig: T,
    pub ptilde_min_eig: T,
    pub tol: T,
    pub feasible: bool,
}

/// Checks a certificate through [`assemble_t`] with the tolerance
/// `1e-9 · max(max|T|, max|P̃|)`, i.e. [`HAT_TOL`] relative to the scale of
/// the certificate.
pub fn verify_certificate<T: Scalar>(
    sys: &DiscreteSystem<T>,
    cert: &DiscreteCertificate<T>,
) -> Result<CertificateReport<T>> {
    let t = cert.t_matrix(sys)?;
    let pt = cert.ptilde(sys)?;
    let scale = t.max_abs().max(pt.max_abs()).max(T::min_positive_value());
    verify_certificate_with_tol(sys, cert, T::lit(HAT_TOL) * scale)
}

pub fn verify_certificate_with_tol<T: Scalar>(
    sys: &DiscreteSystem<T>,
    cert: &DiscreteCertificate<T>,
    tol: T,
) -> Result<CertificateReport<T>> {
    let t = cert.t_matrix(sys)?;
    let pt = cert.ptilde(sys)?;
    let t_max_eig = t.max_eig()?;
    let ptilde_min_eig = pt.min_eig()?;
    Ok(CertificateReport {
        t_max_eig,
        ptilde_min_eig,
        tol,
        feasible: t_max_eig <= tol && ptilde_min_eig > tol,
    })
}

/// `c = t₁₁/(mδ)` split into the part that grows with `κ` and the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstruction<T> {
    pub c: T,
    /// `[t₁₁(L) - t₁₁(L = m)]/(mδ)`, which equals `δ(κ-1)(β-γ)²/2`.
    pub kappa_term: T,
    pub remainder: T,
}

fn momentum_params<T: Scalar>(
    sys: &DiscreteSystem<T>,
) -> Result<(DiscreteSystem<T>, MethodParams<T>)> {
    match (sys.hat_system(), sys.params()) {
        (Some(h), Some(p)) if h.n() == 2 => Ok((h, *p)),
        _ => Err(Error::InvalidInput(
            "need a momentum-family system with hat factors".into(),
        )),
    }
}

/// Evaluates `c` for a momentum-family system at hat `P̂` and rate `r`
/// (`a₀ = 1`, `ℓ = 0`).
pub fn obstruction_c<T: Scalar>(
    sys: &DiscreteSystem<T>,
    phat: &SymMatrix<T>,
    r: T,
) -> Result<Obstruction<T>> {
    let (hat, p) = momentum_params(sys)?;
    let rho2 = T::one() - r * p.delta;
    let t11 = |l: T| -> Result<T> {
        Ok(assemble_t(&hat, phat, T::one(), rho2, T::zero(), p.m, l)?.get(0, 0))
    };
    let scale = p.m * p.delta;
    let c = t11(p.l)? / scale;
    let kappa_term = (t11(p.l)? - t11(p.m)?) / scale;
    Ok(Obstruction {
        c,
        kappa_term,
        remainder: c - kappa_term,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome<T> {
    pub feasible: bool,
    /// Largest eigenvalue of the balanced hat `T̂` at the best point found.
    pub best_max_eig: T,
    pub ptilde_min_eig: T,
    pub phat: SymMatrix<T>,
    pub ell: T,
}

/// Searches for a hat certificate `(P̂, ℓ)` at rate `r` for any member of the
/// momentum family (including `γ ≠ β`), with `a₀ = 1` and `m` normalized to 1.
/// `P̃ = P̂ + ½ÊᵀÊ` is parametrized as `LLᵀ`, so only `T̂ ⪯ 0` is searched.
pub fn certify_by_search<T: Scalar>(sys: &DiscreteSystem<T>, r: T) -> Result<SearchOutcome<T>> {
    let (_, p) = momentum_params(sys)?;
    let one = T::one();
    let kappa = p.l / p.m;
    let norm =
        crate::discrete::generalized_system(p.delta * p.delta, p.beta, p.gamma, one, kappa, 1)?;
    let rho2 = one - r * p.delta;
    if !(rho2 > T::zero() && rho2 <= one) {
        return Err(Error::Parameter(format!(
            "rate r = {r} gives ρ² = {rho2} outside (0, 1]"
        )));
    }
    // T is affine in (p11, p12, p22, ℓ): precompute the basis
    let at = |pp: [T; 3], ell: T| -> Result<SymMatrix<T>> {
        let ph = SymMatrix::new(2, pp.to_vec())?;
        assemble_t(&norm, &ph, one, rho2, ell, one, kappa)
    };
    let zero = T::zero();
    let t0 = at([zero; 3], zero)?;
    let basis = [
        at([one, zero, zero], zero)?.sub(&t0)?,
        at([zero, one, zero], zero)?.sub(&t0)?,
        at([zero, zero, one], zero)?.sub(&t0)?,
        at([zero; 3], one)?.sub(&t0)?,
    ];
    let eval_t = |pp: (T, T, T), ell: T| -> SymMatrix<T> {
        let coef = [pp.0, pp.1, pp.2, ell];
        SymMatrix::from_fn(3, |i, j| {
            t0.get(i, j) + (0..4).map(|k| coef[k] * basis[k].get(i, j)).sum::<T>()
        })
        .expect("finite")
    };
    let to_p = |c: &[T; 4]| {
        let (a, b, cc) = from_cholesky([c[0], c[1], c[2]]);
        ((a, b, cc - T::half()), c[3].abs())
    };
    let objective = |c: &[T; 4]| {
        let (pp, ell) = to_p(c);
        balanced_max_eig(&eval_t(pp, ell), p.delta)
    };

    let mut seeds = vec![[T::half().sqrt(), zero, T::half().sqrt(), zero]];
    if let Ok((p11, p12, p22)) = closed_form_p(p.delta, p.b, r, one) {
        let c = to_cholesky(p11, p12, p22 + T::half());
        seeds.push([c[0], c[1], c[2], zero]);
    }
    let start = seeds
        .into_iter()
        .min_by(|a, b| {
            objective(a)
                .partial_cmp(&objective(b))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("nonempty seeds");
    let (best, best_val) = grid_refine(
        start,
        T::half(),
        13,
        8,
        T::lit(3.0),
        T::neg_infinity(),
        objective,
    );
    let (pp, ell) = to_p(&best);
    let phat = SymMatrix::new(2, vec![pp.0, pp.1, pp.2])?;
    let ptilde_min_eig = SymMatrix::new(2, vec![pp.0, pp.1, pp.2 + T::half()])?.min_eig()?;
    let tol = T::lit(HAT_TOL);
    Ok(SearchOutcome {
        feasible: best_val <= tol && ptilde_min_eig > tol,
        best_max_eig: best_val,
        ptilde_min_eig,
        phat,
        ell,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{generalized_system, gradient_descent_system, nesterov_system_lenient};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hat_sys(delta: f64, b: f64, m: f64, l: f64) -> DiscreteSystem<f64> {
        nesterov_system_lenient(delta * delta / m, b, m, l, 1).unwrap()
    }

    fn rel_close(a: &SymMatrix<f64>, b: &SymMatrix<f64>, tol: f64) -> bool {
        let scale = a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE);
        a.packed()
            .iter()
            .zip(b.packed())
            .all(|(x, y)| (x - y).abs() <= tol * scale)
    }

    #[test]
    fn gradient_descent_classical_certificate() {
        let (m, l) = (0.5, 4.0);
        let sys = gradient_descent_system(1.0 / l, 1).unwrap();
        // V = f-gap only: P = 0, a₀ = 1, ρ² = 1 - m/L
        let p = SymMatrix::zeros(1);
        let t = assemble_t(&sys, &p, 1.0, 1.0 - m / l, 0.0, m, l).unwrap();
        assert!(t.is_nsd(1e-12).unwrap(), "{t:?}");
        let t_fast = assemble_t(&sys, &p, 1.0, 1.0 - 1.5 * m / l, 0.0, m, l).unwrap();
        assert!(!t_fast.is_nsd(0.0).unwrap());
    }

    #[test]
    fn homogeneity_in_p_and_a0() {
        let sys = hat_sys(0.1, 1.7, 1.0, 100.0);
        let p = SymMatrix::new(2, vec![0.4, 0.1, 0.3]).unwrap();
        let t1 = assemble_t(&sys, &p, 1.0, 0.9, 0.2, 1.0, 100.0).unwrap();
        let t2 = assemble_t(&sys, &p.scale(2.0), 2.0, 0.9, 0.4, 1.0, 100.0).unwrap();
        assert!(rel_close(&t2, &t1.scale(2.0), 1e-14));
    }

    #[test]
    fn n3_matches_hand_expansion() {
        let (delta, b, m, l) = (0.1, 1.5, 2.0, 50.0);
        let sys = hat_sys(delta, b, m, l);
        let beta = 1.0 - b * delta;
        let terms = lmi_terms(&sys, &SymMatrix::zeros(2), 0.9, m, l).unwrap();
        // F3 = [[δβ, 1, 0], [0, 0, 1]], W2 = [[-m/2, 1/2], [1/2, 0]]
        let c1 = delta * beta;
        let expect = SymMatrix::new(
            3,
            vec![
                -m / 2.0 * c1 * c1,
                -m / 2.0 * c1,
                c1 / 2.0,
                -m / 2.0,
                0.5,
                0.0,
            ],
        )
        .unwrap();
        assert!(rel_close(&terms.n3, &expect, 1e-15));
    }

    #[test]
    fn closed_form_coupling_entries_vanish() {
        let (delta, b, r, m, l) = (0.05f64, 1.8, 1.1, 3.0, 1200.0);
        let (p11, p12, p22) = closed_form_p(delta, b, r, m).unwrap();
        let t = closed_form_that(delta, b, r, m, l, p11, p12, p22);
        assert!(t.get(0, 2).abs() <= 1e-15);
        assert!(t.get(1, 2).abs() <= 1e-15);
        let alpha = delta * delta / m;
        assert_relative_eq!(
            t.get(2, 2),
            (alpha * alpha * l - alpha) / 2.0,
            max_relative = 1e-12
        );
        let (q11, q12, q22) = closed_form_p(0.1, b, r, 1.0).unwrap();
        let t = closed_form_that(0.1, b, r, 1.0, 100.0, q11, q12, q22);
        assert!(t.get(2, 2).abs() <= 1e-17);
    }

    #[test]
    fn closed_form_p_special_values() {
        assert_eq!(closed_form_p(0.1, 2.0, 0.0, 3.0).unwrap(), (1.5, 0.0, 0.0));
        assert!(matches!(
            closed_form_p(0.5, 1.0, 2.0, 1.0),
            Err(Error::SingularParameter(_))
        ));
        // δ → 0 gives the continuous values m/2, mr/2, mr²/4
        let (p11, p12, p22) = closed_form_p(1e-7, 2.0, 1.3, 2.0).unwrap();
        assert_relative_eq!(p11, 1.0, max_relative = 1e-6);
        assert_relative_eq!(p12, 1.3, max_relative = 1e-6);
        assert_relative_eq!(p22, 2.0 * 1.3 * 1.3 / 4.0, max_relative = 1e-6);
    }

    #[test]
    fn phi_at_zero_and_sign_change() {
        for b in [0.5, 1.0, 2.0, 3.0] {
            assert_eq!(phi(0.0, b, 0.01, 1.0, 1e4).unwrap(), 0.0);
            let (p11, p12, p22) = closed_form_p(0.01, b, 0.0, 1.0).unwrap();
            let t = closed_form_that(0.01, b, 0.0, 1.0, 1e4, p11, p12, p22);
            assert_eq!(t.get(1, 1), 0.0);
        }
        let pt = solve_rate(2.0, 1e-3, 1.0, 1e6).unwrap();
        let f = |r: f64| phi(r, 2.0, 1e-3, 1.0, 1e6).unwrap();
        assert!(f(pt.r - 1e-4) * f(pt.r + 1e-4) < 0.0);
    }

    #[test]
    fn t22_factorization() {
        let (delta, b, r, m) = (0.02, 1.4, 0.9, 1.7);
        let (p11, p12, p22) = closed_form_p(delta, b, r, m).unwrap();
        let t = closed_form_that(delta, b, r, m, 1e3, p11, p12, p22);
        assert_relative_eq!(
            t.get(1, 1),
            r * delta * (p22 - m / 2.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn standard_nesterov_rate() {
        let pt = solve_rate(2.0f64, 1e-3, 1.0, 1e6).unwrap();
        assert!(pt.feasible);
        assert!((pt.r - 4.0 / 3.0).abs() <= 0.01, "{pt:?}");
        assert!(pt.margin <= HAT_TOL);
    }

    #[test]
    fn undamped_rate_is_zero() {
        let pt = solve_rate(0.0, 1e-3, 1.0, 1e6).unwrap();
        assert_eq!(pt.r, 0.0);
    }

    #[test]
    fn step_bound_enforced() {
        assert!(solve_rate(2.0, 0.2, 1.0, 100.0).is_err());
        assert!(solve_rate(2.0, 0.1, 1.0, 100.0).is_ok());
    }

    #[test]
    fn on_curve_structure() {
        for b in [0.6, 1.2, 2.0, 2.6, 3.2] {
            for (delta, kappa) in [(1e-3, 1e6), (0.1, 1e2), (0.05, 400.0)] {
                let pt = solve_rate(b, delta, 1.0f64, kappa).unwrap();
                assert!(pt.feasible && pt.r > 0.0, "b={b} δ={delta}: {pt:?}");
                let (p11, p12, p22) = closed_form_p(delta, b, pt.r, 1.0).unwrap();
                let t = closed_form_that(delta, b, pt.r, 1.0, kappa, p11, p12, p22);
                assert!(t.get(0, 2).abs() <= 1e-12 && t.get(1, 2).abs() <= 1e-12);
                assert!(t.get(2, 2) <= 1e-15);
                assert!(t.get(0, 0) <= 0.0 && t.get(1, 1) <= 0.0);
                let det = t.get(0, 0) * t.get(1, 1) - t.get(0, 1) * t.get(0, 1);
                assert!(det.abs() <= 1e-9, "{det}");
            }
        }
    }

    #[test]
    fn certified_point_verified_through_full_assembly() {
        let (delta, m, kappa) = (0.01, 0.01, 1e4);
        let l = m * kappa;
        for b in [1.0, 2.0, 2.5] {
            let pt = solve_rate(b, delta, m, l).unwrap();
            for d in [1, 3] {
                let sys = nesterov_system_lenient(delta * delta / m, b, m, l, d).unwrap();
                let cert = DiscreteCertificate::from_rate(b, pt.r, delta, m, l, d).unwrap();
                let rep = verify_certificate(&sys, &cert).unwrap();
                assert!(rep.feasible, "b={b} d={d}: {rep:?}");
                let inflated =
                    DiscreteCertificate::from_rate(b, pt.r * 1.01, delta, m, l, d).unwrap();
                assert!(!verify_certificate(&sys, &inflated).unwrap().feasible);
            }
        }
    }

    #[test]
    fn degenerate_certificate_report() {
        let sys = hat_sys(0.1, 2.0, 1.0, 100.0);
        let cert =
            DiscreteCertificate::new(SymMatrix::zeros(2), 1.0, 1.0, 0.0, 1.0, 100.0).unwrap();
        let rep = verify_certificate(&sys, &cert).unwrap();
        assert!(rep.t_max_eig.is_finite() && rep.ptilde_min_eig.is_finite());
        assert!(DiscreteCertificate::new(SymMatrix::zeros(2), 0.0, 0.5, 0.0, 1.0, 2.0).is_err());
        assert!(DiscreteCertificate::new(SymMatrix::zeros(2), 1.0, 1.5, 0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn closed_form_equals_direct_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let kappa = 10f64.powf(rng.gen_range(0.0..6.0));
            let m = 10f64.powf(rng.gen_range(-3.0..1.0));
            let l = m * kappa;
            let delta = rng.gen_range(0.01..=1.0) / kappa.sqrt();
            let b = rng.gen_range(0.0..4.0);
            let r = rng.gen_range(0.0..2.0f64.min(0.99 / delta));
            let (p11, p12, p22) = closed_form_p(delta, b, r, m).unwrap();
            let closed = closed_form_that(delta, b, r, m, l, p11, p12, p22);
            let sys = hat_sys(delta, b, m, l);
            let phat = SymMatrix::new(2, vec![p11, p12, p22]).unwrap();
            let direct = assemble_t(&sys, &phat, 1.0, 1.0 - r * delta, 0.0, m, l).unwrap();
            assert!(
                rel_close(&closed, &direct, 1e-10),
                "{closed:?} vs {direct:?}"
            );
            let full = assemble_t(
                &nesterov_system_lenient(delta * delta / m, b, m, l, 2).unwrap(),
                &phat.kron_identity(2),
                1.0,
                1.0 - r * delta,
                0.0,
                m,
                l,
            )
            .unwrap();
            assert!(rel_close(&full.hat_collapse(2).unwrap(), &direct, 1e-12));
        }
    }

    #[test]
    fn curve_scale_invariance() {
        let grid = [0.5, 1.5, 2.5];
        let a = trace_curve(0.05f64, 1.0, 400.0, &grid).unwrap();
        let b = trace_curve(0.05, 7.0, 2800.0, &grid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.b, y.b);
            assert!((x.r - y.r).abs() <= 1e-12);
        }
        assert_eq!(trace_curve(0.05, 1.0, 400.0, &[2.0]).unwrap().len(), 1);
        assert!(trace_curve::<f64>(0.05, 1.0, 400.0, &[]).is_err());
    }

    #[test]
    fn coarse_condition_curve_shape() {
        let grid: Vec<f64> = (0..=35).map(|i| 0.1 * i as f64).collect();
        let pts = trace_curve(0.1, 1.0, 100.0, &grid).unwrap();
        let (imax, _) = pts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.r.partial_cmp(&b.1.r).unwrap())
            .unwrap();
        assert!(imax > 3 && imax < pts.len() - 3);
        assert!(grid[imax] < 3.0 * 2f64.sqrt() / 2.0);
        assert!(pts[1].r < pts[imax].r && pts[pts.len() - 1].r < pts[imax].r);
    }

    #[test]
    fn baseline_examples() {
        let base = baseline_psd_rate(2.0f64, 1e-3, 1.0, 1e6).unwrap();
        assert!(base.feasible);
        assert!((base.r - 1.0).abs() <= 0.02, "{base:?}");
        let zero_r = baseline_min_eig(1e-3, 2.0, 0.0, 1e6);
        assert!(zero_r <= HAT_TOL);
    }

    #[test]
    fn baseline_dominated_on_small_grid() {
        for b in [1.0, 2.0, 3.0] {
            let imp = solve_rate(b, 0.1, 1.0, 100.0).unwrap();
            let base = baseline_psd_rate(b, 0.1, 1.0, 100.0).unwrap();
            assert!(base.r <= imp.r + 1e-6, "b={b}: {} > {}", base.r, imp.r);
        }
    }

    #[test]
    fn obstruction_terms() {
        let kappa: f64 = 1e4;
        let delta = kappa.sqrt().recip();
        let b = 2.0 / (1.0 + delta);
        let beta = 1.0 - b * delta;
        let phat = SymMatrix::new(2, vec![0.5, 0.6, 0.4]).unwrap();
        let hb = generalized_system(delta * delta, beta, 0.0, 1.0, kappa, 1).unwrap();
        let ob = obstruction_c(&hb, &phat, 1.0).unwrap();
        let expect = delta * (kappa - 1.0) * beta * beta / 2.0;
        assert_relative_eq!(ob.kappa_term, expect, max_relative = 1e-10);
        assert!(ob.kappa_term > 40.0);
        let nest = generalized_system(delta * delta, beta, beta, 1.0, kappa, 1).unwrap();
        assert!(obstruction_c(&nest, &phat, 1.0).unwrap().kappa_term.abs() <= 1e-12);
        let flat = generalized_system(0.01, 0.8, 0.0, 1.0, 1.0, 1).unwrap();
        assert_eq!(obstruction_c(&flat, &phat, 1.0).unwrap().kappa_term, 0.0);
        let gd = gradient_descent_system(0.1, 1).unwrap();
        assert!(obstruction_c(&gd, &phat, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn congruence_symmetric_and_eigs_consistent(
            f in proptest::collection::vec(-2.0f64..2.0, 6),
            w in proptest::collection::vec(-2.0f64..2.0, 3),
        ) {
            let fm = Matrix::new(2, 3, f).unwrap();
            let ws = SymMatrix::new(2, w).unwrap();
            let c = congruence(&fm, &ws).unwrap();
            let full = fm.transpose().mul(&ws.to_matrix()).unwrap().mul(&fm).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((c.get(i, j) - full.get(i, j)).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn closed_form_zeroes_coupling(delta in 1e-3f64..0.5, b in 0.0f64..4.0, r in 0.0f64..1.9, m in 1e-3f64..10.0) {
            prop_assume!((delta * r - 1.0).abs() > 1e-3);
            let (p11, p12, p22) = closed_form_p(delta, b, r, m).unwrap();
            let l = m / (delta * delta);
            let t = closed_form_that(delta, b, r, m, l, p11, p12, p22);
            let scale = 1.0 + p11.abs() + p12.abs() + p22.abs() + m;
            prop_assert!(t.get(0, 2).abs() <= 1e-12 * scale);
            prop_assert!(t.get(1, 2).abs() <= 1e-12 * scale);
        }
    }
}
