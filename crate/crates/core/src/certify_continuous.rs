//! Certificates for the Polyak ODE `ẍ + b̄√m ẋ + ∇f(x) = 0`, written as
//! `ξ̇ = Āξ + B̄u`, `u = ∇f(C̄ξ)` with `ξ = [v; x]` and `v = ẋ/√m`.
//!
//! A certificate `(P̄, λ, σ)` is valid when
//! `T̄ = M̄⁰ + M̄¹ + λM̄² + σM̄³ ⪯ 0` and `P̃ = P̄ + (m/2)C̄ᵀC̄ ≻ 0`; then
//! `V = e^{λt}(f(x) - f* + (ξ-ξ*)ᵀP̄(ξ-ξ*))` is nonincreasing. Rates are
//! reported as `r̄ = λ/√m`.

use crate::certify_discrete::{CertificateReport, HAT_TOL};
use crate::error::{check_dim, Error, Result};
use crate::matrices::{congruence, Matrix, SymMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSystem<T> {
    a: Matrix<T>,
    b: Matrix<T>,
    c: Matrix<T>,
    pub b_bar: T,
    pub m: T,
    pub l: T,
}

impl<T: Scalar> ContinuousSystem<T> {
    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }
    pub fn b(&self) -> &Matrix<T> {
        &self.b
    }
    pub fn c(&self) -> &Matrix<T> {
        &self.c
    }
    pub fn n(&self) -> usize {
        self.a.rows()
    }
    pub fn d(&self) -> usize {
        self.b.cols()
    }
}

pub fn polyak_system<T: Scalar>(b_bar: T, m: T, l: T, d: usize) -> Result<ContinuousSystem<T>> {
    if !(b_bar.is_finite() && b_bar > T::zero()) {
        return Err(Error::Parameter(format!("b̄ must be positive, got {b_bar}")));
    }
    if !(m > T::zero() && l >= m && l.is_finite()) {
        return Err(Error::Parameter(format!(
            "need 0 < m <= L, got m={m}, L={l}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    let sm = m.sqrt();
    let z = T::zero();
    let a = Matrix::from_rows(&[&[-b_bar * sm, z], &[sm, z]])?;
    let b = Matrix::from_rows(&[&[-sm.recip()], &[z]])?;
    let c = Matrix::from_rows(&[&[z, T::one()]])?;
    Ok(ContinuousSystem {
        a: a.kron_identity(d),
        b: b.kron_identity(d),
        c: c.kron_identity(d),
        b_bar,
        m,
        l,
    })
}

/// Assembles `T̄` of order `n + d` from the system matrices.
pub fn assemble_tbar<T: Scalar>(
    sys: &ContinuousSystem<T>,
    p_bar: &SymMatrix<T>,
    lambda: T,
    sigma: T,
) -> Result<SymMatrix<T>> {
    let (n, d) = (sys.n(), sys.d());
    check_dim("assemble_tbar (P order)", n, p_bar.order())?;
    let (m, l) = (sys.m, sys.l);
    let half = T::half();
    let p = p_bar.to_matrix();
    let pa = p.mul(sys.a())?;
    let top_left = pa.add(&pa.transpose())?.add(&p.scale(lambda))?;
    let pb = p.mul(sys.b())?;
    let m0 = Matrix::block(&[&[&top_left, &pb], &[&pb.transpose(), &Matrix::zeros(d, d)]])?;

    let ca = sys.c().mul(sys.a())?;
    let cb = sys.c().mul(sys.b())?;
    let m1 = Matrix::block(&[
        &[&Matrix::zeros(n, n), &ca.transpose()],
        &[&ca, &cb.add(&cb.transpose())?],
    ])?
    .scale(half);

    let f = Matrix::block(&[
        &[sys.c(), &Matrix::zeros(d, d)],
        &[&Matrix::zeros(d, n), &Matrix::identity(d)],
    ])?;
    let w2 = SymMatrix::new(2, vec![-m * half, half, T::zero()])?.kron_identity(d);
    let w4 = SymMatrix::new(2, vec![-m * l / (m + l), half, -(m + l).recip()])?.kron_identity(d);
    let m2 = congruence(&f, &w2)?;
    let m3 = congruence(&f, &w4)?;

    SymMatrix::from_matrix(&m0.add(&m1)?)?
        .add(&m2.scale(lambda))?
        .add(&m3.scale(sigma))
}

/// The hat `T̄` (order 3, `σ = 0`, `λ = √m r̄`) entry by entry.
pub fn closed_form_tbar_hat<T: Scalar>(
    b_bar: T,
    r_bar: T,
    m: T,
    p11: T,
    p12: T,
    p22: T,
) -> SymMatrix<T> {
    let sm = m.sqrt();
    let lambda = sm * r_bar;
    let two = T::two();
    let half = T::half();
    let t11 = -two * b_bar * sm * p11 + two * sm * p12 + lambda * p11;
    let t12 = -b_bar * sm * p12 + sm * p22 + lambda * p12;
    let t13 = -p11 / sm + sm * half;
    let t22 = lambda * p22 - m * half * lambda;
    let t23 = -p12 / sm + lambda * half;
    SymMatrix::new(3, vec![t11, t12, t13, t22, t23, T::zero()]).expect("finite closed-form entries")
}

/// `Δ = -√m r̄ (3m^{3/2} r̄/2 - b̄ m^{3/2})(m/2 - p₂₂) - m(p₂₂ + r̄²m/2 - b̄r̄m/2)²`.
pub fn delta_discriminant<T: Scalar>(b_bar: T, r_bar: T, p22: T, m: T) -> T {
    let half = T::half();
    let m32 = m * m.sqrt();
    let first = -m.sqrt() * r_bar * (T::lit(1.5) * m32 * r_bar - b_bar * m32) * (m * half - p22);
    let inner = p22 + r_bar * r_bar * m * half - b_bar * r_bar * m * half;
    first - m * inner * inner
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousRate<T> {
    pub r_bar: T,
    /// `false` at `r̄ = √2`, which is a supremum but not a certifiable rate.
    pub attained: bool,
}

/// `3√2/2`, where the two rate branches meet at `r̄ = √2`.
pub fn branch_point<T: Scalar>() -> T {
    T::lit(1.5) * T::SQRT_2()
}

pub fn continuous_rate<T: Scalar>(b_bar: T) -> Result<ContinuousRate<T>> {
    if !(b_bar.is_finite() && b_bar > T::zero()) {
        return Err(Error::Parameter(format!("b̄ must be positive, got {b_bar}")));
    }
    let r_bar = if b_bar <= branch_point() {
        T::two() * b_bar / T::lit(3.0)
    } else {
        // b̄ - √(b̄² - 4), rationalized
        T::lit(4.0) / (b_bar + (b_bar * b_bar - T::lit(4.0)).sqrt())
    };
    let attained = (r_bar - T::SQRT_2()).abs() > T::lit(4.0) * T::epsilon();
    Ok(ContinuousRate { r_bar, attained })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousCertificate<T> {
    pub p_bar: SymMatrix<T>,
    pub lambda: T,
    pub sigma: T,
    pub m: T,
    pub l: T,
}

impl<T: Scalar> ContinuousCertificate<T> {
    pub fn new(p_bar: SymMatrix<T>, lambda: T, sigma: T, m: T, l: T) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= T::zero()) {
            return Err(Error::InvalidCertificate(format!(
                "λ must be >= 0, got {lambda}"
            )));
        }
        if !(sigma.is_finite() && sigma >= T::zero()) {
            return Err(Error::InvalidCertificate(format!(
                "σ must be >= 0, got {sigma}"
            )));
        }
        if !(m > T::zero() && l >= m && l.is_finite()) {
            return Err(Error::InvalidCertificate(format!(
                "need 0 < m <= L, got m={m}, L={l}"
            )));
        }
        Ok(Self {
            p_bar,
            lambda,
            sigma,
            m,
            l,
        })
    }

    pub fn r_bar(&self) -> T {
        self.lambda / self.m.sqrt()
    }

    pub fn ptilde(&self, sys: &ContinuousSystem<T>) -> Result<SymMatrix<T>> {
        let ctc = SymMatrix::from_matrix(&sys.c().transpose().mul(sys.c())?)?;
        self.p_bar.add(&ctc.scale(self.m * T::half()))
    }

    pub fn t_matrix(&self, sys: &ContinuousSystem<T>) -> Result<SymMatrix<T>> {
        assemble_tbar(sys, &self.p_bar, self.lambda, self.sigma)
    }
}

/// The closed-form `P̄ = m [[1/2, r̄/2], [r̄/2, r̄²/4]] ⊗ I_d`.
pub fn closed_form_p_bar<T: Scalar>(r_bar: T, m: T, d: usize) -> SymMatrix<T> {
    let half = T::half();
    SymMatrix::new(
        2,
        vec![m * half, m * r_bar * half, m * r_bar * r_bar / T::lit(4.0)],
    )
    .expect("finite")
    .kron_identity(d)
}

/// The `P̄ ⪰ 0` variant `m [[1/2, r̄/2], [r̄/2, r̄²/2]] ⊗ I_d`: the same
/// first row with `p̄₂₂` moved to the semidefinite boundary.
pub fn psd_baseline_p<T: Scalar>(r_bar: T, m: T, d: usize) -> SymMatrix<T> {
    let half = T::half();
    SymMatrix::new(
        2,
        vec![m * half, m * r_bar * half, m * r_bar * r_bar * half],
    )
    .expect("finite")
    .kron_identity(d)
}

/// Verifies through [`assemble_tbar`] with tolerance `1e-9 · max(max|T̄|, max|P̃|)`.
pub fn verify_continuous<T: Scalar>(
    sys: &ContinuousSystem<T>,
    cert: &ContinuousCertificate<T>,
) -> Result<CertificateReport<T>> {
    let t = cert.t_matrix(sys)?;
    let pt = cert.ptilde(sys)?;
    let tol = T::lit(HAT_TOL) * t.max_abs().max(pt.max_abs()).max(T::min_positive_value());
    let t_max_eig = t.max_eig()?;
    let ptilde_min_eig = pt.min_eig()?;
    Ok(CertificateReport {
        t_max_eig,
        ptilde_min_eig,
        tol,
        feasible: t_max_eig <= tol && ptilde_min_eig > tol,
    })
}

/// Builds the closed-form certificate at rate `r̄` (`σ = 0`) and checks it on
/// the `m = 1` hat system. At the non-attained supremum `√2` the certificate
/// is built at `r̄ - 1e-9`.
pub fn build_certificate<T: Scalar>(
    b_bar: T,
    r_bar: T,
    m: T,
    l: T,
    d: usize,
) -> Result<ContinuousCertificate<T>> {
    let sup = continuous_rate(b_bar)?;
    let r = if !sup.attained && r_bar >= sup.r_bar - T::lit(1e-12) {
        sup.r_bar - T::lit(1e-9)
    } else {
        r_bar
    };
    if !(r.is_finite() && r > T::zero()) {
        return Err(Error::Parameter(format!(
            "rate must be positive, got {r_bar}"
        )));
    }
    let one = T::one();
    let hat_sys = polyak_system(b_bar, one, l / m, 1)?;
    let hat_cert =
        ContinuousCertificate::new(closed_form_p_bar(r, one, 1), r, T::zero(), one, l / m)?;
    let t_max = hat_cert.t_matrix(&hat_sys)?.max_eig()?;
    let pt_min = hat_cert.ptilde(&hat_sys)?.min_eig()?;
    if !(t_max <= T::lit(HAT_TOL) && pt_min > T::zero()) {
        return Err(Error::CertificateInfeasible {
            max_eig: t_max.to_f64_lossy(),
            ptilde_min_eig: pt_min.to_f64_lossy(),
        });
    }
    ContinuousCertificate::new(closed_form_p_bar(r, m, d), m.sqrt() * r, T::zero(), m, l)
}

/// Best rate for the `P̄ ⪰ 0` choice: the largest `r̄ ≤ min(1, 2b̄/3)` with
/// `(b̄ - 3r̄/2)(1 - r̄²)/2 - r̄(r̄ - b̄/2)² ≥ 0`, the determinant condition on
/// the leading block of `T̄`.
pub fn psd_baseline_rate<T: Scalar>(b_bar: T) -> Result<T> {
    if !(b_bar.is_finite() && b_bar > T::zero()) {
        return Err(Error::Parameter(format!("b̄ must be positive, got {b_bar}")));
    }
    let half = T::half();
    let h = |r: T| {
        let q = r - b_bar * half;
        (b_bar - T::lit(1.5) * r) * (T::one() - r * r) * half - r * q * q
    };
    let upper = T::one().min(T::two() * b_bar / T::lit(3.0));
    if h(upper) >= T::zero() {
        return Ok(upper);
    }
    let n = 400;
    let mut prev = T::zero();
    for i in 1..=n {
        let r = upper * T::from_count(i) / T::from_count(n);
        if h(r) < T::zero() {
            let (mut lo, mut hi) = (prev, r);
            for _ in 0..200 {
                let mid = (lo + hi) * half;
                if mid <= lo || mid >= hi {
                    break;
                }
                if h(mid) >= T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(lo);
        }
        prev = r;
    }
    Ok(upper)
}

/// `λ_q`: twice the slowest modal decay rate of the linearized ODE over
/// curvatures `μ ∈ [m, L]`, i.e. the exact exponent of `‖x - x*‖²` on
/// quadratics.
pub fn quadratic_sharp_rate<T: Scalar>(b_bar: T, m: T, l: T) -> Result<T> {
    if !(b_bar.is_finite() && b_bar > T::zero()) {
        return Err(Error::Parameter(format!("b̄ must be positive, got {b_bar}")));
    }
    if !(m > T::zero() && l >= m && l.is_finite()) {
        return Err(Error::Parameter(format!(
            "need 0 < m <= L, got m={m}, L={l}"
        )));
    }
    let damp = b_bar * m.sqrt();
    let modal = |mu: T| {
        let root = T::two() * mu.sqrt();
        let disc = (damp - root) * (damp + root);
        if disc >= T::zero() {
            T::lit(4.0) * mu / (damp + disc.sqrt())
        } else {
            damp
        }
    };
    Ok(modal(m).min(modal(l)))
}

/// `(max σ(C̄ᵀC̄) / min σ(P̃)) e^{-λt} V₀`, a bound on `‖x(t) - x*‖²`.
pub fn convergence_bound_continuous<T: Scalar>(
    cert: &ContinuousCertificate<T>,
    sys: &ContinuousSystem<T>,
    v0: T,
    t: T,
) -> Result<T> {
    let pt_min = cert.ptilde(sys)?.min_eig()?;
    if pt_min <= T::zero() {
        return Err(Error::InvalidCertificate(format!(
            "P~ is not positive definite (min eigenvalue {pt_min})"
        )));
    }
    let ctc = SymMatrix::from_matrix(&sys.c().transpose().mul(sys.c())?)?;
    Ok(ctc.max_eig()? / pt_min * (-cert.lambda * t).exp() * v0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn system_examples() {
        let sys = polyak_system(2.0, 1.0, 10.0, 1).unwrap();
        assert_eq!(
            sys.a(),
            &Matrix::from_rows(&[&[-2.0, 0.0], &[1.0, 0.0]]).unwrap()
        );
        let xi_star = [0.0, 3.0];
        assert_eq!(sys.a().mul_vec(&xi_star).unwrap(), vec![0.0, 0.0]);
        assert!(polyak_system(0.0, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn linearization_roots() {
        // closed loop at curvature μ: Ā + B̄ μ C̄ has characteristic polynomial s² + b̄√m s + μ
        let (b_bar, m, mu) = (1.3, 0.4f64, 0.9);
        let sys = polyak_system(b_bar, m, 1.0, 1).unwrap();
        let k = sys
            .a()
            .add(&sys.b().mul(&sys.c().scale(mu)).unwrap())
            .unwrap();
        let trace = k.get(0, 0) + k.get(1, 1);
        let det = k.get(0, 0) * k.get(1, 1) - k.get(0, 1) * k.get(1, 0);
        assert_relative_eq!(-trace, b_bar * m.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(det, mu, max_relative = 1e-15);
    }

    #[test]
    fn tbar_structure() {
        let sys = polyak_system(1.7, 1.0, 50.0, 1).unwrap();
        let zero = SymMatrix::zeros(2);
        let t = assemble_tbar(&sys, &zero, 0.0, 0.0).unwrap();
        // only M̄¹ remains: ½ C̄Ā = [√m/2, 0] in the last row
        assert_relative_eq!(t.get(0, 2), 0.5);
        assert_eq!(t.get(1, 2), 0.0);
        assert_eq!(t.get(0, 0), 0.0);
        let p = SymMatrix::new(2, vec![0.3, 0.1, 0.7]).unwrap();
        let t = assemble_tbar(&sys, &p, 0.8, 0.0).unwrap();
        assert_eq!(t.get(2, 2), 0.0);
    }

    #[test]
    fn closed_form_coupling_and_factorization() {
        let (m, r) = (2.5f64, 1.1);
        let t = closed_form_tbar_hat(2.0, r, m, m / 2.0, m * r / 2.0, 0.3);
        assert!(t.get(0, 2).abs() <= 1e-15);
        assert!(t.get(1, 2).abs() <= 1e-15);
        let lambda = m.sqrt() * r;
        assert_relative_eq!(t.get(1, 1), lambda * (0.3 - m / 2.0), max_relative = 1e-14);
    }

    #[test]
    fn closed_form_matches_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..1000 {
            let b_bar = rng.gen_range(0.05..4.0);
            let r_bar = rng.gen_range(0.0..2.0);
            let m = 10f64.powf(rng.gen_range(-3.0..1.0));
            let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0) * m).collect();
            let closed = closed_form_tbar_hat(b_bar, r_bar, m, p[0], p[1], p[2]);
            let sys = polyak_system(b_bar, m, 10.0 * m, 1).unwrap();
            let direct =
                assemble_tbar(&sys, &SymMatrix::new(2, p).unwrap(), m.sqrt() * r_bar, 0.0).unwrap();
            let scale = closed.max_abs().max(direct.max_abs());
            for (a, b) in closed.packed().iter().zip(direct.packed()) {
                assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn discriminant_examples() {
        for r in [0.4, 1.0, 1.3] {
            assert!(delta_discriminant(1.5 * r, r, r * r / 4.0, 1.0f64).abs() <= 1e-15);
        }
        assert!(delta_discriminant(2.5, 1.0, 0.25, 1.0f64).abs() <= 1e-15);
        // stationary at p₂₂ = r̄²/4, where Δ is maximal
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let b = rng.gen_range(0.2..4.0);
            let r = rng.gen_range(0.1..1.4);
            let p = r * r / 4.0;
            let at = delta_discriminant(b, r, p, 1.0);
            for eps in [1e-3, 1e-2] {
                assert!(delta_discriminant(b, r, p + eps, 1.0) <= at);
                assert!(delta_discriminant(b, r, p - eps, 1.0) <= at);
            }
        }
        // the display equals t̄₁₁t̄₂₂ - t̄₁₂² at p̄₁₁ = m/2, p̄₁₂ = m r̄/2 for general m
        let (b, r, m, p22) = (1.9, 0.8, 0.37, 0.05);
        let t = closed_form_tbar_hat(b, r, m, m / 2.0, m * r / 2.0, p22);
        let det = t.get(0, 0) * t.get(1, 1) - t.get(0, 1) * t.get(0, 1);
        assert_relative_eq!(delta_discriminant(b, r, p22, m), det, max_relative = 1e-12);
    }

    #[test]
    fn rate_branches() {
        let r = continuous_rate(1.5).unwrap();
        assert_relative_eq!(r.r_bar, 1.0, max_relative = 1e-15);
        assert!(r.attained);
        let r = continuous_rate(2.5).unwrap();
        assert_relative_eq!(r.r_bar, 1.0, max_relative = 1e-15);
        let j = continuous_rate(branch_point::<f64>()).unwrap();
        assert!((j.r_bar - 2f64.sqrt()).abs() <= 1e-15);
        assert!(!j.attained);
        let above = continuous_rate(branch_point::<f64>() * (1.0 + 1e-13)).unwrap();
        assert!((above.r_bar - j.r_bar).abs() <= 1e-12);
        assert!(continuous_rate(0.0).is_err());
    }

    #[test]
    fn certificates() {
        let c = build_certificate(1.5, 0.99, 1.0, 100.0, 1).unwrap();
        let sys = polyak_system(1.5, 1.0, 100.0, 1).unwrap();
        assert!(verify_continuous(&sys, &c).unwrap().feasible);
        let pt = c.ptilde(&sys).unwrap();
        assert!(pt.is_pd(0.0).unwrap());
        for b in [1.0, 2.0, 3.0] {
            assert!(matches!(
                build_certificate(b, 1.45, 1.0, 100.0, 1),
                Err(Error::CertificateInfeasible { .. })
            ));
        }
        let sup = build_certificate(branch_point(), 2f64.sqrt(), 1.0, 100.0, 1).unwrap();
        assert!((sup.r_bar() - (2f64.sqrt() - 1e-9)).abs() <= 1e-12);
        let p = psd_baseline_p(1.0, 1.0, 1);
        assert!(SymMatrix::new(2, vec![p.get(0, 0), p.get(0, 1), p.get(1, 1)]).unwrap() == p);
        // P̃ at b̄ = 3r̄/2, r̄ = 1
        let c = build_certificate(1.5, 1.0, 1.0, 100.0, 1).unwrap();
        assert!(c.ptilde(&sys).unwrap().is_pd(0.0).unwrap());
    }

    #[test]
    fn certificate_m_scaling() {
        let (b, r, c) = (2.0, 1.2, 9.0f64);
        let a = build_certificate(b, r, 1.0, 50.0, 2).unwrap();
        let s = build_certificate(b, r, c, 50.0 * c, 2).unwrap();
        assert_eq!(s.p_bar, a.p_bar.scale(c));
        assert_relative_eq!(s.lambda, a.lambda * c.sqrt(), max_relative = 1e-15);
        let sa = polyak_system(b, 1.0, 50.0, 2).unwrap();
        let ss = polyak_system(b, c, 50.0 * c, 2).unwrap();
        assert_eq!(
            verify_continuous(&sa, &a).unwrap().feasible,
            verify_continuous(&ss, &s).unwrap().feasible
        );
    }

    #[test]
    fn sharp_rate_examples() {
        assert_relative_eq!(
            quadratic_sharp_rate(2.0, 1.0, 100.0).unwrap(),
            2.0,
            max_relative = 1e-15
        );
        let m = 0.01f64;
        let q = quadratic_sharp_rate(4.0, m, m).unwrap();
        assert_relative_eq!(
            q,
            2.0 * (2.0 - 3f64.sqrt()) * m.sqrt(),
            max_relative = 1e-12
        );
        assert!(quadratic_sharp_rate(1e-9, 1.0, 10.0).unwrap() < 1e-8);
    }

    #[test]
    fn baseline_rate_values() {
        assert_relative_eq!(psd_baseline_rate(2.0).unwrap(), 1.0, max_relative = 1e-12);
        for b in [0.5, 1.0, 2.0, 2.5, 4.0] {
            let base = psd_baseline_rate(b).unwrap();
            assert!(base <= continuous_rate(b).unwrap().r_bar + 1e-12);
            let sys = polyak_system(b, 1.0, 100.0, 1).unwrap();
            let cert = ContinuousCertificate::new(
                psd_baseline_p(base * (1.0 - 1e-9), 1.0, 1),
                base * (1.0 - 1e-9),
                0.0,
                1.0,
                100.0,
            )
            .unwrap();
            let t = cert.t_matrix(&sys).unwrap();
            assert!(t.max_eig().unwrap() <= 1e-9, "b={b}: {t:?}");
        }
    }

    #[test]
    fn bound_halves() {
        let c = build_certificate(1.5, 1.0, 1.0, 10.0, 1).unwrap();
        let sys = polyak_system(1.5, 1.0, 10.0, 1).unwrap();
        let b0 = convergence_bound_continuous(&c, &sys, 2.0, 0.0).unwrap();
        let b1 = convergence_bound_continuous(&c, &sys, 2.0, 2f64.ln() / c.lambda).unwrap();
        assert_relative_eq!(b1, b0 / 2.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn feasible_certificates_have_zero_coupling(b in 0.1f64..4.0, frac in 0.01f64..0.999) {
            let rate = continuous_rate(b).unwrap().r_bar;
            let c = build_certificate(b, rate * frac, 1.0, 100.0, 1).unwrap();
            let sys = polyak_system(b, 1.0, 100.0, 1).unwrap();
            let t = c.t_matrix(&sys).unwrap();
            prop_assert!(t.get(0, 2).abs() <= 1e-14);
            prop_assert!(t.get(1, 2).abs() <= 1e-14);
            prop_assert_eq!(t.get(2, 2), 0.0);
            let lead = SymMatrix::new(2, vec![t.get(0, 0), t.get(0, 1), t.get(1, 1)]).unwrap();
            prop_assert!(lead.max_eig().unwrap() <= 1e-12);
        }

        #[test]
        fn sharp_rate_dominates(b in 0.05f64..5.0, m in 1e-3f64..1.0, ratio in 1.0f64..1e4) {
            let q = quadratic_sharp_rate(b, m, m * ratio).unwrap();
            let r = continuous_rate(b).unwrap().r_bar;
            prop_assert!(q >= r * m.sqrt() * (1.0 - 1e-12));
        }
    }
}
