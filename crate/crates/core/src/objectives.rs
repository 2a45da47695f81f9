//! Objective oracles for strongly convex, smooth functions and a sampling
//! check of the class inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::matrices::SymMatrix;
use crate::scalar::{dot, norm_sq, sub, Scalar};

/// A member of the class of `m`-strongly convex functions with `L`-Lipschitz
/// gradient.
pub trait Objective<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[T]) -> T;
    fn gradient(&self, x: &[T]) -> Vec<T>;
    fn m(&self) -> T;
    fn l(&self) -> T;
    fn minimizer(&self) -> Option<&[T]>;

    fn kappa(&self) -> T {
        self.l() / self.m()
    }

    /// `f(x) - f(x*)`, or `None` without a known minimizer. Implementations
    /// may override this with a cancellation-free formula.
    fn gap(&self, x: &[T]) -> Option<T> {
        self.minimizer().map(|xs| self.value(x) - self.value(xs))
    }
}

impl<T: Scalar, O: Objective<T> + ?Sized> Objective<T> for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[T]) -> T {
        (**self).value(x)
    }
    fn gradient(&self, x: &[T]) -> Vec<T> {
        (**self).gradient(x)
    }
    fn m(&self) -> T {
        (**self).m()
    }
    fn l(&self) -> T {
        (**self).l()
    }
    fn minimizer(&self) -> Option<&[T]> {
        (**self).minimizer()
    }
    fn gap(&self, x: &[T]) -> Option<T> {
        (**self).gap(x)
    }
}

/// `f(x) = ½ (x - x*)ᵀ H (x - x*)` with `m`, `L` the extreme eigenvalues of `H`.
#[derive(Debug, Clone)]
pub struct Quadratic<T> {
    h: SymMatrix<T>,
    x_star: Vec<T>,
    m: T,
    l: T,
}

impl<T: Scalar> Quadratic<T> {
    pub fn new(h: SymMatrix<T>, x_star: Vec<T>) -> Result<Self> {
        check_dim("Quadratic::new", h.order(), x_star.len())?;
        if x_star.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("minimizer must be finite".into()));
        }
        let ev = h.eigvals()?;
        let (m, l) = (ev[0], ev[ev.len() - 1]);
        if m <= T::zero() {
            return Err(Error::InvalidInput(format!(
                "Hessian must be positive definite (min eigenvalue {m})"
            )));
        }
        Ok(Self { h, x_star, m, l })
    }

    /// Diagonal Hessian with minimizer at the origin.
    pub fn diagonal(diag: &[T]) -> Result<Self> {
        Self::new(SymMatrix::diag(diag), vec![T::zero(); diag.len()])
    }

    pub fn hessian(&self) -> &SymMatrix<T> {
        &self.h
    }
}

impl<T: Scalar> Objective<T> for Quadratic<T> {
    fn dim(&self) -> usize {
        self.x_star.len()
    }

    fn value(&self, x: &[T]) -> T {
        let e = sub(x, &self.x_star);
        T::half() * self.h.quad_form(&e).expect("dimension checked by caller")
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        let e = sub(x, &self.x_star);
        self.h
            .to_matrix()
            .mul_vec(&e)
            .expect("dimension checked by caller")
    }

    fn m(&self) -> T {
        self.m
    }

    fn l(&self) -> T {
        self.l
    }

    fn minimizer(&self) -> Option<&[T]> {
        Some(&self.x_star)
    }

    fn gap(&self, x: &[T]) -> Option<T> {
        Some(self.value(x))
    }
}

/// Logistic sigmoid `1 / (1 + e^{-z})`, evaluated without overflow.
pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `log(1 + e^z)`, evaluated without overflow.
pub fn softplus<T: Scalar>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

// 16-point Gauss-Legendre rule on [-1, 1]: positive nodes and weights.
const GL16: [(f64, f64); 8] = [
    (0.095_012_509_837_637_44, 0.189_450_610_455_068_5),
    (0.281_603_550_779_258_9, 0.182_603_415_044_923_6),
    (0.458_016_777_657_227_4, 0.169_156_519_395_002_5),
    (0.617_876_244_402_643_7, 0.149_595_988_816_576_7),
    (0.755_404_408_355_003, 0.124_628_971_255_533_9),
    (0.865_631_202_387_831_7, 0.095_158_511_682_492_78),
    (0.944_575_023_073_232_6, 0.062_253_523_938_647_89),
    (0.989_400_934_991_649_9, 0.027_152_459_411_754_09),
];

/// The one-dimensional test function `f(x) = (m/2)x² + 4(L-m) log(1 + e^{-x})`.
#[derive(Debug, Clone)]
pub struct Fun1<T> {
    m: T,
    l: T,
    x_star: [T; 1],
}

impl<T: Scalar> Fun1<T> {
    pub fn new(m: T, l: T) -> Result<Self> {
        if !(m.is_finite() && l.is_finite() && m > T::zero() && l >= m) {
            return Err(Error::InvalidInput(format!(
                "need 0 < m <= L, got m={m}, L={l}"
            )));
        }
        let mut f = Self {
            m,
            l,
            x_star: [T::zero()],
        };
        f.x_star = [f.solve_minimizer()];
        Ok(f)
    }

    fn derivative(&self, x: T) -> T {
        self.m * x - T::lit(4.0) * (self.l - self.m) * sigmoid(-x)
    }

    pub fn second_derivative(&self, x: T) -> T {
        self.m + T::lit(4.0) * (self.l - self.m) * sigmoid(x) * sigmoid(-x)
    }

    // f' is increasing and f'(0) = -2(L-m) <= 0, so the root is in [0, hi].
    fn solve_minimizer(&self) -> T {
        if self.derivative(T::zero()) >= T::zero() {
            return T::zero();
        }
        let mut lo = T::zero();
        let mut hi = T::one();
        while self.derivative(hi) < T::zero() {
            lo = hi;
            hi *= T::two();
        }
        for _ in 0..400 {
            let mid = (lo + hi) * T::half();
            if mid <= lo || mid >= hi {
                break;
            }
            if self.derivative(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if self.derivative(lo).abs() <= self.derivative(hi).abs() {
            lo
        } else {
            hi
        }
    }
}

impl<T: Scalar> Objective<T> for Fun1<T> {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[T]) -> T {
        let x = x[0];
        self.m * T::half() * x * x + T::lit(4.0) * (self.l - self.m) * softplus(-x)
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        vec![self.derivative(x[0])]
    }

    fn m(&self) -> T {
        self.m
    }

    fn l(&self) -> T {
        self.l
    }

    fn minimizer(&self) -> Option<&[T]> {
        Some(&self.x_star)
    }

    // Taylor form with integral remainder near x*: avoids the cancellation
    // floor of f(x) - f(x*) that exponential weights would otherwise amplify.
    fn gap(&self, x: &[T]) -> Option<T> {
        let xs = self.x_star[0];
        let h = x[0] - xs;
        if h.abs() > T::one() {
            return Some(self.value(x) - self.value(&self.x_star));
        }
        // ∫₀¹ (1-τ) f''(x* + τh) dτ with τ = (1+s)/2
        let mut acc = T::zero();
        for &(s, w) in GL16.iter() {
            for s in [-s, s] {
                let tau = (T::one() + T::lit(s)) * T::half();
                acc += T::lit(w) * (T::one() - tau) * self.second_derivative(xs + tau * h);
            }
        }
        let remainder = acc * T::half();
        Some(self.derivative(xs) * h + h * h * remainder)
    }
}

/// `c · f` for `c > 0`: moduli, value and gradient scale by `c`.
#[derive(Debug, Clone)]
pub struct Scaled<O, T> {
    inner: O,
    c: T,
}

impl<T: Scalar, O: Objective<T>> Scaled<O, T> {
    pub fn new(inner: O, c: T) -> Result<Self> {
        if !(c.is_finite() && c > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "scale must be positive, got {c}"
            )));
        }
        Ok(Self { inner, c })
    }
}

impl<T: Scalar, O: Objective<T>> Objective<T> for Scaled<O, T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[T]) -> T {
        self.c * self.inner.value(x)
    }
    fn gradient(&self, x: &[T]) -> Vec<T> {
        self.inner
            .gradient(x)
            .into_iter()
            .map(|g| self.c * g)
            .collect()
    }
    fn m(&self) -> T {
        self.c * self.inner.m()
    }
    fn l(&self) -> T {
        self.c * self.inner.l()
    }
    fn minimizer(&self) -> Option<&[T]> {
        self.inner.minimizer()
    }
    fn gap(&self, x: &[T]) -> Option<T> {
        self.inner.gap(x).map(|g| self.c * g)
    }
}

/// Wraps an oracle but reports the given moduli instead of the true ones.
#[derive(Debug, Clone)]
pub struct WithModuli<O, T> {
    inner: O,
    m: T,
    l: T,
}

impl<T: Scalar, O: Objective<T>> WithModuli<O, T> {
    pub fn new(inner: O, m: T, l: T) -> Self {
        Self { inner, m, l }
    }
}

impl<T: Scalar, O: Objective<T>> Objective<T> for WithModuli<O, T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[T]) -> T {
        self.inner.value(x)
    }
    fn gradient(&self, x: &[T]) -> Vec<T> {
        self.inner.gradient(x)
    }
    fn m(&self) -> T {
        self.m
    }
    fn l(&self) -> T {
        self.l
    }
    fn minimizer(&self) -> Option<&[T]> {
        self.inner.minimizer()
    }
    fn gap(&self, x: &[T]) -> Option<T> {
        self.inner.gap(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub violations: usize,
    /// Smallest relative slack over all sampled inequalities; negative means
    /// at least one inequality failed.
    pub worst_margin: f64,
}

/// Samples `pairs` points in `[-10, 10]^d` and checks strong convexity,
/// co-coercivity and the quadratic upper bound at the reported `(m, L)`.
pub fn validate_class<T: Scalar, O: Objective<T> + ?Sized>(
    oracle: &O,
    pairs: usize,
    seed: u64,
) -> Result<ValidationReport> {
    validate_class_in_box(oracle, pairs, seed, 10.0)
}

pub fn validate_class_in_box<T: Scalar, O: Objective<T> + ?Sized>(
    oracle: &O,
    pairs: usize,
    seed: u64,
    half_width: f64,
) -> Result<ValidationReport> {
    if pairs == 0 {
        return Err(Error::InvalidInput("pairs must be >= 1".into()));
    }
    let tol = 1e-9;
    let d = oracle.dim();
    let (m, l) = (oracle.m(), oracle.l());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<T> {
        (0..d)
            .map(|_| T::lit(rng.gen_range(-half_width..=half_width)))
            .collect()
    };
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let (gx, gy) = (oracle.gradient(&x), oracle.gradient(&y));
        let dx = sub(&x, &y);
        let dg = sub(&gx, &gy);
        let dxn = norm_sq(&dx);
        let dgn = norm_sq(&dg);
        let inner = dot(&dx, &dg);
        let upper_rhs = oracle.value(&y) + dot(&gy, &dx) + l * T::half() * dxn;
        let fx = oracle.value(&x);
        let checks = [
            (inner, m * dxn),
            (inner, m * l / (m + l) * dxn + dgn / (m + l)),
            (upper_rhs, fx),
        ];
        for (big, small) in checks {
            let (big, small) = (big.to_f64_lossy(), small.to_f64_lossy());
            let scale = big.abs().max(small.abs()).max(f64::MIN_POSITIVE);
            let margin = (big - small) / scale;
            if margin < -tol {
                violations += 1;
            }
            worst = worst.min(margin);
        }
    }
    Ok(ValidationReport {
        violations,
        worst_margin: worst,
    })
}
