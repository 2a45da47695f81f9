//! Small dense real matrices and packed symmetric matrices.
//!
//! Everything here is sized for certificate work: Kronecker hat-factors of
//! order 2 or 3 and full block matrices of order `n + d` for small `d`.
//! Symmetric eigenvalues use closed forms for orders 1 to 3 and cyclic Jacobi
//! sweeps otherwise.

use std::fmt;

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, " {:?}", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        check_dim("Matrix::new", rows * cols, data.len())?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim("Matrix::from_rows", c, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        check_dim("Matrix::mul", self.cols, rhs.rows)?;
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    out.data[idx] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim("Matrix::mul_vec", self.cols, x.len())?;
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `selfᵀ x`.
    pub fn tr_mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim("Matrix::tr_mul_vec", self.rows, x.len())?;
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j] += self.get(i, j) * x[i];
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Self, context: &'static str, f: impl Fn(T, T) -> T) -> Result<Self> {
        check_dim(context, self.rows, rhs.rows)?;
        check_dim(context, self.cols, rhs.cols)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "Matrix::add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "Matrix::sub", |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// `self ⊗ I_d`.
    pub fn kron_identity(&self, d: usize) -> Self {
        let mut out = Self::zeros(self.rows * d, self.cols * d);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                for a in 0..d {
                    out.set(i * d + a, j * d + a, v);
                }
            }
        }
        out
    }

    /// Assembles a block matrix from a grid of blocks. Block rows must share a
    /// height and block columns a width.
    pub fn block(blocks: &[&[&Matrix<T>]]) -> Result<Self> {
        let heights: Vec<usize> = blocks.iter().map(|row| row[0].rows).collect();
        let widths: Vec<usize> = blocks[0].iter().map(|b| b.cols).collect();
        let total_r: usize = heights.iter().sum();
        let total_c: usize = widths.iter().sum();
        let mut out = Self::zeros(total_r, total_c);
        let mut r0 = 0;
        for (bi, row) in blocks.iter().enumerate() {
            check_dim("Matrix::block (block columns)", widths.len(), row.len())?;
            let mut c0 = 0;
            for (bj, blk) in row.iter().enumerate() {
                check_dim("Matrix::block (block height)", heights[bi], blk.rows)?;
                check_dim("Matrix::block (block width)", widths[bj], blk.cols)?;
                for i in 0..blk.rows {
                    for j in 0..blk.cols {
                        out.set(r0 + i, c0 + j, blk.get(i, j));
                    }
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn is_zero(&self, tol: T) -> bool {
        self.max_abs() <= tol
    }
}

/// Symmetric matrix stored as its packed upper triangle (row by row).
#[derive(Clone, PartialEq)]
pub struct SymMatrix<T> {
    order: usize,
    upper: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix order {} [", self.order)?;
        for i in 0..self.order {
            write!(f, "  ")?;
            for j in 0..self.order {
                write!(f, " {:?}", self.upper[packed_index(self.order, i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[inline]
fn packed_index(order: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * order - i * i.saturating_sub(1) / 2 + (j - i)
}

impl<T: Scalar> SymMatrix<T> {
    /// Builds from the packed upper triangle `[s00, s01, .., s0n, s11, ..]`.
    pub fn new(order: usize, upper: Vec<T>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput(
                "symmetric matrix order must be >= 1".into(),
            ));
        }
        check_dim("SymMatrix::new", order * (order + 1) / 2, upper.len())?;
        if upper.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "symmetric matrix entries must be finite".into(),
            ));
        }
        Ok(Self { order, upper })
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut upper = Vec::with_capacity(order * (order + 1) / 2);
        for i in 0..order {
            for j in i..order {
                upper.push(f(i, j));
            }
        }
        Self::new(order, upper)
    }

    /// Takes the upper triangle of a square matrix; the lower triangle must
    /// agree to `1e-12 * (1 + max|entry|)`.
    pub fn from_matrix(m: &Matrix<T>) -> Result<Self> {
        check_dim("SymMatrix::from_matrix", m.rows(), m.cols())?;
        let tol = T::lit(1e-12) * (T::one() + m.max_abs());
        for i in 0..m.rows() {
            for j in (i + 1)..m.cols() {
                if (m.get(i, j) - m.get(j, i)).abs() > tol {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Self::from_fn(m.rows(), |i, j| m.get(i, j))
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            upper: vec![T::zero(); order * (order + 1) / 2],
        }
    }

    pub fn identity(order: usize) -> Self {
        Self::diag(&vec![T::one(); order])
    }

    pub fn diag(d: &[T]) -> Self {
        let n = d.len();
        let mut s = Self::zeros(n);
        for (i, &v) in d.iter().enumerate() {
            let k = s.index(i, i);
            s.upper[k] = v;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        packed_index(self.order, i, j)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.upper[self.index(i, j)]
    }

    pub fn packed(&self) -> &[T] {
        &self.upper
    }

    pub fn to_matrix(&self) -> Matrix<T> {
        let n = self.order;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }

    fn zip_with(&self, rhs: &Self, context: &'static str, f: impl Fn(T, T) -> T) -> Result<Self> {
        check_dim(context, self.order, rhs.order)?;
        Ok(Self {
            order: self.order,
            upper: self
                .upper
                .iter()
                .zip(&rhs.upper)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "SymMatrix::add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "SymMatrix::sub", |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            order: self.order,
            upper: self.upper.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    /// `xᵀ S x`.
    pub fn quad_form(&self, x: &[T]) -> Result<T> {
        check_dim("SymMatrix::quad_form", self.order, x.len())?;
        let mut acc = T::zero();
        for i in 0..self.order {
            acc += self.get(i, i) * x[i] * x[i];
            for j in (i + 1)..self.order {
                acc += T::two() * self.get(i, j) * x[i] * x[j];
            }
        }
        Ok(acc)
    }

    pub fn trace(&self) -> T {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> T {
        let n = self.order;
        let mut a = self.to_matrix();
        let mut det = T::one();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&p, &q| {
                    a.get(p, col)
                        .abs()
                        .partial_cmp(&a.get(q, col).abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a.get(piv, col) == T::zero() {
                return T::zero();
            }
            if piv != col {
                for j in 0..n {
                    let tmp = a.get(col, j);
                    a.set(col, j, a.get(piv, j));
                    a.set(piv, j, tmp);
                }
                det = -det;
            }
            let p = a.get(col, col);
            det *= p;
            for i in (col + 1)..n {
                let f = a.get(i, col) / p;
                for j in col..n {
                    let v = a.get(i, j) - f * a.get(col, j);
                    a.set(i, j, v);
                }
            }
        }
        det
    }

    /// `self ⊗ I_d`.
    pub fn kron_identity(&self, d: usize) -> Self {
        let n = self.order * d;
        let mut out = Self::zeros(n);
        for i in 0..self.order {
            for j in i..self.order {
                let v = self.get(i, j);
                for a in 0..d {
                    let k = out.index(i * d + a, j * d + a);
                    out.upper[k] = v;
                }
            }
        }
        out
    }

    /// Inverse of [`kron_identity`](Self::kron_identity): reads the hat-factor
    /// entries `(i d, j d)` of a matrix with `Ŝ ⊗ I_d` structure.
    pub fn hat_collapse(&self, d: usize) -> Result<Self> {
        if d == 0 || !self.order.is_multiple_of(d) {
            return Err(Error::InvalidInput(format!(
                "order {} is not a multiple of d = {d}",
                self.order
            )));
        }
        Self::from_fn(self.order / d, |i, j| self.get(i * d, j * d))
    }

    pub fn max_abs(&self) -> T {
        self.upper
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    /// Default definiteness tolerance `1e-10 (1 + max|entry|)`.
    pub fn default_tol(&self) -> T {
        T::lit(1e-10) * (T::one() + self.max_abs())
    }

    pub fn eigvals(&self) -> Result<Vec<T>> {
        sym_eigvals(self)
    }

    pub fn max_eig(&self) -> Result<T> {
        Ok(*self.eigvals()?.last().expect("order >= 1"))
    }

    pub fn min_eig(&self) -> Result<T> {
        Ok(self.eigvals()?[0])
    }

    pub fn is_nsd(&self, tol: T) -> Result<bool> {
        is_nsd(self, tol)
    }

    pub fn is_pd(&self, tol: T) -> Result<bool> {
        is_pd(self, tol)
    }
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigvals<T: Scalar>(s: &SymMatrix<T>) -> Result<Vec<T>> {
    if s.upper.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(
            "non-finite entry in symmetric matrix".into(),
        ));
    }
    let mut ev = match s.order {
        1 => vec![s.get(0, 0)],
        2 => eig2(s.get(0, 0), s.get(0, 1), s.get(1, 1)).to_vec(),
        3 => eig3(s).to_vec(),
        _ => jacobi_eigvals(s),
    };
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ev)
}

fn eig2<T: Scalar>(a: T, b: T, c: T) -> [T; 2] {
    let mean = (a + c) * T::half();
    let rad = ((a - c) * T::half()).hypot(b);
    [mean - rad, mean + rad]
}

fn eig3<T: Scalar>(s: &SymMatrix<T>) -> [T; 3] {
    let (a00, a01, a02) = (s.get(0, 0), s.get(0, 1), s.get(0, 2));
    let (a11, a12, a22) = (s.get(1, 1), s.get(1, 2), s.get(2, 2));
    let p1 = a01 * a01 + a02 * a02 + a12 * a12;
    if p1 == T::zero() {
        return [a00, a11, a22];
    }
    let three = T::lit(3.0);
    let q = (a00 + a11 + a22) / three;
    let (b00, b11, b22) = (a00 - q, a11 - q, a22 - q);
    let p2 = b00 * b00 + b11 * b11 + b22 * b22 + T::two() * p1;
    let p = (p2 / T::lit(6.0)).sqrt();
    if p == T::zero() {
        return [q, q, q];
    }
    let inv = p.recip();
    let (c00, c01, c02, c11, c12, c22) = (
        b00 * inv,
        a01 * inv,
        a02 * inv,
        b11 * inv,
        a12 * inv,
        b22 * inv,
    );
    let det_c = c00 * (c11 * c22 - c12 * c12) - c01 * (c01 * c22 - c12 * c02)
        + c02 * (c01 * c12 - c11 * c02);
    let r = (det_c * T::half()).max(-T::one()).min(T::one());
    let phi = r.acos() / three;
    let two_pi_3 = T::two() * T::PI() / three;
    let e_hi = q + T::two() * p * phi.cos();
    let e_lo = q + T::two() * p * (phi + two_pi_3).cos();
    let e_mid = three * q - e_hi - e_lo;
    deflate3(s, [e_lo, e_mid, e_hi]).unwrap_or([e_lo, e_mid, e_hi])
}

fn cross<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn unit<T: Scalar>(v: [T; 3]) -> Option<[T; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > T::zero() && n.is_finite()).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

// The trigonometric roots lose about half the digits when two of them nearly
// coincide. The isolated root has a well-conditioned eigenvector; the other
// pair is recomputed from the 2×2 restriction to its orthogonal complement.
fn deflate3<T: Scalar>(s: &SymMatrix<T>, ev: [T; 3]) -> Option<[T; 3]> {
    let iso = if ev[1] - ev[0] < ev[2] - ev[1] {
        ev[2]
    } else {
        ev[0]
    };
    let row = |i: usize| {
        let mut r = [s.get(i, 0), s.get(i, 1), s.get(i, 2)];
        r[i] -= iso;
        r
    };
    let (r0, r1, r2) = (row(0), row(1), row(2));
    let cands = [cross(r0, r1), cross(r0, r2), cross(r1, r2)];
    let norm2 = |v: &[T; 3]| v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let best = cands.into_iter().max_by(|a, b| {
        norm2(a)
            .partial_cmp(&norm2(b))
            .unwrap_or(std::cmp::Ordering::Equal)
    })?;
    let v = unit(best)?;
    let axis = (0..3).min_by(|&i, &j| {
        v[i].abs()
            .partial_cmp(&v[j].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    })?;
    let mut e = [T::zero(); 3];
    e[axis] = T::one();
    let u = unit(cross(v, e))?;
    let w = cross(v, u);
    let quad = |x: &[T; 3], y: &[T; 3]| {
        (0..3)
            .map(|i| (0..3).map(|j| x[i] * s.get(i, j) * y[j]).sum::<T>())
            .sum::<T>()
    };
    let [lo, hi] = eig2(quad(&u, &u), quad(&u, &w), quad(&w, &w));
    let mut out = [quad(&v, &v), lo, hi];
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out.iter().all(|x| x.is_finite()).then_some(out)
}

fn jacobi_eigvals<T: Scalar>(s: &SymMatrix<T>) -> Vec<T> {
    let n = s.order;
    let mut a = s.to_matrix();
    let scale = s.max_abs();
    if scale == T::zero() {
        return vec![T::zero(); n];
    }
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j) * a.get(i, j))
            .sum();
        if off.sqrt() <= eps * eps * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (T::two() * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let sn = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - sn * akq);
                    a.set(k, q, sn * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - sn * aqk);
                    a.set(q, k, sn * apk + c * aqk);
                }
            }
        }
    }
    (0..n).map(|i| a.get(i, i)).collect()
}

/// `true` iff the largest eigenvalue is `<= tol`.
pub fn is_nsd<T: Scalar>(s: &SymMatrix<T>, tol: T) -> Result<bool> {
    if !tol.is_finite() {
        return Err(Error::InvalidInput("tolerance must be finite".into()));
    }
    Ok(s.max_eig()? <= tol)
}

/// `true` iff the smallest eigenvalue is `> tol`.
pub fn is_pd<T: Scalar>(s: &SymMatrix<T>, tol: T) -> Result<bool> {
    if !tol.is_finite() {
        return Err(Error::InvalidInput("tolerance must be finite".into()));
    }
    Ok(s.min_eig()? > tol)
}

/// `Fᵀ W F`, computed entry by entry on the upper triangle so the result is
/// exactly symmetric.
pub fn congruence<T: Scalar>(f: &Matrix<T>, w: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    check_dim("congruence", w.order(), f.rows())?;
    let wf = w.to_matrix().mul(f)?;
    SymMatrix::from_fn(f.cols(), |i, j| {
        (0..f.rows()).map(|k| f.get(k, i) * wf.get(k, j)).sum()
    })
}

/// Block-diagonal symmetric matrix `diag(a, b)`.
pub fn sym_block_diag<T: Scalar>(a: &SymMatrix<T>, b: &SymMatrix<T>) -> SymMatrix<T> {
    let na = a.order();
    let n = na + b.order();
    let mut out = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = if j < na {
                a.get(i, j)
            } else if i >= na {
                b.get(i - na, j - na)
            } else {
                T::zero()
            };
            let k = out.index(i, j);
            out.upper[k] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix<f64> {
        SymMatrix::from_fn(n, |_, _| rng.gen_range(-3.0..3.0)).unwrap()
    }

    // characteristic polynomial det(S - tI) for order 3
    fn charpoly3(s: &SymMatrix<f64>, t: f64) -> f64 {
        let shifted =
            SymMatrix::from_fn(3, |i, j| s.get(i, j) - if i == j { t } else { 0.0 }).unwrap();
        let (a, b, c, d, e, f) = (
            shifted.get(0, 0),
            shifted.get(0, 1),
            shifted.get(0, 2),
            shifted.get(1, 1),
            shifted.get(1, 2),
            shifted.get(2, 2),
        );
        a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c)
    }

    fn bisect_roots(s: &SymMatrix<f64>) -> Vec<f64> {
        let bound = 1.0 + 3.0 * s.max_abs() * 3.0;
        let n = 20_000;
        let mut roots = Vec::new();
        let xs: Vec<f64> = (0..=n)
            .map(|i| -bound + 2.0 * bound * i as f64 / n as f64)
            .collect();
        for w in xs.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let (flo, fhi) = (charpoly3(s, lo), charpoly3(s, hi));
            if flo == 0.0 {
                roots.push(lo);
                continue;
            }
            if flo * fhi > 0.0 {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if charpoly3(s, mid) * flo > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        roots
    }

    #[test]
    fn packed_index_layout() {
        let s = SymMatrix::new(3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.get(0, 2), 3.0);
        assert_eq!(s.get(2, 0), 3.0);
        assert_eq!(s.get(1, 1), 4.0);
        assert_eq!(s.get(1, 2), 5.0);
        assert_eq!(s.get(2, 2), 6.0);
        let big = SymMatrix::<f64>::from_fn(5, |i, j| (10 * i + j) as f64).unwrap();
        for i in 0..5 {
            for j in i..5 {
                assert_eq!(big.get(i, j), (10 * i + j) as f64);
                assert_eq!(big.get(j, i), (10 * i + j) as f64);
            }
        }
    }

    #[test]
    fn diagonal_and_swap_eigenvalues() {
        let d = SymMatrix::diag(&[2.0, 5.0]);
        assert_eq!(sym_eigvals(&d).unwrap(), vec![2.0, 5.0]);
        let swap = SymMatrix::new(2, vec![0.0, 1.0, 0.0]).unwrap();
        let ev = sym_eigvals(&swap).unwrap();
        assert_relative_eq!(ev[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(ev[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn order3_matches_characteristic_polynomial_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let s = random_sym(&mut rng, 3);
            let ev = sym_eigvals(&s).unwrap();
            let roots = bisect_roots(&s);
            assert_eq!(roots.len(), 3, "expected three simple roots for {s:?}");
            let scale = 1.0 + s.max_abs();
            for (a, b) in ev.iter().zip(&roots) {
                assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn order3_nearly_repeated_roots_keep_absolute_accuracy() {
        // a 2×2 block with eigenvalues -3 and -4e-7 next to an exact zero
        let (a, b) = (-3.0f64, -4e-7);
        let (c, s) = (0.6f64, 0.8f64);
        let block = [
            a * c * c + b * s * s,
            (a - b) * c * s,
            a * s * s + b * c * c,
        ];
        let t = SymMatrix::new(3, vec![block[0], block[1], 0.0, block[2], 0.0, 0.0]).unwrap();
        let ev = sym_eigvals(&t).unwrap();
        let [lo, hi] = eig2(block[0], block[1], block[2]);
        assert!((ev[0] - lo).abs() <= 1e-14);
        assert!((ev[1] - hi).abs() <= 1e-14, "{} vs {hi}", ev[1]);
        assert!(ev[2].abs() <= 1e-14, "{}", ev[2]);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let gap = 10f64.powf(rng.gen_range(-10.0..-4.0));
            let d = [1.0, 1.0 + gap, rng.gen_range(-5.0..5.0)];
            let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let uu: f64 = u.iter().map(|x| x * x).sum();
            let q = |i: usize, j: usize| f64::from(u8::from(i == j)) - 2.0 * u[i] * u[j] / uu;
            let s = SymMatrix::from_fn(3, |i, j| (0..3).map(|k| q(i, k) * d[k] * q(k, j)).sum())
                .unwrap();
            let mut expect = d.to_vec();
            expect.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (x, y) in sym_eigvals(&s).unwrap().iter().zip(&expect) {
                assert!((x - y).abs() <= 1e-13, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn jacobi_agrees_with_closed_form_on_block_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random_sym(&mut rng, 3);
            let b = random_sym(&mut rng, 2);
            let big = sym_block_diag(&a, &b);
            let mut expect = sym_eigvals(&a).unwrap();
            expect.extend(sym_eigvals(&b).unwrap());
            expect.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let got = sym_eigvals(&big).unwrap();
            for (x, y) in got.iter().zip(&expect) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + big.max_abs()));
            }
        }
    }

    #[test]
    fn trace_and_determinant_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for n in 1..=3 {
            for _ in 0..200 {
                let s = random_sym(&mut rng, n);
                let ev = sym_eigvals(&s).unwrap();
                let sum: f64 = ev.iter().sum();
                let prod: f64 = ev.iter().product();
                assert!((sum - s.trace()).abs() <= 1e-10);
                let det = s.det();
                assert!(
                    (prod - det).abs() <= 1e-10 * (1.0 + det.abs()),
                    "{prod} vs {det}"
                );
            }
        }
    }

    #[test]
    fn definiteness_predicates() {
        assert!(is_nsd(&SymMatrix::diag(&[-1.0, -2.0]), 0.0).unwrap());
        assert!(is_nsd(&SymMatrix::diag(&[-1.0, 1e-9]), 1e-8).unwrap());
        assert!(!is_nsd(&SymMatrix::diag(&[-1.0, 1e-9]), 0.0).unwrap());
        assert!(is_pd(&SymMatrix::<f64>::identity(3), 0.0).unwrap());
        assert!(!is_pd(&SymMatrix::diag(&[1.0, 0.0]), 0.0).unwrap());
        assert!(is_nsd(&SymMatrix::diag(&[-1.0]), f64::NAN).is_err());
    }

    #[test]
    fn pd_agrees_with_negated_nsd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=5);
            let s = random_sym(&mut rng, n);
            assert_eq!(is_pd(&s, 0.0).unwrap(), is_nsd(&s.neg(), 0.0).unwrap());
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(SymMatrix::new(1, vec![f64::NAN]).is_err());
        assert!(Matrix::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn congruence_examples() {
        let w = SymMatrix::new(2, vec![1.5, -0.25, 3.0]).unwrap();
        assert_eq!(congruence(&Matrix::identity(2), &w).unwrap(), w);
        let f = Matrix::from_rows(&[&[0.0], &[1.0]]).unwrap();
        let r = congruence(&f, &SymMatrix::diag(&[7.0, 2.0])).unwrap();
        assert_eq!(r.order(), 1);
        assert_eq!(r.get(0, 0), 2.0);
        let bad = Matrix::<f64>::zeros(3, 1);
        assert!(congruence(&bad, &w).is_err());
    }

    #[test]
    fn kron_and_collapse_roundtrip() {
        let s = SymMatrix::new(2, vec![1.0, 2.0, 3.0]).unwrap();
        let big = s.kron_identity(3);
        assert_eq!(big.order(), 6);
        assert_eq!(big.get(1, 4), 2.0);
        assert_eq!(big.get(0, 4), 0.0);
        assert_eq!(big.hat_collapse(3).unwrap(), s);
        let m = Matrix::from_rows(&[&[1.0, 2.0]]).unwrap().kron_identity(2);
        assert_eq!((m.rows(), m.cols()), (2, 4));
        assert_eq!(m.get(1, 3), 2.0);
    }

    #[test]
    fn f32_eigenvalues() {
        let s = SymMatrix::<f32>::new(3, vec![2.0, 0.5, 0.0, 1.0, 0.25, -1.0]).unwrap();
        let ev = s.eigvals().unwrap();
        let sum: f32 = ev.iter().sum();
        assert!((sum - s.trace()).abs() < 1e-5);
    }
}
