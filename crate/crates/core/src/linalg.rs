//! Small dense complex linear algebra: just enough for desk-scale operators.
//!
//! Matrices here are at most a few hundred rows, so everything is stored
//! row-major in a flat `Vec` and the Hermitian eigensolver is cyclic Jacobi.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Index, IndexMut};

use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "({:+.4},{:+.4}) ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        CMatrix { rows, cols, data: values.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[C64]) {
        for (r, &x) in v.iter().enumerate() {
            self[(r, c)] = x;
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| (0..self.cols).fold(C64::new(0.0, 0.0), |acc, c| acc + self[(r, c)] * v[c]))
            .collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from being Hermitian.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation from being (complex) symmetric.
    pub fn symmetric_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)]).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Deviation of `selfᴴ self` from the identity (max-abs).
    pub fn unitarity_residual(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&CMatrix::identity(self.cols))
    }

    /// `Pᴴ self P`.
    pub fn congruence(&self, p: &CMatrix) -> Self {
        p.adjoint().mul(self).mul(p)
    }

    /// Averages `self` with its adjoint, discarding roundoff asymmetry.
    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint()).scale_real(0.5)
    }
}

/// Failure modes of the dense solvers.
#[derive(Clone, Debug, PartialEq)]
pub enum LinalgError {
    NotSquare { rows: usize, cols: usize },
    NotHermitian { residual: f64 },
    NotSymmetric { residual: f64 },
    ConvergenceFailure { sweeps: usize, off_diagonal: f64 },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NotSquare { rows, cols } => write!(f, "matrix is {rows}x{cols}, expected square"),
            LinalgError::NotHermitian { residual } => write!(f, "matrix is not Hermitian (residual {residual:e})"),
            LinalgError::NotSymmetric { residual } => write!(f, "matrix is not symmetric (residual {residual:e})"),
            LinalgError::ConvergenceFailure { sweeps, off_diagonal } => {
                write!(f, "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// Residual above which an input is rejected as non-Hermitian.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;
/// Off-diagonal stopping threshold, relative to the Frobenius norm.
pub const JACOBI_REL_THRESHOLD: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and matching unitary eigenvectors (as columns).
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

fn off_diagonal_sq(a: &CMatrix) -> f64 {
    let mut s = 0.0;
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// The Hermitian residual of the input is checked against
/// [`HERMITIAN_INPUT_TOL`] scaled by `max(1, max|h|)`.
pub fn hermitian_eigen(h: &CMatrix) -> Result<HermitianEigen, LinalgError> {
    if !h.is_square() {
        return Err(LinalgError::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    let scale = h.max_abs().max(1.0);
    let residual = h.hermitian_residual();
    if residual > HERMITIAN_INPUT_TOL * scale {
        return Err(LinalgError::NotHermitian { residual });
    }
    let m = h.rows();
    let mut a = h.hermitian_part();
    let mut v = CMatrix::identity(m);
    let threshold = JACOBI_REL_THRESHOLD * a.frobenius_norm();
    let threshold_sq = threshold * threshold;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_sq(&a);
        if off <= threshold_sq {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(LinalgError::ConvergenceFailure { sweeps, off_diagonal: off.sqrt() });
        }
        sweeps += 1;
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Phase that makes the pivot real, then a real Jacobi rotation.
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane.
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = phase.conj() * (-s);
                let g_qq = phase.conj() * c;
                // a <- a G
                for r in 0..m {
                    let ap = a[(r, p)];
                    let aq = a[(r, q)];
                    a[(r, p)] = ap * g_pp + aq * g_qp;
                    a[(r, q)] = ap * g_pq + aq * g_qq;
                }
                // a <- Gᴴ a
                for col in 0..m {
                    let ap = a[(p, col)];
                    let aq = a[(q, col)];
                    a[(p, col)] = g_pp.conj() * ap + g_qp.conj() * aq;
                    a[(q, col)] = g_pq.conj() * ap + g_qq.conj() * aq;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for r in 0..m {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = vp * g_pp + vq * g_qp;
                    v[(r, q)] = vp * g_pq + vq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<(f64, Vec<C64>)> = (0..m)
        .map(|i| {
            let mut col = v.column(i);
            normalize_phase(&mut col);
            (a[(i, i)].re, col)
        })
        .collect();
    order.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| lexicographic(&x.1, &y.1)));
    let mut vectors = CMatrix::zeros(m, m);
    let mut values = Vec::with_capacity(m);
    for (i, (val, col)) in order.into_iter().enumerate() {
        values.push(val);
        vectors.set_column(i, &col);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Rotates `v` so that its first entry of maximal modulus is real and positive.
pub fn normalize_phase(v: &mut [C64]) {
    let mut best = 0usize;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        // small slack so that near-ties resolve to the earliest index
        if z.norm() > best_mag * (1.0 + 1e-9) {
            best = i;
            best_mag = z.norm();
        }
    }
    if best_mag <= 0.0 {
        return;
    }
    let phase = v[best].conj() / best_mag;
    for z in v.iter_mut() {
        *z *= phase;
    }
}

fn lexicographic(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then_with(|| x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Moore–Penrose pseudo-inverse of a Hermitian positive semidefinite matrix.
/// Eigenvalues below `rel_cutoff · λ_max` are treated as zero.
pub fn psd_pseudo_inverse(h: &CMatrix, rel_cutoff: f64) -> Result<CMatrix, LinalgError> {
    let eig = hermitian_eigen(h)?;
    let top = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let n = h.rows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &val) in eig.values.iter().enumerate() {
        if top == 0.0 || val.abs() <= rel_cutoff * top {
            continue;
        }
        let inv = 1.0 / val;
        for r in 0..n {
            let vr = eig.vectors[(r, k)] * inv;
            for c in 0..n {
                out[(r, c)] += vr * eig.vectors[(c, k)].conj();
            }
        }
    }
    Ok(out)
}

/// Orthogonal projector onto the kernel of `a` (rows are constraints).
pub fn kernel_projector(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    let gram = a.mul(&a.adjoint());
    let pinv = psd_pseudo_inverse(&gram, 1e-12)?;
    let range = a.adjoint().mul(&pinv).mul(a);
    Ok(CMatrix::identity(a.cols()).sub(&range))
}

/// Autonne–Takagi factorization `A = U diag(ρ) Uᵀ` of a complex symmetric matrix,
/// with `U` unitary and `ρ` nonnegative (descending).
#[derive(Clone, Debug)]
pub struct Takagi {
    pub unitary: CMatrix,
    pub values: Vec<f64>,
}

pub fn takagi(a: &CMatrix) -> Result<Takagi, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let scale = a.max_abs().max(1.0);
    let residual = a.symmetric_residual();
    if residual > HERMITIAN_INPUT_TOL * scale {
        return Err(LinalgError::NotSymmetric { residual });
    }
    // A = B + iC. Eigenpairs (x; y) of [[B, C], [C, -B]] with eigenvalue ρ
    // give A·conj(x + iy) = ρ (x + iy); the spectrum comes in ± pairs.
    let big = CMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (rb, cb) = (r / n, c / n);
        let z = a[(r % n, c % n)];
        let v = match (rb, cb) {
            (0, 0) => z.re,
            (1, 1) => -z.re,
            _ => z.im,
        };
        C64::new(v, 0.0)
    });
    let eig = hermitian_eigen(&big)?;
    let top = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero_tol = 1e-11 * top.max(f64::MIN_POSITIVE);

    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    // descending order: positive branch first
    for k in (0..2 * n).rev() {
        if cols.len() == n {
            break;
        }
        let rho = eig.values[k];
        if rho < -zero_tol {
            break;
        }
        let mut u: Vec<C64> =
            (0..n).map(|i| C64::new(eig.vectors[(i, k)].re, eig.vectors[(i + n, k)].re)).collect();
        if rho <= zero_tol {
            // Kernel directions: the complex span is invariant, so Gram–Schmidt
            // against what we have and drop dependent candidates.
            for prev in &cols {
                let ip: C64 = prev.iter().zip(&u).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in u.iter_mut().zip(prev) {
                    *x -= ip * p;
                }
            }
            let nrm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm < 1e-6 {
                continue;
            }
            for x in u.iter_mut() {
                *x /= nrm;
            }
            values.push(0.0);
        } else {
            let nrm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for x in u.iter_mut() {
                *x /= nrm;
            }
            values.push(rho);
        }
        cols.push(u);
    }
    // Any leftover (only possible with pathological roundoff): complete the basis.
    let mut basis_index = 0;
    while cols.len() < n && basis_index < n {
        let mut u = vec![C64::new(0.0, 0.0); n];
        u[basis_index] = C64::new(1.0, 0.0);
        basis_index += 1;
        for prev in &cols {
            let ip: C64 = prev.iter().zip(&u).map(|(p, x)| p.conj() * x).sum();
            for (x, p) in u.iter_mut().zip(prev) {
                *x -= ip * p;
            }
        }
        let nrm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm < 1e-6 {
            continue;
        }
        for x in u.iter_mut() {
            *x /= nrm;
        }
        cols.push(u);
        values.push(0.0);
    }
    let mut unitary = CMatrix::zeros(n, n);
    for (k, col) in cols.iter().enumerate() {
        unitary.set_column(k, col);
    }
    Ok(Takagi { unitary, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn test_hermitian(m: usize, seed: u64) -> CMatrix {
        // tiny LCG, enough for fixed fixtures
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut h = CMatrix::zeros(m, m);
        for r in 0..m {
            h[(r, r)] = c(next(), 0.0);
            for col in (r + 1)..m {
                let z = c(next(), next());
                h[(r, col)] = z;
                h[(col, r)] = z.conj();
            }
        }
        h
    }

    #[test]
    fn identity_spectrum() {
        let e = hermitian_eigen(&CMatrix::identity(5)).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let e = hermitian_eigen(&CMatrix::diagonal(&[2.0, -1.0, 0.0])).unwrap();
        assert_eq!(e.values, vec![-1.0, 0.0, 2.0]);
    }

    #[test]
    fn random_reconstruction() {
        let h = test_hermitian(10, 3);
        let e = hermitian_eigen(&h).unwrap();
        let rebuilt = e.vectors.mul(&CMatrix::diagonal(&e.values)).mul(&e.vectors.adjoint());
        assert!(rebuilt.max_abs_diff(&h) < 1e-10);
        assert!(e.vectors.unitarity_residual() < 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = CMatrix::identity(2);
        h[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(hermitian_eigen(&h), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn takagi_reconstructs() {
        for seed in 0..5 {
            let h = test_hermitian(4, seed);
            // complex symmetric: use h + hᵀ with complex diagonal
            let mut a = h.add(&h.transpose());
            a[(0, 0)] += c(0.0, 0.7);
            let t = takagi(&a).unwrap();
            let rebuilt = t.unitary.mul(&CMatrix::diagonal(&t.values)).mul(&t.unitary.transpose());
            assert!(rebuilt.max_abs_diff(&a) < 1e-10, "seed {seed}");
            assert!(t.unitary.unitarity_residual() < 1e-10);
            assert!(t.values.iter().all(|&r| r >= 0.0));
        }
    }

    #[test]
    fn takagi_rank_deficient() {
        let mut a = CMatrix::zeros(3, 3);
        a[(0, 0)] = c(0.0, 2.0);
        let t = takagi(&a).unwrap();
        let rebuilt = t.unitary.mul(&CMatrix::diagonal(&t.values)).mul(&t.unitary.transpose());
        assert!(rebuilt.max_abs_diff(&a) < 1e-12);
        assert!(t.unitary.unitarity_residual() < 1e-12);
        assert!((t.values[0] - 2.0).abs() < 1e-12);

        let z = takagi(&CMatrix::zeros(3, 3)).unwrap();
        assert!(z.values.iter().all(|&r| r == 0.0));
        assert!(z.unitary.unitarity_residual() < 1e-12);
    }

    #[test]
    fn kernel_projector_is_idempotent() {
        let a = CMatrix::from_fn(2, 4, |r, col| c((r + col) as f64, (r * col) as f64 * 0.5));
        let p = kernel_projector(&a).unwrap();
        assert!(p.mul(&p).max_abs_diff(&p) < 1e-12);
        assert!(a.mul(&p).max_abs() < 1e-12);
    }
}
