//! Exterior forms on `V ⊗ ℂ` with coefficients over unit-norm generators.
//!
//! A coframe has `2n` slots. In the real coframe slot `i` is `e^i`; in the
//! unitary coframe slot `2a` is `Z^a = g(·, Z̄_a)` and slot `2a + 1` is
//! `Z̄^a = g(Z_a, ·)`. A subset of slots is a bitmask, and the generator
//! attached to a mask `Γ = {γ_1 < … < γ_k}` is
//!
//! `f^Γ = f^{γ_1} ∧ … ∧ f^{γ_k} / √(k!)`,
//!
//! which has unit tensor norm. This is the only place the `√(k!)` factor
//! enters: a coefficient equals `√(k!)` times the value of the form on the
//! dual frame vectors in increasing slot order. In the unitary coframe the
//! increasing slot order interleaves a barred index right after the equal
//! unbarred one, so the generator `Z^K` needs no extra sign.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::frame::{Endo, FrameConvention, FrameVector};
use crate::linalg::{kernel_projector, CMatrix};
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Which coframe the coefficients refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coframe {
    Real,
    Unitary,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FormError {
    Arity { expected: usize, got: usize },
    Dimension { expected: usize, got: usize },
    NotPure { p: usize, q: usize },
    NotReal { residual: f64 },
    Degree { p: usize, q: usize, n: usize },
}

impl fmt::Display for FormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormError::Arity { expected, got } => write!(f, "form of degree {expected} evaluated on {got} vectors"),
            FormError::Dimension { expected, got } => write!(f, "dimension mismatch: expected n = {expected}, got {got}"),
            FormError::NotPure { p, q } => write!(f, "form has components outside bidegree ({p}, {q})"),
            FormError::NotReal { residual } => write!(f, "form is not real (residual {residual:e})"),
            FormError::Degree { p, q, n } => write!(f, "bidegree ({p}, {q}) is not available for n = {n}"),
        }
    }
}

impl core::error::Error for FormError {}

/// Strictly increasing unbarred indices `I` and barred indices `J` (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub unbarred: Vec<usize>,
    pub barred: Vec<usize>,
}

impl MultiIndex {
    /// Returns `None` if either list is not strictly increasing or out of range.
    pub fn new(n: usize, unbarred: Vec<usize>, barred: Vec<usize>) -> Option<Self> {
        let ok = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|&x| x < n);
        if ok(&unbarred) && ok(&barred) {
            Some(MultiIndex { unbarred, barred })
        } else {
            None
        }
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.unbarred.len(), self.barred.len())
    }

    /// Unitary-coframe slot mask.
    pub fn mask(&self) -> u32 {
        let mut m = 0u32;
        for &a in &self.unbarred {
            m |= 1 << (2 * a);
        }
        for &b in &self.barred {
            m |= 1 << (2 * b + 1);
        }
        m
    }

    pub fn from_mask(mask: u32) -> Self {
        let mut unbarred = Vec::new();
        let mut barred = Vec::new();
        for slot in slots(mask) {
            if slot.is_multiple_of(2) {
                unbarred.push(slot / 2);
            } else {
                barred.push(slot / 2);
            }
        }
        MultiIndex { unbarred, barred }
    }

    /// Frame vectors dual to the generator, in canonical (interleaved) order.
    pub fn dual_vectors(&self) -> Vec<FrameVector> {
        slots(self.mask()).map(unitary_slot_vector).collect()
    }
}

pub(crate) fn unitary_slot_vector(slot: usize) -> FrameVector {
    if slot.is_multiple_of(2) {
        FrameVector::Z(slot / 2)
    } else {
        FrameVector::ZBar(slot / 2)
    }
}

/// Iterates the set bits of a mask in increasing order.
pub fn slots(mask: u32) -> impl Iterator<Item = usize> {
    let mut m = mask;
    core::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let s = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(s)
        }
    })
}

/// All masks of `k` bits among `d` slots, increasing.
pub fn masks_of_degree(d: usize, k: usize) -> Vec<u32> {
    (0u32..(1u32 << d)).filter(|m| m.count_ones() as usize == k).collect()
}

/// Number of elements of `mask` strictly between `a` and `b`.
#[inline]
fn between(mask: u32, a: usize, b: usize) -> u32 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if hi - lo <= 1 {
        return 0;
    }
    let window = ((1u32 << hi) - 1) & !((1u32 << (lo + 1)) - 1);
    (mask & window).count_ones()
}

/// Replaces slot `from` (which must be in `mask`) by `to`.
/// Returns the new mask and the sign of the reordering, or `None` if `to`
/// is already occupied by another slot.
#[inline]
pub(crate) fn replace_slot(mask: u32, from: usize, to: usize) -> Option<(u32, f64)> {
    if from == to {
        return Some((mask, 1.0));
    }
    let rest = mask & !(1 << from);
    if rest & (1 << to) != 0 {
        return None;
    }
    let sign = if between(rest, from, to).is_multiple_of(2) { 1.0 } else { -1.0 };
    Some((rest | (1 << to), sign))
}

/// Unitary slot `(p, q)` counts of a mask.
#[inline]
pub fn mask_bidegree(mask: u32) -> (usize, usize) {
    let even = mask & 0x5555_5555;
    let odd = mask & 0xAAAA_AAAA;
    (even.count_ones() as usize, odd.count_ones() as usize)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Determinant of a small complex matrix given row-major.
pub(crate) fn small_det(mut m: Vec<C64>, k: usize) -> C64 {
    if k == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut det = C64::new(1.0, 0.0);
    for col in 0..k {
        let mut pivot = col;
        let mut best = m[col * k + col].norm();
        for r in (col + 1)..k {
            let v = m[r * k + col].norm();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best == 0.0 {
            return czero();
        }
        if pivot != col {
            for x in 0..k {
                m.swap(col * k + x, pivot * k + x);
            }
            det = -det;
        }
        let d = m[col * k + col];
        det *= d;
        for r in (col + 1)..k {
            let factor = m[r * k + col] / d;
            if factor == czero() {
                continue;
            }
            for x in col..k {
                let sub = factor * m[col * k + x];
                m[r * k + x] -= sub;
            }
        }
    }
    det
}

/// Coframe covectors as rows: `f^γ(v) = Σ_i F[γ][i] v_i` for real-frame coordinates `v`.
fn coframe_rows(conv: FrameConvention, coframe: Coframe) -> CMatrix {
    match coframe {
        Coframe::Real => CMatrix::identity(conv.real_dim()),
        // Z^a = g(·, Z̄_a) has the components of Z̄_a = conj(Z_a), so the rows
        // are the conjugated frame columns.
        Coframe::Unitary => conv.unitary_frame_matrix().adjoint(),
    }
}

/// Dual frame vectors as columns, in real-frame coordinates.
fn frame_columns(conv: FrameConvention, coframe: Coframe) -> CMatrix {
    match coframe {
        Coframe::Real => CMatrix::identity(conv.real_dim()),
        Coframe::Unitary => conv.unitary_frame_matrix(),
    }
}

/// A homogeneous `k`-form on `V ⊗ ℂ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    n: usize,
    degree: usize,
    coframe: Coframe,
    coeffs: Vec<C64>,
}

impl Form {
    pub fn zero(conv: FrameConvention, degree: usize, coframe: Coframe) -> Self {
        assert!(degree <= conv.real_dim(), "degree exceeds real dimension");
        Form { n: conv.n(), degree, coframe, coeffs: vec![czero(); 1 << conv.real_dim()] }
    }

    /// Builds a form from `(mask, coefficient)` pairs.
    ///
    /// # Panics
    /// If a mask has the wrong number of bits.
    pub fn from_terms(conv: FrameConvention, degree: usize, coframe: Coframe, terms: &[(u32, C64)]) -> Self {
        let mut f = Self::zero(conv, degree, coframe);
        for &(m, v) in terms {
            assert_eq!(m.count_ones() as usize, degree, "mask {m:#b} has wrong degree");
            f.coeffs[m as usize] += v;
        }
        f
    }

    /// The unit generator `Z^K`.
    pub fn generator(conv: FrameConvention, k: &MultiIndex) -> Self {
        let m = k.mask();
        Self::from_terms(conv, m.count_ones() as usize, Coframe::Unitary, &[(m, C64::new(1.0, 0.0))])
    }

    pub fn convention(&self) -> FrameConvention {
        FrameConvention::new(self.n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coframe(&self) -> Coframe {
        self.coframe
    }

    pub fn coeff(&self, mask: u32) -> C64 {
        self.coeffs[mask as usize]
    }

    pub fn coeff_mut(&mut self, mask: u32) -> &mut C64 {
        &mut self.coeffs[mask as usize]
    }

    /// Nonzero `(mask, coefficient)` pairs in increasing mask order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, C64)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, z)| z.re != 0.0 || z.im != 0.0).map(|(m, &z)| (m as u32, z))
    }

    pub fn masks(&self) -> Vec<u32> {
        masks_of_degree(2 * self.n, self.degree)
    }

    /// Tensor norm `|φ|²`, which is `Σ |c_Γ|²` because the generators are orthonormal.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hermitian product `g(φ, ψ̄)`.
    pub fn hermitian(&self, other: &Form) -> C64 {
        let other = other.to_coframe(self.coframe);
        assert_eq!(self.degree, other.degree);
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum()
    }

    /// Bilinear product `g(φ, ψ)`.
    pub fn bilinear(&self, other: &Form) -> C64 {
        self.hermitian(&other.conj())
    }

    pub fn add(&self, other: &Form) -> Form {
        let other = other.to_coframe(self.coframe);
        assert_eq!((self.n, self.degree), (other.n, other.degree));
        Form {
            n: self.n,
            degree: self.degree,
            coframe: self.coframe,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Form {
        Form { n: self.n, degree: self.degree, coframe: self.coframe, coeffs: self.coeffs.iter().map(|&z| z * s).collect() }
    }

    /// Largest coefficient difference, after expressing both in this coframe.
    pub fn max_abs_diff(&self, other: &Form) -> f64 {
        let other = other.to_coframe(self.coframe);
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Re-expresses the form in another coframe.
    pub fn to_coframe(&self, target: Coframe) -> Form {
        if target == self.coframe {
            return self.clone();
        }
        let conv = self.convention();
        let k = self.degree;
        // M[γ][i] = f^γ(t_i)
        let m = coframe_rows(conv, self.coframe).mul(&frame_columns(conv, target));
        let mut out = Form::zero(conv, k, target);
        let src: Vec<(u32, C64)> = self.terms().collect();
        if src.is_empty() {
            return out;
        }
        let mut buf = vec![czero(); k * k];
        for tmask in self.masks() {
            let tslots: Vec<usize> = slots(tmask).collect();
            let mut acc = czero();
            for &(smask, cval) in &src {
                for (r, gamma) in slots(smask).enumerate() {
                    for (s, &t) in tslots.iter().enumerate() {
                        buf[r * k + s] = m[(gamma, t)];
                    }
                }
                let d = small_det(buf.clone(), k);
                acc += cval * d;
            }
            out.coeffs[tmask as usize] = acc;
        }
        out.clean(1e-15);
        out
    }

    /// Zeroes coefficients below `tol` (absolute), removing conversion noise.
    fn clean(&mut self, tol: f64) {
        for z in self.coeffs.iter_mut() {
            if z.re.abs() < tol {
                z.re = 0.0;
            }
            if z.im.abs() < tol {
                z.im = 0.0;
            }
        }
    }

    /// Evaluates the form as an alternating multilinear map on real-frame
    /// coordinate vectors.
    pub fn evaluate_coords(&self, args: &[Vec<C64>]) -> Result<C64, FormError> {
        if args.len() != self.degree {
            return Err(FormError::Arity { expected: self.degree, got: args.len() });
        }
        let conv = self.convention();
        let k = self.degree;
        let rows = coframe_rows(conv, self.coframe);
        // F[γ][s] = f^γ(v_s)
        let vals: Vec<Vec<C64>> = (0..2 * self.n)
            .map(|gamma| {
                args.iter()
                    .map(|v| {
                        assert_eq!(v.len(), 2 * self.n);
                        (0..2 * self.n).map(|i| rows[(gamma, i)] * v[i]).sum()
                    })
                    .collect()
            })
            .collect();
        let mut buf = vec![czero(); k * k];
        let mut acc = czero();
        for (mask, cval) in self.terms() {
            for (r, gamma) in slots(mask).enumerate() {
                buf[r * k..(r + 1) * k].copy_from_slice(&vals[gamma]);
            }
            acc += cval * small_det(buf.clone(), k);
        }
        Ok(acc / factorial(k).sqrt())
    }

    /// Evaluates the form on frame vectors.
    pub fn evaluate(&self, args: &[FrameVector]) -> Result<C64, FormError> {
        let conv = self.convention();
        let coords: Vec<Vec<C64>> = args.iter().map(|&v| conv.coords(v)).collect();
        self.evaluate_coords(&coords)
    }

    /// Complex conjugate form.
    pub fn conj(&self) -> Form {
        match self.coframe {
            Coframe::Real => Form {
                n: self.n,
                degree: self.degree,
                coframe: Coframe::Real,
                coeffs: self.coeffs.iter().map(|z| z.conj()).collect(),
            },
            Coframe::Unitary => {
                // conj(Z^a) = Z̄^a: swap the two slots of each pair; a pair
                // present on both sides flips order once.
                let mut out = Form::zero(self.convention(), self.degree, Coframe::Unitary);
                for (mask, cval) in self.terms() {
                    let swapped = ((mask & 0x5555_5555) << 1) | ((mask & 0xAAAA_AAAA) >> 1);
                    let pairs = (mask & (mask >> 1) & 0x5555_5555).count_ones();
                    let sign = if pairs % 2 == 0 { 1.0 } else { -1.0 };
                    out.coeffs[swapped as usize] += cval.conj() * sign;
                }
                out
            }
        }
    }

    /// Largest coefficient of `φ − φ̄`.
    pub fn reality_residual(&self) -> f64 {
        self.max_abs_diff(&self.conj())
    }

    /// Derivation action `(Lφ)(ξ_1,…,ξ_k) = −Σ_i φ(ξ_1,…,Lξ_i,…,ξ_k)`.
    pub fn endo_act(&self, l: &Endo) -> Form {
        assert_eq!(l.convention().n(), self.n, "dimension mismatch");
        let conv = self.convention();
        // L_{δβ} = f^δ(L f_β) in this form's frame.
        let lf = coframe_rows(conv, self.coframe).mul(l.matrix()).mul(&frame_columns(conv, self.coframe));
        self.act_with_frame_matrix(&lf)
    }

    /// Derivation action for an endomorphism given by its matrix in this form's
    /// frame (`L f_β = Σ_δ L[δ][β] f_δ`). On covectors `L f^γ = −Σ_β L[γ][β] f^β`.
    pub(crate) fn act_with_frame_matrix(&self, lf: &CMatrix) -> Form {
        let d = 2 * self.n;
        let mut out = Form::zero(self.convention(), self.degree, self.coframe);
        for (mask, cval) in self.terms() {
            for gamma in slots(mask) {
                for beta in 0..d {
                    let lgb = lf[(gamma, beta)];
                    if lgb.re == 0.0 && lgb.im == 0.0 {
                        continue;
                    }
                    if let Some((nm, sign)) = replace_slot(mask, gamma, beta) {
                        out.coeffs[nm as usize] -= cval * lgb * sign;
                    }
                }
            }
        }
        out
    }

    /// Counts of unbarred/barred slots present with nonzero coefficient.
    /// Returns the list of bidegrees occurring (above `tol`).
    pub fn bidegrees(&self, tol: f64) -> Vec<(usize, usize)> {
        let u = self.to_coframe(Coframe::Unitary);
        let mut out: Vec<(usize, usize)> = Vec::new();
        for (mask, z) in u.terms() {
            if z.norm() > tol {
                let b = mask_bidegree(mask);
                if !out.contains(&b) {
                    out.push(b);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Component of bidegree `(p, q)`.
    pub fn bidegree_part(&self, p: usize, q: usize) -> Form {
        let mut u = self.to_coframe(Coframe::Unitary);
        for (m, z) in u.coeffs.iter_mut().enumerate() {
            if mask_bidegree(m as u32) != (p, q) {
                *z = czero();
            }
        }
        u
    }

    /// Interior product `ι_X φ = φ(X, ·, …, ·)` for `X` in real-frame coordinates.
    pub fn interior_coords(&self, x: &[C64]) -> Form {
        let conv = self.convention();
        let k = self.degree;
        if k == 0 {
            return Form::zero(conv, 0, self.coframe);
        }
        let rows = coframe_rows(conv, self.coframe);
        let fx: Vec<C64> = (0..2 * self.n).map(|g| (0..2 * self.n).map(|i| rows[(g, i)] * x[i]).sum()).collect();
        let inv = 1.0 / (k as f64).sqrt();
        let mut out = Form::zero(conv, k - 1, self.coframe);
        for (mask, cval) in self.terms() {
            for (r, gamma) in slots(mask).enumerate() {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                out.coeffs[(mask & !(1 << gamma)) as usize] += cval * fx[gamma] * sign * inv;
            }
        }
        out
    }

    pub fn interior(&self, v: FrameVector) -> Form {
        self.interior_coords(&self.convention().coords(v))
    }

    /// Adjoint of the Lefschetz map:
    /// `(Λφ)(v_1,…,v_{k−2}) = −i k(k−1) Σ_a φ(Z_a, Z̄_a, v_1,…,v_{k−2})`.
    /// The result is expressed in the unitary coframe.
    pub fn lefschetz_adjoint(&self) -> Form {
        let conv = self.convention();
        let k = self.degree;
        if k < 2 {
            return Form::zero(conv, 0, Coframe::Unitary);
        }
        let u = self.to_coframe(Coframe::Unitary);
        let factor = C64::new(0.0, -((k * (k - 1)) as f64).sqrt());
        let mut out = Form::zero(conv, k - 2, Coframe::Unitary);
        for (mask, cval) in u.terms() {
            for a in 0..self.n {
                let pair = 0b11u32 << (2 * a);
                // the adjacent pair (Z_a, Z̄_a) sorts into place with an even permutation
                if mask & pair == pair {
                    out.coeffs[(mask & !pair) as usize] += cval * factor;
                }
            }
        }
        out
    }

    /// Coefficient-space matrix of `Λ` from `(p, q)` generators to `(p−1, q−1)` generators.
    fn lefschetz_adjoint_matrix(conv: FrameConvention, p: usize, q: usize) -> (Vec<u32>, Vec<u32>, CMatrix) {
        let d = conv.real_dim();
        let src: Vec<u32> = masks_of_degree(d, p + q).into_iter().filter(|&m| mask_bidegree(m) == (p, q)).collect();
        if p == 0 || q == 0 {
            return (src, Vec::new(), CMatrix::zeros(0, 0));
        }
        let dst: Vec<u32> =
            masks_of_degree(d, p + q - 2).into_iter().filter(|&m| mask_bidegree(m) == (p - 1, q - 1)).collect();
        let mut a = CMatrix::zeros(dst.len(), src.len());
        for (col, &m) in src.iter().enumerate() {
            let e = Form::from_terms(conv, p + q, Coframe::Unitary, &[(m, C64::new(1.0, 0.0))]);
            let img = e.lefschetz_adjoint();
            for (row, &t) in dst.iter().enumerate() {
                a[(row, col)] = img.coeff(t);
            }
        }
        (src, dst, a)
    }

    /// Orthogonal projection onto `ker Λ` of a pure `(p, q)`-form.
    pub fn project_primitive(&self) -> Result<Form, FormError> {
        let u = self.to_coframe(Coframe::Unitary);
        let degs = u.bidegrees(0.0);
        if degs.is_empty() {
            return Ok(u);
        }
        if degs.len() > 1 {
            let (p, q) = degs[0];
            return Err(FormError::NotPure { p, q });
        }
        let (p, q) = degs[0];
        if p == 0 || q == 0 {
            return Ok(u);
        }
        let conv = self.convention();
        let (src, _dst, a) = Self::lefschetz_adjoint_matrix(conv, p, q);
        let proj = kernel_projector(&a).expect("Gram matrix of Λ is Hermitian");
        let x: Vec<C64> = src.iter().map(|&m| u.coeff(m)).collect();
        let y = proj.mul_vec(&x);
        let mut out = Form::zero(conv, p + q, Coframe::Unitary);
        for (&m, v) in src.iter().zip(y) {
            out.coeffs[m as usize] = v;
        }
        Ok(out)
    }
}

/// A form of pure bidegree `(p, q)` in the unitary coframe.
#[derive(Clone, Debug, PartialEq)]
pub struct FormPQ {
    form: Form,
    p: usize,
    q: usize,
}

impl FormPQ {
    /// Checks that every coefficient outside bidegree `(p, q)` is below `tol`.
    pub fn new(form: Form, p: usize, q: usize, tol: f64) -> Result<Self, FormError> {
        if form.degree() != p + q {
            return Err(FormError::NotPure { p, q });
        }
        let u = form.to_coframe(Coframe::Unitary);
        for (mask, z) in u.terms() {
            if mask_bidegree(mask) != (p, q) && z.norm() > tol {
                return Err(FormError::NotPure { p, q });
            }
        }
        Ok(FormPQ { form: u.bidegree_part(p, q), p, q })
    }

    pub fn from_coeffs(conv: FrameConvention, terms: &[(MultiIndex, C64)]) -> Result<Self, FormError> {
        let (p, q) = terms.first().map(|(k, _)| k.bidegree()).unwrap_or((0, 0));
        let masks: Vec<(u32, C64)> = terms.iter().map(|(k, z)| (k.mask(), *z)).collect();
        for (k, _) in terms {
            if k.bidegree() != (p, q) {
                return Err(FormError::NotPure { p, q });
            }
        }
        Ok(FormPQ { form: Form::from_terms(conv, p + q, Coframe::Unitary, &masks), p, q })
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn into_form(self) -> Form {
        self.form
    }

    /// Coefficients keyed by multi-index, in mask order.
    pub fn coefficients(&self) -> Vec<(MultiIndex, C64)> {
        self.form.terms().map(|(m, z)| (MultiIndex::from_mask(m), z)).collect()
    }

    pub fn project_primitive(&self) -> FormPQ {
        let f = self.form.project_primitive().expect("pure bidegree");
        FormPQ { form: f, p: self.p, q: self.q }
    }
}

/// A conjugation-invariant form in `Λ^{p,q} ⊕ Λ^{q,p}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealForm {
    form: Form,
    p: usize,
    q: usize,
}

impl RealForm {
    /// `ψ = φ + φ̄` when `p ≠ q`; for `p = q` the self-conjugate part `φ + φ̄` as well.
    pub fn from_pq(phi: &FormPQ) -> Self {
        let f = phi.form.add(&phi.form.conj());
        let (p, q) = phi.bidegree();
        RealForm { form: f, p: p.max(q), q: p.min(q) }
    }

    /// Wraps a form that is already real, checking the residual.
    pub fn new(form: Form, p: usize, q: usize, tol: f64) -> Result<Self, FormError> {
        let r = form.reality_residual();
        if r > tol * form.max_abs().max(1.0) {
            return Err(FormError::NotReal { residual: r });
        }
        for (mask, z) in form.to_coframe(Coframe::Unitary).terms() {
            let b = mask_bidegree(mask);
            if b != (p, q) && b != (q, p) && z.norm() > tol {
                return Err(FormError::NotPure { p, q });
            }
        }
        Ok(RealForm { form: form.to_coframe(Coframe::Unitary), p: p.max(q), q: p.min(q) })
    }

    /// Bidegree with `p ≥ q`.
    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn form(&self) -> &Form {
        &self.form
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::kaehler_bivector;

    const SQRT_2: f64 = core::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn mi(n: usize, i: &[usize], j: &[usize]) -> MultiIndex {
        MultiIndex::new(n, i.to_vec(), j.to_vec()).unwrap()
    }

    /// Deterministic pseudo-random coefficients for fixtures.
    fn fixture_form(conv: FrameConvention, degree: usize, coframe: Coframe, seed: u64) -> Form {
        let mut s = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut f = Form::zero(conv, degree, coframe);
        for m in masks_of_degree(conv.real_dim(), degree) {
            *f.coeff_mut(m) = c(next(), next());
        }
        f
    }

    fn fixture_pq(conv: FrameConvention, p: usize, q: usize, seed: u64) -> Form {
        fixture_form(conv, p + q, Coframe::Unitary, seed).bidegree_part(p, q)
    }

    #[test]
    fn evaluate_generator_on_own_indices() {
        let conv = FrameConvention::new(1);
        let phi = Form::generator(conv, &mi(1, &[0], &[0]));
        let v = phi.evaluate(&[FrameVector::Z(0), FrameVector::ZBar(0)]).unwrap();
        assert!((v - c(1.0 / SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn evaluate_repeated_argument_vanishes() {
        let conv = FrameConvention::new(2);
        let phi = fixture_form(conv, 2, Coframe::Unitary, 1);
        let v = phi.evaluate(&[FrameVector::E(1), FrameVector::E(1)]).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn evaluate_holomorphic_two_form() {
        // Z^1 ∧ Z^2 pairs with (1,0)-vectors: swapping the arguments flips the sign,
        // and (0,1)-vectors are annihilated because Z^a(Z̄_b) = 0.
        let conv = FrameConvention::new(2);
        let phi = Form::generator(conv, &mi(2, &[0, 1], &[]));
        let v = phi.evaluate(&[FrameVector::Z(1), FrameVector::Z(0)]).unwrap();
        assert!((v - c(-1.0 / SQRT_2, 0.0)).norm() < 1e-15);
        let w = phi.evaluate(&[FrameVector::ZBar(1), FrameVector::ZBar(0)]).unwrap();
        assert!(w.norm() < 1e-15);
    }

    #[test]
    fn evaluate_arity_mismatch() {
        let conv = FrameConvention::new(2);
        let phi = Form::generator(conv, &mi(2, &[0], &[1]));
        assert_eq!(phi.evaluate(&[FrameVector::Z(0)]), Err(FormError::Arity { expected: 2, got: 1 }));
    }

    #[test]
    fn wedge_monomial_norm_is_factorial() {
        // Z^1∧Z^2∧Z̄^1 = √3! · generator, so its tensor norm is 3! = 6.
        let conv = FrameConvention::new(2);
        let phi = Form::generator(conv, &mi(2, &[0, 1], &[0])).scale(c(6f64.sqrt(), 0.0));
        // tensor norm as a sum over all ordered real-frame tuples
        let d = conv.real_dim();
        let mut total = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = phi.evaluate(&[FrameVector::E(i), FrameVector::E(j), FrameVector::E(k)]).unwrap();
                    total += v.norm_sqr();
                }
            }
        }
        assert!((total - 6.0).abs() < 1e-12);
        assert!((phi.norm_sq() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn coframe_roundtrip_preserves_values() {
        let conv = FrameConvention::new(2);
        for k in 0..=4 {
            let phi = fixture_form(conv, k, Coframe::Unitary, k as u64);
            let r = phi.to_coframe(Coframe::Real);
            assert!((r.norm_sq() - phi.norm_sq()).abs() < 1e-12);
            let back = r.to_coframe(Coframe::Unitary);
            assert!(back.max_abs_diff(&phi) < 1e-13);
            if k == 2 {
                let args = [FrameVector::Z(1), FrameVector::E(0)];
                assert!((phi.evaluate(&args).unwrap() - r.evaluate(&args).unwrap()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn conjugation_matches_real_frame() {
        let conv = FrameConvention::new(2);
        let phi = fixture_form(conv, 3, Coframe::Unitary, 9);
        let via_real = phi.to_coframe(Coframe::Real).conj().to_coframe(Coframe::Unitary);
        assert!(phi.conj().max_abs_diff(&via_real) < 1e-13);
        let args = [FrameVector::Z(0), FrameVector::ZBar(1), FrameVector::E(2)];
        let lhs = phi.conj().evaluate(&args).unwrap();
        let conj_args: Vec<FrameVector> = args.iter().map(|v| v.conj()).collect();
        let rhs = phi.evaluate(&conj_args).unwrap().conj();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    /// Derivation action evaluated directly from its definition.
    fn act_by_definition(phi: &Form, l: &Endo, args: &[FrameVector]) -> C64 {
        let conv = phi.convention();
        let coords: Vec<Vec<C64>> = args.iter().map(|&v| conv.coords(v)).collect();
        let mut acc = c(0.0, 0.0);
        for i in 0..coords.len() {
            let mut a = coords.clone();
            a[i] = l.apply(&coords[i]);
            acc -= phi.evaluate_coords(&a).unwrap();
        }
        acc
    }

    #[test]
    fn endo_act_matches_definition() {
        let conv = FrameConvention::new(2);
        let l = Endo::from_matrix(conv, CMatrix::from_fn(4, 4, |r, col| c(r as f64 - 0.5 * col as f64, 0.3 * (r * col) as f64)));
        for coframe in [Coframe::Real, Coframe::Unitary] {
            let phi = fixture_form(conv, 2, coframe, 4);
            let lphi = phi.endo_act(&l);
            for args in [[FrameVector::Z(0), FrameVector::ZBar(1)], [FrameVector::E(0), FrameVector::E(3)]] {
                let lhs = lphi.evaluate(&args).unwrap();
                let rhs = act_by_definition(&phi, &l, &args);
                assert!((lhs - rhs).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn holomorphic_tensor_replaces_index() {
        // (Z_a ⊗ Z_b) Z^b = −Z̄^a and it kills Z̄^c.
        let conv = FrameConvention::new(2);
        let s = Endo::frame_tensor(conv, FrameVector::Z(0), FrameVector::Z(1));
        let zb = Form::generator(conv, &mi(2, &[1], &[]));
        let out = zb.endo_act(&s);
        let expected = Form::generator(conv, &mi(2, &[], &[0])).scale(c(-1.0, 0.0));
        assert!(out.max_abs_diff(&expected) < 1e-15);
        let zbar = Form::generator(conv, &mi(2, &[], &[1]));
        assert!(zbar.endo_act(&s).max_abs() < 1e-15);
        let s11 = Endo::frame_tensor(conv, FrameVector::Z(0), FrameVector::Z(0));
        assert!(Form::generator(conv, &mi(2, &[], &[0])).endo_act(&s11).max_abs() < 1e-15);
    }

    #[test]
    fn holomorphic_symmetric_shifts_bidegree() {
        let conv = FrameConvention::new(3);
        let s = Endo::frame_sym(conv, FrameVector::Z(0), FrameVector::Z(2));
        let phi = fixture_pq(conv, 2, 1, 5);
        assert_eq!(phi.endo_act(&s).bidegrees(1e-14), vec![(1, 2)]);
    }

    #[test]
    fn kaehler_bivector_acts_by_type() {
        let conv = FrameConvention::new(3);
        let w = kaehler_bivector(conv);
        for (p, q) in [(1, 1), (2, 0), (0, 2), (2, 1), (3, 0)] {
            let phi = fixture_pq(conv, p, q, (p * 10 + q) as u64);
            let expected = phi.scale(c(0.0, p as f64 - q as f64));
            assert!(phi.endo_act(&w).max_abs_diff(&expected) < 1e-13, "({p},{q})");
        }
    }

    #[test]
    fn endo_act_is_a_derivation_on_wedges() {
        // L(α∧β) = Lα∧β + α∧Lβ for one-forms, checked on evaluations.
        let conv = FrameConvention::new(2);
        let l = Endo::from_matrix(conv, CMatrix::from_fn(4, 4, |r, col| c((r + 2 * col) as f64 * 0.1, (r as f64) * 0.2)));
        let alpha = fixture_form(conv, 1, Coframe::Real, 11);
        let beta = fixture_form(conv, 1, Coframe::Real, 12);
        let wedge = |a: &Form, b: &Form| {
            let mut w = Form::zero(conv, 2, Coframe::Real);
            for m in masks_of_degree(4, 2) {
                let s: Vec<usize> = slots(m).collect();
                let (i, j) = (s[0], s[1]);
                let ai = a.coeff(1 << i);
                let aj = a.coeff(1 << j);
                let bi = b.coeff(1 << i);
                let bj = b.coeff(1 << j);
                // (a∧b)(e_i, e_j) = a_i b_j − a_j b_i, coefficient = √2 · value
                *w.coeff_mut(m) = (ai * bj - aj * bi) * SQRT_2;
            }
            w
        };
        let lhs = wedge(&alpha, &beta).endo_act(&l);
        let rhs = wedge(&alpha.endo_act(&l), &beta).add(&wedge(&alpha, &beta.endo_act(&l)));
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }

    #[test]
    fn interior_matches_evaluation() {
        let conv = FrameConvention::new(2);
        let phi = fixture_form(conv, 3, Coframe::Unitary, 21);
        let x = FrameVector::ZBar(1);
        let inner = phi.interior(x);
        let args = [FrameVector::Z(0), FrameVector::E(2)];
        let lhs = inner.evaluate(&args).unwrap();
        let rhs = phi.evaluate(&[x, args[0], args[1]]).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn insertion_norm_identity() {
        for n in 2..=4 {
            let conv = FrameConvention::new(n);
            for p in 0..=n.min(3) {
                for q in 0..=(n.min(3)) {
                    if p + q == 0 || p + q > 4 || p + q > 2 * n {
                        continue;
                    }
                    let phi = fixture_pq(conv, p, q, (100 * n + 10 * p + q) as u64);
                    let k = (p + q) as f64;
                    let mut lhs = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            let inner = phi.interior(FrameVector::ZBar(b)).interior(FrameVector::Z(a));
                            lhs += inner.norm_sq();
                        }
                    }
                    lhs *= k * (k - 1.0);
                    let rhs = (p * q) as f64 * phi.norm_sq();
                    assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0), "n={n} ({p},{q}): {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn lefschetz_adjoint_matches_real_frame_definition() {
        // (Λφ)(v) = k(k−1) Σ_a φ(e_a, e_{a+n}, v)
        let conv = FrameConvention::new(3);
        let phi = fixture_pq(conv, 2, 1, 31);
        let lam = phi.lefschetz_adjoint();
        let v = FrameVector::Z(2);
        let lhs = lam.evaluate(&[v]).unwrap();
        let mut rhs = c(0.0, 0.0);
        for a in 0..3 {
            rhs += phi.evaluate(&[FrameVector::E(a), FrameVector::E(a + 3), v]).unwrap();
        }
        rhs *= 6.0;
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn lefschetz_adjoint_of_kaehler_form() {
        // ω = Σ_a e^a ∧ e^{a+n}; Λω = k(k−1)·n = 2n.
        let n = 2;
        let conv = FrameConvention::new(n);
        let mut omega = Form::zero(conv, 2, Coframe::Real);
        for a in 0..n {
            *omega.coeff_mut((1 << a) | (1 << (a + n))) = c(SQRT_2, 0.0);
        }
        let lam = omega.lefschetz_adjoint();
        assert!((lam.coeff(0) - c(2.0 * n as f64, 0.0)).norm() < 1e-13);
        assert!(omega.project_primitive().unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn disjoint_generator_is_primitive() {
        let conv = FrameConvention::new(3);
        let phi = Form::generator(conv, &mi(3, &[0, 1], &[2]));
        assert!(phi.lefschetz_adjoint().max_abs() < 1e-15);
        let proj = phi.project_primitive().unwrap();
        assert!(proj.max_abs_diff(&phi) < 1e-13);
    }

    #[test]
    fn projection_is_idempotent_and_primitive() {
        let conv = FrameConvention::new(3);
        for (p, q) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            let phi = fixture_pq(conv, p, q, 7 + p as u64);
            let pr = phi.project_primitive().unwrap();
            assert!(pr.lefschetz_adjoint().max_abs() < 1e-12);
            assert!(pr.project_primitive().unwrap().max_abs_diff(&pr) < 1e-12);
            // orthogonality: φ − Pφ ⟂ Pφ
            let resid = phi.sub(&pr);
            assert!(resid.hermitian(&pr).norm() < 1e-12);
        }
    }

    #[test]
    fn real_form_construction() {
        let conv = FrameConvention::new(2);
        let phi = FormPQ::new(fixture_pq(conv, 2, 0, 3), 2, 0, 1e-14).unwrap();
        let psi = RealForm::from_pq(&phi);
        assert!(psi.form().reality_residual() < 1e-15);
        assert!((psi.form().norm_sq() - 2.0 * phi.form().norm_sq()).abs() < 1e-13);
        assert!(RealForm::new(phi.form().clone(), 2, 0, 1e-12).is_err());
    }

    #[test]
    fn form_pq_rejects_mixed() {
        let conv = FrameConvention::new(2);
        let mixed = fixture_form(conv, 2, Coframe::Unitary, 17);
        assert!(FormPQ::new(mixed, 1, 1, 1e-12).is_err());
    }
}
