//! Frames, complexification and endomorphisms of `V ⊗ ℂ`.
//!
//! Real frame `e_0 … e_{2n-1}` with `J e_a = e_{a+n}`. The unitary frame is
//! `Z_a = (e_a − i e_{a+n})/√2`, `Z̄_a = (e_a + i e_{a+n})/√2`. The metric is
//! extended complex-bilinearly: `g(u, v) = Σ u_i v_i`, so `g(Z_a, Z̄_b) = δ_ab`.
//!
//! Endomorphisms are stored as complex `2n × 2n` matrices acting on real-frame
//! coordinates. The tensor `v ⊗ w` acts by `z ↦ g(v, z) w`.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::CMatrix;
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Complex dimension plus the fixed frame layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FrameConvention {
    n: usize,
}

impl FrameConvention {
    /// # Panics
    /// If `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "complex dimension must be at least 1");
        FrameConvention { n }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    /// Real coordinates of a frame vector.
    pub fn coords(&self, v: FrameVector) -> Vec<C64> {
        let d = self.real_dim();
        let mut out = vec![c(0.0, 0.0); d];
        match v {
            FrameVector::E(i) => {
                assert!(i < d, "real frame index {i} out of range");
                out[i] = c(1.0, 0.0);
            }
            FrameVector::Z(a) => {
                assert!(a < self.n, "unitary frame index {a} out of range");
                out[a] = c(FRAC_1_SQRT_2, 0.0);
                out[a + self.n] = c(0.0, -FRAC_1_SQRT_2);
            }
            FrameVector::ZBar(a) => {
                assert!(a < self.n, "unitary frame index {a} out of range");
                out[a] = c(FRAC_1_SQRT_2, 0.0);
                out[a + self.n] = c(0.0, FRAC_1_SQRT_2);
            }
        }
        out
    }

    /// Matrix whose column `2a` is `Z_a` and column `2a + 1` is `Z̄_a`.
    /// It is unitary, so its adjoint changes real-frame coordinates into
    /// unitary-frame coordinates.
    pub fn unitary_frame_matrix(&self) -> CMatrix {
        let d = self.real_dim();
        let mut p = CMatrix::zeros(d, d);
        for a in 0..self.n {
            p.set_column(2 * a, &self.coords(FrameVector::Z(a)));
            p.set_column(2 * a + 1, &self.coords(FrameVector::ZBar(a)));
        }
        p
    }

    /// The complex structure `J` on real-frame coordinates.
    pub fn j_matrix(&self) -> CMatrix {
        let n = self.n;
        let mut j = CMatrix::zeros(2 * n, 2 * n);
        for a in 0..n {
            j[(a + n, a)] = c(1.0, 0.0);
            j[(a, a + n)] = c(-1.0, 0.0);
        }
        j
    }
}

/// A named vector of the real or unitary frame (0-based indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrameVector {
    E(usize),
    Z(usize),
    ZBar(usize),
}

impl FrameVector {
    pub fn conj(self) -> Self {
        match self {
            FrameVector::E(i) => FrameVector::E(i),
            FrameVector::Z(a) => FrameVector::ZBar(a),
            FrameVector::ZBar(a) => FrameVector::Z(a),
        }
    }
}

/// Complex-bilinear metric.
pub fn g(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Hermitian product `g(u, v̄)`.
pub fn h(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

/// Which subspace an endomorphism was built to lie in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EndoTag {
    Gl,
    So,
    Sym2,
    HolSym2,
    HolWedge2,
    U,
    Su,
}

/// Complex-linear endomorphism of `V ⊗ ℂ` in real-frame coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Endo {
    pub(crate) n: usize,
    pub(crate) matrix: CMatrix,
    pub tag: Option<EndoTag>,
}

impl Endo {
    pub fn from_matrix(conv: FrameConvention, matrix: CMatrix) -> Self {
        assert_eq!(matrix.rows(), conv.real_dim());
        assert!(matrix.is_square());
        Endo { n: conv.n(), matrix, tag: None }
    }

    pub fn zero(conv: FrameConvention) -> Self {
        Self::from_matrix(conv, CMatrix::zeros(conv.real_dim(), conv.real_dim()))
    }

    pub fn with_tag(mut self, tag: EndoTag) -> Self {
        self.tag = Some(tag);
        self
    }

    pub fn convention(&self) -> FrameConvention {
        FrameConvention::new(self.n)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `v ⊗ w`, acting by `z ↦ g(v, z) w`.
    pub fn tensor(conv: FrameConvention, v: &[C64], w: &[C64]) -> Self {
        let d = conv.real_dim();
        Self::from_matrix(conv, CMatrix::from_fn(d, d, |r, col| w[r] * v[col]))
    }

    /// `v ∧ w = v ⊗ w − w ⊗ v`.
    pub fn wedge(conv: FrameConvention, v: &[C64], w: &[C64]) -> Self {
        Self::tensor(conv, v, w).sub(&Self::tensor(conv, w, v))
    }

    /// `v ⊙ w = v ⊗ w + w ⊗ v`.
    pub fn sym(conv: FrameConvention, v: &[C64], w: &[C64]) -> Self {
        Self::tensor(conv, v, w).add(&Self::tensor(conv, w, v))
    }

    pub fn frame_tensor(conv: FrameConvention, v: FrameVector, w: FrameVector) -> Self {
        Self::tensor(conv, &conv.coords(v), &conv.coords(w))
    }

    pub fn frame_wedge(conv: FrameConvention, v: FrameVector, w: FrameVector) -> Self {
        Self::wedge(conv, &conv.coords(v), &conv.coords(w))
    }

    pub fn frame_sym(conv: FrameConvention, v: FrameVector, w: FrameVector) -> Self {
        Self::sym(conv, &conv.coords(v), &conv.coords(w))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.matrix.mul_vec(v)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Endo { n: self.n, matrix: self.matrix.add(&other.matrix), tag: None }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Endo { n: self.n, matrix: self.matrix.sub(&other.matrix), tag: None }
    }

    pub fn scale(&self, s: C64) -> Self {
        Endo { n: self.n, matrix: self.matrix.scale(s), tag: self.tag }
    }

    /// Complex conjugate endomorphism `L̄(v) = conj(L(v̄))`.
    pub fn conj(&self) -> Self {
        Endo { n: self.n, matrix: self.matrix.conj(), tag: None }
    }

    /// Tensor norm `tr(L L^*)`, i.e. the squared Frobenius norm.
    pub fn tensor_norm_sq(&self) -> f64 {
        let f = self.matrix.frobenius_norm();
        f * f
    }

    /// Norm used for skew endomorphisms viewed as bivectors in `𝔲(n)`:
    /// half the tensor norm, so that `Z_a ∧ Z̄_b` has unit length.
    pub fn bivector_norm_sq(&self) -> f64 {
        0.5 * self.tensor_norm_sq()
    }

    /// Hermitian tensor inner product `tr(L₁ L₂^*)`.
    pub fn tensor_inner(&self, other: &Self) -> C64 {
        self.matrix
            .as_slice()
            .iter()
            .zip(other.matrix.as_slice())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// Matrix of this endomorphism with respect to the unitary frame ordered
    /// `(Z_0, Z̄_0, Z_1, Z̄_1, …)`.
    pub fn unitary_matrix(&self) -> CMatrix {
        self.matrix.congruence(&self.convention().unitary_frame_matrix())
    }

    /// The symmetric "hat" matrix `s_ab = g(S Z̄_a, Z̄_b)` of an element of `⊙²V^{1,0}`.
    pub fn hat_matrix(&self) -> CMatrix {
        let conv = self.convention();
        let n = conv.n();
        let zbar: Vec<Vec<C64>> = (0..n).map(|a| conv.coords(FrameVector::ZBar(a))).collect();
        let images: Vec<Vec<C64>> = zbar.iter().map(|v| self.apply(v)).collect();
        CMatrix::from_fn(n, n, |a, b| g(&images[a], &zbar[b]))
    }

    /// Residual of membership in `⊙²V^{1,0}`: the endomorphism must kill `V^{1,0}`,
    /// map `V^{0,1}` into `V^{1,0}`, and have a symmetric hat matrix.
    pub fn holomorphic_sym2_residual(&self) -> f64 {
        let u = self.unitary_matrix();
        let n = self.n;
        let mut worst = 0.0f64;
        for r in 0..2 * n {
            for col in 0..2 * n {
                // only (Z_r ← Z̄_col) entries may be nonzero
                if r % 2 == 0 && col % 2 == 1 {
                    continue;
                }
                worst = worst.max(u[(r, col)].norm());
            }
        }
        worst.max(self.hat_matrix().symmetric_residual())
    }

    /// Inverse of [`Endo::hat_matrix`]: `S = Σ_ab s_ab Z_a ⊗ Z_b`.
    pub fn from_hat_matrix(conv: FrameConvention, s: &CMatrix) -> Self {
        let n = conv.n();
        assert_eq!((s.rows(), s.cols()), (n, n));
        let mut out = Endo::zero(conv);
        for a in 0..n {
            for b in 0..n {
                if s[(a, b)] == c(0.0, 0.0) {
                    continue;
                }
                out = out.add(&Endo::frame_tensor(conv, FrameVector::Z(a), FrameVector::Z(b)).scale(s[(a, b)]));
            }
        }
        out.with_tag(EndoTag::HolSym2)
    }
}

/// The Kähler bivector `ω_K`, realized as the endomorphism `−J`.
///
/// With [`Endo::bivector_norm_sq`] it has squared length `n`, and it acts on
/// `(p, q)`-forms by multiplication with `i (p − q)`.
pub fn kaehler_bivector(conv: FrameConvention) -> Endo {
    Endo::from_matrix(conv, conv.j_matrix().scale_real(-1.0)).with_tag(EndoTag::U)
}

/// Index pair `(a, b)` with `a ≤ b` of the `ν`-th generator of `⊙²V^{1,0}`.
/// Generators are ordered `(0,0), (0,1), …, (0,n−1), (1,1), …`.
pub fn sym2_index_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            out.push((a, b));
        }
    }
    out
}

/// Normalization making `s · Z_a ⊙ Z_b` a tensor-unit vector.
pub fn sym2_scale(a: usize, b: usize) -> f64 {
    if a == b {
        0.5
    } else {
        FRAC_1_SQRT_2
    }
}

/// Unitary basis `{Z_a ⊙ Z_b / √2 (a < b), Z_a ⊙ Z_a / 2}` of `⊙²V^{1,0}`
/// for the tensor norm, in the order of [`sym2_index_pairs`].
pub fn hol_sym2_basis(conv: FrameConvention) -> Vec<Endo> {
    sym2_index_pairs(conv.n())
        .into_iter()
        .map(|(a, b)| {
            Endo::frame_sym(conv, FrameVector::Z(a), FrameVector::Z(b))
                .scale(c(sym2_scale(a, b), 0.0))
                .with_tag(EndoTag::HolSym2)
        })
        .collect()
}

/// Unitary basis `{Z_a ∧ Z_b / √2}` of `Λ²V^{1,0}` for the tensor norm.
pub fn hol_wedge2_basis(conv: FrameConvention) -> Vec<Endo> {
    let n = conv.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            out.push(
                Endo::frame_wedge(conv, FrameVector::Z(a), FrameVector::Z(b))
                    .scale(c(FRAC_1_SQRT_2, 0.0))
                    .with_tag(EndoTag::HolWedge2),
            );
        }
    }
    out
}

/// Basis `{Z_a ∧ Z̄_b}` of `𝔲(n) ⊗ ℂ`, unitary for the bivector norm,
/// row-major in `(a, b)`.
pub fn u_basis(conv: FrameConvention) -> Vec<Endo> {
    let n = conv.n();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            out.push(Endo::frame_wedge(conv, FrameVector::Z(a), FrameVector::ZBar(b)).with_tag(EndoTag::U));
        }
    }
    out
}

/// Orthonormal basis of the vectors in `ℝⁿ` orthogonal to `(1, …, 1)`
/// (Helmert contrasts), as rows.
pub fn traceless_diagonal_basis(n: usize) -> Vec<Vec<f64>> {
    (1..n)
        .map(|k| {
            // k ones followed by −k, normalized
            let norm = ((k * (k + 1)) as f64).sqrt();
            let mut row = vec![0.0; n];
            for x in row.iter_mut().take(k) {
                *x = 1.0 / norm;
            }
            row[k] = -(k as f64) / norm;
            row
        })
        .collect()
}

/// Basis of `𝔰𝔲(n) ⊗ ℂ`, unitary for the bivector norm: off-diagonal
/// `Z_a ∧ Z̄_b` followed by traceless diagonal combinations.
/// Every element is orthogonal to `ω_K`.
pub fn su_basis(conv: FrameConvention) -> Vec<Endo> {
    let n = conv.n();
    let mut out = Vec::with_capacity(n * n - 1);
    for a in 0..n {
        for b in 0..n {
            if a != b {
                out.push(Endo::frame_wedge(conv, FrameVector::Z(a), FrameVector::ZBar(b)).with_tag(EndoTag::Su));
            }
        }
    }
    for row in traceless_diagonal_basis(n) {
        let mut e = Endo::zero(conv);
        for (a, &w) in row.iter().enumerate() {
            if w != 0.0 {
                e = e.add(&Endo::frame_wedge(conv, FrameVector::Z(a), FrameVector::ZBar(a)).scale(c(w, 0.0)));
            }
        }
        out.push(e.with_tag(EndoTag::Su));
    }
    out
}

/// Tensor-orthonormal real basis of `𝔤𝔩(V)`: `e_i ⊗ e_j`, row-major.
pub fn gl_basis(conv: FrameConvention) -> Vec<Endo> {
    let d = conv.real_dim();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(Endo::frame_tensor(conv, FrameVector::E(i), FrameVector::E(j)).with_tag(EndoTag::Gl));
        }
    }
    out
}

/// Pairs `(i, j)` with `i < j`, in row-major order.
pub fn strict_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(d * (d.saturating_sub(1)) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            out.push((i, j));
        }
    }
    out
}

/// Pairs `(i, j)` with `i ≤ j`, in row-major order.
pub fn weak_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            out.push((i, j));
        }
    }
    out
}

/// Tensor-orthonormal basis `e_i ∧ e_j / √2` of `𝔰𝔬(V) ≅ Λ²V`, in [`strict_pairs`] order.
pub fn so_basis(conv: FrameConvention) -> Vec<Endo> {
    strict_pairs(conv.real_dim())
        .into_iter()
        .map(|(i, j)| {
            Endo::frame_wedge(conv, FrameVector::E(i), FrameVector::E(j))
                .scale(c(FRAC_1_SQRT_2, 0.0))
                .with_tag(EndoTag::So)
        })
        .collect()
}

/// Tensor-orthonormal basis `e_i ⊙ e_j / √2 (i < j)`, `e_i ⊙ e_i / 2` of `⊙²V`,
/// in [`weak_pairs`] order.
pub fn sym2_basis(conv: FrameConvention) -> Vec<Endo> {
    weak_pairs(conv.real_dim())
        .into_iter()
        .map(|(i, j)| {
            Endo::frame_sym(conv, FrameVector::E(i), FrameVector::E(j))
                .scale(c(sym2_scale(i, j), 0.0))
                .with_tag(EndoTag::Sym2)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_duality() {
        for n in 1..=4 {
            let conv = FrameConvention::new(n);
            for a in 0..n {
                for b in 0..n {
                    let za = conv.coords(FrameVector::Z(a));
                    let zb = conv.coords(FrameVector::Z(b));
                    let zbb = conv.coords(FrameVector::ZBar(b));
                    assert!(g(&za, &zb).norm() < 1e-15);
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((g(&za, &zbb) - c(expected, 0.0)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn j_is_complex_structure() {
        let conv = FrameConvention::new(3);
        let j = conv.j_matrix();
        assert!(j.mul(&j).add(&CMatrix::identity(6)).max_abs() < 1e-15);
        // orthogonal: Jᵀ J = Id
        assert!(j.transpose().mul(&j).max_abs_diff(&CMatrix::identity(6)) < 1e-15);
        // Z_a is the +i eigenvector
        let z = conv.coords(FrameVector::Z(1));
        let jz = j.mul_vec(&z);
        for (x, y) in jz.iter().zip(&z) {
            assert!((x - c(0.0, 1.0) * y).norm() < 1e-15);
        }
    }

    #[test]
    fn unitary_frame_is_unitary() {
        let p = FrameConvention::new(4).unitary_frame_matrix();
        assert!(p.unitarity_residual() < 1e-15);
    }

    #[test]
    fn norm_conventions() {
        let conv = FrameConvention::new(2);
        let w = Endo::frame_wedge(conv, FrameVector::E(0), FrameVector::E(1));
        let s = Endo::frame_sym(conv, FrameVector::E(0), FrameVector::E(1));
        assert!((w.tensor_norm_sq() - 2.0).abs() < 1e-15);
        assert!((s.tensor_norm_sq() - 2.0).abs() < 1e-15);
        assert!((kaehler_bivector(conv).bivector_norm_sq() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn trace_splits_over_unitary_frame() {
        let conv = FrameConvention::new(3);
        // A(u, v) = g(M u, v) for an arbitrary complex matrix M
        let m = CMatrix::from_fn(6, 6, |r, col| c((r * 7 + col) as f64 * 0.1, (r as f64) - (col as f64) * 0.3));
        let a = |u: &[C64], v: &[C64]| g(&m.mul_vec(u), v);
        let lhs: C64 = (0..6).map(|j| a(&conv.coords(FrameVector::E(j)), &conv.coords(FrameVector::E(j)))).sum();
        let rhs: C64 = (0..3)
            .map(|k| {
                let z = conv.coords(FrameVector::Z(k));
                let zb = conv.coords(FrameVector::ZBar(k));
                a(&z, &zb) + a(&zb, &z)
            })
            .sum();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    fn assert_unitary(basis: &[Endo], inner: impl Fn(&Endo, &Endo) -> C64) {
        for (i, x) in basis.iter().enumerate() {
            for (j, y) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((inner(x, y) - c(expected, 0.0)).norm() < 1e-14, "pair ({i}, {j})");
            }
        }
    }

    #[test]
    fn bases_are_unitary() {
        let conv = FrameConvention::new(3);
        let tensor = |x: &Endo, y: &Endo| x.tensor_inner(y);
        let bivector = |x: &Endo, y: &Endo| x.tensor_inner(y).scale(0.5);
        assert_unitary(&hol_sym2_basis(conv), tensor);
        assert_unitary(&hol_wedge2_basis(conv), tensor);
        assert_unitary(&gl_basis(conv), tensor);
        assert_unitary(&so_basis(conv), tensor);
        assert_unitary(&sym2_basis(conv), tensor);
        assert_unitary(&u_basis(conv), bivector);
        assert_unitary(&su_basis(conv), bivector);
        let omega = kaehler_bivector(conv);
        for x in su_basis(conv) {
            assert!(x.tensor_inner(&omega).norm() < 1e-14);
        }
    }

    #[test]
    fn hol_sym2_membership_and_hat_roundtrip() {
        let conv = FrameConvention::new(3);
        for s in hol_sym2_basis(conv) {
            assert!(s.holomorphic_sym2_residual() < 1e-15);
            let back = Endo::from_hat_matrix(conv, &s.hat_matrix());
            assert!(back.matrix().max_abs_diff(s.matrix()) < 1e-15);
        }
        let not_sym = Endo::frame_tensor(conv, FrameVector::Z(0), FrameVector::ZBar(1));
        assert!(not_sym.holomorphic_sym2_residual() > 0.5);
    }

    #[test]
    fn traceless_diagonal_rows_orthonormal() {
        let rows = traceless_diagonal_basis(5);
        for (i, r) in rows.iter().enumerate() {
            assert!(r.iter().sum::<f64>().abs() < 1e-15);
            for (j, s) in rows.iter().enumerate() {
                let ip: f64 = r.iter().zip(s).map(|(x, y)| x * y).sum();
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }
}
