//! Algebraic curvature tensors and the operators they induce.
//!
//! Components `R_{ijkl} = R(e_i, e_j, e_k, e_l)` are stored densely. The
//! endomorphism `R(X, Y)` is defined by `g(R(X, Y)Z, W) = R(X, Y, Z, W)`, and
//! the round sphere has `R_{ijkl} = g_ik g_jl − g_il g_jk`, so its curvature
//! operator `g(𝔑(X∧Y), Z∧W) = 2R(X, Y, Z, W)` is the identity.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::frame::{sym2_index_pairs, sym2_scale, traceless_diagonal_basis, FrameConvention, FrameVector};
use crate::linalg::CMatrix;
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

/// Default relative tolerance for symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Default relative tolerance for Einstein detection.
pub const EINSTEIN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryKind {
    /// `R_{ijkl} = −R_{jikl}`
    FirstPairSkew,
    /// `R_{ijkl} = −R_{ijlk}`
    SecondPairSkew,
    /// `R_{ijkl} = R_{klij}`
    PairExchange,
    Bianchi,
    Kaehler,
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SymmetryKind::FirstPairSkew => "R_ijkl = -R_jikl",
            SymmetryKind::SecondPairSkew => "R_ijkl = -R_ijlk",
            SymmetryKind::PairExchange => "R_ijkl = R_klij",
            SymmetryKind::Bianchi => "first Bianchi identity",
            SymmetryKind::Kaehler => "J-invariance R(JX,JY,Z,W) = R(X,Y,Z,W)",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurvatureError {
    SymmetryViolation { identity: SymmetryKind, index: [usize; 4], residual: f64 },
    NotKaehler { residual: f64 },
    NotEinstein { residual: f64 },
    NotHermitian { residual: f64 },
    Dimension { expected: usize, got: usize },
    /// A component was given twice with values that contradict the symmetries.
    ConflictingEntry { index: [usize; 4] },
}

impl fmt::Display for CurvatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvatureError::SymmetryViolation { identity, index, residual } => write!(
                f,
                "symmetry violated: {identity} at (i,j,k,l) = ({}, {}, {}, {}), residual {residual:e}",
                index[0], index[1], index[2], index[3]
            ),
            CurvatureError::NotKaehler { residual } => write!(f, "tensor is not Kähler (residual {residual:e})"),
            CurvatureError::NotEinstein { residual } => write!(f, "tensor is not Einstein (residual {residual:e})"),
            CurvatureError::NotHermitian { residual } => write!(f, "matrix is not Hermitian (residual {residual:e})"),
            CurvatureError::Dimension { expected, got } => write!(f, "expected {expected} entries, got {got}"),
            CurvatureError::ConflictingEntry { index } => write!(
                f,
                "conflicting value for component ({}, {}, {}, {})",
                index[0], index[1], index[2], index[3]
            ),
        }
    }
}

impl core::error::Error for CurvatureError {}

/// An index permutation with the sign it contributes.
type IndexMap = fn(usize, usize, usize, usize) -> ([usize; 4], f64);

/// A validated algebraic curvature tensor on `ℝ^{2n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicCurvatureTensor {
    n: usize,
    comps: Vec<f64>,
    pair_residual: f64,
    bianchi_residual: f64,
    kaehler_residual: f64,
    bianchi_validated: bool,
    kaehler_validated: bool,
}

#[inline]
fn idx(d: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * d + j) * d + k) * d + l
}

impl AlgebraicCurvatureTensor {
    /// Validates raw components `R_{ijkl}` (row-major in `i, j, k, l`).
    ///
    /// Pair symmetries are mandatory; the Bianchi and Kähler residuals are
    /// recorded and turned into flags. Tolerances are relative to `max |R|`.
    pub fn validate(n: usize, comps: Vec<f64>, tol: f64) -> Result<Self, CurvatureError> {
        let d = 2 * n;
        if comps.len() != d * d * d * d {
            return Err(CurvatureError::Dimension { expected: d * d * d * d, got: comps.len() });
        }
        let scale = comps.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let limit = tol * scale;
        let mut pair_residual = 0.0f64;
        let checks: [(SymmetryKind, IndexMap); 3] = [
            (SymmetryKind::FirstPairSkew, |i, j, k, l| ([j, i, k, l], -1.0)),
            (SymmetryKind::SecondPairSkew, |i, j, k, l| ([i, j, l, k], -1.0)),
            (SymmetryKind::PairExchange, |i, j, k, l| ([k, l, i, j], 1.0)),
        ];
        for (kind, map) in checks {
            let mut worst = 0.0f64;
            let mut worst_at = [0; 4];
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        for l in 0..d {
                            let (t, s) = map(i, j, k, l);
                            let r = (comps[idx(d, i, j, k, l)] - s * comps[idx(d, t[0], t[1], t[2], t[3])]).abs();
                            if r > worst {
                                worst = r;
                                worst_at = [i, j, k, l];
                            }
                        }
                    }
                }
            }
            if worst > limit {
                return Err(CurvatureError::SymmetryViolation { identity: kind, index: worst_at, residual: worst });
            }
            pair_residual = pair_residual.max(worst);
        }
        let mut t = AlgebraicCurvatureTensor {
            n,
            comps,
            pair_residual,
            bianchi_residual: 0.0,
            kaehler_residual: 0.0,
            bianchi_validated: false,
            kaehler_validated: false,
        };
        t.bianchi_residual = t.bianchi_worst().1;
        t.kaehler_residual = t.kaehler_worst().1;
        t.bianchi_validated = t.bianchi_residual <= limit;
        t.kaehler_validated = t.kaehler_residual <= limit;
        Ok(t)
    }

    /// Like [`validate`](Self::validate), but also requires the Bianchi identity.
    pub fn validate_strict(n: usize, comps: Vec<f64>, tol: f64) -> Result<Self, CurvatureError> {
        let t = Self::validate(n, comps, tol)?;
        if !t.bianchi_validated {
            let (at, residual) = t.bianchi_worst();
            return Err(CurvatureError::SymmetryViolation { identity: SymmetryKind::Bianchi, index: at, residual });
        }
        Ok(t)
    }

    /// Builds a tensor from sparse entries, filling in the orbit of each entry
    /// under the pair symmetries. Omitted components are zero.
    pub fn from_entries(n: usize, entries: &[([usize; 4], f64)], tol: f64) -> Result<Self, CurvatureError> {
        let d = 2 * n;
        let mut comps = vec![0.0; d * d * d * d];
        let mut set = vec![false; d * d * d * d];
        for &([i, j, k, l], v) in entries {
            if [i, j, k, l].iter().any(|&x| x >= d) {
                return Err(CurvatureError::Dimension { expected: d, got: i.max(j).max(k).max(l) + 1 });
            }
            let orbit = [
                ([i, j, k, l], v),
                ([j, i, k, l], -v),
                ([i, j, l, k], -v),
                ([j, i, l, k], v),
                ([k, l, i, j], v),
                ([l, k, i, j], -v),
                ([k, l, j, i], -v),
                ([l, k, j, i], v),
            ];
            for (t, val) in orbit {
                let p = idx(d, t[0], t[1], t[2], t[3]);
                if set[p] && (comps[p] - val).abs() > tol * val.abs().max(comps[p].abs()).max(1.0) {
                    return Err(CurvatureError::ConflictingEntry { index: [i, j, k, l] });
                }
                comps[p] = val;
                set[p] = true;
            }
        }
        Self::validate(n, comps, tol)
    }

    pub fn zero(n: usize) -> Self {
        let d = 2 * n;
        Self::validate(n, vec![0.0; d * d * d * d], SYMMETRY_TOL).expect("zero tensor is valid")
    }

    /// The round-sphere tensor `c (g_ik g_jl − g_il g_jk)`; its curvature operator is `c · Id`.
    pub fn sphere(n: usize, c: f64) -> Self {
        let d = 2 * n;
        let mut comps = vec![0.0; d * d * d * d];
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                comps[idx(d, i, j, i, j)] = c;
                comps[idx(d, i, j, j, i)] = -c;
            }
        }
        Self::validate(n, comps, SYMMETRY_TOL).expect("sphere tensor is valid")
    }

    pub fn convention(&self) -> FrameConvention {
        FrameConvention::new(self.n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.comps[idx(2 * self.n, i, j, k, l)]
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn pair_residual(&self) -> f64 {
        self.pair_residual
    }

    pub fn bianchi_residual(&self) -> f64 {
        self.bianchi_residual
    }

    pub fn kaehler_residual(&self) -> f64 {
        self.kaehler_residual
    }

    pub fn bianchi_validated(&self) -> bool {
        self.bianchi_validated
    }

    pub fn kaehler_validated(&self) -> bool {
        self.kaehler_validated
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::validate(self.n, self.comps.iter().map(|x| x * c).collect(), SYMMETRY_TOL).expect("scaling keeps symmetries")
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect();
        Self::validate(self.n, comps, SYMMETRY_TOL).expect("sum keeps symmetries")
    }

    fn bianchi_worst(&self) -> ([usize; 4], f64) {
        let d = self.real_dim();
        let mut worst = 0.0f64;
        let mut at = [0; 4];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let r = (self.get(i, j, k, l) + self.get(j, k, i, l) + self.get(k, i, j, l)).abs();
                        if r > worst {
                            worst = r;
                            at = [i, j, k, l];
                        }
                    }
                }
            }
        }
        (at, worst)
    }

    /// Worst deviation of `R(JX, JY, Z, W)` from `R(X, Y, Z, W)` on frame vectors.
    /// The second-pair identity follows from pair exchange.
    fn kaehler_worst(&self) -> ([usize; 4], f64) {
        let n = self.n;
        let d = self.real_dim();
        // J e_a = e_{a+n}, J e_{a+n} = −e_a
        let jmap = |i: usize| if i < n { (i + n, 1.0) } else { (i - n, -1.0) };
        let mut worst = 0.0f64;
        let mut at = [0; 4];
        for i in 0..d {
            let (ji, si) = jmap(i);
            for j in 0..d {
                let (jj, sj) = jmap(j);
                for k in 0..d {
                    for l in 0..d {
                        let r = (si * sj * self.get(ji, jj, k, l) - self.get(i, j, k, l)).abs();
                        if r > worst {
                            worst = r;
                            at = [i, j, k, l];
                        }
                    }
                }
            }
        }
        (at, worst)
    }

    /// `R(X, Y, Z, W)` for complex vectors in real-frame coordinates.
    pub fn eval(&self, x: &[C64], y: &[C64], z: &[C64], w: &[C64]) -> C64 {
        let d = self.real_dim();
        let nz = |v: &[C64]| -> Vec<(usize, C64)> {
            v.iter().enumerate().filter(|(_, c)| c.re != 0.0 || c.im != 0.0).map(|(i, &c)| (i, c)).collect()
        };
        let (xs, ys, zs, ws) = (nz(x), nz(y), nz(z), nz(w));
        let mut acc = C64::new(0.0, 0.0);
        for &(i, a) in &xs {
            for &(j, b) in &ys {
                for &(k, c) in &zs {
                    let ab_c = a * b * c;
                    for &(l, e) in &ws {
                        acc += ab_c * e * self.comps[idx(d, i, j, k, l)];
                    }
                }
            }
        }
        acc
    }

    pub fn eval_frame(&self, x: FrameVector, y: FrameVector, z: FrameVector, w: FrameVector) -> C64 {
        let c = self.convention();
        self.eval(&c.coords(x), &c.coords(y), &c.coords(z), &c.coords(w))
    }

    /// Matrix of the endomorphism `R(e_i, e_j)`: entry `(w, z)` is `R_{ijzw}`.
    pub fn endo_matrix(&self, i: usize, j: usize) -> CMatrix {
        let d = self.real_dim();
        CMatrix::from_fn(d, d, |w, z| C64::new(self.get(i, j, z, w), 0.0))
    }

    fn require_kaehler(&self) -> Result<(), CurvatureError> {
        if self.kaehler_validated {
            Ok(())
        } else {
            Err(CurvatureError::NotKaehler { residual: self.kaehler_residual })
        }
    }
}

/// Which operator a matrix represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `ℛ¹` on `Λ²V`, basis `e_i ∧ e_j / √2` (`i < j`).
    R1Wedge2,
    /// `ℛ²` on `⊙²V`, basis `e_i ⊙ e_j / √2` (`i < j`), `e_i ⊙ e_i / 2`.
    R2Sym2,
    /// `𝔎` on `Λ^{1,1}V`, basis `Z_a ∧ Z̄_b / √2`, row-major in `(a, b)`.
    Kaehler,
    /// `𝒞` on `⊙²V^{1,0}`, basis `Z_a ⊙ Z_b / √2` (`a < b`), `Z_a ⊙ Z_a / 2`,
    /// in [`sym2_index_pairs`] order.
    Calabi,
    /// `𝔎` restricted to `𝔰𝔲(n)`, basis as in [`crate::frame::su_basis`].
    KaehlerSu,
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::R1Wedge2 => "R1 on wedge^2 V",
            OperatorKind::R2Sym2 => "R2 on sym^2 V",
            OperatorKind::Kaehler => "Kaehler curvature operator",
            OperatorKind::Calabi => "Calabi curvature operator",
            OperatorKind::KaehlerSu => "Kaehler curvature operator on su(n)",
        }
    }
}

/// Hermitian matrix `H_{μν} = g(Op(B_ν), conj(B_μ))` in the basis fixed by `kind`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureOperatorMatrix {
    pub kind: OperatorKind,
    pub n: usize,
    pub matrix: CMatrix,
}

impl CurvatureOperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// Calabi operator entries: `H_{(cd),(ab)} = s_ab s_cd · 4 R(Z_a, Z̄_c, Z̄_d, Z_b)`.
pub fn calabi_from_tensor(r: &AlgebraicCurvatureTensor) -> Result<CurvatureOperatorMatrix, CurvatureError> {
    r.require_kaehler()?;
    let n = r.n();
    let pairs = sym2_index_pairs(n);
    let m = pairs.len();
    let mut h = CMatrix::zeros(m, m);
    for (nu, &(a, b)) in pairs.iter().enumerate() {
        for (mu, &(cc, dd)) in pairs.iter().enumerate() {
            let v = r.eval_frame(FrameVector::Z(a), FrameVector::ZBar(cc), FrameVector::ZBar(dd), FrameVector::Z(b));
            h[(mu, nu)] = v * (4.0 * sym2_scale(a, b) * sym2_scale(cc, dd));
        }
    }
    Ok(CurvatureOperatorMatrix { kind: OperatorKind::Calabi, n, matrix: h.hermitian_part() })
}

/// The unique Kähler curvature tensor with the given Calabi matrix.
///
/// Writing `T_{acdb} = R(Z_a, Z̄_c, Z̄_d, Z_b)`, the Calabi entries give
/// `T_{acdb} = H_{(cd),(ab)} / (4 s_ab s_cd)`, extended symmetrically in
/// `a ↔ b` and `c ↔ d`. Pair skew-symmetry fixes the remaining nonzero
/// unitary-frame components, the real components follow from
/// `e_i = Σ_α conj(P_{iα}) f_α`, and the imaginary parts cancel.
pub fn tensor_from_calabi(n: usize, h: &CMatrix, tol: f64) -> Result<AlgebraicCurvatureTensor, CurvatureError> {
    let pairs = sym2_index_pairs(n);
    let m = pairs.len();
    if h.rows() != m || h.cols() != m {
        return Err(CurvatureError::Dimension { expected: m, got: h.rows() });
    }
    let scale = h.max_abs().max(1.0);
    let hr = h.hermitian_residual();
    if hr > tol * scale {
        return Err(CurvatureError::NotHermitian { residual: hr });
    }
    let pos = |a: usize, b: usize| {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        pairs.iter().position(|&p| p == (x, y)).expect("pair in range")
    };
    let mut t = vec![C64::new(0.0, 0.0); n * n * n * n];
    let tid = |a: usize, c: usize, d: usize, b: usize| ((a * n + c) * n + d) * n + b;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = h[(pos(c, d), pos(a, b))] / (4.0 * sym2_scale(a, b) * sym2_scale(c, d));
                    t[tid(a, c, d, b)] = v;
                }
            }
        }
    }
    // Unitary-frame components, slots 2a (Z_a) and 2a+1 (Z̄_a).
    let dd = 2 * n;
    let mut ru = vec![C64::new(0.0, 0.0); dd * dd * dd * dd];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = t[tid(a, c, d, b)];
                    let (za, zb, zc, zd) = (2 * a, 2 * b, 2 * c + 1, 2 * d + 1);
                    ru[idx(dd, za, zc, zd, zb)] = v;
                    ru[idx(dd, za, zc, zb, zd)] = -v;
                    ru[idx(dd, zc, za, zd, zb)] = -v;
                    ru[idx(dd, zc, za, zb, zd)] = v;
                }
            }
        }
    }
    let conv = FrameConvention::new(n);
    let p = conv.unitary_frame_matrix();
    // e_i has unitary components conj(P_{iα}); each e_i touches two slots.
    let expand: Vec<Vec<(usize, C64)>> = (0..dd)
        .map(|i| (0..dd).filter(|&al| p[(i, al)].norm() > 0.0).map(|al| (al, p[(i, al)].conj())).collect())
        .collect();
    let mut comps = vec![0.0; dd * dd * dd * dd];
    let mut worst_imag = 0.0f64;
    for i in 0..dd {
        for j in 0..dd {
            for k in 0..dd {
                for l in 0..dd {
                    let mut acc = C64::new(0.0, 0.0);
                    for &(al, ca) in &expand[i] {
                        for &(be, cb) in &expand[j] {
                            for &(ga, cg) in &expand[k] {
                                for &(de, cd) in &expand[l] {
                                    let v = ru[idx(dd, al, be, ga, de)];
                                    if v.re != 0.0 || v.im != 0.0 {
                                        acc += ca * cb * cg * cd * v;
                                    }
                                }
                            }
                        }
                    }
                    worst_imag = worst_imag.max(acc.im.abs());
                    comps[idx(dd, i, j, k, l)] = acc.re;
                }
            }
        }
    }
    debug_assert!(worst_imag <= 1e-9 * scale, "imaginary residue {worst_imag}");
    AlgebraicCurvatureTensor::validate(n, comps, tol)
}

/// Kähler curvature operator: `H_{(cd),(ab)} = R(Z_a, Z̄_b, Z̄_c, Z_d)`.
pub fn kaehler_operator(r: &AlgebraicCurvatureTensor) -> Result<CurvatureOperatorMatrix, CurvatureError> {
    r.require_kaehler()?;
    let n = r.n();
    let mut h = CMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    h[(c * n + d, a * n + b)] =
                        r.eval_frame(FrameVector::Z(a), FrameVector::ZBar(b), FrameVector::ZBar(c), FrameVector::Z(d));
                }
            }
        }
    }
    Ok(CurvatureOperatorMatrix { kind: OperatorKind::Kaehler, n, matrix: h.hermitian_part() })
}

/// Coefficients (in the `Z_a ∧ Z̄_b / √2` basis) of the unit `ω_K` direction.
pub fn omega_direction(n: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    let s = 1.0 / (n as f64).sqrt();
    for a in 0..n {
        v[a * n + a] = C64::new(s, 0.0);
    }
    v
}

/// Columns: coefficients of the `𝔰𝔲(n)` basis vectors in the `Z_a ∧ Z̄_b / √2` basis,
/// matching [`crate::frame::su_basis`].
pub fn su_embedding(n: usize) -> CMatrix {
    let mut q = CMatrix::zeros(n * n, n * n - 1);
    let mut col = 0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                q[(a * n + b, col)] = C64::new(1.0, 0.0);
                col += 1;
            }
        }
    }
    for row in traceless_diagonal_basis(n) {
        for (a, &w) in row.iter().enumerate() {
            q[(a * n + a, col)] = C64::new(w, 0.0);
        }
        col += 1;
    }
    q
}

/// Ricci tensor and derived scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct RicciData {
    pub n: usize,
    /// Row-major `2n × 2n`, `R_ij = Σ_k R_{kikj}`.
    pub ricci: Vec<f64>,
    pub scal: f64,
    pub einstein_lambda: Option<f64>,
    /// `max |R_ij − (scal/2n) δ_ij|`.
    pub einstein_residual: f64,
}

impl RicciData {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.ricci[i * 2 * self.n + j]
    }
}

pub fn ricci(r: &AlgebraicCurvatureTensor) -> RicciData {
    ricci_with_tol(r, EINSTEIN_TOL)
}

pub fn ricci_with_tol(r: &AlgebraicCurvatureTensor, tol: f64) -> RicciData {
    let d = r.real_dim();
    let mut ric = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            ric[i * d + j] = (0..d).map(|k| r.get(k, i, k, j)).sum();
        }
    }
    let scal: f64 = (0..d).map(|i| ric[i * d + i]).sum();
    let lambda = scal / d as f64;
    let mut resid = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { lambda } else { 0.0 };
            resid = resid.max((ric[i * d + j] - target).abs());
        }
    }
    let scale = ric.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    RicciData {
        n: r.n(),
        ricci: ric,
        scal,
        einstein_lambda: if resid <= tol * scale { Some(lambda) } else { None },
        einstein_residual: resid,
    }
}

/// `𝔎` restricted to `𝔰𝔲(n)`, i.e. `Qᴴ H Q` with `Q` from [`su_embedding`].
/// Requires an Einstein tensor so that `ω_K` is an eigenvector.
pub fn restrict_su(
    r: &AlgebraicCurvatureTensor,
    k: &CurvatureOperatorMatrix,
) -> Result<CurvatureOperatorMatrix, CurvatureError> {
    let ric = ricci(r);
    if ric.einstein_lambda.is_none() {
        return Err(CurvatureError::NotEinstein { residual: ric.einstein_residual });
    }
    let q = su_embedding(k.n);
    Ok(CurvatureOperatorMatrix { kind: OperatorKind::KaehlerSu, n: k.n, matrix: k.matrix.congruence(&q).hermitian_part() })
}

/// Full `ℛ¹` on `⊗²V`: entry `[(k,l), (i,j)] = g(ℛ¹(e_i⊗e_j), e_k⊗e_l) = R_{ijkl}`.
pub fn r1_full(r: &AlgebraicCurvatureTensor) -> Vec<f64> {
    let d = r.real_dim();
    let mut m = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    m[(k * d + l) * d * d + i * d + j] = r.get(i, j, k, l);
                }
            }
        }
    }
    m
}

/// Full `ℛ²` on `⊗²V`: entry `[(k,l), (i,j)] = g(ℛ²(e_i⊗e_j), e_k⊗e_l) = R_{iklj}`.
pub fn r2_full(r: &AlgebraicCurvatureTensor) -> Vec<f64> {
    let d = r.real_dim();
    let mut m = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    m[(k * d + l) * d * d + i * d + j] = r.get(i, k, l, j);
                }
            }
        }
    }
    m
}

/// Restricts a full `⊗²V` operator to the span of the given basis tensors
/// (coefficient vectors over `e_i ⊗ e_j`): `H_{μν} = Σ conj(B_μ)·M·B_ν`.
pub fn restrict_full(full: &[f64], d: usize, basis: &[Vec<C64>]) -> CMatrix {
    let m = basis.len();
    let dd = d * d;
    let images: Vec<Vec<C64>> = basis
        .iter()
        .map(|b| (0..dd).map(|row| (0..dd).map(|col| b[col] * full[row * dd + col]).sum()).collect())
        .collect();
    CMatrix::from_fn(m, m, |mu, nu| basis[mu].iter().zip(&images[nu]).map(|(x, y)| x.conj() * y).sum())
}

/// Coefficients of `v ⊗ w` over `e_i ⊗ e_j`.
pub fn tensor_coeffs(v: &[C64], w: &[C64]) -> Vec<C64> {
    let d = v.len();
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = v[i] * w[j];
        }
    }
    out
}

fn wedge2_coeffs(d: usize) -> Vec<Vec<C64>> {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    crate::frame::strict_pairs(d)
        .into_iter()
        .map(|(i, j)| {
            let mut v = vec![C64::new(0.0, 0.0); d * d];
            v[i * d + j] = C64::new(s, 0.0);
            v[j * d + i] = C64::new(-s, 0.0);
            v
        })
        .collect()
}

fn sym2_coeffs(d: usize) -> Vec<Vec<C64>> {
    crate::frame::weak_pairs(d)
        .into_iter()
        .map(|(i, j)| {
            let s = sym2_scale(i, j);
            let mut v = vec![C64::new(0.0, 0.0); d * d];
            v[i * d + j] += C64::new(s, 0.0);
            v[j * d + i] += C64::new(s, 0.0);
            v
        })
        .collect()
}

/// `ℛ¹|_{Λ²V}` and `ℛ²|_{⊙²V}` in tensor-orthonormal bases.
pub fn r1_r2_operators(r: &AlgebraicCurvatureTensor) -> (CurvatureOperatorMatrix, CurvatureOperatorMatrix) {
    let d = r.real_dim();
    let r1 = restrict_full(&r1_full(r), d, &wedge2_coeffs(d));
    let r2 = restrict_full(&r2_full(r), d, &sym2_coeffs(d));
    (
        CurvatureOperatorMatrix { kind: OperatorKind::R1Wedge2, n: r.n(), matrix: r1 },
        CurvatureOperatorMatrix { kind: OperatorKind::R2Sym2, n: r.n(), matrix: r2 },
    )
}

/// `ℛ²` restricted to `⊙²V^{1,0}` in the Calabi basis, computed from the full
/// `⊗²V` operator rather than from the defining formula of `𝒞`.
pub fn r2_on_hol_sym2(r: &AlgebraicCurvatureTensor) -> CMatrix {
    let conv = r.convention();
    let d = conv.real_dim();
    let basis: Vec<Vec<C64>> = sym2_index_pairs(conv.n())
        .into_iter()
        .map(|(a, b)| {
            let za = conv.coords(FrameVector::Z(a));
            let zb = conv.coords(FrameVector::Z(b));
            let s = sym2_scale(a, b);
            tensor_coeffs(&za, &zb)
                .iter()
                .zip(tensor_coeffs(&zb, &za))
                .map(|(x, y)| (x + y) * s)
                .collect()
        })
        .collect();
    // H_{μν} = g(ℛ²B_ν, conj B_μ) with g bilinear, i.e. the Hermitian pairing with B_μ.
    restrict_full(&r2_full(r), d, &basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn fixture_hermitian(m: usize, seed: u64) -> CMatrix {
        let mut s = seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(1);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
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

    fn cp(n: usize) -> AlgebraicCurvatureTensor {
        let m = n * (n + 1) / 2;
        tensor_from_calabi(n, &CMatrix::identity(m), SYMMETRY_TOL).unwrap()
    }

    #[test]
    fn sphere_validates() {
        let s = AlgebraicCurvatureTensor::sphere(2, 1.0);
        assert!(s.bianchi_validated());
        assert_eq!(s.bianchi_residual(), 0.0);
        let (r1, _) = r1_r2_operators(&s);
        // ℛ¹ = 2𝔑 = 2 Id
        assert!(r1.matrix.max_abs_diff(&CMatrix::identity(6).scale_real(2.0)) < 1e-14);
    }

    #[test]
    fn zero_validates() {
        let z = AlgebraicCurvatureTensor::zero(3);
        assert!(z.bianchi_validated() && z.kaehler_validated());
        let ric = ricci(&z);
        assert_eq!(ric.scal, 0.0);
        assert_eq!(ric.einstein_lambda, Some(0.0));
    }

    #[test]
    fn perturbed_entry_is_rejected() {
        let s = AlgebraicCurvatureTensor::sphere(2, 1.0);
        let mut comps = s.components().to_vec();
        comps[idx(4, 0, 1, 0, 1)] += 1e-3;
        match AlgebraicCurvatureTensor::validate(2, comps, SYMMETRY_TOL) {
            Err(CurvatureError::SymmetryViolation { identity, index, .. }) => {
                assert_eq!(identity, SymmetryKind::FirstPairSkew);
                assert!(index == [0, 1, 0, 1] || index == [1, 0, 0, 1]);
            }
            other => panic!("expected a symmetry violation, got {other:?}"),
        }
    }

    #[test]
    fn from_entries_fills_orbit() {
        let t = AlgebraicCurvatureTensor::from_entries(1, &[([0, 1, 0, 1], 2.0)], SYMMETRY_TOL).unwrap();
        assert_eq!(t.get(1, 0, 1, 0), 2.0);
        assert_eq!(t.get(1, 0, 0, 1), -2.0);
        assert!(t.kaehler_validated());
        let conflict = AlgebraicCurvatureTensor::from_entries(1, &[([0, 1, 0, 1], 2.0), ([1, 0, 0, 1], 2.0)], SYMMETRY_TOL);
        assert!(matches!(conflict, Err(CurvatureError::ConflictingEntry { .. })));
    }

    #[test]
    fn projective_space_has_identity_calabi() {
        for n in 1..=4 {
            let r = cp(n);
            assert!(r.bianchi_validated() && r.kaehler_validated(), "n={n}");
            let cal = calabi_from_tensor(&r).unwrap();
            assert!(cal.matrix.max_abs_diff(&CMatrix::identity(n * (n + 1) / 2)) < 1e-12);
            // holomorphic sectional curvature R(X, JX, X, JX) = 1 on e_0
            assert!((r.get(0, n, 0, n) - 1.0).abs() < 1e-12);
            let ric = ricci(&r);
            let lambda = ric.einstein_lambda.expect("Fubini–Study is Einstein");
            assert!(lambda > 0.0);
            // λ = (n+1)/2 for holomorphic sectional curvature 1
            assert!((lambda - (n as f64 + 1.0) / 2.0).abs() < 1e-12);
            let k = kaehler_operator(&r).unwrap();
            assert!((k.matrix.trace().re - n as f64 * lambda).abs() < 1e-12);
        }
    }

    #[test]
    fn calabi_roundtrip() {
        for n in 1..=4 {
            let m = n * (n + 1) / 2;
            for seed in 0..5 {
                let h = fixture_hermitian(m, 100 * n as u64 + seed);
                let r = tensor_from_calabi(n, &h, SYMMETRY_TOL).unwrap();
                assert!(r.bianchi_residual() < 1e-12);
                assert!(r.kaehler_validated());
                let back = calabi_from_tensor(&r).unwrap();
                assert!(back.matrix.max_abs_diff(&h) < 1e-12);
                let again = tensor_from_calabi(n, &back.matrix, SYMMETRY_TOL).unwrap();
                let diff = r.components().iter().zip(again.components()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(diff < 1e-12);
            }
        }
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let mut h = CMatrix::identity(3);
        h[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(tensor_from_calabi(2, &h, SYMMETRY_TOL), Err(CurvatureError::NotHermitian { .. })));
    }

    #[test]
    fn sphere_is_not_kaehler() {
        let s = AlgebraicCurvatureTensor::sphere(2, 1.0);
        assert!(!s.kaehler_validated());
        assert!(matches!(calabi_from_tensor(&s), Err(CurvatureError::NotKaehler { .. })));
    }

    #[test]
    fn relations_between_r1_and_r2() {
        let r = tensor_from_calabi(2, &fixture_hermitian(3, 5), SYMMETRY_TOL).unwrap();
        let d = 4;
        let conv = r.convention();
        let m1 = r1_full(&r);
        let m2 = r2_full(&r);
        let e = |i: usize| conv.coords(FrameVector::E(i));
        let wedge = |i: usize, j: usize| -> Vec<C64> {
            tensor_coeffs(&e(i), &e(j)).iter().zip(tensor_coeffs(&e(j), &e(i))).map(|(a, b)| a - b).collect()
        };
        let sym = |i: usize, j: usize| -> Vec<C64> {
            tensor_coeffs(&e(i), &e(j)).iter().zip(tensor_coeffs(&e(j), &e(i))).map(|(a, b)| a + b).collect()
        };
        let pair = |m: &[f64], x: &[C64], y: &[C64]| -> f64 {
            let dd = d * d;
            let mut acc = 0.0;
            for row in 0..dd {
                for col in 0..dd {
                    acc += (y[row] * m[row * dd + col] * x[col]).re;
                }
            }
            acc
        };
        for (i, j, k, l) in [(0, 1, 0, 1), (0, 2, 1, 3), (1, 3, 0, 2), (0, 3, 3, 0)] {
            let xy = wedge(i, j);
            let zw = wedge(k, l);
            assert!((pair(&m1, &xy, &zw) - 4.0 * r.get(i, j, k, l)).abs() < 1e-12);
            assert!((pair(&m2, &xy, &zw) + 0.5 * pair(&m1, &xy, &zw)).abs() < 1e-12);
            assert!(pair(&m1, &xy, &sym(k, l)).abs() < 1e-12);
            assert!(pair(&m1, &sym(i, j), &sym(k, l)).abs() < 1e-12);
            assert!(pair(&m2, &xy, &sym(k, l)).abs() < 1e-12);
            let expected = 2.0 * (r.get(i, k, l, j) + r.get(i, l, k, j));
            assert!((pair(&m2, &sym(i, j), &sym(k, l)) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn r2_on_holomorphic_sym2_is_calabi() {
        for n in 2..=3 {
            let r = tensor_from_calabi(n, &fixture_hermitian(n * (n + 1) / 2, 9 + n as u64), SYMMETRY_TOL).unwrap();
            let via_r2 = r2_on_hol_sym2(&r);
            let cal = calabi_from_tensor(&r).unwrap();
            assert!(via_r2.max_abs_diff(&cal.matrix) < 1e-12);
        }
    }

    #[test]
    fn kaehler_vanishes_on_holomorphic_bivectors() {
        let r = tensor_from_calabi(3, &fixture_hermitian(6, 2), SYMMETRY_TOL).unwrap();
        for (a, b, cc, d) in [(0, 1, 0, 1), (0, 2, 1, 2), (1, 2, 0, 1)] {
            // g(ℛ¹(Z_a∧Z_b), conj(Z_c∧Z_d)) = 4 R(Z_a, Z_b, Z̄_c, Z̄_d)
            let v = r.eval_frame(FrameVector::Z(a), FrameVector::Z(b), FrameVector::ZBar(cc), FrameVector::ZBar(d));
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn kaehler_exchange_symmetry() {
        let r = tensor_from_calabi(3, &fixture_hermitian(6, 8), SYMMETRY_TOL).unwrap();
        use FrameVector::{Z, ZBar};
        for (x, y, z, w) in [(0, 1, 2, 0), (1, 1, 2, 2), (2, 0, 1, 1)] {
            let base = r.eval_frame(Z(x), ZBar(y), Z(z), ZBar(w));
            assert!((base - r.eval_frame(Z(z), ZBar(y), Z(x), ZBar(w))).norm() < 1e-12);
            assert!((base - r.eval_frame(Z(x), ZBar(w), Z(z), ZBar(y))).norm() < 1e-12);
        }
    }

    #[test]
    fn kaehler_operator_has_omega_eigenvector_when_einstein() {
        let r = cp(3);
        let k = kaehler_operator(&r).unwrap();
        let lambda = ricci(&r).einstein_lambda.unwrap();
        let w = omega_direction(3);
        let kw = k.matrix.mul_vec(&w);
        for (x, y) in kw.iter().zip(&w) {
            assert!((x - y * lambda).norm() < 1e-12);
        }
        let su = restrict_su(&r, &k).unwrap();
        assert!((su.matrix.trace().re - 2.0 * lambda).abs() < 1e-12);
    }

    #[test]
    fn restrict_su_requires_einstein() {
        let r = tensor_from_calabi(2, &CMatrix::diagonal(&[1.0, 0.0, 3.0]), SYMMETRY_TOL).unwrap();
        let k = kaehler_operator(&r).unwrap();
        assert!(matches!(restrict_su(&r, &k), Err(CurvatureError::NotEinstein { .. })));
    }

    #[test]
    fn curvature_endomorphism_expands_over_calabi_eigenbasis() {
        // R(Z_a, Z̄_b) = −Σ_ν σ_ν (Σ̄_ν Z_a) ∧ (Σ_ν Z̄_b)
        use crate::frame::{hol_sym2_basis, Endo};
        let n = 3;
        let r = tensor_from_calabi(n, &fixture_hermitian(6, 77), SYMMETRY_TOL).unwrap();
        let conv = r.convention();
        let cal = calabi_from_tensor(&r).unwrap();
        let eig = hermitian_eigen(&cal.matrix).unwrap();
        let basis = hol_sym2_basis(conv);
        let sigmas: Vec<Endo> = (0..basis.len())
            .map(|k| {
                let mut s = Endo::zero(conv);
                for (nu, b) in basis.iter().enumerate() {
                    s = s.add(&b.scale(eig.vectors[(nu, k)]));
                }
                s
            })
            .collect();
        for a in 0..n {
            for b in 0..n {
                let za = conv.coords(FrameVector::Z(a));
                let zb_bar = conv.coords(FrameVector::ZBar(b));
                // R(Z_a, Z̄_b) as an endomorphism: entry (w, z) = R(Z_a, Z̄_b, e_z, e_w)
                let d = conv.real_dim();
                let lhs = CMatrix::from_fn(d, d, |w, z| {
                    r.eval(&za, &zb_bar, &conv.coords(FrameVector::E(z)), &conv.coords(FrameVector::E(w)))
                });
                let mut rhs = Endo::zero(conv);
                for (k, s) in sigmas.iter().enumerate() {
                    let u = s.conj().apply(&za);
                    let v = s.apply(&zb_bar);
                    rhs = rhs.add(&Endo::wedge(conv, &u, &v).scale(c(-eig.values[k], 0.0)));
                }
                assert!(lhs.max_abs_diff(rhs.matrix()) < 1e-12, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn bianchi_holds_for_random_calabi() {
        for seed in 0..20 {
            let r = tensor_from_calabi(3, &fixture_hermitian(6, 1000 + seed), SYMMETRY_TOL).unwrap();
            assert!(r.bianchi_residual() < 1e-12);
        }
    }

    #[test]
    fn ricci_sign_positive_on_sphere() {
        let s = AlgebraicCurvatureTensor::sphere(2, 1.0);
        let ric = ricci(&s);
        assert_eq!(ric.einstein_lambda, Some(3.0));
        assert_eq!(ric.scal, 12.0);
    }
}
