//! The curvature term `Ric_L` of the Lichnerowicz Laplacian on forms,
//! computed by direct summation and through the Calabi operator, together
//! with the `φ^𝔤` constructions and the estimates built on them.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;

use crate::curvature::{
    calabi_from_tensor, kaehler_operator, r1_r2_operators, restrict_su, ricci, AlgebraicCurvatureTensor,
    CurvatureError,
};
use crate::forms::{mask_bidegree, masks_of_degree, replace_slot, slots, Coframe, Form, FormError, RealForm};
use crate::frame::{
    gl_basis, hol_sym2_basis, hol_wedge2_basis, kaehler_bivector, so_basis, su_basis, sym2_basis, u_basis, Endo,
    EndoTag, FrameConvention, FrameVector,
};
use crate::linalg::{takagi, CMatrix, LinalgError};
use crate::sampling::normal;
use crate::spectral::{eigensystem, Spectrum, SpectralError};
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Debug, PartialEq)]
pub enum WeitzenboeckError {
    Form(FormError),
    Curvature(CurvatureError),
    Spectral(SpectralError),
    /// The spectrum carries no eigenvectors, or their count does not match `n(n+1)/2`.
    Basis { detail: &'static str },
    NotSymmetric { residual: f64 },
}

impl fmt::Display for WeitzenboeckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeitzenboeckError::Form(e) => write!(f, "{e}"),
            WeitzenboeckError::Curvature(e) => write!(f, "{e}"),
            WeitzenboeckError::Spectral(e) => write!(f, "{e}"),
            WeitzenboeckError::Basis { detail } => write!(f, "eigenbasis unusable: {detail}"),
            WeitzenboeckError::NotSymmetric { residual } => {
                write!(f, "not an element of the holomorphic symmetric square (residual {residual:e})")
            }
        }
    }
}

impl core::error::Error for WeitzenboeckError {}

impl From<FormError> for WeitzenboeckError {
    fn from(e: FormError) -> Self {
        WeitzenboeckError::Form(e)
    }
}

impl From<CurvatureError> for WeitzenboeckError {
    fn from(e: CurvatureError) -> Self {
        WeitzenboeckError::Curvature(e)
    }
}

impl From<SpectralError> for WeitzenboeckError {
    fn from(e: SpectralError) -> Self {
        WeitzenboeckError::Spectral(e)
    }
}

impl From<LinalgError> for WeitzenboeckError {
    fn from(e: LinalgError) -> Self {
        WeitzenboeckError::Spectral(SpectralError::Linalg(e))
    }
}

/// `Ric_L(φ)(ξ_1,…,ξ_k) = Σ_s Σ_j (R(ξ_s, e_j) φ)(ξ_1,…,e_j,…,ξ_k)`, summed
/// over the real frame. The result is in the real coframe.
pub fn ricl_bruteforce(r: &AlgebraicCurvatureTensor, phi: &Form) -> Form {
    let f = phi.to_coframe(Coframe::Real);
    let conv = f.convention();
    let d = conv.real_dim();
    let k = f.degree();
    // R(e_i, e_j) φ for i < j; the rest follow by skew-symmetry.
    let mut acted: Vec<Option<Form>> = vec![None; d * d];
    for i in 0..d {
        for j in (i + 1)..d {
            acted[i * d + j] = Some(f.act_with_frame_matrix(&r.endo_matrix(i, j)));
        }
    }
    let coeff = |i: usize, j: usize, mask: u32| -> C64 {
        if i < j {
            acted[i * d + j].as_ref().map_or(C64::new(0.0, 0.0), |x| x.coeff(mask))
        } else if j < i {
            -acted[j * d + i].as_ref().map_or(C64::new(0.0, 0.0), |x| x.coeff(mask))
        } else {
            C64::new(0.0, 0.0)
        }
    };
    let mut out = Form::zero(conv, k, Coframe::Real);
    for mask in masks_of_degree(d, k) {
        let mut acc = C64::new(0.0, 0.0);
        for s in slots(mask) {
            for j in 0..d {
                if let Some((nm, sign)) = replace_slot(mask, s, j) {
                    acc += coeff(s, j, nm) * sign;
                }
            }
        }
        *out.coeff_mut(mask) = acc;
    }
    out
}

/// `g(Ric_L(φ), φ̄)`.
pub fn ricl_hermitian(r: &AlgebraicCurvatureTensor, phi: &Form) -> C64 {
    ricl_bruteforce(r, phi).hermitian(phi)
}

/// `g(Ric_L(ψ), ψ)` for a real form.
pub fn ricl_pairing(r: &AlgebraicCurvatureTensor, psi: &RealForm) -> f64 {
    ricl_hermitian(r, psi.form()).re
}

/// The eigen-elements `Σ_ν = Σ_μ U_{μν} B_μ` of the Calabi operator, where the
/// `B_μ` form the basis of [`hol_sym2_basis`].
pub fn calabi_eigen_elements(conv: FrameConvention, s: &Spectrum) -> Result<Vec<Endo>, WeitzenboeckError> {
    let u = s.vectors.as_ref().ok_or(WeitzenboeckError::Basis { detail: "no eigenvectors" })?;
    combine_basis(&hol_sym2_basis(conv), u)
}

fn combine_basis(basis: &[Endo], u: &CMatrix) -> Result<Vec<Endo>, WeitzenboeckError> {
    if u.rows() != basis.len() || u.cols() != basis.len() {
        return Err(WeitzenboeckError::Basis { detail: "eigenvector dimension does not match the basis" });
    }
    if u.unitarity_residual() > 1e-10 {
        return Err(WeitzenboeckError::Basis { detail: "eigenvectors are not unitary" });
    }
    let conv = basis[0].convention();
    Ok((0..basis.len())
        .map(|nu| {
            let mut e = Endo::zero(conv);
            for (mu, b) in basis.iter().enumerate() {
                let c = u[(mu, nu)];
                if c.norm() > 0.0 {
                    e = e.add(&b.scale(c));
                }
            }
            e
        })
        .collect())
}

/// Weights `|Σ_ν ψ|²` in the order of the spectrum.
pub fn calabi_weights(conv: FrameConvention, s: &Spectrum, psi: &Form) -> Result<Vec<f64>, WeitzenboeckError> {
    let elems = calabi_eigen_elements(conv, s)?;
    Ok(elems.iter().map(|e| psi.endo_act(e).norm_sq()).collect())
}

/// `2 Σ_ν σ_ν |Σ_ν ψ|²` from an eigendecomposition of the Calabi operator.
pub fn ricl_via_calabi(s: &Spectrum, psi: &RealForm) -> Result<f64, WeitzenboeckError> {
    let conv = psi.form().convention();
    let n = conv.n();
    if s.dim() != n * (n + 1) / 2 {
        return Err(WeitzenboeckError::Basis { detail: "spectrum dimension is not n(n+1)/2" });
    }
    let w = calabi_weights(conv, s, psi.form())?;
    Ok(2.0 * w.iter().zip(&s.values).map(|(w, l)| w * l).sum::<f64>())
}

/// Unitary basis of the algebra named by `tag`.
pub fn algebra_basis(conv: FrameConvention, tag: EndoTag) -> Vec<Endo> {
    match tag {
        EndoTag::Gl => gl_basis(conv),
        EndoTag::So => so_basis(conv),
        EndoTag::Sym2 => sym2_basis(conv),
        EndoTag::HolSym2 => hol_sym2_basis(conv),
        EndoTag::HolWedge2 => hol_wedge2_basis(conv),
        EndoTag::U => u_basis(conv),
        EndoTag::Su => su_basis(conv),
    }
}

/// The family `{Ξ_α φ}` over a unitary basis `{Ξ_α}` of an algebra.
#[derive(Clone, Debug)]
pub struct PhiG {
    pub tag: EndoTag,
    pub basis: Vec<Endo>,
    pub images: Vec<Form>,
}

impl PhiG {
    /// `|φ^𝔤|² = Σ_α |Ξ_α φ|²`.
    pub fn norm_sq(&self) -> f64 {
        self.images.iter().map(Form::norm_sq).sum()
    }
}

pub fn phi_g(phi: &Form, tag: EndoTag) -> PhiG {
    phi_g_with_basis(phi, tag, algebra_basis(phi.convention(), tag))
}

pub fn phi_g_with_basis(phi: &Form, tag: EndoTag, basis: Vec<Endo>) -> PhiG {
    let images = basis.iter().map(|b| phi.endo_act(b)).collect();
    PhiG { tag, basis, images }
}

pub fn norm_phi_g(p: &PhiG) -> f64 {
    p.norm_sq()
}

/// `Σ_{a,b} |ι_{Z_a} ι_{Z̄_b} φ|²`.
pub fn insertion_norm_sum(phi: &Form) -> f64 {
    let n = phi.n();
    let mut acc = 0.0;
    for b in 0..n {
        let inner = phi.interior(FrameVector::ZBar(b));
        for a in 0..n {
            acc += inner.interior(FrameVector::Z(a)).norm_sq();
        }
    }
    acc
}

/// Closed form of `|ψ^{⊙²V^{1,0}}|²` for a real form `ψ ∈ Λ^{p,q} ⊕ Λ^{q,p}`:
/// `¼((p+q)(n+1) − 2pq)|ψ|² − |Λψ|² / (2(p+q)(p+q−1))`; the last term drops for
/// primitive forms and for `p + q < 2`.
pub fn hol_sym2_norm_formula(n: usize, p: usize, q: usize, norm_sq: f64, lambda_norm_sq: f64) -> f64 {
    let k = (p + q) as f64;
    let main = 0.25 * (k * (n as f64 + 1.0) - 2.0 * (p * q) as f64) * norm_sq;
    if p + q < 2 {
        main
    } else {
        main - lambda_norm_sq / (2.0 * k * (k - 1.0))
    }
}

/// `|φ^{𝔰𝔲}|² = (2pq + (p+q)(n+1−(p+q)) − (p−q)²/n)|φ|²` for primitive `(p, q)`-forms.
pub fn su_norm_formula(n: usize, p: usize, q: usize, norm_sq: f64) -> f64 {
    let (nf, pf, qf) = (n as f64, p as f64, q as f64);
    (2.0 * pf * qf + (pf + qf) * (nf + 1.0 - (pf + qf)) - (pf - qf) * (pf - qf) / nf) * norm_sq
}

/// `|φ^{𝔲}|² = (2pq + (p+q)(n+1−(p+q)))|φ|²` for primitive `(p, q)`-forms.
pub fn u_norm_formula(n: usize, p: usize, q: usize, norm_sq: f64) -> f64 {
    let (nf, pf, qf) = (n as f64, p as f64, q as f64);
    (2.0 * pf * qf + (pf + qf) * (nf + 1.0 - (pf + qf))) * norm_sq
}

/// Both sides of `|φ^𝔲|² = |ω_K φ|²/n + |φ^{𝔰𝔲}|²`.
pub fn u_decomposition(phi: &Form) -> (f64, f64) {
    let conv = phi.convention();
    let lhs = phi_g(phi, EndoTag::U).norm_sq();
    let omega = phi.endo_act(&kaehler_bivector(conv)).norm_sq();
    (lhs, omega / conv.n() as f64 + phi_g(phi, EndoTag::Su).norm_sq())
}

/// Two sides of an identity and their difference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    /// Residual divided by `max(1, |lhs|, |rhs|)`.
    pub fn relative(&self) -> f64 {
        self.residual() / self.lhs.abs().max(self.rhs.abs()).max(1.0)
    }
}

/// `Σ_I φ(e_i, e_j, e_I) φ(e_k, e_l, e_I)` over ordered tuples `I`, i.e. the
/// tensor pairing of two double insertions.
fn double_insertions(phi: &Form) -> Vec<Form> {
    let conv = phi.convention();
    let d = conv.real_dim();
    let singles: Vec<Form> = (0..d).map(|i| phi.interior(FrameVector::E(i))).collect();
    let mut out = Vec::with_capacity(d * d);
    for single in &singles {
        for j in 0..d {
            // ι_{e_j} ι_{e_i} φ = φ(e_i, e_j, ·)
            out.push(single.interior(FrameVector::E(j)));
        }
    }
    out
}

/// `g(ℛ²(φ^{𝔤𝔩}), φ^{𝔤𝔩}) = −(p(p−1)/2) Σ R_{ijkl} φ_{ijI} φ_{klI}` for a real `p`-form.
/// The left side is `Σ R_{iklj} g((e_i⊗e_j)φ, (e_k⊗e_l)φ)`.
pub fn check_r2_gl_identity(r: &AlgebraicCurvatureTensor, phi: &Form) -> IdentityCheck {
    let conv = phi.convention();
    let d = conv.real_dim();
    let p = phi.degree();
    let images = phi_g(phi, EndoTag::Gl).images;
    let mut lhs = 0.0;
    for i in 0..d {
        for j in 0..d {
            let a = &images[i * d + j];
            for k in 0..d {
                for l in 0..d {
                    let c = r.get(i, k, l, j);
                    if c != 0.0 {
                        lhs += c * a.bilinear(&images[k * d + l]).re;
                    }
                }
            }
        }
    }
    let mut rhs = 0.0;
    if p >= 2 {
        let dbl = double_insertions(phi);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let c = r.get(i, j, k, l);
                        if c != 0.0 {
                            rhs += c * dbl[i * d + j].bilinear(&dbl[k * d + l]).re;
                        }
                    }
                }
            }
        }
        rhs *= -((p * (p - 1)) as f64) / 2.0;
    }
    IdentityCheck { lhs, rhs }
}

/// Pairing `Σ_{μν} H_{μν} g(Ξ_ν φ, conj(Ξ_μ φ))` of an operator matrix with `φ^𝔤`.
fn operator_pairing(h: &CMatrix, images: &[Form]) -> C64 {
    let m = images.len();
    let mut acc = C64::new(0.0, 0.0);
    for mu in 0..m {
        for nu in 0..m {
            let c = h[(mu, nu)];
            if c.norm() > 0.0 {
                acc += c * images[nu].hermitian(&images[mu]);
            }
        }
    }
    acc
}

/// Results of the real-form identities for a real `p`-form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RicLSplit {
    /// `(3/2) g(Ric_L φ, φ)` against `g(ℛ²(φ^{S²}), φ^{S²}) + p Σ R_ij φ_{iI} φ_{jI}`.
    pub split: IdentityCheck,
    /// `g(ℛ¹(φ^{𝔰𝔬}), φ^{𝔰𝔬})` against `g(Ric_L φ, φ)`.
    pub so_translation: IdentityCheck,
}

pub fn check_ricl_r2_split(r: &AlgebraicCurvatureTensor, phi: &Form) -> RicLSplit {
    let conv = phi.convention();
    let d = conv.real_dim();
    let p = phi.degree() as f64;
    let ricl = ricl_bruteforce(r, phi).bilinear(phi).re;
    let (r1, r2) = r1_r2_operators(r);
    let s2 = operator_pairing(&r2.matrix, &phi_g(phi, EndoTag::Sym2).images).re;
    let ric = ricci(r);
    let singles: Vec<Form> = (0..d).map(|i| phi.interior(FrameVector::E(i))).collect();
    let mut ric_term = 0.0;
    for i in 0..d {
        for j in 0..d {
            let c = ric.get(i, j);
            if c != 0.0 {
                ric_term += c * singles[i].bilinear(&singles[j]).re;
            }
        }
    }
    let so = operator_pairing(&r1.matrix, &phi_g(phi, EndoTag::So).images).re;
    RicLSplit {
        split: IdentityCheck { lhs: 1.5 * ricl, rhs: s2 + p * ric_term },
        so_translation: IdentityCheck { lhs: so, rhs: ricl },
    }
}

/// `min(p, q, √(pq)/2)`.
pub fn estimate_min(p: usize, q: usize) -> f64 {
    let g = ((p * q) as f64).sqrt() / 2.0;
    (p.min(q) as f64).min(g)
}

/// `½ + min(p, q, √(pq)/2)`.
pub fn estimate_constant(p: usize, q: usize) -> f64 {
    0.5 + estimate_min(p, q)
}

/// Both forms of the main estimate for one `(S, ψ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    /// `|Sψ|²`
    pub lhs: f64,
    /// `(½ + min(p, q, √(pq)/2)) |S|² |ψ|²`
    pub bound: f64,
    pub s_norm_sq: f64,
    pub psi_norm_sq: f64,
    /// `|ψ^{⊙²V^{1,0}}|²`
    pub hol_sym2_norm_sq: f64,
    /// `(2 + 4 min(…)) / ((p+q)(n+1) − 2pq) · |S|² |ψ^{⊙²V^{1,0}}|²`, for primitive `ψ`.
    pub primitive_bound: Option<f64>,
}

impl EstimateReport {
    pub fn holds(&self, tol: f64) -> bool {
        let slack = tol * self.bound.abs().max(1.0);
        self.lhs <= self.bound + slack && self.primitive_bound.is_none_or(|b| self.lhs <= b + tol * b.abs().max(1.0))
    }
}

/// Evaluates `|Sψ|²` against the main estimate. `S` must lie in `⊙²V^{1,0}`.
pub fn estimate_bound(s: &Endo, psi: &RealForm, tol: f64) -> Result<EstimateReport, WeitzenboeckError> {
    let res = s.holomorphic_sym2_residual();
    if res > tol * s.matrix().max_abs().max(1.0) {
        return Err(WeitzenboeckError::NotSymmetric { residual: res });
    }
    let (p, q) = psi.bidegree();
    let f = psi.form();
    let n = f.n();
    let lhs = f.endo_act(s).norm_sq();
    let s_norm_sq = s.tensor_norm_sq();
    let psi_norm_sq = f.norm_sq();
    let bound = estimate_constant(p, q) * s_norm_sq * psi_norm_sq;
    let hol = phi_g(f, EndoTag::HolSym2).norm_sq();
    let primitive = f.lefschetz_adjoint().norm_sq() <= (tol * psi_norm_sq.max(1.0)).powi(2);
    let denom = ((p + q) * (n + 1)) as f64 - 2.0 * (p * q) as f64;
    let primitive_bound =
        if primitive && denom > 0.0 { Some((2.0 + 4.0 * estimate_min(p, q)) / denom * s_norm_sq * hol) } else { None };
    Ok(EstimateReport { lhs, bound, s_norm_sq, psi_norm_sq, hol_sym2_norm_sq: hol, primitive_bound })
}

/// The extremal family: `S = Σ_{a < p+q} Z_a ⊗ Z_a` and `ψ = Re(Σ_K Z^K)` over
/// the `(p, q)` index sets with `I_K ∪ J_K = {1, …, p+q}` (disjoint).
/// Needs `p + q ≤ n`.
pub fn achievability_family(conv: FrameConvention, p: usize, q: usize) -> Result<(Endo, RealForm), FormError> {
    let n = conv.n();
    let k = p + q;
    if k > n || k == 0 {
        return Err(FormError::Degree { p, q, n });
    }
    let mut hat = CMatrix::zeros(n, n);
    for a in 0..k {
        hat[(a, a)] = C64::new(1.0, 0.0);
    }
    let s = Endo::from_hat_matrix(conv, &hat);
    let mut terms = Vec::new();
    for sub in 0u32..(1 << k) {
        if sub.count_ones() as usize != p {
            continue;
        }
        // indices in `sub` are unbarred, the rest of {0..k} barred
        let mut mask = 0u32;
        for a in 0..k {
            mask |= if sub & (1 << a) != 0 { 1 << (2 * a) } else { 1 << (2 * a + 1) };
        }
        terms.push((mask, C64::new(1.0, 0.0)));
    }
    let phi = Form::from_terms(conv, k, Coframe::Unitary, &terms);
    let psi = phi.add(&phi.conj()).scale(C64::new(0.5, 0.0));
    Ok((s, RealForm::new(psi, p, q, 1e-12)?))
}

/// `S = Σ_a ρ_a Z'_a ⊗ Z'_a` with `ρ_a ≥ 0` and `Z'_c = Σ_a U_{ac} Z_a` unitary.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub frame: CMatrix,
    pub rho: Vec<f64>,
    pub residual: f64,
}

impl NormalForm {
    /// `Σ_c ρ_c Z'_c ⊗ Z'_c` as an endomorphism.
    pub fn reconstruct(&self, conv: FrameConvention) -> Endo {
        let n = conv.n();
        let mut hat = CMatrix::zeros(n, n);
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    hat[(a, b)] += self.frame[(a, c)] * self.frame[(b, c)] * self.rho[c];
                }
            }
        }
        Endo::from_hat_matrix(conv, &hat)
    }
}

/// Unitary normal form of an element of `⊙²V^{1,0}`, from the Takagi
/// factorization of its hat matrix.
pub fn normal_form(s: &Endo, tol: f64) -> Result<NormalForm, WeitzenboeckError> {
    let res = s.holomorphic_sym2_residual();
    if res > tol * s.matrix().max_abs().max(1.0) {
        return Err(WeitzenboeckError::NotSymmetric { residual: res });
    }
    let t = takagi(&s.hat_matrix())?;
    let mut nf = NormalForm { frame: t.unitary, rho: t.values, residual: 0.0 };
    let conv = s.convention();
    nf.residual = nf.reconstruct(conv).matrix().max_abs_diff(s.matrix());
    Ok(nf)
}

/// `g(Ric_L φ, φ̄)` against `λ|ω_K φ|²/n + Σ_α λ_α |Ξ_α φ|²`, where `Ξ_α` are
/// eigen-elements of `𝔎|_{𝔰𝔲(n)}` of unit bivector norm for a Kähler–Einstein
/// tensor. With tensor-norm unit elements the left side would carry a `½`.
pub fn check_ke_decomposition(r: &AlgebraicCurvatureTensor, phi: &Form) -> Result<IdentityCheck, WeitzenboeckError> {
    let conv = phi.convention();
    let k = kaehler_operator(r)?;
    let su = restrict_su(r, &k)?;
    let lambda = ricci(r).einstein_lambda.expect("restrict_su checked Einstein");
    let spec = eigensystem(&su.matrix)?;
    let xis = combine_basis(&su_basis(conv), spec.vectors.as_ref().expect("eigensystem returns vectors"))?;
    let omega = phi.endo_act(&kaehler_bivector(conv)).norm_sq();
    let mut rhs = lambda * omega / conv.n() as f64;
    for (x, l) in xis.iter().zip(&spec.values) {
        rhs += l * phi.endo_act(x).norm_sq();
    }
    Ok(IdentityCheck { lhs: ricl_hermitian(r, phi).re, rhs })
}

/// Both sides of `g(Ric_L ψ, ψ) = 2 Σ σ_ν |Σ_ν ψ|²` for a Kähler tensor.
pub fn check_calabi_term(r: &AlgebraicCurvatureTensor, psi: &RealForm) -> Result<IdentityCheck, WeitzenboeckError> {
    let spec = eigensystem(&calabi_from_tensor(r)?.matrix)?;
    Ok(IdentityCheck { lhs: ricl_pairing(r, psi), rhs: ricl_via_calabi(&spec, psi)? })
}

/// Best ratio `|Sψ|² / (|S|² |ψ|²)` found by local search, with the constant it is tested against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressResult {
    pub best_ratio: f64,
    pub constant: f64,
}

/// Projected-gradient ascent for `|Sψ|² / (|S|² |ψ|²)` over real
/// `ψ = φ + φ̄ ∈ Λ^{p,q} ⊕ Λ^{q,p}` and `S ∈ ⊙²V^{1,0}`.
///
/// For the current `ψ` the best `S` is the top eigenvector of the Gram matrix
/// of `{B_μ ψ}`; `φ` then moves along the gradient of the quotient for that `S`
/// and is renormalized.
pub fn stress_search(
    conv: FrameConvention,
    p: usize,
    q: usize,
    iterations: usize,
    step: f64,
    restarts: usize,
    rng: &mut ChaCha8Rng,
) -> StressResult {
    let d = conv.real_dim();
    let masks: Vec<u32> = masks_of_degree(d, p + q).into_iter().filter(|&m| mask_bidegree(m) == (p, q)).collect();
    let basis = hol_sym2_basis(conv);
    let m = basis.len();
    // Real parameters x ↦ ψ(x): columns ψ(e_t) for the 2N real directions.
    let directions: Vec<Form> = masks
        .iter()
        .flat_map(|&mk| {
            [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().map(move |u| (mk, u))
        })
        .map(|(mk, u)| {
            let f = Form::from_terms(conv, p + q, Coframe::Unitary, &[(mk, u)]);
            f.add(&f.conj())
        })
        .collect();
    let acted: Vec<Vec<Form>> = basis.iter().map(|b| directions.iter().map(|dir| dir.endo_act(b)).collect()).collect();
    let combine = |forms: &[Form], x: &[f64]| -> Form {
        let mut out = Form::zero(conv, forms[0].degree(), Coframe::Unitary);
        for (f, &w) in forms.iter().zip(x) {
            if w != 0.0 {
                out = out.add(&f.scale(C64::new(w, 0.0)));
            }
        }
        out
    };
    let mut best = 0.0f64;
    for _ in 0..restarts {
        let mut x: Vec<f64> = (0..directions.len()).map(|_| normal(rng)).collect();
        for _ in 0..iterations {
            let psi = combine(&directions, &x);
            let psi_norm = psi.norm_sq();
            if psi_norm == 0.0 {
                x = (0..directions.len()).map(|_| normal(rng)).collect();
                continue;
            }
            let images: Vec<Form> = acted.iter().map(|fs| combine(fs, &x)).collect();
            let gram = CMatrix::from_fn(m, m, |mu, nu| images[nu].hermitian(&images[mu]));
            let Ok(spec) = eigensystem(&gram.hermitian_part()) else { break };
            let top = spec.values[m - 1];
            best = best.max(top / psi_norm);
            let u = spec.vectors.expect("eigenvectors").column(m - 1);
            // Sψ(x) = Σ_μ u_μ B_μ ψ(x); gradient of |Sψ|²/|ψ|² in x.
            let s_psi = {
                let mut acc = Form::zero(conv, images[0].degree(), Coframe::Unitary);
                for (img, c) in images.iter().zip(&u) {
                    acc = acc.add(&img.scale(*c));
                }
                acc
            };
            let ratio = top / psi_norm;
            let mut grad = vec![0.0; x.len()];
            for (t, g) in grad.iter_mut().enumerate() {
                let mut ds = Form::zero(conv, images[0].degree(), Coframe::Unitary);
                for (mu, c) in u.iter().enumerate() {
                    ds = ds.add(&acted[mu][t].scale(*c));
                }
                let d_num = 2.0 * ds.hermitian(&s_psi).re;
                let d_den = 2.0 * directions[t].hermitian(&psi).re;
                *g = (d_num - ratio * d_den) / psi_norm;
            }
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm < 1e-14 {
                break;
            }
            for (v, g) in x.iter_mut().zip(&grad) {
                *v += step * xnorm * g / gnorm;
            }
            let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in x.iter_mut() {
                *v /= xn;
            }
        }
    }
    StressResult { best_ratio: best, constant: estimate_constant(p.max(q), p.min(q)) }
}
