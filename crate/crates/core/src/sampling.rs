//! Seeded random inputs: Hermitian matrices, forms, elements of the model
//! algebras and Riemannian curvature tensors.
//!
//! Every random object is drawn from a [`ChaCha8Rng`] stream keyed by
//! `(seed, label, index)`, so a trial can be reproduced on its own and trials
//! can run in any order.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::curvature::{AlgebraicCurvatureTensor, SYMMETRY_TOL};
use crate::forms::{mask_bidegree, masks_of_degree, Coframe, Form, FormPQ, RealForm};
use crate::frame::{u_basis, Endo, EndoTag, FrameConvention};
use crate::linalg::CMatrix;
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

/// One step of the splitmix64 generator, used as a mixing function.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// 64-bit FNV-1a hash of a label.
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

/// Seed of the stream `(seed, label, index)`:
/// `splitmix64(splitmix64(seed ⊕ fnv1a(label)) ⊕ index)`.
pub fn stream_seed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ label_hash(label)) ^ index)
}

pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, label, index))
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Complex number with independent standard normal real and imaginary parts.
pub fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    let re = normal(rng);
    C64::new(re, normal(rng))
}

pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rand_distr::Uniform::new(0.0, 1.0).expect("valid range").sample(rng)
}

/// GUE-style Hermitian matrix: real normal diagonal, complex normal above it.
pub fn random_hermitian(m: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut h = CMatrix::zeros(m, m);
    for r in 0..m {
        h[(r, r)] = C64::new(normal(rng), 0.0);
        for c in (r + 1)..m {
            let z = complex_normal(rng);
            h[(r, c)] = z;
            h[(c, r)] = z.conj();
        }
    }
    h
}

/// Complex symmetric `n × n` matrix with complex normal entries on and above the diagonal.
pub fn random_complex_symmetric(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut s = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in r..n {
            let z = complex_normal(rng);
            s[(r, c)] = z;
            s[(c, r)] = z;
        }
    }
    s
}

/// Complex normal coefficients on every `(p, q)` generator.
pub fn random_form_pq(conv: FrameConvention, p: usize, q: usize, rng: &mut ChaCha8Rng) -> FormPQ {
    let d = conv.real_dim();
    let terms: Vec<(u32, C64)> = masks_of_degree(d, p + q)
        .into_iter()
        .filter(|&m| mask_bidegree(m) == (p, q))
        .map(|m| (m, complex_normal(rng)))
        .collect();
    let f = Form::from_terms(conv, p + q, Coframe::Unitary, &terms);
    FormPQ::new(f, p, q, 0.0).expect("pure by construction")
}

/// `ψ = φ + φ̄` for a random `(p, q)`-form `φ`.
pub fn random_real_form(conv: FrameConvention, p: usize, q: usize, rng: &mut ChaCha8Rng) -> RealForm {
    RealForm::from_pq(&random_form_pq(conv, p, q, rng))
}

/// Random primitive `(p, q)`-form: complex normal coefficients projected onto `ker Λ`.
pub fn random_primitive_pq(conv: FrameConvention, p: usize, q: usize, rng: &mut ChaCha8Rng) -> FormPQ {
    random_form_pq(conv, p, q, rng).project_primitive()
}

/// `ψ = φ + φ̄` for a random primitive `(p, q)`-form `φ`.
pub fn random_primitive_real_form(conv: FrameConvention, p: usize, q: usize, rng: &mut ChaCha8Rng) -> RealForm {
    RealForm::from_pq(&random_primitive_pq(conv, p, q, rng))
}

/// Real `k`-form with standard normal coefficients in the real coframe.
pub fn random_real_kform(conv: FrameConvention, k: usize, rng: &mut ChaCha8Rng) -> Form {
    let terms: Vec<(u32, C64)> =
        masks_of_degree(conv.real_dim(), k).into_iter().map(|m| (m, C64::new(normal(rng), 0.0))).collect();
    Form::from_terms(conv, k, Coframe::Real, &terms)
}

/// Random element `Σ s_ab Z_a ⊗ Z_b` of `⊙²V^{1,0}`.
pub fn random_hol_sym2(conv: FrameConvention, rng: &mut ChaCha8Rng) -> Endo {
    Endo::from_hat_matrix(conv, &random_complex_symmetric(conv.n(), rng))
}

/// Random real element of `𝔲(n)`: `Σ c_ab Z_a ∧ Z̄_b` with `c` skew-Hermitian.
pub fn random_u(conv: FrameConvention, rng: &mut ChaCha8Rng) -> Endo {
    let n = conv.n();
    let basis = u_basis(conv);
    let mut coeff = vec![C64::new(0.0, 0.0); n * n];
    for a in 0..n {
        coeff[a * n + a] = C64::new(0.0, normal(rng));
        for b in (a + 1)..n {
            let z = complex_normal(rng);
            coeff[a * n + b] = z;
            coeff[b * n + a] = -z.conj();
        }
    }
    let mut out = Endo::zero(conv);
    for (e, c) in basis.iter().zip(coeff) {
        out = out.add(&e.scale(c));
    }
    out.with_tag(EndoTag::U)
}

/// Random algebraic curvature tensor on `ℝ^{2n}` (generally not Kähler):
/// a signed sum of Kulkarni–Nomizu squares `½ A ∧○ A = A_ik A_jl − A_il A_jk`
/// of random symmetric matrices. Such squares span all algebraic curvature
/// tensors, and each satisfies the Bianchi identity.
pub fn random_riemannian(n: usize, rng: &mut ChaCha8Rng) -> AlgebraicCurvatureTensor {
    let d = 2 * n;
    let mut comps = vec![0.0; d * d * d * d];
    for _ in 0..2 * d {
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let x = normal(rng) / (d as f64).sqrt();
                a[i * d + j] = x;
                a[j * d + i] = x;
            }
        }
        let sign = if uniform(rng) < 0.5 { -1.0 } else { 1.0 };
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        comps[((i * d + j) * d + k) * d + l] +=
                            sign * (a[i * d + k] * a[j * d + l] - a[i * d + l] * a[j * d + k]);
                    }
                }
            }
        }
    }
    AlgebraicCurvatureTensor::validate_strict(n, comps, SYMMETRY_TOL).expect("Kulkarni–Nomizu squares are curvature tensors")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = (0..4).map(|_| normal(&mut stream(42, "x", 3))).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut s1 = stream(42, "x", 3);
        let mut s2 = stream(42, "x", 4);
        let mut s3 = stream(42, "y", 3);
        let v1 = normal(&mut s1);
        assert_ne!(v1, normal(&mut s2));
        assert_ne!(v1, normal(&mut s3));
    }

    #[test]
    fn random_objects_have_their_structure() {
        let conv = FrameConvention::new(3);
        let mut rng = stream(1, "structure", 0);
        let h = random_hermitian(6, &mut rng);
        assert_eq!(h.hermitian_residual(), 0.0);
        let s = random_hol_sym2(conv, &mut rng);
        assert!(s.holomorphic_sym2_residual() < 1e-12);
        let u = random_u(conv, &mut rng);
        // real and skew: L̄ = L and Lᵀ = −L in the real frame
        assert!(u.matrix().max_abs_diff(&u.matrix().conj()) < 1e-12);
        assert!(u.matrix().max_abs_diff(&u.matrix().transpose().scale_real(-1.0)) < 1e-12);
        // commutes with J
        let j = conv.j_matrix();
        assert!(u.matrix().mul(&j).max_abs_diff(&j.mul(u.matrix())) < 1e-12);
        let psi = random_primitive_real_form(conv, 2, 1, &mut rng);
        assert!(psi.form().reality_residual() < 1e-12);
        assert!(psi.form().lefschetz_adjoint().max_abs() < 1e-12);
        let r = random_riemannian(2, &mut rng);
        assert!(r.bianchi_residual() < 1e-12 * r.max_abs().max(1.0));
        assert!(!r.kaehler_validated());
    }
}
