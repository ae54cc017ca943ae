use calabi_core::certify::{certify_calabi, thresholds, upsilon, Verdict};
use calabi_core::curvature::{calabi_from_tensor, tensor_from_calabi, SYMMETRY_TOL};
use calabi_core::forms::Form;
use calabi_core::frame::FrameConvention;
use calabi_core::linalg::{hermitian_eigen, CMatrix};
use calabi_core::sampling::{random_hermitian, random_primitive_real_form, stream};
use calabi_core::spectral::{eigensystem, k_test, partial_sum, weight_principle, Spectrum, WeightBound};
use calabi_core::weitzenboeck::{calabi_weights, hol_sym2_norm_formula, ricl_pairing};
use proptest::prelude::*;

fn spectrum_strategy(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..=max_dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn average_partial_sum_is_nondecreasing(values in spectrum_strategy(12), a in 0.01f64..1.0, b in 0.01f64..1.0) {
        let s = Spectrum::from_values(values);
        let m = s.dim() as f64;
        let (k1, k2) = if a <= b { (a * m, b * m) } else { (b * m, a * m) };
        let lhs = partial_sum(&s.values, k1) / k1;
        let rhs = partial_sum(&s.values, k2) / k2;
        prop_assert!(lhs <= rhs + 1e-12 * s.sup_norm().max(1.0));
        let r1 = k_test(&s, k1).unwrap();
        let r2 = k_test(&s, k2).unwrap();
        prop_assert!(!r1.nonneg || r2.nonneg);
        prop_assert!(!r1.positive || r2.positive);
    }

    #[test]
    fn positivity_flags_are_scale_invariant(values in spectrum_strategy(10), k in 0.05f64..1.0, c in 0.01f64..100.0) {
        let s = Spectrum::from_values(values);
        let k = k * s.dim() as f64;
        let a = k_test(&s, k).unwrap();
        let b = k_test(&s.scaled(c), k).unwrap();
        prop_assert_eq!((a.nonneg, a.positive), (b.nonneg, b.positive));
    }

    #[test]
    fn improving_eigenvalues_never_downgrades(
        n in 2usize..=5,
        seed in any::<u64>(),
        bumps in prop::collection::vec(0.0f64..1.0, 15),
    ) {
        let m = n * (n + 1) / 2;
        let mut rng = stream(seed, "improve", 0);
        let base = hermitian_eigen(&random_hermitian(m, &mut rng)).unwrap().values;
        let top = base[m - 1];
        // raise each eigenvalue toward the current top, so the sup norm cannot grow
        let improved: Vec<f64> = base.iter().zip(&bumps).map(|(v, t)| v + t * (top - v).max(0.0)).collect();
        let before = certify_calabi(&Spectrum::from_values(base.clone()), n).unwrap();
        let after = certify_calabi(&Spectrum::from_values(improved), n).unwrap();
        for (x, y) in before.entries.iter().zip(&after.entries) {
            prop_assert!(y.verdict >= x.verdict, "({},{}) {:?} -> {:?}", x.p, x.q, x.verdict, y.verdict);
        }
    }

    #[test]
    fn weight_principle_lower_bound_holds(
        values in spectrum_strategy(8),
        raw in prop::collection::vec(0.0f64..1.0, 8),
        kappa in -1.0f64..0.0,
    ) {
        let s = Spectrum::from_values(values);
        let m = s.dim();
        let weights: Vec<f64> = raw[..m].to_vec();
        let max = weights.iter().cloned().fold(0.0, f64::max).max(1e-3);
        let total: f64 = weights.iter().sum();
        match weight_principle(&s, &weights, total, max, kappa, 1e-12).unwrap() {
            WeightBound::Certified { bound, chain, direct, .. } => {
                let tol = 1e-9 * (1.0 + total * s.sup_norm());
                prop_assert!(direct >= chain[0] - tol);
                prop_assert!(chain[0] >= chain[1] - tol);
                prop_assert!(chain[1] >= chain[2] - tol);
                prop_assert!(direct >= bound - tol);
            }
            WeightBound::Refused { partial_sum, upsilon, .. } => {
                prop_assert!(partial_sum < kappa * upsilon);
            }
        }
    }

    #[test]
    fn calabi_round_trip(n in 1usize..=4, seed in any::<u64>()) {
        let m = n * (n + 1) / 2;
        let h = random_hermitian(m, &mut stream(seed, "round-trip", n as u64));
        let r = tensor_from_calabi(n, &h, SYMMETRY_TOL).unwrap();
        let back = calabi_from_tensor(&r).unwrap();
        prop_assert!(back.matrix.max_abs_diff(&h) < 1e-12 * h.max_abs().max(1.0));
        prop_assert!(r.bianchi_residual() < 1e-12 * r.max_abs().max(1.0));
    }

    #[test]
    fn upsilon_bounds(n in 1usize..=400, p in 0usize..=400, q in 0usize..=400) {
        prop_assume!(p + q >= 1 && p + q <= n);
        let u = upsilon(n, p, q).0.value();
        prop_assert!(u >= n as f64 / 2.0 - 1e-9);
        prop_assert!(u <= (n * (n + 1) / 2) as f64 + 1e-9);
    }
}

#[test]
fn certified_calabi_spectra_give_nonnegative_curvature_terms() {
    let mut checked = 0;
    for n in 2..=3 {
        let conv = FrameConvention::new(n);
        let m = n * (n + 1) / 2;
        let table = thresholds(n);
        let direct: Vec<_> = table.direct().filter(|e| e.p >= e.q).cloned().collect();
        for trial in 0..20u64 {
            let mut rng = stream(11, "soundness", trial * 10 + n as u64);
            let h = random_hermitian(m, &mut rng);
            // shift so that the spectrum sits exactly on the edge for one bidegree
            let edge = &direct[trial as usize % direct.len()];
            let k = edge.upsilon.value();
            let base = hermitian_eigen(&h).unwrap().values;
            let shift = -partial_sum(&base, k) / k;
            let h = h.add(&CMatrix::identity(m).scale_real(shift));
            let r = tensor_from_calabi(n, &h, SYMMETRY_TOL).unwrap();
            let s = eigensystem(&calabi_from_tensor(&r).unwrap().matrix).unwrap();
            let cert = certify_calabi(&s, n).unwrap();
            assert_ne!(cert.get(edge.p, edge.q).unwrap().verdict, Verdict::NotCertified);
            for e in &direct {
                if cert.get(e.p, e.q).unwrap().verdict == Verdict::NotCertified {
                    continue;
                }
                for _ in 0..10 {
                    let psi = random_primitive_real_form(conv, e.p, e.q, &mut rng);
                    let scale = s.sup_norm() * psi.form().norm_sq();
                    assert_nonneg(ricl_pairing(&r, &psi), scale);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
}

fn assert_nonneg(value: f64, scale: f64) {
    assert!(value >= -1e-9 * scale, "{value} < 0 at scale {scale}");
}

#[test]
fn calabi_weights_sum_to_hol_sym2_norm() {
    let n = 3;
    let conv = FrameConvention::new(n);
    let h = random_hermitian(6, &mut stream(2, "weights", 0));
    let s = eigensystem(&h).unwrap();
    for (p, q) in [(1, 0), (1, 1), (2, 1), (3, 0)] {
        let psi = random_primitive_real_form(conv, p, q, &mut stream(2, "weights", 1 + p as u64 * 4 + q as u64));
        let f: &Form = psi.form();
        let w = calabi_weights(conv, &s, f).unwrap();
        let total: f64 = w.iter().sum();
        let expect = hol_sym2_norm_formula(n, p, q, f.norm_sq(), 0.0);
        assert!((total - expect).abs() < 1e-10 * expect.max(1.0), "({p},{q}) {total} vs {expect}");
    }
}
