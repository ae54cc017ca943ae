//! The identity and estimate checks.
//!
//! Every check returns [`Record`]s with a worst-case residual and sample
//! counts. Sizes are parameters: `verify` runs them small, the acceptance
//! tests at full size.

use calabi_core::certify::{certify_calabi, gamma, thresholds, upsilon, Rational, Threshold, Verdict};
use calabi_core::curvature::{
    calabi_from_tensor, kaehler_operator, omega_direction, restrict_su, ricci, tensor_from_calabi,
    AlgebraicCurvatureTensor, SYMMETRY_TOL,
};
use calabi_core::frame::{EndoTag, FrameConvention};
use calabi_core::linalg::{hermitian_eigen, CMatrix};
use calabi_core::model_spaces::{self, random_kaehler_einstein_with, EinsteinProjector, SpaceDescriptor};
use calabi_core::sampling::{
    random_form_pq, random_hermitian, random_hol_sym2, random_primitive_pq, random_primitive_real_form,
    random_real_form, random_real_kform, random_riemannian, stream, stream_seed,
};
use calabi_core::spectral::{eigensystem, k_test, partial_sum, weight_principle, Spectrum, WeightBound};
use calabi_core::weitzenboeck::{
    achievability_family, calabi_weights, check_ke_decomposition, check_r2_gl_identity, check_ricl_r2_split,
    estimate_bound, estimate_constant, hol_sym2_norm_formula, insertion_norm_sum, phi_g, ricl_pairing,
    ricl_via_calabi, su_norm_formula, u_decomposition, u_norm_formula, IdentityCheck,
};
use calabi_core::C64;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::harness::{map_trials, Tally};
use crate::report::{Record, Status};

/// Deliberate defects for checking that the suite can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// Every Calabi matrix handed to a spectral route is negated.
    NegateCalabi,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub mutation: Mutation,
    /// Restricts form-degree sweeps to `(p, q)` and its conjugate.
    pub pq: Option<(usize, usize)>,
}

pub mod tol {
    pub const ROUND_TRIP: f64 = 1e-12;
    pub const BIANCHI: f64 = 1e-12;
    pub const CURVATURE_TERM: f64 = 1e-9;
    pub const NORMS: f64 = 1e-10;
    pub const RIEMANNIAN: f64 = 1e-9;
    pub const ESTIMATE: f64 = 1e-10;
    pub const MODEL: f64 = 1e-12;
    pub const PRODUCT_SCALE: f64 = 1e-9;
    pub const SOUNDNESS: f64 = 1e-9;
    pub const KE: f64 = 1e-10;
}

/// `(p, q)` with `p ≥ q` and `1 ≤ p + q ≤ min(n, max_degree)`. A real form of
/// type `(p,q) + (q,p)` covers both orders.
pub fn bidegrees(n: usize, max_degree: usize, filter: Option<(usize, usize)>) -> Vec<(usize, usize)> {
    let top = n.min(max_degree);
    let mut out = Vec::new();
    for k in 1..=top {
        for q in 0..=k / 2 {
            let p = k - q;
            if let Some((a, b)) = filter {
                if (a.max(b), a.min(b)) != (p, q) {
                    continue;
                }
            }
            out.push((p, q));
        }
    }
    out
}

fn trial_index(n: usize, t: usize) -> u64 {
    ((n as u64) << 32) | t as u64
}

fn rel(c: IdentityCheck) -> f64 {
    c.relative()
}

/// Relative difference scaled by `max(|a|, |b|, floor)`.
fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor).max(f64::MIN_POSITIVE)
}

fn random_kaehler(n: usize, rng: &mut ChaCha8Rng) -> Option<(AlgebraicCurvatureTensor, CMatrix)> {
    let h = random_hermitian(n * (n + 1) / 2, rng);
    tensor_from_calabi(n, &h, SYMMETRY_TOL).ok().map(|r| (r, h))
}

/// Calabi matrix as seen by the spectral routes.
pub fn calabi_matrix(r: &AlgebraicCurvatureTensor, mutation: Mutation) -> Option<CMatrix> {
    let c = calabi_from_tensor(r).ok()?.matrix;
    Some(match mutation {
        Mutation::None => c,
        Mutation::NegateCalabi => c.scale_real(-1.0),
    })
}

fn calabi_spectrum(r: &AlgebraicCurvatureTensor, mutation: Mutation) -> Option<Spectrum> {
    eigensystem(&calabi_matrix(r, mutation)?).ok()
}

fn tally_record(name: &str, anchor: &str, t: &Tally, limit: f64) -> Record {
    let passed = t.samples > 0 && t.violations == 0 && t.max <= limit;
    let mut rec = Record::check(name, anchor, passed)
        .residual(t.max)
        .value("samples", t.samples)
        .value("violations", t.violations)
        .value("tolerance", limit);
    if let Some(w) = &t.worst {
        rec = rec.value("worst", w.clone());
    }
    rec
}

/// Calabi matrix to tensor and back, with the symmetries of the tensor.
pub fn round_trip(ns: &[usize], trials: usize, opts: SuiteOptions) -> Record {
    let mut rt = Tally::default();
    let mut bianchi = Tally::default();
    for &n in ns {
        let parts = map_trials(trials, |t| {
            let mut rng = stream(opts.seed, "round-trip", trial_index(n, t));
            let h = random_hermitian(n * (n + 1) / 2, &mut rng);
            let label = || format!("n={n} trial={t}");
            let mut a = Tally::default();
            let mut b = Tally::default();
            match tensor_from_calabi(n, &h, SYMMETRY_TOL) {
                Ok(r) => {
                    let back = calabi_from_tensor(&r).map(|c| c.matrix.max_abs_diff(&h)).unwrap_or(f64::NAN);
                    a.observe(back, !(back < tol::ROUND_TRIP), label);
                    let res = r.bianchi_residual().max(r.kaehler_residual()).max(r.pair_residual());
                    b.observe(res, !(res < tol::BIANCHI), label);
                }
                Err(_) => {
                    a.observe(f64::NAN, true, label);
                    b.observe(f64::NAN, true, label);
                }
            }
            (a, b)
        });
        for (a, b) in parts {
            rt.merge(a);
            bianchi.merge(b);
        }
    }
    let mut rec = tally_record("calabi round trip", "a Hermitian Calabi matrix determines a Kähler curvature tensor and is recovered from it", &rt, tol::ROUND_TRIP);
    let sym_ok = bianchi.violations == 0 && bianchi.max < tol::BIANCHI;
    if !sym_ok {
        rec.status = Status::Fail;
    }
    rec.value("symmetry_residual", bianchi.max)
}

/// Brute-force `g(Ric_L ψ, ψ)` against `2 Σ σ_ν |Σ_ν ψ|²`.
pub fn calabi_term(ns: &[usize], tensors: usize, forms: usize, max_degree: usize, opts: SuiteOptions) -> Record {
    let mut all = Tally::default();
    for &n in ns {
        let conv = FrameConvention::new(n);
        let pairs = bidegrees(n, max_degree, opts.pq);
        if pairs.is_empty() {
            continue;
        }
        let parts = map_trials(tensors, |t| {
            let mut rng = stream(opts.seed, "calabi-term", trial_index(n, t));
            let mut tally = Tally::default();
            let Some((r, _)) = random_kaehler(n, &mut rng) else {
                tally.observe(f64::NAN, true, || format!("n={n} tensor={t}: invalid tensor"));
                return tally;
            };
            let Some(spec) = calabi_spectrum(&r, opts.mutation) else {
                tally.observe(f64::NAN, true, || format!("n={n} tensor={t}: no spectrum"));
                return tally;
            };
            for &(p, q) in &pairs {
                for f in 0..forms {
                    let psi = random_primitive_real_form(conv, p, q, &mut rng);
                    let lhs = ricl_pairing(&r, &psi);
                    let res = match ricl_via_calabi(&spec, &psi) {
                        Ok(rhs) => rel(IdentityCheck { lhs, rhs }),
                        Err(_) => f64::NAN,
                    };
                    tally.observe(res, !(res < tol::CURVATURE_TERM), || {
                        format!("n={n} tensor={t} (p,q)=({p},{q}) form={f}")
                    });
                }
            }
            tally
        });
        all.merge(Tally::fold(parts));
    }
    tally_record("curvature term via calabi", "g(Ric_L ψ, ψ) = 2 Σ σ_ν |Σ_ν ψ|² for real primitive ψ", &all, tol::CURVATURE_TERM)
}

/// Closed-form norms of `φ^𝔤` for the model algebras.
pub fn norm_formulas(ns: &[usize], forms: usize, opts: SuiteOptions) -> Vec<Record> {
    const NAMES: [(&str, &str); 6] = [
        ("insertion norm", "(p+q)(p+q−1) Σ |ι_{Z_a} ι_{Z̄_b} φ|² = pq |φ|²"),
        ("hol-sym2 norm, primitive", "|ψ^{⊙²}|² = ¼((p+q)(n+1) − 2pq) |ψ|² for real primitive ψ"),
        ("hol-sym2 norm, Lefschetz-corrected", "|ψ^{⊙²}|² = ¼((p+q)(n+1) − 2pq) |ψ|² − |Λψ|²/(2(p+q)(p+q−1))"),
        ("su norm", "|φ^{𝔰𝔲}|² = (2pq + (p+q)(n+1−p−q) − (p−q)²/n) |φ|² for primitive φ"),
        ("u norm", "|φ^𝔲|² = (2pq + (p+q)(n+1−p−q)) |φ|² for primitive φ"),
        ("u decomposition", "|φ^𝔲|² = |ω_K φ|²/n + |φ^{𝔰𝔲}|²"),
    ];
    let mut tallies: Vec<Tally> = vec![Tally::default(); NAMES.len()];
    for &n in ns {
        let conv = FrameConvention::new(n);
        let pairs = bidegrees(n, n, opts.pq);
        if pairs.is_empty() {
            continue;
        }
        let parts = map_trials(forms, |t| {
            let (p, q) = pairs[t % pairs.len()];
            let mut rng = stream(opts.seed, "norms", trial_index(n, t));
            let mut out: Vec<Tally> = vec![Tally::default(); NAMES.len()];
            let label = || format!("n={n} (p,q)=({p},{q}) form={t}");
            let k = (p + q) as f64;

            let phi = random_form_pq(conv, p, q, &mut rng);
            let f = phi.form();
            let ns_ = f.norm_sq();
            let ins = k * (k - 1.0) * insertion_norm_sum(f);
            let r0 = rel_diff(ins, (p * q) as f64 * ns_, ns_);
            out[0].observe(r0, !(r0 < tol::NORMS), label);

            let psi = calabi_core::forms::RealForm::from_pq(&phi);
            let lam = psi.form().lefschetz_adjoint().norm_sq();
            let got = phi_g(psi.form(), EndoTag::HolSym2).norm_sq();
            let want = hol_sym2_norm_formula(n, p, q, psi.form().norm_sq(), lam);
            let r2 = rel_diff(got, want, psi.form().norm_sq());
            out[2].observe(r2, !(r2 < tol::NORMS), label);

            let (a, b) = u_decomposition(f);
            let r5 = rel_diff(a, b, ns_);
            out[5].observe(r5, !(r5 < tol::NORMS), label);

            let prim = random_primitive_pq(conv, p, q, &mut rng);
            let pf = prim.form();
            let pn = pf.norm_sq();
            let rpsi = calabi_core::forms::RealForm::from_pq(&prim);
            let got = phi_g(rpsi.form(), EndoTag::HolSym2).norm_sq();
            let want = hol_sym2_norm_formula(n, p, q, rpsi.form().norm_sq(), 0.0);
            let r1 = rel_diff(got, want, rpsi.form().norm_sq());
            out[1].observe(r1, !(r1 < tol::NORMS), label);
            let su = phi_g(pf, EndoTag::Su).norm_sq();
            let r3 = rel_diff(su, su_norm_formula(n, p, q, pn), pn);
            out[3].observe(r3, !(r3 < tol::NORMS), label);
            let u = phi_g(pf, EndoTag::U).norm_sq();
            let r4 = rel_diff(u, u_norm_formula(n, p, q, pn), pn);
            out[4].observe(r4, !(r4 < tol::NORMS), label);
            out
        });
        for part in parts {
            for (acc, t) in tallies.iter_mut().zip(part) {
                acc.merge(t);
            }
        }
    }
    NAMES.iter().zip(&tallies).map(|((name, anchor), t)| tally_record(name, anchor, t, tol::NORMS)).collect()
}

/// Identities valid for every algebraic curvature tensor, tested on
/// non-Kähler samples.
pub fn riemannian(n: usize, tensors: usize, degrees: &[usize], opts: SuiteOptions) -> Vec<Record> {
    let conv = FrameConvention::new(n);
    let parts = map_trials(tensors, |t| {
        let mut rng = stream(opts.seed, "riemannian", trial_index(n, t));
        let r = random_riemannian(n, &mut rng);
        let mut out = [Tally::default(), Tally::default(), Tally::default()];
        for &p in degrees {
            let phi = random_real_kform(conv, p, &mut rng);
            let label = || format!("n={n} tensor={t} p={p}");
            let gl = rel(check_r2_gl_identity(&r, &phi));
            out[0].observe(gl, !(gl < tol::RIEMANNIAN), label);
            let split = check_ricl_r2_split(&r, &phi);
            let s = rel(split.split);
            out[1].observe(s, !(s < tol::RIEMANNIAN), label);
            let so = rel(split.so_translation);
            out[2].observe(so, !(so < tol::RIEMANNIAN), label);
        }
        out
    });
    let mut acc = [Tally::default(), Tally::default(), Tally::default()];
    for part in parts {
        for (a, t) in acc.iter_mut().zip(part) {
            a.merge(t);
        }
    }
    vec![
        tally_record("R2 on gl", "g(ℛ²(φ^{𝔤𝔩}), φ^{𝔤𝔩}) = −(p(p−1)/2) Σ R_ijkl φ_ijI φ_klI", &acc[0], tol::RIEMANNIAN),
        tally_record("Ric_L split", "(3/2) g(Ric_L φ, φ) = g(ℛ²(φ^{S²}), φ^{S²}) + p Σ R_ij φ_iI φ_jI", &acc[1], tol::RIEMANNIAN),
        tally_record("so translation", "g(ℛ¹(φ^{𝔰𝔬}), φ^{𝔰𝔬}) = g(Ric_L φ, φ)", &acc[2], tol::RIEMANNIAN),
    ]
}

/// Sampled main estimate and the extremal family.
pub fn main_estimate(ns: &[usize], samples: usize, opts: SuiteOptions) -> Vec<Record> {
    let mut ratio = Tally::default();
    let mut attained = Tally::default();
    for &n in ns {
        let conv = FrameConvention::new(n);
        for (p, q) in bidegrees(n, n, opts.pq) {
            let parts = map_trials(samples, |t| {
                let mut rng = stream(opts.seed, "estimate", trial_index(n, t) ^ ((p as u64) << 56) ^ ((q as u64) << 48));
                let s = random_hol_sym2(conv, &mut rng);
                // alternate general real forms and primitive ones
                let psi = if t % 2 == 0 {
                    random_real_form(conv, p, q, &mut rng)
                } else {
                    random_primitive_real_form(conv, p, q, &mut rng)
                };
                let mut tally = Tally::default();
                let label = || format!("n={n} (p,q)=({p},{q}) sample={t}");
                match estimate_bound(&s, &psi, tol::ESTIMATE) {
                    Ok(rep) => {
                        let mut worst = rep.lhs / rep.bound;
                        if let Some(b) = rep.primitive_bound {
                            worst = worst.max(rep.lhs / b);
                        }
                        tally.observe(worst, !rep.holds(tol::ESTIMATE), label);
                    }
                    Err(_) => tally.observe(f64::NAN, true, label),
                }
                tally
            });
            ratio.merge(Tally::fold(parts));
            let label = || format!("n={n} (p,q)=({p},{q})");
            match achievability_family(conv, p, q).ok().and_then(|(s, psi)| estimate_bound(&s, &psi, tol::ESTIMATE).ok()) {
                Some(rep) => {
                    let target = (0.5 + (p * q) as f64 / (p + q) as f64) * rep.s_norm_sq * rep.psi_norm_sq;
                    let r = rel_diff(rep.lhs, target, 0.0);
                    attained.observe(r, !(r < tol::ESTIMATE), label);
                }
                None => attained.observe(f64::NAN, true, label),
            }
        }
    }
    let mut first = tally_record(
        "main estimate",
        "|Sψ|² ≤ (½ + min(p, q, √(pq)/2)) |S|² |ψ|² for real ψ and S in ⊙²V^{1,0}",
        &ratio,
        1.0 + tol::ESTIMATE,
    );
    first.residual = Some(ratio.max);
    first = first.value("max_ratio", ratio.max);
    vec![
        first,
        tally_record(
            "main estimate attained",
            "|Sψ|² = (½ + pq/(p+q)) |S|² |ψ|² on the extremal family",
            &attained,
            tol::ESTIMATE,
        ),
    ]
}

fn ratio_value(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Closed forms and lower bounds of the thresholds for `n` in `ns`.
pub fn threshold_checks(ns: impl IntoIterator<Item = usize> + Clone) -> Vec<Record> {
    let mut closed_fail = Vec::new();
    let mut closed_count = 0usize;
    let mut check = |ok: bool, what: String| {
        closed_count += 1;
        if !ok {
            closed_fail.push(what);
        }
    };
    for n in ns.clone() {
        let ni = n as i128;
        check(upsilon(n, 1, 1).0 == Threshold::Exact(Rational::new(ni, 2)), format!("Υ_11 n={n}"));
        check(upsilon(n, n, 0).0 == Threshold::Exact(Rational::new(ni * (ni + 1), 2)), format!("Υ_n0 n={n}"));
        for p in 1..=n {
            let pi = p as i128;
            check(
                upsilon(n, p, p).0 == Threshold::Exact(Rational::new(pi * (ni + 1 - pi), 1 + pi)),
                format!("Υ_pp n={n} p={p}"),
            );
            check(upsilon(n, p, 0).0 == Threshold::Exact(Rational::new(pi * (ni + 1), 2)), format!("Υ_p0 n={n} p={p}"));
            if n >= 2 {
                check(gamma(n, p, p) == Some(Rational::from_integer(ni + 1 - pi)), format!("Γ_pp n={n} p={p}"));
            }
        }
        if n >= 2 {
            check(gamma(n, n, 0) == Some(Rational::new(ni * ni - 1, ni)), format!("Γ_n0 n={n}"));
        }
    }
    let mut up_min = f64::INFINITY;
    let mut up_viol = Vec::new();
    let mut ga_min = f64::INFINITY;
    let mut ga_viol = Vec::new();
    let mut count = 0usize;
    for n in ns {
        let half = Rational::new(n as i128, 2);
        let half_plus = Rational::new(n as i128 + 2, 2);
        for e in thresholds(n).direct() {
            count += 1;
            let below = match e.upsilon {
                Threshold::Exact(r) => r < half,
                Threshold::Float(x) => x < n as f64 / 2.0,
            };
            up_min = up_min.min(e.upsilon.value() - n as f64 / 2.0);
            if below {
                up_viol.push(format!("n={n} (p,q)=({},{})", e.p, e.q));
            }
            match e.gamma {
                Some(g) => {
                    ga_min = ga_min.min(ratio_value(g - half_plus));
                    if g < half_plus {
                        ga_viol.push(format!("n={n} (p,q)=({},{}) Γ={}/{}", e.p, e.q, g.numer(), g.denom()));
                    }
                }
                None => ga_viol.push(format!("n={n} (p,q)=({},{}) Γ undefined", e.p, e.q)),
            }
        }
    }
    vec![
        Record::check("threshold closed forms", "Υ_11 = n/2, Υ_pp = p(n+1−p)/(1+p), Υ_p0 = p(n+1)/2, Γ_n0 = (n²−1)/n, Γ_pp = n+1−p", closed_fail.is_empty())
            .residual(closed_fail.len() as f64)
            .value("identities", closed_count)
            .value("failures", closed_fail),
        Record::check("upsilon lower bound", "Υ_{p,q} ≥ n/2 for 1 ≤ p+q ≤ n", up_viol.is_empty())
            .residual(up_min.min(0.0).abs())
            .value("bidegrees", count)
            .value("min_margin", up_min)
            .value("violations", up_viol),
        Record::check("gamma lower bound", "Γ_{p,q} ≥ n/2 + 1 for 1 ≤ p+q ≤ n", ga_viol.is_empty())
            .residual(ga_min.min(0.0).abs())
            .value("bidegrees", count)
            .value("min_margin", ga_min)
            .value("violations", ga_viol),
    ]
}

/// Model geometries: CHSC, the quadric, products.
pub fn model_space_checks(chsc_ns: &[usize], quadric_ns: &[usize], with_product: bool) -> Vec<Record> {
    let mut out = Vec::new();
    let mut chsc = Tally::default();
    for &n in chsc_ns {
        let m = n * (n + 1) / 2;
        let res = model_spaces::chsc(n, 1.0)
            .ok()
            .and_then(|r| calabi_from_tensor(&r).ok())
            .map(|c| c.matrix.max_abs_diff(&CMatrix::identity(m)))
            .unwrap_or(f64::NAN);
        chsc.observe(res, !(res < tol::MODEL), || format!("n={n}"));
    }
    if !chsc_ns.is_empty() {
        out.push(tally_record("chsc calabi identity", "constant holomorphic sectional curvature 1 has Calabi operator Id", &chsc, tol::MODEL));
    }
    if !quadric_ns.is_empty() {
        let mut einstein = Vec::new();
        let mut negative = Vec::new();
        let mut edge = Vec::new();
        let mut ok = [true; 4];
        let mut sym = 0.0f64;
        for &n in quadric_ns {
            let Ok(r) = model_spaces::quadric(n, 1.0) else {
                ok = [false; 4];
                continue;
            };
            sym = sym.max(r.bianchi_residual()).max(r.kaehler_residual()).max(r.pair_residual());
            let ric = ricci(&r);
            let lambda = ric.einstein_lambda;
            ok[0] &= lambda.is_some_and(|l| l > 0.0);
            einstein.push(Value::from(lambda.unwrap_or(f64::NAN)));
            let vals = calabi_from_tensor(&r).ok().and_then(|c| hermitian_eigen(&c.matrix).ok()).map(|e| e.values);
            let Some(vals) = vals else {
                ok = [false; 4];
                continue;
            };
            // Q² = ℙ¹ × ℙ¹ has a zero eigenvalue instead of a negative one
            if n >= 3 {
                ok[1] &= vals[0] < 0.0;
                negative.push(Value::from(vals[0]));
            }
            if n % 2 == 0 {
                let rep = k_test(&Spectrum::from_values(vals.clone()), n as f64 / 2.0).ok();
                let flags = rep.as_ref().map(|r| (r.nonneg, r.positive));
                ok[2] &= flags == Some((true, false));
                edge.push(serde_json::json!({
                    "n": n,
                    "partial_sum": rep.as_ref().map(|r| r.partial_sum),
                    "nonneg": flags.map(|f| f.0),
                    "positive": flags.map(|f| f.1),
                }));
            }
        }
        ok[3] = sym < tol::MODEL;
        out.push(
            Record::check("quadric einstein", "the quadric is Einstein with positive Einstein constant", ok[0] && ok[3])
                .residual(sym)
                .value("n", quadric_ns.to_vec())
                .value("lambda", einstein),
        );
        if quadric_ns.iter().any(|&n| n >= 3) {
            out.push(
                Record::check("quadric negative eigenvalue", "the quadric's Calabi operator has a negative eigenvalue for n ≥ 3", ok[1])
                    .value("smallest", negative),
            );
        }
        if quadric_ns.iter().any(|&n| n % 2 == 0) {
            out.push(
                Record::check("quadric n/2 edge", "for even n the quadric is n/2-nonnegative but not n/2-positive", ok[2])
                    .value("reports", edge),
            );
        }
    }
    if with_product {
        let q = model_spaces::quadric(2, 1.0).ok().and_then(|r| calabi_from_tensor(&r).ok());
        let lines = model_spaces::build(&SpaceDescriptor::Product(vec![
            SpaceDescriptor::Chsc { n: 1, c: 1.0 },
            SpaceDescriptor::Chsc { n: 1, c: 1.0 },
        ]))
        .ok()
        .and_then(|r| calabi_from_tensor(&r).ok());
        let res = match (q, lines) {
            (Some(a), Some(b)) => {
                let va = hermitian_eigen(&a.matrix).map(|e| e.values).unwrap_or_default();
                let vb = hermitian_eigen(&b.matrix).map(|e| e.values).unwrap_or_default();
                let scale = va.last().copied().unwrap_or(0.0) / vb.last().copied().unwrap_or(1.0);
                if scale > 0.0 && va.len() == vb.len() {
                    va.iter().zip(&vb).map(|(x, y)| (x - scale * y).abs()).fold(0.0, f64::max)
                } else {
                    f64::NAN
                }
            }
            _ => f64::NAN,
        };
        out.push(
            Record::check("quadric(2) as product", "the 2-dimensional quadric has the Calabi spectrum of ℙ¹ × ℙ¹ up to scale", res < tol::PRODUCT_SCALE)
                .residual(res),
        );
    }
    out
}

/// Tensors on which certificate soundness is tested: model spaces with both
/// signs, products, and random tensors shifted onto a certification edge.
pub fn soundness_panel(ns: &[usize], seed: u64) -> Vec<(String, AlgebraicCurvatureTensor)> {
    let mut out = Vec::new();
    let mut push = |label: String, r: Option<AlgebraicCurvatureTensor>| {
        if let Some(r) = r {
            out.push((label, r));
        }
    };
    for &n in ns {
        for c in [1.0, -1.0] {
            push(format!("chsc:n={n},c={c}"), model_spaces::chsc(n, c).ok());
        }
        if n >= 2 {
            for s in [1.0, -1.0] {
                push(format!("quadric:n={n},scale={s}"), model_spaces::quadric(n, s).ok());
            }
            let d = SpaceDescriptor::Product(vec![SpaceDescriptor::Chsc { n: n - 1, c: 1.0 }, SpaceDescriptor::Flat { k: 1 }]);
            push(d.to_string(), model_spaces::build(&d).ok());
        }
        if n == 2 {
            let d = SpaceDescriptor::Product(vec![SpaceDescriptor::Chsc { n: 1, c: 1.0 }, SpaceDescriptor::Chsc { n: 1, c: 2.0 }]);
            push(d.to_string(), model_spaces::build(&d).ok());
        }
        let m = n * (n + 1) / 2;
        for (i, (p, q)) in bidegrees(n, n, None).into_iter().enumerate() {
            let mut rng = stream(seed, "soundness-panel", trial_index(n, i));
            let h = random_hermitian(m, &mut rng);
            let k = upsilon(n, p, q).0.value();
            let Ok(e) = hermitian_eigen(&h) else { continue };
            let shift = -partial_sum(&e.values, k) / k;
            let h = h.add(&CMatrix::identity(m).scale_real(shift));
            push(format!("random edge n={n} (p,q)=({p},{q})"), tensor_from_calabi(n, &h, SYMMETRY_TOL).ok());
        }
    }
    out
}

/// Nonneg verdicts give `g(Ric_L ψ, ψ) ≥ −ε·scale` and strict verdicts give
/// positive values, with `Ric_L` computed by brute force.
pub fn certificate_soundness(panel: &[(String, AlgebraicCurvatureTensor)], forms: usize, opts: SuiteOptions) -> Record {
    let mut tally = Tally::default();
    let mut nonneg_checks = 0usize;
    let mut strict_checks = 0usize;
    let mut certified = 0usize;
    for (label, r) in panel {
        let n = r.n();
        let conv = FrameConvention::new(n);
        let Some(spec) = calabi_spectrum(r, opts.mutation) else {
            tally.observe(f64::NAN, true, || format!("{label}: no spectrum"));
            continue;
        };
        let Ok(cert) = certify_calabi(&spec, n) else {
            tally.observe(f64::NAN, true, || format!("{label}: certificate failed"));
            continue;
        };
        let sup = spec.sup_norm();
        for (p, q) in bidegrees(n, n, opts.pq) {
            let verdict = cert.get(p, q).map_or(Verdict::NotCertified, |e| e.verdict);
            if verdict == Verdict::NotCertified {
                continue;
            }
            certified += 1;
            let idx = calabi_core::sampling::label_hash(label) ^ ((p as u64) << 8) ^ q as u64;
            let parts = map_trials(forms, |t| {
                let mut rng = stream(opts.seed, "soundness", idx.wrapping_add((t as u64) << 20));
                let psi = random_primitive_real_form(conv, p, q, &mut rng);
                let scale = sup * psi.form().norm_sq();
                let v = ricl_pairing(r, &psi);
                let mut t_ = Tally::default();
                let bad = v < -tol::SOUNDNESS * scale || (verdict == Verdict::Strict && !(v > 0.0));
                // worst = most negative normalized value
                t_.observe(-v / scale.max(f64::MIN_POSITIVE), bad, || {
                    format!("{label} (p,q)=({p},{q}) {} form={t} value={v:e}", verdict.name())
                });
                t_
            });
            match verdict {
                Verdict::Strict => strict_checks += forms,
                _ => nonneg_checks += forms,
            }
            tally.merge(Tally::fold(parts));
        }
    }
    let passed = tally.violations == 0 && tally.samples > 0;
    let mut rec = Record::check(
        "certificate soundness",
        "a nonneg (strict) Calabi certificate at (p,q) gives g(Ric_L ψ, ψ) ≥ 0 (> 0) on real primitive ψ",
        passed,
    )
    .residual(tally.max.max(0.0))
    .value("spaces", panel.len())
    .value("certified_bidegrees", certified)
    .value("nonneg_checks", nonneg_checks)
    .value("strict_checks", strict_checks)
    .value("violations", tally.violations);
    if let Some(w) = tally.worst {
        rec = rec.value("worst", w);
    }
    rec
}

/// The weighted-sum bound applied to the Calabi weights `|Σ_ν ψ|²`.
pub fn weight_principle_check(n: usize, trials: usize, opts: SuiteOptions) -> Record {
    let conv = FrameConvention::new(n);
    let pairs = bidegrees(n, n, opts.pq);
    let parts = map_trials(trials, |t| {
        let mut rng = stream(opts.seed, "weight-principle", trial_index(n, t));
        let mut tally = Tally::default();
        let Some((r, _)) = random_kaehler(n, &mut rng) else {
            tally.observe(f64::NAN, true, || format!("n={n} trial={t}: invalid tensor"));
            return tally;
        };
        let Some(spec) = calabi_spectrum(&r, opts.mutation) else {
            tally.observe(f64::NAN, true, || format!("n={n} trial={t}: no spectrum"));
            return tally;
        };
        for &(p, q) in &pairs {
            let psi = random_primitive_real_form(conv, p, q, &mut rng);
            let nsq = psi.form().norm_sq();
            let label = || format!("n={n} trial={t} (p,q)=({p},{q})");
            let Ok(w) = calabi_weights(conv, &spec, psi.form()) else {
                tally.observe(f64::NAN, true, label);
                continue;
            };
            let total = hol_sym2_norm_formula(n, p, q, nsq, 0.0);
            let max = estimate_constant(p, q) * nsq;
            let ups = total / max;
            let kappa = (partial_sum(&spec.values, ups) / ups).min(0.0);
            let scale = spec.sup_norm() * nsq;
            let res = match weight_principle(&spec, &w, total, max, kappa, tol::KE) {
                Ok(WeightBound::Certified { bound, direct, .. }) => {
                    let brute = ricl_pairing(&r, &psi);
                    // the bound holds and the weighted sum is half the curvature term
                    let below = (bound - direct).max(0.0) / scale;
                    below.max((2.0 * direct - brute).abs() / scale.max(brute.abs()))
                }
                _ => f64::NAN,
            };
            tally.observe(res, !(res < tol::CURVATURE_TERM), label);
        }
        tally
    });
    tally_record(
        "weight principle",
        "Σ w_ν σ_ν ≥ κ Σ w_ν when partial_sum(Υ) ≥ κΥ, with Σ w_ν σ_ν = ½ g(Ric_L ψ, ψ)",
        &Tally::fold(parts),
        tol::CURVATURE_TERM,
    )
}

/// Identities of the Kähler curvature operator on Kähler–Einstein tensors.
pub fn ke_checks(n: usize, trials: usize, opts: SuiteOptions) -> Vec<Record> {
    if n < 2 {
        return Vec::new();
    }
    let conv = FrameConvention::new(n);
    let Ok(proj) = EinsteinProjector::new(n) else {
        return vec![Record::check("ke split", "Einstein projection", false)];
    };
    let pairs = bidegrees(n, n, opts.pq);
    let parts = map_trials(trials, |t| {
        let mut out = [Tally::default(), Tally::default()];
        let label = || format!("n={n} trial={t}");
        let Ok(r) = random_kaehler_einstein_with(&proj, stream_seed(opts.seed, "ke", trial_index(n, t))) else {
            out[0].observe(f64::NAN, true, label);
            out[1].observe(f64::NAN, true, label);
            return out;
        };
        let lambda = ricci(&r).einstein_lambda.unwrap_or(f64::NAN);
        let scale = lambda.abs().max(1.0);
        let spectral = kaehler_operator(&r).ok().and_then(|k| {
            let w: Vec<C64> = omega_direction(n);
            let kw = k.matrix.mul_vec(&w);
            let eig = kw.iter().zip(&w).map(|(a, b)| (a - b * lambda).norm()).fold(0.0, f64::max);
            let su = restrict_su(&r, &k).ok()?;
            let tr = (su.matrix.trace().re - (n as f64 - 1.0) * lambda).abs();
            Some(eig.max(tr) / scale)
        });
        let res = spectral.unwrap_or(f64::NAN);
        out[0].observe(res, !(res < tol::KE), label);
        let mut rng = stream(opts.seed, "ke-forms", trial_index(n, t));
        for &(p, q) in &pairs {
            let phi = random_primitive_pq(conv, p, q, &mut rng).into_form();
            let res = check_ke_decomposition(&r, &phi).map(rel).unwrap_or(f64::NAN);
            out[1].observe(res, !(res < tol::KE), || format!("n={n} trial={t} (p,q)=({p},{q})"));
        }
        out
    });
    let mut acc = [Tally::default(), Tally::default()];
    for part in parts {
        for (a, t) in acc.iter_mut().zip(part) {
            a.merge(t);
        }
    }
    vec![
        tally_record("kaehler form eigenvector", "𝔎 ω_K = λ ω_K and tr 𝔎|_{𝔰𝔲(n)} = (n−1)λ on Kähler–Einstein tensors", &acc[0], tol::KE),
        tally_record("ke split", "g(Ric_L φ, φ̄) = λ |ω_K φ|²/n + Σ λ_α |Ξ_α φ|² on Kähler–Einstein tensors", &acc[1], tol::KE),
    ]
}

/// The identity suite behind `verify`, sized by `trials`.
pub fn verify_suite(n: usize, trials: usize, opts: SuiteOptions) -> Vec<Record> {
    let mut out = Vec::new();
    out.push(round_trip(&[n], trials, opts));
    out.push(calabi_term(&[n], trials, 1, 4, opts));
    out.extend(norm_formulas(&[n], trials, opts));
    let degrees: Vec<usize> = (1..=3.min(2 * n - 1)).collect();
    out.extend(riemannian(n, trials, &degrees, opts));
    out.extend(main_estimate(&[n], trials, opts));
    out.push(weight_principle_check(n, trials, opts));
    out.extend(ke_checks(n, trials, opts));
    let quadric_ns: Vec<usize> = if n >= 2 { vec![n] } else { Vec::new() };
    out.extend(model_space_checks(&[n], &quadric_ns, n == 2));
    out.extend(threshold_checks([n]));
    out.push(certificate_soundness(&soundness_panel(&[n], opts.seed), trials, opts));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bidegree_lists() {
        assert_eq!(bidegrees(3, 4, None), vec![(1, 0), (2, 0), (1, 1), (3, 0), (2, 1)]);
        assert_eq!(bidegrees(4, 4, Some((1, 2))), vec![(2, 1)]);
        assert!(bidegrees(1, 4, Some((1, 1))).is_empty());
    }

    #[test]
    fn small_suite_passes_and_mutation_is_caught() {
        let opts = SuiteOptions { seed: 3, ..Default::default() };
        let recs = verify_suite(2, 2, opts);
        let failed: Vec<_> = recs.iter().filter(|r| r.status == Status::Fail).map(|r| r.name.as_str()).collect();
        // Γ_{2,0} = 3/2 < 2 is the only failure at n = 2
        assert_eq!(failed, vec!["gamma lower bound"]);
        let bad = SuiteOptions { mutation: Mutation::NegateCalabi, ..opts };
        assert_eq!(calabi_term(&[2], 2, 1, 2, bad).status, Status::Fail);
        assert_eq!(certificate_soundness(&soundness_panel(&[2], 3), 3, bad).status, Status::Fail);
    }
}
