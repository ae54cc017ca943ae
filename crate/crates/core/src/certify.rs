//! Eigenvalue-count thresholds and Hodge-number vanishing certificates.
//!
//! For a real primitive form `ψ` of type `(p,q) + (q,p)` the curvature term
//! `g(Ric_L ψ, ψ)` is a weighted sum of Calabi eigenvalues. The ratio of the
//! total weight to the largest possible single weight is
//!
//! ```text
//! Υ_{p,q} = ((p+q)(n+1) − 2pq) / (2 + 4 min(p, q, √(pq)/2)),
//! ```
//!
//! so `Υ_{p,q}`-nonnegativity of the Calabi operator makes the term
//! nonnegative. On Kähler–Einstein tensors the same argument applied to the
//! Kähler curvature operator restricted to `𝔰𝔲(n)` gives
//!
//! ```text
//! Γ_{p,q} = (n(n²−1)(p+q) − 2n(n−1)pq) / (n(n−1)(p+q) + (p−q)²).
//! ```

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_integer::Roots;
use num_rational::Ratio;

use crate::spectral::{k_test, PositivityReport, Spectrum};

#[allow(unused_imports)]
use num_traits::Float;

pub type Rational = Ratio<i128>;

/// A threshold value: exact when the arithmetic stays rational.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Exact(Rational),
    /// `(a + b√c) / d`-type values from the `√(pq)/2` branch, evaluated in floating point.
    Float(f64),
}

impl Threshold {
    pub fn value(&self) -> f64 {
        match self {
            Threshold::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Threshold::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<Rational> {
        match self {
            Threshold::Exact(r) => Some(*r),
            Threshold::Float(_) => None,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Exact(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Threshold::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Threshold::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Which branch of `min(p, q, √(pq)/2)` was taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinBranch {
    /// `min(p, q)`; includes the pure case `pq = 0`.
    Degree,
    /// `√(pq)/2`.
    GeometricMean,
}

/// `Υ_{p,q}` together with the branch of the minimum.
pub fn upsilon(n: usize, p: usize, q: usize) -> (Threshold, MinBranch) {
    let (n, p, q) = (n as i128, p as i128, q as i128);
    let num = (p + q) * (n + 1) - 2 * p * q;
    let m = p.min(q);
    let pq = p * q;
    // √(pq)/2 < m  ⇔  pq < 4m²
    if pq >= 4 * m * m {
        return (Threshold::Exact(Rational::new(num, 2 + 4 * m)), MinBranch::Degree);
    }
    let root = pq.sqrt();
    if root * root == pq {
        // 2 + 4·root/2 = 2 + 2·root
        (Threshold::Exact(Rational::new(num, 2 + 2 * root)), MinBranch::GeometricMean)
    } else {
        let den = 2.0 + 2.0 * (pq as f64).sqrt();
        (Threshold::Float(num as f64 / den), MinBranch::GeometricMean)
    }
}

/// `Γ_{p,q}`, always rational. `None` when the denominator vanishes, which
/// happens only for `n = 1, p = q`.
pub fn gamma(n: usize, p: usize, q: usize) -> Option<Rational> {
    let (n, p, q) = (n as i128, p as i128, q as i128);
    let num = n * (n * n - 1) * (p + q) - 2 * n * (n - 1) * p * q;
    let den = n * (n - 1) * (p + q) + (p - q) * (p - q);
    if den == 0 {
        None
    } else {
        Some(Rational::new(num, den))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdEntry {
    pub p: usize,
    pub q: usize,
    pub upsilon: Threshold,
    pub branch: MinBranch,
    pub gamma: Option<Rational>,
}

/// `Υ_{p,q}` and `Γ_{p,q}` for `0 ≤ p, q ≤ n`, `(p, q) ≠ (0, 0)`, row-major in `(p, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdTable {
    pub n: usize,
    pub entries: Vec<ThresholdEntry>,
}

impl ThresholdTable {
    pub fn get(&self, p: usize, q: usize) -> Option<&ThresholdEntry> {
        if p > self.n || q > self.n || p + q == 0 {
            return None;
        }
        self.entries.get(p * (self.n + 1) + q - 1)
    }

    /// Entries with `1 ≤ p + q ≤ n`, which carry the direct verdicts.
    pub fn direct(&self) -> impl Iterator<Item = &ThresholdEntry> {
        let n = self.n;
        self.entries.iter().filter(move |e| e.p + e.q <= n)
    }

    /// Smallest `Υ_{p,q}` over `1 ≤ p + q ≤ n`.
    pub fn min_upsilon(&self) -> f64 {
        self.direct().map(|e| e.upsilon.value()).fold(f64::INFINITY, f64::min)
    }

    /// Smallest `Γ_{p,q}` over `1 ≤ p + q ≤ n`, if defined.
    pub fn min_gamma(&self) -> Option<Rational> {
        self.direct().map(|e| e.gamma).try_fold(None, |acc: Option<Rational>, g| {
            let g = g?;
            Some(Some(acc.map_or(g, |a| a.min(g))))
        })?
    }
}

pub fn thresholds(n: usize) -> ThresholdTable {
    let mut entries = Vec::with_capacity((n + 1) * (n + 1) - 1);
    for p in 0..=n {
        for q in 0..=n {
            if p + q == 0 {
                continue;
            }
            let (u, branch) = upsilon(n, p, q);
            entries.push(ThresholdEntry { p, q, upsilon: u, branch, gamma: gamma(n, p, q) });
        }
    }
    ThresholdTable { n, entries }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    NotCertified,
    /// The curvature term is nonnegative; harmonic primitive forms of this type are parallel.
    Nonneg,
    /// The curvature term is positive; harmonic primitive forms of this type vanish.
    Strict,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Strict => "vanishes",
            Verdict::Nonneg => "parallel-only",
            Verdict::NotCertified => "not-certified",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Tested against the threshold at this bidegree.
    Direct,
    /// Copied from `(n − p, n − q)` by Serre duality.
    Duality { p: usize, q: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertMode {
    /// Calabi operator against `Υ_{p,q}`.
    Calabi,
    /// `𝔎|_{𝔰𝔲(n)}` of a Kähler–Einstein tensor against `Γ_{p,q}`.
    KaehlerEinstein,
}

impl CertMode {
    pub fn name(&self) -> &'static str {
        match self {
            CertMode::Calabi => "calabi",
            CertMode::KaehlerEinstein => "ke",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertEntry {
    pub p: usize,
    pub q: usize,
    pub threshold: f64,
    pub verdict: Verdict,
    pub provenance: Provenance,
    /// `None` for duality entries and when the threshold is outside `(0, dim]`.
    pub report: Option<PositivityReport>,
}

/// The `(n/2 + 1)` shortcut for Kähler–Einstein certificates: positivity at
/// `n/2 + 1` implies every per-bidegree verdict only when all `Γ_{p,q}` with
/// `1 ≤ p + q ≤ n` are at least `n/2 + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfPlusOne {
    pub report: Option<PositivityReport>,
    pub min_gamma: Option<Rational>,
    /// `min_gamma ≥ n/2 + 1`.
    pub reduction_valid: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub mode: CertMode,
    pub n: usize,
    pub spectrum: Vec<f64>,
    pub entries: Vec<CertEntry>,
    /// Every `(p, q)` with `1 ≤ p + q ≤ n` is strict. In Calabi mode this
    /// certifies the rational cohomology of `ℙⁿ`; in KE mode the vanishing of
    /// all primitive harmonic forms.
    pub summary: bool,
    pub half_plus_one: Option<HalfPlusOne>,
}

impl Certificate {
    pub fn get(&self, p: usize, q: usize) -> Option<&CertEntry> {
        self.entries.iter().find(|e| e.p == p && e.q == q)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertifyError {
    Dimension { expected: usize, got: usize },
    /// Kähler–Einstein certificates need `n ≥ 2`.
    Degenerate { n: usize },
    NotEinstein { residual: f64 },
}

impl fmt::Display for CertifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyError::Dimension { expected, got } => {
                write!(f, "spectrum has dimension {got}, expected {expected}")
            }
            CertifyError::Degenerate { n } => write!(f, "KE certificates need n >= 2 (got {n})"),
            CertifyError::NotEinstein { residual } => {
                write!(f, "tensor is not Einstein (traceless Ricci residual {residual:e})")
            }
        }
    }
}

impl core::error::Error for CertifyError {}

fn verdict_at(s: &Spectrum, k: f64) -> (Verdict, Option<PositivityReport>) {
    match k_test(s, k) {
        Ok(r) if r.positive => (Verdict::Strict, Some(r)),
        Ok(r) if r.nonneg => (Verdict::Nonneg, Some(r)),
        Ok(r) => (Verdict::NotCertified, Some(r)),
        Err(_) => (Verdict::NotCertified, None),
    }
}

fn assemble(
    mode: CertMode,
    n: usize,
    s: &Spectrum,
    threshold: impl Fn(usize, usize) -> f64,
) -> Certificate {
    let mut entries = Vec::new();
    for p in 0..=n {
        for q in 0..=n {
            if p + q == 0 || (p == n && q == n) || p + q > n {
                continue;
            }
            let k = threshold(p, q);
            let (verdict, report) = verdict_at(s, k);
            entries.push(CertEntry { p, q, threshold: k, verdict, provenance: Provenance::Direct, report });
        }
    }
    let direct = entries.len();
    for p in 0..=n {
        for q in 0..=n {
            if p + q <= n || (p == n && q == n) {
                continue;
            }
            let (dp, dq) = (n - p, n - q);
            let src = entries[..direct].iter().find(|e| e.p == dp && e.q == dq).expect("dual is direct");
            entries.push(CertEntry {
                p,
                q,
                threshold: src.threshold,
                verdict: src.verdict,
                provenance: Provenance::Duality { p: dp, q: dq },
                report: None,
            });
        }
    }
    entries.sort_by_key(|e| (e.p, e.q));
    let summary = entries.iter().filter(|e| e.provenance == Provenance::Direct).all(|e| e.verdict == Verdict::Strict);
    Certificate { mode, n, spectrum: s.values.clone(), entries, summary, half_plus_one: None }
}

/// Certificate from the Calabi spectrum, of dimension `n(n+1)/2`.
pub fn certify_calabi(s: &Spectrum, n: usize) -> Result<Certificate, CertifyError> {
    let expected = n * (n + 1) / 2;
    if n == 0 || s.dim() != expected {
        return Err(CertifyError::Dimension { expected, got: s.dim() });
    }
    Ok(assemble(CertMode::Calabi, n, s, |p, q| upsilon(n, p, q).0.value()))
}

/// Certificate from the spectrum of `𝔎|_{𝔰𝔲(n)}`, of dimension `n² − 1`.
/// The caller is responsible for the Einstein condition; see
/// [`certify_ke_tensor`] for the checked entry point.
pub fn certify_ke(s: &Spectrum, n: usize) -> Result<Certificate, CertifyError> {
    if n < 2 {
        return Err(CertifyError::Degenerate { n });
    }
    let expected = n * n - 1;
    if s.dim() != expected {
        return Err(CertifyError::Dimension { expected, got: s.dim() });
    }
    let table = thresholds(n);
    let gam = |p: usize, q: usize| {
        let g = gamma(n, p, q).expect("n >= 2");
        *g.numer() as f64 / *g.denom() as f64
    };
    let mut cert = assemble(CertMode::KaehlerEinstein, n, s, gam);
    let k = n as f64 / 2.0 + 1.0;
    let min_gamma = table.min_gamma();
    let bound = Rational::new(n as i128 + 2, 2);
    cert.half_plus_one = Some(HalfPlusOne {
        report: k_test(s, k).ok(),
        min_gamma,
        reduction_valid: min_gamma.is_some_and(|g| g >= bound),
    });
    Ok(cert)
}

/// [`certify_ke`] on a tensor, refusing non-Einstein input.
pub fn certify_ke_tensor(
    r: &crate::curvature::AlgebraicCurvatureTensor,
) -> Result<Certificate, CertifyError> {
    use crate::curvature::{kaehler_operator, restrict_su, ricci};
    let n = r.n();
    if n < 2 {
        return Err(CertifyError::Degenerate { n });
    }
    let ric = ricci(r);
    if ric.einstein_lambda.is_none() {
        return Err(CertifyError::NotEinstein { residual: ric.einstein_residual });
    }
    let k = kaehler_operator(r).map_err(|_| CertifyError::NotEinstein { residual: ric.einstein_residual })?;
    let su = restrict_su(r, &k).map_err(|_| CertifyError::NotEinstein { residual: ric.einstein_residual })?;
    let s = crate::spectral::operator_spectrum(&su).map_err(|_| CertifyError::Dimension { expected: n * n - 1, got: 0 })?;
    certify_ke(&s, n)
}

/// One-line description of a certificate entry, used by reports.
pub fn describe(e: &CertEntry) -> String {
    match e.provenance {
        Provenance::Direct => format!("({},{}) at {:.6}: {}", e.p, e.q, e.threshold, e.verdict.name()),
        Provenance::Duality { p, q } => format!("({},{}) from ({p},{q}): {}", e.p, e.q, e.verdict.name()),
    }
}
