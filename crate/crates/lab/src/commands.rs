//! The four subcommands. Each turns a [`RunConfig`] into a [`ReportEnvelope`].

use calabi_core::certify::{
    certify_calabi, certify_ke_tensor, thresholds, CertEntry, Certificate, MinBranch, Provenance, Rational, Threshold,
};
use calabi_core::curvature::{calabi_from_tensor, kaehler_operator, restrict_su, ricci, AlgebraicCurvatureTensor};
use calabi_core::spectral::{eigensystem, k_test_with_eps, operator_spectrum, Spectrum, POSITIVITY_EPS};
use serde_json::{json, Value};

use crate::report::{ConfigEcho, Record, ReportEnvelope, Status};
use crate::space::{self, SpaceExpr};
use crate::suite::{self, Mutation, SuiteOptions};
use crate::LabError;

/// Largest `n` accepted by `thresholds`; the exact arithmetic is `i128`.
pub const THRESHOLD_MAX_N: usize = 64;
/// Upper limit for `--max-n`.
pub const VERIFY_HARD_MAX_N: usize = 8;
pub const DEFAULT_MAX_N: usize = 4;
/// Reconstruction residual allowed for an eigendecomposition, relative to `max(1, ‖C‖∞)`.
const DECOMPOSITION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    Spectrum,
    Thresholds,
    Certify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::Thresholds => "thresholds",
            Command::Certify => "certify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Calabi,
    Ke,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Calabi => "calabi",
            Mode::Ke => "ke",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: Option<usize>,
    pub pq: Option<(usize, usize)>,
    pub space: Option<String>,
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    /// Strictness margin `ε` of the spectrum ladder.
    pub tol: Option<f64>,
    pub max_n: usize,
    pub inject_bug: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            n: None,
            pq: None,
            space: None,
            mode: Mode::Calabi,
            trials: 20,
            seed: 0,
            tol: None,
            max_n: DEFAULT_MAX_N,
            inject_bug: false,
        }
    }

    fn echo(&self) -> ConfigEcho {
        let c = self.command;
        ConfigEcho {
            command: c.name().into(),
            n: self.n,
            pq: self.pq.map(|(p, q)| [p, q]),
            space: self.space.clone(),
            mode: (c == Command::Certify).then(|| self.mode.name().into()),
            trials: (c == Command::Verify).then_some(self.trials),
            seed: (c == Command::Verify).then_some(self.seed),
            tol: self.tol,
            max_n: (c == Command::Verify).then_some(self.max_n),
            inject_bug: self.inject_bug,
        }
    }
}

fn config(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

pub fn run(cfg: &RunConfig) -> Result<ReportEnvelope, LabError> {
    let records = match cfg.command {
        Command::Verify => verify(cfg)?,
        Command::Spectrum => spectrum(cfg)?,
        Command::Thresholds => threshold_table(cfg)?,
        Command::Certify => certify(cfg)?,
    };
    Ok(ReportEnvelope::new(cfg.echo(), records))
}

fn check_pq(pq: Option<(usize, usize)>, n: usize) -> Result<(), LabError> {
    if let Some((p, q)) = pq {
        if p + q == 0 || p + q > n {
            return Err(config(format!("--pq {p},{q} needs 1 ≤ p + q ≤ n = {n}")));
        }
    }
    Ok(())
}

fn reject_tol(cfg: &RunConfig) -> Result<(), LabError> {
    if cfg.tol.is_some() {
        return Err(config(format!("--tol applies to spectrum only, not {}", cfg.command.name())));
    }
    Ok(())
}

fn verify(cfg: &RunConfig) -> Result<Vec<Record>, LabError> {
    reject_tol(cfg)?;
    if cfg.max_n == 0 || cfg.max_n > VERIFY_HARD_MAX_N {
        return Err(config(format!("--max-n must be between 1 and {VERIFY_HARD_MAX_N}")));
    }
    let n = cfg.n.ok_or_else(|| config("verify needs --n"))?;
    if n == 0 || n > cfg.max_n {
        return Err(config(format!("--n must be between 1 and --max-n = {} for verify, got {n}", cfg.max_n)));
    }
    if cfg.trials == 0 {
        return Err(config("--trials must be positive"));
    }
    check_pq(cfg.pq, n)?;
    let mutation = if cfg.inject_bug { Mutation::NegateCalabi } else { Mutation::None };
    Ok(suite::verify_suite(n, cfg.trials, SuiteOptions { seed: cfg.seed, mutation, pq: cfg.pq }))
}

fn resolve_space(cfg: &RunConfig) -> Result<(SpaceExpr, AlgebraicCurvatureTensor), LabError> {
    let text = cfg.space.as_deref().ok_or_else(|| config(format!("{} needs --space", cfg.command.name())))?;
    let expr = space::parse(text)?;
    let r = expr.resolve()?;
    if let Some(n) = cfg.n {
        if n != r.n() {
            return Err(config(format!("--n {n} does not match the space, which has n = {}", r.n())));
        }
    }
    Ok((expr, r))
}

fn decomposition_check(c: &calabi_core::linalg::CMatrix, s: &Spectrum) -> Record {
    let res = s.reconstruction_residual(c).unwrap_or(f64::NAN);
    let limit = DECOMPOSITION_TOL * s.sup_norm().max(1.0);
    Record::check("eigendecomposition", "C = U diag(σ) Uᴴ with U unitary", res <= limit)
        .residual(res)
        .value("orthonormality_residual", s.orthonormality_residual().unwrap_or(f64::NAN))
}

/// `k` values of the ladder: `1, n/2, n/2 + 1` and the distinct `Υ_{p,q}`,
/// ascending and capped at `dim`.
pub fn ladder(n: usize, dim: usize) -> Vec<f64> {
    let mut ks = vec![1.0, n as f64 / 2.0, n as f64 / 2.0 + 1.0];
    ks.extend(thresholds(n).direct().map(|e| e.upsilon.value()));
    ks.retain(|&k| k > 0.0 && k <= dim as f64);
    ks.sort_by(f64::total_cmp);
    ks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    ks
}

fn spectrum(cfg: &RunConfig) -> Result<Vec<Record>, LabError> {
    check_tol(cfg.tol)?;
    let eps = cfg.tol.unwrap_or(POSITIVITY_EPS);
    let (expr, r) = resolve_space(cfg)?;
    let n = r.n();
    check_pq(cfg.pq, n)?;
    let c = calabi_from_tensor(&r)?.matrix;
    let s = eigensystem(&c)?;
    let ric = ricci(&r);
    let mut out = vec![decomposition_check(&c, &s)];
    out.push(
        Record::new("calabi spectrum", "eigenvalues of the Calabi operator on ⊙²V^{1,0}, ascending", Status::Info)
            .value("space", expr.to_string())
            .value("n", n)
            .value("dim", s.dim())
            .value("eigenvalues", s.values.clone())
            .value("sup_norm", s.sup_norm())
            .value("scal", ric.scal)
            .value("einstein_lambda", ric.einstein_lambda),
    );
    for k in ladder(n, s.dim()) {
        let rep = k_test_with_eps(&s, k, eps)?;
        let mut at: Vec<Value> = Vec::new();
        for e in thresholds(n).direct() {
            if (e.upsilon.value() - k).abs() <= 1e-12 * k.max(1.0) && e.p >= e.q {
                at.push(json!([e.p, e.q]));
            }
        }
        if let Some((p, q)) = cfg.pq {
            let (p, q) = (p.max(q), p.min(q));
            if !at.contains(&json!([p, q])) && !is_reference_k(n, k) {
                continue;
            }
        }
        out.push(
            Record::new(format!("k = {}", fmt_k(k)), "sum of the lowest ⌊k⌋ eigenvalues plus (k−⌊k⌋) times the next", Status::Info)
                .value("k", k)
                .value("partial_sum", rep.partial_sum)
                .value("margin", rep.margin)
                .value("nonneg", rep.nonneg)
                .value("positive", rep.positive)
                .value("upsilon_of", at),
        );
    }
    if n >= 2 && ric.einstein_lambda.is_some() {
        let k = kaehler_operator(&r)?;
        let su = operator_spectrum(&restrict_su(&r, &k)?)?;
        out.push(
            Record::new("kaehler operator on su(n)", "eigenvalues of 𝔎 restricted to 𝔰𝔲(n) for an Einstein tensor", Status::Info)
                .value("dim", su.dim())
                .value("eigenvalues", su.values),
        );
    }
    Ok(out)
}

fn is_reference_k(n: usize, k: f64) -> bool {
    [1.0, n as f64 / 2.0, n as f64 / 2.0 + 1.0].iter().any(|r| (r - k).abs() <= 1e-12)
}

fn fmt_k(k: f64) -> String {
    let r = (k * 2.0).round() / 2.0;
    if (r - k).abs() < 1e-12 {
        if r.fract() == 0.0 {
            format!("{r:.0}")
        } else {
            format!("{r:.1}")
        }
    } else {
        format!("{k:.6}")
    }
}

fn check_tol(tol: Option<f64>) -> Result<(), LabError> {
    match tol {
        Some(t) if !(t.is_finite() && t >= 0.0) => Err(config(format!("--tol must be a nonnegative number, got {t}"))),
        _ => Ok(()),
    }
}

fn rational_json(r: Rational) -> Value {
    if *r.denom() == 1 {
        Value::String(r.numer().to_string())
    } else {
        Value::String(format!("{}/{}", r.numer(), r.denom()))
    }
}

fn rational_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn threshold_table(cfg: &RunConfig) -> Result<Vec<Record>, LabError> {
    reject_tol(cfg)?;
    let n = cfg.n.ok_or_else(|| config("thresholds needs --n"))?;
    if n == 0 || n > THRESHOLD_MAX_N {
        return Err(config(format!("--n must be between 1 and {THRESHOLD_MAX_N} for thresholds, got {n}")));
    }
    check_pq(cfg.pq, n)?;
    let table = thresholds(n);
    let mut out = Vec::new();
    for e in table.direct() {
        if let Some((p, q)) = cfg.pq {
            if (e.p, e.q) != (p, q) {
                continue;
            }
        }
        out.push(
            Record::new(format!("({},{})", e.p, e.q), "Υ_{p,q} for the Calabi operator and Γ_{p,q} for 𝔎 on 𝔰𝔲(n)", Status::Info)
                .value("p", e.p)
                .value("q", e.q)
                .value("upsilon", e.upsilon.value())
                .value("upsilon_exact", match e.upsilon {
                    Threshold::Exact(r) => rational_json(r),
                    Threshold::Float(_) => Value::Null,
                })
                .value("branch", match e.branch {
                    MinBranch::Degree => "min(p,q)",
                    MinBranch::GeometricMean => "sqrt(pq)/2",
                })
                .value("gamma", e.gamma.map(rational_f64))
                .value("gamma_exact", e.gamma.map_or(Value::Null, rational_json)),
        );
    }
    let half = Rational::new(n as i128, 2);
    let half_plus = Rational::new(n as i128 + 2, 2);
    let up_ok = table.direct().all(|e| match e.upsilon {
        Threshold::Exact(r) => r >= half,
        Threshold::Float(x) => x >= n as f64 / 2.0,
    });
    let min_gamma = table.min_gamma();
    out.push(
        Record::new("threshold summary", "minima over 1 ≤ p+q ≤ n", Status::Info)
            .value("n", n)
            .value("min_upsilon", table.min_upsilon())
            .value("upsilon_at_least_half_n", up_ok)
            .value("min_gamma", min_gamma.map(rational_f64))
            .value("gamma_at_least_half_n_plus_one", min_gamma.is_some_and(|g| g >= half_plus)),
    );
    Ok(out)
}

fn entry_record(cert: &Certificate, e: &CertEntry) -> Record {
    let symbol = match cert.mode {
        calabi_core::certify::CertMode::Calabi => "Υ",
        calabi_core::certify::CertMode::KaehlerEinstein => "Γ",
    };
    let anchor = match e.provenance {
        Provenance::Direct => format!(
            "{symbol}_{{p,q}}-nonnegative (positive) spectrum makes g(Ric_L ψ, ψ) ≥ 0 (> 0) for real primitive ψ of type (p,q)+(q,p)"
        ),
        Provenance::Duality { p, q } => format!("Serre duality with ({p},{q})"),
    };
    let mut rec = Record::new(format!("({},{})", e.p, e.q), anchor, Status::Info)
        .value("p", e.p)
        .value("q", e.q)
        .value("verdict", e.verdict.name())
        .value("threshold", e.threshold);
    rec = match e.provenance {
        Provenance::Direct => rec.value("provenance", "direct"),
        Provenance::Duality { p, q } => rec.value("provenance", "duality").value("from", json!([p, q])),
    };
    if let Some(r) = &e.report {
        rec = rec
            .value("partial_sum", r.partial_sum)
            .value("margin", r.margin)
            .value("nonneg", r.nonneg)
            .value("positive", r.positive);
    }
    rec
}

const SCOPE: &str = "pointwise curvature hypothesis only; on a compact manifold satisfying it everywhere, \
                     harmonic forms of a 'parallel-only' type are parallel and those of a 'vanishes' type are zero";

fn certify(cfg: &RunConfig) -> Result<Vec<Record>, LabError> {
    reject_tol(cfg)?;
    let (expr, r) = resolve_space(cfg)?;
    let n = r.n();
    check_pq(cfg.pq, n)?;
    let mut out = Vec::new();
    let cert = match cfg.mode {
        Mode::Calabi => {
            let c = calabi_from_tensor(&r)?.matrix;
            let s = eigensystem(&c)?;
            out.push(decomposition_check(&c, &s));
            certify_calabi(&s, n)?
        }
        Mode::Ke => certify_ke_tensor(&r)?,
    };
    for e in &cert.entries {
        if let Some((p, q)) = cfg.pq {
            if (e.p, e.q) != (p, q) {
                continue;
            }
        }
        out.push(entry_record(&cert, e));
    }
    if let Some(h) = &cert.half_plus_one {
        let mut rec = Record::new(
            "n/2+1 shortcut",
            "(n/2+1)-positivity of 𝔎 on 𝔰𝔲(n) covers every bidegree when all Γ_{p,q} ≥ n/2+1",
            Status::Info,
        )
        .value("k", n as f64 / 2.0 + 1.0)
        .value("min_gamma", h.min_gamma.map(rational_f64))
        .value("reduction_valid", h.reduction_valid);
        if let Some(rep) = &h.report {
            rec = rec.value("partial_sum", rep.partial_sum).value("positive", rep.positive);
        }
        out.push(rec);
    }
    out.push(
        Record::new("certificate summary", "every (p,q) with 1 ≤ p+q ≤ n vanishes", Status::Info)
            .value("space", expr.to_string())
            .value("mode", cfg.mode.name())
            .value("n", n)
            .value("certified", cert.summary)
            .value("spectrum", cert.spectrum.clone())
            .value("scope", SCOPE),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: Command) -> RunConfig {
        RunConfig::new(command)
    }

    #[test]
    fn ladder_values() {
        let k4 = ladder(4, 10);
        for k in [1.0, 2.0, 2.5, 3.0, 5.0, 7.5, 10.0] {
            assert!(k4.contains(&k), "{k4:?}");
        }
        // Υ_{2,1} and Υ_{3,1} take the √(pq)/2 branch
        assert_eq!(k4.len(), 9);
        assert!(k4.windows(2).all(|w| w[0] < w[1]));
        let k3 = ladder(3, 6);
        assert_eq!(k3[..2], [1.0, 1.5]);
        assert!(k3.contains(&2.5) && k3.contains(&6.0));
        assert!(k3.iter().all(|&k| k <= 6.0));
    }

    #[test]
    fn config_errors_exit_two() {
        let mut c = cfg(Command::Verify);
        c.n = Some(5);
        assert_eq!(run(&c).unwrap_err().exit_code(), 2);
        c.n = Some(2);
        c.pq = Some((2, 1));
        assert_eq!(run(&c).unwrap_err().exit_code(), 2);
        let mut c = cfg(Command::Certify);
        c.space = Some("chsc:n=1".into());
        c.mode = Mode::Ke;
        assert_eq!(run(&c).unwrap_err().exit_code(), 2);
        c.space = Some("random:n=2,seed=1".into());
        assert_eq!(run(&c).unwrap_err().exit_code(), 2);
        let mut c = cfg(Command::Spectrum);
        c.space = Some("chsc:n=2".into());
        c.n = Some(3);
        assert_eq!(run(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn thresholds_report_exact_values() {
        let mut c = cfg(Command::Thresholds);
        c.n = Some(6);
        let rep = run(&c).unwrap();
        let r11 = rep.records.iter().find(|r| r.name == "(1,1)").unwrap();
        assert_eq!(r11.values["upsilon_exact"], "3");
        assert_eq!(r11.values["gamma_exact"], "6");
        let summary = rep.records.last().unwrap();
        assert_eq!(summary.values["gamma_at_least_half_n_plus_one"], true);
        c.n = Some(2);
        let rep = run(&c).unwrap();
        assert_eq!(rep.records.last().unwrap().values["gamma_at_least_half_n_plus_one"], false);
    }

    #[test]
    fn ke_certificate_of_chsc() {
        let mut c = cfg(Command::Certify);
        c.space = Some("chsc:n=3,c=1".into());
        c.mode = Mode::Ke;
        let rep = run(&c).unwrap();
        let summary = rep.records.last().unwrap();
        assert_eq!(summary.values["certified"], true);
        assert!(rep.records.iter().any(|r| r.name == "n/2+1 shortcut"));
    }
}
