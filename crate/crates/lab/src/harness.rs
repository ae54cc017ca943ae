//! Seeded trial fan-out.
//!
//! Trial `t` of a check labelled `label` draws from
//! `stream(seed, label, t)`, so results do not depend on scheduling. Results
//! come back in trial order and are folded sequentially.

use rayon::prelude::*;

use crate::LabError;

pub const THREADS_ENV: &str = "CALABI_LAB_THREADS";

/// Thread count from `CALABI_LAB_THREADS`; `0` or unset means one per core.
pub fn threads_from_env() -> Result<usize, LabError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| LabError::Config(format!("{THREADS_ENV} must be a nonnegative integer, got '{v}'"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(LabError::Config(format!("{THREADS_ENV}: {e}"))),
    }
}

/// Runs `f` inside a pool with `threads` workers (`0` = rayon's default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, LabError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// `f(0), …, f(count − 1)` in parallel, returned in index order.
pub fn map_trials<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..count).into_par_iter().map(f).collect()
}

/// Running worst case over samples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tally {
    pub samples: usize,
    pub violations: usize,
    pub max: f64,
    /// Description of the sample that produced `max`.
    pub worst: Option<String>,
}

impl Tally {
    pub fn observe(&mut self, value: f64, violated: bool, label: impl FnOnce() -> String) {
        self.samples += 1;
        if violated {
            self.violations += 1;
        }
        // NaN counts as worst
        if (value.is_nan() || value > self.max || self.worst.is_none()) && !self.max.is_nan() {
            self.max = value;
            self.worst = Some(label());
        }
    }

    pub fn merge(&mut self, other: Tally) {
        self.samples += other.samples;
        self.violations += other.violations;
        if other.worst.is_some() && (other.max.is_nan() || other.max > self.max || self.worst.is_none()) && !self.max.is_nan() {
            self.max = other.max;
            self.worst = other.worst;
        }
    }

    pub fn fold(parts: impl IntoIterator<Item = Tally>) -> Tally {
        parts.into_iter().fold(Tally::default(), |mut acc, t| {
            acc.merge(t);
            acc
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_keeps_order() {
        let v = with_threads(3, || map_trials(100, |i| i * i)).unwrap();
        assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn tally_tracks_worst() {
        let mut a = Tally::default();
        a.observe(1e-14, false, || "a0".into());
        a.observe(3e-13, false, || "a1".into());
        let mut b = Tally::default();
        b.observe(2.0, true, || "b0".into());
        a.merge(b);
        assert_eq!((a.samples, a.violations, a.max), (3, 1, 2.0));
        assert_eq!(a.worst.as_deref(), Some("b0"));
        let mut c = Tally::default();
        c.observe(f64::NAN, true, || "nan".into());
        c.observe(5.0, false, || "later".into());
        assert!(c.max.is_nan());
        assert_eq!(c.worst.as_deref(), Some("nan"));
    }
}
