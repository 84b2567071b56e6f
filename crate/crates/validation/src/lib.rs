//! Runs acceptance checks and prints one `PASS`/`FAIL` line per check.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct Check {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{tag} [{}] {}: {} ({:.2} s)",
            self.id, self.title, self.detail, self.seconds
        )
    }
}

/// Runs `body`, which returns whether the check holds and a one-line
/// summary. A panic counts as a failure, and so does exceeding `limit_s`.
pub fn run_check(
    id: u32,
    title: &'static str,
    limit_s: Option<f64>,
    body: impl FnOnce() -> (bool, String),
) -> Check {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match outcome {
        Ok(r) => r,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (false, format!("panicked: {msg}"))
        }
    };
    if let Some(limit) = limit_s {
        if seconds > limit {
            passed = false;
            detail.push_str(&format!("; runtime over {limit} s"));
        }
    }
    Check {
        id,
        title,
        passed,
        detail,
        seconds,
    }
}

/// Prints every check and a summary; true when all passed.
pub fn report(checks: &[Check]) -> bool {
    for c in checks {
        println!("{c}");
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    println!("{passed}/{} acceptance criteria passed", checks.len());
    passed == checks.len()
}
