//! Process-wide numerical tolerance.

use std::sync::OnceLock;

/// Default absolute tolerance used for membership tests and certificate slack.
pub const DEFAULT_TOL: f64 = 1e-9;

static GLOBAL: OnceLock<f64> = OnceLock::new();

/// The global tolerance: `ABCONV_TOL` if set to a positive finite number,
/// otherwise [`DEFAULT_TOL`]. Read once per process.
pub fn global() -> f64 {
    *GLOBAL.get_or_init(|| {
        std::env::var("ABCONV_TOL")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .unwrap_or(DEFAULT_TOL)
    })
}
