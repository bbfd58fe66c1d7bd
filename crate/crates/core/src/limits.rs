//! Process-wide resource cap on dense dimensions and entry counts.

use std::sync::OnceLock;

use crate::{Error, Result};

/// Default cap: 2^24 entries (or basis vectors).
pub const DEFAULT_MAX_DIM: u128 = 1 << 24;

/// Environment variable overriding [`DEFAULT_MAX_DIM`].
pub const MAX_DIM_ENV: &str = "INVREP_MAX_DIM";

static MAX_DIM: OnceLock<u128> = OnceLock::new();

/// The configured cap. Read once from `INVREP_MAX_DIM`; malformed values fall
/// back to the default.
pub fn max_dim() -> u128 {
    *MAX_DIM.get_or_init(|| {
        std::env::var(MAX_DIM_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u128>().ok())
            .filter(|&v| v > 0)
            .unwrap_or(DEFAULT_MAX_DIM)
    })
}

/// Fails with [`Error::DimensionOverflow`] when `requested` exceeds the cap.
pub fn check(requested: u128) -> Result<()> {
    let max = max_dim();
    if requested > max {
        Err(Error::DimensionOverflow { requested, max })
    } else {
        Ok(())
    }
}

/// `base^exp` with saturation, for cap checks on tensor powers.
pub fn saturating_pow(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}
