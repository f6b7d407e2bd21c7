//! Worker-count selection for the parallel kernels.

use std::fmt;
use std::str::FromStr;

/// Environment variable consulted when no explicit worker count is given.
pub const WORKERS_ENV: &str = "DYNEQ_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// One worker per available core.
    #[default]
    Auto,
    Fixed(usize),
}

impl Workers {
    pub fn count(&self) -> usize {
        match *self {
            Workers::Auto => rayon::current_num_threads(),
            Workers::Fixed(n) => n.max(1),
        }
    }

    /// Reads `DYNEQ_WORKERS`, falling back to `Auto` when unset or malformed.
    pub fn from_env() -> Workers {
        std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or_default()
    }

    /// Runs `f` on a pool of the selected size.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match *self {
            Workers::Auto => f(),
            Workers::Fixed(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
        }
    }
}

impl FromStr for Workers {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Workers::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("worker count must be a positive integer or `auto`, got `{s}`")),
            Ok(n) => Ok(Workers::Fixed(n)),
        }
    }
}

impl fmt::Display for Workers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Workers::Auto => write!(f, "auto"),
            Workers::Fixed(n) => write!(f, "{n}"),
        }
    }
}
