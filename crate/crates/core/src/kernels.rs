//! Univariate radial kernels `K(u)` with `u = (x - c) / sigma`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `exp(-u^2)`.
    #[default]
    Gaussian,
    /// Matern with smoothness 5/2: `(1 + sqrt5 r + 5/3 r^2) exp(-sqrt5 r)`, `r = |u|`.
    Matern52,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Gaussian => "gaussian",
            KernelKind::Matern52 => "matern52",
        }
    }

    /// Highest derivative order that is continuous everywhere.
    pub fn continuity(self) -> u32 {
        match self {
            KernelKind::Gaussian => u32::MAX,
            KernelKind::Matern52 => 4,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(KernelKind::Gaussian),
            "matern52" | "matern-52" | "matern" => Ok(KernelKind::Matern52),
            other => Err(format!("unknown kernel '{other}'")),
        }
    }
}

/// Kernel value at `u`; lies in (0, 1] and equals 1 only at `u = 0`.
#[inline]
pub fn kernel_eval(kind: KernelKind, u: f64) -> f64 {
    match kind {
        KernelKind::Gaussian => (-u * u).exp(),
        KernelKind::Matern52 => {
            let r = u.abs();
            (1.0 + SQRT5 * r + (5.0 / 3.0) * r * r) * (-SQRT5 * r).exp()
        }
    }
}

/// `(K, K', K'', K''')` with respect to `u`.
///
/// For the Matern kernel the odd derivatives carry `sign(u)`; all four are
/// continuous at the origin, where `K' = K''' = 0` and `K'' = -5/3`.
#[inline]
pub fn kernel_derivs(kind: KernelKind, u: f64) -> [f64; 4] {
    match kind {
        KernelKind::Gaussian => {
            let k = (-u * u).exp();
            let u2 = u * u;
            [
                k,
                -2.0 * u * k,
                (4.0 * u2 - 2.0) * k,
                (12.0 * u - 8.0 * u2 * u) * k,
            ]
        }
        KernelKind::Matern52 => {
            let r = u.abs();
            let e = (-SQRT5 * r).exp();
            [
                (1.0 + SQRT5 * r + (5.0 / 3.0) * r * r) * e,
                -(5.0 / 3.0) * u * (1.0 + SQRT5 * r) * e,
                -(5.0 / 3.0) * (1.0 + SQRT5 * r - 5.0 * r * r) * e,
                (25.0 / 3.0) * u * (3.0 - SQRT5 * r) * e,
            ]
        }
    }
}

/// `(K, K')` only; the hot path for first-order training.
#[inline]
pub fn kernel_eval1(kind: KernelKind, u: f64) -> (f64, f64) {
    match kind {
        KernelKind::Gaussian => {
            let k = (-u * u).exp();
            (k, -2.0 * u * k)
        }
        KernelKind::Matern52 => {
            let r = u.abs();
            let e = (-SQRT5 * r).exp();
            (
                (1.0 + SQRT5 * r + (5.0 / 3.0) * r * r) * e,
                -(5.0 / 3.0) * u * (1.0 + SQRT5 * r) * e,
            )
        }
    }
}
