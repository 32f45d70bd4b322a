//! Multiplication counts of the compared estimators as exact rational
//! polynomials in `M`, `N`, `P`, `τ` and the search step `Δ`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{CoreError, Result};

type Q = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComplexityModel {
    MsKaiEsprit,
    Esprit,
    TsEsprit,
    Music,
    RootMusic,
    Avf,
    Cg,
}

impl ComplexityModel {
    pub const ALL: [ComplexityModel; 7] = [
        Self::MsKaiEsprit,
        Self::Esprit,
        Self::TsEsprit,
        Self::Music,
        Self::RootMusic,
        Self::Avf,
        Self::Cg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::MsKaiEsprit => "ms-kai-esprit",
            Self::Esprit => "esprit",
            Self::TsEsprit => "ts-esprit",
            Self::Music => "music",
            Self::RootMusic => "root-music",
            Self::Avf => "avf",
            Self::Cg => "cg",
        }
    }

    /// Exact count, floored to an integer.
    pub fn multiplications(self, params: &ComplexityParams) -> u128 {
        floor_nonnegative(self.exact_multiplications(params))
    }

    fn exact_multiplications(self, c: &ComplexityParams) -> Q {
        let (m, n, p, tau) = (q(c.m), q(c.n), q(c.p), q(c.tau));
        let grid = Q::from_integer(180) / c.delta;
        let m2 = m * m;
        let m3 = m2 * m;
        let p2 = p * p;
        let n2 = n * n;
        let f = |num: i128, den: i128| Q::new(num, den);
        match self {
            Self::MsKaiEsprit => {
                let search = f(10, 3) * m3
                    + m2 * (q(3) * p + q(2))
                    + m * (f(5, 2) * p2 + f(1, 2) * p + q(8) * n2)
                    + p2 * (f(17, 2) * p + f(1, 2));
                let update = q(2) * m3 + m2 * p + m * (f(3, 2) * p2 + f(1, 2) * p) + p2 * (p / q(2) + f(3, 2));
                let first = q(2) * m2 * p + m * (p2 - p + q(8) * n2) + p2 * (q(8) * p - q(1));
                p * tau * search + p * update + first
            }
            Self::Esprit => q(2) * m2 * p + m * (p2 - q(2) * p + q(8) * n2) + q(8) * p2 * p - p2,
            Self::TsEsprit => {
                let tail = m * (f(5, 2) * p2 - f(3, 2) * p + q(8) * n2) + p2 * (f(17, 2) * p + f(1, 2));
                tau * (q(3) * m3 + m2 * (q(3) * p + q(2)) + tail + q(1)) + (q(2) * m3 + m2 * (q(3) * p) + tail)
            }
            Self::Music => grid * (m2 + m * (q(2) - p) - p) + q(8) * m * n2,
            Self::RootMusic => q(2) * m3 - m2 * p + q(8) * m * n2,
            Self::Avf => grid * (m2 * (q(3) * p + q(1)) + m * (q(4) * p - q(2)) + p + q(2)) + m2 * n,
            Self::Cg => grid * (m2 * (p + q(1)) + m * (q(6) * p + q(2)) + p + q(1)) + m2 * n,
        }
    }
}

/// Addition count of MS-KAI-ESPRIT, floored.
pub fn ms_kai_additions(c: &ComplexityParams) -> u128 {
    let (m, n, p, tau) = (q(c.m), q(c.n), q(c.p), q(c.tau));
    let f = |num: i128, den: i128| Q::new(num, den);
    let m2 = m * m;
    let m3 = m2 * m;
    let p2 = p * p;
    let n2 = n * n;
    let search = f(10, 3) * m3
        + m2 * (q(3) * p - q(1))
        + m * (f(5, 2) * p2 - f(9, 2) * p + q(8) * n2)
        + p * (q(8) * p2 - q(2) * p - f(5, 2));
    let update = q(2) * m3 + m2 * (p - q(2)) + m * (f(3, 2) * p2 - f(1, 2) * p) - p * (p + f(1, 2));
    let first = q(2) * m2 * p + m * (p2 - q(4) * p + q(8) * n2) + p * (q(8) * p2 - p - q(2));
    floor_nonnegative(p * tau * search + p * update + first)
}

fn q(x: u32) -> Q {
    Q::from_integer(i128::from(x))
}

fn floor_nonnegative(x: Q) -> u128 {
    u128::try_from(x.floor().to_integer()).unwrap_or(0)
}

impl fmt::Display for ComplexityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComplexityModel {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CoreError::UnknownModel(s.to_string()))
    }
}

/// Problem size for the complexity formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityParams {
    pub m: u32,
    pub n: u32,
    pub p: u32,
    /// Reliability grid size `τ = 1/ι + 1`.
    pub tau: u32,
    /// Spectral search step in degrees, held exactly.
    pub delta: Q,
}

impl ComplexityParams {
    /// `delta` is converted to the nearest simple fraction, so `0.1` is
    /// exactly `1/10`.
    pub fn new(m: u32, n: u32, p: u32, tau: u32, delta: f64) -> Result<Self> {
        if m == 0 || n == 0 || p == 0 || tau == 0 {
            return Err(CoreError::Config(format!(
                "complexity parameters must be positive (M={m}, N={n}, P={p}, tau={tau})"
            )));
        }
        let delta = Q::approximate_float(delta)
            .filter(|d| *d > Q::from_integer(0))
            .ok_or_else(|| CoreError::Config(format!("search step {delta} must be positive")))?;
        Ok(Self { m, n, p, tau, delta })
    }
}

/// Count for a model given by name.
pub fn multiplication_count(model: &str, params: &ComplexityParams) -> Result<u128> {
    Ok(model.parse::<ComplexityModel>()?.multiplications(params))
}
