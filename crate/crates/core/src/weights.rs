//! The two-exponent weight family `c(s) = s^δ (1+s)^{δ'-δ}` and the
//! quantities derived from it pointwise: the logarithmic derivative
//! `s c'(s)/c(s)`, the Hardy function `η` and its carré du champ `Γ(η)`.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A nonnegative exponent kept both as an exact rational and as `f64`.
///
/// Decimal input is read exactly, so `"0.1"` is `1/10` rather than the
/// nearest binary double.
#[derive(Clone, Debug)]
pub struct Exponent {
    exact: BigRational,
    approx: f64,
}

impl PartialEq for Exponent {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl Eq for Exponent {}

impl std::hash::Hash for Exponent {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.exact.hash(state)
    }
}

impl Exponent {
    pub fn from_ratio(exact: BigRational) -> Result<Self> {
        if exact.is_negative() {
            return Err(Error::Domain(format!("exponent {exact} is negative")));
        }
        let approx = ratio_to_f64(&exact);
        if !approx.is_finite() {
            return Err(Error::Overflow(format!("exponent {exact}")));
        }
        Ok(Exponent { exact, approx })
    }

    pub fn from_integer(n: u32) -> Self {
        Exponent {
            exact: BigRational::from_integer(BigInt::from(n)),
            approx: n as f64,
        }
    }

    /// Reads `x` through its shortest round-trip decimal rendering.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("exponent {x} is not finite")));
        }
        format!("{x}").parse()
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn value(&self) -> f64 {
        self.approx
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Exponent::from_ratio(parse_rational(s)?)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.exact))
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
            Float(f64),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse(),
            Raw::Int(i) => format!("{i}").parse(),
            Raw::Float(x) => Exponent::from_f64(x),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Parses `"3"`, `"-2/7"`, `"0.125"` or `"1.5e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Domain(format!("cannot parse {s:?} as a rational number"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let scale = exp10 - frac_part.len() as i32 - 1;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(all);
    if scale >= 0 {
        value *= BigRational::from_integer(num::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Renders `p/q`, or just `p` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Dimension and exponents `(d, δ, δ')`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightParams {
    pub dim: u32,
    pub delta: Exponent,
    pub delta_prime: Exponent,
}

impl WeightParams {
    pub fn new(dim: u32, delta: f64, delta_prime: f64) -> Result<Self> {
        Self::from_exponents(dim, Exponent::from_f64(delta)?, Exponent::from_f64(delta_prime)?)
    }

    pub fn parse(dim: u32, delta: &str, delta_prime: &str) -> Result<Self> {
        Self::from_exponents(dim, delta.parse()?, delta_prime.parse()?)
    }

    pub fn from_exponents(dim: u32, delta: Exponent, delta_prime: Exponent) -> Result<Self> {
        let params = WeightParams {
            dim,
            delta,
            delta_prime,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        // Exponent construction already rejects negative values.
        Ok(())
    }

    pub fn delta_min(&self) -> f64 {
        self.delta.value().min(self.delta_prime.value())
    }

    pub fn delta_max(&self) -> f64 {
        self.delta.value().max(self.delta_prime.value())
    }

    pub fn exact_min(&self) -> &BigRational {
        std::cmp::min(self.delta.exact(), self.delta_prime.exact())
    }

    pub fn exact_max(&self) -> &BigRational {
        std::cmp::max(self.delta.exact(), self.delta_prime.exact())
    }

    /// Same exponents in a different dimension.
    pub fn with_dim(&self, dim: u32) -> Result<Self> {
        Self::from_exponents(dim, self.delta.clone(), self.delta_prime.clone())
    }
}

impl fmt::Display for WeightParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} δ={} δ'={}", self.dim, self.delta, self.delta_prime)
    }
}

/// Pure evaluator for `c` and its derived quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightProfile {
    params: WeightParams,
    delta: f64,
    delta_prime: f64,
}

impl WeightProfile {
    pub fn new(params: WeightParams) -> Self {
        let delta = params.delta.value();
        let delta_prime = params.delta_prime.value();
        WeightProfile {
            params,
            delta,
            delta_prime,
        }
    }

    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn dim(&self) -> u32 {
        self.params.dim
    }

    /// `ln c(s)`, for `s > 0`.
    #[inline]
    pub fn ln_c(&self, s: f64) -> f64 {
        if self.delta == self.delta_prime {
            self.delta * s.ln()
        } else {
            self.delta * s.ln() + (self.delta_prime - self.delta) * s.ln_1p()
        }
    }

    /// Unchecked evaluation for inner loops; callers guarantee `s > 0`.
    #[inline]
    pub fn c(&self, s: f64) -> f64 {
        if self.delta == self.delta_prime {
            if self.delta == 0.0 {
                1.0
            } else {
                s.powf(self.delta)
            }
        } else {
            self.ln_c(s).exp()
        }
    }

    pub fn eval_c(&self, s: f64) -> Result<f64> {
        check_positive(s)?;
        let value = self.c(s);
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Overflow(format!("c({s:e}) for {}", self.params)));
        }
        Ok(value)
    }

    /// `s c'(s) / c(s) = (δ + δ' s)/(1 + s)`.
    #[inline]
    pub fn rho(&self, s: f64) -> f64 {
        if self.delta == self.delta_prime {
            self.delta
        } else {
            (self.delta + self.delta_prime * s) / (1.0 + s)
        }
    }

    pub fn log_derivative_ratio(&self, s: f64) -> Result<f64> {
        check_positive(s)?;
        Ok(self.rho(s))
    }

    /// `c'(s)`, unchecked.
    #[inline]
    pub fn c_prime(&self, s: f64) -> f64 {
        self.c(s) * self.rho(s) / s
    }

    /// `η(r) = (a₁ c(r))^{1/2} / r` together with `η'(r)`, unchecked.
    pub fn eta_jet(&self, a1: f64, r: f64) -> (f64, f64) {
        let eta = (a1 * self.c(r)).sqrt() / r;
        (eta, eta * (0.5 * self.rho(r) - 1.0) / r)
    }

    /// `Γ(η) = a₁ c(r)² r⁻⁴ (1 − ρ(r)/2)²` for `η² = a₁ c r⁻²`.
    pub fn gamma_eta(&self, a1: f64, r: f64) -> Result<f64> {
        check_positive(r)?;
        if !(a1 > 0.0) {
            return Err(Error::Domain(format!("a1 = {a1} must be positive")));
        }
        let factor = 1.0 - 0.5 * self.rho(r);
        if factor == 0.0 {
            return Ok(0.0);
        }
        let value = a1 * (2.0 * self.ln_c(r) - 4.0 * r.ln()).exp() * factor * factor;
        if !value.is_finite() {
            return Err(Error::Overflow(format!("Γ(η)({r:e})")));
        }
        Ok(value)
    }
}

fn check_positive(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument {s} must be positive and finite")))
    }
}
