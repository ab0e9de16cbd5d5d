//! Exact rational helpers: Shapley coefficients, parsing and decimal rendering.

use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use num_rational::BigRational as Rational;

pub fn int(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// `s! (n-s-1)! / n!`, the weight of one coalition of size `s` in the
/// Shapley sum of an `n`-agent game.
pub fn shapley_coefficient(s: usize, n: usize) -> Result<BigRational> {
    if n == 0 || s >= n {
        return Err(Error::Precondition(format!(
            "coefficient needs 0 <= s < n, got s={s}, n={n}"
        )));
    }
    let num = factorial(s) * factorial(n - s - 1);
    Ok(BigRational::new(num.into(), factorial(n).into()))
}

/// Integer numerators `s! (n-s-1)!` for every `s < n`, sharing the
/// denominator `n!`. Folding per-size integer sums through this table keeps
/// a Shapley sum to a single rational division.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl CoefficientTable {
    pub fn new(n: usize) -> Self {
        let mut fact = Vec::with_capacity(n + 1);
        fact.push(BigInt::one());
        for k in 1..=n {
            let next = &fact[k - 1] * BigInt::from(k);
            fact.push(next);
        }
        let numerators = (0..n).map(|s| &fact[s] * &fact[n - s - 1]).collect();
        CoefficientTable {
            numerators,
            denominator: fact[n].clone(),
        }
    }

    pub fn agents(&self) -> usize {
        self.numerators.len()
    }

    pub fn coefficient(&self, s: usize) -> BigRational {
        BigRational::new(self.numerators[s].clone(), self.denominator.clone())
    }

    /// `sum_s coefficient(s) * per_size[s]` for integer per-size totals.
    pub fn weigh(&self, per_size: &[BigInt]) -> BigRational {
        let num = per_size
            .iter()
            .zip(&self.numerators)
            .fold(BigInt::zero(), |acc, (c, k)| acc + c * k);
        BigRational::new(num, self.denominator.clone())
    }

    /// Same as [`weigh`](Self::weigh) for rational per-size totals.
    pub fn weigh_rational(&self, per_size: &[BigRational]) -> BigRational {
        let sum = per_size
            .iter()
            .zip(&self.numerators)
            .fold(BigRational::zero(), |acc, (c, k)| acc + c * k);
        sum / BigRational::from_integer(self.denominator.clone())
    }
}

/// Parses `"p/q"`, `"p"`, or a plain decimal such as `"0.5"` or `"-1.25"`
/// exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Precondition(format!("not a rational number: {text:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Precondition(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let digits = format!("{}{frac}", whole.trim_start_matches(['-', '+']));
        let mut num = BigInt::from_str(&digits).map_err(|_| bad())?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(num, den));
    }
    BigInt::from_str(t)
        .map(BigRational::from_integer)
        .map_err(|_| bad())
}

/// Canonical `p/q` string (`p` alone for integers).
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering rounded half away from zero to `digits` significant
/// digits, without exponent notation.
pub fn to_decimal(r: &BigRational, digits: usize) -> String {
    let digits = digits.max(1);
    if r.is_zero() {
        return "0".into();
    }
    let negative = r.is_negative();
    let x = r.abs();
    let ten = BigInt::from(10);
    // exponent e with 10^e <= x < 10^(e+1)
    let mut e = x.numer().to_string().len() as i64 - x.denom().to_string().len() as i64;
    let pow10 = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while pow10(e) > x {
        e -= 1;
    }
    while pow10(e + 1) <= x {
        e += 1;
    }
    let scaled = &x * pow10(digits as i64 - 1 - e);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut mantissa = if rem.clone() * 2 >= *scaled.denom() {
        q + 1
    } else {
        q
    };
    if mantissa == num_traits::pow(ten.clone(), digits) {
        mantissa /= 10;
        e += 1;
    }
    // value = mantissa * 10^(e - digits + 1)
    let m = mantissa.to_string();
    let point = e + 1; // digits before the decimal point
    let mut out = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), m)
    } else if point as usize >= m.len() {
        format!("{}{}", m, "0".repeat(point as usize - m.len()))
    } else {
        format!("{}.{}", &m[..point as usize], &m[point as usize..])
    };
    if out.contains('.') {
        out = out.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if negative {
        out.insert(0, '-');
    }
    out
}

/// Lossy `f64` view, for statistics and reporting only.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
