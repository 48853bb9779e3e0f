//! Exact Gaussian-rational coefficients.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::Complex;

use crate::error::{Error, Result};

pub type Scalar = Complex<BigRational>;

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

pub fn from_int(n: i64) -> Scalar {
    Complex::new(
        BigRational::from_integer(BigInt::from(n)),
        BigRational::zero(),
    )
}

pub fn from_ratio(num: i64, den: i64) -> Scalar {
    Complex::new(
        BigRational::new(BigInt::from(num), BigInt::from(den)),
        BigRational::zero(),
    )
}

pub fn conj(z: &Scalar) -> Scalar {
    Complex::new(z.re.clone(), -z.im.clone())
}

/// Modulus as a float, for tolerance reports.
pub fn abs_f64(z: &Scalar) -> f64 {
    let re = z.re.to_f64().unwrap_or(f64::INFINITY);
    let im = z.im.to_f64().unwrap_or(f64::INFINITY);
    re.hypot(im)
}

/// Parses `"3"`, `"-1/2"` or a decimal such as `"0.25"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if s.contains(['e', 'E']) {
        let f: f64 = s.parse().map_err(|_| Error::Parse(s.to_string()))?;
        return BigRational::from_float(f).ok_or_else(|| Error::Parse(s.to_string()));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| Error::Parse(s.to_string()))?;
        let d = num::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| Error::Parse(s.to_string()))?;
    Ok(BigRational::from_integer(n))
}

pub fn parse_scalar(re: &str, im: &str) -> Result<Scalar> {
    Ok(Complex::new(parse_rational(re)?, parse_rational(im)?))
}

pub fn rational_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_string(z: &Scalar) -> String {
    if z.im.is_zero() {
        rational_to_string(&z.re)
    } else if z.re.is_zero() {
        format!("{}i", rational_to_string(&z.im))
    } else {
        let sign = if z.im.is_negative() { "-" } else { "+" };
        format!(
            "{}{}{}i",
            rational_to_string(&z.re),
            sign,
            rational_to_string(&z.im.abs())
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(
            parse_rational("-1/2").unwrap(),
            BigRational::new((-1).into(), 2.into())
        );
        assert_eq!(
            parse_rational("0.25").unwrap(),
            BigRational::new(1.into(), 4.into())
        );
        assert_eq!(
            parse_rational("-1.5").unwrap(),
            BigRational::new((-3).into(), 2.into())
        );
        assert_eq!(
            parse_rational("7").unwrap(),
            BigRational::from_integer(7.into())
        );
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn formats_complex_values() {
        let z = parse_scalar("1/2", "-3").unwrap();
        assert_eq!(to_string(&z), "1/2-3i");
        assert_eq!(to_string(&from_int(4)), "4");
        assert_eq!(to_string(&conj(&z)), "1/2+3i");
    }
}
