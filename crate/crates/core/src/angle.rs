//! Gate angles.
//!
//! Generators build angles as exact rational multiples of π so that benchmark
//! circuits serialize to the same text on every run. Parsed floating-point
//! literals are kept as plain radians. All arithmetic on gate matrices happens
//! on the `f64` value returned by [`Angle::radians`].

use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy)]
pub enum Angle {
    /// `num/den · π`, always stored in lowest terms with `den > 0`.
    PiFrac { num: i64, den: i64 },
    Radians(f64),
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Angle {
    pub const ZERO: Angle = Angle::PiFrac { num: 0, den: 1 };

    /// `num/den · π`. Panics if `den == 0`.
    pub fn pi_frac(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator in angle");
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(num, den).max(1);
        num /= g;
        den /= g;
        Angle::PiFrac { num, den }
    }

    pub fn radians_value(value: f64) -> Self {
        Angle::Radians(value)
    }

    pub fn radians(&self) -> f64 {
        match *self {
            Angle::PiFrac { num, den } => num as f64 * PI / den as f64,
            Angle::Radians(r) => r,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.radians().is_finite()
    }

    pub fn neg(&self) -> Self {
        match *self {
            Angle::PiFrac { num, den } => Angle::PiFrac { num: -num, den },
            Angle::Radians(r) => Angle::Radians(-r),
        }
    }

    /// Multiplies by an integer factor. Exact fractions stay exact as long as
    /// the numerator fits; the result is reduced modulo 2π, which is only
    /// appropriate for 2π-periodic uses such as phase gates.
    pub fn scaled_mod_2pi(&self, factor: u64) -> Self {
        match *self {
            Angle::PiFrac { num, den } => {
                let period = 2 * den as i128;
                let scaled = (num as i128 * factor as i128).rem_euclid(period);
                // keep the representative in (-π, π]
                let scaled = if scaled > den as i128 { scaled - period } else { scaled };
                Angle::pi_frac(scaled as i64, den)
            }
            Angle::Radians(r) => {
                let v = (r * factor as f64).rem_euclid(2.0 * PI);
                Angle::Radians(if v > PI { v - 2.0 * PI } else { v })
            }
        }
    }

    pub fn approx_eq(&self, other: &Angle, tol: f64) -> bool {
        (self.radians() - other.radians()).abs() <= tol
    }
}

impl PartialEq for Angle {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Angle::PiFrac { num: a, den: b }, Angle::PiFrac { num: c, den: d }) => {
                a == c && b == d
            }
            _ => self.radians() == other.radians(),
        }
    }
}

impl From<f64> for Angle {
    fn from(value: f64) -> Self {
        Angle::Radians(value)
    }
}

/// QASM-compatible rendering: `3*pi/8`, `-pi/4`, `pi`, or a round-trippable
/// float literal.
impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::PiFrac { num: 0, .. } => write!(f, "0"),
            Angle::PiFrac { num, den } => {
                match num {
                    1 => write!(f, "pi")?,
                    -1 => write!(f, "-pi")?,
                    n => write!(f, "{n}*pi")?,
                }
                if den != 1 {
                    write!(f, "/{den}")?;
                }
                Ok(())
            }
            Angle::Radians(r) => write!(f, "{r:?}"),
        }
    }
}

/// Parses the command-line angle shorthand: `3pi/8`, `3*pi/8`, `-pi/4`, `pi`,
/// `2pi*5/16`, or a plain float. Anything else is handed to the QASM
/// expression evaluator.
pub fn parse_angle_literal(text: &str) -> Result<Angle, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let normalized = compact.replace('π', "pi");
    if let Ok(v) = normalized.parse::<f64>() {
        if !v.is_finite() {
            return Err(format!("angle `{text}` is not finite"));
        }
        return Ok(Angle::Radians(v));
    }
    // insert the implicit multiplication in `3pi` so the expression parser accepts it
    let mut expr = String::with_capacity(normalized.len() + 4);
    let mut prev: Option<char> = None;
    let chars: Vec<char> = normalized.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == 'p' && chars.get(i + 1) == Some(&'i') {
            if matches!(prev, Some(p) if p.is_ascii_digit() || p == '.' || p == ')') {
                expr.push('*');
            }
            expr.push_str("pi");
            prev = Some('i');
            i += 2;
            continue;
        }
        expr.push(c);
        prev = Some(c);
        i += 1;
    }
    crate::qasm::eval_angle_expression(&expr).map_err(|e| format!("invalid angle `{text}`: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_are_reduced() {
        assert_eq!(Angle::pi_frac(6, 16), Angle::pi_frac(3, 8));
        assert_eq!(Angle::pi_frac(3, -8), Angle::PiFrac { num: -3, den: 8 });
        assert_eq!(Angle::pi_frac(0, 5), Angle::ZERO);
    }

    #[test]
    fn scaling_wraps_into_half_open_interval() {
        let theta = Angle::pi_frac(3, 8);
        assert_eq!(theta.scaled_mod_2pi(4), Angle::pi_frac(-1, 2));
        assert_eq!(theta.scaled_mod_2pi(2), Angle::pi_frac(3, 4));
        assert_eq!(Angle::pi_frac(1, 2).scaled_mod_2pi(2), Angle::pi_frac(1, 1));
        let big = Angle::pi_frac(5, 8).scaled_mod_2pi(1 << 40);
        assert_eq!(big, Angle::ZERO);
    }

    #[test]
    fn display_forms() {
        assert_eq!(Angle::pi_frac(3, 8).to_string(), "3*pi/8");
        assert_eq!(Angle::pi_frac(-1, 4).to_string(), "-pi/4");
        assert_eq!(Angle::pi_frac(1, 1).to_string(), "pi");
        assert_eq!(Angle::pi_frac(2, 1).to_string(), "2*pi");
        assert_eq!(Angle::ZERO.to_string(), "0");
        assert_eq!(Angle::Radians(0.125).to_string(), "0.125");
    }

    #[test]
    fn cli_literals() {
        assert_eq!(parse_angle_literal("3pi/8").unwrap(), Angle::pi_frac(3, 8));
        assert_eq!(parse_angle_literal("3*pi/8").unwrap(), Angle::pi_frac(3, 8));
        assert_eq!(parse_angle_literal("-pi/4").unwrap(), Angle::pi_frac(-1, 4));
        assert_eq!(parse_angle_literal("2pi*5/16").unwrap(), Angle::pi_frac(5, 8));
        assert_eq!(parse_angle_literal("0.5").unwrap(), Angle::Radians(0.5));
        assert!(parse_angle_literal("pie").is_err());
        assert!(parse_angle_literal("inf").is_err());
    }
}
