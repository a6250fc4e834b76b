//! Sparse Laurent polynomials in the variable `A` with exact integer
//! coefficients. Negative exponents are allowed; zero coefficients are
//! never stored.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

/// Laurent polynomial in `A`, kept as exponent -> nonzero coefficient.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LaurentPoly {
    terms: BTreeMap<i32, i64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn one() -> Self {
        LaurentPoly::monomial(0, 1)
    }

    /// `coeff * A^exp`.
    pub fn monomial(exp: i32, coeff: i64) -> Self {
        let mut terms = BTreeMap::new();
        if coeff != 0 {
            terms.insert(exp, coeff);
        }
        LaurentPoly { terms }
    }

    /// sigma = A + 1 + A^-1. All graph evaluations live in Z[sigma].
    pub fn sigma() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(-1, 1);
        terms.insert(0, 1);
        terms.insert(1, 1);
        LaurentPoly { terms }
    }

    pub fn from_terms(pairs: impl IntoIterator<Item = (i32, i64)>) -> Self {
        let mut p = LaurentPoly::zero();
        for (e, c) in pairs {
            p.add_term(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exp: i32, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let entry = self.terms.entry(exp).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&exp);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, i64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    /// Leading coefficient (highest exponent), 0 for the zero polynomial.
    pub fn leading_coeff(&self) -> i64 {
        self.terms.values().next_back().copied().unwrap_or(0)
    }

    pub fn coeff(&self, exp: i32) -> i64 {
        self.terms.get(&exp).copied().unwrap_or(0)
    }

    /// Multiply by `A^k`.
    pub fn shift(&self, k: i32) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(&e, &c)| (e + k, c)).collect(),
        }
    }

    /// Substitute A -> A^-1 (exponent negation).
    pub fn mirror(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(&e, &c)| (-e, c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = LaurentPoly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Representative of the unit class {±A^n · p}: shift so the minimum
    /// exponent is 0, then negate if the leading coefficient is negative.
    /// Idempotent; maps 0 to 0.
    pub fn canonical_unit(&self) -> Self {
        if self.is_zero() {
            return LaurentPoly::zero();
        }
        let shifted = self.shift(-self.min_exp().unwrap());
        if shifted.leading_coeff() < 0 {
            -&shifted
        } else {
            shifted
        }
    }

    /// If `self = ±A^n * other`, returns `(sign, n)`.
    pub fn unit_ratio(&self, other: &LaurentPoly) -> Option<(i64, i32)> {
        if self.is_zero() && other.is_zero() {
            return Some((1, 0));
        }
        if self.is_zero() || other.is_zero() {
            return None;
        }
        let shift = self.min_exp().unwrap() - other.min_exp().unwrap();
        let candidate = other.shift(shift);
        if candidate == *self {
            Some((1, shift))
        } else if -&candidate == *self {
            Some((-1, shift))
        } else {
            None
        }
    }

    /// Total order used for deterministic tie-breaking: by term sequence.
    pub fn order_key(&self) -> Vec<(i32, i64)> {
        self.terms().collect()
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, c);
        }
        out
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in rhs.terms() {
            self.add_term(e, c);
        }
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, -c);
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(&e, &c)| (e, -c)).collect(),
        }
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    /// Table style, descending by exponent: `-A^4-A^3-2A^2-A-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, &c) in self.terms.iter().rev() {
            if c < 0 {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            let mag = c.unsigned_abs();
            if mag != 1 || e == 0 {
                write!(f, "{mag}")?;
            }
            match e {
                0 => {}
                1 => write!(f, "A")?,
                _ => write!(f, "A^{e}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid polynomial text at byte {pos}: {msg}")]
pub struct PolyParseError {
    pub pos: usize,
    pub msg: String,
}

impl FromStr for LaurentPoly {
    type Err = PolyParseError;

    /// Parses the table text form. `{}` braces and whitespace are ignored,
    /// so LaTeX-ish `-A^{4}-A^{3}` is accepted too.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cleaned: Vec<(usize, char)> = s
            .char_indices()
            .filter(|(_, ch)| !ch.is_whitespace() && *ch != '{' && *ch != '}')
            .collect();
        let err = |pos: usize, msg: &str| PolyParseError {
            pos,
            msg: msg.to_string(),
        };
        if cleaned.is_empty() {
            return Err(err(0, "empty input"));
        }
        let mut poly = LaurentPoly::zero();
        let mut i = 0;
        while i < cleaned.len() {
            let mut sign: i64 = 1;
            // Sign prefix.
            while i < cleaned.len() && (cleaned[i].1 == '+' || cleaned[i].1 == '-') {
                if cleaned[i].1 == '-' {
                    sign = -sign;
                }
                i += 1;
            }
            if i >= cleaned.len() {
                return Err(err(s.len(), "dangling sign"));
            }
            // Coefficient digits (optional).
            let mut digits = String::new();
            while i < cleaned.len() && cleaned[i].1.is_ascii_digit() {
                digits.push(cleaned[i].1);
                i += 1;
            }
            let coeff: i64 = if digits.is_empty() {
                1
            } else {
                digits
                    .parse()
                    .map_err(|_| err(cleaned[i - 1].0, "coefficient overflow"))?
            };
            // Variable part (optional).
            let mut exp: i32 = 0;
            if i < cleaned.len() && cleaned[i].1 == 'A' {
                i += 1;
                exp = 1;
                if i < cleaned.len() && cleaned[i].1 == '^' {
                    i += 1;
                    let mut esign = 1i32;
                    if i < cleaned.len() && cleaned[i].1 == '-' {
                        esign = -1;
                        i += 1;
                    }
                    let mut edigits = String::new();
                    while i < cleaned.len() && cleaned[i].1.is_ascii_digit() {
                        edigits.push(cleaned[i].1);
                        i += 1;
                    }
                    if edigits.is_empty() {
                        let pos = cleaned.get(i).map_or(s.len(), |(p, _)| *p);
                        return Err(err(pos, "missing exponent"));
                    }
                    exp = esign
                        * edigits
                            .parse::<i32>()
                            .map_err(|_| err(cleaned[i - 1].0, "exponent overflow"))?;
                }
            } else if digits.is_empty() {
                let pos = cleaned.get(i).map_or(s.len(), |(p, _)| *p);
                return Err(err(pos, "expected coefficient or A"));
            }
            poly.add_term(exp, sign * coeff);
        }
        Ok(poly)
    }
}

/// JSON object form: exponent (as string key) -> coefficient.
pub fn to_json_map(p: &LaurentPoly) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = p
        .terms()
        .map(|(e, c)| (e.to_string(), serde_json::Value::from(c)))
        .collect();
    serde_json::Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        for text in [
            "-A^4-A^3-2A^2-A-1",
            "A^15+A^12+A^9+A^7+A^5+A^4+A^2-1",
            "2A^7-A^6+4A^5-3A^4+3A^3-4A^2+A-2",
            "0",
            "A",
            "3-A^-2",
        ] {
            assert_eq!(p(text).to_string(), text);
        }
    }

    #[test]
    fn parse_latex_braces() {
        assert_eq!(p("-A^{4} - A^{3} - 2A^{2} - A - 1"), p("-A^4-A^3-2A^2-A-1"));
    }

    #[test]
    fn sigma_is_mirror_symmetric() {
        let s = LaurentPoly::sigma();
        assert_eq!(s.mirror(), s);
    }

    #[test]
    fn canonical_unit_examples() {
        // -A^4-A^3-2A^2-A-1 -> A^4+A^3+2A^2+A+1
        assert_eq!(
            p("-A^4-A^3-2A^2-A-1").canonical_unit(),
            p("A^4+A^3+2A^2+A+1")
        );
        // A^-1 + A^2 -> 1 + A^3
        assert_eq!(p("A^-1+A^2").canonical_unit(), p("A^3+1"));
        assert_eq!(LaurentPoly::zero().canonical_unit(), LaurentPoly::zero());
        // Idempotent and constant on the unit class.
        let q = p("A^5-2A^3+A");
        let canon = q.canonical_unit();
        assert_eq!(canon.canonical_unit(), canon);
        assert_eq!((-&q.shift(7)).canonical_unit(), canon);
    }

    #[test]
    fn mirror_swaps_exponents() {
        assert_eq!(p("A^2+A^-1").mirror(), p("A^-2+A"));
    }

    #[test]
    fn unit_ratio_detects_monomial_factors() {
        let q = p("A^3+2A-1");
        assert_eq!(q.shift(4).unit_ratio(&q), Some((1, 4)));
        assert_eq!((-&q.shift(-2)).unit_ratio(&q), Some((-1, -2)));
        assert_eq!(p("A^3+2A+1").unit_ratio(&q), None);
    }

    #[test]
    fn arithmetic() {
        let s = LaurentPoly::sigma();
        let s2 = &s * &s;
        assert_eq!(s2, p("A^2+2A+3+2A^-1+A^-2"));
        assert_eq!(&s2 - &s, p("A^2+A+2+A^-1+A^-2"));
        assert_eq!(s.pow(0), LaurentPoly::one());
        assert_eq!(s.pow(2), s2);
    }
}
