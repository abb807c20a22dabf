//! Affine expressions with exact rational coefficients over named coordinates.
//!
//! Vertex values of symbolic piecewise-linear functions, cone inequalities and
//! feasibility constraints all use this one representation, written in text as
//! e.g. `c + 2*l_e1 - 3/2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AffineExpr {
    terms: BTreeMap<String, Rational>,
    constant: Rational,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: Rational) -> Self {
        Self { terms: BTreeMap::new(), constant: value }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Self::term(name, Rational::one())
    }

    pub fn term(name: impl Into<String>, coeff: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(name.into(), coeff);
        e
    }

    pub fn from_parts(
        terms: impl IntoIterator<Item = (String, Rational)>,
        constant: Rational,
    ) -> Self {
        let mut e = Self::constant(constant);
        for (name, coeff) in terms {
            e.add_term(name, coeff);
        }
        e
    }

    fn add_term(&mut self, name: String, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(name).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn constant_term(&self) -> &Rational {
        &self.constant
    }

    pub fn coeff(&self, name: &str) -> Rational {
        self.terms.get(name).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.terms.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.terms.keys().map(String::as_str).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    /// The linear part, i.e. the expression without its constant.
    pub fn linear_part(&self) -> AffineExpr {
        Self { terms: self.terms.clone(), constant: Rational::zero() }
    }

    pub fn scale(&self, k: &Rational) -> AffineExpr {
        if k.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(n, c)| (n.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// Evaluates at a point; `None` if some variable is unassigned.
    pub fn eval(&self, point: &BTreeMap<String, Rational>) -> Option<Rational> {
        let mut acc = self.constant.clone();
        for (name, coeff) in &self.terms {
            acc += coeff * point.get(name)?;
        }
        Some(acc)
    }

    /// Replaces `name` by `value` everywhere.
    pub fn substitute(&self, name: &str, value: &AffineExpr) -> AffineExpr {
        match self.terms.get(name) {
            None => self.clone(),
            Some(coeff) => {
                let mut rest = self.clone();
                rest.terms.remove(name);
                rest + value.scale(coeff)
            }
        }
    }

    pub fn substitute_all(&self, values: &BTreeMap<String, AffineExpr>) -> AffineExpr {
        let mut out = Self::constant(self.constant.clone());
        for (name, coeff) in &self.terms {
            match values.get(name) {
                Some(v) => out += v.scale(coeff),
                None => out.add_term(name.clone(), coeff.clone()),
            }
        }
        out
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> AffineExpr {
        let mut out = Self::constant(self.constant.clone());
        for (name, coeff) in &self.terms {
            let target = map.get(name).cloned().unwrap_or_else(|| name.clone());
            out.add_term(target, coeff.clone());
        }
        out
    }

    /// Scales by a positive factor so that all coefficients (constant
    /// included) are coprime integers.
    pub fn normalized(&self) -> AffineExpr {
        let values: Vec<&Rational> =
            self.terms.values().chain(std::iter::once(&self.constant)).collect();
        self.scale(&rational::primitive_scale(&values))
    }
}

impl From<Rational> for AffineExpr {
    fn from(q: Rational) -> Self {
        Self::constant(q)
    }
}

impl From<i64> for AffineExpr {
    fn from(v: i64) -> Self {
        Self::constant(rational::int(v))
    }
}

impl AddAssign for AffineExpr {
    fn add_assign(&mut self, rhs: AffineExpr) {
        self.constant += rhs.constant;
        for (name, coeff) in rhs.terms {
            self.add_term(name, coeff);
        }
    }
}

impl Add for AffineExpr {
    type Output = AffineExpr;
    fn add(mut self, rhs: AffineExpr) -> AffineExpr {
        self += rhs;
        self
    }
}

impl<'a> Add<&'a AffineExpr> for &'a AffineExpr {
    type Output = AffineExpr;
    fn add(self, rhs: &AffineExpr) -> AffineExpr {
        self.clone() + rhs.clone()
    }
}

impl Neg for AffineExpr {
    type Output = AffineExpr;
    fn neg(self) -> AffineExpr {
        self.scale(&-Rational::one())
    }
}

impl Sub for AffineExpr {
    type Output = AffineExpr;
    fn sub(self, rhs: AffineExpr) -> AffineExpr {
        self + (-rhs)
    }
}

impl<'a> Sub<&'a AffineExpr> for &'a AffineExpr {
    type Output = AffineExpr;
    fn sub(self, rhs: &AffineExpr) -> AffineExpr {
        self.clone() - rhs.clone()
    }
}

impl Mul<&Rational> for &AffineExpr {
    type Output = AffineExpr;
    fn mul(self, k: &Rational) -> AffineExpr {
        self.scale(k)
    }
}

impl fmt::Display for AffineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut emit = |f: &mut fmt::Formatter<'_>, neg: bool, body: String| -> fmt::Result {
            match (first, neg) {
                (true, false) => write!(f, "{body}")?,
                (true, true) => write!(f, "-{body}")?,
                (false, false) => write!(f, " + {body}")?,
                (false, true) => write!(f, " - {body}")?,
            }
            first = false;
            Ok(())
        };
        for (name, coeff) in &self.terms {
            let mag = coeff.abs();
            let body = if mag.is_one() {
                name.clone()
            } else {
                format!("{}*{}", rational::format(&mag), name)
            };
            emit(f, coeff.is_negative(), body)?;
        }
        if !self.constant.is_zero() || self.terms.is_empty() {
            emit(f, self.constant.is_negative(), rational::format(&self.constant.abs()))?;
        }
        Ok(())
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FromStr for AffineExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("affine expression `{s}`: {why}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty"));
        }
        // Split into signed terms; a sign directly after '/' or '*' belongs to a number.
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut current = String::new();
        let mut negative = false;
        let mut prev: Option<char> = None;
        for ch in compact.chars() {
            if (ch == '+' || ch == '-') && !matches!(prev, Some('/') | Some('*')) {
                if !current.is_empty() {
                    pieces.push((negative, std::mem::take(&mut current)));
                    negative = false;
                }
                if ch == '-' {
                    negative = !negative;
                }
            } else {
                current.push(ch);
            }
            prev = Some(ch);
        }
        if current.is_empty() {
            return Err(bad("trailing sign"));
        }
        pieces.push((negative, current));

        let mut out = AffineExpr::zero();
        for (neg, piece) in pieces {
            let sign = if neg { -Rational::one() } else { Rational::one() };
            if let Some((coeff, name)) = piece.rsplit_once('*') {
                if !is_ident(name) {
                    return Err(bad("bad coordinate name"));
                }
                let coeff = rational::parse(coeff).map_err(|_| bad("bad coefficient"))?;
                out.add_term(name.to_string(), coeff * sign);
            } else if is_ident(&piece) {
                out.add_term(piece, sign);
            } else {
                let q = rational::parse(&piece).map_err(|_| bad("bad constant"))?;
                out.constant += q * sign;
            }
        }
        Ok(out)
    }
}

impl Serialize for AffineExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AffineExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
