//! Univariate polynomials in `m` with rational coefficients, and their
//! factorizations into integer linear factors.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{format_rational, rat, Rational};

/// Coefficients in ascending degree order, with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UnivariatePolynomial {
    coeffs: Vec<Rational>,
}

impl UnivariatePolynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[BigInt]) -> Self {
        Self::new(coeffs.iter().cloned().map(Rational::from_integer).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `m - root`.
    pub fn linear(root: &Rational) -> Self {
        Self::new(vec![-root.clone(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Quotient and remainder by `m - r` (synthetic division).
    pub fn deflate(&self, r: &Rational) -> (Self, Rational) {
        if self.coeffs.is_empty() {
            return (Self::zero(), Rational::zero());
        }
        let n = self.coeffs.len();
        let mut q = vec![Rational::zero(); n - 1];
        let mut acc = Rational::zero();
        for i in (0..n).rev() {
            acc = acc * r + &self.coeffs[i];
            if i > 0 {
                q[i - 1] = acc.clone();
            }
        }
        (Self::new(q), acc)
    }

    /// Exact division; panics when the division is not exact.
    pub fn div_exact(&self, d: &Self) -> Self {
        let (q, r) = self.div_rem(d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.coeffs.len() - 1;
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / &lead;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    r[k + i] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    /// Coefficients as integers, when they all are.
    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    /// Splits a monic integer polynomial into integer linear factors.
    ///
    /// Candidate roots are bounded with Fujiwara's bound; each candidate is
    /// screened modulo a large prime before an exact evaluation.
    pub fn integer_roots(&self) -> Result<FactoredDiscriminant> {
        let Some(int_coeffs) = self.integer_coeffs() else {
            return Err(Error::NonIntegerRoot(self.degree().unwrap_or(0)));
        };
        if !self.is_monic() {
            return Err(Error::NonIntegerRoot(self.degree().unwrap_or(0)));
        }
        let bound = fujiwara_bound(&int_coeffs);
        let mut rest = self.clone();
        let mut factors = Vec::new();
        const SCREEN: i128 = 2_305_843_009_213_693_951; // 2^61 - 1
        let residues = |p: &UnivariatePolynomial| -> Vec<i128> {
            p.integer_coeffs()
                .expect("integer deflation")
                .iter()
                .map(|c| {
                    (c % BigInt::from(SCREEN))
                        .to_i128()
                        .unwrap()
                        .rem_euclid(SCREEN)
                })
                .collect()
        };
        let mut rc = residues(&rest);
        let mut r = -bound;
        while r <= bound && rest.degree().unwrap_or(0) > 0 {
            let x = (r as i128).rem_euclid(SCREEN);
            let screen_ok = rc
                .iter()
                .rev()
                .fold(0i128, |acc, &c| (mulmod(acc, x, SCREEN) + c) % SCREEN)
                == 0;
            if screen_ok {
                let root = rat(r);
                let mut mult = 0;
                loop {
                    let (q, rem) = rest.deflate(&root);
                    if !rem.is_zero() {
                        break;
                    }
                    rest = q;
                    mult += 1;
                }
                if mult > 0 {
                    rc = residues(&rest);
                    factors.push(LinearFactor {
                        root: BigInt::from(r),
                        multiplicity: mult,
                    });
                }
            }
            r += 1;
        }
        match rest.degree() {
            Some(0) => {}
            d => return Err(Error::NonIntegerRoot(d.unwrap_or(0))),
        }
        factors.sort_by(|a, b| b.root.cmp(&a.root));
        Ok(FactoredDiscriminant { factors })
    }
}

fn mulmod(a: i128, b: i128, m: i128) -> i128 {
    // a, b < 2^61 so the product fits in i128.
    (a * b) % m
}

/// `2 * max_k |c_{n-k}|^{1/k}` for a monic polynomial of degree `n`.
fn fujiwara_bound(coeffs: &[BigInt]) -> i64 {
    let n = coeffs.len() - 1;
    let mut best = BigInt::zero();
    for k in 1..=n {
        let c = coeffs[n - k].abs();
        if c.is_zero() {
            continue;
        }
        // ceil(c^{1/k})
        let mut r = c.nth_root(k as u32);
        if num_traits::pow(r.clone(), k) < c {
            r += 1;
        }
        if r > best {
            best = r;
        }
    }
    (best * 2u32).to_i64().expect("root bound fits in i64")
}

impl std::ops::Add for &UnivariatePolynomial {
    type Output = UnivariatePolynomial;
    fn add(self, rhs: Self) -> UnivariatePolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let z = Rational::zero();
        UnivariatePolynomial::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + rhs.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }
}

impl std::ops::Sub for &UnivariatePolynomial {
    type Output = UnivariatePolynomial;
    fn sub(self, rhs: Self) -> UnivariatePolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let z = Rational::zero();
        UnivariatePolynomial::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) - rhs.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }
}

impl std::ops::Mul for &UnivariatePolynomial {
    type Output = UnivariatePolynomial;
    fn mul(self, rhs: Self) -> UnivariatePolynomial {
        if self.is_zero() || rhs.is_zero() {
            return UnivariatePolynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UnivariatePolynomial::new(out)
    }
}

impl fmt::Display for UnivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = !a.is_one() || i == 0;
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "m")?,
                _ => write!(f, "m^{i}")?,
            }
        }
        Ok(())
    }
}

/// One factor `(m - root)^multiplicity`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct LinearFactor {
    #[serde(with = "bigint_string")]
    pub root: BigInt,
    pub multiplicity: usize,
}

/// A monic polynomial written as a product of integer linear factors,
/// roots in decreasing order.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FactoredDiscriminant {
    pub factors: Vec<LinearFactor>,
}

impl FactoredDiscriminant {
    pub fn degree(&self) -> usize {
        self.factors.iter().map(|f| f.multiplicity).sum()
    }

    pub fn expand(&self) -> UnivariatePolynomial {
        self.factors
            .iter()
            .fold(UnivariatePolynomial::one(), |acc, f| {
                &acc * &UnivariatePolynomial::linear(&Rational::from_integer(f.root.clone()))
                    .pow(f.multiplicity)
            })
    }

    pub fn multiplicity_of(&self, root: i64) -> usize {
        self.factors
            .iter()
            .find(|f| f.root == BigInt::from(root))
            .map_or(0, |f| f.multiplicity)
    }

    pub fn largest_root(&self) -> Option<BigInt> {
        self.factors.iter().map(|f| f.root.clone()).max()
    }

    /// Builds a factorization from `(root, multiplicity)` pairs, merging
    /// repeated roots and dropping zero multiplicities.
    pub fn from_pairs(pairs: &[(i64, usize)]) -> Self {
        let mut merged: std::collections::BTreeMap<i64, usize> = Default::default();
        for &(r, e) in pairs {
            if e > 0 {
                *merged.entry(r).or_default() += e;
            }
        }
        let factors = merged
            .into_iter()
            .rev()
            .map(|(r, e)| LinearFactor {
                root: BigInt::from(r),
                multiplicity: e,
            })
            .collect();
        Self { factors }
    }

    /// Parses products such as `(m-21)(m-3)^20(m+3)^15`, `m^2(m-3)`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("{msg} in factored polynomial {s:?}"));
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut i = 0;
        let mut pairs = Vec::new();
        let read_int = |i: &mut usize| -> Option<i64> {
            let start = *i;
            while *i < chars.len() && chars[*i].is_ascii_digit() {
                *i += 1;
            }
            (start < *i).then(|| chars[start..*i].iter().collect::<String>().parse().ok())?
        };
        while i < chars.len() {
            if chars[i] == '*' {
                i += 1;
                continue;
            }
            let root = if chars[i] == '(' {
                i += 1;
                if chars.get(i) != Some(&'m') {
                    return Err(bad("expected 'm'"));
                }
                i += 1;
                let root = match chars.get(i) {
                    Some(')') => 0,
                    Some(&sign @ ('+' | '-')) => {
                        i += 1;
                        let k = read_int(&mut i).ok_or_else(|| bad("expected integer"))?;
                        if sign == '-' {
                            k
                        } else {
                            -k
                        }
                    }
                    _ => return Err(bad("expected '+', '-' or ')'")),
                };
                if chars.get(i) != Some(&')') {
                    return Err(bad("expected ')'"));
                }
                i += 1;
                root
            } else if chars[i] == 'm' {
                i += 1;
                0
            } else {
                return Err(bad("unexpected character"));
            };
            let mut e = 1usize;
            if chars.get(i) == Some(&'^') {
                i += 1;
                e = read_int(&mut i).ok_or_else(|| bad("expected exponent"))? as usize;
            }
            pairs.push((root, e));
        }
        if pairs.is_empty() {
            return Err(bad("empty product"));
        }
        Ok(Self::from_pairs(&pairs))
    }
}

impl fmt::Display for FactoredDiscriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for fac in &self.factors {
            if fac.root.is_zero() {
                write!(f, "m")?;
            } else if fac.root.is_positive() {
                write!(f, "(m-{})", fac.root)?;
            } else {
                write!(f, "(m+{})", -&fac.root)?;
            }
            if fac.multiplicity > 1 {
                write!(f, "^{}", fac.multiplicity)?;
            }
        }
        Ok(())
    }
}

/// Expanded coefficients as `"num/den"` strings, ascending degree.
pub fn coefficient_strings(p: &UnivariatePolynomial) -> Vec<String> {
    p.coeffs().iter().map(format_rational).collect()
}

/// Rational function `num / den` evaluated exactly; `None` at a pole.
pub fn eval_ratio(
    num: &UnivariatePolynomial,
    den: &UnivariatePolynomial,
    x: &BigRational,
) -> Option<BigRational> {
    let d = den.eval(x);
    (!d.is_zero()).then(|| num.eval(x) / d)
}

mod bigint_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let f = FactoredDiscriminant::parse("(m-21)(m-3)^20(m+3)^15").unwrap();
        assert_eq!(f.degree(), 36);
        assert_eq!(f.to_string(), "(m-21)(m-3)^20(m+3)^15");
        let g = FactoredDiscriminant::parse("m^2 (m-3)").unwrap();
        assert_eq!(g.to_string(), "(m-3)m^2");
        assert!(FactoredDiscriminant::parse("(x-1)").is_err());
        assert!(FactoredDiscriminant::parse("").is_err());
    }

    #[test]
    fn parse_merges_repeated_roots() {
        let f = FactoredDiscriminant::parse("(m-9)(m-1)^6(m+3)^2(m-1)^3").unwrap();
        assert_eq!(f.multiplicity_of(1), 9);
        assert_eq!(f.degree(), 12);
    }

    #[test]
    fn integer_roots_of_expanded_product() {
        let f = FactoredDiscriminant::from_pairs(&[(7, 1), (2, 4), (-1, 5)]);
        let p = f.expand();
        assert_eq!(p.degree(), Some(10));
        assert!(p.is_monic());
        assert_eq!(p.integer_roots().unwrap(), f);
    }

    #[test]
    fn irreducible_quadratic_is_rejected() {
        let p = UnivariatePolynomial::new(vec![rat(-2), rat(0), rat(1)]);
        assert_eq!(p.integer_roots(), Err(Error::NonIntegerRoot(2)));
    }

    #[test]
    fn division() {
        let a = FactoredDiscriminant::from_pairs(&[(3, 2), (0, 1)]).expand();
        let b = UnivariatePolynomial::linear(&rat(3));
        let q = a.div_exact(&b);
        assert_eq!(
            q,
            FactoredDiscriminant::from_pairs(&[(3, 1), (0, 1)]).expand()
        );
        assert_eq!(a.to_string(), "m^3 - 6m^2 + 9m");
    }
}
