//! Exact rational polynomials and the Chiellini / isochronicity algebra.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::PolyError;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Polynomial in `x` with exact rational coefficients; `coeffs[i]` multiplies `x^i`.
///
/// Always canonical: no trailing zero coefficient, so the zero polynomial has
/// an empty coefficient list and no degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn x() -> Self {
        Self::monomial(BigRational::one(), 1)
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn monomial(c: BigRational, degree: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); degree + 1];
        coeffs[degree] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Lowest power with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * int(i as i64))
                .collect(),
        )
    }

    /// Antiderivative vanishing at `x = 0`.
    pub fn integral(&self) -> Self {
        let mut coeffs = vec![BigRational::zero()];
        coeffs.extend(self.coeffs.iter().enumerate().map(|(i, a)| a / int(i as i64 + 1)));
        Self::from_coeffs(coeffs)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), PolyError> {
        let dd = divisor.degree().ok_or(PolyError::DivisionByZero)?;
        let lead = divisor.leading().expect("nonzero divisor");
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if nd < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![BigRational::zero(); nd - dd + 1];
        for i in (0..=nd - dd).rev() {
            let c = &rem[i + dd] / lead;
            if !c.is_zero() {
                for (j, b) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * b;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Horner evaluation in `f64` after rounding each coefficient.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Euclidean inner product of the coefficient vectors.
    pub fn coeff_dot(&self, other: &Self) -> BigRational {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
    }

    /// Parses with named constants, e.g. `k` bound to `1`.
    pub fn parse_with(s: &str, params: &HashMap<String, BigRational>) -> Result<Self, PolyError> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
            params,
        };
        let poly = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(poly)
    }
}

fn add_coeffs(a: &[BigRational], b: &[BigRational], sign: i64) -> Polynomial {
    let n = a.len().max(b.len());
    let s = int(sign);
    Polynomial::from_coeffs(
        (0..n)
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
                match b.get(i) {
                    Some(y) => x + y * &s,
                    None => x,
                }
            })
            .collect(),
    )
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        add_coeffs(&self.coeffs, &rhs.coeffs, 1)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        add_coeffs(&self.coeffs, &rhs.coeffs, -1)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::from_coeffs(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Ascending powers, e.g. `1/2 - 3*x + x^3`; the zero polynomial prints as `0`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.is_one();
            if i == 0 || !unit {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 if unit => f.write_str("x")?,
                1 => f.write_str("*x")?,
                _ if unit => write!(f, "x^{i}")?,
                _ => write!(f, "*x^{i}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_with(s, &HashMap::new())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Recursive descent over
/// `expr := term (('+'|'-') term)*`, `term := unary (('*'|'/') unary)*`,
/// `unary := '-' unary | power`, `power := atom ('^' integer)?`,
/// `atom := number | 'x' | identifier | '(' expr ')'`.
struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    params: &'a HashMap<String, BigRational>,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> PolyError {
        PolyError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let at = self.pos;
            let rhs = self.unary()?;
            if c == b'*' {
                acc = &acc * &rhs;
            } else {
                if !rhs.is_constant() || rhs.is_zero() {
                    return Err(PolyError::Parse {
                        pos: at,
                        msg: "divisor must be a nonzero constant".into(),
                    });
                }
                acc = acc.scale(&rhs.coeff(0).recip());
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial, PolyError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        if self.peek() == Some(b'+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            let e: u32 = digits.parse().ok().filter(|&e| e <= 64).ok_or(PolyError::Parse {
                pos: start,
                msg: "exponent must be an integer in 0..=64".into(),
            })?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if name == "x" {
                    return Ok(Polynomial::x());
                }
                match self.params.get(name) {
                    Some(v) => Ok(Polynomial::constant(v.clone())),
                    None => Err(PolyError::Parse {
                        pos: start,
                        msg: format!("unknown parameter {name:?}"),
                    }),
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    /// Integer or decimal literal, read exactly.
    fn number(&mut self) -> Result<Polynomial, PolyError> {
        let start = self.pos;
        let mut int_part = String::new();
        let mut frac_part = String::new();
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                if seen_dot { &mut frac_part } else { &mut int_part }.push(c as char);
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(PolyError::Parse {
                pos: start,
                msg: "malformed number".into(),
            });
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = digits.parse().map_err(|_| PolyError::Parse {
            pos: start,
            msg: "malformed number".into(),
        })?;
        let denom = num_traits::pow(BigInt::from(10), frac_part.len());
        Ok(Polynomial::constant(BigRational::new(numer, denom)))
    }
}

/// `g(x) = omega^2 x + I(x)^2 / x^3` with `I(x) = int_0^x t f(t) dt`.
///
/// `I` has valuation at least 2, so the division by `x^3` is exact.
pub fn isochronous_g(f: &Polynomial, omega_sq: &BigRational) -> Result<Polynomial, PolyError> {
    if !omega_sq.is_positive() {
        return Err(PolyError::InvalidArgument(format!(
            "omega^2 must be positive, got {omega_sq}"
        )));
    }
    let i = (&Polynomial::x() * f).integral();
    let (q, r) = (&i * &i).div_rem(&Polynomial::monomial(BigRational::one(), 3))?;
    if !r.is_zero() {
        return Err(PolyError::Internal(format!(
            "I(x)^2 not divisible by x^3 (remainder {r})"
        )));
    }
    Ok(&Polynomial::monomial(omega_sq.clone(), 1) + &q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChielliniReport {
    pub f: Polynomial,
    pub g: Polynomial,
    /// `g'f - gf' + L f^3` at the exact constant when compatible, at the
    /// least-squares constant otherwise.
    pub residual: Polynomial,
    /// Exact `L = ell(ell+1)` when `f^3` divides `g'f - gf'` with constant quotient.
    #[serde(with = "opt_rational")]
    pub chiellini_constant: Option<BigRational>,
    /// `L* = -<r, f^3> / <f^3, f^3>` over coefficient vectors.
    #[serde(with = "rational")]
    pub least_squares_constant: BigRational,
    pub compatible: bool,
}

/// Tests `g'f - gf' + L f^3 = 0` for a constant `L`.
pub fn chiellini_check(f: &Polynomial, g: &Polynomial) -> Result<ChielliniReport, PolyError> {
    if f.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let r = &(&g.derivative() * f) - &(g * &f.derivative());
    let f3 = f.pow(3);
    let least_squares_constant = -(r.coeff_dot(&f3) / f3.coeff_dot(&f3));
    let (q, rem) = r.div_rem(&f3)?;
    if rem.is_zero() && q.is_constant() {
        let l = -q.coeff(0);
        return Ok(ChielliniReport {
            f: f.clone(),
            g: g.clone(),
            residual: Polynomial::zero(),
            chiellini_constant: Some(l),
            least_squares_constant,
            compatible: true,
        });
    }
    let residual = &r + &f3.scale(&least_squares_constant);
    Ok(ChielliniReport {
        f: f.clone(),
        g: g.clone(),
        residual,
        chiellini_constant: None,
        least_squares_constant,
        compatible: false,
    })
}

/// Roots of `ell^2 + ell - L = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exponents {
    Rational {
        #[serde(with = "rational")]
        lo: BigRational,
        #[serde(with = "rational")]
        hi: BigRational,
    },
    Real {
        lo: f64,
        hi: f64,
    },
    Complex {
        re: f64,
        im: f64,
    },
}

pub fn chiellini_exponents(l: &BigRational) -> Exponents {
    let disc = int(1) + int(4) * l;
    let half = rat(-1, 2);
    if disc.is_negative() {
        let im = 0.5 * (-disc).to_f64().unwrap_or(f64::NAN).sqrt();
        return Exponents::Complex { re: -0.5, im };
    }
    if let Some(root) = rational_sqrt(&disc) {
        let d = root / int(2);
        return Exponents::Rational {
            lo: &half - &d,
            hi: &half + &d,
        };
    }
    let d = 0.5 * disc.to_f64().unwrap_or(f64::NAN).sqrt();
    Exponents::Real {
        lo: -0.5 - d,
        hi: -0.5 + d,
    }
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}

/// Coefficient obstruction for `f = kx + b` at `L = -2/9`:
/// the constant term of `g'f - gf' + L f^3` equals `b (b^2/36 + omega^2)`.
pub fn affine_obstruction(b: &BigRational, omega_sq: &BigRational) -> BigRational {
    b * (b * b / int(36) + omega_sq)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineCell {
    #[serde(with = "rational")]
    pub k: BigRational,
    #[serde(with = "rational")]
    pub b: BigRational,
    #[serde(with = "rational")]
    pub omega_sq: BigRational,
    pub compatible: bool,
    #[serde(with = "rational")]
    pub obstruction: BigRational,
    /// Constant term of `g'f - gf' - (2/9) f^3` equals `obstruction`.
    pub identity_holds: bool,
}

/// Every `kx + b` on the grid, checked directly and through the obstruction
/// identity. `k = 0` is skipped.
pub fn affine_scan(
    ks: &[BigRational],
    bs: &[BigRational],
    omega_sqs: &[BigRational],
) -> Result<Vec<AffineCell>, PolyError> {
    let mut out = Vec::new();
    for k in ks.iter().filter(|k| !k.is_zero()) {
        for b in bs {
            for w2 in omega_sqs {
                let f = Polynomial::from_coeffs(vec![b.clone(), k.clone()]);
                let g = isochronous_g(&f, w2)?;
                let report = chiellini_check(&f, &g)?;
                let r = &(&g.derivative() * &f) - &(&g * &f.derivative());
                let at_two_ninths = &r + &f.pow(3).scale(&rat(-2, 9));
                let obstruction = affine_obstruction(b, w2);
                // the three higher coefficients vanish identically at L = -2/9
                let identity_holds =
                    at_two_ninths.coeff(0) == obstruction && (1..=3).all(|i| at_two_ninths.coeff(i).is_zero());
                out.push(AffineCell {
                    k: k.clone(),
                    b: b.clone(),
                    omega_sq: w2.clone(),
                    compatible: report.compatible,
                    obstruction,
                    identity_holds,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub max_degree: usize,
    pub checked: usize,
    /// Compatible, non-constant `f`.
    pub compatible: Vec<Polynomial>,
    /// Constant `f`: `L < -1/4` gives complex `ell`, which is excluded.
    pub excluded_constant: Vec<Polynomial>,
    /// Every compatible `f` is a scalar multiple of `x`.
    pub only_multiples_of_x: bool,
}

pub const MAX_SCAN_DEGREE: usize = 6;

/// All nonzero polynomials of degree `<= max_degree` with coefficients drawn
/// from `samples`, checked against their own isochronous `g`.
pub fn uniqueness_scan(
    max_degree: usize,
    samples: &[BigRational],
    omega_sq: &BigRational,
) -> Result<UniquenessReport, PolyError> {
    if max_degree > MAX_SCAN_DEGREE {
        return Err(PolyError::InvalidArgument(format!(
            "max_degree {max_degree} exceeds {MAX_SCAN_DEGREE}"
        )));
    }
    let mut samples: Vec<BigRational> = samples.to_vec();
    samples.sort();
    samples.dedup();
    if samples.is_empty() {
        return Err(PolyError::InvalidArgument("empty coefficient sample set".into()));
    }
    let base = samples.len();
    let width = max_degree + 1;
    let total = base
        .checked_pow(width as u32)
        .filter(|&t| t <= 5_000_000)
        .ok_or_else(|| PolyError::InvalidArgument("scan too large".into()))?;

    let outcomes = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut coeffs = Vec::with_capacity(width);
            for _ in 0..width {
                coeffs.push(samples[idx % base].clone());
                idx /= base;
            }
            let f = Polynomial::from_coeffs(coeffs);
            if f.is_zero() {
                return Ok(None);
            }
            let g = isochronous_g(&f, omega_sq)?;
            let report = chiellini_check(&f, &g)?;
            Ok(report.compatible.then_some(f))
        })
        .collect::<Result<Vec<_>, PolyError>>()?;

    let mut compatible = Vec::new();
    let mut excluded_constant = Vec::new();
    let mut checked = 0;
    for o in &outcomes {
        checked += 1;
        if let Some(f) = o {
            if f.is_constant() {
                excluded_constant.push(f.clone());
            } else {
                compatible.push(f.clone());
            }
        }
    }
    // the zero polynomial is not a candidate
    checked -= 1;
    let only_multiples_of_x = compatible.iter().all(|f| f.degree() == Some(1) && f.coeff(0).is_zero());
    Ok(UniquenessReport {
        max_degree,
        checked,
        compatible,
        excluded_constant,
        only_multiples_of_x,
    })
}

mod rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(q)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod opt_rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.collect_str(q),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}
