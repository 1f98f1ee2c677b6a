//! Text format for equations, series and scalars.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/')? factor)*
//! factor  := ('+' | '-') factor | primary ('^' power)?
//! power   := int | '-' int | '(' ['-'] int ['/' int] ')'
//! primary := number | 'x' | 'y' | 'y1' | 'i' | 'sqrt(' ['-'] int ')' | '(' expr ')'
//! ```
//!
//! Numbers are integers or decimals (read exactly).  Division is only by
//! nonzero constants, fractional and negative powers only of a bare `x` or
//! of constants.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::equation::{CoveredEquation, EquationError, OperatorSpec, Terms};
use crate::scalar::Scalar;
use crate::series::PuiseuxPoly;
use crate::Exponent;

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    /// Byte offset into the input.
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at position {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, msg: msg.into() })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && i + 1 < b.len() && b[i + 1].is_ascii_digit()) {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &s[start..i];
            let mut frac = "";
            if i < b.len() && b[i] == b'.' {
                i += 1;
                let fs = i;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                frac = &s[fs..i];
            }
            let mut exp10: i64 = 0;
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut k = i + 1;
                if k < b.len() && (b[k] == b'-' || b[k] == b'+') {
                    k += 1;
                }
                let ds = k;
                while k < b.len() && b[k].is_ascii_digit() {
                    k += 1;
                }
                if k > ds {
                    exp10 = s[i + 1..k].parse().map_err(|_| ParseError { pos: i, msg: "bad exponent".into() })?;
                    i = k;
                }
            }
            let digits = format!("{int_part}{frac}");
            let digits = if digits.is_empty() { "0".to_string() } else { digits };
            let mant: BigInt = digits.parse().unwrap();
            let scale = exp10 - frac.len() as i64;
            let ten = BigInt::from(10);
            let v = if scale >= 0 {
                BigRational::from_integer(mant * num_traits::pow(ten, scale as usize))
            } else {
                BigRational::new(mant, num_traits::pow(ten, (-scale) as usize))
            };
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(s[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return err(i, format!("unexpected character '{c}'"));
        }
    }
    Ok(out)
}

/// (x-exponent, y-degree, y1-degree) ↦ coefficient.
type Expr<S> = BTreeMap<(Exponent, u32, u32), S>;

fn constant<S: Scalar>(c: S) -> Expr<S> {
    let mut m = BTreeMap::new();
    if !c.is_zero() {
        m.insert((Exponent::zero(), 0, 0), c);
    }
    m
}

fn as_constant<S: Scalar>(e: &Expr<S>) -> Option<S> {
    match e.len() {
        0 => Some(S::zero()),
        1 => e.get(&(Exponent::zero(), 0, 0)).cloned(),
        _ => None,
    }
}

fn add_expr<S: Scalar>(a: &Expr<S>, b: &Expr<S>, sign: bool) -> Expr<S> {
    let mut out = a.clone();
    for (k, v) in b {
        let v = if sign { v.clone() } else { -v.clone() };
        let slot = out.entry(*k).or_insert_with(S::zero);
        *slot = slot.clone() + v;
        if slot.is_zero() {
            out.remove(k);
        }
    }
    out
}

fn mul_expr<S: Scalar>(a: &Expr<S>, b: &Expr<S>, pos: usize) -> Result<Expr<S>, ParseError> {
    let mut out: Expr<S> = BTreeMap::new();
    for (&(e1, j1, k1), v1) in a {
        for (&(e2, j2, k2), v2) in b {
            if k1 + k2 > 1 {
                return err(pos, "y1 appears with degree >= 2; only first-degree equations are supported");
            }
            let key = (e1 + e2, j1 + j2, k1 + k2);
            let slot = out.entry(key).or_insert_with(S::zero);
            *slot = slot.clone() + v1.clone() * v2;
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    at: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.0).unwrap_or(self.len)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            err(self.pos(), format!("expected '{c}'"))
        }
    }

    fn int(&mut self) -> Result<BigInt, ParseError> {
        let neg = self.eat_sym('-');
        match self.peek().cloned() {
            Some(Tok::Num(v)) if v.is_integer() => {
                self.at += 1;
                let n = v.to_integer();
                Ok(if neg { -n } else { n })
            }
            _ => err(self.pos(), "expected an integer"),
        }
    }

    fn expr<S: Scalar>(&mut self) -> Result<Expr<S>, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat_sym('+') {
                acc = add_expr(&acc, &self.term()?, true);
            } else if self.eat_sym('-') {
                acc = add_expr(&acc, &self.term()?, false);
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Sym('(')))
    }

    fn term<S: Scalar>(&mut self) -> Result<Expr<S>, ParseError> {
        let mut acc = self.factor()?;
        loop {
            let pos = self.pos();
            if self.eat_sym('*') || self.starts_factor() {
                let rhs = self.factor()?;
                acc = mul_expr(&acc, &rhs, pos)?;
            } else if self.eat_sym('/') {
                let rpos = self.pos();
                let rhs = self.factor::<S>()?;
                match as_constant(&rhs) {
                    Some(c) if !c.is_zero() => {
                        let inv = c.inv();
                        acc = acc.into_iter().map(|(k, v)| (k, v * &inv)).collect();
                    }
                    Some(_) => return err(rpos, "division by zero"),
                    None => return err(rpos, "division is only by nonzero constants"),
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor<S: Scalar>(&mut self) -> Result<Expr<S>, ParseError> {
        if self.eat_sym('-') {
            let f = self.factor::<S>()?;
            return Ok(f.into_iter().map(|(k, v)| (k, -v)).collect());
        }
        if self.eat_sym('+') {
            return self.factor();
        }
        let base_pos = self.pos();
        let base = self.primary::<S>()?;
        if !self.eat_sym('^') {
            return Ok(base);
        }
        let ppos = self.pos();
        let power = if self.eat_sym('(') {
            let p = self.int()?;
            let q = if self.eat_sym('/') { self.int()? } else { BigInt::one() };
            self.expect_sym(')')?;
            if q.is_zero() {
                return err(ppos, "zero denominator in exponent");
            }
            BigRational::new(p, q)
        } else {
            BigRational::from_integer(self.int()?)
        };
        let to_i64 = |v: &BigInt| -> Result<i64, ParseError> {
            i64::try_from(v).map_err(|_| ParseError { pos: ppos, msg: "exponent too large".into() })
        };
        if power.is_integer() && !power.is_negative() {
            let k = to_i64(&power.to_integer())?;
            if k > 4096 {
                return err(ppos, "exponent too large");
            }
            let mut acc = constant(S::one());
            for _ in 0..k {
                acc = mul_expr(&acc, &base, base_pos)?;
            }
            return Ok(acc);
        }
        if let Some(c) = as_constant(&base) {
            if !power.is_integer() {
                return err(ppos, "fractional powers of constants are not supported; use sqrt(n)");
            }
            if c.is_zero() {
                return err(ppos, "negative power of zero");
            }
            return Ok(constant(c.powi(to_i64(&power.to_integer())?)));
        }
        if base.len() == 1 {
            let (&(e, j, k), c) = base.iter().next().unwrap();
            if j == 0 && k == 0 && c.is_one() {
                let p = Exponent::new(to_i64(power.numer())?, to_i64(power.denom())?);
                let mut m = BTreeMap::new();
                m.insert((e * p, 0, 0), S::one());
                return Ok(m);
            }
        }
        err(ppos, "fractional or negative powers are only allowed for x and constants")
    }

    fn primary<S: Scalar>(&mut self) -> Result<Expr<S>, ParseError> {
        let pos = self.pos();
        let tok = match self.peek().cloned() {
            Some(t) => t,
            None => return err(pos, "unexpected end of input"),
        };
        self.at += 1;
        let mono = |e: Exponent, j: u32, k: u32| {
            let mut m = BTreeMap::new();
            m.insert((e, j, k), S::one());
            m
        };
        match tok {
            Tok::Num(v) => Ok(constant(S::from_rational(&v))),
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(mono(Exponent::one(), 0, 0)),
                "y" => Ok(mono(Exponent::zero(), 1, 0)),
                "y1" => Ok(mono(Exponent::zero(), 0, 1)),
                "i" | "I" => S::imaginary_unit()
                    .map(constant)
                    .map_err(|e| ParseError { pos, msg: e.to_string() }),
                "sqrt" => {
                    self.expect_sym('(')?;
                    let n = self.int()?;
                    self.expect_sym(')')?;
                    S::sqrt_int(&n).map(constant).map_err(|e| ParseError { pos, msg: e.to_string() })
                }
                other => err(pos, format!("unknown identifier '{other}'")),
            },
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Sym(c) => err(pos, format!("unexpected '{c}'")),
        }
    }
}

fn parse_expr<S: Scalar>(text: &str) -> Result<Expr<S>, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return err(0, "empty input");
    }
    let mut p = Parser { toks: &toks, at: 0, len: text.len() };
    let e = p.expr()?;
    if p.at < toks.len() {
        return err(p.pos(), "unexpected trailing input");
    }
    Ok(e)
}

/// Reads `A + B*y1` with the given operator.
pub fn parse_equation<S: Scalar>(text: &str, op: OperatorSpec<S>) -> Result<CoveredEquation<S>, ParseError> {
    let e = parse_expr::<S>(text)?;
    let mut a: Terms<S> = BTreeMap::new();
    let mut b: Terms<S> = BTreeMap::new();
    for ((x, j, k), c) in e {
        if k == 0 { a.insert((x, j), c) } else { b.insert((x, j), c) };
    }
    CoveredEquation::from_raw(op, a, b).map_err(|e| {
        let msg = match e {
            EquationError::NegativeExponent(t) => format!("negative x-exponent in {t}"),
            other => other.to_string(),
        };
        ParseError { pos: 0, msg }
    })
}

/// Reads a finite Puiseux series in x.
pub fn parse_series<S: Scalar>(text: &str) -> Result<PuiseuxPoly<S>, ParseError> {
    let e = parse_expr::<S>(text)?;
    let mut terms = Vec::new();
    for ((x, j, k), c) in e {
        if j != 0 || k != 0 {
            return err(0, "a series may only contain x");
        }
        terms.push((x, c));
    }
    Ok(PuiseuxPoly::from_terms(terms))
}

/// Reads a constant such as `-(3/2)`, `sqrt(-2)` or `(0.5 + 0.25*i)`.
pub fn parse_scalar<S: Scalar>(text: &str) -> Result<S, ParseError> {
    let e = parse_expr::<S>(text)?;
    as_constant(&e).ok_or(ParseError { pos: 0, msg: "expected a constant".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ex, Numeric, Quadratic, Rational};

    #[test]
    fn example_equation_support() {
        let p: CoveredEquation<Rational> = parse_equation(
            "y^4 + x^3*y^3 + x*y^2 - x^3*y + x^5 + (x*y^3 - x^2*y)*y1",
            OperatorSpec::differential(),
        )
        .unwrap();
        let keys: Vec<_> = p.b().keys().cloned().collect();
        assert_eq!(keys, vec![(ex(0, 1), 4), (ex(1, 1), 2)]);
        assert_eq!(p.a().len(), 5);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_equation::<Rational>("y + x*y1^2", OperatorSpec::differential()).unwrap_err();
        assert!(e.msg.contains("degree"));
        let e = parse_equation::<Rational>("y + x*$", OperatorSpec::differential()).unwrap_err();
        assert_eq!(e.pos, 6);
        let e = parse_equation::<Rational>("y + (x", OperatorSpec::differential()).unwrap_err();
        assert_eq!(e.pos, 6);
        assert!(parse_equation::<Rational>("y/x", OperatorSpec::differential()).is_err());
    }

    #[test]
    fn series_and_scalars() {
        let s: PuiseuxPoly<Quadratic> = parse_series("- x - sqrt(11)*x^(3/2) - (121/30)*x^2").unwrap();
        assert_eq!(s.ram(), 2);
        assert_eq!(s.coeff(ex(2, 1)), Quadratic::rational(Rational::new((-121).into(), 30.into())));
        assert_eq!(parse_scalar::<Rational>("0.25").unwrap(), Rational::new(1.into(), 4.into()));
        assert_eq!(parse_scalar::<Rational>("2^-2").unwrap(), Rational::new(1.into(), 4.into()));
        assert!(parse_scalar::<Rational>("sqrt(2)").is_err());
        let z: Numeric = parse_scalar("(3 + 1/4*i)").unwrap();
        assert!((z.to_complex64().im - 0.25).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let texts = [
            "y^4 + x^3*y^3 + x*y^2 - x^3*y + x^5 + (x*y^3 - x^2*y)*y1",
            "-(1/2)*x^(3/2)*y + 3*y^2 - x*y1",
            "x^2 + y1",
        ];
        for t in texts {
            let p: CoveredEquation<Rational> = parse_equation(t, OperatorSpec::differential()).unwrap();
            let q = parse_equation(&p.render(), OperatorSpec::differential()).unwrap();
            assert_eq!(p, q, "{t} -> {}", p.render());
        }
        let p: CoveredEquation<Quadratic> =
            parse_equation("((1/2) - (3/2)*sqrt(11))*x*y + x^2*y1", OperatorSpec::differential()).unwrap();
        assert_eq!(parse_equation(&p.render(), OperatorSpec::differential()).unwrap(), p);
    }
}
