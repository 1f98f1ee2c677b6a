use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use puiseux::parser::parse_scalar;
use puiseux::{Exponent, OperatorSpec, Scalar};

/// Failure of a run: bad input or flags (exit 2) or a failed computation
/// (exit 1).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

pub fn usage(m: impl fmt::Display) -> CliError {
    CliError::Usage(m.to_string())
}

pub fn compute(m: impl fmt::Display) -> CliError {
    CliError::Compute(m.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Backend {
    /// Exact over ℚ and any one quadratic field.
    Auto,
    Rational,
    Quadratic { d: i64 },
    Numeric,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Backend::Auto),
            "rational" => Ok(Backend::Rational),
            "numeric" => Ok(Backend::Numeric),
            _ => match s.strip_prefix("quadratic:") {
                Some(d) => {
                    let d: i64 = d.parse().map_err(|_| format!("bad radicand in '{s}'"))?;
                    if d == 0 || d == 1 {
                        return Err(format!("quadratic:{d} is not a quadratic field"));
                    }
                    Ok(Backend::Quadratic { d })
                }
                None => Err(format!("unknown backend '{s}' (auto, rational, quadratic:d, numeric)")),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Diff,
    Q,
}

/// Everything a run depends on; printed to stderr so a run can be replayed.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub op: OpKind,
    pub q: Option<String>,
    pub q_root: Option<String>,
    pub backend: Backend,
    pub precision: u32,
    pub format: Option<String>,
    pub seed: Option<u64>,
}

/// `N:VALUE`: VALUE is the N-th root of q used for every q^(k/N).
pub fn parse_q_root<S: Scalar>(text: &str) -> Result<(u32, S), CliError> {
    let (n, v) = text.split_once(':').ok_or_else(|| usage(format!("--q-root '{text}' is not of the form N:VALUE")))?;
    let n: u32 = n.trim().parse().map_err(|_| usage(format!("bad root index in --q-root '{text}'")))?;
    if n == 0 {
        return Err(usage("--q-root index must be positive"));
    }
    let v = parse_scalar::<S>(v).map_err(|e| usage(format!("--q-root: {e}")))?;
    Ok((n, v))
}

pub fn operator<S: Scalar>(op: OpKind, q: Option<&str>, q_root: Option<&str>) -> Result<OperatorSpec<S>, CliError> {
    match op {
        OpKind::Diff => {
            if q.is_some() || q_root.is_some() {
                return Err(usage("--q and --q-root need --op q"));
            }
            Ok(OperatorSpec::differential())
        }
        OpKind::Q => {
            let q = q.ok_or_else(|| usage("--op q needs --q"))?;
            let q = parse_scalar::<S>(q).map_err(|e| usage(format!("--q: {e}")))?;
            let mut spec = OperatorSpec::q_difference(q).map_err(usage)?;
            if let Some(r) = q_root {
                let (n, v) = parse_q_root::<S>(r)?;
                spec = spec.with_root(n, v).map_err(usage)?;
            }
            Ok(spec)
        }
    }
}

/// `a`, `-a` or `a/b`.
pub fn parse_exponent(text: &str) -> Result<Exponent, String> {
    let t = text.trim();
    let (a, b) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let a: i64 = a.parse().map_err(|_| format!("bad exponent '{text}'"))?;
    let b: i64 = b.parse().map_err(|_| format!("bad exponent '{text}'"))?;
    if b <= 0 {
        return Err(format!("bad exponent '{text}'"));
    }
    Ok(Exponent::new(a, b))
}

pub fn parse_positive_exponent(text: &str) -> Result<Exponent, String> {
    let e = parse_exponent(text)?;
    if e <= Exponent::from_integer(0) {
        return Err(format!("exponent '{text}' must be positive"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use puiseux::Rational;

    #[test]
    fn backends() {
        assert_eq!("auto".parse::<Backend>(), Ok(Backend::Auto));
        assert_eq!("rational".parse::<Backend>(), Ok(Backend::Rational));
        assert_eq!("quadratic:11".parse::<Backend>(), Ok(Backend::Quadratic { d: 11 }));
        assert_eq!("quadratic:-1".parse::<Backend>(), Ok(Backend::Quadratic { d: -1 }));
        assert!("quadratic:1".parse::<Backend>().is_err());
        assert!("float".parse::<Backend>().is_err());
    }

    #[test]
    fn exponents() {
        assert_eq!(parse_exponent("1/2"), Ok(Exponent::new(1, 2)));
        assert_eq!(parse_exponent(" 4/2 "), Ok(Exponent::new(2, 1)));
        assert!(parse_exponent("1/0").is_err());
        assert!(parse_positive_exponent("0").is_err());
    }

    #[test]
    fn operators() {
        let op = operator::<Rational>(OpKind::Q, Some("4"), Some("2:-2")).unwrap();
        assert_eq!(op.fixed_root().unwrap().0, 2);
        assert!(matches!(operator::<Rational>(OpKind::Q, None, None), Err(CliError::Usage(_))));
        assert!(matches!(operator::<Rational>(OpKind::Q, Some("1"), None), Err(CliError::Usage(_))));
        assert!(matches!(operator::<Rational>(OpKind::Q, Some("4"), Some("2:3")), Err(CliError::Usage(_))));
        assert!(matches!(operator::<Rational>(OpKind::Diff, Some("2"), None), Err(CliError::Usage(_))));
    }
}
