//! Newton–Puiseux machinery for first-order, first-degree differential and
//! q-difference equations.
//!
//! Everything is generic over a coefficient field implementing [`Scalar`];
//! the concrete backends are exported as type aliases below.  Exponents are
//! exact rationals ([`Exponent`]).

pub mod analysis;
pub mod bounds;
pub mod corpus;
pub mod equation;
pub mod parser;
pub mod polygon;
pub mod poly;
pub mod render;
pub mod roots;
pub mod scalar;
pub mod series;
pub mod solver;

pub use analysis::{Residue, StepRecord};
pub use equation::{CoveredEquation, OperatorKind, OperatorSpec};
pub use polygon::{NewtonPolygon, SupportElement};
pub use poly::Poly;
pub use roots::RootSet;
pub use scalar::{BigComplex, Quadratic, Ring, Scalar, ScalarError};
pub use series::{CharacteristicData, PuiseuxPoly};

/// Exact rational coefficients.
pub type Rational = num_rational::BigRational;

/// Complex coefficients at 128, 256, 512 and 1024 bits of precision.
pub type Complex128 = BigComplex<128>;
pub type Complex256 = BigComplex<256>;
pub type Complex512 = BigComplex<512>;
pub type Complex1024 = BigComplex<1024>;

/// Default numeric backend (256 bits, ε = 2^−128).
pub type Numeric = Complex256;

/// Rational exponent, always stored reduced.
pub type Exponent = num_rational::Ratio<i64>;

/// Builds the exponent a/b.
pub fn ex(a: i64, b: i64) -> Exponent {
    Exponent::new(a, b)
}
