//! Commutative semirings, matrices over them, interpretations, term evaluation and
//! arithmetic circuits.

mod circuit;
mod eval;
mod generators;
mod interpretation;
mod matrix;
mod value;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use circuit::{ArithmeticCircuit, CircuitJson, CircuitNode, CircuitNodeJson, NodeRef};
pub use eval::{interpret_term, EvalOptions, DEFAULT_DIM_CAP, DEFAULT_MAX_ENTRIES};
pub use generators::{generator_matrix, GeneratorKind};
pub(crate) use interpretation::parse_rational_literal;
pub use interpretation::{
    boolean, parse_flip_probability, random_interpretation, substochastic, Interpretation,
};
pub use matrix::Matrix;

/// A commutative semiring with a textual encoding used by circuit JSON.
pub trait Semiring: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    /// Short tag identifying the carrier in serialized circuits.
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn encode(&self) -> String;
    fn decode(s: &str) -> Result<Self>;

    /// A random element, biased towards small values so products stay readable.
    fn sample<G: Rng + ?Sized>(rng: &mut G) -> Self;
}

pub type Rational = BigRational;

impl Semiring for BigRational {
    const NAME: &'static str = "rational";

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_one(&self) -> bool {
        One::is_one(self)
    }

    fn encode(&self) -> String {
        self.to_string()
    }

    fn decode(s: &str) -> Result<Self> {
        BigRational::from_str(s.trim())
            .map_err(|_| Error::InvalidInput(format!("`{s}` is not a rational number")))
    }

    fn sample<G: Rng + ?Sized>(rng: &mut G) -> Self {
        let den: i64 = rng.gen_range(1..=6);
        let num: i64 = rng.gen_range(0..=den);
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

impl Semiring for bool {
    const NAME: &'static str = "bool";

    fn zero() -> Self {
        false
    }

    fn one() -> Self {
        true
    }

    fn add(&self, other: &Self) -> Self {
        *self || *other
    }

    fn mul(&self, other: &Self) -> Self {
        *self && *other
    }

    fn encode(&self) -> String {
        if *self { "1" } else { "0" }.to_string()
    }

    fn decode(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            other => Err(Error::InvalidInput(format!("`{other}` is not a Boolean"))),
        }
    }

    fn sample<G: Rng + ?Sized>(rng: &mut G) -> Self {
        rng.gen_bool(0.5)
    }
}

/// The min-plus semiring over the naturals extended with infinity.
///
/// Addition is `min` (zero = ∞), multiplication is `+` (one = 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tropical {
    Finite(u64),
    Infinity,
}

impl Tropical {
    pub fn finite(self) -> Option<u64> {
        match self {
            Tropical::Finite(v) => Some(v),
            Tropical::Infinity => None,
        }
    }
}

impl fmt::Display for Tropical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tropical::Finite(v) => write!(f, "{v}"),
            Tropical::Infinity => f.write_str("inf"),
        }
    }
}

impl Semiring for Tropical {
    const NAME: &'static str = "tropical";

    fn zero() -> Self {
        Tropical::Infinity
    }

    fn one() -> Self {
        Tropical::Finite(0)
    }

    fn add(&self, other: &Self) -> Self {
        // Derived Ord places every Finite below Infinity.
        *self.min(other)
    }

    fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Tropical::Finite(a), Tropical::Finite(b)) => Tropical::Finite(a.saturating_add(*b)),
            _ => Tropical::Infinity,
        }
    }

    fn encode(&self) -> String {
        self.to_string()
    }

    fn decode(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "∞" => Ok(Tropical::Infinity),
            t => t
                .parse::<u64>()
                .map(Tropical::Finite)
                .map_err(|_| Error::InvalidInput(format!("`{t}` is not a tropical value"))),
        }
    }

    fn sample<G: Rng + ?Sized>(rng: &mut G) -> Self {
        if rng.gen_bool(0.2) {
            Tropical::Infinity
        } else {
            Tropical::Finite(rng.gen_range(0..10))
        }
    }
}

/// Integers modulo the Mersenne prime 2^61 − 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimeField(u64);

impl PrimeField {
    pub const MODULUS: u64 = (1 << 61) - 1;

    pub fn new(v: u64) -> Self {
        PrimeField(v % Self::MODULUS)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    fn reduce(x: u128) -> u64 {
        let p = Self::MODULUS as u128;
        let folded = (x & p) + (x >> 61);
        let folded = (folded & p) + (folded >> 61);
        let r = folded as u64;
        if r >= Self::MODULUS {
            r - Self::MODULUS
        } else {
            r
        }
    }
}

impl Semiring for PrimeField {
    const NAME: &'static str = "prime61";

    fn zero() -> Self {
        PrimeField(0)
    }

    fn one() -> Self {
        PrimeField(1)
    }

    fn add(&self, other: &Self) -> Self {
        let s = self.0 + other.0;
        PrimeField(if s >= Self::MODULUS {
            s - Self::MODULUS
        } else {
            s
        })
    }

    fn mul(&self, other: &Self) -> Self {
        PrimeField(Self::reduce(self.0 as u128 * other.0 as u128))
    }

    fn encode(&self) -> String {
        self.0.to_string()
    }

    fn decode(s: &str) -> Result<Self> {
        let v: u64 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("`{s}` is not a field element")))?;
        if v >= Self::MODULUS {
            return Err(Error::InvalidInput(format!(
                "{v} is not reduced modulo 2^61-1"
            )));
        }
        Ok(PrimeField(v))
    }

    fn sample<G: Rng + ?Sized>(rng: &mut G) -> Self {
        PrimeField(rng.gen_range(0..Self::MODULUS))
    }
}

/// Sum of a sequence of elements.
pub fn sum<'a, R: Semiring>(items: impl IntoIterator<Item = &'a R>) -> R {
    items.into_iter().fold(R::zero(), |acc, x| acc.add(x))
}
