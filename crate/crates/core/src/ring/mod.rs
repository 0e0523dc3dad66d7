//! Coefficient rings with exact arithmetic.
//!
//! The supported rings form a closed list ([`RingSpec`]); each one admits a
//! terminating exact linear solver, see [`linalg`].

mod aut;
mod galois;
pub mod integer;
pub mod linalg;
mod mat;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub use aut::{AutKind, RingAut};
pub use galois::GaloisField;
pub use mat::Mat;

/// Description of a coefficient ring, as it appears in instance files.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RingSpec {
    Integers,
    Rationals,
    PrimeField(u64),
    FiniteField(u64, u32),
    IntegersMod(u64),
    Product(Box<RingSpec>, usize),
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Integers => write!(f, "Integers"),
            RingSpec::Rationals => write!(f, "Rationals"),
            RingSpec::PrimeField(p) => write!(f, "PrimeField({p})"),
            RingSpec::FiniteField(p, k) => write!(f, "FiniteField({p},{k})"),
            RingSpec::IntegersMod(n) => write!(f, "IntegersMod({n})"),
            RingSpec::Product(base, w) => write!(f, "Product({base},{w})"),
        }
    }
}

impl FromStr for RingSpec {
    type Err = Error;

    /// Accepts either the JSON form (`{"PrimeField":5}`) or the display form
    /// (`PrimeField(5)`, `Product(Integers,2)`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') || s.starts_with('"') {
            return serde_json::from_str(s).map_err(|e| Error::Parse(format!("ring spec: {e}")));
        }
        let (spec, rest) = parse_spec(s)?;
        if !rest.trim().is_empty() {
            return Err(Error::Parse(format!("trailing input in ring spec: {rest:?}")));
        }
        Ok(spec)
    }
}

fn parse_spec(s: &str) -> Result<(RingSpec, &str)> {
    let s = s.trim_start();
    let name_end = s.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(s.len());
    let (name, rest) = s.split_at(name_end);
    let bad = || Error::Parse(format!("malformed ring spec near {s:?}"));
    let args = |rest: &str| -> Result<(String, usize)> {
        let rest_t = rest.trim_start();
        if !rest_t.starts_with('(') {
            return Err(bad());
        }
        let offset = rest.len() - rest_t.len();
        let mut depth = 0usize;
        for (i, c) in rest_t.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok((rest_t[1..i].to_string(), offset + i + 1));
                    }
                }
                _ => {}
            }
        }
        Err(bad())
    };
    let num = |t: &str| -> Result<u64> { t.trim().parse::<u64>().map_err(|_| bad()) };
    match name {
        "Integers" | "Z" => Ok((RingSpec::Integers, rest)),
        "Rationals" | "Q" => Ok((RingSpec::Rationals, rest)),
        "PrimeField" => {
            let (inner, used) = args(rest)?;
            Ok((RingSpec::PrimeField(num(&inner)?), &rest[used..]))
        }
        "IntegersMod" => {
            let (inner, used) = args(rest)?;
            Ok((RingSpec::IntegersMod(num(&inner)?), &rest[used..]))
        }
        "FiniteField" => {
            let (inner, used) = args(rest)?;
            let mut it = inner.split(',');
            let p = num(it.next().ok_or_else(bad)?)?;
            let k = num(it.next().ok_or_else(bad)?)? as u32;
            if it.next().is_some() {
                return Err(bad());
            }
            Ok((RingSpec::FiniteField(p, k), &rest[used..]))
        }
        "Product" => {
            let (inner, used) = args(rest)?;
            let (base, tail) = parse_spec(&inner)?;
            let tail = tail.trim_start().strip_prefix(',').ok_or_else(bad)?;
            let w = num(tail)? as usize;
            Ok((RingSpec::Product(Box::new(base), w), &rest[used..]))
        }
        _ => Err(bad()),
    }
}

/// An element of one of the supported rings. The owning [`Ring`] gives it
/// meaning; elements carry no modulus of their own.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingElem {
    Int(BigInt),
    Rat(BigRational),
    /// Residue in `[0, n)` for `PrimeField(n)` or `IntegersMod(n)`.
    Res(u64),
    /// Coefficients (lowest degree first, length `k`) in `FiniteField(p,k)`.
    Poly(Vec<u64>),
    Tuple(Vec<RingElem>),
}

#[derive(Debug)]
enum Kind {
    Integers,
    Rationals,
    Modular { n: u64, prime: bool },
    Galois(GaloisField),
    Product { base: RingRef, width: usize },
}

/// A validated coefficient ring.
#[derive(Debug)]
pub struct Ring {
    spec: RingSpec,
    kind: Kind,
}

pub type RingRef = Arc<Ring>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, n);
        }
        a = mul_mod(a, a, n);
        e >>= 1;
    }
    acc
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

impl Ring {
    pub fn new(spec: RingSpec) -> Result<RingRef> {
        let kind = match &spec {
            RingSpec::Integers => Kind::Integers,
            RingSpec::Rationals => Kind::Rationals,
            RingSpec::PrimeField(p) => {
                if !is_prime(*p) {
                    return Err(Error::InvalidRing(format!("{p} is not prime")));
                }
                Kind::Modular { n: *p, prime: true }
            }
            RingSpec::IntegersMod(n) => {
                if *n < 2 {
                    return Err(Error::InvalidRing(format!("modulus {n} must be at least 2")));
                }
                if *n > u32::MAX as u64 {
                    return Err(Error::InvalidRing(format!("modulus {n} too large")));
                }
                Kind::Modular { n: *n, prime: is_prime(*n) }
            }
            RingSpec::FiniteField(p, k) => Kind::Galois(GaloisField::new(*p, *k)?),
            RingSpec::Product(base, w) => {
                if *w == 0 {
                    return Err(Error::InvalidRing("product width must be at least 1".into()));
                }
                Kind::Product { base: Ring::new((**base).clone())?, width: *w }
            }
        };
        Ok(Arc::new(Ring { spec, kind }))
    }

    pub fn integers() -> RingRef {
        Ring::new(RingSpec::Integers).expect("integers")
    }

    pub fn rationals() -> RingRef {
        Ring::new(RingSpec::Rationals).expect("rationals")
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    pub fn is_field(&self) -> bool {
        match &self.kind {
            Kind::Rationals | Kind::Galois(_) => true,
            Kind::Modular { prime, .. } => *prime,
            Kind::Integers => false,
            Kind::Product { .. } => false,
        }
    }

    pub fn is_integers(&self) -> bool {
        matches!(self.kind, Kind::Integers)
    }

    pub fn is_integral_domain(&self) -> bool {
        self.is_field() || self.is_integers()
    }

    /// `Some(n)` for `IntegersMod(n)` and `PrimeField(n)`.
    pub fn modulus(&self) -> Option<u64> {
        match &self.kind {
            Kind::Modular { n, .. } => Some(*n),
            _ => None,
        }
    }

    pub fn galois(&self) -> Option<&GaloisField> {
        match &self.kind {
            Kind::Galois(g) => Some(g),
            _ => None,
        }
    }

    /// `Some((base, width))` for product rings.
    pub fn product_parts(&self) -> Option<(&RingRef, usize)> {
        match &self.kind {
            Kind::Product { base, width } => Some((base, *width)),
            _ => None,
        }
    }

    pub fn zero(&self) -> RingElem {
        match &self.kind {
            Kind::Integers => RingElem::Int(BigInt::zero()),
            Kind::Rationals => RingElem::Rat(BigRational::zero()),
            Kind::Modular { .. } => RingElem::Res(0),
            Kind::Galois(g) => RingElem::Poly(vec![0; g.degree() as usize]),
            Kind::Product { base, width } => RingElem::Tuple(vec![base.zero(); *width]),
        }
    }

    pub fn one(&self) -> RingElem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> RingElem {
        match &self.kind {
            Kind::Integers => RingElem::Int(BigInt::from(v)),
            Kind::Rationals => RingElem::Rat(BigRational::from_integer(BigInt::from(v))),
            Kind::Modular { n, .. } => RingElem::Res(v.rem_euclid(*n as i64) as u64),
            Kind::Galois(g) => {
                let mut c = vec![0; g.degree() as usize];
                c[0] = v.rem_euclid(g.characteristic() as i64) as u64;
                RingElem::Poly(c)
            }
            Kind::Product { base, width } => RingElem::Tuple(vec![base.from_i64(v); *width]),
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> RingElem {
        match &self.kind {
            Kind::Integers => RingElem::Int(v.clone()),
            Kind::Rationals => RingElem::Rat(BigRational::from_integer(v.clone())),
            Kind::Modular { n, .. } => RingElem::Res(v.mod_floor(&BigInt::from(*n)).to_u64().expect("residue")),
            Kind::Galois(g) => {
                let p = BigInt::from(g.characteristic());
                let mut c = vec![0; g.degree() as usize];
                c[0] = v.mod_floor(&p).to_u64().expect("residue");
                RingElem::Poly(c)
            }
            Kind::Product { base, width } => RingElem::Tuple(vec![base.from_bigint(v); *width]),
        }
    }

    pub fn contains(&self, a: &RingElem) -> bool {
        match (&self.kind, a) {
            (Kind::Integers, RingElem::Int(_)) => true,
            (Kind::Rationals, RingElem::Rat(_)) => true,
            (Kind::Modular { n, .. }, RingElem::Res(r)) => r < n,
            (Kind::Galois(g), RingElem::Poly(c)) => g.contains(c),
            (Kind::Product { base, width }, RingElem::Tuple(xs)) => {
                xs.len() == *width && xs.iter().all(|x| base.contains(x))
            }
            _ => false,
        }
    }

    pub fn check(&self, a: &RingElem) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::RingMismatch(self.spec.to_string(), format!("element {a:?}")))
        }
    }

    /// Checked arithmetic on elements of this ring.
    pub fn arith(&self, a: &RingElem, b: &RingElem, op: ArithOp) -> Result<RingElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Mul => self.mul(a, b),
        })
    }

    pub fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        match (&self.kind, a, b) {
            (Kind::Integers, RingElem::Int(x), RingElem::Int(y)) => RingElem::Int(x + y),
            (Kind::Rationals, RingElem::Rat(x), RingElem::Rat(y)) => RingElem::Rat(x + y),
            (Kind::Modular { n, .. }, RingElem::Res(x), RingElem::Res(y)) => {
                RingElem::Res(((*x as u128 + *y as u128) % *n as u128) as u64)
            }
            (Kind::Galois(g), RingElem::Poly(x), RingElem::Poly(y)) => RingElem::Poly(g.add(x, y)),
            (Kind::Product { base, .. }, RingElem::Tuple(x), RingElem::Tuple(y)) => {
                RingElem::Tuple(x.iter().zip(y).map(|(u, v)| base.add(u, v)).collect())
            }
            _ => panic!("ring element mismatch in add over {}", self.spec),
        }
    }

    pub fn neg(&self, a: &RingElem) -> RingElem {
        match (&self.kind, a) {
            (Kind::Integers, RingElem::Int(x)) => RingElem::Int(-x),
            (Kind::Rationals, RingElem::Rat(x)) => RingElem::Rat(-x),
            (Kind::Modular { n, .. }, RingElem::Res(x)) => RingElem::Res((n - x) % n),
            (Kind::Galois(g), RingElem::Poly(x)) => RingElem::Poly(g.neg(x)),
            (Kind::Product { base, .. }, RingElem::Tuple(x)) => {
                RingElem::Tuple(x.iter().map(|u| base.neg(u)).collect())
            }
            _ => panic!("ring element mismatch in neg over {}", self.spec),
        }
    }

    pub fn sub(&self, a: &RingElem, b: &RingElem) -> RingElem {
        match (&self.kind, a, b) {
            (Kind::Integers, RingElem::Int(x), RingElem::Int(y)) => RingElem::Int(x - y),
            (Kind::Rationals, RingElem::Rat(x), RingElem::Rat(y)) => RingElem::Rat(x - y),
            _ => self.add(a, &self.neg(b)),
        }
    }

    pub fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        match (&self.kind, a, b) {
            (Kind::Integers, RingElem::Int(x), RingElem::Int(y)) => RingElem::Int(x * y),
            (Kind::Rationals, RingElem::Rat(x), RingElem::Rat(y)) => RingElem::Rat(x * y),
            (Kind::Modular { n, .. }, RingElem::Res(x), RingElem::Res(y)) => RingElem::Res(mul_mod(*x, *y, *n)),
            (Kind::Galois(g), RingElem::Poly(x), RingElem::Poly(y)) => RingElem::Poly(g.mul(x, y)),
            (Kind::Product { base, .. }, RingElem::Tuple(x), RingElem::Tuple(y)) => {
                RingElem::Tuple(x.iter().zip(y).map(|(u, v)| base.mul(u, v)).collect())
            }
            _ => panic!("ring element mismatch in mul over {}", self.spec),
        }
    }

    pub fn pow(&self, a: &RingElem, mut e: u64) -> RingElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, a: &RingElem) -> bool {
        match a {
            RingElem::Int(x) => x.is_zero(),
            RingElem::Rat(x) => x.is_zero(),
            RingElem::Res(x) => *x == 0,
            RingElem::Poly(c) => c.iter().all(|&v| v == 0),
            RingElem::Tuple(xs) => match &self.kind {
                Kind::Product { base, .. } => xs.iter().all(|x| base.is_zero(x)),
                _ => false,
            },
        }
    }

    /// Multiplicative inverse, when `a` is a unit.
    pub fn inv(&self, a: &RingElem) -> Option<RingElem> {
        match (&self.kind, a) {
            (Kind::Integers, RingElem::Int(x)) => {
                if x.is_one() || (-x).is_one() {
                    Some(RingElem::Int(x.clone()))
                } else {
                    None
                }
            }
            (Kind::Rationals, RingElem::Rat(x)) => {
                if x.is_zero() {
                    None
                } else {
                    Some(RingElem::Rat(x.recip()))
                }
            }
            (Kind::Modular { n, prime }, RingElem::Res(x)) => {
                if *x == 0 || gcd_u64(*x, *n) != 1 {
                    return None;
                }
                if *prime {
                    return Some(RingElem::Res(pow_mod(*x, n - 2, *n)));
                }
                let (g, s) = ext_gcd(*x as i128, *n as i128);
                debug_assert_eq!(g, 1);
                Some(RingElem::Res(s.rem_euclid(*n as i128) as u64))
            }
            (Kind::Galois(g), RingElem::Poly(c)) => g.inv(c).map(RingElem::Poly),
            (Kind::Product { base, .. }, RingElem::Tuple(xs)) => {
                xs.iter().map(|x| base.inv(x)).collect::<Option<Vec<_>>>().map(RingElem::Tuple)
            }
            _ => None,
        }
    }

    pub fn is_unit(&self, a: &RingElem) -> bool {
        self.inv(a).is_some()
    }

    /// All elements, for finite rings of at most `limit` elements.
    pub fn elements(&self, limit: usize) -> Option<Vec<RingElem>> {
        match &self.kind {
            Kind::Modular { n, .. } => {
                if *n as usize > limit {
                    return None;
                }
                Some((0..*n).map(RingElem::Res).collect())
            }
            Kind::Galois(g) => {
                if g.order() as usize > limit {
                    return None;
                }
                Some((0..g.order()).map(|i| RingElem::Poly(g.from_index(i))).collect())
            }
            Kind::Product { base, width } => {
                let elems = base.elements(limit)?;
                let total = (elems.len() as u128).checked_pow(*width as u32)?;
                if total > limit as u128 {
                    return None;
                }
                let mut out = vec![Vec::new()];
                for _ in 0..*width {
                    let mut next = Vec::new();
                    for prefix in &out {
                        for e in &elems {
                            let mut v: Vec<RingElem> = prefix.clone();
                            v.push(e.clone());
                            next.push(v);
                        }
                    }
                    out = next;
                }
                Some(out.into_iter().map(RingElem::Tuple).collect())
            }
            Kind::Integers | Kind::Rationals => None,
        }
    }

    /// A random element. `bound` limits integer magnitudes (and rational
    /// numerators/denominators); finite rings sample uniformly.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R, bound: u64) -> RingElem {
        let b = bound as i64;
        match &self.kind {
            Kind::Integers => RingElem::Int(BigInt::from(rng.gen_range(-b..=b))),
            Kind::Rationals => {
                let num = rng.gen_range(-b..=b);
                let den = rng.gen_range(1..=b.max(1));
                RingElem::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
            }
            Kind::Modular { n, .. } => RingElem::Res(rng.gen_range(0..*n)),
            Kind::Galois(g) => RingElem::Poly((0..g.degree()).map(|_| rng.gen_range(0..g.characteristic())).collect()),
            Kind::Product { base, width } => RingElem::Tuple((0..*width).map(|_| base.random(rng, bound)).collect()),
        }
    }

    /// Project a product element onto one factor.
    pub fn component(&self, a: &RingElem, i: usize) -> Option<RingElem> {
        match a {
            RingElem::Tuple(xs) if matches!(self.kind, Kind::Product { .. }) => xs.get(i).cloned(),
            _ => None,
        }
    }

    pub fn elem_to_json(&self, a: &RingElem) -> Value {
        match a {
            RingElem::Int(x) => Value::String(x.to_string()),
            RingElem::Rat(x) => {
                if x.denom().is_one() {
                    Value::String(x.numer().to_string())
                } else {
                    Value::String(format!("{}/{}", x.numer(), x.denom()))
                }
            }
            RingElem::Res(x) => Value::String(x.to_string()),
            RingElem::Poly(c) => Value::Array(c.iter().map(|v| Value::from(*v)).collect()),
            RingElem::Tuple(xs) => match &self.kind {
                Kind::Product { base, .. } => Value::Array(xs.iter().map(|x| base.elem_to_json(x)).collect()),
                _ => Value::Null,
            },
        }
    }

    pub fn elem_from_json(&self, v: &Value) -> Result<RingElem> {
        let bad = |detail: String| Error::InvalidElement { ring: self.spec.to_string(), detail };
        let int_of = |v: &Value| -> Result<BigInt> {
            match v {
                Value::String(s) => s.trim().parse::<BigInt>().map_err(|_| bad(format!("not an integer: {s:?}"))),
                Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| bad(format!("not an integer: {n}"))),
                other => Err(bad(format!("expected integer, got {other}"))),
            }
        };
        match &self.kind {
            Kind::Integers => Ok(RingElem::Int(int_of(v)?)),
            Kind::Rationals => match v {
                Value::String(s) => {
                    let s = s.trim();
                    let (num, den) = match s.split_once('/') {
                        Some((a, b)) => (a.trim(), b.trim()),
                        None => (s, "1"),
                    };
                    let num: BigInt = num.parse().map_err(|_| bad(format!("bad rational {s:?}")))?;
                    let den: BigInt = den.parse().map_err(|_| bad(format!("bad rational {s:?}")))?;
                    if den.is_zero() {
                        return Err(bad(format!("zero denominator in {s:?}")));
                    }
                    Ok(RingElem::Rat(BigRational::new(num, den)))
                }
                other => Ok(RingElem::Rat(BigRational::from_integer(int_of(other)?))),
            },
            Kind::Modular { .. } => Ok(self.from_bigint(&int_of(v)?)),
            Kind::Galois(g) => {
                let arr = v.as_array().ok_or_else(|| bad(format!("expected coefficient array, got {v}")))?;
                if arr.len() != g.degree() as usize {
                    return Err(bad(format!("expected {} coefficients, got {}", g.degree(), arr.len())));
                }
                let p = BigInt::from(g.characteristic());
                let coeffs = arr
                    .iter()
                    .map(|c| int_of(c).map(|x| x.mod_floor(&p).to_u64().expect("residue")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(RingElem::Poly(coeffs))
            }
            Kind::Product { base, width } => {
                let arr = v.as_array().ok_or_else(|| bad(format!("expected tuple, got {v}")))?;
                if arr.len() != *width {
                    return Err(bad(format!("expected {width} components, got {}", arr.len())));
                }
                Ok(RingElem::Tuple(arr.iter().map(|x| base.elem_from_json(x)).collect::<Result<_>>()?))
            }
        }
    }

    pub fn fmt_elem(&self, a: &RingElem) -> String {
        match self.elem_to_json(a) {
            Value::String(s) => s,
            other => other.to_string(),
        }
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Ring {}

fn ext_gcd(a: i128, b: i128) -> (i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r, old_s)
}
