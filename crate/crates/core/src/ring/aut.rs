use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Mat, RingElem, RingRef};
use crate::error::{Error, Result};

/// The automorphisms used for twisting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AutKind {
    Identity,
    /// `a -> a^(p^e)` on `FiniteField(p,k)`.
    Frobenius(u32),
    /// `(a_0, .., a_{w-1}) -> (a_r, a_{r+1}, ..)` on `Product(_, w)`.
    Rotation(usize),
}

impl fmt::Display for AutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AutKind::Identity => write!(f, "identity"),
            AutKind::Frobenius(e) => write!(f, "frobenius:{e}"),
            AutKind::Rotation(r) => write!(f, "rotation:{r}"),
        }
    }
}

impl std::str::FromStr for AutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') || s.starts_with('"') {
            return serde_json::from_str(s).map_err(|e| Error::Parse(format!("automorphism: {e}")));
        }
        let lower = s.to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n.to_string(), Some(a.to_string())),
            None => (lower.clone(), None),
        };
        let num = |a: Option<String>| -> Result<u64> {
            a.unwrap_or_else(|| "1".into())
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad automorphism argument in {s:?}")))
        };
        match name.as_str() {
            "identity" | "id" => Ok(AutKind::Identity),
            "frobenius" => Ok(AutKind::Frobenius(num(arg)? as u32)),
            "rotation" => Ok(AutKind::Rotation(num(arg)? as usize)),
            _ => Err(Error::Parse(format!("unknown automorphism {s:?}"))),
        }
    }
}

/// A ring automorphism together with its ring.
#[derive(Clone, Debug)]
pub struct RingAut {
    ring: RingRef,
    kind: AutKind,
}

impl PartialEq for RingAut {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.kind == other.kind
    }
}

impl Eq for RingAut {}

impl RingAut {
    pub fn new(ring: RingRef, kind: AutKind) -> Result<Self> {
        let kind = match kind {
            AutKind::Identity => AutKind::Identity,
            AutKind::Frobenius(e) => {
                let g = ring.galois().ok_or_else(|| {
                    Error::UnsupportedAut(format!("Frobenius needs a FiniteField, got {}", ring.spec()))
                })?;
                let e = e % g.degree();
                if e == 0 {
                    AutKind::Identity
                } else {
                    AutKind::Frobenius(e)
                }
            }
            AutKind::Rotation(r) => {
                let (_, w) = ring.product_parts().ok_or_else(|| {
                    Error::UnsupportedAut(format!("Rotation needs a Product ring, got {}", ring.spec()))
                })?;
                let r = r % w;
                if r == 0 {
                    AutKind::Identity
                } else {
                    AutKind::Rotation(r)
                }
            }
        };
        Ok(RingAut { ring, kind })
    }

    pub fn identity(ring: RingRef) -> Self {
        RingAut { ring, kind: AutKind::Identity }
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn kind(&self) -> AutKind {
        self.kind
    }

    pub fn is_identity(&self) -> bool {
        self.kind == AutKind::Identity
    }

    /// `self` composed with itself `j` times; negative `j` gives powers of the inverse.
    pub fn pow(&self, j: i64) -> RingAut {
        let kind = match self.kind {
            AutKind::Identity => AutKind::Identity,
            AutKind::Frobenius(e) => {
                let k = self.ring.galois().expect("frobenius ring").degree() as i64;
                AutKind::Frobenius((e as i64 * j).rem_euclid(k) as u32)
            }
            AutKind::Rotation(r) => {
                let (_, w) = self.ring.product_parts().expect("rotation ring");
                AutKind::Rotation((r as i64 * j).rem_euclid(w as i64) as usize)
            }
        };
        RingAut::new(self.ring.clone(), kind).expect("power of a valid automorphism")
    }

    pub fn inverse(&self) -> RingAut {
        self.pow(-1)
    }

    pub fn apply(&self, a: &RingElem) -> RingElem {
        match (self.kind, a) {
            (AutKind::Identity, _) => a.clone(),
            (AutKind::Frobenius(e), RingElem::Poly(c)) => {
                RingElem::Poly(self.ring.galois().expect("frobenius ring").frobenius(c, e))
            }
            (AutKind::Rotation(r), RingElem::Tuple(xs)) => {
                let w = xs.len();
                RingElem::Tuple((0..w).map(|i| xs[(i + r) % w].clone()).collect())
            }
            _ => panic!("automorphism {} applied to a foreign element", self.kind),
        }
    }

    /// Entrywise action on a matrix.
    pub fn apply_mat(&self, a: &Mat) -> Result<Mat> {
        if **a.ring() != *self.ring {
            return Err(Error::RingMismatch(self.ring.spec().to_string(), a.ring().spec().to_string()));
        }
        if self.is_identity() {
            return Ok(a.clone());
        }
        Ok(a.map(|x| self.apply(x)))
    }
}
