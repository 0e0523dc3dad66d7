//! The twisted finite Laurent category over a matrix category.
//!
//! A morphism `A -> B` is a finite sum `Σ f_i t^i` with `f_i : Φ^i(A) -> B`.
//! The twist `Φ` comes from a ring automorphism `σ` acting entrywise, so it
//! fixes objects; composition is
//! `(g ∘ f)_k = Σ_{i+j=k} g_j · σ^j(f_i)`.

mod division;
mod nil;

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matcat::Obj;
use crate::ring::{AutKind, Mat, RingAut, RingRef};

pub use division::{division_step, find_lift, reduce, Reduction};
pub use nil::{default_nil_bound, nil_degree, nil_power, NilObject};

/// A morphism of the twisted Laurent category. Zero coefficients are never
/// stored, so structural equality is equality of morphisms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentMor {
    dom: Obj,
    cod: Obj,
    aut: RingAut,
    coeffs: BTreeMap<i64, Mat>,
}

/// Degree and leading coefficient of a polynomial morphism; `degree` is
/// `None` for the zero morphism (degree −∞, leading coefficient 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyDegreeData {
    pub degree: Option<i64>,
    pub leading: Mat,
}

impl LaurentMor {
    pub fn new(dom: Obj, cod: Obj, aut: RingAut, coeffs: impl IntoIterator<Item = (i64, Mat)>) -> Result<LaurentMor> {
        let ring = aut.ring().clone();
        let mut map: BTreeMap<i64, Mat> = BTreeMap::new();
        for (d, m) in coeffs {
            if m.ring() != &ring {
                return Err(Error::RingMismatch(ring.spec().to_string(), m.ring().spec().to_string()));
            }
            if m.rows() != cod.rank() || m.cols() != dom.rank() {
                return Err(Error::Dimension(format!(
                    "coefficient of degree {d} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    cod.rank(),
                    dom.rank()
                )));
            }
            match map.remove(&d) {
                Some(prev) => {
                    map.insert(d, prev.add(&m)?);
                }
                None => {
                    map.insert(d, m);
                }
            }
        }
        map.retain(|_, m| !m.is_zero());
        Ok(LaurentMor { dom, cod, aut, coeffs: map })
    }

    pub fn zero(dom: Obj, cod: Obj, aut: RingAut) -> LaurentMor {
        LaurentMor { dom, cod, aut, coeffs: BTreeMap::new() }
    }

    pub fn monomial(dom: Obj, cod: Obj, aut: RingAut, degree: i64, mat: Mat) -> Result<LaurentMor> {
        LaurentMor::new(dom, cod, aut, [(degree, mat)])
    }

    /// `Id_A · t^s : A -> Φ^s(A) = A`.
    pub fn shift(obj: &Obj, aut: &RingAut, s: i64) -> LaurentMor {
        let id = Mat::identity(aut.ring().clone(), obj.rank());
        LaurentMor::monomial(obj.clone(), obj.clone(), aut.clone(), s, id).expect("identity shape")
    }

    pub fn dom(&self) -> &Obj {
        &self.dom
    }

    pub fn cod(&self) -> &Obj {
        &self.cod
    }

    pub fn aut(&self) -> &RingAut {
        &self.aut
    }

    pub fn ring(&self) -> &RingRef {
        self.aut.ring()
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, Mat> {
        &self.coeffs
    }

    /// Coefficient in degree `d` (zero if absent).
    pub fn coeff(&self, d: i64) -> Mat {
        self.coeffs
            .get(&d)
            .cloned()
            .unwrap_or_else(|| Mat::zeros(self.ring().clone(), self.cod.rank(), self.dom.rank()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn is_polynomial(&self) -> bool {
        self.min_degree().is_none_or(|d| d >= 0)
    }

    fn check_parallel(&self, other: &LaurentMor) -> Result<()> {
        if self.aut != other.aut {
            return Err(Error::AutMismatch(format!("{} vs {}", self.aut.kind(), other.aut.kind())));
        }
        if self.dom != other.dom || self.cod != other.cod {
            return Err(Error::ObjectMismatch("Laurent morphisms have different ends".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &LaurentMor) -> Result<LaurentMor> {
        self.check_parallel(other)?;
        let terms = self.coeffs.iter().chain(&other.coeffs).map(|(d, m)| (*d, m.clone()));
        LaurentMor::new(self.dom.clone(), self.cod.clone(), self.aut.clone(), terms)
    }

    pub fn neg(&self) -> LaurentMor {
        LaurentMor {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            aut: self.aut.clone(),
            coeffs: self.coeffs.iter().map(|(d, m)| (*d, m.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &LaurentMor) -> Result<LaurentMor> {
        self.add(&other.neg())
    }

    /// Multiply every coefficient by the scalar `c` on the left.
    pub fn scale(&self, c: &crate::ring::RingElem) -> LaurentMor {
        let terms = self.coeffs.iter().map(|(d, m)| (*d, m.scale(c)));
        LaurentMor::new(self.dom.clone(), self.cod.clone(), self.aut.clone(), terms).expect("same shape")
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self.coeffs.iter().map(|(d, m)| json!({ "deg": d, "mat": m.to_json() })).collect();
        json!({
            "aut": serde_json::to_value(self.aut.kind()).expect("aut kind"),
            "dom": self.dom.to_json(),
            "cod": self.cod.to_json(),
            "coeffs": coeffs,
        })
    }

    pub fn from_json(ring: RingRef, v: &Value) -> Result<LaurentMor> {
        let obj = v.as_object().ok_or_else(|| Error::Parse(format!("Laurent morphism must be a map, got {v}")))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "aut" | "dom" | "cod" | "coeffs") {
                return Err(Error::Parse(format!("unknown Laurent morphism field {key:?}")));
            }
        }
        let kind: AutKind = match obj.get("aut") {
            Some(a) => serde_json::from_value(a.clone()).map_err(|e| Error::Parse(format!("aut: {e}")))?,
            None => AutKind::Identity,
        };
        let aut = RingAut::new(ring.clone(), kind)?;
        let dom = Obj::from_json(obj.get("dom").ok_or_else(|| Error::Parse("missing \"dom\"".into()))?)?;
        let cod = Obj::from_json(obj.get("cod").ok_or_else(|| Error::Parse("missing \"cod\"".into()))?)?;
        let mut terms = Vec::new();
        for c in obj.get("coeffs").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing \"coeffs\"".into()))? {
            let c = c.as_object().ok_or_else(|| Error::Parse("coefficient must be a map".into()))?;
            for key in c.keys() {
                if key != "deg" && key != "mat" {
                    return Err(Error::Parse(format!("unknown coefficient field {key:?}")));
                }
            }
            let deg =
                c.get("deg").and_then(Value::as_i64).ok_or_else(|| Error::Parse("coefficient needs \"deg\"".into()))?;
            let mat = Mat::from_json(
                ring.clone(),
                c.get("mat").ok_or_else(|| Error::Parse("coefficient needs \"mat\"".into()))?,
            )?;
            terms.push((deg, mat));
        }
        LaurentMor::new(dom, cod, aut, terms)
    }
}

/// `g ∘ f` with `(g ∘ f)_k = Σ_{i+j=k} g_j · σ^j(f_i)`.
pub fn laurent_compose(g: &LaurentMor, f: &LaurentMor) -> Result<LaurentMor> {
    if f.aut != g.aut {
        return Err(Error::AutMismatch(format!("{} vs {}", g.aut.kind(), f.aut.kind())));
    }
    if f.cod != g.dom {
        return Err(Error::ObjectMismatch(format!(
            "cannot compose: codomain rank {} vs domain rank {}",
            f.cod.rank(),
            g.dom.rank()
        )));
    }
    let mut terms = Vec::with_capacity(f.coeffs.len() * g.coeffs.len());
    for (&j, gj) in &g.coeffs {
        let sigma_j = f.aut.pow(j);
        for (&i, fi) in &f.coeffs {
            terms.push((i + j, gj.mul(&sigma_j.apply_mat(fi)?)?));
        }
    }
    LaurentMor::new(f.dom.clone(), g.cod.clone(), f.aut.clone(), terms)
}

pub fn laurent_add(f: &LaurentMor, g: &LaurentMor) -> Result<LaurentMor> {
    f.add(g)
}

pub fn laurent_sub(f: &LaurentMor, g: &LaurentMor) -> Result<LaurentMor> {
    f.sub(g)
}

pub fn degree_data(f: &LaurentMor) -> Result<PolyDegreeData> {
    if let Some(d) = f.min_degree().filter(|&d| d < 0) {
        return Err(Error::NotPolynomial(d));
    }
    Ok(match f.coeffs.iter().next_back() {
        Some((&d, m)) => PolyDegreeData { degree: Some(d), leading: m.clone() },
        None => PolyDegreeData { degree: None, leading: Mat::zeros(f.ring().clone(), f.cod.rank(), f.dom.rank()) },
    })
}

/// The minimal `s >= 0` with `(Id · t^s) ∘ f` polynomial, and that composite.
pub fn laurent_normalize(f: &LaurentMor) -> Result<(u64, LaurentMor)> {
    let s = f.min_degree().map_or(0, |d| (-d).max(0));
    let g = laurent_compose(&LaurentMor::shift(&f.cod, &f.aut, s), f)?;
    Ok((s as u64, g))
}
