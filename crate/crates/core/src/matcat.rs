//! The matrix model of the additive closure: objects are ranks (with
//! optional grades), morphisms are matrices, composition is the matrix
//! product and direct sums are block-diagonal.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::linalg::{self, solve_linear};
use crate::ring::{Mat, RingRef};

/// An object `[n]`; `grades` is only used by the nested model.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Obj {
    rank: usize,
    grades: Option<Vec<u32>>,
}

impl Obj {
    pub fn new(rank: usize) -> Obj {
        Obj { rank, grades: None }
    }

    pub fn zero() -> Obj {
        Obj::new(0)
    }

    pub fn graded(grades: Vec<u32>) -> Obj {
        Obj { rank: grades.len(), grades: Some(grades) }
    }

    pub fn with_grades(rank: usize, grades: Option<Vec<u32>>) -> Result<Obj> {
        if let Some(g) = &grades {
            if g.len() != rank {
                return Err(Error::ObjectMismatch(format!("{} grades for rank {rank}", g.len())));
            }
        }
        Ok(Obj { rank, grades })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn grades(&self) -> Option<&[u32]> {
        self.grades.as_deref()
    }

    /// Smallest grade; `None` for the zero object (which lies in every level).
    pub fn min_grade(&self) -> Option<u32> {
        if self.rank == 0 {
            return None;
        }
        Some(self.grades.as_ref().map_or(0, |g| g.iter().copied().min().unwrap_or(0)))
    }

    pub fn direct_sum(&self, other: &Obj) -> Obj {
        let grades = match (&self.grades, &other.grades) {
            (None, None) => None,
            (a, b) => {
                let mut g = a.clone().unwrap_or_else(|| vec![0; self.rank]);
                g.extend(b.clone().unwrap_or_else(|| vec![0; other.rank]));
                Some(g)
            }
        };
        Obj { rank: self.rank + other.rank, grades }
    }

    pub fn to_json(&self) -> Value {
        match &self.grades {
            Some(g) => json!({ "rank": self.rank, "grades": g }),
            None => json!({ "rank": self.rank }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Obj> {
        let obj = v.as_object().ok_or_else(|| Error::Parse(format!("object must be a map, got {v}")))?;
        for key in obj.keys() {
            if key != "rank" && key != "grades" {
                return Err(Error::Parse(format!("unknown object field {key:?}")));
            }
        }
        let rank =
            obj.get("rank").and_then(Value::as_u64).ok_or_else(|| Error::Parse("object needs a \"rank\"".into()))?
                as usize;
        let grades = match obj.get("grades") {
            None | Some(Value::Null) => None,
            Some(Value::Array(a)) => Some(
                a.iter()
                    .map(|g| g.as_u64().map(|x| x as u32).ok_or_else(|| Error::Parse("grades must be naturals".into())))
                    .collect::<Result<Vec<_>>>()?,
            ),
            Some(other) => return Err(Error::Parse(format!("grades must be an array, got {other}"))),
        };
        Obj::with_grades(rank, grades)
    }
}

/// A morphism `dom -> cod`; the matrix is `cod.rank x dom.rank`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mor {
    dom: Obj,
    cod: Obj,
    mat: Mat,
}

impl Mor {
    pub fn new(dom: Obj, cod: Obj, mat: Mat) -> Result<Mor> {
        if mat.rows() != cod.rank() || mat.cols() != dom.rank() {
            return Err(Error::Dimension(format!(
                "matrix {}x{} for a morphism [{}] -> [{}]",
                mat.rows(),
                mat.cols(),
                dom.rank(),
                cod.rank()
            )));
        }
        Ok(Mor { dom, cod, mat })
    }

    /// Morphism between ungraded objects of the matrix's shape.
    pub fn from_mat(mat: Mat) -> Mor {
        Mor { dom: Obj::new(mat.cols()), cod: Obj::new(mat.rows()), mat }
    }

    pub fn identity(ring: RingRef, obj: &Obj) -> Mor {
        Mor { dom: obj.clone(), cod: obj.clone(), mat: Mat::identity(ring, obj.rank()) }
    }

    pub fn zero(ring: RingRef, dom: &Obj, cod: &Obj) -> Mor {
        Mor { dom: dom.clone(), cod: cod.clone(), mat: Mat::zeros(ring, cod.rank(), dom.rank()) }
    }

    pub fn dom(&self) -> &Obj {
        &self.dom
    }

    pub fn cod(&self) -> &Obj {
        &self.cod
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn ring(&self) -> &RingRef {
        self.mat.ring()
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_zero()
    }

    pub fn add(&self, other: &Mor) -> Result<Mor> {
        self.same_ends(other)?;
        Ok(Mor { dom: self.dom.clone(), cod: self.cod.clone(), mat: self.mat.add(&other.mat)? })
    }

    pub fn sub(&self, other: &Mor) -> Result<Mor> {
        self.same_ends(other)?;
        Ok(Mor { dom: self.dom.clone(), cod: self.cod.clone(), mat: self.mat.sub(&other.mat)? })
    }

    pub fn neg(&self) -> Mor {
        Mor { dom: self.dom.clone(), cod: self.cod.clone(), mat: self.mat.neg() }
    }

    fn same_ends(&self, other: &Mor) -> Result<()> {
        if self.dom != other.dom || self.cod != other.cod {
            return Err(Error::ObjectMismatch("morphisms have different ends".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({ "dom": self.dom.to_json(), "cod": self.cod.to_json(), "mat": self.mat.to_json() })
    }

    pub fn from_json(ring: RingRef, v: &Value) -> Result<Mor> {
        let obj = v.as_object().ok_or_else(|| Error::Parse(format!("morphism must be a map, got {v}")))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "dom" | "cod" | "mat") {
                return Err(Error::Parse(format!("unknown morphism field {key:?}")));
            }
        }
        let mat = Mat::from_json(ring, obj.get("mat").ok_or_else(|| Error::Parse("morphism needs \"mat\"".into()))?)?;
        let dom = match obj.get("dom") {
            Some(d) => Obj::from_json(d)?,
            None => Obj::new(mat.cols()),
        };
        let cod = match obj.get("cod") {
            Some(c) => Obj::from_json(c)?,
            None => Obj::new(mat.rows()),
        };
        Mor::new(dom, cod, mat)
    }
}

/// `g ∘ f`.
pub fn compose(g: &Mor, f: &Mor) -> Result<Mor> {
    if f.cod != g.dom {
        return Err(Error::ObjectMismatch(format!(
            "cannot compose: codomain rank {} vs domain rank {}",
            f.cod.rank(),
            g.dom.rank()
        )));
    }
    Ok(Mor { dom: f.dom.clone(), cod: g.cod.clone(), mat: g.mat.mul(&f.mat)? })
}

pub fn direct_sum(f: &Mor, g: &Mor) -> Result<Mor> {
    Ok(Mor { dom: f.dom.direct_sum(&g.dom), cod: f.cod.direct_sum(&g.cod), mat: f.mat.block_diag(&g.mat)? })
}

/// A constructive splitting of an idempotent `p` on `A`: `u : A -> B ⊕ C`
/// with `u ∘ p ∘ u⁻¹ = diag(Id_B, 0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdemSplit {
    pub p: Mor,
    pub u: Mor,
    pub u_inv: Mor,
    pub split_rank: usize,
}

impl IdemSplit {
    /// Re-check all four defining equations by matrix multiplication.
    pub fn verify(&self) -> Result<bool> {
        let ring = self.p.ring().clone();
        let n = self.p.dom().rank();
        let id = Mat::identity(ring.clone(), n);
        let pp = self.p.mat.mul(&self.p.mat)?;
        let mut target = Mat::zeros(ring.clone(), n, n);
        target.paste(0, 0, &Mat::identity(ring, self.split_rank.min(n)));
        let conj = self.u.mat.mul(&self.p.mat)?.mul(&self.u_inv.mat)?;
        Ok(self.split_rank <= n
            && pp == self.p.mat
            && self.u.mat.mul(&self.u_inv.mat)? == id
            && self.u_inv.mat.mul(&self.u.mat)? == id
            && conj == target)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p.to_json(),
            "u": self.u.to_json(),
            "u_inv": self.u_inv.to_json(),
            "split_rank": self.split_rank,
        })
    }
}

/// Basis of the column space of `a`, as columns, canonically reduced.
fn image_basis(a: &Mat) -> Mat {
    let ring = a.ring();
    if ring.is_field() {
        return linalg::column_echelon(a);
    }
    // integers: Hermite basis of the column lattice
    let rows: Vec<Vec<num_bigint::BigInt>> = (0..a.cols())
        .map(|j| {
            (0..a.rows())
                .map(|i| match a.get(i, j) {
                    crate::ring::RingElem::Int(x) => x.clone(),
                    _ => unreachable!("integer matrix"),
                })
                .collect()
        })
        .collect();
    let h = crate::ring::integer::row_hnf(&rows, a.rows());
    let mut out = Mat::zeros(ring.clone(), a.rows(), h.len());
    for (j, r) in h.iter().enumerate() {
        for (i, v) in r.iter().enumerate() {
            out.set(i, j, ring.from_bigint(v));
        }
    }
    out
}

pub fn idem_split(p: &Mor) -> Result<IdemSplit> {
    let ring = p.ring().clone();
    if !(ring.is_field() || ring.is_integers()) {
        return Err(Error::UnsupportedRing { op: "idem_split", ring: ring.spec().to_string() });
    }
    if p.dom != p.cod || p.mat.mul(&p.mat)? != p.mat {
        return Err(Error::NotIdempotent);
    }
    let n = p.dom.rank();
    let id = Mat::identity(ring.clone(), n);
    let im_p = image_basis(&p.mat);
    let im_q = image_basis(&id.sub(&p.mat)?);
    let split_rank = im_p.cols();
    let u_inv_mat = im_p.hstack(&im_q)?;
    if u_inv_mat.cols() != n {
        return Err(Error::Dimension("image bases do not complement".into()));
    }
    let u_mat =
        linalg::inverse(&u_inv_mat)?.ok_or_else(|| Error::Dimension("basis change is not invertible".into()))?;
    let middle = Obj::new(split_rank).direct_sum(&Obj::new(n - split_rank));
    Ok(IdemSplit {
        p: p.clone(),
        u: Mor::new(p.dom.clone(), middle.clone(), u_mat)?,
        u_inv: Mor::new(middle, p.dom.clone(), u_inv_mat)?,
        split_rank,
    })
}

/// `Some(g)` with `f = f' ∘ g`, i.e. `f ⊆ f'`.
pub fn divides(f: &Mor, f_prime: &Mor) -> Result<Option<Mor>> {
    if f.cod != f_prime.cod {
        return Err(Error::ObjectMismatch("divides needs a common codomain".into()));
    }
    Ok(solve_linear(&f_prime.mat, &f.mat)?.map(|g| Mor { dom: f.dom.clone(), cod: f_prime.dom.clone(), mat: g }))
}

/// Things with a K₀ class: objects and split idempotents.
pub enum K0Class<'a> {
    Object(&'a Obj),
    Split(&'a IdemSplit),
}

pub fn k0_rank(ring: &RingRef, x: K0Class<'_>) -> Result<usize> {
    if !(ring.is_field() || ring.is_integers()) {
        return Err(Error::UnsupportedRing { op: "k0_rank", ring: ring.spec().to_string() });
    }
    Ok(match x {
        K0Class::Object(o) => o.rank(),
        K0Class::Split(s) => s.split_rank,
    })
}
