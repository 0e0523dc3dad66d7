//! Sequence and limit categories of a nested filtration `A_0 ⊇ A_1 ⊇ ⋯`.
//!
//! The model is graded-full: `A_m` consists of graded matrix objects whose
//! summands all have grade at least `m`, with every matrix between them.
//! Sequences are stored up to a horizon and continued by a tail rule, so a
//! verdict speaks about the stored components and the rule, not about an
//! infinite amount of data.

mod certify;
mod lift;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matcat::Obj;
use crate::ring::linalg::solve_linear;
use crate::ring::{Mat, RingElem, RingRef};

pub use certify::{
    certify_s_l, certify_sequence, NestedCert, NestedCounterexample, NestedPolicy, NestedReport, NestedTrial,
};
pub use lift::{lift_in_l, lift_in_s, seq_divides, LiftCert, LiftIndex, LiftOutcome};

/// The graded-full nested model over a ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedModel {
    ring: RingRef,
}

impl NestedModel {
    pub fn graded_full(ring: RingRef) -> NestedModel {
        NestedModel { ring }
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    /// Whether `o` lies in `A_l`.
    pub fn contains(o: &Obj, l: usize) -> bool {
        o.min_grade().is_none_or(|g| g as usize >= l)
    }
}

/// Largest `l <= m` with `o ∈ A_l`.
pub fn obj_level(o: &Obj, m: usize) -> usize {
    o.min_grade().map_or(m, |g| (g as usize).min(m))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObjTail {
    Zero,
    /// Rank `r` with every summand at grade `m` in position `m`.
    Canonical(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MorTail {
    Zero,
    Scalar(RingElem),
}

/// An object of the sequence category: `entries[m]` below the horizon,
/// then the tail rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqObj {
    entries: Vec<Obj>,
    tail: ObjTail,
}

impl SeqObj {
    pub fn new(entries: Vec<Obj>, tail: ObjTail) -> SeqObj {
        let entries = entries.into_iter().map(|o| if o.rank() == 0 { Obj::zero() } else { o }).collect();
        let tail = match tail {
            ObjTail::Canonical(0) => ObjTail::Zero,
            t => t,
        };
        SeqObj { entries, tail }
    }

    pub fn canonical(rank: usize) -> SeqObj {
        SeqObj::new(Vec::new(), ObjTail::Canonical(rank))
    }

    pub fn zero() -> SeqObj {
        SeqObj::new(Vec::new(), ObjTail::Zero)
    }

    pub fn horizon(&self) -> usize {
        self.entries.len()
    }

    pub fn tail(&self) -> &ObjTail {
        &self.tail
    }

    pub fn tail_rank(&self) -> usize {
        match self.tail {
            ObjTail::Zero => 0,
            ObjTail::Canonical(r) => r,
        }
    }

    pub fn at(&self, m: usize) -> Obj {
        match self.entries.get(m) {
            Some(o) => o.clone(),
            None => match self.tail {
                ObjTail::Zero => Obj::zero(),
                ObjTail::Canonical(r) => Obj::graded(vec![m as u32; r]),
            },
        }
    }

    /// Equality of the sequences the two descriptions generate.
    pub fn same_as(&self, other: &SeqObj) -> bool {
        self.tail == other.tail && (0..self.horizon().max(other.horizon())).all(|m| self.at(m) == other.at(m))
    }

    pub fn level(&self, m: usize) -> usize {
        obj_level(&self.at(m), m)
    }

    pub fn to_json(&self) -> Value {
        let tail = match self.tail {
            ObjTail::Zero => json!({ "kind": "Zero" }),
            ObjTail::Canonical(r) => json!({ "kind": "Canonical", "rank": r }),
        };
        json!({
            "horizon": self.horizon(),
            "entries": self.entries.iter().map(Obj::to_json).collect::<Vec<_>>(),
            "tail": tail,
        })
    }

    pub fn from_json(v: &Value) -> Result<SeqObj> {
        let obj = strict_map(v, "sequence object", &["horizon", "entries", "tail"])?;
        let entries: Vec<Obj> = obj
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("sequence object needs \"entries\"".into()))?
            .iter()
            .map(Obj::from_json)
            .collect::<Result<_>>()?;
        check_horizon(obj.get("horizon"), entries.len())?;
        let tail = obj.get("tail").ok_or_else(|| Error::Parse("sequence object needs \"tail\"".into()))?;
        let t = strict_map(tail, "object tail", &["kind", "rank"])?;
        let tail = match t.get("kind").and_then(Value::as_str) {
            Some("Zero") => ObjTail::Zero,
            Some("Canonical") => ObjTail::Canonical(
                t.get("rank")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Parse("canonical tail needs \"rank\"".into()))? as usize,
            ),
            other => return Err(Error::Parse(format!("unknown object tail {other:?}"))),
        };
        Ok(SeqObj::new(entries, tail))
    }
}

fn strict_map<'a>(v: &'a Value, what: &str, allowed: &[&str]) -> Result<&'a serde_json::Map<String, Value>> {
    let obj = v.as_object().ok_or_else(|| Error::Parse(format!("{what} must be a map")))?;
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown {what} field {k:?}")));
    }
    Ok(obj)
}

fn check_horizon(h: Option<&Value>, len: usize) -> Result<()> {
    match h {
        None => Ok(()),
        Some(h) if h.as_u64() == Some(len as u64) => Ok(()),
        Some(h) => Err(Error::Parse(format!("horizon {h} does not match {len} entries"))),
    }
}

/// A morphism of the sequence category, stored up to its own horizon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqMor {
    ring: RingRef,
    dom: SeqObj,
    cod: SeqObj,
    entries: Vec<Mat>,
    tail: MorTail,
}

impl SeqMor {
    pub fn new(ring: RingRef, dom: SeqObj, cod: SeqObj, entries: Vec<Mat>, tail: MorTail) -> Result<SeqMor> {
        for (m, e) in entries.iter().enumerate() {
            if e.ring() != &ring {
                return Err(Error::RingMismatch(ring.spec().to_string(), e.ring().spec().to_string()));
            }
            let (d, c) = (dom.at(m).rank(), cod.at(m).rank());
            if e.rows() != c || e.cols() != d {
                return Err(Error::Dimension(format!("component {m} is {}x{}, expected {c}x{d}", e.rows(), e.cols())));
            }
        }
        let tail = match tail {
            MorTail::Scalar(c) => {
                ring.check(&c)?;
                if ring.is_zero(&c) {
                    MorTail::Zero
                } else {
                    let span = entries.len().max(dom.horizon()).max(cod.horizon());
                    for m in entries.len()..span {
                        if dom.at(m).rank() != cod.at(m).rank() {
                            return Err(Error::ObjectMismatch(format!("scalar tail at {m} between ranks that differ")));
                        }
                    }
                    if dom.tail_rank() != cod.tail_rank() {
                        return Err(Error::ObjectMismatch("scalar tail between tails of different rank".into()));
                    }
                    MorTail::Scalar(c)
                }
            }
            MorTail::Zero => MorTail::Zero,
        };
        Ok(SeqMor { ring, dom, cod, entries, tail })
    }

    pub fn zero(ring: RingRef, dom: SeqObj, cod: SeqObj) -> SeqMor {
        SeqMor { ring, dom, cod, entries: Vec::new(), tail: MorTail::Zero }
    }

    pub fn identity(ring: RingRef, obj: SeqObj) -> SeqMor {
        let entries = (0..obj.horizon()).map(|m| Mat::identity(ring.clone(), obj.at(m).rank())).collect();
        let one = ring.one();
        SeqMor::new(ring, obj.clone(), obj, entries, MorTail::Scalar(one)).expect("identity")
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn dom(&self) -> &SeqObj {
        &self.dom
    }

    pub fn cod(&self) -> &SeqObj {
        &self.cod
    }

    pub fn horizon(&self) -> usize {
        self.entries.len()
    }

    pub fn tail(&self) -> &MorTail {
        &self.tail
    }

    /// Past this index every component follows the tail rules.
    pub fn span(&self) -> usize {
        self.horizon().max(self.dom.horizon()).max(self.cod.horizon())
    }

    /// The tail as it acts far out: zero when the tail objects vanish.
    pub fn effective_tail(&self) -> MorTail {
        if self.dom.tail_rank() == 0 || self.cod.tail_rank() == 0 {
            MorTail::Zero
        } else {
            self.tail.clone()
        }
    }

    pub fn at(&self, m: usize) -> Mat {
        if let Some(e) = self.entries.get(m) {
            return e.clone();
        }
        let (d, c) = (self.dom.at(m).rank(), self.cod.at(m).rank());
        match &self.tail {
            MorTail::Zero => Mat::zeros(self.ring.clone(), c, d),
            MorTail::Scalar(x) => Mat::scalar(self.ring.clone(), d, x),
        }
    }

    /// Largest `l <= m` with the `m`-th component in `A_l`; by fullness this
    /// is decided by the two objects.
    pub fn level(&self, m: usize) -> usize {
        self.dom.level(m).min(self.cod.level(m))
    }

    /// The same morphism with components below `threshold` replaced by 0.
    pub fn zeroed_below(&self, threshold: usize) -> SeqMor {
        let n = self.span().max(threshold);
        let entries = (0..n)
            .map(|m| {
                let x = self.at(m);
                if m < threshold {
                    Mat::zeros(self.ring.clone(), x.rows(), x.cols())
                } else {
                    x
                }
            })
            .collect();
        SeqMor::new(self.ring.clone(), self.dom.clone(), self.cod.clone(), entries, self.tail.clone())
            .expect("same shape")
    }

    /// Componentwise equality of the generated sequences.
    pub fn same_as(&self, other: &SeqMor) -> bool {
        self.dom.same_as(&other.dom)
            && self.cod.same_as(&other.cod)
            && self.effective_tail() == other.effective_tail()
            && (0..self.span().max(other.span())).all(|m| self.at(m) == other.at(m))
    }

    pub fn to_json(&self) -> Value {
        let tail = match &self.tail {
            MorTail::Zero => json!({ "kind": "Zero" }),
            MorTail::Scalar(c) => json!({ "kind": "Scalar", "value": self.ring.elem_to_json(c) }),
        };
        json!({
            "dom": self.dom.to_json(),
            "cod": self.cod.to_json(),
            "horizon": self.horizon(),
            "entries": self.entries.iter().map(Mat::to_json).collect::<Vec<_>>(),
            "tail": tail,
        })
    }

    pub fn from_json(ring: RingRef, v: &Value) -> Result<SeqMor> {
        let obj = strict_map(v, "sequence morphism", &["dom", "cod", "horizon", "entries", "tail"])?;
        let dom =
            SeqObj::from_json(obj.get("dom").ok_or_else(|| Error::Parse("sequence morphism needs \"dom\"".into()))?)?;
        let cod =
            SeqObj::from_json(obj.get("cod").ok_or_else(|| Error::Parse("sequence morphism needs \"cod\"".into()))?)?;
        let entries: Vec<Mat> = obj
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("sequence morphism needs \"entries\"".into()))?
            .iter()
            .map(|e| Mat::from_json(ring.clone(), e))
            .collect::<Result<_>>()?;
        check_horizon(obj.get("horizon"), entries.len())?;
        let t = strict_map(
            obj.get("tail").ok_or_else(|| Error::Parse("sequence morphism needs \"tail\"".into()))?,
            "morphism tail",
            &["kind", "value"],
        )?;
        let tail = match t.get("kind").and_then(Value::as_str) {
            Some("Zero") => MorTail::Zero,
            Some("Scalar") => MorTail::Scalar(
                ring.elem_from_json(t.get("value").ok_or_else(|| Error::Parse("scalar tail needs \"value\"".into()))?)?,
            ),
            other => return Err(Error::Parse(format!("unknown morphism tail {other:?}"))),
        };
        SeqMor::new(ring, dom, cod, entries, tail)
    }
}

pub fn membership_level_obj(x: &SeqObj, m: usize) -> usize {
    x.level(m)
}

pub fn membership_level(x: &SeqMor, m: usize) -> usize {
    x.level(m)
}

/// An admissible function: `values` below the horizon, `m - offset` beyond.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleFn {
    pub values: Vec<usize>,
    pub offset: usize,
}

impl AdmissibleFn {
    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    pub fn at(&self, m: usize) -> usize {
        self.values.get(m).copied().unwrap_or_else(|| m - self.offset)
    }

    /// `I(m) <= m`, monotone (including across the horizon) and defined
    /// everywhere; divergence is built into the tail rule.
    pub fn is_admissible(&self) -> bool {
        let h = self.horizon();
        self.offset <= h
            && (0..h).all(|m| self.values[m] <= m)
            && self.values.windows(2).all(|w| w[0] <= w[1])
            && (h == 0 || self.values[h - 1] <= h - self.offset)
    }

    /// The directed order: `I <= J` iff `I(m) >= J(m)` for all `m`.
    pub fn le(&self, other: &AdmissibleFn) -> bool {
        let h = self.horizon().max(other.horizon());
        (0..h).all(|m| self.at(m) >= other.at(m)) && self.offset <= other.offset
    }

    /// Pointwise minimum, an upper bound of both in the directed order.
    pub fn join(&self, other: &AdmissibleFn) -> AdmissibleFn {
        let h = self.horizon().max(other.horizon());
        AdmissibleFn {
            values: (0..h).map(|m| self.at(m).min(other.at(m))).collect(),
            offset: self.offset.max(other.offset),
        }
    }

    /// Whether each component of `x` lies in `A_{I(m)}`.
    pub fn covers(&self, x: &SeqMor) -> bool {
        let h = self.horizon().max(x.span());
        (0..h).all(|m| x.level(m) >= self.at(m))
    }
}

fn suffix_min(levels: Vec<usize>) -> AdmissibleFn {
    let h = levels.len();
    let mut values = vec![0; h];
    let mut acc = h;
    for m in (0..h).rev() {
        acc = acc.min(levels[m]);
        values[m] = acc;
    }
    AdmissibleFn { values, offset: 0 }
}

/// `I(m) = min_{j >= m} I'(j)` where `I'(j)` is the membership level; past
/// the span `I'(j) = j`.
pub fn admissible_from(x: &SeqMor) -> AdmissibleFn {
    suffix_min((0..x.span()).map(|m| x.level(m)).collect())
}

pub fn admissible_from_obj(x: &SeqObj) -> AdmissibleFn {
    suffix_min((0..x.horizon()).map(|m| x.level(m)).collect())
}

fn check_composable(g: &SeqMor, f: &SeqMor) -> Result<()> {
    if g.ring != f.ring {
        return Err(Error::RingMismatch(g.ring.spec().to_string(), f.ring.spec().to_string()));
    }
    if !f.cod.same_as(&g.dom) {
        return Err(Error::ObjectMismatch("sequence morphisms are not composable".into()));
    }
    Ok(())
}

pub fn seq_compose(g: &SeqMor, f: &SeqMor) -> Result<SeqMor> {
    check_composable(g, f)?;
    let h = g.horizon().max(f.horizon());
    let entries = (0..h).map(|m| g.at(m).mul(&f.at(m))).collect::<Result<Vec<_>>>()?;
    let tail = match (&g.tail, &f.tail) {
        (MorTail::Scalar(a), MorTail::Scalar(b)) => MorTail::Scalar(g.ring.mul(a, b)),
        _ => MorTail::Zero,
    };
    SeqMor::new(g.ring.clone(), f.dom.clone(), g.cod.clone(), entries, tail)
}

pub fn seq_add(f: &SeqMor, g: &SeqMor) -> Result<SeqMor> {
    if !f.dom.same_as(&g.dom) || !f.cod.same_as(&g.cod) {
        return Err(Error::ObjectMismatch("sequence morphisms have different ends".into()));
    }
    let h = f.horizon().max(g.horizon());
    let entries = (0..h).map(|m| f.at(m).add(&g.at(m))).collect::<Result<Vec<_>>>()?;
    let tail = match (&f.tail, &g.tail) {
        (MorTail::Zero, t) | (t, MorTail::Zero) => t.clone(),
        (MorTail::Scalar(a), MorTail::Scalar(b)) => MorTail::Scalar(f.ring.add(a, b)),
    };
    SeqMor::new(f.ring.clone(), f.dom.clone(), f.cod.clone(), entries, tail)
}

pub fn seq_neg(f: &SeqMor) -> SeqMor {
    let tail = match &f.tail {
        MorTail::Zero => MorTail::Zero,
        MorTail::Scalar(c) => MorTail::Scalar(f.ring.neg(c)),
    };
    SeqMor {
        ring: f.ring.clone(),
        dom: f.dom.clone(),
        cod: f.cod.clone(),
        entries: f.entries.iter().map(Mat::neg).collect(),
        tail,
    }
}

/// Equality in the limit category: the sequences differ in finitely many
/// places. Components past the span follow the tails, so this is equality
/// of the tails as rules.
pub fn limit_eq(f: &SeqMor, g: &SeqMor) -> Result<bool> {
    if !f.dom.same_as(&g.dom) || !f.cod.same_as(&g.cod) {
        return Err(Error::ObjectMismatch("limit equality needs parallel morphisms".into()));
    }
    Ok(f.effective_tail() == g.effective_tail())
}

/// A factorization `f = g ∘ p` through an eventually-zero object, which
/// exists exactly when `f` vanishes far out.
#[derive(Clone, Debug)]
pub struct TFactorization {
    pub t: SeqObj,
    pub p: SeqMor,
    pub g: SeqMor,
}

pub fn factor_through_t(f: &SeqMor) -> Result<Option<TFactorization>> {
    if f.effective_tail() != MorTail::Zero {
        return Ok(None);
    }
    let ring = f.ring.clone();
    let h = f.span();
    let t = SeqObj::new((0..h).map(|m| f.dom.at(m)).collect(), ObjTail::Zero);
    let p_entries = (0..h).map(|m| Mat::identity(ring.clone(), f.dom.at(m).rank())).collect();
    let p = SeqMor::new(ring.clone(), f.dom.clone(), t.clone(), p_entries, MorTail::Zero)?;
    let g = SeqMor::new(ring, t.clone(), f.cod.clone(), (0..h).map(|m| f.at(m)).collect(), MorTail::Zero)?;
    Ok(Some(TFactorization { t, p, g }))
}

/// Solve `a · c = b` for scalars.
pub(crate) fn solve_scalar(ring: &RingRef, a: &RingElem, b: &RingElem) -> Result<Option<RingElem>> {
    let am = Mat::scalar(ring.clone(), 1, a);
    let bm = Mat::scalar(ring.clone(), 1, b);
    Ok(solve_linear(&am, &bm)?.map(|x| x.get(0, 0).clone()))
}
