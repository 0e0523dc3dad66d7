use rand::Rng;
use serde_json::{json, Value};

use super::{
    admissible_from, lift_in_s, seq_compose, AdmissibleFn, LiftIndex, LiftOutcome, MorTail, NestedModel, ObjTail,
    SeqMor, SeqObj,
};
use crate::coherence::{factor_with_grade, resolve, vnr_witness, Counterexample, ResolveOutcome};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::matcat::{Mor, Obj};
use crate::report::Verdict;
use crate::ring::linalg::kernel_gens;
use crate::ring::{Mat, RingElem, RingRef, RingSpec};
use crate::sample::{random_mat, trial_rng};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedPolicy {
    pub trials: usize,
    pub seed: u64,
    pub horizon: usize,
    pub max_rank: usize,
    pub entry_bound: u64,
    pub max_len: Option<usize>,
    pub explicit: Vec<SeqMor>,
}

impl Default for NestedPolicy {
    fn default() -> Self {
        NestedPolicy {
            trials: 20,
            seed: 0,
            horizon: 8,
            max_rank: 2,
            entry_bound: 3,
            max_len: None,
            explicit: Vec::new(),
        }
    }
}

impl NestedPolicy {
    pub fn to_json(&self) -> Value {
        json!({
            "trials": self.trials,
            "seed": self.seed,
            "horizon": self.horizon,
            "max_rank": self.max_rank,
            "entry_bound": self.entry_bound,
            "max_len": self.max_len,
            "explicit": self.explicit.iter().map(SeqMor::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(ring: RingRef, v: &Value) -> Result<NestedPolicy> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("nested policy must be a map".into()))?;
        let mut p = NestedPolicy::default();
        let nat =
            |key: &str, x: &Value| x.as_u64().ok_or_else(|| Error::Parse(format!("{key} must be a natural number")));
        for (key, x) in obj {
            match key.as_str() {
                "trials" => p.trials = nat(key, x)? as usize,
                "seed" => p.seed = nat(key, x)?,
                "horizon" => p.horizon = nat(key, x)? as usize,
                "max_rank" => p.max_rank = nat(key, x)? as usize,
                "entry_bound" => p.entry_bound = nat(key, x)?,
                "max_len" => p.max_len = if x.is_null() { None } else { Some(nat(key, x)? as usize) },
                "explicit" => {
                    let items = x.as_array().ok_or_else(|| Error::Parse("explicit must be a list".into()))?;
                    p.explicit = items.iter().map(|m| SeqMor::from_json(ring.clone(), m)).collect::<Result<_>>()?;
                }
                other => return Err(Error::Parse(format!("unknown nested policy field {other:?}"))),
            }
        }
        Ok(p)
    }
}

/// Sequence-level certificates, each re-checkable component by component
/// and on the tail.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum NestedCert {
    Vnr { phi: SeqMor, psi: SeqMor },
    Factorization { phi: SeqMor, f1: SeqMor, s: SeqMor, f0: SeqMor, admissible: AdmissibleFn },
    Resolution { stages: Vec<SeqMor>, admissible: AdmissibleFn },
}

fn scalar_monic(ring: &RingRef, c: &RingElem) -> bool {
    kernel_gens(&Mat::scalar(ring.clone(), 1, c)).cols() == 0
}

/// Monic in every component, including the tail.
fn seq_monic(f: &SeqMor) -> bool {
    let comps = (0..f.span()).all(|m| kernel_gens(&f.at(m)).cols() == 0);
    let tail = match f.effective_tail() {
        MorTail::Scalar(c) => scalar_monic(f.ring(), &c),
        MorTail::Zero => f.dom().tail_rank() == 0,
    };
    comps && tail
}

/// The kernel inclusion of `f`, component by component, with domains at
/// the grades of `adm`. `None` when the tail kernel is not a tail rule.
fn kernel_seq(f: &SeqMor, adm: &AdmissibleFn) -> Option<SeqMor> {
    let ring = f.ring().clone();
    let mut objs = Vec::new();
    let mut mats = Vec::new();
    for m in 0..f.span() {
        let k = kernel_gens(&f.at(m));
        objs.push(Obj::graded(vec![adm.at(m) as u32; k.cols()]));
        mats.push(k);
    }
    let (tail_obj, tail) = match f.effective_tail() {
        MorTail::Zero => (ObjTail::Canonical(f.dom().tail_rank()), MorTail::Scalar(ring.one())),
        MorTail::Scalar(c) if scalar_monic(&ring, &c) => (ObjTail::Zero, MorTail::Zero),
        MorTail::Scalar(_) => return None,
    };
    SeqMor::new(ring, SeqObj::new(objs, tail_obj), f.dom().clone(), mats, tail).ok()
}

impl NestedCert {
    pub fn subject(&self) -> &SeqMor {
        match self {
            NestedCert::Vnr { phi, .. } | NestedCert::Factorization { phi, .. } => phi,
            NestedCert::Resolution { stages, .. } => &stages[0],
        }
    }

    pub fn verify(&self) -> Result<bool> {
        match self {
            NestedCert::Vnr { phi, psi } => {
                let back = seq_compose(phi, &seq_compose(psi, phi)?)?;
                Ok(back.same_as(phi))
            }
            NestedCert::Factorization { phi, f1, s, f0, admissible } => {
                let id = SeqMor::identity(phi.ring().clone(), f1.cod().clone());
                Ok(seq_compose(f0, f1)?.same_as(phi)
                    && seq_compose(f1, s)?.same_as(&id)
                    && seq_monic(f0)
                    && admissible.is_admissible()
                    && [f1, s, f0].iter().all(|x| admissible.covers(x)))
            }
            NestedCert::Resolution { stages, admissible } => {
                let Some(top) = stages.last() else { return Ok(false) };
                if !seq_monic(top) || !admissible.is_admissible() || !stages.iter().all(|x| admissible.covers(x)) {
                    return Ok(false);
                }
                for w in stages.windows(2) {
                    let Some(mu) = kernel_seq(&w[0], admissible) else { return Ok(false) };
                    match lift_in_s(&mu, &w[1], &w[0]) {
                        Ok(LiftOutcome::Lifted(c)) if c.verify()? => {}
                        Ok(_) | Err(Error::Precondition { .. }) | Err(Error::ObjectMismatch(_)) => return Ok(false),
                        Err(e) => return Err(e),
                    }
                }
                Ok(true)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            NestedCert::Vnr { .. } => "sequence_vnr",
            NestedCert::Factorization { .. } => "sequence_factorization",
            NestedCert::Resolution { .. } => "sequence_resolution",
        }
    }

    pub fn to_json(&self) -> Value {
        let adm = |a: &AdmissibleFn| json!({ "values": a.values, "offset": a.offset });
        let body = match self {
            NestedCert::Vnr { phi, psi } => json!({ "phi": phi.to_json(), "psi": psi.to_json() }),
            NestedCert::Factorization { phi, f1, s, f0, admissible } => json!({
                "phi": phi.to_json(),
                "f1": f1.to_json(),
                "s": s.to_json(),
                "f0": f0.to_json(),
                "admissible": adm(admissible),
            }),
            NestedCert::Resolution { stages, admissible } => json!({
                "length": stages.len(),
                "stages": stages.iter().map(SeqMor::to_json).collect::<Vec<_>>(),
                "admissible": adm(admissible),
            }),
        };
        json!({ "kind": self.kind(), "data": body })
    }
}

/// A failing component (or the tail, as a `1 x 1` representative) with the
/// ordinary counterexample for it.
#[derive(Clone, Debug)]
pub struct NestedCounterexample {
    pub phi: SeqMor,
    pub index: LiftIndex,
    pub inner: Counterexample,
}

fn tail_rep(phi: &SeqMor) -> Option<Mat> {
    match phi.effective_tail() {
        MorTail::Scalar(c) => Some(Mat::scalar(phi.ring().clone(), 1, &c)),
        MorTail::Zero => None,
    }
}

impl NestedCounterexample {
    pub fn verify(&self) -> Result<bool> {
        let expected = match self.index {
            LiftIndex::Component(m) => Some(self.phi.at(m)),
            LiftIndex::Tail => tail_rep(&self.phi),
        };
        Ok(expected.as_ref() == Some(self.inner.subject().mat()) && self.inner.verify()?)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "component",
            "data": { "phi": self.phi.to_json(), "index": self.index.to_json(), "inner": self.inner.to_json() },
        })
    }
}

#[derive(Clone, Debug)]
pub struct NestedTrial {
    pub phi: SeqMor,
    pub verdict: Verdict,
    pub certificate: Option<NestedCert>,
    pub counterexample: Option<NestedCounterexample>,
    pub note: Option<Value>,
}

impl NestedTrial {
    fn certified(phi: &SeqMor, c: NestedCert) -> NestedTrial {
        NestedTrial {
            phi: phi.clone(),
            verdict: Verdict::Certified,
            certificate: Some(c),
            counterexample: None,
            note: None,
        }
    }

    fn refuted(phi: &SeqMor, index: LiftIndex, inner: Counterexample) -> NestedTrial {
        let cx = NestedCounterexample { phi: phi.clone(), index, inner };
        NestedTrial {
            phi: phi.clone(),
            verdict: Verdict::Refuted,
            certificate: None,
            counterexample: Some(cx),
            note: None,
        }
    }

    fn open(phi: &SeqMor, verdict: Verdict, note: Value) -> NestedTrial {
        NestedTrial { phi: phi.clone(), verdict, certificate: None, counterexample: None, note: Some(note) }
    }

    pub fn reverify(&self) -> Result<bool> {
        match self.verdict {
            Verdict::Certified => match &self.certificate {
                Some(c) => Ok(c.subject().same_as(&self.phi) && c.verify()?),
                None => Ok(false),
            },
            Verdict::Refuted => match &self.counterexample {
                Some(c) => c.verify(),
                None => Ok(false),
            },
            _ => Ok(true),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "morphism": self.phi.to_json(),
            "verdict": self.verdict,
            "certificate": self.certificate.as_ref().map(NestedCert::to_json),
            "counterexample": self.counterexample.as_ref().map(NestedCounterexample::to_json),
            "note": self.note,
        })
    }
}

#[derive(Clone, Debug)]
pub struct NestedReport {
    pub ring: RingSpec,
    pub l: usize,
    pub policy: NestedPolicy,
    pub trials: Vec<NestedTrial>,
    pub aggregate: Verdict,
}

impl NestedReport {
    pub fn reverify(&self) -> Result<bool> {
        for t in &self.trials {
            if !t.reverify()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.trials.iter().filter(|t| t.verdict == v).count()
    }

    pub fn to_json(&self) -> Value {
        let verdicts: Vec<Value> = self
            .trials
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut v = t.to_json();
                v["index"] = json!(i);
                v
            })
            .collect();
        json!({
            "model": "graded_full",
            "ring": self.ring,
            "l": self.l,
            "horizon": self.policy.horizon,
            "scope": "stored components and tail rules",
            "policy": self.policy.to_json(),
            "verdicts": verdicts,
            "aggregate": self.aggregate,
            "counts": {
                "certified": self.count(Verdict::Certified),
                "refuted": self.count(Verdict::Refuted),
                "undecided": self.count(Verdict::Undecided),
                "unsupported": self.count(Verdict::Unsupported),
            },
        })
    }
}

fn random_obj<R: Rng>(rng: &mut R, m: usize, max_rank: usize) -> Obj {
    let r = rng.gen_range(0..=max_rank);
    Obj::graded((0..r).map(|_| rng.gen_range(0..=m as u32 + 1)).collect())
}

fn random_seq_mor<R: Rng>(ring: &RingRef, rng: &mut R, p: &NestedPolicy) -> SeqMor {
    let h = p.horizon;
    let dom = SeqObj::new(
        (0..h).map(|m| random_obj(rng, m, p.max_rank)).collect(),
        ObjTail::Canonical(rng.gen_range(0..=p.max_rank)),
    );
    let cod_tail = if rng.gen_bool(0.8) { dom.tail_rank() } else { rng.gen_range(0..=p.max_rank) };
    let cod = SeqObj::new((0..h).map(|m| random_obj(rng, m, p.max_rank)).collect(), ObjTail::Canonical(cod_tail));
    let entries = (0..h).map(|m| random_mat(ring, rng, cod.at(m).rank(), dom.at(m).rank(), p.entry_bound)).collect();
    let tail = if dom.tail_rank() == cod.tail_rank() {
        MorTail::Scalar(ring.random(rng, p.entry_bound))
    } else {
        MorTail::Zero
    };
    SeqMor::new(ring.clone(), dom, cod, entries, tail).expect("sampled shapes agree")
}

fn comp(phi: &SeqMor, m: usize) -> Result<Mor> {
    Mor::new(phi.dom().at(m), phi.cod().at(m), phi.at(m))
}

fn certify_vnr(phi: &SeqMor) -> Result<NestedTrial> {
    let ring = phi.ring().clone();
    let mut gs = Vec::new();
    for m in 0..phi.span() {
        let f = comp(phi, m)?;
        match vnr_witness(&f)? {
            Some(w) => gs.push(w.g.mat().clone()),
            None => return Ok(NestedTrial::refuted(phi, LiftIndex::Component(m), Counterexample::NoVnr { f })),
        }
    }
    let tail = match phi.effective_tail() {
        MorTail::Zero => MorTail::Zero,
        MorTail::Scalar(c) => {
            let f = Mor::from_mat(Mat::scalar(ring.clone(), 1, &c));
            match vnr_witness(&f)? {
                Some(w) => MorTail::Scalar(w.g.mat().get(0, 0).clone()),
                None => return Ok(NestedTrial::refuted(phi, LiftIndex::Tail, Counterexample::NoVnr { f })),
            }
        }
    };
    let psi = SeqMor::new(ring, phi.cod().clone(), phi.dom().clone(), gs, tail)?;
    Ok(NestedTrial::certified(phi, NestedCert::Vnr { phi: phi.clone(), psi }))
}

fn certify_factor(phi: &SeqMor) -> Result<NestedTrial> {
    let ring = phi.ring().clone();
    if !(ring.is_field() || ring.is_integers()) {
        return Ok(NestedTrial::open(
            phi,
            Verdict::Unsupported,
            json!({ "reason": format!("no Smith factorization over {}", ring.spec()) }),
        ));
    }
    let adm = admissible_from(phi);
    let (mut mids, mut f1s, mut ss, mut f0s) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for m in 0..phi.span() {
        let c = factor_with_grade(&comp(phi, m)?, Some(adm.at(m) as u32))?;
        mids.push(c.middle().clone());
        f1s.push(c.f1.mat().clone());
        ss.push(c.s.mat().clone());
        f0s.push(c.f0.mat().clone());
    }
    let one = ring.one();
    let (b_tail, unit, top) = match phi.effective_tail() {
        MorTail::Zero => (ObjTail::Zero, MorTail::Zero, MorTail::Zero),
        MorTail::Scalar(c) => (ObjTail::Canonical(phi.dom().tail_rank()), MorTail::Scalar(one), MorTail::Scalar(c)),
    };
    let b = SeqObj::new(mids, b_tail);
    let f1 = SeqMor::new(ring.clone(), phi.dom().clone(), b.clone(), f1s, unit.clone())?;
    let s = SeqMor::new(ring.clone(), b.clone(), phi.dom().clone(), ss, unit)?;
    let f0 = SeqMor::new(ring, b, phi.cod().clone(), f0s, top)?;
    if !seq_monic(&f0) {
        return Ok(NestedTrial::open(phi, Verdict::Undecided, json!({ "reason": "image factor is not monic" })));
    }
    Ok(NestedTrial::certified(phi, NestedCert::Factorization { phi: phi.clone(), f1, s, f0, admissible: adm }))
}

/// Per-component resolutions padded with zero stages to a common length.
fn certify_resolution(phi: &SeqMor, max_len: usize) -> Result<NestedTrial> {
    let ring = phi.ring().clone();
    let adm = admissible_from(phi);
    let span = phi.span();
    let mut per: Vec<Vec<Mat>> = Vec::with_capacity(span);
    for m in 0..span {
        match resolve(&comp(phi, m)?, max_len)? {
            ResolveOutcome::Resolved(r) => per.push(r.stages.iter().map(|s| s.mat().clone()).collect()),
            ResolveOutcome::Cycle { first, repeat, .. } => {
                return Ok(NestedTrial::open(
                    phi,
                    Verdict::Undecided,
                    json!({ "reason": "kernel cycle", "component": m, "first": first, "repeat": repeat }),
                ))
            }
            ResolveOutcome::Exhausted { .. } => {
                return Ok(NestedTrial::open(
                    phi,
                    Verdict::Undecided,
                    json!({ "reason": "bound reached", "component": m, "max_len": max_len }),
                ))
            }
        }
    }
    // Tail stages as scalar rules on the tail object of the previous stage.
    let tail_len = match phi.effective_tail() {
        MorTail::Scalar(c) if scalar_monic(&ring, &c) => 1,
        MorTail::Scalar(_) => {
            return Ok(NestedTrial::open(
                phi,
                Verdict::Undecided,
                json!({ "reason": "tail scalar is a zero divisor", "component": "tail" }),
            ))
        }
        MorTail::Zero if phi.dom().tail_rank() == 0 => 1,
        MorTail::Zero => 2,
    };
    let len = per.iter().map(Vec::len).max().unwrap_or(1).max(tail_len);
    if len > max_len {
        return Ok(NestedTrial::open(
            phi,
            Verdict::Undecided,
            json!({ "reason": "bound reached", "component": "tail", "max_len": max_len }),
        ));
    }
    let mut stages = vec![phi.clone()];
    for k in 1..len {
        let prev = stages[k - 1].clone();
        let mut objs = Vec::with_capacity(span);
        let mut mats = Vec::with_capacity(span);
        for (m, comp_stages) in per.iter().enumerate() {
            let below = prev.dom().at(m).rank();
            match comp_stages.get(k) {
                Some(x) => {
                    objs.push(Obj::graded(vec![adm.at(m) as u32; x.cols()]));
                    mats.push(x.clone());
                }
                None => {
                    objs.push(Obj::zero());
                    mats.push(Mat::zeros(ring.clone(), below, 0));
                }
            }
        }
        let (tail_obj, tail) = if k < tail_len {
            (ObjTail::Canonical(prev.dom().tail_rank()), MorTail::Scalar(ring.one()))
        } else {
            (ObjTail::Zero, MorTail::Zero)
        };
        stages.push(SeqMor::new(ring.clone(), SeqObj::new(objs, tail_obj), prev.dom().clone(), mats, tail)?);
    }
    Ok(NestedTrial::certified(phi, NestedCert::Resolution { stages, admissible: adm }))
}

/// Certify a sequence morphism at level `l` in the sequence category.
pub fn certify_sequence(phi: &SeqMor, l: usize, max_len: usize) -> Result<NestedTrial> {
    match l {
        0 => certify_vnr(phi),
        1 => certify_factor(phi),
        _ => certify_resolution(phi, max_len),
    }
}

/// Sample sequence morphisms of the model and certify each at level `l`.
/// Verdicts cover the stored components and the tail rules.
pub fn certify_s_l(model: &NestedModel, l: usize, policy: &NestedPolicy, exec: Exec) -> Result<NestedReport> {
    let ring = model.ring().clone();
    for m in &policy.explicit {
        if m.ring() != &ring {
            return Err(Error::RingMismatch(ring.spec().to_string(), m.ring().spec().to_string()));
        }
    }
    let max_len = policy.max_len.unwrap_or(l.max(1));
    let n_explicit = policy.explicit.len();
    let trials = exec
        .map(n_explicit + policy.trials, |i| {
            let phi = if i < n_explicit {
                policy.explicit[i].clone()
            } else {
                random_seq_mor(&ring, &mut trial_rng(policy.seed, (i - n_explicit) as u64), policy)
            };
            certify_sequence(&phi, l, max_len)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let aggregate = Verdict::fold(trials.iter().map(|t| t.verdict));
    Ok(NestedReport { ring: ring.spec().clone(), l, policy: policy.clone(), trials, aggregate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Ring, RingSpec};

    fn run(spec: RingSpec, l: usize) -> NestedReport {
        let model = NestedModel::graded_full(Ring::new(spec).unwrap());
        let policy = NestedPolicy { trials: 12, seed: 3, horizon: 8, ..NestedPolicy::default() };
        let r = certify_s_l(&model, l, &policy, Exec::Sequential).unwrap();
        assert!(r.reverify().unwrap());
        r
    }

    #[test]
    fn prime_field_level_zero() {
        assert_eq!(run(RingSpec::PrimeField(5), 0).aggregate, Verdict::Certified);
    }

    #[test]
    fn integers_level_one() {
        assert_eq!(run(RingSpec::Integers, 1).aggregate, Verdict::Certified);
    }

    #[test]
    fn integers_level_two() {
        assert_eq!(run(RingSpec::Integers, 2).aggregate, Verdict::Certified);
    }

    #[test]
    fn integers_level_zero_refuted() {
        let r = run(RingSpec::Integers, 0);
        assert_eq!(r.aggregate, Verdict::Refuted);
        let t = r.trials.iter().find(|t| t.verdict == Verdict::Refuted).unwrap();
        assert!(t.counterexample.as_ref().unwrap().verify().unwrap());
    }

    #[test]
    fn doubling_tail_is_refuted_at_the_tail() {
        let z = Ring::integers();
        let one = SeqObj::canonical(1);
        let phi = SeqMor::new(z.clone(), one.clone(), one, Vec::new(), MorTail::Scalar(z.from_i64(2))).unwrap();
        let t = certify_sequence(&phi, 0, 1).unwrap();
        assert_eq!(t.verdict, Verdict::Refuted);
        assert_eq!(t.counterexample.as_ref().unwrap().index, LiftIndex::Tail);
        assert!(t.reverify().unwrap());
    }

    #[test]
    fn parallel_matches_sequential() {
        let model = NestedModel::graded_full(Ring::integers());
        let policy = NestedPolicy { trials: 10, seed: 11, ..NestedPolicy::default() };
        let a = certify_s_l(&model, 2, &policy, Exec::Sequential).unwrap();
        let b = certify_s_l(&model, 2, &policy, Exec::Parallel).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn tampered_certificate_fails() {
        let r = run(RingSpec::Integers, 1);
        let t = r.trials.iter().find(|t| t.phi.span() > 0 && !t.phi.at(0).is_zero()).unwrap();
        let Some(NestedCert::Factorization { phi, f1, s, f0, admissible }) = t.certificate.clone() else { panic!() };
        let f0 = super::super::seq_add(&f0, &f0).unwrap();
        assert!(!NestedCert::Factorization { phi, f1, s, f0, admissible }.verify().unwrap());
    }
}
