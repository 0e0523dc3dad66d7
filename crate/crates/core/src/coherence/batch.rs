use serde_json::{json, Map, Value};

use super::{factor_monic_splitepi, resolve, vnr_witness, Certificate, Counterexample, ResolveOutcome, VnrWitness};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::matcat::Mor;
use crate::report::Verdict;
use crate::ring::{Mat, RingRef, RingSpec};
use crate::sample::{random_shape_mat, trial_rng};

/// How a batch is sampled. `explicit` morphisms are checked first, then
/// `trials` random matrices with entries bounded by `entry_bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingPolicy {
    pub trials: usize,
    pub seed: u64,
    pub max_rows: usize,
    pub max_cols: usize,
    pub entry_bound: u64,
    pub max_len: Option<usize>,
    pub explicit: Vec<Mor>,
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        SamplingPolicy {
            trials: 100,
            seed: 0,
            max_rows: 3,
            max_cols: 3,
            entry_bound: 3,
            max_len: None,
            explicit: Vec::new(),
        }
    }
}

impl SamplingPolicy {
    pub fn to_json(&self) -> Value {
        json!({
            "trials": self.trials,
            "seed": self.seed,
            "max_rows": self.max_rows,
            "max_cols": self.max_cols,
            "entry_bound": self.entry_bound,
            "max_len": self.max_len,
            "explicit": self.explicit.iter().map(Mor::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(ring: RingRef, v: &Value) -> Result<SamplingPolicy> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("batch policy must be a map".into()))?;
        let mut p = SamplingPolicy::default();
        let nat =
            |key: &str, x: &Value| x.as_u64().ok_or_else(|| Error::Parse(format!("{key} must be a natural number")));
        for (key, x) in obj {
            match key.as_str() {
                "trials" => p.trials = nat(key, x)? as usize,
                "seed" => p.seed = nat(key, x)?,
                "max_rows" => p.max_rows = nat(key, x)? as usize,
                "max_cols" => p.max_cols = nat(key, x)? as usize,
                "entry_bound" => p.entry_bound = nat(key, x)?,
                "max_len" => p.max_len = if x.is_null() { None } else { Some(nat(key, x)? as usize) },
                "explicit" => {
                    let items = x.as_array().ok_or_else(|| Error::Parse("explicit must be a list".into()))?;
                    p.explicit = items.iter().map(|m| Mor::from_json(ring.clone(), m)).collect::<Result<_>>()?;
                }
                other => return Err(Error::Parse(format!("unknown batch policy field {other:?}"))),
            }
        }
        Ok(p)
    }
}

/// The verdict for one morphism with its evidence. `note` explains
/// undecided and unsupported verdicts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub verdict: Verdict,
    pub certificate: Option<Certificate>,
    pub counterexample: Option<Counterexample>,
    pub note: Option<Value>,
}

impl TrialOutcome {
    fn certified(c: Certificate) -> Self {
        TrialOutcome { verdict: Verdict::Certified, certificate: Some(c), counterexample: None, note: None }
    }

    fn refuted(c: Counterexample) -> Self {
        TrialOutcome { verdict: Verdict::Refuted, certificate: None, counterexample: Some(c), note: None }
    }

    fn open(verdict: Verdict, note: Value) -> Self {
        TrialOutcome { verdict, certificate: None, counterexample: None, note: Some(note) }
    }

    /// Re-check whatever evidence the outcome carries.
    pub fn reverify(&self) -> Result<bool> {
        match self.verdict {
            Verdict::Certified => self.certificate.as_ref().map_or(Ok(false), Certificate::verify),
            Verdict::Refuted => self.counterexample.as_ref().map_or(Ok(false), Counterexample::verify),
            Verdict::Undecided | Verdict::Unsupported => Ok(true),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict,
            "certificate": self.certificate.as_ref().map(Certificate::to_json),
            "counterexample": self.counterexample.as_ref().map(Counterexample::to_json),
            "note": self.note,
        })
    }
}

/// Certify `f` at level `l`: a von Neumann witness for `l = 0`, a monic /
/// split-epi factorization for `l = 1` and a resolution with at most
/// `max_len` stages otherwise. Product rings are handled factor by factor.
pub fn certify_morphism(f: &Mor, l: usize, max_len: usize) -> Result<TrialOutcome> {
    let ring = f.ring().clone();
    if ring.product_parts().is_some() {
        return certify_product(f, l, max_len);
    }
    match l {
        0 => Ok(match vnr_witness(f)? {
            Some(w) => TrialOutcome::certified(Certificate::Vnr(w)),
            None => TrialOutcome::refuted(Counterexample::NoVnr { f: f.clone() }),
        }),
        1 => match factor_monic_splitepi(f) {
            Ok(Some(c)) => Ok(TrialOutcome::certified(Certificate::Factorization(c))),
            Ok(None) => Ok(TrialOutcome::open(Verdict::Undecided, json!({ "reason": "no split factorization found" }))),
            Err(Error::UnsupportedRing { op, ring }) => Ok(TrialOutcome::open(
                Verdict::Unsupported,
                json!({ "reason": format!("{op} is not available over {ring}") }),
            )),
            Err(e) => Err(e),
        },
        _ => Ok(match resolve(f, max_len)? {
            ResolveOutcome::Resolved(r) => TrialOutcome::certified(Certificate::Resolution(r)),
            ResolveOutcome::Cycle { first, repeat, stages } => TrialOutcome::open(
                Verdict::Undecided,
                json!({ "reason": "kernel cycle", "first": first, "repeat": repeat, "stages": stages.len() }),
            ),
            ResolveOutcome::Exhausted { stages } => TrialOutcome::open(
                Verdict::Undecided,
                json!({ "reason": "bound reached", "max_len": max_len, "stages": stages.len() }),
            ),
        }),
    }
}

fn certify_product(f: &Mor, l: usize, max_len: usize) -> Result<TrialOutcome> {
    let ring = f.ring().clone();
    let parts = f.mat().components().expect("product ring");
    let outcomes: Vec<TrialOutcome> =
        parts.into_iter().map(|m| certify_morphism(&Mor::from_mat(m), l, max_len)).collect::<Result<_>>()?;
    if let Some(i) = outcomes.iter().position(|o| o.verdict == Verdict::Refuted) {
        let inner = outcomes[i].counterexample.clone().expect("refutations carry evidence");
        return Ok(TrialOutcome::refuted(Counterexample::Product {
            f: f.clone(),
            component: i,
            inner: Box::new(inner),
        }));
    }
    let worst = Verdict::fold(outcomes.iter().map(|o| o.verdict));
    if worst != Verdict::Certified {
        let i = outcomes.iter().position(|o| o.verdict == worst).expect("present");
        return Ok(TrialOutcome::open(worst, json!({ "component": i, "inner": outcomes[i].note })));
    }
    let parts: Vec<Certificate> = outcomes.into_iter().map(|o| o.certificate.expect("certified")).collect();
    let assembled = if l == 0 {
        let gs: Vec<Mat> = parts
            .iter()
            .map(|p| match p {
                Certificate::Vnr(w) => w.g.mat().clone(),
                _ => unreachable!("level 0 yields witnesses"),
            })
            .collect();
        let g = Mor::new(f.cod().clone(), f.dom().clone(), Mat::from_components(ring, &gs)?)?;
        Some(Box::new(Certificate::Vnr(VnrWitness { f: f.clone(), g })))
    } else {
        None
    };
    Ok(TrialOutcome::certified(Certificate::Product { f: f.clone(), parts, assembled }))
}

/// One batch: the sampled morphisms with their outcomes, in trial order.
#[derive(Clone, Debug)]
pub struct BatchReport {
    pub ring: RingSpec,
    pub l: usize,
    pub policy: SamplingPolicy,
    pub trials: Vec<(Mor, TrialOutcome)>,
    pub aggregate: Verdict,
}

impl BatchReport {
    pub fn reverify(&self) -> Result<bool> {
        for (_, o) in &self.trials {
            if !o.reverify()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.trials.iter().filter(|(_, o)| o.verdict == v).count()
    }

    pub fn to_json(&self) -> Value {
        let verdicts: Vec<Value> = self
            .trials
            .iter()
            .enumerate()
            .map(|(i, (m, o))| {
                let mut entry = match o.to_json() {
                    Value::Object(map) => map,
                    _ => Map::new(),
                };
                entry.insert("index".into(), json!(i));
                entry.insert("morphism".into(), m.to_json());
                Value::Object(entry)
            })
            .collect();
        json!({
            "instance": { "ring": self.ring, "policy": self.policy.to_json() },
            "l": self.l,
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

/// Run the level-`l` certifier on the policy's explicit morphisms and on
/// seeded random samples. Trials are independent and may run in parallel;
/// the report lists them in trial order either way.
pub fn certify_uniform(ring: &RingRef, policy: &SamplingPolicy, l: usize, exec: Exec) -> Result<BatchReport> {
    for m in &policy.explicit {
        if m.ring() != ring {
            return Err(Error::RingMismatch(ring.spec().to_string(), m.ring().spec().to_string()));
        }
    }
    let max_len = policy.max_len.unwrap_or(l.max(1));
    let n_explicit = policy.explicit.len();
    let results = exec.map(n_explicit + policy.trials, |i| -> Result<(Mor, TrialOutcome)> {
        let f = if i < n_explicit {
            policy.explicit[i].clone()
        } else {
            let mut rng = trial_rng(policy.seed, (i - n_explicit) as u64);
            Mor::from_mat(random_shape_mat(ring, &mut rng, policy.max_rows, policy.max_cols, policy.entry_bound))
        };
        let outcome = certify_morphism(&f, l, max_len)?;
        Ok((f, outcome))
    });
    let trials = results.into_iter().collect::<Result<Vec<_>>>()?;
    let aggregate = Verdict::fold(trials.iter().map(|(_, o)| o.verdict));
    Ok(BatchReport { ring: ring.spec().clone(), l, policy: policy.clone(), trials, aggregate })
}
