use addcat::charseq::{build_char_seq, verify_char_seq};
use addcat::coherence::{certify_morphism, certify_uniform, is_exact_at, BatchReport, ExactStatus, SamplingPolicy};
use addcat::exec::Exec;
use addcat::matcat::{divides, idem_split, Mor, Obj};
use addcat::nested::{
    certify_s_l, lift_in_l, lift_in_s, limit_eq, LiftOutcome, NestedModel, NestedPolicy, NestedReport, SeqMor,
};
use addcat::report::Verdict;
use addcat::ring::{AutKind, Mat, RingAut, RingRef};
use addcat::twisted::{
    default_nil_bound, degree_data, division_step, find_lift, laurent_compose, laurent_normalize, nil_degree,
    LaurentMor, NilObject,
};
use addcat::{Error, Result};
use serde_json::{json, Map, Value};

use crate::doc::{reject_unknown, InstanceDoc};

/// The document printed for every completed command.
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub certificate: Value,
    pub counterexample: Value,
    pub bounds: Value,
    pub note: Option<Value>,
}

impl Report {
    fn new(command: &str, verdict: Verdict, bounds: Value) -> Report {
        Report {
            command: command.into(),
            verdict,
            certificate: Value::Null,
            counterexample: Value::Null,
            bounds,
            note: None,
        }
    }

    fn certified(command: &str, certificate: Value, bounds: Value) -> Report {
        Report { certificate, ..Report::new(command, Verdict::Certified, bounds) }
    }

    fn refuted(command: &str, counterexample: Value, bounds: Value) -> Report {
        Report { counterexample, ..Report::new(command, Verdict::Refuted, bounds) }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("verdict".into(), json!(self.verdict));
        m.insert("certificate".into(), self.certificate.clone());
        m.insert("counterexample".into(), self.counterexample.clone());
        m.insert("bounds".into(), self.bounds.clone());
        if let Some(n) = &self.note {
            m.insert("note".into(), n.clone());
        }
        Value::Object(m)
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn mors(doc: &InstanceDoc, n: Option<usize>) -> Result<Vec<Mor>> {
    let items = doc.items("morphism")?;
    if let Some(n) = n {
        if items.len() != n {
            return Err(parse_err(format!("expected {n} morphism(s), got {}", items.len())));
        }
    }
    items.into_iter().map(|v| Mor::from_json(doc.ring.clone(), v)).collect()
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| parse_err(format!("missing field {key:?}")))
}

pub fn check_exact(doc: &InstanceDoc) -> Result<Report> {
    let m = mors(doc, Some(2))?;
    let v = is_exact_at(&m[0], &m[1])?;
    let (cert, cx) = v.evidence(&m[0], &m[1]);
    let bounds = json!({});
    Ok(match v.status {
        ExactStatus::Exact => Report::certified("check-exact", cert.expect("exact").to_json(), bounds),
        ExactStatus::NotExact => Report::refuted("check-exact", cx.expect("not exact").to_json(), bounds),
        ExactStatus::Undecided => {
            Report { note: v.reason.map(Value::from), ..Report::new("check-exact", Verdict::Undecided, bounds) }
        }
    })
}

pub struct CertifyFlags {
    pub l: usize,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub max_len: Option<usize>,
}

fn batch_report(command: &str, r: &BatchReport, bounds: Value) -> Report {
    let counterexample = r.trials.iter().enumerate().find(|(_, (_, o))| o.verdict == Verdict::Refuted).map_or(
        Value::Null,
        |(i, (m, o))| json!({ "index": i, "morphism": m.to_json(), "counterexample": o.to_json()["counterexample"] }),
    );
    Report { certificate: r.to_json(), counterexample, ..Report::new(command, r.aggregate, bounds) }
}

pub fn certify(ring: &RingRef, doc: Option<&InstanceDoc>, flags: &CertifyFlags, exec: Exec) -> Result<Report> {
    let mut policy = match doc {
        None => SamplingPolicy::default(),
        Some(d) if d.kind == "batch_policy" => SamplingPolicy::from_json(ring.clone(), &d.payload)?,
        Some(d) if d.kind == "morphism" && !d.payload.is_array() => {
            let f = Mor::from_json(ring.clone(), &d.payload)?;
            let max_len = flags.max_len.unwrap_or(flags.l.max(1));
            let o = certify_morphism(&f, flags.l, max_len)?;
            let bounds = json!({ "l": flags.l, "max_len": max_len });
            let certificate = o.certificate.as_ref().map_or(Value::Null, |c| c.to_json());
            let counterexample = o.counterexample.as_ref().map_or(Value::Null, |c| c.to_json());
            return Ok(Report {
                certificate,
                counterexample,
                note: o.note,
                ..Report::new("certify", o.verdict, bounds)
            });
        }
        Some(d) => SamplingPolicy { trials: 0, explicit: mors(d, None)?, ..SamplingPolicy::default() },
    };
    if let Some(t) = flags.trials {
        policy.trials = t;
    }
    if let Some(s) = flags.seed {
        policy.seed = s;
    }
    if flags.max_len.is_some() {
        policy.max_len = flags.max_len;
    }
    let r = certify_uniform(ring, &policy, flags.l, exec)?;
    let bounds = json!({
        "l": flags.l,
        "trials": policy.trials,
        "seed": policy.seed,
        "max_len": policy.max_len.unwrap_or(flags.l.max(1)),
    });
    Ok(batch_report("certify", &r, bounds))
}

fn aut_from(ring: &RingRef, v: Option<&Value>) -> Result<RingAut> {
    let kind = match v {
        None => AutKind::Identity,
        Some(Value::String(s)) => s.parse()?,
        Some(x) => serde_json::from_value(x.clone()).map_err(|e| parse_err(format!("aut: {e}")))?,
    };
    RingAut::new(ring.clone(), kind)
}

pub fn nil(doc: &InstanceDoc, bound: Option<usize>) -> Result<Report> {
    let obj = doc.expect("nil_object")?.as_object().ok_or_else(|| parse_err("nil_object must be a map"))?;
    reject_unknown(obj, &["aut", "obj", "phi_mor"], "nil_object")?;
    let aut = aut_from(&doc.ring, obj.get("aut"))?;
    let o = Obj::from_json(field(obj, "obj")?)?;
    let phi = Mat::from_json(doc.ring.clone(), field(obj, "phi_mor")?)?;
    let n = NilObject::new(o, phi, aut)?;
    let bound = bound.unwrap_or_else(|| default_nil_bound(&n));
    let bounds = json!({ "bound": bound });
    Ok(match nil_degree(&n, bound)? {
        Some(k) => Report::certified("nil-degree", json!({ "nil_object": n.to_json(), "degree": k }), bounds),
        None => Report {
            note: Some(json!(format!("no vanishing twisted power up to {bound}"))),
            ..Report::new("nil-degree", Verdict::Undecided, bounds)
        },
    })
}

fn laurents(doc: &InstanceDoc) -> Result<Vec<LaurentMor>> {
    doc.items("laurent_morphism")?.into_iter().map(|v| LaurentMor::from_json(doc.ring.clone(), v)).collect()
}

pub fn laurent(op: &str, doc: &InstanceDoc) -> Result<Report> {
    let ls = laurents(doc)?;
    let command = format!("laurent {op}");
    let need = |n: usize| -> Result<()> {
        if (op == "divide" && ls.len() < n) || (op != "divide" && ls.len() != n) {
            return Err(parse_err(format!("laurent {op} needs {n} morphism(s), got {}", ls.len())));
        }
        Ok(())
    };
    match op {
        "compose" => {
            need(2)?;
            let h = laurent_compose(&ls[0], &ls[1])?;
            Ok(Report::certified(
                &command,
                json!({ "g": ls[0].to_json(), "f": ls[1].to_json(), "composite": h.to_json() }),
                json!({}),
            ))
        }
        "normalize" => {
            need(1)?;
            let (s, p) = laurent_normalize(&ls[0])?;
            Ok(Report::certified(
                &command,
                json!({ "f": ls[0].to_json(), "shift": s, "polynomial": p.to_json() }),
                json!({}),
            ))
        }
        "divide" => {
            need(2)?;
            let (f, gens) = (&ls[0], &ls[1..]);
            let mut cur = f.clone();
            let mut steps = Vec::new();
            while let Some(d) = degree_data(&cur)?.degree {
                let Some(lifts) = find_lift(&cur, gens)? else { break };
                cur = division_step(&cur, gens, &lifts)?;
                steps.push(json!({ "degree": d, "lifts": lifts.iter().map(Mat::to_json).collect::<Vec<_>>() }));
            }
            let cert = json!({
                "f": f.to_json(),
                "generators": gens.iter().map(LaurentMor::to_json).collect::<Vec<_>>(),
                "steps": steps,
                "remainder": cur.to_json(),
            });
            let bounds = json!({ "steps": steps.len() });
            if cur.is_zero() {
                Ok(Report::certified(&command, cert, bounds))
            } else {
                let note = json!("the leading coefficient of the remainder is not reachable from the generators");
                Ok(Report { certificate: cert, note: Some(note), ..Report::new(&command, Verdict::Undecided, bounds) })
            }
        }
        other => Err(parse_err(format!("unknown laurent operation {other:?}"))),
    }
}

pub struct CharseqFlags {
    pub depth: Option<usize>,
    pub rank: Option<usize>,
    pub aut: Option<String>,
}

pub fn charseq(ring: &RingRef, doc: Option<&InstanceDoc>, flags: &CharseqFlags) -> Result<Report> {
    let params = match doc {
        Some(d) => {
            d.expect("charseq_params")?.as_object().cloned().ok_or_else(|| parse_err("charseq_params must be a map"))?
        }
        None => Map::new(),
    };
    reject_unknown(&params, &["rank", "aut", "depth"], "charseq_params")?;
    let nat = |k: &str| -> Result<Option<usize>> {
        params
            .get(k)
            .map(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| parse_err(format!("{k} must be a natural number"))))
            .transpose()
    };
    let rank = flags.rank.or(nat("rank")?).unwrap_or(1);
    let depth = flags.depth.or(nat("depth")?).unwrap_or(4);
    let aut = match &flags.aut {
        Some(s) => RingAut::new(ring.clone(), s.parse()?)?,
        None => aut_from(ring, params.get("aut"))?,
    };
    let report = verify_char_seq(&build_char_seq(&Obj::new(rank), &aut, depth)?)?;
    let bounds = json!({ "rank": rank, "depth": depth, "aut": aut.kind() });
    Ok(if report.passed() {
        Report::certified("charseq-verify", report.to_json(), bounds)
    } else {
        Report::refuted("charseq-verify", report.to_json(), bounds)
    })
}

pub struct NestedFlags {
    pub l: usize,
    pub horizon: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub max_len: Option<usize>,
    pub strict: bool,
}

fn seq_instance(doc: &InstanceDoc, allowed: &[&str]) -> Result<Map<String, Value>> {
    let obj = doc
        .expect("sequence_instance")?
        .as_object()
        .cloned()
        .ok_or_else(|| parse_err("sequence_instance must be a map"))?;
    reject_unknown(&obj, allowed, "sequence_instance")?;
    Ok(obj)
}

fn check_model(name: Option<&Value>) -> Result<()> {
    match name {
        None => Ok(()),
        Some(Value::String(s)) if s == "graded" || s == "graded_full" => Ok(()),
        Some(other) => Err(Error::UnsupportedRing { op: "nested model", ring: other.to_string() }),
    }
}

fn nested_report(r: &NestedReport, bounds: Value) -> Report {
    let counterexample = r
        .trials
        .iter()
        .enumerate()
        .find(|(_, t)| t.verdict == Verdict::Refuted)
        .and_then(|(i, t)| t.counterexample.as_ref().map(|c| json!({ "index": i, "counterexample": c.to_json() })))
        .unwrap_or(Value::Null);
    Report { certificate: r.to_json(), counterexample, ..Report::new("nested certify", r.aggregate, bounds) }
}

pub fn nested(
    op: &str,
    ring: &RingRef,
    doc: Option<&InstanceDoc>,
    model: Option<&str>,
    flags: &NestedFlags,
    exec: Exec,
) -> Result<Report> {
    let command = format!("nested {op}");
    let needs_doc = || doc.ok_or_else(|| parse_err(format!("{command} needs an instance document")));
    match op {
        "certify" => {
            check_model(model.map(Value::from).as_ref())?;
            let mut policy = match doc {
                Some(d) => {
                    let obj = seq_instance(d, &["model", "policy"])?;
                    check_model(obj.get("model"))?;
                    match obj.get("policy") {
                        Some(p) => NestedPolicy::from_json(ring.clone(), p)?,
                        None => NestedPolicy::default(),
                    }
                }
                None => NestedPolicy::default(),
            };
            if let Some(h) = flags.horizon {
                policy.horizon = h;
            }
            if let Some(t) = flags.trials {
                policy.trials = t;
            }
            if let Some(s) = flags.seed {
                policy.seed = s;
            }
            if flags.max_len.is_some() {
                policy.max_len = flags.max_len;
            }
            let r = certify_s_l(&NestedModel::graded_full(ring.clone()), flags.l, &policy, exec)?;
            let bounds = json!({
                "l": flags.l,
                "horizon": policy.horizon,
                "trials": policy.trials,
                "seed": policy.seed,
                "max_len": policy.max_len.unwrap_or(flags.l.max(1)),
            });
            Ok(nested_report(&r, bounds))
        }
        "lift" => {
            let obj = seq_instance(needs_doc()?, &["mu", "f_next", "f_cur"])?;
            let get = |k: &str| SeqMor::from_json(ring.clone(), field(&obj, k)?);
            let (mu, f_next, f_cur) = (get("mu")?, get("f_next")?, get("f_cur")?);
            let out = if flags.strict { lift_in_s(&mu, &f_next, &f_cur)? } else { lift_in_l(&mu, &f_next, &f_cur)? };
            let bounds = json!({ "mode": if flags.strict { "strict" } else { "limit" } });
            Ok(match out {
                LiftOutcome::Lifted(c) => Report::certified(&command, c.to_json(), bounds),
                LiftOutcome::Blocked(i) => Report::refuted(
                    &command,
                    json!({ "obstruction": i.to_json(), "mu": mu.to_json(), "f_next": f_next.to_json() }),
                    bounds,
                ),
            })
        }
        "limit-eq" => {
            let obj = seq_instance(needs_doc()?, &["f", "g"])?;
            let f = SeqMor::from_json(ring.clone(), field(&obj, "f")?)?;
            let g = SeqMor::from_json(ring.clone(), field(&obj, "g")?)?;
            let from = f.span().max(g.span());
            let evidence = json!({ "f": f.to_json(), "g": g.to_json(), "tails_from": from });
            Ok(if limit_eq(&f, &g)? {
                Report::certified(&command, evidence, json!({}))
            } else {
                Report::refuted(&command, evidence, json!({}))
            })
        }
        other => Err(parse_err(format!("unknown nested operation {other:?}"))),
    }
}

pub fn idem(doc: &InstanceDoc) -> Result<Report> {
    let p = mors(doc, Some(1))?.remove(0);
    match idem_split(&p) {
        Ok(s) => Ok(Report::certified("idem-split", s.to_json(), json!({}))),
        Err(Error::NotIdempotent) => {
            let sq = if p.dom() == p.cod() { p.mat().mul(p.mat())?.to_json() } else { Value::Null };
            Ok(Report::refuted("idem-split", json!({ "p": p.to_json(), "p_squared": sq }), json!({})))
        }
        Err(e) => Err(e),
    }
}

pub fn divides_cmd(doc: &InstanceDoc) -> Result<Report> {
    let m = mors(doc, Some(2))?;
    Ok(match divides(&m[0], &m[1])? {
        Some(h) => Report::certified(
            "divides",
            json!({ "f": m[0].to_json(), "g": m[1].to_json(), "h": h.to_json() }),
            json!({}),
        ),
        None => Report::refuted("divides", json!({ "f": m[0].to_json(), "g": m[1].to_json(), "h": null }), json!({})),
    })
}
