//! Instance documents: `{"version", "ring", "payload"}` with strict parsing.

use addcat::ring::{Ring, RingRef, RingSpec};
use addcat::{Error, Result};
use serde_json::{Map, Value};

/// Major version understood by this build.
pub const MAJOR: u64 = 1;

const PAYLOADS: [&str; 6] =
    ["morphism", "laurent_morphism", "nil_object", "sequence_instance", "charseq_params", "batch_policy"];

pub struct InstanceDoc {
    pub ring: RingRef,
    pub kind: String,
    pub payload: Value,
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// `{"kind": <spec>}` where `<spec>` is `"Integers"`, `{"PrimeField": p}`,
/// `{"Product": [<spec>, w]}` and so on.
pub fn ring_from_json(v: &Value) -> Result<RingRef> {
    let obj = v.as_object().ok_or_else(|| parse_err("ring must be a map with a \"kind\" field"))?;
    reject_unknown(obj, &["kind"], "ring")?;
    let kind = obj.get("kind").ok_or_else(|| parse_err("ring needs \"kind\""))?;
    let spec: RingSpec = serde_json::from_value(kind.clone()).map_err(|e| parse_err(format!("ring kind: {e}")))?;
    Ring::new(spec)
}

pub fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], what: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(parse_err(format!("unknown {what} field {k:?}"))),
        None => Ok(()),
    }
}

fn check_version(v: &Value) -> Result<()> {
    let s = v.as_str().ok_or_else(|| parse_err("version must be a string"))?;
    let parts: Vec<&str> = s.split('.').collect();
    if parts.len() < 2
        || parts.len() > 3
        || parts.iter().any(|p| p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()))
    {
        return Err(parse_err(format!("version {s:?} is not of the form MAJOR.MINOR[.PATCH]")));
    }
    let major: u64 = parts[0].parse().map_err(|_| parse_err(format!("version {s:?} is out of range")))?;
    if major != MAJOR {
        return Err(parse_err(format!("version {s:?} is incompatible; this build reads {MAJOR}.x")));
    }
    Ok(())
}

impl InstanceDoc {
    pub fn parse(text: &str) -> Result<InstanceDoc> {
        let v: Value = serde_json::from_str(text).map_err(|e| parse_err(format!("instance is not valid JSON: {e}")))?;
        let obj = v.as_object().ok_or_else(|| parse_err("instance must be a map"))?;
        reject_unknown(obj, &["version", "ring", "payload"], "instance")?;
        check_version(obj.get("version").ok_or_else(|| parse_err("instance needs \"version\""))?)?;
        let ring = ring_from_json(obj.get("ring").ok_or_else(|| parse_err("instance needs \"ring\""))?)?;
        let payload = obj
            .get("payload")
            .and_then(Value::as_object)
            .ok_or_else(|| parse_err("instance needs a \"payload\" map"))?;
        if payload.len() != 1 {
            return Err(parse_err(format!("payload must hold exactly one of {}", PAYLOADS.join(", "))));
        }
        let (kind, body) = payload.iter().next().expect("one entry");
        if !PAYLOADS.contains(&kind.as_str()) {
            return Err(parse_err(format!("unknown payload kind {kind:?}")));
        }
        Ok(InstanceDoc { ring, kind: kind.clone(), payload: body.clone() })
    }

    /// The payload body, provided it has the expected kind.
    pub fn expect(&self, kind: &str) -> Result<&Value> {
        if self.kind == kind {
            Ok(&self.payload)
        } else {
            Err(parse_err(format!("this command needs a {kind:?} payload, got {:?}", self.kind)))
        }
    }

    /// A payload that is a single item or a list of items.
    pub fn items(&self, kind: &str) -> Result<Vec<&Value>> {
        Ok(match self.expect(kind)? {
            Value::Array(xs) => xs.iter().collect(),
            x => vec![x],
        })
    }
}
