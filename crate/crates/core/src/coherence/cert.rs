use serde_json::{json, Value};

use super::{is_exact_at, vnr_witness, FactorizationCert, ResolutionCert, VnrWitness};
use crate::error::Result;
use crate::matcat::{IdemSplit, Mor};
use crate::ring::linalg::{kernel_gens, solve_linear};
use crate::ring::Mat;

/// Positive evidence. Every variant re-checks itself by matrix arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Exact {
        f0: Mor,
        f1: Mor,
        recipe: Mat,
    },
    Vnr(VnrWitness),
    Factorization(FactorizationCert),
    Resolution(ResolutionCert),
    IdemSplit(IdemSplit),
    /// Per-factor certificates for a morphism over a product ring, plus the
    /// glued certificate when the factors can be glued into one.
    Product {
        f: Mor,
        parts: Vec<Certificate>,
        assembled: Option<Box<Certificate>>,
    },
}

/// Negative evidence, equally re-checkable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Counterexample {
    NonzeroComposite { f0: Mor, f1: Mor, composite: Mat },
    NotExact { f0: Mor, f1: Mor, column: Mat },
    NoVnr { f: Mor },
    Product { f: Mor, component: usize, inner: Box<Counterexample> },
}

fn same_parts(f: &Mor, subjects: impl Iterator<Item = Option<Mat>>) -> bool {
    let Some(parts) = f.mat().components() else { return false };
    let subjects: Vec<Option<Mat>> = subjects.collect();
    subjects.len() == parts.len() && parts.iter().zip(&subjects).all(|(p, s)| s.as_ref() == Some(p))
}

impl Certificate {
    /// The morphism the certificate is about.
    pub fn subject(&self) -> &Mor {
        match self {
            Certificate::Exact { f1, .. } => f1,
            Certificate::Vnr(w) => &w.f,
            Certificate::Factorization(c) => &c.f,
            Certificate::Resolution(r) => &r.stages[0],
            Certificate::IdemSplit(s) => &s.p,
            Certificate::Product { f, .. } => f,
        }
    }

    pub fn verify(&self) -> Result<bool> {
        match self {
            Certificate::Exact { f0, f1, recipe } => {
                Ok(f1.mat().mul(f0.mat())?.is_zero() && f0.mat().mul(recipe)? == kernel_gens(f1.mat()))
            }
            Certificate::Vnr(w) => w.verify(),
            Certificate::Factorization(c) => c.verify(),
            Certificate::Resolution(r) => r.verify(),
            Certificate::IdemSplit(s) => s.verify(),
            Certificate::Product { f, parts, assembled } => {
                if !same_parts(f, parts.iter().map(|p| Some(p.subject().mat().clone()))) {
                    return Ok(false);
                }
                for p in parts {
                    if !p.verify()? {
                        return Ok(false);
                    }
                }
                match assembled {
                    Some(a) => Ok(a.subject() == f && a.verify()?),
                    None => Ok(true),
                }
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Exact { .. } => "exact",
            Certificate::Vnr(_) => "vnr",
            Certificate::Factorization(_) => "factorization",
            Certificate::Resolution(_) => "resolution",
            Certificate::IdemSplit(_) => "idem_split",
            Certificate::Product { .. } => "product",
        }
    }

    pub fn to_json(&self) -> Value {
        let body = match self {
            Certificate::Exact { f0, f1, recipe } => {
                json!({ "f0": f0.to_json(), "f1": f1.to_json(), "recipe": recipe.to_json() })
            }
            Certificate::Vnr(w) => w.to_json(),
            Certificate::Factorization(c) => c.to_json(),
            Certificate::Resolution(r) => r.to_json(),
            Certificate::IdemSplit(s) => s.to_json(),
            Certificate::Product { f, parts, assembled } => json!({
                "f": f.to_json(),
                "parts": parts.iter().map(Certificate::to_json).collect::<Vec<_>>(),
                "assembled": assembled.as_ref().map(|a| a.to_json()),
            }),
        };
        json!({ "kind": self.kind(), "data": body })
    }
}

impl Counterexample {
    pub fn subject(&self) -> &Mor {
        match self {
            Counterexample::NonzeroComposite { f1, .. } | Counterexample::NotExact { f1, .. } => f1,
            Counterexample::NoVnr { f } | Counterexample::Product { f, .. } => f,
        }
    }

    pub fn verify(&self) -> Result<bool> {
        match self {
            Counterexample::NonzeroComposite { f0, f1, composite } => {
                let c = f1.mat().mul(f0.mat())?;
                Ok(!c.is_zero() && c == *composite)
            }
            Counterexample::NotExact { f0, f1, column } => Ok(f1.mat().mul(f0.mat())?.is_zero()
                && f1.mat().mul(column)?.is_zero()
                && solve_linear(f0.mat(), column)?.is_none()
                && !is_exact_at(f0, f1)?.is_exact()),
            Counterexample::NoVnr { f } => Ok(vnr_witness(f)?.is_none()),
            Counterexample::Product { f, component, inner } => {
                let Some(parts) = f.mat().components() else { return Ok(false) };
                Ok(parts.get(*component) == Some(inner.subject().mat()) && inner.verify()?)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Counterexample::NonzeroComposite { .. } => "nonzero_composite",
            Counterexample::NotExact { .. } => "not_exact",
            Counterexample::NoVnr { .. } => "no_vnr",
            Counterexample::Product { .. } => "product_component",
        }
    }

    pub fn to_json(&self) -> Value {
        let body = match self {
            Counterexample::NonzeroComposite { f0, f1, composite } => {
                json!({ "f0": f0.to_json(), "f1": f1.to_json(), "composite": composite.to_json() })
            }
            Counterexample::NotExact { f0, f1, column } => {
                json!({ "f0": f0.to_json(), "f1": f1.to_json(), "column": column.to_json() })
            }
            Counterexample::NoVnr { f } => json!({ "f": f.to_json() }),
            Counterexample::Product { f, component, inner } => {
                json!({ "f": f.to_json(), "component": component, "inner": inner.to_json() })
            }
        };
        json!({ "kind": self.kind(), "data": body })
    }
}
