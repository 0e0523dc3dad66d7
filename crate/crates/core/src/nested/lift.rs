use serde_json::{json, Value};

use super::{admissible_from, seq_compose, solve_scalar, AdmissibleFn, MorTail, SeqMor};
use crate::error::{Error, Result};
use crate::ring::linalg::solve_linear;
use crate::ring::Mat;

/// Where a lift failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftIndex {
    Component(usize),
    Tail,
}

impl LiftIndex {
    pub fn to_json(self) -> Value {
        match self {
            LiftIndex::Component(m) => json!(m),
            LiftIndex::Tail => json!("tail"),
        }
    }
}

/// `f_next ∘ nu = mu` in every component from `threshold` on, with `nu`
/// zero below it. A threshold of 0 is a lift in the sequence category.
#[derive(Clone, Debug)]
pub struct LiftCert {
    pub mu: SeqMor,
    pub f_next: SeqMor,
    pub nu: SeqMor,
    pub threshold: usize,
    pub admissible: AdmissibleFn,
}

impl LiftCert {
    pub fn verify(&self) -> Result<bool> {
        let ring = self.mu.ring();
        if !self.nu.dom().same_as(self.mu.dom()) || !self.nu.cod().same_as(self.f_next.dom()) {
            return Ok(false);
        }
        let span = self.mu.span().max(self.f_next.span()).max(self.nu.span()).max(self.threshold);
        for m in 0..span {
            let nu = self.nu.at(m);
            let ok = if m < self.threshold { nu.is_zero() } else { self.f_next.at(m).mul(&nu)? == self.mu.at(m) };
            if !ok {
                return Ok(false);
            }
        }
        let tail_ok = match (self.f_next.effective_tail(), self.nu.effective_tail(), self.mu.effective_tail()) {
            (_, _, MorTail::Zero) => true,
            (MorTail::Scalar(a), MorTail::Scalar(c), MorTail::Scalar(b)) => ring.mul(&a, &c) == b,
            _ => false,
        };
        Ok(tail_ok && self.admissible.is_admissible() && self.admissible.covers(&self.nu))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "mu": self.mu.to_json(),
            "f_next": self.f_next.to_json(),
            "nu": self.nu.to_json(),
            "threshold": self.threshold,
            "admissible": { "values": self.admissible.values, "offset": self.admissible.offset },
        })
    }
}

#[derive(Clone, Debug)]
pub enum LiftOutcome {
    Lifted(Box<LiftCert>),
    Blocked(LiftIndex),
}

impl LiftOutcome {
    pub fn cert(&self) -> Option<&LiftCert> {
        match self {
            LiftOutcome::Lifted(c) => Some(c),
            LiftOutcome::Blocked(_) => None,
        }
    }
}

struct Setup {
    span: usize,
    composite: SeqMor,
}

fn setup(mu: &SeqMor, f_next: &SeqMor, f_cur: &SeqMor) -> Result<Setup> {
    if !f_next.cod().same_as(mu.cod()) {
        return Err(Error::ObjectMismatch("f_next must land where mu lands".into()));
    }
    let composite = seq_compose(f_cur, mu)?;
    let span = mu.span().max(f_next.span()).max(f_cur.span());
    Ok(Setup { span, composite })
}

/// Solve the tail rule of `nu` from those of `f_next` and `mu`.
fn tail_lift(mu: &SeqMor, f_next: &SeqMor) -> Result<Option<MorTail>> {
    match (mu.effective_tail(), f_next.effective_tail()) {
        (MorTail::Zero, _) => Ok(Some(MorTail::Zero)),
        (MorTail::Scalar(_), MorTail::Zero) => Ok(None),
        (MorTail::Scalar(b), MorTail::Scalar(a)) => Ok(solve_scalar(mu.ring(), &a, &b)?.map(MorTail::Scalar)),
    }
}

fn finish(mu: &SeqMor, f_next: &SeqMor, entries: Vec<Mat>, tail: MorTail, threshold: usize) -> Result<LiftCert> {
    let nu = SeqMor::new(mu.ring().clone(), mu.dom().clone(), f_next.dom().clone(), entries, tail)?;
    let admissible = admissible_from(f_next).join(&admissible_from(mu)).join(&admissible_from(&nu));
    Ok(LiftCert { mu: mu.clone(), f_next: f_next.clone(), nu, threshold, admissible })
}

/// Exactness in the sequence category: given `f_cur ∘ mu = 0`, solve
/// `f_next ∘ nu = mu` component by component and on the tail.
pub fn lift_in_s(mu: &SeqMor, f_next: &SeqMor, f_cur: &SeqMor) -> Result<LiftOutcome> {
    let Setup { span, composite } = setup(mu, f_next, f_cur)?;
    if let Some(m) = (0..span).find(|&m| !composite.at(m).is_zero()) {
        return Err(Error::Precondition { index: m.to_string(), detail: "f_cur ∘ mu is nonzero".into() });
    }
    if composite.effective_tail() != MorTail::Zero {
        return Err(Error::Precondition { index: "tail".into(), detail: "f_cur ∘ mu has a nonzero tail".into() });
    }
    let mut entries = Vec::with_capacity(span);
    for m in 0..span {
        match solve_linear(&f_next.at(m), &mu.at(m))? {
            Some(x) => entries.push(x),
            None => return Ok(LiftOutcome::Blocked(LiftIndex::Component(m))),
        }
    }
    let Some(tail) = tail_lift(mu, f_next)? else { return Ok(LiftOutcome::Blocked(LiftIndex::Tail)) };
    Ok(LiftOutcome::Lifted(Box::new(finish(mu, f_next, entries, tail, 0)?)))
}

/// Exactness in the limit category: components where the composite is
/// nonzero or no lift exists are discarded, which is allowed as long as
/// there are finitely many of them. The lift vanishes below the threshold.
pub fn lift_in_l(mu: &SeqMor, f_next: &SeqMor, f_cur: &SeqMor) -> Result<LiftOutcome> {
    let Setup { span, composite } = setup(mu, f_next, f_cur)?;
    if composite.effective_tail() != MorTail::Zero {
        return Err(Error::Precondition { index: "tail".into(), detail: "f_cur ∘ mu is not eventually zero".into() });
    }
    let Some(tail) = tail_lift(mu, f_next)? else { return Ok(LiftOutcome::Blocked(LiftIndex::Tail)) };
    let mut solved = Vec::with_capacity(span);
    let mut threshold = 0;
    for m in 0..span {
        let x = if composite.at(m).is_zero() { solve_linear(&f_next.at(m), &mu.at(m))? } else { None };
        if x.is_none() {
            threshold = m + 1;
        }
        solved.push(x);
    }
    let entries = solved
        .into_iter()
        .enumerate()
        .map(|(m, x)| match x {
            Some(x) if m >= threshold => x,
            _ => Mat::zeros(mu.ring().clone(), f_next.dom().at(m).rank(), mu.dom().at(m).rank()),
        })
        .collect();
    Ok(LiftOutcome::Lifted(Box::new(finish(mu, f_next, entries, tail, threshold)?)))
}

/// `g` with `f = f_prime ∘ g` in every component, if one exists.
pub fn seq_divides(f: &SeqMor, f_prime: &SeqMor) -> Result<Option<SeqMor>> {
    if !f.cod().same_as(f_prime.cod()) {
        return Err(Error::ObjectMismatch("divisibility needs a common codomain".into()));
    }
    let span = f.span().max(f_prime.span());
    let mut entries = Vec::with_capacity(span);
    for m in 0..span {
        match solve_linear(&f_prime.at(m), &f.at(m))? {
            Some(x) => entries.push(x),
            None => return Ok(None),
        }
    }
    let Some(tail) = tail_lift(f, f_prime)? else { return Ok(None) };
    SeqMor::new(f.ring().clone(), f.dom().clone(), f_prime.dom().clone(), entries, tail).map(Some)
}
