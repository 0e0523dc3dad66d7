use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matcat::{Mor, Obj};
use crate::ring::{Mat, RingAut};

/// A pair `(A, φ)` with `φ : Φ(A) -> A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilObject {
    pub obj: Obj,
    pub phi_mor: Mor,
    pub aut: RingAut,
}

impl NilObject {
    pub fn new(obj: Obj, phi: Mat, aut: RingAut) -> Result<NilObject> {
        if phi.rows() != obj.rank() || phi.cols() != obj.rank() {
            return Err(Error::Dimension(format!(
                "nil endomorphism is {}x{} on an object of rank {}",
                phi.rows(),
                phi.cols(),
                obj.rank()
            )));
        }
        if phi.ring() != aut.ring() {
            return Err(Error::RingMismatch(aut.ring().spec().to_string(), phi.ring().spec().to_string()));
        }
        let phi_mor = Mor::new(obj.clone(), obj.clone(), phi)?;
        Ok(NilObject { obj, phi_mor, aut })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "aut": serde_json::to_value(self.aut.kind()).expect("aut kind"),
            "obj": self.obj.to_json(),
            "phi_mor": self.phi_mor.mat().to_json(),
        })
    }
}

/// Default search bound `4 * rank` (at least 1).
pub fn default_nil_bound(nil: &NilObject) -> usize {
    (4 * nil.obj.rank()).max(1)
}

/// `f^(n) = f ∘ Φ(f) ∘ ⋯ ∘ Φ^{n-1}(f)`, for `n >= 1`.
pub fn nil_power(nil: &NilObject, n: usize) -> Result<Mat> {
    assert!(n >= 1, "nil_power needs n >= 1");
    let f = nil.phi_mor.mat();
    let mut acc = f.clone();
    for k in 1..n {
        acc = acc.mul(&nil.aut.pow(k as i64).apply_mat(f)?)?;
    }
    Ok(acc)
}

/// Minimal `n <= bound` with `f^(n) = 0`; `None` means undecided within the bound.
pub fn nil_degree(nil: &NilObject, bound: usize) -> Result<Option<usize>> {
    let f = nil.phi_mor.mat();
    let mut acc = f.clone();
    for n in 1..=bound {
        if n > 1 {
            acc = acc.mul(&nil.aut.pow((n - 1) as i64).apply_mat(f)?)?;
        }
        if acc.is_zero() {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
