//! Exactness and the regular-coherence certifiers for matrix categories.
//!
//! Exactness at `A_1` of `A_2 -f0-> A_1 -f1-> A_0` quantifies over all test
//! objects. For matrix categories it reduces to the rank-one generator: the
//! composite vanishes and every kernel column of `f1` is a column
//! combination of `f0`.

mod batch;
mod cert;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matcat::{compose, Mor, Obj};
use crate::ring::linalg::{kernel_gens, smith_normal_form, solve_linear};
use crate::ring::Mat;

pub use batch::{certify_morphism, certify_uniform, BatchReport, SamplingPolicy, TrialOutcome};
pub use cert::{Certificate, Counterexample};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactStatus {
    Exact,
    NotExact,
    Undecided,
}

/// Outcome of the exactness test. `recipe` solves `f0 · X = kernel_gens(f1)`;
/// `witness` is a kernel column outside the image of `f0`; `composite` is
/// set when `f1 ∘ f0` is already nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactnessVerdict {
    pub status: ExactStatus,
    pub recipe: Option<Mat>,
    pub witness: Option<Mat>,
    pub composite: Option<Mat>,
    pub reason: Option<String>,
}

impl ExactnessVerdict {
    pub fn is_exact(&self) -> bool {
        self.status == ExactStatus::Exact
    }

    /// Turn the verdict into a certificate or counterexample for `(f0, f1)`.
    pub fn evidence(&self, f0: &Mor, f1: &Mor) -> (Option<Certificate>, Option<Counterexample>) {
        match self.status {
            ExactStatus::Exact => (
                Some(Certificate::Exact {
                    f0: f0.clone(),
                    f1: f1.clone(),
                    recipe: self.recipe.clone().expect("exact verdicts carry a recipe"),
                }),
                None,
            ),
            ExactStatus::NotExact => {
                let cx = match (&self.composite, &self.witness) {
                    (Some(c), _) => {
                        Counterexample::NonzeroComposite { f0: f0.clone(), f1: f1.clone(), composite: c.clone() }
                    }
                    (None, Some(w)) => Counterexample::NotExact { f0: f0.clone(), f1: f1.clone(), column: w.clone() },
                    (None, None) => unreachable!("refutations carry evidence"),
                };
                (None, Some(cx))
            }
            ExactStatus::Undecided => (None, None),
        }
    }
}

pub fn is_exact_at(f0: &Mor, f1: &Mor) -> Result<ExactnessVerdict> {
    let comp = compose(f1, f0)?;
    if !comp.is_zero() {
        return Ok(ExactnessVerdict {
            status: ExactStatus::NotExact,
            recipe: None,
            witness: None,
            composite: Some(comp.mat().clone()),
            reason: None,
        });
    }
    let k = kernel_gens(f1.mat());
    match solve_linear(f0.mat(), &k) {
        Ok(Some(x)) => Ok(ExactnessVerdict {
            status: ExactStatus::Exact,
            recipe: Some(x),
            witness: None,
            composite: None,
            reason: None,
        }),
        Ok(None) => {
            for j in 0..k.cols() {
                let col = k.column(j);
                if solve_linear(f0.mat(), &col)?.is_none() {
                    return Ok(ExactnessVerdict {
                        status: ExactStatus::NotExact,
                        recipe: None,
                        witness: Some(col),
                        composite: None,
                        reason: None,
                    });
                }
            }
            unreachable!("a jointly unsolvable system has an unsolvable column")
        }
        Err(Error::UnsupportedRing { op, ring }) => Ok(ExactnessVerdict {
            status: ExactStatus::Undecided,
            recipe: None,
            witness: None,
            composite: None,
            reason: Some(format!("{op} is not available over {ring}")),
        }),
        Err(e) => Err(e),
    }
}

/// `g` with `f ∘ g ∘ f = f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VnrWitness {
    pub f: Mor,
    pub g: Mor,
}

impl VnrWitness {
    pub fn verify(&self) -> Result<bool> {
        let fgf = self.f.mat().mul(self.g.mat())?.mul(self.f.mat())?;
        Ok(self.g.dom() == self.f.cod() && self.g.cod() == self.f.dom() && fgf == *self.f.mat())
    }

    pub fn to_json(&self) -> Value {
        json!({ "f": self.f.to_json(), "g": self.g.to_json() })
    }
}

/// Solve `f g f = f` as a linear system in the entries of `g`.
pub fn vnr_witness(f: &Mor) -> Result<Option<VnrWitness>> {
    let ring = f.ring().clone();
    let a = f.mat();
    let (m, n) = (a.rows(), a.cols());
    let wrap = |g: Mat| Mor::new(f.cod().clone(), f.dom().clone(), g).map(|g| VnrWitness { f: f.clone(), g });
    if a.is_zero() {
        return wrap(Mat::zeros(ring, n, m)).map(Some);
    }
    // (f g f)[i][j] = Σ_{a,b} f[i][a] g[a][b] f[b][j]; unknown g[a][b] sits at a*m + b
    let mut sys = Mat::zeros(ring.clone(), m * n, n * m);
    let mut rhs = Mat::zeros(ring.clone(), m * n, 1);
    for i in 0..m {
        for j in 0..n {
            let row = i * n + j;
            rhs.set(row, 0, a.get(i, j).clone());
            for (p, q) in (0..n).flat_map(|p| (0..m).map(move |q| (p, q))) {
                let c = ring.mul(a.get(i, p), a.get(q, j));
                if !ring.is_zero(&c) {
                    sys.set(row, p * m + q, c);
                }
            }
        }
    }
    let Some(x) = solve_linear(&sys, &rhs)? else { return Ok(None) };
    let g = Mat::from_vec(ring, n, m, (0..n * m).map(|k| x.get(k, 0).clone()).collect())?;
    wrap(g).map(Some)
}

/// `f = f0 ∘ f1` through `B`, with `f1 ∘ s = Id_B` and `f0` monic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizationCert {
    pub f: Mor,
    pub f1: Mor,
    pub s: Mor,
    pub f0: Mor,
}

impl FactorizationCert {
    pub fn middle(&self) -> &Obj {
        self.f1.cod()
    }

    pub fn verify(&self) -> Result<bool> {
        let ring = self.f.ring().clone();
        let b = self.middle().rank();
        Ok(compose(&self.f0, &self.f1)?.mat() == self.f.mat()
            && self.f1.mat().mul(self.s.mat())? == Mat::identity(ring, b)
            && kernel_gens(self.f0.mat()).cols() == 0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "f": self.f.to_json(),
            "f1": self.f1.to_json(),
            "s": self.s.to_json(),
            "f0": self.f0.to_json(),
            "middle_rank": self.middle().rank(),
        })
    }
}

/// Smith-based image factorization: `f = U D V` gives `f0 = U_r D_r`,
/// `f1 = V^r` (first `r` rows) and `s = (V⁻¹)_r` (first `r` columns).
pub fn factor_monic_splitepi(f: &Mor) -> Result<Option<FactorizationCert>> {
    let ring = f.ring().clone();
    if !(ring.is_field() || ring.is_integers()) {
        return Err(Error::UnsupportedRing { op: "factor_monic_splitepi", ring: ring.spec().to_string() });
    }
    let cert = factor_with_grade(f, None)?;
    Ok(Some(cert).filter(|c| kernel_gens(c.f0.mat()).cols() == 0))
}

/// The Smith factorization; `grade` puts every summand of the middle
/// object at that grade.
pub(crate) fn factor_with_grade(f: &Mor, grade: Option<u32>) -> Result<FactorizationCert> {
    let a = f.mat();
    let (m, n) = (a.rows(), a.cols());
    let snf = smith_normal_form(a)?;
    let r = snf.rank;
    let d_r = snf.d.submatrix(0..r, 0..r);
    let f0 = snf.u.submatrix(0..m, 0..r).mul(&d_r)?;
    let f1 = snf.v.submatrix(0..r, 0..n);
    let s = snf.v_inv.submatrix(0..n, 0..r);
    let middle = match grade {
        Some(g) => Obj::graded(vec![g; r]),
        None => Obj::new(r),
    };
    Ok(FactorizationCert {
        f: f.clone(),
        f1: Mor::new(f.dom().clone(), middle.clone(), f1)?,
        s: Mor::new(middle.clone(), f.dom().clone(), s)?,
        f0: Mor::new(middle, f.cod().clone(), f0)?,
    })
}

/// A finite resolution `0 -> A_n -> ⋯ -> A_1 -> A_0`; `stages[0]` is `f_1`
/// and the last stage is monic. The length is the number of stages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolutionCert {
    pub stages: Vec<Mor>,
}

impl ResolutionCert {
    pub fn length(&self) -> usize {
        self.stages.len()
    }

    pub fn verify(&self) -> Result<bool> {
        let Some(top) = self.stages.last() else { return Ok(false) };
        if kernel_gens(top.mat()).cols() != 0 {
            return Ok(false);
        }
        for w in self.stages.windows(2) {
            if w[1].cod() != w[0].dom() || !is_exact_at(&w[1], &w[0])?.is_exact() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "length": self.length(),
            "stages": self.stages.iter().map(Mor::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Result of iterating kernel inclusions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolveOutcome {
    Resolved(ResolutionCert),
    /// Stage `repeat` equals the earlier stage `first`, so the iteration
    /// would continue forever.
    Cycle {
        stages: Vec<Mor>,
        first: usize,
        repeat: usize,
    },
    /// The bound was reached without a monic stage.
    Exhausted {
        stages: Vec<Mor>,
    },
}

impl ResolveOutcome {
    pub fn cert(&self) -> Option<&ResolutionCert> {
        match self {
            ResolveOutcome::Resolved(c) => Some(c),
            _ => None,
        }
    }
}

/// Append kernel inclusions to `f1` until a stage is monic, at most
/// `max_len` stages in total.
pub fn resolve(f1: &Mor, max_len: usize) -> Result<ResolveOutcome> {
    if max_len == 0 {
        return Err(Error::Dimension("resolve needs max_len >= 1".into()));
    }
    let mut stages = vec![f1.clone()];
    loop {
        let cur = stages.last().expect("nonempty");
        let k = kernel_gens(cur.mat());
        if k.cols() == 0 {
            return Ok(ResolveOutcome::Resolved(ResolutionCert { stages }));
        }
        if stages.len() == max_len {
            return Ok(ResolveOutcome::Exhausted { stages });
        }
        let next = Mor::new(Obj::new(k.cols()), cur.dom().clone(), k)?;
        if let Some(first) = stages.iter().position(|s| s.mat() == next.mat()) {
            let repeat = stages.len();
            stages.push(next);
            return Ok(ResolveOutcome::Cycle { stages, first, repeat });
        }
        stages.push(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Ring, RingRef, RingSpec};

    fn mor(ring: &RingRef, rows: &[&[i64]]) -> Mor {
        Mor::from_mat(Mat::from_i64(ring.clone(), rows))
    }

    #[test]
    fn kernel_inclusion_is_exact() {
        let z = Ring::integers();
        let f1 = mor(&z, &[&[1, 2, 3], &[2, 4, 6]]);
        let k = kernel_gens(f1.mat());
        let f0 = Mor::new(Obj::new(k.cols()), f1.dom().clone(), k).unwrap();
        let v = is_exact_at(&f0, &f1).unwrap();
        assert!(v.is_exact());
        let (cert, _) = v.evidence(&f0, &f1);
        assert!(cert.unwrap().verify().unwrap());
    }

    #[test]
    fn doubling_into_zero() {
        let z = Ring::integers();
        let f0 = mor(&z, &[&[2]]);
        let f1 = Mor::zero(z.clone(), &Obj::new(1), &Obj::new(0));
        let v = is_exact_at(&f0, &f1).unwrap();
        assert_eq!(v.status, ExactStatus::NotExact);
        assert_eq!(v.witness, Some(Mat::from_i64(z, &[&[1]])));
        let q = Ring::rationals();
        let f0 = mor(&q, &[&[2]]);
        let f1 = Mor::zero(q.clone(), &Obj::new(1), &Obj::new(0));
        assert!(is_exact_at(&f0, &f1).unwrap().is_exact());
    }

    #[test]
    fn nonzero_composite_is_reported() {
        let z = Ring::integers();
        let v = is_exact_at(&mor(&z, &[&[1]]), &mor(&z, &[&[3]])).unwrap();
        assert_eq!(v.composite, Some(Mat::from_i64(z, &[&[3]])));
    }

    #[test]
    fn vnr_examples() {
        let z = Ring::integers();
        let q = Ring::rationals();
        let w = vnr_witness(&Mor::zero(z.clone(), &Obj::new(2), &Obj::new(3))).unwrap().unwrap();
        assert!(w.g.is_zero() && w.verify().unwrap());
        let w = vnr_witness(&mor(&q, &[&[2]])).unwrap().unwrap();
        assert_eq!(w.g.mat().get(0, 0), &q.elem_from_json(&json!("1/2")).unwrap());
        assert!(vnr_witness(&mor(&z, &[&[2]])).unwrap().is_none());
        let w = vnr_witness(&mor(&z, &[&[1, 2], &[3, 4], &[5, 6]])).unwrap();
        assert!(w.is_none_or(|w| w.verify().unwrap()));
    }

    #[test]
    fn factorization_examples() {
        let z = Ring::integers();
        let c = factor_monic_splitepi(&mor(&z, &[&[2]])).unwrap().unwrap();
        assert_eq!(
            (c.f1.mat().clone(), c.f0.mat().clone(), c.s.mat().clone()),
            (Mat::from_i64(z.clone(), &[&[1]]), Mat::from_i64(z.clone(), &[&[2]]), Mat::from_i64(z.clone(), &[&[1]]),)
        );
        assert!(c.verify().unwrap());
        let c = factor_monic_splitepi(&mor(&z, &[&[0]])).unwrap().unwrap();
        assert_eq!(c.middle().rank(), 0);
        assert!(c.verify().unwrap());
        let q = Ring::rationals();
        let c = factor_monic_splitepi(&mor(&q, &[&[1, 0], &[0, 0]])).unwrap().unwrap();
        assert_eq!(c.f0.mat(), &Mat::from_i64(q.clone(), &[&[1], &[0]]));
        assert_eq!(c.f1.mat(), &Mat::from_i64(q.clone(), &[&[1, 0]]));
        assert_eq!(c.s.mat(), &Mat::from_i64(q.clone(), &[&[1], &[0]]));
        let z4 = Ring::new(RingSpec::IntegersMod(4)).unwrap();
        assert!(matches!(factor_monic_splitepi(&mor(&z4, &[&[2]])), Err(Error::UnsupportedRing { .. })));
    }

    #[test]
    fn resolve_examples() {
        let z = Ring::integers();
        let r = resolve(&mor(&z, &[&[2]]), 3).unwrap();
        assert_eq!(r.cert().map(ResolutionCert::length), Some(1));
        let r = resolve(&mor(&z, &[&[1, 1]]), 3).unwrap();
        let cert = r.cert().unwrap();
        assert_eq!(cert.length(), 2);
        assert!(cert.verify().unwrap());
        let z4 = Ring::new(RingSpec::IntegersMod(4)).unwrap();
        match resolve(&mor(&z4, &[&[2]]), 6).unwrap() {
            ResolveOutcome::Cycle { first, repeat, .. } => assert_eq!((first, repeat), (0, 1)),
            other => panic!("expected a cycle, got {other:?}"),
        }
        assert!(matches!(resolve(&mor(&z, &[&[1, 1]]), 1).unwrap(), ResolveOutcome::Exhausted { .. }));
    }
}
