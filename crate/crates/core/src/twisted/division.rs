//! One step of leading-coefficient division among polynomial morphisms,
//! plus the search that finds the coefficients and a driver that repeats it.

use super::{degree_data, laurent_compose, LaurentMor};
use crate::error::{Error, Result};
use crate::ring::linalg::solve_linear;
use crate::ring::Mat;

/// Given polynomial `f : Z -> A`, generators `f_i : Z_i -> A` of degrees
/// `d_i <= d(f)` and matrices `φ_i : Z -> Z_i` with
/// `R(f) = Σ R(f_i) φ_i`, return `f - Σ f_i ∘ φ̃_i` where
/// `φ̃_i = σ^{-d_i}(φ_i) t^{d - d_i}`. The result has strictly lower degree.
pub fn division_step(f: &LaurentMor, gens: &[LaurentMor], lifts: &[Mat]) -> Result<LaurentMor> {
    if gens.len() != lifts.len() {
        return Err(Error::Dimension(format!("{} generators but {} lift coefficients", gens.len(), lifts.len())));
    }
    let fd = degree_data(f)?;
    let Some(d) = fd.degree else {
        return Err(Error::InvalidLift("cannot divide the zero morphism".into()));
    };
    let ring = f.ring().clone();
    let mut check = Mat::zeros(ring.clone(), f.cod().rank(), f.dom().rank());
    let mut degrees = Vec::with_capacity(gens.len());
    for (i, (g, phi)) in gens.iter().zip(lifts).enumerate() {
        if g.aut() != f.aut() {
            return Err(Error::AutMismatch(format!("generator {i} uses {}", g.aut().kind())));
        }
        if g.cod() != f.cod() {
            return Err(Error::ObjectMismatch(format!("generator {i} has a different codomain")));
        }
        if phi.rows() != g.dom().rank() || phi.cols() != f.dom().rank() {
            return Err(Error::Dimension(format!(
                "lift {i} is {}x{}, expected {}x{}",
                phi.rows(),
                phi.cols(),
                g.dom().rank(),
                f.dom().rank()
            )));
        }
        let gd = degree_data(g)?;
        let di = match gd.degree {
            Some(di) if di <= d => di,
            Some(di) if !phi.is_zero() => {
                return Err(Error::InvalidLift(format!("generator {i} has degree {di} above {d}")));
            }
            _ => {
                degrees.push(None);
                continue;
            }
        };
        check = check.add(&gd.leading.mul(phi)?)?;
        degrees.push(Some(di));
    }
    if check != fd.leading {
        return Err(Error::InvalidLift("leading coefficients do not combine to R(f)".into()));
    }
    let mut rest = f.clone();
    for ((g, phi), di) in gens.iter().zip(lifts).zip(degrees) {
        let Some(di) = di else { continue };
        if phi.is_zero() {
            continue;
        }
        let twisted = f.aut().pow(-di).apply_mat(phi)?;
        let tilde = LaurentMor::monomial(f.dom().clone(), g.dom().clone(), f.aut().clone(), d - di, twisted)?;
        rest = rest.sub(&laurent_compose(g, &tilde)?)?;
    }
    debug_assert!(rest.max_degree().is_none_or(|e| e < d));
    Ok(rest)
}

/// Solve `R(f) = Σ R(f_i) φ_i` over generators of degree `<= d(f)`.
/// `None` when no such coefficients exist.
pub fn find_lift(f: &LaurentMor, gens: &[LaurentMor]) -> Result<Option<Vec<Mat>>> {
    let fd = degree_data(f)?;
    let Some(d) = fd.degree else { return Ok(None) };
    let ring = f.ring().clone();
    let mut usable = Vec::new();
    let mut stacked = Mat::zeros(ring.clone(), f.cod().rank(), 0);
    for (i, g) in gens.iter().enumerate() {
        let gd = degree_data(g)?;
        if gd.degree.is_some_and(|e| e <= d) {
            stacked = stacked.hstack(&gd.leading)?;
            usable.push(i);
        }
    }
    let Some(x) = solve_linear(&stacked, &fd.leading)? else { return Ok(None) };
    let mut out: Vec<Mat> = gens.iter().map(|g| Mat::zeros(ring.clone(), g.dom().rank(), f.dom().rank())).collect();
    let mut row = 0;
    for i in usable {
        let k = gens[i].dom().rank();
        out[i] = x.submatrix(row..row + k, 0..x.cols());
        row += k;
    }
    Ok(Some(out))
}

/// Outcome of repeated division: the degree of each intermediate
/// dividend and the remainder where the process stopped.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub degrees: Vec<i64>,
    pub remainder: LaurentMor,
}

impl Reduction {
    /// True when the dividend was reduced all the way to zero.
    pub fn complete(&self) -> bool {
        self.remainder.is_zero()
    }
}

/// Divide until the remainder is zero or its leading coefficient is not
/// reachable from the generators. Terminates because the degree drops.
pub fn reduce(f: &LaurentMor, gens: &[LaurentMor]) -> Result<Reduction> {
    let mut cur = f.clone();
    let mut degrees = Vec::new();
    while let Some(d) = degree_data(&cur)?.degree {
        let Some(lifts) = find_lift(&cur, gens)? else { break };
        degrees.push(d);
        cur = division_step(&cur, gens, &lifts)?;
    }
    Ok(Reduction { degrees, remainder: cur })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcat::Obj;
    use crate::ring::{AutKind, Ring, RingAut, RingElem, RingSpec};

    #[test]
    fn single_generator_step() {
        let z = Ring::integers();
        let id = RingAut::identity(z.clone());
        let o = Obj::new(1);
        let m = |v: i64| Mat::from_i64(z.clone(), &[&[v]]);
        let f = LaurentMor::new(o.clone(), o.clone(), id.clone(), [(0, m(1)), (2, m(6))]).unwrap();
        let g = LaurentMor::new(o.clone(), o.clone(), id, [(0, m(5)), (1, m(3))]).unwrap();
        let r = division_step(&f, std::slice::from_ref(&g), &[m(2)]).unwrap();
        // f - g * 2t = (1 + 6t^2) - (10t + 6t^2)
        assert_eq!(r.coeffs().len(), 2);
        assert_eq!(r.coeff(1), m(-10));
        assert_eq!(r.coeff(0), m(1));
        assert!(division_step(&f, std::slice::from_ref(&g), &[m(1)]).is_err());
    }

    #[test]
    fn twisted_step_over_f4() {
        let f4 = Ring::new(RingSpec::FiniteField(2, 2)).unwrap();
        let fr = RingAut::new(f4.clone(), AutKind::Frobenius(1)).unwrap();
        let o = Obj::new(1);
        let x = RingElem::Poly(vec![0, 1]);
        let c = |e: RingElem| Mat::from_rows(f4.clone(), vec![vec![e]]).unwrap();
        let f = LaurentMor::monomial(o.clone(), o.clone(), fr.clone(), 3, c(x.clone())).unwrap();
        let g = LaurentMor::new(o.clone(), o.clone(), fr, [(1, c(f4.one())), (0, c(x))]).unwrap();
        let red = reduce(&f, std::slice::from_ref(&g)).unwrap();
        assert!(red.degrees.windows(2).all(|w| w[1] < w[0]));
        assert!(red.remainder.max_degree().is_none_or(|d| d < 1));
        assert_eq!(red.degrees, vec![3, 2, 1]);
    }

    #[test]
    fn lift_search_respects_degrees() {
        let z = Ring::integers();
        let id = RingAut::identity(z.clone());
        let o = Obj::new(1);
        let m = |v: i64| Mat::from_i64(z.clone(), &[&[v]]);
        let f = LaurentMor::monomial(o.clone(), o.clone(), id.clone(), 1, m(4)).unwrap();
        let high = LaurentMor::monomial(o.clone(), o.clone(), id.clone(), 2, m(1)).unwrap();
        let low = LaurentMor::monomial(o.clone(), o.clone(), id, 0, m(2)).unwrap();
        let lifts = find_lift(&f, &[high.clone(), low.clone()]).unwrap().unwrap();
        assert!(lifts[0].is_zero());
        assert_eq!(lifts[1], m(2));
        assert!(division_step(&f, &[high, low], &lifts).unwrap().is_zero());
    }
}
