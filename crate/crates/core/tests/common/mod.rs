#![allow(dead_code)]

use addcat::matcat::Obj;
use addcat::ring::{AutKind, Mat, Ring, RingAut, RingRef, RingSpec};
use addcat::sample::{random_mat, trial_rng};
use addcat::twisted::LaurentMor;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn ring(spec: RingSpec) -> RingRef {
    Ring::new(spec).expect("valid ring")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    trial_rng(seed, 0)
}

pub fn mat(ring: &RingRef, rows: &[&[i64]]) -> Mat {
    Mat::from_i64(ring.clone(), rows)
}

pub fn rand_mat(ring: &RingRef, rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    random_mat(ring, rng, rows, cols, 3)
}

/// A selection covering every ring kind.
pub fn sample_rings() -> Vec<RingRef> {
    vec![
        ring(RingSpec::Integers),
        ring(RingSpec::Rationals),
        ring(RingSpec::PrimeField(5)),
        ring(RingSpec::FiniteField(2, 2)),
        ring(RingSpec::IntegersMod(4)),
        ring(RingSpec::IntegersMod(6)),
        ring(RingSpec::Product(Box::new(RingSpec::Integers), 2)),
    ]
}

/// One automorphism of each kind: identity on Z, Frobenius on F4 and the
/// coordinate swap on Z x Z.
pub fn sample_auts() -> Vec<RingAut> {
    vec![
        RingAut::identity(ring(RingSpec::Integers)),
        RingAut::new(ring(RingSpec::FiniteField(2, 2)), AutKind::Frobenius(1)).unwrap(),
        RingAut::new(ring(RingSpec::Product(Box::new(RingSpec::Integers), 2)), AutKind::Rotation(1)).unwrap(),
    ]
}

/// Random Laurent morphism with coefficients in degrees `lo..=hi`, each
/// present with probability 2/3.
pub fn rand_laurent(aut: &RingAut, rng: &mut ChaCha8Rng, dom: usize, cod: usize, lo: i64, hi: i64) -> LaurentMor {
    let ring = aut.ring().clone();
    let mut coeffs = Vec::new();
    for d in lo..=hi {
        if rng.gen_range(0..3) > 0 {
            coeffs.push((d, rand_mat(&ring, rng, cod, dom)));
        }
    }
    LaurentMor::new(Obj::new(dom), Obj::new(cod), aut.clone(), coeffs).unwrap()
}

/// Every matrix of the given shape over a finite ring.
pub fn all_mats(ring: &RingRef, rows: usize, cols: usize) -> Vec<Mat> {
    let elems = ring.elements(64).expect("small finite ring");
    let n = rows * cols;
    let total = elems.len().pow(n as u32);
    (0..total)
        .map(|mut k| {
            let data = (0..n)
                .map(|_| {
                    let e = elems[k % elems.len()].clone();
                    k /= elems.len();
                    e
                })
                .collect();
            Mat::from_vec(ring.clone(), rows, cols, data).unwrap()
        })
        .collect()
}

/// An invertible matrix as a product of elementary operations.
pub fn unimodular(r: &RingRef, g: &mut ChaCha8Rng, n: usize) -> Mat {
    let mut u = Mat::identity(r.clone(), n);
    for _ in 0..3 * n {
        let (i, j) = (g.gen_range(0..n), g.gen_range(0..n));
        if i == j {
            continue;
        }
        let mut e = Mat::identity(r.clone(), n);
        e.set(i, j, r.random(g, 3));
        u = e.mul(&u).unwrap();
    }
    u
}

/// Exactness at the middle object by enumeration: the composite vanishes
/// and every kernel vector of `f1` is hit by `f0`.
pub fn brute_exact(f0: &Mat, f1: &Mat) -> bool {
    let ring = f0.ring();
    if !f1.mul(f0).unwrap().is_zero() {
        return false;
    }
    let image: Vec<Mat> = all_mats(ring, f0.cols(), 1).iter().map(|y| f0.mul(y).unwrap()).collect();
    all_mats(ring, f1.cols(), 1).into_iter().filter(|x| f1.mul(x).unwrap().is_zero()).all(|x| image.contains(&x))
}

/// `f ∘ σ(f) ∘ ⋯ ∘ σ^{n-1}(f)` recomputed from scratch.
pub fn twisted_power(aut: &RingAut, f: &Mat, n: usize) -> Mat {
    let mut acc = Mat::identity(f.ring().clone(), f.rows());
    for k in 0..n {
        acc = acc.mul(&aut.pow(k as i64).apply_mat(f).unwrap()).unwrap();
    }
    acc
}
