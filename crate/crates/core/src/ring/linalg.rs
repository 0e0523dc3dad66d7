//! Exact linear-algebra decision procedures.
//!
//! Fields use Gaussian elimination with first-nonzero pivots. The integers
//! go through Smith normal form with minimal-absolute-value pivots.
//! `IntegersMod(n)` is solved over `Z` with the congruence columns `n*Id`
//! adjoined, and product rings are handled one factor at a time.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::integer::{self, IMat};
use super::{Mat, RingElem, RingRef};
use crate::error::{Error, Result};

/// Smith form `A = U * D * V` with `U`, `V` invertible.
#[derive(Debug, Clone)]
pub struct Snf {
    pub u: Mat,
    pub d: Mat,
    pub v: Mat,
    pub u_inv: Mat,
    pub v_inv: Mat,
    pub rank: usize,
}

fn to_imat(a: &Mat) -> IMat {
    (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| match a.get(i, j) {
                    RingElem::Int(x) => x.clone(),
                    RingElem::Res(r) => BigInt::from(*r),
                    other => panic!("not liftable to Z: {other:?}"),
                })
                .collect()
        })
        .collect()
}

fn from_imat(ring: &RingRef, a: &IMat, rows: usize, cols: usize) -> Mat {
    let data = a.iter().flat_map(|r| r.iter().map(|v| ring.from_bigint(v))).collect();
    Mat::from_vec(ring.clone(), rows, cols, data).expect("shape")
}

/// Reduced row echelon form over a field. Returns the reduced matrix and
/// the pivot columns.
pub fn rref(a: &Mat) -> (Mat, Vec<usize>) {
    let ring = a.ring().clone();
    debug_assert!(ring.is_field());
    let (m, n) = (a.rows(), a.cols());
    let mut r: Vec<Vec<RingElem>> = (0..m).map(|i| (0..n).map(|j| a.get(i, j).clone()).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        let Some(p) = (row..m).find(|&i| !ring.is_zero(&r[i][col])) else { continue };
        r.swap(row, p);
        let inv = ring.inv(&r[row][col]).expect("field");
        for v in r[row].iter_mut() {
            *v = ring.mul(&inv, v);
        }
        let pivot_row = r[row].clone();
        for (i, other) in r.iter_mut().enumerate() {
            if i == row || ring.is_zero(&other[col]) {
                continue;
            }
            let f = other[col].clone();
            for (v, pv) in other.iter_mut().zip(&pivot_row) {
                *v = ring.sub(v, &ring.mul(&f, pv));
            }
        }
        pivots.push(col);
        row += 1;
    }
    let out = Mat::from_vec(ring, m, n, r.into_iter().flatten().collect()).expect("shape");
    (out, pivots)
}

fn check_same_ring(a: &Mat, b: &Mat) -> Result<()> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch(a.ring().spec().to_string(), b.ring().spec().to_string()));
    }
    Ok(())
}

/// Find `X` with `A * X = B`, or `None` when no solution exists over the ring.
pub fn solve_linear(a: &Mat, b: &Mat) -> Result<Option<Mat>> {
    check_same_ring(a, b)?;
    if a.rows() != b.rows() {
        return Err(Error::Dimension(format!("A is {}x{} but B has {} rows", a.rows(), a.cols(), b.rows())));
    }
    let ring = a.ring().clone();
    if ring.is_field() {
        return Ok(solve_field(a, b));
    }
    if ring.is_integers() {
        return Ok(solve_integers(a, b));
    }
    if let Some(n) = ring.modulus() {
        return Ok(solve_mod(a, b, n));
    }
    if ring.product_parts().is_some() {
        let (ac, bc) = (a.components().expect("product"), b.components().expect("product"));
        let mut parts = Vec::with_capacity(ac.len());
        for (x, y) in ac.iter().zip(&bc) {
            match solve_linear(x, y)? {
                Some(s) => parts.push(s),
                None => return Ok(None),
            }
        }
        return Mat::from_components(ring, &parts).map(Some);
    }
    Err(Error::UnsupportedRing { op: "solve_linear", ring: ring.spec().to_string() })
}

fn solve_field(a: &Mat, b: &Mat) -> Option<Mat> {
    let ring = a.ring().clone();
    let n = a.cols();
    let aug = a.hstack(b).expect("same rows");
    let (r, pivots) = rref(&aug);
    if pivots.iter().any(|&c| c >= n) {
        return None;
    }
    let mut x = Mat::zeros(ring, n, b.cols());
    for (i, &c) in pivots.iter().enumerate() {
        for j in 0..b.cols() {
            x.set(c, j, r.get(i, n + j).clone());
        }
    }
    Some(x)
}

fn solve_integers_raw(a: &IMat, b: &IMat, m: usize, n: usize, k: usize) -> Option<IMat> {
    let s = integer::snf(a, m, n);
    let pb = integer::mul(&s.p, b, m, k);
    let mut y: IMat = vec![vec![BigInt::zero(); k]; n];
    for i in 0..m {
        for j in 0..k {
            if i < s.rank {
                let (q, r) = num_integer::Integer::div_rem(&pb[i][j], &s.d[i][i]);
                if !r.is_zero() {
                    return None;
                }
                y[i][j] = q;
            } else if !pb[i][j].is_zero() {
                return None;
            }
        }
    }
    Some(integer::mul(&s.q, &y, n, k))
}

fn solve_integers(a: &Mat, b: &Mat) -> Option<Mat> {
    let x = solve_integers_raw(&to_imat(a), &to_imat(b), a.rows(), a.cols(), b.cols())?;
    Some(from_imat(a.ring(), &x, a.cols(), b.cols()))
}

fn solve_mod(a: &Mat, b: &Mat, n: u64) -> Option<Mat> {
    let (m, c) = (a.rows(), a.cols());
    let mut lifted = to_imat(a);
    for (i, row) in lifted.iter_mut().enumerate() {
        for j in 0..m {
            row.push(if i == j { BigInt::from(n) } else { BigInt::zero() });
        }
    }
    let x = solve_integers_raw(&lifted, &to_imat(b), m, c + m, b.cols())?;
    Some(from_imat(a.ring(), &x[..c].to_vec(), c, b.cols()))
}

/// Columns generating `{x : A x = 0}`, canonicalised (column Hermite form
/// over `Z` and `Z/n`, reduced column echelon over fields).
pub fn kernel_gens(a: &Mat) -> Mat {
    let ring = a.ring().clone();
    let n = a.cols();
    if ring.is_field() {
        let (r, pivots) = rref(a);
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let mut k = Mat::zeros(ring.clone(), n, free.len());
        for (j, &f) in free.iter().enumerate() {
            k.set(f, j, ring.one());
            for (i, &p) in pivots.iter().enumerate() {
                k.set(p, j, ring.neg(r.get(i, f)));
            }
        }
        return column_echelon(&k);
    }
    if ring.is_integers() {
        let s = integer::snf(&to_imat(a), a.rows(), n);
        let gens: IMat = (s.rank..n).map(|j| (0..n).map(|i| s.q[i][j].clone()).collect()).collect();
        let h = integer::row_hnf(&gens, n);
        return columns_from_rows(&ring, &h, n);
    }
    if let Some(modulus) = ring.modulus() {
        let m = a.rows();
        let mut lifted = to_imat(a);
        for (i, row) in lifted.iter_mut().enumerate() {
            for j in 0..m {
                row.push(if i == j { BigInt::from(modulus) } else { BigInt::zero() });
            }
        }
        let s = integer::snf(&lifted, m, n + m);
        // x-parts of a basis of ker [A | n*Id]; together they span {x : A x ≡ 0}
        let gens: IMat = (s.rank..n + m).map(|j| (0..n).map(|i| s.q[i][j].clone()).collect()).collect();
        let h = integer::row_hnf(&gens, n);
        let nb = BigInt::from(modulus);
        let reduced: IMat = h
            .into_iter()
            .map(|r| r.into_iter().map(|v| num_integer::Integer::mod_floor(&v, &nb)).collect::<Vec<_>>())
            .filter(|r: &Vec<BigInt>| r.iter().any(|v| !v.is_zero()))
            .collect();
        return columns_from_rows(&ring, &reduced, n);
    }
    if ring.product_parts().is_some() {
        let parts: Vec<Mat> = a.components().expect("product").iter().map(kernel_gens).collect();
        return Mat::from_components(ring, &parts).expect("component kernels");
    }
    unreachable!("every supported ring has a kernel routine")
}

fn columns_from_rows(ring: &RingRef, rows: &IMat, n: usize) -> Mat {
    let mut k = Mat::zeros(ring.clone(), n, rows.len());
    for (j, r) in rows.iter().enumerate() {
        for (i, v) in r.iter().enumerate() {
            k.set(i, j, ring.from_bigint(v));
        }
    }
    k
}

/// Reduced column echelon form over a field, zero columns dropped.
pub fn column_echelon(k: &Mat) -> Mat {
    let (r, pivots) = rref(&k.transpose());
    r.submatrix(0..pivots.len(), 0..r.cols()).transpose()
}

/// Smith normal form over `Z` or a field.
pub fn smith_normal_form(a: &Mat) -> Result<Snf> {
    let ring = a.ring().clone();
    let (m, n) = (a.rows(), a.cols());
    if ring.is_integers() {
        let s = integer::snf(&to_imat(a), m, n);
        return Ok(Snf {
            u: from_imat(&ring, &s.p_inv, m, m),
            d: from_imat(&ring, &s.d, m, n),
            v: from_imat(&ring, &s.q_inv, n, n),
            u_inv: from_imat(&ring, &s.p, m, m),
            v_inv: from_imat(&ring, &s.q, n, n),
            rank: s.rank,
        });
    }
    if ring.is_field() {
        return Ok(field_snf(a));
    }
    Err(Error::UnsupportedRing { op: "smith_normal_form", ring: ring.spec().to_string() })
}

fn field_snf(a: &Mat) -> Snf {
    let ring = a.ring().clone();
    let (m, n) = (a.rows(), a.cols());
    // row reduce: P A = R
    let aug = a.hstack(&Mat::identity(ring.clone(), m)).expect("rows");
    let (red, pivots) = rref(&aug);
    let pivots: Vec<usize> = pivots.into_iter().filter(|&c| c < n).collect();
    let rank = pivots.len();
    let p = red.submatrix(0..m, n..n + m);
    let r = red.submatrix(0..m, 0..n);
    // column operations clear R to [I 0; 0 0]: R Q = D with Q = perm * elim
    let mut order = pivots.clone();
    order.extend((0..n).filter(|c| !pivots.contains(c)));
    let mut q = Mat::zeros(ring.clone(), n, n);
    // first rank columns: unit vectors at the pivots; remaining: kernel vectors
    for (j, &c) in order.iter().enumerate() {
        q.set(c, j, ring.one());
        if j >= rank {
            for (i, &pc) in pivots.iter().enumerate() {
                q.set(pc, j, ring.neg(r.get(i, c)));
            }
        }
    }
    let d = p.mul(a).and_then(|x| x.mul(&q)).expect("shapes");
    let p_inv = solve_field(&p, &Mat::identity(ring.clone(), m)).expect("invertible");
    let q_inv = solve_field(&q, &Mat::identity(ring.clone(), n)).expect("invertible");
    Snf { u: p_inv, d, v: q_inv, u_inv: p, v_inv: q, rank }
}

/// Two-sided inverse of a square matrix, if it exists over the ring.
pub fn inverse(a: &Mat) -> Result<Option<Mat>> {
    if a.rows() != a.cols() {
        return Err(Error::Dimension(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    let id = Mat::identity(a.ring().clone(), a.rows());
    match solve_linear(a, &id)? {
        Some(x) if x.mul(a)? == id => Ok(Some(x)),
        _ => Ok(None),
    }
}

/// Whether `A` is left-cancellable, i.e. has zero kernel.
pub fn is_monic(a: &Mat) -> bool {
    kernel_gens(a).cols() == 0
}

/// Integer value of an element over `Z` (used by samplers and reports).
pub fn int_value(e: &RingElem) -> Option<i64> {
    match e {
        RingElem::Int(x) => x.to_i64(),
        RingElem::Res(r) => Some(*r as i64),
        _ => None,
    }
}
