//! Smith and Hermite normal forms over `Z`, on plain `BigInt` grids.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IMat = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> IMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

pub fn mul(a: &IMat, b: &IMat, inner: usize, cols: usize) -> IMat {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = BigInt::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            acc += &row[k] * &b[k][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `P * A * Q = D` with `P`, `Q` unimodular, `D` diagonal, `d_i | d_{i+1}`,
/// `d_i > 0` for `i < rank`. The inverses of `P` and `Q` are kept alongside,
/// so `A = P_inv * D * Q_inv`.
#[derive(Debug, Clone)]
pub struct IntSnf {
    pub p: IMat,
    pub p_inv: IMat,
    pub q: IMat,
    pub q_inv: IMat,
    pub d: IMat,
    pub rank: usize,
}

struct Work {
    d: IMat,
    p: IMat,
    p_inv: IMat,
    q: IMat,
    q_inv: IMat,
    m: usize,
    n: usize,
}

impl Work {
    // row_i += c * row_j
    fn row_add(&mut self, i: usize, j: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for k in 0..self.n {
            let v = &self.d[j][k] * c;
            self.d[i][k] += v;
        }
        for k in 0..self.m {
            let v = &self.p[j][k] * c;
            self.p[i][k] += v;
            let w = &self.p_inv[k][i] * c;
            self.p_inv[k][j] -= w;
        }
    }

    fn row_swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.d.swap(i, j);
        self.p.swap(i, j);
        for row in self.p_inv.iter_mut() {
            row.swap(i, j);
        }
    }

    fn row_neg(&mut self, i: usize) {
        for v in self.d[i].iter_mut() {
            *v = -&*v;
        }
        for v in self.p[i].iter_mut() {
            *v = -&*v;
        }
        for row in self.p_inv.iter_mut() {
            row[i] = -&row[i];
        }
    }

    // col_j += c * col_i
    fn col_add(&mut self, j: usize, i: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for row in self.d.iter_mut() {
            let v = &row[i] * c;
            row[j] += v;
        }
        for row in self.q.iter_mut() {
            let v = &row[i] * c;
            row[j] += v;
        }
        for k in 0..self.n {
            let v = &self.q_inv[j][k] * c;
            self.q_inv[i][k] -= v;
        }
    }

    fn col_swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in self.d.iter_mut() {
            row.swap(i, j);
        }
        for row in self.q.iter_mut() {
            row.swap(i, j);
        }
        self.q_inv.swap(i, j);
    }

    fn min_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for i in t..self.m {
            for j in t..self.n {
                let v = &self.d[i][j];
                if v.is_zero() {
                    continue;
                }
                let a = v.abs();
                if best.as_ref().is_none_or(|(_, _, b)| a < *b) {
                    best = Some((i, j, a));
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }
}

pub fn snf(a: &IMat, m: usize, n: usize) -> IntSnf {
    let mut w = Work { d: a.clone(), p: identity(m), p_inv: identity(m), q: identity(n), q_inv: identity(n), m, n };
    let mut rank = 0;
    for t in 0..m.min(n) {
        let Some((pi, pj)) = w.min_pivot(t) else { break };
        w.row_swap(t, pi);
        w.col_swap(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..m {
                if w.d[i][t].is_zero() {
                    continue;
                }
                let q = w.d[i][t].div_floor(&w.d[t][t]);
                w.row_add(i, t, &-q);
                if !w.d[i][t].is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..n {
                if w.d[t][j].is_zero() {
                    continue;
                }
                let q = w.d[t][j].div_floor(&w.d[t][t]);
                w.col_add(j, t, &-q);
                if !w.d[t][j].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                // a smaller remainder appeared in row or column t; move it to the pivot
                let mut best = (t, t, w.d[t][t].abs());
                for i in t + 1..m {
                    let v = w.d[i][t].abs();
                    if !v.is_zero() && v < best.2 {
                        best = (i, t, v);
                    }
                }
                for j in t + 1..n {
                    let v = w.d[t][j].abs();
                    if !v.is_zero() && v < best.2 {
                        best = (t, j, v);
                    }
                }
                w.row_swap(t, best.0);
                w.col_swap(t, best.1);
                continue;
            }
            // divisibility of the remaining block
            let mut offender = None;
            'scan: for i in t + 1..m {
                for j in t + 1..n {
                    if !w.d[i][j].is_multiple_of(&w.d[t][t]) {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => w.row_add(t, i, &BigInt::one()),
                None => break,
            }
        }
        if w.d[t][t].is_negative() {
            w.row_neg(t);
        }
        rank = t + 1;
    }
    IntSnf { p: w.p, p_inv: w.p_inv, q: w.q, q_inv: w.q_inv, d: w.d, rank }
}

/// Row Hermite normal form of the lattice spanned by the rows of `a`
/// (each of length `cols`): echelon, positive pivots, entries above a pivot
/// reduced into `[0, pivot)`. Zero rows are dropped.
pub fn row_hnf(a: &IMat, cols: usize) -> IMat {
    let mut rows: IMat = a.iter().filter(|r| r.iter().any(|v| !v.is_zero())).cloned().collect();
    let mut out: IMat = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for c in 0..cols {
        loop {
            let mut best: Option<(usize, BigInt)> = None;
            for (i, r) in rows.iter().enumerate() {
                if !r[c].is_zero() {
                    let a = r[c].abs();
                    if best.as_ref().is_none_or(|(_, b)| a < *b) {
                        best = Some((i, a));
                    }
                }
            }
            let Some((bi, _)) = best else { break };
            let pivot_row = rows[bi].clone();
            let mut others_zero = true;
            for (i, r) in rows.iter_mut().enumerate() {
                if i == bi || r[c].is_zero() {
                    continue;
                }
                let q = r[c].div_floor(&pivot_row[c]);
                for k in 0..cols {
                    let v = &pivot_row[k] * &q;
                    r[k] -= v;
                }
                if !r[c].is_zero() {
                    others_zero = false;
                }
            }
            if others_zero {
                let mut row = rows.remove(bi);
                if row[c].is_negative() {
                    for v in row.iter_mut() {
                        *v = -&*v;
                    }
                }
                out.push(row);
                pivots.push(c);
                rows.retain(|r| r.iter().any(|v| !v.is_zero()));
                break;
            }
        }
    }
    // reduce above pivots
    for idx in 0..out.len() {
        let c = pivots[idx];
        let pivot = out[idx].clone();
        for row in out.iter_mut().take(idx) {
            let q = row[c].div_floor(&pivot[c]);
            if q.is_zero() {
                continue;
            }
            for k in 0..cols {
                let v = &pivot[k] * &q;
                row[k] -= v;
            }
        }
    }
    out
}
