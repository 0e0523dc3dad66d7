//! The characteristic sequence `0 -> i_*Φ^*i^*M -> i_*i^*M -> M -> 0` of a
//! represented module `M = Hom(-, A)` over the twisted polynomial category,
//! evaluated on a rank-one test object and truncated in degree.
//!
//! Slot `n` stands for `M(Φ^n Z)`: polynomial morphisms `Φ^n(Z) -> A` of
//! degree below the depth `D`, flattened as vectors (coefficient `k`,
//! entry `(i, j)` sits at `k·r + i` since `Z` has rank one). The shift maps
//! `s_{m,n}` precompose with `Id · t^{m-n}`; truncating after each shift
//! commutes with composing shifts, so the identities hold on the whole
//! truncation, not only away from the top degree.

use std::collections::BTreeMap;

use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matcat::Obj;
use crate::ring::{AutKind, Mat, RingAut, RingElem, RingRef};
use crate::twisted::{laurent_compose, LaurentMor};

/// Rank bookkeeping for the truncation: which object, which twist, how
/// many degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedTruncation {
    pub base_obj: Obj,
    pub aut: RingAut,
    pub depth: usize,
}

impl GradedTruncation {
    const TEST_RANK: usize = 1;

    pub fn ring(&self) -> &RingRef {
        self.aut.ring()
    }

    /// Dimension of one slot: `rank(A) · rank(Z) · D`.
    pub fn slot_dim(&self) -> usize {
        self.base_obj.rank() * Self::TEST_RANK * self.depth
    }

    fn piece(&self) -> usize {
        self.base_obj.rank() * Self::TEST_RANK
    }

    fn test_obj(&self) -> Obj {
        Obj::new(Self::TEST_RANK)
    }

    #[allow(clippy::modulo_one)]
    fn unflatten(&self, idx: usize) -> LaurentMor {
        let (k, rest) = (idx / self.piece(), idx % self.piece());
        let mut m = Mat::zeros(self.ring().clone(), self.base_obj.rank(), Self::TEST_RANK);
        m.set(rest / Self::TEST_RANK, rest % Self::TEST_RANK, self.ring().one());
        LaurentMor::monomial(self.test_obj(), self.base_obj.clone(), self.aut.clone(), k as i64, m).expect("shape")
    }

    fn flatten_into(&self, x: &LaurentMor, out: &mut Mat, col: usize) {
        for (&k, c) in x.coeffs() {
            if k < 0 || k as usize >= self.depth {
                continue;
            }
            for i in 0..c.rows() {
                for j in 0..c.cols() {
                    out.set(k as usize * self.piece() + i * Self::TEST_RANK + j, col, c.get(i, j).clone());
                }
            }
        }
    }

    /// Matrix of the slot map `x ↦ g(x)` on the truncation.
    fn slot_map(&self, g: impl Fn(&LaurentMor) -> Result<LaurentMor>) -> Result<Mat> {
        let n = self.slot_dim();
        let mut out = Mat::zeros(self.ring().clone(), n, n);
        for idx in 0..n {
            self.flatten_into(&g(&self.unflatten(idx))?, &mut out, idx);
        }
        Ok(out)
    }

    /// `s_{m,n}`: precompose with `Id_{Φ^n Z} · t^{m-n}`.
    pub fn shift_map(&self, m: usize, n: usize) -> Result<Mat> {
        let t = LaurentMor::shift(&self.test_obj(), &self.aut, m as i64 - n as i64);
        self.slot_map(|x| laurent_compose(x, &t))
    }

    /// Action on slot `m` of an endomorphism `u` of the test object:
    /// precompose with `Φ^m(u) = σ^m(u) · t^0`.
    pub fn action(&self, m: usize, u: &Mat) -> Result<Mat> {
        let twisted = self.aut.pow(m as i64).apply_mat(u)?;
        let tu = LaurentMor::monomial(self.test_obj(), self.test_obj(), self.aut.clone(), 0, twisted)?;
        self.slot_map(|x| laurent_compose(x, &tu))
    }

    /// Degree of a flattened index.
    pub fn degree_of(&self, idx: usize) -> usize {
        idx / self.piece().max(1)
    }
}

/// A block matrix with equal square blocks; absent blocks are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMat {
    ring: RingRef,
    block: usize,
    rows: usize,
    cols: usize,
    blocks: BTreeMap<(usize, usize), Mat>,
}

/// Location of the first disagreement between two block matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDiff {
    pub block: (usize, usize),
    pub entry: (usize, usize),
}

impl BlockMat {
    pub fn zero(ring: RingRef, block: usize, rows: usize, cols: usize) -> BlockMat {
        BlockMat { ring, block, rows, cols, blocks: BTreeMap::new() }
    }

    pub fn identity(ring: RingRef, block: usize, n: usize) -> BlockMat {
        let mut b = BlockMat::zero(ring.clone(), block, n, n);
        for i in 0..n {
            b.set(i, i, Mat::identity(ring.clone(), block));
        }
        b
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn set(&mut self, r: usize, c: usize, m: Mat) {
        assert!(r < self.rows && c < self.cols, "block index out of range");
        if m.is_zero() {
            self.blocks.remove(&(r, c));
        } else {
            self.blocks.insert((r, c), m);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Mat {
        self.blocks.get(&(r, c)).cloned().unwrap_or_else(|| Mat::zeros(self.ring.clone(), self.block, self.block))
    }

    pub fn mul(&self, other: &BlockMat) -> Result<BlockMat> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!("block shapes {:?} and {:?}", self.shape(), other.shape())));
        }
        let mut out = BlockMat::zero(self.ring.clone(), self.block, self.rows, other.cols);
        let mut acc: BTreeMap<(usize, usize), Mat> = BTreeMap::new();
        for (&(i, k), a) in &self.blocks {
            for (&(_, j), b) in other.blocks.range((k, 0)..=(k, usize::MAX)) {
                let p = a.mul(b)?;
                match acc.remove(&(i, j)) {
                    Some(prev) => acc.insert((i, j), prev.add(&p)?),
                    None => acc.insert((i, j), p),
                };
            }
        }
        for ((i, j), m) in acc {
            out.set(i, j, m);
        }
        Ok(out)
    }

    pub fn add(&self, other: &BlockMat) -> Result<BlockMat> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!("block shapes {:?} and {:?}", self.shape(), other.shape())));
        }
        let mut out = self.clone();
        for (&(i, j), m) in &other.blocks {
            out.set(i, j, out.get(i, j).add(m)?);
        }
        Ok(out)
    }

    /// First differing block and entry, scanning blocks in order.
    pub fn diff(&self, other: &BlockMat) -> Option<BlockDiff> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if let Some(entry) = first_diff(&self.get(i, j), &other.get(i, j)) {
                    return Some(BlockDiff { block: (i, j), entry });
                }
            }
        }
        None
    }
}

fn first_diff(a: &Mat, b: &Mat) -> Option<(usize, usize)> {
    (0..a.rows()).flat_map(|i| (0..a.cols()).map(move |j| (i, j))).find(|&(i, j)| a.get(i, j) != b.get(i, j))
}

/// The maps of the characteristic sequence on a truncation.
///
/// `alpha_minus_beta` runs from slots `1..D` to slots `0..D`, `e` from slots
/// `0..D` to slot 0. The splitting is `rho` (a retraction of
/// `alpha_minus_beta`) together with `iota` (a section of `e`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharSeqMaps {
    pub trunc: GradedTruncation,
    pub shift_maps: BTreeMap<(usize, usize), Mat>,
    pub alpha_minus_beta: BlockMat,
    pub e: BlockMat,
    pub rho: BlockMat,
    pub iota: BlockMat,
}

fn assemble(trunc: &GradedTruncation, s: &BTreeMap<(usize, usize), Mat>) -> (BlockMat, BlockMat, BlockMat, BlockMat) {
    let (ring, b, d) = (trunc.ring().clone(), trunc.slot_dim(), trunc.depth);
    let get = |m: usize, n: usize| s.get(&(m, n)).cloned().unwrap_or_else(|| Mat::zeros(ring.clone(), b, b));
    // domain slot m (1..D) is column m-1
    let mut amb = BlockMat::zero(ring.clone(), b, d, d - 1);
    for m in 1..d {
        amb.set(m, m - 1, Mat::identity(ring.clone(), b));
        amb.set(m - 1, m - 1, get(m, m - 1).neg());
    }
    let mut e = BlockMat::zero(ring.clone(), b, 1, d);
    for n in 0..d {
        e.set(0, n, get(n, 0));
    }
    let mut rho = BlockMat::zero(ring.clone(), b, d - 1, d);
    for m in 1..d {
        for n in m..d {
            rho.set(m - 1, n, get(n, m));
        }
    }
    let mut iota = BlockMat::zero(ring.clone(), b, d, 1);
    iota.set(0, 0, Mat::identity(ring, b));
    (amb, e, rho, iota)
}

pub fn build_char_seq(a: &Obj, aut: &RingAut, depth: usize) -> Result<CharSeqMaps> {
    if depth < 2 {
        return Err(Error::Dimension(format!("truncation depth must be at least 2, got {depth}")));
    }
    let trunc = GradedTruncation { base_obj: Obj::new(a.rank()), aut: aut.clone(), depth };
    let mut shift_maps = BTreeMap::new();
    for m in 0..depth {
        for n in 0..=m {
            shift_maps.insert((m, n), trunc.shift_map(m, n)?);
        }
    }
    let (alpha_minus_beta, e, rho, iota) = assemble(&trunc, &shift_maps);
    Ok(CharSeqMaps { trunc, shift_maps, alpha_minus_beta, e, rho, iota })
}

/// One failed identity, located by block (or slot triple) and degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckFailure {
    pub family: char,
    pub what: String,
    pub location: Vec<usize>,
    pub degree: usize,
}

impl CheckFailure {
    pub fn to_json(&self) -> Value {
        json!({ "family": self.family.to_string(), "what": self.what, "location": self.location, "degree": self.degree })
    }
}

/// Results of the identity checks, by family:
/// `a` exactness at the middle, `b` the splitting identities,
/// `c` cocycle identities, `d` diagonal shifts, `e` naturality in the test
/// object (the place where the twist is visible).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharSeqReport {
    pub depth: usize,
    pub rank: usize,
    pub aut: AutKind,
    pub checked: BTreeMap<char, usize>,
    pub failures: Vec<CheckFailure>,
}

impl CharSeqReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn family_passed(&self, family: char) -> bool {
        self.failures.iter().all(|f| f.family != family)
    }

    pub fn to_json(&self) -> Value {
        let families: BTreeMap<String, Value> = self
            .checked
            .iter()
            .map(|(f, n)| {
                let failed = self.failures.iter().filter(|x| x.family == *f).count();
                (f.to_string(), json!({ "checked": n, "failed": failed }))
            })
            .collect();
        json!({
            "depth": self.depth,
            "rank": self.rank,
            "aut": self.aut,
            "families": families,
            "failures": self.failures.iter().map(CheckFailure::to_json).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

/// Probe endomorphisms of the rank-one test object used for naturality.
fn probes(ring: &RingRef) -> Vec<Mat> {
    let one = ring.one();
    let mut out = vec![Mat::scalar(ring.clone(), 1, &ring.from_i64(2))];
    if let Some(g) = ring.galois() {
        if g.degree() > 1 {
            let mut x = vec![0; g.degree() as usize];
            x[1] = 1;
            out.push(Mat::scalar(ring.clone(), 1, &RingElem::Poly(x)));
        }
    }
    if let Some((base, w)) = ring.product_parts() {
        let tuple = (0..w).map(|i| base.from_i64(i as i64 + 1)).collect();
        out.push(Mat::scalar(ring.clone(), 1, &RingElem::Tuple(tuple)));
    }
    out.push(Mat::scalar(ring.clone(), 1, &one));
    out
}

pub fn verify_char_seq(maps: &CharSeqMaps) -> Result<CharSeqReport> {
    let t = &maps.trunc;
    let (ring, b, d) = (t.ring().clone(), t.slot_dim(), t.depth);
    let mut failures = Vec::new();
    let mut checked = BTreeMap::new();
    let s =
        |m: usize, n: usize| maps.shift_maps.get(&(m, n)).cloned().unwrap_or_else(|| Mat::zeros(ring.clone(), b, b));
    let block_fail = |family: char, what: &str, diff: BlockDiff| CheckFailure {
        family,
        what: what.to_string(),
        location: vec![diff.block.0, diff.block.1],
        degree: t.degree_of(diff.entry.0),
    };

    // (a) e ∘ (α − β) = 0
    let ea = maps.e.mul(&maps.alpha_minus_beta)?;
    let zero = BlockMat::zero(ring.clone(), b, 1, d - 1);
    checked.insert('a', 1);
    if let Some(diff) = ea.diff(&zero) {
        failures.push(block_fail('a', "e(alpha-beta)", diff));
    }

    // (b) the blocks are the ones dictated by the shift maps, and split
    let (amb, e, rho, iota) = assemble(t, &maps.shift_maps);
    let id_dom = BlockMat::identity(ring.clone(), b, d - 1);
    let id_cod = BlockMat::identity(ring.clone(), b, d);
    let id_one = BlockMat::identity(ring.clone(), b, 1);
    let mut checks_b: Vec<(&str, BlockMat, BlockMat)> = vec![
        ("alpha-beta blocks", maps.alpha_minus_beta.clone(), amb),
        ("e blocks", maps.e.clone(), e),
        ("rho blocks", maps.rho.clone(), rho),
        ("iota blocks", maps.iota.clone(), iota),
        ("rho(alpha-beta)", maps.rho.mul(&maps.alpha_minus_beta)?, id_dom),
        ("e iota", maps.e.mul(&maps.iota)?, id_one),
    ];
    let homotopy = maps.alpha_minus_beta.mul(&maps.rho)?.add(&maps.iota.mul(&maps.e)?)?;
    checks_b.push(("(alpha-beta)rho + iota e", homotopy, id_cod));
    checked.insert('b', checks_b.len());
    for (what, lhs, rhs) in &checks_b {
        if let Some(diff) = lhs.diff(rhs) {
            failures.push(block_fail('b', what, diff));
        }
    }

    // (c) s_{m,n} s_{l,m} = s_{l,n}
    let mut count = 0;
    for l in 0..d {
        for m in 0..=l {
            for n in 0..=m {
                count += 1;
                let lhs = s(m, n).mul(&s(l, m))?;
                if let Some((i, _)) = first_diff(&lhs, &s(l, n)) {
                    failures.push(CheckFailure {
                        family: 'c',
                        what: "cocycle".into(),
                        location: vec![l, m, n],
                        degree: t.degree_of(i),
                    });
                }
            }
        }
    }
    checked.insert('c', count);

    // (d) s_{m,m} = Id
    for m in 0..d {
        if let Some((i, _)) = first_diff(&s(m, m), &Mat::identity(ring.clone(), b)) {
            failures.push(CheckFailure {
                family: 'd',
                what: "diagonal shift".into(),
                location: vec![m, m],
                degree: t.degree_of(i),
            });
        }
    }
    checked.insert('d', d);

    // (e) s_{m,n} N_m(u) = N_n(u) s_{m,n}
    let mut count = 0;
    let us = probes(&ring);
    let actions: Vec<Vec<Mat>> =
        us.iter().map(|u| (0..d).map(|m| t.action(m, u)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    for (p, acts) in actions.iter().enumerate() {
        for m in 0..d {
            for n in 0..=m {
                count += 1;
                let lhs = s(m, n).mul(&acts[m])?;
                let rhs = acts[n].mul(&s(m, n))?;
                if let Some((i, _)) = first_diff(&lhs, &rhs) {
                    failures.push(CheckFailure {
                        family: 'e',
                        what: format!("naturality probe {p}"),
                        location: vec![m, n],
                        degree: t.degree_of(i),
                    });
                }
            }
        }
    }
    checked.insert('e', count);

    Ok(CharSeqReport { depth: d, rank: t.base_obj.rank(), aut: t.aut.kind(), checked, failures })
}

/// Corrupt one entry of one stored shift map by adding 1. Returns the
/// `(m, n, row, col)` that was changed, or `None` for a rank-zero object.
pub fn mutate_shift<R: Rng + ?Sized>(maps: &mut CharSeqMaps, rng: &mut R) -> Option<(usize, usize, usize, usize)> {
    let b = maps.trunc.slot_dim();
    if b == 0 {
        return None;
    }
    let keys: Vec<(usize, usize)> = maps.shift_maps.keys().copied().collect();
    let (m, n) = keys[rng.gen_range(0..keys.len())];
    let (r, c) = (rng.gen_range(0..b), rng.gen_range(0..b));
    let ring = maps.trunc.ring().clone();
    let mat = maps.shift_maps.get_mut(&(m, n)).expect("key");
    let v = ring.add(mat.get(r, c), &ring.one());
    mat.set(r, c, v);
    Some((m, n, r, c))
}
