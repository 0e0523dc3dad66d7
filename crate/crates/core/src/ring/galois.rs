use crate::error::{Error, Result};

use super::is_prime;

/// Largest field order we are willing to build (elements are enumerated in
/// tests and the modulus search is brute force).
const MAX_ORDER: u64 = 1 << 24;

/// `F_{p^k}` realised as `F_p[x] / (m(x))` with `m` the smallest monic
/// irreducible polynomial of degree `k` (coefficient vectors ordered
/// lexicographically from the constant term upwards).
#[derive(Debug, Clone)]
pub struct GaloisField {
    p: u64,
    k: u32,
    /// Monic modulus, lowest degree first, length `k + 1`.
    modulus: Vec<u64>,
}

impl GaloisField {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidRing(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(Error::InvalidRing("extension degree must be at least 1".into()));
        }
        match p.checked_pow(k) {
            Some(q) if q <= MAX_ORDER => {}
            _ => return Err(Error::InvalidRing(format!("field of order {p}^{k} is too large"))),
        }
        let modulus = smallest_irreducible(p, k);
        Ok(GaloisField { p, k, modulus })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.k)
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn contains(&self, c: &[u64]) -> bool {
        c.len() == self.k as usize && c.iter().all(|&v| v < self.p)
    }

    /// Base-`p` digits of `i`, constant term first.
    pub fn from_index(&self, mut i: u64) -> Vec<u64> {
        let mut c = vec![0; self.k as usize];
        for slot in c.iter_mut() {
            *slot = i % self.p;
            i /= self.p;
        }
        c
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn neg(&self, a: &[u64]) -> Vec<u64> {
        a.iter().map(|x| (self.p - x) % self.p).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let k = self.k as usize;
        let p = self.p as u128;
        let mut prod = vec![0u128; 2 * k - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u128 * y as u128) % p;
            }
        }
        // reduce by the monic modulus from the top down
        for d in (k..prod.len()).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for (i, &m) in self.modulus[..k].iter().enumerate() {
                let sub = c * m as u128 % p;
                prod[d - k + i] = (prod[d - k + i] + p - sub) % p;
            }
        }
        prod.truncate(k);
        prod.into_iter().map(|v| v as u64).collect()
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = vec![0; self.k as usize];
        acc[0] = 1 % self.p;
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &[u64]) -> Option<Vec<u64>> {
        if a.iter().all(|&v| v == 0) {
            return None;
        }
        Some(self.pow(a, self.order() - 2))
    }

    /// `a^(p^e)`.
    pub fn frobenius(&self, a: &[u64], e: u32) -> Vec<u64> {
        let mut out = a.to_vec();
        for _ in 0..(e % self.k) {
            out = self.pow(&out, self.p);
        }
        out
    }
}

fn poly_rem(mut a: Vec<u64>, b: &[u64], p: u64) -> Vec<u64> {
    // b monic
    let db = b.len() - 1;
    while a.len() > db {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let sub = (lead as u128 * bc as u128 % p as u128) as u64;
                a[shift + i] = (a[shift + i] + p - sub) % p;
            }
        }
        a.pop();
    }
    a
}

fn monic_of_degree(p: u64, d: u32, index: u64) -> Vec<u64> {
    let mut c = Vec::with_capacity(d as usize + 1);
    let mut i = index;
    for _ in 0..d {
        c.push(i % p);
        i /= p;
    }
    c.push(1);
    c
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = (f.len() - 1) as u32;
    for d in 1..=k / 2 {
        for idx in 0..p.pow(d) {
            let g = monic_of_degree(p, d, idx);
            if poly_rem(f.to_vec(), &g, p).iter().all(|&v| v == 0) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u64, k: u32) -> Vec<u64> {
    if k == 1 {
        return vec![0, 1];
    }
    (0..p.pow(k))
        .map(|idx| monic_of_degree(p, k, idx))
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}
