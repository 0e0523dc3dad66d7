use std::fmt;

use serde_json::{json, Value};

use super::{Ring, RingElem, RingRef};
use crate::error::{Error, Result};

/// A dense matrix over one of the supported rings.
#[derive(Clone)]
pub struct Mat {
    ring: RingRef,
    rows: usize,
    cols: usize,
    data: Vec<RingElem>,
}

impl PartialEq for Mat {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl Eq for Mat {}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat[{}x{} over {}](", self.rows, self.cols, self.ring.spec())?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.ring.fmt_elem(self.get(r, c)))?;
            }
        }
        write!(f, ")")
    }
}

impl Mat {
    pub fn zeros(ring: RingRef, rows: usize, cols: usize) -> Mat {
        let z = ring.zero();
        Mat { data: vec![z; rows * cols], ring, rows, cols }
    }

    pub fn identity(ring: RingRef, n: usize) -> Mat {
        Mat::scalar(ring.clone(), n, &ring.one())
    }

    pub fn scalar(ring: RingRef, n: usize, c: &RingElem) -> Mat {
        let mut m = Mat::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn from_vec(ring: RingRef, rows: usize, cols: usize, data: Vec<RingElem>) -> Result<Mat> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if let Some(bad) = data.iter().find(|e| !ring.contains(e)) {
            return Err(Error::RingMismatch(ring.spec().to_string(), format!("entry {bad:?}")));
        }
        Ok(Mat { ring, rows, cols, data })
    }

    pub fn from_rows(ring: RingRef, rows: Vec<Vec<RingElem>>) -> Result<Mat> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Mat::from_vec(ring, r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_i64(ring: RingRef, rows: &[&[i64]]) -> Mat {
        let data = rows.iter().map(|row| row.iter().map(|&v| ring.from_i64(v)).collect()).collect();
        Mat::from_rows(ring, data).expect("rectangular literal")
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[RingElem] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> &RingElem {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: RingElem) {
        debug_assert!(self.ring.contains(&v));
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| self.ring.is_zero(e))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Mat::identity(self.ring.clone(), self.rows)
    }

    pub fn map(&self, f: impl Fn(&RingElem) -> RingElem) -> Mat {
        Mat { ring: self.ring.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    fn same_ring(&self, other: &Mat) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.spec().to_string(), other.ring.spec().to_string()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        self.same_ring(other)?;
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let ring = &self.ring;
        let mut out = Mat::zeros(ring.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if ring.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if ring.is_zero(b) {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.data[idx] = ring.add(&out.data[idx], &ring.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    fn zip(&self, other: &Mat, f: impl Fn(&Ring, &RingElem, &RingElem) -> RingElem) -> Result<Mat> {
        self.same_ring(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!("{}x{} vs {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(&self.ring, a, b)).collect();
        Ok(Mat { ring: self.ring.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        self.zip(other, |r, a, b| r.add(a, b))
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat> {
        self.zip(other, |r, a, b| r.sub(a, b))
    }

    pub fn neg(&self) -> Mat {
        self.map(|a| self.ring.neg(a))
    }

    pub fn scale(&self, c: &RingElem) -> Mat {
        self.map(|a| self.ring.mul(c, a))
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.ring.clone(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn hstack(&self, other: &Mat) -> Result<Mat> {
        self.same_ring(other)?;
        if self.rows != other.rows {
            return Err(Error::Dimension(format!("hstack of {} and {} rows", self.rows, other.rows)));
        }
        let mut out = Mat::zeros(self.ring.clone(), self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &Mat) -> Result<Mat> {
        self.same_ring(other)?;
        if self.cols != other.cols {
            return Err(Error::Dimension(format!("vstack of {} and {} cols", self.cols, other.cols)));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Mat { ring: self.ring.clone(), rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, other: &Mat) -> Result<Mat> {
        self.same_ring(other)?;
        let mut out = Mat::zeros(self.ring.clone(), self.rows + other.rows, self.cols + other.cols);
        out.paste(0, 0, self);
        out.paste(self.rows, self.cols, other);
        Ok(out)
    }

    /// Overwrite the block starting at `(r0, c0)` with `block`.
    pub fn paste(&mut self, r0: usize, c0: usize, block: &Mat) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.data[(r0 + i) * self.cols + c0 + j] = block.get(i, j).clone();
            }
        }
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Mat {
        let mut out = Mat::zeros(self.ring.clone(), rows.len(), cols.len());
        for (i, r) in rows.clone().enumerate() {
            for (j, c) in cols.clone().enumerate() {
                out.data[i * out.cols + j] = self.get(r, c).clone();
            }
        }
        out
    }

    pub fn column(&self, c: usize) -> Mat {
        self.submatrix(0..self.rows, c..c + 1)
    }

    pub fn select_columns(&self, idx: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.ring.clone(), self.rows, idx.len());
        for i in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                out.data[i * idx.len() + j] = self.get(i, c).clone();
            }
        }
        out
    }

    /// Split a matrix over `Product(base, w)` into its `w` factor matrices.
    pub fn components(&self) -> Option<Vec<Mat>> {
        let (base, w) = self.ring.product_parts()?;
        Some(
            (0..w)
                .map(|i| Mat {
                    ring: base.clone(),
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().map(|e| self.ring.component(e, i).expect("tuple")).collect(),
                })
                .collect(),
        )
    }

    /// Inverse of [`Mat::components`]; factor matrices may have differing
    /// column counts, in which case narrower ones are padded with zero columns.
    pub fn from_components(ring: RingRef, parts: &[Mat]) -> Result<Mat> {
        let (base, w) =
            ring.product_parts().ok_or_else(|| Error::RingMismatch("Product".into(), ring.spec().to_string()))?;
        if parts.len() != w {
            return Err(Error::Dimension(format!("{} components for width {w}", parts.len())));
        }
        let rows = parts.first().map_or(0, Mat::rows);
        if parts.iter().any(|p| p.rows != rows || p.ring != *base) {
            return Err(Error::Dimension("component shapes disagree".into()));
        }
        let cols = parts.iter().map(Mat::cols).max().unwrap_or(0);
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let t = parts.iter().map(|p| if j < p.cols { p.get(i, j).clone() } else { base.zero() }).collect();
                data.push(RingElem::Tuple(t));
            }
        }
        Ok(Mat { ring, rows, cols, data })
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = (0..self.rows)
            .map(|i| Value::Array((0..self.cols).map(|j| self.ring.elem_to_json(self.get(i, j))).collect()))
            .collect();
        json!({ "rows": self.rows, "cols": self.cols, "entries": entries })
    }

    pub fn from_json(ring: RingRef, v: &Value) -> Result<Mat> {
        let obj = v.as_object().ok_or_else(|| Error::Parse(format!("matrix must be an object, got {v}")))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "rows" | "cols" | "entries") {
                return Err(Error::Parse(format!("unknown matrix field {key:?}")));
            }
        }
        let dim = |k: &str| -> Result<usize> {
            obj.get(k)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::Parse(format!("matrix field {k:?} missing or not a count")))
        };
        let (rows, cols) = (dim("rows")?, dim("cols")?);
        let entries = obj
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("matrix field \"entries\" missing".into()))?;
        if entries.len() != rows {
            return Err(Error::Parse(format!("expected {rows} rows, found {}", entries.len())));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for row in entries {
            let row = row.as_array().ok_or_else(|| Error::Parse("matrix row must be an array".into()))?;
            if row.len() != cols {
                return Err(Error::Parse(format!("expected {cols} columns, found {}", row.len())));
            }
            for e in row {
                data.push(ring.elem_from_json(e)?);
            }
        }
        Mat::from_vec(ring, rows, cols, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingSpec;

    #[test]
    fn product_and_stacking() {
        let z = Ring::integers();
        let a = Mat::from_i64(z.clone(), &[&[1, 2], &[3, 4]]);
        let b = Mat::from_i64(z.clone(), &[&[0, 1], &[1, 0]]);
        assert_eq!(a.mul(&b).unwrap(), Mat::from_i64(z.clone(), &[&[2, 1], &[4, 3]]));
        let h = a.hstack(&b).unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 4));
        assert_eq!(h.submatrix(0..2, 2..4), b);
        assert!(a.mul(&Mat::zeros(z, 3, 1)).is_err());
    }

    #[test]
    fn json_shape_is_checked() {
        let z = Ring::integers();
        let good = json!({"rows": 1, "cols": 2, "entries": [["1", "-2"]]});
        let m = Mat::from_json(z.clone(), &good).unwrap();
        assert_eq!(m.to_json(), good);
        let ragged = json!({"rows": 1, "cols": 2, "entries": [["1"]]});
        assert!(Mat::from_json(z.clone(), &ragged).is_err());
        let extra = json!({"rows": 0, "cols": 0, "entries": [], "note": 1});
        assert!(Mat::from_json(z, &extra).is_err());
    }

    #[test]
    fn components_round_trip() {
        let p = Ring::new(RingSpec::Product(Box::new(RingSpec::Integers), 2)).unwrap();
        let m = Mat::from_json(p.clone(), &json!({"rows": 1, "cols": 2, "entries": [[["1","2"],["3","4"]]]})).unwrap();
        let parts = m.components().unwrap();
        assert_eq!(parts[1], Mat::from_i64(Ring::integers(), &[&[2, 4]]));
        assert_eq!(Mat::from_components(p, &parts).unwrap(), m);
    }
}
