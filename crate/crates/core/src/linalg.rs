//! Dense exact linear algebra over F_p.
//!
//! Row-vector convention throughout: a matrix `M` acts on the right, `v -> v·M`.
//! Subspaces are stored as reduced row-echelon bases so that equality is
//! structural.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{OctoError, Result};
use crate::field::FieldPrime;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpVector {
    pub p: FieldPrime,
    entries: Vec<u32>,
}

impl FpVector {
    pub fn zeros(p: FieldPrime, len: usize) -> Self {
        FpVector {
            p,
            entries: vec![0; len],
        }
    }

    pub fn unit(p: FieldPrime, len: usize, i: usize) -> Self {
        let mut v = Self::zeros(p, len);
        v.entries[i] = 1;
        v
    }

    pub fn new(p: FieldPrime, entries: Vec<u32>) -> Result<Self> {
        for &e in &entries {
            p.check(e as u64)?;
        }
        Ok(FpVector { p, entries })
    }

    /// Build from signed integers, reducing each mod p.
    pub fn from_i64(p: FieldPrime, values: &[i64]) -> Self {
        FpVector {
            p,
            entries: values.iter().map(|&x| p.reduce(x)).collect(),
        }
    }

    pub(crate) fn from_raw(p: FieldPrime, entries: Vec<u32>) -> Self {
        debug_assert!(entries.iter().all(|&e| e < p.get()));
        FpVector { p, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<u32> {
        self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &FpVector) -> FpVector {
        let p = self.p;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| p.add(a, b))
            .collect();
        FpVector { p, entries }
    }

    pub fn sub(&self, other: &FpVector) -> FpVector {
        let p = self.p;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| p.sub(a, b))
            .collect();
        FpVector { p, entries }
    }

    pub fn neg(&self) -> FpVector {
        let p = self.p;
        FpVector {
            p,
            entries: self.entries.iter().map(|&a| p.neg(a)).collect(),
        }
    }

    pub fn scale(&self, c: u32) -> FpVector {
        let p = self.p;
        FpVector {
            p,
            entries: self.entries.iter().map(|&a| p.mul(a, c)).collect(),
        }
    }

    pub fn dot(&self, other: &FpVector) -> u32 {
        dot(self.p, &self.entries, &other.entries)
    }

    /// `self · m`
    pub fn mul_mat(&self, m: &FpMatrix) -> Result<FpVector> {
        if self.len() != m.rows {
            return Err(OctoError::Shape(format!(
                "vector of length {} times {}x{} matrix",
                self.len(),
                m.rows,
                m.cols
            )));
        }
        Ok(FpVector {
            p: self.p,
            entries: vec_mat(self.p, &self.entries, m),
        })
    }
}

impl std::ops::Index<usize> for FpVector {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.entries[i]
    }
}

pub(crate) fn dot(p: FieldPrime, a: &[u32], b: &[u32]) -> u32 {
    let pm = p.get() as u64;
    let mut acc = 0u64;
    for (&x, &y) in a.iter().zip(b) {
        acc = (acc + x as u64 * y as u64) % pm;
    }
    acc as u32
}

fn vec_mat(p: FieldPrime, v: &[u32], m: &FpMatrix) -> Vec<u32> {
    let mut out = vec![0u32; m.cols];
    for (i, &c) in v.iter().enumerate() {
        if c == 0 {
            continue;
        }
        axpy(p, &mut out, c, m.row(i));
    }
    out
}

/// `dst += c * src`
#[inline]
fn axpy(p: FieldPrime, dst: &mut [u32], c: u32, src: &[u32]) {
    let pm = p.get() as u64;
    let c = c as u64;
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = ((*d as u64 + c * s as u64) % pm) as u32;
    }
}

/// Dense row-major matrix over F_p.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FpMatrix {
    pub p: FieldPrime,
    pub rows: usize,
    pub cols: usize,
    entries: Vec<u32>,
}

#[derive(Deserialize)]
struct RawMatrix {
    p: FieldPrime,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl<'de> Deserialize<'de> for FpMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMatrix::deserialize(d)?;
        let entries = raw
            .entries
            .iter()
            .map(|&e| raw.p.check(e))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        FpMatrix::new(raw.p, raw.rows, raw.cols, entries).map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix {}x{} over F_{}", self.rows, self.cols, self.p)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Result of row reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: FpMatrix,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
}

/// Solution set of `x · a = b` (one solution row per row of `b`).
#[derive(Clone, Debug)]
pub struct LinearSolution {
    pub particular: FpMatrix,
    pub homogeneous: Subspace,
}

impl FpMatrix {
    pub fn new(p: FieldPrime, rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(OctoError::Shape(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows,
                cols
            )));
        }
        for &e in &entries {
            p.check(e as u64)?;
        }
        Ok(FpMatrix {
            p,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_i64(p: FieldPrime, rows: usize, cols: usize, values: &[i64]) -> Result<Self> {
        let entries = values.iter().map(|&x| p.reduce(x)).collect();
        Self::new(p, rows, cols, entries)
    }

    pub fn zeros(p: FieldPrime, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(p: FieldPrime, n: usize) -> Self {
        Self::scalar(p, n, 1)
    }

    pub fn scalar(p: FieldPrime, n: usize, lambda: u32) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.entries[i * n + i] = lambda % p.get();
        }
        m
    }

    /// Stack vectors as rows. `cols` is needed when `rows` is empty.
    pub fn from_rows(p: FieldPrime, cols: usize, rows: &[FpVector]) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols || r.p != p {
                return Err(OctoError::Shape(format!(
                    "row of length {} in a matrix with {} columns",
                    r.len(),
                    cols
                )));
            }
            entries.extend_from_slice(r.entries());
        }
        Ok(FpMatrix {
            p,
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub(crate) fn from_raw(p: FieldPrime, rows: usize, cols: usize, entries: Vec<u32>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        FpMatrix {
            p,
            rows,
            cols,
            entries,
        }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: u32) {
        self.entries[r * self.cols + c] = value % self.p.get();
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vector(&self, r: usize) -> FpVector {
        FpVector::from_raw(self.p, self.row(r).to_vec())
    }

    pub fn row_vectors(&self) -> Vec<FpVector> {
        (0..self.rows).map(|r| self.row_vector(r)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut out = vec![0; self.entries.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[c * self.rows + r] = self.get(r, c);
            }
        }
        FpMatrix::from_raw(self.p, self.cols, self.rows, out)
    }

    fn same_field(&self, other: &FpMatrix) -> Result<()> {
        if self.p != other.p {
            Err(OctoError::FieldMismatch(self.p.get(), other.p.get()))
        } else {
            Ok(())
        }
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(OctoError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            out.extend(vec_mat(self.p, self.row(r), other));
        }
        Ok(FpMatrix::from_raw(self.p, self.rows, other.cols, out))
    }

    fn zip_with(&self, other: &FpMatrix, f: impl Fn(u32, u32) -> u32) -> Result<FpMatrix> {
        self.same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(OctoError::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(FpMatrix::from_raw(self.p, self.rows, self.cols, entries))
    }

    pub fn add(&self, other: &FpMatrix) -> Result<FpMatrix> {
        let p = self.p;
        self.zip_with(other, |a, b| p.add(a, b))
    }

    pub fn sub(&self, other: &FpMatrix) -> Result<FpMatrix> {
        let p = self.p;
        self.zip_with(other, |a, b| p.sub(a, b))
    }

    pub fn scale(&self, c: u32) -> FpMatrix {
        let p = self.p;
        let entries = self.entries.iter().map(|&a| p.mul(a, c)).collect();
        FpMatrix::from_raw(p, self.rows, self.cols, entries)
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &FpMatrix) -> Result<FpMatrix> {
        self.same_field(other)?;
        if self.cols != other.cols {
            return Err(OctoError::Shape(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(FpMatrix::from_raw(
            self.p,
            self.rows + other.rows,
            self.cols,
            entries,
        ))
    }

    pub fn rref(&self) -> Rref {
        let mut data = self.entries.clone();
        let pivot_cols = rref_in_place(self.p, &mut data, self.rows, self.cols, self.cols);
        Rref {
            matrix: FpMatrix::from_raw(self.p, self.rows, self.cols, data),
            rank: pivot_cols.len(),
            pivot_cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Row reduction that also records the transform: returns `(rref, t)` with
    /// `t · self = rref.matrix` and `t` invertible. The rows of `t` below the
    /// rank span the left kernel.
    pub fn rref_with_transform(&self) -> (Rref, FpMatrix) {
        let (n, m) = (self.rows, self.cols);
        let width = m + n;
        let mut data = vec![0u32; n * width];
        for r in 0..n {
            data[r * width..r * width + m].copy_from_slice(self.row(r));
            data[r * width + m + r] = 1;
        }
        let pivot_cols = rref_in_place(self.p, &mut data, n, width, m);
        let mut reduced = Vec::with_capacity(n * m);
        let mut transform = Vec::with_capacity(n * n);
        for r in 0..n {
            reduced.extend_from_slice(&data[r * width..r * width + m]);
            transform.extend_from_slice(&data[r * width + m..(r + 1) * width]);
        }
        let rref = Rref {
            matrix: FpMatrix::from_raw(self.p, n, m, reduced),
            rank: pivot_cols.len(),
            pivot_cols,
        };
        (rref, FpMatrix::from_raw(self.p, n, n, transform))
    }

    /// Left kernel `{x : x · self = 0}`, a subspace of F_p^rows.
    pub fn kernel(&self) -> Subspace {
        let (rref, t) = self.rref_with_transform();
        let rows: Vec<FpVector> = (rref.rank..self.rows).map(|r| t.row_vector(r)).collect();
        Subspace::from_spanning(self.p, self.rows, &rows).expect("kernel rows have ambient length")
    }

    /// Solve `x · self = b` row by row. `Ok(None)` when some row of `b` is
    /// outside the row space.
    pub fn solve(&self, b: &FpMatrix) -> Result<Option<LinearSolution>> {
        self.same_field(b)?;
        if b.cols != self.cols {
            return Err(OctoError::Shape(format!(
                "right-hand side has {} columns, system has {}",
                b.cols, self.cols
            )));
        }
        let p = self.p;
        let (rref, t) = self.rref_with_transform();
        let mut particular = Vec::with_capacity(b.rows * self.rows);
        for r in 0..b.rows {
            let target = b.row(r);
            let coeffs: Vec<u32> = rref.pivot_cols.iter().map(|&c| target[c]).collect();
            let mut image = vec![0u32; self.cols];
            let mut x = vec![0u32; self.rows];
            for (i, &c) in coeffs.iter().enumerate() {
                if c != 0 {
                    axpy(p, &mut image, c, rref.matrix.row(i));
                    axpy(p, &mut x, c, t.row(i));
                }
            }
            if image != target {
                return Ok(None);
            }
            particular.extend(x);
        }
        let kernel_rows: Vec<FpVector> = (rref.rank..self.rows).map(|r| t.row_vector(r)).collect();
        Ok(Some(LinearSolution {
            particular: FpMatrix::from_raw(p, b.rows, self.rows, particular),
            homogeneous: Subspace::from_spanning(p, self.rows, &kernel_rows)?,
        }))
    }

    pub fn det(&self) -> Result<u32> {
        if !self.is_square() {
            return Err(OctoError::Shape(format!(
                "determinant of {}x{}",
                self.rows, self.cols
            )));
        }
        let p = self.p;
        let n = self.rows;
        let mut a = self.entries.clone();
        let mut det = 1u32;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| a[r * n + col] != 0) else {
                return Ok(0);
            };
            if piv != col {
                swap_rows(&mut a, n, piv, col);
                det = p.neg(det);
            }
            let pv = a[col * n + col];
            det = p.mul(det, pv);
            let pinv = p.inv(pv)?;
            for r in col + 1..n {
                let f = a[r * n + col];
                if f != 0 {
                    let c = p.neg(p.mul(f, pinv));
                    let (src, dst) = split_rows(&mut a, n, col, r);
                    axpy(p, dst, c, src);
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Option<FpMatrix>> {
        if !self.is_square() {
            return Err(OctoError::Shape(format!(
                "inverse of {}x{}",
                self.rows, self.cols
            )));
        }
        let (rref, t) = self.rref_with_transform();
        Ok((rref.rank == self.rows).then_some(t))
    }
}

fn swap_rows(a: &mut [u32], width: usize, i: usize, j: usize) {
    if i == j {
        return;
    }
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let (head, tail) = a.split_at_mut(hi * width);
    head[lo * width..(lo + 1) * width].swap_with_slice(&mut tail[..width]);
}

/// Borrow row `src` immutably and row `dst` mutably.
fn split_rows(a: &mut [u32], width: usize, src: usize, dst: usize) -> (&[u32], &mut [u32]) {
    debug_assert_ne!(src, dst);
    if src < dst {
        let (head, tail) = a.split_at_mut(dst * width);
        (&head[src * width..(src + 1) * width], &mut tail[..width])
    } else {
        let (head, tail) = a.split_at_mut(src * width);
        (&tail[..width], &mut head[dst * width..(dst + 1) * width])
    }
}

/// Gauss-Jordan on a row-major `rows x width` block, choosing pivots only in
/// the first `pivot_limit` columns. Returns pivot columns.
fn rref_in_place(
    p: FieldPrime,
    a: &mut [u32],
    rows: usize,
    width: usize,
    pivot_limit: usize,
) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..pivot_limit {
        if next == rows {
            break;
        }
        let Some(piv) = (next..rows).find(|&r| a[r * width + col] != 0) else {
            continue;
        };
        swap_rows(a, width, piv, next);
        let inv = p.inv(a[next * width + col]).expect("pivot is nonzero");
        if inv != 1 {
            for e in &mut a[next * width..(next + 1) * width] {
                *e = p.mul(*e, inv);
            }
        }
        for r in 0..rows {
            if r == next {
                continue;
            }
            let f = a[r * width + col];
            if f != 0 {
                let (src, dst) = split_rows(a, width, next, r);
                axpy(p, dst, p.neg(f), src);
            }
        }
        pivots.push(col);
        next += 1;
    }
    pivots
}

/// A subspace of F_p^n held as its reduced row-echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    pub p: FieldPrime,
    pub ambient_dim: usize,
    basis: FpMatrix,
    pivots: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    p: FieldPrime,
    ambient_dim: usize,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceJson {
            p: self.p,
            ambient_dim: self.ambient_dim,
            rows: self.basis.rows,
            cols: self.basis.cols,
            entries: self.basis.entries.iter().map(|&e| e as u64).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = SubspaceJson::deserialize(d)?;
        if raw.cols != raw.ambient_dim {
            return Err(D::Error::custom("basis width differs from ambient_dim"));
        }
        let entries = raw
            .entries
            .iter()
            .map(|&e| raw.p.check(e))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        let basis = FpMatrix::new(raw.p, raw.rows, raw.cols, entries).map_err(D::Error::custom)?;
        let sub = Subspace::row_space(&basis);
        if sub.basis != basis {
            return Err(D::Error::custom(
                "basis is not a full-rank reduced echelon form",
            ));
        }
        Ok(sub)
    }
}

impl Subspace {
    pub fn zero(p: FieldPrime, ambient_dim: usize) -> Self {
        Subspace {
            p,
            ambient_dim,
            basis: FpMatrix::zeros(p, 0, ambient_dim),
            pivots: vec![],
        }
    }

    pub fn full(p: FieldPrime, ambient_dim: usize) -> Self {
        Subspace {
            p,
            ambient_dim,
            basis: FpMatrix::identity(p, ambient_dim),
            pivots: (0..ambient_dim).collect(),
        }
    }

    /// Row space of `m`.
    pub fn row_space(m: &FpMatrix) -> Self {
        let rref = m.rref();
        let entries = rref.matrix.entries[..rref.rank * m.cols].to_vec();
        Subspace {
            p: m.p,
            ambient_dim: m.cols,
            basis: FpMatrix::from_raw(m.p, rref.rank, m.cols, entries),
            pivots: rref.pivot_cols,
        }
    }

    pub fn from_spanning(p: FieldPrime, ambient_dim: usize, vectors: &[FpVector]) -> Result<Self> {
        Ok(Self::row_space(&FpMatrix::from_rows(
            p,
            ambient_dim,
            vectors,
        )?))
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &FpMatrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Columns without a pivot, in increasing order.
    pub fn non_pivots(&self) -> Vec<usize> {
        (0..self.ambient_dim)
            .filter(|c| !self.pivots.contains(c))
            .collect()
    }

    fn check_ambient(&self, len: usize) -> Result<()> {
        if len != self.ambient_dim {
            return Err(OctoError::Shape(format!(
                "vector of length {} in ambient dimension {}",
                len, self.ambient_dim
            )));
        }
        Ok(())
    }

    /// Reduce `v` against the basis. The residual is zero at every pivot
    /// column and is zero overall iff `v` lies in the subspace.
    pub fn reduce(&self, v: &FpVector) -> Result<FpVector> {
        self.check_ambient(v.len())?;
        let mut out = v.entries().to_vec();
        self.reduce_in_place(&mut out);
        Ok(FpVector::from_raw(self.p, out))
    }

    pub(crate) fn reduce_in_place(&self, v: &mut [u32]) {
        let p = self.p;
        for (i, &c) in self.pivots.iter().enumerate() {
            let f = v[c];
            if f != 0 {
                axpy(p, v, p.neg(f), self.basis.row(i));
            }
        }
    }

    pub fn contains(&self, v: &FpVector) -> Result<bool> {
        Ok(self.reduce(v)?.is_zero())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        other.check_ambient(self.ambient_dim)?;
        for r in 0..self.dim() {
            if !other.contains(&self.basis.row_vector(r))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Structural equality of the canonical bases.
    pub fn equals(&self, other: &Subspace) -> Result<bool> {
        if self.ambient_dim != other.ambient_dim || self.p != other.p {
            return Err(OctoError::Shape(format!(
                "comparing subspaces of F_{}^{} and F_{}^{}",
                self.p, self.ambient_dim, other.p, other.ambient_dim
            )));
        }
        Ok(self.basis == other.basis)
    }

    /// Add `v` to the span, keeping the basis fully reduced. Returns whether
    /// the dimension grew.
    pub fn insert(&mut self, v: &FpVector) -> Result<bool> {
        let p = self.p;
        let mut r = self.reduce(v)?.into_entries();
        let Some(pc) = r.iter().position(|&e| e != 0) else {
            return Ok(false);
        };
        let inv = p.inv(r[pc])?;
        for e in &mut r {
            *e = p.mul(*e, inv);
        }
        let n = self.ambient_dim;
        let mut rows: Vec<Vec<u32>> = (0..self.dim())
            .map(|i| self.basis.row(i).to_vec())
            .collect();
        for row in &mut rows {
            let f = row[pc];
            if f != 0 {
                axpy(p, row, p.neg(f), &r);
            }
        }
        let at = self.pivots.partition_point(|&c| c < pc);
        rows.insert(at, r);
        self.pivots.insert(at, pc);
        self.basis = FpMatrix::from_raw(p, rows.len(), n, rows.concat());
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fp(p: u64) -> FieldPrime {
        FieldPrime::new(p).unwrap()
    }

    fn random_matrix(rng: &mut impl Rng, p: FieldPrime, rows: usize, cols: usize) -> FpMatrix {
        let entries = (0..rows * cols)
            .map(|_| rng.random_range(0..p.get()))
            .collect();
        FpMatrix::new(p, rows, cols, entries).unwrap()
    }

    fn random_invertible(rng: &mut impl Rng, p: FieldPrime, n: usize) -> FpMatrix {
        loop {
            let m = random_matrix(rng, p, n, n);
            if m.det().unwrap() != 0 {
                return m;
            }
        }
    }

    #[test]
    fn identity_and_zero_rref() {
        let p = fp(7);
        let id = FpMatrix::identity(p, 7);
        let r = id.rref();
        assert_eq!(r.matrix, id);
        assert_eq!(r.rank, 7);
        assert_eq!(r.pivot_cols, (0..7).collect::<Vec<_>>());

        let z = FpMatrix::zeros(p, 3, 4);
        let r = z.rref();
        assert_eq!(r.matrix, z);
        assert_eq!(r.rank, 0);
        assert!(r.pivot_cols.is_empty());
    }

    #[test]
    fn rref_idempotent_on_random_21x21() {
        let p = fp(5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, p, 21, 21);
            let once = m.rref();
            let twice = once.matrix.rref();
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn rref_is_canonical_under_row_operations() {
        let p = fp(7);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, p, 6, 10);
            let g = random_invertible(&mut rng, p, 6);
            assert_eq!(m.rref().matrix, g.mul(&m).unwrap().rref().matrix);
        }
    }

    #[test]
    fn rank_nullity() {
        let p = fp(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for rows in 1..9 {
            for cols in 1..9 {
                let m = random_matrix(&mut rng, p, rows, cols);
                let k = m.kernel();
                assert_eq!(m.rank() + k.dim(), rows);
                for r in 0..k.dim() {
                    assert!(k.basis().row_vector(r).mul_mat(&m).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn kernel_trivial_cases() {
        let p = fp(5);
        assert_eq!(FpMatrix::zeros(p, 7, 7).kernel(), Subspace::full(p, 7));
        assert_eq!(FpMatrix::identity(p, 7).kernel().dim(), 0);
    }

    #[test]
    fn solve_identity_and_zero() {
        let p = fp(7);
        let b = FpMatrix::from_i64(p, 1, 4, &[1, 2, 3, 4]).unwrap();
        let sol = FpMatrix::identity(p, 4).solve(&b).unwrap().unwrap();
        assert_eq!(sol.particular, b);
        assert_eq!(sol.homogeneous.dim(), 0);

        let z = FpMatrix::zeros(p, 4, 4);
        let sol = z.solve(&FpMatrix::zeros(p, 1, 4)).unwrap().unwrap();
        assert_eq!(sol.homogeneous.dim(), 4);
        assert!(z.solve(&b).unwrap().is_none());

        assert!(matches!(
            z.solve(&FpMatrix::zeros(p, 1, 3)),
            Err(OctoError::Shape(_))
        ));
    }

    #[test]
    fn solve_random_consistent_systems() {
        let p = fp(7);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, p, 5, 8);
            let x = random_matrix(&mut rng, p, 3, 5);
            let b = x.mul(&a).unwrap();
            let sol = a.solve(&b).unwrap().expect("consistent by construction");
            assert_eq!(sol.particular.mul(&a).unwrap(), b);
        }
    }

    #[test]
    fn determinant_and_inverse() {
        let p = fp(11);
        let m = FpMatrix::from_i64(p, 2, 2, &[1, 2, 3, 4]).unwrap();
        assert_eq!(m.det().unwrap(), p.reduce(-2));
        let inv = m.inverse().unwrap().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), FpMatrix::identity(p, 2));
        let singular = FpMatrix::from_i64(p, 2, 2, &[1, 2, 2, 4]).unwrap();
        assert_eq!(singular.det().unwrap(), 0);
        assert!(singular.inverse().unwrap().is_none());
    }

    #[test]
    fn determinant_is_multiplicative() {
        let p = fp(13);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let a = random_matrix(&mut rng, p, 5, 5);
            let b = random_matrix(&mut rng, p, 5, 5);
            let ab = a.mul(&b).unwrap();
            assert_eq!(ab.det().unwrap(), p.mul(a.det().unwrap(), b.det().unwrap()));
        }
    }

    #[test]
    fn subspace_equality_and_membership() {
        let p = fp(5);
        let rows = [
            FpVector::from_i64(p, &[1, 2, 0, 3]),
            FpVector::from_i64(p, &[0, 1, 1, 1]),
        ];
        let u = Subspace::from_spanning(p, 4, &rows).unwrap();
        let swapped = Subspace::from_spanning(p, 4, &[rows[1].clone(), rows[0].clone()]).unwrap();
        assert!(u.equals(&swapped).unwrap());
        for r in 0..u.dim() {
            assert!(u.contains(&u.basis().row_vector(r)).unwrap());
        }
        let non_pivot = u.non_pivots()[0];
        let witness = rows[0].add(&FpVector::unit(p, 4, non_pivot));
        assert!(!u.contains(&witness).unwrap());
        assert!(u
            .contains(&FpVector::from_i64(p, &[7, 3, 0, 1]).scale(0))
            .unwrap());
        assert!(u.equals(&Subspace::zero(p, 5)).is_err());
        assert!(u.contains(&FpVector::zeros(p, 3)).is_err());
    }

    #[test]
    fn insert_matches_batch_rref() {
        let p = fp(3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, p, 6, 9);
            let mut inc = Subspace::zero(p, 9);
            for v in m.row_vectors() {
                inc.insert(&v).unwrap();
            }
            assert_eq!(inc, Subspace::row_space(&m));
        }
    }

    #[test]
    fn matrix_json_rejects_noncanonical() {
        let bad = r#"{"p":5,"rows":1,"cols":2,"entries":[1,5]}"#;
        assert!(serde_json::from_str::<FpMatrix>(bad).is_err());
        let short = r#"{"p":5,"rows":2,"cols":2,"entries":[1,2]}"#;
        assert!(serde_json::from_str::<FpMatrix>(short).is_err());
        let ok = r#"{"p":5,"rows":1,"cols":2,"entries":[1,4]}"#;
        let m: FpMatrix = serde_json::from_str(ok).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), ok);
    }

    #[test]
    fn subspace_json_requires_rref() {
        let p = fp(5);
        let u = Subspace::from_spanning(p, 3, &[FpVector::from_i64(p, &[2, 4, 1])]).unwrap();
        let s = serde_json::to_string(&u).unwrap();
        assert_eq!(
            s,
            r#"{"p":5,"ambient_dim":3,"rows":1,"cols":3,"entries":[1,2,3]}"#
        );
        assert_eq!(serde_json::from_str::<Subspace>(&s).unwrap(), u);
        let not_rref = r#"{"p":5,"ambient_dim":3,"rows":1,"cols":3,"entries":[2,4,1]}"#;
        assert!(serde_json::from_str::<Subspace>(not_rref).is_err());
    }
}
