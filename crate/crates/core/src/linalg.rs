//! Exact sparse linear algebra.
//!
//! Subspaces are kept in reduced echelon form where the pivot of a row is its
//! *largest* coordinate index. With coordinates ordered lexicographically on
//! words this is elimination by leading (greatest) monomial, so the non-pivot
//! coordinates of a relation space are exactly the normal words of the
//! quotient. [`rref`] on plain matrices uses the textbook convention instead
//! (pivot = first nonzero column).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::scalars::{Field, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("differentials do not compose to zero")]
    NonzeroComposition,
    #[error("vector is not in the expected subspace")]
    NotInSpace,
    #[error("matrix is singular")]
    Singular,
    #[error("intersection of an empty family")]
    EmptyFamily,
}

/// Sparse vector: entries sorted by index, no stored zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SparseVec {
    entries: Vec<(usize, Scalar)>,
}

impl SparseVec {
    pub fn zero() -> SparseVec {
        SparseVec::default()
    }

    pub fn unit(i: usize, field: Field) -> SparseVec {
        SparseVec {
            entries: vec![(i, field.one())],
        }
    }

    /// Builds a vector from arbitrary (index, value) pairs, summing repeats.
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, Scalar)>) -> SparseVec {
        let mut acc = Accum::default();
        for (i, c) in entries {
            acc.add(i, &c);
        }
        acc.finish()
    }

    /// Wraps entries already sorted and free of zeros.
    fn from_sorted(entries: Vec<(usize, Scalar)>) -> SparseVec {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|(_, c)| !c.is_zero()));
        SparseVec { entries }
    }

    pub fn from_dense(values: &[Scalar]) -> SparseVec {
        SparseVec::from_sorted(
            values
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i, c.clone()))
                .collect(),
        )
    }

    pub fn to_dense(&self, dim: usize, field: Field) -> Vec<Scalar> {
        let mut out = vec![field.zero(); dim];
        for (i, c) in &self.entries {
            out[*i] = c.clone();
        }
        out
    }

    pub fn entries(&self) -> &[(usize, Scalar)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Scalar)> {
        self.entries.iter().map(|(i, c)| (*i, c))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Scalar> {
        self.entries
            .binary_search_by_key(&i, |(k, _)| *k)
            .ok()
            .map(|pos| &self.entries[pos].1)
    }

    pub fn coeff(&self, i: usize, field: Field) -> Scalar {
        self.get(i).cloned().unwrap_or_else(|| field.zero())
    }

    /// Largest stored index with its value.
    pub fn last(&self) -> Option<(usize, &Scalar)> {
        self.entries.last().map(|(i, c)| (*i, c))
    }

    pub fn first(&self) -> Option<(usize, &Scalar)> {
        self.entries.first().map(|(i, c)| (*i, c))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.last().map(|(i, _)| i)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: &Scalar, other: &SparseVec) -> SparseVec {
        if c.is_zero() || other.is_zero() {
            return self.clone();
        }
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, c * &b[j].1));
                j += 1;
            } else {
                let v = &a[i].1 + &(c * &b[j].1);
                if !v.is_zero() {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        SparseVec::from_sorted(out)
    }

    pub fn add(&self, other: &SparseVec) -> SparseVec {
        match other.entries.first() {
            None => self.clone(),
            Some((_, c)) => self.add_scaled(&c.field().one(), other),
        }
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        match other.entries.first() {
            None => self.clone(),
            Some((_, c)) => self.add_scaled(&-c.field().one(), other),
        }
    }

    pub fn scale(&self, c: &Scalar) -> SparseVec {
        if c.is_zero() {
            return SparseVec::zero();
        }
        SparseVec::from_sorted(self.entries.iter().map(|(i, v)| (*i, v * c)).collect())
    }

    pub fn neg(&self) -> SparseVec {
        SparseVec::from_sorted(self.entries.iter().map(|(i, v)| (*i, -v)).collect())
    }

    pub fn dot(&self, other: &SparseVec, field: Field) -> Scalar {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut acc = field.zero();
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc = &acc + &(&a[i].1 * &b[j].1);
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Re-indexes every entry through an order-preserving map.
    pub fn map_indices_monotone(&self, f: impl Fn(usize) -> usize) -> SparseVec {
        SparseVec::from_sorted(self.entries.iter().map(|(i, c)| (f(*i), c.clone())).collect())
    }

    /// Re-indexes every entry through an arbitrary injective map.
    pub fn map_indices(&self, f: impl Fn(usize) -> usize) -> SparseVec {
        SparseVec::from_entries(self.entries.iter().map(|(i, c)| (f(*i), c.clone())))
    }
}

/// Accumulator for building a vector from many scattered contributions.
#[derive(Debug, Default)]
pub struct Accum {
    map: BTreeMap<usize, Scalar>,
}

impl Accum {
    pub fn add(&mut self, i: usize, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.map.get_mut(&i) {
            Some(v) => *v = &*v + c,
            None => {
                self.map.insert(i, c.clone());
            }
        }
    }

    pub fn add_vec(&mut self, c: &Scalar, v: &SparseVec) {
        if c.is_zero() {
            return;
        }
        for (i, x) in v.iter() {
            self.add(i, &(c * x));
        }
    }

    pub fn add_vec_offset(&mut self, c: &Scalar, v: &SparseVec, index: impl Fn(usize) -> usize) {
        if c.is_zero() {
            return;
        }
        for (i, x) in v.iter() {
            self.add(index(i), &(c * x));
        }
    }

    pub fn finish(self) -> SparseVec {
        SparseVec::from_sorted(self.map.into_iter().filter(|(_, c)| !c.is_zero()).collect())
    }
}

/// Sparse row-major matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<SparseVec>,
}

impl Mat {
    pub fn new(cols: usize, data: Vec<SparseVec>) -> Mat {
        assert!(data.iter().all(|r| r.max_index().is_none_or(|i| i < cols)));
        Mat {
            rows: data.len(),
            cols,
            data,
        }
    }

    pub fn from_dense(cols: usize, rows: &[Vec<Scalar>]) -> Mat {
        Mat::new(cols, rows.iter().map(|r| SparseVec::from_dense(r)).collect())
    }

    pub fn transpose(&self) -> Mat {
        let mut cols: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); self.cols];
        for (r, row) in self.data.iter().enumerate() {
            for (c, v) in row.iter() {
                cols[c].push((r, v.clone()));
            }
        }
        Mat {
            rows: self.cols,
            cols: self.rows,
            data: cols.into_iter().map(SparseVec::from_sorted).collect(),
        }
    }
}

/// Which elimination routine [`rref_with`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Elimination {
    #[default]
    Incremental,
    Bareiss,
}

/// Reduced row-echelon form (pivot = first nonzero column).
pub fn rref(m: &Mat) -> (Mat, Vec<usize>) {
    rref_with(m, Elimination::Incremental)
}

pub fn rref_with(m: &Mat, method: Elimination) -> (Mat, Vec<usize>) {
    match method {
        Elimination::Incremental => {
            let n = m.cols;
            let flip = |i: usize| n - 1 - i;
            let Some(field) = matrix_field(m) else {
                return (Mat::new(n, vec![]), vec![]);
            };
            let mut ech = Echelon::new(n, field);
            for row in &m.data {
                ech.insert(&row.map_indices(flip));
            }
            let rows: Vec<SparseVec> =
                ech.rows.iter().rev().map(|r| r.map_indices(flip)).collect();
            let pivots = ech.pivots.iter().rev().map(|&p| flip(p)).collect();
            (Mat::new(n, rows), pivots)
        }
        Elimination::Bareiss => bareiss_rref(m),
    }
}

fn matrix_field(m: &Mat) -> Option<Field> {
    m.data.iter().find_map(|r| r.first().map(|(_, c)| c.field()))
}

// Fraction-free forward elimination, then normalization and back substitution.
fn bareiss_rref(m: &Mat) -> (Mat, Vec<usize>) {
    let Some(field) = matrix_field(m) else {
        return (Mat::new(m.cols, vec![]), vec![]);
    };
    let mut a: Vec<Vec<Scalar>> = m.data.iter().map(|r| r.to_dense(m.cols, field)).collect();
    let mut prev = field.one();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..m.cols {
        let Some(i) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(i, r);
        let inv_prev = prev.inv();
        for i in r + 1..a.len() {
            for j in c + 1..m.cols {
                let v = &(&a[r][c] * &a[i][j]) - &(&a[i][c] * &a[r][j]);
                a[i][j] = &v * &inv_prev;
            }
            a[i][c] = field.zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    for (k, &c) in pivots.iter().enumerate() {
        let inv = a[k][c].inv();
        for v in a[k].iter_mut() {
            *v = &*v * &inv;
        }
    }
    for k in (0..r).rev() {
        let c = pivots[k];
        let (top, rest) = a.split_at_mut(k);
        let pivot_row = &rest[0];
        for row in top.iter_mut() {
            let f = row[c].clone();
            if f.is_zero() {
                continue;
            }
            for (x, y) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                *x = &*x - &(&f * y);
            }
        }
    }
    (Mat::from_dense(m.cols, &a), pivots)
}

/// Incrementally maintained reduced echelon basis (pivot = largest index).
#[derive(Debug, Clone)]
pub struct Echelon {
    ambient: usize,
    field: Field,
    rows: Vec<SparseVec>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(ambient: usize, field: Field) -> Echelon {
        Echelon {
            ambient,
            field,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Remainder of `v` after full reduction by the basis.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        reduce_against(&self.rows, &self.pivots, v)
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        debug_assert!(v.max_index().is_none_or(|i| i < self.ambient));
        let r = self.reduce(v);
        let Some((c, lead)) = r.last() else {
            return false;
        };
        let r = r.scale(&lead.inv());
        for row in self.rows.iter_mut() {
            if let Some(x) = row.get(c) {
                let x = -x;
                *row = row.add_scaled(&x, &r);
            }
        }
        let pos = self.pivots.partition_point(|&p| p < c);
        self.pivots.insert(pos, c);
        self.rows.insert(pos, r);
        true
    }

    pub fn into_subspace(self) -> Subspace {
        Subspace {
            ambient_dim: self.ambient,
            field: self.field,
            rows: self.rows,
            pivots: self.pivots,
        }
    }
}

fn reduce_against(rows: &[SparseVec], pivots: &[usize], v: &SparseVec) -> SparseVec {
    let mut v = v.clone();
    let mut hi = v.entries.len();
    while hi > 0 {
        let (c, coef) = v.entries[hi - 1].clone();
        match pivots.binary_search(&c) {
            Ok(i) => {
                v = v.add_scaled(&-coef, &rows[i]);
                hi = v.entries.partition_point(|(k, _)| *k < c);
            }
            Err(_) => hi -= 1,
        }
    }
    v
}

/// A subspace of k^ambient_dim with canonical reduced echelon basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    field: Field,
    rows: Vec<SparseVec>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize, field: Field) -> Subspace {
        Echelon::new(ambient_dim, field).into_subspace()
    }

    pub fn full(ambient_dim: usize, field: Field) -> Subspace {
        Subspace {
            ambient_dim,
            field,
            rows: (0..ambient_dim).map(|i| SparseVec::unit(i, field)).collect(),
            pivots: (0..ambient_dim).collect(),
        }
    }

    pub fn span<'a>(
        ambient_dim: usize,
        field: Field,
        vectors: impl IntoIterator<Item = &'a SparseVec>,
    ) -> Subspace {
        let mut e = Echelon::new(ambient_dim, field);
        for v in vectors {
            e.insert(v);
        }
        e.into_subspace()
    }

    /// Wraps rows that are already in canonical form, after checking them.
    pub fn from_canonical_rows(ambient_dim: usize, field: Field, rows: Vec<SparseVec>) -> Subspace {
        let pivots: Vec<usize> = rows.iter().map(|r| r.max_index().expect("nonzero row")).collect();
        let s = Subspace {
            ambient_dim,
            field,
            rows,
            pivots,
        };
        debug_assert!(s.is_canonical());
        s
    }

    fn is_canonical(&self) -> bool {
        self.pivots.windows(2).all(|w| w[0] < w[1])
            && self.rows.iter().zip(&self.pivots).enumerate().all(|(k, (r, &p))| {
                r.last().is_some_and(|(i, c)| i == p && c.is_one())
                    && self
                        .pivots
                        .iter()
                        .enumerate()
                        .all(|(j, &q)| j == k || r.get(q).is_none())
            })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[SparseVec] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis_mat(&self) -> Mat {
        Mat::new(self.ambient_dim, self.rows.clone())
    }

    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        reduce_against(&self.rows, &self.pivots, v)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_zero()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }

    /// Coordinates of `v` in the basis, or `None` if `v` is not a member.
    pub fn coordinates(&self, v: &SparseVec) -> Option<SparseVec> {
        let coords = SparseVec::from_sorted(
            self.pivots
                .iter()
                .enumerate()
                .filter_map(|(k, &p)| v.get(p).map(|c| (k, c.clone())))
                .collect(),
        );
        (self.combine(&coords) == *v).then_some(coords)
    }

    /// Linear combination of basis vectors.
    pub fn combine(&self, coords: &SparseVec) -> SparseVec {
        let mut acc = Accum::default();
        for (k, c) in coords.iter() {
            acc.add_vec(c, &self.rows[k]);
        }
        acc.finish()
    }

    pub fn to_echelon(&self) -> Echelon {
        Echelon {
            ambient: self.ambient_dim,
            field: self.field,
            rows: self.rows.clone(),
            pivots: self.pivots.clone(),
        }
    }

    /// The inclusion map into the ambient space.
    pub fn inclusion(&self) -> LinearMap {
        LinearMap::new(self.dim(), self.ambient_dim, self.field, self.rows.clone())
    }
}

pub fn sum(a: &Subspace, b: &Subspace) -> Subspace {
    let mut e = a.to_echelon();
    for v in b.basis() {
        e.insert(v);
    }
    e.into_subspace()
}

/// Linear map stored by the images of the source basis vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMap {
    src_dim: usize,
    dst_dim: usize,
    field: Field,
    columns: Vec<SparseVec>,
}

impl LinearMap {
    pub fn new(src_dim: usize, dst_dim: usize, field: Field, columns: Vec<SparseVec>) -> LinearMap {
        assert_eq!(columns.len(), src_dim, "column count");
        assert!(
            columns.iter().all(|c| c.max_index().is_none_or(|i| i < dst_dim)),
            "column entry out of range"
        );
        LinearMap {
            src_dim,
            dst_dim,
            field,
            columns,
        }
    }

    pub fn zero(src_dim: usize, dst_dim: usize, field: Field) -> LinearMap {
        LinearMap::new(src_dim, dst_dim, field, vec![SparseVec::zero(); src_dim])
    }

    pub fn identity(n: usize, field: Field) -> LinearMap {
        LinearMap::new(n, n, field, (0..n).map(|i| SparseVec::unit(i, field)).collect())
    }

    /// From a row-major matrix of shape dst × src.
    pub fn from_mat(m: &Mat, field: Field) -> LinearMap {
        let t = m.transpose();
        LinearMap::new(m.cols, m.rows, field, t.data)
    }

    pub fn to_mat(&self) -> Mat {
        Mat {
            rows: self.src_dim,
            cols: self.dst_dim,
            data: self.columns.clone(),
        }
        .transpose()
    }

    pub fn src_dim(&self) -> usize {
        self.src_dim
    }

    pub fn dst_dim(&self) -> usize {
        self.dst_dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn column(&self, j: usize) -> &SparseVec {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.columns
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut acc = Accum::default();
        for (j, c) in v.iter() {
            acc.add_vec(c, &self.columns[j]);
        }
        acc.finish()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinearMap) -> Result<LinearMap, LinalgError> {
        if other.dst_dim != self.src_dim {
            return Err(LinalgError::Dimension(format!(
                "compose {}x{} after {}x{}",
                self.dst_dim, self.src_dim, other.dst_dim, other.src_dim
            )));
        }
        Ok(LinearMap::new(
            other.src_dim,
            self.dst_dim,
            self.field,
            other.columns.iter().map(|c| self.apply(c)).collect(),
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_zero())
    }

    pub fn transpose(&self) -> LinearMap {
        let rows = self.to_mat();
        LinearMap::new(self.dst_dim, self.src_dim, self.field, rows.data)
    }

    pub fn add(&self, other: &LinearMap) -> LinearMap {
        assert_eq!((self.src_dim, self.dst_dim), (other.src_dim, other.dst_dim));
        LinearMap::new(
            self.src_dim,
            self.dst_dim,
            self.field,
            self.columns.iter().zip(&other.columns).map(|(a, b)| a.add(b)).collect(),
        )
    }

    pub fn sub(&self, other: &LinearMap) -> LinearMap {
        self.add(&other.scale(&-self.field.one()))
    }

    pub fn scale(&self, c: &Scalar) -> LinearMap {
        LinearMap::new(
            self.src_dim,
            self.dst_dim,
            self.field,
            self.columns.iter().map(|v| v.scale(c)).collect(),
        )
    }

    pub fn rank(&self) -> usize {
        image_basis(self).dim()
    }

    pub fn is_injective(&self) -> bool {
        self.rank() == self.src_dim
    }

    pub fn is_surjective(&self) -> bool {
        self.rank() == self.dst_dim
    }

    /// Inverse of a square invertible map.
    pub fn inverse(&self) -> Result<LinearMap, LinalgError> {
        let n = self.src_dim;
        if n != self.dst_dim {
            return Err(LinalgError::Dimension(format!("{}x{} is not square", self.dst_dim, n)));
        }
        // Rows of [I | M] with the M block in the high coordinates, so the
        // pivots land in M and the identity block records the inverse rows.
        let rows = self.to_mat();
        let mut e = Echelon::new(2 * n, self.field);
        for (i, r) in rows.data.iter().enumerate() {
            let shifted = r.map_indices_monotone(|j| j + n);
            e.insert(&SparseVec::unit(i, self.field).add(&shifted));
        }
        if e.dim() < n || e.pivots.iter().any(|&p| p < n) {
            return Err(LinalgError::Singular);
        }
        let inv_rows: Vec<SparseVec> = e
            .rows
            .iter()
            .map(|r| SparseVec::from_sorted(r.iter().filter(|(j, _)| *j < n).map(|(j, c)| (j, c.clone())).collect()))
            .collect();
        let inv = LinearMap::from_mat(&Mat::new(n, inv_rows), self.field);
        debug_assert_eq!(inv.compose(self).unwrap(), LinearMap::identity(n, self.field));
        Ok(inv)
    }
}

pub fn kernel_basis(f: &LinearMap) -> Subspace {
    let rows = f.to_mat();
    let mut e = Echelon::new(f.src_dim, f.field);
    for r in &rows.data {
        e.insert(r);
    }
    let field = f.field;
    let mut vectors = Vec::new();
    let mut next_pivot = 0;
    for free in 0..f.src_dim {
        if next_pivot < e.pivots.len() && e.pivots[next_pivot] == free {
            next_pivot += 1;
            continue;
        }
        let mut acc = Accum::default();
        acc.add(free, &field.one());
        for (row, &p) in e.rows.iter().zip(&e.pivots) {
            if let Some(c) = row.get(free) {
                acc.add(p, &-c);
            }
        }
        vectors.push(acc.finish());
    }
    Subspace::span(f.src_dim, field, &vectors)
}

pub fn image_basis(f: &LinearMap) -> Subspace {
    Subspace::span(f.dst_dim, f.field, &f.columns)
}

/// Exact intersection of a nonempty family of subspaces.
///
/// Solves for coefficient vectors α on the basis of the first space such
/// that Σ α_k s_k reduces to zero modulo every other space.
pub fn intersect(subs: &[Subspace]) -> Result<Subspace, LinalgError> {
    let first = subs.first().ok_or(LinalgError::EmptyFamily)?;
    let n = first.ambient_dim;
    if subs.iter().any(|s| s.ambient_dim != n) {
        return Err(LinalgError::Dimension("intersection of different ambients".into()));
    }
    if subs.len() == 1 {
        return Ok(first.clone());
    }
    let others = &subs[1..];
    if first.dim() == 0 || others.iter().any(|s| s.dim() == 0) {
        return Ok(Subspace::zero(n, first.field));
    }
    let columns: Vec<SparseVec> = first
        .rows
        .iter()
        .map(|s| {
            let mut acc = Accum::default();
            for (j, t) in others.iter().enumerate() {
                acc.add_vec_offset(&first.field.one(), &t.reduce(s), |i| j * n + i);
            }
            acc.finish()
        })
        .collect();
    let constraints = LinearMap::new(first.dim(), others.len() * n, first.field, columns);
    let alphas = kernel_basis(&constraints);
    let vectors: Vec<SparseVec> = alphas.rows.iter().map(|a| first.combine(a)).collect();
    Ok(Subspace::span(n, first.field, &vectors))
}

/// Quotient (within + sub) / sub with canonical coset representatives.
#[derive(Debug, Clone)]
pub struct QuotientSpace {
    ambient_dim: usize,
    sub: Subspace,
    reps: Subspace,
}

impl QuotientSpace {
    /// k^ambient / sub. Representatives are the non-pivot unit vectors.
    pub fn full(sub: Subspace) -> QuotientSpace {
        let field = sub.field;
        let n = sub.ambient_dim;
        let mut rows = Vec::with_capacity(n - sub.dim());
        let mut k = 0;
        for i in 0..n {
            if k < sub.pivots.len() && sub.pivots[k] == i {
                k += 1;
            } else {
                rows.push(SparseVec::unit(i, field));
            }
        }
        let pivots = rows.iter().map(|r| r.max_index().unwrap()).collect();
        let reps = Subspace {
            ambient_dim: n,
            field,
            rows,
            pivots,
        };
        QuotientSpace {
            ambient_dim: n,
            sub,
            reps,
        }
    }

    /// within / sub, where sub ⊆ within is assumed (checked in debug builds).
    pub fn of(within: &Subspace, sub: Subspace) -> QuotientSpace {
        debug_assert!(within.contains_subspace(&sub));
        let mut e = Echelon::new(within.ambient_dim, within.field);
        for w in &within.rows {
            e.insert(&sub.reduce(w));
        }
        QuotientSpace {
            ambient_dim: within.ambient_dim,
            sub,
            reps: e.into_subspace(),
        }
    }

    pub fn dim(&self) -> usize {
        self.reps.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn sub(&self) -> &Subspace {
        &self.sub
    }

    pub fn field(&self) -> Field {
        self.sub.field
    }

    /// Representative vectors, one per quotient coordinate.
    pub fn representatives(&self) -> &[SparseVec] {
        &self.reps.rows
    }

    pub fn section(&self, i: usize) -> &SparseVec {
        &self.reps.rows[i]
    }

    /// Pivot coordinate of each representative.
    pub fn rep_pivots(&self) -> &[usize] {
        &self.reps.pivots
    }

    /// Quotient coordinates of `v`; fails if `v` is not in within + sub.
    pub fn project(&self, v: &SparseVec) -> Result<SparseVec, LinalgError> {
        let r = self.sub.reduce(v);
        self.reps.coordinates(&r).ok_or(LinalgError::NotInSpace)
    }

    pub fn section_map(&self) -> LinearMap {
        self.reps.inclusion()
    }

    pub fn project_map(&self) -> Result<LinearMap, LinalgError> {
        let field = self.field();
        let cols = (0..self.ambient_dim)
            .map(|j| self.project(&SparseVec::unit(j, field)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LinearMap::new(self.ambient_dim, self.dim(), field, cols))
    }
}

/// ker(d_out) / im(d_in) with canonical representatives.
#[derive(Debug, Clone)]
pub struct Homology {
    pub cycles: Subspace,
    pub boundaries: Subspace,
    pub quotient: QuotientSpace,
}

impl Homology {
    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    pub fn representative(&self, i: usize) -> &SparseVec {
        self.quotient.section(i)
    }

    pub fn representatives(&self) -> &[SparseVec] {
        self.quotient.representatives()
    }

    /// Class of a cycle; fails if `v` is not a cycle.
    pub fn project(&self, v: &SparseVec) -> Result<SparseVec, LinalgError> {
        if !self.cycles.contains(v) {
            return Err(LinalgError::NotInSpace);
        }
        self.quotient.project(v)
    }

    pub fn is_boundary(&self, v: &SparseVec) -> bool {
        self.boundaries.contains(v)
    }
}

pub fn homology_at(d_in: &LinearMap, d_out: &LinearMap) -> Result<Homology, LinalgError> {
    if d_in.dst_dim != d_out.src_dim {
        return Err(LinalgError::Dimension(format!(
            "incoming map lands in dim {}, outgoing starts at dim {}",
            d_in.dst_dim, d_out.src_dim
        )));
    }
    if !d_out.compose(d_in)?.is_zero() {
        return Err(LinalgError::NonzeroComposition);
    }
    let cycles = kernel_basis(d_out);
    let boundaries = image_basis(d_in);
    let quotient = QuotientSpace::of(&cycles, boundaries.clone());
    Ok(Homology {
        cycles,
        boundaries,
        quotient,
    })
}
