//! Words and tensor powers of V.
//!
//! A word x_{i_1}…x_{i_p} is encoded by its base-n rank with the first letter
//! most significant, so rank order is lexicographic order.

use crate::linalg::{Accum, Subspace, SparseVec};

pub fn pow(n: usize, p: usize) -> usize {
    n.checked_pow(p as u32).expect("tensor power dimension overflows usize")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorBasisIndex {
    pub n: usize,
    pub p: usize,
}

impl TensorBasisIndex {
    pub fn new(n: usize, p: usize) -> TensorBasisIndex {
        TensorBasisIndex { n, p }
    }

    pub fn dim(&self) -> usize {
        pow(self.n, self.p)
    }

    pub fn rank(&self, word: &[usize]) -> usize {
        debug_assert_eq!(word.len(), self.p);
        word.iter().fold(0, |acc, &l| {
            debug_assert!(l < self.n);
            acc * self.n + l
        })
    }

    pub fn word(&self, mut rank: usize) -> Vec<usize> {
        let mut w = vec![0; self.p];
        for slot in w.iter_mut().rev() {
            *slot = rank % self.n;
            rank /= self.n;
        }
        w
    }
}

/// V^{⊗i} ⊗ S ⊗ V^{⊗j} inside V^{⊗(i+r+j)}, for S ⊆ V^{⊗r}.
pub fn embed_block(s: &Subspace, n: usize, r: usize, i: usize, j: usize) -> Subspace {
    debug_assert_eq!(s.ambient_dim(), pow(n, r));
    let (ni, nj, nr) = (pow(n, i), pow(n, j), pow(n, r));
    let ambient = ni * nr * nj;
    let mut rows: Vec<SparseVec> = Vec::with_capacity(ni * s.dim() * nj);
    for u in 0..ni {
        for b in s.basis() {
            for v in 0..nj {
                rows.push(b.map_indices_monotone(|c| (u * nr + c) * nj + v));
            }
        }
    }
    // Distinct (u, b, v) have distinct pivots and each row vanishes on the
    // other pivots, so sorting by pivot already gives the canonical form.
    rows.sort_by_key(|r| r.max_index());
    Subspace::from_canonical_rows(ambient, s.field(), rows)
}

/// Coordinates of `v ∈ V^{⊗(p+q)}` in the product basis of `left ⊗ right`,
/// where `left ⊆ V^{⊗p}` and `right ⊆ V^{⊗q}`; index `a * dim(right) + b`.
/// Returns `None` when `v` does not lie in `left ⊗ right`.
pub fn factor_vector(
    v: &SparseVec,
    n: usize,
    q: usize,
    left: &Subspace,
    right: &Subspace,
) -> Option<SparseVec> {
    let field = left.field();
    let nq = pow(n, q);
    // Split v as Σ_u e_u ⊗ v_u and read each v_u in the right basis.
    let mut slices: Vec<(usize, Vec<(usize, crate::scalars::Scalar)>)> = Vec::new();
    for (idx, c) in v.iter() {
        let (u, w) = (idx / nq, idx % nq);
        match slices.last_mut() {
            Some((last, entries)) if *last == u => entries.push((w, c.clone())),
            _ => slices.push((u, vec![(w, c.clone())])),
        }
    }
    let mut by_right: Vec<Accum> = (0..right.dim()).map(|_| Accum::default()).collect();
    for (u, entries) in slices {
        let vu = SparseVec::from_entries(entries);
        let coords = right.coordinates(&vu)?;
        for (b, c) in coords.iter() {
            by_right[b].add(u, c);
        }
    }
    let mut out = Accum::default();
    let db = right.dim();
    for (b, acc) in by_right.into_iter().enumerate() {
        let column = acc.finish();
        if column.is_zero() {
            continue;
        }
        let coords = left.coordinates(&column)?;
        out.add_vec_offset(&field.one(), &coords, |a| a * db + b);
    }
    Some(out.finish())
}

/// Tensor product of two vectors: index `a * dim_b + b`.
pub fn tensor_vec(a: &SparseVec, b: &SparseVec, dim_b: usize) -> SparseVec {
    let mut acc = Accum::default();
    for (i, x) in a.iter() {
        acc.add_vec_offset(x, b, |j| i * dim_b + j);
    }
    acc.finish()
}

/// Values of the form `u` on each basis vector of `w`.
pub fn restrict_form(u: &SparseVec, w: &Subspace) -> SparseVec {
    let field = w.field();
    SparseVec::from_dense(&w.basis().iter().map(|b| u.dot(b, field)).collect::<Vec<_>>())
}

/// A form on the ambient space restricting to `t` on `w`, supported on the
/// pivot words of the echelon basis of `w`.
pub fn lift_form(t: &SparseVec, w: &Subspace) -> SparseVec {
    t.map_indices_monotone(|j| w.pivots()[j])
}
