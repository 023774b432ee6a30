//! Antisymmetric tensor samples: differential forms and multivectors at a
//! point, plus mixed (1,1) tensors.
//!
//! Components are indexed by strictly increasing tuples, encoded as `u64`
//! bitmasks (bit `i` set means coordinate `i` participates). Storage is a
//! dense component array for degree <= 4 in dimension <= 8 and a sparse
//! mask map above that; dimensions beyond 64 are rejected.
//!
//! Conventions fixed here and relied on everywhere else:
//!
//! * `(dx_1 ^ dx_2)(e_1, e_2) = 1`, i.e. the increasing component of a
//!   basis wedge is `+1`.
//! * The form/multivector pairing sums products of increasing components:
//!   `<dx_1 ^ dx_2, d_1 ^ d_2> = 1`.
//! * The interior product contracts a vector into the first slot:
//!   `(i_X a)_{j...} = sum_j X^j a_{j j...}`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};

const DENSE_MAX_DEGREE: usize = 4;
const DENSE_MAX_DIM: usize = 8;
const MAX_DIM: usize = 64;

/// Bitmask of a strictly increasing index tuple.
fn mask_of_sorted(idx: &[usize]) -> u64 {
    idx.iter().fold(0u64, |m, &i| m | (1u64 << i))
}

/// Sorts an index tuple, returning its mask and permutation sign, or `None`
/// when an index repeats (the component is then zero).
fn canonicalize(idx: &[usize]) -> Option<(u64, f64)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    // Insertion sort, counting swaps; tuples are tiny.
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((mask_of_sorted(&v), sign))
}

fn indices_of_mask(mut m: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        out.push(i);
        m &= m - 1;
    }
    out
}

/// Sign of merging two disjoint increasing tuples `a, b` into one sorted
/// tuple: parity of the number of pairs `(x in a, y in b)` with `x > y`.
fn merge_sign(a: u64, b: u64) -> f64 {
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let y = bb.trailing_zeros();
        // Bits of `a` strictly above `y`; checked shift since y may be 63.
        inversions += a.checked_shr(y + 1).unwrap_or(0).count_ones();
        bb &= bb - 1;
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Parity sign of inserting index `j` in front of the increasing tuple `m`:
/// `(-1)^(number of bits of m below j)`.
fn front_insertion_sign(m: u64, j: usize) -> f64 {
    let below = (m & ((1u64 << j) - 1)).count_ones();
    if below.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Full component array, all index permutations materialized with their
    /// signs. Flat index is `fold(0, |acc, i| acc * dim + i)`.
    Dense(Vec<f64>),
    /// Canonical components only, keyed by increasing-tuple mask.
    Sparse(BTreeMap<u64, f64>),
}

/// A fully antisymmetric tensor sample of fixed degree in `dim` slots.
/// Antisymmetry holds exactly by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymTensor {
    dim: usize,
    degree: usize,
    storage: Storage,
}

fn dense_shape(dim: usize, degree: usize) -> bool {
    degree <= DENSE_MAX_DEGREE && dim <= DENSE_MAX_DIM
}

impl AntisymTensor {
    pub fn zero(dim: usize, degree: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(CoreError::Capacity(format!(
                "dimension {} outside supported range 1..={}",
                dim, MAX_DIM
            )));
        }
        let storage = if dense_shape(dim, degree) {
            Storage::Dense(vec![0.0; dim.pow(degree as u32)])
        } else {
            Storage::Sparse(BTreeMap::new())
        };
        Ok(Self { dim, degree, storage })
    }

    fn from_canonical_map(dim: usize, degree: usize, map: BTreeMap<u64, f64>) -> Result<Self> {
        let mut t = Self::zero(dim, degree)?;
        for (mask, v) in map {
            if v != 0.0 {
                t.write_canonical(mask, v);
            }
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0usize, |acc, &i| acc * self.dim + i)
    }

    /// Overwrites the canonical component at `mask` (and, for dense
    /// storage, every permutation image of it).
    fn write_canonical(&mut self, mask: u64, v: f64) {
        debug_assert_eq!(mask.count_ones() as usize, self.degree);
        match &mut self.storage {
            Storage::Sparse(map) => {
                if v == 0.0 {
                    map.remove(&mask);
                } else {
                    map.insert(mask, v);
                }
            }
            Storage::Dense(data) => {
                let sorted = indices_of_mask(mask);
                if sorted.is_empty() {
                    data[0] = v;
                    return;
                }
                let dim = self.dim;
                let mut scratch = sorted.clone();
                permute_with_signs(&mut scratch, 0, 1.0, &mut |perm, sign| {
                    let flat = perm.iter().fold(0usize, |acc, &i| acc * dim + i);
                    data[flat] = sign * v;
                });
            }
        }
    }

    /// Canonical component at an increasing-tuple mask.
    pub(crate) fn component_mask(&self, mask: u64) -> f64 {
        match &self.storage {
            Storage::Sparse(map) => map.get(&mask).copied().unwrap_or(0.0),
            Storage::Dense(data) => data[self.flat_index(&indices_of_mask(mask))],
        }
    }

    /// General component; repeated indices yield zero, arbitrary order is
    /// resolved by permutation sign.
    pub fn component(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.degree, "component index arity mismatch");
        assert!(idx.iter().all(|&i| i < self.dim), "component index out of range");
        match &self.storage {
            Storage::Dense(data) => data[self.flat_index(idx)],
            Storage::Sparse(map) => match canonicalize(idx) {
                None => 0.0,
                Some((mask, sign)) => sign * map.get(&mask).copied().unwrap_or(0.0),
            },
        }
    }

    /// Sets the component at `idx`, which may be in any order; the canonical
    /// component absorbs the permutation sign.
    pub fn set_component(&mut self, idx: &[usize], v: f64) -> Result<()> {
        if idx.len() != self.degree {
            return Err(CoreError::Degree(format!(
                "expected {} indices, got {}",
                self.degree,
                idx.len()
            )));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim) {
            return Err(CoreError::Dimension(format!(
                "index {} out of range for dimension {}",
                bad, self.dim
            )));
        }
        match canonicalize(idx) {
            None => {
                if v != 0.0 {
                    return Err(CoreError::Degree(
                        "repeated indices admit only the zero component".into(),
                    ));
                }
                Ok(())
            }
            Some((mask, sign)) => {
                self.write_canonical(mask, sign * v);
                Ok(())
            }
        }
    }

    /// Nonzero canonical components as `(mask, value)` pairs.
    pub(crate) fn nonzero_components(&self) -> Vec<(u64, f64)> {
        match &self.storage {
            Storage::Sparse(map) => {
                map.iter().filter(|(_, v)| **v != 0.0).map(|(k, v)| (*k, *v)).collect()
            }
            Storage::Dense(data) => {
                if self.degree == 0 {
                    return if data[0] != 0.0 { vec![(0, data[0])] } else { vec![] };
                }
                let mut out = Vec::new();
                for mask in 0u64..(1u64 << self.dim) {
                    if mask.count_ones() as usize == self.degree {
                        let v = data[self.flat_index(&indices_of_mask(mask))];
                        if v != 0.0 {
                            out.push((mask, v));
                        }
                    }
                }
                out
            }
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.nonzero_components().iter().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    pub fn scale(&mut self, c: f64) {
        match &mut self.storage {
            Storage::Dense(data) => data.iter_mut().for_each(|v| *v *= c),
            Storage::Sparse(map) => map.values_mut().for_each(|v| *v *= c),
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: f64) -> Result<()> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(CoreError::Dimension("tensor shape mismatch in add".into()));
        }
        for (mask, v) in other.nonzero_components() {
            let cur = self.component_mask(mask);
            self.write_canonical(mask, cur + c * v);
        }
        Ok(())
    }

    /// Wedge product via shuffle summation over canonical components:
    /// `(a ^ b)_T = sum over splittings T = S | (T \ S)` with merge signs.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(CoreError::Dimension(format!(
                "wedge operands live in dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        let degree = self.degree + other.degree;
        let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
        if degree <= self.dim {
            let a = self.nonzero_components();
            let b = other.nonzero_components();
            for &(ka, va) in &a {
                for &(kb, vb) in &b {
                    if ka & kb != 0 {
                        continue;
                    }
                    *acc.entry(ka | kb).or_insert(0.0) += merge_sign(ka, kb) * va * vb;
                }
            }
        }
        Self::from_canonical_map(self.dim, degree, acc)
    }

    /// Pairing of two tensors of equal degree: the sum over strictly
    /// increasing tuples of products of canonical components. This equals
    /// the full contraction `a_{i...} b^{i...} / p!`.
    pub fn pairing(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(CoreError::Dimension("pairing operands in different dimensions".into()));
        }
        if self.degree != other.degree {
            return Err(CoreError::Degree(format!(
                "pairing needs equal degrees, got {} and {}",
                self.degree, other.degree
            )));
        }
        let mut s = 0.0;
        for (mask, v) in self.nonzero_components() {
            s += v * other.component_mask(mask);
        }
        Ok(s)
    }

    /// Contraction of a vector into the first slot.
    pub fn interior(&self, x: &DVector<f64>) -> Result<Self> {
        if x.len() != self.dim {
            return Err(CoreError::Dimension("vector dimension mismatch".into()));
        }
        if self.degree == 0 {
            return Err(CoreError::Degree("interior product needs degree >= 1".into()));
        }
        let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
        for (mask, v) in self.nonzero_components() {
            let mut mm = mask;
            while mm != 0 {
                let j = mm.trailing_zeros() as usize;
                mm &= mm - 1;
                let rest = mask & !(1u64 << j);
                let contrib = x[j] * front_insertion_sign(rest, j) * v;
                if contrib != 0.0 {
                    *acc.entry(rest).or_insert(0.0) += contrib;
                }
            }
        }
        Self::from_canonical_map(self.dim, self.degree - 1, acc)
    }

    /// Degree-2 tensor from an antisymmetric matrix; the input is
    /// antisymmetrized exactly so downstream algebra cannot drift.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(CoreError::Dimension("matrix must be square".into()));
        }
        let dim = m.nrows();
        let mut t = Self::zero(dim, 2)?;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v = 0.5 * (m[(i, j)] - m[(j, i)]);
                if v != 0.0 {
                    t.write_canonical((1u64 << i) | (1u64 << j), v);
                }
            }
        }
        Ok(t)
    }

    /// Matrix of a degree-2 tensor, `M[i][j] = component([i, j])`.
    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.degree != 2 {
            return Err(CoreError::Degree("matrix view needs degree 2".into()));
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (mask, v) in self.nonzero_components() {
            let idx = indices_of_mask(mask);
            m[(idx[0], idx[1])] = v;
            m[(idx[1], idx[0])] = -v;
        }
        Ok(m)
    }

    /// Max difference of canonical components; testing aid.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for (mask, v) in self.nonzero_components() {
            d = d.max((v - other.component_mask(mask)).abs());
        }
        for (mask, v) in other.nonzero_components() {
            d = d.max((v - self.component_mask(mask)).abs());
        }
        d
    }
}

/// Calls `f` with every permutation of `v` and its sign, by recursive
/// position selection; tuple lengths are at most the dense degree bound.
fn permute_with_signs(v: &mut [usize], k: usize, sign: f64, f: &mut impl FnMut(&[usize], f64)) {
    let n = v.len();
    if k == n {
        f(v, sign);
        return;
    }
    for i in k..n {
        let flip = if i == k { 1.0 } else { -1.0 };
        v.swap(k, i);
        permute_with_signs(v, k + 1, sign * flip, f);
        v.swap(k, i);
    }
}

/// A differential form sample (covariant antisymmetric tensor) at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FormSample(pub(crate) AntisymTensor);

/// A multivector sample (contravariant antisymmetric tensor) at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivectorSample(pub(crate) AntisymTensor);

macro_rules! antisym_wrapper {
    ($name:ident) => {
        impl $name {
            pub fn zero(dim: usize, degree: usize) -> Result<Self> {
                Ok(Self(AntisymTensor::zero(dim, degree)?))
            }

            pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
                Ok(Self(AntisymTensor::from_matrix(m)?))
            }

            pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
                self.0.to_matrix()
            }

            pub fn dim(&self) -> usize {
                self.0.dim()
            }

            pub fn degree(&self) -> usize {
                self.0.degree()
            }

            pub fn component(&self, idx: &[usize]) -> f64 {
                self.0.component(idx)
            }

            pub fn set_component(&mut self, idx: &[usize], v: f64) -> Result<()> {
                self.0.set_component(idx, v)
            }

            pub fn norm_inf(&self) -> f64 {
                self.0.norm_inf()
            }

            pub fn scale(&mut self, c: f64) {
                self.0.scale(c)
            }

            pub fn add_scaled(&mut self, other: &Self, c: f64) -> Result<()> {
                self.0.add_scaled(&other.0, c)
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.0.max_abs_diff(&other.0)
            }

            /// Wedge with another tensor of the same variance.
            pub fn wedge(&self, other: &Self) -> Result<Self> {
                Ok(Self(self.0.wedge(&other.0)?))
            }
        }
    };
}

antisym_wrapper!(FormSample);
antisym_wrapper!(MultivectorSample);

/// `<alpha, P>`: sum over increasing tuples of products of components.
pub fn pairing(alpha: &FormSample, p: &MultivectorSample) -> Result<f64> {
    alpha.0.pairing(&p.0)
}

/// Interior product `i_X alpha`, contracting into the first slot.
pub fn interior_product(x: &DVector<f64>, alpha: &FormSample) -> Result<FormSample> {
    Ok(FormSample(alpha.0.interior(x)?))
}

/// A (1,1) tensor sample `A = A_i^j dx_i (x) d_j`, stored as the matrix
/// `M[(i, j)] = A_i^j`. Covectors transform by `a -> M a`, vectors by
/// `X -> M^T X`, so `(M a)(X) = a(M^T X)` and traces are basis-free.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTensorSample {
    m: DMatrix<f64>,
}

impl MixedTensorSample {
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(CoreError::Dimension("mixed tensor matrix must be square".into()));
        }
        Ok(Self { m })
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn apply_to_covector(&self, a: &DVector<f64>) -> DVector<f64> {
        &self.m * a
    }

    pub fn apply_to_vector(&self, x: &DVector<f64>) -> DVector<f64> {
        self.m.transpose() * x
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }
}
