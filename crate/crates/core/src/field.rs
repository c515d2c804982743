//! Prime-field scalars, vectors and square matrices.
//!
//! Everything here carries its modulus at runtime so a single build can work
//! over any `F_p`. Vectors of a space `F_p^n` are also addressable by their
//! index in lexicographic order (first coordinate most significant), which is
//! what the enumeration engines use in their inner loops.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Largest vector space (in elements) we are willing to index.
pub const MAX_SPACE_SIZE: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("modulus mismatch: F_{left} vs F_{right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("vector space F_{p}^{n} is too large to enumerate")]
    SpaceTooLarge { p: u32, n: usize },
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The prime field `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p > i32::MAX as u64 || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p: p as u32 })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    /// Reduces an arbitrary integer into the field.
    pub fn elem(&self, value: i64) -> FieldElem {
        FieldElem { value: value.rem_euclid(self.p as i64) as u32, modulus: self.p }
    }

    pub fn zero(&self) -> FieldElem {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElem {
        self.elem(1)
    }

    /// All field elements `0, 1, .., p-1`.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.p).map(move |v| FieldElem { value: v, modulus: self.p })
    }

    #[inline]
    pub(crate) fn add_raw(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

/// An element of `F_p`, always reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u32,
    modulus: u32,
}

impl FieldElem {
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.modulus }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(&self) -> Option<FieldElem> {
        if self.value == 0 {
            return None;
        }
        let f = self.field();
        let mut result = 1u32;
        let mut base = self.value;
        let mut exp = self.modulus - 2;
        while exp > 0 {
            if exp & 1 == 1 {
                result = f.mul_raw(result, base);
            }
            base = f.mul_raw(base, base);
            exp >>= 1;
        }
        Some(FieldElem { value: result, modulus: self.modulus })
    }

    fn same_field(&self, other: &FieldElem) -> PrimeField {
        assert_eq!(self.modulus, other.modulus, "arithmetic between F_{} and F_{}", self.modulus, other.modulus);
        self.field()
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: FieldElem) -> FieldElem {
        let f = self.same_field(&rhs);
        FieldElem { value: f.add_raw(self.value, rhs.value), modulus: self.modulus }
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: FieldElem) -> FieldElem {
        self + (-rhs)
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem { value: self.field().neg_raw(self.value), modulus: self.modulus }
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: FieldElem) -> FieldElem {
        let f = self.same_field(&rhs);
        FieldElem { value: f.mul_raw(self.value, rhs.value), modulus: self.modulus }
    }
}

/// A vector in `F_p^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FVector {
    modulus: u32,
    entries: Vec<u32>,
}

impl FVector {
    pub fn new(field: PrimeField, entries: &[i64]) -> Result<Self, FieldError> {
        if entries.is_empty() {
            return Err(FieldError::ZeroDimension);
        }
        Ok(Self { modulus: field.p, entries: entries.iter().map(|&v| field.elem(v).value).collect() })
    }

    pub fn zeros(field: PrimeField, n: usize) -> Self {
        Self { modulus: field.p, entries: vec![0; n] }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.modulus }
    }

    pub fn get(&self, i: usize) -> FieldElem {
        FieldElem { value: self.entries[i], modulus: self.modulus }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    fn check_compatible(&self, other: &FVector) -> Result<PrimeField, FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ModulusMismatch { left: self.modulus, right: other.modulus });
        }
        if self.dim() != other.dim() {
            return Err(FieldError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self.field())
    }
}

impl fmt::Display for FVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

pub fn vec_add(a: &FVector, b: &FVector) -> Result<FVector, FieldError> {
    let f = a.check_compatible(b)?;
    Ok(FVector {
        modulus: a.modulus,
        entries: a.entries.iter().zip(&b.entries).map(|(&x, &y)| f.add_raw(x, y)).collect(),
    })
}

pub fn scalar_mul(s: FieldElem, v: &FVector) -> Result<FVector, FieldError> {
    if s.modulus != v.modulus {
        return Err(FieldError::ModulusMismatch { left: s.modulus, right: v.modulus });
    }
    let f = v.field();
    Ok(FVector { modulus: v.modulus, entries: v.entries.iter().map(|&x| f.mul_raw(s.value, x)).collect() })
}

/// A square `n x n` matrix over `F_p`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FMatrix {
    modulus: u32,
    n: usize,
    entries: Vec<u32>,
}

impl FMatrix {
    pub fn new(field: PrimeField, rows: &[Vec<i64>]) -> Result<Self, FieldError> {
        let n = rows.len();
        if n == 0 {
            return Err(FieldError::ZeroDimension);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(FieldError::NotSquare { row, len: r.len(), expected: n });
            }
            entries.extend(r.iter().map(|&v| field.elem(v).value));
        }
        Ok(Self { modulus: field.p, n, entries })
    }

    pub fn zeros(field: PrimeField, n: usize) -> Self {
        Self { modulus: field.p, n, entries: vec![0; n * n] }
    }

    /// Builds a matrix from already reduced row-major entries.
    pub(crate) fn from_raw(field: PrimeField, n: usize, entries: Vec<u32>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        debug_assert!(entries.iter().all(|&v| v < field.p));
        Self { modulus: field.p, n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.modulus }
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        FieldElem { value: self.entries[i * self.n + j], modulus: self.modulus }
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> FMatrix {
        let n = self.n;
        let entries = (0..n * n).map(|k| self.entries[(k % n) * n + k / n]).collect();
        Self { modulus: self.modulus, n, entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    /// Zero diagonal and `B^T = -B`; exactly the matrices with `u^T B u = 0`
    /// for every `u`.
    pub fn is_alternating(&self) -> bool {
        let f = self.field();
        (0..self.n).all(|i| {
            self.entries[i * self.n + i] == 0
                && (0..self.n).all(|j| self.entries[j * self.n + i] == f.neg_raw(self.entries[i * self.n + j]))
        })
    }

    /// Rank by Gaussian elimination over `F_p`.
    pub fn rank(&self) -> usize {
        let f = self.field();
        let n = self.n;
        let mut m = self.entries.clone();
        let mut rank = 0;
        for col in 0..n {
            let Some(pivot) = (rank..n).find(|&r| m[r * n + col] != 0) else {
                continue;
            };
            for k in 0..n {
                m.swap(rank * n + k, pivot * n + k);
            }
            let inv = FieldElem { value: m[rank * n + col], modulus: self.modulus }
                .inverse()
                .expect("pivot is nonzero")
                .value;
            for r in 0..n {
                if r == rank || m[r * n + col] == 0 {
                    continue;
                }
                let factor = f.mul_raw(m[r * n + col], inv);
                for k in 0..n {
                    let sub = f.mul_raw(factor, m[rank * n + k]);
                    m[r * n + k] = f.add_raw(m[r * n + k], f.neg_raw(sub));
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.rank() == self.n
    }
}

impl fmt::Display for FMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.n).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// `u^T B v`.
pub fn bilinear_eval(b: &FMatrix, u: &FVector, v: &FVector) -> Result<FieldElem, FieldError> {
    u.check_compatible(v)?;
    if b.modulus != u.modulus {
        return Err(FieldError::ModulusMismatch { left: b.modulus, right: u.modulus });
    }
    if b.n != u.dim() {
        return Err(FieldError::DimensionMismatch { left: b.n, right: u.dim() });
    }
    let f = b.field();
    let n = b.n;
    let mut acc = 0u32;
    for i in 0..n {
        if u.entries[i] == 0 {
            continue;
        }
        let mut row = 0u32;
        for j in 0..n {
            row = f.add_raw(row, f.mul_raw(b.entries[i * n + j], v.entries[j]));
        }
        acc = f.add_raw(acc, f.mul_raw(u.entries[i], row));
    }
    Ok(FieldElem { value: acc, modulus: b.modulus })
}

/// Every vector of `F_p^n` in lexicographic order.
pub fn all_vectors(p: u64, n: usize) -> Result<Vec<FVector>, FieldError> {
    let space = VectorSpace::new(PrimeField::new(p)?, n)?;
    Ok(space.iter().collect())
}

/// `F_p^n` with a fixed lexicographic indexing of its elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VectorSpace {
    field: PrimeField,
    dim: usize,
    size: usize,
}

impl VectorSpace {
    pub fn new(field: PrimeField, dim: usize) -> Result<Self, FieldError> {
        if dim == 0 {
            return Err(FieldError::ZeroDimension);
        }
        let mut size = 1usize;
        for _ in 0..dim {
            size = size
                .checked_mul(field.p as usize)
                .filter(|&s| s <= MAX_SPACE_SIZE)
                .ok_or(FieldError::SpaceTooLarge { p: field.p, n: dim })?;
        }
        Ok(Self { field, dim, size })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vectors, `p^n`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn vector_at(&self, mut index: usize) -> FVector {
        assert!(index < self.size, "vector index {index} out of range");
        let p = self.field.p as usize;
        let mut entries = vec![0u32; self.dim];
        for slot in entries.iter_mut().rev() {
            *slot = (index % p) as u32;
            index /= p;
        }
        FVector { modulus: self.field.p, entries }
    }

    pub fn index_of(&self, v: &FVector) -> Result<usize, FieldError> {
        if v.modulus != self.field.p {
            return Err(FieldError::ModulusMismatch { left: self.field.p, right: v.modulus });
        }
        if v.dim() != self.dim {
            return Err(FieldError::DimensionMismatch { left: self.dim, right: v.dim() });
        }
        let p = self.field.p as usize;
        Ok(v.entries.iter().fold(0usize, |acc, &e| acc * p + e as usize))
    }

    pub fn iter(&self) -> impl Iterator<Item = FVector> + '_ {
        (0..self.size).map(move |i| self.vector_at(i))
    }

    /// Every `n x n` matrix over the field, ordered lexicographically by
    /// row-major entries.
    pub fn all_matrices(&self) -> Result<Vec<FMatrix>, FieldError> {
        let cells = self.dim * self.dim;
        let entries_space = VectorSpace::new(self.field, cells)?;
        Ok(entries_space.iter().map(|v| FMatrix::from_raw(self.field, self.dim, v.entries)).collect())
    }
}

/// Index-level arithmetic tables for a [`VectorSpace`].
#[derive(Debug, Clone)]
pub(crate) struct SpaceTables {
    pub size: usize,
    pub p: usize,
    /// `add[a * size + b]` is the index of `a + b`.
    add: Vec<u32>,
    /// `scale[s * size + a]` is the index of `s * a`.
    scale: Vec<u32>,
}

impl SpaceTables {
    pub fn new(space: &VectorSpace) -> Self {
        let size = space.size;
        let p = space.field.p as usize;
        let vectors: Vec<FVector> = space.iter().collect();
        let mut add = Vec::with_capacity(size * size);
        for a in &vectors {
            for b in &vectors {
                let sum = vec_add(a, b).expect("same space");
                add.push(space.index_of(&sum).expect("same space") as u32);
            }
        }
        let mut scale = Vec::with_capacity(p * size);
        for s in space.field.elements() {
            for a in &vectors {
                let prod = scalar_mul(s, a).expect("same space");
                scale.push(space.index_of(&prod).expect("same space") as u32);
            }
        }
        Self { size, p, add, scale }
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.size + b] as usize
    }

    #[inline]
    pub fn scale(&self, s: usize, a: usize) -> usize {
        self.scale[s * self.size + a] as usize
    }

    /// Index of `a + s * c`.
    #[inline]
    pub fn axpy(&self, a: usize, s: usize, c: usize) -> usize {
        self.add(a, self.scale(s, c))
    }

    #[inline]
    pub fn neg_scalar(&self, s: usize) -> usize {
        if s == 0 {
            0
        } else {
            self.p - s
        }
    }
}

/// `table[a * size + b] = a^T B b` for every pair of vector indices.
pub(crate) fn eval_table(space: &VectorSpace, b: &FMatrix) -> Vec<u32> {
    let vectors: Vec<FVector> = space.iter().collect();
    let mut table = Vec::with_capacity(space.size * space.size);
    for u in &vectors {
        for v in &vectors {
            table.push(bilinear_eval(b, u, v).expect("same space").value);
        }
    }
    table
}
