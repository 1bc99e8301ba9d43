//! Renaming truth values.
//!
//! A permutation that maps designated values to designated values carries
//! every validity verdict over unchanged, so matrices related by one are
//! interchangeable for independence proofs.

use itertools::Itertools;

use super::{cell_offset, Matrix, MatrixError, Value};
use crate::formula::Connective;

/// A bijection on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<Value>);

impl Permutation {
    pub fn new(images: Vec<Value>) -> Result<Self, MatrixError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v as usize >= n || std::mem::replace(&mut seen[v as usize], true) {
                return Err(MatrixError::NotAPermutation(images));
            }
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n as Value).collect())
    }

    /// Exchanges `a` and `b`.
    pub fn swap(n: usize, a: Value, b: Value) -> Self {
        let mut p = Self::identity(n);
        p.0.swap(a as usize, b as usize);
        p
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, v: Value) -> Value {
        self.0[v as usize]
    }

    pub fn images(&self) -> &[Value] {
        &self.0
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v as usize] = i as Value;
        }
        Permutation(inv)
    }

    /// Maps `0..d` onto itself (and hence the rest onto the rest).
    pub fn preserves_designation(&self, designated: usize) -> bool {
        self.0[..designated.min(self.0.len())]
            .iter()
            .all(|&v| (v as usize) < designated)
    }
}

/// All `d!·(n−d)!` designation-preserving permutations of `0..n`, identity
/// first.
pub fn designation_preserving(size: usize, designated: usize) -> Vec<Permutation> {
    let low: Vec<Value> = (0..designated as Value).collect();
    let high: Vec<Value> = (designated as Value..size as Value).collect();
    low.iter()
        .copied()
        .permutations(low.len())
        .cartesian_product(
            high.iter()
                .copied()
                .permutations(high.len())
                .collect::<Vec<_>>(),
        )
        .map(|(mut lo, hi)| {
            lo.extend(hi);
            Permutation(lo)
        })
        .collect()
}

/// Conjugates every table by `perm`: `t'(π(x), π(y)) = π(t(x, y))`.
pub fn apply_permutation(m: &Matrix, perm: &Permutation) -> Result<Matrix, MatrixError> {
    if perm.len() != m.size() {
        return Err(MatrixError::NotAPermutation(perm.0.clone()));
    }
    if !perm.preserves_designation(m.designated_count()) {
        return Err(MatrixError::NotDesignationPreserving);
    }
    Ok(permute_unchecked(m, perm))
}

pub(crate) fn permute_unchecked(m: &Matrix, perm: &Permutation) -> Matrix {
    let n = m.size();
    let mut tables: [Option<Vec<Value>>; 5] = Default::default();
    for c in Connective::ALL {
        let Some(src) = m.table(c) else { continue };
        let mut dst = vec![0; src.len()];
        match c.arity() {
            0 => dst[0] = perm.apply(src[0]),
            1 => {
                for x in 0..n as Value {
                    dst[perm.apply(x) as usize] = perm.apply(src[x as usize]);
                }
            }
            _ => {
                for x in 0..n as Value {
                    for y in 0..n as Value {
                        let to = cell_offset(n, &[perm.apply(x), perm.apply(y)]);
                        dst[to] = perm.apply(src[cell_offset(n, &[x, y])]);
                    }
                }
            }
        }
        tables[c.index()] = Some(dst);
    }
    Matrix {
        size: n,
        designated: m.designated_count(),
        tables,
    }
}

/// The lexicographically least member of `m`'s orbit, found by trying every
/// designation-preserving permutation.
pub fn canonical_form(m: &Matrix) -> Matrix {
    designation_preserving(m.size(), m.designated_count())
        .iter()
        .map(|p| permute_unchecked(m, p))
        .min_by(|a, b| a.flatten().cmp(&b.flatten()))
        .expect("identity is always present")
}
