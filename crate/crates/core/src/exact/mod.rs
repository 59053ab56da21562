//! Exact integer/rational linear algebra: index-set combinatorics, maximal
//! minors and Laplace expansions, generalized (Gram) determinants, and
//! lattice saturation over Z.

mod lattice;
mod matrix;

pub use lattice::{column_hnf, integer_kernel, minor_gcd, rank, saturate_lattice};
pub use matrix::{
    block_determinant_commuting, det_bigint, det_rational, generalized_determinant,
    gram_matrix_rational, laplace_determinant, maximal_minors, maximal_minors_rational,
    pairing_determinant, pairing_signs, IntMatrix, RatMatrix,
};

use crate::bigfloat::BigFloat;
use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("matrix is rank deficient (rank {rank} < {expect})")]
    RankDeficient { rank: usize, expect: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("blocks A1 and A2 do not commute")]
    NonCommutingBlocks,
}

/// A strictly increasing set of indices in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    n: usize,
    elems: Vec<usize>,
}

impl IndexSet {
    pub fn new(n: usize, elems: Vec<usize>) -> Self {
        assert!(
            elems.windows(2).all(|w| w[0] < w[1]),
            "index set must be strictly increasing"
        );
        assert!(
            elems.iter().all(|&x| 1 <= x && x <= n),
            "index out of range 1..={n}"
        );
        IndexSet { n, elems }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[usize] {
        &self.elems
    }

    /// 0-based row indices.
    pub fn zero_based(&self) -> impl Iterator<Item = usize> + '_ {
        self.elems.iter().map(|&x| x - 1)
    }

    pub fn complement(&self) -> IndexSet {
        let mut out = Vec::with_capacity(self.n - self.elems.len());
        let mut it = self.elems.iter().peekable();
        for x in 1..=self.n {
            if it.peek() == Some(&&x) {
                it.next();
            } else {
                out.push(x);
            }
        }
        IndexSet { n: self.n, elems: out }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elems.binary_search(&x).is_ok()
    }

    pub fn insert(&self, x: usize) -> IndexSet {
        debug_assert!(!self.contains(x));
        let mut elems = self.elems.clone();
        let pos = elems.partition_point(|&y| y < x);
        elems.insert(pos, x);
        IndexSet { n: self.n, elems }
    }

    pub fn remove(&self, x: usize) -> IndexSet {
        let mut elems = self.elems.clone();
        let pos = elems.binary_search(&x).expect("element not present");
        elems.remove(pos);
        IndexSet { n: self.n, elems }
    }

    /// Position of this set in the lexicographic enumeration of all
    /// `len`-subsets of `1..=n` (0-based).
    pub fn lex_rank(&self) -> usize {
        let r = self.elems.len();
        let mut rank = 0usize;
        let mut prev = 0usize;
        for (i, &x) in self.elems.iter().enumerate() {
            for y in prev + 1..x {
                rank += binomial(self.n - y, r - i - 1);
            }
            prev = x;
        }
        rank
    }
}

/// All r-subsets of `1..=n` in lexicographic order.
pub fn lambda(r: usize, n: usize) -> Vec<IndexSet> {
    assert!(r <= n);
    let mut out = Vec::with_capacity(binomial(n, r));
    let mut cur: Vec<usize> = (1..=r).collect();
    loop {
        out.push(IndexSet { n, elems: cur.clone() });
        // advance
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - (r - 1 - i) {
                cur[i] += 1;
                for j in i + 1..r {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of inversions from `I` to `J`: pairs `(i, j)` in `I x J` with `i > j`.
pub fn inversion_count(i_set: &IndexSet, j_set: &IndexSet) -> usize {
    let mut count = 0;
    for &i in &i_set.elems {
        count += j_set.elems.partition_point(|&j| j < i);
    }
    count
}

/// `ell(I)`: inversions from `I` to its complement in `1..=n`.
pub fn ell(i_set: &IndexSet) -> usize {
    inversion_count(i_set, &i_set.complement())
}

/// Exact square of a generalized determinant, with the root taken lazily.
#[derive(Debug, Clone, PartialEq)]
pub struct GramValue {
    value_squared: BigRational,
}

impl GramValue {
    pub fn new(value_squared: BigRational) -> Self {
        assert!(!value_squared.is_negative(), "Gram determinant must be >= 0");
        GramValue { value_squared }
    }

    pub fn value_squared(&self) -> &BigRational {
        &self.value_squared
    }

    pub fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(&self.value_squared)
    }

    /// The root at `prec` bits; `value^2 = value_squared` within `2^(1-prec)`.
    pub fn value(&self, prec: u32) -> BigFloat {
        BigFloat::from_rational(&self.value_squared, 2 * prec + 4).sqrt(prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is(n: usize, v: &[usize]) -> IndexSet {
        IndexSet::new(n, v.to_vec())
    }

    #[test]
    fn ell_examples() {
        // n = 4 pairs used by the Laplace expansion example
        assert_eq!(ell(&is(4, &[1, 2])), 0);
        assert_eq!(ell(&is(4, &[1, 3])), 1);
        assert_eq!(ell(&is(4, &[1, 4])), 2);
        assert_eq!(ell(&is(4, &[2, 3])), 2);
        assert_eq!(ell(&is(4, &[2, 4])), 3);
        assert_eq!(ell(&is(4, &[3, 4])), 4);
    }

    #[test]
    fn inversion_count_empty() {
        assert_eq!(inversion_count(&is(5, &[]), &is(5, &[1, 2, 3])), 0);
        assert_eq!(inversion_count(&is(5, &[4, 5]), &is(5, &[])), 0);
    }

    #[test]
    fn lambda_lex_order_and_ranks() {
        let sets = lambda(2, 4);
        let expect: Vec<Vec<usize>> =
            vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]];
        assert_eq!(sets.iter().map(|s| s.elems.clone()).collect::<Vec<_>>(), expect);
        for (k, s) in sets.iter().enumerate() {
            assert_eq!(s.lex_rank(), k);
        }
        assert_eq!(lambda(3, 5).len(), 10);
    }

    #[test]
    fn complement_reverses_lex() {
        // complement of the k-th element of Lambda(r,n) is the (N-1-k)-th of Lambda(n-r,n)
        let n = 6;
        let r = 2;
        let sets = lambda(r, n);
        let co = lambda(n - r, n);
        let big_n = sets.len();
        for (k, s) in sets.iter().enumerate() {
            assert_eq!(s.complement(), co[big_n - 1 - k]);
        }
    }
}
