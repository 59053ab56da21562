//! Dense matrices over Z and Q with fraction-free determinants, maximal
//! minors in lexicographic order, and Laplace/pairing expansions.

use super::{binomial, ell, lambda, ExactError, GramValue, IndexSet};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>, // row-major
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c));
        Self::from_fn(r, c, |i, j| BigInt::from(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows);
        IntMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).map(|k| &self[(i, k)] * &rhs[(k, j)]).sum()
        })
    }

    pub fn to_rational(&self) -> RatMatrix {
        RatMatrix::from_fn(self.rows, self.cols, |i, j| BigRational::from(self[(i, j)].clone()))
    }

    pub fn submatrix_rows(&self, rows: &IndexSet) -> IntMatrix {
        let idx: Vec<usize> = rows.zero_based().collect();
        IntMatrix::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)].clone())
    }

    pub fn submatrix(&self, rows: &IndexSet, cols: &IndexSet) -> IntMatrix {
        let ri: Vec<usize> = rows.zero_based().collect();
        let ci: Vec<usize> = cols.zero_based().collect();
        IntMatrix::from_fn(ri.len(), ci.len(), |i, j| self[(ri[i], ci[j])].clone())
    }

    /// Append `rhs` to the right.
    pub fn hstack(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, rhs.rows);
        IntMatrix::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                rhs[(i, j - self.cols)].clone()
            }
        })
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RatMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<BigRational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows);
        RatMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).map(|k| &self[(i, k)] * &rhs[(k, j)]).sum()
        })
    }

    pub fn sub(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        RatMatrix::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &rhs[(i, j)])
    }

    /// Scale each column by the lcm of its denominators, preserving the span.
    /// Returns the integer matrix.
    pub fn clear_denominators_per_column(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            let mut l = BigInt::one();
            for i in 0..self.rows {
                l = l.lcm(self[(i, j)].denom());
            }
            for i in 0..self.rows {
                let v = &self[(i, j)] * BigRational::from(l.clone());
                debug_assert!(v.is_integer());
                out[(i, j)] = v.to_integer();
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }
}

/// Fraction-free (Bareiss) determinant.
pub fn det_bigint(m: &IntMatrix) -> BigInt {
    assert_eq!(m.rows, m.cols, "determinant of non-square matrix");
    let n = m.rows;
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[(k, k)].is_zero() {
            match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                Some(i) => {
                    for j in 0..n {
                        let (lo, hi) = (k.min(i), k.max(i));
                        let tmp = a[(lo, j)].clone();
                        a[(lo, j)] = a[(hi, j)].clone();
                        a[(hi, j)] = tmp;
                    }
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)];
                let (q, r) = num.div_rem(&prev);
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                a[(i, j)] = q;
            }
        }
        prev = a[(k, k)].clone();
    }
    let d = a[(n - 1, n - 1)].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Determinant over Q by Gaussian elimination with exact arithmetic.
pub fn det_rational(m: &RatMatrix) -> BigRational {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    if n == 0 {
        return BigRational::one();
    }
    let mut a = m.clone();
    let mut det = BigRational::one();
    for k in 0..n {
        let piv = match (k..n).find(|&i| !a[(i, k)].is_zero()) {
            Some(p) => p,
            None => return BigRational::zero(),
        };
        if piv != k {
            for j in 0..n {
                let tmp = a[(k, j)].clone();
                a[(k, j)] = a[(piv, j)].clone();
                a[(piv, j)] = tmp;
            }
            det = -det;
        }
        let p = a[(k, k)].clone();
        det *= &p;
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &p;
            for j in k..n {
                let v = &a[(i, j)] - &f * &a[(k, j)];
                a[(i, j)] = v;
            }
        }
    }
    det
}

/// All r x r minors on row subsets (r = cols), lex-ordered by row index set.
pub fn maximal_minors(m: &IntMatrix) -> Vec<BigInt> {
    let r = m.cols;
    assert!(r <= m.rows, "need cols <= rows");
    lambda(r, m.rows)
        .iter()
        .map(|rows| det_bigint(&m.submatrix_rows(rows)))
        .collect()
}

pub fn maximal_minors_rational(m: &RatMatrix) -> Vec<BigRational> {
    let r = m.cols;
    assert!(r <= m.rows);
    lambda(r, m.rows)
        .iter()
        .map(|rows| {
            let idx: Vec<usize> = rows.zero_based().collect();
            det_rational(&RatMatrix::from_fn(r, r, |i, j| m[(idx[i], j)].clone()))
        })
        .collect()
}

/// Laplace expansion of `det(M)` along the column set `J`:
/// sum over `I` of `(-1)^(ell(I)+ell(J)) * Delta_{I,J} * Delta_{Ibar,Jbar}`.
pub fn laplace_determinant(m: &IntMatrix, j_set: &IndexSet) -> BigInt {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    assert_eq!(j_set.ambient(), n);
    let r = j_set.len();
    let j_bar = j_set.complement();
    let sign_j = ell(j_set);
    let mut acc = BigInt::zero();
    for i_set in lambda(r, n) {
        let d1 = det_bigint(&m.submatrix(&i_set, j_set));
        if d1.is_zero() {
            continue;
        }
        let d2 = det_bigint(&m.submatrix(&i_set.complement(), &j_bar));
        let term = d1 * d2;
        if (ell(&i_set) + sign_j) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// The sign sequence `epsilon(i)` with
/// `det(M_A|M_B) = sum_i epsilon(i) * zeta_i * eta_{N+1-i}` where `zeta` are
/// the lex-ordered maximal minors of the left block (a columns) and `eta`
/// those of the right block (n-a columns).
pub fn pairing_signs(n: usize, a: usize) -> Vec<i8> {
    lambda(a, n)
        .iter()
        .map(|i_set| if ell(i_set) % 2 == 0 { 1 } else { -1 })
        .collect()
}

/// `det(M_A | M_B)` from the two blocks' lex-ordered maximal minors.
pub fn pairing_determinant(
    minors_a: &[BigRational],
    minors_b: &[BigRational],
    n: usize,
    a: usize,
) -> Result<BigRational, ExactError> {
    let big_n = binomial(n, a);
    if minors_a.len() != big_n || minors_b.len() != big_n || binomial(n, n - a) != big_n {
        return Err(ExactError::DimensionMismatch(format!(
            "expected {big_n} minors on both sides, got {} and {}",
            minors_a.len(),
            minors_b.len()
        )));
    }
    let signs = pairing_signs(n, a);
    let mut acc = BigRational::zero();
    for i in 0..big_n {
        let term = &minors_a[i] * &minors_b[big_n - 1 - i];
        if signs[i] > 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

pub fn gram_matrix_rational(vectors: &[Vec<BigRational>]) -> RatMatrix {
    let l = vectors.len();
    RatMatrix::from_fn(l, l, |i, j| {
        vectors[i]
            .iter()
            .zip(&vectors[j])
            .map(|(x, y)| x * y)
            .sum()
    })
}

/// Generalized determinant `D(X_1..X_l) = sqrt(det Gram)`, kept exact as the
/// square.
pub fn generalized_determinant(vectors: &[Vec<BigRational>]) -> GramValue {
    assert!(!vectors.is_empty());
    let n = vectors[0].len();
    assert!(vectors.iter().all(|v| v.len() == n), "mixed ambient dimensions");
    GramValue::new(det_rational(&gram_matrix_rational(vectors)))
}

/// Determinant of the 2l x 2l block matrix `[[A1, A2], [A3, A4]]` computed as
/// `det(A4*A1 - A3*A2)`, valid when `A1*A2 = A2*A1` (checked).
pub fn block_determinant_commuting(
    a1: &RatMatrix,
    a2: &RatMatrix,
    a3: &RatMatrix,
    a4: &RatMatrix,
) -> Result<BigRational, ExactError> {
    let l = a1.rows();
    for m in [a1, a2, a3, a4] {
        if m.rows() != l || m.cols() != l {
            return Err(ExactError::DimensionMismatch("blocks must be square of equal size".into()));
        }
    }
    if a1.mul(a2) != a2.mul(a1) {
        return Err(ExactError::NonCommutingBlocks);
    }
    Ok(det_rational(&a4.mul(a1).sub(&a3.mul(a2))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_int_matrix(rng: &mut StdRng, rows: usize, cols: usize, bound: i64) -> IntMatrix {
        IntMatrix::from_fn(rows, cols, |_, _| BigInt::from(rng.gen_range(-bound..=bound)))
    }

    /// Cofactor-expansion determinant, used as an independent oracle.
    fn det_cofactor(m: &IntMatrix) -> BigInt {
        let n = m.rows();
        if n == 0 {
            return BigInt::one();
        }
        if n == 1 {
            return m[(0, 0)].clone();
        }
        let mut acc = BigInt::zero();
        for j in 0..n {
            if m[(0, j)].is_zero() {
                continue;
            }
            let sub = IntMatrix::from_fn(n - 1, n - 1, |r, c| {
                m[(r + 1, if c < j { c } else { c + 1 })].clone()
            });
            let term = &m[(0, j)] * det_cofactor(&sub);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn bareiss_matches_cofactor() {
        let mut rng = StdRng::seed_from_u64(42);
        for n in 1..=6 {
            for _ in 0..20 {
                let m = rand_int_matrix(&mut rng, n, n, 9);
                assert_eq!(det_bigint(&m), det_cofactor(&m));
            }
        }
    }

    #[test]
    fn laplace_equals_det_for_every_j() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in 2..=6usize {
            let m = rand_int_matrix(&mut rng, n, n, 9);
            let d = det_cofactor(&m);
            for r in 1..n {
                for j_set in lambda(r, n) {
                    assert_eq!(laplace_determinant(&m, &j_set), d, "n={n} J={:?}", j_set);
                }
            }
        }
    }

    #[test]
    fn laplace_sign_sequence_n4() {
        // expanding along the first two columns of a 4x4 matrix
        let signs = pairing_signs(4, 2);
        assert_eq!(signs, vec![1, -1, 1, 1, -1, 1]);
    }

    #[test]
    fn maximal_minors_examples() {
        // columns e1, e2 in R^3
        let m = IntMatrix::from_i64_rows(&[vec![1, 0], vec![0, 1], vec![0, 0]]);
        assert_eq!(maximal_minors(&m), vec![BigInt::from(1), BigInt::from(0), BigInt::from(0)]);

        let m = IntMatrix::from_i64_rows(&[vec![1, 0], vec![0, 1], vec![2, 0], vec![0, 3]]);
        let mins: Vec<i64> = maximal_minors(&m).iter().map(|v| i64::try_from(v).unwrap()).collect();
        assert_eq!(mins, vec![1, 0, 3, -2, 0, 6]);

        // dependent columns
        let m = IntMatrix::from_i64_rows(&[vec![1, 2], vec![2, 4], vec![3, 6]]);
        assert!(maximal_minors(&m).iter().all(|v| v.is_zero()));
    }

    #[test]
    fn pairing_matches_full_determinant() {
        let mut rng = StdRng::seed_from_u64(99);
        for (n, a) in [(4usize, 2usize), (6, 3), (6, 2), (5, 2)] {
            for _ in 0..25 {
                let ma = rand_int_matrix(&mut rng, n, a, 6);
                let mb = rand_int_matrix(&mut rng, n, n - a, 6);
                let za: Vec<BigRational> =
                    maximal_minors(&ma).into_iter().map(BigRational::from).collect();
                let zb: Vec<BigRational> =
                    maximal_minors(&mb).into_iter().map(BigRational::from).collect();
                let paired = pairing_determinant(&za, &zb, n, a).unwrap();
                let full = det_bigint(&ma.hstack(&mb));
                assert_eq!(paired, BigRational::from(full));
            }
        }
    }

    #[test]
    fn pairing_unimodular_coordinate_split() {
        // span(e1,e2) against span(e3,e4) in R^4
        let ma = IntMatrix::from_i64_rows(&[vec![1, 0], vec![0, 1], vec![0, 0], vec![0, 0]]);
        let mb = IntMatrix::from_i64_rows(&[vec![0, 0], vec![0, 0], vec![1, 0], vec![0, 1]]);
        let za: Vec<BigRational> = maximal_minors(&ma).into_iter().map(BigRational::from).collect();
        let zb: Vec<BigRational> = maximal_minors(&mb).into_iter().map(BigRational::from).collect();
        let d = pairing_determinant(&za, &zb, 4, 2).unwrap();
        assert_eq!(d, BigRational::one());
    }

    #[test]
    fn gram_value_basics() {
        let one = BigRational::one();
        let zero = BigRational::zero();
        // orthonormal pair
        let e1 = vec![one.clone(), zero.clone(), zero.clone()];
        let e2 = vec![zero.clone(), one.clone(), zero.clone()];
        let g = generalized_determinant(&[e1.clone(), e2.clone()]);
        assert_eq!(g.value_squared(), &BigRational::one());

        // dependent family (X, 2X)
        let x2: Vec<BigRational> = e1.iter().map(|v| v * BigRational::from(BigInt::from(2))).collect();
        assert!(generalized_determinant(&[e1.clone(), x2]).is_zero());

        // scaling multiplies the value by |t|
        let mut rng = StdRng::seed_from_u64(3);
        let v1: Vec<BigRational> =
            (0..4).map(|_| BigRational::from(BigInt::from(rng.gen_range(-5i64..=5)))).collect();
        let v2: Vec<BigRational> =
            (0..4).map(|_| BigRational::from(BigInt::from(rng.gen_range(-5i64..=5)))).collect();
        let t = BigRational::new(BigInt::from(-7), BigInt::from(3));
        let scaled: Vec<BigRational> = v2.iter().map(|v| v * &t).collect();
        let g1 = generalized_determinant(&[v1.clone(), v2.clone()]);
        let g2 = generalized_determinant(&[v1, scaled]);
        assert_eq!(g2.value_squared(), &(&t * &t * g1.value_squared()));
    }

    #[test]
    fn gram_invariance_under_permutation() {
        let mut rng = StdRng::seed_from_u64(11);
        let vs: Vec<Vec<BigRational>> = (0..3)
            .map(|_| (0..5).map(|_| BigRational::from(BigInt::from(rng.gen_range(-6i64..=6)))).collect())
            .collect();
        let g = generalized_determinant(&vs);
        let perm = vec![vs[2].clone(), vs[0].clone(), vs[1].clone()];
        assert_eq!(generalized_determinant(&perm).value_squared(), g.value_squared());
    }

    #[test]
    fn block_determinant_lemma() {
        let mut rng = StdRng::seed_from_u64(17);
        for l in 1..=3usize {
            for _ in 0..15 {
                // A2 a polynomial in A1 so they commute
                let a1 = rand_int_matrix(&mut rng, l, l, 4).to_rational();
                let c0 = BigRational::from(BigInt::from(rng.gen_range(-3i64..=3)));
                let c1 = BigRational::from(BigInt::from(rng.gen_range(-3i64..=3)));
                let mut a2 = RatMatrix::zeros(l, l);
                for i in 0..l {
                    for j in 0..l {
                        a2[(i, j)] = &a1[(i, j)] * &c1 + if i == j { c0.clone() } else { BigRational::zero() };
                    }
                }
                let a3 = rand_int_matrix(&mut rng, l, l, 4).to_rational();
                let a4 = rand_int_matrix(&mut rng, l, l, 4).to_rational();
                let fast = block_determinant_commuting(&a1, &a2, &a3, &a4).unwrap();
                // oracle: the full 2l x 2l determinant
                let full = RatMatrix::from_fn(2 * l, 2 * l, |i, j| match (i < l, j < l) {
                    (true, true) => a1[(i, j)].clone(),
                    (true, false) => a2[(i, j - l)].clone(),
                    (false, true) => a3[(i - l, j)].clone(),
                    (false, false) => a4[(i - l, j - l)].clone(),
                });
                assert_eq!(fast, det_rational(&full));
            }
        }
    }

    #[test]
    fn block_determinant_rejects_non_commuting() {
        let a1 = IntMatrix::from_i64_rows(&[vec![1, 1], vec![0, 1]]).to_rational();
        let a2 = IntMatrix::from_i64_rows(&[vec![1, 0], vec![1, 1]]).to_rational();
        let z = RatMatrix::zeros(2, 2);
        assert_eq!(
            block_determinant_commuting(&a1, &a2, &z, &z),
            Err(ExactError::NonCommutingBlocks)
        );
    }

    #[test]
    fn block_determinant_identity_block() {
        let mut rng = StdRng::seed_from_u64(23);
        let l = 3;
        let a1 = RatMatrix::identity(l);
        let a2 = rand_int_matrix(&mut rng, l, l, 5).to_rational();
        let a3 = rand_int_matrix(&mut rng, l, l, 5).to_rational();
        let a4 = rand_int_matrix(&mut rng, l, l, 5).to_rational();
        let got = block_determinant_commuting(&a1, &a2, &a3, &a4).unwrap();
        assert_eq!(got, det_rational(&a4.sub(&a3.mul(&a2))));
        // all-zero blocks give 0
        let z = RatMatrix::zeros(l, l);
        assert_eq!(
            block_determinant_commuting(&z, &z, &z, &z).unwrap(),
            BigRational::zero()
        );
    }
}
