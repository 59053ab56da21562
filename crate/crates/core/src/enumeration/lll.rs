//! Textbook LLL reduction with exact rational Gram-Schmidt data
//! (delta = 3/4). Dimensions here are small (<= 2n for the penalty
//! lattices), so exact arithmetic is affordable and removes any floating
//! point soundness questions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Gso {
    /// mu[i][j] for j < i
    mu: Vec<Vec<BigRational>>,
    /// squared norms of the orthogonalized vectors
    b_star_sq: Vec<BigRational>,
}

fn gso(rows: &[Vec<BigInt>]) -> Gso {
    let k = rows.len();
    let mut mu = vec![vec![BigRational::zero(); k]; k];
    let mut b_star: Vec<Vec<BigRational>> = Vec::with_capacity(k);
    let mut b_star_sq = vec![BigRational::zero(); k];
    for i in 0..k {
        let mut v: Vec<BigRational> =
            rows[i].iter().map(|x| BigRational::from(x.clone())).collect();
        for j in 0..i {
            if b_star_sq[j].is_zero() {
                continue;
            }
            let num: BigRational = rows[i]
                .iter()
                .zip(&b_star[j])
                .map(|(x, y)| BigRational::from(x.clone()) * y)
                .sum();
            let m = num / &b_star_sq[j];
            for (vv, bb) in v.iter_mut().zip(&b_star[j]) {
                *vv -= &m * bb;
            }
            mu[i][j] = m;
        }
        b_star_sq[i] = v.iter().map(|x| x * x).sum();
        b_star.push(v);
    }
    Gso { mu, b_star_sq }
}

/// In-place LLL reduction of the row basis (rows must be independent).
pub fn lll_reduce(rows: &mut Vec<Vec<BigInt>>) {
    let k = rows.len();
    if k <= 1 {
        return;
    }
    let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut g = gso(rows);
    let mut i = 1usize;
    let mut rounds = 0usize;
    let round_cap = 100_000;
    while i < k {
        rounds += 1;
        assert!(rounds < round_cap, "LLL failed to terminate");
        // size-reduce row i against rows j < i
        for j in (0..i).rev() {
            let m = g.mu[i][j].clone();
            if m.abs() > half {
                let q = (&m + if m.is_negative() { -&half } else { half.clone() }).trunc();
                let qi = q.to_integer();
                if !qi.is_zero() {
                    let (head, tail) = rows.split_at_mut(i);
                    for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                        *x -= &qi * y;
                    }
                    g = gso(rows);
                }
            }
        }
        // Lovász condition
        let lhs = &g.b_star_sq[i];
        let rhs = (&delta - &g.mu[i][i - 1] * &g.mu[i][i - 1]) * &g.b_star_sq[i - 1];
        if *lhs >= rhs {
            i += 1;
        } else {
            rows.swap(i - 1, i);
            g = gso(rows);
            i = i.max(2) - 1;
        }
    }
    debug_assert!({
        let gg = gso(rows);
        gg.b_star_sq.iter().all(|b| !b.is_zero())
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm_sq(v: &[BigInt]) -> BigInt {
        dot(v, v)
    }

    #[test]
    fn reduces_skewed_plane_basis() {
        let mut rows = vec![
            vec![BigInt::from(1), BigInt::from(1_000_001)],
            vec![BigInt::from(0), BigInt::from(1_000_000)],
        ];
        lll_reduce(&mut rows);
        // the reduced basis contains a vector of norm about 1
        let min = rows.iter().map(|r| norm_sq(r)).min().unwrap();
        assert!(min <= BigInt::from(2));
    }

    #[test]
    fn preserves_lattice_determinant() {
        let mut rows = vec![
            vec![BigInt::from(7), BigInt::from(3), BigInt::from(1)],
            vec![BigInt::from(2), BigInt::from(8), BigInt::from(5)],
            vec![BigInt::from(1), BigInt::from(1), BigInt::from(9)],
        ];
        let det_before = det3(&rows);
        lll_reduce(&mut rows);
        let det_after = det3(&rows);
        assert_eq!(det_before.abs(), det_after.abs());
        // shortest vector of this small lattice: check reduced first vector
        // is reasonably short (LLL guarantee: within 2^((k-1)/2) of optimum)
        assert!(norm_sq(&rows[0]) <= BigInt::from(4 * 51));
    }

    fn det3(rows: &[Vec<BigInt>]) -> BigInt {
        let m = &rows;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }
}
