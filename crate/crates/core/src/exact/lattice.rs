//! Column Hermite normal form, integer kernels, and lattice saturation.

use super::matrix::{det_bigint, IntMatrix};
use super::{lambda, ExactError};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Column-style Hermite normal form.
///
/// Returns `(H, U)` with `H = M * U`, `U` unimodular. Pivot columns come
/// first with strictly increasing pivot rows, pivots positive, entries left
/// of a pivot in its row reduced into `[0, pivot)`; zero columns trail.
pub fn column_hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut h = m.clone();
    let mut u = IntMatrix::identity(cols);
    let mut pivot_col = 0usize;

    let col_axpy = |h: &mut IntMatrix, u: &mut IntMatrix, dst: usize, src: usize, q: &BigInt| {
        // column dst -= q * column src
        for i in 0..rows {
            let v = &h[(i, dst)] - q * &h[(i, src)];
            h[(i, dst)] = v;
        }
        for i in 0..cols {
            let v = &u[(i, dst)] - q * &u[(i, src)];
            u[(i, dst)] = v;
        }
    };

    for row in 0..rows {
        if pivot_col == cols {
            break;
        }
        if (pivot_col..cols).all(|j| h[(row, j)].is_zero()) {
            continue;
        }
        // gcd sweep on this row
        loop {
            let mut best: Option<usize> = None;
            for j in pivot_col..cols {
                if h[(row, j)].is_zero() {
                    continue;
                }
                best = match best {
                    None => Some(j),
                    Some(b) if h[(row, j)].magnitude() < h[(row, b)].magnitude() => Some(j),
                    keep => keep,
                };
            }
            let b = best.expect("nonzero entry exists");
            h.swap_cols(b, pivot_col);
            u.swap_cols(b, pivot_col);
            let mut done = true;
            for j in pivot_col + 1..cols {
                if h[(row, j)].is_zero() {
                    continue;
                }
                let q = h[(row, j)].div_floor(&h[(row, pivot_col)]);
                col_axpy(&mut h, &mut u, j, pivot_col, &q);
                if !h[(row, j)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        // positive pivot
        if h[(row, pivot_col)].is_negative() {
            for i in 0..rows {
                let v = -h[(i, pivot_col)].clone();
                h[(i, pivot_col)] = v;
            }
            for i in 0..cols {
                let v = -u[(i, pivot_col)].clone();
                u[(i, pivot_col)] = v;
            }
        }
        // reduce earlier pivot columns at this row
        for j in 0..pivot_col {
            if h[(row, j)].is_zero() {
                continue;
            }
            let q = h[(row, j)].div_floor(&h[(row, pivot_col)]);
            if !q.is_zero() {
                col_axpy(&mut h, &mut u, j, pivot_col, &q);
            }
        }
        pivot_col += 1;
    }
    (h, u)
}

/// Rank over Q, via the pivot count of the Hermite form.
pub fn rank(m: &IntMatrix) -> usize {
    let (h, _) = column_hnf(m);
    (0..h.cols())
        .take_while(|&j| (0..h.rows()).any(|i| !h[(i, j)].is_zero()))
        .count()
}

/// Basis of the integer kernel `{x in Z^cols : M x = 0}` as matrix columns.
/// The kernel of an integer map is saturated by construction; the basis is
/// returned in Hermite form for determinism.
pub fn integer_kernel(m: &IntMatrix) -> IntMatrix {
    let (h, u) = column_hnf(m);
    let cols = m.cols();
    let zero_cols: Vec<usize> = (0..cols)
        .filter(|&j| (0..h.rows()).all(|i| h[(i, j)].is_zero()))
        .collect();
    let ker = IntMatrix::from_fn(cols, zero_cols.len(), |i, j| u[(i, zero_cols[j])].clone());
    if ker.cols() == 0 {
        return ker;
    }
    column_hnf(&ker).0
}

/// Z-basis of `span_Q(M) ∩ Z^n` for a full-column-rank integer matrix, in
/// Hermite form. The gcd of the output's maximal minors is 1.
pub fn saturate_lattice(m: &IntMatrix) -> Result<IntMatrix, ExactError> {
    let e = m.cols();
    // vectors orthogonal to the span: kernel of M^T
    let w = integer_kernel(&m.transpose());
    if w.cols() != m.rows() - e {
        return Err(ExactError::RankDeficient { rank: m.rows() - w.cols(), expect: e });
    }
    if w.cols() == 0 {
        // full space
        return Ok(IntMatrix::identity(m.rows()));
    }
    let sat = integer_kernel(&w.transpose());
    debug_assert_eq!(sat.cols(), e);
    Ok(sat)
}

/// gcd of all maximal minors (0 if all zero).
pub fn minor_gcd(m: &IntMatrix) -> BigInt {
    let mut g = BigInt::zero();
    for rows in lambda(m.cols(), m.rows()) {
        let d = det_bigint(&m.submatrix_rows(&rows));
        g = g.gcd(&d);
    }
    g
}
