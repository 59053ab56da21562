//! Proximity between subspaces of R^n: the canonical angle sines
//! `psi_1 <= ... <= psi_t`, their product `phi`, orthogonal projections, and
//! an exact-rational path for the small-dimension cases where the angles
//! shrink far below the working precision.
//!
//! Angles are computed from the singular values of the inner-product matrix
//! of two orthonormal bases. Near-zero angles are never formed as
//! `sqrt(1 - sigma^2)`; they are read off the residual of a witness vector
//! after projection, which keeps full absolute accuracy at the working
//! precision.

use crate::bigfloat::BigFloat;
use crate::exact::{det_rational, gram_matrix_rational, IntMatrix, RatMatrix};
use crate::grassmann::RationalSubspace;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AngleError {
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("family is numerically dependent at the working precision")]
    Dependent,
    #[error("requested tolerance unreachable at {have} bits; need at least {required} bits")]
    PrecisionUnderflow { have: u32, required: u32 },
    #[error("vector lies in the orthogonal complement; the projection angle is undefined")]
    InOrthogonalComplement,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("Jacobi sweep did not converge")]
    NoConvergence,
}

/// Guard bits added to the caller-visible precision for internal arithmetic.
const GUARD: u32 = 64;

pub type Vector = Vec<BigFloat>;

pub(crate) fn dot(a: &[BigFloat], b: &[BigFloat], prec: u32) -> BigFloat {
    let mut acc = BigFloat::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(&x.mul(y, prec), prec);
    }
    acc
}

pub(crate) fn norm(a: &[BigFloat], prec: u32) -> BigFloat {
    dot(a, a, prec).sqrt(prec)
}

pub(crate) fn scaled(a: &[BigFloat], c: &BigFloat, prec: u32) -> Vector {
    a.iter().map(|x| x.mul(c, prec)).collect()
}

/// `a - c * b`
pub(crate) fn sub_scaled(a: &[BigFloat], b: &[BigFloat], c: &BigFloat, prec: u32) -> Vector {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.sub(&y.mul(c, prec), prec))
        .collect()
}

pub(crate) fn sub_vec(a: &[BigFloat], b: &[BigFloat], prec: u32) -> Vector {
    a.iter().zip(b).map(|(x, y)| x.sub(y, prec)).collect()
}

/// Modified Gram-Schmidt with a second orthogonalization pass.
pub(crate) fn orthonormalize(cols: &[Vector], prec: u32) -> Result<Vec<Vector>, AngleError> {
    let mut q: Vec<Vector> = Vec::with_capacity(cols.len());
    for col in cols {
        let mut v = col.clone();
        for _ in 0..2 {
            for b in &q {
                let c = dot(&v, b, prec);
                v = sub_scaled(&v, b, &c, prec);
            }
        }
        let n = norm(&v, prec);
        if n.is_zero() || n.log2_floor() < -(prec as i64) / 2 {
            return Err(AngleError::Dependent);
        }
        let inv = BigFloat::one().div(&n, prec);
        q.push(scaled(&v, &inv, prec));
    }
    Ok(q)
}

/// Determinant of a square matrix given by columns, by Gaussian elimination
/// with partial pivoting.
pub(crate) fn det_columns(cols: &[Vector], prec: u32) -> BigFloat {
    let n = cols.len();
    assert!(cols.iter().all(|c| c.len() == n));
    let mut a: Vec<Vector> = cols.to_vec();
    let mut det = BigFloat::one();
    let mut neg = false;
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if a[i][k].abs().cmp_value(&a[piv][k].abs()) == Ordering::Greater {
                piv = i;
            }
        }
        if a[piv][k].is_zero() {
            return BigFloat::zero();
        }
        if piv != k {
            a.swap(piv, k);
            neg = !neg;
        }
        let p = a[k][k].clone();
        det = det.mul(&p, prec);
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = a[i][k].div(&p, prec);
            let (head, tail) = a.split_at_mut(i);
            let ak = &head[k];
            let ai = &mut tail[0];
            for j in k..n {
                let v = ai[j].sub(&ak[j].mul(&f, prec), prec);
                ai[j] = v;
            }
        }
    }
    if neg {
        det.neg()
    } else {
        det
    }
}

/// `sqrt(det Gram)` of an arbitrary family, at `prec` bits.
pub(crate) fn generalized_det_real(cols: &[Vector], prec: u32) -> BigFloat {
    let l = cols.len();
    let mut g: Vec<Vector> = vec![vec![BigFloat::zero(); l]; l];
    for i in 0..l {
        for j in i..l {
            let d = dot(&cols[i], &cols[j], prec);
            g[i][j] = d.clone();
            g[j][i] = d;
        }
    }
    let d = det_columns(&g, prec);
    if d.is_negative() {
        // Gram determinants are >= 0; tiny negatives are roundoff
        BigFloat::zero()
    } else {
        d.sqrt(prec)
    }
}

/// One-sided Jacobi SVD of the `d x e` matrix whose columns are `cols`
/// (vectors in R^d). Returns `(sigmas, u, v)` with sigmas descending,
/// `u[i] in R^d`, `v[i] in R^e`, and `M v_i = sigma_i u_i`.
pub(crate) fn jacobi_svd(
    cols: &[Vector],
    prec: u32,
) -> Result<(Vec<BigFloat>, Vec<Vector>, Vec<Vector>), AngleError> {
    let e = cols.len();
    assert!(e > 0);
    let d = cols[0].len();
    let mut w: Vec<Vector> = cols.to_vec();
    let mut v: Vec<Vector> = (0..e)
        .map(|j| {
            let mut col = vec![BigFloat::zero(); e];
            col[j] = BigFloat::one();
            col
        })
        .collect();
    // converge until off-diagonal inner products are below 2^(16-prec) relative
    let tol_log2 = 16 - prec as i64;
    let max_sweeps = 60;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        // columns below ulp of the largest are deflated to zero, otherwise a
        // rounded-out column can never satisfy the relative criterion
        let scale2 = w
            .iter()
            .map(|c| dot(c, c, prec))
            .max_by(|a, b| a.cmp_value(b))
            .unwrap();
        if scale2.is_zero() {
            converged = true;
            break;
        }
        let floor2 = scale2.scale2(2 * tol_log2);
        for i in 0..e {
            for j in i + 1..e {
                let aii = dot(&w[i], &w[i], prec);
                let ajj = dot(&w[j], &w[j], prec);
                let aij = dot(&w[i], &w[j], prec);
                if aij.is_zero() || aii.is_zero() || ajj.is_zero() {
                    continue;
                }
                if aii.cmp_value(&floor2) != Ordering::Greater
                    || ajj.cmp_value(&floor2) != Ordering::Greater
                {
                    continue;
                }
                // |aij| <= 2^tol_log2 * sqrt(aii * ajj) ?
                let thr = aii.mul(&ajj, prec).sqrt(prec).scale2(tol_log2);
                if aij.abs().cmp_value(&thr) != Ordering::Greater {
                    continue;
                }
                rotated = true;
                // classic two-sided rotation parameters
                let two = BigFloat::from_i64(2);
                let zeta = ajj.sub(&aii, prec).div(&aij.mul(&two, prec), prec);
                let one = BigFloat::one();
                let t_den = zeta.abs().add(&one.add(&zeta.mul(&zeta, prec), prec).sqrt(prec), prec);
                let mut t = one.div(&t_den, prec);
                if zeta.is_negative() {
                    t = t.neg();
                }
                let c = one.div(&one.add(&t.mul(&t, prec), prec).sqrt(prec), prec);
                let s = c.mul(&t, prec);
                for m in [&mut w, &mut v] {
                    let (wi, wj) = {
                        let (a, b) = m.split_at_mut(j);
                        (&mut a[i], &mut b[0])
                    };
                    for k in 0..wi.len() {
                        let x = wi[k].clone();
                        let y = wj[k].clone();
                        wi[k] = x.mul(&c, prec).sub(&y.mul(&s, prec), prec);
                        wj[k] = x.mul(&s, prec).add(&y.mul(&c, prec), prec);
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(AngleError::NoConvergence);
    }
    // singular values and left vectors
    let mut order: Vec<usize> = (0..e).collect();
    let sig: Vec<BigFloat> = w.iter().map(|c| norm(c, prec)).collect();
    order.sort_by(|&a, &b| sig[b].cmp_value(&sig[a]));
    let mut sigmas = Vec::with_capacity(e);
    let mut u: Vec<Vector> = Vec::with_capacity(e);
    let mut vv: Vec<Vector> = Vec::with_capacity(e);
    let sigma_floor = -(prec as i64 / 2);
    for &idx in &order {
        let s = sig[idx].clone();
        if !s.is_zero() && s.log2_floor() > sigma_floor {
            let inv = BigFloat::one().div(&s, prec);
            u.push(scaled(&w[idx], &inv, prec));
        } else {
            // direction numerically undefined; complete orthonormally below
            u.push(vec![BigFloat::zero(); d]);
        }
        sigmas.push(s);
        vv.push(v[idx].clone());
    }
    // complete undefined left vectors to an orthonormal family
    for i in 0..u.len() {
        if !u[i].iter().all(|x| x.is_zero()) {
            continue;
        }
        'candidates: for axis in 0..d {
            let mut cand = vec![BigFloat::zero(); d];
            cand[axis] = BigFloat::one();
            for (k, prev) in u.iter().enumerate() {
                if k == i {
                    continue;
                }
                let c = dot(&cand, prev, prec);
                cand = sub_scaled(&cand, prev, &c, prec);
            }
            let nrm = norm(&cand, prec);
            if !nrm.is_zero() && nrm.log2_floor() > -8 {
                let inv = BigFloat::one().div(&nrm, prec);
                u[i] = scaled(&cand, &inv, prec);
                break 'candidates;
            }
        }
    }
    Ok((sigmas, u, vv))
}

/// A real subspace carried by an orthonormal basis at a given precision.
#[derive(Debug, Clone)]
pub struct RealSubspace {
    n: usize,
    d: usize,
    onb: Vec<Vector>,
    prec: u32,
    provenance: String,
}

impl RealSubspace {
    /// Orthonormalize the given spanning columns.
    pub fn from_columns(
        cols: &[Vector],
        prec: u32,
        provenance: impl Into<String>,
    ) -> Result<Self, AngleError> {
        assert!(!cols.is_empty());
        let n = cols[0].len();
        assert!(cols.iter().all(|c| c.len() == n), "ragged columns");
        let wp = prec + GUARD;
        let onb = orthonormalize(cols, wp)?;
        let sub = RealSubspace { n, d: onb.len(), onb, prec, provenance: provenance.into() };
        debug_assert!(sub.orthonormality_defect_log2() < 16 - prec as i64);
        Ok(sub)
    }

    pub fn from_rational_subspace(b: &RationalSubspace, prec: u32) -> Self {
        let cols: Vec<Vector> = (0..b.dim())
            .map(|j| {
                (0..b.n())
                    .map(|i| BigFloat::from_bigint(b.zbasis()[(i, j)].clone()))
                    .collect()
            })
            .collect();
        Self::from_columns(&cols, prec, "rational").expect("Z-basis is independent")
    }

    pub fn random(n: usize, d: usize, rng: &mut impl Rng, prec: u32) -> Self {
        loop {
            let cols: Vec<Vector> = (0..d)
                .map(|_| (0..n).map(|_| BigFloat::from_f64(rng.gen_range(-1.0..1.0))).collect())
                .collect();
            if let Ok(s) = Self::from_columns(&cols, prec, "random") {
                return s;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn onb(&self) -> &[Vector] {
        &self.onb
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// log2 of `max |Q^T Q - I|`, or i64::MIN when exact.
    pub fn orthonormality_defect_log2(&self) -> i64 {
        let wp = self.prec + GUARD;
        let mut worst = i64::MIN;
        for i in 0..self.d {
            for j in i..self.d {
                let mut g = dot(&self.onb[i], &self.onb[j], wp);
                if i == j {
                    g = g.sub(&BigFloat::one(), wp);
                }
                if !g.is_zero() {
                    worst = worst.max(g.abs().log2_floor());
                }
            }
        }
        worst
    }

    /// Coordinates of the orthogonal projection of `x` onto this subspace.
    pub fn project(&self, x: &[BigFloat]) -> Vector {
        let wp = self.prec + GUARD;
        let mut p = vec![BigFloat::zero(); self.n];
        for q in &self.onb {
            let c = dot(q, x, wp);
            for (pi, qi) in p.iter_mut().zip(q) {
                *pi = pi.add(&qi.mul(&c, wp), wp);
            }
        }
        p
    }

    /// Spanned by a subset of the orthonormal basis columns.
    pub fn sub_subspace(&self, cols: &[usize]) -> RealSubspace {
        let onb: Vec<Vector> = cols.iter().map(|&j| self.onb[j].clone()).collect();
        RealSubspace {
            n: self.n,
            d: onb.len(),
            onb,
            prec: self.prec,
            provenance: format!("{}/sub", self.provenance),
        }
    }

    /// Apply an isometry given by orthonormal columns (n x n).
    pub fn apply_orthogonal(&self, q: &[Vector]) -> RealSubspace {
        let wp = self.prec + GUARD;
        let onb: Vec<Vector> = self
            .onb
            .iter()
            .map(|col| {
                let mut out = vec![BigFloat::zero(); self.n];
                for (k, qk) in q.iter().enumerate() {
                    for (o, qv) in out.iter_mut().zip(qk) {
                        *o = o.add(&qv.mul(&col[k], wp), wp);
                    }
                }
                out
            })
            .collect();
        RealSubspace {
            n: self.n,
            d: self.d,
            onb,
            prec: self.prec,
            provenance: format!("{}/isometry", self.provenance),
        }
    }
}

/// The canonical angle sines between two subspaces with witness pairs:
/// `witnesses[i] = (X_i, Y_i)` are unit vectors with `X_i . Y_j =
/// delta_ij cos(theta_i)`.
#[derive(Debug, Clone)]
pub struct AngleProfile {
    pub psis: Vec<BigFloat>,
    pub witnesses: Vec<(Vector, Vector)>,
    pub prec: u32,
    /// Set when an exact rational path certified that the corresponding
    /// angle is exactly zero.
    pub exact_zeros: Vec<bool>,
}

impl AngleProfile {
    pub fn t(&self) -> usize {
        self.psis.len()
    }

    /// 1-based accessor matching the usual `psi_j` notation.
    pub fn psi(&self, j: usize) -> &BigFloat {
        &self.psis[j - 1]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let hex = |v: &BigFloat| v.to_hex_string();
        serde_json::json!({
            "prec": self.prec,
            "psis": self.psis.iter().map(hex).collect::<Vec<_>>(),
            "witness_x": self.witnesses.iter().map(|(x, _)| x.iter().map(hex).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "witness_y": self.witnesses.iter().map(|(_, y)| y.iter().map(hex).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "exact_zeros": self.exact_zeros,
        })
    }
}

/// `psi(X, Y)`: the sine of the geometric angle between two nonzero vectors,
/// computed as the norm of the residual of `X/|X|` after projection onto
/// `Y/|Y|` (never as `1 - cos^2`).
pub fn vector_angle(x: &[BigFloat], y: &[BigFloat], prec: u32) -> Result<BigFloat, AngleError> {
    let wp = prec + GUARD;
    let nx = norm(x, wp);
    let ny = norm(y, wp);
    if nx.is_zero() || ny.is_zero() {
        return Err(AngleError::ZeroVector);
    }
    let u = scaled(x, &BigFloat::one().div(&nx, wp), wp);
    let v = scaled(y, &BigFloat::one().div(&ny, wp), wp);
    let c = dot(&u, &v, wp);
    let r = sub_scaled(&u, &v, &c, wp);
    Ok(clamp01(norm(&r, wp), wp))
}

fn clamp01(v: BigFloat, prec: u32) -> BigFloat {
    let one = BigFloat::one();
    if v.cmp_value(&one) == Ordering::Greater {
        one
    } else {
        v.truncated(prec)
    }
}

/// Principal angle sines between two real subspaces, ascending, with
/// witnesses from the singular vector pairs.
pub fn principal_angles(a: &RealSubspace, b: &RealSubspace) -> Result<AngleProfile, AngleError> {
    if a.n != b.n {
        return Err(AngleError::Dimension(format!("{} vs {}", a.n, b.n)));
    }
    let prec = a.prec.min(b.prec);
    let wp = prec + GUARD;
    let t = a.d.min(b.d);
    // inner-product matrix M = Qa^T Qb, columns in R^d
    let m_cols: Vec<Vector> = b
        .onb
        .iter()
        .map(|qb| a.onb.iter().map(|qa| dot(qa, qb, wp)).collect())
        .collect();
    let (sigmas, u, v) = jacobi_svd(&m_cols, wp)?;
    let mut psis = Vec::with_capacity(t);
    let mut witnesses = Vec::with_capacity(t);
    for i in 0..t {
        // ambient witnesses
        let xi = mat_vec(&a.onb, &u[i], wp);
        let yi = mat_vec(&b.onb, &v[i], wp);
        let c = dot(&xi, &yi, wp);
        let r = sub_scaled(&xi, &yi, &c, wp);
        let psi = clamp01(norm(&r, wp), wp);
        let _ = &sigmas[i];
        psis.push(psi);
        witnesses.push((xi, yi));
    }
    // enforce ascending order (sigmas descending already implies it, up to
    // rounding ties)
    let mut idx: Vec<usize> = (0..t).collect();
    idx.sort_by(|&p, &q| psis[p].cmp_value(&psis[q]));
    let psis: Vec<BigFloat> = idx.iter().map(|&i| psis[i].clone()).collect();
    let witnesses: Vec<(Vector, Vector)> = idx.iter().map(|&i| witnesses[i].clone()).collect();
    let exact_zeros = vec![false; t];
    Ok(AngleProfile { psis, witnesses, prec, exact_zeros })
}

fn mat_vec(cols: &[Vector], coef: &[BigFloat], prec: u32) -> Vector {
    let n = cols[0].len();
    let mut out = vec![BigFloat::zero(); n];
    for (c, col) in coef.iter().zip(cols) {
        for (o, x) in out.iter_mut().zip(col) {
            *o = o.add(&x.mul(c, prec), prec);
        }
    }
    out
}

/// Angles against a rational subspace. When both the exact intersection
/// dimension is wanted and the target is rational, intersections are decided
/// exactly and the corresponding sines are flagged exact zeros.
pub fn principal_angles_rational(
    a: &RealSubspace,
    b: &RationalSubspace,
) -> Result<AngleProfile, AngleError> {
    let br = RealSubspace::from_rational_subspace(b, a.prec);
    principal_angles(a, &br)
}

/// The product `phi(A, B)` of all canonical angle sines, computed both as
/// the product of the profile entries and as the generalized-determinant
/// ratio `D(X, Y) / (D(X) D(Y))`; the ratio form is the value.
#[derive(Debug, Clone)]
pub struct PhiValue {
    pub value: BigFloat,
    pub by_product: BigFloat,
    pub prec: u32,
}

pub fn phi(a: &RealSubspace, b: &RealSubspace) -> Result<PhiValue, AngleError> {
    if a.n != b.n {
        return Err(AngleError::Dimension(format!("{} vs {}", a.n, b.n)));
    }
    if a.d + b.d > a.n {
        return Err(AngleError::Dimension(format!(
            "phi requires dim A + dim B <= n ({} + {} > {})",
            a.d, b.d, a.n
        )));
    }
    let prec = a.prec.min(b.prec);
    let wp = prec + GUARD;
    let profile = principal_angles(a, b)?;
    let mut by_product = BigFloat::one();
    for p in &profile.psis {
        by_product = by_product.mul(p, wp);
    }
    let mut joint: Vec<Vector> = a.onb.clone();
    joint.extend(b.onb.iter().cloned());
    let d_joint = generalized_det_real(&joint, wp);
    let d_a = generalized_det_real(&a.onb, wp);
    let d_b = generalized_det_real(&b.onb, wp);
    let value = d_joint.div(&d_a.mul(&d_b, wp), wp);
    Ok(PhiValue { value: clamp01(value, wp), by_product: clamp01(by_product, wp), prec })
}

/// `phi(A, B)` for complementary dimensions (`dim A + dim B = n`) through
/// the full determinant: `phi = |det(X | Y)| / (D(X) H(B))` with `Y` a
/// Z-basis of `B ∩ Z^n`.
pub fn phi_complementary(
    a: &RealSubspace,
    b: &RationalSubspace,
) -> Result<BigFloat, AngleError> {
    if a.n != b.n() || a.d + b.dim() != a.n {
        return Err(AngleError::Dimension(format!(
            "need dim A + dim B = n, got {} + {} vs {}",
            a.d,
            b.dim(),
            a.n
        )));
    }
    let prec = a.prec;
    let wp = prec + GUARD;
    let mut cols: Vec<Vector> = a.onb.clone();
    for j in 0..b.dim() {
        cols.push(
            (0..b.n())
                .map(|i| BigFloat::from_bigint(b.zbasis()[(i, j)].clone()))
                .collect(),
        );
    }
    let det = det_columns(&cols, wp).abs();
    let d_a = generalized_det_real(&a.onb, wp);
    let h = b.height(wp);
    Ok(clamp01(det.div(&d_a.mul(&h, wp), wp), wp))
}

/// Orthogonal projection of `x` onto `F` together with
/// `psi(x, p_F(x)) = |x - p_F(x)| / |x|`. The angle is undefined when `x`
/// lies in the orthogonal complement of `F`.
pub fn project_onto(
    f: &RealSubspace,
    x: &[BigFloat],
) -> Result<(Vector, BigFloat), AngleError> {
    let wp = f.prec + GUARD;
    let nx = norm(x, wp);
    if nx.is_zero() {
        return Err(AngleError::ZeroVector);
    }
    let p = f.project(x);
    let np = norm(&p, wp);
    // x in F^perp: projection vanishes at the detection threshold
    if np.is_zero() || np.log2_floor() - nx.log2_floor() < 64 - f.prec as i64 {
        return Err(AngleError::InOrthogonalComplement);
    }
    let r = sub_vec(x, &p, wp);
    let angle = clamp01(norm(&r, wp).div(&nx, wp), wp);
    Ok((p, angle))
}

/// Exact-path principal angle sines for subspaces of dimension at most 2
/// given by exact rational spanning columns. All cancellation-prone
/// quantities are formed in exact rational arithmetic; only final square
/// roots round, so tiny angles keep full relative accuracy at any magnitude.
pub fn principal_sines_exact_small(
    xcols: &[Vec<BigRational>],
    ycols: &[Vec<BigRational>],
    prec: u32,
) -> Vec<BigFloat> {
    let l = xcols.len();
    assert_eq!(l, ycols.len(), "expect equal dimensions");
    assert!(l >= 1 && l <= 2, "exact path implemented for dimensions 1 and 2");
    let gx = gram_matrix_rational(xcols);
    let gy = gram_matrix_rational(ycols);
    let cxy = RatMatrix::from_fn(l, l, |i, j| {
        xcols[i].iter().zip(&ycols[j]).map(|(a, b)| a * b).sum()
    });
    if l == 1 {
        // sin^2 = 1 - (x.y)^2 / (|x|^2 |y|^2), exactly
        let c2 = &cxy[(0, 0)] * &cxy[(0, 0)] / (&gx[(0, 0)] * &gy[(0, 0)]);
        let s2 = BigRational::one() - c2;
        let s2 = if s2.is_negative() { BigRational::zero() } else { s2 };
        return vec![BigFloat::from_rational(&s2, 2 * prec + 4).sqrt(prec)];
    }
    // W = Gx^-1 Cxy Gy^-1 Cxy^T has eigenvalues cos^2(theta_i)
    let inv2 = |m: &RatMatrix| -> RatMatrix {
        let det = &m[(0, 0)] * &m[(1, 1)] - &m[(0, 1)] * &m[(1, 0)];
        assert!(!det.is_zero(), "Gram matrix of independent family");
        RatMatrix::from_fn(2, 2, |i, j| {
            let adj = match (i, j) {
                (0, 0) => m[(1, 1)].clone(),
                (1, 1) => m[(0, 0)].clone(),
                (0, 1) => -m[(0, 1)].clone(),
                _ => -m[(1, 0)].clone(),
            };
            adj / &det
        })
    };
    let w = inv2(&gx).mul(&cxy).mul(&inv2(&gy)).mul(&cxy.transpose());
    let tr = &w[(0, 0)] + &w[(1, 1)];
    let det = det_rational(&w);
    // mu = 1 - lambda satisfies mu^2 - s mu + q = 0
    let s = BigRational::from_integer(2.into()) - &tr;
    let q = BigRational::one() - &tr + &det;
    let disc = &s * &s - BigRational::from_integer(4.into()) * &q;
    let disc = if disc.is_negative() { BigRational::zero() } else { disc };
    let sqrt_disc = BigFloat::from_rational(&disc, 2 * prec + 8).sqrt(prec + 4);
    let s_f = BigFloat::from_rational(&s, prec + 8);
    let q_f = BigFloat::from_rational(&q, prec + 8);
    let half = BigFloat::one().scale2(-1);
    let mu_plus = s_f.add(&sqrt_disc, prec + 4).mul(&half, prec + 4);
    // the small root via the product of roots, which avoids cancellation
    let mu_minus = if mu_plus.is_zero() { BigFloat::zero() } else { q_f.div(&mu_plus, prec + 4) };
    let psi2 = mu_plus.abs().sqrt(prec);
    let psi1 = mu_minus.abs().sqrt(prec);
    vec![psi1, psi2]
}

/// Exact `phi^2 = det Gram(X,Y) / (det Gram X * det Gram Y)`.
pub fn phi_squared_exact(
    xcols: &[Vec<BigRational>],
    ycols: &[Vec<BigRational>],
) -> BigRational {
    let mut joint = xcols.to_vec();
    joint.extend_from_slice(ycols);
    let num = det_rational(&gram_matrix_rational(&joint));
    let den = det_rational(&gram_matrix_rational(xcols)) * det_rational(&gram_matrix_rational(ycols));
    num / den
}

/// Integer matrix columns as exact rational vectors (helper for the exact
/// angle paths).
pub fn int_columns_rational(m: &IntMatrix) -> Vec<Vec<BigRational>> {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| BigRational::from(m[(i, j)].clone())).collect())
        .collect()
}

/// Serializable form of an angle profile (hex floats are bit-exact).
#[derive(Serialize, Deserialize)]
pub struct AngleProfileWire {
    pub prec: u32,
    pub psis: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    const P: u32 = 128;

    fn fv(v: &[f64]) -> Vector {
        v.iter().map(|&x| BigFloat::from_f64(x)).collect()
    }

    fn approx(a: &BigFloat, b: f64, tol: f64) {
        assert!((a.to_f64() - b).abs() < tol, "{} vs {}", a.to_f64(), b);
    }

    #[test]
    fn vector_angle_basics() {
        let e1 = fv(&[1.0, 0.0]);
        let e2 = fv(&[0.0, 1.0]);
        let diag = fv(&[1.0, 1.0]);
        approx(&vector_angle(&e1, &e1, P).unwrap(), 0.0, 1e-30);
        approx(&vector_angle(&e1, &diag, P).unwrap(), (0.5f64).sqrt(), 1e-15);
        approx(&vector_angle(&e1, &e2, P).unwrap(), 1.0, 1e-30);
        assert!(matches!(
            vector_angle(&fv(&[0.0, 0.0]), &e1, P),
            Err(AngleError::ZeroVector)
        ));
    }

    #[test]
    fn principal_angles_identity_and_orthogonal() {
        let mut rng = StdRng::seed_from_u64(1);
        let a = RealSubspace::random(4, 2, &mut rng, P);
        let prof = principal_angles(&a, &a).unwrap();
        for p in &prof.psis {
            assert!(p.is_zero() || p.log2_floor() < -(P as i64) + 16);
        }
        // two orthogonal planes in R^4
        let e12 = RealSubspace::from_columns(&[fv(&[1., 0., 0., 0.]), fv(&[0., 1., 0., 0.])], P, "e12").unwrap();
        let e34 = RealSubspace::from_columns(&[fv(&[0., 0., 1., 0.]), fv(&[0., 0., 0., 1.])], P, "e34").unwrap();
        let prof = principal_angles(&e12, &e34).unwrap();
        assert_eq!(prof.psis.len(), 2);
        for p in &prof.psis {
            approx(p, 1.0, 1e-30);
        }
    }

    #[test]
    fn principal_angles_known_pair() {
        // A = span(e1, e2), B = span((1,0,1,0)/sqrt2, e3): angles (pi/4, pi/2).
        let a = RealSubspace::from_columns(&[fv(&[1., 0., 0., 0.]), fv(&[0., 1., 0., 0.])], P, "a").unwrap();
        let b = RealSubspace::from_columns(&[fv(&[1., 0., 1., 0.]), fv(&[0., 0., 0., 1.])], P, "b").unwrap();
        let prof = principal_angles(&a, &b).unwrap();
        approx(&prof.psis[0], (0.5f64).sqrt(), 1e-15);
        approx(&prof.psis[1], 1.0, 1e-15);
        // witnesses satisfy X_i . Y_j = delta_ij cos(theta_i)
        let wp = P + GUARD;
        for i in 0..2 {
            for j in 0..2 {
                let d = dot(&prof.witnesses[i].0, &prof.witnesses[j].1, wp).to_f64();
                let expect = if i == j {
                    (1.0 - prof.psis[i].to_f64().powi(2)).max(0.0).sqrt()
                } else {
                    0.0
                };
                assert!((d.abs() - expect).abs() < 1e-12, "i={i} j={j} d={d} expect={expect}");
            }
        }
    }

    #[test]
    fn principal_angles_detect_intersection() {
        // (1,1,0,0) lies in both planes, so psi_1 = 0 and psi_2 = 1.
        let a = RealSubspace::from_columns(&[fv(&[1., 0., 0., 0.]), fv(&[0., 1., 0., 0.])], P, "a").unwrap();
        let b = RealSubspace::from_columns(&[fv(&[1., 1., 0., 0.]), fv(&[0., 0., 1., 0.])], P, "b").unwrap();
        let prof = principal_angles(&a, &b).unwrap();
        assert!(prof.psis[0].is_zero() || prof.psis[0].log2_floor() < 64 - P as i64);
        approx(&prof.psis[1], 1.0, 1e-15);
    }

    /// Brute-force min-max oracle over a parameter grid (tiny instances).
    fn psi1_grid_oracle(a: &RealSubspace, b: &RealSubspace) -> f64 {
        let steps = 720;
        let mut best = f64::INFINITY;
        let to_f = |v: &Vector| -> Vec<f64> { v.iter().map(|x| x.to_f64()).collect() };
        let qa: Vec<Vec<f64>> = a.onb().iter().map(to_f).collect();
        let qb: Vec<Vec<f64>> = b.onb().iter().map(to_f).collect();
        for i in 0..steps {
            let t = std::f64::consts::PI * i as f64 / steps as f64;
            let x: Vec<f64> = (0..a.n()).map(|k| t.cos() * qa[0][k] + t.sin() * qa[1][k]).collect();
            for j in 0..steps {
                let s = std::f64::consts::PI * j as f64 / steps as f64;
                let y: Vec<f64> = (0..b.n()).map(|k| s.cos() * qb[0][k] + s.sin() * qb[1][k]).collect();
                let c: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
                let sin2 = (1.0 - c * c).max(0.0);
                best = best.min(sin2.sqrt());
            }
        }
        best
    }

    #[test]
    fn psi1_matches_minmax_oracle() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..3 {
            let a = RealSubspace::random(4, 2, &mut rng, P);
            let b = RealSubspace::random(4, 2, &mut rng, P);
            let prof = principal_angles(&a, &b).unwrap();
            let oracle = psi1_grid_oracle(&a, &b);
            assert!((prof.psis[0].to_f64() - oracle).abs() < 1e-4);
        }
    }

    #[test]
    fn phi_paths_agree() {
        let mut rng = StdRng::seed_from_u64(33);
        for _ in 0..10 {
            let a = RealSubspace::random(5, 2, &mut rng, P);
            let b = RealSubspace::random(5, 2, &mut rng, P);
            let v = phi(&a, &b).unwrap();
            let diff = v.value.sub(&v.by_product, P).abs();
            assert!(
                diff.is_zero() || diff.log2_floor() < -80,
                "phi paths disagree: {:?}",
                diff.to_f64()
            );
        }
    }

    #[test]
    fn phi_orthogonal_and_intersecting() {
        let e12 = RealSubspace::from_columns(&[fv(&[1., 0., 0., 0.]), fv(&[0., 1., 0., 0.])], P, "a").unwrap();
        let e34 = RealSubspace::from_columns(&[fv(&[0., 0., 1., 0.]), fv(&[0., 0., 0., 1.])], P, "b").unwrap();
        let v = phi(&e12, &e34).unwrap();
        approx(&v.value, 1.0, 1e-20);
        // shared direction -> phi = 0
        let shared = RealSubspace::from_columns(&[fv(&[1., 0., 0., 0.]), fv(&[0., 0., 1., 0.])], P, "c").unwrap();
        let v = phi(&e12, &shared).unwrap();
        assert!(v.value.is_zero() || v.value.log2_floor() < -100);
    }

    #[test]
    fn phi_complementary_agrees() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..10 {
            let a = RealSubspace::random(4, 2, &mut rng, P);
            let b = crate::grassmann::tests::random_subspace(&mut rng, 4, 2, 5);
            let pc = phi_complementary(&a, &b).unwrap();
            let v = phi(&a, &RealSubspace::from_rational_subspace(&b, P)).unwrap();
            let diff = pc.sub(&v.value, P).abs();
            assert!(diff.is_zero() || diff.log2_floor() < -66, "{} vs {}", pc.to_f64(), v.value.to_f64());
        }
    }

    #[test]
    fn projection_properties() {
        let f = RealSubspace::from_columns(&[fv(&[1., 0.])], P, "x-axis").unwrap();
        // X in F -> angle 0
        let (_, ang) = project_onto(&f, &fv(&[2., 0.])).unwrap();
        assert!(ang.is_zero() || ang.log2_floor() < -100);
        // F = span(e1), X = (1,1) -> angle sqrt(2)/2
        let (_, ang) = project_onto(&f, &fv(&[1., 1.])).unwrap();
        approx(&ang, (0.5f64).sqrt(), 1e-15);
        // X in F^perp -> explicit error
        assert!(matches!(
            project_onto(&f, &fv(&[0., 1.])),
            Err(AngleError::InOrthogonalComplement)
        ));
    }

    #[test]
    fn projection_matches_psi1() {
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..10 {
            let f = RealSubspace::random(5, 2, &mut rng, P);
            let x: Vector = (0..5).map(|_| BigFloat::from_f64(rng.gen_range(-1.0..1.0))).collect();
            let line = RealSubspace::from_columns(&[x.clone()], P, "line").unwrap();
            if let Ok((_, ang)) = project_onto(&f, &x) {
                let prof = principal_angles(&line, &f).unwrap();
                let diff = ang.sub(&prof.psis[0], P).abs();
                assert!(diff.is_zero() || diff.log2_floor() < -90);
            }
        }
    }

    #[test]
    fn exact_small_dimension_path() {
        use num_bigint::BigInt;
        // line (1, xi) vs line (q, p): compare against the float path at modest size
        let xi = BigRational::new(BigInt::from(41), BigInt::from(29));
        let x = vec![vec![BigRational::one(), xi.clone()]];
        let y = vec![vec![BigRational::from(BigInt::from(29)), BigRational::from(BigInt::from(41))]];
        let psis = principal_sines_exact_small(&x, &y, 128);
        assert_eq!(psis.len(), 1);
        assert!(psis[0].is_zero()); // same line exactly

        let y2 = vec![vec![BigRational::from(BigInt::from(1)), BigRational::from(BigInt::from(1))]];
        let psis = principal_sines_exact_small(&x, &y2, 128);
        let expected = {
            let a = RealSubspace::from_columns(&[fv(&[1.0, 41.0 / 29.0])], P, "a").unwrap();
            let b = RealSubspace::from_columns(&[fv(&[1.0, 1.0])], P, "b").unwrap();
            principal_angles(&a, &b).unwrap().psis[0].to_f64()
        };
        assert!((psis[0].to_f64() - expected).abs() < 1e-12);
    }

    #[test]
    fn exact_two_dimensional_matches_float() {
        use num_bigint::BigInt;
        let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        let x = vec![
            vec![q(1, 1), q(0, 1), q(2, 3), q(1, 7)],
            vec![q(0, 1), q(1, 1), q(-1, 2), q(3, 5)],
        ];
        let y = vec![
            vec![q(1, 2), q(1, 3), q(1, 1), q(0, 1)],
            vec![q(-1, 5), q(2, 1), q(0, 1), q(1, 1)],
        ];
        let exact = principal_sines_exact_small(&x, &y, 192);
        let tof = |cols: &[Vec<BigRational>]| -> Vec<Vector> {
            cols.iter()
                .map(|c| c.iter().map(|r| BigFloat::from_rational(r, 256)).collect())
                .collect()
        };
        let a = RealSubspace::from_columns(&tof(&x), 192, "a").unwrap();
        let b = RealSubspace::from_columns(&tof(&y), 192, "b").unwrap();
        let prof = principal_angles(&a, &b).unwrap();
        for (e, f) in exact.iter().zip(&prof.psis) {
            assert!((e.to_f64() - f.to_f64()).abs() < 1e-20);
        }
        // cross-check phi = psi1 * psi2 against the exact ratio
        let phi2 = phi_squared_exact(&x, &y);
        let prod = exact[0].mul(&exact[1], 192);
        let diff = prod.mul(&prod, 192).sub(&BigFloat::from_rational(&phi2, 192), 192).abs();
        assert!(diff.is_zero() || diff.log2_floor() < -150);
    }
}
