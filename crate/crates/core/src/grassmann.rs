//! Rational subspaces of Q^n as first-class values: primitive Plücker
//! coordinates, the quadratic Plücker relations, exact heights, and behavior
//! under rational linear maps.

use crate::bigfloat::BigFloat;
use crate::exact::{
    self, binomial, inversion_count, lambda, maximal_minors, rank, saturate_lattice, IntMatrix,
    RatMatrix,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrassmannError {
    #[error("basis columns are linearly dependent (rank {rank} < {expect})")]
    DependentColumns { rank: usize, expect: usize },
    #[error("image has smaller dimension ({got} < {expect}); the height bound does not apply")]
    RankDrop { got: usize, expect: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid subspace data: {0}")]
    Invalid(String),
}

/// Primitive, sign-normalized Plücker coordinates of an `r`-dimensional
/// subspace of R^n: the gcd of the entries is 1 and the first nonzero entry
/// is positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PluckerVector {
    n: usize,
    r: usize,
    coords: Vec<BigInt>,
}

impl PluckerVector {
    /// Normalize arbitrary integer coordinates (not all zero) to the
    /// primitive representative with positive leading entry.
    pub fn normalize(n: usize, r: usize, mut coords: Vec<BigInt>) -> Self {
        assert_eq!(coords.len(), binomial(n, r));
        let mut g = BigInt::zero();
        for c in &coords {
            g = g.gcd(c);
        }
        assert!(!g.is_zero(), "zero Plücker vector");
        if coords.iter().find(|c| !c.is_zero()).unwrap().is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for c in coords.iter_mut() {
                *c /= &g;
            }
        }
        PluckerVector { n, r, coords }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn norm_squared(&self) -> BigInt {
        self.coords.iter().map(|c| c * c).sum()
    }
}

/// One quadratic Plücker relation: `sum of coef * x_a * x_b` over 0-based
/// lexicographic coordinate indices, equal to zero on the embedding image.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PluckerRelation {
    pub terms: Vec<(i32, usize, usize)>,
}

impl PluckerRelation {
    fn canonicalize(raw: &[(i32, usize, usize)]) -> Option<Self> {
        use std::collections::BTreeMap;
        let mut map: BTreeMap<(usize, usize), i32> = BTreeMap::new();
        for &(c, a, b) in raw {
            *map.entry((a.min(b), a.max(b))).or_insert(0) += c;
        }
        let mut terms: Vec<(i32, usize, usize)> = map
            .into_iter()
            .filter(|&(_, c)| c != 0)
            .map(|((a, b), c)| (c, a, b))
            .collect();
        if terms.is_empty() {
            return None;
        }
        if terms[0].0 < 0 {
            for t in terms.iter_mut() {
                t.0 = -t.0;
            }
        }
        Some(PluckerRelation { terms })
    }

    pub fn eval_int(&self, v: &[BigInt]) -> BigInt {
        self.terms
            .iter()
            .map(|&(c, a, b)| BigInt::from(c) * &v[a] * &v[b])
            .sum()
    }

    pub fn eval_rational(&self, v: &[BigRational]) -> BigRational {
        self.terms
            .iter()
            .map(|&(c, a, b)| BigRational::from(BigInt::from(c)) * &v[a] * &v[b])
            .sum()
    }

    pub fn eval_real(&self, v: &[BigFloat], prec: u32) -> BigFloat {
        let mut acc = BigFloat::zero();
        for &(c, a, b) in &self.terms {
            let t = v[a].mul(&v[b], prec).mul(&BigFloat::from_i64(c as i64), prec);
            acc = acc.add(&t, prec);
        }
        acc
    }
}

/// The canonical deduplicated set of Plücker relations for `Gr(r, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PluckerRelationSet {
    pub r: usize,
    pub n: usize,
    pub relations: Vec<PluckerRelation>,
}

/// Generate the relations indexed by `I in Lambda(r-1, n)` and `J in
/// Lambda(r+1, n)`, canonicalized (merged monomials, positive leading sign)
/// and deduplicated.
pub fn plucker_relations(r: usize, n: usize) -> PluckerRelationSet {
    assert!(1 <= r && r < n);
    let mut seen: BTreeSet<Vec<(i32, usize, usize)>> = BTreeSet::new();
    let mut relations = Vec::new();
    for i_set in lambda(r - 1, n) {
        for j_set in lambda(r + 1, n) {
            let mut raw = Vec::new();
            for (k, &jk) in j_set.elems().iter().enumerate() {
                if i_set.contains(jk) {
                    continue;
                }
                let singleton = exact::IndexSet::new(n, vec![jk]);
                let sign = (k + 1 + inversion_count(&i_set, &singleton)) % 2;
                let coef = if sign == 0 { 1 } else { -1 };
                let a = i_set.insert(jk).lex_rank();
                let b = j_set.remove(jk).lex_rank();
                raw.push((coef, a, b));
            }
            if let Some(rel) = PluckerRelation::canonicalize(&raw) {
                if seen.insert(rel.terms.clone()) {
                    relations.push(rel);
                }
            }
        }
    }
    relations.sort();
    PluckerRelationSet { r, n, relations }
}

/// Result of checking a coordinate vector against a relation set.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationCheck {
    pub ok: bool,
    /// The all-zero vector satisfies every relation but is not a Plücker
    /// vector of any subspace.
    pub degenerate: bool,
    /// Largest |residual| for real inputs (absent for exact checks).
    pub max_residual: Option<BigFloat>,
    pub tolerance: Option<BigFloat>,
}

pub fn check_relations_int(v: &[BigInt], rels: &PluckerRelationSet) -> RelationCheck {
    assert_eq!(v.len(), binomial(rels.n, rels.r));
    let degenerate = v.iter().all(|c| c.is_zero());
    let ok = rels.relations.iter().all(|rel| rel.eval_int(v).is_zero());
    RelationCheck { ok, degenerate, max_residual: None, tolerance: None }
}

/// Real-input check: every residual must stay below `tol`, which defaults to
/// `2^(32 - prec)`. The maximal residual is reported either way.
pub fn check_relations_real(
    v: &[BigFloat],
    rels: &PluckerRelationSet,
    prec: u32,
    tol: Option<BigFloat>,
) -> RelationCheck {
    assert_eq!(v.len(), binomial(rels.n, rels.r));
    let tol = tol.unwrap_or_else(|| BigFloat::one().scale2(32 - prec as i64));
    let degenerate = v.iter().all(|c| c.is_zero());
    let mut max_res = BigFloat::zero();
    for rel in &rels.relations {
        let res = rel.eval_real(v, prec).abs();
        if res.cmp_value(&max_res) == std::cmp::Ordering::Greater {
            max_res = res;
        }
    }
    let ok = max_res.cmp_value(&tol) != std::cmp::Ordering::Greater;
    RelationCheck { ok, degenerate, max_residual: Some(max_res), tolerance: Some(tol) }
}

/// A rational subspace of R^n carried by a Z-basis of `B ∩ Z^n` in Hermite
/// form, its primitive Plücker vector, and its exact squared height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSubspace {
    n: usize,
    e: usize,
    zbasis: IntMatrix,
    plucker: PluckerVector,
    height_squared: BigInt,
}

impl RationalSubspace {
    /// Build from any rational basis: clears denominators column-wise,
    /// saturates to a Z-basis of the intersection with Z^n, and normalizes.
    pub fn from_rational_basis(m: &RatMatrix) -> Result<Self, GrassmannError> {
        Self::from_integer_basis(&m.clear_denominators_per_column())
    }

    pub fn from_integer_basis(m: &IntMatrix) -> Result<Self, GrassmannError> {
        let (n, e) = (m.rows(), m.cols());
        let r = rank(m);
        if r < e {
            return Err(GrassmannError::DependentColumns { rank: r, expect: e });
        }
        let zbasis = saturate_lattice(m).expect("rank checked above");
        Ok(Self::from_saturated_hnf(zbasis, n, e))
    }

    /// `zbasis` must be a saturated Z-basis in column Hermite form; the
    /// enumeration kernel produces such bases directly.
    pub(crate) fn from_saturated_hnf(zbasis: IntMatrix, n: usize, e: usize) -> Self {
        debug_assert_eq!((zbasis.rows(), zbasis.cols()), (n, e));
        let minors = maximal_minors(&zbasis);
        let plucker = PluckerVector::normalize(n, e, minors.clone());
        debug_assert_eq!(
            plucker.coords(),
            &minors[..],
            "a Hermite basis of a saturated lattice yields the primitive vector"
        );
        let height_squared: BigInt = plucker.norm_squared();
        debug_assert_eq!(height_squared, {
            // covolume identity (Cauchy-Binet)
            exact::det_bigint(&zbasis.transpose().mul(&zbasis))
        });
        RationalSubspace { n, e, zbasis, plucker, height_squared }
    }

    /// Coordinate subspace spanned by the given unit vectors (0-based rows).
    pub fn coordinate_subspace(n: usize, rows: &[usize]) -> Self {
        let e = rows.len();
        let mut m = IntMatrix::zeros(n, e);
        for (j, &r) in rows.iter().enumerate() {
            m[(r, j)] = BigInt::one();
        }
        Self::from_integer_basis(&m).expect("coordinate basis is independent")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.e
    }

    pub fn zbasis(&self) -> &IntMatrix {
        &self.zbasis
    }

    pub fn plucker(&self) -> &PluckerVector {
        &self.plucker
    }

    pub fn height_squared(&self) -> &BigInt {
        &self.height_squared
    }

    pub fn height(&self, prec: u32) -> BigFloat {
        BigFloat::from_bigint(self.height_squared.clone()).sqrt(prec)
    }

    pub fn canonical_equal(&self, other: &Self) -> bool {
        self.n == other.n && self.e == other.e && self.plucker == other.plucker
    }

    /// Exact dimension of the intersection with another rational subspace.
    pub fn intersection_dim(&self, other: &Self) -> usize {
        assert_eq!(self.n, other.n);
        self.e + other.e - rank(&self.zbasis.hstack(&other.zbasis))
    }

    pub fn is_contained_in(&self, other: &Self) -> bool {
        self.intersection_dim(other) == self.e
    }

    /// Image under a rational endomorphism, with the exact square of a
    /// certified constant `c(phi)` such that `H(phi(B)) <= c(phi) H(B)`.
    ///
    /// `c(phi)^2 = k^(2e) * sum over e-column-subsets J of prod_{j in J}
    /// |col_j(phi)|^2`, where `k` clears all denominators of `phi`. The sum
    /// bounds the squared operator norm of the e-th compound matrix
    /// (Hadamard on each compound column, then the Frobenius bound), so the
    /// inequality is rigorous; it is asserted in exact arithmetic.
    pub fn image(&self, phi: &RatMatrix) -> Result<(RationalSubspace, BigRational), GrassmannError> {
        if phi.rows() != self.n || phi.cols() != self.n {
            return Err(GrassmannError::Dimension(format!(
                "phi must be {0}x{0}, got {1}x{2}",
                self.n,
                phi.rows(),
                phi.cols()
            )));
        }
        let image = phi.mul(&self.zbasis.to_rational());
        let ints = image.clear_denominators_per_column();
        let r = rank(&ints);
        if r < self.e {
            return Err(GrassmannError::RankDrop { got: r, expect: self.e });
        }
        let out = Self::from_integer_basis(&ints)?;

        let mut k = BigInt::one();
        for i in 0..phi.rows() {
            for j in 0..phi.cols() {
                k = k.lcm(phi[(i, j)].denom());
            }
        }
        let col_sq: Vec<BigRational> = (0..phi.cols())
            .map(|j| (0..phi.rows()).map(|i| &phi[(i, j)] * &phi[(i, j)]).sum())
            .collect();
        let mut sum_products = BigRational::zero();
        for j_set in lambda(self.e, self.n) {
            let mut p = BigRational::one();
            for col in j_set.zero_based() {
                p *= &col_sq[col];
            }
            sum_products += p;
        }
        let c_squared = BigRational::from(k.pow(2 * self.e as u32)) * sum_products;

        let lhs = BigRational::from(out.height_squared.clone());
        let rhs = &c_squared * BigRational::from(self.height_squared.clone());
        assert!(lhs <= rhs, "certified height bound must hold");
        Ok((out, c_squared))
    }

    /// Orthogonal complement; its height equals this subspace's height.
    pub fn orthogonal_complement(&self) -> RationalSubspace {
        let w = exact::integer_kernel(&self.zbasis.transpose());
        Self::from_integer_basis(&w).expect("complement basis independent")
    }
}

/// Reconstruct a spanning basis from exact rational Plücker coordinates.
///
/// Uses the affine chart at a nonzero coordinate `I0`: for each `a in I0`
/// the vector `v_a = sum_m sign * p_{(I0 \ a) + m} e_m` lies in the
/// subspace and the family spans it. The output is validated by
/// re-embedding; inconsistent coordinates are rejected.
pub fn basis_from_plucker_rational(
    n: usize,
    r: usize,
    coords: &[BigRational],
) -> Result<RatMatrix, GrassmannError> {
    assert_eq!(coords.len(), binomial(n, r));
    let sets = lambda(r, n);
    let i0_pos = coords
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, _)| i)
        .next()
        .ok_or_else(|| GrassmannError::Invalid("zero Plücker vector".into()))?;
    let i0 = &sets[i0_pos];
    let mut cols = Vec::new();
    for &a in i0.elems() {
        let without = i0.remove(a);
        let mut col = vec![BigRational::zero(); n];
        for m in 1..=n {
            if without.contains(m) {
                continue;
            }
            let full = without.insert(m);
            let pos_m = without.elems().partition_point(|&y| y < m);
            let pos_a = without.elems().partition_point(|&y| y < a);
            let sign = if (pos_m + pos_a) % 2 == 0 { 1 } else { -1 };
            let c = &coords[full.lex_rank()];
            col[m - 1] = if sign > 0 { c.clone() } else { -c.clone() };
        }
        cols.push(col);
    }
    let m = RatMatrix::from_fn(n, r, |i, j| cols[j][i].clone());
    // validate: maximal minors of the reconstruction must be proportional
    // to the input coordinates
    let mins = exact::maximal_minors_rational(&m);
    let (k_ref, c_ref) = mins
        .iter()
        .zip(coords)
        .find(|(mv, _)| !mv.is_zero())
        .ok_or_else(|| GrassmannError::Invalid("reconstruction is rank deficient".into()))?;
    if c_ref.is_zero() {
        return Err(GrassmannError::Invalid("inconsistent chart".into()));
    }
    let scale = c_ref / k_ref;
    for (mv, cv) in mins.iter().zip(coords) {
        if &(mv * &scale) != cv {
            return Err(GrassmannError::Invalid(
                "coordinates do not satisfy the Plücker relations".into(),
            ));
        }
    }
    Ok(m)
}

#[derive(Serialize, Deserialize)]
struct SubspaceWire {
    n: usize,
    e: usize,
    zbasis: Vec<String>,
    plucker: Vec<String>,
    height_squared: String,
}

impl Serialize for RationalSubspace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut zb = Vec::with_capacity(self.n * self.e);
        for i in 0..self.n {
            for j in 0..self.e {
                zb.push(self.zbasis[(i, j)].to_string());
            }
        }
        SubspaceWire {
            n: self.n,
            e: self.e,
            zbasis: zb,
            plucker: self.plucker.coords.iter().map(|c| c.to_string()).collect(),
            height_squared: self.height_squared.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalSubspace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = SubspaceWire::deserialize(d)?;
        if w.zbasis.len() != w.n * w.e {
            return Err(D::Error::custom("zbasis length mismatch"));
        }
        let parse = |s: &String| s.parse::<BigInt>().map_err(|_| D::Error::custom("bad integer"));
        let mut data = Vec::with_capacity(w.zbasis.len());
        for s in &w.zbasis {
            data.push(parse(s)?);
        }
        let zb = IntMatrix::from_fn(w.n, w.e, |i, j| data[i * w.e + j].clone());
        let sub = RationalSubspace::from_integer_basis(&zb)
            .map_err(|e| D::Error::custom(e.to_string()))?;
        let plucker: Result<Vec<BigInt>, D::Error> = w.plucker.iter().map(parse).collect();
        if sub.plucker.coords() != plucker?.as_slice()
            || sub.height_squared.to_string() != w.height_squared
            || sub.zbasis != zb
        {
            return Err(D::Error::custom("non-canonical subspace serialization"));
        }
        Ok(sub)
    }
}
