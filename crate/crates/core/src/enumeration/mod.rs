//! Enumeration of rational subspaces by height, best-approximation
//! frontiers, exponent fits, and a reduction-assisted heuristic search.

mod chart;
mod lll;

pub use chart::{pivot_sets, walk_chart, ChartLimits, RawSubspace};
pub use lll::lll_reduce;

use crate::angles::{principal_angles, RealSubspace};
use crate::bigfloat::BigFloat;
use crate::exact::IntMatrix;
use crate::grassmann::RationalSubspace;
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnumerationError {
    #[error("work limit of {limit} candidates exceeded after visiting {visited}; partial results carried")]
    WorkLimit { limit: u64, visited: u64, partial: Vec<RationalSubspace> },
    #[error("frontier needs j <= min(dim A, e), got j={j}, dim A={d}, e={e}")]
    BadAngleIndex { j: usize, d: usize, e: usize },
    #[error("exponent fit needs at least 3 records, got {0}")]
    TooFewRecords(usize),
    #[error("angle computation failed: {0}")]
    Angle(#[from] crate::angles::AngleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    Exhaustive,
    Heuristic { effort: u32 },
}

/// A plan fully determines the candidate stream (spec: identical plan and
/// seed give identical output bytes).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumerationPlan {
    pub n: usize,
    pub e: usize,
    pub height_max: f64,
    pub strategy: Strategy,
    pub work_limit: u64,
    pub seed: u64,
}

impl EnumerationPlan {
    pub fn exhaustive(n: usize, e: usize, height_max: f64) -> Self {
        EnumerationPlan {
            n,
            e,
            height_max,
            strategy: Strategy::Exhaustive,
            work_limit: 100_000_000,
            seed: 0,
        }
    }

    /// Largest admissible exact squared height.
    pub fn cutoff_sq(&self) -> u128 {
        assert!(self.height_max >= 1.0, "height_max must be >= 1");
        let hs = self.height_max * self.height_max;
        let mut c = hs as u128;
        // counter float rounding near integers
        while (c + 1) as f64 <= hs {
            c += 1;
        }
        while c > 0 && c as f64 > hs {
            c -= 1;
        }
        c
    }
}

/// Enumerate every rational subspace with `H <= height_max` exactly once,
/// sorted by `(height^2, plucker)`.
pub fn enumerate(plan: &EnumerationPlan) -> Result<Vec<RationalSubspace>, EnumerationError> {
    let cutoff_sq = plan.cutoff_sq();
    let limits = ChartLimits::new(plan.work_limit);
    let tasks = split_tasks(plan.n, plan.e, cutoff_sq);
    let mut per_task: Vec<Vec<RationalSubspace>> = tasks
        .par_iter()
        .map(|(piv, a0)| {
            let mut local = Vec::new();
            chart::walk_chart_split(
                plan.n,
                plan.e,
                piv,
                Some(*a0),
                cutoff_sq,
                &limits,
                &mut |raw: &RawSubspace<'_>| {
                    local.push(raw_to_subspace(raw));
                },
            );
            local
        })
        .collect();
    let mut all: Vec<RationalSubspace> = per_task.drain(..).flatten().collect();
    all.sort_by(subspace_order);
    if limits.is_aborted() {
        return Err(EnumerationError::WorkLimit {
            limit: plan.work_limit,
            visited: limits.visited(),
            partial: all,
        });
    }
    Ok(all)
}

fn subspace_order(a: &RationalSubspace, b: &RationalSubspace) -> Ordering {
    a.height_squared()
        .cmp(b.height_squared())
        .then_with(|| a.plucker().coords().cmp(b.plucker().coords()))
}

fn raw_to_subspace(raw: &RawSubspace<'_>) -> RationalSubspace {
    let m = IntMatrix::from_fn(raw.n, raw.e, |i, j| BigInt::from(raw.entries[i * raw.e + j]));
    RationalSubspace::from_saturated_hnf(m, raw.n, raw.e)
}

fn split_tasks(n: usize, e: usize, cutoff_sq: u128) -> Vec<(Vec<usize>, i128)> {
    let a_max = chart::isqrt_u128(cutoff_sq) as i128;
    let mut tasks = Vec::new();
    for piv in pivot_sets(n, e) {
        for a0 in 1..=a_max {
            tasks.push((piv.clone(), a0));
        }
    }
    tasks
}

/// One best-approximation record: the approximant, its angle `psi_j` to the
/// target, and the height.
#[derive(Debug, Clone)]
pub struct ApproximationRecord {
    pub subspace: RationalSubspace,
    pub j: usize,
    pub psi: BigFloat,
}

impl ApproximationRecord {
    pub fn height_sq(&self) -> &BigInt {
        self.subspace.height_squared()
    }

    pub fn height_f64(&self) -> f64 {
        let h: f64 = self
            .subspace
            .height_squared()
            .to_string()
            .parse()
            .unwrap_or(f64::INFINITY);
        h.sqrt()
    }

    /// CSV row: `n,e,j,height_sq,psi_j(hex),plucker(space separated)`
    pub fn csv_row(&self) -> String {
        let plucker: Vec<String> =
            self.subspace.plucker().coords().iter().map(|c| c.to_string()).collect();
        format!(
            "{},{},{},{},{},{}",
            self.subspace.n(),
            self.subspace.dim(),
            self.j,
            self.subspace.height_squared(),
            self.psi.to_hex_string(),
            plucker.join(" ")
        )
    }
}

pub const RECORD_CSV_HEADER: &str = "n,e,j,height_sq,psi_j,plucker";

/// Outcome of a frontier scan.
#[derive(Debug)]
pub struct Frontier {
    pub records: Vec<ApproximationRecord>,
    /// True when built by the exhaustive strategy: every record is the true
    /// best at its height. Heuristic scans yield a lower-bound frontier.
    pub complete: bool,
    pub subspaces_seen: u64,
}

/// f64 sine of the j-th canonical angle (ascending), from an integer basis.
/// Fast filter only; records are re-evaluated at full precision.
fn psi_j_f64(qa: &[Vec<f64>], entries: &[i128], n: usize, e: usize, j: usize) -> f64 {
    // orthonormalize the basis columns (tiny e)
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(e);
    for col in 0..e {
        let mut v: Vec<f64> = (0..n).map(|i| entries[i * e + col] as f64).collect();
        for _ in 0..2 {
            for b in &q {
                let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let nn: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nn < 1e-280 {
            return f64::NAN;
        }
        for x in v.iter_mut() {
            *x /= nn;
        }
        q.push(v);
    }
    let d = qa.len();
    // m[a][b] = qa_a . q_b
    let mut m = vec![0f64; d * e];
    for (a, qa_a) in qa.iter().enumerate() {
        for (b, qb) in q.iter().enumerate() {
            m[a * e + b] = qa_a.iter().zip(qb).map(|(x, y)| x * y).sum();
        }
    }
    // g = m^T m (e x e symmetric), eigenvalues are cos^2 of the angles
    let mut g = vec![0f64; e * e];
    for a in 0..e {
        for b in 0..e {
            let mut s = 0.0;
            for k in 0..d {
                s += m[k * e + a] * m[k * e + b];
            }
            g[a * e + b] = s;
        }
    }
    let mut lam = sym_eigenvalues(&mut g, e);
    lam.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let t = d.min(e);
    debug_assert!(j >= 1 && j <= t);
    let c2 = lam[j - 1].clamp(0.0, 1.0);
    (1.0 - c2).max(0.0).sqrt()
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi (in place).
fn sym_eigenvalues(g: &mut [f64], e: usize) -> Vec<f64> {
    for _ in 0..12 {
        let mut off = 0.0;
        for p in 0..e {
            for q in p + 1..e {
                off += g[p * e + q].abs();
            }
        }
        if off < 1e-15 {
            break;
        }
        for p in 0..e {
            for q in p + 1..e {
                let apq = g[p * e + q];
                if apq.abs() < 1e-18 {
                    continue;
                }
                let theta = (g[q * e + q] - g[p * e + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..e {
                    let gkp = g[k * e + p];
                    let gkq = g[k * e + q];
                    g[k * e + p] = c * gkp - s * gkq;
                    g[k * e + q] = s * gkp + c * gkq;
                }
                for k in 0..e {
                    let gpk = g[p * e + k];
                    let gqk = g[q * e + k];
                    g[p * e + k] = c * gpk - s * gqk;
                    g[q * e + k] = s * gpk + c * gqk;
                }
            }
        }
    }
    (0..e).map(|i| g[i * e + i]).collect()
}

/// Best-approximation frontier of a target subspace: scans the plan's
/// candidate stream in `(height^2, plucker)` order and keeps the records
/// where `psi_j` strictly improves. Heights strictly increase and sines
/// strictly decrease along the result.
pub fn frontier(
    target: &RealSubspace,
    j: usize,
    plan: &EnumerationPlan,
) -> Result<Frontier, EnumerationError> {
    let (d, e) = (target.dim(), plan.e);
    if j < 1 || j > d.min(e) {
        return Err(EnumerationError::BadAngleIndex { j, d, e });
    }
    match plan.strategy {
        Strategy::Exhaustive => frontier_exhaustive(target, j, plan),
        Strategy::Heuristic { effort } => {
            let candidates = heuristic_search(target, plan.e, j, effort)?;
            let mut records = Vec::new();
            let mut best: Option<BigFloat> = None;
            for rec in candidates {
                let improves = match &best {
                    None => true,
                    Some(b) => rec.psi.cmp_value(b) == Ordering::Less,
                };
                if improves {
                    best = Some(rec.psi.clone());
                    replace_or_push(&mut records, rec);
                }
            }
            let seen = records.len() as u64;
            Ok(Frontier { records, complete: false, subspaces_seen: seen })
        }
    }
}

fn replace_or_push(records: &mut Vec<ApproximationRecord>, rec: ApproximationRecord) {
    if let Some(last) = records.last() {
        if last.height_sq() == rec.height_sq() {
            *records.last_mut().unwrap() = rec;
            return;
        }
    }
    records.push(rec);
}

fn frontier_exhaustive(
    target: &RealSubspace,
    j: usize,
    plan: &EnumerationPlan,
) -> Result<Frontier, EnumerationError> {
    let n = plan.n;
    let e = plan.e;
    let cutoff_sq = plan.cutoff_sq();
    let qa: Vec<Vec<f64>> = target
        .onb()
        .iter()
        .map(|col| col.iter().map(|x| x.to_f64()).collect())
        .collect();
    let tasks = split_tasks(n, e, cutoff_sq);

    // Pass 1: best f64 angle per exact squared height.
    let limits = ChartLimits::new(plan.work_limit);
    let partials: Vec<(HashMap<u128, f64>, u64)> = tasks
        .par_iter()
        .map(|(piv, a0)| {
            let mut best: HashMap<u128, f64> = HashMap::new();
            let mut count = 0u64;
            chart::walk_chart_split(n, e, piv, Some(*a0), cutoff_sq, &limits, &mut |raw| {
                count += 1;
                let psi = psi_j_f64(&qa, raw.entries, n, e, j);
                if psi.is_nan() {
                    return;
                }
                best.entry(raw.height_sq)
                    .and_modify(|b| {
                        if psi < *b {
                            *b = psi;
                        }
                    })
                    .or_insert(psi);
            });
            (best, count)
        })
        .collect();
    if limits.is_aborted() {
        return Err(EnumerationError::WorkLimit {
            limit: plan.work_limit,
            visited: limits.visited(),
            partial: Vec::new(),
        });
    }
    let mut best_at: HashMap<u128, f64> = HashMap::new();
    let mut seen = 0u64;
    for (m, c) in partials {
        seen += c;
        for (h, p) in m {
            best_at
                .entry(h)
                .and_modify(|b| {
                    if p < *b {
                        *b = p;
                    }
                })
                .or_insert(p);
        }
    }
    let mut heights: Vec<u128> = best_at.keys().copied().collect();
    heights.sort_unstable();
    // running prefix minimum (inclusive) per height
    let mut prefix: HashMap<u128, f64> = HashMap::new();
    let mut run = f64::INFINITY;
    for &h in &heights {
        run = run.min(best_at[&h]);
        prefix.insert(h, run);
    }

    // Pass 2: collect candidates within slack of the inclusive prefix min.
    let limits2 = ChartLimits::new(plan.work_limit);
    let slack = 1.0 + 1e-9;
    let mut per_task: Vec<Vec<RationalSubspace>> = tasks
        .par_iter()
        .map(|(piv, a0)| {
            let mut local = Vec::new();
            chart::walk_chart_split(n, e, piv, Some(*a0), cutoff_sq, &limits2, &mut |raw| {
                let psi = psi_j_f64(&qa, raw.entries, n, e, j);
                if psi.is_nan() {
                    return;
                }
                let bound = prefix[&raw.height_sq];
                if psi <= bound * slack + 1e-300 {
                    local.push(raw_to_subspace(raw));
                }
            });
            local
        })
        .collect();
    let mut candidates: Vec<RationalSubspace> = per_task.drain(..).flatten().collect();
    candidates.sort_by(subspace_order);

    // Exact fold at full precision over the small candidate set.
    let mut records: Vec<ApproximationRecord> = Vec::new();
    let mut best: Option<BigFloat> = None;
    for sub in candidates {
        let prof = principal_angles(target, &RealSubspace::from_rational_subspace(&sub, target.prec()))?;
        let psi = prof.psi(j).clone();
        let improves = match &best {
            None => true,
            Some(b) => psi.cmp_value(b) == Ordering::Less,
        };
        if improves {
            best = Some(psi.clone());
            replace_or_push(&mut records, ApproximationRecord { subspace: sub, j, psi });
        }
    }
    Ok(Frontier { records, complete: true, subspaces_seen: seen })
}

/// Least-squares exponent fit over a frontier: slope of `-log psi_j` against
/// `log H`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub records_used: usize,
    pub residual_rms: f64,
    pub log2_height_range: (f64, f64),
    /// min over records of `psi_j * H^slope` (reported in log2).
    pub log2_min_product: f64,
}

pub fn fit_exponent(records: &[ApproximationRecord]) -> Result<ExponentFit, EnumerationError> {
    fit_exponent_points(
        &records
            .iter()
            .map(|r| {
                let h2: f64 = BigFloat::from_bigint(r.height_sq().clone()).log2_f64();
                (h2 / 2.0, r.psi.log2_f64())
            })
            .collect::<Vec<_>>(),
    )
}

/// Fit from `(log2 H, log2 psi)` pairs.
pub fn fit_exponent_points(pts: &[(f64, f64)]) -> Result<ExponentFit, EnumerationError> {
    if pts.len() < 3 {
        return Err(EnumerationError::TooFewRecords(pts.len()));
    }
    let m = pts.len() as f64;
    let mx: f64 = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my: f64 = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in pts {
        cov += (x - mx) * (y - my);
        var += (x - mx) * (x - mx);
    }
    let slope_log = cov / var; // log psi ~ slope_log * log H
    let beta = -slope_log;
    let mut ss = 0.0;
    let mut min_prod = f64::INFINITY;
    for (x, y) in pts {
        let r = y - (my + slope_log * (x - mx));
        ss += r * r;
        min_prod = min_prod.min(y + beta * x);
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(ExponentFit {
        slope: beta,
        records_used: pts.len(),
        residual_rms: (ss / m).sqrt(),
        log2_height_range: (lo, hi),
        log2_min_product: min_prod,
    })
}

/// Reduction-assisted heuristic search for good approximants; sound but not
/// complete. Always includes the coordinate subspaces; at positive effort,
/// short integer vectors near the target are harvested from LLL-reduced
/// penalty lattices and combined into candidate bases. Output is sorted by
/// `(height^2, plucker)`, has exact angles attached, and never contains a
/// duplicate.
pub fn heuristic_search(
    target: &RealSubspace,
    e: usize,
    j: usize,
    effort: u32,
) -> Result<Vec<ApproximationRecord>, EnumerationError> {
    let n = target.n();
    if j < 1 || j > target.dim().min(e) {
        return Err(EnumerationError::BadAngleIndex { j, d: target.dim(), e });
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut subs: Vec<RationalSubspace> = Vec::new();
    let mut push = |s: RationalSubspace, seen: &mut std::collections::BTreeSet<Vec<BigInt>>| {
        if seen.insert(s.plucker().coords().to_vec()) {
            subs.push(s);
        }
    };
    // coordinate subspaces
    for rows in crate::exact::lambda(e, n) {
        let idx: Vec<usize> = rows.zero_based().collect();
        push(RationalSubspace::coordinate_subspace(n, &idx), &mut seen);
    }
    if effort > 0 {
        // penalty lattices: rows (v, round(2^g * P_perp v)) for v = e_i
        let wp = target.prec() + 64;
        for step in 1..=effort {
            let g = 6 + 6 * step as i64;
            let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n);
            for i in 0..n {
                let mut x = vec![BigFloat::zero(); n];
                x[i] = BigFloat::one();
                let p = target.project(&x);
                let mut row = vec![BigInt::from(0); 2 * n];
                row[i] = BigInt::from(1);
                for k in 0..n {
                    // perpendicular part, scaled
                    let perp = x[k].sub(&p[k], wp).scale2(g);
                    row[n + k] = perp.floor_bigint();
                }
                rows.push(row);
            }
            lll_reduce(&mut rows);
            let vs: Vec<Vec<BigInt>> =
                rows.iter().map(|r| r[..n].to_vec()).collect();
            // candidate bases: e-subsets of the reduced vectors and small
            // two-vector combinations
            let mut pool: Vec<Vec<BigInt>> = vs.clone();
            for a in 0..vs.len().min(4) {
                for b in a + 1..vs.len().min(4) {
                    let sum: Vec<BigInt> = vs[a].iter().zip(&vs[b]).map(|(x, y)| x + y).collect();
                    let diff: Vec<BigInt> = vs[a].iter().zip(&vs[b]).map(|(x, y)| x - y).collect();
                    pool.push(sum);
                    pool.push(diff);
                }
            }
            for combo in crate::exact::lambda(e, pool.len()) {
                let cols: Vec<usize> = combo.zero_based().collect();
                let m = IntMatrix::from_fn(n, e, |r, c| pool[cols[c]][r].clone());
                if crate::exact::rank(&m) < e {
                    continue;
                }
                push(RationalSubspace::from_integer_basis(&m).unwrap(), &mut seen);
            }
        }
    }
    subs.sort_by(subspace_order);
    let mut out = Vec::with_capacity(subs.len());
    for sub in subs {
        let prof =
            principal_angles(target, &RealSubspace::from_rational_subspace(&sub, target.prec()))?;
        let psi = prof.psi(j).clone();
        out.push(ApproximationRecord { subspace: sub, j, psi });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn enumerate_lines_in_plane() {
        let plan = EnumerationPlan::exhaustive(2, 1, 1.0);
        let lines = enumerate(&plan).unwrap();
        assert_eq!(lines.len(), 2);

        let plan = EnumerationPlan::exhaustive(2, 1, 2.3);
        let lines = enumerate(&plan).unwrap();
        let hs: Vec<u64> = lines
            .iter()
            .map(|s| u64::try_from(s.height_squared()).unwrap())
            .collect();
        assert_eq!(hs, vec![1, 1, 2, 2, 5, 5, 5, 5]);
    }

    #[test]
    fn enumerate_coordinate_planes_r4() {
        let plan = EnumerationPlan::exhaustive(4, 2, 1.0);
        let planes = enumerate(&plan).unwrap();
        assert_eq!(planes.len(), 6);
    }

    #[test]
    fn count_monotone_in_height() {
        let mut last = 0;
        for hmax in [1.0f64, 2.0, 3.0, 4.0, 5.0] {
            let plan = EnumerationPlan::exhaustive(3, 2, hmax);
            let c = enumerate(&plan).unwrap().len();
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn work_limit_carries_partial() {
        let mut plan = EnumerationPlan::exhaustive(4, 2, 40.0);
        plan.work_limit = 50;
        match enumerate(&plan) {
            Err(EnumerationError::WorkLimit { visited, .. }) => assert!(visited >= 50),
            other => panic!("expected work-limit error, got {:?}", other.map(|v| v.len())),
        }
    }

    #[test]
    fn fit_synthetic_slope() {
        // psi = H^-2 exactly
        let pts: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64, -2.0 * k as f64)).collect();
        let fit = fit_exponent_points(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
        assert!(fit_exponent_points(&pts[..2]).is_err());
    }

    #[test]
    fn frontier_of_rational_target_hits_zero() {
        // target is itself rational and low: the frontier reaches psi_j ~ 0
        // and stops improving afterwards. With j = e the zero is reached
        // exactly at the target.
        let m = IntMatrix::from_i64_rows(&[vec![1, 0], vec![0, 1], vec![1, 1], vec![0, 0]]);
        let b = RationalSubspace::from_integer_basis(&m).unwrap();
        let a = RealSubspace::from_rational_subspace(&b, 128);
        let plan = EnumerationPlan::exhaustive(4, 2, 4.0);

        let f2 = frontier(&a, 2, &plan).unwrap();
        assert!(f2.complete);
        let last = f2.records.last().unwrap();
        assert!(last.subspace.canonical_equal(&b));
        assert!(last.psi.is_zero() || last.psi.log2_floor() < -100);

        // with j = 1 the zero is reached no later than the target's height
        // (any plane sharing a direction with the target realizes it)
        let f1 = frontier(&a, 1, &plan).unwrap();
        let last1 = f1.records.last().unwrap();
        assert!(last1.psi.is_zero() || last1.psi.log2_floor() < -100);
        assert!(last1.height_sq() <= b.height_squared());
        // strictly increasing heights, strictly decreasing psi
        for f in [&f1, &f2] {
            for w in f.records.windows(2) {
                assert!(w[0].height_sq() < w[1].height_sq());
                assert!(w[1].psi.cmp_value(&w[0].psi) == Ordering::Less);
            }
        }
    }

    #[test]
    fn heuristic_effort_zero_is_coordinates() {
        let mut rng = StdRng::seed_from_u64(5);
        let a = RealSubspace::random(4, 2, &mut rng, 128);
        let recs = heuristic_search(&a, 2, 1, 0).unwrap();
        assert_eq!(recs.len(), 6);
        for r in &recs {
            assert_eq!(r.subspace.height_squared(), &BigInt::from(1));
        }
    }

    #[test]
    fn heuristic_no_duplicates() {
        let mut rng = StdRng::seed_from_u64(6);
        let a = RealSubspace::random(4, 2, &mut rng, 128);
        let recs = heuristic_search(&a, 2, 1, 3).unwrap();
        let mut keys: Vec<_> = recs.iter().map(|r| r.subspace.plucker().coords().to_vec()).collect();
        let total = keys.len();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), total);
    }
}
