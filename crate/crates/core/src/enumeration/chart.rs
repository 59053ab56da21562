//! Exhaustive enumeration of rational subspaces by height.
//!
//! Every e-dimensional rational subspace of Q^n has exactly one saturated
//! Z-basis in column Hermite form. The enumeration walks these Hermite
//! charts: one DFS per pivot-row set, assigning pivot rows first, then free
//! rows top to bottom with the cells of a row right to left. Each cell is
//! bounded through maximal minors that are linear in it once the earlier
//! cells are fixed (for the leftmost cell of a row, every minor completed by
//! the row is such a constraint and the intervals are intersected). The sum
//! of squared completed minors prunes against the height budget, and minor
//! values are cached so a leaf emits its full lexicographic minor vector
//! without recomputation. Each subspace is visited exactly once.

use crate::exact::lambda;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

/// A candidate emitted by the chart walk. Matrix entries are row-major n x e.
pub struct RawSubspace<'a> {
    pub n: usize,
    pub e: usize,
    pub entries: &'a [i128],
    /// Maximal minors in lexicographic row-set order; gcd 1, leading nonzero
    /// positive.
    pub minors: &'a [i128],
    pub height_sq: u128,
}

pub struct ChartLimits {
    pub work_limit: u64,
    pub counter: AtomicU64,
    pub aborted: AtomicBool,
}

impl ChartLimits {
    pub fn new(work_limit: u64) -> Self {
        ChartLimits { work_limit, counter: AtomicU64::new(0), aborted: AtomicBool::new(false) }
    }

    fn flush(&self, amount: u64) -> bool {
        if self.aborted.load(Ordering::Relaxed) {
            return false;
        }
        let prev = self.counter.fetch_add(amount, Ordering::Relaxed);
        if prev + amount > self.work_limit {
            self.aborted.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }

    pub fn is_aborted(&self) -> bool {
        self.aborted.load(Ordering::Relaxed)
    }

    pub fn visited(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }
}

/// All pivot-row sets (0-based, ascending) for the (n, e) Grassmannian.
pub fn pivot_sets(n: usize, e: usize) -> Vec<Vec<usize>> {
    lambda(e, n).iter().map(|s| s.zero_based().collect()).collect()
}

const MAX_E: usize = 6;
const FLUSH_EVERY: u64 = 8192;

/// One maximal minor completed when a given free row is assigned.
struct CompletionSet {
    rows: Vec<usize>,
    lex_rank: usize,
}

struct RowPlan {
    row: usize,
    /// live columns, rightmost first
    live: Vec<usize>,
    /// per non-final cell position: the rows of the pivot minor used for its
    /// interval bound
    cell_rows: Vec<Vec<usize>>,
    completions: Vec<CompletionSet>,
}

struct Walk<'a, F> {
    e: usize,
    cutoff_sq: u128,
    limits: &'a ChartLimits,
    visit: &'a mut F,
    raw_n: usize,
    entries: Vec<i128>,
    minor_vals: Vec<i128>,
    rows_plan: Vec<RowPlan>,
    pivot_rank: usize,
    budget: u128,
    local_count: u64,
    dead: bool,
}

/// Linear form of a completion minor in the final cell of a row.
#[derive(Clone, Copy, Default)]
struct Constraint {
    coef: i128,
    offset: i128,
    lex_rank: usize,
}

const MAX_CONS: usize = 64;

#[inline]
fn small_det(m: &[i128], e: usize) -> i128 {
    match e {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => det_general(m, e),
    }
}

fn det_general(m: &[i128], e: usize) -> i128 {
    let mut acc: i128 = 0;
    let sub_e = e - 1;
    let mut sub = [0i128; MAX_E * MAX_E];
    for j in 0..e {
        if m[j] == 0 {
            continue;
        }
        let mut k = 0;
        for r in 1..e {
            for c in 0..e {
                if c == j {
                    continue;
                }
                sub[k] = m[r * e + c];
                k += 1;
            }
        }
        let term = m[j] * small_det(&sub[..sub_e * sub_e], sub_e);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

impl<'a, F: FnMut(&RawSubspace<'_>)> Walk<'a, F> {
    #[inline]
    fn det_rows(&self, rows: &[usize]) -> i128 {
        let e = self.e;
        let mut buf = [0i128; MAX_E * MAX_E];
        let mut k = 0;
        for &r in rows {
            buf[k..k + e].copy_from_slice(&self.entries[r * e..r * e + e]);
            k += e;
        }
        small_det(&buf[..k], e)
    }

    #[inline]
    fn tick(&mut self, amount: u64) {
        self.local_count += amount;
        if self.local_count >= FLUSH_EVERY {
            if !self.limits.flush(self.local_count) {
                self.dead = true;
            }
            self.local_count = 0;
        }
    }

    fn pivot_stage(&mut self, pivots: &[usize], j: usize, prod: u128) {
        if self.dead {
            return;
        }
        if j == self.e {
            self.reduced_stage(pivots, 1, 0);
            return;
        }
        let mut a: u128 = 1;
        loop {
            let p = prod * a;
            if p * p > self.cutoff_sq {
                break;
            }
            self.entries[pivots[j] * self.e + j] = a as i128;
            self.pivot_stage(pivots, j + 1, p);
            if self.dead {
                return;
            }
            a += 1;
        }
    }

    fn reduced_stage(&mut self, pivots: &[usize], j: usize, k: usize) {
        if self.dead {
            return;
        }
        if j == self.e {
            let d = self.det_rows(pivots);
            self.minor_vals[self.pivot_rank] = d;
            self.budget = d.unsigned_abs().pow(2);
            debug_assert!(self.budget <= self.cutoff_sq);
            self.free_stage(0);
            return;
        }
        if k == j {
            self.reduced_stage(pivots, j + 1, 0);
            return;
        }
        let a_j = self.entries[pivots[j] * self.e + j];
        for b in 0..a_j {
            self.entries[pivots[j] * self.e + k] = b;
            self.reduced_stage(pivots, j, k + 1);
            if self.dead {
                return;
            }
        }
        self.entries[pivots[j] * self.e + k] = 0;
    }

    fn free_stage(&mut self, row_idx: usize) {
        if row_idx == self.rows_plan.len() {
            self.leaf();
            return;
        }
        if self.rows_plan[row_idx].live.is_empty() {
            // the row is identically zero: every completed minor vanishes
            let m = std::mem::take(&mut self.rows_plan);
            for c in &m[row_idx].completions {
                self.minor_vals[c.lex_rank] = 0;
            }
            self.rows_plan = m;
            self.free_stage(row_idx + 1);
            return;
        }
        self.cell_stage(row_idx, 0);
    }

    fn cell_stage(&mut self, row_idx: usize, pos: usize) {
        if self.dead {
            return;
        }
        let plan = &self.rows_plan[row_idx];
        let row = plan.row;
        let last = pos == plan.live.len() - 1;
        let j = plan.live[pos];
        let cell = row * self.e + j;
        if !last {
            // interval via the pivot minor linear in this cell
            let len = plan.cell_rows[pos].len();
            let mut rows = [0usize; MAX_E];
            rows[..len].copy_from_slice(&plan.cell_rows[pos]);
            let rows = &rows[..len];
            self.entries[cell] = 0;
            let t = self.det_rows(rows);
            self.entries[cell] = 1;
            let c = self.det_rows(rows) - t;
            debug_assert!(c != 0);
            let b_rem = isqrt_u128(self.cutoff_sq - self.budget) as i128;
            let (lo, hi) = interval(c, t, b_rem);
            if lo > hi {
                self.entries[cell] = 0;
                return;
            }
            self.tick((hi - lo + 1) as u64);
            for x in lo..=hi {
                self.entries[cell] = x;
                self.cell_stage(row_idx, pos + 1);
                if self.dead {
                    break;
                }
            }
            self.entries[cell] = 0;
            return;
        }
        // final cell of the row: every completion minor is linear in it;
        // intersect all their intervals, then complete the row
        let b_rem = isqrt_u128(self.cutoff_sq - self.budget) as i128;
        let mut lo = i128::MIN;
        let mut hi = i128::MAX;
        // (coef, offset, lex_rank) per completion minor
        let plans = std::mem::take(&mut self.rows_plan);
        self.cons.clear();
        {
            let plan = &plans[row_idx];
            for comp in &plan.completions {
                self.entries[cell] = 0;
                let t = self.det_rows(&comp.rows);
                self.entries[cell] = 1;
                let c = self.det_rows(&comp.rows) - t;
                self.cons.push((c, t, comp.lex_rank));
                if c == 0 {
                    if t.unsigned_abs() as i128 > b_rem {
                        // fixed minor already violates the budget
                        self.entries[cell] = 0;
                        self.rows_plan = plans;
                        return;
                    }
                } else {
                    let (l, h) = interval(c, t, b_rem);
                    lo = lo.max(l);
                    hi = hi.min(h);
                }
            }
        }
        self.rows_plan = plans;
        if lo > hi {
            self.entries[cell] = 0;
            return;
        }
        debug_assert!(lo > i128::MIN && hi < i128::MAX, "at least one linear constraint");
        self.tick((hi - lo + 1) as u64);
        let saved_budget = self.budget;
        let cons = std::mem::take(&mut self.cons);
        'outer: for x in lo..=hi {
            self.entries[cell] = x;
            // accumulate the completed minors
            let mut add: u128 = 0;
            for &(c, t, rank) in &cons {
                let v = c * x + t;
                add += v.unsigned_abs().pow(2);
                if saved_budget + add > self.cutoff_sq {
                    // restore what we wrote and move on
                    continue 'outer;
                }
                self.minor_vals[rank] = v;
            }
            self.budget = saved_budget + add;
            self.free_stage(row_idx + 1);
            self.budget = saved_budget;
            if self.dead {
                break;
            }
        }
        self.cons = cons;
        self.entries[cell] = 0;
    }

    fn leaf(&mut self) {
        self.tick(1);
        let mut g: u128 = 0;
        for v in &self.minor_vals {
            g = gcd_u128(g, v.unsigned_abs());
            if g == 1 {
                break;
            }
        }
        if g != 1 {
            return; // non-saturated basis; its span appears in its own chart
        }
        debug_assert!(
            self.minor_vals.iter().find(|&&d| d != 0).map(|&d| d > 0).unwrap_or(false),
            "Hermite chart leading minor must be positive"
        );
        debug_assert_eq!(
            self.budget,
            self.minor_vals.iter().map(|d| d.unsigned_abs().pow(2)).sum::<u128>()
        );
        let raw = RawSubspace {
            n: self.raw_n,
            e: self.e,
            entries: &self.entries,
            minors: &self.minor_vals,
            height_sq: self.budget,
        };
        (self.visit)(&raw);
    }
}

#[inline]
fn interval(c: i128, t: i128, b: i128) -> (i128, i128) {
    if c > 0 {
        (div_ceil_i128(-b - t, c), div_floor_i128(b - t, c))
    } else {
        (div_ceil_i128(b - t, c), div_floor_i128(-b - t, c))
    }
}

#[inline]
fn div_floor_i128(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

#[inline]
fn div_ceil_i128(a: i128, b: i128) -> i128 {
    -div_floor_i128(-a, b)
}

#[inline]
fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn isqrt_u128(v: u128) -> u128 {
    if v == 0 {
        return 0;
    }
    let mut x = (v as f64).sqrt() as u128;
    while x > 0 && x * x > v {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= v {
        x += 1;
    }
    x
}

/// Walk one Hermite chart, invoking `visit` for every saturated basis with
/// `height^2 <= cutoff_sq`.
pub fn walk_chart<F: FnMut(&RawSubspace<'_>)>(
    n: usize,
    e: usize,
    pivots: &[usize],
    cutoff_sq: u128,
    limits: &ChartLimits,
    visit: &mut F,
) {
    walk_chart_split(n, e, pivots, None, cutoff_sq, limits, visit)
}

/// Chart walk restricted to a fixed first pivot value, used to split a
/// chart into independent parallel tasks.
pub fn walk_chart_split<F: FnMut(&RawSubspace<'_>)>(
    n: usize,
    e: usize,
    pivots: &[usize],
    a0: Option<i128>,
    cutoff_sq: u128,
    limits: &ChartLimits,
    visit: &mut F,
) {
    assert!(e >= 1 && e <= MAX_E && e <= n);
    let lex = lambda(e, n);
    let rank_of = |rows: &[usize]| -> usize {
        lex.iter()
            .position(|s| s.zero_based().eq(rows.iter().copied()))
            .expect("row set present")
    };
    let free_rows: Vec<usize> = (0..n).filter(|r| !pivots.contains(r)).collect();
    let mut assigned: Vec<usize> = pivots.to_vec();
    let mut rows_plan = Vec::with_capacity(free_rows.len());
    for &row in &free_rows {
        let live: Vec<usize> = (0..e).rev().filter(|&j| pivots[j] < row).collect();
        let mut cell_rows = Vec::new();
        for (pos, &j) in live.iter().enumerate() {
            if pos + 1 == live.len() {
                break; // final cell handled through the completions
            }
            let mut rows: Vec<usize> = pivots
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &r)| r)
                .collect();
            rows.push(row);
            rows.sort_unstable();
            cell_rows.push(rows);
        }
        // all e-subsets of assigned+row containing row
        let mut completions = Vec::new();
        for lower in lambda(e - 1, assigned.len()) {
            let mut rows: Vec<usize> = lower.zero_based().map(|i| assigned[i]).collect();
            rows.push(row);
            rows.sort_unstable();
            let lex_rank = rank_of(&rows);
            completions.push(CompletionSet { rows, lex_rank });
        }
        rows_plan.push(RowPlan { row, live, cell_rows, completions });
        assigned.push(row);
    }
    let pivot_rank = rank_of(pivots);

    let mut walk = Walk {
        e,
        cutoff_sq,
        limits,
        visit,
        raw_n: n,
        entries: vec![0i128; n * e],
        minor_vals: vec![0i128; lex.len()],
        rows_plan,
        pivot_rank,
        budget: 0,
        local_count: 0,
        dead: limits.is_aborted(),
        cons: Vec::with_capacity(32),
    };
    match a0 {
        None => walk.pivot_stage(pivots, 0, 1),
        Some(a) => {
            let au = a as u128;
            if au * au <= cutoff_sq {
                walk.entries[pivots[0] * e] = a;
                walk.pivot_stage(pivots, 1, au);
            }
        }
    }
    if walk.local_count > 0 {
        walk.limits.flush(walk.local_count);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn enumerate_all(n: usize, e: usize, cutoff_sq: u128) -> Vec<(u128, Vec<i128>)> {
        let limits = ChartLimits::new(u64::MAX);
        let mut out = Vec::new();
        for piv in pivot_sets(n, e) {
            walk_chart(n, e, &piv, cutoff_sq, &limits, &mut |raw: &RawSubspace<'_>| {
                out.push((raw.height_sq, raw.minors.to_vec()));
            });
        }
        out.sort();
        out
    }

    #[test]
    fn lines_in_plane() {
        let got = enumerate_all(2, 1, 1);
        assert_eq!(got.len(), 2);
        let got = enumerate_all(2, 1, 5);
        let hs: Vec<u128> = got.iter().map(|(h, _)| *h).collect();
        assert_eq!(hs, vec![1, 1, 2, 2, 5, 5, 5, 5]);
    }

    /// Brute-force oracle: reduce every small integer basis through the
    /// library constructor and compare the resulting subspace sets.
    fn brute_force(n: usize, e: usize, entry_bound: i64, cutoff_sq: u128) -> HashSet<Vec<i128>> {
        use crate::exact::IntMatrix;
        use crate::grassmann::RationalSubspace;
        use num_bigint::BigInt;
        let vals: Vec<i64> = (-entry_bound..=entry_bound).collect();
        let cells = n * e;
        let mut idx = vec![0usize; cells];
        let mut out = HashSet::new();
        loop {
            let m = IntMatrix::from_fn(n, e, |i, j| BigInt::from(vals[idx[i * e + j]]));
            if crate::exact::rank(&m) == e {
                let s = RationalSubspace::from_integer_basis(&m).unwrap();
                if u128::try_from(s.height_squared()).unwrap() <= cutoff_sq {
                    out.insert(
                        s.plucker().coords().iter().map(|c| i128::try_from(c).unwrap()).collect(),
                    );
                }
            }
            let mut pos = 0;
            loop {
                if pos == cells {
                    return out;
                }
                idx[pos] += 1;
                if idx[pos] < vals.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn no_duplicates_and_complete_gr24() {
        let cutoff_sq = 30u128;
        let got = enumerate_all(4, 2, cutoff_sq);
        let keys: HashSet<Vec<i128>> = got.iter().map(|(_, m)| m.clone()).collect();
        assert_eq!(keys.len(), got.len(), "no duplicate subspaces");
        let expect = brute_force(4, 2, 2, cutoff_sq);
        for k in &expect {
            assert!(keys.contains(k), "missing {:?}", k);
        }
        assert_eq!(got.iter().filter(|(h, _)| *h == 1).count(), 6);
    }

    #[test]
    fn no_duplicates_and_complete_gr23_gr13() {
        for (n, e, bound, cutoff) in [(3usize, 2usize, 3i64, 40u128), (3, 1, 4, 16)] {
            let got = enumerate_all(n, e, cutoff);
            let keys: HashSet<Vec<i128>> = got.iter().map(|(_, m)| m.clone()).collect();
            assert_eq!(keys.len(), got.len());
            let expect = brute_force(n, e, bound, cutoff);
            for k in &expect {
                assert!(keys.contains(k), "missing {:?} in ({n},{e})", k);
            }
        }
    }

    #[test]
    fn complete_gr35_small() {
        // 3-dimensional subspaces of Q^5 at small height against brute force
        // with entries in {-1, 0, 1}
        let cutoff_sq = 6u128;
        let got = enumerate_all(5, 3, cutoff_sq);
        let keys: HashSet<Vec<i128>> = got.iter().map(|(_, m)| m.clone()).collect();
        assert_eq!(keys.len(), got.len());
        let expect = brute_force(5, 3, 1, cutoff_sq);
        for k in &expect {
            assert!(keys.contains(k), "missing {:?}", k);
        }
    }

    #[test]
    fn work_limit_aborts() {
        let limits = ChartLimits::new(10);
        let mut count = 0usize;
        for piv in pivot_sets(4, 2) {
            walk_chart(4, 2, &piv, 22500, &limits, &mut |_: &RawSubspace<'_>| {
                count += 1;
            });
        }
        assert!(limits.is_aborted());
    }

    #[test]
    fn coordinate_planes_only_at_height_one() {
        let got = enumerate_all(4, 2, 1);
        assert_eq!(got.len(), 6);
        for (h, _) in &got {
            assert_eq!(*h, 1);
        }
    }
}
