use std::time::Instant;
use subspace_approx::enumeration::{pivot_sets, walk_chart, ChartLimits, RawSubspace};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let hmax: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(150.0);
    let cutoff = (hmax * hmax) as u128;
    let t0 = Instant::now();
    let limits = ChartLimits::new(u64::MAX);
    let mut count = 0u64;
    let mut hist = vec![0u64; 8];
    for piv in pivot_sets(4, 2) {
        walk_chart(4, 2, &piv, cutoff, &limits, &mut |raw: &RawSubspace<'_>| {
            count += 1;
            let h = (raw.height_sq as f64).sqrt();
            let b = (h.log2() as usize).min(7);
            hist[b] += 1;
        });
    }
    println!("hmax={hmax} count={count} in {:?} visited={}", t0.elapsed(), limits.visited());
    println!("hist by log2(H): {:?}", hist);
}
