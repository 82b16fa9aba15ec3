use ricochet::kinematics::Tolerance;
use ricochet::verify::oracle_sweep;

fn main() {
    let start = std::time::Instant::now();
    let failures = oracle_sweep(10_000, 0xACCE97, Tolerance::default());
    println!("10000 cases in {:?}, failures: {}", start.elapsed(), failures.len());
    for f in failures.iter().take(5) { println!("  {f}"); }
}
