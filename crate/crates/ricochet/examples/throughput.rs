use ricochet::config::ProcessConfig;
use ricochet::distribution::DistributionSpec;
use ricochet::engine::{CollisionSink, Engine};
use ricochet::kinematics::Tolerance;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000_000);
    let config = ProcessConfig::new(
        DistributionSpec::uniform(0.0, 1.0).unwrap(),
        DistributionSpec::point_mass(1.0).unwrap(),
        42,
    )
    .unwrap();
    let start = std::time::Instant::now();
    let mut gen = config.generator(0);
    let mut engine = Engine::with_sink(CollisionSink::Count, Tolerance::exact());
    for _ in 0..n {
        let b = gen.next().unwrap();
        engine.ingest(b).unwrap();
    }
    let dt = start.elapsed();
    println!(
        "{n} bullets in {dt:?} ({:.1} M/s), survivors {}, confirmed {}, resident entries {}",
        n as f64 / dt.as_secs_f64() / 1e6,
        engine.survivor_count(),
        engine.confirmed_count(),
        engine.resident_entries()
    );
}
