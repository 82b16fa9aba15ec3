use ricochet::distribution::DistributionSpec;
use ricochet::engine::{CollisionSink, Engine};
use ricochet::kinematics::Tolerance;
use ricochet::ProcessConfig;

fn main() {
    let mu = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let nu = DistributionSpec::point_mass(1.0).unwrap();
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let checkpoints = [100usize, 1000, 10_000];
    let mut v_violations = 0u32;
    let mut n_violations = 0u32;
    let start = std::time::Instant::now();
    for seed in 0..50u64 {
        // indicator[vi][ci] = b_0 alive at checkpoint ci for grid velocity vi
        let mut indicators = vec![[false; 3]; grid.len()];
        for (vi, &v) in grid.iter().enumerate() {
            let config = ProcessConfig::new(mu.clone(), nu.clone(), seed)
                .unwrap()
                .with_fixed_v0(v)
                .unwrap();
            let mut gen = config.generator(0);
            let mut engine = Engine::with_sink(CollisionSink::Count, Tolerance::exact());
            engine.ingest(gen.next().unwrap()).unwrap();
            for k in 1..=10_000 {
                engine.ingest(gen.next().unwrap()).unwrap();
                if let Some(ci) = checkpoints.iter().position(|&c| c == k) {
                    indicators[vi][ci] = engine.contains_survivor(0);
                }
            }
        }
        for ci in 0..3 {
            for vi in 1..grid.len() {
                if indicators[vi - 1][ci] && !indicators[vi][ci] {
                    v_violations += 1;
                    println!("v-violation seed={seed} ci={ci} v={}", grid[vi]);
                }
            }
        }
        for vi in 0..grid.len() {
            for ci in 1..3 {
                if !indicators[vi][ci - 1] && indicators[vi][ci] {
                    n_violations += 1;
                    println!("n-violation seed={seed} v={} ci={ci}", grid[vi]);
                }
            }
        }
    }
    println!(
        "50 seeds x 21 v x 3 n done in {:?}: v_violations={v_violations} n_violations={n_violations}",
        start.elapsed()
    );
}
