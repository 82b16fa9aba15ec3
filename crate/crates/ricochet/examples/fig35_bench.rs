use ricochet::distribution::DistributionSpec;
use ricochet::estimators::{census, vhat_hat};

fn main() {
    let mu = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let nu = DistributionSpec::point_mass(1.0).unwrap();
    let start = std::time::Instant::now();
    print!("vhat max:");
    for seed in 0..10 {
        let est = vhat_hat(&mu, &nu, 10_000_000, 0.001, seed).unwrap();
        print!(" {:.4}", est.max_ps_velocity.unwrap());
    }
    println!("\n  ({:?} total)", start.elapsed());

    let values: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
    let fs = DistributionSpec::finite_support(values, 0.0002).unwrap();
    let start = std::time::Instant::now();
    for seed in 0..10 {
        let c5 = census(&fs, &nu, 100_000, seed).unwrap();
        let c6 = census(&fs, &nu, 1_000_000, seed).unwrap();
        let modal_share = c6.bins.iter().map(|b| b.survivors).max().unwrap() as f64
            / c6.total_survivors as f64;
        println!(
            "seed {seed}: |S(1e5)|={} |S(1e6)|={} modal={:?} share={:.2}",
            c5.total_survivors, c6.total_survivors, c6.modal_velocity, modal_share
        );
    }
    println!("({:?} total)", start.elapsed());
}
