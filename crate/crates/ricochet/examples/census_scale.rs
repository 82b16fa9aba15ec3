use ricochet::distribution::DistributionSpec;
use ricochet::estimators::census;

fn main() {
    let nu = DistributionSpec::point_mass(1.0).unwrap();
    let values: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
    let fs = DistributionSpec::finite_support(values, 0.0002).unwrap();
    for n in [1_000_000usize, 3_000_000, 10_000_000, 30_000_000] {
        let c = census(&fs, &nu, n, 0).unwrap();
        let modal_count = c.bins.iter().map(|b| b.survivors).max().unwrap();
        println!(
            "n={n}: survivors={} modal={:?} count={} share={:.3} first_modal_idx={:?}",
            c.total_survivors,
            c.modal_velocity,
            modal_count,
            modal_count as f64 / c.total_survivors as f64,
            c.first_modal_survivor_index,
        );
    }
}
