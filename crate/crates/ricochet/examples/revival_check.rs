use ricochet::distribution::DistributionSpec;
use ricochet::kinematics::Tolerance;
use ricochet::oracle::brute_survivors;
use ricochet::{generate_sequence, ProcessConfig};

fn main() {
    // seed 12, v = 0.8: engine says b_0 is out at n=1000, back at n=10000
    let mu = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let nu = DistributionSpec::point_mass(1.0).unwrap();
    let config = ProcessConfig::new(mu, nu, 12)
        .unwrap()
        .with_fixed_v0(0.8)
        .unwrap();
    let bullets = generate_sequence(&config, 10_001);
    for n in [1000usize, 10_000] {
        let survivors = brute_survivors(&bullets[..=n], Tolerance::exact()).unwrap();
        println!(
            "oracle: n={n}: b_0 in S_n = {}, |S_n| = {}",
            survivors.first() == Some(&0),
            survivors.len()
        );
    }
}
