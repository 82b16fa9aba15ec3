use ricochet::distribution::DistributionSpec;
use ricochet::estimators::{theta_hat, vc_hat, default_grid};

fn main() {
    let mu = DistributionSpec::uniform(0.0, 1.0).unwrap();
    let nu = DistributionSpec::point_mass(1.0).unwrap();
    let start = std::time::Instant::now();
    let t10 = theta_hat(1.0, &mu, &nu, 100_000, 500, 7).unwrap();
    println!("theta(1.0) = {} in {:?}", t10.point, start.elapsed());
    let start = std::time::Instant::now();
    let t09 = theta_hat(0.9, &mu, &nu, 100_000, 500, 7).unwrap();
    println!("theta(0.9) = {} in {:?}", t09.point, start.elapsed());
    let start = std::time::Instant::now();
    let vc = vc_hat(&default_grid(), &mu, &nu, 100_000, 500, 7).unwrap();
    println!("vc_hat = {vc} in {:?}", start.elapsed());
}
