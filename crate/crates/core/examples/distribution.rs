//! Density, distribution function and reproducible sampling.

use stable_moments::dist;
use stable_moments::params::StableParams1;
use stable_moments::quad::QuadConfig;

fn main() -> stable_moments::Result<()> {
    let cfg = QuadConfig::default();
    let p = StableParams1::new(1.2, -0.6, 2.0, 0.5)?;
    println!("{:>6} {:>18} {:>18}", "x", "pdf", "cdf");
    for x in [-10.0, -3.0, -1.0, 0.0, 0.5, 1.0, 3.0, 10.0] {
        println!("{x:>6} {:>18.12} {:>18.12}", dist::pdf(x, &p, &cfg)?, dist::cdf(x, &p, &cfg)?);
    }
    println!("P(X > 0) = {:.12}", dist::prob_positive(&p, &cfg)?);

    let n = 50_000;
    let batch = dist::sample(&p, n, 42)?;
    let ks = dist::ks_statistic(&batch.values, &p, &cfg)?;
    println!(
        "KS statistic over {n} draws: {ks:.5} (1% critical value {:.5})",
        dist::ks_critical_1pct(n)
    );
    Ok(())
}
