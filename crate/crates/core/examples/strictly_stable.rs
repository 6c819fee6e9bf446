//! The closed form for strictly stable laws against the general path.

use stable_moments::moments::{self, Side};
use stable_moments::params::StableParams1;
use stable_moments::quad::QuadConfig;

fn main() -> stable_moments::Result<()> {
    let cfg = QuadConfig::default();
    for (alpha, beta) in [(0.7, 0.5), (1.0, 0.0), (1.5, -0.3), (1.9, 1.0)] {
        let p = StableParams1::new(alpha, beta, 1.5, 0.0)?;
        let order = 0.6 * alpha;
        let closed = moments::strictly_stable_moment(&p, order, Side::Plus)?;
        let general = moments::truncated_moment_plus(&p, order, &cfg)?;
        println!(
            "alpha={alpha} beta={beta} p={order:.2}: closed form {closed:.14}, general {general:.14}"
        );
    }
    Ok(())
}
