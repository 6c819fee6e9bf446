//! Converting between the 0- and 1-parameterizations, and the derived
//! location, skewness and angle quantities.

use stable_moments::params::{StableParams0, StableParams1};

fn main() -> stable_moments::Result<()> {
    for alpha in [0.9999, 1.0, 1.0001, 1.5] {
        let p0 = StableParams0::new(alpha, 0.5, 2.0, 1.0)?;
        let p1 = p0.to_param1();
        let d = p1.derived();
        println!(
            "alpha={alpha}: delta1 = {:.6}, delta* = {:.6}, zeta = {:?}, theta0 = {:.6}",
            p1.delta, d.delta_star, d.zeta, d.theta0
        );
    }
    let p1 = StableParams1::new(1.5, -0.3, 1.2, 0.4)?;
    println!("round trip: {:?} -> {:?}", p1, p1.to_param0().to_param1());
    Ok(())
}
