//! Analytic moments against the density-quadrature, characteristic-function
//! and Monte Carlo oracles.

use stable_moments::moments::{MomentKind, MomentQuery};
use stable_moments::oracle::{self, McSettings, VerifyConfig};
use stable_moments::params::StableParams1;

fn main() -> stable_moments::Result<()> {
    let cfg = VerifyConfig {
        mc: Some(McSettings { n: 500_000, seed: 3 }),
        ..VerifyConfig::default()
    };
    let cases = [
        (StableParams1::new(1.5, 0.5, 1.0, 1.0)?, 0.7),
        (StableParams1::new(0.8, -0.5, 2.0, 0.3)?, 0.4),
        (StableParams1::new(1.0, 0.3, 1.0, -0.5)?, 0.5),
    ];
    let mut reports = Vec::new();
    for (p, order) in cases {
        reports.extend(oracle::verify(&p, &MomentQuery::new(order, MomentKind::Plus), &cfg)?);
    }
    for r in &reports {
        println!("{}", r.to_json_line());
    }
    println!("{}", oracle::reports_to_csv(&reports)?);
    Ok(())
}
