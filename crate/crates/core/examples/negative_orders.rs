//! Negative-order moments from the conjectured formula, audited against
//! direct density quadrature.

use stable_moments::moments::{self, MomentKind, MomentQuery};
use stable_moments::oracle;
use stable_moments::params::StableParams1;
use stable_moments::quad::QuadConfig;

fn main() -> stable_moments::Result<()> {
    let cfg = QuadConfig::default();
    let oc = oracle::oracle_quad_config();
    for (alpha, beta, delta) in [(1.0, 0.0, 0.0), (1.5, 0.5, 0.2), (0.8, -0.4, 0.5)] {
        let p = StableParams1::new(alpha, beta, 1.0, delta)?;
        for order in [-0.2, -0.5, -0.8] {
            let q = MomentQuery::new(order, MomentKind::Plus);
            let m = moments::moment(&p, &q, &cfg)?;
            let direct = oracle::moment_by_density_quadrature(&p, &q, &oc)?;
            println!(
                "alpha={alpha} beta={beta} delta={delta} p={order}: formula {:.12}{} density {:.12}",
                m.value,
                if m.experimental { " (experimental)" } else { "" },
                direct.value
            );
        }
    }
    Ok(())
}
