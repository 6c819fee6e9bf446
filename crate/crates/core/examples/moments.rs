//! Truncated, absolute and signed fractional moments, and E(X - a)+.

use stable_moments::moments::{self, MomentKind, MomentQuery};
use stable_moments::params::StableParams1;
use stable_moments::quad::QuadConfig;

fn main() -> stable_moments::Result<()> {
    let cfg = QuadConfig::default();
    let p = StableParams1::new(1.7, 0.4, 1.0, 0.3)?;
    println!("{:>6} {:>16} {:>16} {:>16} {:>16}", "p", "E X+^p", "E X-^p", "E|X|^p", "E X^<p>");
    for order in [0.1, 0.5, 1.0, 1.3, 1.6] {
        let plus = moments::truncated_moment_plus(&p, order, &cfg)?;
        let minus = moments::truncated_moment_minus(&p, order, &cfg)?;
        let abs = moments::abs_moment(&p, order, &cfg)?.value;
        let signed = moments::signed_moment(&p, order, &cfg)?.value;
        println!("{order:>6} {plus:>16.12} {minus:>16.12} {abs:>16.12} {signed:>16.12}");
    }

    // E(X - a)+ for a range of strikes
    for a in [-1.0, 0.0, 0.3, 1.0, 3.0] {
        let q = MomentQuery::new(1.0, MomentKind::Plus).shifted(a);
        println!("E(X - {a})+ = {:.12}", moments::moment(&p, &q, &cfg)?.value);
    }
    Ok(())
}
