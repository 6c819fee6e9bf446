//! The g_d, g̃_d and h functions, with the closed forms at x = 0.

use stable_moments::gfun::{self, GFunQuery, GKind};
use stable_moments::quad::QuadConfig;

fn main() -> stable_moments::Result<()> {
    let (alpha, beta) = (1.5, 0.5);
    println!("{:>6} {:>8} {:>20} {:>20}", "d", "x", "g_d", "g~_d");
    for d in [-1.2, -0.5, 0.5, 1.0, 2.0] {
        for x in [-2.0, 0.0, 2.0] {
            let q = GFunQuery::new(d, x, alpha, beta);
            let g = gfun::g(&q)?;
            let gt = gfun::g_tilde(&q)?;
            println!("{d:>6} {x:>8} {g:>20.12} {gt:>20.12}");
        }
    }

    let d = 0.5;
    let exact = gfun::closed_form_at_zero(d, alpha, beta, GKind::G)?;
    let quad = gfun::evaluate(GKind::G, &GFunQuery::new(d, 0.0, alpha, beta))?;
    println!(
        "\ng_{d}(0) closed form {exact:.15}, quadrature {:.15} (error estimate {:.1e})",
        quad.value, quad.error_estimate
    );

    let cfg = QuadConfig::default();
    for x in [0.0, 1.0, 3.0] {
        println!("h({x}) = {:.15}  closed form {:.15}", gfun::h(x, &cfg)?, gfun::h_closed_form(x));
    }
    Ok(())
}
