//! E(X2 | X1 = x) for a bivariate stable vector with a discrete spectral
//! measure, with a kernel-regression check.

use stable_moments::condexp::{self, Alpha1Variant, SpectralAtom};
use stable_moments::quad::QuadConfig;

fn main() -> stable_moments::Result<()> {
    let cfg = QuadConfig::default();
    let atoms = [
        SpectralAtom::new(0.6, 0.8, 1.0)?,
        SpectralAtom::new(-1.0, 0.0, 0.5)?,
        SpectralAtom::new(0.0, 1.0, 0.7)?,
    ];
    let alpha = 1.3;
    let c = condexp::cond_exp_coeffs(&atoms, alpha)?;
    println!("c1 = {:.12}, c2 = {:.12}, beta1 = {:.6}, gamma1 = {:.6}", c.c1, c.c2, c.beta1, c.gamma1);
    for x in [-3.0, -1.0, 0.0, 0.5, 1.0, 3.0] {
        let v = condexp::cond_exp_with(&c, x, Alpha1Variant::default(), &cfg)?;
        println!("E(X2 | X1 = {x:>4}) = {v:.12}");
    }
    let mc = condexp::cond_exp_monte_carlo(&atoms, alpha, 0.5, 2_000_000, 1, None)?;
    println!("kernel regression at x = 0.5: {:.5} ± {:.5}", mc.estimate, mc.stderr);
    Ok(())
}
