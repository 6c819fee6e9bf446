//! Median evaluation times of the analytic moment and of brute-force
//! density quadrature.

use std::hint::black_box;
use std::time::Instant;

use stable_moments::gfun::{self, GFunQuery};
use stable_moments::moments::{self, MomentKind, MomentQuery};
use stable_moments::oracle;
use stable_moments::params::StableParams1;
use stable_moments::quad::QuadConfig;

fn median_us(runs: usize, mut f: impl FnMut()) -> f64 {
    let mut t: Vec<f64> = (0..runs)
        .map(|_| {
            let s = Instant::now();
            f();
            s.elapsed().as_secs_f64() * 1e6
        })
        .collect();
    t.sort_by(f64::total_cmp);
    t[runs / 2]
}

fn main() -> stable_moments::Result<()> {
    let cfg = QuadConfig::default();
    let p = StableParams1::new(1.5, 0.5, 1.0, 1.0)?;
    let q = MomentQuery::new(0.7, MomentKind::Plus);
    let gq = GFunQuery::new(-0.7, -1.0, 1.5, 0.5);
    let g = median_us(101, || {
        black_box(gfun::g(black_box(&gq)).ok());
    });
    let analytic = median_us(101, || {
        black_box(moments::moment(&p, &q, &cfg).ok());
    });
    let density = median_us(11, || {
        black_box(oracle::moment_by_density_quadrature(&p, &q, &cfg).ok());
    });
    println!("g_d: {g:.1} us");
    println!("analytic moment: {analytic:.1} us");
    println!("density quadrature: {density:.1} us ({:.0}x slower)", density / analytic);
    Ok(())
}
