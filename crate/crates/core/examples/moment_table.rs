//! A CSV table of E X+^p over a parameter grid, written to stdout.

use rayon::prelude::*;
use stable_moments::moments;
use stable_moments::params::StableParams1;
use stable_moments::quad::QuadConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = QuadConfig::default();
    let mut grid = Vec::new();
    for alpha in [0.5, 1.0, 1.5, 1.9] {
        for beta in [-1.0, 0.0, 1.0] {
            for frac in [0.25, 0.5, 0.75] {
                grid.push((alpha, beta, frac * alpha));
            }
        }
    }
    let rows: Vec<_> = grid
        .par_iter()
        .map(|&(alpha, beta, p)| {
            let params = StableParams1::new(alpha, beta, 1.0, 0.0)?;
            moments::truncated_moment_plus(&params, p, &cfg).map(|v| (alpha, beta, p, v))
        })
        .collect::<stable_moments::Result<_>>()?;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(["alpha", "beta", "p", "moment"])?;
    for (alpha, beta, p, v) in rows {
        w.write_record([alpha, beta, p, v].map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
