//! Cumulated target power versus morphing range for a few array sizes, with
//! each range warm-started from the previous optimum.

use fimsense::config::ExperimentConfig;
use fimsense::experiment::range_sweep;

fn main() -> fimsense::Result<()> {
    let mut cfg = ExperimentConfig::reference(0.0);
    cfg.algorithm.n_starts = 2;

    let rows = range_sweep(&cfg, &[0.0, 0.25, 0.5, 1.0], &[(4, 4), (6, 6)])?;
    println!("array  d_max  cumulated_mw");
    for row in rows {
        println!("{}x{}  {:>5.2}  {:>12.4}", row.n_x, row.n_z, row.d_max_wavelengths, row.cumulated_mw);
    }
    Ok(())
}
