//! Cumulated target power of the four transmitters versus transmit power.

use fimsense::config::ExperimentConfig;
use fimsense::experiment::power_sweep;

fn main() -> fimsense::Result<()> {
    let mut cfg = ExperimentConfig::reference(0.5);
    cfg.geometry.n_x = 6;
    cfg.geometry.n_z = 6;
    cfg.algorithm.n_starts = 2;

    println!("p_t_dbm  scheme    cumulated_mw");
    for row in power_sweep(&cfg, &[0.0, 5.0, 10.0, 15.0])? {
        println!("{:>7.1}  {:<8}  {:>16.9}", row.p_t_dbm, row.scheme, row.cumulated_mw);
    }
    Ok(())
}
