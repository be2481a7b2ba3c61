//! Runs all four transmitters and writes their artifacts to a directory
//! (first argument, default `compare-out`).

use std::path::PathBuf;

use fimsense::config::ExperimentConfig;
use fimsense::experiment::run_compare_schemes;

fn main() -> fimsense::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| PathBuf::from("compare-out"), PathBuf::from);
    let mut cfg = ExperimentConfig::reference(1.0);
    cfg.geometry.n_x = 6;
    cfg.geometry.n_z = 6;
    cfg.algorithm.n_starts = 2;
    cfg.output.grid_theta_points = 91;
    cfg.output.grid_phi_points = 91;

    for rec in run_compare_schemes(&cfg, &out)? {
        println!(
            "{:<8} {:>10.4} mW  min target {:>7.3} dBm  digest {}",
            rec.scheme,
            rec.objective_mw,
            rec.min_target_dbm,
            &rec.digest()[..12]
        );
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
