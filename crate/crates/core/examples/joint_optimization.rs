//! Alternating covariance/shape optimization from several starts.

use fimsense::{bcd_optimize, ArrayGeometry, BcdConfig, TargetSet};

fn main() -> fimsense::Result<()> {
    let geom = ArrayGeometry::half_wavelength(6, 6, 0.5)?;
    let targets = TargetSet::reference();
    let cfg = BcdConfig { n_starts: 3, ..BcdConfig::default() };

    let out = bcd_optimize(&geom, &targets, 10.0, &cfg)?;
    println!("start objectives (mW): {:?}", out.start_objectives);
    println!(
        "best start {} stopped by {:?} after {} outer iterations",
        out.trace.start_index,
        out.trace.termination_reason,
        out.trace.outer_iterations()
    );
    for r in &out.trace.records {
        println!(
            "  outer {:>2}: covariance {:.4} -> shape {:.4} mW ({} inner, {:?})",
            r.outer, r.after_covariance, r.objective, r.inner_iterations, r.inner_status
        );
    }
    Ok(())
}
