//! Coarse text rendering of the beampattern of a jointly optimized surface.

use fimsense::beampattern::uniform_axis;
use fimsense::{bcd_optimize, evaluate_beampattern, target_powers, ArrayGeometry, BcdConfig, TargetSet};

fn main() -> fimsense::Result<()> {
    let geom = ArrayGeometry::half_wavelength(6, 6, 0.5)?;
    let targets = TargetSet::reference();
    let out = bcd_optimize(&geom, &targets, 10.0, &BcdConfig { n_starts: 2, ..BcdConfig::default() })?;

    let powers = target_powers(&out.covariance, &geom, &targets, &out.shape)?;
    println!("per-target dBm {:?}", powers.per_target_dbm);

    let theta = uniform_axis(19);
    let phi = uniform_axis(37);
    let grid = evaluate_beampattern(&out.covariance, &geom, &out.shape, &theta, &phi)?;
    let peak = grid.max_dbm();
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '@'];
    println!("theta down (0..180 deg), phi across (0..180 deg), peak {peak:.2} dBm, 3 dB per shade");
    for (i, th) in theta.iter().enumerate() {
        let line: String = (0..phi.len())
            .map(|j| {
                let below = (peak - grid.power_dbm[(i, j)]) / 3.0;
                shades[shades.len() - 1 - (below as usize).min(shades.len() - 1)]
            })
            .collect();
        println!("{:>5.0} |{line}|", th.to_degrees());
    }
    Ok(())
}
