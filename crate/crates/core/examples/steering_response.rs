//! Steering vectors of a flat and a morphed surface, and the spectrum of
//! `B = A A^H` for the three reference targets.

use fimsense::{rank_profile, response_matrix, steering_vector, ArrayGeometry, SurfaceShape, TargetSet};

fn main() -> fimsense::Result<()> {
    let geom = ArrayGeometry::half_wavelength(10, 10, 0.5)?;
    let targets = TargetSet::reference();
    let n = geom.num_elements();

    let flat = SurfaceShape::flat(n);
    let tilted = SurfaceShape::from_vec((0..n).map(|i| 0.5 * ((i % 10) as f64 / 4.5 - 1.0)).collect());

    let t = &targets.targets()[0];
    let a = steering_vector(&geom, t.theta, t.phi, &tilted)?;
    println!("element 0 phase {:.4} rad, element 9 phase {:.4} rad", a[0].arg(), a[9].arg());

    for (name, shape) in [("flat", &flat), ("tilted", &tilted)] {
        let rm = response_matrix(&geom, &targets, shape)?;
        let profile = rank_profile(&rm);
        let top: Vec<String> = profile.eigenvalues.iter().take(4).map(|v| format!("{v:.3}")).collect();
        println!(
            "{name:>7}: rank {} eigenvalues [{}] trace error {:.1e}",
            profile.rank,
            top.join(", "),
            profile.trace_check
        );
    }
    Ok(())
}
