//! Projected gradient ascent on the surface shape for a fixed covariance.

use fimsense::{
    ascend_shape, evaluate, response_matrix, solve_per_antenna_sdp, ArrayGeometry, AscentConfig, SurfaceShape,
    TargetSet,
};

fn main() -> fimsense::Result<()> {
    let geom = ArrayGeometry::half_wavelength(10, 10, 0.5)?;
    let targets = TargetSet::reference();
    let flat = SurfaceShape::flat(geom.num_elements());
    let (cov, _) = solve_per_antenna_sdp(&response_matrix(&geom, &targets, &flat)?.b, 10.0, 1e-9)?;

    let start = evaluate(&cov, &geom, &targets, &flat, true)?;
    let grad = start.gradient.as_ref().expect("requested");
    println!("flat surface: {:.4} mW, |grad| = {:.3} mW/wavelength", start.value, grad.norm());

    let (shape, trace) = ascend_shape(&cov, &geom, &targets, &flat, &AscentConfig::default())?;
    println!("after {} iterations ({:?}): {:.4} mW", trace.iterations, trace.status, trace.final_value());
    println!("largest displacement {:.3} wavelengths", shape.max_abs());
    for (k, v) in trace.values.iter().enumerate().step_by(10.max(trace.values.len() / 8)) {
        println!("  iter {k:>4}: {v:.4} mW");
    }
    Ok(())
}
