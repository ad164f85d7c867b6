//! Blurred position measurements: the Gaussian kernel, the forward channel,
//! and the variances of both subset-purity inverses.
//!
//! cargo run --release --example spatial_resolution

use latticeprobe::errmodel::{apply_spatial_blur, gaussian_position_kernel};
use latticeprobe::estimator::{invert_spatial_explicit, InversionMethod};
use latticeprobe::figures::spatial_subsets;
use latticeprobe::qstate::make_ghz;
use latticeprobe::variance::{pattern_distribution, SpatialEstimator};

fn main() -> latticeprobe::Result<()> {
    let n = 4;
    let kernel = gaussian_position_kernel(0.5, 1.0, n)?;
    println!("kernel f(x, y) for σ = λ/2:\n{kernel:.4}");

    let ghz = pattern_distribution(&make_ghz(n)?)?;
    let blurred = apply_spatial_blur(&ghz, &kernel)?;
    let back = invert_spatial_explicit(&blurred, &kernel)?;
    let err = back.probs().iter().zip(ghz.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("{} blurred outcomes, explicit inverse error {err:.1e}", blurred.probs().len());

    println!("\n σ/λ   subset      explicit   least squares");
    for sigma in [0.1, 0.25, 0.5, 1.0] {
        let kernel = gaussian_position_kernel(sigma, 1.0, n)?;
        for b in spatial_subsets(n)? {
            let ex = SpatialEstimator::new(b, &kernel, InversionMethod::Explicit, sigma)?;
            let ls = SpatialEstimator::new(b, &kernel, InversionMethod::LeastSquares, sigma)?;
            println!(
                "{sigma:>5.2}   {:<9}  {:>10.3e}   {:>10.3e}",
                format!("{:?}", b.columns()),
                ex.variance(&ghz)?,
                ls.variance(&ghz)?
            );
        }
    }
    Ok(())
}
