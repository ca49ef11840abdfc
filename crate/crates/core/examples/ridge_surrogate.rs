//! Weighted ridge with an unpenalised intercept on a planted linear target,
//! showing the shrinkage as λ grows.
//!
//! ```bash
//! cargo run --example ridge_surrogate
//! ```

use l2gtx::numerics::{r_squared, weighted_ridge};
use rand::Rng as _;

fn main() -> l2gtx::Result<()> {
    let mut rng = l2gtx::rng::rng(5);
    let planted = [0.3, 0.0, -0.2];
    let z: Vec<Vec<f64>> = (0..80).map(|_| (0..3).map(|_| rng.random_range(0..4) as f64).collect()).collect();
    let y: Vec<f64> = z.iter().map(|r| 0.1 + r.iter().zip(&planted).map(|(a, b)| a * b).sum::<f64>()).collect();
    let w: Vec<f64> = (0..80).map(|_| rng.random_range(0.1..1.0)).collect();

    println!("planted intercept 0.1, coefficients {planted:?}");
    for lambda in [0.0, 0.1, 1.0, 10.0, 100.0] {
        let fit = weighted_ridge(&z, &y, &w, lambda)?;
        let yhat: Vec<f64> = z.iter().map(|r| fit.predict_row(r)).collect();
        let r2 = r_squared(&y, &yhat, &w)?.unwrap_or(f64::NAN);
        let beta: Vec<String> = fit.coefficients.iter().map(|b| format!("{b:+.4}")).collect();
        println!("λ = {lambda:<5}  intercept {:+.4}  β [{}]  R² {r2:.4}", fit.intercept, beta.join(", "));
    }
    Ok(())
}
