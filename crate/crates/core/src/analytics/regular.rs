//! Closed forms on `d`-regular graphs with unit conductances and constant
//! killing `κ`.

use crate::error::{Error, Result};

fn check_degree(d: u32) -> Result<()> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!("degree must be at least 3, got {d}")));
    }
    Ok(())
}

/// `1 - 4 s (d-1) / (d+κ)²`.
pub fn discriminant(d: u32, kappa: f64, s: f64) -> f64 {
    let d = d as f64;
    1.0 - 4.0 * s * (d - 1.0) / ((d + kappa) * (d + kappa))
}

fn sqrt_discriminant(d: u32, kappa: f64, s: f64) -> Result<f64> {
    let disc = discriminant(d, kappa, s);
    if disc < 0.0 {
        return Err(Error::NegativeDiscriminant(disc));
    }
    Ok(disc.sqrt())
}

/// `(ρ^{x,y}(s), ρ^x(s))`.
///
/// `ρ^{x,y}(s) = (d+κ)²/(2s(d-1)) · (1 - √disc)` is evaluated as
/// `2 / (1 + √disc)`, which is the same quantity without the `0/0` at `s = 0`.
pub fn regular_rho_closed_form(d: u32, kappa: f64, s: f64) -> Result<(f64, f64)> {
    check_degree(d)?;
    let b = sqrt_discriminant(d, kappa, s)?;
    let df = d as f64;
    let rho_edge = 2.0 / (1.0 + b);
    let rho_vertex = 2.0 * (df - 1.0) / (df - 2.0 + df * b);
    Ok((rho_edge, rho_vertex))
}

/// Poisson mean of a geodesic class of length `length` and multiplicity
/// `mult`: `(1/mult) ((d+κ)/(2(d-1)) (1 - √disc(1)))^length`.
pub fn regular_class_mass(d: u32, kappa: f64, length: u32, mult: u32) -> Result<f64> {
    check_degree(d)?;
    if length < 3 || mult == 0 || length % mult != 0 {
        return Err(Error::InvalidArgument(format!("class of length {length} cannot have multiplicity {mult}")));
    }
    let b = sqrt_discriminant(d, kappa, 1.0)?;
    let df = d as f64;
    let step = (df + kappa) / (2.0 * (df - 1.0)) * (1.0 - b);
    Ok(step.powi(length as i32) / mult as f64)
}

/// Poisson mean of the number of contractible loops on a `d`-regular graph
/// with `n_vertices` vertices:
///
/// ```text
/// (n/2) [ d (ln 2 - ln(1+b)) + (d-2) (ln(b + (d-2)/d) - ln(1 + (d-2)/d)) ]
/// ```
///
/// with `b = √disc(1)`. The bracket is `∫_0^1 (ρ^x(s) - 1)/s ds` in closed
/// form (substitute `t = √disc(s)`).
pub fn regular_contractible_expectation(d: u32, kappa: f64, n_vertices: usize) -> Result<f64> {
    check_degree(d)?;
    let b = sqrt_discriminant(d, kappa, 1.0)?;
    let df = d as f64;
    let c = (df - 2.0) / df;
    let bracket = df * (2f64.ln() - (1.0 + b).ln()) + (df - 2.0) * ((b + c).ln() - (1.0 + c).ln());
    Ok(0.5 * n_vertices as f64 * bracket)
}
