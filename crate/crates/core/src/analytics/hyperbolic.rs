//! Mass of loops freely homotopic to a closed geodesic on a compact
//! hyperbolic surface with constant killing rate.
//!
//! Integrating the hyperbolic term of the heat-kernel trace formula against
//! `dt/t` gives
//!
//! ```text
//! ∫_0^∞ (1/t) e^{-t/4}/√(4πt) · (ℓ/m) e^{-ℓ²/4t} / (2 sinh(ℓ/2)) · e^{-2κt} dt
//! ```
//!
//! which, with `u = √(1/4 + 2κ)`, is the three-dimensional Green function
//! `e^{-uℓ}/(4πℓ)` of `-Δ + u²` up to the factor `2πℓ/(m sinh(ℓ/2))`, i.e.
//! `√(2uℓ/π) K_{1/2}(uℓ) / (2 m sinh(ℓ/2))`.

use std::f64::consts::PI;

use crate::analytics::bessel::bessel_k;
use crate::analytics::quadrature::integrate_to_infinity;
use crate::error::{Error, Result};

/// `u = √(1/4 + 2κ)`.
pub fn decay_rate(kappa: f64) -> f64 {
    (0.25 + 2.0 * kappa).sqrt()
}

fn check(length: f64, mult: u32, kappa: f64) -> Result<()> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidArgument(format!("geodesic length must be positive, got {length}")));
    }
    if mult == 0 {
        return Err(Error::InvalidArgument("multiplicity must be at least 1".into()));
    }
    if !(kappa >= 0.0) {
        return Err(Error::NegativeKilling("surface".into(), kappa));
    }
    Ok(())
}

/// Closed-form class mass through the Bessel function of order ½.
pub fn hyperbolic_class_mass(length: f64, mult: u32, kappa: f64) -> Result<f64> {
    check(length, mult, kappa)?;
    let u = decay_rate(kappa);
    let z = u * length;
    let green = (2.0 * z / PI).sqrt() * bessel_k(0.5, z)?;
    Ok(green / (2.0 * mult as f64 * (0.5 * length).sinh()))
}

/// The same mass by adaptive quadrature of the time integral.
pub fn hyperbolic_class_mass_quadrature(length: f64, mult: u32, kappa: f64, rel_tol: f64) -> Result<f64> {
    check(length, mult, kappa)?;
    let prefactor = length / mult as f64 / (2.0 * (0.5 * length).sinh());
    let l2 = length * length;
    let integrand = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let heat = (-t / 4.0 - l2 / (4.0 * t) - 2.0 * kappa * t).exp() / (4.0 * PI * t).sqrt();
        heat / t
    };
    // split at the peak so both pieces are well resolved
    let peak = length / (2.0 * decay_rate(kappa));
    let head = crate::analytics::quadrature::integrate(integrand, 0.0, peak, 0.0, rel_tol * 0.1)?;
    let tail = integrate_to_infinity(integrand, peak, 0.0, rel_tol * 0.1)?;
    Ok(prefactor * (head.value + tail.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_quadrature() {
        for &length in &[1.0, 2.0, 5.0] {
            for &kappa in &[0.0, 1.0] {
                let a = hyperbolic_class_mass(length, 1, kappa).unwrap();
                let b = hyperbolic_class_mass_quadrature(length, 1, kappa, 1e-12).unwrap();
                assert!(((a - b) / b).abs() <= 1e-8, "ℓ={length} κ={kappa}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn multiplicity_divides() {
        let one = hyperbolic_class_mass(2.0, 1, 0.3).unwrap();
        let two = hyperbolic_class_mass(2.0, 2, 0.3).unwrap();
        assert!((two - one / 2.0).abs() < 1e-16);
    }

    #[test]
    fn decays_with_length() {
        let mut prev = f64::INFINITY;
        for i in 1..60 {
            let m = hyperbolic_class_mass(i as f64 * 0.5, 1, 0.2).unwrap();
            assert!(m < prev && m > 0.0);
            prev = m;
        }
        assert!(prev < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(hyperbolic_class_mass(0.0, 1, 0.0).is_err());
        assert!(hyperbolic_class_mass(1.0, 0, 0.0).is_err());
        assert!(hyperbolic_class_mass(1.0, 1, -1.0).is_err());
    }
}
