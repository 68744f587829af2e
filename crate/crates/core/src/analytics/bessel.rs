//! Modified Bessel function of the second kind, `K_ν(x)`, for real order.
//!
//! The order is reduced to `μ = ν - round(ν)` with `|μ| ≤ ½`. `K_μ` and
//! `K_{μ+1}` come from Temme's series for `x ≤ 2` and Steed's continued
//! fraction otherwise, then forward recurrence climbs back to `ν`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

// Taylor coefficients of 1/Γ(1+z) at z = 0.
const RGAMMA1P: [f64; 27] = [
    1.000_000_000_000_000_00e0,
    5.772_156_649_015_328_66e-1,
    -6.558_780_715_202_539_02e-1,
    -4.200_263_503_409_523_70e-2,
    1.665_386_113_822_914_79e-1,
    -4.219_773_455_554_433_34e-2,
    -9.621_971_527_876_973_03e-3,
    7.218_943_246_663_099_90e-3,
    -1.165_167_591_859_065_17e-3,
    -2.152_416_741_149_509_75e-4,
    1.280_502_823_881_161_96e-4,
    -2.013_485_478_078_823_87e-5,
    -1.250_493_482_142_670_63e-6,
    1.133_027_231_981_695_93e-6,
    -2.056_338_416_977_607_07e-7,
    6.116_095_104_481_416_09e-9,
    5.002_007_644_469_222_95e-9,
    -1.181_274_570_487_020_04e-9,
    1.043_426_711_691_100_54e-10,
    7.782_263_439_905_070_81e-12,
    -3.696_805_618_642_205_98e-12,
    5.100_370_287_454_475_75e-13,
    -2.058_326_053_566_506_64e-14,
    -5.348_122_539_423_017_82e-15,
    1.226_778_628_238_260_84e-15,
    -1.181_259_301_697_458_83e-16,
    1.186_692_254_751_600_37e-18,
];

/// `(gam1, gam2, 1/Γ(1+μ), 1/Γ(1-μ))` with
/// `gam1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)` and
/// `gam2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2`, free of cancellation for small μ.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mut even = 0.0;
    let mut odd = 0.0;
    for (k, &c) in RGAMMA1P.iter().enumerate().rev() {
        if k % 2 == 0 {
            even = even * mu * mu + c;
        } else {
            odd = odd * mu * mu + c;
        }
    }
    // 1/Γ(1+μ) = even(μ²) + μ·odd(μ²)
    let gampl = even + mu * odd;
    let gammi = even - mu * odd;
    (-odd, even, gampl, gammi)
}

/// `K_ν(x)` for `x > 0`. The function is even in `ν`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_k_pair(nu.abs(), x)?.0)
}

/// `(K_ν(x), K_{ν+1}(x))` for `ν ≥ 0`, `x > 0`.
fn bessel_k_pair(nu: f64, x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!("K_nu(x) needs finite nu and x > 0, got nu={nu}, x={x}")));
    }
    const EPS: f64 = 1e-17;
    const MAX_ITER: usize = 100_000;
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    let (mut k_mu, mut k_mu1) = if x <= 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < 1e-15 { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < 1e-15 { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence(MAX_ITER));
        }
        (sum, sum1 * xi2)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 2..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence(MAX_ITER));
        }
        h *= a1;
        let k = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        (k, k * (mu + x + 0.5 - h) * xi)
    };
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    Ok((k_mu, k_mu1))
}
