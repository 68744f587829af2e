//! Goodness-of-fit tests used by the verification harness.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Minimum expected count per chi-square bin.
pub const MIN_EXPECTED: f64 = 5.0;

/// One hypothesis test in a report.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TestEntry {
    pub name: String,
    pub statistic: f64,
    pub observed: f64,
    pub expected: f64,
    pub p_value: f64,
}

/// Chi-square statistic with its degrees of freedom and upper-tail p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi2_upper(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(f64::NAN)
}

fn chi2_two_sided(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let d = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    (2.0 * d.cdf(stat).min(d.sf(stat))).min(1.0)
}

/// Pearson test of `observed` counts against `probs`. Adjacent categories in
/// the given order are pooled until each bin expects at least five events.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::DegenerateInput("observed and expected categories differ".into()));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::DegenerateInput("no observations".into()));
    }
    let total_p: f64 = probs.iter().sum();
    if !(total_p > 0.0) || probs.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::DegenerateInput("expected probabilities must be non-negative".into()));
    }
    let n = n as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&obs, &p) in observed.iter().zip(probs) {
        o += obs as f64;
        e += n * p / total_p;
        if e >= MIN_EXPECTED {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len().saturating_sub(1);
    Ok(ChiSquare { statistic, dof, p_value: chi2_upper(statistic, dof) })
}

/// Summary of a Poisson fit of per-replica counts.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PoissonFit {
    pub n: usize,
    pub expected_mean: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
    /// Standard error of the sample mean under the null, `√(μ/n)`.
    pub stderr: f64,
    pub mean_z: f64,
    pub mean_p: f64,
    /// `(n-1) s² / x̄`, χ²_{n-1} under the Poisson null.
    pub dispersion: f64,
    pub dispersion_p: f64,
    pub gof_statistic: f64,
    pub gof_dof: usize,
    pub gof_p: f64,
}

impl PoissonFit {
    /// The three tests as report entries named `{name}.mean`, `.dispersion`, `.gof`.
    pub fn entries(&self, name: &str) -> Vec<TestEntry> {
        vec![
            TestEntry {
                name: format!("{name}.mean"),
                statistic: self.mean_z,
                observed: self.sample_mean,
                expected: self.expected_mean,
                p_value: self.mean_p,
            },
            TestEntry {
                name: format!("{name}.dispersion"),
                statistic: self.dispersion,
                observed: self.sample_variance,
                expected: self.expected_mean,
                p_value: self.dispersion_p,
            },
            TestEntry {
                name: format!("{name}.gof"),
                statistic: self.gof_statistic,
                observed: self.sample_mean,
                expected: self.expected_mean,
                p_value: self.gof_p,
            },
        ]
    }

    /// Mean and variance both within `k` standard errors of `μ`.
    pub fn within_standard_errors(&self, k: f64) -> bool {
        let mu = self.expected_mean;
        let n = self.n as f64;
        let se_var = ((mu + 2.0 * mu * mu) / n).sqrt();
        (self.sample_mean - mu).abs() <= k * self.stderr && (self.sample_variance - mu).abs() <= k * se_var
    }
}

pub fn mean_and_variance(counts: &[u64]) -> (f64, f64) {
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = if counts.len() > 1 {
        counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Tests `counts` against Poisson(`mean`): z-test on the mean,
/// index-of-dispersion test, and binned chi-square goodness of fit.
pub fn poisson_fit(counts: &[u64], mean: f64) -> Result<PoissonFit> {
    if counts.len() < 2 {
        return Err(Error::DegenerateInput(format!("need at least two replicas, got {}", counts.len())));
    }
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::DegenerateInput(format!("Poisson mean must be positive, got {mean}")));
    }
    let n = counts.len();
    let (sample_mean, sample_variance) = mean_and_variance(counts);
    let stderr = (mean / n as f64).sqrt();
    let mean_z = (sample_mean - mean) / stderr;
    let mean_p = erfc(mean_z.abs() / std::f64::consts::SQRT_2);
    let (dispersion, dispersion_p) = if sample_mean == 0.0 {
        (0.0, 1.0)
    } else {
        let d = (n - 1) as f64 * sample_variance / sample_mean;
        (d, chi2_two_sided(d, n - 1))
    };

    // bins 0..K with a final "≥ K" bin
    let pois = Poisson::new(mean).map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let max_count = counts.iter().copied().max().unwrap_or(0);
    let mut observed = vec![0u64; max_count as usize + 1];
    for &c in counts {
        observed[c as usize] += 1;
    }
    let mut probs: Vec<f64> = Vec::new();
    let mut obs_binned: Vec<u64> = Vec::new();
    let mut k = 0u64;
    loop {
        let tail = if k == 0 { 1.0 } else { pois.sf(k - 1) };
        // stop once the remaining tail alone is too small to be a bin
        if n as f64 * tail < 2.0 * MIN_EXPECTED || k > max_count {
            probs.push(tail);
            obs_binned.push(observed.iter().skip(k as usize).sum());
            break;
        }
        probs.push(pois.pmf(k));
        obs_binned.push(observed[k as usize]);
        k += 1;
    }
    let gof = chi_square(&obs_binned, &probs)?;
    Ok(PoissonFit {
        n,
        expected_mean: mean,
        sample_mean,
        sample_variance,
        stderr,
        mean_z,
        mean_p,
        dispersion,
        dispersion_p,
        gof_statistic: gof.statistic,
        gof_dof: gof.dof,
        gof_p: gof.p_value,
    })
}

/// Pearson sample correlation; `0` when either series is constant.
pub fn correlation(a: &[u64], b: &[u64]) -> f64 {
    let (ma, va) = mean_and_variance(a);
    let (mb, vb) = mean_and_variance(b);
    if va == 0.0 || vb == 0.0 || a.len() != b.len() || a.len() < 2 {
        return 0.0;
    }
    let cov = a.iter().zip(b).map(|(&x, &y)| (x as f64 - ma) * (y as f64 - mb)).sum::<f64>() / (a.len() - 1) as f64;
    cov / (va * vb).sqrt()
}

/// Bonferroni threshold `α / m`.
pub fn bonferroni(alpha: f64, m: usize) -> f64 {
    alpha / m.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::Poisson as P;

    fn draws(mean: f64, n: usize, seed: u64) -> Vec<u64> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = P::new(mean).unwrap();
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let mut k = 0;
                while d.cdf(k) < u {
                    k += 1;
                }
                k
            })
            .collect()
    }

    #[test]
    fn accepts_poisson_samples() {
        for (i, &mu) in [0.05, 0.4, 2.0, 15.0].iter().enumerate() {
            let c = draws(mu, 20_000, i as u64);
            let fit = poisson_fit(&c, mu).unwrap();
            assert!(fit.mean_p > 1e-4 && fit.dispersion_p > 1e-4 && fit.gof_p > 1e-4, "{fit:?}");
            assert!(fit.within_standard_errors(4.0));
        }
    }

    #[test]
    fn rejects_wrong_mean_and_overdispersion() {
        let c = draws(1.0, 20_000, 7);
        assert!(poisson_fit(&c, 1.1).unwrap().mean_p < 1e-6);
        // mixture of two Poissons has the right mean but too much variance
        let mut mix = draws(0.5, 10_000, 8);
        mix.extend(draws(1.5, 10_000, 9));
        let fit = poisson_fit(&mix, 1.0).unwrap();
        assert!(fit.dispersion_p < 1e-6);
        assert!(fit.gof_p < 1e-6);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(poisson_fit(&[], 1.0), Err(Error::DegenerateInput(_))));
        assert!(matches!(poisson_fit(&[1, 2], 0.0), Err(Error::DegenerateInput(_))));
        let fit = poisson_fit(&[0, 0, 0], 0.01).unwrap();
        assert_eq!(fit.dispersion_p, 1.0);
    }

    #[test]
    fn chi_square_uniform() {
        let obs = [1010, 990, 1005, 995];
        let r = chi_square(&obs, &[0.25; 4]).unwrap();
        assert_eq!(r.dof, 3);
        assert!((r.statistic - 0.25).abs() < 1e-12);
        assert!(r.p_value > 0.9);
    }

    #[test]
    fn correlation_basics() {
        assert!((correlation(&[1, 2, 3], &[2, 4, 6]) - 1.0).abs() < 1e-12);
        assert!((correlation(&[1, 2, 3], &[3, 2, 1]) + 1.0).abs() < 1e-12);
        assert_eq!(correlation(&[1, 1, 1], &[1, 2, 3]), 0.0);
    }
}
