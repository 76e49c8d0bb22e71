//! Goodness-of-fit tests used to validate the generators.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom of a chi-square test.
    pub dof: Option<usize>,
    pub samples: usize,
}

impl TestOutcome {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> TestOutcome {
    let n = samples.len();
    if n == 0 {
        return TestOutcome {
            statistic: f64::NAN,
            p_value: 0.0,
            dof: None,
            samples: 0,
        };
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max);
    let sqrt_n = nf.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    TestOutcome {
        statistic: d,
        p_value: kolmogorov_survival(lambda),
        dof: None,
        samples: n,
    }
}

/// Test of samples against a point mass: passes only if every sample
/// equals `value`.
pub fn degenerate_test(samples: &[f64], value: f64) -> TestOutcome {
    let all = samples.iter().all(|&x| (x - value).abs() <= 1e-12 * value.abs().max(1.0));
    TestOutcome {
        statistic: if all { 0.0 } else { 1.0 },
        p_value: if all { 1.0 } else { 0.0 },
        dof: None,
        samples: samples.len(),
    }
}

/// Chi-square goodness-of-fit of counts on `1, 2, ...` against `pmf`.
/// Adjacent bins are merged until every bin expects at least five samples;
/// the last bin collects the upper tail.
pub fn chi_square_test(samples: &[u32], pmf: impl Fn(u32) -> f64) -> TestOutcome {
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    let n = samples.len();
    let nf = n as f64;
    let max_seen = samples.iter().copied().max().unwrap_or(1);
    if samples.iter().any(|&k| pmf(k) <= 0.0) {
        return TestOutcome {
            statistic: f64::INFINITY,
            p_value: 0.0,
            dof: None,
            samples: n,
        };
    }
    let mut observed = vec![0usize; max_seen as usize + 1];
    for &k in samples {
        observed[k as usize] += 1;
    }

    // raw bins 1..=last, the last one carrying the tail mass
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut cumulative: f64 = 0.0;
    let mut k = 1u32;
    loop {
        let remaining = (1.0f64 - cumulative).max(0.0);
        if k >= max_seen && remaining * nf < 5.0 {
            let tail_obs: usize = observed.iter().skip(k as usize).sum();
            bins.push((tail_obs as f64, remaining * nf));
            break;
        }
        let p = pmf(k);
        cumulative += p;
        let obs = observed.get(k as usize).copied().unwrap_or(0);
        bins.push((obs as f64, p * nf));
        k += 1;
    }

    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (o, e) in bins {
        acc.0 += o;
        acc.1 += e;
        if acc.1 >= 5.0 {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 > 0.0 || acc.1 > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => merged.push(acc),
        }
    }

    if merged.len() < 2 {
        return TestOutcome {
            statistic: 0.0,
            p_value: 1.0,
            dof: Some(0),
            samples: n,
        };
    }
    let statistic: f64 = merged.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = merged.len() - 1;
    let p_value = ChiSquared::new(dof as f64).map_or(0.0, |d| d.sf(statistic));
    TestOutcome {
        statistic,
        p_value,
        dof: Some(dof),
        samples: n,
    }
}

/// Probability mass functions of the count distributions.
pub mod pmf {
    use statrs::distribution::{Discrete, Poisson};

    pub fn discrete_uniform(max: u32, k: u32) -> f64 {
        if (1..=max).contains(&k) {
            1.0 / max as f64
        } else {
            0.0
        }
    }

    pub fn poisson_plus_one(rate: f64, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        if rate <= 0.0 {
            return if k == 1 { 1.0 } else { 0.0 };
        }
        Poisson::new(rate).map_or(0.0, |p| p.pmf(u64::from(k - 1)))
    }

    /// `P(ceil(Exp(mean)) = k)`.
    pub fn discrete_exponential(mean: f64, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let k = f64::from(k);
        (-(k - 1.0) / mean).exp() - (-k / mean).exp()
    }

    pub fn mixture(beta: f64, mean: f64, k: u32) -> f64 {
        let point = if k == 1 { 1.0 - beta } else { 0.0 };
        point + beta * discrete_exponential(mean, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_relative_eq;
    use statrs::distribution::{ContinuousCDF, Exp, Normal};

    #[test]
    fn kolmogorov_values() {
        // reference values of the Kolmogorov survival function
        assert_relative_eq!(kolmogorov_survival(1.0), 0.26999967, epsilon = 1e-7);
        assert_relative_eq!(kolmogorov_survival(1.36), 0.0494, epsilon = 2e-4);
        assert_relative_eq!(kolmogorov_survival(1.628), 0.0100, epsilon = 2e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn ks_accepts_matching_and_rejects_wrong() {
        let mut rng = RngStream::from_seed(1);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.exponential(3.0)).collect();
        let exp = Exp::new(1.0 / 3.0).unwrap();
        assert!(ks_test(&xs, |x| exp.cdf(x)).passes(0.01));
        let wrong = Exp::new(1.0 / 3.3).unwrap();
        assert!(!ks_test(&xs, |x| wrong.cdf(x)).passes(0.01));
        let norm = Normal::new(3.0, 3.0).unwrap();
        assert!(!ks_test(&xs, |x| norm.cdf(x)).passes(0.01));
    }

    #[test]
    fn chi_square_accepts_matching_and_rejects_wrong() {
        let mut rng = RngStream::from_seed(2);
        let ks: Vec<u32> = (0..50_000).map(|_| rng.poisson(2.5) + 1).collect();
        assert!(chi_square_test(&ks, |k| pmf::poisson_plus_one(2.5, k)).passes(0.01));
        assert!(!chi_square_test(&ks, |k| pmf::poisson_plus_one(2.7, k)).passes(0.01));
        let du: Vec<u32> = (0..50_000).map(|_| rng.discrete_uniform(1, 6)).collect();
        assert!(chi_square_test(&du, |k| pmf::discrete_uniform(6, k)).passes(0.01));
        assert_eq!(chi_square_test(&du, |k| pmf::discrete_uniform(5, k)).p_value, 0.0);
    }

    #[test]
    fn degenerate_counts() {
        let ones = vec![1u32; 1000];
        assert_eq!(chi_square_test(&ones, |k| pmf::discrete_uniform(1, k)).p_value, 1.0);
        assert_eq!(degenerate_test(&[2.0, 2.0], 2.0).p_value, 1.0);
        assert_eq!(degenerate_test(&[2.0, 2.1], 2.0).p_value, 0.0);
    }

    #[test]
    fn pmfs_sum_to_one() {
        let total = |f: &dyn Fn(u32) -> f64| (1..2000).map(f).sum::<f64>();
        assert_relative_eq!(total(&|k| pmf::discrete_uniform(7, k)), 1.0, epsilon = 1e-12);
        assert_relative_eq!(total(&|k| pmf::poisson_plus_one(1.8, k)), 1.0, epsilon = 1e-12);
        assert_relative_eq!(total(&|k| pmf::discrete_exponential(1.4, k)), 1.0, epsilon = 1e-12);
        assert_relative_eq!(total(&|k| pmf::mixture(0.3, 2.2, k)), 1.0, epsilon = 1e-12);
    }
}
