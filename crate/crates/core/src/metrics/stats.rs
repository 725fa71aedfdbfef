//! Summary statistics over samples of any [`Scalar`].

use crate::num::Scalar;

pub fn mean<T: Scalar>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let sum = xs.iter().fold(T::zero(), |acc, &x| acc + x);
    Some(sum / T::of_usize(xs.len()))
}

/// Standard deviation treating `xs` as the whole population.
pub fn population_std<T: Scalar>(xs: &[T]) -> Option<T> {
    let m = mean(xs)?;
    let ss = xs.iter().fold(T::zero(), |acc, &x| acc + (x - m) * (x - m));
    Some((ss / T::of_usize(xs.len())).sqrt())
}

/// `σ / μ` with the population σ; zero when the mean is zero or there are
/// no samples.
pub fn coefficient_of_variation<T: Scalar>(xs: &[T]) -> T {
    match (mean(xs), population_std(xs)) {
        (Some(m), Some(s)) if m != T::zero() => s / m,
        _ => T::zero(),
    }
}

/// Empirical CDF with one point per distinct value: `(value, fraction <= value)`.
pub fn empirical_cdf<T: Scalar>(samples: &[T]) -> Vec<(T, T)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples are not NaN"));
    let n = T::of_usize(sorted.len());
    let mut out: Vec<(T, T)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let frac = T::of_usize(i + 1) / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = frac,
            _ => out.push((v, frac)),
        }
    }
    if let Some(last) = out.last_mut() {
        last.1 = T::one();
    }
    out
}

/// Value of a step CDF (as returned by [`empirical_cdf`]) at `x`.
pub fn cdf_at<T: Scalar>(cdf: &[(T, T)], x: T) -> T {
    let k = cdf.partition_point(|p| p.0 <= x);
    if k == 0 {
        T::zero()
    } else {
        cdf[k - 1].1
    }
}

/// Two-sample Kolmogorov–Smirnov statistic. Zero if either sample is empty.
pub fn ks_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    if a.is_empty() || b.is_empty() {
        return T::zero();
    }
    let ca = empirical_cdf(a);
    let cb = empirical_cdf(b);
    ca.iter()
        .chain(cb.iter())
        .map(|&(x, _)| (cdf_at(&ca, x) - cdf_at(&cb, x)).abs())
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cov_examples() {
        assert_eq!(coefficient_of_variation(&[4.0, 4.0, 4.0]), 0.0);
        let expected = (8.0f64 / 3.0).sqrt() / 4.0;
        assert!((coefficient_of_variation(&[2.0, 4.0, 6.0]) - expected).abs() < 1e-12);
        assert!((expected - 0.40825).abs() < 1e-5);
        assert_eq!(coefficient_of_variation(&[0.0f32, 0.0, 0.0]), 0.0);
        assert_eq!(coefficient_of_variation::<f64>(&[]), 0.0);
    }

    #[test]
    fn cdf_of_three_delays() {
        let cdf = empirical_cdf(&[30.0f64, 10.0, 20.0]);
        assert_eq!(cdf.len(), 3);
        assert_eq!(cdf[0].0, 10.0);
        assert!((cdf[0].1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((cdf[1].1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(cdf[2], (30.0, 1.0));
    }

    #[test]
    fn cdf_merges_ties() {
        let cdf = empirical_cdf(&[1.0f32, 1.0, 2.0, 2.0]);
        assert_eq!(cdf, vec![(1.0, 0.5), (2.0, 1.0)]);
        assert_eq!(cdf_at(&cdf, 0.5), 0.0);
        assert_eq!(cdf_at(&cdf, 1.5), 0.5);
    }

    #[test]
    fn ks_extremes() {
        assert_eq!(ks_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_distance(&[1.0f64, 2.0, 3.0, 4.0], &[3.0, 4.0]) - 0.5).abs() < 1e-15);
    }
}
