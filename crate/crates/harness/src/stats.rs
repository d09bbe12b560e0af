//! Percentiles and the Kendall rank trend test.

use statrs::distribution::{ContinuousCDF, Normal};

/// Nearest-rank percentile: the smallest value with at least `p`% of the
/// sample at or below it. `p` in (0, 100].
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() || !(p > 0.0 && p <= 100.0) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (p / 100.0 * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

pub fn median(values: &[f64]) -> Option<f64> {
    percentile(values, 50.0)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KendallTest {
    pub tau_b: f64,
    pub z: f64,
    /// One-sided p-value for a decreasing trend.
    pub p_decreasing: f64,
    /// One-sided p-value for an increasing trend.
    pub p_increasing: f64,
}

/// Kendall's tau-b between `x` and `y` with the tie-corrected normal
/// approximation of the null variance of S.
pub fn kendall(x: &[f64], y: &[f64]) -> Option<KendallTest> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return None;
    }
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] - x[j]).partial_cmp(&0.0)? as i64;
            let b = (y[i] - y[j]).partial_cmp(&0.0)? as i64;
            s += a * b;
        }
    }
    let ties = |v: &[f64]| -> Vec<usize> {
        let mut sorted = v.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut groups = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            if j - i > 1 {
                groups.push(j - i);
            }
            i = j;
        }
        groups
    };
    let (tx, ty) = (ties(x), ties(y));
    let nf = n as f64;
    let n0 = nf * (nf - 1.0) / 2.0;
    let pairs = |g: &[usize]| g.iter().map(|&t| (t * (t - 1)) as f64 / 2.0).sum::<f64>();
    let (n1, n2) = (pairs(&tx), pairs(&ty));
    let denom = ((n0 - n1) * (n0 - n2)).sqrt();
    if denom == 0.0 {
        return None;
    }
    let tau_b = s as f64 / denom;

    let v = |g: &[usize], f: &dyn Fn(f64) -> f64| g.iter().map(|&t| f(t as f64)).sum::<f64>();
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let vt = v(&tx, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = v(&ty, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let v1 = v(&tx, &|t| t * (t - 1.0)) * v(&ty, &|t| t * (t - 1.0)) / (2.0 * nf * (nf - 1.0));
    let v2 = v(&tx, &|t| t * (t - 1.0) * (t - 2.0)) * v(&ty, &|t| t * (t - 1.0) * (t - 2.0))
        / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
    let var = (v0 - vt - vu) / 18.0 + v1 + v2;
    let z = s as f64 / var.sqrt();
    let normal = Normal::standard();
    Some(KendallTest {
        tau_b,
        z,
        p_decreasing: normal.cdf(z),
        p_increasing: 1.0 - normal.cdf(z),
    })
}
