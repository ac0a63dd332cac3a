use crate::numerics::{kolmogorov_pvalue, std_normal_cdf};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub n: usize,
    /// `sup |F_n - F|`.
    pub statistic: f64,
    /// Asymptotic Kolmogorov p-value.
    pub p_value: f64,
}

/// One-sample Kolmogorov-Smirnov test of `sample` against `cdf`.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::domain("KS test needs a non-empty sample"));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("KS sample contains NaN"));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        n: xs.len(),
        statistic: d,
        p_value: kolmogorov_pvalue(d, xs.len()),
    })
}

/// KS test of residuals against the standard normal, optionally after
/// centring and scaling by the sample mean and standard deviation.
pub fn ks_normality(values: &[f64], standardize: bool) -> Result<KsResult> {
    if !standardize {
        return ks_test(values, std_normal_cdf);
    }
    if values.len() < 2 {
        return Err(Error::domain("standardising needs at least two values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::domain("residuals have zero spread"));
    }
    ks_test(values, |x| std_normal_cdf((x - mean) / sd))
}
