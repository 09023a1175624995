//! Small shared numerics for posterior summaries.

/// Equal-tailed sample quantile with linear interpolation. `p` in [0,1].
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Coefficient of determination 1 - SSE/SST.
pub fn r_squared(truth: &[f64], pred: &[f64]) -> f64 {
    assert_eq!(truth.len(), pred.len());
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let sst: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    let sse: f64 = truth
        .iter()
        .zip(pred)
        .map(|(t, p)| (t - p).powi(2))
        .sum();
    if sst == 0.0 {
        if sse == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - sse / sst
    }
}

/// Squared Pearson correlation; for a least-squares linear fit this
/// equals `r_squared` of the fitted values.
pub fn r_squared_corr(truth: &[f64], pred: &[f64]) -> f64 {
    pearson(truth, pred).powi(2)
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Mean and (population) variance in one pass.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quantile_interpolates() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(quantile(&xs, 0.0), 1.0);
        assert_abs_diff_eq!(quantile(&xs, 1.0), 4.0);
        assert_abs_diff_eq!(quantile(&xs, 0.5), 2.5);
    }

    #[test]
    fn r2_definitions() {
        let t = [1.0, 2.0, 3.0];
        assert_abs_diff_eq!(r_squared(&t, &t), 1.0);
        let mean_only = [2.0, 2.0, 2.0];
        assert_abs_diff_eq!(r_squared(&t, &mean_only), 0.0);
    }

    #[test]
    fn r2_routes_agree_on_linear_fit() {
        // pred is the least-squares fit of truth on a covariate, so both
        // definitions coincide.
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let truth = [0.1, 0.9, 2.2, 2.8, 4.1];
        // Fit truth = a + b x by least squares.
        let (mx, vx) = mean_var(&x);
        let (mt, _) = mean_var(&truth);
        let cov: f64 = x
            .iter()
            .zip(&truth)
            .map(|(xi, ti)| (xi - mx) * (ti - mt))
            .sum::<f64>()
            / x.len() as f64;
        let b = cov / vx;
        let a = mt - b * mx;
        let pred: Vec<f64> = x.iter().map(|xi| a + b * xi).collect();
        assert_abs_diff_eq!(
            r_squared(&truth, &pred),
            r_squared_corr(&truth, &pred),
            epsilon = 1e-10
        );
    }

    #[test]
    fn pearson_sign() {
        let a = [1.0, 2.0, 3.0];
        let b = [3.0, 2.0, 1.0];
        assert_abs_diff_eq!(pearson(&a, &b), -1.0, epsilon = 1e-12);
    }
}
