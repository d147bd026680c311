//! Statistical helpers for the experiment layer: normal CDF, KS tests,
//! least-squares fits, sample moments, and Mardia's multivariate skewness.

/// Standard normal CDF via the Taylor series of Marsaglia, exact to double
/// precision on |x| ≤ 8; beyond that the value is 0 or 1 to within 1 ulp.
pub fn standard_normal_cdf(x: f64) -> f64 {
    if x < -8.0 {
        return 0.0;
    }
    if x > 8.0 {
        return 1.0;
    }
    let mut sum = x;
    let mut term = x;
    let q = x * x;
    let mut i = 1.0;
    while term.abs() > 1e-18 * sum.abs().max(1.0) {
        i += 2.0;
        term *= q / i;
        sum += term;
    }
    // ln(√(2π)) = 0.9189385332046727
    0.5 + sum * (-0.5 * q - 0.918_938_533_204_672_7).exp()
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n − F|` against a given
/// CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    assert!(!samples.is_empty());
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    d
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2 j² λ²}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.05 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = 2.0 * (-2.0 * (j as f64).powi(2) * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct KsTwoSample {
    pub statistic: f64,
    /// Asymptotic p-value.
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsTwoSample {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|u, v| u.partial_cmp(v).expect("no NaN samples"));
    ys.sort_unstable_by(|u, v| u.partial_cmp(v).expect("no NaN samples"));
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            while i < n && xs[i] == x {
                i += 1;
            }
        }
        if y <= x {
            while j < m && ys[j] == y {
                j += 1;
            }
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let effective = ((n * m) as f64 / (n + m) as f64).sqrt();
    KsTwoSample {
        statistic: d,
        p_value: kolmogorov_sf(effective * d),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares `y = a + b·x` with the usual slope standard error
/// (residual variance with n−2 degrees of freedom).
pub fn ols(x: &[f64], y: &[f64]) -> OlsFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 3, "need at least 3 points for a slope error");
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mean_x) * (xi - mean_x);
        sxy += (xi - mean_x) * (yi - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let r = yi - (intercept + slope * xi);
        ss_res += r * r;
    }
    let slope_stderr = (ss_res / (n - 2.0) / sxx).sqrt();
    OlsFit {
        slope,
        intercept,
        slope_stderr,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SampleMoments {
    pub mean: f64,
    /// Unbiased (n−1) variance.
    pub variance: f64,
    pub skewness: f64,
    /// Raw kurtosis (normal = 3).
    pub kurtosis: f64,
}

pub fn sample_moments(xs: &[f64]) -> SampleMoments {
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    SampleMoments {
        mean,
        variance: m2 * n / (n - 1.0),
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    }
}

/// Mardia's multivariate skewness test statistic `n·b_{1,2}/6` for paired
/// samples; under joint normality it is asymptotically χ² with 4 degrees of
/// freedom.
pub fn mardia_skewness_2d(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len();
    assert!(n >= 4);
    let nf = n as f64;
    let mean = (
        pairs.iter().map(|p| p.0).sum::<f64>() / nf,
        pairs.iter().map(|p| p.1).sum::<f64>() / nf,
    );
    let mut s11 = 0.0;
    let mut s12 = 0.0;
    let mut s22 = 0.0;
    for &(a, b) in pairs {
        let (da, db) = (a - mean.0, b - mean.1);
        s11 += da * da;
        s12 += da * db;
        s22 += db * db;
    }
    s11 /= nf;
    s12 /= nf;
    s22 /= nf;
    let det = s11 * s22 - s12 * s12;
    assert!(det > 0.0, "degenerate sample covariance");
    // inverse of the 2x2 covariance
    let (i11, i12, i22) = (s22 / det, -s12 / det, s11 / det);
    let centered: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(a, b)| (a - mean.0, b - mean.1))
        .collect();
    let mut b1 = 0.0;
    for &(xi1, xi2) in &centered {
        // accumulate Σ_j (x_i' S⁻¹ x_j)³ via the transformed coordinates
        let (ti1, ti2) = (i11 * xi1 + i12 * xi2, i12 * xi1 + i22 * xi2);
        for &(xj1, xj2) in &centered {
            let dot = ti1 * xj1 + ti2 * xj2;
            b1 += dot * dot * dot;
        }
    }
    b1 /= nf * nf;
    nf * b1 / 6.0
}
