//! Sample reductions and two-sample comparisons.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample contains non-finite values")]
    NonFinite,
    #[error("weights must be non-negative and sum to one")]
    BadWeights,
}

/// A set of real samples with optional probability weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl SampleSet {
    pub fn new(values: Vec<f64>) -> Result<Self, StatsError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        Ok(Self { values, weights: None })
    }

    pub fn weighted(values: Vec<f64>, weights: Vec<f64>) -> Result<Self, StatsError> {
        if values.len() != weights.len()
            || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || (neumaier_sum(&weights) - 1.0).abs() > 1e-9
        {
            return Err(StatsError::BadWeights);
        }
        let mut set = Self::new(values)?;
        set.weights = Some(weights);
        Ok(set)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 1.0 / self.values.len() as f64,
        }
    }

    /// Values and weights sorted by value.
    fn sorted_pairs(&self) -> Vec<(f64, f64)> {
        let mut pairs: Vec<(f64, f64)> = (0..self.len()).map(|i| (self.values[i], self.weight(i))).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pairs
    }
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sum that does not depend on the order of its inputs: values are sorted
/// before compensated summation.
pub fn order_free_sum(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    neumaier_sum(&v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Unbiased (n − 1) variance.
    pub variance: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Mean, unbiased variance and standard error. Bit-exact under permutation
/// of the samples.
pub fn summary(s: &SampleSet) -> Result<Summary, StatsError> {
    let n = s.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: n });
    }
    let (mean, variance) = match &s.weights {
        None => {
            let mean = order_free_sum(&s.values) / n as f64;
            let dev: Vec<f64> = s.values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (mean, order_free_sum(&dev) / (n - 1) as f64)
        }
        Some(_) => {
            let pairs = s.sorted_pairs();
            let wx: Vec<f64> = pairs.iter().map(|(v, w)| v * w).collect();
            let mean = neumaier_sum(&wx);
            let dev: Vec<f64> = pairs.iter().map(|(v, w)| w * (v - mean) * (v - mean)).collect();
            let w2: f64 = neumaier_sum(&pairs.iter().map(|(_, w)| w * w).collect::<Vec<_>>());
            // Reliability-weight correction; reduces to n/(n−1) for equal weights.
            (mean, neumaier_sum(&dev) / (1.0 - w2))
        }
    };
    Ok(Summary {
        mean,
        variance,
        stderr: (variance / n as f64).sqrt(),
        n,
    })
}

/// Silverman's rule-of-thumb bandwidth `1.06·σ·n^{−1/5}`.
pub fn silverman_bandwidth(std_dev: f64, n: usize) -> f64 {
    1.06 * std_dev * (n as f64).powf(-0.2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kde {
    pub density: Vec<f64>,
    pub bandwidth: f64,
    /// Set when the sample had zero spread and a narrow fallback kernel was used.
    pub degenerate: bool,
}

/// Gaussian kernel density estimate evaluated on `grid`.
pub fn kde(s: &SampleSet, grid: &[f64]) -> Result<Kde, StatsError> {
    if s.len() < 10 {
        return Err(StatsError::TooFewSamples {
            needed: 10,
            got: s.len(),
        });
    }
    let sm = summary(s)?;
    let std = sm.variance.max(0.0).sqrt();
    let (bandwidth, degenerate) = if std > 0.0 {
        (silverman_bandwidth(std, s.len()), false)
    } else {
        log::warn!("kde: zero-variance sample, using a narrow fallback kernel");
        (1e-6 * sm.mean.abs().max(1.0), true)
    };
    let norm = 1.0 / (bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    let density = grid
        .iter()
        .map(|&x| {
            let terms: Vec<f64> = (0..s.len())
                .map(|i| {
                    let u = (x - s.values[i]) / bandwidth;
                    s.weight(i) * (-0.5 * u * u).exp()
                })
                .collect();
            norm * neumaier_sum(&terms)
        })
        .collect();
    Ok(Kde {
        density,
        bandwidth,
        degenerate,
    })
}

/// Empirical CDF of `s` evaluated at each point of `grid`.
pub fn ecdf(s: &SampleSet, grid: &[f64]) -> Vec<f64> {
    let pairs = s.sorted_pairs();
    let mut cum = Vec::with_capacity(pairs.len());
    let mut acc = 0.0;
    for (_, w) in &pairs {
        acc += w;
        cum.push(acc);
    }
    grid.iter()
        .map(|&x| {
            let idx = pairs.partition_point(|(v, _)| *v <= x);
            if idx == 0 {
                0.0
            } else {
                cum[idx - 1].min(1.0)
            }
        })
        .collect()
}

/// Two-sample Kolmogorov-Smirnov statistic: the sup-norm distance between
/// the empirical CDFs. Returns 0 if either set is empty.
pub fn ks_distance(a: &SampleSet, b: &SampleSet) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let pa = a.sorted_pairs();
    let pb = b.sorted_pairs();
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut d = 0.0f64;
    while i < pa.len() || j < pb.len() {
        let x = match (pa.get(i), pb.get(j)) {
            (Some(p), Some(q)) => p.0.min(q.0),
            (Some(p), None) => p.0,
            (None, Some(q)) => q.0,
            (None, None) => unreachable!(),
        };
        // Step over every tied value on both sides before comparing.
        while i < pa.len() && pa[i].0 == x {
            fa += pa[i].1;
            i += 1;
        }
        while j < pb.len() && pb[j].0 == x {
            fb += pb[j].1;
            j += 1;
        }
        d = d.max((fa - fb).abs());
    }
    d.min(1.0)
}

/// Asymptotic two-sample KS critical value at 95% for sizes `n`, `m`.
pub fn ks_critical_95(n: usize, m: usize) -> f64 {
    1.36 * ((n + m) as f64 / (n * m) as f64).sqrt()
}

/// Composite trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
