//! Error metrics, Monte Carlo summaries and the loading normality diagnostic.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimator::{common_component, estimate_factors, estimate_loadings};
use crate::linalg;
use crate::robust::{self, TruncationLevel};
use crate::tensor::{Matrix, TensorSeries};

const PIVOT_TOL: f64 = 1e-10;

/// Orthonormal basis of the column space of `a`, via the eigendecomposition
/// of `a^T a`.
pub fn column_basis(a: &Matrix) -> Result<Matrix> {
    let r = a.cols();
    if r == 0 || a.rows() < r {
        return Err(Error::RankDeficient(format!("{}x{} matrix", a.rows(), r)));
    }
    let ata = a.t_matmul(a)?;
    let eig = linalg::sym_eig(&ata, r)?;
    let top = eig.values[0];
    if !(top > 0.0) || eig.values[r - 1] <= PIVOT_TOL * top {
        return Err(Error::RankDeficient(format!(
            "smallest Gram eigenvalue {:e} against largest {top:e}",
            eig.values[r - 1]
        )));
    }
    let mut w = eig.vectors;
    for j in 0..r {
        let s = 1.0 / eig.values[j].sqrt();
        for i in 0..r {
            w[(i, j)] *= s;
        }
    }
    a.matmul(&w)
}

/// `sqrt(1 - tr(P_est P_truth) / r)` with `r` the truth's column count.
pub fn loading_error(est: &Matrix, truth: &Matrix) -> Result<f64> {
    if est.rows() != truth.rows() {
        return Err(Error::ShapeMismatch(format!("{} vs {} rows", est.rows(), truth.rows())));
    }
    let qa = column_basis(est)?;
    let qb = column_basis(truth)?;
    // r - tr(P_est P_truth) is the squared norm of the truth basis residual
    // after projecting on the estimate; forming it directly avoids cancellation.
    let resid = qb.sub(&qa.matmul(&qa.t_matmul(&qb)?)?)?;
    let ss: f64 = resid.data().iter().map(|v| v * v).sum();
    Ok((ss / truth.cols() as f64).min(1.0).sqrt())
}

/// Time points used by [`common_error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    All,
    /// The last `min(w, n)` time points.
    Last(usize),
}

impl Window {
    pub const LOCAL: Window = Window::Last(10);
}

/// `sum_t |est_t - truth_t|^2 / sum_t |truth_t|^2` over the window.
pub fn common_error(est: &TensorSeries, truth: &TensorSeries, window: Window) -> Result<f64> {
    if est.dims() != truth.dims() || est.len() != truth.len() {
        return Err(Error::ShapeMismatch("estimate and truth differ in shape".into()));
    }
    let n = truth.len();
    let start = match window {
        Window::All => 0,
        Window::Last(w) => n - w.min(n),
    };
    let p = truth.frame_len();
    let a = &est.data()[start * p..];
    let b = &truth.data()[start * p..];
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den == 0.0 {
        return Err(Error::DegenerateData("true common component is zero on the window".into()));
    }
    Ok(num / den)
}

/// Mean and standard deviation (denominator `count - 1`) of each metric.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub scenario: String,
    pub metrics: Vec<String>,
    pub count: usize,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl McSummary {
    pub fn from_rows(scenario: &str, metrics: &[&str], rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("no replications to summarize".into()));
        }
        let m = metrics.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::ShapeMismatch("replication rows differ from metric count".into()));
        }
        let count = rows.len();
        let mean: Vec<f64> = (0..m).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / count as f64).collect();
        let sd = (0..m)
            .map(|j| {
                if count < 2 {
                    return 0.0;
                }
                let ss: f64 = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum();
                (ss / (count - 1) as f64).sqrt()
            })
            .collect();
        Ok(McSummary {
            scenario: scenario.to_string(),
            metrics: metrics.iter().map(|s| s.to_string()).collect(),
            count,
            mean,
            sd,
        })
    }

    pub fn mean_of(&self, metric: &str) -> Option<f64> {
        self.metrics.iter().position(|m| m == metric).map(|j| self.mean[j])
    }
}

/// One standardized loading deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ZScore {
    pub mode: usize,
    pub index: usize,
    pub z: f64,
    /// `s_k * lambda_hat_i - lambda_i`, unscaled.
    pub deviation: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalityResult {
    pub scores: Vec<ZScore>,
    pub signs: Vec<f64>,
    /// `(mode, index)` pairs whose variance estimate was not positive.
    pub omitted: Vec<(usize, usize)>,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sign `s` (median of `sign(est_i truth_i)`, falling back to the sign of
/// the inner product when that median is zero) and `s * est - truth`.
pub fn aligned_deviation(est: &[f64], truth: &[f64]) -> (f64, Vec<f64>) {
    let mut sg: Vec<f64> = est.iter().zip(truth).map(|(a, b)| sign(a * b)).collect();
    let med = crate::tuning::median_in_place(&mut sg);
    let s = if med != 0.0 {
        sign(med)
    } else {
        let ip: f64 = est.iter().zip(truth).map(|(a, b)| a * b).sum();
        if ip < 0.0 {
            -1.0
        } else {
            1.0
        }
    };
    (s, est.iter().zip(truth).map(|(a, b)| s * a - b).collect())
}

/// Standardized second-stage loading deviations for a rank-one model.
/// Truths are rescaled to norm `sqrt(p_k)`; each estimate is sign-aligned
/// with the median of `sign(lambda_hat_i lambda_i)`.
pub fn normality_diagnostic(series: &TensorSeries, truths: &[Vec<f64>], tau: TruncationLevel) -> Result<NormalityResult> {
    let dims = series.dims().to_vec();
    let order = dims.len();
    if truths.len() != order || truths.iter().zip(&dims).any(|(t, &p)| t.len() != p) {
        return Err(Error::ShapeMismatch("one truth vector per mode, of length p_k, is required".into()));
    }
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientSample("variance estimation needs n >= 2".into()));
    }
    let ranks = vec![1; order];
    let stages = estimate_loadings(series, &ranks, tau, 2)?;
    let set = stages.last().expect("three stages");
    let factors = estimate_factors(series, set, tau)?;
    let chi = common_component(&factors, set)?;
    let xtr = robust::truncate(series, tau);
    let chitr = robust::truncate(&chi, tau);
    let gamma_f = factors.0.data().iter().map(|f| f * f).sum::<f64>() / n as f64;
    if !(gamma_f > 0.0) {
        return Err(Error::DegenerateData("estimated factor has zero second moment".into()));
    }
    let e: Vec<Vec<f64>> = set.modes.iter().map(|m| m.e.column(0)).collect();
    let p: usize = dims.iter().product();
    let mut scores = Vec::new();
    let mut signs = Vec::new();
    let mut omitted = Vec::new();
    for k in 0..order {
        let pk = dims[k];
        let norm = truths[k].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::DegenerateData(format!("truth for mode {k} is zero")));
        }
        let truth: Vec<f64> = truths[k].iter().map(|v| v * (pk as f64).sqrt() / norm).collect();
        let est: Vec<f64> = set.modes[k].lambda.column(0);
        let (s, dev) = aligned_deviation(&est, &truth);
        signs.push(s);
        // residual rows projected on the other modes: r_{i,t}
        let (left, _, right) = crate::kernels::layout(&dims, k);
        let mut resid = vec![0.0; pk * n];
        for t in 0..n {
            let x = xtr.frame(t);
            let c = chitr.frame(t);
            for b in 0..right {
                for a in 0..left {
                    // weight of column (a, b): product of the other modes' vectors
                    let mut w = 1.0;
                    let mut rem_a = a;
                    for (j, ej) in e.iter().enumerate().take(k) {
                        w *= ej[rem_a % dims[j]];
                        rem_a /= dims[j];
                    }
                    let mut rem_b = b;
                    for (j, ej) in e.iter().enumerate().skip(k + 1) {
                        w *= ej[rem_b % dims[j]];
                        rem_b /= dims[j];
                    }
                    for i in 0..pk {
                        let idx = a + left * (i + pk * b);
                        resid[i * n + t] += w * (x[idx] - c[idx]);
                    }
                }
            }
        }
        let root = ((n * p / pk) as f64).sqrt();
        for i in 0..pk {
            let r = &resid[i * n..(i + 1) * n];
            let mean = r.iter().sum::<f64>() / n as f64;
            let var = r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let phi = var / gamma_f;
            let deviation = dev[i];
            if !(phi > 0.0) {
                omitted.push((k, i));
                continue;
            }
            scores.push(ZScore { mode: k, index: i, z: root * deviation / phi.sqrt(), deviation, phi });
        }
    }
    Ok(NormalityResult { scores, signs, omitted })
}

/// Kolmogorov-Smirnov statistic against the standard normal and its
/// asymptotic p-value.
pub fn ks_test_normal(sample: &[f64]) -> Result<(f64, f64)> {
    if sample.is_empty() || sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("KS test needs a finite, nonempty sample".into()));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let norm = Normal::standard();
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in v.iter().enumerate() {
        let f = norm.cdf(*x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sq = n.sqrt();
    Ok((d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)))
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = 2.0 * (-1f64).powi(j - 1) * (-2.0 * jf * jf * x * x).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}
