//! Rolling-window factor forecasts for vector panels.

use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::sym_eig;
use crate::robust::TruncationLevel;
use crate::tensor::{Matrix, TensorSeries};
use crate::tuning::{cv_tau, median_in_place, CvConfig};

/// Scale constant making the MAD consistent for the normal SD.
pub const MAD_SCALE: f64 = 1.482_602_218_505_602;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Standardization {
    MeanSd,
    MedianMad,
    None,
}

impl FromStr for Standardization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean_sd" => Ok(Standardization::MeanSd),
            "median_mad" => Ok(Standardization::MedianMad),
            "none" => Ok(Standardization::None),
            _ => Err(Error::InvalidArgument(format!("unknown standardization '{s}'"))),
        }
    }
}

/// How the truncation level is set; the factor level always equals it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauChoice {
    Fixed(TruncationLevel),
    /// Cross-validated on the first window, then reused.
    CvOnce,
    CvPerWindow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastConfig {
    pub window: usize,
    pub h_max: usize,
    pub rank: usize,
    pub tau: TauChoice,
    pub standardization: Standardization,
    pub cv: CvConfig,
}

impl ForecastConfig {
    pub fn new(window: usize, rank: usize) -> Self {
        ForecastConfig {
            window,
            h_max: 24,
            rank,
            tau: TauChoice::CvOnce,
            standardization: Standardization::MeanSd,
            cv: CvConfig::default(),
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.h_max == 0 {
            return Err(Error::InvalidArgument("at least one horizon is required".into()));
        }
        if self.window < self.h_max + 2 {
            return Err(Error::InvalidArgument(format!(
                "window {} too short for {} horizons",
                self.window, self.h_max
            )));
        }
        if self.rank == 0 || self.rank > p {
            return Err(Error::RankOutOfRange { requested: self.rank, order: p });
        }
        Ok(())
    }
}

fn check_panel(x: &TensorSeries) -> Result<usize> {
    if x.order() != 1 {
        return Err(Error::ShapeMismatch(format!("forecasting needs a vector panel, got order {}", x.order())));
    }
    Ok(x.dims()[0])
}

/// Per-variable affine map to and from standardized units.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &TensorSeries, how: Standardization) -> Result<Self> {
        let p = check_panel(x)?;
        let n = x.len();
        if how == Standardization::None {
            return Ok(Standardizer { center: vec![0.0; p], scale: vec![1.0; p] });
        }
        let mut center = Vec::with_capacity(p);
        let mut scale = Vec::with_capacity(p);
        let mut col = vec![0.0; n];
        for i in 0..p {
            for (t, c) in col.iter_mut().enumerate() {
                *c = x.data()[t * p + i];
            }
            let (c, s) = match how {
                Standardization::MeanSd => {
                    if n < 2 {
                        return Err(Error::InsufficientSample("standard deviation needs two points".into()));
                    }
                    let m = col.iter().sum::<f64>() / n as f64;
                    let v = col.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (n - 1) as f64;
                    (m, v.sqrt())
                }
                _ => {
                    let m = median_in_place(&mut col);
                    let mut dev: Vec<f64> = col.iter().map(|y| (y - m).abs()).collect();
                    (m, MAD_SCALE * median_in_place(&mut dev))
                }
            };
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::DegenerateData(format!("variable {i} has zero spread")));
            }
            center.push(c);
            scale.push(s);
        }
        Ok(Standardizer { center, scale })
    }

    pub fn apply(&self, x: &TensorSeries) -> TensorSeries {
        let p = self.center.len();
        let mut out = x.clone();
        for (j, v) in out.data_mut().iter_mut().enumerate() {
            let i = j % p;
            *v = (*v - self.center[i]) / self.scale[i];
        }
        out
    }

    pub fn invert(&self, i: usize, z: f64) -> f64 {
        self.center[i] + self.scale[i] * z
    }
}

/// `T^{-1} sum_{u=1}^{T-h} x_u x_{u+h}^T` on the truncated window.
pub fn lagged_second_moment(window: &TensorSeries, tau: TruncationLevel, h: usize) -> Result<Matrix> {
    let p = check_panel(window)?;
    let t = window.len();
    if h >= t {
        return Err(Error::InsufficientSample(format!("lag {h} needs more than {t} observations")));
    }
    let x: Vec<f64> = window.data().iter().map(|&v| tau.apply(v)).collect();
    let mut g = Matrix::zeros(p, p);
    let gd = g.data_mut();
    for u in 0..t - h {
        let a = &x[u * p..(u + 1) * p];
        let b = &x[(u + h) * p..(u + h + 1) * p];
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                gd[i * p + j] += ai * bj;
            }
        }
    }
    Ok(g.scaled(1.0 / t as f64))
}

/// Predictions at the given horizons (one row each) from an already
/// standardized window.
fn predict_standardized(z: &TensorSeries, rank: usize, tau: TruncationLevel, horizons: &[usize]) -> Result<Matrix> {
    let p = z.dims()[0];
    let t = z.len();
    let x: Vec<f64> = z.data().iter().map(|&v| tau.apply(v)).collect();
    let mut g0 = lagged_second_moment(z, tau, 0)?;
    crate::kernels::symmetrize(g0.data_mut(), p);
    let eig = sym_eig(&g0, rank)?;
    if eig.values.iter().any(|&m| !(m > 1e-12)) {
        return Err(Error::Singular(format!("leading eigenvalues {:?} of the window second moment", eig.values)));
    }
    let last = &x[(t - 1) * p..];
    let coef = eig.vectors.t_matmul(&Matrix::column_vector(last))?;
    let w: Vec<f64> = coef.data().iter().zip(&eig.values).map(|(c, m)| c / m).collect();
    let v = eig.vectors.matvec(&w)?;
    let mut out = Matrix::zeros(horizons.len(), p);
    for (row, &h) in horizons.iter().enumerate() {
        if h >= t {
            return Err(Error::InsufficientSample(format!("horizon {h} needs more than {t} observations")));
        }
        // Gamma(h)^T v = T^{-1} sum_u x_{u+h} (x_u . v)
        let mut acc = vec![0.0; p];
        for u in 0..t - h {
            let s: f64 = x[u * p..(u + 1) * p].iter().zip(&v).map(|(a, b)| a * b).sum();
            for (o, &b) in acc.iter_mut().zip(&x[(u + h) * p..(u + h + 1) * p]) {
                *o += s * b;
            }
        }
        for (i, a) in acc.iter().enumerate() {
            out.data_mut()[row * p + i] = a / t as f64;
        }
    }
    Ok(out)
}

fn resolve_tau(z: &TensorSeries, config: &ForecastConfig, cached: Option<TruncationLevel>) -> Result<TruncationLevel> {
    match (config.tau, cached) {
        (TauChoice::Fixed(t), _) => Ok(t),
        (TauChoice::CvOnce, Some(t)) => Ok(t),
        _ => Ok(cv_tau(z, &[config.rank], &config.cv)?.tau),
    }
}

/// Predictions in original units for the given horizons, from a window
/// whose last row is the forecast origin. Row `j` is horizon `horizons[j]`.
pub fn forecast_window(
    window: &TensorSeries,
    horizons: &[usize],
    rank: usize,
    tau: TruncationLevel,
    standardization: Standardization,
) -> Result<Matrix> {
    let p = check_panel(window)?;
    if rank == 0 || rank > p {
        return Err(Error::RankOutOfRange { requested: rank, order: p });
    }
    let st = Standardizer::fit(window, standardization)?;
    let z = st.apply(window);
    let mut pred = predict_standardized(&z, rank, tau, horizons)?;
    let d = pred.data_mut();
    for (j, v) in d.iter_mut().enumerate() {
        *v = st.invert(j % p, *v);
    }
    Ok(pred)
}

/// Prediction of variable `i` at horizon `h` from the window.
pub fn forecast_one(window: &TensorSeries, i: usize, h: usize, config: &ForecastConfig) -> Result<f64> {
    let p = check_panel(window)?;
    if i >= p {
        return Err(Error::InvalidArgument(format!("variable {i} out of range for {p}")));
    }
    if config.rank == 0 || config.rank > p {
        return Err(Error::RankOutOfRange { requested: config.rank, order: p });
    }
    let st = Standardizer::fit(window, config.standardization)?;
    let tau = resolve_tau(&st.apply(window), config, None)?;
    Ok(forecast_window(window, &[h], config.rank, tau, config.standardization)?[(0, i)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastErrors {
    /// Zero-based index of each forecast origin.
    pub origins: Vec<usize>,
    /// Truncation level used at each origin.
    pub taus: Vec<TruncationLevel>,
    /// `origins x p` horizon-averaged absolute errors.
    pub errors: Matrix,
    /// Per-variable averages over origins.
    pub mean: Vec<f64>,
}

/// Number of forecast origins: `n - T - h_max`.
pub fn window_count(n: usize, window: usize, h_max: usize) -> Result<usize> {
    let need = window + h_max + 1;
    if n < need {
        return Err(Error::InsufficientSample(format!("{n} observations, at least {need} needed")));
    }
    Ok(n - window - h_max)
}

/// Rolling errors of an arbitrary predictor: `predict(window, origin)` must
/// return an `h_max x p` matrix of forecasts for horizons `1..=h_max`.
pub fn rolling_errors_with<F>(series: &TensorSeries, window: usize, h_max: usize, predict: F) -> Result<ForecastErrors>
where
    F: Fn(&TensorSeries, usize) -> Result<(Matrix, TruncationLevel)> + Sync,
{
    let p = check_panel(series)?;
    let n = series.len();
    let count = window_count(n, window, h_max)?;
    // one-based origins T+1..n-h_max; zero-based window ends at the origin
    let origins: Vec<usize> = (window..window + count).collect();
    let rows = origins
        .par_iter()
        .map(|&o| {
            let win = series.slice(o + 1 - window..o + 1)?;
            let (pred, tau) = predict(&win, o)?;
            let mut err = vec![0.0; p];
            for h in 1..=h_max {
                let actual = series.frame(o + h);
                for (i, e) in err.iter_mut().enumerate() {
                    *e += (pred[(h - 1, i)] - actual[i]).abs();
                }
            }
            err.iter_mut().for_each(|e| *e /= h_max as f64);
            Ok((err, tau))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut data = Vec::with_capacity(count * p);
    let mut taus = Vec::with_capacity(count);
    for (e, t) in rows {
        data.extend(e);
        taus.push(t);
    }
    let errors = Matrix::new(count, p, data)?;
    let mean = (0..p).map(|i| (0..count).map(|t| errors[(t, i)]).sum::<f64>() / count as f64).collect();
    Ok(ForecastErrors { origins, taus, errors, mean })
}

/// Rolling-window errors of the truncated factor forecaster.
pub fn rolling_errors(series: &TensorSeries, config: &ForecastConfig) -> Result<ForecastErrors> {
    let p = check_panel(series)?;
    config.validate(p)?;
    window_count(series.len(), config.window, config.h_max)?;
    let once = match config.tau {
        TauChoice::CvOnce => {
            let first = series.slice(0..config.window)?;
            let st = Standardizer::fit(&first, config.standardization)?;
            Some(resolve_tau(&st.apply(&first), config, None)?)
        }
        _ => None,
    };
    let horizons: Vec<usize> = (1..=config.h_max).collect();
    rolling_errors_with(series, config.window, config.h_max, |win, _| {
        let st = Standardizer::fit(win, config.standardization)?;
        let z = st.apply(win);
        let tau = resolve_tau(&z, config, once)?;
        let mut pred = predict_standardized(&z, config.rank, tau, &horizons)?;
        for (j, v) in pred.data_mut().iter_mut().enumerate() {
            *v = st.invert(j % p, *v);
        }
        Ok((pred, tau))
    })
}

/// `a - b` per origin and variable.
pub fn loss_differences(a: &ForecastErrors, b: &ForecastErrors) -> Result<Matrix> {
    if a.origins != b.origins || a.errors.shape() != b.errors.shape() {
        return Err(Error::ShapeMismatch("error tables cover different origins or variables".into()));
    }
    a.errors.sub(&b.errors)
}
