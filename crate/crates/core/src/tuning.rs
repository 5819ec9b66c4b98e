//! Truncation-level grid and cross-validation over contiguous time folds.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{check_ranks, loadings_from_grams};
use crate::robust::{
    finish_grams, for_each_chunk, grams_chunk, projected_grams_chunk, zero_grams, TruncationLevel, Workspace,
};
use crate::tensor::{Matrix, TensorSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub grid_size: usize,
    pub folds: usize,
    pub iterations: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { grid_size: 50, folds: 3, iterations: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub tau: TruncationLevel,
    /// Descending grid.
    pub grid: Vec<f64>,
    pub curve: Vec<f64>,
}

impl CvResult {
    pub fn best_index(&self) -> usize {
        self.grid.iter().position(|&g| g == self.tau.value()).expect("chosen level is on the grid")
    }
}

/// Median of `v` (average of the two central order statistics for even
/// lengths). Reorders `v`.
pub fn median_in_place(v: &mut [f64]) -> f64 {
    let n = v.len();
    assert!(n > 0, "median of an empty sample");
    let (_, hi, _) = v.select_nth_unstable_by(n / 2, f64::total_cmp);
    let hi = *hi;
    if n % 2 == 1 {
        return hi;
    }
    let lo = v[..n / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    0.5 * (lo + hi)
}

/// `m` levels equally spaced in log scale from `max |X|` down to
/// `median |X|`.
pub fn tau_grid(series: &TensorSeries, m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {m}")));
    }
    let mut abs: Vec<f64> = series.data().iter().map(|v| v.abs()).collect();
    if abs.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("non-finite entries".into()));
    }
    let max = abs.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::DegenerateData("all entries are zero".into()));
    }
    let med = median_in_place(&mut abs);
    if med == 0.0 {
        return Err(Error::DegenerateData("median absolute entry is zero".into()));
    }
    let (a, b) = (max.ln(), med.ln());
    let mut grid: Vec<f64> = (0..m).map(|j| (a - (a - b) * j as f64 / (m - 1) as f64).exp()).collect();
    grid[0] = max;
    grid[m - 1] = med;
    Ok(grid)
}

/// Contiguous folds of length `ceil(n / folds)`; the last may be short.
pub fn fold_ranges(n: usize, folds: usize) -> Result<Vec<Range<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    let len = n.div_ceil(folds);
    if len < 2 {
        return Err(Error::InsufficientSample(format!("{n} time points cannot fill {folds} folds")));
    }
    let out: Vec<Range<usize>> = (0..folds).map(|l| (l * len).min(n)..((l + 1) * len).min(n)).collect();
    if out.iter().any(|r| r.is_empty()) {
        return Err(Error::InsufficientSample(format!("{n} time points leave an empty fold among {folds}")));
    }
    Ok(out)
}

/// `1 - ||A^T B||_F^2 / r` for orthonormal `p x r` matrices.
pub fn subspace_mismatch(a: &Matrix, b: &Matrix) -> Result<f64> {
    let c = a.t_matmul(b)?;
    let r = a.cols() as f64;
    Ok((1.0 - c.data().iter().map(|v| v * v).sum::<f64>() / r).clamp(0.0, 1.0))
}

/// Chooses the truncation level minimizing the summed loading-space
/// disagreement between each fold and its complement.
pub fn cv_tau(series: &TensorSeries, ranks: &[usize], config: &CvConfig) -> Result<CvResult> {
    check_ranks(series.dims(), ranks)?;
    let grid = tau_grid(series, config.grid_size)?;
    let folds = fold_ranges(series.len(), config.folds)?;
    let curve = grid
        .par_iter()
        .map_init(Workspace::default, |ws, &t| cv_score(series, t, &folds, ranks, config.iterations, ws))
        .collect::<Result<Vec<f64>>>()?;
    // ties go to the larger level, i.e. the earlier grid point
    let mut best = 0;
    for (j, &c) in curve.iter().enumerate() {
        if c < curve[best] {
            best = j;
        }
    }
    Ok(CvResult { tau: TruncationLevel::new(grid[best])?, grid, curve })
}

/// Fit `2l` uses fold `l` alone, fit `2l + 1` its complement. Every pass over
/// the data feeds all fits at once.
fn cv_score(
    series: &TensorSeries,
    tau: f64,
    folds: &[Range<usize>],
    ranks: &[usize],
    iterations: usize,
    ws: &mut Workspace,
) -> Result<f64> {
    let dims = series.dims();
    let frame = series.frame_len();
    let data = series.data();
    let n = series.len();
    let nf = folds.len();
    let uses = |fit: usize, l: usize| if fit % 2 == 0 { fit / 2 == l } else { fit / 2 != l };
    let frames = |fit: usize| if fit % 2 == 0 { folds[fit / 2].len() } else { n - folds[fit / 2].len() };
    let mut chunk = Vec::new();

    let mut fold_acc: Vec<Vec<Vec<f64>>> = (0..nf).map(|_| zero_grams(dims)).collect();
    for (l, f) in folds.iter().enumerate() {
        let block = &data[f.start * frame..f.end * frame];
        let acc = &mut fold_acc[l];
        for_each_chunk(block, frame, Some(tau), &mut chunk, |c, nb| grams_chunk(c, dims, nb, acc, ws));
    }
    let mut fits = Vec::with_capacity(2 * nf);
    for fit in 0..2 * nf {
        let mut acc = zero_grams(dims);
        for (l, fa) in fold_acc.iter().enumerate() {
            if uses(fit, l) {
                for (a, g) in acc.iter_mut().zip(fa) {
                    a.iter_mut().zip(g).for_each(|(x, y)| *x += y);
                }
            }
        }
        fits.push(loadings_from_grams(&finish_grams(acc, frames(fit), dims), ranks)?);
    }

    if dims.len() > 1 {
        for _ in 0..iterations {
            let et: Vec<Vec<Matrix>> =
                fits.iter().map(|f| f.modes.iter().map(|m| m.e.transpose()).collect()).collect();
            let mut acc: Vec<Vec<Vec<f64>>> = (0..2 * nf).map(|_| zero_grams(dims)).collect();
            for (l, f) in folds.iter().enumerate() {
                let block = &data[f.start * frame..f.end * frame];
                let ets: Vec<&[Matrix]> = (0..2 * nf).filter(|&f| uses(f, l)).map(|f| &et[f][..]).collect();
                let mut accs: Vec<&mut Vec<Vec<f64>>> =
                    acc.iter_mut().enumerate().filter(|(f, _)| uses(*f, l)).map(|(_, a)| a).collect();
                for_each_chunk(block, frame, Some(tau), &mut chunk, |c, nb| {
                    projected_grams_chunk(c, dims, nb, &ets, &mut accs, ws)
                });
            }
            fits = acc
                .into_iter()
                .enumerate()
                .map(|(fit, a)| loadings_from_grams(&finish_grams(a, frames(fit), dims), ranks))
                .collect::<Result<_>>()?;
        }
    }

    let mut score = 0.0;
    for l in 0..nf {
        for k in 0..dims.len() {
            score += subspace_mismatch(&fits[2 * l].modes[k].e, &fits[2 * l + 1].modes[k].e)?;
        }
    }
    Ok(score)
}
