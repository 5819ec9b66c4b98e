//! Eigenvalue-ratio factor-number estimation.

use crate::error::{Error, Result};
use crate::estimator::decompose;
use crate::robust::{self, TruncationLevel};
use crate::tensor::{Matrix, TensorSeries};

/// How the ratio offset `rho` is chosen for each mode and pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoRule {
    /// `rho = 1 / mu_1` of the current projected matrix.
    ReciprocalLeading,
    /// `rho = c * mu_1`.
    RelativeToLeading(f64),
    Fixed(f64),
}

impl RhoRule {
    pub fn rho(self, leading: f64) -> Result<f64> {
        let rho = match self {
            RhoRule::ReciprocalLeading => 1.0 / leading,
            RhoRule::RelativeToLeading(c) => c * leading,
            RhoRule::Fixed(v) => v,
        };
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::DegenerateSpectrum(format!("ratio offset {rho} from leading eigenvalue {leading}")));
        }
        Ok(rho)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankConfig {
    /// Upper bounds `r_bar_k`; `None` uses `min(floor(p_k/2), p_k - 1, 20)`.
    pub r_bar: Option<Vec<usize>>,
    pub max_iterations: usize,
    pub rho_rule: RhoRule,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig { r_bar: None, max_iterations: 10, rho_rule: RhoRule::ReciprocalLeading }
    }
}

pub fn default_r_bar(p: usize) -> usize {
    (p / 2).min(p.saturating_sub(1)).min(20).max(1)
}

impl RankConfig {
    pub fn resolve_r_bar(&self, dims: &[usize]) -> Result<Vec<usize>> {
        let r_bar = match &self.r_bar {
            Some(v) => v.clone(),
            None => dims.iter().map(|&p| default_r_bar(p)).collect(),
        };
        if r_bar.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!("{} bounds for order-{} data", r_bar.len(), dims.len())));
        }
        for (&r, &p) in r_bar.iter().zip(dims) {
            if r == 0 || r + 1 > p {
                return Err(Error::InvalidArgument(format!("rank bound {r} invalid for extent {p}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("at least one pass is required".into()));
        }
        Ok(r_bar)
    }
}

/// `argmax_{1 <= j <= r_bar} mu_j / (mu_{j+1} + rho)`, ties to the smallest `j`.
pub fn ratio_select(eigvals: &[f64], r_bar: usize, rho: f64) -> Result<usize> {
    if r_bar == 0 || eigvals.len() < r_bar + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} eigenvalues supplied, {} needed",
            eigvals.len(),
            r_bar + 1
        )));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    let mut best = 1;
    let mut best_ratio = f64::NEG_INFINITY;
    for j in 1..=r_bar {
        let ratio = eigvals[j - 1] / (eigvals[j] + rho);
        if ratio > best_ratio {
            best_ratio = ratio;
            best = j;
        }
    }
    Ok(best)
}

/// One pass of the iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct RankPass {
    pub ranks: Vec<usize>,
    pub rho: Vec<f64>,
    /// Leading `r_bar_k + 1` eigenvalues of each projected matrix.
    pub eigvals: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEstimate {
    pub ranks: Vec<usize>,
    pub r_bar: Vec<usize>,
    pub trace: Vec<RankPass>,
    pub converged: bool,
}

/// Iterative rank estimation: starting from `r_bar`, each pass projects onto
/// the leading eigenvectors of the other modes' truncated second moments at
/// the previous ranks and applies [`ratio_select`].
pub fn estimate_ranks(series: &TensorSeries, tau: TruncationLevel, config: &RankConfig) -> Result<RankEstimate> {
    let dims = series.dims().to_vec();
    let r_bar = config.resolve_r_bar(&dims)?;
    let view = series.view();
    let mut ws = robust::Workspace::default();
    let full: Vec<Matrix> = robust::grams_all(&view, tau.as_option(), &mut ws)
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let (pairs, spectrum) = decompose(g, dims[k])?;
            if !(spectrum[0] > 0.0) {
                return Err(Error::DegenerateSpectrum(format!("mode {k} second moment is zero")));
            }
            Ok(pairs.vectors)
        })
        .collect::<Result<_>>()?;
    let mut current = r_bar.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_iterations {
        let e: Vec<Matrix> = full.iter().zip(&current).map(|(v, &r)| v.leading_columns(r)).collect();
        let mut pass = RankPass { ranks: Vec::new(), rho: Vec::new(), eigvals: Vec::new() };
        let grams = robust::projected_grams_all(&view, tau.as_option(), &e, &mut ws);
        for (k, g) in grams.iter().enumerate() {
            let (_, spectrum) = decompose(g, 1)?;
            let mu = &spectrum[..r_bar[k] + 1];
            let rho = config.rho_rule.rho(mu[0])?;
            pass.ranks.push(ratio_select(mu, r_bar[k], rho)?);
            pass.rho.push(rho);
            pass.eigvals.push(mu.to_vec());
        }
        let next = pass.ranks.clone();
        trace.push(pass);
        if next == current {
            converged = true;
            break;
        }
        current = next;
    }
    let ranks = trace.last().expect("at least one pass").ranks.clone();
    Ok(RankEstimate { ranks, r_bar, trace, converged })
}
