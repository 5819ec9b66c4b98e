//! End-to-end fit: optional rank selection and truncation tuning, staged
//! loadings, factors and common component.

use crate::error::Result;
use crate::estimator::{common_component, estimate_factors, estimate_loadings, FactorSeries, LoadingSet};
use crate::rank::{estimate_ranks, RankConfig, RankEstimate};
use crate::robust::TruncationLevel;
use crate::tensor::TensorSeries;
use crate::tuning::{cv_tau, CvConfig, CvResult};

#[derive(Debug, Clone, PartialEq)]
pub enum RankChoice {
    Fixed(Vec<usize>),
    Auto(RankConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TauRule {
    Fixed(TruncationLevel),
    Cv(CvConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaRule {
    SameAsTau,
    Fixed(TruncationLevel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub ranks: RankChoice,
    pub tau: TauRule,
    pub kappa: KappaRule,
    pub iterations: usize,
}

impl FitConfig {
    pub fn new(ranks: RankChoice) -> Self {
        FitConfig { ranks, tau: TauRule::Cv(CvConfig::default()), kappa: KappaRule::SameAsTau, iterations: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    /// Loadings at stages `0..=iterations`.
    pub stages: Vec<LoadingSet>,
    pub factors: FactorSeries,
    pub common: TensorSeries,
    pub ranks: Vec<usize>,
    pub tau: TruncationLevel,
    pub kappa: TruncationLevel,
    pub rank_estimate: Option<RankEstimate>,
    pub cv: Option<CvResult>,
}

impl EstimationReport {
    pub fn loadings(&self) -> &LoadingSet {
        self.stages.last().expect("at least one stage")
    }
}

/// With automatic ranks and a cross-validated level, the level is tuned
/// once at the rank bounds and rank selection then runs at that level.
pub fn fit(series: &TensorSeries, config: &FitConfig) -> Result<EstimationReport> {
    let cv_ranks = match &config.ranks {
        RankChoice::Fixed(r) => r.clone(),
        RankChoice::Auto(rc) => rc.resolve_r_bar(series.dims())?,
    };
    let (tau, cv) = match &config.tau {
        TauRule::Fixed(t) => (*t, None),
        TauRule::Cv(c) => {
            let res = cv_tau(series, &cv_ranks, c)?;
            (res.tau, Some(res))
        }
    };
    let (ranks, rank_estimate) = match &config.ranks {
        RankChoice::Fixed(r) => (r.clone(), None),
        RankChoice::Auto(rc) => {
            let est = estimate_ranks(series, tau, rc)?;
            (est.ranks.clone(), Some(est))
        }
    };
    let kappa = match config.kappa {
        KappaRule::SameAsTau => tau,
        KappaRule::Fixed(k) => k,
    };
    let stages = estimate_loadings(series, &ranks, tau, config.iterations)?;
    let factors = estimate_factors(series, stages.last().expect("nonempty"), kappa)?;
    let common = common_component(&factors, stages.last().expect("nonempty"))?;
    Ok(EstimationReport { stages, factors, common, ranks, tau, kappa, rank_estimate, cv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{common_error, Window};
    use crate::tensor::Matrix;

    #[test]
    fn fixed_everything_matches_direct_calls() {
        let dims = [4, 5];
        let data: Vec<f64> = (0..20 * 12).map(|i| ((i * 31 % 17) as f64 - 8.0) / 3.0).collect();
        let x = TensorSeries::new(dims.to_vec(), 12, data).unwrap();
        let tau = TruncationLevel::new(2.0).unwrap();
        let mut cfg = FitConfig::new(RankChoice::Fixed(vec![2, 2]));
        cfg.tau = TauRule::Fixed(tau);
        let rep = fit(&x, &cfg).unwrap();
        let st = estimate_loadings(&x, &[2, 2], tau, 2).unwrap();
        assert_eq!(rep.stages, st);
        assert_eq!(rep.kappa, tau);
        assert!(rep.cv.is_none() && rep.rank_estimate.is_none());
    }

    #[test]
    fn auto_on_noiseless_data() {
        let (p, q, n) = (8, 6, 40);
        let a = Matrix::from_fn(p, 2, |i, j| ((i + 1) as f64 * (j as f64 + 0.5)).sin());
        let b = Matrix::from_fn(q, 1, |i, _| (i as f64 + 1.0).cos() + 1.5);
        let mut data = Vec::with_capacity(n * p * q);
        for t in 0..n {
            let f = [((t * 7 % 11) as f64) - 5.0, ((t * 3 % 7) as f64) - 3.0];
            for jq in 0..q {
                for ip in 0..p {
                    data.push((a[(ip, 0)] * f[0] + a[(ip, 1)] * f[1]) * b[(jq, 0)]);
                }
            }
        }
        let x = TensorSeries::new(vec![p, q], n, data).unwrap();
        let cfg = FitConfig::new(RankChoice::Auto(RankConfig::default()));
        let rep = fit(&x, &cfg).unwrap();
        assert_eq!(rep.ranks, vec![2, 1]);
        assert_eq!(rep.cv.as_ref().unwrap().curve.len(), 50);
        let mut exact = cfg.clone();
        exact.tau = TauRule::Fixed(TruncationLevel::INFINITE);
        let rep = fit(&x, &exact).unwrap();
        assert_eq!(rep.ranks, vec![2, 1]);
        assert!(common_error(&rep.common, &x, Window::All).unwrap() < 1e-10);
    }
}
