use rayon::prelude::*;

use rtfm_core::evaluation::ks_test_normal;
use rtfm_core::forecast::{Standardizer, TauChoice};
use rtfm_core::io::{read_panel_csv, read_series, save_series, save_table, Table, MAGIC};
use rtfm_core::simulate::{contaminate_draw, replication_seed, VectorScenario};
use rtfm_core::*;

use crate::config::{ForecastCv, KappaSpec, RanksSpec, RunConfig, TauSpec};
use crate::{CliError, CliResult};

/// Added to a replication seed to seed its outlier draw.
pub const OUTLIER_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

fn num(v: f64) -> String {
    v.to_string()
}

fn list(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn save(cfg: &RunConfig, file: &str, table: &Table) -> CliResult<()> {
    let path = cfg.out.join(file);
    save_table(&path, table).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn load_input(cfg: &RunConfig) -> CliResult<(Vec<String>, TensorSeries)> {
    let path = cfg.data.as_deref().ok_or_else(|| CliError::Config("an input file is required (--data)".into()))?;
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let (names, x) = if bytes.starts_with(MAGIC) {
        let x = read_series(&bytes[..])?;
        let names = if x.order() == 1 { (1..=x.dims()[0]).map(|i| format!("x{i}")).collect() } else { Vec::new() };
        (names, x)
    } else {
        read_panel_csv(&bytes[..])?
    };
    Ok((names, x))
}

fn rank_config(cfg: &RunConfig) -> RankConfig {
    RankConfig { r_bar: cfg.r_bar.clone(), rho_rule: cfg.rho, ..RankConfig::default() }
}

fn cv_config(cfg: &RunConfig) -> CvConfig {
    CvConfig { grid_size: cfg.grid_size, folds: cfg.folds, iterations: cfg.iterations }
}

fn fit_config(cfg: &RunConfig, ranks: &RanksSpec) -> FitConfig {
    let ranks = match ranks {
        RanksSpec::Auto => RankChoice::Auto(rank_config(cfg)),
        RanksSpec::Fixed(r) => RankChoice::Fixed(r.clone()),
    };
    FitConfig {
        ranks,
        tau: match cfg.tau {
            TauSpec::Cv => TauRule::Cv(cv_config(cfg)),
            TauSpec::Fixed(t) => TauRule::Fixed(t),
        },
        kappa: match cfg.kappa {
            KappaSpec::Tau => KappaRule::SameAsTau,
            KappaSpec::Fixed(k) => KappaRule::Fixed(k),
        },
        iterations: cfg.iterations,
    }
}

fn matrix_table(audit: &str, m: &Matrix, prefix: &str) -> Table {
    let names: Vec<String> = (1..=m.cols()).map(|j| format!("{prefix}{j}")).collect();
    let mut header = vec!["row"];
    header.extend(names.iter().map(String::as_str));
    let mut t = Table::new(audit, &header);
    for i in 0..m.rows() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(m.row(i).iter().map(|&v| num(v)));
        t.push(row);
    }
    t
}

fn tensor_dgp(cfg: &RunConfig, dims_default: Option<Vec<usize>>, seed: u64) -> CliResult<TensorDgpConfig> {
    let mut dgp = TensorDgpConfig::preset(&cfg.scenario, cfg.n)?;
    if let Some(d) = cfg.dims.clone().or(dims_default) {
        dgp = TensorDgpConfig::new(d, cfg.n);
    }
    if let Some(r) = &cfg.true_ranks {
        dgp.ranks = r.clone();
    }
    if let Some(a) = cfg.phi {
        dgp.phi = a;
    }
    if let Some(a) = cfg.psi {
        dgp.psi = a;
    }
    dgp.factor_dist = cfg.factor_dist;
    dgp.idio_dist = cfg.idio_dist;
    dgp.seed = seed;
    Ok(dgp)
}

fn generate(cfg: &RunConfig, seed: u64) -> CliResult<SimDraw> {
    let draw = if cfg.is_vector_scenario() {
        let p = match cfg.dims.as_deref() {
            None => 100,
            Some([p]) => *p,
            Some(d) => return Err(CliError::Config(format!("vector scenarios take one dimension, got {}", list(d)))),
        };
        let r = match cfg.true_ranks.as_deref() {
            None => 3,
            Some([r]) => *r,
            Some(r) => return Err(CliError::Config(format!("vector scenarios take one factor number, got {}", list(r)))),
        };
        let scenario: VectorScenario = cfg.scenario.parse()?;
        gen_vector(&VectorDgpConfig { p, n: cfg.n, r, dependence: cfg.dependence, scenario, seed })?
    } else {
        gen_tensor(&tensor_dgp(cfg, None, seed)?)?
    };
    match cfg.outliers {
        None => Ok(draw),
        Some(target) => {
            let oc = OutlierConfig { target, varrho: cfg.varrho, seed: seed.wrapping_add(OUTLIER_STREAM) };
            Ok(contaminate_draw(&draw, &oc)?.0)
        }
    }
}

struct Replication {
    seed: u64,
    tau: TruncationLevel,
    kappa: TruncationLevel,
    errors: Vec<f64>,
    common_all: f64,
    common_local: f64,
    ranks: Vec<usize>,
}

fn replicate(cfg: &RunConfig, audit: &str, r: u64) -> CliResult<Replication> {
    let seed = replication_seed(cfg.seed, r);
    let draw = generate(cfg, seed)?;
    if cfg.save_data {
        let path = cfg.out.join(format!("data_r{r:03}.rtfm"));
        save_series(&path, &draw.x).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        for (k, l) in draw.loadings.iter().enumerate() {
            save(cfg, &format!("truth_r{r:03}_mode{}.csv", k + 1), &matrix_table(audit, l, "lambda"))?;
        }
    }
    let truth: Vec<usize> = draw.loadings.iter().map(|l| l.cols()).collect();
    let spec = cfg.ranks.clone().unwrap_or(RanksSpec::Fixed(truth));
    let rep = fit(&draw.x, &fit_config(cfg, &spec))?;
    let errors = rep
        .loadings()
        .modes
        .iter()
        .zip(&draw.loadings)
        .map(|(m, l)| loading_error(&m.e, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(Replication {
        seed,
        tau: rep.tau,
        kappa: rep.kappa,
        errors,
        common_all: common_error(&rep.common, &draw.common, Window::All)?,
        common_local: common_error(&rep.common, &draw.common, Window::LOCAL)?,
        ranks: rep.ranks,
    })
}

pub fn simulate(cfg: &RunConfig, cmd: &str) -> CliResult<()> {
    let audit = cfg.audit(cmd);
    let reps = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| replicate(cfg, &audit, r))
        .collect::<CliResult<Vec<_>>>()?;
    let order = reps[0].errors.len();
    let mut metrics: Vec<String> = (1..=order).map(|k| format!("loading_error_mode{k}")).collect();
    metrics.push("common_error_all".into());
    metrics.push("common_error_local".into());
    metrics.extend((1..=order).map(|k| format!("rank_mode{k}")));
    let mut header = vec!["rep", "seed", "tau", "kappa"];
    header.extend(metrics.iter().map(String::as_str));
    let mut table = Table::new(audit.as_str(), &header);
    let mut rows = Vec::with_capacity(reps.len());
    for (r, rep) in reps.iter().enumerate() {
        let mut values = rep.errors.clone();
        values.push(rep.common_all);
        values.push(rep.common_local);
        values.extend(rep.ranks.iter().map(|&k| k as f64));
        let mut row = vec![r.to_string(), rep.seed.to_string(), rep.tau.to_string(), rep.kappa.to_string()];
        row.extend(values.iter().map(|&v| num(v)));
        table.push(row);
        rows.push(values);
    }
    save(cfg, "replications.csv", &table)?;
    let names: Vec<&str> = metrics.iter().map(String::as_str).collect();
    let summary = McSummary::from_rows(&cfg.scenario, &names, &rows)?;
    let mut st = Table::new(audit.as_str(), &["metric", "mean", "sd", "count"]);
    for (j, m) in summary.metrics.iter().enumerate() {
        st.push(vec![m.clone(), num(summary.mean[j]), num(summary.sd[j]), summary.count.to_string()]);
    }
    save(cfg, "summary.csv", &st)?;
    for (j, m) in summary.metrics.iter().enumerate() {
        println!("{m}: mean {:.6e} sd {:.6e}", summary.mean[j], summary.sd[j]);
    }
    Ok(())
}

fn cv_table(audit: &str, res: &CvResult) -> Table {
    let best = res.best_index();
    let mut t = Table::new(audit, &["index", "tau", "cv", "selected"]);
    for (i, (g, c)) in res.grid.iter().zip(&res.curve).enumerate() {
        t.push(vec![(i + 1).to_string(), num(*g), num(*c), u8::from(i == best).to_string()]);
    }
    t
}

fn rank_trace_table(audit: &str, est: &RankEstimate) -> Table {
    let mut t = Table::new(audit, &["pass", "mode", "j", "eigenvalue", "rho", "rank"]);
    for (pass, tr) in est.trace.iter().enumerate() {
        for (k, ev) in tr.eigvals.iter().enumerate() {
            for (j, v) in ev.iter().enumerate() {
                t.push(vec![
                    (pass + 1).to_string(),
                    (k + 1).to_string(),
                    (j + 1).to_string(),
                    num(*v),
                    num(tr.rho[k]),
                    tr.ranks[k].to_string(),
                ]);
            }
        }
    }
    t
}

pub fn estimate(cfg: &RunConfig, cmd: &str) -> CliResult<()> {
    let audit = cfg.audit(cmd);
    let (_, x) = load_input(cfg)?;
    let spec = cfg.ranks.clone().unwrap_or(RanksSpec::Auto);
    let rep = fit(&x, &fit_config(cfg, &spec))?;
    let mut eig = Table::new(audit.as_str(), &["stage", "mode", "j", "eigenvalue"]);
    for (s, set) in rep.stages.iter().enumerate() {
        for (k, m) in set.modes.iter().enumerate() {
            save(cfg, &format!("loadings_stage{s}_mode{}.csv", k + 1), &matrix_table(&audit, &m.lambda, "lambda"))?;
            for (j, v) in m.eigvals.iter().enumerate() {
                eig.push(vec![s.to_string(), (k + 1).to_string(), (j + 1).to_string(), num(*v)]);
            }
        }
    }
    save(cfg, "eigenvalues.csv", &eig)?;
    let f = rep.factors.series();
    let width: usize = f.dims().iter().product();
    let names: Vec<String> = (1..=width).map(|j| format!("f{j}")).collect();
    let mut header = vec!["t"];
    header.extend(names.iter().map(String::as_str));
    let mut ft = Table::new(audit.as_str(), &header);
    for t in 0..f.len() {
        let mut row = vec![(t + 1).to_string()];
        row.extend(f.frame(t).iter().map(|&v| num(v)));
        ft.push(row);
    }
    save(cfg, "factors.csv", &ft)?;
    if let Some(cv) = &rep.cv {
        save(cfg, "cv_curve.csv", &cv_table(&audit, cv))?;
    }
    if let Some(est) = &rep.rank_estimate {
        save(cfg, "rank_trace.csv", &rank_trace_table(&audit, est))?;
    }
    let mut st = Table::new(audit.as_str(), &["key", "value"]);
    for (k, v) in [
        ("dims", list(x.dims())),
        ("n", x.len().to_string()),
        ("ranks", list(&rep.ranks)),
        ("tau", rep.tau.to_string()),
        ("kappa", rep.kappa.to_string()),
        ("iterations", cfg.iterations.to_string()),
    ] {
        st.push(vec![k.to_string(), v]);
    }
    save(cfg, "estimate.csv", &st)?;
    println!("ranks={} tau={} kappa={}", list(&rep.ranks), rep.tau, rep.kappa);
    Ok(())
}

pub fn rank(cfg: &RunConfig, cmd: &str) -> CliResult<()> {
    if let Some(RanksSpec::Fixed(_)) = cfg.ranks {
        return Err(CliError::Config("rank selects factor numbers; fixed ranks make no sense here".into()));
    }
    let audit = cfg.audit(cmd);
    let (_, x) = load_input(cfg)?;
    let rc = rank_config(cfg);
    let tau = match cfg.tau {
        TauSpec::Fixed(t) => t,
        TauSpec::Cv => cv_tau(&x, &rc.resolve_r_bar(x.dims())?, &cv_config(cfg))?.tau,
    };
    let est = estimate_ranks(&x, tau, &rc)?;
    save(cfg, "rank_trace.csv", &rank_trace_table(&audit, &est))?;
    let mut t = Table::new(audit.as_str(), &["mode", "rank", "r_bar", "tau", "converged"]);
    for k in 0..est.ranks.len() {
        t.push(vec![
            (k + 1).to_string(),
            est.ranks[k].to_string(),
            est.r_bar[k].to_string(),
            tau.to_string(),
            est.converged.to_string(),
        ]);
    }
    save(cfg, "ranks.csv", &t)?;
    println!("{}", list(&est.ranks));
    Ok(())
}

pub fn cv(cfg: &RunConfig, cmd: &str) -> CliResult<()> {
    let audit = cfg.audit(cmd);
    let (_, x) = load_input(cfg)?;
    let ranks = match &cfg.ranks {
        Some(RanksSpec::Fixed(r)) => r.clone(),
        _ => rank_config(cfg).resolve_r_bar(x.dims())?,
    };
    let res = cv_tau(&x, &ranks, &cv_config(cfg))?;
    save(cfg, "cv_curve.csv", &cv_table(&audit, &res))?;
    println!("tau={}", res.tau);
    Ok(())
}

fn forecast_rank(cfg: &RunConfig, x: &TensorSeries) -> CliResult<usize> {
    match &cfg.ranks {
        Some(RanksSpec::Fixed(r)) if r.len() == 1 => Ok(r[0]),
        Some(RanksSpec::Fixed(r)) => Err(CliError::Config(format!("forecasting takes one factor number, got {}", list(r)))),
        // selected on the first window only, so no later data is used
        _ => {
            let first = x.slice(0..cfg.window.min(x.len()))?;
            let z = Standardizer::fit(&first, cfg.standardization)?.apply(&first);
            let rc = rank_config(cfg);
            let tau = match cfg.tau {
                TauSpec::Fixed(t) => t,
                TauSpec::Cv => cv_tau(&z, &rc.resolve_r_bar(z.dims())?, &cv_config(cfg))?.tau,
            };
            Ok(estimate_ranks(&z, tau, &rc)?.ranks[0])
        }
    }
}

fn errors_table(audit: &str, names: &[String], e: &ForecastErrors, with_tau: bool) -> Table {
    let mut header = vec!["t"];
    if with_tau {
        header.push("tau");
    }
    header.extend(names.iter().map(String::as_str));
    let mut t = Table::new(audit, &header);
    for (row, &o) in e.origins.iter().enumerate() {
        let mut r = vec![(o + 1).to_string()];
        if with_tau {
            r.push(e.taus[row].to_string());
        }
        r.extend(e.errors.row(row).iter().map(|&v| num(v)));
        t.push(r);
    }
    t
}

pub fn forecast(cfg: &RunConfig, cmd: &str) -> CliResult<()> {
    if let KappaSpec::Fixed(_) = cfg.kappa {
        return Err(CliError::Config("forecasting truncates factors at tau; kappa must be 'tau'".into()));
    }
    let audit = cfg.audit(cmd);
    let (names, x) = load_input(cfg)?;
    if x.order() != 1 {
        return Err(CliError::Config(format!("forecasting needs a vector panel, got an order-{} series", x.order())));
    }
    let rank = forecast_rank(cfg, &x)?;
    let tau = match (cfg.tau, cfg.forecast_cv) {
        (TauSpec::Fixed(t), _) => TauChoice::Fixed(t),
        (TauSpec::Cv, ForecastCv::Once) => TauChoice::CvOnce,
        (TauSpec::Cv, ForecastCv::PerWindow) => TauChoice::CvPerWindow,
    };
    let fc = ForecastConfig {
        window: cfg.window,
        h_max: cfg.horizons,
        rank,
        tau,
        standardization: cfg.standardization,
        cv: cv_config(cfg),
    };
    let trunc = rolling_errors(&x, &fc)?;
    let pca = rolling_errors(&x, &ForecastConfig { tau: TauChoice::Fixed(TruncationLevel::INFINITE), ..fc })?;
    let diff = loss_differences(&trunc, &pca)?;
    save(cfg, "errors_trunc.csv", &errors_table(&audit, &names, &trunc, true))?;
    save(cfg, "errors_pca.csv", &errors_table(&audit, &names, &pca, false))?;
    let d = ForecastErrors { errors: diff, ..trunc.clone() };
    save(cfg, "loss_differences.csv", &errors_table(&audit, &names, &d, false))?;
    let mut st = Table::new(audit.as_str(), &["variable", "mean_trunc", "mean_pca", "difference"]);
    let mut wins = 0;
    for (i, name) in names.iter().enumerate() {
        if trunc.mean[i] < pca.mean[i] {
            wins += 1;
        }
        st.push(vec![name.clone(), num(trunc.mean[i]), num(pca.mean[i]), num(trunc.mean[i] - pca.mean[i])]);
    }
    save(cfg, "forecast_summary.csv", &st)?;
    println!(
        "rank={rank} origins={} truncated forecaster better on {wins} of {} variables",
        trunc.origins.len(),
        names.len()
    );
    Ok(())
}

struct DiagnoseRep {
    scores: Vec<rtfm_core::evaluation::ZScore>,
    omitted: usize,
}

pub fn diagnose(cfg: &RunConfig, cmd: &str) -> CliResult<()> {
    if cfg.is_vector_scenario() {
        return Err(CliError::Config("the normality diagnostic needs a tensor scenario".into()));
    }
    match &cfg.ranks {
        Some(RanksSpec::Fixed(r)) if r.iter().all(|&k| k == 1) => {}
        None => {}
        _ => return Err(CliError::Config("the normality diagnostic uses one factor per mode (ranks = 1,...,1)".into())),
    }
    let audit = cfg.audit(cmd);
    let order = tensor_dgp(cfg, None, 0)?.dims.len();
    let reps = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut dgp = tensor_dgp(cfg, None, replication_seed(cfg.seed, r))?;
            dgp.ranks = vec![1; dgp.dims.len()];
            dgp.phi = cfg.phi.unwrap_or(0.0);
            dgp.psi = cfg.psi.unwrap_or(0.0);
            dgp.identified_loadings = true;
            let mut draw = gen_tensor(&dgp)?;
            if let Some(target) = cfg.outliers {
                let oc = OutlierConfig { target, varrho: cfg.varrho, seed: dgp.seed.wrapping_add(OUTLIER_STREAM) };
                draw = contaminate_draw(&draw, &oc)?.0;
            }
            let ones = vec![1; dgp.dims.len()];
            let tau = match cfg.tau {
                TauSpec::Fixed(t) => t,
                TauSpec::Cv => cv_tau(&draw.x, &ones, &cv_config(cfg))?.tau,
            };
            let truths: Vec<Vec<f64>> = draw.loadings.iter().map(|l| l.column(0)).collect();
            let res = normality_diagnostic(&draw.x, &truths, tau)?;
            Ok(DiagnoseRep { scores: res.scores, omitted: res.omitted.len() })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut zt = Table::new(audit.as_str(), &["rep", "mode", "index", "z", "deviation", "phi"]);
    let mut z = Vec::new();
    let mut omitted = 0;
    let mut dev = vec![Vec::new(); order];
    for (r, rep) in reps.iter().enumerate() {
        omitted += rep.omitted;
        for s in &rep.scores {
            zt.push(vec![
                r.to_string(),
                (s.mode + 1).to_string(),
                (s.index + 1).to_string(),
                num(s.z),
                num(s.deviation),
                num(s.phi),
            ]);
            z.push(s.z);
            dev[s.mode].push(s.deviation);
        }
    }
    save(cfg, "zscores.csv", &zt)?;
    let (stat, p) = ks_test_normal(&z)?;
    let mut st = Table::new(audit.as_str(), &["metric", "value"]);
    st.push(vec!["scores".into(), z.len().to_string()]);
    st.push(vec!["omitted".into(), omitted.to_string()]);
    st.push(vec!["ks_statistic".into(), num(stat)]);
    st.push(vec!["ks_pvalue".into(), num(p)]);
    for (k, d) in dev.iter().enumerate() {
        let m = d.iter().sum::<f64>() / d.len() as f64;
        let sd = (d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (d.len() as f64 - 1.0)).sqrt();
        st.push(vec![format!("sd_deviation_mode{}", k + 1), num(sd)]);
    }
    save(cfg, "diagnose_summary.csv", &st)?;
    println!("scores={} omitted={omitted} ks={stat:.4} p={p:.4}", z.len());
    Ok(())
}
