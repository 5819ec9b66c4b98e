//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;

use rtfm_core::evaluation::{ks_test_normal, normality_diagnostic};
use rtfm_core::forecast::{forecast_window, rolling_errors, rolling_errors_with, ForecastConfig, Standardization};
use rtfm_core::simulate::{contaminate_draw, replication_seed, OutlierTarget};
use rtfm_core::*;

fn report(id: &str, name: &str, pass: bool, detail: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{id} {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    let _ = out.flush();
    assert!(pass, "{id} failed: {detail}");
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn xorshift(seed: u64) -> impl FnMut() -> f64 {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }
}

fn orthonormalize(mut a: Matrix) -> Matrix {
    for j in 0..a.cols() {
        let mut v = a.column(j);
        for i in 0..j {
            let q = a.column(i);
            let d: f64 = v.iter().zip(&q).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(&q).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        a.set_column(j, &v);
    }
    a
}

#[test]
fn c1_exact_recovery() {
    let start = Instant::now();
    let dims = [12, 10, 8];
    let ranks = [2, 3, 1];
    let n = 50;
    let mut u = xorshift(17);
    // Loadings sqrt(p_k) times orthonormal columns, unit-variance factors.
    let loadings: Vec<Matrix> = dims
        .iter()
        .zip(&ranks)
        .map(|(&p, &r)| orthonormalize(Matrix::from_fn(p, r, |_, _| u())).scaled((p as f64).sqrt()))
        .collect();
    let core: usize = ranks.iter().product();
    let factors = TensorSeries::new(ranks.to_vec(), n, (0..n * core).map(|_| u() * 3f64.sqrt()).collect()).unwrap();
    let lambdas: Vec<Matrix> = loadings.clone();
    let frames: Vec<Tensor> = factors.tensors().iter().map(|f| f.multi_mode_product(&lambdas).unwrap()).collect();
    let x = TensorSeries::from_tensors(&frames).unwrap();

    let inf = TruncationLevel::INFINITE;
    let rank_est = estimate_ranks(&x, inf, &RankConfig::default()).unwrap();
    let stages = estimate_loadings(&x, &ranks, inf, 2).unwrap();
    let set = stages.last().unwrap();
    let f = estimate_factors(&x, set, inf).unwrap();
    let chi = common_component(&f, set).unwrap();
    let errs: Vec<f64> = (0..3).map(|k| loading_error(&set.modes[k].e, &loadings[k]).unwrap()).collect();
    let ce = common_error(&chi, &x, Window::All).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = errs.iter().all(|&e| e <= 1e-8) && ce <= 1e-10 && rank_est.ranks == ranks && secs < 5.0;
    report(
        "C1",
        "exact recovery on noiseless rank-(2,3,1) data",
        pass,
        format!("loading errors {:?}, common error {ce:.2e}, ranks {:?}, {secs:.2} s", errs.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>(), rank_est.ranks),
    );
}

/// Per replication: stage-2 loading errors, common error, selected ranks.
struct T3Rep {
    errors: [f64; 3],
    common: f64,
    ranks: Vec<usize>,
    stage0: [f64; 3],
}

const T3_REPS: u64 = 50;

fn t3_runs() -> &'static (Vec<T3Rep>, f64) {
    static RUNS: OnceLock<(Vec<T3Rep>, f64)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let reps = (0..T3_REPS)
            .into_par_iter()
            .map(|r| {
                let mut cfg = TensorDgpConfig::preset("T3", 500).unwrap();
                cfg.seed = replication_seed(20_500, r);
                let d = gen_tensor(&cfg).unwrap();
                let cv = cv_tau(&d.x, &[3, 3, 3], &CvConfig::default()).unwrap();
                let stages = estimate_loadings(&d.x, &[3, 3, 3], cv.tau, 2).unwrap();
                let set = stages.last().unwrap();
                let f = estimate_factors(&d.x, set, cv.tau).unwrap();
                let chi = common_component(&f, set).unwrap();
                let err = |s: &LoadingSet, k: usize| loading_error(&s.modes[k].e, &d.loadings[k]).unwrap();
                let ranks = estimate_ranks(&d.x, cv.tau, &RankConfig::default()).unwrap().ranks;
                T3Rep {
                    errors: [err(set, 0), err(set, 1), err(set, 2)],
                    common: common_error(&chi, &d.common, Window::All).unwrap(),
                    ranks,
                    stage0: [err(&stages[0], 0), err(&stages[0], 1), err(&stages[0], 2)],
                }
            })
            .collect();
        (reps, start.elapsed().as_secs_f64())
    })
}

#[test]
fn c2_t3_loading_errors() {
    let (reps, secs) = t3_runs();
    let target = [0.00245, 0.00306, 0.00362];
    let means: Vec<f64> = (0..3).map(|k| mean(&reps.iter().map(|r| r.errors[k]).collect::<Vec<_>>())).collect();
    let pass = means.iter().zip(&target).all(|(&m, &t)| within(m, t, 0.4));
    report(
        "C2",
        "T3 Gaussian n=500 mean loading errors within 40% of 0.00245/0.00306/0.00362",
        pass,
        format!("means {means:.5?} over {} replications, {secs:.0} s shared with C3/C4", reps.len()),
    );
}

#[test]
fn c3_t3_common_error() {
    let (reps, _) = t3_runs();
    let m = mean(&reps.iter().map(|r| r.common).collect::<Vec<_>>());
    report(
        "C3",
        "T3 Gaussian n=500 mean common-component error within 40% of 1.222e-3",
        within(m, 1.222e-3, 0.4),
        format!("mean {m:.4e} over {} replications", reps.len()),
    );
}

#[test]
fn c4_t3_rank_selection() {
    let (reps, _) = t3_runs();
    let freq: Vec<f64> =
        (0..3).map(|k| reps.iter().filter(|r| r.ranks[k] == 3).count() as f64 / reps.len() as f64).collect();
    report(
        "C4",
        "T3 Gaussian n=500 P(rank = 3) >= 0.95 per mode",
        freq.iter().all(|&f| f >= 0.95),
        format!("frequencies {freq:.2?} over {} replications", reps.len()),
    );
}

#[test]
fn stage_two_improves_on_stage_zero() {
    let (reps, _) = t3_runs();
    let total = reps.len() * 3;
    let better = reps.iter().map(|r| (0..3).filter(|&k| r.errors[k] <= r.stage0[k]).count()).sum::<usize>();
    let frac = better as f64 / total as f64;
    report(
        "extra",
        "stage-2 loading error <= stage-0 error in >= 80% of (replication, mode) pairs",
        frac >= 0.8,
        format!("{frac:.2} of {total}"),
    );
}

#[test]
fn c5_outlier_robustness() {
    let reps: Vec<[f64; 4]> = (0..30u64)
        .into_par_iter()
        .map(|r| {
            let mut cfg = TensorDgpConfig::preset("T3", 200).unwrap();
            cfg.seed = replication_seed(20_200, r);
            let clean = gen_tensor(&cfg).unwrap();
            let o1 = OutlierConfig { target: OutlierTarget::Idiosyncratic, varrho: 0.01, seed: replication_seed(91_200, r) };
            let (dirty, _) = contaminate_draw(&clean, &o1).unwrap();
            let err = |d: &SimDraw, tau: TruncationLevel| {
                let set = estimate_loadings(&d.x, &[3, 3, 3], tau, 2).unwrap().pop().unwrap();
                (0..3).map(|k| loading_error(&set.modes[k].e, &d.loadings[k]).unwrap()).sum::<f64>() / 3.0
            };
            let trunc = |d: &SimDraw| err(d, cv_tau(&d.x, &[3, 3, 3], &CvConfig::default()).unwrap().tau);
            let inf = TruncationLevel::INFINITE;
            [trunc(&clean), trunc(&dirty), err(&clean, inf), err(&dirty, inf)]
        })
        .collect();
    let m: Vec<f64> = (0..4).map(|j| mean(&reps.iter().map(|r| r[j]).collect::<Vec<_>>())).collect();
    let trunc_rise = m[1] / m[0] - 1.0;
    let inf_rise = m[3] / m[2] - 1.0;
    report(
        "C5",
        "O1 at 1%: truncated error rises < 50%, untruncated rises > 100%",
        trunc_rise < 0.5 && inf_rise > 1.0,
        format!(
            "truncated {:.5} -> {:.5} ({:+.0}%), untruncated {:.5} -> {:.5} ({:+.0}%), 30 replications",
            m[0],
            m[1],
            100.0 * trunc_rise,
            m[2],
            m[3],
            100.0 * inf_rise
        ),
    );
}

/// Pooled z-scores and per-mode deviations of the rank-one diagnostic.
fn normality_runs(n: usize, reps: u64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let runs: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut cfg = TensorDgpConfig::new(vec![20, 30, 40], n);
            cfg.ranks = vec![1, 1, 1];
            cfg.phi = 0.0;
            cfg.psi = 0.0;
            cfg.identified_loadings = true;
            cfg.seed = replication_seed(30_000 + n as u64, r);
            let d = gen_tensor(&cfg).unwrap();
            let tau = cv_tau(&d.x, &[1, 1, 1], &CvConfig::default()).unwrap().tau;
            let truths: Vec<Vec<f64>> = d.loadings.iter().map(|l| l.column(0)).collect();
            let res = normality_diagnostic(&d.x, &truths, tau).unwrap();
            let mut dev = vec![Vec::new(); 3];
            for s in &res.scores {
                dev[s.mode].push(s.deviation);
            }
            (res.scores.iter().map(|s| s.z).collect(), dev)
        })
        .collect();
    let mut z = Vec::new();
    let mut dev = vec![Vec::new(); 3];
    for (zz, dd) in runs {
        z.extend(zz);
        for k in 0..3 {
            dev[k].extend(&dd[k]);
        }
    }
    (z, dev)
}

#[test]
fn c6_asymptotic_normality() {
    let (z, dev_big) = normality_runs(500, 100);
    let (_, dev_small) = normality_runs(125, 100);
    let (d, p) = ks_test_normal(&z).unwrap();
    let ratios: Vec<f64> = (0..3).map(|k| sd(&dev_small[k]) / sd(&dev_big[k])).collect();
    let pass = p > 0.01 && ratios.iter().all(|&r| within(r, 2.0, 0.25));
    report(
        "C6",
        "rank-one z-scores pass KS at 0.01; deviation SD halves when n quadruples (2 +/- 25%)",
        pass,
        format!("KS D={d:.4} p={p:.3} over {} scores; SD ratios n=125/n=500 per mode {ratios:.3?}", z.len()),
    );
}

#[test]
fn c7_property_suites_run_quickly() {
    // the property suite is a sibling test executable in the same directory
    let exe = std::env::current_exe().unwrap();
    let dir = exe.parent().unwrap();
    let candidate = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            let name = p.file_name().and_then(|s| s.to_str()).unwrap_or("");
            name.starts_with("properties-") && p.extension().is_none_or(|x| x == "exe")
        })
        .max_by_key(|p| p.metadata().and_then(|m| m.modified()).ok());
    let Some(bin) = candidate else {
        report("C7", "property suites finish in < 60 s", false, "property test executable not built".into());
        return;
    };
    let start = Instant::now();
    let out = std::process::Command::new(&bin).arg("--test-threads=1").output().unwrap();
    let secs = start.elapsed().as_secs_f64();
    let text = String::from_utf8_lossy(&out.stdout);
    let summary = text.lines().find(|l| l.starts_with("test result")).unwrap_or("no summary").to_string();
    report(
        "C7",
        "property suites finish in < 60 s",
        out.status.success() && secs < 60.0,
        format!("{summary}; {secs:.1} s"),
    );
}

#[test]
fn c8_forecasting_sanity() {
    let mut cfg = TensorDgpConfig::new(vec![20], 400);
    cfg.ranks = vec![1];
    cfg.phi = 0.7;
    cfg.seed = 8_400;
    let d = gen_tensor(&cfg).unwrap();
    let mut fc = ForecastConfig::new(120, 1);
    fc.h_max = 1;
    let robust = rolling_errors(&d.x, &fc).unwrap();
    let zero = rolling_errors_with(&d.x, 120, 1, |_, _| Ok((Matrix::zeros(1, 20), TruncationLevel::INFINITE))).unwrap();
    let (a, b) = (mean(&robust.mean), mean(&zero.mean));
    let window = d.x.slice(280..400).unwrap();
    let nowcast = forecast_window(&window, &[0], 20, TruncationLevel::INFINITE, Standardization::MeanSd).unwrap();
    let gap = (0..20).map(|i| (nowcast[(0, i)] - window.frame(119)[i]).abs()).fold(0.0, f64::max);
    report(
        "C8",
        "h=1 forecasts beat the zero forecast; full-rank h=0 identity within 1e-8",
        a < b && gap <= 1e-8,
        format!("mean |error| {a:.4} vs zero forecast {b:.4} over {} windows; identity gap {gap:.1e}", robust.origins.len()),
    );
}
