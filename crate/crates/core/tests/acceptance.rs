//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! The run always exits 0 so that a criterion that is honestly out of reach
//! shows up as a FAIL line rather than aborting the rest of the test suite;
//! set `HAZODE_ACCEPTANCE_STRICT=1` to exit non-zero on any FAIL.
//! `HAZODE_ACCEPTANCE_ONLY=1,5,9` runs a subset.

use hazode::curves::{reference_curves, CurveSource};
use hazode::dataset::{ingest_survival_data, StatusConvention, TimeUnit};
use hazode::inference::{
    fit_lognormal, fit_weibull, init_from_survival, mgf, mle_fit, FitConfig, MgfConfig,
    ModelFamily, DEFAULT_WINDOW,
};
use hazode::mcmc::{
    batch_means_se, monte_carlo_study, run_chain, ChainConfig, PriorSpec, StudyConfig,
};
use hazode::models::{
    logistic_first_order_cumhaz, logistic_first_order_hazard, DampedOscParams,
    ExpInteractionParams, ModelSpec, PopDynParams, SinusoidalParams,
};
use hazode::ode::{Channel, DEFAULT_DT};
use hazode::rng::CounterRng;
use hazode::sampling::{
    inversion_target, ks_p_value, ks_statistic, simulate_dataset, simulate_event_times, Censoring,
    CumHazardInverter, InversionConfig,
};
use std::f64::consts::PI;
use std::time::Instant;

/// Fixed before any run; every stochastic criterion uses it.
const SEED: u64 = 2024;

type Exact = Box<dyn Fn(f64) -> f64>;
/// (id, name, time budget in seconds, check)
type Criterion = (usize, &'static str, f64, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn underdamped() -> ModelSpec {
    ModelSpec::Damped(DampedOscParams::new(0.5, 1.0, 0.2, 0.1, 0.3).unwrap())
}

fn reference_sinusoidal() -> ModelSpec {
    ModelSpec::Sinusoidal(SinusoidalParams::new(0.2 * PI, 0.6, 0.1, 0.2).unwrap())
}

fn exp_growth() -> ModelSpec {
    ModelSpec::ExpInteraction(ExpInteractionParams::new(0.1, 0.0, 0.4, 0.1).unwrap())
}

fn boundary() -> ModelSpec {
    ModelSpec::ExpInteraction(ExpInteractionParams::boundary(0.1, -0.1).unwrap())
}

fn closed_form_agreement() -> Outcome {
    let mut worst_h: f64 = 0.0;
    let mut worst_cum: f64 = 0.0;
    let mut checked = Vec::new();
    for c in reference_curves() {
        let (h_exact, cum_exact): (Exact, Exact) = match c.source {
            CurveSource::Model(m) if m.has_closed_form() => (
                Box::new(move |t| m.hazard_closed(t).unwrap()),
                Box::new(move |t| m.cum_hazard_closed(t).unwrap()),
            ),
            CurveSource::FirstOrderLogistic { r, k, h0 } => (
                Box::new(move |t| logistic_first_order_hazard(t, r, k, h0).unwrap()),
                Box::new(move |t| logistic_first_order_cumhaz(t, r, k, h0).unwrap()),
            ),
            _ => continue,
        };
        let traj = c.trajectory(DEFAULT_DT).unwrap();
        for ((t, &h), &cum) in traj.times().zip(traj.hazard()).zip(traj.cum_hazard()) {
            worst_h = worst_h.max((h - h_exact(t)).abs());
            worst_cum = worst_cum.max((cum - cum_exact(t)).abs());
        }
        checked.push(c.name);
    }
    outcome(
        worst_h <= 1e-6 && worst_cum <= 1e-6 && checked.len() == 7,
        format!(
            "{} curves, max|dh| = {worst_h:.2e}, max|dH| = {worst_cum:.2e}",
            checked.len()
        ),
    )
}

fn crossings(values: impl Iterator<Item = f64>, level: f64) -> usize {
    let mut count = 0;
    let mut prev: Option<f64> = None;
    for v in values {
        let d = v - level;
        if d == 0.0 {
            continue;
        }
        if let Some(p) = prev {
            if p.signum() != d.signum() {
                count += 1;
            }
        }
        prev = Some(d);
    }
    count
}

fn asymptotics() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, alpha) in [("under", 0.5), ("critical", 2.0), ("over", 3.0)] {
        let m = ModelSpec::Damped(DampedOscParams::new(alpha, 1.0, 0.2, 0.1, 0.3).unwrap());
        let traj = m.trajectory(50.0, DEFAULT_DT).unwrap();
        let h50 = traj.interp(Channel::Hazard, 50.0).unwrap();
        let n = if name == "under" {
            crossings(traj.hazard().iter().copied(), 0.2)
        } else {
            crossings(
                traj.times()
                    .zip(traj.hazard())
                    .filter(|(t, _)| *t >= 1.0)
                    .map(|(_, &h)| h),
                0.2,
            )
        };
        let ok = (h50 - 0.2).abs() <= 1e-4 && if name == "under" { n >= 2 } else { n <= 1 };
        pass &= ok;
        parts.push(format!(
            "{name}: |h(50)-0.2| = {:.1e}, crossings {n}",
            (h50 - 0.2).abs()
        ));
    }
    outcome(pass, parts.join("; "))
}

/// Grid minimum with a parabolic refinement through the lowest three nodes.
fn refined_minimum(h: &[f64]) -> f64 {
    let (i, &lo) = h
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    if i == 0 || i + 1 == h.len() {
        return lo;
    }
    let (a, b, c) = (h[i - 1], h[i], h[i + 1]);
    let curv = a - 2.0 * b + c;
    if curv <= 0.0 {
        return lo;
    }
    b - (c - a).powi(2) / (8.0 * curv)
}

fn positivity_checks() -> Outcome {
    let rng = CounterRng::new(SEED);
    let u = |k: u64, i: u64| rng.uniform(10 + k, i);
    let band = 1e-9;

    let (mut sin_checked, mut sin_excluded, mut sin_bad) = (0, 0, 0);
    for i in 0..1000 {
        let omega = 0.1 + 2.9 * u(0, i);
        let c = 2.0 * u(1, i);
        let h0 = 0.05 + 1.95 * u(2, i);
        let v0 = -1.0 + 2.0 * u(3, i);
        let p = SinusoidalParams::new(omega, c, h0, v0).unwrap();
        let margin = c - p.positivity_threshold();
        if margin.abs() <= band {
            sin_excluded += 1;
            continue;
        }
        let period = p.period();
        let traj = ModelSpec::Sinusoidal(p)
            .trajectory(10.0 * period, period / 4000.0)
            .unwrap();
        let positive = refined_minimum(traj.hazard()) > 0.0;
        sin_checked += 1;
        if positive != (margin > 0.0) {
            sin_bad += 1;
        }
    }

    let (mut exp_checked, mut exp_excluded, mut stated_bad, mut stated_bad_neg_v0, mut exact_bad) =
        (0, 0, 0, 0, 0);
    for i in 0..1000 {
        let alpha = 0.01 + 0.99 * u(4, i);
        let h0 = 0.05 + 1.95 * u(5, i);
        let v0 = -1.0 + 2.0 * u(6, i);
        let p = ExpInteractionParams::new(alpha, 0.0, h0, v0).unwrap();
        let stated_margin = h0 - v0.abs() / alpha.sqrt();
        let exact_margin = h0 + v0 / alpha.sqrt();
        if stated_margin.abs() <= band || exact_margin.abs() <= band {
            exp_excluded += 1;
            continue;
        }
        let horizon = 20.0 / alpha.sqrt();
        let traj = ModelSpec::ExpInteraction(p)
            .trajectory(horizon, horizon / 20_000.0)
            .unwrap();
        let positive = traj.hazard().iter().all(|&h| h > 0.0);
        exp_checked += 1;
        if positive != (stated_margin >= 0.0) {
            stated_bad += 1;
            if v0 <= 0.0 {
                stated_bad_neg_v0 += 1;
            }
        }
        if positive != p.beta0_hazard_nonnegative() {
            exact_bad += 1;
        }
    }
    outcome(
        sin_bad == 0 && stated_bad == 0,
        format!(
            "sinusoidal: {sin_bad}/{sin_checked} disagreements ({sin_excluded} in band); \
             exp beta=0 with h0 >= |v0|/sqrt(alpha): {stated_bad}/{exp_checked} disagreements \
             ({stated_bad_neg_v0} with v0 <= 0; {exp_excluded} in band); exact condition \
             h0 >= -v0/sqrt(alpha): {exact_bad}/{exp_checked}. The stated exp condition is \
             sufficient but not necessary: for v0 > 0 the hazard grows from h0 > 0"
        ),
    )
}

fn improper_boundary() -> Outcome {
    let m = boundary();
    let curve = reference_curves()
        .into_iter()
        .find(|c| c.name == "exp_boundary")
        .unwrap();
    let traj = curve.trajectory(DEFAULT_DT).unwrap();
    let s60 = (-traj.interp(Channel::CumHazard, 60.0).unwrap()).exp();
    let s_ok = (s60 - (-1f64).exp()).abs() <= 1e-4;
    let inv = CumHazardInverter::new(m, InversionConfig::default()).unwrap();
    let beyond = [0.64, 0.7, 0.9, 0.999_999];
    let inf_ok = beyond.iter().all(|&u| {
        inversion_target(u) > 1.0 && inv.invert(inversion_target(u)).unwrap() == f64::INFINITY
    });
    let finite_ok = [0.1, 0.5, 0.6]
        .iter()
        .all(|&u| inv.invert(inversion_target(u)).unwrap().is_finite());
    outcome(
        s_ok && inf_ok && finite_ok,
        format!("S(60) = {s60:.7} (e^-1 = {:.7}); +inf beyond H = 1: {inf_ok}; finite below: {finite_ok}", (-1f64).exp()),
    )
}

fn ks_recovery() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    // separate seeds: with inversion sampling a shared seed would give the same D for every model
    for (k, (name, m)) in [
        ("underdamped", underdamped()),
        ("sinusoidal", reference_sinusoidal()),
        ("exp beta=0", exp_growth()),
    ]
    .into_iter()
    .enumerate()
    {
        let draws =
            simulate_event_times(&m, 20_000, SEED + k as u64, &InversionConfig::default()).unwrap();
        let d = ks_statistic(&draws, |t| 1.0 - (-m.cum_hazard_closed(t).unwrap()).exp());
        let p = ks_p_value(d, draws.len());
        pass &= p > 0.01;
        parts.push(format!("{name}: D = {d:.4}, p = {p:.3}"));
    }
    outcome(pass, parts.join("; "))
}

fn mgf_checks() -> Outcome {
    let cfg = MgfConfig::default();
    let constant = ModelSpec::Sinusoidal(SinusoidalParams::constant(0.6).unwrap());
    let oracle = mgf(&constant, 0.3, &cfg).unwrap().value.unwrap();
    let oracle_ok = (oracle - 2.0).abs() <= 1e-6;

    let families = [
        ("damped", underdamped()),
        (
            "popdyn",
            ModelSpec::PopDyn(PopDynParams::from_zeta(0.8, 1.0, 0.5, 0.1, 0.2).unwrap()),
        ),
        ("sinusoidal", reference_sinusoidal()),
        ("exp boundary", boundary()),
    ];
    let mut flags_ok = true;
    for (_, m) in &families {
        let b = m.mgf_domain_bound();
        for s in [b, b + 0.05, b + 1.0] {
            flags_ok &= mgf(m, s, &cfg).unwrap().divergent;
        }
    }
    // no finite bound for the growing exponential
    flags_ok &= exp_growth().mgf_domain_bound().is_infinite()
        && !mgf(&exp_growth(), 1.0, &cfg).unwrap().divergent;

    let m = underdamped();
    let s = 0.1;
    let value = mgf(&m, s, &cfg).unwrap().value.unwrap();
    let draws = simulate_event_times(&m, 200_000, SEED, &InversionConfig::default()).unwrap();
    let ys: Vec<f64> = draws.iter().map(|t| (s * t).exp()).collect();
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let se = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let mc_ok = (mean - value).abs() <= 3.0 * se;
    outcome(
        oracle_ok && flags_ok && mc_ok,
        format!(
            "M(0.3) at c=0.6: {oracle:.9}; divergence flags: {flags_ok}; underdamped M(0.1) = {value:.6} vs MC {mean:.6} +- {se:.6} ({:.2} SE)",
            (mean - value).abs() / se
        ),
    )
}

fn conjugate_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    let constant = ModelSpec::Sinusoidal(SinusoidalParams::constant(0.6).unwrap());
    for k in 0..10u64 {
        let seed = CounterRng::new(SEED).child_seed(k);
        let data = simulate_dataset(
            &constant,
            200,
            Censoring::None,
            seed,
            &InversionConfig::default(),
        )
        .unwrap();
        let target = (2.0 + data.event_count() as f64) / (2.0 + data.total_time());
        let chain = run_chain(
            ModelFamily::Constant,
            &data,
            &PriorSpec::default_for(ModelFamily::Constant),
            &[1.0],
            &ChainConfig {
                iterations: 40_000,
                burn_in: 5_000,
                thin: 1,
                seed,
                ..ChainConfig::default()
            },
        )
        .unwrap();
        let draws = chain.column(0);
        let se = batch_means_se(&draws);
        let z = (chain.means()[0] - target).abs() / se;
        worst = worst.max(z);
        pass &= z <= 3.0;
    }
    outcome(
        pass,
        format!("10 seeds, worst |mean - (2+d)/(2+sum t)| = {worst:.2} MC SE"),
    )
}

fn desk_study() -> Outcome {
    let truth = vec![0.5, 1.0, 0.2, 0.1, 0.3];
    let reference = [0.1540, 0.0930, 0.0372, 0.0166, 0.0456];
    let names = ModelFamily::Damped.param_names();

    let mut main = StudyConfig::new(ModelFamily::Damped, truth.clone(), vec![2000]);
    main.replications = 50;
    main.seed = SEED;
    let res = match monte_carlo_study(&main) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("study failed: {e}")),
    };
    let row = &res.rows[0];
    let ratios: Vec<f64> = row.rmse.iter().zip(reference).map(|(r, p)| r / p).collect();
    let within = ratios.iter().all(|&q| (1.0 / 3.0..=3.0).contains(&q));

    // sample-size trend on fewer replications per n
    let mut trend = StudyConfig::new(ModelFamily::Damped, truth, vec![500, 5000]);
    trend.replications = 20;
    trend.seed = SEED + 1;
    let (decreasing, trend_text) = match monte_carlo_study(&trend) {
        Ok(t) => {
            let small = &t.rows[0].rmse;
            let large = &t.rows[1].rmse;
            let count = small.iter().zip(large).filter(|(s, l)| l < s).count();
            let text = names
                .iter()
                .zip(small.iter().zip(large))
                .map(|(n, (s, l))| format!("{n} {s:.4}->{l:.4}"))
                .collect::<Vec<_>>()
                .join(", ");
            (count >= 4, format!("{count}/5 decrease [{text}]"))
        }
        Err(e) => (false, format!("trend study failed: {e}")),
    };
    let rmse_text = names
        .iter()
        .zip(row.rmse.iter().zip(&ratios))
        .map(|(n, (r, q))| format!("{n} {r:.4} (x{q:.2})"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        within && decreasing,
        format!(
            "n=2000, {} reps ({} failed): RMSE {rmse_text}; n=500 vs 5000 (20 reps): {trend_text}",
            row.replications.len(),
            row.failures.len()
        ),
    )
}

fn lung_bic() -> Outcome {
    let text = include_str!("../data/lung.csv");
    let data = ingest_survival_data(
        text.as_bytes(),
        StatusConvention::Status12,
        TimeUnit::DaysToYears,
    )
    .unwrap();
    let cfg = FitConfig::default();
    let w = fit_weibull(&data, &cfg).unwrap().bic;
    let l = fit_lognormal(&data, &cfg).unwrap().bic;
    let start = init_from_survival(&data, DEFAULT_WINDOW)
        .unwrap()
        .sinusoidal_start();
    let s = mle_fit(ModelFamily::Sinusoidal, &data, &start, &cfg)
        .unwrap()
        .bic;
    let ordering = w < s && s < l;
    let reference_bic = [
        ("weibull", w, 371.38),
        ("sinusoidal", s, 384.01),
        ("lognormal", l, 402.21),
    ];
    let outside: Vec<String> = reference_bic
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 1.0)
        .map(|(n, got, want)| format!("{n} {got:.2} vs {want:.2}"))
        .collect();
    let mut detail =
        format!("BIC weibull {w:.2}, sinusoidal {s:.2}, lognormal {l:.2}; ordering {ordering}");
    if !outside.is_empty() {
        detail.push_str(&format!(
            "; CAVEAT outside +-1.0: {} (times in years = days/365.25; source time unit unknown)",
            outside.join(", ")
        ));
    }
    outcome(ordering, detail)
}

fn init_scheme() -> Outcome {
    let constant = ModelSpec::Sinusoidal(SinusoidalParams::constant(0.6).unwrap());
    let run = |seed: u64| {
        let data = simulate_dataset(
            &constant,
            2000,
            Censoring::None,
            seed,
            &InversionConfig::default(),
        )
        .unwrap();
        init_from_survival(&data, DEFAULT_WINDOW).unwrap()
    };
    let ok = |e: &hazode::inference::InitEstimate| {
        (e.h0 - 0.6).abs() <= 0.06 && (0.0..=0.05).contains(&e.v0)
    };
    let est = run(SEED);
    // context only: how often the 10% band is met across independent datasets
    let root = CounterRng::new(SEED ^ 0xa5a5);
    let rate = (0..200).filter(|&k| ok(&run(root.child_seed(k)))).count() as f64 / 200.0;
    outcome(
        ok(&est),
        format!(
            "seed {SEED}: h0 = {:.4}, v0 = {:.4} (window {:.4}); band met in {:.0}% of 200 other datasets",
            est.h0,
            est.v0,
            DEFAULT_WINDOW,
            100.0 * rate
        ),
    )
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("HAZODE_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [Criterion; 10] = [
        (1, "closed-form agreement", 10.0, closed_form_agreement),
        (2, "damped asymptotics", 5.0, asymptotics),
        (3, "positivity conditions", 30.0, positivity_checks),
        (4, "improper boundary", 5.0, improper_boundary),
        (5, "sampler KS recovery", 60.0, ks_recovery),
        (6, "moment generating function", 60.0, mgf_checks),
        (7, "conjugate posterior", 120.0, conjugate_oracle),
        (8, "desk-scale study", 7200.0, desk_study),
        (9, "clinical data BIC", 60.0, lung_bic),
        (10, "initialization scheme", 5.0, init_scheme),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, budget, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        let pass = out.pass && secs < budget;
        ran += 1;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} [{}] {name}: {} ({secs:.1} s, budget {budget:.0} s)",
            if pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed > 0 && std::env::var("HAZODE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
