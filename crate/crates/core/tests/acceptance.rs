//! Acceptance suite. Runs every exit criterion at its pinned tolerance and
//! prints one PASS/FAIL line per criterion; exits non-zero on any failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::fs;
use std::time::{Duration, Instant};

use b92_core::channel::{run_transmission, EventRecording, NoOpController, NoiseTrajectory};
use b92_core::feedback::{control_function, control_slope_at_zero, estimate_fast_from_ratio, SlowInverter};
use b92_core::harness::{emit_outputs, run_scenario, Preset, ScenarioConfig};
use b92_core::quantum::{orthogonal_state, p_conclusive, p_inconclusive, rotate, signal_state, ProtocolParams};
use b92_core::security::{
    gain_threshold, gain_threshold_at_eta, lambda_bit, lambda_con, secure_gain, BuiltinBound, SecurityRates,
    THRESHOLD_TOLERANCE,
};
use b92_core::wrap_angle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let el = start.elapsed();
    check(el < budget, || format!("runtime {el:?} exceeds {budget:?}"))?;
    Ok(el)
}

fn random_theta<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(1e-3..FRAC_PI_2 - 1e-3)
}

/// 1. Sum rule, ratio identity and conclusive-rate identity.
fn analytic_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut sum_err, mut ratio_err, mut con_err) = (0f64, 0f64, 0f64);
    for _ in 0..10_000 {
        let theta = random_theta(&mut rng);
        let eps = rng.random_range(-PI..PI);
        let eta = rng.random_range(1e-4..=1.0);
        for k in 0..2u8 {
            let inc = p_inconclusive(k, theta, eps, eta).unwrap();
            let con = p_conclusive(k, theta, eps, eta).unwrap();
            sum_err = sum_err.max((inc + con - eta).abs());
            let r = control_function(k, theta, eps).unwrap();
            ratio_err = ratio_err.max((r - inc / con).abs() / r.abs().max(1.0));
        }
        let mean = 0.5 * (p_conclusive(0, theta, eps, eta).unwrap() + p_conclusive(1, theta, eps, eta).unwrap());
        con_err = con_err.max((lambda_con(theta, eps, eta).unwrap() - mean).abs());
    }
    check(sum_err <= 1e-12, || format!("sum rule error {sum_err:e}"))?;
    check(ratio_err <= 1e-10, || format!("ratio error {ratio_err:e}"))?;
    check(con_err <= 1e-12, || format!("conclusive-rate error {con_err:e}"))?;
    let el = within_budget(start, Duration::from_secs(1))?;
    Ok(format!(
        "max errors: sum {sum_err:.1e}, ratio {ratio_err:.1e}, Λ_con {con_err:.1e}; {el:.2?}"
    ))
}

/// 2. Closed-form probabilities against the Born rule on explicit state vectors.
fn born_dual_path() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0f64;
    for _ in 0..10_000 {
        let theta = random_theta(&mut rng);
        let eps = rng.random_range(-PI..PI);
        let eta = rng.random_range(1e-4..=1.0);
        let received = [0u8, 1].map(|j| rotate(signal_state(j, theta).unwrap(), eps));
        for k in 0..2u8 {
            let phi = signal_state(k, theta).unwrap();
            let bar = orthogonal_state(k, theta).unwrap();
            let inc = eta * 0.5 * (phi.overlap(&received[0]) + phi.overlap(&received[1]));
            let con = eta * 0.5 * (bar.overlap(&received[0]) + bar.overlap(&received[1]));
            worst = worst.max((inc - p_inconclusive(k, theta, eps, eta).unwrap()).abs());
            worst = worst.max((con - p_conclusive(k, theta, eps, eta).unwrap()).abs());
        }
    }
    check(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e} over 10^4 inputs"))
}

/// 3. Monte Carlo outcome and bit-error frequencies against the closed forms.
fn monte_carlo_consistency() -> Outcome {
    let start = Instant::now();
    let params = ProtocolParams {
        theta: FRAC_PI_3,
        trigger_rate_hz: 1.0e6,
        mu: 1.0,
        eta_b: 1.0,
        eta_c: 1.0,
    };
    let mut worst_z = 0f64;
    for (i, eps) in [0.0, 0.2, 1.0].into_iter().enumerate() {
        let traj = NoiseTrajectory::Constant { offset: eps };
        let log = run_transmission(&params, &traj, &mut NoOpController, 1.0, 300 + i as u64, EventRecording::None)
            .map_err(|e| e.to_string())?;
        check(log.pulses == 1_000_000 && log.clicks == log.pulses, || {
            format!("expected 10^6 clicks, got {}", log.clicks)
        })?;
        for k in 0..2usize {
            let n = (log.conclusive[k] + log.inconclusive[k]) as f64;
            let p = p_conclusive(k as u8, FRAC_PI_3, eps, 1.0).unwrap();
            let q = p_inconclusive(k as u8, FRAC_PI_3, eps, 1.0).unwrap();
            let se = (p * (1.0 - p) / n).sqrt();
            let z_con = (log.conclusive[k] as f64 / n - p).abs() / se;
            let z_inc = (log.inconclusive[k] as f64 / n - q).abs() / se;
            check(z_con <= 4.0 && z_inc <= 4.0, || {
                format!("eps={eps} basis {k}: z = {z_con:.2}/{z_inc:.2}")
            })?;
            worst_z = worst_z.max(z_con).max(z_inc);
        }
        let n = log.pulses as f64;
        let p = lambda_bit(eps, 1.0).unwrap();
        let freq = log.bit_errors as f64 / n;
        if p == 0.0 {
            check(log.bit_errors == 0, || format!("eps=0 produced {} bit errors", log.bit_errors))?;
        } else {
            let z = (freq - p).abs() / (p * (1.0 - p) / n).sqrt();
            check(z <= 4.0, || format!("eps={eps} bit errors: {freq} vs {p}, z = {z:.2}"))?;
            worst_z = worst_z.max(z);
        }
    }
    let el = within_budget(start, Duration::from_secs(30))?;
    Ok(format!("worst |z| = {worst_z:.2} (limit 4); {el:.2?}"))
}

fn scenario(preset: Preset, replicas: u32) -> ScenarioConfig {
    ScenarioConfig {
        replicas,
        seed: 2024,
        ..preset.config()
    }
}

/// 4. Fast feedback under linear drift.
fn fast_feedback() -> Outcome {
    let start = Instant::now();
    let run = run_scenario(&scenario(Preset::Fig3Top, 10)).map_err(|e| e.to_string())?;
    let s = &run.summary;
    check((-0.05..=0.10).contains(&s.residual_mean), || {
        format!("pooled mean {:.4} outside [-0.05, 0.10]", s.residual_mean)
    })?;
    check((0.01..=0.06).contains(&s.residual_std), || {
        format!("pooled std {:.4} outside [0.01, 0.06]", s.residual_std)
    })?;
    let el = within_budget(start, Duration::from_secs(120))?;
    Ok(format!(
        "residual {:.4} ± {:.4} rad over {} kicks (reference 0.023 ± 0.031); {el:.2?}",
        s.residual_mean, s.residual_std, s.kick_count
    ))
}

/// 5. Slow feedback under 2-rad steps, jump windows excluded.
fn slow_feedback() -> Outcome {
    let run = run_scenario(&scenario(Preset::Fig3Bottom, 10)).map_err(|e| e.to_string())?;
    let s = &run.summary;
    check(s.residual_mean.abs() <= 0.05, || format!("pooled |mean| {:.4} > 0.05", s.residual_mean))?;
    check(s.residual_std <= 0.20, || format!("pooled std {:.4} > 0.20", s.residual_std))?;
    let steps = run.config.trajectory.discontinuities().len();
    let mut worst = 0f64;
    for r in &s.replicas {
        check(r.step_recovery.len() == steps, || {
            format!("replica {}: {} of {steps} steps recovered", r.replica, r.step_recovery.len())
        })?;
        check(r.excluded_count == steps as u64, || {
            format!("replica {}: {} windows excluded", r.replica, r.excluded_count)
        })?;
        for rec in &r.step_recovery {
            worst = worst.max(rec.error.abs());
        }
    }
    check(worst <= 0.3, || format!("step recovery error {worst:.3} > 0.3"))?;
    Ok(format!(
        "residual {:.4} ± {:.4} rad (reference -0.002 ± 0.098); worst step recovery {worst:.3} rad",
        s.residual_mean, s.residual_std
    ))
}

/// 6. Noiseless inversion by both estimators.
fn control_inversion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let resolution = 1e-3;
    let inv = SlowInverter::new(FRAC_PI_3, resolution).map_err(|e| e.to_string())?;
    let mut slow_worst = 0f64;
    for _ in 0..100 {
        let eps = rng.random_range(-PI + 1e-9..PI);
        let r0 = control_function(0, FRAC_PI_3, eps).unwrap();
        let r1 = control_function(1, FRAC_PI_3, eps).unwrap();
        let err = wrap_angle(inv.invert(r0, r1) - eps).abs();
        slow_worst = slow_worst.max(err);
    }
    check(slow_worst <= 2.0 * resolution, || format!("slow error {slow_worst:e}"))?;
    let mut fast_worst = 0f64;
    for _ in 0..100 {
        let eps = rng.random_range(-0.1..=0.1);
        let r0 = control_function(0, FRAC_PI_3, eps).unwrap();
        let est = estimate_fast_from_ratio(r0, FRAC_PI_3).unwrap();
        let rel = (est - eps).abs() / eps.abs();
        fast_worst = fast_worst.max(rel);
    }
    check(fast_worst <= 0.10, || format!("fast relative error {fast_worst:.3}"))?;
    Ok(format!(
        "slow max error {slow_worst:.1e} rad (limit {:.0e}); fast max relative error {:.2}%",
        2.0 * resolution,
        100.0 * fast_worst
    ))
}

/// 7. Tangent slope against central finite differences.
fn derivative_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let h = 1e-6;
    let mut worst = 0f64;
    for _ in 0..20 {
        let theta = rng.random_range(0.05..FRAC_PI_2 - 0.05);
        let fd = (control_function(0, theta, h).unwrap() - control_function(0, theta, -h).unwrap()) / (2.0 * h);
        let slope = control_slope_at_zero(theta).unwrap();
        worst = worst.max((slope - fd).abs() / fd.abs());
    }
    check(worst <= 1e-6, || format!("relative FD mismatch {worst:e}"))?;
    let at_60 = control_slope_at_zero(FRAC_PI_3).unwrap();
    let exact = 8.0 * 3f64.sqrt() / 9.0;
    check((at_60 - exact).abs() <= 1e-12, || format!("slope(π/3) = {at_60}, expected {exact}"))?;
    Ok(format!("max relative FD mismatch {worst:.1e}; slope(π/3) = {at_60:.12}"))
}

fn entropy_oracle(x: f64) -> f64 {
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// 8. Gain bookkeeping and the naive-bound threshold.
fn gain_machinery() -> Outcome {
    for con in [0.001875, 0.375, 1.0] {
        let g = secure_gain(0.0, con, 0.0).map_err(|e| e.to_string())?;
        check((g - con).abs() <= 1e-15, || format!("G = {g} for Λ_con = {con}"))?;
    }
    let r = SecurityRates::evaluate(FRAC_PI_3, 0.0, 1.0, &BuiltinBound::Naive).map_err(|e| e.to_string())?;
    check((r.gain - r.lambda_con).abs() <= 1e-15, || format!("G(0) = {} vs Λ_con = {}", r.gain, r.lambda_con))?;

    let thresholds: Vec<f64> = [0.005, 0.1, 1.0]
        .into_iter()
        .map(|eta| gain_threshold_at_eta(FRAC_PI_3, eta, &BuiltinBound::Naive))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let spread = thresholds.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - thresholds.iter().cloned().fold(f64::INFINITY, f64::min);
    check(spread <= THRESHOLD_TOLERANCE, || format!("η spread {spread:e}"))?;

    // h(x0) = 1/2 by bisection, then Λ_bit/Λ_con = x0 solved in closed form for cos ε.
    let (mut lo, mut hi) = (1e-12, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if entropy_oracle(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x0 = 0.5 * (lo + hi);
    let c2 = FRAC_PI_3.cos().powi(2);
    let root = ((1.0 - 2.0 * x0) / (1.0 - 2.0 * x0 * c2)).acos();
    let t = gain_threshold(FRAC_PI_3, &BuiltinBound::Naive).map_err(|e| e.to_string())?;
    check((t - root).abs() <= 1e-5, || format!("threshold {t} vs independent root {root}"))?;
    Ok(format!(
        "naive threshold {t:.6} rad vs root {root:.6} (x0 = {x0:.7}); η spread {spread:.1e}"
    ))
}

/// 9. Same seed, same bytes.
fn determinism() -> Outcome {
    let cfg = scenario(Preset::Fig3Top, 1);
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let pa = emit_outputs(&run_scenario(&cfg).map_err(|e| e.to_string())?, a.path()).map_err(|e| e.to_string())?;
    let pb = emit_outputs(&run_scenario(&cfg).map_err(|e| e.to_string())?, b.path()).map_err(|e| e.to_string())?;
    let ka = fs::read(&pa.kicks[0]).map_err(|e| e.to_string())?;
    let kb = fs::read(&pb.kicks[0]).map_err(|e| e.to_string())?;
    check(!ka.is_empty() && ka == kb, || "kicks.csv bodies differ".to_string())?;
    let sa = fs::read(&pa.summary).map_err(|e| e.to_string())?;
    let sb = fs::read(&pb.summary).map_err(|e| e.to_string())?;
    check(sa == sb, || "summary.json differs".to_string())?;
    Ok(format!("kicks.csv identical ({} bytes)", ka.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("analytic identities", analytic_identities),
        ("dual-path Born check", born_dual_path),
        ("Monte Carlo consistency", monte_carlo_consistency),
        ("fast feedback, linear drift", fast_feedback),
        ("slow feedback, step noise", slow_feedback),
        ("control-function inversion", control_inversion),
        ("derivative check", derivative_check),
        ("gain machinery", gain_machinery),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
