use std::f64::consts::FRAC_PI_3;

use b92_core::channel::{EventRecording, NoOpController};
use b92_core::security::lambda_bit;
use b92_core::{
    estimate_rates_from_eps, estimate_slow, run_transmission, BuiltinBound, ControlEstimate, NoiseTrajectory,
    Outcome, ProtocolParams, SecurityRates,
};

#[test]
fn rates_inferred_from_bob_counts_match_monte_carlo() {
    let params = ProtocolParams::reference();
    let eta = params.eta();
    for eps in [0.1, 0.35] {
        let traj = NoiseTrajectory::Constant { offset: eps };
        let log = run_transmission(&params, &traj, &mut NoOpController, 20.0, 11, EventRecording::Every(1)).unwrap();

        let mut est = ControlEstimate::default();
        for e in &log.events {
            est.record(e.bob_basis, e.outcome);
        }
        assert_eq!(est.total(), log.clicks);
        let eps_hat = estimate_slow(&est, FRAC_PI_3, 1e-3).unwrap();
        let inferred = estimate_rates_from_eps(eps_hat, FRAC_PI_3, eta).unwrap();

        let n = log.pulses as f64;
        let con = (log.conclusive[0] + log.conclusive[1]) as f64 / n;
        let bit = log.bit_errors as f64 / n;
        let se_con = (con / n).sqrt();
        let se_bit = (bit.max(lambda_bit(eps, eta).unwrap()) / n).sqrt();
        assert!((inferred.lambda_con - con).abs() < 5.0 * se_con, "eps {eps}: Λ_con {} vs {con}", inferred.lambda_con);
        assert!((inferred.lambda_bit - bit).abs() < 5.0 * se_bit + 2e-6, "eps {eps}: Λ_bit {} vs {bit}", inferred.lambda_bit);

        let sec = inferred.with_bound(FRAC_PI_3, &BuiltinBound::Naive).unwrap();
        let exact = SecurityRates::evaluate(FRAC_PI_3, eps, eta, &BuiltinBound::Naive).unwrap();
        assert_eq!(sec.has_positive_gain(), exact.has_positive_gain());
    }
}

#[test]
fn events_hide_nothing_the_counts_show() {
    let params = ProtocolParams::reference();
    let log = run_transmission(&params, &NoiseTrajectory::zero(), &mut NoOpController, 1.0, 5, EventRecording::Every(1))
        .unwrap();
    let con = log.events.iter().filter(|e| e.outcome == Outcome::Conclusive).count() as u64;
    assert_eq!(con, log.conclusive[0] + log.conclusive[1]);
    assert_eq!(log.events.iter().filter(|e| e.is_bit_error()).count(), 0);
}
