use std::f64::consts::FRAC_PI_3;
use std::hint::black_box;

use b92_core::channel::EventRecording;
use b92_core::feedback::SlowInverter;
use b92_core::{
    control_function, run_transmission, FeedbackConfig, FeedbackController, NoiseTrajectory, ProtocolParams,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn estimators(c: &mut Criterion) {
    c.bench_function("control_function", |b| {
        b.iter(|| control_function(0, black_box(FRAC_PI_3), black_box(0.3)).unwrap())
    });

    let inv = SlowInverter::new(FRAC_PI_3, 1e-3).unwrap();
    let r0 = control_function(0, FRAC_PI_3, 1.7).unwrap();
    let r1 = control_function(1, FRAC_PI_3, 1.7).unwrap();
    c.bench_function("slow_invert_1e-3", |b| b.iter(|| inv.invert(black_box(r0), black_box(r1))));
    c.bench_function("slow_inverter_build", |b| {
        b.iter(|| SlowInverter::new(black_box(FRAC_PI_3), 1e-3).unwrap())
    });
}

fn transmission(c: &mut Criterion) {
    let params = ProtocolParams::reference();
    let traj = NoiseTrajectory::Linear { offset: 0.0, rate: 0.05 };
    let mut group = c.benchmark_group("run_transmission");
    group.sample_size(20);
    for (name, cfg) in [("fast_1s", FeedbackConfig::fast(FRAC_PI_3)), ("slow_1s", FeedbackConfig::slow(FRAC_PI_3))] {
        group.bench_function(name, |b| {
            b.iter(|| {
                let mut ctl = FeedbackController::new(cfg).unwrap();
                run_transmission(&params, &traj, &mut ctl, 1.0, 1, EventRecording::None).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, estimators, transmission);
criterion_main!(benches);
