use proptest::prelude::*;
use xebsim::haar::{sample_haar_state, sample_haar_unitary, sample_random_circuit, sample_u1};
use xebsim::quad::integrate;
use xebsim::suite::{run_haar_suite, HaarSuiteConfig};
use xebsim::{GateKind, GateSetSpec, QrPhase, RngStream, StateVector};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unitaries_are_unitary(dim in 1usize..=32, seed in any::<u64>()) {
        let u = sample_haar_unitary(dim, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-10);
    }

    #[test]
    fn states_are_normalized(n in 1usize..=12, seed in any::<u64>()) {
        let s = sample_haar_state(n, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phases_in_range(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..100 {
            let phi = sample_u1(&mut rng);
            prop_assert!((0.0..std::f64::consts::TAU).contains(&phi));
        }
    }

    #[test]
    fn sweep_never_leaves_the_register(n in 1usize..=9, cycles in 1usize..30, seed in any::<u64>()) {
        let c = sample_random_circuit(n, cycles, &GateSetSpec::default(), &mut RngStream::new(seed, 0)).unwrap();
        for op in c.ops() {
            if op.kind() == GateKind::Cnot {
                prop_assert_eq!(op.targets()[1], op.targets()[0] + 1);
                prop_assert!(op.targets()[1] < n);
            }
        }
    }
}

#[test]
fn identity_alphabet_leaves_zero_state() {
    let spec = GateSetSpec::uniform(&[GateKind::I]);
    let c = sample_random_circuit(4, 10, &spec, &mut RngStream::new(1, 0)).unwrap();
    assert!(c.gate_count() > 0);
    assert_eq!(c.run().unwrap(), StateVector::zero_state(4).unwrap());
}

/// `E|tr U|^2` over U(2) written as `e^{i phi} [[a, b], [-b*, a*]]` with
/// `a = cos(t) e^{i s}`; the measure on `t` is `2 sin t cos t dt`.
#[test]
fn trace_moment_by_parameterization() {
    let inner = |t: f64| {
        let over_s = integrate(|s: f64| 4.0 * (t.cos() * s.cos()).powi(2), 0.0, std::f64::consts::TAU, 1e-13, 1e-13);
        2.0 * t.sin() * t.cos() * over_s.value / std::f64::consts::TAU
    };
    let moment = integrate(inner, 0.0, std::f64::consts::FRAC_PI_2, 1e-12, 1e-12).value;
    assert!((moment - 1.0).abs() < 1e-10, "{moment}");

    let mut rng = RngStream::new(4, 0);
    let xs: Vec<f64> = (0..20_000).map(|_| sample_haar_unitary(2, &mut rng).unwrap().trace().norm_sqr()).collect();
    let ms = xebsim::stats::mean_stderr(&xs);
    assert!((ms.mean - moment).abs() < 5.0 * ms.stderr);
}

#[test]
fn default_suite_passes() {
    let verdicts = run_haar_suite(&HaarSuiteConfig::default()).unwrap();
    for v in &verdicts {
        assert!(v.passed, "{v:?}");
    }
}

#[test]
fn raw_qr_fails_left_invariance() {
    let cfg = HaarSuiteConfig { qr_phase: QrPhase::Raw, ..HaarSuiteConfig::default() };
    let verdicts = run_haar_suite(&cfg).unwrap();
    let li: Vec<_> = verdicts.iter().filter(|v| v.name.starts_with("left_invariance")).collect();
    assert!(!li.is_empty());
    assert!(li.iter().all(|v| !v.passed), "{li:?}");
}
