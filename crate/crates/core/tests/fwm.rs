use proptest::prelude::*;

use lsim_core::fwm::{
    detector_intensity, onset_index, phase_match, readout_conversion, sweep_readout, verify_conversion_law,
    WaveVector,
};
use lsim_core::{
    evolve, Channel, DensityMatrix, MediumParams, Pulse, PulseSequence, Stepping, TimeSeries, Transition,
};

fn prepared() -> DensityMatrix {
    let seq = PulseSequence::new(
        vec![
            Pulse::square(Transition::Probe, 50.0, 0.0, 10.0).unwrap(),
            Pulse::square(Transition::Coupling, 100.0, 0.0, 10.0).unwrap(),
        ],
        35.0,
    )
    .unwrap();
    evolve(&DensityMatrix::ground(), &seq, &MediumParams::default(), 0.0, &Stepping::new(0.01, 10))
        .unwrap()
        .final_state
}

fn readout(rabi: f64, len: f64) -> Pulse {
    Pulse::square(Transition::Coupling, rabi, 35.0, 35.0 + len).unwrap()
}

fn stepping() -> Stepping {
    Stepping::new(0.01, 10)
}

#[test]
fn nothing_stored_means_nothing_emitted() {
    let r = readout_conversion(&DensityMatrix::ground(), &readout(80.0, 10.0), &MediumParams::default(), &stepping())
        .unwrap();
    assert!(r.series.channel(Channel::EdArb).unwrap().iter().all(|v| v.abs() <= 1e-9));
    assert!(r.conversion_fit.is_none());
    assert!(verify_conversion_law(&r).is_err());
}

#[test]
fn zero_read_out_leaves_the_coherence_alone() {
    let rho = prepared();
    let r = readout_conversion(&rho, &readout(0.0, 10.0), &MediumParams::default(), &stepping()).unwrap();
    let re12 = r.series.channel(Channel::ReRho12).unwrap();
    assert!(re12.iter().all(|v| (v - re12[0]).abs() < 1e-12));
}

#[test]
fn weak_read_out_decays_monotonically_and_strong_one_oscillates() {
    let rho = prepared();
    let weak = readout_conversion(&rho, &readout(20.0, 10.0), &MediumParams::default(), &stepping()).unwrap();
    let re12 = weak.series.channel(Channel::ReRho12).unwrap();
    assert!(re12.windows(2).all(|w| w[1].abs() <= w[0].abs() + 1e-12));
    assert!(!weak.oscillation_detected);
    let strong = readout_conversion(&rho, &readout(140.0, 20.0), &MediumParams::default(), &stepping()).unwrap();
    assert!(strong.oscillation_detected);
}

#[test]
fn eighty_khz_read_out_follows_the_conversion_law() {
    let r = readout_conversion(&prepared(), &readout(80.0, 20.0), &MediumParams::default(), &stepping()).unwrap();
    assert!(r.conversion_fit.unwrap().pearson_r >= 0.99);
}

#[test]
fn sweep_keeps_order_and_repeats_bit_for_bit() {
    let rho = prepared();
    let template = readout(0.0, 20.0);
    let p = MediumParams::default();
    assert!(sweep_readout(&rho, &[], &template, &p, &stepping()).unwrap().is_empty());
    let r = sweep_readout(&rho, &[60.0, 100.0, 60.0], &template, &p, &stepping()).unwrap();
    assert_eq!(r[0].omega_a_khz, 60.0);
    assert_eq!(r[1].omega_a_khz, 100.0);
    for ch in Channel::ALL {
        assert_eq!(r[0].series.channel(ch).unwrap(), r[2].series.channel(ch).unwrap());
    }
    let rabis: Vec<f64> = (1..=7).map(|k| 20.0 * k as f64).collect();
    let detected: Vec<bool> = sweep_readout(&rho, &rabis, &template, &p, &stepping())
        .unwrap()
        .iter()
        .map(|r| r.oscillation_detected)
        .collect();
    assert!(onset_index(&detected).is_some(), "{detected:?}");
}

#[test]
fn detector_intensity_is_the_square() {
    let ts = TimeSeries::from_channels(vec![0.0, 1.0], vec![(Channel::EdArb, vec![-2.0, 3.0])]).unwrap();
    assert_eq!(detector_intensity(&ts).unwrap(), vec![4.0, 9.0]);
    let zero = TimeSeries::from_channels(vec![0.0, 1.0], vec![(Channel::EdArb, vec![0.0, 0.0])]).unwrap();
    assert_eq!(detector_intensity(&zero).unwrap(), vec![0.0, 0.0]);
    let missing = TimeSeries::from_channels(vec![0.0], vec![(Channel::Pop1, vec![1.0])]).unwrap();
    assert!(detector_intensity(&missing).is_err());
}

#[test]
fn oscillating_read_out_intensity_dips_to_zero() {
    let r = readout_conversion(&prepared(), &readout(140.0, 20.0), &MediumParams::default(), &stepping()).unwrap();
    let i = detector_intensity(&r.series).unwrap();
    let peak = i.iter().cloned().fold(0.0, f64::max);
    let e = r.series.channel(Channel::EdArb).unwrap();
    let crossings: Vec<usize> = (1..e.len()).filter(|&k| e[k - 1].signum() != e[k].signum()).collect();
    assert!(!crossings.is_empty());
    for k in crossings {
        assert!(i[k].min(i[k - 1]) < 1e-3 * peak);
    }
}

#[test]
fn phase_match_examples() {
    let k0 = 2.0 * std::f64::consts::PI / 605.98e-9;
    let z = WaveVector::in_plane(k0, 0.0);
    let (kd, mismatch) = phase_match(z, z, z, k0);
    assert_eq!(kd, z);
    assert_eq!(mismatch, 0.0);

    let kc = WaveVector::in_plane(k0, 0.035);
    let kp = WaveVector::in_plane(k0, 0.0);
    let (kd, mismatch) = phase_match(kc, kp, kp, k0);
    assert_eq!(kd, kc);
    assert!(mismatch <= 1e-9 * k0);

    let ka = WaveVector::in_plane(k0, 0.070);
    let (kd, mismatch) = phase_match(kc, kp, ka, k0);
    assert!((kd.angle_rad() - 0.105).abs() < 1e-3, "θ_D = {}", kd.angle_rad());
    assert!(mismatch > 0.0 && mismatch < 1e-2 * k0);
}

fn wave() -> impl Strategy<Value = WaveVector> {
    (-1e7f64..1e7, -1e7f64..1e7, -1e7f64..1e7).prop_map(|(x, y, z)| WaveVector::new(x, y, z).unwrap())
}

proptest! {
    #[test]
    fn phase_match_is_linear_in_scale(kc in wave(), kp in wave(), ka in wave(), w in 0.0f64..2e7, m in -8i32..8) {
        let a = 2f64.powi(m);
        let (kd, mis) = phase_match(kc, kp, ka, w);
        let (kd2, mis2) = phase_match(a * kc, a * kp, a * ka, a * w);
        prop_assert_eq!(kd2, a * kd);
        prop_assert_eq!(mis2, a * mis);
    }

    #[test]
    fn phase_match_scales_for_any_factor(kc in wave(), kp in wave(), ka in wave(), w in 0.0f64..2e7, a in 0.01f64..100.0) {
        let (kd, mis) = phase_match(kc, kp, ka, w);
        let (kd2, mis2) = phase_match(a * kc, a * kp, a * ka, a * w);
        let scale = a * (kc.norm() + kp.norm() + ka.norm() + w);
        prop_assert!((kd2 - a * kd).norm() <= 1e-14 * scale);
        prop_assert!((mis2 - a * mis).abs() <= 1e-14 * scale);
    }
}
