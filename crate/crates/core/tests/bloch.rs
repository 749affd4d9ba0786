use num_complex::Complex64;
use proptest::prelude::*;

use lsim_core::units::angular;
use lsim_core::{
    evolve, liouvillian, BlochInputs, Channel, DensityMatrix, Edge, MediumParams, Pulse, PulseSequence,
    Stepping, Transition,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn state_from(entries: &[f64; 18]) -> DensityMatrix {
    let mut a = [[c(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = c(entries[2 * (3 * i + j)], entries[2 * (3 * i + j) + 1]);
        }
    }
    let mut m = [[c(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * a[j][k].conj()).sum();
        }
    }
    let tr = (m[0][0] + m[1][1] + m[2][2]).re;
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            *v /= tr;
        }
    }
    DensityMatrix::from_elements(m)
}

fn spin_row(rho: &DensityMatrix, inp: &BlochInputs, p: &MediumParams) -> Complex64 {
    let i = c(0.0, 1.0);
    let two_photon = angular(inp.probe_detuning_khz - inp.coupling_detuning_khz + inp.inhomogeneous_khz);
    -i * 0.5 * angular(inp.coupling_rabi_khz) * rho.get(0, 2)
        + i * 0.5 * angular(inp.probe_rabi_khz) * rho.get(2, 1)
        - i * two_photon * rho.get(0, 1)
        - angular(p.gamma12_khz) * rho.get(0, 1)
}

fn closed_medium() -> MediumParams {
    MediumParams {
        gamma12_khz: 0.5,
        gamma13_khz: 3.0,
        gamma23_khz: 2.0,
        decay31_khz: 1.5,
        decay32_khz: 1.0,
        ..MediumParams::default()
    }
}

fn fig2_sequence() -> PulseSequence {
    PulseSequence::new(
        vec![
            Pulse::square(Transition::Probe, 50.0, 0.0, 10.0).unwrap(),
            Pulse::square(Transition::Coupling, 100.0, 0.0, 10.0).unwrap(),
            Pulse::square(Transition::Coupling, 80.0, 35.0, 45.0).unwrap(),
        ],
        45.0,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn spin_row_matches_written_out_equation(
        entries in prop::array::uniform18(-1.0f64..1.0),
        probe in 0.0f64..300.0,
        coupling in 0.0f64..300.0,
        dp in -200.0f64..200.0,
        dc in -200.0f64..200.0,
        dinh in -200.0f64..200.0,
        g12 in 0.0f64..20.0,
        g13 in 0.0f64..20.0,
        d31 in 0.0f64..10.0,
    ) {
        prop_assume!(entries.iter().any(|v| v.abs() > 1e-3));
        let rho = state_from(&entries);
        let inp = BlochInputs {
            probe_rabi_khz: probe,
            coupling_rabi_khz: coupling,
            probe_detuning_khz: dp,
            coupling_detuning_khz: dc,
            inhomogeneous_khz: dinh,
        };
        let p = MediumParams {
            gamma12_khz: g12,
            gamma13_khz: g13,
            gamma23_khz: g13,
            decay31_khz: d31,
            decay32_khz: d31,
            ..MediumParams::default()
        };
        let l = liouvillian(&rho, &inp, &p).unwrap();
        prop_assert!((l[0][1] - spin_row(&rho, &inp, &p)).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evolved_states_stay_valid(
        probe in 0.0f64..150.0,
        coupling in 0.0f64..150.0,
        dp in -50.0f64..50.0,
        dinh in -50.0f64..50.0,
        d31 in 0.0f64..5.0,
        d32 in 0.0f64..5.0,
    ) {
        let seq = PulseSequence::new(
            vec![
                Pulse::new(Transition::Probe, probe, 0.0, 8.0, Edge::RaisedCosine { edge_us: 1.0 }, dp).unwrap(),
                Pulse::square(Transition::Coupling, coupling, 2.0, 12.0).unwrap(),
            ],
            15.0,
        )
        .unwrap();
        let p = MediumParams { decay31_khz: d31, decay32_khz: d32, ..closed_medium() };
        let ev = evolve(&DensityMatrix::ground(), &seq, &p, dinh, &Stepping::new(0.01, 5).recording_states()).unwrap();
        for rho in ev.states.unwrap() {
            prop_assert!(rho.validate(1e-9).ok());
        }
    }

    #[test]
    fn raised_cosine_envelope_is_continuous(edge in 0.1f64..4.0, t0 in 0.0f64..5.0, len in 8.0f64..20.0) {
        let p = Pulse::new(Transition::Probe, 100.0, t0, t0 + len, Edge::RaisedCosine { edge_us: edge }, 0.0).unwrap();
        let h = 1e-4;
        let bound = 100.0 * std::f64::consts::PI / (2.0 * edge) * h * 1.01;
        let mut t = t0 - 1.0;
        while t < t0 + len + 1.0 {
            prop_assert!((p.envelope(t + h) - p.envelope(t)).abs() <= bound);
            t += h;
        }
    }
}

#[test]
fn square_pi_pulse_inverts_population() {
    let seq = PulseSequence::new(vec![Pulse::square(Transition::Probe, 100.0, 0.0, 5.0).unwrap()], 5.0).unwrap();
    let p = MediumParams {
        gamma13_khz: 0.0,
        gamma23_khz: 0.0,
        ..MediumParams::default()
    };
    let ev = evolve(&DensityMatrix::ground(), &seq, &p, 0.0, &Stepping::new(0.001, 100)).unwrap();
    assert!((ev.final_state.population(3) - 1.0).abs() < 1e-4);
}

#[test]
fn free_diagonal_state_is_constant() {
    let rho = DensityMatrix::diagonal([0.5, 0.3, 0.2]);
    let p = MediumParams {
        decay31_khz: 0.0,
        decay32_khz: 0.0,
        ..MediumParams::default()
    };
    let ev = evolve(&rho, &PulseSequence::free(0.0, 20.0).unwrap(), &p, 0.0, &Stepping::new(0.01, 10)).unwrap();
    for (ch, values) in ev.series.channels() {
        let first = values[0];
        assert!(values.iter().all(|v| *v == first), "{} drifted", ch.name());
    }
}

#[test]
fn dark_state_is_stationary() {
    let (op, oc) = (20.0f64, 100.0f64);
    let theta = (op / oc).atan();
    let dark = DensityMatrix::pure([c(theta.cos(), 0.0), c(-theta.sin(), 0.0), c(0.0, 0.0)]).unwrap();
    let seq = PulseSequence::new(
        vec![
            Pulse::square(Transition::Probe, op, 0.0, 50.0).unwrap(),
            Pulse::square(Transition::Coupling, oc, 0.0, 50.0).unwrap(),
        ],
        50.0,
    )
    .unwrap();
    let p = MediumParams {
        gamma13_khz: 0.0,
        gamma23_khz: 0.0,
        ..MediumParams::default()
    };
    let ev = evolve(&dark, &seq, &p, 0.0, &Stepping::new(0.01, 1)).unwrap();
    let worst = ev.series.channel(Channel::ImRho13).unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst < 1e-6, "max |Im ρ13| = {worst}");

    let zero = liouvillian(
        &dark,
        &BlochInputs {
            probe_rabi_khz: op,
            coupling_rabi_khz: oc,
            ..BlochInputs::default()
        },
        &p,
    )
    .unwrap();
    assert!(zero.iter().flatten().all(|v| v.norm() < 1e-12));
}

#[test]
fn trace_and_hermiticity_hold_over_200_us() {
    let seq = PulseSequence::new(
        vec![
            Pulse::square(Transition::Probe, 60.0, 0.0, 40.0).unwrap(),
            Pulse::square(Transition::Coupling, 90.0, 20.0, 120.0).unwrap(),
            Pulse::new(Transition::Probe, 30.0, 150.0, 190.0, Edge::RaisedCosine { edge_us: 5.0 }, 0.0).unwrap(),
        ],
        200.0,
    )
    .unwrap();
    let ev = evolve(&DensityMatrix::ground(), &seq, &closed_medium(), 7.0, &Stepping::new(0.01, 1)).unwrap();
    assert!(ev.conservation.max_trace_error <= 1e-9);
    assert!(ev.conservation.max_hermiticity_error <= 1e-12);
}

#[test]
fn halving_dt_changes_fig2_channels_by_at_most_1e_6() {
    let p = MediumParams::default();
    let coarse = evolve(&DensityMatrix::ground(), &fig2_sequence(), &p, 0.0, &Stepping::new(0.01, 10)).unwrap();
    let fine = evolve(&DensityMatrix::ground(), &fig2_sequence(), &p, 0.0, &Stepping::new(0.005, 20)).unwrap();
    assert_eq!(coarse.series.t_us().len(), fine.series.t_us().len());
    for ch in Channel::ALL {
        let a = coarse.series.channel(ch).unwrap();
        let b = fine.series.channel(ch).unwrap();
        let d = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d <= 1e-6, "{}: {d}", ch.name());
    }
}
