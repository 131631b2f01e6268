use super::*;

fn quiet(i_max: f64, d: f64) -> EVSignature {
    EVSignature {
        i_max,
        d,
        ripple_amp: 0.0,
        noise_sigma: 0.0,
        ..NOMINAL
    }
}

#[test]
fn noiseless_cc_is_exact() {
    let g = generate_session(
        &quiet(30.0, 2.0),
        &ScheduleSpec::constant(32.0),
        0.2,
        15.0,
        1,
        &SessionMeta::default(),
    )
    .unwrap();
    let cv = g.truth.cv_onset.unwrap();
    assert!(g.session.current().values()[..cv]
        .iter()
        .all(|&c| c == 28.0));
    assert!(g.truth.has_tail);
    assert_eq!(g.truth.effective_offset, Some(4.0));
}

#[test]
fn decay_hits_one_over_e_at_tau() {
    let mut sig = quiet(30.0, 2.0);
    sig.tau = 40.0;
    let g = generate_session(
        &sig,
        &ScheduleSpec::constant(32.0),
        0.2,
        15.0,
        1,
        &SessionMeta::default(),
    )
    .unwrap();
    let cv = g.truth.cv_onset.unwrap();
    let c = g.session.current().values();
    assert!((c[cv + 40] - 28.0 / std::f64::consts::E).abs() < 1e-9);
    let z = g.truth.zero_onset.unwrap();
    assert!(c[z..].iter().all(|&v| v == 0.0));
    assert!(c[z - 1] >= CUTOFF_A);
}

#[test]
fn soc_is_monotone_and_phases_ordered() {
    let sig = EVSignature::draw(1.0, &mut seed::rng(5, &[]));
    let mut sched = ScheduleSpec::constant(32.0);
    sched.idle_gap_prob = 1.0;
    sched.spike_prob = 0.01;
    sched.spike_magnitude = 5.0;
    let g = generate_session(&sig, &sched, 0.3, 15.0, 9, &SessionMeta::default()).unwrap();
    assert!(g.truth.soc.windows(2).all(|w| w[1] >= w[0]));
    let (cv, z) = (g.truth.cv_onset.unwrap(), g.truth.zero_onset.unwrap());
    assert!(cv < z && z < g.session.current().len());
}

#[test]
fn early_departure_has_no_tail() {
    let mut sched = ScheduleSpec::constant(32.0);
    sched.max_samples = Some(50);
    let g = generate_session(&NOMINAL, &sched, 0.1, 15.0, 3, &SessionMeta::default()).unwrap();
    assert!(!g.truth.has_tail);
    assert_eq!(g.session.current().len(), 50);
}

#[test]
fn rejects_bad_inputs() {
    let meta = SessionMeta::default();
    assert!(generate_session(&NOMINAL, &ScheduleSpec::default(), 1.0, 15.0, 0, &meta).is_err());
    let mut sig = NOMINAL;
    sig.soc_switch = 0.9;
    assert!(generate_session(&sig, &ScheduleSpec::default(), 0.1, 15.0, 0, &meta).is_err());
    let mut sched = ScheduleSpec::default();
    sched.levels.push(PilotLevel {
        from: 0,
        amps: 10.0,
    });
    assert!(sched.validate().is_err());
}

#[test]
fn fleet_shape_and_determinism() {
    let spec = FleetSpec {
        n_evs: 3,
        sessions_per_ev: 4,
        ..FleetSpec::default()
    };
    let a = generate_fleet(&spec).unwrap();
    assert_eq!(a.fleet.n_sessions(), 12);
    assert!(a.fleet.groups().all(|(_, s)| s.len() == 4));
    let b = generate_fleet(&spec).unwrap();
    let ca: Vec<_> = a
        .fleet
        .sessions()
        .map(|s| s.current().values().to_vec())
        .collect();
    let cb: Vec<_> = b
        .fleet
        .sessions()
        .map(|s| s.current().values().to_vec())
        .collect();
    assert_eq!(ca, cb);
}

#[test]
fn zero_spread_signatures_coincide() {
    let sigs = draw_signatures(5, 0.0, 3);
    assert!(sigs.iter().all(|s| *s == NOMINAL));
}

#[test]
fn default_spread_respects_floor() {
    for seed in 0..5 {
        let sigs = draw_signatures(20, 1.0, seed);
        for i in 0..sigs.len() {
            for j in 0..i {
                assert!(sigs[i].distance(&sigs[j]) >= MIN_PAIRWISE_DISTANCE);
            }
        }
    }
}
