use evprofile::extraction::{extract_tail_from, TailParams};
use evprofile_wasm::{extract, extract_session, features, simulate, simulate_session};

fn session() -> evprofile_wasm::Simulated {
    simulate(40.0, 0.7, 60.0, 1.0, 0.8, 0.1, 32.0, 0.3, 1).unwrap()
}

#[test]
fn extraction_matches_the_library() {
    let s = session();
    let params = TailParams::default();
    let r = extract(&s.current, &s.pilot, &params).unwrap();
    let tail = extract_tail_from(&s.current, &s.pilot, &params).unwrap();
    assert_eq!(r.t_start, Some(tail.t_start));
    assert_eq!(r.s, Some(tail.s));
    assert_eq!(r.delta.len(), tail.begin());
    assert_eq!(r.median.len(), tail.begin());
    // pilot above i_max: the Delta mean recovers d
    assert!((r.delta_mean.unwrap() - 1.0).abs() < 0.05);
    assert!(r.t_start.unwrap().abs_diff(s.zero_onset.unwrap()) <= params.n_avg);
}

#[test]
fn catalog_has_named_entries() {
    let s = session();
    let f = features(&s.current, &s.pilot, &TailParams::default()).unwrap();
    assert_eq!(f.len(), 128);
    assert_eq!(f[0].name, "tail__mean");
    assert!(f.iter().all(|x| x.value.is_finite()));
}

#[test]
fn exports_report_errors_as_json() {
    let bad: serde_json::Value = serde_json::from_str(&simulate_session(
        40.0, 2.0, 60.0, 1.0, 0.8, 0.1, 32.0, 0.3, 1,
    ))
    .unwrap();
    assert!(bad["error"].as_str().unwrap().contains("invalid"));
    let flat = vec![10.0; 50];
    let r: serde_json::Value =
        serde_json::from_str(&extract_session(&flat, &flat, 25, 0.01, 10, 0.1)).unwrap();
    assert!(r["t_start"].is_null());
    let r: serde_json::Value =
        serde_json::from_str(&extract_session(&flat, &flat[1..], 25, 0.01, 10, 0.1)).unwrap();
    assert!(r["error"].is_string());
}
