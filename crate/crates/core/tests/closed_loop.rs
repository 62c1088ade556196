use std::path::Path;

use mav_tec::airframe::{trim_level_flight, Airframe, ConstantWind};
use mav_tec::config::{ControllerKind, RunConfig, ScenarioKind};
use mav_tec::inner_loop::{PitchGains, PitchPid};
use mav_tec::sim::{
    bound_violations, compute_metrics, run_comparison_pair, run_scenario, CompareReport, Series,
};
use proptest::prelude::*;

fn shipped(name: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    RunConfig::load(path).unwrap()
}

fn csv_bytes(series: &Series) -> Vec<u8> {
    let mut buf = Vec::new();
    series.write_csv(&mut buf).unwrap();
    buf
}

#[test]
fn pitch_loop_tracks_a_five_degree_step() {
    let af = Airframe::aerosonde();
    let trim = trim_level_flight(35.0, 100.0, &af).unwrap();
    let mut pid = PitchPid::for_airframe(PitchGains::default(), &af);
    pid.reset_to(trim.delta_e);
    let (dt, step) = (0.01, 5f64.to_radians());
    let target = trim.theta + step;
    let mut state = trim.state();
    let mut inputs = trim.inputs();
    let mut thetas = Vec::new();
    for k in 0..500 {
        inputs.delta_e = pid.update(target, state.theta, state.q, dt);
        state = af
            .step_rk4(&state, &inputs, &ConstantWind::default(), k as f64 * dt, dt)
            .unwrap();
        thetas.push(state.theta);
    }
    // 5% attitude band. The PI zero at k_i / k_p leaves a slow tail of about
    // 0.2 deg that takes several seconds to enter a 2% band.
    let band = 0.05 * step;
    let last_out = thetas.iter().rposition(|th| (th - target).abs() > band).unwrap();
    let settling = (last_out + 1) as f64 * dt;
    let overshoot = thetas.iter().map(|th| th - target).fold(0.0_f64, f64::max) / step;
    assert!(settling < 2.0, "settling {settling}");
    assert!(overshoot < 0.2, "overshoot {overshoot}");
}

#[test]
fn hold_stays_at_trim_for_both_controllers() {
    let cfg = shipped("hold.toml");
    for controller in ControllerKind::ALL {
        let r = run_scenario(&cfg, controller, 1).unwrap();
        for s in &r.series.samples {
            assert!((s.h - 100.0).abs() < 0.5, "{controller} t {} h {}", s.t, s.h);
            assert!((s.va - 35.0).abs() < 0.2, "{controller} t {} va {}", s.t, s.va);
        }
    }
}

#[test]
fn lateral_hold_keeps_wings_level_for_a_minute() {
    let mut cfg = shipped("turbulence.toml");
    cfg.scenario.duration = 60.0;
    for controller in ControllerKind::ALL {
        let r = run_scenario(&cfg, controller, 4).unwrap();
        let worst = r.series.samples.iter().map(|s| s.phi.abs()).fold(0.0, f64::max);
        assert!(worst < 0.5f64.to_radians(), "{controller}: {worst}");
    }
}

#[test]
fn altitude_step_converges_for_both_controllers() {
    let cfg = shipped("altitude_step.toml");
    for controller in ControllerKind::ALL {
        let r = run_scenario(&cfg, controller, 1).unwrap();
        let tail: Vec<_> = r
            .series
            .samples
            .iter()
            .filter(|s| s.t >= cfg.scenario.duration - 1.0)
            .collect();
        for s in tail {
            assert!((s.h - 110.0).abs() < 0.2, "{controller} t {} h {}", s.t, s.h);
        }
        assert!(r.metrics.settled);
    }
}

#[test]
fn airspeed_step_converges_for_both_controllers() {
    let cfg = shipped("airspeed_step.toml");
    for controller in ControllerKind::ALL {
        let r = run_scenario(&cfg, controller, 1).unwrap();
        let last = r.series.samples.last().unwrap();
        assert!((last.va - 40.0).abs() < 0.1, "{controller} va {}", last.va);
        assert!((last.h - 100.0).abs() < 0.2, "{controller} h {}", last.h);
        assert!(r.metrics.settled);
    }
}

#[test]
fn energy_rate_matches_specific_excess_power() {
    for name in ["altitude_step.toml", "airspeed_step.toml"] {
        let cfg = shipped(name);
        let m = cfg.airframe.m;
        let g = cfg.airframe.g;
        for controller in ControllerKind::ALL {
            let r = run_scenario(&cfg, controller, 1).unwrap();
            let mut checked = 0;
            for s in r.series.samples.iter().step_by(100) {
                assert_eq!(s.phi, 0.0);
                if s.alpha.abs() >= 5f64.to_radians() {
                    continue;
                }
                let excess = (s.thrust - s.drag) / (m * g);
                assert!(
                    (s.e_dot - excess).abs() < 0.01,
                    "{name} {controller} t {}: {} vs {excess}",
                    s.t,
                    s.e_dot
                );
                checked += 1;
            }
            assert!(checked > 20);
        }
    }
}

#[test]
fn same_seed_gives_identical_csv() {
    let cfg = shipped("turbulence.toml");
    for controller in ControllerKind::ALL {
        let a = run_scenario(&cfg, controller, 7).unwrap();
        let b = run_scenario(&cfg, controller, 7).unwrap();
        assert_eq!(csv_bytes(&a.series), csv_bytes(&b.series));
        let c = run_scenario(&cfg, controller, 8).unwrap();
        assert_ne!(csv_bytes(&a.series), csv_bytes(&c.series));
    }
}

#[test]
fn metrics_from_stored_csv_equal_runtime_metrics() {
    for name in [
        "altitude_step.toml",
        "airspeed_step.toml",
        "turbulence.toml",
        "hold.toml",
    ] {
        let cfg = shipped(name);
        for controller in ControllerKind::ALL {
            let r = run_scenario(&cfg, controller, 2).unwrap();
            let back = Series::read_csv(csv_bytes(&r.series).as_slice()).unwrap();
            assert_eq!(back, r.series);
            assert_eq!(compute_metrics(&back, &r.spec), r.metrics, "{name} {controller}");
        }
    }
}

#[test]
fn stored_commands_respect_the_bounds() {
    for name in [
        "altitude_step.toml",
        "airspeed_step.toml",
        "turbulence.toml",
        "hold.toml",
    ] {
        let cfg = shipped(name);
        for controller in ControllerKind::ALL {
            let r = run_scenario(&cfg, controller, 3).unwrap();
            assert_eq!(
                bound_violations(&r.series, &cfg),
                Vec::<String>::new(),
                "{name} {controller}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // Large steps and strong gusts drive the commands into their limits;
    // the stored series must still stay inside them.
    #[test]
    fn saturating_scenarios_stay_in_bounds(
        seed in 0u64..1000,
        step in -40.0..40.0f64,
        sigma in 0.0..4.0f64,
        classic in any::<bool>(),
    ) {
        let mut cfg = shipped("turbulence.toml");
        cfg.scenario.duration = 15.0;
        cfg.turbulence.sigma_u = sigma;
        cfg.turbulence.sigma_w = sigma;
        if sigma < 0.5 {
            cfg.scenario.kind = ScenarioKind::AltitudeStep;
            cfg.scenario.step = step;
        }
        let controller = if classic { ControllerKind::TecClassic } else { ControllerKind::LadrcTec };
        if let Ok(r) = run_scenario(&cfg, controller, seed) {
            prop_assert_eq!(bound_violations(&r.series, &cfg), Vec::<String>::new());
        }
    }
}

#[test]
fn self_comparison_gives_identical_metrics() {
    let cfg = shipped("turbulence.toml");
    for controller in ControllerKind::ALL {
        let cmp = run_comparison_pair(&cfg, controller, controller).unwrap();
        assert_eq!(cmp.report.baseline.runs, cmp.report.candidate.runs);
        assert_eq!(cmp.report.baseline.mean, cmp.report.candidate.mean);
        assert!(cmp.report.candidate_better.values().all(|b| !b));
    }
}

#[test]
fn compare_report_round_trips_and_rejects_tampering() {
    let mut cfg = shipped("turbulence.toml");
    cfg.scenario.seeds = 3;
    cfg.scenario.duration = 10.0;
    let cmp = run_comparison_pair(&cfg, ControllerKind::TecClassic, ControllerKind::LadrcTec).unwrap();
    let text = serde_json::to_string_pretty(&cmp.report).unwrap();
    assert_eq!(CompareReport::from_json(&text).unwrap(), cmp.report);
    assert_eq!(cmp.report.seeds, vec![1, 2, 3]);

    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let tampered = [
        ("schema", serde_json::json!("other/v9")),
        ("seeds", serde_json::json!([])),
        ("extra", serde_json::json!(1)),
        ("candidate_better", serde_json::json!({ "settling_time": true })),
    ];
    for (field, replacement) in tampered {
        let mut v = value.clone();
        v[field] = replacement;
        assert!(CompareReport::from_json(&v.to_string()).is_err(), "{field}");
    }
    let mut v = value.clone();
    v["candidate"]["failures"] = serde_json::json!(2);
    assert!(CompareReport::from_json(&v.to_string()).is_err());
}

#[test]
fn setup_faults_carry_a_timestamp() {
    let mut cfg = shipped("hold.toml");
    cfg.scenario.va = 3.0;
    let err = run_scenario(&cfg, ControllerKind::LadrcTec, 1).unwrap_err();
    assert!(err.is_simulation_fault());
    assert_eq!(err.time(), Some(0.0));
    assert_eq!(err.kind(), "trim_failure");
}

#[test]
fn allocation_inputs_are_unchanged_by_the_step_kind() {
    // The operating point is fixed by the cruise condition alone.
    let a = run_scenario(&shipped("altitude_step.toml"), ControllerKind::LadrcTec, 1).unwrap();
    let b = run_scenario(&shipped("airspeed_step.toml"), ControllerKind::LadrcTec, 1).unwrap();
    assert_eq!(a.allocation, b.allocation);
    assert_eq!(a.trim, b.trim);
}
