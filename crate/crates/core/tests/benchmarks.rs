use falsur::model::{benchmarks, CostWrapper, Executable};
use falsur::search::{evaluate, generate};
use falsur::signals::SignalSet;
use falsur::stl::Verdict;
use falsur::sysid::mse;
use falsur::{seeded, Error};

const DESK: [&str; 4] = ["heat2r", "autotrans", "fuelctl", "satlite"];

#[test]
fn every_id_resolves() {
    for id in benchmarks::IDS {
        let b = benchmarks::get(id).unwrap();
        assert_eq!(
            b.profile.names(),
            b.model
                .inputs()
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>()
        );
        b.formula().unwrap();
    }
    assert!(matches!(benchmarks::get("igc"), Err(Error::Config(_))));
}

#[test]
fn full_day_satellite_configuration() {
    let b = benchmarks::get("satlite-day").unwrap();
    assert_eq!(b.profile.domain.end(), 86400.0);
    assert_eq!(b.profile.domain.step(), 0.03125);
    assert_eq!(b.profile.dimension(), 64);
}

#[test]
fn fixtures_are_certified() {
    for id in DESK {
        let b = benchmarks::get(id).unwrap();
        let f = b.formula().unwrap();
        let (bad, _) = evaluate(b.model.as_ref(), &f, &b.violating_input().unwrap()).unwrap();
        let (good, _) = evaluate(b.model.as_ref(), &f, &b.satisfying_input().unwrap()).unwrap();
        assert_eq!(Verdict::of(bad), Verdict::Violated, "{id}: {bad}");
        assert_eq!(Verdict::of(good), Verdict::Satisfied, "{id}: {good}");
    }
}

#[test]
fn violation_rate_is_small_but_nonzero() {
    for id in DESK {
        let b = benchmarks::get(id).unwrap();
        let f = b.formula().unwrap();
        let mut rng = seeded(7);
        let hits = (0..1000)
            .filter(|_| {
                let c = generate(&b.profile, &mut rng).unwrap();
                evaluate(b.model.as_ref(), &f, &c).unwrap().0 <= 0.0
            })
            .count();
        assert!(hits > 0 && hits < 200, "{id}: {hits} of 1000");
    }
}

#[test]
fn nominal_heating_stays_in_band() {
    let b = benchmarks::get("heat2r").unwrap();
    let out = b
        .model
        .execute(b.satisfying_input().unwrap().signals())
        .unwrap();
    for s in out.signals() {
        assert!(s.values().iter().all(|v| *v > -1.4), "{}", s.name());
    }
}

#[test]
fn extreme_temperatures_push_attitude_error_past_two() {
    let b = benchmarks::get("satlite").unwrap();
    let input = b.violating_input().unwrap();
    for (spec, s) in b.profile.channels.iter().zip(input.signals().signals()) {
        assert!(
            s.values()
                .iter()
                .all(|v| (v - spec.range.0).abs() < 1e-9 || (v - spec.range.1).abs() < 1e-9),
            "{}",
            s.name()
        );
    }
    let out = b.model.execute(input.signals()).unwrap();
    let peak = out
        .get("error")
        .unwrap()
        .values()
        .iter()
        .fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    assert!(peak > 2.0, "peak {peak}");
}

#[test]
fn execution_is_deterministic_and_reentrant() {
    for id in DESK {
        let b = benchmarks::get(id).unwrap();
        let input = generate(&b.profile, &mut seeded(3)).unwrap();
        let first = b.model.execute(input.signals()).unwrap();
        let outs: Vec<SignalSet> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..4)
                .map(|_| s.spawn(|| b.model.execute(input.signals()).unwrap()))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for o in outs {
            assert_eq!(o, first, "{id}");
        }
    }
}

#[test]
fn cost_wrapper_is_transparent() {
    for id in DESK {
        let b = benchmarks::get(id).unwrap();
        let wrapped = CostWrapper::new(b.model.clone(), 3);
        assert_eq!(wrapped.inputs(), b.model.inputs());
        assert_eq!(wrapped.outputs(), b.model.outputs());
        let input = generate(&b.profile, &mut seeded(9)).unwrap();
        let plain = b.model.execute(input.signals()).unwrap();
        let slow = wrapped.execute(input.signals()).unwrap();
        assert!(mse(&plain, &slow).unwrap() < 1e-18, "{id}");
    }
}

#[test]
fn wrong_channels_are_rejected() {
    let heat = benchmarks::get("heat2r").unwrap();
    let sat = benchmarks::get("satlite").unwrap();
    let input = generate(&sat.profile, &mut seeded(1)).unwrap();
    assert!(heat.model.execute(input.signals()).is_err());
}

#[test]
fn traces_export_as_csv() {
    let b = benchmarks::get("fuelctl").unwrap();
    let out = b
        .model
        .execute(b.satisfying_input().unwrap().signals())
        .unwrap();
    let mut buf = Vec::new();
    out.write_csv(&mut buf).unwrap();
    let back = SignalSet::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.names(), out.names());
    assert!(mse(&out, &back).unwrap() < 1e-24);
}
