mod common;

use common::*;
use evsim::engine::{run_experiment_observed, Baseload, World};
use evsim::fleet::{EvModel, VehicleId};
use evsim::grid::LoadSeries;
use evsim::{run_experiment, Error, StrategyKind, Timestamp};

fn model(rate: f64) -> EvModel {
    EvModel::new("test", 60.0, rate, 1.0)
}

fn day() -> (Timestamp, Timestamp) {
    (at(2039, 3, 1, 0, 0), at(2039, 3, 2, 0, 0))
}

/// Grant of `id` after each tick.
fn grants(
    spec: &evsim::ExperimentSpec,
    data: &evsim::ScenarioData,
    id: u32,
) -> Vec<(Timestamp, f64)> {
    let mut out = Vec::new();
    run_experiment_observed(spec, data, &mut |w: &World<'_>, t: Timestamp| {
        let kw = w
            .vehicles()
            .find(|(v, _)| v.id == VehicleId(id))
            .map(|(_, kw)| kw)
            .unwrap_or(0.0);
        out.push((t, kw));
    })
    .unwrap();
    out
}

fn grant_at(log: &[(Timestamp, f64)], t: Timestamp) -> f64 {
    log.iter().find(|(u, _)| *u == t).unwrap().1
}

#[test]
fn arrival_on_a_boundary_charges_in_the_same_tick() {
    let (from, to) = day();
    let v = vehicle(
        0,
        model(11.0),
        from,
        60.0,
        60.0,
        vec![trip(from + 60, from + 120, 20.0)],
    );
    let data = fixed_data(1, vec![v], from, to, 400.0, 0.0);
    let spec = experiment(StrategyKind::RoundRobin, from, to, 1, None);
    let log = grants(&spec, &data, 0);
    assert_eq!(grant_at(&log, from + 60), 0.0, "away while departing");
    assert_eq!(grant_at(&log, from + 119), 0.0);
    assert_eq!(grant_at(&log, from + 120), 11.0);
}

#[test]
fn dispatch_sees_the_baseload_of_its_own_tick() {
    let (from, to) = day();
    let v = vehicle(0, model(11.0), from, 0.0, 60.0, vec![]);
    let mut data = fixed_data(1, vec![v], from, to, 400.0, 0.0);
    let mut values = vec![100.0; 24];
    values[1] = 350.0;
    data.baseload = Baseload::new(vec![LoadSeries::new(from, 60, values)]).unwrap();
    let spec = experiment(StrategyKind::Edf, from, to, 1, None);
    let mut budgets = Vec::new();
    run_experiment_observed(&spec, &data, &mut |w: &World<'_>, t: Timestamp| {
        budgets.push((t, w.budget_kw()))
    })
    .unwrap();
    assert_eq!(grant_at(&budgets, from + 59), 300.0);
    assert_eq!(grant_at(&budgets, from + 60), 50.0);
}

#[test]
fn released_capacity_waits_for_the_next_boundary() {
    let (from, to) = day();
    // The first vehicle needs 2 kWh, about 11 minutes at 11 kW.
    let fleet = vec![
        vehicle(0, model(11.0), from, 58.0, 60.0, vec![]),
        vehicle(1, model(11.0), from, 0.0, 60.0, vec![]),
    ];
    let data = fixed_data(2, fleet, from, to, 11.0, 0.0);
    let spec = experiment(StrategyKind::RoundRobin, from, to, 1, None);
    let (first, second) = (grants(&spec, &data, 0), grants(&spec, &data, 1));
    assert_eq!(grant_at(&first, from), 11.0);
    assert_eq!(grant_at(&second, from), 0.0);
    let done = first.iter().find(|(_, kw)| *kw == 0.0).unwrap().0;
    assert!(done > from && done < from + 15, "finished at {done}");
    for t in done.minutes()..(from + 15).minutes() {
        let t = Timestamp::from_minutes(t);
        assert_eq!(grant_at(&second, t), 0.0, "redistributed at {t}");
    }
    assert_eq!(grant_at(&second, from + 15), 11.0);
}

#[test]
fn grants_hold_between_boundaries() {
    let (from, to) = day();
    let fleet = (0..3)
        .map(|h| vehicle(h, model(11.0), from, 0.0, 60.0, vec![]))
        .collect();
    let data = fixed_data(3, fleet, from, to, 22.0, 0.0);
    let spec = experiment(StrategyKind::RoundRobin, from, to, 1, None);
    for id in 0..3 {
        let log = grants(&spec, &data, id);
        for window in log[..240].chunks(15) {
            assert!(
                window.iter().all(|(_, kw)| *kw == window[0].1),
                "vehicle {id} changed mid-interval"
            );
        }
    }
}

#[test]
fn fcfs_serves_in_arrival_order() {
    let (from, to) = day();
    let back = |h: u32, minute: i64| {
        vehicle(
            h,
            model(11.0),
            from,
            60.0,
            60.0,
            vec![trip(from + 10, from + minute, 30.0)],
        )
    };
    let data = fixed_data(
        3,
        vec![back(0, 62), back(1, 61), back(2, 60)],
        from,
        to,
        22.0,
        0.0,
    );
    let spec = experiment(StrategyKind::Fcfs, from, to, 1, None);
    let logs: Vec<_> = (0..3).map(|id| grants(&spec, &data, id)).collect();
    let t = from + 70;
    assert_eq!(grant_at(&logs[2], t), 11.0);
    assert_eq!(grant_at(&logs[1], t), 11.0);
    assert_eq!(grant_at(&logs[0], t), 0.0);
    let start = |log: &[(Timestamp, f64)]| {
        log.iter()
            .find(|(u, kw)| *u >= from + 60 && *kw > 0.0)
            .unwrap()
            .0
    };
    assert!(start(&logs[0]) > start(&logs[1]));
}

#[test]
fn edf_rescues_the_early_leaver() {
    let (from, to) = day();
    // Both need 20 kWh with room for one 11 kW charger; the later arrival leaves first.
    let fleet = vec![
        vehicle(
            0,
            model(11.0),
            from,
            40.0,
            60.0,
            vec![trip(from + 600, from + 660, 1.0)],
        ),
        vehicle(
            1,
            model(11.0),
            from,
            60.0,
            60.0,
            vec![
                trip(from + 1, from + 5, 20.0),
                trip(from + 125, from + 200, 1.0),
            ],
        ),
    ];
    let data = fixed_data(2, fleet, from, to, 11.0, 0.0);
    let dissatisfied = |kind| {
        let out = run_experiment(&experiment(kind, from, to, 1, None), &data).unwrap();
        out.departures.iter().filter(|d| !d.satisfied).count()
    };
    let edf = dissatisfied(StrategyKind::Edf);
    assert_eq!(edf, 0);
    assert!(dissatisfied(StrategyKind::Fcfs) > 0);
    for kind in StrategyKind::ALL.into_iter().filter(|k| k.is_centralized()) {
        assert!(edf <= dissatisfied(kind), "{kind}");
    }
}

#[test]
fn energy_is_shifted_not_shed() {
    let (from, to) = (at(2039, 3, 1, 0, 0), at(2039, 3, 3, 0, 0));
    let fleet = (0..40)
        .map(|h| {
            vehicle(
                h,
                model(11.0),
                from,
                60.0,
                60.0,
                vec![
                    trip(at(2039, 3, 1, 8, 0), at(2039, 3, 1, 17, h), 20.0),
                    trip(at(2039, 3, 2, 7, 0), at(2039, 3, 2, 16, 0), 1.0),
                ],
            )
        })
        .collect();
    let data = fixed_data(40, fleet, from, to, 250.0, 1.0);
    let mut totals = Vec::new();
    for kind in StrategyKind::ALL {
        let out = run_experiment(&experiment(kind, from, to, 1, None), &data).unwrap();
        let delivered: f64 = out.vehicles.iter().map(|v| v.delivered_kwh).sum();
        assert_eq!(
            out.departures.iter().filter(|d| !d.satisfied).count(),
            0,
            "{kind}"
        );
        assert_eq!(out.overloads.is_empty(), kind.is_centralized(), "{kind}");
        totals.push(delivered);
    }
    for d in &totals {
        assert!((d - 840.0).abs() < 1e-6, "{totals:?}");
    }
}

#[test]
fn short_baseload_is_a_coverage_error() {
    let (from, to) = day();
    let mut data = fixed_data(1, vec![], from, to, 400.0, 1.0);
    data.baseload = Baseload::new(vec![LoadSeries::new(from, 60, vec![1.0; 12])]).unwrap();
    let err = run_experiment(&experiment(StrategyKind::Edf, from, to, 1, None), &data).unwrap_err();
    assert!(matches!(err, Error::InputCoverage { .. }), "{err}");
}

#[test]
fn same_seed_same_output() {
    let (from, to) = (at(2039, 1, 1, 0, 0), at(2039, 1, 4, 0, 0));
    let data = synthetic_data(30, vec![(2038, 10), (2040, 30)], from, to, 100.0, 3);
    let spec = experiment(StrategyKind::EqualCharge, from, to, 3, None);
    let (a, b) = (
        run_experiment(&spec, &data).unwrap(),
        run_experiment(&spec, &data).unwrap(),
    );
    assert_eq!(a.load.values, b.load.values);
    assert_eq!(a.reports, b.reports);
    assert_eq!(a.departures, b.departures);
}
