use std::f64::consts::TAU;

use proptest::prelude::*;

use elastica::contour::{contour_metrics, extract_contour};
use elastica::flow::TimeSeriesRecord;
use elastica::functionals::{energy_length, EnergyBreakdown, EnergyParams};
use elastica::io::{read_snapshot, read_timeseries, write_snapshot, write_timeseries};
use elastica::recovery::{build_recovery_field, Component, CurveSpec, CutoffWidth, Orientation, RecoveryParams};
use elastica::{Domain, GridSpec, ScalarField};

const EPS: f64 = 0.012;

/// Up to three circles on a ring, the first optionally with a hole.
fn curve_specs() -> impl Strategy<Value = CurveSpec> {
    (
        1usize..=3,
        prop::collection::vec((0.15f64..0.2, -0.04f64..0.04, -0.04f64..0.04), 3),
        0.0f64..TAU,
        any::<bool>(),
    )
        .prop_map(|(count, circles, turn, hole)| {
            let mut comps = Vec::new();
            for (i, (r, dx, dy)) in circles.into_iter().take(count).enumerate() {
                let th = turn + TAU * i as f64 / 3.0;
                let c = [0.5 * th.cos() + dx, 0.5 * th.sin() + dy];
                comps.push(Component::circle(c, r, Orientation::Positive));
                if i == 0 && hole {
                    comps.push(Component::circle(c, 0.5 * r, Orientation::Negative));
                }
            }
            CurveSpec::new(comps).expect("disjoint by construction")
        })
}

fn fine_domain() -> Domain {
    Domain::new(GridSpec::new(512, 1.1).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn contour_reproduces_spec_topology(spec in curve_specs()) {
        let d = fine_domain();
        let rp = RecoveryParams::new(EPS).with_cutoff(CutoffWidth::None);
        let u = build_recovery_field(&spec, &rp, &d).unwrap();
        let m = contour_metrics(&extract_contour(&d, &u));
        prop_assert_eq!(m.component_count, spec.len());
        let mut got = m.turning_numbers.clone();
        got.sort();
        let mut want: Vec<i32> = spec.components().iter().map(|c| c.orientation.sign() as i32).collect();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn contour_and_diffuse_length_agree(spec in curve_specs()) {
        let d = fine_domain();
        let rp = RecoveryParams::new(EPS).with_cutoff(CutoffWidth::None);
        let u = build_recovery_field(&spec, &rp, &d).unwrap();
        let sharp = contour_metrics(&extract_contour(&d, &u)).length;
        let diffuse = energy_length(&d, &u, &EnergyParams::elastica_only(EPS));
        prop_assert!((sharp - diffuse).abs() < 0.02 * sharp, "{} vs {}", sharp, diffuse);
    }

    #[test]
    fn snapshot_round_trip(values in prop::collection::vec(-2.0f64..2.0, 20 * 20), step in 0usize..100000, time in 0.0f64..1.0) {
        let grid = GridSpec::new(20, 1.1).unwrap();
        let u = ScalarField::from_values(grid, values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.pfield");
        write_snapshot(&path, &u, step, time).unwrap();
        let (h, back) = read_snapshot(&path).unwrap();
        prop_assert_eq!(h.step, step);
        prop_assert_eq!(h.time.to_bits(), time.to_bits());
        prop_assert_eq!(back.grid, u.grid);
        prop_assert!(back.values.iter().zip(&u.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn timeseries_round_trip(rows in prop::collection::vec((-1e3f64..1e3, 0usize..5, any::<bool>()), 0..8)) {
        let records: Vec<TimeSeriesRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, &(x, comps, with_tilde))| TimeSeriesRecord {
                step: i,
                time: 1e-5 * i as f64,
                energy: EnergyBreakdown { b: x, l: x / 3.0, t_abs: -x, t_bar: x * 1e-7, m: x.abs(), total: 2.0 * x },
                components: comps,
                length: x.abs() / 7.0,
                max_radius: 0.5,
                t_tilde: with_tilde.then_some(x / 11.0),
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ts.csv");
        write_timeseries(&path, &records).unwrap();
        let back = read_timeseries(&path).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in back.iter().zip(&records) {
            prop_assert_eq!(a.step, b.step);
            prop_assert_eq!(a.components, b.components);
            // 17 significant digits: exact
            prop_assert_eq!(a, b);
        }
    }
}

