mod common;

use capcover::arith::{int, rat};
use capcover::instance::line_metric;
use capcover::instance::{Ball, Instance, Variant};
use capcover::lp::{build_mmcc_lp, solve_lp};
use common::{lp_by_vertices, suite};

fn simplex_value(inst: &Instance) -> capcover::arith::Rational {
    solve_lp(&build_mmcc_lp(inst).unwrap()).unwrap().objective
}

#[test]
fn line3_optimum_is_two() {
    let balls = vec![
        Ball { id: 0, center: 0, radius: int(1), capacity: 2 },
        Ball { id: 1, center: 2, radius: int(1), capacity: 2 },
    ];
    let inst = Instance::new(line_metric(&[0, 1, 2]), balls, Variant::Monotonic).unwrap();
    assert_eq!(lp_by_vertices(&inst), Some(int(2)));
    assert_eq!(simplex_value(&inst), int(2));
}

#[test]
fn two_wide_balls_share_three_points() {
    // Capacity 2 each over three points: 2·y0 + 2·y1 ≥ 3.
    let balls = vec![
        Ball { id: 0, center: 0, radius: int(2), capacity: 2 },
        Ball { id: 1, center: 2, radius: int(2), capacity: 2 },
    ];
    let inst = Instance::new(line_metric(&[0, 1, 2]), balls, Variant::Uniform).unwrap();
    assert_eq!(lp_by_vertices(&inst), Some(rat(3, 2)));
    assert_eq!(simplex_value(&inst), rat(3, 2));
}

#[test]
fn empty_polytope_has_no_vertices() {
    let balls = vec![Ball { id: 0, center: 1, radius: int(1), capacity: 2 }];
    let inst = Instance::new(line_metric(&[0, 1, 2]), balls, Variant::Uniform).unwrap();
    assert_eq!(lp_by_vertices(&inst), None);
}

#[test]
fn simplex_matches_vertex_enumeration_on_small_models() {
    for variant in [Variant::Monotonic, Variant::Uniform] {
        for inst in suite(variant, 150) {
            let expected = lp_by_vertices(&inst).expect("suite instances are feasible");
            assert_eq!(simplex_value(&inst), expected);
        }
    }
}
