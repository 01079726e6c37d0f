//! A uniform instance whose rounded solution needs almost the whole golden
//! expansion: a spread light ball ends up serving a point that reached the
//! cluster through another light ball on the far side of the heavy ball.

use capcover::arith::{int, rat, Quadratic, Rational};
use capcover::instance::{Ball, Instance, MetricSpace, Variant};
use capcover::lp::FractionalSolution;
use capcover::rounding::{run_pipeline, PipelineConfig, SelectCase, TraceEvent};
use capcover::verify::{check_solution, realized_ratio, Candidate};

const LIGHTS: usize = 11;
const HUB: usize = 0;
const Q: usize = 2 * LIGHTS + 1;

fn center(i: usize) -> usize {
    i
}

fn leaf(i: usize) -> usize {
    LIGHTS + i
}

fn mid(i: usize) -> usize {
    Q + i
}

/// Tree: hub to a midpoint at `r_h`, midpoint to a light center at 1, each
/// light center to its leaf at 1, every leaf to `Q` at 2. Midpoints are
/// sites but not demand points. Heavy ball 0 sits on the hub with
/// radius `r_h`, heavy ball 12 on `Q` with radius 2, lights 1..=11 on their
/// centers with radius 1. All capacities are 12.
fn instance(r_h: Rational) -> Instance {
    let n = Q + LIGHTS + 1;
    let mut d: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
    let mut edge = |a: usize, b: usize, w: Rational| {
        d[a][b] = Some(w.clone());
        d[b][a] = Some(w);
    };
    for i in 1..=LIGHTS {
        edge(HUB, mid(i), r_h.clone());
        edge(mid(i), center(i), int(1));
        edge(center(i), leaf(i), int(1));
        edge(leaf(i), Q, int(2));
    }
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(int(0));
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (&d[i][k], &d[k][j]) {
                    let via = a + b;
                    if d[i][j].as_ref().is_none_or(|c| via < *c) {
                        d[i][j] = Some(via);
                    }
                }
            }
        }
    }
    let rows = d.into_iter().map(|r| r.into_iter().map(Option::unwrap).collect()).collect();
    let space = MetricSpace::new(rows).unwrap();
    let mut balls = vec![Ball { id: 0, center: HUB, radius: r_h, capacity: 12 }];
    for i in 1..=LIGHTS {
        balls.push(Ball { id: i, center: center(i), radius: int(1), capacity: 12 });
    }
    balls.push(Ball { id: LIGHTS + 1, center: Q, radius: int(2), capacity: 12 });
    let demand = std::iter::once(HUB).chain((1..=LIGHTS).map(leaf)).chain([Q]).collect();
    Instance::with_demand(space, balls, Variant::Uniform, demand).unwrap()
}

/// Both heavy balls fully open; every light opened at `1/60` and sending
/// `1/100` to its leaf.
fn sigma_star() -> FractionalSolution {
    let g = LIGHTS + 1;
    let mut s = FractionalSolution::new();
    s.set_y(0, int(1));
    s.set_y(g, int(1));
    s.set_x(0, HUB, int(1));
    s.set_x(g, Q, int(1));
    for i in 1..=LIGHTS {
        s.set_y(i, rat(1, 60));
        s.set_x(i, leaf(i), rat(1, 100));
        s.set_x(g, leaf(i), rat(99, 100));
    }
    s
}

fn golden() -> Quadratic {
    Quadratic::two_plus_sqrt5()
}

#[test]
fn spread_needs_nearly_the_full_golden_factor() {
    // Just below 1/c, so the cluster spreads over its ten largest lights.
    let inst = instance(rat(309, 500));
    let run = run_pipeline(&inst, &sigma_star(), &PipelineConfig::default()).unwrap();
    let select = run
        .trace
        .events
        .iter()
        .find_map(|e| match e {
            TraceEvent::Select { cluster: 0, case, balls, .. } => Some((*case, balls.clone())),
            _ => None,
        })
        .unwrap();
    assert_eq!(select, (SelectCase::GoldenSpread, (1..=10).collect()));
    // The leaf of the unselected light lands on light 1.
    assert!(run.rounded.flow.contains_key(&(1, leaf(LIGHTS))));
    assert_eq!(inst.dist_to(1, leaf(LIGHTS)), &(int(3) + rat(309, 250)));

    let candidate = Candidate::from(&run.rounded);
    let ratio = realized_ratio(&inst, &candidate);
    assert_eq!(ratio, int(3) + rat(309, 250));
    assert!(Quadratic::from_rational(ratio) > golden() - Quadratic::from_rational(rat(1, 1000)));

    let at_golden = check_solution(&inst, &candidate, &golden());
    assert!(at_golden.check("fractional.coverage").unwrap().passed, "{at_golden}");

    let below = golden() - Quadratic::from_rational(rat(1, 1000));
    let report = check_solution(&inst, &candidate, &below);
    let coverage = report.check("fractional.coverage").unwrap();
    assert!(!coverage.passed);
    assert!(
        coverage.detail.contains(&format!("ball 1 serves point {} at distance 1059/250", leaf(LIGHTS))),
        "{}",
        coverage.detail
    );
}

#[test]
fn heavy_ball_above_threshold_keeps_the_residual() {
    // At 5/8 > 1/c the heavy ball is expanded instead and the far leaf stays
    // within (2+√5)·r_h of the hub.
    let inst = instance(rat(5, 8));
    let run = run_pipeline(&inst, &sigma_star(), &PipelineConfig::default()).unwrap();
    let case = run.trace.events.iter().find_map(|e| match e {
        TraceEvent::Select { cluster: 0, case, .. } => Some(*case),
        _ => None,
    });
    assert_eq!(case, Some(SelectCase::GoldenHeavy));
    let report = check_solution(&inst, &Candidate::from(&run.rounded), &golden());
    assert!(report.passed(), "{report}");
}
