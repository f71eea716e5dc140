use dta_measure::fixtures::{model_a1, model_a2, model_a3, model_a4, model_itinerary};
use dta_measure::kernel::{
    analyze, discretized_step, AnalysisOptions, DiscretizedDistribution, GridSpec, GridState,
};
use dta_measure::product::{GeneratorSet, Product, ProductState};
use dta_measure::region::{
    bscc_decompose, build_region_graph, region_of, region_successors, ClockRegion,
};
use dta_measure::scalar::Rational;
use dta_measure::simulator::{estimate_discrete, estimate_timed, SimConfig};
use dta_measure::smp::{DelayDensity, Piece, SemiMarkovProcess};
use dta_measure::Dta;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

pub fn all_models() -> Vec<(&'static str, SemiMarkovProcess, Dta)> {
    let mut v = Vec::new();
    for (name, (m, a)) in [
        ("a1", model_a1()),
        ("a2", model_a2()),
        ("a3", model_a3()),
        ("a4", model_a4()),
        ("itinerary", model_itinerary()),
    ] {
        v.push((name, m, a));
    }
    v
}

/// Piecewise density on `[lo, ..)` from `(width in quarters, height)` parts,
/// padded so the support ends on an integer and rescaled to unit mass.
pub fn piecewise_density(lo: u32, parts: &[(i64, f64)]) -> DelayDensity {
    let mut widths: Vec<i64> = parts.iter().map(|p| p.0).collect();
    let total: i64 = widths.iter().sum();
    *widths.last_mut().unwrap() += (4 - total % 4) % 4;
    let len: i64 = widths.iter().sum();
    let mass: f64 = widths
        .iter()
        .zip(parts)
        .map(|(w, p)| *w as f64 / 4.0 * p.1)
        .sum();
    let mut start = Rational::from_integer(lo as i64);
    let mut pieces = Vec::new();
    for (w, p) in widths.iter().zip(parts) {
        let end = start + Rational::new(*w, 4);
        pieces.push(Piece {
            start,
            end,
            value: p.1 / mass,
        });
        start = end;
    }
    DelayDensity::piecewise(lo, lo + (len / 4) as u32, pieces).unwrap()
}

pub fn check_density(d: &DelayDensity, p: f64) {
    let (lo, hi) = d.support_f64();
    assert!(
        (d.integrate(lo, hi).unwrap() - 1.0).abs() < 1e-9,
        "{d:?} mass"
    );
    assert!(
        (d.integrate(0.0, f64::INFINITY).unwrap() - 1.0).abs() < 1e-9,
        "{d:?} total mass"
    );
    let t = d.quantile(p).unwrap();
    assert!(
        (d.cdf(t) - p).abs() < 1e-9,
        "{d:?}: cdf(quantile({p})) = {}",
        d.cdf(t)
    );
}

pub fn densities_are_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let lo = rng.gen_range(0..6);
        let d = match rng.gen_range(0..3) {
            0 => DelayDensity::uniform(lo, lo + rng.gen_range(1..6)).unwrap(),
            1 => DelayDensity::shifted_tail(lo, rng.gen_range(0.1..5.0)).unwrap(),
            _ => {
                let parts: Vec<_> = (0..rng.gen_range(1..5))
                    .map(|_| (rng.gen_range(1..5), rng.gen_range(0.1..3.0)))
                    .collect();
                piecewise_density(lo.min(3), &parts)
            }
        };
        check_density(&d, rng.gen());
    }
}

fn random_state(rng: &mut ChaCha8Rng, m: &SemiMarkovProcess, a: &Dta) -> ProductState {
    ProductState {
        state: rng.gen_range(0..m.num_states()),
        location: rng.gen_range(0..a.num_locations()),
        valuation: (0..a.num_clocks())
            .map(|_| rng.gen_range(0.0..a.b_max() as f64 + 2.0))
            .collect(),
    }
}

pub fn kernel_rows_sum_to_one_over_box_partitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, m, a) in all_models() {
        let p = Product::new(&m, &a).unwrap();
        for _ in 0..100 {
            let z = random_state(&mut rng, &m, &a);
            let mut cuts: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..6.0)).collect();
            cuts.push(0.0);
            cuts.push(f64::INFINITY);
            cuts.sort_by(f64::total_cmp);
            let pieces: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
            let mut boxes: Vec<Vec<(f64, f64)>> = vec![vec![]];
            for _ in 0..a.num_clocks() {
                boxes = boxes
                    .into_iter()
                    .flat_map(|b| pieces.iter().map(move |iv| [b.clone(), vec![*iv]].concat()))
                    .collect();
            }
            let mut total = 0.0;
            for s in 0..m.num_states() {
                for q in 0..a.num_locations() {
                    for b in &boxes {
                        total += p
                            .kernel_on_generator(&z, &GeneratorSet::new(s, q, b.clone()).unwrap())
                            .unwrap();
                    }
                }
            }
            assert!(
                (total - 1.0).abs() < 1e-9,
                "{name}: row mass {total} from {z:?}"
            );
        }
    }
}

fn clauses_hold(x: &[f64], y: &[f64], b_max: f64) -> bool {
    let relevant = |v: f64| v <= b_max;
    for i in 0..x.len() {
        if relevant(x[i]) != relevant(y[i]) {
            return false;
        }
        if relevant(x[i])
            && (x[i].floor() != y[i].floor() || (x[i].fract() == 0.0) != (y[i].fract() == 0.0))
        {
            return false;
        }
    }
    for i in 0..x.len() {
        for j in 0..x.len() {
            if relevant(x[i])
                && relevant(x[j])
                && (x[i].fract() <= x[j].fract()) != (y[i].fract() <= y[j].fract())
            {
                return false;
            }
        }
    }
    true
}

pub fn equal_signatures_satisfy_the_region_clauses() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let b_max = 2;
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..3).map(|_| rng.gen_range(0..24) as f64 / 8.0).collect()
    };
    let mut pairs = 0;
    let mut attempts = 0;
    while pairs < 1000 {
        attempts += 1;
        assert!(attempts < 2_000_000, "not enough equal-signature pairs");
        let (x, y) = (sample(&mut rng), sample(&mut rng));
        let (rx, ry) = (region_of(0, 0, &x, b_max), region_of(0, 0, &y, b_max));
        assert_eq!(rx, region_of(0, 0, &x, b_max));
        assert_eq!(
            rx == ry,
            clauses_hold(&x, &y, b_max as f64),
            "{x:?} vs {y:?}"
        );
        if rx == ry {
            pairs += 1;
        }
    }
}

fn region_box(r: &dta_measure::RegionSignature, b_max: u32) -> Option<(f64, f64)> {
    match r.clocks[0] {
        ClockRegion::Int(_) => None,
        ClockRegion::Frac(k) => Some((k as f64, k as f64 + 1.0)),
        ClockRegion::Irrelevant => Some((b_max as f64, f64::INFINITY)),
    }
}

pub fn sampled_successors_are_predicted() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (m, a) in [model_a1(), model_itinerary()] {
        let p = Product::new(&m, &a).unwrap();
        let b = a.b_max();
        for _ in 0..100 {
            let z = random_state(&mut rng, &m, &a);
            let predicted: BTreeSet<_> =
                region_successors(&region_of(z.state, z.location, &z.valuation, b), &p)
                    .unwrap()
                    .into_iter()
                    .collect();
            let mut hits: BTreeMap<_, usize> = BTreeMap::new();
            for _ in 0..10_000 {
                let succ: Vec<_> = m.successors(z.state).collect();
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let (target, _, d) = *succ
                    .iter()
                    .find(|(_, pr, _)| {
                        acc += pr;
                        u < acc
                    })
                    .unwrap_or(&succ[succ.len() - 1]);
                let next = p.step(&z, target, d.quantile(rng.gen()).unwrap()).unwrap();
                *hits
                    .entry(region_of(next.state, next.location, &next.valuation, b))
                    .or_insert(0) += 1;
            }
            for r in hits.keys() {
                assert!(
                    predicted.contains(r),
                    "sampled region {r:?} not predicted from {z:?}"
                );
            }
            for r in &predicted {
                let Some(iv) = region_box(r, b) else { continue };
                let mass = p
                    .kernel_on_generator(
                        &z,
                        &GeneratorSet::new(r.state, r.location, vec![iv]).unwrap(),
                    )
                    .unwrap();
                if mass > 0.01 {
                    assert!(
                        hits.contains_key(r),
                        "region {r:?} with mass {mass} never hit"
                    );
                }
            }
        }
    }
}

pub fn bscc_edges_advance_the_cyclic_class() {
    for (name, m, a) in all_models() {
        let p = Product::new(&m, &a).unwrap();
        let g = build_region_graph(&p).unwrap();
        let dec = bscc_decompose(&g);
        for b in &dec.bsccs {
            let covered: usize = b.classes.iter().map(Vec::len).sum();
            assert_eq!(covered, b.vertices.len(), "{name}");
            for &u in &b.vertices {
                for &v in &g.successors[u] {
                    assert!(b.contains(v), "{name}: edge leaves a bottom component");
                    assert_eq!(
                        b.class_of(v).unwrap(),
                        (b.class_of(u).unwrap() + 1) % b.period,
                        "{name}"
                    );
                }
            }
        }
    }
}

pub fn discretized_step_conserves_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (name, m, a) in all_models() {
        let p = Product::new(&m, &a).unwrap();
        let grid = GridSpec::new(8, a.b_max()).unwrap();
        let mut d = DiscretizedDistribution::default();
        for _ in 0..20 {
            let g = GridState {
                state: rng.gen_range(0..m.num_states()),
                location: rng.gen_range(0..a.num_locations()),
                cells: (0..a.num_clocks())
                    .map(|_| rng.gen_range(0..grid.cells_per_clock()))
                    .collect(),
            };
            *d.weights.entry(g).or_insert(0.0) += rng.gen_range(0.1..1.0);
        }
        let mut d = d.normalized();
        let start = d.total();
        for n in 1..=25 {
            let next = discretized_step(&d, &p, &grid).unwrap();
            assert!((next.total() - d.total()).abs() < 1e-12, "{name}: step {n}");
            assert!(
                (next.total() - start).abs() < n as f64 * 1e-12,
                "{name}: drift after {n}"
            );
            d = next;
        }
    }
}

pub fn grid_refinement_on_a1_is_cauchy() {
    let (m, a) = model_a1();
    let d_at = |n: u32| {
        let r = analyze(
            &m,
            &a,
            &AnalysisOptions {
                cells_per_unit: n,
                ..Default::default()
            },
        )
        .unwrap();
        r.bsccs[0].d.clone()
    };
    let ds: Vec<_> = [1, 2, 4, 8].into_iter().map(d_at).collect();
    for w in ds.windows(3) {
        for q in w[0].keys() {
            let first = (w[1][q] - w[0][q]).abs();
            let second = (w[2][q] - w[1][q]).abs();
            assert!(
                second < first || (first < 1e-12 && second < 1e-12),
                "{q}: {first} then {second}"
            );
        }
    }
}

pub fn identical_configs_give_identical_reports() {
    let (m, a) = model_itinerary();
    let cfg = SimConfig::new(99, 16, 300, 30).unwrap();
    let one = serde_json::to_string(&estimate_timed(&m, &a, &cfg).unwrap()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let two =
        pool.install(|| serde_json::to_string(&estimate_timed(&m, &a, &cfg).unwrap()).unwrap());
    assert_eq!(one, two);
    let d1 = estimate_discrete(&m, &a, &cfg).unwrap();
    assert_eq!(d1, estimate_discrete(&m, &a, &cfg).unwrap());

    let opts = AnalysisOptions::default();
    let r1 = analyze(&m, &a, &opts).unwrap().to_json();
    let r2 = pool.install(|| analyze(&m, &a, &opts).unwrap().to_json());
    assert_eq!(r1, r2);
}

pub fn discrete_estimates_sum_to_one_per_run_set() {
    for (name, m, a) in all_models() {
        let r = estimate_discrete(&m, &a, &SimConfig::new(3, 10, 200, 20).unwrap()).unwrap();
        let total: f64 = r.estimates.values().sum();
        assert!((total - 1.0).abs() < 1e-9, "{name}: {total}");
        assert!(r.estimates.values().all(|v| (0.0..=1.0).contains(v)));
    }
}

pub fn cylinder_probability_matches_sampling() {
    use dta_measure::simulator::estimate_cylinder;
    use dta_measure::smp::{CylinderTemplate, Interval};
    let (m, _) = model_a2();
    let template = CylinderTemplate {
        states: vec![0, 1, 0],
        intervals: vec![
            Interval::new(0.25, 0.75).unwrap(),
            Interval::new(1.0, 2.5).unwrap(),
        ],
    };
    let exact = m.cylinder_probability(&template).unwrap();
    assert!((exact - 0.375).abs() < 1e-12);
    let est = estimate_cylinder(&m, &template, &SimConfig::new(21, 20_000, 2, 0).unwrap()).unwrap();
    assert!((est.estimates["hit"] - exact).abs() <= 3.0 * est.stderr["hit"]);
}
