use std::sync::Arc;

use clubforge::constructions;
use clubforge::field::{make_tower, Elem, FieldTower};
use clubforge::linset::{self, SubspaceU};
use clubforge::rmcode::{self, RankMetricCode, WeightMethod};
use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::sample::select;

fn tower(p: u32, m: u32) -> Arc<FieldTower> {
    Arc::new(make_tower(p, 1, m).unwrap())
}

fn system(t: &Arc<FieldTower>, k: usize, raw: &[u32], count: usize) -> Option<SubspaceU> {
    let order = t.order() as u32;
    let vectors = raw.chunks_exact(k).take(count).map(|c| c.iter().map(|&x| Elem(x % order)).collect()).collect();
    let u = SubspaceU::span(t.clone(), k, vectors).unwrap();
    linset::spans_full_space(&u).then_some(u)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn weight_methods_agree(shape in select(&[(2u32, 3u32, 2usize), (2, 4, 2), (3, 2, 2), (2, 2, 3), (3, 3, 2)][..]),
                            raw in proptest::collection::vec(any::<u32>(), 24), count in 2usize..=8) {
        let (p, m, k) = shape;
        let t = tower(p, m);
        let u = system(&t, k, &raw, count);
        prop_assume!(u.is_some());
        let code = RankMetricCode::from_system(&u.unwrap()).unwrap();
        let a = rmcode::weight_distribution(&code, WeightMethod::Enumerate, u64::MAX, false).unwrap();
        let b = rmcode::weight_distribution(&code, WeightMethod::Geometric, u64::MAX, false).unwrap();
        prop_assert_eq!(&a, &b);

        let d = a.min_distance().unwrap();
        let (m, n) = (m as usize, code.n());
        prop_assert!(rmcode::singleton_holds(m, n, k, d));
        let mrd = m * k == m.max(n) * (m.min(n) + 1 - d);
        prop_assert_eq!(rmcode::is_mrd(m, n, k, d), mrd);
        prop_assert_eq!(code.system().unwrap(), linset::dual_perp(&linset::dual_perp(&code.system().unwrap())));
    }
}

/// A_{m-j} = (q^m - 1) N_j for the code of the trace dual of a club.
fn check_club_dual(u: &SubspaceU, i: usize) {
    let t = u.tower();
    let m = t.m() as usize;
    let q = t.q();
    let report = linset::analyze_default(u).unwrap();
    let code = RankMetricCode::from_system(&linset::dual_perp(u)).unwrap();
    assert_eq!(code.n(), u.k() * m - u.rank());
    let a = rmcode::weight_distribution(&code, WeightMethod::Enumerate, u64::MAX, true).unwrap();
    let scalars = BigUint::from(q.pow(m as u32) - 1);
    for j in 1..m {
        assert_eq!(a.get(m - j), &scalars * report.census.count(j), "j = {j}");
    }
    assert_eq!(a.min_distance(), Some(m - i));
    let pred = rmcode::club_code_prediction(q, m, u.k(), i, u.rank()).unwrap();
    assert_eq!(pred.distribution, a);
}

#[test]
fn club_dual_codes() {
    for (p, m) in [(2, 3), (2, 4), (3, 3)] {
        let t = tower(p, m);
        check_club_dual(&constructions::trace_club(&t).unwrap(), m as usize - 1);
    }
    let t = tower(2, 4);
    let s = constructions::make_s(&t, &Default::default(), 2).unwrap();
    check_club_dual(&constructions::lift_odd(&t, 3, &s).unwrap(), 2);
}

#[test]
fn b2_rules_out_ranks_above_the_bound() {
    for q in [2u64, 3] {
        for m in 3..=6 {
            for k in 3..=4 {
                for i in 2..=m {
                    let bound = rmcode::club_rank_bound(q, m, k, i).unwrap().bound;
                    for n in bound + 1..=k * m - 1 {
                        assert!(!rmcode::b2_admissibility(q, m, k, i, n).unwrap(), "q={q} m={m} k={k} i={i} n={n}");
                    }
                }
            }
        }
    }
}
