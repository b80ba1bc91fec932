//! Randomized algebraic laws shared by the property tests and the
//! acceptance harness.
#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::TestRunner;

use clubforge::field::{make_tower, Elem, Field, FieldTower};
use clubforge::fqlinalg::{self, FlatBasis};
use clubforge::linset::{self, SubspaceU};
use clubforge::rmcode::{self, RankMetricCode, WeightMethod};

const TOWERS: &[(u32, u32, u32)] = &[(2, 1, 2), (2, 1, 3), (2, 1, 4), (3, 1, 2), (3, 1, 3), (2, 2, 2), (5, 1, 2)];

pub fn tower(p: u32, e: u32, m: u32) -> Arc<FieldTower> {
    Arc::new(make_tower(p, e, m).unwrap())
}

fn towers() -> impl Strategy<Value = Arc<FieldTower>> {
    select(TOWERS).prop_map(|(p, e, m)| tower(p, e, m))
}

fn raw(max: usize) -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(any::<u32>(), max)
}

fn elem(f: &Field, x: u32) -> Elem {
    Elem(x % f.order())
}

fn vectors(f: &Field, k: usize, raw: &[u32], count: usize) -> Vec<Vec<Elem>> {
    raw.chunks_exact(k).take(count).map(|c| c.iter().map(|&x| elem(f, x)).collect()).collect()
}

/// U^⊥'⊥' = U, rank(U^⊥') = km - rank(U), and
/// dim(U^⊥' ∩ W^⊥) - dim(U ∩ W) = mk - t - sm for every F_{q^m}-subspace W of dim s.
pub fn duality_laws(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (towers(), 1usize..=3, raw(36), 0usize..=12, raw(9), 0usize..=3);
    runner
        .run(&strategy, |(t, k, ru, nu, rw, nw)| {
            let big = t.big();
            let m = t.m() as usize;
            let u = SubspaceU::span(t.clone(), k, vectors(big, k, &ru, nu)).unwrap();
            let d = linset::dual_perp(&u);
            prop_assert_eq!(d.rank(), k * m - u.rank());
            prop_assert_eq!(&linset::dual_perp(&d), &u);

            let w = FlatBasis::span(big, k, vectors(big, k, &rw, nw.min(k))).unwrap().rows().to_vec();
            let s = w.len();
            let w_perp = fqlinalg::null_space(big, &w, k);
            let lhs = linset::subspace_weight(&d, &w_perp).unwrap() as i64 - linset::subspace_weight(&u, &w).unwrap() as i64;
            prop_assert_eq!(lhs, (m * k) as i64 - u.rank() as i64 - (s * m) as i64);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// flatten is an F_q-linear bijection onto F_q^{km}.
pub fn flatten_laws(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (towers(), 1usize..=4, raw(8), any::<u32>());
    runner
        .run(&strategy, |(t, k, r, lambda)| {
            let big = t.big();
            let small = t.small();
            let rows = vectors(big, k, &r, 2);
            let (u, v) = (&rows[0], &rows[1]);
            let fu = fqlinalg::flatten(&t, u);
            prop_assert_eq!(fu.len(), k * t.m() as usize);
            prop_assert_eq!(&fqlinalg::unflatten(&t, &fu).unwrap(), u);

            let lam = elem(small, lambda);
            let mut combo = fqlinalg::scale(big, t.embed(lam), u);
            fqlinalg::add_into(big, &mut combo, v);
            let mut expected = fqlinalg::scale(small, lam, &fu);
            fqlinalg::add_into(small, &mut expected, &fqlinalg::flatten(&t, v));
            prop_assert_eq!(fqlinalg::flatten(&t, &combo), expected);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// pow_q is an automorphism of order m over F_q; relative traces are linear
/// over their target and land in it; the relative norm is multiplicative.
pub fn frobenius_trace_laws(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (towers(), any::<u32>(), any::<u32>(), any::<u32>(), 0i64..8);
    runner
        .run(&strategy, |(t, ra, rb, rl, j)| {
            let big = t.big();
            let m = t.m();
            let (a, b) = (elem(big, ra), elem(big, rb));
            prop_assert_eq!(t.pow_q(big.mul(a, b), j), big.mul(t.pow_q(a, j), t.pow_q(b, j)));
            prop_assert_eq!(t.pow_q(big.add(a, b), j), big.add(t.pow_q(a, j), t.pow_q(b, j)));
            prop_assert_eq!(t.pow_q(a, m as i64), a);
            let c = t.embed(elem(t.small(), rl));
            prop_assert_eq!(t.pow_q(c, 1), c);
            prop_assert!(t.unembed(t.trace(a)).is_some());

            for l in (1..=m).filter(|l| m % l == 0) {
                let sub = t.subfield_elements(l).unwrap();
                let lam = sub[rl as usize % sub.len()];
                let tr = |x| t.rel_trace(x, l).unwrap();
                prop_assert_eq!(tr(big.add(a, b)), big.add(tr(a), tr(b)));
                prop_assert_eq!(tr(big.mul(lam, a)), big.mul(lam, tr(a)));
                prop_assert!(sub.contains(&tr(a)));
                let n = |x| t.rel_norm(x, l).unwrap();
                prop_assert_eq!(n(big.mul(a, b)), big.mul(n(a), n(b)));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// dim(A ∩ B) + dim(A + B) = dim A + dim B, and RREF forgets the spanning set.
pub fn grassmann_laws(runner: &mut TestRunner) -> Result<(), String> {
    let fields = select(&[(2u32, 1u32), (3, 1), (2, 2), (5, 1)][..]).prop_map(|(p, d)| Field::new(p, d).unwrap());
    let strategy = (fields, 1usize..=7, raw(56), 0usize..=8, raw(56), 0usize..=8, raw(64));
    runner
        .run(&strategy, |(f, n, ra, na, rb, nb, mix)| {
            let a = FlatBasis::span(&f, n, vectors(&f, n, &ra, na)).unwrap();
            let b = FlatBasis::span(&f, n, vectors(&f, n, &rb, nb)).unwrap();
            let meet = a.intersect(&f, &b).unwrap();
            let join = a.sum(&f, &b).unwrap();
            prop_assert_eq!(meet.dim() + join.dim(), a.dim() + b.dim());
            prop_assert!(meet.is_subspace_of(&f, &a) && meet.is_subspace_of(&f, &b));
            prop_assert!(a.is_subspace_of(&f, &join) && b.is_subspace_of(&f, &join));

            // Fold every row into the next with random coefficients: same span.
            let mut rows = a.rows().to_vec();
            for idx in 1..rows.len() {
                let c = elem(&f, mix[idx % mix.len()]);
                let prev = fqlinalg::scale(&f, c, &rows[idx - 1]);
                fqlinalg::add_into(&f, &mut rows[idx], &prev);
            }
            rows.reverse();
            prop_assert_eq!(&FlatBasis::span(&f, n, rows).unwrap(), &a);
            let again = FlatBasis::span(&f, n, a.rows().to_vec()).unwrap();
            prop_assert_eq!(&again, &a);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Transforming twice with k and n - k swapped is the identity; the
/// transform matches the enumerated dual distribution, which has B_1 = 0.
pub fn macwilliams_biduality(runner: &mut TestRunner) -> Result<(), String> {
    let shapes = select(&[(2u32, 3u32, 2usize), (2, 4, 2), (3, 2, 2), (2, 2, 3), (2, 3, 3)][..]);
    let strategy = (shapes, raw(48), 0usize..=9);
    runner
        .run(&strategy, |((p, m, k), r, extra)| {
            let t = tower(p, 1, m);
            let big = t.big();
            let q = t.q();
            let gens = vectors(big, k, &r, k + extra);
            let u = SubspaceU::span(t.clone(), k, gens).unwrap();
            prop_assume!(linset::spans_full_space(&u));
            let n = u.rank();
            let code = RankMetricCode::from_system(&u).unwrap();
            let a = rmcode::weight_distribution(&code, WeightMethod::Geometric, u64::MAX, false).unwrap();
            let b = rmcode::macwilliams_transform(&a, n, k, m as usize, q).unwrap();
            let back = rmcode::macwilliams_transform(&b, n, n - k, m as usize, q).unwrap();
            prop_assert_eq!(&back, &a);
            if (q as f64).powi((m as usize * (n - k)) as i32) <= (1 << 20) as f64 {
                let dual = rmcode::dual_code(&code);
                let direct = rmcode::weight_distribution(&dual, WeightMethod::Enumerate, 1 << 20, false).unwrap();
                prop_assert_eq!(&direct, &b);
            }
            prop_assert_eq!(b.get(1), 0u32.into());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub type Suite = (&'static str, fn(&mut TestRunner) -> Result<(), String>);

pub const SUITES: &[Suite] = &[
    ("duality involution, dimension law and dual weights", duality_laws),
    ("flatten round-trip and linearity", flatten_laws),
    ("Frobenius and trace algebra", frobenius_trace_laws),
    ("Grassmann identity and canonical RREF", grassmann_laws),
    ("MacWilliams biduality", macwilliams_biduality),
];
