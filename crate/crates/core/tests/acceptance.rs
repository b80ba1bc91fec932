//! Acceptance suite. Every criterion is checked against brute-force oracles
//! written here, independent of the library's own counting routines.

mod props;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::Zero;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use clubforge::constructions::{self, build, ConstructionName, ConstructionSpec, SChoice};
use clubforge::field::{make_tower, Elem, FieldTower};
use clubforge::linset::{self, Classification, SubspaceU};
use clubforge::rmcode::{self, RankMetricCode, WeightDistribution, WeightMethod};
use clubforge::search::{self, SearchSpec, Target, Verdict};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn tower(p: u32, m: u32) -> Arc<FieldTower> {
    Arc::new(make_tower(p, 1, m).unwrap())
}

fn lib<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

// ---- oracles ----

/// Every vector of U, from all F_q-combinations of its basis.
fn vectors_of(u: &SubspaceU) -> Vec<Vec<Elem>> {
    let t = u.tower();
    let big = t.big();
    let q = t.q();
    let basis = u.basis();
    let total = q.pow(basis.len() as u32);
    (0..total)
        .map(|mut idx| {
            let mut v = vec![Elem::ZERO; u.k()];
            for b in basis {
                let c = t.embed(Elem((idx % q) as u32));
                idx /= q;
                for (x, &y) in v.iter_mut().zip(b) {
                    *x = big.add(*x, big.mul(c, y));
                }
            }
            v
        })
        .collect()
}

fn normalize(t: &FieldTower, v: &[Elem]) -> Option<Vec<Elem>> {
    let big = t.big();
    let lead = *v.iter().find(|a| !a.is_zero())?;
    let inv = big.inv(lead).unwrap();
    Some(v.iter().map(|&a| big.mul(inv, a)).collect())
}

fn log_q(q: u64, mut x: u64) -> usize {
    let mut w = 0;
    while x > 1 {
        assert_eq!(x % q, 0, "not a power of q");
        x /= q;
        w += 1;
    }
    w
}

/// Weight of every point of L_U, from the number of vectors on it.
fn point_weights(u: &SubspaceU) -> BTreeMap<Vec<Elem>, usize> {
    let t = u.tower();
    let mut counts: BTreeMap<Vec<Elem>, u64> = BTreeMap::new();
    for v in vectors_of(u) {
        if let Some(p) = normalize(t, &v) {
            *counts.entry(p).or_default() += 1;
        }
    }
    counts.into_iter().map(|(p, c)| (p, log_q(t.q(), c + 1))).collect()
}

/// N_j for j >= 1.
fn census(weights: &BTreeMap<Vec<Elem>, usize>) -> BTreeMap<usize, u64> {
    let mut n = BTreeMap::new();
    for &w in weights.values() {
        *n.entry(w).or_default() += 1;
    }
    n
}

fn club_profile(weights: &BTreeMap<Vec<Elem>, usize>) -> Option<(usize, Vec<Elem>)> {
    let heavy: Vec<_> = weights.iter().filter(|(_, &w)| w > 1).collect();
    match heavy.as_slice() {
        [(p, &w)] => Some((w, (*p).clone())),
        _ => None,
    }
}

/// All points of PG(k-1, q^m), first nonzero coordinate 1.
fn projective_points(t: &FieldTower, k: usize) -> Vec<Vec<Elem>> {
    let order = t.order();
    let mut out = Vec::new();
    for idx in 1..order.pow(k as u32) {
        let mut i = idx;
        let v: Vec<Elem> = (0..k)
            .map(|_| {
                let d = Elem((i % order) as u32);
                i /= order;
                d
            })
            .collect();
        if v.iter().find(|a| !a.is_zero()) == Some(&Elem::ONE) {
            out.push(v);
        }
    }
    out
}

fn dot(t: &FieldTower, a: &[Elem], b: &[Elem]) -> Elem {
    let big = t.big();
    a.iter().zip(b).fold(Elem::ZERO, |acc, (&x, &y)| big.add(acc, big.mul(x, y)))
}

/// Weight of every hyperplane a.x = 0, by counting the vectors of U on it.
fn hyperplane_weights(u: &SubspaceU) -> Vec<(Vec<Elem>, usize)> {
    let t = u.tower();
    let vs = vectors_of(u);
    projective_points(t, u.k())
        .into_iter()
        .map(|a| {
            let c = vs.iter().filter(|v| dot(t, &a, v).is_zero()).count() as u64;
            (a, log_q(t.q(), c))
        })
        .collect()
}

fn spectrum(u: &SubspaceU) -> BTreeMap<usize, u64> {
    let mut s = BTreeMap::new();
    for (_, w) in hyperplane_weights(u) {
        *s.entry(w).or_default() += 1;
    }
    s
}

/// Rank over F_p of a list of vectors with entries in 0..p.
fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_multiple_of(p)) else { continue };
        rows.swap(rank, piv);
        let inv = (1..p).find(|x| rows[rank][col] * x % p == 1).unwrap();
        for x in rows[rank].iter_mut() {
            *x = *x * inv % p;
        }
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let f = row[col];
                for (x, &y) in row.iter_mut().zip(&pivot) {
                    *x = (*x + p * p - f * y % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn rank_weight(t: &FieldTower, c: &[Elem]) -> usize {
    let rows = c.iter().map(|&a| t.to_coords(a).iter().map(|d| d.0 as u64).collect()).collect();
    rank_mod_p(rows, t.p() as u64)
}

/// Weight distribution by walking every message x in F_{q^m}^k.
fn enumerate_code(code: &RankMetricCode) -> Vec<u64> {
    let t = code.tower();
    let big = t.big();
    let g = code.generator();
    let order = t.order();
    let mut a = vec![0u64; t.m() as usize + 1];
    for idx in 0..order.pow(code.k() as u32) {
        let mut i = idx;
        let mut c = vec![Elem::ZERO; code.n()];
        for row in g {
            let x = Elem((i % order) as u32);
            i /= order;
            for (cj, &gj) in c.iter_mut().zip(row) {
                *cj = big.add(*cj, big.mul(x, gj));
            }
        }
        a[rank_weight(t, &c)] += 1;
    }
    a
}

fn as_u64(d: &WeightDistribution) -> Vec<u64> {
    d.counts().iter().map(|c| u64::try_from(c).unwrap()).collect()
}

fn cone_spec(m: u32, i: usize) -> ConstructionSpec {
    let mut s = ConstructionSpec::new(ConstructionName::Cone, 2, 1, m);
    s.k = Some(3);
    s.i = Some(i);
    s
}

fn lift_spec(m: u32, k: usize, i: usize) -> ConstructionSpec {
    ConstructionSpec { name: ConstructionName::LiftOdd, k: Some(k), ..cone_spec(m, i) }
}

fn built(spec: &ConstructionSpec) -> Result<SubspaceU, String> {
    let c = lib(build(spec))?;
    ensure!(c.report.holds, "{} self-checks failed: {:?}", spec.name, c.report.checks.iter().filter(|x| !x.holds).collect::<Vec<_>>());
    Ok(c.subspace)
}

fn expect_club(u: &SubspaceU, index: usize, what: &str) -> Result<BTreeMap<Vec<Elem>, usize>, String> {
    let w = point_weights(u);
    match club_profile(&w) {
        Some((i, _)) if i == index => {}
        other => return Err(format!("{what}: expected a {index}-club, oracle finds {other:?}")),
    }
    let r = lib(linset::analyze_default(u))?;
    ensure!(matches!(r.classification, Classification::Club { index: i, .. } if i == index), "{what}: analyze says {}", r.classification);
    ensure!(r.size == w.len() as u64, "{what}: analyze size {} vs oracle {}", r.size, w.len());
    Ok(w)
}

// ---- criteria ----

fn trace_clubs() -> Outcome {
    let mut sizes = Vec::new();
    for (p, m) in [(2, 3), (2, 4), (2, 5), (3, 3)] {
        let t = tower(p, m);
        let u = lib(constructions::trace_club(&t))?;
        ensure!(u.rank() == m as usize, "rank {} at q={p}, m={m}", u.rank());
        let w = expect_club(&u, m as usize - 1, &format!("q={p}, m={m}"))?;
        let q = p as u64;
        ensure!(w.len() as u64 == q.pow(m - 1) + 1, "size {} at q={p}, m={m}", w.len());
        let vectors: u64 = w.values().map(|&i| q.pow(i as u32) - 1).sum();
        ensure!(vectors == q.pow(m) - 1, "vector count identity fails at q={p}, m={m}");
        let r = lib(linset::analyze_default(&u))?;
        ensure!(linset::verify_weight_identities(&r, q, u.rank()).holds, "library identities fail at q={p}, m={m}");
        sizes.push(w.len());
    }
    Ok(format!("sizes {sizes:?}"))
}

fn subfield_trace_clubs() -> Outcome {
    for (m, n0) in [(4u32, 2u32), (6, 3)] {
        let t = tower(2, m);
        let u = lib(constructions::subfield_trace_club(&t, n0, 1))?;
        let l = m / n0;
        ensure!(u.rank() == m as usize, "rank {} at m={m}", u.rank());
        expect_club(&u, (n0 * (l - 1)) as usize, &format!("m={m}, n0={n0}"))?;
    }
    Ok("Club(2) at m=4, Club(3) at m=6".into())
}

fn cone_construction() -> Outcome {
    let (m, k) = (4usize, 3usize);
    let mut notes = Vec::new();
    for i in [2usize, 3] {
        let u = built(&cone_spec(m as u32, i))?;
        ensure!(u.rank() == m + i, "rank {} for i={i}", u.rank());
        let w = expect_club(&u, i, &format!("cone i={i}"))?;
        if i == 3 {
            ensure!(w.len() == 121, "size {} for i=3", w.len());
        }
        let spec = spectrum(&u);
        ensure!(spec.values().sum::<u64>() == 273, "{} hyperplanes", spec.values().sum::<u64>());
        let top = m * (k - 1) / 2;
        let low = m * (k - 2) / 2;
        let allowed: BTreeSet<usize> = std::iter::once(top).chain(low..=low + i + 1).collect();
        ensure!(spec.keys().all(|w| allowed.contains(w)), "i={i}: spectrum {spec:?} outside {allowed:?}");
        ensure!(spec.contains_key(&top), "i={i}: no hyperplane of weight {top}");
        let analyzed = lib(linset::analyze(&u, &linset::AnalyzeOptions::with_hyperplanes()))?.hyperplane_spectrum.unwrap();
        ensure!(spec.iter().all(|(&w, &c)| analyzed.count(w) == c), "i={i}: library spectrum differs");
        notes.push(format!("i={i}: {spec:?}"));
    }
    Ok(notes.join("; "))
}

fn lifting_construction() -> Outcome {
    let mut notes = Vec::new();
    for (m, k, i) in [(4u32, 3usize, 2usize), (6, 3, 3)] {
        let t = tower(2, m);
        let mm = m as usize;
        let u = built(&lift_spec(m, k, i))?;
        let n = mm * (k - 1) / 2 + i;
        ensure!(u.rank() == n, "rank {} at m={m}", u.rank());
        expect_club(&u, i, &format!("lift m={m}"))?;
        let spec = spectrum(&u);
        ensure!(spec.keys().all(|&w| w < n), "m={m}: U lies in a hyperplane");
        let c = mm * (k - 3) / 2;
        ensure!(spec.keys().all(|w| (c + i..=c + i + 2).contains(w)), "m={m}: spectrum {spec:?}");

        // The closed-form dual is trace-orthogonal to U and has the complementary rank.
        let s = lib(constructions::make_s(&t, &SChoice::default(), i))?;
        let closed = lib(constructions::lift_odd_dual(&t, k, &s))?;
        ensure!(closed.rank() == k * mm - n, "closed dual rank {}", closed.rank());
        for a in closed.basis() {
            for b in u.basis() {
                ensure!(t.trace(dot(&t, a, b)).is_zero(), "m={m}: closed dual not orthogonal to U");
            }
        }
        ensure!(closed == linset::dual_perp(&u), "m={m}: closed dual differs from the computed dual");
        notes.push(format!("m={m}: rank {n}, spectrum {spec:?}"));
    }
    Ok(notes.join("; "))
}

fn inequivalence_witness() -> Outcome {
    let cone = built(&cone_spec(6, 3))?;
    let lift = built(&lift_spec(6, 3, 3))?;
    let cmp = lib(search::spectrum_compare(&cone, &lift, linset::DEFAULT_BUDGET))?;
    ensure!(matches!(cmp.verdict, Verdict::Distinguished { .. }), "verdict {:?}", cmp.verdict);
    let (sc, sl) = (spectrum(&cone), spectrum(&lift));
    ensure!(sc.contains_key(&6), "cone spectrum {sc:?} has no weight 6");
    ensure!(!sl.contains_key(&6), "lift spectrum {sl:?} has weight 6");
    Ok(format!("cone {sc:?} vs lift {sl:?}"))
}

fn rank_seven_club() -> Result<SubspaceU, String> {
    built(&cone_spec(4, 3))
}

fn club_dual_code() -> Outcome {
    let u = rank_seven_club()?;
    let n_j = census(&point_weights(&u));
    let code = lib(RankMetricCode::from_system(&linset::dual_perp(&u)))?;
    ensure!((code.n(), code.k()) == (5, 3), "code is [{}, {}]", code.n(), code.k());
    let a = enumerate_code(&code);
    ensure!(a.iter().sum::<u64>() == 4096, "enumerated {} codewords", a.iter().sum::<u64>());
    let m = 4;
    for j in 1..m {
        let expect = 15 * n_j.get(&j).copied().unwrap_or(0);
        ensure!(a[m - j] == expect, "A_{} = {} but 15 N_{j} = {expect}", m - j, a[m - j]);
    }
    ensure!(a[1] == 15, "A_1 = {}", a[1]);
    ensure!(a.iter().position(|&x| x > 0 && a[0] != x) == Some(1), "minimum distance is not 1");
    let geo = lib(rmcode::weight_distribution(&code, WeightMethod::Geometric, u64::MAX, false))?;
    ensure!(as_u64(&geo) == a, "geometric {:?} vs enumerated {a:?}", as_u64(&geo));
    let pred = lib(rmcode::club_code_prediction(2, 4, 3, 3, 7))?;
    ensure!(as_u64(&pred.distribution) == a, "derived prediction {:?} vs {a:?}", as_u64(&pred.distribution));
    ensure!(!pred.printed_matches, "expected the printed A_(m-1) to disagree");
    Ok(format!("A = {a:?}; printed A_3 = {} vs enumerated {} (discrepancy flagged)", pred.printed_a_m_minus_1.unwrap(), a[3]))
}

fn macwilliams() -> Outcome {
    let u = rank_seven_club()?;
    let code = lib(RankMetricCode::from_system(&linset::dual_perp(&u)))?;
    let a = WeightDistribution::from_u64(&enumerate_code(&code));
    let b = lib(rmcode::macwilliams_transform(&a, 5, 3, 4, 2))?;
    let dual = rmcode::dual_code(&code);
    ensure!(dual.k() == 2, "dual has dimension {}", dual.k());
    let direct = enumerate_code(&dual);
    ensure!(as_u64(&b) == direct, "transform {:?} vs enumerated dual {direct:?}", as_u64(&b));
    ensure!(direct[1] == 0 && direct[2] == 0, "B_1 = {}, B_2 = {}", direct[1], direct[2]);
    let b2 = lib(rmcode::b2_value(2, 4, 3, 3, 7))?;
    ensure!(b2.is_zero(), "B_2 formula gives {b2}");

    let t = tower(2, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut done = 0;
    let mut ranks = Vec::new();
    while done < 5 {
        let n = 2 + done;
        let gens = (0..n).map(|_| (0..2).map(|_| Elem(rng.gen_range(0..8))).collect()).collect();
        let u = lib(SubspaceU::span(t.clone(), 2, gens))?;
        if !linset::spans_full_space(&u) {
            continue;
        }
        let code = lib(RankMetricCode::from_system(&u))?;
        let a = WeightDistribution::from_u64(&enumerate_code(&code));
        let b = lib(rmcode::macwilliams_transform(&a, code.n(), 2, 3, 2))?;
        let direct = enumerate_code(&rmcode::dual_code(&code));
        ensure!(as_u64(&b) == direct, "random system of rank {}: {:?} vs {direct:?}", u.rank(), as_u64(&b));
        ensure!(direct[1] == 0, "random system: B_1 = {}", direct[1]);
        ranks.push(u.rank());
        done += 1;
    }
    Ok(format!("B = {direct:?}; random systems of ranks {ranks:?}"))
}

/// The piecewise bound as printed.
fn printed_bound(m: usize, k: usize, i: usize) -> usize {
    if i == m && k == 2 {
        m + 1
    } else if 2 * i <= m || (k == 2 && i < m) {
        m * k / 2
    } else {
        m * (k - 1) / 2 + i
    }
}

fn bound_grid() -> Outcome {
    let mut cells = 0;
    for m in 3..=6 {
        for k in 2..=4 {
            for i in 2..=m {
                let rb = lib(rmcode::club_rank_bound(2, m, k, i))?;
                ensure!(rb.bound == printed_bound(m, k, i), "m={m}, k={k}, i={i}: {} vs {}", rb.bound, printed_bound(m, k, i));
                if k > 2 {
                    ensure!(
                        !lib(rmcode::b2_admissibility(2, m, k, i, rb.bound + 1))?,
                        "m={m}, k={k}, i={i}: rank {} passes the B_2 test",
                        rb.bound + 1
                    );
                }
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} cells"))
}

fn exhaustive_census() -> Outcome {
    let base = SearchSpec { hit_cap: usize::MAX, ..SearchSpec::new(2, 1, 4, 2, 4, Target::Club { index: 3 }) };
    let runs =
        [(linset::Strategy::Vectors, 1), (linset::Strategy::Points, 1), (linset::Strategy::Vectors, 4), (linset::Strategy::Points, 4)];
    let mut reference: Option<BTreeMap<String, u64>> = None;
    let mut hits = 0;
    for (strategy, jobs) in runs {
        let r = lib(search::run_search(&SearchSpec { strategy, jobs: Some(jobs), ..base.clone() }))?;
        ensure!(BigUint::from(r.scanned) == rmcode::qbinomial(8, 4, 2), "scanned {}", r.scanned);
        ensure!(r.census.values().sum::<u64>() == r.scanned, "census does not cover every subspace");
        match &reference {
            None => {
                let t = tower(2, 4);
                for h in &r.found {
                    let u = lib(SubspaceU::from_json(&h.subspace, Some(t.clone())))?;
                    let w = point_weights(&u);
                    ensure!(w.len() == 9, "Club(3) hit of size {}", w.len());
                    ensure!(
                        w.values().filter(|&&x| x == 3).count() == 1 && w.values().all(|&x| x == 1 || x == 3),
                        "hit without a unique weight-3 point"
                    );
                }
                hits = r.found.len();
                ensure!(r.census.get("Club(3)").copied() == Some(hits as u64), "hit count vs census");
                reference = Some(r.census);
            }
            Some(c) => ensure!(*c == r.census, "{strategy:?}/{jobs} census differs"),
        }
    }
    Ok(format!("{:?}; {hits} Club(3) hits checked", reference.unwrap()))
}

fn maximum_club_consequences() -> Outcome {
    let u = rank_seven_club()?;
    let code = lib(RankMetricCode::from_system(&u))?;
    ensure!((code.n(), code.k()) == (7, 3), "code is [{}, {}]", code.n(), code.k());
    let a = enumerate_code(&code);
    let weights: Vec<usize> = (1..a.len()).filter(|&j| a[j] > 0).collect();
    ensure!(weights == vec![3, 4], "nonzero weights {weights:?}");
    let heavy = hyperplane_weights(&u).into_iter().filter(|(_, w)| *w == 4).count();
    ensure!(heavy == 31, "{heavy} hyperplanes of weight 4");
    ensure!(a[3] == 465, "A_3 = {}", a[3]);
    let check = lib(rmcode::max_club_code_distribution(2, 4, 3))?;
    ensure!(as_u64(&check.derived) == a, "derived {:?} vs enumerated {a:?}", as_u64(&check.derived));
    ensure!(check.label_swap_suspected, "label swap not reported");
    let dual = linset::dual_perp(&u);
    ensure!(point_weights(&dual).values().all(|&w| w == 1), "dual is not scattered");
    let report = lib(linset::verify_max_club(&u, linset::DEFAULT_BUDGET))?;
    ensure!(report.holds && report.dual_scattered, "structure check fails: {report:?}");
    Ok(format!("A = {a:?}; printed A_m = {} attaches to weight m-1 (label swap reported)", check.printed_a_m))
}

fn three_weight_zoo() -> Outcome {
    let mut notes = Vec::new();
    // (name, p, m, k, s, code taken from the trace dual, weights)
    type Case = (ConstructionName, u32, u32, Option<usize>, Option<u32>, bool, [usize; 3]);
    let cases: [Case; 4] = [
        (ConstructionName::PseudoregulusLines, 2, 4, Some(3), None, false, [2, 3, 4]),
        (ConstructionName::TwistedGabidulin, 2, 5, None, Some(1), false, [3, 4, 5]),
        (ConstructionName::RedeiScattered, 2, 4, None, Some(1), false, [1, 3, 4]),
        (ConstructionName::ComplementaryWeights, 3, 4, Some(2), None, true, [2, 3, 4]),
    ];
    for (name, p, m, k, s, via_dual, expected) in cases {
        let mut spec = ConstructionSpec::new(name, p, 1, m);
        spec.k = k;
        spec.s = s;
        let u = built(&spec)?;
        let system = if via_dual { linset::dual_perp(&u) } else { u };
        let code = lib(RankMetricCode::from_system(&system))?;
        let a = enumerate_code(&code);
        let weights: Vec<usize> = (1..a.len()).filter(|&j| a[j] > 0).collect();
        ensure!(weights == expected, "{name}: weights {weights:?}, expected {expected:?}");
        notes.push(format!("{name} {weights:?}"));
    }
    Ok(notes.join(", "))
}

fn property_suites() -> Outcome {
    let mut names = Vec::new();
    for (name, suite) in props::SUITES {
        let mut runner = TestRunner::new_with_rng(
            Config { failure_persistence: None, ..Config::with_cases(100) },
            TestRng::deterministic_rng(RngAlgorithm::ChaCha),
        );
        suite(&mut runner).map_err(|e| format!("{name}: {e}"))?;
        names.push(*name);
    }
    Ok(format!("{} suites x 100 cases", names.len()))
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

const CRITERIA: &[Criterion] = &[
    Criterion { name: "trace clubs", limit: secs(1), run: trace_clubs },
    Criterion { name: "subfield trace clubs", limit: secs(1), run: subfield_trace_clubs },
    Criterion { name: "cone construction", limit: secs(10), run: cone_construction },
    Criterion { name: "lifting construction", limit: secs(60), run: lifting_construction },
    Criterion { name: "cone/lift inequivalence witness", limit: secs(120), run: inequivalence_witness },
    Criterion { name: "club-dual code distribution", limit: secs(5), run: club_dual_code },
    Criterion { name: "MacWilliams transform", limit: secs(30), run: macwilliams },
    Criterion { name: "rank bound grid", limit: secs(1), run: bound_grid },
    Criterion { name: "exhaustive census q=2 m=4 k=2 n=4", limit: secs(300), run: exhaustive_census },
    Criterion { name: "maximum (m-1)-club code", limit: secs(10), run: maximum_club_consequences },
    Criterion { name: "three-weight zoo", limit: secs(60), run: three_weight_zoo },
    Criterion { name: "property suites", limit: secs(30), run: property_suites },
];

fn main() -> ExitCode {
    // Keep panic messages out of the report; they are captured below.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (idx, c) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > c.limit => Err(format!("took {elapsed:.2?}, limit {:?}", c.limit)),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS {:>2} {} ({elapsed:.2?}): {detail}", idx + 1, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {} ({elapsed:.2?}): {why}", idx + 1, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
