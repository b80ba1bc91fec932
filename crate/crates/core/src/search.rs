//! Exhaustive enumeration of F_q-subspaces of F_{q^m}^k by canonical
//! echelon form, with a classification census.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{self, SChoice};
use crate::error::{Error, Result};
use crate::field::{Elem, Field, FieldTower, DEFAULT_ORDER_CAP};
use crate::fqlinalg::{self, FlatBasis};
use crate::linset::{self, AnalyzeOptions, Classification, ProjectivePoint, Strategy, SubspaceJson, SubspaceU};
use crate::rmcode::qbinomial;
use crate::tally::Tally;

/// Default cap on stored hits; the census is always complete.
pub const DEFAULT_HIT_CAP: usize = 1000;

const CHUNK: u64 = 4096;

/// Pivot columns of an echelon form and the free (row, column) entries it leaves.
#[derive(Clone, Debug)]
struct Profile {
    pivots: Vec<usize>,
    free: Vec<(usize, usize)>,
}

impl Profile {
    fn new(ncols: usize, pivots: Vec<usize>) -> Self {
        let mut free = Vec::new();
        for (r, &p) in pivots.iter().enumerate() {
            for c in p + 1..ncols {
                if !pivots.contains(&c) {
                    free.push((r, c));
                }
            }
        }
        Profile { pivots, free }
    }

    fn cells(&self, q: u64) -> u64 {
        q.pow(self.free.len() as u32)
    }

    /// The echelon rows whose free entries are the base-q digits of `index`.
    fn rows(&self, ncols: usize, q: u64, mut index: u64) -> Vec<Vec<Elem>> {
        let mut rows: Vec<Vec<Elem>> = self
            .pivots
            .iter()
            .map(|&p| {
                let mut r = vec![Elem::ZERO; ncols];
                r[p] = Elem::ONE;
                r
            })
            .collect();
        for &(r, c) in self.free.iter().rev() {
            rows[r][c] = Elem((index % q) as u32);
            index /= q;
        }
        rows
    }
}

/// All n-subsets of 0..ncols in lexicographic order.
fn profiles(ncols: usize, n: usize) -> Vec<Profile> {
    let mut out = Vec::new();
    let mut pick: Vec<usize> = (0..n).collect();
    if n > ncols {
        return out;
    }
    loop {
        out.push(Profile::new(ncols, pick.clone()));
        let Some(j) = (0..n).rev().find(|&j| pick[j] < ncols - n + j) else {
            break;
        };
        pick[j] += 1;
        for l in j + 1..n {
            pick[l] = pick[l - 1] + 1;
        }
    }
    out
}

fn check_budget(count: &BigUint, budget: u64) -> Result<u64> {
    match count.to_u64() {
        Some(c) if c <= budget => Ok(c),
        _ => Err(Error::BudgetExceeded { needed: count.to_string(), budget }),
    }
}

/// Visit every n-dimensional subspace of F_q^ncols exactly once, in
/// canonical order: pivot sets lexicographically, then free entries.
pub fn enumerate_subspaces(f: &Field, ncols: usize, n: usize, budget: u64, mut visit: impl FnMut(&FlatBasis)) -> Result<u64> {
    let q = f.order() as u64;
    check_budget(&qbinomial(ncols as i64, n as i64, q), budget)?;
    let mut count = 0;
    for profile in profiles(ncols, n) {
        for idx in 0..profile.cells(q) {
            let rows = profile.rows(ncols, q, idx);
            visit(&FlatBasis::from_rref_unchecked(ncols, rows, profile.pivots.clone()));
            count += 1;
        }
    }
    Ok(count)
}

/// Parallel fold over all n-subspaces; chunks are reduced in canonical order.
fn fold_subspaces<T, F>(q: u64, ncols: usize, n: usize, fold: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut dyn Iterator<Item = (Vec<Vec<Elem>>, Vec<usize>)>) -> T + Sync,
{
    let tasks: Vec<(Profile, u64)> = profiles(ncols, n)
        .into_iter()
        .flat_map(|p| {
            let cells = p.cells(q);
            (0..cells).step_by(CHUNK as usize).map(move |s| (p.clone(), s)).collect::<Vec<_>>()
        })
        .collect();
    tasks
        .par_iter()
        .map(|(profile, start)| {
            let end = (start + CHUNK).min(profile.cells(q));
            let mut it = (*start..end).map(|idx| (profile.rows(ncols, q, idx), profile.pivots.clone()));
            fold(&mut it)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    AnyClub,
    Club { index: usize },
    Scattered,
    Census,
}

impl Target {
    fn accepts(&self, c: &Classification) -> bool {
        match (self, c) {
            (Target::AnyClub, Classification::Club { .. }) => true,
            (Target::Club { index }, Classification::Club { index: i, .. }) => i == index,
            (Target::Scattered, Classification::Scattered) => true,
            _ => false,
        }
    }
}

/// Restrict to subspaces containing S·e_0 with dim S = i.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub i: usize,
    #[serde(default)]
    pub s_choice: SChoice,
}

fn default_hit_cap() -> usize {
    DEFAULT_HIT_CAP
}

fn default_budget() -> u64 {
    linset::DEFAULT_BUDGET
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub p: u32,
    #[serde(default = "one")]
    pub e: u32,
    pub m: u32,
    pub k: usize,
    pub n: usize,
    pub target: Target,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Anchor>,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default = "default_hit_cap")]
    pub hit_cap: usize,
}

impl SearchSpec {
    pub fn new(p: u32, e: u32, m: u32, k: usize, n: usize, target: Target) -> Self {
        SearchSpec {
            p,
            e,
            m,
            k,
            n,
            target,
            anchor: None,
            strategy: Strategy::Auto,
            budget: linset::DEFAULT_BUDGET,
            jobs: None,
            hit_cap: DEFAULT_HIT_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    pub subspace: SubspaceJson,
    pub classification: Classification,
    pub size: u64,
    /// Classification reproduced by an independent analysis strategy.
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchResult {
    pub scanned: u64,
    pub census: BTreeMap<String, u64>,
    pub found: Vec<Hit>,
    pub hits_truncated: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

struct Partial {
    census: BTreeMap<String, u64>,
    hits: Vec<(SubspaceU, Classification, u64)>,
    matched: u64,
    scanned: u64,
}

/// Enumerate, classify and census every subspace described by `spec`.
pub fn run_search(spec: &SearchSpec) -> Result<SearchResult> {
    match spec.jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::ParameterViolation(format!("thread pool: {e}")))?;
            pool.install(|| run_search_inner(spec))
        }
        None => run_search_inner(spec),
    }
}

fn run_search_inner(spec: &SearchSpec) -> Result<SearchResult> {
    let started = Instant::now();
    let tower = Arc::new(FieldTower::new(spec.p, spec.e, spec.m, DEFAULT_ORDER_CAP)?);
    let small = tower.small();
    let q = tower.q();
    let big_n = spec.m as usize * spec.k;
    if spec.n == 0 || spec.n > big_n {
        return Err(Error::ParameterViolation(format!("rank n = {} must lie in 1..={big_n}", spec.n)));
    }
    // Anchored: U = A + W with W ranging over subspaces of a fixed complement of A.
    let (anchor_rows, free_cols) = match &spec.anchor {
        Some(a) => {
            if a.i > spec.n {
                return Err(Error::ParameterViolation(format!("anchor dimension {} exceeds n = {}", a.i, spec.n)));
            }
            let s = constructions::make_s(&tower, &a.s_choice, a.i)?;
            let vectors: Vec<Vec<Elem>> = s
                .basis()
                .iter()
                .map(|b| {
                    let mut v = vec![Elem::ZERO; spec.k];
                    v[0] = b[0];
                    v
                })
                .collect();
            let anchored = SubspaceU::new(tower.clone(), spec.k, vectors)?;
            let pivots = anchored.flat().pivots().to_vec();
            let free: Vec<usize> = (0..big_n).filter(|c| !pivots.contains(c)).collect();
            (anchored.flat().rows().to_vec(), free)
        }
        None => (Vec::new(), (0..big_n).collect()),
    };
    let inner_cols = free_cols.len();
    let inner_n = spec.n - anchor_rows.len();
    let expected = check_budget(&qbinomial(inner_cols as i64, inner_n as i64, q), spec.budget)?;

    let opts = AnalyzeOptions { budget: u64::MAX, ..AnalyzeOptions::serial(spec.strategy) };
    let cap = spec.hit_cap;
    let partials = fold_subspaces(q, inner_cols, inner_n, |it| {
        let mut part = Partial { census: BTreeMap::new(), hits: Vec::new(), matched: 0, scanned: 0 };
        for (rows, pivots) in it {
            let flat = if anchor_rows.is_empty() {
                FlatBasis::from_rref_unchecked(big_n, rows, pivots)
            } else {
                let mut all = anchor_rows.clone();
                all.extend(rows.iter().map(|r| {
                    let mut full = vec![Elem::ZERO; big_n];
                    for (j, &c) in free_cols.iter().enumerate() {
                        full[c] = r[j];
                    }
                    full
                }));
                FlatBasis::span(small, big_n, all).expect("width matches")
            };
            let u = SubspaceU::from_flat(tower.clone(), spec.k, flat).expect("width matches");
            let report = linset::analyze(&u, &opts).expect("unbounded budget");
            *part.census.entry(report.classification.to_string()).or_insert(0) += 1;
            part.scanned += 1;
            if spec.target.accepts(&report.classification) {
                part.matched += 1;
                if part.hits.len() < cap {
                    part.hits.push((u, report.classification, report.size));
                }
            }
        }
        part
    });

    let mut census = BTreeMap::new();
    let mut scanned = 0;
    let mut matched = 0;
    let mut hits = Vec::new();
    for p in partials {
        for (key, c) in p.census {
            *census.entry(key).or_insert(0) += c;
        }
        scanned += p.scanned;
        matched += p.matched;
        let room = cap.saturating_sub(hits.len());
        hits.extend(p.hits.into_iter().take(room));
    }
    debug_assert_eq!(scanned, expected);
    let other = match spec.strategy {
        Strategy::Points => Strategy::Vectors,
        _ => Strategy::Points,
    };
    let found = hits
        .into_iter()
        .map(|(u, classification, size)| {
            let check = linset::analyze(&u, &AnalyzeOptions { budget: u64::MAX, ..AnalyzeOptions::serial(other) });
            let verified = check.map(|r| r.classification == classification && r.size == size).unwrap_or(false);
            Hit { subspace: u.to_json(), classification, size, verified }
        })
        .collect();
    Ok(SearchResult { scanned, census, found, hits_truncated: matched > cap as u64, wall_time: started.elapsed() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// The invariants differ, so the linear sets are inequivalent.
    Distinguished { witness: String },
    /// The invariants agree; this proves nothing about equivalence.
    Indistinguishable { note: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub verdict: Verdict,
    pub point_census: [Tally; 2],
    pub hyperplane_spectrum: [Tally; 2],
}

fn first_difference(label: &str, a: &Tally, b: &Tally) -> Option<String> {
    let weights: std::collections::BTreeSet<usize> = a.keys().chain(b.keys()).copied().collect();
    weights.into_iter().find(|&w| a.count(w) != b.count(w)).map(|w| format!("{label} of weight {w}: {} vs {}", a.count(w), b.count(w)))
}

/// Compare point-weight census and hyperplane spectrum, both ΓL-invariants.
pub fn spectrum_compare(u1: &SubspaceU, u2: &SubspaceU, budget: u64) -> Result<SpectrumComparison> {
    if *u1.tower() != *u2.tower() || u1.k() != u2.k() || u1.rank() != u2.rank() {
        return Err(Error::ParameterMismatch(format!(
            "(q^m, k, n) differ: ({}, {}, {}) vs ({}, {}, {})",
            u1.tower().order(),
            u1.k(),
            u1.rank(),
            u2.tower().order(),
            u2.k(),
            u2.rank()
        )));
    }
    let opts = AnalyzeOptions { with_hyperplanes: true, budget, ..Default::default() };
    let r1 = linset::analyze(u1, &opts)?;
    let r2 = linset::analyze(u2, &opts)?;
    let h1 = r1.hyperplane_spectrum.unwrap_or_default();
    let h2 = r2.hyperplane_spectrum.unwrap_or_default();
    let verdict = match first_difference("points", &r1.census, &r2.census).or_else(|| first_difference("hyperplanes", &h1, &h2)) {
        Some(witness) => Verdict::Distinguished { witness },
        None => Verdict::Indistinguishable { note: "point census and hyperplane spectrum agree; equivalence is not implied".into() },
    };
    Ok(SpectrumComparison { verdict, point_census: [r1.census, r2.census], hyperplane_spectrum: [h1, h2] })
}

/// Vectors in excess of one F_q-line per point: zero iff the span of
/// `basis` is scattered of full rank.
fn excess(tower: &FieldTower, basis: &[Vec<Elem>]) -> u64 {
    let big = tower.big();
    let k = basis.first().map_or(0, Vec::len);
    let mut gens = Vec::with_capacity(basis.len() * tower.e() as usize);
    for b in basis {
        let mut code = 1u32;
        for _ in 0..tower.e() {
            gens.push(fqlinalg::scale(big, tower.embed(Elem(code)), b));
            code *= tower.p();
        }
    }
    let mut buckets: HashMap<Vec<Elem>, u64> = HashMap::new();
    let mut zeros = 0u64;
    fqlinalg::for_each_in_fp_span(big, &gens, &vec![Elem::ZERO; k], |v| match ProjectivePoint::normalize(big, v) {
        Some(pt) => *buckets.entry(pt.rep().to_vec()).or_insert(0) += 1,
        None => zeros += 1,
    });
    let per_point = tower.q() - 1;
    buckets.values().map(|&c| c - per_point).sum::<u64>() + (zeros - 1) * tower.order()
}

/// A scattered subspace of F_{q^m}^k of rank n, found by seeded simulated
/// annealing on the number of excess vectors.
pub fn sample_scattered(tower: &Arc<FieldTower>, k: usize, n: usize, seed: u64, max_steps: u64) -> Result<SubspaceU> {
    let order = tower.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_vector = |rng: &mut ChaCha8Rng| -> Vec<Elem> { (0..k).map(|_| Elem(rng.gen_range(0..order) as u32)).collect() };
    let mut basis: Vec<Vec<Elem>> = (0..n).map(|_| random_vector(&mut rng)).collect();
    let mut cost = excess(tower, &basis);
    let mut temp = 2.0f64;
    for _ in 0..max_steps {
        if cost == 0 {
            return SubspaceU::new(tower.clone(), k, basis);
        }
        let j = rng.gen_range(0..n);
        let old = basis[j].clone();
        if rng.gen_bool(0.7) {
            let c = rng.gen_range(0..k);
            basis[j][c] = Elem(rng.gen_range(0..order) as u32);
        } else {
            basis[j] = random_vector(&mut rng);
        }
        let next = excess(tower, &basis);
        let uphill = (cost as f64 - next as f64) / temp;
        if next <= cost || rng.gen_bool(uphill.exp().min(1.0)) {
            cost = next;
        } else {
            basis[j] = old;
        }
        temp = (temp * 0.99999).max(0.05);
    }
    if cost == 0 {
        return SubspaceU::new(tower.clone(), k, basis);
    }
    Err(Error::ConditionViolated(format!("no scattered subspace of rank {n} in F_(q^m)^{k} found in {max_steps} steps")))
}
