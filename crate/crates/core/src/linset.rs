//! F_q-subspaces of F_{q^m}^k, the linear sets they define, point and
//! hyperplane weights, and the trace duality.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field, FieldDescriptor, FieldTower};
use crate::fqlinalg::{self, FlatBasis};
use crate::tally::Tally;

/// Default cap on enumeration work for a single analysis.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

const HEAVY_KEEP: usize = 16;

/// An F_q-subspace of F_{q^m}^k, stored in canonical form.
#[derive(Clone)]
pub struct SubspaceU {
    tower: Arc<FieldTower>,
    k: usize,
    flat: FlatBasis,
    basis: Vec<Vec<Elem>>,
}

impl fmt::Debug for SubspaceU {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubspaceU").field("k", &self.k).field("rank", &self.rank()).field("basis", &self.basis).finish()
    }
}

impl PartialEq for SubspaceU {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.flat == other.flat && *self.tower == *other.tower
    }
}

impl Eq for SubspaceU {}

impl SubspaceU {
    /// Subspace with the given F_q-basis; fails if the vectors are dependent.
    pub fn new(tower: Arc<FieldTower>, k: usize, vectors: Vec<Vec<Elem>>) -> Result<Self> {
        let n = vectors.len();
        let u = Self::span(tower, k, vectors)?;
        if u.rank() != n {
            return Err(Error::DependentBasis);
        }
        Ok(u)
    }

    /// F_q-span of arbitrary vectors.
    pub fn span(tower: Arc<FieldTower>, k: usize, vectors: Vec<Vec<Elem>>) -> Result<Self> {
        let order = tower.order();
        let mut rows = Vec::with_capacity(vectors.len());
        for v in &vectors {
            if v.len() != k {
                return Err(Error::AmbientMismatch(format!("vector of length {} in F_{{q^m}}^{k}", v.len())));
            }
            if let Some(bad) = v.iter().find(|a| a.0 as u64 >= order) {
                return Err(Error::AmbientMismatch(format!("element {} outside a field of order {order}", bad.0)));
            }
            rows.push(fqlinalg::flatten(&tower, v));
        }
        let m = tower.m() as usize;
        let flat = FlatBasis::span(tower.small(), m * k, rows)?;
        Self::from_flat(tower, k, flat)
    }

    pub fn from_flat(tower: Arc<FieldTower>, k: usize, flat: FlatBasis) -> Result<Self> {
        let m = tower.m() as usize;
        if flat.ncols() != m * k {
            return Err(Error::AmbientMismatch(format!("flat basis has {} columns, expected {}", flat.ncols(), m * k)));
        }
        let basis = flat.rows().iter().map(|r| fqlinalg::unflatten(&tower, r)).collect::<Result<Vec<_>>>()?;
        Ok(SubspaceU { tower, k, flat, basis })
    }

    pub fn zero(tower: Arc<FieldTower>, k: usize) -> Self {
        let m = tower.m() as usize;
        SubspaceU { tower, k, flat: FlatBasis::zero(m * k), basis: Vec::new() }
    }

    pub fn whole(tower: Arc<FieldTower>, k: usize) -> Self {
        let m = tower.m() as usize;
        let flat = FlatBasis::full(m * k);
        Self::from_flat(tower, k, flat).expect("full basis has the right width")
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rank(&self) -> usize {
        self.flat.dim()
    }

    /// Canonical F_q-basis (unflattened RREF rows).
    pub fn basis(&self) -> &[Vec<Elem>] {
        &self.basis
    }

    pub fn flat(&self) -> &FlatBasis {
        &self.flat
    }

    pub fn contains(&self, v: &[Elem]) -> bool {
        v.len() == self.k && self.flat.contains(self.tower.small(), &fqlinalg::flatten(&self.tower, v))
    }

    fn check_same_ambient(&self, other: &SubspaceU) -> Result<()> {
        if self.k != other.k || *self.tower != *other.tower {
            return Err(Error::AmbientMismatch("subspaces live in different ambient spaces".into()));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &SubspaceU) -> Result<SubspaceU> {
        self.check_same_ambient(other)?;
        let flat = self.flat.intersect(self.tower.small(), &other.flat)?;
        Self::from_flat(self.tower.clone(), self.k, flat)
    }

    pub fn sum(&self, other: &SubspaceU) -> Result<SubspaceU> {
        self.check_same_ambient(other)?;
        let flat = self.flat.sum(self.tower.small(), &other.flat)?;
        Self::from_flat(self.tower.clone(), self.k, flat)
    }

    pub fn is_subspace_of(&self, other: &SubspaceU) -> bool {
        self.k == other.k && self.flat.is_subspace_of(self.tower.small(), &other.flat)
    }

    /// An F_p-basis of U, for walking all of its vectors.
    pub fn fp_generators(&self) -> Vec<Vec<Elem>> {
        let t = &self.tower;
        if t.e() == 1 {
            return self.basis.clone();
        }
        let p = t.p();
        let mut out = Vec::with_capacity(self.basis.len() * t.e() as usize);
        for b in &self.basis {
            let mut scalar_code = 1u32;
            for _ in 0..t.e() {
                let s = t.embed(Elem(scalar_code));
                out.push(fqlinalg::scale(t.big(), s, b));
                scalar_code *= p;
            }
        }
        out
    }

    /// Place U into F_{q^m}^{k_total} starting at coordinate `offset`.
    pub fn embed_at(&self, k_total: usize, offset: usize) -> Result<SubspaceU> {
        if offset + self.k > k_total {
            return Err(Error::DimensionMismatch(format!("{} coordinates at offset {offset} exceed {k_total}", self.k)));
        }
        let vectors = self
            .basis
            .iter()
            .map(|b| {
                let mut v = vec![Elem::ZERO; k_total];
                v[offset..offset + self.k].copy_from_slice(b);
                v
            })
            .collect();
        SubspaceU::span(self.tower.clone(), k_total, vectors)
    }

    /// Coordinates `range` of every basis vector, as a subspace of the smaller space.
    pub fn project(&self, start: usize, len: usize) -> Result<SubspaceU> {
        if start + len > self.k {
            return Err(Error::DimensionMismatch("projection range out of bounds".into()));
        }
        let vectors = self.basis.iter().map(|b| b[start..start + len].to_vec()).collect();
        SubspaceU::span(self.tower.clone(), len, vectors)
    }

    pub fn to_json(&self) -> SubspaceJson {
        SubspaceJson {
            field: self.tower.descriptor(),
            k: self.k,
            basis: self.basis.iter().map(|b| b.iter().map(|a| a.0).collect()).collect(),
        }
    }

    /// Build from JSON, reusing `tower` when it describes the same field.
    pub fn from_json(json: &SubspaceJson, tower: Option<Arc<FieldTower>>) -> Result<SubspaceU> {
        let tower = match tower {
            Some(t) if t.descriptor() == json.field => t,
            Some(_) => return Err(Error::AmbientMismatch("subspace field differs from the session field".into())),
            None => Arc::new(FieldTower::from_descriptor(&json.field)?),
        };
        let vectors = json.basis.iter().map(|b| b.iter().map(|&a| Elem(a)).collect()).collect();
        SubspaceU::span(tower, json.k, vectors)
    }
}

/// Wire shape of a subspace: `{"field":{...},"k":3,"basis":[[...],...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub field: FieldDescriptor,
    pub k: usize,
    pub basis: Vec<Vec<u32>>,
}

impl Serialize for SubspaceU {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubspaceU {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = SubspaceJson::deserialize(d)?;
        SubspaceU::from_json(&json, None).map_err(serde::de::Error::custom)
    }
}

/// A point of PG(k-1, q^m), represented with first nonzero coordinate 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjectivePoint(Vec<Elem>);

impl ProjectivePoint {
    pub fn normalize(f: &Field, v: &[Elem]) -> Option<Self> {
        let mut out = Vec::with_capacity(v.len());
        normalize_into(f, v, &mut out).then_some(ProjectivePoint(out))
    }

    pub fn rep(&self) -> &[Elem] {
        &self.0
    }

    pub fn unit(k: usize, i: usize) -> Self {
        let mut v = vec![Elem::ZERO; k];
        v[i] = Elem::ONE;
        ProjectivePoint(v)
    }
}

fn normalize_into(f: &Field, v: &[Elem], out: &mut Vec<Elem>) -> bool {
    out.clear();
    let Some(lead) = v.iter().position(|a| !a.is_zero()) else {
        return false;
    };
    let s = f.inv(v[lead]).expect("nonzero");
    out.extend(v.iter().map(|&a| f.mul(a, s)));
    true
}

/// Hyperplane {y : a . y = 0} given by its normalized normal vector a.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: ProjectivePoint,
}

impl Hyperplane {
    pub fn new(f: &Field, normal: &[Elem]) -> Option<Self> {
        ProjectivePoint::normalize(f, normal).map(|normal| Hyperplane { normal })
    }

    /// An F_{q^m}-basis of the hyperplane.
    pub fn basis(&self, f: &Field) -> Vec<Vec<Elem>> {
        fqlinalg::null_space(f, std::slice::from_ref(&self.normal.0), self.normal.0.len())
    }

    pub fn contains(&self, f: &Field, v: &[Elem]) -> bool {
        fqlinalg::dot(f, &self.normal.0, v).is_zero()
    }
}

/// Number of points of PG(k-1, order), saturating.
pub fn point_count(k: usize, order: u64) -> u128 {
    let mut total: u128 = 0;
    let mut block: u128 = 1;
    for _ in 0..k {
        total = total.saturating_add(block);
        block = block.saturating_mul(order as u128);
    }
    total
}

/// The point with the given index: indices run first over points whose
/// leading 1 sits in coordinate 0, then coordinate 1, and so on; within a
/// block the trailing coordinates count up with the last one fastest.
pub fn point_at(k: usize, order: u64, mut index: u64) -> Vec<Elem> {
    let mut v = vec![Elem::ZERO; k];
    let mut lead = 0;
    let mut block = (order as u128).pow(k as u32 - 1);
    while index as u128 >= block {
        index -= block as u64;
        lead += 1;
        block /= order as u128;
    }
    v[lead] = Elem::ONE;
    for c in (lead + 1..k).rev() {
        v[c] = Elem((index % order) as u32);
        index /= order;
    }
    v
}

/// q^w - 1 = count, solved for w.
fn weight_from_count(count: u64, q: u64) -> usize {
    let mut w = 0;
    let mut pw = 1u64;
    while pw - 1 < count {
        pw *= q;
        w += 1;
    }
    debug_assert_eq!(pw - 1, count);
    w
}

/// dim_{F_q} of the F_q-span of some elements of F_{q^m}.
pub fn fq_rank_of_scalars(tower: &FieldTower, scalars: &[Elem]) -> usize {
    if tower.p() == 2 && tower.e() == 1 {
        // Coordinates are the bits of the encoding.
        let mut basis = [0u32; 32];
        let mut rank = 0;
        for &s in scalars {
            let mut x = s.0;
            while x != 0 {
                let top = 31 - x.leading_zeros() as usize;
                if basis[top] == 0 {
                    basis[top] = x;
                    rank += 1;
                    break;
                }
                x ^= basis[top];
            }
        }
        return rank;
    }
    let rows: Vec<Vec<Elem>> = scalars.iter().filter(|s| !s.is_zero()).map(|&s| tower.to_coords(s)).collect();
    fqlinalg::rank_of(tower.small(), rows)
}

/// dim_{F_q}(U ∩ <v>_{F_{q^m}}) for a nonzero v.
pub fn vector_weight(u: &SubspaceU, v: &[Elem]) -> usize {
    let t = &u.tower;
    let big = t.big();
    let small = t.small();
    let m = t.m() as usize;
    let residuals: Vec<Vec<Elem>> = t
        .x_powers()
        .iter()
        .map(|&xp| {
            let mut row = fqlinalg::flatten(t, &fqlinalg::scale(big, xp, v));
            u.flat.reduce(small, &mut row);
            row
        })
        .collect();
    m - fqlinalg::rank_of(small, residuals)
}

pub fn point_weight(u: &SubspaceU, point: &ProjectivePoint) -> Result<usize> {
    if point.0.len() != u.k {
        return Err(Error::AmbientMismatch(format!("point in PG({}) against k = {}", point.0.len() as i64 - 1, u.k)));
    }
    Ok(vector_weight(u, &point.0))
}

/// Flattened span of F_{q^m}-independent vectors.
pub fn fqm_flat_span(tower: &FieldTower, k: usize, vectors: &[Vec<Elem>]) -> Result<FlatBasis> {
    if let Some(v) = vectors.iter().find(|v| v.len() != k) {
        return Err(Error::AmbientMismatch(format!("vector of length {} in F_{{q^m}}^{k}", v.len())));
    }
    if fqlinalg::rank_of(tower.big(), vectors.to_vec()) != vectors.len() {
        return Err(Error::DependentBasis);
    }
    let big = tower.big();
    let rows = vectors
        .iter()
        .flat_map(|v| tower.x_powers().iter().map(move |&xp| fqlinalg::flatten(tower, &fqlinalg::scale(big, xp, v))))
        .collect();
    FlatBasis::span(tower.small(), tower.m() as usize * k, rows)
}

/// dim_{F_q}(U ∩ W) for W given by an F_{q^m}-basis.
pub fn subspace_weight(u: &SubspaceU, w: &[Vec<Elem>]) -> Result<usize> {
    let wf = fqm_flat_span(&u.tower, u.k, w)?;
    Ok(u.rank() + wf.dim() - u.flat.sum(u.tower.small(), &wf)?.dim())
}

/// dim_{F_q}(U ∩ H) = n - dim_{F_q} <a . u_j>.
pub fn hyperplane_weight(u: &SubspaceU, h: &Hyperplane) -> Result<usize> {
    if h.normal.0.len() != u.k {
        return Err(Error::AmbientMismatch("hyperplane of another space".into()));
    }
    Ok(weight_of_normal(u, &h.normal.0))
}

fn weight_of_normal(u: &SubspaceU, a: &[Elem]) -> usize {
    let big = u.tower.big();
    let scalars: Vec<Elem> = u.basis.iter().map(|b| fqlinalg::dot(big, a, b)).collect();
    u.rank() - fq_rank_of_scalars(&u.tower, &scalars)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Scattered,
    Club { index: usize, head: ProjectivePoint },
    Other,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Scattered => write!(f, "Scattered"),
            Classification::Club { index, .. } => write!(f, "Club({index})"),
            Classification::Other => write!(f, "Other"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSetReport {
    pub rank: usize,
    pub size: u64,
    pub census: Tally,
    pub classification: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperplane_spectrum: Option<Tally>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Auto,
    Vectors,
    Points,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    #[default]
    Auto,
    /// Walk every hyperplane.
    Direct,
    /// Read hyperplane weights off the point census of the trace dual.
    ViaDual,
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub strategy: Strategy,
    pub with_hyperplanes: bool,
    pub spectrum_method: SpectrumMethod,
    pub budget: u64,
    pub parallel: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            strategy: Strategy::Auto,
            with_hyperplanes: false,
            spectrum_method: SpectrumMethod::Auto,
            budget: DEFAULT_BUDGET,
            parallel: true,
        }
    }
}

impl AnalyzeOptions {
    pub fn with_hyperplanes() -> Self {
        AnalyzeOptions { with_hyperplanes: true, ..Default::default() }
    }

    pub fn serial(strategy: Strategy) -> Self {
        AnalyzeOptions { strategy, parallel: false, ..Default::default() }
    }
}

#[derive(Default)]
struct Census {
    counts: Tally,
    heavy: Vec<(ProjectivePoint, usize)>,
}

impl Census {
    fn note(&mut self, point: ProjectivePoint, w: usize) {
        self.counts.add(w, 1);
        if w >= 2 {
            self.heavy.push((point, w));
            if self.heavy.len() > 4 * HEAVY_KEEP {
                self.trim();
            }
        }
    }

    fn trim(&mut self) {
        self.heavy.sort();
        self.heavy.truncate(HEAVY_KEEP);
    }

    fn merge(mut self, other: Census) -> Census {
        self.counts = self.counts.merge(other.counts);
        self.heavy.extend(other.heavy);
        self.trim();
        self
    }
}

fn exceeds(v: u128, budget: u64) -> bool {
    v > budget as u128
}

fn pow_sat(base: u64, exp: usize) -> u128 {
    let mut r: u128 = 1;
    for _ in 0..exp {
        r = r.saturating_mul(base as u128);
    }
    r
}

fn census_by_vectors(u: &SubspaceU, parallel: bool) -> Census {
    let t = &u.tower;
    let big = t.big();
    let q = t.q();
    let gens = u.fp_generators();
    let buckets = fqlinalg::fold_fp_span(
        big,
        &gens,
        u.k,
        parallel,
        HashMap::<Vec<Elem>, u64>::new,
        |map, v| {
            let mut key = Vec::with_capacity(v.len());
            if normalize_into(big, v, &mut key) {
                *map.entry(key).or_insert(0) += 1;
            }
        },
        |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            a
        },
    );
    let mut census = Census::default();
    for (rep, c) in buckets {
        census.note(ProjectivePoint(rep), weight_from_count(c, q));
    }
    census.trim();
    census
}

fn census_by_points(u: &SubspaceU, parallel: bool) -> Census {
    let k = u.k;
    let order = u.tower.order();
    let total = point_count(k, order) as u64;
    let chunk = 2048u64;
    let run = |start: u64| {
        let mut c = Census::default();
        for idx in start..(start + chunk).min(total) {
            let v = point_at(k, order, idx);
            let w = vector_weight(u, &v);
            if w > 0 {
                c.note(ProjectivePoint(v), w);
            }
        }
        c
    };
    let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
    let mut census = if parallel {
        starts.into_par_iter().map(run).reduce(Census::default, Census::merge)
    } else {
        starts.into_iter().map(run).fold(Census::default(), Census::merge)
    };
    census.trim();
    census
}

fn classify(census: &Census) -> Classification {
    let heavy: Vec<_> = census.counts.iter().filter(|(&w, _)| w >= 2).collect();
    if census.counts.is_empty() {
        return Classification::Other;
    }
    match heavy.as_slice() {
        [] => Classification::Scattered,
        [(&w, &1)] => Classification::Club { index: w, head: census.heavy[0].0.clone() },
        _ => Classification::Other,
    }
}

/// Hyperplane weight multiset, weights including 0.
pub fn hyperplane_spectrum(u: &SubspaceU, method: SpectrumMethod, budget: u64, parallel: bool) -> Result<Tally> {
    let t = &u.tower;
    let k = u.k;
    let hyperplanes = point_count(k, t.order());
    let dual_dim = t.m() as usize * k - u.rank();
    let dual_vectors = pow_sat(t.q(), dual_dim);
    let method = match method {
        SpectrumMethod::Auto if dual_vectors < hyperplanes => SpectrumMethod::ViaDual,
        SpectrumMethod::Auto => SpectrumMethod::Direct,
        other => other,
    };
    match method {
        SpectrumMethod::ViaDual => {
            if exceeds(dual_vectors, budget) {
                return Err(Error::SizeBudgetExceeded { what: "dual census".into(), needed: dual_vectors.to_string(), cap: budget });
            }
            let v = dual_perp(u);
            let census = census_by_vectors(&v, parallel).counts;
            // w_U(a^perp) = w_V(<a>) + n - m
            let shift = u.rank() as i64 - t.m() as i64;
            let mut spec = Tally::new();
            let covered = census.total() as u128;
            if hyperplanes > covered {
                spec.add(shift as usize, (hyperplanes - covered) as u64);
            }
            for (&w, &c) in census.iter() {
                spec.add((w as i64 + shift) as usize, c);
            }
            Ok(spec)
        }
        _ => {
            if exceeds(hyperplanes, budget) {
                return Err(Error::SizeBudgetExceeded { what: "hyperplane scan".into(), needed: hyperplanes.to_string(), cap: budget });
            }
            let total = hyperplanes as u64;
            let order = t.order();
            let chunk = 4096u64;
            let run = |start: u64| {
                let mut s = Tally::new();
                for idx in start..(start + chunk).min(total) {
                    s.add(weight_of_normal(u, &point_at(k, order, idx)), 1);
                }
                s
            };
            let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
            Ok(if parallel {
                starts.into_par_iter().map(run).reduce(Tally::new, Tally::merge)
            } else {
                starts.into_iter().map(run).fold(Tally::new(), Tally::merge)
            })
        }
    }
}

/// Point census, size and classification of L_U.
pub fn analyze(u: &SubspaceU, opts: &AnalyzeOptions) -> Result<LinearSetReport> {
    let t = &u.tower;
    let vectors = pow_sat(t.q(), u.rank());
    let points = point_count(u.k, t.order());
    let strategy = match opts.strategy {
        Strategy::Auto if vectors < points => Strategy::Vectors,
        Strategy::Auto => Strategy::Points,
        s => s,
    };
    let work = if strategy == Strategy::Vectors { vectors } else { points };
    if exceeds(work, opts.budget) {
        return Err(Error::SizeBudgetExceeded {
            what: "linear set census".into(),
            needed: format!("{} vectors / {} points", vectors, points),
            cap: opts.budget,
        });
    }
    let census = match strategy {
        Strategy::Vectors => census_by_vectors(u, opts.parallel),
        _ => census_by_points(u, opts.parallel),
    };
    let hyperplane_spectrum =
        if opts.with_hyperplanes { Some(hyperplane_spectrum(u, opts.spectrum_method, opts.budget, opts.parallel)?) } else { None };
    Ok(LinearSetReport {
        rank: u.rank(),
        size: census.counts.total(),
        classification: classify(&census),
        census: census.counts,
        hyperplane_spectrum,
    })
}

pub fn analyze_default(u: &SubspaceU) -> Result<LinearSetReport> {
    analyze(u, &AnalyzeOptions::default())
}

/// U^{⊥'} = {v : Tr(u . v) = 0 for all u in U}.
pub fn dual_perp(u: &SubspaceU) -> SubspaceU {
    let t = &u.tower;
    let big = t.big();
    let m = t.m() as usize;
    let rows: Vec<Vec<Elem>> = u
        .basis
        .iter()
        .map(|b| {
            let mut row = Vec::with_capacity(m * u.k);
            for &c in b {
                for &xp in t.x_powers() {
                    row.push(t.trace_small(big.mul(c, xp)));
                }
            }
            row
        })
        .collect();
    let flat = FlatBasis::kernel_of(t.small(), &rows, m * u.k).expect("rows have width mk");
    SubspaceU::from_flat(u.tower.clone(), u.k, flat).expect("width mk")
}

/// Orthogonal complement of U inside W for the trace form restricted to W.
pub fn restricted_dual(u: &SubspaceU, w: &[Vec<Elem>]) -> Result<SubspaceU> {
    let t = &u.tower;
    let big = t.big();
    let wf = fqm_flat_span(t, u.k, w)?;
    let gram: Vec<Vec<Elem>> = w.iter().map(|a| w.iter().map(|b| fqlinalg::dot(big, a, b)).collect()).collect();
    if fqlinalg::rank_of(big, gram) != w.len() {
        return Err(Error::DegenerateRestriction);
    }
    if !u.flat.is_subspace_of(t.small(), &wf) {
        return Err(Error::NotContained("U is not a subspace of W".into()));
    }
    let fq_basis: Vec<Vec<Elem>> = w.iter().flat_map(|v| t.x_powers().iter().map(move |&xp| fqlinalg::scale(big, xp, v))).collect();
    let rows: Vec<Vec<Elem>> = u.basis.iter().map(|b| fq_basis.iter().map(|f| t.trace_small(fqlinalg::dot(big, b, f))).collect()).collect();
    let coeffs = fqlinalg::null_space(t.small(), &rows, fq_basis.len());
    let vectors = coeffs
        .iter()
        .map(|c| {
            let mut v = vec![Elem::ZERO; u.k];
            for (&ci, f) in c.iter().zip(&fq_basis) {
                if !ci.is_zero() {
                    fqlinalg::add_into(big, &mut v, &fqlinalg::scale(big, t.embed(ci), f));
                }
            }
            v
        })
        .collect();
    SubspaceU::span(u.tower.clone(), u.k, vectors)
}

/// True iff <U>_{F_{q^m}} is the whole space.
pub fn spans_full_space(u: &SubspaceU) -> bool {
    fqlinalg::rank_of(u.tower.big(), u.basis.clone()) == u.k
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub holds: bool,
    pub diagnostic: Option<String>,
}

fn theta(q: u64, i: usize) -> BigUint {
    // 1 + q + ... + q^{i-1}
    let qb = BigUint::from(q);
    (qb.pow(i as u32) - 1u32) / (qb - 1u32)
}

/// Size identity and the q-weighted vector-count identity of a census.
pub fn verify_weight_identities(report: &LinearSetReport, q: u64, n: usize) -> IdentityCheck {
    let total: u64 = report.census.total();
    if total != report.size {
        return IdentityCheck { holds: false, diagnostic: Some(format!("sum of N_i is {total}, size is {}", report.size)) };
    }
    let weighted: BigUint = report.census.iter().map(|(&i, &c)| theta(q, i) * BigUint::from(c)).sum();
    let expected = theta(q, n);
    if weighted != expected {
        return IdentityCheck {
            holds: false,
            diagnostic: Some(format!("sum N_i (q^i-1)/(q-1) = {weighted}, expected (q^n-1)/(q-1) = {expected}")),
        };
    }
    IdentityCheck { holds: true, diagnostic: None }
}

/// Drop one vector of U ∩ <head> from a club, giving an (i-1)-club of rank n-1.
pub fn sub_club(u: &SubspaceU, head: &ProjectivePoint) -> Result<SubspaceU> {
    let t = &u.tower;
    let small = t.small();
    let line = fqm_flat_span(t, u.k, std::slice::from_ref(&head.0))?;
    let meet = u.flat.intersect(small, &line)?;
    if meet.dim() == 0 {
        return Err(Error::NotContained("head point is not in the linear set".into()));
    }
    let mut kept: Vec<Vec<Elem>> = meet.rows()[1..].to_vec();
    let mut span = meet.clone();
    for r in u.flat.rows() {
        if !span.contains(small, r) {
            span = span.sum(small, &FlatBasis::span(small, r.len(), vec![r.clone()])?)?;
            kept.push(r.clone());
        }
    }
    let flat = FlatBasis::span(small, u.flat.ncols(), kept)?;
    SubspaceU::from_flat(u.tower.clone(), u.k, flat)
}

/// U1 ⊕ U2 in F_{q^m}^{k1+k2}, U1 in the first block of coordinates.
pub fn direct_sum(u1: &SubspaceU, u2: &SubspaceU) -> Result<SubspaceU> {
    if *u1.tower != *u2.tower {
        return Err(Error::AmbientMismatch("different fields".into()));
    }
    let k = u1.k + u2.k;
    u1.embed_at(k, 0)?.sum(&u2.embed_at(k, u1.k)?)
}

/// Outcome of checking the structure theorem for a maximum (m-1)-club.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaxClubReport {
    pub rank: usize,
    pub head: ProjectivePoint,
    pub dual_rank: usize,
    pub dual_spectrum: Tally,
    pub dual_spectrum_ok: bool,
    pub dual_spans: bool,
    pub heavy_hyperplane: Hyperplane,
    pub dual_split_ok: bool,
    pub dual_scattered: bool,
    pub restricted_dual_scattered: Option<bool>,
    pub scattered_hyperplane: Option<Hyperplane>,
    pub holds: bool,
}

/// Verify that U is a maximum (m-1)-club of the expected shape: the trace
/// dual has the predicted hyperplane weights with a single heavy
/// hyperplane, splits off one vector outside it, is scattered, and U is
/// the direct sum of a maximum scattered part in a hyperplane missing the
/// head and an (m-1)-dimensional part on the head.
pub fn verify_max_club(u: &SubspaceU, budget: u64) -> Result<MaxClubReport> {
    let t = &u.tower;
    let big = t.big();
    let small = t.small();
    let m = t.m() as usize;
    let k = u.k;
    if k < 3 || m < 3 || !(m * (k + 1)).is_multiple_of(2) || u.rank() != m * (k + 1) / 2 - 1 {
        return Err(Error::ParameterViolation(format!("rank {} is not m(k+1)/2 - 1 for m = {m}, k = {k}", u.rank())));
    }
    let opts = AnalyzeOptions { budget, ..Default::default() };
    let report = analyze(u, &opts)?;
    let head = match report.classification {
        Classification::Club { index, head } if index == m - 1 => head,
        other => return Err(Error::ParameterViolation(format!("expected Club({}), found {other}", m - 1))),
    };
    let v = dual_perp(u);
    let base = m * (k - 3) / 2;
    let dual_report = analyze(&v, &AnalyzeOptions { with_hyperplanes: true, ..opts.clone() })?;
    let dual_spectrum = dual_report.hyperplane_spectrum.clone().unwrap_or_default();
    let allowed = [1 + base, 2 + base, m + base];
    let dual_spectrum_ok = dual_spectrum.keys().all(|w| allowed.contains(w)) && dual_spectrum.count(m + base) == 1;
    let heavy_hyperplane = Hyperplane { normal: head.clone() };
    let heavy_ok = hyperplane_weight(&v, &heavy_hyperplane)? == m + base;

    let wbar = heavy_hyperplane.basis(big);
    let wbar_flat = fqm_flat_span(t, k, &wbar)?;
    let meet = v.flat.intersect(small, &wbar_flat)?;
    let meet_vectors: Vec<Vec<Elem>> = meet.rows().iter().map(|r| fqlinalg::unflatten(t, r)).collect::<Result<_>>()?;
    let mut dual_split_ok = heavy_ok && meet.dim() == m * (k - 1) / 2;
    let mut outside = 0;
    for w in v.basis() {
        if heavy_hyperplane.contains(big, w) {
            continue;
        }
        outside += 1;
        let flat_w = fqlinalg::flatten(t, w);
        let with_w = meet.sum(small, &FlatBasis::span(small, m * k, vec![flat_w])?)?;
        let mut stacked = meet_vectors.clone();
        stacked.push(w.clone());
        let independent = fqlinalg::rank_of(big, meet_vectors.clone()) + 1 == fqlinalg::rank_of(big, stacked);
        dual_split_ok &= with_w == v.flat && independent;
    }
    dual_split_ok &= outside > 0;
    let dual_scattered = dual_report.classification == Classification::Scattered;

    let restricted_dual_scattered =
        match SubspaceU::from_flat(u.tower.clone(), k, meet.clone()).and_then(|part| restricted_dual(&part, &wbar)) {
            Ok(rd) => Some(rd.rank() == m * (k - 1) / 2 && analyze(&rd, &opts)?.classification == Classification::Scattered),
            Err(Error::DegenerateRestriction) => None,
            Err(e) => return Err(e),
        };

    // Cone form: a hyperplane missing the head with weight m(k-1)/2 meets U
    // in a scattered complement of U ∩ head.
    let target = m * (k - 1) / 2;
    let total = point_count(k, t.order());
    if exceeds(total, budget) {
        return Err(Error::SizeBudgetExceeded { what: "hyperplane scan".into(), needed: total.to_string(), cap: budget });
    }
    let mut scattered_hyperplane = None;
    for idx in 0..total as u64 {
        let a = point_at(k, t.order(), idx);
        if fqlinalg::dot(big, &a, &head.0).is_zero() || weight_of_normal(u, &a) != target {
            continue;
        }
        let h = Hyperplane { normal: ProjectivePoint(a) };
        let part = u.intersect(&SubspaceU::from_flat(u.tower.clone(), k, fqm_flat_span(t, k, &h.basis(big))?)?)?;
        if analyze(&part, &opts)?.classification == Classification::Scattered {
            scattered_hyperplane = Some(h);
            break;
        }
    }
    let head_part = vector_weight(u, &head.0);
    let holds = dual_spectrum_ok
        && heavy_ok
        && spans_full_space(&v)
        && dual_split_ok
        && dual_scattered
        && restricted_dual_scattered != Some(false)
        && scattered_hyperplane.is_some()
        && head_part + target == u.rank();
    Ok(MaxClubReport {
        rank: u.rank(),
        head,
        dual_rank: v.rank(),
        dual_spectrum,
        dual_spectrum_ok,
        dual_spans: spans_full_space(&v),
        heavy_hyperplane,
        dual_split_ok,
        dual_scattered,
        restricted_dual_scattered,
        scattered_hyperplane,
        holds,
    })
}
