//! Rank-metric codes in the vector framework: codes from systems, rank
//! weight distributions, duals, the MacWilliams transform and the bound
//! machinery for club-dual codes.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, FieldDescriptor, FieldTower};
use crate::fqlinalg;
use crate::linset::{self, Classification, SpectrumMethod, SubspaceU};

/// A k-dimensional F_{q^m}-linear code of length n, given by a generator matrix.
#[derive(Clone)]
pub struct RankMetricCode {
    tower: Arc<FieldTower>,
    n: usize,
    g: Vec<Vec<Elem>>,
}

impl fmt::Debug for RankMetricCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RankMetricCode").field("n", &self.n).field("k", &self.k()).field("G", &self.g).finish()
    }
}

impl RankMetricCode {
    /// Code with the given generator rows; the rows must be independent.
    pub fn new(tower: Arc<FieldTower>, n: usize, g: Vec<Vec<Elem>>) -> Result<Self> {
        if let Some(r) = g.iter().find(|r| r.len() != n) {
            return Err(Error::AmbientMismatch(format!("generator row of length {} for n = {n}", r.len())));
        }
        let order = tower.order();
        if g.iter().flatten().any(|a| a.0 as u64 >= order) {
            return Err(Error::AmbientMismatch("generator entry outside the field".into()));
        }
        if fqlinalg::rank_of(tower.big(), g.clone()) != g.len() {
            return Err(Error::DependentBasis);
        }
        Ok(RankMetricCode { tower, n, g })
    }

    /// The code whose generator columns are the canonical basis of U.
    pub fn from_system(u: &SubspaceU) -> Result<Self> {
        if !linset::spans_full_space(u) {
            return Err(Error::DegenerateSystem);
        }
        let k = u.k();
        let g = (0..k).map(|r| u.basis().iter().map(|b| b[r]).collect()).collect();
        Self::new(u.tower().clone(), u.rank(), g)
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.g.len()
    }

    pub fn generator(&self) -> &[Vec<Elem>] {
        &self.g
    }

    /// F_q-span of the generator columns, a subspace of F_{q^m}^k.
    pub fn system(&self) -> Result<SubspaceU> {
        let k = self.k();
        let cols = (0..self.n).map(|j| (0..k).map(|r| self.g[r][j]).collect()).collect();
        SubspaceU::span(self.tower.clone(), k, cols)
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.system().map(|s| s.rank() == self.n).unwrap_or(false)
    }

    /// x G
    pub fn encode(&self, x: &[Elem]) -> Vec<Elem> {
        let big = self.tower.big();
        let mut c = vec![Elem::ZERO; self.n];
        for (&xi, row) in x.iter().zip(&self.g) {
            if !xi.is_zero() {
                fqlinalg::add_into(big, &mut c, &fqlinalg::scale(big, xi, row));
            }
        }
        c
    }

    pub fn to_json(&self) -> CodeJson {
        CodeJson {
            field: self.tower.descriptor(),
            n: self.n,
            k: self.k(),
            g: self.g.iter().map(|r| r.iter().map(|a| a.0).collect()).collect(),
        }
    }

    pub fn from_json(json: &CodeJson) -> Result<Self> {
        let tower = Arc::new(FieldTower::from_descriptor(&json.field)?);
        if json.g.len() != json.k {
            return Err(Error::DimensionMismatch(format!("k = {} but G has {} rows", json.k, json.g.len())));
        }
        let g = json.g.iter().map(|r| r.iter().map(|&a| Elem(a)).collect()).collect();
        Self::new(tower, json.n, g)
    }
}

/// Wire shape of a code: `{"field":{...},"n":5,"k":3,"G":[[...],...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeJson {
    pub field: FieldDescriptor,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "G")]
    pub g: Vec<Vec<u32>>,
}

impl Serialize for RankMetricCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RankMetricCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = CodeJson::deserialize(d)?;
        RankMetricCode::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// Rank weight: dim_{F_q} of the span of the coordinates.
pub fn codeword_weight(tower: &FieldTower, c: &[Elem]) -> usize {
    linset::fq_rank_of_scalars(tower, c)
}

/// Counts A_0..A_m indexed by rank weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightDistribution {
    counts: Vec<BigUint>,
}

impl WeightDistribution {
    pub fn zeros(m: usize) -> Self {
        WeightDistribution { counts: vec![BigUint::zero(); m + 1] }
    }

    pub fn from_counts(counts: Vec<BigUint>) -> Self {
        WeightDistribution { counts }
    }

    pub fn from_u64(counts: &[u64]) -> Self {
        WeightDistribution { counts: counts.iter().map(|&c| BigUint::from(c)).collect() }
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// A_w, zero past the end.
    pub fn get(&self, w: usize) -> BigUint {
        self.counts.get(w).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// Nonzero weights carrying codewords.
    pub fn support(&self) -> Vec<usize> {
        self.counts.iter().enumerate().skip(1).filter(|(_, c)| !c.is_zero()).map(|(w, _)| w).collect()
    }

    pub fn min_distance(&self) -> Option<usize> {
        self.support().first().copied()
    }

    pub fn m(&self) -> usize {
        self.counts.len() - 1
    }
}

impl fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CountRepr {
    Num(u64),
    Str(String),
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    #[serde(rename = "A")]
    a: Vec<CountRepr>,
}

impl Serialize for WeightDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let a = self
            .counts
            .iter()
            .map(|c| match c.to_u64() {
                Some(v) => CountRepr::Num(v),
                None => CountRepr::Str(c.to_string()),
            })
            .collect();
        DistributionRepr { a }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = DistributionRepr::deserialize(d)?;
        let counts = repr
            .a
            .into_iter()
            .map(|c| match c {
                CountRepr::Num(v) => Ok(BigUint::from(v)),
                CountRepr::Str(s) => s.parse::<BigUint>().map_err(serde::de::Error::custom),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if counts.is_empty() {
            return Err(serde::de::Error::custom("distribution needs at least A_0"));
        }
        Ok(WeightDistribution { counts })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMethod {
    /// Walk every codeword.
    Enumerate,
    /// Read weights off the hyperplane spectrum of the system.
    #[default]
    Geometric,
}

fn pow_big(q: u64, e: usize) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

pub fn weight_distribution(code: &RankMetricCode, method: WeightMethod, budget: u64, parallel: bool) -> Result<WeightDistribution> {
    let t = &code.tower;
    let m = t.m() as usize;
    let k = code.k();
    let mut dist = WeightDistribution::zeros(m);
    dist.counts[0] = BigUint::one();
    if k == 0 {
        return Ok(dist);
    }
    match method {
        WeightMethod::Enumerate => {
            let size = pow_big(t.order(), k);
            if size > BigUint::from(budget) {
                return Err(Error::SizeBudgetExceeded { what: "codeword enumeration".into(), needed: size.to_string(), cap: budget });
            }
            let big = t.big();
            let p = t.p();
            let mut gens = Vec::with_capacity(k * big.degree() as usize);
            for row in &code.g {
                let mut s = 1u32;
                for _ in 0..big.degree() {
                    gens.push(fqlinalg::scale(big, Elem(s), row));
                    s *= p;
                }
            }
            let counts = fqlinalg::fold_fp_span(
                big,
                &gens,
                code.n,
                parallel,
                || vec![0u64; m + 1],
                |acc, c| acc[codeword_weight(t, c)] += 1,
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
            Ok(WeightDistribution::from_u64(&counts))
        }
        WeightMethod::Geometric => {
            let u = code.system()?;
            let spectrum = linset::hyperplane_spectrum(&u, SpectrumMethod::Auto, budget, parallel)?;
            let scalars = BigUint::from(t.order() - 1);
            for (&w, &count) in spectrum.iter() {
                let weight = u.rank() - w;
                if weight == 0 {
                    return Err(Error::DependentBasis);
                }
                dist.counts[weight] += &scalars * BigUint::from(count);
            }
            Ok(dist)
        }
    }
}

/// Rows spanning {d : G d = 0}.
pub fn dual_code(code: &RankMetricCode) -> RankMetricCode {
    let big = code.tower.big();
    let g = fqlinalg::null_space(big, &code.g, code.n);
    RankMetricCode { tower: code.tower.clone(), n: code.n, g }
}

/// mk <= max(m,n)(min(m,n) - d + 1)
pub fn singleton_holds(m: usize, n: usize, k: usize, d: usize) -> bool {
    let lhs = m * k;
    let hi = m.max(n);
    let lo = m.min(n);
    lo + 1 >= d && lhs <= hi * (lo + 1 - d)
}

pub fn is_mrd(m: usize, n: usize, k: usize, d: usize) -> bool {
    let hi = m.max(n);
    let lo = m.min(n);
    lo + 1 >= d && m * k == hi * (lo + 1 - d)
}

/// Gaussian binomial coefficient [s choose t]_q.
pub fn qbinomial(s: i64, t: i64, q: u64) -> BigUint {
    if s < 0 || t < 0 || t > s {
        return BigUint::zero();
    }
    let qb = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..t {
        num *= qb.pow((s - i) as u32) - 1u32;
        den *= qb.pow((i + 1) as u32) - 1u32;
    }
    num / den
}

/// Distribution B of the dual of a code with distribution A, length N,
/// dimension k, over F_{q^m}/F_q.
pub fn macwilliams_transform(a: &WeightDistribution, length: usize, k: usize, m: usize, q: u64) -> Result<WeightDistribution> {
    let code_size = BigRational::from_integer(BigInt::from(pow_big(q, m * k)));
    let qbin = |s: usize, t: usize| BigRational::from_integer(BigInt::from(qbinomial(s as i64, t as i64, q)));
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    for nu in 0..=m {
        let lhs: BigRational = (0..=m - nu).map(|i| BigRational::from_integer(BigInt::from(a.get(i))) * qbin(m - i, nu)).sum();
        let scale = BigRational::from_integer(BigInt::from(pow_big(q, length * nu)));
        let mut val = lhs * scale / &code_size;
        for (j, bj) in b.iter().enumerate() {
            val -= bj * qbin(m - j, nu - j);
        }
        b.push(val);
    }
    let mut counts = Vec::with_capacity(m + 1);
    for (j, v) in b.into_iter().enumerate() {
        if !v.is_integer() {
            return Err(Error::NonIntegerSolution(j));
        }
        if v.is_negative() {
            return Err(Error::NegativeCoefficient(j));
        }
        counts.push(v.to_integer().to_biguint().expect("nonnegative"));
    }
    Ok(WeightDistribution { counts })
}

fn geometric_sum(q: u64, from: usize, to_inclusive: usize) -> BigUint {
    (from..=to_inclusive).map(|e| pow_big(q, e)).sum()
}

/// Predicted parameters of the code associated with the trace dual of an
/// i-club of rank n in PG(k-1, q^m).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClubCodePrediction {
    pub length: usize,
    pub dimension: usize,
    pub min_distance: usize,
    pub distribution: WeightDistribution,
    /// A_{m-1} as (q^m-1)(q^n + ... + q^i).
    pub printed_a_m_minus_1: Option<BigUint>,
    pub printed_matches: bool,
}

pub fn club_code_prediction(q: u64, m: usize, k: usize, i: usize, n: usize) -> Result<ClubCodePrediction> {
    if i == 0 || i >= m {
        return Err(Error::ParameterViolation(format!("need 1 <= i < m, got i = {i}, m = {m}")));
    }
    if n > (k - 1) * m || n < i {
        return Err(Error::ParameterViolation(format!("need i <= n <= (k-1)m, got n = {n}")));
    }
    let scalars = pow_big(q, m) - 1u32;
    let total = pow_big(q, m * k) - 1u32;
    let mut dist = WeightDistribution::zeros(m);
    dist.counts[0] = BigUint::one();
    let (a_m1, printed) = if i >= 2 {
        dist.counts[m - i] = scalars.clone();
        let points_weight_one = geometric_sum(q, i, n - 1);
        (&scalars * points_weight_one, Some(&scalars * geometric_sum(q, i, n)))
    } else {
        let size = (pow_big(q, n) - 1u32) / BigUint::from(q - 1);
        (&scalars * size, None)
    };
    dist.counts[m - 1] += &a_m1;
    let used: BigUint = dist.counts[1..].iter().sum();
    if used > total {
        return Err(Error::ParameterViolation("predicted counts exceed the code size".into()));
    }
    dist.counts[m] += total - used;
    let printed_matches = printed.as_ref().is_none_or(|p| *p == a_m1);
    Ok(ClubCodePrediction {
        length: k * m - n,
        dimension: k,
        min_distance: m - i,
        distribution: dist,
        printed_a_m_minus_1: printed,
        printed_matches,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankBound {
    pub bound: usize,
    pub case: String,
}

/// Upper bound on the rank of an i-club in PG(k-1, q^m).
pub fn club_rank_bound(_q: u64, m: usize, k: usize, i: usize) -> Result<RankBound> {
    if i < 2 || i > m || k < 2 {
        return Err(Error::ParameterViolation(format!("need 2 <= i <= m and k >= 2, got i = {i}, m = {m}, k = {k}")));
    }
    let (bound, case) = if i == m && k == 2 {
        (m + 1, "i=m, k=2")
    } else if 2 * i <= m || (k == 2 && i < m) {
        (m * k / 2, "i<=m/2 or (k=2, i<=m-1)")
    } else {
        (m * (k - 1) / 2 + i, "m/2<=i<=m, k>2")
    };
    Ok(RankBound { bound, case: case.into() })
}

fn q_pow_signed(q: u64, e: i64) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(q));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base, (-e) as usize).recip()
    }
}

fn check_bound_params(m: usize, k: usize, i: usize) -> Result<()> {
    if i < 2 || i > m || k < 2 {
        return Err(Error::ParameterViolation(format!("need 2 <= i <= m and k >= 2, got i = {i}, m = {m}, k = {k}")));
    }
    Ok(())
}

/// q^{km-2n}(q^i-1)(q^{i-1}-1) + (q^{km-2n}-1)(q^{m-1}-1) >= 0, exactly.
pub fn b2_admissibility(q: u64, m: usize, k: usize, i: usize, n: usize) -> Result<bool> {
    check_bound_params(m, k, i)?;
    let t = q_pow_signed(q, (k * m) as i64 - 2 * n as i64);
    let one = BigRational::one();
    let int = |v: BigUint| BigRational::from_integer(BigInt::from(v));
    let lhs = &t * int(pow_big(q, i) - 1u32) * int(pow_big(q, i - 1) - 1u32) + (&t - &one) * int(pow_big(q, m - 1) - 1u32);
    Ok(!lhs.is_negative())
}

/// B_2 of the dual of a club-dual code, as an exact rational.
pub fn b2_value(q: u64, m: usize, k: usize, i: usize, n: usize) -> Result<BigRational> {
    check_bound_params(m, k, i)?;
    let t = q_pow_signed(q, (k * m) as i64 - 2 * n as i64);
    let int = |v: BigUint| BigRational::from_integer(BigInt::from(v));
    let qm2 = int(qbinomial(m as i64, 2, q));
    Ok(t * (int(pow_big(q, m) - 1u32) * int(qbinomial(i as i64, 2, q)) + &qm2) - qm2)
}

/// Two-weight distribution for the code of a maximum (m-1)-club, derived from
/// its hyperplane weights, next to the value the printed corollary attaches to A_m.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxClubCodeCheck {
    pub derived: WeightDistribution,
    pub printed_a_m: BigUint,
    pub label_swap_suspected: bool,
}

pub fn max_club_code_distribution(q: u64, m: usize, k: usize) -> Result<MaxClubCodeCheck> {
    if m < 3 || k < 2 || !(m * (k - 1)).is_multiple_of(2) {
        return Err(Error::ParameterViolation("need m >= 3, k >= 2 and m(k-1) even".into()));
    }
    let scalars = pow_big(q, m) - 1u32;
    let heavy = (pow_big(q, m * (k - 1) / 2 + 1) - 1u32) / BigUint::from(q - 1);
    let a_m1 = &scalars * heavy;
    let mut dist = WeightDistribution::zeros(m);
    dist.counts[0] = BigUint::one();
    dist.counts[m] = pow_big(q, m * k) - 1u32 - &a_m1;
    dist.counts[m - 1] = a_m1.clone();
    let label_swap_suspected = dist.counts[m] != a_m1;
    Ok(MaxClubCodeCheck { derived: dist, printed_a_m: a_m1, label_swap_suspected })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThreeWeightTag {
    DualOfClub { i: usize, verified: bool },
    TwoWeight { weights: Vec<usize> },
    ThreeWeightOther { weights: Vec<usize> },
    General { weights: Vec<usize> },
}

/// Sort a code by its weight profile; the club-dual profile is confirmed by
/// analyzing the trace dual of the code's system.
pub fn three_weight_classify(code: &RankMetricCode, dist: &WeightDistribution, budget: u64) -> Result<ThreeWeightTag> {
    let t = &code.tower;
    let m = t.m() as usize;
    let weights = dist.support();
    match weights.len() {
        2 => return Ok(ThreeWeightTag::TwoWeight { weights }),
        3 => {}
        _ => return Ok(ThreeWeightTag::General { weights }),
    }
    let d = weights[0];
    let scalars = BigUint::from(t.order() - 1);
    let profile = weights[1] == m - 1 && weights[2] == m && dist.get(d) == scalars;
    if !profile {
        return Ok(ThreeWeightTag::ThreeWeightOther { weights });
    }
    let i = m - d;
    let system = code.system()?;
    let dual = linset::dual_perp(&system);
    let opts = linset::AnalyzeOptions { budget, ..Default::default() };
    let report = linset::analyze(&dual, &opts)?;
    let verified =
        matches!(report.classification, Classification::Club { index, .. } if index == i) && dual.rank() == code.k() * m - code.n();
    Ok(ThreeWeightTag::DualOfClub { i, verified })
}
