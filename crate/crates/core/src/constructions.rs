//! Generators for the named clubs, scattered subspaces and three-weight
//! systems, each paired with a self-check against its claimed profile.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, FieldTower};
use crate::linset::{self, AnalyzeOptions, Classification, LinearSetReport, ProjectivePoint, SubspaceJson, SubspaceU, DEFAULT_BUDGET};
use crate::rmcode::{self, RankMetricCode, WeightDistribution, WeightMethod};
use crate::tally::Tally;

/// How to pick the F_q-subspace S of F_{q^m} placed on the head of a club.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SChoice {
    /// Greedy from 1, then trace-zero elements, then everything, in encoding order.
    #[default]
    TraceKernelExtension,
    ExplicitBasis {
        basis: Vec<u32>,
    },
    SeededRandom {
        seed: u64,
    },
}

/// S as a subspace of F_{q^m}^1.
pub fn make_s(tower: &Arc<FieldTower>, choice: &SChoice, i: usize) -> Result<SubspaceU> {
    let m = tower.m() as usize;
    if let SChoice::ExplicitBasis { basis } = choice {
        let vectors = basis.iter().map(|&a| vec![Elem(a)]).collect();
        let s = SubspaceU::new(tower.clone(), 1, vectors)?;
        if s.rank() != i {
            return Err(Error::ParameterViolation(format!("explicit basis has {} elements, expected {i}", s.rank())));
        }
        return Ok(s);
    }
    if i == 0 || i > m {
        return Err(Error::ParameterViolation(format!("dim S = {i} must lie in 1..={m}")));
    }
    let order = tower.order();
    let candidates: Box<dyn Iterator<Item = Elem>> = match choice {
        SChoice::SeededRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Box::new(std::iter::repeat_with(move || Elem(rng.gen_range(1..order) as u32)))
        }
        _ => {
            let kernel = tower.big().elements().filter(|&a| !a.is_zero() && tower.trace(a).is_zero());
            Box::new(std::iter::once(Elem::ONE).chain(kernel).chain(tower.big().elements()))
        }
    };
    let mut chosen: Vec<Vec<Elem>> = Vec::with_capacity(i);
    let mut span = SubspaceU::zero(tower.clone(), 1);
    for a in candidates {
        if span.contains(&[a]) {
            continue;
        }
        chosen.push(vec![a]);
        span = SubspaceU::span(tower.clone(), 1, chosen.clone())?;
        if span.rank() == i {
            break;
        }
    }
    Ok(span)
}

/// Images of the F_q-basis {1, x, ..., x^{m-1}} under an F_q-linear map.
fn image_of(tower: &FieldTower, map: impl Fn(Elem) -> Vec<Elem>) -> Vec<Vec<Elem>> {
    tower.x_powers().iter().map(|&b| map(b)).collect()
}

/// Coordinate vector with `a` at `pos`.
fn at(k: usize, pos: usize, a: Elem) -> Vec<Elem> {
    let mut v = vec![Elem::ZERO; k];
    v[pos] = a;
    v
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// {(x, Tr(x))}: an (m-1)-club of rank m in PG(1, q^m).
pub fn trace_club(tower: &Arc<FieldTower>) -> Result<SubspaceU> {
    if tower.m() < 2 {
        return Err(Error::ParameterViolation("trace club needs m >= 2".into()));
    }
    SubspaceU::new(tower.clone(), 2, image_of(tower, |x| vec![x, tower.trace(x)]))
}

/// {(x, Tr_{q^m/q^{n0}}(x^{q^s}))}: an n0(l-1)-club of rank m, l = m/n0.
pub fn subfield_trace_club(tower: &Arc<FieldTower>, n0: u32, s: u32) -> Result<SubspaceU> {
    let m = tower.m();
    if n0 == 0 || !m.is_multiple_of(n0) {
        return Err(Error::ParameterViolation(format!("n0 = {n0} does not divide m = {m}")));
    }
    if gcd(s, n0) != 1 {
        return Err(Error::ParameterViolation(format!("gcd(s, n0) = gcd({s}, {n0}) is not 1")));
    }
    if n0 * (m / n0 - 1) < 2 {
        return Err(Error::ParameterViolation(format!("club index n0(l-1) = {} is below 2", n0 * (m / n0 - 1))));
    }
    let vectors = image_of(tower, |x| {
        let tx = tower.rel_trace(tower.pow_q(x, s as i64), n0).expect("n0 divides m");
        vec![x, tx]
    });
    SubspaceU::new(tower.clone(), 2, vectors)
}

/// Direct sum of k'/2 copies of {(x, x^q)}: maximum scattered of rank k'm/2.
pub fn builtin_max_scattered(tower: &Arc<FieldTower>, k_prime: usize) -> Result<SubspaceU> {
    if k_prime == 0 || !k_prime.is_multiple_of(2) {
        return Err(Error::UnsupportedShape(format!(
            "no built-in maximum scattered subspace in dimension {k_prime}; supply one explicitly"
        )));
    }
    let mut vectors = Vec::new();
    for block in 0..k_prime / 2 {
        vectors.extend(image_of(tower, |x| {
            let mut v = vec![Elem::ZERO; k_prime];
            v[2 * block] = x;
            v[2 * block + 1] = tower.pow_q(x, 1);
            v
        }));
    }
    SubspaceU::new(tower.clone(), k_prime, vectors)
}

/// Confirm rank k'm/2 and scatteredness of a candidate maximum scattered part.
pub fn check_max_scattered(part: &SubspaceU) -> Result<()> {
    let m = part.tower().m() as usize;
    let k = part.k();
    if !(k * m).is_multiple_of(2) || part.rank() != k * m / 2 {
        return Err(Error::NotMaximumScattered(format!("rank {} is not km/2 for k = {k}, m = {m}", part.rank())));
    }
    let report = linset::analyze_default(part)?;
    if report.classification != Classification::Scattered {
        return Err(Error::NotMaximumScattered(format!("linear set is {}", report.classification)));
    }
    Ok(())
}

fn check_s(tower: &Arc<FieldTower>, s: &SubspaceU) -> Result<()> {
    if s.k() != 1 || **s.tower() != **tower {
        return Err(Error::AmbientMismatch("S must be a subspace of F_{q^m} over the same field".into()));
    }
    Ok(())
}

/// U' ⊕ S·e_{k-1} with U' maximum scattered in the hyperplane X_{k-1} = 0.
pub fn cone(scattered_part: &SubspaceU, s: &SubspaceU) -> Result<SubspaceU> {
    let tower = scattered_part.tower();
    check_s(tower, s)?;
    let m = tower.m() as usize;
    let k = scattered_part.k() + 1;
    if !((k - 1) * m).is_multiple_of(2) {
        return Err(Error::DimensionMismatch(format!("(k-1)m = {} is odd", (k - 1) * m)));
    }
    check_max_scattered(scattered_part)?;
    let head = SubspaceU::span(tower.clone(), k, s.basis().iter().map(|b| at(k, k - 1, b[0])).collect())?;
    scattered_part.embed_at(k, 0)?.sum(&head)
}

/// {(x+ζ, x^q, x^{q^2})} in the first three of k coordinates.
fn lifted_block(tower: &Arc<FieldTower>, k: usize, s: &SubspaceU) -> Vec<Vec<Elem>> {
    let mut vectors = image_of(tower, |x| {
        let mut v = vec![Elem::ZERO; k];
        v[0] = x;
        v[1] = tower.pow_q(x, 1);
        v[2] = tower.pow_q(x, 2);
        v
    });
    vectors.extend(s.basis().iter().map(|b| at(k, 0, b[0])));
    vectors
}

/// {(x_1+ζ, x_1^q, x_1^{q^2}, x_2, x_2^q, ..., x_s, x_s^q)} for k = 2s+1.
pub fn lift_odd(tower: &Arc<FieldTower>, k: usize, s: &SubspaceU) -> Result<SubspaceU> {
    check_s(tower, s)?;
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::ParameterViolation(format!("lifting needs odd k >= 3, got {k}")));
    }
    let mut vectors = lifted_block(tower, k, s);
    for block in 1..(k - 1) / 2 {
        vectors.extend(image_of(tower, |x| {
            let mut v = vec![Elem::ZERO; k];
            v[2 * block + 1] = x;
            v[2 * block + 2] = tower.pow_q(x, 1);
            v
        }));
    }
    SubspaceU::new(tower.clone(), k, vectors)
}

/// The closed form of the trace dual of `lift_odd`:
/// {(z, -y_1^q, -z^{q^2}+y_1^{q^2}, y_2, -y_2^q, ..., y_s, -y_s^q) : z ∈ S^⊥}.
pub fn lift_odd_dual(tower: &Arc<FieldTower>, k: usize, s: &SubspaceU) -> Result<SubspaceU> {
    check_s(tower, s)?;
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::ParameterViolation(format!("lifting needs odd k >= 3, got {k}")));
    }
    let big = tower.big();
    let s_perp = linset::dual_perp(s);
    let mut vectors: Vec<Vec<Elem>> = s_perp
        .basis()
        .iter()
        .map(|b| {
            let z = b[0];
            let mut v = vec![Elem::ZERO; k];
            v[0] = z;
            v[2] = big.neg(tower.pow_q(z, 2));
            v
        })
        .collect();
    vectors.extend(image_of(tower, |y| {
        let mut v = vec![Elem::ZERO; k];
        v[1] = big.neg(tower.pow_q(y, 1));
        v[2] = tower.pow_q(y, 2);
        v
    }));
    for block in 1..(k - 1) / 2 {
        vectors.extend(image_of(tower, |y| {
            let mut v = vec![Elem::ZERO; k];
            v[2 * block + 1] = y;
            v[2 * block + 2] = big.neg(tower.pow_q(y, 1));
            v
        }));
    }
    SubspaceU::new(tower.clone(), k, vectors)
}

/// {(x+ζ, x^q, x^{q^2})} ⊕ U_2, U_2 maximum scattered in X_0 = X_1 = X_2 = 0.
pub fn lift_even(tower: &Arc<FieldTower>, k: usize, s: &SubspaceU, part: Option<&SubspaceU>) -> Result<SubspaceU> {
    check_s(tower, s)?;
    let m = tower.m() as usize;
    if k < 6 || !k.is_multiple_of(2) || !m.is_multiple_of(2) {
        return Err(Error::ParameterViolation(format!("even lifting needs even k >= 6 and even m, got k = {k}, m = {m}")));
    }
    let built;
    let part = match part {
        Some(p) => p,
        None => {
            built = builtin_max_scattered(tower, k - 3)?;
            &built
        }
    };
    if part.k() != k - 3 || **part.tower() != **tower {
        return Err(Error::DimensionMismatch(format!("scattered part must live in F_{{q^m}}^{}", k - 3)));
    }
    check_max_scattered(part)?;
    let first = SubspaceU::new(tower.clone(), k, lifted_block(tower, k, s))?;
    first.sum(&part.embed_at(k, 3)?)
}

/// {(x, Tr_{q^m/q^{m/2}}(x^q), y, y^q)}: an (m/2)-club of rank 2m in PG(3, q^m).
///
/// Without the Frobenius twist the first block is F_{q^{m/2}}-linear and
/// every point on its line has weight m/2.
pub fn half_club_k4(tower: &Arc<FieldTower>) -> Result<SubspaceU> {
    let m = tower.m();
    if m < 4 || !m.is_multiple_of(2) {
        return Err(Error::ParameterViolation(format!("m = {m} must be even and at least 4")));
    }
    let half = |x| tower.rel_trace(tower.pow_q(x, 1), m / 2).expect("m/2 divides m");
    let mut vectors = image_of(tower, |x| vec![x, half(x), Elem::ZERO, Elem::ZERO]);
    vectors.extend(image_of(tower, |y| vec![Elem::ZERO, Elem::ZERO, y, tower.pow_q(y, 1)]));
    SubspaceU::new(tower.clone(), 4, vectors)
}

fn minus_one_pow(tower: &FieldTower, e: u32) -> Elem {
    if e.is_multiple_of(2) {
        Elem::ONE
    } else {
        tower.big().neg(Elem::ONE)
    }
}

fn check_coprime(s: u32, m: u32) -> Result<()> {
    if s == 0 || gcd(s, m) != 1 {
        return Err(Error::ParameterViolation(format!("gcd(s, m) = gcd({s}, {m}) is not 1")));
    }
    Ok(())
}

/// Smallest δ in encoding order with N(δ) != target, or validate a given one.
fn pick_delta(tower: &FieldTower, delta: Option<u32>, forbidden: Elem, label: &str) -> Result<Elem> {
    let ok = |d: Elem| tower.rel_norm(d, 1).expect("1 divides m") != forbidden;
    match delta {
        Some(d) => {
            let d = Elem(d);
            if !tower.big().contains(d) {
                return Err(Error::ParameterViolation(format!("delta = {} is not a field element", d.0)));
            }
            if !ok(d) {
                return Err(Error::ConditionViolated(format!("{label} fails for delta = {}", d.0)));
            }
            Ok(d)
        }
        None => tower.big().elements().find(|&d| ok(d)).ok_or_else(|| Error::ConditionViolated(format!("no delta with {label}"))),
    }
}

/// {(x - δx^{q^{3s}}, x^{q^s}, x^{q^{2s}})}, requires N(δ) != (-1)^m.
pub fn twisted_gabidulin(tower: &Arc<FieldTower>, s: u32, delta: Option<u32>) -> Result<SubspaceU> {
    let m = tower.m();
    check_coprime(s, m)?;
    let big = tower.big();
    let delta = pick_delta(tower, delta, minus_one_pow(tower, m), "N(delta) != (-1)^m")?;
    let si = s as i64;
    let vectors = image_of(tower, |x| {
        let first = big.sub(x, big.mul(delta, tower.pow_q(x, 3 * si)));
        vec![first, tower.pow_q(x, si), tower.pow_q(x, 2 * si)]
    });
    SubspaceU::new(tower.clone(), 3, vectors)
}

/// {(x - δx^{q^{2s}}, x^{q^s}, α) : α ∈ F_q}, requires N(δ) != 1.
pub fn redei_scattered(tower: &Arc<FieldTower>, s: u32, delta: Option<u32>) -> Result<SubspaceU> {
    let m = tower.m();
    check_coprime(s, m)?;
    let big = tower.big();
    let delta = pick_delta(tower, delta, Elem::ONE, "N(delta) != 1")?;
    let si = s as i64;
    let mut vectors = image_of(tower, |x| {
        let first = big.sub(x, big.mul(delta, tower.pow_q(x, 2 * si)));
        vec![first, tower.pow_q(x, si), Elem::ZERO]
    });
    vectors.push(vec![Elem::ZERO, Elem::ZERO, Elem::ONE]);
    SubspaceU::new(tower.clone(), 3, vectors)
}

/// Direct sum of k/3 copies of {(x, x^q, x^{q^2})}.
pub fn pseudoregulus_lines(tower: &Arc<FieldTower>, k: usize) -> Result<SubspaceU> {
    if k == 0 || !k.is_multiple_of(3) {
        return Err(Error::ParameterViolation(format!("k = {k} is not a positive multiple of 3")));
    }
    let mut vectors = Vec::new();
    for block in 0..k / 3 {
        vectors.extend(image_of(tower, |x| {
            let mut v = vec![Elem::ZERO; k];
            v[3 * block] = x;
            v[3 * block + 1] = tower.pow_q(x, 1);
            v[3 * block + 2] = tower.pow_q(x, 2);
            v
        }));
    }
    SubspaceU::new(tower.clone(), k, vectors)
}

/// Parameters (ξ, μ_1..μ_k) of the complementary-weights family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplementaryParams {
    pub xi: u32,
    pub mu: Vec<u32>,
}

struct NormConditions<'a> {
    tower: &'a FieldTower,
    t: u32,
    xi_norm: Elem,
    sign: Elem,
}

impl NormConditions<'_> {
    fn norm(&self, a: Elem) -> Elem {
        self.tower.norm_between(a, self.t, 1).expect("t divides m")
    }

    /// Name of the first failing condition between μ_i and μ_j, if any.
    fn pair_failure(&self, a: Elem, b: Elem) -> Option<&'static str> {
        if self.norm(a) == self.norm(b) {
            return Some("N(mu_i) != N(mu_j)");
        }
        let big = self.tower.big();
        let prod = big.neg(big.mul(self.xi_norm, big.mul(a, b)));
        (self.norm(prod) == self.sign).then_some("N(-xi^(q^t+1) mu_i mu_j) != (-1)^t")
    }
}

fn extend_mus(cond: &NormConditions, pool: &[Elem], chosen: &mut Vec<Elem>, k: usize) -> bool {
    if chosen.len() == k {
        return true;
    }
    let floor = chosen.last().copied();
    for &c in pool {
        if floor.is_some_and(|f| c <= f) {
            continue;
        }
        if chosen.iter().all(|&a| cond.pair_failure(a, c).is_none()) {
            chosen.push(c);
            if extend_mus(cond, pool, chosen, k) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Validate explicit (ξ, μ) or find the smallest admissible ones.
pub fn complementary_params(tower: &Arc<FieldTower>, k: usize, xi: Option<u32>, mu: Option<&[u32]>) -> Result<ComplementaryParams> {
    let m = tower.m();
    let q = tower.q();
    if !m.is_multiple_of(2) || m < 4 {
        return Err(Error::ParameterViolation(format!("m = {m} must be even and at least 4")));
    }
    if k < 2 || q < k as u64 + 1 {
        return Err(Error::ParameterViolation(format!("need k >= 2 and q >= k+1, got q = {q}, k = {k}")));
    }
    let t = m / 2;
    let big = tower.big();
    let sub: BTreeSet<Elem> = tower.subfield_elements(t)?.into_iter().collect();
    let pool: Vec<Elem> = sub.iter().copied().filter(|a| !a.is_zero()).collect();
    let xis: Vec<Elem> = match xi {
        Some(x) => {
            let x = Elem(x);
            if !big.contains(x) || sub.contains(&x) {
                return Err(Error::ConditionViolated(format!("xi = {} must lie in F_(q^m) minus F_(q^t)", x.0)));
            }
            vec![x]
        }
        None => big.elements().filter(|a| !sub.contains(a)).collect(),
    };
    let sign = minus_one_pow(tower, t);
    for &x in &xis {
        let cond = NormConditions { tower, t, xi_norm: big.mul(x, tower.pow_q(x, t as i64)), sign };
        match mu {
            Some(given) => {
                if given.len() != k {
                    return Err(Error::ParameterViolation(format!("{} values of mu given, expected {k}", given.len())));
                }
                let given: Vec<Elem> = given.iter().map(|&a| Elem(a)).collect();
                if let Some(bad) = given.iter().find(|a| a.is_zero() || !sub.contains(a)) {
                    return Err(Error::ConditionViolated(format!("mu = {} is not in F_(q^t)^*", bad.0)));
                }
                for (a_idx, &a) in given.iter().enumerate() {
                    for &b in &given[a_idx + 1..] {
                        if let Some(what) = cond.pair_failure(a, b) {
                            return Err(Error::ConditionViolated(format!("{what} fails for mu = {}, {}", a.0, b.0)));
                        }
                    }
                }
                return Ok(ComplementaryParams { xi: x.0, mu: given.iter().map(|a| a.0).collect() });
            }
            None => {
                let mut chosen = Vec::with_capacity(k);
                if extend_mus(&cond, &pool, &mut chosen, k) {
                    return Ok(ComplementaryParams { xi: x.0, mu: chosen.iter().map(|a| a.0).collect() });
                }
            }
        }
    }
    Err(Error::ConditionViolated("no xi, mu satisfy the norm conditions".into()))
}

/// {(u_1 + ξμ_1u_1^q, ..., u_k + ξμ_ku_k^q) : u_j ∈ F_{q^t}}, m = 2t.
pub fn complementary_weights(tower: &Arc<FieldTower>, k: usize, params: &ComplementaryParams) -> Result<SubspaceU> {
    let big = tower.big();
    let t = tower.m() / 2;
    let xi = Elem(params.xi);
    let sub = tower.subfield_elements(t)?;
    let mut vectors = Vec::new();
    for (j, &mu) in params.mu.iter().enumerate() {
        let coeff = big.mul(xi, Elem(mu));
        for &u in &sub {
            vectors.push(at(k, j, big.add(u, big.mul(coeff, tower.pow_q(u, 1)))));
        }
    }
    SubspaceU::span(tower.clone(), k, vectors)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionName {
    TraceClub,
    SubfieldTraceClub,
    Cone,
    LiftOdd,
    LiftEven,
    HalfClubK4,
    PseudoregulusLines,
    TwistedGabidulin,
    RedeiScattered,
    ComplementaryWeights,
}

impl ConstructionName {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstructionName::TraceClub => "trace-club",
            ConstructionName::SubfieldTraceClub => "subfield-trace-club",
            ConstructionName::Cone => "cone",
            ConstructionName::LiftOdd => "lift-odd",
            ConstructionName::LiftEven => "lift-even",
            ConstructionName::HalfClubK4 => "half-club-k4",
            ConstructionName::PseudoregulusLines => "pseudoregulus-lines",
            ConstructionName::TwistedGabidulin => "twisted-gabidulin",
            ConstructionName::RedeiScattered => "redei-scattered",
            ConstructionName::ComplementaryWeights => "complementary-weights",
        }
    }
}

impl std::fmt::Display for ConstructionName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn one() -> u32 {
    1
}

/// A named construction with its parameters; unused parameters must be absent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionSpec {
    pub name: ConstructionName,
    pub p: u32,
    #[serde(default = "one")]
    pub e: u32,
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_choice: Option<SChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scattered_part: Option<SubspaceJson>,
}

impl ConstructionSpec {
    pub fn new(name: ConstructionName, p: u32, e: u32, m: u32) -> Self {
        ConstructionSpec {
            name,
            p,
            e,
            m,
            k: None,
            i: None,
            s: None,
            n0: None,
            delta: None,
            xi: None,
            mu: None,
            s_choice: None,
            scattered_part: None,
        }
    }
}

/// One claimed property against its measured value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub claimed: String,
    pub measured: String,
    pub holds: bool,
}

impl Check {
    fn new(name: &str, claimed: impl ToString, measured: impl ToString, holds: bool) -> Self {
        Check { name: name.into(), claimed: claimed.to_string(), measured: measured.to_string(), holds }
    }

    fn equal<T: PartialEq + std::fmt::Display>(name: &str, claimed: T, measured: T) -> Self {
        let holds = claimed == measured;
        Check::new(name, claimed, measured, holds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub construction: ConstructionName,
    pub analysis: LinearSetReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_distribution: Option<WeightDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<ComplementaryParams>,
    pub checks: Vec<Check>,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub subspace: SubspaceU,
    pub report: ConstructionReport,
}

fn show_set(ws: &BTreeSet<usize>) -> String {
    let parts: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn require<T>(v: Option<T>, what: &str, name: ConstructionName) -> Result<T> {
    v.ok_or_else(|| Error::ParameterViolation(format!("{name} needs parameter {what}")))
}

/// Builds up the checks for one construction.
struct Checker {
    rank: usize,
    analysis: LinearSetReport,
    checks: Vec<Check>,
}

impl Checker {
    fn new(u: &SubspaceU, with_hyperplanes: bool) -> Result<Self> {
        let analysis = linset::analyze(u, &AnalyzeOptions { with_hyperplanes, ..Default::default() })?;
        let q = u.tower().q();
        let identities = linset::verify_weight_identities(&analysis, q, u.rank());
        let checks = vec![Check::new("weight identities", "hold", identities.diagnostic.as_deref().unwrap_or("hold"), identities.holds)];
        Ok(Checker { rank: u.rank(), analysis, checks })
    }

    fn rank(&mut self, claimed: usize) {
        self.checks.push(Check::equal("rank", claimed, self.rank));
    }

    fn profile(&mut self, claimed: Classification) {
        let holds = claimed == self.analysis.classification;
        let describe = |c: &Classification| match c {
            Classification::Club { index, head } => format!("Club({index}) at {:?}", head.rep().iter().map(|a| a.0).collect::<Vec<_>>()),
            other => other.to_string(),
        };
        self.checks.push(Check::new("classification", describe(&claimed), describe(&self.analysis.classification), holds));
    }

    fn club(&mut self, index: usize, head: ProjectivePoint) {
        self.profile(if index >= 2 { Classification::Club { index, head } } else { Classification::Scattered });
    }

    fn spectrum(&self) -> &Tally {
        self.analysis.hyperplane_spectrum.as_ref().expect("spectrum requested")
    }

    fn spectrum_within(&mut self, allowed: BTreeSet<usize>) {
        let measured: BTreeSet<usize> = self.spectrum().weights().into_iter().collect();
        let holds = measured.is_subset(&allowed);
        self.checks.push(Check::new("hyperplane weights within", show_set(&allowed), show_set(&measured), holds));
    }

    fn spectrum_contains(&mut self, w: usize) {
        let c = self.spectrum().count(w);
        self.checks.push(Check::new(&format!("hyperplanes of weight {w}"), ">= 1", c, c >= 1));
    }

    fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    fn finish(
        self,
        name: ConstructionName,
        code_distribution: Option<WeightDistribution>,
        parameters: Option<ComplementaryParams>,
    ) -> ConstructionReport {
        let holds = self.checks.iter().all(|c| c.holds);
        ConstructionReport { construction: name, analysis: self.analysis, code_distribution, parameters, checks: self.checks, holds }
    }
}

/// Weight distribution of the code attached to `system`, and a check that
/// its nonzero weights are exactly `expected`.
fn code_check(system: &SubspaceU, expected: BTreeSet<usize>) -> Result<(WeightDistribution, Check)> {
    let code = RankMetricCode::from_system(system)?;
    let dist = rmcode::weight_distribution(&code, WeightMethod::Geometric, DEFAULT_BUDGET, true)?;
    let measured: BTreeSet<usize> = dist.support().into_iter().filter(|&w| w > 0).collect();
    let holds = measured == expected;
    Ok((dist, Check::new("code weights", show_set(&expected), show_set(&measured), holds)))
}

fn range(lo: usize, hi: usize) -> BTreeSet<usize> {
    (lo..=hi).collect()
}

/// Build a construction and run its self-check battery.
pub fn build(spec: &ConstructionSpec) -> Result<Construction> {
    let tower = Arc::new(FieldTower::new(spec.p, spec.e, spec.m, crate::field::DEFAULT_ORDER_CAP)?);
    let name = spec.name;
    let m = spec.m as usize;
    let choice = spec.s_choice.clone().unwrap_or_default();
    let part = match &spec.scattered_part {
        Some(json) => Some(SubspaceU::from_json(json, Some(tower.clone()))?),
        None => None,
    };
    let e0 = |k| ProjectivePoint::unit(k, 0);
    let (u, report) = match name {
        ConstructionName::TraceClub => {
            let u = trace_club(&tower)?;
            let mut c = Checker::new(&u, false)?;
            c.rank(m);
            c.club(m - 1, e0(2));
            let size = tower.q().pow(m as u32 - 1) + 1;
            c.push(Check::equal("size", size, c.analysis.size));
            (u, c.finish(name, None, None))
        }
        ConstructionName::SubfieldTraceClub => {
            let n0 = require(spec.n0, "n0", name)?;
            let u = subfield_trace_club(&tower, n0, spec.s.unwrap_or(1))?;
            let mut c = Checker::new(&u, false)?;
            c.rank(m);
            c.club(m - n0 as usize, e0(2));
            (u, c.finish(name, None, None))
        }
        ConstructionName::Cone => {
            let k = require(spec.k, "k", name)?;
            let i = require(spec.i, "i", name)?;
            if k < 2 {
                return Err(Error::ParameterViolation(format!("cone needs k >= 2, got {k}")));
            }
            let part = match part {
                Some(p) => p,
                None => builtin_max_scattered(&tower, k - 1)?,
            };
            let s = make_s(&tower, &choice, i)?;
            let u = cone(&part, &s)?;
            let mut c = Checker::new(&u, true)?;
            let top = m * (k - 1) / 2;
            c.rank(top + i);
            c.club(i, ProjectivePoint::unit(k, k - 1));
            let mut allowed = if 2 * i >= m {
                range(m * (k - 2) / 2, m * (k - 2) / 2 + i + 1)
            } else {
                let base = m * (k - 3) / 2 + i;
                range(base, base + 1)
            };
            allowed.insert(top);
            c.spectrum_within(allowed);
            c.spectrum_contains(top);
            (u, c.finish(name, None, None))
        }
        ConstructionName::LiftOdd | ConstructionName::LiftEven => {
            let k = require(spec.k, "k", name)?;
            let i = require(spec.i, "i", name)?;
            let s = make_s(&tower, &choice, i)?;
            let u = if name == ConstructionName::LiftOdd { lift_odd(&tower, k, &s)? } else { lift_even(&tower, k, &s, part.as_ref())? };
            let mut c = Checker::new(&u, true)?;
            c.rank(m * (k - 1) / 2 + i);
            c.club(i, e0(k));
            c.push(Check::equal("spans the whole space", true, linset::spans_full_space(&u)));
            let base = m * (k - 3) / 2 + i;
            c.spectrum_within(range(base, base + 2));
            if name == ConstructionName::LiftOdd {
                let claimed = lift_odd_dual(&tower, k, &s)?;
                let actual = linset::dual_perp(&u);
                c.push(Check::new(
                    "closed-form dual",
                    format!("contained, dim {}", actual.rank()),
                    format!("contained: {}, dim {}", claimed.is_subspace_of(&actual), claimed.rank()),
                    claimed.is_subspace_of(&actual) && claimed.rank() == actual.rank(),
                ));
            }
            (u, c.finish(name, None, None))
        }
        ConstructionName::HalfClubK4 => {
            let u = half_club_k4(&tower)?;
            let mut c = Checker::new(&u, false)?;
            c.rank(2 * m);
            c.club(m / 2, e0(4));
            let line = [at(4, 0, Elem::ONE), at(4, 1, Elem::ONE)];
            c.push(Check::equal("weight of X_2 = X_3 = 0", m, linset::subspace_weight(&u, &line)?));
            (u, c.finish(name, None, None))
        }
        ConstructionName::PseudoregulusLines => {
            let k = require(spec.k, "k", name)?;
            let u = pseudoregulus_lines(&tower, k)?;
            let mut c = Checker::new(&u, true)?;
            c.rank(k * m / 3);
            c.profile(Classification::Scattered);
            let top = k * m / 3;
            c.spectrum_within(range(top - m, top - m + 2));
            let (dist, check) = code_check(&u, range(m - 2, m))?;
            c.push(check);
            (u, c.finish(name, Some(dist), None))
        }
        ConstructionName::TwistedGabidulin | ConstructionName::RedeiScattered => {
            let s = spec.s.unwrap_or(1);
            let twisted = name == ConstructionName::TwistedGabidulin;
            let u = if twisted { twisted_gabidulin(&tower, s, spec.delta)? } else { redei_scattered(&tower, s, spec.delta)? };
            let mut c = Checker::new(&u, true)?;
            let n = if twisted { m } else { m + 1 };
            c.rank(n);
            c.profile(Classification::Scattered);
            let expected = if twisted {
                c.spectrum_within(range(0, 2));
                range(m - 2, m)
            } else {
                c.spectrum_within([1, 2, m].into_iter().collect());
                [1, m - 1, m].into_iter().collect()
            };
            let (dist, check) = code_check(&u, expected)?;
            c.push(check);
            (u, c.finish(name, Some(dist), None))
        }
        ConstructionName::ComplementaryWeights => {
            let k = require(spec.k, "k", name)?;
            let params = complementary_params(&tower, k, spec.xi, spec.mu.as_deref())?;
            let u = complementary_weights(&tower, k, &params)?;
            let mut c = Checker::new(&u, false)?;
            let half = m / 2;
            c.rank(k * half);
            let heavy = c.analysis.census.count(half);
            let others_light = c.analysis.census.keys().all(|&w| w <= 1 || w == half);
            c.push(Check::new(
                &format!("points of weight {half}"),
                format!("{k}, all others <= 1"),
                heavy,
                heavy == k as u64 && others_light,
            ));
            let dual = linset::dual_perp(&u);
            let (dist, check) = code_check(&dual, [m - half, m - 1, m].into_iter().collect())?;
            c.push(check);
            (u, c.finish(name, Some(dist), Some(params)))
        }
    };
    Ok(Construction { subspace: u, report })
}
