//! Prime-power fields GF(p^d) and the tower F_q ⊂ F_{q^m}.
//!
//! An element is stored as the integer whose base-p digits are the
//! coefficients of its residue polynomial, lowest degree first.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fields up to this order get log/exp tables.
pub const TABLE_LIMIT: u64 = 1 << 20;
/// Default ceiling on the order of any field the library will build.
pub const DEFAULT_ORDER_CAP: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense polynomials over F_p, coefficients low to high, trailing zeros trimmed.
mod poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn inv_mod_p(a: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = a as u64 % p as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let mut out: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
        trim(&mut out);
        out
    }

    /// Remainder modulo a monic `f`.
    pub fn rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        let d = f.len() - 1;
        let mut r = a.to_vec();
        trim(&mut r);
        while r.len() > d {
            let lead = *r.last().unwrap();
            let shift = r.len() - 1 - d;
            if lead != 0 {
                for (j, &c) in f.iter().enumerate() {
                    let sub = (lead as u64 * c as u64 % p as u64) as u32;
                    r[shift + j] = (r[shift + j] + p - sub) % p;
                }
            }
            trim(&mut r);
        }
        r
    }

    /// Remainder modulo any nonzero `g`.
    fn rem_general(a: &[u32], g: &[u32], p: u32) -> Vec<u32> {
        let lead_inv = inv_mod_p(*g.last().unwrap(), p);
        let monic: Vec<u32> = g.iter().map(|&c| (c as u64 * lead_inv as u64 % p as u64) as u32).collect();
        rem(a, &monic, p)
    }

    pub fn mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        rem(&mul(a, b, p), f, p)
    }

    pub fn powmod(base: &[u32], mut e: u64, f: &[u32], p: u32) -> Vec<u32> {
        let mut result = vec![1u32];
        let mut b = rem(base, f, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mulmod(&result, &b, f, p);
            }
            b = mulmod(&b, &b, f, p);
            e >>= 1;
        }
        result
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut out: Vec<u32> = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut out);
        out
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem_general(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    /// Rabin's test for a monic polynomial.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let d = f.len().saturating_sub(1);
        if d == 0 {
            return false;
        }
        if d == 1 {
            return true;
        }
        let x = vec![0u32, 1];
        // frob[j] = x^(p^j) mod f
        let mut frob = vec![rem(&x, f, p)];
        for j in 1..=d {
            let next = powmod(&frob[j - 1], p as u64, f, p);
            frob.push(next);
        }
        if frob[d] != rem(&x, f, p) {
            return false;
        }
        for r in super::prime_factors(d as u64) {
            let h = sub(&frob[d / r as usize], &x, p);
            let g = gcd(f, &h, p);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }
}

#[derive(Clone)]
enum Arith {
    Tables { exp: Vec<u32>, log: Vec<u32> },
    Poly,
}

/// The field GF(p^d) for a fixed monic irreducible modulus.
#[derive(Clone)]
pub struct Field {
    p: u32,
    degree: u32,
    order: u32,
    modulus: Vec<u32>,
    generator: Elem,
    arith: Arith,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field").field("p", &self.p).field("degree", &self.degree).field("modulus", &self.modulus).finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for Field {}

fn checked_order(p: u32, degree: u32, cap: u64) -> Result<u32> {
    let mut order: u128 = 1;
    for _ in 0..degree {
        order *= p as u128;
        if order > u32::MAX as u128 {
            break;
        }
    }
    if order > cap as u128 || order > u32::MAX as u128 {
        return Err(Error::SizeBudgetExceeded {
            what: format!("GF({p}^{degree})"),
            needed: if order > u32::MAX as u128 { format!(">{}", u32::MAX) } else { order.to_string() },
            cap,
        });
    }
    Ok(order as u32)
}

/// Smallest monic irreducible of the given degree, ordered by integer encoding.
pub fn smallest_irreducible(p: u32, degree: u32) -> Vec<u32> {
    let count = (p as u64).pow(degree);
    for low in 0..count {
        let mut coeffs = Vec::with_capacity(degree as usize + 1);
        let mut t = low;
        for _ in 0..degree {
            coeffs.push((t % p as u64) as u32);
            t /= p as u64;
        }
        if degree > 1 && coeffs[0] == 0 {
            continue;
        }
        coeffs.push(1);
        if poly::is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Field {
    pub fn new(p: u32, degree: u32) -> Result<Self> {
        Self::with_cap(p, degree, DEFAULT_ORDER_CAP)
    }

    pub fn with_cap(p: u32, degree: u32, cap: u64) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if degree == 0 {
            return Err(Error::ParameterViolation("field degree must be at least 1".into()));
        }
        checked_order(p, degree, cap)?;
        let modulus = smallest_irreducible(p, degree);
        Self::build(p, modulus, cap)
    }

    /// Build from an explicit modulus (coefficients low to high, monic).
    pub fn with_modulus(p: u32, modulus: Vec<u32>, cap: u64) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if modulus.len() < 2 {
            return Err(Error::InvalidModulus("degree must be at least 1".into()));
        }
        if modulus.last() != Some(&1) {
            return Err(Error::InvalidModulus("modulus must be monic".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidModulus(format!("coefficient out of range for p = {p}")));
        }
        if !poly::is_irreducible(&modulus, p) {
            return Err(Error::InvalidModulus(format!("{modulus:?} is reducible over F_{p}")));
        }
        checked_order(p, modulus.len() as u32 - 1, cap)?;
        Self::build(p, modulus, cap)
    }

    fn build(p: u32, modulus: Vec<u32>, cap: u64) -> Result<Self> {
        let degree = modulus.len() as u32 - 1;
        let order = checked_order(p, degree, cap)?;
        let mut field = Field { p, degree, order, modulus, generator: Elem::ONE, arith: Arith::Poly };
        field.generator = field.find_generator();
        if (order as u64) <= TABLE_LIMIT {
            let n = order as usize - 1;
            let mut exp = vec![0u32; 2 * n.max(1)];
            let mut log = vec![0u32; order as usize];
            let mut cur = Elem::ONE;
            for (i, slot) in exp.iter_mut().take(n).enumerate() {
                *slot = cur.0;
                log[cur.0 as usize] = i as u32;
                cur = field.mul_poly(cur, field.generator);
            }
            for i in n..2 * n {
                exp[i] = exp[i - n];
            }
            if n == 1 {
                exp[1] = 1;
            }
            field.arith = Arith::Tables { exp, log };
        }
        Ok(field)
    }

    /// Smallest encoding that generates the multiplicative group.
    fn find_generator(&self) -> Elem {
        let n = self.order as u64 - 1;
        if n == 1 {
            return Elem::ONE;
        }
        let factors = prime_factors(n);
        (1..self.order)
            .map(Elem)
            .find(|&g| factors.iter().all(|&r| self.pow_poly(g, n / r) != Elem::ONE))
            .expect("multiplicative group is cyclic")
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Fixed primitive element (smallest encoding of a generator).
    pub fn generator(&self) -> Elem {
        self.generator
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.order).map(Elem)
    }

    pub fn contains(&self, a: Elem) -> bool {
        a.0 < self.order
    }

    pub fn digits(&self, a: Elem) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.degree as usize);
        let mut t = a.0;
        for _ in 0..self.degree {
            out.push(t % self.p);
            t /= self.p;
        }
        out
    }

    pub fn from_digits(&self, digits: &[u32]) -> Elem {
        let mut v = 0u32;
        for &d in digits.iter().rev() {
            v = v * self.p + d;
        }
        Elem(v)
    }

    fn to_poly(&self, a: Elem) -> Vec<u32> {
        let mut d = self.digits(a);
        poly::trim(&mut d);
        d
    }

    fn mul_poly(&self, a: Elem, b: Elem) -> Elem {
        let r = poly::mulmod(&self.to_poly(a), &self.to_poly(b), &self.modulus, self.p);
        self.from_digits(&r)
    }

    fn pow_poly(&self, a: Elem, e: u64) -> Elem {
        let r = poly::powmod(&self.to_poly(a), e, &self.modulus, self.p);
        self.from_digits(&r)
    }

    /// Residue class of an arbitrary polynomial (coefficients low to high).
    pub fn reduce_poly(&self, coeffs: &[u32]) -> Elem {
        let c: Vec<u32> = coeffs.iter().map(|&c| c % self.p).collect();
        self.from_digits(&poly::rem(&c, &self.modulus, self.p))
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return Elem(a.0 ^ b.0);
        }
        if self.degree == 1 {
            let s = a.0 + b.0;
            return Elem(if s >= self.p { s - self.p } else { s });
        }
        let (mut x, mut y) = (a.0, b.0);
        let (mut out, mut place) = (0u32, 1u32);
        while x > 0 || y > 0 {
            let d = (x % self.p + y % self.p) % self.p;
            out += d * place;
            place = place.wrapping_mul(self.p);
            x /= self.p;
            y /= self.p;
        }
        Elem(out)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if self.p == 2 {
            return a;
        }
        if self.degree == 1 {
            return Elem(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        let mut x = a.0;
        let (mut out, mut place) = (0u32, 1u32);
        while x > 0 {
            let d = (self.p - x % self.p) % self.p;
            out += d * place;
            place = place.wrapping_mul(self.p);
            x /= self.p;
        }
        Elem(out)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        match &self.arith {
            Arith::Tables { exp, log } => Elem(exp[(log[a.0 as usize] + log[b.0 as usize]) as usize]),
            Arith::Poly => self.mul_poly(a, b),
        }
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        match &self.arith {
            Arith::Tables { exp, log } => {
                let n = self.order - 1;
                Ok(Elem(exp[((n - log[a.0 as usize]) % n) as usize]))
            }
            Arith::Poly => Ok(self.pow_poly(a, self.order as u64 - 2)),
        }
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.0 == 0 {
            return Elem::ZERO;
        }
        match &self.arith {
            Arith::Tables { exp, log } => {
                let n = self.order as u64 - 1;
                let idx = (log[a.0 as usize] as u64 * (e % n)) % n;
                Elem(exp[idx as usize])
            }
            Arith::Poly => self.pow_poly(a, e),
        }
    }

    /// Multiply by a small integer (an element of the prime field).
    pub fn scale_int(&self, a: Elem, c: u32) -> Elem {
        self.mul(a, Elem(c % self.p))
    }

    /// a^p
    pub fn frobenius(&self, a: Elem) -> Elem {
        self.pow(a, self.p as u64)
    }
}

/// JSON shape of a tower: `{"p":2,"e":1,"m":4,"modulus":[1,1,0,0,1]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    pub e: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
}

/// F_q = GF(p^e) sitting inside F_{q^m} = GF(p^{em}).
#[derive(Clone, Debug)]
pub struct FieldTower {
    big: Field,
    small: Field,
    e: u32,
    m: u32,
    q: u64,
    embed: Vec<Elem>,
    unembed: HashMap<Elem, Elem>,
    x_powers: Vec<Elem>,
    // Inverse of the F_p change of basis from {root^a x^j} to the digit basis (e > 1 only).
    coord_inverse: Option<Vec<Vec<u32>>>,
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        self.big == other.big && self.small == other.small && self.m == other.m
    }
}

impl Eq for FieldTower {}

pub fn make_tower(p: u32, e: u32, m: u32) -> Result<FieldTower> {
    FieldTower::new(p, e, m, DEFAULT_ORDER_CAP)
}

impl FieldTower {
    pub fn new(p: u32, e: u32, m: u32, cap: u64) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if e == 0 || m == 0 {
            return Err(Error::ParameterViolation("e and m must be positive".into()));
        }
        let degree = e.checked_mul(m).ok_or_else(|| Error::ParameterViolation("e*m overflows".into()))?;
        let big = Field::with_cap(p, degree, cap)?;
        let small = Field::with_cap(p, e, cap)?;
        Self::assemble(big, small, e, m)
    }

    pub fn with_modulus(p: u32, e: u32, m: u32, modulus: Vec<u32>, cap: u64) -> Result<Self> {
        if e == 0 || m == 0 {
            return Err(Error::ParameterViolation("e and m must be positive".into()));
        }
        if modulus.len() as u64 != e as u64 * m as u64 + 1 {
            return Err(Error::InvalidModulus(format!("degree {} but e*m = {}", modulus.len().saturating_sub(1), e * m)));
        }
        let big = Field::with_modulus(p, modulus, cap)?;
        let small = Field::with_cap(p, e, cap)?;
        Self::assemble(big, small, e, m)
    }

    pub fn from_descriptor(desc: &FieldDescriptor) -> Result<Self> {
        Self::with_modulus(desc.p, desc.e, desc.m, desc.modulus.clone(), DEFAULT_ORDER_CAP)
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor { p: self.big.p, e: self.e, m: self.m, modulus: self.big.modulus.clone() }
    }

    fn assemble(big: Field, small: Field, e: u32, m: u32) -> Result<Self> {
        let q = small.order() as u64;
        let x_powers: Vec<Elem> = (0..m)
            .map(|j| {
                let mut c = vec![0u32; j as usize + 1];
                c[j as usize] = 1;
                big.reduce_poly(&c)
            })
            .collect();
        let mut tower = FieldTower { big, small, e, m, q, embed: Vec::new(), unembed: HashMap::new(), x_powers, coord_inverse: None };
        let sub = tower.subfield_elements(1)?;
        if sub.len() as u64 != q {
            return Err(Error::BasisExpansionFailure("subfield F_q has the wrong size".into()));
        }
        // Embed the standalone GF(p^e) through the smallest root of its modulus.
        let small_mod = tower.small.modulus.clone();
        let root = sub
            .iter()
            .copied()
            .find(|&a| tower.eval_in_big(&small_mod, a).is_zero())
            .ok_or_else(|| Error::BasisExpansionFailure("no root of the subfield modulus".into()))?;
        let root_powers: Vec<Elem> = (0..e).map(|a| tower.big.pow(root, a as u64)).collect();
        let embed: Vec<Elem> = tower
            .small
            .elements()
            .map(|c| {
                let digits = tower.small.digits(c);
                let mut acc = Elem::ZERO;
                for (a, &d) in digits.iter().enumerate() {
                    acc = tower.big.add(acc, tower.big.scale_int(root_powers[a], d));
                }
                acc
            })
            .collect();
        tower.unembed = embed.iter().enumerate().map(|(c, &b)| (b, Elem(c as u32))).collect();
        if tower.unembed.len() as u64 != q {
            return Err(Error::BasisExpansionFailure("embedding of F_q is not injective".into()));
        }
        tower.embed = embed;
        if e > 1 {
            let n = (e * m) as usize;
            let p = tower.big.p;
            let mut rows = Vec::with_capacity(n);
            for j in 0..m as usize {
                for &r in root_powers.iter().take(e as usize) {
                    rows.push(tower.big.digits(tower.big.mul(r, tower.x_powers[j])));
                }
            }
            let inv = invert_mod_p(rows, p).ok_or_else(|| Error::BasisExpansionFailure("power basis is not an F_q-basis".into()))?;
            debug_assert_eq!(inv.len(), n);
            tower.coord_inverse = Some(inv);
        }
        Ok(tower)
    }

    fn eval_in_big(&self, coeffs: &[u32], a: Elem) -> Elem {
        let mut acc = Elem::ZERO;
        for &c in coeffs.iter().rev() {
            acc = self.big.add(self.big.mul(acc, a), Elem(c));
        }
        acc
    }

    /// GF(q^m)
    pub fn big(&self) -> &Field {
        &self.big
    }

    /// Standalone GF(q), used for F_q-linear algebra.
    pub fn small(&self) -> &Field {
        &self.small
    }

    pub fn p(&self) -> u32 {
        self.big.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Order of the big field, q^m.
    pub fn order(&self) -> u64 {
        self.big.order as u64
    }

    /// Residue class of the polynomial variable.
    pub fn x(&self) -> Elem {
        if self.m >= 2 {
            self.x_powers[1]
        } else {
            self.big.reduce_poly(&[0, 1])
        }
    }

    /// x^j for j < m.
    pub fn x_powers(&self) -> &[Elem] {
        &self.x_powers
    }

    pub fn embed(&self, c: Elem) -> Elem {
        self.embed[c.0 as usize]
    }

    /// Inverse of `embed` on the subfield F_q.
    pub fn unembed(&self, a: Elem) -> Option<Elem> {
        if self.e == 1 {
            return (a.0 < self.big.p).then_some(a);
        }
        self.unembed.get(&a).copied()
    }

    /// a^{q^j}, with j reduced modulo m.
    pub fn pow_q(&self, a: Elem, j: i64) -> Elem {
        let jj = j.rem_euclid(self.m as i64) as u32;
        let mut r = a;
        for _ in 0..jj {
            r = self.big.pow(r, self.q);
        }
        r
    }

    fn check_divisor(&self, l: u32) -> Result<()> {
        if l == 0 || !self.m.is_multiple_of(l) {
            return Err(Error::NotADivisor { l, m: self.m });
        }
        Ok(())
    }

    /// Trace from F_{q^m} down to F_{q^l}.
    pub fn rel_trace(&self, a: Elem, l: u32) -> Result<Elem> {
        self.check_divisor(l)?;
        let mut acc = Elem::ZERO;
        let mut cur = a;
        for _ in 0..self.m / l {
            acc = self.big.add(acc, cur);
            cur = self.pow_q(cur, l as i64);
        }
        Ok(acc)
    }

    /// Norm from F_{q^m} down to F_{q^l}.
    pub fn rel_norm(&self, a: Elem, l: u32) -> Result<Elem> {
        self.norm_between(a, self.m, l)
    }

    /// Norm from F_{q^t} down to F_{q^l} of an element of F_{q^t}.
    pub fn norm_between(&self, a: Elem, t: u32, l: u32) -> Result<Elem> {
        self.check_divisor(t)?;
        if l == 0 || !t.is_multiple_of(l) {
            return Err(Error::NotADivisor { l, m: t });
        }
        let mut acc = Elem::ONE;
        let mut cur = a;
        for _ in 0..t / l {
            acc = self.big.mul(acc, cur);
            cur = self.pow_q(cur, l as i64);
        }
        Ok(acc)
    }

    /// Absolute trace to F_q.
    pub fn trace(&self, a: Elem) -> Elem {
        self.rel_trace(a, 1).expect("1 divides m")
    }

    /// Trace to F_q, expressed in the standalone GF(q).
    pub fn trace_small(&self, a: Elem) -> Elem {
        self.unembed(self.trace(a)).expect("trace lands in F_q")
    }

    /// The q^l elements of F_{q^l}, ascending.
    pub fn subfield_elements(&self, l: u32) -> Result<Vec<Elem>> {
        self.check_divisor(l)?;
        let size = self.q.pow(l);
        let n = self.big.order as u64 - 1;
        let step = n / (size - 1);
        let g = self.big.generator;
        let h = self.big.pow(g, step);
        let mut out = Vec::with_capacity(size as usize);
        out.push(Elem::ZERO);
        let mut cur = Elem::ONE;
        for _ in 0..size - 1 {
            out.push(cur);
            cur = self.big.mul(cur, h);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Coordinates over F_q in the basis {1, x, ..., x^{m-1}}, as elements of GF(q).
    pub fn to_coords(&self, a: Elem) -> Vec<Elem> {
        if self.e == 1 {
            return self.big.digits(a).into_iter().map(Elem).collect();
        }
        let inv = self.coord_inverse.as_ref().expect("set when e > 1");
        let p = self.big.p as u64;
        let digits = self.big.digits(a);
        let n = digits.len();
        let mut c = vec![0u64; n];
        for (s, &d) in digits.iter().enumerate() {
            if d == 0 {
                continue;
            }
            for (r, cr) in c.iter_mut().enumerate() {
                *cr = (*cr + d as u64 * inv[s][r] as u64) % p;
            }
        }
        let e = self.e as usize;
        (0..self.m as usize)
            .map(|j| {
                let mut v = 0u64;
                for a in (0..e).rev() {
                    v = v * p + c[j * e + a];
                }
                Elem(v as u32)
            })
            .collect()
    }

    /// Inverse of `to_coords`.
    pub fn from_coords(&self, coords: &[Elem]) -> Elem {
        if self.e == 1 {
            return self.big.from_digits(&coords.iter().map(|c| c.0).collect::<Vec<_>>());
        }
        let mut acc = Elem::ZERO;
        for (j, &c) in coords.iter().enumerate() {
            if !c.is_zero() {
                acc = self.big.add(acc, self.big.mul(self.embed(c), self.x_powers[j]));
            }
        }
        acc
    }
}

fn invert_mod_p(mut a: Vec<Vec<u32>>, p: u32) -> Option<Vec<Vec<u32>>> {
    let n = a.len();
    let mut inv: Vec<Vec<u32>> = (0..n).map(|i| (0..n).map(|j| u32::from(i == j)).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != 0)?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let s = poly::inv_mod_p(a[col][col], p) as u64;
        for j in 0..n {
            a[col][j] = (a[col][j] as u64 * s % p as u64) as u32;
            inv[col][j] = (inv[col][j] as u64 * s % p as u64) as u32;
        }
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let f = a[r][col] as u64;
                for j in 0..n {
                    a[r][j] = ((a[r][j] as u64 + (p as u64 - f) * a[col][j] as u64) % p as u64) as u32;
                    inv[r][j] = ((inv[r][j] as u64 + (p as u64 - f) * inv[col][j] as u64) % p as u64) as u32;
                }
            }
        }
    }
    Some(inv)
}
