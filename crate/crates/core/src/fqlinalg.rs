//! Dense linear algebra over a finite field, and the flattening
//! F_{q^m}^k -> F_q^{mk} with respect to the basis {1, x, ..., x^{m-1}}.

use crate::error::{Error, Result};
use crate::field::{Elem, Field, FieldTower};

/// Row-major matrix of field elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Elem::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Elem::ONE);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[Vec<Elem>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::AmbientMismatch(format!("row of length {} in a {cols}-column matrix", r.len())));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Reduced row echelon form with zero rows dropped, plus pivot columns.
    pub fn rref(&self, f: &Field) -> (Matrix, Vec<usize>) {
        let mut rows = self.to_rows();
        let pivots = rref_rows(f, &mut rows);
        (Matrix::from_rows(self.cols, &rows).expect("shape preserved"), pivots)
    }

    pub fn rank(&self, f: &Field) -> usize {
        rank_of(f, self.to_rows())
    }

    /// Basis of the right null space {v : M v = 0}, one vector per row.
    pub fn kernel(&self, f: &Field) -> Matrix {
        let k = null_space(f, &self.to_rows(), self.cols);
        Matrix::from_rows(self.cols, &k).expect("kernel vectors have cols entries")
    }
}

/// dst -= factor * src, from column `from` on.
#[inline]
pub fn axpy_neg(f: &Field, dst: &mut [Elem], factor: Elem, src: &[Elem], from: usize) {
    if factor.is_zero() {
        return;
    }
    if f.p() == 2 && factor == Elem::ONE {
        for (d, s) in dst[from..].iter_mut().zip(&src[from..]) {
            d.0 ^= s.0;
        }
        return;
    }
    for (d, &s) in dst[from..].iter_mut().zip(&src[from..]) {
        if !s.is_zero() {
            *d = f.sub(*d, f.mul(factor, s));
        }
    }
}

/// In-place RREF. Leaves only the nonzero rows and returns the pivot columns.
pub fn rref_rows(f: &Field, rows: &mut Vec<Vec<Elem>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut pr = 0;
    for col in 0..ncols {
        if pr == rows.len() {
            break;
        }
        let Some(found) = (pr..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pr, found);
        let lead = rows[pr][col];
        if lead != Elem::ONE {
            let s = f.inv(lead).expect("nonzero pivot");
            for v in rows[pr][col..].iter_mut() {
                *v = f.mul(*v, s);
            }
        }
        let pivot_row = std::mem::take(&mut rows[pr]);
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pr {
                let factor = row[col];
                axpy_neg(f, row, factor, &pivot_row, col);
            }
        }
        rows[pr] = pivot_row;
        pivots.push(col);
        pr += 1;
    }
    rows.truncate(pr);
    pivots
}

pub fn rank_of(f: &Field, mut rows: Vec<Vec<Elem>>) -> usize {
    rref_rows(f, &mut rows).len()
}

/// Basis of {v : row . v = 0 for every row}.
pub fn null_space(f: &Field, rows: &[Vec<Elem>], ncols: usize) -> Vec<Vec<Elem>> {
    let mut r = rows.to_vec();
    let pivots = rref_rows(f, &mut r);
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..ncols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Elem::ZERO; ncols];
            v[free] = Elem::ONE;
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = f.neg(row[free]);
            }
            v
        })
        .collect()
}

/// A subspace of F^n held as its canonical RREF basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FlatBasis {
    ncols: usize,
    rows: Vec<Vec<Elem>>,
    pivots: Vec<usize>,
}

impl FlatBasis {
    pub fn zero(ncols: usize) -> Self {
        FlatBasis { ncols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ncols: usize) -> Self {
        let rows = (0..ncols).map(|i| (0..ncols).map(|j| if i == j { Elem::ONE } else { Elem::ZERO }).collect()).collect();
        FlatBasis { ncols, rows, pivots: (0..ncols).collect() }
    }

    pub fn span(f: &Field, ncols: usize, mut rows: Vec<Vec<Elem>>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::AmbientMismatch(format!("vector of length {} in F^{ncols}", r.len())));
        }
        let pivots = rref_rows(f, &mut rows);
        Ok(FlatBasis { ncols, rows, pivots })
    }

    /// Wrap rows already known to be in canonical RREF.
    pub fn from_rref_unchecked(ncols: usize, rows: Vec<Vec<Elem>>, pivots: Vec<usize>) -> Self {
        debug_assert_eq!(rows.len(), pivots.len());
        FlatBasis { ncols, rows, pivots }
    }

    /// Null space of the given rows, canonicalized.
    pub fn kernel_of(f: &Field, rows: &[Vec<Elem>], ncols: usize) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::AmbientMismatch(format!("row of length {} against {ncols} unknowns", r.len())));
        }
        Self::span(f, ncols, null_space(f, rows, ncols))
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<Elem>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduce `v` modulo the subspace; zero iff v lies in it.
    pub fn reduce(&self, f: &Field, v: &mut [Elem]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            axpy_neg(f, v, c, row, p);
        }
    }

    pub fn contains(&self, f: &Field, v: &[Elem]) -> bool {
        let mut w = v.to_vec();
        self.reduce(f, &mut w);
        w.iter().all(|x| x.is_zero())
    }

    fn check_ambient(&self, other: &FlatBasis) -> Result<()> {
        if self.ncols != other.ncols {
            return Err(Error::AmbientMismatch(format!("F^{} versus F^{}", self.ncols, other.ncols)));
        }
        Ok(())
    }

    pub fn sum(&self, f: &Field, other: &FlatBasis) -> Result<FlatBasis> {
        self.check_ambient(other)?;
        let rows = self.rows.iter().chain(&other.rows).cloned().collect();
        FlatBasis::span(f, self.ncols, rows)
    }

    /// Intersection via the left kernel of the stacked bases.
    pub fn intersect(&self, f: &Field, other: &FlatBasis) -> Result<FlatBasis> {
        self.check_ambient(other)?;
        let a = self.dim();
        let stacked: Vec<Vec<Elem>> = self.rows.iter().chain(&other.rows).cloned().collect();
        let t = Matrix::from_rows(self.ncols, &stacked)?.transpose();
        let combos = null_space(f, &t.to_rows(), stacked.len());
        let vectors = combos
            .iter()
            .map(|c| {
                let mut v = vec![Elem::ZERO; self.ncols];
                for (coef, row) in c[..a].iter().zip(&self.rows) {
                    axpy_neg(f, &mut v, f.neg(*coef), row, 0);
                }
                v
            })
            .collect();
        FlatBasis::span(f, self.ncols, vectors)
    }

    pub fn is_subspace_of(&self, f: &Field, other: &FlatBasis) -> bool {
        self.ncols == other.ncols && self.rows.iter().all(|r| other.contains(f, r))
    }
}

/// Expand each entry over F_q and concatenate.
pub fn flatten(tower: &FieldTower, v: &[Elem]) -> Vec<Elem> {
    let mut out = Vec::with_capacity(v.len() * tower.m() as usize);
    for &a in v {
        out.extend(tower.to_coords(a));
    }
    out
}

pub fn unflatten(tower: &FieldTower, row: &[Elem]) -> Result<Vec<Elem>> {
    let m = tower.m() as usize;
    if !row.len().is_multiple_of(m) {
        return Err(Error::BasisExpansionFailure(format!("length {} is not a multiple of m = {m}", row.len())));
    }
    Ok(row.chunks(m).map(|c| tower.from_coords(c)).collect())
}

/// Scale a vector over F by a.
pub fn scale(f: &Field, a: Elem, v: &[Elem]) -> Vec<Elem> {
    v.iter().map(|&x| f.mul(a, x)).collect()
}

pub fn add_into(f: &Field, dst: &mut [Elem], src: &[Elem]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = f.add(*d, s);
    }
}

pub fn dot(f: &Field, a: &[Elem], b: &[Elem]) -> Elem {
    a.iter().zip(b).fold(Elem::ZERO, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
}

/// Visit every vector of the F_p-span of `gens`, zero included, walking an
/// odometer over the coefficient digits. `start` is added to every vector.
pub fn for_each_in_fp_span(f: &Field, gens: &[Vec<Elem>], start: &[Elem], mut visit: impl FnMut(&[Elem])) {
    let p = f.p();
    let mut v = start.to_vec();
    let mut digits = vec![0u32; gens.len()];
    visit(&v);
    'outer: loop {
        for (r, g) in gens.iter().enumerate() {
            add_into(f, &mut v, g);
            digits[r] += 1;
            if digits[r] < p {
                visit(&v);
                continue 'outer;
            }
            // p additions of g returned v to where it was.
            digits[r] = 0;
        }
        break;
    }
}

/// Parallel fold over the F_p-span of `gens`. The top generators are fixed
/// per chunk, the rest are walked serially inside each chunk.
pub fn fold_fp_span<T, I, F, R>(f: &Field, gens: &[Vec<Elem>], width: usize, parallel: bool, init: I, fold: F, reduce: R) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(&mut T, &[Elem]) + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let p = f.p() as u64;
    let zero = vec![Elem::ZERO; width];
    let total_log = gens.len() as f64 * (p as f64).log2();
    if !parallel || total_log < 14.0 {
        let mut acc = init();
        for_each_in_fp_span(f, gens, &zero, |v| fold(&mut acc, v));
        return acc;
    }
    let mut split = 0usize;
    let mut chunks = 1u64;
    while split < gens.len() && chunks < 256 {
        split += 1;
        chunks *= p;
    }
    let (low, high) = gens.split_at(gens.len() - split);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut start = zero.clone();
            let mut t = c;
            for g in high {
                let d = (t % p) as u32;
                t /= p;
                if d != 0 {
                    let scaled: Vec<Elem> = g.iter().map(|&x| f.scale_int(x, d)).collect();
                    add_into(f, &mut start, &scaled);
                }
            }
            let mut acc = init();
            for_each_in_fp_span(f, low, &start, |v| fold(&mut acc, v));
            acc
        })
        .reduce(&init, &reduce)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_tower;

    fn e(v: &[u32]) -> Vec<Elem> {
        v.iter().map(|&x| Elem(x)).collect()
    }

    #[test]
    fn rref_basics() {
        let f = Field::new(2, 1).unwrap();
        let id = Matrix::identity(3);
        let (r, p) = id.rref(&f);
        assert_eq!(r, id);
        assert_eq!(p, vec![0, 1, 2]);
        let z = Matrix::zero(2, 3);
        let (r, p) = z.rref(&f);
        assert_eq!(r.rows(), 0);
        assert!(p.is_empty());
        let m = Matrix::from_rows(3, &[e(&[1, 1, 0]), e(&[0, 1, 1]), e(&[1, 0, 1])]).unwrap();
        assert_eq!(m.rank(&f), 2);
    }

    #[test]
    fn kernel_is_annihilated() {
        let f = Field::new(3, 2).unwrap();
        let m = Matrix::from_rows(4, &[e(&[1, 2, 3, 4]), e(&[5, 6, 7, 8]), e(&[2, 4, 6, 8])]).unwrap();
        let k = m.kernel(&f);
        assert_eq!(k.rows() + m.rank(&f), 4);
        for kr in k.to_rows() {
            for r in m.to_rows() {
                assert_eq!(dot(&f, &r, &kr), Elem::ZERO);
            }
        }
    }

    #[test]
    fn canonical_for_different_bases() {
        let f = Field::new(2, 1).unwrap();
        let a = FlatBasis::span(&f, 4, vec![e(&[1, 1, 0, 0]), e(&[0, 1, 1, 0])]).unwrap();
        let b = FlatBasis::span(&f, 4, vec![e(&[1, 0, 1, 0]), e(&[1, 1, 0, 0]), e(&[0, 1, 1, 0])]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.intersect(&f, &a).unwrap(), a);
        assert_eq!(a.intersect(&f, &FlatBasis::zero(4)).unwrap().dim(), 0);
        assert_eq!(a.intersect(&f, &FlatBasis::zero(5)).unwrap_err(), Error::AmbientMismatch("F^4 versus F^5".into()));
    }

    #[test]
    fn span_walk_visits_everything_once() {
        let f = Field::new(3, 2).unwrap();
        let gens = vec![vec![Elem(1), Elem(0)], vec![Elem(3), Elem(1)], vec![Elem(0), Elem(4)]];
        let mut seen = std::collections::HashSet::new();
        for_each_in_fp_span(&f, &gens, &[Elem::ZERO; 2], |v| {
            assert!(seen.insert(v.to_vec()));
        });
        assert_eq!(seen.len(), 27);
        for parallel in [false, true] {
            let count = fold_fp_span(&f, &gens, 2, parallel, || 0u64, |a, _| *a += 1, |a, b| a + b);
            assert_eq!(count, 27);
        }
        let big: Vec<Vec<Elem>> = (0..16).map(|i| (0..16).map(|j| Elem(u32::from(i == j))).collect()).collect();
        let f2 = Field::new(2, 1).unwrap();
        let count = fold_fp_span(&f2, &big, 16, true, || 0u64, |a, v| *a += u64::from(v.iter().any(|x| !x.is_zero())), |a, b| a + b);
        assert_eq!(count, (1 << 16) - 1);
    }

    #[test]
    fn flatten_examples() {
        let t = make_tower(2, 1, 2).unwrap();
        assert_eq!(flatten(&t, &[t.x()]), e(&[0, 1]));
        let t = make_tower(2, 1, 3).unwrap();
        assert_eq!(flatten(&t, &[Elem::ONE, Elem::ZERO]), e(&[1, 0, 0, 0, 0, 0]));
        assert_eq!(flatten(&t, &[Elem::ZERO; 2]), vec![Elem::ZERO; 6]);
        let t = make_tower(2, 2, 2).unwrap();
        for a in t.big().elements() {
            let row = flatten(&t, &[a, t.big().mul(a, a)]);
            assert_eq!(unflatten(&t, &row).unwrap(), vec![a, t.big().mul(a, a)]);
        }
    }
}
