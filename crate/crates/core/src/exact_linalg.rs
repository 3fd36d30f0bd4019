//! Sparse exact linear algebra over the rationals.
//!
//! Rank uses fraction-free elimination on integer rows (each row is cleared
//! of denominators and divided by its content after every update) with a
//! Markowitz-style pivot choice. Kernels use sparse Gauss-Jordan over Q.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::rational::{fmt_q, parse_q, Q};

/// Sparse rational matrix. Entries are kept row-major without stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatQ {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Q>,
}

impl SparseMatQ {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatQ {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.add(i, i, &Q::one());
        }
        m
    }

    /// Builds from triplets; duplicates are summed, zeros dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Q)>,
    ) -> Result<Self, Error> {
        let mut m = Self::zeros(rows, cols);
        for (i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::Shape(format!(
                    "entry ({i},{j}) outside {rows}x{cols}"
                )));
            }
            m.add(i, j, &v);
        }
        Ok(m)
    }

    pub fn from_dense(rows: &[Vec<Q>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m.add(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `v` to entry `(i, j)`. Panics on out-of-range indices.
    pub fn add(&mut self, i: usize, j: usize, v: &Q) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        if v.is_zero() {
            return;
        }
        let e = self.entries.entry((i, j)).or_insert_with(Q::zero);
        *e += v;
        if e.is_zero() {
            self.entries.remove(&(i, j));
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Q {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Q::zero)
    }

    /// Row-major triplets.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &Q)> {
        self.entries.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn to_dense(&self) -> Vec<Vec<Q>> {
        let mut out = vec![vec![Q::zero(); self.cols]; self.rows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v.clone();
        }
        out
    }

    pub fn transpose(&self) -> Self {
        SparseMatQ {
            rows: self.cols,
            cols: self.rows,
            entries: self
                .entries
                .iter()
                .map(|(&(i, j), v)| ((j, i), v.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut m = Self::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            m.add(i, j, &(v * c));
        }
        m
    }

    /// Relabels rows and columns: entry `(i,j)` moves to `(row_perm[i], col_perm[j])`.
    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        SparseMatQ {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|(&(i, j), v)| ((row_perm[i], col_perm[j]), v.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &SparseMatQ) -> Result<SparseMatQ, Error> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut by_row: Vec<Vec<(usize, &Q)>> = vec![Vec::new(); other.rows];
        for (k, j, v) in other.triplets() {
            by_row[k].push((j, v));
        }
        let mut out = SparseMatQ::zeros(self.rows, other.cols);
        for (i, k, a) in self.triplets() {
            for &(j, b) in &by_row[k] {
                out.add(i, j, &(a * b));
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.rows];
        for (i, j, a) in self.triplets() {
            out[i] += a * &v[j];
        }
        out
    }

    /// SMS-style text: `rows cols M`, 1-based `i j p/q` lines, `0 0 0`.
    pub fn to_sms(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {} M", self.rows, self.cols).unwrap();
        for (i, j, v) in self.triplets() {
            writeln!(s, "{} {} {}", i + 1, j + 1, fmt_q(v)).unwrap();
        }
        s.push_str("0 0 0\n");
        s
    }

    pub fn from_sms(text: &str) -> Result<SparseMatQ, Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty SMS file".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 || h[2] != "M" {
            return Err(Error::Parse(format!("bad SMS header `{header}`")));
        }
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad SMS index `{t}`")))
        };
        let (rows, cols) = (num(h[0])?, num(h[1])?);
        let mut m = SparseMatQ::zeros(rows, cols);
        let mut seen = BTreeSet::new();
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("bad SMS line `{line}`")));
            }
            if f == ["0", "0", "0"] {
                return Ok(m);
            }
            let (i, j) = (num(f[0])?, num(f[1])?);
            if i == 0 || j == 0 || i > rows || j > cols || !seen.insert((i, j)) {
                return Err(Error::Parse(format!("bad SMS entry `{line}`")));
            }
            m.add(i - 1, j - 1, &parse_q(f[2])?);
        }
        Err(Error::Parse("SMS file lacks the `0 0 0` terminator".into()))
    }
}

/// Outcome of an elimination, with the growth diagnostic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub rank: usize,
    /// Largest bit length of any integer entry seen during elimination.
    pub max_bits: u64,
}

type IntRow = Vec<(usize, BigInt)>;

fn integer_row(entries: &[(usize, Q)]) -> IntRow {
    let mut l = BigInt::one();
    for (_, v) in entries {
        l = l.lcm(v.denom());
    }
    let mut row: IntRow = entries
        .iter()
        .map(|(j, v)| (*j, v.numer() * (&l / v.denom())))
        .collect();
    normalize_content(&mut row);
    row
}

fn normalize_content(row: &mut IntRow) {
    let mut g = BigInt::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if !g.is_zero() && !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v /= &g;
        }
    }
}

/// `b*r - a*p` on sorted sparse integer rows.
fn combine(r: &IntRow, p: &IntRow, a: &BigInt, b: &BigInt) -> IntRow {
    let mut out = Vec::with_capacity(r.len() + p.len());
    let (mut i, mut k) = (0, 0);
    while i < r.len() || k < p.len() {
        let ci = r.get(i).map_or(usize::MAX, |x| x.0);
        let ck = p.get(k).map_or(usize::MAX, |x| x.0);
        let (col, val) = if ci < ck {
            i += 1;
            (ci, b * &r[i - 1].1)
        } else if ck < ci {
            k += 1;
            (ck, -(a * &p[k - 1].1))
        } else {
            i += 1;
            k += 1;
            (ci, b * &r[i - 1].1 - a * &p[k - 1].1)
        };
        if !val.is_zero() {
            out.push((col, val));
        }
    }
    out
}

/// Exact rank with the elimination growth diagnostic.
pub fn rank_report(m: &SparseMatQ) -> RankReport {
    let mut grouped: Vec<Vec<(usize, Q)>> = vec![Vec::new(); m.rows];
    for (i, j, v) in m.triplets() {
        grouped[i].push((j, v.clone()));
    }
    let mut rows: Vec<Option<IntRow>> = grouped
        .iter()
        .map(|r| (!r.is_empty()).then(|| integer_row(r)))
        .collect();
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.cols];
    let mut max_bits = 0;
    for (i, r) in rows.iter().enumerate() {
        if let Some(r) = r {
            for (j, v) in r {
                col_rows[*j].insert(i);
                max_bits = max_bits.max(v.bits());
            }
        }
    }
    let mut rank = 0;
    loop {
        // Markowitz-style choice: sparsest column, then sparsest row in it,
        // then smallest pivot magnitude.
        let Some(col) = (0..m.cols)
            .filter(|&j| !col_rows[j].is_empty())
            .min_by_key(|&j| col_rows[j].len())
        else {
            break;
        };
        let piv = *col_rows[col]
            .iter()
            .min_by_key(|&&i| {
                let r = rows[i].as_ref().unwrap();
                let v = &r.iter().find(|x| x.0 == col).unwrap().1;
                (r.len(), v.bits(), i)
            })
            .unwrap();
        let prow = rows[piv].take().unwrap();
        for (j, _) in &prow {
            col_rows[*j].remove(&piv);
        }
        let b = prow.iter().find(|x| x.0 == col).unwrap().1.clone();
        let targets: Vec<usize> = col_rows[col].iter().copied().collect();
        for t in targets {
            let old = rows[t].take().unwrap();
            for (j, _) in &old {
                col_rows[*j].remove(&t);
            }
            let a = old.iter().find(|x| x.0 == col).unwrap().1.clone();
            let g = a.gcd(&b);
            let mut new = combine(&old, &prow, &(&a / &g), &(&b / &g));
            normalize_content(&mut new);
            if !new.is_empty() {
                for (j, v) in &new {
                    col_rows[*j].insert(t);
                    max_bits = max_bits.max(v.bits());
                }
                rows[t] = Some(new);
            }
        }
        rank += 1;
    }
    RankReport { rank, max_bits }
}

pub fn rank(m: &SparseMatQ) -> usize {
    rank_report(m).rank
}

/// Reduced row echelon form over Q: returns pivot rows keyed by pivot column.
fn rref(m: &SparseMatQ) -> BTreeMap<usize, BTreeMap<usize, Q>> {
    let mut rows: Vec<BTreeMap<usize, Q>> = vec![BTreeMap::new(); m.rows];
    for (i, j, v) in m.triplets() {
        rows[i].insert(j, v.clone());
    }
    let mut pivots: BTreeMap<usize, BTreeMap<usize, Q>> = BTreeMap::new();
    for mut row in rows {
        // Reduce against existing pivots.
        loop {
            let hit = row
                .iter()
                .find(|(c, _)| pivots.contains_key(c))
                .map(|(c, v)| (*c, v.clone()));
            let Some((c, v)) = hit else { break };
            for (k, w) in &pivots[&c] {
                let e = row.entry(*k).or_insert_with(Q::zero);
                *e -= &v * w;
                if e.is_zero() {
                    row.remove(k);
                }
            }
        }
        let Some((&c, lead)) = row.iter().next() else {
            continue;
        };
        let inv = lead.recip();
        for v in row.values_mut() {
            *v *= &inv;
        }
        // Back-substitute into earlier pivot rows.
        for prow in pivots.values_mut() {
            if let Some(f) = prow.get(&c).cloned() {
                for (k, w) in &row {
                    let e = prow.entry(*k).or_insert_with(Q::zero);
                    *e -= &f * w;
                    if e.is_zero() {
                        prow.remove(k);
                    }
                }
            }
        }
        pivots.insert(c, row);
    }
    pivots
}

/// Basis of the right kernel, one vector per free column, in column order.
pub fn kernel_basis(m: &SparseMatQ) -> Vec<Vec<Q>> {
    let pivots = rref(m);
    (0..m.cols)
        .filter(|c| !pivots.contains_key(c))
        .map(|free| {
            let mut v = vec![Q::zero(); m.cols];
            v[free] = Q::one();
            for (pc, row) in &pivots {
                if let Some(x) = row.get(&free) {
                    v[*pc] = -x.clone();
                }
            }
            v
        })
        .collect()
}

/// Solves `m x = b` exactly, returning one solution if any exists.
pub fn solve(m: &SparseMatQ, b: &[Q]) -> Option<Vec<Q>> {
    let mut aug = SparseMatQ::zeros(m.rows, m.cols + 1);
    for (i, j, v) in m.triplets() {
        aug.add(i, j, v);
    }
    for (i, v) in b.iter().enumerate() {
        aug.add(i, m.cols, v);
    }
    let pivots = rref(&aug);
    if pivots.contains_key(&m.cols) {
        return None;
    }
    let mut x = vec![Q::zero(); m.cols];
    for (pc, row) in &pivots {
        x[*pc] = row.get(&m.cols).cloned().unwrap_or_else(Q::zero);
    }
    Some(x)
}

/// Inverse of a square matrix, or `None` if singular.
pub fn inverse(m: &SparseMatQ) -> Option<SparseMatQ> {
    if m.rows != m.cols {
        return None;
    }
    let n = m.rows;
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![Q::zero(); n];
        e[k] = Q::one();
        cols.push(solve(m, &e)?);
    }
    let mut inv = SparseMatQ::zeros(n, n);
    for (k, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            inv.add(i, k, v);
        }
    }
    Some(inv)
}

/// Checks that `d_out ∘ d_in` is composable and vanishes.
pub fn check_composite(d_in: &SparseMatQ, d_out: &SparseMatQ) -> Result<(), Error> {
    if d_in.rows != d_out.cols {
        return Err(Error::Shape(format!(
            "d_in has {} rows but d_out has {} columns",
            d_in.rows, d_out.cols
        )));
    }
    let p = d_out.mul(d_in)?;
    if let Some((row, col, v)) = p.triplets().next() {
        return Err(Error::NonzeroComposite {
            row,
            col,
            value: fmt_q(v),
        });
    }
    Ok(())
}

/// `dim ker(d_out) - rank(d_in)` for `C_prev --d_in--> C --d_out--> C_next`.
pub fn cohomology_dim(d_in: &SparseMatQ, d_out: &SparseMatQ) -> Result<usize, Error> {
    check_composite(d_in, d_out)?;
    Ok(d_out.cols - rank(d_out) - rank(d_in))
}

/// Largest entry bit length, used for reporting.
pub fn max_entry_bits(m: &SparseMatQ) -> u64 {
    m.triplets()
        .map(|(_, _, v)| v.numer().abs().bits().max(v.denom().bits()))
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn identity_and_zero() {
        assert_eq!(rank(&SparseMatQ::identity(3)), 3);
        assert_eq!(rank(&SparseMatQ::zeros(4, 5)), 0);
        assert!(kernel_basis(&SparseMatQ::identity(3)).is_empty());
    }

    #[test]
    fn kernel_of_row_of_ones() {
        let m = SparseMatQ::from_dense(&[vec![q(1), q(1)]]);
        let k = kernel_basis(&m);
        assert_eq!(k, vec![vec![q(-1), q(1)]]);
    }

    #[test]
    fn zero_maps_give_full_dimension() {
        let d_in = SparseMatQ::zeros(4, 2);
        let d_out = SparseMatQ::zeros(3, 4);
        assert_eq!(cohomology_dim(&d_in, &d_out).unwrap(), 4);
    }

    #[test]
    fn exact_sequence_has_no_cohomology() {
        let d_in = SparseMatQ::from_dense(&[vec![q(1)], vec![q(-1)]]);
        let d_out = SparseMatQ::from_dense(&[vec![q(1), q(1)]]);
        assert_eq!(cohomology_dim(&d_in, &d_out).unwrap(), 0);
    }

    #[test]
    fn nonzero_composite_reported() {
        let d_in = SparseMatQ::identity(2);
        let d_out = SparseMatQ::from_dense(&[vec![q(1), q(0)]]);
        assert!(matches!(
            cohomology_dim(&d_in, &d_out),
            Err(Error::NonzeroComposite { row: 0, col: 0, .. })
        ));
    }

    #[test]
    fn sms_round_trip() {
        let m =
            SparseMatQ::from_triplets(3, 2, [(0, 1, q(2)), (2, 0, crate::rational::q_frac(-1, 3))])
                .unwrap();
        let s = m.to_sms();
        assert_eq!(s, "3 2 M\n1 2 2/1\n3 1 -1/3\n0 0 0\n");
        assert_eq!(SparseMatQ::from_sms(&s).unwrap(), m);
    }

    #[test]
    fn inverse_and_solve() {
        let m = SparseMatQ::from_dense(&[vec![q(2), q(1)], vec![q(1), q(1)]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(m.mul(&inv).unwrap(), SparseMatQ::identity(2));
        let singular = SparseMatQ::from_dense(&[vec![q(1), q(2)], vec![q(2), q(4)]]);
        assert!(inverse(&singular).is_none());
    }
}
