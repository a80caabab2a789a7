//! Operators on tensor products of 4-state edge spaces.
//!
//! A state `(s_1, .., s_k)` with `s_j` in `1..=4` and `s_1` on the leftmost
//! line has 1-based composite index `1 + sum_j (s_j - 1) 4^(k-j)`. Internally
//! everything is 0-based; the `*_1` helpers speak the 1-based convention.
//! Rows are out-states, columns are in-states.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const LOCAL_DIM: usize = 4;

/// Operators up to this dimension are stored dense.
pub const DENSE_THRESHOLD: usize = 1024;

/// Largest dimension any operator may reach (width-5 two-row operators).
pub const DIM_CAP: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rep {
    Fund,
    Conj,
}

impl Rep {
    pub fn dual(self) -> Rep {
        match self {
            Rep::Fund => Rep::Conj,
            Rep::Conj => Rep::Fund,
        }
    }
}

/// Tag for one line of a tensor operator. `position` counts lines of the
/// same orientation, e.g. the column a vertical line belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LineLabel {
    pub orientation: Orientation,
    pub rep: Rep,
    pub position: usize,
}

impl LineLabel {
    pub fn new(orientation: Orientation, rep: Rep, position: usize) -> Self {
        LineLabel { orientation, rep, position }
    }
    pub fn h(rep: Rep, position: usize) -> Self {
        Self::new(Orientation::Horizontal, rep, position)
    }
    pub fn v(rep: Rep, position: usize) -> Self {
        Self::new(Orientation::Vertical, rep, position)
    }
}

/// Coordinate-format matrix, entries sorted row-major with no duplicates and
/// no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct CooMatrix {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl CooMatrix {
    /// Duplicates are summed in their input order, so the result only
    /// depends on the order the caller produced them in.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let mut entries: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => entries.push((r, c, v)),
            }
        }
        entries.retain(|e| e.2 != C64::new(0.0, 0.0));
        CooMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(r, c)))
            .map(|k| self.entries[k].2)
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    Dense(DMatrix<C64>),
    Sparse(CooMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorOperator {
    labels: Vec<LineLabel>,
    storage: Storage,
}

pub fn dim_of(lines: usize) -> Result<usize> {
    let dim = LOCAL_DIM.checked_pow(lines as u32).unwrap_or(usize::MAX);
    if dim > DIM_CAP {
        return Err(Error::TooLarge { dim, cap: DIM_CAP });
    }
    Ok(dim)
}

/// 1-based composite index of a 1-based state tuple.
pub fn encode_1(states: &[u8]) -> Result<usize> {
    let mut idx = 0usize;
    for &s in states {
        if !(1..=4).contains(&s) {
            return Err(Error::Domain(format!("edge state {s} outside 1..=4")));
        }
        idx = idx * LOCAL_DIM + usize::from(s - 1);
    }
    Ok(idx + 1)
}

pub fn decode_1(index: usize, lines: usize) -> Result<Vec<u8>> {
    let dim = dim_of(lines)?;
    if index == 0 || index > dim {
        return Err(Error::Domain(format!("index {index} outside 1..={dim}")));
    }
    Ok(digits(index - 1, lines).into_iter().map(|d| d as u8 + 1).collect())
}

/// 0-based digits of a 0-based index, most significant first.
pub fn digits(mut index: usize, lines: usize) -> Vec<usize> {
    let mut out = vec![0; lines];
    for slot in out.iter_mut().rev() {
        *slot = index % LOCAL_DIM;
        index /= LOCAL_DIM;
    }
    out
}

pub fn undigits(ds: &[usize]) -> usize {
    ds.iter().fold(0, |acc, &d| acc * LOCAL_DIM + d)
}

/// 0-based digit of `line` within a `lines`-line index.
#[inline]
pub fn digit(index: usize, line: usize, lines: usize) -> usize {
    (index >> (2 * (lines - 1 - line))) & 3
}

impl TensorOperator {
    pub fn from_dense(labels: Vec<LineLabel>, m: DMatrix<C64>) -> Result<Self> {
        let dim = dim_of(labels.len())?;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::Domain(format!(
                "matrix is {}x{}, lines need {dim}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(TensorOperator { labels, storage: Storage::Dense(m) })
    }

    /// Builds from triplets and picks the storage from [`DENSE_THRESHOLD`].
    pub fn from_triplets(labels: Vec<LineLabel>, triplets: Vec<(usize, usize, C64)>) -> Result<Self> {
        let dim = dim_of(labels.len())?;
        if let Some(t) = triplets.iter().find(|t| t.0 >= dim || t.1 >= dim) {
            return Err(Error::Domain(format!("entry ({}, {}) outside dimension {dim}", t.0, t.1)));
        }
        let coo = CooMatrix::from_triplets(dim, triplets);
        let op = TensorOperator { labels, storage: Storage::Sparse(coo) };
        Ok(if dim <= DENSE_THRESHOLD { op.into_dense() } else { op })
    }

    pub fn identity(labels: Vec<LineLabel>) -> Result<Self> {
        let dim = dim_of(labels.len())?;
        Self::diagonal(labels, &vec![C64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(labels: Vec<LineLabel>, diag: &[C64]) -> Result<Self> {
        let trips = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(labels, trips)
    }

    pub fn labels(&self) -> &[LineLabel] {
        &self.labels
    }

    pub fn num_lines(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        LOCAL_DIM.pow(self.labels.len() as u32)
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// 0-based entry lookup.
    pub fn get(&self, row: usize, col: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(row, col)],
            Storage::Sparse(s) => s.get(row, col),
        }
    }

    /// Entry in the 1-based convention.
    pub fn entry_1(&self, row: usize, col: usize) -> C64 {
        self.get(row - 1, col - 1)
    }

    /// Nonzero entries in row-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize, C64)> {
        match &self.storage {
            Storage::Dense(m) => {
                let mut out = Vec::new();
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        let v = m[(r, c)];
                        if v != C64::new(0.0, 0.0) {
                            out.push((r, c, v));
                        }
                    }
                }
                out
            }
            Storage::Sparse(s) => s.entries().to_vec(),
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.iter().filter(|v| **v != C64::new(0.0, 0.0)).count(),
            Storage::Sparse(s) => s.entries().len(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(s) => {
                let mut m = DMatrix::zeros(s.dim(), s.dim());
                for &(r, c, v) in s.entries() {
                    m[(r, c)] = v;
                }
                m
            }
        }
    }

    pub fn into_dense(self) -> Self {
        let m = self.to_dense();
        TensorOperator { labels: self.labels, storage: Storage::Dense(m) }
    }

    pub fn into_sparse(self) -> Self {
        let coo = CooMatrix { dim: self.dim(), entries: self.nonzeros() };
        TensorOperator { labels: self.labels, storage: Storage::Sparse(coo) }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim(), "vector length mismatch");
        match &self.storage {
            Storage::Dense(m) => {
                let mut y = vec![C64::new(0.0, 0.0); m.nrows()];
                for c in 0..m.ncols() {
                    let xc = x[c];
                    if xc == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for (r, yr) in y.iter_mut().enumerate() {
                        *yr += m[(r, c)] * xc;
                    }
                }
                y
            }
            Storage::Sparse(s) => {
                let mut y = vec![C64::new(0.0, 0.0); s.dim()];
                for &(r, c, v) in s.entries() {
                    y[r] += v * x[c];
                }
                y
            }
        }
    }

    /// Operator product `self * other`; storage follows the threshold.
    pub fn compose(&self, other: &TensorOperator) -> Result<TensorOperator> {
        if self.dim() != other.dim() {
            return Err(Error::Domain("composing operators of different dimension".into()));
        }
        if self.is_dense() && other.is_dense() {
            let m = self.to_dense() * other.to_dense();
            return TensorOperator::from_dense(self.labels.clone(), m);
        }
        // sparse-sparse: row-wise accumulation over rows of `other`
        let b = other.nonzeros();
        let mut row_start = vec![0usize; other.dim() + 1];
        for &(r, _, _) in &b {
            row_start[r + 1] += 1;
        }
        for i in 0..other.dim() {
            row_start[i + 1] += row_start[i];
        }
        let mut trips = Vec::new();
        for (r, k, v) in self.nonzeros() {
            for &(_, c, w) in &b[row_start[k]..row_start[k + 1]] {
                trips.push((r, c, v * w));
            }
        }
        TensorOperator::from_triplets(self.labels.clone(), trips)
    }

    pub fn scale(&self, s: C64) -> TensorOperator {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m * s),
            Storage::Sparse(c) => Storage::Sparse(CooMatrix {
                dim: c.dim,
                entries: c.entries.iter().map(|&(r, k, v)| (r, k, v * s)).collect(),
            }),
        };
        TensorOperator { labels: self.labels.clone(), storage }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &TensorOperator) -> f64 {
        let mut d = self.to_dense();
        d -= other.to_dense();
        d.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Kronecker product with `a`'s lines preceding `b`'s.
pub fn tensor_product(a: &TensorOperator, b: &TensorOperator) -> Result<TensorOperator> {
    let mut labels = a.labels.clone();
    labels.extend_from_slice(&b.labels);
    dim_of(labels.len())?;
    let db = b.dim();
    let bn = b.nonzeros();
    let mut trips = Vec::with_capacity(a.nnz() * bn.len());
    for (ra, ca, va) in a.nonzeros() {
        for &(rb, cb, vb) in &bn {
            trips.push((ra * db + rb, ca * db + cb, va * vb));
        }
    }
    TensorOperator::from_triplets(labels, trips)
}

/// Swap of two 4-state factors, `P(e_i (x) e_j) = e_j (x) e_i`.
pub fn permutation_operator(labels: [LineLabel; 2]) -> TensorOperator {
    let trips = (0..16).map(|c| ((c % 4) * 4 + c / 4, c, C64::new(1.0, 0.0))).collect();
    TensorOperator::from_triplets(labels.to_vec(), trips).expect("16x16 always fits")
}

/// Traces out `aux_lines`, keeping the remaining lines in order.
pub fn partial_trace(a: &TensorOperator, aux_lines: &[usize]) -> Result<TensorOperator> {
    let k = a.num_lines();
    let mut is_aux = vec![false; k];
    for &l in aux_lines {
        if l >= k || is_aux[l] {
            return Err(Error::Domain(format!("invalid or repeated auxiliary line {l}")));
        }
        is_aux[l] = true;
    }
    let keep: Vec<usize> = (0..k).filter(|&l| !is_aux[l]).collect();
    let labels = keep.iter().map(|&l| a.labels[l]).collect();
    let mut trips = Vec::new();
    for (r, c, v) in a.nonzeros() {
        let (dr, dc) = (digits(r, k), digits(c, k));
        if aux_lines.iter().all(|&l| dr[l] == dc[l]) {
            let rr = undigits(&keep.iter().map(|&l| dr[l]).collect::<Vec<_>>());
            let cc = undigits(&keep.iter().map(|&l| dc[l]).collect::<Vec<_>>());
            trips.push((rr, cc, v));
        }
    }
    TensorOperator::from_triplets(labels, trips)
}

/// Lifts a 16x16 two-line operator (index `4 s_i + s_j`) to lines `(i, j)`
/// of an operator with the given labels.
pub fn embed_pair(m: &DMatrix<C64>, i: usize, j: usize, labels: Vec<LineLabel>) -> Result<TensorOperator> {
    let k = labels.len();
    if i >= k || j >= k || i == j || m.nrows() != 16 || m.ncols() != 16 {
        return Err(Error::Domain(format!("cannot embed a pair operator on lines ({i}, {j}) of {k}")));
    }
    let dim = dim_of(k)?;
    let (si, sj) = (2 * (k - 1 - i), 2 * (k - 1 - j));
    let mut trips = Vec::new();
    for col in 0..dim {
        let cin = 4 * ((col >> si) & 3) + ((col >> sj) & 3);
        let base = col & !(3 << si) & !(3 << sj);
        for r in 0..16 {
            let v = m[(r, cin)];
            if v != C64::new(0.0, 0.0) {
                trips.push((base | ((r / 4) << si) | ((r % 4) << sj), col, v));
            }
        }
    }
    TensorOperator::from_triplets(labels, trips)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(n: usize) -> Vec<LineLabel> {
        (0..n).map(|p| LineLabel::v(Rep::Fund, p)).collect()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_1(&[1, 1]).unwrap(), 1);
        assert_eq!(encode_1(&[1, 2]).unwrap(), 2);
        assert_eq!(encode_1(&[2, 1]).unwrap(), 5);
        assert_eq!(encode_1(&[4, 4, 4, 4]).unwrap(), 256);
        assert!(encode_1(&[0]).is_err());
        assert_eq!(decode_1(81, 4).unwrap(), vec![2, 2, 1, 1]);
    }

    #[test]
    fn round_trip_all_states() {
        for k in 1..=4 {
            for idx in 1..=dim_of(k).unwrap() {
                assert_eq!(encode_1(&decode_1(idx, k).unwrap()).unwrap(), idx);
            }
        }
    }

    #[test]
    fn identity_products() {
        let i4 = TensorOperator::identity(lab(1)).unwrap();
        let i16 = tensor_product(&i4, &i4).unwrap();
        assert_eq!(i16.max_abs_diff(&TensorOperator::identity(lab(2)).unwrap()), 0.0);
        let d = TensorOperator::diagonal(lab(1), &[c(1.0), c(2.0), c(3.0), c(4.0)]).unwrap();
        let di = tensor_product(&d, &i4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(di.get(4 * i + j, 4 * i + j), c(i as f64 + 1.0));
            }
        }
    }

    #[test]
    fn permutation_facts() {
        let p = permutation_operator([LineLabel::h(Rep::Fund, 0), LineLabel::v(Rep::Fund, 0)]);
        let p2 = p.compose(&p).unwrap();
        assert_eq!(p2.max_abs_diff(&TensorOperator::identity(p.labels().to_vec()).unwrap()), 0.0);
        assert_eq!(p.trace(), c(4.0));
        // e1 (x) e2 -> e2 (x) e1
        let mut x = vec![c(0.0); 16];
        x[1] = c(1.0);
        let y = p.matvec(&x);
        assert_eq!(y[4], c(1.0));
        let full = partial_trace(&p, &[0, 1]).unwrap();
        assert_eq!(full.dim(), 1);
        assert_eq!(full.get(0, 0), c(4.0));
    }

    #[test]
    fn partial_trace_of_product() {
        let a = TensorOperator::diagonal(lab(1), &[c(1.0), c(-2.0), c(0.5), c(3.0)]).unwrap();
        let b = TensorOperator::from_triplets(lab(1), vec![(0, 1, c(2.0)), (1, 1, c(1.5)), (3, 3, c(-0.25))]).unwrap();
        let ab = tensor_product(&a, &b).unwrap();
        let t = partial_trace(&ab, &[1]).unwrap();
        assert!(t.max_abs_diff(&a.scale(b.trace())) < 1e-15);
        assert!(partial_trace(&ab, &[2]).is_err());
    }

    #[test]
    fn dense_and_sparse_agree() {
        let mut trips = Vec::new();
        for r in 0..16 {
            for k in 0..16 {
                trips.push((r, k, C64::new((r * 7 + k) as f64, (k as f64) - 3.0)));
            }
        }
        let d = TensorOperator::from_triplets(lab(2), trips).unwrap();
        assert!(d.is_dense());
        let s = d.clone().into_sparse();
        assert_eq!(s.to_dense(), d.to_dense());
        let dd = d.compose(&d).unwrap();
        let ss = s.compose(&s).unwrap();
        assert!(dd.max_abs_diff(&ss) < 1e-9);
    }

    #[test]
    fn embed_matches_kron_on_adjacent_lines() {
        let mut m = DMatrix::zeros(16, 16);
        for r in 0..16 {
            for k in 0..16 {
                m[(r, k)] = C64::new(((r + 3 * k) % 5) as f64, 0.0);
            }
        }
        let two = TensorOperator::from_dense(lab(2), m.clone()).unwrap();
        let i4 = TensorOperator::identity(lab(1)).unwrap();
        let want = tensor_product(&two, &i4).unwrap();
        let got = embed_pair(&m, 0, 1, lab(3)).unwrap();
        assert_eq!(want.max_abs_diff(&got), 0.0);
        // reversed line order is conjugation by the swap
        let p = permutation_operator([lab(1)[0], lab(1)[0]]).to_dense();
        let swapped = &p * &m * &p;
        let got_rev = embed_pair(&m, 1, 0, lab(2)).unwrap();
        assert_eq!(got_rev.to_dense(), swapped);
    }
}
