//! Twisted transfer matrices on width-2L cylinders, conserved charges and
//! sector-resolved spectra.
//!
//! Each site carries a conjugate and a fundamental vertical line, in that
//! order, and site 1 is the most significant digit. The two-row operators
//! use the horizontal pair `(hf, hc)` as auxiliary space, twisted by
//! `Omega (x) Omega^-1`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::couplings::CouplingSet;
use crate::error::{Error, Result};
use crate::linalg::{arnoldi_largest, eigenvalues_dense, merge_clusters, sort_spectrum, ArnoldiOptions};
use crate::rmatrix::{self, crossing_operator, RepPair};
use crate::tensor_kernel::{digit, embed_pair, LineLabel, Rep, TensorOperator};

/// Largest width accepted by [`build_transfer`].
pub const MAX_WIDTH: usize = 5;

/// Sector blocks up to this dimension are diagonalised densely.
pub const DENSE_SECTOR_MAX: usize = 4096;

/// Dense sector eigenvalues closer than this (relative) are treated as one
/// defective cluster and replaced by their mean.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variant {
    /// The 24-vertex loop transfer matrix `T`.
    TwoRowLoop,
    /// Quantum-group two-row matrix `T(x, y)`; `None` means the special point.
    TwoRowQuantum(Option<(C64, C64)>),
    OneRowFund(C64),
    OneRowConj(C64),
}

#[derive(Clone, Debug)]
pub struct TransferOperator {
    pub width: usize,
    pub variant: Variant,
    pub op: TensorOperator,
}

pub fn twist_matrix(cpl: &CouplingSet, rep: Rep) -> [C64; 4] {
    let (ai, a) = (cpl.a.inv(), cpl.a);
    match rep {
        Rep::Fund => [ai, ai, a, a],
        Rep::Conj => [a, a, ai, ai],
    }
}

pub fn site_labels(width: usize) -> Vec<LineLabel> {
    (0..width)
        .flat_map(|j| [LineLabel::v(Rep::Conj, j), LineLabel::v(Rep::Fund, j)])
        .collect()
}

/// Site operator `(aux, site)` with aux most significant, plus the aux twist.
struct SiteChain {
    aux_dim: usize,
    twist: Vec<C64>,
    /// For every `(aux_in, site_in)` the nonzero `(aux_out, site_out, value)`.
    columns: Vec<Vec<(usize, usize, C64)>>,
}

impl SiteChain {
    fn new(op: &DMatrix<C64>, aux_dim: usize, twist: Vec<C64>) -> Self {
        let mut columns = vec![Vec::new(); aux_dim * 16];
        for c in 0..aux_dim * 16 {
            for r in 0..aux_dim * 16 {
                let v = op[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    columns[c].push((r / 16, r % 16, v));
                }
            }
        }
        SiteChain { aux_dim, twist, columns }
    }

    /// Column `col` of `tr_aux[S_L .. S_1 tw]`, as (row, value) pairs.
    fn column(&self, col: usize, width: usize) -> Vec<(usize, C64)> {
        let mut states: BTreeMap<(usize, usize, usize), C64> = BTreeMap::new();
        for a0 in 0..self.aux_dim {
            if self.twist[a0] != C64::new(0.0, 0.0) {
                states.insert((a0, a0, 0), self.twist[a0]);
            }
        }
        for site in 0..width {
            let p_in = (col >> (4 * (width - 1 - site))) & 15;
            let mut next: BTreeMap<(usize, usize, usize), C64> = BTreeMap::new();
            for (&(a0, a, prefix), &w) in &states {
                for &(a_out, p_out, v) in &self.columns[a * 16 + p_in] {
                    *next.entry((a0, a_out, prefix * 16 + p_out)).or_default() += w * v;
                }
            }
            states = next;
        }
        let mut out: BTreeMap<usize, C64> = BTreeMap::new();
        for ((a0, a, row), w) in states {
            if a0 == a {
                *out.entry(row).or_default() += w;
            }
        }
        out.into_iter().filter(|(_, v)| *v != C64::new(0.0, 0.0)).collect()
    }
}

fn two_row_twist(cpl: &CouplingSet) -> Vec<C64> {
    let (f, c) = (twist_matrix(cpl, Rep::Fund), twist_matrix(cpl, Rep::Conj));
    (0..16).map(|a| f[a / 4] * c[a % 4]).collect()
}

fn one_row_site(pair_v_fund: RepPair, pair_v_conj: RepPair, x: C64, cpl: &CouplingSet) -> Result<DMatrix<C64>> {
    let labels = vec![LineLabel::h(pair_v_fund.reps().0, 0), LineLabel::v(Rep::Conj, 0), LineLabel::v(Rep::Fund, 0)];
    let on_vf = crossing_operator(&rmatrix::rcheck_general_matrix(pair_v_fund, x, cpl.q)?);
    let on_vc = crossing_operator(&rmatrix::rcheck_general_matrix(pair_v_conj, x, cpl.q)?);
    let a = embed_pair(&on_vc, 0, 1, labels.clone())?.to_dense();
    let b = embed_pair(&on_vf, 0, 2, labels)?.to_dense();
    Ok(a * b)
}

fn site_chain(variant: Variant, cpl: &CouplingSet) -> Result<SiteChain> {
    Ok(match variant {
        Variant::TwoRowLoop => SiteChain::new(&rmatrix::loop_r(cpl).to_dense(), 16, two_row_twist(cpl)),
        Variant::TwoRowQuantum(None) => SiteChain::new(&rmatrix::composite_quantum_r(cpl).to_dense(), 16, two_row_twist(cpl)),
        Variant::TwoRowQuantum(Some((x, y))) => {
            SiteChain::new(&rmatrix::composite_general(x, y, cpl)?.to_dense(), 16, two_row_twist(cpl))
        }
        Variant::OneRowFund(x) => SiteChain::new(
            &one_row_site(RepPair::FundFund, RepPair::FundConj, x, cpl)?,
            4,
            twist_matrix(cpl, Rep::Fund).to_vec(),
        ),
        Variant::OneRowConj(x) => SiteChain::new(
            &one_row_site(RepPair::ConjFund, RepPair::ConjConj, x, cpl)?,
            4,
            twist_matrix(cpl, Rep::Conj).to_vec(),
        ),
    })
}

fn check_width(width: usize) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        return Err(Error::Domain(format!("width L = {width} outside 1..={MAX_WIDTH}")));
    }
    Ok(())
}

/// Full transfer matrix on `16^L` states.
pub fn build_transfer(width: usize, variant: Variant, cpl: &CouplingSet) -> Result<TransferOperator> {
    check_width(width)?;
    let labels = site_labels(width);
    crate::tensor_kernel::dim_of(labels.len())?;
    let chain = site_chain(variant, cpl)?;
    let mut trips = Vec::new();
    for col in 0..16usize.pow(width as u32) {
        trips.extend(chain.column(col, width).into_iter().map(|(r, v)| (r, col, v)));
    }
    let op = TensorOperator::from_triplets(labels, trips)?;
    Ok(TransferOperator { width, variant, op })
}

/// Conserved charges `(Q_1, Q_2, Q_3)`; `m_i = L - Q_i` counts Bethe roots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChargeVector(pub [i32; 3]);

impl ChargeVector {
    pub fn reference(width: usize) -> Self {
        ChargeVector([width as i32; 3])
    }

    pub fn from_root_counts(width: usize, m: [usize; 3]) -> Self {
        ChargeVector(m.map(|k| width as i32 - k as i32))
    }

    /// Root counts, or `None` if some `m_i` would be negative.
    pub fn root_counts(&self, width: usize) -> Option<[usize; 3]> {
        let m = self.0.map(|q| width as i32 - q);
        if m.iter().any(|&k| k < 0) {
            return None;
        }
        Some(m.map(|k| k as usize))
    }
}

/// Single-line charge: `[s <= i] - i/4` for a fundamental line, negated
/// for a conjugate one (states 1-based).
pub fn line_charge(rep: Rep, state_1: usize, i: usize) -> f64 {
    let v = if state_1 <= i { 1.0 } else { 0.0 } - i as f64 / 4.0;
    match rep {
        Rep::Fund => v,
        Rep::Conj => -v,
    }
}

pub fn charges_of_state(index: usize, width: usize) -> ChargeVector {
    let mut q = [0i32; 3];
    for site in 0..width {
        let sc = digit(index, 2 * site, 2 * width);
        let sf = digit(index, 2 * site + 1, 2 * width);
        for (i, qi) in q.iter_mut().enumerate() {
            *qi += i32::from(sf <= i) - i32::from(sc <= i);
        }
    }
    ChargeVector(q)
}

/// Diagonal charge operator `Q_i`, `i` in `1..=3`.
pub fn charge_operator(i: usize, width: usize) -> Result<TensorOperator> {
    if !(1..=3).contains(&i) {
        return Err(Error::Domain(format!("charge index {i} outside 1..=3")));
    }
    check_width(width)?;
    let labels = site_labels(width);
    let dim = crate::tensor_kernel::dim_of(labels.len())?;
    let diag: Vec<C64> = (0..dim)
        .map(|idx| {
            let v: f64 = labels
                .iter()
                .enumerate()
                .map(|(l, lab)| line_charge(lab.rep, digit(idx, l, labels.len()) + 1, i))
                .sum();
            C64::new(v, 0.0)
        })
        .collect();
    TensorOperator::diagonal(labels, &diag)
}

pub fn sector_indices(width: usize, sector: ChargeVector) -> Vec<usize> {
    (0..16usize.pow(width as u32)).filter(|&k| charges_of_state(k, width) == sector).collect()
}

/// All nonempty sectors, sorted.
pub fn sectors(width: usize) -> Vec<ChargeVector> {
    let mut seen: Vec<ChargeVector> = (0..16usize.pow(width as u32)).map(|k| charges_of_state(k, width)).collect();
    seen.sort();
    seen.dedup();
    seen
}

/// Builds only the block of `variant` on one charge sector, without
/// forming the full matrix.
pub fn build_sector_block(width: usize, variant: Variant, cpl: &CouplingSet, sector: ChargeVector) -> Result<SectorBlock> {
    check_width(width)?;
    let idx = sector_indices(width, sector);
    if idx.is_empty() {
        return Err(Error::Domain(format!("sector {:?} is empty at L = {width}", sector.0)));
    }
    let chain = site_chain(variant, cpl)?;
    let mut entries = Vec::new();
    for (c, &col) in idx.iter().enumerate() {
        for (row, v) in chain.column(col, width) {
            let r = idx
                .binary_search(&row)
                .map_err(|_| Error::NoConvergence(format!("charge leak from state {col} to {row}")))?;
            entries.push((r, c, v));
        }
    }
    Ok(SectorBlock { sector, indices: idx, entries })
}

/// A charge-sector block in coordinate form (sector-local indices).
#[derive(Clone, Debug)]
pub struct SectorBlock {
    pub sector: ChargeVector,
    pub indices: Vec<usize>,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SectorBlock {
    pub fn from_operator(t: &TensorOperator, width: usize, sector: ChargeVector) -> Result<Self> {
        let idx = sector_indices(width, sector);
        if idx.is_empty() {
            return Err(Error::Domain(format!("sector {:?} is empty at L = {width}", sector.0)));
        }
        let mut entries = Vec::new();
        for (r, c, v) in t.nonzeros() {
            if let (Ok(rr), Ok(cc)) = (idx.binary_search(&r), idx.binary_search(&c)) {
                entries.push((rr, cc, v));
            }
        }
        Ok(SectorBlock { sector, indices: idx, entries })
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `k` largest eigenvalues (all of them for `k = None`), sorted by
    /// descending modulus then phase.
    pub fn spectrum(&self, k: Option<usize>) -> Result<Vec<C64>> {
        let dim = self.dim();
        let mut ev = if dim <= DENSE_SECTOR_MAX {
            eigenvalues_dense(self.to_dense())?
        } else {
            let want = k.ok_or_else(|| Error::Domain(format!("full spectrum of a {dim}-dimensional block")))?;
            let mv = |x: &[C64]| {
                let mut y = vec![C64::new(0.0, 0.0); dim];
                for &(r, c, v) in &self.entries {
                    y[r] += v * x[c];
                }
                y
            };
            arnoldi_largest(mv, dim, want, ArnoldiOptions::default())?
        };
        if dim <= DENSE_SECTOR_MAX {
            merge_clusters(&mut ev, CLUSTER_TOL);
        }
        sort_spectrum(&mut ev);
        if let Some(k) = k {
            ev.truncate(k);
        }
        Ok(ev)
    }
}

pub fn sector_spectrum(t: &TransferOperator, sector: ChargeVector, k: Option<usize>) -> Result<Vec<C64>> {
    SectorBlock::from_operator(&t.op, t.width, sector)?.spectrum(k)
}

/// Vertical gauge `U_v` on the physical lines, as omega exponents per state.
pub fn vertical_gauge_exponent(index: usize, width: usize) -> i32 {
    let g = rmatrix::GaugeSet::FROZEN;
    (0..width)
        .map(|s| g.u_v_conj[digit(index, 2 * s, 2 * width)] + g.u_v_fund[digit(index, 2 * s + 1, 2 * width)])
        .sum()
}

/// `<ref|T|ref>` computed from the site chain restricted to the reference
/// state, cheap at any width.
pub fn reference_eigenvalue(width: usize, cpl: &CouplingSet) -> C64 {
    let r = rmatrix::loop_r(cpl);
    // reference site state: vc = 4, vf = 1  ->  local index 3 * 4 + 0
    let p = 12;
    let tw = two_row_twist(cpl);
    let b = DMatrix::<C64>::from_fn(16, 16, |ao, ai| r.get(ao * 16 + p, ai * 16 + p));
    let mut m = DMatrix::<C64>::from_diagonal(&nalgebra::DVector::from_vec(tw));
    for _ in 0..width {
        m = &b * m;
    }
    m.trace()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cpl(n: f64) -> CouplingSet {
        CouplingSet::from_n(n, 0).unwrap()
    }

    #[test]
    fn twist_facts() {
        let c = cpl(2.0);
        assert!(twist_matrix(&c, Rep::Fund).iter().all(|z| (z - 1.0).norm() < 1e-15));
        let c = cpl(0.3);
        let (f, g) = (twist_matrix(&c, Rep::Fund), twist_matrix(&c, Rep::Conj));
        let det: C64 = f.iter().product();
        assert!((det - 1.0).norm() < 1e-15);
        for k in 0..4 {
            assert!((f[k] * g[k] - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn charge_examples() {
        assert_eq!(line_charge(Rep::Fund, 1, 1), 0.75);
        for w in 1..=2 {
            let refidx = (0..w).fold(0, |acc, _| acc * 16 + 12);
            assert_eq!(charges_of_state(refidx, w), ChargeVector::reference(w));
            for i in 1..=3 {
                let q = charge_operator(i, w).unwrap();
                assert!(q.trace().norm() < 1e-12);
                assert!((q.get(refidx, refidx) - w as f64).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_charge_matches_state_charges() {
        let w = 2;
        let ops: Vec<_> = (1..=3).map(|i| charge_operator(i, w).unwrap()).collect();
        for idx in 0..256 {
            let cv = charges_of_state(idx, w);
            for i in 0..3 {
                assert!((ops[i].get(idx, idx).re - cv.0[i] as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sectors_partition_the_space() {
        let total: usize = sectors(2).iter().map(|s| sector_indices(2, *s).len()).sum();
        assert_eq!(total, 256);
        assert_eq!(sector_indices(1, ChargeVector([0, 0, 0])).len(), 4);
    }

    #[test]
    fn reference_state_is_n_squared() {
        for n in [1.0, 0.37, -0.6] {
            let c = cpl(n);
            for w in 1..=4 {
                assert!((reference_eigenvalue(w, &c) - n * n).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sector_build_matches_full_build() {
        let c = cpl(0.8);
        let t = build_transfer(2, Variant::TwoRowLoop, &c).unwrap();
        for s in [ChargeVector([0, 0, 0]), ChargeVector([1, 0, 1]), ChargeVector([2, 2, 2])] {
            let a = SectorBlock::from_operator(&t.op, 2, s).unwrap().to_dense();
            let b = build_sector_block(2, Variant::TwoRowLoop, &c, s).unwrap().to_dense();
            assert_eq!(a, b);
        }
    }
}
