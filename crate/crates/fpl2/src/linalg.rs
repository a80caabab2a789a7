//! Eigenvalue plumbing: dense complex Schur, a restarted Arnoldi iteration
//! for large sparse blocks, and spectrum ordering / comparison helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// All eigenvalues of a dense complex matrix.
pub fn eigenvalues_dense(m: DMatrix<C64>) -> Result<Vec<C64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Domain("eigenvalues of a non-square matrix".into()));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let ev = nalgebra::linalg::Schur::new(m)
        .eigenvalues()
        .ok_or_else(|| Error::NoConvergence("Schur decomposition".into()))?;
    Ok(ev.iter().copied().collect())
}

/// Replaces each cluster of eigenvalues closer than `rel` (relative to
/// `max(1, |z|)`, single linkage) by the cluster mean.
///
/// A `k`-fold defective eigenvalue comes out of Schur split by about
/// `eps^(1/k)`, while the mean over the cluster stays accurate to working
/// precision. Only meaningful for small blocks where clusters are sparse.
pub fn merge_clusters(ev: &mut [C64], rel: f64) {
    let n = ev.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (ev[i] - ev[j]).norm() <= rel * ev[i].norm().max(1.0) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut sums = vec![(C64::new(0.0, 0.0), 0usize); n];
    for i in 0..n {
        let r = root(&mut parent, i);
        sums[r].0 += ev[i];
        sums[r].1 += 1;
    }
    for i in 0..n {
        let r = root(&mut parent, i);
        if sums[r].1 > 1 {
            ev[i] = sums[r].0 / sums[r].1 as f64;
        }
    }
}

/// Descending modulus; eigenvalues whose moduli agree to `1e-12` relative
/// are ordered by phase in `(-pi, pi]`.
pub fn sort_spectrum(ev: &mut [C64]) {
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
    let mut start = 0;
    while start < ev.len() {
        let mut end = start + 1;
        while end < ev.len() && (ev[end - 1].norm() - ev[end].norm()).abs() <= 1e-12 * ev[start].norm().max(1e-300) {
            end += 1;
        }
        ev[start..end].sort_by(|a, b| phase(*a).total_cmp(&phase(*b)));
        start = end;
    }
}

fn phase(z: C64) -> f64 {
    let p = z.arg();
    if p == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        p
    }
}

/// Compares two spectra as multisets.
///
/// Defective zero eigenvalues scatter far above machine precision, so
/// eigenvalues below `zero_cut` (relative to the largest modulus) are only
/// counted, while the rest are matched one to one within `rel_tol`.
pub fn spectra_match(a: &[C64], b: &[C64], rel_tol: f64, zero_cut: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let scale = a.iter().chain(b).map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let big = |v: &[C64]| -> Vec<C64> { v.iter().copied().filter(|z| z.norm() > zero_cut * scale).collect() };
    let (ba, mut bb) = (big(a), big(b));
    if ba.len() != bb.len() {
        return false;
    }
    for z in ba {
        let best = bb
            .iter()
            .enumerate()
            .min_by(|x, y| (*x.1 - z).norm().total_cmp(&(*y.1 - z).norm()));
        match best {
            Some((k, w)) if (*w - z).norm() <= rel_tol * scale => {
                bb.swap_remove(k);
            }
            _ => return false,
        }
    }
    true
}

/// Settings for [`arnoldi_largest`].
#[derive(Clone, Copy, Debug)]
pub struct ArnoldiOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        ArnoldiOptions { krylov_dim: 60, max_restarts: 400, tol: 1e-12, seed: 7 }
    }
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `k` largest-modulus eigenvalues of the operator behind `matvec`, using
/// explicitly restarted Arnoldi. Only matrix-vector products are needed.
pub fn arnoldi_largest<F>(matvec: F, dim: usize, k: usize, opts: ArnoldiOptions) -> Result<Vec<C64>>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    if k == 0 || dim == 0 {
        return Ok(Vec::new());
    }
    let m = opts.krylov_dim.max(2 * k + 10).min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<C64> = (0..dim).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();

    for _ in 0..opts.max_restarts {
        let nv = norm(&start);
        let mut basis: Vec<Vec<C64>> = vec![start.iter().map(|z| z / nv).collect()];
        let mut h = DMatrix::<C64>::zeros(m + 1, m);
        let mut steps = m;
        for j in 0..m {
            let mut w = matvec(&basis[j]);
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(v, &w);
                    h[(i, j)] += c;
                    for (wt, vt) in w.iter_mut().zip(v) {
                        *wt -= c * vt;
                    }
                }
            }
            let hn = norm(&w);
            h[(j + 1, j)] = C64::new(hn, 0.0);
            if hn < 1e-14 {
                steps = j + 1;
                break;
            }
            if j + 1 < m {
                basis.push(w.iter().map(|z| z / hn).collect());
            }
        }
        let hm = h.view((0, 0), (steps, steps)).into_owned();
        let schur = nalgebra::linalg::Schur::new(hm.clone());
        let ritz: Vec<C64> = schur
            .eigenvalues()
            .ok_or_else(|| Error::NoConvergence("Hessenberg Schur".into()))?
            .iter()
            .copied()
            .collect();
        let mut order: Vec<usize> = (0..ritz.len()).collect();
        order.sort_by(|&a, &b| ritz[b].norm().total_cmp(&ritz[a].norm()));
        let want = k.min(ritz.len());

        // residual estimates |h_{m+1,m}| |e_m^T y| for each wanted Ritz pair
        let beta = if steps < h.nrows() { h[(steps, steps - 1)].norm() } else { 0.0 };
        let mut converged = true;
        let mut combo = vec![C64::new(0.0, 0.0); steps];
        for &idx in order.iter().take(want) {
            let y = ritz_vector(&hm, ritz[idx])?;
            let res = beta * y[steps - 1].norm();
            if res > opts.tol * ritz[idx].norm().max(1e-300) {
                converged = false;
            }
            for (c, yi) in combo.iter_mut().zip(y.iter()) {
                *c += yi;
            }
        }
        if converged || steps < m {
            let mut out: Vec<C64> = order.iter().take(want).map(|&i| ritz[i]).collect();
            sort_spectrum(&mut out);
            return Ok(out);
        }
        start = vec![C64::new(0.0, 0.0); dim];
        for (c, v) in combo.iter().zip(&basis) {
            for (s, vt) in start.iter_mut().zip(v) {
                *s += c * vt;
            }
        }
    }
    Err(Error::NoConvergence(format!("Arnoldi after {} restarts", opts.max_restarts)))
}

/// Unit eigenvector of a small dense matrix for a known eigenvalue, by
/// inverse iteration.
fn ritz_vector(h: &DMatrix<C64>, lambda: C64) -> Result<DVector<C64>> {
    let n = h.nrows();
    let shift = lambda + C64::new(1e-10, 1e-10) * lambda.norm().max(1.0);
    let a = h - DMatrix::<C64>::identity(n, n) * shift;
    let lu = a.lu();
    let mut y = DVector::<C64>::from_element(n, C64::new(1.0, 0.0));
    for _ in 0..3 {
        y = lu.solve(&y).ok_or_else(|| Error::Singular("inverse iteration".into()))?;
        let nn = y.norm();
        y /= C64::new(nn, 0.0);
    }
    Ok(y)
}
