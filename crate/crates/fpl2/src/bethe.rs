//! Nested Bethe equations for the FPL² transfer matrix.
//!
//! Roots `u^(i)_k`, `i = 1, 2, 3`, enter through
//! `Q^(i)(u) = prod_k sin(gamma (u - u^(i)_k))`. The equations read
//!
//! ```text
//! -Q(i+1)(u+1)/Q(i+1)(u) * Q(i)(u-1)/Q(i)(u+1) * Q(i-1)(u)/Q(i-1)(u-1) = f(i)(u)/f(i+1)(u)
//! ```
//!
//! with the twist `omega^(i) = (1/a, 1/a, a, a)` carried by `f^(i)` only.
//! Internally `gamma` is complex so that roots can be continued around the
//! free-fermion point.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::couplings::CouplingSet;
use crate::error::{Error, Result};
use crate::transfer::ChargeVector;

/// Convergence threshold on the max-norm of `LHS/RHS - 1`.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    pub roots: [Vec<C64>; 3],
    pub gamma: f64,
    pub width: usize,
    /// Branch integers `J` of the logarithmic equations, when known.
    pub branch_integers: Option<[Vec<f64>; 3]>,
}

impl RootSet {
    pub fn empty(gamma: f64, width: usize) -> Self {
        RootSet { roots: [Vec::new(), Vec::new(), Vec::new()], gamma, width, branch_integers: None }
    }

    pub fn new(roots: [Vec<C64>; 3], gamma: f64, width: usize) -> Self {
        let mut rs = RootSet { roots, gamma, width, branch_integers: None };
        rs.sort();
        rs
    }

    pub fn counts(&self) -> [usize; 3] {
        [self.roots[0].len(), self.roots[1].len(), self.roots[2].len()]
    }

    pub fn sector(&self) -> ChargeVector {
        ChargeVector::from_root_counts(self.width, self.counts())
    }

    /// Canonical order: by real part, then imaginary part.
    pub fn sort(&mut self) {
        for level in &mut self.roots {
            level.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        }
    }
}

/// Evaluator for the three Q-functions, with `Q^(0) = Q^(4) = 1`.
#[derive(Clone, Copy, Debug)]
pub struct QFunctionSet<'a> {
    roots: &'a [Vec<C64>; 3],
    g: C64,
}

impl<'a> QFunctionSet<'a> {
    pub fn new(rs: &'a RootSet) -> Self {
        QFunctionSet { roots: &rs.roots, g: C64::new(rs.gamma, 0.0) }
    }

    fn with_gamma(roots: &'a [Vec<C64>; 3], g: C64) -> Self {
        QFunctionSet { roots, g }
    }

    /// `Q^(i)(u)` for `i` in `0..=4`.
    pub fn eval(&self, i: usize, u: C64) -> C64 {
        if i == 0 || i >= 4 {
            return C64::new(1.0, 0.0);
        }
        self.roots[i - 1].iter().map(|r| (self.g * (u - r)).sin()).product()
    }
}

/// Couplings as seen by the equations; `g` may leave the real axis.
#[derive(Clone, Copy, Debug)]
struct Params {
    g: C64,
    a: C64,
    width: usize,
}

impl Params {
    fn real(gamma: f64, width: usize) -> Self {
        Params::complex(C64::new(gamma, 0.0), width)
    }

    fn complex(g: C64, width: usize) -> Self {
        Params { g, a: (C64::i() * g).exp(), width }
    }

    fn sin(&self, z: C64) -> C64 {
        (self.g * z).sin()
    }

    /// `gamma cot(gamma z)`
    fn ct(&self, z: C64) -> C64 {
        let x = self.g * z;
        self.g * x.cos() / x.sin()
    }

    fn twist(&self, i: usize) -> C64 {
        if i <= 2 {
            self.a.inv()
        } else {
            self.a
        }
    }

    /// `f^(i)(u)` for `i` in `1..=4`.
    fn f(&self, i: usize, u: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        let l = self.width as i32;
        let base = match i {
            1 => self.sin(u) * self.sin(u - one),
            2 | 3 => self.sin(u + one) * self.sin(u - one),
            _ => self.sin(u + one) * self.sin(u),
        };
        self.twist(i) * base.powi(l)
    }

    /// `d/du log f^(i)(u)`
    fn dlog_f(&self, i: usize, u: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        let l = self.width as f64;
        let s = match i {
            1 => self.ct(u) + self.ct(u - one),
            2 | 3 => self.ct(u + one) + self.ct(u - one),
            _ => self.ct(u + one) + self.ct(u),
        };
        s * l
    }
}

fn check_distinct(roots: &[Vec<C64>; 3], p: &Params) -> Result<()> {
    for level in roots {
        for (k, x) in level.iter().enumerate() {
            for y in &level[k + 1..] {
                if p.sin(x - y).norm() < 1e-10 {
                    return Err(Error::Singular(format!("coincident roots {x} and {y}")));
                }
            }
        }
    }
    Ok(())
}

/// `(LHS, RHS)` of every equation, ordered level by level.
fn sides(roots: &[Vec<C64>; 3], p: &Params) -> Result<Vec<(C64, C64)>> {
    check_distinct(roots, p)?;
    let q = QFunctionSet::with_gamma(roots, p.g);
    let one = C64::new(1.0, 0.0);
    let mut out = Vec::new();
    for i in 1..=3 {
        for &u in &roots[i - 1] {
            let den = [q.eval(i + 1, u), q.eval(i, u + one), q.eval(i - 1, u - one), p.f(i + 1, u)];
            if den.iter().any(|d| d.norm() < 1e-300) {
                return Err(Error::Singular(format!("root {u} sits on a zero of a denominator")));
            }
            let lhs = -(q.eval(i + 1, u + one) / den[0]) * (q.eval(i, u - one) / den[1]) * (q.eval(i - 1, u) / den[2]);
            out.push((lhs, p.f(i, u) / den[3]));
        }
    }
    Ok(out)
}

/// `LHS - RHS` of every equation, level by level.
pub fn bae_residual(rs: &RootSet) -> Result<Vec<C64>> {
    Ok(sides(&rs.roots, &Params::real(rs.gamma, rs.width))?.into_iter().map(|(l, r)| l - r).collect())
}

/// `LHS/RHS - 1`, the scale-free form the solver drives to zero.
pub fn bae_ratio_residual(rs: &RootSet) -> Result<Vec<C64>> {
    ratio_residual(&rs.roots, &Params::real(rs.gamma, rs.width))
}

fn ratio_residual(roots: &[Vec<C64>; 3], p: &Params) -> Result<Vec<C64>> {
    Ok(sides(roots, p)?.into_iter().map(|(l, r)| l / r - 1.0).collect())
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Residual `rho - 1` and its holomorphic Jacobian.
fn residual_and_jacobian(roots: &[Vec<C64>; 3], p: &Params) -> Result<(Vec<C64>, DMatrix<C64>)> {
    let f = ratio_residual(roots, p)?;
    let m = [roots[0].len(), roots[1].len(), roots[2].len()];
    let offset = [0, m[0], m[0] + m[1]];
    let n = m.iter().sum();
    let one = C64::new(1.0, 0.0);
    let mut jac = DMatrix::<C64>::zeros(n, n);
    for i in 0..3 {
        for (k, &u) in roots[i].iter().enumerate() {
            let row = offset[i] + k;
            let mut own = p.dlog_f(i + 2, u) - p.dlog_f(i + 1, u);
            // (level, shift a, shift b): term log Q(u + a - v) - log Q(u + b - v)
            let terms: [(Option<usize>, f64, f64); 3] = [
                (if i < 2 { Some(i + 1) } else { None }, 1.0, 0.0),
                (Some(i), -1.0, 1.0),
                (if i > 0 { Some(i - 1) } else { None }, 0.0, -1.0),
            ];
            for (lev, sa, sb) in terms {
                let Some(lev) = lev else { continue };
                for (kk, &v) in roots[lev].iter().enumerate() {
                    if lev == i && kk == k {
                        continue;
                    }
                    let d = p.ct(u + sa * one - v) - p.ct(u + sb * one - v);
                    own += d;
                    jac[(row, offset[lev] + kk)] -= d;
                }
            }
            jac[(row, row)] += own;
            let rho = f[row] + 1.0;
            for c in 0..n {
                jac[(row, c)] *= rho;
            }
        }
    }
    Ok((f, jac))
}

/// Damped complex Newton on `rho - 1`.
fn newton(roots: &[Vec<C64>; 3], p: &Params, max_iter: usize) -> Result<[Vec<C64>; 3]> {
    let m = [roots[0].len(), roots[1].len(), roots[2].len()];
    let split = |z: &[C64]| [z[..m[0]].to_vec(), z[m[0]..m[0] + m[1]].to_vec(), z[m[0] + m[1]..].to_vec()];
    let mut z: Vec<C64> = roots.iter().flatten().copied().collect();
    if z.is_empty() {
        return Ok(roots.clone());
    }
    for _ in 0..max_iter {
        let cur = split(&z);
        let (f, jac) = residual_and_jacobian(&cur, p)?;
        let fnorm = max_norm(&f);
        if fnorm < RESIDUAL_TOL {
            return Ok(cur);
        }
        let step = jac
            .lu()
            .solve(&DVector::from_iterator(f.len(), f.iter().map(|x| -x)))
            .ok_or_else(|| Error::Singular("Bethe Jacobian".into()))?;
        let mut lam = 1.0;
        loop {
            let trial: Vec<C64> = z.iter().zip(step.iter()).map(|(a, d)| a + d * lam).collect();
            let ok = ratio_residual(&split(&trial), p).map(|r| max_norm(&r)).unwrap_or(f64::INFINITY);
            if ok.is_finite() && ok < fnorm * (1.0 - 1e-4 * lam) {
                z = trial;
                break;
            }
            lam *= 0.5;
            if lam < 1e-8 {
                return Err(Error::NoConvergence(format!("line search stalled at residual {fnorm:.3e}")));
            }
        }
    }
    let f = ratio_residual(&split(&z), p)?;
    if max_norm(&f) < RESIDUAL_TOL {
        return Ok(split(&z));
    }
    Err(Error::NoConvergence(format!("Newton after {max_iter} iterations, residual {:.3e}", max_norm(&f))))
}

/// Continuation step along `gamma` (or a fixed coupling) from a seed.
#[derive(Clone, Debug)]
pub enum Schedule {
    /// Solve directly at the target coupling.
    Direct,
    /// Intermediate `gamma` values, monotone, ending anywhere; the target
    /// coupling is appended.
    Gamma(Vec<f64>),
}

/// Refines `seed` at the coupling `cpl`, optionally continuing in `gamma`.
/// Failed steps are halved down to a floor of `1e-6`.
pub fn solve(seed: &RootSet, cpl: &CouplingSet, schedule: &Schedule) -> Result<RootSet> {
    let mut path: Vec<f64> = match schedule {
        Schedule::Direct => Vec::new(),
        Schedule::Gamma(v) => v.clone(),
    };
    path.push(cpl.gamma);
    let mut cur_g = seed.gamma;
    let mut roots = seed.roots.clone();
    for target in path {
        let mut h = target - cur_g;
        if h == 0.0 {
            roots = newton(&roots, &Params::real(target, seed.width), 100)?;
            continue;
        }
        while (target - cur_g).abs() > 0.0 {
            let next = if (target - cur_g).abs() <= h.abs() { target } else { cur_g + h };
            match newton(&roots, &Params::real(next, seed.width), 60) {
                Ok(r) => {
                    roots = r;
                    cur_g = next;
                }
                Err(e) => {
                    h *= 0.5;
                    if h.abs() < 1e-6 {
                        return Err(e);
                    }
                }
            }
        }
    }
    let mut out = RootSet { roots, gamma: cpl.gamma, width: seed.width, branch_integers: seed.branch_integers.clone() };
    out.sort();
    Ok(out)
}

/// Continues roots along a path of complex `gamma` values with Newton at
/// each point. Used to follow the ground state around the free-fermion
/// point `gamma = pi/2`, where the real-root family ends.
pub fn continue_complex(seed: &RootSet, path: &[C64]) -> Result<[Vec<C64>; 3]> {
    let mut roots = seed.roots.clone();
    for &g in path {
        roots = newton(&roots, &Params::complex(g, seed.width), 60)?;
    }
    Ok(roots)
}

/// `theta_alpha(x) = 2 atan(tanh(gamma x) cot(gamma alpha / 2))`.
fn theta(alpha: f64, g: f64, x: f64) -> f64 {
    let h = g * alpha / 2.0;
    2.0 * (h.cos() * (g * x).sinh()).atan2(h.sin() * (g * x).cosh())
}

fn dtheta(alpha: f64, g: f64, x: f64) -> f64 {
    2.0 * g * (g * alpha).sin() / ((2.0 * g * x).cosh() - (g * alpha).cos())
}

/// Ground-state branch integers `J_k = k - (m - 1)/2` on each level.
pub fn ground_state_branches(m: usize) -> Vec<f64> {
    (0..m).map(|k| k as f64 - (m as f64 - 1.0) / 2.0).collect()
}

/// Log-form equations for roots on the lines `Re u = -1/2, 0, 1/2`
/// (`u1 = -1/2 + i y1`, `u2 = i y2`, `u3 = 1/2 + i y3`).
fn log_form(g: f64, width: usize, y: &[[f64; 3]], j: &[[f64; 3]]) -> (Vec<f64>, DMatrix<f64>) {
    let m = y.len();
    let l = width as f64;
    let mut f = vec![0.0; 3 * m];
    let mut jac = DMatrix::<f64>::zeros(3 * m, 3 * m);
    let idx = |lev: usize, k: usize| lev * m + k;
    for k in 0..m {
        for lev in 0..3 {
            let yk = y[k][lev];
            let row = idx(lev, k);
            let mut v = -2.0 * PI * j[k][lev];
            let mut own = 0.0;
            if lev != 1 {
                v += l * theta(1.0, g, yk);
                own += l * dtheta(1.0, g, yk);
                for kk in 0..m {
                    let x = yk - y[kk][1];
                    v += theta(1.0, g, x);
                    own += dtheta(1.0, g, x);
                    jac[(row, idx(1, kk))] -= dtheta(1.0, g, x);
                }
            } else {
                v += 2.0 * g;
                for side in [0, 2] {
                    for kk in 0..m {
                        let x = yk - y[kk][side];
                        v += theta(1.0, g, x);
                        own += dtheta(1.0, g, x);
                        jac[(row, idx(side, kk))] -= dtheta(1.0, g, x);
                    }
                }
            }
            for kk in 0..m {
                if kk == k {
                    continue;
                }
                let x = yk - y[kk][lev];
                v -= theta(2.0, g, x);
                own -= dtheta(2.0, g, x);
                jac[(row, idx(lev, kk))] += dtheta(2.0, g, x);
            }
            jac[(row, row)] += own;
            f[row] = v;
        }
    }
    (f, jac)
}

/// Ground state of the sector `m = (L, L, L)` from the logarithmic
/// equations with symmetric branch integers. Exists for `0 < gamma < pi/2`.
///
/// `seed` may be a ground state at another width; its roots are
/// interpolated onto the new branch integers.
pub fn solve_ground_state(cpl: &CouplingSet, width: usize, seed: Option<&RootSet>) -> Result<RootSet> {
    let g = cpl.gamma;
    if width == 0 {
        return Err(Error::Domain("width must be positive".into()));
    }
    if !(1e-9..PI / 2.0 - 1e-9).contains(&g) {
        return Err(Error::Domain(format!(
            "real-root ground state needs 0 < gamma < pi/2, got {g}; use continue_complex for n <= 0"
        )));
    }
    let m = width;
    let jj = ground_state_branches(m);
    let j: Vec<[f64; 3]> = jj.iter().map(|&x| [x; 3]).collect();
    let mut y: Vec<[f64; 3]> = match seed {
        Some(s) => interpolate_seed(s, width)?,
        None => {
            let scale = 2.0 * ((width + 1) as f64).ln() / width as f64;
            jj.iter().map(|&x| [x * scale; 3]).collect()
        }
    };
    let flat = |y: &[[f64; 3]]| -> Vec<f64> { (0..3).flat_map(|lev| y.iter().map(move |r| r[lev])).collect() };
    let unflat = |v: &[f64]| -> Vec<[f64; 3]> { (0..m).map(|k| [v[k], v[m + k], v[2 * m + k]]).collect() };
    let norm = |f: &[f64]| f.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut converged = false;
    for _ in 0..200 {
        let (f, jac) = log_form(g, width, &y, &j);
        if f.iter().all(|x| x.abs() < 1e-13) {
            converged = true;
            break;
        }
        let step = jac
            .lu()
            .solve(&DVector::from_iterator(f.len(), f.iter().map(|x| -x)))
            .ok_or_else(|| Error::Singular("log-form Jacobian".into()))?;
        let (x0, n0) = (flat(&y), norm(&f));
        let mut lam = 1.0;
        loop {
            let trial: Vec<f64> = x0.iter().zip(step.iter()).map(|(a, d)| a + lam * d).collect();
            let ty = unflat(&trial);
            let (ft, _) = log_form(g, width, &ty, &j);
            if norm(&ft) < n0 * (1.0 - 1e-4 * lam) || lam < 1e-6 {
                y = ty;
                break;
            }
            lam *= 0.5;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!("ground state at L = {width}, gamma = {g}")));
    }
    let roots = [
        y.iter().map(|r| C64::new(-0.5, r[0])).collect(),
        y.iter().map(|r| C64::new(0.0, r[1])).collect(),
        y.iter().map(|r| C64::new(0.5, r[2])).collect(),
    ];
    let mut rs = RootSet { roots, gamma: g, width, branch_integers: Some([jj.clone(), jj.clone(), jj]) };
    rs.sort();
    let res = max_norm(&bae_ratio_residual(&rs)?);
    if res > 1e-10 {
        return Err(Error::NoConvergence(format!("ground state residual {res:.3e} in product form")));
    }
    Ok(rs)
}

/// Maps a ground state at one width onto the branch integers of another by
/// interpolating each level in `J / m`, rescaled like the default guess.
fn interpolate_seed(seed: &RootSet, width: usize) -> Result<Vec<[f64; 3]>> {
    let ms = seed.counts();
    if ms.iter().any(|&k| k != ms[0]) || ms[0] == 0 {
        return Err(Error::Domain("seed must have equal, nonzero root counts".into()));
    }
    let (m0, m1) = (ms[0], width);
    let scale = |l: usize| ((l + 1) as f64).ln() / l as f64;
    let factor = scale(m1) / scale(seed.width.max(1));
    let mut out = vec![[0.0; 3]; m1];
    for lev in 0..3 {
        let mut ys: Vec<f64> = seed.roots[lev].iter().map(|z| z.im).collect();
        ys.sort_by(f64::total_cmp);
        let xs: Vec<f64> = (0..m0).map(|k| (k as f64 + 0.5) / m0 as f64).collect();
        for (k, slot) in out.iter_mut().enumerate() {
            let x = (k as f64 + 0.5) / m1 as f64;
            let v = if m0 == 1 {
                ys[0]
            } else {
                let p = xs.partition_point(|&t| t < x).clamp(1, m0 - 1);
                let (xa, xb, ya, yb) = (xs[p - 1], xs[p], ys[p - 1], ys[p]);
                ya + (yb - ya) * (x - xa) / (xb - xa)
            };
            slot[lev] = v * factor;
        }
    }
    Ok(out)
}

/// Eigenvalue data of a root set at `u = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenvalue {
    /// Three-term form.
    pub t: C64,
    /// Perfect-square form of the same quantity.
    pub t_square: C64,
    /// One-row factors; `t_fund * t_conj = t sin(gamma)^(4L)`.
    pub t_fund: C64,
    pub t_conj: C64,
}

pub fn eigenvalue_t(rs: &RootSet) -> Result<Eigenvalue> {
    eigenvalue_at(&rs.roots, &Params::real(rs.gamma, rs.width))
}

fn eigenvalue_at(roots: &[Vec<C64>; 3], p: &Params) -> Result<Eigenvalue> {
    let q = QFunctionSet::with_gamma(roots, p.g);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let (q1m, q10) = (q.eval(1, -one), q.eval(1, zero));
    let (q2p, q20, q2m) = (q.eval(2, one), q.eval(2, zero), q.eval(2, -one));
    let (q30, q3p) = (q.eval(3, zero), q.eval(3, one));
    if [q10, q1m, q20, q30, q3p].iter().any(|z| z.norm() < 1e-300) {
        return Err(Error::Domain("a Q-function vanishes where the eigenvalue needs it".into()));
    }
    let a2 = p.a * p.a;
    let t = 2.0 * q2p * q2m / (q20 * q20)
        + (q2p / q20).powi(2) * (q1m / q10) * (q30 / q3p) / a2
        + a2 * (q2m / q20).powi(2) * (q10 / q1m) * (q3p / q30);
    let r = ((q1m * q30) / (q10 * q3p)).sqrt();
    let t_square = (q2p / q20 * r / p.a + p.a * q2m / q20 / r).powi(2);
    // X^(1), X^(4) vanish at u = 0
    let (f2, f3) = (p.f(2, zero), p.f(3, zero));
    let t_fund = q1m / q10 * q2p / q20 * f2 + q2m / q20 * q3p / q30 * f3;
    let t_conj = q10 / q1m * q2m / q20 * f3 + q2p / q20 * q30 / q3p * f2;
    Ok(Eigenvalue { t, t_square, t_fund, t_conj })
}

/// Notation `(u_k, v_k, w_k)` with `u = 2i(u1 + 1/2)`, `v = 2i(u3 - 1/2)`,
/// `w = 2i u2`.
pub fn notation_map(rs: &RootSet) -> [Vec<C64>; 3] {
    let i2 = C64::new(0.0, 2.0);
    [
        rs.roots[0].iter().map(|z| i2 * (z + 0.5)).collect(),
        rs.roots[2].iter().map(|z| i2 * (z - 0.5)).collect(),
        rs.roots[1].iter().map(|z| i2 * z).collect(),
    ]
}

pub fn notation_inverse(uvw: &[Vec<C64>; 3], gamma: f64, width: usize) -> RootSet {
    let i2 = C64::new(0.0, 2.0);
    RootSet::new(
        [
            uvw[0].iter().map(|z| z / i2 - 0.5).collect(),
            uvw[2].iter().map(|z| z / i2).collect(),
            uvw[1].iter().map(|z| z / i2 + 0.5).collect(),
        ],
        gamma,
        width,
    )
}

/// Reduces each root modulo the period `pi/gamma` into a window centred on
/// its level's natural line (`-1/2, 0, 1/2`).
pub fn canonicalize(rs: &mut RootSet) {
    let period = PI / rs.gamma;
    for (lev, centre) in [-0.5, 0.0, 0.5].into_iter().enumerate() {
        for z in &mut rs.roots[lev] {
            let shift = ((z.re - centre) / period).round();
            z.re -= shift * period;
        }
    }
    rs.sort();
}

/// Root map relating the spectra at `n` and `-n` (`gamma -> pi - gamma`):
/// `u1 -> k (u1 + 1)`, `u2 -> k u2`, `u3 -> k (u3 - 1)`, `k = gamma / (pi - gamma)`.
/// An involution modulo the root period.
pub fn n_flip(rs: &RootSet) -> Result<RootSet> {
    let g = rs.gamma;
    if g <= 1e-12 || g >= PI - 1e-12 {
        return Err(Error::Domain("the n -> -n map is degenerate at gamma = 0 or pi".into()));
    }
    let gp = PI - g;
    let k = g / gp;
    let roots = [
        rs.roots[0].iter().map(|z| (z + 1.0) * k).collect(),
        rs.roots[1].iter().map(|z| z * k).collect(),
        rs.roots[2].iter().map(|z| (z - 1.0) * k).collect(),
    ];
    let mut out = RootSet { roots, gamma: gp, width: rs.width, branch_integers: None };
    canonicalize(&mut out);
    Ok(out)
}

/// A converged solution found by [`solve_sector`].
#[derive(Clone, Debug)]
pub struct Solution {
    pub roots: RootSet,
    pub eigenvalue: C64,
    pub residual: f64,
}

/// Multistart search for all solutions with root counts `m`. Starting
/// points are drawn from a fixed-seed generator, so the result is
/// reproducible. Solutions are deduplicated by eigenvalue.
pub fn solve_sector(cpl: &CouplingSet, width: usize, m: [usize; 3], tries: usize, seed: u64) -> Result<Vec<Solution>> {
    let p = Params::real(cpl.gamma, width);
    if m.iter().all(|&k| k == 0) {
        let rs = RootSet::empty(cpl.gamma, width);
        let ev = eigenvalue_t(&rs)?;
        return Ok(vec![Solution { roots: rs, eigenvalue: ev.t, residual: 0.0 }]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<Solution> = Vec::new();
    for _ in 0..tries {
        let start: [Vec<C64>; 3] = m.map(|k| {
            (0..k).map(|_| C64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))).collect()
        });
        let Ok(roots) = newton(&start, &p, 80) else { continue };
        let mut rs = RootSet { roots, gamma: cpl.gamma, width, branch_integers: None };
        canonicalize(&mut rs);
        let Ok(res) = bae_ratio_residual(&rs) else { continue };
        let res = max_norm(&res);
        if res > 1e-10 || rs.roots.iter().flatten().any(|z| !z.is_finite() || z.im.abs() > 30.0) {
            continue;
        }
        let Ok(ev) = eigenvalue_t(&rs) else { continue };
        if !ev.t.is_finite() {
            continue;
        }
        // singular solutions come in continuous families, so roots are not a usable key
        let dup = found.iter().any(|s| (s.eigenvalue - ev.t).norm() < 1e-7 * ev.t.norm().max(1.0));
        if !dup {
            found.push(Solution { roots: rs, eigenvalue: ev.t, residual: res });
        }
    }
    found.sort_by(|a, b| {
        b.eigenvalue.norm().total_cmp(&a.eigenvalue.norm()).then(a.eigenvalue.arg().total_cmp(&b.eigenvalue.arg()))
    });
    Ok(found)
}

/// The real-root ground state followed from `gamma0 < pi/2` to the coupling
/// `cpl` through complex `gamma` along a half circle of the given radius
/// around `pi/2`. Returns the continued roots (at real `gamma` only at the
/// end of the path) and their eigenvalue.
pub fn continued_ground_state(cpl: &CouplingSet, width: usize, radius: f64, steps: usize) -> Result<(RootSet, C64)> {
    let centre = PI / 2.0;
    let g_target = cpl.gamma;
    if !(radius > 0.0 && radius < centre && g_target > centre && g_target < PI) {
        return Err(Error::Domain(format!(
            "continuation needs pi/2 < gamma < pi and 0 < radius < pi/2, got gamma = {g_target}, radius = {radius}"
        )));
    }
    let start = CouplingSet::from_gamma(centre - radius, cpl.omega_branch)?;
    let gs = solve_ground_state(&start, width, None)?;
    let mut path: Vec<C64> = (1..=steps)
        .map(|k| {
            let th = PI * (1.0 - k as f64 / steps as f64);
            C64::new(centre, 0.0) + C64::from_polar(radius, th)
        })
        .collect();
    let tail = (steps / 4).max(1);
    path.extend((1..=tail).map(|k| C64::new(centre + radius + (g_target - centre - radius) * k as f64 / tail as f64, 0.0)));
    let roots = continue_complex(&gs, &path)?;
    let mut rs = RootSet { roots, gamma: g_target, width, branch_integers: None };
    rs.sort();
    let ev = eigenvalue_t(&rs)?;
    Ok((rs, ev.t))
}

/// Serialised form of a root set.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RootSetRecord {
    pub gamma: f64,
    pub width: usize,
    pub counts: [usize; 3],
    /// `[re, im]` pairs per level.
    pub roots: [Vec<[f64; 2]>; 3],
    pub branch_integers: Option<[Vec<f64>; 3]>,
    pub residual: f64,
    pub eigenvalue: [f64; 2],
}

/// Rounds to 15 significant digits so serialised output is stable.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

impl RootSetRecord {
    pub fn from_roots(rs: &RootSet) -> Result<Self> {
        let residual = max_norm(&bae_ratio_residual(rs)?);
        let ev = eigenvalue_t(rs)?.t;
        Ok(RootSetRecord {
            gamma: round15(rs.gamma),
            width: rs.width,
            counts: rs.counts(),
            roots: rs.roots.clone().map(|lev| lev.iter().map(|z| [round15(z.re), round15(z.im)]).collect()),
            branch_integers: rs.branch_integers.clone(),
            residual: round15(residual),
            eigenvalue: [round15(ev.re), round15(ev.im)],
        })
    }

    pub fn to_roots(&self) -> Result<RootSet> {
        let roots = self.roots.clone().map(|lev| lev.iter().map(|p| C64::new(p[0], p[1])).collect::<Vec<_>>());
        let counts = [roots[0].len(), roots[1].len(), roots[2].len()];
        if counts != self.counts {
            return Err(Error::Config(format!("root counts {:?} disagree with lists {counts:?}", self.counts)));
        }
        Ok(RootSet { roots, gamma: self.gamma, width: self.width, branch_integers: self.branch_integers.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cpl(n: f64) -> CouplingSet {
        CouplingSet::from_n(n, 0).unwrap()
    }

    #[test]
    fn empty_set() {
        let c = cpl(0.7);
        let rs = RootSet::empty(c.gamma, 3);
        assert!(bae_residual(&rs).unwrap().is_empty());
        let ev = eigenvalue_t(&rs).unwrap();
        assert!((ev.t - 0.49).norm() < 1e-14);
    }

    #[test]
    fn theta_derivative() {
        for (al, g, x) in [(1.0, 0.9, 0.3), (2.0, 0.4, -1.2)] {
            let h = 1e-6;
            let fd = (theta(al, g, x + h) - theta(al, g, x - h)) / (2.0 * h);
            assert!((fd - dtheta(al, g, x)).abs() < 1e-8);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = Params::real(0.8, 2);
        let roots = [
            vec![C64::new(-0.4, 0.3), C64::new(-0.6, -0.2)],
            vec![C64::new(0.1, 0.5)],
            vec![C64::new(0.45, -0.1)],
        ];
        let (f, jac) = residual_and_jacobian(&roots, &p).unwrap();
        let h = 1e-7;
        let flat: Vec<C64> = roots.iter().flatten().copied().collect();
        let m = [2, 1, 1];
        for c in 0..flat.len() {
            let mut z = flat.clone();
            z[c] += h;
            let r = [z[..m[0]].to_vec(), z[m[0]..m[0] + m[1]].to_vec(), z[m[0] + m[1]..].to_vec()];
            let f2 = ratio_residual(&r, &p).unwrap();
            for row in 0..f.len() {
                let fd = (f2[row] - f[row]) / h;
                assert!((fd - jac[(row, c)]).norm() < 1e-5 * (1.0 + fd.norm()), "({row},{c}) {fd} {}", jac[(row, c)]);
            }
        }
    }

    #[test]
    fn ground_state_l1_is_nine_at_n_one() {
        let rs = solve_ground_state(&cpl(1.0), 1, None).unwrap();
        let ev = eigenvalue_t(&rs).unwrap();
        assert!((ev.t - 9.0).norm() < 1e-10, "{}", ev.t);
        assert!(max_norm(&bae_ratio_residual(&rs).unwrap()) < 1e-12);
    }

    #[test]
    fn square_and_one_row_forms() {
        let rs = solve_ground_state(&cpl(0.7), 3, None).unwrap();
        let ev = eigenvalue_t(&rs).unwrap();
        assert!((ev.t - ev.t_square).norm() < 1e-12 * ev.t.norm());
        let s = rs.gamma.sin().powi(4 * 3);
        assert!((ev.t_fund * ev.t_conj / s - ev.t).norm() < 1e-10 * ev.t.norm());
    }

    #[test]
    fn notation_examples() {
        let rs = RootSet::new([vec![C64::new(-0.5, 0.0)], vec![C64::new(0.0, 0.0)], vec![]], 1.0, 1);
        let uvw = notation_map(&rs);
        assert_eq!(uvw[0][0], C64::new(0.0, 0.0));
        assert_eq!(uvw[2][0], C64::new(0.0, 0.0));
        let back = notation_inverse(&uvw, 1.0, 1);
        assert_eq!(back, rs);
    }

    #[test]
    fn round15_is_stable() {
        assert_eq!(round15(1.0 / 3.0), 0.333333333333333);
        assert_eq!(round15(round15(2f64.sqrt())), round15(2f64.sqrt()));
    }
}
