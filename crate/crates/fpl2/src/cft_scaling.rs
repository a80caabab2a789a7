//! Closed-form CFT data and finite-size scaling fits.
//!
//! The leading eigenvalue behaves as `log t0(L) = -L f0 + pi c / (6 L) + ...`,
//! excited states replace `c` by `c - 24 Delta`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::bethe;
use crate::couplings::{cartan_a3, CartanData, CouplingSet};
use crate::error::{Error, Result};
use crate::transfer::ChargeVector;

/// `c = 3 - 12 gamma^2 / (pi (pi - gamma))`.
pub fn central_charge_closed(gamma: f64) -> Result<f64> {
    let (general, special) = central_charge_forms(gamma)?;
    debug_assert!((general - special).abs() < 1e-12 * special.abs().max(1.0));
    Ok(special)
}

/// Both forms of the closed expression: the quadratic form in the twist
/// vector, `rank - 3 <w|C^-1|w> / (pi (pi - gamma))`, and the specialised one.
pub fn central_charge_forms(gamma: f64) -> Result<(f64, f64)> {
    if !(0.0..PI).contains(&gamma) {
        return Err(Error::Domain(format!("gamma = {gamma} outside [0, pi)")));
    }
    let cd = cartan_a3().with_fpl_twist(gamma);
    let inv = cd.inverse();
    let w = cd.twist_vector;
    let quad = quadratic(&inv, &w, &w);
    let general = cd.rank as f64 - 3.0 * quad / (PI * (PI - gamma));
    let special = 3.0 - 12.0 * gamma * gamma / (PI * (PI - gamma));
    Ok((general, special))
}

fn quadratic(g: &[[f64; 3]; 3], x: &[f64; 3], y: &[f64; 3]) -> f64 {
    (0..3).map(|i| (0..3).map(|j| x[i] * g[i][j] * y[j]).sum::<f64>()).sum()
}

/// Electric charge `e` in the fundamental-weight basis, magnetic charge `m`
/// in the simple-root basis, background `e0 = w / (2 pi)` in the weight basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CoulombCharge {
    pub e: [f64; 3],
    pub m: [f64; 3],
    pub e0: [f64; 3],
}

impl CoulombCharge {
    pub fn new(e: [f64; 3], m: [f64; 3], gamma: f64) -> Self {
        let w = cartan_a3().with_fpl_twist(gamma).twist_vector;
        CoulombCharge { e, m, e0: w.map(|x| x / (2.0 * PI)) }
    }

    pub fn on_lattice(&self) -> bool {
        let int = |v: &[f64; 3]| v.iter().all(|x| (x - x.round()).abs() < 1e-12);
        int(&self.e) && int(&self.m)
    }
}

/// `Delta = 1/4 <e|K^-1|e - 2 e0> + 1/4 <m|K|m>` with `K = (1 - gamma/pi) C / 2`.
/// Rejects charges off the weight and root lattices.
pub fn conformal_weight(ch: &CoulombCharge, gamma: f64) -> Result<f64> {
    if !ch.on_lattice() {
        return Err(Error::Domain(format!("charges e = {:?}, m = {:?} are not integral", ch.e, ch.m)));
    }
    conformal_weight_unchecked(ch, gamma)
}

/// The same quadratic form without the integrality check.
pub fn conformal_weight_unchecked(ch: &CoulombCharge, gamma: f64) -> Result<f64> {
    if !(0.0..PI).contains(&gamma) {
        return Err(Error::Domain(format!("gamma = {gamma} outside [0, pi)")));
    }
    let cd: CartanData = cartan_a3();
    let g = 1.0 - gamma / PI;
    let k = cd.cartan.map(|r| r.map(|x| 0.5 * g * f64::from(x)));
    let kinv = cd.inverse().map(|r| r.map(|x| 2.0 * x / g));
    let shifted = [0, 1, 2].map(|i| ch.e[i] - 2.0 * ch.e0[i]);
    Ok(0.25 * quadratic(&kinv, &ch.e, &shifted) + 0.25 * quadratic(&k, &ch.m, &ch.m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingTarget {
    Ground,
    Excited(ChargeVector),
}

/// `log |t(L)|` per width, widths strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSeries {
    pub entries: Vec<(usize, f64)>,
    pub target: ScalingTarget,
}

impl ScalingSeries {
    pub fn new(entries: Vec<(usize, f64)>, target: ScalingTarget) -> Result<Self> {
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Domain("widths must be strictly increasing".into()));
        }
        Ok(ScalingSeries { entries, target })
    }

    /// Entries with `l_min <= L <= l_max`.
    pub fn window(&self, l_min: usize, l_max: usize) -> ScalingSeries {
        ScalingSeries {
            entries: self.entries.iter().copied().filter(|(l, _)| (l_min..=l_max).contains(l)).collect(),
            target: self.target,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingFit {
    pub f0: f64,
    /// `c` for the ground state, `c - 24 Delta` for an excited state.
    pub coefficient: f64,
    /// Coefficient of `L^-3`, if that term was fitted.
    pub correction: Option<f64>,
    pub residual_norm: f64,
    /// `Delta`, for excited series given a ground-state fit.
    pub delta: Option<f64>,
}

/// Least squares of `log t` against `{-L, pi/(6L)}` and optionally `L^-3`.
pub fn fit_scaling(series: &ScalingSeries, with_l3: bool, ground: Option<&ScalingFit>) -> Result<ScalingFit> {
    let n = series.entries.len();
    let cols = if with_l3 { 3 } else { 2 };
    if n < 3 || n < cols {
        return Err(Error::Domain(format!("need at least 3 widths, got {n}")));
    }
    let a = DMatrix::from_fn(n, cols, |r, c| {
        let l = series.entries[r].0 as f64;
        match c {
            0 => -l,
            1 => PI / (6.0 * l),
            _ => l.powi(-3),
        }
    });
    let b = DVector::from_iterator(n, series.entries.iter().map(|e| e.1));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= smax * 1e-13 {
        return Err(Error::Singular("rank-deficient scaling design".into()));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::Singular(e.into()))?;
    let residual_norm = (&a * &x - &b).norm();
    let delta = match (series.target, ground) {
        (ScalingTarget::Excited(_), Some(g)) => Some((g.coefficient - x[1]) / 24.0),
        _ => None,
    };
    Ok(ScalingFit { f0: x[0], coefficient: x[1], correction: with_l3.then(|| x[2]), residual_norm, delta })
}

/// Ground-state series from the Bethe equations, each width warm-started
/// from the previous one.
pub fn ground_state_series(cpl: &CouplingSet, widths: &[usize]) -> Result<ScalingSeries> {
    let mut entries = Vec::with_capacity(widths.len());
    let mut prev: Option<bethe::RootSet> = None;
    for &l in widths {
        let rs = match prev.as_ref().map(|p| bethe::solve_ground_state(cpl, l, Some(p))) {
            Some(Ok(rs)) => rs,
            _ => bethe::solve_ground_state(cpl, l, None)?,
        };
        let t = bethe::eigenvalue_t(&rs)?.t;
        entries.push((l, t.norm().ln()));
        prev = Some(rs);
    }
    ScalingSeries::new(entries, ScalingTarget::Ground)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_agree() {
        for k in 0..50 {
            let g = PI * k as f64 / 50.0;
            let (a, b) = central_charge_forms(g).unwrap();
            assert!((a - b).abs() < 1e-14 * b.abs().max(1.0), "{g}");
        }
        assert_eq!(central_charge_closed(0.0).unwrap(), 3.0);
        assert!((central_charge_closed(PI / 3.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((central_charge_closed(PI / 4.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(central_charge_closed(PI).is_err());
    }

    #[test]
    fn weights() {
        let g = PI / 3.0;
        assert_eq!(conformal_weight(&CoulombCharge::new([0.0; 3], [0.0; 3], g), g).unwrap(), 0.0);
        let d = conformal_weight(&CoulombCharge::new([0.0; 3], [1.0, 0.0, 0.0], g), g).unwrap();
        assert!((d - (1.0 - g / PI) / 4.0).abs() < 1e-15);
        let off = CoulombCharge::new([0.0; 3], [0.0; 3], g);
        let e2 = CoulombCharge { e: off.e0.map(|x| 2.0 * x), ..off };
        assert!(conformal_weight(&e2, g).is_err());
        assert_eq!(conformal_weight_unchecked(&e2, g).unwrap(), 0.0);
    }

    #[test]
    fn exact_two_term_law_is_recovered() {
        let entries = (4..=16).step_by(2).map(|l| (l, -0.3 * l as f64 + PI / (6.0 * l as f64))).collect();
        let s = ScalingSeries::new(entries, ScalingTarget::Ground).unwrap();
        let f = fit_scaling(&s, false, None).unwrap();
        assert!((f.coefficient - 1.0).abs() < 1e-10 && (f.f0 - 0.3).abs() < 1e-10);
        let f3 = fit_scaling(&s, true, None).unwrap();
        assert!(f3.residual_norm <= f.residual_norm + 1e-12);
    }

    #[test]
    fn bad_series() {
        assert!(ScalingSeries::new(vec![(4, 0.0), (4, 1.0)], ScalingTarget::Ground).is_err());
        let s = ScalingSeries::new(vec![(4, 0.0), (6, 1.0)], ScalingTarget::Ground).unwrap();
        assert!(fit_scaling(&s, false, None).is_err());
    }
}
