//! Model parameters `n, gamma, q, omega, a` and the A3 Lie-algebra data.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Number of unit-circle solutions of `omega^4 + omega^-4 = n`.
pub const OMEGA_BRANCHES: u8 = 8;

/// Parameters of the model at loop fugacity `n = 2 cos(gamma)`.
///
/// Everything is derived from `gamma`, which keeps the redundant
/// parameters exactly consistent with each other.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingSet {
    pub n: f64,
    pub gamma: f64,
    pub q: C64,
    pub omega: C64,
    pub a: C64,
    pub c_pref: C64,
    pub omega_branch: u8,
}

impl CouplingSet {
    pub fn from_n(n: f64, omega_branch: u8) -> Result<Self> {
        if !n.is_finite() || n.abs() > 2.0 {
            return Err(Error::OutOfRange(n));
        }
        Self::from_gamma((n / 2.0).acos(), omega_branch)
    }

    /// `gamma` in `[0, pi]`; `gamma = pi` (n = -2) is accepted here but the
    /// scaling formulas reject it.
    pub fn from_gamma(gamma: f64, omega_branch: u8) -> Result<Self> {
        if !(0.0..=PI).contains(&gamma) {
            return Err(Error::Domain(format!("gamma = {gamma} outside [0, pi]")));
        }
        if omega_branch >= OMEGA_BRANCHES {
            return Err(Error::Domain(format!(
                "omega_branch = {omega_branch}, expected 0..{OMEGA_BRANCHES}"
            )));
        }
        let q = -C64::from_polar(1.0, -gamma);
        let a = C64::from_polar(1.0, gamma);
        // e^{+-i gamma/4} times a fourth root of unity
        let sign = if omega_branch < 4 { 1.0 } else { -1.0 };
        let quarter = f64::from(omega_branch % 4) * PI / 2.0;
        let omega = C64::from_polar(1.0, sign * gamma / 4.0 + quarter);
        Ok(CouplingSet {
            n: 2.0 * gamma.cos(),
            gamma,
            q,
            omega,
            a,
            c_pref: q.inv() - q,
            omega_branch,
        })
    }

    /// The coupling at `pi - gamma`, i.e. fugacity `-n`.
    pub fn flipped(&self) -> Result<Self> {
        Self::from_gamma(PI - self.gamma, self.omega_branch)
    }

    pub fn omega_pow(&self, k: i32) -> C64 {
        self.omega.powi(k)
    }

    /// q-number `[4]_q = (q^2 + q^-2)(q + q^-1)`, which vanishes at `n = 0, +-sqrt 2`.
    pub fn q_four(&self) -> C64 {
        let q = self.q;
        (q * q + (q * q).inv()) * (q + q.inv())
    }
}

/// Rank and Cartan matrix of A3, plus the twist vector of the model.
#[derive(Clone, Debug, PartialEq)]
pub struct CartanData {
    pub rank: usize,
    pub cartan: [[i32; 3]; 3],
    pub twist_vector: [f64; 3],
}

/// A3 data with the twist left at zero; see [`CartanData::with_fpl_twist`].
pub fn cartan_a3() -> CartanData {
    CartanData {
        rank: 3,
        cartan: [[2, -1, 0], [-1, 2, -1], [0, -1, 2]],
        twist_vector: [0.0; 3],
    }
}

impl CartanData {
    /// Twist phases `omega^(s) = (1/a, 1/a, a, a)` written as `e^{i phi_s}`;
    /// `w_s = phi_s - phi_{s+1}` on the continuous branch, so `w = (0, -2 gamma, 0)`.
    pub fn with_fpl_twist(mut self, gamma: f64) -> Self {
        let phi = [-gamma, -gamma, gamma, gamma];
        for s in 0..3 {
            self.twist_vector[s] = phi[s] - phi[s + 1];
        }
        self
    }

    pub fn det(&self) -> i32 {
        let c = &self.cartan;
        c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
            - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
            + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
    }

    /// Inverse Cartan matrix (Gram matrix of the fundamental weights).
    pub fn inverse(&self) -> [[f64; 3]; 3] {
        let c = self.cartan.map(|r| r.map(f64::from));
        let det = f64::from(self.det());
        let mut inv = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = minor_index(j);
                let (c0, c1) = minor_index(i);
                let m = c[r0][c0] * c[r1][c1] - c[r0][c1] * c[r1][c0];
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                inv[i][j] = sign * m / det;
            }
        }
        inv
    }
}

fn minor_index(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn n_zero_values() {
        let c = CouplingSet::from_n(0.0, 0).unwrap();
        assert!((c.gamma - PI / 2.0).abs() < 1e-15);
        assert!(close(c.q, C64::i(), 1e-15));
        assert!(close(c.a, C64::i(), 1e-15));
        assert!(close(c.omega, C64::from_polar(1.0, PI / 8.0), 1e-15));
    }

    #[test]
    fn n_one_values() {
        let c = CouplingSet::from_n(1.0, 0).unwrap();
        assert!((c.gamma - PI / 3.0).abs() < 1e-15);
        assert!(close(c.q, -C64::from_polar(1.0, -PI / 3.0), 1e-15));
        assert!(close(c.a, C64::from_polar(1.0, PI / 3.0), 1e-15));
    }

    #[test]
    fn n_two_is_degenerate_but_valid() {
        let c = CouplingSet::from_n(2.0, 0).unwrap();
        assert_eq!(c.gamma, 0.0);
        assert!(close(c.q, C64::new(-1.0, 0.0), 1e-15));
        assert!(close(c.a, C64::new(1.0, 0.0), 1e-15));
        assert!(close(c.omega.powi(4), C64::new(1.0, 0.0), 1e-15));
        assert!(c.c_pref.norm() < 1e-15);
    }

    #[test]
    fn rejects_gapped_regime() {
        assert!(matches!(CouplingSet::from_n(2.5, 0), Err(Error::OutOfRange(_))));
        assert!(matches!(CouplingSet::from_n(-2.01, 0), Err(Error::OutOfRange(_))));
        assert!(CouplingSet::from_n(1.0, 8).is_err());
    }

    #[test]
    fn every_branch_solves_the_quartic() {
        for b in 0..OMEGA_BRANCHES {
            let c = CouplingSet::from_n(0.7, b).unwrap();
            let s = c.omega.powi(4) + c.omega.powi(-4);
            assert!((s.re - 0.7).abs() < 1e-14 && s.im.abs() < 1e-14);
        }
    }

    #[test]
    fn cartan_entries() {
        let c = cartan_a3();
        assert_eq!(c.rank, 3);
        assert_eq!(c.cartan[0][0], 2);
        assert_eq!(c.cartan[0][2], 0);
        assert_eq!(c.det(), 4);
        let inv = c.inverse();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| f64::from(c.cartan[i][k]) * inv[k][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn twist_vector_shape() {
        let g = 0.9;
        let c = cartan_a3().with_fpl_twist(g);
        assert_eq!(c.twist_vector, [0.0, -2.0 * g, 0.0]);
    }
}
