//! Single-kaon Wigner-Weisskopf evolution.
//!
//! The effective Hamiltonian has eigenvectors K_S and K_L with eigenvalues
//! `m - i Gamma/2`. Because K_S and K_L are not orthogonal when delta != 0 the
//! evolution is assembled as `V D V^-1` with the inverse eigenvector matrix.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMat2, ComplexVec2, C64};
use crate::quasispin::Quasispin;

/// `(K_S, K_L)` in the CP basis:
/// `K_S = (K1 + eps K2)/sqrt(1+|eps|^2)`, `K_L = (K2 + eps K1)/sqrt(1+|eps|^2)`.
pub fn mass_eigenstates(c: &PhysicalConstants) -> (ComplexVec2, ComplexVec2) {
    let eps = c.eps();
    let n = C64::new((1.0 + eps.norm_sqr()).sqrt().recip(), 0.0);
    let one = C64::new(1.0, 0.0);
    (
        ComplexVec2::new(one, eps) * n,
        ComplexVec2::new(eps, one) * n,
    )
}

/// `(<K_S|k>, <K_L|k>)`.
pub fn mass_overlaps(q: &Quasispin, c: &PhysicalConstants) -> (C64, C64) {
    let (ks, kl) = mass_eigenstates(c);
    let k = q.ket();
    (ks.dotc(&k), kl.dotc(&k))
}

/// `N(t) = e^{-Gamma_S t}|<K_S|k>|^2 + e^{-Gamma_L t}|<K_L|k>|^2`.
pub fn survival_norm(q: &Quasispin, t: f64, c: &PhysicalConstants) -> f64 {
    let (s, l) = mass_overlaps(q, c);
    (-c.gamma_s() * t).exp() * s.norm_sqr() + (-c.gamma_l() * t).exp() * l.norm_sqr()
}

/// Diagonal evolution factors `e^{(-i m - Gamma/2) t}` for (K_S, K_L).
pub fn decay_phases(t: f64, c: &PhysicalConstants) -> (C64, C64) {
    let (m_s, m_l) = c.masses();
    (
        C64::new(-0.5 * c.gamma_s() * t, -m_s * t).exp(),
        C64::new(-0.5 * c.gamma_l() * t, -m_l * t).exp(),
    )
}

/// Matrix whose columns are K_S and K_L.
pub fn eigenvector_matrix(c: &PhysicalConstants) -> ComplexMat2 {
    let (ks, kl) = mass_eigenstates(c);
    ComplexMat2::from_columns(&[ks, kl])
}

/// `U(t) = V diag(e^{(-i m_S - Gamma_S/2)t}, e^{(-i m_L - Gamma_L/2)t}) V^-1`.
pub fn evolution_operator(t: f64, c: &PhysicalConstants) -> Result<ComplexMat2> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let v = eigenvector_matrix(c);
    // det V = (1 - eps^2)/(1 + |eps|^2), nonzero for |delta| < 1.
    let v_inv = v
        .try_inverse()
        .expect("mass eigenstates are linearly independent");
    let (ds, dl) = decay_phases(t, c);
    let d = ComplexMat2::new(ds, C64::new(0.0, 0.0), C64::new(0.0, 0.0), dl);
    Ok(v * d * v_inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{operator_norm2, outer2};

    fn cp0() -> PhysicalConstants {
        PhysicalConstants::pdg().cp_conserving()
    }

    #[test]
    fn cp_limit_eigenstates() {
        let (ks, kl) = mass_eigenstates(&cp0());
        assert_eq!(ks, Quasispin::K1.ket());
        assert!((kl - Quasispin::K2.ket()).norm() < 1e-15);
        assert_eq!(ks.dotc(&kl).norm(), 0.0);
    }

    #[test]
    fn overlap_equals_delta() {
        let c = PhysicalConstants::pdg();
        let (ks, kl) = mass_eigenstates(&c);
        assert!((ks.norm() - 1.0).abs() < 1e-15 && (kl.norm() - 1.0).abs() < 1e-15);
        // <K_S|K_L> = 2 Re(eps)/(1+|eps|^2) = 2*1.66e-3/(1+1.66e-3^2)
        let direct = 2.0 * 1.66e-3 / (1.0 + 1.66e-3 * 1.66e-3);
        let ip = ks.dotc(&kl);
        assert!((ip.re - direct).abs() < 1e-17 && ip.im.abs() < 1e-18);
        assert!((ip.re - c.delta()).abs() < 1e-17);
    }

    #[test]
    fn survival_norm_limits() {
        let c = cp0();
        for q in [
            Quasispin::K0,
            Quasispin::K0BAR,
            Quasispin {
                theta: 1.0,
                phi: 2.0,
            },
        ] {
            assert!((survival_norm(&q, 0.0, &c) - 1.0).abs() < 1e-15);
        }
        for t in [0.3, 2.0, 9.0] {
            assert!((survival_norm(&Quasispin::K1, t, &c) - (-t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn survival_norm_k0bar_termwise() {
        let c = PhysicalConstants::pdg();
        let e = 1.66e-3_f64;
        let n = (1.0 + e * e).sqrt();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // <K_S|K0bar> = (r - e r)/n, <K_L|K0bar> = (e r - r)/n
        let s2 = ((r - e * r) / n).powi(2);
        let l2 = ((e * r - r) / n).powi(2);
        let t = 1.34_f64;
        let expect = (-t).exp() * s2 + (-c.gamma_l() * t).exp() * l2;
        assert!((survival_norm(&Quasispin::K0BAR, t, &c) - expect).abs() < 1e-15);
    }

    #[test]
    fn evolution_identity_and_diagonal() {
        let c = PhysicalConstants::pdg();
        let u = evolution_operator(0.0, &c).unwrap();
        assert!((u - ComplexMat2::identity()).norm() < 1e-15);
        let c0 = cp0();
        let t = 1.7;
        let u = evolution_operator(t, &c0).unwrap();
        assert!((u[(0, 0)] - C64::new((-t / 2.0).exp(), 0.0)).norm() < 1e-15);
        let e = C64::new(-c0.gamma_l() * t / 2.0, -c0.delta_m() * t).exp();
        assert!((u[(1, 1)] - e).norm() < 1e-15);
        assert!(u[(0, 1)].norm() < 1e-15 && u[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn rejects_negative_time() {
        assert!(matches!(
            evolution_operator(-0.1, &PhysicalConstants::pdg()),
            Err(Error::NegativeTime(_))
        ));
    }

    #[test]
    fn strangeness_survival_textbook() {
        let c = cp0();
        let k0 = Quasispin::K0.ket();
        let u = evolution_operator(1.0, &c).unwrap();
        let p = (k0.adjoint() * u * k0)[(0, 0)].norm_sqr();
        let (gs, gl, dm) = (1.0_f64, c.gamma_l(), c.delta_m());
        let expect = 0.25 * ((-gs).exp() + (-gl).exp() + 2.0 * (-(gs + gl) / 2.0).exp() * dm.cos());
        assert!((p - expect).abs() < 1e-15);
    }

    #[test]
    fn semigroup_and_contraction() {
        let c = PhysicalConstants::pdg()
            .with_eps(C64::new(2e-3, 1e-3))
            .unwrap();
        for &(t1, t2) in &[(0.0, 3.0), (1.3, 2.8), (50.0, 50.0), (0.01, 99.0)] {
            let lhs = evolution_operator(t1 + t2, &c).unwrap();
            let rhs = evolution_operator(t1, &c).unwrap() * evolution_operator(t2, &c).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
            assert!(operator_norm2(&lhs) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn cp_conserving_evolution_commutes_with_k1_projector() {
        let c = cp0();
        let p = outer2(&Quasispin::K1.ket(), &Quasispin::K1.ket());
        let u = evolution_operator(2.2, &c).unwrap();
        assert!((u * p - p * u).norm() < 1e-15);
    }
}
