//! Effective time-dependent observables for the Yes/No question
//! "are you in |k> at time t?".
//!
//! In the Heisenberg picture the Yes probability on an initial state rho is
//! `Tr(U^dagger |k><k| U rho)`. The operator `U^dagger |k><k| U` has rank one,
//! so the dichotomic observable `2 Yes - 1` has the form
//! `O = lambda |chi><chi| - |chi_perp><chi_perp|` with
//! `chi ~ U^dagger |k>` and `lambda = 2 |U^dagger k|^2 - 1`.
//!
//! [`chi_state`], [`survival_norm`](crate::evolution::survival_norm) and
//! [`lambda_eigenvalue`] are the closed forms written in the CP basis. They
//! coincide with the Heisenberg construction when delta = 0; with CP violation
//! they drop the reciprocal-basis factor `(V^-1)^dagger` and differ at O(delta).
//! [`EffectiveObservable::new`] is the exact construction used by the
//! correlation and witness code; [`EffectiveObservable::closed_form`] keeps the
//! closed forms for comparison.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::evolution::{evolution_operator, mass_overlaps};
use crate::linalg::{
    bloch_vector, hermitian_eigen2, hermitian_eigenvalues4, hermiticity_defect4, kron2, kron_vec,
    orthogonal_complement, outer2, outer4, pauli, real, ComplexMat2, ComplexMat4, ComplexVec2,
    ComplexVec4, C64, HERMITIAN_TOL,
};
use crate::quasispin::{Measurement, Quasispin};

/// Unnormalized `<K_S|k> e^{(i m_S - Gamma_S/2)t}|K1> + <K_L|k> e^{(i m_L - Gamma_L/2)t}|K2>`.
pub fn chi_bracket(q: &Quasispin, t: f64, c: &PhysicalConstants) -> ComplexVec2 {
    let (s, l) = mass_overlaps(q, c);
    let (m_s, m_l) = c.masses();
    ComplexVec2::new(
        s * C64::new(-0.5 * c.gamma_s() * t, m_s * t).exp(),
        l * C64::new(-0.5 * c.gamma_l() * t, m_l * t).exp(),
    )
}

/// Closed-form `|chi>`: the bracket divided by `sqrt(N(t))`.
pub fn chi_state(q: &Quasispin, t: f64, c: &PhysicalConstants) -> Result<ComplexVec2> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let v = chi_bracket(q, t, c);
    let n = v.norm_squared();
    if n.is_nan() || n < f64::MIN_POSITIVE {
        return Err(Error::NormUnderflow(t));
    }
    Ok(v / real(n.sqrt()))
}

/// Closed-form first eigenvalue:
/// `-1 + (e^{-Gs t} - e^{-Gl t})(1 - d^2) cos th + (e^{-Gs t} + e^{-Gl t})(1 + d^2 + 2 d cos ph sin th)`.
pub fn lambda_eigenvalue(q: &Quasispin, t: f64, c: &PhysicalConstants) -> f64 {
    let es = (-c.gamma_s() * t).exp();
    let el = (-c.gamma_l() * t).exp();
    let d = c.delta();
    -1.0 + (es - el) * (1.0 - d * d) * q.theta.cos()
        + (es + el) * (1.0 + d * d + 2.0 * d * q.phi.cos() * q.theta.sin())
}

/// `O = lambda |chi><chi| - |chi_perp><chi_perp|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveObservable {
    pub chi: ComplexVec2,
    pub lambda: f64,
    pub matrix: ComplexMat2,
}

impl EffectiveObservable {
    /// Exact Heisenberg-picture observable of `m`.
    pub fn new(m: &Measurement, c: &PhysicalConstants) -> Result<Self> {
        let u = evolution_operator(m.time, c)?;
        let w = u.adjoint() * m.quasispin.ket();
        let n = w.norm_squared();
        if n.is_nan() || n < f64::MIN_POSITIVE {
            return Err(Error::NormUnderflow(m.time));
        }
        Ok(Self::from_parts(w / real(n.sqrt()), 2.0 * n - 1.0))
    }

    /// Observable assembled from [`chi_state`] and [`lambda_eigenvalue`].
    pub fn closed_form(m: &Measurement, c: &PhysicalConstants) -> Result<Self> {
        let chi = chi_state(&m.quasispin, m.time, c)?;
        Ok(Self::from_parts(
            chi,
            lambda_eigenvalue(&m.quasispin, m.time, c),
        ))
    }

    pub fn from_parts(chi: ComplexVec2, lambda: f64) -> Self {
        let perp = orthogonal_complement(&chi);
        let matrix = outer2(&chi, &chi) * real(lambda) - outer2(&perp, &perp);
        Self {
            chi,
            lambda,
            matrix,
        }
    }

    pub fn chi_perp(&self) -> ComplexVec2 {
        orthogonal_complement(&self.chi)
    }

    /// `(lambda-1)/2 * 1 + (lambda+1)/2 * n.sigma` with `n` the Bloch vector of chi.
    pub fn bloch_form(&self) -> ComplexMat2 {
        let n = bloch_vector(&self.chi);
        let s = pauli();
        let dir = s[0] * real(n[0]) + s[1] * real(n[1]) + s[2] * real(n[2]);
        ComplexMat2::identity() * real(0.5 * (self.lambda - 1.0))
            + dir * real(0.5 * (self.lambda + 1.0))
    }

    /// Operator whose expectation is the Yes probability: `(O + 1)/2`.
    pub fn yes_operator(&self) -> ComplexMat2 {
        (self.matrix + ComplexMat2::identity()) * real(0.5)
    }

    /// Eigenvalues of `matrix`, ascending.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let (lo, hi, _) = hermitian_eigen2(&self.matrix);
        (lo, hi)
    }
}

/// Exact effective observable of a measurement.
pub fn effective_observable(m: &Measurement, c: &PhysicalConstants) -> Result<EffectiveObservable> {
    EffectiveObservable::new(m, c)
}

/// Two-kaon density matrix in the {K1, K2} x {K1, K2} basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    rho: ComplexMat4,
}

impl TwoQubitState {
    pub const TRACE_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-10;

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: ComplexMat4) -> Result<Self> {
        let h = hermiticity_defect4(&rho);
        if h > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {h:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min = hermitian_eigenvalues4(&rho)[0];
        if min < -Self::PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { rho })
    }

    pub fn pure(psi: &ComplexVec4) -> Result<Self> {
        check_normalized(psi)?;
        Self::new(outer4(psi, psi))
    }

    /// `|a><a| (x) |b><b|`.
    pub fn product(a: &Quasispin, b: &Quasispin) -> Self {
        let v = kron_vec(&a.ket(), &b.ket());
        Self {
            rho: outer4(&v, &v),
        }
    }

    /// `|psi^->` projector.
    pub fn singlet() -> Self {
        Self {
            rho: outer4(&psi_minus(), &psi_minus()),
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: ComplexMat4::identity() * real(0.25),
        }
    }

    pub fn matrix(&self) -> &ComplexMat4 {
        &self.rho
    }

    /// `Tr(op rho)`, real part; `op` must be Hermitian.
    pub fn expectation(&self, op: &ComplexMat4) -> f64 {
        let z = (op * self.rho).trace();
        debug_assert!(
            z.im.abs() < 1e-9 * (1.0 + z.re.abs()),
            "non-real expectation {z}"
        );
        z.re
    }
}

/// `(|K0 K0bar> - |K0bar K0>)/sqrt 2 = (|K2 K1> - |K1 K2>)/sqrt 2`.
pub fn psi_minus() -> ComplexVec4 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    ComplexVec4::new(real(0.0), real(-r), real(r), real(0.0))
}

fn check_normalized(psi: &ComplexVec4) -> Result<()> {
    let n = psi.norm_squared();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

/// Joint Yes/No probabilities for Alice and Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointProbs {
    pub p_yy: f64,
    pub p_yn: f64,
    pub p_ny: f64,
    pub p_nn: f64,
}

impl JointProbs {
    /// Builds the table from `P(YY)` and the two single Yes probabilities.
    pub fn from_marginals(p_yy: f64, p_a: f64, p_b: f64) -> Self {
        Self {
            p_yy,
            p_yn: p_a - p_yy,
            p_ny: p_b - p_yy,
            p_nn: 1.0 - p_a - p_b + p_yy,
        }
    }

    pub fn p_a(&self) -> f64 {
        self.p_yy + self.p_yn
    }

    pub fn p_b(&self) -> f64 {
        self.p_yy + self.p_ny
    }

    pub fn sum(&self) -> f64 {
        self.p_yy + self.p_yn + self.p_ny + self.p_nn
    }

    /// `P(YY) + P(NN) - P(YN) - P(NY)`.
    pub fn correlation(&self) -> f64 {
        self.p_yy + self.p_nn - self.p_yn - self.p_ny
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p_yy, self.p_yn, self.p_ny, self.p_nn]
    }
}

/// Trace-form correlation of two precomputed observables.
pub fn correlation_of(
    oa: &EffectiveObservable,
    ob: &EffectiveObservable,
    rho: &TwoQubitState,
) -> f64 {
    rho.expectation(&kron2(&oa.matrix, &ob.matrix))
}

/// `E = Tr[(O_a (x) O_b) rho]`.
pub fn correlation(
    ma: &Measurement,
    mb: &Measurement,
    rho: &TwoQubitState,
    c: &PhysicalConstants,
) -> Result<f64> {
    let oa = EffectiveObservable::new(ma, c)?;
    let ob = EffectiveObservable::new(mb, c)?;
    Ok(correlation_of(&oa, &ob, rho))
}

/// Joint probabilities in the Heisenberg picture for a general rho.
pub fn joint_probs(
    ma: &Measurement,
    mb: &Measurement,
    rho: &TwoQubitState,
    c: &PhysicalConstants,
) -> Result<JointProbs> {
    let ya = EffectiveObservable::new(ma, c)?.yes_operator();
    let yb = EffectiveObservable::new(mb, c)?.yes_operator();
    let id = ComplexMat2::identity();
    Ok(JointProbs::from_marginals(
        rho.expectation(&kron2(&ya, &yb)),
        rho.expectation(&kron2(&ya, &id)),
        rho.expectation(&kron2(&id, &yb)),
    ))
}

/// Amplitude oracle: Schroedinger-picture probabilities from `U(t_a) (x) U(t_b)`.
///
/// "No" includes the kaon having decayed before its measurement time.
pub fn oracle_joint_probs(
    ma: &Measurement,
    mb: &Measurement,
    psi: &ComplexVec4,
    c: &PhysicalConstants,
) -> Result<JointProbs> {
    check_normalized(psi)?;
    let ua = evolution_operator(ma.time, c)?;
    let ub = evolution_operator(mb.time, c)?;
    let ka = ma.quasispin.ket();
    let kb = mb.quasispin.ket();
    // psi as a 2x2 coefficient matrix: psi_{ij} |i>_A |j>_B
    let coeff = ComplexMat2::new(psi[0], psi[1], psi[2], psi[3]);
    // <k_a| U_a acting on the A index: row vector times coeff
    let bra_a = ka.adjoint() * ua;
    let bra_b = kb.adjoint() * ub;
    let after_a = bra_a * coeff; // 1x2, remaining B amplitudes
    let after_b = coeff * bra_b.transpose(); // 2x1, remaining A amplitudes
    let amp_yy = (after_a * bra_b.transpose())[(0, 0)];
    Ok(JointProbs::from_marginals(
        amp_yy.norm_sqr(),
        after_a.norm_squared(),
        after_b.norm_squared(),
    ))
}

/// `E = 1 - 2 P(Y_A) - 2 P(Y_B) + 4 P(YY)` from the amplitude oracle.
pub fn oracle_correlation(
    ma: &Measurement,
    mb: &Measurement,
    psi: &ComplexVec4,
    c: &PhysicalConstants,
) -> Result<f64> {
    let p = oracle_joint_probs(ma, mb, psi, c)?;
    Ok(1.0 - 2.0 * p.p_a() - 2.0 * p.p_b() + 4.0 * p.p_yy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn cp0() -> PhysicalConstants {
        PhysicalConstants::pdg().cp_conserving()
    }

    fn meas(q: Quasispin, t: f64) -> Measurement {
        Measurement::new(q, t).unwrap()
    }

    #[test]
    fn chi_at_zero_is_k() {
        let chi = chi_state(&Quasispin::K0, 0.0, &cp0()).unwrap();
        let r = FRAC_1_SQRT_2;
        assert!((chi - ComplexVec2::new(real(r), real(r))).norm() < 1e-15);
    }

    #[test]
    fn chi_tends_to_k2() {
        let chi = chi_state(&Quasispin::K0BAR, 60.0, &cp0()).unwrap();
        assert!((chi[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_underflow_is_an_error() {
        assert!(matches!(
            chi_state(&Quasispin::K1, 2000.0, &cp0()),
            Err(Error::NormUnderflow(_))
        ));
    }

    #[test]
    fn chi_k0bar_termwise() {
        let c = PhysicalConstants::pdg();
        let t = 1.34_f64;
        let e = 1.66e-3_f64;
        let n = (1.0 + e * e).sqrt();
        let s = (FRAC_1_SQRT_2 - e * FRAC_1_SQRT_2) / n;
        let l = (e * FRAC_1_SQRT_2 - FRAC_1_SQRT_2) / n;
        let a1 = C64::new(s * (-t / 2.0).exp(), 0.0);
        let a2 = C64::from_polar(l * (-c.gamma_l() * t / 2.0).exp(), c.delta_m() * t);
        let norm = (a1.norm_sqr() + a2.norm_sqr()).sqrt();
        let chi = chi_state(&Quasispin::K0BAR, t, &c).unwrap();
        assert!((chi[0] - a1 / norm).norm() < 1e-15);
        assert!((chi[1] - a2 / norm).norm() < 1e-15);
        let nt = crate::evolution::survival_norm(&Quasispin::K0BAR, t, &c);
        assert!((nt - norm * norm).abs() < 1e-15);
    }

    #[test]
    fn lambda_limits() {
        let c0 = cp0();
        let q = Quasispin {
            theta: 1.2,
            phi: 0.4,
        };
        assert!((lambda_eigenvalue(&q, 0.0, &c0) - 1.0).abs() < 1e-15);
        assert!((lambda_eigenvalue(&q, 1e5, &PhysicalConstants::pdg()) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_exact_without_cp_violation() {
        let c = cp0();
        for &(th, ph, t) in &[
            (0.3, 1.0, 0.0),
            (PI / 2.0, PI, 1.34),
            (2.9, 5.0, 7.5),
            (1.0, 0.0, 40.0),
        ] {
            let m = meas(Quasispin { theta: th, phi: ph }, t);
            let a = EffectiveObservable::new(&m, &c).unwrap();
            let b = EffectiveObservable::closed_form(&m, &c).unwrap();
            assert!((a.lambda - b.lambda).abs() < 1e-12);
            assert!((a.matrix - b.matrix).norm() < 1e-12);
        }
    }

    #[test]
    fn lambda_is_probability_reconstruction() {
        let c = PhysicalConstants::pdg();
        let m = meas(Quasispin::K0BAR, 1.34);
        let o = EffectiveObservable::new(&m, &c).unwrap();
        // Prepare a single kaon in |chi> and ask the question with the oracle.
        let u = evolution_operator(m.time, &c).unwrap();
        let p_yes = (m.quasispin.ket().adjoint() * u * o.chi)[(0, 0)].norm_sqr();
        assert!((o.lambda - (2.0 * p_yes - 1.0)).abs() < 1e-14);
        // Closed form differs only at O(delta).
        let closed = lambda_eigenvalue(&m.quasispin, m.time, &c);
        assert!((closed - o.lambda).abs() < 10.0 * c.delta());
    }

    #[test]
    fn observable_structure() {
        let c = PhysicalConstants::pdg();
        let o = EffectiveObservable::new(&meas(Quasispin::K0BAR, 1.34), &c).unwrap();
        assert!((o.chi.norm() - 1.0).abs() < 1e-12);
        assert!(crate::linalg::hermiticity_defect2(&o.matrix) < 1e-12);
        // characteristic polynomial x^2 - tr x + det has roots lambda and -1
        let tr = o.matrix.trace().re;
        let det = o.matrix.determinant().re;
        assert!((tr - (o.lambda - 1.0)).abs() < 1e-12);
        assert!((det + o.lambda).abs() < 1e-12);
        let (lo, hi) = o.eigenvalues();
        assert!((lo + 1.0).abs() < 1e-12 && (hi - o.lambda).abs() < 1e-12);
        assert!((o.bloch_form() - o.matrix).norm() < 1e-12);
    }

    #[test]
    fn stable_observables_at_zero() {
        let o = EffectiveObservable::new(&meas(Quasispin::K1, 0.0), &cp0()).unwrap();
        let z = ComplexMat2::new(real(1.0), real(0.0), real(0.0), real(-1.0));
        assert!((o.matrix - z).norm() < 1e-15);
        let o = EffectiveObservable::new(
            &meas(
                Quasispin {
                    theta: 0.7,
                    phi: 2.0,
                },
                0.0,
            ),
            &cp0(),
        )
        .unwrap();
        let (lo, hi) = o.eigenvalues();
        assert!((lo + 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singlet_correlations_at_zero() {
        let c = cp0();
        let rho = TwoQubitState::singlet();
        let kb = meas(Quasispin::K0BAR, 0.0);
        let k = meas(Quasispin::K0, 0.0);
        assert!((correlation(&kb, &kb, &rho, &c).unwrap() + 1.0).abs() < 1e-14);
        assert!((correlation(&k, &kb, &rho, &c).unwrap() - 1.0).abs() < 1e-14);
        let p = oracle_joint_probs(&kb, &kb, &psi_minus(), &c).unwrap();
        assert!(p.p_yy.abs() < 1e-15 && p.p_nn.abs() < 1e-15);
        assert!((p.p_yn - 0.5).abs() < 1e-15 && (p.p_ny - 0.5).abs() < 1e-15);
    }

    #[test]
    fn everything_decays() {
        let c = PhysicalConstants::pdg();
        let m = meas(Quasispin::K0BAR, 30_000.0);
        let p = oracle_joint_probs(&m, &m, &psi_minus(), &c).unwrap();
        assert!(p.p_yy < 1e-12 && p.p_yn < 1e-12 && p.p_ny < 1e-12);
        assert!((p.p_nn - 1.0).abs() < 1e-12);
        assert!((oracle_correlation(&m, &m, &psi_minus(), &c).unwrap() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn reference_setting_probabilities_sum_to_one() {
        let c = PhysicalConstants::pdg();
        let p = oracle_joint_probs(
            &meas(Quasispin::K0BAR, 1.34),
            &meas(Quasispin::K0BAR, 2.80),
            &psi_minus(),
            &c,
        )
        .unwrap();
        assert!((p.sum() - 1.0).abs() < 1e-12);
        assert!(p.as_array().iter().all(|&x| (0.0..=1.0).contains(&x)));
        let e = correlation(
            &meas(Quasispin::K0BAR, 1.34),
            &meas(Quasispin::K0BAR, 2.80),
            &TwoQubitState::singlet(),
            &c,
        )
        .unwrap();
        assert!((e - p.correlation()).abs() < 1e-12);
    }

    #[test]
    fn oracle_rejects_unnormalized() {
        let m = meas(Quasispin::K0, 0.0);
        let psi = psi_minus() * real(1.1);
        assert!(matches!(
            oracle_joint_probs(&m, &m, &psi, &cp0()),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn state_validation() {
        assert!(TwoQubitState::new(ComplexMat4::identity()).is_err());
        let mut bad = ComplexMat4::identity() * real(0.25);
        bad[(0, 1)] = C64::new(0.0, 0.1);
        assert!(TwoQubitState::new(bad).is_err());
        let neg = ComplexMat4::from_diagonal(&ComplexVec4::new(
            real(1.1),
            real(-0.1),
            real(0.0),
            real(0.0),
        ));
        assert!(TwoQubitState::new(neg).is_err());
        assert!(TwoQubitState::new(*TwoQubitState::singlet().matrix()).is_ok());
        assert!(TwoQubitState::pure(&psi_minus()).is_ok());
    }

    #[test]
    fn joint_probs_match_oracle_for_pure_states() {
        let c = PhysicalConstants::pdg();
        let ma = meas(
            Quasispin {
                theta: 0.4,
                phi: 1.0,
            },
            0.8,
        );
        let mb = meas(
            Quasispin {
                theta: 2.1,
                phi: 3.3,
            },
            2.4,
        );
        let a = joint_probs(&ma, &mb, &TwoQubitState::singlet(), &c).unwrap();
        let b = oracle_joint_probs(&ma, &mb, &psi_minus(), &c).unwrap();
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
