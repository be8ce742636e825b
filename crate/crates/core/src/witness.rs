//! CHSH and CH functions for decaying pairs and their extrema over separable
//! initial states.
//!
//! Both functions are linear in rho, so their extrema over the convex set of
//! separable states are attained on pure product states `|a>|b>`. The search
//! therefore runs over the four Bloch angles of `a` and `b`: a coarse grid,
//! Nelder-Mead refinement of the best seeds, and a final polish that
//! alternately replaces `a` (or `b`) by the exact minimizer of the reduced
//! 2x2 operator.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::linalg::{
    bloch_angles, hermitian_eigen2, kron2, kron_vec, real, ComplexMat2, ComplexMat4, ComplexVec2,
};
use crate::nelder_mead::{self, NelderMeadOptions};
use crate::observable::{EffectiveObservable, TwoQubitState};
use crate::quasispin::{Measurement, Quasispin, Strangeness};

/// Alice measures `n` or `nprime`, Bob measures `m` or `mprime`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellSetting {
    pub n: Measurement,
    pub m: Measurement,
    pub nprime: Measurement,
    pub mprime: Measurement,
}

impl BellSetting {
    pub fn new(n: Measurement, m: Measurement, nprime: Measurement, mprime: Measurement) -> Self {
        Self {
            n,
            m,
            nprime,
            mprime,
        }
    }

    /// Same strangeness question everywhere; times ordered `[t_n, t_m, t_n', t_m']`.
    pub fn strangeness(q: Strangeness, times: [f64; 4]) -> Result<Self> {
        let [tn, tm, tnp, tmp] = times;
        Ok(Self {
            n: Measurement::strangeness(q, tn)?,
            m: Measurement::strangeness(q, tm)?,
            nprime: Measurement::strangeness(q, tnp)?,
            mprime: Measurement::strangeness(q, tmp)?,
        })
    }

    /// The K0bar setting `t_n = 0, t_m = t_n' = 1.34, t_m' = 2.80`.
    pub fn reference() -> Self {
        Self::strangeness(Strangeness::K0bar, [0.0, 1.34, 1.34, 2.80]).expect("valid times")
    }

    pub fn times(&self) -> [f64; 4] {
        [self.n.time, self.m.time, self.nprime.time, self.mprime.time]
    }

    pub fn with_times(&self, times: [f64; 4]) -> Result<Self> {
        let [tn, tm, tnp, tmp] = times;
        Ok(Self {
            n: Measurement::new(self.n.quasispin, tn)?,
            m: Measurement::new(self.m.quasispin, tm)?,
            nprime: Measurement::new(self.nprime.quasispin, tnp)?,
            mprime: Measurement::new(self.mprime.quasispin, tmp)?,
        })
    }

    /// Alice and Bob exchange roles. The single minus sign of the CHSH
    /// combination sits on (n, m'), so the relabeling that maps the Bell
    /// operator to its swap conjugate is (n, m, n', m') -> (m', n', m, n).
    pub fn swapped(&self) -> Self {
        Self {
            n: self.mprime,
            m: self.nprime,
            nprime: self.m,
            mprime: self.n,
        }
    }

    pub fn observables(&self, c: &PhysicalConstants) -> Result<[EffectiveObservable; 4]> {
        Ok([
            EffectiveObservable::new(&self.n, c)?,
            EffectiveObservable::new(&self.m, c)?,
            EffectiveObservable::new(&self.nprime, c)?,
            EffectiveObservable::new(&self.mprime, c)?,
        ])
    }
}

/// `O_n (x) (O_m - O_m') + O_n' (x) (O_m + O_m')`.
pub fn bell_operator(s: &BellSetting, c: &PhysicalConstants) -> Result<ComplexMat4> {
    let [on, om, onp, omp] = s.observables(c)?;
    Ok(
        kron2(&on.matrix, &(om.matrix - omp.matrix))
            + kron2(&onp.matrix, &(om.matrix + omp.matrix)),
    )
}

/// `S = E(n,m) - E(n,m') + E(n',m) + E(n',m')`.
pub fn s_function(s: &BellSetting, rho: &TwoQubitState, c: &PhysicalConstants) -> Result<f64> {
    Ok(rho.expectation(&bell_operator(s, c)?))
}

/// Bloch angles of a product state `|a>|b>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductAngles {
    pub theta_a: f64,
    pub phi_a: f64,
    pub theta_b: f64,
    pub phi_b: f64,
}

impl ProductAngles {
    fn from_slice(x: &[f64]) -> Self {
        Self {
            theta_a: x[0],
            phi_a: x[1],
            theta_b: x[2],
            phi_b: x[3],
        }
    }

    fn from_kets(a: &ComplexVec2, b: &ComplexVec2) -> Self {
        let (theta_a, phi_a) = bloch_angles(a);
        let (theta_b, phi_b) = bloch_angles(b);
        Self {
            theta_a,
            phi_a,
            theta_b,
            phi_b,
        }
    }

    pub fn kets(&self) -> (ComplexVec2, ComplexVec2) {
        (
            Quasispin {
                theta: self.theta_a,
                phi: self.phi_a,
            }
            .ket(),
            Quasispin {
                theta: self.theta_b,
                phi: self.phi_b,
            }
            .ket(),
        )
    }

    pub fn state(&self) -> TwoQubitState {
        product_state(self.theta_a, self.phi_a, self.theta_b, self.phi_b)
    }
}

/// `|a><a| (x) |b><b|` for Bloch angles of `a` and `b`.
pub fn product_state(theta_a: f64, phi_a: f64, theta_b: f64, phi_b: f64) -> TwoQubitState {
    TwoQubitState::product(
        &Quasispin {
            theta: theta_a,
            phi: phi_a,
        },
        &Quasispin {
            theta: theta_b,
            phi: phi_b,
        },
    )
}

/// Search parameters for the product-state extremization.
#[derive(Debug, Clone, Copy)]
pub struct ExtremaOptions {
    /// Grid points per angle (theta over [0, pi], phi over [0, 2 pi)).
    pub grid: usize,
    /// Number of best grid points refined by Nelder-Mead.
    pub seeds: usize,
    pub simplex: NelderMeadOptions,
}

impl Default for ExtremaOptions {
    fn default() -> Self {
        Self {
            grid: 9,
            seeds: 10,
            simplex: NelderMeadOptions {
                initial_step: 0.3,
                diameter_tol: 1e-8,
                max_evals: 4000,
            },
        }
    }
}

/// `<a b| op |a b>` for Hermitian `op`.
pub fn product_expectation(op: &ComplexMat4, a: &ComplexVec2, b: &ComplexVec2) -> f64 {
    let v = kron_vec(a, b);
    (v.adjoint() * op * v)[(0, 0)].re
}

/// `<a| op |a>` over Alice's factor, a 2x2 operator on Bob's.
pub fn reduce_alice(op: &ComplexMat4, a: &ComplexVec2) -> ComplexMat2 {
    let mut out = ComplexMat2::zeros();
    for k in 0..2 {
        for l in 0..2 {
            let mut acc = real(0.0);
            for i in 0..2 {
                for j in 0..2 {
                    acc += a[i].conj() * op[(2 * i + k, 2 * j + l)] * a[j];
                }
            }
            out[(k, l)] = acc;
        }
    }
    out
}

/// `<b| op |b>` over Bob's factor, a 2x2 operator on Alice's.
pub fn reduce_bob(op: &ComplexMat4, b: &ComplexVec2) -> ComplexMat2 {
    let mut out = ComplexMat2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = real(0.0);
            for k in 0..2 {
                for l in 0..2 {
                    acc += b[k].conj() * op[(2 * i + k, 2 * j + l)] * b[l];
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

fn angles_value(op: &ComplexMat4, x: &[f64]) -> f64 {
    let (a, b) = ProductAngles::from_slice(x).kets();
    product_expectation(op, &a, &b)
}

/// Alternating exact block minimization; never increases the value.
pub(crate) fn polish(
    op: &ComplexMat4,
    mut a: ComplexVec2,
    mut b: ComplexVec2,
) -> (f64, ComplexVec2, ComplexVec2) {
    let mut value = product_expectation(op, &a, &b);
    for _ in 0..1000 {
        let (_, _, nb) = hermitian_eigen2(&reduce_alice(op, &a));
        b = nb;
        let (lo, _, na) = hermitian_eigen2(&reduce_bob(op, &b));
        a = na;
        let improved = value - lo;
        value = lo;
        if improved <= 1e-15 * (1.0 + value.abs()) {
            break;
        }
    }
    (value, a, b)
}

/// Minimum of `<a b| op |a b>` over product states, with its minimizer.
pub fn minimize_over_products(op: &ComplexMat4, opts: &ExtremaOptions) -> (f64, ProductAngles) {
    let g = opts.grid.max(2);
    let thetas: Vec<f64> = (0..g).map(|i| PI * i as f64 / (g - 1) as f64).collect();
    let phis: Vec<f64> = (0..g).map(|i| TAU * i as f64 / g as f64).collect();
    let kets: Vec<ComplexVec2> = thetas
        .iter()
        .flat_map(|&t| {
            phis.iter()
                .map(move |&p| Quasispin { theta: t, phi: p }.ket())
        })
        .collect();
    let angles: Vec<[f64; 2]> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&p| [t, p]))
        .collect();

    let mut grid: Vec<(f64, usize, usize)> = Vec::with_capacity(kets.len() * kets.len());
    for (i, a) in kets.iter().enumerate() {
        for (j, b) in kets.iter().enumerate() {
            grid.push((product_expectation(op, a, b), i, j));
        }
    }
    grid.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut best = (f64::INFINITY, ProductAngles::from_slice(&[0.0; 4]));
    for &(_, i, j) in grid.iter().take(opts.seeds.max(1)) {
        let x0 = [angles[i][0], angles[i][1], angles[j][0], angles[j][1]];
        let nm = nelder_mead::minimize(|x| angles_value(op, x), &x0, &opts.simplex);
        let (a, b) = ProductAngles::from_slice(&nm.x).kets();
        let (value, a, b) = polish(op, a, b);
        if value < best.0 {
            best = (value, ProductAngles::from_kets(&a, &b));
        }
    }
    best
}

/// Minimum and maximum of a Hermitian operator over product states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparableExtrema {
    pub min: f64,
    pub max: f64,
    pub argmin: ProductAngles,
    pub argmax: ProductAngles,
}

pub fn operator_extrema(op: &ComplexMat4, opts: &ExtremaOptions) -> SeparableExtrema {
    let (min, argmin) = minimize_over_products(op, opts);
    let (neg_max, argmax) = minimize_over_products(&(-op), opts);
    SeparableExtrema {
        min,
        max: -neg_max,
        argmin,
        argmax,
    }
}

/// Extrema of the S-function over all separable initial states.
pub fn separable_extrema(s: &BellSetting, c: &PhysicalConstants) -> Result<SeparableExtrema> {
    Ok(operator_extrema(
        &bell_operator(s, c)?,
        &ExtremaOptions::default(),
    ))
}

/// S on a state and its separable bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub s_state: f64,
    pub s_sep_min: f64,
    pub s_sep_max: f64,
    /// `s_state - s_sep_min`; negative certifies nonlocality.
    pub delta_min: f64,
    /// `s_sep_max - s_state`; negative certifies nonlocality.
    pub delta_max: f64,
    pub argmin: ProductAngles,
    pub argmax: ProductAngles,
}

impl WitnessResult {
    pub fn from_parts(s_state: f64, ext: &SeparableExtrema) -> Self {
        Self {
            s_state,
            s_sep_min: ext.min,
            s_sep_max: ext.max,
            delta_min: s_state - ext.min,
            delta_max: ext.max - s_state,
            argmin: ext.argmin,
            argmax: ext.argmax,
        }
    }

    pub fn violates(&self, tol: f64) -> bool {
        self.delta_min < -tol || self.delta_max < -tol
    }
}

pub fn violation(
    s: &BellSetting,
    rho: &TwoQubitState,
    c: &PhysicalConstants,
) -> Result<WitnessResult> {
    violation_with(s, rho, c, &ExtremaOptions::default())
}

pub fn violation_with(
    s: &BellSetting,
    rho: &TwoQubitState,
    c: &PhysicalConstants,
    opts: &ExtremaOptions,
) -> Result<WitnessResult> {
    let op = bell_operator(s, c)?;
    let ext = operator_extrema(&op, opts);
    Ok(WitnessResult::from_parts(rho.expectation(&op), &ext))
}

/// Only the lower separable bound and the violation below it.
pub fn delta_min(
    s: &BellSetting,
    rho: &TwoQubitState,
    c: &PhysicalConstants,
    opts: &ExtremaOptions,
) -> Result<(f64, f64, f64)> {
    let op = bell_operator(s, c)?;
    let (min, _) = minimize_over_products(&op, opts);
    let s_state = rho.expectation(&op);
    Ok((s_state - min, s_state, min))
}

/// `P_YY(n,m) - P_YY(n,m') + P_YY(n',m) + P_YY(n',m') - P_Y^A(n') - P_Y^B(m)` as an operator.
pub fn ch_operator(s: &BellSetting, c: &PhysicalConstants) -> Result<ComplexMat4> {
    let [on, om, onp, omp] = s.observables(c)?;
    let (yn, ym, ynp, ymp) = (
        on.yes_operator(),
        om.yes_operator(),
        onp.yes_operator(),
        omp.yes_operator(),
    );
    let id = ComplexMat2::identity();
    Ok(kron2(&yn, &(ym - ymp)) + kron2(&ynp, &(ym + ymp)) - kron2(&ynp, &id) - kron2(&id, &ym))
}

/// Clauser-Horne value on a state with its separable bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChResult {
    pub ch: f64,
    pub sep_min: f64,
    pub sep_max: f64,
}

pub fn ch_function(
    s: &BellSetting,
    rho: &TwoQubitState,
    c: &PhysicalConstants,
) -> Result<ChResult> {
    let op = ch_operator(s, c)?;
    let ext = operator_extrema(&op, &ExtremaOptions::default());
    Ok(ChResult {
        ch: rho.expectation(&op),
        sep_min: ext.min,
        sep_max: ext.max,
    })
}

/// Fails unless every time in the setting is finite and non-negative.
pub fn validate_setting(s: &BellSetting) -> Result<()> {
    for (name, t) in ["t_n", "t_m", "t_nprime", "t_mprime"].iter().zip(s.times()) {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::field(*name, format!("{t} must be finite and >= 0")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues4, outer4, C64};
    use crate::observable::{oracle_correlation, oracle_joint_probs, psi_minus};

    fn cp0() -> PhysicalConstants {
        PhysicalConstants::pdg().cp_conserving()
    }

    #[test]
    fn degenerate_zero_time_setting() {
        let s = BellSetting::strangeness(Strangeness::K0bar, [0.0; 4]).unwrap();
        let v = s_function(&s, &TwoQubitState::singlet(), &cp0()).unwrap();
        assert!((v + 2.0).abs() < 1e-14);
    }

    #[test]
    fn product_state_basis() {
        let k1k1 = product_state(0.0, 0.0, 0.0, 0.0);
        assert!((k1k1.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        let k2k2 = product_state(PI, 0.0, PI, 0.0);
        assert!((k2k2.matrix()[(3, 3)].re - 1.0).abs() < 1e-15);
        let k0k0bar = product_state(PI / 2.0, 0.0, PI / 2.0, PI);
        let v = kron_vec(&Quasispin::K0.ket(), &Quasispin::K0BAR.ket());
        assert!((k0k0bar.matrix() - outer4(&v, &v)).norm() < 1e-15);
        assert!(TwoQubitState::new(*k0k0bar.matrix()).is_ok());
    }

    #[test]
    fn stable_bounds_recovered() {
        let s = BellSetting::strangeness(Strangeness::K0bar, [0.0; 4]).unwrap();
        let e = separable_extrema(&s, &cp0()).unwrap();
        assert!((e.min + 2.0).abs() < 1e-10 && (e.max - 2.0).abs() < 1e-10);
    }

    #[test]
    fn s_equals_sum_of_oracle_correlations() {
        let c = PhysicalConstants::pdg();
        let q = |t: f64, p: f64, time: f64| {
            Measurement::new(Quasispin { theta: t, phi: p }, time).unwrap()
        };
        let s = BellSetting::new(
            q(0.3, 1.0, 0.4),
            q(1.9, 4.0, 2.2),
            q(2.5, 0.2, 1.1),
            q(1.0, 3.0, 6.0),
        );
        let psi = psi_minus();
        let oc = |a: &Measurement, b: &Measurement| oracle_correlation(a, b, &psi, &c).unwrap();
        let expect =
            oc(&s.n, &s.m) - oc(&s.n, &s.mprime) + oc(&s.nprime, &s.m) + oc(&s.nprime, &s.mprime);
        let got = s_function(&s, &TwoQubitState::singlet(), &c).unwrap();
        assert!((got - expect).abs() < 1e-10);
    }

    #[test]
    fn polish_reaches_product_minimum_of_diagonal_operator() {
        let d = [3.0, -1.0, 0.5, 2.0];
        let op = ComplexMat4::from_diagonal(&crate::linalg::ComplexVec4::new(
            real(d[0]),
            real(d[1]),
            real(d[2]),
            real(d[3]),
        ));
        let (min, arg) = minimize_over_products(&op, &ExtremaOptions::default());
        assert!((min + 1.0).abs() < 1e-12);
        let v = product_expectation(&op, &arg.kets().0, &arg.kets().1);
        assert!((v - min).abs() < 1e-12);
    }

    #[test]
    fn product_minimum_never_below_spectrum() {
        let c = PhysicalConstants::pdg();
        let s = BellSetting::reference();
        let op = bell_operator(&s, &c).unwrap();
        let e = operator_extrema(&op, &ExtremaOptions::default());
        let eig = hermitian_eigenvalues4(&op);
        assert!(e.min >= eig[0] - 1e-12 && e.max <= eig[3] + 1e-12);
        assert!(e.min <= e.max);
    }

    #[test]
    fn argmin_state_has_zero_violation() {
        let c = PhysicalConstants::pdg();
        let s = BellSetting::reference();
        let w = violation(&s, &TwoQubitState::singlet(), &c).unwrap();
        let w2 = violation(&s, &w.argmin.state(), &c).unwrap();
        assert!(w2.delta_min.abs() < 1e-8);
        let mixed = violation(&s, &TwoQubitState::maximally_mixed(), &c).unwrap();
        assert!(mixed.delta_min >= 0.0 && mixed.delta_max >= 0.0);
    }

    #[test]
    fn ch_stable_bounds() {
        let s = BellSetting::strangeness(Strangeness::K0bar, [0.0; 4]).unwrap();
        let r = ch_function(&s, &TwoQubitState::singlet(), &cp0()).unwrap();
        assert!((r.sep_min + 1.0).abs() < 1e-10 && r.sep_max.abs() < 1e-10);
    }

    #[test]
    fn ch_matches_oracle_probabilities_and_chsh_relation() {
        let c = PhysicalConstants::pdg();
        let s = BellSetting::reference();
        let psi = psi_minus();
        let p = |a: &Measurement, b: &Measurement| oracle_joint_probs(a, b, &psi, &c).unwrap();
        let ch_oracle = p(&s.n, &s.m).p_yy - p(&s.n, &s.mprime).p_yy
            + p(&s.nprime, &s.m).p_yy
            + p(&s.nprime, &s.mprime).p_yy
            - p(&s.nprime, &s.m).p_a()
            - p(&s.n, &s.m).p_b();
        let rho = TwoQubitState::singlet();
        let r = ch_function(&s, &rho, &c).unwrap();
        assert!((r.ch - ch_oracle).abs() < 1e-12);
        let sv = s_function(&s, &rho, &c).unwrap();
        assert!((sv - (4.0 * r.ch + 2.0)).abs() < 1e-12);
        let ext = separable_extrema(&s, &c).unwrap();
        assert!((ext.min - (4.0 * r.sep_min + 2.0)).abs() < 1e-9);
        assert!((ext.max - (4.0 * r.sep_max + 2.0)).abs() < 1e-9);
    }

    #[test]
    fn ch_of_product_state_within_bounds() {
        let c = PhysicalConstants::pdg();
        let s = BellSetting::reference();
        let rho = product_state(1.0, 2.0, 0.5, 4.0);
        let r = ch_function(&s, &rho, &c).unwrap();
        assert!(r.sep_min - 1e-9 <= r.ch && r.ch <= r.sep_max + 1e-9);
    }

    #[test]
    fn reductions_agree_with_full_expectation() {
        let op = bell_operator(&BellSetting::reference(), &PhysicalConstants::pdg()).unwrap();
        let a = Quasispin {
            theta: 0.7,
            phi: 2.0,
        }
        .ket();
        let b = Quasispin {
            theta: 2.2,
            phi: 5.1,
        }
        .ket()
            * C64::from_polar(1.0, 0.3);
        let full = product_expectation(&op, &a, &b);
        let via_a = (b.adjoint() * reduce_alice(&op, &a) * b)[(0, 0)].re;
        let via_b = (a.adjoint() * reduce_bob(&op, &b) * a)[(0, 0)].re;
        assert!((full - via_a).abs() < 1e-14 && (full - via_b).abs() < 1e-14);
    }
}
