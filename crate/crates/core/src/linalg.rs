//! Small dense complex linear algebra in the {|K1>, |K2>} basis.
//!
//! Two-kaon operators use the ordering |K1 K1>, |K1 K2>, |K2 K1>, |K2 K2>,
//! i.e. the Kronecker product with Alice's factor on the left.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type ComplexVec2 = Vector2<C64>;
pub type ComplexVec4 = Vector4<C64>;
pub type ComplexMat2 = Matrix2<C64>;
pub type ComplexMat4 = Matrix4<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn outer2(u: &ComplexVec2, v: &ComplexVec2) -> ComplexMat2 {
    u * v.adjoint()
}

pub fn outer4(u: &ComplexVec4, v: &ComplexVec4) -> ComplexMat4 {
    u * v.adjoint()
}

pub fn kron2(a: &ComplexMat2, b: &ComplexMat2) -> ComplexMat4 {
    let mut out = ComplexMat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn kron_vec(a: &ComplexVec2, b: &ComplexVec2) -> ComplexVec4 {
    ComplexVec4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
}

/// Largest entrywise deviation from `m == m^dagger`.
pub fn hermiticity_defect2(m: &ComplexMat2) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_defect4(m: &ComplexMat4) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Unit vector orthogonal to `v`: (a, b) -> (-conj(b), conj(a)).
pub fn orthogonal_complement(v: &ComplexVec2) -> ComplexVec2 {
    ComplexVec2::new(-v[1].conj(), v[0].conj())
}

/// Eigen-decomposition of a 2x2 Hermitian matrix, eigenvalues ascending.
///
/// Returns `(lo, hi, v_lo)` with `v_lo` the unit eigenvector for `lo`.
pub fn hermitian_eigen2(m: &ComplexMat2) -> (f64, f64, ComplexVec2) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    let lo = mean - r;
    let hi = mean + r;
    // (m - lo) v = 0: pick the better-conditioned of the two row equations.
    let v = if b.norm() < 1e-300 {
        if a <= d {
            ComplexVec2::new(real(1.0), real(0.0))
        } else {
            ComplexVec2::new(real(0.0), real(1.0))
        }
    } else if (a - lo).abs() >= (d - lo).abs() {
        ComplexVec2::new(-b, real(a - lo))
    } else {
        ComplexVec2::new(real(d - lo), -b.conj())
    };
    let n = v.norm();
    (lo, hi, v / real(n))
}

/// Eigenvalues of a 4x4 Hermitian matrix, ascending.
pub fn hermitian_eigenvalues4(m: &ComplexMat4) -> [f64; 4] {
    let sym = (m + m.adjoint()) * real(0.5);
    let eig = sym.symmetric_eigenvalues();
    let mut out = [eig[0], eig[1], eig[2], eig[3]];
    out.sort_by(|x, y| x.total_cmp(y));
    out
}

/// Largest singular value of a 2x2 matrix.
pub fn operator_norm2(m: &ComplexMat2) -> f64 {
    let (_, hi, _) = hermitian_eigen2(&(m.adjoint() * m));
    hi.max(0.0).sqrt()
}

/// Bloch-sphere angles of a unit vector, up to global phase.
///
/// theta in [0, pi], phi in [0, 2 pi); phi is 0 at the poles.
pub fn bloch_angles(v: &ComplexVec2) -> (f64, f64) {
    let n = v.norm();
    let a = v[0] / n;
    let b = v[1] / n;
    let theta = 2.0 * b.norm().atan2(a.norm());
    let phi = if a.norm() < 1e-15 || b.norm() < 1e-15 {
        0.0
    } else {
        (b * a.conj()).arg().rem_euclid(std::f64::consts::TAU)
    };
    (theta, phi)
}

/// Real Bloch vector <v|sigma|v> of a unit vector.
pub fn bloch_vector(v: &ComplexVec2) -> [f64; 3] {
    let a = v[0];
    let b = v[1];
    let ab = a.conj() * b;
    [2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()]
}

pub fn pauli() -> [ComplexMat2; 3] {
    let z = real(0.0);
    let one = real(1.0);
    let i = c(0.0, 1.0);
    [
        ComplexMat2::new(z, one, one, z),
        ComplexMat2::new(z, -i, i, z),
        ComplexMat2::new(one, z, z, -one),
    ]
}
