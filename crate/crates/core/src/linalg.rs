//! Small fixed-size complex linear algebra shared by the physics modules.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector2, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Vec2 = Vector2<C64>;
pub type Vec4 = Vector4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Pauli basis indexed 0: identity, 1: x, 2: y, 3: z.
pub fn pauli(alpha: usize) -> Mat2 {
    match alpha {
        0 => Mat2::identity(),
        1 => Mat2::new(ZERO, ONE, ONE, ZERO),
        2 => Mat2::new(ZERO, -I, I, ZERO),
        3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {alpha} out of range"),
    }
}

/// Real coefficients of a Hermitian 2x2 matrix in the Pauli basis, `tr(σ_α A)/2`.
pub fn pauli_coefficients(a: &Mat2) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (alpha, c) in out.iter_mut().enumerate() {
        *c = ((pauli(alpha) * a).trace() * 0.5).re;
    }
    out
}

pub fn hermitian_part(a: &Mat2) -> Mat2 {
    (a + a.adjoint()) * C64::from(0.5)
}

/// Largest entry magnitude of the anti-Hermitian part.
pub fn anti_hermitian_residue(a: &Mat2) -> f64 {
    let d = (a - a.adjoint()) * C64::from(0.5);
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues (ascending) of a Hermitian 2x2 matrix.
pub fn hermitian_eigenvalues(a: &Mat2) -> [f64; 2] {
    let mean = 0.5 * (a[(0, 0)].re + a[(1, 1)].re);
    let half_diff = 0.5 * (a[(0, 0)].re - a[(1, 1)].re);
    let r = (half_diff * half_diff + a[(0, 1)].norm_sqr()).sqrt();
    [mean - r, mean + r]
}

/// Principal square root of a Hermitian positive-definite 2x2 matrix.
///
/// Uses `√A = (A + √det A · I) / √(tr A + 2√det A)`, exact for 2x2.
pub fn hermitian_sqrt(a: &Mat2) -> Mat2 {
    let det = a.determinant().re;
    let s = det.max(0.0).sqrt();
    let t = (a.trace().re + 2.0 * s).sqrt();
    (a + Mat2::identity() * C64::from(s)) / C64::from(t)
}

pub fn inverse2(a: &Mat2) -> Mat2 {
    let det = a.determinant();
    Mat2::new(a[(1, 1)], -a[(0, 1)], -a[(1, 0)], a[(0, 0)]) / det
}

/// Solve `A X + X A = C` (`A` with no pair of eigenvalues summing to zero).
pub fn sylvester_symmetric(a: &Mat2, c: &Mat2) -> Option<Mat2> {
    let k = kron(&Mat2::identity(), a) + kron(&a.transpose(), &Mat2::identity());
    let rhs = Vec4::from_column_slice(c.as_slice());
    let x = k.lu().solve(&rhs)?;
    Some(Mat2::from_column_slice(x.as_slice()))
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
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

/// `exp(-i θ n·σ)` for a real unit axis `n` (not checked).
pub fn su2_rotation(theta: f64, n: [f64; 3]) -> Mat2 {
    let (s, c) = theta.sin_cos();
    let gen = pauli(1) * C64::from(n[0]) + pauli(2) * C64::from(n[1]) + pauli(3) * C64::from(n[2]);
    Mat2::identity() * C64::from(c) - gen * (I * s)
}

/// Rotation by `angle` about x: `exp(-i angle σ_x / 2)`.
pub fn rx(angle: f64) -> Mat2 {
    su2_rotation(0.5 * angle, [1.0, 0.0, 0.0])
}

/// Rotation by `angle` about y: `exp(-i angle σ_y / 2)`.
pub fn ry(angle: f64) -> Mat2 {
    su2_rotation(0.5 * angle, [0.0, 1.0, 0.0])
}

/// `exp(-i θ P)` for a Pauli string `P` with `P² = I`.
pub fn pauli_string_exp(theta: f64, p: &Mat4) -> Mat4 {
    let (s, c) = theta.sin_cos();
    Mat4::identity() * C64::from(c) - p * (I * s)
}

/// `exp(-i t A)` for a Hermitian 4x4 `A`, by eigendecomposition.
pub fn hermitian_exp4(a: &Mat4, t: f64) -> Mat4 {
    let herm = (a + a.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(herm);
    let phases = Mat4::from_diagonal(&eig.eigenvalues.map(|e| (-I * (e * t)).exp()));
    eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Normalized Pauli expectations `⟨v|σ_α|v⟩ / ⟨v|v⟩` for α = x, y, z.
pub fn spin_texture(v: &Vec2) -> [f64; 3] {
    let norm = v[0].norm_sqr() + v[1].norm_sqr();
    let cross = v[0].conj() * v[1];
    [
        2.0 * cross.re / norm,
        2.0 * cross.im / norm,
        (v[0].norm_sqr() - v[1].norm_sqr()) / norm,
    ]
}

/// Wrap an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut x = a.rem_euclid(two_pi);
    if x > std::f64::consts::PI {
        x -= two_pi;
    }
    x
}

/// Distance between two angles modulo `period`, in [0, period/2].
pub fn angle_distance_mod(a: f64, b: f64, period: f64) -> f64 {
    let x = (a - b).rem_euclid(period);
    x.min(period - x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sqrt_squares_back() {
        let a = Mat2::new(
            C64::new(3.0, 0.0),
            C64::new(0.4, -0.7),
            C64::new(0.4, 0.7),
            C64::new(1.5, 0.0),
        );
        let s = hermitian_sqrt(&a);
        let back = s * s;
        for (x, y) in back.iter().zip(a.iter()) {
            assert_relative_eq!(x.re, y.re, epsilon = 1e-13);
            assert_relative_eq!(x.im, y.im, epsilon = 1e-13);
        }
        assert!(anti_hermitian_residue(&s) < 1e-15);
        assert!(hermitian_eigenvalues(&s)[0] > 0.0);
    }

    #[test]
    fn pauli_roundtrip() {
        let c = [0.3, -1.2, 0.5, 2.0];
        let m: Mat2 = (0..4).map(|a| pauli(a) * C64::from(c[a])).sum();
        let back = pauli_coefficients(&m);
        for (x, y) in back.iter().zip(c.iter()) {
            assert_relative_eq!(x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn rotation_conjugation_maps_axes() {
        // R_x(π/2) σ_y R_x(-π/2) = σ_z, R_y(π/2) σ_z R_y(-π/2) = σ_x
        let a = rx(std::f64::consts::FRAC_PI_2) * pauli(2) * rx(-std::f64::consts::FRAC_PI_2);
        let b = ry(std::f64::consts::FRAC_PI_2) * pauli(3) * ry(-std::f64::consts::FRAC_PI_2);
        assert!((a - pauli(3)).norm() < 1e-14);
        assert!((b - pauli(1)).norm() < 1e-14);
    }

    #[test]
    fn sylvester_solution_satisfies_equation() {
        let a = Mat2::new(C64::new(2.0, 0.0), C64::new(0.3, -0.4), C64::new(0.3, 0.4), C64::new(1.1, 0.0));
        let c = Mat2::new(C64::new(0.5, 0.1), C64::new(-1.0, 2.0), C64::new(0.7, 0.0), C64::new(0.0, -0.3));
        let x = sylvester_symmetric(&a, &c).unwrap();
        assert!((a * x + x * a - c).norm() < 1e-13);
    }

    #[test]
    fn exp4_matches_pauli_string_exp() {
        let zz = kron(&pauli(3), &pauli(3));
        let xz = kron(&pauli(1), &pauli(3));
        let a = zz * C64::from(0.7) + xz * C64::from(0.7);
        let u = hermitian_exp4(&a, 0.9);
        // zz and xz anticommute, so exp(-i t (P+Q)) has a closed form with norm √2·0.7
        let theta = 0.9 * 0.7 * 2f64.sqrt();
        let expected = pauli_string_exp(theta, &((zz + xz) / C64::from(2f64.sqrt())));
        assert!((u - expected).norm() < 1e-12);
        assert!((u * u.adjoint() - Mat4::identity()).norm() < 1e-12);
    }

    #[test]
    fn wrap_and_distance() {
        assert_relative_eq!(wrap_angle(3.0 * std::f64::consts::PI), std::f64::consts::PI);
        assert_relative_eq!(angle_distance_mod(0.1, 1.6708, std::f64::consts::FRAC_PI_2), 0.0, epsilon = 1e-4);
    }
}
