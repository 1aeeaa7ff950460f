//! Spin-1 operators in the `S_z` eigenbasis ordered `(|+1⟩, |0⟩, |−1⟩)`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::colouring::Colour;
use crate::error::{Error, Result};
use crate::geometry::{Ray, Symmetry};

pub type Vector3 = [Complex64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance for accepting a direction as a unit vector.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix3(pub [[Complex64; 3]; 3]);

impl Matrix3 {
    pub fn zero() -> Self {
        Matrix3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        (0..3).for_each(|i| m.0[i][i] = ONE);
        m
    }

    pub fn from_real(rows: [[f64; 3]; 3]) -> Self {
        Matrix3(rows.map(|r| r.map(|x| Complex64::new(x, 0.0))))
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &Vector3, b: &Vector3) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = a[i] * b[j].conj();
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Matrix3(self.0.map(|r| r.map(|x| x * s)))
    }

    pub fn apply(&self, v: &Vector3) -> Vector3 {
        let mut out = [ZERO; 3];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..3).map(|i| self.0[i][i]).sum()
    }
}

impl Add for Matrix3 {
    type Output = Matrix3;
    fn add(mut self, rhs: Matrix3) -> Matrix3 {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl Sub for Matrix3 {
    type Output = Matrix3;
    fn sub(self, rhs: Matrix3) -> Matrix3 {
        self + rhs.scale(-ONE)
    }
}

impl Mul for Matrix3 {
    type Output = Matrix3;
    fn mul(self, rhs: Matrix3) -> Matrix3 {
        let mut m = Matrix3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        m
    }
}

pub fn inner(a: &Vector3, b: &Vector3) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &Vector3) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `[S_x, S_y, S_z]` with `ħ = 1`.
pub fn spin_matrices() -> [Matrix3; 3] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re * r, im * r);
    let z = ZERO;
    let sx = Matrix3([[z, c(1.0, 0.0), z], [c(1.0, 0.0), z, c(1.0, 0.0)], [z, c(1.0, 0.0), z]]);
    let sy = Matrix3([[z, c(0.0, -1.0), z], [c(0.0, 1.0), z, c(0.0, -1.0)], [z, c(0.0, 1.0), z]]);
    let sz = Matrix3::from_real([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
    [sx, sy, sz]
}

/// A real unit vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction([f64; 3]);

impl Direction {
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NonUnitDirection(n));
        }
        Ok(Direction(v))
    }

    pub fn from_ray(ray: &Ray) -> Self {
        Direction(ray.unit_vector())
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    /// `S·u`.
    pub fn spin_component(&self) -> Matrix3 {
        let s = spin_matrices();
        (0..3).fold(Matrix3::zero(), |acc, k| acc + s[k].scale(Complex64::new(self.0[k], 0.0)))
    }
}

/// Eigenvectors of `S·u` for eigenvalues `+1`, `0`, `−1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenbasis {
    pub plus: Vector3,
    pub zero: Vector3,
    pub minus: Vector3,
}

impl Eigenbasis {
    pub fn vectors(&self) -> [Vector3; 3] {
        [self.plus, self.zero, self.minus]
    }
}

/// Bilinear cross product; orthogonal to both arguments without conjugation.
fn cross(a: &[Complex64; 3], b: &[Complex64; 3]) -> Vector3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Null vector of the rank-two matrix `S·u − λ`, normalised with its
/// largest component real and positive (ties go to the lower index).
fn eigenvector(su: &Matrix3, lambda: f64) -> Vector3 {
    let m = *su - Matrix3::identity().scale(Complex64::new(lambda, 0.0));
    let mut best = [ZERO; 3];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let v = cross(&m.0[i], &m.0[j]);
        if norm(&v) > norm(&best) {
            best = v;
        }
    }
    let mut k = 0;
    for i in 1..3 {
        if best[i].norm() > best[k].norm() + 1e-12 {
            k = i;
        }
    }
    let phase = best[k].conj() / best[k].norm();
    let n = norm(&best);
    best.map(|x| x * phase / n)
}

pub fn spin_eigenbasis(direction: &Direction) -> Eigenbasis {
    let su = direction.spin_component();
    Eigenbasis { plus: eigenvector(&su, 1.0), zero: eigenvector(&su, 0.0), minus: eigenvector(&su, -1.0) }
}

/// Projector onto `S_u² = outcome`: outcome 0 is `|0,u⟩⟨0,u|`, outcome 1
/// its complement.
pub fn projector(direction: &Direction, outcome: u8) -> Result<Matrix3> {
    let zero = spin_eigenbasis(direction).zero;
    let p0 = Matrix3::outer(&zero, &zero);
    match outcome {
        0 => Ok(p0),
        1 => Ok(Matrix3::identity() - p0),
        _ => Err(Error::Precondition(format!("spin-squared outcome {outcome} is not 0 or 1"))),
    }
}

/// Green is outcome 0, red is outcome 1.
pub fn colour_projector(direction: &Direction, colour: Colour) -> Matrix3 {
    projector(direction, colour.outcome()).expect("colour outcomes are 0 or 1")
}

/// Cartesian-to-spherical change of basis. Row `m` holds the conjugated
/// Cartesian components of `e_{+1} = −(x̂ + iŷ)/√2`, `e_0 = ẑ` and
/// `e_{−1} = (x̂ − iŷ)/√2`.
fn spherical_basis() -> Matrix3 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    Matrix3([[c(-r, 0.0), c(0.0, r), ZERO], [ZERO, ZERO, ONE], [c(r, 0.0), c(0.0, r), ZERO]])
}

/// Unitary representing the proper rotation of a cube symmetry on spin-1
/// states, so that `U P(u) U† = P(R u)`.
pub fn rotation_operator(symmetry: &Symmetry) -> Matrix3 {
    let r = symmetry.rotation();
    let rot = Matrix3::from_real(r);
    let c = spherical_basis();
    c * rot * c.adjoint()
}
