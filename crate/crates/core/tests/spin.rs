mod common;

use common::{float_ray, float_orthogonal, p0, zero_ket, LABELS, M3};
use num_complex::Complex64;
use pks_core::geometry::PeresSet;
use pks_core::colouring::Colour;
use pks_core::spin::{
    colour_projector, inner, projector, rotation_operator, spin_eigenbasis, spin_matrices, Direction, Matrix3, Vector3,
};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest component-wise distance after removing a global phase.
fn phase_distance(a: &Vector3, b: &Vector3) -> f64 {
    let overlap = inner(b, a);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    a.iter().zip(b).map(|(x, y)| (x - y * phase).norm()).fold(0.0, f64::max)
}

fn close(a: &Matrix3, b: &M3) -> f64 {
    (0..3).flat_map(|i| (0..3).map(move |j| (a.0[i][j] - b[i][j]).norm())).fold(0.0, f64::max)
}

#[test]
fn eigenvectors_along_x_and_y() {
    let h = 0.5;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = spin_eigenbasis(&Direction::new([1.0, 0.0, 0.0]).unwrap());
    let y = spin_eigenbasis(&Direction::new([0.0, 1.0, 0.0]).unwrap());
    let expected_x = [
        [c(h, 0.0), c(s, 0.0), c(h, 0.0)],
        [c(s, 0.0), c(0.0, 0.0), c(-s, 0.0)],
        [c(h, 0.0), c(-s, 0.0), c(h, 0.0)],
    ];
    let expected_y = [
        [c(h, 0.0), c(0.0, s), c(-h, 0.0)],
        [c(s, 0.0), c(0.0, 0.0), c(s, 0.0)],
        [c(h, 0.0), c(0.0, -s), c(-h, 0.0)],
    ];
    for (got, want) in x.vectors().iter().zip(&expected_x).chain(y.vectors().iter().zip(&expected_y)) {
        assert!(phase_distance(got, want) < 1e-12, "{got:?} vs {want:?}");
    }
    // The phase convention makes |0,x⟩ match exactly.
    assert!(x.zero.iter().zip(&expected_x[1]).all(|(a, b)| (a - b).norm() < 1e-12));
}

#[test]
fn commutation_relations() {
    let [sx, sy, sz] = spin_matrices();
    let i = c(0.0, 1.0);
    assert!((sx * sy - sy * sx - sz.scale(i)).frobenius_norm() < 1e-14);
    assert!((sy * sz - sz * sy - sx.scale(i)).frobenius_norm() < 1e-14);
    assert!((sz * sx - sx * sz - sy.scale(i)).frobenius_norm() < 1e-14);
    let casimir = sx * sx + sy * sy + sz * sz;
    assert!((casimir - Matrix3::identity().scale(c(2.0, 0.0))).frobenius_norm() < 1e-14);
}

#[test]
fn projectors_match_the_cartesian_oracle() {
    for label in LABELS {
        let u = float_ray(label);
        let d = Direction::new(u).unwrap();
        let p = projector(&d, 0).unwrap();
        assert!(close(&p, &p0(u)) < 1e-12, "{label}");
        assert!((p * p - p).frobenius_norm() < 1e-12);
        assert!((p.adjoint() - p).frobenius_norm() < 1e-12);
        assert!((p.trace() - c(1.0, 0.0)).norm() < 1e-12);
        let q = projector(&d, 1).unwrap();
        assert!((q * q - q).frobenius_norm() < 1e-12);
        assert!((p + q - Matrix3::identity()).frobenius_norm() < 1e-15);
        assert!(phase_distance(&spin_eigenbasis(&d).zero, &zero_ket(u)) < 1e-12);
    }
    assert!(projector(&Direction::new([0.0, 0.0, 1.0]).unwrap(), 2).is_err());
    assert!(Direction::new([1.0, 1.0, 0.0]).is_err());
}

#[test]
fn orthogonal_pairs_have_vanishing_green_products() {
    let ps = PeresSet::new();
    let dirs: Vec<Direction> = ps.rays().iter().map(Direction::from_ray).collect();
    for i in 0..33 {
        for j in 0..33 {
            if i != j && float_orthogonal(i, j) {
                let n = (colour_projector(&dirs[i], Colour::Green) * colour_projector(&dirs[j], Colour::Green))
                    .frobenius_norm();
                assert!(n < 1e-12);
            }
        }
    }
}

#[test]
fn basis_products_vanish_unless_exactly_one_green() {
    let ps = PeresSet::new();
    for b in ps.bases() {
        let d: Vec<Direction> = b.rays.iter().map(|&r| Direction::from_ray(&ps.ray(r))).collect();
        for outcomes in 0u8..8 {
            let o = [outcomes & 1, outcomes >> 1 & 1, outcomes >> 2 & 1];
            let prod = projector(&d[0], o[0]).unwrap() * projector(&d[1], o[1]).unwrap() * projector(&d[2], o[2]).unwrap();
            let greens = o.iter().filter(|x| **x == 0).count();
            if greens == 1 {
                assert!(prod.frobenius_norm() >= 0.01);
            } else {
                assert!(prod.frobenius_norm() < 1e-12);
            }
        }
    }
}

#[test]
fn rotation_operators_are_covariant() {
    let ps = PeresSet::new();
    for g in ps.group() {
        let u = rotation_operator(g);
        assert!((u * u.adjoint() - Matrix3::identity()).frobenius_norm() < 1e-12);
        let r = g.rotation();
        let [sx, sy, sz] = spin_matrices();
        let s = [sx, sy, sz];
        // U S_k U† = Σ_j R_jk S_j.
        for k in 0..3 {
            let rotated = (0..3).fold(Matrix3::zero(), |acc, j| acc + s[j].scale(c(r[j][k], 0.0)));
            assert!((u * s[k] * u.adjoint() - rotated).frobenius_norm() < 1e-12);
        }
        for (i, ray) in ps.rays().iter().enumerate() {
            let image = ps.ray(ps.apply_index(ps.symmetry_index(g).unwrap(), i));
            let lhs = u * projector(&Direction::from_ray(ray), 0).unwrap() * u.adjoint();
            let rhs = projector(&Direction::from_ray(&image), 0).unwrap();
            assert!((lhs - rhs).frobenius_norm() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn eigenbasis_is_orthonormal_and_correct(theta in 0.0f64..std::f64::consts::PI, phi in 0.0f64..6.3) {
        let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let d = Direction::new(u).unwrap();
        let e = spin_eigenbasis(&d);
        let su = d.spin_component();
        for (v, lambda) in e.vectors().iter().zip([1.0, 0.0, -1.0]) {
            let w = su.apply(v);
            prop_assert!(w.iter().zip(v).all(|(a, b)| (a - b * lambda).norm() < 1e-12));
        }
        let vs = e.vectors();
        for a in 0..3 {
            for b in 0..3 {
                let expected = if a == b { 1.0 } else { 0.0 };
                prop_assert!((inner(&vs[a], &vs[b]) - c(expected, 0.0)).norm() < 1e-12);
            }
        }
        prop_assert!(phase_distance(&e.zero, &zero_ket(u)) < 1e-12);
    }
}
