mod common;

use std::collections::BTreeSet;

use common::{brute_bases, brute_pairs, index, LABELS};
use pks_core::colouring::{
    act_on_colouring, is_consistent, membership, pks_events, pks_sets_containing, Colour, Colouring,
    PksEvent,
};
use pks_core::geometry::{Basis, PeresSet, Ray, RayType, Symmetry};
use pks_core::ks::{
    fiducial_orbit, fiducial_seed, gamma_p, gamma_p_prime, peres_walkthrough, seed_colourings, solve,
    verify_ks_theorem, ConstraintSystem, TraceOutcome,
};
use proptest::prelude::*;

/// Frozen from the brute-force oracle over all 528 pairs.
const N_PAIRS: usize = 72;
const N_PAIRS_OUTSIDE_BASES: usize = 24;

fn swap_index(ps: &PeresSet) -> usize {
    ps.symmetry_index(&Symmetry::SWAP_XY).unwrap()
}

#[test]
fn peres_set_matches_the_ray_list() {
    let ps = PeresSet::new();
    assert_eq!(ps.rays().len(), 33);
    assert_eq!(ps.type_counts(), [3, 6, 12, 12]);
    let expected_types = [(0..3, RayType::I), (3..9, RayType::II), (9..21, RayType::III), (21..33, RayType::IV)];
    for (range, t) in expected_types {
        for i in range {
            assert_eq!(ps.ray(i).ray_type(), t, "{}", LABELS[i]);
        }
    }
    assert_eq!(ps.find("001").unwrap(), 0);
    assert_eq!(ps.ray(32), "2m1m1".parse::<Ray>().unwrap());
    assert_eq!(ps.ray(32).digits(), [2, -1, -1]);
}

#[test]
fn orthogonality_matches_float_oracle() {
    let ps = PeresSet::new();
    let oracle = brute_pairs();
    assert_eq!(oracle.len(), N_PAIRS);
    let lib: Vec<[usize; 2]> = ps.pairs().iter().map(|p| p.rays).collect();
    assert_eq!(lib, oracle);
    for i in 0..33 {
        for j in 0..33 {
            assert_eq!(ps.orthogonal(i, j), i != j && common::float_orthogonal(i, j));
        }
    }
}

#[test]
fn sixteen_bases_including_the_proof_bases() {
    let ps = PeresSet::new();
    let oracle: Vec<Basis> = brute_bases().into_iter().map(Basis::new).collect();
    assert_eq!(oracle.len(), 16);
    assert_eq!(ps.bases(), oracle.as_slice());
    for b in ps.proof_bases() {
        assert!(ps.basis_index(&b).is_some());
    }
    let b7 = Basis::new([index("201"), index("010"), index("m102")]);
    assert_eq!(ps.proof_bases()[6], b7);
}

#[test]
fn pair_annotations() {
    let ps = PeresSet::new();
    let outside = ps.pairs().iter().filter(|p| !p.in_basis).count();
    assert_eq!(outside, N_PAIRS_OUTSIDE_BASES);
    let lookup = |a: &str, b: &str| ps.pairs()[ps.pair_index(index(a), index(b)).unwrap()];
    // {001, 110, 1m10} is a basis outside the hand proof.
    assert!(lookup("110", "1m10").in_basis);
    assert!(lookup("001", "110").in_basis);
    // Rays outside B_4 orthogonal to one of its members.
    assert!(!lookup("1m12", "20m1").in_basis);
    assert!(!lookup("1m12", "021").in_basis);
}

#[test]
fn group_preserves_structure() {
    let ps = PeresSet::new();
    let bases: BTreeSet<Basis> = ps.bases().iter().copied().collect();
    for g in 0..24 {
        for i in 0..33 {
            let j = ps.apply_index(g, i);
            assert_eq!(ps.ray(i).ray_type(), ps.ray(j).ray_type());
            for k in 0..33 {
                assert_eq!(ps.orthogonal(i, k), ps.orthogonal(j, ps.apply_index(g, k)));
            }
        }
        let image: BTreeSet<Basis> = ps.bases().iter().map(|b| ps.apply_to_basis(g, b)).collect();
        assert_eq!(image, bases);
    }
}

#[test]
fn group_is_transitive_on_each_type() {
    let ps = PeresSet::new();
    for u in 0..33 {
        for v in 0..33 {
            let same = ps.ray(u).ray_type() == ps.ray(v).ray_type();
            let hit = (0..24).any(|g| ps.apply_index(g, u) == v);
            assert_eq!(same, hit, "{} -> {}", LABELS[u], LABELS[v]);
        }
    }
}

#[test]
fn ks_theorem_is_unsat() {
    let ps = PeresSet::new();
    let cert = verify_ks_theorem(&ps);
    assert!(cert.is_unsat());
    assert_eq!(cert.rays, 33);
    assert_eq!(cert.bases, 16);
    assert_eq!(cert.pairs, N_PAIRS);
    assert!(cert.closed_branches > 0);
    assert_eq!(cert.contradictions.iter().map(|(_, n)| n).sum::<usize>(), cert.closed_branches);
}

fn brute_force_seed_count(ps: &PeresSet, with_pairs: bool) -> usize {
    let bases = &ps.proof_bases()[..4];
    let rays: Vec<usize> = bases.iter().flat_map(|b| b.rays).collect::<BTreeSet<_>>().into_iter().collect();
    assert_eq!(rays.len(), 10);
    let pairs = brute_pairs();
    (0u32..1 << 10)
        .filter(|m| {
            let green = |r: usize| m >> rays.iter().position(|x| *x == r).unwrap() & 1 == 1;
            let bases_ok = bases.iter().all(|b| b.rays.iter().filter(|r| green(**r)).count() == 1);
            let pairs_ok = pairs
                .iter()
                .filter(|[a, b]| rays.contains(a) && rays.contains(b))
                .all(|[a, b]| !(green(*a) && green(*b)));
            bases_ok && (!with_pairs || pairs_ok)
        })
        .count()
}

#[test]
fn seed_colourings_of_the_first_four_bases() {
    let ps = PeresSet::new();
    assert_eq!(brute_force_seed_count(&ps, false), 24);
    assert_eq!(seed_colourings(&ps).len(), 24);
    // The extra orthogonal pair (001, 110) inside the ten rays removes four.
    assert_eq!(brute_force_seed_count(&ps, true), 20);
    let scope = ps.proof_bases()[..4].iter().fold(0, |m, b| m | b.mask());
    assert_eq!(solve(&ConstraintSystem::induced(&ps, scope)).solutions.len(), 20);
}

#[test]
fn fiducial_walk_reproduces_the_forcing_schedule() {
    let ps = PeresSet::new();
    let w = peres_walkthrough(&ps, fiducial_seed(&ps)).unwrap();
    assert_eq!(w.symmetry, Some(0));
    let forced: Vec<&str> = w.trace.steps.iter().map(|s| ps.label(s.forced_green)).collect();
    assert_eq!(forced, ["102", "211", "201", "112", "012", "121"]);
    let names: Vec<String> = w.trace.steps.iter().map(|s| s.name.clone().unwrap()).collect();
    assert_eq!(names, ["B5", "B6", "B7", "B8", "B9", "B10"]);
    // The two already-red rays of each forced basis.
    let italic: [[&str; 2]; 6] = [
        ["20m1", "010"],
        ["0m11", "2m1m1"],
        ["010", "m102"],
        ["1m10", "m1m12"],
        ["100", "02m1"],
        ["m101", "m12m1"],
    ];
    for (step, reds) in w.trace.steps.iter().zip(italic) {
        let expected: BTreeSet<usize> = reds.iter().map(|l| ps.find(l).unwrap()).collect();
        let got: BTreeSet<usize> = step.already_red.iter().copied().collect();
        assert_eq!(got, expected);
    }
    assert_eq!(w.trace.contradiction_basis(), Some(ps.proof_bases()[10]));
    match &w.trace.outcome {
        TraceOutcome::Contradiction { name, .. } => assert_eq!(name.as_deref(), Some("B11")),
        other => panic!("unexpected outcome {other:?}"),
    }
}

#[test]
fn mirrored_walk_contradicts_at_b7() {
    let ps = PeresSet::new();
    let swap = swap_index(&ps);
    let seed = fiducial_seed(&ps).transported(&ps, swap);
    let w = peres_walkthrough(&ps, seed).unwrap();
    assert_eq!(w.symmetry, Some(swap));
    assert_eq!(w.trace.contradiction_basis(), Some(ps.proof_bases()[6]));
}

#[test]
fn every_seed_reaches_a_contradiction() {
    let ps = PeresSet::new();
    let orbit = fiducial_orbit(&ps);
    let distinct: BTreeSet<_> = orbit.iter().map(|(_, s)| *s).collect();
    assert_eq!(distinct.len(), 24, "the fiducial orbit is free");
    let b11 = ps.proof_bases()[10];
    for (g, seed) in orbit {
        let w = peres_walkthrough(&ps, seed).unwrap();
        assert_eq!(w.trace.contradiction_basis(), Some(ps.apply_to_basis(g, &b11)));
        assert_eq!(w.trace.steps.len(), 6);
    }
    let seeds = seed_colourings(&ps);
    let in_orbit = seeds.iter().filter(|s| fiducial_orbit(&ps).iter().any(|(_, o)| o == *s)).count();
    assert_eq!(in_orbit, 4);
    for seed in seeds {
        let w = peres_walkthrough(&ps, seed).unwrap();
        assert!(w.trace.all_contradictions(), "seed {seed}");
    }
}

#[test]
fn gamma_p_matches_the_reference_columns() {
    let ps = PeresSet::new();
    let gp = gamma_p(&ps);
    let gpp = gamma_p_prime(&ps);
    let table_p = "g r r g r g r r r g r r r g r g r r r r r g r g r g r r r g r r r";
    let table_pp = "g r r g r g r r r g r g r g r r r r r r r g g r r g r r r g r r r";
    assert_eq!(gp, table_p.replace(' ', "").parse().unwrap());
    assert_eq!(gpp, table_pp.replace(' ', "").parse().unwrap());
    let greens: BTreeSet<&str> = gp.greens().map(|i| ps.label(i)).collect();
    let expected: BTreeSet<&str> =
        ["001", "011", "101", "012", "102", "201", "112", "1m12", "121", "211"].into_iter().collect();
    assert_eq!(greens, expected);
    assert_eq!(gp.colour(index("021")), Colour::Red);
    assert_eq!(gpp.colour(index("021")), Colour::Green);
    assert_eq!(gp.colour(index("112")), Colour::Green);
}

#[test]
fn pks_sets_of_the_peres_colourings() {
    let ps = PeresSet::new();
    let b = ps.proof_bases();
    assert_eq!(pks_sets_containing(&ps, &gamma_p(&ps)), vec![PksEvent::RedBasis(b[10])]);
    assert_eq!(pks_sets_containing(&ps, &gamma_p_prime(&ps)), vec![PksEvent::RedBasis(b[6])]);
    let red = pks_sets_containing(&ps, &Colouring::all_red());
    assert!(red.contains(&PksEvent::RedBasis(b[6])) && red.contains(&PksEvent::RedBasis(b[10])));
    assert_eq!(red.len(), 16);
    assert!(membership(&gamma_p(&ps), &PksEvent::RedBasis(b[10])));
}

#[test]
fn swap_is_an_involution_on_colourings() {
    let ps = PeresSet::new();
    let swap = swap_index(&ps);
    let gp = gamma_p(&ps);
    assert_eq!(act_on_colouring(&ps, swap, &act_on_colouring(&ps, swap, &gp)), gp);
    assert_eq!(act_on_colouring(&ps, 0, &gp), gp);
}

fn colouring() -> impl Strategy<Value = Colouring> {
    any::<u64>().prop_map(Colouring::from_green_mask)
}

proptest! {
    #[test]
    fn every_colouring_lies_in_a_pks_set(c in colouring()) {
        let ps = PeresSet::new();
        prop_assert!(!pks_sets_containing(&ps, &c).is_empty());
        prop_assert!(!is_consistent(&ps, &c));
    }

    #[test]
    fn membership_is_equivariant(c in colouring(), g in 0usize..24) {
        let ps = PeresSet::new();
        let gc = act_on_colouring(&ps, g, &c);
        for e in pks_events(&ps) {
            prop_assert_eq!(membership(&c, &e), membership(&gc, &e.transported(&ps, g)));
        }
    }

    #[test]
    fn action_is_a_left_action(c in colouring(), a in 0usize..24, b in 0usize..24) {
        let ps = PeresSet::new();
        let ab = ps.symmetry_index(&ps.group()[a].compose(&ps.group()[b])).unwrap();
        let lhs = act_on_colouring(&ps, ab, &c);
        let rhs = act_on_colouring(&ps, a, &act_on_colouring(&ps, b, &c));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn ray_labels_parse_back(i in 0usize..33) {
        let ps = PeresSet::new();
        let r = ps.ray(i);
        prop_assert_eq!(r.to_string().parse::<Ray>().unwrap(), r);
        prop_assert_eq!(r.spaced_label().parse::<Ray>().unwrap(), r);
    }
}
