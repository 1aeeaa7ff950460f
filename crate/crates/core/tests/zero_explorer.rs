mod common;

use common::{float_ray, index, matvec, p0, p1, LABELS};
use num_complex::Complex64;
use pks_core::colouring::{pks_events, Colour, HomogeneousEvent};
use pks_core::geometry::PeresSet;
use pks_core::ks::{gamma_p, gamma_p_prime};
use pks_core::path_measure::{InitialState, MeasureContext, Ordering, DEFAULT_THRESHOLD};
use pks_core::spin::rotation_operator;
use pks_core::zero_explorer::{
    coverage_check, evaluate_candidate, last_ray_021_construction, ordering_search, scan_zero_events, verify_witness,
    CoverageStatus, Provenance, ScanConfig, SearchConfig, SearchStrategy, ZeroEventRecord,
};
use pks_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Zero events of the default context (table order, `|0,z⟩`) fixing at most
/// three rays, frozen from the brute-force count below.
const DEFAULT_ZERO_EVENTS_MAX3: usize = 13507;

/// Counts zero events of the default context by direct products over every
/// choice of up to three rays, in table order.
fn brute_default_count(max_fixed: usize) -> usize {
    let z = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let mut count = 0;
    let mut stack: Vec<(usize, usize, [Complex64; 3])> = vec![(0, 0, z)];
    while let Some((start, depth, v)) = stack.pop() {
        for ray in start..33 {
            let u = float_ray(LABELS[ray]);
            for proj in [p0(u), p1(u)] {
                let w = matvec(&proj, &v);
                if w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() < DEFAULT_THRESHOLD {
                    count += 1;
                }
                if depth + 1 < max_fixed {
                    stack.push((ray + 1, depth + 1, w));
                }
            }
        }
    }
    count
}

#[test]
fn default_scan_count_matches_the_brute_force_oracle() {
    assert_eq!(brute_default_count(3), DEFAULT_ZERO_EVENTS_MAX3);
    let ps = PeresSet::new();
    let report = scan_zero_events(&MeasureContext::default_for(&ps), &ps, &ScanConfig::new(3)).unwrap();
    assert_eq!(report.records.len(), DEFAULT_ZERO_EVENTS_MAX3);
    assert_eq!(report.count(Provenance::Pks), 88);
    assert!(report.records.iter().all(|r| r.norm < DEFAULT_THRESHOLD));
}

#[test]
fn every_pks_event_appears_in_every_scan() {
    let ps = PeresSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..3 {
        let ctx = MeasureContext::new(&ps, Ordering::random(&mut rng), InitialState::random_mixed(&mut rng, 2));
        let report = scan_zero_events(&ctx, &ps, &ScanConfig::new(3)).unwrap();
        for e in pks_events(&ps) {
            let rec = report.records.iter().find(|r| r.event == e.to_event()).expect("PKS event scanned");
            assert_eq!(rec.provenance, Provenance::Pks);
        }
    }
}

#[test]
fn adjacent_orthogonal_rays_give_accidental_zeros() {
    let ps = PeresSet::new();
    // 001 and 010 sit at positions 1 and 2 of table order.
    let ctx = MeasureContext::new(&ps, Ordering::table_order(), InitialState::random_pure(&mut ChaCha8Rng::seed_from_u64(2)));
    let report = scan_zero_events(&ctx, &ps, &ScanConfig::new(3)).unwrap();
    let pair = HomogeneousEvent::ray(index("001"), Colour::Green).fix(index("010"), Colour::Green);
    assert!(report.records.iter().any(|r| r.event == pair));
    let refined = pair.fix(index("211"), Colour::Red);
    let rec = report.records.iter().find(|r| r.event == refined).unwrap();
    assert_eq!(rec.provenance, Provenance::AccidentalAdjacent);
}

#[test]
fn scan_guards() {
    let ps = PeresSet::new();
    let ctx = MeasureContext::default_for(&ps);
    assert!(matches!(scan_zero_events(&ctx, &ps, &ScanConfig::new(9)), Err(Error::Precondition(_))));
    let tight = ScanConfig { node_budget: 1000, ..ScanConfig::new(3) };
    assert!(matches!(scan_zero_events(&ctx, &ps, &tight), Err(Error::BudgetExceeded(_))));
    assert!(scan_zero_events(&ctx, &ps, &ScanConfig::new(0)).unwrap().records.is_empty());
}

#[test]
fn detector_at_the_last_position_leaves_the_scan_unchanged() {
    let ps = PeresSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let ctx = MeasureContext::new(&ps, Ordering::random(&mut rng), InitialState::random_pure(&mut rng));
    let det = ctx.insert_detector_at(33).unwrap();
    let a = scan_zero_events(&ctx, &ps, &ScanConfig::new(2)).unwrap();
    let b = scan_zero_events(&det, &ps, &ScanConfig::new(2)).unwrap();
    let events = |r: &[ZeroEventRecord]| r.iter().map(|x| x.event).collect::<Vec<_>>();
    assert_eq!(events(&a.records), events(&b.records));
}

#[test]
fn pks_events_alone_never_cover_the_support() {
    let ps = PeresSet::new();
    let support = [gamma_p(&ps), gamma_p_prime(&ps)];
    let pks: Vec<ZeroEventRecord> = pks_events(&ps)
        .iter()
        .map(|e| ZeroEventRecord { event: e.to_event(), norm: 0.0, provenance: Provenance::Pks })
        .collect();
    assert_eq!(coverage_check(&support, &pks).status, CoverageStatus::NotCoveredWithinScope);
    assert_eq!(coverage_check(&support, &[]).status, CoverageStatus::NotCoveredWithinScope);
}

#[test]
fn last_ray_construction_is_state_independent() {
    let ps = PeresSet::new();
    let r021 = index("021");
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut orderings = vec![Ordering::with_last(r021).unwrap()];
    for _ in 0..5 {
        let mut chain: Vec<usize> = Ordering::random(&mut rng).chain().iter().copied().filter(|&r| r != r021).collect();
        chain.push(r021);
        orderings.push(Ordering::new(chain).unwrap());
    }
    let support = [gamma_p(&ps), gamma_p_prime(&ps)];
    for ord in orderings {
        for state in [InitialState::zero_z(), InitialState::random_pure(&mut rng), InitialState::random_mixed(&mut rng, 3)] {
            let ctx = MeasureContext::new(&ps, ord.clone(), state);
            let c = last_ray_021_construction(&ctx, &ps, DEFAULT_THRESHOLD).unwrap();
            assert!(c.e1.norm < 1e-10 && c.e2.norm < 1e-10 && c.union_norm < 1e-10);
            assert_eq!(c.disjoint_at, "021");
            assert_eq!(c.e1.event.colour(r021), Some(Colour::Red));
            assert_eq!(c.e2.event.colour(r021), Some(Colour::Green));
            assert!(c.contains_support);
            assert!(!c.phi_m_preclusive);
            assert_eq!(c.e1.provenance, Provenance::CoarseGrainCollapse);
            let witness = [c.e1.clone(), c.e2.clone()];
            assert!(verify_witness(&ctx, &support, &witness, DEFAULT_THRESHOLD).unwrap());
            assert_eq!(coverage_check(&support, &witness).status, CoverageStatus::Covered);
        }
    }
    let ctx = MeasureContext::default_for(&ps);
    assert!(matches!(last_ray_021_construction(&ctx, &ps, DEFAULT_THRESHOLD), Err(Error::Precondition(_))));
}

#[test]
fn default_context_verdict_at_four_fixed_rays() {
    // Frozen from the scan: a state-dependent null set {0m12:r, 021:r}
    // holds γ_P, since P¹P¹ on an orthogonal pair is P⁰ on 100, which kills
    // |0,z⟩.
    let ps = PeresSet::new();
    let ctx = MeasureContext::default_for(&ps);
    let (_, _, verdict, verified) = evaluate_candidate(&ctx, &ps, 4, DEFAULT_THRESHOLD).unwrap();
    assert_eq!(verdict.status, CoverageStatus::Covered);
    assert!(verified);
    let first = &verdict.witness[0];
    assert_eq!(first.event, HomogeneousEvent::ray(index("0m12"), Colour::Red).fix(index("021"), Colour::Red));
    assert_eq!(first.provenance, Provenance::Scan);
}

#[test]
fn ordering_search_is_deterministic_and_ranks_the_reference_last() {
    let ps = PeresSet::new();
    let empty = ordering_search(&ps, &SearchConfig { budget: 0, ..Default::default() }).unwrap();
    assert!(empty.candidates.is_empty());
    let config = SearchConfig { budget: 24, seed: 99, ..Default::default() };
    let a = ordering_search(&ps, &config).unwrap();
    let b = ordering_search(&ps, &config).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.seed, 99);
    let last = a.candidates.last().unwrap();
    assert_eq!(last.origin, "reference-021-last");
    assert!(last.verdict.is_covered() && last.witness_verified);
    for c in &a.candidates {
        assert_eq!(c.verdict.is_covered(), c.witness_verified);
        assert_eq!(c.verdict.is_covered(), !c.verdict.witness.is_empty());
    }
    let guided = ordering_search(&ps, &SearchConfig { budget: 4, strategy: SearchStrategy::SymmetryGuided, ..Default::default() }).unwrap();
    assert_eq!(guided.candidates.len(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scans_are_symmetry_covariant(seed in any::<u64>(), g in 0usize..24) {
        let ps = PeresSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ord = Ordering::random(&mut rng);
        let state = InitialState::random_pure(&mut rng);
        let ctx = MeasureContext::new(&ps, ord.clone(), state.clone());
        let moved = MeasureContext::new(&ps, ord.transported(&ps, g), state.transformed(&rotation_operator(&ps.group()[g])));
        let a = scan_zero_events(&ctx, &ps, &ScanConfig::new(2)).unwrap();
        let b = scan_zero_events(&moved, &ps, &ScanConfig::new(2)).unwrap();
        let mut mapped: Vec<_> = a.records.iter().map(|r| (r.event.transported(&ps, g), r.provenance)).collect();
        mapped.sort();
        let got: Vec<_> = b.records.iter().map(|r| (r.event, r.provenance)).collect();
        prop_assert_eq!(mapped, got);
    }
}
