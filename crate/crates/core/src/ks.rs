//! Non-colourability of the Peres set: an exhaustive backtracking search
//! with forcing, and the forced-extension walk of the hand proof.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::colouring::{Colour, Colouring, PartialColouring, FULL_MASK};
use crate::error::{Error, Result};
use crate::geometry::{Basis, PeresSet, RAY_COUNT};

/// Where a branch of the search died.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContradictionSite {
    /// All three rays of a basis are red.
    AllRedBasis(Basis),
    /// Two rays of a basis are green.
    DoubleGreenBasis(Basis),
    /// Both rays of an orthogonal pair are green.
    GreenPair([usize; 2]),
}

impl ContradictionSite {
    pub fn describe(&self, ps: &PeresSet) -> String {
        let labels = |rays: &[usize]| rays.iter().map(|r| ps.label(*r)).collect::<Vec<_>>().join(",");
        match self {
            ContradictionSite::AllRedBasis(b) => {
                let name = ps.proof_name(b).map(|n| format!(" ({n})")).unwrap_or_default();
                format!("all-red basis {{{}}}{}", labels(&b.rays), name)
            }
            ContradictionSite::DoubleGreenBasis(b) => format!("two greens in basis {{{}}}", labels(&b.rays)),
            ContradictionSite::GreenPair(p) => format!("green orthogonal pair {{{}}}", labels(p)),
        }
    }
}

/// A colouring problem on a subset of the Peres rays.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    /// Rays to be coloured.
    pub scope: u64,
    /// Each listed basis must have exactly one green ray.
    pub bases: Vec<Basis>,
    /// No listed pair may be green-green.
    pub pairs: Vec<[usize; 2]>,
    adjacency: [u64; RAY_COUNT],
}

impl ConstraintSystem {
    pub fn new(scope: u64, bases: Vec<Basis>, pairs: Vec<[usize; 2]>) -> Self {
        let mut adjacency = [0u64; RAY_COUNT];
        for b in &bases {
            for &r in &b.rays {
                adjacency[r] |= b.mask() & !(1 << r);
            }
        }
        for &[a, b] in &pairs {
            adjacency[a] |= 1 << b;
            adjacency[b] |= 1 << a;
        }
        ConstraintSystem { scope, bases, pairs, adjacency }
    }

    /// The whole Peres set: all 16 bases and all orthogonal pairs.
    pub fn full(ps: &PeresSet) -> Self {
        Self::induced(ps, FULL_MASK)
    }

    /// Every basis and orthogonal pair lying entirely inside `scope`.
    pub fn induced(ps: &PeresSet, scope: u64) -> Self {
        let bases = ps.bases().iter().filter(|b| b.mask() & !scope == 0).copied().collect();
        let pairs = ps.pairs().iter().filter(|p| p.mask() & !scope == 0).map(|p| p.rays).collect();
        Self::new(scope, bases, pairs)
    }

    /// Only the "exactly one green" condition on the given bases.
    pub fn bases_only(bases: &[Basis]) -> Self {
        let scope = bases.iter().fold(0, |m, b| m | b.mask());
        Self::new(scope, bases.to_vec(), Vec::new())
    }

    fn contradiction(&self, state: &PartialColouring) -> Option<ContradictionSite> {
        let green = state.green_mask();
        let red = state.red_mask();
        for b in &self.bases {
            if (red & b.mask()).count_ones() == 3 {
                return Some(ContradictionSite::AllRedBasis(*b));
            }
            if (green & b.mask()).count_ones() > 1 {
                return Some(ContradictionSite::DoubleGreenBasis(*b));
            }
        }
        self.pairs
            .iter()
            .find(|&&[a, b]| green >> a & green >> b & 1 == 1)
            .map(|p| ContradictionSite::GreenPair(*p))
    }

    /// Applies forcing to a fixed point. Greens force their constraint
    /// neighbours red; a basis with two reds forces its third ray green.
    fn propagate(&self, mut state: PartialColouring) -> std::result::Result<PartialColouring, ContradictionSite> {
        loop {
            if let Some(site) = self.contradiction(&state) {
                return Err(site);
            }
            let mut next = state;
            for r in bits(state.green_mask()) {
                for n in bits(self.adjacency[r] & !next.fixed_mask()) {
                    next = next.fix(n, Colour::Red);
                }
            }
            for b in &self.bases {
                let m = b.mask();
                let reds = (next.red_mask() & m).count_ones();
                let open = m & !next.fixed_mask();
                if reds == 2 && open.count_ones() == 1 {
                    next = next.fix(open.trailing_zeros() as usize, Colour::Green);
                }
            }
            if next == state {
                return Ok(state);
            }
            state = next;
        }
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// Result of an exhaustive search. When `solutions` is empty the search
/// closed every branch and the constraint system is unsatisfiable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonColourabilityCertificate {
    pub scope: u64,
    pub rays: usize,
    pub bases: usize,
    pub pairs: usize,
    pub nodes: usize,
    pub closed_branches: usize,
    /// How many branches died at each site.
    pub contradictions: Vec<(ContradictionSite, usize)>,
    pub solutions: Vec<PartialColouring>,
}

impl NonColourabilityCertificate {
    pub fn is_unsat(&self) -> bool {
        self.solutions.is_empty()
    }
}

/// Enumerates every consistent colouring of the system's scope.
pub fn solve(system: &ConstraintSystem) -> NonColourabilityCertificate {
    solve_from(system, PartialColouring::everything())
}

/// As [`solve`], starting from a partial assignment.
pub fn solve_from(system: &ConstraintSystem, start: PartialColouring) -> NonColourabilityCertificate {
    struct Search<'a> {
        system: &'a ConstraintSystem,
        nodes: usize,
        closed: usize,
        sites: BTreeMap<ContradictionSite, usize>,
        solutions: Vec<PartialColouring>,
    }

    impl Search<'_> {
        fn run(&mut self, state: PartialColouring) {
            self.nodes += 1;
            let state = match self.system.propagate(state) {
                Ok(s) => s,
                Err(site) => {
                    self.closed += 1;
                    *self.sites.entry(site).or_default() += 1;
                    return;
                }
            };
            let open = self.system.scope & !state.fixed_mask();
            if open == 0 {
                self.solutions.push(state);
                return;
            }
            let ray = open.trailing_zeros() as usize;
            self.run(state.fix(ray, Colour::Green));
            self.run(state.fix(ray, Colour::Red));
        }
    }

    let mut search = Search { system, nodes: 0, closed: 0, sites: BTreeMap::new(), solutions: Vec::new() };
    search.run(start);
    NonColourabilityCertificate {
        scope: system.scope,
        rays: system.scope.count_ones() as usize,
        bases: system.bases.len(),
        pairs: system.pairs.len(),
        nodes: search.nodes,
        closed_branches: search.closed,
        contradictions: search.sites.into_iter().collect(),
        solutions: search.solutions,
    }
}

/// Exhaustive search over the whole Peres set.
pub fn verify_ks_theorem(ps: &PeresSet) -> NonColourabilityCertificate {
    solve(&ConstraintSystem::full(ps))
}

/// The four bases `B_1 ..= B_4` that seed the hand proof.
pub fn seed_bases(ps: &PeresSet) -> Vec<Basis> {
    ps.proof_bases()[..4].to_vec()
}

/// The colourings of the rays of `B_1 ..= B_4` with exactly one green ray
/// per basis.
pub fn seed_colourings(ps: &PeresSet) -> Vec<PartialColouring> {
    solve(&ConstraintSystem::bases_only(&seed_bases(ps))).solutions
}

/// The fiducial seed: the first listed ray of each of `B_1 ..= B_4` green.
pub fn fiducial_seed(ps: &PeresSet) -> PartialColouring {
    let bases = seed_bases(ps);
    let mut seed = PartialColouring::uniform(bases.iter().fold(0, |m, b| m | b.mask()), Colour::Red);
    for b in &crate::geometry::PROOF_BASES[..4] {
        seed = seed.fix(ps.find(b[0]).expect("static labels"), Colour::Green);
    }
    seed
}

/// The H-orbit of the fiducial seed, as `(group index, seed)`.
pub fn fiducial_orbit(ps: &PeresSet) -> Vec<(usize, PartialColouring)> {
    let seed = fiducial_seed(ps);
    (0..ps.group().len()).map(|g| (g, seed.transported(ps, g))).collect()
}

/// One forcing step: `forced_green` is the only ray of `basis` not yet red.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcedStep {
    pub basis: Basis,
    /// Schedule name (`B5`, or `g3(B5)` for a transported schedule).
    pub name: Option<String>,
    pub forced_green: usize,
    pub already_red: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceOutcome {
    Contradiction { site: ContradictionSite, name: Option<String> },
    /// Forcing stalled; both colours of `ray` were explored.
    Split { ray: usize, green: Box<ForcedExtensionTrace>, red: Box<ForcedExtensionTrace> },
    /// A consistent colouring was reached. Never happens for the Peres set.
    Consistent(Colouring),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcedExtensionTrace {
    pub steps: Vec<ForcedStep>,
    pub outcome: TraceOutcome,
    /// Assignment at the moment the walk stopped.
    pub final_state: PartialColouring,
}

impl ForcedExtensionTrace {
    /// True when every leaf of the trace ends in a contradiction.
    pub fn all_contradictions(&self) -> bool {
        match &self.outcome {
            TraceOutcome::Contradiction { .. } => true,
            TraceOutcome::Split { green, red, .. } => green.all_contradictions() && red.all_contradictions(),
            TraceOutcome::Consistent(_) => false,
        }
    }

    /// Contradiction basis reached without branching, if any.
    pub fn contradiction_basis(&self) -> Option<Basis> {
        match &self.outcome {
            TraceOutcome::Contradiction { site: ContradictionSite::AllRedBasis(b), .. } => Some(*b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Walkthrough {
    pub seed: PartialColouring,
    /// Group element carrying the fiducial seed onto `seed`, when one exists.
    pub symmetry: Option<usize>,
    pub trace: ForcedExtensionTrace,
}

/// Extends a seed colouring of `B_1 ..= B_4` (or of a symmetry image of
/// those bases) by forcing, following the order of the hand proof.
pub fn peres_walkthrough(ps: &PeresSet, seed: PartialColouring) -> Result<Walkthrough> {
    let proof = ps.proof_bases();
    let fiducial = fiducial_seed(ps);
    let symmetry = (0..ps.group().len()).find(|&g| fiducial.transported(ps, g) == seed);

    let schedule: Vec<(Basis, String)> = match symmetry {
        Some(g) => proof[4..]
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let name = if g == 0 { format!("B{}", k + 5) } else { format!("g{g}(B{})", k + 5) };
                (ps.apply_to_basis(g, b), name)
            })
            .collect(),
        None => {
            let seeds = seed_bases(ps);
            let scope = seeds.iter().fold(0, |m, b| m | b.mask());
            if seed.fixed_mask() != scope {
                return Err(Error::InvalidSeed("seed must colour exactly the rays of B1..B4".into()));
            }
            if seeds.iter().any(|b| (seed.green_mask() & b.mask()).count_ones() != 1) {
                return Err(Error::InvalidSeed("seed needs exactly one green ray per basis of B1..B4".into()));
            }
            proof[4..].iter().enumerate().map(|(k, b)| (*b, format!("B{}", k + 5))).collect()
        }
    };

    let mut state = seed;
    for g in bits(seed.green_mask()) {
        for n in bits(ps.neighbours(g) & !state.fixed_mask()) {
            state = state.fix(n, Colour::Red);
        }
    }
    Ok(Walkthrough { seed, symmetry, trace: walk(ps, state, &schedule) })
}

fn walk(ps: &PeresSet, mut state: PartialColouring, schedule: &[(Basis, String)]) -> ForcedExtensionTrace {
    let name_of = |b: &Basis| {
        schedule.iter().find(|(s, _)| s == b).map(|(_, n)| n.clone()).or_else(|| ps.proof_name(b))
    };
    let mut steps = Vec::new();
    loop {
        if let Some(site) = walk_contradiction(ps, &state, schedule) {
            let name = match &site {
                ContradictionSite::AllRedBasis(b) | ContradictionSite::DoubleGreenBasis(b) => name_of(b),
                ContradictionSite::GreenPair(_) => None,
            };
            return ForcedExtensionTrace { steps, outcome: TraceOutcome::Contradiction { site, name }, final_state: state };
        }
        let forcing = |b: &Basis| {
            let m = b.mask();
            (state.red_mask() & m).count_ones() == 2 && (m & !state.fixed_mask()).count_ones() == 1
        };
        let next = schedule.iter().map(|(b, _)| *b).find(|b| forcing(b)).or_else(|| ps.bases().iter().copied().find(|b| forcing(b)));
        if let Some(b) = next {
            let m = b.mask();
            let forced = (m & !state.fixed_mask()).trailing_zeros() as usize;
            steps.push(ForcedStep {
                basis: b,
                name: name_of(&b),
                forced_green: forced,
                already_red: bits(state.red_mask() & m).collect(),
            });
            state = state.fix(forced, Colour::Green);
            for n in bits(ps.neighbours(forced) & !state.fixed_mask()) {
                state = state.fix(n, Colour::Red);
            }
            continue;
        }
        let open = FULL_MASK & !state.fixed_mask();
        if open == 0 {
            let c = state.completed_red();
            return ForcedExtensionTrace { steps, outcome: TraceOutcome::Consistent(c), final_state: state };
        }
        let ray = open.trailing_zeros() as usize;
        let branch = |colour: Colour| {
            let mut s = state.fix(ray, colour);
            if colour == Colour::Green {
                for n in bits(ps.neighbours(ray) & !s.fixed_mask()) {
                    s = s.fix(n, Colour::Red);
                }
            }
            Box::new(walk(ps, s, schedule))
        };
        let outcome = TraceOutcome::Split { ray, green: branch(Colour::Green), red: branch(Colour::Red) };
        return ForcedExtensionTrace { steps, outcome, final_state: state };
    }
}

fn walk_contradiction(ps: &PeresSet, state: &PartialColouring, schedule: &[(Basis, String)]) -> Option<ContradictionSite> {
    let all_red = |b: &Basis| (state.red_mask() & b.mask()).count_ones() == 3;
    if let Some((b, _)) = schedule.iter().find(|(b, _)| all_red(b)) {
        return Some(ContradictionSite::AllRedBasis(*b));
    }
    if let Some(b) = ps.bases().iter().find(|b| all_red(b)) {
        return Some(ContradictionSite::AllRedBasis(*b));
    }
    let green = state.green_mask();
    ps.pairs()
        .iter()
        .find(|p| (green & p.mask()).count_ones() == 2)
        .map(|p| ContradictionSite::GreenPair(p.rays))
}

/// The Peres colouring: the fiducial walk's final assignment. It is
/// consistent on every basis and pair except `B_11`.
pub fn gamma_p(ps: &PeresSet) -> Colouring {
    let w = peres_walkthrough(ps, fiducial_seed(ps)).expect("fiducial seed is valid");
    w.trace.final_state.completed_red()
}

/// The mirror colouring: `swap_xy` applied to [`gamma_p`].
pub fn gamma_p_prime(ps: &PeresSet) -> Colouring {
    let swap = ps.symmetry_index(&crate::geometry::Symmetry::SWAP_XY).expect("swap_xy is in the group");
    crate::colouring::act_on_colouring(ps, swap, &gamma_p(ps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_basis_has_three_colourings() {
        let ps = PeresSet::new();
        let b1 = ps.proof_bases()[0];
        let cert = solve(&ConstraintSystem::bases_only(&[b1]));
        assert_eq!(cert.solutions.len(), 3);
        let cert = solve(&ConstraintSystem::induced(&ps, b1.mask()));
        assert_eq!(cert.solutions.len(), 3);
    }

    #[test]
    fn fiducial_seed_shape() {
        let ps = PeresSet::new();
        let seed = fiducial_seed(&ps);
        assert_eq!(seed.fixed_count(), 10);
        let greens: Vec<&str> = bits(seed.green_mask()).map(|r| ps.label(r)).collect();
        assert_eq!(greens, ["001", "011", "101", "1m12"]);
    }

    #[test]
    fn rejects_bad_seed() {
        let ps = PeresSet::new();
        let all_red = PartialColouring::uniform(seed_bases(&ps).iter().fold(0, |m, b| m | b.mask()), Colour::Red);
        assert!(matches!(peres_walkthrough(&ps, all_red), Err(Error::InvalidSeed(_))));
        assert!(peres_walkthrough(&ps, PartialColouring::everything()).is_err());
    }

    #[test]
    fn contradiction_sites_render() {
        let ps = PeresSet::new();
        let b11 = ps.proof_bases()[10];
        assert_eq!(ContradictionSite::AllRedBasis(b11).describe(&ps), "all-red basis {100,0m12,021} (B11)");
    }
}
