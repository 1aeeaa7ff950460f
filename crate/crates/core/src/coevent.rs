//! Multiplicative co-events over finite sample spaces.
//!
//! A multiplicative co-event is identified with its support `Φ`: it values
//! an event `B` true iff `Φ ⊆ B`. The zero and unit co-events are never
//! constructed. Small spaces (`n ≤ 16`) are handled explicitly with bitset
//! events; the Peres instance works on colourings with homogeneous events.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::colouring::{Colour, Colouring, HomogeneousEvent, PksEvent};
use crate::error::{Error, Result};
use crate::geometry::PeresSet;
use crate::ks::{gamma_p, gamma_p_prime};

/// Default threshold below which a measure value counts as zero.
pub const ZERO_TOLERANCE: f64 = 1e-10;

/// Largest space for which all events are enumerated.
pub const MAX_EXPLICIT: usize = 16;
/// Largest space for primitive searches (all supports against all zero sets).
pub const MAX_PRIMITIVE_SEARCH: usize = 12;
/// Largest space for pairwise homomorphism checks.
pub const MAX_PAIRWISE: usize = 8;

/// Something that can answer membership questions about histories.
pub trait EventSet<T> {
    fn contains(&self, history: &T) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpace {
    n: usize,
}

impl SampleSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::InvalidMeasure(format!("sample space size {n} outside 1..=63")));
        }
        Ok(SampleSpace { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn full(&self) -> Event {
        Event((1u64 << self.n) - 1)
    }

    /// Every event, as bitmasks `0 .. 2^n`.
    pub fn events(&self) -> Result<impl Iterator<Item = Event>> {
        self.guard(MAX_EXPLICIT)?;
        Ok((0..1u64 << self.n).map(Event))
    }

    pub fn guard(&self, bound: usize) -> Result<()> {
        if self.n > bound {
            Err(Error::SpaceTooLarge { size: self.n, bound })
        } else {
            Ok(())
        }
    }
}

/// A subset of `0..n`. Addition is symmetric difference, multiplication is
/// intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Event(pub u64);

impl Event {
    pub fn empty() -> Self {
        Event(0)
    }

    pub fn singleton(i: usize) -> Self {
        Event(1 << i)
    }

    pub fn from_members(members: &[usize]) -> Self {
        Event(members.iter().fold(0, |m, i| m | 1 << i))
    }

    pub fn members(&self) -> Vec<usize> {
        (0..64).filter(|i| self.0 >> i & 1 == 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(&self, other: Event) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersection(&self, other: Event) -> Event {
        Event(self.0 & other.0)
    }

    pub fn union(&self, other: Event) -> Event {
        Event(self.0 | other.0)
    }

    pub fn sum(&self, other: Event) -> Event {
        Event(self.0 ^ other.0)
    }

    pub fn complement(&self, space: SampleSpace) -> Event {
        Event(space.full().0 & !self.0)
    }
}

impl EventSet<usize> for Event {
    fn contains(&self, history: &usize) -> bool {
        self.0 >> history & 1 == 1
    }
}

impl EventSet<Colouring> for HomogeneousEvent {
    fn contains(&self, history: &Colouring) -> bool {
        HomogeneousEvent::contains(self, history)
    }
}

impl EventSet<Colouring> for PksEvent {
    fn contains(&self, history: &Colouring) -> bool {
        self.to_event().contains(history)
    }
}

/// A real-valued measure on the events of a small sample space.
pub trait Measure {
    fn space(&self) -> SampleSpace;
    fn value(&self, event: Event) -> f64;

    /// Every event of measure below `tol`, including the empty event.
    fn zero_events(&self, tol: f64) -> Result<Vec<Event>> {
        Ok(self.space().events()?.filter(|e| self.value(*e).abs() < tol).collect())
    }
}

/// A probability measure given by nonnegative weights summing to one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalMeasure {
    weights: Vec<f64>,
}

impl ClassicalMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        SampleSpace::new(weights.len())?;
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidMeasure("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(ClassicalMeasure { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Measure for ClassicalMeasure {
    fn space(&self) -> SampleSpace {
        SampleSpace { n: self.weights.len() }
    }

    fn value(&self, event: Event) -> f64 {
        event.members().into_iter().filter(|i| *i < self.weights.len()).map(|i| self.weights[i]).sum()
    }
}

/// A quantal measure in Gram form: one vector per history, with
/// `D(A;B) = ⟨Σ_{a∈A} v_a, Σ_{b∈B} v_b⟩` and `|A| = D(A;A)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramMeasure {
    vectors: Vec<Vec<Complex64>>,
}

impl GramMeasure {
    /// Requires equal dimensions and `‖Σ v‖² = 1` within `1e-12`.
    pub fn new(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        SampleSpace::new(vectors.len())?;
        let dim = vectors[0].len();
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidMeasure("history vectors must share a nonzero dimension".into()));
        }
        let m = GramMeasure { vectors };
        let total = m.value(m.space().full());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("|Ω| = {total}, not 1")));
        }
        Ok(m)
    }

    /// Rescales so that `|Ω| = 1`. Fails when the total vector vanishes.
    pub fn normalized(mut vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        let mut total = vec![Complex64::new(0.0, 0.0); dim];
        for v in &vectors {
            for (t, x) in total.iter_mut().zip(v) {
                *t += x;
            }
        }
        let norm = total.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < ZERO_TOLERANCE {
            return Err(Error::InvalidMeasure("total history vector is zero".into()));
        }
        for v in vectors.iter_mut() {
            for x in v.iter_mut() {
                *x /= norm;
            }
        }
        Self::new(vectors)
    }

    pub fn dimension(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn event_vector(&self, event: Event) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dimension()];
        for i in event.members().into_iter().filter(|i| *i < self.vectors.len()) {
            for (o, x) in out.iter_mut().zip(&self.vectors[i]) {
                *o += x;
            }
        }
        out
    }

    pub fn decoherence(&self, a: Event, b: Event) -> Complex64 {
        let (va, vb) = (self.event_vector(a), self.event_vector(b));
        va.iter().zip(&vb).map(|(x, y)| x.conj() * y).sum()
    }
}

impl Measure for GramMeasure {
    fn space(&self) -> SampleSpace {
        SampleSpace { n: self.vectors.len() }
    }

    fn value(&self, event: Event) -> f64 {
        self.event_vector(event).iter().map(|x| x.norm_sqr()).sum()
    }

    fn zero_events(&self, tol: f64) -> Result<Vec<Event>> {
        let space = self.space();
        space.guard(MAX_EXPLICIT)?;
        let n = space.size();
        let dim = self.dimension();
        // Event vectors by dynamic programming over the lowest set bit.
        let mut table = vec![vec![Complex64::new(0.0, 0.0); dim]; 1 << n];
        let mut out = vec![Event::empty()];
        for mask in 1usize..1 << n {
            let low = mask.trailing_zeros() as usize;
            let prev = mask & (mask - 1);
            let v: Vec<Complex64> = table[prev].iter().zip(&self.vectors[low]).map(|(a, b)| a + b).collect();
            if v.iter().map(|x| x.norm_sqr()).sum::<f64>() < tol {
                out.push(Event(mask as u64));
            }
            table[mask] = v;
        }
        Ok(out)
    }
}

/// A multiplicative co-event on a small sample space, identified with its
/// nonempty support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoEvent {
    support: Event,
}

impl CoEvent {
    pub fn new(support: Event) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidMeasure("the unit co-event (empty support) is excluded".into()));
        }
        Ok(CoEvent { support })
    }

    pub fn support(&self) -> Event {
        self.support
    }

    pub fn evaluate(&self, event: Event) -> bool {
        self.support.is_subset_of(event)
    }

    /// Checks additivity and multiplicativity over all event pairs.
    pub fn is_homomorphism(&self, space: SampleSpace) -> Result<bool> {
        space.guard(MAX_PAIRWISE)?;
        let events: Vec<Event> = space.events()?.collect();
        for &a in &events {
            for &b in &events {
                let additive = self.evaluate(a.sum(b)) == (self.evaluate(a) ^ self.evaluate(b));
                let multiplicative = self.evaluate(a.intersection(b)) == (self.evaluate(a) & self.evaluate(b));
                if !additive || !multiplicative {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Outcome of checking that `φ⁻¹(1)` is a filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCheck {
    pub upward_closed: bool,
    pub intersection_closed: bool,
    /// Unique minimal element of the truth set, when it has one.
    pub principal: Option<Event>,
}

impl FilterCheck {
    pub fn is_filter(&self) -> bool {
        self.upward_closed && self.intersection_closed
    }
}

pub fn evaluate(co: &CoEvent, event: Event) -> bool {
    co.evaluate(event)
}

/// Enumerates `φ⁻¹(1)` and checks the filter laws.
pub fn truth_set_is_filter(co: &CoEvent, space: SampleSpace) -> Result<FilterCheck> {
    let truth: Vec<Event> = space.events()?.filter(|e| co.evaluate(*e)).collect();
    let is_true = |e: Event| co.evaluate(e);
    let upward_closed = truth.iter().all(|a| (0..space.size()).all(|i| is_true(a.union(Event::singleton(i)))));
    let meet = truth.iter().fold(space.full(), |m, e| m.intersection(*e));
    let principal = (is_true(meet) && truth.iter().all(|e| meet.is_subset_of(*e))).then_some(meet);
    let intersection_closed = if truth.len() <= 1 << 10 {
        truth.iter().all(|a| truth.iter().all(|b| is_true(a.intersection(*b))))
    } else {
        // An upward-closed family with a least element is closed under meets.
        upward_closed && principal.is_some()
    };
    Ok(FilterCheck { upward_closed, intersection_closed, principal })
}

/// The singleton-support co-events `γ*`.
pub fn classical_coevents(space: SampleSpace) -> Vec<CoEvent> {
    (0..space.size()).map(|i| CoEvent { support: Event::singleton(i) }).collect()
}

/// True iff the support escapes every listed zero event.
pub fn is_preclusive(co: &CoEvent, zero_events: &[Event]) -> bool {
    zero_events.iter().all(|z| !co.support.is_subset_of(*z))
}

/// All support-minimal preclusive co-events, by increasing support size
/// then lexicographically.
pub fn primitive_preclusive_coevents<M: Measure>(measure: &M) -> Result<Vec<CoEvent>> {
    primitive_preclusive_coevents_with(measure, ZERO_TOLERANCE)
}

pub fn primitive_preclusive_coevents_with<M: Measure>(measure: &M, tol: f64) -> Result<Vec<CoEvent>> {
    let space = measure.space();
    space.guard(MAX_PRIMITIVE_SEARCH)?;
    let zeros = measure.zero_events(tol)?;
    // Only maximal zero sets matter for preclusion.
    let maximal: Vec<Event> =
        zeros.iter().copied().filter(|z| !zeros.iter().any(|w| w != z && z.is_subset_of(*w))).collect();
    let mut supports: Vec<Event> = (1u64..1 << space.size()).map(Event).collect();
    supports.sort_by_key(|e| (e.len(), e.members()));
    let mut primitives: Vec<CoEvent> = Vec::new();
    for s in supports {
        if primitives.iter().any(|p| p.support.is_subset_of(s)) {
            continue;
        }
        let co = CoEvent { support: s };
        if is_preclusive(&co, &maximal) {
            primitives.push(co);
        }
    }
    Ok(primitives)
}

/// Summary of randomised checks of the three lemmas on small spaces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaFuzzReport {
    pub seed: u64,
    pub trials: usize,
    pub homomorphisms_n3: usize,
    pub filter_failures: usize,
    pub classical_failures: usize,
    pub unit_support_failures: usize,
    pub counterexamples: Vec<String>,
}

impl LemmaFuzzReport {
    pub fn passed(&self) -> bool {
        self.homomorphisms_n3 == 3
            && self.filter_failures == 0
            && self.classical_failures == 0
            && self.unit_support_failures == 0
    }
}

/// Number of nonzero maps `2^Ω → ℤ₂` that are ring homomorphisms, counted
/// by enumerating every map (so `n ≤ 3`).
pub fn count_homomorphisms(space: SampleSpace) -> Result<usize> {
    space.guard(3)?;
    let events: Vec<Event> = space.events()?.collect();
    let k = events.len();
    let mut count = 0;
    for table in 1u64..1 << k {
        let phi = |e: Event| table >> e.0 & 1 == 1;
        let ok = events.iter().all(|a| {
            events.iter().all(|b| phi(a.sum(*b)) == (phi(*a) ^ phi(*b)) && phi(a.intersection(*b)) == (phi(*a) & phi(*b)))
        });
        if ok {
            count += 1;
        }
    }
    Ok(count)
}

/// Random classical measures with random zero-weight histories on spaces of
/// size `1..=max_n`. Checks the filter law for random supports, that every
/// primitive preclusive co-event is a singleton on a positive-weight
/// history, and that `Ω*` is preclusive.
pub fn lemma_fuzz(seed: u64, trials: usize, max_n: usize) -> Result<LemmaFuzzReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LemmaFuzzReport {
        seed,
        trials,
        homomorphisms_n3: count_homomorphisms(SampleSpace::new(3)?)?,
        filter_failures: 0,
        classical_failures: 0,
        unit_support_failures: 0,
        counterexamples: Vec::new(),
    };
    for trial in 0..trials {
        let n = rng.gen_range(1..=max_n.clamp(1, MAX_PRIMITIVE_SEARCH));
        let space = SampleSpace::new(n)?;
        let mut weights: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(0.05..1.0) }).collect();
        if weights.iter().all(|w| *w == 0.0) {
            let i = rng.gen_range(0..n);
            weights[i] = 1.0;
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let measure = ClassicalMeasure::new(weights.clone())?;

        let support = Event(rng.gen_range(1..=space.full().0));
        let co = CoEvent::new(support)?;
        let check = truth_set_is_filter(&co, space)?;
        if !check.is_filter() || check.principal != Some(support) {
            report.filter_failures += 1;
            report.counterexamples.push(format!("trial {trial}: filter law fails for support {:?}", support.members()));
        }

        let zeros = measure.zero_events(ZERO_TOLERANCE)?;
        if !is_preclusive(&CoEvent { support: space.full() }, &zeros) {
            report.unit_support_failures += 1;
            report.counterexamples.push(format!("trial {trial}: Ω* not preclusive for weights {weights:?}"));
        }
        for p in primitive_preclusive_coevents(&measure)? {
            let members = p.support.members();
            let classical = members.len() == 1 && weights[members[0]] > 0.0;
            let homomorphic = n > MAX_PAIRWISE || p.is_homomorphism(space)?;
            if !classical || !homomorphic {
                report.classical_failures += 1;
                report.counterexamples.push(format!("trial {trial}: primitive support {members:?} for weights {weights:?}"));
            }
        }
    }
    Ok(report)
}

/// A multiplicative co-event on the colouring space of the Peres set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColouringCoEvent {
    support: Vec<Colouring>,
}

impl ColouringCoEvent {
    pub fn new(mut support: Vec<Colouring>) -> Result<Self> {
        support.sort();
        support.dedup();
        if support.is_empty() {
            return Err(Error::InvalidEvent("co-event support must be nonempty".into()));
        }
        Ok(ColouringCoEvent { support })
    }

    pub fn support(&self) -> &[Colouring] {
        &self.support
    }

    pub fn evaluate<E: EventSet<Colouring> + ?Sized>(&self, event: &E) -> bool {
        self.support.iter().all(|c| event.contains(c))
    }

    pub fn transported(&self, ps: &PeresSet, g: usize) -> ColouringCoEvent {
        let support = self.support.iter().map(|c| crate::colouring::act_on_colouring(ps, g, c)).collect();
        ColouringCoEvent::new(support).expect("transport preserves nonemptiness")
    }

    /// Support escapes each listed zero event individually.
    pub fn is_preclusive(&self, zero_events: &[HomogeneousEvent]) -> bool {
        zero_events.iter().all(|z| !self.evaluate(z))
    }

    /// Support escapes every disjoint union of listed zero events.
    pub fn is_preclusive_with_disjoint_unions(&self, zero_events: &[HomogeneousEvent]) -> bool {
        disjoint_cover(&self.support, zero_events).is_none()
    }
}

/// Finds pairwise-disjoint zero events whose union contains every support
/// colouring, returning their indices. At most `support.len()` events are
/// needed, since each chosen event can be required to hit the support.
pub fn disjoint_cover(support: &[Colouring], zero_events: &[HomogeneousEvent]) -> Option<Vec<usize>> {
    fn go(support: &[Colouring], zeros: &[HomogeneousEvent], chosen: &mut Vec<usize>) -> bool {
        let Some(open) = support.iter().find(|c| !chosen.iter().any(|&i| zeros[i].contains(c))) else {
            return true;
        };
        for (i, z) in zeros.iter().enumerate() {
            if z.contains(open) && chosen.iter().all(|&j| zeros[j].is_disjoint(z)) {
                chosen.push(i);
                if go(support, zeros, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    go(support, zero_events, &mut chosen).then_some(chosen)
}

/// The co-event with support `{γ_P, γ_P'}`.
pub fn phi_m(ps: &PeresSet) -> ColouringCoEvent {
    ColouringCoEvent::new(vec![gamma_p(ps), gamma_p_prime(ps)]).expect("nonempty support")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportedCoEvent {
    pub coevent: ColouringCoEvent,
    /// Index of the group element applied to `φ_M`.
    pub symmetry: usize,
    /// Ray `u_k'` of `φ_M`'s table that the symmetry carries onto the target.
    pub source_ray: usize,
}

/// A symmetry image of `φ_M` that values "ray `k` has `colour`" true. The
/// earliest qualifying group element in the fixed enumeration is used.
pub fn transported_coevent(ps: &PeresSet, ray: usize, colour: Colour) -> Result<TransportedCoEvent> {
    let base = phi_m(ps);
    let target = HomogeneousEvent::ray(ray, colour);
    for g in 0..ps.group().len() {
        let co = base.transported(ps, g);
        if co.evaluate(&target) {
            let inverse = ps.symmetry_index(&ps.group()[g].inverse()).expect("group is closed");
            return Ok(TransportedCoEvent { coevent: co, symmetry: g, source_ray: ps.apply_index(inverse, ray) });
        }
    }
    Err(Error::Precondition(format!("no symmetry image of φ_M values ray {} {:?}", ps.label(ray), colour)))
}

/// Rows whose reference-table values disagree with the computed valuation,
/// as `(ray label, φ(G), φ(R))` in the reference.
pub const PHI_M_ERRATA: &[(&str, u8, u8)] = &[("112", 1, 1)];

/// One row of the valuation of `φ_M` on single-ray events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiMRow {
    pub ray: String,
    pub gamma_p: Colour,
    pub gamma_p_prime: Colour,
    pub green: u8,
    pub red: u8,
    /// Reference `(φ(G), φ(R))` when it differs from the computed pair.
    pub erratum: Option<(u8, u8)>,
}

impl PhiMRow {
    pub fn neither(&self) -> bool {
        self.green == 0 && self.red == 0
    }
}

/// `φ_M(G_i)` and `φ_M(R_i)` for every ray, in table order.
pub fn phi_m_table(ps: &PeresSet) -> Vec<PhiMRow> {
    let phi = phi_m(ps);
    let (a, b) = (gamma_p(ps), gamma_p_prime(ps));
    (0..ps.rays().len())
        .map(|i| {
            let ray = ps.label(i);
            let green = phi.evaluate(&HomogeneousEvent::ray(i, Colour::Green)) as u8;
            let red = phi.evaluate(&HomogeneousEvent::ray(i, Colour::Red)) as u8;
            let erratum = PHI_M_ERRATA
                .iter()
                .find(|(label, g, r)| *label == ray && (*g, *r) != (green, red))
                .map(|(_, g, r)| (*g, *r));
            PhiMRow { ray: ray.to_string(), gamma_p: a.colour(i), gamma_p_prime: b.colour(i), green, red, erratum }
        })
        .collect()
}
