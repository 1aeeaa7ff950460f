//! The quantum measure on particle paths through a sequence of spin-squared
//! beam splitters, one per Peres ray.
//!
//! Homogeneous events are evaluated by collapsing the sum over free rays to
//! the identity, so an event state is the ordered product of the fixed-ray
//! projectors applied to the initial state.

use std::fmt;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coevent::EventSet;
use crate::colouring::{Colour, Colouring, HomogeneousEvent, PksEvent};
use crate::error::{Error, Result};
use crate::geometry::{PeresSet, Ray, RAY_COUNT, RAY_LABELS};
use crate::spin::{colour_projector, inner, norm, Direction, Matrix3, Vector3};

/// Default threshold on event-state norms for "measure zero".
pub const DEFAULT_THRESHOLD: f64 = 1e-10;
/// Normalisation tolerance for states and weights.
pub const NORMALISATION_TOLERANCE: f64 = 1e-12;
/// Most detectors a context may carry (sectors are enumerated).
pub const MAX_DETECTORS: usize = 12;

/// The sequence of rays met by the particle, position 1 first. A full
/// ordering is a permutation of all 33 rays; truncated chains hold fewer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ordering {
    chain: Vec<usize>,
}

impl Ordering {
    /// A full ordering; `chain` must be a permutation of `0..33`.
    pub fn new(chain: Vec<usize>) -> Result<Self> {
        if chain.len() != RAY_COUNT {
            return Err(Error::InvalidOrdering(format!("expected {RAY_COUNT} rays, got {}", chain.len())));
        }
        Self::truncated(chain)
    }

    /// A chain of distinct rays, possibly shorter than the full set.
    pub fn truncated(chain: Vec<usize>) -> Result<Self> {
        let mut seen = 0u64;
        for &r in &chain {
            if r >= RAY_COUNT {
                return Err(Error::InvalidOrdering(format!("ray index {r} out of range")));
            }
            if seen >> r & 1 == 1 {
                return Err(Error::InvalidOrdering(format!("ray {} appears twice", RAY_LABELS[r])));
            }
            seen |= 1 << r;
        }
        Ok(Ordering { chain })
    }

    /// Rays in table order.
    pub fn table_order() -> Self {
        Ordering { chain: (0..RAY_COUNT).collect() }
    }

    /// Table order with `ray` moved to the final position.
    pub fn with_last(ray: usize) -> Result<Self> {
        let mut chain: Vec<usize> = (0..RAY_COUNT).filter(|&r| r != ray).collect();
        chain.push(ray);
        Self::new(chain)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut chain: Vec<usize> = (0..RAY_COUNT).collect();
        chain.shuffle(rng);
        Ordering { chain }
    }

    /// Parses ray labels, one per line, or a JSON array of label strings.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str, ps: &PeresSet) -> Result<Self> {
        let trimmed = text.trim_start();
        let labels: Vec<String> = if trimmed.starts_with('[') {
            serde_json::from_str(trimmed)?
        } else {
            text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect()
        };
        let chain = labels.iter().map(|l| ps.find(l)).collect::<Result<Vec<_>>>()?;
        Self::new(chain)
    }

    pub fn chain(&self) -> &[usize] {
        &self.chain
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.chain.len() == RAY_COUNT
    }

    /// Mask of the rays present in the chain.
    pub fn mask(&self) -> u64 {
        self.chain.iter().fold(0, |m, r| m | 1 << r)
    }

    /// Zero-based position of `ray`.
    pub fn position(&self, ray: usize) -> Option<usize> {
        self.chain.iter().position(|&r| r == ray)
    }

    /// The ordering whose position `p` holds `g` applied to this one's.
    pub fn transported(&self, ps: &PeresSet, g: usize) -> Ordering {
        Ordering { chain: self.chain.iter().map(|&r| ps.apply_index(g, r)).collect() }
    }

    pub fn labels(&self) -> Vec<&'static str> {
        self.chain.iter().map(|&r| RAY_LABELS[r]).collect()
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labels().join(" "))
    }
}

/// Initial spin state: a pure ket or a convex mixture of kets.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Pure(Vector3),
    Mixed(Vec<(f64, Vector3)>),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum StateRecord {
    Pure([[f64; 2]; 3]),
    Mixed(Vec<MixedRecord>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixedRecord {
    weight: f64,
    pure: [[f64; 2]; 3],
}

fn to_pairs(v: &Vector3) -> [[f64; 2]; 3] {
    v.map(|x| [x.re, x.im])
}

fn from_pairs(p: &[[f64; 2]; 3]) -> Vector3 {
    p.map(|[re, im]| Complex64::new(re, im))
}

fn check_ket(v: &Vector3) -> Result<()> {
    let n = norm(v);
    if !n.is_finite() || (n - 1.0).abs() > NORMALISATION_TOLERANCE {
        return Err(Error::InvalidState(format!("ket norm {n} is not 1")));
    }
    Ok(())
}

fn random_ket<R: Rng + ?Sized>(rng: &mut R) -> Vector3 {
    loop {
        let v: Vector3 = std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let n = norm(&v);
        if n > 1e-3 {
            return v.map(|x| x / n);
        }
    }
}

impl InitialState {
    pub fn pure(v: Vector3) -> Result<Self> {
        check_ket(&v)?;
        Ok(InitialState::Pure(v))
    }

    pub fn mixed(components: Vec<(f64, Vector3)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidState("mixture has no components".into()));
        }
        for (w, v) in &components {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::InvalidState(format!("mixture weight {w} is not positive")));
            }
            check_ket(v)?;
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > NORMALISATION_TOLERANCE {
            return Err(Error::InvalidState(format!("mixture weights sum to {total}")));
        }
        Ok(InitialState::Mixed(components))
    }

    /// `|0,z⟩`.
    pub fn zero_z() -> Self {
        InitialState::Pure([Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
    }

    pub fn random_pure<R: Rng + ?Sized>(rng: &mut R) -> Self {
        InitialState::Pure(random_ket(rng))
    }

    pub fn random_mixed<R: Rng + ?Sized>(rng: &mut R, components: usize) -> Self {
        let weights: Vec<f64> = (0..components.max(1)).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        InitialState::Mixed(weights.into_iter().map(|w| (w / total, random_ket(rng))).collect())
    }

    pub fn components(&self) -> Vec<(f64, Vector3)> {
        match self {
            InitialState::Pure(v) => vec![(1.0, *v)],
            InitialState::Mixed(c) => c.clone(),
        }
    }

    /// Applies a unitary to every component.
    pub fn transformed(&self, u: &Matrix3) -> Self {
        match self {
            InitialState::Pure(v) => InitialState::Pure(u.apply(v)),
            InitialState::Mixed(c) => InitialState::Mixed(c.iter().map(|(w, v)| (*w, u.apply(v))).collect()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str(text)? {
            StateRecord::Pure(p) => Self::pure(from_pairs(&p)),
            StateRecord::Mixed(m) => Self::mixed(m.iter().map(|r| (r.weight, from_pairs(&r.pure))).collect()),
        }
    }

    pub fn to_json(&self) -> String {
        let record = match self {
            InitialState::Pure(v) => StateRecord::Pure(to_pairs(v)),
            InitialState::Mixed(c) => {
                StateRecord::Mixed(c.iter().map(|(w, v)| MixedRecord { weight: *w, pure: to_pairs(v) }).collect())
            }
        };
        serde_json::to_string(&record).expect("state records serialise")
    }
}

impl Default for InitialState {
    fn default() -> Self {
        Self::zero_z()
    }
}

/// A union of pairwise syntactically disjoint homogeneous events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventUnion {
    members: Vec<HomogeneousEvent>,
}

impl EventUnion {
    pub fn new(members: Vec<HomogeneousEvent>) -> Result<Self> {
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if !members[i].is_disjoint(&members[j]) {
                    return Err(Error::OverlappingUnion(i, j));
                }
            }
        }
        Ok(EventUnion { members })
    }

    pub fn single(event: HomogeneousEvent) -> Self {
        EventUnion { members: vec![event] }
    }

    pub fn members(&self) -> &[HomogeneousEvent] {
        &self.members
    }
}

impl From<HomogeneousEvent> for EventUnion {
    fn from(e: HomogeneousEvent) -> Self {
        EventUnion::single(e)
    }
}

impl EventSet<Colouring> for EventUnion {
    fn contains(&self, history: &Colouring) -> bool {
        self.members.iter().any(|m| m.contains(history))
    }
}

/// An ordering, an initial state and optional detectors, with the
/// projectors cached per ray.
#[derive(Debug, Clone)]
pub struct MeasureContext {
    ordering: Ordering,
    state: InitialState,
    detectors: Vec<usize>,
    projectors: Vec<[Matrix3; 2]>,
    components: Vec<(f64, Vector3)>,
}

/// Per-component event kets; the decoherence functional pairs them up.
pub type EventKets = Vec<Vector3>;

impl MeasureContext {
    pub fn new(ps: &PeresSet, ordering: Ordering, state: InitialState) -> Self {
        let projectors = ps
            .rays()
            .iter()
            .map(|r: &Ray| {
                let d = Direction::from_ray(r);
                [colour_projector(&d, Colour::Green), colour_projector(&d, Colour::Red)]
            })
            .collect();
        let components = state.components();
        MeasureContext { ordering, state, detectors: Vec::new(), projectors, components }
    }

    /// Table order and `|0,z⟩`.
    pub fn default_for(ps: &PeresSet) -> Self {
        Self::new(ps, Ordering::table_order(), InitialState::default())
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    pub fn state(&self) -> &InitialState {
        &self.state
    }

    pub fn detectors(&self) -> &[usize] {
        &self.detectors
    }

    pub fn projector(&self, ray: usize, colour: Colour) -> &Matrix3 {
        &self.projectors[ray][colour.outcome() as usize]
    }

    /// Adds a which-beam detector at `ray`, which must lie on the chain.
    pub fn insert_detector(&self, ray: usize) -> Result<Self> {
        if self.ordering.position(ray).is_none() {
            return Err(Error::Precondition(format!("detector ray {} is not on the chain", RAY_LABELS[ray])));
        }
        let mut next = self.clone();
        if !next.detectors.contains(&ray) {
            if next.detectors.len() == MAX_DETECTORS {
                return Err(Error::Precondition(format!("at most {MAX_DETECTORS} detectors")));
            }
            next.detectors.push(ray);
        }
        Ok(next)
    }

    /// Like [`insert_detector`](Self::insert_detector) but by one-based position.
    pub fn insert_detector_at(&self, position: usize) -> Result<Self> {
        match position.checked_sub(1).and_then(|p| self.ordering.chain().get(p)) {
            Some(&ray) => self.insert_detector(ray),
            None => Err(Error::Precondition(format!("detector position {position} outside 1..={}", self.ordering.len()))),
        }
    }

    fn check_scope(&self, event: &HomogeneousEvent) -> Result<()> {
        let outside = event.fixed_mask() & !self.ordering.mask();
        if outside != 0 {
            let ray = outside.trailing_zeros() as usize;
            return Err(Error::InvalidEvent(format!("ray {} is fixed but not on the chain", RAY_LABELS[ray])));
        }
        Ok(())
    }

    /// The ordered product of fixed-ray projectors, identities elsewhere.
    pub fn class_operator(&self, event: &HomogeneousEvent) -> Result<Matrix3> {
        self.check_scope(event)?;
        let mut m = Matrix3::identity();
        for &ray in self.ordering.chain() {
            if let Some(c) = event.colour(ray) {
                m = *self.projector(ray, c) * m;
            }
        }
        Ok(m)
    }

    /// `|A⟩` for each component of the initial state, ignoring detectors.
    pub fn event_state(&self, event: &HomogeneousEvent) -> Result<EventKets> {
        self.check_scope(event)?;
        Ok(self
            .components
            .iter()
            .map(|(_, psi)| {
                let mut v = *psi;
                for &ray in self.ordering.chain() {
                    if let Some(c) = event.colour(ray) {
                        v = self.projector(ray, c).apply(&v);
                    }
                }
                v
            })
            .collect())
    }

    /// `|γ⟩` for a colouring, restricted to the rays on the chain.
    pub fn path_state(&self, c: &Colouring) -> Result<EventKets> {
        let mask = self.ordering.mask();
        self.event_state(&HomogeneousEvent::from_masks(mask, c.green_mask() & mask)?)
    }

    pub fn union_state(&self, union: &EventUnion) -> Result<EventKets> {
        let mut total = vec![[Complex64::new(0.0, 0.0); 3]; self.components.len()];
        for m in union.members() {
            for (t, v) in total.iter_mut().zip(self.event_state(m)?) {
                for i in 0..3 {
                    t[i] += v[i];
                }
            }
        }
        Ok(total)
    }

    fn pair(&self, a: &EventKets, b: &EventKets) -> Complex64 {
        self.components.iter().zip(a.iter().zip(b)).map(|((w, _), (x, y))| inner(x, y) * *w).sum()
    }

    /// Every colour assignment to the detector rays, as homogeneous events.
    fn sectors(&self) -> Vec<HomogeneousEvent> {
        let mask = self.detectors.iter().fold(0u64, |m, r| m | 1 << r);
        (0u64..1 << self.detectors.len())
            .map(|bits| {
                let green = self.detectors.iter().enumerate().filter(|(k, _)| bits >> k & 1 == 1).fold(0, |g, (_, r)| g | 1 << r);
                HomogeneousEvent::from_masks(mask, green).expect("green rays are fixed")
            })
            .collect()
    }

    fn restrict(union: &EventUnion, sector: &HomogeneousEvent) -> EventUnion {
        EventUnion { members: union.members().iter().filter_map(|m| m.intersect(sector)).collect() }
    }

    /// `D(A;B)`; with detectors, the sum over detector sectors of the
    /// sector-restricted functional.
    pub fn decoherence(&self, a: &EventUnion, b: &EventUnion) -> Result<Complex64> {
        if self.detectors.is_empty() {
            return Ok(self.pair(&self.union_state(a)?, &self.union_state(b)?));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for sector in self.sectors() {
            let (ra, rb) = (Self::restrict(a, &sector), Self::restrict(b, &sector));
            if ra.members.is_empty() || rb.members.is_empty() {
                continue;
            }
            total += self.pair(&self.union_state(&ra)?, &self.union_state(&rb)?);
        }
        Ok(total)
    }

    pub fn decoherence_events(&self, a: &HomogeneousEvent, b: &HomogeneousEvent) -> Result<Complex64> {
        self.decoherence(&EventUnion::single(*a), &EventUnion::single(*b))
    }

    /// `|A| = D(A;A)`.
    pub fn measure(&self, a: &EventUnion) -> Result<f64> {
        Ok(self.decoherence(a, a)?.re)
    }

    pub fn measure_event(&self, a: &HomogeneousEvent) -> Result<f64> {
        self.measure(&EventUnion::single(*a))
    }

    /// `√|A|`, the event-state norm (weighted over mixture components and
    /// summed over detector sectors).
    pub fn event_norm(&self, a: &HomogeneousEvent) -> Result<f64> {
        Ok(self.measure_event(a)?.max(0.0).sqrt())
    }

    /// Identifies the context by ordering, state and detectors.
    pub fn fingerprint(&self) -> String {
        let record = serde_json::json!({
            "ordering": self.ordering.labels(),
            "state": serde_json::from_str::<serde_json::Value>(&self.state.to_json()).expect("valid json"),
            "detectors": self.detectors.iter().map(|&r| RAY_LABELS[r]).collect::<Vec<_>>(),
        });
        hex::encode(Sha256::digest(record.to_string().as_bytes()))
    }
}

/// Norm and measure of one event checked against the threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroCheck {
    pub event: String,
    pub norm: f64,
    pub measure: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PksZeroReport {
    pub threshold: f64,
    pub events: Vec<ZeroCheck>,
    /// Number of syntactically disjoint pairs of PKS events checked.
    pub disjoint_unions: usize,
    pub max_union_norm: f64,
    pub max_norm: f64,
    pub passed: bool,
}

/// Norms of every PKS event on the chain and of every disjoint pair of them.
pub fn verify_pks_zero(ctx: &MeasureContext, ps: &PeresSet, threshold: f64) -> Result<PksZeroReport> {
    let mask = ctx.ordering().mask();
    let pks: Vec<(PksEvent, HomogeneousEvent)> = crate::colouring::pks_events(ps)
        .into_iter()
        .map(|e| (e, e.to_event()))
        .filter(|(_, h)| h.fixed_mask() & !mask == 0)
        .collect();
    let events = pks
        .par_iter()
        .map(|(e, h)| {
            let measure = ctx.measure_event(h)?;
            let norm = measure.max(0.0).sqrt();
            Ok(ZeroCheck { event: e.describe(ps), norm, measure, pass: norm < threshold })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..pks.len())
        .flat_map(|i| (i + 1..pks.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| pks[i].1.is_disjoint(&pks[j].1))
        .collect();
    let max_union_norm = pairs
        .par_iter()
        .map(|&(i, j)| Ok(ctx.measure(&EventUnion::new(vec![pks[i].1, pks[j].1])?)?.max(0.0).sqrt()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let max_norm = events.iter().map(|e| e.norm).fold(0.0, f64::max);
    Ok(PksZeroReport {
        threshold,
        passed: max_norm < threshold && max_union_norm < threshold,
        events,
        disjoint_unions: pairs.len(),
        max_union_norm,
        max_norm,
    })
}

/// A random homogeneous event fixing up to `max_fixed` chain rays.
pub fn random_event<R: Rng + ?Sized>(rng: &mut R, ordering: &Ordering, max_fixed: usize) -> HomogeneousEvent {
    let k = rng.gen_range(0..=max_fixed.min(ordering.len()));
    let mut e = HomogeneousEvent::everything();
    for &ray in ordering.chain().choose_multiple(rng, k) {
        e = e.fix(ray, if rng.gen_bool(0.5) { Colour::Green } else { Colour::Red });
    }
    e
}

/// Three pairwise disjoint events split off a common random event `X` on
/// two chain rays `r` and `s`: `X∩{r=g}`, `X∩{r=r,s=g}`, `X∩{r=r,s=r}`,
/// each optionally refined further on other rays. Returns the triple and
/// `X`; the triple partitions `X` when `refine` is false.
pub fn random_disjoint_triple<R: Rng + ?Sized>(
    rng: &mut R,
    ordering: &Ordering,
    max_fixed: usize,
    refine: bool,
) -> ([HomogeneousEvent; 3], HomogeneousEvent) {
    let picked: Vec<usize> = ordering.chain().choose_multiple(rng, 2).copied().collect();
    let (r, s) = (picked[0], picked[1]);
    let rest: Vec<usize> = ordering.chain().iter().copied().filter(|&x| x != r && x != s).collect();
    let random_colour = |rng: &mut R| if rng.gen_bool(0.5) { Colour::Green } else { Colour::Red };
    let mut base = HomogeneousEvent::everything();
    let k = rng.gen_range(0..=max_fixed.min(rest.len()));
    let extra: Vec<usize> = rest.choose_multiple(rng, k).copied().collect();
    for ray in extra {
        base = base.fix(ray, random_colour(rng));
    }
    let mut triple = [
        base.fix(r, Colour::Green),
        base.fix(r, Colour::Red).fix(s, Colour::Green),
        base.fix(r, Colour::Red).fix(s, Colour::Red),
    ];
    if refine {
        for e in triple.iter_mut() {
            let k = rng.gen_range(0..=2);
            let extra: Vec<usize> = rest.choose_multiple(rng, k).copied().collect();
            for ray in extra {
                if e.colour(ray).is_none() {
                    *e = e.fix(ray, random_colour(rng));
                }
            }
        }
    }
    (triple, base)
}

/// Worst residuals of the decoherence-functional axioms and the quantal
/// sum rule over sampled events.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AxiomReport {
    pub hermiticity: f64,
    pub additivity: f64,
    /// Most negative `D(A;A)` seen, reported as a nonnegative shortfall.
    pub positivity: f64,
    pub normalisation: f64,
    pub sum_rule: f64,
    pub pair_samples: usize,
    pub triple_samples: usize,
}

impl AxiomReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.hermiticity < tol
            && self.additivity < tol
            && self.positivity < NORMALISATION_TOLERANCE
            && self.normalisation < NORMALISATION_TOLERANCE
            && self.sum_rule < tol
    }
}

/// Samples `pairs` event pairs for Hermiticity and positivity, and
/// `triples` disjoint triples for additivity and the sum rule.
pub fn check_axioms<R: Rng + ?Sized>(ctx: &MeasureContext, rng: &mut R, pairs: usize, triples: usize) -> Result<AxiomReport> {
    let mut report = AxiomReport { pair_samples: pairs, triple_samples: triples, ..Default::default() };
    let omega = HomogeneousEvent::everything();
    report.normalisation = (ctx.decoherence_events(&omega, &omega)? - Complex64::new(1.0, 0.0)).norm();
    let ord = ctx.ordering();
    for _ in 0..pairs {
        let (a, b) = (random_event(rng, ord, 6), random_event(rng, ord, 6));
        let dab = ctx.decoherence_events(&a, &b)?;
        let dba = ctx.decoherence_events(&b, &a)?;
        report.hermiticity = report.hermiticity.max((dab - dba.conj()).norm());
        let daa = ctx.decoherence_events(&a, &a)?;
        report.positivity = report.positivity.max(-daa.re).max(daa.im.abs());
    }
    for t in 0..triples {
        let refine = t % 2 == 1;
        let ([a, b, c], x) = random_disjoint_triple(rng, ord, 5, refine);
        let u = |members: &[HomogeneousEvent]| EventUnion::new(members.to_vec());
        let z = random_event(rng, ord, 4);
        // D(A⊔B;Z) = D(A;Z) + D(B;Z), with A⊔B⊔C evaluated directly as X
        // when the triple partitions it.
        let lhs = ctx.decoherence(&u(&[a, b])?, &z.into())?;
        let rhs = ctx.decoherence_events(&a, &z)? + ctx.decoherence_events(&b, &z)?;
        report.additivity = report.additivity.max((lhs - rhs).norm());
        if !refine {
            let whole = ctx.decoherence_events(&x, &z)?;
            let parts = rhs + ctx.decoherence_events(&c, &z)?;
            report.additivity = report.additivity.max((whole - parts).norm());
        }
        let m = |members: &[HomogeneousEvent]| -> Result<f64> { ctx.measure(&u(members)?) };
        let abc = if refine { m(&[a, b, c])? } else { ctx.measure_event(&x)? };
        let residual = abc - m(&[a, b])? - m(&[b, c])? - m(&[a, c])? + m(&[a])? + m(&[b])? + m(&[c])?;
        report.sum_rule = report.sum_rule.max(residual.abs());
    }
    Ok(report)
}
