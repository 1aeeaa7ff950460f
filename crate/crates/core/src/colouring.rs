//! Green/red colourings of the Peres set, homogeneous events over the
//! colouring space and the Peres-Kochen-Specker (PKS) events.
//!
//! A colouring is a 33-bit word keyed to the fixed ray order; bit `i` set
//! means ray `i` is green (spin-squared value 0).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Basis, PeresSet, RAY_COUNT};

pub const FULL_MASK: u64 = (1 << RAY_COUNT) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Colour {
    Green,
    Red,
}

impl Colour {
    pub fn flip(self) -> Colour {
        match self {
            Colour::Green => Colour::Red,
            Colour::Red => Colour::Green,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Colour::Green => 'g',
            Colour::Red => 'r',
        }
    }

    /// Spin-squared eigenvalue identified with the colour.
    pub fn outcome(self) -> u8 {
        match self {
            Colour::Green => 0,
            Colour::Red => 1,
        }
    }
}

impl FromStr for Colour {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g" | "green" => Ok(Colour::Green),
            "r" | "red" => Ok(Colour::Red),
            other => Err(Error::Parse(format!("unknown colour {other:?}"))),
        }
    }
}

/// A total colouring of the 33 rays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Colouring(u64);

impl Colouring {
    pub fn from_green_mask(mask: u64) -> Self {
        Colouring(mask & FULL_MASK)
    }

    pub fn all_red() -> Self {
        Colouring(0)
    }

    pub fn all_green() -> Self {
        Colouring(FULL_MASK)
    }

    pub fn green_mask(&self) -> u64 {
        self.0
    }

    pub fn colour(&self, ray: usize) -> Colour {
        if self.0 >> ray & 1 == 1 {
            Colour::Green
        } else {
            Colour::Red
        }
    }

    pub fn with(mut self, ray: usize, colour: Colour) -> Self {
        match colour {
            Colour::Green => self.0 |= 1 << ray,
            Colour::Red => self.0 &= !(1 << ray),
        }
        self
    }

    pub fn greens(&self) -> impl Iterator<Item = usize> + '_ {
        (0..RAY_COUNT).filter(move |i| self.0 >> i & 1 == 1)
    }
}

impl fmt::Display for Colouring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..RAY_COUNT {
            write!(f, "{}", self.colour(i).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for Colouring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.chars().count() != RAY_COUNT {
            return Err(Error::InvalidColouring(format!("expected {RAY_COUNT} g/r characters, got {:?}", s)));
        }
        let mut mask = 0;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                'g' | 'G' => mask |= 1 << i,
                'r' | 'R' => {}
                _ => return Err(Error::InvalidColouring(format!("bad character {ch:?} at {i}"))),
            }
        }
        Ok(Colouring(mask))
    }
}

impl Serialize for Colouring {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Colouring {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// The set of colourings agreeing with fixed colours on a subset of rays.
/// Also serves as a partial colouring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HomogeneousEvent {
    fixed: u64,
    green: u64,
}

pub type PartialColouring = HomogeneousEvent;

impl HomogeneousEvent {
    /// The whole sample space: nothing fixed.
    pub fn everything() -> Self {
        HomogeneousEvent::default()
    }

    pub fn from_masks(fixed: u64, green: u64) -> Result<Self> {
        if fixed & !FULL_MASK != 0 || green & !fixed != 0 {
            return Err(Error::InvalidEvent(format!("green mask {green:#x} not inside fixed mask {fixed:#x}")));
        }
        Ok(HomogeneousEvent { fixed, green })
    }

    pub fn singleton(c: Colouring) -> Self {
        HomogeneousEvent { fixed: FULL_MASK, green: c.green_mask() }
    }

    pub fn ray(ray: usize, colour: Colour) -> Self {
        HomogeneousEvent::everything().fix(ray, colour)
    }

    /// All rays in `mask` fixed to `colour`.
    pub fn uniform(mask: u64, colour: Colour) -> Self {
        let green = if colour == Colour::Green { mask } else { 0 };
        HomogeneousEvent { fixed: mask, green }
    }

    /// Fixes (or re-fixes) one ray.
    pub fn fix(mut self, ray: usize, colour: Colour) -> Self {
        self.fixed |= 1 << ray;
        match colour {
            Colour::Green => self.green |= 1 << ray,
            Colour::Red => self.green &= !(1 << ray),
        }
        self
    }

    pub fn free(mut self, ray: usize) -> Self {
        self.fixed &= !(1 << ray);
        self.green &= !(1 << ray);
        self
    }

    /// Frees every ray in `mask`.
    pub fn free_mask(mut self, mask: u64) -> Self {
        self.fixed &= !mask;
        self.green &= !mask;
        self
    }

    pub fn fixed_mask(&self) -> u64 {
        self.fixed
    }

    pub fn green_mask(&self) -> u64 {
        self.green
    }

    pub fn red_mask(&self) -> u64 {
        self.fixed & !self.green
    }

    pub fn fixed_count(&self) -> u32 {
        self.fixed.count_ones()
    }

    pub fn colour(&self, ray: usize) -> Option<Colour> {
        if self.fixed >> ray & 1 == 0 {
            None
        } else if self.green >> ray & 1 == 1 {
            Some(Colour::Green)
        } else {
            Some(Colour::Red)
        }
    }

    pub fn fixed_rays(&self) -> impl Iterator<Item = (usize, Colour)> + '_ {
        (0..RAY_COUNT).filter_map(move |i| self.colour(i).map(|c| (i, c)))
    }

    pub fn contains(&self, c: &Colouring) -> bool {
        (c.green_mask() ^ self.green) & self.fixed == 0
    }

    /// `self ⊆ other` as sets of colourings.
    pub fn is_subset_of(&self, other: &HomogeneousEvent) -> bool {
        other.fixed & !self.fixed == 0 && (self.green ^ other.green) & other.fixed == 0
    }

    /// Syntactic disjointness: some ray is fixed to different colours. For
    /// homogeneous events this is exact.
    pub fn is_disjoint(&self, other: &HomogeneousEvent) -> bool {
        self.conflict(other).is_some()
    }

    /// Lowest ray fixed to different colours in the two events.
    pub fn conflict(&self, other: &HomogeneousEvent) -> Option<usize> {
        let clash = self.fixed & other.fixed & (self.green ^ other.green);
        (clash != 0).then(|| clash.trailing_zeros() as usize)
    }

    pub fn intersect(&self, other: &HomogeneousEvent) -> Option<HomogeneousEvent> {
        if self.is_disjoint(other) {
            None
        } else {
            Some(HomogeneousEvent { fixed: self.fixed | other.fixed, green: self.green | other.green })
        }
    }

    /// The completion with every free ray coloured red.
    pub fn completed_red(&self) -> Colouring {
        Colouring::from_green_mask(self.green)
    }

    /// Image under group element `g` (left action on colourings).
    pub fn transported(&self, ps: &PeresSet, g: usize) -> HomogeneousEvent {
        HomogeneousEvent { fixed: ps.apply_to_mask(g, self.fixed), green: ps.apply_to_mask(g, self.green) }
    }

    /// Human-readable description using display labels, e.g. `{001:g, 021:r}`.
    pub fn describe(&self, ps: &PeresSet) -> String {
        let body: Vec<String> =
            self.fixed_rays().map(|(i, c)| format!("{}:{}", ps.label(i), c.symbol())).collect();
        format!("{{{}}}", body.join(", "))
    }
}

impl fmt::Display for HomogeneousEvent {
    /// 33 characters: `g`, `r`, or `.` for a free ray.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..RAY_COUNT {
            let ch = self.colour(i).map_or('.', Colour::symbol);
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl FromStr for HomogeneousEvent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.chars().count() != RAY_COUNT {
            return Err(Error::InvalidEvent(format!("expected {RAY_COUNT} g/r/. characters")));
        }
        let mut e = HomogeneousEvent::everything();
        for (i, ch) in s.chars().enumerate() {
            match ch {
                'g' | 'G' => e = e.fix(i, Colour::Green),
                'r' | 'R' => e = e.fix(i, Colour::Red),
                '.' | '*' => {}
                _ => return Err(Error::InvalidEvent(format!("bad character {ch:?} at {i}"))),
            }
        }
        Ok(e)
    }
}

impl Serialize for HomogeneousEvent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for HomogeneousEvent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A PKS event: an all-red basis `R_B` or an all-green orthogonal pair `G_P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PksEvent {
    RedBasis(Basis),
    GreenPair([usize; 2]),
}

impl PksEvent {
    pub fn rays(&self) -> Vec<usize> {
        match self {
            PksEvent::RedBasis(b) => b.rays.to_vec(),
            PksEvent::GreenPair(p) => p.to_vec(),
        }
    }

    pub fn to_event(&self) -> HomogeneousEvent {
        match self {
            PksEvent::RedBasis(b) => HomogeneousEvent::uniform(b.mask(), Colour::Red),
            PksEvent::GreenPair([a, b]) => HomogeneousEvent::uniform(1 << a | 1 << b, Colour::Green),
        }
    }

    pub fn transported(&self, ps: &PeresSet, g: usize) -> PksEvent {
        match self {
            PksEvent::RedBasis(b) => PksEvent::RedBasis(ps.apply_to_basis(g, b)),
            PksEvent::GreenPair([a, b]) => {
                let (x, y) = (ps.apply_index(g, *a), ps.apply_index(g, *b));
                PksEvent::GreenPair([x.min(y), x.max(y)])
            }
        }
    }

    pub fn describe(&self, ps: &PeresSet) -> String {
        match self {
            PksEvent::RedBasis(b) => {
                let name = ps.proof_name(b).map(|n| format!(" ({n})")).unwrap_or_default();
                format!("R{{{}}}{}", b.rays.map(|r| ps.label(r)).join(","), name)
            }
            PksEvent::GreenPair(p) => format!("G{{{}}}", p.map(|r| ps.label(r)).join(",")),
        }
    }
}

/// One `R_B` per basis then one `G_P` per orthogonal pair, in enumeration order.
pub fn pks_events(ps: &PeresSet) -> Vec<PksEvent> {
    ps.bases()
        .iter()
        .map(|b| PksEvent::RedBasis(*b))
        .chain(ps.pairs().iter().map(|p| PksEvent::GreenPair(p.rays)))
        .collect()
}

pub fn membership(c: &Colouring, e: &PksEvent) -> bool {
    e.to_event().contains(c)
}

pub fn pks_sets_containing(ps: &PeresSet, c: &Colouring) -> Vec<PksEvent> {
    pks_events(ps).into_iter().filter(|e| membership(c, e)).collect()
}

/// Exactly one green per basis and no green orthogonal pair.
pub fn is_consistent(ps: &PeresSet, c: &Colouring) -> bool {
    let g = c.green_mask();
    ps.bases().iter().all(|b| (g & b.mask()).count_ones() == 1)
        && ps.pairs().iter().all(|p| (g & p.mask()).count_ones() < 2)
}

/// `(g·c)(u) = c(g⁻¹·u)`, so that `g(R_B) = R_{g(B)}`.
pub fn act_on_colouring(ps: &PeresSet, g: usize, c: &Colouring) -> Colouring {
    Colouring::from_green_mask(ps.apply_to_mask(g, c.green_mask()))
}
