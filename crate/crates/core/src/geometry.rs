//! The Peres 33-ray configuration, its orthogonality structure and the
//! order-24 symmetry group of the projective cube.
//!
//! Rays are written in Peres shorthand: a triple of digits in `{-2,..,2}`
//! where the digit `2` stands for `√2`, so `012` is the direction
//! `(0, 1, √2)`. All arithmetic in this module is exact: dot products live
//! in `ℤ[√2]` and symmetries are signed permutation matrices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of rays in the Peres set.
pub const RAY_COUNT: usize = 33;

/// The Peres rays in the fixed listing order used throughout the crate,
/// spelled as in the classic table of ray types (type I, II, III, IV).
pub const RAY_LABELS: [&str; RAY_COUNT] = [
    "001", "010", "100", //
    "011", "01m1", "101", "10m1", "110", "1m10", //
    "012", "0m12", "021", "02m1", "102", "m102", "201", "20m1", "120", "m120", "210", "2m10", //
    "112", "m112", "1m12", "m1m12", "121", "12m1", "m121", "m12m1", "211", "21m1", "2m11",
    "2m1m1",
];

/// The eleven bases of Peres' hand proof, in proof order `B_1 ..= B_11`.
/// Within each basis the first ray is the one coloured green by the
/// fiducial walk (for `B_11` every ray ends up red).
pub const PROOF_BASES: [[&str; 3]; 11] = [
    ["001", "100", "010"],
    ["101", "m101", "010"],
    ["011", "0m11", "100"],
    ["1m12", "m112", "110"],
    ["102", "20m1", "010"],
    ["211", "0m11", "2m1m1"],
    ["201", "010", "m102"],
    ["112", "1m10", "m1m12"],
    ["012", "100", "02m1"],
    ["121", "m101", "m12m1"],
    ["100", "021", "0m12"],
];

/// Classification of Peres rays by the angle to their nearest neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RayType {
    I,
    II,
    III,
    IV,
}

impl fmt::Display for RayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RayType::I => "I",
            RayType::II => "II",
            RayType::III => "III",
            RayType::IV => "IV",
        };
        f.write_str(s)
    }
}

/// An element `rational + sqrt2 * √2` of `ℤ[√2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SurdInt {
    pub rational: i32,
    pub sqrt2: i32,
}

impl SurdInt {
    pub fn is_zero(self) -> bool {
        self.rational == 0 && self.sqrt2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.rational as f64 + self.sqrt2 as f64 * std::f64::consts::SQRT_2
    }
}

/// A projective direction in Peres shorthand, stored in canonical form
/// (first nonzero digit positive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ray([i8; 3]);

impl Ray {
    /// Builds a ray from shorthand digits. The digits must describe one of
    /// the four Peres direction-cosine patterns.
    pub fn new(digits: [i8; 3]) -> Result<Self> {
        if digits.iter().any(|d| !(-2..=2).contains(d)) {
            return Err(Error::InvalidRay(format!("{digits:?}: digits must lie in -2..=2")));
        }
        if digits == [0, 0, 0] {
            return Err(Error::InvalidRay("zero vector".into()));
        }
        let ray = Ray(canonical_sign(digits));
        if ray.shape().is_none() {
            return Err(Error::InvalidRay(format!(
                "{}: squared direction cosines are not a Peres combination",
                ray
            )));
        }
        Ok(ray)
    }

    pub fn digits(&self) -> [i8; 3] {
        self.0
    }

    fn shape(&self) -> Option<RayType> {
        let mut zeros = 0;
        let mut ones = 0;
        let mut twos = 0;
        for d in self.0 {
            match d.abs() {
                0 => zeros += 1,
                1 => ones += 1,
                _ => twos += 1,
            }
        }
        match (zeros, ones, twos) {
            (2, 1, 0) => Some(RayType::I),
            (1, 2, 0) => Some(RayType::II),
            (1, 1, 1) => Some(RayType::III),
            (0, 2, 1) => Some(RayType::IV),
            _ => None,
        }
    }

    pub fn ray_type(&self) -> RayType {
        self.shape().expect("validated at construction")
    }

    /// Exact dot product in `ℤ[√2]`.
    pub fn dot(&self, other: &Ray) -> SurdInt {
        let mut acc = SurdInt::default();
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            let (a, b) = (*a as i32, *b as i32);
            match (a.abs() == 2, b.abs() == 2) {
                (true, true) => acc.rational += 2 * a.signum() * b.signum(),
                (false, false) => acc.rational += a * b,
                (true, false) => acc.sqrt2 += a.signum() * b,
                (false, true) => acc.sqrt2 += a * b.signum(),
            }
        }
        acc
    }

    /// Squared Euclidean length (always an integer for Peres rays).
    pub fn norm_squared(&self) -> i32 {
        self.0
            .iter()
            .map(|d| match d.abs() {
                2 => 2,
                x => (x * x) as i32,
            })
            .sum()
    }

    /// Unit vector in real 3-space.
    pub fn unit_vector(&self) -> [f64; 3] {
        let norm = (self.norm_squared() as f64).sqrt();
        self.0.map(|d| {
            let x = match d {
                2 => std::f64::consts::SQRT_2,
                -2 => -std::f64::consts::SQRT_2,
                d => d as f64,
            };
            x / norm
        })
    }

    /// Machine-readable label: digits separated by spaces, e.g. `"0 2 -1"`.
    pub fn spaced_label(&self) -> String {
        format!("{} {} {}", self.0[0], self.0[1], self.0[2])
    }
}

fn canonical_sign(mut digits: [i8; 3]) -> [i8; 3] {
    if let Some(first) = digits.iter().find(|d| **d != 0) {
        if *first < 0 {
            for d in digits.iter_mut() {
                *d = -*d;
            }
        }
    }
    digits
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.0 {
            if d < 0 {
                write!(f, "m{}", -d)?;
            } else {
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Ray {
    type Err = Error;

    /// Accepts Peres shorthand (`"1m12"`, `"m102"`) or whitespace separated
    /// integers (`"1 -1 2"`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidRay(format!("cannot parse ray label {s:?}"));
        let mut digits = Vec::with_capacity(3);
        if s.contains(char::is_whitespace) || s.contains(',') {
            for tok in s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                digits.push(tok.parse::<i8>().map_err(|_| bad())?);
            }
        } else {
            let mut negate = false;
            for ch in s.chars() {
                match ch {
                    'm' | '-' if !negate => negate = true,
                    '0'..='9' => {
                        let d = ch as i8 - b'0' as i8;
                        digits.push(if negate { -d } else { d });
                        negate = false;
                    }
                    _ => return Err(bad()),
                }
            }
            if negate {
                return Err(bad());
            }
        }
        let digits: [i8; 3] = digits.try_into().map_err(|_| bad())?;
        Ray::new(digits)
    }
}

impl Serialize for Ray {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.spaced_label())
    }
}

impl<'de> Deserialize<'de> for Ray {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Three mutually orthogonal Peres rays, as sorted ray indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Basis {
    pub rays: [usize; 3],
}

impl Basis {
    pub fn new(mut rays: [usize; 3]) -> Self {
        rays.sort_unstable();
        Basis { rays }
    }

    pub fn contains(&self, ray: usize) -> bool {
        self.rays.contains(&ray)
    }

    pub fn mask(&self) -> u64 {
        self.rays.iter().fold(0, |m, r| m | 1 << r)
    }
}

/// An unordered orthogonal pair, annotated with whether some basis holds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrthogonalPair {
    pub rays: [usize; 2],
    pub in_basis: bool,
}

impl OrthogonalPair {
    pub fn mask(&self) -> u64 {
        (1 << self.rays[0]) | (1 << self.rays[1])
    }
}

/// A signed permutation matrix modulo overall sign. The stored
/// representative has a positive nonzero entry in its first row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symmetry {
    pub matrix: [[i8; 3]; 3],
}

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry { matrix: [[1, 0, 0], [0, 1, 0], [0, 0, 1]] };

    /// Reflection exchanging the x and y axes.
    pub const SWAP_XY: Symmetry = Symmetry { matrix: [[0, 1, 0], [1, 0, 0], [0, 0, 1]] };

    /// Validates and canonicalises a signed permutation matrix.
    pub fn new(matrix: [[i8; 3]; 3]) -> Result<Self> {
        let mut col_seen = [false; 3];
        for row in &matrix {
            let nz: Vec<usize> = (0..3).filter(|&c| row[c] != 0).collect();
            if nz.len() != 1 || row[nz[0]].abs() != 1 || col_seen[nz[0]] {
                return Err(Error::InvalidSymmetry(format!("{matrix:?}")));
            }
            col_seen[nz[0]] = true;
        }
        Ok(Self::canonical(matrix))
    }

    fn canonical(mut matrix: [[i8; 3]; 3]) -> Self {
        let lead = matrix[0].iter().copied().find(|x| *x != 0).unwrap_or(1);
        if lead < 0 {
            for row in matrix.iter_mut() {
                for x in row.iter_mut() {
                    *x = -*x;
                }
            }
        }
        Symmetry { matrix }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Symmetry) -> Symmetry {
        let mut out = [[0i8; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum();
            }
        }
        Self::canonical(out)
    }

    pub fn inverse(&self) -> Symmetry {
        let m = self.matrix;
        Self::canonical([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn determinant(&self) -> i8 {
        let m = self.matrix;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// The proper rotation representing this projective symmetry.
    pub fn rotation(&self) -> [[f64; 3]; 3] {
        let s = self.determinant() as f64;
        self.matrix.map(|row| row.map(|x| s * x as f64))
    }

    pub fn apply(&self, ray: &Ray) -> Ray {
        let d = ray.digits();
        let mut out = [0i8; 3];
        for (i, x) in out.iter_mut().enumerate() {
            *x = (0..3).map(|k| self.matrix[i][k] * d[k]).sum();
        }
        Ray::new(out).expect("signed permutations preserve the Peres digit pattern")
    }
}

/// All 24 elements of the projective cube group, identity first, in a fixed
/// order (row permutations lexicographic, then sign patterns).
pub fn symmetry_group() -> Vec<Symmetry> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(24);
    for perm in PERMS {
        for signs in 0u8..8 {
            let mut m = [[0i8; 3]; 3];
            for r in 0..3 {
                m[r][perm[r]] = if signs >> (2 - r) & 1 == 0 { 1 } else { -1 };
            }
            if m[0][perm[0]] > 0 {
                out.push(Symmetry { matrix: m });
            }
        }
    }
    out
}

/// The Peres set with precomputed orthogonality and group action tables.
#[derive(Debug, Clone)]
pub struct PeresSet {
    rays: Vec<Ray>,
    bases: Vec<Basis>,
    pairs: Vec<OrthogonalPair>,
    group: Vec<Symmetry>,
    /// `perm[g][i]` is the index of `group[g]` applied to ray `i`.
    perm: Vec<[usize; RAY_COUNT]>,
    neighbours: [u64; RAY_COUNT],
}

impl PeresSet {
    pub fn new() -> Self {
        let rays = generate_peres_set();
        let mut neighbours = [0u64; RAY_COUNT];
        let mut pairs = Vec::new();
        for i in 0..RAY_COUNT {
            for j in i + 1..RAY_COUNT {
                if are_orthogonal(&rays[i], &rays[j]) {
                    neighbours[i] |= 1 << j;
                    neighbours[j] |= 1 << i;
                    pairs.push([i, j]);
                }
            }
        }
        let mut bases = Vec::new();
        for &[i, j] in &pairs {
            for k in j + 1..RAY_COUNT {
                if neighbours[i] & neighbours[j] & (1 << k) != 0 {
                    bases.push(Basis::new([i, j, k]));
                }
            }
        }
        let pairs = pairs
            .into_iter()
            .map(|rays| OrthogonalPair {
                rays,
                in_basis: bases.iter().any(|b| b.contains(rays[0]) && b.contains(rays[1])),
            })
            .collect();
        let group = symmetry_group();
        let perm = group
            .iter()
            .map(|g| {
                let mut p = [0usize; RAY_COUNT];
                for (i, r) in rays.iter().enumerate() {
                    let image = g.apply(r);
                    p[i] = rays.iter().position(|x| *x == image).expect("group permutes the Peres set");
                }
                p
            })
            .collect();
        PeresSet { rays, bases, pairs, group, perm, neighbours }
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn ray(&self, index: usize) -> Ray {
        self.rays[index]
    }

    /// Display spelling of the ray at `index`, e.g. `m102`.
    pub fn label(&self, index: usize) -> &'static str {
        RAY_LABELS[index]
    }

    pub fn index_of(&self, ray: &Ray) -> Option<usize> {
        self.rays.iter().position(|r| r == ray)
    }

    /// Looks up a ray by any accepted label spelling.
    pub fn find(&self, label: &str) -> Result<usize> {
        let ray: Ray = label.parse()?;
        self.index_of(&ray).ok_or_else(|| Error::NotInPeresSet(label.to_string()))
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn pairs(&self) -> &[OrthogonalPair] {
        &self.pairs
    }

    pub fn group(&self) -> &[Symmetry] {
        &self.group
    }

    /// Bitmask of rays orthogonal to `ray`.
    pub fn neighbours(&self, ray: usize) -> u64 {
        self.neighbours[ray]
    }

    pub fn orthogonal(&self, a: usize, b: usize) -> bool {
        self.neighbours[a] & (1 << b) != 0
    }

    pub fn basis_index(&self, basis: &Basis) -> Option<usize> {
        self.bases.iter().position(|b| b == basis)
    }

    pub fn pair_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.pairs.iter().position(|p| p.rays == key)
    }

    /// Index of a group element in the fixed enumeration.
    pub fn symmetry_index(&self, g: &Symmetry) -> Option<usize> {
        self.group.iter().position(|x| x == g)
    }

    pub fn apply_index(&self, g: usize, ray: usize) -> usize {
        self.perm[g][ray]
    }

    pub fn permutation(&self, g: usize) -> &[usize; RAY_COUNT] {
        &self.perm[g]
    }

    pub fn apply_to_basis(&self, g: usize, basis: &Basis) -> Basis {
        Basis::new(basis.rays.map(|r| self.perm[g][r]))
    }

    /// Applies group element `g` to every ray in a bitmask.
    pub fn apply_to_mask(&self, g: usize, mask: u64) -> u64 {
        let p = &self.perm[g];
        (0..RAY_COUNT).filter(|i| mask >> i & 1 == 1).fold(0, |m, i| m | 1 << p[i])
    }

    /// `B_1 ..= B_11` of the hand proof, resolved against the enumeration.
    pub fn proof_bases(&self) -> Vec<Basis> {
        PROOF_BASES
            .iter()
            .map(|b| {
                let idx = b.map(|l| self.find(l).expect("proof rays belong to the Peres set"));
                Basis::new(idx)
            })
            .collect()
    }

    /// Name `B_k` of a basis if it appears in the hand proof.
    pub fn proof_name(&self, basis: &Basis) -> Option<String> {
        self.proof_bases().iter().position(|b| b == basis).map(|k| format!("B{}", k + 1))
    }

    pub fn type_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for r in &self.rays {
            counts[r.ray_type() as usize] += 1;
        }
        counts
    }
}

impl Default for PeresSet {
    fn default() -> Self {
        Self::new()
    }
}

/// The 33 Peres rays in the fixed listing order.
pub fn generate_peres_set() -> Vec<Ray> {
    RAY_LABELS.iter().map(|l| l.parse().expect("static table is valid")).collect()
}

pub fn are_orthogonal(a: &Ray, b: &Ray) -> bool {
    a.dot(b).is_zero()
}

pub fn enumerate_bases() -> Vec<Basis> {
    PeresSet::new().bases
}

pub fn enumerate_orthogonal_pairs() -> Vec<OrthogonalPair> {
    PeresSet::new().pairs
}

pub fn apply_symmetry(g: &Symmetry, r: &Ray) -> Ray {
    g.apply(r)
}
