//! C2v representation algebra, optical and spin-orbit selection rules, and
//! the enumeration of singlet- and triplet-ground-state level diagrams.
//!
//! Coordinates: x is the principal (C2) axis in the host plane, z is normal
//! to the plane. The triplet sublevels `|s_x⟩, |s_y⟩, |s_z⟩` transform as
//! A2, B2 and B1 respectively.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Irreducible representations of C2v plus the double-group `E_1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Irrep {
    A1,
    A2,
    B1,
    B2,
    #[serde(rename = "E1/2")]
    EHalf,
}

impl Irrep {
    pub const SINGLE_GROUP: [Irrep; 4] = [Irrep::A1, Irrep::A2, Irrep::B1, Irrep::B2];

    /// Characters under (E, C2, σv(xy), σv(xz)).
    pub fn characters(self) -> [i8; 4] {
        match self {
            Irrep::A1 => [1, 1, 1, 1],
            Irrep::A2 => [1, 1, -1, -1],
            Irrep::B1 => [1, -1, 1, -1],
            Irrep::B2 => [1, -1, -1, 1],
            Irrep::EHalf => [2, 0, 0, 2],
        }
    }

    // C2v is the Klein four-group: encode as two bits and multiply by XOR.
    fn bits(self) -> Option<u8> {
        match self {
            Irrep::A1 => Some(0b00),
            Irrep::A2 => Some(0b11),
            Irrep::B1 => Some(0b01),
            Irrep::B2 => Some(0b10),
            Irrep::EHalf => None,
        }
    }

    fn from_bits(bits: u8) -> Irrep {
        match bits {
            0b00 => Irrep::A1,
            0b11 => Irrep::A2,
            0b01 => Irrep::B1,
            _ => Irrep::B2,
        }
    }
}

impl fmt::Display for Irrep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Irrep::A1 => "A1",
            Irrep::A2 => "A2",
            Irrep::B1 => "B1",
            Irrep::B2 => "B2",
            Irrep::EHalf => "E1/2",
        };
        f.write_str(s)
    }
}

/// Direct product of two single-group irreps.
pub fn irrep_product(a: Irrep, b: Irrep) -> Result<Irrep> {
    match (a.bits(), b.bits()) {
        (Some(x), Some(y)) => Ok(Irrep::from_bits(x ^ y)),
        _ => Err(invalid("E1/2 is a double-group irrep; products are single-group only")),
    }
}

/// Linear polarization of an electric-dipole transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    X,
    Y,
    Z,
    Forbidden,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Polarization::X => "x",
            Polarization::Y => "y",
            Polarization::Z => "z",
            Polarization::Forbidden => "forbidden",
        };
        f.write_str(s)
    }
}

/// Dipole selection rule between two orbital states.
pub fn optical_polarization(initial: Irrep, final_state: Irrep) -> Result<Polarization> {
    Ok(match irrep_product(initial, final_state)? {
        Irrep::A1 => Polarization::X,
        Irrep::B1 => Polarization::Y,
        Irrep::B2 => Polarization::Z,
        _ => Polarization::Forbidden,
    })
}

/// Triplet zero-field sublevel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinAxis {
    #[serde(rename = "s_x")]
    X,
    #[serde(rename = "s_y")]
    Y,
    #[serde(rename = "s_z")]
    Z,
}

impl SpinAxis {
    pub const ALL: [SpinAxis; 3] = [SpinAxis::X, SpinAxis::Y, SpinAxis::Z];

    pub fn irrep(self) -> Irrep {
        match self {
            SpinAxis::X => Irrep::A2,
            SpinAxis::Y => Irrep::B2,
            SpinAxis::Z => Irrep::B1,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Spin-orbit symmetry of a triplet sublevel on an orbital of symmetry `orbital`.
pub fn spin_orbit_irrep(orbital: Irrep, axis: SpinAxis) -> Result<Irrep> {
    irrep_product(orbital, axis.irrep())
}

/// Normalized weights `(p_x, p_y, p_z)` of an ISC channel on the zero-field
/// triplet sublevels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct SelectionVector([f64; 3]);

impl SelectionVector {
    pub const NONSELECTIVE: SelectionVector = SelectionVector([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);

    pub fn new(p: [f64; 3]) -> Result<Self> {
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid(format!("selection weights must be finite and >= 0: {p:?}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("selection weights must sum to 1, got {sum}")));
        }
        Ok(Self(p))
    }

    pub fn sharp(axis: SpinAxis) -> Self {
        let mut p = [0.0; 3];
        p[axis.index()] = 1.0;
        Self(p)
    }

    /// Equal weight on each given axis.
    pub fn uniform(axes: &[SpinAxis]) -> Self {
        let mut p = [0.0; 3];
        for a in axes {
            p[a.index()] = 1.0 / axes.len() as f64;
        }
        Self(p)
    }

    pub fn weights(&self) -> [f64; 3] {
        self.0
    }

    /// The single axis carrying all weight, if any.
    pub fn sharp_axis(&self) -> Option<SpinAxis> {
        SpinAxis::ALL.into_iter().find(|a| self.0[a.index()] == 1.0)
    }

    pub fn is_nonselective(&self) -> bool {
        self.0.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12)
    }

    /// Axes with nonzero weight.
    pub fn support(&self) -> Vec<SpinAxis> {
        SpinAxis::ALL.into_iter().filter(|a| self.0[a.index()] > 0.0).collect()
    }

    /// Relaxes a sharp single-axis vector to `1 - 2ε` on its axis and `ε`
    /// elsewhere. Any other vector is returned unchanged.
    pub fn relaxed(&self, epsilon: f64) -> Self {
        match self.sharp_axis() {
            Some(axis) if epsilon != 0.0 => {
                let mut p = [epsilon; 3];
                p[axis.index()] = 1.0 - 2.0 * epsilon;
                Self(p)
            }
            _ => *self,
        }
    }
}

impl TryFrom<[f64; 3]> for SelectionVector {
    type Error = Error;
    fn try_from(p: [f64; 3]) -> Result<Self> {
        Self::new(p)
    }
}

impl From<SelectionVector> for [f64; 3] {
    fn from(v: SelectionVector) -> Self {
        v.0
    }
}

/// Sublevels of `triplet_orbital` whose spin-orbit symmetry matches the singlet.
pub fn isc_allowed_axes(triplet_orbital: Irrep, singlet_orbital: Irrep) -> Result<Vec<SpinAxis>> {
    let mut axes = Vec::new();
    for axis in SpinAxis::ALL {
        if spin_orbit_irrep(triplet_orbital, axis)? == singlet_orbital {
            axes.push(axis);
        }
    }
    Ok(axes)
}

/// ISC selection vector between a triplet and a singlet orbital state.
///
/// Falls back to the nonselective vector when no sublevel is spin-orbit
/// allowed. `epsilon` relaxes a single allowed axis.
pub fn isc_selection_vector(
    triplet_orbital: Irrep,
    singlet_orbital: Irrep,
    epsilon: Option<f64>,
) -> Result<SelectionVector> {
    let axes = isc_allowed_axes(triplet_orbital, singlet_orbital)?;
    let v = match axes.as_slice() {
        [] => SelectionVector::NONSELECTIVE,
        [axis] => SelectionVector::sharp(*axis),
        many => SelectionVector::uniform(many),
    };
    Ok(match epsilon {
        Some(eps) => v.relaxed(eps),
        None => v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundSpin {
    Singlet,
    Triplet,
}

impl fmt::Display for GroundSpin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroundSpin::Singlet => "singlet",
            GroundSpin::Triplet => "triplet",
        })
    }
}

impl FromStr for GroundSpin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "singlet" | "s" => Ok(GroundSpin::Singlet),
            "triplet" | "t" => Ok(GroundSpin::Triplet),
            other => Err(invalid(format!("ground spin must be singlet or triplet, got '{other}'"))),
        }
    }
}

/// Identifies a diagram: ground manifold, letter, and coupling variant
/// (1 is the main variant).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DiagramId {
    pub ground: GroundSpin,
    pub letter: char,
    pub variant: u8,
}

impl fmt::Display for DiagramId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.ground, self.letter)?;
        if self.variant > 1 {
            write!(f, ".{}", self.variant)?;
        }
        Ok(())
    }
}

impl FromStr for DiagramId {
    type Err = Error;
    /// Parses `singlet-b`, `triplet-g`, `triplet-g.2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownDiagram(s.to_string());
        let (ground, rest) = s.split_once('-').ok_or_else(bad)?;
        let ground: GroundSpin = ground.parse().map_err(|_| bad())?;
        let (letter, variant) = match rest.split_once('.') {
            Some((l, v)) => (l, v.parse::<u8>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        let mut chars = letter.chars();
        let letter = chars.next().ok_or_else(bad)?.to_ascii_lowercase();
        if chars.next().is_some() {
            return Err(bad());
        }
        let id = DiagramId { ground, letter, variant };
        // validate against the enumeration
        find_diagram(&id).map(|_| id).ok_or_else(bad)
    }
}

impl Serialize for DiagramId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DiagramId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Triplet-ground-state classes by ISC selectivity pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagramClass {
    /// No spin selectivity on either ISC.
    I,
    /// Both ISC channels select the same in-plane sublevel (s_x or s_y).
    II,
    /// Only s_z-selective channels.
    III,
    /// Channels select different in-plane sublevels (s_x vs s_y).
    IV,
    /// One channel involves s_z, the other s_x or s_y.
    V,
}

impl fmt::Display for DiagramClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Classifies a pair of ISC vectors from their supports.
pub fn classify(m_prime: &SelectionVector, m_vec: &SelectionVector) -> DiagramClass {
    let selective = |v: &SelectionVector| !v.is_nonselective();
    let support = |v: &SelectionVector| if selective(v) { v.support() } else { Vec::new() };
    let (up, down) = (support(m_prime), support(m_vec));
    if up.is_empty() && down.is_empty() {
        return DiagramClass::I;
    }
    let all: Vec<SpinAxis> = up.iter().chain(down.iter()).copied().collect();
    let in_plane = |a: &SpinAxis| matches!(a, SpinAxis::X | SpinAxis::Y);
    if all.iter().all(|a| *a == SpinAxis::Z) {
        return DiagramClass::III;
    }
    if all.contains(&SpinAxis::Z) {
        return DiagramClass::V;
    }
    // only in-plane axes remain
    let distinct: Vec<SpinAxis> = {
        let mut d: Vec<SpinAxis> = all.iter().copied().filter(in_plane).collect();
        d.sort_by_key(|a| a.index());
        d.dedup();
        d
    };
    if distinct.len() == 1 {
        DiagramClass::II
    } else {
        DiagramClass::IV
    }
}

/// A level diagram with its ISC coupling vectors (before ε relaxation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagram {
    pub id: DiagramId,
    pub ground_spin: GroundSpin,
    /// Orbital symmetry of the optical ground state.
    pub ground_orbital: Irrep,
    /// Orbital symmetry of the optical excited state.
    pub excited_orbital: Irrep,
    /// Excited state -> metastable ISC weights (rate Γ_ISC1).
    pub m_prime: SelectionVector,
    /// Metastable -> ground ISC weights (rate Γ_ISC2).
    pub m_vec: SelectionVector,
    pub emission_polarization: Polarization,
    pub class: DiagramClass,
}

impl LevelDiagram {
    fn new(
        id: DiagramId,
        ground_orbital: Irrep,
        excited_orbital: Irrep,
        m_prime: SelectionVector,
        m_vec: SelectionVector,
    ) -> Self {
        let emission_polarization = optical_polarization(ground_orbital, excited_orbital).expect("single-group irreps");
        Self {
            id,
            ground_spin: id.ground,
            ground_orbital,
            excited_orbital,
            class: classify(&m_prime, &m_vec),
            m_prime,
            m_vec,
            emission_polarization,
        }
    }

    /// Diagram with explicit coupling vectors, for custom models.
    pub fn custom(
        id: DiagramId,
        m_prime: SelectionVector,
        m_vec: SelectionVector,
        emission_polarization: Polarization,
    ) -> Self {
        Self {
            id,
            ground_spin: id.ground,
            ground_orbital: Irrep::A1,
            excited_orbital: Irrep::A1,
            class: classify(&m_prime, &m_vec),
            m_prime,
            m_vec,
            emission_polarization,
        }
    }

    /// The coupling vectors after relaxing sharp channels by `epsilon`.
    pub fn relaxed_vectors(&self, epsilon: f64) -> (SelectionVector, SelectionVector) {
        (self.m_prime.relaxed(epsilon), self.m_vec.relaxed(epsilon))
    }
}

fn allowed(triplet: Irrep, singlet: Irrep) -> Option<SelectionVector> {
    let axes = isc_allowed_axes(triplet, singlet).expect("single-group irreps");
    match axes.as_slice() {
        [] => None,
        [a] => Some(SelectionVector::sharp(*a)),
        many => Some(SelectionVector::uniform(many)),
    }
}

/// Enumerates the main-variant level diagrams for a ground-state manifold.
///
/// Singlet ground state: two single-particle orbitals, `¹A1` ground, `¹X`
/// excited and `³X` metastable, with in-plane emission. Triplet ground state:
/// `³X` ground, `³Y` excited, `¹A1` metastable; in-plane emission keeps 8 of
/// the 16 (X, Y) pairs.
pub fn enumerate_level_diagrams(ground: GroundSpin) -> Vec<LevelDiagram> {
    match ground {
        GroundSpin::Singlet => singlet_diagrams(),
        GroundSpin::Triplet => triplet_diagrams().into_iter().filter(|d| d.id.variant == 1).collect(),
    }
}

/// Every diagram including the alternate excited-state coupling variants of
/// the triplet (g) and (h) diagrams.
pub fn all_level_diagrams() -> Vec<LevelDiagram> {
    let mut out = singlet_diagrams();
    out.extend(triplet_diagrams());
    out
}

/// Alternate variants for one diagram letter (empty when there are none).
pub fn diagram_variants(ground: GroundSpin, letter: char) -> Vec<LevelDiagram> {
    all_level_diagrams().into_iter().filter(|d| d.id.ground == ground && d.id.letter == letter).collect()
}

pub fn find_diagram(id: &DiagramId) -> Option<LevelDiagram> {
    all_level_diagrams().into_iter().find(|d| d.id == *id)
}

fn singlet_diagrams() -> Vec<LevelDiagram> {
    let mut out = Vec::new();
    // ¹A1 → ¹X must be in-plane: X ∈ {A1 (x), B1 (y)}
    for (letter, x) in [('a', Irrep::A1), ('b', Irrep::B1)] {
        let id = DiagramId { ground: GroundSpin::Singlet, letter, variant: 1 };
        let m_prime = allowed(x, x).unwrap_or(SelectionVector::NONSELECTIVE);
        let m_vec = allowed(x, Irrep::A1).unwrap_or(SelectionVector::NONSELECTIVE);
        out.push(LevelDiagram::new(id, Irrep::A1, x, m_prime, m_vec));
    }
    out
}

fn triplet_diagrams() -> Vec<LevelDiagram> {
    use Irrep::*;
    // (ground X, excited Y): x-polarized pairs first, then y-polarized
    let pairs = [
        ('a', A1, A1),
        ('b', A2, A2),
        ('c', B1, B1),
        ('d', B2, B2),
        ('e', A1, B1),
        ('f', B1, A1),
        ('g', A2, B2),
        ('h', B2, A2),
    ];
    let mut out = Vec::new();
    for (letter, x, y) in pairs {
        let id = |variant| DiagramId { ground: GroundSpin::Triplet, letter, variant };
        let m_vec = allowed(x, A1).unwrap_or(SelectionVector::NONSELECTIVE);
        // The upper ISC goes to the lowest ¹A1 singlet when allowed, otherwise
        // through the nearby ¹X singlet of the ground-state orbital symmetry.
        let via_ground_singlet = allowed(y, A1);
        let via_x_singlet = if x != A1 { allowed(y, x) } else { None };
        let main = via_ground_singlet.or(via_x_singlet).unwrap_or(SelectionVector::NONSELECTIVE);
        out.push(LevelDiagram::new(id(1), x, y, main, m_vec));
        // Both singlets available: mixed and ¹X-only variants.
        if let (Some(a), Some(b)) = (via_ground_singlet, via_x_singlet) {
            if a != b {
                let mut axes = a.support();
                axes.extend(b.support());
                out.push(LevelDiagram::new(id(2), x, y, SelectionVector::uniform(&axes), m_vec));
                out.push(LevelDiagram::new(id(3), x, y, b, m_vec));
            }
        }
    }
    out
}
