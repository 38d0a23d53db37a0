//! Order-of-magnitude estimates of zero-field splitting (spin-spin dipolar
//! coupling of two electrons) and of atomic hyperfine parameters.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{
    joules_to_ghz, joules_to_mhz, ANGSTROM, BOHR_MAGNETON, G_FACTOR, MU0_OVER_4PI, NUCLEAR_MAGNETON,
};
use crate::error::{invalid, Error, Result};

/// Electron-pair displacement, Å.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    pub x12: f64,
    pub y12: f64,
    pub z12: f64,
}

impl GeometryParams {
    pub fn new(x12: f64, y12: f64, z12: f64) -> Result<Self> {
        let g = Self { x12, y12, z12 };
        if ![x12, y12, z12].iter().all(|v| v.is_finite()) {
            return Err(invalid("displacement components must be finite"));
        }
        if g.r12() == 0.0 {
            return Err(invalid("electron separation r12 must be > 0"));
        }
        Ok(g)
    }

    pub fn r12(&self) -> f64 {
        (self.x12 * self.x12 + self.y12 * self.y12 + self.z12 * self.z12).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZfsEstimate {
    #[serde(rename = "D_GHz")]
    pub d: f64,
    #[serde(rename = "E_GHz")]
    pub e: f64,
}

/// Point estimate of `D = (3/2)(μ0/4π)g²μB²(1 − 3x²/r²)/r³` and
/// `E = (3/2)(μ0/4π)g²μB²(z² − y²)/r⁵`, in GHz.
pub fn estimate_zfs(geom: &GeometryParams) -> Result<ZfsEstimate> {
    let g = GeometryParams::new(geom.x12, geom.y12, geom.z12)?;
    let (x, y, z) = (g.x12 * ANGSTROM, g.y12 * ANGSTROM, g.z12 * ANGSTROM);
    let r2 = x * x + y * y + z * z;
    let r = r2.sqrt();
    let pref = 1.5 * MU0_OVER_4PI * G_FACTOR * G_FACTOR * BOHR_MAGNETON * BOHR_MAGNETON;
    let d = pref * (1.0 - 3.0 * x * x / r2) / (r2 * r);
    let e = pref * (z * z - y * y) / (r2 * r2 * r);
    Ok(ZfsEstimate { d: joules_to_ghz(d), e: joules_to_ghz(e) })
}

/// `ψ = c_s φ_s + c_p φ_p` weights and the share `η` of spin density on the atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitalComposition {
    pub cs2: f64,
    pub cp2: f64,
    pub eta: f64,
}

impl OrbitalComposition {
    pub fn new(cs2: f64, cp2: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&cs2) || !(0.0..=1.0).contains(&cp2) {
            return Err(invalid("orbital weights must lie in [0, 1]"));
        }
        if (cs2 + cp2 - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("cs2 + cp2 must be 1, got {}", cs2 + cp2)));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid(format!("eta must lie in (0, 1], got {eta}")));
        }
        Ok(Self { cs2, cp2, eta })
    }

    /// In-plane sp² orbital.
    pub fn sigma(eta: f64) -> Result<Self> {
        Self::new(1.0 / 3.0, 2.0 / 3.0, eta)
    }

    /// Out-of-plane p orbital.
    pub fn pi(eta: f64) -> Result<Self> {
        Self::new(0.0, 1.0, eta)
    }

    pub fn named(kind: &str, eta: f64) -> Result<Self> {
        match kind.to_ascii_lowercase().as_str() {
            "sigma" => Self::sigma(eta),
            "pi" => Self::pi(eta),
            other => Err(invalid(format!("unknown orbital `{other}` (expected sigma or pi)"))),
        }
    }
}

/// Atomic inputs for one nucleus; densities in m⁻³.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuclearSpecies {
    pub label: String,
    pub g_n: f64,
    pub phi_s0_sq: f64,
    pub inv_r3: f64,
}

impl NuclearSpecies {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("g_n", self.g_n), ("phi_s0_sq", self.phi_s0_sq), ("inv_r3", self.inv_r3)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{}: {name} must be finite and > 0", self.label)));
            }
        }
        Ok(())
    }
}

/// Species table keyed by label, e.g. `B11`, `N14`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicTable {
    pub species: BTreeMap<String, NuclearSpecies>,
}

const BUILTIN_TABLE: &str = include_str!("../fixtures/atomic_table.json");

impl AtomicTable {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_TABLE).expect("bundled atomic table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let list: Vec<NuclearSpecies> = serde_json::from_str(text)?;
        let mut species = BTreeMap::new();
        for s in list {
            s.validate()?;
            species.insert(s.label.clone(), s);
        }
        Ok(Self { species })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, label: &str) -> Result<&NuclearSpecies> {
        self.species.get(label).ok_or_else(|| Error::InvalidInput(format!("unknown nuclear species `{label}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperfine {
    #[serde(rename = "f_MHz")]
    pub f: f64,
    #[serde(rename = "d_MHz")]
    pub d: f64,
    #[serde(rename = "A_par_MHz")]
    pub a_par: f64,
    #[serde(rename = "A_perp_MHz")]
    pub a_perp: f64,
}

/// Fermi-contact `f`, dipolar `d`, and `A∥ = f + d`, `A⊥ = f − 2d`, in MHz.
pub fn hyperfine(species: &NuclearSpecies, orbital: &OrbitalComposition) -> Result<Hyperfine> {
    species.validate()?;
    let orb = OrbitalComposition::new(orbital.cs2, orbital.cp2, orbital.eta)?;
    let k = MU0_OVER_4PI * G_FACTOR * BOHR_MAGNETON * species.g_n * NUCLEAR_MAGNETON * orb.eta;
    let f = joules_to_mhz(8.0 * PI / 3.0 * k * orb.cs2 * species.phi_s0_sq);
    let d = joules_to_mhz(0.4 * k * orb.cp2 * species.inv_r3);
    Ok(Hyperfine { f, d, a_par: f + d, a_perp: f - 2.0 * d })
}
