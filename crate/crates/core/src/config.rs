//! Simulation configuration: one JSON document naming the level diagram,
//! the zero-field-splitting ratio and the transition rates.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{build_rate_matrix, RateMatrix, RateParameters};
use crate::error::{invalid, Error, Result};
use crate::spin::{eigensystem, triplet_hamiltonian, FieldVector, SpinEigensystem, ZeroFieldSplitting};
use crate::symmetry::{find_diagram, DiagramId, GroundSpin, LevelDiagram};

/// Rates in MHz, `t1_us` in µs (absent means no spin relaxation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub ground: GroundSpin,
    /// Diagram letter with an optional coupling variant, e.g. `b` or `g.2`.
    pub diagram: String,
    pub e_over_d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
    pub gamma_s_mhz: f64,
    pub gamma_e_mhz: f64,
    pub gamma_isc1_mhz: f64,
    pub gamma_isc2_mhz: f64,
    pub epsilon: f64,
}

/// Command-line overrides; `None` keeps the configured value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub diagram: Option<String>,
    pub e_over_d: Option<f64>,
    pub t1_us: Option<f64>,
    pub gamma_s_mhz: Option<f64>,
    pub gamma_e_mhz: Option<f64>,
    pub gamma_isc1_mhz: Option<f64>,
    pub gamma_isc2_mhz: Option<f64>,
    pub epsilon: Option<f64>,
}

impl SimConfig {
    fn from_parts(id: DiagramId, e_over_d: f64, p: &RateParameters) -> Self {
        let diagram = match id.variant {
            1 => id.letter.to_string(),
            v => format!("{}.{v}", id.letter),
        };
        Self {
            ground: id.ground,
            diagram,
            e_over_d,
            t1_us: p.t1.is_finite().then_some(p.t1),
            gamma_s_mhz: p.gamma_s,
            gamma_e_mhz: p.gamma_e,
            gamma_isc1_mhz: p.gamma_isc1,
            gamma_isc2_mhz: p.gamma_isc2,
            epsilon: p.epsilon,
        }
    }

    /// Singlet-ground-state model (b) with its fitted rates, `E/D = −0.33`.
    pub fn singlet_reference() -> Self {
        let id = DiagramId { ground: GroundSpin::Singlet, letter: 'b', variant: 1 };
        Self::from_parts(id, -0.33, &RateParameters::singlet_reference())
    }

    /// Triplet-ground-state model (e) with its fitted rates, `E/D = −0.33`.
    pub fn triplet_reference() -> Self {
        let id = DiagramId { ground: GroundSpin::Triplet, letter: 'e', variant: 1 };
        Self::from_parts(id, -0.33, &RateParameters::triplet_reference())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn validate(&self) -> Result<()> {
        self.diagram_id()?;
        if !self.e_over_d.is_finite() {
            return Err(invalid("e_over_d must be finite"));
        }
        self.rate_parameters()?;
        Ok(())
    }

    pub fn with_overrides(mut self, o: &ConfigOverrides) -> Result<Self> {
        if let Some(d) = &o.diagram {
            // accept either `b` or the full `singlet-b` form
            match d.parse::<DiagramId>() {
                Ok(id) => {
                    self.ground = id.ground;
                    self.diagram = Self::from_parts(id, 0.0, &RateParameters::singlet_reference()).diagram;
                }
                Err(_) => self.diagram = d.clone(),
            }
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        set!(e_over_d, gamma_s_mhz, gamma_e_mhz, gamma_isc1_mhz, gamma_isc2_mhz, epsilon);
        if let Some(t1) = o.t1_us {
            self.t1_us = Some(t1);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn diagram_id(&self) -> Result<DiagramId> {
        format!("{}-{}", self.ground, self.diagram).parse()
    }

    pub fn level_diagram(&self) -> Result<LevelDiagram> {
        let id = self.diagram_id()?;
        find_diagram(&id).ok_or_else(|| Error::UnknownDiagram(id.to_string()))
    }

    pub fn rate_parameters(&self) -> Result<RateParameters> {
        RateParameters::new(
            self.gamma_e_mhz,
            self.gamma_s_mhz,
            self.gamma_isc1_mhz,
            self.gamma_isc2_mhz,
            self.t1_us.unwrap_or(f64::INFINITY),
            self.epsilon,
        )
    }

    pub fn zfs(&self) -> Result<ZeroFieldSplitting> {
        ZeroFieldSplitting::from_ratio(self.e_over_d)
    }

    /// Triplet eigensystem at `field` (reduced units).
    pub fn eigensystem(&self, field: &FieldVector) -> Result<SpinEigensystem> {
        eigensystem(&triplet_hamiltonian(&self.zfs()?, field)?)
    }

    pub fn rate_matrix(&self, field: &FieldVector) -> Result<RateMatrix> {
        build_rate_matrix(&self.level_diagram()?, &self.rate_parameters()?, &self.eigensystem(field)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        for cfg in [SimConfig::singlet_reference(), SimConfig::triplet_reference()] {
            let text = cfg.to_json().unwrap();
            let back = SimConfig::from_json(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_json().unwrap(), text);
        }
    }

    #[test]
    fn missing_t1_means_no_relaxation() {
        let mut cfg = SimConfig::singlet_reference();
        cfg.t1_us = None;
        let text = cfg.to_json().unwrap();
        assert!(!text.contains("t1_us"));
        assert_eq!(SimConfig::from_json(&text).unwrap().rate_parameters().unwrap().relaxation_rate(), 0.0);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let base = SimConfig::singlet_reference();
        let o = ConfigOverrides { diagram: Some("triplet-g.2".into()), epsilon: Some(0.1), ..Default::default() };
        let cfg = base.clone().with_overrides(&o).unwrap();
        assert_eq!(cfg.ground, GroundSpin::Triplet);
        assert_eq!(cfg.diagram, "g.2");
        assert_eq!(cfg.epsilon, 0.1);
        let bad = ConfigOverrides { gamma_s_mhz: Some(-1.0), ..Default::default() };
        assert!(base.clone().with_overrides(&bad).unwrap_err().is_validation());
        let unknown = ConfigOverrides { diagram: Some("z".into()), ..Default::default() };
        assert!(matches!(base.with_overrides(&unknown), Err(Error::UnknownDiagram(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = SimConfig::singlet_reference().to_json().unwrap().replacen('{', "{\"gamma_x\": 1,", 1);
        assert!(SimConfig::from_json(&text).is_err());
    }
}
