//! JSON documents for instances, divisions and certificates.
//!
//! Every number is an exact `{num, den}` pair; floats never appear in a
//! document.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::measures::{Agent, Domain, Instance};
use crate::ratio::Ratio;

/// On-disk form of an [`Instance`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Ratio>,
    pub agents: Vec<Agent>,
    #[serde(default = "default_domain")]
    pub domain: Domain,
    /// Coordinate span; the furthest block end when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<Ratio>,
    /// Generator name, seed, layout landmarks and similar provenance.
    #[serde(default)]
    pub metadata: Map<String, Value>,
}

fn default_domain() -> Domain {
    Domain::Interval
}

impl InstanceDocument {
    pub fn new(inst: &Instance, alpha: Option<Ratio>) -> Self {
        InstanceDocument {
            alpha,
            agents: inst.agents.clone(),
            domain: inst.domain,
            extent: Some(inst.extent.clone()),
            metadata: Map::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value).expect("metadata serializes");
        self.metadata.insert(key.to_string(), value);
        self
    }

    /// The instance rescaled to `[0, 1]` with unit agent totals.
    pub fn to_instance(&self) -> Result<Instance> {
        let extent = match &self.extent {
            Some(v) => v.clone(),
            None => self
                .agents
                .iter()
                .flat_map(|a| a.blocks.iter().map(|b| b.end.clone()))
                .max()
                .ok_or_else(|| Error::InvalidArgument("instance has no blocks".into()))?,
        };
        Instance::new(self.agents.clone(), self.domain, extent)?.normalize()
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<(Instance, InstanceDocument)> {
    let doc: InstanceDocument = read_json(path)?;
    let inst = doc.to_instance()?;
    Ok((inst, doc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_random;
    use crate::measures::Division;

    #[test]
    fn instance_round_trip() {
        let inst = gen_random(2, 3, 7).unwrap();
        let doc = InstanceDocument::new(&inst, Some(Ratio::frac(2, 5))).with_meta("seed", 7);
        let text = to_json(&doc).unwrap();
        assert!(!text.contains('.'), "no floats: {text}");
        let back: InstanceDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        let again = back.to_instance().unwrap();
        assert_eq!((again.agents, again.extent), (inst.agents, inst.extent));
    }

    #[test]
    fn division_round_trip() {
        let div = Division::new(
            vec![Ratio::frac(1, 3), Ratio::frac(2, 3)],
            vec![0, 1, 0],
            2,
            Domain::Interval,
        )
        .unwrap();
        let back: Division = serde_json::from_str(&to_json(&div).unwrap()).unwrap();
        assert_eq!(back, div);
    }
}
