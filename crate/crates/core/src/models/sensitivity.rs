//! Per-parameter treatment of sensitivity parameters.

use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ModelError, ModelKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SensitivityEntry {
    /// Fixed at a value.
    Point(f64),
    /// Swept over a list of values, one fit per value.
    Grid(Vec<f64>),
    /// Sampled with a normal prior.
    Normal { mean: f64, sd: f64 },
}

impl SensitivityEntry {
    fn validate(&self, name: &str) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Config(format!("{name}: {m}")));
        match self {
            SensitivityEntry::Point(v) if !v.is_finite() => bad(format!("point value {v} is not finite")),
            SensitivityEntry::Grid(g) => {
                if g.is_empty() {
                    return bad("grid is empty".into());
                }
                if g.iter().any(|v| !v.is_finite()) {
                    return bad("grid values must be finite".into());
                }
                for (i, v) in g.iter().enumerate() {
                    if g[..i].contains(v) {
                        return bad(format!("grid value {v} appears twice"));
                    }
                }
                Ok(())
            }
            SensitivityEntry::Normal { mean, sd } => {
                if !mean.is_finite() || !(*sd > 0.0 && sd.is_finite()) {
                    bad(format!("normal prior needs finite mean and sd > 0, got ({mean}, {sd})"))
                } else {
                    Ok(())
                }
            }
            SensitivityEntry::Point(_) => Ok(()),
        }
    }
}

/// A sensitivity parameter after grids have been expanded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolved {
    Fixed(f64),
    Normal { mean: f64, sd: f64 },
}

/// Ordered map from sensitivity parameter name to its entry. Order matters
/// for sweeps: the first grid axis varies slowest.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SensitivityConfig {
    entries: Vec<(String, SensitivityEntry)>,
}

impl SensitivityConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, entry: SensitivityEntry) -> Self {
        self.set(name, entry);
        self
    }

    /// Replaces an existing entry in place or appends a new one.
    pub fn set(&mut self, name: &str, entry: SensitivityEntry) {
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = entry,
            None => self.entries.push((name.to_string(), entry)),
        }
    }

    pub fn get(&self, name: &str) -> Option<&SensitivityEntry> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    pub fn entries(&self) -> &[(String, SensitivityEntry)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks entry values and that every name belongs to `kind`.
    pub fn validate_for(&self, kind: ModelKind) -> Result<(), ModelError> {
        let allowed = kind.sensitivity_names();
        for (name, entry) in &self.entries {
            if !allowed.contains(&name.as_str()) {
                return Err(ModelError::Config(format!(
                    "{} has no sensitivity parameter {name} (expected one of: {})",
                    kind.name(),
                    if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
                )));
            }
            entry.validate(name)?;
        }
        Ok(())
    }

    /// Swept axes in declaration order.
    pub fn grid_axes(&self) -> Vec<(String, Vec<f64>)> {
        self.entries
            .iter()
            .filter_map(|(n, e)| match e {
                SensitivityEntry::Grid(g) => Some((n.clone(), g.clone())),
                _ => None,
            })
            .collect()
    }

    /// Copy with each named grid replaced by a point value.
    pub fn fixing(&self, values: &[(String, f64)]) -> Self {
        let mut out = self.clone();
        for (n, v) in values {
            out.set(n, SensitivityEntry::Point(*v));
        }
        out
    }

    /// Resolves every sensitivity parameter of `kind`, filling in the model
    /// defaults for names not mentioned. Grids must be fixed first.
    pub fn resolve(&self, kind: ModelKind) -> Result<Vec<(String, Resolved)>, ModelError> {
        self.validate_for(kind)?;
        kind.sensitivity_names()
            .iter()
            .map(|&name| {
                let entry = self
                    .get(name)
                    .cloned()
                    .unwrap_or_else(|| kind.default_sensitivity(name));
                let r = match entry {
                    SensitivityEntry::Point(v) => Resolved::Fixed(v),
                    SensitivityEntry::Normal { mean, sd } => Resolved::Normal { mean, sd },
                    SensitivityEntry::Grid(_) => {
                        return Err(ModelError::Config(format!(
                            "{name} is a grid; run a sweep or fix it to a point"
                        )))
                    }
                };
                Ok((name.to_string(), r))
            })
            .collect()
    }
}

impl Serialize for SensitivityConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for SensitivityConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Ordered;
        impl<'de> Visitor<'de> for Ordered {
            type Value = SensitivityConfig;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from sensitivity parameter name to entry")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> Result<Self::Value, A::Error> {
                let mut out = SensitivityConfig::new();
                while let Some((k, v)) = m.next_entry::<String, SensitivityEntry>()? {
                    if out.get(&k).is_some() {
                        return Err(serde::de::Error::custom(format!("duplicate entry {k}")));
                    }
                    out.set(&k, v);
                }
                Ok(out)
            }
        }
        d.deserialize_map(Ordered)
    }
}
