use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// The six photographic attributes scored alongside the overall score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    BalancedElements,
    ColorHarmony,
    ObjectEmphasis,
    GoodLighting,
    RuleOfThirds,
    VividColor,
}

impl Attribute {
    /// Fixed order; also the order of the attribute head's outputs.
    pub const ALL: [Attribute; 6] = [
        Attribute::BalancedElements,
        Attribute::ColorHarmony,
        Attribute::ObjectEmphasis,
        Attribute::GoodLighting,
        Attribute::RuleOfThirds,
        Attribute::VividColor,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        match self {
            Attribute::BalancedElements => "balanced_elements",
            Attribute::ColorHarmony => "color_harmony",
            Attribute::ObjectEmphasis => "object_emphasis",
            Attribute::GoodLighting => "good_lighting",
            Attribute::RuleOfThirds => "rule_of_thirds",
            Attribute::VividColor => "vivid_color",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.key() == key)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Overall score plus exactly six attribute scores, all in [0,1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "ScoresRepr", try_from = "ScoresRepr")]
pub struct AestheticScores {
    overall: f64,
    attributes: [f64; 6],
}

#[derive(Serialize, Deserialize)]
struct ScoresRepr {
    overall: f64,
    attributes: BTreeMap<Attribute, f64>,
}

impl From<AestheticScores> for ScoresRepr {
    fn from(s: AestheticScores) -> Self {
        ScoresRepr {
            overall: s.overall,
            attributes: s.attributes().collect(),
        }
    }
}

impl TryFrom<ScoresRepr> for AestheticScores {
    type Error = ModelError;

    fn try_from(r: ScoresRepr) -> Result<Self, Self::Error> {
        AestheticScores::from_map(r.overall, &r.attributes)
    }
}

/// `round(100 * value)`.
pub fn display_score(value: f64) -> u8 {
    (100.0 * value).round().clamp(0.0, 100.0) as u8
}

impl AestheticScores {
    pub fn new(overall: f64, attributes: [f64; 6]) -> Result<Self, ModelError> {
        let ok = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !ok(overall) || !attributes.iter().copied().all(ok) {
            return Err(ModelError::InvalidScores(format!(
                "scores must lie in [0,1]: overall {overall}, attributes {attributes:?}"
            )));
        }
        Ok(Self {
            overall,
            attributes,
        })
    }

    pub fn from_map(overall: f64, attributes: &BTreeMap<Attribute, f64>) -> Result<Self, ModelError> {
        if attributes.len() != 6 {
            return Err(ModelError::InvalidScores(format!(
                "expected 6 attribute scores, got {}",
                attributes.len()
            )));
        }
        let mut values = [0.0; 6];
        for (a, v) in attributes {
            values[a.index()] = *v;
        }
        Self::new(overall, values)
    }

    /// Every score equal to `value`.
    pub fn uniform(value: f64) -> Result<Self, ModelError> {
        Self::new(value, [value; 6])
    }

    pub fn overall(&self) -> f64 {
        self.overall
    }

    pub fn attribute(&self, a: Attribute) -> f64 {
        self.attributes[a.index()]
    }

    pub fn attribute_values(&self) -> [f64; 6] {
        self.attributes
    }

    pub fn attributes(&self) -> impl Iterator<Item = (Attribute, f64)> + '_ {
        Attribute::ALL.into_iter().map(|a| (a, self.attribute(a)))
    }

    pub fn display_overall(&self) -> u8 {
        display_score(self.overall)
    }

    pub fn display(&self, a: Attribute) -> u8 {
        display_score(self.attribute(a))
    }

    /// Attributes from highest to lowest score; ties keep the fixed order.
    pub fn ranked_attributes(&self) -> Vec<(Attribute, f64)> {
        let mut v: Vec<_> = self.attributes().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }

    /// All seven values, overall first.
    pub fn as_vector(&self) -> [f64; 7] {
        let mut out = [0.0; 7];
        out[0] = self.overall;
        out[1..].copy_from_slice(&self.attributes);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_and_cardinality_enforced() {
        assert!(AestheticScores::new(1.2, [0.5; 6]).is_err());
        assert!(AestheticScores::new(0.5, [0.5, 0.5, -0.1, 0.5, 0.5, 0.5]).is_err());
        let mut m: BTreeMap<_, _> = Attribute::ALL.iter().map(|&a| (a, 0.3)).collect();
        assert!(AestheticScores::from_map(0.4, &m).is_ok());
        m.remove(&Attribute::VividColor);
        assert!(AestheticScores::from_map(0.4, &m).is_err());
    }

    #[test]
    fn serde_uses_named_keys() {
        let s = AestheticScores::new(0.7, [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"{"overall":0.7,"attributes":{"balanced_elements":0.1,"color_harmony":0.2,"object_emphasis":0.3,"good_lighting":0.4,"rule_of_thirds":0.5,"vivid_color":0.6}}"#
        );
        let back: AestheticScores = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<AestheticScores>(r#"{"overall":0.7,"attributes":{}}"#).is_err());
    }

    #[test]
    fn display_and_ranking() {
        let s = AestheticScores::new(0.505, [0.2, 0.9, 0.9, 0.0, 1.0, 0.35]).unwrap();
        assert_eq!(s.display_overall(), 51);
        assert_eq!(s.display(Attribute::VividColor), 35);
        let ranked: Vec<_> = s.ranked_attributes().into_iter().map(|(a, _)| a).collect();
        assert_eq!(
            ranked,
            [
                Attribute::RuleOfThirds,
                Attribute::ColorHarmony,
                Attribute::ObjectEmphasis,
                Attribute::VividColor,
                Attribute::BalancedElements,
                Attribute::GoodLighting
            ]
        );
    }
}
