use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Binary class id. Class 0 means the concept holds (symmetric, three
/// objects, one type, conforming), class 1 means it is violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Holds,
    Violated,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Holds, Label::Violated];

    pub fn id(self) -> u8 {
        match self {
            Label::Holds => 0,
            Label::Violated => 1,
        }
    }

    pub fn from_id(id: u8) -> Result<Label> {
        match id {
            0 => Ok(Label::Holds),
            1 => Ok(Label::Violated),
            other => Err(Error::InvalidParameter(format!("class id {other} is not 0 or 1"))),
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Holds => Label::Violated,
            Label::Violated => Label::Holds,
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l.id()
    }
}

impl TryFrom<u8> for Label {
    type Error = Error;
    fn try_from(v: u8) -> Result<Label> {
        Label::from_id(v)
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Free-form, serializable log of the random choices behind a sample.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Recipe(pub BTreeMap<String, Value>);

impl Recipe {
    pub fn new() -> Self {
        Recipe::default()
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("recipe values are plain data");
        self.0.insert(key.to_string(), v);
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.set(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.0.get(key).and_then(Value::as_str)
    }

    pub fn get_u64(&self, key: &str) -> Option<u64> {
        self.0.get(key).and_then(Value::as_u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub task: String,
    pub round: String,
    pub seed: u64,
    pub recipe: Recipe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: GrayImage,
    pub label: Label,
    pub meta: SampleMeta,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_ids() {
        assert_eq!(Label::Holds.id(), 0);
        assert_eq!(Label::from_id(1).unwrap(), Label::Violated);
        assert!(Label::from_id(2).is_err());
        assert_eq!(Label::Holds.flipped(), Label::Violated);
        assert_eq!(serde_json::to_string(&Label::Violated).unwrap(), "1");
    }

    #[test]
    fn recipe_accessors() {
        let r = Recipe::new().with("strategy", "pair").with("pairs", 3u32);
        assert_eq!(r.get_str("strategy"), Some("pair"));
        assert_eq!(r.get_u64("pairs"), Some(3));
    }
}
