//! Measurement scales and values.
//!
//! Measures are written as `scale:raw` text (`lmh:High`, `0-100:80`); a bare
//! number is read on the `unit` scale.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::AttrValue;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("invalid scale `{name}`: {reason}")]
    InvalidScale { name: String, reason: String },
    #[error("unknown scale `{0}`")]
    UnknownScale(String),
    #[error("value `{raw}` is not valid on scale `{scale}`")]
    InvalidMeasure { scale: String, raw: String },
    #[error("malformed measure `{0}`; expected `scale:value` or a number")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Scale {
    Ordinal { name: String, labels: Vec<String> },
    Continuous { name: String, lo: f64, hi: f64 },
}

impl Scale {
    pub fn ordinal(name: &str, labels: &[&str]) -> Result<Scale, MeasureError> {
        Scale::ordinal_owned(name, labels.iter().map(|s| s.to_string()).collect())
    }

    pub fn ordinal_owned(name: &str, labels: Vec<String>) -> Result<Scale, MeasureError> {
        let invalid = |reason: &str| MeasureError::InvalidScale { name: name.into(), reason: reason.into() };
        if labels.len() < 2 {
            return Err(invalid("an ordinal scale needs at least two labels"));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(invalid("ordinal labels must be distinct"));
            }
        }
        Ok(Scale::Ordinal { name: name.into(), labels })
    }

    pub fn continuous(name: &str, lo: f64, hi: f64) -> Result<Scale, MeasureError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(MeasureError::InvalidScale {
                name: name.into(),
                reason: "continuous scale needs finite lo < hi".into(),
            });
        }
        Ok(Scale::Continuous { name: name.into(), lo, hi })
    }

    /// `<Low, Medium, High>`.
    pub fn lmh() -> Scale {
        Scale::Ordinal { name: "lmh".into(), labels: vec!["Low".into(), "Medium".into(), "High".into()] }
    }

    pub fn percent() -> Scale {
        Scale::Continuous { name: "0-100".into(), lo: 0.0, hi: 100.0 }
    }

    pub fn unit() -> Scale {
        Scale::Continuous { name: "unit".into(), lo: 0.0, hi: 1.0 }
    }

    pub fn name(&self) -> &str {
        match self {
            Scale::Ordinal { name, .. } | Scale::Continuous { name, .. } => name,
        }
    }

    pub fn value(&self, raw: &str) -> Result<MeasureValue, MeasureError> {
        let invalid = || MeasureError::InvalidMeasure { scale: self.name().into(), raw: raw.into() };
        let raw = match self {
            Scale::Ordinal { labels, .. } => {
                if !labels.iter().any(|l| l == raw) {
                    return Err(invalid());
                }
                RawMeasure::Label(raw.to_string())
            }
            Scale::Continuous { .. } => RawMeasure::Number(raw.trim().parse().map_err(|_| invalid())?),
        };
        let v = MeasureValue { scale: self.clone(), raw };
        v.normalize()?;
        Ok(v)
    }

    pub fn number(&self, n: f64) -> Result<MeasureValue, MeasureError> {
        let v = MeasureValue { scale: self.clone(), raw: RawMeasure::Number(n) };
        v.normalize()?;
        Ok(v)
    }

    /// Maps a unit-interval degree back onto this scale. Ordinal scales take the
    /// nearest label; exact ties go to the higher label.
    pub fn denormalize(&self, degree: f64) -> MeasureValue {
        let d = degree.clamp(0.0, 1.0);
        let raw = match self {
            Scale::Continuous { lo, hi, .. } => RawMeasure::Number(lo + d * (hi - lo)),
            Scale::Ordinal { labels, .. } => {
                let k = labels.len() as f64;
                // label i sits at (i+1)/(k+1); solve for the nearest index, rounding half up
                let pos = d * (k + 1.0) - 1.0;
                let idx = (pos + 0.5).floor().clamp(0.0, k - 1.0) as usize;
                RawMeasure::Label(labels[idx].clone())
            }
        };
        MeasureValue { scale: self.clone(), raw }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RawMeasure {
    Label(String),
    Number(f64),
}

impl fmt::Display for RawMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawMeasure::Label(l) => f.write_str(l),
            RawMeasure::Number(n) => write!(f, "{n:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureValue {
    #[serde(serialize_with = "scale_name")]
    pub scale: Scale,
    pub raw: RawMeasure,
}

fn scale_name<S: serde::Serializer>(scale: &Scale, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(scale.name())
}

impl MeasureValue {
    /// Continuous: `(raw - lo) / (hi - lo)`. Ordinal with k labels: index i maps to `(i+1)/(k+1)`.
    pub fn normalize(&self) -> Result<f64, MeasureError> {
        let invalid = || MeasureError::InvalidMeasure { scale: self.scale.name().into(), raw: self.raw.to_string() };
        match (&self.scale, &self.raw) {
            (Scale::Continuous { lo, hi, .. }, RawMeasure::Number(n)) => {
                if !n.is_finite() || n < lo || n > hi {
                    return Err(invalid());
                }
                Ok((n - lo) / (hi - lo))
            }
            (Scale::Ordinal { labels, .. }, RawMeasure::Label(l)) => {
                let i = labels.iter().position(|x| x == l).ok_or_else(invalid)?;
                Ok((i as f64 + 1.0) / (labels.len() as f64 + 1.0))
            }
            _ => Err(invalid()),
        }
    }

    pub fn to_attr(&self) -> AttrValue {
        match (&self.scale, &self.raw) {
            (Scale::Continuous { name, .. }, RawMeasure::Number(n)) if name == "unit" => AttrValue::Number(*n),
            _ => AttrValue::Text(self.to_string()),
        }
    }
}

impl fmt::Display for MeasureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.scale.name(), self.raw)
    }
}

/// Named scales available to a document: the built-ins plus any declared ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRegistry {
    scales: BTreeMap<String, Scale>,
    custom: Vec<String>,
}

impl Default for ScaleRegistry {
    fn default() -> Self {
        let mut scales = BTreeMap::new();
        for s in [Scale::lmh(), Scale::percent(), Scale::unit()] {
            scales.insert(s.name().to_string(), s);
        }
        ScaleRegistry { scales, custom: Vec::new() }
    }
}

impl ScaleRegistry {
    pub fn register(&mut self, scale: Scale) -> Result<(), MeasureError> {
        let name = scale.name().to_string();
        if self.scales.contains_key(&name) || name.contains(':') || name.is_empty() {
            return Err(MeasureError::InvalidScale { name, reason: "name is taken or malformed".into() });
        }
        self.custom.push(name.clone());
        self.scales.insert(name, scale);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Scale, MeasureError> {
        self.scales.get(name).ok_or_else(|| MeasureError::UnknownScale(name.into()))
    }

    /// Declared (non built-in) scales in declaration order.
    pub fn custom(&self) -> impl Iterator<Item = &Scale> {
        self.custom.iter().map(|n| &self.scales[n])
    }

    pub fn parse_text(&self, text: &str) -> Result<MeasureValue, MeasureError> {
        let (scale, raw) = text.split_once(':').ok_or_else(|| MeasureError::Malformed(text.into()))?;
        self.get(scale)?.value(raw)
    }

    pub fn parse_attr(&self, value: &AttrValue) -> Result<MeasureValue, MeasureError> {
        match value {
            AttrValue::Number(n) => Scale::unit().number(*n),
            AttrValue::Text(t) => self.parse_text(t),
            AttrValue::Bool(b) => Err(MeasureError::Malformed(b.to_string())),
        }
    }
}
