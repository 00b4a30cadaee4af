use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeType {
    Quantitative,
    Ordinal,
    Nominal,
}

impl AttributeType {
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "quant" | "quantitative" => Ok(Self::Quantitative),
            "ord" | "ordinal" => Ok(Self::Ordinal),
            "nom" | "nominal" => Ok(Self::Nominal),
            other => Err(EngineError::UnknownTypeTag(other.to_string())),
        }
    }

    pub fn is_categorical(self) -> bool {
        !matches!(self, Self::Quantitative)
    }
}

impl fmt::Display for AttributeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Quantitative => "quantitative",
            Self::Ordinal => "ordinal",
            Self::Nominal => "nominal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Numeric { min: f64, max: f64 },
    /// Ordered for ordinal attributes, first-appearance order for nominal ones.
    Categories(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataAttribute {
    pub name: String,
    pub kind: AttributeType,
    pub domain: Domain,
}

impl DataAttribute {
    pub fn quantitative(name: impl Into<String>, min: f64, max: f64) -> Result<Self> {
        let attr = Self {
            name: name.into(),
            kind: AttributeType::Quantitative,
            domain: Domain::Numeric { min, max },
        };
        attr.validate()?;
        Ok(attr)
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        kind: AttributeType,
        categories: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let attr = Self {
            name: name.into(),
            kind,
            domain: Domain::Categories(categories.into_iter().map(Into::into).collect()),
        };
        attr.validate()?;
        Ok(attr)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.kind, &self.domain) {
            (AttributeType::Quantitative, Domain::Numeric { min, max }) => {
                if !(min.is_finite() && max.is_finite() && min <= max) {
                    return Err(EngineError::InvalidArgument(format!(
                        "attribute '{}' has invalid numeric domain [{min}, {max}]",
                        self.name
                    )));
                }
            }
            (AttributeType::Ordinal | AttributeType::Nominal, Domain::Categories(cats)) => {
                if cats.is_empty() {
                    return Err(EngineError::InvalidArgument(format!(
                        "attribute '{}' has no categories",
                        self.name
                    )));
                }
                let mut seen = HashSet::new();
                if let Some(dup) = cats.iter().find(|c| !seen.insert(c.as_str())) {
                    return Err(EngineError::InvalidArgument(format!(
                        "attribute '{}' lists category '{dup}' twice",
                        self.name
                    )));
                }
            }
            _ => {
                return Err(EngineError::InvalidArgument(format!(
                    "attribute '{}': domain does not match type {}",
                    self.name, self.kind
                )))
            }
        }
        Ok(())
    }

    /// Category count for categorical attributes.
    pub fn category_count(&self) -> Option<usize> {
        match &self.domain {
            Domain::Categories(c) => Some(c.len()),
            Domain::Numeric { .. } => None,
        }
    }

    pub fn category_index(&self, value: &str) -> Option<usize> {
        match &self.domain {
            Domain::Categories(c) => c.iter().position(|x| x == value),
            Domain::Numeric { .. } => None,
        }
    }

    /// Numeric bounds used by encoders: the numeric domain, or `[0, K-1]`
    /// over category indices.
    pub fn numeric_bounds(&self) -> (f64, f64) {
        match &self.domain {
            Domain::Numeric { min, max } => (*min, *max),
            Domain::Categories(c) => (0.0, c.len().saturating_sub(1) as f64),
        }
    }

    pub fn conforms(&self, value: &DataValue) -> bool {
        match (value, &self.domain) {
            (DataValue::Missing, _) => true,
            (DataValue::Number(x), Domain::Numeric { min, max }) => {
                x.is_finite() && *x >= *min && *x <= *max
            }
            (DataValue::Category(c), Domain::Categories(cats)) => cats.contains(c),
            _ => false,
        }
    }

    /// Numeric reading of a value: the number itself, or its category index.
    pub fn numeric(&self, value: &DataValue) -> Option<f64> {
        match value {
            DataValue::Number(x) => Some(*x),
            DataValue::Category(c) => self.category_index(c).map(|i| i as f64),
            DataValue::Missing => None,
        }
    }
}

/// One cell. `Missing` marks rows that do not carry the attribute, which is
/// how heterogeneous record kinds share a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataValue {
    Missing,
    Number(f64),
    Category(String),
}

impl DataValue {
    pub fn is_missing(&self) -> bool {
        matches!(self, DataValue::Missing)
    }

    pub fn as_text(&self) -> Option<String> {
        match self {
            DataValue::Missing => None,
            DataValue::Number(x) => Some(x.to_string()),
            DataValue::Category(c) => Some(c.clone()),
        }
    }
}

impl fmt::Display for DataValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataValue::Missing => f.write_str("<missing>"),
            DataValue::Number(x) => write!(f, "{x}"),
            DataValue::Category(c) => f.write_str(c),
        }
    }
}

impl From<&str> for DataValue {
    fn from(s: &str) -> Self {
        DataValue::Category(s.into())
    }
}

impl From<f64> for DataValue {
    fn from(x: f64) -> Self {
        DataValue::Number(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRow {
    pub id: u64,
    pub values: Vec<DataValue>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    pub attributes: Vec<DataAttribute>,
    pub rows: Vec<DataRow>,
}

impl DataTable {
    /// Builds a table, assigning row ids `0..n` in input order.
    pub fn new(attributes: Vec<DataAttribute>, rows: Vec<Vec<DataValue>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, values)| DataRow {
                id: i as u64,
                values,
            })
            .collect();
        let table = Self { attributes, rows };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = HashSet::new();
        for a in &self.attributes {
            a.validate()?;
            if !names.insert(a.name.as_str()) {
                return Err(EngineError::IntegrityViolation(format!(
                    "duplicate attribute name '{}'",
                    a.name
                )));
            }
        }
        let width = self.attributes.len();
        let mut last: Option<u64> = None;
        for row in &self.rows {
            if row.values.len() != width {
                return Err(EngineError::IntegrityViolation(format!(
                    "row {} has {} values, expected {width}",
                    row.id,
                    row.values.len()
                )));
            }
            if last.is_some_and(|l| row.id <= l) {
                return Err(EngineError::IntegrityViolation(format!(
                    "row ids must be unique and ascending (row {})",
                    row.id
                )));
            }
            last = Some(row.id);
            for (attr, value) in self.attributes.iter().zip(&row.values) {
                if !attr.conforms(value) {
                    return Err(EngineError::DomainViolation {
                        attribute: attr.name.clone(),
                        value: value.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn attribute(&self, name: &str) -> Result<&DataAttribute> {
        self.attribute_index(name)
            .map(|i| &self.attributes[i])
            .ok_or_else(|| EngineError::UnknownAttribute(name.to_string()))
    }

    pub fn row_index(&self, id: u64) -> Option<usize> {
        let guess = id as usize;
        if self.rows.get(guess).is_some_and(|r| r.id == id) {
            return Some(guess);
        }
        self.rows.binary_search_by_key(&id, |r| r.id).ok()
    }

    pub fn row(&self, id: u64) -> Option<&DataRow> {
        self.row_index(id).map(|i| &self.rows[i])
    }

    /// Whether some row carries both attributes. Unknown attributes and empty
    /// tables count as co-occurring.
    pub fn co_occur(&self, a: &str, b: &str) -> bool {
        match (self.attribute_index(a), self.attribute_index(b)) {
            (Some(i), Some(j)) if !self.rows.is_empty() => self
                .rows
                .iter()
                .any(|r| !r.values[i].is_missing() && !r.values[j].is_missing()),
            _ => true,
        }
    }

    pub fn value(&self, row_id: u64, attr_index: usize) -> Option<&DataValue> {
        self.row(row_id).and_then(|r| r.values.get(attr_index))
    }
}

/// Row selection used by instantiation and grouping.
#[derive(Debug, Clone, PartialEq)]
pub enum RowFilter {
    All,
    Equals(String, String),
    NotEquals(String, String),
    Has(String),
}

impl RowFilter {
    /// Parses `attr=value`, `attr!=value`, a bare `attr` (row carries it) or `*`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "*" {
            return Ok(RowFilter::All);
        }
        if let Some((a, v)) = s.split_once("!=") {
            return Ok(RowFilter::NotEquals(a.trim().into(), v.trim().into()));
        }
        if let Some((a, v)) = s.split_once('=') {
            return Ok(RowFilter::Equals(a.trim().into(), v.trim().into()));
        }
        Ok(RowFilter::Has(s.to_string()))
    }

    pub fn select(&self, table: &DataTable) -> Result<Vec<u64>> {
        let column = |name: &str| {
            table
                .attribute_index(name)
                .ok_or_else(|| EngineError::UnknownAttribute(name.to_string()))
        };
        let matches_text = |v: &DataValue, want: &str| match v {
            DataValue::Category(c) => c == want,
            DataValue::Number(x) => want.parse::<f64>().is_ok_and(|w| w == *x),
            DataValue::Missing => false,
        };
        let ids = match self {
            RowFilter::All => table.rows.iter().map(|r| r.id).collect(),
            RowFilter::Equals(a, want) => {
                let i = column(a)?;
                table
                    .rows
                    .iter()
                    .filter(|r| matches_text(&r.values[i], want))
                    .map(|r| r.id)
                    .collect()
            }
            RowFilter::NotEquals(a, want) => {
                let i = column(a)?;
                table
                    .rows
                    .iter()
                    .filter(|r| !r.values[i].is_missing() && !matches_text(&r.values[i], want))
                    .map(|r| r.id)
                    .collect()
            }
            RowFilter::Has(a) => {
                let i = column(a)?;
                table
                    .rows
                    .iter()
                    .filter(|r| !r.values[i].is_missing())
                    .map(|r| r.id)
                    .collect()
            }
        };
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn co_occurrence() {
        let t = DataTable::new(
            vec![
                DataAttribute::quantitative("a", 0.0, 1.0).unwrap(),
                DataAttribute::quantitative("b", 0.0, 1.0).unwrap(),
                DataAttribute::quantitative("c", 0.0, 1.0).unwrap(),
            ],
            vec![
                vec![1.0.into(), 1.0.into(), DataValue::Missing],
                vec![DataValue::Missing, DataValue::Missing, 1.0.into()],
            ],
        )
        .unwrap();
        assert!(t.co_occur("a", "b"));
        assert!(!t.co_occur("a", "c"));
        assert!(t.co_occur("a", "zzz"));
    }

    fn table() -> DataTable {
        DataTable::new(
            vec![
                DataAttribute::categorical("kind", AttributeType::Nominal, ["route", "hotel"])
                    .unwrap(),
                DataAttribute::quantitative("cost", 10.0, 30.0).unwrap(),
            ],
            vec![
                vec![DataValue::Category("route".into()), DataValue::Missing],
                vec![DataValue::Category("hotel".into()), DataValue::Number(10.0)],
                vec![DataValue::Category("hotel".into()), DataValue::Number(30.0)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn row_ids_follow_input_order() {
        let t = table();
        let ids: Vec<u64> = t.rows.iter().map(|r| r.id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn filters() {
        let t = table();
        assert_eq!(RowFilter::parse("kind=hotel").unwrap().select(&t).unwrap(), vec![1, 2]);
        assert_eq!(RowFilter::parse("kind!=hotel").unwrap().select(&t).unwrap(), vec![0]);
        assert_eq!(RowFilter::parse("cost").unwrap().select(&t).unwrap(), vec![1, 2]);
        assert_eq!(RowFilter::parse("cost=30").unwrap().select(&t).unwrap(), vec![2]);
        assert!(matches!(
            RowFilter::parse("nope=1").unwrap().select(&t),
            Err(EngineError::UnknownAttribute(_))
        ));
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(DataAttribute::quantitative("x", 2.0, 1.0).is_err());
        assert!(DataAttribute::categorical("c", AttributeType::Ordinal, Vec::<String>::new())
            .is_err());
        assert!(DataAttribute::categorical("c", AttributeType::Nominal, ["a", "a"]).is_err());
    }

    #[test]
    fn out_of_domain_value_rejected() {
        let err = DataTable::new(
            vec![DataAttribute::quantitative("x", 0.0, 1.0).unwrap()],
            vec![vec![DataValue::Number(2.0)]],
        )
        .unwrap_err();
        assert_eq!(err.code(), "DomainViolation");
    }

    #[test]
    fn ordinal_numeric_reading_is_index() {
        let a = DataAttribute::categorical("rank", AttributeType::Ordinal, ["low", "mid", "high"])
            .unwrap();
        assert_eq!(a.numeric(&DataValue::Category("high".into())), Some(2.0));
        assert_eq!(a.numeric_bounds(), (0.0, 2.0));
    }
}
