use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::model::{AttributeType, DataAttribute, DataTable, DataValue, Domain};

/// Type override for one column, e.g. parsed from `ord:low|mid|high`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub kind: AttributeType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

impl ColumnSpec {
    /// Parses `quant`, `nom`, `ord:a|b|c` or `nom:a|b`.
    pub fn parse(s: &str) -> Result<Self> {
        let (tag, cats) = match s.split_once(':') {
            Some((t, c)) => (t, Some(c.split('|').map(str::to_string).collect())),
            None => (s, None),
        };
        Ok(Self {
            kind: AttributeType::from_tag(tag)?,
            categories: cats,
        })
    }
}

pub type TypeAnnotations = BTreeMap<String, ColumnSpec>;

pub fn load_csv(path: &Path, annotations: &TypeAnnotations) -> Result<DataTable> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    parse_csv(&text, annotations).map_err(|e| match e {
        EngineError::EmptyFile(_) => EngineError::EmptyFile(path.display().to_string()),
        other => other,
    })
}

/// Parses CSV text. Header cells may carry a `:quant|ord|nom` suffix;
/// `annotations` take precedence. Untyped columns whose cells all parse as
/// numbers are quantitative, the rest nominal. Empty cells are missing.
pub fn parse_csv(text: &str, annotations: &TypeAnnotations) -> Result<DataTable> {
    if text.trim().is_empty() {
        return Err(EngineError::EmptyFile("<input>".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| EngineError::EmptyFile("<input>".into()))?
        .map_err(|e| EngineError::Parse(e.to_string()))?;

    let mut columns = Vec::with_capacity(header.len());
    for cell in header.iter() {
        let (name, tag) = match cell.trim().rsplit_once(':') {
            Some((n, t)) => (n.to_string(), Some(AttributeType::from_tag(t)?)),
            None => (cell.trim().to_string(), None),
        };
        columns.push((name, tag));
    }

    let mut cells: Vec<Vec<String>> = Vec::new();
    for record in records {
        let record = record.map_err(|e| EngineError::Parse(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != columns.len() {
            return Err(EngineError::RaggedRows {
                line,
                expected: columns.len(),
                found: record.len(),
            });
        }
        cells.push(record.iter().map(|c| c.trim().to_string()).collect());
    }

    let mut attributes = Vec::with_capacity(columns.len());
    let mut values: Vec<Vec<DataValue>> = vec![Vec::with_capacity(columns.len()); cells.len()];
    for (j, (name, tag)) in columns.iter().enumerate() {
        let column: Vec<&str> = cells.iter().map(|r| r[j].as_str()).collect();
        let spec = annotations.get(name);
        let numeric = column
            .iter()
            .filter(|c| !c.is_empty())
            .all(|c| c.parse::<f64>().is_ok_and(f64::is_finite));
        let kind = spec.map(|s| s.kind).or(*tag).unwrap_or(if numeric {
            AttributeType::Quantitative
        } else {
            AttributeType::Nominal
        });
        let attribute = match kind {
            AttributeType::Quantitative => {
                let mut nums = Vec::new();
                for (i, c) in column.iter().enumerate() {
                    if c.is_empty() {
                        values[i].push(DataValue::Missing);
                        continue;
                    }
                    let x: f64 = c.parse().map_err(|_| EngineError::DomainViolation {
                        attribute: name.clone(),
                        value: c.to_string(),
                    })?;
                    nums.push(x);
                    values[i].push(DataValue::Number(x));
                }
                let min = nums.iter().copied().fold(f64::INFINITY, f64::min);
                let max = nums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let (min, max) = if nums.is_empty() { (0.0, 0.0) } else { (min, max) };
                DataAttribute {
                    name: name.clone(),
                    kind,
                    domain: Domain::Numeric { min, max },
                }
            }
            AttributeType::Ordinal | AttributeType::Nominal => {
                let categories = match spec.and_then(|s| s.categories.clone()) {
                    Some(c) => c,
                    None if kind == AttributeType::Ordinal => {
                        return Err(EngineError::MissingCategoryOrder(name.clone()))
                    }
                    None => {
                        let mut seen: Vec<String> = Vec::new();
                        for c in column.iter().filter(|c| !c.is_empty()) {
                            if !seen.iter().any(|s| s == c) {
                                seen.push(c.to_string());
                            }
                        }
                        seen
                    }
                };
                for (i, c) in column.iter().enumerate() {
                    values[i].push(if c.is_empty() {
                        DataValue::Missing
                    } else {
                        DataValue::Category(c.to_string())
                    });
                }
                DataAttribute::categorical(name.clone(), kind, categories)?
            }
        };
        attributes.push(attribute);
    }
    DataTable::new(attributes, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typed_header() {
        let t = parse_csv("city:nom,cost:quant\nParis,10\nRome,20\n", &TypeAnnotations::new()).unwrap();
        assert_eq!(t.attributes.len(), 2);
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[1].id, 1);
        assert_eq!(t.attributes[0].kind, AttributeType::Nominal);
        assert_eq!(t.attributes[1].domain, Domain::Numeric { min: 10.0, max: 20.0 });
    }

    #[test]
    fn inference_and_missing() {
        let t = parse_csv("a,b\n1,x\n,y\n3.5,\n", &TypeAnnotations::new()).unwrap();
        assert_eq!(t.attributes[0].kind, AttributeType::Quantitative);
        assert_eq!(t.attributes[1].kind, AttributeType::Nominal);
        assert!(t.rows[1].values[0].is_missing());
        assert!(t.rows[2].values[1].is_missing());
    }

    #[test]
    fn ragged_reports_line() {
        let err = parse_csv("a,b\n1,2\n3\n", &TypeAnnotations::new()).unwrap_err();
        assert_eq!(
            err,
            EngineError::RaggedRows { line: 3, expected: 2, found: 1 }
        );
    }

    #[test]
    fn ordinal_needs_order() {
        let err = parse_csv("size:ord\nS\nM\n", &TypeAnnotations::new()).unwrap_err();
        assert_eq!(err.code(), "MissingCategoryOrder");
        let mut ann = TypeAnnotations::new();
        ann.insert("size".into(), ColumnSpec::parse("ord:S|M|L").unwrap());
        let t = parse_csv("size\nM\nS\n", &ann).unwrap();
        assert_eq!(t.attributes[0].category_index("L"), Some(2));
    }

    #[test]
    fn bad_tag_and_empty() {
        assert_eq!(
            parse_csv("a:int\n1\n", &TypeAnnotations::new()).unwrap_err().code(),
            "UnknownTypeTag"
        );
        assert_eq!(parse_csv("  \n", &TypeAnnotations::new()).unwrap_err().code(), "EmptyFile");
    }

    #[test]
    fn quoted_fields() {
        let t = parse_csv("name,n\n\"Smith, J\",1\n", &TypeAnnotations::new()).unwrap();
        assert_eq!(t.rows[0].values[0], DataValue::from("Smith, J"));
    }
}
