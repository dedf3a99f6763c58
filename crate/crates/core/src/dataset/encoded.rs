use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A discrete attribute and its value alphabet. Instance values are indices
/// into `values`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub values: Vec<String>,
}

/// Fully categorical instance table with an integer-coded class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    attributes: Vec<Attribute>,
    class_name: String,
    classes: Vec<String>,
    instances: Vec<Vec<usize>>,
    labels: Vec<usize>,
}

impl Dataset {
    pub fn new(
        attributes: Vec<Attribute>,
        class_name: impl Into<String>,
        classes: Vec<String>,
        instances: Vec<Vec<usize>>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::NoAttributes);
        }
        if classes.len() < 2 {
            return Err(Error::TooFewClasses);
        }
        if instances.len() != labels.len() {
            return Err(Error::LengthMismatch(format!(
                "{} instances but {} labels",
                instances.len(),
                labels.len()
            )));
        }
        for x in &instances {
            if x.len() != attributes.len() {
                return Err(Error::ArityMismatch {
                    got: x.len(),
                    expected: attributes.len(),
                });
            }
            for (v, a) in x.iter().zip(&attributes) {
                if *v >= a.values.len() {
                    return Err(Error::OutOfRange(format!(
                        "value code {v} outside alphabet of `{}`",
                        a.name
                    )));
                }
            }
        }
        if let Some(&c) = labels.iter().find(|&&c| c >= classes.len()) {
            return Err(Error::UnknownClass(c));
        }
        Ok(Self {
            attributes,
            class_name: class_name.into(),
            classes,
            instances,
            labels,
        })
    }

    /// Builds a dataset from symbolic rows. Alphabets and classes are sorted.
    pub fn from_symbols(attribute_names: &[&str], rows: &[(&[&str], &str)]) -> Result<Self> {
        let n = attribute_names.len();
        let mut alphabets = vec![BTreeSet::new(); n];
        let mut class_set = BTreeSet::new();
        for (values, label) in rows {
            if values.len() != n {
                return Err(Error::ArityMismatch {
                    got: values.len(),
                    expected: n,
                });
            }
            for (set, v) in alphabets.iter_mut().zip(values.iter()) {
                set.insert(v.to_string());
            }
            class_set.insert(label.to_string());
        }
        let attributes: Vec<Attribute> = attribute_names
            .iter()
            .zip(alphabets)
            .map(|(name, set)| Attribute {
                name: name.to_string(),
                values: set.into_iter().collect(),
            })
            .collect();
        let classes: Vec<String> = class_set.into_iter().collect();
        let instances = rows
            .iter()
            .map(|(values, _)| {
                values
                    .iter()
                    .zip(&attributes)
                    .map(|(v, a)| a.values.iter().position(|s| s == v).unwrap())
                    .collect()
            })
            .collect();
        let labels = rows
            .iter()
            .map(|(_, l)| classes.iter().position(|c| c == l).unwrap())
            .collect();
        Self::new(attributes, "class", classes, instances, labels)
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute(&self, j: usize) -> &Attribute {
        &self.attributes[j]
    }

    pub fn class_name(&self) -> &str {
        &self.class_name
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn instances(&self) -> &[Vec<usize>] {
        &self.instances
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Values of attribute `j` across all instances.
    pub fn column(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.instances.iter().map(move |x| x[j])
    }

    /// Row subset sharing this dataset's schema.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            attributes: self.attributes.clone(),
            class_name: self.class_name.clone(),
            classes: self.classes.clone(),
            instances: rows.iter().map(|&i| self.instances[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Re-encodes this dataset against `schema`'s alphabets so codes agree
    /// with a model fitted on `schema`. Symbols unknown to the schema are
    /// appended after the schema's own values.
    pub fn conform_to(&self, schema: &Dataset) -> Result<Dataset> {
        if self.n_attributes() != schema.n_attributes() {
            return Err(Error::ArityMismatch {
                got: self.n_attributes(),
                expected: schema.n_attributes(),
            });
        }
        let mut attributes = Vec::with_capacity(self.n_attributes());
        let mut remaps = Vec::with_capacity(self.n_attributes());
        for (own, target) in self.attributes.iter().zip(&schema.attributes) {
            if own.name != target.name {
                return Err(Error::UnmappedAttribute(own.name.clone()));
            }
            let (values, remap) = merge_alphabet(&target.values, &own.values);
            attributes.push(Attribute {
                name: target.name.clone(),
                values,
            });
            remaps.push(remap);
        }
        let (classes, class_remap) = merge_alphabet(&schema.classes, &self.classes);
        let instances = self
            .instances
            .iter()
            .map(|x| x.iter().zip(&remaps).map(|(&v, r)| r[v]).collect())
            .collect();
        let labels = self.labels.iter().map(|&c| class_remap[c]).collect();
        Ok(Dataset {
            attributes,
            class_name: schema.class_name.clone(),
            classes,
            instances,
            labels,
        })
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.attributes.iter().map(|a| a.name.as_str()).collect();
        header.push(&self.class_name);
        w.write_record(&header)?;
        for (x, &c) in self.instances.iter().zip(&self.labels) {
            let mut rec: Vec<&str> = x
                .iter()
                .zip(&self.attributes)
                .map(|(&v, a)| a.values[v].as_str())
                .collect();
            rec.push(&self.classes[c]);
            w.write_record(&rec)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<csv output>".into(),
            source,
        })?;
        Ok(())
    }
}

/// Returns `base` extended with the symbols of `extra` it lacks, and the map
/// from `extra` codes to codes in the merged alphabet.
fn merge_alphabet(base: &[String], extra: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut merged = base.to_vec();
    let remap = extra
        .iter()
        .map(|s| match merged.iter().position(|m| m == s) {
            Some(i) => i,
            None => {
                merged.push(s.clone());
                merged.len() - 1
            }
        })
        .collect();
    (merged, remap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_symbols_sorts_alphabets() {
        let d = Dataset::from_symbols(&["a"], &[(&["y"], "q"), (&["x"], "p")]).unwrap();
        assert_eq!(d.attribute(0).values, vec!["x", "y"]);
        assert_eq!(d.classes(), &["p", "q"]);
        assert_eq!(d.instances(), &[vec![1], vec![0]]);
        assert_eq!(d.labels(), &[1, 0]);
    }

    #[test]
    fn invariants_are_checked() {
        let a = vec![Attribute {
            name: "a".into(),
            values: vec!["x".into()],
        }];
        let classes = vec!["p".to_string(), "q".to_string()];
        assert!(Dataset::new(a.clone(), "c", classes.clone(), vec![vec![1]], vec![0]).is_err());
        assert!(Dataset::new(a.clone(), "c", classes.clone(), vec![vec![0]], vec![2]).is_err());
        assert!(Dataset::new(a.clone(), "c", vec!["p".into()], vec![vec![0]], vec![0]).is_err());
        assert!(Dataset::new(vec![], "c", classes, vec![], vec![]).is_err());
    }

    #[test]
    fn conform_appends_unseen_symbols() {
        let train = Dataset::from_symbols(&["a"], &[(&["x"], "p"), (&["y"], "q")]).unwrap();
        let test = Dataset::from_symbols(&["a"], &[(&["z"], "p"), (&["y"], "r")]).unwrap();
        let t = test.conform_to(&train).unwrap();
        assert_eq!(t.attribute(0).values, vec!["x", "y", "z"]);
        assert_eq!(t.instances(), &[vec![2], vec![1]]);
        assert_eq!(t.classes(), &["p", "q", "r"]);
        assert_eq!(t.labels(), &[0, 2]);
    }
}
