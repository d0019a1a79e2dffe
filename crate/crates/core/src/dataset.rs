//! Paired observations and their on-disk format.
//!
//! A dataset file is a JSON header line followed by one CSV row per
//! observation: `d` covariate values, then the space-specific object
//! encoding (see [`MetricSpaceDescriptor::point_width`]). Everything is
//! validated on load, with errors citing the offending line.

use std::io::{BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{MetricSpaceDescriptor, ObjectPoint};

/// Paired observations `(x_i, y_i)` with covariates in R^d and objects in
/// one declared space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub space: MetricSpaceDescriptor,
    pub covariates: Vec<Vec<f64>>,
    pub objects: Vec<ObjectPoint>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    space: MetricSpaceDescriptor,
    d: usize,
    columns: Vec<String>,
}

impl Dataset {
    pub fn new(
        space: MetricSpaceDescriptor,
        covariates: Vec<Vec<f64>>,
        objects: Vec<ObjectPoint>,
    ) -> Result<Self> {
        if covariates.len() != objects.len() {
            return Err(Error::InvalidConfig(format!(
                "{} covariate rows vs {} objects",
                covariates.len(),
                objects.len()
            )));
        }
        let d = covariates.first().map_or(0, Vec::len);
        if d == 0 && !covariates.is_empty() {
            return Err(Error::InvalidConfig("covariates must have at least one column".into()));
        }
        for (i, row) in covariates.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidConfig(format!(
                    "covariate row {i} has {} values, expected {d}",
                    row.len()
                )));
            }
        }
        for (i, p) in objects.iter().enumerate() {
            space
                .validate(p)
                .map_err(|e| Error::InvalidPoint(format!("row {i}: {e}")))?;
        }
        Ok(Self {
            space,
            covariates,
            objects,
        })
    }

    /// Convenience constructor for scalar covariates.
    pub fn univariate(
        space: MetricSpaceDescriptor,
        xs: Vec<f64>,
        objects: Vec<ObjectPoint>,
    ) -> Result<Self> {
        let covariates = xs.into_iter().map(|x| vec![x]).collect();
        Self::new(space, covariates, objects)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Covariate dimension d.
    pub fn dim(&self) -> usize {
        self.covariates.first().map_or(0, Vec::len)
    }

    /// The covariates as scalars; errors unless d = 1.
    pub fn scalar_covariates(&self) -> Result<Vec<f64>> {
        if self.dim() != 1 {
            return Err(Error::InvalidConfig(format!(
                "expected scalar covariates, dataset has d = {}",
                self.dim()
            )));
        }
        Ok(self.covariates.iter().map(|row| row[0]).collect())
    }

    /// Sub-dataset at the given row indices.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut covariates = Vec::with_capacity(indices.len());
        let mut objects = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidConfig(format!("index {i} out of bounds")));
            }
            covariates.push(self.covariates[i].clone());
            objects.push(self.objects[i].clone());
        }
        Ok(Self {
            space: self.space.clone(),
            covariates,
            objects,
        })
    }

    fn header(&self) -> Header {
        let d = self.dim();
        let mut columns: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        for i in 1..=self.space.point_width() {
            columns.push(format!("y{i}"));
        }
        Header {
            space: self.space.clone(),
            d,
            columns,
        }
    }

    /// Serialize to the dataset text format.
    pub fn to_text(&self) -> Result<String> {
        let mut out = serde_json::to_string(&self.header())?;
        out.push('\n');
        for (row, obj) in self.covariates.iter().zip(&self.objects) {
            let mut fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            fields.extend(obj.coords().iter().map(|v| format!("{v}")));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    /// Parse the dataset text format; line numbers in errors are 1-based and
    /// count the header line.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header_line = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let header: Header = serde_json::from_str(header_line).map_err(|e| Error::Parse {
            line: 1,
            msg: format!("bad header: {e}"),
        })?;
        let width = header.d + header.space.point_width();
        if header.columns.len() != width {
            return Err(Error::Parse {
                line: 1,
                msg: format!("{} columns declared, schema needs {width}", header.columns.len()),
            });
        }

        let mut covariates = Vec::new();
        let mut objects = Vec::new();
        for (k, raw) in lines.enumerate() {
            let line_no = k + 2;
            if raw.trim().is_empty() {
                continue;
            }
            let mut vals = Vec::with_capacity(width);
            for (c, field) in raw.split(',').enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("column {}: not a number: {field:?}", c + 1),
                })?;
                vals.push(v);
            }
            if vals.len() != width {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("{} values, schema needs {width}", vals.len()),
                });
            }
            let point =
                ObjectPoint::from_coords(&header.space, &vals[header.d..]).map_err(|e| {
                    Error::Parse {
                        line: line_no,
                        msg: e.to_string(),
                    }
                })?;
            covariates.push(vals[..header.d].to_vec());
            objects.push(point);
        }
        Dataset::new(header.space, covariates, objects)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_text()?.as_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut reader = BufReader::new(file);
        let mut text = String::new();
        use std::io::Read;
        reader.read_to_string(&mut text)?;
        Self::from_text(&text)
    }
}
