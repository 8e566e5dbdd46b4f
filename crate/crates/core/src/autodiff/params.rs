use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::error::{Error, Result};

/// A named, contiguous range of the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSlice {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

impl ParamSlice {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Flat vector of trainable parameters with named slices.
///
/// Slices are appended in order, so they are disjoint and tile the vector.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    values: Vec<f64>,
    slices: Vec<ParamSlice>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a slice and returns its range.
    pub fn push(&mut self, name: impl Into<String>, values: &[f64]) -> Range<usize> {
        let offset = self.values.len();
        self.values.extend_from_slice(values);
        self.slices.push(ParamSlice {
            name: name.into(),
            offset,
            len: values.len(),
        });
        offset..offset + values.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn slices(&self) -> &[ParamSlice] {
        &self.slices
    }

    pub fn slice(&self, name: &str) -> Option<&ParamSlice> {
        self.slices.iter().find(|s| s.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.slice(name).map(|s| &self.values[s.range()])
    }

    /// Replaces all values; the length must match.
    pub fn set_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::Shape(format!(
                "parameter vector has length {}, got {}",
                self.values.len(),
                values.len()
            )));
        }
        self.values.copy_from_slice(values);
        Ok(())
    }

    /// Rebuilds a store from serialized parts, checking the slice layout.
    pub fn from_parts(slices: Vec<ParamSlice>, values: Vec<f64>) -> Result<Self> {
        let store = ParamStore { values, slices };
        store.validate()?;
        Ok(store)
    }

    /// Slices must tile `0..len` in order.
    pub fn validate(&self) -> Result<()> {
        let mut next = 0;
        for s in &self.slices {
            if s.offset != next {
                return Err(Error::Shape(format!(
                    "slice '{}' starts at {} but expected {next}",
                    s.name, s.offset
                )));
            }
            next += s.len;
        }
        if next != self.values.len() {
            return Err(Error::Shape(format!(
                "slices cover {next} entries but store has {}",
                self.values.len()
            )));
        }
        Ok(())
    }
}
