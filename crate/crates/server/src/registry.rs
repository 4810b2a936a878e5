use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use fhdr_core::dataset::{load_table, skyline, DataError};
use fhdr_core::{Dataset, RawTable};
use serde::Serialize;

/// A served dataset and, when it came from a file, the raw table its
/// `origin_ids` point into.
#[derive(Debug)]
pub struct DatasetEntry {
    pub data: Arc<Dataset>,
    pub raw: Option<RawTable>,
}

impl DatasetEntry {
    /// Source-table values for `row`, restricted to `dims`.
    pub fn raw_values(&self, row: usize, dims: &[usize]) -> Option<Vec<Option<f64>>> {
        let raw = self.raw.as_ref()?;
        let cells = raw.row(self.data.origin_id(row));
        Some(dims.iter().map(|&j| cells[j]).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub attributes: Vec<String>,
    pub has_raw_values: bool,
}

#[derive(Debug, Default)]
pub struct Registry {
    entries: BTreeMap<String, Arc<DatasetEntry>>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    /// Registers `data` as-is under `name`, replacing any previous entry.
    pub fn insert(&mut self, name: impl Into<String>, data: Arc<Dataset>, raw: Option<RawTable>) {
        self.entries
            .insert(name.into(), Arc::new(DatasetEntry { data, raw }));
    }

    /// Loads a CSV, normalizes it, keeps its skyline and registers it.
    pub fn load_csv(
        &mut self,
        name: impl Into<String>,
        path: impl AsRef<Path>,
        delta_fraction: f64,
    ) -> Result<Arc<Dataset>, DataError> {
        let raw = RawTable::from_csv_path(path)?;
        let data = Arc::new(skyline(&load_table(&raw, delta_fraction)?));
        self.insert(name, data.clone(), Some(raw));
        Ok(data)
    }

    pub fn get(&self, name: &str) -> Option<Arc<DatasetEntry>> {
        self.entries.get(name).cloned()
    }

    pub fn list(&self) -> Vec<DatasetInfo> {
        self.entries
            .iter()
            .map(|(name, e)| DatasetInfo {
                name: name.clone(),
                n: e.data.n(),
                d: e.data.d(),
                attributes: e.data.attribute_names().to_vec(),
                has_raw_values: e.raw.is_some(),
            })
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
