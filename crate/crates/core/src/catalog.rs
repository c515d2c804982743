//! Shipped fixtures: link diagrams, quandles, forms and expected tables.
//!
//! Layout under the catalog root:
//! `links/*.diagram`, `quandles/*.quandle`, `forms/*.form`, `expected/*.json`
//! and `variants/*.diagram` for alternative diagrams of the same links.

use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{DiagramError, DiagramFile, LinkDiagram};
use crate::forms::{validate_form, BilinearForm, FormArray, FormError};
use crate::invariant::{InvariantPolynomial, PolynomialParseError};
use crate::quandle::{Quandle, QuandleError};

/// Environment variable overriding the catalog location.
pub const CATALOG_ENV: &str = "QUANDLE_CATALOG";

/// The catalog shipped with this crate.
pub const BUNDLED_CATALOG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/catalog");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Diagram { path: PathBuf, source: DiagramError },
    #[error("{path}: {source}")]
    Quandle { path: PathBuf, source: QuandleError },
    #[error("{path}: {source}")]
    Form { path: PathBuf, source: FormError },
    #[error("{path}: {message}")]
    Expected { path: PathBuf, message: String },
}

/// One row of an expected table: a polynomial and the links attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedRow {
    pub polynomial: String,
    pub links: Vec<String>,
}

/// Expected polynomials for one (quandle, form) pair, grouped by value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedTable {
    pub quandle: String,
    pub form: String,
    pub rows: Vec<ExpectedRow>,
}

impl ExpectedTable {
    pub fn lookup(&self, link: &str) -> Option<&str> {
        self.rows.iter().find(|r| r.links.iter().any(|l| l == link)).map(|r| r.polynomial.as_str())
    }

    pub fn links(&self) -> Vec<String> {
        let mut out: Vec<String> = self.rows.iter().flat_map(|r| r.links.iter().cloned()).collect();
        out.sort_by(|a, b| natural_cmp(a, b));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub quandle: String,
    pub form: String,
    pub polynomial: InvariantPolynomial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: String,
    pub path: PathBuf,
    pub file: DiagramFile,
    pub expected: Vec<Expectation>,
}

impl CatalogEntry {
    pub fn diagram(&self) -> &LinkDiagram {
        &self.file.diagram
    }

    pub fn source_pd(&self) -> Option<&str> {
        self.file.source.as_ref().map(|s| s.code.as_str())
    }

    pub fn orientation(&self) -> Option<&str> {
        self.file.orientation.as_deref()
    }

    pub fn expected_for(&self, quandle: &str, form: &str) -> Option<&InvariantPolynomial> {
        self.expected.iter().find(|e| e.quandle == quandle && e.form == form).map(|e| &e.polynomial)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    root: PathBuf,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::new(default_root())
    }
}

/// `$QUANDLE_CATALOG` if set, else the bundled catalog.
pub fn default_root() -> PathBuf {
    std::env::var_os(CATALOG_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(BUNDLED_CATALOG))
}

/// Orders `L7a2` before `L7a10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for ((da, sa), (db, sb)) in ca.iter().zip(&cb) {
        let ord = match (da, db) {
            (true, true) => sa.trim_start_matches('0').len().cmp(&sb.trim_start_matches('0').len()).then(sa.cmp(sb)),
            _ => sa.cmp(sb),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len())
}

fn read(path: &Path) -> Result<String, CatalogError> {
    fs::read_to_string(path).map_err(|source| CatalogError::Io { path: path.to_path_buf(), source })
}

pub fn load_diagram_file(path: &Path) -> Result<DiagramFile, CatalogError> {
    DiagramFile::parse(&read(path)?).map_err(|source| CatalogError::Diagram { path: path.to_path_buf(), source })
}

pub fn load_quandle_file(path: &Path) -> Result<Quandle, CatalogError> {
    Quandle::parse(&read(path)?).map_err(|source| CatalogError::Quandle { path: path.to_path_buf(), source })
}

pub fn load_form_file(path: &Path) -> Result<FormArray, CatalogError> {
    FormArray::parse(&read(path)?).map_err(|source| CatalogError::Form { path: path.to_path_buf(), source })
}

impl Catalog {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn ids(&self, dir: &str, ext: &str) -> Result<Vec<String>, CatalogError> {
        let path = self.root.join(dir);
        let listing = fs::read_dir(&path).map_err(|source| CatalogError::Io { path: path.clone(), source })?;
        let mut names = Vec::new();
        for entry in listing {
            let entry = entry.map_err(|source| CatalogError::Io { path: path.clone(), source })?;
            let p = entry.path();
            if p.extension().is_some_and(|e| e == ext) {
                if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                    names.push(stem.to_string());
                }
            }
        }
        names.sort_by(|a, b| natural_cmp(a, b));
        Ok(names)
    }

    fn member(&self, dir: &str, ext: &str, kind: &'static str, name: &str) -> Result<PathBuf, CatalogError> {
        let valid = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        let path = self.root.join(dir).join(format!("{name}.{ext}"));
        if valid && path.is_file() {
            Ok(path)
        } else {
            Err(CatalogError::Unknown { kind, name: name.to_string() })
        }
    }

    /// Link names in natural order.
    pub fn list(&self) -> Result<Vec<String>, CatalogError> {
        self.ids("links", "diagram")
    }

    pub fn quandle_ids(&self) -> Result<Vec<String>, CatalogError> {
        self.ids("quandles", "quandle")
    }

    pub fn form_ids(&self) -> Result<Vec<String>, CatalogError> {
        self.ids("forms", "form")
    }

    pub fn variant_ids(&self) -> Result<Vec<String>, CatalogError> {
        self.ids("variants", "diagram")
    }

    pub fn quandle_path(&self, id: &str) -> Result<PathBuf, CatalogError> {
        self.member("quandles", "quandle", "quandle", id)
    }

    pub fn form_path(&self, id: &str) -> Result<PathBuf, CatalogError> {
        self.member("forms", "form", "form", id)
    }

    pub fn link_path(&self, name: &str) -> Result<PathBuf, CatalogError> {
        self.member("links", "diagram", "link", name)
    }

    pub fn quandle(&self, id: &str) -> Result<Quandle, CatalogError> {
        load_quandle_file(&self.quandle_path(id)?)
    }

    pub fn form_array(&self, id: &str) -> Result<FormArray, CatalogError> {
        load_form_file(&self.form_path(id)?)
    }

    /// Loads and validates a form against `q`.
    pub fn form(&self, id: &str, q: &Quandle) -> Result<BilinearForm, CatalogError> {
        let path = self.form_path(id)?;
        let raw = load_form_file(&path)?;
        validate_form(q, raw).map_err(|source| CatalogError::Form { path, source })
    }

    pub fn variant(&self, name: &str) -> Result<DiagramFile, CatalogError> {
        load_diagram_file(&self.member("variants", "diagram", "variant", name)?)
    }

    pub fn expected_tables(&self) -> Result<Vec<ExpectedTable>, CatalogError> {
        let mut tables = Vec::new();
        for id in self.ids("expected", "json")? {
            let path = self.root.join("expected").join(format!("{id}.json"));
            let table: ExpectedTable = serde_json::from_str(&read(&path)?)
                .map_err(|e| CatalogError::Expected { path: path.clone(), message: e.to_string() })?;
            for row in &table.rows {
                row.polynomial.parse::<InvariantPolynomial>().map_err(|e: PolynomialParseError| {
                    CatalogError::Expected { path: path.clone(), message: e.to_string() }
                })?;
            }
            tables.push(table);
        }
        Ok(tables)
    }

    pub fn expected_table(&self, quandle: &str, form: &str) -> Result<Option<ExpectedTable>, CatalogError> {
        Ok(self.expected_tables()?.into_iter().find(|t| t.quandle == quandle && t.form == form))
    }

    pub fn load(&self, name: &str) -> Result<CatalogEntry, CatalogError> {
        let path = self.link_path(name)?;
        let mut file = load_diagram_file(&path)?;
        if file.diagram.name().is_empty() {
            file.diagram.set_name(name);
        }
        let mut expected = Vec::new();
        for t in self.expected_tables()? {
            if let Some(p) = t.lookup(name) {
                expected.push(Expectation {
                    quandle: t.quandle.clone(),
                    form: t.form.clone(),
                    polynomial: p.parse().expect("checked on load"),
                });
            }
        }
        Ok(CatalogEntry { name: name.to_string(), path, file, expected })
    }
}
