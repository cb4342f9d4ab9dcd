//! Trained models, projection into the learnt space, and model files.
//!
//! Both PWCA and the KCCA baseline produce a [`PwcaModel`]; the two differ
//! only in the `method` tag, which selects the per-component projection
//! scale (`1/γ` for PWCA, `1` for KCCA).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataio;
use crate::error::{Error, Result};
use crate::kernels::{cross_gram, KernelSpec, ViewMatrix};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pwca,
    Kcca,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Pwca => "pwca",
            Method::Kcca => "kcca",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pwca" => Ok(Method::Pwca),
            "kcca" => Ok(Method::Kcca),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// Coordinates of one sample in the learnt space, one value per component.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(pub Vec<f64>);

impl Embedding {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A trained multi-view model.
///
/// `duals[v]` is `ℓ x k`; column `j` holds the dual coefficients of view `v`
/// for component `j`. Stacking column `j` of every view gives an
/// eigenvector of the training system: unit-norm for PWCA, scaled to unit
/// canonical variance for KCCA.
#[derive(Debug, Clone, PartialEq)]
pub struct PwcaModel {
    method: Method,
    tau: f64,
    kernel_spec: KernelSpec,
    gammas: Vec<f64>,
    duals: Vec<Matrix>,
    train_views: Vec<ViewMatrix>,
    train_view_paths: Vec<String>,
}

impl PwcaModel {
    /// Assembles a model from its parts, checking that dimensions agree.
    pub fn from_parts(
        method: Method,
        tau: f64,
        kernel_spec: KernelSpec,
        gammas: Vec<f64>,
        duals: Vec<Matrix>,
        train_views: Vec<ViewMatrix>,
    ) -> Result<Self> {
        if duals.len() != train_views.len() {
            return Err(Error::dims(format!(
                "{} dual blocks for {} views",
                duals.len(),
                train_views.len()
            )));
        }
        if duals.len() < 2 {
            return Err(Error::TooFewViews(duals.len()));
        }
        let l = train_views[0].rows();
        let k = gammas.len();
        for (v, (d, x)) in duals.iter().zip(&train_views).enumerate() {
            if x.rows() != l {
                return Err(Error::dims(format!("view {v} has {} rows, expected {l}", x.rows())));
            }
            if d.rows() != l || d.cols() != k {
                return Err(Error::dims(format!(
                    "dual block {v} is {}x{}, expected {l}x{k}",
                    d.rows(),
                    d.cols()
                )));
            }
        }
        if gammas.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("eigenvalue".into()));
        }
        Ok(Self {
            method,
            tau,
            kernel_spec,
            gammas,
            duals,
            train_views,
            train_view_paths: Vec::new(),
        })
    }

    /// Records where the training views live so the model file can refer
    /// to them.
    pub fn with_train_view_paths(mut self, paths: Vec<String>) -> Self {
        self.train_view_paths = paths;
        self
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kernel_spec(&self) -> &KernelSpec {
        &self.kernel_spec
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn duals(&self) -> &[Matrix] {
        &self.duals
    }

    pub fn train_views(&self) -> &[ViewMatrix] {
        &self.train_views
    }

    pub fn train_view_paths(&self) -> &[String] {
        &self.train_view_paths
    }

    /// Number of views.
    pub fn s(&self) -> usize {
        self.duals.len()
    }

    /// Number of training samples.
    pub fn l(&self) -> usize {
        self.train_views[0].rows()
    }

    /// Number of retained components.
    pub fn k(&self) -> usize {
        self.gammas.len()
    }

    /// Column `j` of every dual block, concatenated.
    pub fn stacked_dual(&self, j: usize) -> Vec<f64> {
        self.duals.iter().flat_map(|d| d.column(j)).collect()
    }

    /// Same model with a different method tag.
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    fn component_scale(&self, j: usize) -> f64 {
        match self.method {
            Method::Pwca => 1.0 / self.gammas[j],
            Method::Kcca => 1.0,
        }
    }
}

/// Embeds `queries` (samples of view `view_index`) into the learnt space.
///
/// Component `j` of query `q` is `scale_j · Σ_r k(train_r, q) · duals[v][r, j]`
/// with `scale_j = 1/γ_j` for PWCA and `1` for KCCA.
pub fn project(model: &PwcaModel, view_index: usize, queries: &ViewMatrix) -> Result<Vec<Embedding>> {
    if view_index >= model.s() {
        return Err(Error::IndexOutOfRange {
            index: view_index,
            len: model.s(),
        });
    }
    let cross = cross_gram(&model.train_views[view_index], queries, &model.kernel_spec)?;
    let mut coords = cross.matmul(&model.duals[view_index])?;
    let scales: Vec<f64> = (0..model.k()).map(|j| model.component_scale(j)).collect();
    for i in 0..coords.rows() {
        for (v, s) in coords.row_mut(i).iter_mut().zip(&scales) {
            *v *= s;
        }
    }
    Ok((0..coords.rows()).map(|i| Embedding(coords.row(i).to_vec())).collect())
}

/// Absolute inner product of two embeddings.
pub fn similarity(e1: &Embedding, e2: &Embedding) -> Result<f64> {
    if e1.len() != e2.len() {
        return Err(Error::dims(format!(
            "embeddings have {} and {} components",
            e1.len(),
            e2.len()
        )));
    }
    Ok(crate::linalg::dot(&e1.0, &e2.0).abs())
}

/// Index (0-based) of the component with the largest absolute value; the
/// smallest index wins ties.
pub fn assign_cluster(e: &Embedding) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, v) in e.0.iter().enumerate() {
        let a = v.abs();
        if best.is_none_or(|(_, b)| a > b) {
            best = Some((j, a));
        }
    }
    best.map(|(j, _)| j).ok_or(Error::EmptyEmbedding)
}

/// On-disk model document.
///
/// `duals[v][j]` is the length-`ℓ` dual vector of view `v`, component `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub method: Method,
    pub s: usize,
    pub l: usize,
    pub tau: f64,
    pub k: usize,
    pub gammas: Vec<f64>,
    pub duals: Vec<Vec<Vec<f64>>>,
    pub kernel_spec: KernelSpec,
    pub train_view_paths: Vec<String>,
}

impl PwcaModel {
    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            method: self.method,
            s: self.s(),
            l: self.l(),
            tau: self.tau,
            k: self.k(),
            gammas: self.gammas.clone(),
            duals: self
                .duals
                .iter()
                .map(|d| (0..d.cols()).map(|j| d.column(j)).collect())
                .collect(),
            kernel_spec: self.kernel_spec,
            train_view_paths: self.train_view_paths.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.to_document())?;
        s.push('\n');
        Ok(s)
    }

    /// Rebuilds a model from a document and the training views it names.
    pub fn from_document(doc: ModelDocument, train_views: Vec<ViewMatrix>) -> Result<Self> {
        if doc.s != doc.duals.len() || doc.k != doc.gammas.len() {
            return Err(Error::dims("model header disagrees with its arrays"));
        }
        let mut duals = Vec::with_capacity(doc.s);
        for (v, cols) in doc.duals.iter().enumerate() {
            if cols.len() != doc.k {
                return Err(Error::dims(format!("view {v} has {} components", cols.len())));
            }
            let mut m = Matrix::zeros(doc.l, doc.k);
            for (j, col) in cols.iter().enumerate() {
                if col.len() != doc.l {
                    return Err(Error::dims(format!(
                        "view {v} component {j} has {} coefficients, expected {}",
                        col.len(),
                        doc.l
                    )));
                }
                for (i, x) in col.iter().enumerate() {
                    m[(i, j)] = *x;
                }
            }
            duals.push(m);
        }
        Ok(Self::from_parts(doc.method, doc.tau, doc.kernel_spec, doc.gammas, duals, train_views)?
            .with_train_view_paths(doc.train_view_paths))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    /// Loads a model file and its training views. Relative view paths are
    /// tried against the model file's directory first, then as given.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: ModelDocument = serde_json::from_str(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let views = doc
            .train_view_paths
            .iter()
            .map(|p| dataio::load_view(resolve(&base, p)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_document(doc, views)
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let candidate = Path::new(p);
    if candidate.is_absolute() || candidate.exists() {
        return candidate.to_path_buf();
    }
    base.join(candidate)
}
