//! Aligned multi-view datasets: view files, manifests, the synthetic
//! generator, train/test splits and TF-IDF weighting.
//!
//! # View file format
//!
//! ```text
//! %%PWCA-VIEW <rows> <cols> <nnz>
//! <row> <col> <value>      (nnz lines, 0-based, any order, no duplicates)
//! ```
//!
//! Values are written with 17 significant digits, so a save/load cycle
//! reproduces every entry exactly.
//!
//! # Synthetic generator
//!
//! Every random number comes from ChaCha8 (`rand_chacha::ChaCha8Rng`,
//! seeded with `seed_from_u64`). A draw `u64` becomes a uniform on the open
//! interval `(0, 1)` as `((x >> 11) + 0.5) · 2⁻⁵³`, and a standard normal by
//! the inverse CDF of Wichura's AS241 (PPND16). Streams:
//!
//! * latent rows: `seed`, stream 0, row-major `ℓ x p`;
//! * noise of view `v`: `seed`, stream `v + 1`, row-major `ℓ x d_v`;
//! * map of view `v`: `map_seed_v`, stream 0, row-major `d_v x p` normals,
//!   then modified Gram-Schmidt (two passes) on the columns.
//!
//! `map_seed_v` defaults to `seed ^ (0x9E3779B97F4A7C15 · (v + 1))`
//! (wrapping multiply). The split shuffle is Fisher-Yates from the last
//! index down, drawing `j = ⌊u · (i + 1)⌋` from ChaCha8 seeded with the
//! split seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::ViewMatrix;
use crate::linalg::{dot, Matrix};

const HEADER: &str = "%%PWCA-VIEW";
const MAP_SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

/// Parses a view file.
pub fn load_view(path: impl AsRef<Path>) -> Result<ViewMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_view(&text)
}

/// Parses view-file text.
pub fn parse_view(text: &str) -> Result<ViewMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (line_no, header) = lines
        .find(|(_, l)| !l.is_empty())
        .ok_or(Error::Parse { line: 1, message: "missing header".into() })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != HEADER {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected `{HEADER} <rows> <cols> <nnz>`"),
        });
    }
    let parse_count = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid count {s:?}"),
        })
    };
    let (rows, cols, nnz) = (parse_count(fields[1])?, parse_count(fields[2])?, parse_count(fields[3])?);
    if rows == 0 || cols == 0 {
        return Err(Error::dims(format!("view must be nonempty, header says {rows}x{cols}")));
    }
    let mut m = Matrix::zeros(rows, cols);
    let mut seen = vec![false; rows * cols];
    let mut count = 0usize;
    for (line, l) in lines {
        if l.is_empty() {
            continue;
        }
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse { line, message: "expected `<row> <col> <value>`".into() });
        }
        let bad = |what: &str| Error::Parse { line, message: format!("invalid {what}") };
        let r: usize = parts[0].parse().map_err(|_| bad("row index"))?;
        let c: usize = parts[1].parse().map_err(|_| bad("column index"))?;
        let v: f64 = parts[2].parse().map_err(|_| bad("value"))?;
        if !v.is_finite() {
            return Err(bad("value"));
        }
        if r >= rows || c >= cols {
            return Err(Error::dims(format!(
                "line {line}: entry ({r}, {c}) outside a {rows}x{cols} view"
            )));
        }
        if std::mem::replace(&mut seen[r * cols + c], true) {
            return Err(Error::Parse { line, message: format!("duplicate entry ({r}, {c})") });
        }
        m[(r, c)] = v;
        count += 1;
    }
    if count != nnz {
        return Err(Error::Parse {
            line: line_no,
            message: format!("header declares {nnz} entries, found {count}"),
        });
    }
    ViewMatrix::new(m)
}

/// Serializes the nonzero entries of a view, row-major.
pub fn format_view(x: &ViewMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER} {} {} {}", x.rows(), x.cols(), x.nnz());
    for i in 0..x.rows() {
        for (j, v) in x.row(i).iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "{i} {j} {v:.16e}");
            }
        }
    }
    out
}

pub fn save_view(x: &ViewMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_view(x)).map_err(|e| Error::io(path, e))
}

/// Views sharing a row index: row `i` of every view is one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDataset {
    pub views: Vec<ViewMatrix>,
    pub names: Vec<String>,
    /// Files the views were read from, if any.
    pub paths: Vec<String>,
    /// Generator seed, for synthetic data.
    pub seed: Option<u64>,
}

impl AlignedDataset {
    pub fn new(views: Vec<ViewMatrix>, names: Vec<String>) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::EmptyInput("dataset has no views".into()));
        }
        if names.len() != views.len() {
            return Err(Error::dims(format!("{} names for {} views", names.len(), views.len())));
        }
        let l = views[0].rows();
        if let Some(v) = views.iter().position(|x| x.rows() != l) {
            return Err(Error::dims(format!(
                "view {v} has {} rows, view 0 has {l}",
                views[v].rows()
            )));
        }
        Ok(Self { views, names, paths: Vec::new(), seed: None })
    }

    /// Number of aligned observations.
    pub fn len(&self) -> usize {
        self.views[0].rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn s(&self) -> usize {
        self.views.len()
    }

    fn select(&self, indices: &[usize]) -> Result<Self> {
        let views = self
            .views
            .iter()
            .map(|v| v.select_rows(indices))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { views, names: self.names.clone(), paths: Vec::new(), seed: self.seed })
    }

    /// Writes `<name>.mtx` for every view plus `manifest.json` into `dir`,
    /// creating it if needed. Returns the manifest path.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = Vec::with_capacity(self.s());
        for (view, name) in self.views.iter().zip(&self.names) {
            let file = format!("{name}.mtx");
            save_view(view, dir.join(&file))?;
            files.push(file);
        }
        let manifest = Manifest { views: files, names: self.names.clone(), seed: self.seed };
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Reads a manifest and the views it lists. Relative view paths are
    /// resolved against the manifest's directory.
    pub fn load(manifest: impl AsRef<Path>) -> Result<Self> {
        let manifest = manifest.as_ref();
        let text = std::fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        let base = manifest.parent().unwrap_or(Path::new(""));
        let paths: Vec<PathBuf> = m.views.iter().map(|p| base.join(p)).collect();
        let views = paths.iter().map(load_view).collect::<Result<Vec<_>>>()?;
        let mut ds = Self::new(views, m.names)?;
        ds.paths = paths.iter().map(|p| p.display().to_string()).collect();
        ds.seed = m.seed;
        Ok(ds)
    }
}

/// Dataset manifest file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub views: Vec<String>,
    pub names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Parameters of the synthetic aligned corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    /// Number of aligned samples.
    pub l_total: usize,
    /// Latent dimension `p`.
    pub latent_dim: usize,
    /// Feature dimension of each view; its length is the number of views.
    pub dims: Vec<usize>,
    /// Noise standard deviation.
    pub sigma: f64,
    pub seed: u64,
    /// Per-view map seeds; derived from `seed` when absent.
    #[serde(default)]
    pub map_seeds: Option<Vec<u64>>,
}

impl SyntheticConfig {
    pub fn new(l_total: usize, latent_dim: usize, dims: Vec<usize>, sigma: f64, seed: u64) -> Self {
        Self { l_total, latent_dim, dims, sigma, seed, map_seeds: None }
    }

    pub fn with_map_seeds(mut self, seeds: Vec<u64>) -> Self {
        self.map_seeds = Some(seeds);
        self
    }

    pub fn s(&self) -> usize {
        self.dims.len()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.dims.len() < 2 {
            return fail(format!("need at least two views, got {}", self.dims.len()));
        }
        if self.l_total == 0 || self.latent_dim == 0 {
            return fail("sample count and latent dimension must be positive".into());
        }
        let min_d = *self.dims.iter().min().unwrap_or(&0);
        if self.latent_dim > min_d {
            return fail(format!(
                "latent dimension {} exceeds smallest view dimension {min_d}",
                self.latent_dim
            ));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return fail(format!("noise level must be finite and >= 0, got {}", self.sigma));
        }
        if let Some(seeds) = &self.map_seeds {
            if seeds.len() != self.dims.len() {
                return fail(format!("{} map seeds for {} views", seeds.len(), self.dims.len()));
            }
        }
        Ok(())
    }

    pub fn map_seed(&self, v: usize) -> u64 {
        match &self.map_seeds {
            Some(s) => s[v],
            None => self.seed ^ MAP_SEED_MIX.wrapping_mul(v as u64 + 1),
        }
    }
}

/// Uniform and normal variates from ChaCha8 with a pinned conversion.
#[derive(Debug, Clone)]
pub struct PinnedRng(ChaCha8Rng);

impl PinnedRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(stream);
        Self(r)
    }

    /// Uniform on `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }
}

/// Standard normal quantile, Wichura's AS241 (PPND16); relative accuracy
/// about 1e-16 on `(0, 1)`. Coefficients are the published ones, digit for
/// digit.
#[allow(clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                + 67265.770927008700853)
                * r
                + 45921.953931549871457)
                * r
                + 13731.693765509461125)
                * r
                + 1971.5909503065514427)
                * r
                + 133.14166789178437745)
                * r
                + 3.387132872796366608)
            / (((((((5226.495278852545925 * r + 28729.085735721942674) * r
                + 39307.89580009271061)
                * r
                + 21213.794301586595867)
                * r
                + 5394.1960214247511077)
                * r
                + 687.1870074920579083)
                * r
                + 42.313330701600911252)
                * r
                + 1.0);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
            + 0.24178072517745061177)
            * r
            + 1.27045825245236838258)
            * r
            + 3.64784832476320460504)
            * r
            + 5.7694972214606914055)
            * r
            + 4.6303378461565452959)
            * r
            + 1.42343711074968357734)
            / (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                + 0.0151986665636164571966)
                * r
                + 0.14810397642748007459)
                * r
                + 0.68976733498510000455)
                * r
                + 1.6763848301838038494)
                * r
                + 2.05319162663775882187)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
            + 0.0012426609473880784386)
            * r
            + 0.026532189526576123093)
            * r
            + 0.29656057182850489123)
            * r
            + 1.7848265399172913358)
            * r
            + 5.4637849111641143699)
            * r
            + 6.6579046435011037772)
            / (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                + 1.8463183175100546818e-5)
                * r
                + 7.868691311456132591e-4)
                * r
                + 0.0148753612908506148525)
                * r
                + 0.13692988092273580531)
                * r
                + 0.59983220655588793769)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// `d x p` matrix with orthonormal columns.
fn orthonormal_map(d: usize, p: usize, seed: u64) -> Matrix {
    let mut rng = PinnedRng::new(seed, 0);
    let g = Matrix::from_fn(d, p, |_, _| rng.normal());
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| g.column(j)).collect();
    for j in 0..p {
        for _ in 0..2 {
            for i in 0..j {
                let c = dot(&cols[i], &cols[j]);
                let (head, tail) = cols.split_at_mut(j);
                for (t, h) in tail[0].iter_mut().zip(&head[i]) {
                    *t -= c * h;
                }
            }
        }
        let n = dot(&cols[j], &cols[j]).sqrt();
        cols[j].iter_mut().for_each(|x| *x /= n);
    }
    Matrix::from_fn(d, p, |r, c| cols[c][r])
}

/// Generates the synthetic corpus: view `v` row `i` is `M_v t_i + σ ε`.
pub fn synth_generate(cfg: &SyntheticConfig) -> Result<AlignedDataset> {
    cfg.validate()?;
    let (l, p) = (cfg.l_total, cfg.latent_dim);
    let mut latent_rng = PinnedRng::new(cfg.seed, 0);
    let t = Matrix::from_fn(l, p, |_, _| latent_rng.normal());
    let mut views = Vec::with_capacity(cfg.s());
    for (v, &d) in cfg.dims.iter().enumerate() {
        let m = orthonormal_map(d, p, cfg.map_seed(v));
        let mut x = t.matmul(&m.transpose())?;
        if cfg.sigma > 0.0 {
            let mut noise = PinnedRng::new(cfg.seed, v as u64 + 1);
            for e in x.as_mut_slice() {
                *e += cfg.sigma * noise.normal();
            }
        }
        views.push(ViewMatrix::new(x)?);
    }
    let names = (0..cfg.s()).map(|v| format!("view{v}")).collect();
    let mut ds = AlignedDataset::new(views, names)?;
    ds.seed = Some(cfg.seed);
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

/// Seeded permutation of `0..n` (Fisher-Yates, see module docs).
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = PinnedRng::new(seed, 0);
    for i in (1..n).rev() {
        let j = ((rng.uniform() * (i + 1) as f64) as usize).min(i);
        idx.swap(i, j);
    }
    idx
}

/// Splits rows by a seeded permutation: the first `n_train` permuted rows
/// train, the next `n_test` test. All views use the same rows.
pub fn split(ds: &AlignedDataset, spec: &SplitSpec) -> Result<(AlignedDataset, AlignedDataset)> {
    if spec.n_train == 0 || spec.n_test == 0 {
        return Err(Error::InvalidSplit("both parts must be nonempty".into()));
    }
    if spec.n_train + spec.n_test > ds.len() {
        return Err(Error::InvalidSplit(format!(
            "{} + {} rows requested from {}",
            spec.n_train,
            spec.n_test,
            ds.len()
        )));
    }
    let perm = permutation(ds.len(), spec.seed);
    let train = ds.select(&perm[..spec.n_train])?;
    let test = ds.select(&perm[spec.n_train..spec.n_train + spec.n_test])?;
    Ok((train, test))
}

/// `tf · ln(ℓ / (1 + df))`, negative weights clamped to zero.
pub fn tfidf(x: &ViewMatrix) -> Result<ViewMatrix> {
    let (l, d) = (x.rows(), x.cols());
    let mut df = vec![0usize; d];
    for i in 0..l {
        for (j, &v) in x.row(i).iter().enumerate() {
            if v < 0.0 {
                return Err(Error::NegativeEntry { row: i, col: j, value: v });
            }
            if v > 0.0 {
                df[j] += 1;
            }
        }
    }
    let idf: Vec<f64> = df.iter().map(|&c| (l as f64 / (1.0 + c as f64)).ln().max(0.0)).collect();
    ViewMatrix::new(Matrix::from_fn(l, d, |i, j| x.row(i)[j] * idf[j]))
}
