//! Turns a problem file into a [`Problem`].

use std::fs;
use std::path::{Path, PathBuf};

use cdsolve::model::{AtomList, DgInput, MatrixInput};
use cdsolve::{AtomCatalog, Problem, ProblemBuilder, SolverOptions};

use crate::error::LoadError;
use crate::readers::{self, Triplets};
use crate::spec::{
    AtomsSpec, LabelUse, MatrixFormat, MatrixItem, MatrixSource, MatrixSpec, SeparableSection, SpecFile,
    TermSection, VectorSpec,
};

/// Problem and solver options read from one file.
#[derive(Clone, Debug)]
pub struct LoadedSpec {
    pub problem: Problem<f64>,
    pub options: SolverOptions,
}

pub fn load_problem(path: &Path) -> Result<Problem<f64>, LoadError> {
    load_spec(path).map(|s| s.problem)
}

/// Reads the file at `path`; data files are resolved relative to its directory.
pub fn load_spec(path: &Path) -> Result<LoadedSpec, LoadError> {
    let text = fs::read_to_string(path).map_err(|e| LoadError::file(path, "<command line>", e))?;
    let base = path.parent().map_or_else(PathBuf::new, Path::to_path_buf);
    parse_spec(&text, path, &base)
}

/// Parses spec text. `origin` is only used in messages.
pub fn parse_spec(text: &str, origin: &Path, base: &Path) -> Result<LoadedSpec, LoadError> {
    let spec: SpecFile = toml::from_str(text).map_err(|e| LoadError::schema(origin, e.to_string()))?;
    let ctx = Ctx {
        base,
        origin,
        catalog: AtomCatalog::standard(),
    };
    let problem = ctx.build(&spec)?;
    Ok(LoadedSpec {
        problem,
        options: spec.options,
    })
}

struct Ctx<'a> {
    base: &'a Path,
    origin: &'a Path,
    catalog: AtomCatalog<f64>,
}

/// Assembled `Σ c_j f_j(A_j x − b_j)` inputs.
struct TermParts {
    names: Vec<String>,
    weights: Option<Vec<f64>>,
    matrix: Triplets,
    offset: Option<Vec<f64>>,
    blocks: Option<Vec<usize>>,
}

impl Ctx<'_> {
    fn path(&self, rel: &str) -> PathBuf {
        self.base.join(rel)
    }

    fn build(&self, spec: &SpecFile) -> Result<Problem<f64>, LoadError> {
        let n = spec.problem.n;
        let mut b = ProblemBuilder::<f64>::new(n);
        let n_blocks = match &spec.problem.blocks {
            Some(bl) => {
                b = b.blocks(bl.clone());
                bl.len().saturating_sub(1)
            }
            None => n,
        };
        if let Some(x0) = &spec.problem.x_init {
            b = b.x_init(self.vector(x0, "problem.x_init", Some(n))?);
        }
        if let Some(y0) = &spec.problem.y_init {
            if matches!(y0, VectorSpec::Constant(_)) {
                return Err(LoadError::schema(self.origin, "problem.y_init must be a list or a file"));
            }
            b = b.y_init(self.vector(y0, "problem.y_init", None)?);
        }
        if let Some(f) = &spec.f {
            let t = self.term(f, "f", n)?;
            b = b.f(AtomList::Names(t.names)).af(triplets_input(t.matrix));
            if let Some(w) = t.weights {
                b = b.cf(w);
            }
            if let Some(o) = t.offset {
                b = b.bf(o);
            }
            if let Some(bl) = t.blocks {
                b = b.blocks_f(bl);
            }
        }
        if let Some(h) = &spec.h {
            let t = self.term(h, "h", n)?;
            b = b.h(AtomList::Names(t.names)).ah(triplets_input(t.matrix));
            if let Some(w) = t.weights {
                b = b.ch(w);
            }
            if let Some(o) = t.offset {
                b = b.bh(o);
            }
            if let Some(bl) = t.blocks {
                b = b.blocks_h(bl);
            }
        }
        if let Some(g) = &spec.g {
            b = self.separable(b, g, n, n_blocks)?;
        }
        if let Some(q) = &spec.q {
            let (m, _) = self.matrix(&q.matrix, "q.matrix", n)?;
            if m.n_rows != n {
                return Err(LoadError::dim("q.matrix", format!("{} rows, expected N = {n}", m.n_rows)));
            }
            b = b.q(triplets_input(m));
        }
        Ok(b.build()?)
    }

    fn term(&self, t: &TermSection, name: &str, n: usize) -> Result<TermParts, LoadError> {
        let key = format!("{name}.matrix");
        let (matrix, labels) = self.matrix(&t.matrix, &key, n)?;
        let rows = matrix.n_rows;
        if let Some(r) = t.rows {
            if r != rows {
                return Err(LoadError::dim(&key, format!("{rows} rows, but `{name}.rows` declares {r}")));
            }
        }
        let count = match &t.blocks {
            Some(bl) => bl.len().saturating_sub(1),
            None => rows,
        };
        let names = self.atoms(&t.atoms, &format!("{name}.atoms"), count)?;
        let weights = t
            .weights
            .as_ref()
            .map(|w| self.vector(w, &format!("{name}.weights"), Some(count)))
            .transpose()?;
        let offset = match &t.offset {
            Some(o) => Some(self.vector(o, &format!("{name}.offset"), Some(rows))?),
            None => labels,
        };
        Ok(TermParts {
            names,
            weights,
            matrix,
            offset,
            blocks: t.blocks.clone(),
        })
    }

    fn separable(
        &self,
        mut b: ProblemBuilder<f64>,
        g: &SeparableSection,
        n: usize,
        n_blocks: usize,
    ) -> Result<ProblemBuilder<f64>, LoadError> {
        b = b.g(AtomList::Names(self.atoms(&g.atoms, "g.atoms", n_blocks)?));
        if let Some(w) = &g.weights {
            b = b.cg(self.vector(w, "g.weights", Some(n_blocks))?);
        }
        if let Some(o) = &g.offset {
            b = b.bg(self.vector(o, "g.offset", Some(n))?);
        }
        if let Some(s) = &g.scale {
            let d = match s {
                VectorSpec::Constant(_) => DgInput::PerBlock(self.vector(s, "g.scale", Some(n_blocks))?),
                _ => {
                    let v = self.vector(s, "g.scale", None)?;
                    if v.len() == n_blocks {
                        DgInput::PerBlock(v)
                    } else if v.len() == n {
                        DgInput::Diagonal(v)
                    } else {
                        return Err(LoadError::dim(
                            "g.scale",
                            format!("{} values, expected {n_blocks} (blocks) or {n} (coordinates)", v.len()),
                        ));
                    }
                }
            };
            b = b.dg(d);
        }
        Ok(b)
    }

    fn atoms(&self, spec: &AtomsSpec, key: &str, count: usize) -> Result<Vec<String>, LoadError> {
        let names = match spec {
            AtomsSpec::One(s) => vec![s.clone(); count],
            AtomsSpec::Each(v) => {
                if v.len() != count {
                    return Err(LoadError::dim(key, format!("{} atoms for {count} blocks", v.len())));
                }
                v.clone()
            }
        };
        for (k, name) in names.iter().enumerate() {
            if let Err(source) = self.catalog.get(name) {
                let key = match spec {
                    AtomsSpec::One(_) => key.to_string(),
                    AtomsSpec::Each(_) => format!("{key}[{k}]"),
                };
                return Err(LoadError::UnknownAtom { key, source });
            }
        }
        Ok(names)
    }

    fn vector(&self, spec: &VectorSpec, key: &str, len: Option<usize>) -> Result<Vec<f64>, LoadError> {
        let v = match spec {
            VectorSpec::Constant(c) => {
                let Some(len) = len else {
                    return Err(LoadError::schema(self.origin, format!("`{key}` must be a list or a file")));
                };
                return Ok(vec![*c; len]);
            }
            VectorSpec::List(v) => v.clone(),
            VectorSpec::File(f) => readers::read_vector(&self.path(f), key)?,
        };
        if let Some(len) = len {
            if v.len() != len {
                return Err(LoadError::dim(key, format!("{} values, expected {len}", v.len())));
            }
        }
        Ok(v)
    }

    /// Stacked matrix with `n` columns, and label offsets when any part
    /// supplies them (zeros for the other rows).
    fn matrix(&self, spec: &MatrixSpec, key: &str, n: usize) -> Result<(Triplets, Option<Vec<f64>>), LoadError> {
        let items = spec.items();
        let mut parts = Vec::with_capacity(items.len());
        let mut offsets: Vec<Option<Vec<f64>>> = Vec::with_capacity(items.len());
        for (k, item) in items.iter().enumerate() {
            let key = match spec {
                MatrixSpec::One(_) => key.to_string(),
                MatrixSpec::Stack(_) => format!("{key}[{k}]"),
            };
            let (m, labels) = self.matrix_item(item, &key, n)?;
            if m.n_cols != n {
                return Err(LoadError::dim(&key, format!("{} columns, expected N = {n}", m.n_cols)));
            }
            offsets.push(labels);
            parts.push(m);
        }
        let offset = if offsets.iter().any(Option::is_some) {
            Some(
                offsets
                    .into_iter()
                    .zip(&parts)
                    .flat_map(|(o, m)| o.unwrap_or_else(|| vec![0.0; m.n_rows]))
                    .collect(),
            )
        } else {
            None
        };
        Ok((Triplets::vstack(parts), offset))
    }

    fn matrix_item(&self, item: &MatrixItem, key: &str, n: usize) -> Result<(Triplets, Option<Vec<f64>>), LoadError> {
        let default;
        let src = match item {
            MatrixItem::Path(p) => {
                default = MatrixSource {
                    file: Some(p.clone()),
                    ..MatrixSource::default()
                };
                &default
            }
            MatrixItem::Source(s) => s,
        };
        let given = [src.file.is_some(), src.dense.is_some(), src.identity.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(LoadError::schema(
                self.origin,
                format!("`{key}` needs exactly one of `file`, `dense` or `identity`"),
            ));
        }
        let mut labels = None;
        let mut m = if let Some(rows) = &src.dense {
            Triplets::from_dense(rows).map_err(|msg| LoadError::dim(key, msg))?
        } else if let Some(size) = src.identity {
            Triplets::identity(size)
        } else {
            let file = src.file.as_deref().unwrap_or_default();
            let path = self.path(file);
            let format = match src.format {
                Some(f) => f,
                None => path
                    .extension()
                    .and_then(|e| e.to_str())
                    .and_then(MatrixFormat::from_extension)
                    .ok_or_else(|| {
                        LoadError::schema(
                            self.origin,
                            format!("`{key}`: cannot infer the format of `{file}`; set `format`"),
                        )
                    })?,
            };
            if format != MatrixFormat::Libsvm && (src.labels.is_some() || src.cols.is_some() || src.zero_based) {
                return Err(LoadError::schema(
                    self.origin,
                    format!("`{key}`: `labels`, `cols` and `zero_based` only apply to libsvm files"),
                ));
            }
            match format {
                MatrixFormat::Mtx => readers::read_matrix_market(&path, key)?,
                MatrixFormat::Csv => readers::read_csv_matrix(&path, key)?,
                MatrixFormat::Libsvm => {
                    let data = readers::read_libsvm(&path, key, src.zero_based)?;
                    let mut m = data.matrix;
                    let width = match src.cols {
                        Some(c) => c,
                        // feature count of an untransposed data matrix is N
                        None if !src.transpose => n.max(m.n_cols),
                        None => m.n_cols,
                    };
                    if m.n_cols > width {
                        return Err(LoadError::dim(key, format!("feature index {} exceeds `cols` = {width}", m.n_cols)));
                    }
                    m.n_cols = width;
                    let use_ = src.labels.unwrap_or(if src.transpose {
                        LabelUse::Ignore
                    } else {
                        LabelUse::Offset
                    });
                    match use_ {
                        LabelUse::Offset if src.transpose => {
                            return Err(LoadError::schema(
                                self.origin,
                                format!("`{key}`: labels cannot be used as offsets of a transposed matrix"),
                            ));
                        }
                        LabelUse::Offset => labels = Some(data.labels),
                        LabelUse::ScaleRows => scale_rows(&mut m, &data.labels, 1.0),
                        LabelUse::NegScaleRows => scale_rows(&mut m, &data.labels, -1.0),
                        LabelUse::Ignore => {}
                    }
                    m
                }
            }
        };
        if let Some(s) = src.scale {
            for e in &mut m.entries {
                e.2 *= s;
            }
        }
        if src.transpose {
            m = m.transpose();
        }
        Ok((m, labels))
    }
}

fn scale_rows(m: &mut Triplets, labels: &[f64], sign: f64) {
    for e in &mut m.entries {
        e.2 *= sign * labels[e.0];
    }
}

fn triplets_input(m: Triplets) -> MatrixInput<f64> {
    MatrixInput::Triplets {
        n_rows: m.n_rows,
        n_cols: m.n_cols,
        entries: m.entries,
    }
}
