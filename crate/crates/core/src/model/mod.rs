//! Problem description.
//!
//! A [`Problem`] minimizes
//!
//! ```text
//! ½ xᵀQx + Σ_j cf_j f_j(Af_j x − bf_j) + Σ_i cg_i g_i(Dg_i x⁽ⁱ⁾ − bg_i) + Σ_l ch_l h_l(Ah_l x − bh_l)
//! ```
//!
//! over `x ∈ ℝᴺ`, where `x⁽ⁱ⁾` are the primal blocks, `Af_j` and `Ah_l` the row
//! blocks of the stacked matrices and `Dg_i` a positive multiple of the identity.

mod blocks;
mod duplication;
mod sparse;

pub use blocks::BlockStructure;
pub use duplication::DualDuplicationIndex;
pub use sparse::{BlockEntry, CscMatrix};

use thiserror::Error;

use crate::atoms::{AtomCatalog, AtomError, AtomRef, DimPolicy};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Dg must be a constant multiple of the identity on each block; block {block} has values {first} and {other}")]
    NonUniformDg { block: usize, first: f64, other: f64 },
    #[error("Dg must be diagonal; found off-diagonal entry at ({row}, {col})")]
    NonDiagonalDg { row: usize, col: usize },
    #[error("Dg must be nonzero; block {0} has a zero scaling")]
    ZeroDg(usize),
    #[error(transparent)]
    UnknownAtom(AtomError),
    #[error("weight {name}[{index}] = {value} must be positive")]
    NonPositiveWeight {
        name: &'static str,
        index: usize,
        value: f64,
    },
    #[error("invalid block structure: {0}")]
    InvalidBlocks(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("{term} atoms are given but {matrix} is missing")]
    MissingMatrix {
        term: &'static str,
        matrix: &'static str,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Matrix given in any accepted layout.
#[derive(Clone, Debug)]
pub enum MatrixInput<T> {
    /// Row-major dense rows.
    Dense(Vec<Vec<T>>),
    /// Coordinate triplets `(row, col, value)`; duplicates are summed.
    Triplets {
        n_rows: usize,
        n_cols: usize,
        entries: Vec<(usize, usize, T)>,
    },
    Csc(CscMatrix<T>),
}

impl<T: Scalar> MatrixInput<T> {
    fn into_csc(self, n_cols_hint: usize) -> Result<CscMatrix<T>, ModelError> {
        match self {
            MatrixInput::Dense(rows) => {
                let n_cols = rows.first().map_or(n_cols_hint, Vec::len);
                CscMatrix::from_dense(rows.len(), n_cols, &rows)
            }
            MatrixInput::Triplets {
                n_rows,
                n_cols,
                entries,
            } => CscMatrix::from_triplets(n_rows, n_cols, &entries),
            MatrixInput::Csc(m) => Ok(m),
        }
    }
}

impl<T> From<CscMatrix<T>> for MatrixInput<T> {
    fn from(m: CscMatrix<T>) -> Self {
        MatrixInput::Csc(m)
    }
}

impl<T> From<Vec<Vec<T>>> for MatrixInput<T> {
    fn from(rows: Vec<Vec<T>>) -> Self {
        MatrixInput::Dense(rows)
    }
}

/// Scaling of the separable term.
#[derive(Clone, Debug)]
pub enum DgInput<T> {
    /// One value per primal block.
    PerBlock(Vec<T>),
    /// One value per coordinate, constant within each block.
    Diagonal(Vec<T>),
    /// Full `N × N` matrix, required to be diagonal and blockwise constant.
    Matrix(MatrixInput<T>),
}

/// Atoms given by name (resolved through a catalog) or directly.
#[derive(Clone, Debug)]
pub enum AtomList<T: Scalar> {
    Names(Vec<String>),
    Atoms(Vec<AtomRef<T>>),
}

impl<T: Scalar> AtomList<T> {
    fn resolve(self, catalog: &AtomCatalog<T>) -> Result<Vec<AtomRef<T>>, ModelError> {
        match self {
            AtomList::Names(names) => names
                .iter()
                .map(|n| catalog.get(n).map_err(ModelError::UnknownAtom))
                .collect(),
            AtomList::Atoms(a) => Ok(a),
        }
    }
}

impl<T: Scalar, S: Into<String>> From<Vec<S>> for AtomList<T> {
    fn from(v: Vec<S>) -> Self {
        AtomList::Names(v.into_iter().map(Into::into).collect())
    }
}

impl<T: Scalar, S: Into<String> + Clone> From<&[S]> for AtomList<T> {
    fn from(v: &[S]) -> Self {
        AtomList::Names(v.iter().cloned().map(Into::into).collect())
    }
}

/// One composite term: atoms, weights, matrix, offsets and row blocks.
#[derive(Clone, Debug)]
pub struct Term<T: Scalar> {
    pub atoms: Vec<AtomRef<T>>,
    pub weights: Vec<T>,
    pub matrix: CscMatrix<T>,
    pub offset: Vec<T>,
    pub blocks: BlockStructure,
}

impl<T: Scalar> Term<T> {
    fn empty(n: usize) -> Self {
        Self {
            atoms: Vec::new(),
            weights: Vec::new(),
            matrix: CscMatrix::zeros(0, n),
            offset: Vec::new(),
            blocks: BlockStructure::scalar(0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// Number of rows.
    pub fn dim(&self) -> usize {
        self.matrix.n_rows()
    }
}

/// Validated, immutable problem.
#[derive(Clone, Debug)]
pub struct Problem<T: Scalar> {
    n: usize,
    blocks: BlockStructure,
    f: Term<T>,
    h: Term<T>,
    g_atoms: Vec<AtomRef<T>>,
    cg: Vec<T>,
    bg: Vec<T>,
    dg: Vec<T>,
    q: Option<CscMatrix<T>>,
    x_init: Vec<T>,
    y_init: Option<Vec<T>>,
    dup: DualDuplicationIndex,
}

impl<T: Scalar> Problem<T> {
    pub fn builder(n: usize) -> ProblemBuilder<T> {
        ProblemBuilder::new(n)
    }

    /// Primal dimension `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    /// Number of primal blocks `I`.
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn f(&self) -> &Term<T> {
        &self.f
    }

    pub fn h(&self) -> &Term<T> {
        &self.h
    }

    pub fn has_h(&self) -> bool {
        !self.h.is_empty()
    }

    pub fn g_atoms(&self) -> &[AtomRef<T>] {
        &self.g_atoms
    }

    pub fn has_g(&self) -> bool {
        !self.g_atoms.is_empty()
    }

    pub fn cg(&self) -> &[T] {
        &self.cg
    }

    pub fn bg(&self) -> &[T] {
        &self.bg
    }

    /// Per-block scaling of the separable term.
    pub fn dg(&self) -> &[T] {
        &self.dg
    }

    pub fn q(&self) -> Option<&CscMatrix<T>> {
        self.q.as_ref()
    }

    pub fn x_init(&self) -> &[T] {
        &self.x_init
    }

    pub fn y_init(&self) -> Option<&[T]> {
        self.y_init.as_deref()
    }

    pub fn duplication(&self) -> &DualDuplicationIndex {
        &self.dup
    }
}

/// Assembles a [`Problem`]. Every part is optional except the dimension.
#[derive(Clone, Debug)]
pub struct ProblemBuilder<T: Scalar> {
    n: usize,
    blocks: Option<Vec<usize>>,
    catalog: Option<AtomCatalog<T>>,
    f: Option<AtomList<T>>,
    cf: Option<Vec<T>>,
    af: Option<MatrixInput<T>>,
    bf: Option<Vec<T>>,
    blocks_f: Option<Vec<usize>>,
    g: Option<AtomList<T>>,
    cg: Option<Vec<T>>,
    dg: Option<DgInput<T>>,
    bg: Option<Vec<T>>,
    h: Option<AtomList<T>>,
    ch: Option<Vec<T>>,
    ah: Option<MatrixInput<T>>,
    bh: Option<Vec<T>>,
    blocks_h: Option<Vec<usize>>,
    q: Option<MatrixInput<T>>,
    x_init: Option<Vec<T>>,
    y_init: Option<Vec<T>>,
}

macro_rules! setter {
    ($(#[$m:meta])* $name:ident: $ty:ty) => {
        $(#[$m])*
        pub fn $name(mut self, v: impl Into<$ty>) -> Self {
            self.$name = Some(v.into());
            self
        }
    };
}

impl<T: Scalar> ProblemBuilder<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            blocks: None,
            catalog: None,
            f: None,
            cf: None,
            af: None,
            bf: None,
            blocks_f: None,
            g: None,
            cg: None,
            dg: None,
            bg: None,
            h: None,
            ch: None,
            ah: None,
            bh: None,
            blocks_h: None,
            q: None,
            x_init: None,
            y_init: None,
        }
    }

    setter!(/// Primal block boundaries, `[0, …, N]`.
        blocks: Vec<usize>);
    setter!(/// Catalog used to resolve atom names; the standard one by default.
        catalog: AtomCatalog<T>);
    setter!(f: AtomList<T>);
    setter!(cf: Vec<T>);
    setter!(af: MatrixInput<T>);
    setter!(bf: Vec<T>);
    setter!(blocks_f: Vec<usize>);
    setter!(g: AtomList<T>);
    setter!(cg: Vec<T>);
    setter!(dg: DgInput<T>);
    setter!(bg: Vec<T>);
    setter!(h: AtomList<T>);
    setter!(ch: Vec<T>);
    setter!(ah: MatrixInput<T>);
    setter!(bh: Vec<T>);
    setter!(blocks_h: Vec<usize>);
    setter!(/// Quadratic term; symmetrized on ingestion.
        q: MatrixInput<T>);
    setter!(x_init: Vec<T>);
    setter!(/// Initial duplicated dual vector.
        y_init: Vec<T>);

    pub fn build(self) -> Result<Problem<T>, ModelError> {
        let n = self.n;
        let catalog = self.catalog.unwrap_or_default();
        let blocks = match self.blocks {
            Some(b) => {
                let b = BlockStructure::new(b)?;
                if b.dim() != n {
                    return Err(ModelError::InvalidBlocks(format!(
                        "blocks end at {} but N = {n}",
                        b.dim()
                    )));
                }
                b
            }
            None => BlockStructure::scalar(n),
        };

        let f = build_term(
            "f",
            "Af",
            n,
            self.f,
            self.cf,
            self.af,
            self.bf,
            self.blocks_f,
            &catalog,
        )?;
        let h = build_term(
            "h",
            "Ah",
            n,
            self.h,
            self.ch,
            self.ah,
            self.bh,
            self.blocks_h,
            &catalog,
        )?;

        let g_atoms = match self.g {
            Some(g) => g.resolve(&catalog)?,
            None => Vec::new(),
        };
        let n_blocks = blocks.len();
        let has_g = !g_atoms.is_empty();
        if has_g && g_atoms.len() != n_blocks {
            return Err(ModelError::DimensionMismatch(format!(
                "{} g atoms for {n_blocks} primal blocks",
                g_atoms.len()
            )));
        }
        for (i, a) in g_atoms.iter().enumerate() {
            check_atom_dim(a, blocks.size(i), "g", i)?;
        }
        let cg = weights("cg", self.cg, if has_g { n_blocks } else { 0 })?;
        let bg = vector("bg", self.bg, if has_g { n } else { 0 })?;
        let dg = build_dg(self.dg, &blocks, n)?;

        let q = match self.q {
            Some(m) => {
                let m = m.into_csc(n)?;
                if m.n_rows() != n || m.n_cols() != n {
                    return Err(ModelError::DimensionMismatch(format!(
                        "Q is {}x{}, expected {n}x{n}",
                        m.n_rows(),
                        m.n_cols()
                    )));
                }
                let asym = m.asymmetry();
                if asym > T::lit(1e-12) {
                    log::warn!(
                        "Q is not symmetric (relative asymmetry {:e}); using (Q + Qᵀ)/2",
                        asym.to_f64_lossy()
                    );
                    Some(m.symmetrized())
                } else {
                    Some(m)
                }
            }
            None => None,
        };

        let x_init = vector("x_init", self.x_init, n)?;
        let dup = DualDuplicationIndex::build(&h.matrix, &blocks, &h.blocks);
        let y_init = match self.y_init {
            Some(y) => {
                if y.len() != dup.len() {
                    return Err(ModelError::DimensionMismatch(format!(
                        "y_init has length {}, duplicated dual length is {}",
                        y.len(),
                        dup.len()
                    )));
                }
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(ModelError::NonFinite("y_init"));
                }
                Some(y)
            }
            None => None,
        };

        Ok(Problem {
            n,
            blocks,
            f,
            h,
            g_atoms,
            cg,
            bg,
            dg,
            q,
            x_init,
            y_init,
            dup,
        })
    }
}

fn check_atom_dim<T: Scalar>(
    atom: &AtomRef<T>,
    dim: usize,
    term: &str,
    k: usize,
) -> Result<(), ModelError> {
    if let DimPolicy::Fixed(d) = atom.dim_policy() {
        if d != dim {
            return Err(ModelError::DimensionMismatch(format!(
                "{term} atom {k} ({}) needs blocks of size {d}, block has size {dim}",
                atom.name()
            )));
        }
    }
    Ok(())
}

fn weights<T: Scalar>(
    name: &'static str,
    v: Option<Vec<T>>,
    len: usize,
) -> Result<Vec<T>, ModelError> {
    let v = v.unwrap_or_else(|| vec![T::one(); len]);
    if v.len() != len {
        return Err(ModelError::DimensionMismatch(format!(
            "{name} has length {}, expected {len}",
            v.len()
        )));
    }
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, &w)| !(w > T::zero()) || !w.is_finite()) {
        return Err(ModelError::NonPositiveWeight {
            name,
            index,
            value: value.to_f64_lossy(),
        });
    }
    Ok(v)
}

fn vector<T: Scalar>(
    name: &'static str,
    v: Option<Vec<T>>,
    len: usize,
) -> Result<Vec<T>, ModelError> {
    let v = v.unwrap_or_else(|| vec![T::zero(); len]);
    if v.len() != len {
        return Err(ModelError::DimensionMismatch(format!(
            "{name} has length {}, expected {len}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(ModelError::NonFinite(name));
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn build_term<T: Scalar>(
    term: &'static str,
    matrix_name: &'static str,
    n: usize,
    atoms: Option<AtomList<T>>,
    c: Option<Vec<T>>,
    m: Option<MatrixInput<T>>,
    b: Option<Vec<T>>,
    blocks: Option<Vec<usize>>,
    catalog: &AtomCatalog<T>,
) -> Result<Term<T>, ModelError> {
    let atoms = match atoms {
        Some(a) => a.resolve(catalog)?,
        None => Vec::new(),
    };
    if atoms.is_empty() {
        return Ok(Term::empty(n));
    }
    let matrix = m
        .ok_or(ModelError::MissingMatrix {
            term,
            matrix: matrix_name,
        })?
        .into_csc(n)?;
    if matrix.n_cols() != n {
        return Err(ModelError::DimensionMismatch(format!(
            "{matrix_name} has {} columns, expected N = {n}",
            matrix.n_cols()
        )));
    }
    let rows = matrix.n_rows();
    let blocks = match blocks {
        Some(b) => BlockStructure::new(b)?,
        None => BlockStructure::scalar(rows),
    };
    if blocks.dim() != rows {
        return Err(ModelError::DimensionMismatch(format!(
            "{term} row blocks end at {}, {matrix_name} has {rows} rows",
            blocks.dim()
        )));
    }
    if blocks.len() != atoms.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "{} {term} atoms for {} row blocks of {matrix_name}",
            atoms.len(),
            blocks.len()
        )));
    }
    for (k, a) in atoms.iter().enumerate() {
        check_atom_dim(a, blocks.size(k), term, k)?;
    }
    let weight_name = if term == "f" { "cf" } else { "ch" };
    let offset_name = if term == "f" { "bf" } else { "bh" };
    let weights = weights(weight_name, c, atoms.len())?;
    let offset = vector(offset_name, b, rows)?;
    Ok(Term {
        atoms,
        weights,
        matrix,
        offset,
        blocks,
    })
}

fn build_dg<T: Scalar>(
    dg: Option<DgInput<T>>,
    blocks: &BlockStructure,
    n: usize,
) -> Result<Vec<T>, ModelError> {
    let per_block = match dg {
        None => return Ok(vec![T::one(); blocks.len()]),
        Some(DgInput::PerBlock(v)) => {
            if v.len() != blocks.len() {
                return Err(ModelError::DimensionMismatch(format!(
                    "Dg has {} values for {} blocks",
                    v.len(),
                    blocks.len()
                )));
            }
            v
        }
        Some(DgInput::Diagonal(d)) => diag_to_blocks(&d, blocks, n)?,
        Some(DgInput::Matrix(m)) => {
            let m = m.into_csc(n)?;
            if m.n_rows() != n || m.n_cols() != n {
                return Err(ModelError::DimensionMismatch(format!(
                    "Dg is {}x{}, expected {n}x{n}",
                    m.n_rows(),
                    m.n_cols()
                )));
            }
            let mut d = vec![T::zero(); n];
            for c in 0..n {
                let (rows, vals) = m.col(c);
                for (&r, &v) in rows.iter().zip(vals) {
                    if r != c {
                        if v != T::zero() {
                            return Err(ModelError::NonDiagonalDg { row: r, col: c });
                        }
                    } else {
                        d[c] = v;
                    }
                }
            }
            diag_to_blocks(&d, blocks, n)?
        }
    };
    for (i, &v) in per_block.iter().enumerate() {
        if v == T::zero() {
            return Err(ModelError::ZeroDg(i));
        }
        if !v.is_finite() {
            return Err(ModelError::NonFinite("Dg"));
        }
    }
    Ok(per_block)
}

fn diag_to_blocks<T: Scalar>(
    d: &[T],
    blocks: &BlockStructure,
    n: usize,
) -> Result<Vec<T>, ModelError> {
    if d.len() != n {
        return Err(ModelError::DimensionMismatch(format!(
            "Dg diagonal has length {}, expected {n}",
            d.len()
        )));
    }
    (0..blocks.len())
        .map(|i| {
            let r = blocks.range(i);
            let first = d[r.start];
            match d[r].iter().find(|&&v| v != first) {
                Some(&other) => Err(ModelError::NonUniformDg {
                    block: i,
                    first: first.to_f64_lossy(),
                    other: other.to_f64_lossy(),
                }),
                None => Ok(first),
            }
        })
        .collect()
}
