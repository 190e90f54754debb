//! Problem file schema. See `SCHEMA.md` in this crate for the reference.

use cdsolve::SolverOptions;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub problem: ProblemSection,
    pub f: Option<TermSection>,
    pub g: Option<SeparableSection>,
    pub h: Option<TermSection>,
    pub q: Option<QuadSection>,
    #[serde(default)]
    pub options: SolverOptions,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub n: usize,
    pub blocks: Option<Vec<usize>>,
    pub x_init: Option<VectorSpec>,
    pub y_init: Option<VectorSpec>,
}

/// `Σ_j c_j f_j(A_j x − b_j)`, also used for `h`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    pub atoms: AtomsSpec,
    pub matrix: MatrixSpec,
    pub weights: Option<VectorSpec>,
    pub offset: Option<VectorSpec>,
    pub blocks: Option<Vec<usize>>,
    /// Declared row count, checked against the matrix.
    pub rows: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableSection {
    pub atoms: AtomsSpec,
    pub weights: Option<VectorSpec>,
    /// `Dg`: one value per block, or per coordinate.
    pub scale: Option<VectorSpec>,
    pub offset: Option<VectorSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSection {
    pub matrix: MatrixSpec,
}

/// One name repeated for every block, or one name per block.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum AtomsSpec {
    One(String),
    Each(Vec<String>),
}

/// A constant, an inline list or a file.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Constant(f64),
    List(Vec<f64>),
    File(String),
}

/// A single source, or several stacked vertically.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    One(MatrixItem),
    Stack(Vec<MatrixItem>),
}

impl MatrixSpec {
    pub fn items(&self) -> &[MatrixItem] {
        match self {
            MatrixSpec::One(m) => std::slice::from_ref(m),
            MatrixSpec::Stack(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MatrixItem {
    /// File path, format from the extension.
    Path(String),
    Source(MatrixSource),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSource {
    pub file: Option<String>,
    pub format: Option<MatrixFormat>,
    /// Inline rows.
    pub dense: Option<Vec<Vec<f64>>>,
    /// Identity of this size.
    pub identity: Option<usize>,
    #[serde(default)]
    pub transpose: bool,
    /// Multiplies every entry.
    pub scale: Option<f64>,
    /// What to do with the label column of a libsvm file.
    pub labels: Option<LabelUse>,
    /// Feature count of a libsvm file, when trailing features are all zero.
    pub cols: Option<usize>,
    #[serde(default)]
    pub zero_based: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Mtx,
    Csv,
    #[serde(alias = "svmlight")]
    Libsvm,
}

impl MatrixFormat {
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "mtx" => Some(MatrixFormat::Mtx),
            "csv" => Some(MatrixFormat::Csv),
            "svm" | "libsvm" | "svmlight" => Some(MatrixFormat::Libsvm),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelUse {
    /// Labels become the offset `b` of the rows (default unless transposed).
    Offset,
    /// Row `k` is multiplied by label `k`.
    ScaleRows,
    /// Row `k` is multiplied by minus label `k`.
    NegScaleRows,
    Ignore,
}
