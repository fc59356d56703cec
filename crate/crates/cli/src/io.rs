use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use csext::linalg::{zeros, CMatrix};
use csext::{Complex64, Conjugation, PartialOperator, Tolerance};
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Validation { code: String, message: String, residual: Option<f64> },
    Numerical { code: String, message: String, residual: Option<f64> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    pub fn to_json(&self) -> Value {
        let (code, message, residual) = match self {
            CliError::Parse(m) => ("ParseError", m.as_str(), None),
            CliError::Validation { code, message, residual } | CliError::Numerical { code, message, residual } => {
                (code.as_str(), message.as_str(), *residual)
            }
        };
        json!({ "code": code, "message": message, "residual": residual })
    }

    pub fn validation(code: &str, message: impl Into<String>, residual: f64) -> Self {
        CliError::Validation {
            code: code.into(),
            message: message.into(),
            residual: Some(residual),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "{m}"),
            CliError::Validation { message, .. } | CliError::Numerical { message, .. } => write!(f, "{message}"),
        }
    }
}

impl From<csext::Error> for CliError {
    fn from(e: csext::Error) -> Self {
        let code = e.code().to_string();
        let message = e.to_string();
        let residual = e.residual();
        if e.is_numerical() {
            CliError::Numerical { code, message, residual }
        } else {
            CliError::Validation { code, message, residual }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a loaded operator is expected to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// C-symmetric contraction (the default).
    Contraction,
    /// C-symmetric dissipative operator.
    Dissipative,
    /// C-symmetric operator with no norm constraint.
    Bounded,
}

impl Kind {
    fn parse(s: &str) -> CliResult<Self> {
        match s {
            "contraction" => Ok(Kind::Contraction),
            "dissipative" => Ok(Kind::Dissipative),
            "bounded" => Ok(Kind::Bounded),
            other => Err(CliError::Parse(format!("unknown kind {other:?}"))),
        }
    }
}

pub struct InstanceFile {
    pub conj: Conjugation,
    pub op: PartialOperator,
    pub lambda: Option<Complex64>,
    pub kind: Kind,
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn parse_complex(v: &Value) -> CliResult<Complex64> {
    match v {
        Value::Number(x) => Ok(Complex64::new(as_f64(x)?, 0.0)),
        Value::Array(pair) if pair.len() == 2 => match (&pair[0], &pair[1]) {
            (Value::Number(re), Value::Number(im)) => Ok(Complex64::new(as_f64(re)?, as_f64(im)?)),
            _ => Err(CliError::Parse(format!("complex entry must be [re, im], got {v}"))),
        },
        _ => Err(CliError::Parse(format!("complex entry must be [re, im], got {v}"))),
    }
}

fn as_f64(x: &serde_json::Number) -> CliResult<f64> {
    x.as_f64().ok_or_else(|| CliError::Parse(format!("number {x} is not representable")))
}

/// Row-major nested array; `rows` fixes the row count when the matrix has
/// no columns.
pub fn parse_matrix(v: &Value, rows: Option<usize>) -> CliResult<CMatrix> {
    let Value::Array(row_values) = v else {
        return Err(CliError::Parse("matrix must be an array of rows".into()));
    };
    if row_values.is_empty() {
        return Ok(zeros(rows.unwrap_or(0), 0));
    }
    let mut data = Vec::new();
    let mut cols = None;
    for row in row_values {
        let Value::Array(entries) = row else {
            return Err(CliError::Parse("matrix rows must be arrays".into()));
        };
        if *cols.get_or_insert(entries.len()) != entries.len() {
            return Err(CliError::Parse("matrix rows have different lengths".into()));
        }
        for e in entries {
            data.push(parse_complex(e)?);
        }
    }
    let cols = cols.unwrap_or(0);
    if let Some(r) = rows {
        if r != row_values.len() {
            return Err(CliError::Parse(format!("expected {r} rows, found {}", row_values.len())));
        }
    }
    Ok(CMatrix::from_row_slice(row_values.len(), cols, &data))
}

pub fn parse_lambda(s: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [re, im] = parts.as_slice() else {
        return Err(format!("expected RE,IM, got {s:?}"));
    };
    let re: f64 = re.parse().map_err(|e| format!("{re:?}: {e}"))?;
    let im: f64 = im.parse().map_err(|e| format!("{im:?}: {e}"))?;
    Ok(Complex64::new(re, im))
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> CliResult<&'a Value> {
    obj.get(name).ok_or_else(|| CliError::Parse(format!("missing field {name:?}")))
}

pub fn load_instance(path: &Path, tol: Tolerance) -> CliResult<InstanceFile> {
    let doc = read_json(path)?;
    let Value::Object(obj) = doc else {
        return Err(CliError::Parse("instance must be a JSON object".into()));
    };
    let dim = field(&obj, "dim")?
        .as_u64()
        .ok_or_else(|| CliError::Parse("dim must be a non-negative integer".into()))? as usize;
    let s = parse_matrix(field(&obj, "conjugation")?, Some(dim))?;
    let basis = parse_matrix(field(&obj, "domain_basis")?, Some(dim))?;
    let action = parse_matrix(field(&obj, "action")?, Some(dim))?;
    if s.shape() != (dim, dim) {
        return Err(CliError::Parse(format!("conjugation must be {dim}x{dim}")));
    }
    if basis.shape() != action.shape() {
        return Err(CliError::Parse(format!(
            "domain_basis is {}x{} but action is {}x{}",
            basis.nrows(),
            basis.ncols(),
            action.nrows(),
            action.ncols()
        )));
    }
    let lambda = obj.get("lambda").map(parse_complex).transpose()?;
    let kind = match obj.get("kind") {
        Some(Value::String(k)) => Kind::parse(k)?,
        Some(other) => return Err(CliError::Parse(format!("kind must be a string, got {other}"))),
        None => Kind::Contraction,
    };
    let conj = Conjugation::new(s, tol)?;
    let op = PartialOperator::from_images(&basis, &action, tol)?;
    Ok(InstanceFile { conj, op, lambda, kind })
}

/// A parameter file: a bare matrix or an object with `variant` and `matrix`.
pub struct ParamFile {
    pub variant: Option<String>,
    pub matrix: CMatrix,
}

pub fn load_param(path: &Path, dim: usize) -> CliResult<ParamFile> {
    match read_json(path)? {
        Value::Object(obj) => {
            let variant = match obj.get("variant") {
                Some(Value::String(v)) => Some(v.clone()),
                Some(other) => return Err(CliError::Parse(format!("variant must be a string, got {other}"))),
                None => None,
            };
            let matrix = parse_matrix(field(&obj, "matrix")?, Some(dim))?;
            check_square(&matrix, dim)?;
            Ok(ParamFile { variant, matrix })
        }
        other => {
            let matrix = parse_matrix(&other, Some(dim))?;
            check_square(&matrix, dim)?;
            Ok(ParamFile { variant: None, matrix })
        }
    }
}

fn check_square(m: &CMatrix, dim: usize) -> CliResult<()> {
    if m.shape() != (dim, dim) {
        return Err(CliError::Parse(format!(
            "parameter must be {dim}x{dim}, found {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

/// A full-domain instance document for `matrix`, loadable by `--input`.
pub fn instance_json(conj: &Conjugation, matrix: &CMatrix, kind: Kind) -> Value {
    let n = matrix.nrows();
    json!({
        "dim": n,
        "kind": kind,
        "conjugation": matrix_json(conj.coefficient()),
        "domain_basis": matrix_json(&csext::linalg::identity(n)),
        "action": matrix_json(matrix),
    })
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Compact JSON with every float written to 17 significant digits.
struct Precise;

impl Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        let value = if value == 0.0 { 0.0 } else { value };
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn render(v: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise);
    v.serialize(&mut ser).expect("writing to memory");
    String::from_utf8(out).expect("JSON is UTF-8")
}
