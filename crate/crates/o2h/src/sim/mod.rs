//! Reference semantics and verification oracles.
//!
//! `interpret_sequential` executes a program against one flat memory image
//! with C arithmetic semantics (wrapping 32-bit ints, IEEE floats) and logs
//! every variable touch. `interpret_dual` executes a transformed program
//! against separate host and device images, tracking per-variable validity,
//! recording stale accesses, and accounting transfer volume. Equivalence
//! between the two is the no-GPU substitute for running the output.

mod dual;
mod enumerate;
mod inputs;
mod sequential;

pub use dual::{count_transfers, interpret_dual, DualOutcome};
pub use enumerate::{enumerate_legal_plans, EnumerationOutcome};
pub use inputs::Bindings;
pub use sequential::{interpret_sequential, SeqOutcome};

use crate::analysis::AccessKind;
use crate::ast::{BaseType, BinOp, Expr};
use crate::diag::{Diagnostic, ErrorCode};
use crate::span::SourceSpan;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scalar {
    Int(i32),
    Float(f32),
    Double(f64),
}

pub const POISON_INT: i32 = i32::MIN + 0xBAD;
pub const POISON_F32: u32 = 0x7FC0_0BAD;
pub const POISON_F64: u64 = 0x7FF8_0000_0000_0BAD;

impl Scalar {
    /// Distinguishable sentinel written wherever a stale copy was read.
    pub fn poison(base: BaseType) -> Scalar {
        match base {
            BaseType::Int => Scalar::Int(POISON_INT),
            BaseType::Float => Scalar::Float(f32::from_bits(POISON_F32)),
            BaseType::Double => Scalar::Double(f64::from_bits(POISON_F64)),
        }
    }

    pub fn zero(base: BaseType) -> Scalar {
        match base {
            BaseType::Int => Scalar::Int(0),
            BaseType::Float => Scalar::Float(0.0),
            BaseType::Double => Scalar::Double(0.0),
        }
    }

    pub fn convert(self, to: BaseType) -> Scalar {
        match (self, to) {
            (Scalar::Int(v), BaseType::Int) => Scalar::Int(v),
            (Scalar::Int(v), BaseType::Float) => Scalar::Float(v as f32),
            (Scalar::Int(v), BaseType::Double) => Scalar::Double(v as f64),
            (Scalar::Float(v), BaseType::Int) => Scalar::Int(v as i32),
            (Scalar::Float(v), BaseType::Float) => Scalar::Float(v),
            (Scalar::Float(v), BaseType::Double) => Scalar::Double(v as f64),
            (Scalar::Double(v), BaseType::Int) => Scalar::Int(v as i32),
            (Scalar::Double(v), BaseType::Float) => Scalar::Float(v as f32),
            (Scalar::Double(v), BaseType::Double) => Scalar::Double(v),
        }
    }

    pub fn truthy(self) -> bool {
        match self {
            Scalar::Int(v) => v != 0,
            Scalar::Float(v) => v != 0.0,
            Scalar::Double(v) => v != 0.0,
        }
    }

    /// Bitwise comparison; NaNs with equal payloads compare equal.
    pub fn bits_equal(self, other: Scalar) -> bool {
        match (self, other) {
            (Scalar::Int(a), Scalar::Int(b)) => a == b,
            (Scalar::Float(a), Scalar::Float(b)) => a.to_bits() == b.to_bits(),
            (Scalar::Double(a), Scalar::Double(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }

    fn as_index(self, span: &SourceSpan) -> Result<i64, ExecError> {
        match self {
            Scalar::Int(v) => Ok(v as i64),
            _ => Err(ExecError::new(
                span.clone(),
                ExecErrorKind::BadValue("array index is not an int".to_string()),
            )),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Float(v) => write!(f, "{v:?}"),
            Scalar::Double(v) => write!(f, "{v:?}"),
        }
    }
}

/// C-style promotion: double wins, then float, then wrapping 32-bit int.
pub fn binary_op(op: BinOp, lhs: Scalar, rhs: Scalar, span: &SourceSpan) -> Result<Scalar, ExecError> {
    use Scalar::*;
    let cmp = |b: bool| Int(b as i32);
    match (lhs, rhs) {
        (Double(_), _) | (_, Double(_)) => {
            let (a, b) = match (lhs.convert(BaseType::Double), rhs.convert(BaseType::Double)) {
                (Double(a), Double(b)) => (a, b),
                _ => unreachable!(),
            };
            Ok(match op {
                BinOp::Add => Double(a + b),
                BinOp::Sub => Double(a - b),
                BinOp::Mul => Double(a * b),
                BinOp::Div => Double(a / b),
                BinOp::Rem => {
                    return Err(ExecError::new(
                        span.clone(),
                        ExecErrorKind::BadValue("`%` applied to non-int values".to_string()),
                    ))
                }
                BinOp::Lt => cmp(a < b),
                BinOp::Le => cmp(a <= b),
                BinOp::Gt => cmp(a > b),
                BinOp::Ge => cmp(a >= b),
                BinOp::Eq => cmp(a == b),
                BinOp::Ne => cmp(a != b),
            })
        }
        (Float(_), _) | (_, Float(_)) => {
            let (a, b) = match (lhs.convert(BaseType::Float), rhs.convert(BaseType::Float)) {
                (Float(a), Float(b)) => (a, b),
                _ => unreachable!(),
            };
            Ok(match op {
                BinOp::Add => Float(a + b),
                BinOp::Sub => Float(a - b),
                BinOp::Mul => Float(a * b),
                BinOp::Div => Float(a / b),
                BinOp::Rem => {
                    return Err(ExecError::new(
                        span.clone(),
                        ExecErrorKind::BadValue("`%` applied to non-int values".to_string()),
                    ))
                }
                BinOp::Lt => cmp(a < b),
                BinOp::Le => cmp(a <= b),
                BinOp::Gt => cmp(a > b),
                BinOp::Ge => cmp(a >= b),
                BinOp::Eq => cmp(a == b),
                BinOp::Ne => cmp(a != b),
            })
        }
        (Int(a), Int(b)) => Ok(match op {
            BinOp::Add => Int(a.wrapping_add(b)),
            BinOp::Sub => Int(a.wrapping_sub(b)),
            BinOp::Mul => Int(a.wrapping_mul(b)),
            BinOp::Div => {
                if b == 0 {
                    return Err(ExecError::new(span.clone(), ExecErrorKind::DivZero));
                }
                Int(a.wrapping_div(b))
            }
            BinOp::Rem => {
                if b == 0 {
                    return Err(ExecError::new(span.clone(), ExecErrorKind::DivZero));
                }
                Int(a.wrapping_rem(b))
            }
            BinOp::Lt => cmp(a < b),
            BinOp::Le => cmp(a <= b),
            BinOp::Gt => cmp(a > b),
            BinOp::Ge => cmp(a >= b),
            BinOp::Eq => cmp(a == b),
            BinOp::Ne => cmp(a != b),
        }),
    }
}

// ---------------------------------------------------------------------------
// Memory
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct VarStorage {
    pub base: BaseType,
    pub dims: Vec<i64>,
    /// Row-major cells; `None` marks a never-written element.
    pub cells: Vec<Option<Scalar>>,
}

impl VarStorage {
    pub fn new(base: BaseType, dims: Vec<i64>, zero_init_arrays: bool) -> VarStorage {
        let count = dims.iter().product::<i64>().max(1) as usize;
        let fill = if zero_init_arrays && !dims.is_empty() {
            Some(Scalar::zero(base))
        } else {
            None
        };
        VarStorage {
            base,
            dims,
            cells: vec![fill; count],
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn element_count(&self) -> u64 {
        self.cells.len() as u64
    }

    pub fn byte_size(&self) -> u64 {
        self.element_count() * self.base.size_bytes()
    }

    /// Row-major flattening with per-dimension bounds checks.
    pub fn flatten(&self, name: &str, indices: &[i64], span: &SourceSpan) -> Result<usize, ExecError> {
        if self.is_scalar() {
            if indices.len() == 1 && indices[0] == 0 {
                // Promoted scalar parameter accessed as a one-element array.
                return Ok(0);
            }
            return Err(ExecError::new(
                span.clone(),
                ExecErrorKind::BadValue(format!("`{name}` is not an array")),
            ));
        }
        if indices.len() != self.dims.len() {
            return Err(ExecError::new(
                span.clone(),
                ExecErrorKind::BadValue(format!(
                    "`{name}` indexed with {} of {} dimensions",
                    indices.len(),
                    self.dims.len()
                )),
            ));
        }
        let mut flat: i64 = 0;
        for (ix, extent) in indices.iter().zip(&self.dims) {
            if *ix < 0 || ix >= extent {
                return Err(ExecError::new(
                    span.clone(),
                    ExecErrorKind::Oob {
                        var: name.to_string(),
                        index: *ix,
                        extent: *extent,
                    },
                ));
            }
            flat = flat * extent + ix;
        }
        Ok(flat as usize)
    }

    pub fn poison_all(&mut self) {
        let p = Scalar::poison(self.base);
        for cell in &mut self.cells {
            *cell = Some(p);
        }
    }

    fn format_value(&self, name: &str) -> String {
        if self.is_scalar() {
            match self.cells[0] {
                Some(v) => format!("{name} = {v}"),
                None => format!("{name} = <uninit>"),
            }
        } else {
            let body = self
                .cells
                .iter()
                .map(|c| match c {
                    Some(v) => v.to_string(),
                    None => "<uninit>".to_string(),
                })
                .collect::<Vec<_>>()
                .join(", ");
            format!("{name} = [{body}]")
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MemoryImage {
    pub vars: BTreeMap<String, VarStorage>,
}

impl MemoryImage {
    pub fn new() -> Self {
        MemoryImage {
            vars: BTreeMap::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// Errors and options
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum ExecErrorKind {
    UninitRead { var: String },
    Oob { var: String, index: i64, extent: i64 },
    DivZero,
    SyncMissing { label: String },
    UnknownFunction { name: String },
    BadValue(String),
    StepLimit,
    Explosion { plans: u64, cap: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExecError {
    pub span: SourceSpan,
    pub kind: ExecErrorKind,
}

impl ExecError {
    pub fn new(span: SourceSpan, kind: ExecErrorKind) -> Self {
        ExecError { span, kind }
    }

    pub fn into_diagnostic(self) -> Diagnostic {
        let (code, message) = match &self.kind {
            ExecErrorKind::UninitRead { var } => (
                ErrorCode::UninitRead,
                format!("read of uninitialized value in `{var}`"),
            ),
            ExecErrorKind::Oob { var, index, extent } => (
                ErrorCode::Oob,
                format!("index {index} outside extent {extent} of `{var}`"),
            ),
            ExecErrorKind::DivZero => (ErrorCode::DivZero, "division by zero".to_string()),
            ExecErrorKind::SyncMissing { label } => (
                ErrorCode::SyncMissing,
                format!("asynchronous callsite `{label}` was never synchronized"),
            ),
            ExecErrorKind::UnknownFunction { name } => (
                ErrorCode::Internal,
                format!("call to unknown function `{name}`"),
            ),
            ExecErrorKind::BadValue(detail) => (ErrorCode::Internal, detail.clone()),
            ExecErrorKind::StepLimit => (
                ErrorCode::Internal,
                "execution exceeded the step limit".to_string(),
            ),
            ExecErrorKind::Explosion { plans, cap } => (
                ErrorCode::Explosion,
                format!("plan space has {plans} candidates, above the cap of {cap}"),
            ),
        };
        Diagnostic::new(self.span, code, message)
    }
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.clone().into_diagnostic())
    }
}

impl std::error::Error for ExecError {}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub zero_init: bool,
    pub bindings: Bindings,
    pub max_steps: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            zero_init: false,
            bindings: Bindings::default(),
            max_steps: 200_000_000,
        }
    }
}

// ---------------------------------------------------------------------------
// Shared expression evaluation
// ---------------------------------------------------------------------------

/// Name resolution hook: each interpreter supplies its own view of memory.
pub(crate) trait Access {
    fn read_scalar(&mut self, name: &str, span: &SourceSpan) -> Result<Scalar, ExecError>;
    fn read_element(
        &mut self,
        name: &str,
        indices: &[i64],
        span: &SourceSpan,
    ) -> Result<Scalar, ExecError>;
}

pub(crate) fn eval_expr<A: Access>(expr: &Expr, acc: &mut A) -> Result<Scalar, ExecError> {
    match expr {
        Expr::IntLit(v, _) => Ok(Scalar::Int(*v)),
        Expr::FloatLit(v, _) => Ok(Scalar::Double(*v)),
        Expr::Var(name, span) => acc.read_scalar(name, span),
        Expr::ArrayRef { name, indices, span } => {
            let mut flat = Vec::with_capacity(indices.len());
            for ix in indices {
                flat.push(eval_expr(ix, acc)?.as_index(ix.span())?);
            }
            acc.read_element(name, &flat, span)
        }
        Expr::Binary { op, lhs, rhs, span } => {
            let l = eval_expr(lhs, acc)?;
            let r = eval_expr(rhs, acc)?;
            binary_op(*op, l, r, span)
        }
    }
}

// ---------------------------------------------------------------------------
// Transfer statistics
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum StaleDirection {
    HostRead,
    HostWrite,
    DeviceRead,
    DeviceWrite,
    Upload,
    Download,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StaleRead {
    pub var: String,
    pub site: SourceSpan,
    pub direction: StaleDirection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TransferStats {
    pub uploads: u64,
    pub downloads: u64,
    pub bytes_up: u64,
    pub bytes_down: u64,
    pub stale_reads: Vec<StaleRead>,
}

impl TransferStats {
    pub fn total_bytes(&self) -> u64 {
        self.bytes_up + self.bytes_down
    }
}

// ---------------------------------------------------------------------------
// Outcome comparison
// ---------------------------------------------------------------------------

fn storage_equal(a: &VarStorage, b: &VarStorage) -> bool {
    a.base == b.base
        && a.dims == b.dims
        && a.cells.len() == b.cells.len()
        && a.cells.iter().zip(&b.cells).all(|(x, y)| match (x, y) {
            (None, None) => true,
            (Some(x), Some(y)) => x.bits_equal(*y),
            _ => false,
        })
}

/// Compare the sequential outcome with the authoritative per-variable copy of
/// the dual run (host copy when host-valid, device copy otherwise). Returns a
/// human-readable description of every mismatch.
pub fn compare_outcomes(seq: &SeqOutcome, dual: &DualOutcome) -> Vec<String> {
    let mut mismatches = Vec::new();
    if seq.output != dual.output {
        mismatches.push(format!(
            "printed output differs: sequential {:?} vs transformed {:?}",
            seq.output, dual.output
        ));
    }
    let effective = dual.effective_memory();
    for (name, expected) in &seq.memory.vars {
        match effective.vars.get(name) {
            None => mismatches.push(format!("`{name}` missing from the transformed run")),
            Some(actual) => {
                if !storage_equal(expected, actual) {
                    mismatches.push(format!(
                        "`{name}` differs: sequential {} vs transformed {}",
                        expected.format_value(name),
                        actual.format_value(name)
                    ));
                }
            }
        }
    }
    for name in effective.vars.keys() {
        if !seq.memory.vars.contains_key(name) {
            mismatches.push(format!("`{name}` only exists in the transformed run"));
        }
    }
    mismatches
}

/// Dedup helper shared by the interpreters' touch logs.
pub(crate) fn push_touch(log: &mut Vec<(String, AccessKind)>, var: &str, kind: AccessKind) {
    log.push((var.to_string(), kind));
}
