//! Typed syntax tree for the accepted C subset plus the two pragma families:
//! `#pragma omp ...` on input and `#pragma hmpp ...` in transformed output.
//!
//! Statement positions are addressed by [`NestPath`] values: a path is the
//! chain of (child index, block kind) steps from the body of the enclosing
//! function down to one statement. Paths order statements in document order
//! and survive the outlining rewrite unchanged, which is what lets transfer
//! directives planned against the analysis AST be anchored in the emitted
//! program.

use crate::span::SourceSpan;
use serde::Serialize;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BaseType {
    Int,
    Float,
    Double,
}

impl BaseType {
    pub fn c_name(self) -> &'static str {
        match self {
            BaseType::Int => "int",
            BaseType::Float => "float",
            BaseType::Double => "double",
        }
    }

    /// Element size used for transfer-volume accounting.
    pub fn size_bytes(self) -> u64 {
        match self {
            BaseType::Int => 4,
            BaseType::Float => 4,
            BaseType::Double => 8,
        }
    }
}

/// Array extent as written in a declaration. Anything that is not an integer
/// literal parses as `Dynamic` and is rejected by subset validation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Extent {
    Const(i64),
    Dynamic(SourceSpan),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decl {
    pub name: String,
    pub base: BaseType,
    pub dims: Vec<Extent>,
    pub init: Option<Expr>,
    pub span: SourceSpan,
}

impl Decl {
    pub fn is_scalar(&self) -> bool {
        self.dims.is_empty()
    }

    /// Constant extents; `None` if any extent is dynamic.
    pub fn const_dims(&self) -> Option<Vec<i64>> {
        self.dims
            .iter()
            .map(|e| match e {
                Extent::Const(n) => Some(*n),
                Extent::Dynamic(_) => None,
            })
            .collect()
    }

    pub fn element_count(&self) -> Option<u64> {
        self.const_dims()
            .map(|d| d.iter().product::<i64>().max(1) as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
        }
    }

    /// Higher binds tighter. Used both by the parser and the printer.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Mul | BinOp::Div | BinOp::Rem => 3,
            BinOp::Add | BinOp::Sub => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 1,
            BinOp::Eq | BinOp::Ne => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AssignOp {
    Assign,
    AddAssign,
    SubAssign,
    MulAssign,
    DivAssign,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Assign => "=",
            AssignOp::AddAssign => "+=",
            AssignOp::SubAssign => "-=",
            AssignOp::MulAssign => "*=",
            AssignOp::DivAssign => "/=",
        }
    }

    /// The arithmetic op a compound assignment expands to.
    pub fn binary_op(self) -> Option<BinOp> {
        match self {
            AssignOp::Assign => None,
            AssignOp::AddAssign => Some(BinOp::Add),
            AssignOp::SubAssign => Some(BinOp::Sub),
            AssignOp::MulAssign => Some(BinOp::Mul),
            AssignOp::DivAssign => Some(BinOp::Div),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Expr {
    IntLit(i32, SourceSpan),
    FloatLit(f64, SourceSpan),
    Var(String, SourceSpan),
    ArrayRef {
        name: String,
        indices: Vec<Expr>,
        span: SourceSpan,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        span: SourceSpan,
    },
}

impl Expr {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Expr::IntLit(_, s)
            | Expr::FloatLit(_, s)
            | Expr::Var(_, s)
            | Expr::ArrayRef { span: s, .. }
            | Expr::Binary { span: s, .. } => s,
        }
    }

    /// Variable names referenced anywhere in the expression, in tree order,
    /// without duplicates.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut Vec<String>) {
        match self {
            Expr::IntLit(..) | Expr::FloatLit(..) => {}
            Expr::Var(name, _) => {
                if !out.iter().any(|n| n == name) {
                    out.push(name.clone());
                }
            }
            Expr::ArrayRef { name, indices, .. } => {
                if !out.iter().any(|n| n == name) {
                    out.push(name.clone());
                }
                for ix in indices {
                    ix.collect_variables(out);
                }
            }
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_variables(out);
                rhs.collect_variables(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LValue {
    pub name: String,
    pub indices: Vec<Expr>,
    pub span: SourceSpan,
}

/// OpenMP pragma attached to a following loop.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum PragmaInfo {
    ParallelFor {
        device: Option<String>,
        span: SourceSpan,
    },
    TargetDevice {
        device: String,
        span: SourceSpan,
    },
}

impl PragmaInfo {
    pub fn span(&self) -> &SourceSpan {
        match self {
            PragmaInfo::ParallelFor { span, .. } | PragmaInfo::TargetDevice { span, .. } => span,
        }
    }
}

/// Parameter direction for a codelet, derived from accesses inside the block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Intent {
    In,
    Out,
    InOut,
}

impl Intent {
    pub fn as_str(self) -> &'static str {
        match self {
            Intent::In => "in",
            Intent::Out => "out",
            Intent::InOut => "inout",
        }
    }

    pub fn reads(self) -> bool {
        matches!(self, Intent::In | Intent::InOut)
    }

    pub fn writes(self) -> bool {
        matches!(self, Intent::Out | Intent::InOut)
    }
}

/// `#pragma hmpp <g> LABEL callsite` metadata attached to a call statement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CallsitePragma {
    pub group: String,
    pub label: String,
    pub asynchronous: bool,
    pub noupdate: Vec<String>,
    pub span: SourceSpan,
}

/// `#pragma hmpp <g> LABEL codelet` metadata attached to a function definition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeletPragma {
    pub group: String,
    pub label: String,
    pub ios: Vec<(String, Intent)>,
    pub span: SourceSpan,
}

/// `#pragma hmpp <g> group, target=..., mapbyname=...` at file scope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupPragma {
    pub name: String,
    pub target: String,
    pub mapbyname: Vec<String>,
    pub span: SourceSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DirectiveKind {
    AdvancedLoad,
    DelegateStore,
    Synchronize,
    Release,
}

impl DirectiveKind {
    pub fn keyword(self) -> &'static str {
        match self {
            DirectiveKind::AdvancedLoad => "advancedload",
            DirectiveKind::DelegateStore => "delegatestore",
            DirectiveKind::Synchronize => "synchronize",
            DirectiveKind::Release => "release",
        }
    }
}

/// Standalone transfer/synchronization pragma appearing as a statement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectiveStmt {
    pub group: String,
    pub label: Option<String>,
    pub kind: DirectiveKind,
    pub var: Option<String>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForStmt {
    pub index: String,
    pub lower: Expr,
    pub upper: Expr,
    pub body: Block,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IfStmt {
    pub cond: Expr,
    pub then_block: Block,
    pub else_block: Option<Block>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssignStmt {
    pub lhs: LValue,
    pub op: AssignOp,
    pub rhs: Expr,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CallStmt {
    pub callee: String,
    pub args: Vec<Expr>,
    pub pragma: Option<CallsitePragma>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Stmt {
    Compound(Block),
    For(ForStmt),
    If(IfStmt),
    Assign(AssignStmt),
    Decl(Decl),
    Print { var: String, span: SourceSpan },
    PragmaMarked {
        pragmas: Vec<PragmaInfo>,
        body: Box<Stmt>,
        span: SourceSpan,
    },
    Call(CallStmt),
    Directive(DirectiveStmt),
}

impl Stmt {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Stmt::Compound(b) => &b.span,
            Stmt::For(f) => &f.span,
            Stmt::If(i) => &i.span,
            Stmt::Assign(a) => &a.span,
            Stmt::Decl(d) => &d.span,
            Stmt::Print { span, .. } => span,
            Stmt::PragmaMarked { span, .. } => span,
            Stmt::Call(c) => &c.span,
            Stmt::Directive(d) => &d.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionDef {
    pub name: String,
    /// `true` for `int main()`, `false` for `void` codelets.
    pub returns_int: bool,
    pub params: Vec<Decl>,
    pub body: Block,
    pub codelet: Option<CodeletPragma>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranslationUnit {
    pub file: String,
    pub groups: Vec<GroupPragma>,
    pub global_decls: Vec<Decl>,
    pub functions: Vec<FunctionDef>,
}

impl TranslationUnit {
    pub fn main(&self) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == "main")
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }
}

// ---------------------------------------------------------------------------
// Statement addressing
// ---------------------------------------------------------------------------

/// Kind of block a path step indexes into. `Then`/`Else` also select which
/// branch of the parent `if` the step descends through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum BlockKind {
    Compound,
    ForBody,
    Then,
    Else,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PathStep {
    pub index: usize,
    pub kind: BlockKind,
}

/// Address of one statement inside a function body. The first step indexes
/// the root compound; each later step selects a child block of the previous
/// statement (`ForBody`, `Then`, `Else`, or a bare `Compound`) and an index
/// within it.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct NestPath(pub Vec<PathStep>);

impl NestPath {
    pub fn root() -> Self {
        NestPath(Vec::new())
    }

    pub fn child(&self, index: usize, kind: BlockKind) -> Self {
        let mut steps = self.0.clone();
        steps.push(PathStep { index, kind });
        NestPath(steps)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of `for` bodies on the path (the loop depth of the statement).
    pub fn loop_depth(&self) -> usize {
        self.0.iter().filter(|s| s.kind == BlockKind::ForBody).count()
    }

    /// True if any step descends through an `if` branch.
    pub fn conditional(&self) -> bool {
        self.0
            .iter()
            .any(|s| matches!(s.kind, BlockKind::Then | BlockKind::Else))
    }

    pub fn starts_with(&self, prefix: &NestPath) -> bool {
        self.0.len() >= prefix.0.len() && self.0[..prefix.0.len()] == prefix.0[..]
    }

    pub fn truncated(&self, len: usize) -> NestPath {
        NestPath(self.0[..len].to_vec())
    }

    /// Resolve the statement this path addresses within `body`.
    pub fn resolve<'a>(&self, body: &'a Block) -> Option<&'a Stmt> {
        let mut block = body;
        let mut stmt: Option<&Stmt> = None;
        for (depth, step) in self.0.iter().enumerate() {
            if depth > 0 {
                block = child_block(stmt?, step.kind)?;
            }
            stmt = block.stmts.get(step.index);
            stmt?;
        }
        stmt
    }
}

impl fmt::Display for NestPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            let k = match s.kind {
                BlockKind::Compound => "c",
                BlockKind::ForBody => "f",
                BlockKind::Then => "t",
                BlockKind::Else => "e",
            };
            write!(f, "{}{}", k, s.index)?;
        }
        write!(f, "]")
    }
}

/// The child block of `stmt` selected by `kind`, if it has one.
pub fn child_block(stmt: &Stmt, kind: BlockKind) -> Option<&Block> {
    match (stmt, kind) {
        (Stmt::Compound(b), BlockKind::Compound) => Some(b),
        (Stmt::For(f), BlockKind::ForBody) => Some(&f.body),
        (Stmt::PragmaMarked { body, .. }, BlockKind::ForBody) => match body.as_ref() {
            Stmt::For(f) => Some(&f.body),
            _ => None,
        },
        (Stmt::If(i), BlockKind::Then) => Some(&i.then_block),
        (Stmt::If(i), BlockKind::Else) => i.else_block.as_ref(),
        _ => None,
    }
}

/// Which side of an anchor statement a position denotes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Edge {
    Before,
    At,
    After,
}

/// Total document order over positions in one function body, covering both
/// statement-level events (`At`) and insertion edges (`Before`/`After`).
/// Encodes each step as (index, branch rank) and terminates with the edge so
/// that `Before(p) < At(p) < positions inside p < After(p)`.
pub fn position_key(path: &NestPath, edge: Edge) -> Vec<i64> {
    let mut key = Vec::with_capacity(path.0.len() * 2 + 1);
    for step in &path.0 {
        key.push(step.index as i64);
        key.push(match step.kind {
            BlockKind::Compound | BlockKind::ForBody => 0,
            BlockKind::Then => 1,
            BlockKind::Else => 2,
        });
    }
    key.push(match edge {
        Edge::Before => i64::MIN,
        Edge::At => 0,
        Edge::After => i64::MAX,
    });
    key
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(steps: &[(usize, BlockKind)]) -> NestPath {
        NestPath(
            steps
                .iter()
                .map(|&(index, kind)| PathStep { index, kind })
                .collect(),
        )
    }

    #[test]
    fn position_keys_order_nested_statements() {
        let outer = p(&[(3, BlockKind::Compound)]);
        let inner = p(&[(3, BlockKind::Compound), (0, BlockKind::ForBody)]);
        let later = p(&[(5, BlockKind::Compound)]);

        assert!(position_key(&outer, Edge::Before) < position_key(&inner, Edge::Before));
        assert!(position_key(&inner, Edge::After) < position_key(&outer, Edge::After));
        assert!(position_key(&outer, Edge::After) < position_key(&later, Edge::Before));
        assert!(position_key(&inner, Edge::At) < position_key(&inner, Edge::After));
    }

    #[test]
    fn then_branch_orders_before_else_branch() {
        let then = p(&[(2, BlockKind::Compound), (0, BlockKind::Then)]);
        let els = p(&[(2, BlockKind::Compound), (0, BlockKind::Else)]);
        assert!(position_key(&then, Edge::At) < position_key(&els, Edge::At));
    }

    #[test]
    fn loop_depth_counts_for_bodies_only() {
        let path = p(&[
            (1, BlockKind::Compound),
            (0, BlockKind::ForBody),
            (2, BlockKind::Then),
            (0, BlockKind::ForBody),
        ]);
        assert_eq!(path.loop_depth(), 2);
        assert!(path.conditional());
    }
}
