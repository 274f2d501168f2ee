//! Subset validation for input programs and GPU block discovery.
//!
//! `validate_subset` is the gate run before translation: it checks the flat
//! namespace, static array extents, expression typing, and the pragma rules,
//! and returns every finding instead of stopping at the first. Transformed
//! programs (codelets, callsites, transfer directives) are parsed by the same
//! frontend but are not run through this gate.

use crate::ast::*;
use crate::diag::{Diagnostic, ErrorCode};
use crate::span::SourceSpan;
use std::collections::BTreeMap;

/// A pragma-marked loop selected for offload.
#[derive(Clone, Debug, PartialEq)]
pub struct GpuBlock {
    pub index: usize,
    pub path: NestPath,
    pub span: SourceSpan,
}

pub(crate) fn pragma_targets_hmpp(pragmas: &[PragmaInfo]) -> bool {
    let has_target = pragmas.iter().any(
        |p| matches!(p, PragmaInfo::TargetDevice { device, .. } if device == "hmpp"),
    );
    let has_device_clause = pragmas.iter().any(
        |p| matches!(p, PragmaInfo::ParallelFor { device: Some(d), .. } if d == "hmpp"),
    );
    let has_parallel_for = pragmas
        .iter()
        .any(|p| matches!(p, PragmaInfo::ParallelFor { .. }));
    (has_target && has_parallel_for) || has_device_clause
}

/// One GpuBlock per marked loop whose pragmas name the hmpp device, in
/// source order. Programs without marked loops yield an empty list.
pub fn find_gpu_blocks(unit: &TranslationUnit) -> Vec<GpuBlock> {
    let mut blocks = Vec::new();
    if let Some(main) = unit.main() {
        find_in_block(&main.body, &NestPath::root(), BlockKind::Compound, &mut blocks);
    }
    blocks
}

fn find_in_block(block: &Block, path: &NestPath, kind: BlockKind, out: &mut Vec<GpuBlock>) {
    for (index, stmt) in block.stmts.iter().enumerate() {
        let here = path.child(index, kind);
        match stmt {
            Stmt::PragmaMarked { pragmas, body, span } => {
                if pragma_targets_hmpp(pragmas) {
                    out.push(GpuBlock {
                        index: out.len(),
                        path: here.clone(),
                        span: span.clone(),
                    });
                }
                if let Stmt::For(f) = body.as_ref() {
                    find_in_block(&f.body, &here, BlockKind::ForBody, out);
                }
            }
            Stmt::For(f) => find_in_block(&f.body, &here, BlockKind::ForBody, out),
            Stmt::If(i) => {
                find_in_block(&i.then_block, &here, BlockKind::Then, out);
                if let Some(e) = &i.else_block {
                    find_in_block(e, &here, BlockKind::Else, out);
                }
            }
            Stmt::Compound(b) => find_in_block(b, &here, BlockKind::Compound, out),
            _ => {}
        }
    }
}

/// Declared shape of one variable in the flat namespace.
#[derive(Clone, Debug)]
pub struct SymbolInfo {
    pub base: BaseType,
    pub dims: Vec<i64>,
    pub order: usize,
    pub span: SourceSpan,
}

impl SymbolInfo {
    pub fn is_scalar(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn element_count(&self) -> u64 {
        self.dims.iter().product::<i64>().max(1) as u64
    }

    pub fn byte_size(&self) -> u64 {
        self.element_count() * self.base.size_bytes()
    }
}

/// Flat symbol table over globals plus main's declarations, in declaration
/// order. Assumes a validated unit; dynamic extents are skipped.
pub fn collect_symbols(unit: &TranslationUnit) -> BTreeMap<String, SymbolInfo> {
    let mut table = BTreeMap::new();
    let mut order = 0usize;
    let add = |decl: &Decl, table: &mut BTreeMap<String, SymbolInfo>, order: &mut usize| {
        if let Some(dims) = decl.const_dims() {
            table.entry(decl.name.clone()).or_insert_with(|| {
                let info = SymbolInfo {
                    base: decl.base,
                    dims,
                    order: *order,
                    span: decl.span.clone(),
                };
                *order += 1;
                info
            });
        }
    };
    for decl in &unit.global_decls {
        add(decl, &mut table, &mut order);
    }
    if let Some(main) = unit.main() {
        collect_decls(&main.body, &mut |decl| add(decl, &mut table, &mut order));
    }
    table
}

fn collect_decls(block: &Block, f: &mut impl FnMut(&Decl)) {
    for stmt in &block.stmts {
        match stmt {
            Stmt::Decl(d) => f(d),
            Stmt::For(fo) => collect_decls(&fo.body, f),
            Stmt::If(i) => {
                collect_decls(&i.then_block, f);
                if let Some(e) = &i.else_block {
                    collect_decls(e, f);
                }
            }
            Stmt::Compound(b) => collect_decls(b, f),
            Stmt::PragmaMarked { body, .. } => {
                if let Stmt::For(fo) = body.as_ref() {
                    collect_decls(&fo.body, f);
                }
            }
            _ => {}
        }
    }
}

struct Validator {
    diags: Vec<Diagnostic>,
    symbols: BTreeMap<String, SymbolInfo>,
    order: usize,
}

impl Validator {
    fn report(&mut self, span: &SourceSpan, code: ErrorCode, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(span.clone(), code, msg));
    }

    fn declare(&mut self, decl: &Decl) {
        if self.symbols.contains_key(&decl.name) {
            self.report(
                &decl.span,
                ErrorCode::Redeclared,
                format!("`{}` is already declared; the subset uses one flat namespace", decl.name),
            );
            return;
        }
        if decl.dims.len() > 3 {
            self.report(
                &decl.span,
                ErrorCode::DimLimit,
                format!("`{}` has {} dimensions; at most 3 are supported", decl.name, decl.dims.len()),
            );
        }
        let mut dims = Vec::new();
        for ext in &decl.dims {
            match ext {
                Extent::Const(n) => {
                    if *n <= 0 {
                        self.report(
                            &decl.span,
                            ErrorCode::Type,
                            format!("array extent of `{}` must be positive", decl.name),
                        );
                    }
                    dims.push((*n).max(1));
                }
                Extent::Dynamic(span) => {
                    self.report(
                        span,
                        ErrorCode::DynExtent,
                        format!("array extent of `{}` must be a compile-time constant", decl.name),
                    );
                    dims.push(1);
                }
            }
        }
        self.symbols.insert(
            decl.name.clone(),
            SymbolInfo {
                base: decl.base,
                dims,
                order: self.order,
                span: decl.span.clone(),
            },
        );
        self.order += 1;
    }

    fn lookup(&mut self, name: &str, span: &SourceSpan) -> Option<SymbolInfo> {
        match self.symbols.get(name) {
            Some(info) => Some(info.clone()),
            None => {
                self.report(
                    span,
                    ErrorCode::Undeclared,
                    format!("`{name}` is not declared before this use"),
                );
                None
            }
        }
    }

    /// Returns the scalar type of an expression, reporting type misuses.
    fn type_of(&mut self, expr: &Expr) -> Option<BaseType> {
        match expr {
            Expr::IntLit(..) => Some(BaseType::Int),
            Expr::FloatLit(..) => Some(BaseType::Double),
            Expr::Var(name, span) => {
                let info = self.lookup(name, span)?;
                if !info.is_scalar() {
                    self.report(
                        span,
                        ErrorCode::Type,
                        format!("array `{name}` used where a scalar value is required"),
                    );
                    return None;
                }
                Some(info.base)
            }
            Expr::ArrayRef { name, indices, span } => {
                let info = self.lookup(name, span)?;
                if info.is_scalar() {
                    self.report(span, ErrorCode::Type, format!("`{name}` is not an array"));
                    return None;
                }
                if indices.len() != info.dims.len() {
                    self.report(
                        span,
                        ErrorCode::Type,
                        format!(
                            "`{name}` has {} dimensions but is indexed with {}",
                            info.dims.len(),
                            indices.len()
                        ),
                    );
                }
                for ix in indices {
                    if let Some(t) = self.type_of(ix) {
                        if t != BaseType::Int {
                            self.report(
                                ix.span(),
                                ErrorCode::Type,
                                "array indices must be int expressions",
                            );
                        }
                    }
                }
                Some(info.base)
            }
            Expr::Binary { op, lhs, rhs, span } => {
                let lt = self.type_of(lhs);
                let rt = self.type_of(rhs);
                if *op == BinOp::Rem {
                    if lt.is_some_and(|t| t != BaseType::Int)
                        || rt.is_some_and(|t| t != BaseType::Int)
                    {
                        self.report(span, ErrorCode::Type, "`%` requires int operands");
                    }
                    return Some(BaseType::Int);
                }
                match op {
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => {
                        Some(BaseType::Int)
                    }
                    _ => match (lt?, rt?) {
                        (BaseType::Double, _) | (_, BaseType::Double) => Some(BaseType::Double),
                        (BaseType::Float, _) | (_, BaseType::Float) => Some(BaseType::Float),
                        _ => Some(BaseType::Int),
                    },
                }
            }
        }
    }

    fn check_int_bound(&mut self, expr: &Expr, what: &str) {
        if expr_contains_array_ref(expr) {
            self.report(
                expr.span(),
                ErrorCode::Type,
                format!("{what} must not reference array elements"),
            );
            return;
        }
        if let Some(t) = self.type_of(expr) {
            if t != BaseType::Int {
                self.report(expr.span(), ErrorCode::Type, format!("{what} must be int"));
            }
        }
    }

    fn check_block(&mut self, block: &Block, in_gpu: bool) {
        for stmt in &block.stmts {
            self.check_stmt(stmt, in_gpu);
        }
    }

    fn check_stmt(&mut self, stmt: &Stmt, in_gpu: bool) {
        match stmt {
            Stmt::Decl(decl) => {
                self.declare(decl);
                if let Some(init) = &decl.init {
                    if !decl.dims.is_empty() {
                        self.report(
                            &decl.span,
                            ErrorCode::Unsupported,
                            "array initializers are not supported",
                        );
                    }
                    self.type_of(init);
                }
            }
            Stmt::Assign(a) => {
                if a.lhs.indices.is_empty() {
                    if let Some(info) = self.lookup(&a.lhs.name, &a.lhs.span) {
                        if !info.is_scalar() {
                            self.report(
                                &a.lhs.span,
                                ErrorCode::Type,
                                format!("array `{}` cannot be assigned as a whole", a.lhs.name),
                            );
                        }
                    }
                } else {
                    let as_ref = Expr::ArrayRef {
                        name: a.lhs.name.clone(),
                        indices: a.lhs.indices.clone(),
                        span: a.lhs.span.clone(),
                    };
                    self.type_of(&as_ref);
                }
                if a.op != AssignOp::Assign {
                    // Compound assignment reads the target; `%=` never lexes,
                    // and `/=` on ints is ordinary int division.
                }
                self.type_of(&a.rhs);
            }
            Stmt::Print { var, span } => {
                if in_gpu {
                    self.report(
                        span,
                        ErrorCode::Unsupported,
                        "print is not supported inside a target block",
                    );
                }
                self.lookup(var, span);
            }
            Stmt::For(f) => self.check_for(f, in_gpu),
            Stmt::If(i) => {
                self.type_of(&i.cond);
                self.check_block(&i.then_block, in_gpu);
                if let Some(e) = &i.else_block {
                    self.check_block(e, in_gpu);
                }
            }
            Stmt::Compound(b) => self.check_block(b, in_gpu),
            Stmt::PragmaMarked { pragmas, body, span } => {
                let has_target_pragma = pragmas
                    .iter()
                    .any(|p| matches!(p, PragmaInfo::TargetDevice { .. }));
                let has_parallel_for = pragmas
                    .iter()
                    .any(|p| matches!(p, PragmaInfo::ParallelFor { .. }));
                if has_target_pragma && !has_parallel_for {
                    self.report(
                        span,
                        ErrorCode::BadPragma,
                        "`omp target device` must be followed by `omp parallel for`",
                    );
                }
                let is_gpu = pragma_targets_hmpp(pragmas);
                if is_gpu && in_gpu {
                    self.report(
                        span,
                        ErrorCode::NestedTarget,
                        "target blocks cannot be nested inside another target block",
                    );
                }
                match body.as_ref() {
                    Stmt::For(f) => {
                        if is_gpu {
                            if f.body.stmts.is_empty() {
                                self.report(
                                    span,
                                    ErrorCode::EmptyBlock,
                                    "target block has an empty loop body",
                                );
                            }
                            self.check_index_writes(f);
                        }
                        self.check_for(f, in_gpu || is_gpu);
                    }
                    _ => self.report(span, ErrorCode::BadPragma, "pragma must mark a for loop"),
                }
            }
            Stmt::Call(c) => {
                self.report(
                    &c.span,
                    ErrorCode::Unsupported,
                    "function calls are not supported in input programs",
                );
            }
            Stmt::Directive(d) => {
                self.report(
                    &d.span,
                    ErrorCode::Unsupported,
                    "hmpp directives are not supported in input programs",
                );
            }
        }
    }

    fn check_for(&mut self, f: &ForStmt, in_gpu: bool) {
        if let Some(info) = self.lookup(&f.index, &f.span) {
            if !info.is_scalar() || info.base != BaseType::Int {
                self.report(
                    &f.span,
                    ErrorCode::Type,
                    format!("loop index `{}` must be a declared int scalar", f.index),
                );
            }
        }
        self.check_int_bound(&f.lower, "loop lower bound");
        self.check_int_bound(&f.upper, "loop upper bound");
        self.check_block(&f.body, in_gpu);
    }

    /// Writes to any loop index of (or inside) a marked loop break the
    /// canonical iteration space the offload relies on.
    fn check_index_writes(&mut self, marked: &ForStmt) {
        let mut indices = vec![marked.index.clone()];
        collect_loop_indices(&marked.body, &mut indices);
        let check = |block: &Block, this: &mut Validator| {
            visit_assigns(block, &mut |a| {
                if indices.contains(&a.lhs.name) {
                    this.report(
                        &a.span,
                        ErrorCode::IndexWrite,
                        format!("target block writes its loop index `{}`", a.lhs.name),
                    );
                }
            });
        };
        check(&marked.body, self);
    }
}

fn collect_loop_indices(block: &Block, out: &mut Vec<String>) {
    for stmt in &block.stmts {
        match stmt {
            Stmt::For(f) => {
                out.push(f.index.clone());
                collect_loop_indices(&f.body, out);
            }
            Stmt::If(i) => {
                collect_loop_indices(&i.then_block, out);
                if let Some(e) = &i.else_block {
                    collect_loop_indices(e, out);
                }
            }
            Stmt::Compound(b) => collect_loop_indices(b, out),
            Stmt::PragmaMarked { body, .. } => {
                if let Stmt::For(f) = body.as_ref() {
                    out.push(f.index.clone());
                    collect_loop_indices(&f.body, out);
                }
            }
            _ => {}
        }
    }
}

fn visit_assigns(block: &Block, f: &mut impl FnMut(&AssignStmt)) {
    for stmt in &block.stmts {
        match stmt {
            Stmt::Assign(a) => f(a),
            Stmt::For(fo) => visit_assigns(&fo.body, f),
            Stmt::If(i) => {
                visit_assigns(&i.then_block, f);
                if let Some(e) = &i.else_block {
                    visit_assigns(e, f);
                }
            }
            Stmt::Compound(b) => visit_assigns(b, f),
            Stmt::PragmaMarked { body, .. } => {
                if let Stmt::For(fo) = body.as_ref() {
                    visit_assigns(&fo.body, f);
                }
            }
            _ => {}
        }
    }
}

fn expr_contains_array_ref(expr: &Expr) -> bool {
    match expr {
        Expr::ArrayRef { .. } => true,
        Expr::Binary { lhs, rhs, .. } => {
            expr_contains_array_ref(lhs) || expr_contains_array_ref(rhs)
        }
        _ => false,
    }
}

/// Check an input program against the accepted subset. Returns every finding
/// in traversal order; an empty list means the unit is ready for translation.
pub fn validate_subset(unit: &TranslationUnit) -> Vec<Diagnostic> {
    let mut v = Validator {
        diags: Vec::new(),
        symbols: BTreeMap::new(),
        order: 0,
    };
    if !unit.groups.is_empty() {
        for g in &unit.groups {
            v.report(
                &g.span,
                ErrorCode::Unsupported,
                "hmpp group pragmas are not supported in input programs",
            );
        }
    }
    let mut main_seen = false;
    for func in &unit.functions {
        if func.name == "main" {
            if main_seen {
                v.report(&func.span, ErrorCode::Redeclared, "duplicate definition of `main`");
                continue;
            }
            main_seen = true;
            if !func.returns_int {
                v.report(&func.span, ErrorCode::Type, "`main` must return int");
            }
            if !func.params.is_empty() {
                v.report(
                    &func.span,
                    ErrorCode::Unsupported,
                    "`main` must not take parameters",
                );
            }
        } else {
            v.report(
                &func.span,
                ErrorCode::Unsupported,
                format!("function definitions other than `main` are not supported (`{}`)", func.name),
            );
        }
    }
    if !main_seen {
        let span = unit
            .functions
            .first()
            .map(|f| f.span.clone())
            .unwrap_or_else(|| SourceSpan::new(unit.file.clone(), 1, 1));
        v.report(&span, ErrorCode::NoMain, "program must define `int main()`");
    }
    for decl in &unit.global_decls {
        v.declare(decl);
        if let Some(init) = &decl.init {
            v.type_of(init);
        }
    }
    if let Some(main) = unit.main() {
        let body = main.body.clone();
        v.check_block(&body, false);
    }
    v.diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    fn validate(src: &str) -> Vec<Diagnostic> {
        validate_subset(&parse_source(src, "t.c").unwrap())
    }

    const CLEAN: &str = "int main() {\n  int i;\n  int n;\n  double A[4];\n  double C[4];\n  n = 4;\n\
        for (i = 0; i < n; i++) { A[i] = i * 1.5; }\n\
        #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
        for (i = 0; i < n; i++) { C[i] = A[i] * 2.0; }\n\
        print(C);\n}";

    #[test]
    fn clean_program_validates() {
        assert_eq!(validate(CLEAN), vec![]);
    }

    #[test]
    fn finds_blocks_in_source_order() {
        let unit = parse_source(CLEAN, "t.c").unwrap();
        let blocks = find_gpu_blocks(&unit);
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].index, 0);
    }

    #[test]
    fn no_pragmas_means_no_blocks() {
        let unit = parse_source("int main() { int a; a = 1; }", "t.c").unwrap();
        assert!(find_gpu_blocks(&unit).is_empty());
    }

    #[test]
    fn plain_parallel_for_is_not_a_gpu_block() {
        let src = "int main() { int i; int n; double A[4]; n = 4;\n\
            #pragma omp parallel for\nfor (i = 0; i < n; i++) { A[i] = 1.0; } }";
        let unit = parse_source(src, "t.c").unwrap();
        assert!(find_gpu_blocks(&unit).is_empty());
        assert_eq!(validate_subset(&unit), vec![]);
    }

    #[test]
    fn dynamic_extent_reported() {
        let diags = validate("int main() { int n; n = 4; int a[n]; }");
        assert!(diags.iter().any(|d| d.code == ErrorCode::DynExtent));
    }

    #[test]
    fn index_write_in_marked_loop() {
        let src = "int main() { int i; int n; double A[4]; n = 4;\n\
            #pragma omp parallel for device(hmpp)\n\
            for (i = 0; i < n; i++) { A[i] = 1.0; i = 0; } }";
        let diags = validate(src);
        assert!(diags.iter().any(|d| d.code == ErrorCode::IndexWrite));
    }

    #[test]
    fn nested_target_rejected() {
        let src = "int main() { int i; int j; int n; double A[4]; n = 4;\n\
            #pragma omp parallel for device(hmpp)\n\
            for (i = 0; i < n; i++) {\n\
              #pragma omp parallel for device(hmpp)\n\
              for (j = 0; j < n; j++) { A[j] = 1.0; }\n\
            } }";
        let diags = validate(src);
        assert!(diags.iter().any(|d| d.code == ErrorCode::NestedTarget));
    }

    #[test]
    fn undeclared_and_redeclared() {
        let diags = validate("int main() { int a; int a; b = 1; }");
        assert!(diags.iter().any(|d| d.code == ErrorCode::Redeclared));
        assert!(diags.iter().any(|d| d.code == ErrorCode::Undeclared));
    }

    #[test]
    fn four_dims_rejected() {
        let diags = validate("int main() { int a[2][2][2][2]; }");
        assert!(diags.iter().any(|d| d.code == ErrorCode::DimLimit));
    }

    #[test]
    fn diagnostics_are_deterministic() {
        let src = "int main() { int a; int a; b = 1; c = 2; }";
        assert_eq!(validate(src), validate(src));
    }
}
