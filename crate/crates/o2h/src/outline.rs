//! Extraction of marked loops into codelet functions.
//!
//! Each GPU block becomes a `void` function whose parameters are the block's
//! free variables: scalars first, then arrays, both in declaration order.
//! Loop indices used inside the block are re-declared as codelet locals and
//! never become parameters. Scalar parameters are passed by value when the
//! block only reads them; written scalars are promoted to single-element
//! arrays so the call-by-reference effect stays expressible in the subset.

use crate::analysis::{AccessEvent, AccessKind, Host, Timelines};
use crate::ast::*;
use crate::span::SourceSpan;
use crate::validate::{collect_symbols, GpuBlock, SymbolInfo};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub base: BaseType,
    pub dims: Vec<i64>,
    pub intent: Intent,
    /// Scalar promoted to a one-element array because the block writes it.
    pub promoted: bool,
}

impl ParamSpec {
    /// Parameters that live in device memory and therefore participate in
    /// transfer planning. By-value scalars are materialized at the callsite.
    pub fn device_resident(&self) -> bool {
        !self.dims.is_empty()
    }

    pub fn byte_size(&self) -> u64 {
        self.dims.iter().product::<i64>().max(1) as u64 * self.base.size_bytes()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodeletSpec {
    pub label: String,
    pub function_name: String,
    pub params: Vec<ParamSpec>,
    /// Function body: local index declarations followed by the original loop.
    pub body: Block,
    pub block_index: usize,
    pub callsite_path: NestPath,
    pub span: SourceSpan,
}

impl CodeletSpec {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Deterministic label scheme: `o2h_<function>_b<index>`.
pub fn label_for(function_name: &str, block_index: usize) -> String {
    format!("o2h_{function_name}_b{block_index}")
}

fn marked_for<'a>(unit: &'a TranslationUnit, block: &GpuBlock) -> &'a ForStmt {
    let main = unit.main().expect("validated unit has main");
    match block.path.resolve(&main.body) {
        Some(Stmt::PragmaMarked { body, .. }) => match body.as_ref() {
            Stmt::For(f) => f,
            _ => unreachable!("pragma always marks a for loop"),
        },
        _ => unreachable!("gpu block path resolves to its marked loop"),
    }
}

/// Indices of every loop inside a marked loop, including its own. These are
/// private to the block: outlining re-declares them inside the codelet.
pub(crate) fn loop_indices(f: &ForStmt) -> Vec<String> {
    let mut out = vec![f.index.clone()];
    collect_indices(&f.body, &mut out);
    out
}

fn collect_indices(block: &Block, out: &mut Vec<String>) {
    for stmt in &block.stmts {
        match stmt {
            Stmt::For(f) => {
                if !out.contains(&f.index) {
                    out.push(f.index.clone());
                }
                collect_indices(&f.body, out);
            }
            Stmt::If(i) => {
                collect_indices(&i.then_block, out);
                if let Some(e) = &i.else_block {
                    collect_indices(e, out);
                }
            }
            Stmt::Compound(b) => collect_indices(b, out),
            _ => {}
        }
    }
}

fn locals_declared(block: &Block, out: &mut Vec<String>) {
    for stmt in &block.stmts {
        match stmt {
            Stmt::Decl(d) => out.push(d.name.clone()),
            Stmt::For(f) => locals_declared(&f.body, out),
            Stmt::If(i) => {
                locals_declared(&i.then_block, out);
                if let Some(e) = &i.else_block {
                    locals_declared(e, out);
                }
            }
            Stmt::Compound(b) => locals_declared(b, out),
            _ => {}
        }
    }
}

fn referenced_names(f: &ForStmt) -> Vec<String> {
    let mut out = Vec::new();
    let push = |name: String, out: &mut Vec<String>| {
        if !out.contains(&name) {
            out.push(name);
        }
    };
    for v in f.lower.variables() {
        push(v, &mut out);
    }
    for v in f.upper.variables() {
        push(v, &mut out);
    }
    collect_refs(&f.body, &mut out);
    out
}

fn collect_refs(block: &Block, out: &mut Vec<String>) {
    let push = |name: String, out: &mut Vec<String>| {
        if !out.contains(&name) {
            out.push(name);
        }
    };
    for stmt in &block.stmts {
        match stmt {
            Stmt::Assign(a) => {
                push(a.lhs.name.clone(), out);
                for ix in &a.lhs.indices {
                    for v in ix.variables() {
                        push(v, out);
                    }
                }
                for v in a.rhs.variables() {
                    push(v, out);
                }
            }
            Stmt::Decl(d) => {
                if let Some(init) = &d.init {
                    for v in init.variables() {
                        push(v, out);
                    }
                }
            }
            Stmt::For(f) => {
                for v in f.lower.variables() {
                    push(v, out);
                }
                for v in f.upper.variables() {
                    push(v, out);
                }
                collect_refs(&f.body, out);
            }
            Stmt::If(i) => {
                for v in i.cond.variables() {
                    push(v, out);
                }
                collect_refs(&i.then_block, out);
                if let Some(e) = &i.else_block {
                    collect_refs(e, out);
                }
            }
            Stmt::Compound(b) => collect_refs(b, out),
            Stmt::Print { var, .. } => push(var.clone(), out),
            Stmt::PragmaMarked { .. } | Stmt::Call(_) | Stmt::Directive(_) => {}
        }
    }
}

/// Free variables of a block: everything referenced that is declared outside
/// it, excluding loop indices of the block's own loops. Scalars come first
/// and arrays second, each group in declaration order.
pub fn free_variables(unit: &TranslationUnit, block: &GpuBlock) -> Vec<String> {
    let symbols = collect_symbols(unit);
    free_variables_with(unit, block, &symbols)
}

fn free_variables_with(
    unit: &TranslationUnit,
    block: &GpuBlock,
    symbols: &BTreeMap<String, SymbolInfo>,
) -> Vec<String> {
    let f = marked_for(unit, block);
    let indices = loop_indices(f);
    let mut locals = Vec::new();
    locals_declared(&f.body, &mut locals);
    let mut free: Vec<&SymbolInfo> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for name in referenced_names(f) {
        if indices.contains(&name) || locals.contains(&name) {
            continue;
        }
        if let Some(info) = symbols.get(&name) {
            free.push(info);
            names.push(name);
        }
    }
    let mut scalars: Vec<(usize, String)> = Vec::new();
    let mut arrays: Vec<(usize, String)> = Vec::new();
    for (info, name) in free.iter().zip(names.iter()) {
        if info.is_scalar() {
            scalars.push((info.order, name.clone()));
        } else {
            arrays.push((info.order, name.clone()));
        }
    }
    scalars.sort();
    arrays.sort();
    scalars
        .into_iter()
        .chain(arrays)
        .map(|(_, name)| name)
        .collect()
}

fn events_in_block<'a>(
    timelines: &'a Timelines,
    var: &str,
    block: &GpuBlock,
) -> Vec<&'a AccessEvent> {
    timelines
        .get(var)
        .map(|tl| {
            tl.events
                .iter()
                .filter(|e| e.host == Host::Gpu(block.index))
                .collect()
        })
        .unwrap_or_default()
}

/// True if the event sits under a conditional *within* the block.
fn conditional_within(event: &AccessEvent, block: &GpuBlock) -> bool {
    event.point.0[block.path.len()..]
        .iter()
        .any(|s| matches!(s.kind, BlockKind::Then | BlockKind::Else))
}

/// In: the block never writes the variable. Out: the block's first access is
/// an unconditional write, which is taken as a full definition. Everything
/// else — including conditional first writes — is InOut.
pub fn classify_intent(var: &str, block: &GpuBlock, timelines: &Timelines) -> Intent {
    let events = events_in_block(timelines, var, block);
    let any_write = events.iter().any(|e| e.kind == AccessKind::Write);
    if !any_write {
        return Intent::In;
    }
    match events.first() {
        Some(first)
            if first.kind == AccessKind::Write && !conditional_within(first, block) =>
        {
            Intent::Out
        }
        _ => Intent::InOut,
    }
}

fn rewrite_promoted_expr(expr: &mut Expr, promoted: &[String]) {
    match expr {
        Expr::Var(name, span) => {
            if promoted.contains(name) {
                let span = span.clone();
                let name = name.clone();
                *expr = Expr::ArrayRef {
                    name,
                    indices: vec![Expr::IntLit(0, span.clone())],
                    span,
                };
            }
        }
        Expr::ArrayRef { indices, .. } => {
            for ix in indices {
                rewrite_promoted_expr(ix, promoted);
            }
        }
        Expr::Binary { lhs, rhs, .. } => {
            rewrite_promoted_expr(lhs, promoted);
            rewrite_promoted_expr(rhs, promoted);
        }
        _ => {}
    }
}

fn rewrite_promoted_block(block: &mut Block, promoted: &[String]) {
    for stmt in &mut block.stmts {
        match stmt {
            Stmt::Assign(a) => {
                if promoted.contains(&a.lhs.name) && a.lhs.indices.is_empty() {
                    a.lhs.indices = vec![Expr::IntLit(0, a.lhs.span.clone())];
                }
                for ix in &mut a.lhs.indices {
                    rewrite_promoted_expr(ix, promoted);
                }
                rewrite_promoted_expr(&mut a.rhs, promoted);
            }
            Stmt::Decl(d) => {
                if let Some(init) = &mut d.init {
                    rewrite_promoted_expr(init, promoted);
                }
            }
            Stmt::For(f) => {
                rewrite_promoted_expr(&mut f.lower, promoted);
                rewrite_promoted_expr(&mut f.upper, promoted);
                rewrite_promoted_block(&mut f.body, promoted);
            }
            Stmt::If(i) => {
                rewrite_promoted_expr(&mut i.cond, promoted);
                rewrite_promoted_block(&mut i.then_block, promoted);
                if let Some(e) = &mut i.else_block {
                    rewrite_promoted_block(e, promoted);
                }
            }
            Stmt::Compound(b) => rewrite_promoted_block(b, promoted),
            _ => {}
        }
    }
}

/// Outline one block into a codelet plus the call statement that replaces it.
pub fn outline(
    unit: &TranslationUnit,
    block: &GpuBlock,
    timelines: &Timelines,
) -> (CodeletSpec, CallStmt) {
    let symbols = collect_symbols(unit);
    let func_name = "main";
    let label = label_for(func_name, block.index);
    let loop_stmt = marked_for(unit, block);
    debug_assert!(
        !loop_stmt.body.stmts.is_empty(),
        "empty blocks are rejected by validation"
    );

    let mut params = Vec::new();
    for name in free_variables_with(unit, block, &symbols) {
        let info = &symbols[&name];
        let intent = classify_intent(&name, block, timelines);
        let promoted = info.is_scalar() && intent.writes();
        let dims = if promoted { vec![1] } else { info.dims.clone() };
        params.push(ParamSpec {
            name,
            base: info.base,
            dims,
            intent,
            promoted,
        });
    }

    let promoted: Vec<String> = params
        .iter()
        .filter(|p| p.promoted)
        .map(|p| p.name.clone())
        .collect();
    let mut body_loop = loop_stmt.clone();
    if !promoted.is_empty() {
        rewrite_promoted_expr(&mut body_loop.lower, &promoted);
        rewrite_promoted_expr(&mut body_loop.upper, &promoted);
        rewrite_promoted_block(&mut body_loop.body, &promoted);
    }

    let gen = SourceSpan::generated();
    let mut stmts: Vec<Stmt> = loop_indices(loop_stmt)
        .into_iter()
        .map(|name| {
            Stmt::Decl(Decl {
                name,
                base: BaseType::Int,
                dims: Vec::new(),
                init: None,
                span: gen.clone(),
            })
        })
        .collect();
    stmts.push(Stmt::For(body_loop));

    let callsite = CallStmt {
        callee: label.clone(),
        args: params
            .iter()
            .map(|p| Expr::Var(p.name.clone(), gen.clone()))
            .collect(),
        pragma: None,
        span: block.span.clone(),
    };

    let spec = CodeletSpec {
        function_name: label.clone(),
        label,
        params,
        body: Block {
            stmts,
            span: gen,
        },
        block_index: block.index,
        callsite_path: block.path.clone(),
        span: block.span.clone(),
    };
    (spec, callsite)
}

fn replace_at(block: &mut Block, path: &[PathStep], replacement: Stmt) {
    let step = path[0];
    if path.len() == 1 {
        block.stmts[step.index] = replacement;
        return;
    }
    let stmt = &mut block.stmts[step.index];
    let next = &path[1];
    let inner: &mut Block = match (stmt, next.kind) {
        (Stmt::Compound(b), BlockKind::Compound) => b,
        (Stmt::For(f), BlockKind::ForBody) => &mut f.body,
        (Stmt::PragmaMarked { body, .. }, BlockKind::ForBody) => match body.as_mut() {
            Stmt::For(f) => &mut f.body,
            _ => unreachable!(),
        },
        (Stmt::If(i), BlockKind::Then) => &mut i.then_block,
        (Stmt::If(i), BlockKind::Else) => i.else_block.as_mut().expect("else branch exists"),
        _ => unreachable!("path does not match tree shape"),
    };
    replace_at(inner, &path[1..], replacement);
}

/// Outline every block and rewrite main so each marked loop becomes a call.
/// Statement paths are preserved one-for-one by the rewrite.
pub fn outline_all(
    unit: &TranslationUnit,
    blocks: &[GpuBlock],
    timelines: &Timelines,
) -> (Vec<CodeletSpec>, TranslationUnit) {
    let mut rewritten = unit.clone();
    let mut codelets = Vec::new();
    for block in blocks {
        let (spec, callsite) = outline(unit, block, timelines);
        let main = rewritten
            .functions
            .iter_mut()
            .find(|f| f.name == "main")
            .expect("validated unit has main");
        replace_at(&mut main.body, &block.path.0, Stmt::Call(callsite));
        codelets.push(spec);
    }
    (codelets, rewritten)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_access_timeline;
    use crate::parser::parse_source;
    use crate::validate::find_gpu_blocks;

    const FIG1_LIKE: &str = "int main() {\n  int i;\n  int n;\n  double A[4];\n  double C[4];\n  n = 4;\n\
        for (i = 0; i < n; i++) { A[i] = i * 1.5; }\n\
        #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
        for (i = 0; i < n; i++) { C[i] = A[i] * 2.0; }\n\
        print(C);\n}";

    fn setup(src: &str) -> (TranslationUnit, Vec<GpuBlock>, Timelines) {
        let unit = parse_source(src, "t.c").unwrap();
        let blocks = find_gpu_blocks(&unit);
        let timelines = build_access_timeline(&unit, &blocks);
        (unit, blocks, timelines)
    }

    #[test]
    fn label_scheme() {
        assert_eq!(label_for("main", 0), "o2h_main_b0");
        assert_eq!(label_for("main", 2), "o2h_main_b2");
        assert_ne!(label_for("main", 0), label_for("main", 1));
    }

    #[test]
    fn free_variables_ordered_scalars_then_arrays() {
        let (unit, blocks, _) = setup(FIG1_LIKE);
        assert_eq!(free_variables(&unit, &blocks[0]), vec!["n", "A", "C"]);
    }

    #[test]
    fn block_with_only_bound_and_literals() {
        let src = "int main() { int i; int n; double A[4]; n = 4;\n\
            #pragma omp parallel for device(hmpp)\n\
            for (i = 0; i < n; i++) { A[i] = 1.0; }\nprint(A);\n}";
        let (unit, blocks, _) = setup(src);
        assert_eq!(free_variables(&unit, &blocks[0]), vec!["n", "A"]);
    }

    #[test]
    fn intents_for_single_kernel() {
        let (_, blocks, timelines) = setup(FIG1_LIKE);
        assert_eq!(classify_intent("A", &blocks[0], &timelines), Intent::In);
        assert_eq!(classify_intent("C", &blocks[0], &timelines), Intent::Out);
        assert_eq!(classify_intent("n", &blocks[0], &timelines), Intent::In);
    }

    #[test]
    fn accumulation_is_inout() {
        let src = "int main() { int i; int j; int n; double E[2][2]; double A[2][2]; n = 2;\n\
            for (i = 0; i < n; i++) { for (j = 0; j < n; j++) { E[i][j] = 0.0; A[i][j] = 1.0; } }\n\
            #pragma omp parallel for device(hmpp)\n\
            for (i = 0; i < n; i++) { for (j = 0; j < n; j++) { E[i][j] += A[i][j]; } }\n\
            print(E);\n}";
        let (_, blocks, timelines) = setup(src);
        assert_eq!(classify_intent("E", &blocks[0], &timelines), Intent::InOut);
    }

    #[test]
    fn first_write_then_accumulate_is_out() {
        let src = "int main() { int i; int j; int n; double E[2][2]; double A[2][2]; n = 2;\n\
            for (i = 0; i < n; i++) { for (j = 0; j < n; j++) { A[i][j] = 1.0; } }\n\
            #pragma omp parallel for device(hmpp)\n\
            for (i = 0; i < n; i++) { for (j = 0; j < n; j++) {\n\
              E[i][j] = 0.0; E[i][j] += A[i][j]; } }\n\
            print(E);\n}";
        let (_, blocks, timelines) = setup(src);
        assert_eq!(classify_intent("E", &blocks[0], &timelines), Intent::Out);
    }

    #[test]
    fn conditional_first_write_is_inout() {
        let src = "int main() { int i; int n; double A[4]; double C[4]; n = 4;\n\
            for (i = 0; i < n; i++) { A[i] = 1.0; C[i] = 0.0; }\n\
            #pragma omp parallel for device(hmpp)\n\
            for (i = 0; i < n; i++) { if (A[i] > 0.5) { C[i] = A[i]; } }\n\
            print(C);\n}";
        let (_, blocks, timelines) = setup(src);
        assert_eq!(classify_intent("C", &blocks[0], &timelines), Intent::InOut);
    }

    #[test]
    fn outline_builds_codelet_and_callsite() {
        let (unit, blocks, timelines) = setup(FIG1_LIKE);
        let (spec, callsite) = outline(&unit, &blocks[0], &timelines);
        assert_eq!(spec.label, "o2h_main_b0");
        assert_eq!(
            spec.params.iter().map(|p| p.name.as_str()).collect::<Vec<_>>(),
            vec!["n", "A", "C"]
        );
        assert_eq!(callsite.callee, "o2h_main_b0");
        assert_eq!(callsite.args.len(), 3);
        // Body re-declares the index, then holds the loop.
        assert!(matches!(&spec.body.stmts[0], Stmt::Decl(d) if d.name == "i"));
        assert!(matches!(&spec.body.stmts[1], Stmt::For(_)));
    }

    #[test]
    fn promoted_scalar_rewrites_body() {
        let src = "int main() { int i; int n; double s; double x[4]; n = 4;\n\
            for (i = 0; i < n; i++) { x[i] = 1.0; }\n\
            s = 0.0;\n\
            #pragma omp parallel for device(hmpp)\n\
            for (i = 0; i < n; i++) { s += x[i]; }\n\
            print(s);\n}";
        let (unit, blocks, timelines) = setup(src);
        let (spec, _) = outline(&unit, &blocks[0], &timelines);
        let s = spec.param("s").unwrap();
        assert_eq!(s.intent, Intent::InOut);
        assert!(s.promoted);
        assert_eq!(s.dims, vec![1]);
        // The loop body now accumulates into s[0].
        match &spec.body.stmts[1] {
            Stmt::For(f) => match &f.body.stmts[0] {
                Stmt::Assign(a) => {
                    assert_eq!(a.lhs.indices.len(), 1);
                }
                other => panic!("unexpected body stmt {other:?}"),
            },
            other => panic!("unexpected stmt {other:?}"),
        }
    }

    #[test]
    fn outline_all_replaces_marked_loops() {
        let (unit, blocks, timelines) = setup(FIG1_LIKE);
        let (codelets, rewritten) = outline_all(&unit, &blocks, &timelines);
        assert_eq!(codelets.len(), 1);
        let main = rewritten.main().unwrap();
        let replaced = blocks[0].path.resolve(&main.body).unwrap();
        assert!(matches!(replaced, Stmt::Call(c) if c.callee == "o2h_main_b0"));
    }
}
