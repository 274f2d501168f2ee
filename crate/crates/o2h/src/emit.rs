//! Rendering of programs and application of transfer plans.
//!
//! `apply_plan` materializes a planned translation as an AST: the group
//! declaration, one codelet function per block, callsite pragmas on the
//! rewritten calls, and every transfer directive spliced in at its insertion
//! anchor. `pretty_print` renders any unit — plain or transformed — in the
//! fixed format the golden files lock down. Directives sharing one anchor
//! render in a fixed order: synchronize, advancedloads, the statement,
//! delegatestores, release.

use crate::ast::*;
use crate::diag::{Diagnostic, ErrorCode};
use crate::outline::CodeletSpec;
use crate::plan::{directive_class, TransferDirective, TransferPlan};
use crate::span::SourceSpan;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub struct EmitConfig {
    pub target_name: String,
    pub indent_width: usize,
}

impl Default for EmitConfig {
    fn default() -> Self {
        EmitConfig {
            target_name: "CUDA".to_string(),
            indent_width: 2,
        }
    }
}

// ---------------------------------------------------------------------------
// Plan application
// ---------------------------------------------------------------------------

fn anchor_lost(directive: &TransferDirective) -> Diagnostic {
    Diagnostic::new(
        SourceSpan::generated(),
        ErrorCode::AnchorLost,
        format!(
            "internal error: directive {} {:?} lost its anchor {}",
            directive.kind.keyword(),
            directive.var,
            directive.at.anchor
        ),
    )
}

struct Splicer<'a> {
    group: String,
    plan: &'a TransferPlan,
    codelets: &'a [CodeletSpec],
    placed: usize,
}

impl<'a> Splicer<'a> {
    fn directives_at(&self, path: &NestPath, edge: Edge) -> Vec<&'a TransferDirective> {
        let mut found: Vec<&TransferDirective> = self
            .plan
            .directives
            .iter()
            .filter(|d| d.at.anchor == *path && d.at.edge == edge)
            .collect();
        found.sort_by_key(|d| (directive_class(d.kind), d.label.clone(), d.var.clone()));
        found
    }

    fn directive_stmt(&self, d: &TransferDirective) -> Stmt {
        let label = match d.kind {
            DirectiveKind::Release => None,
            _ => Some(d.label.clone()),
        };
        Stmt::Directive(DirectiveStmt {
            group: self.group.clone(),
            label,
            kind: d.kind,
            var: d.var.clone(),
            span: SourceSpan::generated(),
        })
    }

    fn splice_block(&mut self, block: &Block, path: &NestPath, kind: BlockKind) -> Block {
        let mut stmts = Vec::with_capacity(block.stmts.len());
        for (index, stmt) in block.stmts.iter().enumerate() {
            let here = path.child(index, kind);
            for d in self.directives_at(&here, Edge::Before) {
                stmts.push(self.directive_stmt(d));
                self.placed += 1;
            }
            stmts.push(self.splice_stmt(stmt, &here));
            for d in self.directives_at(&here, Edge::After) {
                stmts.push(self.directive_stmt(d));
                self.placed += 1;
            }
        }
        Block {
            stmts,
            span: block.span.clone(),
        }
    }

    fn splice_stmt(&mut self, stmt: &Stmt, here: &NestPath) -> Stmt {
        match stmt {
            Stmt::Call(c) => {
                let mut call = c.clone();
                if let Some(codelet) = self.codelets.iter().find(|k| k.label == c.callee) {
                    call.pragma = Some(CallsitePragma {
                        group: self.group.clone(),
                        label: codelet.label.clone(),
                        asynchronous: self.plan.async_callsites.contains(&codelet.label),
                        noupdate: self
                            .plan
                            .noupdate
                            .get(&codelet.label)
                            .cloned()
                            .unwrap_or_default(),
                        span: SourceSpan::generated(),
                    });
                }
                Stmt::Call(call)
            }
            Stmt::For(f) => Stmt::For(ForStmt {
                body: self.splice_block(&f.body, here, BlockKind::ForBody),
                ..f.clone()
            }),
            Stmt::If(i) => Stmt::If(IfStmt {
                cond: i.cond.clone(),
                then_block: self.splice_block(&i.then_block, here, BlockKind::Then),
                else_block: i
                    .else_block
                    .as_ref()
                    .map(|e| self.splice_block(e, here, BlockKind::Else)),
                span: i.span.clone(),
            }),
            Stmt::Compound(b) => Stmt::Compound(self.splice_block(b, here, BlockKind::Compound)),
            Stmt::PragmaMarked { pragmas, body, span } => Stmt::PragmaMarked {
                pragmas: pragmas.clone(),
                body: Box::new(self.splice_stmt(body, here)),
                span: span.clone(),
            },
            other => other.clone(),
        }
    }
}

/// Build the transformed translation unit: group declaration, codelet
/// functions, and main with callsite pragmas and transfer directives
/// spliced in at their anchors.
pub fn apply_plan(
    rewritten: &TranslationUnit,
    codelets: &[CodeletSpec],
    plan: &TransferPlan,
) -> Result<TranslationUnit, Diagnostic> {
    let mut out = TranslationUnit {
        file: rewritten.file.clone(),
        groups: Vec::new(),
        global_decls: rewritten.global_decls.clone(),
        functions: Vec::new(),
    };
    let Some(group_name) = plan.group_name.clone() else {
        // No blocks: the transformed program is the input itself.
        out.functions = rewritten.functions.clone();
        return Ok(out);
    };
    let config = EmitConfig::default();
    out.groups.push(GroupPragma {
        name: group_name.clone(),
        target: config.target_name.clone(),
        mapbyname: plan.mapbyname.clone(),
        span: SourceSpan::generated(),
    });
    for codelet in codelets {
        let params = codelet
            .params
            .iter()
            .map(|p| Decl {
                name: p.name.clone(),
                base: p.base,
                dims: p.dims.iter().map(|d| Extent::Const(*d)).collect(),
                init: None,
                span: SourceSpan::generated(),
            })
            .collect();
        out.functions.push(FunctionDef {
            name: codelet.function_name.clone(),
            returns_int: false,
            params,
            body: codelet.body.clone(),
            codelet: Some(CodeletPragma {
                group: group_name.clone(),
                label: codelet.label.clone(),
                ios: codelet
                    .params
                    .iter()
                    .map(|p| (p.name.clone(), p.intent))
                    .collect(),
                span: SourceSpan::generated(),
            }),
            span: SourceSpan::generated(),
        });
    }
    for func in &rewritten.functions {
        let mut func = func.clone();
        if func.name == "main" {
            let mut splicer = Splicer {
                group: group_name.clone(),
                plan,
                codelets,
                placed: 0,
            };
            func.body = splicer.splice_block(&func.body, &NestPath::root(), BlockKind::Compound);
            if splicer.placed != plan.directives.len() {
                if let Some(lost) = plan.directives.iter().find(|d| {
                    d.at.anchor
                        .resolve(&rewritten.main().expect("main exists").body)
                        .is_none()
                }) {
                    return Err(anchor_lost(lost));
                }
                return Err(Diagnostic::new(
                    SourceSpan::generated(),
                    ErrorCode::AnchorLost,
                    format!(
                        "internal error: placed {} of {} directives",
                        splicer.placed,
                        plan.directives.len()
                    ),
                ));
            }
        }
        out.functions.push(func);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Pretty printing
// ---------------------------------------------------------------------------

struct Printer<'a> {
    out: String,
    config: &'a EmitConfig,
    indent: usize,
}

impl<'a> Printer<'a> {
    fn line(&mut self, text: &str) {
        for _ in 0..self.indent * self.config.indent_width {
            self.out.push(' ');
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn blank(&mut self) {
        self.out.push('\n');
    }

    fn type_and_dims(decl: &Decl) -> String {
        let mut s = format!("{} {}", decl.base.c_name(), decl.name);
        for d in &decl.dims {
            match d {
                Extent::Const(n) => {
                    let _ = write!(s, "[{n}]");
                }
                Extent::Dynamic(_) => s.push_str("[?]"),
            }
        }
        s
    }

    fn unit(&mut self, unit: &TranslationUnit) {
        let mut first = true;
        for group in &unit.groups {
            self.line(&render_group(group));
            first = false;
        }
        for decl in &unit.global_decls {
            self.line(&format!("{};", Self::type_and_dims(decl)));
            first = false;
        }
        for func in &unit.functions {
            if !first {
                self.blank();
            }
            first = false;
            self.function(func);
        }
    }

    fn function(&mut self, func: &FunctionDef) {
        if let Some(codelet) = &func.codelet {
            self.line(&render_codelet_pragma(codelet));
        }
        let ret = if func.returns_int { "int" } else { "void" };
        let params = func
            .params
            .iter()
            .map(Self::type_and_dims)
            .collect::<Vec<_>>()
            .join(", ");
        self.line(&format!("{} {}({}) {{", ret, func.name, params));
        self.indent += 1;
        for stmt in &func.body.stmts {
            self.stmt(stmt);
        }
        self.indent -= 1;
        self.line("}");
    }

    fn stmt(&mut self, stmt: &Stmt) {
        match stmt {
            Stmt::Decl(d) => {
                let mut s = Self::type_and_dims(d);
                if let Some(init) = &d.init {
                    let _ = write!(s, " = {}", render_expr(init));
                }
                s.push(';');
                self.line(&s);
            }
            Stmt::Assign(a) => {
                let mut lhs = a.lhs.name.clone();
                for ix in &a.lhs.indices {
                    let _ = write!(lhs, "[{}]", render_expr(ix));
                }
                self.line(&format!(
                    "{} {} {};",
                    lhs,
                    a.op.symbol(),
                    render_expr(&a.rhs)
                ));
            }
            Stmt::Print { var, .. } => self.line(&format!("print({var});")),
            Stmt::For(f) => self.for_stmt(f),
            Stmt::If(i) => {
                self.line(&format!("if ({}) {{", render_expr(&i.cond)));
                self.indent += 1;
                for s in &i.then_block.stmts {
                    self.stmt(s);
                }
                self.indent -= 1;
                if let Some(e) = &i.else_block {
                    self.line("} else {");
                    self.indent += 1;
                    for s in &e.stmts {
                        self.stmt(s);
                    }
                    self.indent -= 1;
                }
                self.line("}");
            }
            Stmt::Compound(b) => {
                self.line("{");
                self.indent += 1;
                for s in &b.stmts {
                    self.stmt(s);
                }
                self.indent -= 1;
                self.line("}");
            }
            Stmt::PragmaMarked { pragmas, body, .. } => {
                for p in pragmas {
                    self.line(&render_omp_pragma(p));
                }
                self.stmt(body);
            }
            Stmt::Call(c) => {
                if let Some(pragma) = &c.pragma {
                    self.line(&render_callsite_pragma(pragma));
                }
                let args = c
                    .args
                    .iter()
                    .map(render_expr)
                    .collect::<Vec<_>>()
                    .join(", ");
                self.line(&format!("{}({});", c.callee, args));
            }
            Stmt::Directive(d) => self.line(&render_directive_stmt(d)),
        }
    }

    fn for_stmt(&mut self, f: &ForStmt) {
        self.line(&format!(
            "for ({} = {}; {} < {}; {}++) {{",
            f.index,
            render_expr(&f.lower),
            f.index,
            render_expr(&f.upper),
            f.index
        ));
        self.indent += 1;
        for s in &f.body.stmts {
            self.stmt(s);
        }
        self.indent -= 1;
        self.line("}");
    }
}

fn render_expr(expr: &Expr) -> String {
    render_expr_prec(expr, 0)
}

fn render_expr_prec(expr: &Expr, min_prec: u8) -> String {
    match expr {
        Expr::IntLit(v, _) => v.to_string(),
        Expr::FloatLit(v, _) => format!("{v:?}"),
        Expr::Var(name, _) => name.clone(),
        Expr::ArrayRef { name, indices, .. } => {
            let mut s = name.clone();
            for ix in indices {
                let _ = write!(s, "[{}]", render_expr(ix));
            }
            s
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let prec = op.precedence();
            let text = format!(
                "{} {} {}",
                render_expr_prec(lhs, prec),
                op.symbol(),
                render_expr_prec(rhs, prec + 1)
            );
            if prec < min_prec {
                format!("({text})")
            } else {
                text
            }
        }
    }
}

fn render_omp_pragma(p: &PragmaInfo) -> String {
    match p {
        PragmaInfo::TargetDevice { device, .. } => {
            format!("#pragma omp target device({device})")
        }
        PragmaInfo::ParallelFor { device: None, .. } => "#pragma omp parallel for".to_string(),
        PragmaInfo::ParallelFor {
            device: Some(d), ..
        } => format!("#pragma omp parallel for device({d})"),
    }
}

fn render_group(g: &GroupPragma) -> String {
    let mut s = format!("#pragma hmpp <{}> group, target={}", g.name, g.target);
    if !g.mapbyname.is_empty() {
        let _ = write!(s, ", mapbyname={}", g.mapbyname.join(";"));
    }
    s
}

fn render_codelet_pragma(c: &CodeletPragma) -> String {
    let mut s = format!("#pragma hmpp <{}> {} codelet", c.group, c.label);
    for (var, intent) in &c.ios {
        let _ = write!(s, ", args[{var}].io={}", intent.as_str());
    }
    s
}

fn render_callsite_pragma(c: &CallsitePragma) -> String {
    let mut s = format!("#pragma hmpp <{}> {} callsite", c.group, c.label);
    if c.asynchronous {
        s.push_str(", asynchronous");
    }
    for var in &c.noupdate {
        let _ = write!(s, ", args[{var}].noupdate=true");
    }
    s
}

fn render_directive_stmt(d: &DirectiveStmt) -> String {
    match d.kind {
        DirectiveKind::Release => format!("#pragma hmpp <{}> release", d.group),
        DirectiveKind::Synchronize => format!(
            "#pragma hmpp <{}> {} synchronize",
            d.group,
            d.label.as_deref().unwrap_or("")
        ),
        DirectiveKind::AdvancedLoad | DirectiveKind::DelegateStore => format!(
            "#pragma hmpp <{}> {} {}, args[{}]",
            d.group,
            d.label.as_deref().unwrap_or(""),
            d.kind.keyword(),
            d.var.as_deref().unwrap_or("")
        ),
    }
}

/// Render one planned directive as its pragma line (without placement).
pub fn render_directive(d: &TransferDirective, group: &str) -> String {
    let label = match d.kind {
        DirectiveKind::Release => None,
        _ => Some(d.label.clone()),
    };
    render_directive_stmt(&DirectiveStmt {
        group: group.to_string(),
        label,
        kind: d.kind,
        var: d.var.clone(),
        span: SourceSpan::generated(),
    })
}

/// Render a whole unit in the canonical format. Deterministic: equal units
/// produce byte-identical text.
pub fn pretty_print(unit: &TranslationUnit, config: &EmitConfig) -> String {
    let mut printer = Printer {
        out: String::new(),
        config,
        indent: 0,
    };
    printer.unit(unit);
    printer.out
}

/// Full emission: apply the plan and render the result.
pub fn emit(
    rewritten: &TranslationUnit,
    codelets: &[CodeletSpec],
    plan: &TransferPlan,
    config: &EmitConfig,
) -> Result<String, Diagnostic> {
    let transformed = apply_plan(rewritten, codelets, plan)?;
    Ok(pretty_print(&transformed, config))
}

/// Positions of each directive line in emitted text, for anchor-fidelity
/// checks: (line number, rendered directive).
pub fn directive_lines(text: &str) -> Vec<(usize, String)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| l.trim_start().starts_with("#pragma hmpp"))
        .map(|(i, l)| (i + 1, l.trim_start().to_string()))
        .collect()
}

/// Group directives by their anchors, in rendering order, for tests.
pub fn directives_by_anchor(
    plan: &TransferPlan,
) -> BTreeMap<(Vec<i64>, u8), Vec<&TransferDirective>> {
    let mut map: BTreeMap<(Vec<i64>, u8), Vec<&TransferDirective>> = BTreeMap::new();
    for d in &plan.directives {
        map.entry((d.at.key(), directive_class(d.kind)))
            .or_default()
            .push(d);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_access_timeline;
    use crate::outline::outline_all;
    use crate::parser::parse_source;
    use crate::plan::build_plan;
    use crate::validate::find_gpu_blocks;

    const FIG1_LIKE: &str = "int main() {\n  int i;\n  int n;\n  double A[4];\n  double C[4];\n  n = 4;\n\
        for (i = 0; i < n; i++) { A[i] = i * 1.5; }\n\
        #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
        for (i = 0; i < n; i++) { C[i] = A[i] * 2.0; }\n\
        print(C);\n}";

    fn translate(src: &str) -> String {
        let unit = parse_source(src, "t.c").unwrap();
        let blocks = find_gpu_blocks(&unit);
        let timelines = build_access_timeline(&unit, &blocks);
        let (codelets, rewritten) = outline_all(&unit, &blocks, &timelines);
        let plan = build_plan(&unit, &codelets, &timelines);
        emit(&rewritten, &codelets, &plan, &EmitConfig::default()).unwrap()
    }

    #[test]
    fn directive_grammar() {
        use crate::plan::InsertionPoint;
        let d = TransferDirective {
            kind: DirectiveKind::AdvancedLoad,
            var: Some("A".to_string()),
            at: InsertionPoint::before(NestPath::root()),
            label: "o2h_main_b0".to_string(),
        };
        assert_eq!(
            render_directive(&d, "g0"),
            "#pragma hmpp <g0> o2h_main_b0 advancedload, args[A]"
        );
        let s = TransferDirective {
            kind: DirectiveKind::Synchronize,
            var: None,
            at: InsertionPoint::before(NestPath::root()),
            label: "o2h_main_b0".to_string(),
        };
        assert_eq!(
            render_directive(&s, "g0"),
            "#pragma hmpp <g0> o2h_main_b0 synchronize"
        );
    }

    #[test]
    fn echo_without_blocks_is_pretty_printed_input() {
        let src = "int main() { int a; a = 1 + 2 * 3; print(a); }";
        let unit = parse_source(src, "t.c").unwrap();
        let printed = pretty_print(&unit, &EmitConfig::default());
        assert_eq!(printed, "int main() {\n  int a;\n  a = 1 + 2 * 3;\n  print(a);\n}\n");
    }

    #[test]
    fn emitted_program_reparses() {
        let out = translate(FIG1_LIKE);
        let reparsed = parse_source(&out, "out.c").unwrap();
        assert_eq!(reparsed.functions.len(), 2);
        assert_eq!(reparsed.groups.len(), 1);
    }

    #[test]
    fn emission_is_idempotent() {
        let out = translate(FIG1_LIKE);
        let reparsed = parse_source(&out, "out.c").unwrap();
        let again = pretty_print(&reparsed, &EmitConfig::default());
        assert_eq!(out, again);
    }

    #[test]
    fn round_trip_preserves_structure() {
        let src = "int main() {\n  int i;\n  int n;\n  double A[4];\n  n = 4;\n\
            if (n > 2) { A[0] = 1.0; } else { A[1] = 2.0; }\n\
            for (i = 0; i < n; i++) { A[i] = A[i] / 2.0 - 1.0; }\n  print(A);\n}";
        let unit = parse_source(src, "t.c").unwrap();
        let printed = pretty_print(&unit, &EmitConfig::default());
        let reparsed = parse_source(&printed, "t.c").unwrap();
        let reprinted = pretty_print(&reparsed, &EmitConfig::default());
        assert_eq!(printed, reprinted);
    }

    #[test]
    fn minimal_parens() {
        let src = "int main() { int a; a = (1 + 2) * 3; a = 1 + 2 - 3; a = 1 - (2 - 3); }";
        let unit = parse_source(src, "t.c").unwrap();
        let printed = pretty_print(&unit, &EmitConfig::default());
        assert!(printed.contains("a = (1 + 2) * 3;"));
        assert!(printed.contains("a = 1 + 2 - 3;"));
        assert!(printed.contains("a = 1 - (2 - 3);"));
    }
}
