//! Per-variable access timelines and the placement queries behind transfer
//! optimization.
//!
//! Every statement is decomposed into ordered read/write events tagged with
//! the executing host (CPU, or the GPU block that will absorb it). Placement
//! questions — where is the last CPU write before a callsite, where is the
//! first CPU read after it, which block encloses both — are answered purely
//! on the event paths, so the planner never re-walks the tree.

use crate::ast::*;
use crate::span::SourceSpan;
use crate::validate::GpuBlock;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Host {
    Cpu,
    Gpu(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AccessKind {
    Read,
    Write,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccessEvent {
    pub var: String,
    pub kind: AccessKind,
    pub host: Host,
    pub point: NestPath,
    pub loop_depth: usize,
    pub conditional: bool,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariableTimeline {
    pub variable: String,
    pub events: Vec<AccessEvent>,
}

pub type Timelines = BTreeMap<String, VariableTimeline>;

struct EventSink {
    events: Vec<AccessEvent>,
}

impl EventSink {
    fn push(&mut self, var: &str, kind: AccessKind, host: Host, point: &NestPath, span: &SourceSpan) {
        self.events.push(AccessEvent {
            var: var.to_string(),
            kind,
            host,
            point: point.clone(),
            loop_depth: point.loop_depth(),
            conditional: point.conditional(),
            span: span.clone(),
        });
    }
}

/// Decompose one assignment into its ordered access events: the base variable
/// read of a compound assignment first, then one read per distinct variable
/// in the right-hand side and the left-hand index expressions, then the write
/// of the base variable.
pub fn split_assignment(stmt: &AssignStmt, host: Host, point: &NestPath) -> Vec<AccessEvent> {
    let mut sink = EventSink { events: Vec::new() };
    push_assign_events(stmt, host, point, &mut sink);
    sink.events
}

fn push_assign_events(stmt: &AssignStmt, host: Host, point: &NestPath, sink: &mut EventSink) {
    let mut seen: Vec<String> = Vec::new();
    if stmt.op != AssignOp::Assign {
        sink.push(&stmt.lhs.name, AccessKind::Read, host, point, &stmt.span);
        seen.push(stmt.lhs.name.clone());
    }
    let mut rhs_vars = stmt.rhs.variables();
    for ix in &stmt.lhs.indices {
        for v in ix.variables() {
            if !rhs_vars.contains(&v) {
                rhs_vars.push(v);
            }
        }
    }
    for var in rhs_vars {
        if !seen.contains(&var) {
            sink.push(&var, AccessKind::Read, host, point, &stmt.span);
            seen.push(var);
        }
    }
    sink.push(&stmt.lhs.name, AccessKind::Write, host, point, &stmt.span);
}

/// Build the document-ordered access timeline of every variable in `main`.
/// Events inside a GPU block carry that block's index as their host.
pub fn build_access_timeline(unit: &TranslationUnit, blocks: &[GpuBlock]) -> Timelines {
    let mut sink = EventSink { events: Vec::new() };
    for decl in &unit.global_decls {
        push_decl_events(decl, Host::Cpu, &NestPath::root(), &mut sink);
    }
    if let Some(main) = unit.main() {
        walk_block(
            &main.body,
            &NestPath::root(),
            BlockKind::Compound,
            Host::Cpu,
            blocks,
            &mut sink,
        );
    }
    let mut timelines: Timelines = BTreeMap::new();
    for event in sink.events {
        timelines
            .entry(event.var.clone())
            .or_insert_with(|| VariableTimeline {
                variable: event.var.clone(),
                events: Vec::new(),
            })
            .events
            .push(event);
    }
    timelines
}

fn push_decl_events(decl: &Decl, host: Host, point: &NestPath, sink: &mut EventSink) {
    if let Some(init) = &decl.init {
        for var in init.variables() {
            sink.push(&var, AccessKind::Read, host, point, &decl.span);
        }
        sink.push(&decl.name, AccessKind::Write, host, point, &decl.span);
    }
}

fn push_expr_reads(expr: &Expr, host: Host, point: &NestPath, span: &SourceSpan, sink: &mut EventSink) {
    for var in expr.variables() {
        sink.push(&var, AccessKind::Read, host, point, span);
    }
}

fn walk_block(
    block: &Block,
    path: &NestPath,
    kind: BlockKind,
    host: Host,
    blocks: &[GpuBlock],
    sink: &mut EventSink,
) {
    for (index, stmt) in block.stmts.iter().enumerate() {
        let here = path.child(index, kind);
        walk_stmt(stmt, &here, host, blocks, sink);
    }
}

fn walk_stmt(stmt: &Stmt, here: &NestPath, host: Host, blocks: &[GpuBlock], sink: &mut EventSink) {
    match stmt {
        Stmt::Decl(d) => push_decl_events(d, host, here, sink),
        Stmt::Assign(a) => push_assign_events(a, host, here, sink),
        Stmt::Print { var, span } => sink.push(var, AccessKind::Read, host, here, span),
        Stmt::For(f) => walk_for(f, here, host, blocks, sink),
        Stmt::If(i) => {
            push_expr_reads(&i.cond, host, here, &i.span, sink);
            walk_block(&i.then_block, here, BlockKind::Then, host, blocks, sink);
            if let Some(e) = &i.else_block {
                walk_block(e, here, BlockKind::Else, host, blocks, sink);
            }
        }
        Stmt::Compound(b) => walk_block(b, here, BlockKind::Compound, host, blocks, sink),
        Stmt::PragmaMarked { body, .. } => {
            let block_host = blocks
                .iter()
                .find(|b| b.path == *here)
                .map(|b| Host::Gpu(b.index))
                .unwrap_or(host);
            if let Stmt::For(f) = body.as_ref() {
                walk_for(f, here, block_host, blocks, sink);
            }
        }
        // Call and hmpp directive statements only exist in transformed units,
        // which are interpreted rather than re-analyzed.
        Stmt::Call(_) | Stmt::Directive(_) => {}
    }
}

fn walk_for(f: &ForStmt, here: &NestPath, host: Host, blocks: &[GpuBlock], sink: &mut EventSink) {
    push_expr_reads(&f.lower, host, here, &f.span, sink);
    sink.push(&f.index, AccessKind::Write, host, here, &f.span);
    push_expr_reads(&f.upper, host, here, &f.span, sink);
    sink.push(&f.index, AccessKind::Read, host, here, &f.span);
    walk_block(&f.body, here, BlockKind::ForBody, host, blocks, sink);
}

/// Latest CPU write strictly before `point` in document order.
pub fn last_cpu_write_before<'a>(
    timeline: &'a VariableTimeline,
    point: &NestPath,
) -> Option<&'a AccessEvent> {
    let key = position_key(point, Edge::At);
    timeline
        .events
        .iter()
        .rev()
        .find(|e| {
            e.kind == AccessKind::Write
                && e.host == Host::Cpu
                && position_key(&e.point, Edge::At) < key
        })
}

/// Earliest CPU read strictly after `point` in document order. GPU reads do
/// not count.
pub fn first_cpu_read_after<'a>(
    timeline: &'a VariableTimeline,
    point: &NestPath,
) -> Option<&'a AccessEvent> {
    let key = position_key(point, Edge::At);
    timeline.events.iter().find(|e| {
        e.kind == AccessKind::Read && e.host == Host::Cpu && position_key(&e.point, Edge::At) > key
    })
}

/// Longest common block prefix enclosing both paths. For identical paths this
/// is the innermost block containing them.
pub fn common_enclosing_block(a: &NestPath, b: &NestPath) -> NestPath {
    if a == b {
        return a.truncated(a.len().saturating_sub(1));
    }
    let mut k = 0;
    while k < a.len() && k < b.len() && a.0[k] == b.0[k] {
        k += 1;
    }
    a.truncated(k)
}

/// Where a directive may be anchored relative to an event and a callsite.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    /// Statement the directive attaches to; always a child of the common
    /// enclosing block of the event and the callsite.
    pub anchor: NestPath,
    pub kind: AnchorKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnchorKind {
    /// The event statement itself shares the callsite's block.
    EventStmt,
    /// The outermost loop around the event within the common block.
    Loop,
    /// The outermost conditional around the event within the common block.
    If,
    /// A bare nested compound around the event.
    Block,
}

/// The event sits in the branch of a conditional that does not contain the
/// callsite, so no anchor outside the branch is safe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiblingBranches;

fn placement(event_point: &NestPath, callsite: &NestPath) -> Result<Placement, SiblingBranches> {
    let mut k = 0;
    while k < event_point.len() && k < callsite.len() && event_point.0[k] == callsite.0[k] {
        k += 1;
    }
    // Diverging block kinds at the same depth can only mean the then- and
    // else-branch of one conditional; no anchor outside the branch is safe.
    if k < event_point.len()
        && k < callsite.len()
        && event_point.0[k].kind != callsite.0[k].kind
        && (matches!(event_point.0[k].kind, BlockKind::Then | BlockKind::Else)
            || matches!(callsite.0[k].kind, BlockKind::Then | BlockKind::Else))
    {
        return Err(SiblingBranches);
    }
    if k >= event_point.len() {
        // The event statement encloses or equals the callsite; anchor on it.
        return Ok(Placement {
            anchor: event_point.clone(),
            kind: AnchorKind::EventStmt,
        });
    }
    let anchor = event_point.truncated(k + 1);
    let kind = if anchor == *event_point {
        AnchorKind::EventStmt
    } else {
        match event_point.0[k + 1].kind {
            BlockKind::ForBody => AnchorKind::Loop,
            BlockKind::Then | BlockKind::Else => AnchorKind::If,
            BlockKind::Compound => AnchorKind::Block,
        }
    };
    Ok(Placement { anchor, kind })
}

/// Insertion target for an advancedload: immediately after the write
/// statement when it shares the callsite's block, otherwise after the
/// outermost loop (or conditional) around the write within the shared block.
pub fn hoist_point_after_write(
    write_point: &NestPath,
    callsite: &NestPath,
) -> Result<Placement, SiblingBranches> {
    placement(write_point, callsite)
}

/// Insertion target for a delegatestore: immediately before the reading
/// statement when it shares the callsite's block, otherwise before the
/// outermost loop (or conditional) around the read within the shared block.
pub fn sink_point_before_read(
    read_point: &NestPath,
    callsite: &NestPath,
) -> Result<Placement, SiblingBranches> {
    placement(read_point, callsite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;
    use crate::validate::find_gpu_blocks;

    const FIG1_LIKE: &str = "int main() {\n  int i;\n  int n;\n  double A[4];\n  double C[4];\n  n = 4;\n\
        for (i = 0; i < n; i++) { A[i] = i * 1.5; }\n\
        #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
        for (i = 0; i < n; i++) { C[i] = A[i] * 2.0; }\n\
        print(C);\n}";

    fn timelines_for(src: &str) -> (Timelines, Vec<crate::validate::GpuBlock>) {
        let unit = parse_source(src, "t.c").unwrap();
        let blocks = find_gpu_blocks(&unit);
        (build_access_timeline(&unit, &blocks), blocks)
    }

    fn kinds(tl: &VariableTimeline) -> Vec<(AccessKind, Host)> {
        tl.events.iter().map(|e| (e.kind, e.host)).collect()
    }

    #[test]
    fn single_kernel_timelines() {
        let (timelines, _) = timelines_for(FIG1_LIKE);
        assert_eq!(
            kinds(&timelines["A"]),
            vec![(AccessKind::Write, Host::Cpu), (AccessKind::Read, Host::Gpu(0))]
        );
        assert_eq!(
            kinds(&timelines["C"]),
            vec![(AccessKind::Write, Host::Gpu(0)), (AccessKind::Read, Host::Cpu)]
        );
    }

    #[test]
    fn unused_variable_has_no_events() {
        let (timelines, _) = timelines_for("int main() { double x; int a; a = 1; }");
        assert!(!timelines.contains_key("x"));
    }

    // Independent oracle: enumerate the variables of each expression tree by
    // a plain recursive walk and rebuild the expected event list.
    fn expr_vars(expr: &Expr, out: &mut Vec<String>) {
        match expr {
            Expr::Var(n, _) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            Expr::ArrayRef { name, indices, .. } => {
                if !out.contains(name) {
                    out.push(name.clone());
                }
                for ix in indices {
                    expr_vars(ix, out);
                }
            }
            Expr::Binary { lhs, rhs, .. } => {
                expr_vars(lhs, out);
                expr_vars(rhs, out);
            }
            _ => {}
        }
    }

    fn assign_of(src: &str) -> AssignStmt {
        let unit = parse_source(src, "t.c").unwrap();
        let main = unit.main().unwrap();
        for stmt in main.body.stmts.iter().rev() {
            if let Stmt::Assign(a) = stmt {
                return a.clone();
            }
        }
        panic!("no assignment in {src}");
    }

    #[test]
    fn split_assignment_matches_enumeration_oracle() {
        let cases = [
            "int main() { int i; double A[4]; double C[4]; C[i] = A[i] * 2.0; }",
            "int main() { double x; x = x; }",
            "int main() { int i; int j; double s; double B[2][2]; s += B[i][j]; }",
        ];
        for src in cases {
            let assign = assign_of(src);
            let got: Vec<(String, AccessKind)> =
                split_assignment(&assign, Host::Cpu, &NestPath::root())
                    .into_iter()
                    .map(|e| (e.var, e.kind))
                    .collect();

            let mut expected = Vec::new();
            if assign.op != AssignOp::Assign {
                expected.push((assign.lhs.name.clone(), AccessKind::Read));
            }
            let mut reads = Vec::new();
            expr_vars(&assign.rhs, &mut reads);
            for ix in &assign.lhs.indices {
                expr_vars(ix, &mut reads);
            }
            for r in reads {
                if !expected.iter().any(|(n, _)| *n == r) {
                    expected.push((r, AccessKind::Read));
                }
            }
            expected.push((assign.lhs.name.clone(), AccessKind::Write));
            assert_eq!(got, expected, "event mismatch for {src}");
        }
    }

    #[test]
    fn split_assignment_frozen_examples() {
        let a = assign_of("int main() { int i; double A[4]; double C[4]; C[i] = A[i] * 2.0; }");
        let got: Vec<(String, AccessKind)> = split_assignment(&a, Host::Cpu, &NestPath::root())
            .into_iter()
            .map(|e| (e.var, e.kind))
            .collect();
        assert_eq!(
            got,
            vec![
                ("A".into(), AccessKind::Read),
                ("i".into(), AccessKind::Read),
                ("C".into(), AccessKind::Write),
            ]
        );

        let a = assign_of("int main() { int i; int j; double s; double B[2][2]; s += B[i][j]; }");
        let got: Vec<(String, AccessKind)> = split_assignment(&a, Host::Cpu, &NestPath::root())
            .into_iter()
            .map(|e| (e.var, e.kind))
            .collect();
        assert_eq!(
            got,
            vec![
                ("s".into(), AccessKind::Read),
                ("B".into(), AccessKind::Read),
                ("i".into(), AccessKind::Read),
                ("j".into(), AccessKind::Read),
                ("s".into(), AccessKind::Write),
            ]
        );
    }

    #[test]
    fn write_queries_respect_document_order() {
        let (timelines, blocks) = timelines_for(FIG1_LIKE);
        let callsite = &blocks[0].path;

        let a_write = last_cpu_write_before(&timelines["A"], callsite).unwrap();
        assert_eq!(a_write.kind, AccessKind::Write);
        assert!(position_key(&a_write.point, Edge::At) < position_key(callsite, Edge::At));

        // C is only written on the GPU; there is no prior CPU write.
        assert!(last_cpu_write_before(&timelines["C"], callsite).is_none());

        let c_read = first_cpu_read_after(&timelines["C"], callsite).unwrap();
        assert!(position_key(&c_read.point, Edge::At) > position_key(callsite, Edge::At));

        // A is never read on the CPU after the kernel.
        assert!(first_cpu_read_after(&timelines["A"], callsite).is_none());
    }

    #[test]
    fn common_block_examples() {
        let root = NestPath::root();
        let deep = root
            .child(2, BlockKind::Compound)
            .child(0, BlockKind::ForBody)
            .child(1, BlockKind::ForBody);
        let top = root.child(5, BlockKind::Compound);
        assert_eq!(common_enclosing_block(&deep, &top), NestPath::root());
        assert_eq!(
            common_enclosing_block(&deep, &deep),
            deep.truncated(deep.len() - 1)
        );
        let sib = root.child(3, BlockKind::Compound);
        assert_eq!(common_enclosing_block(&sib, &top), NestPath::root());
    }

    #[test]
    fn hoist_placements() {
        let root = NestPath::root();
        let callsite = root.child(7, BlockKind::Compound);

        // Write at the same level: anchor is the write statement itself.
        let write = root.child(4, BlockKind::Compound);
        let p = hoist_point_after_write(&write, &callsite).unwrap();
        assert_eq!(p.kind, AnchorKind::EventStmt);
        assert_eq!(p.anchor, write);

        // Write in a 2-deep nest before the callsite: anchor is the outer loop.
        let write = root
            .child(4, BlockKind::Compound)
            .child(0, BlockKind::ForBody)
            .child(0, BlockKind::ForBody);
        let p = hoist_point_after_write(&write, &callsite).unwrap();
        assert_eq!(p.kind, AnchorKind::Loop);
        assert_eq!(p.anchor, root.child(4, BlockKind::Compound));

        // Write under an if at the callsite's level: anchor is the whole if.
        let write = root.child(4, BlockKind::Compound).child(0, BlockKind::Then);
        let p = hoist_point_after_write(&write, &callsite).unwrap();
        assert_eq!(p.kind, AnchorKind::If);
        assert_eq!(p.anchor, root.child(4, BlockKind::Compound));
    }

    #[test]
    fn sink_placements() {
        let root = NestPath::root();
        let callsite = root.child(2, BlockKind::Compound);

        let read = root.child(3, BlockKind::Compound);
        let p = sink_point_before_read(&read, &callsite).unwrap();
        assert_eq!(p.kind, AnchorKind::EventStmt);

        let read = root
            .child(5, BlockKind::Compound)
            .child(1, BlockKind::ForBody)
            .child(0, BlockKind::ForBody);
        let p = sink_point_before_read(&read, &callsite).unwrap();
        assert_eq!(p.kind, AnchorKind::Loop);
        assert_eq!(p.anchor, root.child(5, BlockKind::Compound));
    }

    #[test]
    fn sibling_branches_are_ambiguous() {
        let root = NestPath::root();
        let write = root.child(3, BlockKind::Compound).child(0, BlockKind::Then);
        let callsite = root.child(3, BlockKind::Compound).child(0, BlockKind::Else);
        assert_eq!(
            hoist_point_after_write(&write, &callsite),
            Err(SiblingBranches)
        );
    }
}
