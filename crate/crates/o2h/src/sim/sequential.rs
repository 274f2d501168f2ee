//! Sequential reference interpreter: one flat memory image, pragmas ignored,
//! calls executed inline against the caller's memory. This is the semantics
//! every transformation must preserve.

use super::{
    eval_expr, push_touch, Access, ExecError, ExecErrorKind, MemoryImage, RunOptions, Scalar,
    VarStorage,
};
use crate::analysis::AccessKind;
use crate::ast::*;
use crate::span::SourceSpan;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct SeqOutcome {
    pub memory: MemoryImage,
    /// Every (variable, kind) touch in execution order.
    pub touched: Vec<(String, AccessKind)>,
    pub output: Vec<String>,
}

enum Binding {
    /// By-value scalar parameter: a local, writable copy.
    Value(VarStorage),
    /// Array (or promoted scalar) parameter aliasing a caller variable.
    Ref(String),
}

struct Frame {
    bindings: BTreeMap<String, Binding>,
    locals: MemoryImage,
    /// Transparent frames fall through to the enclosing scope for unknown
    /// names; codelet frames do not (parameter completeness).
    transparent: bool,
}

struct Machine<'a> {
    unit: &'a TranslationUnit,
    opts: &'a RunOptions,
    image: MemoryImage,
    frames: Vec<Frame>,
    touched: Vec<(String, AccessKind)>,
    output: Vec<String>,
    steps: u64,
}

enum Slot<'m> {
    Global(&'m mut VarStorage),
    FrameLocal(&'m mut VarStorage),
    FrameValue(&'m mut VarStorage),
}

impl<'a> Machine<'a> {
    fn step(&mut self, span: &SourceSpan) -> Result<(), ExecError> {
        self.steps += 1;
        if self.steps > self.opts.max_steps {
            return Err(ExecError::new(span.clone(), ExecErrorKind::StepLimit));
        }
        Ok(())
    }

    fn storage_mut(&mut self, name: &str, span: &SourceSpan) -> Result<Slot<'_>, ExecError> {
        // Find the innermost frame that resolves the name; transparent frames
        // fall through, codelet frames stop the search.
        let mut frame_hit: Option<(usize, bool)> = None;
        for (depth, frame) in self.frames.iter().enumerate().rev() {
            if frame.locals.vars.contains_key(name) {
                frame_hit = Some((depth, true));
                break;
            }
            if frame.bindings.contains_key(name) {
                frame_hit = Some((depth, false));
                break;
            }
            if !frame.transparent {
                return Err(ExecError::new(
                    span.clone(),
                    ExecErrorKind::BadValue(format!(
                        "`{name}` is not visible inside the codelet"
                    )),
                ));
            }
        }
        if let Some((depth, is_local)) = frame_hit {
            if is_local {
                let frame = &mut self.frames[depth];
                return Ok(Slot::FrameLocal(frame.locals.vars.get_mut(name).unwrap()));
            }
            let target = match self.frames[depth].bindings.get(name) {
                Some(Binding::Ref(target)) => Some(target.clone()),
                _ => None,
            };
            return match target {
                Some(target) => match self.image.vars.get_mut(&target) {
                    Some(s) => Ok(Slot::Global(s)),
                    None => Err(ExecError::new(
                        span.clone(),
                        ExecErrorKind::BadValue(format!("argument `{target}` is not declared")),
                    )),
                },
                None => {
                    let frame = &mut self.frames[depth];
                    match frame.bindings.get_mut(name) {
                        Some(Binding::Value(storage)) => Ok(Slot::FrameValue(storage)),
                        _ => unreachable!("binding kind checked above"),
                    }
                }
            };
        }
        match self.image.vars.get_mut(name) {
            Some(s) => Ok(Slot::Global(s)),
            None => Err(ExecError::new(
                span.clone(),
                ExecErrorKind::BadValue(format!("`{name}` is not declared")),
            )),
        }
    }

    fn log(&mut self, name: &str, kind: AccessKind) {
        // The touch log describes the program's own variables; accesses made
        // through codelet frames are attributed to the parameter name.
        push_touch(&mut self.touched, name, kind);
    }

    fn read_cell(&mut self, name: &str, flat: Option<&[i64]>, span: &SourceSpan) -> Result<Scalar, ExecError> {
        let slot = self.storage_mut(name, span)?;
        let storage = match slot {
            Slot::Global(s) | Slot::FrameLocal(s) | Slot::FrameValue(s) => s,
        };
        let index = match flat {
            None => {
                if !storage.is_scalar() {
                    return Err(ExecError::new(
                        span.clone(),
                        ExecErrorKind::BadValue(format!("array `{name}` used as a scalar")),
                    ));
                }
                0
            }
            Some(indices) => storage.flatten(name, indices, span)?,
        };
        let value = storage.cells[index].ok_or_else(|| {
            ExecError::new(span.clone(), ExecErrorKind::UninitRead { var: name.to_string() })
        })?;
        self.log(name, AccessKind::Read);
        Ok(value)
    }

    fn write_cell(
        &mut self,
        name: &str,
        flat: Option<&[i64]>,
        value: Scalar,
        span: &SourceSpan,
    ) -> Result<(), ExecError> {
        let slot = self.storage_mut(name, span)?;
        let storage = match slot {
            Slot::Global(s) | Slot::FrameLocal(s) | Slot::FrameValue(s) => s,
        };
        let index = match flat {
            None => {
                if !storage.is_scalar() {
                    return Err(ExecError::new(
                        span.clone(),
                        ExecErrorKind::BadValue(format!("array `{name}` assigned as a scalar")),
                    ));
                }
                0
            }
            Some(indices) => storage.flatten(name, indices, span)?,
        };
        storage.cells[index] = Some(value.convert(storage.base));
        self.log(name, AccessKind::Write);
        Ok(())
    }

    fn declare(&mut self, decl: &Decl) -> Result<(), ExecError> {
        let dims = decl.const_dims().ok_or_else(|| {
            ExecError::new(
                decl.span.clone(),
                ExecErrorKind::BadValue(format!("`{}` has a dynamic extent", decl.name)),
            )
        })?;
        let mut storage = VarStorage::new(decl.base, dims, self.opts.zero_init);
        let in_frame = !self.frames.is_empty();
        if !in_frame {
            self.opts.bindings.apply(&decl.name, &mut storage)?;
        }
        if in_frame {
            self.frames
                .last_mut()
                .unwrap()
                .locals
                .vars
                .insert(decl.name.clone(), storage);
        } else {
            self.image.vars.insert(decl.name.clone(), storage);
        }
        if let Some(init) = &decl.init {
            let value = self.eval(init)?;
            self.write_cell(&decl.name, None, value, &decl.span)?;
        }
        Ok(())
    }

    fn eval(&mut self, expr: &Expr) -> Result<Scalar, ExecError> {
        eval_expr(expr, self)
    }

    fn exec_block(&mut self, block: &Block) -> Result<(), ExecError> {
        for stmt in &block.stmts {
            self.exec_stmt(stmt)?;
        }
        Ok(())
    }

    fn exec_stmt(&mut self, stmt: &Stmt) -> Result<(), ExecError> {
        self.step(stmt.span())?;
        match stmt {
            Stmt::Decl(d) => self.declare(d),
            Stmt::Assign(a) => self.exec_assign(a),
            Stmt::Print { var, span } => self.exec_print(var, span),
            Stmt::For(f) => self.exec_for(f),
            Stmt::If(i) => {
                if self.eval(&i.cond)?.truthy() {
                    self.exec_block(&i.then_block)
                } else if let Some(e) = &i.else_block {
                    self.exec_block(e)
                } else {
                    Ok(())
                }
            }
            Stmt::Compound(b) => self.exec_block(b),
            Stmt::PragmaMarked { pragmas, body, .. } => {
                // The loop indices of an offloaded block are private to it,
                // exactly as outlining re-declares them inside the codelet;
                // run the block on fresh copies so the enclosing variables
                // keep their pre-block values.
                if crate::validate::pragma_targets_hmpp(pragmas) {
                    if let Stmt::For(f) = body.as_ref() {
                        let mut locals = MemoryImage::new();
                        for index in crate::outline::loop_indices(f) {
                            locals
                                .vars
                                .insert(index, VarStorage::new(BaseType::Int, vec![], false));
                        }
                        self.frames.push(Frame {
                            bindings: BTreeMap::new(),
                            locals,
                            transparent: true,
                        });
                        let result = self.exec_stmt(body);
                        self.frames.pop();
                        return result;
                    }
                }
                self.exec_stmt(body)
            }
            Stmt::Call(c) => self.exec_call(c),
            // Transfer directives have no sequential-semantics effect.
            Stmt::Directive(_) => Ok(()),
        }
    }

    fn exec_assign(&mut self, a: &AssignStmt) -> Result<(), ExecError> {
        let indices = self.eval_indices(&a.lhs.indices)?;
        let flat = if indices.is_empty() {
            None
        } else {
            Some(indices.as_slice())
        };
        let rhs = self.eval(&a.rhs)?;
        let value = match a.op.binary_op() {
            None => rhs,
            Some(op) => {
                let current = self.read_cell(&a.lhs.name, flat, &a.span)?;
                super::binary_op(op, current, rhs, &a.span)?
            }
        };
        self.write_cell(&a.lhs.name, flat, value, &a.span)
    }

    fn eval_indices(&mut self, indices: &[Expr]) -> Result<Vec<i64>, ExecError> {
        indices
            .iter()
            .map(|ix| {
                let v = self.eval(ix)?;
                match v {
                    Scalar::Int(i) => Ok(i as i64),
                    _ => Err(ExecError::new(
                        ix.span().clone(),
                        ExecErrorKind::BadValue("array index is not an int".to_string()),
                    )),
                }
            })
            .collect()
    }

    fn exec_print(&mut self, var: &str, span: &SourceSpan) -> Result<(), ExecError> {
        // A print reads every element; any uninitialized element is an error.
        let slot = self.storage_mut(var, span)?;
        let storage = match slot {
            Slot::Global(s) | Slot::FrameLocal(s) | Slot::FrameValue(s) => s,
        };
        for cell in &storage.cells {
            if cell.is_none() {
                return Err(ExecError::new(
                    span.clone(),
                    ExecErrorKind::UninitRead {
                        var: var.to_string(),
                    },
                ));
            }
        }
        let line = storage.format_value(var);
        self.log(var, AccessKind::Read);
        self.output.push(line);
        Ok(())
    }

    fn exec_for(&mut self, f: &ForStmt) -> Result<(), ExecError> {
        let lower = self.eval(&f.lower)?;
        self.write_cell(&f.index, None, lower, &f.span)?;
        loop {
            self.step(&f.span)?;
            let current = self.read_cell(&f.index, None, &f.span)?;
            let upper = self.eval(&f.upper)?;
            if !super::binary_op(BinOp::Lt, current, upper, &f.span)?.truthy() {
                break;
            }
            self.exec_block(&f.body)?;
            let current = self.read_cell(&f.index, None, &f.span)?;
            let next = super::binary_op(BinOp::Add, current, Scalar::Int(1), &f.span)?;
            self.write_cell(&f.index, None, next, &f.span)?;
        }
        Ok(())
    }

    fn exec_call(&mut self, call: &CallStmt) -> Result<(), ExecError> {
        let func = self
            .unit
            .function(&call.callee)
            .ok_or_else(|| {
                ExecError::new(
                    call.span.clone(),
                    ExecErrorKind::UnknownFunction {
                        name: call.callee.clone(),
                    },
                )
            })?
            .clone();
        if func.params.len() != call.args.len() {
            return Err(ExecError::new(
                call.span.clone(),
                ExecErrorKind::BadValue(format!(
                    "`{}` takes {} arguments, got {}",
                    func.name,
                    func.params.len(),
                    call.args.len()
                )),
            ));
        }
        let mut bindings = BTreeMap::new();
        for (param, arg) in func.params.iter().zip(&call.args) {
            if param.dims.is_empty() {
                let value = self.eval(arg)?.convert(param.base);
                let mut storage = VarStorage::new(param.base, vec![], false);
                storage.cells[0] = Some(value);
                bindings.insert(param.name.clone(), Binding::Value(storage));
            } else {
                let Expr::Var(target, span) = arg else {
                    return Err(ExecError::new(
                        arg.span().clone(),
                        ExecErrorKind::BadValue(
                            "array arguments must be bare variable names".to_string(),
                        ),
                    ));
                };
                if !self.image.vars.contains_key(target) {
                    return Err(ExecError::new(
                        span.clone(),
                        ExecErrorKind::BadValue(format!("argument `{target}` is not declared")),
                    ));
                }
                bindings.insert(param.name.clone(), Binding::Ref(target.clone()));
            }
        }
        self.frames.push(Frame {
            bindings,
            locals: MemoryImage::new(),
            transparent: false,
        });
        let result = self.exec_block(&func.body);
        self.frames.pop();
        result
    }
}

impl<'a> Access for Machine<'a> {
    fn read_scalar(&mut self, name: &str, span: &SourceSpan) -> Result<Scalar, ExecError> {
        self.read_cell(name, None, span)
    }

    fn read_element(
        &mut self,
        name: &str,
        indices: &[i64],
        span: &SourceSpan,
    ) -> Result<Scalar, ExecError> {
        self.read_cell(name, Some(indices), span)
    }
}

/// Execute a unit sequentially. Works for plain input programs and for
/// transformed programs, where callsites run inline and directives are
/// no-ops; the latter is what "outlining preserves semantics" is checked
/// against.
pub fn interpret_sequential(
    unit: &TranslationUnit,
    opts: &RunOptions,
) -> Result<SeqOutcome, ExecError> {
    let main = unit.main().ok_or_else(|| {
        ExecError::new(
            SourceSpan::new(unit.file.clone(), 1, 1),
            ExecErrorKind::UnknownFunction {
                name: "main".to_string(),
            },
        )
    })?;
    let mut machine = Machine {
        unit,
        opts,
        image: MemoryImage::new(),
        frames: Vec::new(),
        touched: Vec::new(),
        output: Vec::new(),
        steps: 0,
    };
    for decl in &unit.global_decls {
        machine.declare(decl)?;
    }
    machine.exec_block(&main.body)?;
    Ok(SeqOutcome {
        memory: machine.image,
        touched: machine.touched,
        output: machine.output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    fn run(src: &str) -> SeqOutcome {
        let unit = parse_source(src, "t.c").unwrap();
        interpret_sequential(&unit, &RunOptions::default()).unwrap()
    }

    fn run_err(src: &str) -> ExecError {
        let unit = parse_source(src, "t.c").unwrap();
        interpret_sequential(&unit, &RunOptions::default()).unwrap_err()
    }

    #[test]
    fn doubling_kernel_hand_computed() {
        // Four iterations of C[i] = A[i] * 2 with A[i] = i gives [0, 2, 4, 6].
        let src = "int main() {\n  int i;\n  int n;\n  double A[4];\n  double C[4];\n  n = 4;\n\
            for (i = 0; i < n; i++) { A[i] = i; }\n\
            #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
            for (i = 0; i < n; i++) { C[i] = A[i] * 2; }\n\
            print(C);\n}";
        let out = run(src);
        let c = &out.memory.vars["C"];
        let expected = [0.0, 2.0, 4.0, 6.0];
        for (cell, want) in c.cells.iter().zip(expected) {
            assert_eq!(*cell, Some(Scalar::Double(want)));
        }
        assert_eq!(out.output, vec!["C = [0.0, 2.0, 4.0, 6.0]"]);
    }

    #[test]
    fn empty_main_empty_memory() {
        let out = run("int main() { }");
        assert!(out.memory.vars.is_empty());
        assert!(out.touched.is_empty());
    }

    #[test]
    fn out_of_bounds_read() {
        let err = run_err("int main() { int a[5]; int x; a[0] = 1; x = a[5]; }");
        assert!(matches!(err.kind, ExecErrorKind::Oob { index: 5, extent: 5, .. }));
    }

    #[test]
    fn uninitialized_read() {
        let err = run_err("int main() { int a; int b; b = a; }");
        assert!(matches!(err.kind, ExecErrorKind::UninitRead { .. }));
    }

    #[test]
    fn int_division_by_zero() {
        let err = run_err("int main() { int a; int b; b = 0; a = 4 / b; }");
        assert!(matches!(err.kind, ExecErrorKind::DivZero));
    }

    #[test]
    fn double_division_by_zero_is_ieee() {
        let out = run("int main() { double a; double b; b = 0.0; a = 4.0 / b; }");
        assert_eq!(out.memory.vars["a"].cells[0], Some(Scalar::Double(f64::INFINITY)));
    }

    #[test]
    fn int_arithmetic_wraps() {
        let out = run("int main() { int a; a = 2147483647; a = a + 1; }");
        assert_eq!(out.memory.vars["a"].cells[0], Some(Scalar::Int(i32::MIN)));
    }

    #[test]
    fn zero_init_fills_arrays_only() {
        let unit = parse_source("int main() { double A[2]; double s; print(A); }", "t.c").unwrap();
        let opts = RunOptions {
            zero_init: true,
            ..Default::default()
        };
        let out = interpret_sequential(&unit, &opts).unwrap();
        assert_eq!(out.memory.vars["A"].cells[0], Some(Scalar::Double(0.0)));
        assert_eq!(out.memory.vars["s"].cells[0], None);
    }

    #[test]
    fn bindings_initialize_scalars_and_arrays() {
        let unit = parse_source(
            "int main() { int n; double A[3]; double s; s = A[2] + n; print(s); }",
            "t.c",
        )
        .unwrap();
        let opts = RunOptions {
            bindings: Bindings::parse(r#"{"n": 4, "A": "i * 0.5"}"#, "in.json").unwrap(),
            ..Default::default()
        };
        let out = interpret_sequential(&unit, &opts).unwrap();
        assert_eq!(out.memory.vars["s"].cells[0], Some(Scalar::Double(5.0)));
    }

    use super::super::Bindings;

    #[test]
    fn call_with_reference_semantics() {
        let src = "void scale(int n, double X[3]) {\n  int i;\n\
            for (i = 0; i < n; i++) { X[i] = X[i] * 2.0; }\n}\n\
            int main() {\n  int i;\n  int n;\n  double A[3];\n  n = 3;\n\
            for (i = 0; i < n; i++) { A[i] = i + 1.0; }\n\
            scale(n, A);\nprint(A);\n}";
        let out = run(src);
        assert_eq!(out.output, vec!["A = [2.0, 4.0, 6.0]"]);
    }

    #[test]
    fn promoted_scalar_param_aliases_caller_scalar() {
        let src = "void accum(int n, double s[1], double X[3]) {\n  int i;\n\
            for (i = 0; i < n; i++) { s[0] += X[i]; }\n}\n\
            int main() {\n  int i;\n  int n;\n  double s;\n  double A[3];\n  n = 3;\n\
            for (i = 0; i < n; i++) { A[i] = 1.5; }\n\
            s = 0.0;\naccum(n, s, A);\nprint(s);\n}";
        let out = run(src);
        assert_eq!(out.output, vec!["s = 4.5"]);
    }

    #[test]
    fn touch_log_records_reads_and_writes() {
        let out = run("int main() { int a; int b; a = 1; b = a + 2; }");
        use AccessKind::*;
        assert!(out.touched.contains(&("a".to_string(), Write)));
        assert!(out.touched.contains(&("a".to_string(), Read)));
        assert!(out.touched.contains(&("b".to_string(), Write)));
    }
}
