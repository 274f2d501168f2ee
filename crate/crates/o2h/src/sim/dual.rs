//! Dual-memory interpreter for transformed programs.
//!
//! Host statements touch the host image; callsites execute codelet bodies
//! against the device image. Transfers move whole objects between the two and
//! update per-variable validity: a host write invalidates the device copy, a
//! kernel write invalidates the host copy. Reading an invalid copy is
//! recorded as a stale access and yields a poison value, so a broken plan
//! shows up both in `stale_reads` and as a memory mismatch.
//!
//! Asynchronous callsites have deferred visibility: their writes land in a
//! per-label buffer that only reaches the device image at the matching
//! synchronize. Any access to an in-flight variable is stale; a program that
//! ends (or relaunches a label) with pending work is an error.

use super::{
    eval_expr, Access, ExecError, ExecErrorKind, MemoryImage, RunOptions, Scalar, StaleDirection,
    StaleRead, TransferStats, VarStorage,
};
use crate::ast::*;
use crate::span::SourceSpan;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct DualOutcome {
    pub host: MemoryImage,
    pub device: MemoryImage,
    pub host_valid: BTreeSet<String>,
    pub device_valid: BTreeSet<String>,
    pub stats: TransferStats,
    pub output: Vec<String>,
}

impl DualOutcome {
    /// The authoritative value of every variable: the host copy when it is
    /// valid, otherwise the device copy (device-resident results are never
    /// downloaded by an optimized plan unless the host reads them).
    pub fn effective_memory(&self) -> MemoryImage {
        let mut image = MemoryImage::new();
        for (name, host_storage) in &self.host.vars {
            let storage = if self.host_valid.contains(name) {
                host_storage.clone()
            } else if self.device_valid.contains(name) {
                self.device.vars.get(name).cloned().unwrap_or_else(|| host_storage.clone())
            } else {
                host_storage.clone()
            };
            image.vars.insert(name.clone(), storage);
        }
        image
    }
}

struct PendingCall {
    label: String,
    writes: BTreeMap<String, VarStorage>,
    span: SourceSpan,
}

enum DevBinding {
    Value(VarStorage),
    /// Reference to the named host/device variable.
    Ref(String),
}

enum Route {
    Local,
    Value,
    Ref {
        target: String,
        written: bool,
        buffered: bool,
        is_async: bool,
    },
    Missing,
}

fn read_plain(
    storage: &VarStorage,
    name: &str,
    indices: Option<&[i64]>,
    span: &SourceSpan,
) -> Result<Scalar, ExecError> {
    let index = match indices {
        None => {
            if !storage.is_scalar() {
                return Err(ExecError::new(
                    span.clone(),
                    ExecErrorKind::BadValue(format!("array `{name}` used as a scalar")),
                ));
            }
            0
        }
        Some(ix) => storage.flatten(name, ix, span)?,
    };
    storage.cells[index].ok_or_else(|| {
        ExecError::new(
            span.clone(),
            ExecErrorKind::UninitRead {
                var: name.to_string(),
            },
        )
    })
}

fn write_plain(
    storage: &mut VarStorage,
    name: &str,
    indices: Option<&[i64]>,
    value: Scalar,
    span: &SourceSpan,
) -> Result<(), ExecError> {
    let index = match indices {
        None => {
            if !storage.is_scalar() {
                return Err(ExecError::new(
                    span.clone(),
                    ExecErrorKind::BadValue(format!("array `{name}` assigned as a scalar")),
                ));
            }
            0
        }
        Some(ix) => storage.flatten(name, ix, span)?,
    };
    storage.cells[index] = Some(value.convert(storage.base));
    Ok(())
}

struct DeviceCtx {
    bindings: BTreeMap<String, DevBinding>,
    locals: MemoryImage,
    /// Target variables this call has written so far.
    written: BTreeSet<String>,
    /// Asynchronous working copies, keyed by target variable.
    buffer: Option<BTreeMap<String, VarStorage>>,
}

struct Machine<'a> {
    unit: &'a TranslationUnit,
    opts: &'a RunOptions,
    host: MemoryImage,
    device: MemoryImage,
    host_valid: BTreeSet<String>,
    device_valid: BTreeSet<String>,
    pending: Vec<PendingCall>,
    ctx: Vec<DeviceCtx>,
    stats: TransferStats,
    stale_seen: BTreeSet<(String, u32, u32, StaleDirection)>,
    output: Vec<String>,
    steps: u64,
}

impl<'a> Machine<'a> {
    fn step(&mut self, span: &SourceSpan) -> Result<(), ExecError> {
        self.steps += 1;
        if self.steps > self.opts.max_steps {
            return Err(ExecError::new(span.clone(), ExecErrorKind::StepLimit));
        }
        Ok(())
    }

    fn stale(&mut self, var: &str, span: &SourceSpan, direction: StaleDirection) {
        let key = (var.to_string(), span.line, span.column, direction);
        if self.stale_seen.insert(key) {
            self.stats.stale_reads.push(StaleRead {
                var: var.to_string(),
                site: span.clone(),
                direction,
            });
        }
    }

    fn pending_contains(&self, var: &str) -> bool {
        self.pending.iter().any(|p| p.writes.contains_key(var))
    }

    fn undeclared(&self, name: &str, span: &SourceSpan) -> ExecError {
        ExecError::new(
            span.clone(),
            ExecErrorKind::BadValue(format!("`{name}` is not declared")),
        )
    }

    // -- host-side access ---------------------------------------------------

    fn host_read(
        &mut self,
        name: &str,
        indices: Option<&[i64]>,
        span: &SourceSpan,
    ) -> Result<Scalar, ExecError> {
        if !self.host.vars.contains_key(name) {
            return Err(self.undeclared(name, span));
        }
        let stale = self.pending_contains(name) || !self.host_valid.contains(name);
        if stale {
            self.stale(name, span, StaleDirection::HostRead);
        }
        let storage = self.host.vars.get(name).unwrap();
        let index = match indices {
            None => {
                if !storage.is_scalar() {
                    return Err(ExecError::new(
                        span.clone(),
                        ExecErrorKind::BadValue(format!("array `{name}` used as a scalar")),
                    ));
                }
                0
            }
            Some(ix) => storage.flatten(name, ix, span)?,
        };
        if stale {
            return Ok(Scalar::poison(storage.base));
        }
        storage.cells[index].ok_or_else(|| {
            ExecError::new(
                span.clone(),
                ExecErrorKind::UninitRead {
                    var: name.to_string(),
                },
            )
        })
    }

    fn host_write(
        &mut self,
        name: &str,
        indices: Option<&[i64]>,
        value: Scalar,
        span: &SourceSpan,
    ) -> Result<(), ExecError> {
        if self.pending_contains(name) {
            self.stale(name, span, StaleDirection::HostWrite);
        }
        let Some(storage) = self.host.vars.get_mut(name) else {
            return Err(self.undeclared(name, span));
        };
        let index = match indices {
            None => {
                if !storage.is_scalar() {
                    return Err(ExecError::new(
                        span.clone(),
                        ExecErrorKind::BadValue(format!("array `{name}` assigned as a scalar")),
                    ));
                }
                0
            }
            Some(ix) => storage.flatten(name, ix, span)?,
        };
        storage.cells[index] = Some(value.convert(storage.base));
        self.host_valid.insert(name.to_string());
        self.device_valid.remove(name);
        Ok(())
    }

    // -- device-side access (inside a codelet) -------------------------------

    /// Where a name inside the current codelet routes to.
    fn route(&self, name: &str) -> Route {
        let ctx = self.ctx.last().expect("codelet context exists");
        if ctx.locals.vars.contains_key(name) {
            return Route::Local;
        }
        match ctx.bindings.get(name) {
            Some(DevBinding::Value(_)) => Route::Value,
            Some(DevBinding::Ref(target)) => Route::Ref {
                target: target.clone(),
                written: ctx.written.contains(target),
                buffered: ctx
                    .buffer
                    .as_ref()
                    .is_some_and(|b| b.contains_key(target)),
                is_async: ctx.buffer.is_some(),
            },
            None => Route::Missing,
        }
    }

    fn device_read(
        &mut self,
        name: &str,
        indices: Option<&[i64]>,
        span: &SourceSpan,
    ) -> Result<Scalar, ExecError> {
        match self.route(name) {
            Route::Local => {
                let ctx = self.ctx.last().unwrap();
                read_plain(&ctx.locals.vars[name], name, indices, span)
            }
            Route::Value => {
                let ctx = self.ctx.last().unwrap();
                match &ctx.bindings[name] {
                    DevBinding::Value(storage) => read_plain(storage, name, indices, span),
                    DevBinding::Ref(_) => unreachable!(),
                }
            }
            Route::Ref {
                target,
                written,
                buffered,
                ..
            } => {
                let stale = !written
                    && (self.pending_contains(&target) || !self.device_valid.contains(&target));
                if stale {
                    self.stale(&target, span, StaleDirection::DeviceRead);
                    let base = self.host.vars[&target].base;
                    return Ok(Scalar::poison(base));
                }
                if buffered {
                    let ctx = self.ctx.last().unwrap();
                    let storage = ctx.buffer.as_ref().unwrap().get(&target).unwrap();
                    read_plain(storage, &target, indices, span)
                } else {
                    let storage = self.device.vars.get(&target).ok_or_else(|| {
                        ExecError::new(
                            span.clone(),
                            ExecErrorKind::UninitRead {
                                var: target.clone(),
                            },
                        )
                    })?;
                    read_plain(storage, &target, indices, span)
                }
            }
            Route::Missing => Err(ExecError::new(
                span.clone(),
                ExecErrorKind::BadValue(format!("`{name}` is not visible inside the codelet")),
            )),
        }
    }

    fn device_write(
        &mut self,
        name: &str,
        indices: Option<&[i64]>,
        value: Scalar,
        span: &SourceSpan,
    ) -> Result<(), ExecError> {
        match self.route(name) {
            Route::Local => {
                let ctx = self.ctx.last_mut().unwrap();
                write_plain(
                    ctx.locals.vars.get_mut(name).unwrap(),
                    name,
                    indices,
                    value,
                    span,
                )
            }
            Route::Value => {
                let ctx = self.ctx.last_mut().unwrap();
                match ctx.bindings.get_mut(name).unwrap() {
                    DevBinding::Value(storage) => write_plain(storage, name, indices, value, span),
                    DevBinding::Ref(_) => unreachable!(),
                }
            }
            Route::Ref {
                target,
                buffered,
                is_async,
                ..
            } => {
                let shape = self
                    .host
                    .vars
                    .get(&target)
                    .ok_or_else(|| self.undeclared(&target, span))?;
                let (base, dims) = (shape.base, shape.dims.clone());
                if is_async {
                    // Deferred visibility: write into the working copy,
                    // seeded from the current device cells.
                    if !buffered {
                        let seed = self
                            .device
                            .vars
                            .get(&target)
                            .cloned()
                            .unwrap_or_else(|| VarStorage::new(base, dims, false));
                        let ctx = self.ctx.last_mut().unwrap();
                        ctx.buffer.as_mut().unwrap().insert(target.clone(), seed);
                    }
                    let ctx = self.ctx.last_mut().unwrap();
                    ctx.written.insert(target.clone());
                    let storage = ctx.buffer.as_mut().unwrap().get_mut(&target).unwrap();
                    write_plain(storage, &target, indices, value, span)
                } else {
                    let storage = self
                        .device
                        .vars
                        .entry(target.clone())
                        .or_insert_with(|| VarStorage::new(base, dims, false));
                    write_plain(storage, &target, indices, value, span)?;
                    self.ctx.last_mut().unwrap().written.insert(target.clone());
                    self.device_valid.insert(target.clone());
                    self.host_valid.remove(&target);
                    Ok(())
                }
            }
            Route::Missing => Err(ExecError::new(
                span.clone(),
                ExecErrorKind::BadValue(format!("`{name}` is not visible inside the codelet")),
            )),
        }
    }

    // -- generic access, routed by context -----------------------------------

    fn read_cell(
        &mut self,
        name: &str,
        indices: Option<&[i64]>,
        span: &SourceSpan,
    ) -> Result<Scalar, ExecError> {
        if self.ctx.is_empty() {
            self.host_read(name, indices, span)
        } else {
            self.device_read(name, indices, span)
        }
    }

    fn write_cell(
        &mut self,
        name: &str,
        indices: Option<&[i64]>,
        value: Scalar,
        span: &SourceSpan,
    ) -> Result<(), ExecError> {
        if self.ctx.is_empty() {
            self.host_write(name, indices, value, span)
        } else {
            self.device_write(name, indices, value, span)
        }
    }

    fn eval(&mut self, expr: &Expr) -> Result<Scalar, ExecError> {
        eval_expr(expr, self)
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

    // -- statements -----------------------------------------------------------

    fn declare(&mut self, decl: &Decl) -> Result<(), ExecError> {
        let dims = decl.const_dims().ok_or_else(|| {
            ExecError::new(
                decl.span.clone(),
                ExecErrorKind::BadValue(format!("`{}` has a dynamic extent", decl.name)),
            )
        })?;
        let mut storage = VarStorage::new(decl.base, dims, self.opts.zero_init);
        if self.ctx.is_empty() {
            self.opts.bindings.apply(&decl.name, &mut storage)?;
            self.host.vars.insert(decl.name.clone(), storage);
            self.host_valid.insert(decl.name.clone());
        } else {
            self.ctx
                .last_mut()
                .unwrap()
                .locals
                .vars
                .insert(decl.name.clone(), storage);
        }
        if let Some(init) = &decl.init {
            let value = self.eval(init)?;
            self.write_cell(&decl.name, None, value, &decl.span)?;
        }
        Ok(())
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
            Stmt::PragmaMarked { body, .. } => self.exec_stmt(body),
            Stmt::Call(c) => self.exec_call(c),
            Stmt::Directive(d) => self.exec_directive(d),
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

    fn exec_print(&mut self, var: &str, span: &SourceSpan) -> Result<(), ExecError> {
        if !self.ctx.is_empty() {
            return Err(ExecError::new(
                span.clone(),
                ExecErrorKind::BadValue("print is not allowed inside a codelet".to_string()),
            ));
        }
        if !self.host.vars.contains_key(var) {
            return Err(self.undeclared(var, span));
        }
        let stale = self.pending_contains(var) || !self.host_valid.contains(var);
        if stale {
            self.stale(var, span, StaleDirection::HostRead);
            let mut poisoned = self.host.vars[var].clone();
            poisoned.poison_all();
            self.output.push(poisoned.format_value(var));
            return Ok(());
        }
        let storage = &self.host.vars[var];
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
        self.output.push(storage.format_value(var));
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
        if !self.ctx.is_empty() {
            return Err(ExecError::new(
                call.span.clone(),
                ExecErrorKind::BadValue("calls are not allowed inside a codelet".to_string()),
            ));
        }
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
        let asynchronous = call.pragma.as_ref().is_some_and(|p| p.asynchronous);
        let label = call
            .pragma
            .as_ref()
            .map(|p| p.label.clone())
            .unwrap_or_else(|| call.callee.clone());
        if asynchronous && self.pending.iter().any(|p| p.label == label) {
            return Err(ExecError::new(
                call.span.clone(),
                ExecErrorKind::SyncMissing { label },
            ));
        }

        let mut bindings = BTreeMap::new();
        for (param, arg) in func.params.iter().zip(&call.args) {
            if param.dims.is_empty() {
                // By-value scalar, captured from host state at launch.
                let value = self.eval(arg)?.convert(param.base);
                let mut storage = VarStorage::new(param.base, vec![], false);
                storage.cells[0] = Some(value);
                bindings.insert(param.name.clone(), DevBinding::Value(storage));
            } else {
                let Expr::Var(target, span) = arg else {
                    return Err(ExecError::new(
                        arg.span().clone(),
                        ExecErrorKind::BadValue(
                            "array arguments must be bare variable names".to_string(),
                        ),
                    ));
                };
                let host_shape = self
                    .host
                    .vars
                    .get(target)
                    .ok_or_else(|| self.undeclared(target, span))?;
                let (base, dims) = (host_shape.base, host_shape.dims.clone());
                self.device
                    .vars
                    .entry(target.clone())
                    .or_insert_with(|| VarStorage::new(base, dims, false));
                bindings.insert(param.name.clone(), DevBinding::Ref(target.clone()));
            }
        }

        self.ctx.push(DeviceCtx {
            bindings,
            locals: MemoryImage::new(),
            written: BTreeSet::new(),
            buffer: asynchronous.then(BTreeMap::new),
        });
        let result = self.exec_block(&func.body);
        let ctx = self.ctx.pop().expect("context pushed above");
        result?;
        if let Some(buffer) = ctx.buffer {
            self.pending.push(PendingCall {
                label,
                writes: buffer,
                span: call.span.clone(),
            });
        }
        Ok(())
    }

    fn exec_directive(&mut self, d: &DirectiveStmt) -> Result<(), ExecError> {
        match d.kind {
            DirectiveKind::AdvancedLoad => {
                let var = d.var.as_deref().unwrap_or_default().to_string();
                if !self.host.vars.contains_key(&var) {
                    return Err(self.undeclared(&var, &d.span));
                }
                let stale = self.pending_contains(&var) || !self.host_valid.contains(&var);
                if stale {
                    self.stale(&var, &d.span, StaleDirection::Upload);
                }
                let mut copy = self.host.vars[&var].clone();
                if stale {
                    copy.poison_all();
                }
                self.stats.uploads += 1;
                self.stats.bytes_up += copy.byte_size();
                self.device.vars.insert(var.clone(), copy);
                self.device_valid.insert(var);
                Ok(())
            }
            DirectiveKind::DelegateStore => {
                let var = d.var.as_deref().unwrap_or_default().to_string();
                let Some(host_storage) = self.host.vars.get(&var).cloned() else {
                    return Err(self.undeclared(&var, &d.span));
                };
                let stale = self.pending_contains(&var) || !self.device_valid.contains(&var);
                if stale {
                    self.stale(&var, &d.span, StaleDirection::Download);
                }
                let mut copy = match self.device.vars.get(&var) {
                    Some(s) => s.clone(),
                    None => host_storage,
                };
                if stale {
                    copy.poison_all();
                }
                self.stats.downloads += 1;
                self.stats.bytes_down += copy.byte_size();
                self.host.vars.insert(var.clone(), copy);
                self.host_valid.insert(var);
                Ok(())
            }
            DirectiveKind::Synchronize => {
                let label = d.label.as_deref().unwrap_or_default();
                if let Some(pos) = self.pending.iter().position(|p| p.label == label) {
                    let pending = self.pending.remove(pos);
                    for (var, storage) in pending.writes {
                        self.device.vars.insert(var.clone(), storage);
                        self.device_valid.insert(var.clone());
                        self.host_valid.remove(&var);
                    }
                }
                Ok(())
            }
            DirectiveKind::Release => Ok(()),
        }
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

/// Execute a transformed unit against the dual memory model.
pub fn interpret_dual(unit: &TranslationUnit, opts: &RunOptions) -> Result<DualOutcome, ExecError> {
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
        host: MemoryImage::new(),
        device: MemoryImage::new(),
        host_valid: BTreeSet::new(),
        device_valid: BTreeSet::new(),
        pending: Vec::new(),
        ctx: Vec::new(),
        stats: TransferStats::default(),
        stale_seen: BTreeSet::new(),
        output: Vec::new(),
        steps: 0,
    };
    for decl in &unit.global_decls {
        machine.declare(decl)?;
    }
    machine.exec_block(&main.body)?;
    if let Some(pending) = machine.pending.first() {
        return Err(ExecError::new(
            pending.span.clone(),
            ExecErrorKind::SyncMissing {
                label: pending.label.clone(),
            },
        ));
    }
    Ok(DualOutcome {
        host: machine.host,
        device: machine.device,
        host_valid: machine.host_valid,
        device_valid: machine.device_valid,
        stats: machine.stats,
        output: machine.output,
    })
}

/// Just the statistics of a dual run.
pub fn count_transfers(unit: &TranslationUnit, opts: &RunOptions) -> Result<TransferStats, ExecError> {
    interpret_dual(unit, opts).map(|o| o.stats)
}

#[cfg(test)]
mod tests {
    use super::super::{compare_outcomes, interpret_sequential};
    use super::*;
    use crate::parser::parse_source;

    const TRANSFORMED: &str = r#"#pragma hmpp <g0> group, target=CUDA

#pragma hmpp <g0> o2h_main_b0 codelet, args[n].io=in, args[A].io=in, args[C].io=out
void o2h_main_b0(int n, double A[4], double C[4]) {
  int i;
  for (i = 0; i < n; i++) {
    C[i] = A[i] * 2.0;
  }
}

int main() {
  int i;
  int n;
  double A[4];
  double C[4];
  n = 4;
  for (i = 0; i < n; i++) {
    A[i] = i * 1.5;
  }
  #pragma hmpp <g0> o2h_main_b0 advancedload, args[A]
  #pragma hmpp <g0> o2h_main_b0 callsite
  o2h_main_b0(n, A, C);
  #pragma hmpp <g0> o2h_main_b0 delegatestore, args[C]
  print(C);
  #pragma hmpp <g0> release
}
"#;

    #[test]
    fn transformed_single_kernel_runs_clean() {
        let unit = parse_source(TRANSFORMED, "t.c").unwrap();
        let out = interpret_dual(&unit, &RunOptions::default()).unwrap();
        assert_eq!(out.stats.uploads, 1);
        assert_eq!(out.stats.downloads, 1);
        assert_eq!(out.stats.bytes_up, 32);
        assert_eq!(out.stats.bytes_down, 32);
        assert!(out.stats.stale_reads.is_empty());
        assert_eq!(out.output, vec!["C = [0.0, 3.0, 6.0, 9.0]"]);
    }

    #[test]
    fn matches_sequential_original() {
        let original = "int main() {\n  int i;\n  int n;\n  double A[4];\n  double C[4];\n  n = 4;\n\
            for (i = 0; i < n; i++) { A[i] = i * 1.5; }\n\
            #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
            for (i = 0; i < n; i++) { C[i] = A[i] * 2.0; }\n\
            print(C);\n}";
        let seq = interpret_sequential(
            &parse_source(original, "o.c").unwrap(),
            &RunOptions::default(),
        )
        .unwrap();
        let dual = interpret_dual(
            &parse_source(TRANSFORMED, "t.c").unwrap(),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(compare_outcomes(&seq, &dual), Vec::<String>::new());
    }

    #[test]
    fn missing_load_is_stale() {
        let src = TRANSFORMED.replace("  #pragma hmpp <g0> o2h_main_b0 advancedload, args[A]\n", "");
        let unit = parse_source(&src, "t.c").unwrap();
        let out = interpret_dual(&unit, &RunOptions::default()).unwrap();
        assert!(!out.stats.stale_reads.is_empty());
        assert_eq!(out.stats.stale_reads[0].var, "A");
        assert_eq!(out.stats.stale_reads[0].direction, StaleDirection::DeviceRead);
    }

    #[test]
    fn missing_store_is_stale_on_host_read() {
        let src = TRANSFORMED.replace("  #pragma hmpp <g0> o2h_main_b0 delegatestore, args[C]\n", "");
        let unit = parse_source(&src, "t.c").unwrap();
        let out = interpret_dual(&unit, &RunOptions::default()).unwrap();
        assert!(out
            .stats
            .stale_reads
            .iter()
            .any(|s| s.var == "C" && s.direction == StaleDirection::HostRead));
    }

    #[test]
    fn noupdate_after_host_write_is_stale() {
        // Host writes A after the upload; the kernel then reads a stale copy.
        let src = TRANSFORMED.replace(
            "  #pragma hmpp <g0> o2h_main_b0 advancedload, args[A]\n",
            "  #pragma hmpp <g0> o2h_main_b0 advancedload, args[A]\n  A[0] = 9.0;\n",
        );
        let unit = parse_source(&src, "t.c").unwrap();
        let out = interpret_dual(&unit, &RunOptions::default()).unwrap();
        assert!(out
            .stats
            .stale_reads
            .iter()
            .any(|s| s.var == "A" && s.direction == StaleDirection::DeviceRead));
    }

    #[test]
    fn async_without_synchronize_is_an_error() {
        let src = TRANSFORMED.replace(
            "#pragma hmpp <g0> o2h_main_b0 callsite\n",
            "#pragma hmpp <g0> o2h_main_b0 callsite, asynchronous\n",
        );
        // The delegatestore of C now reads an in-flight variable (stale), and
        // the program ends without a synchronize (error).
        let unit = parse_source(&src, "t.c").unwrap();
        let err = interpret_dual(&unit, &RunOptions::default()).unwrap_err();
        assert!(matches!(err.kind, ExecErrorKind::SyncMissing { .. }));
    }

    #[test]
    fn async_with_synchronize_matches_sync() {
        let src = TRANSFORMED
            .replace(
                "#pragma hmpp <g0> o2h_main_b0 callsite\n",
                "#pragma hmpp <g0> o2h_main_b0 callsite, asynchronous\n",
            )
            .replace(
                "  #pragma hmpp <g0> o2h_main_b0 delegatestore, args[C]\n",
                "  #pragma hmpp <g0> o2h_main_b0 synchronize\n  #pragma hmpp <g0> o2h_main_b0 delegatestore, args[C]\n",
            );
        let unit = parse_source(&src, "t.c").unwrap();
        let out = interpret_dual(&unit, &RunOptions::default()).unwrap();
        assert!(out.stats.stale_reads.is_empty());
        assert_eq!(out.output, vec!["C = [0.0, 3.0, 6.0, 9.0]"]);
    }

    #[test]
    fn redundant_load_costs_bytes_but_keeps_memory() {
        let src = TRANSFORMED.replace(
            "  #pragma hmpp <g0> o2h_main_b0 advancedload, args[A]\n",
            "  #pragma hmpp <g0> o2h_main_b0 advancedload, args[A]\n  #pragma hmpp <g0> o2h_main_b0 advancedload, args[A]\n",
        );
        let unit = parse_source(&src, "t.c").unwrap();
        let out = interpret_dual(&unit, &RunOptions::default()).unwrap();
        assert_eq!(out.stats.uploads, 2);
        assert!(out.stats.stale_reads.is_empty());
        assert_eq!(out.output, vec!["C = [0.0, 3.0, 6.0, 9.0]"]);
    }
}
