//! Transfer planning: where advancedload/delegatestore directives go, which
//! variables stay device-resident (noupdate), which callsites run
//! asynchronously, and where synchronize/release land.
//!
//! Loads hoist to just after the last CPU write of the variable, stepping out
//! of loop nests that do not contain the callsite. Stores sink to just before
//! the first CPU read after the callsite, stepping out of the reading nest.
//! A variable whose device copy is still valid at a later callsite in the
//! same group is not reloaded; the callsite marks it `noupdate`. When a
//! placement would be unsafe — conditional callsites, writes reachable only
//! through one branch, loop-carried host traffic — the variable degrades to
//! the naive position next to the callsite, which is always safe.

use crate::analysis::{
    hoist_point_after_write, last_cpu_write_before, sink_point_before_read,
    AccessEvent, AccessKind, AnchorKind, Host, Timelines,
};
use crate::ast::*;
use crate::outline::CodeletSpec;
use crate::validate::collect_symbols;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InsertionPoint {
    pub edge: Edge,
    pub anchor: NestPath,
}

impl InsertionPoint {
    pub fn before(anchor: NestPath) -> Self {
        InsertionPoint {
            edge: Edge::Before,
            anchor,
        }
    }

    pub fn after(anchor: NestPath) -> Self {
        InsertionPoint {
            edge: Edge::After,
            anchor,
        }
    }

    pub fn key(&self) -> Vec<i64> {
        position_key(&self.anchor, self.edge)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferDirective {
    pub kind: DirectiveKind,
    pub var: Option<String>,
    pub at: InsertionPoint,
    pub label: String,
}

/// Rendering rank for directives sharing one insertion anchor:
/// synchronize, advancedloads, (the statement), delegatestores, release.
pub fn directive_class(kind: DirectiveKind) -> u8 {
    match kind {
        DirectiveKind::Synchronize => 0,
        DirectiveKind::AdvancedLoad => 1,
        DirectiveKind::DelegateStore => 3,
        DirectiveKind::Release => 4,
    }
}

pub const CALLSITE_CLASS: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LoadReason {
    HoistedAfterLoop,
    HoistedAfterIf,
    AdjacentAfterWrite,
    NoPriorCpuWrite,
    DeviceResident,
    /// Reported for write-only parameters that never need an upload.
    NotReadInKernel,
    AtCallsite,
    DegradedNaive,
}

impl LoadReason {
    pub fn code(self) -> &'static str {
        match self {
            LoadReason::HoistedAfterLoop => "HOISTED_AFTER_LOOP",
            LoadReason::HoistedAfterIf => "HOISTED_AFTER_IF",
            LoadReason::AdjacentAfterWrite => "ADJACENT_AFTER_WRITE",
            LoadReason::NoPriorCpuWrite => "NO_PRIOR_CPU_WRITE",
            LoadReason::DeviceResident => "DEVICE_RESIDENT",
            LoadReason::NotReadInKernel => "NOT_READ_IN_KERNEL",
            LoadReason::AtCallsite => "AT_CALLSITE",
            LoadReason::DegradedNaive => "DEGRADED_NAIVE",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StoreReason {
    SunkBeforeLoop,
    SunkBeforeIf,
    SunkBeforeRead,
    NoLaterCpuRead,
    OverwrittenOnHost,
    DeviceConsumed,
    /// Reported for read-only parameters, whose host copy stays valid.
    NotWrittenInKernel,
    AtCallsite,
    DegradedNaive,
}

impl StoreReason {
    pub fn code(self) -> &'static str {
        match self {
            StoreReason::SunkBeforeLoop => "SUNK_BEFORE_LOOP",
            StoreReason::SunkBeforeIf => "SUNK_BEFORE_IF",
            StoreReason::SunkBeforeRead => "SUNK_BEFORE_READ",
            StoreReason::NoLaterCpuRead => "NO_LATER_CPU_READ",
            StoreReason::OverwrittenOnHost => "OVERWRITTEN_ON_HOST",
            StoreReason::DeviceConsumed => "DEVICE_CONSUMED",
            StoreReason::NotWrittenInKernel => "NOT_WRITTEN_IN_KERNEL",
            StoreReason::AtCallsite => "AT_CALLSITE",
            StoreReason::DegradedNaive => "DEGRADED_NAIVE",
        }
    }
}

/// Planned outcome for one parameter at one callsite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarDecision {
    pub load: Option<InsertionPoint>,
    pub load_reason: Option<LoadReason>,
    pub store: Option<InsertionPoint>,
    pub store_reason: Option<StoreReason>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferPlan {
    pub group_name: Option<String>,
    pub member_labels: Vec<String>,
    pub mapbyname: Vec<String>,
    pub directives: Vec<TransferDirective>,
    /// Per-callsite variables whose device copy is reused without a reload.
    pub noupdate: BTreeMap<String, Vec<String>>,
    pub async_callsites: BTreeSet<String>,
    /// label → variable → decision, for the report.
    pub decisions: BTreeMap<String, BTreeMap<String, VarDecision>>,
    pub degradations: Vec<String>,
}

impl TransferPlan {
    pub fn empty() -> Self {
        TransferPlan {
            group_name: None,
            member_labels: Vec::new(),
            mapbyname: Vec::new(),
            directives: Vec::new(),
            noupdate: BTreeMap::new(),
            async_callsites: BTreeSet::new(),
            decisions: BTreeMap::new(),
            degradations: Vec::new(),
        }
    }

    pub fn sort_directives(&mut self) {
        self.directives.sort_by(|a, b| {
            (a.at.key(), directive_class(a.kind), &a.label, &a.var).cmp(&(
                b.at.key(),
                directive_class(b.kind),
                &b.label,
                &b.var,
            ))
        });
    }
}

/// All codelets of one function form one group; the shared-variable map lists
/// every device-resident parameter used by at least two member codelets.
pub fn group_codelets(
    unit: &TranslationUnit,
    codelets: &[CodeletSpec],
) -> (String, Vec<String>, Vec<String>) {
    let labels: Vec<String> = codelets.iter().map(|c| c.label.clone()).collect();
    let symbols = collect_symbols(unit);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for codelet in codelets {
        for param in codelet.params.iter().filter(|p| p.device_resident()) {
            *counts.entry(param.name.as_str()).or_insert(0) += 1;
        }
    }
    let mut shared: Vec<(usize, String)> = counts
        .into_iter()
        .filter(|(_, n)| *n >= 2)
        .map(|(name, _)| {
            let order = symbols.get(name).map(|s| s.order).unwrap_or(usize::MAX);
            (order, name.to_string())
        })
        .collect();
    shared.sort();
    (
        "g0".to_string(),
        labels,
        shared.into_iter().map(|(_, name)| name).collect(),
    )
}

/// Loop statements (as path prefixes) that contain `inner` but not `anchor`:
/// the loops a hoisted/sunk directive would escape.
fn escaped_loops(inner: &NestPath, anchor: &NestPath) -> Vec<NestPath> {
    let mut out = Vec::new();
    for depth in 0..inner.len() {
        if inner.0[depth].kind == BlockKind::ForBody {
            // Loop statement owning this body.
            let loop_stmt = inner.truncated(depth);
            let anchor_inside = anchor.starts_with(&loop_stmt) && anchor.len() > loop_stmt.len();
            if !anchor_inside {
                out.push(loop_stmt);
            }
        }
    }
    out
}

fn cpu_events_inside(
    timelines: &Timelines,
    var: &str,
    prefix: &NestPath,
    kind: Option<AccessKind>,
) -> Vec<AccessEvent> {
    timelines
        .get(var)
        .map(|tl| {
            tl.events
                .iter()
                .filter(|e| {
                    e.host == Host::Cpu
                        && e.point.starts_with(prefix)
                        && kind.map_or(true, |k| e.kind == k)
                })
                .cloned()
                .collect()
        })
        .unwrap_or_default()
}

/// True when placing the directive at `anchor` would skip loop iterations
/// that also touch the variable on the CPU.
fn load_anchor_unsafe(
    timelines: &Timelines,
    var: &str,
    anchor: &NestPath,
    callsite: &NestPath,
) -> bool {
    escaped_loops(callsite, anchor)
        .iter()
        .any(|l| !cpu_events_inside(timelines, var, l, Some(AccessKind::Write)).is_empty())
}

/// A CPU read of the variable inside a loop around the callsite, positioned
/// before it in document order, consumes the previous iteration's kernel
/// result: only a store right at the callsite refreshes it in time.
fn store_needs_per_iteration(timelines: &Timelines, var: &str, callsite: &NestPath) -> bool {
    let cs_key = position_key(callsite, Edge::At);
    for depth in 0..callsite.len() {
        if callsite.0[depth].kind == BlockKind::ForBody {
            let loop_stmt = callsite.truncated(depth);
            let reads = cpu_events_inside(timelines, var, &loop_stmt, Some(AccessKind::Read));
            if reads
                .iter()
                .any(|e| position_key(&e.point, Edge::At) < cs_key)
            {
                return true;
            }
        }
    }
    false
}

/// How the planner tracks whether a device copy is still valid at a later
/// point: valid since `since` unless a CPU write intervenes.
#[derive(Clone, Debug)]
pub struct DeviceValidity {
    since: Vec<i64>,
    /// Anchor the validity stems from (load anchor or producer callsite).
    source: NestPath,
}

fn device_valid_at(
    validity: &BTreeMap<String, DeviceValidity>,
    timelines: &Timelines,
    var: &str,
    callsite: &NestPath,
) -> bool {
    let Some(v) = validity.get(var) else {
        return false;
    };
    let cs_key = position_key(callsite, Edge::At);
    if v.since >= cs_key {
        return false;
    }
    let invalidated = timelines.get(var).is_some_and(|tl| {
        tl.events.iter().any(|e| {
            e.host == Host::Cpu
                && e.kind == AccessKind::Write
                && position_key(&e.point, Edge::At) > v.since
                && position_key(&e.point, Edge::At) < cs_key
        })
    });
    if invalidated {
        return false;
    }
    // A validity source outside a loop around the consumer cannot survive
    // loop-carried CPU writes inside that loop.
    !load_anchor_unsafe(timelines, var, &v.source, callsite)
}

/// Decide the advancedload for one reading parameter of one callsite.
/// Returns the decision plus an optional degradation note.
pub fn plan_advanced_load(
    var: &str,
    codelet: &CodeletSpec,
    timelines: &Timelines,
    validity: &BTreeMap<String, DeviceValidity>,
) -> (Option<InsertionPoint>, LoadReason, Option<String>) {
    let callsite = &codelet.callsite_path;
    let naive = || InsertionPoint::before(callsite.clone());
    if device_valid_at(validity, timelines, var, callsite) {
        return (None, LoadReason::DeviceResident, None);
    }
    if callsite.conditional() {
        return (
            Some(naive()),
            LoadReason::DegradedNaive,
            Some(format!(
                "{}: load of `{var}` kept at the callsite (conditional callsite)",
                codelet.label
            )),
        );
    }
    let Some(timeline) = timelines.get(var) else {
        return (None, LoadReason::NoPriorCpuWrite, None);
    };
    let Some(write) = last_cpu_write_before(timeline, callsite) else {
        return (None, LoadReason::NoPriorCpuWrite, None);
    };
    match hoist_point_after_write(&write.point, callsite) {
        Err(_) => (
            Some(naive()),
            LoadReason::DegradedNaive,
            Some(format!(
                "{}: load of `{var}` kept at the callsite (write reachable only through one branch)",
                codelet.label
            )),
        ),
        Ok(placement) => {
            if load_anchor_unsafe(timelines, var, &placement.anchor, callsite) {
                return (
                    Some(naive()),
                    LoadReason::DegradedNaive,
                    Some(format!(
                        "{}: load of `{var}` kept at the callsite (loop-carried CPU write)",
                        codelet.label
                    )),
                );
            }
            let reason = match placement.kind {
                AnchorKind::EventStmt => LoadReason::AdjacentAfterWrite,
                AnchorKind::Loop | AnchorKind::Block => LoadReason::HoistedAfterLoop,
                AnchorKind::If => LoadReason::HoistedAfterIf,
            };
            (Some(InsertionPoint::after(placement.anchor)), reason, None)
        }
    }
}

/// Decide the delegatestore for one writing parameter of one callsite.
pub fn plan_delegate_store(
    var: &str,
    codelet: &CodeletSpec,
    timelines: &Timelines,
) -> (Option<InsertionPoint>, StoreReason, Option<String>) {
    let callsite = &codelet.callsite_path;
    let naive = || InsertionPoint::after(callsite.clone());
    if callsite.conditional() {
        return (
            Some(naive()),
            StoreReason::DegradedNaive,
            Some(format!(
                "{}: store of `{var}` kept at the callsite (conditional callsite)",
                codelet.label
            )),
        );
    }
    if store_needs_per_iteration(timelines, var, callsite) {
        return (
            Some(naive()),
            StoreReason::DegradedNaive,
            Some(format!(
                "{}: store of `{var}` kept at the callsite (loop-carried CPU read)",
                codelet.label
            )),
        );
    }
    let Some(timeline) = timelines.get(var) else {
        return (None, StoreReason::NoLaterCpuRead, None);
    };
    // Scan forward past this kernel's own accesses: GPU reads by other
    // kernels are transparent (the device copy stays put); the first CPU
    // access or GPU overwrite decides.
    let cs_key = position_key(callsite, Edge::At);
    let mut gpu_read_seen = false;
    for event in &timeline.events {
        if position_key(&event.point, Edge::At) <= cs_key
            || event.host == Host::Gpu(codelet.block_index)
        {
            continue;
        }
        match (event.host, event.kind) {
            (Host::Gpu(_), AccessKind::Read) => gpu_read_seen = true,
            (Host::Gpu(_), AccessKind::Write) => {
                return (None, StoreReason::DeviceConsumed, None);
            }
            (Host::Cpu, AccessKind::Write) => {
                return (None, StoreReason::OverwrittenOnHost, None);
            }
            (Host::Cpu, AccessKind::Read) => {
                return match sink_point_before_read(&event.point, callsite) {
                    Err(_) => (
                        Some(naive()),
                        StoreReason::DegradedNaive,
                        Some(format!(
                            "{}: store of `{var}` kept at the callsite (read reachable only through one branch)",
                            codelet.label
                        )),
                    ),
                    Ok(placement) => {
                        let reason = match placement.kind {
                            AnchorKind::EventStmt => StoreReason::SunkBeforeRead,
                            AnchorKind::Loop | AnchorKind::Block => StoreReason::SunkBeforeLoop,
                            AnchorKind::If => StoreReason::SunkBeforeIf,
                        };
                        (Some(InsertionPoint::before(placement.anchor)), reason, None)
                    }
                };
            }
        }
    }
    if gpu_read_seen {
        (None, StoreReason::DeviceConsumed, None)
    } else {
        (None, StoreReason::NoLaterCpuRead, None)
    }
}

/// Why a write-only parameter needs no upload: either nothing meaningful
/// exists on the host yet, or the device copy is already current.
fn advisory_load_reason(
    var: &str,
    codelet: &CodeletSpec,
    timelines: &Timelines,
    validity: &BTreeMap<String, DeviceValidity>,
) -> LoadReason {
    if device_valid_at(validity, timelines, var, &codelet.callsite_path) {
        return LoadReason::DeviceResident;
    }
    let has_prior_write = timelines
        .get(var)
        .and_then(|tl| last_cpu_write_before(tl, &codelet.callsite_path))
        .is_some();
    if has_prior_write {
        LoadReason::NotReadInKernel
    } else {
        LoadReason::NoPriorCpuWrite
    }
}

/// Why a read-only parameter needs no download: the host copy stays valid.
/// The specific reason mirrors the store scan so the report reads uniformly.
fn advisory_store_reason(var: &str, codelet: &CodeletSpec, timelines: &Timelines) -> StoreReason {
    let Some(timeline) = timelines.get(var) else {
        return StoreReason::NoLaterCpuRead;
    };
    let cs_key = position_key(&codelet.callsite_path, Edge::At);
    for event in &timeline.events {
        if position_key(&event.point, Edge::At) <= cs_key
            || event.host == Host::Gpu(codelet.block_index)
        {
            continue;
        }
        match (event.host, event.kind) {
            (Host::Gpu(_), AccessKind::Read) => continue,
            (Host::Gpu(_), AccessKind::Write) => return StoreReason::DeviceConsumed,
            (Host::Cpu, AccessKind::Write) => return StoreReason::OverwrittenOnHost,
            (Host::Cpu, AccessKind::Read) => return StoreReason::NotWrittenInKernel,
        }
    }
    StoreReason::NoLaterCpuRead
}

/// Output variables of a codelet: device-resident parameters it writes.
fn output_vars(codelet: &CodeletSpec) -> Vec<&str> {
    codelet
        .params
        .iter()
        .filter(|p| p.device_resident() && p.intent.writes())
        .map(|p| p.name.as_str())
        .collect()
}

/// Mark callsites asynchronous when there is something to overlap with:
/// either a statement between the callsite and the first use of its outputs,
/// or an earlier async callsite still in flight. The last callsite of the
/// group stays synchronous, as does anything nested in a loop or branch.
pub fn plan_async(
    codelets: &[CodeletSpec],
    timelines: &Timelines,
    plan: &mut TransferPlan,
) {
    if plan.group_name.is_none() {
        return;
    }
    // (label, sync key) of async callsites still pending at a given point.
    let mut pending: Vec<(String, Vec<i64>)> = Vec::new();
    for (pos, codelet) in codelets.iter().enumerate() {
        if pos + 1 == codelets.len() {
            break;
        }
        let callsite = &codelet.callsite_path;
        if callsite.len() != 1 || callsite.conditional() {
            continue;
        }
        let cs_key = position_key(callsite, Edge::At);
        let outputs = output_vars(codelet);

        // First dependent use: CPU access of an output, a later callsite
        // touching an output, or this callsite's own planned store.
        let mut first_dep: Option<(Vec<i64>, InsertionPoint)> = None;
        let mut consider = |key: Vec<i64>, at: InsertionPoint| {
            if first_dep.as_ref().is_none_or(|(k, _)| key < *k) {
                first_dep = Some((key, at));
            }
        };
        for var in &outputs {
            if let Some(tl) = timelines.get(*var) {
                for event in &tl.events {
                    if event.host == Host::Cpu && position_key(&event.point, Edge::At) > cs_key {
                        consider(
                            position_key(&event.point, Edge::At),
                            InsertionPoint::before(event.point.clone()),
                        );
                        break;
                    }
                }
            }
            for later in &codelets[pos + 1..] {
                if later.param(var).is_some_and(|p| p.device_resident()) {
                    consider(
                        position_key(&later.callsite_path, Edge::At),
                        InsertionPoint::before(later.callsite_path.clone()),
                    );
                    break;
                }
            }
        }
        for directive in &plan.directives {
            if directive.kind == DirectiveKind::DelegateStore
                && directive.label == codelet.label
                && directive
                    .var
                    .as_deref()
                    .is_some_and(|v| outputs.contains(&v))
            {
                consider(directive.at.key(), directive.at.clone());
            }
        }

        let overlap = match &first_dep {
            None => true,
            Some((dep_key, _)) => {
                // Is there at least one top-level statement executing between
                // this callsite and the first use of its outputs? A use
                // anchored after statement s lets s itself overlap; a use
                // anchored before (or at) s does not.
                let cs_index = callsite.0[0].index as i64;
                let dep_index = dep_key[0];
                let dep_after_top_level = dep_key.len() == 3 && dep_key[2] == i64::MAX;
                let gap = if dep_after_top_level {
                    dep_index > cs_index
                } else {
                    dep_index > cs_index + 1
                };
                let still_pending = pending.iter().any(|(_, sync)| *sync >= cs_key);
                gap || still_pending
            }
        };
        if !overlap {
            continue;
        }
        plan.async_callsites.insert(codelet.label.clone());
        let sync_at = first_dep
            .map(|(_, at)| at)
            .unwrap_or_else(|| provisional_end(codelets, &plan.directives));
        pending.push((codelet.label.clone(), sync_at.key()));
        plan.directives.push(TransferDirective {
            kind: DirectiveKind::Synchronize,
            var: None,
            at: sync_at,
            label: codelet.label.clone(),
        });
    }
}

/// The point after the last callsite or directive, used for syncs with no
/// dependent use and for the release.
fn provisional_end(codelets: &[CodeletSpec], directives: &[TransferDirective]) -> InsertionPoint {
    let mut best: Option<(Vec<i64>, u8, InsertionPoint)> = None;
    let mut consider = |key: Vec<i64>, class: u8, at: InsertionPoint| {
        let better = match &best {
            None => true,
            Some((k, c, _)) => (key.clone(), class) > (k.clone(), *c),
        };
        if better {
            best = Some((key, class, at));
        }
    };
    for codelet in codelets {
        let at = InsertionPoint::after(codelet.callsite_path.clone());
        consider(at.key(), CALLSITE_CLASS, at);
    }
    for d in directives {
        consider(d.at.key(), directive_class(d.kind), d.at.clone());
    }
    best.map(|(_, _, at)| at)
        .expect("at least one callsite exists")
}

/// One release per group, after the last callsite and the last directive.
pub fn plan_release(codelets: &[CodeletSpec], plan: &TransferPlan) -> TransferDirective {
    let group = plan.group_name.clone().unwrap_or_else(|| "g0".to_string());
    TransferDirective {
        kind: DirectiveKind::Release,
        var: None,
        at: provisional_end(codelets, &plan.directives),
        label: group,
    }
}

/// Build the optimized transfer plan for a whole translation unit.
pub fn build_plan(
    unit: &TranslationUnit,
    codelets: &[CodeletSpec],
    timelines: &Timelines,
) -> TransferPlan {
    if codelets.is_empty() {
        return TransferPlan::empty();
    }
    let (group_name, member_labels, mapbyname) = group_codelets(unit, codelets);
    let mut plan = TransferPlan {
        group_name: Some(group_name),
        member_labels,
        mapbyname,
        ..TransferPlan::empty()
    };
    let mut validity: BTreeMap<String, DeviceValidity> = BTreeMap::new();

    for codelet in codelets {
        let mut decisions: BTreeMap<String, VarDecision> = BTreeMap::new();
        for param in codelet.params.iter().filter(|p| p.device_resident()) {
            let mut decision = VarDecision {
                load: None,
                load_reason: None,
                store: None,
                store_reason: None,
            };
            if param.intent.reads() {
                let (load, reason, degradation) =
                    plan_advanced_load(&param.name, codelet, timelines, &validity);
                if reason == LoadReason::DeviceResident {
                    plan.noupdate
                        .entry(codelet.label.clone())
                        .or_default()
                        .push(param.name.clone());
                }
                if let Some(at) = &load {
                    plan.directives.push(TransferDirective {
                        kind: DirectiveKind::AdvancedLoad,
                        var: Some(param.name.clone()),
                        at: at.clone(),
                        label: codelet.label.clone(),
                    });
                    validity.insert(
                        param.name.clone(),
                        DeviceValidity {
                            since: at.key(),
                            source: at.anchor.clone(),
                        },
                    );
                }
                if let Some(note) = degradation {
                    plan.degradations.push(note);
                }
                decision.load = load;
                decision.load_reason = Some(reason);
            } else {
                decision.load_reason = Some(advisory_load_reason(
                    &param.name,
                    codelet,
                    timelines,
                    &validity,
                ));
            }
            if param.intent.writes() {
                let (store, reason, degradation) =
                    plan_delegate_store(&param.name, codelet, timelines);
                if let Some(at) = &store {
                    plan.directives.push(TransferDirective {
                        kind: DirectiveKind::DelegateStore,
                        var: Some(param.name.clone()),
                        at: at.clone(),
                        label: codelet.label.clone(),
                    });
                }
                if let Some(note) = degradation {
                    plan.degradations.push(note);
                }
                decision.store = store;
                decision.store_reason = Some(reason);
            } else {
                decision.store_reason =
                    Some(advisory_store_reason(&param.name, codelet, timelines));
            }
            decisions.insert(param.name.clone(), decision);
        }
        // The kernel's own writes leave valid device copies behind — unless
        // the callsite itself is conditional, in which case the device state
        // of its outputs is uncertain afterwards.
        for var in output_vars(codelet) {
            if codelet.callsite_path.conditional() {
                validity.remove(var);
            } else {
                validity.insert(
                    var.to_string(),
                    DeviceValidity {
                        since: position_key(&codelet.callsite_path, Edge::At),
                        source: codelet.callsite_path.clone(),
                    },
                );
            }
        }
        plan.decisions.insert(codelet.label.clone(), decisions);
    }

    plan_async(codelets, timelines, &mut plan);
    let release = plan_release(codelets, &plan);
    plan.directives.push(release);
    plan.sort_directives();
    plan
}

/// The unoptimized baseline: load every read parameter right before its
/// callsite, store every written parameter right after, no noupdate, no
/// async.
pub fn naive_plan(unit: &TranslationUnit, codelets: &[CodeletSpec]) -> TransferPlan {
    if codelets.is_empty() {
        return TransferPlan::empty();
    }
    let (group_name, member_labels, _) = group_codelets(unit, codelets);
    let mut plan = TransferPlan {
        group_name: Some(group_name),
        member_labels,
        ..TransferPlan::empty()
    };
    for codelet in codelets {
        let mut decisions: BTreeMap<String, VarDecision> = BTreeMap::new();
        for param in codelet.params.iter().filter(|p| p.device_resident()) {
            let mut decision = VarDecision {
                load: None,
                load_reason: None,
                store: None,
                store_reason: None,
            };
            if param.intent.reads() {
                let at = InsertionPoint::before(codelet.callsite_path.clone());
                plan.directives.push(TransferDirective {
                    kind: DirectiveKind::AdvancedLoad,
                    var: Some(param.name.clone()),
                    at: at.clone(),
                    label: codelet.label.clone(),
                });
                decision.load = Some(at);
                decision.load_reason = Some(LoadReason::AtCallsite);
            }
            if param.intent.writes() {
                let at = InsertionPoint::after(codelet.callsite_path.clone());
                plan.directives.push(TransferDirective {
                    kind: DirectiveKind::DelegateStore,
                    var: Some(param.name.clone()),
                    at: at.clone(),
                    label: codelet.label.clone(),
                });
                decision.store = Some(at);
                decision.store_reason = Some(StoreReason::AtCallsite);
            }
            decisions.insert(param.name.clone(), decision);
        }
        plan.decisions.insert(codelet.label.clone(), decisions);
    }
    let release = plan_release(codelets, &plan);
    plan.directives.push(release);
    plan.sort_directives();
    plan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::build_access_timeline;
    use crate::outline::outline_all;
    use crate::parser::parse_source;
    use crate::validate::{find_gpu_blocks, validate_subset};

    fn plan_for(src: &str) -> (TransferPlan, Vec<CodeletSpec>, Timelines) {
        let unit = parse_source(src, "t.c").unwrap();
        assert_eq!(validate_subset(&unit), vec![]);
        let blocks = find_gpu_blocks(&unit);
        let timelines = build_access_timeline(&unit, &blocks);
        let (codelets, _) = outline_all(&unit, &blocks, &timelines);
        let plan = build_plan(&unit, &codelets, &timelines);
        (plan, codelets, timelines)
    }

    const FIG1_LIKE: &str = "int main() {\n  int i;\n  int n;\n  double A[4];\n  double C[4];\n  n = 4;\n\
        for (i = 0; i < n; i++) { A[i] = i * 1.5; }\n\
        #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
        for (i = 0; i < n; i++) { C[i] = A[i] * 2.0; }\n\
        print(C);\n}";

    #[test]
    fn single_kernel_plan_shape() {
        let (plan, codelets, _) = plan_for(FIG1_LIKE);
        let b0 = &codelets[0].label;
        let d = &plan.decisions[b0];
        // A's last CPU write sits inside the init loop, so the load hoists
        // to just after that loop; A is never read on the CPU afterwards, so
        // no store. C is the inverse: never uploaded, stored before the read.
        assert_eq!(d["A"].load_reason, Some(LoadReason::HoistedAfterLoop));
        assert_eq!(d["A"].store_reason, Some(StoreReason::NoLaterCpuRead));
        assert!(d["A"].store.is_none());
        assert_eq!(d["C"].load_reason, Some(LoadReason::NoPriorCpuWrite));
        assert!(d["C"].load.is_none());
        assert_eq!(d["C"].store_reason, Some(StoreReason::SunkBeforeRead));
        // Load A after the init loop, store C before the print, then release.
        let kinds: Vec<_> = plan.directives.iter().map(|d| d.kind).collect();
        assert_eq!(
            kinds,
            vec![
                DirectiveKind::AdvancedLoad,
                DirectiveKind::DelegateStore,
                DirectiveKind::Release
            ]
        );
        assert!(plan.async_callsites.is_empty());
    }

    #[test]
    fn no_blocks_empty_plan() {
        let unit = parse_source("int main() { int a; a = 1; }", "t.c").unwrap();
        let blocks = find_gpu_blocks(&unit);
        let timelines = build_access_timeline(&unit, &blocks);
        let (codelets, _) = outline_all(&unit, &blocks, &timelines);
        let plan = build_plan(&unit, &codelets, &timelines);
        assert_eq!(plan, TransferPlan::empty());
    }

    const PIPE2: &str = "int main() {\n  int i;\n  int n;\n  double A[8];\n  double E[8];\n  double G[8];\n  n = 8;\n\
        for (i = 0; i < n; i++) { A[i] = i * 0.5; }\n\
        #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
        for (i = 0; i < n; i++) { E[i] = A[i] + 1.0; }\n\
        #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
        for (i = 0; i < n; i++) { G[i] = E[i] * 2.0; }\n\
        print(G);\n}";

    #[test]
    fn intermediate_stays_device_resident() {
        let (plan, codelets, _) = plan_for(PIPE2);
        let b0 = &codelets[0].label;
        let b1 = &codelets[1].label;
        // E: produced by b0 with no prior CPU write, consumed by b1 without a reload.
        assert_eq!(
            plan.decisions[b0]["E"].load_reason,
            Some(LoadReason::NoPriorCpuWrite)
        );
        assert!(plan.decisions[b0]["E"].load.is_none());
        assert_eq!(
            plan.decisions[b0]["E"].store_reason,
            Some(StoreReason::DeviceConsumed)
        );
        assert_eq!(
            plan.decisions[b1]["E"].load_reason,
            Some(LoadReason::DeviceResident)
        );
        assert_eq!(plan.noupdate[b1], vec!["E"]);
        assert_eq!(plan.mapbyname, vec!["E"]);
        // Immediate consumer: nothing to overlap with, so b0 stays synchronous.
        assert!(plan.async_callsites.is_empty());
    }

    #[test]
    fn cpu_write_between_kernels_forces_reload() {
        let src = "int main() {\n  int i;\n  int n;\n  double A[8];\n  double E[8];\n  double G[8];\n  n = 8;\n\
            for (i = 0; i < n; i++) { A[i] = i * 0.5; }\n\
            #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
            for (i = 0; i < n; i++) { E[i] = A[i] + 1.0; }\n\
            for (i = 0; i < n; i++) { E[i] = 0.0; }\n\
            #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
            for (i = 0; i < n; i++) { G[i] = E[i] * 2.0; }\n\
            print(G);\n}";
        let (plan, codelets, _) = plan_for(src);
        let b1 = &codelets[1].label;
        assert_eq!(
            plan.decisions[b1]["E"].load_reason,
            Some(LoadReason::HoistedAfterLoop)
        );
        assert!(!plan.noupdate.contains_key(b1));
    }

    #[test]
    fn hoist_escapes_loop_nest_and_store_sinks() {
        let src = "int main() {\n  int i;\n  int j;\n  int t;\n  int n;\n  double A[4][4];\n  double C[4][4];\n  n = 4;\n\
            for (i = 0; i < n; i++) { for (j = 0; j < n; j++) { A[i][j] = i + j * 0.5; } }\n\
            for (t = 0; t < 3; t++) {\n\
              #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
              for (i = 0; i < n; i++) { for (j = 0; j < n; j++) { C[i][j] = A[i][j] + t; } }\n\
            }\n\
            print(C);\n}";
        let (plan, codelets, _) = plan_for(src);
        let b0 = &codelets[0].label;
        assert_eq!(
            plan.decisions[b0]["A"].load_reason,
            Some(LoadReason::HoistedAfterLoop)
        );
        // The load anchors at top level (after the init nest), outside the t loop.
        let load = plan.decisions[b0]["A"].load.as_ref().unwrap();
        assert_eq!(load.anchor.len(), 1);
        let store = plan.decisions[b0]["C"].store.as_ref().unwrap();
        assert_eq!(store.anchor.len(), 1);
        assert_eq!(
            plan.decisions[b0]["C"].store_reason,
            Some(StoreReason::SunkBeforeRead)
        );
    }

    #[test]
    fn loop_carried_cpu_write_degrades_load() {
        let src = "int main() {\n  int i;\n  int t;\n  int n;\n  double A[4];\n  double C[4];\n  n = 4;\n\
            for (i = 0; i < n; i++) { A[i] = 1.0; }\n\
            for (t = 0; t < 3; t++) {\n\
              #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
              for (i = 0; i < n; i++) { C[i] = A[i] + t; }\n\
              for (i = 0; i < n; i++) { A[i] = A[i] + 1.0; }\n\
            }\n\
            print(C);\n}";
        let (plan, codelets, _) = plan_for(src);
        let b0 = &codelets[0].label;
        assert_eq!(
            plan.decisions[b0]["A"].load_reason,
            Some(LoadReason::DegradedNaive)
        );
        let load = plan.decisions[b0]["A"].load.as_ref().unwrap();
        assert_eq!(load.edge, Edge::Before);
        assert_eq!(load.anchor, codelets[0].callsite_path);
        assert!(!plan.degradations.is_empty());
    }

    #[test]
    fn naive_plan_is_all_at_callsite() {
        let (_, codelets, _) = plan_for(FIG1_LIKE);
        let unit = parse_source(FIG1_LIKE, "t.c").unwrap();
        let plan = naive_plan(&unit, &codelets);
        for d in plan
            .directives
            .iter()
            .filter(|d| d.kind != DirectiveKind::Release)
        {
            assert_eq!(d.at.anchor, codelets[0].callsite_path);
        }
        assert!(plan.async_callsites.is_empty());
        assert!(plan.noupdate.is_empty());
    }

    #[test]
    fn plans_are_deterministic() {
        let (p1, _, _) = plan_for(PIPE2);
        let (p2, _, _) = plan_for(PIPE2);
        assert_eq!(p1, p2);
    }
}
