//! Brute-force minimality oracle: enumerate every placement of loads and
//! stores over the statement boundaries visible from each callsite, keep the
//! plans whose dual interpretation is error- and stale-free, and report the
//! minimum transfer volume. Intended for desk-scale programs (at most a
//! couple of kernels and a handful of candidate variables).

use super::{interpret_dual, ExecError, ExecErrorKind, RunOptions};
use crate::analysis::build_access_timeline;
use crate::ast::{BlockKind, DirectiveKind, NestPath, TranslationUnit};
use crate::emit::apply_plan;
use crate::outline::{outline_all, CodeletSpec};
use crate::plan::{group_codelets, plan_release, InsertionPoint, TransferDirective, TransferPlan};
use crate::span::SourceSpan;
use crate::validate::find_gpu_blocks;

#[derive(Clone, Debug)]
pub struct EnumerationOutcome {
    pub plans_considered: u64,
    pub legal_plans: u64,
    pub min_volume: Option<u64>,
    pub best_plan: Option<TransferPlan>,
}

/// One choice axis: a load or store for one parameter of one callsite.
struct Axis {
    label: String,
    var: String,
    kind: DirectiveKind,
    /// `None` (no directive) plus each candidate anchor.
    options: Vec<Option<InsertionPoint>>,
}

/// Statement slots of every block on the path from the root to the callsite:
/// before each statement of the block, plus after its last statement.
fn candidate_anchors(unit: &TranslationUnit, callsite: &NestPath) -> Vec<InsertionPoint> {
    let main = unit.main().expect("validated unit has main");
    let mut anchors = Vec::new();
    let mut prefixes: Vec<NestPath> = vec![NestPath::root()];
    for k in 1..callsite.len() {
        prefixes.push(callsite.truncated(k));
    }
    for prefix in prefixes {
        // Count the children of this block by probing indices.
        let kind = if prefix.is_empty() {
            BlockKind::Compound
        } else {
            callsite.0[prefix.len()].kind
        };
        let mut index = 0;
        loop {
            let child = prefix.child(index, kind);
            if child.resolve(&main.body).is_none() {
                break;
            }
            anchors.push(InsertionPoint::before(child.clone()));
            index += 1;
        }
        if index > 0 {
            anchors.push(InsertionPoint::after(prefix.child(index - 1, kind)));
        }
    }
    anchors
}

/// Enumerate every legal plan and find the minimum transfer volume. Errors
/// with `E_EXPLOSION` when the candidate count exceeds `max_plans`.
pub fn enumerate_legal_plans(
    unit: &TranslationUnit,
    opts: &RunOptions,
    max_plans: u64,
) -> Result<EnumerationOutcome, ExecError> {
    let blocks = find_gpu_blocks(unit);
    let timelines = build_access_timeline(unit, &blocks);
    let (codelets, rewritten) = outline_all(unit, &blocks, &timelines);
    if codelets.is_empty() {
        return Ok(EnumerationOutcome {
            plans_considered: 0,
            legal_plans: 0,
            min_volume: Some(0),
            best_plan: Some(TransferPlan::empty()),
        });
    }
    let (group_name, member_labels, mapbyname) = group_codelets(unit, &codelets);

    let mut axes: Vec<Axis> = Vec::new();
    for codelet in &codelets {
        let anchors = candidate_anchors(unit, &codelet.callsite_path);
        for param in codelet.params.iter().filter(|p| p.device_resident()) {
            let options = |_kind: DirectiveKind| {
                let mut v: Vec<Option<InsertionPoint>> = vec![None];
                v.extend(anchors.iter().cloned().map(Some));
                v
            };
            if param.intent.reads() {
                axes.push(Axis {
                    label: codelet.label.clone(),
                    var: param.name.clone(),
                    kind: DirectiveKind::AdvancedLoad,
                    options: options(DirectiveKind::AdvancedLoad),
                });
            }
            if param.intent.writes() {
                axes.push(Axis {
                    label: codelet.label.clone(),
                    var: param.name.clone(),
                    kind: DirectiveKind::DelegateStore,
                    options: options(DirectiveKind::DelegateStore),
                });
            }
        }
    }

    let mut total: u128 = 1;
    for axis in &axes {
        total = total.saturating_mul(axis.options.len() as u128);
    }
    if total > max_plans as u128 {
        return Err(ExecError::new(
            SourceSpan::new(unit.file.clone(), 1, 1),
            ExecErrorKind::Explosion {
                plans: total.min(u64::MAX as u128) as u64,
                cap: max_plans,
            },
        ));
    }

    let mut outcome = EnumerationOutcome {
        plans_considered: 0,
        legal_plans: 0,
        min_volume: None,
        best_plan: None,
    };
    let mut odometer = vec![0usize; axes.len()];
    loop {
        let mut plan = TransferPlan {
            group_name: Some(group_name.clone()),
            member_labels: member_labels.clone(),
            mapbyname: mapbyname.clone(),
            ..TransferPlan::empty()
        };
        for (axis, &choice) in axes.iter().zip(&odometer) {
            if let Some(at) = &axis.options[choice] {
                plan.directives.push(TransferDirective {
                    kind: axis.kind,
                    var: Some(axis.var.clone()),
                    at: at.clone(),
                    label: axis.label.clone(),
                });
            }
        }
        let release = plan_release(&codelets, &plan);
        plan.directives.push(release);
        plan.sort_directives();

        outcome.plans_considered += 1;
        if let Some(volume) = simulate(&rewritten, &codelets, &plan, opts) {
            outcome.legal_plans += 1;
            if outcome.min_volume.is_none_or(|m| volume < m) {
                outcome.min_volume = Some(volume);
                outcome.best_plan = Some(plan);
            }
        }

        // Advance the odometer.
        let mut i = 0;
        loop {
            if i == axes.len() {
                return Ok(outcome);
            }
            odometer[i] += 1;
            if odometer[i] < axes[i].options.len() {
                break;
            }
            odometer[i] = 0;
            i += 1;
        }
        if axes.is_empty() {
            return Ok(outcome);
        }
    }
}

fn simulate(
    rewritten: &TranslationUnit,
    codelets: &[CodeletSpec],
    plan: &TransferPlan,
    opts: &RunOptions,
) -> Option<u64> {
    let transformed = apply_plan(rewritten, codelets, plan).ok()?;
    match interpret_dual(&transformed, opts) {
        Ok(out) if out.stats.stale_reads.is_empty() => Some(out.stats.total_bytes()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;
    use crate::plan::build_plan;

    #[test]
    fn enumeration_shape_and_minimum_on_tiny_kernel() {
        // One kernel, A in / C out: choices are (loads of A) × (stores of C),
        // each "none" plus one per candidate anchor slot.
        let src = "int main() {\n  int i;\n  int n;\n  double A[2];\n  double C[2];\n  n = 2;\n\
            for (i = 0; i < n; i++) { A[i] = i * 1.0; }\n\
            #pragma omp parallel for device(hmpp)\n\
            for (i = 0; i < n; i++) { C[i] = A[i] + 1.0; }\n\
            print(C);\n}";
        let unit = parse_source(src, "t.c").unwrap();
        let opts = RunOptions::default();
        let out = enumerate_legal_plans(&unit, &opts, 1_000_000).unwrap();

        // 8 top-level statements: 8 before-slots + 1 end slot, plus "none".
        assert_eq!(out.plans_considered, 10 * 10);
        assert!(out.legal_plans > 0);
        // Every legal plan uploads A (16 bytes) and downloads C (16 bytes).
        assert_eq!(out.min_volume, Some(32));

        // The optimizing planner attains the brute-force minimum.
        let blocks = find_gpu_blocks(&unit);
        let timelines = build_access_timeline(&unit, &blocks);
        let (codelets, rewritten) = outline_all(&unit, &blocks, &timelines);
        let plan = build_plan(&unit, &codelets, &timelines);
        let volume = simulate(&rewritten, &codelets, &plan, &opts).expect("planned plan is safe");
        assert_eq!(volume, 32);
    }

    #[test]
    fn cap_is_enforced() {
        let src = "int main() {\n  int i;\n  int n;\n  double A[2];\n  double C[2];\n  n = 2;\n\
            for (i = 0; i < n; i++) { A[i] = i * 1.0; }\n\
            #pragma omp parallel for device(hmpp)\n\
            for (i = 0; i < n; i++) { C[i] = A[i] + 1.0; }\n\
            print(C);\n}";
        let unit = parse_source(src, "t.c").unwrap();
        let err = enumerate_legal_plans(&unit, &RunOptions::default(), 10).unwrap_err();
        assert!(matches!(err.kind, ExecErrorKind::Explosion { .. }));
    }
}
