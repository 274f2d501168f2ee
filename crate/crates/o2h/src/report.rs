//! Stable-keyed JSON report of a transfer plan: per-variable load/store
//! decisions with reason codes, per-callsite async and noupdate flags, and
//! directive totals. The shape is locked by `schema/report.schema.json`.

use crate::ast::{DirectiveKind, Edge};
use crate::plan::{InsertionPoint, TransferPlan};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize)]
pub struct DecisionReport {
    pub decision: String,
    /// Human-readable anchor, e.g. `after [c6]`; absent when no directive.
    pub at: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VarCallsiteReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub load: Option<DecisionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub store: Option<DecisionReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CallsiteReport {
    pub asynchronous: bool,
    pub noupdate: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Totals {
    pub advancedloads: u64,
    pub delegatestores: u64,
    pub synchronizes: u64,
    pub releases: u64,
    pub async_callsites: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanReport {
    pub group: Option<String>,
    pub members: Vec<String>,
    pub mapbyname: Vec<String>,
    /// variable → callsite label → decisions.
    pub variables: BTreeMap<String, BTreeMap<String, VarCallsiteReport>>,
    pub callsites: BTreeMap<String, CallsiteReport>,
    pub degradations: Vec<String>,
    pub totals: Totals,
}

fn anchor_text(at: &InsertionPoint) -> String {
    let side = match at.edge {
        Edge::Before => "before",
        Edge::After => "after",
        Edge::At => "at",
    };
    format!("{side} {}", at.anchor)
}

pub fn plan_report(plan: &TransferPlan) -> PlanReport {
    let mut variables: BTreeMap<String, BTreeMap<String, VarCallsiteReport>> = BTreeMap::new();
    for (label, decisions) in &plan.decisions {
        for (var, decision) in decisions {
            let entry = variables
                .entry(var.clone())
                .or_default()
                .entry(label.clone())
                .or_default();
            if let Some(reason) = decision.load_reason {
                entry.load = Some(DecisionReport {
                    decision: reason.code().to_string(),
                    at: decision.load.as_ref().map(anchor_text),
                });
            }
            if let Some(reason) = decision.store_reason {
                entry.store = Some(DecisionReport {
                    decision: reason.code().to_string(),
                    at: decision.store.as_ref().map(anchor_text),
                });
            }
        }
    }
    let mut callsites = BTreeMap::new();
    for label in &plan.member_labels {
        callsites.insert(
            label.clone(),
            CallsiteReport {
                asynchronous: plan.async_callsites.contains(label),
                noupdate: plan.noupdate.get(label).cloned().unwrap_or_default(),
            },
        );
    }
    let count = |kind: DirectiveKind| plan.directives.iter().filter(|d| d.kind == kind).count() as u64;
    PlanReport {
        group: plan.group_name.clone(),
        members: plan.member_labels.clone(),
        mapbyname: plan.mapbyname.clone(),
        variables,
        callsites,
        degradations: plan.degradations.clone(),
        totals: Totals {
            advancedloads: count(DirectiveKind::AdvancedLoad),
            delegatestores: count(DirectiveKind::DelegateStore),
            synchronizes: count(DirectiveKind::Synchronize),
            releases: count(DirectiveKind::Release),
            async_callsites: plan.async_callsites.len() as u64,
        },
    }
}

pub fn report_json(plan: &TransferPlan) -> String {
    let mut text = serde_json::to_string_pretty(&plan_report(plan)).expect("report serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plan_report() {
        let report = plan_report(&TransferPlan::empty());
        assert!(report.variables.is_empty());
        assert!(report.callsites.is_empty());
        let json: serde_json::Value =
            serde_json::from_str(&report_json(&TransferPlan::empty())).unwrap();
        assert_eq!(json["variables"], serde_json::json!({}));
        assert_eq!(json["callsites"], serde_json::json!({}));
    }
}
