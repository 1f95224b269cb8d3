//! Human-readable account of the decisions in an audit log.

use std::fmt::Write as _;

use siov_core::{AuditLog, AuditRecord, RecordKind};

use crate::run::DecisionBody;

/// Explains every Decision record in `log`. Other records get one line each.
pub fn explain(log: &AuditLog) -> Result<String, String> {
    let mut out = String::new();
    let mut decisions = 0;
    for record in log.records() {
        if record.record_kind == RecordKind::Decision {
            decisions += 1;
            explain_decision(record, &mut out)?;
        } else {
            let _ = writeln!(
                out,
                "record {} at t={}: {}",
                record.sequence, record.logical_time, record.record_kind
            );
        }
    }
    if decisions == 0 {
        out.insert_str(0, "no decisions\n");
    }
    Ok(out)
}

fn explain_decision(record: &AuditRecord, out: &mut String) -> Result<(), String> {
    let body: DecisionBody = serde_json::from_value(record.body.clone())
        .map_err(|e| format!("record {}: unreadable decision body: {e}", record.sequence))?;
    let inputs = &body.inputs;
    let im = &body.intermediates;
    let _ = writeln!(
        out,
        "decision {} at t={}: scenario `{}`, engine {}, rulebase v{} ({})",
        record.sequence,
        record.logical_time,
        inputs.scenario,
        inputs.engine,
        inputs.rulebase.version,
        inputs.rulebase.community_id
    );
    let _ = writeln!(out, "  seed {} ({:?})", inputs.seed, inputs.seed_source);

    let _ = writeln!(out, "  ethical values:");
    for e in &im.entities {
        let pevs: Vec<String> = e
            .occupants
            .iter()
            .map(|o| format!("age {} cat {} -> {} u", o.age_years, o.category, o.pev_u))
            .collect();
        let _ = writeln!(
            out,
            "    {:<12} rating {:<4} TEV {} u  [{}]",
            e.id.as_str(),
            e.safety_rating,
            e.tev_u,
            pevs.join(", ")
        );
    }

    let _ = writeln!(out, "  candidates:");
    for (i, (p, row)) in inputs.proposals.iter().zip(&im.tuf_table).enumerate() {
        let verdict = &im.verdicts[i];
        let status = match (&verdict.violated_law, verdict.violated_priority) {
            (Some(law), Some(prio)) => format!("violates {law} (priority {prio})"),
            _ => "permitted".to_string(),
        };
        let parts: Vec<String> = row
            .participants
            .iter()
            .map(|x| format!("{}: {} u x {} N = {} uN", x.entity, x.tev_u, x.crash_force_n, x.uf_un))
            .collect();
        let _ = writeln!(
            out,
            "    {} {}{}",
            row.action_id,
            if p.action.description.is_empty() {
                String::new()
            } else {
                format!("({}) ", p.action.description)
            },
            status
        );
        let _ = writeln!(out, "      {}", parts.join("; "));
        let _ = writeln!(out, "      TUF {} uN", row.tuf_un);
    }

    let admitted: Vec<&str> = im
        .admitted
        .iter()
        .map(|&i| im.tuf_table[i].action_id.as_str())
        .collect();
    if im.fallback {
        let prio = im
            .admitted
            .first()
            .and_then(|&i| im.verdicts[i].violated_priority)
            .unwrap_or_default();
        let law = im
            .admitted
            .first()
            .and_then(|&i| im.verdicts[i].violated_law.clone())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "  every candidate is forbidden; falling back to those violating only {law} (priority {prio}): {}",
            admitted.join(", ")
        );
    } else {
        let _ = writeln!(out, "  admissible: {}", admitted.join(", "));
    }
    let _ = writeln!(
        out,
        "  {} among admissible candidates",
        if inputs.engine == "sel" {
            "highest SEL score"
        } else {
            "minimum TUF"
        }
    );
    let _ = writeln!(out, "  tie-break: {}", im.tie_break);
    let _ = writeln!(out, "  chosen: {}", body.chosen);
    let _ = writeln!(
        out,
        "  command: {}",
        serde_json::to_string(&body.command).expect("commands serialize")
    );
    if let Some(r) = &body.recommendation {
        let _ = writeln!(out, "  advisory only; recommended {} ({} uN)", r.action, r.tuf_un);
    }
    Ok(())
}
