//! Decision engines: how the judgment-of-value stage turns a set of candidate
//! actions into one choice.
//!
//! Every engine first applies the rule base ([`admissible_actions`]); they
//! differ in how they rank the survivors.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ethics::{self, CandidateAction, EthicsError, TieBreak};
use crate::rules::{admissible_actions, sel_compare, OutcomeFlags, RuleBase, RuleError, SelScore, Verdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecisionError {
    #[error(transparent)]
    Ethics(#[from] EthicsError),
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error("candidate `{0}` has no SEL score")]
    MissingSel(String),
}

/// A candidate action together with its predicted outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionProposal {
    pub action: CandidateAction,
    pub outcome: OutcomeFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sel: Option<SelScore>,
}

impl ActionProposal {
    pub fn new(action: CandidateAction, outcome: OutcomeFlags) -> Self {
        ActionProposal {
            action,
            outcome,
            sel: None,
        }
    }

    pub fn with_sel(mut self, sel: SelScore) -> Self {
        self.sel = Some(sel);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantUf {
    pub entity: String,
    pub tev_u: f64,
    pub crash_force_n: f64,
    pub uf_un: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TufRow {
    pub action_id: String,
    pub participants: Vec<ParticipantUf>,
    pub tuf_un: f64,
}

impl TufRow {
    pub fn for_action(action: &CandidateAction) -> Result<Self, EthicsError> {
        Ok(TufRow {
            action_id: action.id.clone(),
            participants: action
                .participants
                .iter()
                .map(|p| ParticipantUf {
                    entity: p.entity.to_string(),
                    tev_u: p.tev.units(),
                    crash_force_n: p.force.newtons(),
                    uf_un: p.uf().value(),
                })
                .collect(),
            tuf_un: ethics::total_utilitarian_force(action)?.value(),
        })
    }
}

/// The full outcome of judging a candidate set, intermediates included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub engine: String,
    /// Index of the chosen proposal.
    pub chosen: usize,
    pub chosen_id: String,
    pub rulebase_version: u64,
    /// One verdict per proposal, in input order.
    pub verdicts: Vec<Verdict>,
    pub admitted: Vec<usize>,
    /// Every proposal violated some law; least-severe violators were ranked.
    pub fallback: bool,
    /// One row per proposal, in input order.
    pub tuf_table: Vec<TufRow>,
    pub tie_break: TieBreak,
}

pub trait DecisionEngine: Send + Sync {
    fn name(&self) -> &'static str;

    fn decide(
        &self,
        proposals: &[ActionProposal],
        rulebase: &RuleBase,
    ) -> Result<Judgment, DecisionError>;
}

struct Filtered<'a> {
    refs: Vec<&'a CandidateAction>,
    admitted: Vec<usize>,
    verdicts: Vec<Verdict>,
    fallback: bool,
    table: Vec<TufRow>,
}

fn filter<'a>(
    proposals: &'a [ActionProposal],
    rulebase: &RuleBase,
) -> Result<Filtered<'a>, DecisionError> {
    if proposals.is_empty() {
        return Err(EthicsError::EmptyCandidates.into());
    }
    let outcomes: Vec<OutcomeFlags> = proposals.iter().map(|p| p.outcome.clone()).collect();
    let adm = admissible_actions(&outcomes, rulebase)?;
    let table = proposals
        .iter()
        .map(|p| TufRow::for_action(&p.action))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Filtered {
        refs: adm.admitted.iter().map(|&i| &proposals[i].action).collect(),
        admitted: adm.admitted,
        verdicts: adm.verdicts,
        fallback: adm.fallback,
        table,
    })
}

fn judgment(
    engine: &'static str,
    proposals: &[ActionProposal],
    rulebase: &RuleBase,
    f: Filtered<'_>,
    chosen: usize,
    tie_break: TieBreak,
) -> Judgment {
    Judgment {
        engine: engine.to_string(),
        chosen,
        chosen_id: proposals[chosen].action.id.clone(),
        rulebase_version: rulebase.version,
        verdicts: f.verdicts,
        admitted: f.admitted,
        fallback: f.fallback,
        tuf_table: f.table,
        tie_break,
    }
}

/// Rule-base filtering followed by least-TUF selection.
#[derive(Debug, Clone, Copy, Default)]
pub struct UtilitarianEngine;

impl DecisionEngine for UtilitarianEngine {
    fn name(&self) -> &'static str {
        "utilitarian"
    }

    fn decide(
        &self,
        proposals: &[ActionProposal],
        rulebase: &RuleBase,
    ) -> Result<Judgment, DecisionError> {
        let f = filter(proposals, rulebase)?;
        let sel = ethics::select_min_tuf_refs(&f.refs)?;
        let chosen = f.admitted[sel.chosen];
        Ok(judgment(self.name(), proposals, rulebase, f, chosen, sel.tie_break))
    }
}

/// Rule-base filtering followed by lexicographic SEL ranking. Candidates with
/// equal SEL scores fall back to least-TUF selection.
#[derive(Debug, Clone, Copy, Default)]
pub struct SelEngine;

impl DecisionEngine for SelEngine {
    fn name(&self) -> &'static str {
        "sel"
    }

    fn decide(
        &self,
        proposals: &[ActionProposal],
        rulebase: &RuleBase,
    ) -> Result<Judgment, DecisionError> {
        let f = filter(proposals, rulebase)?;
        let scores = f
            .admitted
            .iter()
            .map(|&i| {
                let p = &proposals[i];
                p.sel
                    .ok_or_else(|| DecisionError::MissingSel(p.action.id.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let best = scores
            .iter()
            .min_by(|a, b| sel_compare(a, b))
            .copied()
            .expect("admitted set is never empty");
        let tied: Vec<usize> = (0..scores.len())
            .filter(|&k| sel_compare(&scores[k], &best) == Ordering::Equal)
            .collect();
        let tied_refs: Vec<&CandidateAction> = tied.iter().map(|&k| f.refs[k]).collect();
        let by_tuf = ethics::select_min_tuf_refs(&tied_refs)?;
        let chosen = f.admitted[tied[by_tuf.chosen]];
        Ok(judgment(self.name(), proposals, rulebase, f, chosen, by_tuf.tie_break))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ethics::Participant;

    fn proposal(id: &str, parts: &[(f64, f64)], outcome: OutcomeFlags) -> ActionProposal {
        let participants = parts
            .iter()
            .enumerate()
            .map(|(i, &(tev, f))| Participant::new(format!("{id}{i}"), tev, f).unwrap())
            .collect();
        ActionProposal::new(CandidateAction::new(id, participants).unwrap(), outcome)
    }

    fn fig4() -> Vec<ActionProposal> {
        vec![
            proposal("A", &[(5.0, 500.0), (40.0, 500.0), (40.0, 500.0)], OutcomeFlags::injuring_human()),
            proposal("B", &[(5.0, 500.0), (3.0, 500.0)], OutcomeFlags::injuring_human()),
            proposal("C", &[(5.0, 500.0), (2.0, 500.0)], OutcomeFlags::injuring_human()),
        ]
    }

    #[test]
    fn utilitarian_picks_truck_under_fallback() {
        let j = UtilitarianEngine
            .decide(&fig4(), &RuleBase::sv_baseline("t"))
            .unwrap();
        assert_eq!(j.chosen_id, "C");
        assert!(j.fallback);
        let tufs: Vec<f64> = j.tuf_table.iter().map(|r| r.tuf_un).collect();
        assert_eq!(tufs, vec![42500.0, 4000.0, 3500.0]);
        assert_eq!(j.verdicts.len(), 3);
    }

    #[test]
    fn law_clean_candidate_wins_over_lower_tuf() {
        let mut ps = fig4();
        ps.push(proposal("D", &[(5.0, 500.0), (50.0, 500.0)], OutcomeFlags::clean()));
        let j = UtilitarianEngine.decide(&ps, &RuleBase::sv_baseline("t")).unwrap();
        assert_eq!(j.chosen_id, "D");
        assert!(!j.fallback);
        assert_eq!(j.admitted, vec![3]);
    }

    #[test]
    fn empty_proposals_rejected() {
        assert!(matches!(
            UtilitarianEngine.decide(&[], &RuleBase::sv_baseline("t")),
            Err(DecisionError::Ethics(EthicsError::EmptyCandidates))
        ));
    }

    #[test]
    fn sel_engine_ranks_by_human_danger_first() {
        let rb = RuleBase::sv_baseline("t");
        let a = proposal("A", &[(1.0, 10.0)], OutcomeFlags::clean())
            .with_sel(SelScore::new(0.2, 0.0, 0.0).unwrap());
        let b = proposal("B", &[(1.0, 900.0)], OutcomeFlags::clean())
            .with_sel(SelScore::new(0.1, 0.9, 50.0).unwrap());
        let j = SelEngine.decide(&[a.clone(), b], &rb).unwrap();
        assert_eq!(j.chosen_id, "B");
        assert_eq!(j.engine, "sel");

        let missing = proposal("M", &[(1.0, 1.0)], OutcomeFlags::clean());
        assert_eq!(
            SelEngine.decide(&[a, missing], &rb),
            Err(DecisionError::MissingSel("M".into()))
        );
    }

    #[test]
    fn sel_ties_fall_back_to_tuf() {
        let rb = RuleBase::sv_baseline("t");
        let s = SelScore::new(0.1, 0.1, 1.0).unwrap();
        let a = proposal("A", &[(1.0, 100.0)], OutcomeFlags::clean()).with_sel(s);
        let b = proposal("B", &[(1.0, 90.0)], OutcomeFlags::clean()).with_sel(s);
        assert_eq!(SelEngine.decide(&[a, b], &rb).unwrap().chosen_id, "B");
    }
}
