//! Priority-ordered rule base of prohibitions ("descending negative ethics").
//!
//! Laws are evaluated lexicographically: the first violated law in priority
//! order decides the verdict. Several laws carry "except where this would
//! conflict with a higher law" clauses; an outcome states such conflicts as
//! [`Excuse`]s, which only count when the conflicting law really does rank
//! higher in the rule base being applied.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{digest_json, AuditEvent, RecordKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("rule base has no laws")]
    EmptyRuleBase,
    #[error("no candidate actions to filter")]
    EmptyCandidates,
    #[error("rule base version must increase: {current} -> {proposed}")]
    VersionNotIncreasing { current: u64, proposed: u64 },
    #[error("duplicate law priority {0}")]
    DuplicatePriority(u32),
    #[error("law priorities must be contiguous from 1; missing {0}")]
    PriorityGap(u32),
    #[error("rule base version {0} is unknown")]
    UnknownVersion(u64),
    #[error("SEL probability `{what}` must be in [0, 1], got {value}")]
    InvalidProbability { what: &'static str, value: f64 },
    #[error("SEL goal distance must be non-negative, got {0}")]
    InvalidGoalDistance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PredicateKind {
    NoHumanInjury,
    NoAnimalInjury,
    ObeyDriverOrder,
    SelfPreservation,
    TrafficAndPapaCompliance,
    LeastHarmFallback,
}

impl fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Law {
    /// 1 is the most important.
    pub priority: u32,
    pub id: String,
    pub predicate_kind: PredicateKind,
    #[serde(default)]
    pub description: String,
}

impl Law {
    pub fn new(
        priority: u32,
        id: impl Into<String>,
        predicate_kind: PredicateKind,
        description: impl Into<String>,
    ) -> Self {
        Law {
            priority,
            id: id.into(),
            predicate_kind,
            description: description.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RuleBaseRepr")]
pub struct RuleBase {
    pub version: u64,
    pub community_id: String,
    pub laws: Vec<Law>,
}

#[derive(Deserialize)]
struct RuleBaseRepr {
    version: u64,
    community_id: String,
    laws: Vec<Law>,
}

impl TryFrom<RuleBaseRepr> for RuleBase {
    type Error = RuleError;

    fn try_from(r: RuleBaseRepr) -> Result<Self, Self::Error> {
        RuleBase::new(r.version, r.community_id, r.laws)
    }
}

impl RuleBase {
    /// Sorts the laws by priority and checks that priorities are unique and
    /// contiguous from 1. An empty law list is accepted here and rejected at
    /// evaluation time.
    pub fn new(
        version: u64,
        community_id: impl Into<String>,
        mut laws: Vec<Law>,
    ) -> Result<Self, RuleError> {
        laws.sort_by_key(|l| l.priority);
        if let Some(pair) = laws.windows(2).find(|p| p[0].priority == p[1].priority) {
            return Err(RuleError::DuplicatePriority(pair[0].priority));
        }
        for (expected, law) in (1u32..).zip(&laws) {
            if law.priority != expected {
                return Err(RuleError::PriorityGap(expected));
            }
        }
        Ok(RuleBase {
            version,
            community_id: community_id.into(),
            laws,
        })
    }

    /// The six-law smart vehicle norm baseline, version 1.
    pub fn sv_baseline(community_id: impl Into<String>) -> Self {
        use PredicateKind::*;
        let laws = vec![
            Law::new(1, "no-human-injury", NoHumanInjury, "no harm to humans, by action or inaction"),
            Law::new(2, "no-animal-injury", NoAnimalInjury, "no harm to animals, subordinate to law 1"),
            Law::new(3, "obey-driver", ObeyDriverOrder, "follow driver orders, subordinate to laws 1-2"),
            Law::new(4, "self-preservation", SelfPreservation, "preserve the vehicle, subordinate to laws 1-3"),
            Law::new(5, "traffic-and-papa", TrafficAndPapaCompliance, "traffic regulations and PAPA information rules"),
            Law::new(6, "least-harm-fallback", LeastHarmFallback, "with humans at risk on every path, take the least harmful one"),
        ];
        RuleBase::new(1, community_id, laws).expect("baseline priorities are contiguous")
    }

    pub fn law(&self, predicate: PredicateKind) -> Option<&Law> {
        self.laws.iter().find(|l| l.predicate_kind == predicate)
    }

    fn excused(&self, law: &Law, flags: &OutcomeFlags) -> bool {
        flags.excuses.iter().any(|e| {
            e.law == law.predicate_kind
                && self
                    .laws
                    .iter()
                    .any(|l| l.predicate_kind == e.because && l.priority < law.priority)
        })
    }
}

/// A stated conflict: breaking `law` was necessary to avoid breaking `because`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excuse {
    pub law: PredicateKind,
    pub because: PredicateKind,
}

/// Predicted consequences of one candidate action, as produced by the world
/// model. The rule engine performs no physics of its own.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeFlags {
    #[serde(default)]
    pub injures_human: bool,
    #[serde(default)]
    pub injures_animal: bool,
    #[serde(default)]
    pub contradicts_driver_order: bool,
    #[serde(default)]
    pub destroys_self: bool,
    #[serde(default)]
    pub violates_traffic_or_papa: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excuses: Vec<Excuse>,
}

impl OutcomeFlags {
    pub fn clean() -> Self {
        Self::default()
    }

    pub fn injuring_human() -> Self {
        OutcomeFlags {
            injures_human: true,
            ..Self::default()
        }
    }

    pub fn excused(mut self, law: PredicateKind, because: PredicateKind) -> Self {
        self.excuses.push(Excuse { law, because });
        self
    }

    fn violates(&self, predicate: PredicateKind) -> bool {
        match predicate {
            PredicateKind::NoHumanInjury => self.injures_human,
            PredicateKind::NoAnimalInjury => self.injures_animal,
            PredicateKind::ObeyDriverOrder => self.contradicts_driver_order,
            PredicateKind::SelfPreservation => self.destroys_self,
            PredicateKind::TrafficAndPapaCompliance => self.violates_traffic_or_papa,
            PredicateKind::LeastHarmFallback => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictStatus {
    Permitted,
    Forbidden,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub violated_law: Option<String>,
    pub violated_priority: Option<u32>,
    pub rulebase_version: u64,
}

impl Verdict {
    pub fn is_permitted(&self) -> bool {
        self.status == VerdictStatus::Permitted
    }
}

/// Returns the verdict of the highest-priority law the outcome violates.
pub fn evaluate(outcome: &OutcomeFlags, rulebase: &RuleBase) -> Result<Verdict, RuleError> {
    if rulebase.laws.is_empty() {
        return Err(RuleError::EmptyRuleBase);
    }
    let violated = rulebase
        .laws
        .iter()
        .find(|law| outcome.violates(law.predicate_kind) && !rulebase.excused(law, outcome));
    Ok(match violated {
        Some(law) => Verdict {
            status: VerdictStatus::Forbidden,
            violated_law: Some(law.id.clone()),
            violated_priority: Some(law.priority),
            rulebase_version: rulebase.version,
        },
        None => Verdict {
            status: VerdictStatus::Permitted,
            violated_law: None,
            violated_priority: None,
            rulebase_version: rulebase.version,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Admissibility {
    /// Indices of the surviving candidates, in input order. Never empty.
    pub admitted: Vec<usize>,
    /// One verdict per input candidate.
    pub verdicts: Vec<Verdict>,
    /// True when every candidate violates some law and the least severe
    /// violators were kept.
    pub fallback: bool,
}

/// Filters candidates to those violating no law. When every candidate
/// violates something, keeps the ones whose most severe violation has the
/// largest priority number, for least-harm selection downstream.
pub fn admissible_actions(
    outcomes: &[OutcomeFlags],
    rulebase: &RuleBase,
) -> Result<Admissibility, RuleError> {
    if outcomes.is_empty() {
        return Err(RuleError::EmptyCandidates);
    }
    let verdicts = outcomes
        .iter()
        .map(|o| evaluate(o, rulebase))
        .collect::<Result<Vec<_>, _>>()?;

    let permitted: Vec<usize> = (0..verdicts.len())
        .filter(|&i| verdicts[i].is_permitted())
        .collect();
    if !permitted.is_empty() {
        return Ok(Admissibility {
            admitted: permitted,
            verdicts,
            fallback: false,
        });
    }
    let least_severe = verdicts
        .iter()
        .filter_map(|v| v.violated_priority)
        .max()
        .expect("every verdict is forbidden");
    let admitted = (0..verdicts.len())
        .filter(|&i| verdicts[i].violated_priority == Some(least_severe))
        .collect();
    Ok(Admissibility {
        admitted,
        verdicts,
        fallback: true,
    })
}

/// Safety/ethical logic score of an action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelScore {
    pub p_human_danger: f64,
    pub p_sv_danger: f64,
    pub goal_distance: f64,
}

impl SelScore {
    pub fn new(p_human_danger: f64, p_sv_danger: f64, goal_distance: f64) -> Result<Self, RuleError> {
        let s = SelScore {
            p_human_danger,
            p_sv_danger,
            goal_distance,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), RuleError> {
        for (what, value) in [
            ("p_human_danger", self.p_human_danger),
            ("p_sv_danger", self.p_sv_danger),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(RuleError::InvalidProbability { what, value });
            }
        }
        if !(self.goal_distance >= 0.0) {
            return Err(RuleError::InvalidGoalDistance(self.goal_distance));
        }
        Ok(())
    }
}

/// Lexicographic: human danger, then danger to the vehicle, then distance to
/// goal. `Less` means `a` is the better action.
pub fn sel_compare(a: &SelScore, b: &SelScore) -> Ordering {
    a.p_human_danger
        .total_cmp(&b.p_human_danger)
        .then_with(|| a.p_sv_danger.total_cmp(&b.p_sv_danger))
        .then_with(|| a.goal_distance.total_cmp(&b.goal_distance))
}

/// Derives the next rule base version, keeping the issuing community.
pub fn update_rulebase(
    base: &RuleBase,
    new_laws: Vec<Law>,
    new_version: u64,
) -> Result<RuleBase, RuleError> {
    if new_version <= base.version {
        return Err(RuleError::VersionNotIncreasing {
            current: base.version,
            proposed: new_version,
        });
    }
    RuleBase::new(new_version, base.community_id.clone(), new_laws)
}

/// Every published rule base version, retained for replay.
#[derive(Debug, Clone)]
pub struct RulebaseHistory {
    versions: BTreeMap<u64, Arc<RuleBase>>,
}

impl RulebaseHistory {
    pub fn new(initial: RuleBase) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert(initial.version, Arc::new(initial));
        RulebaseHistory { versions }
    }

    pub fn current(&self) -> Arc<RuleBase> {
        self.versions
            .values()
            .next_back()
            .cloned()
            .expect("history holds at least the initial version")
    }

    pub fn get(&self, version: u64) -> Result<Arc<RuleBase>, RuleError> {
        self.versions
            .get(&version)
            .cloned()
            .ok_or(RuleError::UnknownVersion(version))
    }

    pub fn versions(&self) -> impl Iterator<Item = u64> + '_ {
        self.versions.keys().copied()
    }

    /// Publishes a new version and returns the audit event recording it.
    pub fn publish(
        &mut self,
        new_laws: Vec<Law>,
        new_version: u64,
        logical_time: u64,
    ) -> Result<(Arc<RuleBase>, AuditEvent), RuleError> {
        let current = self.current();
        let next = Arc::new(update_rulebase(&current, new_laws, new_version)?);
        self.versions.insert(new_version, next.clone());
        let body = serde_json::json!({
            "previous_version": current.version,
            "rulebase": serde_json::to_value(&*next).expect("rule bases serialize"),
        });
        let event = AuditEvent {
            kind: RecordKind::RulebaseUpdate,
            logical_time,
            inputs_digest: digest_json(&*next),
            rulebase_version: Some(new_version),
            chosen: None,
            body,
        };
        Ok((next, event))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PredicateKind::*;

    fn baseline() -> RuleBase {
        RuleBase::sv_baseline("test")
    }

    #[test]
    fn injuring_a_human_violates_law_one() {
        let v = evaluate(&OutcomeFlags::injuring_human(), &baseline()).unwrap();
        assert_eq!(v.status, VerdictStatus::Forbidden);
        assert_eq!(v.violated_priority, Some(1));
        assert_eq!(v.violated_law.as_deref(), Some("no-human-injury"));
    }

    #[test]
    fn ordered_self_damage_is_permitted() {
        let outcome = OutcomeFlags {
            destroys_self: true,
            ..OutcomeFlags::default()
        }
        .excused(SelfPreservation, ObeyDriverOrder);
        assert!(evaluate(&outcome, &baseline()).unwrap().is_permitted());

        // Without the order, destroying itself breaks law 4.
        let unordered = OutcomeFlags {
            destroys_self: true,
            ..OutcomeFlags::default()
        };
        assert_eq!(
            evaluate(&unordered, &baseline()).unwrap().violated_priority,
            Some(4)
        );
    }

    #[test]
    fn disobeying_a_harmful_order_is_permitted() {
        let outcome = OutcomeFlags {
            contradicts_driver_order: true,
            ..OutcomeFlags::default()
        }
        .excused(ObeyDriverOrder, NoHumanInjury);
        assert!(evaluate(&outcome, &baseline()).unwrap().is_permitted());
    }

    #[test]
    fn excuse_only_counts_against_a_higher_law() {
        // Self-preservation cannot excuse breaking law 1.
        let outcome = OutcomeFlags::injuring_human().excused(NoHumanInjury, SelfPreservation);
        assert_eq!(
            evaluate(&outcome, &baseline()).unwrap().violated_priority,
            Some(1)
        );
    }

    #[test]
    fn empty_rulebase_is_a_configuration_error() {
        let empty = RuleBase::new(1, "c", vec![]).unwrap();
        assert_eq!(
            evaluate(&OutcomeFlags::clean(), &empty),
            Err(RuleError::EmptyRuleBase)
        );
    }

    #[test]
    fn admissibility_examples() {
        let rb = baseline();
        let a = admissible_actions(&[OutcomeFlags::injuring_human(), OutcomeFlags::clean()], &rb)
            .unwrap();
        assert_eq!(a.admitted, vec![1]);
        assert!(!a.fallback);

        let all = vec![OutcomeFlags::injuring_human(); 3];
        let a = admissible_actions(&all, &rb).unwrap();
        assert_eq!(a.admitted, vec![0, 1, 2]);
        assert!(a.fallback);

        let law4 = OutcomeFlags {
            destroys_self: true,
            ..OutcomeFlags::default()
        };
        let a = admissible_actions(&[OutcomeFlags::injuring_human(), law4], &rb).unwrap();
        assert_eq!(a.admitted, vec![1]);
        assert!(a.fallback);

        assert_eq!(admissible_actions(&[], &rb), Err(RuleError::EmptyCandidates));
    }

    #[test]
    fn sel_examples() {
        let s = |h, v, g| SelScore::new(h, v, g).unwrap();
        assert_eq!(sel_compare(&s(0.0, 0.0, 5.0), &s(0.0, 0.0, 9.0)), Ordering::Less);
        assert_eq!(sel_compare(&s(0.1, 0.9, 0.0), &s(0.2, 0.0, 0.0)), Ordering::Less);
        assert_eq!(sel_compare(&s(0.3, 0.3, 3.0), &s(0.3, 0.3, 3.0)), Ordering::Equal);
        assert!(SelScore::new(1.5, 0.0, 0.0).is_err());
        assert!(SelScore::new(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn rulebase_updates() {
        let v1 = baseline();
        let mut laws = v1.laws.clone();
        laws[4].description = "Obey traffic law; community speed limit lowered to 25 km/h.".into();
        let v2 = update_rulebase(&v1, laws.clone(), 2).unwrap();
        assert_eq!(v2.version, 2);
        assert_eq!(v2.community_id, v1.community_id);

        assert_eq!(
            update_rulebase(&v2, laws.clone(), 2),
            Err(RuleError::VersionNotIncreasing {
                current: 2,
                proposed: 2
            })
        );
        let mut dup = laws;
        dup[1].priority = 1;
        assert_eq!(
            update_rulebase(&v2, dup, 3),
            Err(RuleError::DuplicatePriority(1))
        );
    }

    #[test]
    fn priorities_must_be_contiguous() {
        let laws = vec![
            Law::new(1, "a", NoHumanInjury, ""),
            Law::new(3, "b", SelfPreservation, ""),
        ];
        assert_eq!(RuleBase::new(1, "c", laws), Err(RuleError::PriorityGap(2)));
    }

    #[test]
    fn history_keeps_prior_versions() {
        let mut h = RulebaseHistory::new(baseline());
        let laws = baseline().laws;
        let (v2, event) = h.publish(laws.clone(), 2, 10).unwrap();
        assert_eq!(v2.version, 2);
        assert_eq!(event.kind, RecordKind::RulebaseUpdate);
        assert_eq!(event.rulebase_version, Some(2));
        assert_eq!(h.get(1).unwrap().version, 1);
        assert_eq!(h.current().version, 2);
        assert!(h.publish(laws, 2, 11).is_err());
        assert_eq!(h.versions().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn rulebase_file_validation() {
        let doc = r#"{"version":1,"community_id":"x","laws":[
            {"priority":1,"id":"a","predicate_kind":"NoHumanInjury"},
            {"priority":1,"id":"b","predicate_kind":"SelfPreservation"}]}"#;
        assert!(serde_json::from_str::<RuleBase>(doc).is_err());
        let rb: RuleBase =
            serde_json::from_str(&serde_json::to_string(&baseline()).unwrap()).unwrap();
        assert_eq!(rb, baseline());
    }
}
