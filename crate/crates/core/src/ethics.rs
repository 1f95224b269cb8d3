//! Utilitarian calculus over collision outcomes.
//!
//! Each person is mapped to one of five life-stage categories (a categorical
//! DALY score, infancy = 5 down to mature adulthood = 1). Dividing the category
//! by the safety rating of whatever carries the person gives the Personal
//! Ethical Value (PEV, in utilitarian units `u`); the Total Ethical Value (TEV)
//! of an entity is the sum over everyone aboard. Multiplying the crash force an
//! entity would receive by its TEV gives its Utilitarian Force (UF, in `uN`),
//! and the Total Utilitarian Force (TUF) of a candidate action is the sum of
//! `|UF|` over every element in the collision. The least harmful action is the
//! one with minimal TUF.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entity::EntityId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EthicsError {
    #[error("age must be a non-negative finite number of years, got {0}")]
    NegativeAge(f64),
    #[error("life-stage category must be in 1..=5, got {0}")]
    InvalidCategory(u8),
    #[error("safety rating must be in (0, 5], got {0}")]
    InvalidRating(f64),
    #[error("{what} must be non-negative and finite, got {value}")]
    NegativeInput { what: &'static str, value: f64 },
    #[error("mass must be positive, got {0} kg")]
    InvalidMass(f64),
    #[error("braking distance must be positive, got {0} m")]
    InvalidBrakingDistance(f64),
    #[error("age band boundaries must be finite and strictly increasing")]
    InvalidAgeBands,
    #[error("candidate action `{0}` has no collision participants")]
    EmptyParticipants(String),
    #[error("no candidate actions to choose from")]
    EmptyCandidates,
}

/// Categorical DALY segment. The discriminant is the category value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LifeStageCategory {
    MatureAdulthood = 1,
    Adulthood = 2,
    AdolescenceEarlyAdulthood = 3,
    Childhood = 4,
    Infancy = 5,
}

impl LifeStageCategory {
    pub const ALL: [LifeStageCategory; 5] = [
        LifeStageCategory::MatureAdulthood,
        LifeStageCategory::Adulthood,
        LifeStageCategory::AdolescenceEarlyAdulthood,
        LifeStageCategory::Childhood,
        LifeStageCategory::Infancy,
    ];

    pub fn value(self) -> u8 {
        self as u8
    }

    pub fn from_value(value: u8) -> Result<Self, EthicsError> {
        Self::ALL
            .get(usize::from(value).wrapping_sub(1))
            .copied()
            .ok_or(EthicsError::InvalidCategory(value))
    }

    pub fn label(self) -> &'static str {
        match self {
            LifeStageCategory::MatureAdulthood => "Mature Adulthood",
            LifeStageCategory::Adulthood => "Adulthood",
            LifeStageCategory::AdolescenceEarlyAdulthood => "Adolescence & Early Adulthood",
            LifeStageCategory::Childhood => "Childhood",
            LifeStageCategory::Infancy => "Infancy",
        }
    }
}

impl fmt::Display for LifeStageCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.value())
    }
}

/// Upper (exclusive) age boundaries of the first four life stages, in years.
///
/// Intervals are half-open: `[0, infancy_end)` is infancy, and so on, with
/// everything from `adulthood_end` upwards being mature adulthood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeBands {
    pub infancy_end: f64,
    pub childhood_end: f64,
    pub adolescence_end: f64,
    pub adulthood_end: f64,
}

impl Default for AgeBands {
    fn default() -> Self {
        AgeBands {
            infancy_end: 2.0,
            childhood_end: 13.0,
            adolescence_end: 26.0,
            adulthood_end: 61.0,
        }
    }
}

impl AgeBands {
    pub fn validate(&self) -> Result<(), EthicsError> {
        let b = [
            0.0,
            self.infancy_end,
            self.childhood_end,
            self.adolescence_end,
            self.adulthood_end,
        ];
        if b.iter().all(|v| v.is_finite()) && b.windows(2).all(|w| w[0] < w[1]) {
            Ok(())
        } else {
            Err(EthicsError::InvalidAgeBands)
        }
    }

    pub fn categorize(&self, age_years: f64) -> Result<LifeStageCategory, EthicsError> {
        if !(age_years >= 0.0) || !age_years.is_finite() {
            return Err(EthicsError::NegativeAge(age_years));
        }
        Ok(if age_years < self.infancy_end {
            LifeStageCategory::Infancy
        } else if age_years < self.childhood_end {
            LifeStageCategory::Childhood
        } else if age_years < self.adolescence_end {
            LifeStageCategory::AdolescenceEarlyAdulthood
        } else if age_years < self.adulthood_end {
            LifeStageCategory::Adulthood
        } else {
            LifeStageCategory::MatureAdulthood
        })
    }
}

/// Life-stage category for an age, using the default bands.
pub fn life_stage_category(age_years: f64) -> Result<LifeStageCategory, EthicsError> {
    AgeBands::default().categorize(age_years)
}

/// Disability-adjusted life years: years of life lost plus years lived with
/// disability.
pub fn daly(yll: f64, yld: f64) -> Result<f64, EthicsError> {
    for (what, value) in [("YLL", yll), ("YLD", yld)] {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(EthicsError::NegativeInput { what, value });
        }
    }
    Ok(yll + yld)
}

/// Crash protection offered by whatever carries a person, on a 0..5 scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SafetyRating(f64);

impl SafetyRating {
    /// Rating of an unprotected pedestrian. Also used for strollers,
    /// wheelchairs and skateboards until they are rated separately.
    pub const PEDESTRIAN: f64 = 0.1;
    pub const MAX: f64 = 5.0;

    pub fn new(value: f64) -> Result<Self, EthicsError> {
        if value > 0.0 && value <= Self::MAX {
            Ok(SafetyRating(value))
        } else {
            Err(EthicsError::InvalidRating(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SafetyRating {
    type Error = EthicsError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        SafetyRating::new(value)
    }
}

impl From<SafetyRating> for f64 {
    fn from(r: SafetyRating) -> f64 {
        r.0
    }
}

/// A person aboard (or being) an entity. The life-stage category is derived
/// from the age on demand so that age bands stay configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OccupantRepr")]
pub struct Occupant {
    age_years: f64,
}

#[derive(Deserialize)]
struct OccupantRepr {
    age_years: f64,
}

impl TryFrom<OccupantRepr> for Occupant {
    type Error = EthicsError;

    fn try_from(r: OccupantRepr) -> Result<Self, Self::Error> {
        Occupant::new(r.age_years)
    }
}

impl Occupant {
    pub fn new(age_years: f64) -> Result<Self, EthicsError> {
        life_stage_category(age_years)?;
        Ok(Occupant { age_years })
    }

    pub fn age_years(&self) -> f64 {
        self.age_years
    }

    pub fn category(&self) -> LifeStageCategory {
        life_stage_category(self.age_years).expect("validated at construction")
    }

    pub fn category_with(&self, bands: &AgeBands) -> Result<LifeStageCategory, EthicsError> {
        bands.categorize(self.age_years)
    }
}

/// An amount of ethical value in utilitarian units (`u`). Used for both
/// personal and total ethical value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EthicalValue(pub f64);

impl EthicalValue {
    pub fn units(self) -> f64 {
        self.0
    }
}

pub fn personal_ethical_value(category: LifeStageCategory, rating: SafetyRating) -> EthicalValue {
    EthicalValue(f64::from(category.value()) / rating.value())
}

pub fn total_ethical_value(occupants: &[Occupant], rating: SafetyRating) -> EthicalValue {
    total_ethical_value_with(occupants, rating, &AgeBands::default())
        .expect("occupants are validated against the default bands")
}

pub fn total_ethical_value_with(
    occupants: &[Occupant],
    rating: SafetyRating,
    bands: &AgeBands,
) -> Result<EthicalValue, EthicsError> {
    let mut tev = 0.0;
    for o in occupants {
        tev += personal_ethical_value(o.category_with(bands)?, rating).0;
    }
    Ok(EthicalValue(tev))
}

/// Estimated crash force, in newtons.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct CrashForce(f64);

impl CrashForce {
    pub fn new(newtons: f64) -> Result<Self, EthicsError> {
        if newtons >= 0.0 && newtons.is_finite() {
            Ok(CrashForce(newtons))
        } else {
            Err(EthicsError::NegativeInput {
                what: "crash force",
                value: newtons,
            })
        }
    }

    pub fn newtons(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for CrashForce {
    type Error = EthicsError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        CrashForce::new(value)
    }
}

impl From<CrashForce> for f64 {
    fn from(f: CrashForce) -> f64 {
        f.0
    }
}

/// Maps mass, speed and braking distance to an estimated crash force.
pub trait CrashForceModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn crash_force(
        &self,
        mass_kg: f64,
        speed_mps: f64,
        braking_distance_m: f64,
    ) -> Result<CrashForce, EthicsError>;
}

/// Work-energy estimate: the kinetic energy `m·v²/2` dissipated over the
/// braking distance.
#[derive(Debug, Clone, Copy, Default)]
pub struct WorkEnergyModel;

impl CrashForceModel for WorkEnergyModel {
    fn name(&self) -> &'static str {
        "work-energy"
    }

    fn crash_force(
        &self,
        mass_kg: f64,
        speed_mps: f64,
        braking_distance_m: f64,
    ) -> Result<CrashForce, EthicsError> {
        crash_force(mass_kg, speed_mps, braking_distance_m)
    }
}

pub fn crash_force(
    mass_kg: f64,
    speed_mps: f64,
    braking_distance_m: f64,
) -> Result<CrashForce, EthicsError> {
    if !(mass_kg > 0.0) || !mass_kg.is_finite() {
        return Err(EthicsError::InvalidMass(mass_kg));
    }
    if !(braking_distance_m > 0.0) || !braking_distance_m.is_finite() {
        return Err(EthicsError::InvalidBrakingDistance(braking_distance_m));
    }
    if !(speed_mps >= 0.0) || !speed_mps.is_finite() {
        return Err(EthicsError::NegativeInput {
            what: "speed",
            value: speed_mps,
        });
    }
    CrashForce::new(mass_kg * speed_mps * speed_mps / (2.0 * braking_distance_m))
}

/// Crash force weighted by ethical value, in `uN`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UtilitarianForce(pub f64);

impl UtilitarianForce {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn utilitarian_force(force: CrashForce, tev: EthicalValue) -> UtilitarianForce {
    UtilitarianForce(force.newtons() * tev.units())
}

/// One element of a collision: the entity hit (or hitting) and the force it
/// takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub entity: EntityId,
    pub tev: EthicalValue,
    pub force: CrashForce,
}

impl Participant {
    pub fn new(entity: impl Into<EntityId>, tev: f64, force: f64) -> Result<Self, EthicsError> {
        if !(tev >= 0.0) || !tev.is_finite() {
            return Err(EthicsError::NegativeInput {
                what: "TEV",
                value: tev,
            });
        }
        Ok(Participant {
            entity: entity.into(),
            tev: EthicalValue(tev),
            force: CrashForce::new(force)?,
        })
    }

    pub fn uf(&self) -> UtilitarianForce {
        utilitarian_force(self.force, self.tev)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateAction {
    pub id: String,
    pub participants: Vec<Participant>,
    #[serde(default)]
    pub description: String,
    /// True when nothing outside the deciding vehicle is harmed.
    #[serde(default)]
    pub self_damage_only: bool,
}

impl CandidateAction {
    pub fn new(
        id: impl Into<String>,
        participants: Vec<Participant>,
    ) -> Result<Self, EthicsError> {
        let id = id.into();
        if participants.is_empty() {
            return Err(EthicsError::EmptyParticipants(id));
        }
        Ok(CandidateAction {
            id,
            participants,
            description: String::new(),
            self_damage_only: false,
        })
    }

    pub fn self_damage_only(mut self, flag: bool) -> Self {
        self.self_damage_only = flag;
        self
    }

    pub fn describe(mut self, text: impl Into<String>) -> Self {
        self.description = text.into();
        self
    }
}

pub fn total_utilitarian_force(action: &CandidateAction) -> Result<UtilitarianForce, EthicsError> {
    if action.participants.is_empty() {
        return Err(EthicsError::EmptyParticipants(action.id.clone()));
    }
    Ok(UtilitarianForce(
        action.participants.iter().map(|p| p.uf().0.abs()).sum(),
    ))
}

/// Relative tolerance used when comparing TUF values. Relative so that
/// uniformly rescaled forces compare the same way.
pub const TUF_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Whether two TUF values are equal up to floating rounding.
pub fn tuf_approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= TUF_RELATIVE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Which rule settled the choice among equal-TUF candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    None,
    SelfDamagePreference,
    LowestId,
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieBreak::None => "none",
            TieBreak::SelfDamagePreference => "self_damage_preference",
            TieBreak::LowestId => "lowest_id",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinTufSelection {
    /// Index into the candidate slice.
    pub chosen: usize,
    /// `(action id, TUF in uN)` for every candidate, in input order.
    pub table: Vec<(String, f64)>,
    pub tie_break: TieBreak,
}

/// Picks the candidate with least TUF.
///
/// Ties prefer actions that only damage the deciding vehicle, then the
/// lexicographically lowest action id.
pub fn select_min_tuf(candidates: &[CandidateAction]) -> Result<MinTufSelection, EthicsError> {
    let refs: Vec<&CandidateAction> = candidates.iter().collect();
    select_min_tuf_refs(&refs)
}

pub(crate) fn select_min_tuf_refs(
    candidates: &[&CandidateAction],
) -> Result<MinTufSelection, EthicsError> {
    if candidates.is_empty() {
        return Err(EthicsError::EmptyCandidates);
    }
    let table = candidates
        .iter()
        .map(|c| total_utilitarian_force(c).map(|t| (c.id.clone(), t.0)))
        .collect::<Result<Vec<_>, _>>()?;

    let min = table
        .iter()
        .map(|(_, t)| *t)
        .min_by(|a, b| a.total_cmp(b))
        .expect("non-empty");
    let tied: Vec<usize> = (0..table.len())
        .filter(|&i| tuf_approx_eq(table[i].1, min))
        .collect();

    let (chosen, tie_break) = if tied.len() == 1 {
        (tied[0], TieBreak::None)
    } else {
        let self_only: Vec<usize> = tied
            .iter()
            .copied()
            .filter(|&i| candidates[i].self_damage_only)
            .collect();
        match self_only.len() {
            1 => (self_only[0], TieBreak::SelfDamagePreference),
            0 => (lowest_id(candidates, &tied), TieBreak::LowestId),
            _ => (lowest_id(candidates, &self_only), TieBreak::LowestId),
        }
    };
    Ok(MinTufSelection {
        chosen,
        table,
        tie_break,
    })
}

fn lowest_id(candidates: &[&CandidateAction], among: &[usize]) -> usize {
    *among
        .iter()
        .min_by(|&&a, &&b| {
            candidates[a]
                .id
                .cmp(&candidates[b].id)
                .then_with(|| a.cmp(&b))
        })
        .expect("non-empty tie set")
}

/// Orders two TUF values, treating near-equal values as equal.
pub fn compare_tuf(a: f64, b: f64) -> Ordering {
    if tuf_approx_eq(a, b) {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rating(v: f64) -> SafetyRating {
        SafetyRating::new(v).unwrap()
    }

    #[test]
    fn life_stage_examples() {
        assert_eq!(life_stage_category(0.5).unwrap(), LifeStageCategory::Infancy);
        assert_eq!(life_stage_category(40.0).unwrap(), LifeStageCategory::Adulthood);
        assert_eq!(
            life_stage_category(13.0).unwrap(),
            LifeStageCategory::AdolescenceEarlyAdulthood
        );
        assert_eq!(life_stage_category(0.0).unwrap().value(), 5);
        assert_eq!(life_stage_category(2.0).unwrap().value(), 4);
        assert_eq!(life_stage_category(26.0).unwrap().value(), 2);
        assert_eq!(life_stage_category(61.0).unwrap().value(), 1);
        assert_eq!(life_stage_category(120.0).unwrap().value(), 1);
    }

    #[test]
    fn negative_age_is_a_domain_error() {
        assert!(matches!(life_stage_category(-1.0), Err(EthicsError::NegativeAge(_))));
        assert!(life_stage_category(f64::NAN).is_err());
        assert!(Occupant::new(-0.5).is_err());
    }

    #[test]
    fn category_labels_round_trip() {
        for c in LifeStageCategory::ALL {
            assert_eq!(LifeStageCategory::from_value(c.value()).unwrap(), c);
        }
        assert_eq!(LifeStageCategory::Infancy.label(), "Infancy");
        assert!(LifeStageCategory::from_value(0).is_err());
        assert!(LifeStageCategory::from_value(6).is_err());
    }

    #[test]
    fn custom_bands() {
        let bands = AgeBands {
            infancy_end: 1.0,
            childhood_end: 12.0,
            adolescence_end: 20.0,
            adulthood_end: 65.0,
        };
        bands.validate().unwrap();
        assert_eq!(bands.categorize(1.5).unwrap(), LifeStageCategory::Childhood);
        assert_eq!(bands.categorize(63.0).unwrap(), LifeStageCategory::Adulthood);
        let broken = AgeBands {
            childhood_end: 1.0,
            ..bands
        };
        assert_eq!(broken.validate(), Err(EthicsError::InvalidAgeBands));
    }

    #[test]
    fn daly_sums() {
        assert_eq!(daly(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(daly(10.0, 5.0).unwrap(), 15.0);
        assert_eq!(daly(7.2, 0.0).unwrap(), 7.2);
        assert!(daly(-1.0, 0.0).is_err());
        assert!(daly(0.0, -0.1).is_err());
    }

    #[test]
    fn pev_examples() {
        let pev = |c: u8, r: f64| {
            personal_ethical_value(LifeStageCategory::from_value(c).unwrap(), rating(r)).0
        };
        assert_eq!(pev(5, 5.0), 1.0);
        assert_eq!(pev(1, 5.0), 0.2);
        assert_eq!(pev(4, 0.1), 40.0);
    }

    #[test]
    fn rating_bounds() {
        assert!(SafetyRating::new(0.0).is_err());
        assert!(SafetyRating::new(-1.0).is_err());
        assert!(SafetyRating::new(5.1).is_err());
        assert!(SafetyRating::new(f64::NAN).is_err());
        assert!(SafetyRating::new(5.0).is_ok());
        assert!(serde_json::from_str::<SafetyRating>("0").is_err());
    }

    #[test]
    fn tev_examples() {
        let car: Vec<Occupant> = [20.0, 22.0, 8.0]
            .iter()
            .map(|&a| Occupant::new(a).unwrap())
            .collect();
        assert_eq!(total_ethical_value(&car, rating(2.0)).0, 5.0);
        assert_eq!(total_ethical_value(&[], rating(2.0)).0, 0.0);
        let adult = [Occupant::new(40.0).unwrap()];
        assert_eq!(total_ethical_value(&adult, rating(1.0)).0, 2.0);
    }

    #[test]
    fn crash_force_examples() {
        assert_eq!(crash_force(1000.0, 0.0, 100.0).unwrap().newtons(), 0.0);
        assert_eq!(crash_force(1000.0, 10.0, 100.0).unwrap().newtons(), 500.0);
        assert_eq!(crash_force(2000.0, 10.0, 100.0).unwrap().newtons(), 1000.0);
        assert!(matches!(crash_force(0.0, 1.0, 1.0), Err(EthicsError::InvalidMass(_))));
        assert!(matches!(
            crash_force(1.0, 1.0, 0.0),
            Err(EthicsError::InvalidBrakingDistance(_))
        ));
        assert!(crash_force(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn uf_examples() {
        let f = CrashForce::new(500.0).unwrap();
        assert_eq!(utilitarian_force(f, EthicalValue(5.0)).0, 2500.0);
        assert_eq!(utilitarian_force(f, EthicalValue(80.0)).0, 40000.0);
        assert_eq!(
            utilitarian_force(CrashForce::new(0.0).unwrap(), EthicalValue(7.0)).0,
            0.0
        );
    }

    fn action(id: &str, parts: &[(f64, f64)]) -> CandidateAction {
        let participants = parts
            .iter()
            .enumerate()
            .map(|(i, &(tev, f))| Participant::new(format!("{id}-{i}"), tev, f).unwrap())
            .collect();
        CandidateAction::new(id, participants).unwrap()
    }

    #[test]
    fn tuf_examples() {
        let kids = action("A", &[(5.0, 500.0), (80.0, 500.0)]);
        assert_eq!(total_utilitarian_force(&kids).unwrap().0, 42500.0);
        let zero = action("Z", &[(3.0, 0.0)]);
        assert_eq!(total_utilitarian_force(&zero).unwrap().0, 0.0);
        let truck = action("C", &[(5.0, 500.0), (2.0, 500.0)]);
        assert_eq!(total_utilitarian_force(&truck).unwrap().0, 3500.0);
    }

    #[test]
    fn empty_participants_rejected() {
        assert!(CandidateAction::new("x", vec![]).is_err());
        let hollow = CandidateAction {
            id: "x".into(),
            participants: vec![],
            description: String::new(),
            self_damage_only: false,
        };
        assert!(matches!(
            total_utilitarian_force(&hollow),
            Err(EthicsError::EmptyParticipants(_))
        ));
    }

    #[test]
    fn select_examples() {
        let a = action("A", &[(5.0, 500.0), (80.0, 500.0)]);
        let b = action("B", &[(5.0, 500.0), (3.0, 500.0)]);
        let c = action("C", &[(5.0, 500.0), (2.0, 500.0)]);
        let sel = select_min_tuf(&[a.clone(), b, c]).unwrap();
        assert_eq!(sel.chosen, 2);
        assert_eq!(
            sel.table,
            vec![
                ("A".to_string(), 42500.0),
                ("B".to_string(), 4000.0),
                ("C".to_string(), 3500.0)
            ]
        );
        assert_eq!(sel.tie_break, TieBreak::None);

        let single = select_min_tuf(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.chosen, 0);

        assert_eq!(select_min_tuf(&[]), Err(EthicsError::EmptyCandidates));
    }

    #[test]
    fn ties_prefer_self_damage_then_lowest_id() {
        let other = action("A", &[(1.0, 100.0)]);
        let own = action("B", &[(1.0, 100.0)]).self_damage_only(true);
        let sel = select_min_tuf(&[other.clone(), own]).unwrap();
        assert_eq!(sel.chosen, 1);
        assert_eq!(sel.tie_break, TieBreak::SelfDamagePreference);

        let other2 = action("0", &[(1.0, 100.0)]);
        let sel = select_min_tuf(&[other, other2]).unwrap();
        assert_eq!(sel.chosen, 1);
        assert_eq!(sel.tie_break, TieBreak::LowestId);
    }
}
