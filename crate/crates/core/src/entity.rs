//! Participants in the vehicular world: vehicles, pedestrians, animals and
//! road side units.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ethics::{Occupant, SafetyRating};

/// Identifier of an entity or network node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        EntityId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        EntityId(s.to_owned())
    }
}

impl From<String> for EntityId {
    fn from(s: String) -> Self {
        EntityId(s)
    }
}

/// A point on the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    SmartVehicle,
    HumanDrivenVehicle,
    Truck,
    Motorcycle,
    Bicycle,
    Pedestrian,
    Animal,
    Rsu,
}

impl EntityKind {
    pub fn is_mobile(self) -> bool {
        !matches!(self, EntityKind::Rsu)
    }

    /// Carrier safety rating used when a scenario does not state one.
    ///
    /// Vehicles default to the top of the five star scale; two-wheelers sit in
    /// the middle of the 0.5..1.5 band; unprotected people and animals get 0.1.
    pub fn default_rating(self) -> SafetyRating {
        let value = match self {
            EntityKind::SmartVehicle | EntityKind::HumanDrivenVehicle | EntityKind::Truck => 5.0,
            EntityKind::Motorcycle | EntityKind::Bicycle => 1.0,
            EntityKind::Pedestrian | EntityKind::Animal => SafetyRating::PEDESTRIAN,
            EntityKind::Rsu => 5.0,
        };
        SafetyRating::new(value).expect("built-in ratings are in range")
    }

    pub fn default_role(self) -> NodeRole {
        match self {
            EntityKind::Rsu => NodeRole::new(RoleKind::RsuFixed),
            _ => NodeRole::new(RoleKind::VehicleDynamic),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RoleKind {
    RsuFixed,
    VehicleDynamic,
    PlatoonLeader,
    PlatoonMember,
    EmergencyTactical,
}

impl RoleKind {
    /// Default level in the command hierarchy; larger is higher.
    pub fn default_level(self) -> u32 {
        match self {
            RoleKind::VehicleDynamic | RoleKind::PlatoonMember => 0,
            RoleKind::PlatoonLeader => 1,
            RoleKind::EmergencyTactical => 2,
            RoleKind::RsuFixed => 3,
        }
    }

    /// Roles that fan commands out to subordinates.
    pub fn is_leader(self) -> bool {
        matches!(
            self,
            RoleKind::PlatoonLeader | RoleKind::RsuFixed | RoleKind::EmergencyTactical
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeRole {
    pub role: RoleKind,
    pub hierarchy_level: u32,
}

impl NodeRole {
    pub fn new(role: RoleKind) -> Self {
        NodeRole {
            role,
            hierarchy_level: role.default_level(),
        }
    }

    /// Checks the level ordering between roles: tactical nodes never sit below
    /// ordinary vehicles.
    pub fn is_consistent(&self) -> bool {
        match self.role {
            RoleKind::EmergencyTactical => {
                self.hierarchy_level >= RoleKind::VehicleDynamic.default_level()
            }
            _ => true,
        }
    }
}

/// One mobile or fixed participant of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityState {
    pub id: EntityId,
    pub kind: EntityKind,
    pub position: Position,
    #[serde(default)]
    pub speed: f64,
    #[serde(default)]
    pub heading: f64,
    pub mass: f64,
    #[serde(default)]
    pub braking_distance: f64,
    pub safety_rating: SafetyRating,
    #[serde(default)]
    pub occupants: Vec<Occupant>,
    /// Network role; defaults by kind when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<NodeRole>,
}

impl EntityState {
    /// Builds an entity with kind defaults for rating and role.
    pub fn new(id: impl Into<EntityId>, kind: EntityKind, position: Position) -> Self {
        EntityState {
            id: id.into(),
            kind,
            position,
            speed: 0.0,
            heading: 0.0,
            mass: 1.0,
            braking_distance: 1.0,
            safety_rating: kind.default_rating(),
            occupants: Vec::new(),
            role: None,
        }
    }

    pub fn with_occupants(mut self, ages: &[f64]) -> Self {
        self.occupants = ages
            .iter()
            .map(|&a| Occupant::new(a).expect("occupant age must be non-negative"))
            .collect();
        self
    }

    pub fn with_rating(mut self, rating: SafetyRating) -> Self {
        self.safety_rating = rating;
        self
    }

    pub fn with_kinematics(mut self, mass: f64, speed: f64, braking_distance: f64) -> Self {
        self.mass = mass;
        self.speed = speed;
        self.braking_distance = braking_distance;
        self
    }

    pub fn with_role(mut self, role: NodeRole) -> Self {
        self.role = Some(role);
        self
    }

    pub fn role(&self) -> NodeRole {
        self.role.unwrap_or_else(|| self.kind.default_role())
    }
}
