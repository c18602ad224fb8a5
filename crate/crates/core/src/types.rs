use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::names::{ObjectName, ReceptacleName};

/// Manipulation primitive used to deposit a grasped object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    Place,
    Toss,
}

impl Primitive {
    /// The DSL function that expresses this primitive.
    pub fn call_name(self) -> &'static str {
        match self {
            Primitive::Place => "pick_and_place",
            Primitive::Toss => "pick_and_toss",
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Primitive::Place => "place",
            Primitive::Toss => "toss",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Placement {
    pub object: ObjectName,
    pub receptacle: ReceptacleName,
}

impl Placement {
    pub fn new(object: ObjectName, receptacle: ReceptacleName) -> Self {
        Self { object, receptacle }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimitiveChoice {
    pub object: ObjectName,
    pub primitive: Primitive,
}

impl PrimitiveChoice {
    pub fn new(object: ObjectName, primitive: Primitive) -> Self {
        Self { object, primitive }
    }
}

/// The kind of rule a scenario's preferences encode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortingCriterion {
    Category,
    Attribute,
    Function,
    Subcategory,
    MultipleCategories,
}

impl SortingCriterion {
    pub const ALL: [SortingCriterion; 5] = [
        SortingCriterion::Category,
        SortingCriterion::Attribute,
        SortingCriterion::Function,
        SortingCriterion::Subcategory,
        SortingCriterion::MultipleCategories,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SortingCriterion::Category => "category",
            SortingCriterion::Attribute => "attribute",
            SortingCriterion::Function => "function",
            SortingCriterion::Subcategory => "subcategory",
            SortingCriterion::MultipleCategories => "multiple_categories",
        }
    }
}

impl fmt::Display for SortingCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomType {
    LivingRoom,
    Bedroom,
    Kitchen,
    PantryRoom,
}

impl RoomType {
    pub const ALL: [RoomType; 4] = [
        RoomType::LivingRoom,
        RoomType::Bedroom,
        RoomType::Kitchen,
        RoomType::PantryRoom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RoomType::LivingRoom => "living_room",
            RoomType::Bedroom => "bedroom",
            RoomType::Kitchen => "kitchen",
            RoomType::PantryRoom => "pantry_room",
        }
    }
}

impl fmt::Display for RoomType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which half of a scenario's placements is being referred to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Seen,
    Unseen,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Seen => "seen",
            Split::Unseen => "unseen",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One benchmark unit: receptacles, example placements, and held-out
/// placements used for scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub id: String,
    pub room_type: RoomType,
    pub receptacles: Vec<ReceptacleName>,
    pub seen: Vec<Placement>,
    pub unseen: Vec<Placement>,
    pub seen_primitives: Option<Vec<PrimitiveChoice>>,
    pub unseen_primitives: Option<Vec<PrimitiveChoice>>,
    pub criteria: BTreeSet<SortingCriterion>,
}

impl Scenario {
    pub fn placements(&self, split: Split) -> &[Placement] {
        match split {
            Split::Seen => &self.seen,
            Split::Unseen => &self.unseen,
        }
    }

    pub fn primitives(&self, split: Split) -> Option<&[PrimitiveChoice]> {
        match split {
            Split::Seen => self.seen_primitives.as_deref(),
            Split::Unseen => self.unseen_primitives.as_deref(),
        }
    }

    /// Object names of a split, in placement order.
    pub fn objects(&self, split: Split) -> Vec<ObjectName> {
        self.placements(split).iter().map(|p| p.object.clone()).collect()
    }

    pub fn has_primitives(&self) -> bool {
        self.seen_primitives.is_some() && self.unseen_primitives.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub scenarios: Vec<Scenario>,
}

impl Dataset {
    pub fn get(&self, id: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.id == id)
    }
}
