use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tidyup_core::{ObjectName, Primitive, ReceptacleName};

use crate::geometry::{Point, Pose2D, Rect};

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed world file: {0}")]
    Format(String),
    #[error("invalid world: {0}")]
    Invalid(String),
    #[error("{0} lies outside the world bounds")]
    OutOfBounds(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceptacleSpec {
    pub name: ReceptacleName,
    pub footprint: Rect,
    pub drop_point: Point,
}

/// An object on the floor with its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub name: ObjectName,
    pub category: ObjectName,
    pub position: Point,
    pub receptacle: ReceptacleName,
    pub primitive: Primitive,
}

/// A seen example for deriving rules with the language model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleSpec {
    pub object: ObjectName,
    pub receptacle: ReceptacleName,
    pub primitive: Primitive,
}

/// Scenario file for the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldFile {
    pub name: String,
    pub bounds: Rect,
    pub resolution: f64,
    pub robot: Pose2D,
    pub receptacles: Vec<ReceptacleSpec>,
    pub objects: Vec<ObjectSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub examples: Vec<ExampleSpec>,
}

impl WorldFile {
    pub fn parse(text: &str) -> Result<Self, WorldError> {
        let w: WorldFile = serde_json::from_str(text).map_err(|e| WorldError::Format(e.to_string()))?;
        w.validate()?;
        Ok(w)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WorldError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| WorldError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn receptacle_names(&self) -> Vec<ReceptacleName> {
        self.receptacles.iter().map(|r| r.name.clone()).collect()
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::Invalid(m));
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return bad(format!("resolution must be positive, got {}", self.resolution));
        }
        if !self.bounds.has_area() {
            return bad("bounds have no area".into());
        }
        if !self.robot.is_finite() {
            return bad("robot pose is not finite".into());
        }
        if !self.bounds.contains(self.robot.position()) {
            return Err(WorldError::OutOfBounds("robot start".into()));
        }
        let mut names = HashSet::new();
        for r in &self.receptacles {
            if !names.insert(r.name.clone()) {
                return bad(format!("duplicate receptacle {:?}", r.name.as_str()));
            }
            if !r.footprint.has_area() {
                return bad(format!("receptacle {:?} footprint has no area", r.name.as_str()));
            }
            if !self.bounds.contains_rect(&r.footprint) {
                return Err(WorldError::OutOfBounds(format!("receptacle {:?}", r.name.as_str())));
            }
            if !r.footprint.contains(r.drop_point) {
                return bad(format!("drop point of {:?} is outside its footprint", r.name.as_str()));
            }
        }
        let mut objects = HashSet::new();
        for o in &self.objects {
            if !objects.insert(o.name.clone()) {
                return bad(format!("duplicate object {:?}", o.name.as_str()));
            }
            if !o.position.is_finite() || !self.bounds.contains(o.position) {
                return Err(WorldError::OutOfBounds(format!("object {:?}", o.name.as_str())));
            }
            if !names.contains(&o.receptacle) {
                return bad(format!(
                    "object {:?} belongs in unknown receptacle {:?}",
                    o.name.as_str(),
                    o.receptacle.as_str()
                ));
            }
        }
        for e in &self.examples {
            if !names.contains(&e.receptacle) {
                return bad(format!("example uses unknown receptacle {:?}", e.receptacle.as_str()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectState {
    OnFloor,
    Grasped,
    Deposited(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorldObject {
    pub id: usize,
    pub name: ObjectName,
    pub category: ObjectName,
    /// `None` unless on the floor.
    pub position: Option<Point>,
    pub state: ObjectState,
    pub detected: bool,
    pub target_receptacle: ReceptacleName,
    pub target_primitive: Primitive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceptacleBody {
    pub id: usize,
    pub name: ReceptacleName,
    pub footprint: Rect,
    pub drop_point: Point,
}

/// How close the robot must be to a footprint for each primitive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reach {
    pub place: f64,
    pub toss: f64,
}

impl Default for Reach {
    fn default() -> Self {
        Self { place: 0.5, toss: 1.0 }
    }
}

impl Reach {
    pub fn of(&self, p: Primitive) -> f64 {
        match p {
            Primitive::Place => self.place,
            Primitive::Toss => self.toss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct StateCounts {
    pub on_floor: usize,
    pub grasped: usize,
    pub deposited: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct World {
    pub bounds: Rect,
    pub robot: Pose2D,
    pub objects: Vec<WorldObject>,
    pub receptacles: Vec<ReceptacleBody>,
    pub reach: Reach,
}

impl World {
    pub fn from_file(file: &WorldFile) -> Self {
        Self {
            bounds: file.bounds,
            robot: file.robot,
            objects: file
                .objects
                .iter()
                .enumerate()
                .map(|(id, o)| WorldObject {
                    id,
                    name: o.name.clone(),
                    category: o.category.clone(),
                    position: Some(o.position),
                    state: ObjectState::OnFloor,
                    detected: false,
                    target_receptacle: o.receptacle.clone(),
                    target_primitive: o.primitive,
                })
                .collect(),
            receptacles: file
                .receptacles
                .iter()
                .enumerate()
                .map(|(id, r)| ReceptacleBody {
                    id,
                    name: r.name.clone(),
                    footprint: r.footprint,
                    drop_point: r.drop_point,
                })
                .collect(),
            reach: Reach::default(),
        }
    }

    pub fn grasped(&self) -> Option<usize> {
        self.objects
            .iter()
            .position(|o| o.state == ObjectState::Grasped)
    }

    pub fn receptacle_id(&self, name: &ReceptacleName) -> Option<usize> {
        let key = name.normalized();
        self.receptacles.iter().position(|r| r.name.normalized() == key)
    }

    pub fn counts(&self) -> StateCounts {
        let mut c = StateCounts::default();
        for o in &self.objects {
            match o.state {
                ObjectState::OnFloor => c.on_floor += 1,
                ObjectState::Grasped => c.grasped += 1,
                ObjectState::Deposited(_) => c.deposited += 1,
            }
        }
        c
    }

    /// Checks the object-state invariants, returning a description of the
    /// first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let c = self.counts();
        if c.grasped > 1 {
            return Err(format!("{} objects grasped", c.grasped));
        }
        for o in &self.objects {
            let ok = match o.state {
                ObjectState::OnFloor => o.position.is_some(),
                ObjectState::Grasped => o.position.is_none(),
                ObjectState::Deposited(r) => o.position.is_none() && r < self.receptacles.len(),
            };
            if !ok {
                return Err(format!("object {:?} in state {:?} at {:?}", o.name.as_str(), o.state, o.position));
            }
        }
        Ok(())
    }
}

/// The detected floor object nearest to `pose`; ties go to the lower id.
pub fn closest_object<'w>(world: &'w World, pose: &Pose2D) -> Option<&'w WorldObject> {
    let here = pose.position();
    world
        .objects
        .iter()
        .filter(|o| o.detected && o.state == ObjectState::OnFloor)
        .filter_map(|o| o.position.map(|p| (o, p.dist(here))))
        .fold(None, |best: Option<(&WorldObject, f64)>, (o, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((o, d)),
        })
        .map(|(o, _)| o)
}
