//! Stochastic stand-ins for perception and manipulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tidyup_core::{ObjectName, Primitive};

use crate::geometry::Point;
use crate::world::{ObjectState, World, WorldObject};
use crate::SimError;

/// Independent random streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Localize = 1,
    Classify = 2,
    Primitive = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Distance the dropped object lands from the footprint edge.
pub const DROP_OFFSET: f64 = 0.02;

/// The true category with probability `p_classify`, otherwise a uniform
/// pick among the other categories.
pub fn simulate_classify<R: Rng + ?Sized>(
    obj: &WorldObject,
    categories: &[ObjectName],
    p_classify: f64,
    rng: &mut R,
) -> Result<ObjectName, SimError> {
    let key = obj.category.normalized();
    let truth = categories
        .iter()
        .position(|c| c.normalized() == key)
        .ok_or_else(|| SimError::UnknownCategory(obj.category.to_string()))?;
    if categories.len() == 1 || rng.random_bool(p_classify) {
        return Ok(categories[truth].clone());
    }
    let mut k = rng.random_range(0..categories.len() - 1);
    if k >= truth {
        k += 1;
    }
    Ok(categories[k].clone())
}

/// Deposit the grasped object with the given primitive. A failed attempt
/// leaves it on the floor just outside the footprint, on the robot's side.
pub fn execute_primitive<R: Rng + ?Sized>(
    world: &mut World,
    primitive: Primitive,
    receptacle: usize,
    p_place: f64,
    p_toss: f64,
    rng: &mut R,
) -> Result<bool, SimError> {
    let held = world.grasped().ok_or(SimError::NothingGrasped)?;
    let body = world
        .receptacles
        .get(receptacle)
        .ok_or(SimError::UnknownReceptacle(receptacle.to_string()))?;
    let robot = world.robot.position();
    let distance = body.footprint.distance_to(robot);
    let limit = world.reach.of(primitive);
    if distance > limit {
        return Err(SimError::OutOfRange { distance, limit });
    }
    let p = match primitive {
        Primitive::Place => p_place,
        Primitive::Toss => p_toss,
    };
    let obj = &mut world.objects[held];
    if rng.random_bool(p) {
        obj.state = ObjectState::Deposited(receptacle);
        obj.position = None;
        return Ok(true);
    }
    let edge = body.footprint.closest_point(robot);
    let d = edge.dist(robot);
    let spot = if d > 0.0 {
        let t = DROP_OFFSET.min(d) / d;
        edge.lerp(robot, t)
    } else {
        Point::new(edge.x, edge.y)
    };
    obj.state = ObjectState::OnFloor;
    obj.position = Some(spot);
    Ok(false)
}
