//! The tidy-up loop: pick the nearest detected object, drive to it,
//! classify it, look up its rule, drive to the receptacle, deposit.

use std::collections::VecDeque;
use std::io::Write;

use log::debug;
use serde::{Deserialize, Serialize};
use tidyup_core::{ObjectName, Primitive, ReceptacleName};
use tidyup_llmbackend::{CompletionBackend, DecodingParams};

use crate::control::{curvature, integrate_unicycle, lookahead_point};
use crate::geometry::{Point, Pose2D};
use crate::grid::{build_occupancy_grid, OccupancyGrid};
use crate::planner::plan_path;
use crate::rules::{resolve_rules, RuleTable, Rules};
use crate::sensing::{execute_primitive, simulate_classify, stream_rng, Stream};
use crate::world::{closest_object, ObjectState, Reach, World, WorldFile};
use crate::SimError;

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub p_localize: f64,
    pub p_classify: f64,
    pub p_place: f64,
    pub p_toss: f64,
    pub lookahead: f64,
    pub speed: f64,
    pub dt: f64,
    pub inflation: f64,
    pub max_steps: u64,
    pub rng_seed: u64,
    /// Primitive attempts per object before it is given up.
    #[serde(default = "one")]
    pub max_attempts_per_object: u32,
    #[serde(default)]
    pub reach: Reach,
}

impl SimConfig {
    pub fn perfect() -> Self {
        Self {
            p_localize: 1.0,
            p_classify: 1.0,
            p_place: 1.0,
            p_toss: 1.0,
            lookahead: 0.25,
            speed: 0.5,
            dt: 0.1,
            inflation: 0.15,
            max_steps: 20_000,
            rng_seed: 0,
            max_attempts_per_object: 1,
            reach: Reach::default(),
        }
    }

    /// Component rates measured on the real robot.
    pub fn measured_rates() -> Self {
        Self {
            p_localize: 0.925,
            p_classify: 0.955,
            p_place: 0.962,
            p_toss: 0.962,
            ..Self::perfect()
        }
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        let cfg: SimConfig =
            serde_json::from_str(&text).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        for (name, p) in [
            ("p_localize", self.p_localize),
            ("p_classify", self.p_classify),
            ("p_place", self.p_place),
            ("p_toss", self.p_toss),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        for (name, v) in [
            ("lookahead", self.lookahead),
            ("speed", self.speed),
            ("dt", self.dt),
            ("reach.place", self.reach.place),
            ("reach.toss", self.reach.toss),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.inflation >= 0.0 && self.inflation.is_finite()) {
            return bad(format!("inflation must be non-negative, got {}", self.inflation));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        if self.max_attempts_per_object == 0 {
            return bad("max_attempts_per_object must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectRecord {
    pub object: ObjectName,
    pub category: ObjectName,
    pub localized: bool,
    pub predicted_category: Option<ObjectName>,
    pub chosen_receptacle: Option<ReceptacleName>,
    pub chosen_primitive: Option<Primitive>,
    pub attempts: u32,
    pub successes: u32,
    pub final_receptacle: Option<ReceptacleName>,
    pub target_receptacle: ReceptacleName,
    pub correct: bool,
}

/// Observed success rate of each stage; `None` when the stage never ran.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ComponentRates {
    pub localization: Option<f64>,
    pub classification: Option<f64>,
    pub selection: Option<f64>,
    pub execution: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    NoDetectedObjects,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeLog {
    pub world: String,
    pub seed: u64,
    pub steps: u64,
    pub termination: Termination,
    pub objects: Vec<ObjectRecord>,
    pub rates: ComponentRates,
    pub total: usize,
    pub deposited: usize,
    pub correct: usize,
    pub overall: f64,
    pub anomalies: Vec<String>,
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    step: u64,
    action: &'a str,
    object: Option<&'a str>,
    pose: [f64; 3],
    outcome: &'a str,
}

/// What an observer sees after every step and action.
pub struct Observation<'a> {
    pub step: u64,
    pub action: &'a str,
    pub world: &'a World,
}

/// A world file with its grids built once, for repeated episodes.
#[derive(Debug, Clone)]
pub struct Scene {
    pub file: WorldFile,
    plan_grid: OccupancyGrid,
    body_grid: OccupancyGrid,
}

impl Scene {
    pub fn new(file: WorldFile, inflation: f64) -> Result<Self, SimError> {
        file.validate()?;
        let footprints: Vec<_> = file.receptacles.iter().map(|r| r.footprint).collect();
        let plan_grid = build_occupancy_grid(&footprints, file.bounds, file.resolution, inflation)?;
        let body_grid = build_occupancy_grid(&footprints, file.bounds, file.resolution, 0.0)?;
        if !plan_grid.is_free_point(file.robot.position()) {
            return Err(SimError::Config(
                "robot starts inside an inflated receptacle footprint".into(),
            ));
        }
        Ok(Self {
            file,
            plan_grid,
            body_grid,
        })
    }

    /// Occupancy with the inflation margin, used for planning.
    pub fn plan_grid(&self) -> &OccupancyGrid {
        &self.plan_grid
    }

    /// Bare footprints, used for collision checks.
    pub fn body_grid(&self) -> &OccupancyGrid {
        &self.body_grid
    }

    pub fn run(
        &self,
        table: &RuleTable,
        cfg: &SimConfig,
        trace: Option<&mut dyn Write>,
    ) -> Result<EpisodeLog, SimError> {
        self.run_observed(table, cfg, trace, &mut |_| {})
    }

    pub fn run_observed(
        &self,
        table: &RuleTable,
        cfg: &SimConfig,
        trace: Option<&mut dyn Write>,
        observer: &mut dyn FnMut(&Observation),
    ) -> Result<EpisodeLog, SimError> {
        cfg.validate()?;
        let mut world = World::from_file(&self.file);
        world.reach = cfg.reach;
        let records = world
            .objects
            .iter()
            .map(|o| ObjectRecord {
                object: o.name.clone(),
                category: o.category.clone(),
                localized: false,
                predicted_category: None,
                chosen_receptacle: None,
                chosen_primitive: None,
                attempts: 0,
                successes: 0,
                final_receptacle: None,
                target_receptacle: o.target_receptacle.clone(),
                correct: false,
            })
            .collect();
        let mut ep = Episode {
            scene: self,
            cfg,
            table,
            world,
            steps: 0,
            records,
            anomalies: table.warnings.clone(),
            trace,
            observer,
        };
        let termination = ep.run()?;
        Ok(ep.finish(termination))
    }
}

/// Resolve rules with the model, then run one episode.
pub fn run_episode(
    world: &WorldFile,
    rules: &Rules,
    backend: &dyn CompletionBackend,
    params: &DecodingParams,
    cfg: &SimConfig,
    trace: Option<&mut dyn Write>,
) -> Result<EpisodeLog, SimError> {
    cfg.validate()?;
    let table = resolve_rules(rules, &world.receptacle_names(), backend, params)?;
    Scene::new(world.clone(), cfg.inflation)?.run(&table, cfg, trace)
}

enum Nav {
    Arrived,
    Failed(String),
    OutOfSteps,
}

struct Episode<'a, 't, 'o> {
    scene: &'a Scene,
    cfg: &'a SimConfig,
    table: &'a RuleTable,
    world: World,
    steps: u64,
    records: Vec<ObjectRecord>,
    anomalies: Vec<String>,
    trace: Option<&'t mut dyn Write>,
    observer: &'o mut dyn FnMut(&Observation),
}

impl Episode<'_, '_, '_> {
    fn emit(&mut self, action: &str, object: Option<usize>, outcome: &str) -> Result<(), SimError> {
        (self.observer)(&Observation {
            step: self.steps,
            action,
            world: &self.world,
        });
        if let Some(out) = self.trace.as_deref_mut() {
            let r = &self.world.robot;
            let rec = TraceRecord {
                step: self.steps,
                action,
                object: object.map(|i| self.world.objects[i].name.as_str()),
                pose: [r.x, r.y, r.theta],
                outcome,
            };
            let line = serde_json::to_string(&rec).expect("trace records serialize");
            writeln!(out, "{line}").map_err(|e| SimError::Io(format!("trace: {e}")))?;
        }
        Ok(())
    }

    fn anomaly(&mut self, object: usize, what: String) {
        let msg = format!("{}: {what}", self.world.objects[object].name);
        debug!("{msg}");
        self.anomalies.push(msg);
    }

    fn run(&mut self) -> Result<Termination, SimError> {
        let mut loc = stream_rng(self.cfg.rng_seed, Stream::Localize);
        let mut cls = stream_rng(self.cfg.rng_seed, Stream::Classify);
        let mut prim = stream_rng(self.cfg.rng_seed, Stream::Primitive);
        for i in 0..self.world.objects.len() {
            let seen = rand::Rng::random_bool(&mut loc, self.cfg.p_localize);
            self.world.objects[i].detected = seen;
            self.records[i].localized = seen;
            self.emit("detect", Some(i), if seen { "detected" } else { "missed" })?;
        }
        loop {
            if self.steps >= self.cfg.max_steps {
                self.emit("stop", None, "max_steps")?;
                return Ok(Termination::MaxSteps);
            }
            let Some(oid) = closest_object(&self.world, &self.world.robot).map(|o| o.id) else {
                self.emit("stop", None, "no_detected_objects")?;
                return Ok(Termination::NoDetectedObjects);
            };
            let spot = self.world.objects[oid].position.expect("floor objects have a position");
            match self.go_to(spot)? {
                Nav::Arrived => {}
                Nav::OutOfSteps => continue,
                Nav::Failed(why) => {
                    self.anomaly(oid, format!("cannot reach object ({why})"));
                    self.world.objects[oid].detected = false;
                    continue;
                }
            }
            self.world.objects[oid].state = ObjectState::Grasped;
            self.world.objects[oid].position = None;
            self.steps += 1;
            self.emit("grasp", Some(oid), "grasped")?;

            let predicted = match simulate_classify(
                &self.world.objects[oid],
                self.table.categories(),
                self.cfg.p_classify,
                &mut cls,
            ) {
                Ok(c) => c,
                Err(SimError::UnknownCategory(c)) => {
                    self.anomaly(oid, format!("category {c:?} is not in the label set"));
                    self.put_down(oid, false);
                    self.emit("classify", Some(oid), "unknown_category")?;
                    continue;
                }
                Err(e) => return Err(e),
            };
            self.steps += 1;
            self.records[oid].predicted_category = Some(predicted.clone());
            self.emit("classify", Some(oid), predicted.as_str())?;

            let Some(rule) = self.table.get(&predicted).cloned() else {
                self.anomaly(oid, format!("no rule for category {:?}", predicted.as_str()));
                self.put_down(oid, false);
                self.emit("select", Some(oid), "no_rule")?;
                continue;
            };
            self.records[oid].chosen_receptacle = Some(rule.receptacle.clone());
            self.records[oid].chosen_primitive = Some(rule.primitive);
            let Some(rid) = self.world.receptacle_id(&rule.receptacle) else {
                self.anomaly(oid, format!("rule names unknown receptacle {:?}", rule.receptacle.as_str()));
                self.put_down(oid, false);
                self.emit("select", Some(oid), "unknown_receptacle")?;
                continue;
            };
            let selected = format!("{} {}", rule.primitive, rule.receptacle);
            self.emit("select", Some(oid), &selected)?;

            let drop = self.world.receptacles[rid].drop_point;
            match self.go_to(drop)? {
                Nav::Arrived => {}
                Nav::OutOfSteps => {
                    self.put_down(oid, true);
                    continue;
                }
                Nav::Failed(why) => {
                    self.anomaly(oid, format!("cannot reach {} ({why})", rule.receptacle));
                    self.put_down(oid, false);
                    continue;
                }
            }
            let ok = match execute_primitive(
                &mut self.world,
                rule.primitive,
                rid,
                self.cfg.p_place,
                self.cfg.p_toss,
                &mut prim,
            ) {
                Ok(ok) => ok,
                Err(SimError::OutOfRange { distance, limit }) => {
                    self.anomaly(oid, format!("receptacle {distance:.3} m away, reach {limit} m"));
                    self.put_down(oid, false);
                    continue;
                }
                Err(e) => return Err(e),
            };
            self.steps += 1;
            let rec = &mut self.records[oid];
            rec.attempts += 1;
            if ok {
                rec.successes += 1;
                rec.final_receptacle = Some(self.world.receptacles[rid].name.clone());
                rec.correct = rec.target_receptacle.normalized() == rule.receptacle.normalized();
                self.emit("execute", Some(oid), "deposited")?;
            } else {
                if rec.attempts >= self.cfg.max_attempts_per_object {
                    self.world.objects[oid].detected = false;
                }
                self.emit("execute", Some(oid), "dropped")?;
            }
        }
    }

    /// Release the held object where the robot stands.
    fn put_down(&mut self, oid: usize, keep_detected: bool) {
        let o = &mut self.world.objects[oid];
        o.state = ObjectState::OnFloor;
        o.position = Some(self.world.robot.position());
        o.detected = keep_detected;
    }

    fn go_to(&mut self, target: Point) -> Result<Nav, SimError> {
        let grid = &self.scene.plan_grid;
        let here = self.world.robot.position();
        let Some(goal) = approach_point(grid, here, target) else {
            return Ok(Nav::Failed("no free cell near the target".into()));
        };
        let path = match plan_path(grid, here, goal) {
            Ok(p) => p,
            Err(e) => return Ok(Nav::Failed(e.to_string())),
        };
        let waypoints = path.simplified();
        let cfg = self.cfg;
        let tol = grid.resolution();
        let per_step = cfg.speed * cfg.dt;
        let budget = 50 + (10.0 * path.cost.meters(grid.resolution()) / per_step).ceil() as u64;
        let start = self.steps;
        let mut aligned = false;
        loop {
            let pose = self.world.robot;
            let d = pose.position().dist(goal);
            if d <= tol {
                self.emit("navigate", None, "arrived")?;
                return Ok(Nav::Arrived);
            }
            if self.steps >= cfg.max_steps {
                return Ok(Nav::OutOfSteps);
            }
            if self.steps - start > budget {
                return Ok(Nav::Failed("tracking stalled".into()));
            }
            let (target, kind) = lookahead_point(&pose, &waypoints, cfg.lookahead)?;
            let local = pose.to_local(target);
            // turn in place when starting a leg or when the target falls
            // behind the robot
            let next = if !aligned || local.x <= 0.0 {
                aligned = true;
                let heading = (target.y - pose.y).atan2(target.x - pose.x);
                Pose2D::new(pose.x, pose.y, heading)
            } else {
                let v = cfg.speed.min(d / cfg.dt);
                let kappa = curvature(&pose, target, kind, cfg.lookahead);
                integrate_unicycle(&pose, v, v * kappa, cfg.dt)
            };
            if !self.scene.body_grid.is_free_point(next.position()) {
                return Ok(Nav::Failed("collision".into()));
            }
            self.world.robot = next;
            self.steps += 1;
            (self.observer)(&Observation {
                step: self.steps,
                action: "move",
                world: &self.world,
            });
        }
    }

    fn finish(self, termination: Termination) -> EpisodeLog {
        let recs = &self.records;
        let total = recs.len();
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        let localized = recs.iter().filter(|r| r.localized).count();
        let classified: Vec<_> = recs.iter().filter(|r| r.predicted_category.is_some()).collect();
        let right_class = classified
            .iter()
            .filter(|r| {
                r.predicted_category.as_ref().map(|c| c.normalized()) == Some(r.category.normalized())
            })
            .count();
        let world = &self.world;
        let right_rule = recs
            .iter()
            .zip(&world.objects)
            .filter(|(r, o)| {
                r.localized
                    && self.table.get(&o.category).is_some_and(|e| {
                        e.receptacle.normalized() == o.target_receptacle.normalized()
                            && e.primitive == o.target_primitive
                    })
            })
            .count();
        let attempts: u32 = recs.iter().map(|r| r.attempts).sum();
        let successes: u32 = recs.iter().map(|r| r.successes).sum();
        let deposited = world
            .objects
            .iter()
            .filter(|o| matches!(o.state, ObjectState::Deposited(_)))
            .count();
        let correct = recs.iter().filter(|r| r.correct).count();
        EpisodeLog {
            world: self.scene.file.name.clone(),
            seed: self.cfg.rng_seed,
            steps: self.steps,
            termination,
            rates: ComponentRates {
                localization: ratio(localized, total),
                classification: ratio(right_class, classified.len()),
                selection: ratio(right_rule, localized),
                execution: ratio(successes as usize, attempts as usize),
            },
            total,
            deposited,
            correct,
            overall: ratio(correct, total).unwrap_or(1.0),
            objects: self.records,
            anomalies: self.anomalies,
        }
    }
}

/// `target` itself when free; otherwise the first free cell met walking
/// from `target` toward `from`, then the nearest free cell by grid search.
pub fn approach_point(grid: &OccupancyGrid, from: Point, target: Point) -> Option<Point> {
    if grid.is_free_point(target) {
        return Some(target);
    }
    let d = from.dist(target);
    let n = ((d / (grid.resolution() / 4.0)).ceil() as usize).max(1);
    for k in 1..=n {
        let p = target.lerp(from, k as f64 / n as f64);
        if let Some(c) = grid.cell_of(p) {
            if !grid.is_occupied(c) {
                return Some(grid.center(c));
            }
        }
    }
    let start = grid.cell_of(grid_clamp(grid, target))?;
    let mut seen = vec![false; grid.width() * grid.height()];
    let mut queue = VecDeque::from([start]);
    seen[grid.index(start)] = true;
    while let Some(c) = queue.pop_front() {
        if !grid.is_occupied(c) {
            return Some(grid.center(c));
        }
        let (x, y) = (c.0 as i64, c.1 as i64);
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0 && ny >= 0 && (nx as usize) < grid.width() && (ny as usize) < grid.height() {
                let n = (nx as usize, ny as usize);
                if !std::mem::replace(&mut seen[grid.index(n)], true) {
                    queue.push_back(n);
                }
            }
        }
    }
    None
}

fn grid_clamp(grid: &OccupancyGrid, p: Point) -> Point {
    let lo = grid.center((0, 0));
    let hi = grid.center((grid.width() - 1, grid.height() - 1));
    Point::new(p.x.clamp(lo.x, hi.x), p.y.clamp(lo.y, hi.y))
}
