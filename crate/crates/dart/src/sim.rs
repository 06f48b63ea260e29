//! Deterministic headless world: differential-drive kinematics, a 360-beam
//! range sensor ray-cast against the ground-truth grid, noiseless belief
//! updates, and the full exploration episode loop.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Cell, Point, Vec2};
use crate::grid::{observable_cells, CellState, GridDiff, OccupancyGrid};
use crate::htg::{assess_regions, erode_to_regions, HighGraph};
use crate::lapf::{self, LapfConfig, MotionLimits};
use crate::ltg::LowGraph;
use crate::planner::{select_target, SelectOutcome, SelectParams};
use crate::strategy::{pure_pursuit, Controller, Strategy};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobotState {
    pub position: Point,
    pub heading: f64,
    pub v: f64,
    pub omega: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Beam {
    /// World-frame bearing, radians.
    pub bearing: f64,
    /// Meters to the first occupied cell boundary, capped at the scan range.
    pub range: f64,
    pub hit: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensorScan {
    pub beams: Vec<Beam>,
}

/// All tunables of the stack, with platform limits per the robot model.
#[derive(Clone, Debug)]
pub struct Params {
    /// Lattice sampling multiple (d_sample = k * resolution).
    pub k: i32,
    /// Corridor width in cells for edge validation.
    pub corridor_w: i32,
    /// Frontier diffusion depth, cells.
    pub d_max: i32,
    /// Frontier threshold: nodes with more unknown cells than this are
    /// frontiers.
    pub tau: u32,
    /// Utility weight, meters per unknown cell.
    pub alpha: f64,
    /// Region-to-cluster matching radius, meters.
    pub d_region: f64,
    /// Minimum trail marker separation, meters.
    pub r_trail: f64,
    /// Trail-to-trail connection radius at drop time, meters.
    pub r_edge: f64,
    /// High-graph edge radius, meters.
    pub d_edge: f64,
    /// Minimum time between trail drops, seconds.
    pub trail_min_interval: f64,
    /// Erosion cycle cap.
    pub erosion_max: u32,
    /// Attraction weight.
    pub w1: f64,
    /// Repulsion weight.
    pub w2: f64,
    /// Heading gain, 1/s.
    pub k_omega: f64,
    /// Pursuit lookahead, meters.
    pub lookahead: f64,
    pub limits: MotionLimits,
    /// Control tick, seconds.
    pub dt_control: f64,
    /// Map/replan period, seconds.
    pub update_period: f64,
    /// Sensor range, meters.
    pub scan_range: f64,
    /// Sensor beams per revolution.
    pub scan_beams: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            k: 6,
            corridor_w: 7,
            d_max: 8,
            tau: 4,
            alpha: 0.1,
            d_region: 6.0,
            r_trail: 1.0,
            r_edge: 2.5,
            d_edge: 6.0,
            trail_min_interval: 2.0,
            erosion_max: 50,
            w1: 1.0,
            w2: 0.6,
            k_omega: 2.0,
            lookahead: 0.4,
            limits: MotionLimits::default(),
            dt_control: 0.05,
            update_period: 1.0,
            scan_range: 8.0,
            scan_beams: 360,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.k < 2 {
            return fail(format!("k must be >= 2, got {}", self.k));
        }
        if self.corridor_w < 1 {
            return fail(format!("corridor_w must be >= 1, got {}", self.corridor_w));
        }
        if self.d_max < 1 {
            return fail(format!("d_max must be >= 1, got {}", self.d_max));
        }
        if !(self.r_edge > self.r_trail) {
            return fail(format!(
                "r_edge ({}) must exceed r_trail ({})",
                self.r_edge, self.r_trail
            ));
        }
        if !(self.trail_min_interval > 0.0) {
            return fail("trail_min_interval must be positive".into());
        }
        if !(self.dt_control > 0.0 && self.dt_control <= 0.1) {
            return fail(format!(
                "dt_control must be in (0, 0.1], got {}",
                self.dt_control
            ));
        }
        let ratio = self.update_period / self.dt_control;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
            return fail("update_period must be a positive multiple of dt_control".into());
        }
        if self.scan_beams == 0 {
            return fail("scan_beams must be positive".into());
        }
        if !(self.scan_range > 0.0) {
            return fail("scan_range must be positive".into());
        }
        if self.alpha < 0.0 {
            return fail("alpha must be non-negative".into());
        }
        Ok(())
    }

    pub fn d_sample(&self, grid: &OccupancyGrid) -> f64 {
        self.k as f64 * grid.resolution()
    }
}

/// Grid placement copied out so ray traversal can run while the grid
/// itself is mutably borrowed.
#[derive(Clone, Copy, Debug)]
struct GridFrame {
    width: i32,
    height: i32,
    resolution: f64,
    origin: Point,
}

impl GridFrame {
    fn of(grid: &OccupancyGrid) -> GridFrame {
        GridFrame {
            width: grid.width(),
            height: grid.height(),
            resolution: grid.resolution(),
            origin: grid.origin(),
        }
    }

    fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    fn world_to_cell(&self, p: Point) -> Cell {
        Cell::new(
            ((p.x - self.origin.x) / self.resolution).floor() as i32,
            ((p.y - self.origin.y) / self.resolution).floor() as i32,
        )
    }
}

/// Walk the grid cells pierced by a ray. `visit(cell, t_entry)` gets the
/// entry distance in meters (0 for the origin cell) and returns false to
/// stop. Exact corner crossings step diagonally, so every entry distance
/// maps to exactly one cell; this keeps the scan and the belief update in
/// exact correspondence.
fn traverse_ray(
    grid: GridFrame,
    origin: Point,
    bearing: f64,
    max_range: f64,
    mut visit: impl FnMut(Cell, f64) -> bool,
) {
    let res = grid.resolution;
    let dir = Vec2::new(bearing.cos(), bearing.sin());
    let mut cell = grid.world_to_cell(origin);
    if !grid.in_bounds(cell) {
        return;
    }
    // fractional offset inside the grid, cell units
    let fx = (origin.x - grid.origin.x) / res;
    let fy = (origin.y - grid.origin.y) / res;
    let (step_x, mut t_max_x, t_delta_x) = if dir.x > 0.0 {
        (1, (cell.x as f64 + 1.0 - fx) * res / dir.x, res / dir.x)
    } else if dir.x < 0.0 {
        (-1, (fx - cell.x as f64) * res / -dir.x, res / -dir.x)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    };
    let (step_y, mut t_max_y, t_delta_y) = if dir.y > 0.0 {
        (1, (cell.y as f64 + 1.0 - fy) * res / dir.y, res / dir.y)
    } else if dir.y < 0.0 {
        (-1, (fy - cell.y as f64) * res / -dir.y, res / -dir.y)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    };
    if !visit(cell, 0.0) {
        return;
    }
    loop {
        let t = t_max_x.min(t_max_y);
        if t > max_range {
            return;
        }
        if t_max_x < t_max_y {
            cell = Cell::new(cell.x + step_x, cell.y);
            t_max_x += t_delta_x;
        } else if t_max_y < t_max_x {
            cell = Cell::new(cell.x, cell.y + step_y);
            t_max_y += t_delta_y;
        } else {
            cell = Cell::new(cell.x + step_x, cell.y + step_y);
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        }
        if !grid.in_bounds(cell) {
            return;
        }
        if !visit(cell, t) {
            return;
        }
    }
}

/// Cast equally spaced rays against the ground truth. Range is the entry
/// distance of the first occupied cell, capped at `params.scan_range`.
pub fn scan(world: &OccupancyGrid, state: &RobotState, params: &Params) -> Result<SensorScan> {
    let origin_cell = world.world_to_cell(state.position);
    if !world.is_free(origin_cell) {
        return Err(Error::InvalidArgument(format!(
            "scan origin {origin_cell} is not a free cell"
        )));
    }
    let mut beams = Vec::with_capacity(params.scan_beams);
    for i in 0..params.scan_beams {
        let bearing = i as f64 * TAU / params.scan_beams as f64;
        let mut range = params.scan_range;
        let mut hit = false;
        traverse_ray(GridFrame::of(world), state.position, bearing, params.scan_range, |c, t| {
            if world.state(c).expect("in bounds") == CellState::Occupied {
                range = t;
                hit = true;
                false
            } else {
                true
            }
        });
        beams.push(Beam { bearing, range, hit });
    }
    Ok(SensorScan { beams })
}

/// Fold a scan into the belief grid: cells pierced before each beam's hit
/// become Free, the hit cell becomes Occupied, Occupied never reverts.
/// Returns the diff of actually changed cells, sorted by index.
pub fn integrate_scan(
    belief: &mut OccupancyGrid,
    scan: &SensorScan,
    state: &RobotState,
) -> GridDiff {
    let mut changes: BTreeMap<usize, (CellState, CellState)> = BTreeMap::new();
    for beam in &scan.beams {
        traverse_ray(GridFrame::of(belief), state.position, beam.bearing, beam.range, |c, t| {
            let idx = belief.index(c);
            let old = belief.state(c).expect("in bounds");
            let new = if beam.hit && t == beam.range {
                CellState::Occupied
            } else {
                CellState::Free
            };
            if old != new && old != CellState::Occupied {
                debug_assert!(
                    !(old == CellState::Free && new == CellState::Occupied),
                    "noiseless sensor cannot flip free to occupied"
                );
                belief.set_state(c, new).expect("in bounds");
                changes
                    .entry(idx)
                    .and_modify(|e| e.1 = new)
                    .or_insert((old, new));
            }
            true
        });
    }
    GridDiff {
        changed: changes
            .into_iter()
            .map(|(index, (old, new))| crate::grid::DiffEntry { index, old, new })
            .collect(),
    }
}

/// Unicycle step under acceleration limits; heading integrates before
/// position. Errors if the resulting cell is occupied (or outside the
/// world) in ground truth.
pub fn step_kinematics(
    world: &OccupancyGrid,
    state: &RobotState,
    cmd: &lapf::ControlCommand,
    dt: f64,
    limits: &MotionLimits,
) -> Result<RobotState> {
    debug_assert!(dt > 0.0);
    debug_assert!(cmd.v.abs() <= limits.v_max + 1e-9);
    debug_assert!(cmd.omega.abs() <= limits.omega_max + 1e-9);
    let clamp_step = |cur: f64, target: f64, step: f64| (target - cur).clamp(-step, step) + cur;
    let v = clamp_step(state.v, cmd.v, limits.accel * dt);
    let omega = clamp_step(state.omega, cmd.omega, limits.ang_accel * dt);
    let heading = wrap_angle(state.heading + omega * dt);
    let position = state.position + Vec2::new(heading.cos(), heading.sin()) * (v * dt);
    if !world.is_free(world.world_to_cell(position)) {
        return Err(Error::Collision { position });
    }
    Ok(RobotState {
        position,
        heading,
        v,
        omega,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpisodeOutcome {
    /// Coverage crossed the threshold.
    ReachedThreshold,
    /// No targetable frontier clusters remained.
    NoTargets,
    /// Simulated-time cap expired.
    TimeCap,
    /// The robot entered an occupied cell.
    Collision,
    /// The planner lost contact with the graph.
    Detached,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
    pub coverage: f64,
}

/// Wall-clock cost of one map-update decision, split by stage.
#[derive(Clone, Copy, Debug, Default)]
pub struct DecisionTiming {
    /// Graph update + frontier detection, ms.
    pub frontier_ms: f64,
    /// Target selection (path queries included), ms.
    pub target_ms: f64,
    /// High-graph construction, ms.
    pub other_ms: f64,
}

impl DecisionTiming {
    pub fn total_ms(&self) -> f64 {
        self.frontier_ms + self.target_ms + self.other_ms
    }
}

#[derive(Clone, Debug)]
pub struct EpisodeResult {
    pub outcome: EpisodeOutcome,
    /// Final coverage reached the threshold.
    pub success: bool,
    /// First scan to episode end (threshold-crossing tick on success), s.
    pub time_s: f64,
    pub distance_m: f64,
    pub final_coverage: f64,
    /// One sample per map update (1 Hz), plus a final sample on abnormal
    /// exits.
    pub trajectory: Vec<TrajectorySample>,
    pub decisions: Vec<DecisionTiming>,
    /// (t, v, omega) per control tick; populated when
    /// `record_control_rate` is set.
    pub control_trace: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct EpisodeConfig {
    pub start: Point,
    /// Fixed initial heading; None draws uniformly from the seed.
    pub start_heading: Option<f64>,
    pub coverage_threshold: f64,
    pub seed: u64,
    /// Simulated-time cap, seconds.
    pub max_sim_time: f64,
    pub record_control_rate: bool,
    pub params: Params,
}

impl EpisodeConfig {
    pub fn new(start: Point) -> Self {
        EpisodeConfig {
            start,
            start_heading: None,
            coverage_threshold: 1.0,
            seed: 0,
            max_sim_time: 1800.0,
            record_control_rate: false,
            params: Params::default(),
        }
    }
}

/// Run one exploration episode: 1 Hz scan + map + graph + replan, 20 Hz
/// control, until the coverage threshold, target exhaustion, a collision
/// or the time cap.
pub fn run_episode(
    world: &OccupancyGrid,
    strategy: &Strategy,
    config: &EpisodeConfig,
) -> Result<EpisodeResult> {
    let params = &config.params;
    params.validate()?;
    if !(config.coverage_threshold > 0.0 && config.coverage_threshold <= 1.0) {
        return Err(Error::Config(format!(
            "coverage_threshold must be in (0, 1], got {}",
            config.coverage_threshold
        )));
    }
    let start_cell = world.world_to_cell(config.start);
    if !world.is_free(start_cell) {
        return Err(Error::Config(format!(
            "start position ({:.2}, {:.2}) is not in a free cell",
            config.start.x, config.start.y
        )));
    }
    let denominator = observable_cells(world, start_cell)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let heading = config
        .start_heading
        .unwrap_or_else(|| rng.random_range(-PI..PI));
    let mut robot = RobotState {
        position: config.start,
        heading,
        v: 0.0,
        omega: 0.0,
    };

    let mut belief = world.blank_like();
    let mut ltg = LowGraph::build_full(&belief, params.k, params.corridor_w)?;
    let mut htg = HighGraph::new();
    let lapf_cfg = LapfConfig {
        w1: params.w1,
        w2: params.w2,
        k_omega: params.k_omega,
        repulse_radius: params.d_sample(world),
        limits: params.limits,
    };
    let select_params = SelectParams {
        alpha: strategy.alpha_override.unwrap_or(params.alpha),
        d_sample: params.d_sample(world),
        d_edge: params.d_edge,
        region_first: strategy.use_htg,
    };

    let dt = params.dt_control;
    let ticks_per_update = (params.update_period / dt).round() as u64;
    let mut known = 0usize;
    let mut coverage = 0.0;
    let mut distance = 0.0;
    let mut path: Vec<Point> = Vec::new();
    let mut trajectory = Vec::new();
    let mut decisions = Vec::new();
    let mut control_trace = Vec::new();
    let mut tick: u64 = 0;
    let mut t = 0.0;

    let outcome = 'episode: loop {
        if tick % ticks_per_update == 0 {
            let scan = scan(world, &robot, params)?;
            let diff = integrate_scan(&mut belief, &scan, &robot);
            known += diff
                .changed
                .iter()
                .filter(|e| e.old == CellState::Unknown)
                .count();
            coverage = known as f64 / denominator as f64;

            let t0 = Instant::now();
            ltg.update(&belief, &diff);
            let clusters = ltg.detect_frontiers(&belief, params.d_max, params.tau);
            let frontier_ms = t0.elapsed().as_secs_f64() * 1e3;

            let t1 = Instant::now();
            if strategy.use_htg {
                let components = erode_to_regions(&ltg, params.erosion_max);
                let regions =
                    assess_regions(&components, &ltg, &belief, &clusters, params.d_region);
                htg.set_regions(regions);
                htg.maybe_drop_trail(
                    robot.position,
                    t,
                    &belief,
                    params.r_trail,
                    params.r_edge,
                    params.trail_min_interval,
                );
                htg.rebuild_edges(&belief, params.d_edge);
            }
            let other_ms = t1.elapsed().as_secs_f64() * 1e3;

            let t2 = Instant::now();
            let selection =
                select_target(&ltg, &htg, &clusters, &belief, robot.position, &select_params);
            let target_ms = t2.elapsed().as_secs_f64() * 1e3;
            decisions.push(DecisionTiming {
                frontier_ms,
                target_ms,
                other_ms,
            });

            trajectory.push(TrajectorySample {
                t,
                x: robot.position.x,
                y: robot.position.y,
                theta: robot.heading,
                v: robot.v,
                omega: robot.omega,
                coverage,
            });
            if coverage >= config.coverage_threshold {
                break 'episode EpisodeOutcome::ReachedThreshold;
            }
            match selection {
                Ok(SelectOutcome::Plan(plan)) => {
                    path = plan
                        .path
                        .iter()
                        .map(|id| ltg.node(*id).expect("plan nodes exist").position)
                        .collect();
                }
                Ok(SelectOutcome::ExplorationComplete) => {
                    break 'episode EpisodeOutcome::NoTargets;
                }
                Err(Error::PlannerDetached { .. }) => {
                    break 'episode EpisodeOutcome::Detached;
                }
                Err(e) => return Err(e),
            }
        }

        let cmd = match strategy.controller {
            Controller::Lapf => lapf::steer(&belief, &path, &robot, &lapf_cfg, dt),
            Controller::PurePursuit => pure_pursuit(
                &path,
                &robot,
                params.lookahead,
                params.k_omega,
                &params.limits,
                dt,
            ),
        };
        match step_kinematics(world, &robot, &cmd, dt, &params.limits) {
            Ok(next) => {
                distance += next.position.distance(robot.position);
                robot = next;
            }
            Err(Error::Collision { .. }) => {
                trajectory.push(TrajectorySample {
                    t,
                    x: robot.position.x,
                    y: robot.position.y,
                    theta: robot.heading,
                    v: robot.v,
                    omega: robot.omega,
                    coverage,
                });
                break 'episode EpisodeOutcome::Collision;
            }
            Err(e) => return Err(e),
        }
        tick += 1;
        t = tick as f64 * dt;
        if config.record_control_rate {
            control_trace.push((t, robot.v, robot.omega));
        }
        if t >= config.max_sim_time {
            trajectory.push(TrajectorySample {
                t,
                x: robot.position.x,
                y: robot.position.y,
                theta: robot.heading,
                v: robot.v,
                omega: robot.omega,
                coverage,
            });
            break 'episode EpisodeOutcome::TimeCap;
        }
    };

    Ok(EpisodeResult {
        outcome,
        success: coverage >= config.coverage_threshold,
        time_s: t,
        distance_m: distance,
        final_coverage: coverage,
        trajectory,
        decisions,
        control_trace,
    })
}
