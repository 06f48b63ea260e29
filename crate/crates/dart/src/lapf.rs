//! Local artificial-potential-field motion control: attraction toward the
//! third node of the current path, decayed repulsion from occupied cells
//! around the leading path nodes, and the mapping from the blended
//! direction to differential-drive commands.

use crate::geom::{wrap_angle, Point, TotalF64, Vec2};
use crate::grid::{CellState, OccupancyGrid};
use crate::sim::RobotState;

/// Unit direction vector, or exactly zero when undefined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceVector {
    pub x: f64,
    pub y: f64,
}

impl ForceVector {
    pub const ZERO: ForceVector = ForceVector { x: 0.0, y: 0.0 };

    fn from_vec(v: Vec2) -> ForceVector {
        // rounding dust from cancelling contributions must not produce a
        // garbage unit vector
        if v.norm() < 1e-12 {
            return ForceVector::ZERO;
        }
        let n = v.normalized();
        ForceVector { x: n.x, y: n.y }
    }

    pub fn as_vec(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Differential-drive command.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlCommand {
    pub v: f64,
    pub omega: f64,
}

/// Velocity and acceleration envelope of the robot platform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionLimits {
    pub v_max: f64,
    pub omega_max: f64,
    pub accel: f64,
    pub ang_accel: f64,
}

impl Default for MotionLimits {
    fn default() -> Self {
        MotionLimits {
            v_max: 0.25,
            omega_max: 1.0,
            accel: 2.5,
            ang_accel: 3.2,
        }
    }
}

/// Attraction: unit vector from the first path node toward the third.
/// Zero when the two coincide.
pub fn attraction(p0: Point, p2: Point) -> ForceVector {
    ForceVector::from_vec(p2 - p0)
}

/// Repulsion at `p`: normalized sum of vectors pointing from each occupied
/// cell center within `radius` toward `p`. Zero when there are none or the
/// sum cancels.
pub fn repulsion(grid: &OccupancyGrid, p: Point, radius: f64) -> ForceVector {
    debug_assert!(radius > 0.0);
    let lo = grid.world_to_cell(Point::new(p.x - radius, p.y - radius));
    let hi = grid.world_to_cell(Point::new(p.x + radius, p.y + radius));
    let mut sum = Vec2::ZERO;
    for y in lo.y..=hi.y {
        for x in lo.x..=hi.x {
            let c = crate::geom::Cell::new(x, y);
            if !grid.in_bounds(c) || grid.state(c).unwrap() != CellState::Occupied {
                continue;
            }
            let center = grid.cell_center(c);
            if center.distance(p) <= radius {
                sum = sum + (p - center);
            }
        }
    }
    ForceVector::from_vec(sum)
}

/// Blend: w1 * attraction + sum_i (w2 / 2^i) * repulsion_i. Not
/// renormalized; consumers treat it as a heading reference.
pub fn direction(attr: ForceVector, reps: &[ForceVector; 3], w1: f64, w2: f64) -> Vec2 {
    debug_assert!(w1 > 0.0 && w2 > 0.0);
    let mut out = attr.as_vec() * w1;
    for (i, rep) in reps.iter().enumerate() {
        out = out + rep.as_vec() * (w2 / f64::powi(2.0, i as i32));
    }
    out
}

fn move_toward(current: f64, target: f64, max_step: f64) -> f64 {
    (target - current).clamp(-max_step, max_step) + current
}

/// Map a direction vector to a drive command: proportional heading
/// control clamped and rate-limited to the platform envelope, forward
/// speed scaled by the cosine of the heading error. A zero direction
/// commands a stop (angular rate decays to zero under the same limit).
pub fn to_command(
    dir: Vec2,
    robot: &RobotState,
    k_omega: f64,
    limits: &MotionLimits,
    dt: f64,
) -> ControlCommand {
    debug_assert!(dt > 0.0);
    let (v_des, omega_des) = if dir.norm() == 0.0 {
        (0.0, 0.0)
    } else {
        let theta_e = wrap_angle(dir.angle() - robot.heading);
        let omega = (k_omega * theta_e).clamp(-limits.omega_max, limits.omega_max);
        let v = limits.v_max * theta_e.cos().max(0.0);
        (v, omega)
    };
    ControlCommand {
        v: move_toward(robot.v, v_des, limits.accel * dt),
        omega: move_toward(robot.omega, omega_des, limits.ang_accel * dt),
    }
}

#[derive(Clone, Debug)]
pub struct LapfConfig {
    pub w1: f64,
    pub w2: f64,
    pub k_omega: f64,
    /// Repulsion lookup radius around each sampled path node; the lattice
    /// sampling interval by convention.
    pub repulse_radius: f64,
    pub limits: MotionLimits,
}

impl Default for LapfConfig {
    fn default() -> Self {
        LapfConfig {
            w1: 1.0,
            w2: 0.6,
            k_omega: 2.0,
            repulse_radius: 0.3,
            limits: MotionLimits::default(),
        }
    }
}

/// Full controller step: pick the leading three path nodes relative to
/// the robot's progress, blend forces, emit a command.
///
/// Short paths pad by repeating the last node; a single-node path falls
/// back to direct attraction from the robot toward it.
pub fn steer(
    grid: &OccupancyGrid,
    path: &[Point],
    robot: &RobotState,
    cfg: &LapfConfig,
    dt: f64,
) -> ControlCommand {
    if path.is_empty() {
        return to_command(Vec2::ZERO, robot, cfg.k_omega, &cfg.limits, dt);
    }
    let nearest = path
        .iter()
        .enumerate()
        .min_by_key(|(i, p)| (TotalF64(p.distance(robot.position)), *i))
        .map(|(i, _)| i)
        .unwrap();
    let p0 = path[nearest];
    let p1 = path[(nearest + 1).min(path.len() - 1)];
    let p2 = path[(nearest + 2).min(path.len() - 1)];
    let attr = if path.len() == 1 || p0 == p2 {
        attraction(robot.position, *path.last().unwrap())
    } else {
        attraction(p0, p2)
    };
    let reps = [
        repulsion(grid, p0, cfg.repulse_radius),
        repulsion(grid, p1, cfg.repulse_radius),
        repulsion(grid, p2, cfg.repulse_radius),
    ];
    let dir = direction(attr, &reps, cfg.w1, cfg.w2);
    to_command(dir, robot, cfg.k_omega, &cfg.limits, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Cell;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn all_free(w: i32, h: i32) -> OccupancyGrid {
        let mut g = OccupancyGrid::new_unknown(w, h, 0.05, Point::new(0.0, 0.0)).unwrap();
        for y in 0..h {
            for x in 0..w {
                g.set_state(Cell::new(x, y), CellState::Free).unwrap();
            }
        }
        g
    }

    fn at_rest(x: f64, y: f64, heading: f64) -> RobotState {
        RobotState {
            position: Point::new(x, y),
            heading,
            v: 0.0,
            omega: 0.0,
        }
    }

    #[test]
    fn attraction_examples() {
        let a = attraction(Point::new(0.0, 0.0), Point::new(2.0, 0.0));
        assert_eq!((a.x, a.y), (1.0, 0.0));

        let a = attraction(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        assert!((a.x - 0.7071).abs() < 1e-4 && (a.y - 0.7071).abs() < 1e-4);

        let a = attraction(Point::new(1.0, 1.0), Point::new(1.0, 1.0));
        assert_eq!(a, ForceVector::ZERO);
    }

    #[test]
    fn repulsion_cases() {
        let g = all_free(60, 60);
        let p = g.cell_center(Cell::new(30, 30));
        assert_eq!(repulsion(&g, p, 0.3), ForceVector::ZERO);

        // single occupied cell directly left
        let mut g1 = g.clone();
        g1.set_state(Cell::new(28, 30), CellState::Occupied).unwrap();
        let r = repulsion(&g1, p, 0.3);
        assert!((r.x - 1.0).abs() < 1e-12 && r.y.abs() < 1e-12);

        // two occupied cells symmetric about p cancel
        let mut g2 = g.clone();
        g2.set_state(Cell::new(28, 30), CellState::Occupied).unwrap();
        g2.set_state(Cell::new(32, 30), CellState::Occupied).unwrap();
        assert_eq!(repulsion(&g2, p, 0.3), ForceVector::ZERO);
    }

    #[test]
    fn direction_blend_arithmetic() {
        let attr = ForceVector { x: 1.0, y: 0.0 };
        let zero3 = [ForceVector::ZERO; 3];
        let d = direction(attr, &zero3, 1.0, 0.6);
        assert_eq!((d.x, d.y), (1.0, 0.0));

        let up = ForceVector { x: 0.0, y: 1.0 };
        let d = direction(attr, &[up, up, up], 1.0, 0.6);
        assert!((d.x - 1.0).abs() < 1e-12);
        assert!((d.y - 1.05).abs() < 1e-12, "0.6 + 0.3 + 0.15 = 1.05");
    }

    #[test]
    fn direction_matches_termwise_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let unit = |rng: &mut rand_chacha::ChaCha8Rng| {
                let a: f64 = rng.random_range(-PI..PI);
                ForceVector {
                    x: a.cos(),
                    y: a.sin(),
                }
            };
            let attr = unit(&mut rng);
            let reps = [unit(&mut rng), unit(&mut rng), unit(&mut rng)];
            let w1: f64 = rng.random_range(0.1..3.0);
            let w2: f64 = rng.random_range(0.1..3.0);
            let d = direction(attr, &reps, w1, w2);
            // brute-force term summation
            let ex = w1 * attr.x + w2 * reps[0].x + w2 / 2.0 * reps[1].x + w2 / 4.0 * reps[2].x;
            let ey = w1 * attr.y + w2 * reps[0].y + w2 / 2.0 * reps[1].y + w2 / 4.0 * reps[2].y;
            assert!((d.x - ex).abs() < 1e-12 && (d.y - ey).abs() < 1e-12);
        }
    }

    #[test]
    fn command_dead_ahead_reaches_vmax() {
        let limits = MotionLimits::default();
        let robot = at_rest(0.0, 0.0, 0.0);
        let cmd = to_command(Vec2::new(1.0, 0.0), &robot, 2.0, &limits, 1.0);
        assert!((cmd.v - 0.25).abs() < 1e-12);
        assert_eq!(cmd.omega, 0.0);
    }

    #[test]
    fn command_reverse_direction_turns_in_place() {
        let limits = MotionLimits::default();
        let robot = at_rest(0.0, 0.0, 0.0);
        let cmd = to_command(Vec2::new(-1.0, 0.0), &robot, 2.0, &limits, 1.0);
        assert_eq!(cmd.v, 0.0, "cos(pi) <= 0 gives zero forward speed");
        assert!((cmd.omega.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn command_quarter_turn() {
        let limits = MotionLimits::default();
        let robot = at_rest(0.0, 0.0, 0.0);
        let cmd = to_command(Vec2::new(0.0, 1.0), &robot, 2.0, &limits, 1.0);
        // omega = clamp(2 * pi/2) = 1.0
        assert!((cmd.omega - 1.0).abs() < 1e-12);
        assert!(cmd.v.abs() < 1e-12, "cos(pi/2) ~ 0");
        let _ = FRAC_PI_2;
    }

    #[test]
    fn commands_respect_limits_under_random_inputs() {
        use rand::{Rng, SeedableRng};
        let limits = MotionLimits::default();
        let dt = 0.05;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut robot = at_rest(0.0, 0.0, 0.0);
        for _ in 0..500 {
            let dir = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let cmd = to_command(dir, &robot, 2.0, &limits, dt);
            assert!(cmd.v.abs() <= limits.v_max + 1e-12);
            assert!(cmd.omega.abs() <= limits.omega_max + 1e-12);
            assert!((cmd.v - robot.v).abs() <= limits.accel * dt + 1e-12);
            assert!((cmd.omega - robot.omega).abs() <= limits.ang_accel * dt + 1e-12);
            robot.v = cmd.v;
            robot.omega = cmd.omega;
            robot.heading = wrap_angle(robot.heading + rng.random_range(-0.3..0.3));
        }
    }

    #[test]
    fn lateral_blend_points_away_from_obstacle_side() {
        // path runs along +x; occupied cells only above it
        let mut g = all_free(80, 40);
        for x in 20..60 {
            g.set_state(Cell::new(x, 24), CellState::Occupied).unwrap();
        }
        let y = g.cell_center(Cell::new(0, 20)).y;
        let path: Vec<Point> = (0..6)
            .map(|i| Point::new(1.0 + 0.3 * i as f64, y))
            .collect();
        let p0 = path[0];
        let p1 = path[1];
        let p2 = path[2];
        let attr = attraction(p0, p2);
        let reps = [
            repulsion(&g, p0, 0.3),
            repulsion(&g, p1, 0.3),
            repulsion(&g, p2, 0.3),
        ];
        let d = direction(attr, &reps, 1.0, 0.6);
        assert!(d.y < 0.0, "obstacles above must push the blend downward");
        assert!(d.x > 0.0, "attraction still dominates forward progress");
    }

    /// Corner-corridor regression: attraction to the third node of the
    /// path clears tight corners that a naive potential field (attraction
    /// straight to the final goal) stalls on.
    #[test]
    fn corner_corridor_progress_vs_naive_apf() {
        use crate::sim::{step_kinematics, RobotState};
        // U-shaped corridor; the goal sits directly above the start with
        // a wall between the arms, a textbook local minimum for the naive
        // field.
        let mut g = OccupancyGrid::new_unknown(120, 120, 0.05, Point::new(0.0, 0.0)).unwrap();
        for y in 0..120 {
            for x in 0..120 {
                let lower = (10..=110).contains(&x) && (10..=26).contains(&y);
                let right = (94..=110).contains(&x) && (10..=110).contains(&y);
                let upper = (10..=110).contains(&x) && (94..=110).contains(&y);
                let s = if lower || right || upper {
                    CellState::Free
                } else {
                    CellState::Occupied
                };
                g.set_state(Cell::new(x, y), s).unwrap();
            }
        }
        // path nodes along the corridor centerline, 0.3 m apart
        let mut path: Vec<Point> = Vec::new();
        let mut x = 0.9;
        while x < 5.1 {
            path.push(Point::new(x, 0.9));
            x += 0.3;
        }
        let mut y = 0.9;
        while y < 5.1 {
            path.push(Point::new(5.1, y));
            y += 0.3;
        }
        let mut x = 5.1;
        while x > 0.85 {
            path.push(Point::new(x, 5.1));
            x -= 0.3;
        }
        let goal = *path.last().unwrap();
        let cfg = LapfConfig::default();
        let dt = 0.05;

        let run = |naive: bool| -> (f64, bool) {
            let mut robot = RobotState {
                position: Point::new(0.9, 0.9),
                heading: 0.0,
                v: 0.0,
                omega: 0.0,
            };
            for _ in 0..3600 {
                let cmd = if naive {
                    // classic APF: attraction straight at the goal,
                    // repulsion sampled at the robot
                    let attr = attraction(robot.position, goal);
                    let rep = repulsion(&g, robot.position, cfg.repulse_radius);
                    let dir = direction(attr, &[rep, rep, rep], cfg.w1, cfg.w2);
                    to_command(dir, &robot, cfg.k_omega, &cfg.limits, dt)
                } else {
                    steer(&g, &path, &robot, &cfg, dt)
                };
                match step_kinematics(&g, &robot, &cmd, dt, &cfg.limits) {
                    Ok(next) => robot = next,
                    Err(_) => return (robot.position.distance(goal), false),
                }
                if robot.position.distance(goal) < 0.3 {
                    return (robot.position.distance(goal), true);
                }
            }
            (robot.position.distance(goal), false)
        };

        let (lapf_dist, lapf_done) = run(false);
        let (naive_dist, naive_done) = run(true);
        assert!(lapf_done, "LAPF must reach the corridor end ({lapf_dist:.2} m left)");
        assert!(
            !naive_done && naive_dist > lapf_dist + 1.0,
            "naive APF should stall before the corner (left {naive_dist:.2} m)"
        );
    }
}
