//! Exploration strategy presets: the full dual-level stack, the greedy
//! frontier baselines, and the ablation variants, plus the pure-pursuit
//! fallback controller used where the potential field is ablated.

use crate::geom::{wrap_angle, Point, TotalF64};
use crate::lapf::{ControlCommand, MotionLimits};
use crate::sim::RobotState;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Controller {
    Lapf,
    PurePursuit,
}

/// A named combination of target policy and motion controller.
#[derive(Clone, Debug)]
pub struct Strategy {
    pub name: &'static str,
    /// Build the high graph and prefer unexplored region nodes.
    pub use_htg: bool,
    /// Override of the utility weight alpha (None: use the configured
    /// default). The `nearest` baseline pins 0 (pure travel cost), the
    /// `greedy-info` baseline pins a large value (information dominates).
    pub alpha_override: Option<f64>,
    pub controller: Controller,
}

impl Strategy {
    /// Full stack: region-first targeting plus potential-field control.
    pub fn dart() -> Strategy {
        Strategy {
            name: "dart",
            use_htg: true,
            alpha_override: None,
            controller: Controller::Lapf,
        }
    }

    /// Baseline: closest frontier cluster by low-graph path length.
    pub fn nearest() -> Strategy {
        Strategy {
            name: "nearest",
            use_htg: false,
            alpha_override: Some(0.0),
            controller: Controller::PurePursuit,
        }
    }

    /// Baseline: highest information gain (travel cost almost ignored).
    pub fn greedy_info() -> Strategy {
        Strategy {
            name: "greedy-info",
            use_htg: false,
            alpha_override: Some(1000.0),
            controller: Controller::PurePursuit,
        }
    }

    /// Ablation A: low graph only, fallback controller.
    pub fn ltg_only() -> Strategy {
        Strategy {
            name: "ltg",
            use_htg: false,
            alpha_override: None,
            controller: Controller::PurePursuit,
        }
    }

    /// Ablation A+B: region-first targeting, fallback controller.
    pub fn ltg_htg() -> Strategy {
        Strategy {
            name: "ltg+htg",
            use_htg: true,
            alpha_override: None,
            controller: Controller::PurePursuit,
        }
    }

    /// Ablation A+C: low graph with potential-field control, no regions.
    pub fn ltg_lapf() -> Strategy {
        Strategy {
            name: "ltg+lapf",
            use_htg: false,
            alpha_override: None,
            controller: Controller::Lapf,
        }
    }

    pub fn by_name(name: &str) -> Option<Strategy> {
        match name {
            "dart" => Some(Strategy::dart()),
            "nearest" => Some(Strategy::nearest()),
            "greedy-info" => Some(Strategy::greedy_info()),
            "ltg" => Some(Strategy::ltg_only()),
            "ltg+htg" => Some(Strategy::ltg_htg()),
            "ltg+lapf" => Some(Strategy::ltg_lapf()),
            _ => None,
        }
    }

    pub fn known_names() -> &'static [&'static str] {
        &["dart", "nearest", "greedy-info", "ltg", "ltg+htg", "ltg+lapf"]
    }
}

/// Ablation variant tokens (A = low graph, B = high graph, C = potential
/// field). The low graph is mandatory.
pub fn ablation_variant(token: &str) -> Option<Strategy> {
    let canon: String = token
        .to_ascii_uppercase()
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    match canon.as_str() {
        "A" => Some(Strategy::ltg_only()),
        "A+B" => Some(Strategy::ltg_htg()),
        "A+C" => Some(Strategy::ltg_lapf()),
        "A+B+C" => Some(Strategy::dart()),
        _ => None,
    }
}

pub const ABLATION_VARIANTS: [&str; 4] = ["A", "A+B", "A+C", "A+B+C"];

/// Conservative waypoint follower standing in for a stock local planner:
/// chases a short lookahead point on the path and scales speed down
/// quadratically with heading error, so corners are taken slowly.
pub fn pure_pursuit(
    path: &[Point],
    robot: &RobotState,
    lookahead: f64,
    k_omega: f64,
    limits: &MotionLimits,
    dt: f64,
) -> ControlCommand {
    let move_toward =
        |current: f64, target: f64, step: f64| (target - current).clamp(-step, step) + current;
    if path.is_empty() {
        return ControlCommand {
            v: move_toward(robot.v, 0.0, limits.accel * dt),
            omega: move_toward(robot.omega, 0.0, limits.ang_accel * dt),
        };
    }
    let nearest = path
        .iter()
        .enumerate()
        .min_by_key(|(i, p)| (TotalF64(p.distance(robot.position)), *i))
        .map(|(i, _)| i)
        .unwrap();
    let mut target = *path.last().unwrap();
    for p in &path[nearest..] {
        if p.distance(robot.position) >= lookahead {
            target = *p;
            break;
        }
    }
    let to_target = target - robot.position;
    if to_target.norm() < 1e-9 {
        return ControlCommand {
            v: move_toward(robot.v, 0.0, limits.accel * dt),
            omega: move_toward(robot.omega, 0.0, limits.ang_accel * dt),
        };
    }
    let theta_e = wrap_angle(to_target.angle() - robot.heading);
    let omega_des = (k_omega * theta_e).clamp(-limits.omega_max, limits.omega_max);
    let scale = theta_e.cos().max(0.0);
    let v_des = limits.v_max * scale * scale;
    ControlCommand {
        v: move_toward(robot.v, v_des, limits.accel * dt),
        omega: move_toward(robot.omega, omega_des, limits.ang_accel * dt),
    }
}
