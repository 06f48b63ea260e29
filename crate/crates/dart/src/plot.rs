//! SVG rendering of benchmark artifacts: per-episode trajectory dot
//! plots (one dot per map update, so dot density reads as speed) and
//! per-map coverage-over-time curves. Output bytes are deterministic
//! for fixed inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{CellState, OccupancyGrid};
use crate::sim::TrajectorySample;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Trajectory dot plot over the map walls. One dot per sample; the first
/// sample gets a start marker.
pub fn trajectory_svg(
    world: &OccupancyGrid,
    traj: &[TrajectorySample],
    title: &str,
) -> Result<String> {
    if traj.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let scale = 60.0; // px per meter
    let res = world.resolution();
    let w_px = world.width() as f64 * res * scale;
    let h_px = world.height() as f64 * res * scale;
    let margin = 24.0;
    let sx = |x: f64| margin + (x - world.origin().x) * scale;
    let sy = |y: f64| margin + h_px - (y - world.origin().y) * scale;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}">"#,
        w_px + 2.0 * margin,
        h_px + 2.0 * margin + 18.0,
        w_px + 2.0 * margin,
        h_px + 2.0 * margin + 18.0,
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="0" y="0" width="100%" height="100%" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="16" font-family="monospace" font-size="13">{}</text>"#,
        margin, title
    )
    .unwrap();
    // walls: merge occupied runs per row
    for y in 0..world.height() {
        let mut x = 0;
        while x < world.width() {
            let c = crate::geom::Cell::new(x, y);
            if world.state(c).unwrap() == CellState::Occupied {
                let x0 = x;
                while x < world.width()
                    && world.state(crate::geom::Cell::new(x, y)).unwrap() == CellState::Occupied
                {
                    x += 1;
                }
                let wx = world.origin().x + x0 as f64 * res;
                let wy = world.origin().y + (y + 1) as f64 * res;
                writeln!(
                    out,
                    r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#444"/>"##,
                    sx(wx),
                    sy(wy),
                    (x - x0) as f64 * res * scale,
                    res * scale,
                )
                .unwrap();
            } else {
                x += 1;
            }
        }
    }
    for s in traj {
        writeln!(
            out,
            r#"<circle cx="{:.1}" cy="{:.1}" r="2.2" fill="{}"/>"#,
            sx(s.x),
            sy(s.y),
            PALETTE[0],
        )
        .unwrap();
    }
    let first = &traj[0];
    writeln!(
        out,
        r#"<circle cx="{:.1}" cy="{:.1}" r="5" fill="none" stroke="{}" stroke-width="2"/>"#,
        sx(first.x),
        sy(first.y),
        PALETTE[2],
    )
    .unwrap();
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

/// Coverage-vs-time curves, one labeled series per strategy.
pub fn coverage_svg(series: &[(String, Vec<(f64, f64)>)]) -> Result<String> {
    if series.is_empty() || series.iter().all(|(_, pts)| pts.is_empty()) {
        return Err(Error::InvalidArgument("no coverage series".into()));
    }
    let t_max = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.0))
        .fold(1.0f64, f64::max);
    let (w, h, ml, mb) = (640.0, 360.0, 56.0, 40.0);
    let plot_w = w - ml - 16.0;
    let plot_h = h - mb - 16.0;
    let px = |t: f64| ml + t / t_max * plot_w;
    let py = |c: f64| 16.0 + (1.0 - c) * plot_h;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="0" y="0" width="100%" height="100%" fill="white"/>"#
    )
    .unwrap();
    // axes
    writeln!(
        out,
        r#"<line x1="{ml:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        16.0 + plot_h,
        ml + plot_w,
        16.0 + plot_h
    )
    .unwrap();
    writeln!(
        out,
        r#"<line x1="{ml:.1}" y1="16.0" x2="{ml:.1}" y2="{:.1}" stroke="black"/>"#,
        16.0 + plot_h
    )
    .unwrap();
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="10" text-anchor="end">{:.2}</text>"#,
            ml - 4.0,
            py(frac) + 3.0,
            frac
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="10" text-anchor="middle">{:.0}</text>"#,
            px(frac * t_max),
            16.0 + plot_h + 14.0,
            frac * t_max
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="11" text-anchor="middle">time (s)</text>"#,
        ml + plot_w / 2.0,
        16.0 + plot_h + 30.0
    )
    .unwrap();
    for (i, (label, pts)) in series.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|(t, c)| format!("{:.1},{:.1}", px(*t), py(*c)))
            .collect();
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.8"/>"#,
            path.join(" "),
            color
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="11" fill="{}">{}</text>"#,
            ml + plot_w - 140.0,
            30.0 + i as f64 * 14.0,
            color,
            label
        )
        .unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

fn parse_trajectory_csv(text: &str) -> Vec<TrajectorySample> {
    text.lines()
        .skip(1)
        .filter_map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return None;
            }
            Some(TrajectorySample {
                t: f[0].parse().ok()?,
                x: f[1].parse().ok()?,
                y: f[2].parse().ok()?,
                theta: f[3].parse().ok()?,
                v: f[4].parse().ok()?,
                omega: f[5].parse().ok()?,
                coverage: f[6].parse().ok()?,
            })
        })
        .collect()
}

/// Render the plot set for a finished suite directory: one trajectory
/// SVG per episode and one coverage SVG per map (series: each strategy's
/// lowest-seed trial). Returns the written paths.
pub fn emit_plots(dir: &Path) -> Result<Vec<PathBuf>> {
    let manifest_path = dir.join("maps.txt");
    let manifest = std::fs::read_to_string(&manifest_path)
        .map_err(|e| Error::io(format!("reading {}", manifest_path.display()), e))?;
    let mut worlds: BTreeMap<String, OccupancyGrid> = BTreeMap::new();
    for line in manifest.lines() {
        if let Some((name, path)) = line.split_once('\t') {
            worlds.insert(name.to_string(), OccupancyGrid::load_map(Path::new(path))?);
        }
    }
    let traj_dir = dir.join("trajectories");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&traj_dir)
        .map_err(|e| Error::io(format!("reading {}", traj_dir.display()), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no trajectories in {}",
            traj_dir.display()
        )));
    }
    let mut written = Vec::new();
    // map -> strategy -> (seed, coverage curve)
    let mut curves: BTreeMap<String, BTreeMap<String, (u64, Vec<(f64, f64)>)>> = BTreeMap::new();
    for file in &files {
        let stem = file.file_stem().unwrap().to_string_lossy().to_string();
        let parts: Vec<&str> = stem.split("__").collect();
        if parts.len() != 3 {
            continue;
        }
        let (map, strategy) = (parts[0].to_string(), parts[1].to_string());
        let seed: u64 = parts[2].trim_start_matches("seed").parse().unwrap_or(0);
        let text = std::fs::read_to_string(file)
            .map_err(|e| Error::io(format!("reading {}", file.display()), e))?;
        let traj = parse_trajectory_csv(&text);
        let Some(world) = worlds.get(&map) else {
            return Err(Error::InvalidArgument(format!(
                "trajectory {stem} references unknown map {map}"
            )));
        };
        let svg = trajectory_svg(world, &traj, &stem)?;
        let out_path = traj_dir.join(format!("{stem}.svg"));
        std::fs::write(&out_path, svg)
            .map_err(|e| Error::io(format!("writing {}", out_path.display()), e))?;
        written.push(out_path);
        let entry = curves.entry(map).or_default();
        let curve: Vec<(f64, f64)> = traj.iter().map(|s| (s.t, s.coverage)).collect();
        match entry.get(&strategy) {
            Some((best_seed, _)) if *best_seed <= seed => {}
            _ => {
                entry.insert(strategy, (seed, curve));
            }
        }
    }
    for (map, by_strategy) in &curves {
        let series: Vec<(String, Vec<(f64, f64)>)> = by_strategy
            .iter()
            .map(|(s, (_, curve))| (s.clone(), curve.clone()))
            .collect();
        let svg = coverage_svg(&series)?;
        let out_path = dir.join(format!("coverage_{map}.svg"));
        std::fs::write(&out_path, svg)
            .map_err(|e| Error::io(format!("writing {}", out_path.display()), e))?;
        written.push(out_path);
    }
    Ok(written)
}
