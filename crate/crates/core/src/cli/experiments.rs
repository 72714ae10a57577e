//! Experiment drivers. Each builds one or two [`Table`]s; rows come out in a
//! fixed order that depends only on the configuration.

use std::io::Write;

use rayon::prelude::*;

use super::config::Config;
use crate::error::Result;
use crate::geometry::{separation, PolarPoint};
use crate::powerctl::{
    classify, concurrent_radius, f_extreme, g_extreme, max_range, optimal_power_unclamped,
    receiver_separation, Deployment, Feasibility,
};
use crate::sim::{run_many, Policy, ScenarioConfig, SimMetrics, Summary};

/// A CSV body: header plus string rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    /// Writes the header and rows as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

const SURFACE_HEADER: &[&str] = &[
    "r2_km",
    "theta_deg",
    "d_pc_m",
    "f_m",
    "g_m",
    "p_unclamped_w",
    "p_opt_w",
    "feasibility",
];

fn surface_cells(r2_km: f64, theta_deg: f64, dep: &Deployment) -> Vec<String> {
    let r2 = r2_km * 1e3;
    let theta = theta_deg.to_radians();
    let (class, p_opt) = classify(r2, theta, dep);
    let unclamped = (class != Feasibility::Forbidden).then(|| optimal_power_unclamped(r2, theta, dep));
    vec![
        num(r2_km),
        num(theta_deg),
        num(receiver_separation(r2, theta, dep)),
        num(f_extreme(r2, theta, dep)),
        num(g_extreme(r2, theta, dep)),
        opt_num(unclamped),
        opt_num(p_opt),
        class.to_string(),
    ]
}

/// Optimal power over the `(r2, θ_pc)` grid.
pub fn surface(cfg: &Config) -> Table {
    let dep = cfg.deployment();
    let thetas = cfg.theta_grid_deg();
    let mut table = Table::new(SURFACE_HEADER);
    table.rows = cfg
        .r2_grid_km()
        .par_iter()
        .flat_map_iter(|&r2| thetas.iter().map(move |&th| surface_cells(r2, th, &dep)))
        .collect();
    table
}

/// The `slice_theta_deg` column of [`surface`], plus reachability of a CRx
/// placed at `(r2, φ_pr + θ)` from the configured CTx.
pub fn slice(cfg: &Config) -> Table {
    let dep = cfg.deployment();
    let ctx = cfg.ctx_pos();
    let theta_deg = cfg.slice_theta_deg;
    let mut header = SURFACE_HEADER.to_vec();
    header.extend(["r_max_m", "d22_m", "reachable"]);
    let mut table = Table::new(&header);
    for r2_km in cfg.r2_grid_km() {
        let r2 = r2_km * 1e3;
        let crx = PolarPoint::new(r2, dep.pr_rx.phi() + theta_deg.to_radians());
        let r_max = max_range(r2, &dep);
        let d22 = separation(ctx, crx);
        let mut row = surface_cells(r2_km, theta_deg, &dep);
        row.extend([num(r_max), num(d22), (d22 <= r_max).to_string()]);
        table.rows.push(row);
    }
    table
}

/// Concurrent radius against CTx power for each `sweep_r2_km`.
pub fn radius_sweep(cfg: &Config) -> Table {
    let dep = cfg.deployment();
    let theta_deg = cfg.sweep_theta_deg;
    let theta = theta_deg.to_radians();
    let mut table = Table::new(&["r2_km", "theta_deg", "p_w", "r_ct_m"]);
    for &r2_km in &cfg.sweep_r2_km {
        for p in cfg.power_grid_w() {
            let r_ct = concurrent_radius(p, r2_km * 1e3, theta, &dep);
            table.rows.push(vec![num(r2_km), num(theta_deg), num(p), num(r_ct)]);
        }
    }
    table
}

const RUN_HEADER: &[&str] = &[
    "policy",
    "p_fixed_w",
    "speed_mps",
    "seed",
    "sigma_db",
    "packets_sent",
    "packets_delivered",
    "pdr",
    "pr_violations",
    "silent_fraction",
    "mean_r_ct_m",
];

const SUMMARY_HEADER: &[&str] = &[
    "policy",
    "p_fixed_w",
    "speed_mps",
    "sigma_db",
    "runs",
    "mean_pdr",
    "stderr_pdr",
    "mean_pr_violations",
    "mean_silent_fraction",
];

/// Per-run record of one finished scenario.
pub fn run_record(sc: &ScenarioConfig, m: &SimMetrics) -> Vec<String> {
    let sigma = if sc.shadowing_enabled {
        sc.deployment.channel.sigma_db
    } else {
        0.0
    };
    vec![
        sc.policy.name().to_string(),
        opt_num(sc.policy.fixed_power()),
        num(sc.mobility.mean_speed),
        sc.seed.to_string(),
        num(sigma),
        m.packets_sent.to_string(),
        m.packets_delivered.to_string(),
        num(m.pdr),
        m.pr_violations.to_string(),
        num(m.silent_fraction),
        num(m.mean_r_ct),
    ]
}

/// Per-run rows and seed-aggregated summary of a PDR sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PdrReport {
    pub runs: Table,
    pub summary: Table,
}

/// One sweep: optimal first, then each fixed power, at every speed and seed.
fn sweep_cells(
    cfg: &Config,
    dep: Deployment,
    shadowing: bool,
    speeds: &[f64],
    powers: &[f64],
) -> Vec<Vec<ScenarioConfig>> {
    let policies: Vec<Policy> = std::iter::once(Policy::OptimalControl)
        .chain(powers.iter().map(|&p| Policy::FixedPower(p)))
        .collect();
    let mut cells = Vec::new();
    for &policy in &policies {
        for &speed in speeds {
            cells.push(
                cfg.seed_list()
                    .into_iter()
                    .map(|seed| cfg.scenario(dep, shadowing, policy, speed, seed))
                    .collect(),
            );
        }
    }
    cells
}

fn run_cells(cells: Vec<Vec<ScenarioConfig>>) -> Result<PdrReport> {
    let flat: Vec<ScenarioConfig> = cells.iter().flatten().copied().collect();
    let metrics = run_many(&flat)?;
    let mut runs = Table::new(RUN_HEADER);
    let mut summary = Table::new(SUMMARY_HEADER);
    let mut offset = 0;
    for cell in &cells {
        let chunk = &metrics[offset..offset + cell.len()];
        offset += cell.len();
        for (sc, m) in cell.iter().zip(chunk) {
            runs.rows.push(run_record(sc, m));
        }
        let s = Summary::of(chunk);
        let head = &run_record(&cell[0], &chunk[0]);
        summary.rows.push(vec![
            head[0].clone(),
            head[1].clone(),
            head[2].clone(),
            head[4].clone(),
            s.runs.to_string(),
            num(s.mean_pdr),
            num(s.stderr_pdr),
            num(s.mean_pr_violations),
            num(s.mean_silent_fraction),
        ]);
    }
    Ok(PdrReport { runs, summary })
}

/// PDR of optimal control and every fixed power at every speed, no shadowing.
pub fn pdr(cfg: &Config) -> Result<PdrReport> {
    let mut dep = cfg.deployment();
    dep.channel.sigma_db = 0.0;
    run_cells(sweep_cells(cfg, dep, false, &cfg.speeds_mps, &cfg.fixed_powers_w))
}

/// PDR under shadowing with the `shadow_*` channel, followed by the matching
/// unshadowed sweep of the main scene (`sigma_db` column 0).
pub fn pdr_shadow(cfg: &Config) -> Result<PdrReport> {
    let speeds = &cfg.shadow_speeds_mps;
    let powers = &cfg.shadow_fixed_powers_w;
    let mut cells = sweep_cells(cfg, cfg.shadow_deployment(), true, speeds, powers);
    let mut baseline = cfg.deployment();
    baseline.channel.sigma_db = 0.0;
    cells.extend(sweep_cells(cfg, baseline, false, speeds, powers));
    run_cells(cells)
}

/// The single scenario described by the `run` keys.
pub fn single_run(cfg: &Config) -> Result<Table> {
    let sc = cfg.single_scenario();
    let metrics = crate::sim::run_scenario(&sc)?;
    let mut table = Table::new(RUN_HEADER);
    table.rows.push(run_record(&sc, &metrics));
    Ok(table)
}
