//! Flat `key = value` experiment configuration.
//!
//! Every key carries its unit as a suffix. Unknown keys are errors, repeated
//! keys take the last value, and `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use crate::channel::{db_to_linear, ChannelParams};
use crate::error::{Error, Result};
use crate::geometry::PolarPoint;
use crate::mobility::{MobilityParams, PauseModel};
use crate::powerctl::Deployment;
use crate::sim::{Policy, ScenarioConfig, TrafficParams};

/// A config value type: parsed from and rendered to the text form.
trait Value: Sized {
    fn parse(raw: &str) -> std::result::Result<Self, String>;
    fn render(&self) -> String;
}

impl Value for f64 {
    fn parse(raw: &str) -> std::result::Result<Self, String> {
        let v: f64 = raw.parse().map_err(|_| format!("expected a number, got {raw:?}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("expected a finite number, got {raw:?}"))
        }
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Value for u64 {
    fn parse(raw: &str) -> std::result::Result<Self, String> {
        raw.parse().map_err(|_| format!("expected a non-negative integer, got {raw:?}"))
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Value for bool {
    fn parse(raw: &str) -> std::result::Result<Self, String> {
        match raw.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(format!("expected true or false, got {raw:?}")),
        }
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Value for Vec<f64> {
    fn parse(raw: &str) -> std::result::Result<Self, String> {
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(<f64 as Value>::parse)
            .collect()
    }
    fn render(&self) -> String {
        self.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
    }
}

impl Value for PauseModel {
    fn parse(raw: &str) -> std::result::Result<Self, String> {
        match raw {
            "exponential" => Ok(PauseModel::Exponential),
            "constant" => Ok(PauseModel::Constant),
            _ => Err(format!("expected exponential or constant, got {raw:?}")),
        }
    }
    fn render(&self) -> String {
        match self {
            PauseModel::Exponential => "exponential".into(),
            PauseModel::Constant => "constant".into(),
        }
    }
}

/// Policy selector of the `run` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Optimal,
    Fixed,
}

impl Value for PolicyKind {
    fn parse(raw: &str) -> std::result::Result<Self, String> {
        match raw {
            "optimal" => Ok(PolicyKind::Optimal),
            "fixed" => Ok(PolicyKind::Fixed),
            _ => Err(format!("expected optimal or fixed, got {raw:?}")),
        }
    }
    fn render(&self) -> String {
        match self {
            PolicyKind::Optimal => "optimal".into(),
            PolicyKind::Fixed => "fixed".into(),
        }
    }
}

macro_rules! config_keys {
    ($($(#[$doc:meta])* $key:ident : $ty:ty = $default:expr,)*) => {
        /// Resolved experiment configuration. Field names are the config keys.
        #[derive(Debug, Clone, PartialEq)]
        pub struct Config {
            $($(#[$doc])* pub $key: $ty,)*
        }

        impl Default for Config {
            fn default() -> Self {
                Self { $($key: $default,)* }
            }
        }

        impl Config {
            /// All keys in their canonical order.
            pub const KEYS: &'static [&'static str] = &[$(stringify!($key)),*];

            /// Sets one key from its text value.
            pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
                let raw = raw.trim();
                match key.trim() {
                    $(stringify!($key) => {
                        self.$key = <$ty as Value>::parse(raw)
                            .map_err(|e| Error::Config(format!("{}: {e}", stringify!($key))))?;
                    })*
                    other => return Err(Error::Config(format!("unknown key {other:?}"))),
                }
                Ok(())
            }

            /// `(key, rendered value)` for every key, in canonical order.
            pub fn entries(&self) -> Vec<(&'static str, String)> {
                vec![$((stringify!($key), Value::render(&self.$key)),)*]
            }
        }
    };
}

config_keys! {
    p_bs_kw: f64 = 100.0,
    p_min_w: f64 = 1.0,
    p_max_w: f64 = 100.0,
    pr_r_km: f64 = 50.0,
    pr_phi_deg: f64 = 0.0,
    ctx_r_km: f64 = 50.0,
    ctx_phi_deg: f64 = 60.0,
    crx_r_km: f64 = 50.0,
    crx_phi_deg: f64 = 60.0,
    tau_p_db: f64 = 30.0,
    tau_c_db: f64 = 3.0,
    alpha_p: f64 = 3.0,
    alpha_c: f64 = 3.0,
    gain_t: f64 = 1.0,
    gain_r: f64 = 1.0,
    h_t_m: f64 = 1.0,
    h_r_m: f64 = 1.0,
    d0_m: f64 = 1.0,
    shadowing: bool = false,
    sigma_db: f64 = 0.0,
    plan_margin_db: f64 = 0.0,
    speed_mps: f64 = 30.0,
    speed_jitter: f64 = 0.0,
    epoch_max_s: f64 = 30.0,
    pause_mean_s: f64 = 5.0,
    pause_model: PauseModel = PauseModel::Exponential,
    arrival_rate_pps: f64 = 10.0,
    mean_length_bytes: f64 = 100.0,
    update_period_s: f64 = 1.0,
    sim_time_s: f64 = 1000.0,
    predict_motion: bool = false,
    policy: PolicyKind = PolicyKind::Optimal,
    p_fixed_w: f64 = 60.0,
    seed: u64 = 1,
    seeds: u64 = 20,
    r2_min_km: f64 = 40.0,
    r2_max_km: f64 = 60.0,
    r2_step_km: f64 = 0.1,
    theta_min_deg: f64 = 0.0,
    theta_max_deg: f64 = 180.0,
    theta_step_deg: f64 = 1.0,
    p_grid_min_w: f64 = 1.0,
    p_grid_max_w: f64 = 100.0,
    p_grid_step_w: f64 = 1.0,
    slice_theta_deg: f64 = 60.0,
    sweep_r2_km: Vec<f64> = vec![47.0, 50.0, 54.0],
    sweep_theta_deg: f64 = 60.0,
    speeds_mps: Vec<f64> = vec![10.0, 20.0, 30.0, 40.0],
    fixed_powers_w: Vec<f64> = (1..=10).map(|k| 10.0 * k as f64).collect(),
    shadow_alpha_p: f64 = 3.0,
    shadow_alpha_c: f64 = 4.0,
    shadow_sigma_db: f64 = 6.0,
    shadow_speeds_mps: Vec<f64> = vec![30.0],
    shadow_fixed_powers_w: Vec<f64> = vec![10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0, 110.0, 120.0, 150.0],
    trajectory_step_s: f64 = 1.0,
}

impl Config {
    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got {line:?}", idx + 1))
            })?;
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", idx + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
        self.set(key, value)
    }

    /// The resolved configuration as `# key=value` lines.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.entries() {
            let _ = writeln!(out, "# {key}={value}");
        }
        out
    }

    fn channel(&self, alpha_p: f64, alpha_c: f64, sigma_db: f64) -> ChannelParams {
        ChannelParams {
            alpha_p,
            alpha_c,
            g_t: self.gain_t,
            g_r: self.gain_r,
            h_t: self.h_t_m,
            h_r: self.h_r_m,
            sigma_db,
            d0: self.d0_m,
        }
    }

    fn deployment_with(&self, channel: ChannelParams) -> Deployment {
        Deployment {
            p_bs: self.p_bs_kw * 1e3,
            pr_rx: PolarPoint::from_degrees(self.pr_r_km * 1e3, self.pr_phi_deg),
            tau_p: db_to_linear(self.tau_p_db),
            tau_c: db_to_linear(self.tau_c_db),
            p_min: self.p_min_w,
            p_max: self.p_max_w,
            channel,
            plan_margin_db: self.plan_margin_db,
        }
    }

    /// The main scene, with `alpha_p`, `alpha_c` and `sigma_db`.
    pub fn deployment(&self) -> Deployment {
        self.deployment_with(self.channel(self.alpha_p, self.alpha_c, self.sigma_db))
    }

    /// The scene of the shadowing experiment, with the `shadow_*` channel keys.
    pub fn shadow_deployment(&self) -> Deployment {
        self.deployment_with(self.channel(self.shadow_alpha_p, self.shadow_alpha_c, self.shadow_sigma_db))
    }

    pub fn ctx_pos(&self) -> PolarPoint {
        PolarPoint::from_degrees(self.ctx_r_km * 1e3, self.ctx_phi_deg)
    }

    pub fn mobility(&self, speed_mps: f64) -> MobilityParams {
        MobilityParams {
            mean_speed: speed_mps,
            speed_jitter: self.speed_jitter,
            epoch_max: self.epoch_max_s,
            pause_mean: self.pause_mean_s,
            pause_model: self.pause_model,
            start: PolarPoint::from_degrees(self.crx_r_km * 1e3, self.crx_phi_deg),
        }
    }

    /// One scenario of a sweep.
    pub fn scenario(
        &self,
        deployment: Deployment,
        shadowing: bool,
        policy: Policy,
        speed_mps: f64,
        seed: u64,
    ) -> ScenarioConfig {
        ScenarioConfig {
            deployment,
            ctx_pos: self.ctx_pos(),
            mobility: self.mobility(speed_mps),
            traffic: TrafficParams {
                arrival_rate: self.arrival_rate_pps,
                mean_length: self.mean_length_bytes,
            },
            policy,
            update_period: self.update_period_s,
            shadowing_enabled: shadowing,
            predict_motion: self.predict_motion,
            sim_time: self.sim_time_s,
            seed,
        }
    }

    /// The single scenario described by the `run` keys.
    pub fn single_scenario(&self) -> ScenarioConfig {
        let policy = match self.policy {
            PolicyKind::Optimal => Policy::OptimalControl,
            PolicyKind::Fixed => Policy::FixedPower(self.p_fixed_w),
        };
        self.scenario(self.deployment(), self.shadowing, policy, self.speed_mps, self.seed)
    }

    /// Seeds of a sweep: `seed, seed + 1, ...`, `seeds` of them.
    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds).map(|k| self.seed.wrapping_add(k)).collect()
    }

    pub fn r2_grid_km(&self) -> Vec<f64> {
        grid(self.r2_min_km, self.r2_max_km, self.r2_step_km)
    }

    pub fn theta_grid_deg(&self) -> Vec<f64> {
        grid(self.theta_min_deg, self.theta_max_deg, self.theta_step_deg)
    }

    pub fn power_grid_w(&self) -> Vec<f64> {
        grid(self.p_grid_min_w, self.p_grid_max_w, self.p_grid_step_w)
    }

    /// Checks everything the subcommands rely on.
    pub fn validate(&self) -> Result<()> {
        self.single_scenario().validate()?;
        self.scenario(self.shadow_deployment(), true, Policy::OptimalControl, self.speed_mps, self.seed)
            .validate()?;
        for (name, lo, hi, step) in [
            ("r2", self.r2_min_km, self.r2_max_km, self.r2_step_km),
            ("theta", self.theta_min_deg, self.theta_max_deg, self.theta_step_deg),
            ("p_grid", self.p_grid_min_w, self.p_grid_max_w, self.p_grid_step_w),
        ] {
            if step <= 0.0 || lo > hi {
                return Err(Error::Config(format!(
                    "{name} grid needs min <= max and a positive step"
                )));
            }
        }
        if self.r2_min_km <= 0.0 || self.p_grid_min_w <= 0.0 {
            return Err(Error::Config("r2 and power grids must start above zero".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be at least 1".into()));
        }
        if self.trajectory_step_s <= 0.0 {
            return Err(Error::Config("trajectory_step_s must be positive".into()));
        }
        let lists = [
            ("sweep_r2_km", &self.sweep_r2_km),
            ("fixed_powers_w", &self.fixed_powers_w),
            ("shadow_fixed_powers_w", &self.shadow_fixed_powers_w),
        ];
        for (name, list) in lists {
            if list.iter().any(|&v| v <= 0.0) {
                return Err(Error::Config(format!("{name} entries must be positive")));
            }
        }
        for (name, list) in [("speeds_mps", &self.speeds_mps), ("shadow_speeds_mps", &self.shadow_speeds_mps)] {
            if list.iter().any(|&v| v < 0.0) {
                return Err(Error::Config(format!("{name} entries must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Inclusive grid `min, min + step, ..., ≤ max`, snapped to 1e-9 so that
/// the printed values stay short.
pub fn grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    let n = ((max - min) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| ((min + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_standard_scene() {
        let cfg = Config::default();
        assert_eq!(cfg.deployment(), Deployment::default());
        assert_eq!(cfg.mobility(30.0), MobilityParams::default());
        let sc = cfg.single_scenario();
        assert_eq!(sc.update_period, 1.0);
        assert_eq!(sc.sim_time, 1000.0);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn parse_comments_and_overrides() {
        let cfg = Config::parse(
            "# scene\n p_max_w = 80  # lower cap\n\nspeeds_mps = 5, 15\nshadowing=yes\n",
        )
        .unwrap();
        assert_eq!(cfg.p_max_w, 80.0);
        assert_eq!(cfg.speeds_mps, vec![5.0, 15.0]);
        assert!(cfg.shadowing);
        let mut cfg = cfg;
        cfg.apply_override("seed=9").unwrap();
        assert_eq!(cfg.seed_list()[..2], [9, 10]);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = Config::parse("p_max_w = 100\nbogus = 1\n").unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("bogus"), "{err}");
        assert!(Config::parse("p_max_w 100").is_err());
        assert!(Config::parse("p_max_w = abc").is_err());
        assert!(Config::parse("p_max_w = inf").is_err());
        assert!(Config::default().apply_override("policy").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = Config::default();
        cfg.set("sweep_r2_km", "46.5,51").unwrap();
        cfg.set("pause_model", "constant").unwrap();
        let text: String = cfg
            .echo()
            .lines()
            .map(|l| format!("{}\n", l.trim_start_matches("# ")))
            .collect();
        assert_eq!(Config::parse(&text).unwrap(), cfg);
        assert_eq!(cfg.entries().len(), Config::KEYS.len());
    }

    #[test]
    fn grids_are_inclusive_and_clean() {
        let cfg = Config::default();
        let r2 = cfg.r2_grid_km();
        assert_eq!(r2.len(), 201);
        assert_eq!(r2[3], 40.3);
        assert_eq!(*r2.last().unwrap(), 60.0);
        assert_eq!(cfg.theta_grid_deg().len(), 181);
        assert_eq!(cfg.power_grid_w().len(), 100);
        assert_eq!(grid(1.0, 1.0, 0.5), vec![1.0]);
    }

    #[test]
    fn validation_rejects_bad_values() {
        let base = Config::default;
        assert!(Config { r2_step_km: 0.0, ..base() }.validate().is_err());
        assert!(Config { alpha_p: 4.0, ..base() }.validate().is_err());
        assert!(Config { seeds: 0, ..base() }.validate().is_err());
        assert!(Config { p_min_w: 200.0, ..base() }.validate().is_err());
    }
}
