//! Event-driven packet-delivery simulation of one CR link.
//!
//! Three event streams drive a run: periodic location updates (the only
//! moments the controller learns where the CRx is), mobility segment
//! boundaries, and Poisson packet arrivals. Each arrival asks the policy for
//! a power based on the last reported position and then checks delivery
//! against the true instantaneous position.
//!
//! Every scenario draws mobility, traffic and shadowing from separate ChaCha
//! streams derived from its seed, so two policies run with the same seed see
//! the same trajectory, the same packets and the same fades.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::channel::{
    linear_to_db, sample_shadowing, sir_cr, sir_cr_db, sir_primary, sir_primary_db,
};
use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{relative_angle, separation, PolarPoint};
use crate::mobility::{
    generate_trajectory, predict_position, MobilityParams, MotionSegment, Trajectory,
};
use crate::powerctl::{concurrent_radius, decide_mobile, decodable_radius, DecisionCache, Deployment};

const STREAM_MOBILITY: u64 = 1;
const STREAM_TRAFFIC: u64 = 2;
const STREAM_SHADOWING: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficParams {
    /// Packets per second.
    pub arrival_rate: f64,
    /// Mean packet length, bytes.
    pub mean_length: f64,
}

impl Default for TrafficParams {
    fn default() -> Self {
        Self {
            arrival_rate: 10.0,
            mean_length: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    pub t: f64,
    /// Exponentially distributed; recorded but not used for delivery.
    pub length_bytes: f64,
}

/// Poisson arrivals on `[0, horizon)`.
pub fn generate_arrivals<R: Rng + ?Sized>(
    traffic: &TrafficParams,
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<Packet>> {
    let rate = ensure_positive("arrival rate", traffic.arrival_rate)
        .map_err(|e| Error::Config(e.to_string()))?;
    let mean = ensure_positive("mean packet length", traffic.mean_length)
        .map_err(|e| Error::Config(e.to_string()))?;
    let gaps = Exp::new(rate).expect("positive rate");
    let lengths = Exp::new(1.0 / mean).expect("positive rate");
    let mut packets = Vec::with_capacity((rate * horizon * 1.1) as usize + 1);
    let mut t = gaps.sample(rng);
    while t < horizon {
        packets.push(Packet {
            t,
            length_bytes: lengths.sample(rng),
        });
        t += gaps.sample(rng);
    }
    Ok(packets)
}

/// How the CTx picks its transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Always this power, whenever the last reported CRx is within its decodable radius.
    FixedPower(f64),
    /// The mobile control ladder.
    OptimalControl,
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::FixedPower(_) => "fixed",
            Policy::OptimalControl => "optimal",
        }
    }

    pub fn fixed_power(&self) -> Option<f64> {
        match *self {
            Policy::FixedPower(p) => Some(p),
            Policy::OptimalControl => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub deployment: Deployment,
    pub ctx_pos: PolarPoint,
    pub mobility: MobilityParams,
    pub traffic: TrafficParams,
    pub policy: Policy,
    /// Seconds between CRx location reports.
    pub update_period: f64,
    /// Draw per-packet shadowing in the ground truth.
    pub shadowing_enabled: bool,
    /// Extrapolate the last report along its reported velocity instead of
    /// holding the reported position.
    pub predict_motion: bool,
    pub sim_time: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            deployment: Deployment::default(),
            ctx_pos: PolarPoint::from_degrees(50_000.0, 60.0),
            mobility: MobilityParams::default(),
            traffic: TrafficParams::default(),
            policy: Policy::OptimalControl,
            update_period: 1.0,
            shadowing_enabled: false,
            predict_motion: false,
            sim_time: 1000.0,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.deployment.validate()?;
        self.mobility.validate()?;
        for (what, v) in [
            ("update_period", self.update_period),
            ("sim_time", self.sim_time),
            ("arrival_rate", self.traffic.arrival_rate),
            ("mean_length", self.traffic.mean_length),
        ] {
            ensure_positive(what, v).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Policy::FixedPower(p) = self.policy {
            ensure_positive("fixed power", p).map_err(|e| Error::Config(e.to_string()))?;
        }
        let ch = &self.deployment.channel;
        if ch.alpha_p > ch.alpha_c {
            return Err(Error::Config(format!(
                "alpha_p ({}) must not exceed alpha_c ({})",
                ch.alpha_p, ch.alpha_c
            )));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Per-run counters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimMetrics {
    /// Every arrival, including those the policy kept silent.
    pub packets_sent: u64,
    pub packets_delivered: u64,
    pub pdr: f64,
    pub pr_violations: u64,
    pub silent_fraction: f64,
    /// Mean concurrent-region radius over transmitted packets, meters.
    pub mean_r_ct: f64,
}

/// Net shadowing on the two links for one packet, dB.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShadowDraws {
    /// TV link at the TV receiver.
    pub primary_db: f64,
    /// CR link at the CR receiver.
    pub cognitive_db: f64,
}

impl ShadowDraws {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, sigma_db: f64) -> Self {
        let primary_db = sample_shadowing(rng, sigma_db);
        let cognitive_db = sample_shadowing(rng, sigma_db);
        Self {
            primary_db,
            cognitive_db,
        }
    }
}

/// Ground-truth outcome of one transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    /// `SIR_c > τ_c` at the true CRx position.
    pub decoded: bool,
    /// `SIR_p ≤ τ_p` at the TV receiver.
    pub pr_violation: bool,
}

impl Delivery {
    /// A packet counts as delivered only if it decodes without breaking PR protection.
    pub fn delivered(&self) -> bool {
        self.decoded && !self.pr_violation
    }
}

/// Checks both SIR constraints for a transmission at `p_ct` to `true_crx`.
///
/// Without shadowing the linear two-ray SIRs are used; with shadowing the dB
/// SIRs with `draws` applied.
pub fn evaluate_delivery(
    true_crx: PolarPoint,
    p_ct: f64,
    draws: ShadowDraws,
    config: &ScenarioConfig,
) -> Delivery {
    let dep = &config.deployment;
    let ch = &dep.channel;
    let r1 = dep.r1();
    let r2 = true_crx.r();
    let d12 = separation(config.ctx_pos, dep.pr_rx);
    let d22 = separation(config.ctx_pos, true_crx);

    // degenerate geometry: a co-located receiver has unbounded SIR, a
    // receiver at the base station has none
    let sir_c_ok = if d22 == 0.0 {
        true
    } else if r2 == 0.0 {
        false
    } else if config.shadowing_enabled {
        let sir = sir_cr_db(linear_to_db(p_ct), dep.p_bs_dbw(), d22, r2, draws.cognitive_db, ch)
            .expect("positive distances");
        sir > dep.tau_c_db()
    } else {
        sir_cr(p_ct, dep.p_bs, d22, r2, ch).expect("positive inputs") > dep.tau_c
    };

    let sir_p_ok = if d12 == 0.0 {
        false
    } else if config.shadowing_enabled {
        let sir = sir_primary_db(dep.p_bs_dbw(), linear_to_db(p_ct), d12, r1, draws.primary_db, ch)
            .expect("positive distances");
        sir > dep.tau_p_db()
    } else {
        sir_primary(dep.p_bs, p_ct, d12, r1, ch).expect("positive inputs") > dep.tau_p
    };

    Delivery {
        decoded: sir_c_ok,
        pr_violation: !sir_p_ok,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    // declaration order is the tie-break order at equal timestamps
    LocationUpdate,
    SegmentBoundary(usize),
    Arrival(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    t: f64,
    kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap pops the maximum
        other
            .t
            .total_cmp(&self.t)
            .then_with(|| other.kind.cmp(&self.kind))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Tally {
    sent: u64,
    delivered: u64,
    violations: u64,
    silent: u64,
    r_ct_sum: f64,
}

/// The CRx trajectory a scenario runs on.
pub fn scenario_trajectory(config: &ScenarioConfig) -> Result<Trajectory> {
    generate_trajectory(&config.mobility, config.sim_time, &mut config.rng(STREAM_MOBILITY))
}

/// Runs one scenario to completion.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SimMetrics> {
    config.validate()?;
    let dep = &config.deployment;
    let trajectory = scenario_trajectory(config)?;
    let packets = generate_arrivals(&config.traffic, config.sim_time, &mut config.rng(STREAM_TRAFFIC))?;
    let mut shadow_rng = config.rng(STREAM_SHADOWING);

    let segments = trajectory.segments();
    let mut queue = BinaryHeap::with_capacity(packets.len() + segments.len() + 16);
    let n_updates = (config.sim_time / config.update_period).floor() as u64;
    for k in 0..=n_updates {
        queue.push(Event {
            t: k as f64 * config.update_period,
            kind: EventKind::LocationUpdate,
        });
    }
    for (i, seg) in segments.iter().enumerate().skip(1) {
        queue.push(Event {
            t: seg.t_start,
            kind: EventKind::SegmentBoundary(i),
        });
    }
    for (i, pkt) in packets.iter().enumerate() {
        queue.push(Event {
            t: pkt.t,
            kind: EventKind::Arrival(i),
        });
    }

    let mut current = 0usize;
    let mut report: Option<MotionSegment> = None;
    let mut cache = DecisionCache::new();
    let mut tally = Tally {
        sent: 0,
        delivered: 0,
        violations: 0,
        silent: 0,
        r_ct_sum: 0.0,
    };

    while let Some(event) = queue.pop() {
        match event.kind {
            EventKind::LocationUpdate => {
                report = Some(segments[current].rebased(event.t));
            }
            EventKind::SegmentBoundary(i) => current = i,
            EventKind::Arrival(_) => {
                let t = event.t;
                let true_crx = segments[current].cartesian_at(t).to_polar();
                let snapshot = report.expect("an update fires at t = 0");
                let known = if config.predict_motion {
                    predict_position(&snapshot, t - snapshot.t_start)
                } else {
                    snapshot.origin.to_polar()
                };
                let draws = if config.shadowing_enabled {
                    ShadowDraws::sample(&mut shadow_rng, dep.channel.sigma_db)
                } else {
                    ShadowDraws::default()
                };

                tally.sent += 1;
                let choice = match config.policy {
                    Policy::FixedPower(p) => {
                        let d22 = separation(config.ctx_pos, known);
                        if d22 <= decodable_radius(p, known.r(), dep) {
                            let theta = relative_angle(known.phi(), dep.pr_rx.phi());
                            Some((p, concurrent_radius(p, known.r(), theta, dep)))
                        } else {
                            None
                        }
                    }
                    Policy::OptimalControl => {
                        let decision = decide_mobile(&mut cache, config.ctx_pos, known, dep);
                        decision.power().zip(decision.radius())
                    }
                };
                match choice {
                    Some((p_ct, r_ct)) => {
                        let outcome = evaluate_delivery(true_crx, p_ct, draws, config);
                        tally.delivered += u64::from(outcome.delivered());
                        tally.violations += u64::from(outcome.pr_violation);
                        tally.r_ct_sum += r_ct;
                    }
                    None => tally.silent += 1,
                }
            }
        }
    }

    let transmitted = tally.sent - tally.silent;
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(SimMetrics {
        packets_sent: tally.sent,
        packets_delivered: tally.delivered,
        pdr: ratio(tally.delivered, tally.sent),
        pr_violations: tally.violations,
        silent_fraction: ratio(tally.silent, tally.sent),
        mean_r_ct: if transmitted == 0 {
            0.0
        } else {
            tally.r_ct_sum / transmitted as f64
        },
    })
}

/// Runs independent scenarios in parallel; results keep the input order.
pub fn run_many(configs: &[ScenarioConfig]) -> Result<Vec<SimMetrics>> {
    configs.par_iter().map(run_scenario).collect()
}

/// Seed-aggregated statistics of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Summary {
    pub runs: usize,
    pub mean_pdr: f64,
    /// Standard error of the mean PDR.
    pub stderr_pdr: f64,
    pub mean_pr_violations: f64,
    pub mean_silent_fraction: f64,
}

impl Summary {
    pub fn of(runs: &[SimMetrics]) -> Self {
        let n = runs.len();
        if n == 0 {
            return Self::default();
        }
        let nf = n as f64;
        let mean_pdr = runs.iter().map(|m| m.pdr).sum::<f64>() / nf;
        let stderr_pdr = if n > 1 {
            let var = runs.iter().map(|m| (m.pdr - mean_pdr).powi(2)).sum::<f64>() / (nf - 1.0);
            (var / nf).sqrt()
        } else {
            0.0
        };
        Self {
            runs: n,
            mean_pdr,
            stderr_pdr,
            mean_pr_violations: runs.iter().map(|m| m.pr_violations as f64).sum::<f64>() / nf,
            mean_silent_fraction: runs.iter().map(|m| m.silent_fraction).sum::<f64>() / nf,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;
    use crate::powerctl::forbidden_radius;

    fn static_near_ctx() -> ScenarioConfig {
        let ctx = PolarPoint::from_degrees(50_000.0, 60.0);
        let start = ctx.to_cartesian().offset(1_000.0, 210f64.to_radians()).to_polar();
        ScenarioConfig {
            mobility: MobilityParams {
                mean_speed: 0.0,
                start,
                ..Default::default()
            },
            sim_time: 200.0,
            ..Default::default()
        }
    }

    #[test]
    fn arrivals_poisson_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let packets = generate_arrivals(&TrafficParams::default(), 1000.0, &mut rng).unwrap();
        let n = packets.len() as f64;
        assert!((n - 10_000.0).abs() <= 300.0, "{n}");
        assert!(packets.windows(2).all(|w| w[0].t < w[1].t));
        let mean_len = packets.iter().map(|p| p.length_bytes).sum::<f64>() / n;
        assert!((mean_len - 100.0).abs() < 4.0, "{mean_len}");
    }

    #[test]
    fn arrivals_tiny_horizon_and_determinism() {
        let traffic = TrafficParams::default();
        let empty = generate_arrivals(&traffic, 1e-9, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(empty.is_empty());
        let a = generate_arrivals(&traffic, 50.0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = generate_arrivals(&traffic, 50.0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
        assert!(generate_arrivals(&TrafficParams { arrival_rate: 0.0, ..traffic }, 1.0, &mut ChaCha8Rng::seed_from_u64(4)).is_err());
    }

    #[test]
    fn event_order_breaks_ties_update_first() {
        let mut heap = BinaryHeap::new();
        heap.push(Event { t: 1.0, kind: EventKind::Arrival(0) });
        heap.push(Event { t: 1.0, kind: EventKind::SegmentBoundary(1) });
        heap.push(Event { t: 1.0, kind: EventKind::LocationUpdate });
        heap.push(Event { t: 0.5, kind: EventKind::Arrival(1) });
        let order: Vec<EventKind> = std::iter::from_fn(|| heap.pop().map(|e| e.kind)).collect();
        assert_eq!(
            order,
            vec![
                EventKind::Arrival(1),
                EventKind::LocationUpdate,
                EventKind::SegmentBoundary(1),
                EventKind::Arrival(0)
            ]
        );
    }

    #[test]
    fn static_feasible_link_always_delivers() {
        let m = run_scenario(&static_near_ctx()).unwrap();
        assert!(m.packets_sent > 1_000);
        assert_eq!(m.packets_delivered, m.packets_sent);
        assert_eq!(m.pdr, 1.0);
        assert_eq!(m.pr_violations, 0);
        assert_eq!(m.silent_fraction, 0.0);
        assert!(m.mean_r_ct > 3_000.0);
    }

    #[test]
    fn fixed_power_above_protection_threshold_never_delivers() {
        let cfg = ScenarioConfig {
            policy: Policy::FixedPower(120.0),
            ..static_near_ctx()
        };
        let m = run_scenario(&cfg).unwrap();
        assert_eq!(m.pdr, 0.0);
        assert_eq!(m.pr_violations, m.packets_sent);
    }

    #[test]
    fn boundary_distance_is_not_delivered() {
        // power-of-two scene so SIR_c lands exactly on τ_c
        let dep = Deployment {
            p_bs: 1024.0,
            pr_rx: PolarPoint::new(1e6, std::f64::consts::PI),
            tau_p: 0.25,
            tau_c: 2.0,
            p_min: 1.0,
            p_max: 4096.0,
            channel: ChannelParams::equal_exponent(3.0),
            plan_margin_db: 0.0,
        };
        let cfg = ScenarioConfig {
            deployment: dep,
            ctx_pos: PolarPoint::new(16.0, 0.0),
            ..Default::default()
        };
        let crx = PolarPoint::new(8.0, 0.0);
        assert_eq!(separation(cfg.ctx_pos, crx), 8.0);
        let at_edge = evaluate_delivery(crx, 2048.0, ShadowDraws::default(), &cfg);
        assert!(!at_edge.decoded);
        let inside = evaluate_delivery(crx, 2049.0, ShadowDraws::default(), &cfg);
        assert!(inside.decoded && inside.delivered());
    }

    #[test]
    fn silent_packets_count_as_sent() {
        // CRx parked 10 km away: beyond every decodable range
        let ctx = PolarPoint::from_degrees(50_000.0, 60.0);
        let start = ctx.to_cartesian().offset(10_000.0, 150f64.to_radians()).to_polar();
        let cfg = ScenarioConfig {
            mobility: MobilityParams { mean_speed: 0.0, start, ..Default::default() },
            sim_time: 100.0,
            ..Default::default()
        };
        let m = run_scenario(&cfg).unwrap();
        assert!(m.packets_sent > 0);
        assert_eq!(m.silent_fraction, 1.0);
        assert_eq!(m.pdr, 0.0);
        assert_eq!(m.pr_violations, 0);
        assert_eq!(m.mean_r_ct, 0.0);
    }

    #[test]
    fn zero_staleness_never_violates_protection() {
        for seed in 0..5 {
            let cfg = ScenarioConfig {
                update_period: 1e-3,
                sim_time: 300.0,
                seed,
                mobility: MobilityParams { mean_speed: 40.0, ..Default::default() },
                ..Default::default()
            };
            let m = run_scenario(&cfg).unwrap();
            assert_eq!(m.pr_violations, 0);
        }
    }

    #[test]
    fn shadowing_admits_some_deliveries_above_threshold() {
        let dep = Deployment::default();
        let threshold = dep.p_bs / dep.tau_p;
        assert!((forbidden_radius(threshold, &dep) - 50_000.0).abs() < 1e-6);
        let cfg = ScenarioConfig {
            shadowing_enabled: true,
            deployment: Deployment {
                channel: ChannelParams::shadowed(3.0, 3.0, 6.0),
                ..dep
            },
            policy: Policy::FixedPower(1.2 * threshold),
            ..static_near_ctx()
        };
        let m = run_scenario(&cfg).unwrap();
        assert!(m.pdr > 0.0 && m.pdr < 1.0, "{}", m.pdr);
    }

    #[test]
    fn reproducible_for_equal_config() {
        let cfg = ScenarioConfig {
            sim_time: 300.0,
            shadowing_enabled: true,
            deployment: Deployment {
                channel: ChannelParams::shadowed(3.0, 4.0, 6.0),
                ..Deployment::default()
            },
            seed: 12,
            ..Default::default()
        };
        assert_eq!(run_scenario(&cfg).unwrap(), run_scenario(&cfg).unwrap());
    }

    #[test]
    fn rejects_inverted_exponents_and_bad_periods() {
        let mut cfg = ScenarioConfig::default();
        cfg.deployment.channel = ChannelParams::shadowed(4.0, 3.0, 6.0);
        assert!(matches!(run_scenario(&cfg), Err(Error::Config(_))));
        let cfg = ScenarioConfig { update_period: 0.0, ..Default::default() };
        assert!(run_scenario(&cfg).is_err());
        let cfg = ScenarioConfig { policy: Policy::FixedPower(-1.0), ..Default::default() };
        assert!(run_scenario(&cfg).is_err());
    }

    #[test]
    fn prediction_mode_runs() {
        let cfg = ScenarioConfig { predict_motion: true, sim_time: 200.0, ..Default::default() };
        let m = run_scenario(&cfg).unwrap();
        assert!(m.pdr > 0.0);
    }

    #[test]
    fn summary_statistics() {
        let runs: Vec<SimMetrics> = [0.5, 0.7, 0.9]
            .iter()
            .map(|&pdr| SimMetrics { pdr, ..Default::default() })
            .collect();
        let s = Summary::of(&runs);
        assert_eq!(s.runs, 3);
        assert!((s.mean_pdr - 0.7).abs() < 1e-12);
        assert!((s.stderr_pdr - (0.04f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(Summary::of(&[]).runs, 0);
    }
}
