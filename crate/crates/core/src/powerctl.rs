//! Location-aware power control for the CR transmitter (CTx).
//!
//! The CTx must sit inside the *decodable disk* around the CR receiver (CRx)
//! so that `SIR_c > τ_c`, and outside the *forbidden disk* around the TV
//! receiver so that `SIR_p > τ_p`. Both radii grow as `P^(1/α_c)`. The region
//! in which the CTx may be placed is largest when the two disks are tangent,
//! which fixes the optimal power:
//!
//! ```text
//! forbidden(P) + decodable(P, r2) = d_pc
//!   ⇒ P* = (d_pc / (forbidden(1) + decodable(1, r2)))^α_c
//! ```
//!
//! The radii here are written for general exponents, so the same code serves
//! the equal-exponent model and the median (X' = margin) shadowed model.
//! [`optimal_power_shadow`] and [`shadow_thresholds`] are an independent
//! dB-domain route to the same quantities.

use std::fmt;

use crate::channel::{db_to_linear, linear_to_db, ChannelParams};
use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{relative_angle, separation, separation_from, PolarPoint};

/// The static scene: base station, TV receiver, thresholds and CTx power range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deployment {
    /// Base-station transmit power, watts.
    pub p_bs: f64,
    /// TV receiver position.
    pub pr_rx: PolarPoint,
    /// Linear SIR threshold at the TV receiver.
    pub tau_p: f64,
    /// Linear SIR threshold at the CR receiver.
    pub tau_c: f64,
    /// CTx power bounds, watts.
    pub p_min: f64,
    pub p_max: f64,
    pub channel: ChannelParams,
    /// Shadowing value X' (dB) the controller plans against; 0 is the median channel.
    pub plan_margin_db: f64,
}

impl Default for Deployment {
    /// 100 kW base station, TV receiver at (50 km, 0°), 30 dB / 3 dB
    /// thresholds, a 1–100 W CTx and path-loss exponent 3.
    fn default() -> Self {
        Self {
            p_bs: 1e5,
            pr_rx: PolarPoint::from_degrees(50_000.0, 0.0),
            tau_p: db_to_linear(30.0),
            tau_c: db_to_linear(3.0),
            p_min: 1.0,
            p_max: 100.0,
            channel: ChannelParams::equal_exponent(3.0),
            plan_margin_db: 0.0,
        }
    }
}

impl Deployment {
    pub fn tau_p_db(&self) -> f64 {
        linear_to_db(self.tau_p)
    }

    pub fn tau_c_db(&self) -> f64 {
        linear_to_db(self.tau_c)
    }

    pub fn p_bs_dbw(&self) -> f64 {
        linear_to_db(self.p_bs)
    }

    pub fn r1(&self) -> f64 {
        self.pr_rx.r()
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        let checks = [
            ("p_bs", self.p_bs),
            ("tau_p", self.tau_p),
            ("tau_c", self.tau_c),
            ("p_min", self.p_min),
            ("p_max", self.p_max),
            ("TV receiver radius", self.pr_rx.r()),
        ];
        for (what, v) in checks {
            ensure_positive(what, v).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.p_min > self.p_max {
            return Err(Error::Config(format!(
                "p_min ({} W) exceeds p_max ({} W)",
                self.p_min, self.p_max
            )));
        }
        if !self.plan_margin_db.is_finite() {
            return Err(Error::Config("plan margin must be finite".into()));
        }
        Ok(())
    }

    /// `(x/d0)^α_p`, the base-station path gain term at distance `x`.
    fn bs_path(&self, x: f64) -> f64 {
        (x / self.channel.d0).powf(self.channel.alpha_p)
    }

    /// Converts a bracket `[·]` of the radius formulas into meters.
    fn radius_from(&self, bracket: f64) -> f64 {
        self.channel.d0 * bracket.powf(1.0 / self.channel.alpha_c)
    }
}

/// Why the controller declined to transmit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SilentReason {
    /// Even minimum power puts the CTx's concurrent region inside the forbidden disk.
    Forbidden,
    /// The CRx is beyond the CTx's maximum decodable range.
    OutOfRange,
}

impl fmt::Display for SilentReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SilentReason::Forbidden => "forbidden",
            SilentReason::OutOfRange => "out_of_range",
        })
    }
}

/// Outcome of one run of the control ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerDecision {
    Optimal { p_ct: f64, r_ct: f64 },
    MaxPower { p_ct: f64, r_ct: f64 },
    Silent(SilentReason),
}

impl PowerDecision {
    /// Transmit power, or `None` when silent.
    pub fn power(&self) -> Option<f64> {
        match *self {
            PowerDecision::Optimal { p_ct, .. } | PowerDecision::MaxPower { p_ct, .. } => {
                Some(p_ct)
            }
            PowerDecision::Silent(_) => None,
        }
    }

    /// Concurrent-transmission radius, or `None` when silent.
    pub fn radius(&self) -> Option<f64> {
        match *self {
            PowerDecision::Optimal { r_ct, .. } | PowerDecision::MaxPower { r_ct, .. } => {
                Some(r_ct)
            }
            PowerDecision::Silent(_) => None,
        }
    }

    pub fn is_transmit(&self) -> bool {
        !matches!(self, PowerDecision::Silent(_))
    }
}

/// Why no optimal power exists in `[p_min, p_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Infeasible {
    /// `f > 0`: the disks overlap even at minimum power.
    Forbidden { f: f64 },
    /// `g < 0`: the disks stay apart even at maximum power.
    BeyondMax { g: f64 },
}

/// Feasibility class of a `(r2, θ_pc)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Optimal,
    ClampedMax,
    Forbidden,
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feasibility::Optimal => "optimal",
            Feasibility::ClampedMax => "clamped_max",
            Feasibility::Forbidden => "forbidden",
        })
    }
}

/// Radius of the protection disk around the TV receiver for CTx power `p_ct`.
pub fn forbidden_radius(p_ct: f64, dep: &Deployment) -> f64 {
    let margin = db_to_linear(dep.plan_margin_db);
    dep.radius_from(dep.tau_p * p_ct * dep.bs_path(dep.r1()) * margin / dep.p_bs)
}

/// Radius of the disk around a CRx at radius `r2` inside which the CTx
/// achieves `SIR_c > τ_c` at power `p_ct`.
pub fn decodable_radius(p_ct: f64, r2: f64, dep: &Deployment) -> f64 {
    let margin = db_to_linear(-dep.plan_margin_db);
    dep.radius_from(p_ct * dep.bs_path(r2) * margin / (dep.tau_c * dep.p_bs))
}

/// Maximum decodable range of the CTx, i.e. the decodable radius at `p_max`.
pub fn max_range(r2: f64, dep: &Deployment) -> f64 {
    decodable_radius(dep.p_max, r2, dep)
}

/// Distance between the TV receiver and a CRx at `(r2, θ_pc)`.
pub fn receiver_separation(r2: f64, theta_pc: f64, dep: &Deployment) -> f64 {
    separation_from(dep.r1(), r2, theta_pc)
}

fn tangency_residual(p_ct: f64, r2: f64, theta_pc: f64, dep: &Deployment) -> f64 {
    forbidden_radius(p_ct, dep) + decodable_radius(p_ct, r2, dep)
        - receiver_separation(r2, theta_pc, dep)
}

/// Tangency residual at minimum power.
pub fn f_extreme(r2: f64, theta_pc: f64, dep: &Deployment) -> f64 {
    tangency_residual(dep.p_min, r2, theta_pc, dep)
}

/// Tangency residual at maximum power.
pub fn g_extreme(r2: f64, theta_pc: f64, dep: &Deployment) -> f64 {
    tangency_residual(dep.p_max, r2, theta_pc, dep)
}

/// Closed-form tangency power with no range check. Returns 0 when the
/// receivers coincide.
pub fn optimal_power_unclamped(r2: f64, theta_pc: f64, dep: &Deployment) -> f64 {
    let d_pc = receiver_separation(r2, theta_pc, dep);
    let unit_sum = forbidden_radius(1.0, dep) + decodable_radius(1.0, r2, dep);
    (d_pc / unit_sum).powf(dep.channel.alpha_c)
}

/// Optimal CTx power when it lies in `[p_min, p_max]`.
pub fn optimal_power(r2: f64, theta_pc: f64, dep: &Deployment) -> std::result::Result<f64, Infeasible> {
    let f = f_extreme(r2, theta_pc, dep);
    if f > 0.0 {
        return Err(Infeasible::Forbidden { f });
    }
    let g = g_extreme(r2, theta_pc, dep);
    if g < 0.0 {
        return Err(Infeasible::BeyondMax { g });
    }
    // f ≤ 0 ≤ g brackets the root; clamping only absorbs rounding at the ends
    Ok(optimal_power_unclamped(r2, theta_pc, dep).clamp(dep.p_min, dep.p_max))
}

/// Optimal power clamped to the allowed range, with its feasibility class.
/// Forbidden cells carry no power.
pub fn classify(r2: f64, theta_pc: f64, dep: &Deployment) -> (Feasibility, Option<f64>) {
    match optimal_power(r2, theta_pc, dep) {
        Ok(p) => (Feasibility::Optimal, Some(p)),
        Err(Infeasible::BeyondMax { .. }) => (Feasibility::ClampedMax, Some(dep.p_max)),
        Err(Infeasible::Forbidden { .. }) => (Feasibility::Forbidden, None),
    }
}

/// Radius of the largest disk centered at the CRx that guarantees `SIR_c`
/// and stays clear of the forbidden disk.
pub fn concurrent_radius(p_ct: f64, r2: f64, theta_pc: f64, dep: &Deployment) -> f64 {
    let d_pc = receiver_separation(r2, theta_pc, dep);
    let clear = d_pc - forbidden_radius(p_ct, dep);
    decodable_radius(p_ct, r2, dep).min(clear).max(0.0)
}

/// The fixed-receiver control ladder.
///
/// `ctx` is the CR transmitter's position and `crx` the receiver's.
pub fn decide_fixed(ctx: PolarPoint, crx: PolarPoint, dep: &Deployment) -> PowerDecision {
    let r2 = crx.r();
    let theta_pc = relative_angle(crx.phi(), dep.pr_rx.phi());
    let d22 = separation(ctx, crx);
    let f = f_extreme(r2, theta_pc, dep);
    let g = g_extreme(r2, theta_pc, dep);
    let r_max = max_range(r2, dep);

    if f <= 0.0 && g >= 0.0 && d22 <= r_max {
        let p_ct = optimal_power_unclamped(r2, theta_pc, dep).clamp(dep.p_min, dep.p_max);
        PowerDecision::Optimal {
            p_ct,
            r_ct: concurrent_radius(p_ct, r2, theta_pc, dep),
        }
    } else if g < 0.0 && d22 <= r_max {
        PowerDecision::MaxPower {
            p_ct: dep.p_max,
            r_ct: concurrent_radius(dep.p_max, r2, theta_pc, dep),
        }
    } else if f > 0.0 {
        PowerDecision::Silent(SilentReason::Forbidden)
    } else {
        // feasible disks but the CRx is out of reach at any allowed power
        PowerDecision::Silent(SilentReason::OutOfRange)
    }
}

/// Last decision of the mobile controller.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DecisionCache {
    last: Option<PowerDecision>,
}

impl DecisionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last(&self) -> Option<PowerDecision> {
        self.last
    }

    pub fn invalidate(&mut self) {
        self.last = None;
    }
}

/// The mobile-receiver control ladder: keep the cached transmit decision
/// while the CRx stays inside both the cached concurrent region and the
/// current maximum range, otherwise rerun [`decide_fixed`].
pub fn decide_mobile(
    cache: &mut DecisionCache,
    ctx: PolarPoint,
    crx_now: PolarPoint,
    dep: &Deployment,
) -> PowerDecision {
    if let Some(cached) = cache.last {
        if let Some(r_ct) = cached.radius() {
            let d22 = separation(ctx, crx_now);
            if d22 <= r_ct && d22 <= max_range(crx_now.r(), dep) {
                return cached;
            }
        }
    }
    let fresh = decide_fixed(ctx, crx_now, dep);
    cache.last = Some(fresh);
    fresh
}

/// dB-domain exponent terms of the shadowed tangency equation:
/// `(10 α_p lg(r/d0) ± τ ± X' − P_bs) / (10 α_c)` for the TV receiver and CRx.
fn shadow_exponents(r1: f64, r2: f64, x_prime_db: f64, dep: &Deployment) -> (f64, f64) {
    let ch = &dep.channel;
    let scale = 10.0 * ch.alpha_c;
    let r1_db = 10.0 * ch.alpha_p * (r1 / ch.d0).log10();
    let r2_db = 10.0 * ch.alpha_p * (r2 / ch.d0).log10();
    let pr = (r1_db + dep.tau_p_db() + x_prime_db - dep.p_bs_dbw()) / scale;
    let cr = (r2_db - dep.tau_c_db() - x_prime_db - dep.p_bs_dbw()) / scale;
    (pr, cr)
}

/// Optimal CTx power (watts) from the closed-form dB solution of the shadowed
/// tangency equation, for a TV receiver at `r1` and CRx at `r2`.
///
/// No range check is applied; callers compare against `[p_min, p_max]`.
pub fn optimal_power_shadow(
    r1: f64,
    r2: f64,
    theta_pc: f64,
    x_prime_db: f64,
    dep: &Deployment,
) -> Result<f64> {
    ensure_positive("TV receiver radius", r1)?;
    ensure_positive("CR receiver radius", r2)?;
    let d_pc = separation_from(r1, r2, theta_pc) / dep.channel.d0;
    let (pr, cr) = shadow_exponents(r1, r2, x_prime_db, dep);
    let p_dbw = 10.0 * dep.channel.alpha_c * (d_pc / (10f64.powf(pr) + 10f64.powf(cr))).log10();
    Ok(db_to_linear(p_dbw))
}

/// Distance thresholds implied by the dB SIR constraints at CTx power
/// `p_ct_dbw` and shadowing `x_prime_db`: the CTx needs `d12 > d12_min` and
/// `d22 < d22_max` for a CRx at radius `r2`.
pub fn shadow_thresholds(
    p_ct_dbw: f64,
    r2: f64,
    x_prime_db: f64,
    dep: &Deployment,
) -> Result<(f64, f64)> {
    ensure_positive("CR receiver radius", r2)?;
    let (pr, cr) = shadow_exponents(dep.r1(), r2, x_prime_db, dep);
    let p_term = p_ct_dbw / (10.0 * dep.channel.alpha_c);
    let d0 = dep.channel.d0;
    Ok((d0 * 10f64.powf(p_term + pr), d0 * 10f64.powf(p_term + cr)))
}
