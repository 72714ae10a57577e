//! CRx motion: piecewise-linear trajectories built from alternating move and
//! pause epochs.
//!
//! Each move epoch draws a duration uniformly from `[0, epoch_max]` and a
//! heading uniformly from `[0, 2π)`, then travels in a straight line at the
//! epoch speed. Pauses follow each move. There are no destination points and
//! no arena boundary.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::geometry::{CartesianPoint, PolarPoint};

/// One constant-velocity piece of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSegment {
    pub t_start: f64,
    pub t_end: f64,
    /// Position at `t_start`.
    pub origin: CartesianPoint,
    /// m/s, zero while paused.
    pub speed: f64,
    /// Direction of travel, radians.
    pub heading: f64,
}

impl MotionSegment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn is_pause(&self) -> bool {
        self.speed == 0.0
    }

    /// Position at absolute time `t`, extrapolating past either end.
    pub fn cartesian_at(&self, t: f64) -> CartesianPoint {
        self.origin
            .offset(self.speed * (t - self.t_start), self.heading)
    }

    pub fn end_point(&self) -> CartesianPoint {
        self.cartesian_at(self.t_end)
    }

    /// The same motion re-anchored at time `t`, with an open end. This is what
    /// a receiver reports at a location update.
    pub fn rebased(&self, t: f64) -> MotionSegment {
        MotionSegment {
            t_start: t,
            t_end: f64::INFINITY,
            origin: self.cartesian_at(t),
            ..*self
        }
    }
}

/// Pause-length distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PauseModel {
    #[default]
    Exponential,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityParams {
    /// m/s.
    pub mean_speed: f64,
    /// Fractional half-width of a uniform per-epoch speed spread; 0 keeps
    /// every epoch at `mean_speed`.
    pub speed_jitter: f64,
    /// Move epochs last `U(0, epoch_max)` seconds.
    pub epoch_max: f64,
    /// Mean pause, seconds.
    pub pause_mean: f64,
    pub pause_model: PauseModel,
    pub start: PolarPoint,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            mean_speed: 30.0,
            speed_jitter: 0.0,
            epoch_max: 30.0,
            pause_mean: 5.0,
            pause_model: PauseModel::Exponential,
            start: PolarPoint::from_degrees(50_000.0, 60.0),
        }
    }
}

impl MobilityParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !ok(self.mean_speed) || !ok(self.epoch_max) || !ok(self.pause_mean) {
            return Err(Error::Config(
                "speed, epoch and pause durations must be non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.speed_jitter) {
            return Err(Error::Config(format!(
                "speed_jitter must lie in [0, 1], got {}",
                self.speed_jitter
            )));
        }
        if self.epoch_max == 0.0 && self.pause_mean == 0.0 {
            return Err(Error::Config("epoch_max and pause_mean cannot both be zero".into()));
        }
        Ok(())
    }
}

/// Contiguous motion segments covering `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    segments: Vec<MotionSegment>,
}

impl Trajectory {
    /// Wraps pre-built segments; they must be contiguous in time.
    pub fn from_segments(segments: Vec<MotionSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Config("trajectory needs at least one segment".into()));
        }
        for pair in segments.windows(2) {
            if pair[0].t_end != pair[1].t_start {
                return Err(Error::Config("trajectory segments are not contiguous".into()));
            }
        }
        if segments.iter().any(|s| s.t_end.partial_cmp(&s.t_start) != Some(std::cmp::Ordering::Greater) || s.speed < 0.0) {
            return Err(Error::Config("segment with non-positive duration or negative speed".into()));
        }
        Ok(Self { segments })
    }

    /// A single segment of constant velocity over `[0, horizon]`.
    pub fn straight(start: PolarPoint, speed: f64, heading: f64, horizon: f64) -> Self {
        Self {
            segments: vec![MotionSegment {
                t_start: 0.0,
                t_end: horizon,
                origin: start.to_cartesian(),
                speed,
                heading,
            }],
        }
    }

    pub fn segments(&self) -> &[MotionSegment] {
        &self.segments
    }

    pub fn span(&self) -> (f64, f64) {
        (
            self.segments[0].t_start,
            self.segments[self.segments.len() - 1].t_end,
        )
    }

    /// Segment in effect at `t`; a boundary instant belongs to the later segment.
    pub fn segment_at(&self, t: f64) -> Result<&MotionSegment> {
        let (start, end) = self.span();
        if !(t >= start && t <= end) {
            return Err(Error::OutOfSpan { t, start, end });
        }
        let idx = self.segments.partition_point(|s| s.t_end <= t);
        Ok(&self.segments[idx.min(self.segments.len() - 1)])
    }

    pub fn cartesian_at(&self, t: f64) -> Result<CartesianPoint> {
        Ok(self.segment_at(t)?.cartesian_at(t))
    }

    pub fn position_at(&self, t: f64) -> Result<PolarPoint> {
        Ok(self.cartesian_at(t)?.to_polar())
    }

    /// Writes `t_s,x_m,y_m,r_m,phi_rad` rows sampled every `step` seconds.
    pub fn write_csv<W: Write>(&self, out: W, step: f64) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_s", "x_m", "y_m", "r_m", "phi_rad"])?;
        let (start, end) = self.span();
        let n = ((end - start) / step).floor() as usize;
        for i in 0..=n {
            let t = start + i as f64 * step;
            let c = self.cartesian_at(t)?;
            let p = c.to_polar();
            w.write_record(&[
                t.to_string(),
                c.x.to_string(),
                c.y.to_string(),
                p.r().to_string(),
                p.phi().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Position at `segment.t_start + dt`, assuming the motion pattern persists.
pub fn predict_position(current: &MotionSegment, dt: f64) -> PolarPoint {
    current.cartesian_at(current.t_start + dt).to_polar()
}

/// Evaluates a trajectory at time `t`.
pub fn position_at(trajectory: &Trajectory, t: f64) -> Result<PolarPoint> {
    trajectory.position_at(t)
}

/// Draws a move/pause trajectory covering `[0, horizon]`.
pub fn generate_trajectory<R: Rng + ?Sized>(
    params: &MobilityParams,
    horizon: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    params.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!("horizon must be positive, got {horizon}")));
    }
    let pause_exp = if params.pause_mean > 0.0 {
        Some(Exp::new(1.0 / params.pause_mean).expect("positive rate"))
    } else {
        None
    };

    let mut segments = Vec::new();
    let mut t = 0.0;
    let mut pos = params.start.to_cartesian();
    let mut push = |t: &mut f64, pos: &mut CartesianPoint, duration: f64, speed: f64, heading: f64| {
        if duration <= 0.0 || *t >= horizon {
            return;
        }
        let t_end = (*t + duration).min(horizon);
        let seg = MotionSegment {
            t_start: *t,
            t_end,
            origin: *pos,
            speed,
            heading,
        };
        *pos = seg.end_point();
        *t = t_end;
        segments.push(seg);
    };

    while t < horizon {
        let duration = rng.random_range(0.0..=params.epoch_max);
        let heading = rng.random_range(0.0..std::f64::consts::TAU);
        let speed = if params.speed_jitter > 0.0 {
            let j = params.speed_jitter;
            params.mean_speed * rng.random_range((1.0 - j)..=(1.0 + j))
        } else {
            params.mean_speed
        };
        push(&mut t, &mut pos, duration, speed, heading);

        let pause = match (params.pause_model, &pause_exp) {
            (PauseModel::Exponential, Some(exp)) => exp.sample(rng),
            (PauseModel::Constant, _) => params.pause_mean,
            (PauseModel::Exponential, None) => 0.0,
        };
        push(&mut t, &mut pos, pause, 0.0, 0.0);
    }
    Trajectory::from_segments(segments)
}
