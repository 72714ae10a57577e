//! Propagation and SIR evaluation.
//!
//! Two equivalent views are provided. The linear view follows the two-ray
//! ground model `P_r = P_t G_t G_r h_t² h_r² / d^α`; the dB view follows the
//! log-distance model `PL(d) = PL(d0) + 10 α log10(d / d0) + X_σ` with
//! `PL(d0) = 0 dB`. With equal exponents, `d0 = 1 m`, unity gains and no
//! shadowing the two agree exactly.
//!
//! Noise is neglected; every ratio here is an SIR.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_positive, Error, Result};

/// Path loss at the reference distance, dB.
pub const PL_D0_DB: f64 = 0.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Which transmitter a propagation path belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    /// TV base station transmissions.
    Primary,
    /// CR transmitter transmissions.
    Cognitive,
}

/// Propagation constants shared by both transmitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Path-loss exponent of base-station transmissions.
    pub alpha_p: f64,
    /// Path-loss exponent of CR transmissions.
    pub alpha_c: f64,
    pub g_t: f64,
    pub g_r: f64,
    /// Antenna heights, meters.
    pub h_t: f64,
    pub h_r: f64,
    /// Standard deviation of a single log-normal shadowing term, dB.
    pub sigma_db: f64,
    /// Reference distance of the log-distance model, meters.
    pub d0: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::equal_exponent(3.0)
    }
}

impl ChannelParams {
    /// Unity gains, equal unit heights, no shadowing.
    pub fn equal_exponent(alpha: f64) -> Self {
        Self {
            alpha_p: alpha,
            alpha_c: alpha,
            g_t: 1.0,
            g_r: 1.0,
            h_t: 1.0,
            h_r: 1.0,
            sigma_db: 0.0,
            d0: 1.0,
        }
    }

    pub fn shadowed(alpha_p: f64, alpha_c: f64, sigma_db: f64) -> Self {
        Self {
            alpha_p,
            alpha_c,
            sigma_db,
            ..Self::equal_exponent(alpha_p)
        }
    }

    pub fn alpha(&self, link: Link) -> f64 {
        match link {
            Link::Primary => self.alpha_p,
            Link::Cognitive => self.alpha_c,
        }
    }

    pub fn is_equal_exponent(&self) -> bool {
        self.alpha_p == self.alpha_c
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("alpha_p", self.alpha_p),
            ("alpha_c", self.alpha_c),
            ("g_t", self.g_t),
            ("g_r", self.g_r),
            ("h_t", self.h_t),
            ("h_r", self.h_r),
            ("d0", self.d0),
        ] {
            ensure_positive(what, v).map_err(|e| Error::Config(e.to_string()))?;
        }
        if !(self.sigma_db >= 0.0 && self.sigma_db.is_finite()) {
            return Err(Error::Config(format!(
                "sigma_db must be non-negative, got {}",
                self.sigma_db
            )));
        }
        Ok(())
    }
}

/// Received power under the two-ray ground model, watts.
pub fn received_power_tworay(p_t: f64, d: f64, params: &ChannelParams, which: Link) -> Result<f64> {
    ensure_positive("transmit power", p_t)?;
    ensure_positive("propagation distance", d)?;
    let gain = params.g_t * params.g_r * params.h_t.powi(2) * params.h_r.powi(2);
    Ok(p_t * gain / d.powf(params.alpha(which)))
}

/// Linear SIR at the TV receiver: `P_bs (d12/d0)^α_c / (P_ct (r1/d0)^α_p)`.
///
/// Antenna gains and heights are common to both paths and cancel.
pub fn sir_primary(p_bs: f64, p_ct: f64, d12: f64, r1: f64, params: &ChannelParams) -> Result<f64> {
    ensure_positive("base-station power", p_bs)?;
    ensure_positive("CR transmit power", p_ct)?;
    ensure_positive("CTx to TV receiver distance", d12)?;
    ensure_positive("TV receiver radius", r1)?;
    let d0 = params.d0;
    Ok(p_bs * (d12 / d0).powf(params.alpha_c) / (p_ct * (r1 / d0).powf(params.alpha_p)))
}

/// Linear SIR at the CR receiver: `P_ct (r2/d0)^α_p / (P_bs (d22/d0)^α_c)`.
pub fn sir_cr(p_ct: f64, p_bs: f64, d22: f64, r2: f64, params: &ChannelParams) -> Result<f64> {
    ensure_positive("CR transmit power", p_ct)?;
    ensure_positive("base-station power", p_bs)?;
    ensure_positive("CTx to CRx distance", d22)?;
    ensure_positive("CR receiver radius", r2)?;
    let d0 = params.d0;
    Ok(p_ct * (r2 / d0).powf(params.alpha_p) / (p_bs * (d22 / d0).powf(params.alpha_c)))
}

/// Log-distance path loss, dB.
pub fn path_loss_db(d: f64, alpha: f64, x_sigma_db: f64, params: &ChannelParams) -> Result<f64> {
    ensure_positive("propagation distance", d)?;
    Ok(PL_D0_DB + 10.0 * alpha * (d / params.d0).log10() + x_sigma_db)
}

/// Received level `p_dbw - PL(d)`, dBW.
pub fn shadowed_sir_terms(
    p_dbw: f64,
    d: f64,
    alpha: f64,
    x_sigma_db: f64,
    params: &ChannelParams,
) -> Result<f64> {
    Ok(p_dbw - path_loss_db(d, alpha, x_sigma_db, params)?)
}

/// SIR at the TV receiver in dB, with the net shadowing difference `x_prime_db`.
pub fn sir_primary_db(
    p_bs_dbw: f64,
    p_ct_dbw: f64,
    d12: f64,
    r1: f64,
    x_prime_db: f64,
    params: &ChannelParams,
) -> Result<f64> {
    let signal = shadowed_sir_terms(p_bs_dbw, r1, params.alpha_p, x_prime_db, params)?;
    let interference = shadowed_sir_terms(p_ct_dbw, d12, params.alpha_c, 0.0, params)?;
    Ok(signal - interference)
}

/// SIR at the CR receiver in dB, with the net shadowing difference `x_prime_db`.
pub fn sir_cr_db(
    p_ct_dbw: f64,
    p_bs_dbw: f64,
    d22: f64,
    r2: f64,
    x_prime_db: f64,
    params: &ChannelParams,
) -> Result<f64> {
    let signal = shadowed_sir_terms(p_ct_dbw, d22, params.alpha_c, x_prime_db, params)?;
    let interference = shadowed_sir_terms(p_bs_dbw, r2, params.alpha_p, 0.0, params)?;
    Ok(signal - interference)
}

/// Draws the difference of two independent `N(0, σ)` shadowing terms, i.e.
/// a zero-mean Gaussian with standard deviation `√2 σ` dB.
///
/// The standard normal variate comes from `rand_distr`'s ziggurat sampler
/// over the caller's generator, so a seeded generator gives a fixed stream.
pub fn sample_shadowing<R: Rng + ?Sized>(rng: &mut R, sigma_db: f64) -> f64 {
    if sigma_db == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    std::f64::consts::SQRT_2 * sigma_db * z
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn tworay_examples() {
        let p = ChannelParams::equal_exponent(3.0);
        assert_eq!(received_power_tworay(1.0, 1.0, &p, Link::Primary).unwrap(), 1.0);
        assert_eq!(received_power_tworay(8.0, 2.0, &p, Link::Cognitive).unwrap(), 1.0);
        let far = received_power_tworay(1e5, 5e4, &p, Link::Primary).unwrap();
        assert!(rel(far, 8.0e-10) < 1e-12);
    }

    #[test]
    fn tworay_rejects_zero_distance() {
        let p = ChannelParams::default();
        assert!(matches!(
            received_power_tworay(1.0, 0.0, &p, Link::Primary),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn tworay_gains_and_heights() {
        let p = ChannelParams {
            g_t: 2.0,
            h_r: 3.0,
            ..ChannelParams::equal_exponent(2.0)
        };
        let pr = received_power_tworay(1.0, 6.0, &p, Link::Primary).unwrap();
        assert!(rel(pr, 2.0 * 9.0 / 36.0) < 1e-15);
    }

    #[test]
    fn sir_examples() {
        let p = ChannelParams::equal_exponent(3.0);
        assert_eq!(sir_primary(7.0, 7.0, 3.0, 3.0, &p).unwrap(), 1.0);
        assert!(rel(sir_primary(1e5, 100.0, 5e4, 5e4, &p).unwrap(), 1000.0) < 1e-12);
        assert!(rel(sir_primary(1e5, 80.0, 5e4, 5e4, &p).unwrap(), 1250.0) < 1e-12);

        assert_eq!(sir_cr(7.0, 7.0, 3.0, 3.0, &p).unwrap(), 1.0);
        let at_edge = sir_cr(100.0, 1e5, 3730.0, 47_000.0, &p).unwrap();
        assert!((at_edge - 2.0).abs() < 1e-2, "{at_edge}");
        assert!((sir_cr(100.0, 1e5, 1000.0, 47_000.0, &p).unwrap() - 103.823).abs() < 1e-9);
    }

    #[test]
    fn sir_rejects_non_positive() {
        let p = ChannelParams::default();
        assert!(sir_primary(0.0, 1.0, 1.0, 1.0, &p).is_err());
        assert!(sir_primary(1.0, 1.0, 1.0, -1.0, &p).is_err());
        assert!(sir_cr(1.0, 1.0, 0.0, 1.0, &p).is_err());
    }

    #[test]
    fn shadowed_terms_examples() {
        let p = ChannelParams::equal_exponent(3.0);
        assert_eq!(shadowed_sir_terms(0.0, 1.0, 3.0, 0.0, &p).unwrap(), 0.0);
        assert!((shadowed_sir_terms(50.0, 10.0, 3.0, 0.0, &p).unwrap() - 20.0).abs() < 1e-12);
        let far = shadowed_sir_terms(50.0, 5e4, 3.0, 0.0, &p).unwrap();
        assert!((far - (-90.969_100_130_080_56)).abs() < 1e-9);
        assert!(shadowed_sir_terms(50.0, 0.0, 3.0, 0.0, &p).is_err());
    }

    #[test]
    fn shadowing_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| sample_shadowing(&mut rng, 0.0) == 0.0));
    }

    #[test]
    fn shadowing_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_shadowing(&mut rng, 6.0);
            sum += x;
            sq += x * x;
        }
        let mean = sum / n as f64;
        let sd = (sq / n as f64 - mean * mean).sqrt();
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((sd - 6.0 * 2f64.sqrt()).abs() < 0.05, "sd {sd}");
    }

    proptest! {
        #[test]
        fn db_view_matches_linear(
            p_bs in 1.0..1e6f64, p_ct in 0.1..1e3f64,
            d12 in 10.0..1e5f64, r1 in 10.0..1e5f64,
            d22 in 10.0..1e5f64, r2 in 10.0..1e5f64,
        ) {
            let p = ChannelParams::equal_exponent(3.0);
            let (bs, ct) = (linear_to_db(p_bs), linear_to_db(p_ct));
            let lin_p = linear_to_db(sir_primary(p_bs, p_ct, d12, r1, &p).unwrap());
            let db_p = sir_primary_db(bs, ct, d12, r1, 0.0, &p).unwrap();
            prop_assert!((lin_p - db_p).abs() < 1e-9);
            let lin_c = linear_to_db(sir_cr(p_ct, p_bs, d22, r2, &p).unwrap());
            let db_c = sir_cr_db(ct, bs, d22, r2, 0.0, &p).unwrap();
            prop_assert!((lin_c - db_c).abs() < 1e-9);
        }

        #[test]
        fn tworay_monotone_and_linear(p_t in 0.1..1e5f64, d in 1.0..1e5f64, k in 1.0001..10.0f64) {
            let p = ChannelParams::equal_exponent(3.0);
            let base = received_power_tworay(p_t, d, &p, Link::Cognitive).unwrap();
            prop_assert!(received_power_tworay(p_t, d * k, &p, Link::Cognitive).unwrap() < base);
            let scaled = received_power_tworay(k * p_t, d, &p, Link::Cognitive).unwrap();
            prop_assert!((scaled - k * base).abs() <= 1e-12 * scaled);
        }

        #[test]
        fn sir_primary_scale_invariant(p_bs in 1.0..1e6f64, p_ct in 0.1..1e3f64, d12 in 10.0..1e5f64, r1 in 10.0..1e5f64) {
            // power-of-two factors keep the rescaling exact in floating point
            let p = ChannelParams::equal_exponent(3.0);
            let base = sir_primary(p_bs, p_ct, d12, r1, &p).unwrap();
            for k in [0.25, 2.0, 1024.0] {
                prop_assert_eq!(sir_primary(k * p_bs, k * p_ct, d12, r1, &p).unwrap(), base);
            }
        }
    }
}
