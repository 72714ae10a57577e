//! Whole-scenario behaviour of the simulator on the standard scene.

use crpower::channel::ChannelParams;
use crpower::mobility::MobilityParams;
use crpower::powerctl::Deployment;
use crpower::sim::{run_many, run_scenario, Policy, ScenarioConfig, Summary};

fn at_speed(policy: Policy, speed: f64, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        policy,
        mobility: MobilityParams {
            mean_speed: speed,
            ..Default::default()
        },
        seed,
        ..Default::default()
    }
}

fn mean_pdr(policy: Policy, speed: f64, seeds: u64) -> Summary {
    let configs: Vec<_> = (0..seeds).map(|s| at_speed(policy, speed, s)).collect();
    Summary::of(&run_many(&configs).unwrap())
}

#[test]
fn optimal_beats_fixed_60w_at_30_mps() {
    let opt = mean_pdr(Policy::OptimalControl, 30.0, 20);
    let fixed = mean_pdr(Policy::FixedPower(60.0), 30.0, 20);
    assert!(opt.mean_pdr > fixed.mean_pdr, "{} vs {}", opt.mean_pdr, fixed.mean_pdr);
}

#[test]
fn fixed_power_pdr_rises_with_power_below_threshold() {
    let pdrs: Vec<f64> = [10.0, 30.0, 50.0, 70.0, 90.0]
        .iter()
        .map(|&p| mean_pdr(Policy::FixedPower(p), 30.0, 10).mean_pdr)
        .collect();
    assert!(pdrs.windows(2).all(|w| w[0] <= w[1]), "{pdrs:?}");
}

#[test]
fn optimal_control_never_violates_protection_without_shadowing() {
    for speed in [10.0, 40.0] {
        for seed in 0..5 {
            let m = run_scenario(&at_speed(Policy::OptimalControl, speed, seed)).unwrap();
            assert_eq!(m.pr_violations, 0);
            assert!(m.packets_delivered <= m.packets_sent);
            assert!((0.0..=1.0).contains(&m.pdr));
        }
    }
}

#[test]
fn common_random_numbers_across_policies() {
    let a = run_scenario(&at_speed(Policy::OptimalControl, 20.0, 4)).unwrap();
    let b = run_scenario(&at_speed(Policy::FixedPower(50.0), 20.0, 4)).unwrap();
    assert_eq!(a.packets_sent, b.packets_sent);
}

#[test]
fn shadowing_lowers_pdr_in_the_steeper_channel() {
    let shadowed = ScenarioConfig {
        deployment: Deployment {
            channel: ChannelParams::shadowed(3.0, 4.0, 6.0),
            ..Deployment::default()
        },
        shadowing_enabled: true,
        ..at_speed(Policy::OptimalControl, 30.0, 0)
    };
    let plain = run_scenario(&at_speed(Policy::OptimalControl, 30.0, 0)).unwrap();
    let sh = run_scenario(&shadowed).unwrap();
    assert!(sh.pdr < plain.pdr);
    assert_eq!(sh.packets_sent, plain.packets_sent);
}
