//! Environment dynamics against reference integrators written from the
//! Lagrangian equations of motion in mass-matrix form.

use std::f64::consts::PI;

use nrl::env::{Acrobot, AcrobotParams, Cartpole, CartpoleParams, EnvKind, Environment};
use nrl::numerics::RandomSource;

/// Solves `[[a, b], [c, d]] x = [e, f]` by Cramer's rule.
fn solve2(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> (f64, f64) {
    let det = a * d - b * c;
    ((e * d - b * f) / det, (a * f - e * c) / det)
}

/// Cart of mass M with a uniform pole of mass m and half-length l:
///   (M + m) ẍ + m l cos θ θ̈ = F + m l θ̇² sin θ
///   cos θ ẍ + (4/3) l θ̈ = g sin θ
fn cartpole_reference(s: [f64; 4], force: f64) -> [f64; 4] {
    let (big_m, m, l, g, tau) = (1.0, 0.1, 0.5, 9.8, 0.02);
    let [x, xd, th, thd] = s;
    let (xdd, thdd) = solve2(
        big_m + m,
        m * l * th.cos(),
        th.cos(),
        4.0 / 3.0 * l,
        force + m * l * thd * thd * th.sin(),
        g * th.sin(),
    );
    let xd1 = xd + tau * xdd;
    let thd1 = thd + tau * thdd;
    [x + tau * xd1, xd1, th + tau * thd1, thd1]
}

/// Two-link arm with elbow torque τ:
///   M(q) q̈ + c(q, q̇) + G(q) = (0, τ)
fn acrobot_accel(s: [f64; 4], torque: f64) -> [f64; 4] {
    let (m1, m2, l1, lc1, lc2, i1, i2, g) = (1.0, 1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 9.8);
    let [t1, t2, w1, w2] = s;
    let m11 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * t2.cos()) + i1 + i2;
    let m12 = m2 * (lc2 * lc2 + l1 * lc2 * t2.cos()) + i2;
    let m22 = m2 * lc2 * lc2 + i2;
    let h = m2 * l1 * lc2 * t2.sin();
    let c1 = -h * w2 * w2 - 2.0 * h * w1 * w2;
    let c2 = h * w1 * w1;
    let g2 = m2 * lc2 * g * (t1 + t2 - PI / 2.0).cos();
    let g1 = (m1 * lc1 + m2 * l1) * g * (t1 - PI / 2.0).cos() + g2;
    let (a1, a2) = solve2(m11, m12, m12, m22, -c1 - g1, torque - c2 - g2);
    [w1, w2, a1, a2]
}

fn acrobot_reference(s: [f64; 4], torque: f64) -> [f64; 4] {
    let dt = 0.2;
    let shift = |k: [f64; 4], h: f64| std::array::from_fn(|i| s[i] + h * k[i]);
    let k1 = acrobot_accel(s, torque);
    let k2 = acrobot_accel(shift(k1, dt / 2.0), torque);
    let k3 = acrobot_accel(shift(k2, dt / 2.0), torque);
    let k4 = acrobot_accel(shift(k3, dt), torque);
    let raw: [f64; 4] =
        std::array::from_fn(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    let wrap = |a: f64| (a + PI).rem_euclid(2.0 * PI) - PI;
    [
        wrap(raw[0]),
        wrap(raw[1]),
        raw[2].clamp(-4.0 * PI, 4.0 * PI),
        raw[3].clamp(-9.0 * PI, 9.0 * PI),
    ]
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[test]
fn cartpole_matches_reference_per_step() {
    let root = RandomSource::new(11);
    let mut worst: f64 = 0.0;
    for rollout in 0..100 {
        let mut rng = root.split(rollout);
        let mut env = Cartpole::new(CartpoleParams {
            max_steps: 1000,
            x_limit: f64::INFINITY,
            theta_limit: f64::INFINITY,
            ..CartpoleParams::default()
        });
        env.reset(&mut rng);
        for _ in 0..50 {
            let before = env.raw_state();
            let action = rng.below(2);
            env.step(action).unwrap();
            let expected = cartpole_reference(before, if action == 1 { 10.0 } else { -10.0 });
            for (a, b) in env.raw_state().iter().zip(&expected) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    assert!(worst < 1e-9, "worst per-step deviation {worst:e}");
}

#[test]
fn acrobot_matches_reference_per_step() {
    let root = RandomSource::new(12);
    let mut worst: f64 = 0.0;
    for rollout in 0..100 {
        let mut rng = root.split(rollout);
        let mut env = Acrobot::new(AcrobotParams {
            max_steps: 1000,
            ..AcrobotParams::default()
        });
        // Random starts anywhere on the circle with moderate velocities.
        env.reset_to([
            rng.uniform_in(-PI, PI),
            rng.uniform_in(-PI, PI),
            rng.uniform_in(-2.0, 2.0),
            rng.uniform_in(-2.0, 2.0),
        ]);
        for _ in 0..50 {
            let before = env.raw_state();
            let action = rng.below(3);
            let result = env.step(action).unwrap();
            let expected = acrobot_reference(before, action as f64 - 1.0);
            let got = env.raw_state();
            worst = worst.max(angle_gap(got[0], expected[0]));
            worst = worst.max(angle_gap(got[1], expected[1]));
            worst = worst.max((got[2] - expected[2]).abs());
            worst = worst.max((got[3] - expected[3]).abs());
            if result.done {
                break;
            }
        }
    }
    assert!(worst < 1e-9, "worst per-step deviation {worst:e}");
}

#[test]
fn acrobot_energy_stays_bounded() {
    let (m1, m2, l1, lc1, lc2, i1, i2, g) = (1.0, 1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 9.8);
    let energy = |s: &[f64; 4]| {
        let [t1, t2, w1, w2] = *s;
        let kinetic = 0.5 * (m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * t2.cos()) + i1 + i2) * w1 * w1
            + (m2 * (lc2 * lc2 + l1 * lc2 * t2.cos()) + i2) * w1 * w2
            + 0.5 * (m2 * lc2 * lc2 + i2) * w2 * w2;
        let potential = -(m1 * lc1 + m2 * l1) * g * t1.cos() - m2 * lc2 * g * (t1 + t2).cos();
        kinetic + potential
    };
    let root = RandomSource::new(13);
    for rollout in 0..20 {
        let mut rng = root.split(rollout);
        let mut env = Acrobot::new(AcrobotParams {
            max_steps: 500,
            ..AcrobotParams::default()
        });
        env.reset(&mut rng);
        // Goal checks are off here so the whole horizon is exercised.
        let mut state = env.raw_state();
        let mut sim = Acrobot::new(AcrobotParams::default());
        for _ in 0..500 {
            sim.reset_to(state);
            let result = sim.step(rng.below(3)).unwrap();
            state = sim.raw_state();
            assert!(result.observation.iter().all(|v| v.is_finite()));
            assert!(energy(&state).abs() < 1e4, "energy {}", energy(&state));
            assert!(state[2].abs() <= 4.0 * PI && state[3].abs() <= 9.0 * PI);
        }
    }
}

/// Energy drift of a torque-free swing comes from the integrator alone:
/// small against the potential range and shrinking fast with the step.
#[test]
fn unforced_acrobot_energy_drift_is_integrator_error() {
    let energy = |s: [f64; 4]| {
        let [t1, t2, w1, w2] = s;
        0.5 * (3.5 + t2.cos()) * w1 * w1
            + (1.25 + 0.5 * t2.cos()) * w1 * w2
            + 0.5 * 1.25 * w2 * w2
            - 1.5 * 9.8 * t1.cos()
            - 0.5 * 9.8 * (t1 + t2).cos()
    };
    let drift = |dt: f64, steps: usize| {
        let mut env = Acrobot::new(AcrobotParams {
            dt,
            max_steps: usize::MAX,
            ..AcrobotParams::default()
        });
        let start = [2.0, -1.0, 0.0, 0.0];
        let mut state = start;
        for _ in 0..steps {
            // Re-seat each step so the goal check never ends the swing.
            env.reset_to(state);
            env.step(1).unwrap();
            state = env.raw_state();
        }
        (energy(state) - energy(start)).abs()
    };
    let potential_range = 2.0 * (1.5 + 0.5) * 9.8;
    let coarse = drift(0.2, 50);
    let fine = drift(0.05, 200);
    assert!(coarse < 0.02 * potential_range, "coarse drift {coarse}");
    assert!(fine < coarse / 50.0, "fine {fine} coarse {coarse}");
}

#[test]
fn replaying_actions_reproduces_trajectories_bitwise() {
    for kind in [EnvKind::Reaching, EnvKind::Cartpole, EnvKind::Acrobot] {
        let actions: Vec<usize> = {
            let mut rng = RandomSource::new(5);
            let n = kind.build(None).spec().action_count;
            (0..60).map(|_| rng.below(n)).collect()
        };
        let run = || {
            let mut env = kind.build(None);
            let mut rng = RandomSource::new(9);
            let mut states = vec![env.reset(&mut rng).observation];
            for &a in &actions {
                let r = env.step(a).unwrap();
                states.push(r.observation);
                if r.done {
                    break;
                }
            }
            states
        };
        assert_eq!(run(), run(), "{kind}");
    }
}

#[test]
fn observation_dimensions_are_constant() {
    for kind in [EnvKind::Reaching, EnvKind::Cartpole, EnvKind::Acrobot] {
        let mut env = kind.build(None);
        let spec = env.spec();
        let mut rng = RandomSource::new(3);
        for _ in 0..3 {
            let mut r = env.reset(&mut rng);
            let mut events = 0;
            loop {
                assert_eq!(r.observation.len(), spec.obs_dim);
                if r.done {
                    break;
                }
                r = env.step(rng.below(spec.action_count)).unwrap();
                events += usize::from(r.reward_event);
            }
            match kind {
                EnvKind::Reaching => assert_eq!(events, env.steps()),
                _ => assert_eq!(events, 1),
            }
        }
    }
}
