use std::ops::{Add, Mul};

use mav_tec::eso::{lsefc_first_order, lsefc_second_order, Leso, LesoConfig, LesoState};
use mav_tec::ode::rk4_step;
use proptest::prelude::*;

#[derive(Debug, Clone, Copy)]
struct Plant2 {
    y: f64,
    y_dot: f64,
}

impl Add for Plant2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            y: self.y + o.y,
            y_dot: self.y_dot + o.y_dot,
        }
    }
}

impl Mul<f64> for Plant2 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self {
            y: self.y * k,
            y_dot: self.y_dot * k,
        }
    }
}

/// `ÿ = a1 ẏ + a0 y + d(t) + b u` under second-order LADRC with controller
/// bandwidth `wc` and observer bandwidth `wo`. Returns (t, y, ẏ, estimates).
fn second_order_loop(
    a0: f64,
    a1: f64,
    d: impl Fn(f64) -> f64,
    wc: f64,
    wo: f64,
    t_end: f64,
) -> Vec<(f64, Plant2, Vec<f64>)> {
    let (b, dt, r) = (1.0, 0.001, 1.0);
    let mut obs = Leso::new(LesoConfig::new(2, b, wo, dt)).unwrap();
    let mut x = Plant2 { y: 0.0, y_dot: 0.0 };
    let mut out = Vec::new();
    for k in 0..(t_end / dt).round() as usize {
        let t = k as f64 * dt;
        let est = obs.state().x_hat.clone();
        let u = lsefc_second_order(r, est[0], est[1], est[2], wc * wc, 2.0 * wc, b).unwrap();
        obs.update(u, x.y).unwrap();
        out.push((t, x, est));
        x = rk4_step(t, x, dt, |t, s: &Plant2| {
            Ok::<_, ()>(Plant2 {
                y: s.y_dot,
                y_dot: a1 * s.y_dot + a0 * s.y + d(t) + b * u,
            })
        })
        .unwrap();
    }
    out
}

#[test]
fn unstable_plant_with_sinusoidal_disturbance_tracks_a_step() {
    // Observer five times the controller bandwidth. The observer lag on a
    // unit sinusoid at 1 rad/s is about 3 / wo, attenuated by the closed
    // loop 1 / |(j + wc)^2|, so wc = 4 predicts under 1%. At wc = 2, wo = 10
    // the same estimate is about 6%.
    let trace = second_order_loop(1.0, -1.0, f64::sin, 4.0, 20.0, 20.0);
    let tail = trace.iter().filter(|(t, ..)| *t >= 10.0);
    let worst = tail.map(|(_, x, _)| (x.y - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 0.02, "steady error {worst}");
}

#[test]
fn exact_model_states_are_recovered_after_ten_time_constants() {
    // a0 = a1 = 0 and b0 = b: nothing to lump, only the initial estimate
    // error has to die out.
    let (b, dt, wo) = (1.0, 1e-3, 20.0);
    let mut obs = Leso::new(LesoConfig::new(2, b, wo, dt)).unwrap();
    let mut x = Plant2 { y: 0.1, y_dot: -0.2 };
    for k in 0..(3.0 / dt) as usize {
        let t = k as f64 * dt;
        let u = 1.0;
        obs.update(u, x.y).unwrap();
        x = rk4_step(t, x, dt, |_, s: &Plant2| {
            Ok::<_, ()>(Plant2 {
                y: s.y_dot,
                y_dot: b * u,
            })
        })
        .unwrap();
        let est = &obs.state().x_hat;
        if t + dt >= 10.0 / wo {
            assert!((est[0] - x.y).abs() < 1e-3, "t {t}: {} vs {}", est[0], x.y);
            assert!(
                (est[1] - x.y_dot).abs() < 1e-2,
                "t {t}: {} vs {}",
                est[1],
                x.y_dot
            );
        }
    }
}

#[test]
fn first_order_disturbance_error_follows_the_double_pole_response() {
    // ẏ = u + d, u = 0: the disturbance error is d (1 + w t) e^{-w t} in
    // continuous time. The forward-Euler observer tracks it to a few percent
    // of d at dt = 1e-3.
    let (w, dt, d) = (10.0, 1e-3, 2.0);
    let mut obs = Leso::new(LesoConfig::new(1, 1.0, w, dt)).unwrap();
    let mut y = 0.0;
    for k in 1..=2000 {
        y += d * dt;
        let f_hat = obs.update(0.0, y).unwrap().disturbance();
        let t = k as f64 * dt;
        let expected = d * (1.0 + w * t) * (-w * t).exp();
        assert!(
            ((d - f_hat) - expected).abs() < 0.02 * d,
            "t {t}: {} vs {expected}",
            d - f_hat
        );
    }
}

proptest! {
    // Any stable first-order plant, any constant disturbance: the estimate
    // error stays under an envelope with time constant 2 / w, plus the lag
    // 2 max|f'| / w on the drifting lumped term a y + d.
    #[test]
    fn disturbance_error_decays_within_the_envelope(
        a in -3.0..0.0f64,
        d in -5.0..5.0f64,
        w in 5.0..40.0f64,
        u in -1.0..1.0f64,
    ) {
        let dt = 1e-3;
        let mut obs = Leso::new(LesoConfig::new(1, 1.0, w, dt)).unwrap();
        obs.reset(LesoState::at_output(1, 0.0));
        let mut y = 0.0_f64;
        for k in 1..=(10.0 / w / dt) as usize {
            // Exact one-step update of ẏ = a y + u + d.
            let f = |y: f64| a * y + d;
            y += dt * (f(y) + u);
            let f_hat = obs.update(u, y).unwrap().disturbance();
            let t = k as f64 * dt;
            let truth = f(y);
            let lag = 2.0 * a.abs() * (u + d).abs() / w;
            let bound = 1.5 * d.abs() * (-0.5 * w * t).exp() + 1.1 * lag + 1e-2;
            prop_assert!((f_hat - truth).abs() <= bound,
                "t {} err {}", t, f_hat - truth);
        }
    }
}

#[test]
fn first_order_loop_rejects_a_constant_disturbance() {
    // ẏ = b u + d with LSEFC: the output settles on the reference.
    let (b, dt, k, d) = (2.0, 0.01, 3.0, -4.0);
    let mut obs = Leso::new(LesoConfig::new(1, b, 20.0, dt)).unwrap();
    let mut y = 0.0;
    for _ in 0..1000 {
        let s = obs.state().clone();
        let u = lsefc_first_order(1.0, s.x_hat[0], s.x_hat[1], k, b).unwrap();
        obs.update(u, y).unwrap();
        y += dt * (b * u + d);
    }
    assert!((y - 1.0).abs() < 1e-6, "{y}");
}
