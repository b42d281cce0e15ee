//! Randomized checks on the pulse layer: derivatives, areas, mirroring and
//! the adiabatic angle path.

use proptest::prelude::*;

use noon_sta::pulse::{ae_area, mixing_angle_path, PulsePair, PulseShape, Window};
use noon_sta::TWO_PI;

fn central_diff(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (8.0 * (f(t + h) - f(t - h)) - (f(t + 2.0 * h) - f(t - 2.0 * h))) / (12.0 * h)
}

fn ae_pair_strategy() -> impl Strategy<Value = PulsePair> {
    (
        0.02f64..0.20,
        0.02f64..0.20,
        0.5f64..2.0,
        2.5f64..6.0,
        -3.0f64..3.0,
    )
        .prop_map(|(peak, beta, ts, w, center)| {
            PulsePair::ae(TWO_PI * peak, TWO_PI * beta, ts, w * ts, center)
        })
}

fn bell_pair_strategy() -> impl Strategy<Value = PulsePair> {
    (
        0.005f64..0.05,
        2.0f64..8.0,
        0.0f64..5.0,
        0.005f64..0.06,
        0.8f64..2.0,
        8.0f64..14.0,
    )
        .prop_map(|(g0, t0, tau, d0, m, hw)| {
            PulsePair::bell(TWO_PI * g0, t0, tau, TWO_PI * d0, m, hw, 0.0)
        })
}

proptest! {
    #[test]
    fn derivative_matches_finite_differences(pair in ae_pair_strategy(), frac in 0.05f64..0.95) {
        let window = pair.window();
        let t = window.start + frac * window.length();
        let h = window.length() * 1e-5;
        for shape in [&pair.coupling, &pair.detuning] {
            let fd = central_diff(|x| shape.value(x), t, h);
            let an = shape.derivative(t);
            let scale = shape.value(t).abs().max(an.abs()).max(1e-6);
            prop_assert!((an - fd).abs() <= 1e-6 * scale.max(1.0));
        }
    }

    #[test]
    fn second_derivative_matches_slope_of_first(pair in bell_pair_strategy(), frac in 0.05f64..0.95) {
        let window = pair.window();
        let t = window.start + frac * window.length();
        let h = window.length() * 1e-5;
        for shape in [&pair.coupling, &pair.detuning] {
            let fd = central_diff(|x| shape.derivative(x), t, h);
            let an = shape.second_derivative(t);
            prop_assert!((an - fd).abs() <= 1e-5 * an.abs().max(1.0));
        }
    }

    #[test]
    fn area_matches_quadrature(
        peak in 0.02f64..0.20,
        ts in 0.5f64..2.0,
        w in 2.5f64..6.0,
    ) {
        let pair = PulsePair::ae(TWO_PI * peak, TWO_PI * 0.08, ts, w * ts, 0.0);
        let closed = ae_area(TWO_PI * peak, ts, w * ts);
        let quad = pair.coupling.area(4000);
        prop_assert!((closed - quad).abs() <= 1e-9 * closed.abs().max(1.0));
    }

    #[test]
    fn mirroring_reverses_the_trace(pair in ae_pair_strategy(), frac in 0.0f64..1.0) {
        let mirrored = pair.time_mirrored();
        let window = pair.window();
        let t = window.start + frac * window.length();
        let s = window.start + window.end - t;
        prop_assert!((mirrored.coupling.value(t) - pair.coupling.value(s)).abs() < 1e-12);
        prop_assert!((mirrored.detuning.value(t) - pair.detuning.value(s)).abs() < 1e-12);
        // slope flips sign under time reversal
        prop_assert!((mirrored.coupling.derivative(t) + pair.coupling.derivative(s)).abs() < 1e-9);

        let twice = mirrored.time_mirrored();
        prop_assert!((twice.coupling.value(t) - pair.coupling.value(t)).abs() < 1e-12);
        prop_assert!((twice.detuning.value(t) - pair.detuning.value(t)).abs() < 1e-12);
    }

    #[test]
    fn angle_path_has_no_jumps(pair in ae_pair_strategy()) {
        let n = 801;
        let path = mixing_angle_path(&pair, n).unwrap();
        for w in path.windows(2) {
            prop_assert!((w[1].1 - w[0].1).abs() < 0.5, "jump from {} to {}", w[0].1, w[1].1);
        }
    }

    #[test]
    fn scaling_is_pointwise(amp in 0.01f64..1.0, factor in -3.0f64..3.0, frac in 0.0f64..1.0) {
        let window = Window::centered(0.0, 4.0);
        let shape = PulseShape::gaussian(amp, 0.3, 1.5, window);
        let scaled = shape.scaled(factor);
        let t = window.start + frac * window.length();
        prop_assert!((scaled.value(t) - factor * shape.value(t)).abs() < 1e-12);
        prop_assert!((scaled.derivative(t) - factor * shape.derivative(t)).abs() < 1e-12);
    }
}

#[test]
fn detuning_mirror_flips_the_chirp_sign() {
    let pair = PulsePair::ae(TWO_PI * 0.06, TWO_PI * 0.08, 1.0, 4.0, 0.0);
    let mirrored = pair.time_mirrored();
    // the tanh ramp runs low to high; its mirror must run high to low
    assert!(pair.detuning.value(3.5) > 0.0);
    assert!(mirrored.detuning.value(3.5) < 0.0);
    assert!((mirrored.detuning.value(-3.5) - pair.detuning.value(3.5)).abs() < 1e-12);
}
