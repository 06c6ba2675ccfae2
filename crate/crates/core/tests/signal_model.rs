use proptest::prelude::*;
use radcom::linalg::{norm, C64};
use radcom::signal_model::random::{complex_normal, rng, Stream};
use radcom::signal_model::*;

fn spec(n: usize) -> ScenarioSpec {
    ScenarioSpec {
        n,
        k: 3,
        pulse_length: 8,
        snr_db: Some(10.0),
        sir_db: Some(0.0),
        ..ScenarioSpec::default()
    }
}

fn random_vec(seed: u64, n: usize) -> Vec<C64> {
    let mut g = rng(seed, Stream::Init);
    (0..n).map(|_| complex_normal(&mut g, 1.0)).collect()
}

fn max_gap(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_matches_direct_sum_and_round_trips(n in 2usize..40, seed in 0u64..1000) {
        let split = IndexSplit::new(n).unwrap();
        let dft = Dft::new(split);
        let x = random_vec(seed, n);
        let y = dft.forward(&x);
        for (row, yk) in y.iter().enumerate() {
            let k = split.freq(row) as f64;
            let direct: C64 = x
                .iter()
                .enumerate()
                .map(|(m, xm)| xm * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * k * m as f64 / n as f64))
                .sum();
            prop_assert!((direct - yk).norm() < 1e-10);
        }
        prop_assert!(max_gap(&dft.inverse(&y), &x) < 1e-10);
    }

    #[test]
    fn steering_is_one_periodic(n in 2usize..40, tau in -3.0f64..3.0) {
        let split = IndexSplit::new(n).unwrap();
        prop_assert!(max_gap(&steering(&split, tau), &steering(&split, tau + 1.0)) < 1e-9);
        prop_assert!(steering(&split, 0.0).iter().all(|a| (a - C64::new(1.0, 0.0)).norm() == 0.0));
    }

    #[test]
    fn radar_coefficients_are_unit_norm(re in proptest::collection::vec(-5.0f64..5.0, 1..8), shift in 0.1f64..3.0) {
        let coeff: Vec<C64> = re.iter().map(|&r| C64::new(r + shift, r - shift)).collect();
        let radar = RadarSource::new(20e-6, 100e-6, C64::new(0.3, 0.1), coeff).unwrap();
        prop_assert!((norm(&radar.subspace_coeff) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn approximate_model_is_linear(seed in 0u64..200) {
        let scene = spec(17).draw(seed).unwrap();
        let m = scene.link.effective(&scene.dft()).unwrap().n_symbols();
        let (b1, b2) = (random_vec(seed + 1, m), random_vec(seed + 2, m));
        let (w1, w2) = (random_vec(seed + 3, 17), random_vec(seed + 4, 17));
        let radar = radar_spectrum(&scene);
        let f = |b: &[C64], w: &[C64]| -> Vec<C64> {
            synthesize_approx_with(&scene, b, w).unwrap().values.iter().zip(&radar).map(|(v, r)| v - r).collect()
        };
        let sum_b: Vec<C64> = b1.iter().zip(&b2).map(|(a, b)| a + b).collect();
        let sum_w: Vec<C64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        let joint = f(&sum_b, &sum_w);
        let split: Vec<C64> = f(&b1, &w1).iter().zip(f(&b2, &w2)).map(|(a, b)| a + b).collect();
        prop_assert!(max_gap(&joint, &split) < 1e-10);

        // each coupling enters linearly
        let mut doubled = scene.clone();
        doubled.radars[0].coupling *= C64::new(0.0, 2.0);
        let base = radar_spectrum(&scene);
        let twice = radar_spectrum(&doubled);
        let mut only_first = scene.clone();
        only_first.radars.truncate(1);
        let first = radar_spectrum(&only_first);
        let expected: Vec<C64> = base.iter().zip(&first).map(|(b, f)| b + f * (C64::new(0.0, 2.0) - 1.0)).collect();
        prop_assert!(max_gap(&twice, &expected) < 1e-10);
    }
}

#[test]
fn radar_spectrum_matches_direct_sum() {
    let scene = spec(33).draw(5).unwrap();
    let split = scene.index_split;
    let got = radar_spectrum(&scene);
    for (row, g) in got.iter().enumerate() {
        let k = split.freq(row) as f64;
        let mut want = C64::new(0.0, 0.0);
        for r in &scene.radars {
            let phase = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * k * r.normalized_delay);
            let coeff = r.scaled_coeff();
            for (c, h) in coeff.iter().enumerate() {
                want += phase * scene.dictionary.columns[(row, c)] * h;
            }
        }
        assert!((want - g).norm() < 1e-10);
    }
}

#[test]
fn snr_and_sir_follow_their_definitions() {
    let scene = spec(33).draw(9).unwrap();
    // unit symbol energy and unit channel power
    assert!((scene.noise_var - 0.1).abs() < 1e-12);
    let mut total = vec![C64::new(0.0, 0.0); 33];
    for w in scene.radar_waveforms() {
        total.iter_mut().zip(&w).for_each(|(t, x)| *t += x);
    }
    let energy: f64 = total.iter().map(|x| x.norm_sqr()).sum();
    assert!((energy - 1.0).abs() < 1e-10, "time-domain interference energy {energy}");
}

#[test]
fn exact_synthesis_approaches_the_model_as_the_window_grows() {
    let base = ScenarioSpec {
        n: 17,
        k: 2,
        pulse_length: 8,
        snr_db: None,
        channel: ChannelModel::Identity,
        ..ScenarioSpec::default()
    };
    let gap = |blocks: f64| {
        let scene = ScenarioSpec {
            truncation_blocks: blocks,
            ..base.clone()
        }
        .draw(2)
        .unwrap();
        let exact = synthesize_exact(&scene).unwrap();
        let approx = synthesize_approx(&scene).unwrap();
        max_gap(&exact.values, &approx.values)
    };
    let (short, long) = (gap(2.0), gap(4.0));
    assert!(long < short, "{long} !< {short}");
    assert!(short < 0.05 * 17f64.sqrt());
}

#[test]
fn scenes_are_reproducible_from_their_seed() {
    let s = spec(17);
    assert_eq!(s.draw(3).unwrap(), s.draw(3).unwrap());
    assert_ne!(s.draw(3).unwrap().radars, s.draw(4).unwrap().radars);
    let json = serde_json::to_string(&s.draw(3).unwrap()).unwrap();
    let back: SceneConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(back, s.draw(3).unwrap());
}
