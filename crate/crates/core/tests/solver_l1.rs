use nalgebra::DMatrix;
use proptest::prelude::*;
use radcom::harness::runner::SolverSettings;
use radcom::linalg::{mat_adj_vec, mat_vec, C64};
use radcom::receiver::Receiver;
use radcom::signal_model::random::{complex_normal, rng, Stream};
use radcom::signal_model::*;
use radcom::solver_l1::*;

struct Dense(DMatrix<C64>);

impl LinearMap for Dense {
    fn dim_in(&self) -> usize {
        self.0.ncols()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        mat_vec(&self.0, x)
    }
    fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        mat_adj_vec(&self.0, y)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lasso_trace_is_monotone_and_kkt_holds(seed in 0u64..1000, rows in 4usize..12, cols in 2usize..20, w in 0.05f64..2.0) {
        let mut g = rng(seed, Stream::Init);
        let b = DMatrix::from_fn(rows, cols, |_, _| complex_normal(&mut g, 1.0));
        let y: Vec<C64> = (0..rows).map(|_| complex_normal(&mut g, 4.0)).collect();
        let weights: Vec<f64> = (0..cols).map(|i| w * (1.0 + (i % 3) as f64)).collect();
        let out = weighted_lasso(&Dense(b.clone()), &y, &weights, None, &ProxOptions { max_iter: 200_000, tol: 1e-15 }).unwrap();
        for pair in out.trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs().max(1.0));
        }
        let r: Vec<C64> = mat_vec(&b, &out.x).iter().zip(&y).map(|(a, c)| a - c).collect();
        let grad = mat_adj_vec(&b, &r);
        for ((x, gr), wi) in out.x.iter().zip(&grad).zip(&weights) {
            if x.norm() > 0.0 {
                prop_assert!((gr + x / x.norm() * *wi).norm() <= 1e-4 * wi, "{} vs {}", gr, wi);
            } else {
                prop_assert!(gr.norm() <= wi * (1.0 + 1e-4));
            }
        }
    }
}

fn scene(seed: u64) -> SceneConfig {
    ScenarioSpec {
        n: 33,
        k: 3,
        pulse_length: 16,
        snr_db: Some(15.0),
        ..ScenarioSpec::default()
    }
    .draw(seed)
    .unwrap()
}

#[test]
fn waveform_reconstruction_matches_direct_synthesis() {
    let s = scene(1);
    let dft = s.dft();
    let split = s.index_split;
    let coeff = s.radars[0].scaled_coeff();
    let got = reconstruct_waveform(&coeff, &s.dictionary, &dft);
    let n = s.n();
    for (m, g) in got.iter().enumerate() {
        let mut want = C64::new(0.0, 0.0);
        for row in 0..n {
            let k = split.freq(row) as f64;
            let spec: C64 = (0..coeff.len()).map(|c| s.dictionary.columns[(row, c)] * coeff[c]).sum();
            want += spec * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k * m as f64 / n as f64);
        }
        assert!((want / n as f64 - g).norm() < 1e-12);
    }
    // and it is the radar's own time-domain waveform
    let truth = &s.radar_waveforms()[0];
    assert!(got.iter().zip(truth).all(|(a, b)| (a - b).norm() < 1e-12));
}

#[test]
fn outer_loop_terminates_in_the_alphabet() {
    for seed in 0..3 {
        let s = scene(seed);
        let obs = synthesize_approx(&s).unwrap();
        let rx = Receiver::from_scene(&s).unwrap();
        let settings = SolverSettings::default();
        let grid = settings.grid(&rx).unwrap();
        let opts = Csl1Options {
            max_outer: 4,
            ..Csl1Options::default()
        };
        let truth = s.symbols();
        let w = L1Weights::for_grid(rx.sigma_w(), &grid);
        let r = run_csl1(&obs, &rx, &grid, w, &opts, Some(&truth)).unwrap();
        assert!(r.outer_iterations <= 4);
        assert!(r.symbols.iter().all(|b| rx.constellation.contains(*b)));
        assert_eq!(r.ser_trace.unwrap().len(), r.outer_iterations + 1);
    }
}

#[test]
fn known_delays_remove_clean_interference() {
    // noiseless link, strong radars: with the delays given the residual is
    // explained by interference alone once errors are corrected
    let s = ScenarioSpec {
        n: 33,
        k: 3,
        pulse_length: 16,
        snr_db: None,
        sir_db: Some(10.0),
        ..ScenarioSpec::default()
    }
    .draw(2)
    .unwrap();
    let obs = synthesize_approx(&s).unwrap();
    let rx = Receiver::from_scene(&s).unwrap();
    let delays: Vec<f64> = s.radars.iter().map(|r| r.normalized_delay).collect();
    let grid = grid_at(rx.dft.split(), &rx.dictionary, &delays).unwrap();
    let z = radcom::demodulator::residual(&obs, &s.symbols(), &rx.channel).unwrap();
    let sol = solve_known_delays(&z, &grid, &rx.channel, 1e-3, &ProxOptions { max_iter: 50_000, tol: 1e-14 }, None).unwrap();
    let truth: Vec<C64> = s.radars.iter().flat_map(|r| r.scaled_coeff()).collect();
    let err: f64 = sol.alpha.iter().zip(&truth).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let scale: f64 = truth.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
    assert!(err / scale < 1e-3, "relative coefficient error {}", err / scale);
}
