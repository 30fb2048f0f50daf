use ablation_core::evans::{self, EvansSetup, LeftMode};
use ablation_core::model::ModelParams;
use ablation_core::wave;

fn angle(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    evans::miss_distance(a, b).abs().asin()
}

#[test]
fn integrated_and_expanded_cold_sides_converge() {
    let params = ModelParams::default();
    let c0 = wave::limit_speed(&params).unwrap();
    let sigma0 = evans::hot_sigma0(params.m, c0).unwrap();
    let mut gaps = Vec::new();
    for eps in [1e-3, 1e-4, 1e-5] {
        let w = wave::solve_wave_with_c0(&params.with_epsilon(eps), c0).unwrap();
        let mut setup = EvansSetup::with_sigma0(&w, &params, eps.powf(-4.0 / 9.0), sigma0).unwrap();
        let a = evans::left_branch(&setup, sigma0).unwrap();
        setup.mode = LeftMode::Expansion;
        let b = evans::left_branch(&setup, sigma0).unwrap();
        gaps.push(angle(&a.direction, &b.direction));
    }
    assert!(gaps.windows(2).all(|g| g[1] < 0.5 * g[0]), "{gaps:?}");
    assert!(gaps[2] < 1e-2, "{gaps:?}");
}
