use jellium::edge::{HalfWellSampler, DEFAULT_SERIES_EPS};
use jellium::gas::sample_gas_gaussian_conditional;
use jellium::order_stats::{ConditionalSpec, DirectSampler};
use jellium::ordered::{Method, SamplingOptions, DEFAULT_MAX_ATTEMPTS};
use jellium::stats::{
    correlation, dkw_band, gelman_rubin, ks_statistic, mean_se, tail_exponent_fit, two_sample_band, EmpiricalDistribution,
    SurvivalWindow,
};
use jellium::{BackgroundSpec, Gas, GasParams, StreamRng};
use rand::Rng;
use rand_distr::{Distribution, Exp};

#[test]
fn dkw_band_covers_true_cdf() {
    let mut rng = StreamRng::new(500, 0);
    let n = 10_000;
    let band = dkw_band(n, 0.01);
    let covered = (0..200)
        .filter(|_| {
            let e = EmpiricalDistribution::new((0..n).map(|_| rng.random::<f64>()).collect()).unwrap();
            e.ks_to(|x| x.clamp(0.0, 1.0)) <= band
        })
        .count();
    assert!(covered >= 195, "{covered}/200");
}

#[test]
fn tail_fit_stable_under_sample_size_and_window() {
    let rate = 2.0;
    let d = Exp::new(rate).unwrap();
    let mut rng = StreamRng::new(501, 0);
    let big: Vec<f64> = (0..2_000_000).map(|_| d.sample(&mut rng)).collect();
    let fit = |xs: &[f64], w: SurvivalWindow| {
        tail_exponent_fit(&EmpiricalDistribution::new(xs.to_vec()).unwrap(), 1.0, w)
            .unwrap()
            .fitted_coefficient
    };
    let low = SurvivalWindow { s_lo: 1e-4, s_hi: 1e-2 };
    let high = SurvivalWindow { s_lo: 1e-3, s_hi: 1e-1 };
    let a = fit(&big[..1_000_000], SurvivalWindow::default());
    let b = fit(&big, SurvivalWindow::default());
    let c = fit(&big, low);
    let e = fit(&big, high);
    for s in [a, b, c, e] {
        assert!((s - rate).abs() < 0.1 * rate, "{s}");
    }
    assert!((a - b).abs() < 0.1 * rate && (c - e).abs() < 0.1 * rate);
}

#[test]
fn vanishing_lambda_loses_one_particle() {
    let beta = 2.0;
    let n = 100_000;
    let mut rng = StreamRng::new(502, 0);
    let mut medians = Vec::new();
    for lambda in [0.1, 0.01, 0.001] {
        let s = HalfWellSampler::new(lambda, beta, 2, DEFAULT_SERIES_EPS).unwrap();
        let draws: Vec<Vec<f64>> = (0..n).map(|_| s.sample(&mut rng).values).collect();
        medians.push(EmpiricalDistribution::new(draws.iter().map(|d| d[0]).collect()).unwrap().quantile(0.5));
        if lambda == 0.001 {
            let second = EmpiricalDistribution::new(draws.iter().map(|d| d[1]).collect()).unwrap();
            let one = HalfWellSampler::new(1.0, beta, 1, DEFAULT_SERIES_EPS).unwrap();
            let reference = EmpiricalDistribution::new((0..n).map(|_| one.sample(&mut rng).values[0]).collect()).unwrap();
            assert!(ks_statistic(&second, &reference) < two_sample_band(n, n, 0.01));
        }
    }
    assert!(medians.windows(2).all(|w| w[1] > 5.0 * w[0]), "{medians:?}");
    assert!(medians[2] > 100.0);
}

#[test]
fn gibbs_agrees_with_rejection() {
    let (n, beta, alpha) = (4, 1.0, 4.5);
    let gas = Gas::new(BackgroundSpec::uniform(-1.0, 0.0, alpha).unwrap(), GasParams::new(n, beta, alpha).unwrap()).unwrap();
    let count = 50_000;
    let rej = SamplingOptions {
        method: Some(Method::Rejection),
        ..SamplingOptions::default()
    };
    let gibbs = SamplingOptions {
        method: Some(Method::Gibbs),
        ..SamplingOptions::default()
    };
    let a = gas.system().sample_topk(n, count, &mut StreamRng::new(503, 0), &rej).unwrap();
    let b = gas.system().sample_topk(n, count, &mut StreamRng::new(503, 1), &gibbs).unwrap();
    for j in 0..n {
        let p = EmpiricalDistribution::new(a.values.iter().map(|v| v[j]).collect()).unwrap();
        let q = EmpiricalDistribution::new(b.values.iter().map(|v| v[j]).collect()).unwrap();
        assert!(ks_statistic(&p, &q) < two_sample_band(count, count, 0.01), "j={j}");
    }
    let chains: Vec<Vec<f64>> = (0..4)
        .map(|c| {
            gas.gibbs(StreamRng::new(504, c), 200, 5)
                .take(2000)
                .map(|cfg| cfg.positions[0])
                .collect()
        })
        .collect();
    assert!(gelman_rubin(&chains) < 1.01);
}

#[test]
fn direct_sampler_gaps_are_independent_exponentials() {
    let (n, beta, alpha, k) = (5, 1.0, 5.5, 3);
    let spec = ConditionalSpec::new(
        GasParams::new(n, beta, alpha).unwrap(),
        BackgroundSpec::uniform(-1.0, 0.0, alpha).unwrap(),
        k,
    )
    .unwrap();
    let count = 50_000;
    let (draws, _) = DirectSampler::new(spec.clone())
        .unwrap()
        .sample(count, &mut StreamRng::new(505, 0), DEFAULT_MAX_ATTEMPTS)
        .unwrap();
    let mu = spec.gap_means();
    let gaps: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            draws
                .iter()
                .map(|d| if j + 1 < k { d.values[j] - d.values[j + 1] } else { d.values[j] })
                .collect()
        })
        .collect();
    for (j, g) in gaps.iter().enumerate() {
        let e = EmpiricalDistribution::new(g.clone()).unwrap();
        assert!(e.ks_to(|x| 1.0 - (-x / mu[j]).exp()) < dkw_band(count, 0.01), "gap {j}");
    }
    for i in 0..k {
        for j in i + 1..k {
            assert!(correlation(&gaps[i], &gaps[j]).abs() < 4.0 / (count as f64).sqrt());
        }
    }
}

#[test]
fn gaussian_conditional_single_particle() {
    let p = GasParams::new(1, 1.0, 2.0).unwrap();
    let mut rng = StreamRng::new(506, 0);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| sample_gas_gaussian_conditional(-1.0, 0.0, &p, &mut rng, 1000).unwrap().0.positions[0])
        .collect();
    assert!(xs.iter().all(|&x| (-1.0..=0.0).contains(&x)));
    let (m, se) = mean_se(&xs);
    assert!((m + 0.5).abs() < 4.0 * se);
}
