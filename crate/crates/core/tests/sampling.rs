use statrs::distribution::{ContinuousCDF, StudentsT};
use superstat_core::dist::{
    conditional_gaussian_pdf, ou_path, CutoffParams, MixingModel, OuParams, ReturnDistribution,
};
use superstat_core::specfun::QuadratureSpec;

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
fn ks(mut x: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// CDF from the density by the trapezoid rule on a fine grid over
/// `[-width, width]`, with the outside mass split evenly.
fn tabulated_cdf(d: &ReturnDistribution, width: f64, n: usize) -> impl Fn(f64) -> f64 {
    let h = 2.0 * width / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| -width + i as f64 * h).collect();
    let ps: Vec<f64> = xs.iter().map(|&x| d.pdf(x).unwrap()).collect();
    let mut cum = vec![0.0];
    for w in ps.windows(2) {
        cum.push(cum.last().unwrap() + 0.5 * h * (w[0] + w[1]));
    }
    let outside = 0.5 * (1.0 - cum[n]);
    move |x: f64| {
        if x <= -width {
            return 0.0;
        }
        if x >= width {
            return 1.0;
        }
        let k = (((x + width) / h) as usize).min(n - 1);
        let t = (x - xs[k]) / h;
        outside + cum[k] + t * (cum[k + 1] - cum[k])
    }
}

#[test]
fn gamma_mixture_is_scaled_student_t() {
    // (1 + x²)^(-5/2) is the density of T/2 with T ~ t₄.
    let d = ReturnDistribution::superstat_gamma(2.0, 1.0).unwrap();
    let x = d.sample(1_000_000, 17).unwrap();
    let t = StudentsT::new(0.0, 1.0, 4.0).unwrap();
    let stat = ks(x, |v| t.cdf(2.0 * v));
    assert!(stat < 0.002, "KS {stat}");
}

#[test]
fn sampler_matches_density_for_every_family() {
    let q = QuadratureSpec::default();
    let n = 200_000;
    // Critical value of the KS statistic at α = 0.001.
    let critical = 1.95 / (n as f64).sqrt();
    let dists = [
        ReturnDistribution::gaussian(0.5).unwrap(),
        ReturnDistribution::cutoff_gamma(0.904, 0.571, 0.0252, &q).unwrap(),
        ReturnDistribution::numeric(MixingModel::inverse_gamma(2.0, 1.0).unwrap(), CutoffParams::none(), &q).unwrap(),
        ReturnDistribution::numeric(MixingModel::inverse_gamma(0.904, 0.571).unwrap(), CutoffParams::new(0.1).unwrap(), &q)
            .unwrap(),
        ReturnDistribution::numeric(MixingModel::gamma(3.0, 4.0).unwrap(), CutoffParams::new(0.2).unwrap(), &q).unwrap(),
    ];
    for (i, d) in dists.iter().enumerate() {
        let cdf = tabulated_cdf(d, 40.0, 400_000);
        let stat = ks(d.sample(n, 100 + i as u64).unwrap(), cdf);
        assert!(stat < critical, "{:?}: KS {stat} >= {critical}", d.spec());
    }
}

#[test]
fn student_type_sample_variance() {
    let d = ReturnDistribution::superstat_gamma(3.0, 4.0).unwrap();
    let x = d.sample(1_000_000, 5).unwrap();
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| v * v).sum::<f64>() / n;
    let m4 = x.iter().map(|v| v.powi(4)).sum::<f64>() / n;
    let se = ((m4 - m2 * m2) / n).sqrt();
    assert!((m2 - 1.0).abs() < 3.0 * se, "{m2} ± {se}");
}

#[test]
fn ou_stationary_law() {
    let p = OuParams { gamma: 1.0, sigma: 2f64.sqrt(), dt: 0.01, n_steps: 2_000_000, x0: 0.0 };
    let path = ou_path(&p, 3).unwrap();
    let burned = &path[10_000..];
    // Batch means absorb the autocorrelation time 1/(γ dt) = 100 steps.
    let batches: Vec<f64> = burned.chunks(10_000).map(|c| c.iter().map(|v| v * v).sum::<f64>() / c.len() as f64).collect();
    let k = batches.len() as f64;
    let mean = batches.iter().sum::<f64>() / k;
    let se = (batches.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt();
    assert!((mean - p.stationary_variance()).abs() < 3.0 * se, "{mean} ± {se}");

    // Histogram against the equilibrium Gaussian with β = γ/σ².
    let beta = p.gamma / (p.sigma * p.sigma);
    let width = 0.25;
    for j in -8..8 {
        let lo = j as f64 * width;
        let frac = burned.iter().filter(|&&v| v >= lo && v < lo + width).count() as f64 / burned.len() as f64;
        let expected = conditional_gaussian_pdf(lo + 0.5 * width, beta, 0.0).unwrap() * width;
        assert!((frac - expected).abs() < 0.01, "bin {lo}: {frac} vs {expected}");
    }
}
