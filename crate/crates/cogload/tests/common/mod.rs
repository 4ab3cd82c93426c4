//! Shared helpers for integration tests: an independent brute-force oracle
//! for the allocation solver, a planted-effect panel generator for the
//! estimator, and a couple of small statistics utilities.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use cogload::did::PanelData;
use cogload::model::{processing_quality, Disclosure, InvestorProfile, QualityTechnology};

/// Utility of a full-budget allocation described by per-asset shares of each
/// resource. Utility is nondecreasing in both resources, so the optimum
/// always spends the full budgets; searching over shares is exhaustive.
fn share_utility(
    shares_a: &[f64],
    shares_w: &[f64],
    investor: &InvestorProfile,
    disclosures: &[Disclosure],
    tech: &QualityTechnology,
) -> f64 {
    let ba = investor.effective_attention_capacity();
    let bw = investor.effective_memory_capacity();
    disclosures
        .iter()
        .zip(shares_a.iter().zip(shares_w))
        .map(|(d, (&fa, &fw))| {
            let q = processing_quality(fa * ba, fw * bw, d, tech).unwrap();
            d.content.abs() * q
        })
        .sum()
}

/// Enumerate simplex grid points (shares summing to 1) with `steps`
/// subdivisions for `m` assets (m <= 3).
fn simplex_grid(m: usize, steps: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    match m {
        1 => out.push(vec![1.0]),
        2 => {
            for i in 0..=steps {
                let f = i as f64 / steps as f64;
                out.push(vec![f, 1.0 - f]);
            }
        }
        3 => {
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    let a = i as f64 / steps as f64;
                    let b = j as f64 / steps as f64;
                    out.push(vec![a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
        _ => panic!("brute force supports m <= 3"),
    }
    out
}

/// Local simplex grid around a center with the given half-width and step.
fn local_simplex_grid(center: &[f64], half_width: f64, step: f64) -> Vec<Vec<f64>> {
    let m = center.len();
    let steps = (2.0 * half_width / step).round() as i64;
    let mut out = Vec::new();
    match m {
        1 => out.push(vec![1.0]),
        2 => {
            for i in -steps..=steps {
                let f = (center[0] + i as f64 * step).clamp(0.0, 1.0);
                out.push(vec![f, 1.0 - f]);
            }
        }
        3 => {
            for i in -steps..=steps {
                for j in -steps..=steps {
                    let a = (center[0] + i as f64 * step).clamp(0.0, 1.0);
                    let b = (center[1] + j as f64 * step).clamp(0.0, 1.0);
                    if a + b <= 1.0 + 1e-12 {
                        out.push(vec![a, b, (1.0 - a - b).max(0.0)]);
                    }
                }
            }
        }
        _ => panic!("brute force supports m <= 3"),
    }
    out
}

/// Best utility over a resolution-1e-3 grid of full-budget allocations.
///
/// M <= 2 is searched exhaustively at 1e-3. M = 3 uses a coarse exhaustive
/// pass (1/40 steps, jointly over both resources) followed by two local
/// refinements down to 1e-3 around the incumbent.
pub fn brute_force_utility(
    investor: &InvestorProfile,
    disclosures: &[Disclosure],
    tech: &QualityTechnology,
) -> f64 {
    let m = disclosures.len();
    assert!((1..=3).contains(&m));
    let joint_best = |grid_a: &[Vec<f64>], grid_w: &[Vec<f64>]| {
        let mut best = f64::NEG_INFINITY;
        let mut arg = (grid_a[0].clone(), grid_w[0].clone());
        for fa in grid_a {
            for fw in grid_w {
                let u = share_utility(fa, fw, investor, disclosures, tech);
                if u > best {
                    best = u;
                    arg = (fa.clone(), fw.clone());
                }
            }
        }
        (best, arg)
    };
    if m <= 2 {
        let grid = simplex_grid(m, 1000);
        let (best, _) = joint_best(&grid, &grid);
        return best;
    }
    // coarse pass
    let coarse = simplex_grid(3, 40);
    let (_, (ca, cw)) = joint_best(&coarse, &coarse);
    // refine 1/40 -> 1/200 -> 1e-3
    let ga = local_simplex_grid(&ca, 1.0 / 40.0, 1.0 / 200.0);
    let gw = local_simplex_grid(&cw, 1.0 / 40.0, 1.0 / 200.0);
    let (_, (ra, rw)) = joint_best(&ga, &gw);
    let ga = local_simplex_grid(&ra, 1.0 / 200.0, 1e-3);
    let gw = local_simplex_grid(&rw, 1.0 / 200.0, 1e-3);
    let (best, _) = joint_best(&ga, &gw);
    best
}

/// Panel with a planted treatment effect: y = alpha_i + lambda_t +
/// beta * D_it + sigma * eps, staggered adoption uniform over periods plus a
/// never-treated share.
pub fn planted_panel(
    beta: f64,
    sigma: f64,
    n_units: usize,
    n_periods: usize,
    seed: u64,
) -> PanelData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let alpha: Vec<f64> = (0..n_units).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lambda: Vec<f64> = (0..n_periods).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // adoption in the interior plus a never-treated block
    let adoption: Vec<usize> = (0..n_units)
        .map(|_| {
            if rng.gen_bool(0.25) {
                n_periods // never
            } else {
                rng.gen_range(n_periods / 4..3 * n_periods / 4)
            }
        })
        .collect();

    let headers: Vec<String> = ["unit", "period", "y", "treated"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut cols: Vec<Vec<String>> = vec![Vec::new(); 4];
    for u in 0..n_units {
        for t in 0..n_periods {
            let d = f64::from(t >= adoption[u]);
            let y = alpha[u] + lambda[t] + beta * d + noise.sample(&mut rng);
            cols[0].push(format!("u{u:04}"));
            cols[1].push(t.to_string());
            cols[2].push(format!("{y:.15}"));
            cols[3].push(format!("{d}"));
        }
    }
    PanelData::new(headers, cols).unwrap()
}

pub fn default_planted_spec() -> cogload::did::DidSpec {
    cogload::did::DidSpec {
        outcome: "y".into(),
        treatment: "treated".into(),
        controls: vec![],
        unit: "unit".into(),
        time: "period".into(),
        cluster: "unit".into(),
        demean_tolerance: 1e-10,
        max_demean_sweeps: 200,
    }
}

/// Standard normal CDF via the Abramowitz-Stegun erf approximation.
pub fn normal_cdf(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.2316419 * x.abs());
    let poly = t
        * (0.319381530
            + t * (-0.356563782 + t * (1.781477937 + t * (-1.821255978 + t * 1.330274429))));
    let tail = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt() * poly;
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Two-sample Welch test p-value (normal approximation; both samples large).
pub fn welch_p_value(a: &[f64], b: &[f64]) -> f64 {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64], m: f64| {
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
    };
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (var(a, ma), var(b, mb));
    let se = (va / a.len() as f64 + vb / b.len() as f64).sqrt();
    if se == 0.0 {
        return 1.0;
    }
    let z = (ma - mb) / se;
    2.0 * (1.0 - normal_cdf(z.abs()))
}
