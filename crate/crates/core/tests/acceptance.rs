mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use blended_inference::cli::{default_pi0_list, p_grid, table_rows};
use blended_inference::confidence::{significance, t_cdf, LocationModel, SignificanceFunction};
use blended_inference::distributions::{binary_atoms, FiniteDistribution};
use blended_inference::projection::{blend, i_projection, maximin_bruteforce, ConstraintSet};
use blended_inference::testing::{
    blend_table, blended_null_probability, lfdr_lower_bound, maxent_alternative, sellke_bound,
    TableRow, TestInput,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn atoms(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("theta{i}")).collect()
}

fn random_dist(n: usize, rng: &mut ChaCha8Rng) -> FiniteDistribution {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.02..1.0)).collect();
    FiniteDistribution::from_weights(atoms(n), &w).unwrap()
}

/// Box around `center`, so the center is always feasible.
fn box_around(center: &FiniteDistribution, rng: &mut ChaCha8Rng) -> ConstraintSet {
    let lower = center
        .probs()
        .iter()
        .map(|c| c * rng.gen::<f64>())
        .collect();
    let upper = center
        .probs()
        .iter()
        .map(|c| c + (1.0 - c) * rng.gen::<f64>())
        .collect();
    ConstraintSet::new(atoms(center.len()), lower, upper).unwrap()
}

fn divergence(set: &ConstraintSet, b: &FiniteDistribution) -> f64 {
    blend(set, b)
        .unwrap()
        .divergence_to_benchmark
        .finite()
        .unwrap()
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:.0?}"))
    }
}

fn boundary_rows() -> Outcome {
    let start = Instant::now();
    let rows = blend_table(&p_grid(0.005, 1.0, 200), &[0.0, 1.0]).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (zero, one): (Vec<&TableRow>, Vec<&TableRow>) =
        rows.iter().partition(|r| r.pi0_lower == 0.0);
    if zero.len() != 201 || one.len() != 201 {
        return Err(format!("row counts {} and {}", zero.len(), one.len()));
    }
    if let Some(r) = zero.iter().find(|r| r.blended != r.p) {
        return Err(format!("pi0=0, p={}: blended {}", r.p, r.blended));
    }
    if let Some(r) = one.iter().find(|r| r.blended != 1.0) {
        return Err(format!("pi0=1, p={}: blended {}", r.p, r.blended));
    }
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("402 rows exact in {elapsed:.2?}"))
}

fn monotone_surface() -> Outcome {
    let pi0s = default_pi0_list();
    let rows = table_rows(0.005, 1.0, 200, &[]).map_err(|e| e.to_string())?;
    if rows.len() != 4221 {
        return Err(format!("{} rows", rows.len()));
    }
    let at = |i: usize, j: usize| rows[i * 201 + j].blended;
    let mut violations = 0;
    for i in 0..pi0s.len() {
        for j in 0..201 {
            if j > 0 && at(i, j) < at(i, j - 1) {
                violations += 1;
            }
            if i > 0 && at(i, j) < at(i - 1, j) {
                violations += 1;
            }
        }
    }
    if violations > 0 {
        return Err(format!("{violations} violations"));
    }
    Ok("4221 rows, 0 violations".into())
}

fn testing_matches_projection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = 1.0 - rng.gen::<f64>(); // (0, 1]
        let pi0 = rng.gen::<f64>();
        let input = TestInput::new(p, pi0).map_err(|e| e.to_string())?;
        let closed = blended_null_probability(&input).map_err(|e| e.to_string())?;
        let set = ConstraintSet::new(binary_atoms(), vec![closed.lfdr_lower, 0.0], vec![1.0, 1.0])
            .map_err(|e| e.to_string())?;
        let bench = FiniteDistribution::binary(p).map_err(|e| e.to_string())?;
        let projected = blend(&set, &bench).map_err(|e| e.to_string())?;
        worst = worst.max((projected.projection.probs()[0] - closed.blended_null_prob).abs());
    }
    let elapsed = start.elapsed();
    if worst > 1e-9 {
        return Err(format!("max difference {worst:e}"));
    }
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("max difference {worst:e} in {elapsed:.2?}"))
}

fn game_matches_projection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    let start = Instant::now();
    let mut worst_ratio: f64 = 0.0;
    for (n, count, step) in [(2, 100, 1e-4), (3, 20, 1e-2)] {
        for _ in 0..count {
            let center = random_dist(n, &mut rng);
            let set = box_around(&center, &mut rng);
            let b = random_dist(n, &mut rng);
            let game = maximin_bruteforce(&set, &b, step).map_err(|e| e.to_string())?;
            let proj = i_projection(&set, &b).map_err(|e| e.to_string())?;
            let gap = (game.value - proj.divergence_to_benchmark.finite().unwrap()).abs();
            if gap > 5.0 * step {
                return Err(format!("{n} atoms: gap {gap:e} exceeds {:e}", 5.0 * step));
            }
            worst_ratio = worst_ratio.max(gap / step);
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!(
        "120 instances, worst gap {worst_ratio:.3} steps in {elapsed:.2?}"
    ))
}

fn sellke_spot_value() -> Outcome {
    let b = sellke_bound(0.05).map_err(|e| e.to_string())?;
    // mpmath, 40 digits: 0.4071622301065057...
    if (b - 0.407160).abs() > 1e-5 {
        return Err(format!("sellke(0.05) = {b}"));
    }
    let knot = (-1.0f64).exp();
    let left = sellke_bound(knot * (1.0 - 1e-15)).map_err(|e| e.to_string())?;
    let right = sellke_bound(knot).map_err(|e| e.to_string())?;
    if (left - right).abs() > 1e-12 {
        return Err(format!("jump at 1/e: {left} vs {right}"));
    }
    Ok(format!(
        "sellke(0.05) = {b:.10}, jump at 1/e {:e}",
        (left - right).abs()
    ))
}

fn blending_criteria() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let trials = 200;
    for k in 0..trials {
        let n = 2 + k % 5;
        let p = random_dist(n, &mut rng);
        let b = random_dist(n, &mut rng);
        let got = blend(&ConstraintSet::singleton(&p), &b).map_err(|e| e.to_string())?;
        if got.projection != p {
            return Err(format!(
                "criterion 1, trial {k}: {:?}",
                got.projection.probs()
            ));
        }
    }
    for k in 0..trials {
        let n = 2 + k % 5;
        let b = random_dist(n, &mut rng);
        let set = box_around(&b, &mut rng);
        let got = blend(&set, &b).map_err(|e| e.to_string())?;
        if got.projection != b {
            return Err(format!(
                "criterion 2, trial {k}: {:?}",
                got.projection.probs()
            ));
        }
    }
    let mut tightest = f64::INFINITY;
    for k in 0..trials {
        let n = 2 + k % 3;
        let center = random_dist(n, &mut rng);
        let inner = box_around(&center, &mut rng);
        let lower = inner.lower().iter().map(|l| l * rng.gen::<f64>()).collect();
        let upper = inner
            .upper()
            .iter()
            .map(|u| u + (1.0 - u) * rng.gen::<f64>())
            .collect();
        let outer = ConstraintSet::new(atoms(n), lower, upper).unwrap();
        let b = random_dist(n, &mut rng);
        // The divergence is convex, so its sup over a box slice sits at a vertex.
        let sup = |s: &ConstraintSet| {
            common::box_simplex_vertices(s.lower(), s.upper())
                .iter()
                .map(|v| common::kl(v, b.probs()))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let inf_inner = divergence(&inner, &b);
        let inf_outer = divergence(&outer, &b);
        let d = (sup(&outer) - inf_inner).max(sup(&inner) - inf_outer);
        let shift = (inf_outer - inf_inner).abs();
        if shift > d + 1e-9 {
            return Err(format!("criterion 3, trial {k}: shift {shift} > D {d}"));
        }
        tightest = tightest.min(d - shift);
    }
    Ok(format!(
        "3 x {trials} instances, smallest slack in criterion 3 {tightest:.3e}"
    ))
}

fn t_cdf_accuracy() -> Outcome {
    let mut worst: f64 = 0.0;
    for df in [1.0, 2.0, 5.0, 10.0, 30.0, 100.0] {
        for t in [-10.0, -5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0, 10.0] {
            let got = t_cdf(t, df).map_err(|e| e.to_string())?;
            worst = worst.max((got - common::t_cdf_quadrature(t, df)).abs());
        }
    }
    if worst > 1e-8 {
        return Err(format!("max error {worst:e}"));
    }
    Ok(format!("max error {worst:e} over 54 points"))
}

fn pit_uniformity() -> Outcome {
    let truth = 1.3;
    let normal = Normal::new(truth, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(304);
    let start = Instant::now();
    let datasets = 10_000;
    let mut u = Vec::with_capacity(datasets);
    for _ in 0..datasets {
        let sample: Vec<f64> = (0..8).map(|_| normal.sample(&mut rng)).collect();
        let model = LocationModel::from_sample(&sample).map_err(|e| e.to_string())?;
        u.push(significance(&SignificanceFunction::new(model), truth).map_err(|e| e.to_string())?);
    }
    u.sort_by(f64::total_cmp);
    let n = datasets as f64;
    let ks = u
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i as f64 + 1.0) / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let critical = 1.628 / n.sqrt();
    if ks >= critical {
        return Err(format!("KS {ks:.5} >= {critical:.5}"));
    }
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("KS {ks:.5} < {critical:.5} in {elapsed:.2?}"))
}

fn maxent_midpoint() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(305);
    for _ in 0..1000 {
        let input = TestInput::new(1.0 - rng.gen::<f64>(), rng.gen()).unwrap();
        let m = maxent_alternative(&input).map_err(|e| e.to_string())?;
        let phi = lfdr_lower_bound(&input).map_err(|e| e.to_string())?;
        if m != (1.0 + phi) / 2.0 {
            return Err(format!("{input:?}: {m} vs {}", (1.0 + phi) / 2.0));
        }
    }
    for p in [1e-6, 0.05, 0.5, 1.0] {
        let low = maxent_alternative(&TestInput::new(p, 0.0).unwrap()).unwrap();
        let high = maxent_alternative(&TestInput::new(p, 1.0).unwrap()).unwrap();
        if low != 0.5 || high != 1.0 {
            return Err(format!("endpoints at p={p}: {low}, {high}"));
        }
    }
    Ok("1000 inputs exact, endpoints 0.5 and 1".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 boundary rows of the table", boundary_rows),
        ("2 monotone blended surface", monotone_surface),
        (
            "3 closed form equals binary projection",
            testing_matches_projection,
        ),
        ("4 maximin game equals projection", game_matches_projection),
        ("5 sellke spot value and continuity", sellke_spot_value),
        ("6 blending criteria 1-3", blending_criteria),
        ("7 student t cdf accuracy", t_cdf_accuracy),
        ("8 probability integral transform", pit_uniformity),
        ("9 maxent alternative midpoint", maxent_midpoint),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {name}: {detail}");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
