//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p blindsync --test acceptance`.

#![allow(clippy::needless_range_loop)]

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blindsync::cost::{Configuration, NetworkConfig};
use blindsync::dither::{check_frequencies, generate_frequencies};
use blindsync::dynamics::{averaging_residual, gradient_field_so3};
use blindsync::experiment::csv::to_csv_string;
use blindsync::experiment::{
    load_config, load_config_file, read_csv, run, ultimate_bound, ExperimentConfig, Mode,
};
use blindsync::lie::{exp_se3, exp_so3};
use blindsync::{AlgebraVector, DitherSchedule, Execution, GroupElement, GroupTag, SyncCost};

type M4 = [[f64; 4]; 4];
type Check = fn() -> Outcome;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn matmul(a: &M4, b: &M4, d: usize) -> M4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..d {
        for j in 0..d {
            c[i][j] = (0..d).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// Algebra element written out from the generator matrices directly.
fn generator_sum(v: &[f64]) -> (M4, usize) {
    let mut m = [[0.0; 4]; 4];
    // so(3) part: e1 couples rows 0/1, e2 rows 1/2, e3 rows 0/2.
    m[0][1] = v[0];
    m[1][0] = -v[0];
    m[1][2] = v[1];
    m[2][1] = -v[1];
    m[0][2] = v[2];
    m[2][0] = -v[2];
    if v.len() == 6 {
        m[0][3] = v[3];
        m[1][3] = v[4];
        m[2][3] = v[5];
        (m, 4)
    } else {
        (m, 3)
    }
}

fn series_exp(v: &[f64], terms: usize) -> (M4, usize) {
    let (x, d) = generator_sum(v);
    let mut sum = [[0.0; 4]; 4];
    let mut term = [[0.0; 4]; 4];
    for i in 0..d {
        sum[i][i] = 1.0;
        term[i][i] = 1.0;
    }
    for k in 1..terms {
        term = matmul(&term, &x, d);
        for row in term.iter_mut().take(d) {
            for e in row.iter_mut().take(d) {
                *e /= k as f64;
            }
        }
        for i in 0..d {
            for j in 0..d {
                sum[i][j] += term[i][j];
            }
        }
    }
    (sum, d)
}

fn max_gap(g: &GroupElement<f64>, m: &M4, d: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((g.matrix()[(i, j)] - m[i][j]).abs());
        }
    }
    worst
}

fn random_rotation_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let d: [f64; 3] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            let r = rng.gen_range(0.0..=PI);
            return [d[0] / n * r, d[1] / n * r, d[2] / n * r];
        }
    }
}

fn random_element(rng: &mut ChaCha8Rng, tag: GroupTag) -> GroupElement<f64> {
    let r = random_rotation_vector(rng);
    let coords: Vec<f64> = match tag {
        GroupTag::So3 => r.to_vec(),
        GroupTag::Se3 => {
            let mut c = r.to_vec();
            c.extend((0..3).map(|_| rng.gen_range(-3.0..3.0)));
            c
        }
    };
    blindsync::lie::exp(&AlgebraVector::new(tag, &coords).unwrap())
}

fn random_config(rng: &mut ChaCha8Rng, tag: GroupTag, agents: usize) -> Configuration<f64> {
    Configuration::new((0..agents).map(|_| random_element(rng, tag)).collect()).unwrap()
}

/// `Σ (3 − tr(R_iᵀR_j)) + ½‖t_i − t_j‖²` from raw entries.
fn trace_cost(edges: &[(usize, usize)], states: &[GroupElement<f64>]) -> f64 {
    edges
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (states[i].matrix(), states[j].matrix());
            let mut tr = 0.0;
            for r in 0..3 {
                for c in 0..3 {
                    tr += a[(r, c)] * b[(r, c)];
                }
            }
            let mut sq = 0.0;
            if a.dim() == 4 {
                for r in 0..3 {
                    sq += (a[(r, 3)] - b[(r, 3)]).powi(2);
                }
            }
            3.0 - tr + 0.5 * sq
        })
        .sum()
}

fn orthogonality(g: &GroupElement<f64>) -> f64 {
    let m = g.matrix();
    let mut sq = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| m[(k, i)] * m[(k, j)]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            sq += (dot - target).powi(2);
        }
    }
    sq.sqrt()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(elapsed: Duration, limit_s: u64, pass: bool, detail: String) -> Outcome {
    let in_time = elapsed <= Duration::from_secs(limit_s);
    Outcome {
        pass: pass && in_time,
        detail: format!("{detail}; {:.1}s of {limit_s}s", elapsed.as_secs_f64()),
    }
}

fn exp_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut so3, mut se3) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let r = random_rotation_vector(&mut rng);
        let v = AlgebraVector::new(GroupTag::So3, &r).unwrap();
        let (m, d) = series_exp(&r, 30);
        so3 = so3.max(max_gap(&exp_so3(&v), &m, d));

        let r = random_rotation_vector(&mut rng);
        let c = [
            r[0],
            r[1],
            r[2],
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        ];
        let v = AlgebraVector::new(GroupTag::Se3, &c).unwrap();
        let (m, d) = series_exp(&c, 30);
        se3 = se3.max(max_gap(&exp_se3(&v), &m, d));
    }
    within(
        start.elapsed(),
        5,
        so3 <= 1e-10 && se3 <= 1e-9,
        format!("max entry error so3 {so3:.2e}, se3 {se3:.2e}"),
    )
}

fn group_closure() -> Outcome {
    let start = Instant::now();
    let probe = load_config("group = so3\nagents = 3\nseed = 11\n").unwrap();
    let dt = probe.step_size();
    let cfg = ExperimentConfig {
        t_final: 1e5 * dt,
        dt: Some(dt),
        record_every: Some(100),
        ..probe
    };
    let rec = run(&cfg).unwrap();
    let steps = (rec.times.last().unwrap() / dt).round() as u64;
    let worst = rec
        .states
        .as_ref()
        .unwrap()
        .iter()
        .flat_map(|c| c.states().iter().map(orthogonality))
        .fold(0.0f64, f64::max);
    within(
        start.elapsed(),
        30,
        steps >= 100_000 && worst < 1e-10,
        format!(
            "{steps} steps, {} samples, max ‖RᵀR − I‖ {worst:.2e}",
            rec.len()
        ),
    )
}

fn cost_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for tag in [GroupTag::So3, GroupTag::Se3] {
        let net = NetworkConfig::complete(tag, 4).unwrap();
        for _ in 0..100 {
            let cfg = random_config(&mut rng, tag, 4);
            let gc = random_element(&mut rng, tag);
            let moved = cfg.left_translate(&gc).unwrap();
            let (j0, j1) = (net.evaluate(cfg.states()), net.evaluate(moved.states()));
            worst = worst.max((j1 - j0).abs() / (1.0 + j0));
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("max relative deviation {worst:.2e} over 200 pairs"),
    }
}

fn gradient_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let net = NetworkConfig::complete(GroupTag::So3, 3).unwrap();
    let eps = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let cfg = random_config(&mut rng, GroupTag::So3, 3);
        let u = gradient_field_so3(&net, &cfg).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let e = AlgebraVector::basis(GroupTag::So3, k).scale(eps);
                let mut plus = cfg.states().to_vec();
                plus[j] = cfg.states()[j].right_exp(&e);
                let mut minus = cfg.states().to_vec();
                minus[j] = cfg.states()[j].right_exp(&-e);
                let d = (trace_cost(net.edges(), &plus) - trace_cost(net.edges(), &minus))
                    / (2.0 * eps);
                // ⟨hat u, hat e_k⟩_F = 2 u_k equals the descent direction −D_k.
                worst = worst.max((2.0 * u.velocities[j].coords()[k] + d).abs());
            }
        }
    }
    Outcome {
        pass: worst <= 5e-6,
        detail: format!("max |2u_k + ∂_k J| {worst:.2e} over 50 configurations"),
    }
}

fn averaging_order() -> Outcome {
    let start = Instant::now();
    let net = NetworkConfig::complete(GroupTag::So3, 2).unwrap();
    let rot = |v: [f64; 3]| exp_so3(&AlgebraVector::new(GroupTag::So3, &v).unwrap());
    let cfg = Configuration::new(vec![rot([0.3, -0.2, 0.9]), rot([-1.1, 0.4, 0.2])]).unwrap();
    let base = DitherSchedule::uniform(GroupTag::So3, 2, 0.2, 1.0).unwrap();
    let r: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&a| averaging_residual(&net, &cfg, &base.with_uniform_amplitude(a).unwrap()))
        .collect();
    let ratios = [r[0] / r[1], r[1] / r[2]];
    within(
        start.elapsed(),
        60,
        ratios.iter().all(|q| (8.0..=32.0).contains(q)),
        format!(
            "R = {:.3e}, {:.3e}, {:.3e}; ratios {:.2}, {:.2}",
            r[0], r[1], r[2], ratios[0], ratios[1]
        ),
    )
}

/// Set-based restatement of the multiplier constraints.
fn recheck(w: &[u64]) -> bool {
    let values: HashSet<u64> = w.iter().copied().collect();
    if values.len() != w.len() || values.contains(&0) {
        return false;
    }
    for &a in w {
        if values.contains(&(2 * a)) {
            return false;
        }
        for &b in w {
            if a != b && values.contains(&(a + b)) {
                return false;
            }
        }
    }
    true
}

fn frequency_validator() -> Outcome {
    let universe: Vec<u64> = (1..=12).collect();
    let mut subsets = 0;
    let mut disagreements = 0;
    for mask in 1u32..(1 << 12) {
        if mask.count_ones() > 4 {
            continue;
        }
        let w: Vec<u64> = universe
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &x)| x)
            .collect();
        subsets += 1;
        if check_frequencies(&w).is_valid() != recheck(&w) {
            disagreements += 1;
        }
    }

    let gen = generate_frequencies(9);
    let generated_valid = check_frequencies(&gen).is_valid() && recheck(&gen);
    // Rectangle rule over one 2π period is exact for trigonometric
    // polynomials of degree below the node count.
    let nodes = 1024;
    let avg = |f: &dyn Fn(f64) -> f64| {
        (0..nodes)
            .map(|k| f(2.0 * PI * k as f64 / nodes as f64))
            .sum::<f64>()
            / nodes as f64
    };
    let mut worst = 0.0f64;
    let n = gen.len();
    for p in 0..n {
        for q in (p + 1)..n {
            let (a, b) = (gen[p] as f64, gen[q] as f64);
            worst = worst.max(avg(&|t| (a * t).sin() * (b * t).sin()).abs());
            for &c in &gen[q + 1..] {
                let c = c as f64;
                worst = worst.max(avg(&|t| (a * t).sin() * (b * t).sin() * (c * t).sin()).abs());
            }
        }
    }
    Outcome {
        pass: disagreements == 0 && generated_valid && worst < 1e-10,
        detail: format!(
            "{disagreements} disagreements over {subsets} subsets; generate(9) = {gen:?}; max mixed average {worst:.1e}"
        ),
    }
}

fn so3_reproduction() -> Outcome {
    let start = Instant::now();
    let mut cfg = load_config_file(fixture("so3_example.conf")).unwrap();
    cfg.record_states = false;
    let es = run(&cfg).unwrap();
    let (j0, jf) = (es.initial_cost().unwrap(), es.final_cost().unwrap());

    let grad = ExperimentConfig {
        dt: Some(1e-3),
        t_final: 20.0,
        ..cfg.with_mode(Mode::GradientFlow).unwrap()
    };
    let gf = run(&grad).unwrap();
    let g_final = gf.final_cost().unwrap();
    within(
        start.elapsed(),
        120,
        jf < 0.1 * j0 && g_final < 1e-6,
        format!(
            "ES J {j0:.4} → {jf:.3e} at t = {}; gradient J → {g_final:.3e} at t = 20",
            cfg.t_final
        ),
    )
}

fn se3_reproduction() -> Outcome {
    let start = Instant::now();
    let cfg = load_config_file(fixture("se3_example.conf")).unwrap();
    let rec = run(&cfg).unwrap();
    let (j0, jf) = (rec.initial_cost().unwrap(), rec.final_cost().unwrap());
    let last = rec.final_states().unwrap().states();
    let mut spread = 0.0f64;
    for a in last {
        for b in last {
            let d: f64 = (0..3)
                .map(|r| (a.matrix()[(r, 3)] - b.matrix()[(r, 3)]).powi(2))
                .sum();
            spread = spread.max(d.sqrt());
        }
    }
    within(
        start.elapsed(),
        180,
        jf < 0.1 * j0 && spread < 0.5,
        format!("J {j0:.4} → {jf:.3e}; final translation spread {spread:.3e}"),
    )
}

fn frequency_trend() -> Outcome {
    let mut held = 0;
    let mut lines = Vec::new();
    for seed in 1..=3u64 {
        let cfg = load_config(&format!(
            "group = so3\nagents = 3\nseed = {seed}\ninit_spread = 0.01\nrecord_states = false\n"
        ))
        .unwrap();
        let slow = ultimate_bound(&run(&cfg).unwrap(), 0.2).unwrap();
        let fast = ultimate_bound(&run(&cfg.with_omega(160.0).unwrap()).unwrap(), 0.2).unwrap();
        if fast <= slow + 1e-3 {
            held += 1;
        }
        lines.push(format!("seed {seed}: {slow:.3e} → {fast:.3e}"));
    }
    Outcome {
        pass: held >= 2,
        detail: format!("bound ω=40 → ω=160, {held}/3 held ({})", lines.join(", ")),
    }
}

fn determinism() -> Outcome {
    let cfg = load_config("group = se3\nagents = 3\nseed = 21\nt_final = 5\n").unwrap();
    let a = to_csv_string(&run(&cfg).unwrap());
    let b = to_csv_string(&run(&cfg).unwrap());
    let par = ExperimentConfig {
        execution: Execution::Parallel,
        ..cfg
    };
    let c = to_csv_string(&run(&par).unwrap());

    let (ra, rc) = (read_csv(&a).unwrap(), read_csv(&c).unwrap());
    let mut worst = 0.0f64;
    let flat = |r: &blindsync::experiment::SimulationRecord| -> Vec<f64> {
        let mut v = [r.times.clone(), r.costs.clone(), r.dispersions.clone()].concat();
        for cfg in r.states.as_ref().unwrap() {
            for g in cfg.states() {
                v.extend(g.matrix().to_row_major());
            }
        }
        v
    };
    let (fa, fc) = (flat(&ra), flat(&rc));
    for (x, y) in fa.iter().zip(&fc) {
        worst = worst.max((x - y).abs());
    }
    Outcome {
        pass: a == b && fa.len() == fc.len() && worst <= 1e-13,
        detail: format!(
            "serial runs identical: {}; {} bytes; parallel max deviation {worst:.1e}",
            a == b,
            a.len()
        ),
    }
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("exponential-map oracles", exp_oracles),
        ("group closure", group_closure),
        ("cost invariance", cost_invariance),
        ("gradient consistency", gradient_consistency),
        ("averaging order", averaging_order),
        ("frequency validator", frequency_validator),
        ("SO(3) three-agent reproduction", so3_reproduction),
        ("SE(3) three-agent reproduction", se3_reproduction),
        ("ultimate bound vs. base frequency", frequency_trend),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            k + 1,
            outcome.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
