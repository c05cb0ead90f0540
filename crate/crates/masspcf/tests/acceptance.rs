//! Acceptance criteria, one status line each on stderr.

use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use masspcf::core::integrate::{combine_integrate, l2_inner_product, lp_distance};
use masspcf::core::reduce::{reduce_pair, Normalization};
use masspcf::core::{iterate_rectangles, mean, std_dev, tree_reduce, variance};
use masspcf::datagen::{synthetic_benchmark, RngSpec};
use masspcf::io::{read_json, read_matrix_csv, PcfCollection};
use masspcf::workers::available;
use masspcf::{
    l2_kernel, par_mean, par_std_dev, par_tree_reduce, pdist, Bounds, LpDistance, PairwiseJob, Pcf,
    PcfError,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

enum Verdict {
    Pass(String),
    NotEvaluable(String),
}

type Check = Result<Verdict, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if let false = $cond {
            return Err(format!($($msg)+));
        }
    };
}

fn criterion(name: &str, limit: Duration, body: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let timing = format!(
        "{:.2} s, limit {} s",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    let (tag, detail, ok) = match outcome {
        Ok(Verdict::Pass(d)) if elapsed <= limit => ("PASS", d, true),
        Ok(Verdict::Pass(d)) => ("FAIL", format!("{d}; over time limit"), false),
        Ok(Verdict::NotEvaluable(d)) => ("NOT EVALUABLE", d, true),
        Err(d) => ("FAIL", d, false),
    };
    let line = format!("acceptance [{tag}] {name}: {detail} ({timing})\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    ok
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn guide() -> Vec<Pcf<f64>> {
    [
        &[[0., 5.], [2., 3.], [5., 0.]][..],
        &[[0., 2.], [4., 7.], [8., 1.], [9., 0.]],
        &[[0., 4.], [2., 3.], [3., 1.], [5., 0.]],
        &[[0., 2.], [6., 1.], [7., 0.]],
    ]
    .iter()
    .map(|r| Pcf::from_rows(r).unwrap())
    .collect()
}

/// Random PCF with a size drawn from `sizes`, integer-grid or continuous times, and a zero
/// tail when `zero_tail` holds.
fn random_pcf<R: Rng>(
    r: &mut R,
    sizes: std::ops::RangeInclusive<usize>,
    zero_tail: bool,
) -> Pcf<f64> {
    let n = r.random_range(sizes);
    let coarse = r.random_bool(0.3);
    let mut t = 0.0;
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let v = if coarse {
            r.random_range(-3i32..=3) as f64
        } else {
            r.random_range(-10.0..10.0)
        };
        rows.push([t, v]);
        if k + 1 < n {
            t += if coarse {
                r.random_range(1u32..=3) as f64
            } else {
                r.random_range(1e-3..2.0)
            };
        }
    }
    if zero_tail {
        rows[n - 1][1] = 0.0;
    }
    Pcf::new(rows).unwrap()
}

fn golden() -> Check {
    let x = guide();
    let l1 = pdist(&x, 1.0, None).map_err(|e| e.to_string())?;
    ensure!(
        l1.to_nested()
            == [
                [0., 34., 6., 12.],
                [34., 0., 34., 24.],
                [6., 34., 0., 10.],
                [12., 24., 10., 0.]
            ],
        "pdist p=1 {:?}",
        l1.to_nested()
    );
    let k = l2_kernel(&x, None).map_err(|e| e.to_string())?;
    ensure!(
        k.to_nested()
            == [
                [77., 53., 55., 38.],
                [53., 213., 31., 51.],
                [55., 31., 43., 26.],
                [38., 51., 26., 25.]
            ],
        "l2_kernel {:?}",
        k.to_nested()
    );
    let printed = [
        [0., 9.80058139, 2.49774585, 3.81895602],
        [9.80058139, 0., 10.10250875, 8.76880217],
        [2.49774585, 10.10250875, 0., 2.82601424],
        [3.81895602, 8.76880217, 2.82601424, 0.],
    ];
    let d = pdist(&x, 3.5, None).map_err(|e| e.to_string())?;
    let worst = (0..16)
        .map(|k| (d.get(k / 4, k % 4) - printed[k / 4][k % 4]).abs())
        .fold(0.0, f64::max);
    ensure!(worst < 1e-7, "p=3.5 deviates by {worst}");
    Ok(Verdict::Pass(format!(
        "p=1 and Gram exact, p=3.5 max deviation {worst:.1e}"
    )))
}

/// Union of both time sets clipped to `(a, b)`, bracketed by `a` and `b`.
fn union_grid(f: &Pcf<f64>, g: &Pcf<f64>, a: f64, b: f64) -> Vec<f64> {
    let mut inner: Vec<f64> = f
        .times()
        .chain(g.times())
        .filter(|&t| a < t && t < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    let mut grid = vec![a];
    grid.extend(inner);
    grid.push(b);
    grid
}

fn rectangle_oracle() -> Check {
    let mut r = rng(1);
    let mut cells = 0usize;
    for case in 0..1000 {
        let f = random_pcf(&mut r, 1..=200, false);
        let g = random_pcf(&mut r, 1..=200, false);
        let horizon = f.time(f.len() - 1).max(g.time(g.len() - 1)) * 1.2 + 1.0;
        let (a, b) = if r.random_bool(0.2) {
            // bounds on existing breakpoints
            let a = f.time(r.random_range(0..f.len()));
            (a, a + g.time(g.len() - 1) + 1.0)
        } else {
            let a = r.random_range(0.0..horizon);
            (a, r.random_range(a + 1e-6..horizon + 1.0))
        };
        let grid = union_grid(&f, &g, a, b);
        let mut edges = vec![];
        let mut values = vec![];
        iterate_rectangles(&f, &g, a, b, |c| {
            if edges.is_empty() {
                edges.push(c.left);
            }
            ensure_eq_push(&mut edges, c.left, c.right);
            values.push((c.f_value, c.g_value));
        })
        .map_err(|e| e.to_string())?;
        ensure!(
            edges == grid,
            "case {case}: edges {edges:?} != union grid {grid:?}"
        );
        for (k, &(fv, gv)) in values.iter().enumerate() {
            let l = grid[k];
            ensure!(
                fv == f.evaluate(l).unwrap() && gv == g.evaluate(l).unwrap(),
                "case {case}: wrong values on cell {k}"
            );
        }
        cells += values.len();

        let h = |x: f64, y: f64| (x - y).abs() * (1.0 + x * y);
        let mut explicit = 0.0f64;
        for w in grid.windows(2) {
            explicit += h(f.evaluate(w[0]).unwrap(), g.evaluate(w[0]).unwrap()) * (w[1] - w[0]);
        }
        let got =
            combine_integrate(&f, &g, h, Bounds::new(a, b).unwrap()).map_err(|e| e.to_string())?;
        ensure!(
            got.to_bits() == explicit.to_bits(),
            "case {case}: integral {got} != explicit sum {explicit}"
        );
    }
    Ok(Verdict::Pass(format!(
        "1000 pairs, {cells} cells, edges and integrals bitwise equal"
    )))
}

/// Pushes `right` after checking that the cell starts where the last one
/// ended.
fn ensure_eq_push(edges: &mut Vec<f64>, left: f64, right: f64) {
    assert_eq!(*edges.last().unwrap(), left, "cells are not contiguous");
    edges.push(right);
}

fn union_of_times(items: &[Pcf<f64>]) -> Vec<f64> {
    let mut ts: Vec<f64> = items.iter().flat_map(|f| f.times()).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

fn close(got: f64, want: f64, scale: f64) -> bool {
    (got - want).abs() <= 1e-9 * want.abs().max(scale)
}

fn reduction_oracle() -> Check {
    let mut r = rng(2);
    let mut probes = 0;
    for case in 0..200 {
        let m = r.random_range(1..=16);
        let items: Vec<Pcf<f64>> = (0..m).map(|_| random_pcf(&mut r, 1..=40, false)).collect();

        let max = |a: f64, b: f64| a.max(b);
        let mut fold = items[0].minimize_discretization();
        for f in &items[1..] {
            fold = reduce_pair(&fold, f, max).unwrap();
        }
        let tree = tree_reduce(&items, max).map_err(|e| e.to_string())?;
        ensure!(
            tree == fold,
            "case {case}: tree max differs from sequential fold"
        );
        let par = par_tree_reduce(&items, max, Some(4)).map_err(|e| e.to_string())?;
        ensure!(par == tree, "case {case}: parallel tree differs");

        let avg = mean(&items).map_err(|e| e.to_string())?;
        ensure!(
            par_mean(&items, Some(3)).unwrap() == avg,
            "case {case}: parallel mean differs"
        );
        let sd = if m >= 2 {
            let sd = std_dev(&items).map_err(|e| e.to_string())?;
            ensure!(
                par_std_dev(&items, Some(3)).unwrap() == sd,
                "case {case}: parallel std differs"
            );
            Some(sd)
        } else {
            ensure!(
                std_dev(&items) == Err(PcfError::InsufficientData { needed: 2, got: 1 }),
                "case {case}: std of one PCF should fail"
            );
            None
        };

        let scale = items
            .iter()
            .flat_map(|f| f.values())
            .fold(1.0f64, |s, v| s.max(v.abs()));
        let grid = union_of_times(&items);
        let end = grid[grid.len() - 1] * 1.25 + 1.0;
        for k in 0..100 {
            // breakpoints and random points in between
            let t = if k % 3 == 0 {
                grid[r.random_range(0..grid.len())]
            } else {
                r.random_range(0.0..end)
            };
            let vals: Vec<f64> = items.iter().map(|f| f.evaluate(t).unwrap()).collect();
            let mu = vals.iter().sum::<f64>() / m as f64;
            ensure!(
                close(avg.evaluate(t).unwrap(), mu, scale),
                "case {case}: mean at {t}"
            );
            if let Some(sd) = &sd {
                let var = vals.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (m - 1) as f64;
                ensure!(
                    close(sd.evaluate(t).unwrap(), var.sqrt(), scale),
                    "case {case}: std at {t}: {} vs {}",
                    sd.evaluate(t).unwrap(),
                    var.sqrt()
                );
            }
            probes += 1;
        }
    }
    // population variance shares the same path
    let _ = variance(&guide(), Normalization::Population).map_err(|e| e.to_string())?;
    Ok(Verdict::Pass(format!(
        "200 collections, {probes} probes within 1e-9"
    )))
}

fn masspcf_bin(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_masspcf"))
        .args(args)
        .env_remove("MASSPCF_THREADS")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn determinism() -> Check {
    let items = synthetic_benchmark::<f64>(500, RngSpec::new(2024));
    let lp = LpDistance::new(1.0).unwrap();
    let run = |w: usize| {
        PairwiseJob::new(&items, &lp)
            .workers(Some(w))
            .no_serial_fallback()
            .run()
    };
    let one = run(1).map_err(|e| e.to_string())?;
    for w in [2, 8] {
        let m = run(w).map_err(|e| e.to_string())?;
        let same = m
            .as_slice()
            .iter()
            .zip(one.as_slice())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        ensure!(same, "{w} workers differ from 1 worker");
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = vec![];
    for (run, threads) in [(0, "1"), (1, "8")] {
        let gen = dir.path().join(format!("gen{run}.json"));
        let gen = gen.to_str().unwrap();
        masspcf_bin(&[
            "generate",
            "--kind",
            "synthetic",
            "--count",
            "500",
            "--seed",
            "2024",
            "-o",
            gen,
        ])?;
        outputs.push((
            fs::read(gen).unwrap(),
            masspcf_bin(&["pdist", gen, "-q", "--threads", threads])?,
        ));
    }
    ensure!(
        outputs[0].0 == outputs[1].0,
        "generated collections differ between processes"
    );
    ensure!(
        outputs[0].1 == outputs[1].1,
        "pdist output differs between processes"
    );
    let PcfCollection::F64(reloaded) =
        read_json(&dir.path().join("gen0.json")).map_err(|e| e.to_string())?
    else {
        return Err("wrong dtype".into());
    };
    ensure!(
        reloaded == items,
        "CLI generator differs from library generator"
    );
    Ok(Verdict::Pass(
        "500 synthetic PCFs: workers 1/2/8 and two processes bitwise identical".into(),
    ))
}

fn scaling() -> Check {
    let items = synthetic_benchmark::<f64>(2500, RngSpec::new(77));
    let mut r = rng(5);
    for _ in 0..2000 {
        let f = &items[r.random_range(0..items.len())];
        let g = &items[r.random_range(0..items.len())];
        let mut calls = 0;
        iterate_rectangles(f, g, 0.0, f64::INFINITY, |_| calls += 1).unwrap();
        ensure!(
            calls <= f.len() + g.len() + 1,
            "{calls} callbacks for sizes {} and {}",
            f.len(),
            g.len()
        );
    }

    let lp = LpDistance::new(1.0).unwrap();
    let time = |w: usize| {
        let start = Instant::now();
        let m = PairwiseJob::new(&items, &lp)
            .workers(Some(w))
            .no_serial_fallback()
            .run()
            .unwrap();
        (start.elapsed().as_secs_f64(), m)
    };
    let (t1, m1) = time(1);
    let (t4, m4) = time(4);
    ensure!(m1 == m4, "matrices differ between 1 and 4 workers");
    let speedup = t1 / t4;
    let cores = available();
    let detail = format!("callbacks <= |f|+|g|+1 on 2000 pairs; 1 worker {t1:.2} s, 4 workers {t4:.2} s, speedup {speedup:.2}x on {cores} core(s)");
    if cores < 4 {
        return Ok(Verdict::NotEvaluable(format!(
            "{detail}; speedup target needs at least 4 cores"
        )));
    }
    ensure!(speedup >= 2.5, "{detail}; below 2.5x");
    Ok(Verdict::Pass(detail))
}

fn metric_algebra() -> Check {
    let mut r = rng(6);
    let unb = Bounds::unbounded();
    let mut worst_slack = 0.0f64;
    for case in 0..500 {
        let fs: Vec<Pcf<f64>> = (0..3).map(|_| random_pcf(&mut r, 1..=60, true)).collect();
        let (f, g, h) = (&fs[0], &fs[1], &fs[2]);
        for p in [1.0, 2.0, 3.5] {
            let d = |x: &Pcf<f64>, y: &Pcf<f64>| lp_distance(x, y, p, unb).unwrap();
            let (fg, gh, fh) = (d(f, g), d(g, h), d(f, h));
            ensure!(
                fg.to_bits() == d(g, f).to_bits(),
                "case {case}: asymmetric for p={p}"
            );
            ensure!(d(f, f) == 0.0, "case {case}: d(f,f) != 0 for p={p}");
            ensure!(
                fh <= fg + gh + 1e-9 * (fg + gh).max(1.0),
                "case {case}: triangle p={p}: {fh} > {fg} + {gh}"
            );
            worst_slack = worst_slack.max(fh - fg - gh);
        }

        let (a, b) = (r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let combo = reduce_pair(&f.scale(a).unwrap(), &g.scale(b).unwrap(), |x, y| x + y).unwrap();
        let ip = |x: &Pcf<f64>, y: &Pcf<f64>| l2_inner_product(x, y, unb).unwrap();
        let lhs = ip(&combo, h);
        let rhs = a * ip(f, h) + b * ip(g, h);
        let mag = (a * ip(f, h)).abs() + (b * ip(g, h)).abs();
        ensure!(
            (lhs - rhs).abs() <= 1e-9 * mag.max(1.0),
            "case {case}: bilinearity {lhs} vs {rhs}"
        );
        ensure!(
            ip(f, g).to_bits() == ip(g, f).to_bits(),
            "case {case}: Gram asymmetric"
        );

        let padded = Pcf::new(
            f.as_matrix()
                .iter()
                .flat_map(|p| [*p, [p[0] + 1e-4, p[1]]])
                .take(2 * f.len() - 1)
                .collect(),
        )
        .unwrap();
        let min = padded.minimize_discretization();
        ensure!(
            min.is_minimal() && min.minimize_discretization() == min,
            "case {case}: minimize not idempotent"
        );
        ensure!(
            min == f.minimize_discretization(),
            "case {case}: minimal form depends on padding"
        );
    }

    // validation fuzz: acceptance matches the independent predicate
    let mut accepted = 0;
    for case in 0..5000 {
        let n = r.random_range(0..8);
        let rows: Vec<[f64; 2]> = (0..n)
            .map(|_| {
                let t = match r.random_range(0..10) {
                    0 => -1.0,
                    1 => f64::NAN,
                    2 => f64::INFINITY,
                    3 => 0.0,
                    _ => r.random_range(0..6) as f64,
                };
                let v = if r.random_bool(0.05) {
                    f64::NAN
                } else {
                    r.random_range(-2.0..2.0)
                };
                [t, v]
            })
            .collect();
        let valid = !rows.is_empty()
            && rows[0][0] == 0.0
            && rows.iter().all(|p| p[0].is_finite() && p[1].is_finite())
            && rows.windows(2).all(|w| w[0][0] < w[1][0]);
        let built = Pcf::new(rows.clone());
        ensure!(
            built.is_ok() == valid,
            "case {case}: validation of {rows:?} gave {built:?}"
        );
        if let Ok(f) = built {
            accepted += 1;
            ensure!(f.as_matrix() == &rows[..], "case {case}: rows altered");
        }
    }
    Ok(Verdict::Pass(format!(
        "500 triples x p in {{1, 2, 3.5}}, worst triangle slack {worst_slack:.1e}; {accepted}/5000 fuzz rows valid, all classified correctly"
    )))
}

fn cli_round_trip() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let mut gens = vec![];
    let mut mats = vec![];
    for run in 0..2 {
        let g = path(&format!("g{run}.json"));
        let m = path(&format!("m{run}.csv"));
        masspcf_bin(&[
            "generate",
            "--kind",
            "synthetic",
            "--count",
            "60",
            "--seed",
            "31",
            "-o",
            &g,
        ])?;
        masspcf_bin(&["pdist", &g, "--p", "2", "-q", "-o", &m])?;
        gens.push(fs::read(&g).unwrap());
        mats.push(fs::read(&m).unwrap());
    }
    ensure!(
        gens[0] == gens[1] && mats[0] == mats[1],
        "outputs not byte-identical across runs"
    );

    let PcfCollection::F64(items) =
        read_json(Path::new(&path("g0.json"))).map_err(|e| e.to_string())?
    else {
        return Err("wrong dtype".into());
    };
    let lib = pdist(&items, 2.0, Some(1)).map_err(|e| e.to_string())?;
    let reloaded: Vec<Vec<f64>> =
        read_matrix_csv(Path::new(&path("m0.csv"))).map_err(|e| e.to_string())?;
    let bits = |v: &mut dyn Iterator<Item = f64>| v.map(f64::to_bits).collect::<Vec<_>>();
    ensure!(
        bits(&mut reloaded.into_iter().flatten()) == bits(&mut lib.as_slice().iter().copied()),
        "reloaded matrix differs from library result"
    );

    let bad = path("bad.json");
    fs::write(
        &bad,
        "{\"dtype\":\"f64\",\"pcfs\":[[[0,1],[1,1]],\n[[0,1],[2,0],[2,1]]]}",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_masspcf"))
        .args(["pdist", &bad])
        .output()
        .unwrap();
    let err = String::from_utf8_lossy(&o.stderr);
    ensure!(
        o.status.code() == Some(2),
        "invalid JSON exited with {:?}",
        o.status.code()
    );
    ensure!(
        err.contains("bad.json") && err.contains("pcf 1, row 2"),
        "diagnostic lacks file/row: {err}"
    );

    let csv = dir.path().join("csv");
    fs::create_dir(&csv).unwrap();
    fs::write(csv.join("a.csv"), "t,v\n0,1\n3,0\n").unwrap();
    fs::write(csv.join("b.csv"), "t,v\n0,1\n2,x\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_masspcf"))
        .args(["kernel", csv.to_str().unwrap()])
        .output()
        .unwrap();
    let err = String::from_utf8_lossy(&o.stderr);
    ensure!(
        o.status.code() == Some(2),
        "invalid CSV exited with {:?}",
        o.status.code()
    );
    ensure!(
        err.contains("b.csv") && err.contains("line 3"),
        "diagnostic lacks file/line: {err}"
    );
    Ok(Verdict::Pass(
        "generate -> pdist -> reload bitwise; byte-identical reruns; exit 2 with file/row".into(),
    ))
}

#[test]
fn acceptance_criteria() {
    let s = Duration::from_secs;
    let results = [
        criterion("golden matrices", s(1), golden),
        criterion("rectangle-iteration oracle", s(10), rectangle_oracle),
        criterion("reduction oracle", s(30), reduction_oracle),
        criterion("determinism", s(60), determinism),
        criterion("scaling smoke", s(300), scaling),
        criterion("metric/algebra properties", s(60), metric_algebra),
        criterion("CLI round-trip", s(60), cli_round_trip),
    ];
    assert!(
        results.iter().all(|&ok| ok),
        "acceptance criteria failed: {results:?}"
    );
}
