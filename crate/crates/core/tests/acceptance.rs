//! Acceptance suite: one pass/fail line per criterion.
//!
//! Run with `cargo test -p ontofact --test acceptance -- --nocapture` to see
//! the report.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use ontofact::analysis::{ks_column_witness, psi_classify};
use ontofact::compression::{
    compress_method1, compress_method2_with_log, dedupe, exhaustive_method1, BlockUniformOF,
    CompressionParams, GridDistribution,
};
use ontofact::quantum::{
    kernaghan_instance, kernaghan_table, ks_noncontextual_search, pauli_qubit_table, realize,
    verify_realization,
};
use ontofact::render::{render_table, ImageFormat, BLACK, GREEN, RED, SEPARATOR, WHITE};
use ontofact::{
    binary_worst_case_table, determinize, model1, model2, model3, random_table, verify_of,
    DataTable, DeterminizePolicy, OntFactorization, RatMatrix, Rational,
};

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Every factorization built by the suite, for the rank bound check.
#[derive(Default)]
struct Produced(Vec<(String, usize, usize)>);

impl Produced {
    fn add(&mut self, label: &str, table: &DataTable, f: &OntFactorization) {
        self.0.push((label.to_string(), table.rank(), f.omega()));
    }
}

fn verified(table: &DataTable, f: &OntFactorization, what: &str) -> Check {
    let report = verify_of(table, f).map_err(|e| format!("{what}: {e}"))?;
    ensure!(
        report.valid,
        "{what}: {} violations",
        report.violations.len()
    );
    Ok(())
}

fn model2_table() -> DataTable {
    DataTable::new(
        3,
        2,
        2,
        RatMatrix::from_ints(&[&[0, 4], &[2, 2], &[4, 0], &[2, 3], &[2, 3], &[2, 0]], 6),
    )
    .unwrap()
}

fn criterion_1(produced: &mut Produced) -> Check {
    let t = model2_table();
    let f = model2(&t).map_err(|e| e.to_string())?;
    let m = RatMatrix::from_ints(
        &[
            &[1, 1, 1, 0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 1, 1, 1, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0, 1, 1, 1],
            &[1, 0, 0, 1, 0, 0, 1, 0, 0],
            &[0, 1, 0, 0, 1, 0, 0, 1, 0],
            &[0, 0, 1, 0, 0, 1, 0, 0, 1],
        ],
        1,
    );
    let p = RatMatrix::from_ints(
        &[
            &[0, 6],
            &[0, 6],
            &[0, 0],
            &[2, 3],
            &[2, 3],
            &[2, 0],
            &[4, 0],
            &[4, 0],
            &[4, 0],
        ],
        18,
    );
    ensure!(f.m() == &m, "M differs");
    ensure!(f.p() == &p, "P differs");
    produced.add("model2 sample table", &t, &f);
    verified(&t, &f, "model2")
}

fn criterion_2(produced: &mut Produced) -> Check {
    let t = model2_table();
    let f = model3(&t).map_err(|e| e.to_string())?;
    ensure!(f.omega() == 6, "omega {} != 6", f.omega());
    let mut weights: Vec<(Vec<usize>, Rational)> = (0..f.omega())
        .filter(|&j| !f.p().get(j, 1).is_zero())
        .map(|j| (f.outcome_pattern(j, 3).unwrap(), f.p().get(j, 1).clone()))
        .collect();
    weights.sort();
    let expected = vec![
        (vec![0, 0], Rational::new(1, 6)),
        (vec![0, 1], Rational::new(1, 2)),
        (vec![1, 0], Rational::new(1, 3)),
    ];
    ensure!(weights == expected, "column 2 decomposition {weights:?}");
    produced.add("model3 sample table", &t, &f);
    verified(&t, &f, "model3")
}

fn criterion_3(produced: &mut Produced) -> Check {
    let t = DataTable::new(
        2,
        2,
        2,
        RatMatrix::from_ints(&[&[6, 8], &[6, 4], &[9, 12], &[3, 0]], 12),
    )
    .unwrap();
    let f = determinize(&t, &model1(&t).unwrap(), DeterminizePolicy::Contiguous)
        .map_err(|e| e.to_string())?;
    ensure!(f.omega() == 7, "omega {} != 7", f.omega());
    ensure!(f.is_deterministic(), "M is not 0/1");
    let quarter: Vec<usize> = (0..7)
        .filter(|&j| f.p().get(j, 0) == &Rational::new(1, 4))
        .collect();
    let third: Vec<usize> = (0..7)
        .filter(|&j| f.p().get(j, 1) == &Rational::new(1, 3))
        .collect();
    ensure!(
        quarter.len() == 4 && third.len() == 3,
        "block sizes {} / {}",
        quarter.len(),
        third.len()
    );
    ensure!(
        quarter.iter().all(|j| !third.contains(j)),
        "P blocks overlap"
    );
    produced.add("determinized 2x2 table", &t, &f);
    verified(&t, &f, "determinize")
}

fn toy_mp() -> OntFactorization {
    let m = RatMatrix::from_ints(
        &[
            &[1, 1, 0, 0],
            &[0, 0, 1, 1],
            &[1, 0, 1, 0],
            &[0, 1, 0, 1],
            &[1, 0, 0, 1],
            &[0, 1, 1, 0],
        ],
        1,
    );
    let p = RatMatrix::from_ints(
        &[
            &[1, 0, 1, 0, 1, 0],
            &[1, 0, 0, 1, 0, 1],
            &[0, 1, 1, 0, 0, 1],
            &[0, 1, 0, 1, 1, 0],
        ],
        2,
    );
    OntFactorization::new(m, p).unwrap()
}

fn sorted_states(f: &OntFactorization) -> Vec<(Vec<Rational>, Vec<Rational>)> {
    let mut v: Vec<_> = (0..f.omega())
        .map(|j| (f.m().column(j), f.p().row(j).to_vec()))
        .collect();
    v.sort();
    v
}

fn criterion_4(produced: &mut Produced) -> Check {
    let t = pauli_qubit_table();
    let det = determinize(&t, &model1(&t).unwrap(), DeterminizePolicy::Contiguous).unwrap();
    ensure!(det.omega() == 12, "determinized omega {}", det.omega());
    let block = BlockUniformOF::new(det).map_err(|e| e.to_string())?;
    let f =
        exhaustive_method1(&t, &block, &CompressionParams::default()).map_err(|e| e.to_string())?;
    ensure!(f.omega() == 4, "omega {} != 4", f.omega());
    ensure!(
        sorted_states(&f) == sorted_states(&toy_mp()),
        "optimum differs from the toy-bit model"
    );
    produced.add("pauli exhaustive", &t, &f);
    verified(&t, &f, "exhaustive")
}

fn kernaghan_compressed() -> (DataTable, OntFactorization, OntFactorization) {
    let t = kernaghan_table();
    let det = determinize(&t, &model1(&t).unwrap(), DeterminizePolicy::Contiguous).unwrap();
    let params = CompressionParams {
        seed: 0,
        restarts: 100,
        iterations: 10_000,
        ..CompressionParams::default()
    };
    let c = compress_method1(&t, &BlockUniformOF::new(det.clone()).unwrap(), &params).unwrap();
    (t, det, c)
}

fn criterion_5(
    produced: &mut Produced,
    kernaghan: &(DataTable, OntFactorization, OntFactorization),
) -> Check {
    let (t, det, c) = kernaghan;
    let allowed = [
        Rational::zero(),
        Rational::new(1, 4),
        Rational::new(1, 2),
        Rational::one(),
    ];
    ensure!(
        t.matrix().entries().iter().all(|v| allowed.contains(v)),
        "unexpected entry value"
    );
    ensure!(
        det.omega() == 80,
        "determinized omega {} != 80",
        det.omega()
    );
    verified(t, det, "determinized kernaghan")?;
    verified(t, c, "compressed kernaghan")?;
    ensure!(c.omega() <= 64, "compressed omega {} > 64", c.omega());
    ensure!(
        psi_classify(c).psi_epistemic,
        "compressed model is not psi-epistemic"
    );
    produced.add("kernaghan determinized", t, det);
    produced.add("kernaghan compressed", t, c);
    println!(
        "    kernaghan method 1: 80 -> {} ontic states (reference 42)",
        c.omega()
    );
    Ok(())
}

fn criterion_6() -> Check {
    let inst = kernaghan_instance();
    ensure!(
        inst.contexts().len() == 11,
        "{} contexts",
        inst.contexts().len()
    );
    ensure!(
        inst.multiplicities().iter().all(|&n| n % 2 == 0),
        "some projector appears an odd number of times"
    );
    ensure!(
        inst.has_parity_obstruction(),
        "parity obstruction not detected"
    );
    let found = ks_noncontextual_search(&inst).map_err(|e| e.to_string())?;
    ensure!(found.is_none(), "search found an assignment {found:?}");
    Ok(())
}

fn criterion_7(
    produced: &mut Produced,
    kernaghan: &(DataTable, OntFactorization, OntFactorization),
) -> Check {
    let (t, det, c) = kernaghan;
    let groups = t.duplicate_row_groups();
    ensure!(
        !groups.is_empty(),
        "kernaghan table has no shared projectors"
    );
    let mut ofs: Vec<(String, OntFactorization)> = vec![
        ("model3".into(), model3(t).unwrap()),
        ("determinize contiguous".into(), det.clone()),
        ("method 1".into(), c.clone()),
    ];
    match model2(t) {
        Ok(f) => ofs.push(("model2".into(), f)),
        Err(e) => println!("    model2 skipped: {e}"),
    }
    for seed in 0..5 {
        let f = determinize(
            t,
            &model1(t).unwrap(),
            DeterminizePolicy::SeededRandom { seed },
        )
        .unwrap();
        let params = CompressionParams {
            seed,
            restarts: 4,
            iterations: 2_000,
            ..CompressionParams::default()
        };
        let comp = compress_method1(t, &BlockUniformOF::new(f.clone()).unwrap(), &params).unwrap();
        ofs.push((format!("determinize seed {seed}"), f));
        ofs.push((format!("method 1 seed {seed}"), comp));
    }
    for (label, f) in &ofs {
        verified(t, f, label)?;
        ensure!(f.is_deterministic(), "{label} is not deterministic");
        let witnesses = ks_column_witness(f, &groups).map_err(|e| e.to_string())?;
        let missing = witnesses.iter().filter(|w| w.is_none()).count();
        ensure!(
            missing == 0,
            "{label}: {missing} of {} columns lack a witness",
            f.omega()
        );
        produced.add(label, t, f);
    }
    Ok(())
}

fn criterion_8() -> Check {
    for i in 0..50u64 {
        let (d, m, s) = (
            2 + (i % 3) as usize,
            1 + (i / 3 % 4) as usize,
            1 + (i / 12 % 5) as usize,
        );
        let t = random_table(d, m, s, 1_000 + i, 12).map_err(|e| e.to_string())?;
        let r = realize(&t).map_err(|e| e.to_string())?;
        let err = verify_realization(&t, &r).map_err(|e| e.to_string())?;
        ensure!(
            err <= 1e-10,
            "table {i} (d={d}, m={m}, s={s}): error {err:e}"
        );
    }
    Ok(())
}

fn criterion_9(produced: &Produced) -> Check {
    let rank = pauli_qubit_table().rank();
    ensure!(rank == 4, "pauli rank {rank}");
    for m in 1..=8 {
        let t = binary_worst_case_table(m).map_err(|e| e.to_string())?;
        ensure!(
            t.pattern_lower_bound() == 1 << m,
            "pattern bound for m={m} is {}",
            t.pattern_lower_bound()
        );
    }
    ensure!(
        produced.0.len() > 100,
        "only {} factorizations recorded",
        produced.0.len()
    );
    for (label, rank, omega) in &produced.0 {
        ensure!(rank <= omega, "{label}: rank {rank} > omega {omega}");
    }
    println!(
        "    rank <= omega checked on {} factorizations",
        produced.0.len()
    );
    Ok(())
}

fn criterion_10(produced: &mut Produced) -> Check {
    for i in 0..200u64 {
        let (d, m, s) = (
            2 + (i % 2) as usize,
            1 + (i / 2 % 3) as usize,
            1 + (i / 6 % 4) as usize,
        );
        let t = random_table(d, m, s, 7_000 + i, 6).map_err(|e| e.to_string())?;
        let label = |what: &str| format!("table {i} {what}");
        let m1 = model1(&t).unwrap();
        ensure!(
            psi_classify(&m1).psi_complete,
            "{}",
            label("model1 not psi-complete")
        );
        let m2 = model2(&t).unwrap();
        let m3 = model3(&t).unwrap();
        let det = determinize(&t, &m1, DeterminizePolicy::SeededRandom { seed: i }).unwrap();
        for f in [&m2, &m3, &det] {
            let again = determinize(&t, f, DeterminizePolicy::Contiguous).unwrap();
            ensure!(&again == f, "{}", label("determinize not idempotent"));
        }
        let params = CompressionParams {
            seed: i,
            restarts: 2,
            iterations: 200,
            ..CompressionParams::default()
        };
        let c1 = compress_method1(&t, &BlockUniformOF::new(det.clone()).unwrap(), &params).unwrap();
        let log = compress_method2_with_log(&t, &m2, &params).unwrap();
        let dd = dedupe(&t, &det).unwrap();
        for (what, f) in [
            ("model1", &m1),
            ("model2", &m2),
            ("model3", &m3),
            ("determinize", &det),
        ] {
            verified(&t, f, &label(what))?;
            produced.add(&label(what), &t, f);
        }
        for (what, f, input) in [
            ("method 1", &c1, &det),
            ("method 2", &log.factorization, &m2),
            ("dedupe", &dd, &det),
        ] {
            verified(&t, f, &label(what))?;
            ensure!(
                f.omega() <= input.omega(),
                "{}",
                label("compression grew omega")
            );
            produced.add(&label(what), &t, f);
        }
        let mut grids: Vec<GridDistribution> = (0..s)
            .map(|k| GridDistribution::new(d, m, m2.p().column(k)).unwrap())
            .collect();
        for mv in &log.moves {
            let g = &mut grids[mv.preparation];
            let before: Vec<_> = (0..m).map(|x| g.marginal(x)).collect();
            ensure!(
                g.apply_move(&mv.cell, mv.x, mv.y, mv.alt_x, mv.alt_y)
                    .is_some(),
                "{}",
                label("replayed move illegal")
            );
            let after: Vec<_> = (0..m).map(|x| g.marginal(x)).collect();
            ensure!(before == after, "{}", label("move changed a marginal"));
        }
        for (k, g) in grids.iter().enumerate() {
            for x in 0..m {
                let expected: Vec<Rational> = (0..d).map(|o| t.entry(x, o, k).clone()).collect();
                ensure!(
                    g.marginal(x) == expected,
                    "{}",
                    label("grid marginal differs from table")
                );
            }
        }
    }
    Ok(())
}

fn criterion_11() -> Check {
    let golden = include_bytes!("golden/kernaghan_cell8.ppm");
    let t = kernaghan_table();
    let img = render_table(&t, 8, ImageFormat::Ppm).map_err(|e| e.to_string())?;
    ensure!(
        img.as_slice() == golden.as_slice(),
        "image differs from golden file"
    );
    let header = b"P6\n160 362\n255\n";
    ensure!(img.starts_with(header), "unexpected header");
    let pixels: Vec<[u8; 3]> = img[header.len()..]
        .chunks(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    ensure!(
        pixels
            .iter()
            .all(|p| [BLACK, GREEN, RED, WHITE, SEPARATOR].contains(p)),
        "color outside the map"
    );
    let blue_rows = (0..362)
        .filter(|&y| {
            pixels[y * 160..(y + 1) * 160]
                .iter()
                .all(|p| *p == SEPARATOR)
        })
        .count();
    ensure!(blue_rows == 10, "{blue_rows} separator lines");
    // cell (row 0, prep 10) holds 1/4
    ensure!(
        pixels[4 * 160 + 10 * 8 + 4] == RED,
        "sampled cell has the wrong color"
    );
    Ok(())
}

#[test]
fn acceptance() {
    let limits: BTreeMap<u32, (&str, Duration)> = [
        (1, ("model 2 reproduction", Duration::from_millis(1))),
        (2, ("model 3 reproduction", Duration::from_millis(1))),
        (
            3,
            ("determinization reproduction", Duration::from_millis(1)),
        ),
        (4, ("pauli optimum", Duration::from_secs(10))),
        (5, ("kernaghan pipeline", Duration::from_secs(180))),
        (6, ("KS unsatisfiability", Duration::from_secs(30))),
        (7, ("forced contextuality", Duration::from_secs(60))),
        (8, ("realization round trip", Duration::from_secs(10))),
        (9, ("bound suite", Duration::from_secs(10))),
        (10, ("property suite", Duration::from_secs(120))),
        (11, ("rendering golden file", Duration::from_secs(1))),
    ]
    .into_iter()
    .collect();

    let mut produced = Produced::default();
    let mut results: BTreeMap<u32, (Check, Duration)> = BTreeMap::new();
    let mut timed = |n: u32, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let r = f();
        results.insert(n, (r, start.elapsed()));
    };
    timed(1, &mut || criterion_1(&mut produced));
    timed(2, &mut || criterion_2(&mut produced));
    timed(3, &mut || criterion_3(&mut produced));
    timed(4, &mut || criterion_4(&mut produced));
    let mut kernaghan = None;
    timed(5, &mut || {
        let k = kernaghan_compressed();
        let r = criterion_5(&mut produced, &k);
        kernaghan = Some(k);
        r
    });
    let kernaghan = kernaghan.expect("criterion 5 ran");
    timed(6, &mut criterion_6);
    timed(7, &mut || criterion_7(&mut produced, &kernaghan));
    timed(8, &mut criterion_8);
    timed(10, &mut || criterion_10(&mut produced));
    timed(11, &mut criterion_11);
    timed(9, &mut || criterion_9(&produced));

    let mut failures = 0;
    for (n, (result, elapsed)) in &results {
        let (name, limit) = limits[n];
        let outcome = match result {
            Ok(()) if elapsed <= &limit => Ok(()),
            Ok(()) => Err(format!("took {elapsed:?}, limit {limit:?}")),
            Err(e) => Err(e.clone()),
        };
        match outcome {
            Ok(()) => println!("[PASS] {n:>2} {name} ({elapsed:.2?})"),
            Err(e) => {
                failures += 1;
                println!("[FAIL] {n:>2} {name} ({elapsed:.2?}): {e}");
            }
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
