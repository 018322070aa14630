//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `--nocapture`). The instance harness is shared across
//! criteria through a `OnceLock` so the batch is generated and solved once.
//!
//! Criterion 5 pins the source's minimum-L1-completion closed form as
//! stated. That equality is refuted by counterexample (the test prints
//! one, together with the sound lower-bound and witness checks that do
//! hold), so the criterion is expected to stay red; see the test body.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use maplp_core::deltadist::{decompose, delta_scale_bound, is_delta};
use maplp_core::formats::{parse_native, parse_uai, render_number, serialize_native, Document, FormatError};
use maplp_core::hypersites::{rho_coefficients, Hypersite, HypersiteSet};
use maplp_core::model::{decode_config, Assignment, FactorTable, Model};
use maplp_core::oracle::{
    enumerate_modes, replay_certificate, tightness_report, DecodeOutcome, Family, HarnessConfig,
    TightnessReport, DEFAULT_ENUMERATION_CAP,
};
use maplp_core::orthomarginal::{
    check_pseudo_marginals, lift, project, DenseFunction, PseudoMarginalSet,
};
use maplp_core::relaxation::{
    build_exact_em, build_global_reform, build_min_l1_completion, build_pseudo_delta_emin,
    build_pseudo_emax, build_pseudo_emin, extract_global, ExactSense,
};
use maplp_core::scalar::{scalar_pow, Rat, Scalar};

const DENSE_CAP: usize = 4096;

fn rat(v: i64) -> Rat {
    Rat::from_int(v)
}

fn random_dense(rng: &mut ChaCha8Rng, n: usize, l: usize) -> DenseFunction<Rat> {
    let size = l.pow(n as u32);
    let values = (0..size).map(|_| rat(rng.random_range(-9..=9))).collect();
    DenseFunction::with_cap(n, l, values, DENSE_CAP).unwrap()
}

fn random_scope(rng: &mut ChaCha8Rng, n: usize, max_arity: usize) -> Hypersite {
    let arity = rng.random_range(1..=max_arity.min(n));
    let mut sites: Vec<usize> = Vec::new();
    while sites.len() < arity {
        let s = rng.random_range(1..=n);
        if !sites.contains(&s) {
            sites.push(s);
        }
    }
    Hypersite::from_unsorted(sites).unwrap()
}

fn random_scope_set(rng: &mut ChaCha8Rng, n: usize, max_members: usize) -> HypersiteSet {
    let count = rng.random_range(1..=max_members);
    HypersiteSet::from_members((0..count).map(|_| random_scope(rng, n, n)).collect())
}

/// Random covering model: a spanning structure plus a few extra scopes.
fn random_model(rng: &mut ChaCha8Rng, n: usize, l: usize) -> Model<Rat> {
    let mut scopes: Vec<Hypersite> = Vec::new();
    if n == 1 {
        scopes.push(Hypersite::new(vec![1]).unwrap());
    }
    for i in 2..=n {
        let parent = rng.random_range(1..i);
        scopes.push(Hypersite::from_unsorted(vec![parent, i]).unwrap());
    }
    for _ in 0..rng.random_range(0..=3usize) {
        scopes.push(random_scope(rng, n, 3));
    }
    let factors = scopes
        .into_iter()
        .map(|scope| {
            let len = l.pow(scope.len() as u32);
            let values = (0..len).map(|_| rat(rng.random_range(-9..=9))).collect();
            FactorTable::new(scope, values).unwrap()
        })
        .collect();
    Model::new(n, l, factors).unwrap()
}

fn acceptance_harness_config() -> HarnessConfig {
    HarnessConfig {
        families: vec![
            (Family::Chain, 30),
            (Family::Tree, 100),
            (Family::Cycle, 110),
            (Family::Grid3x3, 70),
            (Family::Hypergraph, 130),
        ],
        seed: 20240801,
        cost_range: (0, 9),
        enumeration_cap: DEFAULT_ENUMERATION_CAP,
    }
}

static REPORT: OnceLock<TightnessReport> = OnceLock::new();

fn shared_report() -> &'static TightnessReport {
    REPORT.get_or_init(|| tightness_report(&acceptance_harness_config()).expect("harness run"))
}

#[test]
fn criterion_01_orthomarginal_projection_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..200 {
        let l = if rng.random_bool(0.5) { 2 } else { 3 };
        let n = rng.random_range(2..=5usize);
        let scopes = random_scope_set(&mut rng, n, 4);
        let f = random_dense(&mut rng, n, l);
        let g = random_dense(&mut rng, n, l);

        let pf = project(&f, &scopes).unwrap();
        assert_eq!(project(&pf, &scopes).unwrap(), pf, "idempotence, trial {trial}");

        let residual = f.zip(&pf, |a, b| a.sub_ref(b));
        let pg = project(&g, &scopes).unwrap();
        assert!(residual.inner(&pg).is_zero(), "orthogonality, trial {trial}");

        for member in scopes.frontier_closure().unwrap().iter() {
            assert_eq!(
                pf.margin(member).unwrap(),
                f.margin(member).unwrap(),
                "margin preservation at {member}, trial {trial}"
            );
        }
    }
    println!("[criterion 01] PASS: projection idempotent, orthogonal, margin-preserving on 200 instances");
}

#[test]
fn criterion_02_lifting_reproduces_margins() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for trial in 0..100 {
        let l = if rng.random_bool(0.5) { 2 } else { 3 };
        let n = rng.random_range(2..=5usize);
        let scopes = random_scope_set(&mut rng, n, 4);
        let f = random_dense(&mut rng, n, l);
        let v = random_dense(&mut rng, n, l);
        let margins = PseudoMarginalSet::margins_of(&f, &scopes).unwrap();
        assert!(check_pseudo_marginals(&margins).ok);
        let u = lift(&margins, &v).unwrap();
        for scope in scopes.iter() {
            assert_eq!(
                u.margin(scope).unwrap().as_slice(),
                margins.table(scope).unwrap(),
                "lift margin at {scope}, trial {trial}"
            );
        }
    }
    println!("[criterion 02] PASS: lift reproduces 100 random consistent marginal sets exactly");
}

#[test]
fn criterion_03_rho_recursion_partition_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..100 {
        let n = rng.random_range(2..=6usize);
        let scopes = random_scope_set(&mut rng, n, 5);
        let front = scopes.frontier().unwrap();
        let fclos = scopes.frontier_closure().unwrap();
        let rho = rho_coefficients(&fclos, &front);
        for member in fclos.iter() {
            let total: i64 = fclos
                .iter()
                .filter(|t| member.is_subset_of(t))
                .map(|t| rho.get(t).unwrap())
                .sum();
            assert_eq!(total, 1, "partition identity at {member} in {scopes}");
        }
    }
    // Chain pair hand derivation: coefficients (1, 1, -1, 0).
    let chain = HypersiteSet::from_members(vec![
        Hypersite::new(vec![1, 2]).unwrap(),
        Hypersite::new(vec![2, 3]).unwrap(),
    ]);
    let rho = rho_coefficients(&chain.frontier_closure().unwrap(), &chain.frontier().unwrap());
    assert_eq!(rho.get(&Hypersite::new(vec![1, 2]).unwrap()), Some(1));
    assert_eq!(rho.get(&Hypersite::new(vec![2, 3]).unwrap()), Some(1));
    assert_eq!(rho.get(&Hypersite::new(vec![2]).unwrap()), Some(-1));
    assert_eq!(rho.get(&Hypersite::empty()), Some(0));
    println!("[criterion 03] PASS: coefficient partition identity on 100 sets + chain hand case");
}

#[test]
fn criterion_04_delta_calculus() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for trial in 0..500 {
        let l: usize = if rng.random_bool(0.5) { 2 } else { 3 };
        let n = rng.random_range(1..=4usize);
        let size = l.pow(n as u32);

        // Random distribution pair.
        let draw = |rng: &mut ChaCha8Rng| -> DenseFunction<Rat> {
            let raw: Vec<i64> = (0..size).map(|_| rng.random_range(0..=20)).collect();
            let total: i64 = raw.iter().sum::<i64>().max(1);
            DenseFunction::with_cap(
                n,
                l,
                raw.iter().map(|&v| rat(v) / rat(total)).collect(),
                DENSE_CAP,
            )
            .unwrap()
        };
        let p = draw(&mut rng);
        let p2 = draw(&mut rng);
        let q = p.zip(&p2, |a, b| a.sub_ref(b));
        assert!(is_delta(&q), "difference of distributions, trial {trial}");
        let d = decompose(&q).unwrap();
        assert_eq!(d.p.zip(&d.p_prime, |a, b| a.sub_ref(b)), q, "reconstruction, trial {trial}");
        assert!(d.p.values().iter().all(|v| !v.is_negative()));
        assert!(d.p_prime.values().iter().all(|v| !v.is_negative()));
        assert_eq!(d.p.total(), rat(1));
        assert_eq!(d.p_prime.total(), rat(1));

        // Saturated case: disjoint-support difference has the unique split.
        let x = rng.random_range(0..size);
        let mut y = rng.random_range(0..size);
        if y == x {
            y = (y + 1) % size;
        }
        let mut vals = vec![rat(0); size];
        vals[x] = rat(1);
        vals[y] = rat(-1);
        let sat = DenseFunction::with_cap(n, l, vals, DENSE_CAP).unwrap();
        let d = decompose(&sat).unwrap();
        assert!(d.unique);
        for (a, b) in d.p.values().iter().zip(d.p_prime.values()) {
            assert!(a.is_zero() || b.is_zero(), "disjoint supports, trial {trial}");
        }

        // Scale bound saturates the L1 cap exactly.
        let raw = random_dense(&mut rng, n, l);
        let mean = raw.total().div_ref(&scalar_pow::<Rat>(l, n));
        let q0 = raw.map(|v| v.sub_ref(&mean));
        if !q0.l1_norm().is_zero() {
            let bound = delta_scale_bound(&q0).unwrap();
            let scaled = q0.map(|v| v.mul_ref(&bound));
            assert_eq!(scaled.l1_norm(), rat(2), "cap saturation, trial {trial}");
            assert!(is_delta(&scaled));
        }
    }
    println!("[criterion 04] PASS: 500 rounds of delta characterization, decomposition, scaling");
}

/// Criterion 5 as stated: the minimum-L1-completion optimum must equal
/// `max_s sum |q_s|` on 50 random consistent zero-sum delta-marginal sets.
///
/// The equality is FALSE in general — it is only a lower bound, and mixed
/// dual solutions across overlapping scopes beat it (see the decisions
/// ledger for the full analysis, including an independent-solver
/// cross-check). The sound invariants (optimum dominates the bound, the
/// witness is feasible at the optimum) are asserted first and hold; the
/// final equality assertion is kept faithful to the criterion and is
/// expected to fail, printing the first counterexample.
#[test]
fn criterion_05_completion_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut mismatches: Vec<String> = Vec::new();
    let rounds = 50;
    for trial in 0..rounds {
        let n = rng.random_range(3..=6usize);
        let scopes = random_scope_set(&mut rng, n, 4);
        let front = scopes.frontier().unwrap();
        let raw = random_dense(&mut rng, n, 2);
        let mean = raw.total().div_ref(&scalar_pow::<Rat>(2, n));
        let q0 = raw.map(|v| v.sub_ref(&mean));
        let qset = PseudoMarginalSet::margins_of(&q0, &front).unwrap();
        assert!(check_pseudo_marginals(&qset).ok);

        let (lp, vmap) = build_min_l1_completion(&qset, n, DENSE_CAP).unwrap();
        let sol = lp.solve().unwrap();
        let optimum = sol.objective.clone().unwrap();
        let closed_form = front
            .iter()
            .map(|s| qset.table_l1(s).unwrap())
            .max_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();

        // Sound invariants: these always hold and isolate the defect in
        // the claim rather than in the solver.
        assert!(optimum >= closed_form, "optimum below its lower bound, trial {trial}");
        assert!(optimum <= q0.l1_norm(), "source function is a feasible completion");
        let witness = extract_global(&sol, &vmap).unwrap().unwrap();
        assert_eq!(witness.l1_norm(), optimum, "witness value, trial {trial}");
        for s in front.iter() {
            assert_eq!(witness.margin(s).unwrap().as_slice(), qset.table(s).unwrap());
        }

        if optimum != closed_form {
            mismatches.push(format!(
                "trial {trial}: scopes {} -> completion optimum {} vs claimed {}",
                scopes,
                render_number(&optimum),
                render_number(&closed_form),
            ));
        }
    }
    assert!(
        mismatches.is_empty(),
        "[criterion 05] FAIL (expected; claim refuted): closed form mismatched on {} of {rounds} \
         sets; lower-bound and witness-feasibility checks all passed, so the LP and its solver \
         are sound and the claimed equality itself is false. First counterexamples:\n{}",
        mismatches.len(),
        mismatches[..mismatches.len().min(3)].join("\n"),
    );
    println!("[criterion 05] PASS: completion closed form held on all {rounds} sets");
}

#[test]
fn criterion_06_exact_convex_hull_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for trial in 0..100 {
        let l = if rng.random_bool(0.3) { 3 } else { 2 };
        let n = if l == 3 { rng.random_range(2..=5usize) } else { rng.random_range(2..=8usize) };
        let m = random_model(&mut rng, n, l);
        let brute = enumerate_modes(&m, DEFAULT_ENUMERATION_CAP).unwrap();

        let (lp, _) = build_exact_em(&m, ExactSense::Min, DENSE_CAP).unwrap();
        assert_eq!(lp.solve().unwrap().objective.unwrap(), brute.min_value, "min, trial {trial}");
        let (lp, _) = build_exact_em(&m, ExactSense::Max, DENSE_CAP).unwrap();
        assert_eq!(lp.solve().unwrap().objective.unwrap(), brute.max_value, "max, trial {trial}");
        let (lp, _) = build_exact_em(&m, ExactSense::Delta, DENSE_CAP).unwrap();
        assert_eq!(
            lp.solve().unwrap().objective.unwrap(),
            brute.min_value.sub_ref(&brute.max_value),
            "delta, trial {trial}"
        );
    }
    println!("[criterion 06] PASS: exact convex-hull optima equal enumeration on 100 models");
}

#[test]
fn criterion_07_global_equals_local() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for trial in 0..30 {
        let l = if rng.random_bool(0.3) { 3 } else { 2 };
        let n = if l == 3 { rng.random_range(2..=5usize) } else { rng.random_range(2..=8usize) };
        let m = random_model(&mut rng, n, l).merge_to_frontier();

        for (sense, build_local) in [
            (ExactSense::Min, build_pseudo_emin(&m).unwrap().0),
            (ExactSense::Max, build_pseudo_emax(&m).unwrap().0),
            (ExactSense::Delta, build_pseudo_delta_emin(&m).unwrap().0),
        ] {
            let local = build_local.solve().unwrap().objective.unwrap();
            let (global_lp, _) = build_global_reform(&m, sense, DENSE_CAP).unwrap();
            let global = global_lp.solve().unwrap().objective.unwrap();
            assert_eq!(local, global, "{sense:?} mismatch, trial {trial}");
        }
    }
    println!("[criterion 07] PASS: global reformulations match local programs on 30 models");
}

#[test]
fn criterion_08_relaxation_sandwich() {
    let report = shared_report();
    for r in &report.records {
        assert!(!r.gap_min.is_negative(), "{}: lp_min above brute_min", r.id);
        assert!(!(-r.gap_max.clone()).is_negative(), "{}: lp_max below brute_max", r.id);
        assert!(!r.gap_delta.is_negative(), "{}: lp_delta above brute_min - brute_max", r.id);
    }
    println!(
        "[criterion 08] PASS: sandwich bounds held on all {} instances",
        report.records.len()
    );
}

#[test]
fn criterion_09_acyclic_exactness() {
    let report = shared_report();
    let trees: Vec<_> = report.records.iter().filter(|r| r.family == Family::Tree).collect();
    assert!(trees.len() >= 100, "need at least 100 tree instances, got {}", trees.len());
    for r in &trees {
        assert!(r.gap_min.is_zero(), "{}: tree instance with a minimization gap", r.id);
    }
    println!("[criterion 09] PASS: local program exact on all {} tree instances", trees.len());
}

#[test]
fn criterion_10_tightness_measured_and_certificates_replay() {
    let report = shared_report();
    let cyclic: Vec<_> = report
        .records
        .iter()
        .filter(|r| r.family.is_cyclic_or_higher_order())
        .collect();
    assert!(
        cyclic.len() >= 300,
        "need at least 300 cyclic/higher-order instances, got {}",
        cyclic.len()
    );
    let min_eq = cyclic.iter().filter(|r| r.gap_min.is_zero()).count();
    let delta_eq = cyclic.iter().filter(|r| r.gap_delta.is_zero()).count();
    for cert in &report.certificates {
        replay_certificate(&cert.text)
            .unwrap_or_else(|e| panic!("certificate {} failed to replay: {e}", cert.file_name));
    }
    println!(
        "[criterion 10] PASS: measured equality rates over {} cyclic/higher-order instances: \
         min {min_eq}/{}, delta {delta_eq}/{}; all {} certificates replayed",
        cyclic.len(),
        cyclic.len(),
        cyclic.len(),
        report.certificates.len(),
    );
}

#[test]
fn criterion_11_saturation_and_decoding() {
    let report = shared_report();
    let mut eligible = 0usize;
    let mut explained_failures = 0usize;
    let mut delta_vertex_counterexamples = 0usize;
    for r in report.records.iter().filter(|r| r.family.is_cyclic_or_higher_order()) {
        if !r.all_gaps_zero() || r.atomicity_profile.contains("nocover") {
            // Paired with a gap or atomicity certificate; permitted.
            explained_failures += 1;
            continue;
        }
        eligible += 1;
        // Saturation of the delta marginals over the atomic frontier. A
        // violation on a fully atomic instance would be unexplained.
        if r.fully_atomic() {
            assert_eq!(
                r.saturation_ok,
                Some(true),
                "{}: unexplained saturation violation",
                r.id
            );
            assert_eq!(
                r.decode_outcome,
                DecodeOutcome::Success,
                "{}: unexplained decode failure (probability marginals)",
                r.id
            );
        }
        if r.delta_decode_outcome != DecodeOutcome::Success {
            // A certified counterexample: this optimal vertex of the local
            // delta polytope is not the margin set of any global optimum.
            delta_vertex_counterexamples += 1;
            assert!(
                report.certificates.iter().any(|c| c.file_name.starts_with(&r.id)),
                "{}: delta decode failure without a certificate",
                r.id
            );
        }
    }
    println!(
        "[criterion 11] PASS: {eligible} eligible instances saturated and decoded; \
         {explained_failures} skipped with gap/atomicity certificates; \
         {delta_vertex_counterexamples} certified delta-vertex counterexamples",
    );
}

#[test]
fn criterion_12_parsers() {
    // Hand-built UAI documents plus generated ones; the round trip through
    // native serialization must preserve evaluation on every assignment.
    let mut corpus: Vec<String> = vec![
        "MARKOV\n1\n2\n1\n1 0\n2\n0.5 3\n".into(),
        "MARKOV\n3\n2 2 2\n2\n2 0 1\n2 1 2\n4\n0 1 1 0\n4\n0 1 1 0\n".into(),
        // Index-order conversion case: asymmetric table, permuted scope.
        "MARKOV\n2\n2 2\n1\n2 1 0\n4\n10 20 30 40\n".into(),
        "MARKOV\n3\n3 3 3\n2\n3 0 1 2\n1 1\n27\n".to_string()
            + &(1..=27).map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
            + "\n3\n5 6 7\n",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    while corpus.len() < 20 {
        let n = rng.random_range(2..=5usize);
        let l: usize = if rng.random_bool(0.5) { 2 } else { 3 };
        let factors = rng.random_range(1..=4usize);
        let mut text = format!("MARKOV\n{n}\n{}\n{factors}\n", vec![l.to_string(); n].join(" "));
        let mut scopes: Vec<Vec<usize>> = Vec::new();
        for _ in 0..factors {
            let arity = rng.random_range(1..=2.min(n));
            let mut vars: Vec<usize> = Vec::new();
            while vars.len() < arity {
                let v = rng.random_range(0..n);
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
            text.push_str(&format!(
                "{} {}\n",
                arity,
                vars.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
            ));
            scopes.push(vars);
        }
        for scope in &scopes {
            let count = l.pow(scope.len() as u32);
            let entries: Vec<String> =
                (0..count).map(|_| rng.random_range(-9..=9i64).to_string()).collect();
            text.push_str(&format!("{}\n{}\n", count, entries.join(" ")));
        }
        corpus.push(text);
    }
    assert!(corpus.len() >= 20);
    for (i, text) in corpus.iter().enumerate() {
        let model = parse_uai(text).unwrap_or_else(|e| panic!("file {i}: {e}"));
        let doc = Document::bare(model.clone());
        let reparsed = parse_native(&serialize_native(&doc)).unwrap().model;
        let total = model.num_labels().pow(model.num_sites() as u32);
        assert!(total <= 256, "file {i} too large for the sweep");
        for idx in 0..total {
            let x = Assignment::new(decode_config(idx, model.num_labels(), model.num_sites()));
            assert_eq!(
                model.evaluate(&x).unwrap(),
                reparsed.evaluate(&x).unwrap(),
                "file {i}, assignment {idx}"
            );
        }
    }

    // Malformed corpus: positioned errors, no panics.
    let malformed = [
        "",
        "BAYES\n1\n2\n1\n1 0\n2\n1 2\n",
        "MARKOV\n2\n2 3\n1\n2 0 1\n4\n1 2 3 4\n",
        "MARKOV\n2\n2 2\n1\n2 0 9\n4\n1 2 3 4\n",
        "MARKOV\n2\n2 2\n1\n2 0 1\n4\n1 2 3\n",
        "MARKOV\n2\n2 2\n1\n2 0 1\n4\n1 2 3 oops\n",
        "MARKOV\n2\n2 2\n1\n0\n4\n1 2 3 4\n",
        "model 2 2\nfactor 1 5\n0 1 1 0\n",
        "model 2 2\nfactor 1 2\n0 1 x 0\n",
        "model 2 2\nfactor 1 2\n0 1 1 0\nassignment 9 9\n",
    ];
    for (i, text) in malformed.iter().enumerate() {
        let err = if text.starts_with("model") || text.is_empty() {
            parse_native(text).err()
        } else {
            parse_uai(text).err()
        };
        match err {
            Some(FormatError::Syntax { line, .. }) | Some(FormatError::BadModel { line, .. }) => {
                assert!(line >= 1, "malformed {i} reported line {line}");
            }
            None => panic!("malformed input {i} was accepted"),
        }
    }
    println!("[criterion 12] PASS: 20 files round-tripped; malformed corpus rejected with positions");
}
