//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use hoeffding::bernoulli::{bernoulli_pmf, closed_form_decomposition, BernoulliPair};
use hoeffding::decomposition::{
    build_component_subspaces, decompose, hoeffding_classical, orthogonal_p, verify_mobius,
    ComponentBasisSet, Decomposition,
};
use hoeffding::distribution::{
    check_assumption1, check_strict_nesting, grid_size, validate_pmf, InputSpec, JointPmf,
    PairSelection, SupportAtoms,
};
use hoeffding::hilbert::{
    dixmier_angle, feshchenko_matrix, friedrichs_angle, weighted_inner, weighted_norm,
    Verification, DEFAULT_TOL,
};
use hoeffding::indices::{evaluation_explanation, variance_report};
use hoeffding::lattice::{uncomparables, SubsetMask};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn set(labels: &[usize]) -> SubsetMask {
    SubsetMask::from_labels(labels.iter().copied())
}

struct Instance {
    pmf: JointPmf,
    model: Vec<f64>,
    support: SupportAtoms,
    bases: ComponentBasisSet,
    dec: Decomposition,
    redraws: usize,
}

fn instance(pmf: JointPmf, model: Vec<f64>) -> Result<Instance, String> {
    let support = validate_pmf(&pmf).map_err(|e| e.to_string())?;
    let bases = build_component_subspaces(&support, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let g = support.restrict(&model).map_err(|e| e.to_string())?;
    let dec = decompose(&bases, &g, DEFAULT_TOL).map_err(|e| e.to_string())?;
    Ok(Instance { pmf, model, support, bases, dec, redraws: 0 })
}

/// The shared instance set of criteria 4 to 8: 100 admissible full-support
/// laws with up to 4 inputs and alphabets of size 2 or 3.
fn random_instances() -> Result<Vec<Instance>, String> {
    let mut r = rng(4);
    (0..100)
        .map(|_| {
            let shape = random_shape(&mut r, 1, 4);
            let (pmf, redraws) = random_admissible(&mut r, &shape);
            let model = random_model(&mut r, grid_size(&shape));
            instance(pmf, model).map(|i| Instance { redraws, ..i })
        })
        .collect()
}

fn bernoulli_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let draws = 256;
    let (mut worst_component, mut worst_index) = (0.0f64, 0.0f64);
    let order = [SubsetMask::EMPTY, set(&[1]), set(&[2]), set(&[1, 2])];
    for _ in 0..draws {
        let (q1, q2, rho) = random_bernoulli(&mut r);
        let g: [f64; 4] = std::array::from_fn(|_| r.gen_range(-3.0..3.0));
        let pair = BernoulliPair::new(q1, q2, rho).map_err(|e| e.to_string())?;
        let inst = instance(bernoulli_pmf(&pair).map_err(|e| e.to_string())?, g.to_vec())?;
        let oracle = closed_form_decomposition(&pair, g).map_err(|e| e.to_string())?;
        for (a, comp) in order.iter().zip(oracle.components.ordered()) {
            worst_component = worst_component.max(max_abs_diff(inst.dec.component(*a), &comp));
        }
        let report = variance_report(&inst.support, &inst.bases, &inst.dec, &inst.model, DEFAULT_TOL)
            .map_err(|e| e.to_string())?;
        let expected = oracle.indices(g).map_err(|e| e.to_string())?;
        for (k, a) in order.iter().enumerate() {
            let row = report.row(*a);
            for (got, want) in [
                (row.structural, expected.structural[k]),
                (row.correlative, expected.correlative[k]),
                (row.pure_interaction, expected.pure_interaction[k]),
                (row.dependence_effect, expected.dependence_effect[k]),
            ] {
                worst_index = worst_index.max((got - want).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(worst_component <= 1e-8, || format!("component gap {worst_component:e}"))?;
    ensure(worst_index <= 1e-8, || format!("index gap {worst_index:e}"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{draws} draws, max component gap {worst_component:.2e}, max index gap {worst_index:.2e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn friedrichs_value() -> Outcome {
    let (q1, q2, rho) = (0.5, 0.5, 0.3);
    let pair = BernoulliPair::new(q1, q2, rho).map_err(|e| e.to_string())?;
    let support = validate_pmf(&bernoulli_pmf(&pair).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let a1 = check_assumption1(&support, PairSelection::Auto);
    let c_f = friedrichs_angle(&support, set(&[1]), set(&[2]), Verification::Checked(&a1), DEFAULT_TOL)
        .map_err(|e| e.to_string())?;
    // For two binary inputs the maximal correlation is the absolute Pearson
    // correlation of the indicator variables.
    let pearson = ((rho - q1 * q2) / (q1 * (1.0 - q1) * q2 * (1.0 - q2)).sqrt()).abs();
    let delta = feshchenko_matrix(&support, Verification::Checked(&a1), DEFAULT_TOL).map_err(|e| e.to_string())?;
    let entry = delta.get(set(&[1]), set(&[2]));
    ensure((c_f - 0.2).abs() <= 1e-10 && (c_f - pearson).abs() <= 1e-10, || format!("c_F = {c_f}"))?;
    ensure((entry + 0.2).abs() <= 1e-10, || format!("Δ entry {entry}"))?;
    ensure((delta.min_eigenvalue - 0.8).abs() <= 1e-10, || format!("min eigenvalue {}", delta.min_eigenvalue))?;
    Ok(format!("c_F = {c_f:.17}, Δ entry {entry:.17}, min eigenvalue {:.17}", delta.min_eigenvalue))
}

fn independence_collapse() -> Outcome {
    let mut r = rng(3);
    let (mut delta_gap, mut classical_gap, mut dep_max, mut explain_gap) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    for d in 2..=4 {
        for _ in 0..10 {
            let shape: Vec<usize> = (0..d).map(|_| r.gen_range(2..=3)).collect();
            let pmf = random_product(&mut r, &shape);
            let model = random_model(&mut r, grid_size(&shape));
            let inst = instance(pmf, model)?;
            let a1 = check_assumption1(&inst.support, PairSelection::Auto);
            let delta = feshchenko_matrix(&inst.support, Verification::Checked(&a1), DEFAULT_TOL)
                .map_err(|e| e.to_string())?;
            let m = delta.entries.nrows();
            for i in 0..m {
                for j in 0..m {
                    let target = if i == j { 1.0 } else { 0.0 };
                    delta_gap = delta_gap.max((delta.entries[(i, j)] - target).abs());
                }
            }
            let classical = hoeffding_classical(&inst.support, inst.dec.model()).map_err(|e| e.to_string())?;
            let report = variance_report(&inst.support, &inst.bases, &inst.dec, &inst.model, DEFAULT_TOL)
                .map_err(|e| e.to_string())?;
            for a in inst.dec.subsets() {
                classical_gap = classical_gap.max(max_abs_diff(inst.dec.component(a), classical.component(a)));
                let row = report.row(a);
                dep_max = dep_max.max(row.correlative.abs()).max(row.dependence_effect.abs());
            }
            let brute: Vec<Vec<f64>> = inst
                .dec
                .subsets()
                .iter()
                .map(|a| brute_classical_component(&inst.pmf, &inst.model, a.bits()))
                .collect();
            for atom in 0..inst.support.n() {
                let cell = inst.support.coords(atom).to_vec();
                let parts = evaluation_explanation(&inst.dec, &inst.support, &cell).map_err(|e| e.to_string())?;
                let grid_cell = inst.support.cells()[atom];
                for ((_, v), b) in parts.iter().zip(&brute) {
                    explain_gap = explain_gap.max((v - b[grid_cell]).abs());
                }
            }
            count += 1;
        }
    }
    ensure(delta_gap <= 1e-12, || format!("Δ deviates from identity by {delta_gap:e}"))?;
    ensure(classical_gap <= 1e-10, || format!("classical gap {classical_gap:e}"))?;
    ensure(dep_max < 1e-9, || format!("correlative/dependence index {dep_max:e}"))?;
    ensure(explain_gap <= 1e-10, || format!("explanation gap {explain_gap:e}"))?;
    Ok(format!(
        "{count} product laws, |Δ−I| {delta_gap:.1e}, classical gap {classical_gap:.1e}, max |S^C|,|S^D| {dep_max:.1e}, explanation gap {explain_gap:.1e}"
    ))
}

fn reconstruction_orthogonality(instances: &[Instance], elapsed: Duration) -> Outcome {
    let (mut recon, mut orth, mut annih) = (0.0f64, 0.0f64, 0.0f64);
    for inst in instances {
        let p = inst.dec.weights();
        let norm = inst.dec.model_norm().max(f64::MIN_POSITIVE);
        recon = recon.max(inst.dec.reconstruction_residual / norm);
        for a in inst.dec.subsets() {
            let ga = inst.dec.component(a);
            let mut full = vec![0.0; grid_size(&inst.pmf.shape())];
            for (atom, &cell) in inst.support.cells().iter().enumerate() {
                full[cell] = ga[atom];
            }
            for b in a.proper_subsets() {
                orth = orth.max(weighted_inner(ga, inst.dec.component(b), p).abs() / (norm * norm));
                let pb = orthogonal_p(&inst.bases, ga, b);
                annih = annih.max(weighted_norm(&pb, p) / norm);
                // E[G_A | X_B] vanishes as well.
                let e = brute_conditional_expectation(&inst.pmf, &full, b.bits());
                annih = annih.max(e.iter().map(|v| v.abs()).fold(0.0, f64::max) / norm);
            }
        }
    }
    ensure(recon <= 1e-10, || format!("reconstruction {recon:e}"))?;
    ensure(orth <= 1e-10, || format!("orthogonality {orth:e}"))?;
    ensure(annih <= 1e-10, || format!("annihilation {annih:e}"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} instances ({} inadmissible blends redrawn), reconstruction {recon:.1e}, orthogonality {orth:.1e}, annihilation {annih:.1e}, {:.2}s",
        instances.len(),
        instances.iter().map(|i| i.redraws).sum::<usize>(),
        elapsed.as_secs_f64()
    ))
}

fn mobius(instances: &[Instance]) -> Outcome {
    let worst = instances
        .iter()
        .map(|i| verify_mobius(&i.dec) / i.dec.model_norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    ensure(worst <= 1e-10, || format!("Möbius residual {worst:e}"))?;
    Ok(format!("{} instances, max relative residual {worst:.1e}", instances.len()))
}

fn variance_identity(instances: &[Instance]) -> Outcome {
    let (mut identity, mut cross) = (0.0f64, 0.0f64);
    for inst in instances {
        let report = variance_report(&inst.support, &inst.bases, &inst.dec, &inst.model, DEFAULT_TOL)
            .map_err(|e| e.to_string())?;
        let v = report.model_variance.max(f64::MIN_POSITIVE);
        identity = identity.max(report.identity_residual / v);
        cross = cross
            .max(report.structural_cross_check / v)
            .max(report.correlative_cross_check / v);
    }
    ensure(identity <= 1e-9, || format!("identity residual {identity:e}"))?;
    ensure(cross <= 1e-9, || format!("cross-formula gap {cross:e}"))?;
    Ok(format!("{} instances, identity {identity:.1e}, cross-formulas {cross:.1e}", instances.len()))
}

fn lemma_inequalities(instances: &[Instance]) -> Outcome {
    let mut r = rng(7);
    let (mut pairs, mut draws) = (0usize, 0usize);
    let (mut worst_31, mut worst_32) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for inst in instances {
        let d = inst.support.d();
        let a1 = check_assumption1(&inst.support, PairSelection::Auto);
        for b in SubsetMask::full(d).subsets() {
            for c in uncomparables(b, d) {
                if c <= b {
                    continue;
                }
                let c0 = dixmier_angle(inst.bases.basis(b), inst.bases.basis(c));
                let cf = friedrichs_angle(&inst.support, b, c, Verification::Checked(&a1), DEFAULT_TOL)
                    .map_err(|e| e.to_string())?;
                worst_31 = worst_31.max(c0 - cf);
                pairs += 1;
            }
        }
        let delta = feshchenko_matrix(&inst.support, Verification::Checked(&a1), DEFAULT_TOL)
            .map_err(|e| e.to_string())?;
        let p = inst.dec.weights();
        let scale = (((1u64 << d) - 1) as f64).sqrt();
        for a in SubsetMask::full(d).subsets().into_iter().filter(|a| !a.is_empty()) {
            let lambda = delta.proper_subset_min_eigenvalue(a).map_err(|e| e.to_string())?;
            let rho = (lambda.max(0.0)).sqrt() / scale;
            for _ in 0..100 {
                let mut sum = vec![0.0; inst.support.n()];
                let mut norms = 0.0;
                for b in a.proper_subsets() {
                    let basis = inst.bases.basis(b);
                    let amplitude = r.gen_range(0.0..2.0);
                    let coeffs: Vec<f64> = (0..basis.dim()).map(|_| amplitude * r.gen_range(-1.0..1.0)).collect();
                    let y = basis.combine(&coeffs);
                    norms += weighted_norm(&y, p);
                    sum.iter_mut().zip(&y).for_each(|(s, v)| *s += v);
                }
                worst_32 = worst_32.max(rho * norms - weighted_norm(&sum, p));
                draws += 1;
            }
        }
    }
    ensure(worst_31 <= 1e-8, || format!("c0 exceeds c_F by {worst_31:e}"))?;
    ensure(worst_32 <= 1e-8, || format!("coercivity bound violated by {worst_32:e}"))?;
    Ok(format!(
        "{pairs} pairs, max c0 − c_F {worst_31:.2e}; {draws} draws, max bound − norm {worst_32:.2e}"
    ))
}

fn assumption_checkers(instances: &[Instance]) -> Outcome {
    let copied = JointPmf::new(
        vec![InputSpec::new("x1", &["0", "1"]), InputSpec::new("x2", &["0", "1"])],
        vec![0.5, 0.0, 0.0, 0.5],
    );
    let support = validate_pmf(&copied).map_err(|e| e.to_string())?;
    let a1 = check_assumption1(&support, PairSelection::Auto);
    let nesting = check_strict_nesting(&support);
    ensure(!a1.pass && a1.violations.contains(&(set(&[1]), set(&[2]))), || {
        format!("copied input not rejected: {:?}", a1.violations)
    })?;
    ensure(!nesting.pass, || "strict nesting not flagged on copied input".into())?;

    let mut r = rng(8);
    let mut extra = Vec::new();
    for _ in 0..100 {
        let shape = random_shape(&mut r, 2, 4);
        extra.push(random_full_support(&mut r, &shape));
    }
    let mut checked = 0;
    for pmf in instances.iter().map(|i| &i.pmf).chain(extra.iter()) {
        ensure(pmf.weights.iter().all(|w| *w >= MIN_WEIGHT), || "weight floor broken".into())?;
        let s = validate_pmf(pmf).map_err(|e| e.to_string())?;
        let a1 = check_assumption1(&s, PairSelection::Auto);
        let nesting = check_strict_nesting(&s);
        ensure(a1.pass && nesting.pass, || format!("full-support law rejected: {:?}", pmf.weights))?;
        checked += 1;
    }
    Ok(format!("copied input rejected at ([1],[2]) with nesting failure; {checked} full-support laws accepted"))
}

fn degenerate_support() -> Outcome {
    let mut r = rng(9);
    let mut worst = 0.0f64;
    for zero in 0..4 {
        let mut w = random_simplex(&mut r, 3, 0.05);
        w.insert(zero, 0.0);
        let pmf = JointPmf::new(
            vec![InputSpec::new("x1", &["0", "1"]), InputSpec::new("x2", &["0", "1"])],
            w,
        );
        let model = random_model(&mut r, 4);
        let inst = instance(pmf, model)?;
        let dims: Vec<usize> = inst.bases.dims().into_iter().map(|(_, k)| k).collect();
        ensure(dims == vec![1, 1, 1, 0], || format!("dims {dims:?} with zero cell {zero}"))?;
        ensure(inst.dec.component(set(&[1, 2])).iter().all(|v| *v == 0.0), || "nonzero G12".into())?;
        worst = worst.max(inst.dec.reconstruction_residual / inst.dec.model_norm());
    }
    ensure(worst <= 1e-12, || format!("reconstruction {worst:e}"))?;
    Ok(format!("all four zero-cell positions give dims (1,1,1,0), G12 = 0, reconstruction {worst:.1e}"))
}

fn cli_determinism() -> Outcome {
    let mut mismatched = Vec::new();
    let mut schema_failures = Vec::new();
    for case in GOLDEN_CASES {
        let args = resolve_args(case.args);
        let first = run_cli(&args);
        if first.code != case.exit_code {
            mismatched.push(format!("{}: exit {} ({})", case.name, first.code, first.stderr.trim()));
            continue;
        }
        let second = run_cli(&args);
        if second.stdout != first.stdout {
            mismatched.push(format!("{}: repeated run differs", case.name));
        }
        match std::fs::read_to_string(golden_dir().join(case.name)) {
            Ok(golden) if golden == first.stdout => {}
            Ok(_) => mismatched.push(format!("{}: differs from golden file", case.name)),
            Err(e) => mismatched.push(format!("{}: {e}", case.name)),
        }
        if let Some(kind) = case.schema {
            let errors = schema_errors(kind, &first.stdout);
            if !errors.is_empty() {
                schema_failures.push(format!("{}: {}", case.name, errors.join("; ")));
            }
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for command in ["decompose", "indices"] {
        let mut outputs = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("{command}-{k}.json"));
            let args = vec![
                command.to_string(),
                fixture("mixed3.json").to_string_lossy().into_owned(),
                "--output".to_string(),
                path.to_string_lossy().into_owned(),
            ];
            let run = run_cli(&args);
            if run.code != 0 {
                return Err(format!("{command} --output exited {}", run.code));
            }
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if outputs[0] != outputs[1] {
            mismatched.push(format!("{command}: output files differ between runs"));
        }
    }
    ensure(mismatched.is_empty() && schema_failures.is_empty(), || {
        mismatched.into_iter().chain(schema_failures).collect::<Vec<_>>().join(" | ")
    })?;
    let commands: std::collections::BTreeSet<&str> = GOLDEN_CASES.iter().map(|c| c.args[0]).collect();
    Ok(format!(
        "{} golden cases over {} subcommands byte-identical and schema-valid; repeated --output files identical",
        GOLDEN_CASES.len(),
        commands.len()
    ))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(result) => result,
        Err(payload) => Err(match payload.downcast_ref::<String>() {
            Some(s) => format!("panicked: {s}"),
            None => match payload.downcast_ref::<&str>() {
                Some(s) => format!("panicked: {s}"),
                None => "panicked".into(),
            },
        }),
    }
}

fn main() {
    let start = Instant::now();
    let built = Instant::now();
    let instances = catch_unwind(random_instances).unwrap_or_else(|_| Err("generator panicked".into()));
    let build_time = built.elapsed();

    let shared = |f: &dyn Fn(&[Instance]) -> Outcome| -> Outcome {
        match &instances {
            Ok(list) => guarded(|| f(list)),
            Err(e) => Err(format!("instance set could not be built: {e}")),
        }
    };

    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "Bernoulli oracle equivalence", guarded(bernoulli_oracle)),
        (2, "Friedrichs angle of the dependent Bernoulli pair", guarded(friedrichs_value)),
        (3, "independence collapse", guarded(independence_collapse)),
        (4, "reconstruction, hierarchical orthogonality, annihilation", shared(&|l| reconstruction_orthogonality(l, build_time))),
        (5, "Möbius identity", shared(&mobius)),
        (6, "variance identity and cross-formulas", shared(&variance_identity)),
        (7, "angle bound and coercivity inequalities", shared(&lemma_inequalities)),
        (8, "assumption checkers", shared(&assumption_checkers)),
        (9, "degenerate support", guarded(degenerate_support)),
        (10, "CLI determinism and golden files", guarded(cli_determinism)),
    ];

    let mut failed = 0;
    for (id, title, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {title}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {title}: {reason}");
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.2}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
