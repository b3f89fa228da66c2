#![allow(dead_code)]

use std::path::PathBuf;

use hoeffding::distribution::{
    cell_coords, check_assumption1, grid_size, validate_pmf, InputSpec, JointPmf, PairSelection,
};
use hoeffding::hilbert::{feshchenko_matrix, Verification, DEFAULT_EPS_PD, DEFAULT_TOL};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MIN_WEIGHT: f64 = 1e-3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn inputs_for(shape: &[usize]) -> Vec<InputSpec> {
    shape
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let levels: Vec<String> = (0..k).map(|l| l.to_string()).collect();
            let refs: Vec<&str> = levels.iter().map(String::as_str).collect();
            InputSpec::new(format!("x{}", i + 1), &refs)
        })
        .collect()
}

/// `d` in `1..=max_d`, alphabet sizes in `2..=3`.
pub fn random_shape(rng: &mut ChaCha8Rng, min_d: usize, max_d: usize) -> Vec<usize> {
    let d = rng.gen_range(min_d..=max_d);
    (0..d).map(|_| rng.gen_range(2..=3)).collect()
}

/// Positive weights summing to one, each at least `floor`; cubing the raw
/// draws spreads the cell masses out.
pub fn random_simplex(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0f64..1.0).powi(3) + 1e-9).collect();
    let total: f64 = raw.iter().sum();
    let free = 1.0 - floor * n as f64;
    let mut w: Vec<f64> = raw.iter().map(|r| floor + free * r / total).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// Full-support joint law with every cell at least `MIN_WEIGHT`.
pub fn random_full_support(rng: &mut ChaCha8Rng, shape: &[usize]) -> JointPmf {
    let n = grid_size(shape);
    JointPmf::new(inputs_for(shape), random_simplex(rng, n, MIN_WEIGHT))
}

/// Product of random marginals.
pub fn random_product(rng: &mut ChaCha8Rng, shape: &[usize]) -> JointPmf {
    let marginals: Vec<Vec<f64>> = shape.iter().map(|&k| random_simplex(rng, k, 0.05)).collect();
    let n = grid_size(shape);
    let weights = (0..n)
        .map(|cell| {
            cell_coords(shape, cell)
                .iter()
                .zip(&marginals)
                .map(|(&c, m)| m[c])
                .product()
        })
        .collect();
    JointPmf::new(inputs_for(shape), weights)
}

/// Full-support law satisfying both admissibility conditions, with every
/// cell at least `MIN_WEIGHT`: a blend of a product law and a random law.
/// The blend weight is halved until the Feshchenko matrix is positive
/// definite, and set to zero after 20 halvings. Returns the law and the
/// number of rejected blends.
pub fn random_admissible(rng: &mut ChaCha8Rng, shape: &[usize]) -> (JointPmf, usize) {
    let floor = MIN_WEIGHT.powf(1.0 / shape.len() as f64);
    let marginals: Vec<Vec<f64>> = shape
        .iter()
        .map(|&k| random_simplex(rng, k, floor.min(0.5 / k as f64)))
        .collect();
    let n = grid_size(shape);
    let product: Vec<f64> = (0..n)
        .map(|cell| {
            cell_coords(shape, cell)
                .iter()
                .zip(&marginals)
                .map(|(&c, m)| m[c])
                .product()
        })
        .collect();
    let dependent = random_simplex(rng, n, MIN_WEIGHT);
    let mut t: f64 = rng.gen_range(0.0..1.0);
    let mut rejected = 0;
    loop {
        let weights = product
            .iter()
            .zip(&dependent)
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        let pmf = JointPmf::new(inputs_for(shape), weights);
        let support = validate_pmf(&pmf).expect("valid law");
        let a1 = check_assumption1(&support, PairSelection::Auto);
        let admissible = a1.pass
            && feshchenko_matrix(&support, Verification::Checked(&a1), DEFAULT_TOL)
                .map(|delta| delta.min_eigenvalue > DEFAULT_EPS_PD)
                .unwrap_or(false);
        if admissible || t == 0.0 {
            return (pmf, rejected);
        }
        rejected += 1;
        t = if rejected >= 20 { 0.0 } else { t / 2.0 };
    }
}

pub fn random_model(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

/// `E[G | X_B]` evaluated on every grid cell, by summing over the cells that
/// agree with it on the coordinates in `bits`. Zero-mass blocks give 0.
pub fn brute_conditional_expectation(pmf: &JointPmf, model: &[f64], bits: u16) -> Vec<f64> {
    let shape = pmf.shape();
    let n = grid_size(&shape);
    let coords: Vec<Vec<usize>> = (0..n).map(|c| cell_coords(&shape, c)).collect();
    let agree = |x: &[usize], y: &[usize]| {
        (0..shape.len()).all(|i| bits & (1 << i) == 0 || x[i] == y[i])
    };
    (0..n)
        .map(|c| {
            let (mut mass, mut acc) = (0.0, 0.0);
            for o in 0..n {
                if agree(&coords[c], &coords[o]) {
                    mass += pmf.weights[o];
                    acc += pmf.weights[o] * model[o];
                }
            }
            if mass > 0.0 {
                acc / mass
            } else {
                0.0
            }
        })
        .collect()
}

/// Classical Hoeffding component `Σ_{B ⊆ A} (-1)^{|A|-|B|} E[G | X_B]` on the full grid.
pub fn brute_classical_component(pmf: &JointPmf, model: &[f64], bits: u16) -> Vec<f64> {
    let n = model.len();
    let mut out = vec![0.0; n];
    let mut sub = bits;
    loop {
        let sign = if (bits.count_ones() - sub.count_ones()).is_multiple_of(2) { 1.0 } else { -1.0 };
        let e = brute_conditional_expectation(pmf, model, sub);
        out.iter_mut().zip(&e).for_each(|(o, v)| *o += sign * v);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & bits;
    }
    out
}

/// Strictly admissible two-Bernoulli parameters, away from the boundary of
/// the admissible range of `rho`.
pub fn random_bernoulli(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let q1 = rng.gen_range(0.05..0.95);
    let q2 = rng.gen_range(0.05..0.95);
    let lo = (q1 + q2 - 1.0f64).max(0.0);
    let hi = q1.min(q2);
    let rho = lo + (hi - lo) * rng.gen_range(0.05..0.95);
    (q1, q2, rho)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> PathBuf {
    crate_dir().join("tests/fixtures").join(name)
}

pub fn golden_dir() -> PathBuf {
    crate_dir().join("tests/golden")
}

pub fn schema_dir() -> PathBuf {
    crate_dir().join("../../schema/v1")
}

/// One CLI invocation with a stored expected standard output.
pub struct GoldenCase {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit_code: i32,
    /// Report schema for JSON output.
    pub schema: Option<&'static str>,
}

pub const GOLDEN_CASES: &[GoldenCase] = &[
    GoldenCase { name: "check_product2.txt", args: &["check", "--format", "table", "@product2.json"], exit_code: 0, schema: None },
    GoldenCase { name: "check_dependent2.json", args: &["check", "@dependent2.json"], exit_code: 0, schema: Some("check") },
    GoldenCase { name: "check_copied.json", args: &["check", "@copied.json"], exit_code: 3, schema: Some("check") },
    GoldenCase { name: "check_copied.txt", args: &["check", "--format", "table", "@copied.json"], exit_code: 3, schema: None },
    GoldenCase { name: "angles_dependent2.csv", args: &["angles", "--format", "csv", "@dependent2.json"], exit_code: 0, schema: None },
    GoldenCase { name: "angles_mixed3.json", args: &["angles", "@mixed3.json"], exit_code: 0, schema: Some("angles") },
    GoldenCase { name: "decompose_dependent2.json", args: &["decompose", "@dependent2.json"], exit_code: 0, schema: Some("decompose") },
    GoldenCase { name: "decompose_deficient.json", args: &["decompose", "@deficient.json"], exit_code: 0, schema: Some("decompose") },
    GoldenCase { name: "decompose_mixed3.json", args: &["decompose", "@mixed3.json"], exit_code: 0, schema: Some("decompose") },
    GoldenCase { name: "decompose_product2_unverified.json", args: &["decompose", "--skip-checks", "@product2.json"], exit_code: 0, schema: Some("decompose") },
    GoldenCase { name: "indices_dependent2.json", args: &["indices", "@dependent2.json"], exit_code: 0, schema: Some("indices") },
    GoldenCase { name: "indices_mixed3.csv", args: &["indices", "--format", "csv", "@mixed3.json"], exit_code: 0, schema: None },
    GoldenCase { name: "indices_mixed3.txt", args: &["indices", "--format", "table", "@mixed3.json"], exit_code: 0, schema: None },
    GoldenCase { name: "indices_product2_which.json", args: &["indices", "--which", "correlative,dependence", "@product2.json"], exit_code: 0, schema: Some("indices") },
    GoldenCase { name: "explain_mixed3.json", args: &["explain", "--cell", "1,2,0", "@mixed3.json"], exit_code: 0, schema: Some("explain") },
    GoldenCase { name: "explain_deficient.csv", args: &["explain", "--cell", "0,1", "--format", "csv", "@deficient.json"], exit_code: 0, schema: None },
    GoldenCase { name: "bernoulli_xor.json", args: &["bernoulli", "--q1", "0.5", "--q2", "0.5", "--rho", "0.3", "--g", "0,1,1,0"], exit_code: 0, schema: Some("bernoulli") },
    GoldenCase { name: "bernoulli_generic.txt", args: &["bernoulli", "--q1", "0.3", "--q2", "0.6", "--rho", "0.25", "--g", "-1,1.5,2,0", "--format", "table"], exit_code: 0, schema: None },
];

/// Expands `@name` arguments to fixture paths.
pub fn resolve_args(args: &[&str]) -> Vec<String> {
    args.iter()
        .map(|a| match a.strip_prefix('@') {
            Some(name) => fixture(name).to_string_lossy().into_owned(),
            None => a.to_string(),
        })
        .collect()
}

pub struct CliRun {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(args: &[String]) -> CliRun {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_hoeffding"))
        .args(args)
        .env_remove("HO_TOL")
        .output()
        .expect("binary runs");
    CliRun {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("UTF-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("UTF-8 stderr"),
    }
}

/// Validates a report against `schema/v1/<kind>.schema.json`.
pub fn schema_errors(kind: &str, text: &str) -> Vec<String> {
    let path = schema_dir().join(format!("{kind}.schema.json"));
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).expect("schema file")).expect("schema JSON");
    let instance: serde_json::Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return vec![format!("not JSON: {e}")],
    };
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let result = match compiled.validate(&instance) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    result
}
