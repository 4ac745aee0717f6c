//! Built-in worked examples with expected-versus-measured verdicts.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::algebra::{AlgebraElement, AlgebraSpec};
use crate::error::{Error, Result};
use crate::forms::{self, ModuleOperator, SesquilinearForm};
use crate::hilbert_module::{ModuleSpace, ModuleVector, Submodule};
use crate::localization::{self, CoercivityOptions};
use crate::random;
use crate::spline::{self, SplineProblem, SplineReport};

pub const NAMES: &[&str] = &["projection", "remark", "abelian", "l2-truncation"];

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub check: String,
    pub expected: String,
    pub measured: String,
    pub pass: bool,
}

impl Verdict {
    fn new(check: &str, expected: impl ToString, measured: impl ToString, pass: bool) -> Self {
        Self {
            check: check.to_string(),
            expected: expected.to_string(),
            measured: measured.to_string(),
            pass,
        }
    }

    fn flag(check: &str, expected: bool, measured: bool) -> Self {
        Self::new(check, expected, measured, expected == measured)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub j: usize,
    pub ratio: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct ExampleRun {
    pub name: String,
    pub problem: SplineProblem,
    pub report: SplineReport,
    pub verdicts: Vec<Verdict>,
    pub ratios: Vec<RatioRow>,
}

impl ExampleRun {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

#[derive(Debug, Clone)]
pub struct ExampleOptions {
    pub tol: f64,
    pub seed: u64,
    pub coercivity: CoercivityOptions,
}

impl Default for ExampleOptions {
    fn default() -> Self {
        Self {
            tol: spline::DEFAULT_TOL,
            seed: 0,
            coercivity: CoercivityOptions::default(),
        }
    }
}

struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    fn new(raw: &[(String, String)], allowed: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (k, v) in raw {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::validation(format!(
                    "unknown parameter \"{k}\"; expected one of {allowed:?}"
                )));
            }
            values.insert(k.clone(), v.clone());
        }
        Ok(Self { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::validation(format!("invalid value \"{v}\" for {key}"))),
        }
    }
}

pub fn run_example(
    name: &str,
    params: &[(String, String)],
    opts: &ExampleOptions,
) -> Result<ExampleRun> {
    match name {
        "projection" => projection(params, opts),
        "remark" => remark(params, opts),
        "abelian" => abelian(params, opts),
        "l2-truncation" => l2_truncation(params, opts),
        _ => Err(Error::validation(format!(
            "unknown example \"{name}\"; expected one of {NAMES:?}"
        ))),
    }
}

fn scalar_vector(space: &ModuleSpace, v: &[f64]) -> ModuleVector {
    let entries = v
        .iter()
        .map(|&z| AlgebraElement::scalar(space.spec(), C64::new(z, 0.0)))
        .collect();
    ModuleVector::new(space, entries).expect("length matches the rank")
}

/// `B(x, y) = ⟨Px, y⟩` with `Y = ran P + Z`, `Z ⊆ ker P`: the splines are
/// `(1 − P)x + Z`.
fn projection(params: &[(String, String)], opts: &ExampleOptions) -> Result<ExampleRun> {
    let params = Params::new(params, &["seed", "kernel"])?;
    let seed = params.get("seed", opts.seed)?;
    let kernel = params.get("kernel", true)?;
    let mut rng = random::rng(seed);
    let space = loop {
        let space = random::space(&mut rng, 4 * 13);
        if !kernel || random::admits_kernel_part(&space) {
            break space;
        }
    };
    let (ran_p, z) = random::projection_with_kernel_part(&mut rng, &space, kernel);
    let z = if kernel { z } else { Submodule::zero(&space) };
    let p_op = ModuleOperator::projection(&ran_p);
    let mut gens = ran_p.generators().to_vec();
    gens.extend(z.generators().iter().cloned());
    let y = Submodule::from_generators(&space, gens)?;
    let x = random::vector(&mut rng, &space);
    let problem = SplineProblem::new(y, SesquilinearForm::new(p_op.clone()), x.clone(), opts.tol)?;
    let report = spline::solve(&problem);

    let mut verdicts = vec![Verdict::flag("solvable", true, report.solvable)];
    verdicts.push(Verdict::new(
        "residual",
        "<= 1e-9",
        format!("{:.3e}", report.residual),
        report.residual <= 1e-9,
    ));
    if let Some(s) = &report.solution {
        let expected = x.sub(&p_op.apply(&x));
        let offset = s.sub(&expected);
        let dist = offset.sub(&z.project(&offset)).flat_norm();
        verdicts.push(Verdict::new(
            "s - (1-P)x lies in Z",
            "distance <= 1e-8",
            format!("{dist:.3e}"),
            dist <= 1e-8 * (1.0 + x.flat_norm()),
        ));
        verdicts.push(Verdict::flag("unique iff Z = 0", z.is_zero(), report.unique));
        if let Some(zvec) = z.basis_vectors().next() {
            let other = s.add(&zvec);
            let r = spline::spline_residual(&problem, &other);
            verdicts.push(Verdict::new(
                "second solution s + z",
                "residual <= 1e-9",
                format!("{r:.3e}"),
                r <= 1e-9,
            ));
        }
    }
    Ok(ExampleRun {
        name: "projection".into(),
        problem,
        report,
        verdicts,
        ratios: Vec::new(),
    })
}

/// Projections `P ≤ Q` on `ℂ³`, `T = Q`, `Y = ran P`: solvable and unique
/// although `T(X) ⊄ T(Y)`.
fn remark(params: &[(String, String)], opts: &ExampleOptions) -> Result<ExampleRun> {
    Params::new(params, &[])?;
    let space = ModuleSpace::new(AlgebraSpec::scalars(), 3)?;
    let diag = |d: [f64; 3]| {
        let spec = space.spec();
        let entries: Vec<Vec<AlgebraElement>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| {
                        let v = if i == j { d[i] } else { 0.0 };
                        AlgebraElement::scalar(spec, C64::new(v, 0.0))
                    })
                    .collect()
            })
            .collect();
        ModuleOperator::from_entries(&space, &entries)
    };
    let q = diag([1.0, 1.0, 0.0])?;
    let p = diag([1.0, 0.0, 0.0])?;
    let y = Submodule::from_generators(&space, vec![space.unit(0)])?;
    let x = scalar_vector(&space, &[1.0, 1.0, 1.0]);
    let problem = SplineProblem::new(y, SesquilinearForm::new(q), x.clone(), opts.tol)?;
    let report = spline::solve(&problem);

    let mut verdicts = vec![
        Verdict::flag("solvable", true, report.solvable),
        Verdict::flag("unique", true, report.unique),
        Verdict::flag("necessary condition", true, report.necessary_condition),
        Verdict::flag("T(X) contained in T(Y)", false, report.naive_range_containment),
    ];
    if let Some(s) = &report.solution {
        let dev = s.sub(&x.sub(&p.apply(&x))).flat_norm();
        verdicts.push(Verdict::new("s = x - Px", "deviation <= 1e-12", format!("{dev:.3e}"), dev <= 1e-12));
    }
    Ok(ExampleRun {
        name: "remark".into(),
        problem,
        report,
        verdicts,
        ratios: Vec::new(),
    })
}

/// `A = ℂ^d ⊕ ℂ^d`, `X = A`, `Y = ℂ^d ⊕ 0`, `B(u, v) = (u₁* v₁, 0)`.
fn abelian(params: &[(String, String)], opts: &ExampleOptions) -> Result<ExampleRun> {
    let params = Params::new(params, &["d", "targets", "seed"])?;
    let d: usize = params.get("d", 1)?;
    let targets: usize = params.get("targets", 100)?;
    let seed = params.get("seed", opts.seed)?;
    if d == 0 {
        return Err(Error::validation("d must be at least 1"));
    }
    let spec = AlgebraSpec::new(vec![1; 2 * d])?;
    let space = ModuleSpace::new(spec.clone(), 1)?;
    let mut diag = vec![C64::new(1.0, 0.0); d];
    diag.extend(vec![C64::new(0.0, 0.0); d]);
    let p = AlgebraElement::from_diagonal(&spec, &diag)?;
    let y = Submodule::from_generators(&space, vec![space.unit(0).right_mul(&p)])?;
    let form = SesquilinearForm::new(ModuleOperator::from_entries(&space, &[vec![p]])?);

    let mut rng = random::rng(seed);
    let mut worst = 0.0f64;
    let mut all_solvable = true;
    for _ in 0..targets {
        let p = SplineProblem::new(y.clone(), form.clone(), random::vector(&mut rng, &space), opts.tol)?;
        let r = spline::solve(&p);
        all_solvable &= r.solvable;
        worst = worst.max(r.residual);
    }

    let problem = SplineProblem::new(y.clone(), form.clone(), random::vector(&mut rng, &space), opts.tol)?;
    let mut copts = opts.coercivity.clone();
    if !copts.k_grid.contains(&1.0) {
        copts.k_grid.push(1.0);
    }
    copts.seed = seed;
    let report = spline::analyze(&problem, Some(&copts));
    let c1 = report.coercivity.as_ref().and_then(|t| t.c_hat(1.0)).unwrap_or(f64::NAN);

    let verdicts = vec![
        Verdict::flag("right radical is zero", true, report.unique),
        Verdict::flag("positive on Y", true, report.positive_on_y),
        Verdict::flag("necessary condition", true, report.necessary_condition),
        Verdict::flag("solvable", true, report.solvable),
        Verdict::new(
            &format!("solvable for {targets} targets"),
            "all, residual <= 1e-9",
            format!("{}, worst {worst:.3e}", if all_solvable { "all" } else { "not all" }),
            all_solvable && worst <= 1e-9,
        ),
        Verdict::new("c_hat(1)", "1 +- 1e-6", format!("{c1}"), (c1 - 1.0).abs() <= 1e-6),
    ];
    Ok(ExampleRun {
        name: "abelian".into(),
        problem,
        report,
        verdicts,
        ratios: Vec::new(),
    })
}

fn l2_truncation(params: &[(String, String)], opts: &ExampleOptions) -> Result<ExampleRun> {
    let params = Params::new(params, &["N", "n", "j", "candidates"])?;
    let big_n: usize = params.get("N", 8)?;
    let n_block: usize = params.get("n", 2 * big_n + 2)?;
    let j: usize = params.get("j", 1)?;
    let candidates: usize = params.get("candidates", opts.coercivity.random_candidates)?;
    let tc = localization::truncated_counterexample(n_block, big_n)?;
    let problem = tc.problem(j, opts.tol)?;
    let report = spline::solve(&problem);
    let rad_zero = forms::right_radical(&tc.form, &tc.y)?.is_zero();

    let ratios: Vec<RatioRow> = tc
        .designated_ratios(candidates, opts.seed)
        .into_iter()
        .enumerate()
        .map(|(i, ratio)| {
            let j = i + 1;
            RatioRow {
                j,
                ratio,
                bound: (1.0 / (2.0 * j as f64)).powi(2),
            }
        })
        .collect();

    let mut verdicts = vec![Verdict::flag("right radical is zero", true, rad_zero)];
    for r in &ratios {
        verdicts.push(Verdict::new(
            &format!("ratio at j = {}", r.j),
            format!("<= {:.6e}", r.bound),
            format!("{:.6e}", r.ratio),
            r.ratio <= r.bound + 1e-9,
        ));
    }
    let decreasing = ratios.windows(2).all(|w| w[1].ratio < w[0].ratio);
    verdicts.push(Verdict::flag("strictly decreasing in j", true, decreasing));
    verdicts.push(Verdict::flag(&format!("truncated problem j = {j} solvable"), true, report.solvable));
    Ok(ExampleRun {
        name: "l2-truncation".into(),
        problem,
        report,
        verdicts,
        ratios,
    })
}
