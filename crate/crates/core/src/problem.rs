//! JSON problem files and reports.
//!
//! ```json
//! {
//!   "algebra": {"blocks": [2, 1]},
//!   "module_rank": 2,
//!   "T": [[a, b], [c, d]],
//!   "Y_generators": [[a, b]],
//!   "x": [a, b],
//!   "options": {"tol": 1e-9, "seed": 0}
//! }
//! ```
//!
//! An algebra element is an array of square blocks, a block is a 2-D array of
//! complex scalars, and a scalar is `[re, im]` (a bare number is read as
//! real). `options` and each of its keys are optional.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};

use crate::algebra::{AlgebraElement, AlgebraSpec};
use crate::error::{Error, Result};
use crate::forms::{ModuleOperator, SesquilinearForm};
use crate::hilbert_module::{ModuleSpace, ModuleVector, Submodule};
use crate::linalg::CMat;
use crate::spline::{SplineProblem, SplineReport};

/// A decoded problem file; the tolerance is resolved by the caller.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub space: ModuleSpace,
    pub operator: ModuleOperator,
    pub generators: Vec<ModuleVector>,
    pub target: ModuleVector,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl ProblemFile {
    pub fn problem(&self, tol: f64) -> Result<SplineProblem> {
        let y = Submodule::from_generators(&self.space, self.generators.clone())?;
        SplineProblem::new(y, SesquilinearForm::new(self.operator.clone()), self.target.clone(), tol)
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::parse(path, format!("missing field \"{key}\"")))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::parse(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::parse(path, "expected an array"))
}

fn count(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| Error::parse(path, "expected a non-negative integer"))
}

fn real(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::parse(path, "expected a number"))
}

fn scalar(v: &Value, path: &str) -> Result<C64> {
    if let Some(re) = v.as_f64() {
        return Ok(C64::new(re, 0.0));
    }
    let parts = array(v, path)?;
    if parts.len() != 2 {
        return Err(Error::parse(path, "complex scalar must be [re, im]"));
    }
    Ok(C64::new(
        real(&parts[0], &format!("{path}[0]"))?,
        real(&parts[1], &format!("{path}[1]"))?,
    ))
}

fn block(v: &Value, n: usize, path: &str) -> Result<CMat> {
    let rows = array(v, path)?;
    if rows.len() != n {
        return Err(Error::parse(path, format!("block must have {n} rows, found {}", rows.len())));
    }
    let mut out = CMat::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let rpath = format!("{path}[{i}]");
        let cols = array(row, &rpath)?;
        if cols.len() != n {
            return Err(Error::parse(
                &rpath,
                format!("block must have {n} columns, found {}", cols.len()),
            ));
        }
        for (j, z) in cols.iter().enumerate() {
            out[(i, j)] = scalar(z, &format!("{rpath}[{j}]"))?;
        }
    }
    Ok(out)
}

fn element(v: &Value, spec: &AlgebraSpec, path: &str) -> Result<AlgebraElement> {
    let blocks = array(v, path)?;
    if blocks.len() != spec.num_blocks() {
        return Err(Error::parse(
            path,
            format!(
                "algebra element must have {} blocks, found {}",
                spec.num_blocks(),
                blocks.len()
            ),
        ));
    }
    let mats = blocks
        .iter()
        .zip(spec.block_sizes())
        .enumerate()
        .map(|(k, (b, &n))| block(b, n, &format!("{path}[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    AlgebraElement::from_blocks(spec, mats).map_err(|e| Error::parse(path, e.to_string()))
}

fn module_vector(v: &Value, space: &ModuleSpace, path: &str) -> Result<ModuleVector> {
    let entries = array(v, path)?;
    if entries.len() != space.rank() {
        return Err(Error::parse(
            path,
            format!("module vector must have {} entries, found {}", space.rank(), entries.len()),
        ));
    }
    let elems = entries
        .iter()
        .enumerate()
        .map(|(i, e)| element(e, space.spec(), &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    ModuleVector::new(space, elems).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn parse_problem_value(doc: &Value) -> Result<ProblemFile> {
    let root = object(doc, "$")?;
    let alg = object(field(root, "algebra", "$")?, "$.algebra")?;
    let sizes = array(field(alg, "blocks", "$.algebra")?, "$.algebra.blocks")?
        .iter()
        .enumerate()
        .map(|(k, n)| count(n, &format!("$.algebra.blocks[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    let spec = AlgebraSpec::new(sizes).map_err(|e| Error::parse("$.algebra.blocks", e.to_string()))?;
    let rank = count(field(root, "module_rank", "$")?, "$.module_rank")?;
    let space = ModuleSpace::new(spec.clone(), rank)
        .map_err(|e| Error::parse("$.module_rank", e.to_string()))?;

    let rows = array(field(root, "T", "$")?, "$.T")?;
    if rows.len() != rank {
        return Err(Error::parse("$.T", format!("T must have {rank} rows, found {}", rows.len())));
    }
    let mut entries = Vec::with_capacity(rank);
    for (i, row) in rows.iter().enumerate() {
        let path = format!("$.T[{i}]");
        let cols = array(row, &path)?;
        if cols.len() != rank {
            return Err(Error::parse(&path, format!("T rows must have {rank} entries, found {}", cols.len())));
        }
        entries.push(
            cols.iter()
                .enumerate()
                .map(|(j, e)| element(e, &spec, &format!("{path}[{j}]")))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let operator =
        ModuleOperator::from_entries(&space, &entries).map_err(|e| Error::parse("$.T", e.to_string()))?;

    let generators = match root.get("Y_generators") {
        None | Some(Value::Null) => Vec::new(),
        Some(v) => array(v, "$.Y_generators")?
            .iter()
            .enumerate()
            .map(|(g, v)| module_vector(v, &space, &format!("$.Y_generators[{g}]")))
            .collect::<Result<Vec<_>>>()?,
    };
    let target = module_vector(field(root, "x", "$")?, &space, "$.x")?;

    let (mut tol, mut seed) = (None, None);
    if let Some(opts) = root.get("options").filter(|v| !v.is_null()) {
        let opts = object(opts, "$.options")?;
        if let Some(t) = opts.get("tol").filter(|v| !v.is_null()) {
            let t = real(t, "$.options.tol")?;
            if !(t > 0.0) {
                return Err(Error::parse("$.options.tol", "tolerance must be positive"));
            }
            tol = Some(t);
        }
        if let Some(s) = opts.get("seed").filter(|v| !v.is_null()) {
            seed = Some(
                s.as_u64()
                    .ok_or_else(|| Error::parse("$.options.seed", "expected a non-negative integer"))?,
            );
        }
    }

    Ok(ProblemFile {
        space,
        operator,
        generators,
        target,
        tol,
        seed,
    })
}

pub fn parse_problem_str(text: &str) -> Result<ProblemFile> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    parse_problem_value(&doc)
}

pub fn parse_problem(path: &Path) -> Result<ProblemFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    parse_problem_str(&text)
}

fn scalar_json(z: C64) -> Value {
    json!([z.re, z.im])
}

fn element_json(a: &AlgebraElement) -> Value {
    Value::Array(
        a.blocks()
            .iter()
            .map(|b| {
                Value::Array(
                    b.row_iter()
                        .map(|r| Value::Array(r.iter().map(|&z| scalar_json(z)).collect()))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn module_vector_json(x: &ModuleVector) -> Value {
    Value::Array(x.entries().iter().map(element_json).collect())
}

pub fn problem_json(p: &SplineProblem, seed: Option<u64>) -> Value {
    let t = p.form().operator().entries();
    let mut options = json!({ "tol": p.tol() });
    if let Some(s) = seed {
        options["seed"] = json!(s);
    }
    json!({
        "algebra": { "blocks": p.space().spec().block_sizes() },
        "module_rank": p.space().rank(),
        "T": t.iter().map(|row| row.iter().map(element_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "Y_generators": p.submodule().generators().iter().map(module_vector_json).collect::<Vec<_>>(),
        "x": module_vector_json(p.target()),
        "options": options,
    })
}

pub fn report_json(r: &SplineReport) -> Value {
    json!({
        "solvable": r.solvable,
        "solution": r.solution.as_ref().map(module_vector_json),
        "residual": r.residual,
        "ls_residual": r.ls_residual,
        "threshold": r.threshold,
        "unique": r.unique,
        "radical_dims": { "right": r.radical_dims.0, "left": r.radical_dims.1 },
        "necessary_condition": r.necessary_condition,
        "positive_on_y": r.positive_on_y,
        "solvable_for_all_targets": r.solvable_for_all_targets,
        "naive_range_containment": r.naive_range_containment,
        "closed_range": true,
        "coercivity": r.coercivity,
        "diagnostics": r.diagnostics,
    })
}

/// `{"problem": …, "report": …}`; the problem part parses back unchanged.
pub fn document_json(p: &SplineProblem, seed: Option<u64>, r: &SplineReport) -> Value {
    json!({ "problem": problem_json(p, seed), "report": report_json(r) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::spline::{self, DEFAULT_TOL};

    #[test]
    fn minimal_file() {
        let text = r#"{
            "algebra": {"blocks": [1]},
            "module_rank": 1,
            "T": [[[[[[1, 0]]]]]],
            "Y_generators": [],
            "x": [[[[[1, 0]]]]]
        }"#;
        let f = parse_problem_str(text).unwrap();
        assert_eq!(f.tol, None);
        let p = f.problem(DEFAULT_TOL).unwrap();
        assert!(p.submodule().is_zero());
        assert!(spline::solve(&p).solvable);
    }

    #[test]
    fn errors_carry_locations() {
        let bad_block = r#"{
            "algebra": {"blocks": [2, 1]},
            "module_rank": 1,
            "T": [[[[[1,0],[0,0]], [[1,0],[0,0]]]]],
            "x": [[[[1,0],[0,0]],[[1,0],[0,0]]]]
        }"#;
        match parse_problem_str(bad_block) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "$.T[0][0][1]"),
            other => panic!("{other:?}"),
        }

        let missing = r#"{"algebra": {"blocks": [1]}, "module_rank": 1, "x": [[[[1]]]]}"#;
        match parse_problem_str(missing) {
            Err(Error::Parse { location, message }) => {
                assert_eq!(location, "$");
                assert!(message.contains("\"T\""));
            }
            other => panic!("{other:?}"),
        }

        let scalar = r#"{"algebra": {"blocks": [1]}, "module_rank": 1,
            "T": [[[[[[1, 0, 3]]]]]], "x": [[[[1]]]]}"#;
        match parse_problem_str(scalar) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "$.T[0][0][0][0][0]"),
            other => panic!("{other:?}"),
        }

        assert!(matches!(parse_problem_str("{"), Err(Error::Parse { .. })));
        let zero_tol = r#"{"algebra": {"blocks": [1]}, "module_rank": 1,
            "T": [[[[[1]]]]], "x": [[[[1]]]], "options": {"tol": 0}}"#;
        assert!(matches!(parse_problem_str(zero_tol), Err(Error::Parse { .. })));
    }

    #[test]
    fn document_roundtrip_is_exact() {
        let mut rng = random::rng(21);
        for _ in 0..10 {
            let space = random::space(&mut rng, 30);
            let y = random::submodule(&mut rng, &space);
            let b = SesquilinearForm::new(random::operator(&mut rng, &space));
            let x = random::vector(&mut rng, &space);
            let p = SplineProblem::new(y, b, x, 1e-8).unwrap();
            let doc = document_json(&p, Some(7), &spline::solve(&p));
            let text = serde_json::to_string_pretty(&doc).unwrap();
            let back: Value = serde_json::from_str(&text).unwrap();
            let f = parse_problem_value(&back["problem"]).unwrap();
            assert_eq!(f.tol, Some(1e-8));
            assert_eq!(f.seed, Some(7));
            assert_eq!(&f.space, p.space());
            assert_eq!(f.operator.blocks(), p.form().operator().blocks());
            assert_eq!(f.generators, p.submodule().generators());
            assert_eq!(&f.target, p.target());
            assert_eq!(problem_json(&f.problem(1e-8).unwrap(), Some(7)), doc["problem"]);
        }
    }
}
