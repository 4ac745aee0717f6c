//! Pure-state localization and coercivity estimation.
//!
//! For a pure state `f(a) = v* a_k v`, the semi-inner product
//! `(x, y)_f = f(⟨y, x⟩)` only sees block `k`: `f(⟨y, x⟩) = (Y_k v)* (X_k v)`.
//! The localized Hilbert space is therefore the range of `x ↦ X_k v`, and
//! `LocalizedSpace` recovers it independently from the Gram matrix.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::algebra::{AlgebraElement, PureState};
use crate::error::{Error, Result};
use crate::forms::{self, ModuleOperator, SesquilinearForm};
use crate::hilbert_module::{self, ModuleSpace, ModuleVector, Submodule};
use crate::linalg::{self, CMat, CVec};
use crate::parallel::{self, Execution};
use crate::random;
use crate::spline::{SplineProblem, DEFAULT_TOL};

/// The class of `x` in `ℋ_f`, computed directly as `X_k v`.
pub fn localized_vector(f: &PureState, x: &ModuleVector) -> CVec {
    x.stack(f.block_index()) * f.vector()
}

/// `ℋ_f` as the finite-rank factor of the Gram matrix of `f(⟨·, ·⟩)`.
#[derive(Debug, Clone)]
pub struct LocalizedSpace {
    state: PureState,
    gram: CMat,
    factor: CMat,
}

impl LocalizedSpace {
    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// `G[a, b] = f(⟨e_a, e_b⟩)` over the flat basis, so that
    /// `f(⟨y, x⟩) = ŷ* G x̂`.
    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    /// Rows span `ℋ_f`; `G = L* L`.
    pub fn factor(&self) -> &CMat {
        &self.factor
    }

    pub fn embed(&self, x: &ModuleVector) -> CVec {
        &self.factor * x.flatten()
    }

    /// `(x + 𝒩_f, y + 𝒩_f)_f`.
    pub fn inner(&self, x: &ModuleVector, y: &ModuleVector) -> C64 {
        self.embed(y).dotc(&self.embed(x))
    }

    pub fn min_gram_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.gram)
            .first()
            .copied()
            .unwrap_or(0.0)
    }
}

pub fn localize(f: &PureState, space: &ModuleSpace) -> LocalizedSpace {
    let basis = space.flat_basis();
    let d = basis.len();
    let mut gram = CMat::zeros(d, d);
    for (a, ea) in basis.iter().enumerate() {
        for (b, eb) in basis.iter().enumerate() {
            gram[(a, b)] = f.evaluate(&hilbert_module::inner_product_unchecked(ea, eb));
        }
    }
    let (values, vectors) = linalg::hermitian_eigen(&gram);
    let top = values.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..d)
        .filter(|&i| values[i] > linalg::RANK_RTOL * top.max(1.0))
        .collect();
    let mut factor = CMat::zeros(keep.len(), d);
    for (r, &i) in keep.iter().enumerate() {
        let row = vectors.column(i).adjoint() * C64::from(values[i].sqrt());
        factor.set_row(r, &row);
    }
    LocalizedSpace {
        state: f.clone(),
        gram,
        factor,
    }
}

/// `|(x + 𝒩_f, τ_f)_f − f(τ(x))|` for `τ = ⟨w, ·⟩`, with `τ_f` taken as the
/// class of the representer `w`.
pub fn localized_functional_identity(
    f: &PureState,
    x: &ModuleVector,
    w: &ModuleVector,
) -> Result<f64> {
    let space = ModuleSpace::new(f_spec(f, x)?, x.rank())?;
    space.check(w)?;
    let h = localize(f, &space);
    let tau_x = hilbert_module::inner_product_unchecked(w, x);
    Ok((h.inner(x, w) - f.evaluate(&tau_x)).norm())
}

fn f_spec(f: &PureState, x: &ModuleVector) -> Result<crate::algebra::AlgebraSpec> {
    let spec = x
        .entries()
        .first()
        .map(AlgebraElement::spec)
        .ok_or_else(|| Error::shape("empty module vector"))?;
    if f.block_index() >= spec.num_blocks()
        || spec.block_sizes()[f.block_index()] != f.vector().len()
    {
        return Err(Error::shape("state does not match the algebra of x"));
    }
    Ok(spec)
}

#[derive(Debug, Clone)]
pub struct CoercivityOptions {
    pub k_grid: Vec<f64>,
    pub states_per_block: usize,
    pub targets: usize,
    pub random_candidates: usize,
    pub seed: u64,
    pub tol: f64,
    pub execution: Execution,
}

impl Default for CoercivityOptions {
    fn default() -> Self {
        Self {
            k_grid: vec![0.25, 0.5, 0.75, 1.0],
            states_per_block: 64,
            targets: 64,
            random_candidates: 32,
            seed: 0,
            tol: DEFAULT_TOL,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityRow {
    pub k: f64,
    /// Estimated best constant; infinite when no pair was evaluated.
    pub c_hat: f64,
    /// Number of evaluated (state, target) pairs.
    pub witnesses: usize,
    /// Pairs for which no candidate met `f(|y|²) ≥ k`.
    pub unmet: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityTable {
    pub rows: Vec<CoercivityRow>,
    pub states: usize,
    pub targets_per_state: usize,
    pub random_candidates: usize,
    pub seed: u64,
}

impl CoercivityTable {
    pub fn c_hat(&self, k: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.k == k).map(|r| r.c_hat)
    }
}

/// `|f(B(x, y))|² / (f(|x|²) f(|y|²))`; `None` when a denominator vanishes.
pub fn coercivity_ratio(
    b: &SesquilinearForm,
    f: &PureState,
    x: &ModuleVector,
    y: &ModuleVector,
) -> Option<f64> {
    let k = f.block_index();
    let xv = localized_vector(f, x);
    let yv = localized_vector(f, y);
    let a = b.operator().block(k) * &xv;
    let den = xv.norm_squared() * yv.norm_squared();
    (den > 0.0).then(|| a.dotc(&yv).norm_sqr() / den)
}

/// One candidate `y`, reduced to what the ratio needs.
struct Scored {
    ratio: f64,
    /// `f(|y|²)` after scaling `y` to module norm one.
    fy: f64,
}

fn score(a: &CVec, fx: f64, v: &CVec, k: usize, stacks: &[CMat]) -> Option<Scored> {
    let norm = stacks.iter().map(linalg::spectral_norm).fold(0.0, f64::max);
    if norm == 0.0 {
        return None;
    }
    let yv = &stacks[k] * v;
    let fy_raw = yv.norm_squared();
    if fy_raw == 0.0 {
        return None;
    }
    Some(Scored {
        ratio: a.dotc(&yv).norm_sqr() / (fx * fy_raw),
        fy: fy_raw / (norm * norm),
    })
}

/// Best ratio over the candidate set for each `k`, or `None` for a `k` that
/// no candidate reaches. Returns `None` overall when `f(|x|²) ≤ tol`.
pub fn pair_best_ratio(
    b: &SesquilinearForm,
    y: &Submodule,
    f: &PureState,
    x: &ModuleVector,
    k_grid: &[f64],
    random_candidates: usize,
    rng: &mut random::InstanceRng,
    tol: f64,
) -> Option<Vec<Option<f64>>> {
    let space = y.space();
    let kb = f.block_index();
    let v = f.vector();
    let xv = localized_vector(f, x);
    let fx = xv.norm_squared();
    if fx <= tol {
        return None;
    }
    let t = b.operator();
    let a = t.block(kb) * &xv;
    let mut cands = Vec::new();

    let xs = x.stacks();
    cands.extend(score(&a, fx, v, kb, &xs));
    let ptx: Vec<CMat> = y
        .block_bases()
        .iter()
        .enumerate()
        .map(|(l, u)| u * (u.adjoint() * (t.block(l) * &xs[l])))
        .collect();
    cands.extend(score(&a, fx, v, kb, &ptx));

    // y = w v* with w the normalized projection of T_k X_k v onto Y's block.
    // Its stack has module norm one and f(|y|²) = 1, and by Cauchy-Schwarz no
    // y ∈ Y does better, so this candidate attains the supremum for every k.
    let u = y.block_basis(kb);
    let pa = u.adjoint() * &a;
    if pa.norm_squared() > 0.0 {
        cands.push(Scored {
            ratio: pa.norm_squared() / fx,
            fy: 1.0,
        });
    }

    // Basis vectors of Y in block k are rank one, u e_cᵀ: module norm one,
    // f(|y|²) = |v_c|², ratio |a* u|² / f(|x|²).
    let best_vc = v.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    for col in u.column_iter() {
        let ratio = a.dotc(&col).norm_sqr() / fx;
        cands.push(Scored { ratio, fy: best_vc });
    }

    for _ in 0..random_candidates {
        let stacks: Vec<CMat> = y
            .block_bases()
            .iter()
            .enumerate()
            .map(|(l, u)| {
                let n = space.spec().block_sizes()[l];
                u * random::matrix(rng, u.ncols(), n)
            })
            .collect();
        cands.extend(score(&a, fx, v, kb, &stacks));
    }

    Some(
        k_grid
            .iter()
            .map(|&k| {
                cands
                    .iter()
                    .filter(|c| c.fy >= k - 1e-12)
                    .map(|c| c.ratio)
                    .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |m| m.max(r))))
            })
            .collect(),
    )
}

/// Block bases of `Y ⊖ Y̌`.
fn target_bases(b: &SesquilinearForm, y: &Submodule) -> Vec<CMat> {
    let rad = forms::right_radical(b, y).expect("form and submodule share a space");
    y.block_bases()
        .iter()
        .zip(rad.block_bases())
        .map(|(u, w)| {
            let residual = u - w * (w.adjoint() * u);
            linalg::range_basis_abs(&residual, 0.5)
        })
        .collect()
}

fn sample_target(
    space: &ModuleSpace,
    bases: &[CMat],
    rng: &mut random::InstanceRng,
) -> ModuleVector {
    let mut stacks: Vec<CMat> = bases
        .iter()
        .zip(space.spec().block_sizes())
        .map(|(u, &n)| u * random::matrix(rng, u.ncols(), n))
        .collect();
    let norm = stacks.iter().map(|s| s.norm_squared()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for s in &mut stacks {
            s.unscale_mut(norm);
        }
    }
    ModuleVector::from_stacks_unchecked(space, &stacks)
}

/// Estimates the best `c(k)` in `|f(B(x, y))|² ≥ c f(|x|²) f(|y|²)` over the
/// sampled states and targets `x ∈ Y ⊖ Y̌`, with `y` drawn from a finite
/// candidate set subject to `f(|y|²) ≥ k`.
pub fn coercivity_estimate(
    b: &SesquilinearForm,
    y: &Submodule,
    states: &[PureState],
    opts: &CoercivityOptions,
) -> Result<CoercivityTable> {
    if b.space() != y.space() {
        return Err(Error::shape("form and submodule live in different modules"));
    }
    if !forms::is_positive_on(b, y, opts.tol)? {
        return Err(Error::domain("coercivity needs a form that is positive on Y"));
    }
    if let Some(&k) = opts.k_grid.iter().find(|&&k| !(k > 0.0 && k <= 1.0)) {
        return Err(Error::validation(format!("k must lie in (0, 1], got {k}")));
    }
    let spec = y.space().spec();
    for f in states {
        if f.block_index() >= spec.num_blocks()
            || spec.block_sizes()[f.block_index()] != f.vector().len()
        {
            return Err(Error::shape("state does not match the algebra"));
        }
    }
    let mut k_grid = opts.k_grid.clone();
    k_grid.sort_by(f64::total_cmp);
    k_grid.dedup();

    let bases = target_bases(b, y);
    let pairs = states.len() * opts.targets;
    let results = parallel::map_range(pairs, opts.execution, |idx| {
        let f = &states[idx / opts.targets];
        let mut rng = random::stream(opts.seed, idx as u64);
        let x = sample_target(y.space(), &bases, &mut rng);
        pair_best_ratio(b, y, f, &x, &k_grid, opts.random_candidates, &mut rng, opts.tol)
    });

    let rows = k_grid
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let mut c_hat = f64::INFINITY;
            let (mut witnesses, mut unmet) = (0, 0);
            for r in results.iter().flatten() {
                witnesses += 1;
                match r[i] {
                    Some(ratio) => c_hat = c_hat.min(ratio),
                    None => unmet += 1,
                }
            }
            let note = if witnesses == 0 {
                Some("no target with f(|x|²) above tolerance; condition is vacuous".into())
            } else if unmet > 0 {
                c_hat = 0.0;
                Some(format!("{unmet} pairs had no candidate with f(|y|²) ≥ {k}"))
            } else {
                None
            };
            CoercivityRow {
                k,
                c_hat,
                witnesses,
                unmet,
                note,
            }
        })
        .collect();

    Ok(CoercivityTable {
        rows,
        states: states.len(),
        targets_per_state: opts.targets,
        random_candidates: opts.random_candidates,
        seed: opts.seed,
    })
}

/// Finite truncation of the `l²(M_n)` instance whose coercivity constants
/// decay like `(1/2j)²`.
///
/// `X = M_n^{2N}`, `Y` = vectors supported on even (1-based) slots, and
/// `(Tz)_j = z_j / j + z_{j+1} / √j` for even `j`, zero on odd slots. At
/// `j = 2N` the coupling term has nowhere to go and is dropped.
#[derive(Debug, Clone)]
pub struct TruncatedCounterexample {
    pub space: ModuleSpace,
    pub form: SesquilinearForm,
    pub y: Submodule,
    /// `(f_j, x^{(j)})` for `j = 1..=N`.
    pub pairs: Vec<(PureState, ModuleVector)>,
}

pub fn truncated_counterexample(n_block: usize, n: usize) -> Result<TruncatedCounterexample> {
    if n == 0 {
        return Err(Error::validation("truncation length N must be at least 1"));
    }
    if n_block < 2 * n + 2 {
        return Err(Error::validation(format!(
            "block size {n_block} too small for N = {n}; need at least {}",
            2 * n + 2
        )));
    }
    let spec = crate::algebra::AlgebraSpec::new(vec![n_block])?;
    let rank = 2 * n;
    let space = ModuleSpace::new(spec.clone(), rank)?;

    let mut t_scalar = CMat::zeros(rank, rank);
    for j in (2..=rank).step_by(2) {
        let i = j - 1;
        t_scalar[(i, i)] = C64::from(1.0 / j as f64);
        if j < rank {
            t_scalar[(i, i + 1)] = C64::from(1.0 / (j as f64).sqrt());
        }
    }
    let block = linalg::kron_outer_identity(&t_scalar, n_block);
    let form = SesquilinearForm::new(ModuleOperator::from_blocks(&space, vec![block])?);

    let gens = (1..rank).step_by(2).map(|i| space.unit(i)).collect();
    let y = Submodule::from_generators(&space, gens)?;

    let pairs = (1..=n)
        .map(|j| {
            let idx = 2 * j - 1;
            let f = PureState::coordinate(&spec, 0, idx)?;
            let mut p = CMat::zeros(n_block, n_block);
            p[(idx, idx)] = linalg::ONE;
            let mut entries = vec![AlgebraElement::zero(&spec); rank];
            entries[idx] = AlgebraElement::from_blocks(&spec, vec![p])?;
            Ok((f, ModuleVector::new(&space, entries)?))
        })
        .collect::<Result<_>>()?;

    Ok(TruncatedCounterexample {
        space,
        form,
        y,
        pairs,
    })
}

impl TruncatedCounterexample {
    /// The interpolation problem with target `x^{(j)}`, `j` 1-based.
    pub fn problem(&self, j: usize, tol: f64) -> Result<SplineProblem> {
        let (_, x) = self
            .pairs
            .get(j.wrapping_sub(1))
            .ok_or_else(|| Error::validation(format!("j = {j} out of range 1..={}", self.pairs.len())))?;
        SplineProblem::new(self.y.clone(), self.form.clone(), x.clone(), tol)
    }

    /// Best candidate ratio at each designated pair (with `k = 1`).
    pub fn designated_ratios(&self, random_candidates: usize, seed: u64) -> Vec<f64> {
        self.pairs
            .iter()
            .enumerate()
            .map(|(i, (f, x))| {
                let mut rng = random::stream(seed, i as u64);
                pair_best_ratio(&self.form, &self.y, f, x, &[1.0], random_candidates, &mut rng, DEFAULT_TOL)
                    .and_then(|r| r[0])
                    .unwrap_or(0.0)
            })
            .collect()
    }
}
