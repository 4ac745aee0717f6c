//! The B-spline interpolation problem: given `Y ⊆ X`, a form `B` and a
//! target `x`, find `s ∈ x + Y` with `B(s, y) = 0` for every `y ∈ Y`.
//!
//! Writing `s = x + y₀`, the condition reads `Π T y₀ = −Π T x` with
//! `y₀ ∈ Y`, i.e. a linear system for the compression `S = ΠTΠ|_Y`. The
//! solver takes the minimum-norm least-squares `y₀`; the problem is solvable
//! iff that residual vanishes (to tolerance), and the full solution set is
//! `s + Y̌` with `Y̌ = ker S` the right radical.

use crate::error::{Error, Result};
use crate::forms::{self, Compression, SesquilinearForm};
use crate::hilbert_module::{ModuleSpace, ModuleVector, Submodule};
use crate::linalg::{self, CMat};
use crate::localization::{self, CoercivityOptions, CoercivityTable};
use crate::parallel::{self, Execution};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SplineProblem {
    space: ModuleSpace,
    y: Submodule,
    form: SesquilinearForm,
    x: ModuleVector,
    tol: f64,
}

impl SplineProblem {
    pub fn new(y: Submodule, form: SesquilinearForm, x: ModuleVector, tol: f64) -> Result<Self> {
        let space = y.space().clone();
        if form.space() != &space {
            return Err(Error::shape("form and submodule live in different modules"));
        }
        space.check(&x).map_err(|e| Error::shape(format!("target: {e}")))?;
        if !(tol > 0.0) {
            return Err(Error::validation(format!("tolerance must be positive, got {tol}")));
        }
        Ok(Self {
            space,
            y,
            form,
            x,
            tol,
        })
    }

    pub fn space(&self) -> &ModuleSpace {
        &self.space
    }

    pub fn submodule(&self) -> &Submodule {
        &self.y
    }

    pub fn form(&self) -> &SesquilinearForm {
        &self.form
    }

    pub fn target(&self) -> &ModuleVector {
        &self.x
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_target(&self, x: ModuleVector) -> Result<Self> {
        Self::new(self.y.clone(), self.form.clone(), x, self.tol)
    }

    pub fn with_tol(&self, tol: f64) -> Result<Self> {
        Self::new(self.y.clone(), self.form.clone(), self.x.clone(), tol)
    }
}

#[derive(Debug, Clone)]
pub struct SplineReport {
    pub solvable: bool,
    /// The spline `s = x + y₀` with minimum-norm `y₀`; absent when unsolvable.
    pub solution: Option<ModuleVector>,
    /// `max_g ‖B(s, g)‖` over the generators of `Y`, at the least-squares `s`.
    pub residual: f64,
    /// Euclidean least-squares residual `‖S y₀ + Π T x‖`.
    pub ls_residual: f64,
    /// The acceptance threshold `tol · (1 + ‖T‖·‖x‖)` for `ls_residual`.
    pub threshold: f64,
    pub unique: bool,
    /// Flat dimensions of the right and left radicals.
    pub radical_dims: (usize, usize),
    pub necessary_condition: bool,
    pub positive_on_y: bool,
    /// `range(ΠT) ⊆ range(ΠTΠ)`: solvable for every target.
    pub solvable_for_all_targets: bool,
    /// `T(X) ⊆ T(Y)`, the Hilbert-space criterion that fails for modules.
    pub naive_range_containment: bool,
    pub coercivity: Option<CoercivityTable>,
    pub diagnostics: Vec<String>,
}

struct LeastSquares {
    y0: ModuleVector,
    ls_residual: f64,
    threshold: f64,
}

fn least_squares(p: &SplineProblem, comp: &Compression) -> LeastSquares {
    let t = p.form.operator();
    let cutoff = comp.kernel_cutoff();
    let mut sq = 0.0;
    let stacks: Vec<CMat> = comp
        .bases()
        .iter()
        .zip(comp.blocks())
        .enumerate()
        .map(|(k, (u, s))| {
            let rhs = -(u.adjoint() * (t.block(k) * p.x.stack(k)));
            let coeffs = linalg::pinv_solve(s, &rhs, cutoff);
            let r = s * &coeffs - &rhs;
            sq += r.norm_squared();
            u * coeffs
        })
        .collect();
    LeastSquares {
        y0: ModuleVector::from_stacks_unchecked(&p.space, &stacks),
        ls_residual: sq.sqrt(),
        threshold: p.tol * (1.0 + t.norm() * p.x.flat_norm()),
    }
}

/// `max_g ‖B(s, g)‖` over the generators of `Y`.
pub fn spline_residual(p: &SplineProblem, s: &ModuleVector) -> f64 {
    p.y.generators()
        .iter()
        .map(|g| p.form.apply_unchecked(s, g).norm())
        .fold(0.0, f64::max)
}

/// Whether a spline exists in `x + Y` for this problem's target.
pub fn check_existence(p: &SplineProblem) -> bool {
    let comp = forms::compress_unchecked(&p.form, &p.y);
    let ls = least_squares(p, &comp);
    ls.ls_residual <= ls.threshold
}

/// Uniqueness holds iff the right radical is zero.
pub fn check_uniqueness(p: &SplineProblem) -> bool {
    forms::right_radical(&p.form, &p.y)
        .map(|r| r.is_zero())
        .unwrap_or(false)
}

/// `B(x, y̌) = 0` for all `x ∈ X` and `y̌ ∈ Y̌`, i.e. `T* Y̌ = 0`.
pub fn check_necessary_condition(p: &SplineProblem) -> bool {
    let rad = forms::right_radical(&p.form, &p.y).expect("problem shares one space");
    necessary_condition_on(&p.form, &rad, p.tol)
}

fn necessary_condition_on(form: &SesquilinearForm, rad: &Submodule, tol: f64) -> bool {
    rad.block_bases()
        .iter()
        .zip(form.operator().blocks())
        .all(|(w, t)| w.ncols() == 0 || linalg::spectral_norm(&(t.adjoint() * w)) <= tol)
}

fn range_contained(a: &CMat, b: &CMat, scale: f64, tol: f64) -> bool {
    if a.ncols() == 0 || a.nrows() == 0 {
        return true;
    }
    let q = linalg::range_basis_abs(b, linalg::RANK_RTOL * scale);
    let residual = a - &q * (q.adjoint() * a);
    linalg::spectral_norm(&residual) <= tol * (1.0 + scale)
}

/// `range(ΠT) ⊆ range(ΠTΠ)`: every target admits a spline.
pub fn solvable_for_all_targets(form: &SesquilinearForm, y: &Submodule, tol: f64) -> bool {
    let t = form.operator();
    let scale = t.norm();
    let comp = forms::compress_unchecked(form, y);
    comp.bases()
        .iter()
        .zip(comp.blocks())
        .enumerate()
        .all(|(k, (u, s))| range_contained(&(u.adjoint() * t.block(k)), s, scale, tol))
}

/// `T(X) ⊆ T(Y)` on the flattened space.
pub fn naive_range_containment(form: &SesquilinearForm, y: &Submodule, tol: f64) -> bool {
    let t = form.operator();
    let scale = t.norm();
    y.block_bases()
        .iter()
        .enumerate()
        .all(|(k, u)| range_contained(t.block(k), &(t.block(k) * u), scale, tol))
}

/// Solves the interpolation problem and evaluates every condition
/// that is cheap to decide.
pub fn solve(p: &SplineProblem) -> SplineReport {
    let comp = forms::compress_unchecked(&p.form, &p.y);
    let ls = least_squares(p, &comp);
    let s = p.x.add(&ls.y0);
    let solvable = ls.ls_residual <= ls.threshold;
    let right = forms::right_radical(&p.form, &p.y).expect("problem shares one space");
    let left = forms::left_radical(&p.form, &p.y).expect("problem shares one space");
    let positive = forms::compression_is_positive(&comp, p.tol);
    let necessary = necessary_condition_on(&p.form, &right, p.tol);

    let mut diagnostics = vec![
        "closedness of P·T·Y holds automatically in finite dimensions".to_string(),
    ];
    if !right.is_zero() {
        diagnostics.push(format!(
            "solution set is s + right radical (flat dimension {})",
            right.flat_dim()
        ));
    }
    if positive && !necessary {
        diagnostics.push("positive on Y but T* does not annihilate the right radical".into());
    }
    if !solvable {
        diagnostics.push(format!(
            "least-squares residual {:.3e} exceeds threshold {:.3e}",
            ls.ls_residual, ls.threshold
        ));
    }

    SplineReport {
        solvable,
        residual: spline_residual(p, &s),
        solution: solvable.then_some(s),
        ls_residual: ls.ls_residual,
        threshold: ls.threshold,
        unique: right.is_zero(),
        radical_dims: (right.flat_dim(), left.flat_dim()),
        necessary_condition: necessary,
        positive_on_y: positive,
        solvable_for_all_targets: solvable_for_all_targets(&p.form, &p.y, p.tol),
        naive_range_containment: naive_range_containment(&p.form, &p.y, p.tol),
        coercivity: None,
        diagnostics,
    }
}

/// The particular solution together with the submodule `Y̌` of homogeneous
/// corrections, or `None` when unsolvable.
pub fn solution_set(p: &SplineProblem) -> Option<(ModuleVector, Submodule)> {
    let report = solve(p);
    let s = report.solution?;
    let rad = forms::right_radical(&p.form, &p.y).expect("problem shares one space");
    Some((s, rad))
}

/// `solve` plus, when requested and the form is positive on `Y`, a
/// coercivity table.
pub fn analyze(p: &SplineProblem, coercivity: Option<&CoercivityOptions>) -> SplineReport {
    let mut report = solve(p);
    if let Some(opts) = coercivity {
        if report.positive_on_y {
            let states =
                crate::algebra::pure_state_grid(p.space.spec(), opts.states_per_block, opts.seed);
            match localization::coercivity_estimate(&p.form, &p.y, &states, opts) {
                Ok(table) => report.coercivity = Some(table),
                Err(e) => report.diagnostics.push(format!("coercivity skipped: {e}")),
            }
        } else {
            report
                .diagnostics
                .push("coercivity skipped: form is not positive on Y".into());
        }
    }
    report
}

/// Solves many problems, in parallel when `exec` allows.
pub fn solve_batch(problems: &[SplineProblem], exec: Execution) -> Vec<SplineReport> {
    parallel::map(problems, exec, solve)
}

/// Splits `X = S_B ⊕ Y` where `S_B = { s : B(s, y) = 0 ∀ y ∈ Y }` is the
/// space of B-splines. `B` must be an inner product on all of `X`.
pub fn decompose(
    space: &ModuleSpace,
    form: &SesquilinearForm,
    y: &Submodule,
    tol: f64,
) -> Result<(Submodule, Submodule)> {
    if form.space() != space || y.space() != space {
        return Err(Error::shape("form, submodule and space must agree"));
    }
    let full = Submodule::full(space);
    if !forms::is_positive_on(form, &full, tol)? {
        return Err(Error::domain("decomposition needs a positive form on X"));
    }
    if !forms::right_radical(form, &full)?.is_zero() {
        return Err(Error::domain("decomposition needs a non-degenerate form on X"));
    }
    let t = form.operator();
    let cutoff = linalg::RANK_RTOL * t.norm();
    let bases: Vec<CMat> = (0..space.spec().num_blocks())
        .map(|k| linalg::null_basis_abs(&(y.block_projector(k) * t.block(k)), cutoff))
        .collect();
    let splines = Submodule::from_bases(space, bases);
    for (k, (s, u)) in splines.block_bases().iter().zip(y.block_bases()).enumerate() {
        let h = space.stack_height(k);
        if s.ncols() + u.ncols() != h {
            return Err(Error::validation(format!(
                "block {k}: dimensions {} + {} do not add up to {h}",
                s.ncols(),
                u.ncols()
            )));
        }
        let mut joint = CMat::zeros(h, h);
        joint.view_mut((0, 0), s.shape()).copy_from(s);
        joint.view_mut((0, s.ncols()), u.shape()).copy_from(u);
        let smallest = linalg::full_svd(&joint)
            .sigma
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if h > 0 && smallest <= linalg::RANK_RTOL {
            return Err(Error::validation(format!(
                "block {k}: spline space meets Y non-trivially"
            )));
        }
    }
    Ok((splines, y.clone()))
}
