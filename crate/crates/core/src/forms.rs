//! Bounded A-sesquilinear forms `B(x, y) = ⟨Tx, y⟩` and their radicals.
//!
//! Every such form on `A^m` is carried by an adjointable operator `T`, an
//! `m × m` matrix over `A`. In block `k` the operator acts on the stacked
//! columns by an ordinary `(m·n_k) × (m·n_k)` matrix `T_k`, and in the
//! flattened space by `⊕ₖ I_{n_k} ⊗ T_k`.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::hilbert_module::{inner_product_unchecked, ModuleSpace, ModuleVector, Submodule};
use crate::linalg::{self, CMat};

/// An adjointable operator on `A^m`, stored as one matrix per algebra block.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleOperator {
    space: ModuleSpace,
    blocks: Vec<CMat>,
}

impl ModuleOperator {
    /// Builds `T` from its `m × m` matrix of algebra entries, row-major:
    /// `(Tx)_i = Σ_j T_ij x_j`.
    pub fn from_entries(space: &ModuleSpace, entries: &[Vec<AlgebraElement>]) -> Result<Self> {
        let m = space.rank();
        if entries.len() != m || entries.iter().any(|r| r.len() != m) {
            return Err(Error::shape(format!("operator must be {m}x{m} over A")));
        }
        for (i, row) in entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if &e.spec() != space.spec() {
                    return Err(Error::shape(format!(
                        "T[{i}][{j}] lives over {:?}, expected {:?}",
                        e.spec().block_sizes(),
                        space.spec().block_sizes()
                    )));
                }
            }
        }
        let blocks = space
            .spec()
            .block_sizes()
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let mut t = CMat::zeros(m * n, m * n);
                for (i, row) in entries.iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        t.view_mut((i * n, j * n), (n, n)).copy_from(e.block(k));
                    }
                }
                t
            })
            .collect();
        Ok(Self {
            space: space.clone(),
            blocks,
        })
    }

    /// Builds `T` from its block matrices `T_k`.
    pub fn from_blocks(space: &ModuleSpace, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != space.spec().num_blocks() {
            return Err(Error::shape("one operator block per algebra block required"));
        }
        for (k, b) in blocks.iter().enumerate() {
            let h = space.stack_height(k);
            if b.shape() != (h, h) {
                return Err(Error::shape(format!(
                    "operator block {k}: expected {h}x{h}, got {}x{}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self {
            space: space.clone(),
            blocks,
        })
    }

    /// Recovers `T` from a flattened `D × D` matrix, failing unless the
    /// matrix commutes with the right action (is A-linear) within `tol`.
    pub fn from_flat(space: &ModuleSpace, flat: &CMat, tol: f64) -> Result<Self> {
        let d = space.flat_dim();
        if flat.shape() != (d, d) {
            return Err(Error::shape(format!(
                "flat operator must be {d}x{d}, got {}x{}",
                flat.nrows(),
                flat.ncols()
            )));
        }
        let mut offset = 0;
        let blocks: Vec<CMat> = (0..space.spec().num_blocks())
            .map(|k| {
                let h = space.stack_height(k);
                let n = space.spec().block_sizes()[k];
                let b = flat.view((offset, offset), (h, h)).into_owned();
                offset += h * n;
                b
            })
            .collect();
        let op = Self {
            space: space.clone(),
            blocks,
        };
        let defect = linalg::spectral_norm(&(op.flat() - flat));
        if defect > tol * (1.0 + linalg::spectral_norm(flat)) {
            return Err(Error::validation(format!(
                "flat operator is not A-linear (defect {defect:.3e})"
            )));
        }
        Ok(op)
    }

    pub fn identity(space: &ModuleSpace) -> Self {
        Self {
            space: space.clone(),
            blocks: (0..space.spec().num_blocks())
                .map(|k| {
                    let h = space.stack_height(k);
                    CMat::identity(h, h)
                })
                .collect(),
        }
    }

    pub fn zero(space: &ModuleSpace) -> Self {
        Self {
            space: space.clone(),
            blocks: (0..space.spec().num_blocks())
                .map(|k| {
                    let h = space.stack_height(k);
                    CMat::zeros(h, h)
                })
                .collect(),
        }
    }

    /// Orthogonal projection onto a submodule, as an operator.
    pub fn projection(y: &Submodule) -> Self {
        let space = y.space();
        Self {
            space: space.clone(),
            blocks: (0..space.spec().num_blocks())
                .map(|k| y.block_projector(k))
                .collect(),
        }
    }

    pub fn space(&self) -> &ModuleSpace {
        &self.space
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    /// The algebra element `T_ij`.
    pub fn entry(&self, i: usize, j: usize) -> AlgebraElement {
        let blocks = self
            .space
            .spec()
            .block_sizes()
            .iter()
            .zip(&self.blocks)
            .map(|(&n, t)| t.view((i * n, j * n), (n, n)).into_owned())
            .collect();
        AlgebraElement::from_blocks_unchecked(blocks)
    }

    pub fn entries(&self) -> Vec<Vec<AlgebraElement>> {
        let m = self.space.rank();
        (0..m)
            .map(|i| (0..m).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// The induced `D × D` matrix on flattened coordinates.
    pub fn flat(&self) -> CMat {
        let blocks: Vec<CMat> = self
            .blocks
            .iter()
            .zip(self.space.spec().block_sizes())
            .map(|(t, &n)| linalg::kron_identity(n, t))
            .collect();
        linalg::block_diag(&blocks)
    }

    pub fn apply(&self, x: &ModuleVector) -> ModuleVector {
        let stacks: Vec<CMat> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(k, t)| t * x.stack(k))
            .collect();
        ModuleVector::from_stacks_unchecked(&self.space, &stacks)
    }

    /// `T*`, with `(T*)_ij = (T_ji)*`.
    pub fn adjoint(&self) -> Self {
        self.map(|t| t.adjoint())
    }

    pub fn compose(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, z: C64) -> Self {
        self.map(|t| t * z)
    }

    /// Operator norm, equal to the spectral norm of `flat()`.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self {
            space: self.space.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Self {
        Self {
            space: self.space.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

/// A bounded A-sesquilinear form, carried by its Riesz operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SesquilinearForm {
    op: ModuleOperator,
}

impl SesquilinearForm {
    pub fn new(op: ModuleOperator) -> Self {
        Self { op }
    }

    /// The module's own inner product (`T = I`).
    pub fn inner_product(space: &ModuleSpace) -> Self {
        Self::new(ModuleOperator::identity(space))
    }

    pub fn space(&self) -> &ModuleSpace {
        self.op.space()
    }

    pub fn operator(&self) -> &ModuleOperator {
        &self.op
    }

    pub fn flat_t(&self) -> CMat {
        self.op.flat()
    }

    /// `B(x, y) = ⟨Tx, y⟩`.
    pub fn apply(&self, x: &ModuleVector, y: &ModuleVector) -> Result<AlgebraElement> {
        self.space().check(x)?;
        self.space().check(y)?;
        Ok(self.apply_unchecked(x, y))
    }

    pub(crate) fn apply_unchecked(&self, x: &ModuleVector, y: &ModuleVector) -> AlgebraElement {
        inner_product_unchecked(&self.op.apply(x), y)
    }

    /// The form `⟨T*x, y⟩`.
    pub fn adjoint_form(&self) -> Self {
        Self::new(self.op.adjoint())
    }

    /// `B − c·⟨·,·⟩`.
    pub fn shifted(&self, c: f64) -> Self {
        let id = ModuleOperator::identity(self.space()).scale(C64::new(c, 0.0));
        Self::new(self.op.sub(&id))
    }

    /// Values `B(e_i, e_j)` on the standard generators.
    pub fn values(&self) -> BTreeMap<(usize, usize), AlgebraElement> {
        let space = self.space();
        let units: Vec<ModuleVector> = (0..space.rank()).map(|i| space.unit(i)).collect();
        let mut out = BTreeMap::new();
        for (i, ei) in units.iter().enumerate() {
            for (j, ej) in units.iter().enumerate() {
                out.insert((i, j), self.apply_unchecked(ei, ej));
            }
        }
        out
    }

    /// Reconstructs the unique `T` with `⟨T e_i, e_j⟩ = B(e_i, e_j)` from a
    /// complete table of values on the standard generators.
    pub fn riesz_from_values(
        space: &ModuleSpace,
        values: &BTreeMap<(usize, usize), AlgebraElement>,
    ) -> Result<Self> {
        let m = space.rank();
        if let Some(&(i, j)) = values.keys().find(|&&(i, j)| i >= m || j >= m) {
            return Err(Error::validation(format!(
                "value for ({i}, {j}) is outside a rank-{m} module"
            )));
        }
        let mut entries = vec![vec![AlgebraElement::zero(space.spec()); m]; m];
        for i in 0..m {
            for j in 0..m {
                let v = values.get(&(i, j)).ok_or_else(|| {
                    Error::validation(format!("missing value B(e_{i}, e_{j})"))
                })?;
                if &v.spec() != space.spec() {
                    return Err(Error::shape(format!(
                        "B(e_{i}, e_{j}) lives over {:?}, expected {:?}",
                        v.spec().block_sizes(),
                        space.spec().block_sizes()
                    )));
                }
                // ⟨T e_i, e_j⟩ = (T_ji)*
                entries[j][i] = v.adjoint();
            }
        }
        Ok(Self::new(ModuleOperator::from_entries(space, &entries)?))
    }

    /// Reconstructs a form from an evaluator, checking that the evaluator is
    /// A-sesquilinear on every pair of flat basis vectors.
    pub fn riesz_from_evaluator<F>(space: &ModuleSpace, eval: F, tol: f64) -> Result<Self>
    where
        F: Fn(&ModuleVector, &ModuleVector) -> AlgebraElement,
    {
        let m = space.rank();
        let mut values = BTreeMap::new();
        for i in 0..m {
            for j in 0..m {
                values.insert((i, j), eval(&space.unit(i), &space.unit(j)));
            }
        }
        let form = Self::riesz_from_values(space, &values)?;
        let basis = space.flat_basis();
        let i = C64::new(0.0, 1.0);
        for u in &basis {
            // u·i probes conjugate-linearity, which real basis vectors miss.
            for u in [u.clone(), u.scale(i)] {
                for v in &basis {
                    let expected = form.apply_unchecked(&u, v);
                    let got = eval(&u, v);
                    if got.spec() != expected.spec() || got.sub(&expected)?.max_abs() > tol {
                        return Err(Error::validation(
                            "evaluator is not A-sesquilinear on the flat basis",
                        ));
                    }
                }
            }
        }
        Ok(form)
    }
}

/// `Π·T·Π` restricted to a submodule, in orthonormal coordinates per block.
#[derive(Debug, Clone)]
pub struct Compression {
    bases: Vec<CMat>,
    blocks: Vec<CMat>,
    block_sizes: Vec<usize>,
    operator_norm: f64,
}

impl Compression {
    /// `S_k = U_k* T_k U_k`.
    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn bases(&self) -> &[CMat] {
        &self.bases
    }

    /// The compression on `ran Π`, as a `dim Y × dim Y` matrix in the flat
    /// orthonormal basis produced by `Submodule::basis_vectors`.
    pub fn flat(&self) -> CMat {
        let blocks: Vec<CMat> = self
            .blocks
            .iter()
            .zip(&self.block_sizes)
            .map(|(s, &n)| kron_identity_interleaved(n, s))
            .collect();
        linalg::block_diag(&blocks)
    }

    /// `Π·flat_T·Π` in ambient flattened coordinates.
    pub fn ambient(&self) -> CMat {
        let blocks: Vec<CMat> = self
            .blocks
            .iter()
            .zip(&self.bases)
            .zip(&self.block_sizes)
            .map(|((s, u), &n)| linalg::kron_identity(n, &(u * s * u.adjoint())))
            .collect();
        linalg::block_diag(&blocks)
    }

    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    /// Singular values below this count as zero. Scaled by `‖T‖` rather than
    /// `‖S‖`: a compression that is pure roundoff must have a full kernel.
    pub(crate) fn kernel_cutoff(&self) -> f64 {
        linalg::RANK_RTOL * self.operator_norm
    }

    /// Per-block kernel coordinates of `S` (or `S*`).
    pub(crate) fn kernels(&self, adjoint: bool) -> Vec<CMat> {
        let cutoff = self.kernel_cutoff();
        self.blocks
            .iter()
            .map(|s| {
                if adjoint {
                    linalg::null_basis_abs(&s.adjoint(), cutoff)
                } else {
                    linalg::null_basis_abs(s, cutoff)
                }
            })
            .collect()
    }
}

/// `Submodule::basis_vectors` enumerates, per basis column, all `n` stack
/// columns; the matching matrix of `S` is `S ⊗ I_n`.
fn kron_identity_interleaved(n: usize, s: &CMat) -> CMat {
    let r = s.nrows();
    let mut out = CMat::zeros(r * n, r * n);
    for i in 0..r {
        for j in 0..r {
            for c in 0..n {
                out[(i * n + c, j * n + c)] = s[(i, j)];
            }
        }
    }
    out
}

fn check_same_space(b: &SesquilinearForm, y: &Submodule) -> Result<()> {
    if b.space() != y.space() {
        return Err(Error::shape("form and submodule live in different modules"));
    }
    Ok(())
}

pub fn compress(b: &SesquilinearForm, y: &Submodule) -> Result<Compression> {
    check_same_space(b, y)?;
    Ok(compress_unchecked(b, y))
}

pub(crate) fn compress_unchecked(b: &SesquilinearForm, y: &Submodule) -> Compression {
    let blocks = y
        .block_bases()
        .iter()
        .zip(b.operator().blocks())
        .map(|(u, t)| u.adjoint() * t * u)
        .collect();
    Compression {
        bases: y.block_bases().to_vec(),
        blocks,
        block_sizes: y.space().spec().block_sizes().to_vec(),
        operator_norm: b.operator().norm(),
    }
}

fn radical_from_kernels(y: &Submodule, comp: &Compression, kernels: Vec<CMat>) -> Submodule {
    let bases = comp
        .bases
        .iter()
        .zip(kernels)
        .map(|(u, k)| u * k)
        .collect();
    Submodule::from_bases(y.space(), bases)
}

/// `{ y̌ ∈ Y : B(y̌, y) = 0 ∀ y ∈ Y } = Y ∩ ker(Π T)`.
pub fn right_radical(b: &SesquilinearForm, y: &Submodule) -> Result<Submodule> {
    let comp = compress(b, y)?;
    let k = comp.kernels(false);
    Ok(radical_from_kernels(y, &comp, k))
}

/// `{ ỹ ∈ Y : B(y, ỹ) = 0 ∀ y ∈ Y } = Y ∩ ker(Π T* )`.
pub fn left_radical(b: &SesquilinearForm, y: &Submodule) -> Result<Submodule> {
    let comp = compress(b, y)?;
    let k = comp.kernels(true);
    Ok(radical_from_kernels(y, &comp, k))
}

#[derive(Debug, Clone)]
pub struct RadicalReport {
    pub right_radical: Submodule,
    pub left_radical: Submodule,
}

impl RadicalReport {
    /// Flat dimensions `(right, left)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.right_radical.flat_dim(), self.left_radical.flat_dim())
    }
}

pub fn radicals(b: &SesquilinearForm, y: &Submodule) -> Result<RadicalReport> {
    Ok(RadicalReport {
        right_radical: right_radical(b, y)?,
        left_radical: left_radical(b, y)?,
    })
}

/// Membership in the diagonal null set `{ y : B(y, y) = 0 }`.
pub fn null_membership(b: &SesquilinearForm, y: &ModuleVector, tol: f64) -> bool {
    b.apply_unchecked(y, y).norm() <= tol
}

/// `B(y, y) ≥ 0` for all `y ∈ Y`, decided on the compression.
pub fn is_positive_on(b: &SesquilinearForm, y: &Submodule, tol: f64) -> Result<bool> {
    let comp = compress(b, y)?;
    Ok(compression_is_positive(&comp, tol))
}

pub(crate) fn compression_is_positive(comp: &Compression, tol: f64) -> bool {
    comp.blocks.iter().all(|s| {
        linalg::hermitian_defect(s) <= tol
            && linalg::hermitian_eigenvalues(s)
                .first()
                .map_or(true, |&lo| lo >= -tol)
    })
}

/// The largest `c ≥ 0` with `B(y, y) ≥ c⟨y, y⟩` on `Y`.
///
/// Infinite for the zero submodule, where every `c` works.
pub fn ellipticity_constant(b: &SesquilinearForm, y: &Submodule, tol: f64) -> Result<f64> {
    let comp = compress(b, y)?;
    if !compression_is_positive(&comp, tol) {
        return Err(Error::domain("ellipticity needs a form that is positive on Y"));
    }
    let lowest = comp
        .blocks
        .iter()
        .filter_map(|s| linalg::hermitian_eigenvalues(s).first().copied())
        .fold(f64::INFINITY, f64::min);
    Ok(lowest.max(0.0))
}

/// Whether `ΠTΠ` and `ΠT*Π` have the same kernel on `Y`.
pub fn is_normal_on(b: &SesquilinearForm, y: &Submodule, tol: f64) -> Result<bool> {
    let comp = compress(b, y)?;
    let right = comp.kernels(false);
    let left = comp.kernels(true);
    Ok(right.iter().zip(&left).all(|(r, l)| {
        if r.ncols() != l.ncols() {
            return false;
        }
        let diff = r * r.adjoint() - l * l.adjoint();
        linalg::spectral_norm(&diff) <= tol.max(linalg::RANK_RTOL)
    }))
}
