//! The free Hilbert module `X = A^m` and its submodules.
//!
//! For `A = ⊕ₖ M_{n_k}(ℂ)`, block `k` of a module vector is the stacked
//! `(m·n_k) × n_k` matrix whose `i`-th `n_k × n_k` slab is `x_i`'s block `k`.
//! The right action multiplies these stacks on the right, so a subspace of the
//! flattened space is an A-submodule exactly when, in every block, all columns
//! of every stack range over a common subspace `V_k ⊆ ℂ^{m·n_k}`. Submodules
//! are stored by orthonormal bases of the `V_k`; the flattened projector
//! `Π = ⊕ₖ I_{n_k} ⊗ P_k` is materialised on demand.
//!
//! Flattening concatenates, block by block, the column-major entries of each
//! stack. With that layout the standard complex pairing of flattened vectors
//! is the trace pairing `tr⟨x, y⟩`.

use num_complex::Complex64 as C64;

use crate::algebra::{AlgebraElement, AlgebraSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModuleSpace {
    spec: AlgebraSpec,
    rank: usize,
}

impl ModuleSpace {
    pub fn new(spec: AlgebraSpec, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::validation("module rank must be positive"));
        }
        Ok(Self { spec, rank })
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `D = m · Σ n_k²`.
    pub fn flat_dim(&self) -> usize {
        self.rank * self.spec.dim()
    }

    /// Height `m·n_k` of the stacked block `k`.
    pub fn stack_height(&self, k: usize) -> usize {
        self.rank * self.spec.block_sizes()[k]
    }

    fn block_offset(&self, k: usize) -> usize {
        self.spec.block_sizes()[..k]
            .iter()
            .map(|n| self.rank * n * n)
            .sum()
    }

    pub fn zero(&self) -> ModuleVector {
        ModuleVector {
            entries: vec![AlgebraElement::zero(&self.spec); self.rank],
        }
    }

    /// `e_i · 1`, the identity in slot `i`.
    pub fn unit(&self, i: usize) -> ModuleVector {
        let mut v = self.zero();
        v.entries[i] = AlgebraElement::identity(&self.spec);
        v
    }

    /// The flattened coordinate basis: single matrix-unit entries.
    pub fn flat_basis(&self) -> Vec<ModuleVector> {
        let d = self.flat_dim();
        (0..d)
            .map(|i| {
                let mut v = CVec::zeros(d);
                v[i] = linalg::ONE;
                self.unflatten(v.as_slice()).expect("dimension matches")
            })
            .collect()
    }

    pub fn unflatten(&self, v: &[C64]) -> Result<ModuleVector> {
        if v.len() != self.flat_dim() {
            return Err(Error::shape(format!(
                "module has flat dimension {}, got {} coordinates",
                self.flat_dim(),
                v.len()
            )));
        }
        let stacks: Vec<CMat> = self
            .spec
            .block_sizes()
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let off = self.block_offset(k);
                let h = self.rank * n;
                CMat::from_column_slice(h, n, &v[off..off + h * n])
            })
            .collect();
        Ok(ModuleVector::from_stacks_unchecked(self, &stacks))
    }

    pub fn check(&self, x: &ModuleVector) -> Result<()> {
        if x.entries.len() != self.rank {
            return Err(Error::shape(format!(
                "module vector has {} entries, module rank is {}",
                x.entries.len(),
                self.rank
            )));
        }
        for (i, e) in x.entries.iter().enumerate() {
            if e.spec() != self.spec {
                return Err(Error::shape(format!(
                    "entry {i} lives over {:?}, module is over {:?}",
                    e.spec().block_sizes(),
                    self.spec.block_sizes()
                )));
            }
        }
        Ok(())
    }

    /// Matrix of `x ↦ x·b` on the flattened space.
    pub fn right_action_flat(&self, b: &AlgebraElement) -> CMat {
        let blocks: Vec<CMat> = self
            .spec
            .block_sizes()
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let bt = b.block(k).transpose();
                let h = self.rank * n;
                // vec(X b) = (bᵀ ⊗ I_h) vec(X)
                let mut out = CMat::zeros(h * n, h * n);
                for r in 0..n {
                    for c in 0..n {
                        let z = bt[(r, c)];
                        if z != linalg::ZERO {
                            for d in 0..h {
                                out[(r * h + d, c * h + d)] = z;
                            }
                        }
                    }
                }
                out
            })
            .collect();
        linalg::block_diag(&blocks)
    }
}

/// An element `(x₁, …, x_m)` of `A^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleVector {
    entries: Vec<AlgebraElement>,
}

impl ModuleVector {
    pub fn new(space: &ModuleSpace, entries: Vec<AlgebraElement>) -> Result<Self> {
        let v = Self { entries };
        space.check(&v)?;
        Ok(v)
    }

    pub fn entries(&self) -> &[AlgebraElement] {
        &self.entries
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    /// Stacked block `k`, shape `(m·n_k) × n_k`.
    pub fn stack(&self, k: usize) -> CMat {
        let n = self.entries[0].block(k).nrows();
        let m = self.entries.len();
        let mut out = CMat::zeros(m * n, n);
        for (i, e) in self.entries.iter().enumerate() {
            out.view_mut((i * n, 0), (n, n)).copy_from(e.block(k));
        }
        out
    }

    pub fn stacks(&self) -> Vec<CMat> {
        (0..self.entries[0].blocks().len())
            .map(|k| self.stack(k))
            .collect()
    }

    pub(crate) fn from_stacks_unchecked(space: &ModuleSpace, stacks: &[CMat]) -> Self {
        let m = space.rank();
        let entries = (0..m)
            .map(|i| {
                AlgebraElement::from_blocks_unchecked(
                    space
                        .spec()
                        .block_sizes()
                        .iter()
                        .zip(stacks)
                        .map(|(&n, s)| s.view((i * n, 0), (n, n)).into_owned())
                        .collect(),
                )
            })
            .collect();
        Self { entries }
    }

    pub fn from_stacks(space: &ModuleSpace, stacks: &[CMat]) -> Result<Self> {
        if stacks.len() != space.spec().num_blocks() {
            return Err(Error::shape("one stack per algebra block required"));
        }
        for (k, s) in stacks.iter().enumerate() {
            let n = space.spec().block_sizes()[k];
            if s.shape() != (space.stack_height(k), n) {
                return Err(Error::shape(format!(
                    "stack {k}: expected {}x{n}, got {}x{}",
                    space.stack_height(k),
                    s.nrows(),
                    s.ncols()
                )));
            }
        }
        Ok(Self::from_stacks_unchecked(space, stacks))
    }

    pub fn flatten(&self) -> CVec {
        let stacks = self.stacks();
        let len: usize = stacks.iter().map(|s| s.len()).sum();
        CVec::from_iterator(len, stacks.iter().flat_map(|s| s.iter().copied()))
    }

    /// `x · a`.
    pub fn right_mul(&self, a: &AlgebraElement) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e.mul_unchecked(a)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add_unchecked(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e.scale(z)).collect(),
        }
    }

    /// Module norm `‖⟨x, x⟩‖^{1/2}`, i.e. the largest spectral norm of a stack.
    pub fn norm(&self) -> f64 {
        self.stacks()
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    /// Euclidean norm of the flattened coordinates.
    pub fn flat_norm(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| e.blocks().iter().flat_map(|b| b.iter()))
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Matrix (`dim A × D`) of the functional `x̂ = ⟨x, ·⟩`.
    pub fn hat(&self, space: &ModuleSpace) -> CMat {
        let basis = space.flat_basis();
        let mut out = CMat::zeros(space.spec().dim(), basis.len());
        for (j, y) in basis.iter().enumerate() {
            out.set_column(j, &inner_product_unchecked(self, y).flatten());
        }
        out
    }
}

/// `⟨x, y⟩ = Σᵢ xᵢ* yᵢ`.
pub fn inner_product(space: &ModuleSpace, x: &ModuleVector, y: &ModuleVector) -> Result<AlgebraElement> {
    space.check(x)?;
    space.check(y)?;
    Ok(inner_product_unchecked(x, y))
}

pub(crate) fn inner_product_unchecked(x: &ModuleVector, y: &ModuleVector) -> AlgebraElement {
    let blocks = (0..x.entries[0].blocks().len())
        .map(|k| {
            x.entries
                .iter()
                .zip(&y.entries)
                .fold(CMat::zeros(x.entries[0].block(k).nrows(), x.entries[0].block(k).nrows()), |acc, (a, b)| {
                    acc + a.block(k).adjoint() * b.block(k)
                })
        })
        .collect();
    AlgebraElement::from_blocks_unchecked(blocks)
}

/// A submodule of `A^m`, carried by one orthonormal basis per algebra block.
#[derive(Debug, Clone)]
pub struct Submodule {
    space: ModuleSpace,
    bases: Vec<CMat>,
    generators: Vec<ModuleVector>,
}

impl Submodule {
    /// The submodule `span_ℂ{ g·b : g ∈ gens, b ∈ A }`.
    pub fn from_generators(space: &ModuleSpace, gens: Vec<ModuleVector>) -> Result<Self> {
        for (i, g) in gens.iter().enumerate() {
            space
                .check(g)
                .map_err(|e| Error::shape(format!("generator {i}: {e}")))?;
        }
        let k_count = space.spec().num_blocks();
        let spans: Vec<CMat> = (0..k_count)
            .map(|k| {
                let h = space.stack_height(k);
                let stacks: Vec<CMat> = gens.iter().map(|g| g.stack(k)).collect();
                let cols: usize = stacks.iter().map(|s| s.ncols()).sum();
                let mut m = CMat::zeros(h, cols);
                let mut c0 = 0;
                for s in &stacks {
                    m.view_mut((0, c0), s.shape()).copy_from(s);
                    c0 += s.ncols();
                }
                m
            })
            .collect();
        let scale = spans.iter().map(linalg::spectral_norm).fold(0.0, f64::max);
        let bases = spans
            .iter()
            .map(|m| linalg::range_basis_abs(m, linalg::RANK_RTOL * scale))
            .collect();
        Ok(Self {
            space: space.clone(),
            bases,
            generators: gens,
        })
    }

    /// Builds a submodule from orthonormal per-block bases. One generator is
    /// recorded per basis column.
    pub(crate) fn from_bases(space: &ModuleSpace, bases: Vec<CMat>) -> Self {
        let mut generators = Vec::new();
        for (k, b) in bases.iter().enumerate() {
            for col in b.column_iter() {
                let stacks: Vec<CMat> = (0..bases.len())
                    .map(|l| {
                        let n = space.spec().block_sizes()[l];
                        let mut s = CMat::zeros(space.stack_height(l), n);
                        if l == k {
                            s.set_column(0, &col);
                        }
                        s
                    })
                    .collect();
                generators.push(ModuleVector::from_stacks_unchecked(space, &stacks));
            }
        }
        Self {
            space: space.clone(),
            bases,
            generators,
        }
    }

    pub fn zero(space: &ModuleSpace) -> Self {
        let bases = (0..space.spec().num_blocks())
            .map(|k| CMat::zeros(space.stack_height(k), 0))
            .collect();
        Self::from_bases(space, bases)
    }

    pub fn full(space: &ModuleSpace) -> Self {
        let bases = (0..space.spec().num_blocks())
            .map(|k| {
                let h = space.stack_height(k);
                CMat::identity(h, h)
            })
            .collect();
        Self::from_bases(space, bases)
    }

    pub fn space(&self) -> &ModuleSpace {
        &self.space
    }

    pub fn generators(&self) -> &[ModuleVector] {
        &self.generators
    }

    /// Orthonormal basis of `V_k ⊆ ℂ^{m·n_k}`.
    pub fn block_basis(&self, k: usize) -> &CMat {
        &self.bases[k]
    }

    pub fn block_bases(&self) -> &[CMat] {
        &self.bases
    }

    pub fn block_projector(&self, k: usize) -> CMat {
        &self.bases[k] * self.bases[k].adjoint()
    }

    /// The `D × D` orthogonal projector `Π` in the flattened space.
    pub fn projector(&self) -> CMat {
        let blocks: Vec<CMat> = (0..self.bases.len())
            .map(|k| {
                let n = self.space.spec().block_sizes()[k];
                linalg::kron_identity(n, &self.block_projector(k))
            })
            .collect();
        linalg::block_diag(&blocks)
    }

    /// Complex dimension of the submodule as a subspace of the flat space.
    pub fn flat_dim(&self) -> usize {
        self.bases
            .iter()
            .zip(self.space.spec().block_sizes())
            .map(|(b, n)| b.ncols() * n)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.bases.iter().all(|b| b.ncols() == 0)
    }

    /// Orthogonal projection; the residual is A-orthogonal to the submodule.
    pub fn project(&self, x: &ModuleVector) -> ModuleVector {
        let stacks: Vec<CMat> = self
            .bases
            .iter()
            .enumerate()
            .map(|(k, b)| b * (b.adjoint() * x.stack(k)))
            .collect();
        ModuleVector::from_stacks_unchecked(&self.space, &stacks)
    }

    pub fn contains(&self, x: &ModuleVector, tol: f64) -> bool {
        x.sub(&self.project(x)).flat_norm() <= tol
    }

    pub fn orthogonal_complement(&self) -> Submodule {
        let bases = self
            .bases
            .iter()
            .map(linalg::orthogonal_complement_basis)
            .collect();
        Self::from_bases(&self.space, bases)
    }

    /// Spectral distance between the two projectors.
    pub fn distance(&self, other: &Submodule) -> f64 {
        (0..self.bases.len())
            .map(|k| linalg::spectral_norm(&(self.block_projector(k) - other.block_projector(k))))
            .fold(0.0, f64::max)
    }

    /// True iff `self ⊆ other` within `tol` (projector residual).
    pub fn is_subset_of(&self, other: &Submodule, tol: f64) -> bool {
        self.bases.iter().zip(&other.bases).all(|(a, b)| {
            let residual = a - b * (b.adjoint() * a);
            linalg::spectral_norm(&residual) <= tol
        })
    }

    /// Orthonormal flat basis of the submodule, generated lazily.
    pub fn basis_vectors(&self) -> impl Iterator<Item = ModuleVector> + '_ {
        let sizes = self.space.spec().block_sizes();
        self.bases.iter().enumerate().flat_map(move |(k, b)| {
            let n = sizes[k];
            (0..b.ncols()).flat_map(move |j| {
                (0..n).map(move |c| {
                    let stacks: Vec<CMat> = (0..sizes.len())
                        .map(|l| {
                            let mut s = CMat::zeros(self.space.stack_height(l), sizes[l]);
                            if l == k {
                                s.set_column(c, &b.column(j));
                            }
                            s
                        })
                        .collect();
                    ModuleVector::from_stacks_unchecked(&self.space, &stacks)
                })
            })
        })
    }

    /// Largest violation of `Π² = Π`, `Π = Π*`, `Π R_b = R_b Π` over the
    /// matrix-unit basis of `A`, measured on the flattened projector.
    pub fn invariant_defect(&self) -> f64 {
        let p = self.projector();
        let mut worst = linalg::spectral_norm(&(&p * &p - &p));
        worst = worst.max(linalg::spectral_norm(&(&p - p.adjoint())));
        for b in self.space.spec().basis() {
            let r = self.space.right_action_flat(&b);
            worst = worst.max(linalg::spectral_norm(&(&p * &r - &r * &p)));
        }
        worst
    }
}

/// Riesz representer of an A-linear functional on the flat space.
///
/// `tau` is the `dim A × D` matrix sending flattened `y` to the flattened
/// algebra element `τ(y)`. Returns `x` with `⟨x, y⟩ = τ(y)` for every `y`.
pub fn functional_representer(space: &ModuleSpace, tau: &CMat, tol: f64) -> Result<ModuleVector> {
    let dim_a = space.spec().dim();
    let d = space.flat_dim();
    if tau.shape() != (dim_a, d) {
        return Err(Error::shape(format!(
            "functional must be {dim_a}x{d}, got {}x{}",
            tau.nrows(),
            tau.ncols()
        )));
    }
    let scalars = ModuleSpace::new(space.spec().clone(), 1)?;
    let scale = 1.0 + linalg::spectral_norm(tau);
    for b in space.spec().basis() {
        let lhs = tau * space.right_action_flat(&b);
        let rhs = scalars.right_action_flat(&b) * tau;
        let defect = linalg::spectral_norm(&(lhs - rhs));
        if defect > tol * scale {
            return Err(Error::validation(format!(
                "functional is not A-linear (defect {defect:.3e})"
            )));
        }
    }
    // ⟨x, e_i·1⟩ = x_i*, so x_i is the adjoint of τ(e_i·1).
    let entries = (0..space.rank())
        .map(|i| {
            let col = tau * space.unit(i).flatten();
            AlgebraElement::unflatten(space.spec(), col.as_slice()).map(|a| a.adjoint())
        })
        .collect::<Result<Vec<_>>>()?;
    let x = ModuleVector { entries };
    let defect = linalg::spectral_norm(&(x.hat(space) - tau));
    if defect > tol * scale {
        return Err(Error::validation(format!(
            "functional is not represented by an inner product (defect {defect:.3e})"
        )));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn abelian2() -> ModuleSpace {
        ModuleSpace::new(AlgebraSpec::new(vec![1, 1]).unwrap(), 1).unwrap()
    }

    fn vec_ab(space: &ModuleSpace, a: f64, b: f64) -> ModuleVector {
        let e = AlgebraElement::from_diagonal(space.spec(), &[c(a), c(b)]).unwrap();
        ModuleVector::new(space, vec![e]).unwrap()
    }

    #[test]
    fn inner_product_cases() {
        let space = ModuleSpace::new(AlgebraSpec::scalars(), 2).unwrap();
        let one = AlgebraElement::identity(space.spec());
        let zero = AlgebraElement::zero(space.spec());
        let x = ModuleVector::new(&space, vec![one.clone(), zero.clone()]).unwrap();
        let y = ModuleVector::new(&space, vec![zero, one]).unwrap();
        assert_eq!(inner_product(&space, &x, &y).unwrap().max_abs(), 0.0);

        let m2 = ModuleSpace::new(AlgebraSpec::new(vec![2]).unwrap(), 1).unwrap();
        let u = m2.unit(0);
        assert_eq!(
            inner_product(&m2, &u, &u).unwrap(),
            AlgebraElement::identity(m2.spec())
        );
    }

    #[test]
    fn inner_product_matches_embedding() {
        let space = ModuleSpace::new(AlgebraSpec::new(vec![2, 1]).unwrap(), 3).unwrap();
        let mut rng = random::rng(4);
        let x = random::vector(&mut rng, &space);
        let y = random::vector(&mut rng, &space);
        let oracle = x
            .entries()
            .iter()
            .zip(y.entries())
            .fold(CMat::zeros(3, 3), |acc, (a, b)| acc + a.embed().adjoint() * b.embed());
        let ours = inner_product(&space, &x, &y).unwrap().embed();
        assert!((oracle - ours).norm() < 1e-12);
    }

    #[test]
    fn inner_product_axioms() {
        let space = ModuleSpace::new(AlgebraSpec::new(vec![2, 2]).unwrap(), 2).unwrap();
        let mut rng = random::rng(12);
        let x = random::vector(&mut rng, &space);
        let y = random::vector(&mut rng, &space);
        let a = random::element(&mut rng, space.spec());
        let xy = inner_product(&space, &x, &y).unwrap();
        let lhs = inner_product(&space, &x, &y.right_mul(&a)).unwrap();
        assert!(lhs.sub(&xy.mul(&a).unwrap()).unwrap().max_abs() < 1e-12);
        let yx = inner_product(&space, &y, &x).unwrap();
        assert!(xy.adjoint().sub(&yx).unwrap().max_abs() < 1e-12);
        assert!(inner_product(&space, &x, &x).unwrap().is_positive(1e-10));
    }

    #[test]
    fn mismatched_vectors_are_rejected() {
        let space = ModuleSpace::new(AlgebraSpec::new(vec![2]).unwrap(), 2).unwrap();
        let other = ModuleSpace::new(AlgebraSpec::new(vec![2]).unwrap(), 3).unwrap();
        assert!(inner_product(&space, &space.zero(), &other.zero()).is_err());
        assert!(space.unflatten(&[linalg::ZERO; 3]).is_err());
    }

    #[test]
    fn flatten_pairing_is_trace_pairing() {
        let space = ModuleSpace::new(AlgebraSpec::new(vec![3, 1, 2]).unwrap(), 2).unwrap();
        let mut rng = random::rng(31);
        for _ in 0..10 {
            let x = random::vector(&mut rng, &space);
            let y = random::vector(&mut rng, &space);
            let flat = x.flatten().dotc(&y.flatten());
            let tr = inner_product(&space, &x, &y).unwrap().trace();
            assert!((flat - tr).norm() < 1e-12);
            assert_eq!(space.unflatten(x.flatten().as_slice()).unwrap(), x);
        }
        assert!(space.zero().flatten().iter().all(|z| *z == linalg::ZERO));
    }

    #[test]
    fn generated_submodules() {
        let space = ModuleSpace::new(AlgebraSpec::new(vec![2, 1]).unwrap(), 2).unwrap();
        let empty = Submodule::from_generators(&space, vec![]).unwrap();
        assert_eq!(empty.flat_dim(), 0);
        assert!(empty.projector().iter().all(|z| *z == linalg::ZERO));

        let one = ModuleSpace::new(AlgebraSpec::new(vec![2, 1]).unwrap(), 1).unwrap();
        let full = Submodule::from_generators(&one, vec![one.unit(0)]).unwrap();
        let d = one.flat_dim();
        assert!((full.projector() - CMat::identity(d, d)).norm() < 1e-12);

        let ab = abelian2();
        let y = Submodule::from_generators(&ab, vec![vec_ab(&ab, 1.0, 0.0)]).unwrap();
        let mut expected = CMat::zeros(2, 2);
        expected[(0, 0)] = linalg::ONE;
        assert!((y.projector() - expected).norm() < 1e-12);
    }

    #[test]
    fn projection_cases() {
        let ab = abelian2();
        let y = Submodule::from_generators(&ab, vec![vec_ab(&ab, 1.0, 0.0)]).unwrap();
        let p = y.project(&vec_ab(&ab, 3.0, 5.0));
        assert_eq!(p, vec_ab(&ab, 3.0, 0.0));
        assert_eq!(y.project(&p), p);

        let comp = y.orthogonal_complement();
        let mut expected = CMat::zeros(2, 2);
        expected[(1, 1)] = linalg::ONE;
        assert!((comp.projector() - expected).norm() < 1e-12);

        let zero = Submodule::zero(&ab);
        assert!(zero.orthogonal_complement().distance(&Submodule::full(&ab)) < 1e-12);
    }

    #[test]
    fn random_submodule_invariants() {
        let mut rng = random::rng(99);
        for _ in 0..20 {
            let space = random::space(&mut rng, 40);
            let y = random::submodule(&mut rng, &space);
            assert!(y.invariant_defect() < 1e-9);
            for g in y.generators() {
                assert!(y.contains(g, 1e-9 * (1.0 + g.flat_norm())));
            }
            let comp = y.orthogonal_complement();
            assert!(comp.invariant_defect() < 1e-9);
            assert_eq!(y.flat_dim() + comp.flat_dim(), space.flat_dim());
            let d = space.flat_dim();
            let sum = y.projector() + comp.projector();
            assert!((sum - CMat::identity(d, d)).norm() < 1e-12);

            let x = random::vector(&mut rng, &space);
            let r = x.sub(&y.project(&x));
            for g in y.generators() {
                assert!(inner_product(&space, &r, g).unwrap().norm() < 1e-10 * (1.0 + g.norm()) * (1.0 + x.norm()));
            }
            // trace-orthogonality to the complement forces A-valued orthogonality
            let w = random::vector(&mut rng, &space);
            let in_y = y.project(&w);
            let in_comp = comp.project(&x);
            assert!(inner_product(&space, &in_comp, &in_y).unwrap().norm() < 1e-10 * (1.0 + w.norm()) * (1.0 + x.norm()));
        }
    }

    #[test]
    fn basis_vectors_are_orthonormal_and_span() {
        let mut rng = random::rng(5);
        let space = ModuleSpace::new(AlgebraSpec::new(vec![2, 1]).unwrap(), 2).unwrap();
        let y = random::submodule(&mut rng, &space);
        let basis: Vec<CVec> = y.basis_vectors().map(|v| v.flatten()).collect();
        assert_eq!(basis.len(), y.flat_dim());
        let mut q = CMat::zeros(space.flat_dim(), basis.len());
        for (j, b) in basis.iter().enumerate() {
            q.set_column(j, b);
        }
        let gram = q.adjoint() * &q;
        assert!((gram - CMat::identity(basis.len(), basis.len())).norm() < 1e-12);
        assert!((&q * q.adjoint() - y.projector()).norm() < 1e-12);
    }

    #[test]
    fn representer_roundtrip() {
        let mut rng = random::rng(17);
        let space = ModuleSpace::new(AlgebraSpec::new(vec![2, 1]).unwrap(), 2).unwrap();
        for _ in 0..5 {
            let x = random::vector(&mut rng, &space);
            let back = functional_representer(&space, &x.hat(&space), 1e-10).unwrap();
            assert!(back.sub(&x).flat_norm() < 1e-10);
        }
        let zero = CMat::zeros(space.spec().dim(), space.flat_dim());
        let back = functional_representer(&space, &zero, 1e-10).unwrap();
        assert_eq!(back.flat_norm(), 0.0);
    }

    #[test]
    fn representer_rejects_non_module_maps() {
        let space = ModuleSpace::new(AlgebraSpec::new(vec![2]).unwrap(), 1).unwrap();
        // Reads a single matrix entry: complex-linear but not A-linear.
        let mut tau = CMat::zeros(4, 4);
        tau[(0, 1)] = linalg::ONE;
        assert!(matches!(
            functional_representer(&space, &tau, 1e-10),
            Err(Error::Validation(_))
        ));
    }
}
