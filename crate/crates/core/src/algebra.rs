//! Finite-dimensional C*-algebras `A = M_{n₁}(ℂ) ⊕ … ⊕ M_{n_K}(ℂ)`.
//!
//! Elements are tuples of square complex blocks. The product, involution,
//! order and norm are all blockwise, and the pure states are exactly the
//! vector states supported on a single block.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

/// Block sizes `(n₁, …, n_K)` of a direct sum of full matrix algebras.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgebraSpec {
    block_sizes: Vec<usize>,
}

impl AlgebraSpec {
    pub fn new(block_sizes: Vec<usize>) -> Result<Self> {
        if block_sizes.is_empty() {
            return Err(Error::validation("algebra needs at least one block"));
        }
        if let Some(k) = block_sizes.iter().position(|&n| n == 0) {
            return Err(Error::validation(format!("block {k} has size 0")));
        }
        Ok(Self { block_sizes })
    }

    /// `ℂ`, the one-block algebra `M₁(ℂ)`.
    pub fn scalars() -> Self {
        Self {
            block_sizes: vec![1],
        }
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    /// Complex dimension `Σ n_k²`.
    pub fn dim(&self) -> usize {
        self.block_sizes.iter().map(|n| n * n).sum()
    }

    /// Size of the block-diagonal embedding, `Σ n_k`.
    pub fn embedding_dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn is_abelian(&self) -> bool {
        self.block_sizes.iter().all(|&n| n == 1)
    }

    /// The matrix units `E_pq` of every block, in flattening order.
    pub fn basis(&self) -> Vec<AlgebraElement> {
        let mut out = Vec::with_capacity(self.dim());
        for (k, &n) in self.block_sizes.iter().enumerate() {
            for q in 0..n {
                for p in 0..n {
                    let mut e = AlgebraElement::zero(self);
                    e.blocks[k][(p, q)] = linalg::ONE;
                    out.push(e);
                }
            }
        }
        out
    }
}

/// An element of `⊕ₖ M_{n_k}(ℂ)` stored block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    blocks: Vec<CMat>,
}

impl AlgebraElement {
    pub fn from_blocks(spec: &AlgebraSpec, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != spec.num_blocks() {
            return Err(Error::shape(format!(
                "expected {} blocks, got {}",
                spec.num_blocks(),
                blocks.len()
            )));
        }
        for (k, (b, &n)) in blocks.iter().zip(spec.block_sizes()).enumerate() {
            if b.shape() != (n, n) {
                return Err(Error::shape(format!(
                    "block {k}: expected {n}x{n}, got {}x{}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { blocks })
    }

    pub(crate) fn from_blocks_unchecked(blocks: Vec<CMat>) -> Self {
        Self { blocks }
    }

    pub fn zero(spec: &AlgebraSpec) -> Self {
        Self {
            blocks: spec.block_sizes().iter().map(|&n| CMat::zeros(n, n)).collect(),
        }
    }

    pub fn identity(spec: &AlgebraSpec) -> Self {
        Self {
            blocks: spec
                .block_sizes()
                .iter()
                .map(|&n| CMat::identity(n, n))
                .collect(),
        }
    }

    pub fn scalar(spec: &AlgebraSpec, z: C64) -> Self {
        Self::identity(spec).scale(z)
    }

    /// Abelian convenience constructor: one scalar per 1×1 block.
    pub fn from_diagonal(spec: &AlgebraSpec, values: &[C64]) -> Result<Self> {
        if !spec.is_abelian() || values.len() != spec.num_blocks() {
            return Err(Error::shape(
                "from_diagonal needs an abelian algebra and one value per block",
            ));
        }
        Ok(Self {
            blocks: values.iter().map(|&z| CMat::from_element(1, 1, z)).collect(),
        })
    }

    pub fn spec(&self) -> AlgebraSpec {
        AlgebraSpec {
            block_sizes: self.blocks.iter().map(|b| b.nrows()).collect(),
        }
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.shape() == b.shape())
    }

    fn check_same(&self, other: &Self, op: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::shape(format!(
                "{op}: operands over {:?} and {:?}",
                self.spec().block_sizes(),
                other.spec().block_sizes()
            )))
        }
    }

    /// Blockwise product `a·b`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other, "mul")?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other, "add")?;
        Ok(self.add_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other, "sub")?;
        Ok(self.add_unchecked(&other.scale(C64::new(-1.0, 0.0))))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b * z).collect(),
        }
    }

    /// Blockwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// C*-norm: the largest singular value over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    /// True iff every block is Hermitian within `tol` and has smallest
    /// eigenvalue `≥ −tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| {
            linalg::hermitian_defect(b) <= tol
                && linalg::hermitian_eigenvalues(b)
                    .first()
                    .map_or(true, |&lo| lo >= -tol)
        })
    }

    /// Sum of block traces.
    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// Block-diagonal `(Σ n_k) × (Σ n_k)` matrix.
    pub fn embed(&self) -> CMat {
        linalg::block_diag(&self.blocks)
    }

    /// Column-major entries of each block, blocks concatenated.
    pub fn flatten(&self) -> CVec {
        let len: usize = self.blocks.iter().map(|b| b.len()).sum();
        CVec::from_iterator(len, self.blocks.iter().flat_map(|b| b.iter().copied()))
    }

    pub fn unflatten(spec: &AlgebraSpec, v: &[C64]) -> Result<Self> {
        if v.len() != spec.dim() {
            return Err(Error::shape(format!(
                "algebra over {:?} has dimension {}, got {} coordinates",
                spec.block_sizes(),
                spec.dim(),
                v.len()
            )));
        }
        let mut offset = 0;
        let blocks = spec
            .block_sizes()
            .iter()
            .map(|&n| {
                let b = CMat::from_column_slice(n, n, &v[offset..offset + n * n]);
                offset += n * n;
                b
            })
            .collect();
        Ok(Self { blocks })
    }

    /// Largest absolute entry, useful for exact-zero style comparisons.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Eigenvalues of every block's Hermitian part, concatenated.
    pub fn hermitian_spectrum(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| linalg::hermitian_eigenvalues(b))
            .collect()
    }

    /// Singular values of the block-diagonal embedding, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(linalg::singular_values)
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// A vector state `a ↦ v* a_k v` supported on block `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    block_index: usize,
    vector: CVec,
}

impl PureState {
    pub fn new(spec: &AlgebraSpec, block_index: usize, vector: CVec) -> Result<Self> {
        let n = *spec.block_sizes().get(block_index).ok_or_else(|| {
            Error::validation(format!(
                "block index {block_index} out of range for {} blocks",
                spec.num_blocks()
            ))
        })?;
        if vector.len() != n {
            return Err(Error::shape(format!(
                "state vector for block {block_index} must have length {n}, got {}",
                vector.len()
            )));
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!(
                "state vector must be a unit vector, has norm {norm}"
            )));
        }
        Ok(Self {
            block_index,
            vector,
        })
    }

    /// The state reading off the `(i, i)` entry of block `k`.
    pub fn coordinate(spec: &AlgebraSpec, block_index: usize, i: usize) -> Result<Self> {
        let n = *spec
            .block_sizes()
            .get(block_index)
            .ok_or_else(|| Error::validation(format!("no block {block_index}")))?;
        if i >= n {
            return Err(Error::validation(format!(
                "basis index {i} out of range for block of size {n}"
            )));
        }
        let mut v = CVec::zeros(n);
        v[i] = linalg::ONE;
        Ok(Self {
            block_index,
            vector: v,
        })
    }

    pub fn block_index(&self) -> usize {
        self.block_index
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    /// `f(a) = v* · a_k · v`.
    pub fn evaluate(&self, a: &AlgebraElement) -> C64 {
        let b = a.block(self.block_index);
        self.vector.dotc(&(b * &self.vector))
    }
}

/// States used to sample the quantifier over all pure states.
///
/// Each block contributes its standard basis vectors, topped up with Haar
/// random unit vectors until `samples_per_block` states are present. One-
/// dimensional blocks therefore contribute exactly one state, and abelian
/// algebras are enumerated exhaustively.
pub fn pure_state_grid(spec: &AlgebraSpec, samples_per_block: usize, seed: u64) -> Vec<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (k, &n) in spec.block_sizes().iter().enumerate() {
        for i in 0..n {
            let mut v = CVec::zeros(n);
            v[i] = linalg::ONE;
            out.push(PureState {
                block_index: k,
                vector: v,
            });
        }
        if n == 1 {
            continue;
        }
        for _ in n..samples_per_block.max(n) {
            let mut v = CVec::from_fn(n, |_, _| {
                C64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            });
            let norm = v.norm();
            v.unscale_mut(norm);
            out.push(PureState {
                block_index: k,
                vector: v,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn m2(entries: [[f64; 2]; 2]) -> CMat {
        CMat::from_fn(2, 2, |i, j| c(entries[i][j]))
    }

    #[test]
    fn identity_is_neutral() {
        let spec = AlgebraSpec::new(vec![2, 3]).unwrap();
        let mut rng = random::rng(1);
        let a = random::element(&mut rng, &spec);
        let one = AlgebraElement::identity(&spec);
        assert_eq!(one.mul(&a).unwrap(), a);
        assert_eq!(a.mul(&one).unwrap(), a);
    }

    #[test]
    fn nilpotent_squares_to_zero() {
        let spec = AlgebraSpec::new(vec![2]).unwrap();
        let n = AlgebraElement::from_blocks(&spec, vec![m2([[0.0, 1.0], [0.0, 0.0]])]).unwrap();
        assert_eq!(n.mul(&n).unwrap(), AlgebraElement::zero(&spec));
    }

    #[test]
    fn product_matches_dense_embedding() {
        let spec = AlgebraSpec::new(vec![2, 3]).unwrap();
        let mut rng = random::rng(7);
        for _ in 0..20 {
            let a = random::element(&mut rng, &spec);
            let b = random::element(&mut rng, &spec);
            let dense = a.embed() * b.embed();
            let ours = a.mul(&b).unwrap().embed();
            assert!((dense - ours).norm() < 1e-12);
            let lhs = a.mul(&b).unwrap().adjoint();
            let rhs = b.adjoint().mul(&a.adjoint()).unwrap();
            assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_specs_are_rejected() {
        let a = AlgebraElement::identity(&AlgebraSpec::new(vec![2]).unwrap());
        let b = AlgebraElement::identity(&AlgebraSpec::new(vec![1, 1]).unwrap());
        assert!(matches!(a.mul(&b), Err(Error::Shape(_))));
    }

    #[test]
    fn adjoint_cases() {
        let spec = AlgebraSpec::new(vec![2]).unwrap();
        let h = AlgebraElement::from_blocks(&spec, vec![m2([[2.0, 1.0], [1.0, 3.0]])]).unwrap();
        assert_eq!(h.adjoint(), h);
        let n = AlgebraElement::from_blocks(&spec, vec![m2([[0.0, 1.0], [0.0, 0.0]])]).unwrap();
        assert_eq!(n.adjoint().block(0), &m2([[0.0, 0.0], [1.0, 0.0]]));

        let spec = AlgebraSpec::new(vec![2, 1, 3]).unwrap();
        let mut rng = random::rng(3);
        let a = random::element(&mut rng, &spec);
        assert!((a.adjoint().embed() - a.embed().adjoint()).norm() < 1e-14);
    }

    #[test]
    fn positivity_cases() {
        let spec = AlgebraSpec::new(vec![1, 1]).unwrap();
        assert!(AlgebraElement::identity(&spec).is_positive(1e-9));
        let d = AlgebraElement::from_diagonal(&spec, &[c(1.0), c(-1.0)]).unwrap();
        assert!(!d.is_positive(1e-9));

        let spec = AlgebraSpec::new(vec![3, 2]).unwrap();
        let mut rng = random::rng(11);
        for _ in 0..20 {
            let a = random::element(&mut rng, &spec);
            let p = a.adjoint().mul(&a).unwrap();
            assert!(p.is_positive(1e-9));
            // Oracle: eigenvalues of the Hermitian embedding.
            let eig = nalgebra::SymmetricEigen::new(p.embed()).eigenvalues;
            assert!(eig.iter().all(|&l| l > -1e-9));
        }
    }

    #[test]
    fn norm_cases() {
        let spec = AlgebraSpec::new(vec![1, 1]).unwrap();
        assert_eq!(AlgebraElement::zero(&spec).norm(), 0.0);
        let d = AlgebraElement::from_diagonal(&spec, &[c(3.0), c(-4.0)]).unwrap();
        assert!((d.norm() - 4.0).abs() < 1e-14);

        let spec = AlgebraSpec::new(vec![2, 3]).unwrap();
        let mut rng = random::rng(5);
        let a = random::element(&mut rng, &spec);
        // Oracle: square root of the top eigenvalue of a*a on the embedding.
        let e = a.embed();
        let oracle = nalgebra::SymmetricEigen::new(e.adjoint() * &e)
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &l| m.max(l))
            .sqrt();
        assert!((a.norm() - oracle).abs() < 1e-12);
    }

    #[test]
    fn evaluate_cases() {
        let spec = AlgebraSpec::new(vec![2]).unwrap();
        let f = PureState::coordinate(&spec, 0, 0).unwrap();
        assert!((f.evaluate(&AlgebraElement::identity(&spec)) - c(1.0)).norm() < 1e-15);
        let a = AlgebraElement::from_blocks(&spec, vec![m2([[2.0, 1.0], [1.0, 3.0]])]).unwrap();
        assert!((f.evaluate(&a) - c(2.0)).norm() < 1e-15);

        // Pure states of an abelian algebra are characters.
        let spec = AlgebraSpec::new(vec![1, 1]).unwrap();
        let mut rng = random::rng(2);
        let f = PureState::coordinate(&spec, 0, 0).unwrap();
        let a = random::element(&mut rng, &spec);
        let b = random::element(&mut rng, &spec);
        let ab = f.evaluate(&a.mul(&b).unwrap());
        assert!((ab - f.evaluate(&a) * f.evaluate(&b)).norm() < 1e-12);
    }

    #[test]
    fn state_validation() {
        let spec = AlgebraSpec::new(vec![2]).unwrap();
        let v = CVec::from_vec(vec![c(1.0), c(1.0)]);
        assert!(matches!(
            PureState::new(&spec, 0, v),
            Err(Error::Validation(_))
        ));
        assert!(PureState::new(&spec, 1, CVec::zeros(2)).is_err());
    }

    #[test]
    fn state_grid_shapes() {
        let abelian = AlgebraSpec::new(vec![1, 1]).unwrap();
        for samples in [1, 4, 64] {
            assert_eq!(pure_state_grid(&abelian, samples, 9).len(), 2);
        }
        let spec = AlgebraSpec::new(vec![2]).unwrap();
        let grid = pure_state_grid(&spec, 5, 42);
        assert_eq!(grid.len(), 5);
        for f in &grid {
            assert!((f.vector().norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(grid, pure_state_grid(&spec, 5, 42));
        assert_ne!(grid, pure_state_grid(&spec, 5, 43));
    }

    #[test]
    fn spec_validation() {
        assert!(AlgebraSpec::new(vec![]).is_err());
        assert!(AlgebraSpec::new(vec![2, 0]).is_err());
        let spec = AlgebraSpec::new(vec![2, 1]).unwrap();
        assert_eq!(spec.dim(), 5);
        assert_eq!(spec.basis().len(), 5);
    }

    #[test]
    fn flatten_roundtrip() {
        let spec = AlgebraSpec::new(vec![3, 1, 2]).unwrap();
        let mut rng = random::rng(8);
        let a = random::element(&mut rng, &spec);
        let v = a.flatten();
        assert_eq!(AlgebraElement::unflatten(&spec, v.as_slice()).unwrap(), a);
        assert!(AlgebraElement::unflatten(&spec, &v.as_slice()[1..]).is_err());
    }
}
