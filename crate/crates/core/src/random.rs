//! Seeded random instances: algebra elements, submodules, and forms with
//! prescribed structure. Used by the property suites, the benches and the
//! CLI examples; everything is deterministic under the seed.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{AlgebraElement, AlgebraSpec};
use crate::forms::{ModuleOperator, SesquilinearForm};
use crate::hilbert_module::{ModuleSpace, ModuleVector, Submodule};
use crate::linalg::{CMat, CVec};

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for item `index` of a seeded family.
pub fn stream(seed: u64, index: u64) -> InstanceRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

pub fn complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| complex(rng))
}

pub fn coefficients<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| complex(rng))
}

pub fn element<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec) -> AlgebraElement {
    let blocks = spec
        .block_sizes()
        .iter()
        .map(|&n| matrix(rng, n, n))
        .collect();
    AlgebraElement::from_blocks(spec, blocks).expect("shapes follow the spec")
}

/// An element whose blocks have random (possibly zero or full) rank.
pub fn low_rank_element<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec) -> AlgebraElement {
    let blocks = spec
        .block_sizes()
        .iter()
        .map(|&n| {
            let r = rng.random_range(0..=n);
            matrix(rng, n, r) * matrix(rng, r, n)
        })
        .collect();
    AlgebraElement::from_blocks(spec, blocks).expect("shapes follow the spec")
}

pub fn vector<R: Rng + ?Sized>(rng: &mut R, space: &ModuleSpace) -> ModuleVector {
    let entries = (0..space.rank())
        .map(|_| element(rng, space.spec()))
        .collect();
    ModuleVector::new(space, entries).expect("entries follow the space")
}

pub fn real_vector<R: Rng + ?Sized>(rng: &mut R, space: &ModuleSpace) -> ModuleVector {
    let d = space.flat_dim();
    let v: Vec<C64> = (0..d)
        .map(|_| C64::new(StandardNormal.sample(rng), 0.0))
        .collect();
    space.unflatten(&v).expect("dimension matches")
}

/// Algebra and rank with flat dimension at most `max_flat_dim`.
pub fn space<R: Rng + ?Sized>(rng: &mut R, max_flat_dim: usize) -> ModuleSpace {
    const SPECS: &[&[usize]] = &[
        &[1],
        &[2],
        &[3],
        &[1, 1],
        &[2, 1],
        &[1, 1, 1],
        &[2, 2],
        &[3, 1],
        &[3, 2],
    ];
    loop {
        let spec = AlgebraSpec::new(SPECS[rng.random_range(0..SPECS.len())].to_vec())
            .expect("static specs are valid");
        let m = rng.random_range(1..=4);
        if m * spec.dim() <= max_flat_dim {
            return ModuleSpace::new(spec, m).expect("rank is positive");
        }
    }
}

/// Submodule generated by up to `m` random generators, some of them cut down
/// by low-rank algebra elements so that non-free submodules appear.
pub fn submodule<R: Rng + ?Sized>(rng: &mut R, space: &ModuleSpace) -> Submodule {
    let count = rng.random_range(0..=space.rank());
    let gens = (0..count)
        .map(|_| {
            let g = vector(rng, space);
            if rng.random_bool(0.5) {
                g.right_mul(&low_rank_element(rng, space.spec()))
            } else {
                g
            }
        })
        .collect();
    Submodule::from_generators(space, gens).expect("generators follow the space")
}

/// A nonzero submodule (retries until one appears).
pub fn nonzero_submodule<R: Rng + ?Sized>(rng: &mut R, space: &ModuleSpace) -> Submodule {
    loop {
        let y = submodule(rng, space);
        if !y.is_zero() {
            return y;
        }
    }
}

pub fn operator<R: Rng + ?Sized>(rng: &mut R, space: &ModuleSpace) -> ModuleOperator {
    let blocks = (0..space.spec().num_blocks())
        .map(|k| {
            let h = space.stack_height(k);
            matrix(rng, h, h)
        })
        .collect();
    ModuleOperator::from_blocks(space, blocks).expect("shapes follow the space")
}

fn low_rank_operator<R: Rng + ?Sized>(rng: &mut R, space: &ModuleSpace) -> ModuleOperator {
    let blocks = (0..space.spec().num_blocks())
        .map(|k| {
            let h = space.stack_height(k);
            let r = rng.random_range(0..=h);
            matrix(rng, h, r) * matrix(rng, r, h)
        })
        .collect();
    ModuleOperator::from_blocks(space, blocks).expect("shapes follow the space")
}

/// Whether a nonzero `ran P` can leave a nonzero kernel, i.e. some block
/// stack is taller than one row.
pub fn admits_kernel_part(space: &ModuleSpace) -> bool {
    (0..space.spec().num_blocks()).any(|k| space.stack_height(k) >= 2)
}

/// A nonzero submodule `ran P` and a submodule `Z ⊆ ker P`; when
/// `nonzero_kernel_part` is set, `Z` is guaranteed nonzero.
///
/// Panics if `nonzero_kernel_part` is set and `space` does not
/// [`admits_kernel_part`].
pub fn projection_with_kernel_part<R: Rng + ?Sized>(
    rng: &mut R,
    space: &ModuleSpace,
    nonzero_kernel_part: bool,
) -> (Submodule, Submodule) {
    assert!(
        !nonzero_kernel_part || admits_kernel_part(space),
        "every nonzero submodule of this module is the whole module"
    );
    loop {
        let p = submodule(rng, space);
        if p.is_zero() {
            continue;
        }
        let comp = p.orthogonal_complement();
        if nonzero_kernel_part && comp.is_zero() {
            continue;
        }
        let count = rng.random_range(0..=space.rank());
        let gens = (0..count)
            .map(|_| comp.project(&vector(rng, space)))
            .collect();
        let z = Submodule::from_generators(space, gens).expect("generators follow the space");
        if nonzero_kernel_part && z.is_zero() {
            continue;
        }
        return (p, z);
    }
}

/// A form that is positive on `y` but arbitrary across `y` and `y^⊥`:
/// `T = P R*R P + (1−P) K₁ + P K₂ (1−P)`.
///
/// With `rank_deficient`, `R` has random rank, so the radicals are usually
/// nonzero. The coupling `K₂`, which decides whether radical vectors are
/// annihilated by `T*`, is present with probability one half.
pub fn positive_form_on<R: Rng + ?Sized>(
    rng: &mut R,
    y: &Submodule,
    rank_deficient: bool,
) -> SesquilinearForm {
    let space = y.space();
    let p = ModuleOperator::projection(y);
    let q = ModuleOperator::projection(&y.orthogonal_complement());
    let r = if rank_deficient {
        low_rank_operator(rng, space)
    } else {
        operator(rng, space)
    };
    let mut t = p.compose(&r.adjoint().compose(&r)).compose(&p);
    t = t.add(&q.compose(&operator(rng, space)));
    if rng.random_bool(0.5) {
        t = t.add(&p.compose(&operator(rng, space)).compose(&q));
    }
    SesquilinearForm::new(t)
}

/// `T_k = U_k diag(λ) U_k*` with unitary `U_k` and some eigenvalues zero.
pub fn normal_form<R: Rng + ?Sized>(rng: &mut R, space: &ModuleSpace) -> SesquilinearForm {
    let blocks = (0..space.spec().num_blocks())
        .map(|k| {
            let h = space.stack_height(k);
            let u = matrix(rng, h, h).qr().q();
            let diag = CVec::from_fn(h, |_, _| {
                if rng.random_bool(0.3) {
                    C64::new(0.0, 0.0)
                } else {
                    complex(rng)
                }
            });
            &u * CMat::from_diagonal(&diag) * u.adjoint()
        })
        .collect();
    SesquilinearForm::new(ModuleOperator::from_blocks(space, blocks).expect("shapes follow the space"))
}
