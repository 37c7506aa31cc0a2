//! Seeded instance generation.
//!
//! Everything here is deterministic in the seed: Haar factors come from QR
//! of Gaussian matrices with the R-diagonal phase fixed, noise is unit-
//! normalized Gaussian, and the noisy-diagonal model plants a known diagonal
//! core under random unitary transforms so recovery can be measured.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::manifold::UnitaryTuple;
use crate::matrix::ComplexMatrix;
use crate::objective::{Dagger, Family, ProblemSpec};
use crate::tensor::{next_index, DenseTensor};

/// Haar-distributed unitary (or real orthogonal) factor: QR of a Gaussian
/// matrix with positive-real R diagonal.
pub fn haar_unitary(n: usize, complex: bool, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
        Complex64::new(re, im)
    });
    g.qr_positive().expect("Gaussian matrix is almost surely full rank")
}

pub fn random_tensor(dims: &[usize], complex: bool, rng: &mut impl Rng) -> DenseTensor {
    let len: usize = dims.iter().product();
    let data = (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
            Complex64::new(re, im)
        })
        .collect();
    DenseTensor::from_data(dims, data).expect("consistent dims")
}

/// Random Hermitian tensor of order 2γ: (G + Gᴴ-swap)/2.
pub fn random_hermitian(n: usize, gamma: usize, complex: bool, rng: &mut impl Rng) -> DenseTensor {
    let dims = vec![n; 2 * gamma];
    let g = random_tensor(&dims, complex, rng);
    let mut out = DenseTensor::zeros(&dims).expect("valid dims");
    let mut idx = vec![0usize; 2 * gamma];
    let mut swapped = vec![0usize; 2 * gamma];
    loop {
        swapped[..gamma].copy_from_slice(&idx[gamma..]);
        swapped[gamma..].copy_from_slice(&idx[..gamma]);
        let v = (g.get(&idx) + g.get(&swapped).conj()) * 0.5;
        out.set(&idx, v);
        if !next_index(&mut idx, &dims) {
            return out;
        }
    }
}

/// Random Haar tuple matching the factor layout of a problem.
pub fn random_tuple(spec: &ProblemSpec, rng: &mut impl Rng) -> UnitaryTuple {
    let mats = spec
        .factor_sizes()
        .iter()
        .map(|&n| haar_unitary(n, !spec.real_data, rng))
        .collect();
    UnitaryTuple::from_mats_unchecked(mats)
}

/// Averages a cubical tensor over all index permutations.
pub fn symmetrize(t: &DenseTensor) -> Result<DenseTensor> {
    let d = t.order();
    let n = t.dims()[0];
    if t.dims().iter().any(|&m| m != n) {
        return Err(Error::InvalidArgument("symmetrization needs a cubical tensor".into()));
    }
    let perms = permutations(d);
    let weight = 1.0 / perms.len() as f64;
    let dims = t.dims().to_vec();
    let mut out = DenseTensor::zeros(&dims)?;
    let mut idx = vec![0usize; d];
    let mut src = vec![0usize; d];
    loop {
        let mut v = Complex64::ZERO;
        for perm in &perms {
            for (slot, &from) in perm.iter().enumerate() {
                src[slot] = idx[from];
            }
            v += t.get(&src);
        }
        out.set(&idx, v * weight);
        if !next_index(&mut idx, &dims) {
            return Ok(out);
        }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for t in 0..rest.len() {
            let v = rest.remove(t);
            prefix.push(v);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(t, v);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..k).collect(), &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Diagonal core under random unitary transforms plus unit-normalized
    /// Gaussian noise.
    NoisyDiagonal,
    /// Dense i.i.d. Gaussian entries.
    RandomDense,
}

impl GeneratorKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "noisy-diagonal" => Ok(GeneratorKind::NoisyDiagonal),
            "random-dense" => Ok(GeneratorKind::RandomDense),
            other => Err(Error::InvalidArgument(format!("unknown generator '{other}'"))),
        }
    }
}

/// Fully seeded description of a synthetic instance.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub count: usize,
    /// Noise amplitude multiplying E/‖E‖; 0 gives an exactly transformable
    /// core.
    pub noise: f64,
    pub complex_data: bool,
    /// One shared ground-truth factor across modes instead of independent
    /// factors.
    pub common_factor: bool,
    /// Average the noise over all index permutations before normalizing.
    pub symmetrize_noise: bool,
    pub family: Family,
    pub dagger: Dagger,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn noisy_diagonal(dims: &[usize], count: usize, complex_data: bool, seed: u64) -> Self {
        let r = *dims.iter().min().expect("nonempty dims");
        GeneratorSpec {
            kind: GeneratorKind::NoisyDiagonal,
            dims: dims.to_vec(),
            ranks: vec![r],
            count,
            noise: 1.0,
            complex_data,
            common_factor: false,
            symmetrize_noise: false,
            family: Family::Jatd,
            dagger: Dagger::ConjTranspose,
            seed,
        }
    }

    pub fn random_dense(dims: &[usize], ranks: &[usize], count: usize, seed: u64) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::RandomDense,
            dims: dims.to_vec(),
            ranks: ranks.to_vec(),
            count,
            noise: 0.0,
            complex_data: false,
            common_factor: false,
            symmetrize_noise: false,
            family: Family::Jatc,
            dagger: Dagger::ConjTranspose,
            seed,
        }
    }
}

/// Diagonal core: √j + j·i on the complex side, the tensor's level index ℓ
/// on the real side (both 1-based, matching the reference experiments).
fn diagonal_core(dims: &[usize], ell: usize, complex_data: bool) -> Result<DenseTensor> {
    let mut d = DenseTensor::zeros(dims)?;
    let n = *dims.iter().min().expect("nonempty");
    for q in 0..n {
        let idx = vec![q; dims.len()];
        let v = if complex_data {
            let j1 = (q + 1) as f64;
            Complex64::new(j1.sqrt(), j1)
        } else {
            Complex64::new((ell + 1) as f64, 0.0)
        };
        d.set(&idx, v);
    }
    Ok(d)
}

/// Builds the problem the generator describes. Deterministic in the seed.
pub fn gen_instance(g: &GeneratorSpec) -> Result<ProblemSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let d = g.dims.len();
    let mut tensors = Vec::with_capacity(g.count);
    match g.kind {
        GeneratorKind::NoisyDiagonal => {
            let shared: Option<Vec<ComplexMatrix>> = if g.common_factor {
                let n = g.dims[0];
                if g.dims.iter().any(|&m| m != n) {
                    return Err(Error::InvalidArgument(
                        "a common factor needs a cubical tensor".into(),
                    ));
                }
                Some(vec![haar_unitary(n, g.complex_data, &mut rng); d])
            } else {
                None
            };
            for ell in 0..g.count {
                let factors: Vec<ComplexMatrix> = match &shared {
                    Some(f) => f.clone(),
                    None => g
                        .dims
                        .iter()
                        .map(|&n| haar_unitary(n, g.complex_data, &mut rng))
                        .collect(),
                };
                let mut a = diagonal_core(&g.dims, ell, g.complex_data)?;
                for (p, u) in factors.iter().enumerate() {
                    a = a.mode_product(u, p)?;
                }
                if g.noise > 0.0 {
                    let mut e = random_tensor(&g.dims, false, &mut rng);
                    if g.symmetrize_noise {
                        e = symmetrize(&e)?;
                    }
                    let norm = e.frobenius_norm_sq().sqrt();
                    e.scale(g.noise / norm);
                    a.add_assign(&e)?;
                }
                tensors.push(a);
            }
        }
        GeneratorKind::RandomDense => {
            for _ in 0..g.count {
                tensors.push(random_tensor(&g.dims, g.complex_data, &mut rng));
            }
        }
    }
    let mut spec = ProblemSpec::new(
        g.family,
        tensors,
        vec![1.0; g.count],
        g.ranks.clone(),
        g.dagger,
        1,
    )?;
    spec.real_data = !g.complex_data;
    Ok(spec)
}

/// The 3×3×3 benchmark tensor, frontal slices A(:, :, k) as printed.
pub fn example_7_1() -> DenseTensor {
    let slices: [[[f64; 3]; 3]; 3] = [
        [[8.0, 8.0, 3.0], [10.0, 5.0, 7.0], [10.0, 5.0, 4.0]],
        [[10.0, 8.0, 10.0], [8.0, 3.0, 7.0], [5.0, 5.0, 3.0]],
        [[9.0, 3.0, 4.0], [7.0, 7.0, 6.0], [2.0, 7.0, 5.0]],
    ];
    let mut t = DenseTensor::zeros(&[3, 3, 3]).expect("static dims");
    for (k, slice) in slices.iter().enumerate() {
        for (i, row) in slice.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t.set(&[i, j, k], Complex64::new(*v, 0.0));
            }
        }
    }
    t
}

/// The benchmark tensor as a full-rank diagonalization problem.
pub fn example_7_1_spec() -> ProblemSpec {
    let mut spec = ProblemSpec::new(
        Family::Jatd,
        vec![example_7_1()],
        vec![1.0],
        vec![3],
        Dagger::ConjTranspose,
        1,
    )
    .expect("static instance is valid");
    spec.real_data = true;
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::per_ratio;

    #[test]
    fn example_tensor_matches_reported_statistics() {
        let a = example_7_1();
        assert_eq!(a.frobenius_norm_sq(), 1215.0);
        let diag = a.diag_vector();
        assert_eq!(diag[0].re, 8.0);
        assert_eq!(diag[1].re, 3.0);
        assert_eq!(diag[2].re, 5.0);
        assert_eq!(a.diag_norm_sq(), 98.0);
        let per = per_ratio(&a).unwrap();
        assert!((per - 98.0 / 1215.0).abs() < 1e-15);
        assert!((per - 0.0807).abs() < 5e-5);
        // leading scalar corner and identity transforms
        let corner = a.subtensor(&[1, 1, 1]).unwrap();
        assert_eq!(corner.get(&[0, 0, 0]).re, 8.0);
        let eye = crate::matrix::ComplexMatrix::identity(3);
        let same = a
            .mode_product(&eye, 0)
            .unwrap()
            .mode_product(&eye, 1)
            .unwrap()
            .mode_product(&eye, 2)
            .unwrap();
        assert_eq!(same, a);
    }

    #[test]
    fn haar_factors_are_unitary_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(5, true, &mut rng);
        assert!(u.is_unitary(1e-12));
        let mut rng2 = ChaCha8Rng::seed_from_u64(3);
        let v = haar_unitary(5, true, &mut rng2);
        assert_eq!(u.data(), v.data());
        let mut rng3 = ChaCha8Rng::seed_from_u64(4);
        let o = haar_unitary(4, false, &mut rng3);
        assert!(o.is_unitary(1e-12));
        assert!(o.data().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn generator_is_deterministic() {
        let g = GeneratorSpec::noisy_diagonal(&[3, 3, 4], 2, true, 17);
        let a = gen_instance(&g).unwrap();
        let b = gen_instance(&g).unwrap();
        for (x, y) in a.tensors.iter().zip(&b.tensors) {
            assert_eq!(x.data(), y.data());
        }
    }

    #[test]
    fn symmetrized_noise_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = random_tensor(&[3, 3, 3], false, &mut rng);
        let s = symmetrize(&e).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let v = s.get(&[i, j, k]);
                    assert!((v - s.get(&[j, i, k])).norm() < 1e-14);
                    assert!((v - s.get(&[k, j, i])).norm() < 1e-14);
                    assert!((v - s.get(&[i, k, j])).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn zero_noise_instance_is_exactly_transformable() {
        let mut g = GeneratorSpec::noisy_diagonal(&[3, 3, 3], 1, true, 9);
        g.noise = 0.0;
        let spec = gen_instance(&g).unwrap();
        // the planted core is diagonal, so the full norm equals the would-be
        // diagonal mass after undoing the factors
        let n2 = spec.tensors[0].frobenius_norm_sq();
        let expect: f64 = (1..=3).map(|j| (j as f64) + (j as f64).powi(2)).sum();
        assert!((n2 - expect).abs() < 1e-10);
    }
}
