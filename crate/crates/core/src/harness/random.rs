//! Seeded random weakly convex instances.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::io::{curvature_name, FamilyDescriptor, InstanceFile, ObjectiveDescriptor, ObjectiveKind, SearchDescriptor, SCHEMA_VERSION};
use crate::duality::ProblemInstance;
use crate::elementary::CurvatureSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomSpec {
    pub n: usize,
    pub m: usize,
    /// Range for the weak-convexity modulus of `f`; 0 means convex.
    pub f_modulus: [f64; 2],
    pub g_modulus: [f64; 2],
    /// Entries of `L` are uniform on `[-l_scale, l_scale]`.
    pub l_scale: f64,
    pub seed: u64,
    /// Curvature names for Phi and Psi; drawn at random when absent.
    pub phi: Option<String>,
    pub psi: Option<String>,
    pub search: SearchDescriptor,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            n: 1,
            m: 1,
            f_modulus: [0.0, 1.0],
            g_modulus: [0.0, 1.0],
            l_scale: 1.0,
            seed: 0,
            phi: None,
            psi: None,
            search: SearchDescriptor::default(),
        }
    }
}

const CURVATURE_CHOICES: [CurvatureSpec; 4] = [
    CurvatureSpec::Zero,
    CurvatureSpec::NonPositive,
    CurvatureSpec::NonNegative,
    CurvatureSpec::Any,
];

/// Spread of the eigenvalues above the smallest one.
const EIGEN_SPREAD: f64 = 4.0;

impl RandomSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        for (name, r) in [("f_modulus", self.f_modulus), ("g_modulus", self.g_modulus)] {
            if !(r[0] >= 0.0 && r[0] <= r[1] && r[1].is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must satisfy 0 <= lo <= hi < inf")));
            }
        }
        if !(self.l_scale > 0.0 && self.l_scale.is_finite()) {
            return Err(Error::InvalidArgument("l_scale must be positive".into()));
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Quadratic whose matrix has smallest eigenvalue exactly `-modulus`.
fn weakly_convex(rng: &mut ChaCha8Rng, dim: usize, modulus: f64) -> ObjectiveDescriptor {
    let gauss = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = gauss.qr().q();
    let eig = DVector::from_fn(dim, |i, _| {
        if i == 0 {
            -modulus
        } else {
            uniform(rng, -modulus, -modulus + EIGEN_SPREAD)
        }
    });
    let a = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    ObjectiveDescriptor {
        kind: ObjectiveKind::Quadratic,
        a: (0..dim).map(|i| a.row(i).iter().copied().collect()).collect(),
        u: (0..dim).map(|_| uniform(rng, -2.0, 2.0)).collect(),
        c: uniform(rng, -1.0, 1.0),
        domain_box: None,
    }
}

/// The serializable form of the instance drawn for `spec`.
pub fn random_instance_file(spec: &RandomSpec) -> Result<InstanceFile> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rho_f = uniform(&mut rng, spec.f_modulus[0], spec.f_modulus[1]);
    let rho_g = uniform(&mut rng, spec.g_modulus[0], spec.g_modulus[1]);
    let f = weakly_convex(&mut rng, spec.n, rho_f);
    let g = weakly_convex(&mut rng, spec.m, rho_g);
    let l = (0..spec.m)
        .map(|_| (0..spec.n).map(|_| uniform(&mut rng, -spec.l_scale, spec.l_scale)).collect())
        .collect();
    let mut family = |given: &Option<String>| FamilyDescriptor {
        curvature: given
            .clone()
            .unwrap_or_else(|| curvature_name(*CURVATURE_CHOICES.choose(&mut rng).expect("non-empty"))),
        constants: true,
    };
    let phi = family(&spec.phi);
    let psi = family(&spec.psi);
    Ok(InstanceFile {
        schema_version: SCHEMA_VERSION.into(),
        n: spec.n,
        m: spec.m,
        l,
        f,
        g,
        phi,
        psi,
        search: spec.search.clone(),
    })
}

pub fn random_instance(spec: &RandomSpec) -> Result<ProblemInstance> {
    random_instance_file(spec)?.to_instance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::io::instance_to_json;
    use crate::objective::weak_convexity_modulus;

    #[test]
    fn same_seed_same_bytes() {
        let spec = RandomSpec { n: 2, m: 3, seed: 42, ..Default::default() };
        let a = instance_to_json(&random_instance(&spec).unwrap()).unwrap();
        let b = instance_to_json(&random_instance(&spec).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = RandomSpec { seed: 43, ..spec };
        assert_ne!(a, instance_to_json(&random_instance(&other).unwrap()).unwrap());
    }

    #[test]
    fn zero_modulus_gives_convex_data() {
        for seed in 0..20 {
            let spec = RandomSpec { n: 3, m: 2, f_modulus: [0.0, 0.0], g_modulus: [0.0, 0.0], seed, ..Default::default() };
            let inst = random_instance(&spec).unwrap();
            assert!(weak_convexity_modulus(&inst.f).modulus <= 1e-12);
            assert!(weak_convexity_modulus(&inst.g).modulus <= 1e-12);
        }
    }

    #[test]
    fn moduli_land_in_range() {
        for seed in 0..20 {
            let spec = RandomSpec { n: 3, m: 1, f_modulus: [0.5, 1.5], g_modulus: [2.0, 3.0], seed, ..Default::default() };
            let inst = random_instance(&spec).unwrap();
            let rf = weak_convexity_modulus(&inst.f).modulus;
            let rg = weak_convexity_modulus(&inst.g).modulus;
            assert!((0.5 - 1e-9..=1.5 + 1e-9).contains(&rf), "{rf}");
            assert!((2.0 - 1e-9..=3.0 + 1e-9).contains(&rg), "{rg}");
            assert_eq!((inst.l.rows(), inst.l.cols()), (1, 3));
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(random_instance(&RandomSpec { f_modulus: [1.0, 0.5], ..Default::default() }).is_err());
        assert!(random_instance(&RandomSpec { n: 0, ..Default::default() }).is_err());
    }
}
