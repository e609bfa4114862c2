#![allow(dead_code)]

use adaptsync_core::coupling::{
    generate_complete, generate_random_symmetric, generate_small_world_weighted, SmallWorldParams,
};
use adaptsync_core::dynamics::MonotoneMap;
use adaptsync_core::{
    CouplingMatrix, DynamicsMatrix, InnerCoupling, MonotoneCoupling, Scheme, SchemeConfig,
    SchemeKind, TimeVaryingCoupling,
};

pub fn tanh_g() -> MonotoneCoupling {
    MonotoneCoupling::uniform(MonotoneMap::TanhAugmented)
}

/// One valid scheme of `kind` on `n` nodes with node dimension 3.
pub fn scheme_of(kind: SchemeKind, n: usize, seed: u64) -> Scheme {
    let a = generate_small_world_weighted(SmallWorldParams::new(n), seed).unwrap();
    let sym = generate_small_world_weighted(
        SmallWorldParams { symmetric: true, ..SmallWorldParams::new(n) },
        seed,
    )
    .unwrap();
    let gamma = InnerCoupling::new(vec![1.0, 0.5, 2.0]).unwrap();
    let config = match kind {
        SchemeKind::LinearKnown => {
            SchemeConfig::new(kind, DynamicsMatrix::Constant(a)).gamma(gamma)
        }
        SchemeKind::LinearUnknown => SchemeConfig::new(kind, DynamicsMatrix::Constant(a))
            .adaptation(generate_random_symmetric(n, 0.5, seed + 1).unwrap()),
        SchemeKind::LinearTimeVarying => {
            let tv = TimeVaryingCoupling::modulated(&a, 0.5, 1.3).unwrap();
            SchemeConfig::new(kind, DynamicsMatrix::TimeVarying(tv)).gamma(gamma)
        }
        SchemeKind::LinearDominated => {
            let tv = TimeVaryingCoupling::modulated(&sym, 0.5, 0.7).unwrap();
            let hat = CouplingMatrix::new(sym.entries() * 1.5).unwrap();
            SchemeConfig::new(kind, DynamicsMatrix::TimeVarying(tv)).adaptation(hat)
        }
        SchemeKind::NonlinearKnown => {
            SchemeConfig::new(kind, DynamicsMatrix::Constant(sym)).nonlinearity(tanh_g())
        }
        SchemeKind::NonlinearTimeVarying => {
            let tv = TimeVaryingCoupling::modulated(&sym, 0.3, 2.0).unwrap();
            SchemeConfig::new(kind, DynamicsMatrix::TimeVarying(tv)).nonlinearity(tanh_g())
        }
    };
    Scheme::new(config.alpha(1.7)).unwrap()
}

pub fn complete(n: usize) -> CouplingMatrix {
    generate_complete(n).unwrap()
}
