#![allow(dead_code)]

use std::sync::Arc;

use dd_coupler::DDParams;
use delta_core::{DeltaParams, Level};
use group_kernel::{a5_fiber, s3_fiber, MarkedGamma};
use profile_forge::ProfileSpec;

pub const M_MAX: usize = 12;

pub fn base() -> Arc<MarkedGamma> {
    Arc::new(MarkedGamma::abelian_base(2, 3).unwrap())
}

pub fn lamplighter() -> DeltaParams {
    DeltaParams::lamplighter(3, base()).unwrap()
}

pub fn one_level(k: u64) -> DeltaParams {
    let level = Level {
        k,
        gamma: Arc::new(s3_fiber()),
    };
    DeltaParams::new(3, base(), vec![level], None).unwrap()
}

/// Lamplighter source, one `S_3` level at offset 2 in the target.
pub fn pair_a() -> DDParams {
    DDParams::new(
        lamplighter(),
        one_level(2),
        ProfileSpec::Identity,
        ProfileSpec::Identity,
        2,
        M_MAX,
    )
    .unwrap()
}

/// One `S_3` level at offset 1 in the source, lamplighter target.
pub fn pair_c() -> DDParams {
    DDParams::new(
        one_level(1),
        lamplighter(),
        ProfileSpec::Identity,
        ProfileSpec::Identity,
        2,
        M_MAX,
    )
    .unwrap()
}

/// Three levels (`S_3`, `A_5`, `A_5`) at `3, 9, 27` in the source, lamplighter
/// target, source profile `√x`.
pub fn pair_b() -> DDParams {
    let levels = [(3, s3_fiber()), (9, a5_fiber()), (27, a5_fiber())]
        .into_iter()
        .map(|(k, g)| Level {
            k,
            gamma: Arc::new(g),
        })
        .collect();
    let source = DeltaParams::new(3, base(), levels, None).unwrap();
    let root = ProfileSpec::Power { num: 1, den: 1 };
    DDParams::new(source, lamplighter(), root, ProfileSpec::Identity, 2, M_MAX).unwrap()
}
