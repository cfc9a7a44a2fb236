use std::sync::OnceLock;

use badcantor::cantor::certificate::Certificate;
use badcantor::cantor::survivors::survivor_recursion;
use badcantor::config::RunConfig;
use badcantor::curve::{build_curve, CurveModel, Domain, ShiftField};
use badcantor::dangerous::WindowContext;
use badcantor::error::OracleError;
use badcantor::interval::{partition, RationalInterval};
use badcantor::oracle::transfer::planted_instance;
use badcantor::oracle::{bad_constant_estimate, quality, transference_check};
use badcantor::pipeline::{construct, prepare};
use badcantor::poly::Poly;
use badcantor::rational::{q, qi, Q};
use badcantor::weight::{validate_weights, Weight};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const HOMOGENEOUS: &str = "phi1 = 0 1\nphi2 = 0 0 1\ndomain = -1,1\ntheta1 = 0\ntheta2 = 0\n\
    weights = 1/2,1/2\nR = 32\ncenter = 1/10\nq_max = 8\nxi_samples = 16\nrules = measure,dangerous-window\n";

fn line(theta: Q) -> (CurveModel, ShiftField, Weight) {
    let curve = build_curve(vec![Poly::identity()], Domain::new(qi(-8), qi(8)).unwrap()).unwrap();
    let on = RationalInterval::new(qi(-8), qi(8)).unwrap();
    let shift = ShiftField::derive(vec![Poly::constant(theta)], 1, &on, None).unwrap();
    (curve, shift, validate_weights(&[qi(1)]).unwrap())
}

fn homogeneous_ctx() -> &'static WindowContext {
    static CTX: OnceLock<WindowContext> = OnceLock::new();
    CTX.get_or_init(|| {
        let (_, _, _, sheet, _) = prepare(&RunConfig::parse(HOMOGENEOUS).unwrap()).unwrap();
        WindowContext::from_sheet(&sheet)
    })
}

fn rational() -> impl Strategy<Value = Q> {
    (-400i64..400, 1i64..60).prop_map(|(a, b)| q(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_tiles_the_parent(a in rational(), len in (1i64..50, 1i64..50), r in 2u32..40) {
        let iv = RationalInterval::new(a.clone(), &a + q(len.0, len.1)).unwrap();
        let kids = partition(&iv, r);
        prop_assert_eq!(kids.len(), r as usize);
        prop_assert_eq!(kids[0].left(), iv.left());
        prop_assert_eq!(kids.last().unwrap().right(), iv.right());
        for w in kids.windows(2) {
            prop_assert_eq!(w[0].right(), w[1].left());
        }
        let target = iv.length() / qi(r as i64);
        prop_assert!(kids.iter().all(|k| k.length() == target));
    }

    #[test]
    fn quality_is_invariant_under_integer_translation(
        x in (-300i64..300, 1i64..97).prop_map(|(a, b)| q(a, b * 50)),
        k in -2i64..=2,
        m in 1i64..400,
        theta in rational(),
    ) {
        let (curve, shift, w) = line(theta);
        let a = quality(&curve, &shift, &w, &x, m);
        let b = quality(&curve, &shift, &w, &(&x + qi(k)), m);
        prop_assert_eq!(a.value, b.value);
    }

    #[test]
    fn estimate_is_antitone_in_q_and_monotone_in_m0(
        x in (1i64..1000).prop_map(|a| q(a, 1009) + q(1, 3_000_017)),
        qb in 20u64..300,
        extra in 1u64..300,
        m0 in 0u64..19,
    ) {
        let (curve, shift, w) = line(qi(0));
        let small = bad_constant_estimate(&curve, &shift, &w, &x, qb, m0).value;
        let large = bad_constant_estimate(&curve, &shift, &w, &x, qb + extra, m0).value;
        prop_assert!(large.cmp_exact(&small).is_le());
        let raised = bad_constant_estimate(&curve, &shift, &w, &x, qb, m0 + 1).value;
        prop_assert!(raised.cmp_exact(&small).is_ge());
    }

    #[test]
    fn transference_never_exhausts_the_box(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (inst, u) = planted_instance(&mut rng, n);
        prop_assert!(inst.primal_ok(&u));
        let b = inst.dual_box_bound().unwrap();
        match transference_check(&inst, b) {
            Ok(rep) => prop_assert!(inst.dual_ok(&rep.dual, &rep.iota_pow, &rep.v)),
            Err(OracleError::NoPrimalSolution) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn survivors_shrink_when_removals_grow(
        r in 2u64..12,
        rows in prop::collection::vec(prop::collection::vec(0u64..3, 1..7), 1..6),
        bump in (0usize..6, 0usize..6),
    ) {
        let table: Vec<Vec<u64>> = rows.iter().enumerate().map(|(q, row)| (0..=q).map(|p| *row.get(p).unwrap_or(&0)).collect()).collect();
        let mut more = table.clone();
        let qq = bump.0 % table.len();
        let pp = bump.1 % (qq + 1);
        more[qq][pp] += 1;
        let a = survivor_recursion(r, &table);
        let b = survivor_recursion(r, &more);
        // Extra removals never raise any t′ while both recursions run.
        for (x, y) in a.t.iter().zip(&b.t) {
            prop_assert!(y <= x);
        }
        prop_assert!(a.criterion_met || !b.criterion_met);
    }

    #[test]
    fn bands_partition_the_denominators(m in 1u64..2_000_000) {
        let ctx = homogeneous_ctx();
        if let Some(lev) = ctx.level_of(m) {
            let above = m > ctx.m_threshold().to_integer().to_u64().unwrap();
            let (lo, hi) = ctx.band_range(lev);
            let mb = BigInt::from(m);
            prop_assert_eq!(above, lo <= mb && mb < hi);
            prop_assert!(mb <= ctx.band_ceiling(lev));
            prop_assert!(lev == 1 || mb > ctx.band_ceiling(lev - 1));
        }
    }
}

#[test]
fn band_ranges_are_consecutive() {
    let ctx = homogeneous_ctx();
    for lev in 1..30 {
        let (_, hi) = ctx.band_range(lev);
        let (lo, _) = ctx.band_range(lev + 1);
        assert_eq!(hi, lo, "gap between levels {lev} and {}", lev + 1);
        assert_eq!(ctx.band_ceiling(lev), &hi - 1);
    }
}

#[test]
fn certificate_round_trip() {
    let mut sink = |_: &_| {};
    let run = construct(&RunConfig::parse(HOMOGENEOUS).unwrap(), &mut sink).unwrap();
    let cert = run.certificate().unwrap();
    let text = cert.serialize();
    let back = Certificate::parse(&text).unwrap();
    assert_eq!(back, cert);
    assert_eq!(back.serialize(), text);
}
