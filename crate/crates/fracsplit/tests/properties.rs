//! Randomized property checks for the schedule, the semigroup, and the
//! region machinery.

use fracsplit::kernel::{apply_semigroup, KernelSpec};
use fracsplit::reaction::{nonlinear_flow, FlowConfig, FlowFactor, ReactionModel};
use fracsplit::regions::fhn_rectangle;
use fracsplit::splitting::{alpha, tau};
use fracsplit::{Field, GridSpec};
use proptest::prelude::*;
use std::f64::consts::PI;

const TAU_TOL: f64 = 1e-12;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn tau_lemma_suite(
        h in 0.01f64..1.0,
        t_base in -5.0f64..5.0,
        span in 0.0f64..10.0,
        split in 0.0f64..1.0,
        k in -3i64..=3,
    ) {
        let t_prev = t_base;
        let t = t_base + span;
        let v = tau(h, t, t_prev).unwrap();

        // (i) 0 <= tau <= 2(t - t')
        prop_assert!(v >= -TAU_TOL);
        prop_assert!(v <= 2.0 * span + TAU_TOL);

        // (ii) additivity through an interior point
        let t_mid = t_prev + split * span;
        let left = tau(h, t_mid, t_prev).unwrap();
        let right = tau(h, t, t_mid).unwrap();
        prop_assert!((left + right - v).abs() <= TAU_TOL);

        // (iii) shift invariance by whole periods
        let shifted = tau(h, t + k as f64 * h, t_prev + k as f64 * h).unwrap();
        prop_assert!((shifted - v).abs() <= TAU_TOL);

        // (iv) whole periods integrate to kh exactly
        let kk = k.unsigned_abs() as f64;
        let whole = tau(h, t_prev + kk * h, t_prev).unwrap();
        prop_assert!((whole - kk * h).abs() <= TAU_TOL);

        // (v) |(t - t') - tau| <= h
        prop_assert!((span - v).abs() <= h + TAU_TOL);

        // alpha stays in {0, 2}
        let a = alpha(h, t).unwrap();
        prop_assert!(a == 0.0 || a == 2.0);
    }
}

fn random_field(values: &[f64], n: usize) -> Field {
    let grid = GridSpec::line(2.0 * PI, n).unwrap();
    Field::from_values(grid, 1, false, values.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn semigroup_law_and_contraction(
        values in prop::collection::vec(-1.0f64..1.0, 256),
        t in 0.1f64..1.0,
        t2 in 0.1f64..1.0,
        sigma in 0.5f64..2.0,
        beta in 0.5f64..=1.0,
    ) {
        let field = random_field(&values, 256);
        let spec = KernelSpec::new(sigma, beta, 1).unwrap();
        let sup = field.sup_norm();

        let once = apply_semigroup(&field, &spec, t + t2).unwrap();
        let twice = apply_semigroup(&apply_semigroup(&field, &spec, t).unwrap(), &spec, t2).unwrap();
        let law_err = once.sup_distance(&twice).unwrap();
        prop_assert!(law_err <= 1e-12 * sup, "semigroup law error {law_err}");

        let contracted = apply_semigroup(&field, &spec, t).unwrap();
        prop_assert!(contracted.sup_norm() <= sup * (1.0 + 1e-12));
    }

    #[test]
    fn convolution_preserves_scalar_range(
        values in prop::collection::vec(0.0f64..1.0, 128),
        t in 0.05f64..2.0,
        beta in 0.5f64..=1.0,
    ) {
        // Interval hull [min, max] is convex; the semigroup cannot leave it.
        let field = random_field(&values, 128);
        let spec = KernelSpec::new(1.0, beta, 1).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let out = apply_semigroup(&field, &spec, t).unwrap();
        let slack = 1e-10 * (hi - lo).max(1e-30);
        for p in 0..out.grid().len() {
            let v = out.value(p, 0);
            prop_assert!(v >= lo - slack && v <= hi + slack, "{v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn convolution_preserves_complex_modulus(
        phases in prop::collection::vec(0.0f64..(2.0 * PI), 128),
        radius in 0.1f64..3.0,
        t in 0.05f64..2.0,
    ) {
        let grid = GridSpec::line(2.0 * PI, 128).unwrap();
        let mut field = Field::zeros(grid, 2, true).unwrap();
        for (p, phi) in phases.iter().enumerate() {
            field.set(p, 0, radius * phi.cos());
            field.set(p, 1, radius * phi.sin());
        }
        let spec = KernelSpec::new(1.0, 0.75, 1).unwrap();
        let out = apply_semigroup(&field, &spec, t).unwrap();
        for p in 0..out.grid().len() {
            let (re, im) = (out.value(p, 0), out.value(p, 1));
            let modulus = (re * re + im * im).sqrt();
            prop_assert!(modulus <= radius * (1.0 + 1e-10), "|u| = {modulus} > {radius}");
        }
    }

    #[test]
    fn fhn_certificate_margins_negative(
        a in 0.01f64..0.99,
        e in 0.01f64..10.0,
        b in 0.0f64..50.0,
    ) {
        let rect = fhn_rectangle(a, e, b).unwrap();
        prop_assert!(rect.worst_margin < 0.0, "worst margin {}", rect.worst_margin);
        prop_assert!(b * rect.r1 < rect.r2 && 2.0 * rect.r2 < rect.r1.powi(3));
    }

    #[test]
    fn autonomous_flow_is_shift_invariant(
        z0 in -0.9f64..0.9,
        shift_q in 0u32..80,
        span_q in 1u32..128,
    ) {
        // Dyadic shifts and spans keep t1 − t0 bitwise equal across calls.
        let shift = shift_q as f64 * 0.25;
        let span = span_q as f64 / 64.0;
        let model = ReactionModel::fisher(1.0).unwrap();
        let cfg = FlowConfig::default();
        let a = nonlinear_flow(&model, 0.0, span, &[z0.abs()], FlowFactor::Doubled, &cfg).unwrap();
        let b = nonlinear_flow(&model, shift, shift + span, &[z0.abs()], FlowFactor::Doubled, &cfg)
            .unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn snapshot_roundtrip(values in prop::collection::vec(prop::num::f64::NORMAL, 32)) {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::line(1.0, 16).unwrap();
        let field = Field::from_values(grid.clone(), 2, false, values).unwrap();
        let path = dir.path().join("snap.bin");
        fracsplit::io::write_field(&path, &field).unwrap();
        let back = fracsplit::io::read_field(&path, grid, 2, false).unwrap();
        prop_assert_eq!(field, back);
    }
}
