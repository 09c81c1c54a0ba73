//! Property tests for the quantizer and the hybrid layout.

use dexaction::{
    dequantize_tokens, fit_space, loss_mask_for, pack_hybrid, quantize_action, unpack_hybrid,
    ActionSpace, Arms, BoundsPolicy, Embodiment, HYBRID_SLOTS,
};
use proptest::prelude::*;

/// One dimension's bounds: either degenerate (lo == hi) or a real interval.
/// Widths stay >= 0.01 and offsets within ±100 so the half-bin bound and
/// the strict-monotonicity property hold at f64 precision instead of
/// drowning in rounding noise at extreme scales.
fn dim_bounds() -> impl Strategy<Value = (f64, f64)> {
    prop_oneof![
        1 => (-100.0f64..100.0).prop_map(|lo| (lo, lo)),
        9 => (-100.0f64..100.0, 0.01f64..50.0).prop_map(|(lo, w)| (lo, lo + w)),
    ]
}

fn space_strategy() -> impl Strategy<Value = ActionSpace> {
    prop::collection::vec(dim_bounds(), 1..=8).prop_map(|bounds| {
        let (lo, hi): (Vec<f64>, Vec<f64>) = bounds.into_iter().unzip();
        ActionSpace::new(lo, hi, BoundsPolicy::MinMax).expect("generated bounds are valid")
    })
}

/// In-range position per dimension as an odd multiple of 2^-25. Such a
/// fraction can never coincide with a bin boundary (a multiple of 2^-8),
/// keeping every sample a safe distance from the knife edge where the
/// exact half-bin inequality is decided by final-ulp rounding.
fn unit_offset() -> impl Strategy<Value = f64> {
    (0u32..(1 << 24)).prop_map(|k| f64::from(2 * k + 1) / f64::from(1u32 << 25))
}

fn in_range_point(space: &ActionSpace, offsets: &[f64]) -> Vec<f64> {
    space
        .lo()
        .iter()
        .zip(space.hi())
        .zip(offsets)
        .map(|((&lo, &hi), &u)| if lo == hi { lo } else { lo + u * (hi - lo) })
        .collect()
}

proptest! {
    #[test]
    fn round_trip_error_is_at_most_half_a_bin(
        space in space_strategy(),
        offsets in prop::collection::vec(unit_offset(), 8),
    ) {
        let x = in_range_point(&space, &offsets);
        let tokens = quantize_action(&x, &space).unwrap();
        let decoded = dequantize_tokens(&tokens, &space).unwrap();
        for d in 0..space.dims() {
            let bound = (space.hi()[d] - space.lo()[d]) / 512.0;
            let err = (x[d] - decoded[d]).abs();
            prop_assert!(
                err <= bound,
                "dim {}: |{} - {}| = {} > {}",
                d, x[d], decoded[d], err, bound
            );
        }
    }

    #[test]
    fn quantize_is_monotone_per_dimension(
        space in space_strategy(),
        a in prop::collection::vec(-200.0f64..200.0, 8),
        b in prop::collection::vec(-200.0f64..200.0, 8),
    ) {
        let dims = space.dims();
        let mut xs: Vec<f64> = a[..dims].to_vec();
        let mut ys: Vec<f64> = b[..dims].to_vec();
        for d in 0..dims {
            if xs[d] > ys[d] {
                std::mem::swap(&mut xs[d], &mut ys[d]);
            }
        }
        let tx = quantize_action(&xs, &space).unwrap();
        let ty = quantize_action(&ys, &space).unwrap();
        for d in 0..dims {
            prop_assert!(tx[d] <= ty[d], "dim {}: {} -> {}, {} -> {}", d, xs[d], tx[d], ys[d], ty[d]);
        }
    }

    #[test]
    fn out_of_range_values_clamp_to_boundary_bins(
        space in space_strategy(),
        below in prop::collection::vec(0.001f64..1000.0, 8),
        above in prop::collection::vec(0.001f64..1000.0, 8),
    ) {
        let dims = space.dims();
        let low: Vec<f64> = (0..dims).map(|d| space.lo()[d] - below[d]).collect();
        let high: Vec<f64> = (0..dims).map(|d| space.hi()[d] + above[d]).collect();
        for (d, &t) in quantize_action(&low, &space).unwrap().iter().enumerate() {
            prop_assert_eq!(t, 0, "dim {} below range", d);
        }
        for (d, &t) in quantize_action(&high, &space).unwrap().iter().enumerate() {
            let expected = if space.is_degenerate(d) { 0 } else { 255 };
            prop_assert_eq!(t, expected, "dim {} above range", d);
        }
    }

    #[test]
    fn dequantize_is_strictly_increasing_in_token_id(space in space_strategy()) {
        for d in 0..space.dims() {
            if space.is_degenerate(d) {
                continue;
            }
            let mut prev = f64::NEG_INFINITY;
            for id in 0..256u16 {
                let mut tokens = vec![0u16; space.dims()];
                tokens[d] = id;
                let x = dequantize_tokens(&tokens, &space).unwrap()[d];
                prop_assert!(x > prev, "dim {} id {}: {} !> {}", d, id, x, prev);
                prev = x;
            }
        }
    }

    #[test]
    fn every_token_stays_under_the_bin_count(
        space in space_strategy(),
        raw in prop::collection::vec(-500.0f64..500.0, 8),
    ) {
        let x = &raw[..space.dims()];
        let tokens = quantize_action(x, &space).unwrap();
        prop_assert_eq!(space.bins(), 256);
        for &t in &tokens {
            prop_assert!(u32::from(t) < space.bins());
        }
    }

    #[test]
    fn min_max_fit_matches_extrema_oracle(
        rows in prop::collection::vec(prop::collection::vec(-1000.0f64..1000.0, 4), 1..40),
    ) {
        let space = fit_space(&rows, BoundsPolicy::MinMax).unwrap();
        for d in 0..4 {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for row in &rows {
                min = min.min(row[d]);
                max = max.max(row[d]);
            }
            prop_assert_eq!(space.lo()[d], min);
            prop_assert_eq!(space.hi()[d], max);
        }
    }

    #[test]
    fn quantile_fit_matches_sort_oracle(
        rows in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 2), 1..200),
        q in 0.001f64..0.499,
    ) {
        let space = fit_space(&rows, BoundsPolicy::Quantile(q)).unwrap();
        for d in 0..2 {
            let mut col: Vec<f64> = rows.iter().map(|r| r[d]).collect();
            col.sort_unstable_by(f64::total_cmp);
            let n = col.len();
            let rank_lo = ((q * n as f64).ceil() as usize).clamp(1, n);
            let rank_hi = (((1.0 - q) * n as f64).ceil() as usize).clamp(1, n);
            prop_assert_eq!(space.lo()[d], col[rank_lo - 1]);
            prop_assert_eq!(space.hi()[d], col[rank_hi - 1]);
            prop_assert!(space.lo()[d] <= space.hi()[d]);
        }
    }

    #[test]
    fn pack_unpack_are_mutual_inverses(
        raw_left in prop::collection::vec(-10.0f64..10.0, 8),
        raw_right in prop::collection::vec(-10.0f64..10.0, 8),
        arms_pick in 0usize..3,
        dof in prop::sample::select(vec![7usize, 8]),
    ) {
        let arms = [Arms::LeftOnly, Arms::RightOnly, Arms::Dual][arms_pick];
        let emb = Embodiment::new(arms, dof).unwrap();
        let left = emb.has_left().then(|| raw_left[..dof].to_vec());
        let right = emb.has_right().then(|| raw_right[..dof].to_vec());

        let packed = pack_hybrid(left.as_deref(), right.as_deref(), emb).unwrap();
        prop_assert_eq!(packed.values().len(), HYBRID_SLOTS);
        prop_assert_eq!(packed.mask(), &loss_mask_for(emb));

        // exactly arms x dof supervised bits
        let expected_bits =
            (usize::from(emb.has_left()) + usize::from(emb.has_right())) * dof;
        prop_assert_eq!(packed.mask().iter().filter(|&&m| m).count(), expected_bits);

        let (l, r) = unpack_hybrid(&packed, emb).unwrap();
        prop_assert_eq!(l, left);
        prop_assert_eq!(r, right);
    }
}
