//! Property tests over randomized grids and models.

use proptest::prelude::*;

use levelgen_core::codec::{decode, encode, strip_path, DecodeMode, EncodingSpec};
use levelgen_core::level::{
    parse_level, serialize_level, CharMap, TileCategory, TileGrid, GRID_HEIGHT,
};
use levelgen_core::lstm::{loss_and_grads, LstmState, ModelConfig};
use levelgen_core::metrics::evaluate_level;
use levelgen_core::path::{annotate_paths, near_optimal_union, MovementModel};
use levelgen_core::train::{Optimizer, OptimizerKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random grid of 13 ground-truth categories, biased toward empty space
/// with a solid floor, so a fair share of grids are completable.
fn arb_grid(max_width: usize) -> impl Strategy<Value = TileGrid> {
    (1..=max_width, any::<u64>()).prop_map(|(width, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut grid = TileGrid::filled(width, TileCategory::Empty);
        for col in 0..width {
            if rng.random::<f64>() < 0.85 {
                grid.set(col, 15, TileCategory::Solid);
            }
            for row in 0..15 {
                let r: f64 = rng.random();
                let cat = if r < 0.80 {
                    TileCategory::Empty
                } else if r < 0.88 {
                    TileCategory::Solid
                } else {
                    let deco = [
                        TileCategory::Enemy,
                        TileCategory::DestructibleBlock,
                        TileCategory::QuestionCoin,
                        TileCategory::QuestionPowerup,
                        TileCategory::Coin,
                        TileCategory::BulletTop,
                        TileCategory::BulletColumn,
                        TileCategory::PipeLeft,
                        TileCategory::PipeRight,
                        TileCategory::PipeTopLeft,
                        TileCategory::PipeTopRight,
                    ];
                    deco[rng.random_range(0..deco.len())]
                };
                grid.set(col, row, cat);
            }
        }
        grid
    })
}

/// The same grid with some empty cells turned into path markers, so
/// path-bearing specs can encode it.
fn with_markers(grid: &TileGrid, seed: u64) -> TileGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = grid.clone();
    let mut any = false;
    for col in 0..out.width() {
        for row in 0..GRID_HEIGHT {
            if out.get(col, row) == TileCategory::Empty && rng.random::<f64>() < 0.15 {
                out.set(col, row, TileCategory::PathMarker);
                any = true;
            }
        }
    }
    if !any {
        // Guarantee at least one marker when there is empty space.
        'outer: for col in 0..out.width() {
            for row in 0..GRID_HEIGHT {
                if out.get(col, row) == TileCategory::Empty {
                    out.set(col, row, TileCategory::PathMarker);
                    break 'outer;
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn level_text_round_trips(grid in arb_grid(24)) {
        let map = CharMap::default();
        let text = serialize_level(&grid, &map);
        let parsed = parse_level(&text, &map).unwrap();
        prop_assert_eq!(&parsed, &grid);
        prop_assert_eq!(serialize_level(&parsed, &map), text);
    }

    #[test]
    fn codec_round_trips_all_specs(grid in arb_grid(20), seed in any::<u64>()) {
        let marked = with_markers(&grid, seed);
        for spec in EncodingSpec::all() {
            let source = if spec.paths { marked.clone() } else { grid.clone() };
            let seqs = encode(&source, spec).unwrap();
            prop_assert_eq!(seqs.len(), if spec.snaking { 2 } else { 1 });
            for seq in &seqs {
                let (decoded, warnings) = decode(seq, DecodeMode::Strict).unwrap();
                prop_assert_eq!(&decoded, &source);
                prop_assert!(warnings.is_empty());
            }
        }
    }

    #[test]
    fn strip_commutes_with_the_codec(grid in arb_grid(16), seed in any::<u64>()) {
        let marked = with_markers(&grid, seed);
        let spec_paths = EncodingSpec::new(false, true, false);
        let spec_plain = EncodingSpec::new(false, false, false);
        let via_paths = {
            let seq = &encode(&marked, spec_paths).unwrap()[0];
            strip_path(&decode(seq, DecodeMode::Strict).unwrap().0)
        };
        let via_plain = {
            let stripped = strip_path(&marked);
            let seq = &encode(&stripped, spec_plain).unwrap()[0];
            decode(seq, DecodeMode::Strict).unwrap().0
        };
        prop_assert_eq!(via_paths, via_plain);
    }

    #[test]
    fn union_is_monotone_and_annotation_idempotent(grid in arb_grid(14)) {
        let model = MovementModel::default();
        if let Ok(u0) = near_optimal_union(&grid, &model, 0) {
            let u5 = near_optimal_union(&grid, &model, 5).unwrap();
            let u10 = near_optimal_union(&grid, &model, 10).unwrap();
            prop_assert!(u0.is_subset(&u5));
            prop_assert!(u5.is_subset(&u10));

            let once = annotate_paths(&grid, &model, 10).unwrap();
            let twice = annotate_paths(&once, &model, 10).unwrap();
            prop_assert_eq!(&once, &twice);
            // Annotation only ever rewrites empty cells.
            for col in 0..grid.width() {
                for row in 0..GRID_HEIGHT {
                    let before = grid.get(col, row);
                    let after = once.get(col, row);
                    if before != TileCategory::Empty {
                        prop_assert_eq!(before, after);
                    } else {
                        prop_assert!(
                            after == TileCategory::Empty || after == TileCategory::PathMarker
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn metric_ranges_hold(grid in arb_grid(18)) {
        let m = evaluate_level(&grid, &MovementModel::default());
        prop_assert!((0.0..=1.0).contains(&m.e));
        prop_assert!((0.0..=1.0).contains(&m.n));
        prop_assert!((0.0..=1.0).contains(&m.d));
        prop_assert!((0.0..=1.0).contains(&m.r2));
        prop_assert!(m.e + m.d <= 1.0 + 1e-12);
        prop_assert!(m.p <= m.e + m.d + 1e-12);
        prop_assert!(m.j_i <= m.j);
        if !m.completable {
            prop_assert_eq!((m.p, m.j, m.j_i), (0.0, 0, 0));
        }
    }

    #[test]
    fn gradients_match_finite_differences(model_seed in 0u64..1u64 << 48, data_seed in any::<u64>()) {
        let mut model = ModelConfig { vocab: 6, hidden: 8, layers: 2, dropout: 0.0 }.build(model_seed);
        let mut rng = ChaCha8Rng::seed_from_u64(data_seed);
        let window: Vec<u32> = (0..12).map(|_| rng.random_range(0..6u32)).collect();
        let state = LstmState::zero(&model);
        let (_, grads, _) = loss_and_grads(
            &model, &window, &state, &mut ChaCha8Rng::seed_from_u64(0), f64::INFINITY,
        ).unwrap();
        let eps = 1e-4;
        // A random sample of parameters per case keeps the suite fast; the
        // dedicated gradient-check tests sweep every parameter.
        for _ in 0..12 {
            let idx = rng.random_range(0..model.param_count());
            let orig = model.get_param(idx);
            model.set_param(idx, orig + eps);
            let (lp, _, _) = loss_and_grads(
                &model, &window, &state, &mut ChaCha8Rng::seed_from_u64(0), f64::INFINITY,
            ).unwrap();
            model.set_param(idx, orig - eps);
            let (lm, _, _) = loss_and_grads(
                &model, &window, &state, &mut ChaCha8Rng::seed_from_u64(0), f64::INFINITY,
            ).unwrap();
            model.set_param(idx, orig);
            let numeric = (lp - lm) / (2.0 * eps);
            let analytic = grads.get_param(idx);
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            prop_assert!((analytic - numeric).abs() / denom < 1e-4);
        }
    }
}

/// A thousand noisy update steps with clipping keep every parameter finite.
#[test]
fn parameters_stay_finite_under_training() {
    let mut model = ModelConfig { vocab: 10, hidden: 12, layers: 2, dropout: 0.5 }.build(8);
    let mut optimizer = Optimizer::new(OptimizerKind::RmsProp, 2e-3, 0.95, &model);
    let mut data_rng = ChaCha8Rng::seed_from_u64(1);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(2);
    let mut state = LstmState::zero(&model);
    for step in 0..1000 {
        let window: Vec<u32> = (0..9).map(|_| data_rng.random_range(0..10u32)).collect();
        let (loss, grads, next) =
            loss_and_grads(&model, &window, &state, &mut dropout_rng, 5.0).unwrap();
        assert!(loss.is_finite(), "loss diverged at step {step}");
        optimizer.step(&mut model, &grads, 1.0);
        state = next;
        if step % 50 == 0 {
            state = LstmState::zero(&model);
        }
    }
    assert!(model.all_finite());
}
