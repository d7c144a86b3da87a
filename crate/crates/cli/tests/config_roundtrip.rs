use std::path::PathBuf;

use deformed_laguerre::scalar::parse_rational;
use deformed_laguerre::Exact;
use dlag_cli::config::{Format, RunConfig, Task};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Exact> {
    (-10_000i64..10_000, prop::sample::select(vec![1i64, 2, 3, 4, 5, 7, 8, 10, 16, 100, 1000]))
        .prop_map(|(n, d)| parse_rational(&format!("{n}/{d}")).unwrap())
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        rational(),
        rational(),
        prop::collection::vec(rational(), 0..5),
        1usize..500,
        1u32..400,
        prop::collection::btree_set(prop::sample::select(Task::ALL.to_vec()), 0..7),
        prop::collection::btree_set(prop::sample::select(vec![Format::Csv, Format::Json]), 1..3),
        "[a-z][a-z0-9_/.-]{0,20}",
        any::<bool>(),
    )
        .prop_map(|(alpha, lambda, t_grid, n_max, digits, tasks, formats, out, strict)| RunConfig {
            alpha,
            lambda,
            t_grid,
            n_max,
            digits,
            tasks,
            out: PathBuf::from(out),
            formats,
            strict,
            corrupt_moment: None,
        })
}

proptest! {
    #[test]
    fn emit_then_parse_is_identity(cfg in config()) {
        let back = RunConfig::parse_text(&cfg.emit()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
