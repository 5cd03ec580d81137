#![no_main]

use libfuzzer_sys::fuzz_target;
use quizsim::protocol::{lookup_chi_rows, parse_table_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rows) = parse_table_csv(text) else {
        return;
    };
    // accepted tables are non-empty, sorted by (F, id) and in range
    assert!(!rows.is_empty());
    for w in rows.windows(2) {
        assert!((w[0].f, w[0].target_id) < (w[1].f, w[1].target_id));
    }
    // an exact hit resolves to the smallest id sharing that F
    for row in &rows {
        let first = rows.iter().find(|r| r.f == row.f).unwrap();
        assert_eq!(lookup_chi_rows(&rows, row.f), Some(first.chi_opt));
    }
});
