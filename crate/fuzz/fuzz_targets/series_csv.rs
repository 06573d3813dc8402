#![no_main]

use infocost::series::SeriesTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(table) = SeriesTable::parse_csv(text) else {
        return;
    };
    let again = SeriesTable::parse_csv(&table.to_csv()).expect("written series parses");
    assert_eq!(again.columns(), table.columns());
    assert_eq!(again.rows(), table.rows());
});
