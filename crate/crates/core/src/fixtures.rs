//! Small hand-made tables used by the guide, doc examples and tests.

use crate::data_model::{Column, Table};

/// Six companies, six balance-sheet features and a bankruptcy flag, with four
/// missing cells. `total_liabilities` of the sixth company (row 5) is the
/// running example of a cell to impute.
pub fn toy_balance_sheet() -> Table {
    const NAMES: [&str; 7] = [
        "net_profit",
        "total_liabilities",
        "working_capital",
        "current_assets",
        "retained_earnings",
        "ebit",
        "class",
    ];
    let rows: [[Option<f64>; 7]; 6] = [
        [
            Some(12.0),
            Some(150.0),
            Some(100.0),
            Some(140.0),
            Some(30.0),
            Some(20.0),
            Some(0.0),
        ],
        [
            Some(-4.0),
            Some(210.0),
            Some(150.0),
            Some(200.0),
            None,
            Some(15.0),
            Some(0.0),
        ],
        [
            Some(9.0),
            Some(95.0),
            Some(60.0),
            Some(90.0),
            Some(10.0),
            Some(2.0),
            Some(1.0),
        ],
        [
            Some(2.0),
            Some(260.0),
            Some(180.0),
            None,
            Some(55.0),
            Some(31.0),
            Some(0.0),
        ],
        [
            Some(7.0),
            Some(120.0),
            Some(85.0),
            Some(110.0),
            Some(12.0),
            None,
            Some(1.0),
        ],
        [
            Some(15.0),
            None,
            Some(130.0),
            Some(170.0),
            Some(40.0),
            Some(25.0),
            Some(0.0),
        ],
    ];
    let columns = (0..NAMES.len())
        .map(|j| Column::Numeric(rows.iter().map(|r| r[j]).collect()))
        .collect();
    Table::new(
        NAMES.iter().map(|s| s.to_string()).collect(),
        columns,
        Some(6),
    )
    .expect("fixture is well formed")
}
