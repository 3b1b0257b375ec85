use std::collections::BTreeMap;

use crate::data_model::table::{Column, Table};

/// Per categorical column: the ordered distinct tokens `v_1 … v_C`.
///
/// Token `v_c` is coded as `c / C`, so codes run from `1/C` up to exactly 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CategoryMap {
    columns: BTreeMap<usize, Vec<String>>,
}

impl CategoryMap {
    pub fn categories(&self, col: usize) -> Option<&[String]> {
        self.columns.get(&col).map(Vec::as_slice)
    }

    pub fn encoded_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.columns.keys().copied()
    }

    pub fn code(&self, col: usize, token: &str) -> Option<f64> {
        let cats = self.columns.get(&col)?;
        let pos = cats.binary_search_by(|c| c.as_str().cmp(token)).ok()?;
        Some(code_of(pos, cats.len()))
    }

    /// Token whose code is nearest to `value`.
    pub fn decode(&self, col: usize, value: f64) -> Option<&str> {
        let cats = self.columns.get(&col)?;
        let c = cats.len() as f64;
        let idx = ((value * c).round() as isize - 1).clamp(0, cats.len() as isize - 1);
        cats.get(idx as usize).map(String::as_str)
    }
}

fn code_of(pos: usize, n: usize) -> f64 {
    if pos + 1 == n {
        1.0
    } else {
        (pos + 1) as f64 / n as f64
    }
}

/// Replaces every categorical column with numeric codes `c / C`, tokens ordered
/// by byte-wise comparison. Missing cells stay missing.
pub fn encode_categoricals(t: &Table) -> (Table, CategoryMap) {
    let mut out = t.clone();
    let mut map = CategoryMap::default();
    for (j, col) in t.columns().iter().enumerate() {
        let Column::Categorical(cells) = col else {
            continue;
        };
        let mut cats: Vec<String> = cells.iter().flatten().cloned().collect();
        cats.sort_unstable();
        cats.dedup();
        let encoded = cells
            .iter()
            .map(|c| {
                c.as_ref().map(|tok| {
                    let pos = cats.binary_search(tok).expect("token collected above");
                    code_of(pos, cats.len())
                })
            })
            .collect();
        out.replace_column(j, Column::Numeric(encoded));
        map.columns.insert(j, cats);
    }
    (out, map)
}

/// Maps encoded columns back to tokens, each value to the nearest code.
pub fn decode_categoricals(t: &Table, map: &CategoryMap) -> Table {
    let mut out = t.clone();
    for col in map.encoded_columns() {
        let Column::Numeric(values) = t.column(col) else {
            continue;
        };
        let tokens = values
            .iter()
            .map(|v| v.and_then(|x| map.decode(col, x)).map(str::to_string))
            .collect();
        out.replace_column(col, Column::Categorical(tokens));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat_table(tokens: &[Option<&str>]) -> Table {
        Table::new(
            vec!["c".into()],
            vec![Column::Categorical(
                tokens.iter().map(|t| t.map(str::to_string)).collect(),
            )],
            None,
        )
        .unwrap()
    }

    #[test]
    fn three_levels_lexicographic() {
        let t = cat_table(&[Some("top"), Some("low"), None, Some("mid")]);
        let (e, map) = encode_categoricals(&t);
        let col = e.numeric(0).unwrap();
        assert_eq!(col[0], Some(1.0));
        assert_eq!(col[1], Some(1.0 / 3.0));
        assert_eq!(col[2], None);
        assert_eq!(col[3], Some(2.0 / 3.0));
        assert_eq!(map.categories(0).unwrap(), &["low", "mid", "top"]);
        assert_eq!(map.decode(0, 2.0 / 3.0), Some("mid"));
    }

    #[test]
    fn single_category_maps_to_one() {
        let t = cat_table(&[Some("a"), Some("a"), None]);
        let (e, _) = encode_categoricals(&t);
        assert_eq!(e.numeric(0).unwrap(), &[Some(1.0), Some(1.0), None]);
    }

    #[test]
    fn numeric_columns_pass_through() {
        let t = Table::from_numeric_columns(vec![("class", vec![Some(0.0), Some(1.0)])]).unwrap();
        let (e, map) = encode_categoricals(&t);
        assert_eq!(e, t);
        assert_eq!(map.encoded_columns().count(), 0);
    }
}
