//! Wisconsin breast cancer table: `id, 9 attributes (1–10 or '?'), class`
//! with class code 2 (benign) or 4 (malignant).

use std::path::Path;

use gvm_core::Dataset;

use crate::error::{Error, Result};

pub const ATTRIBUTES: usize = 9;
pub const TRAIN_ROWS: usize = 466;
pub const FILE_NAME: &str = "breast-cancer-wisconsin.data";

/// One parsed row; `None` marks a missing attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: String,
    pub attributes: [Option<u8>; ATTRIBUTES],
    /// 0 benign, 1 malignant.
    pub class: usize,
}

pub fn parse_rows(text: &str) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("row {}: {e}", line + 1)))?;
        if record.len() != ATTRIBUTES + 2 {
            return Err(Error::Data(format!(
                "row {}: expected {} fields, found {}",
                line + 1,
                ATTRIBUTES + 2,
                record.len()
            )));
        }
        let mut attributes = [None; ATTRIBUTES];
        for (a, field) in attributes.iter_mut().zip(record.iter().skip(1)) {
            if field == "?" {
                continue;
            }
            let v: u8 = field.parse().map_err(|_| Error::Data(format!("row {}: bad attribute {field:?}", line + 1)))?;
            if !(1..=10).contains(&v) {
                return Err(Error::Data(format!("row {}: attribute {v} outside 1..=10", line + 1)));
            }
            *a = Some(v);
        }
        let class = match &record[ATTRIBUTES + 1] {
            "2" => 0,
            "4" => 1,
            other => return Err(Error::Data(format!("row {}: unknown class code {other:?}", line + 1))),
        };
        rows.push(Row { id: record[0].to_string(), attributes, class });
    }
    Ok(rows)
}

/// Most frequent value per attribute over `rows`; ties go to the smaller value.
pub fn column_modes(rows: &[Row]) -> [u8; ATTRIBUTES] {
    let mut modes = [1u8; ATTRIBUTES];
    for (j, mode) in modes.iter_mut().enumerate() {
        let mut counts = [0usize; 11];
        for r in rows {
            if let Some(v) = r.attributes[j] {
                counts[v as usize] += 1;
            }
        }
        let best = (1..=10).max_by_key(|&v| (counts[v], std::cmp::Reverse(v))).unwrap_or(1);
        *mode = best as u8;
    }
    modes
}

fn to_dataset(rows: &[Row], modes: &[u8; ATTRIBUTES], name: &str) -> Result<Dataset> {
    let mut inputs = Vec::with_capacity(rows.len() * ATTRIBUTES);
    for r in rows {
        for (a, m) in r.attributes.iter().zip(modes) {
            inputs.push(a.unwrap_or(*m) as f64);
        }
    }
    let labels = rows.iter().map(|r| r.class).collect();
    Ok(Dataset::classification(ATTRIBUTES, inputs, 2, labels)?.with_name(name))
}

/// First `train_rows` rows train, the rest test. Missing values take the
/// training-split column mode.
pub fn split(rows: &[Row], train_rows: usize) -> Result<(Dataset, Dataset)> {
    if train_rows == 0 || train_rows >= rows.len() {
        return Err(Error::Data(format!("cannot split {} rows with {train_rows} for training", rows.len())));
    }
    let (train, test) = rows.split_at(train_rows);
    let modes = column_modes(train);
    Ok((to_dataset(train, &modes, "wisconsin train")?, to_dataset(test, &modes, "wisconsin test")?))
}

/// Training rows for a table of `total` rows: `⌈2·total/3⌉`.
pub fn default_train_rows(total: usize) -> usize {
    (2 * total).div_ceil(3)
}

pub fn load_wisconsin(path: &Path) -> Result<(Dataset, Dataset)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = parse_rows(&text)?;
    split(&rows, default_train_rows(rows.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
1000025,5,1,1,1,2,1,3,1,1,2
1002945,5,4,4,5,7,10,3,2,1,2
1015425,3,1,1,1,2,2,3,1,1,2
1016277,6,8,8,1,3,4,3,7,1,2
1017023,4,1,1,3,2,1,3,1,1,4
1057013,8,4,5,1,2,?,7,3,1,4
";

    #[test]
    fn parses_rows() {
        let rows = parse_rows(SAMPLE).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].class, 0);
        assert_eq!(rows[4].class, 1);
        assert_eq!(rows[5].attributes[5], None);
        assert_eq!(rows[1].attributes[5], Some(10));
    }

    #[test]
    fn imputes_with_training_mode() {
        let rows = parse_rows(SAMPLE).unwrap();
        let (train, test) = split(&rows, 4).unwrap();
        assert_eq!((train.len(), test.len()), (4, 2));
        // Column 6 over the first four rows: 1, 10, 2, 4 all tie, so the smallest wins.
        assert_eq!(test.input(1)[5], 1.0);
        assert_eq!(test.labels().unwrap(), &[1, 1]);
        for x in train.iter_inputs().chain(test.iter_inputs()) {
            assert!(x.iter().all(|&v| (1.0..=10.0).contains(&v)));
        }
    }

    #[test]
    fn split_arithmetic() {
        assert_eq!(default_train_rows(699), TRAIN_ROWS);
        assert_eq!(default_train_rows(6), 4);
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(parse_rows("1,2,3\n").is_err());
        assert!(parse_rows("1,5,1,1,1,2,1,3,1,1,3\n").is_err());
        assert!(parse_rows("1,5,1,1,1,2,1,3,1,x,2\n").is_err());
        assert!(parse_rows("1,5,1,1,1,2,1,3,1,11,2\n").is_err());
        let rows = parse_rows(SAMPLE).unwrap();
        assert!(split(&rows, 6).is_err());
    }
}
