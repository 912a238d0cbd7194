use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::TabularDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const PROVENANCE_PREFIX: &str = "# provenance: ";

/// JSON sidecar naming the column roles of a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub label: String,
    pub sensitive: String,
    pub advantaged_value: Value,
    pub disadvantaged_value: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_label: Option<Value>,
}

impl DatasetSchema {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Schema matching a dataset written by [`write_csv`].
    pub fn for_dataset<T: Scalar>(ds: &TabularDataset<T>) -> Self {
        let (adv, dis) = ds.group_values();
        DatasetSchema {
            label: ds.label_name().to_string(),
            sensitive: ds.sensitive_name().to_string(),
            advantaged_value: number_value(adv.to_f64_lossy()),
            disadvantaged_value: number_value(dis.to_f64_lossy()),
            positive_label: Some(Value::from(1)),
        }
    }
}

fn number_value(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        Value::from(v as i64)
    } else {
        Value::from(v)
    }
}

fn raw_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn raw_matches(cell: &str, raw: &str) -> bool {
    let (a, b) = (cell.trim(), raw.trim());
    if a == b {
        return true;
    }
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// A CSV table as text cells, before any numeric interpretation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Category lists (code = position) for columns replaced by [`label_encode`].
    pub encodings: BTreeMap<String, Vec<String>>,
    pub provenance: Option<String>,
}

impl RawTable {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let provenance = text.lines().rev().find_map(|l| l.strip_prefix(PROVENANCE_PREFIX)).map(str::to_string);
        let mut reader =
            csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut seen = HashSet::new();
        for h in &headers {
            if !seen.insert(h.as_str()) {
                return Err(Error::Dataset(format!("duplicate header `{h}`")));
            }
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| match e.kind() {
                csv::ErrorKind::UnequalLengths { .. } => Error::Dataset(format!("ragged row {}", i + 1)),
                _ => Error::Csv(e),
            })?;
            rows.push(record.iter().map(str::to_string).collect());
        }
        Ok(RawTable { headers, rows, encodings: BTreeMap::new(), provenance })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, index: usize) -> impl Iterator<Item = &str> {
        self.rows.iter().map(move |r| r[index].as_str())
    }
}

/// Replaces every non-numeric column by integer codes assigned in order of
/// first appearance. Numeric columns are left untouched. The category list
/// for each encoded column is recorded in `encodings`.
pub fn label_encode(mut table: RawTable) -> RawTable {
    for c in 0..table.headers.len() {
        if table.rows.iter().all(|r| parse_number(&r[c]).is_some()) {
            continue;
        }
        let mut categories: Vec<String> = Vec::new();
        let mut codes: BTreeMap<String, usize> = BTreeMap::new();
        for row in &mut table.rows {
            let cell = row[c].trim().to_string();
            let code = *codes.entry(cell.clone()).or_insert_with(|| {
                categories.push(cell);
                categories.len() - 1
            });
            row[c] = code.to_string();
        }
        table.encodings.insert(table.headers[c].clone(), categories);
    }
    table
}

/// Loads a CSV file with the given column roles. Categorical columns are
/// label-encoded; every non-label column becomes a feature, in header order.
pub fn load_csv<T: Scalar>(path: impl AsRef<Path>, schema: &DatasetSchema) -> Result<TabularDataset<T>> {
    let path = path.as_ref();
    let raw = RawTable::read(path)?;
    from_raw(raw, schema, &path.display().to_string())
}

fn from_raw<T: Scalar>(raw: RawTable, schema: &DatasetSchema, source: &str) -> Result<TabularDataset<T>> {
    let label_col = raw.column_index(&schema.label)?;
    let sens_col = raw.column_index(&schema.sensitive)?;
    if label_col == sens_col {
        return Err(Error::Config("label and sensitive columns coincide".into()));
    }
    let labels = encode_labels(&raw, label_col, schema)?;

    let adv_raw = raw_text(&schema.advantaged_value);
    let dis_raw = raw_text(&schema.disadvantaged_value);
    let adv_row = raw.column(sens_col).position(|c| raw_matches(c, &adv_raw));
    let dis_row = raw.column(sens_col).position(|c| raw_matches(c, &dis_raw));
    let (adv_row, dis_row) = match (adv_row, dis_row) {
        (Some(a), Some(d)) => (a, d),
        (None, _) => return Err(Error::EmptyGroup(format!("{}={adv_raw}", schema.sensitive))),
        (_, None) => return Err(Error::EmptyGroup(format!("{}={dis_raw}", schema.sensitive))),
    };

    let encoded = label_encode(raw);
    let feature_cols: Vec<usize> = (0..encoded.headers.len()).filter(|&c| c != label_col).collect();
    let m = encoded.rows.len();
    let mut features = Array2::<T>::zeros((m, feature_cols.len()));
    for (i, row) in encoded.rows.iter().enumerate() {
        for (j, &c) in feature_cols.iter().enumerate() {
            let v = parse_number(&row[c]).ok_or_else(|| {
                Error::Dataset(format!(
                    "row {}: column `{}` value `{}` is not numeric",
                    i + 1,
                    encoded.headers[c],
                    row[c]
                ))
            })?;
            features[[i, j]] = T::of(v);
        }
    }
    let sensitive_index = feature_cols.iter().position(|&c| c == sens_col).expect("sensitive is a feature column");
    let group_values = (features[[adv_row, sensitive_index]], features[[dis_row, sensitive_index]]);
    let names = feature_cols.iter().map(|&c| encoded.headers[c].clone()).collect();

    let mut provenance = encoded.provenance.clone().unwrap_or_else(|| format!("csv:{source}"));
    for (col, cats) in &encoded.encodings {
        if col == &schema.label {
            continue;
        }
        let mapping: Vec<String> = cats.iter().enumerate().map(|(i, c)| format!("{c}={i}")).collect();
        provenance.push_str(&format!("; label-encoded {col}{{{}}}", mapping.join(",")));
    }
    TabularDataset::new(features, names, schema.label.clone(), labels, sensitive_index, group_values, provenance)
}

fn encode_labels(raw: &RawTable, col: usize, schema: &DatasetSchema) -> Result<Vec<u8>> {
    let name = &raw.headers[col];
    match &schema.positive_label {
        Some(pos) => {
            let pos = raw_text(pos);
            let mut distinct: Vec<&str> = Vec::new();
            for cell in raw.column(col) {
                if !distinct.iter().any(|d| raw_matches(d, cell)) {
                    distinct.push(cell);
                }
            }
            if distinct.len() > 2 {
                return Err(Error::NonBinaryLabel {
                    column: name.clone(),
                    detail: format!("{} distinct values", distinct.len()),
                });
            }
            Ok(raw.column(col).map(|c| u8::from(raw_matches(c, &pos))).collect())
        }
        None => raw
            .column(col)
            .map(|c| match parse_number(c) {
                Some(0.0) => Ok(0),
                Some(1.0) => Ok(1),
                _ => Err(Error::NonBinaryLabel { column: name.clone(), detail: format!("value `{c}`") }),
            })
            .collect(),
    }
}

/// Writes features then the label column, followed by a provenance comment.
pub fn write_csv<T: Scalar>(ds: &TabularDataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(ds.label_name());
    writer.write_record(&header)?;
    for (row, &label) in ds.features().rows().into_iter().zip(ds.labels()) {
        let mut cells: Vec<String> = row.iter().map(|v| format!("{}", v.to_f64_lossy())).collect();
        cells.push(label.to_string());
        writer.write_record(&cells)?;
    }
    let mut bytes = writer.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    let provenance = ds.provenance().replace(['\n', '\r'], " ");
    bytes.extend_from_slice(format!("{PROVENANCE_PREFIX}{provenance}\n").as_bytes());
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::fixtures;

    fn schema(label: &str, sensitive: &str) -> DatasetSchema {
        DatasetSchema {
            label: label.into(),
            sensitive: sensitive.into(),
            advantaged_value: Value::from(1),
            disadvantaged_value: Value::from(0),
            positive_label: None,
        }
    }

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn loads_four_row_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "d.csv", "a,b,sex,label\n1,2,1,1\n2,3,0,0\n3,4,1,0\n4,5,0,1\n");
        let ds: TabularDataset<f64> = load_csv(&p, &schema("label", "sex")).unwrap();
        assert_eq!(ds.n_features(), 3);
        assert_eq!(ds.n_rows(), 4);
        assert_eq!(ds.sensitive_index(), 2);
        assert_eq!(ds.labels(), &[1, 0, 0, 1]);
    }

    #[test]
    fn non_binary_label_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "d.csv", "a,sex,label\n1,1,1\n2,0,2\n");
        let err = load_csv::<f64>(&p, &schema("label", "sex")).unwrap_err();
        assert!(matches!(err, Error::NonBinaryLabel { .. }), "{err}");

        let p = write(&dir, "e.csv", "a,sex,label\n1,1,yes\n2,0,no\n3,0,2\n");
        let mut s = schema("label", "sex");
        s.positive_label = Some(Value::from("yes"));
        assert!(matches!(load_csv::<f64>(&p, &s), Err(Error::NonBinaryLabel { .. })));
    }

    #[test]
    fn duplicate_headers_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "d.csv", "a,a,sex,label\n1,2,1,1\n2,3,0,0\n");
        assert!(matches!(load_csv::<f64>(&p, &schema("label", "sex")), Err(Error::Dataset(_))));
    }

    #[test]
    fn missing_file_unknown_column_and_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.csv");
        assert!(matches!(load_csv::<f64>(&missing, &schema("label", "sex")), Err(Error::Io { .. })));

        let p = write(&dir, "d.csv", "a,sex,label\n1,1,1\n2,0,0\n");
        assert!(matches!(load_csv::<f64>(&p, &schema("label", "race")), Err(Error::UnknownColumn(_))));

        let p = write(&dir, "r.csv", "a,sex,label\n1,1,1\n2,0\n");
        assert!(matches!(load_csv::<f64>(&p, &schema("label", "sex")), Err(Error::Dataset(_))));
    }

    #[test]
    fn label_encoding_uses_first_appearance() {
        let table = RawTable::parse("color,k,n\nred,b,1.5\nblue,a,2\nred,b,3\nblue,a,4\n").unwrap();
        let enc = label_encode(table);
        let color: Vec<&str> = enc.column(0).collect();
        assert_eq!(color, vec!["0", "1", "0", "1"]);
        let k: Vec<&str> = enc.column(1).collect();
        assert_eq!(k, vec!["0", "1", "0", "1"]);
        let n: Vec<&str> = enc.column(2).collect();
        assert_eq!(n, vec!["1.5", "2", "3", "4"]);
        assert_eq!(enc.encodings["color"], vec!["red", "blue"]);
        assert!(!enc.encodings.contains_key("n"));
    }

    #[test]
    fn all_numeric_table_is_unchanged_by_encoding() {
        let table = RawTable::parse("a,b\n1,2\n3,4\n").unwrap();
        assert_eq!(label_encode(table.clone()), table);
    }

    #[test]
    fn categorical_sensitive_and_label() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "d.csv", "age,sex,income\n30,Male,>50K\n40,Female,<=50K\n50,Male,<=50K\n");
        let s = DatasetSchema {
            label: "income".into(),
            sensitive: "sex".into(),
            advantaged_value: Value::from("Male"),
            disadvantaged_value: Value::from("Female"),
            positive_label: Some(Value::from(">50K")),
        };
        let ds: TabularDataset<f64> = load_csv(&p, &s).unwrap();
        assert_eq!(ds.labels(), &[1, 0, 0]);
        assert_eq!(ds.group_values(), (0.0, 1.0));
        assert_eq!(ds.group_size(crate::data::Group::Advantaged), 2);
        assert!(ds.provenance().contains("sex{Male=0,Female=1}"));
    }

    #[test]
    fn write_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let ds = fixtures::toy();
        let p = dir.path().join("toy.csv");
        write_csv(&ds, &p).unwrap();
        let back: TabularDataset<f64> = load_csv(&p, &DatasetSchema::for_dataset(&ds)).unwrap();
        assert_eq!(back, ds);
    }
}
