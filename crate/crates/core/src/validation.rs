//! Distant labels versus manual gold labels.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::analytics::Share;
use crate::lexicon::Polarity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GoldLabel {
    Positive,
    Neutral,
    Negative,
}

impl GoldLabel {
    pub const ALL: [GoldLabel; 3] = [GoldLabel::Positive, GoldLabel::Neutral, GoldLabel::Negative];

    fn column(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GoldLabel::Positive => "positive",
            GoldLabel::Neutral => "neutral",
            GoldLabel::Negative => "negative",
        }
    }
}

impl fmt::Display for GoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GoldLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(GoldLabel::Positive),
            "neutral" => Ok(GoldLabel::Neutral),
            "negative" => Ok(GoldLabel::Negative),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum LabelFileError {
    #[error("line {line}: {reason}: {text:?}")]
    Parse { line: usize, reason: String, text: String },
    #[error("line {line}: id {id} already labelled differently")]
    Conflict { line: usize, id: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn read_id_label_file<L: FromStr<Err = String> + PartialEq + Copy>(
    reader: impl BufRead,
) -> Result<BTreeMap<u64, L>, LabelFileError> {
    let mut out = BTreeMap::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| LabelFileError::Parse {
            line: line_no,
            reason,
            text: line.to_string(),
        };
        let (id, label) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected id<TAB>label".into()))?;
        let id: u64 = id.trim().parse().map_err(|_| parse_err("bad tweet id".into()))?;
        let label: L = label.trim().parse().map_err(parse_err)?;
        match out.insert(id, label) {
            Some(prev) if prev != label => return Err(LabelFileError::Conflict { line: line_no, id }),
            _ => {}
        }
    }
    Ok(out)
}

/// Reads a `id<TAB>positive|neutral|negative` gold file.
pub fn load_gold(reader: impl BufRead) -> Result<BTreeMap<u64, GoldLabel>, LabelFileError> {
    read_id_label_file(reader)
}

/// Reads a `id<TAB>positive|negative` labels file as written by the build.
pub fn load_labels(reader: impl BufRead) -> Result<BTreeMap<u64, Polarity>, LabelFileError> {
    read_id_label_file(reader)
}

/// Rows: distant positive / negative. Columns: manual positive / neutral /
/// negative. Gold items without a distant label only count towards
/// `coverage`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub cells: [[u64; 3]; 2],
    pub coverage: u64,
}

fn row(p: Polarity) -> usize {
    match p {
        Polarity::Positive => 0,
        Polarity::Negative => 1,
    }
}

impl ConfusionMatrix {
    pub fn get(&self, distant: Polarity, manual: GoldLabel) -> u64 {
        self.cells[row(distant)][manual.column()]
    }

    pub fn row_sum(&self, distant: Polarity) -> u64 {
        self.cells[row(distant)].iter().sum()
    }

    pub fn captured(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn write_csv(&self, w: impl Write) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["distant\\manual", "positive", "neutral", "negative"])?;
        for p in Polarity::ALL {
            let cells = self.cells[row(p)];
            out.write_record([
                p.as_str().to_string(),
                cells[0].to_string(),
                cells[1].to_string(),
                cells[2].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn confusion_matrix(distant: &BTreeMap<u64, Polarity>, gold: &BTreeMap<u64, GoldLabel>) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for (id, manual) in gold {
        match distant.get(id) {
            Some(&d) => m.cells[row(d)][manual.column()] += 1,
            None => m.coverage += 1,
        }
    }
    m
}

/// Share of each distant row that the gold labels contradict outright.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixSummary {
    pub matrix: ConfusionMatrix,
    pub positive_row_noise: Share,
    pub negative_row_noise: Share,
    /// Set when the row is empty and its noise fraction is reported as 0.
    pub positive_row_empty: bool,
    pub negative_row_empty: bool,
    pub captured: u64,
    pub coverage: u64,
}

pub fn matrix_summary(m: &ConfusionMatrix) -> MatrixSummary {
    let noise = |distant: Polarity, contradicting: GoldLabel| {
        let sum = m.row_sum(distant);
        if sum == 0 {
            (0.0, true)
        } else {
            (m.get(distant, contradicting) as f64 / sum as f64, false)
        }
    };
    let (pos, pos_empty) = noise(Polarity::Positive, GoldLabel::Negative);
    let (neg, neg_empty) = noise(Polarity::Negative, GoldLabel::Positive);
    MatrixSummary {
        matrix: *m,
        positive_row_noise: Share(pos),
        negative_row_noise: Share(neg),
        positive_row_empty: pos_empty,
        negative_row_empty: neg_empty,
        captured: m.captured(),
        coverage: m.coverage,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_gold_examples() {
        let gold = load_gold("1\tpositive\n2\tneutral\n3\tnegative\n".as_bytes()).unwrap();
        assert_eq!(gold.len(), 3);

        match load_gold("1\tpositive\n2\tmeh\n".as_bytes()) {
            Err(LabelFileError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }

        let gold = load_gold("7\tneutral\n7\tneutral\n".as_bytes()).unwrap();
        assert_eq!(gold.len(), 1);

        assert!(matches!(
            load_gold("7\tneutral\n7\tpositive\n".as_bytes()),
            Err(LabelFileError::Conflict { id: 7, .. })
        ));
        assert!(load_gold("x\tpositive\n".as_bytes()).is_err());
    }

    #[test]
    fn labels_file_rejects_neutral() {
        assert!(load_labels("1\tneutral\n".as_bytes()).is_err());
        assert_eq!(load_labels("1\tnegative\n".as_bytes()).unwrap()[&1], Polarity::Negative);
    }

    #[test]
    fn matrix_examples() {
        let distant = BTreeMap::from([(1, Polarity::Positive), (2, Polarity::Negative)]);
        let gold = BTreeMap::from([(1, GoldLabel::Positive), (2, GoldLabel::Neutral), (3, GoldLabel::Negative)]);
        let m = confusion_matrix(&distant, &gold);
        assert_eq!(m.get(Polarity::Positive, GoldLabel::Positive), 1);
        assert_eq!(m.get(Polarity::Negative, GoldLabel::Neutral), 1);
        assert_eq!(m.captured(), 2);
        assert_eq!(m.coverage, 1);

        let disjoint = BTreeMap::from([(10, Polarity::Positive)]);
        let m = confusion_matrix(&disjoint, &gold);
        assert_eq!(m.captured(), 0);
        assert_eq!(m.coverage, 3);
    }

    #[test]
    fn summary_examples() {
        let m = ConfusionMatrix {
            cells: [[510, 95, 19], [9, 27, 71]],
            coverage: 0,
        };
        let s = matrix_summary(&m);
        assert!((s.positive_row_noise.0 - 19.0 / 624.0).abs() < 1e-9);
        assert!((s.negative_row_noise.0 - 9.0 / 107.0).abs() < 1e-9);

        let diag = ConfusionMatrix {
            cells: [[5, 0, 0], [0, 0, 4]],
            coverage: 0,
        };
        let s = matrix_summary(&diag);
        assert_eq!((s.positive_row_noise.0, s.negative_row_noise.0), (0.0, 0.0));
        assert!(!s.positive_row_empty);

        let s = matrix_summary(&ConfusionMatrix::default());
        assert_eq!(s.positive_row_noise.0, 0.0);
        assert!(s.positive_row_empty && s.negative_row_empty);
    }

    #[test]
    fn csv_layout() {
        let m = ConfusionMatrix {
            cells: [[1, 2, 3], [4, 5, 6]],
            coverage: 9,
        };
        let mut out = Vec::new();
        m.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "distant\\manual,positive,neutral,negative\npositive,1,2,3\nnegative,4,5,6\n"
        );
    }
}
