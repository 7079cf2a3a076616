//! `id,score,label` CSV files. Labels are `1`, `0` or `NA`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use prevalence_core::{Label, ScoredItem};

const COLUMNS: [&str; 3] = ["id", "score", "label"];

pub fn read_dataset(path: &Path) -> Result<Vec<ScoredItem>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_dataset(file).with_context(|| format!("in {}", path.display()))
}

pub fn parse_dataset<R: std::io::Read>(reader: R) -> Result<Vec<ScoredItem>> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers().context("missing header row")?.clone();
    let mut index = [0usize; 3];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("missing column `{name}` in header"))?;
    }
    let [id_col, score_col, label_col] = index;

    let mut items = Vec::new();
    for record in csv.records() {
        let record = record.context("malformed row")?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |col: usize, name: &str| {
            record
                .get(col)
                .ok_or_else(|| anyhow!("line {line}: missing `{name}` field"))
        };
        let id = field(id_col, "id")?;
        let score: f64 = field(score_col, "score")?
            .parse()
            .map_err(|e| anyhow!("line {line}: bad score: {e}"))?;
        let label = match field(label_col, "label")? {
            "1" => Some(Label::Positive),
            "0" => Some(Label::Negative),
            "NA" | "" => None,
            other => bail!("line {line}: label must be 1, 0 or NA, got `{other}`"),
        };
        items.push(ScoredItem::new(id, score, label).map_err(|e| anyhow!("line {line}: {e}"))?);
    }
    Ok(items)
}

pub fn write_dataset(path: &Path, items: &[ScoredItem]) -> Result<()> {
    let mut file =
        File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    file.write_all(format_dataset(items).as_bytes())?;
    Ok(())
}

/// Scores use the shortest decimal form that parses back to the same `f64`.
pub fn format_dataset(items: &[ScoredItem]) -> String {
    let mut out = String::from("id,score,label\n");
    for item in items {
        let label = match item.label {
            Some(Label::Positive) => "1",
            Some(Label::Negative) => "0",
            None => "NA",
        };
        out.push_str(&format!("{},{:?},{}\n", item.id, item.score, label));
    }
    out
}
