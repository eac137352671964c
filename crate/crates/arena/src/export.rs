//! Raw results as JSON lines (optionally gzip) plus tab-separated summaries.
//! Output bytes depend only on the inputs.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::{Compression, GzBuilder};

use crate::aggregate::WinRateTable;
use crate::tournament::MatchResult;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Json { path: PathBuf, line: usize, source: serde_json::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExportError + '_ {
    move |source| ExportError::Io { path: path.to_path_buf(), source }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exported {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub pairwise: PathBuf,
}

pub fn results_jsonl(results: &[MatchResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&serde_json::to_string(r).expect("result serializes"));
        out.push('\n');
    }
    out
}

pub fn summary_tsv(table: &WinRateTable) -> String {
    let mut out = String::from("agent\tgames\twins\tlosses\tdraws\tdecided\twin_rate\n");
    for (i, (_, name)) in table.agents.iter().enumerate() {
        let t = &table.totals[i];
        out.push_str(&format!(
            "{name}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            t.games(),
            t.wins,
            t.losses,
            t.draws,
            t.decided(),
            t.win_rate_text()
        ));
    }
    out
}

pub fn pairwise_tsv(table: &WinRateTable) -> String {
    let mut out = String::from("agent\topponent\tgames\twins\tlosses\tdraws\twin_rate\n");
    for (i, (_, name)) in table.agents.iter().enumerate() {
        for (j, (_, other)) in table.agents.iter().enumerate() {
            let c = &table.pairwise[i][j];
            if i == j || c.games() == 0 {
                continue;
            }
            out.push_str(&format!(
                "{name}\t{other}\t{}\t{}\t{}\t{}\t{}\n",
                c.games(),
                c.wins,
                c.losses,
                c.draws,
                c.win_rate_text()
            ));
        }
    }
    out
}

/// Writes `results.jsonl` (or `results.jsonl.gz`), `summary.tsv` and
/// `pairwise.tsv` into `dir`.
pub fn export(dir: &Path, results: &[MatchResult], table: &WinRateTable, compress: bool) -> Result<Exported, ExportError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let raw = results_jsonl(results);
    let results_path = dir.join(if compress { "results.jsonl.gz" } else { "results.jsonl" });
    let file = File::create(&results_path).map_err(io_err(&results_path))?;
    if compress {
        let mut gz = GzBuilder::new().mtime(0).write(file, Compression::default());
        gz.write_all(raw.as_bytes()).map_err(io_err(&results_path))?;
        gz.finish().map_err(io_err(&results_path))?;
    } else {
        let mut file = file;
        file.write_all(raw.as_bytes()).map_err(io_err(&results_path))?;
    }
    let summary = dir.join("summary.tsv");
    std::fs::write(&summary, summary_tsv(table)).map_err(io_err(&summary))?;
    let pairwise = dir.join("pairwise.tsv");
    std::fs::write(&pairwise, pairwise_tsv(table)).map_err(io_err(&pairwise))?;
    Ok(Exported { results: results_path, summary, pairwise })
}

/// Reads raw results back; `.gz` files are decompressed.
pub fn read_results(path: &Path) -> Result<Vec<MatchResult>, ExportError> {
    let file = File::open(path).map_err(io_err(path))?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    let mut out = Vec::new();
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|source| ExportError::Json {
            path: path.to_path_buf(),
            line: n + 1,
            source,
        })?;
        out.push(r);
    }
    Ok(out)
}
