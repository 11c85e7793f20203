//! Plain-text trace logs for offline re-estimation.
//!
//! One trace per line, three tab-separated fields: the restricted profile
//! index with components joined by `:`, the observed chance outcomes joined
//! by `,` (possibly empty), and the payoff vector joined by `,`. Blank lines
//! and lines starting with `#` are skipped.
//!
//! ```text
//! 0:1	A,C	3.25,-1.5
//! ```

use std::io::BufRead;

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub profile: Vec<usize>,
    pub labels: Vec<String>,
    pub payoffs: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceLogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TraceRecord {
    pub fn to_line(&self) -> String {
        let p: Vec<String> = self.profile.iter().map(usize::to_string).collect();
        let u: Vec<String> = self.payoffs.iter().map(f64::to_string).collect();
        format!("{}\t{}\t{}", p.join(":"), self.labels.join(","), u.join(","))
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let fields: Vec<&str> = s.split('\t').collect();
        if fields.len() != 3 {
            return Err(format!("expected 3 tab-separated fields, found {}", fields.len()));
        }
        let profile = fields[0]
            .split(':')
            .map(|x| x.trim().parse::<usize>().map_err(|_| format!("bad profile index {x:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        let labels = if fields[1].trim().is_empty() {
            Vec::new()
        } else {
            fields[1].split(',').map(|x| x.trim().to_string()).collect()
        };
        let payoffs = fields[2]
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad payoff {x:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TraceRecord { profile, labels, payoffs })
    }
}

pub fn read_trace_log<R: BufRead>(reader: R) -> Result<Vec<TraceRecord>, TraceLogError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim_end_matches(['\r', '\n']);
        if t.trim().is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(TraceRecord::parse(t).map_err(|message| TraceLogError::Parse { line: i + 1, message })?);
    }
    Ok(out)
}
