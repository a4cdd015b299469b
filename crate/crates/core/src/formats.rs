//! CSV and JSON readers and writers for the command-line file formats.
//!
//! Inputs:
//! * probabilities: `edge_id,p`
//! * covariates: `edge_id,<name>,<name>,...`
//! * expert point estimates: `edge_id,p`
//! * expert draws: `draw_id,edge_id,p`
//!
//! Outputs use [`format_num`] for every number so files are byte-stable.

use std::io::{Read, Write};

use serde_json::{json, Value};

use crate::blockage::{BlockageModel, CovariateMatrix};
use crate::elicit::{BetaPrior, ProbabilitySummary};
use crate::error::{Error, Result};
use crate::format::{format_num, round_num};
use crate::traveler::TravelTimeDistribution;

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

fn expect_header(found: &csv::StringRecord, expected: &[&str], what: &str) -> Result<()> {
    let found: Vec<&str> = found.iter().collect();
    if found != expected {
        return Err(Error::Parse(format!(
            "{what} header must be {:?}, found {:?}",
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

fn number(field: &str, line: u64, what: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what} line {line}: {field:?} is not a number")))
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Reads `edge_id,p` rows.
pub fn read_edge_probabilities<R: Read>(input: R, what: &str) -> Result<(Vec<String>, Vec<f64>)> {
    let mut r = reader(input);
    expect_header(r.headers()?, &["edge_id", "p"], what)?;
    let mut ids = Vec::new();
    let mut probs = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = line_of(&record);
        ids.push(record[0].to_string());
        probs.push(number(&record[1], line, what)?);
    }
    Ok((ids, probs))
}

/// Reads a probabilities file into a blockage model.
pub fn read_probabilities<R: Read>(input: R) -> Result<BlockageModel> {
    let (ids, probs) = read_edge_probabilities(input, "probabilities")?;
    BlockageModel::new(ids, probs)
}

/// Reads `edge_id,<covariate names...>` rows.
pub fn read_covariates<R: Read>(input: R) -> Result<CovariateMatrix> {
    let mut r = reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("edge_id") || header.len() < 2 {
        return Err(Error::Parse(
            "covariates header must be edge_id followed by at least one covariate name".into(),
        ));
    }
    let names: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = line_of(&record);
        ids.push(record[0].to_string());
        rows.push(
            record
                .iter()
                .skip(1)
                .map(|f| number(f, line, "covariates"))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    CovariateMatrix::new(ids, names, rows)
}

/// One expert draw: probabilities in the order of the covariate rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertDraw {
    pub draw_id: String,
    pub probabilities: Vec<f64>,
}

/// Reorders `edge_id,p` pairs to match `row_ids`, requiring an exact match
/// of the two edge sets.
pub fn align_to_rows(row_ids: &[String], ids: &[String], probs: &[f64], what: &str) -> Result<Vec<f64>> {
    let mut aligned = vec![None; row_ids.len()];
    for (id, &p) in ids.iter().zip(probs) {
        let i = row_ids
            .iter()
            .position(|r| r == id)
            .ok_or_else(|| Error::Validation(format!("{what}: edge {id:?} has no covariate row")))?;
        if aligned[i].replace(p).is_some() {
            return Err(Error::Validation(format!("{what}: edge {id:?} appears twice")));
        }
    }
    aligned
        .into_iter()
        .zip(row_ids)
        .map(|(p, id)| p.ok_or_else(|| Error::Validation(format!("{what}: no value for edge {id:?}"))))
        .collect()
}

/// Reads point estimates aligned to `row_ids`.
pub fn read_expert_points<R: Read>(input: R, row_ids: &[String]) -> Result<Vec<f64>> {
    let (ids, probs) = read_edge_probabilities(input, "experts")?;
    align_to_rows(row_ids, &ids, &probs, "experts")
}

/// Reads `draw_id,edge_id,p` rows, grouping by draw in order of first
/// appearance, each draw aligned to `row_ids`.
pub fn read_expert_draws<R: Read>(input: R, row_ids: &[String]) -> Result<Vec<ExpertDraw>> {
    let mut r = reader(input);
    expect_header(r.headers()?, &["draw_id", "edge_id", "p"], "draws")?;
    let mut groups: Vec<(String, Vec<String>, Vec<f64>)> = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = line_of(&record);
        let draw = &record[0];
        let p = number(&record[2], line, "draws")?;
        let group = match groups.iter().position(|g| g.0 == draw) {
            Some(i) => &mut groups[i],
            None => {
                groups.push((draw.to_string(), Vec::new(), Vec::new()));
                groups.last_mut().expect("just pushed")
            }
        };
        group.1.push(record[1].to_string());
        group.2.push(p);
    }
    if groups.is_empty() {
        return Err(Error::Validation("draws file has no rows".into()));
    }
    groups
        .into_iter()
        .map(|(draw_id, ids, probs)| {
            let what = format!("draw {draw_id:?}");
            Ok(ExpertDraw {
                probabilities: align_to_rows(row_ids, &ids, &probs, &what)?,
                draw_id,
            })
        })
        .collect()
}

/// Writes `replicate,travel_time,failed`.
pub fn write_replicates<W: Write>(dist: &TravelTimeDistribution, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replicate", "travel_time", "failed"])?;
    for (r, (&t, &f)) in dist.times().iter().zip(dist.failed()).enumerate() {
        w.write_record([r.to_string(), format_num(t), f.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `edge_id,mean,q05,q50,q95`.
pub fn write_pushforward<W: Write>(rows: &[ProbabilitySummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["edge_id", "mean", "q05", "q50", "q95"])?;
    for row in rows {
        w.write_record([
            row.edge_id.clone(),
            format_num(row.mean),
            format_num(row.q05),
            format_num(row.q50),
            format_num(row.q95),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `draw,<column names...>` rows of coefficient draws.
pub fn write_beta_draws<W: Write>(columns: &[String], draws: &[Vec<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["draw".to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header)?;
    for (i, d) in draws.iter().enumerate() {
        let mut record = vec![i.to_string()];
        record.extend(d.iter().map(|&x| format_num(x)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON number rounded to twelve significant digits; non-finite becomes null.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        json!(round_num(x))
    } else {
        Value::Null
    }
}

/// The prior as a JSON object: `mean`, `covariance` (rows), `sigma2`, `df`,
/// `clamped_edges`, plus the covariate names and the degenerate-fit flag.
pub fn prior_json(prior: &BetaPrior, columns: &[String], clamped_edges: &[String]) -> Value {
    let cov = prior.covariance();
    let k = prior.dimension();
    json!({
        "columns": columns,
        "mean": prior.mean().iter().map(|&x| json_num(x)).collect::<Vec<_>>(),
        "covariance": (0..k)
            .map(|i| (0..k).map(|j| json_num(cov[(i, j)])).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "sigma2": json_num(prior.sigma2()),
        "df": prior.df(),
        "degenerate_fit": prior.is_degenerate(),
        "clamped_edges": clamped_edges,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities_round_trip_through_model() {
        let model = read_probabilities("edge_id,p\nd, 0.3\na,0\n".as_bytes()).unwrap();
        assert_eq!(model.probability("d"), Some(0.3));
        assert!(read_probabilities("edge,p\n".as_bytes()).is_err());
        assert!(matches!(
            read_probabilities("edge_id,p\nd,high\n".as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn covariates_keep_names_and_rows() {
        let z = read_covariates("edge_id,one,width\nx,1,2.5\ny,1,0\n".as_bytes()).unwrap();
        assert_eq!(z.column_names(), ["one", "width"]);
        assert_eq!(z.row_ids(), ["x", "y"]);
        assert_eq!(z.get(0, 1), 2.5);
    }

    #[test]
    fn draws_group_and_align() {
        let rows = vec!["x".to_string(), "y".to_string()];
        let text = "draw_id,edge_id,p\n2,y,0.4\n2,x,0.1\n1,x,0.2\n1,y,0.3\n";
        let draws = read_expert_draws(text.as_bytes(), &rows).unwrap();
        assert_eq!(draws[0].draw_id, "2");
        assert_eq!(draws[0].probabilities, [0.1, 0.4]);
        assert_eq!(draws[1].probabilities, [0.2, 0.3]);
        let partial = "draw_id,edge_id,p\n1,x,0.2\n";
        assert!(matches!(read_expert_draws(partial.as_bytes(), &rows), Err(Error::Validation(_))));
    }

    #[test]
    fn replicate_csv() {
        let dist = TravelTimeDistribution::from_replicates(vec![2.0, 10.5], vec![false, true]).unwrap();
        let mut out = Vec::new();
        write_replicates(&dist, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "replicate,travel_time,failed\n0,2,false\n1,10.5,true\n"
        );
    }

    #[test]
    fn json_numbers_are_rounded() {
        assert_eq!(json_num(0.1 + 0.2), json!(0.3));
        assert_eq!(json_num(f64::NAN), Value::Null);
    }
}
