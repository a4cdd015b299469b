//! Edge importance scores: Canadian betweenness and the geodesic baseline.

mod canadian;
mod geodesic;

use std::io::Write;

use crate::error::Result;
use crate::format::format_num;

pub use canadian::{
    canadian_betweenness, canadian_betweenness_all, CbcConfig, CbcMethod, CbcMode, CbcResult,
    FailureHandling,
};
pub use geodesic::geodesic_edge_betweenness;

/// Per-edge scores for one analysis, ordered by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityTable {
    pub source: Option<String>,
    pub sink: Option<String>,
    pub config: Option<CbcConfig>,
    pub rows: Vec<CentralityRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityRow {
    pub edge_id: String,
    pub cbc: Option<CbcResult>,
    pub geodesic: Option<f64>,
}

impl CentralityTable {
    /// Fills the geodesic column from `baseline`, matching rows by edge id.
    pub fn attach_geodesic(&mut self, baseline: &CentralityTable) {
        for row in &mut self.rows {
            row.geodesic = baseline
                .rows
                .iter()
                .find(|b| b.edge_id == row.edge_id)
                .and_then(|b| b.geodesic);
        }
    }

    pub fn row(&self, edge_id: &str) -> Option<&CentralityRow> {
        self.rows.iter().find(|r| r.edge_id == edge_id)
    }

    /// Writes the table as CSV. Canadian columns appear when any row has a
    /// Canadian score; the geodesic column when any row has a geodesic score.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let with_cbc = self.rows.iter().any(|r| r.cbc.is_some());
        let with_geodesic = self.rows.iter().any(|r| r.geodesic.is_some());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["edge_id"];
        if with_cbc {
            header.extend([
                "mode",
                "method",
                "e_t_blocked",
                "e_t_open",
                "cbc",
                "p_fail_blocked",
                "p_fail_open",
                "se_blocked",
                "se_open",
            ]);
        }
        if with_geodesic {
            header.push("geodesic");
        }
        w.write_record(&header)?;
        let opt = |x: Option<f64>| x.map(format_num).unwrap_or_default();
        for row in &self.rows {
            let mut record = vec![row.edge_id.clone()];
            if with_cbc {
                match &row.cbc {
                    Some(r) => record.extend([
                        r.mode.as_str().to_string(),
                        r.method.as_str().to_string(),
                        format_num(r.e_t_blocked),
                        format_num(r.e_t_open),
                        format_num(r.cbc),
                        format_num(r.p_fail_blocked),
                        format_num(r.p_fail_open),
                        opt(r.se_blocked),
                        opt(r.se_open),
                    ]),
                    None => record.extend(std::iter::repeat(String::new()).take(9)),
                }
            }
            if with_geodesic {
                record.push(opt(row.geodesic));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}
