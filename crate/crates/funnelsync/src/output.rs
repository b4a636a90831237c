//! CSV and JSON artifacts. Floats are written with 17 significant digits so
//! every value parses back to the same `f64`.

use std::io::{Read, Write};

use funnelsync_core::emergent::{EmergentTrajectory, SweepRow};
use funnelsync_core::netsim::{BreachReport, Outcome};
use funnelsync_core::TrajectoryRecord;
use serde::{Deserialize, Serialize};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str) -> Result<f64, csv::Error> {
    s.trim().parse::<f64>().map_err(|e| {
        csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, format!("bad float {s:?}: {e}")))
    })
}

/// Columns of a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryColumns {
    pub times: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub nu: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub ratio: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
}

impl From<&TrajectoryRecord> for TrajectoryColumns {
    fn from(r: &TrajectoryRecord) -> Self {
        TrajectoryColumns {
            times: r.times.clone(),
            x: r.x.clone(),
            nu: r.nu.clone(),
            u: r.u.clone(),
            ratio: r.ratio.clone(),
            psi: r.psi.clone(),
        }
    }
}

const GROUPS: [&str; 5] = ["x", "nu", "u", "ratio", "psi"];

/// Header `t, x_0.., nu_0.., u_0.., ratio_0.., psi_0..`, one row per grid time.
pub fn write_trajectory_csv<W: Write>(out: W, rec: &TrajectoryRecord) -> Result<(), csv::Error> {
    let n = rec.n();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    for g in GROUPS {
        header.extend((0..n).map(|i| format!("{g}_{i}")));
    }
    w.write_record(&header)?;
    for k in 0..rec.len() {
        let mut row = vec![fmt_f64(rec.times[k])];
        for group in [&rec.x, &rec.nu, &rec.u, &rec.ratio, &rec.psi] {
            row.extend(group[k].iter().map(|v| fmt_f64(*v)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory_csv<R: Read>(input: R) -> Result<TrajectoryColumns, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers()?.len();
    if width < 1 || (width - 1) % GROUPS.len() != 0 {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("trajectory CSV has {width} columns"),
        )));
    }
    let n = (width - 1) / GROUPS.len();
    let mut cols = TrajectoryColumns::default();
    for rec in r.records() {
        let rec = rec?;
        let vals = rec.iter().map(parse_f64).collect::<Result<Vec<f64>, _>>()?;
        cols.times.push(vals[0]);
        let group = |g: usize| vals[1 + g * n..1 + (g + 1) * n].to_vec();
        cols.x.push(group(0));
        cols.nu.push(group(1));
        cols.u.push(group(2));
        cols.ratio.push(group(3));
        cols.psi.push(group(4));
    }
    Ok(cols)
}

/// Header `t, xi, chi`.
pub fn write_emergent_csv<W: Write>(out: W, em: &EmergentTrajectory) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "xi", "chi"])?;
    for k in 0..em.times.len() {
        w.write_record([fmt_f64(em.times[k]), fmt_f64(em.xi[k]), fmt_f64(em.chi[k])])?;
    }
    w.flush()?;
    Ok(())
}

/// Header `eps, sup_state_err, sup_ratio_err, max_input, breach`.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eps", "sup_state_err", "sup_ratio_err", "max_input", "breach"])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.eps),
            fmt_f64(r.sup_state_err),
            fmt_f64(r.sup_ratio_err),
            fmt_f64(r.max_input),
            r.breach.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreachSummary {
    pub t: f64,
    pub agent: usize,
    pub ratio: f64,
    pub last_safe_t: f64,
    pub last_safe_state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub max_input: f64,
    pub max_ratio: f64,
    pub breach: bool,
    pub runtime_steps: usize,
    pub rejected_steps: usize,
    /// `completed` or `funnel_closed`.
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub closed_at: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub breach_detail: Option<BreachSummary>,
}

impl RunSummary {
    pub fn from_record(rec: &TrajectoryRecord) -> RunSummary {
        let s = &rec.summary;
        let (outcome, closed_at) = match s.outcome {
            Outcome::Completed => ("completed", None),
            Outcome::FunnelClosed { t } => ("funnel_closed", Some(t)),
        };
        RunSummary {
            max_input: s.max_input,
            max_ratio: s.max_ratio,
            breach: s.breach,
            runtime_steps: s.runtime_steps,
            rejected_steps: s.rejected_steps,
            outcome: outcome.to_string(),
            closed_at,
            breach_detail: None,
        }
    }

    pub fn from_breach(b: &BreachReport) -> RunSummary {
        let mut s = RunSummary::from_record(&b.partial);
        s.breach = true;
        s.outcome = "breach".to_string();
        s.breach_detail = Some(BreachSummary {
            t: b.t,
            agent: b.index,
            ratio: b.ratio,
            last_safe_t: b.last_safe_t,
            last_safe_state: b.last_safe_state.clone(),
        });
        s
    }
}
