use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{rmse, skill_from_rmse};
use crate::error::{Error, Result};

pub const SKILL_SCHEMA_VERSION: u32 = 1;

/// A way of producing forecasts that gets its own report rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Framework {
    LateFusion,
    BestModel,
    SingleModel(usize),
    Climatology,
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Framework::LateFusion => f.write_str("late_fusion"),
            Framework::BestModel => f.write_str("best_model"),
            Framework::SingleModel(j) => write!(f, "model_{j}"),
            Framework::Climatology => f.write_str("climatology"),
        }
    }
}

impl FromStr for Framework {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "late_fusion" => Ok(Framework::LateFusion),
            "best_model" => Ok(Framework::BestModel),
            "climatology" => Ok(Framework::Climatology),
            other => other
                .strip_prefix("model_")
                .and_then(|j| j.parse().ok())
                .map(Framework::SingleModel)
                .ok_or_else(|| Error::MalformedData(format!("unknown framework `{other}`"))),
        }
    }
}

impl Serialize for Framework {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Framework {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Test-split forecasts of several frameworks at one lead time.
///
/// Every per-channel vector is aligned on the same sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadTimeForecasts {
    pub lead_time: usize,
    pub channels: Vec<String>,
    pub truth: Vec<Vec<f64>>,
    pub climatology: Vec<Vec<f64>>,
    /// `(framework, per-channel predictions)`.
    pub frameworks: Vec<(Framework, Vec<Vec<f64>>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillRow {
    pub channel: String,
    pub lead_time: usize,
    pub framework: Framework,
    pub rmse_model: f64,
    pub rmse_clim: f64,
    pub rmsess: f64,
}

/// Versioned skill table; JSON and CSV carry the same rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillReport {
    pub schema_version: u32,
    pub rows: Vec<SkillRow>,
}

/// RMSESS against lead time for one (channel, framework).
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub channel: String,
    pub framework: Framework,
    pub points: Vec<(usize, f64)>,
}

impl SkillReport {
    /// Scores every framework on every channel. A climatology row is added
    /// for each (channel, lead time) unless one is supplied.
    pub fn compare_frameworks(inputs: &[LeadTimeForecasts]) -> Result<Self> {
        let mut rows = Vec::new();
        for lt in inputs {
            let c = lt.channels.len();
            let check = |what: &str, v: &[Vec<f64>]| -> Result<()> {
                if v.len() != c {
                    return Err(Error::MisalignedSamples(format!(
                        "lead time {}: {what} has {} channels, expected {c}",
                        lt.lead_time,
                        v.len()
                    )));
                }
                for (name, (series, truth)) in lt.channels.iter().zip(v.iter().zip(&lt.truth)) {
                    if series.len() != truth.len() {
                        return Err(Error::MisalignedSamples(format!(
                            "lead time {}, channel `{name}`: {what} has {} samples, truth has {}",
                            lt.lead_time,
                            series.len(),
                            truth.len()
                        )));
                    }
                }
                Ok(())
            };
            check("truth", &lt.truth)?;
            check("climatology", &lt.climatology)?;
            for (fw, preds) in &lt.frameworks {
                check(&fw.to_string(), preds)?;
            }

            let has_clim = lt.frameworks.iter().any(|(f, _)| *f == Framework::Climatology);
            for (ci, channel) in lt.channels.iter().enumerate() {
                let truth = &lt.truth[ci];
                let rmse_clim = rmse(&lt.climatology[ci], truth)?;
                let clim_entry = (!has_clim).then(|| (Framework::Climatology, &lt.climatology[ci]));
                let entries = lt
                    .frameworks
                    .iter()
                    .map(|(f, p)| (*f, &p[ci]))
                    .chain(clim_entry);
                for (framework, preds) in entries {
                    let rmse_model = if framework == Framework::Climatology {
                        rmse_clim
                    } else {
                        rmse(preds, truth)?
                    };
                    let skill = skill_from_rmse(rmse_model, rmse_clim).map_err(|e| {
                        e.context(format!("lead time {}, channel `{channel}`", lt.lead_time))
                    })?;
                    rows.push(SkillRow {
                        channel: channel.clone(),
                        lead_time: lt.lead_time,
                        framework,
                        rmse_model,
                        rmse_clim,
                        rmsess: skill,
                    });
                }
            }
        }
        Ok(Self {
            schema_version: SKILL_SCHEMA_VERSION,
            rows,
        })
    }

    pub fn rows_for(&self, framework: Framework) -> impl Iterator<Item = &SkillRow> {
        self.rows.iter().filter(move |r| r.framework == framework)
    }

    pub fn get(&self, channel: &str, lead_time: usize, framework: Framework) -> Option<&SkillRow> {
        self.rows
            .iter()
            .find(|r| r.channel == channel && r.lead_time == lead_time && r.framework == framework)
    }

    fn channels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.channel) {
                out.push(r.channel.clone());
            }
        }
        out
    }

    fn frameworks(&self) -> Vec<Framework> {
        let mut out: Vec<Framework> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.framework) {
                out.push(r.framework);
            }
        }
        out
    }

    /// Mean RMSESS of a framework: averaged over lead times within each
    /// channel first, then over channels. `None` if the framework is absent.
    pub fn average_rmsess(&self, framework: Framework) -> Option<f64> {
        let per_channel: Vec<f64> = self
            .channels()
            .iter()
            .filter_map(|ch| {
                let vals: Vec<f64> = self
                    .rows_for(framework)
                    .filter(|r| &r.channel == ch)
                    .map(|r| r.rmsess)
                    .collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            })
            .collect();
        (!per_channel.is_empty()).then(|| per_channel.iter().sum::<f64>() / per_channel.len() as f64)
    }

    /// One curve per (channel, framework), points in lead-time order.
    pub fn curves(&self) -> Vec<Curve> {
        let mut out = Vec::new();
        for channel in self.channels() {
            for framework in self.frameworks() {
                let mut points: Vec<(usize, f64)> = self
                    .rows
                    .iter()
                    .filter(|r| r.channel == channel && r.framework == framework)
                    .map(|r| (r.lead_time, r.rmsess))
                    .collect();
                if points.is_empty() {
                    continue;
                }
                points.sort_by_key(|p| p.0);
                out.push(Curve {
                    channel: channel.clone(),
                    framework,
                    points,
                });
            }
        }
        out
    }

    /// Plot-ready table for one channel: `lead_time,<framework>,...` with
    /// RMSESS values; cells are empty where a framework lacks a lead time.
    pub fn curve_csv(&self, channel: &str) -> Vec<u8> {
        let frameworks = self.frameworks();
        let mut leads: Vec<usize> = self
            .rows
            .iter()
            .filter(|r| r.channel == channel)
            .map(|r| r.lead_time)
            .collect();
        leads.sort_unstable();
        leads.dedup();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["lead_time".to_string()];
        header.extend(frameworks.iter().map(Framework::to_string));
        w.write_record(&header).expect("in-memory write");
        for lead in leads {
            let mut rec = vec![lead.to_string()];
            for f in &frameworks {
                rec.push(
                    self.get(channel, lead, *f)
                        .map(|r| r.rmsess.to_string())
                        .unwrap_or_default(),
                );
            }
            w.write_record(&rec).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn curve_channels(&self) -> Vec<String> {
        self.channels()
    }

    /// `channel,lead_time,framework,rmse_model,rmse_clim,rmsess`.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["channel", "lead_time", "framework", "rmse_model", "rmse_clim", "rmsess"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.channel.clone(),
                r.lead_time.to_string(),
                r.framework.to_string(),
                r.rmse_model.to_string(),
                r.rmse_clim.to_string(),
                r.rmsess.to_string(),
            ])
            .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("report is serializable");
        v.push(b'\n');
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lead(frameworks: Vec<(Framework, Vec<Vec<f64>>)>) -> LeadTimeForecasts {
        LeadTimeForecasts {
            lead_time: 5,
            channels: vec!["a".into()],
            truth: vec![vec![0.0, 0.0]],
            climatology: vec![vec![2.0, -2.0]],
            frameworks,
        }
    }

    #[test]
    fn single_framework_row() {
        let r = SkillReport::compare_frameworks(&[lead(vec![(
            Framework::LateFusion,
            vec![vec![1.0, 1.0]],
        )])])
        .unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[0].rmsess, 0.5);
        assert_eq!(r.rows[1].framework, Framework::Climatology);
        assert_eq!(r.rows[1].rmsess, 0.0);
    }

    #[test]
    fn identical_predictions_give_identical_rows() {
        let p = vec![vec![0.5, -1.5]];
        let r = SkillReport::compare_frameworks(&[lead(vec![
            (Framework::LateFusion, p.clone()),
            (Framework::BestModel, p),
        ])])
        .unwrap();
        let a = r.get("a", 5, Framework::LateFusion).unwrap();
        let b = r.get("a", 5, Framework::BestModel).unwrap();
        assert_eq!((a.rmse_model, a.rmsess), (b.rmse_model, b.rmsess));
    }

    #[test]
    fn misaligned_rejected() {
        let err = SkillReport::compare_frameworks(&[lead(vec![(
            Framework::LateFusion,
            vec![vec![1.0]],
        )])])
        .unwrap_err();
        assert!(matches!(err, Error::MisalignedSamples(_)));
    }

    #[test]
    fn framework_names_round_trip() {
        for f in [
            Framework::LateFusion,
            Framework::BestModel,
            Framework::SingleModel(17),
            Framework::Climatology,
        ] {
            assert_eq!(f.to_string().parse::<Framework>().unwrap(), f);
        }
        assert!("model_x".parse::<Framework>().is_err());
    }

    #[test]
    fn averaging_is_leads_then_channels() {
        let row = |ch: &str, lead, s| SkillRow {
            channel: ch.into(),
            lead_time: lead,
            framework: Framework::LateFusion,
            rmse_model: 0.0,
            rmse_clim: 1.0,
            rmsess: s,
        };
        let r = SkillReport {
            schema_version: SKILL_SCHEMA_VERSION,
            rows: vec![row("a", 5, 0.2), row("a", 10, 0.4), row("b", 5, 1.0)],
        };
        // channel means 0.3 and 1.0
        assert!((r.average_rmsess(Framework::LateFusion).unwrap() - 0.65).abs() < 1e-15);
        assert_eq!(r.average_rmsess(Framework::BestModel), None);
    }

    #[test]
    fn csv_and_curves_layout() {
        let r = SkillReport::compare_frameworks(&[
            lead(vec![(Framework::LateFusion, vec![vec![1.0, 1.0]])]),
            LeadTimeForecasts {
                lead_time: 10,
                ..lead(vec![(Framework::LateFusion, vec![vec![2.0, 0.0]])])
            },
        ])
        .unwrap();
        let csv = String::from_utf8(r.to_csv()).unwrap();
        assert!(csv.starts_with("channel,lead_time,framework,rmse_model,rmse_clim,rmsess\n"));
        assert!(csv.contains("a,5,late_fusion,1,2,0.5\n"));
        let curve = String::from_utf8(r.curve_csv("a")).unwrap();
        let lines: Vec<&str> = curve.lines().collect();
        assert_eq!(lines[0], "lead_time,late_fusion,climatology");
        assert_eq!(lines[1], "5,0.5,0");
        assert_eq!(r.curves().len(), 2);
        let back: SkillReport = serde_json::from_slice(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
