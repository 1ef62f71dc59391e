//! Per-series demand summaries and the smooth / erratic / intermittent /
//! lumpy classification.

use serde::{Deserialize, Serialize};

use crate::model::GroupDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cv2Convention {
    /// Squared coefficient of variation over every observed period, zeros included.
    AllPeriods,
    /// Over the non-zero observations only.
    NonZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatsOptions {
    /// Mean inter-demand interval above which demand is infrequent.
    pub p_threshold: f64,
    /// Squared coefficient of variation above which demand is irregular.
    pub cv2_threshold: f64,
    pub cv2: Cv2Convention,
}

impl Default for StatsOptions {
    fn default() -> Self {
        Self {
            p_threshold: 1.32,
            cv2_threshold: 0.49,
            cv2: Cv2Convention::AllPeriods,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemandCategory {
    Smooth,
    Erratic,
    Intermittent,
    Lumpy,
}

impl DemandCategory {
    pub const ALL: [DemandCategory; 4] =
        [Self::Smooth, Self::Erratic, Self::Intermittent, Self::Lumpy];

    pub fn name(self) -> &'static str {
        match self {
            Self::Smooth => "smooth",
            Self::Erratic => "erratic",
            Self::Intermittent => "intermittent",
            Self::Lumpy => "lumpy",
        }
    }
}

/// Thresholds are inclusive on the lower class.
pub fn categorize(inter_period: f64, cv2: f64, options: &StatsOptions) -> DemandCategory {
    match (
        inter_period <= options.p_threshold,
        cv2 <= options.cv2_threshold,
    ) {
        (true, true) => DemandCategory::Smooth,
        (true, false) => DemandCategory::Erratic,
        (false, true) => DemandCategory::Intermittent,
        (false, false) => DemandCategory::Lumpy,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub id: String,
    pub observed: usize,
    /// `None` when the series has no non-zero observation.
    pub mean_nonzero: Option<f64>,
    /// Observed periods per non-zero observation.
    pub inter_period: Option<f64>,
    pub cv2: Option<f64>,
    pub category: Option<DemandCategory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandStats {
    pub series: Vec<SeriesStats>,
    /// Averages over categorised series.
    pub mean_nonzero: f64,
    pub mean_inter_period: f64,
    pub mean_cv2: f64,
    /// Percentage of categorised series in each class, in [`DemandCategory::ALL`] order.
    pub percentages: [f64; 4],
    /// Series with no non-zero observation.
    pub uncategorized: usize,
}

fn series_stats(id: &str, values: &[u64], options: &StatsOptions) -> SeriesStats {
    let nonzero: Vec<f64> = values
        .iter()
        .filter(|&&v| v > 0)
        .map(|&v| v as f64)
        .collect();
    if nonzero.is_empty() {
        return SeriesStats {
            id: id.to_string(),
            observed: values.len(),
            mean_nonzero: None,
            inter_period: None,
            cv2: None,
            category: None,
        };
    }
    let all: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    let sample = match options.cv2 {
        Cv2Convention::AllPeriods => &all,
        Cv2Convention::NonZero => &nonzero,
    };
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let cv2 = var / (mean * mean);
    let inter = values.len() as f64 / nonzero.len() as f64;
    SeriesStats {
        id: id.to_string(),
        observed: values.len(),
        mean_nonzero: Some(nonzero.iter().sum::<f64>() / nonzero.len() as f64),
        inter_period: Some(inter),
        cv2: Some(cv2),
        category: Some(categorize(inter, cv2, options)),
    }
}

/// Summaries over the observed training values of every series.
pub fn summary_stats(data: &GroupDataset, options: &StatsOptions) -> DemandStats {
    let series: Vec<SeriesStats> = data
        .series()
        .iter()
        .map(|s| series_stats(&s.id, &s.observed(data.n_train()), options))
        .collect();
    let done: Vec<&SeriesStats> = series.iter().filter(|s| s.category.is_some()).collect();
    let n = done.len() as f64;
    let avg = |f: fn(&SeriesStats) -> Option<f64>| {
        if done.is_empty() {
            f64::NAN
        } else {
            done.iter().filter_map(|s| f(s)).sum::<f64>() / n
        }
    };
    let mut percentages = [0.0; 4];
    for s in &done {
        let k = DemandCategory::ALL
            .iter()
            .position(|c| Some(*c) == s.category)
            .expect("known class");
        percentages[k] += 100.0 / n;
    }
    DemandStats {
        mean_nonzero: avg(|s| s.mean_nonzero),
        mean_inter_period: avg(|s| s.inter_period),
        mean_cv2: avg(|s| s.cv2),
        percentages,
        uncategorized: series.len() - done.len(),
        series,
    }
}
