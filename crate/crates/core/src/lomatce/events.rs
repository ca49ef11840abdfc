//! Parameterised event primitives: monotone trends and strict local extrema.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PepKind {
    Increasing,
    Decreasing,
    LocalMax,
    LocalMin,
}

impl PepKind {
    pub const ALL: [PepKind; 4] = [
        PepKind::Increasing,
        PepKind::Decreasing,
        PepKind::LocalMax,
        PepKind::LocalMin,
    ];

    pub fn is_trend(self) -> bool {
        matches!(self, PepKind::Increasing | PepKind::Decreasing)
    }

    /// Dimension of the event-parameter space.
    pub fn dims(self) -> usize {
        if self.is_trend() {
            3
        } else {
            2
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PepKind::Increasing => "Increasing",
            PepKind::Decreasing => "Decreasing",
            PepKind::LocalMax => "LocalMax",
            PepKind::LocalMin => "LocalMin",
        }
    }

    /// Attributes reported in global summaries.
    pub fn summary_attributes(self) -> [&'static str; 2] {
        if self.is_trend() {
            ["start_time", "duration"]
        } else {
            ["time", "value"]
        }
    }
}

impl std::fmt::Display for PepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Pep {
    Increasing {
        start_time: usize,
        duration: usize,
        avg_gradient: f64,
    },
    Decreasing {
        start_time: usize,
        duration: usize,
        avg_gradient: f64,
    },
    LocalMax {
        time: usize,
        value: f64,
    },
    LocalMin {
        time: usize,
        value: f64,
    },
}

impl Pep {
    pub fn kind(&self) -> PepKind {
        match self {
            Pep::Increasing { .. } => PepKind::Increasing,
            Pep::Decreasing { .. } => PepKind::Decreasing,
            Pep::LocalMax { .. } => PepKind::LocalMax,
            Pep::LocalMin { .. } => PepKind::LocalMin,
        }
    }

    /// Parameter tuple: `(start_time, duration, avg_gradient)` or `(time, value)`.
    pub fn features(&self) -> Vec<f64> {
        match *self {
            Pep::Increasing {
                start_time,
                duration,
                avg_gradient,
            }
            | Pep::Decreasing {
                start_time,
                duration,
                avg_gradient,
            } => vec![start_time as f64, duration as f64, avg_gradient],
            Pep::LocalMax { time, value } | Pep::LocalMin { time, value } => vec![time as f64, value],
        }
    }

    pub fn attribute(&self, name: &str) -> Option<f64> {
        match (*self, name) {
            (Pep::Increasing { start_time, .. } | Pep::Decreasing { start_time, .. }, "start_time") => {
                Some(start_time as f64)
            }
            (Pep::Increasing { duration, .. } | Pep::Decreasing { duration, .. }, "duration") => {
                Some(duration as f64)
            }
            (Pep::Increasing { avg_gradient, .. } | Pep::Decreasing { avg_gradient, .. }, "avg_gradient") => {
                Some(avg_gradient)
            }
            (Pep::LocalMax { time, .. } | Pep::LocalMin { time, .. }, "time") => Some(time as f64),
            (Pep::LocalMax { value, .. } | Pep::LocalMin { value, .. }, "value") => Some(value),
            _ => None,
        }
    }
}

/// An event together with the neighbourhood sample it was found in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterisedEvent {
    #[serde(flatten)]
    pub pep: Pep,
    pub source_sample: usize,
}

impl ParameterisedEvent {
    pub fn kind(&self) -> PepKind {
        self.pep.kind()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PepConfig {
    /// Centred moving-average width applied before detection; 1 disables it.
    pub smoothing_window: usize,
    /// Shortest trend kept, in steps.
    pub min_duration: usize,
    /// A step counts as rising (falling) when its difference is above
    /// `threshold` (below `-threshold`).
    pub gradient_threshold: f64,
}

impl Default for PepConfig {
    fn default() -> Self {
        PepConfig {
            smoothing_window: 3,
            min_duration: 2,
            gradient_threshold: 0.0,
        }
    }
}

impl PepConfig {
    /// Detection on the unsmoothed series, keeping single-step trends.
    pub fn raw() -> Self {
        PepConfig {
            smoothing_window: 1,
            min_duration: 1,
            gradient_threshold: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Extraction {
    pub events: Vec<Pep>,
    /// The series had fewer than 3 points; no events were attempted.
    pub too_short: bool,
}

/// Centred moving average; windows are truncated at the boundaries.
pub fn smooth(x: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return x.to_vec();
    }
    let half = window / 2;
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Extracts trends and extrema from `x`.
///
/// Trends are maximal runs of first differences beyond the threshold; the
/// average gradient is the net change over the run divided by its length.
/// Extrema sit where the difference strictly changes sign. Times and values
/// refer to the (smoothed) series the detector runs on.
pub fn extract_peps(x: &[f64], cfg: &PepConfig) -> Extraction {
    if x.len() < 3 {
        return Extraction {
            events: Vec::new(),
            too_short: true,
        };
    }
    let s = smooth(x, cfg.smoothing_window);
    let thr = cfg.gradient_threshold.max(0.0);
    let diffs: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let sign = |d: f64| -> i8 {
        if d > thr {
            1
        } else if d < -thr {
            -1
        } else {
            0
        }
    };

    let mut events = Vec::new();
    let mut t = 0;
    while t < diffs.len() {
        let sg = sign(diffs[t]);
        let start = t;
        while t < diffs.len() && sign(diffs[t]) == sg {
            t += 1;
        }
        let duration = t - start;
        if sg == 0 || duration < cfg.min_duration.max(1) {
            continue;
        }
        let avg_gradient = (s[t] - s[start]) / duration as f64;
        let pep = if sg > 0 {
            Pep::Increasing {
                start_time: start,
                duration,
                avg_gradient,
            }
        } else {
            Pep::Decreasing {
                start_time: start,
                duration,
                avg_gradient,
            }
        };
        events.push(pep);
    }

    for i in 1..diffs.len() {
        let (before, after) = (diffs[i - 1], diffs[i]);
        if before > 0.0 && after < 0.0 {
            events.push(Pep::LocalMax { time: i, value: s[i] });
        } else if before < 0.0 && after > 0.0 {
            events.push(Pep::LocalMin { time: i, value: s[i] });
        }
    }
    Extraction {
        events,
        too_short: false,
    }
}
