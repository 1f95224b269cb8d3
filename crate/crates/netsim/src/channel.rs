use serde::{Deserialize, Serialize};

use crate::Tick;

/// Length of one logical tick, in seconds.
pub const TICK_SECONDS: f64 = 0.01;

/// Converts seconds to whole ticks, rounding to nearest.
pub fn seconds_to_ticks(seconds: f64) -> Tick {
    (seconds / TICK_SECONDS).round().max(0.0) as Tick
}

/// Parameterized short-range radio channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Channel {
    pub latency_s: f64,
    pub range_m: f64,
    /// Informational only: (min, max) in Mbps.
    pub data_rate_mbps: (f64, f64),
    pub loss_probability: f64,
    /// Half-open `[start, end)` tick windows during which every send is lost.
    pub interference_windows: Vec<(Tick, Tick)>,
}

impl Default for Channel {
    fn default() -> Self {
        Channel {
            latency_s: 0.02,
            range_m: 1000.0,
            data_rate_mbps: (3.0, 27.0),
            loss_probability: 0.0,
            interference_windows: Vec::new(),
        }
    }
}

impl Channel {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.latency_s >= 0.0) || !self.latency_s.is_finite() {
            return Err(format!("channel latency must be >= 0, got {}", self.latency_s));
        }
        if !(self.range_m > 0.0) {
            return Err(format!("channel range must be > 0, got {}", self.range_m));
        }
        if !(0.0..=1.0).contains(&self.loss_probability) {
            return Err(format!(
                "loss probability must be in [0, 1], got {}",
                self.loss_probability
            ));
        }
        if let Some((s, e)) = self.interference_windows.iter().find(|(s, e)| s > e) {
            return Err(format!("interference window [{s}, {e}) is reversed"));
        }
        Ok(())
    }

    pub fn latency_ticks(&self) -> Tick {
        seconds_to_ticks(self.latency_s)
    }

    pub fn interfered(&self, tick: Tick) -> bool {
        self.interference_windows
            .iter()
            .any(|&(s, e)| (s..e).contains(&tick))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_latency_is_two_ticks() {
        assert_eq!(Channel::default().latency_ticks(), 2);
        assert_eq!(Channel::default().range_m, 1000.0);
    }

    #[test]
    fn windows_are_half_open() {
        let c = Channel {
            interference_windows: vec![(10, 12)],
            ..Channel::default()
        };
        assert!(!c.interfered(9));
        assert!(c.interfered(10));
        assert!(c.interfered(11));
        assert!(!c.interfered(12));
    }

    #[test]
    fn validation() {
        assert!(Channel::default().validate().is_ok());
        let bad = Channel {
            loss_probability: 1.5,
            ..Channel::default()
        };
        assert!(bad.validate().is_err());
        let bad = Channel {
            range_m: 0.0,
            ..Channel::default()
        };
        assert!(bad.validate().is_err());
    }
}
