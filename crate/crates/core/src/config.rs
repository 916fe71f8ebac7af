use serde::{Deserialize, Serialize};

use crate::time::{DurationNs, NANOS_PER_MILLI};
use crate::topology::Topology;

/// Knobs of the cooperative scheduler itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchedulerConfig {
    /// Per-domain CPU allotment between rotations, evaluated at scheduling points.
    pub quantum: DurationNs,
    /// Poll interval of timed waits.
    pub waitfor_poll: DurationNs,
    /// Horizon after which cores making no scheduling point while work waits
    /// are reported as stalled; also the domain shutdown grace period.
    pub deadlock_check_interval: DurationNs,
    pub topology: Topology,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            quantum: DurationNs(20 * NANOS_PER_MILLI),
            waitfor_poll: DurationNs(5 * NANOS_PER_MILLI),
            deadlock_check_interval: DurationNs(100 * NANOS_PER_MILLI),
            topology: Topology::single_node(1),
        }
    }
}

impl SchedulerConfig {
    pub fn with_topology(topology: Topology) -> Self {
        SchedulerConfig {
            topology,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.quantum.ns() == 0 {
            return Err("quantum must be > 0".into());
        }
        if self.waitfor_poll.ns() == 0 {
            return Err("waitfor_poll must be > 0".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_contract() {
        let c = SchedulerConfig::default();
        assert_eq!(c.quantum.ns(), 20_000_000);
        assert_eq!(c.waitfor_poll.ns(), 5_000_000);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn zero_quantum_rejected() {
        let mut c = SchedulerConfig::default();
        c.quantum = DurationNs(0);
        assert!(c.validate().is_err());
    }
}
