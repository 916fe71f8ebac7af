//! Workers: execution contexts (threads, in runtime mode) that host exactly
//! one task at a time and are logically pinned to a core while running.

use serde::{Deserialize, Serialize};

use crate::task::{DomainId, TaskId};
use crate::topology::CoreId;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct WorkerId(pub u64);

impl std::fmt::Display for WorkerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub struct Worker {
    pub id: WorkerId,
    pub domain: DomainId,
    /// Core currently occupied, `None` while parked.
    pub current_core: Option<CoreId>,
    pub hosted_task: Option<TaskId>,
    /// Sitting in the thread cache, available for a fresh task.
    pub cached: bool,
}

impl Worker {
    pub fn new(id: WorkerId, domain: DomainId) -> Self {
        Worker {
            id,
            domain,
            current_core: None,
            hosted_task: None,
            cached: false,
        }
    }
}
