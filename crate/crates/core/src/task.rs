//! Tasks: the unit of scheduled user work. A task is bound to one worker for
//! its whole life (TLS-compatible) and remembers the last core it ran on.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::topology::CoreId;
use crate::worker::WorkerId;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct TaskId(pub u64);

impl std::fmt::Display for TaskId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A logical process sharing the centralized scheduler.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct DomainId(pub u64);

impl std::fmt::Display for DomainId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskState {
    Created,
    Ready,
    Running,
    Blocked,
    Finished,
}

impl TaskState {
    pub fn name(self) -> &'static str {
        match self {
            TaskState::Created => "Created",
            TaskState::Ready => "Ready",
            TaskState::Running => "Running",
            TaskState::Blocked => "Blocked",
            TaskState::Finished => "Finished",
        }
    }

    /// Legal transitions: Created -> Ready -> Running -> {Blocked -> Ready -> Running}* -> Finished.
    fn can_go(self, to: TaskState) -> bool {
        use TaskState::*;
        matches!(
            (self, to),
            (Created, Ready) | (Ready, Running) | (Running, Blocked) | (Running, Ready)
                | (Blocked, Ready) | (Running, Finished)
        )
    }
}

#[derive(Debug, Clone)]
pub struct Task {
    pub id: TaskId,
    pub domain: DomainId,
    pub state: TaskState,
    /// Set once, never changes afterwards.
    pub bound_worker: Option<WorkerId>,
    /// Last core the task ran on; `None` until first dispatch.
    pub preferred_core: Option<CoreId>,
    /// Queue position of the current enqueue, if the task sits in a ready queue.
    pub enqueue_seq: Option<u64>,
    /// Queue used while the task has never run: the creator's core at spawn
    /// time, core 0 for domain roots.
    pub home_core: CoreId,
    /// Task waiting in `join` on this one.
    pub joiner: Option<TaskId>,
    pub joined: bool,
    pub ever_submitted: bool,
}

impl Task {
    pub fn new(id: TaskId, domain: DomainId, home_core: CoreId) -> Self {
        Task {
            id,
            domain,
            state: TaskState::Created,
            bound_worker: None,
            preferred_core: None,
            enqueue_seq: None,
            home_core,
            joiner: None,
            joined: false,
            ever_submitted: false,
        }
    }

    pub fn transition(&mut self, to: TaskState) -> Result<(), CoreError> {
        if !self.state.can_go(to) {
            return Err(CoreError::BadTransition {
                task: self.id,
                from: self.state.name(),
                to: to.name(),
            });
        }
        self.state = to;
        Ok(())
    }

    /// Queue a resubmitted task goes to: last core it ran on, else its home queue.
    pub fn queue_core(&self) -> CoreId {
        self.preferred_core.unwrap_or(self.home_core)
    }

    pub fn bind(&mut self, worker: WorkerId) {
        debug_assert!(self.bound_worker.is_none(), "task binding is permanent");
        self.bound_worker = Some(worker);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifecycle_transitions() {
        let mut t = Task::new(TaskId(1), DomainId(0), CoreId(0));
        t.transition(TaskState::Ready).unwrap();
        t.transition(TaskState::Running).unwrap();
        t.transition(TaskState::Blocked).unwrap();
        t.transition(TaskState::Ready).unwrap();
        t.transition(TaskState::Running).unwrap();
        t.transition(TaskState::Finished).unwrap();
        // No way out of Finished.
        assert!(t.transition(TaskState::Ready).is_err());
    }

    #[test]
    fn illegal_jumps_rejected() {
        let mut t = Task::new(TaskId(1), DomainId(0), CoreId(0));
        assert!(t.transition(TaskState::Running).is_err());
        assert!(t.transition(TaskState::Finished).is_err());
        t.transition(TaskState::Ready).unwrap();
        assert!(t.transition(TaskState::Blocked).is_err());
    }
}
