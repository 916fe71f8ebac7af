use thiserror::Error;

use crate::task::{DomainId, TaskId};
use crate::topology::CoreId;
use crate::worker::WorkerId;

/// Contract violations and structural errors from the scheduling kernel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("topology must have at least one core")]
    EmptyTopology,
    #[error("core {0} is outside the topology")]
    UnknownCore(CoreId),
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("unknown domain {0}")]
    UnknownDomain(DomainId),
    #[error("task {0} submitted while already enqueued or running")]
    DuplicateSubmit(TaskId),
    #[error("illegal task state transition for {task}: {from} -> {to}")]
    BadTransition {
        task: TaskId,
        from: &'static str,
        to: &'static str,
    },
    #[error("core {0} has no running task")]
    NoRunningTask(CoreId),
    #[error("core {0} already occupied")]
    CoreOccupied(CoreId),
    #[error("worker {worker} bound to task {task} is occupying core {core}")]
    BoundWorkerBusy {
        worker: WorkerId,
        task: TaskId,
        core: CoreId,
    },
    #[error("task {task} already holds mutex {mutex} (non-reentrant)")]
    RecursiveLock { task: TaskId, mutex: u64 },
    #[error("task {task} does not hold mutex {mutex}")]
    NotOwner { task: TaskId, mutex: u64 },
    #[error("condvar wait by {task} without holding mutex {mutex}")]
    WaitWithoutMutex { task: TaskId, mutex: u64 },
    #[error("barrier {barrier} overflow: more than {parties} arrivals in one generation")]
    BarrierOverflow { barrier: u64, parties: usize },
    #[error("task {0} already joined")]
    DoubleJoin(TaskId),
    #[error("spawn in domain {0} which is not active")]
    DomainNotActive(DomainId),
    #[error("domain {domain} shutdown stuck; unfinished tasks: {tasks:?}")]
    ShutdownStuck { domain: DomainId, tasks: Vec<TaskId> },
}
