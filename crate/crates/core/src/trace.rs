//! Line-delimited trace format shared by the simulator and the runtime.
//!
//! One record per event, tab-separated, fixed field order:
//! `time  event  task  domain  core  worker  seq  obj`
//! with `-` for absent fields. `obj` identifies the synchronization
//! primitive for sync events and is empty for core events. The header
//! carries the policy and topology so a trace is self-describing for
//! replay and invariant checking.

use std::fmt::Write as _;

use crate::task::{DomainId, TaskId};
use crate::time::Nanos;
use crate::topology::{CoreId, Topology};
use crate::worker::WorkerId;

pub const TRACE_MAGIC: &str = "#coopsched-trace v1";

/// Identifier of a synchronization primitive within one run.
pub type ObjId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    // Core scheduling events.
    Create,
    Dispatch,
    Block,
    Yield,
    Finish,
    Rotate,
    Wake,
    // Synchronization events.
    LockAcquire,
    LockTransfer,
    LockRelease,
    CvWait,
    CvSignal,
    BarrierRelease,
    SpinSegment,
    StallReport,
    // FAIR-only.
    Preempt,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Create => "create",
            EventKind::Dispatch => "dispatch",
            EventKind::Block => "block",
            EventKind::Yield => "yield",
            EventKind::Finish => "finish",
            EventKind::Rotate => "rotate",
            EventKind::Wake => "wake",
            EventKind::LockAcquire => "lock_acquire",
            EventKind::LockTransfer => "lock_transfer",
            EventKind::LockRelease => "lock_release",
            EventKind::CvWait => "cv_wait",
            EventKind::CvSignal => "cv_signal",
            EventKind::BarrierRelease => "barrier_release",
            EventKind::SpinSegment => "spin_segment",
            EventKind::StallReport => "stall_report",
            EventKind::Preempt => "preempt",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "create" => EventKind::Create,
            "dispatch" => EventKind::Dispatch,
            "block" => EventKind::Block,
            "yield" => EventKind::Yield,
            "finish" => EventKind::Finish,
            "rotate" => EventKind::Rotate,
            "wake" => EventKind::Wake,
            "lock_acquire" => EventKind::LockAcquire,
            "lock_transfer" => EventKind::LockTransfer,
            "lock_release" => EventKind::LockRelease,
            "cv_wait" => EventKind::CvWait,
            "cv_signal" => EventKind::CvSignal,
            "barrier_release" => EventKind::BarrierRelease,
            "spin_segment" => EventKind::SpinSegment,
            "stall_report" => EventKind::StallReport,
            "preempt" => EventKind::Preempt,
            _ => return None,
        })
    }

    /// Events that represent a task being appended to a ready queue.
    pub fn is_enqueue(self) -> bool {
        matches!(
            self,
            EventKind::Create | EventKind::Wake | EventKind::Yield | EventKind::Preempt
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: Nanos,
    pub kind: EventKind,
    pub task: Option<TaskId>,
    pub domain: Option<DomainId>,
    pub core: Option<CoreId>,
    pub worker: Option<WorkerId>,
    /// Enqueue sequence number for enqueue events and dispatches.
    pub seq: Option<u64>,
    /// Synchronization primitive id, if the event concerns one.
    pub obj: Option<ObjId>,
}

impl TraceEvent {
    pub fn new(time: Nanos, kind: EventKind) -> Self {
        TraceEvent {
            time,
            kind,
            task: None,
            domain: None,
            core: None,
            worker: None,
            seq: None,
            obj: None,
        }
    }

    pub fn task(mut self, t: TaskId) -> Self {
        self.task = Some(t);
        self
    }
    pub fn domain(mut self, d: DomainId) -> Self {
        self.domain = Some(d);
        self
    }
    pub fn core(mut self, c: CoreId) -> Self {
        self.core = Some(c);
        self
    }
    pub fn worker(mut self, w: WorkerId) -> Self {
        self.worker = Some(w);
        self
    }
    pub fn seq(mut self, s: u64) -> Self {
        self.seq = Some(s);
        self
    }
    pub fn obj(mut self, o: ObjId) -> Self {
        self.obj = Some(o);
        self
    }
}

/// Metadata a trace file carries in its header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceMeta {
    pub policy: String,
    pub topology: Topology,
}

fn push_opt(line: &mut String, v: Option<u64>) {
    match v {
        Some(v) => {
            let _ = write!(line, "\t{v}");
        }
        None => line.push_str("\t-"),
    }
}

pub fn format_event(ev: &TraceEvent) -> String {
    let mut line = format!("{}\t{}", ev.time, ev.kind.name());
    push_opt(&mut line, ev.task.map(|t| t.0));
    push_opt(&mut line, ev.domain.map(|d| d.0));
    push_opt(&mut line, ev.core.map(|c| c.0 as u64));
    push_opt(&mut line, ev.worker.map(|w| w.0));
    push_opt(&mut line, ev.seq);
    push_opt(&mut line, ev.obj);
    line
}

/// Serialize a full trace (header + records) to a string.
pub fn write_trace(meta: &TraceMeta, events: &[TraceEvent]) -> String {
    let mut out = String::new();
    out.push_str(TRACE_MAGIC);
    out.push('\n');
    let numa: Vec<String> = meta
        .topology
        .numa_map()
        .iter()
        .map(|n| n.to_string())
        .collect();
    let _ = writeln!(
        out,
        "#policy={} cores={} numa={}",
        meta.policy,
        meta.topology.n_cores(),
        numa.join(",")
    );
    for ev in events {
        out.push_str(&format_event(ev));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("trace parse error at line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn parse_opt(field: &str, line: usize, what: &str) -> Result<Option<u64>, ParseError> {
    if field == "-" {
        return Ok(None);
    }
    field.parse::<u64>().map(Some).map_err(|_| ParseError {
        line,
        msg: format!("bad {what} field {field:?}"),
    })
}

/// Parse a trace file produced by [`write_trace`].
pub fn parse_trace(text: &str) -> Result<(TraceMeta, Vec<TraceEvent>), ParseError> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(ParseError {
        line: 1,
        msg: "empty file".into(),
    })?;
    if first != TRACE_MAGIC {
        return Err(ParseError {
            line: 1,
            msg: format!("bad magic, expected {TRACE_MAGIC:?}"),
        });
    }
    let (_, header) = lines.next().ok_or(ParseError {
        line: 2,
        msg: "missing header line".into(),
    })?;
    let meta = parse_header(header).map_err(|msg| ParseError { line: 2, msg })?;

    let mut events = Vec::new();
    for (idx, raw) in lines {
        let lineno = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let mut f = raw.split('\t');
        let mut next = |what: &str| {
            f.next().ok_or(ParseError {
                line: lineno,
                msg: format!("truncated record, missing {what}"),
            })
        };
        let time: Nanos = next("time")?.parse().map_err(|_| ParseError {
            line: lineno,
            msg: "bad time field".into(),
        })?;
        let kind_str = next("event")?;
        let kind = EventKind::from_name(kind_str).ok_or(ParseError {
            line: lineno,
            msg: format!("unknown event kind {kind_str:?}"),
        })?;
        let task = parse_opt(next("task")?, lineno, "task")?;
        let domain = parse_opt(next("domain")?, lineno, "domain")?;
        let core = parse_opt(next("core")?, lineno, "core")?;
        let worker = parse_opt(next("worker")?, lineno, "worker")?;
        let seq = parse_opt(next("seq")?, lineno, "seq")?;
        let obj = parse_opt(next("obj")?, lineno, "obj")?;
        if f.next().is_some() {
            return Err(ParseError {
                line: lineno,
                msg: "extra fields".into(),
            });
        }
        events.push(TraceEvent {
            time,
            kind,
            task: task.map(TaskId),
            domain: domain.map(DomainId),
            core: core.map(|c| CoreId(c as usize)),
            worker: worker.map(WorkerId),
            seq,
            obj,
        });
    }
    Ok((meta, events))
}

fn parse_header(line: &str) -> Result<TraceMeta, String> {
    let line = line.strip_prefix('#').ok_or("header must start with '#'")?;
    let mut policy = None;
    let mut cores = None;
    let mut numa = None;
    for kv in line.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or(format!("bad header pair {kv:?}"))?;
        match k {
            "policy" => policy = Some(v.to_string()),
            "cores" => cores = Some(v.parse::<usize>().map_err(|_| "bad cores")?),
            "numa" => {
                let map: Result<Vec<usize>, _> = v.split(',').map(|s| s.parse()).collect();
                numa = Some(map.map_err(|_| "bad numa map")?);
            }
            other => return Err(format!("unknown header key {other:?}")),
        }
    }
    let policy = policy.ok_or("header missing policy")?;
    let numa = numa.ok_or("header missing numa map")?;
    if let Some(c) = cores {
        if c != numa.len() {
            return Err("cores and numa map disagree".into());
        }
    }
    let topology = Topology::from_numa_map(numa).map_err(|e| e.to_string())?;
    Ok(TraceMeta { policy, topology })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_meta() -> TraceMeta {
        TraceMeta {
            policy: "coop".into(),
            topology: Topology::grouped(4, 2),
        }
    }

    #[test]
    fn roundtrip_simple() {
        let meta = sample_meta();
        let evs = vec![
            TraceEvent::new(0, EventKind::Create)
                .task(TaskId(1))
                .domain(DomainId(0))
                .core(CoreId(0))
                .seq(0),
            TraceEvent::new(5, EventKind::Dispatch)
                .task(TaskId(1))
                .domain(DomainId(0))
                .core(CoreId(0))
                .worker(WorkerId(0))
                .seq(0),
            TraceEvent::new(9, EventKind::LockAcquire).task(TaskId(1)).obj(3),
        ];
        let text = write_trace(&meta, &evs);
        let (m2, evs2) = parse_trace(&text).unwrap();
        assert_eq!(m2, meta);
        assert_eq!(evs2, evs);
    }

    #[test]
    fn truncated_record_reports_line() {
        let meta = sample_meta();
        let mut text = write_trace(
            &meta,
            &[TraceEvent::new(1, EventKind::Finish).task(TaskId(2))],
        );
        // Chop the last two fields off the record on line 3.
        text = text.trim_end().rsplit_once('\t').unwrap().0.to_string();
        text = text.rsplit_once('\t').unwrap().0.to_string();
        let err = parse_trace(&text).unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn bad_magic_rejected() {
        assert!(parse_trace("nope\n").is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_any_record(
            time in 0u64..u64::MAX / 2,
            kind_ix in 0usize..16,
            task in proptest::option::of(0u64..1000),
            domain in proptest::option::of(0u64..10),
            core in proptest::option::of(0u64..64),
            worker in proptest::option::of(0u64..1000),
            seq in proptest::option::of(0u64..100_000),
            obj in proptest::option::of(0u64..100),
        ) {
            let kinds = [
                EventKind::Create, EventKind::Dispatch, EventKind::Block, EventKind::Yield,
                EventKind::Finish, EventKind::Rotate, EventKind::Wake, EventKind::LockAcquire,
                EventKind::LockTransfer, EventKind::LockRelease, EventKind::CvWait,
                EventKind::CvSignal, EventKind::BarrierRelease, EventKind::SpinSegment,
                EventKind::StallReport, EventKind::Preempt,
            ];
            let ev = TraceEvent {
                time,
                kind: kinds[kind_ix],
                task: task.map(TaskId),
                domain: domain.map(DomainId),
                core: core.map(|c| CoreId(c as usize)),
                worker: worker.map(WorkerId),
                seq,
                obj,
            };
            let meta = sample_meta();
            let (_, parsed) = parse_trace(&write_trace(&meta, &[ev])).unwrap();
            prop_assert_eq!(parsed, vec![ev]);
        }
    }
}
