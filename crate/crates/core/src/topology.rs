//! Logical machine topology: a set of cores, each belonging to exactly one
//! NUMA node. Dispatch uses it for the affinity fallback ladder
//! (exact core, same NUMA node, anywhere).

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Index of a logical core, dense in `[0, n_cores)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct CoreId(pub usize);

impl std::fmt::Display for CoreId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// NUMA node identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NumaNodeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    /// NUMA node of each core, indexed by core id.
    numa_of: Vec<usize>,
}

impl Topology {
    /// All cores in a single NUMA node.
    pub fn single_node(n_cores: usize) -> Self {
        Topology {
            numa_of: vec![0; n_cores.max(1)],
        }
    }

    /// `n_cores` split into contiguous groups of `cores_per_node`.
    pub fn grouped(n_cores: usize, cores_per_node: usize) -> Self {
        let per = cores_per_node.max(1);
        Topology {
            numa_of: (0..n_cores.max(1)).map(|c| c / per).collect(),
        }
    }

    /// Explicit per-core node map.
    pub fn from_numa_map(numa_of: Vec<usize>) -> Result<Self, CoreError> {
        if numa_of.is_empty() {
            return Err(CoreError::EmptyTopology);
        }
        Ok(Topology { numa_of })
    }

    pub fn n_cores(&self) -> usize {
        self.numa_of.len()
    }

    pub fn contains(&self, core: CoreId) -> bool {
        core.0 < self.numa_of.len()
    }

    pub fn numa_of(&self, core: CoreId) -> NumaNodeId {
        NumaNodeId(self.numa_of[core.0])
    }

    pub fn same_numa(&self, a: CoreId, b: CoreId) -> bool {
        self.numa_of[a.0] == self.numa_of[b.0]
    }

    pub fn cores(&self) -> impl Iterator<Item = CoreId> + '_ {
        (0..self.numa_of.len()).map(CoreId)
    }

    /// Raw node map, used by trace headers.
    pub fn numa_map(&self) -> &[usize] {
        &self.numa_of
    }
}
