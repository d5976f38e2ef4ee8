//! Group-walking event detection over per-frame clusterings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::spectral::FrameClustering;

/// A cluster reaches event size at three members.
pub const GROUP_EVENT_MIN_SIZE: usize = 3;

/// One qualifying group: its cluster label and members in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub label: usize,
    pub members: Vec<u64>,
}

/// Per-frame event state: active whenever at least one cluster holds
/// three or more tracks; `groups` lists every such cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupEvent {
    pub frame: i64,
    pub active: bool,
    pub groups: Vec<Group>,
}

/// Pure function of the clustering: collects clusters of size >= 3.
pub fn detect_group_event(frame: i64, clustering: &FrameClustering) -> GroupEvent {
    let mut members: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for (&id, &label) in clustering.ids.iter().zip(&clustering.labels) {
        members.entry(label).or_default().push(id);
    }
    let groups: Vec<Group> = members
        .into_iter()
        .filter(|(_, ids)| ids.len() >= GROUP_EVENT_MIN_SIZE)
        .map(|(label, members)| Group { label, members })
        .collect();
    GroupEvent { frame, active: !groups.is_empty(), groups }
}
