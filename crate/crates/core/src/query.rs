//! Visibility filters: layer range, text search, subtree isolation and
//! viewport cropping, evaluated as one conjunction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dom::{DomTree, NodeId, NodePath};
use crate::error::{Error, Result};
use crate::layout::{crop_rect, GeometryMap};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterSpec {
    pub depth_min: usize,
    /// `None` means up to the tree's maximum depth.
    pub depth_max: Option<usize>,
    /// Case-insensitive literal substring; empty matches everything.
    pub search: String,
    pub subtree_root: Option<NodePath>,
    pub cropping: bool,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            depth_min: 0,
            depth_max: None,
            search: String::new(),
            subtree_root: None,
            cropping: true,
        }
    }
}

impl FilterSpec {
    /// Checks the depth bounds; subtree roots are checked against a tree when
    /// the filter is applied.
    pub fn validate(&self) -> Result<()> {
        match self.depth_max {
            Some(max) if max < self.depth_min => Err(Error::InvalidFilter(format!(
                "depth_min {} exceeds depth_max {}",
                self.depth_min, max
            ))),
            _ => Ok(()),
        }
    }

    pub fn validate_for(&self, tree: &DomTree) -> Result<()> {
        self.validate()?;
        if let Some(root) = &self.subtree_root {
            tree.resolve_path(root)?;
        }
        Ok(())
    }

    pub fn admits_depth(&self, depth: usize) -> bool {
        depth >= self.depth_min && self.depth_max.is_none_or(|max| depth <= max)
    }
}

pub fn match_search(text: &str, query: &str) -> bool {
    query.is_empty() || text.to_lowercase().contains(&query.to_lowercase())
}

/// The node at `root` and all of its descendants.
pub fn subtree_ids(tree: &DomTree, root: &NodePath) -> Result<BTreeSet<NodeId>> {
    let id = tree.resolve_path(root)?;
    Ok(tree.subtree(id)?.collect())
}

/// Nodes passing every active filter, in document order.
pub fn apply_filters(tree: &DomTree, geom: &GeometryMap, filter: &FilterSpec) -> Result<Vec<NodeId>> {
    filter.validate()?;
    let candidates: Vec<NodeId> = match &filter.subtree_root {
        Some(root) => {
            let id = tree.resolve_path(root)?;
            tree.subtree(id)?.collect()
        }
        None => tree.ids().collect(),
    };
    let query = filter.search.to_lowercase();

    let mut passing = Vec::new();
    for id in candidates {
        let node = tree.node(id)?;
        if !filter.admits_depth(node.depth) {
            continue;
        }
        if !query.is_empty() {
            let text = tree.serialize_node(id)?;
            if !text.as_str().to_lowercase().contains(&query) {
                continue;
            }
        }
        if filter.cropping {
            let path = tree.path_ref(id)?;
            let rect = geom
                .rect(path)
                .ok_or_else(|| Error::MissingGeometry(path.clone()))?;
            if crop_rect(rect, &geom.viewport, true).is_none() {
                continue;
            }
        }
        passing.push(id);
    }
    Ok(passing)
}
