//! Element tree parsed from HTML, with stable path identities and the
//! serialized "match text" used for search, hover and popovers.

use std::fmt;

use scraper::{Html, Node};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elements that never carry a closing tag (HTML living standard).
pub const VOID_ELEMENTS: [&str; 13] = [
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track",
    "wbr",
];

pub fn is_void_element(tag: &str) -> bool {
    VOID_ELEMENTS.contains(&tag)
}

/// Opaque node handle. Ids are assigned in document order, so comparing ids
/// compares document positions within one tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Child-index steps from the root element, counting element children only.
///
/// Paths order lexicographically, which for paths of one tree is document
/// (pre-)order: a parent sorts before its descendants, and earlier siblings
/// before later ones.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodePath(Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn new(steps: Vec<usize>) -> Self {
        NodePath(steps)
    }

    pub fn steps(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<NodePath> {
        self.0.split_last().map(|(_, rest)| NodePath(rest.to_vec()))
    }

    pub fn child(&self, index: usize) -> NodePath {
        let mut steps = self.0.clone();
        steps.push(index);
        NodePath(steps)
    }

    /// True when `self` is an ancestor of `other` (never for equal paths).
    pub fn is_strict_prefix_of(&self, other: &NodePath) -> bool {
        self.0.len() < other.0.len() && other.0.starts_with(&self.0)
    }
}

impl From<Vec<usize>> for NodePath {
    fn from(steps: Vec<usize>) -> Self {
        NodePath(steps)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{step}")?;
        }
        f.write_str("]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomNode {
    pub id: NodeId,
    /// Lowercase element name.
    pub tag: String,
    /// Attributes in source order; duplicates keep their first occurrence.
    pub attributes: Vec<(String, String)>,
    /// Text of the immediate text children, whitespace-collapsed.
    pub direct_text: String,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub depth: usize,
}

impl DomNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Serialized opening tag, direct text and closing tag of one element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatchText(String);

impl MatchText {
    pub fn new(text: impl Into<String>) -> Self {
        MatchText(text.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for MatchText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for MatchText {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Element tree. Nodes are stored in document order; the root element
/// (`<html>`) is always present and has id 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomTree {
    nodes: Vec<DomNode>,
    paths: Vec<NodePath>,
    descendants: Vec<usize>,
    max_depth: usize,
}

impl DomTree {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn node(&self, id: NodeId) -> Result<&DomNode> {
        self.nodes.get(id.0).ok_or(Error::NoSuchNode(id))
    }

    /// Nodes in document order.
    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &DomNode> + '_ {
        self.nodes.iter()
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    /// Number of element descendants (children, grandchildren, ...).
    pub fn descendant_count(&self, id: NodeId) -> Result<usize> {
        self.descendants
            .get(id.0)
            .copied()
            .ok_or(Error::NoSuchNode(id))
    }

    /// The node and its descendants, in document order.
    pub fn subtree(&self, id: NodeId) -> Result<impl ExactSizeIterator<Item = NodeId>> {
        let count = self.descendant_count(id)?;
        Ok((id.0..id.0 + count + 1).map(NodeId))
    }

    pub fn node_path(&self, id: NodeId) -> Result<NodePath> {
        self.path_ref(id).cloned()
    }

    pub fn path_ref(&self, id: NodeId) -> Result<&NodePath> {
        self.paths.get(id.0).ok_or(Error::NoSuchNode(id))
    }

    pub fn resolve_path(&self, path: &NodePath) -> Result<NodeId> {
        let mut current = &self.nodes[0];
        for (step, &index) in path.steps().iter().enumerate() {
            match current.children.get(index) {
                Some(&child) => current = &self.nodes[child.0],
                None => {
                    return Err(Error::PathNotResolvable {
                        path: path.clone(),
                        step,
                    })
                }
            }
        }
        Ok(current.id)
    }

    pub fn serialize_node(&self, id: NodeId) -> Result<MatchText> {
        let node = self.node(id)?;
        let mut text = String::with_capacity(node.tag.len() * 2 + node.direct_text.len() + 8);
        text.push('<');
        text.push_str(&node.tag);
        for (name, value) in &node.attributes {
            text.push(' ');
            text.push_str(name);
            text.push_str("=\"");
            text.push_str(value);
            text.push('"');
        }
        text.push('>');
        if !is_void_element(&node.tag) {
            text.push_str(&node.direct_text);
            text.push_str("</");
            text.push_str(&node.tag);
            text.push('>');
        }
        Ok(MatchText(text))
    }

    /// Builds a tree from elements listed in document order, each naming its
    /// parent (`None` only for the first, the root).
    fn from_flat(flat: Vec<FlatElement>) -> DomTree {
        debug_assert!(!flat.is_empty() && flat[0].parent.is_none());
        let mut nodes: Vec<DomNode> = Vec::with_capacity(flat.len());
        let mut paths: Vec<NodePath> = Vec::with_capacity(flat.len());
        let mut max_depth = 0;
        for (index, element) in flat.into_iter().enumerate() {
            let id = NodeId(index);
            let (depth, path) = match element.parent {
                None => (0, NodePath::root()),
                Some(parent) => {
                    let parent_node = &mut nodes[parent.0];
                    parent_node.children.push(id);
                    let path = paths[parent.0].child(parent_node.children.len() - 1);
                    (parent_node.depth + 1, path)
                }
            };
            max_depth = max_depth.max(depth);
            nodes.push(DomNode {
                id,
                tag: element.tag,
                attributes: element.attributes,
                direct_text: collapse_whitespace(&element.text),
                parent: element.parent,
                children: Vec::new(),
                depth,
            });
            paths.push(path);
        }

        let mut descendants = vec![0usize; nodes.len()];
        for index in (1..nodes.len()).rev() {
            let parent = nodes[index].parent.expect("non-root node has a parent").0;
            descendants[parent] += descendants[index] + 1;
        }

        DomTree {
            nodes,
            paths,
            descendants,
            max_depth,
        }
    }
}

struct FlatElement {
    parent: Option<NodeId>,
    tag: String,
    attributes: Vec<(String, String)>,
    text: String,
}

fn collapse_whitespace(text: &str) -> String {
    text.split_ascii_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses a full HTML document. Invalid UTF-8 is replaced lossily; implied
/// `html`/`head`/`body` elements are always materialized.
pub fn parse_html(html: impl AsRef<[u8]>) -> DomTree {
    let source = String::from_utf8_lossy(html.as_ref());
    let document = Html::parse_document(&source);

    let mut flat: Vec<FlatElement> = Vec::new();
    // (node, parent id) pairs; children pushed in reverse to pop in order.
    let mut stack = Vec::new();
    for child in document.tree.root().children().rev() {
        stack.push((child, None));
    }
    while let Some((node, parent)) = stack.pop() {
        let Node::Element(element) = node.value() else {
            continue;
        };
        let id = NodeId(flat.len());
        let mut attributes: Vec<(String, String)> = Vec::with_capacity(element.attrs.len());
        for (name, value) in element.attrs.iter() {
            let name = match &name.prefix {
                Some(prefix) => format!("{}:{}", prefix, name.local),
                None => name.local.to_string(),
            };
            if !attributes.iter().any(|(existing, _)| *existing == name) {
                attributes.push((name, value.to_string()));
            }
        }
        let mut text = String::new();
        for child in node.children() {
            if let Node::Text(t) = child.value() {
                text.push_str(t);
            }
        }
        flat.push(FlatElement {
            parent,
            tag: element.name().to_ascii_lowercase(),
            attributes,
            text,
        });
        for child in node.children().rev() {
            stack.push((child, Some(id)));
        }
    }
    DomTree::from_flat(flat)
}
