//! The 3D city: one box per visible element stacked on the layer of its
//! depth, connector lines to parent boxes, colors, texture coordinates, and
//! path-keyed diffs between scene revisions.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::dom::{DomNode, DomTree, MatchText, NodePath};
use crate::error::{Error, Result};
use crate::layout::{crop_rect, GeometryMap, Rect};
use crate::query::{apply_filters, FilterSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorMode {
    #[default]
    PerLayer,
    TagHash,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TextureMode {
    #[default]
    None,
    LeavesOnly,
    AllBoxes,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StyleConfig {
    /// World units between consecutive depth layers.
    pub layer_gap: f64,
    pub box_height: f64,
    pub color_mode: ColorMode,
    pub texture_mode: TextureMode,
    /// World units per CSS pixel.
    pub world_scale: f64,
}

impl Default for StyleConfig {
    fn default() -> Self {
        StyleConfig {
            layer_gap: 1.0,
            box_height: 0.2,
            color_mode: ColorMode::PerLayer,
            texture_mode: TextureMode::None,
            world_scale: 0.001,
        }
    }
}

impl StyleConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidStyle(format!("{name} must be positive, got {v}")))
            }
        };
        positive("layer_gap", self.layer_gap)?;
        positive("box_height", self.box_height)?;
        positive("world_scale", self.world_scale)
    }
}

/// sRGB color, 8 bits per channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rgb(pub [u8; 3]);

/// Per-layer palette, indexed by `depth % 12`.
pub const LAYER_PALETTE: [Rgb; 12] = [
    Rgb([0x8d, 0xd3, 0xc7]),
    Rgb([0xff, 0xff, 0xb3]),
    Rgb([0xbe, 0xba, 0xda]),
    Rgb([0xfb, 0x80, 0x72]),
    Rgb([0x80, 0xb1, 0xd3]),
    Rgb([0xfd, 0xb4, 0x62]),
    Rgb([0xb3, 0xde, 0x69]),
    Rgb([0xfc, 0xcd, 0xe5]),
    Rgb([0xd9, 0xd9, 0xd9]),
    Rgb([0xbc, 0x80, 0xbd]),
    Rgb([0xcc, 0xeb, 0xc5]),
    Rgb([0xff, 0xed, 0x6f]),
];

const TAG_SATURATION: f64 = 0.65;
const TAG_LIGHTNESS: f64 = 0.55;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |hash, &b| (hash ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Hue in degrees assigned to a tag name in tag-hash mode.
pub fn tag_hue(tag: &str) -> u16 {
    (fnv1a64(tag.to_ascii_lowercase().as_bytes()) % 360) as u16
}

fn hsl_to_rgb(hue: f64, saturation: f64, lightness: f64) -> Rgb {
    let chroma = (1.0 - (2.0 * lightness - 1.0).abs()) * saturation;
    let sector = hue / 60.0;
    let x = chroma * (1.0 - (sector % 2.0 - 1.0).abs());
    let (r, g, b) = match sector as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    let m = lightness - chroma / 2.0;
    let channel = |c: f64| ((c + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    Rgb([channel(r), channel(g), channel(b)])
}

pub fn color_for(node: &DomNode, mode: ColorMode) -> Rgb {
    match mode {
        ColorMode::PerLayer => LAYER_PALETTE[node.depth % LAYER_PALETTE.len()],
        ColorMode::TagHash => hsl_to_rgb(f64::from(tag_hue(&node.tag)), TAG_SATURATION, TAG_LIGHTNESS),
    }
}

/// Normalized region of the page screenshot; v grows upward, so the top of
/// the page is at v = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UvRect {
    pub u0: f64,
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
}

pub fn texture_uv(rect: Rect, page_w: f64, page_h: f64) -> Result<UvRect> {
    if !(page_w.is_finite() && page_w > 0.0 && page_h.is_finite() && page_h > 0.0) {
        return Err(Error::InvalidPageSize {
            w: page_w,
            h: page_h,
        });
    }
    if !(rect.area() > 0.0) {
        return Err(Error::DegenerateTextureRegion);
    }
    let unit = |v: f64| v.clamp(0.0, 1.0);
    Ok(UvRect {
        u0: unit(rect.x / page_w),
        v0: unit(1.0 - rect.bottom() / page_h),
        u1: unit(rect.right() / page_w),
        v1: unit(1.0 - rect.y / page_h),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneBox {
    pub path: NodePath,
    /// Box center; y is `depth * layer_gap`.
    pub position: [f64; 3],
    pub size: [f64; 3],
    pub color: Rgb,
    pub uv: Option<UvRect>,
    pub match_text: MatchText,
    pub depth: usize,
}

/// Line from the bottom-center of a child box to the top-center of its
/// parent's box.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectorLine {
    pub from: NodePath,
    pub to: NodePath,
    pub a: [f64; 3],
    pub b: [f64; 3],
}

/// A renderable city. Boxes are kept in document (path) order.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub revision: u64,
    pub style: StyleConfig,
    pub boxes: Vec<SceneBox>,
    pub lines: Vec<ConnectorLine>,
    pub visible_count: usize,
    pub max_depth: usize,
    /// Content hash of the page screenshot the uv coordinates refer to.
    pub screenshot_ref: Option<String>,
}

impl Scene {
    pub fn empty(style: StyleConfig) -> Self {
        Scene {
            revision: 0,
            style,
            boxes: Vec::new(),
            lines: Vec::new(),
            visible_count: 0,
            max_depth: 0,
            screenshot_ref: None,
        }
    }

    pub fn box_at(&self, path: &NodePath) -> Option<&SceneBox> {
        self.boxes
            .binary_search_by(|b| b.path.cmp(path))
            .ok()
            .map(|i| &self.boxes[i])
    }
}

/// Connector lines for every box whose parent box is also present.
pub fn connector_lines(boxes: &[SceneBox]) -> Vec<ConnectorLine> {
    let by_path: HashMap<&NodePath, &SceneBox> = boxes.iter().map(|b| (&b.path, b)).collect();
    boxes
        .iter()
        .filter_map(|child| {
            let parent_path = child.path.parent()?;
            let parent = by_path.get(&parent_path)?;
            let [cx, cy, cz] = child.position;
            let [px, py, pz] = parent.position;
            Some(ConnectorLine {
                from: child.path.clone(),
                to: parent_path,
                a: [cx, cy - child.size[1] / 2.0, cz],
                b: [px, py + parent.size[1] / 2.0, pz],
            })
        })
        .collect()
}

pub fn build_scene(
    tree: &DomTree,
    geom: &GeometryMap,
    filter: &FilterSpec,
    style: &StyleConfig,
) -> Result<Scene> {
    style.validate()?;
    let visible = apply_filters(tree, geom, filter)?;
    let scale = style.world_scale;

    let mut boxes = Vec::with_capacity(visible.len());
    for id in visible {
        let node = tree.node(id)?;
        let path = tree.node_path(id)?;
        let full = geom
            .rect(&path)
            .ok_or_else(|| Error::MissingGeometry(path.clone()))?;
        let Some(rect) = crop_rect(full, &geom.viewport, filter.cropping) else {
            continue;
        };
        let textured = match style.texture_mode {
            TextureMode::None => false,
            TextureMode::LeavesOnly => node.is_leaf(),
            TextureMode::AllBoxes => true,
        };
        let uv = if textured {
            Some(texture_uv(rect, geom.page_w, geom.page_h)?)
        } else {
            None
        };
        let (cx, cz) = rect.center();
        boxes.push(SceneBox {
            position: [scale * cx, node.depth as f64 * style.layer_gap, scale * cz],
            size: [scale * rect.w, style.box_height, scale * rect.h],
            color: color_for(node, style.color_mode),
            uv,
            match_text: tree.serialize_node(id)?,
            depth: node.depth,
            path,
        });
    }

    let lines = connector_lines(&boxes);
    Ok(Scene {
        revision: 0,
        style: *style,
        visible_count: boxes.len(),
        boxes,
        lines,
        max_depth: tree.max_depth(),
        screenshot_ref: None,
    })
}

/// Path-keyed changes between two scene revisions. Scene-level metadata of
/// the target rides along so the diff alone reproduces the target.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneDiff {
    pub base_revision: u64,
    pub target_revision: u64,
    pub added: Vec<SceneBox>,
    pub removed: Vec<NodePath>,
    pub changed: Vec<SceneBox>,
    pub style: StyleConfig,
    pub max_depth: usize,
    pub screenshot_ref: Option<String>,
}

impl SceneDiff {
    /// A diff that moves nothing and keeps the revision.
    pub fn unchanged(scene: &Scene) -> Self {
        SceneDiff {
            base_revision: scene.revision,
            target_revision: scene.revision,
            added: Vec::new(),
            removed: Vec::new(),
            changed: Vec::new(),
            style: scene.style,
            max_depth: scene.max_depth,
            screenshot_ref: scene.screenshot_ref.clone(),
        }
    }

    /// No box was added, removed or changed.
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.changed.is_empty()
    }
}

pub fn diff_scenes(old: &Scene, new: &Scene) -> Result<SceneDiff> {
    if old.revision >= new.revision {
        return Err(Error::RevisionOrder {
            old: old.revision,
            new: new.revision,
        });
    }
    let before: HashMap<&NodePath, &SceneBox> = old.boxes.iter().map(|b| (&b.path, b)).collect();
    let mut added = Vec::new();
    let mut changed = Vec::new();
    for b in &new.boxes {
        match before.get(&b.path) {
            None => added.push(b.clone()),
            Some(previous) if *previous != b => changed.push(b.clone()),
            Some(_) => {}
        }
    }
    let after: HashMap<&NodePath, &SceneBox> = new.boxes.iter().map(|b| (&b.path, b)).collect();
    let removed = old
        .boxes
        .iter()
        .filter(|b| !after.contains_key(&b.path))
        .map(|b| b.path.clone())
        .collect();

    Ok(SceneDiff {
        base_revision: old.revision,
        target_revision: new.revision,
        added,
        removed,
        changed,
        style: new.style,
        max_depth: new.max_depth,
        screenshot_ref: new.screenshot_ref.clone(),
    })
}

/// Applies `diff` to the scene it was computed against.
pub fn apply_diff(old: &Scene, diff: &SceneDiff) -> Result<Scene> {
    if diff.base_revision != old.revision {
        return Err(Error::DiffBaseMismatch {
            diff: diff.base_revision,
            scene: old.revision,
        });
    }
    let mut boxes: BTreeMap<NodePath, SceneBox> = old
        .boxes
        .iter()
        .map(|b| (b.path.clone(), b.clone()))
        .collect();
    for path in &diff.removed {
        boxes.remove(path);
    }
    for b in diff.added.iter().chain(&diff.changed) {
        boxes.insert(b.path.clone(), b.clone());
    }
    let boxes: Vec<SceneBox> = boxes.into_values().collect();
    let lines = connector_lines(&boxes);
    Ok(Scene {
        revision: diff.target_revision,
        style: diff.style,
        visible_count: boxes.len(),
        boxes,
        lines,
        max_depth: diff.max_depth,
        screenshot_ref: diff.screenshot_ref.clone(),
    })
}
