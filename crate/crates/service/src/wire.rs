//! JSON documents exchanged with viewers and written by `domcity export`.
//!
//! Scene and diff documents are canonical: fixed field order and every float
//! rounded to 6 significant digits, so export -> parse -> export is
//! byte-identical.

use base64::Engine as _;
use domcity_core::dom::{MatchText, NodePath};
use domcity_core::layout::{Measurement, Viewport};
use domcity_core::scene::{ConnectorLine, Rgb, Scene, SceneBox, SceneDiff, StyleConfig, UvRect};
use serde::{Deserialize, Serialize, Serializer};

use crate::session::{Origin, Screenshot, Snapshot};

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid base64 screenshot: {0}")]
    Base64(#[from] base64::DecodeError),
    #[error("{0}")]
    Invalid(String),
}

/// Rounds to 6 significant digits. Idempotent, so parsed values re-serialize
/// to the same text.
pub fn round_sig6(value: f64) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return if value == 0.0 { 0.0 } else { value };
    }
    format!("{value:.5e}").parse().expect("formatted float parses")
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(transparent)]
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(round_sig6(self.0))
    }
}

fn nums<const N: usize>(values: [f64; N]) -> [Num; N] {
    values.map(Num)
}

fn floats<const N: usize>(values: [Num; N]) -> [f64; N] {
    values.map(|n| n.0)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StyleDoc {
    layer_gap: Num,
    box_height: Num,
    color_mode: domcity_core::scene::ColorMode,
    texture_mode: domcity_core::scene::TextureMode,
    world_scale: Num,
}

impl From<&StyleConfig> for StyleDoc {
    fn from(style: &StyleConfig) -> Self {
        StyleDoc {
            layer_gap: Num(style.layer_gap),
            box_height: Num(style.box_height),
            color_mode: style.color_mode,
            texture_mode: style.texture_mode,
            world_scale: Num(style.world_scale),
        }
    }
}

impl From<StyleDoc> for StyleConfig {
    fn from(doc: StyleDoc) -> Self {
        StyleConfig {
            layer_gap: doc.layer_gap.0,
            box_height: doc.box_height.0,
            color_mode: doc.color_mode,
            texture_mode: doc.texture_mode,
            world_scale: doc.world_scale.0,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxDoc {
    path: NodePath,
    pos: [Num; 3],
    size: [Num; 3],
    color: [u8; 3],
    uv: Option<[Num; 4]>,
    depth: usize,
    match_text: MatchText,
}

impl From<&SceneBox> for BoxDoc {
    fn from(b: &SceneBox) -> Self {
        BoxDoc {
            path: b.path.clone(),
            pos: nums(b.position),
            size: nums(b.size),
            color: b.color.0,
            uv: b.uv.map(|uv| nums([uv.u0, uv.v0, uv.u1, uv.v1])),
            depth: b.depth,
            match_text: b.match_text.clone(),
        }
    }
}

impl From<BoxDoc> for SceneBox {
    fn from(doc: BoxDoc) -> Self {
        SceneBox {
            path: doc.path,
            position: floats(doc.pos),
            size: floats(doc.size),
            color: Rgb(doc.color),
            uv: doc.uv.map(|uv| {
                let [u0, v0, u1, v1] = floats(uv);
                UvRect { u0, v0, u1, v1 }
            }),
            match_text: doc.match_text,
            depth: doc.depth,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineDoc {
    from: NodePath,
    to: NodePath,
    a: [Num; 3],
    b: [Num; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    revision: u64,
    style: StyleDoc,
    boxes: Vec<BoxDoc>,
    lines: Vec<LineDoc>,
    visible_count: usize,
    max_depth: usize,
    screenshot_ref: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiffDoc {
    base_revision: u64,
    target_revision: u64,
    added: Vec<BoxDoc>,
    removed: Vec<NodePath>,
    changed: Vec<BoxDoc>,
    style: StyleDoc,
    max_depth: usize,
    screenshot_ref: Option<String>,
}

fn scene_doc(scene: &Scene) -> SceneDoc {
    SceneDoc {
        revision: scene.revision,
        style: StyleDoc::from(&scene.style),
        boxes: scene.boxes.iter().map(BoxDoc::from).collect(),
        lines: scene
            .lines
            .iter()
            .map(|l| LineDoc {
                from: l.from.clone(),
                to: l.to.clone(),
                a: nums(l.a),
                b: nums(l.b),
            })
            .collect(),
        visible_count: scene.visible_count,
        max_depth: scene.max_depth,
        screenshot_ref: scene.screenshot_ref.clone(),
    }
}

fn diff_doc(diff: &SceneDiff) -> DiffDoc {
    DiffDoc {
        base_revision: diff.base_revision,
        target_revision: diff.target_revision,
        added: diff.added.iter().map(BoxDoc::from).collect(),
        removed: diff.removed.clone(),
        changed: diff.changed.iter().map(BoxDoc::from).collect(),
        style: StyleDoc::from(&diff.style),
        max_depth: diff.max_depth,
        screenshot_ref: diff.screenshot_ref.clone(),
    }
}

/// Canonical, pretty-printed scene document with a trailing newline.
pub fn scene_to_json(scene: &Scene) -> String {
    let mut out = serde_json::to_string_pretty(&scene_doc(scene)).expect("scene serializes");
    out.push('\n');
    out
}

/// Single-line scene document, used in update-stream frames.
pub fn scene_to_compact_json(scene: &Scene) -> String {
    serde_json::to_string(&scene_doc(scene)).expect("scene serializes")
}

pub fn scene_from_json(text: &str) -> Result<Scene, WireError> {
    let doc: SceneDoc = serde_json::from_str(text)?;
    if doc.visible_count != doc.boxes.len() {
        return Err(WireError::Invalid(format!(
            "visible_count {} does not match {} boxes",
            doc.visible_count,
            doc.boxes.len()
        )));
    }
    Ok(Scene {
        revision: doc.revision,
        style: doc.style.into(),
        boxes: doc.boxes.into_iter().map(SceneBox::from).collect(),
        lines: doc
            .lines
            .into_iter()
            .map(|l| ConnectorLine {
                from: l.from,
                to: l.to,
                a: floats(l.a),
                b: floats(l.b),
            })
            .collect(),
        visible_count: doc.visible_count,
        max_depth: doc.max_depth,
        screenshot_ref: doc.screenshot_ref,
    })
}

pub fn diff_to_json(diff: &SceneDiff) -> String {
    serde_json::to_string(&diff_doc(diff)).expect("diff serializes")
}

pub fn diff_from_json(text: &str) -> Result<SceneDiff, WireError> {
    let doc: DiffDoc = serde_json::from_str(text)?;
    Ok(SceneDiff {
        base_revision: doc.base_revision,
        target_revision: doc.target_revision,
        added: doc.added.into_iter().map(SceneBox::from).collect(),
        removed: doc.removed,
        changed: doc.changed.into_iter().map(SceneBox::from).collect(),
        style: doc.style.into(),
        max_depth: doc.max_depth,
        screenshot_ref: doc.screenshot_ref,
    })
}

#[derive(Serialize, Deserialize)]
struct ScreenshotDoc {
    png_base64: String,
    page_w: f64,
    page_h: f64,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct SnapshotDoc {
    html: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measurements: Option<Vec<Measurement>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    viewport: Option<Viewport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    screenshot: Option<ScreenshotDoc>,
    #[serde(default = "live_push")]
    origin: Origin,
}

fn live_push() -> Origin {
    Origin::LivePush
}

impl TryFrom<SnapshotDoc> for Snapshot {
    type Error = WireError;

    fn try_from(doc: SnapshotDoc) -> Result<Self, WireError> {
        let screenshot = match doc.screenshot {
            Some(s) => Some(Screenshot {
                png: base64::engine::general_purpose::STANDARD.decode(s.png_base64)?,
                page_w: s.page_w,
                page_h: s.page_h,
            }),
            None => None,
        };
        Ok(Snapshot {
            html: doc.html,
            measurements: doc.measurements,
            viewport: doc.viewport,
            screenshot,
            origin: doc.origin,
        })
    }
}

pub fn snapshot_from_json(text: &str) -> Result<Snapshot, WireError> {
    let doc: SnapshotDoc = serde_json::from_str(text)?;
    Snapshot::try_from(doc)
}

pub(crate) fn snapshot_from_value(value: serde_json::Value) -> Result<Snapshot, WireError> {
    let doc: SnapshotDoc = serde_json::from_value(value)?;
    Snapshot::try_from(doc)
}

pub fn snapshot_to_json(snapshot: &Snapshot) -> String {
    let doc = SnapshotDoc {
        html: snapshot.html.clone(),
        measurements: snapshot.measurements.clone(),
        viewport: snapshot.viewport,
        screenshot: snapshot.screenshot.as_ref().map(|s| ScreenshotDoc {
            png_base64: base64::engine::general_purpose::STANDARD.encode(&s.png),
            page_w: s.page_w,
            page_h: s.page_h,
        }),
        origin: snapshot.origin,
    };
    serde_json::to_string(&doc).expect("snapshot serializes")
}
