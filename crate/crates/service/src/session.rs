//! Session state: the current document, geometry, filter and style, and the
//! published scene they produce. A single writer drives every transition;
//! each one either publishes a new revision or leaves the state untouched.

use std::sync::Arc;

use domcity_core::dom::{parse_html, DomTree};
use domcity_core::layout::{ingest_geometry, synthetic_layout, GeometryMap, Measurement, Viewport};
use domcity_core::query::FilterSpec;
use domcity_core::scene::{build_scene, diff_scenes, Scene, SceneDiff, StyleConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Viewport assumed for inputs that arrive without browser geometry.
pub const DEFAULT_VIEWPORT: Viewport = Viewport {
    w: 1280.0,
    h: 800.0,
    scroll_x: 0.0,
    scroll_y: 0.0,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    File,
    Url,
    LivePush,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Screenshot {
    pub png: Vec<u8>,
    pub page_w: f64,
    pub page_h: f64,
}

impl Screenshot {
    /// Hex SHA-256 of the image bytes.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(&self.png))
    }
}

/// One captured state of a page.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub html: String,
    pub measurements: Option<Vec<Measurement>>,
    pub viewport: Option<Viewport>,
    pub screenshot: Option<Screenshot>,
    pub origin: Origin,
}

impl Snapshot {
    pub fn from_html(html: impl Into<String>, origin: Origin) -> Self {
        Snapshot {
            html: html.into(),
            measurements: None,
            viewport: None,
            screenshot: None,
            origin,
        }
    }

    /// Reads file contents, replacing invalid UTF-8.
    pub fn from_file_bytes(bytes: &[u8]) -> Self {
        Snapshot::from_html(String::from_utf8_lossy(bytes), Origin::File)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum UpdateMode {
    #[default]
    Continuous,
    Manual,
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("snapshot rejected: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Core(#[from] domcity_core::Error),
}

/// Parsed and laid-out snapshot, ready to become the current document.
#[derive(Clone, Debug)]
struct Document {
    tree: DomTree,
    geometry: GeometryMap,
    screenshot: Option<(String, Arc<Vec<u8>>)>,
}

impl Document {
    fn prepare(snapshot: Snapshot, default_viewport: Viewport) -> Result<Self, SessionError> {
        let tree = parse_html(snapshot.html.as_bytes());
        let geometry = match (&snapshot.measurements, snapshot.viewport) {
            (Some(_), None) => {
                return Err(SessionError::Snapshot(
                    "measurements require a viewport".into(),
                ))
            }
            (Some(measurements), Some(viewport)) => ingest_geometry(&tree, measurements, viewport)?,
            (None, viewport) => {
                let viewport = viewport.unwrap_or(default_viewport);
                viewport.validate()?;
                synthetic_layout(&tree, viewport)
            }
        };
        let screenshot = snapshot.screenshot.map(|s| {
            let hash = s.content_hash();
            (hash, Arc::new(s.png))
        });
        Ok(Document {
            tree,
            geometry,
            screenshot,
        })
    }
}

pub struct SessionState {
    current: Option<Document>,
    staged: Option<Document>,
    filter: FilterSpec,
    style: StyleConfig,
    scene: Scene,
    update_mode: UpdateMode,
    default_viewport: Viewport,
}

impl SessionState {
    pub fn new(filter: FilterSpec, style: StyleConfig) -> Result<Self, SessionError> {
        filter.validate()?;
        style.validate()?;
        Ok(SessionState {
            current: None,
            staged: None,
            filter,
            style,
            scene: Scene::empty(style),
            update_mode: UpdateMode::Continuous,
            default_viewport: DEFAULT_VIEWPORT,
        })
    }

    pub fn with_default_viewport(mut self, viewport: Viewport) -> Result<Self, SessionError> {
        viewport.validate()?;
        self.default_viewport = viewport;
        Ok(self)
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn revision(&self) -> u64 {
        self.scene.revision
    }

    pub fn filter(&self) -> &FilterSpec {
        &self.filter
    }

    pub fn style(&self) -> &StyleConfig {
        &self.style
    }

    pub fn update_mode(&self) -> UpdateMode {
        self.update_mode
    }

    pub fn has_staged(&self) -> bool {
        self.staged.is_some()
    }

    pub fn tree(&self) -> Option<&DomTree> {
        self.current.as_ref().map(|d| &d.tree)
    }

    pub fn geometry(&self) -> Option<&GeometryMap> {
        self.current.as_ref().map(|d| &d.geometry)
    }

    /// Screenshot bytes for a content hash held by the current or staged
    /// document.
    pub fn screenshot(&self, hash: &str) -> Option<Arc<Vec<u8>>> {
        [self.current.as_ref(), self.staged.as_ref()]
            .into_iter()
            .flatten()
            .filter_map(|d| d.screenshot.as_ref())
            .find(|(h, _)| h == hash)
            .map(|(_, png)| Arc::clone(png))
    }

    /// Ingests a snapshot. Continuous mode publishes a new revision and
    /// returns its diff; manual mode stages it (replacing any earlier staged
    /// snapshot) and returns `None`.
    pub fn handle_snapshot(&mut self, snapshot: Snapshot) -> Result<Option<SceneDiff>, SessionError> {
        let document = Document::prepare(snapshot, self.default_viewport)?;
        match self.update_mode {
            UpdateMode::Continuous => self.commit_document(document).map(Some),
            UpdateMode::Manual => {
                self.staged = Some(document);
                Ok(None)
            }
        }
    }

    /// Publishes the staged snapshot, if any; otherwise returns an empty diff
    /// at the current revision.
    pub fn refresh(&mut self) -> Result<SceneDiff, SessionError> {
        match self.staged.take() {
            Some(document) => self.commit_document(document),
            None => Ok(SceneDiff::unchanged(&self.scene)),
        }
    }

    pub fn set_filter(&mut self, filter: FilterSpec) -> Result<SceneDiff, SessionError> {
        match &self.current {
            Some(document) => filter.validate_for(&document.tree)?,
            None => filter.validate()?,
        }
        let scene = self.render(self.current.as_ref(), &filter, &self.style)?;
        let diff = self.publish(scene)?;
        self.filter = filter;
        Ok(diff)
    }

    pub fn set_style(&mut self, style: StyleConfig) -> Result<SceneDiff, SessionError> {
        style.validate()?;
        let scene = self.render(self.current.as_ref(), &self.filter, &style)?;
        let diff = self.publish(scene)?;
        self.style = style;
        Ok(diff)
    }

    /// Switching back to continuous mode publishes anything staged.
    pub fn set_update_mode(&mut self, mode: UpdateMode) -> Result<Option<SceneDiff>, SessionError> {
        self.update_mode = mode;
        match (mode, self.staged.is_some()) {
            (UpdateMode::Continuous, true) => self.refresh().map(Some),
            _ => Ok(None),
        }
    }

    /// Scene rebuilt from scratch from the current inputs, stamped like the
    /// published one.
    pub fn recompute(&self) -> Result<Scene, SessionError> {
        let mut scene = self.render(self.current.as_ref(), &self.filter, &self.style)?;
        scene.revision = self.scene.revision;
        Ok(scene)
    }

    fn commit_document(&mut self, document: Document) -> Result<SceneDiff, SessionError> {
        // An isolated subtree that no longer exists falls back to the whole tree.
        let mut filter = self.filter.clone();
        if let Some(root) = &filter.subtree_root {
            if document.tree.resolve_path(root).is_err() {
                log::warn!("subtree root {root} not present in new snapshot; clearing isolation");
                filter.subtree_root = None;
            }
        }
        let scene = self.render(Some(&document), &filter, &self.style)?;
        let diff = self.publish(scene)?;
        self.current = Some(document);
        self.filter = filter;
        Ok(diff)
    }

    fn render(
        &self,
        document: Option<&Document>,
        filter: &FilterSpec,
        style: &StyleConfig,
    ) -> Result<Scene, SessionError> {
        let Some(document) = document else {
            return Ok(Scene::empty(*style));
        };
        let mut scene = build_scene(&document.tree, &document.geometry, filter, style)?;
        scene.screenshot_ref = document.screenshot.as_ref().map(|(hash, _)| hash.clone());
        Ok(scene)
    }

    fn publish(&mut self, mut scene: Scene) -> Result<SceneDiff, SessionError> {
        scene.revision = self.scene.revision + 1;
        let diff = diff_scenes(&self.scene, &scene)?;
        self.scene = scene;
        Ok(diff)
    }
}
