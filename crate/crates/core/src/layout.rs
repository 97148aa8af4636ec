//! Page-plane geometry for every element: measured by a browser, or laid out
//! as a slice-and-dice treemap when no browser is involved.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dom::{DomTree, NodePath};
use crate::error::{Error, Result};

/// Side of the footprint given to hidden or unmeasured elements.
pub const EPSILON_SIZE: f64 = 1.0;

/// Axis-aligned rectangle in CSS pixels, page coordinates (origin top-left).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite()
    }

    /// Overlap of two rectangles; `None` unless it has positive area.
    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 > x0 && y1 > y0 {
            Some(Rect::new(x0, y0, x1 - x0, y1 - y0))
        } else {
            None
        }
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    fn epsilon_at(cx: f64, cy: f64) -> Rect {
        Rect::new(
            cx - EPSILON_SIZE / 2.0,
            cy - EPSILON_SIZE / 2.0,
            EPSILON_SIZE,
            EPSILON_SIZE,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub w: f64,
    pub h: f64,
    #[serde(default)]
    pub scroll_x: f64,
    #[serde(default)]
    pub scroll_y: f64,
}

impl Viewport {
    pub fn new(w: f64, h: f64) -> Result<Self> {
        let viewport = Viewport {
            w,
            h,
            scroll_x: 0.0,
            scroll_y: 0.0,
        };
        viewport.validate()?;
        Ok(viewport)
    }

    pub fn scrolled(mut self, scroll_x: f64, scroll_y: f64) -> Result<Self> {
        self.scroll_x = scroll_x;
        self.scroll_y = scroll_y;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w.is_finite() && self.w > 0.0 && self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidViewport(format!(
                "size {}x{} must be positive",
                self.w, self.h
            )));
        }
        if !(self.scroll_x.is_finite()
            && self.scroll_x >= 0.0
            && self.scroll_y.is_finite()
            && self.scroll_y >= 0.0)
        {
            return Err(Error::InvalidViewport(format!(
                "scroll offset ({}, {}) must be non-negative",
                self.scroll_x, self.scroll_y
            )));
        }
        Ok(())
    }

    /// The visible part of the page.
    pub fn window(&self) -> Rect {
        Rect::new(self.scroll_x, self.scroll_y, self.w, self.h)
    }
}

/// One element's browser-reported geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub path: NodePath,
    /// Border box in page coordinates.
    pub rect: Rect,
    /// Content overflow extents; 0 when unmeasured.
    #[serde(default)]
    pub scroll_w: f64,
    #[serde(default)]
    pub scroll_h: f64,
    /// False for `display: none` or zero-area elements.
    #[serde(default = "default_visible")]
    pub visible: bool,
}

fn default_visible() -> bool {
    true
}

impl Measurement {
    fn check(&self) -> Result<()> {
        let malformed = |reason: &str| Error::MalformedMeasurement {
            path: self.path.clone(),
            reason: reason.to_string(),
        };
        if !self.rect.is_finite() || !self.scroll_w.is_finite() || !self.scroll_h.is_finite() {
            return Err(malformed("non-finite value"));
        }
        if self.rect.w < 0.0 || self.rect.h < 0.0 {
            return Err(malformed("negative dimensions"));
        }
        if self.scroll_w < 0.0 || self.scroll_h < 0.0 {
            return Err(malformed("negative scroll extent"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometrySource {
    Measured,
    Synthetic,
}

/// Effective rectangle per element path, plus the viewport and page extents.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryMap {
    rects: BTreeMap<NodePath, Rect>,
    pub viewport: Viewport,
    pub page_w: f64,
    pub page_h: f64,
    pub source: GeometrySource,
}

impl GeometryMap {
    pub fn rect(&self, path: &NodePath) -> Option<Rect> {
        self.rects.get(path).copied()
    }

    /// Entries in document order.
    pub fn iter(&self) -> impl Iterator<Item = (&NodePath, &Rect)> {
        self.rects.iter()
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    fn from_rects(
        rects: BTreeMap<NodePath, Rect>,
        viewport: Viewport,
        source: GeometrySource,
    ) -> Self {
        let mut page_w: f64 = 0.0;
        let mut page_h: f64 = 0.0;
        for rect in rects.values() {
            page_w = page_w.max(rect.right());
            page_h = page_h.max(rect.bottom());
        }
        if page_w <= 0.0 {
            page_w = viewport.w;
        }
        if page_h <= 0.0 {
            page_h = viewport.h;
        }
        GeometryMap {
            rects,
            viewport,
            page_w,
            page_h,
            source,
        }
    }
}

/// Turns browser measurements into effective per-element rectangles.
///
/// Reported overflow widens a rect to its scroll extents. Elements that are
/// hidden, unmeasured, or end up with zero area get a 1x1 px footprint
/// centered on their parent's effective rect (the root falls back to the
/// center of the viewport window).
pub fn ingest_geometry(
    tree: &DomTree,
    measurements: &[Measurement],
    viewport: Viewport,
) -> Result<GeometryMap> {
    viewport.validate()?;

    let mut measured = vec![None; tree.len()];
    let mut unresolved = Vec::new();
    for measurement in measurements {
        measurement.check()?;
        match tree.resolve_path(&measurement.path) {
            Ok(id) => measured[id.index()] = Some(measurement),
            Err(_) => unresolved.push(measurement.path.clone()),
        }
    }
    if !unresolved.is_empty() {
        return Err(Error::UnresolvableMeasurements(unresolved));
    }

    // Document order guarantees parents are placed before their children.
    let mut effective: Vec<Rect> = Vec::with_capacity(tree.len());
    for node in tree.nodes() {
        let from_measurement = measured[node.id.index()]
            .filter(|m| m.visible)
            .map(|m| {
                Rect::new(
                    m.rect.x,
                    m.rect.y,
                    m.rect.w.max(m.scroll_w),
                    m.rect.h.max(m.scroll_h),
                )
            })
            .filter(|r| r.area() > 0.0);
        let rect = match from_measurement {
            Some(rect) => rect,
            None => {
                let (cx, cy) = match node.parent {
                    Some(parent) => effective[parent.index()].center(),
                    None => viewport.window().center(),
                };
                Rect::epsilon_at(cx, cy)
            }
        };
        effective.push(rect);
    }

    let rects = tree
        .ids()
        .map(|id| {
            let path = tree.node_path(id).expect("id from this tree");
            (path, effective[id.index()])
        })
        .collect();
    Ok(GeometryMap::from_rects(
        rects,
        viewport,
        GeometrySource::Measured,
    ))
}

/// Slice-and-dice treemap over the whole tree.
///
/// The root fills `(0, 0, viewport.w, viewport.h)`. Children split their
/// parent side by side along x when the parent's depth is even and stacked
/// along y when it is odd, in document order, each taking a share
/// proportional to `1 + descendant count`.
pub fn synthetic_layout(tree: &DomTree, viewport: Viewport) -> GeometryMap {
    let mut rects: Vec<Rect> = vec![Rect::default(); tree.len()];
    rects[tree.root().index()] = Rect::new(0.0, 0.0, viewport.w, viewport.h);

    for node in tree.nodes() {
        if node.children.is_empty() {
            continue;
        }
        let parent = rects[node.id.index()];
        let weights: Vec<f64> = node
            .children
            .iter()
            .map(|&child| 1.0 + tree.descendant_count(child).expect("child in tree") as f64)
            .collect();
        let along_x = node.depth % 2 == 0;
        for (&child, (start, end)) in node.children.iter().zip(partition(&weights)) {
            rects[child.index()] = if along_x {
                let x0 = parent.x + parent.w * start;
                let x1 = parent.x + parent.w * end;
                Rect::new(x0, parent.y, x1 - x0, parent.h)
            } else {
                let y0 = parent.y + parent.h * start;
                let y1 = parent.y + parent.h * end;
                Rect::new(parent.x, y0, parent.w, y1 - y0)
            };
        }
    }

    let rects = tree
        .ids()
        .map(|id| (tree.node_path(id).expect("id from this tree"), rects[id.index()]))
        .collect();
    GeometryMap::from_rects(rects, viewport, GeometrySource::Synthetic)
}

/// Cumulative `[start, end)` fractions for each weight. Integer-valued weights
/// sum exactly in f64, so the final end is exactly 1.
fn partition(weights: &[f64]) -> Vec<(f64, f64)> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            let start = acc / total;
            acc += w;
            (start, acc / total)
        })
        .collect()
}

/// With cropping on, the part of `rect` inside the viewport window (absent
/// when they do not overlap); with cropping off, `rect` unchanged.
pub fn crop_rect(rect: Rect, viewport: &Viewport, cropping: bool) -> Option<Rect> {
    if cropping {
        rect.intersection(&viewport.window())
    } else {
        Some(rect)
    }
}
