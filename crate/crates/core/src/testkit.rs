//! Random documents, geometry and filters for property tests.
//!
//! Generated markup only uses elements whose nesting the HTML parser leaves
//! untouched, so the element structure of the output is exactly the one
//! generated.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::dom::{DomTree, NodePath};
use crate::layout::{Measurement, Rect, Viewport};
use crate::query::FilterSpec;

const CONTAINER_TAGS: [&str; 9] = [
    "div", "span", "section", "article", "aside", "nav", "header", "footer", "figure",
];
const VOID_TAGS: [&str; 3] = ["img", "br", "input"];
const CLASSES: [&str; 6] = ["nav", "logo", "row", "col", "card", "Nav"];
const WORDS: [&str; 7] = ["alpha", "beta", "gamma", "see <img", "Img", "hello world", "a & b"];
pub const SEARCHES: [&str; 8] = ["", "<img", "div", "class=\"nav\"", "ALPHA", "zzz", "src=", "</span>"];

/// Generated element under `<body>`.
#[derive(Clone, Debug)]
pub struct GenElement {
    pub tag: &'static str,
    pub parent: Option<usize>,
    pub attributes: Vec<(String, String)>,
    pub text: Option<String>,
}

/// A random body of at most `max_elements` elements (at least one).
pub fn random_elements<R: Rng>(rng: &mut R, max_elements: usize) -> Vec<GenElement> {
    let count = rng.random_range(1..=max_elements.max(1));
    let mut elements: Vec<GenElement> = Vec::with_capacity(count);
    for index in 0..count {
        let containers: Vec<usize> = (0..elements.len())
            .filter(|&i| !VOID_TAGS.contains(&elements[i].tag))
            .collect();
        // Favor recent containers so trees grow deep as well as wide.
        let parent = if containers.is_empty() || rng.random_bool(0.1) {
            None
        } else if rng.random_bool(0.6) {
            let tail = containers.len().min(4);
            Some(containers[containers.len() - 1 - rng.random_range(0..tail)])
        } else {
            containers.choose(rng).copied()
        };
        let tag = if rng.random_bool(0.2) {
            *VOID_TAGS.choose(rng).unwrap()
        } else {
            *CONTAINER_TAGS.choose(rng).unwrap()
        };
        let mut attributes = Vec::new();
        if rng.random_bool(0.5) {
            attributes.push(("class".to_string(), CLASSES.choose(rng).unwrap().to_string()));
        }
        if rng.random_bool(0.3) {
            attributes.push(("id".to_string(), format!("e{index}")));
        }
        if tag == "img" {
            attributes.push(("src".to_string(), format!("{index}.png")));
        }
        let text = (!VOID_TAGS.contains(&tag) && rng.random_bool(0.4))
            .then(|| WORDS.choose(rng).unwrap().to_string());
        elements.push(GenElement {
            tag,
            parent,
            attributes,
            text,
        });
    }
    elements
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Serializes generated elements as a full document.
pub fn to_html(elements: &[GenElement]) -> String {
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); elements.len()];
    let mut top = Vec::new();
    for (i, e) in elements.iter().enumerate() {
        match e.parent {
            Some(p) => children[p].push(i),
            None => top.push(i),
        }
    }
    let mut out = String::from("<!DOCTYPE html><html><head></head><body>");
    // Explicit stack: Ok(i) opens element i, Err(i) closes it.
    let mut stack: Vec<Result<usize, usize>> = top.iter().rev().map(|&i| Ok(i)).collect();
    while let Some(item) = stack.pop() {
        match item {
            Ok(i) => {
                let e = &elements[i];
                out.push('<');
                out.push_str(e.tag);
                for (name, value) in &e.attributes {
                    out.push_str(&format!(" {name}=\"{}\"", escape(value)));
                }
                out.push('>');
                if VOID_TAGS.contains(&e.tag) {
                    continue;
                }
                if let Some(text) = &e.text {
                    out.push_str(&escape(text));
                }
                stack.push(Err(i));
                stack.extend(children[i].iter().rev().map(|&c| Ok(c)));
            }
            Err(i) => {
                out.push_str("</");
                out.push_str(elements[i].tag);
                out.push('>');
            }
        }
    }
    out.push_str("</body></html>");
    out
}

pub fn random_html<R: Rng>(rng: &mut R, max_elements: usize) -> String {
    to_html(&random_elements(rng, max_elements))
}

pub fn random_viewport<R: Rng>(rng: &mut R) -> Viewport {
    let w = rng.random_range(200.0..1600.0_f64).round();
    let h = rng.random_range(200.0..1200.0_f64).round();
    let sx = if rng.random_bool(0.3) { rng.random_range(0.0..w).round() } else { 0.0 };
    let sy = if rng.random_bool(0.5) { rng.random_range(0.0..h * 2.0).round() } else { 0.0 };
    Viewport::new(w, h)
        .and_then(|v| v.scrolled(sx, sy))
        .expect("generated viewport is valid")
}

/// Browser-like measurements scattered over a page up to three viewports
/// wide and tall; some elements hidden, some unmeasured, some overflowing.
pub fn random_measurements<R: Rng>(
    rng: &mut R,
    tree: &DomTree,
    viewport: &Viewport,
) -> Vec<Measurement> {
    let page_w = viewport.w * 3.0;
    let page_h = viewport.h * 3.0;
    let mut out = Vec::new();
    for id in tree.ids() {
        if rng.random_bool(0.1) {
            continue;
        }
        let x = rng.random_range(-50.0..page_w).round();
        let y = rng.random_range(-50.0..page_h).round();
        let w = rng.random_range(0.0..page_w / 2.0).round();
        let h = rng.random_range(0.0..page_h / 4.0).round();
        let (scroll_w, scroll_h) = if rng.random_bool(0.15) {
            (w + rng.random_range(0.0..3000.0_f64).round(), h)
        } else {
            (0.0, 0.0)
        };
        out.push(Measurement {
            path: tree.node_path(id).expect("id from tree"),
            rect: Rect::new(x, y, w, h),
            scroll_w,
            scroll_h,
            visible: !rng.random_bool(0.1),
        });
    }
    out
}

pub fn random_path<R: Rng>(rng: &mut R, tree: &DomTree) -> NodePath {
    let index = rng.random_range(0..tree.len());
    let id = tree.ids().nth(index).expect("index in range");
    tree.node_path(id).expect("id from tree")
}

/// A valid filter for `tree`, each conjunct independently active or not.
pub fn random_filter<R: Rng>(rng: &mut R, tree: &DomTree) -> FilterSpec {
    let depth_min = if rng.random_bool(0.5) {
        rng.random_range(0..=tree.max_depth() + 1)
    } else {
        0
    };
    let depth_max = rng
        .random_bool(0.5)
        .then(|| depth_min + rng.random_range(0..=3));
    FilterSpec {
        depth_min,
        depth_max,
        search: SEARCHES.choose(rng).unwrap().to_string(),
        subtree_root: rng.random_bool(0.4).then(|| random_path(rng, tree)),
        cropping: rng.random_bool(0.5),
    }
}
