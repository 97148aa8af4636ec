//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs headlessly on synthetic layout, measured fixtures and the
//! `domcity export` binary.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use domcity::session::{Origin, SessionState, Snapshot};
use domcity::wire;
use domcity_core::dom::{parse_html, DomTree, NodeId, NodePath};
use domcity_core::layout::{ingest_geometry, synthetic_layout, GeometryMap, Rect};
use domcity_core::query::{apply_filters, FilterSpec};
use domcity_core::scene::{
    apply_diff, build_scene, diff_scenes, ColorMode, Scene, StyleConfig, TextureMode,
};
use domcity_core::testkit::{self, GenElement, SEARCHES};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use serde_json::Value;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> PathBuf {
    manifest_dir().join("tests/fixtures").join(name)
}

fn corpus_dir() -> PathBuf {
    manifest_dir().join("../core/tests/fixtures/corpus")
}

fn corpus() -> Vec<(String, Vec<u8>)> {
    let mut docs: Vec<_> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|entry| {
            let path = entry.expect("corpus entry").path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read(&path).expect("corpus file"))
        })
        .collect();
    docs.sort();
    docs
}

fn run(name: &str, limit: Option<Duration>, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(check))
        .unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        })
        .and_then(|detail| match limit {
            Some(limit) if start.elapsed() > limit => Err(format!(
                "{detail}; took {:.2} s, limit {:.0} s",
                start.elapsed().as_secs_f64(),
                limit.as_secs_f64()
            )),
            _ => Ok(detail),
        });
    let elapsed = start.elapsed().as_secs_f64();
    match &result {
        Ok(detail) => println!("PASS  {name:<22} {detail} ({elapsed:.2} s)"),
        Err(reason) => println!("FAIL  {name:<22} {reason} ({elapsed:.2} s)"),
    }
    result.is_ok()
}

fn main() -> ExitCode {
    let checks: Vec<(&str, Option<Duration>, fn() -> Outcome)> = vec![
        ("parser fidelity", Some(Duration::from_secs(5)), parser_fidelity),
        ("layer invariant", Some(Duration::from_secs(30)), layer_invariant),
        ("treemap conservation", None, treemap_conservation),
        ("filter oracle", None, filter_oracle),
        ("counter correctness", None, counter_correctness),
        ("diff round-trip", None, diff_round_trip),
        ("viewport cropping", None, viewport_cropping),
        ("scene serialization", None, scene_serialization),
        ("cli golden export", None, cli_golden),
    ];
    let total = checks.len();
    let passed = checks
        .into_iter()
        .filter(|(name, limit, check)| run(name, *limit, check))
        .count();
    println!("{passed}/{total} criteria passed");
    if passed == total {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// ---- parser fidelity -------------------------------------------------------

fn parser_fidelity() -> Outcome {
    let reference_path = manifest_dir().join("../core/tests/oracle/reference.json");
    let reference: BTreeMap<String, Value> =
        serde_json::from_str(&std::fs::read_to_string(reference_path).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let docs = corpus();
    ensure!(docs.len() == 10, "expected 10 corpus documents, found {}", docs.len());
    let mut elements = 0;
    for (name, bytes) in &docs {
        let expected = reference.get(name).ok_or(format!("{name}: no reference entry"))?;
        let tree = parse_html(bytes);
        let want: Vec<(String, u64)> = expected["elements"]
            .as_array()
            .ok_or("reference elements")?
            .iter()
            .map(|e| (e[0].as_str().unwrap_or_default().to_string(), e[1].as_u64().unwrap_or(u64::MAX)))
            .collect();
        let got: Vec<(String, u64)> = tree.nodes().map(|n| (n.tag.clone(), n.depth as u64)).collect();
        ensure!(got == want, "{name}: element/depth sequence differs from reference");
        ensure!(
            Some(tree.len() as u64) == expected["count"].as_u64(),
            "{name}: count {} vs {}",
            tree.len(),
            expected["count"]
        );
        ensure!(
            Some(tree.max_depth() as u64) == expected["max_depth"].as_u64(),
            "{name}: max_depth {} vs {}",
            tree.max_depth(),
            expected["max_depth"]
        );
        elements += tree.len();
    }
    Ok(format!("{} documents, {elements} elements match", docs.len()))
}

// ---- shared generators -----------------------------------------------------

/// A random document of at most 300 elements with synthetic or measured
/// geometry.
fn random_document(rng: &mut StdRng) -> (DomTree, GeometryMap) {
    let html = testkit::random_html(rng, 297);
    let tree = parse_html(&html);
    let viewport = testkit::random_viewport(rng);
    let geometry = if rng.random_bool(0.5) {
        synthetic_layout(&tree, viewport)
    } else {
        let measurements = testkit::random_measurements(rng, &tree, &viewport);
        ingest_geometry(&tree, &measurements, viewport).expect("generated measurements are valid")
    };
    (tree, geometry)
}

fn random_style(rng: &mut StdRng) -> StyleConfig {
    StyleConfig {
        layer_gap: rng.random_range(0.01..10.0),
        color_mode: if rng.random_bool(0.5) { ColorMode::PerLayer } else { ColorMode::TagHash },
        texture_mode: *[TextureMode::None, TextureMode::LeavesOnly, TextureMode::AllBoxes]
            .choose(rng)
            .unwrap(),
        ..StyleConfig::default()
    }
}

// ---- layer invariant -------------------------------------------------------

fn layer_invariant() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x1a7e);
    let mut boxes = 0;
    for case in 0..1000 {
        let (tree, geometry) = random_document(&mut rng);
        ensure!(tree.len() <= 300, "case {case}: {} nodes", tree.len());
        let filter = if rng.random_bool(0.5) {
            FilterSpec { cropping: false, ..FilterSpec::default() }
        } else {
            testkit::random_filter(&mut rng, &tree)
        };
        let style = random_style(&mut rng);
        let scene = build_scene(&tree, &geometry, &filter, &style).map_err(|e| e.to_string())?;
        for b in &scene.boxes {
            let y = b.depth as f64 * style.layer_gap;
            ensure!(
                b.position[1].to_bits() == y.to_bits(),
                "case {case}: box {} at y={} expected {y}",
                b.path,
                b.position[1]
            );
            let node = tree.node(tree.resolve_path(&b.path).map_err(|e| e.to_string())?).unwrap();
            ensure!(b.depth == node.depth, "case {case}: box {} depth mismatch", b.path);
        }

        let rescaled_style = StyleConfig { layer_gap: rng.random_range(0.01..10.0), ..style };
        let rescaled = build_scene(&tree, &geometry, &filter, &rescaled_style).map_err(|e| e.to_string())?;
        ensure!(rescaled.boxes.len() == scene.boxes.len(), "case {case}: rescale changed box count");
        for (a, b) in scene.boxes.iter().zip(&rescaled.boxes) {
            let y = b.depth as f64 * rescaled_style.layer_gap;
            ensure!(b.position[1].to_bits() == y.to_bits(), "case {case}: rescaled y off at {}", b.path);
            let mut moved = b.clone();
            moved.position[1] = a.position[1];
            ensure!(moved == *a, "case {case}: rescale changed more than y at {}", a.path);
        }
        ensure!(rescaled.lines.len() == scene.lines.len(), "case {case}: rescale changed lines");
        for (a, b) in scene.lines.iter().zip(&rescaled.lines) {
            ensure!(
                a.from == b.from && a.to == b.to && a.a[0] == b.a[0] && a.a[2] == b.a[2]
                    && a.b[0] == b.b[0] && a.b[2] == b.b[2],
                "case {case}: rescale moved line {} -> {} horizontally",
                a.from,
                a.to
            );
        }
        boxes += scene.boxes.len();
    }
    Ok(format!("1000 trees, {boxes} boxes, y = depth * gap bit-exact, rescale moves only y"))
}

// ---- treemap conservation --------------------------------------------------

fn treemap_conservation() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x7e3a);
    let mut parents = 0;
    for case in 0..1000 {
        let tree = parse_html(testkit::random_html(&mut rng, 297));
        let geometry = synthetic_layout(&tree, testkit::random_viewport(&mut rng));
        let rect_of = |id: NodeId| -> Result<Rect, String> {
            let path = tree.node_path(id).map_err(|e| e.to_string())?;
            geometry.rect(&path).ok_or(format!("case {case}: no rect for {path}"))
        };
        for node in tree.nodes() {
            if node.children.is_empty() {
                continue;
            }
            parents += 1;
            let parent = rect_of(node.id)?;
            let children: Vec<Rect> = node.children.iter().map(|&c| rect_of(c)).collect::<Result<_, _>>()?;
            let sum: f64 = children.iter().map(|r| r.w * r.h).sum();
            let area = parent.w * parent.h;
            ensure!(
                (sum - area).abs() <= 1e-6 * area,
                "case {case}: children of {} cover {sum}, parent {area}",
                node.tag
            );
            let slack = 1e-9 * (parent.w + parent.h);
            for (i, c) in children.iter().enumerate() {
                ensure!(
                    c.x >= parent.x - slack
                        && c.y >= parent.y - slack
                        && c.x + c.w <= parent.x + parent.w + slack
                        && c.y + c.h <= parent.y + parent.h + slack,
                    "case {case}: child {i} of {} leaves its parent",
                    node.tag
                );
                for d in &children[i + 1..] {
                    let overlap_w = (c.x + c.w).min(d.x + d.w) - c.x.max(d.x);
                    let overlap_h = (c.y + c.h).min(d.y + d.h) - c.y.max(d.y);
                    ensure!(
                        overlap_w <= slack || overlap_h <= slack,
                        "case {case}: siblings under {} overlap",
                        node.tag
                    );
                }
            }
            // Disjoint tiles inside the parent whose areas sum to the
            // parent's area cover it.
        }
    }
    Ok(format!("1000 trees, {parents} parents: areas conserved, tiles disjoint and covering"))
}

// ---- filter oracle ---------------------------------------------------------

/// Brute-force filter evaluation, written independently of `apply_filters`:
/// depths from parent chains, subtrees from path prefixes, match text from a
/// local serializer, cropping from a direct overlap test.
fn oracle_filter(tree: &DomTree, geometry: &GeometryMap, filter: &FilterSpec) -> Vec<NodeId> {
    const VOID: [&str; 13] = [
        "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track", "wbr",
    ];
    let window = geometry.viewport;
    let mut out = Vec::new();
    for node in tree.nodes() {
        let mut depth = 0;
        let mut up = node.parent;
        while let Some(p) = up {
            depth += 1;
            up = tree.node(p).unwrap().parent;
        }
        if depth < filter.depth_min || filter.depth_max.is_some_and(|max| depth > max) {
            continue;
        }
        let path = tree.node_path(node.id).unwrap();
        if let Some(root) = &filter.subtree_root {
            if !path.steps().starts_with(root.steps()) {
                continue;
            }
        }
        if !filter.search.is_empty() {
            let mut text = format!("<{}", node.tag);
            for (k, v) in &node.attributes {
                text += &format!(" {k}=\"{v}\"");
            }
            text.push('>');
            if !VOID.contains(&node.tag.as_str()) {
                text += &format!("{}</{}>", node.direct_text, node.tag);
            }
            if !text.to_lowercase().contains(&filter.search.to_lowercase()) {
                continue;
            }
        }
        if filter.cropping {
            let r = geometry.rect(&path).unwrap();
            let overlap_w = (r.x + r.w).min(window.scroll_x + window.w) - r.x.max(window.scroll_x);
            let overlap_h = (r.y + r.h).min(window.scroll_y + window.h) - r.y.max(window.scroll_y);
            if !(overlap_w > 0.0 && overlap_h > 0.0) {
                continue;
            }
        }
        out.push(node.id);
    }
    out
}

fn paths_of(tree: &DomTree, ids: &[NodeId]) -> Vec<Vec<usize>> {
    ids.iter().map(|&id| tree.node_path(id).unwrap().steps().to_vec()).collect()
}

fn load_session(bytes: &[u8]) -> SessionState {
    let mut session = SessionState::new(FilterSpec::default(), StyleConfig::default()).unwrap();
    session.handle_snapshot(Snapshot::from_file_bytes(bytes)).unwrap();
    session
}

fn filter_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xf117);
    let mut nonempty = 0;
    for case in 0..500 {
        let (tree, geometry) = random_document(&mut rng);
        let filter = testkit::random_filter(&mut rng, &tree);
        let got = apply_filters(&tree, &geometry, &filter).map_err(|e| e.to_string())?;
        let want = oracle_filter(&tree, &geometry, &filter);
        ensure!(got == want, "case {case}: {filter:?} selected {} nodes, oracle {}", got.len(), want.len());
        nonempty += usize::from(!got.is_empty());
    }

    // The "<img" search on fixtures with known image placements.
    let known: [(&str, PathBuf, Vec<Vec<usize>>); 2] = [
        (
            "figure_page",
            fixture("figure_page.html"),
            vec![vec![1, 0, 0], vec![1, 1, 0, 0, 0], vec![1, 1, 0, 1, 0], vec![1, 1, 1, 1, 0]],
        ),
        (
            "images_and_overflow",
            corpus_dir().join("10_images_and_overflow.html"),
            vec![vec![1, 0, 0], vec![1, 0, 1], vec![1, 0, 2], vec![1, 0, 3, 0, 0]],
        ),
    ];
    for (name, path, expected) in known {
        let session = load_session(&std::fs::read(path).map_err(|e| e.to_string())?);
        let (tree, geometry) = (session.tree().unwrap(), session.geometry().unwrap());
        for cropping in [true, false] {
            let filter = FilterSpec { search: "<img".into(), cropping, ..FilterSpec::default() };
            let got = apply_filters(tree, geometry, &filter).map_err(|e| e.to_string())?;
            ensure!(paths_of(tree, &got) == expected, "{name}: \"<img\" selected {:?}", paths_of(tree, &got));
            ensure!(got == oracle_filter(tree, geometry, &filter), "{name}: oracle disagrees");
        }
    }
    Ok(format!("500 random pairs ({nonempty} non-empty) equal the oracle; \"<img\" exact on 2 fixtures"))
}

// ---- counter correctness ---------------------------------------------------

fn counter_correctness() -> Outcome {
    let mut combos = 0;
    let mut check = |tree: &DomTree, geometry: &GeometryMap, filter: &FilterSpec, style: &StyleConfig| -> Result<(), String> {
        let scene = build_scene(tree, geometry, filter, style).map_err(|e| e.to_string())?;
        let expected = oracle_filter(tree, geometry, filter).len();
        ensure!(
            scene.visible_count == scene.boxes.len() && scene.boxes.len() == expected,
            "{filter:?}: visible_count {} boxes {} oracle {expected}",
            scene.visible_count,
            scene.boxes.len()
        );
        let reparsed = wire::scene_from_json(&wire::scene_to_json(&scene)).map_err(|e| e.to_string())?;
        ensure!(reparsed.visible_count == scene.boxes.len(), "{filter:?}: wire visible_count differs");
        combos += 1;
        Ok(())
    };

    // Every combination of filter settings on the figure fixture.
    let session = load_session(&std::fs::read(fixture("figure_page.html")).map_err(|e| e.to_string())?);
    let (tree, geometry) = (session.tree().unwrap(), session.geometry().unwrap());
    let max = tree.max_depth();
    let mut roots: Vec<Option<NodePath>> = vec![None];
    roots.extend(tree.ids().map(|id| Some(tree.node_path(id).unwrap())));
    for depth_min in 0..=max + 1 {
        let maxes = std::iter::once(None).chain((depth_min..=max + 1).map(Some));
        for depth_max in maxes {
            for search in SEARCHES {
                for root in &roots {
                    for cropping in [true, false] {
                        let filter = FilterSpec {
                            depth_min,
                            depth_max,
                            search: search.to_string(),
                            subtree_root: root.clone(),
                            cropping,
                        };
                        check(tree, geometry, &filter, &StyleConfig::default())?;
                    }
                }
            }
        }
    }

    // Random documents, filters and styles.
    let mut rng = StdRng::seed_from_u64(0xc0c0);
    for _ in 0..500 {
        let (tree, geometry) = random_document(&mut rng);
        let filter = testkit::random_filter(&mut rng, &tree);
        let style = random_style(&mut rng);
        check(&tree, &geometry, &filter, &style)?;
    }
    Ok(format!("{combos} filter combinations: visible_count = box count = oracle count"))
}

// ---- diff round-trip -------------------------------------------------------

fn remap_parents(elements: &mut [GenElement], f: impl Fn(usize) -> Option<usize>) {
    for e in elements.iter_mut() {
        e.parent = e.parent.and_then(&f);
    }
}

fn is_container(e: &GenElement) -> bool {
    !matches!(e.tag, "img" | "br" | "input")
}

/// One random edit of the generated document.
fn mutate(rng: &mut StdRng, elements: &mut Vec<GenElement>) {
    const CONTAINERS: [&str; 5] = ["div", "span", "section", "article", "nav"];
    match rng.random_range(0..5) {
        0 | 1 => {
            let at = rng.random_range(0..=elements.len());
            let parents: Vec<usize> = (0..at).filter(|&i| is_container(&elements[i])).collect();
            let parent = if parents.is_empty() || rng.random_bool(0.2) {
                None
            } else {
                parents.choose(rng).copied()
            };
            remap_parents(elements, |p| Some(if p >= at { p + 1 } else { p }));
            let mut fresh = testkit::random_elements(rng, 1).remove(0);
            fresh.parent = parent;
            elements.insert(at, fresh);
        }
        2 if elements.len() > 1 => {
            let at = rng.random_range(0..elements.len());
            let lifted = elements[at].parent;
            for e in elements.iter_mut() {
                if e.parent == Some(at) {
                    e.parent = lifted;
                }
            }
            elements.remove(at);
            remap_parents(elements, |p| Some(if p > at { p - 1 } else { p }));
        }
        3 => {
            let at = rng.random_range(0..elements.len());
            if is_container(&elements[at]) {
                elements[at].tag = CONTAINERS.choose(rng).unwrap();
                elements[at].text = rng.random_bool(0.5).then(|| format!("text {}", rng.random_range(0..5)));
            }
        }
        _ => {
            let at = rng.random_range(0..elements.len());
            let class = ["nav", "row", "card", "hero"].choose(rng).unwrap().to_string();
            elements[at].attributes.retain(|(k, _)| k != "class");
            if rng.random_bool(0.7) {
                elements[at].attributes.insert(0, ("class".to_string(), class));
            }
        }
    }
}

fn diff_round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xd1ff);
    let mut steps = 0;
    let mut changed_boxes = 0;
    for case in 0..500 {
        let mut elements = testkit::random_elements(&mut rng, 60);
        let viewport = testkit::random_viewport(&mut rng);
        let mut filter = FilterSpec::default();
        let mut style = StyleConfig::default();
        let mut old = Scene::empty(style);
        for step in 0..rng.random_range(3..10) {
            match rng.random_range(0..6) {
                0 => style = random_style(&mut rng),
                1 => filter = FilterSpec { cropping: rng.random_bool(0.5), ..FilterSpec::default() },
                _ => mutate(&mut rng, &mut elements),
            }
            let tree = parse_html(testkit::to_html(&elements));
            let geometry = if rng.random_bool(0.5) {
                synthetic_layout(&tree, viewport)
            } else {
                let measurements = testkit::random_measurements(&mut rng, &tree, &viewport);
                ingest_geometry(&tree, &measurements, viewport).map_err(|e| e.to_string())?
            };
            if filter.subtree_root.as_ref().is_some_and(|root| tree.resolve_path(root).is_err()) {
                filter.subtree_root = None;
            }
            if rng.random_bool(0.3) {
                filter = testkit::random_filter(&mut rng, &tree);
            }
            let mut new = build_scene(&tree, &geometry, &filter, &style).map_err(|e| e.to_string())?;
            new.revision = old.revision + 1;
            let diff = diff_scenes(&old, &new).map_err(|e| e.to_string())?;
            let applied = apply_diff(&old, &diff).map_err(|e| e.to_string())?;
            ensure!(applied == new, "case {case} step {step}: apply(old, diff) differs from new");
            changed_boxes += diff.added.len() + diff.removed.len() + diff.changed.len();
            steps += 1;
            old = new;
        }
    }
    Ok(format!("500 sequences, {steps} steps, {changed_boxes} box changes reproduced exactly"))
}

// ---- viewport cropping -----------------------------------------------------

fn extends_beyond(b: &domcity_core::scene::SceneBox, window: Rect, scale: f64) -> bool {
    let tol = 1e-9;
    let (x0, x1) = (b.position[0] - b.size[0] / 2.0, b.position[0] + b.size[0] / 2.0);
    let (z0, z1) = (b.position[2] - b.size[2] / 2.0, b.position[2] + b.size[2] / 2.0);
    x0 < window.x * scale - tol
        || x1 > (window.x + window.w) * scale + tol
        || z0 < window.y * scale - tol
        || z1 > (window.y + window.h) * scale + tol
}

fn viewport_cropping() -> Outcome {
    // Cropping on: random documents, filters and scroll positions.
    let mut rng = StdRng::seed_from_u64(0xc409);
    let mut boxes = 0;
    for case in 0..500 {
        let (tree, geometry) = random_document(&mut rng);
        let filter = FilterSpec { cropping: true, ..testkit::random_filter(&mut rng, &tree) };
        let style = random_style(&mut rng);
        let scene = build_scene(&tree, &geometry, &filter, &style).map_err(|e| e.to_string())?;
        let window = geometry.viewport.window();
        for b in &scene.boxes {
            ensure!(!extends_beyond(b, window, style.world_scale), "case {case}: box {} leaves the window", b.path);
        }
        boxes += scene.boxes.len();
    }

    // Cropping off: measured page with a 3000 px chart right of the viewport.
    let text = std::fs::read_to_string(fixture("plotly_overflow.snapshot.json")).map_err(|e| e.to_string())?;
    let snapshot = wire::snapshot_from_json(&text).map_err(|e| e.to_string())?;
    let window = snapshot.viewport.ok_or("fixture has no viewport")?.window();
    let scene_for = |filter: FilterSpec| -> Result<Scene, String> {
        let mut session = SessionState::new(filter, StyleConfig::default()).map_err(|e| e.to_string())?;
        session.handle_snapshot(snapshot.clone()).map_err(|e| e.to_string())?;
        Ok(session.scene().clone())
    };
    let scale = StyleConfig::default().world_scale;
    let uncropped = scene_for(FilterSpec { cropping: false, ..FilterSpec::default() })?;
    let beyond: Vec<_> = uncropped.boxes.iter().filter(|b| extends_beyond(b, window, scale)).collect();
    ensure!(beyond.len() == 1, "{} boxes extend beyond the viewport", beyond.len());
    let chart = beyond[0];
    ensure!(chart.size[0] == 3000.0 * scale, "wide box is {} wide", chart.size[0]);

    let found = scene_for(FilterSpec { cropping: false, search: "plotly".into(), ..FilterSpec::default() })?;
    ensure!(
        found.boxes.len() == 1 && found.boxes[0].path == chart.path,
        "search \"plotly\" found {:?}",
        found.boxes.iter().map(|b| b.path.to_string()).collect::<Vec<_>>()
    );
    let cropped = scene_for(FilterSpec::default())?;
    ensure!(cropped.box_at(&chart.path).is_none(), "chart visible with cropping on");
    ensure!(
        cropped.boxes.iter().all(|b| !extends_beyond(b, window, scale)),
        "cropped fixture box leaves the window"
    );
    Ok(format!(
        "{boxes} cropped boxes inside their windows; uncropped fixture has exactly one overflowing box ({}), found by \"plotly\"",
        chart.path
    ))
}

// ---- serialization and CLI -------------------------------------------------

fn export(input: &Path, out: &Path, extra: &[&str]) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_domcity"))
        .arg("export")
        .arg("--input")
        .arg(input)
        .arg("--out")
        .arg(out)
        .args(extra)
        .status()
        .map_err(|e| e.to_string())?;
    ensure!(status.success(), "domcity export {} exited with {status}", input.display());
    std::fs::read(out).map_err(|e| e.to_string())
}

fn scene_serialization() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let variants: [&[&str]; 3] = [
        &[],
        &["--no-crop", "--color-mode", "tag-hash", "--texture-mode", "all", "--layer-gap", "0.3"],
        &["--texture-mode", "leaves", "--viewport", "333x777", "--query", "div"],
    ];
    let mut files = 0;
    for (name, _) in corpus() {
        for (i, extra) in variants.iter().enumerate() {
            let out = dir.path().join(format!("{name}.{i}.json"));
            let first = export(&corpus_dir().join(&name), &out, extra)?;
            let text = String::from_utf8(first.clone()).map_err(|e| e.to_string())?;
            let scene = wire::scene_from_json(&text).map_err(|e| format!("{name}: {e}"))?;
            let again = wire::scene_to_json(&scene);
            ensure!(again.as_bytes() == first.as_slice(), "{name} variant {i}: re-export differs");
            files += 1;
        }
    }

    // Scenes carrying a screenshot reference and textures.
    let text = std::fs::read_to_string(fixture("plotly_overflow.snapshot.json")).map_err(|e| e.to_string())?;
    let mut snapshot = wire::snapshot_from_json(&text).map_err(|e| e.to_string())?;
    snapshot.origin = Origin::LivePush;
    snapshot.screenshot = Some(domcity::session::Screenshot { png: vec![1, 2, 3], page_w: 4400.0, page_h: 800.0 });
    let style = StyleConfig { texture_mode: TextureMode::AllBoxes, ..StyleConfig::default() };
    let mut session = SessionState::new(FilterSpec { cropping: false, ..FilterSpec::default() }, style)
        .map_err(|e| e.to_string())?;
    session.handle_snapshot(snapshot).map_err(|e| e.to_string())?;
    let first = wire::scene_to_json(session.scene());
    let again = wire::scene_to_json(&wire::scene_from_json(&first).map_err(|e| e.to_string())?);
    ensure!(first == again, "textured scene re-export differs");
    Ok(format!("{} exports byte-identical after parse and re-export", files + 1))
}

fn cli_golden() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let goldens: [(&str, &[&str]); 2] = [
        ("figure_page.scene.json", &[]),
        (
            "figure_page.img.scene.json",
            &["--color-mode", "tag-hash", "--query", "<img", "--no-crop", "--layer-gap", "2.5", "--viewport", "800x600"],
        ),
    ];
    for (golden, extra) in goldens {
        let out = dir.path().join(golden);
        let produced = export(&fixture("figure_page.html"), &out, extra)?;
        let expected = std::fs::read(fixture(golden)).map_err(|e| e.to_string())?;
        ensure!(produced == expected, "{golden}: export differs from committed golden");
    }
    Ok("2 golden scene files reproduced byte-exactly".to_string())
}
