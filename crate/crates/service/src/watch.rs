//! Polling file watcher feeding file contents into the engine.

use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, SystemTime};

use crate::engine::Engine;
use crate::session::Snapshot;

pub const DEFAULT_POLL_INTERVAL: Duration = Duration::from_millis(500);

#[derive(Debug, PartialEq, Eq)]
pub enum WatchEvent {
    Unchanged,
    /// Touched or rewritten; carries the new contents.
    Modified(Vec<u8>),
    /// The file disappeared since the last poll.
    Missing,
}

pub struct FileWatcher {
    path: PathBuf,
    last: Option<(Option<SystemTime>, Vec<u8>)>,
}

impl FileWatcher {
    /// Opens a watcher and returns the initial contents; fails when the file
    /// cannot be read.
    pub fn open(path: impl AsRef<Path>) -> io::Result<(Self, Vec<u8>)> {
        let path = path.as_ref().to_path_buf();
        let modified = std::fs::metadata(&path)?.modified().ok();
        let contents = std::fs::read(&path)?;
        let watcher = FileWatcher {
            path,
            last: Some((modified, contents.clone())),
        };
        Ok((watcher, contents))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Reports a modification when the mtime or the contents changed.
    pub fn poll(&mut self) -> io::Result<WatchEvent> {
        let read = std::fs::metadata(&self.path)
            .and_then(|meta| Ok((meta.modified().ok(), std::fs::read(&self.path)?)));
        let (modified, contents) = match read {
            Ok(found) => found,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Ok(match self.last.take() {
                    Some(_) => WatchEvent::Missing,
                    None => WatchEvent::Unchanged,
                });
            }
            Err(e) => return Err(e),
        };
        if matches!(&self.last, Some((m, c)) if *m == modified && *c == contents) {
            return Ok(WatchEvent::Unchanged);
        }
        self.last = Some((modified, contents.clone()));
        Ok(WatchEvent::Modified(contents))
    }
}

/// Polls `watcher` forever, publishing a synthetic-layout snapshot on every
/// modification. A deleted file keeps the last scene.
pub async fn watch_file(engine: Arc<Engine>, mut watcher: FileWatcher, interval: Duration) {
    let mut ticker = tokio::time::interval(interval);
    ticker.tick().await;
    loop {
        ticker.tick().await;
        match watcher.poll() {
            Ok(WatchEvent::Unchanged) => {}
            Ok(WatchEvent::Modified(contents)) => {
                match engine.handle_snapshot(Snapshot::from_file_bytes(&contents)) {
                    Ok(Some(diff)) => log::info!(
                        "{} changed: revision {} (+{} -{} ~{})",
                        watcher.path().display(),
                        diff.target_revision,
                        diff.added.len(),
                        diff.removed.len(),
                        diff.changed.len()
                    ),
                    Ok(None) => log::info!("{} changed: staged", watcher.path().display()),
                    Err(e) => log::warn!("{}: {e}", watcher.path().display()),
                }
            }
            Ok(WatchEvent::Missing) => log::warn!(
                "{} was removed; keeping the last scene",
                watcher.path().display()
            ),
            Err(e) => log::warn!("cannot read {}: {e}", watcher.path().display()),
        }
    }
}
