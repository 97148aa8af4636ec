//! Shared handle around the session: one writer at a time, readers get
//! immutable published scenes, subscribers get diffs in publication order.

use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use domcity_core::query::FilterSpec;
use domcity_core::scene::{Scene, SceneDiff, StyleConfig};
use tokio::sync::broadcast;

use crate::session::{SessionError, SessionState, Snapshot, UpdateMode};

const UPDATE_BUFFER: usize = 64;

pub struct Engine {
    state: Mutex<SessionState>,
    published: RwLock<Arc<Scene>>,
    updates: broadcast::Sender<Arc<SceneDiff>>,
}

impl Engine {
    pub fn new(state: SessionState) -> Arc<Self> {
        let published = RwLock::new(Arc::new(state.scene().clone()));
        let (updates, _) = broadcast::channel(UPDATE_BUFFER);
        Arc::new(Engine {
            state: Mutex::new(state),
            published,
            updates,
        })
    }

    /// Latest published scene.
    pub fn scene(&self) -> Arc<Scene> {
        Arc::clone(&self.published.read().expect("scene lock poisoned"))
    }

    /// The current scene together with a receiver for every later diff.
    pub fn subscribe(&self) -> (Arc<Scene>, broadcast::Receiver<Arc<SceneDiff>>) {
        let _writer = self.lock();
        (self.scene(), self.updates.subscribe())
    }

    pub fn handle_snapshot(&self, snapshot: Snapshot) -> Result<Option<SceneDiff>, SessionError> {
        let mut state = self.lock();
        let diff = state.handle_snapshot(snapshot)?;
        if let Some(diff) = &diff {
            self.publish(&state, diff);
        }
        Ok(diff)
    }

    pub fn refresh(&self) -> Result<SceneDiff, SessionError> {
        self.transition(|s| s.refresh())
    }

    pub fn set_filter(&self, filter: FilterSpec) -> Result<SceneDiff, SessionError> {
        self.transition(|s| s.set_filter(filter))
    }

    pub fn set_style(&self, style: StyleConfig) -> Result<SceneDiff, SessionError> {
        self.transition(|s| s.set_style(style))
    }

    pub fn set_update_mode(&self, mode: UpdateMode) -> Result<Option<SceneDiff>, SessionError> {
        let mut state = self.lock();
        let diff = state.set_update_mode(mode)?;
        if let Some(diff) = &diff {
            self.publish(&state, diff);
        }
        Ok(diff)
    }

    pub fn screenshot(&self, hash: &str) -> Option<Arc<Vec<u8>>> {
        self.lock().screenshot(hash)
    }

    /// Runs `f` against the session under the writer lock.
    pub fn with_state<T>(&self, f: impl FnOnce(&SessionState) -> T) -> T {
        f(&self.lock())
    }

    fn transition(
        &self,
        f: impl FnOnce(&mut SessionState) -> Result<SceneDiff, SessionError>,
    ) -> Result<SceneDiff, SessionError> {
        let mut state = self.lock();
        let diff = f(&mut state)?;
        self.publish(&state, &diff);
        Ok(diff)
    }

    // Called with the writer lock held, so diffs go out in revision order.
    fn publish(&self, state: &SessionState, diff: &SceneDiff) {
        if diff.target_revision == diff.base_revision {
            return;
        }
        *self.published.write().expect("scene lock poisoned") = Arc::new(state.scene().clone());
        // No receivers is fine.
        let _ = self.updates.send(Arc::new(diff.clone()));
    }

    fn lock(&self) -> MutexGuard<'_, SessionState> {
        self.state.lock().expect("session lock poisoned")
    }
}
