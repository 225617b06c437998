use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock, TryLockError};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use oncograph_core::analysis::{derived_cell_profile, DerivedCellProfile};
use oncograph_core::dynamics::{
    AngiogenicSwitch, DriverParams, GrowthPlan, ModelConfig, ModelState, StepMetrics,
};
use oncograph_core::harness::DEFAULT_SEED_DEGREE;
use oncograph_core::{GraphSnapshot, RngSeed};
use serde::{Deserialize, Serialize};

use crate::error::{ServiceError, ServiceResult};

/// Cancer stem cells assumed when a create request gives no driver.
pub const DEFAULT_STEM_CELLS: u64 = 50;

/// Body of `POST /sessions`. Omitted fields take documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub n: usize,
    /// Defaults to `4 / (n - 1)`.
    #[serde(default)]
    pub p_edge: Option<f64>,
    #[serde(default)]
    pub driver: Option<DriverParams>,
    #[serde(default)]
    pub switch: Option<AngiogenicSwitch>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl CreateSession {
    pub fn new(n: usize) -> Self {
        CreateSession {
            n,
            p_edge: None,
            driver: None,
            switch: None,
            seed: None,
        }
    }

    /// The same request with every default made explicit.
    pub fn resolved(&self) -> CreateSession {
        let p_edge = self.p_edge.unwrap_or(match self.n {
            0 | 1 => 0.0,
            n => (DEFAULT_SEED_DEGREE / (n - 1) as f64).min(1.0),
        });
        CreateSession {
            n: self.n,
            p_edge: Some(p_edge),
            driver: Some(
                self.driver
                    .unwrap_or(DriverParams::with_stem_cells(DEFAULT_STEM_CELLS)),
            ),
            switch: Some(self.switch.unwrap_or_default()),
            seed: Some(self.seed.unwrap_or(0)),
        }
    }

    fn model(&self) -> ServiceResult<ModelState> {
        if self.n == 0 {
            return Err(ServiceError::validation(
                "n",
                "a session needs at least one node",
            ));
        }
        let r = self.resolved();
        let config = ModelConfig {
            initial_nodes: r.n,
            er_edge_probability: r.p_edge.expect("resolved"),
            driver: r.driver.expect("resolved"),
            switch: r.switch.expect("resolved"),
            growth_plan: GrowthPlan::default(),
        };
        let field_fix = |e: oncograph_core::Error| match e {
            oncograph_core::Error::Config { field, message } if field == "er_edge_probability" => {
                ServiceError::validation("p_edge", message)
            }
            other => other.into(),
        };
        ModelState::new(config, RngSeed(r.seed.expect("resolved"))).map_err(field_fix)
    }
}

/// A mutating command, as recorded in the session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Grow { n_new: usize },
    SetSwitch { switch: AngiogenicSwitch },
    Step { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedCommand {
    /// Model step index when the command was applied.
    pub at_step: u64,
    #[serde(flatten)]
    pub command: Command,
}

/// Everything needed to rebuild a session from scratch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayManifest {
    pub create: CreateSession,
    pub commands: Vec<LoggedCommand>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Idle,
    Stepping,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub status: SessionStatus,
    pub n_nodes: usize,
    pub step_index: u64,
    pub switch: AngiogenicSwitch,
    pub p_redirect: f64,
    pub created_unix_ms: u64,
    pub updated_unix_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowSummary {
    pub n_added: usize,
    pub n_nodes: usize,
    pub p_redirect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchAck {
    pub switch: AngiogenicSwitch,
    pub at_step: u64,
}

#[derive(Debug, Clone)]
struct Session {
    model: ModelState,
    history: Vec<StepMetrics>,
    create: CreateSession,
    log: Vec<LoggedCommand>,
    created: SystemTime,
    updated: SystemTime,
    touched: Instant,
}

impl Session {
    fn touch(&mut self) {
        self.updated = SystemTime::now();
        self.touched = Instant::now();
    }

    fn apply(&mut self, command: Command) -> ServiceResult<CommandOutcome> {
        let at_step = self.model.step_index();
        let outcome = match &command {
            Command::Grow { n_new } => {
                let n_added = self.model.grow(*n_new)?;
                CommandOutcome::Grew(GrowSummary {
                    n_added,
                    n_nodes: self.model.graph().node_count(),
                    p_redirect: self.model.p_redirect(),
                })
            }
            Command::SetSwitch { switch } => {
                self.model
                    .set_switch(*switch)
                    .map_err(|e| ServiceError::from(e.within("switch")))?;
                CommandOutcome::Switched(SwitchAck {
                    switch: *switch,
                    at_step,
                })
            }
            Command::Step { k } => {
                let mut rows = Vec::with_capacity(*k);
                for _ in 0..*k {
                    rows.push(self.model.step()?);
                }
                self.history.extend(rows.iter().cloned());
                CommandOutcome::Stepped(rows)
            }
        };
        self.log.push(LoggedCommand { at_step, command });
        self.touch();
        Ok(outcome)
    }

    fn manifest(&self) -> ReplayManifest {
        ReplayManifest {
            create: self.create.clone(),
            commands: self.log.clone(),
        }
    }
}

enum CommandOutcome {
    Grew(GrowSummary),
    Switched(SwitchAck),
    Stepped(Vec<StepMetrics>),
}

#[derive(Debug)]
struct Entry {
    /// Held for the whole of a mutating command.
    gate: Mutex<()>,
    state: RwLock<Session>,
}

type Slot = Arc<Entry>;

/// Session registry. Mutating commands on one session are exclusive: a
/// command arriving while another runs is refused with
/// [`ServiceError::Conflict`]. Queries wait for the running command and see
/// step-boundary state only.
#[derive(Debug)]
pub struct SessionService {
    sessions: RwLock<HashMap<String, Slot>>,
    next_id: AtomicU64,
    ttl: Duration,
    persist_dir: Option<PathBuf>,
}

pub const DEFAULT_TTL: Duration = Duration::from_secs(3600);

fn poisoned() -> ServiceError {
    ServiceError::Internal("session state poisoned".into())
}

fn unix_ms(t: SystemTime) -> u64 {
    t.duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl Default for SessionService {
    fn default() -> Self {
        SessionService::new(DEFAULT_TTL, None)
    }
}

impl SessionService {
    pub fn new(ttl: Duration, persist_dir: Option<PathBuf>) -> Self {
        SessionService {
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            ttl,
            persist_dir,
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    fn slot(&self, id: &str) -> ServiceResult<Slot> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    fn insert(&self, session: Session) -> String {
        let id = format!("s{:06}", self.next_id.fetch_add(1, Ordering::Relaxed));
        self.sessions.write().expect("session map poisoned").insert(
            id.clone(),
            Arc::new(Entry {
                gate: Mutex::new(()),
                state: RwLock::new(session),
            }),
        );
        id
    }

    pub fn create_session(&self, init: CreateSession) -> ServiceResult<String> {
        let model = init.model()?;
        let now = SystemTime::now();
        Ok(self.insert(Session {
            model,
            history: Vec::new(),
            create: init.resolved(),
            log: Vec::new(),
            created: now,
            updated: now,
            touched: Instant::now(),
        }))
    }

    fn command(&self, id: &str, command: Command) -> ServiceResult<CommandOutcome> {
        let slot = self.slot(id)?;
        let _busy = match slot.gate.try_lock() {
            Ok(guard) => guard,
            Err(TryLockError::WouldBlock) => return Err(ServiceError::Conflict(id.to_string())),
            Err(TryLockError::Poisoned(_)) => {
                return Err(ServiceError::Internal("session state poisoned".into()))
            }
        };
        // Work on a copy so readers keep seeing the last step boundary and a
        // failed command leaves no trace.
        let mut draft = slot.state.read().map_err(|_| poisoned())?.clone();
        let outcome = draft.apply(command)?;
        *slot.state.write().map_err(|_| poisoned())? = draft;
        Ok(outcome)
    }

    pub fn command_grow(&self, id: &str, n_new: usize) -> ServiceResult<GrowSummary> {
        match self.command(id, Command::Grow { n_new })? {
            CommandOutcome::Grew(summary) => Ok(summary),
            _ => unreachable!(),
        }
    }

    pub fn command_set_switch(
        &self,
        id: &str,
        switch: AngiogenicSwitch,
    ) -> ServiceResult<SwitchAck> {
        switch
            .validate()
            .map_err(|e| ServiceError::from(e.within("switch")))?;
        match self.command(id, Command::SetSwitch { switch })? {
            CommandOutcome::Switched(ack) => Ok(ack),
            _ => unreachable!(),
        }
    }

    pub fn command_step(&self, id: &str, k: usize) -> ServiceResult<Vec<StepMetrics>> {
        match self.command(id, Command::Step { k })? {
            CommandOutcome::Stepped(rows) => Ok(rows),
            _ => unreachable!(),
        }
    }

    fn read<T>(&self, id: &str, f: impl FnOnce(&Session) -> T) -> ServiceResult<T> {
        let slot = self.slot(id)?;
        let session = slot.state.read().map_err(|_| poisoned())?;
        Ok(f(&session))
    }

    pub fn query_summary(&self, id: &str) -> ServiceResult<SessionSummary> {
        let slot = self.slot(id)?;
        let status = match slot.gate.try_lock() {
            Err(TryLockError::WouldBlock) => SessionStatus::Stepping,
            _ => SessionStatus::Idle,
        };
        self.read(id, |s| SessionSummary {
            session_id: id.to_string(),
            status,
            n_nodes: s.model.graph().node_count(),
            step_index: s.model.step_index(),
            switch: *s.model.switch(),
            p_redirect: s.model.p_redirect(),
            created_unix_ms: unix_ms(s.created),
            updated_unix_ms: unix_ms(s.updated),
        })
    }

    pub fn query_snapshot(&self, id: &str) -> ServiceResult<GraphSnapshot> {
        self.read(id, |s| s.model.snapshot())
    }

    pub fn query_metrics(&self, id: &str) -> ServiceResult<Vec<StepMetrics>> {
        self.read(id, |s| s.history.clone())
    }

    pub fn query_profile(&self, id: &str) -> ServiceResult<DerivedCellProfile> {
        self.read(id, |s| derived_cell_profile(s.model.graph(), 1))?
            .map_err(ServiceError::from)
    }

    pub fn query_log(&self, id: &str) -> ServiceResult<ReplayManifest> {
        self.read(id, Session::manifest)
    }

    pub fn delete_session(&self, id: &str) -> ServiceResult<()> {
        self.sessions
            .write()
            .expect("session map poisoned")
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    /// Copy a session, including its generator state and command log, under
    /// a new id. The two evolve independently afterwards.
    pub fn fork_session(&self, id: &str) -> ServiceResult<String> {
        let copy = self.read(id, |s| Session {
            model: s.model.clone(),
            history: s.history.clone(),
            create: s.create.clone(),
            log: s.log.clone(),
            created: SystemTime::now(),
            updated: SystemTime::now(),
            touched: Instant::now(),
        })?;
        Ok(self.insert(copy))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<_> = self
            .sessions
            .read()
            .expect("session map poisoned")
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    /// Drop sessions idle for longer than the TTL. Busy sessions are kept.
    pub fn evict_idle(&self) -> Vec<String> {
        self.evict_idle_since(Instant::now())
    }

    pub fn evict_idle_since(&self, now: Instant) -> Vec<String> {
        let mut map = self.sessions.write().expect("session map poisoned");
        let expired: Vec<String> = map
            .iter()
            .filter(|(_, slot)| {
                slot.gate.try_lock().is_ok()
                    && slot
                        .state
                        .read()
                        .map(|s| now.saturating_duration_since(s.touched) > self.ttl)
                        .unwrap_or(false)
            })
            .map(|(id, _)| id.clone())
            .collect();
        for id in &expired {
            map.remove(id);
        }
        expired
    }

    /// Write `<id>.log.json` and `<id>.snapshot.json` into `dir`.
    pub fn persist_to(&self, id: &str, dir: &Path) -> ServiceResult<PathBuf> {
        let (manifest, snapshot) = self.read(id, |s| (s.manifest(), s.model.snapshot()))?;
        fs::create_dir_all(dir)
            .map_err(|e| ServiceError::Internal(format!("{}: {e}", dir.display())))?;
        let log_path = dir.join(format!("{id}.log.json"));
        let write = |path: &Path, text: String| {
            fs::write(path, text)
                .map_err(|e| ServiceError::Internal(format!("{}: {e}", path.display())))
        };
        write(
            &log_path,
            serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
        )?;
        write(&dir.join(format!("{id}.snapshot.json")), snapshot.to_json())?;
        Ok(log_path)
    }

    /// Persist into the configured directory.
    pub fn persist(&self, id: &str) -> ServiceResult<PathBuf> {
        self.slot(id)?;
        let dir = self.persist_dir.clone().ok_or_else(|| {
            ServiceError::Unavailable("no persistence directory configured".into())
        })?;
        self.persist_to(id, &dir)
    }

    /// Persist every live session; used on shutdown.
    pub fn flush_all(&self) -> ServiceResult<Vec<PathBuf>> {
        match &self.persist_dir {
            None => Ok(Vec::new()),
            Some(dir) => self
                .session_ids()
                .iter()
                .map(|id| self.persist_to(id, dir))
                .collect(),
        }
    }
}

/// Rebuild a session from its manifest on a fresh service and return the
/// final snapshot.
pub fn replay(manifest: &ReplayManifest) -> ServiceResult<GraphSnapshot> {
    let service = SessionService::default();
    let id = service.create_session(manifest.create.clone())?;
    for entry in &manifest.commands {
        service.command(&id, entry.command.clone())?;
    }
    service.query_snapshot(&id)
}
