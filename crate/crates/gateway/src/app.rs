//! Shared application state behind the HTTP surface.

use crate::actor::SessionHandle;
use crate::error::ApiError;
use forge_domain::{ParticipantId, SlotId, Timestamp};
use forge_scheduler::{constant_time_eq, PhaseSchedule, SessionSlot, StudyConfig};
use forge_session::SessionRules;
use forge_store::{StudyService, StudyState};
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{SystemTime, UNIX_EPOCH};

/// Service configuration, normally read from the environment.
#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    pub study: StudyConfig,
    pub schedule: PhaseSchedule,
    pub rules: SessionRules,
    /// Directory of static UI assets, served when present.
    pub ui_dir: Option<PathBuf>,
}

pub struct App {
    service: Mutex<StudyService>,
    pub sessions: Mutex<HashMap<SlotId, SessionHandle>>,
    rng: Mutex<StdRng>,
    pub rules: SessionRules,
    pub ui_dir: Option<PathBuf>,
}

pub type SharedApp = Arc<App>;

/// Current wall clock in UTC milliseconds.
pub fn now_ms() -> Timestamp {
    let ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .expect("clock after epoch")
        .as_millis() as i64;
    Timestamp::from_millis(ms)
}

impl App {
    pub fn new(config: &GatewayConfig) -> Result<SharedApp, ApiError> {
        let schedule = config.schedule;
        let study_config = config.study;
        let service = StudyService::open(&config.data_dir, || {
            StudyState::new(study_config, schedule).expect("validated config")
        })
        .map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(Arc::new(App {
            service: Mutex::new(service),
            sessions: Mutex::new(HashMap::new()),
            rng: Mutex::new(StdRng::from_os_rng()),
            rules: config.rules,
            ui_dir: config.ui_dir.clone(),
        }))
    }

    /// In-memory app for tests.
    pub fn in_memory(state: StudyState, rules: SessionRules) -> SharedApp {
        Arc::new(App {
            service: Mutex::new(StudyService::in_memory(state)),
            sessions: Mutex::new(HashMap::new()),
            rng: Mutex::new(StdRng::from_os_rng()),
            rules,
            ui_dir: None,
        })
    }

    /// The single mutation lock: all scheduler state changes serialize here.
    pub fn service(&self) -> MutexGuard<'_, StudyService> {
        self.service.lock().expect("service lock")
    }

    pub fn with_rng<T>(&self, f: impl FnOnce(&mut StdRng) -> T) -> T {
        f(&mut self.rng.lock().expect("rng lock"))
    }

    /// Resolves an auth code to a participant id, comparing codes in
    /// constant time.
    pub fn authenticate(&self, token: &str) -> Result<ParticipantId, ApiError> {
        if token.is_empty() {
            return Err(ApiError::unauthorized());
        }
        let service = self.service();
        let mut matched: Option<ParticipantId> = None;
        // Scan every participant so timing does not reveal which code
        // prefix matched.
        for participant in service.state().study.participants.values() {
            if constant_time_eq(participant.auth_code.as_bytes(), token.as_bytes()) {
                matched = Some(participant.participant_id.clone());
            }
        }
        matched.ok_or_else(ApiError::unauthorized)
    }

    pub fn slot(&self, slot_id: &SlotId) -> Option<SessionSlot> {
        self.service().state().study.slots.get(slot_id).cloned()
    }
}
