//! Durability behavior: a restored store equals the live service state,
//! torn final records are dropped, snapshots truncate the log, and restores
//! from any log prefix satisfy the state invariants.

use forge_domain::{Message, MessageId, Role, SentenceUnit, Timestamp};
use forge_scheduler::{ManualSubmission, PaperDraft, PhaseSchedule, SignUpForm, StudyConfig};
use forge_store::{Store, StudyService, StudyState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::io::Write;
use std::path::Path;

fn t(minutes: i64) -> Timestamp {
    Timestamp::from_millis(minutes * 60_000)
}

fn fresh_state() -> StudyState {
    StudyState::new(
        StudyConfig::default(),
        PhaseSchedule {
            sign_up_until: t(100),
            booking_de_until: t(200),
            booking_p_until: t(300),
            dialogues_until: t(400),
        },
    )
    .unwrap()
}

fn form(name: &str, email: &str) -> SignUpForm {
    SignUpForm {
        full_name: name.into(),
        email: email.into(),
        papers: vec![PaperDraft {
            title: format!("{name} writes about retrieval"),
            abstract_sentences: vec!["An abstract sentence.".into()],
            introduction_sentences: vec!["An intro sentence.".into()],
        }],
        selected: vec![0],
    }
}

/// Drives a realistic command sequence against a durable service and
/// returns the final in-memory state. `steps` bounds how much happens.
fn drive(dir: &Path, steps: usize) -> StudyState {
    let mut service = StudyService::open(dir, fresh_state).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let people: Vec<_> = [("Ada", "a@example.org"), ("Ben", "b@example.org"), ("Cy", "c@example.org")]
        .iter()
        .take(steps.max(2).min(3))
        .map(|(n, e)| {
            service
                .register_participant(t(0), &form(n, e), &ManualSubmission, &mut rng)
                .unwrap()
        })
        .collect();

    if steps >= 2 {
        let ada = &people[0];
        let session = service
            .create_de_session(t(150), &ada.participant_id, &ada.proposed_paper_ids[0], t(1000))
            .unwrap();
        let slots = service.split_session_slots(&session.session_id, 20).unwrap();
        if steps >= 3 {
            service
                .book_slot_as_p(t(250), &people[1].participant_id, &slots[0])
                .unwrap();
        }
        if steps >= 4 {
            service
                .record_message(
                    &slots[0],
                    Message {
                        message_id: MessageId::from("m1"),
                        role: Role::Proponent,
                        sentences: vec![SentenceUnit::new("A question?")],
                        facts: vec![],
                        sent_at: t(1001),
                        no_fact_warning: false,
                    },
                )
                .unwrap();
        }
        if steps >= 5 {
            service.due_notifications(t(1000)).unwrap();
        }
    }
    service.state().clone()
}

#[test]
fn restore_replays_the_full_log() {
    let dir = tempfile::tempdir().unwrap();
    let live = drive(dir.path(), 5);
    let (_store, restored) = Store::open(dir.path(), fresh_state).unwrap();
    assert_eq!(restored, live);
}

#[test]
fn every_log_prefix_restores_a_valid_state() {
    let dir = tempfile::tempdir().unwrap();
    let _live = drive(dir.path(), 5);
    let log_path = dir.path().join(forge_store::LOG_FILE);
    let full_log = fs::read_to_string(&log_path).unwrap();
    let lines: Vec<&str> = full_log.lines().collect();
    assert!(lines.len() >= 5, "expected a non-trivial log");

    for cut in 0..=lines.len() {
        let dir2 = tempfile::tempdir().unwrap();
        let prefix = lines[..cut].join("\n");
        fs::write(dir2.path().join(forge_store::LOG_FILE), prefix + "\n").unwrap();
        let (_store, restored) = Store::open(dir2.path(), fresh_state).unwrap();
        restored.validate().unwrap_or_else(|e| panic!("prefix {cut}: {e}"));
    }
}

#[test]
fn torn_final_record_recovers_to_last_complete_record() {
    let dir = tempfile::tempdir().unwrap();
    let _live = drive(dir.path(), 5);
    let log_path = dir.path().join(forge_store::LOG_FILE);
    let bytes = fs::read(&log_path).unwrap();

    // Oracle: a log truncated at the last newline (dropping the torn tail)
    // must restore to the same state as the torn log.
    let torn = &bytes[..bytes.len() - 7];
    let keep = torn
        .iter()
        .rposition(|&b| b == b'\n')
        .map(|i| i + 1)
        .unwrap_or(0);
    let clean_prefix = &torn[..keep];

    let torn_dir = tempfile::tempdir().unwrap();
    fs::write(torn_dir.path().join(forge_store::LOG_FILE), torn).unwrap();
    let clean_dir = tempfile::tempdir().unwrap();
    fs::write(clean_dir.path().join(forge_store::LOG_FILE), clean_prefix).unwrap();

    let (_s1, from_torn) = Store::open(torn_dir.path(), fresh_state).unwrap();
    let (_s2, from_clean) = Store::open(clean_dir.path(), fresh_state).unwrap();
    assert_eq!(from_torn, from_clean);
}

#[test]
fn snapshot_truncates_log_and_restores() {
    let dir = tempfile::tempdir().unwrap();
    let live = {
        let mut service = StudyService::open(dir.path(), fresh_state).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        service
            .register_participant(t(0), &form("Ada", "a@example.org"), &ManualSubmission, &mut rng)
            .unwrap();
        service.force_snapshot().unwrap();
        service.state().clone()
    };
    let log_len = fs::metadata(dir.path().join(forge_store::LOG_FILE)).unwrap().len();
    assert_eq!(log_len, 0, "snapshot truncates the log");
    let (_store, restored) = Store::open(dir.path(), fresh_state).unwrap();
    assert_eq!(restored, live);
}

#[test]
fn empty_directory_yields_fresh_state() {
    let dir = tempfile::tempdir().unwrap();
    let (_store, state) = Store::open(dir.path(), fresh_state).unwrap();
    assert_eq!(state, fresh_state());
    assert!(state.study.participants.is_empty());
}

#[test]
fn empty_snapshot_file_yields_fresh_state() {
    let dir = tempfile::tempdir().unwrap();
    fs::File::create(dir.path().join(forge_store::SNAPSHOT_FILE))
        .unwrap()
        .write_all(b"")
        .unwrap();
    let (_store, state) = Store::open(dir.path(), fresh_state).unwrap();
    assert_eq!(state, fresh_state());
}

#[test]
fn corrupt_snapshot_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(forge_store::SNAPSHOT_FILE), b"{not json").unwrap();
    match Store::open(dir.path(), fresh_state) {
        Err(err) => assert!(matches!(err, forge_store::StoreError::CorruptSnapshot(_))),
        Ok(_) => panic!("corrupt snapshot must not open"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Live state and restored state agree for histories of any length.
    #[test]
    fn restored_state_equals_live_state(steps in 1usize..=5) {
        let dir = tempfile::tempdir().unwrap();
        let live = drive(dir.path(), steps);
        let (_store, restored) = Store::open(dir.path(), fresh_state).unwrap();
        prop_assert_eq!(restored, live);
    }
}
