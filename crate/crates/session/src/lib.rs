//! Live dialogue sessions: presence matching, role-asymmetric paper access,
//! validated message posting, the hint system and finalization with the
//! corpus filter.

pub mod live;
pub mod protocol;

pub use live::{
    FinalizeOutcome, HintEvent, LiveSession, Outgoing, SessionError, SessionRules, SessionState,
    SlotContext,
};
pub use protocol::{visible_paper, ClientFrame, PaperView, ServerFrame};

#[cfg(test)]
mod tests {
    use super::*;
    use forge_domain::{
        FactAnchor, IntentLabel, Paper, PaperId, ParticipantId, Role, SectionKind, SlotId,
        Timestamp,
    };

    fn t(minutes: i64) -> Timestamp {
        Timestamp::from_millis(minutes * 60_000)
    }

    fn context() -> SlotContext {
        SlotContext {
            slot_id: SlotId::from("slot-1"),
            paper: Paper::new(
                PaperId::from("p1"),
                "A Public Title",
                vec!["Hidden abstract alpha.".into(), "Hidden abstract beta.".into()],
                vec!["Hidden intro gamma.".into(), "Hidden intro delta.".into()],
                ParticipantId::from("de-1"),
            )
            .unwrap(),
            de_participant_id: ParticipantId::from("de-1"),
            p_participant_id: ParticipantId::from("p-1"),
            start_time: t(100),
            duration_minutes: 20,
        }
    }

    fn session() -> LiveSession {
        LiveSession::new(context(), SessionRules::default())
    }

    fn active_session() -> LiveSession {
        let mut s = session();
        s.join(&ParticipantId::from("de-1"), t(100)).unwrap();
        s.join(&ParticipantId::from("p-1"), t(101)).unwrap();
        assert_eq!(s.state(), SessionState::Active);
        s
    }

    #[test]
    fn second_join_activates() {
        let mut s = session();
        let (role, _) = s.join(&ParticipantId::from("de-1"), t(99)).unwrap();
        assert_eq!(role, Role::DomainExpert);
        assert_eq!(s.state(), SessionState::WaitingForBoth);
        let (role, _) = s.join(&ParticipantId::from("p-1"), t(100)).unwrap();
        assert_eq!(role, Role::Proponent);
        assert_eq!(s.state(), SessionState::Active);
    }

    #[test]
    fn stranger_is_rejected() {
        let mut s = session();
        assert_eq!(
            s.join(&ParticipantId::from("intruder"), t(100)).unwrap_err(),
            SessionError::NotYourSlot
        );
    }

    #[test]
    fn join_window_honors_grace_and_deadline() {
        let mut s = session();
        assert_eq!(
            s.join(&ParticipantId::from("de-1"), t(97)).unwrap_err(),
            SessionError::SlotWindowClosed,
            "more than two minutes early"
        );
        s.join(&ParticipantId::from("de-1"), t(98)).unwrap();
        assert_eq!(
            s.join(&ParticipantId::from("p-1"), t(120)).unwrap_err(),
            SessionError::SlotWindowClosed,
            "at or past slot end"
        );
    }

    #[test]
    fn double_join_rejected() {
        let mut s = session();
        s.join(&ParticipantId::from("de-1"), t(100)).unwrap();
        assert_eq!(
            s.join(&ParticipantId::from("de-1"), t(101)).unwrap_err(),
            SessionError::AlreadyJoined
        );
    }

    #[test]
    fn joined_frame_is_role_filtered() {
        let mut s = session();
        let (_, out) = s.join(&ParticipantId::from("p-1"), t(100)).unwrap();
        let joined = out
            .iter()
            .find_map(|o| match o {
                Outgoing::To(Role::Proponent, ServerFrame::Joined { paper, .. }) => Some(paper),
                _ => None,
            })
            .expect("joined frame");
        assert_eq!(joined.sections.len(), 1);
        let bytes = serde_json::to_string(&joined).unwrap();
        assert!(!bytes.contains("Hidden"));
    }

    #[test]
    fn expert_message_with_two_anchors_stored() {
        let mut s = active_session();
        let (message, out) = s
            .post_message(
                Role::DomainExpert,
                "See the abstract. It covers this.",
                vec![
                    FactAnchor::new(SectionKind::Abstract, 0),
                    FactAnchor::new(SectionKind::Introduction, 1),
                ],
                t(102),
            )
            .unwrap();
        assert_eq!(message.facts.len(), 2);
        assert_eq!(message.sentences.len(), 2);
        assert!(!message.no_fact_warning);
        assert!(out
            .iter()
            .all(|o| !matches!(o, Outgoing::To(_, ServerFrame::WarnNoFact))));
    }

    #[test]
    fn factless_expert_message_warns_but_stores() {
        let mut s = active_session();
        let (message, out) = s
            .post_message(Role::DomainExpert, "Trust me on this.", vec![], t(102))
            .unwrap();
        assert!(message.no_fact_warning);
        assert_eq!(s.transcript().len(), 1);
        assert!(out
            .iter()
            .any(|o| matches!(o, Outgoing::To(Role::DomainExpert, ServerFrame::WarnNoFact))));
    }

    #[test]
    fn posting_at_deadline_expires() {
        let mut s = active_session();
        let err = s
            .post_message(Role::Proponent, "Too late?", vec![], t(120))
            .unwrap_err();
        assert_eq!(err, SessionError::PastDeadline);
        assert_eq!(s.state(), SessionState::Expired);
    }

    #[test]
    fn posting_before_activation_rejected() {
        let mut s = session();
        s.join(&ParticipantId::from("de-1"), t(100)).unwrap();
        assert_eq!(
            s.post_message(Role::DomainExpert, "Anyone here?", vec![], t(101))
                .unwrap_err(),
            SessionError::SessionNotActive
        );
    }

    #[test]
    fn timestamps_strictly_increase_even_on_clock_ties() {
        let mut s = active_session();
        let (m1, _) = s.post_message(Role::Proponent, "One.", vec![], t(102)).unwrap();
        let (m2, _) = s.post_message(Role::DomainExpert, "Two.", vec![], t(102)).unwrap();
        let (m3, _) = s
            .post_message(Role::Proponent, "Three.", vec![], Timestamp::from_millis(0))
            .unwrap();
        assert!(m1.sent_at < m2.sent_at);
        assert!(m2.sent_at < m3.sent_at);
    }

    fn exchange_turns(s: &mut LiveSession, turns: usize, from_minute: i64) {
        for i in 0..turns {
            let at = t(from_minute) + (i as i64 * 2_000);
            s.post_message(Role::Proponent, "What about this?", vec![], at)
                .unwrap();
            s.post_message(Role::DomainExpert, "Here is an answer.", vec![], at + 1_000)
                .unwrap();
        }
    }

    #[test]
    fn quiet_turns_trigger_hint_once() {
        let mut s = active_session();
        exchange_turns(&mut s, 3, 102);
        let (event, _frame) = s.issue_hint(t(105)).expect("hint after three flat turns");
        // Equal message counts: the hint targets whoever did not speak last.
        assert_eq!(event.target_role, Role::Proponent);
        assert!(s.issue_hint(t(105)).is_none(), "no second hint this turn");
        exchange_turns(&mut s, 1, 110);
        assert!(s.issue_hint(t(111)).is_some(), "new turn re-arms the hint");
    }

    #[test]
    fn argumentative_turn_suppresses_hint() {
        let mut s = active_session();
        exchange_turns(&mut s, 3, 102);
        // Label the last DE sentence as an opinion, as an annotator would.
        let last = s.transcript().len() - 1;
        let mut restored: Vec<_> = s.transcript().to_vec();
        restored[last].sentences[0].intent = Some(IntentLabel::GiveOpinion);
        let mut s = LiveSession::with_transcript(context(), SessionRules::default(), restored);
        assert!(s.issue_hint(t(105)).is_none());
    }

    #[test]
    fn hint_needs_enough_turns() {
        let mut s = active_session();
        exchange_turns(&mut s, 2, 102);
        assert!(s.issue_hint(t(104)).is_none());
    }

    #[test]
    fn inactive_session_never_hints() {
        let mut s = session();
        assert!(s.issue_hint(t(100)).is_none());
    }

    #[test]
    fn eight_messages_finalize_cleanly() {
        let mut s = active_session();
        exchange_turns(&mut s, 4, 102);
        let (outcome, out) = s.finalize(t(120)).unwrap();
        match outcome {
            FinalizeOutcome::Finalized(dialogue) => {
                assert_eq!(dialogue.messages.len(), 8);
                assert!(dialogue.finalized);
                assert_eq!(dialogue.slot_id, SlotId::from("slot-1"));
            }
            other => panic!("expected finalized, got {other:?}"),
        }
        assert_eq!(s.state(), SessionState::Finalized);
        assert!(out
            .iter()
            .any(|o| matches!(o, Outgoing::Both(ServerFrame::Closed { .. }))));
    }

    #[test]
    fn seven_messages_are_abandoned() {
        let mut s = active_session();
        exchange_turns(&mut s, 3, 102);
        s.post_message(Role::Proponent, "Half a turn.", vec![], t(103))
            .unwrap();
        let (outcome, _) = s.finalize(t(120)).unwrap();
        assert!(matches!(outcome, FinalizeOutcome::Abandoned { .. }));
        assert_eq!(s.state(), SessionState::Abandoned);
    }

    #[test]
    fn disconnect_past_reply_timeout_abandons_long_dialogue() {
        let mut s = active_session();
        exchange_turns(&mut s, 6, 102);
        assert!(s.transcript().len() >= 12);
        s.leave(Role::DomainExpert, t(110));
        s.check_timeouts(t(115));
        let (outcome, _) = s.finalize(t(120)).unwrap();
        match outcome {
            FinalizeOutcome::Abandoned { reason } => assert!(reason.contains("abrupt")),
            other => panic!("expected abandoned, got {other:?}"),
        }
    }

    #[test]
    fn mutual_end_finalizes_early() {
        let mut s = active_session();
        exchange_turns(&mut s, 4, 102);
        assert!(!s.signal_end(Role::Proponent));
        assert!(s.signal_end(Role::DomainExpert));
        assert!(s.may_finalize(t(104)));
        let (outcome, _) = s.finalize(t(104)).unwrap();
        assert!(matches!(outcome, FinalizeOutcome::Finalized(_)));
    }

    #[test]
    fn finalize_requires_a_trigger() {
        let mut s = active_session();
        exchange_turns(&mut s, 4, 102);
        assert!(!s.may_finalize(t(104)));
        assert!(s.finalize(t(104)).is_err());
    }

    #[test]
    fn never_activated_session_abandons_at_deadline() {
        let mut s = session();
        s.join(&ParticipantId::from("de-1"), t(100)).unwrap();
        let (outcome, _) = s.finalize(t(120)).unwrap();
        assert!(matches!(outcome, FinalizeOutcome::Abandoned { .. }));
        assert_eq!(
            s.transition_log(),
            &[(SessionState::WaitingForBoth, SessionState::Abandoned)]
        );
    }

    #[test]
    fn transition_log_stays_legal() {
        let legal = |from: SessionState, to: SessionState| -> bool {
            use SessionState::*;
            matches!(
                (from, to),
                (WaitingForBoth, Active)
                    | (WaitingForBoth, Abandoned)
                    | (Active, Finalized)
                    | (Active, Abandoned)
                    | (Active, Expired)
                    | (Expired, Finalized)
                    | (Expired, Abandoned)
            )
        };
        let mut s = active_session();
        exchange_turns(&mut s, 4, 102);
        s.post_message(Role::Proponent, "Too late.", vec![], t(121))
            .ok();
        let _ = s.finalize(t(121)).unwrap();
        for &(from, to) in s.transition_log() {
            assert!(legal(from, to), "illegal transition {from:?} -> {to:?}");
        }
        assert!(s.finalize(t(122)).is_err(), "terminal states stay closed");
    }

    #[test]
    fn long_silence_marks_abrupt_end() {
        let mut s = active_session();
        exchange_turns(&mut s, 4, 102);
        // The live ticker notices five quiet minutes well before the
        // deadline; the session is then abandoned regardless of length.
        s.check_timeouts(t(110));
        let (outcome, _) = s.finalize(t(120)).unwrap();
        assert!(matches!(outcome, FinalizeOutcome::Abandoned { .. }));
    }

    #[test]
    fn quiet_tail_without_live_detection_still_finalizes() {
        let mut s = active_session();
        exchange_turns(&mut s, 4, 102);
        // No live check ran between the last message and the deadline, so
        // the dialogue simply ran out of clock.
        let (outcome, _) = s.finalize(t(125)).unwrap();
        assert!(matches!(outcome, FinalizeOutcome::Finalized(_)));
    }

    #[test]
    fn activity_near_deadline_is_not_abrupt() {
        let mut s = active_session();
        exchange_turns(&mut s, 3, 102);
        exchange_turns(&mut s, 1, 117);
        let (outcome, _) = s.finalize(t(125)).unwrap();
        assert!(matches!(outcome, FinalizeOutcome::Finalized(_)));
    }
}
