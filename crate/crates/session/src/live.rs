//! The live dialogue state machine.
//!
//! One value of [`LiveSession`] owns everything that happens inside a single
//! booked slot: presence, the append-only transcript, the hint system,
//! timing and finalization. All events for one session are processed in
//! arrival order by a single owner (the gateway runs one actor per session);
//! distinct sessions are fully independent.

use crate::protocol::{visible_paper, ServerFrame};
use forge_domain::{
    derive_turns, segment_message_text, validate_message, Dialogue, DialogueId, FactAnchor,
    IntentGroup, Message, MessageError, MessageId, Paper, ParticipantId, Role, SentenceUnit,
    SlotId, Timestamp,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Static facts about the booked slot a live session runs in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotContext {
    pub slot_id: SlotId,
    pub paper: Paper,
    pub de_participant_id: ParticipantId,
    pub p_participant_id: ParticipantId,
    pub start_time: Timestamp,
    pub duration_minutes: u32,
}

impl SlotContext {
    /// The hard deadline: slot start plus slot duration.
    pub fn end_time(&self) -> Timestamp {
        self.start_time.plus_minutes(self.duration_minutes as i64)
    }
}

/// Timing knobs of the live protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRules {
    /// Minutes before slot start a party may already join.
    pub join_grace_minutes: i64,
    /// One-sided silence or absence longer than this marks an abrupt end.
    pub reply_timeout_minutes: i64,
    /// Turns without an argumentative sentence before a hint fires.
    pub hint_window_turns: usize,
}

impl Default for SessionRules {
    fn default() -> Self {
        SessionRules {
            join_grace_minutes: 2,
            reply_timeout_minutes: 5,
            hint_window_turns: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionState {
    WaitingForBoth,
    Active,
    Expired,
    Finalized,
    Abandoned,
}

/// A canned suggestion addressed to one role; advisory only, never part of
/// the transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HintEvent {
    pub target_role: Role,
    pub text: String,
    pub issued_at: Timestamp,
}

/// A server frame with its audience.
#[derive(Debug, Clone, PartialEq)]
pub enum Outgoing {
    To(Role, ServerFrame),
    Both(ServerFrame),
}

#[derive(Debug, Error, PartialEq)]
pub enum SessionError {
    #[error("this is not your slot")]
    NotYourSlot,
    #[error("the slot window is closed")]
    SlotWindowClosed,
    #[error("already joined")]
    AlreadyJoined,
    #[error("session is not active")]
    SessionNotActive,
    #[error("the slot deadline has passed")]
    PastDeadline,
    #[error(transparent)]
    InvalidMessage(#[from] MessageError),
    #[error("session already closed")]
    AlreadyClosed,
}

/// Result of finalization. Rejection is a value, not an error: dialogues
/// that are too short or ended abruptly are excluded from the corpus.
#[derive(Debug, Clone, PartialEq)]
pub enum FinalizeOutcome {
    Finalized(Dialogue),
    Abandoned { reason: String },
}

pub struct LiveSession {
    context: SlotContext,
    rules: SessionRules,
    state: SessionState,
    present: BTreeSet<Role>,
    transcript: Vec<Message>,
    started_at: Option<Timestamp>,
    deadline: Timestamp,
    end_requested: BTreeSet<Role>,
    absent_since: BTreeMap<Role, Timestamp>,
    abrupt_end: bool,
    /// Completed-turn count at the last hint, to avoid repeating a hint
    /// before the dialogue moves on.
    hinted_at_turns: Option<usize>,
    transitions: Vec<(SessionState, SessionState)>,
}

impl LiveSession {
    pub fn new(context: SlotContext, rules: SessionRules) -> LiveSession {
        LiveSession::with_transcript(context, rules, Vec::new())
    }

    /// Restores a session around an existing transcript (crash recovery).
    /// A non-empty transcript proves the session once activated.
    pub fn with_transcript(
        context: SlotContext,
        rules: SessionRules,
        transcript: Vec<Message>,
    ) -> LiveSession {
        let deadline = context.end_time();
        let started_at = transcript.first().map(|m| m.sent_at);
        let state = if transcript.is_empty() {
            SessionState::WaitingForBoth
        } else {
            // Messages prove both parties were once present.
            SessionState::Active
        };
        LiveSession {
            context,
            rules,
            state,
            present: BTreeSet::new(),
            transcript,
            started_at,
            deadline,
            end_requested: BTreeSet::new(),
            absent_since: BTreeMap::new(),
            abrupt_end: false,
            hinted_at_turns: None,
            transitions: Vec::new(),
        }
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn transcript(&self) -> &[Message] {
        &self.transcript
    }

    pub fn slot_id(&self) -> &SlotId {
        &self.context.slot_id
    }

    pub fn deadline(&self) -> Timestamp {
        self.deadline
    }

    /// Every state change this session went through, for auditing.
    pub fn transition_log(&self) -> &[(SessionState, SessionState)] {
        &self.transitions
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.state, SessionState::Finalized | SessionState::Abandoned)
    }

    fn set_state(&mut self, next: SessionState) {
        if self.state != next {
            self.transitions.push((self.state, next));
            self.state = next;
        }
    }

    fn role_of(&self, participant_id: &ParticipantId) -> Option<Role> {
        if participant_id == &self.context.de_participant_id {
            Some(Role::DomainExpert)
        } else if participant_id == &self.context.p_participant_id {
            Some(Role::Proponent)
        } else {
            None
        }
    }

    /// Admits a participant into the session and attributes their role. When
    /// the second role arrives the session activates.
    pub fn join(
        &mut self,
        participant_id: &ParticipantId,
        now: Timestamp,
    ) -> Result<(Role, Vec<Outgoing>), SessionError> {
        let role = self
            .role_of(participant_id)
            .ok_or(SessionError::NotYourSlot)?;
        let window_open = self
            .context
            .start_time
            .minus_minutes(self.rules.join_grace_minutes);
        if now < window_open || now >= self.deadline || self.is_closed() {
            return Err(SessionError::SlotWindowClosed);
        }
        if self.state == SessionState::Expired {
            return Err(SessionError::SlotWindowClosed);
        }
        if self.present.contains(&role) {
            return Err(SessionError::AlreadyJoined);
        }
        self.present.insert(role);
        self.absent_since.remove(&role);

        let peer_present = self.present.contains(&role.other());
        let out = vec![
            Outgoing::To(
                role,
                ServerFrame::Joined {
                    role,
                    paper: visible_paper(role, &self.context.paper),
                },
            ),
            Outgoing::To(
                role,
                ServerFrame::PeerPresence {
                    present: peer_present,
                },
            ),
            Outgoing::To(role.other(), ServerFrame::PeerPresence { present: true }),
        ];
        if self.present.len() == 2 && self.state == SessionState::WaitingForBoth {
            self.set_state(SessionState::Active);
            self.started_at = Some(now);
        }
        Ok((role, out))
    }

    /// Records a departure; an absence outlasting the reply timeout marks
    /// the session as ended abruptly.
    pub fn leave(&mut self, role: Role, now: Timestamp) -> Vec<Outgoing> {
        if self.present.remove(&role) {
            self.absent_since.insert(role, now);
            vec![Outgoing::To(
                role.other(),
                ServerFrame::PeerPresence { present: false },
            )]
        } else {
            Vec::new()
        }
    }

    /// Segments, validates and appends a message. Timestamps are
    /// server-assigned and strictly increasing; a zero-fact expert message
    /// is stored but triggers a warning back to the expert.
    pub fn post_message(
        &mut self,
        role: Role,
        raw_text: &str,
        facts: Vec<FactAnchor>,
        now: Timestamp,
    ) -> Result<(Message, Vec<Outgoing>), SessionError> {
        if self.state != SessionState::Active {
            return Err(SessionError::SessionNotActive);
        }
        if now >= self.deadline {
            self.set_state(SessionState::Expired);
            return Err(SessionError::PastDeadline);
        }
        let sentences: Vec<SentenceUnit> = segment_message_text(raw_text)
            .into_iter()
            .map(SentenceUnit::new)
            .collect();
        let sent_at = match self.transcript.last() {
            Some(last) if now <= last.sent_at => last.sent_at + 1,
            _ => now,
        };
        let message = Message {
            message_id: MessageId::new(format!(
                "{}-m{}",
                self.context.slot_id,
                self.transcript.len() + 1
            )),
            role,
            sentences,
            facts,
            sent_at,
            no_fact_warning: false,
        };
        let check = validate_message(&message, &self.context.paper)?;
        let mut message = message;
        message.no_fact_warning = check.no_fact_warning;
        self.transcript.push(message.clone());

        let mut out = vec![Outgoing::Both(ServerFrame::Msg {
            message: message.clone(),
        })];
        if check.no_fact_warning {
            out.push(Outgoing::To(Role::DomainExpert, ServerFrame::WarnNoFact));
        }
        Ok((message, out))
    }

    /// Emits a hint when the last few turns carried no argumentative
    /// sentence, addressed to the quieter role. At most one hint per
    /// completed turn.
    pub fn issue_hint(&mut self, now: Timestamp) -> Option<(HintEvent, Outgoing)> {
        if self.state != SessionState::Active {
            return None;
        }
        let probe = self.as_dialogue();
        let turns = derive_turns(&probe);
        if turns.len() < self.rules.hint_window_turns {
            return None;
        }
        if self.hinted_at_turns == Some(turns.len()) {
            return None;
        }
        // Sentences of the last K turns; unlabeled live sentences count as
        // non-argumentative.
        let recent_arg = turns
            .iter()
            .rev()
            .take(self.rules.hint_window_turns)
            .flat_map(|t| t.p_message.sentences.iter().chain(&t.de_message.sentences))
            .any(|s| s.intent.map(|i| i.group()) == Some(IntentGroup::Argumentative));
        let turns = turns.len();
        if recent_arg {
            return None;
        }

        let p_count = self
            .transcript
            .iter()
            .filter(|m| m.role == Role::Proponent)
            .count();
        let de_count = self.transcript.len() - p_count;
        let target_role = match p_count.cmp(&de_count) {
            std::cmp::Ordering::Less => Role::Proponent,
            std::cmp::Ordering::Greater => Role::DomainExpert,
            std::cmp::Ordering::Equal => self
                .transcript
                .last()
                .map(|m| m.role.other())
                .unwrap_or(Role::Proponent),
        };
        let text = match target_role {
            Role::Proponent => {
                "Consider sharing your opinion on the last few replies, or ask the expert for theirs."
            }
            Role::DomainExpert => {
                "Consider asking your partner what they think about a point from the previous turns."
            }
        };
        self.hinted_at_turns = Some(turns);
        let event = HintEvent {
            target_role,
            text: text.to_owned(),
            issued_at: now,
        };
        let frame = Outgoing::To(
            target_role,
            ServerFrame::Hint {
                text: event.text.clone(),
            },
        );
        Some((event, frame))
    }

    /// Registers an end-session request; returns true once both parties have
    /// asked, at which point the session may finalize early.
    pub fn signal_end(&mut self, role: Role) -> bool {
        self.end_requested.insert(role);
        self.end_requested.len() == 2
    }

    /// Advances clock-driven transitions: deadline expiry, absence past the
    /// reply timeout and reply silence. Safe to call at any time; the live
    /// ticker drives it once per second while a session runs.
    ///
    /// Absence duration is capped at the deadline so a late finalize reaches
    /// the verdict the ticker would have reached in-session. Silence is a
    /// live signal only: a dialogue that simply ran out of clock is not
    /// retroactively abrupt.
    pub fn check_timeouts(&mut self, now: Timestamp) {
        if self.is_closed() {
            return;
        }
        let timeout_ms = self.rules.reply_timeout_minutes * 60_000;
        if matches!(self.state, SessionState::Active | SessionState::Expired) {
            let live_now = now.min(self.deadline);
            if self
                .absent_since
                .values()
                .any(|&since| live_now - since >= timeout_ms)
            {
                self.abrupt_end = true;
            }
        }
        if self.state == SessionState::Active && now < self.deadline {
            if let Some(started) = self.started_at {
                let last_activity = self.transcript.last().map(|m| m.sent_at).unwrap_or(started);
                if now - last_activity >= timeout_ms {
                    self.abrupt_end = true;
                }
            }
        }
        if self.state == SessionState::Active && now >= self.deadline {
            self.set_state(SessionState::Expired);
        }
    }

    /// Whether finalization preconditions hold: deadline reached, mutual end
    /// requested, or an abrupt end detected.
    pub fn may_finalize(&self, now: Timestamp) -> bool {
        now >= self.deadline || self.end_requested.len() == 2 || self.abrupt_end
    }

    /// Closes the session: a clean transcript of at least eight messages
    /// becomes a finalized dialogue; anything shorter or abrupt is abandoned
    /// and excluded from the corpus.
    pub fn finalize(&mut self, now: Timestamp) -> Result<(FinalizeOutcome, Vec<Outgoing>), SessionError> {
        if self.is_closed() {
            return Err(SessionError::AlreadyClosed);
        }
        self.check_timeouts(now);
        if !self.may_finalize(now) {
            return Err(SessionError::SessionNotActive);
        }
        let long_enough = {
            let dialogue = self.as_dialogue();
            dialogue.meets_corpus_filter()
        };
        let activated = self.started_at.is_some();
        if activated && long_enough && !self.abrupt_end {
            let dialogue = self.as_dialogue();
            self.set_state(SessionState::Finalized);
            let out = vec![Outgoing::Both(ServerFrame::Closed {
                reason: "finalized".into(),
            })];
            Ok((FinalizeOutcome::Finalized(dialogue), out))
        } else {
            let reason = if self.abrupt_end {
                "ended abruptly"
            } else if !activated {
                "never activated"
            } else {
                "fewer than eight messages"
            };
            self.set_state(SessionState::Abandoned);
            let out = vec![Outgoing::Both(ServerFrame::Closed {
                reason: reason.into(),
            })];
            Ok((
                FinalizeOutcome::Abandoned {
                    reason: reason.into(),
                },
                out,
            ))
        }
    }

    fn as_dialogue(&self) -> Dialogue {
        Dialogue {
            dialogue_id: DialogueId::new(format!("d-{}", self.context.slot_id)),
            paper_id: self.context.paper.paper_id.clone(),
            slot_id: self.context.slot_id.clone(),
            messages: self.transcript.clone(),
            finalized: true,
        }
    }
}
