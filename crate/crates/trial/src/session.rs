//! The test protocol as an event-sourced state machine.
//!
//! Commands check the phase, draw from the sets and emit events; all state
//! changes happen in [`TrialSession::apply`], so folding a log over a blank
//! session rebuilds it exactly. Draw `n` of a session uses the stream
//! `split_seed(seed, n)`, which keeps a replayed session drawing the same
//! items as the original would have.

use std::collections::HashSet;

use gestalt_core::rng::split_seed;
use gestalt_core::{Label, SeededRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{Event, Shown, TestItem};
use crate::sets::{Entry, SetIndex, TrialSets};

pub const INITIAL_PER_CLASS: usize = 12;
pub const MORE_PER_REQUEST: usize = 3;
pub const ITEMS_PER_ROUND: usize = 20;
pub const TEST_ROUNDS: u8 = 4;
pub const TRAINING_ROUNDS: u8 = 3;
/// Failed test rounds after which the game stops.
pub const MAX_FAILURES: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "kebab-case")]
pub enum Phase {
    Training { round: u8 },
    /// `item` is the 1-based position of the pending item.
    Testing { round: u8, item: u8 },
    Passed,
    /// Abandoned by the subject.
    Failed,
    /// Out of remediation rounds.
    Exhausted,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Passed | Phase::Failed | Phase::Exhausted)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub item: u64,
    pub answer: Label,
    pub correct: bool,
    pub response_ms: Option<u64>,
    pub at: u64,
}

/// One sitting of a test round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub round: u8,
    /// Training round in force when the test began.
    pub after_training: u8,
    pub examples_seen: usize,
    pub items: Vec<TestItem>,
    pub answers: Vec<Answer>,
    pub started_at: u64,
    pub closed_at: Option<u64>,
}

impl Attempt {
    pub fn correct(&self) -> usize {
        self.answers.iter().filter(|a| a.correct).count()
    }
}

/// What a client may see of a test item: no label, no path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemView {
    pub item: u64,
    pub round: u8,
    /// 1-based position within the round.
    pub index: u8,
    pub of: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundVerdict {
    pub round: u8,
    pub correct: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerOutcome {
    pub phase: Phase,
    /// Present after the last item of a round.
    pub verdict: Option<RoundVerdict>,
    /// The next item to answer, if the session is still testing.
    pub next: Option<ItemView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: u8,
    pub attempt: usize,
    pub after_training: u8,
    pub examples_seen: usize,
    pub answered: usize,
    pub correct: usize,
    /// `correct / 20`.
    pub accuracy: f64,
    pub passed: Option<bool>,
    pub started_at: u64,
    pub duration_ms: Option<u64>,
    pub mean_response_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub session: String,
    pub task: String,
    pub seed: u64,
    pub biased: bool,
    pub phase: Phase,
    pub examples_seen: usize,
    pub rounds_passed: u8,
    pub failures: u8,
    pub answers: usize,
    pub rounds: Vec<RoundSummary>,
    pub started_at: u64,
    pub last_event_at: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSession {
    id: String,
    task: String,
    seed: u64,
    biased: bool,
    phase: Phase,
    training_round: u8,
    examples_seen: usize,
    passed: u8,
    failures: u8,
    exhibits: Vec<(u8, Shown)>,
    used: HashSet<String>,
    attempts: Vec<Attempt>,
    draws: u64,
    next_item: u64,
    events: Vec<Event>,
}

impl TrialSession {
    /// A fresh session in `Training(1)` showing 12 samples of each class.
    pub fn create(id: &str, sets: &TrialSets, seed: u64, biased: bool, now: u64) -> Result<Self> {
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(Error::InvalidInput(format!("session id `{id}` must be [A-Za-z0-9_-]+")));
        }
        let mut s = TrialSession::blank();
        s.apply(Event::Created {
            session: id.to_string(),
            task: sets.task.clone(),
            seed,
            biased,
            at: now,
        })?;
        let set = sets.training(1);
        let mut rng = s.draw_rng();
        let mut items = Vec::with_capacity(2 * INITIAL_PER_CLASS);
        for class in Label::BOTH {
            items.extend(s.pick(set, class, INITIAL_PER_CLASS, &mut rng)?.into_iter().map(|e| Shown {
                class,
                key: e.key.clone(),
            }));
        }
        s.apply(Event::Exhibited { round: 1, items, at: now })?;
        Ok(s)
    }

    /// Rebuild a session from its log.
    pub fn replay(events: impl IntoIterator<Item = Event>) -> Result<Self> {
        let mut s = TrialSession::blank();
        for e in events {
            s.apply(e)?;
        }
        if s.id.is_empty() {
            return Err(Error::Replay("log has no created event".into()));
        }
        Ok(s)
    }

    fn blank() -> Self {
        TrialSession {
            id: String::new(),
            task: String::new(),
            seed: 0,
            biased: false,
            phase: Phase::Training { round: 1 },
            training_round: 1,
            examples_seen: 0,
            passed: 0,
            failures: 0,
            exhibits: Vec::new(),
            used: HashSet::new(),
            attempts: Vec::new(),
            draws: 0,
            next_item: 1,
            events: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn task(&self) -> &str {
        &self.task
    }

    pub fn biased(&self) -> bool {
        self.biased
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn examples_seen(&self) -> usize {
        self.examples_seen
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn attempts(&self) -> &[Attempt] {
        &self.attempts
    }

    /// Every exhibited image with the training round it was shown in.
    pub fn exhibits(&self) -> &[(u8, Shown)] {
        &self.exhibits
    }

    /// Show three more unseen samples of `class` from the current training set.
    pub fn more_examples(&mut self, sets: &TrialSets, class: Label, now: u64) -> Result<Vec<Shown>> {
        let Phase::Training { round } = self.phase else {
            return Err(self.wrong_phase("more examples"));
        };
        let mut rng = self.draw_rng();
        let items: Vec<Shown> = self
            .pick(sets.training(round), class, MORE_PER_REQUEST, &mut rng)?
            .into_iter()
            .map(|e| Shown {
                class,
                key: e.key.clone(),
            })
            .collect();
        self.apply(Event::Exhibited {
            round,
            items: items.clone(),
            at: now,
        })?;
        Ok(items)
    }

    /// Stop training and draw the next test round: 10 unseen items of each
    /// class, shuffled.
    pub fn begin_testing(&mut self, sets: &TrialSets, now: u64) -> Result<ItemView> {
        if !matches!(self.phase, Phase::Training { .. }) {
            return Err(self.wrong_phase("begin testing"));
        }
        let event = self.draw_test(sets, self.passed + 1, now)?;
        self.apply(event)?;
        Ok(self.current_item().expect("testing phase has an item"))
    }

    /// The event drawing test round `round`, not yet applied.
    fn draw_test(&self, sets: &TrialSets, round: u8, now: u64) -> Result<Event> {
        let mut rng = self.draw_rng();
        let set = sets.test(round);
        let mut entries = Vec::with_capacity(ITEMS_PER_ROUND);
        for class in Label::BOTH {
            entries.extend(self.pick(set, class, ITEMS_PER_ROUND / 2, &mut rng)?);
        }
        rng.shuffle(&mut entries);
        let items = entries
            .into_iter()
            .zip(self.next_item..)
            .map(|(e, id)| TestItem {
                id,
                key: e.key.clone(),
                label: e.label,
            })
            .collect();
        Ok(Event::TestingBegun { round, items, at: now })
    }

    /// The pending test item, if testing.
    pub fn current_item(&self) -> Option<ItemView> {
        let Phase::Testing { round, item } = self.phase else {
            return None;
        };
        let pending = self.attempts.last()?.items.get(usize::from(item) - 1)?;
        Some(ItemView {
            item: pending.id,
            round,
            index: item,
            of: ITEMS_PER_ROUND as u8,
        })
    }

    /// Image key of test item `id`, only while it is pending.
    pub fn pending_key(&self, id: u64) -> Result<&str> {
        let view = self.current_item().ok_or_else(|| self.wrong_phase("fetch a test image"))?;
        if view.item != id {
            return Err(Error::Protocol(format!("item {id} is not pending (item {} is)", view.item)));
        }
        let a = self.attempts.last().expect("testing has an attempt");
        Ok(&a.items[usize::from(view.index) - 1].key)
    }

    pub fn submit_answer(
        &mut self,
        sets: &TrialSets,
        item: u64,
        answer: Label,
        response_ms: Option<u64>,
        now: u64,
    ) -> Result<AnswerOutcome> {
        let view = self.current_item().ok_or_else(|| self.wrong_phase("answer"))?;
        if view.item != item {
            return Err(Error::Protocol(format!(
                "answer for item {item} but item {} is pending",
                view.item
            )));
        }
        let attempt = self.attempts.last().expect("testing has an attempt");
        let correct = answer == attempt.items[usize::from(view.index) - 1].label;
        let answered = Event::Answered {
            item,
            answer,
            correct,
            response_ms,
            at: now,
        };
        if usize::from(view.index) < ITEMS_PER_ROUND {
            self.apply(answered)?;
            return Ok(AnswerOutcome {
                phase: self.phase,
                verdict: None,
                next: self.current_item(),
            });
        }
        // Last item: work out the verdict and any next draw before touching
        // state, so a failed draw leaves the answer pending.
        let total = attempt.correct() + usize::from(correct);
        let next = self.next_phase(view.round, total);
        let follow = match next {
            Phase::Testing { round, .. } => Some(self.draw_test(sets, round, now)?),
            _ => None,
        };
        self.apply(answered)?;
        self.apply(Event::RoundClosed {
            round: view.round,
            correct: total,
            next,
            at: now,
        })?;
        if let Some(e) = follow {
            self.apply(e)?;
        }
        Ok(AnswerOutcome {
            phase: self.phase,
            verdict: Some(RoundVerdict {
                round: view.round,
                correct: total,
                passed: total == ITEMS_PER_ROUND,
            }),
            next: self.current_item(),
        })
    }

    /// The subject stops. Terminal sessions are left as they are.
    pub fn abandon(&mut self, now: u64) -> Result<()> {
        if self.phase.is_terminal() {
            return Err(self.wrong_phase("abandon"));
        }
        self.apply(Event::Abandoned { at: now })
    }

    fn next_phase(&self, round: u8, correct: usize) -> Phase {
        if correct == ITEMS_PER_ROUND {
            if round == TEST_ROUNDS {
                Phase::Passed
            } else {
                Phase::Testing { round: round + 1, item: 1 }
            }
        } else if self.failures + 1 >= MAX_FAILURES {
            Phase::Exhausted
        } else {
            Phase::Training {
                round: (self.training_round + 1).min(TRAINING_ROUNDS),
            }
        }
    }

    pub fn report(&self) -> Report {
        let rounds = self
            .attempts
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let closed = a.closed_at.map(|_| a.correct() == ITEMS_PER_ROUND);
                let times: Vec<u64> = a.answers.iter().filter_map(|x| x.response_ms).collect();
                RoundSummary {
                    round: a.round,
                    attempt: i + 1,
                    after_training: a.after_training,
                    examples_seen: a.examples_seen,
                    answered: a.answers.len(),
                    correct: a.correct(),
                    accuracy: a.correct() as f64 / ITEMS_PER_ROUND as f64,
                    passed: closed,
                    started_at: a.started_at,
                    duration_ms: a.closed_at.map(|c| c.saturating_sub(a.started_at)),
                    mean_response_ms: (!times.is_empty())
                        .then(|| times.iter().sum::<u64>() as f64 / times.len() as f64),
                }
            })
            .collect();
        Report {
            session: self.id.clone(),
            task: self.task.clone(),
            seed: self.seed,
            biased: self.biased,
            phase: self.phase,
            examples_seen: self.examples_seen,
            rounds_passed: self.passed,
            failures: self.failures,
            answers: self.attempts.iter().map(|a| a.answers.len()).sum(),
            rounds,
            started_at: self.events.first().map_or(0, Event::at),
            last_event_at: self.events.last().map_or(0, Event::at),
        }
    }

    fn draw_rng(&self) -> SeededRng {
        SeededRng::new(split_seed(self.seed, self.draws))
    }

    /// `n` random entries of `class` from `set` not yet shown or tested.
    fn pick<'a>(&self, set: &'a SetIndex, class: Label, n: usize, rng: &mut SeededRng) -> Result<Vec<&'a Entry>> {
        let mut pool: Vec<&Entry> = set
            .entries
            .iter()
            .filter(|e| e.label == class && !self.used.contains(&e.key))
            .collect();
        if pool.len() < n {
            return Err(Error::SetExhausted {
                set: set.name.clone(),
                what: format!("class {class} samples ({} left, {n} needed)", pool.len()),
            });
        }
        rng.shuffle(&mut pool);
        pool.truncate(n);
        Ok(pool)
    }

    fn wrong_phase(&self, what: &str) -> Error {
        Error::Protocol(format!("cannot {what} in phase {:?}", self.phase))
    }

    fn mark_used(&mut self, key: &str) -> Result<()> {
        if !self.used.insert(key.to_string()) {
            return Err(Error::Replay(format!("{key} drawn twice")));
        }
        Ok(())
    }

    /// The only place state changes. Rejects events the protocol does not
    /// allow in the current state.
    pub fn apply(&mut self, event: Event) -> Result<()> {
        let bad = |why: String| Err(Error::Replay(why));
        if self.id.is_empty() != matches!(event, Event::Created { .. }) {
            return bad(format!("{event:?} out of order"));
        }
        if self.phase.is_terminal() {
            return bad(format!("{event:?} after the session ended"));
        }
        let initial = !self.id.is_empty() && self.examples_seen == 0;
        if initial && !matches!(event, Event::Exhibited { .. }) {
            return bad(format!("{event:?} before the initial exhibit"));
        }
        match &event {
            Event::Created {
                session,
                task,
                seed,
                biased,
                ..
            } => {
                self.id = session.clone();
                self.task = task.clone();
                self.seed = *seed;
                self.biased = *biased;
            }
            Event::Exhibited { round, items, .. } => {
                if self.phase != (Phase::Training { round: *round }) {
                    return bad(format!("exhibit for round {round} in {:?}", self.phase));
                }
                let size_ok = if self.examples_seen == 0 {
                    items.len() == 2 * INITIAL_PER_CLASS
                } else {
                    items.len() == MORE_PER_REQUEST && items.iter().all(|x| x.class == items[0].class)
                };
                if !size_ok {
                    return bad(format!("exhibit of {} items after {} seen", items.len(), self.examples_seen));
                }
                for s in items {
                    self.mark_used(&s.key)?;
                    self.exhibits.push((*round, s.clone()));
                }
                self.examples_seen += items.len();
                self.draws += 1;
            }
            Event::TestingBegun { round, items, at } => {
                let allowed = match self.phase {
                    Phase::Training { .. } => true,
                    Phase::Testing { round: r, .. } => {
                        self.attempts.last().is_some_and(|a| a.closed_at.is_some()) && *round == r + 1
                    }
                    _ => false,
                };
                if !allowed || *round != self.passed + 1 || items.len() != ITEMS_PER_ROUND {
                    return bad(format!("test round {round} with {} items in {:?}", items.len(), self.phase));
                }
                for (it, id) in items.iter().zip(self.next_item..) {
                    if it.id != id {
                        return bad(format!("item id {} where {id} was due", it.id));
                    }
                    self.mark_used(&it.key)?;
                }
                self.next_item += items.len() as u64;
                self.attempts.push(Attempt {
                    round: *round,
                    after_training: self.training_round,
                    examples_seen: self.examples_seen,
                    items: items.clone(),
                    answers: Vec::new(),
                    started_at: *at,
                    closed_at: None,
                });
                self.phase = Phase::Testing { round: *round, item: 1 };
                self.draws += 1;
            }
            Event::Answered {
                item,
                answer,
                correct,
                response_ms,
                at,
            } => {
                let Phase::Testing { round, item: pos } = self.phase else {
                    return bad(format!("answer in {:?}", self.phase));
                };
                let a = self.attempts.last_mut().expect("testing has an attempt");
                let Some(pending) = a.items.get(usize::from(pos) - 1) else {
                    return bad(format!("answer after the last item of round {round}"));
                };
                if pending.id != *item || (pending.label == *answer) != *correct {
                    return bad(format!("answer {item} does not match pending item {}", pending.id));
                }
                a.answers.push(Answer {
                    item: *item,
                    answer: *answer,
                    correct: *correct,
                    response_ms: *response_ms,
                    at: *at,
                });
                self.phase = Phase::Testing { round, item: pos + 1 };
            }
            Event::RoundClosed { round, correct, next, at } => {
                let (Phase::Testing { round: r, item }, Some(a)) = (self.phase, self.attempts.last()) else {
                    return bad(format!("round close in {:?}", self.phase));
                };
                if r != *round || usize::from(item) != ITEMS_PER_ROUND + 1 || a.correct() != *correct {
                    return bad(format!("round {round} closed with {correct} correct out of order"));
                }
                let expected = self.next_phase(r, *correct);
                if expected != *next {
                    return bad(format!("round {round} leads to {expected:?}, log says {next:?}"));
                }
                self.attempts.last_mut().expect("attempt").closed_at = Some(*at);
                if *correct == ITEMS_PER_ROUND {
                    self.passed += 1;
                } else {
                    self.failures += 1;
                }
                match *next {
                    // The next test draw is its own event; the phase stays
                    // past the closed round's last item until then.
                    Phase::Testing { .. } => {}
                    Phase::Training { round } => {
                        self.training_round = round;
                        self.phase = *next;
                    }
                    terminal => self.phase = terminal,
                }
            }
            Event::Abandoned { .. } => self.phase = Phase::Failed,
        }
        self.events.push(event);
        Ok(())
    }
}
