//! The retrieval baseline and the two evaluation loops.

use crate::folds::{turn_samples, FoldPlan, TurnSample};
use crate::metrics::{fact_f1, message_f1};
use crate::tfidf::{tfidf_fit, TfidfModel};
use forge_analysis::Tokenizer;
use forge_domain::{Corpus, PaperId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use thiserror::Error;

/// Separator used when a sample's history is serialized as one string for an
/// external process.
pub const HISTORY_SEPARATOR: &str = " <sep> ";

/// How many facts the baseline predicts per query.
pub const DEFAULT_FACT_K: usize = 2;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("tf-idf fit failed: {0}")]
    Tfidf(#[from] crate::tfidf::TfidfError),
    #[error("fold plan does not match corpus: {0}")]
    PlanMismatch(String),
    #[error("generator failed: {0}")]
    GeneratorFailure(String),
}

/// Ranks `paper_sentences` by cosine similarity with `query` under `model`
/// and returns the indices of the top `k`, ties broken toward the lower
/// index. A zero query vector degenerates to the tie-break order.
pub fn select_facts(
    query: &str,
    paper_sentences: &[String],
    model: &TfidfModel,
    k: usize,
) -> Vec<usize> {
    let query_vec = model.embed(query);
    let mut scored: Vec<(usize, f64)> = paper_sentences
        .iter()
        .enumerate()
        .map(|(i, sentence)| {
            let v = model.embed(sentence);
            // Embeddings are L2-normalized, so the dot product is the cosine;
            // zero vectors contribute similarity 0.
            let sim: f64 = query_vec.iter().zip(&v).map(|(a, b)| a * b).sum();
            (i, sim)
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(k.min(paper_sentences.len()));
    scored.into_iter().map(|(i, _)| i).collect()
}

/// A fact selection strategy evaluated against gold anchors.
pub enum FactMethod {
    /// TF-IDF retrieval fitted per fold on the training papers' sentences.
    Tfidf,
    /// Returns the gold set itself; scores exactly 100.
    Oracle,
    /// Returns the empty set; scores 0 wherever gold is non-empty.
    Empty,
    /// External process, one JSON request line in, one JSON index array out.
    External(String),
}

/// Wire format sent to external selectors and generators, one JSON object
/// per line.
#[derive(Debug, Serialize)]
pub struct SampleRequest<'a> {
    pub query: &'a str,
    pub paper_id: &'a str,
    /// History messages joined with [`HISTORY_SEPARATOR`], oldest first.
    pub history: String,
    pub paper_sentences: &'a [String],
    pub gold_facts: &'a BTreeSet<usize>,
    pub gold_response: &'a str,
}

impl<'a> SampleRequest<'a> {
    fn new(sample: &'a TurnSample, paper_sentences: &'a [String]) -> Self {
        SampleRequest {
            query: &sample.query,
            paper_id: sample.paper_id.as_str(),
            history: sample.history.join(HISTORY_SEPARATOR),
            paper_sentences,
            gold_facts: &sample.gold_facts,
            gold_response: &sample.gold_response,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactFoldScore {
    /// Mean Fact-F1 x100 over the fold's test samples; null when the fold
    /// has no test sample.
    pub fact_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactEvalReport {
    pub folds: Vec<FactFoldScore>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenFoldScore {
    pub message_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenEvalReport {
    pub folds: Vec<GenFoldScore>,
    pub mean: f64,
}

fn paper_sentence_table(corpus: &Corpus) -> BTreeMap<&PaperId, Vec<String>> {
    corpus
        .papers
        .iter()
        .map(|(id, paper)| {
            (
                id,
                paper
                    .flattened_sentences()
                    .into_iter()
                    .map(str::to_owned)
                    .collect(),
            )
        })
        .collect()
}

fn mean_of(scores: impl IntoIterator<Item = f64>) -> Option<f64> {
    let values: Vec<f64> = scores.into_iter().collect();
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Runs fact selection over every fold's test samples and reports per-fold
/// and mean Fact-F1 (x100).
pub fn evaluate_fact_selection(
    corpus: &Corpus,
    plan: &FoldPlan,
    method: &FactMethod,
) -> Result<FactEvalReport, EvalError> {
    let sentences = paper_sentence_table(corpus);
    let mut folds = Vec::with_capacity(plan.iterations.len());

    for iteration in &plan.iterations {
        let samples = turn_samples(corpus, &iteration.test_dialogues);
        // The TF-IDF model sees only training-paper sentences, preserving
        // paper-level isolation.
        let model = match method {
            FactMethod::Tfidf => {
                let train_texts: Vec<&String> = iteration
                    .train_papers
                    .iter()
                    .flat_map(|p| {
                        sentences
                            .get(p)
                            .ok_or(())
                            .expect("plan papers resolve")
                            .iter()
                    })
                    .collect();
                if train_texts.is_empty() {
                    return Err(EvalError::PlanMismatch(
                        "iteration has no training sentences".into(),
                    ));
                }
                Some(tfidf_fit(&train_texts, Tokenizer::default())?)
            }
            _ => None,
        };

        let mut external = match method {
            FactMethod::External(cmd) => Some(LineProcess::spawn(cmd)?),
            _ => None,
        };

        let mut scores = Vec::with_capacity(samples.len());
        for sample in &samples {
            let paper_sentences = &sentences[&sample.paper_id];
            let predicted: BTreeSet<usize> = match method {
                FactMethod::Tfidf => select_facts(
                    &sample.query,
                    paper_sentences,
                    model.as_ref().expect("model fitted"),
                    DEFAULT_FACT_K,
                )
                .into_iter()
                .collect(),
                FactMethod::Oracle => sample.gold_facts.clone(),
                FactMethod::Empty => BTreeSet::new(),
                FactMethod::External(_) => {
                    let process = external.as_mut().expect("spawned");
                    let request = SampleRequest::new(sample, paper_sentences);
                    let line = process.round_trip(&serde_json::to_string(&request).unwrap())?;
                    serde_json::from_str(&line).map_err(|e| {
                        EvalError::GeneratorFailure(format!("selector output not an index array: {e}"))
                    })?
                }
            };
            scores.push(100.0 * fact_f1(&predicted, &sample.gold_facts));
        }
        if let Some(process) = external {
            process.finish()?;
        }
        folds.push(FactFoldScore {
            fact_f1: mean_of(scores),
        });
    }
    let mean = mean_of(folds.iter().filter_map(|f| f.fact_f1)).unwrap_or(0.0);
    Ok(FactEvalReport { folds, mean })
}

/// Scores an external response generator with token-level Message-F1 (x100).
///
/// The generator reads one JSON sample per line and writes one response line
/// per sample; one process is spawned per fold.
pub fn evaluate_generation(
    corpus: &Corpus,
    plan: &FoldPlan,
    generator: &str,
) -> Result<GenEvalReport, EvalError> {
    let sentences = paper_sentence_table(corpus);
    let tokenizer = Tokenizer::default();
    let mut folds = Vec::with_capacity(plan.iterations.len());

    for iteration in &plan.iterations {
        let samples = turn_samples(corpus, &iteration.test_dialogues);
        if samples.is_empty() {
            folds.push(GenFoldScore { message_f1: None });
            continue;
        }
        let requests: Vec<String> = samples
            .iter()
            .map(|s| serde_json::to_string(&SampleRequest::new(s, &sentences[&s.paper_id])).unwrap())
            .collect();
        let responses = run_batch(generator, &requests)?;
        if responses.len() != samples.len() {
            return Err(EvalError::GeneratorFailure(format!(
                "expected {} response lines, got {}",
                samples.len(),
                responses.len()
            )));
        }
        let scores = samples
            .iter()
            .zip(&responses)
            .map(|(sample, response)| 100.0 * message_f1(response, &sample.gold_response, &tokenizer));
        folds.push(GenFoldScore {
            message_f1: mean_of(scores),
        });
    }
    let mean = mean_of(folds.iter().filter_map(|f| f.message_f1)).unwrap_or(0.0);
    Ok(GenEvalReport { folds, mean })
}

/// Child process spoken to line-by-line.
struct LineProcess {
    child: std::process::Child,
    stdin: Option<std::process::ChildStdin>,
    stdout: BufReader<std::process::ChildStdout>,
}

impl LineProcess {
    fn spawn(command: &str) -> Result<Self, EvalError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| EvalError::GeneratorFailure(format!("spawn {command:?}: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(LineProcess {
            child,
            stdin,
            stdout,
        })
    }

    fn round_trip(&mut self, request: &str) -> Result<String, EvalError> {
        let stdin = self.stdin.as_mut().expect("stdin open");
        writeln!(stdin, "{request}")
            .and_then(|_| stdin.flush())
            .map_err(|e| EvalError::GeneratorFailure(format!("write: {e}")))?;
        let mut line = String::new();
        let n = self
            .stdout
            .read_line(&mut line)
            .map_err(|e| EvalError::GeneratorFailure(format!("read: {e}")))?;
        if n == 0 {
            return Err(EvalError::GeneratorFailure("process closed stdout early".into()));
        }
        Ok(line.trim_end_matches('\n').to_owned())
    }

    fn finish(mut self) -> Result<(), EvalError> {
        drop(self.stdin.take());
        let status = self
            .child
            .wait()
            .map_err(|e| EvalError::GeneratorFailure(format!("wait: {e}")))?;
        if !status.success() {
            return Err(EvalError::GeneratorFailure(format!("exit status {status}")));
        }
        Ok(())
    }
}

/// Writes all requests, closes stdin, then collects all response lines.
/// A writer thread keeps large batches from deadlocking on pipe buffers.
fn run_batch(command: &str, requests: &[String]) -> Result<Vec<String>, EvalError> {
    let mut process = LineProcess::spawn(command)?;
    let mut stdin = process.stdin.take().expect("stdin open");
    let payload = requests.join("\n") + "\n";
    let writer = std::thread::spawn(move || -> std::io::Result<()> {
        stdin.write_all(payload.as_bytes())?;
        stdin.flush()
    });
    let mut responses = Vec::new();
    loop {
        let mut line = String::new();
        let n = process
            .stdout
            .read_line(&mut line)
            .map_err(|e| EvalError::GeneratorFailure(format!("read: {e}")))?;
        if n == 0 {
            break;
        }
        responses.push(line.trim_end_matches('\n').to_owned());
    }
    writer
        .join()
        .expect("writer thread")
        .map_err(|e| EvalError::GeneratorFailure(format!("write: {e}")))?;
    let status = process
        .child
        .wait()
        .map_err(|e| EvalError::GeneratorFailure(format!("wait: {e}")))?;
    if !status.success() {
        return Err(EvalError::GeneratorFailure(format!("exit status {status}")));
    }
    Ok(responses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use forge_domain::{
        Dialogue, DialogueId, FactAnchor, Message, MessageId, Paper, ParticipantId, Role,
        SectionKind, SentenceUnit, SlotId, Timestamp,
    };

    fn corpus() -> Corpus {
        // Two dialogues per paper, so every held-out fold contributes both a
        // validation and a test dialogue.
        let mut corpus = Corpus::default();
        for p in 0..5 {
            let paper_id = PaperId::new(format!("p{p}"));
            corpus.papers.insert(
                paper_id.clone(),
                Paper::new(
                    paper_id.clone(),
                    format!("Paper {p} on annotation speed"),
                    vec![
                        "Models can improve annotation speed.".into(),
                        "A user study measured the gains.".into(),
                    ],
                    vec![
                        "Entity linking benefits from interaction.".into(),
                        "We report faster labeling with assistance.".into(),
                        "Costs drop when suggestions are accepted.".into(),
                    ],
                    ParticipantId::from("owner"),
                )
                .unwrap(),
            );
            for d in 0..2 {
                let messages = (0..8)
                    .map(|i| Message {
                        message_id: MessageId::new(format!("p{p}d{d}m{i}")),
                        role: if i % 2 == 0 {
                            Role::Proponent
                        } else {
                            Role::DomainExpert
                        },
                        sentences: vec![SentenceUnit::new(if i % 2 == 0 {
                            format!("Question {i} about annotation speed?")
                        } else {
                            format!("Reply {i} with supporting evidence.")
                        })],
                        facts: if i % 2 == 1 {
                            vec![FactAnchor::new(SectionKind::Abstract, 0)]
                        } else {
                            vec![]
                        },
                        sent_at: Timestamp::from_millis(i as i64),
                        no_fact_warning: false,
                    })
                    .collect();
                corpus.dialogues.push(Dialogue {
                    dialogue_id: DialogueId::new(format!("d{p}-{d}")),
                    paper_id: paper_id.clone(),
                    slot_id: SlotId::new(format!("s{p}-{d}")),
                    messages,
                    finalized: true,
                });
            }
        }
        corpus.validate().unwrap();
        corpus
    }

    #[test]
    fn select_facts_finds_query_terms() {
        // Brute-force cosine over all sentences: only one sentence shares
        // both query terms, so it must rank first.
        let sentences: Vec<String> = vec![
            "Entirely unrelated content here.".into(),
            "Annotation speed improved by a third.".into(),
            "Speed limits are a road thing.".into(),
        ];
        let model = tfidf_fit(&sentences, Tokenizer::default()).unwrap();
        let picked = select_facts("annotation speed", &sentences, &model, 2);
        assert_eq!(picked[0], 1);
        assert_eq!(picked.len(), 2);
    }

    #[test]
    fn select_facts_clamps_k() {
        let sentences: Vec<String> = vec!["Only sentence.".into()];
        let model = tfidf_fit(&sentences, Tokenizer::default()).unwrap();
        assert_eq!(select_facts("anything", &sentences, &model, 2), vec![0]);
    }

    #[test]
    fn select_facts_breaks_ties_toward_lower_index() {
        let sentences: Vec<String> =
            vec!["same words here.".into(), "same words here.".into(), "other".into()];
        let model = tfidf_fit(&sentences, Tokenizer::default()).unwrap();
        let picked = select_facts("same words", &sentences, &model, 2);
        assert_eq!(picked, vec![0, 1]);
    }

    #[test]
    fn zero_query_falls_back_to_index_order() {
        let sentences: Vec<String> = vec!["alpha beta.".into(), "gamma delta.".into()];
        let model = tfidf_fit(&sentences, Tokenizer::default()).unwrap();
        let picked = select_facts("zzz unseen zzz", &sentences, &model, 2);
        assert_eq!(picked, vec![0, 1]);
    }

    #[test]
    fn select_facts_is_scale_invariant() {
        // Cosine ignores uniform positive scaling, so doubling every idf
        // weight must not change the chosen indices.
        let sentences: Vec<String> = vec![
            "annotation speed study.".into(),
            "unrelated entity linking.".into(),
            "speed of annotation again.".into(),
        ];
        let model = tfidf_fit(&sentences, Tokenizer::default()).unwrap();
        let mut scaled = model.clone();
        for w in &mut scaled.idf {
            *w *= 2.0;
        }
        assert_eq!(
            select_facts("annotation speed", &sentences, &model, 2),
            select_facts("annotation speed", &sentences, &scaled, 2)
        );
    }

    #[test]
    fn oracle_method_scores_exactly_one_hundred() {
        let corpus = corpus();
        let plan = crate::folds::make_folds(&corpus, 5, 13).unwrap();
        let report = evaluate_fact_selection(&corpus, &plan, &FactMethod::Oracle).unwrap();
        assert_eq!(report.mean, 100.0);
        for fold in &report.folds {
            assert_eq!(fold.fact_f1, Some(100.0));
        }
    }

    #[test]
    fn empty_method_scores_zero_on_grounded_corpus() {
        let corpus = corpus();
        let plan = crate::folds::make_folds(&corpus, 5, 13).unwrap();
        let report = evaluate_fact_selection(&corpus, &plan, &FactMethod::Empty).unwrap();
        assert_eq!(report.mean, 0.0);
    }

    #[test]
    fn tfidf_method_runs_and_stays_bounded() {
        let corpus = corpus();
        let plan = crate::folds::make_folds(&corpus, 5, 13).unwrap();
        let report = evaluate_fact_selection(&corpus, &plan, &FactMethod::Tfidf).unwrap();
        assert!(report.mean >= 0.0 && report.mean <= 100.0);
    }

    #[test]
    fn echo_gold_generator_scores_one_hundred() {
        // The generator extracts gold_response from each JSON line. sed pulls
        // the field value; gold responses contain no escapes in this corpus.
        let corpus = corpus();
        let plan = crate::folds::make_folds(&corpus, 5, 13).unwrap();
        let cmd = r#"sed 's/.*"gold_response":"\([^"]*\)".*/\1/"#.to_owned() + "'";
        let report = evaluate_generation(&corpus, &plan, &cmd).unwrap();
        assert_eq!(report.mean, 100.0);
    }

    #[test]
    fn empty_generator_scores_zero() {
        let corpus = corpus();
        let plan = crate::folds::make_folds(&corpus, 5, 13).unwrap();
        let report = evaluate_generation(&corpus, &plan, "while read -r line; do echo; done").unwrap();
        assert_eq!(report.mean, 0.0);
    }

    #[test]
    fn failing_generator_is_reported() {
        let corpus = corpus();
        let plan = crate::folds::make_folds(&corpus, 5, 13).unwrap();
        let err = evaluate_generation(&corpus, &plan, "exit 3").unwrap_err();
        assert!(matches!(err, EvalError::GeneratorFailure(_)));
    }
}
