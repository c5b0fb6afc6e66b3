//! Linear-space-bounded Turing machines: model and interpreter, the unary
//! division and base-b counter builders, machine composition, and timing
//! profiles.
//!
//! A machine runs strictly between the two border symbols, which occupy the
//! first two slots of its alphabet. The border discipline is enforced at
//! construction: transitions on the left border must rewrite it and move
//! right, transitions on the right border must rewrite it and move left, and
//! interior cells may never be overwritten with a border symbol.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

pub type StateId = usize;
pub type SymId = usize;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dir {
    L,
    R,
}

impl Dir {
    fn token(self) -> &'static str {
        match self {
            Dir::L => "L",
            Dir::R => "R",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Transition {
    pub state: StateId,
    pub write: SymId,
    pub dir: Dir,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum MachineError {
    #[error("machine needs at least the two border symbols")]
    MissingBorders,
    #[error("accepting set must be non-empty")]
    NoAcceptingState,
    #[error("initial state must not be accepting")]
    InitialAccepting,
    #[error("duplicate token {0:?}")]
    DuplicateToken(String),
    #[error("transition missing for state {state:?} on symbol {symbol:?}")]
    MissingTransition { state: String, symbol: String },
    #[error("state {state:?} on left border must rewrite it and move right")]
    LeftBorderRule { state: String },
    #[error("state {state:?} on right border must rewrite it and move left")]
    RightBorderRule { state: String },
    #[error("state {state:?} on symbol {symbol:?} writes a border symbol to an interior cell")]
    InteriorWritesBorder { state: String, symbol: String },
    #[error("unknown token {0:?}")]
    UnknownToken(String),
}

/// A linear-space-bounded machine. `alphabet[0]` and `alphabet[1]` are the
/// left and right border symbols.
#[derive(Clone, Debug)]
pub struct TuringMachine {
    states: Vec<String>,
    alphabet: Vec<String>,
    accepting: Vec<bool>,
    initial: StateId,
    /// delta[state][symbol]; None only for accepting states.
    delta: Vec<Vec<Option<Transition>>>,
}

pub const BOT_L: SymId = 0;
pub const BOT_R: SymId = 1;

impl TuringMachine {
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<String>,
        accepting_states: &[&str],
        initial: &str,
        rows: &[(&str, &str, &str, &str, Dir)],
    ) -> Result<Self, MachineError> {
        if alphabet.len() < 2 {
            return Err(MachineError::MissingBorders);
        }
        let mut state_ix = BTreeMap::new();
        for (i, s) in states.iter().enumerate() {
            if state_ix.insert(s.clone(), i).is_some() {
                return Err(MachineError::DuplicateToken(s.clone()));
            }
        }
        let mut sym_ix = BTreeMap::new();
        for (i, s) in alphabet.iter().enumerate() {
            if sym_ix.insert(s.clone(), i).is_some() {
                return Err(MachineError::DuplicateToken(s.clone()));
            }
        }
        let look_state = |t: &str| -> Result<StateId, MachineError> {
            state_ix.get(t).copied().ok_or_else(|| MachineError::UnknownToken(t.to_string()))
        };
        let look_sym = |t: &str| -> Result<SymId, MachineError> {
            sym_ix.get(t).copied().ok_or_else(|| MachineError::UnknownToken(t.to_string()))
        };
        let mut accepting = vec![false; states.len()];
        for a in accepting_states {
            accepting[look_state(a)?] = true;
        }
        if !accepting.iter().any(|&a| a) {
            return Err(MachineError::NoAcceptingState);
        }
        let initial = look_state(initial)?;
        if accepting[initial] {
            return Err(MachineError::InitialAccepting);
        }
        let mut delta = vec![vec![None; alphabet.len()]; states.len()];
        for &(q, a, q2, a2, dir) in rows {
            let qi = look_state(q)?;
            let ai = look_sym(a)?;
            delta[qi][ai] = Some(Transition { state: look_state(q2)?, write: look_sym(a2)?, dir });
        }
        let m = TuringMachine { states, alphabet, accepting, initial, delta };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), MachineError> {
        for q in 0..self.states.len() {
            if self.accepting[q] {
                continue;
            }
            for a in 0..self.alphabet.len() {
                let t = self.delta[q][a].ok_or_else(|| MachineError::MissingTransition {
                    state: self.states[q].clone(),
                    symbol: self.alphabet[a].clone(),
                })?;
                match a {
                    BOT_L => {
                        if t.dir != Dir::R || t.write != BOT_L {
                            return Err(MachineError::LeftBorderRule {
                                state: self.states[q].clone(),
                            });
                        }
                    }
                    BOT_R => {
                        if t.dir != Dir::L || t.write != BOT_R {
                            return Err(MachineError::RightBorderRule {
                                state: self.states[q].clone(),
                            });
                        }
                    }
                    _ => {
                        if t.write == BOT_L || t.write == BOT_R {
                            return Err(MachineError::InteriorWritesBorder {
                                state: self.states[q].clone(),
                                symbol: self.alphabet[a].clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len()).filter(|&q| self.accepting[q])
    }

    pub fn transition(&self, q: StateId, a: SymId) -> Option<Transition> {
        self.delta[q][a]
    }

    pub fn state_token(&self, q: StateId) -> &str {
        &self.states[q]
    }

    pub fn sym_token(&self, a: SymId) -> &str {
        &self.alphabet[a]
    }

    pub fn sym_id(&self, token: &str) -> Option<SymId> {
        self.alphabet.iter().position(|t| t == token)
    }

    pub fn state_id(&self, token: &str) -> Option<StateId> {
        self.states.iter().position(|t| t == token)
    }

    // ----- text format -----

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "states {}", self.states.join(" ")).unwrap();
        writeln!(s, "alphabet {}", self.alphabet.join(" ")).unwrap();
        let acc: Vec<&str> = (0..self.states.len())
            .filter(|&q| self.accepting[q])
            .map(|q| self.states[q].as_str())
            .collect();
        writeln!(s, "accept {}", acc.join(" ")).unwrap();
        writeln!(s, "init {}", self.states[self.initial]).unwrap();
        for q in 0..self.states.len() {
            for a in 0..self.alphabet.len() {
                if let Some(t) = self.delta[q][a] {
                    writeln!(
                        s,
                        "delta {} {} {} {} {}",
                        self.states[q],
                        self.alphabet[a],
                        self.states[t.state],
                        self.alphabet[t.write],
                        t.dir.token()
                    )
                    .unwrap();
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<TuringMachine, MachineParseError> {
        let mut states: Option<Vec<String>> = None;
        let mut alphabet: Option<Vec<String>> = None;
        let mut accept: Vec<String> = Vec::new();
        let mut init: Option<String> = None;
        let mut rows: Vec<(String, String, String, String, Dir)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = t.split_whitespace().collect();
            let bad = |msg: &str| MachineParseError { line, msg: msg.to_string() };
            match toks[0] {
                "states" => states = Some(toks[1..].iter().map(|s| s.to_string()).collect()),
                "alphabet" => alphabet = Some(toks[1..].iter().map(|s| s.to_string()).collect()),
                "accept" => accept = toks[1..].iter().map(|s| s.to_string()).collect(),
                "init" => {
                    init = Some(toks.get(1).ok_or_else(|| bad("missing token"))?.to_string())
                }
                "delta" => {
                    if toks.len() != 6 {
                        return Err(bad("expected: delta <q> <a> <q'> <a'> <L|R>"));
                    }
                    let dir = match toks[5] {
                        "L" => Dir::L,
                        "R" => Dir::R,
                        _ => return Err(bad("direction must be L or R")),
                    };
                    rows.push((
                        toks[1].to_string(),
                        toks[2].to_string(),
                        toks[3].to_string(),
                        toks[4].to_string(),
                        dir,
                    ));
                }
                _ => return Err(bad("unknown directive")),
            }
        }
        let states = states.ok_or(MachineParseError { line: 0, msg: "missing states".into() })?;
        let alphabet =
            alphabet.ok_or(MachineParseError { line: 0, msg: "missing alphabet".into() })?;
        let init = init.ok_or(MachineParseError { line: 0, msg: "missing init".into() })?;
        let acc: Vec<&str> = accept.iter().map(String::as_str).collect();
        let row_refs: Vec<(&str, &str, &str, &str, Dir)> = rows
            .iter()
            .map(|(a, b, c, d, dir)| (a.as_str(), b.as_str(), c.as_str(), d.as_str(), *dir))
            .collect();
        TuringMachine::new(states, alphabet, &acc, &init, &row_refs)
            .map_err(|e| MachineParseError { line: 0, msg: e.to_string() })
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
#[error("machine file line {line}: {msg}")]
pub struct MachineParseError {
    pub line: usize,
    pub msg: String,
}

/// Tape, head position, state, and steps executed so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineConfig {
    pub tape: Vec<SymId>,
    pub head: usize,
    pub state: StateId,
    pub steps: u64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub steps: u64,
    pub accepted: bool,
    pub config: MachineConfig,
}

#[derive(Error, Debug)]
pub enum RunError {
    #[error("input must be non-empty")]
    EmptyInput,
    #[error("input symbol {0:?} is not an interior symbol of the machine")]
    BadInputSymbol(String),
    #[error("step cap {cap} exceeded")]
    Timeout { cap: u64, partial: MachineConfig },
}

pub const DEFAULT_STEP_CAP: u64 = 10_000_000;

/// Run to acceptance, counting one step per transition. The tape length never
/// changes; that and the head staying in bounds are asserted every step.
pub fn run(m: &TuringMachine, input: &[&str], step_cap: u64) -> Result<RunOutcome, RunError> {
    if input.is_empty() {
        return Err(RunError::EmptyInput);
    }
    let mut tape = Vec::with_capacity(input.len() + 2);
    tape.push(BOT_L);
    for t in input {
        let id = m.sym_id(t).ok_or_else(|| RunError::BadInputSymbol(t.to_string()))?;
        if id == BOT_L || id == BOT_R {
            return Err(RunError::BadInputSymbol(t.to_string()));
        }
        tape.push(id);
    }
    tape.push(BOT_R);
    let len = tape.len();
    let mut cfg = MachineConfig { tape, head: 0, state: m.initial, steps: 0 };
    while !m.is_accepting(cfg.state) {
        if cfg.steps >= step_cap {
            return Err(RunError::Timeout { cap: step_cap, partial: cfg });
        }
        let t = m.delta[cfg.state][cfg.tape[cfg.head]]
            .expect("total transition table for non-accepting states");
        cfg.tape[cfg.head] = t.write;
        cfg.state = t.state;
        match t.dir {
            Dir::L => cfg.head -= 1,
            Dir::R => cfg.head += 1,
        }
        assert!(cfg.head < len, "head escaped the tape");
        assert_eq!(cfg.tape.len(), len, "tape length changed");
        cfg.steps += 1;
    }
    Ok(RunOutcome { steps: cfg.steps, accepted: true, config: cfg })
}

/// Run on the unary input `0^s`.
pub fn run_unary(m: &TuringMachine, s: usize, step_cap: u64) -> Result<RunOutcome, RunError> {
    let zeros = vec!["0"; s];
    run(m, &zeros, step_cap)
}

/// Length of the `0` prefix of the final tape, up to the first separator,
/// non-zero symbol, or right border. This is the logical output a composed
/// machine hands to its successor.
pub fn output_prefix_len(m: &TuringMachine, cfg: &MachineConfig) -> usize {
    let zero = m.sym_id("0");
    cfg.tape[1..cfg.tape.len() - 1]
        .iter()
        .take_while(|&&a| Some(a) == zero)
        .count()
}

pub const SEPARATOR_TOKEN: &str = "#";

fn digit_tokens(n: usize) -> Vec<String> {
    (0..n).map(|d| d.to_string()).collect()
}

/// Counter over base `b`: on input `0^k` it counts through all `b^k` values
/// with carries, then accepts upon running off the right end.
pub fn build_counter_machine(b: usize) -> TuringMachine {
    assert!(b >= 2, "base must be at least 2");
    let digits = digit_tokens(b);
    let mut alphabet = vec!["bL".to_string(), "bR".to_string()];
    alphabet.extend(digits.iter().cloned());
    let states = vec!["rew".to_string(), "carry".to_string(), "acc".to_string()];
    let top = digits[b - 1].clone();
    let mut rows: Vec<(String, String, String, String, Dir)> = vec![
        ("rew".into(), "bL".into(), "carry".into(), "bL".into(), Dir::R),
        ("rew".into(), "bR".into(), "rew".into(), "bR".into(), Dir::L),
        ("carry".into(), "bL".into(), "carry".into(), "bL".into(), Dir::R),
        ("carry".into(), "bR".into(), "acc".into(), "bR".into(), Dir::L),
        ("carry".into(), top.clone(), "carry".into(), "0".into(), Dir::R),
    ];
    for d in 0..b {
        rows.push(("rew".into(), digits[d].clone(), "rew".into(), digits[d].clone(), Dir::L));
        if d + 1 < b {
            rows.push((
                "carry".into(),
                digits[d].clone(),
                "rew".into(),
                digits[d + 1].clone(),
                Dir::L,
            ));
        }
    }
    let refs: Vec<(&str, &str, &str, &str, Dir)> =
        rows.iter().map(|(a, b_, c, d, dir)| (a.as_str(), b_.as_str(), c.as_str(), d.as_str(), *dir)).collect();
    TuringMachine::new(states, alphabet, &["acc"], "rew", &refs).unwrap()
}

/// Unary division by `q`: labels cell i with (i-1) mod q, bubble-sorts the
/// labels, then replaces the first non-zero with the separator, leaving the
/// prefix `0^ceil(s/q)` as the logical output. Quadratic in the input length.
pub fn build_division_machine(q: usize) -> TuringMachine {
    assert!(q >= 1);
    let digits = digit_tokens(q.max(1));
    let mut alphabet = vec!["bL".to_string(), "bR".to_string()];
    alphabet.extend(digits.iter().cloned());
    alphabet.push(SEPARATOR_TOKEN.to_string());

    let mut states: Vec<String> = vec!["start".into(), "rew".into(), "mrew".into(), "mark".into(), "acc".into()];
    for i in 0..q {
        states.push(format!("w{i}"));
    }
    for f in 0..2 {
        states.push(format!("entry{f}"));
        for d in 0..q {
            states.push(format!("p{d}f{f}"));
        }
    }
    for d in 0..q {
        states.push(format!("swap{d}"));
    }

    let mut rows: Vec<(String, String, String, String, Dir)> = Vec::new();
    let mut add = |q1: &str, a: &str, q2: &str, a2: &str, dir: Dir| {
        rows.push((q1.to_string(), a.to_string(), q2.to_string(), a2.to_string(), dir));
    };

    // labeling pass: cell i (1-based) receives digit (i-1) mod q
    add("start", "bL", "w0", "bL", Dir::R);
    add("start", "bR", "start", "bR", Dir::L);
    for i in 0..q {
        let w = format!("w{i}");
        let wnext = format!("w{}", (i + 1) % q);
        add(&w, "0", &wnext, &digits[i], Dir::R);
        add(&w, "bR", "rew", "bR", Dir::L);
        add(&w, "bL", &w, "bL", Dir::R);
        for d in 1..q {
            add(&w, &digits[d], &w, &digits[d], Dir::R);
        }
        add(&w, SEPARATOR_TOKEN, &w, SEPARATOR_TOKEN, Dir::R);
    }
    if q > 1 {
        add("start", "0", "start", "0", Dir::L);
        for d in 1..q {
            add("start", &digits[d], "start", &digits[d], Dir::L);
        }
    } else {
        add("start", "0", "start", "0", Dir::L);
    }
    add("start", SEPARATOR_TOKEN, "start", SEPARATOR_TOKEN, Dir::L);

    // rewind, then sweep with the swapped flag in the state
    for d in 0..q {
        add("rew", &digits[d], "rew", &digits[d], Dir::L);
    }
    add("rew", SEPARATOR_TOKEN, "rew", SEPARATOR_TOKEN, Dir::L);
    add("rew", "bL", "entry0", "bL", Dir::R);
    add("rew", "bR", "rew", "bR", Dir::L);
    for f in 0..2usize {
        let entry = format!("entry{f}");
        for d in 0..q {
            add(&entry, &digits[d], &format!("p{d}f{f}"), &digits[d], Dir::R);
        }
        add(&entry, "bR", "mrew", "bR", Dir::L);
        add(&entry, "bL", &entry, "bL", Dir::R);
        add(&entry, SEPARATOR_TOKEN, &entry, SEPARATOR_TOKEN, Dir::R);
        for d in 0..q {
            let p = format!("p{d}f{f}");
            for e in 0..q {
                if d <= e {
                    add(&p, &digits[e], &format!("p{e}f{f}"), &digits[e], Dir::R);
                } else {
                    // descending pair: write the larger here, fix the smaller
                    // one cell to the left, then resume with the flag set
                    add(&p, &digits[e], &format!("swap{e}"), &digits[d], Dir::L);
                }
            }
            if f == 1 {
                add(&p, "bR", "rew", "bR", Dir::L);
            } else {
                add(&p, "bR", "mrew", "bR", Dir::L);
            }
            add(&p, "bL", &p, "bL", Dir::R);
            add(&p, SEPARATOR_TOKEN, &p, SEPARATOR_TOKEN, Dir::R);
        }
    }
    for e in 0..q {
        let sw = format!("swap{e}");
        for d in 0..q {
            add(&sw, &digits[d], "entry1", &digits[e], Dir::R);
        }
        add(&sw, "bL", &sw, "bL", Dir::R);
        add(&sw, "bR", &sw, "bR", Dir::L);
        add(&sw, SEPARATOR_TOKEN, "entry1", &digits[e], Dir::R);
    }

    // mark phase: rewind, skip zeros, separate at first non-zero
    for d in 0..q {
        add("mrew", &digits[d], "mrew", &digits[d], Dir::L);
    }
    add("mrew", SEPARATOR_TOKEN, "mrew", SEPARATOR_TOKEN, Dir::L);
    add("mrew", "bL", "mark", "bL", Dir::R);
    add("mrew", "bR", "mrew", "bR", Dir::L);
    add("mark", "0", "mark", "0", Dir::R);
    for d in 1..q {
        add("mark", &digits[d], "acc", SEPARATOR_TOKEN, Dir::R);
    }
    add("mark", SEPARATOR_TOKEN, "acc", SEPARATOR_TOKEN, Dir::R);
    add("mark", "bR", "acc", "bR", Dir::L);
    add("mark", "bL", "mark", "bL", Dir::R);

    let refs: Vec<(&str, &str, &str, &str, Dir)> =
        rows.iter().map(|(a, b_, c, d, dir)| (a.as_str(), b_.as_str(), c.as_str(), d.as_str(), *dir)).collect();
    TuringMachine::new(states, alphabet, &["acc"], "start", &refs).unwrap()
}

/// Run `first` to acceptance, rewind to the left border, then run `second`
/// over the tape `first` left behind. `second` treats the separator (and any
/// symbol it does not know) like its right border, so the `0` prefix written
/// by `first` is exactly the input it sees. State tokens are renamed apart;
/// symbol tokens are shared deliberately so the prefix hands over unchanged.
pub fn compose(first: &TuringMachine, second: &TuringMachine) -> TuringMachine {
    let mut alphabet: Vec<String> = vec!["bL".into(), "bR".into()];
    let add_sym = |tok: &str, alphabet: &mut Vec<String>| {
        if !alphabet.iter().any(|t| t == tok) {
            alphabet.push(tok.to_string());
        }
    };
    for t in &first.alphabet[2..] {
        add_sym(t, &mut alphabet);
    }
    for t in &second.alphabet[2..] {
        add_sym(t, &mut alphabet);
    }
    add_sym(SEPARATOR_TOKEN, &mut alphabet);

    let mut states: Vec<String> = Vec::new();
    let mut map1 = Vec::new();
    for (q, tok) in first.states.iter().enumerate() {
        if first.accepting[q] {
            map1.push(None);
        } else {
            map1.push(Some(states.len()));
            states.push(format!("1.{tok}"));
        }
    }
    let glue = states.len();
    states.push("glue".into());
    let off2 = states.len();
    for tok in &second.states {
        states.push(format!("2.{tok}"));
    }
    let map2 = |q: StateId| off2 + q;

    let sym_of = |tok: &str, alphabet: &[String]| -> SymId {
        alphabet.iter().position(|t| t == tok).unwrap()
    };

    let n_states = states.len();
    let n_syms = alphabet.len();
    let mut delta: Vec<Vec<Option<Transition>>> = vec![vec![None; n_syms]; n_states];
    let mut accepting = vec![false; n_states];
    for (q, &acc) in second.accepting.iter().enumerate() {
        accepting[map2(q)] = acc;
    }

    // first's transitions, with accepting targets redirected to the glue
    for q in 0..first.states.len() {
        let Some(nq) = map1[q] else { continue };
        for a in 0..first.alphabet.len() {
            let t = first.delta[q][a].unwrap();
            let ca = sym_of(&first.alphabet[a], &alphabet);
            let target = match map1[t.state] {
                Some(mapped) => mapped,
                None => glue,
            };
            delta[nq][ca] =
                Some(Transition { state: target, write: sym_of(&first.alphabet[t.write], &alphabet), dir: t.dir });
        }
        // symbols first does not know: bounce right (unreachable in practice)
        for ca in 2..n_syms {
            if delta[nq][ca].is_none() {
                delta[nq][ca] = Some(Transition { state: nq, write: ca, dir: Dir::R });
            }
        }
    }

    // glue: rewind to the left border, then replicate second's first move
    let sec_init = second.delta[second.initial][BOT_L].unwrap();
    delta[glue][BOT_L] = Some(Transition { state: map2(sec_init.state), write: BOT_L, dir: Dir::R });
    delta[glue][BOT_R] = Some(Transition { state: glue, write: BOT_R, dir: Dir::L });
    for ca in 2..n_syms {
        delta[glue][ca] = Some(Transition { state: glue, write: ca, dir: Dir::L });
    }

    // second's transitions; the separator and unknown symbols mirror its
    // right-border move
    for q in 0..second.states.len() {
        if second.accepting[q] {
            continue;
        }
        let nq = map2(q);
        for a in 0..second.alphabet.len() {
            let t = second.delta[q][a].unwrap();
            let ca = sym_of(&second.alphabet[a], &alphabet);
            delta[nq][ca] = Some(Transition {
                state: map2(t.state),
                write: sym_of(&second.alphabet[t.write], &alphabet),
                dir: t.dir,
            });
        }
        let wall = second.delta[q][BOT_R].unwrap();
        for ca in 2..n_syms {
            if delta[nq][ca].is_none() {
                delta[nq][ca] = Some(Transition { state: map2(wall.state), write: ca, dir: Dir::L });
            }
        }
    }

    let m = TuringMachine {
        states,
        alphabet,
        accepting,
        initial: map1[first.initial].expect("initial state of first machine is non-accepting"),
        delta,
    };
    m.validate().expect("composition preserves the border discipline");
    m
}

/// Step counts on unary inputs `0^s` for s = 1..=s_max, with the least chain
/// constant.
#[derive(Clone, Debug)]
pub struct TimeProfile {
    /// (s, T(s)) rows.
    pub rows: Vec<(usize, u64)>,
    /// Least C with s <= T(s) <= T(s+1) <= C * T(s) over the measured range;
    /// None when the chain is violated.
    pub good_constant: Option<f64>,
    /// Description of the first chain violation, if any.
    pub violation: Option<String>,
}

impl TimeProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("s,T\n");
        for &(x, t) in &self.rows {
            s.push_str(&format!("{x},{t}\n"));
        }
        s
    }
}

#[derive(Error, Debug)]
pub enum ProfileError {
    #[error("machine timed out at s = {timeout_at}; partial profile retained")]
    Incomplete { timeout_at: usize, partial: TimeProfile },
    #[error(transparent)]
    Run(#[from] RunError),
}

fn good_check(rows: &[(usize, u64)]) -> (Option<f64>, Option<String>) {
    let mut c: f64 = 1.0;
    for &(s, t) in rows {
        if (t as usize) < s {
            return (None, Some(format!("T({s}) = {t} is below s")));
        }
    }
    for w in rows.windows(2) {
        let (s0, t0) = w[0];
        let (_, t1) = w[1];
        if t1 < t0 {
            return (None, Some(format!("T decreases after s = {s0}")));
        }
        c = c.max(t1 as f64 / t0 as f64);
    }
    (Some(c), None)
}

/// Profile a machine over s = 1..=s_max. A timeout yields an error carrying
/// the partial profile.
pub fn time_profile(
    m: &TuringMachine,
    s_max: usize,
    step_cap: u64,
) -> Result<TimeProfile, ProfileError> {
    assert!(s_max >= 2);
    let mut rows = Vec::new();
    for s in 1..=s_max {
        match run_unary(m, s, step_cap) {
            Ok(out) => rows.push((s, out.steps)),
            Err(RunError::Timeout { .. }) => {
                let (good_constant, violation) = good_check(&rows);
                return Err(ProfileError::Incomplete {
                    timeout_at: s,
                    partial: TimeProfile { rows, good_constant, violation },
                });
            }
            Err(e) => return Err(ProfileError::Run(e)),
        }
    }
    let (good_constant, violation) = good_check(&rows);
    Ok(TimeProfile { rows, good_constant, violation })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts head movements of the counting procedure directly from its
    /// pseudo-code: one step onto the first cell, one per carry write, one for
    /// the increment-and-step-left, one per rewind move, and one final step
    /// reading the right border at termination.
    fn counter_walk_steps(b: u64, k: usize) -> u64 {
        let mut cells = vec![0u64; k];
        let mut steps = 0u64;
        loop {
            steps += 1;
            let mut i = 0;
            while i < k && cells[i] == b - 1 {
                cells[i] = 0;
                steps += 1;
                i += 1;
            }
            if i == k {
                steps += 1;
                return steps;
            }
            cells[i] += 1;
            steps += 1;
            steps += i as u64;
        }
    }

    #[test]
    fn counter_matches_pseudocode_walk() {
        for b in [2usize, 3, 4] {
            let m = build_counter_machine(b);
            for k in 1..=6 {
                let got = run_unary(&m, k, 1_000_000).unwrap().steps;
                assert_eq!(got, counter_walk_steps(b as u64, k), "b={b} k={k}");
            }
        }
    }

    #[test]
    fn counter_b2_growth_ratio_near_two() {
        let m = build_counter_machine(2);
        let t: Vec<u64> =
            (1..=9).map(|k| run_unary(&m, k, 10_000_000).unwrap().steps).collect();
        for k in 4..=8 {
            let ratio = t[k] as f64 / t[k - 1] as f64;
            assert!((1.5..=2.5).contains(&ratio), "ratio at k={k} is {ratio}");
        }
        // steps stay within a fixed constant factor of 2^k
        for k in 3..=8 {
            let f = t[k - 1] as f64 / (1u64 << k) as f64;
            assert!((1.0..=8.0).contains(&f), "factor at k={k} is {f}");
        }
    }

    #[test]
    fn counter_b4_is_theta_of_4_to_k() {
        let m = build_counter_machine(4);
        let t3 = run_unary(&m, 3, 1_000_000).unwrap().steps;
        let f = t3 as f64 / 64.0;
        assert!((0.5..=8.0).contains(&f), "factor is {f}");
    }

    #[test]
    fn immediate_accept_machine_runs_one_step() {
        let m = TuringMachine::new(
            vec!["q0".into(), "acc".into()],
            vec!["bL".into(), "bR".into(), "0".into()],
            &["acc"],
            "q0",
            &[
                ("q0", "bL", "acc", "bL", Dir::R),
                ("q0", "bR", "q0", "bR", Dir::L),
                ("q0", "0", "q0", "0", Dir::R),
            ],
        )
        .unwrap();
        assert_eq!(run_unary(&m, 3, 100).unwrap().steps, 1);
    }

    #[test]
    fn border_rules_are_enforced_at_construction() {
        // left border transition moving left is rejected
        let bad = TuringMachine::new(
            vec!["q0".into(), "acc".into()],
            vec!["bL".into(), "bR".into(), "0".into()],
            &["acc"],
            "q0",
            &[
                ("q0", "bL", "acc", "bL", Dir::L),
                ("q0", "bR", "q0", "bR", Dir::L),
                ("q0", "0", "q0", "0", Dir::R),
            ],
        );
        assert!(matches!(bad, Err(MachineError::LeftBorderRule { .. })));
        // interior write of a border symbol is rejected
        let bad2 = TuringMachine::new(
            vec!["q0".into(), "acc".into()],
            vec!["bL".into(), "bR".into(), "0".into()],
            &["acc"],
            "q0",
            &[
                ("q0", "bL", "acc", "bL", Dir::R),
                ("q0", "bR", "q0", "bR", Dir::L),
                ("q0", "0", "q0", "bL", Dir::R),
            ],
        );
        assert!(matches!(bad2, Err(MachineError::InteriorWritesBorder { .. })));
        // missing row is rejected
        let bad3 = TuringMachine::new(
            vec!["q0".into(), "acc".into()],
            vec!["bL".into(), "bR".into(), "0".into()],
            &["acc"],
            "q0",
            &[
                ("q0", "bL", "acc", "bL", Dir::R),
                ("q0", "bR", "q0", "bR", Dir::L),
            ],
        );
        assert!(matches!(bad3, Err(MachineError::MissingTransition { .. })));
    }

    #[test]
    fn division_prefix_lengths() {
        for (q, s, want) in [(1usize, 5usize, 5usize), (2, 5, 3), (3, 7, 3), (2, 8, 4)] {
            let m = build_division_machine(q);
            let out = run_unary(&m, s, 1_000_000).unwrap();
            assert_eq!(output_prefix_len(&m, &out.config), want, "q={q} s={s}");
        }
    }

    #[test]
    fn division_is_quadratic_at_desk_scale() {
        let m = build_division_machine(3);
        let out = run_unary(&m, 7, 1_000_000).unwrap();
        assert!(out.steps <= 12 * 49, "steps = {}", out.steps);
        for s in 2..=14 {
            let o = run_unary(&m, s, 1_000_000).unwrap();
            assert!(o.steps <= 12 * (s as u64) * (s as u64), "s={s}: {}", o.steps);
        }
    }

    #[test]
    fn compose_division_counter_realizes_exponent_one_half() {
        let m = compose(&build_division_machine(2), &build_counter_machine(2));
        let prof = time_profile(&m, 12, 10_000_000).unwrap();
        // T(s) / 2^(s/2) bounded above and below over s = 4..12
        for &(s, t) in prof.rows.iter().filter(|&&(s, _)| s >= 4) {
            let f = t as f64 / 2f64.powf(s as f64 / 2.0);
            assert!((1.0..=64.0).contains(&f), "s={s}: factor {f}");
        }
        assert!(prof.violation.is_none(), "{:?}", prof.violation);
    }

    #[test]
    fn composed_machines_hit_their_target_growth_rates() {
        // slope of log2 T over s in [6, 12] approximates the exponent c
        let cases: [(TuringMachine, f64); 3] = [
            (compose(&build_division_machine(2), &build_counter_machine(2)), 0.5),
            (compose(&build_division_machine(1), &build_counter_machine(2)), 1.0),
            (compose(&build_division_machine(1), &build_counter_machine(4)), 2.0),
        ];
        for (m, c) in cases {
            let prof = time_profile(&m, 12, 200_000_000).unwrap();
            let t6 = prof.rows[5].1 as f64;
            let t12 = prof.rows[11].1 as f64;
            let slope = (t12.log2() - t6.log2()) / 6.0;
            assert!((slope - c).abs() <= 0.25, "slope {slope} vs target {c}");
        }
    }

    #[test]
    fn compose_with_immediate_accept_adds_constant_overhead() {
        let trivial = TuringMachine::new(
            vec!["q0".into(), "acc".into()],
            vec!["bL".into(), "bR".into(), "0".into()],
            &["acc"],
            "q0",
            &[
                ("q0", "bL", "acc", "bL", Dir::R),
                ("q0", "bR", "q0", "bR", Dir::L),
                ("q0", "0", "q0", "0", Dir::R),
            ],
        )
        .unwrap();
        let counter = build_counter_machine(2);
        for k in 1..=6 {
            let base = run_unary(&counter, k, 1_000_000).unwrap().steps;
            let comp = run_unary(&compose(&trivial, &counter), k, 1_000_000).unwrap().steps;
            assert!(comp >= base && comp <= base + 4, "k={k}: {base} vs {comp}");
        }
    }

    #[test]
    fn profile_reports_good_constant() {
        let m = build_counter_machine(2);
        let prof = time_profile(&m, 10, 10_000_000).unwrap();
        assert!(prof.violation.is_none());
        let c = prof.good_constant.unwrap();
        assert!(c <= 3.0, "good constant {c}");
        // determinism: identical machine and input give identical counts
        let again = time_profile(&m, 10, 10_000_000).unwrap();
        assert_eq!(prof.rows, again.rows);
    }

    #[test]
    fn zero_effective_steps_violates_the_chain() {
        // s <= T(s) fails when the machine accepts in one step regardless of s
        let m = TuringMachine::new(
            vec!["q0".into(), "acc".into()],
            vec!["bL".into(), "bR".into(), "0".into()],
            &["acc"],
            "q0",
            &[
                ("q0", "bL", "acc", "bL", Dir::R),
                ("q0", "bR", "q0", "bR", Dir::L),
                ("q0", "0", "q0", "0", Dir::R),
            ],
        )
        .unwrap();
        let prof = time_profile(&m, 5, 1000).unwrap();
        assert!(prof.good_constant.is_none());
        assert!(prof.violation.unwrap().contains("below s"));
    }

    #[test]
    fn timeout_keeps_partial_profile() {
        let m = build_counter_machine(2);
        match time_profile(&m, 30, 500) {
            Err(ProfileError::Incomplete { timeout_at, partial }) => {
                assert!(timeout_at > 1);
                assert_eq!(partial.rows.len(), timeout_at - 1);
            }
            other => panic!("expected incomplete profile, got {other:?}"),
        }
    }

    #[test]
    fn machine_text_round_trip() {
        let m = build_counter_machine(3);
        let text = m.to_text();
        let parsed = TuringMachine::from_text(&text).unwrap();
        assert_eq!(parsed.to_text(), text);
        for k in 1..=4 {
            assert_eq!(
                run_unary(&m, k, 100_000).unwrap().steps,
                run_unary(&parsed, k, 100_000).unwrap().steps
            );
        }
    }

    #[test]
    fn determinism_of_runs() {
        let m = compose(&build_division_machine(2), &build_counter_machine(4));
        let a = run_unary(&m, 7, 10_000_000).unwrap();
        let b = run_unary(&m, 7, 10_000_000).unwrap();
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.config, b.config);
    }
}
