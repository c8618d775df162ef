//! Rank-ordered data with ties and truncation.
//!
//! A ranking over entities `y = (y_1, ..., y_n)` (best first) carries dense
//! bucket indices `s = (s_1, ..., s_n)`: `s_1 = 1`, equal values mean tied
//! entities, and indices increase by at most one between positions. A
//! truncation point `m` marks how many positions were actually ranked; the
//! remaining `n - m` entities took part but finished unranked, below every
//! ranked one, and all share bucket `s_m + 1`.
//!
//! The text format is one ranking per line:
//!
//! ```text
//! e1 > e2 > e4 = e5 > e3      # complete, e4 and e5 tied
//! a > b | c d                 # top-2 of 4; c and d unranked
//! ```
//!
//! Tokens are whitespace-delimited; `>` separates buckets, `=` joins tied
//! entities, a single `|` introduces the unranked remainder, and `#` starts a
//! comment. Labels may not contain whitespace or the reserved characters.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use crate::error::{GplError, Result};

/// Characters that cannot appear in entity labels.
pub const RESERVED_CHARS: [char; 4] = ['>', '=', '|', '#'];

/// Whether the GPL latent scale is read smallest-first (standard) or
/// largest-first (reverse). Under reverse, small theta is strong.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Standard,
    Reverse,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Standard => "gpl",
            Direction::Reverse => "reverse-gpl",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gpl" => Ok(Direction::Standard),
            "reverse-gpl" => Ok(Direction::Reverse),
            other => Err(GplError::InvalidParameter(format!(
                "unknown model '{other}' (expected 'gpl' or 'reverse-gpl')"
            ))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// ---- EntityTable ----

/// Interned entity labels; ids are assigned in first-appearance order.
#[derive(Debug, Clone, Default)]
pub struct EntityTable {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl EntityTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Returns the id for `label`, interning it if unseen.
    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), id);
        id
    }

    pub fn id(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// True when `label` is usable everywhere a label can travel: ranking files,
/// theta and prior files, and samples CSV headers. Rejects whitespace and
/// control characters, the ranking syntax characters, and the CSV
/// metacharacters `,` and `"`.
pub fn valid_label(label: &str) -> bool {
    !label.is_empty() && !label.chars().any(hostile_in_label)
}

fn hostile_in_label(c: char) -> bool {
    c.is_whitespace() || c.is_control() || RESERVED_CHARS.contains(&c) || c == ',' || c == '"'
}

// ---- Ranking ----

/// One ranking: entity ids best-first, dense bucket indices, and the number
/// of ranked positions `m` (`m == len` for complete rankings).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    pub(crate) y: Vec<usize>,
    pub(crate) s: Vec<u32>,
    pub(crate) m: usize,
}

impl Ranking {
    /// Validates structural invariants: equal lengths, `s_1 = 1`, increments
    /// of 0 or 1, no duplicate entities, `1 <= m <= n`, and every position
    /// past `m` sharing bucket `s_m + 1`.
    pub fn new(y: Vec<usize>, s: Vec<u32>, m: usize) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(GplError::InvalidRanking("empty ranking".into()));
        }
        if s.len() != n {
            return Err(GplError::InvalidRanking(format!(
                "{} entities but {} bucket indices",
                n,
                s.len()
            )));
        }
        if m == 0 || m > n {
            return Err(GplError::InvalidRanking(format!(
                "truncation m = {m} outside 1..={n}"
            )));
        }
        if s[0] != 1 {
            return Err(GplError::InvalidRanking(format!(
                "bucket indices must start at 1, got {}",
                s[0]
            )));
        }
        for j in 1..n {
            if s[j] != s[j - 1] && s[j] != s[j - 1] + 1 {
                return Err(GplError::InvalidRanking(format!(
                    "bucket index jumps from {} to {} at position {}",
                    s[j - 1],
                    s[j],
                    j + 1
                )));
            }
        }
        if m < n {
            let unranked = s[m - 1] + 1;
            if s[m..].iter().any(|&b| b != unranked) {
                return Err(GplError::InvalidRanking(format!(
                    "unranked entities must all share bucket {unranked}"
                )));
            }
        }
        let mut seen = HashSet::with_capacity(n);
        for &k in &y {
            if !seen.insert(k) {
                return Err(GplError::InvalidRanking(format!(
                    "entity id {k} appears twice"
                )));
            }
        }
        Ok(Ranking { y, s, m })
    }

    /// Entity ids, best first.
    pub fn entities(&self) -> &[usize] {
        &self.y
    }

    /// Dense bucket index per position, starting at 1.
    pub fn buckets(&self) -> &[u32] {
        &self.s
    }

    /// Number of ranked positions.
    pub fn truncation(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.m == self.y.len()
    }

    /// Number of stages that contribute likelihood factors: the bucket index
    /// at position `m* = min(m, n - 1)`, or 0 for a single entity.
    pub fn counted_stages(&self) -> usize {
        let m_star = self.m.min(self.y.len().saturating_sub(1));
        if m_star == 0 {
            0
        } else {
            self.s[m_star - 1] as usize
        }
    }

    /// Start position (0-based) of each counted stage `j = 1..=v`.
    pub(crate) fn stage_starts(&self) -> Vec<usize> {
        let v = self.counted_stages();
        let mut starts = Vec::with_capacity(v);
        for idx in 0..self.y.len() {
            if (self.s[idx] as usize) <= v && (idx == 0 || self.s[idx] != self.s[idx - 1]) {
                starts.push(idx);
            }
        }
        starts
    }
}

// ---- Dataset ----

/// A collection of rankings over one shared entity table.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub entities: EntityTable,
    pub rankings: Vec<Ranking>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_rankings_str(&text)
    }

    /// True when every ranking is a two-entity comparison.
    pub fn all_pairs(&self) -> bool {
        self.rankings.iter().all(|r| r.len() == 2)
    }
}

// ---- parsing ----

fn parse_err(line: usize, msg: impl Into<String>) -> GplError {
    GplError::Parse {
        line,
        msg: msg.into(),
    }
}

fn check_label(line: usize, tok: &str) -> Result<()> {
    if let Some(c) = tok.chars().find(|&c| hostile_in_label(c)) {
        return Err(parse_err(
            line,
            format!("label '{tok}' contains reserved character '{c}'"),
        ));
    }
    Ok(())
}

/// Parses the ranking text format. Blank lines and `#` comments are ignored;
/// errors carry 1-based line numbers.
pub fn parse_rankings_str(text: &str) -> Result<Dataset> {
    let mut data = Dataset::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let ranking = parse_ranking_line(lineno, line, &mut data.entities)?;
        data.rankings.push(ranking);
    }
    Ok(data)
}

fn parse_ranking_line(lineno: usize, line: &str, entities: &mut EntityTable) -> Result<Ranking> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut remainder: Vec<usize> = Vec::new();
    let mut in_remainder = false;
    let mut expect_label = true;
    let mut seen: HashSet<usize> = HashSet::new();

    for tok in line.split_whitespace() {
        match tok {
            ">" | "=" => {
                if in_remainder {
                    return Err(parse_err(lineno, format!("'{tok}' not allowed after '|'")));
                }
                if expect_label {
                    return Err(parse_err(
                        lineno,
                        format!("expected entity label before '{tok}'"),
                    ));
                }
                if tok == ">" {
                    groups.push(Vec::new());
                }
                expect_label = true;
            }
            "|" => {
                if in_remainder {
                    return Err(parse_err(lineno, "only one '|' allowed per ranking"));
                }
                if expect_label {
                    return Err(parse_err(lineno, "expected entity label before '|'"));
                }
                in_remainder = true;
                expect_label = true;
            }
            label => {
                check_label(lineno, label)?;
                if !in_remainder && !expect_label {
                    return Err(parse_err(
                        lineno,
                        format!("expected '>', '=' or '|' before '{label}'"),
                    ));
                }
                let id = entities.intern(label);
                if !seen.insert(id) {
                    return Err(parse_err(
                        lineno,
                        format!("entity '{label}' appears twice in one ranking"),
                    ));
                }
                if in_remainder {
                    remainder.push(id);
                } else {
                    if groups.is_empty() {
                        groups.push(Vec::new());
                    }
                    groups.last_mut().unwrap().push(id);
                    expect_label = false;
                }
            }
        }
    }

    if groups.is_empty() {
        return Err(parse_err(lineno, "ranking has no entities"));
    }
    if !in_remainder && expect_label {
        return Err(parse_err(lineno, "ranking ends with a dangling separator"));
    }
    if in_remainder && remainder.is_empty() {
        return Err(parse_err(
            lineno,
            "'|' must be followed by at least one entity",
        ));
    }

    let mut y = Vec::new();
    let mut s = Vec::new();
    for (gi, group) in groups.iter().enumerate() {
        for &id in group {
            y.push(id);
            s.push(gi as u32 + 1);
        }
    }
    let m = y.len();
    let unranked_bucket = groups.len() as u32 + 1;
    for &id in &remainder {
        y.push(id);
        s.push(unranked_bucket);
    }
    Ranking::new(y, s, m).map_err(|e| parse_err(lineno, e.to_string()))
}

// ---- serialization ----

/// Canonical single-line form: single spaces around `>`, `=`, and `|`.
pub fn serialize_ranking(r: &Ranking, entities: &EntityTable) -> String {
    let mut out = String::new();
    for idx in 0..r.m {
        if idx > 0 {
            out.push_str(if r.s[idx] == r.s[idx - 1] {
                " = "
            } else {
                " > "
            });
        }
        out.push_str(entities.label(r.y[idx]));
    }
    if r.m < r.len() {
        out.push_str(" |");
        for idx in r.m..r.len() {
            out.push(' ');
            out.push_str(entities.label(r.y[idx]));
        }
    }
    out
}

/// Serializes every ranking, one line each, in canonical form.
pub fn write_rankings(data: &Dataset) -> String {
    let mut out = String::new();
    for r in &data.rankings {
        out.push_str(&serialize_ranking(r, &data.entities));
        out.push('\n');
    }
    out
}

// ---- sufficient statistics ----

/// Per-entity counts and per-ranking stage structure feeding the likelihood,
/// EM, and the Gibbs sampler.
///
/// For entity `k`: `w[k]` counts rankings where `k` wins a counted stage
/// (appears in the ranked part and not alone in last place), `d[k]` sums
/// `s - 1` over its appearances, and `c[k]` counts appearances. For ranking
/// `i`, stages `j = 1..=v[i]` contribute factors; the risk set of stage `j`
/// is the suffix of `y` from that stage's first position.
#[derive(Debug, Clone)]
pub struct SuffStats {
    pub w: Vec<u64>,
    pub d: Vec<u64>,
    pub c: Vec<u64>,
    pub v: Vec<usize>,
    stage_starts: Vec<Vec<usize>>,
}

impl SuffStats {
    /// Number of counted stages of ranking `i` (same as `v[i]`).
    pub fn stage_count(&self, i: usize) -> usize {
        self.v[i]
    }

    /// Start position (0-based) of stage `j` (1-based) in ranking `i`.
    pub fn stage_start(&self, i: usize, j: usize) -> usize {
        self.stage_starts[i][j - 1]
    }

    /// Risk set `R_ij`: every entity still in contention at stage `j` of
    /// ranking `i`, as the suffix of the ranking's entity order.
    pub fn risk_set<'a>(&self, data: &'a Dataset, i: usize, j: usize) -> &'a [usize] {
        &data.rankings[i].y[self.stage_start(i, j)..]
    }
}

pub fn compute_suffstats(data: &Dataset) -> SuffStats {
    let k = data.num_entities();
    let mut w = vec![0u64; k];
    let mut d = vec![0u64; k];
    let mut c = vec![0u64; k];
    let mut v = Vec::with_capacity(data.rankings.len());
    let mut stage_starts = Vec::with_capacity(data.rankings.len());
    for r in &data.rankings {
        let vi = r.counted_stages();
        v.push(vi);
        stage_starts.push(r.stage_starts());
        for idx in 0..r.len() {
            let kid = r.y[idx];
            c[kid] += 1;
            d[kid] += (r.s[idx] - 1) as u64;
            if (r.s[idx] as usize) <= vi {
                w[kid] += 1;
            }
        }
    }
    SuffStats {
        w,
        d,
        c,
        v,
        stage_starts,
    }
}

// ---- reversal ----

/// Reverses a complete ranking: worst entity first, tie pattern mirrored,
/// bucket indices rebuilt from 1.
pub fn reverse_ranking(r: &Ranking) -> Result<Ranking> {
    if !r.is_complete() {
        return Err(GplError::IncompatibleData(
            "the reverse model requires complete rankings (no '|' remainder)".into(),
        ));
    }
    let n = r.len();
    let y: Vec<usize> = r.y.iter().rev().copied().collect();
    let mut s = Vec::with_capacity(n);
    s.push(1u32);
    for j in 1..n {
        // adjacent positions j-1, j of the reversed ranking correspond to
        // original positions n-j, n-1-j
        let tied = r.s[n - j] == r.s[n - 1 - j];
        let prev = *s.last().unwrap();
        s.push(if tied { prev } else { prev + 1 });
    }
    Ranking::new(y, s, n)
}

/// Reverses every ranking in the dataset; fails if any ranking is truncated.
pub fn reverse_dataset(data: &Dataset) -> Result<Dataset> {
    let rankings = data
        .rankings
        .iter()
        .map(reverse_ranking)
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        entities: data.entities.clone(),
        rankings,
    })
}

// ---- ordered Bell numbers ----

/// Largest argument for which the ordered Bell number fits comfortably in
/// u64 arithmetic here.
pub const ORDERED_BELL_MAX: usize = 15;

/// Number of bucket orderings (ordered set partitions) of `k` entities,
/// via a(k) = sum_j C(k, j) a(k - j). Errors for `k > 15`.
pub fn ordered_bell(k: usize) -> Result<u64> {
    if k > ORDERED_BELL_MAX {
        return Err(GplError::InvalidParameter(format!(
            "ordered_bell supports k <= {ORDERED_BELL_MAX}, got {k}"
        )));
    }
    let mut binom = [[0u64; ORDERED_BELL_MAX + 1]; ORDERED_BELL_MAX + 1];
    for i in 0..=ORDERED_BELL_MAX {
        binom[i][0] = 1;
        for j in 1..=i {
            binom[i][j] = binom[i - 1][j - 1] + if j < i { binom[i - 1][j] } else { 0 };
        }
    }
    let mut a = [0u64; ORDERED_BELL_MAX + 1];
    a[0] = 1;
    for i in 1..=k {
        let mut total = 0u64;
        for j in 1..=i {
            total += binom[i][j] * a[i - j];
        }
        a[i] = total;
    }
    Ok(a[k])
}
