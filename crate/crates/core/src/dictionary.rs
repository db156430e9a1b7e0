//! Bidirectional multi-mapping character dictionary.
//!
//! One Nüshu character (syllabic) corresponds to several Chinese characters
//! with the same pronunciation, and one Chinese character may map to several
//! Nüshu symbols. The table stores both directions and keeps them mutually
//! consistent. "Word" is a single character throughout: the script pair is
//! character-aligned and no segmentation is attempted.
//!
//! File format (dictionary TSV): one record per line, `target-char TAB
//! concatenated-source-candidates`. The overlay file adds a third `origin`
//! column and is the only file ever written; the official dictionary file is
//! never rewritten.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Inclusive Unicode range of the encoded Nüshu block (U+1B170–U+1B2FB).
pub const NUSHU_BLOCK: std::ops::RangeInclusive<u32> = 0x1B170..=0x1B2FB;

/// True if `c` falls in the encoded Nüshu block.
pub fn is_nushu_char(c: char) -> bool {
    NUSHU_BLOCK.contains(&(c as u32))
}

/// Which side of the mapping a character belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Script {
    /// Chinese (logographic) side.
    Source,
    /// Nüshu (syllabic) side.
    Target,
}

/// A single character with a validated script assignment.
///
/// Target characters must fall in the Nüshu block; source characters must
/// fall outside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScriptChar {
    ch: char,
    script: Script,
}

impl ScriptChar {
    pub fn source(ch: char) -> Result<Self> {
        if is_nushu_char(ch) {
            return Err(Error::Validation(format!(
                "source character {ch:?} (U+{:04X}) lies in the Nüshu block",
                ch as u32
            )));
        }
        Ok(ScriptChar {
            ch,
            script: Script::Source,
        })
    }

    pub fn target(ch: char) -> Result<Self> {
        if !is_nushu_char(ch) {
            return Err(Error::Validation(format!(
                "target character {ch:?} (U+{:04X}) is outside the Nüshu block",
                ch as u32
            )));
        }
        Ok(ScriptChar {
            ch,
            script: Script::Target,
        })
    }

    pub fn ch(&self) -> char {
        self.ch
    }

    pub fn script(&self) -> Script {
        self.script
    }
}

/// Whether a pair came from the official dictionary file or was registered
/// later (newly mapped pairs awaiting expert validation).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Official,
    Registered,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Official => write!(f, "official"),
            Origin::Registered => write!(f, "registered"),
        }
    }
}

impl std::str::FromStr for Origin {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "official" => Ok(Origin::Official),
            "registered" => Ok(Origin::Registered),
            _ => Err(()),
        }
    }
}

/// Coverage of one source sentence against the dictionary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coverage {
    /// Distinct covered characters, first-occurrence order.
    pub covered: Vec<char>,
    /// Distinct uncovered characters, first-occurrence order.
    pub missing: Vec<char>,
    /// True iff every character has at least one candidate.
    pub fully_covered: bool,
}

/// The bidirectional multi-mapping table.
///
/// Candidate lists are duplicate-free and keep file order. The table is
/// immutable after construction; [`MappingTable::register`] returns a new
/// logical version, so concurrent readers never observe a partial update.
#[derive(Debug, Clone, Default)]
pub struct MappingTable {
    forward: BTreeMap<char, Vec<char>>,
    backward: BTreeMap<char, Vec<char>>,
    origins: BTreeMap<(char, char), Origin>,
}

impl MappingTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Load the dictionary TSV. Returns the table and the number of
    /// duplicate pairs that were collapsed.
    pub fn load(path: &Path) -> Result<(Self, usize)> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parse dictionary TSV text: `target TAB source-candidates` per line.
    pub fn parse(text: &str) -> Result<(Self, usize)> {
        let mut table = MappingTable::new();
        let mut duplicates = 0;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.is_empty() {
                continue;
            }
            let (target, sources) = parse_record(line, line_no, false)?.0;
            for source in sources.chars() {
                if !table.insert_pair(source, target, Origin::Official, line_no)? {
                    duplicates += 1;
                }
            }
        }
        Ok((table, duplicates))
    }

    /// Load an overlay TSV (`target TAB sources TAB origin`) on top of this
    /// table, returning the merged table and the collapsed-duplicate count.
    /// A pair already present keeps its existing origin.
    pub fn load_overlay(&self, path: &Path) -> Result<(Self, usize)> {
        let text = std::fs::read_to_string(path)?;
        self.parse_overlay(&text)
    }

    pub fn parse_overlay(&self, text: &str) -> Result<(Self, usize)> {
        let mut table = self.clone();
        let mut duplicates = 0;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.is_empty() {
                continue;
            }
            let ((target, sources), origin) = parse_record(line, line_no, true)?;
            let origin = origin.unwrap_or(Origin::Registered);
            for source in sources.chars() {
                if !table.insert_pair(source, target, origin, line_no)? {
                    duplicates += 1;
                }
            }
        }
        Ok((table, duplicates))
    }

    /// Serialize all registered pairs in overlay format.
    pub fn overlay_string(&self) -> String {
        let mut by_target: BTreeMap<char, Vec<char>> = BTreeMap::new();
        for (&(source, target), &origin) in &self.origins {
            if origin == Origin::Registered {
                // preserve backward-list order within each target
                let order = &self.backward[&target];
                let list = by_target.entry(target).or_default();
                list.push(source);
                list.sort_by_key(|c| order.iter().position(|x| x == c));
            }
        }
        let mut out = String::new();
        for (target, sources) in by_target {
            let sources: String = sources.into_iter().collect();
            out.push_str(&format!("{target}\t{sources}\tregistered\n"));
        }
        out
    }

    /// Write registered pairs to the overlay file (atomic).
    pub fn save_overlay(&self, path: &Path) -> Result<()> {
        crate::util::atomic_write(path, &self.overlay_string())?;
        Ok(())
    }

    /// Register one new pair, returning the updated table and whether the
    /// pair was actually new (`false` means the call was a no-op).
    pub fn register(&self, source: char, target: char) -> Result<(Self, bool)> {
        ScriptChar::source(source)?;
        ScriptChar::target(target)?;
        let mut table = self.clone();
        let added = table.insert_pair(source, target, Origin::Registered, 0)?;
        Ok((table, added))
    }

    fn insert_pair(
        &mut self,
        source: char,
        target: char,
        origin: Origin,
        line_no: usize,
    ) -> Result<bool> {
        if !is_nushu_char(target) {
            return Err(Error::Validation(format!(
                "line {line_no}: target character {target:?} (U+{:04X}) is outside the Nüshu block",
                target as u32
            )));
        }
        if is_nushu_char(source) {
            return Err(Error::Validation(format!(
                "line {line_no}: source character {source:?} (U+{:04X}) lies in the Nüshu block",
                source as u32
            )));
        }
        if self.origins.contains_key(&(source, target)) {
            return Ok(false);
        }
        self.forward.entry(source).or_default().push(target);
        self.backward.entry(target).or_default().push(source);
        self.origins.insert((source, target), origin);
        Ok(true)
    }

    /// Nüshu candidates for a source character, file order. Empty if unmapped.
    pub fn candidates_for_source(&self, c: char) -> &[char] {
        self.forward.get(&c).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Source candidates for a Nüshu character, file order. Empty if unmapped.
    pub fn candidates_for_target(&self, c: char) -> &[char] {
        self.backward.get(&c).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn origin(&self, source: char, target: char) -> Option<Origin> {
        self.origins.get(&(source, target)).copied()
    }

    /// Number of distinct pairs.
    pub fn pair_count(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    /// All mapped source characters, ascending by codepoint.
    pub fn source_chars(&self) -> impl Iterator<Item = char> + '_ {
        self.forward.keys().copied()
    }

    /// All mapped target characters, ascending by codepoint.
    pub fn target_chars(&self) -> impl Iterator<Item = char> + '_ {
        self.backward.keys().copied()
    }

    /// Coverage report for a normalized source sentence.
    pub fn sentence_coverage(&self, sentence: &str) -> Coverage {
        let mut covered = Vec::new();
        let mut missing = Vec::new();
        for c in sentence.chars() {
            let list = if self.candidates_for_source(c).is_empty() {
                &mut missing
            } else {
                &mut covered
            };
            if !list.contains(&c) {
                list.push(c);
            }
        }
        Coverage {
            fully_covered: missing.is_empty(),
            covered,
            missing,
        }
    }

    /// Split sentences into (fully covered, rejected), preserving order.
    pub fn filter_corpus(&self, sentences: &[String]) -> (Vec<String>, Vec<String>) {
        let mut kept = Vec::new();
        let mut rejected = Vec::new();
        for s in sentences {
            if self.sentence_coverage(s).fully_covered {
                kept.push(s.clone());
            } else {
                rejected.push(s.clone());
            }
        }
        (kept, rejected)
    }

    #[cfg(test)]
    fn check_consistency(&self) {
        for (&(source, target), _) in &self.origins {
            assert!(self.forward[&source].contains(&target));
            assert!(self.backward[&target].contains(&source));
        }
        for (source, targets) in &self.forward {
            let mut seen = std::collections::HashSet::new();
            for t in targets {
                assert!(seen.insert(t), "duplicate candidate in forward list");
                assert!(self.backward[t].contains(source));
                assert!(self.origins.contains_key(&(*source, *t)));
            }
        }
        for (target, sources) in &self.backward {
            let mut seen = std::collections::HashSet::new();
            for s in sources {
                assert!(seen.insert(s), "duplicate candidate in backward list");
                assert!(self.forward[s].contains(target));
            }
        }
    }
}

fn parse_record(
    line: &str,
    line_no: usize,
    with_origin: bool,
) -> Result<((char, String), Option<Origin>)> {
    let fields: Vec<&str> = line.split('\t').collect();
    let expected = if with_origin { 3 } else { 2 };
    if fields.len() != expected {
        return Err(Error::parse(
            line_no,
            format!("expected {expected} tab-separated fields, found {}", fields.len()),
        ));
    }
    let mut target_chars = fields[0].chars();
    let target = match (target_chars.next(), target_chars.next()) {
        (Some(c), None) => c,
        _ => {
            return Err(Error::parse(
                line_no,
                format!("target field must be exactly one character, got {:?}", fields[0]),
            ))
        }
    };
    if fields[1].is_empty() {
        return Err(Error::parse(line_no, "no source candidates"));
    }
    let origin = if with_origin {
        Some(fields[2].parse::<Origin>().map_err(|()| {
            Error::parse(line_no, format!("unknown origin {:?}", fields[2]))
        })?)
    } else {
        None
    };
    Ok(((target, fields[1].to_string()), origin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // 𛅰 = U+1B170, 𛅱 = U+1B171, 𛅲 = U+1B172
    const N0: char = '\u{1B170}';
    const N1: char = '\u{1B171}';
    const N2: char = '\u{1B172}';

    fn fixture() -> MappingTable {
        MappingTable::parse("𛅰\t阳洋\n").unwrap().0
    }

    #[test]
    fn empty_file_gives_empty_table() {
        let (table, warnings) = MappingTable::parse("").unwrap();
        assert!(table.is_empty());
        assert_eq!(warnings, 0);
    }

    #[test]
    fn two_candidate_line_builds_both_directions() {
        let table = fixture();
        assert_eq!(table.candidates_for_source('阳'), &[N0]);
        assert_eq!(table.candidates_for_source('洋'), &[N0]);
        assert_eq!(table.candidates_for_target(N0), &['阳', '洋']);
        assert_eq!(table.origin('阳', N0), Some(Origin::Official));
        table.check_consistency();
    }

    #[test]
    fn target_outside_block_is_rejected_with_line() {
        let err = MappingTable::parse("𛅰\t阳\n一\t洋\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "got: {msg}");
        assert!(msg.contains("outside the Nüshu block"), "got: {msg}");
    }

    #[test]
    fn source_inside_block_is_rejected() {
        let err = MappingTable::parse(&format!("𛅰\t{N1}\n")).unwrap_err();
        assert!(err.to_string().contains("Nüshu block"));
    }

    #[test]
    fn malformed_line_reports_field_count() {
        let err = MappingTable::parse("𛅰\t阳\t洋\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicates_collapse_with_warning_count() {
        let (table, warnings) = MappingTable::parse("𛅰\t阳阳\n𛅰\t阳\n").unwrap();
        assert_eq!(warnings, 2);
        assert_eq!(table.candidates_for_target(N0), &['阳']);
        table.check_consistency();
    }

    #[test]
    fn unmapped_characters_give_empty_lists() {
        let table = fixture();
        assert!(table.candidates_for_source('月').is_empty());
        assert!(table.candidates_for_target(N2).is_empty());
    }

    #[test]
    fn three_candidates_keep_file_order() {
        let (table, _) = MappingTable::parse(&format!("{N0}\t阳\n{N1}\t阳\n{N2}\t阳\n")).unwrap();
        assert_eq!(table.candidates_for_source('阳'), &[N0, N1, N2]);
    }

    #[test]
    fn register_grows_both_directions() {
        let table = fixture();
        let (table, added) = table.register('洁', N0).unwrap();
        assert!(added);
        assert_eq!(table.candidates_for_target(N0), &['阳', '洋', '洁']);
        assert_eq!(table.candidates_for_source('洁'), &[N0]);
        assert_eq!(table.origin('洁', N0), Some(Origin::Registered));
        table.check_consistency();
    }

    #[test]
    fn register_is_idempotent() {
        let (table, _) = fixture().register('洁', N0).unwrap();
        let (table2, added) = table.register('洁', N0).unwrap();
        assert!(!added);
        assert_eq!(table2.pair_count(), table.pair_count());
        assert_eq!(table2.candidates_for_target(N0), table.candidates_for_target(N0));
    }

    #[test]
    fn register_rejects_bad_scripts() {
        assert!(fixture().register(N1, N0).is_err());
        assert!(fixture().register('阳', '月').is_err());
    }

    #[test]
    fn coverage_on_fixture() {
        let table = fixture();
        let cov = table.sentence_coverage("");
        assert!(cov.fully_covered && cov.covered.is_empty() && cov.missing.is_empty());

        assert!(table.sentence_coverage("阳洋").fully_covered);

        let cov = table.sentence_coverage("阳月");
        assert!(!cov.fully_covered);
        assert_eq!(cov.missing, vec!['月']);
        assert_eq!(cov.covered, vec!['阳']);
    }

    #[test]
    fn missing_list_dedups_in_first_occurrence_order() {
        let cov = fixture().sentence_coverage("月阳月光");
        assert_eq!(cov.missing, vec!['月', '光']);
    }

    #[test]
    fn filter_corpus_partitions_in_order() {
        let table = fixture();
        assert_eq!(table.filter_corpus(&[]), (vec![], vec![]));

        let input = vec!["阳洋".to_string(), "阳月".to_string()];
        let (kept, rejected) = table.filter_corpus(&input);
        assert_eq!(kept, vec!["阳洋".to_string()]);
        assert_eq!(rejected, vec!["阳月".to_string()]);
        assert_eq!(kept.len() + rejected.len(), input.len());

        // idempotence: re-filtering the kept set changes nothing
        let (kept2, rejected2) = table.filter_corpus(&kept);
        assert_eq!(kept2, kept);
        assert!(rejected2.is_empty());
    }

    #[test]
    fn overlay_round_trips_registered_pairs() {
        let (table, _) = fixture().register('洁', N1).unwrap();
        let (table, _) = table.register('治', N1).unwrap();
        let overlay = table.overlay_string();
        assert_eq!(overlay, format!("{N1}\t洁治\tregistered\n"));
        let (merged, dups) = fixture().parse_overlay(&overlay).unwrap();
        assert_eq!(dups, 0);
        assert_eq!(merged.candidates_for_target(N1), &['洁', '治']);
        assert_eq!(merged.origin('洁', N1), Some(Origin::Registered));
    }

    #[test]
    fn script_char_constructors_enforce_block() {
        assert!(ScriptChar::source('阳').is_ok());
        assert!(ScriptChar::source(N0).is_err());
        assert!(ScriptChar::target(N0).is_ok());
        assert!(ScriptChar::target('阳').is_err());
    }

    proptest! {
        // Bidirectional consistency over random load/register sequences.
        #[test]
        fn bidirectional_consistency(ops in proptest::collection::vec((0u32..30, 0u32..8), 0..60)) {
            let mut table = MappingTable::new();
            for (s, t) in ops {
                let source = char::from_u32('一' as u32 + s).unwrap();
                let target = char::from_u32(0x1B170 + t).unwrap();
                let (next, _) = table.register(source, target).unwrap();
                table = next;
            }
            table.check_consistency();
        }

        // Coverage is a function of the character set, not of positions.
        #[test]
        fn coverage_is_position_independent(chars in proptest::collection::vec(0u32..6, 0..20)) {
            let (table, _) = MappingTable::parse("𛅰\t一丁\n𛅱\t七\n").unwrap();
            let sentence: String = chars.iter()
                .map(|&i| char::from_u32('一' as u32 + i).unwrap())
                .collect();
            let reversed: String = sentence.chars().rev().collect();
            let a = table.sentence_coverage(&sentence);
            let b = table.sentence_coverage(&reversed);
            prop_assert_eq!(a.fully_covered, b.fully_covered);
            let set =
                |v: &[char]| v.iter().copied().collect::<std::collections::BTreeSet<_>>();
            prop_assert_eq!(set(&a.missing), set(&b.missing));
            prop_assert_eq!(set(&a.covered), set(&b.covered));
        }
    }
}
