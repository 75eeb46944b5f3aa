//! Line-oriented definition files for substitution systems (`.sub`).
//!
//! A `.sub` file declares a lattice, an alphabet (with site potentials and
//! display colors), a substitution rule, and optionally named periodic
//! seed configurations. The grammar is line-oriented:
//!
//! ```text
//! # full-line comments start with '#'
//! format 1
//!
//! [lattice]
//! kind zd              # or: kind heisenberg
//! factors 2 2          # block lattices only: per-axis factors m̄
//! lambda0 2            # dilation scale; must match the declared lattice
//!
//! [alphabet]
//! letter red 0 #b03a2e      # letter NAME POTENTIAL [COLOR]
//! letter blue 2 #1f618d
//!
//! [rule]
//! image red red blue red blue    # one value per substitution cell,
//! image blue blue red blue red   # in lexicographic cell order
//!
//! [seeds]
//! seed rb periods 2 2 block red blue blue red
//! seed top constant red
//! ```
//!
//! Sections appear in the order `[lattice]`, `[alphabet]`, `[rule]`,
//! `[seeds]`, with `[seeds]` optional. Rule images list one letter per
//! cell of the lattice's substitution cell set in lexicographic cell
//! order; seed blocks list one letter per cell of the period box
//! `[0,p₁)×…×[0,p_d)` in the same (row-major, last axis fastest) order.
//! Block seeds are only defined on block lattices; constant seeds work on
//! every lattice. Seed names use `[A-Za-z0-9_-]`; for any declared letter
//! `x`, the name `const:x` always resolves to the constant configuration
//! without being declared.
//!
//! [`SubstitutionFile::canonical_string`] is the canonical serialization:
//! parsing it back yields a structurally identical value, and serializing
//! again reproduces the same bytes.

use crate::error::{Error, Result};
use crate::lattice::{LatticeKind, LatticeModel};
use crate::substitution::{Alphabet, Letter, PeriodicConfig, SubstitutionRule};
use std::path::Path;

/// A named seed configuration from a definition file.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSeed {
    pub name: String,
    pub config: PeriodicConfig,
}

/// A parsed substitution definition file: the rule (carrying its lattice
/// model and alphabet) plus the declared seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionFile {
    pub rule: SubstitutionRule,
    pub seeds: Vec<NamedSeed>,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// One significant line: its 1-based number and whitespace-split tokens.
struct Line<'a> {
    no: usize,
    tokens: Vec<&'a str>,
}

fn significant_lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Line { no: i + 1, tokens: t.split_whitespace().collect() })
            }
        })
        .collect()
}

struct Cursor<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Line<'a>> {
        self.lines.get(self.pos)
    }

    fn next(&mut self) -> Option<&Line<'a>> {
        let l = self.lines.get(self.pos);
        if l.is_some() {
            self.pos += 1;
        }
        l
    }

    fn expect_section(&mut self, header: &str) -> Result<()> {
        match self.next() {
            Some(l) if l.tokens == [header] => Ok(()),
            Some(l) => Err(err(l.no, format!("expected section {header}"))),
            None => Err(err(0, format!("missing section {header}"))),
        }
    }

    /// True when the next line is a section header `[...]`.
    fn at_section(&self) -> bool {
        matches!(self.peek(), Some(l) if l.tokens.len() == 1
            && l.tokens[0].starts_with('[') && l.tokens[0].ends_with(']'))
    }
}

fn parse_int<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse::<T>().map_err(|_| err(line, format!("invalid {what}: {tok}")))
}

fn parse_lattice(cur: &mut Cursor<'_>) -> Result<LatticeModel> {
    cur.expect_section("[lattice]")?;
    let mut kind: Option<(usize, String)> = None;
    let mut factors: Option<(usize, Vec<u32>)> = None;
    let mut lambda0: Option<(usize, u32)> = None;
    while !cur.at_section() {
        let Some(l) = cur.next() else { break };
        match l.tokens[0] {
            "kind" if l.tokens.len() == 2 => kind = Some((l.no, l.tokens[1].to_string())),
            "factors" => {
                let mut v = Vec::new();
                for t in &l.tokens[1..] {
                    v.push(parse_int::<u32>(t, l.no, "factor")?);
                }
                factors = Some((l.no, v));
            }
            "lambda0" if l.tokens.len() == 2 => {
                lambda0 = Some((l.no, parse_int::<u32>(l.tokens[1], l.no, "lambda0")?));
            }
            _ => return Err(err(l.no, "expected kind/factors/lambda0 directive")),
        }
    }
    let (kind_line, kind) = kind.ok_or_else(|| err(0, "lattice section needs a kind line"))?;
    let model = match kind.as_str() {
        "zd" => {
            let (fl, f) =
                factors.ok_or_else(|| err(kind_line, "block lattices need a factors line"))?;
            LatticeModel::zd_blocks(&f).map_err(|e| err(fl, e.to_string()))?
        }
        "heisenberg" => {
            if let Some((fl, _)) = factors {
                return Err(err(fl, "the Heisenberg lattice takes no factors line"));
            }
            LatticeModel::heisenberg()
        }
        other => return Err(err(kind_line, format!("unknown lattice kind: {other}"))),
    };
    let (ll, l0) = lambda0.ok_or_else(|| err(kind_line, "lattice section needs a lambda0 line"))?;
    if l0 != model.lambda0() {
        return Err(err(
            ll,
            format!("lambda0 {l0} contradicts the lattice (expected {})", model.lambda0()),
        ));
    }
    Ok(model)
}

fn parse_alphabet(cur: &mut Cursor<'_>) -> Result<Alphabet> {
    cur.expect_section("[alphabet]")?;
    let mut names = Vec::new();
    let mut potentials = Vec::new();
    let mut colors = Vec::new();
    while !cur.at_section() {
        let Some(l) = cur.next() else { break };
        if l.tokens[0] != "letter" || !(3..=4).contains(&l.tokens.len()) {
            return Err(err(l.no, "expected: letter NAME POTENTIAL [COLOR]"));
        }
        let name = l.tokens[1];
        if !valid_name(name) {
            return Err(err(l.no, format!("invalid letter name: {name}")));
        }
        if names.iter().any(|n| n == name) {
            return Err(err(l.no, format!("duplicate letter: {name}")));
        }
        let pot: f64 = l.tokens[2]
            .parse()
            .map_err(|_| err(l.no, format!("invalid potential: {}", l.tokens[2])))?;
        if !pot.is_finite() {
            return Err(err(l.no, "potentials must be finite"));
        }
        names.push(name.to_string());
        potentials.push(pot);
        colors.push(l.tokens.get(3).map(|s| s.to_string()));
    }
    if names.len() > usize::from(Letter::MAX) + 1 {
        return Err(err(0, "too many letters"));
    }
    Alphabet::new(names, potentials, colors).map_err(|e| err(0, e.to_string()))
}

fn parse_rule(cur: &mut Cursor<'_>, model: &LatticeModel, alphabet: &Alphabet) -> Result<SubstitutionRule> {
    cur.expect_section("[rule]")?;
    let cells = model.seed_cells().len();
    let mut images: Vec<Option<Vec<Letter>>> = vec![None; alphabet.len()];
    while !cur.at_section() {
        let Some(l) = cur.next() else { break };
        if l.tokens[0] != "image" || l.tokens.len() < 2 {
            return Err(err(l.no, "expected: image LETTER CELL-LETTERS..."));
        }
        let Some(letter) = alphabet.index_of(l.tokens[1]) else {
            return Err(err(l.no, format!("undeclared letter: {}", l.tokens[1])));
        };
        if images[usize::from(letter)].is_some() {
            return Err(err(l.no, format!("duplicate image for {}", l.tokens[1])));
        }
        let vals = &l.tokens[2..];
        if vals.len() != cells {
            return Err(err(
                l.no,
                format!("image needs {cells} cell values (lexicographic cell order), got {}", vals.len()),
            ));
        }
        let mut img = Vec::with_capacity(cells);
        for t in vals {
            let Some(v) = alphabet.index_of(t) else {
                return Err(err(l.no, format!("undeclared letter: {t}")));
            };
            img.push(v);
        }
        images[usize::from(letter)] = Some(img);
    }
    let mut full = Vec::with_capacity(alphabet.len());
    for (i, img) in images.into_iter().enumerate() {
        match img {
            Some(v) => full.push(v),
            None => {
                return Err(err(0, format!("missing image for letter {}", alphabet.name(i as Letter))))
            }
        }
    }
    SubstitutionRule::new(model.clone(), alphabet.clone(), full).map_err(|e| err(0, e.to_string()))
}

fn parse_seeds(cur: &mut Cursor<'_>, model: &LatticeModel, alphabet: &Alphabet) -> Result<Vec<NamedSeed>> {
    if cur.peek().is_none() {
        return Ok(Vec::new());
    }
    cur.expect_section("[seeds]")?;
    let mut seeds: Vec<NamedSeed> = Vec::new();
    while let Some(l) = cur.next() {
        if l.tokens[0] != "seed" || l.tokens.len() < 4 {
            return Err(err(l.no, "expected: seed NAME constant LETTER | seed NAME periods P... block LETTERS..."));
        }
        let name = l.tokens[1];
        if !valid_name(name) {
            return Err(err(l.no, format!("invalid seed name: {name}")));
        }
        if seeds.iter().any(|s| s.name == name) {
            return Err(err(l.no, format!("duplicate seed: {name}")));
        }
        let config = match l.tokens[2] {
            "constant" if l.tokens.len() == 4 => {
                let Some(letter) = alphabet.index_of(l.tokens[3]) else {
                    return Err(err(l.no, format!("undeclared letter: {}", l.tokens[3])));
                };
                PeriodicConfig::constant(letter)
            }
            "periods" => {
                let LatticeKind::ZdBlocks { factors } = model.kind() else {
                    return Err(err(l.no, "block seeds are only defined on block lattices"));
                };
                let d = factors.len();
                let rest = &l.tokens[3..];
                if rest.len() < d + 1 || rest[d] != "block" {
                    return Err(err(l.no, format!("expected {d} periods followed by 'block'")));
                }
                let mut periods = Vec::with_capacity(d);
                for t in &rest[..d] {
                    periods.push(parse_int::<u32>(t, l.no, "period")?);
                }
                let mut values = Vec::new();
                for t in &rest[d + 1..] {
                    let Some(v) = alphabet.index_of(t) else {
                        return Err(err(l.no, format!("undeclared letter: {t}")));
                    };
                    values.push(v);
                }
                PeriodicConfig::zd_word(periods, values).map_err(|e| err(l.no, e.to_string()))?
            }
            other => return Err(err(l.no, format!("unknown seed form: {other}"))),
        };
        seeds.push(NamedSeed { name: name.to_string(), config });
    }
    Ok(seeds)
}

impl SubstitutionFile {
    /// Parses definition-file text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cur = Cursor { lines: significant_lines(text), pos: 0 };
        match cur.next() {
            Some(l) if l.tokens == ["format", "1"] => {}
            Some(l) => return Err(err(l.no, "the first line must be: format 1")),
            None => return Err(err(0, "empty definition file")),
        }
        let model = parse_lattice(&mut cur)?;
        let alphabet = parse_alphabet(&mut cur)?;
        let rule = parse_rule(&mut cur, &model, &alphabet)?;
        let seeds = parse_seeds(&mut cur, &model, &alphabet)?;
        Ok(SubstitutionFile { rule, seeds })
    }

    /// Reads and parses a definition file from disk.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// The canonical serialization: parsing it back yields an identical
    /// structure, and serializing that reproduces the same bytes.
    pub fn canonical_string(&self) -> String {
        let model = self.rule.model();
        let alphabet = self.rule.alphabet();
        let mut out = String::from("format 1\n\n[lattice]\n");
        match model.kind() {
            LatticeKind::ZdBlocks { factors } => {
                out.push_str("kind zd\nfactors");
                for f in factors {
                    out.push_str(&format!(" {f}"));
                }
                out.push('\n');
            }
            LatticeKind::Heisenberg => out.push_str("kind heisenberg\n"),
        }
        out.push_str(&format!("lambda0 {}\n\n[alphabet]\n", model.lambda0()));
        for i in 0..alphabet.len() {
            let letter = i as Letter;
            out.push_str(&format!("letter {} {}", alphabet.name(letter), alphabet.potential(letter)));
            if let Some(c) = alphabet.color(letter) {
                out.push_str(&format!(" {c}"));
            }
            out.push('\n');
        }
        out.push_str("\n[rule]\n");
        for i in 0..alphabet.len() {
            let letter = i as Letter;
            out.push_str(&format!("image {}", alphabet.name(letter)));
            for &v in self.rule.image(letter) {
                out.push_str(&format!(" {}", alphabet.name(v)));
            }
            out.push('\n');
        }
        if !self.seeds.is_empty() {
            out.push_str("\n[seeds]\n");
            for s in &self.seeds {
                out.push_str(&format!("seed {}", s.name));
                match &s.config {
                    PeriodicConfig::Constant { letter } => {
                        out.push_str(&format!(" constant {}", alphabet.name(*letter)));
                    }
                    PeriodicConfig::ZdWord { periods, values } => {
                        out.push_str(" periods");
                        for p in periods {
                            out.push_str(&format!(" {p}"));
                        }
                        out.push_str(" block");
                        for &v in values {
                            out.push_str(&format!(" {}", alphabet.name(v)));
                        }
                    }
                    PeriodicConfig::Transversal { .. } => {
                        unreachable!("transversal seeds are not representable in definition files")
                    }
                }
                out.push('\n');
            }
        }
        out
    }

    /// Resolves a seed name: declared seeds first, then the implicit
    /// `const:LETTER` form for any declared letter.
    pub fn resolve_seed(&self, name: &str) -> Result<PeriodicConfig> {
        if let Some(s) = self.seeds.iter().find(|s| s.name == name) {
            return Ok(s.config.clone());
        }
        if let Some(letter_name) = name.strip_prefix("const:") {
            if let Some(letter) = self.rule.alphabet().index_of(letter_name) {
                return Ok(PeriodicConfig::constant(letter));
            }
        }
        Err(Error::Structural(format!(
            "unknown seed: {name} (declared: {}; any letter via const:LETTER)",
            self.seed_names().join(", ")
        )))
    }

    /// Declared seed names, in file order.
    pub fn seed_names(&self) -> Vec<String> {
        self.seeds.iter().map(|s| s.name.clone()).collect()
    }
}
