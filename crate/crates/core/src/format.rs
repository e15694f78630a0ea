//! Line-oriented paradigm description files.
//!
//! ```text
//! FEATURE number: sg pl
//! FEATURE case: nom gen loc
//! MORPHEMES: 0 ni kä
//! CLASS I LEXEMES 61
//! CELL sg nom -> 0
//! ...
//! END
//! ```
//!
//! A file holds either plain `CELL` lines (one paradigm), `CLASS` blocks, or a
//! composition section (`PLANE`, `STEM`, `AFFIX`, `FORM`). The token `0`
//! denotes the null morpheme, which is stored and displayed as `∅`.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::composition::{AngleData, AngleForm, AngleModel, Axis, CompositionError, Plane};
use crate::exponence::{ExponenceError, TotalParadigmMatrix};
use crate::features::{build_phi, FeatureError, FeatureSystem, ParadigmCell, PhiMatrix};
use crate::rotation::{ClassInventory, InflectionClass};

pub const NULL_MORPHEME: &str = "∅";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: expected {expected}")]
    Syntax { line: usize, col: usize, expected: String },
    #[error("line {line}, column {col}: undeclared {kind} `{name}`")]
    UndeclaredName { line: usize, col: usize, kind: &'static str, name: String },
    #[error("line {line}, column {col}: `{name}` is already declared")]
    DuplicateDeclaration { line: usize, col: usize, name: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            Self::Syntax { line, .. } | Self::UndeclaredName { line, .. } | Self::DuplicateDeclaration { line, .. } => {
                *line
            }
        }
    }
}

/// Errors raised when a parsed file is turned into model objects.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContentError {
    #[error("file holds {found}, but {wanted} is needed")]
    WrongKind { wanted: &'static str, found: &'static str },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Exponence(#[from] ExponenceError),
    #[error(transparent)]
    Composition(#[from] CompositionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellLine {
    pub cell: ParadigmCell,
    pub morpheme: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassBlock {
    pub label: String,
    pub lexemes: u32,
    pub cells: Vec<CellLine>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormLine {
    pub stem: String,
    pub cell: ParadigmCell,
    pub affix: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionBlock {
    pub plane: Plane,
    pub stems: Vec<(String, Option<f64>)>,
    pub affixes: Vec<(String, Option<f64>)>,
    pub forms: Vec<FormLine>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Paradigm(Vec<CellLine>),
    Classes(Vec<ClassBlock>),
    Composition(CompositionBlock),
}

impl Body {
    pub fn kind(&self) -> &'static str {
        match self {
            Body::Paradigm(_) => "a paradigm",
            Body::Classes(_) => "class blocks",
            Body::Composition(_) => "a composition section",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParadigmFile {
    pub features: FeatureSystem,
    pub morphemes: Vec<String>,
    pub body: Body,
}

fn null_to_label(tok: &str) -> String {
    if tok == "0" { NULL_MORPHEME.to_string() } else { tok.to_string() }
}

fn label_to_token(label: &str) -> &str {
    if label == NULL_MORPHEME { "0" } else { label }
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in content.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((byte, col + 1)),
            (true, Some((b, c))) => {
                out.push(Token { text: &content[b..byte], col: c });
                start = None;
            }
            _ => {}
        }
    }
    if let Some((b, c)) = start {
        out.push(Token { text: &content[b..], col: c });
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Paradigm,
    Classes,
    Composition,
}

struct Parser {
    line: usize,
    line_len: usize,
    feature_decls: Vec<(String, Vec<String>)>,
    features: Option<FeatureSystem>,
    morphemes: Option<Vec<String>>,
    kind: Option<Kind>,
    cells: Vec<CellLine>,
    classes: Vec<ClassBlock>,
    open_class: Option<(ClassBlock, HashSet<ParadigmCell>)>,
    plane: Option<Plane>,
    stems: Vec<(String, Option<f64>)>,
    affixes: Vec<(String, Option<f64>)>,
    forms: Vec<FormLine>,
    first_composition_line: usize,
    cell_set: HashSet<ParadigmCell>,
}

impl Parser {
    fn syntax(&self, col: usize, expected: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col, expected: expected.into() }
    }

    fn end_col(&self) -> usize {
        self.line_len + 1
    }

    fn expect<'t>(&self, toks: &[Token<'t>], at: usize, what: &str) -> Result<Token<'t>, ParseError> {
        toks.get(at).copied().ok_or_else(|| self.syntax(self.end_col(), what))
    }

    fn expect_end(&self, toks: &[Token<'_>], at: usize) -> Result<(), ParseError> {
        match toks.get(at) {
            Some(t) => Err(self.syntax(t.col, "end of line")),
            None => Ok(()),
        }
    }

    fn features(&mut self, col: usize) -> Result<&FeatureSystem, ParseError> {
        if self.features.is_none() {
            if self.feature_decls.is_empty() {
                return Err(self.syntax(col, "FEATURE declarations first"));
            }
            let fs = FeatureSystem::new(self.feature_decls.clone()).map_err(|e| self.syntax(1, e.to_string()))?;
            self.features = Some(fs);
        }
        Ok(self.features.as_ref().expect("just built"))
    }

    fn set_kind(&mut self, kind: Kind, col: usize) -> Result<(), ParseError> {
        match self.kind {
            None => {
                self.kind = Some(kind);
                Ok(())
            }
            Some(k) if k == kind => Ok(()),
            Some(k) => {
                let have = match k {
                    Kind::Paradigm => "CELL lines",
                    Kind::Classes => "CLASS blocks",
                    Kind::Composition => "composition lines",
                };
                Err(self.syntax(col, format!("more {have}; a file holds one kind of content")))
            }
        }
    }

    fn feature_line(&mut self, toks: &[Token<'_>]) -> Result<(), ParseError> {
        if self.features.is_some() {
            return Err(self.syntax(toks[0].col, "FEATURE lines before any other content"));
        }
        let name_tok = self.expect(toks, 1, "feature name")?;
        let (name, mut next) = match name_tok.text.strip_suffix(':') {
            Some(n) if !n.is_empty() => (n, 2),
            Some(_) => return Err(self.syntax(name_tok.col, "feature name")),
            None => {
                let colon = self.expect(toks, 2, "`:`")?;
                if colon.text != ":" {
                    return Err(self.syntax(colon.col, "`:`"));
                }
                (name_tok.text, 3)
            }
        };
        if self.feature_decls.iter().any(|(n, _)| n == name) {
            return Err(ParseError::DuplicateDeclaration { line: self.line, col: name_tok.col, name: name.into() });
        }
        let mut values = Vec::new();
        while let Some(t) = toks.get(next) {
            let known = self.feature_decls.iter().any(|(_, vs)| vs.iter().any(|v| v == t.text));
            if known || values.iter().any(|v: &String| v == t.text) {
                return Err(ParseError::DuplicateDeclaration { line: self.line, col: t.col, name: t.text.into() });
            }
            values.push(t.text.to_string());
            next += 1;
        }
        if values.len() < 2 {
            return Err(self.syntax(self.end_col(), "at least two feature values"));
        }
        self.feature_decls.push((name.to_string(), values));
        Ok(())
    }

    fn morphemes_line(&mut self, toks: &[Token<'_>]) -> Result<(), ParseError> {
        let mut next = 1;
        if toks[0].text == "MORPHEMES" {
            let colon = self.expect(toks, 1, "`:`")?;
            if colon.text != ":" {
                return Err(self.syntax(colon.col, "`:`"));
            }
            next = 2;
        }
        if self.morphemes.is_some() {
            return Err(ParseError::DuplicateDeclaration { line: self.line, col: toks[0].col, name: "MORPHEMES".into() });
        }
        let mut list: Vec<String> = Vec::new();
        for t in &toks[next..] {
            let label = null_to_label(t.text);
            if list.contains(&label) {
                return Err(ParseError::DuplicateDeclaration { line: self.line, col: t.col, name: label });
            }
            list.push(label);
        }
        if list.is_empty() {
            return Err(self.syntax(self.end_col(), "at least one morpheme"));
        }
        self.morphemes = Some(list);
        Ok(())
    }

    /// Reads one value per feature in declaration order, starting at `from`.
    fn cell_values(&mut self, toks: &[Token<'_>], from: usize) -> Result<ParadigmCell, ParseError> {
        let fs = self.features(toks[0].col)?.clone();
        let mut values = Vec::new();
        for (f, feature) in fs.features().iter().enumerate() {
            let what = format!("a value of feature `{}`", feature.name);
            let t = self.expect(toks, from + f, &what)?;
            match fs.value_index(t.text) {
                None if t.text == "->" => return Err(self.syntax(t.col, what)),
                None => {
                    return Err(ParseError::UndeclaredName {
                        line: self.line,
                        col: t.col,
                        kind: "feature value",
                        name: t.text.into(),
                    })
                }
                Some(i) if fs.feature_of(i) != f => return Err(self.syntax(t.col, what)),
                Some(_) => values.push(t.text),
            }
        }
        Ok(fs.cell(&values).expect("validated per feature"))
    }

    fn arrow_target<'t>(&self, toks: &[Token<'t>], at: usize) -> Result<Token<'t>, ParseError> {
        let arrow = self.expect(toks, at, "`->`")?;
        if arrow.text != "->" {
            return Err(self.syntax(arrow.col, "`->`"));
        }
        let target = self.expect(toks, at + 1, "a morpheme")?;
        self.expect_end(toks, at + 2)?;
        Ok(target)
    }

    fn cell_line(&mut self, toks: &[Token<'_>]) -> Result<(), ParseError> {
        if self.open_class.is_none() {
            self.set_kind(Kind::Paradigm, toks[0].col)?;
        }
        let cell = self.cell_values(toks, 1)?;
        let n = self.features.as_ref().expect("built by cell_values").num_features();
        let target = self.arrow_target(toks, 1 + n)?;
        let morpheme = null_to_label(target.text);
        let declared = self.morphemes.as_ref().is_some_and(|m| m.contains(&morpheme));
        if !declared {
            return Err(ParseError::UndeclaredName { line: self.line, col: target.col, kind: "morpheme", name: morpheme });
        }
        let seen = match self.open_class.as_mut() {
            Some((_, set)) => set,
            None => &mut self.cell_set,
        };
        if !seen.insert(cell.clone()) {
            let label = self.features.as_ref().expect("built").cell_label(&cell);
            return Err(ParseError::DuplicateDeclaration { line: self.line, col: toks[1].col, name: label });
        }
        let line = CellLine { cell, morpheme };
        match self.open_class.as_mut() {
            Some((block, _)) => block.cells.push(line),
            None => self.cells.push(line),
        }
        Ok(())
    }

    fn class_line(&mut self, toks: &[Token<'_>]) -> Result<(), ParseError> {
        self.set_kind(Kind::Classes, toks[0].col)?;
        if self.open_class.is_some() {
            return Err(self.syntax(toks[0].col, "END before the next CLASS"));
        }
        let label = self.expect(toks, 1, "class label")?;
        if self.classes.iter().any(|c| c.label == label.text) {
            return Err(ParseError::DuplicateDeclaration { line: self.line, col: label.col, name: label.text.into() });
        }
        let kw = self.expect(toks, 2, "`LEXEMES`")?;
        if kw.text != "LEXEMES" {
            return Err(self.syntax(kw.col, "`LEXEMES`"));
        }
        let count = self.expect(toks, 3, "lexeme count")?;
        let lexemes = match count.text.parse::<u32>() {
            Ok(n) if n > 0 => n,
            _ => return Err(self.syntax(count.col, "a positive lexeme count")),
        };
        self.expect_end(toks, 4)?;
        self.open_class = Some((ClassBlock { label: label.text.into(), lexemes, cells: Vec::new() }, HashSet::new()));
        Ok(())
    }

    fn end_line(&mut self, toks: &[Token<'_>]) -> Result<(), ParseError> {
        self.expect_end(toks, 1)?;
        let Some((block, set)) = self.open_class.take() else {
            return Err(self.syntax(toks[0].col, "CLASS before END"));
        };
        if block.cells.is_empty() {
            return Err(self.syntax(toks[0].col, "CELL lines inside the class block"));
        }
        if let Some(first) = self.classes.first() {
            let first_set: HashSet<&ParadigmCell> = first.cells.iter().map(|c| &c.cell).collect();
            if first_set != set.iter().collect() {
                return Err(self.syntax(toks[0].col, format!("the same cells as class `{}`", first.label)));
            }
        }
        self.classes.push(block);
        Ok(())
    }

    fn plane_line(&mut self, toks: &[Token<'_>]) -> Result<(), ParseError> {
        self.set_kind(Kind::Composition, toks[0].col)?;
        if self.plane.is_some() {
            return Err(ParseError::DuplicateDeclaration { line: self.line, col: toks[0].col, name: "PLANE".into() });
        }
        let fs = self.features(toks[0].col)?.clone();
        let mut axes = Vec::new();
        for (k, what) in [(1, "x-axis value"), (2, "y-axis value")] {
            let t = self.expect(toks, k, what)?;
            if fs.value_index(t.text).is_none() {
                return Err(ParseError::UndeclaredName { line: self.line, col: t.col, kind: "feature value", name: t.text.into() });
            }
            axes.push(t);
        }
        if axes[0].text == axes[1].text {
            return Err(self.syntax(axes[1].col, "a y-axis value different from the x-axis value"));
        }
        self.expect_end(toks, 3)?;
        self.plane = Some(Plane { x: axes[0].text.into(), y: axes[1].text.into() });
        Ok(())
    }

    fn entry_line(&mut self, toks: &[Token<'_>], stem: bool) -> Result<(), ParseError> {
        self.set_kind(Kind::Composition, toks[0].col)?;
        if self.first_composition_line == 0 {
            self.first_composition_line = self.line;
        }
        let label_tok = self.expect(toks, 1, if stem { "stem label" } else { "affix label" })?;
        let label = if stem { label_tok.text.to_string() } else { null_to_label(label_tok.text) };
        let list = if stem { &self.stems } else { &self.affixes };
        if list.iter().any(|(l, _)| *l == label) {
            return Err(ParseError::DuplicateDeclaration { line: self.line, col: label_tok.col, name: label });
        }
        let angle = match toks.get(2) {
            None => None,
            Some(at) if at.text == "@" => {
                let v = self.expect(toks, 3, "an angle in radians")?;
                let a = v.text.parse::<f64>().ok().filter(|a| a.is_finite());
                self.expect_end(toks, 4)?;
                Some(a.ok_or_else(|| self.syntax(v.col, "an angle in radians"))?)
            }
            Some(t) => return Err(self.syntax(t.col, "`@` or end of line")),
        };
        if stem {
            self.stems.push((label, angle));
        } else {
            self.affixes.push((label, angle));
        }
        Ok(())
    }

    fn form_line(&mut self, toks: &[Token<'_>]) -> Result<(), ParseError> {
        self.set_kind(Kind::Composition, toks[0].col)?;
        if self.first_composition_line == 0 {
            self.first_composition_line = self.line;
        }
        let stem = self.expect(toks, 1, "stem label")?;
        if !self.stems.iter().any(|(l, _)| l == stem.text) {
            return Err(ParseError::UndeclaredName { line: self.line, col: stem.col, kind: "stem", name: stem.text.into() });
        }
        let Some(plane) = self.plane.clone() else {
            return Err(self.syntax(toks[0].col, "a PLANE declaration before FORM lines"));
        };
        let cell = self.cell_values(toks, 2)?;
        let fs = self.features.as_ref().expect("built");
        let on_x = cell.contains(fs.value_index(&plane.x).expect("declared"));
        let on_y = cell.contains(fs.value_index(&plane.y).expect("declared"));
        if on_x == on_y {
            return Err(self.syntax(toks[2].col, "a cell containing exactly one plane value"));
        }
        let n = fs.num_features();
        let target = self.arrow_target(toks, 2 + n)?;
        let affix = null_to_label(target.text);
        if !self.affixes.iter().any(|(l, _)| *l == affix) {
            return Err(ParseError::UndeclaredName { line: self.line, col: target.col, kind: "affix", name: affix });
        }
        self.forms.push(FormLine { stem: stem.text.into(), cell, affix });
        Ok(())
    }

    fn line(&mut self, toks: &[Token<'_>]) -> Result<(), ParseError> {
        let head = toks[0];
        if self.open_class.is_some() && !matches!(head.text, "CELL" | "END") {
            return Err(self.syntax(head.col, "CELL or END inside a class block"));
        }
        match head.text {
            "FEATURE" => self.feature_line(toks),
            "MORPHEMES" | "MORPHEMES:" => self.morphemes_line(toks),
            "CELL" => self.cell_line(toks),
            "CLASS" => self.class_line(toks),
            "END" => self.end_line(toks),
            "PLANE" => self.plane_line(toks),
            "STEM" => self.entry_line(toks, true),
            "AFFIX" => self.entry_line(toks, false),
            "FORM" => self.form_line(toks),
            _ => Err(self.syntax(head.col, "FEATURE, MORPHEMES, CELL, CLASS, END, PLANE, STEM, AFFIX or FORM")),
        }
    }

    fn finish(mut self) -> Result<ParadigmFile, ParseError> {
        if self.open_class.is_some() {
            return Err(self.syntax(1, "END to close the class block"));
        }
        let Some(kind) = self.kind else {
            return Err(self.syntax(1, "CELL lines, CLASS blocks or a composition section"));
        };
        let features = self.features(1)?.clone();
        let body = match kind {
            Kind::Paradigm => Body::Paradigm(self.cells),
            Kind::Classes => Body::Classes(self.classes),
            Kind::Composition => {
                let Some(plane) = self.plane.take() else {
                    self.line = self.first_composition_line;
                    return Err(self.syntax(1, "a PLANE declaration"));
                };
                if self.stems.is_empty() || self.affixes.is_empty() {
                    return Err(self.syntax(1, "at least one STEM and one AFFIX"));
                }
                Body::Composition(CompositionBlock { plane, stems: self.stems, affixes: self.affixes, forms: self.forms })
            }
        };
        Ok(ParadigmFile { features, morphemes: self.morphemes.unwrap_or_default(), body })
    }
}

pub fn parse_str(src: &str) -> Result<ParadigmFile, ParseError> {
    let mut p = Parser {
        line: 0,
        line_len: 0,
        feature_decls: Vec::new(),
        features: None,
        morphemes: None,
        kind: None,
        cells: Vec::new(),
        classes: Vec::new(),
        open_class: None,
        plane: None,
        stems: Vec::new(),
        affixes: Vec::new(),
        forms: Vec::new(),
        first_composition_line: 0,
        cell_set: HashSet::new(),
    };
    let mut last = 0;
    for (n, raw) in src.lines().enumerate() {
        p.line = n + 1;
        last = n + 1;
        p.line_len = raw.split('#').next().unwrap_or("").chars().count();
        let toks = tokenize(raw);
        if toks.is_empty() {
            continue;
        }
        p.line(&toks)?;
    }
    p.line = last.max(1);
    p.line_len = 0;
    p.finish()
}

fn write_cell(f: &mut fmt::Formatter<'_>, fs: &FeatureSystem, cell: &ParadigmCell) -> fmt::Result {
    for &i in cell.coords() {
        write!(f, " {}", fs.value_name(i))?;
    }
    Ok(())
}

impl fmt::Display for ParadigmFile {
    /// Canonical text; parsing it yields an equal value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for feature in self.features.features() {
            writeln!(f, "FEATURE {}: {}", feature.name, feature.values.join(" "))?;
        }
        if !self.morphemes.is_empty() {
            let list: Vec<&str> = self.morphemes.iter().map(|m| label_to_token(m)).collect();
            writeln!(f, "MORPHEMES: {}", list.join(" "))?;
        }
        let cells = |f: &mut fmt::Formatter<'_>, lines: &[CellLine]| -> fmt::Result {
            for c in lines {
                write!(f, "CELL")?;
                write_cell(f, &self.features, &c.cell)?;
                writeln!(f, " -> {}", label_to_token(&c.morpheme))?;
            }
            Ok(())
        };
        match &self.body {
            Body::Paradigm(lines) => cells(f, lines)?,
            Body::Classes(blocks) => {
                for b in blocks {
                    writeln!(f, "CLASS {} LEXEMES {}", b.label, b.lexemes)?;
                    cells(f, &b.cells)?;
                    writeln!(f, "END")?;
                }
            }
            Body::Composition(c) => {
                writeln!(f, "PLANE {} {}", c.plane.x, c.plane.y)?;
                for (kw, list) in [("STEM", &c.stems), ("AFFIX", &c.affixes)] {
                    for (label, angle) in list {
                        match angle {
                            Some(a) => writeln!(f, "{kw} {} @ {a:?}", label_to_token(label))?,
                            None => writeln!(f, "{kw} {}", label_to_token(label))?,
                        }
                    }
                }
                for form in &c.forms {
                    write!(f, "FORM {}", form.stem)?;
                    write_cell(f, &self.features, &form.cell)?;
                    writeln!(f, " -> {}", label_to_token(&form.affix))?;
                }
            }
        }
        Ok(())
    }
}

fn gold_for(
    fs: &FeatureSystem,
    morphemes: &[String],
    cells: &[ParadigmCell],
    lines: &[CellLine],
) -> Result<(PhiMatrix, TotalParadigmMatrix), ContentError> {
    let phi = build_phi(fs, cells)?;
    let labels: Vec<&str> = cells
        .iter()
        .map(|c| lines.iter().find(|l| &l.cell == c).map(|l| l.morpheme.as_str()).expect("same cell set"))
        .collect();
    let gold = TotalParadigmMatrix::from_labels(phi.labels().to_vec(), morphemes.to_vec(), &labels)?;
    Ok((phi, gold))
}

impl ParadigmFile {
    /// Φ and the gold matrix of a single-paradigm file, rows in file order.
    pub fn paradigm(&self) -> Result<(PhiMatrix, TotalParadigmMatrix), ContentError> {
        let Body::Paradigm(lines) = &self.body else {
            return Err(ContentError::WrongKind { wanted: "a paradigm", found: self.body.kind() });
        };
        let cells: Vec<ParadigmCell> = lines.iter().map(|l| l.cell.clone()).collect();
        gold_for(&self.features, &self.morphemes, &cells, lines)
    }

    /// All class blocks over a shared Φ whose rows follow the first block.
    pub fn class_inventory(&self) -> Result<ClassInventory, ContentError> {
        let Body::Classes(blocks) = &self.body else {
            return Err(ContentError::WrongKind { wanted: "class blocks", found: self.body.kind() });
        };
        let cells: Vec<ParadigmCell> = blocks[0].cells.iter().map(|l| l.cell.clone()).collect();
        let mut phi = None;
        let mut classes = Vec::new();
        for b in blocks {
            let (p, gold) = gold_for(&self.features, &self.morphemes, &cells, &b.cells)?;
            phi.get_or_insert(p);
            classes.push(InflectionClass { label: b.label.clone(), lexemes: b.lexemes, gold });
        }
        Ok(ClassInventory { phi: phi.expect("at least one block"), morphemes: self.morphemes.clone(), classes })
    }

    fn composition(&self) -> Result<&CompositionBlock, ContentError> {
        match &self.body {
            Body::Composition(c) => Ok(c),
            other => Err(ContentError::WrongKind { wanted: "a composition section", found: other.kind() }),
        }
    }

    /// Gold forms as targets on the plane axes.
    pub fn angle_data(&self) -> Result<AngleData, ContentError> {
        let c = self.composition()?;
        let x = self.features.value_index(&c.plane.x).expect("declared");
        let forms = c
            .forms
            .iter()
            .map(|f| AngleForm {
                stem: f.stem.clone(),
                target: if f.cell.contains(x) { Axis::X } else { Axis::Y },
                affix: f.affix.clone(),
            })
            .collect();
        Ok(AngleData {
            plane: c.plane.clone(),
            stems: c.stems.iter().map(|s| s.0.clone()).collect(),
            affixes: c.affixes.iter().map(|s| s.0.clone()).collect(),
            forms,
        })
    }

    /// True when every stem and affix carries an angle.
    pub fn has_angles(&self) -> bool {
        self.composition().is_ok_and(|c| c.stems.iter().chain(&c.affixes).all(|e| e.1.is_some()))
    }

    /// The fixed model given by the file's angles.
    pub fn angle_model(&self) -> Result<AngleModel, ContentError> {
        let c = self.composition()?;
        let fixed = |v: &[(String, Option<f64>)]| {
            v.iter()
                .map(|(l, a)| a.map(|a| (l.clone(), a)).ok_or_else(|| CompositionError::MissingAngle(l.clone())))
                .collect::<Result<Vec<_>, _>>()
        };
        Ok(AngleModel::new(c.plane.clone(), fixed(&c.stems)?, fixed(&c.affixes)?))
    }

    /// Cell label of each FORM line, for reports.
    pub fn form_labels(&self) -> Vec<String> {
        match &self.body {
            Body::Composition(c) => c.forms.iter().map(|f| format!("{}+{}", f.stem, self.features.cell_label(&f.cell))).collect(),
            _ => Vec::new(),
        }
    }
}
