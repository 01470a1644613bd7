//! Parser for the supported query subset: prefix declarations, SELECT with
//! plain variables and COUNT aggregates, blocks of quad patterns (inline
//! four-term form or GRAPH clauses), and GROUP BY.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::algebra::{
    Aggregate, AlgebraNode, CountArg, GraphTerm, Projection, QuadPatternNode, TermOrVar,
};
use crate::term::{unescape_string, Term};

/// Expanded form of the reserved metadata graph IRI. Quad patterns whose
/// graph equals it are answered from the metadata relation.
pub const DEFAULT_METADATA_GRAPH_IRI: &str = "ng:Metadata";

const RDF_TYPE_IRI: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unsupported feature at {line}:{col}: {construct}")]
    Unsupported { construct: String, line: usize, col: usize },
    #[error("undefined prefix '{prefix}:' at {line}:{col}")]
    UndefinedPrefix { prefix: String, line: usize, col: usize },
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Absolute IRI treated as the reserved metadata graph.
    pub metadata_graph_iri: String,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { metadata_graph_iri: DEFAULT_METADATA_GRAPH_IRI.to_string() }
    }
}

/// Parses query text with default options.
pub fn parse(text: &str) -> Result<AlgebraNode, FrontendError> {
    parse_with_options(text, &ParseOptions::default())
}

pub fn parse_with_options(
    text: &str,
    options: &ParseOptions,
) -> Result<AlgebraNode, FrontendError> {
    let tokens = lex(text)?;
    Parser::new(tokens, options).parse_query()
}

/// Replaces every prefixed name outside a PREFIX declaration with its
/// absolute IRI. Text without prefixed names comes back unchanged, so the
/// operation is idempotent.
pub fn expand_prefixes(text: &str) -> Result<String, FrontendError> {
    let tokens = lex(text)?;
    let mut prefixes: HashMap<String, String> = HashMap::new();
    let mut edits: Vec<(usize, usize, String)> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        match &tokens[i].kind {
            TokKind::Word(w) if w.eq_ignore_ascii_case("PREFIX") => {
                if let (Some(ns), Some(iri)) = (tokens.get(i + 1), tokens.get(i + 2)) {
                    if let (TokKind::PName { prefix, local }, TokKind::Iri(value)) =
                        (&ns.kind, &iri.kind)
                    {
                        if local.is_empty() {
                            prefixes.insert(prefix.clone(), value.clone());
                            i += 3;
                            continue;
                        }
                    }
                }
                i += 1;
            }
            TokKind::PName { prefix, local } => {
                let tok = &tokens[i];
                let ns = prefixes.get(prefix).ok_or_else(|| FrontendError::UndefinedPrefix {
                    prefix: prefix.clone(),
                    line: tok.line,
                    col: tok.col,
                })?;
                edits.push((tok.start, tok.end, format!("<{ns}{local}>")));
                i += 1;
            }
            _ => i += 1,
        }
    }
    let mut out = text.to_string();
    for (start, end, replacement) in edits.into_iter().rev() {
        out.replace_range(start..end, &replacement);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokKind {
    Iri(String),
    PName { prefix: String, local: String },
    Var(String),
    Literal { value: String, lang: Option<String> },
    Blank(String),
    HatHat,
    Word(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Star,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    line: usize,
    col: usize,
    start: usize,
    end: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> FrontendError {
    FrontendError::Syntax { line, col, message: message.into() }
}

fn unsupported(line: usize, col: usize, construct: impl Into<String>) -> FrontendError {
    FrontendError::Unsupported { construct: construct.into(), line, col }
}

struct Lexer<'a> {
    text: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, FrontendError> {
    let mut lexer =
        Lexer { text, chars: text.char_indices().peekable(), line: 1, col: 1 };
    let mut tokens = Vec::new();
    while let Some(token) = lexer.next_token()? {
        tokens.push(token);
    }
    Ok(tokens)
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, c)) = next {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        next
    }

    fn peek_char(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map(|&(i, _)| i).unwrap_or(self.text.len())
    }

    fn next_token(&mut self) -> Result<Option<Token>, FrontendError> {
        loop {
            match self.peek_char() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek_char() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
        let (line, col) = (self.line, self.col);
        let start = self.offset();
        let Some(c) = self.peek_char() else { return Ok(None) };
        let token = |kind, this: &mut Self| {
            let end = this.offset();
            Ok(Some(Token { kind, line, col, start, end }))
        };
        match c {
            '<' => {
                self.bump();
                let mut raw = String::new();
                loop {
                    match self.bump() {
                        Some((_, '>')) => break,
                        Some((_, '\n')) | None => {
                            return Err(syntax(line, col, "unterminated IRI"))
                        }
                        Some((_, c)) => raw.push(c),
                    }
                }
                if raw.is_empty() {
                    return Err(syntax(line, col, "empty IRI"));
                }
                let value = unescape_string(&raw).map_err(|e| syntax(line, col, e))?;
                token(TokKind::Iri(value), self)
            }
            '?' | '$' => {
                self.bump();
                let name = self.scan_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err(syntax(line, col, "expected variable name after sigil"));
                }
                token(TokKind::Var(name), self)
            }
            '"' => {
                self.bump();
                let mut raw = String::new();
                let mut escaped = false;
                loop {
                    match self.bump() {
                        None => return Err(syntax(line, col, "unterminated string literal")),
                        Some((_, c)) if escaped => {
                            raw.push(c);
                            escaped = false;
                        }
                        Some((_, '\\')) => {
                            raw.push('\\');
                            escaped = true;
                        }
                        Some((_, '"')) => break,
                        Some((_, c)) => raw.push(c),
                    }
                }
                let value = unescape_string(&raw).map_err(|e| syntax(line, col, e))?;
                let lang = if self.peek_char() == Some('@') {
                    self.bump();
                    let tag = self.scan_while(|c| c.is_ascii_alphanumeric() || c == '-');
                    if tag.is_empty() {
                        return Err(syntax(line, col, "empty language tag"));
                    }
                    Some(tag)
                } else {
                    None
                };
                token(TokKind::Literal { value, lang }, self)
            }
            '^' => {
                self.bump();
                if self.peek_char() == Some('^') {
                    self.bump();
                    token(TokKind::HatHat, self)
                } else {
                    Err(unsupported(line, col, "property paths"))
                }
            }
            '{' => {
                self.bump();
                token(TokKind::LBrace, self)
            }
            '}' => {
                self.bump();
                token(TokKind::RBrace, self)
            }
            '(' => {
                self.bump();
                token(TokKind::LParen, self)
            }
            ')' => {
                self.bump();
                token(TokKind::RParen, self)
            }
            '.' => {
                self.bump();
                token(TokKind::Dot, self)
            }
            '*' => {
                self.bump();
                token(TokKind::Star, self)
            }
            '/' | '|' | '+' => Err(unsupported(line, col, "property paths")),
            ';' => Err(unsupported(line, col, "predicate-object list shorthand")),
            ',' => Err(unsupported(line, col, "object list shorthand")),
            '0'..='9' | '-' => Err(unsupported(line, col, "numeric literals")),
            '_' => {
                self.bump();
                if self.peek_char() != Some(':') {
                    return Err(syntax(line, col, "expected ':' after '_'"));
                }
                self.bump();
                let label = self.scan_while(|c| c.is_alphanumeric() || c == '_' || c == '-');
                if label.is_empty() {
                    return Err(syntax(line, col, "empty blank node label"));
                }
                token(TokKind::Blank(label), self)
            }
            ':' => {
                self.bump();
                let local = self.scan_local();
                token(TokKind::PName { prefix: String::new(), local }, self)
            }
            c if c.is_alphabetic() => {
                let word = self.scan_while(|c| c.is_alphanumeric() || c == '_' || c == '-');
                if self.peek_char() == Some(':') {
                    self.bump();
                    let local = self.scan_local();
                    token(TokKind::PName { prefix: word, local }, self)
                } else {
                    token(TokKind::Word(word), self)
                }
            }
            other => Err(syntax(line, col, format!("unexpected character '{other}'"))),
        }
    }

    fn scan_while(&mut self, keep: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek_char() {
            if !keep(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
        out
    }

    /// Local part of a prefixed name. A trailing '.' belongs to the
    /// enclosing pattern, not the name, so it is left unconsumed.
    fn scan_local(&mut self) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek_char() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                out.push(c);
                self.bump();
            } else if c == '.' {
                // only keep the dot when another name character follows
                let mut lookahead = self.chars.clone();
                lookahead.next();
                match lookahead.peek().map(|&(_, c)| c) {
                    Some(next) if next.is_alphanumeric() || next == '_' || next == '-' => {
                        out.push('.');
                        self.bump();
                    }
                    _ => break,
                }
            } else {
                break;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Position {
    Subject,
    Predicate,
    Object,
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    prefixes: HashMap<String, String>,
    options: &'a ParseOptions,
    user_vars: HashSet<String>,
    fresh_counter: usize,
}

impl<'a> Parser<'a> {
    fn new(tokens: Vec<Token>, options: &'a ParseOptions) -> Self {
        let user_vars = tokens
            .iter()
            .filter_map(|t| match &t.kind {
                TokKind::Var(name) => Some(name.clone()),
                _ => None,
            })
            .collect();
        Parser { tokens, pos: 0, prefixes: HashMap::new(), options, user_vars, fresh_counter: 0 }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.pos).cloned();
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token { kind: TokKind::Word(w), .. }) if w.eq_ignore_ascii_case(word))
    }

    fn last_position(&self) -> (usize, usize) {
        self.tokens.last().map(|t| (t.line, t.col)).unwrap_or((1, 1))
    }

    fn err_here(&self, message: impl Into<String>) -> FrontendError {
        match self.peek() {
            Some(t) => syntax(t.line, t.col, message),
            None => {
                let (line, col) = self.last_position();
                syntax(line, col, format!("{} (unexpected end of query)", message.into()))
            }
        }
    }

    fn fresh_graph_var(&mut self) -> String {
        loop {
            let candidate = format!("_g{}", self.fresh_counter);
            self.fresh_counter += 1;
            if !self.user_vars.contains(&candidate) {
                return candidate;
            }
        }
    }

    fn parse_query(mut self) -> Result<AlgebraNode, FrontendError> {
        self.parse_prologue()?;
        if self.peek().is_none() {
            return Err(self.err_here("empty query"));
        }
        let node = if self.at_word("SELECT") { self.parse_select()? } else { self.parse_bare()? };
        if let Some(token) = self.peek() {
            if let TokKind::Word(w) = &token.kind {
                let upper = w.to_ascii_uppercase();
                if matches!(upper.as_str(), "ORDER" | "LIMIT" | "OFFSET" | "HAVING" | "VALUES") {
                    let construct = if upper == "ORDER" { "ORDER BY".into() } else { upper };
                    return Err(unsupported(token.line, token.col, construct));
                }
            }
            return Err(self.err_here("unexpected trailing content"));
        }
        Ok(node)
    }

    fn parse_prologue(&mut self) -> Result<(), FrontendError> {
        loop {
            if self.at_word("BASE") {
                let t = self.peek().unwrap();
                return Err(unsupported(t.line, t.col, "BASE"));
            }
            if !self.at_word("PREFIX") {
                return Ok(());
            }
            self.bump();
            let ns = self.bump().ok_or_else(|| self.err_here("expected prefix name"))?;
            let TokKind::PName { prefix, local } = &ns.kind else {
                return Err(syntax(ns.line, ns.col, "expected prefix name like 'ex:'"));
            };
            if !local.is_empty() {
                return Err(syntax(ns.line, ns.col, "prefix declaration must end with ':'"));
            }
            let iri = self.bump().ok_or_else(|| self.err_here("expected IRI"))?;
            let TokKind::Iri(value) = &iri.kind else {
                return Err(syntax(iri.line, iri.col, "expected IRI after prefix name"));
            };
            self.prefixes.insert(prefix.clone(), value.clone());
        }
    }

    fn parse_select(&mut self) -> Result<AlgebraNode, FrontendError> {
        self.bump(); // SELECT
        let mut all = false;
        let mut items: Vec<String> = Vec::new();
        let mut aggregates: Vec<Aggregate> = Vec::new();
        loop {
            match self.peek().map(|t| t.kind.clone()) {
                Some(TokKind::Star) => {
                    self.bump();
                    all = true;
                }
                Some(TokKind::Var(name)) => {
                    self.bump();
                    items.push(name);
                }
                Some(TokKind::LParen) => {
                    let (aggregate, alias) = self.parse_aggregate()?;
                    items.push(alias.clone());
                    aggregates.push(aggregate);
                }
                Some(TokKind::Word(w)) if w.eq_ignore_ascii_case("DISTINCT") || w.eq_ignore_ascii_case("REDUCED") => {
                    let t = self.peek().unwrap();
                    return Err(unsupported(t.line, t.col, w.to_ascii_uppercase()));
                }
                _ => break,
            }
        }
        if all && !items.is_empty() {
            return Err(self.err_here("SELECT * cannot be combined with other items"));
        }
        if !all && items.is_empty() {
            return Err(self.err_here("SELECT needs '*' or at least one item"));
        }

        if self.at_word("WHERE") {
            self.bump();
        }
        match self.peek().map(|t| &t.kind) {
            Some(TokKind::LBrace) => {
                self.bump();
            }
            _ => return Err(self.err_here("expected '{'")),
        }
        let patterns = self.parse_patterns(true)?;
        match self.bump().map(|t| t.kind) {
            Some(TokKind::RBrace) => {}
            _ => return Err(self.err_here("expected '}'")),
        }

        let mut keys = Vec::new();
        if self.at_word("GROUP") {
            self.bump();
            if !self.at_word("BY") {
                return Err(self.err_here("expected BY after GROUP"));
            }
            self.bump();
            while let Some(TokKind::Var(name)) = self.peek().map(|t| t.kind.clone()) {
                self.bump();
                keys.push(name);
            }
            if keys.is_empty() {
                return Err(self.err_here("GROUP BY needs at least one variable"));
            }
        }

        let mut tree = self.fold_patterns(patterns)?;
        if !keys.is_empty() || !aggregates.is_empty() {
            let pattern_vars = tree.scope_variables();
            for aggregate in &aggregates {
                if pattern_vars.contains(&aggregate.alias)
                    || aggregates.iter().filter(|a| a.alias == aggregate.alias).count() > 1
                {
                    let (line, col) = self.last_position();
                    return Err(syntax(
                        line,
                        col,
                        format!("aggregate alias '?{}' must be a fresh name", aggregate.alias),
                    ));
                }
            }
            tree = AlgebraNode::Group { sub: Box::new(tree), keys, aggregates };
        }
        let projection = if all { Projection::All } else { Projection::Vars(items) };
        Ok(AlgebraNode::Project { sub: Box::new(tree), projection })
    }

    fn parse_aggregate(&mut self) -> Result<(Aggregate, String), FrontendError> {
        self.bump(); // (
        let func = self.bump().ok_or_else(|| self.err_here("expected aggregate"))?;
        let TokKind::Word(name) = &func.kind else {
            return Err(syntax(func.line, func.col, "expected aggregate function"));
        };
        let upper = name.to_ascii_uppercase();
        if upper != "COUNT" {
            if matches!(upper.as_str(), "SUM" | "MIN" | "MAX" | "AVG" | "SAMPLE" | "GROUP_CONCAT")
            {
                return Err(unsupported(func.line, func.col, format!("{upper} aggregate")));
            }
            return Err(syntax(func.line, func.col, format!("unknown aggregate '{name}'")));
        }
        if !matches!(self.bump().map(|t| t.kind), Some(TokKind::LParen)) {
            return Err(self.err_here("expected '(' after COUNT"));
        }
        let arg = match self.bump().map(|t| t.kind) {
            Some(TokKind::Var(name)) => CountArg::Var(name),
            Some(TokKind::Star) => CountArg::Star,
            _ => return Err(self.err_here("expected variable or '*' in COUNT")),
        };
        if !matches!(self.bump().map(|t| t.kind), Some(TokKind::RParen)) {
            return Err(self.err_here("expected ')'"));
        }
        if !self.at_word("AS") {
            return Err(self.err_here("expected AS"));
        }
        self.bump();
        let alias = match self.bump().map(|t| t.kind) {
            Some(TokKind::Var(name)) => name,
            _ => return Err(self.err_here("expected alias variable after AS")),
        };
        if !matches!(self.bump().map(|t| t.kind), Some(TokKind::RParen)) {
            return Err(self.err_here("expected ')' closing the aggregate"));
        }
        Ok((Aggregate { alias: alias.clone(), arg }, alias))
    }

    fn parse_bare(&mut self) -> Result<AlgebraNode, FrontendError> {
        let patterns = self.parse_patterns(false)?;
        self.fold_patterns(patterns)
    }

    fn parse_patterns(
        &mut self,
        in_braces: bool,
    ) -> Result<Vec<QuadPatternNode>, FrontendError> {
        let mut patterns = Vec::new();
        loop {
            match self.peek() {
                None => {
                    if in_braces {
                        return Err(self.err_here("unclosed '{'"));
                    }
                    break;
                }
                Some(Token { kind: TokKind::RBrace, .. }) if in_braces => break,
                Some(Token { kind: TokKind::Word(w), line, col, .. }) => {
                    let upper = w.to_ascii_uppercase();
                    match upper.as_str() {
                        "GRAPH" => {
                            let graph_patterns = self.parse_graph_clause()?;
                            patterns.extend(graph_patterns);
                        }
                        "FILTER" | "OPTIONAL" | "UNION" | "MINUS" | "SERVICE" | "BIND"
                        | "VALUES" | "EXISTS" => {
                            return Err(unsupported(*line, *col, upper));
                        }
                        _ => patterns.push(self.parse_quad_pattern()?),
                    }
                }
                _ => patterns.push(self.parse_quad_pattern()?),
            }
        }
        if patterns.is_empty() {
            return Err(self.err_here("expected at least one quad pattern"));
        }
        Ok(patterns)
    }

    fn parse_graph_clause(&mut self) -> Result<Vec<QuadPatternNode>, FrontendError> {
        self.bump(); // GRAPH
        let graph = self.parse_graph_term()?;
        if !matches!(self.bump().map(|t| t.kind), Some(TokKind::LBrace)) {
            return Err(self.err_here("expected '{' after GRAPH term"));
        }
        let mut patterns = Vec::new();
        loop {
            match self.peek().map(|t| &t.kind) {
                Some(TokKind::RBrace) => {
                    self.bump();
                    break;
                }
                None => return Err(self.err_here("unclosed GRAPH block")),
                _ => {
                    let s = self.parse_term(Position::Subject)?;
                    let p = self.parse_term(Position::Predicate)?;
                    let o = self.parse_term(Position::Object)?;
                    self.consume_pattern_dot()?;
                    patterns.push(QuadPatternNode { s, p, o, g: graph.clone() });
                }
            }
        }
        if patterns.is_empty() {
            return Err(self.err_here("empty GRAPH block"));
        }
        Ok(patterns)
    }

    fn parse_quad_pattern(&mut self) -> Result<QuadPatternNode, FrontendError> {
        let s = self.parse_term(Position::Subject)?;
        let p = self.parse_term(Position::Predicate)?;
        let o = self.parse_term(Position::Object)?;
        let g = match self.peek().map(|t| &t.kind) {
            // a keyword (GRAPH, FILTER, ...) begins the next element
            Some(TokKind::Dot) | Some(TokKind::RBrace) | Some(TokKind::Word(_)) | None => {
                // bare triple: versioned data is quad-shaped, so the
                // pattern gets a fresh graph variable
                let name = self.fresh_graph_var();
                self.consume_pattern_dot()?;
                return Ok(QuadPatternNode { s, p, o, g: GraphTerm::Var(name) });
            }
            _ => self.parse_graph_term()?,
        };
        self.consume_pattern_dot()?;
        Ok(QuadPatternNode { s, p, o, g })
    }

    fn consume_pattern_dot(&mut self) -> Result<(), FrontendError> {
        match self.peek().map(|t| &t.kind) {
            Some(TokKind::Dot) => {
                self.bump();
                Ok(())
            }
            // the final dot may be omitted before a closing brace or a
            // following keyword element
            Some(TokKind::RBrace) | Some(TokKind::Word(_)) | None => Ok(()),
            _ => Err(self.err_here("expected '.' after pattern")),
        }
    }

    fn parse_graph_term(&mut self) -> Result<GraphTerm, FrontendError> {
        let token = self.bump().ok_or_else(|| self.err_here("expected graph term"))?;
        let iri = match &token.kind {
            TokKind::Var(name) => return Ok(GraphTerm::Var(name.clone())),
            TokKind::Iri(value) => value.clone(),
            TokKind::PName { prefix, local } => {
                self.resolve_pname(prefix, local, token.line, token.col)?
            }
            TokKind::Literal { .. } => {
                return Err(syntax(token.line, token.col, "graph label cannot be a literal"))
            }
            TokKind::Blank(_) => {
                return Err(unsupported(token.line, token.col, "blank node in query pattern"))
            }
            _ => return Err(syntax(token.line, token.col, "expected graph term")),
        };
        if iri == self.options.metadata_graph_iri {
            Ok(GraphTerm::Metadata)
        } else {
            Ok(GraphTerm::Iri(iri))
        }
    }

    fn parse_term(&mut self, position: Position) -> Result<TermOrVar, FrontendError> {
        let token = self.bump().ok_or_else(|| self.err_here("expected term"))?;
        match &token.kind {
            TokKind::Var(name) => Ok(TermOrVar::Var(name.clone())),
            TokKind::Iri(value) => Ok(TermOrVar::Term(Term::iri(value.clone()))),
            TokKind::PName { prefix, local } => {
                let iri = self.resolve_pname(prefix, local, token.line, token.col)?;
                Ok(TermOrVar::Term(Term::iri(iri)))
            }
            TokKind::Word(w) if w == "a" && position == Position::Predicate => {
                Ok(TermOrVar::Term(Term::iri(RDF_TYPE_IRI)))
            }
            TokKind::Literal { value, lang } => {
                if position != Position::Object {
                    return Err(syntax(
                        token.line,
                        token.col,
                        "literal allowed in object position only",
                    ));
                }
                if let Some(lang) = lang {
                    return Ok(TermOrVar::Term(Term::lang_literal(value.clone(), lang.clone())));
                }
                if matches!(self.peek().map(|t| &t.kind), Some(TokKind::HatHat)) {
                    self.bump();
                    let dt = self.bump().ok_or_else(|| self.err_here("expected datatype"))?;
                    let iri = match &dt.kind {
                        TokKind::Iri(value) => value.clone(),
                        TokKind::PName { prefix, local } => {
                            self.resolve_pname(prefix, local, dt.line, dt.col)?
                        }
                        _ => return Err(syntax(dt.line, dt.col, "expected datatype IRI")),
                    };
                    return Ok(TermOrVar::Term(Term::typed_literal(value.clone(), iri)));
                }
                Ok(TermOrVar::Term(Term::literal(value.clone())))
            }
            TokKind::Blank(_) => {
                Err(unsupported(token.line, token.col, "blank node in query pattern"))
            }
            _ => Err(syntax(token.line, token.col, "expected term")),
        }
    }

    fn resolve_pname(
        &self,
        prefix: &str,
        local: &str,
        line: usize,
        col: usize,
    ) -> Result<String, FrontendError> {
        let ns = self.prefixes.get(prefix).ok_or_else(|| FrontendError::UndefinedPrefix {
            prefix: prefix.to_string(),
            line,
            col,
        })?;
        Ok(format!("{ns}{local}"))
    }

    fn fold_patterns(
        &self,
        patterns: Vec<QuadPatternNode>,
    ) -> Result<AlgebraNode, FrontendError> {
        let mut nodes = patterns.into_iter().map(AlgebraNode::QuadPattern);
        let first = nodes.next().expect("parse_patterns rejects empty blocks");
        Ok(nodes.fold(first, |left, right| AlgebraNode::Join {
            left: Box::new(left),
            right: Box::new(right),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn var(name: &str) -> TermOrVar {
        TermOrVar::Var(name.into())
    }

    fn iri(value: &str) -> TermOrVar {
        TermOrVar::Term(Term::iri(value))
    }

    #[test]
    fn single_inline_quad_pattern() {
        let node = parse(sample::QUERY_KNOWS).unwrap();
        assert_eq!(
            node,
            AlgebraNode::QuadPattern(QuadPatternNode {
                s: var("s"),
                p: iri("ex:knows"),
                o: var("o"),
                g: GraphTerm::Var("g".into()),
            })
        );
    }

    #[test]
    fn two_patterns_become_left_deep_join() {
        let node = parse(sample::QUERY_KNOWS_LIKES).unwrap();
        let AlgebraNode::Join { left, right } = node else { panic!("expected join") };
        assert!(matches!(*left, AlgebraNode::QuadPattern(_)));
        let AlgebraNode::QuadPattern(qp) = *right else { panic!("expected pattern") };
        assert_eq!(qp.s, var("o"));
        assert_eq!(qp.p, iri("ex:likes"));
        assert_eq!(qp.g, GraphTerm::Var("g".into()));
    }

    #[test]
    fn metadata_iri_maps_to_marker() {
        let node = parse(sample::QUERY_KNOWS_VERSIONS).unwrap();
        let AlgebraNode::Join { right, .. } = node else { panic!("expected join") };
        let AlgebraNode::QuadPattern(qp) = *right else { panic!("expected pattern") };
        assert_eq!(qp.g, GraphTerm::Metadata);
        assert_eq!(qp.s, var("g"));
    }

    #[test]
    fn group_query_shape() {
        let node = parse(sample::QUERY_COUNT_KNOWS).unwrap();
        let AlgebraNode::Project { sub, projection } = node else { panic!("expected project") };
        assert_eq!(projection, Projection::Vars(vec!["o".into(), "count".into()]));
        let AlgebraNode::Group { keys, aggregates, sub } = *sub else { panic!("expected group") };
        assert_eq!(keys, vec!["o"]);
        assert_eq!(
            aggregates,
            vec![Aggregate { alias: "count".into(), arg: CountArg::Var("s".into()) }]
        );
        assert!(matches!(*sub, AlgebraNode::QuadPattern(_)));
    }

    #[test]
    fn bare_triple_gets_fresh_graph_variable() {
        let node = parse("?s ?p ?o .").unwrap();
        let AlgebraNode::QuadPattern(qp) = node else { panic!("expected pattern") };
        assert_eq!(qp.g, GraphTerm::Var("_g0".into()));

        // the fresh name dodges user variables
        let node = parse("?s ?p ?_g0 .").unwrap();
        let AlgebraNode::QuadPattern(qp) = node else { panic!("expected pattern") };
        assert_eq!(qp.g, GraphTerm::Var("_g1".into()));
    }

    #[test]
    fn graph_clause_assigns_graph_to_inner_triples() {
        let node = parse("SELECT * WHERE { GRAPH ?g { ?s ?p ?o . ?o ?q ?z } }").unwrap();
        let AlgebraNode::Project { sub, .. } = node else { panic!("expected project") };
        let AlgebraNode::Join { left, right } = *sub else { panic!("expected join") };
        for side in [*left, *right] {
            let AlgebraNode::QuadPattern(qp) = side else { panic!("expected pattern") };
            assert_eq!(qp.g, GraphTerm::Var("g".into()));
        }
    }

    #[test]
    fn prefixes_resolve_and_undefined_prefix_errors() {
        let node = parse("PREFIX ex: <http://e.org/> SELECT * WHERE { ?s ex:p ?o . }").unwrap();
        let AlgebraNode::Project { sub, .. } = node else { panic!("expected project") };
        let AlgebraNode::QuadPattern(qp) = *sub else { panic!("expected pattern") };
        assert_eq!(qp.p, iri("http://e.org/p"));

        let err = parse("SELECT * WHERE { ?s ex:p ?o . }").unwrap_err();
        assert!(matches!(err, FrontendError::UndefinedPrefix { ref prefix, .. } if prefix == "ex"));
    }

    #[test]
    fn rdf_type_shorthand() {
        let node = parse("?s a ?t ?g .").unwrap();
        let AlgebraNode::QuadPattern(qp) = node else { panic!("expected pattern") };
        assert_eq!(qp.p, iri(RDF_TYPE_IRI));
    }

    #[test]
    fn unsupported_features_are_named() {
        let cases = [
            ("SELECT * WHERE { ?s ?p ?o FILTER(?o) }", "FILTER"),
            ("SELECT * WHERE { OPTIONAL { ?s ?p ?o } }", "OPTIONAL"),
            ("SELECT * WHERE { ?s ?p ?o } ORDER BY ?s", "ORDER BY"),
            ("SELECT * WHERE { ?s ?p ?o } LIMIT", "LIMIT"),
            ("SELECT (SUM(?o) AS ?t) WHERE { ?s ?p ?o }", "SUM aggregate"),
        ];
        for (text, construct) in cases {
            match parse(text) {
                Err(FrontendError::Unsupported { construct: found, .. }) => {
                    assert_eq!(found, construct, "query: {text}")
                }
                other => panic!("expected unsupported '{construct}', got {other:?}"),
            }
        }
        assert!(matches!(
            parse("?s <ex:p>/<ex:q> ?o ?g ."),
            Err(FrontendError::Unsupported { ref construct, .. }) if construct == "property paths"
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("?s <ex:knows> ?o ?g .\n?x <oops ?y ?g .") {
            Err(FrontendError::Syntax { line, col, .. }) => {
                assert_eq!(line, 2);
                assert!(col >= 4);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn expand_prefixes_examples() {
        let text = "PREFIX ex: <http://e.org/>\n?s ex:knows ?o ?g .";
        let expanded = expand_prefixes(text).unwrap();
        assert_eq!(expanded, "PREFIX ex: <http://e.org/>\n?s <http://e.org/knows> ?o ?g .");
        // idempotent on absolute-only text
        assert_eq!(expand_prefixes(&expanded).unwrap(), expanded);

        let absolute = "?s <ex:knows> ?o ?g .";
        assert_eq!(expand_prefixes(absolute).unwrap(), absolute);

        assert!(matches!(
            expand_prefixes("?s nope:p ?o ?g ."),
            Err(FrontendError::UndefinedPrefix { ref prefix, .. }) if prefix == "nope"
        ));
    }

    #[test]
    fn canonical_text_round_trips() {
        for query in [
            sample::QUERY_KNOWS,
            sample::QUERY_KNOWS_LIKES,
            sample::QUERY_KNOWS_VERSIONS,
            sample::QUERY_COUNT_KNOWS,
            "SELECT ?s WHERE { ?s <ex:p> \"lit\"@fr <:g1> . ?s <ex:q> \"x\\n\"^^<ex:dt> ?g }",
        ] {
            let tree = parse(query).unwrap();
            let canonical = tree.to_query_text();
            let reparsed = parse(&canonical).unwrap_or_else(|e| {
                panic!("canonical text failed to reparse: {e}\n{canonical}")
            });
            assert_eq!(reparsed, tree, "canonical text:\n{canonical}");
        }
    }

    #[test]
    fn custom_metadata_graph_iri() {
        let options =
            ParseOptions { metadata_graph_iri: "http://example.org/meta".to_string() };
        let node =
            parse_with_options("?s ?p ?o <http://example.org/meta> .", &options).unwrap();
        let AlgebraNode::QuadPattern(qp) = node else { panic!("expected pattern") };
        assert_eq!(qp.g, GraphTerm::Metadata);
        // the default IRI is an ordinary graph under custom options
        let node = parse_with_options("?s ?p ?o <ng:Metadata> .", &options).unwrap();
        let AlgebraNode::QuadPattern(qp) = node else { panic!("expected pattern") };
        assert_eq!(qp.g, GraphTerm::Iri("ng:Metadata".into()));
    }
}
