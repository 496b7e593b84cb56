//! DOT rendering. Automata keep enough in graph attributes to be read back.

use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::{anyhow, bail, Context, Result};

use crate::doc::{AutomatonDoc, GraphDoc};

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn graph(g: &GraphDoc) -> String {
    let mut out = String::from("digraph g {\n");
    for v in &g.vertices {
        writeln!(out, "  {};", quote(v)).unwrap();
    }
    for (id, s, t) in &g.edges {
        writeln!(out, "  {} -> {} [label={}];", quote(s), quote(t), quote(id)).unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn automaton(g: &GraphDoc, a: &AutomatonDoc) -> String {
    let mut out = String::from("digraph automaton {\n");
    let alphabet = serde_json::to_string(g).expect("graphs serialise");
    writeln!(out, "  graph [alphabet={}, empty={}];", quote(&alphabet), quote(&a.empty.join(","))).unwrap();
    for (k, label) in a.states.iter().enumerate() {
        let k = k as u32;
        let mut attrs = format!("label={}", quote(label));
        if a.start.contains(&k) {
            attrs.push_str(", start=true, shape=box");
        }
        if a.terminal.contains(&k) {
            attrs.push_str(", terminal=true, peripheries=2");
        }
        writeln!(out, "  s{k} [{attrs}];").unwrap();
    }
    for (s, l, t) in &a.transitions {
        writeln!(out, "  s{s} -> s{t} [label={}];", quote(l)).unwrap();
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, PartialEq)]
enum Token {
    Word(String),
    Arrow,
    Punct(char),
}

fn tokens(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '"' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some('n') => s.push('\n'),
                            Some(c) => s.push(c),
                            None => bail!("unterminated string"),
                        },
                        Some(c) => s.push(c),
                        None => bail!("unterminated string"),
                    }
                }
                out.push(Token::Word(s));
            }
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                out.push(Token::Arrow);
            }
            '{' | '}' | '[' | ']' | '=' | ',' | ';' => out.push(Token::Punct(c)),
            c if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' => {
                let mut s = String::from(c);
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '.' {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token::Word(s));
            }
            c => bail!("unexpected character `{c}`"),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.at)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.at).map(|t| match t {
            Token::Word(w) => Token::Word(w.clone()),
            Token::Arrow => Token::Arrow,
            Token::Punct(c) => Token::Punct(*c),
        });
        self.at += 1;
        t
    }

    fn word(&mut self) -> Result<String> {
        match self.next() {
            Some(Token::Word(w)) => Ok(w),
            t => bail!("expected a name, found {t:?}"),
        }
    }

    fn punct(&mut self, c: char) -> Result<()> {
        match self.next() {
            Some(Token::Punct(d)) if d == c => Ok(()),
            t => bail!("expected `{c}`, found {t:?}"),
        }
    }

    fn attrs(&mut self) -> Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        if self.peek() != Some(&Token::Punct('[')) {
            return Ok(out);
        }
        self.next();
        loop {
            if self.peek() == Some(&Token::Punct(']')) {
                self.next();
                return Ok(out);
            }
            let k = self.word()?;
            self.punct('=')?;
            let v = self.word()?;
            out.insert(k, v);
            if self.peek() == Some(&Token::Punct(',')) {
                self.next();
            }
        }
    }
}

fn state_index(name: &str) -> Result<u32> {
    name.strip_prefix('s')
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| anyhow!("state names must be `s<number>`, found `{name}`"))
}

/// Reads back the output of [`automaton`].
pub fn parse_automaton(text: &str) -> Result<(GraphDoc, AutomatonDoc)> {
    let mut p = Parser {
        toks: tokens(text)?,
        at: 0,
    };
    if p.word()? != "digraph" {
        bail!("expected `digraph`");
    }
    if let Some(Token::Word(_)) = p.peek() {
        p.next();
    }
    p.punct('{')?;
    let mut graph_attrs = BTreeMap::new();
    let mut states: BTreeMap<u32, BTreeMap<String, String>> = BTreeMap::new();
    let mut transitions = Vec::new();
    loop {
        match p.next() {
            Some(Token::Punct('}')) => break,
            Some(Token::Punct(';')) => {}
            Some(Token::Word(w)) if w == "graph" => graph_attrs.extend(p.attrs()?),
            Some(Token::Word(w)) => {
                let s = state_index(&w)?;
                if p.peek() == Some(&Token::Arrow) {
                    p.next();
                    let t = state_index(&p.word()?)?;
                    let a = p.attrs()?;
                    let l = a.get("label").ok_or_else(|| anyhow!("transition without a label"))?;
                    transitions.push((s, l.clone(), t));
                } else {
                    states.insert(s, p.attrs()?);
                }
            }
            t => bail!("unexpected {t:?}"),
        }
    }
    let alphabet = graph_attrs.get("alphabet").ok_or_else(|| anyhow!("no alphabet attribute"))?;
    let g: GraphDoc = serde_json::from_str(alphabet).context("alphabet attribute")?;
    let n = states.len() as u32;
    if states.keys().copied().ne(0..n) {
        bail!("states must be numbered from s0 without gaps");
    }
    let flag = |a: &BTreeMap<String, String>, k: &str| a.get(k).is_some_and(|v| v == "true");
    let empty = match graph_attrs.get("empty").map(String::as_str) {
        None | Some("") => Vec::new(),
        Some(e) => e.split(',').map(String::from).collect(),
    };
    let a = AutomatonDoc {
        states: states
            .values()
            .map(|a| a.get("label").cloned().ok_or_else(|| anyhow!("state without a label")))
            .collect::<Result<_>>()?,
        transitions,
        start: states.iter().filter(|(_, a)| flag(a, "start")).map(|(k, _)| *k).collect(),
        terminal: states.iter().filter(|(_, a)| flag(a, "terminal")).map(|(k, _)| *k).collect(),
        empty,
    };
    Ok((g, a))
}
