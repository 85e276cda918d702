//! Line-oriented text format for tree codings.
//!
//! ```text
//! # automaton form
//! state <id> color <0|1> children [left <id>] [right <id>] [only <id>]
//! start <id>
//!
//! # explicit truncated form
//! vertex <id> level <n> color <0|1> parent <id|none> side <left|right|only>
//! end <frontier-id> isolated <bool> genus <bool>
//! ```
//!
//! Statements are separated by newlines or `;`, and `#` starts a comment.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::automaton::{ChildLabel, State, TreeAutomaton};
use crate::{Error, Result};

#[derive(Clone, Debug)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn syntax(tok: &Token<'_>, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: tok.line,
        column: tok.column,
        message: message.into(),
    }
}

/// Splits the input into statements of tokens.
fn statements(text: &str) -> Vec<Vec<Token<'_>>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut current = Vec::new();
        let mut offset = 0;
        for piece in line.split_inclusive(';') {
            let (body, ends) = match piece.strip_suffix(';') {
                Some(b) => (b, true),
                None => (piece, false),
            };
            let mut col = offset;
            for word in body.split(|c: char| c.is_whitespace()) {
                if !word.is_empty() {
                    current.push(Token {
                        text: word,
                        line: lineno + 1,
                        column: col + 1,
                    });
                }
                col += word.len() + 1;
            }
            if ends && !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            offset += piece.len();
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

struct Cursor<'t, 'a> {
    toks: &'t [Token<'a>],
    pos: usize,
}

impl<'t, 'a> Cursor<'t, 'a> {
    fn next(&mut self, what: &str) -> Result<&'t Token<'a>> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => {
                let last = self.toks.last().expect("statements are non-empty");
                Err(Error::Syntax {
                    line: last.line,
                    column: last.column + last.text.len(),
                    message: format!("expected {what}"),
                })
            }
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let t = self.next(&format!("'{kw}'"))?;
        if t.text == kw {
            Ok(())
        } else {
            Err(syntax(t, format!("expected '{kw}', found '{}'", t.text)))
        }
    }

    fn ident(&mut self) -> Result<&'t Token<'a>> {
        let t = self.next("identifier")?;
        if is_ident(t.text) {
            Ok(t)
        } else {
            Err(syntax(t, format!("invalid identifier '{}'", t.text)))
        }
    }

    fn color(&mut self) -> Result<u8> {
        let t = self.next("color")?;
        match t.text {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(syntax(t, format!("color must be 0 or 1, found '{other}'"))),
        }
    }

    fn boolean(&mut self) -> Result<bool> {
        let t = self.next("boolean")?;
        match t.text {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(syntax(t, format!("expected true or false, found '{other}'"))),
        }
    }

    fn label(&mut self) -> Result<ChildLabel> {
        let t = self.next("side label")?;
        parse_label(t).ok_or_else(|| syntax(t, format!("unknown side '{}'", t.text)))
    }

    fn done(&self) -> Result<()> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some(t) => Err(syntax(t, format!("unexpected token '{}'", t.text))),
        }
    }
}

fn parse_label(t: &Token<'_>) -> Option<ChildLabel> {
    match t.text {
        "left" => Some(ChildLabel::Left),
        "right" => Some(ChildLabel::Right),
        "only" => Some(ChildLabel::Only),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndAnnotation {
    pub isolated: bool,
    pub genus: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitVertex {
    pub name: String,
    pub level: usize,
    pub color: u8,
    pub parent: Option<String>,
    pub side: ChildLabel,
}

/// A depth-truncated tree given vertex by vertex, with the behaviour past
/// each frontier vertex described by an end annotation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitTree {
    pub vertices: Vec<ExplicitVertex>,
    pub ends: BTreeMap<String, EndAnnotation>,
}

const TAIL_ISOLATED_GENUS: &str = "~isolated-genus";
const TAIL_ISOLATED_PLANAR: &str = "~isolated-planar";
const TAIL_CANTOR_GENUS: &str = "~cantor-genus";
const TAIL_CANTOR_PLANAR: &str = "~cantor-planar";

impl ExplicitTree {
    /// Converts to an automaton: one state per listed vertex, and each
    /// annotated frontier vertex continues into a shared tail state (a colored
    /// loop for isolated ends, a full binary state otherwise).
    pub fn to_automaton(&self) -> Result<TreeAutomaton> {
        let index: BTreeMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();
        if index.len() != self.vertices.len() {
            return Err(Error::Semantic("duplicate vertex id".into()));
        }
        let mut root = None;
        let mut children: Vec<Vec<(ChildLabel, usize)>> = vec![Vec::new(); self.vertices.len()];
        for (i, v) in self.vertices.iter().enumerate() {
            match &v.parent {
                None => {
                    if root.replace(i).is_some() {
                        return Err(Error::Semantic("more than one root vertex".into()));
                    }
                    if v.level != 0 {
                        return Err(Error::Semantic(format!("root '{}' must have level 0", v.name)));
                    }
                }
                Some(p) => {
                    let pi = *index
                        .get(p.as_str())
                        .ok_or_else(|| Error::Semantic(format!("unknown parent '{p}'")))?;
                    if self.vertices[pi].level + 1 != v.level {
                        return Err(Error::Semantic(format!(
                            "vertex '{}' has level {} but its parent has level {}",
                            v.name, v.level, self.vertices[pi].level
                        )));
                    }
                    children[pi].push((v.side, i));
                }
            }
        }
        let root = root.ok_or_else(|| Error::Semantic("no root vertex".into()))?;
        for name in self.ends.keys() {
            let i = *index
                .get(name.as_str())
                .ok_or_else(|| Error::Semantic(format!("end annotation for unknown vertex '{name}'")))?;
            if !children[i].is_empty() {
                return Err(Error::Semantic(format!(
                    "end annotation on '{name}', which is not a frontier vertex"
                )));
            }
        }

        let n = self.vertices.len();
        let tails = [
            (TAIL_ISOLATED_GENUS, 1, false),
            (TAIL_ISOLATED_PLANAR, 0, false),
            (TAIL_CANTOR_GENUS, 1, true),
            (TAIL_CANTOR_PLANAR, 0, true),
        ];
        let mut states: Vec<State> = Vec::with_capacity(n + tails.len());
        for (i, v) in self.vertices.iter().enumerate() {
            let kids = if children[i].is_empty() {
                let ann = self.ends.get(&v.name).ok_or_else(|| {
                    Error::Semantic(format!("state '{}': dead end forbidden (frontier vertex without end annotation)", v.name))
                })?;
                let tail = match (ann.isolated, ann.genus) {
                    (true, true) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (false, false) => 3,
                };
                if ann.isolated {
                    vec![(ChildLabel::Only, n + tail)]
                } else {
                    vec![(ChildLabel::Left, n + tail), (ChildLabel::Right, n + tail)]
                }
            } else {
                children[i].clone()
            };
            states.push(State {
                name: v.name.clone(),
                color: v.color,
                children: kids,
            });
        }
        for (k, &(name, color, binary)) in tails.iter().enumerate() {
            let id = n + k;
            states.push(State {
                name: name.into(),
                color,
                children: if binary {
                    vec![(ChildLabel::Left, id), (ChildLabel::Right, id)]
                } else {
                    vec![(ChildLabel::Only, id)]
                },
            });
        }
        // Drop tail states nobody uses so reachability validation passes.
        let used: Vec<bool> = (0..tails.len())
            .map(|k| states[..n].iter().any(|s| s.children.iter().any(|&(_, c)| c == n + k)))
            .collect();
        let mut remap = vec![usize::MAX; states.len()];
        let mut kept = Vec::new();
        for (i, s) in states.into_iter().enumerate() {
            if i < n || used[i - n] {
                remap[i] = kept.len();
                kept.push(s);
            }
        }
        for s in &mut kept {
            for c in &mut s.children {
                c.1 = remap[c.1];
            }
        }
        TreeAutomaton::new(kept, remap[root])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeDocument {
    Automaton(TreeAutomaton),
    Explicit(ExplicitTree),
}

impl TreeDocument {
    pub fn into_automaton(self) -> Result<TreeAutomaton> {
        match self {
            TreeDocument::Automaton(a) => Ok(a),
            TreeDocument::Explicit(t) => t.to_automaton(),
        }
    }
}

/// Parses either form of the tree format.
pub fn parse_document(text: &str) -> Result<TreeDocument> {
    struct RawState<'a> {
        name: &'a Token<'a>,
        color: u8,
        children: Vec<(ChildLabel, &'a Token<'a>)>,
    }

    let stmts = statements(text);
    let mut states: Vec<RawState<'_>> = Vec::new();
    let mut start: Option<&Token<'_>> = None;
    let mut vertices = Vec::new();
    let mut ends = BTreeMap::new();

    for stmt in &stmts {
        let mut cur = Cursor { toks: stmt, pos: 0 };
        let head = cur.next("statement")?;
        match head.text {
            "state" => {
                let name = cur.ident()?;
                cur.keyword("color")?;
                let color = cur.color()?;
                cur.keyword("children")?;
                let mut children = Vec::new();
                while cur.pos < stmt.len() {
                    let label = cur.label()?;
                    let target = cur.ident()?;
                    children.push((label, target));
                }
                states.push(RawState {
                    name,
                    color,
                    children,
                });
            }
            "start" => {
                let id = cur.ident()?;
                cur.done()?;
                if start.replace(id).is_some() {
                    return Err(syntax(head, "duplicate start statement"));
                }
            }
            "vertex" => {
                let name = cur.ident()?.text.to_string();
                cur.keyword("level")?;
                let lt = cur.next("level")?;
                let level: usize = lt
                    .text
                    .parse()
                    .map_err(|_| syntax(lt, format!("invalid level '{}'", lt.text)))?;
                cur.keyword("color")?;
                let color = cur.color()?;
                cur.keyword("parent")?;
                let pt = cur.ident()?;
                let parent = (pt.text != "none").then(|| pt.text.to_string());
                cur.keyword("side")?;
                let side = cur.label()?;
                cur.done()?;
                vertices.push(ExplicitVertex {
                    name,
                    level,
                    color,
                    parent,
                    side,
                });
            }
            "end" => {
                let name = cur.ident()?;
                cur.keyword("isolated")?;
                let isolated = cur.boolean()?;
                cur.keyword("genus")?;
                let genus = cur.boolean()?;
                cur.done()?;
                if ends
                    .insert(name.text.to_string(), EndAnnotation { isolated, genus })
                    .is_some()
                {
                    return Err(syntax(name, format!("duplicate end annotation for '{}'", name.text)));
                }
            }
            other => return Err(syntax(head, format!("unknown statement '{other}'"))),
        }
    }

    if !vertices.is_empty() || !ends.is_empty() {
        if !states.is_empty() || start.is_some() {
            return Err(Error::Semantic(
                "cannot mix automaton statements with explicit vertices".into(),
            ));
        }
        return Ok(TreeDocument::Explicit(ExplicitTree { vertices, ends }));
    }

    let start = start.ok_or_else(|| Error::Semantic("missing start statement".into()))?;
    let mut index = BTreeMap::new();
    for (i, s) in states.iter().enumerate() {
        if index.insert(s.name.text, i).is_some() {
            return Err(syntax(s.name, format!("duplicate state '{}'", s.name.text)));
        }
    }
    let resolve = |t: &Token<'_>| {
        index
            .get(t.text)
            .copied()
            .ok_or_else(|| syntax(t, format!("unknown state '{}'", t.text)))
    };
    let mut out = Vec::with_capacity(states.len());
    for s in &states {
        let children = s
            .children
            .iter()
            .map(|&(l, t)| Ok((l, resolve(t)?)))
            .collect::<Result<Vec<_>>>()?;
        out.push(State {
            name: s.name.text.to_string(),
            color: s.color,
            children,
        });
    }
    let start = resolve(start)?;
    Ok(TreeDocument::Automaton(TreeAutomaton::new(out, start)?))
}

/// Parses a tree coding, converting explicit truncated trees to automata.
pub fn parse_tree_spec(text: &str) -> Result<TreeAutomaton> {
    parse_document(text)?.into_automaton()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_single_state() {
        let a = parse_tree_spec("state a color 0 children left a right a; start a").unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a.out_degree(0), 2);
        assert_eq!(a.color(0), 0);
    }

    #[test]
    fn loch_ness_single_loop() {
        let a = parse_tree_spec("state a color 1 children left a; start a").unwrap();
        assert_eq!(a.out_degree(0), 1);
        assert_eq!(a.color(0), 1);
    }

    #[test]
    fn empty_children_is_dead_end() {
        let err = parse_tree_spec("state a color 0 children; start a").unwrap_err();
        assert!(err.to_string().contains("dead end forbidden"), "{err}");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_tree_spec("state a color 0 children left a right a\nstart a\nstate b colour 1 children only b").unwrap_err();
        match err {
            Error::Syntax { line, column, .. } => assert_eq!((line, column), (3, 9)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_color_reports_column() {
        let err = parse_tree_spec("state a color 2 children only a; start a").unwrap_err();
        match err {
            Error::Syntax { line, column, .. } => assert_eq!((line, column), (1, 15)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# Jacob's ladder\n\nstate r color 0 children left h right h # root\nstate h color 1 children only h\nstart r\n";
        let a = parse_tree_spec(text).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a.name(a.start()), "r");
    }

    #[test]
    fn unknown_child_is_rejected() {
        let err = parse_tree_spec("state a color 0 children only b; start a").unwrap_err();
        assert!(err.to_string().contains("unknown state 'b'"));
    }

    #[test]
    fn explicit_tree_converts() {
        let text = "\
vertex r level 0 color 0 parent none side only
vertex a level 1 color 1 parent r side left
vertex b level 1 color 0 parent r side right
end a isolated true genus true
end b isolated false genus false
";
        let doc = parse_document(text).unwrap();
        assert!(matches!(doc, TreeDocument::Explicit(_)));
        let a = doc.into_automaton().unwrap();
        // r, a, b plus two tail states.
        assert_eq!(a.len(), 5);
        let b = a.find("b").unwrap();
        assert_eq!(a.out_degree(b), 2);
    }

    #[test]
    fn explicit_frontier_needs_annotation() {
        let text = "vertex r level 0 color 0 parent none side only\nvertex a level 1 color 0 parent r side only";
        let err = parse_tree_spec(text).unwrap_err();
        assert!(err.to_string().contains("dead end forbidden"));
    }

    #[test]
    fn spec_text_round_trips() {
        let a = parse_tree_spec("state r color 0 children left h right h; state h color 1 children only h; start r").unwrap();
        assert_eq!(parse_tree_spec(&a.to_spec_text()).unwrap(), a);
    }
}
