//! Longest common substring via a suffix automaton.

use std::collections::HashMap;

struct State {
    len: usize,
    link: Option<usize>,
    next: HashMap<char, usize>,
}

/// Suffix automaton over the characters of one text. Recognizes exactly the
/// substrings of that text.
pub struct SuffixAutomaton {
    states: Vec<State>,
}

impl SuffixAutomaton {
    pub fn new(text: &str) -> Self {
        let mut states = Vec::with_capacity(2 * text.len() + 1);
        states.push(State {
            len: 0,
            link: None,
            next: HashMap::new(),
        });
        let mut last = 0;
        for c in text.chars() {
            let cur = states.len();
            states.push(State {
                len: states[last].len + 1,
                link: None,
                next: HashMap::new(),
            });
            let mut p = Some(last);
            while let Some(pi) = p {
                if states[pi].next.contains_key(&c) {
                    break;
                }
                states[pi].next.insert(c, cur);
                p = states[pi].link;
            }
            match p {
                None => states[cur].link = Some(0),
                Some(pi) => {
                    let q = states[pi].next[&c];
                    if states[pi].len + 1 == states[q].len {
                        states[cur].link = Some(q);
                    } else {
                        let clone = states.len();
                        states.push(State {
                            len: states[pi].len + 1,
                            link: states[q].link,
                            next: states[q].next.clone(),
                        });
                        let mut p = Some(pi);
                        while let Some(pj) = p {
                            if states[pj].next.get(&c) != Some(&q) {
                                break;
                            }
                            states[pj].next.insert(c, clone);
                            p = states[pj].link;
                        }
                        states[q].link = Some(clone);
                        states[cur].link = Some(clone);
                    }
                }
            }
            last = cur;
        }
        Self { states }
    }

    /// Length in characters of the longest substring of `query` that also
    /// occurs in the indexed text.
    pub fn longest_match(&self, query: &str) -> usize {
        let mut state = 0;
        let mut len = 0;
        let mut best = 0;
        for c in query.chars() {
            while state != 0 && !self.states[state].next.contains_key(&c) {
                state = self.states[state].link.expect("non-root states have links");
                len = self.states[state].len;
            }
            match self.states[state].next.get(&c) {
                Some(&to) => {
                    state = to;
                    len += 1;
                }
                None => {
                    state = 0;
                    len = 0;
                }
            }
            best = best.max(len);
        }
        best
    }
}

/// Length in characters of the longest contiguous run shared by `a` and `b`.
pub fn longest_common_substring_len(a: &str, b: &str) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    SuffixAutomaton::new(b).longest_match(a)
}
