//! Prefix-closed regular languages as partial DFAs.
//!
//! Every state is accepting and state 0 is the start, so a language is the
//! set of labelled paths from the start. Minimisation renumbers states in
//! breadth-first order, which makes equal languages structurally equal.

use std::collections::HashMap;

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Dfa {
    k: usize,
    trans: Vec<u32>,
}

/// An automaton grew past its state budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

impl Dfa {
    pub fn states(&self) -> usize {
        self.trans.len() / self.k
    }

    #[inline]
    pub fn next(&self, q: u32, a: u32) -> Option<u32> {
        let t = self.trans[q as usize * self.k + a as usize];
        (t != NONE).then_some(t)
    }

    /// All words.
    pub fn universal(k: usize) -> Dfa {
        Dfa { k, trans: vec![0; k] }
    }

    /// Words consistent with `cells` position by position, then anything.
    /// `cells[d]` lists the symbols allowed at depth `d`.
    pub fn from_cells(k: usize, cells: &[Vec<u32>]) -> Dfa {
        let n = cells.len();
        let mut trans = vec![NONE; (n + 1) * k];
        for (d, allowed) in cells.iter().enumerate() {
            for &a in allowed {
                trans[d * k + a as usize] = d as u32 + 1;
            }
        }
        for a in 0..k {
            trans[n * k + a] = n as u32;
        }
        Dfa { k, trans }.minimize()
    }

    /// Moore refinement followed by canonical breadth-first numbering.
    pub fn minimize(&self) -> Dfa {
        self.quotient(usize::MAX)
    }

    /// Partition after `rounds` refinement rounds; `usize::MAX` runs to the
    /// fixpoint. Two states share a class after `j` rounds exactly when they
    /// read the same words of length at most `j`.
    fn partition(&self, rounds: usize) -> (Vec<u32>, usize) {
        let n = self.states();
        let k = self.k;
        let mut class = vec![0u32; n];
        let mut count = 1usize;
        let mut sig: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut key = Vec::with_capacity(k + 1);
        let mut round = 0;
        while round < rounds {
            sig.clear();
            let mut next = vec![0u32; n];
            for q in 0..n {
                key.clear();
                key.push(class[q]);
                key.extend(self.trans[q * k..(q + 1) * k].iter().map(|&t| {
                    if t == NONE {
                        NONE
                    } else {
                        class[t as usize]
                    }
                }));
                let fresh = sig.len() as u32;
                next[q] = *sig.entry(key.clone()).or_insert(fresh);
            }
            let new_count = sig.len();
            class = next;
            round += 1;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        (class, count)
    }

    fn quotient(&self, rounds: usize) -> Dfa {
        let (class, _) = self.partition(rounds);
        if rounds == usize::MAX {
            self.renumber_classes(&class)
        } else {
            // A coarse partition is not a congruence; go through an NFA.
            let n = self.states();
            let classes = class.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
            let mut succ: Vec<Vec<Vec<u64>>> = vec![vec![Vec::new(); self.k]; classes];
            for q in 0..n {
                for a in 0..self.k {
                    let t = self.trans[q * self.k + a];
                    if t != NONE {
                        succ[class[q] as usize][a].push(class[t as usize] as u64);
                    }
                }
            }
            for row in &mut succ {
                for list in row.iter_mut() {
                    list.sort_unstable();
                    list.dedup();
                }
            }
            determinize(self.k, vec![class[0] as u64], usize::MAX, |set, buckets| {
                for &c in set {
                    for (a, list) in succ[c as usize].iter().enumerate() {
                        buckets[a].extend_from_slice(list);
                    }
                }
            })
            .expect("unbounded determinization")
        }
    }

    fn renumber_classes(&self, class: &[u32]) -> Dfa {
        let k = self.k;
        let n = self.states();
        let mut rep: HashMap<u32, usize> = HashMap::new();
        for q in 0..n {
            rep.entry(class[q]).or_insert(q);
        }
        let mut order: HashMap<u32, u32> = HashMap::new();
        let mut queue = std::collections::VecDeque::new();
        order.insert(class[0], 0);
        queue.push_back(class[0]);
        let mut trans = Vec::new();
        while let Some(c) = queue.pop_front() {
            let q = rep[&c];
            for a in 0..k {
                let t = self.trans[q * k + a];
                if t == NONE {
                    trans.push(NONE);
                    continue;
                }
                let tc = class[t as usize];
                let id = match order.get(&tc) {
                    Some(&id) => id,
                    None => {
                        let id = order.len() as u32;
                        order.insert(tc, id);
                        queue.push_back(tc);
                        id
                    }
                };
                trans.push(id);
            }
        }
        Dfa { k, trans }
    }

    /// Over-approximation merging states that read the same words of
    /// length at most `rounds`.
    pub fn widen(&self, rounds: usize) -> Dfa {
        self.quotient(rounds).minimize()
    }

    pub fn union(&self, other: &Dfa) -> Dfa {
        assert_eq!(self.k, other.k);
        let k = self.k;
        let mut index: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs = vec![(0u32, 0u32)];
        index.insert((0, 0), 0);
        let mut trans = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            for a in 0..k as u32 {
                let np = if p == NONE { None } else { self.next(p, a) };
                let nq = if q == NONE { None } else { other.next(q, a) };
                if np.is_none() && nq.is_none() {
                    trans.push(NONE);
                    continue;
                }
                let key = (np.unwrap_or(NONE), nq.unwrap_or(NONE));
                let id = *index.entry(key).or_insert_with(|| {
                    pairs.push(key);
                    pairs.len() as u32 - 1
                });
                trans.push(id);
            }
            i += 1;
        }
        Dfa { k, trans }.minimize()
    }

    /// `self ⊆ other`; both must be minimal.
    pub fn is_subset_of(&self, other: &Dfa) -> bool {
        let k = self.k;
        let mut seen: HashMap<(u32, u32), ()> = HashMap::new();
        let mut stack = vec![(0u32, 0u32)];
        seen.insert((0, 0), ());
        while let Some((p, q)) = stack.pop() {
            for a in 0..k as u32 {
                if let Some(np) = self.next(p, a) {
                    match other.next(q, a) {
                        None => return false,
                        Some(nq) => {
                            if seen.insert((np, nq), ()).is_none() {
                                stack.push((np, nq));
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// For each depth `0..depths`, the set of symbols read at that depth,
    /// as a list of sorted symbol vectors.
    pub fn symbols_by_depth(&self, depths: usize) -> Vec<Vec<u32>> {
        let k = self.k;
        let mut level = vec![0u32];
        let mut mark = vec![u32::MAX; self.states()];
        let mut out = Vec::with_capacity(depths);
        for d in 0..depths {
            let mut present = vec![false; k];
            let mut next = Vec::new();
            for &q in &level {
                for a in 0..k {
                    let t = self.trans[q as usize * k + a];
                    if t != NONE {
                        present[a] = true;
                        if mark[t as usize] != d as u32 {
                            mark[t as usize] = d as u32;
                            next.push(t);
                        }
                    }
                }
            }
            out.push((0..k as u32).filter(|&a| present[a as usize]).collect());
            level = next;
        }
        out
    }

    #[cfg(test)]
    pub fn accepts(&self, word: &[u32]) -> bool {
        let mut q = 0;
        for &a in word {
            match self.next(q, a) {
                Some(t) => q = t,
                None => return false,
            }
        }
        true
    }
}

/// Subset construction over NFA states encoded as `u64`.
///
/// `expand(set, buckets)` must push the successors of every state in `set`
/// into `buckets[a]` for each symbol `a`. Empty successor sets become
/// missing transitions. The result is minimised.
pub(crate) fn determinize(
    k: usize,
    start: Vec<u64>,
    max_states: usize,
    mut expand: impl FnMut(&[u64], &mut [Vec<u64>]),
) -> Result<Dfa, Overflow> {
    let mut start = start;
    start.sort_unstable();
    start.dedup();
    let mut index: HashMap<Vec<u64>, u32> = HashMap::new();
    let mut sets: Vec<Vec<u64>> = vec![start.clone()];
    index.insert(start, 0);
    let mut trans: Vec<u32> = Vec::new();
    let mut buckets: Vec<Vec<u64>> = vec![Vec::new(); k];
    let mut i = 0;
    while i < sets.len() {
        for b in buckets.iter_mut() {
            b.clear();
        }
        expand(&sets[i], &mut buckets);
        for b in buckets.iter_mut() {
            if b.is_empty() {
                trans.push(NONE);
                continue;
            }
            b.sort_unstable();
            b.dedup();
            let id = match index.get(b.as_slice()) {
                Some(&id) => id,
                None => {
                    if sets.len() >= max_states {
                        return Err(Overflow);
                    }
                    let id = sets.len() as u32;
                    index.insert(b.clone(), id);
                    sets.push(b.clone());
                    id
                }
            };
            trans.push(id);
        }
        i += 1;
    }
    Ok(Dfa { k, trans }.minimize())
}

/// A sliding block map reading `left` symbols to the left and `right` to the
/// right of each output position, tabulated over the language alphabet.
pub(crate) struct BlockMap {
    pub k: usize,
    pub left: usize,
    pub right: usize,
    /// Indexed by the window read left to right in base `k`.
    pub table: Vec<u32>,
    /// Symbols standing left of the language's first position.
    pub contexts: Vec<Vec<u32>>,
}

impl BlockMap {
    /// Image language: the output at a position stays at that position, so
    /// images of words starting at column `s` start at column `s` too.
    pub fn image(&self, dfa: &Dfa, max_states: usize) -> Result<Dfa, Overflow> {
        let k = self.k;
        let buf_len = self.left + self.right;
        let buf_mod = (k as u64).pow(buf_len as u32);
        let window_mod = buf_mod; // buffer keeps the last `left + right` symbols
        // Initial states: context, then `right` symbols read from the start.
        let mut start = Vec::new();
        let mut frontier: Vec<(u32, u64)> = self
            .contexts
            .iter()
            .map(|ctx| (0u32, ctx.iter().fold(0u64, |acc, &s| acc * k as u64 + s as u64)))
            .collect();
        for _ in 0..self.right {
            let mut next = Vec::new();
            for &(q, buf) in &frontier {
                for a in 0..k as u32 {
                    if let Some(t) = dfa.next(q, a) {
                        next.push((t, buf * k as u64 + a as u64));
                    }
                }
            }
            frontier = next;
        }
        for (q, buf) in frontier {
            start.push(q as u64 * buf_mod + buf);
        }
        if start.is_empty() {
            return Ok(Dfa { k, trans: vec![NONE; k] });
        }
        determinize(k, start, max_states, |set, buckets| {
            for &state in set {
                let q = (state / buf_mod) as u32;
                let buf = state % buf_mod;
                for a in 0..k as u32 {
                    if let Some(t) = dfa.next(q, a) {
                        let window = buf * k as u64 + a as u64;
                        let out = self.table[window as usize];
                        let nbuf = window % window_mod;
                        buckets[out as usize].push(t as u64 * buf_mod + nbuf);
                    }
                }
            }
        })
    }
}
