//! Trie over canonical atom-index keys, used to detect equivalent paths.
//!
//! Two paths are equivalent when they select the same set of atoms, whatever
//! the order, because orthogonal projection onto the same span yields the
//! same residue. Keys are therefore ascending-sorted index sequences; a key
//! hit means a path with exactly that atom set was materialized before.

const ROOT: u32 = 0;

#[derive(Debug, Clone)]
struct Node {
    // (atom index, child node) sorted by atom index.
    children: Vec<(u32, u32)>,
    terminal: bool,
}

impl Node {
    fn new() -> Self {
        Self { children: Vec::new(), terminal: false }
    }
}

#[derive(Debug, Clone)]
pub struct VisitedTrie {
    nodes: Vec<Node>,
    keys: usize,
}

impl Default for VisitedTrie {
    fn default() -> Self {
        Self::new()
    }
}

impl VisitedTrie {
    pub fn new() -> Self {
        Self { nodes: vec![Node::new()], keys: 0 }
    }

    /// Number of distinct keys inserted.
    pub fn len(&self) -> usize {
        self.keys
    }

    pub fn is_empty(&self) -> bool {
        self.keys == 0
    }

    /// Sorted copy of an atom sequence, the order-insensitive key form.
    pub fn canonical_key(atoms: &[u32]) -> Vec<u32> {
        let mut key = atoms.to_vec();
        key.sort_unstable();
        key
    }

    /// Inserts a canonical key; returns false when it was already present.
    pub fn insert(&mut self, key: &[u32]) -> bool {
        debug_assert!(key.windows(2).all(|w| w[0] < w[1]), "key must be sorted and distinct");
        let mut at = ROOT;
        for &atom in key {
            at = match self.nodes[at as usize].children.binary_search_by_key(&atom, |c| c.0) {
                Ok(pos) => self.nodes[at as usize].children[pos].1,
                Err(pos) => {
                    let fresh = self.nodes.len() as u32;
                    self.nodes.push(Node::new());
                    self.nodes[at as usize].children.insert(pos, (atom, fresh));
                    fresh
                }
            };
        }
        let node = &mut self.nodes[at as usize];
        if node.terminal {
            false
        } else {
            node.terminal = true;
            self.keys += 1;
            true
        }
    }

    pub fn contains(&self, key: &[u32]) -> bool {
        debug_assert!(key.windows(2).all(|w| w[0] < w[1]), "key must be sorted and distinct");
        let mut at = ROOT;
        for &atom in key {
            match self.nodes[at as usize].children.binary_search_by_key(&atom, |c| c.0) {
                Ok(pos) => at = self.nodes[at as usize].children[pos].1,
                Err(_) => return false,
            }
        }
        self.nodes[at as usize].terminal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn insert_then_contains() {
        let mut trie = VisitedTrie::new();
        assert!(trie.insert(&[3, 7, 9]));
        assert!(trie.contains(&[3, 7, 9]));
        assert!(!trie.contains(&[3, 7]));
        assert!(!trie.contains(&[3, 7, 9, 12]));
        assert!(!trie.insert(&[3, 7, 9]));
        assert_eq!(trie.len(), 1);
    }

    #[test]
    fn prefix_keys_are_independent() {
        let mut trie = VisitedTrie::new();
        trie.insert(&[1, 2, 3]);
        trie.insert(&[1, 2]);
        assert!(trie.contains(&[1, 2]));
        assert!(trie.contains(&[1, 2, 3]));
        assert!(!trie.contains(&[1]));
        assert_eq!(trie.len(), 2);
    }

    #[test]
    fn canonical_key_sorts() {
        assert_eq!(VisitedTrie::canonical_key(&[9, 1, 4]), vec![1, 4, 9]);
        assert_eq!(VisitedTrie::canonical_key(&[]), Vec::<u32>::new());
    }

    proptest! {
        // Membership over the trie matches membership over a plain set of
        // canonical keys for arbitrary insert/query interleavings.
        #[test]
        fn matches_reference_set(ops in proptest::collection::vec(
            proptest::collection::btree_set(0u32..24, 1..6), 1..60,
        )) {
            let mut trie = VisitedTrie::new();
            let mut reference: BTreeSet<Vec<u32>> = BTreeSet::new();
            for set in &ops {
                let key: Vec<u32> = set.iter().copied().collect();
                let fresh = trie.insert(&key);
                prop_assert_eq!(fresh, reference.insert(key.clone()));
                prop_assert!(trie.contains(&key));
            }
            prop_assert_eq!(trie.len(), reference.len());
            for set in &ops {
                let key: Vec<u32> = set.iter().copied().collect();
                prop_assert!(trie.contains(&key));
            }
        }
    }
}
