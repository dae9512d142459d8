use std::collections::BTreeMap;

use super::id::{SidShape, SidToken, SpatialSemanticId};

#[derive(Debug, Clone, Default)]
struct Node {
    children: BTreeMap<u32, usize>,
}

/// Prefix trie over id token values, used to restrict decoding to
/// registered ids.
#[derive(Debug, Clone)]
pub struct SidTrie {
    shape: SidShape,
    nodes: Vec<Node>,
    len: usize,
}

impl SidTrie {
    pub fn new(shape: SidShape) -> Self {
        Self {
            shape,
            nodes: vec![Node::default()],
            len: 0,
        }
    }

    /// Returns false if the id was already present.
    pub fn insert(&mut self, sid: &SpatialSemanticId) -> bool {
        let mut node = 0;
        let mut created = false;
        for value in sid.values() {
            node = match self.nodes[node].children.get(&value) {
                Some(&next) => next,
                None => {
                    self.nodes.push(Node::default());
                    let next = self.nodes.len() - 1;
                    self.nodes[node].children.insert(value, next);
                    created = true;
                    next
                }
            };
        }
        if created {
            self.len += 1;
        }
        created
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn walk(&self, prefix: &[u32]) -> Option<usize> {
        prefix.iter().try_fold(0, |node, value| {
            self.nodes[node].children.get(value).copied()
        })
    }

    /// Tokens that extend `prefix` toward at least one registered id.
    /// Empty for unknown or complete prefixes.
    pub fn valid_next_tokens(&self, prefix: &[u32]) -> Vec<SidToken> {
        let slots = self.shape.slots();
        let Some(slot) = slots.get(prefix.len()).copied() else {
            return Vec::new();
        };
        match self.walk(prefix) {
            Some(node) => self.nodes[node]
                .children
                .keys()
                .map(|&value| SidToken { slot, value })
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn contains(&self, sid: &SpatialSemanticId) -> bool {
        let values = sid.values();
        values.len() == self.shape.len()
            && self
                .walk(&values)
                .is_some_and(|node| self.nodes[node].children.is_empty())
    }

    /// Every root-to-leaf path, in token order.
    pub fn paths(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::new())];
        while let Some((node, path)) = stack.pop() {
            let children = &self.nodes[node].children;
            if children.is_empty() {
                if !path.is_empty() {
                    out.push(path);
                }
                continue;
            }
            for (&value, &child) in children.iter().rev() {
                let mut next = path.clone();
                next.push(value);
                stack.push((child, next));
            }
        }
        out
    }
}
