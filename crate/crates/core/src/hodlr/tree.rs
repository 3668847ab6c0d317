use std::ops::Range;

use serde::Serialize;

use super::HodlrError;

pub const DEFAULT_LEAF_SIZE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HodlrNode {
    pub level: usize,
    pub lo: usize,
    pub hi: usize,
    /// Indices of the two children in the tree's node list.
    pub children: Option<(usize, usize)>,
}

impl HodlrNode {
    pub fn size(&self) -> usize {
        self.hi - self.lo
    }

    pub fn range(&self) -> Range<usize> {
        self.lo..self.hi
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    /// Split point between the children: the left child takes
    /// `⌈size/2⌉` indices.
    pub fn mid(&self) -> usize {
        self.lo + self.size().div_ceil(2)
    }
}

/// Balanced recursive bisection of `0..n`, nodes stored breadth first with
/// the root at index 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HodlrTree {
    n: usize,
    leaf_threshold: usize,
    nodes: Vec<HodlrNode>,
}

/// Splits every range larger than `leaf_threshold` in two.
pub fn build_tree(n: usize, leaf_threshold: usize) -> Result<HodlrTree, HodlrError> {
    if n == 0 || leaf_threshold == 0 {
        return Err(HodlrError::InvalidTree {
            n,
            leaf_threshold,
        });
    }
    let mut nodes = vec![HodlrNode {
        level: 0,
        lo: 0,
        hi: n,
        children: None,
    }];
    let mut k = 0;
    while k < nodes.len() {
        if nodes[k].size() > leaf_threshold {
            let (lo, mid, hi, level) = (nodes[k].lo, nodes[k].mid(), nodes[k].hi, nodes[k].level);
            let left = nodes.len();
            nodes.push(HodlrNode {
                level: level + 1,
                lo,
                hi: mid,
                children: None,
            });
            nodes.push(HodlrNode {
                level: level + 1,
                lo: mid,
                hi,
                children: None,
            });
            nodes[k].children = Some((left, left + 1));
        }
        k += 1;
    }
    Ok(HodlrTree {
        n,
        leaf_threshold,
        nodes,
    })
}

impl HodlrTree {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn leaf_threshold(&self) -> usize {
        self.leaf_threshold
    }

    pub fn nodes(&self) -> &[HodlrNode] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> &HodlrNode {
        &self.nodes[k]
    }

    pub fn root(&self) -> &HodlrNode {
        &self.nodes[0]
    }

    /// Deepest level; 0 for a single leaf.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &HodlrNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
