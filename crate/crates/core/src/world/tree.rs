//! Parent / first-child / sibling forest over dense node indices.
//!
//! Index 0 is the synthetic root. New children are linked at the head of
//! their parent's child chain, matching the Z-machine `insert_obj` order.

use alloc::vec::Vec;

use thiserror::Error;

/// Dense node index. `NodeIdx::ROOT` is the universe node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeIdx(pub u32);

impl NodeIdx {
    pub const ROOT: NodeIdx = NodeIdx(0);

    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("node {0} does not exist")]
    NoSuchNode(u32),
    #[error("the root node cannot be moved")]
    MoveRoot,
    #[error("moving node {node} under {parent} would create a cycle")]
    Cycle { node: u32, parent: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ObjectTree {
    parent: Vec<u32>,
    first_child: Vec<u32>,
    sibling: Vec<u32>,
}

#[inline]
fn link(raw: u32) -> Option<NodeIdx> {
    (raw != NONE).then_some(NodeIdx(raw))
}

impl ObjectTree {
    /// `len` nodes, all detached except that every non-root node hangs
    /// directly off the root.
    pub fn new(len: usize) -> Self {
        assert!(len >= 1 && len < NONE as usize);
        let mut tree = Self {
            parent: alloc::vec![NONE; len],
            first_child: alloc::vec![NONE; len],
            sibling: alloc::vec![NONE; len],
        };
        // Insert in reverse so the root's child chain reads 1, 2, 3, ...
        for i in (1..len as u32).rev() {
            tree.attach(NodeIdx(i), NodeIdx::ROOT);
        }
        tree
    }

    /// Rebuild from raw link arrays (snapshot decoding). Returns `None` if
    /// the links do not describe a consistent forest rooted at 0.
    pub fn from_links(parent: Vec<u32>, first_child: Vec<u32>, sibling: Vec<u32>) -> Option<Self> {
        let tree = Self { parent, first_child, sibling };
        tree.check_integrity().ok()?;
        Some(tree)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn contains(&self, n: NodeIdx) -> bool {
        n.get() < self.len()
    }

    pub fn parent(&self, n: NodeIdx) -> Option<NodeIdx> {
        link(self.parent[n.get()])
    }

    pub fn first_child(&self, n: NodeIdx) -> Option<NodeIdx> {
        link(self.first_child[n.get()])
    }

    pub fn sibling(&self, n: NodeIdx) -> Option<NodeIdx> {
        link(self.sibling[n.get()])
    }

    pub fn children(&self, n: NodeIdx) -> Children<'_> {
        Children { tree: self, next: self.first_child(n) }
    }

    pub fn child_count(&self, n: NodeIdx) -> usize {
        self.children(n).count()
    }

    /// True if `ancestor` lies on the parent chain of `n` (or is `n`).
    pub fn is_within(&self, n: NodeIdx, ancestor: NodeIdx) -> bool {
        let mut cur = Some(n);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.parent(c);
        }
        false
    }

    /// Move `node` to the head of `new_parent`'s child list. On error the
    /// tree is untouched.
    pub fn reparent(&mut self, node: NodeIdx, new_parent: NodeIdx) -> Result<(), TreeError> {
        if !self.contains(node) {
            return Err(TreeError::NoSuchNode(node.0));
        }
        if !self.contains(new_parent) {
            return Err(TreeError::NoSuchNode(new_parent.0));
        }
        if node == NodeIdx::ROOT {
            return Err(TreeError::MoveRoot);
        }
        if self.is_within(new_parent, node) {
            return Err(TreeError::Cycle { node: node.0, parent: new_parent.0 });
        }
        if self.parent(node) == Some(new_parent) {
            return Ok(());
        }
        self.detach(node);
        self.attach(node, new_parent);
        Ok(())
    }

    fn detach(&mut self, node: NodeIdx) {
        let Some(p) = self.parent(node) else { return };
        let next = self.sibling[node.get()];
        if self.first_child[p.get()] == node.0 {
            self.first_child[p.get()] = next;
        } else {
            let mut cur = self.first_child[p.get()];
            while cur != NONE {
                if self.sibling[cur as usize] == node.0 {
                    self.sibling[cur as usize] = next;
                    break;
                }
                cur = self.sibling[cur as usize];
            }
        }
        self.parent[node.get()] = NONE;
        self.sibling[node.get()] = NONE;
    }

    fn attach(&mut self, node: NodeIdx, parent: NodeIdx) {
        self.sibling[node.get()] = self.first_child[parent.get()];
        self.first_child[parent.get()] = node.0;
        self.parent[node.get()] = parent.0;
    }

    pub fn raw_links(&self) -> (&[u32], &[u32], &[u32]) {
        (&self.parent, &self.first_child, &self.sibling)
    }

    /// Verifies the forest invariants: root has no parent, every other node
    /// has exactly one parent and is reachable from the root, child chains
    /// agree with parent links, no cycles.
    pub fn check_integrity(&self) -> Result<(), &'static str> {
        let n = self.len();
        if n == 0 || self.first_child.len() != n || self.sibling.len() != n {
            return Err("link arrays have inconsistent lengths");
        }
        if self.parent[0] != NONE || self.sibling[0] != NONE {
            return Err("root has a parent or sibling");
        }
        for raw in self.parent.iter().chain(&self.first_child).chain(&self.sibling) {
            if *raw != NONE && *raw as usize >= n {
                return Err("link out of range");
            }
        }
        let mut seen = alloc::vec![false; n];
        let mut stack = alloc::vec![0u32];
        seen[0] = true;
        let mut visited = 1;
        while let Some(p) = stack.pop() {
            let mut cur = self.first_child[p as usize];
            let mut steps = 0;
            while cur != NONE {
                if seen[cur as usize] {
                    return Err("node reachable twice");
                }
                if self.parent[cur as usize] != p {
                    return Err("child chain disagrees with parent link");
                }
                seen[cur as usize] = true;
                visited += 1;
                stack.push(cur);
                cur = self.sibling[cur as usize];
                steps += 1;
                if steps > n {
                    return Err("sibling cycle");
                }
            }
        }
        if visited != n {
            return Err("unreachable node");
        }
        Ok(())
    }
}

pub struct Children<'a> {
    tree: &'a ObjectTree,
    next: Option<NodeIdx>,
}

impl Iterator for Children<'_> {
    type Item = NodeIdx;

    fn next(&mut self) -> Option<NodeIdx> {
        let cur = self.next?;
        self.next = self.tree.sibling(cur);
        Some(cur)
    }
}
