//! Ball-passing reachability for d-separation, with active-trail reconstruction.

use std::collections::{HashMap, VecDeque};

use super::{disjoint, CausalGraph, NodeSet, VarId};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Dir {
    /// Arrived from a child (travelling against the edge).
    Up,
    /// Arrived from a parent.
    Down,
}

impl CausalGraph {
    /// True iff `z` blocks every trail between `x` and `y`.
    pub fn d_separated(&self, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool> {
        Ok(self.active_trail(x, y, z)?.is_none())
    }

    /// An active trail from some `x` node to some `y` node given `z`, or `None` when
    /// d-separated. The trail is a walk: a node may repeat when the trail turns at a
    /// collider.
    pub fn active_trail(&self, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<Option<Vec<VarId>>> {
        self.check_set(x)?;
        self.check_set(y)?;
        self.check_set(z)?;
        disjoint(&[("X", x), ("Y", y), ("Z", z)])?;
        if x.is_empty() || y.is_empty() {
            return Ok(None);
        }

        // Colliders are open when they are in z or have a descendant in z.
        let mut opens_collider = vec![false; self.node_count()];
        for v in z.iter().chain(self.ancestors(z)?.iter()) {
            opens_collider[v.index()] = true;
        }

        let mut prev: HashMap<(VarId, Dir), Option<(VarId, Dir)>> = HashMap::new();
        let mut queue = VecDeque::new();
        for s in x {
            prev.insert((s, Dir::Up), None);
            queue.push_back((s, Dir::Up));
        }
        while let Some((v, d)) = queue.pop_front() {
            if y.contains(v) {
                let mut trail = vec![v];
                let mut cur = prev[&(v, d)];
                while let Some(state) = cur {
                    if trail.last() != Some(&state.0) {
                        trail.push(state.0);
                    }
                    cur = prev[&state];
                }
                trail.reverse();
                return Ok(Some(trail));
            }
            let blocked = z.contains(v);
            let mut next: Vec<(VarId, Dir)> = Vec::new();
            match d {
                Dir::Up if !blocked => {
                    next.extend(self.pa(v).iter().map(|p| (p, Dir::Up)));
                    next.extend(self.ch(v).iter().map(|c| (c, Dir::Down)));
                }
                Dir::Up => {}
                Dir::Down => {
                    if !blocked {
                        next.extend(self.ch(v).iter().map(|c| (c, Dir::Down)));
                    }
                    if opens_collider[v.index()] {
                        next.extend(self.pa(v).iter().map(|p| (p, Dir::Up)));
                    }
                }
            }
            for s in next {
                if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(s) {
                    e.insert(Some((v, d)));
                    queue.push_back(s);
                }
            }
        }
        Ok(None)
    }
}
