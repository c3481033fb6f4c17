//! In-process message board for the stigmergic agent strategy.
//!
//! Exploiter agents announce every edge of the tours they build; explorer
//! agents weight announced edges more heavily when choosing their next
//! move. Announcements sit in a per-iteration queue and are folded into
//! the persistent knowledge base when the iteration ends.

use std::collections::HashSet;

/// One announced edge: who reported it and when.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeReport {
    pub edge: (usize, usize),
    pub agent: usize,
    pub iteration: usize,
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    n: usize,
    reports: Vec<EdgeReport>,
    known_edges: HashSet<(usize, usize)>,
    queue: Vec<EdgeReport>,
    queued_edges: HashSet<(usize, usize)>,
}

fn key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl KnowledgeBase {
    pub fn new(n: usize) -> Self {
        KnowledgeBase {
            n,
            ..Default::default()
        }
    }

    /// Queues an edge announcement for the current iteration.
    pub fn publish(&mut self, i: usize, j: usize, agent: usize, iteration: usize) {
        assert!(i != j && i < self.n && j < self.n, "edge ({i},{j}) not in graph");
        let edge = key(i, j);
        self.queue.push(EdgeReport {
            edge,
            agent,
            iteration,
        });
        self.queued_edges.insert(edge);
    }

    /// Whether an edge is currently announced or already known.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        let edge = key(i, j);
        self.queued_edges.contains(&edge) || self.known_edges.contains(&edge)
    }

    /// Folds the pending announcements into the knowledge base.
    pub fn end_iteration(&mut self) {
        for report in self.queue.drain(..) {
            self.known_edges.insert(report.edge);
            self.reports.push(report);
        }
        self.queued_edges.clear();
    }

    /// Accumulated reports, in publication order.
    pub fn reports(&self) -> &[EdgeReport] {
        &self.reports
    }

    /// Announcements of the current iteration.
    pub fn pending(&self) -> &[EdgeReport] {
        &self.queue
    }
}
