use std::collections::{HashMap, VecDeque};
use std::path::Path;

use thiserror::Error;
use tidyup_core::{names::normalize, ObjectName, ReceptacleName, Scenario, Split};

use crate::{data_lines, read_file};

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
    #[error("self-loop on concept {0:?}")]
    SelfLoop(String),
    #[error("unknown concept {0:?}")]
    UnknownConcept(String),
    #[error("no path between {0:?} and {1:?}")]
    Unreachable(String, String),
    #[error("object {0:?} has no taxonomy mapping")]
    UnmappedName(String),
    #[error("scenario has no seen objects")]
    NoSeenObjects,
}

/// Undirected concept graph with a surface-name index.
#[derive(Debug, Clone, Default)]
pub struct TaxonomyGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<usize>>,
    name_index: HashMap<String, usize>,
}

impl TaxonomyGraph {
    /// Build from concept pairs. Repeated edges are merged.
    pub fn from_edges<'a>(
        edges: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, TaxonomyError> {
        let mut g = Self::default();
        for (a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    fn node(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        self.adj.push(Vec::new());
        i
    }

    fn add_edge(&mut self, a: &str, b: &str) -> Result<(), TaxonomyError> {
        if a == b {
            return Err(TaxonomyError::SelfLoop(a.to_string()));
        }
        let (i, j) = (self.node(a), self.node(b));
        if !self.adj[i].contains(&j) {
            self.adj[i].push(j);
            self.adj[j].push(i);
        }
        Ok(())
    }

    /// Add a surface name for an existing concept.
    pub fn add_synonym(&mut self, surface: &str, concept: &str) -> Result<(), TaxonomyError> {
        let &i = self
            .index
            .get(concept)
            .ok_or_else(|| TaxonomyError::UnknownConcept(concept.to_string()))?;
        self.name_index.insert(normalize(surface), i);
        Ok(())
    }

    /// Edge list `concept_a<TAB>concept_b`, optional synonyms
    /// `surface_name<TAB>concept`. `#` starts a comment line.
    pub fn load(edges: &Path, synonyms: Option<&Path>) -> Result<Self, TaxonomyError> {
        let mut g = Self::default();
        for (line, a, b) in pairs(edges)? {
            g.add_edge(&a, &b).map_err(|e| format_err(edges, line, e.to_string()))?;
        }
        if let Some(path) = synonyms {
            for (line, s, c) in pairs(path)? {
                g.add_synonym(&s, &c).map_err(|e| format_err(path, line, e.to_string()))?;
            }
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.index.contains_key(concept)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.ids.iter().map(String::as_str)
    }

    /// Concept for a surface name via the synonym index, or the concept
    /// of the same id.
    pub fn lookup(&self, surface: &str) -> Option<&str> {
        let key = normalize(surface);
        self.name_index
            .get(&key)
            .or_else(|| self.index.get(surface.trim()))
            .map(|&i| self.ids[i].as_str())
    }

    fn id(&self, concept: &str) -> Result<usize, TaxonomyError> {
        self.index
            .get(concept)
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownConcept(concept.to_string()))
    }

    /// Hop counts from one node to every node; `None` when unreachable.
    fn bfs(&self, from: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.ids.len()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap() + 1;
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

fn format_err(path: &Path, line: usize, message: String) -> TaxonomyError {
    TaxonomyError::Format {
        path: path.display().to_string(),
        line,
        message,
    }
}

fn pairs(path: &Path) -> Result<Vec<(usize, String, String)>, TaxonomyError> {
    let text = read_file(path).map_err(|source| TaxonomyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    data_lines(&text)
        .map(|(line, l)| {
            let mut cols = l.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) if !a.trim().is_empty() && !b.trim().is_empty() => {
                    Ok((line, a.trim().to_string(), b.trim().to_string()))
                }
                _ => Err(format_err(path, line, "expected two tab-separated columns".into())),
            }
        })
        .collect()
}

pub fn taxonomy_distance(g: &TaxonomyGraph, a: &str, b: &str) -> Result<u32, TaxonomyError> {
    let (i, j) = (g.id(a)?, g.id(b)?);
    g.bfs(i)[j].ok_or_else(|| TaxonomyError::Unreachable(a.to_string(), b.to_string()))
}

/// Manual object-name to concept assignments.
#[derive(Debug, Clone, Default)]
pub struct NameMapping {
    entries: HashMap<String, String>,
}

impl NameMapping {
    pub fn new<'a>(
        g: &TaxonomyGraph,
        entries: impl IntoIterator<Item = (&'a ObjectName, &'a str)>,
    ) -> Result<Self, TaxonomyError> {
        let mut m = Self::default();
        for (name, concept) in entries {
            m.insert(g, name.as_str(), concept)?;
        }
        Ok(m)
    }

    fn insert(&mut self, g: &TaxonomyGraph, name: &str, concept: &str) -> Result<(), TaxonomyError> {
        if !g.contains(concept) {
            return Err(TaxonomyError::UnknownConcept(concept.to_string()));
        }
        self.entries.insert(normalize(name), concept.to_string());
        Ok(())
    }

    /// `object_name<TAB>concept` lines; every concept must be in `g`.
    pub fn load(path: &Path, g: &TaxonomyGraph) -> Result<Self, TaxonomyError> {
        let mut m = Self::default();
        for (line, name, concept) in pairs(path)? {
            m.insert(g, &name, &concept)
                .map_err(|e| format_err(path, line, e.to_string()))?;
        }
        Ok(m)
    }

    pub fn get(&self, name: &ObjectName) -> Option<&str> {
        self.entries.get(&name.normalized()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Mapping first, then the graph's own name index.
    pub fn resolve<'g>(&'g self, g: &'g TaxonomyGraph, name: &ObjectName) -> Result<&'g str, TaxonomyError> {
        self.get(name)
            .or_else(|| g.lookup(name.as_str()))
            .ok_or_else(|| TaxonomyError::UnmappedName(name.to_string()))
    }
}

/// Receptacle of the seen object closest to `target` in the taxonomy.
/// Seen objects in another component than the target are skipped; if none
/// is reachable the result is `Unreachable`.
pub fn taxonomy_predict(
    scenario: &Scenario,
    g: &TaxonomyGraph,
    m: &NameMapping,
    target: &ObjectName,
) -> Result<ReceptacleName, TaxonomyError> {
    let seen = scenario.placements(Split::Seen);
    let first = seen.first().ok_or(TaxonomyError::NoSeenObjects)?;
    let t = m.resolve(g, target)?;
    let dist = g.bfs(g.id(t)?);
    let mut best: Option<(u32, &ReceptacleName)> = None;
    for p in seen {
        let c = g.id(m.resolve(g, &p.object)?)?;
        if let Some(d) = dist[c] {
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, &p.receptacle));
            }
        }
    }
    best.map(|(_, r)| r.clone()).ok_or_else(|| {
        TaxonomyError::Unreachable(t.to_string(), m.resolve(g, &first.object).unwrap_or("").to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_and_identity() {
        let g = TaxonomyGraph::from_edges([("a", "x"), ("x", "b")]).unwrap();
        assert_eq!(taxonomy_distance(&g, "a", "a").unwrap(), 0);
        assert_eq!(taxonomy_distance(&g, "a", "b").unwrap(), 2);
        assert_eq!(taxonomy_distance(&g, "b", "a").unwrap(), 2);
    }

    #[test]
    fn disconnected_and_unknown() {
        let g = TaxonomyGraph::from_edges([("a", "b"), ("c", "d")]).unwrap();
        assert!(matches!(taxonomy_distance(&g, "a", "d"), Err(TaxonomyError::Unreachable(..))));
        assert!(matches!(taxonomy_distance(&g, "a", "z"), Err(TaxonomyError::UnknownConcept(_))));
    }

    #[test]
    fn self_loop_rejected() {
        assert!(matches!(
            TaxonomyGraph::from_edges([("a", "a")]),
            Err(TaxonomyError::SelfLoop(_))
        ));
    }
}
