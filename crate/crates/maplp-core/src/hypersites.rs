//! Set algebra over collections of hypersites (index subsets of the site
//! domain): frontier extraction, ancestry, the intersection closure of the
//! frontier, and the integer coefficients that drive the ortho-marginal
//! projection.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypersiteError {
    #[error("site indices must be strictly increasing and >= 1, got {0:?}")]
    NotStrictlyIncreasing(Vec<usize>),
    #[error("hypersite collection must be non-empty")]
    EmptyCollection,
    #[error("member {0} has no frontier superset")]
    NoFrontierAncestor(Hypersite),
}

/// A subset of the site domain, stored as strictly increasing 1-based
/// indices. The empty hypersite is allowed; its margin is the total sum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hypersite {
    sites: Vec<usize>,
}

impl Hypersite {
    pub fn new(sites: Vec<usize>) -> Result<Self, HypersiteError> {
        let ok = sites.windows(2).all(|w| w[0] < w[1]) && sites.first().is_none_or(|&s| s >= 1);
        if ok {
            Ok(Self { sites })
        } else {
            Err(HypersiteError::NotStrictlyIncreasing(sites))
        }
    }

    /// Builds from arbitrary order, rejecting duplicates.
    pub fn from_unsorted(mut sites: Vec<usize>) -> Result<Self, HypersiteError> {
        sites.sort_unstable();
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return Err(HypersiteError::NotStrictlyIncreasing(sites));
        }
        Self::new(sites)
    }

    pub fn empty() -> Self {
        Self { sites: Vec::new() }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn is_subset_of(&self, other: &Hypersite) -> bool {
        self.sites.iter().all(|&s| other.contains(s))
    }

    pub fn is_strict_subset_of(&self, other: &Hypersite) -> bool {
        self.len() < other.len() && self.is_subset_of(other)
    }

    pub fn intersection(&self, other: &Hypersite) -> Hypersite {
        Hypersite {
            sites: self.sites.iter().copied().filter(|&s| other.contains(s)).collect(),
        }
    }

    /// Sites of `self` not in `other`.
    pub fn difference(&self, other: &Hypersite) -> Hypersite {
        Hypersite {
            sites: self.sites.iter().copied().filter(|&s| !other.contains(s)).collect(),
        }
    }

    pub fn union(&self, other: &Hypersite) -> Hypersite {
        let mut sites: Vec<usize> = self.sites.iter().chain(other.sites.iter()).copied().collect();
        sites.sort_unstable();
        sites.dedup();
        Hypersite { sites }
    }

    /// Position of each of `self`'s sites inside `sup`'s sorted site list.
    /// Returns `None` unless `self` is a subset of `sup`.
    pub fn positions_in(&self, sup: &Hypersite) -> Option<Vec<usize>> {
        self.sites
            .iter()
            .map(|s| sup.sites.binary_search(s).ok())
            .collect()
    }

    pub fn max_site(&self) -> Option<usize> {
        self.sites.last().copied()
    }
}

impl fmt::Display for Hypersite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sites.is_empty() {
            return write!(f, "{{}}");
        }
        write!(f, "{{")?;
        for (i, s) in self.sites.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// An ordered collection of distinct hypersites. Canonical order is
/// lexicographic on the site lists (the empty hypersite sorts first), which
/// keeps every derived construction deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypersiteSet {
    members: Vec<Hypersite>,
}

impl HypersiteSet {
    pub fn from_members(mut members: Vec<Hypersite>) -> Self {
        members.sort();
        members.dedup();
        Self { members }
    }

    pub fn members(&self) -> &[Hypersite] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = &Hypersite> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, h: &Hypersite) -> bool {
        self.members.binary_search(h).is_ok()
    }

    /// The maximal members: those not strictly contained in another member.
    pub fn frontier(&self) -> Result<HypersiteSet, HypersiteError> {
        if self.members.is_empty() {
            return Err(HypersiteError::EmptyCollection);
        }
        let members = self
            .members
            .iter()
            .filter(|c| !self.members.iter().any(|t| c.is_strict_subset_of(t)))
            .cloned()
            .collect();
        Ok(HypersiteSet { members })
    }

    /// Maps each non-frontier member to its lexicographically smallest
    /// frontier superset. Frontier members are absent from the map.
    pub fn ancestry(&self) -> Result<BTreeMap<Hypersite, Hypersite>, HypersiteError> {
        let front = self.frontier()?;
        let mut map = BTreeMap::new();
        for c in &self.members {
            if front.contains(c) {
                continue;
            }
            // Frontier members are stored in lexicographic order, so the
            // first superset found is the smallest.
            let anc = front
                .iter()
                .find(|t| c.is_strict_subset_of(t))
                .cloned()
                .ok_or_else(|| HypersiteError::NoFrontierAncestor(c.clone()))?;
            map.insert(c.clone(), anc);
        }
        Ok(map)
    }

    /// Smallest collection containing the frontier, closed under pairwise
    /// intersection, with the empty hypersite always included.
    ///
    /// Built by the iterative seeding pass (intersect each new frontier
    /// member against everything collected so far), then driven to an
    /// explicit fixpoint; the closure property is therefore guaranteed by
    /// construction rather than by an argument about the pass order.
    pub fn frontier_closure(&self) -> Result<HypersiteSet, HypersiteError> {
        let front = self.frontier()?;
        let mut clos: Vec<Hypersite> = Vec::new();
        for c in front.iter() {
            let mut fresh: Vec<Hypersite> = Vec::new();
            for m in &clos {
                let i = m.intersection(c);
                if !i.is_empty() && !clos.contains(&i) && !fresh.contains(&i) {
                    fresh.push(i);
                }
            }
            clos.push(c.clone());
            clos.append(&mut fresh);
        }
        loop {
            let mut fresh: Vec<Hypersite> = Vec::new();
            for a in 0..clos.len() {
                for b in (a + 1)..clos.len() {
                    let i = clos[a].intersection(&clos[b]);
                    if !i.is_empty() && !clos.contains(&i) && !fresh.contains(&i) {
                        fresh.push(i);
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            clos.append(&mut fresh);
        }
        clos.push(Hypersite::empty());
        Ok(HypersiteSet::from_members(clos))
    }
}

impl fmt::Display for HypersiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// Integer coefficients of the ortho-marginal projection, one per member of
/// a frontier closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoMap {
    entries: BTreeMap<Hypersite, i64>,
}

impl RhoMap {
    pub fn get(&self, h: &Hypersite) -> Option<i64> {
        self.entries.get(h).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Hypersite, i64)> {
        self.entries.iter().map(|(h, &r)| (h, r))
    }
}

/// Coefficient recursion over a frontier closure: frontier members carry 1,
/// every other member c carries `1 - sum of coefficients of its strict
/// supersets`. Evaluated in decreasing-cardinality order (lexicographic
/// ties), which is well-founded because only strict supersets are read.
pub fn rho_coefficients(fclos: &HypersiteSet, frontier: &HypersiteSet) -> RhoMap {
    let mut order: Vec<&Hypersite> = fclos.iter().collect();
    order.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut entries: BTreeMap<Hypersite, i64> = BTreeMap::new();
    for c in order {
        let rho = if frontier.contains(c) {
            1
        } else {
            let covered: i64 = fclos
                .iter()
                .filter(|t| c.is_strict_subset_of(t))
                .map(|t| entries[t])
                .sum();
            1 - covered
        };
        entries.insert(c.clone(), rho);
    }
    RhoMap { entries }
}
