//! Combinatorial maps for oriented link projections on the 2-sphere.
//!
//! A projection is stored as a collection of connected 4-valent maps
//! (crossings + edges), a set of crossing-free loops, and a region structure
//! describing how all of those pieces nest on the sphere.
//!
//! Conventions, fixed once and used everywhere:
//!
//! * each crossing stores its four darts in counterclockwise rotational
//!   order, so `sigma(darts[k]) = darts[(k + 1) % 4]`;
//! * opposite slots `(0,2)` and `(1,3)` are the two strand passes through a
//!   crossing, and orientation-consistency requires each pass to consist of
//!   one head end and one tail end;
//! * the face walk steps with `face_next(d) = sigma_inverse(mate(d))`, and
//!   the face of dart `d` contains the wedge between `d` and `sigma(d)`;
//! * an edge's left side (travelling tail to head) is the face of its tail
//!   dart; its right side is the face of its head dart.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::ids::{CompKey, CrossingId, DartId, EdgeId, End, LoopId, RegionId, Side};
use crate::{Error, Result};

/// A 4-valent vertex. `darts[k]` is the dart in rotational slot `k`,
/// counterclockwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crossing {
    pub darts: [DartId; 4],
}

impl Crossing {
    /// Rotational slot of `d` at this crossing, if present.
    pub fn slot_of(&self, d: DartId) -> Option<u8> {
        self.darts.iter().position(|&x| x == d).map(|k| k as u8)
    }
}

/// An oriented edge, identified by its tail and head darts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub tail: DartId,
    pub head: DartId,
}

impl Edge {
    pub fn dart(&self, end: End) -> DartId {
        match end {
            End::Tail => self.tail,
            End::Head => self.head,
        }
    }
}

/// A crossing-free closed curve. Its two sides must lie in distinct region
/// classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopCircle {
    pub left: RegionId,
    pub right: RegionId,
}

impl LoopCircle {
    pub fn side(&self, s: Side) -> RegionId {
        match s {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    pub fn side_mut(&mut self, s: Side) -> &mut RegionId {
        match s {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }
}

/// Union-find table over region elements. Unions always attach the larger
/// root under the smaller one, so class representatives are stable and
/// deterministic.
#[derive(Debug, Clone, Default)]
pub struct RegionTable {
    parent: BTreeMap<RegionId, RegionId>,
    next: u32,
}

impl RegionTable {
    pub fn new() -> Self {
        RegionTable::default()
    }

    /// Allocate a fresh singleton class.
    pub fn fresh(&mut self) -> RegionId {
        let r = RegionId(self.next);
        self.next += 1;
        self.parent.insert(r, r);
        r
    }

    pub fn contains(&self, r: RegionId) -> bool {
        self.parent.contains_key(&r)
    }

    /// Class representative of `r`. Panics if `r` was never allocated.
    pub fn find(&self, r: RegionId) -> RegionId {
        let mut cur = r;
        loop {
            let p = *self
                .parent
                .get(&cur)
                .unwrap_or_else(|| panic!("region {cur:?} not in table"));
            if p == cur {
                return cur;
            }
            cur = p;
        }
    }

    pub fn same(&self, a: RegionId, b: RegionId) -> bool {
        self.find(a) == self.find(b)
    }

    /// Merge the classes of `a` and `b`; returns the surviving root.
    pub fn union(&mut self, a: RegionId, b: RegionId) -> RegionId {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return ra;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent.insert(hi, lo);
        lo
    }

    /// All class representatives currently in the table.
    pub fn roots(&self) -> BTreeSet<RegionId> {
        self.parent
            .iter()
            .filter(|(k, v)| k == v)
            .map(|(k, _)| *k)
            .collect()
    }

    /// Drop every element that is not reachable from `keep` roots; used by
    /// moves after they rewire region references. `keep` must be closed
    /// under `find` of every id still referenced by the projection.
    pub fn retain_roots(&mut self, keep: &BTreeSet<RegionId>) {
        let all_roots = self.roots();
        for r in all_roots {
            if !keep.contains(&r) {
                // Remove the whole chain that leads to this root.
                let members: Vec<RegionId> = self
                    .parent
                    .keys()
                    .copied()
                    .filter(|&m| self.find(m) == r)
                    .collect();
                for m in members {
                    self.parent.remove(&m);
                }
            }
        }
    }
}

/// Reference to a parent region in nesting declarations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParentRef {
    /// The base region of the sphere.
    Sphere,
    /// The inner side of a loop (the side away from the loop's own parent).
    LoopInner(LoopId),
    /// A face of a placed component, identified by component key and the
    /// smallest dart of the face.
    Face(CompKey, DartId),
}

/// Declarative description of one loop in a nesting specification.
#[derive(Debug, Clone, Copy)]
pub struct LoopSpec {
    pub parent: ParentRef,
    /// `true` means the loop's inner side is its left side.
    pub ccw: bool,
}

/// Declarative placement of one crossing-bearing component.
#[derive(Debug, Clone, Copy)]
pub struct PlaceSpec {
    pub parent: ParentRef,
    /// Face (by smallest dart) that opens toward the parent region.
    /// Defaults to the face with the smallest key.
    pub out_face: Option<DartId>,
}

/// Raw material for [`Projection::assemble`].
#[derive(Debug, Clone, Default)]
pub struct ProjectionSpec {
    pub crossings: BTreeMap<CrossingId, Crossing>,
    pub edges: BTreeMap<EdgeId, Edge>,
    pub loops: BTreeMap<LoopId, LoopSpec>,
    pub places: BTreeMap<CompKey, PlaceSpec>,
}

/// One face of a component: the orbit of `face_next`, rotated to start at
/// its smallest dart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub key: DartId,
    pub darts: Vec<DartId>,
}

/// Per-component bookkeeping computed by [`Projection::topology`].
#[derive(Debug, Clone)]
pub struct Component {
    pub key: CompKey,
    pub crossings: BTreeSet<CrossingId>,
    pub edges: BTreeSet<EdgeId>,
    /// Indices into `Topology::faces`.
    pub faces: Vec<usize>,
}

/// Derived lookup structure for the 4-valent part of a projection.
#[derive(Debug, Clone)]
pub struct Topology {
    sigma: BTreeMap<DartId, DartId>,
    sigma_inv: BTreeMap<DartId, DartId>,
    mate: BTreeMap<DartId, DartId>,
    dart_edge: BTreeMap<DartId, (EdgeId, End)>,
    dart_slot: BTreeMap<DartId, (CrossingId, u8)>,
    pub faces: Vec<Face>,
    face_idx: BTreeMap<DartId, usize>,
    pub components: BTreeMap<CompKey, Component>,
    comp_of_crossing: BTreeMap<CrossingId, CompKey>,
    /// Closed strand walks, as edge cycles; one per knotted curve that runs
    /// through crossings.
    pub strands: Vec<Vec<EdgeId>>,
    strand_of_edge: BTreeMap<EdgeId, usize>,
}

impl Topology {
    pub fn sigma(&self, d: DartId) -> DartId {
        self.sigma[&d]
    }

    pub fn sigma_inv(&self, d: DartId) -> DartId {
        self.sigma_inv[&d]
    }

    /// The dart at the other end of `d`'s edge.
    pub fn mate(&self, d: DartId) -> DartId {
        self.mate[&d]
    }

    /// Next dart along the boundary walk of `d`'s face.
    pub fn face_next(&self, d: DartId) -> DartId {
        self.sigma_inv[&self.mate[&d]]
    }

    pub fn edge_of(&self, d: DartId) -> (EdgeId, End) {
        self.dart_edge[&d]
    }

    pub fn crossing_of(&self, d: DartId) -> (CrossingId, u8) {
        self.dart_slot[&d]
    }

    /// Whether the dart is a head end.
    pub fn is_head(&self, d: DartId) -> bool {
        self.dart_edge[&d].1 == End::Head
    }

    pub fn face_index_of(&self, d: DartId) -> usize {
        self.face_idx[&d]
    }

    pub fn face_of(&self, d: DartId) -> &Face {
        &self.faces[self.face_idx[&d]]
    }

    pub fn component_of(&self, c: CrossingId) -> CompKey {
        self.comp_of_crossing[&c]
    }

    pub fn strand_of(&self, e: EdgeId) -> usize {
        self.strand_of_edge[&e]
    }
}

/// Optional over/under decoration: for each crossing, which strand pass is
/// on top. `0` means the pass through slots (0,2); `1` the pass through
/// slots (1,3).
pub type OverMap = BTreeMap<CrossingId, u8>;

/// A diagram is a projection together with over/under decorations.
#[derive(Debug, Clone)]
pub struct Diagram {
    pub projection: Projection,
    pub over: OverMap,
}

impl Diagram {
    pub fn validate(&self) -> Result<()> {
        self.projection.validate()?;
        let pk: BTreeSet<_> = self.projection.crossings.keys().copied().collect();
        let ok: BTreeSet<_> = self.over.keys().copied().collect();
        if pk != ok {
            return Err(Error::Invalid(
                "over/under decorations do not cover exactly the crossings".into(),
            ));
        }
        if let Some((c, s)) = self.over.iter().find(|(_, &s)| s > 1) {
            return Err(Error::Invalid(format!(
                "crossing {c} has invalid over slot {s}"
            )));
        }
        Ok(())
    }
}

/// An oriented link projection on the 2-sphere.
#[derive(Debug, Clone)]
pub struct Projection {
    pub crossings: BTreeMap<CrossingId, Crossing>,
    pub edges: BTreeMap<EdgeId, Edge>,
    pub loops: BTreeMap<LoopId, LoopCircle>,
    /// Region element of each dart's face. All darts of one face carry the
    /// same element.
    pub face_region: BTreeMap<DartId, RegionId>,
    /// The base region of the sphere (root of the nesting tree).
    pub base: RegionId,
    pub regions: RegionTable,
    next_dart: u32,
    next_crossing: u32,
    next_edge: u32,
    next_loop: u32,
}

impl Projection {
    /// The empty projection: a bare sphere.
    pub fn empty() -> Projection {
        let mut regions = RegionTable::new();
        let base = regions.fresh();
        Projection {
            crossings: BTreeMap::new(),
            edges: BTreeMap::new(),
            loops: BTreeMap::new(),
            face_region: BTreeMap::new(),
            base,
            regions,
            next_dart: 0,
            next_crossing: 0,
            next_edge: 0,
            next_loop: 0,
        }
    }

    pub fn fresh_dart(&mut self) -> DartId {
        let d = DartId(self.next_dart);
        self.next_dart += 1;
        d
    }

    pub fn fresh_crossing(&mut self) -> CrossingId {
        let c = CrossingId(self.next_crossing);
        self.next_crossing += 1;
        c
    }

    pub fn fresh_edge(&mut self) -> EdgeId {
        let e = EdgeId(self.next_edge);
        self.next_edge += 1;
        e
    }

    pub fn fresh_loop(&mut self) -> LoopId {
        let l = LoopId(self.next_loop);
        self.next_loop += 1;
        l
    }

    /// Bump the fresh-id counters above everything currently present.
    pub fn sync_counters(&mut self) {
        self.next_crossing = self.crossings.keys().map(|c| c.0 + 1).max().unwrap_or(0);
        self.next_edge = self.edges.keys().map(|e| e.0 + 1).max().unwrap_or(0);
        self.next_loop = self.loops.keys().map(|l| l.0 + 1).max().unwrap_or(0);
        self.next_dart = self
            .crossings
            .values()
            .flat_map(|c| c.darts.iter())
            .map(|d| d.0 + 1)
            .max()
            .unwrap_or(0);
    }

    /// Total number of closed curves: strand walks plus free loops.
    pub fn strand_count(&self) -> Result<usize> {
        Ok(self.topology()?.strands.len() + self.loops.len())
    }

    /// Left and right region classes of an edge.
    pub fn edge_sides(&self, e: EdgeId) -> (RegionId, RegionId) {
        let edge = &self.edges[&e];
        (
            self.regions.find(self.face_region[&edge.tail]),
            self.regions.find(self.face_region[&edge.head]),
        )
    }

    /// Build the derived topology tables. Fails when the raw structure is
    /// not a well-formed collection of 4-valent maps.
    pub fn topology(&self) -> Result<Topology> {
        let mut sigma = BTreeMap::new();
        let mut sigma_inv = BTreeMap::new();
        let mut dart_slot = BTreeMap::new();
        for (&cid, cr) in &self.crossings {
            let ds = cr.darts;
            let distinct: BTreeSet<_> = ds.iter().collect();
            if distinct.len() != 4 {
                return Err(Error::Invalid(format!(
                    "crossing {cid} repeats a dart in its rotation"
                )));
            }
            for k in 0..4 {
                if dart_slot.insert(ds[k], (cid, k as u8)).is_some() {
                    return Err(Error::Invalid(format!(
                        "dart {} appears at more than one crossing",
                        ds[k]
                    )));
                }
                sigma.insert(ds[k], ds[(k + 1) % 4]);
                sigma_inv.insert(ds[(k + 1) % 4], ds[k]);
            }
        }

        let mut mate = BTreeMap::new();
        let mut dart_edge = BTreeMap::new();
        for (&eid, edge) in &self.edges {
            if edge.tail == edge.head {
                return Err(Error::Invalid(format!(
                    "edge {eid} has identical tail and head darts"
                )));
            }
            for (d, end) in [(edge.tail, End::Tail), (edge.head, End::Head)] {
                if dart_edge.insert(d, (eid, end)).is_some() {
                    return Err(Error::Invalid(format!(
                        "dart {d} is an end of more than one edge"
                    )));
                }
                if !dart_slot.contains_key(&d) {
                    return Err(Error::Invalid(format!(
                        "edge {eid} references dart {d} that sits at no crossing"
                    )));
                }
            }
            mate.insert(edge.tail, edge.head);
            mate.insert(edge.head, edge.tail);
        }
        for d in dart_slot.keys() {
            if !dart_edge.contains_key(d) {
                return Err(Error::Invalid(format!(
                    "dart {d} sits at a crossing but is not an edge end"
                )));
            }
        }

        // Orientation consistency: each strand pass (opposite slots) has one
        // head and one tail.
        for (&cid, cr) in &self.crossings {
            for k in 0..2 {
                let a = dart_edge[&cr.darts[k]].1;
                let b = dart_edge[&cr.darts[k + 2]].1;
                if a == b {
                    return Err(Error::Invalid(format!(
                        "crossing {cid} has an incoherently oriented strand pass"
                    )));
                }
            }
        }

        // Faces: orbits of face_next.
        let mut faces: Vec<Face> = Vec::new();
        let mut face_idx = BTreeMap::new();
        for &start in dart_slot.keys() {
            if face_idx.contains_key(&start) {
                continue;
            }
            let mut walk = vec![start];
            let mut cur = sigma_inv[&mate[&start]];
            while cur != start {
                if face_idx.contains_key(&cur) || walk.contains(&cur) && cur != start {
                    if walk.contains(&cur) {
                        break; // will error below via coverage check
                    }
                    break;
                }
                walk.push(cur);
                cur = sigma_inv[&mate[&cur]];
            }
            // Rotate to smallest dart.
            let min_pos = walk
                .iter()
                .enumerate()
                .min_by_key(|(_, d)| **d)
                .map(|(i, _)| i)
                .unwrap();
            walk.rotate_left(min_pos);
            let idx = faces.len();
            for &d in &walk {
                face_idx.insert(d, idx);
            }
            faces.push(Face {
                key: walk[0],
                darts: walk,
            });
        }
        faces.sort_by_key(|f| f.key);
        let mut face_idx = BTreeMap::new();
        for (i, f) in faces.iter().enumerate() {
            for &d in &f.darts {
                face_idx.insert(d, i);
            }
        }

        // Components of the 4-valent part.
        let mut comp_of_crossing: BTreeMap<CrossingId, CompKey> = BTreeMap::new();
        for &start in self.crossings.keys() {
            if comp_of_crossing.contains_key(&start) {
                continue;
            }
            let mut seen = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            seen.insert(start);
            while let Some(c) = queue.pop_front() {
                for &d in &self.crossings[&c].darts {
                    let (nc, _) = dart_slot[&mate[&d]];
                    if seen.insert(nc) {
                        queue.push_back(nc);
                    }
                }
            }
            let key = *seen.iter().next().unwrap();
            for c in seen {
                comp_of_crossing.insert(c, key);
            }
        }
        let mut components: BTreeMap<CompKey, Component> = BTreeMap::new();
        for (&c, &key) in &comp_of_crossing {
            components
                .entry(key)
                .or_insert_with(|| Component {
                    key,
                    crossings: BTreeSet::new(),
                    edges: BTreeSet::new(),
                    faces: Vec::new(),
                })
                .crossings
                .insert(c);
        }
        for (&eid, edge) in &self.edges {
            let key = comp_of_crossing[&dart_slot[&edge.tail].0];
            components.get_mut(&key).unwrap().edges.insert(eid);
        }
        for (i, f) in faces.iter().enumerate() {
            let key = comp_of_crossing[&dart_slot[&f.key].0];
            components.get_mut(&key).unwrap().faces.push(i);
        }

        // Strand walks: follow edges straight through crossings.
        let mut strands: Vec<Vec<EdgeId>> = Vec::new();
        let mut strand_of_edge = BTreeMap::new();
        for &start in self.edges.keys() {
            if strand_of_edge.contains_key(&start) {
                continue;
            }
            let idx = strands.len();
            let mut cycle = Vec::new();
            let mut cur = start;
            loop {
                cycle.push(cur);
                strand_of_edge.insert(cur, idx);
                let head = self.edges[&cur].head;
                let (c, k) = dart_slot[&head];
                let out = self.crossings[&c].darts[((k + 2) % 4) as usize];
                let (ne, end) = dart_edge[&out];
                debug_assert_eq!(end, End::Tail);
                cur = ne;
                if cur == start {
                    break;
                }
            }
            strands.push(cycle);
        }

        Ok(Topology {
            sigma,
            sigma_inv,
            mate,
            dart_edge,
            dart_slot,
            faces,
            face_idx,
            components,
            comp_of_crossing,
            strands,
            strand_of_edge,
        })
    }

    /// Full structural validation: 4-valent map well-formedness, orientation
    /// consistency, per-component Euler counts, region coherence, and the
    /// global requirement that regions and objects form a tree.
    pub fn validate(&self) -> Result<ValidationReport> {
        let topo = self.topology()?;

        // face_region covers exactly the darts, orbit-consistently.
        let darts: BTreeSet<DartId> = self
            .crossings
            .values()
            .flat_map(|c| c.darts.iter().copied())
            .collect();
        let covered: BTreeSet<DartId> = self.face_region.keys().copied().collect();
        if darts != covered {
            return Err(Error::Invalid(
                "face_region does not cover exactly the darts of the projection".into(),
            ));
        }
        for r in self.face_region.values() {
            if !self.regions.contains(*r) {
                return Err(Error::Invalid(format!(
                    "face_region references unknown region element {r}"
                )));
            }
        }
        for f in &topo.faces {
            let classes: BTreeSet<RegionId> = f
                .darts
                .iter()
                .map(|d| self.regions.find(self.face_region[d]))
                .collect();
            if classes.len() != 1 {
                return Err(Error::Invalid(format!(
                    "face {} maps to several region classes",
                    f.key
                )));
            }
        }
        if !self.regions.contains(self.base) {
            return Err(Error::Invalid("base region missing from table".into()));
        }
        for (&l, lp) in &self.loops {
            if !self.regions.contains(lp.left) || !self.regions.contains(lp.right) {
                return Err(Error::Invalid(format!(
                    "loop {l} references unknown region element"
                )));
            }
            if self.regions.same(lp.left, lp.right) {
                return Err(Error::Invalid(format!(
                    "loop {l} has the same region class on both sides"
                )));
            }
        }

        // Per-component Euler characteristic must be 2 (each component is a
        // map on its own sphere).
        for comp in topo.components.values() {
            let v = comp.crossings.len() as i64;
            let e = comp.edges.len() as i64;
            let f = comp.faces.len() as i64;
            if v - e + f != 2 {
                return Err(Error::Invalid(format!(
                    "component {} fails the sphere count: V={v} E={e} F={f}",
                    comp.key
                )));
            }
        }

        // Incidence graph between region classes and objects must be a tree.
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
        enum Node {
            Region(RegionId),
            Comp(CompKey),
            Loop(LoopId),
        }
        let mut nodes: BTreeSet<Node> = self.regions.roots().into_iter().map(Node::Region).collect();
        let mut edges_ix: Vec<(Node, Node)> = Vec::new();
        for comp in topo.components.values() {
            nodes.insert(Node::Comp(comp.key));
            let mut seen = BTreeSet::new();
            for &fi in &comp.faces {
                let class = self.regions.find(self.face_region[&topo.faces[fi].key]);
                if !seen.insert(class) {
                    return Err(Error::Invalid(format!(
                        "component {} touches region class {class} with two faces",
                        comp.key
                    )));
                }
                edges_ix.push((Node::Comp(comp.key), Node::Region(class)));
            }
        }
        for (&l, lp) in &self.loops {
            nodes.insert(Node::Loop(l));
            edges_ix.push((Node::Loop(l), Node::Region(self.regions.find(lp.left))));
            edges_ix.push((Node::Loop(l), Node::Region(self.regions.find(lp.right))));
        }
        if edges_ix.len() + 1 != nodes.len() {
            return Err(Error::Invalid(format!(
                "region nesting is not a tree: {} incidences over {} nodes",
                edges_ix.len(),
                nodes.len()
            )));
        }
        // Connectivity.
        let mut adj: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
        for &(a, b) in &edges_ix {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let mut seen = BTreeSet::new();
        let start = Node::Region(self.regions.find(self.base));
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(n) = queue.pop_front() {
            for &m in adj.get(&n).into_iter().flatten() {
                if seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        if seen.len() != nodes.len() {
            return Err(Error::Invalid(
                "region nesting is not connected (orphan region or object)".into(),
            ));
        }

        Ok(ValidationReport {
            components: topo
                .components
                .values()
                .map(|c| ComponentReport {
                    key: c.key,
                    crossings: c.crossings.len(),
                    edges: c.edges.len(),
                    faces: c.faces.len(),
                })
                .collect(),
            strands: topo.strands.len(),
            free_loops: self.loops.len(),
            region_classes: self.regions.roots().len(),
        })
    }

    /// Build a projection from raw parts plus nesting declarations. This is
    /// the single construction path used by the text codec; it allocates all
    /// region elements, applies the declared placements, and validates.
    pub fn assemble(spec: ProjectionSpec) -> Result<Projection> {
        let mut proj = Projection {
            crossings: spec.crossings,
            edges: spec.edges,
            loops: BTreeMap::new(),
            face_region: BTreeMap::new(),
            base: RegionId(0),
            regions: RegionTable::new(),
            next_dart: 0,
            next_crossing: 0,
            next_edge: 0,
            next_loop: 0,
        };
        proj.base = proj.regions.fresh();
        let topo = proj.topology()?;

        // Every component must be placed; no stray placements.
        let comp_keys: BTreeSet<CompKey> = topo.components.keys().copied().collect();
        let placed: BTreeSet<CompKey> = spec.places.keys().copied().collect();
        if comp_keys != placed {
            return Err(Error::Invalid(format!(
                "placements {:?} do not match components {:?}",
                placed, comp_keys
            )));
        }

        // Allocate face regions per component, in deterministic order.
        for comp in topo.components.values() {
            for &fi in &comp.faces {
                let r = proj.regions.fresh();
                for &d in &topo.faces[fi].darts {
                    proj.face_region.insert(d, r);
                }
            }
        }
        // Allocate loop sides.
        for (&lid, ls) in &spec.loops {
            let left = proj.regions.fresh();
            let right = proj.regions.fresh();
            proj.loops.insert(lid, LoopCircle { left, right });
            let _ = ls;
        }

        // Resolve a parent reference to a region element.
        let resolve = |proj: &Projection, p: ParentRef| -> Result<RegionId> {
            match p {
                ParentRef::Sphere => Ok(proj.base),
                ParentRef::LoopInner(l) => {
                    let lp = proj
                        .loops
                        .get(&l)
                        .ok_or_else(|| Error::Invalid(format!("unknown parent loop {l}")))?;
                    let ccw = spec.loops[&l].ccw;
                    Ok(if ccw { lp.left } else { lp.right })
                }
                ParentRef::Face(comp, fkey) => {
                    let c = topo
                        .components
                        .get(&comp)
                        .ok_or_else(|| Error::Invalid(format!("unknown parent component {comp}")))?;
                    let fi = c
                        .faces
                        .iter()
                        .copied()
                        .find(|&fi| topo.faces[fi].key == fkey)
                        .ok_or_else(|| {
                            Error::Invalid(format!(
                                "component {comp} has no face keyed by dart {fkey}"
                            ))
                        })?;
                    Ok(proj.face_region[&topo.faces[fi].key])
                }
            }
        };

        // Apply loop placements: outward side joins the parent region.
        for (&lid, ls) in &spec.loops {
            let parent = resolve(&proj, ls.parent)?;
            let outward = if ls.ccw {
                proj.loops[&lid].right
            } else {
                proj.loops[&lid].left
            };
            proj.regions.union(outward, parent);
        }
        // Apply component placements.
        for (&key, pl) in &spec.places {
            let comp = &topo.components[&key];
            let out_key = match pl.out_face {
                Some(k) => k,
                None => comp
                    .faces
                    .iter()
                    .map(|&fi| topo.faces[fi].key)
                    .min()
                    .unwrap(),
            };
            let fi = comp
                .faces
                .iter()
                .copied()
                .find(|&fi| topo.faces[fi].key == out_key)
                .ok_or_else(|| {
                    Error::Invalid(format!(
                        "component {key} has no face keyed by dart {out_key}"
                    ))
                })?;
            let parent = resolve(&proj, pl.parent)?;
            let out_region = proj.face_region[&topo.faces[fi].key];
            proj.regions.union(out_region, parent);
        }

        proj.sync_counters();
        proj.validate()?;
        Ok(proj)
    }

    /// Drop region elements that nothing references any more. Useful after
    /// moves that rewrote `face_region` or loop sides.
    pub fn gc_regions(&mut self) {
        let mut keep: BTreeSet<RegionId> = BTreeSet::new();
        keep.insert(self.regions.find(self.base));
        for r in self.face_region.values() {
            keep.insert(self.regions.find(*r));
        }
        for lp in self.loops.values() {
            keep.insert(self.regions.find(lp.left));
            keep.insert(self.regions.find(lp.right));
        }
        self.regions.retain_roots(&keep);
    }
}

/// Summary statistics produced by [`Projection::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub components: Vec<ComponentReport>,
    pub strands: usize,
    pub free_loops: usize,
    pub region_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentReport {
    pub key: CompKey,
    pub crossings: usize,
    pub edges: usize,
    pub faces: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: u32) -> DartId {
        DartId(n)
    }

    /// Figure-eight curl: one crossing, two one-edge lobes.
    pub(crate) fn curl() -> Projection {
        let mut spec = ProjectionSpec::default();
        spec.crossings.insert(
            CrossingId(0),
            Crossing {
                darts: [d(0), d(1), d(2), d(3)],
            },
        );
        spec.edges.insert(EdgeId(0), Edge { tail: d(1), head: d(0) });
        spec.edges.insert(EdgeId(1), Edge { tail: d(2), head: d(3) });
        spec.places.insert(
            CrossingId(0),
            PlaceSpec {
                parent: ParentRef::Sphere,
                out_face: Some(d(1)),
            },
        );
        Projection::assemble(spec).unwrap()
    }

    /// Standard trefoil shadow: 3 crossings, inner 3-gon of tails.
    pub(crate) fn trefoil() -> Projection {
        let mut spec = ProjectionSpec::default();
        for j in 0..3u32 {
            spec.crossings.insert(
                CrossingId(j),
                Crossing {
                    darts: [d(4 * j), d(4 * j + 1), d(4 * j + 2), d(4 * j + 3)],
                },
            );
        }
        let edges = [(3, 4), (7, 8), (11, 0), (2, 5), (6, 9), (10, 1)];
        for (i, (t, h)) in edges.into_iter().enumerate() {
            spec.edges.insert(EdgeId(i as u32), Edge { tail: d(t), head: d(h) });
        }
        spec.places.insert(
            CrossingId(0),
            PlaceSpec {
                parent: ParentRef::Sphere,
                out_face: Some(d(1)),
            },
        );
        Projection::assemble(spec).unwrap()
    }

    /// Two circles crossing twice with a coherent (antiparallel) lens.
    pub(crate) fn hopf() -> Projection {
        let mut spec = ProjectionSpec::default();
        spec.crossings.insert(CrossingId(0), Crossing { darts: [d(0), d(1), d(2), d(3)] });
        spec.crossings.insert(CrossingId(1), Crossing { darts: [d(4), d(5), d(6), d(7)] });
        let edges = [(0, 4), (6, 2), (7, 1), (3, 5)];
        for (i, (t, h)) in edges.into_iter().enumerate() {
            spec.edges.insert(EdgeId(i as u32), Edge { tail: d(t), head: d(h) });
        }
        spec.places.insert(
            CrossingId(0),
            PlaceSpec {
                parent: ParentRef::Sphere,
                out_face: Some(d(0)),
            },
        );
        Projection::assemble(spec).unwrap()
    }

    #[test]
    fn empty_projection_is_valid() {
        let p = Projection::empty();
        let rep = p.validate().unwrap();
        assert_eq!(rep.strands, 0);
        assert_eq!(rep.region_classes, 1);
    }

    #[test]
    fn single_loop_is_valid() {
        let mut p = Projection::empty();
        let l = p.fresh_loop();
        let inner = p.regions.fresh();
        p.loops.insert(l, LoopCircle { left: inner, right: p.base });
        let rep = p.validate().unwrap();
        assert_eq!(rep.free_loops, 1);
        assert_eq!(rep.region_classes, 2);
    }

    #[test]
    fn curl_shape() {
        let p = curl();
        let topo = p.topology().unwrap();
        let shapes: Vec<Vec<DartId>> = topo.faces.iter().map(|f| f.darts.clone()).collect();
        assert_eq!(shapes, vec![vec![d(0)], vec![d(1), d(3)], vec![d(2)]]);
        assert_eq!(topo.strands.len(), 1);
        let rep = p.validate().unwrap();
        assert_eq!(rep.region_classes, 3);
    }

    #[test]
    fn trefoil_shape() {
        let p = trefoil();
        let topo = p.topology().unwrap();
        assert_eq!(topo.faces.len(), 5);
        assert_eq!(topo.strands.len(), 1);
        assert_eq!(topo.components.len(), 1);
        // Inner gon and outer face.
        let keys: Vec<DartId> = topo.faces.iter().map(|f| f.key).collect();
        assert!(keys.contains(&d(3)) || keys.contains(&d(1)));
        let inner = topo.face_of(d(3));
        assert_eq!(inner.darts.len(), 3);
        p.validate().unwrap();
    }

    #[test]
    fn hopf_shape() {
        let p = hopf();
        let topo = p.topology().unwrap();
        assert_eq!(topo.faces.len(), 4);
        assert_eq!(topo.strands.len(), 2);
        p.validate().unwrap();
    }

    #[test]
    fn bad_orientation_rejected() {
        let mut spec = ProjectionSpec::default();
        spec.crossings.insert(
            CrossingId(0),
            Crossing {
                darts: [d(0), d(1), d(2), d(3)],
            },
        );
        // Both passes tail-tail / head-head.
        spec.edges.insert(EdgeId(0), Edge { tail: d(0), head: d(1) });
        spec.edges.insert(EdgeId(1), Edge { tail: d(2), head: d(3) });
        spec.places.insert(
            CrossingId(0),
            PlaceSpec {
                parent: ParentRef::Sphere,
                out_face: None,
            },
        );
        assert!(Projection::assemble(spec).is_err());
    }

    #[test]
    fn nested_loops() {
        let mut spec = ProjectionSpec::default();
        spec.loops.insert(
            LoopId(0),
            LoopSpec {
                parent: ParentRef::Sphere,
                ccw: true,
            },
        );
        spec.loops.insert(
            LoopId(1),
            LoopSpec {
                parent: ParentRef::LoopInner(LoopId(0)),
                ccw: false,
            },
        );
        let p = Projection::assemble(spec).unwrap();
        let rep = p.validate().unwrap();
        assert_eq!(rep.region_classes, 3);
        // Loop 1's outward side is its left (cw), and it must share the
        // class of loop 0's inner (left) side.
        assert!(p
            .regions
            .same(p.loops[&LoopId(1)].left, p.loops[&LoopId(0)].left));
    }
}
