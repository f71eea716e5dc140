//! Region abstraction of the product chain: signatures, the region graph,
//! its bottom strongly connected components and their cyclic structure.

use crate::dta::{Dta, Edge, Guard, Relation};
use crate::error::{Error, Result};
use crate::product::{Product, ProductState};
use crate::scalar::{ClockScalar, Rational};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

/// Per-clock part of a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClockRegion {
    /// Value exceeds `B_max`.
    Irrelevant,
    /// Value is exactly this integer.
    Int(u32),
    /// Value lies strictly between `k` and `k + 1`.
    Frac(u32),
}

impl ClockRegion {
    pub fn is_relevant(self) -> bool {
        !matches!(self, ClockRegion::Irrelevant)
    }
}

/// Canonical name of a region `(s, q, [ν])`.
///
/// `order` lists the relevant non-integer clocks in blocks of equal
/// fractional part, blocks ascending, clocks ascending within a block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionSignature {
    pub state: usize,
    pub location: usize,
    pub clocks: Vec<ClockRegion>,
    pub order: Vec<Vec<usize>>,
}

pub fn region_of<T: ClockScalar>(
    state: usize,
    location: usize,
    valuation: &[T],
    b_max: u32,
) -> RegionSignature {
    let bound = T::from_nat(b_max);
    let clocks: Vec<ClockRegion> = valuation
        .iter()
        .map(|&v| {
            if v > bound {
                ClockRegion::Irrelevant
            } else if v.is_integer() {
                ClockRegion::Int(v.int_part())
            } else {
                ClockRegion::Frac(v.int_part())
            }
        })
        .collect();
    let mut fractional: Vec<usize> = (0..clocks.len())
        .filter(|&i| matches!(clocks[i], ClockRegion::Frac(_)))
        .collect();
    fractional.sort_by(|&a, &b| valuation[a].frac_cmp(valuation[b]).then(a.cmp(&b)));
    let mut order: Vec<Vec<usize>> = Vec::new();
    for i in fractional {
        match order.last_mut() {
            Some(block) if valuation[block[0]].frac_cmp(valuation[i]) == Ordering::Equal => {
                block.push(i)
            }
            _ => order.push(vec![i]),
        }
    }
    RegionSignature {
        state,
        location,
        clocks,
        order,
    }
}

impl RegionSignature {
    pub fn of(z: &ProductState, b_max: u32) -> Self {
        region_of(z.state, z.location, &z.valuation, b_max)
    }

    /// An exact member of the region: fractional blocks sit at
    /// `1/(r+1), ..., r/(r+1)` and irrelevant clocks at `B_max + 1`.
    pub fn representative(&self, b_max: u32) -> Vec<Rational> {
        let r = self.order.len() as i64;
        let mut v: Vec<Rational> = self
            .clocks
            .iter()
            .map(|c| match *c {
                ClockRegion::Irrelevant => Rational::from_integer(b_max as i64 + 1),
                ClockRegion::Int(k) | ClockRegion::Frac(k) => Rational::from_integer(k as i64),
            })
            .collect();
        for (j, block) in self.order.iter().enumerate() {
            for &c in block {
                v[c] += Rational::new(j as i64 + 1, r + 1);
            }
        }
        v
    }

    /// Whether a concrete valuation of `(state, location)` lies in this region.
    pub fn contains<T: ClockScalar>(
        &self,
        state: usize,
        location: usize,
        valuation: &[T],
        b_max: u32,
    ) -> bool {
        region_of(state, location, valuation, b_max) == *self
    }

    /// Compact form `s|q|x:0.f|x<y=z` for display and DOT labels.
    pub fn label(&self, smp_states: &[String], dta: &Dta) -> String {
        let clocks = dta.clocks();
        let parts: Vec<String> = self
            .clocks
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                ClockRegion::Irrelevant => format!("{}:>", clocks[i]),
                ClockRegion::Int(k) => format!("{}:{k}.i", clocks[i]),
                ClockRegion::Frac(k) => format!("{}:{k}.f", clocks[i]),
            })
            .collect();
        let order: Vec<String> = self
            .order
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&c| clocks[c].as_str())
                    .collect::<Vec<_>>()
                    .join("=")
            })
            .collect();
        format!(
            "{}|{}|{}|{}",
            smp_states[self.state],
            dta.locations()[self.location],
            parts.join(","),
            order.join("<")
        )
    }
}

/// Successor regions of `r` together with the clocks reset by its read step.
fn successors_with_resets(
    r: &RegionSignature,
    product: &Product,
) -> Result<(Vec<usize>, Vec<RegionSignature>)> {
    let b_max = product.dta.b_max();
    let rep = r.representative(b_max);
    let read = product.read_phase(r.state, r.location, &rep)?;
    let bound = Rational::from_integer(b_max as i64);
    let mut out = BTreeSet::new();
    for (target, _, density) in product.smp.successors(r.state) {
        let (lo, hi) = density.support();
        let lo = Rational::from_integer(lo as i64);
        let hi = hi.map(|h| Rational::from_integer(h as i64));
        let inside = |t: Rational| t > lo && hi.is_none_or(|h| t < h);
        let mut points = vec![lo];
        for &v in &read.valuation {
            if v > bound {
                continue;
            }
            let mut k = v.floor() + 1;
            while k <= bound {
                let t = k - v;
                if inside(t) {
                    points.push(t);
                }
                k += 1;
            }
        }
        if let Some(h) = hi {
            points.push(h);
        }
        points.sort();
        points.dedup();
        let mut samples: Vec<Rational> = points.windows(2).map(|w| (w[0] + w[1]) / 2).collect();
        if hi.is_none() {
            samples.push(*points.last().expect("support start present") + 1);
        }
        for t in samples {
            let v: Vec<Rational> = read.valuation.iter().map(|x| *x + t).collect();
            out.insert(region_of(target, read.location, &v, b_max));
        }
    }
    Ok((read.resets, out.into_iter().collect()))
}

/// Regions entered with positive probability from any member of `r`.
pub fn region_successors(r: &RegionSignature, product: &Product) -> Result<Vec<RegionSignature>> {
    successors_with_resets(r, product).map(|(_, s)| s)
}

/// The regions reachable with positive probability, in discovery order.
#[derive(Debug, Clone)]
pub struct RegionGraph {
    pub vertices: Vec<RegionSignature>,
    pub successors: Vec<Vec<usize>>,
    /// Clocks reset when the automaton reads from each vertex.
    pub resets: Vec<Vec<usize>>,
    pub initial: Vec<usize>,
    pub b_max: u32,
    index: HashMap<RegionSignature, usize>,
}

impl RegionGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, r: &RegionSignature) -> Option<usize> {
        self.index.get(r).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    /// Graphviz rendering; BSCC members are filled and tagged with their class.
    pub fn to_dot(&self, dec: &BsccDecomposition, smp_states: &[String], dta: &Dta) -> String {
        const COLORS: [&str; 8] = [
            "lightblue",
            "palegreen",
            "lightsalmon",
            "khaki",
            "plum",
            "lightcyan",
            "pink",
            "wheat",
        ];
        let mut s =
            String::from("digraph regions {\n  node [shape=box, fontname=\"monospace\"];\n");
        for (i, r) in self.vertices.iter().enumerate() {
            let label = r.label(smp_states, dta).replace('"', "\\\"");
            let _ = write!(s, "  v{i} [label=\"{label}\"");
            if let Some(j) = dec.membership[i] {
                let b = &dec.bsccs[j];
                let class = b.class_of(i).unwrap_or(0);
                let _ = write!(
                    s,
                    ", style=filled, fillcolor={}, xlabel=\"B{j}/V{class}\"",
                    COLORS[j % COLORS.len()]
                );
            }
            if self.initial.contains(&i) {
                s.push_str(", peripheries=2");
            }
            s.push_str("];\n");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(s, "  v{u} -> v{v};");
        }
        s.push_str("}\n");
        s
    }
}

/// Breadth-first closure of the initial regions under [`region_successors`].
pub fn build_region_graph(product: &Product) -> Result<RegionGraph> {
    let b_max = product.dta.b_max();
    let mut g = RegionGraph {
        vertices: Vec::new(),
        successors: Vec::new(),
        resets: Vec::new(),
        initial: Vec::new(),
        b_max,
        index: HashMap::new(),
    };
    let mut queue = VecDeque::new();
    let n = product.num_clocks();
    for (z, _) in product.initial_states() {
        let r = region_of(
            z.state,
            z.location,
            &vec![Rational::from_integer(0); n],
            b_max,
        );
        if !g.index.contains_key(&r) {
            g.index.insert(r.clone(), g.vertices.len());
            g.initial.push(g.vertices.len());
            queue.push_back(g.vertices.len());
            g.vertices.push(r);
        }
    }
    if g.vertices.is_empty() {
        return Err(Error::DegenerateModel(
            "initial distribution has no positive mass".into(),
        ));
    }
    while let Some(u) = queue.pop_front() {
        let (resets, succ) = successors_with_resets(&g.vertices[u], product)?;
        let mut ids = Vec::with_capacity(succ.len());
        for r in succ {
            let id = match g.index.get(&r) {
                Some(&id) => id,
                None => {
                    let id = g.vertices.len();
                    g.index.insert(r.clone(), id);
                    g.vertices.push(r);
                    queue.push_back(id);
                    id
                }
            };
            ids.push(id);
        }
        ids.sort_unstable();
        ids.dedup();
        if g.successors.len() <= u {
            g.successors.resize(u + 1, Vec::new());
            g.resets.resize(u + 1, Vec::new());
        }
        g.successors[u] = ids;
        g.resets[u] = resets;
    }
    Ok(g)
}

/// A bottom strongly connected component with its cyclic decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Bscc {
    /// Vertex indices, ascending.
    pub vertices: Vec<usize>,
    pub period: usize,
    /// `classes[k]` is `V_k`; every edge goes `V_k -> V_{(k+1) mod p}`.
    pub classes: Vec<Vec<usize>>,
    /// Clocks never reset by any read inside the component.
    pub growing_clocks: Vec<usize>,
    class: HashMap<usize, usize>,
}

impl Bscc {
    pub fn class_of(&self, v: usize) -> Option<usize> {
        self.class.get(&v).copied()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.class.contains_key(&v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsccDecomposition {
    pub bsccs: Vec<Bscc>,
    /// BSCC index of each vertex, `None` for transient vertices.
    pub membership: Vec<Option<usize>>,
}

impl BsccDecomposition {
    pub fn k(&self) -> usize {
        self.bsccs.len()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn bscc_decompose(g: &RegionGraph) -> BsccDecomposition {
    let mut pg = DiGraph::<(), ()>::with_capacity(g.len(), g.edge_count());
    let nodes: Vec<_> = (0..g.len()).map(|_| pg.add_node(())).collect();
    for (u, v) in g.edges() {
        pg.add_edge(nodes[u], nodes[v], ());
    }
    let mut comp_of = vec![usize::MAX; g.len()];
    let sccs = tarjan_scc(&pg);
    for (c, scc) in sccs.iter().enumerate() {
        for n in scc {
            comp_of[n.index()] = c;
        }
    }
    let mut bottoms: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(c, scc)| {
            scc.iter()
                .all(|n| g.successors[n.index()].iter().all(|&v| comp_of[v] == *c))
        })
        .map(|(_, scc)| {
            let mut vs: Vec<usize> = scc.iter().map(|n| n.index()).collect();
            vs.sort_unstable();
            vs
        })
        .collect();
    bottoms.sort_by_key(|vs| vs[0]);

    let mut membership = vec![None; g.len()];
    let mut bsccs = Vec::with_capacity(bottoms.len());
    for (j, vertices) in bottoms.into_iter().enumerate() {
        for &v in &vertices {
            membership[v] = Some(j);
        }
        let mut level: HashMap<usize, usize> = HashMap::new();
        level.insert(vertices[0], 0);
        let mut queue = VecDeque::from([vertices[0]]);
        while let Some(u) = queue.pop_front() {
            let lu = level[&u];
            for &v in &g.successors[u] {
                level.entry(v).or_insert_with(|| {
                    queue.push_back(v);
                    lu + 1
                });
            }
        }
        let mut p = 0;
        for &u in &vertices {
            for &v in &g.successors[u] {
                p = gcd(p, (level[&u] + 1).abs_diff(level[&v]));
            }
        }
        let p = p.max(1);
        let mut classes = vec![Vec::new(); p];
        let mut class = HashMap::with_capacity(vertices.len());
        for &v in &vertices {
            classes[level[&v] % p].push(v);
            class.insert(v, level[&v] % p);
        }
        let n_clocks = g.vertices[vertices[0]].clocks.len();
        let growing_clocks = (0..n_clocks)
            .filter(|c| vertices.iter().all(|&v| !g.resets[v].contains(c)))
            .collect();
        bsccs.push(Bscc {
            vertices,
            period: p,
            classes,
            growing_clocks,
            class,
        });
    }
    BsccDecomposition { bsccs, membership }
}

/// The automaton with a BSCC's growing clocks removed.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedDta {
    pub dta: Dta,
    /// Original index of each remaining clock.
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
}

impl RestrictedDta {
    /// Drops the removed clocks from a valuation of the original automaton.
    pub fn project<T: Copy>(&self, valuation: &[T]) -> Vec<T> {
        self.kept.iter().map(|&c| valuation[c]).collect()
    }
}

/// Rewrites guards on growing clocks: lower bounds become `true` and upper
/// bounds `false`, dropping edges whose guard became `false`.
pub fn eliminate_growing_clocks(
    bscc: &Bscc,
    graph: &RegionGraph,
    dta: &Dta,
) -> Result<RestrictedDta> {
    let removed = bscc.growing_clocks.clone();
    for &v in &bscc.vertices {
        if removed
            .iter()
            .any(|&c| graph.vertices[v].clocks[c].is_relevant())
        {
            return Err(Error::DegenerateModel(format!(
                "a clock never reset inside a bottom component is still relevant in region #{v}; \
                 the model needs every clock to be resettable"
            )));
        }
    }
    let kept: Vec<usize> = (0..dta.num_clocks())
        .filter(|c| !removed.contains(c))
        .collect();
    let new_index = |c: usize| kept.iter().position(|&k| k == c);
    let mut edges = Vec::new();
    'edges: for e in dta.edges() {
        let mut atoms = Vec::new();
        for a in &e.guard.atoms {
            match new_index(a.clock) {
                Some(c) => atoms.push(crate::dta::Atom { clock: c, ..*a }),
                None if matches!(a.rel, Relation::Lt | Relation::Le) => continue 'edges,
                None => {}
            }
        }
        edges.push(Edge {
            guard: Guard::new(atoms),
            resets: e.resets.iter().filter_map(|&c| new_index(c)).collect(),
            ..e.clone()
        });
    }
    let clocks = kept.iter().map(|&c| dta.clocks()[c].clone()).collect();
    let restricted = Dta::new(
        dta.locations().to_vec(),
        dta.alphabet().to_vec(),
        clocks,
        dta.initial(),
        edges,
    )?;
    Ok(RestrictedDta {
        dta: restricted,
        kept,
        removed,
    })
}
