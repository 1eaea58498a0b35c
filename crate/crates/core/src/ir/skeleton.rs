//! Deterministic grid realization of a layout plan.
//!
//! Elements sit on a grid of `SKELETON_WIDTH x SKELETON_HEIGHT` cells
//! separated by `SKELETON_GAP`. Regions take consecutive column bands left
//! to right; inside a region the column is the element's Connect depth.
//! Align constraints are hard: equal-axis classes share a coordinate and the
//! directed order between operands is strict.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::plan::{class_default_style, Axis, Constraint, LayoutPlan};
use super::IrError;
use crate::mxgraph::{build_document, EdgeSpec, GraphDocument, NodeKind, NodeSpec, StyleCatalog, StyleMap, LAYER_ID, ROOT_ID};
use crate::render::ShapeKind;

pub const SKELETON_WIDTH: f64 = 160.0;
pub const SKELETON_HEIGHT: f64 = 60.0;
pub const SKELETON_GAP: f64 = 40.0;

const CONNECTOR_ROLE: &str = "connector";

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = i;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // Smaller index becomes the root so class keys follow declaration order.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
    }
}

/// Strict order `a < b` between two element indices.
#[derive(Clone, Copy)]
struct Strict {
    a: usize,
    b: usize,
}

/// Topological order of classes (keyed by root index, smallest first among
/// ready classes). On a cycle, returns the element indices along it.
fn order_classes(classes: &BTreeSet<usize>, root_of: &[usize], strict: &[Strict]) -> Result<Vec<usize>, Vec<usize>> {
    for s in strict {
        if root_of[s.a] == root_of[s.b] {
            return Err(vec![s.a, s.b]);
        }
    }
    let mut indeg: HashMap<usize, usize> = classes.iter().map(|c| (*c, 0)).collect();
    for s in strict {
        *indeg.get_mut(&root_of[s.b]).expect("class") += 1;
    }
    let mut ready: BTreeSet<usize> = indeg.iter().filter(|(_, d)| **d == 0).map(|(c, _)| *c).collect();
    let mut order = Vec::with_capacity(classes.len());
    while let Some(c) = ready.pop_first() {
        order.push(c);
        for s in strict.iter().filter(|s| root_of[s.a] == c) {
            let d = indeg.get_mut(&root_of[s.b]).expect("class");
            *d -= 1;
            if *d == 0 {
                ready.insert(root_of[s.b]);
            }
        }
    }
    if order.len() == classes.len() {
        return Ok(order);
    }
    // Every class left over has an incoming edge from another leftover class;
    // walking those edges backwards must revisit a class.
    let left: HashSet<usize> = indeg.iter().filter(|(_, d)| **d > 0).map(|(c, _)| *c).collect();
    let start = *left.iter().min().expect("cycle exists");
    let mut seen: Vec<usize> = vec![start];
    let mut via: Vec<Strict> = Vec::new();
    let mut cur = start;
    loop {
        let edge = *strict
            .iter()
            .filter(|s| root_of[s.b] == cur && left.contains(&root_of[s.a]))
            .min_by_key(|s| (s.a, s.b))
            .expect("leftover class has a leftover predecessor");
        via.push(edge);
        cur = root_of[edge.a];
        if let Some(pos) = seen.iter().position(|c| *c == cur) {
            let mut cycle: Vec<Strict> = via[pos..].to_vec();
            cycle.reverse();
            let mut ids: Vec<usize> = cycle.iter().map(|s| s.a).collect();
            ids.push(cycle.last().expect("non-empty").b);
            return Err(ids);
        }
        seen.push(cur);
    }
}

/// Longest Connect path depth per element within each region. Cycles are
/// broken by ignoring edges that close a loop in declaration-order DFS.
fn connect_ranks(plan: &LayoutPlan, index: &HashMap<&str, usize>) -> Vec<usize> {
    let n = plan.elements.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (from, to, _) in plan.connects() {
        let (f, t) = (index[from], index[to]);
        if f != t && plan.elements[f].region == plan.elements[t].region && !adj[f].contains(&t) {
            adj[f].push(t);
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done.
    let mut state = vec![0u8; n];
    let mut kept: Vec<Vec<usize>> = vec![Vec::new(); n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        state[root] = 1;
        while let Some((node, next)) = stack.pop() {
            if next < adj[node].len() {
                stack.push((node, next + 1));
                let child = adj[node][next];
                match state[child] {
                    0 => {
                        kept[node].push(child);
                        state[child] = 1;
                        stack.push((child, 0));
                    }
                    2 => kept[node].push(child),
                    _ => {}
                }
            } else {
                state[node] = 2;
            }
        }
    }
    let mut indeg = vec![0usize; n];
    for targets in &kept {
        for t in targets {
            indeg[*t] += 1;
        }
    }
    let mut rank = vec![0usize; n];
    let mut ready: BTreeSet<usize> = (0..n).filter(|i| indeg[*i] == 0).collect();
    while let Some(i) = ready.pop_first() {
        for &t in &kept[i] {
            rank[t] = rank[t].max(rank[i] + 1);
            indeg[t] -= 1;
            if indeg[t] == 0 {
                ready.insert(t);
            }
        }
    }
    rank
}

fn unique_id(base: String, taken: &mut HashSet<String>) -> String {
    let mut id = base;
    while taken.contains(&id) || id == ROOT_ID || id == LAYER_ID {
        id.push('_');
    }
    taken.insert(id.clone());
    id
}

/// Realizes `plan` as a document: one vertex per element, one edge per
/// Connect (in order), cell order by Layer z then declaration order.
pub fn plan_to_skeleton(plan: &LayoutPlan, catalog: &StyleCatalog) -> Result<GraphDocument, IrError> {
    plan.validate()?;
    let n = plan.elements.len();
    let index: HashMap<&str, usize> = plan.elements.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
    let name = |i: usize| plan.elements[i].id.clone();

    let mut same_row = UnionFind::new(n);
    let mut same_col = UnionFind::new(n);
    let (mut left_of, mut above) = (Vec::new(), Vec::new());
    for c in &plan.constraints {
        if let Constraint::Align { a, b, axis } = c {
            let (a, b) = (index[a.as_str()], index[b.as_str()]);
            match axis {
                Axis::Horizontal => {
                    same_row.union(a, b);
                    left_of.push(Strict { a, b });
                }
                Axis::Vertical => {
                    same_col.union(a, b);
                    above.push(Strict { a, b });
                }
            }
        }
    }
    let col_root: Vec<usize> = (0..n).map(|i| same_col.find(i)).collect();
    let row_root: Vec<usize> = (0..n).map(|i| same_row.find(i)).collect();
    let col_classes: BTreeSet<usize> = col_root.iter().copied().collect();
    let row_classes: BTreeSet<usize> = row_root.iter().copied().collect();
    let unsat = |ids: Vec<usize>| IrError::UnsatisfiableConstraint { cycle: ids.into_iter().map(name).collect() };
    let col_order = order_classes(&col_classes, &col_root, &left_of).map_err(unsat)?;
    let row_order = order_classes(&row_classes, &row_root, &above).map_err(unsat)?;

    // Preferred columns: region band offset plus Connect depth.
    let rank = connect_ranks(plan, &index);
    let mut band_start: HashMap<&str, usize> = HashMap::new();
    let mut next_band = 0;
    for region in &plan.regions {
        let width = plan.elements.iter().enumerate().filter(|(_, e)| e.region == region.id).map(|(i, _)| rank[i] + 1).max();
        if let Some(width) = width {
            band_start.insert(region.id.as_str(), next_band);
            next_band += width;
        }
    }
    let preferred: Vec<usize> = (0..n).map(|i| band_start[plan.elements[i].region.as_str()] + rank[i]).collect();

    let mut class_col: HashMap<usize, usize> = HashMap::new();
    for class in &col_order {
        let members = (0..n).filter(|i| col_root[*i] == *class);
        let mut col = members.map(|i| preferred[i]).max().unwrap_or(0);
        for s in left_of.iter().filter(|s| col_root[s.b] == *class) {
            col = col.max(class_col[&col_root[s.a]] + 1);
        }
        class_col.insert(*class, col);
    }
    let col: Vec<usize> = (0..n).map(|i| class_col[&col_root[i]]).collect();

    let mut occupied: HashSet<(usize, usize)> = HashSet::new();
    let mut class_row: HashMap<usize, usize> = HashMap::new();
    for class in &row_order {
        let members: Vec<usize> = (0..n).filter(|i| row_root[*i] == *class).collect();
        let mut row = above.iter().filter(|s| row_root[s.b] == *class).map(|s| class_row[&row_root[s.a]] + 1).max().unwrap_or(0);
        while members.iter().any(|i| occupied.contains(&(col[*i], row))) {
            row += 1;
        }
        for i in &members {
            occupied.insert((col[*i], row));
        }
        class_row.insert(*class, row);
    }

    let mut z = vec![0i64; n];
    for c in &plan.constraints {
        if let Constraint::Layer { element, z: level } = c {
            z[index[element.as_str()]] = *level;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|i| (z[*i], *i));

    let mut styles = catalog.clone();
    let mut taken: HashSet<String> = HashSet::new();
    let mut cell_id: Vec<String> = vec![String::new(); n];
    for (i, e) in plan.elements.iter().enumerate() {
        if e.id != ROOT_ID && e.id != LAYER_ID {
            taken.insert(e.id.clone());
            cell_id[i] = e.id.clone();
        }
    }
    for (i, e) in plan.elements.iter().enumerate() {
        if cell_id[i].is_empty() {
            cell_id[i] = unique_id(format!("{}_n", e.id), &mut taken);
        }
    }

    let mut nodes = Vec::with_capacity(n);
    for i in order {
        let e = &plan.elements[i];
        let role = e.role();
        let drawable = styles.get(&role).is_some_and(|s| ShapeKind::from_token(s.shape_token()).is_some() || s.is_group_frame());
        if !drawable {
            styles.insert(role.clone(), class_default_style(&e.class_label));
        }
        nodes.push(NodeSpec {
            id: cell_id[i].clone(),
            value: e.text.clone(),
            kind: NodeKind::Vertex,
            style_role: Some(role),
            x: col[i] as f64 * (SKELETON_WIDTH + SKELETON_GAP),
            y: class_row[&row_root[i]] as f64 * (SKELETON_HEIGHT + SKELETON_GAP),
            width: SKELETON_WIDTH,
            height: SKELETON_HEIGHT,
            parent: None,
        });
    }
    if !styles.contains(CONNECTOR_ROLE) {
        styles.insert(CONNECTOR_ROLE, StyleMap::parse_lossy("edgeStyle=orthogonalEdgeStyle;rounded=0;html=1;endArrow=classic;"));
    }
    let edges: Vec<EdgeSpec> = plan
        .connects()
        .enumerate()
        .map(|(k, (from, to, label))| EdgeSpec {
            id: unique_id(format!("edge-{}", k + 1), &mut taken),
            source: cell_id[index[from]].clone(),
            target: cell_id[index[to]].clone(),
            value: label.unwrap_or_default().to_string(),
            style_role: Some(CONNECTOR_ROLE.to_string()),
            waypoints: Vec::new(),
        })
        .collect();
    build_document(&nodes, &edges, &styles).map_err(|e| IrError::schema("skeleton", e.to_string()))
}
