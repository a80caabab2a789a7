//! Brute-force partition functions on small tori, computed from the local
//! turning rules with no transfer-matrix machinery.
//!
//! Lattice: `W = 2L` columns, `H = 2M` rows, periodic both ways. Edge
//! `h(r, c)` joins `(r, c)` to `(r, c+1)`, edge `v(r, c)` joins `(r, c)` to
//! `(r+1, c)`. Horizontal edges in column `W - 1` cross the seam.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::couplings::CouplingSet;
use crate::error::{Error, Result};

/// Largest number of edges (`8 L M`) the enumerations accept.
pub const EDGE_CAP: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    Black,
    White,
}

/// Edge state: colour and whether the arrow points along increasing
/// column/row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeState {
    pub color: Color,
    pub forward: bool,
}

type Dir = (i32, i32);

/// Turning sign from in-direction to out-direction, both given as the
/// direction from the vertex towards the edge. Negative is a right turn.
fn turn(d_in: Dir, d_out: Dir) -> i32 {
    let (tx, ty) = (-d_in.0, -d_in.1);
    tx * d_out.1 - ty * d_out.0
}

/// Weight of one vertex given its four edges as `(direction from vertex,
/// colour, arrow direction)`. Zero if some combination repeats.
fn vertex_weight(edges: &[(Dir, Color, Dir); 4], omega: C64) -> C64 {
    let mut slot: [Option<Dir>; 4] = [None; 4];
    for &(d, col, arrow) in edges {
        let out = arrow == d;
        let k = 2 * usize::from(col == Color::White) + usize::from(out);
        if slot[k].is_some() {
            return C64::new(0.0, 0.0);
        }
        slot[k] = Some(d);
    }
    let [bi, bo, wi, wo] = slot.map(|s| s.expect("all four present"));
    let tb = turn(bi, bo);
    let tw = turn(wi, wo);
    let mut w = C64::new(1.0, 0.0);
    if tb != 0 {
        w *= omega.powi(-tb.signum());
    }
    if tw != 0 {
        w *= omega.powi(tw.signum());
    }
    w
}

struct Torus {
    w: usize,
    h: usize,
    /// Per vertex: `(edge id, direction from vertex, +1 if the edge's
    /// forward direction points away from the vertex)`.
    slots: Vec<[(usize, Dir, i32); 4]>,
    order: Vec<usize>,
    complete_at: Vec<Vec<usize>>,
}

impl Torus {
    fn new(l: usize, m: usize) -> Result<Self> {
        if l == 0 || m == 0 {
            return Err(Error::Domain("L and M must be positive".into()));
        }
        let (w, h) = (2 * l, 2 * m);
        if 2 * w * h > EDGE_CAP {
            return Err(Error::TooLarge { dim: 2 * w * h, cap: EDGE_CAP });
        }
        let hid = |r: usize, c: usize| r * w + c;
        let vid = |r: usize, c: usize| w * h + r * w + c;
        let mut slots = Vec::with_capacity(w * h);
        for r in 0..h {
            for c in 0..w {
                slots.push([
                    (hid(r, c), (1, 0), 1),
                    (hid(r, (c + w - 1) % w), (-1, 0), -1),
                    (vid(r, c), (0, 1), 1),
                    (vid((r + h - 1) % h, c), (0, -1), -1),
                ]);
            }
        }
        // edges in order of first appearance, vertices checked once complete
        let mut pos = vec![usize::MAX; 2 * w * h];
        let mut order = Vec::new();
        for s in &slots {
            for &(e, _, _) in s {
                if pos[e] == usize::MAX {
                    pos[e] = order.len();
                    order.push(e);
                }
            }
        }
        let mut complete_at = vec![Vec::new(); order.len()];
        for (v, s) in slots.iter().enumerate() {
            let last = s.iter().map(|&(e, _, _)| pos[e]).max().expect("4 slots");
            complete_at[last].push(v);
        }
        Ok(Torus { w, h, slots, order, complete_at })
    }

    fn is_horizontal(&self, e: usize) -> bool {
        e < self.w * self.h
    }

    fn is_seam(&self, e: usize) -> bool {
        self.is_horizontal(e) && e % self.w == self.w - 1
    }

    /// Arrow direction vector of an edge state.
    fn arrow(&self, e: usize, forward: bool) -> Dir {
        let s = if forward { 1 } else { -1 };
        if self.is_horizontal(e) {
            (s, 0)
        } else {
            (0, s)
        }
    }
}

const STATES: [EdgeState; 4] = [
    EdgeState { color: Color::Black, forward: true },
    EdgeState { color: Color::Black, forward: false },
    EdgeState { color: Color::White, forward: true },
    EdgeState { color: Color::White, forward: false },
];

/// Sum over all 24-vertex arrow configurations of the product of turning
/// weights and seam weights (`a` for a left-pointing seam edge, `1/a` for a
/// right-pointing one).
pub fn arrow_partition_function(l: usize, m: usize, cpl: &CouplingSet) -> Result<C64> {
    arrow_sum(l, m, cpl, &|_| None)
}

/// `<ref|T|ref>`: a single double row (`M = 1`) with every vertical edge
/// between the top row and the bottom row white and pointing up.
pub fn reference_diagonal_element(l: usize, cpl: &CouplingSet) -> Result<C64> {
    let t = Torus::new(l, 1)?;
    let (w, h) = (t.w, t.h);
    let fixed = move |e: usize| {
        let wrap_row = e >= w * h && (e - w * h) / w == h - 1;
        wrap_row.then_some(EdgeState { color: Color::White, forward: true })
    };
    arrow_sum(l, 1, cpl, &fixed)
}

fn arrow_sum(l: usize, m: usize, cpl: &CouplingSet, fixed: &dyn Fn(usize) -> Option<EdgeState>) -> Result<C64> {
    let t = Torus::new(l, m)?;
    let mut state: Vec<Option<EdgeState>> = vec![None; 2 * t.w * t.h];
    let mut total = C64::new(0.0, 0.0);
    arrow_rec(&t, 0, C64::new(1.0, 0.0), &mut state, cpl, fixed, &mut total);
    Ok(total)
}

fn arrow_rec(
    t: &Torus,
    i: usize,
    w: C64,
    state: &mut Vec<Option<EdgeState>>,
    cpl: &CouplingSet,
    fixed: &dyn Fn(usize) -> Option<EdgeState>,
    total: &mut C64,
) {
    if i == t.order.len() {
        *total += w;
        return;
    }
    let e = t.order[i];
    let choices: Vec<EdgeState> = match fixed(e) {
        Some(s) => vec![s],
        None => STATES.to_vec(),
    };
    for s in choices {
        state[e] = Some(s);
        let mut ww = w;
        for &v in &t.complete_at[i] {
            let edges = t.slots[v].map(|(eid, d, _)| {
                let st = state[eid].expect("complete vertex");
                (d, st.color, t.arrow(eid, st.forward))
            });
            ww *= vertex_weight(&edges, cpl.omega);
            if ww == C64::new(0.0, 0.0) {
                break;
            }
        }
        if ww == C64::new(0.0, 0.0) {
            continue;
        }
        if t.is_seam(e) {
            ww *= if s.forward { cpl.a.inv() } else { cpl.a };
        }
        arrow_rec(t, i + 1, ww, state, cpl, fixed, total);
    }
    state[e] = None;
}

/// One loop of a bicolouring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub color: Color,
    /// Sum of turning signs along the traversal (quarter turns).
    pub turning: i32,
    pub winding_h: i32,
    pub winding_v: i32,
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopDecomposition {
    pub loops: Vec<Loop>,
}

impl LoopDecomposition {
    /// Orientation-summed weight: `n` for a contractible loop, `a^w + a^-w`
    /// for horizontal winding `w`, and `2` for purely vertical winding.
    pub fn weight(&self, cpl: &CouplingSet) -> C64 {
        self.loops
            .iter()
            .map(|lp| {
                if lp.winding_h == 0 && lp.winding_v == 0 {
                    C64::new(cpl.n, 0.0)
                } else if lp.winding_h != 0 {
                    cpl.a.powi(lp.winding_h) + cpl.a.powi(-lp.winding_h)
                } else {
                    C64::new(2.0, 0.0)
                }
            })
            .product()
    }
}

fn decompose(t: &Torus, color: &[Color]) -> Result<LoopDecomposition> {
    let ne = color.len();
    let mut used = vec![false; ne];
    let mut loops = Vec::new();
    // vertex of each edge end: end 0 = tail, end 1 = head, plus its slot index
    let mut end_slot = vec![[(0usize, 0usize); 2]; ne];
    for (v, s) in t.slots.iter().enumerate() {
        for (k, &(e, _, sign)) in s.iter().enumerate() {
            end_slot[e][if sign > 0 { 0 } else { 1 }] = (v, k);
        }
    }
    for e0 in 0..ne {
        if used[e0] {
            continue;
        }
        let col = color[e0];
        let (mut e, mut from_end) = (e0, 0usize);
        let (mut dx, mut dy, mut turning, mut length) = (0i32, 0i32, 0i32, 0usize);
        loop {
            used[e] = true;
            length += 1;
            let step = if from_end == 0 { 1 } else { -1 };
            if t.is_horizontal(e) {
                dx += step;
            } else {
                dy += step;
            }
            let (v, k_in) = end_slot[e][1 - from_end];
            let slots = &t.slots[v];
            let k_out = (0..4)
                .find(|&k| k != k_in && color[slots[k].0] == col)
                .ok_or_else(|| Error::Domain("vertex without two edges of a colour".into()))?;
            turning += turn(slots[k_in].1, slots[k_out].1);
            let (e_next, _, sign) = slots[k_out];
            let next_end = if sign > 0 { 0 } else { 1 };
            if e_next == e0 && next_end == 0 {
                break;
            }
            if used[e_next] {
                return Err(Error::Domain("loop walk revisited an edge".into()));
            }
            e = e_next;
            from_end = next_end;
        }
        let (wh, wv) = (dx / t.w as i32, dy / t.h as i32);
        let closed = wh == 0 && wv == 0;
        if (closed && turning.abs() != 4) || (!closed && turning != 0) {
            return Err(Error::Domain(format!("loop with winding ({wh}, {wv}) has turning {turning}")));
        }
        loops.push(Loop { color: col, turning, winding_h: wh, winding_v: wv, length });
    }
    Ok(LoopDecomposition { loops })
}

/// Sum over bicolourings (two black, two white edges at every vertex) of the
/// orientation-summed loop weights.
pub fn loop_partition_function(l: usize, m: usize, cpl: &CouplingSet) -> Result<C64> {
    let t = Torus::new(l, m)?;
    let mut color = vec![Color::Black; 2 * t.w * t.h];
    let mut set = vec![false; color.len()];
    let mut total = C64::new(0.0, 0.0);
    let mut err = None;
    loop_rec(&t, 0, &mut color, &mut set, &mut |c| match decompose(&t, c) {
        Ok(d) => total += d.weight(cpl),
        Err(e) => err = Some(e),
    });
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Number of bicolourings, each with its loop decomposition, passed to `f`.
pub fn for_each_bicoloring(l: usize, m: usize, mut f: impl FnMut(&LoopDecomposition)) -> Result<()> {
    let t = Torus::new(l, m)?;
    let mut color = vec![Color::Black; 2 * t.w * t.h];
    let mut set = vec![false; color.len()];
    let mut err = None;
    loop_rec(&t, 0, &mut color, &mut set, &mut |c| match decompose(&t, c) {
        Ok(d) => f(&d),
        Err(e) => err = Some(e),
    });
    err.map_or(Ok(()), Err)
}

fn loop_rec(t: &Torus, i: usize, color: &mut Vec<Color>, set: &mut Vec<bool>, f: &mut dyn FnMut(&[Color])) {
    if i == t.order.len() {
        f(color);
        return;
    }
    let e = t.order[i];
    set[e] = true;
    for c in [Color::Black, Color::White] {
        color[e] = c;
        let ok = t.complete_at[i]
            .iter()
            .all(|&v| t.slots[v].iter().filter(|s| color[s.0] == Color::Black).count() == 2);
        if ok {
            loop_rec(t, i + 1, color, set, f);
        }
    }
    set[e] = false;
}

/// Arrow meaning of the four states of each composite line, reconstructed
/// so that the turning rules reproduce the gauge-transformed R-matrix.
/// Index: line (hf, hc, vc, vf), then 0-based state.
pub const LINE_STATES: [[(Color, Dir); 4]; 4] = [
    // hf: white-right, black-right, black-left, white-left
    [(Color::White, (1, 0)), (Color::Black, (1, 0)), (Color::Black, (-1, 0)), (Color::White, (-1, 0))],
    // hc: white-left, black-left, black-right, white-right
    [(Color::White, (-1, 0)), (Color::Black, (-1, 0)), (Color::Black, (1, 0)), (Color::White, (1, 0))],
    // vc: white-down, black-down, black-up, white-up
    [(Color::White, (0, -1)), (Color::Black, (0, -1)), (Color::Black, (0, 1)), (Color::White, (0, 1))],
    // vf: white-up, black-up, black-down, white-down
    [(Color::White, (0, 1)), (Color::Black, (0, 1)), (Color::Black, (0, -1)), (Color::White, (0, -1))],
];

/// The 2x2 block of four vertices built from the turning rules, returned in
/// the same (row, column) convention as `rmatrix::loop_r`.
///
/// Rows of the block are `hf` (upper) and `hc` (lower), columns `vc` (left)
/// and `vf` (right). External edges enter from the left and the bottom;
/// the four internal edges are summed over.
pub fn vertex_rule_block(cpl: &CouplingSet) -> DMatrix<C64> {
    let (hf, hc, vc, vf) = (0, 1, 2, 3);
    let lab = |line: usize, s: usize| LINE_STATES[line][s];
    let om = cpl.omega;
    let vw = |left: (Color, Dir), bottom: (Color, Dir), right: (Color, Dir), top: (Color, Dir)| {
        vertex_weight(
            &[((-1, 0), left.0, left.1), ((0, -1), bottom.0, bottom.1), ((1, 0), right.0, right.1), ((0, 1), top.0, top.1)],
            om,
        )
    };
    let mut block = DMatrix::<C64>::zeros(256, 256);
    let zero = C64::new(0.0, 0.0);
    for sin in 0..256usize {
        let di = [sin >> 6 & 3, sin >> 4 & 3, sin >> 2 & 3, sin & 3];
        for internal in 0..256usize {
            // internal horizontal edges per row, internal vertical per column
            let (ih_up, ih_lo, iv_l, iv_r) = (internal >> 6 & 3, internal >> 4 & 3, internal >> 2 & 3, internal & 3);
            let w_ll = vw(lab(hc, di[hc]), lab(vc, di[vc]), lab(hc, ih_lo), lab(vc, iv_l));
            if w_ll == zero {
                continue;
            }
            for sout in 0..256usize {
                let d_o = [sout >> 6 & 3, sout >> 4 & 3, sout >> 2 & 3, sout & 3];
                let mut w = w_ll * vw(lab(hc, ih_lo), lab(vf, di[vf]), lab(hc, d_o[hc]), lab(vf, iv_r));
                if w == zero {
                    continue;
                }
                w *= vw(lab(hf, di[hf]), lab(vc, iv_l), lab(hf, ih_up), lab(vc, d_o[vc]));
                if w == zero {
                    continue;
                }
                w *= vw(lab(hf, ih_up), lab(vf, iv_r), lab(hf, d_o[hf]), lab(vf, d_o[vf]));
                // stored transposed: the block maps out-edges back to in-edges
                block[(sin, sout)] += w;
            }
        }
    }
    block
}
