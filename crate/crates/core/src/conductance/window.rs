//! Upper bounds on the profile from cluster pieces cut out by lattice
//! windows `v + B_d(k)`.

use super::{complement_surgery, cut_from_members, Certification, ConductanceProfile, CutValue, ProfilePoint};
use crate::error::{Error, Result};
use crate::percolation::BondConfig;
use crate::walk::Chain;

/// Window offsets for radius `k`: the origin and, on each axis,
/// `⌊k/2⌋ e_a` and `k e_a`, without repeats.
pub fn window_offsets(d: usize, k: u32) -> Vec<Vec<i32>> {
    let mut out = vec![vec![0; d]];
    for step in [k / 2, k] {
        for a in 0..d {
            let mut o = vec![0; d];
            o[a] = step as i32;
            if !out.contains(&o) {
                out.push(o);
            }
        }
    }
    out
}

/// A window cut and, when its complement was disconnected, the cut after
/// absorbing the smaller complement pieces.
#[derive(Debug, Clone)]
pub struct WindowCut {
    pub k: u32,
    pub cut: CutValue,
    pub surgery: Option<CutValue>,
}

/// Every window cut with `π(A) ≤ ½`, for radii `0 ≤ k < n`.
pub fn window_cuts(chain: &Chain, config: &BondConfig) -> Result<Vec<WindowCut>> {
    let g = chain.graph();
    let spec = config.spec();
    let (d, n) = (spec.d, spec.n as i32);
    if g.dim() != d {
        return Err(Error::Domain(format!("chain has dimension {} but the box has {d}", g.dim())));
    }
    let side = (2 * n + 1) as usize;
    let cells = side.checked_pow(d as u32).ok_or_else(|| Error::Capacity("box too large".into()))?;
    let mut grid = vec![u32::MAX; cells];
    let flat = |x: &[i32]| x.iter().fold(0usize, |acc, &c| acc * side + (c + n) as usize);
    for v in 0..g.num_vertices() {
        let x = g
            .coords(v)
            .ok_or_else(|| Error::Domain("chain vertices carry no lattice coordinates".into()))?;
        if x.iter().any(|&c| c.abs() > n) {
            return Err(Error::Domain(format!("vertex {x:?} lies outside {spec}")));
        }
        grid[flat(x)] = v as u32;
    }
    let total = chain.degree_sum();
    let nv = g.num_vertices();
    let mut mark = vec![0u32; nv];
    let mut stamp = 0u32;
    let mut out = Vec::new();
    let mut cursor = vec![0i32; d];
    for k in 0..spec.n {
        let k_i = k as i32;
        let stride = 2 * k_i + 1;
        for offset in window_offsets(d, k) {
            let firsts: Vec<i32> = offset.iter().map(|&o| -n + k_i + o).collect();
            let mut center = firsts.clone();
            'centers: loop {
                // collect the cluster sites of the clipped window
                stamp += 1;
                let lo: Vec<i32> = center.iter().map(|&c| (c - k_i).max(-n)).collect();
                let hi: Vec<i32> = center.iter().map(|&c| (c + k_i).min(n)).collect();
                let mut members = Vec::new();
                cursor.copy_from_slice(&lo);
                'cells: loop {
                    let v = grid[flat(&cursor)];
                    if v != u32::MAX {
                        mark[v as usize] = stamp;
                        members.push(v);
                    }
                    for a in (0..d).rev() {
                        if cursor[a] < hi[a] {
                            cursor[a] += 1;
                            continue 'cells;
                        }
                        cursor[a] = lo[a];
                    }
                    break;
                }
                if let Some(piece) = heaviest_piece(chain, &members, &mut mark, stamp) {
                    let vol: u64 = piece.iter().map(|&x| g.degree(x as usize) as u64).sum();
                    if piece.len() < nv && 2 * vol <= total {
                        let mut member = vec![false; nv];
                        piece.iter().for_each(|&x| member[x as usize] = true);
                        let cut = cut_from_members(chain, &member);
                        let surgery = complement_surgery(chain, &cut).filter(|s| 2 * s.volume <= total);
                        out.push(WindowCut { k, cut, surgery });
                    }
                }
                for a in (0..d).rev() {
                    if center[a] + stride - k_i <= n {
                        center[a] += stride;
                        continue 'centers;
                    }
                    center[a] = firsts[a];
                }
                break;
            }
        }
    }
    Ok(out)
}

/// The connected piece of `members` with the largest volume (earliest
/// discovered on ties). Members must carry `mark == stamp`.
fn heaviest_piece(chain: &Chain, members: &[u32], mark: &mut [u32], stamp: u32) -> Option<Vec<u32>> {
    let g = chain.graph();
    let done = stamp.wrapping_add(1) | 1 << 31;
    let mut best: Option<(u64, Vec<u32>)> = None;
    for &s in members {
        if mark[s as usize] != stamp {
            continue;
        }
        mark[s as usize] = done;
        let mut piece = vec![s];
        let mut head = 0;
        while head < piece.len() {
            let x = piece[head] as usize;
            head += 1;
            for &y in g.neighbors(x) {
                if mark[y as usize] == stamp {
                    mark[y as usize] = done;
                    piece.push(y);
                }
            }
        }
        let vol = piece.iter().map(|&x| g.degree(x as usize) as u64).sum();
        if best.as_ref().is_none_or(|(b, _)| vol > *b) {
            best = Some((vol, piece));
        }
    }
    best.map(|(_, mut p)| {
        p.sort_unstable();
        p
    })
}

/// Profile upper envelope from all window cuts and their surgeries.
pub fn profile_upper_box(chain: &Chain, config: &BondConfig) -> Result<ConductanceProfile> {
    envelope(&window_cuts(chain, config)?)
}

/// Upper envelope of a set of window cuts.
pub fn envelope(cuts: &[WindowCut]) -> Result<ConductanceProfile> {
    let mut points = Vec::with_capacity(cuts.len());
    for w in cuts {
        for c in std::iter::once(&w.cut).chain(&w.surgery) {
            points.push(ProfilePoint {
                x: c.mass(),
                phi: c.phi(),
                certification: Certification::UpperBound,
                witness: c.set.clone(),
            });
        }
    }
    ConductanceProfile::from_points(points)
}
