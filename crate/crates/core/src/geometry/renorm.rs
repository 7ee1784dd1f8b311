//! Renormalised block fields on `(N Z)^d`.
//!
//! A renormalised site `v` looks at the window `Q_R(v) = {w : |w - v|∞ ≤ R}`
//! with `R = ⌊5N/4⌋`, using only the open edges with both ends in the
//! window. It is good when some window cluster touches all `2d` faces and
//! every window cluster of L∞ diameter above `N/10` is that cluster.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{BoxGraph, BoxSpec, VertexId};
use crate::percolation::rng::{bernoulli, threshold, word, DOMAIN_SITE};
use crate::percolation::{BondConfig, UnionFind};
use crate::stats::mean;

/// Smallest block scale accepted by the classifier.
pub const MIN_BLOCK: u32 = 8;

/// `⌊5N/4⌋`.
pub fn window_radius(block: u32) -> u32 {
    5 * block / 4
}

/// Components of L∞ diameter above this must meet the crossing cluster.
/// For integer diameters `> N/10` and `> ⌊N/10⌋` agree.
pub fn diameter_threshold(block: u32) -> u32 {
    block / 10
}

/// Multiples of `block` in `[-n, n]`, per axis, in increasing order.
fn axis_sites(n: u32, block: u32) -> Vec<i32> {
    let m = (n / block) as i32;
    (-m..=m).map(|j| j * block as i32).collect()
}

/// Renormalised sites of the box in row-major order; with
/// `interior_only`, only those whose full window fits in the box.
pub fn renormalized_sites(spec: BoxSpec, block: u32, interior_only: bool) -> Vec<Vec<i32>> {
    let r = window_radius(block) as i32;
    let axis: Vec<i32> = axis_sites(spec.n, block)
        .into_iter()
        .filter(|&c| !interior_only || c.abs() + r <= spec.n as i32)
        .collect();
    let mut out = Vec::new();
    if axis.is_empty() {
        return out;
    }
    let mut idx = vec![0usize; spec.d];
    'sites: loop {
        out.push(idx.iter().map(|&i| axis[i]).collect());
        for a in (0..spec.d).rev() {
            if idx[a] + 1 < axis.len() {
                idx[a] += 1;
                continue 'sites;
            }
            idx[a] = 0;
        }
        break;
    }
    out
}

/// Iterates the lattice points of the box `lo..=hi` in row-major order.
fn for_each_point(lo: &[i32], hi: &[i32], mut f: impl FnMut(&[i32])) {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut cur = lo.to_vec();
    'points: loop {
        f(&cur);
        for a in (0..cur.len()).rev() {
            if cur[a] < hi[a] {
                cur[a] += 1;
                continue 'points;
            }
            cur[a] = lo[a];
        }
        break;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiteStatus {
    Good,
    Bad,
    /// The window does not fit inside the box.
    Unclassified,
}

impl SiteStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SiteStatus::Good => "good",
            SiteStatus::Bad => "bad",
            SiteStatus::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SiteRecord {
    pub coords: Vec<i32>,
    pub status: SiteStatus,
    /// Some window cluster touches every face.
    pub crossing: bool,
    /// Window clusters of diameter above the threshold.
    pub large_components: u32,
    /// Smallest box vertex of the crossing cluster of a good site.
    pub witness: Option<VertexId>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoodSiteField {
    pub block: u32,
    pub radius: u32,
    pub spec: BoxSpec,
    pub sites: Vec<SiteRecord>,
}

impl GoodSiteField {
    pub fn classified(&self) -> usize {
        self.sites.iter().filter(|s| s.status != SiteStatus::Unclassified).count()
    }

    pub fn good(&self) -> usize {
        self.sites.iter().filter(|s| s.status == SiteStatus::Good).count()
    }

    /// Fraction of classified sites that are good; `None` if none are
    /// classified.
    pub fn density(&self) -> Option<f64> {
        let c = self.classified();
        (c > 0).then(|| self.good() as f64 / c as f64)
    }

    /// Columns `x0..x{d-1}, status`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.spec.d).map(|a| format!("x{a}")).collect();
        header.push("status".into());
        w.write_record(&header)?;
        for s in &self.sites {
            let mut row: Vec<String> = s.coords.iter().map(|c| c.to_string()).collect();
            row.push(s.status.as_str().into());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct WindowStats {
    crossing_root: Option<usize>,
    large: u32,
    witness: Option<VertexId>,
}

fn classify_window(boxg: &BoxGraph, config: &BondConfig, center: &[i32], radius: u32, max_diam: u32) -> WindowStats {
    let d = center.len();
    let r = radius as i32;
    let side = 2 * radius as usize + 1;
    let lo: Vec<i32> = center.iter().map(|&c| c - r).collect();
    let hi: Vec<i32> = center.iter().map(|&c| c + r).collect();
    let local = |x: &[i32]| x.iter().zip(&lo).fold(0usize, |acc, (&c, &l)| acc * side + (c - l) as usize);
    let cells = side.pow(d as u32);
    let mut uf = UnionFind::new(cells);
    let mut global = vec![VertexId(0); cells];
    let mut nbr = vec![0i32; d];
    for_each_point(&lo, &hi, |x| {
        let v = boxg.vertex_at(x).expect("window inside the box");
        let i = local(x);
        global[i] = v;
        for a in 0..d {
            if x[a] < hi[a] {
                let e = boxg.edge_from(v, a).expect("neighbour inside the box");
                if config.is_open(e) {
                    nbr.copy_from_slice(x);
                    nbr[a] += 1;
                    uf.union(i as u32, local(&nbr) as u32);
                }
            }
        }
    });
    // per root: coordinate ranges and touched faces
    let mut min = vec![i32::MAX; cells * d];
    let mut max = vec![i32::MIN; cells * d];
    let mut faces = vec![0u64; cells];
    let mut smallest = vec![u32::MAX; cells];
    for_each_point(&lo, &hi, |x| {
        let i = local(x);
        let root = uf.find(i as u32) as usize;
        for a in 0..d {
            min[root * d + a] = min[root * d + a].min(x[a]);
            max[root * d + a] = max[root * d + a].max(x[a]);
            if x[a] == lo[a] {
                faces[root] |= 1 << (2 * a);
            }
            if x[a] == hi[a] {
                faces[root] |= 1 << (2 * a + 1);
            }
        }
        smallest[root] = smallest[root].min(global[i].0);
    });
    let all_faces = (1u64 << (2 * d)) - 1;
    let mut stats = WindowStats {
        crossing_root: None,
        large: 0,
        witness: None,
    };
    for root in 0..cells {
        if smallest[root] == u32::MAX {
            continue;
        }
        let diam = (0..d).map(|a| (max[root * d + a] - min[root * d + a]) as u32).max().unwrap_or(0);
        if diam > max_diam {
            stats.large += 1;
        }
        if faces[root] == all_faces && stats.crossing_root.is_none() {
            stats.crossing_root = Some(root);
            stats.witness = Some(VertexId(smallest[root]));
        }
    }
    stats
}

/// Classifies every renormalised site of the box at scale `block`.
pub fn classify_good_vertices(config: &BondConfig, block: u32) -> Result<GoodSiteField> {
    if block < MIN_BLOCK {
        return Err(Error::Domain(format!("block scale {block} is below {MIN_BLOCK}")));
    }
    let spec = config.spec();
    let boxg = BoxGraph::build(spec)?;
    let radius = window_radius(block);
    let max_diam = diameter_threshold(block);
    let sites = renormalized_sites(spec, block, false)
        .into_iter()
        .map(|coords| {
            let interior = coords.iter().all(|&c| c.unsigned_abs() + radius <= spec.n);
            if !interior {
                return SiteRecord {
                    coords,
                    status: SiteStatus::Unclassified,
                    crossing: false,
                    large_components: 0,
                    witness: None,
                };
            }
            let w = classify_window(&boxg, config, &coords, radius, max_diam);
            // a crossing cluster is itself large, so condition 2 holds iff
            // it is the only large one
            let good = w.crossing_root.is_some() && w.large == 1;
            SiteRecord {
                coords,
                status: if good { SiteStatus::Good } else { SiteStatus::Bad },
                crossing: w.crossing_root.is_some(),
                large_components: w.large,
                witness: if good { w.witness } else { None },
            }
        })
        .collect();
    Ok(GoodSiteField {
        block,
        radius,
        spec,
        sites,
    })
}

/// `A' = {v ∈ (NZ)^d ∩ box : 10 |Q_R(v) ∩ A| ≥ N}` over all renormalised
/// sites of the box, windows clipped to the box.
pub fn coarse_grain(spec: BoxSpec, set: &[Vec<i32>], block: u32) -> Result<Vec<Vec<i32>>> {
    if block == 0 {
        return Err(Error::Domain("block scale must be positive".into()));
    }
    let n = spec.n as i32;
    if let Some(x) = set.iter().find(|x| x.len() != spec.d || x.iter().any(|c| c.abs() > n)) {
        return Err(Error::Domain(format!("point {x:?} is not in {spec}")));
    }
    let r = window_radius(block) as i64;
    let b = block as i64;
    let m = (spec.n / block) as i64;
    let side = (2 * m + 1) as usize;
    let mut counts = vec![0u64; side.pow(spec.d as u32)];
    // each point lies in the windows of the sites within distance R per axis
    let mut lo = vec![0i32; spec.d];
    let mut hi = vec![0i32; spec.d];
    for x in set {
        for a in 0..spec.d {
            let c = x[a] as i64;
            lo[a] = ceil_div(c - r, b).max(-m) as i32;
            hi[a] = (c + r).div_euclid(b).min(m) as i32;
        }
        for_each_point(&lo, &hi, |j| {
            let idx = j.iter().fold(0usize, |acc, &k| acc * side + (k as i64 + m) as usize);
            counts[idx] += 1;
        });
    }
    let mut out = Vec::new();
    let axis: Vec<i32> = (-m..=m).map(|j| j as i32).collect();
    let lo = vec![axis[0]; spec.d];
    let hi = vec![*axis.last().unwrap(); spec.d];
    for_each_point(&lo, &hi, |j| {
        let idx = j.iter().fold(0usize, |acc, &k| acc * side + (k as i64 + m) as usize);
        if 10 * counts[idx] >= block as u64 {
            out.push(j.iter().map(|&k| k * block as i32).collect());
        }
    });
    Ok(out)
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityRow {
    pub p: f64,
    pub block: u32,
    pub seed: u64,
    pub good: usize,
    pub classified: usize,
    pub density: f64,
    /// Density of a Bernoulli site sample on the same classified sites at
    /// the mean good density for this block scale.
    pub site_reference: f64,
}

/// Good-site densities over block scales and seeds at fixed `p`.
pub fn good_density_curve(spec: BoxSpec, p: f64, blocks: &[u32], seeds: &[u64]) -> Result<Vec<DensityRow>> {
    if seeds.is_empty() {
        return Err(Error::Validation("no seeds given".into()));
    }
    let mut rows = Vec::new();
    for &block in blocks {
        let mut batch = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let config = BondConfig::sample(spec, p, seed)?;
            let field = classify_good_vertices(&config, block)?;
            let density = field.density().ok_or_else(|| {
                Error::Domain(format!("{spec} has no interior renormalised sites at scale {block}"))
            })?;
            batch.push((seed, field.good(), field.classified(), density));
        }
        let p_star = mean(&batch.iter().map(|b| b.3).collect::<Vec<_>>());
        let t = threshold(p_star);
        for (seed, good, classified, density) in batch {
            let salt = DOMAIN_SITE ^ (block as u64) << 16;
            let open = (0..classified as u64).filter(|&i| bernoulli(word(seed, salt, i), t)).count();
            rows.push(DensityRow {
                p,
                block,
                seed,
                good,
                classified,
                density,
                site_reference: open as f64 / classified as f64,
            });
        }
    }
    Ok(rows)
}

/// Columns `p, N, seed, good, classified, density, site_reference`.
pub fn write_density_csv<W: Write>(rows: &[DensityRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "N", "seed", "good", "classified", "density", "site_reference"])?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.block.to_string(),
            r.seed.to_string(),
            r.good.to_string(),
            r.classified.to_string(),
            r.density.to_string(),
            r.site_reference.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Site-by-site comparison of the fields at `p_lo ≤ p_hi` under the
/// monotone coupling (same seed).
#[derive(Debug, Clone, Serialize)]
pub struct CouplingReport {
    pub block: u32,
    pub seed: u64,
    pub classified: usize,
    pub good_lo: usize,
    pub good_hi: usize,
    /// Sites crossing at `p_lo` but not at `p_hi`; impossible for a
    /// monotone event.
    pub crossing_violations: usize,
    /// Sites good at `p_lo` but bad at `p_hi`, all through the
    /// large-component condition.
    pub good_exceptions: usize,
}

pub fn coupling_check(spec: BoxSpec, p_lo: f64, p_hi: f64, block: u32, seed: u64) -> Result<CouplingReport> {
    if p_lo > p_hi {
        return Err(Error::Domain(format!("need p_lo <= p_hi, got {p_lo} > {p_hi}")));
    }
    let lo = classify_good_vertices(&BondConfig::sample(spec, p_lo, seed)?, block)?;
    let hi = classify_good_vertices(&BondConfig::sample(spec, p_hi, seed)?, block)?;
    let mut report = CouplingReport {
        block,
        seed,
        classified: lo.classified(),
        good_lo: lo.good(),
        good_hi: hi.good(),
        crossing_violations: 0,
        good_exceptions: 0,
    };
    for (a, b) in lo.sites.iter().zip(&hi.sites) {
        if a.crossing && !b.crossing {
            report.crossing_violations += 1;
        }
        if a.status == SiteStatus::Good && b.status != SiteStatus::Good {
            report.good_exceptions += 1;
        }
    }
    Ok(report)
}
