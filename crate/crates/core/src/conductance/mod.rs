//! Set conductance, the Cheeger constant, conductance profiles and the
//! integral mixing bound built from them.
//!
//! For `A ⊂ V` the flow across the cut is `Q(A,Aᶜ) = |∂A| / Σdeg` and the
//! conductance is `φ_A = Q(A,Aᶜ) / (π(A) π(Aᶜ))`, kept as an exact ratio of
//! integers. The profile is `φ(x) = min{φ_A : 0 < π(A) ≤ x}`.

mod exhaustive;
mod window;

use std::io::Write;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralResult;
use crate::walk::Chain;

pub use exhaustive::{
    cheeger_exact, cheeger_exact_with_cap, for_each_connected_subset, profile_exact, profile_exact_with_cap, Cheeger,
    EXHAUSTIVE_CAP,
};
pub use window::{envelope, profile_upper_box, window_cuts, window_offsets, WindowCut};

/// A cut of the chain's state space.
#[derive(Debug, Clone, PartialEq)]
pub struct CutValue {
    /// Sorted local vertex indices of `A`.
    pub set: Vec<u32>,
    /// Number of edges leaving `A`.
    pub crossing: u64,
    /// `Σ_{x∈A} deg(x)`.
    pub volume: u64,
    /// `Σ_x deg(x) = 2|E|`.
    pub total: u64,
    pub a_connected: bool,
    pub complement_connected: bool,
}

impl CutValue {
    /// `Q(A,Aᶜ)`.
    pub fn flow(&self) -> f64 {
        self.crossing as f64 / self.total as f64
    }

    /// `π(A)`.
    pub fn mass(&self) -> f64 {
        self.volume as f64 / self.total as f64
    }

    pub fn mass_exact(&self) -> Ratio<u64> {
        Ratio::new(self.volume, self.total)
    }

    pub fn phi_exact(&self) -> Ratio<u64> {
        phi_ratio(self.crossing, self.volume, self.total)
    }

    pub fn phi(&self) -> f64 {
        phi_f64(self.crossing, self.volume, self.total)
    }
}

pub(crate) fn phi_ratio(crossing: u64, volume: u64, total: u64) -> Ratio<u64> {
    Ratio::new(crossing * total, volume * (total - volume))
}

pub(crate) fn phi_f64(crossing: u64, volume: u64, total: u64) -> f64 {
    let t = total as f64;
    crossing as f64 * t / (volume as f64 * (t - volume as f64))
}

fn membership(chain: &Chain, set: &[u32]) -> Result<Vec<bool>> {
    let nv = chain.num_states();
    let mut member = vec![false; nv];
    for &x in set {
        let slot = member
            .get_mut(x as usize)
            .ok_or_else(|| Error::Domain(format!("state {x} out of range")))?;
        if *slot {
            return Err(Error::Domain(format!("state {x} listed twice")));
        }
        *slot = true;
    }
    if set.is_empty() || set.len() == nv {
        return Err(Error::Domain("cut set must be proper and nonempty".into()));
    }
    Ok(member)
}

fn cut_from_members(chain: &Chain, member: &[bool]) -> CutValue {
    let g = chain.graph();
    let mut crossing = 0;
    let mut volume = 0;
    let mut set = Vec::new();
    for (x, &m) in member.iter().enumerate() {
        if m {
            set.push(x as u32);
            volume += g.degree(x) as u64;
            crossing += g.neighbors(x).iter().filter(|&&y| !member[y as usize]).count() as u64;
        }
    }
    let inverse: Vec<bool> = member.iter().map(|m| !m).collect();
    CutValue {
        set,
        crossing,
        volume,
        total: chain.degree_sum(),
        a_connected: g.induced_components(member).len() == 1,
        complement_connected: g.induced_components(&inverse).len() == 1,
    }
}

pub fn set_conductance(chain: &Chain, set: &[u32]) -> Result<CutValue> {
    let member = membership(chain, set)?;
    Ok(cut_from_members(chain, &member))
}

/// If `Aᶜ` falls apart, absorb every complement component except the
/// heaviest one into `A`. `None` when `Aᶜ` is already connected.
pub fn complement_surgery(chain: &Chain, cut: &CutValue) -> Option<CutValue> {
    if cut.complement_connected {
        return None;
    }
    let g = chain.graph();
    let mut member = vec![false; chain.num_states()];
    for &x in &cut.set {
        member[x as usize] = true;
    }
    let inverse: Vec<bool> = member.iter().map(|m| !m).collect();
    let comps = g.induced_components(&inverse);
    let vol = |c: &Vec<u32>| c.iter().map(|&x| g.degree(x as usize) as u64).sum::<u64>();
    let keep = comps
        .iter()
        .enumerate()
        .max_by(|a, b| vol(a.1).cmp(&vol(b.1)).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)?;
    for (i, comp) in comps.iter().enumerate() {
        if i != keep {
            comp.iter().for_each(|&x| member[x as usize] = true);
        }
    }
    Some(cut_from_members(chain, &member))
}

/// Best prefix cut of the second-eigenfunction ordering.
pub fn sweep_cut(chain: &Chain, spectral: &SpectralResult) -> Result<CutValue> {
    let nv = chain.num_states();
    if spectral.second_vector.len() != nv {
        return Err(Error::Domain("eigenvector does not match the chain".into()));
    }
    let f = spectral.second_eigenfunction(chain);
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
    let g = chain.graph();
    let total = chain.degree_sum();
    let mut inside = vec![false; nv];
    let (mut crossing, mut volume) = (0i64, 0u64);
    let mut best: Option<(Ratio<u64>, usize)> = None;
    for (len, &x) in order.iter().enumerate().take(nv - 1) {
        let internal = g.neighbors(x).iter().filter(|&&y| inside[y as usize]).count() as i64;
        crossing += g.degree(x) as i64 - 2 * internal;
        volume += g.degree(x) as u64;
        inside[x] = true;
        let phi = phi_ratio(crossing as u64, volume, total);
        if best.is_none_or(|(b, _)| phi < b) {
            best = Some((phi, len + 1));
        }
    }
    let (_, len) = best.expect("chain has at least two states");
    let mut set: Vec<u32> = order[..len].iter().map(|&x| x as u32).collect();
    set.sort_unstable();
    set_conductance(chain, &set)
}

/// `1 / (Σdeg · x)`: every proper `A` on a connected chain has a crossing
/// edge, so `φ_A ≥ Q(A,Aᶜ)/π(A) ≥ 1/(Σdeg · x)` whenever `π(A) ≤ x`.
pub fn small_set_floor(chain: &Chain, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("mass must lie in (0, 1], got {x}")));
    }
    Ok(1.0 / (chain.degree_sum() as f64 * x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    Exact,
    UpperBound,
}

impl Certification {
    pub fn as_str(self) -> &'static str {
        match self {
            Certification::Exact => "exact",
            Certification::UpperBound => "upper-bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    /// Breakpoint mass `x`.
    pub x: f64,
    /// `φ(x)`, or an upper bound on it.
    pub phi: f64,
    pub certification: Certification,
    /// A set with `π(A) ≤ x` attaining `phi`.
    pub witness: Vec<u32>,
}

/// A non-increasing step function on `[x_0, ½]`, constant on each
/// `[x_i, x_{i+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductanceProfile {
    points: Vec<ProfilePoint>,
}

impl ConductanceProfile {
    /// Sorts by `x`, drops points beyond `½`, and keeps the points where the
    /// running minimum drops.
    pub fn from_points(mut points: Vec<ProfilePoint>) -> Result<Self> {
        if points.iter().any(|p| !(p.x > 0.0) || !(p.phi > 0.0) || !p.phi.is_finite()) {
            return Err(Error::Domain("profile points need positive mass and value".into()));
        }
        points.retain(|p| p.x <= 0.5);
        points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.phi.total_cmp(&b.phi)));
        let mut pruned: Vec<ProfilePoint> = Vec::with_capacity(points.len());
        for p in points {
            if pruned.last().is_none_or(|l| p.phi < l.phi) {
                pruned.push(p);
            }
        }
        Ok(ConductanceProfile { points: pruned })
    }

    /// The step function equal to `phi` on `[x0, ½]`.
    pub fn constant(x0: f64, phi: f64, certification: Certification) -> Result<Self> {
        Self::from_points(vec![ProfilePoint {
            x: x0,
            phi,
            certification,
            witness: Vec::new(),
        }])
    }

    pub fn points(&self) -> &[ProfilePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.points.iter().all(|p| p.certification == Certification::Exact)
    }

    /// `φ(x)`, `None` below the first breakpoint.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        let i = self.points.partition_point(|p| p.x <= x);
        (i > 0).then(|| self.points[i - 1].phi)
    }

    /// The profile of `c·φ`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Domain(format!("scale must be positive, got {c}")));
        }
        let mut out = self.clone();
        out.points.iter_mut().for_each(|p| p.phi *= c);
        Ok(out)
    }

    /// Columns `x, phi, certification, witness-size`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "phi", "certification", "witness-size"])?;
        for p in &self.points {
            w.write_record([
                p.x.to_string(),
                p.phi.to_string(),
                p.certification.as_str().to_string(),
                p.witness.len().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LkBound {
    pub value: f64,
    /// False when the profile holds upper bounds on `φ`, which make the
    /// integral an estimate rather than a bound.
    pub rigorous: bool,
}

/// `32 ∫_{π_min}^{½} dx / (x φ(x)²)`, integrated exactly over the steps.
///
/// The interval must be non-empty: with `π_min = ½` (a single edge) the
/// integral vanishes and bounds nothing.
pub fn lk_bound(profile: &ConductanceProfile, pi_min: f64, allow_heuristic: bool) -> Result<LkBound> {
    if !(pi_min > 0.0 && pi_min < 0.5) {
        return Err(Error::Domain(format!("pi_min must lie in (0, 1/2), got {pi_min}")));
    }
    let exact = profile.is_exact();
    if !exact && !allow_heuristic {
        return Err(Error::Domain("profile is not certified exact".into()));
    }
    let pts = profile.points();
    let first = pts.first().ok_or_else(|| Error::Domain("empty profile".into()))?;
    if first.x > pi_min * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "profile starts at {} and does not cover pi_min = {pi_min}",
            first.x
        )));
    }
    let mut integral = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let a = p.x.max(pi_min);
        let b = pts.get(i + 1).map_or(0.5, |q| q.x).min(0.5);
        if b > a {
            integral += (b / a).ln() / (p.phi * p.phi);
        }
    }
    Ok(LkBound {
        value: 32.0 * integral,
        rigorous: exact,
    })
}
