use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::contour::panel_rule;
use super::Meromorphic;
use crate::{Error, Result, C64};

/// Rectangle `[re_min, re_max] × [im_min, im_max]` to search, with the
/// numerical controls of the search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    #[serde(default = "ScanRegion::default_max_depth")]
    pub max_depth: usize,
    /// Newton stopping tolerance relative to the region diagonal.
    #[serde(default = "ScanRegion::default_newton_tol")]
    pub newton_tol: f64,
    /// Poles closer than this are merged; defaults to `1e-6` times the width.
    #[serde(default)]
    pub dedupe_radius: Option<f64>,
    /// Quadrature points per box edge before adaptive refinement.
    #[serde(default = "ScanRegion::default_edge_points")]
    pub edge_points: usize,
    /// Hankel singular values below `rank_tol` times the contour mean of
    /// `|f|` are treated as zero.
    #[serde(default = "ScanRegion::default_rank_tol")]
    pub rank_tol: f64,
}

impl ScanRegion {
    fn default_max_depth() -> usize {
        22
    }
    fn default_newton_tol() -> f64 {
        1e-13
    }
    fn default_edge_points() -> usize {
        128
    }
    fn default_rank_tol() -> f64 {
        1e-8
    }

    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let region = Self {
            re_min,
            re_max,
            im_min,
            im_max,
            max_depth: Self::default_max_depth(),
            newton_tol: Self::default_newton_tol(),
            dedupe_radius: None,
            edge_points: Self::default_edge_points(),
            rank_tol: Self::default_rank_tol(),
        };
        region.validate()?;
        Ok(region)
    }

    /// Strip of the lower half-plane reaching `depth` below the real axis.
    /// The top edge sits `depth/50` above the axis so that no quadrature
    /// node lands on real-axis features.
    pub fn lower_half(re_min: f64, re_max: f64, depth: f64) -> Result<Self> {
        Self::new(re_min, re_max, -depth, 0.02 * depth)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|v| v.is_finite());
        if !finite || self.re_max <= self.re_min || self.im_max <= self.im_min {
            return Err(Error::InvalidInput("scan region is empty or not finite".into()));
        }
        if self.edge_points < 128 {
            return Err(Error::InvalidInput("at least 128 quadrature points per edge are required".into()));
        }
        if !(self.newton_tol > 0.0 && self.rank_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn diagonal(&self) -> f64 {
        (self.width()).hypot(self.im_max - self.im_min)
    }

    pub fn dedupe(&self) -> f64 {
        self.dedupe_radius.unwrap_or(1e-6 * self.width())
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// First branch point whose downward cut passes through the region.
    pub fn crossing_cut(&self, branch_points: &[C64]) -> Option<C64> {
        branch_points.iter().copied().find(|b| b.re >= self.re_min && b.re <= self.re_max && b.im > self.im_min)
    }

    /// Narrows the real extent so that no cut crosses the region while
    /// `[keep_lo, keep_hi]` stays inside. The new edge sits a quarter of the
    /// way from the cut towards the kept interval.
    pub fn clear_of_cuts(&self, branch_points: &[C64], keep_lo: f64, keep_hi: f64) -> Result<ScanRegion> {
        let mut out = self.clone();
        while let Some(b) = out.crossing_cut(branch_points) {
            if b.re < keep_lo {
                out.re_min = b.re + 0.25 * (keep_lo - b.re);
            } else if b.re > keep_hi {
                out.re_max = b.re - 0.25 * (b.re - keep_hi);
            } else {
                return Err(Error::InvalidInput(format!(
                    "branch point {b} lies inside the interval [{keep_lo}, {keep_hi}] that must be scanned"
                )));
            }
        }
        out.validate()?;
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleLocation {
    pub omega: C64,
    /// `|1/f|` at the refined location.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleSearch {
    pub poles: Vec<PoleLocation>,
    /// Zeros of `f` counted in the accepted boxes.
    pub zeros: usize,
    /// Number of accepted leaf boxes.
    pub boxes: usize,
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn center(&self) -> C64 {
        C64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }
    fn scale(&self) -> f64 {
        0.5 * (self.x1 - self.x0).max(self.y1 - self.y0)
    }
    fn diag(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }
    fn contains_padded(&self, z: C64, pad: f64) -> bool {
        z.re >= self.x0 - pad && z.re <= self.x1 + pad && z.im >= self.y0 - pad && z.im <= self.y1 + pad
    }
    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.x0, self.y0),
            C64::new(self.x1, self.y0),
            C64::new(self.x1, self.y1),
            C64::new(self.x0, self.y1),
        ]
    }
    /// Two children across the longer side, split at fraction `t`.
    fn split(&self, t: f64) -> (Rect, Rect) {
        if self.x1 - self.x0 >= self.y1 - self.y0 {
            let xm = self.x0 + t * (self.x1 - self.x0);
            (Rect { x1: xm, ..*self }, Rect { x0: xm, ..*self })
        } else {
            let ym = self.y0 + t * (self.y1 - self.y0);
            (Rect { y1: ym, ..*self }, Rect { y0: ym, ..*self })
        }
    }
}

/// Contour data of one box.
#[derive(Clone, Copy, Debug)]
struct BoxScan {
    /// `(1/2πi) ∮ τ^k f dτ`, `τ = (z − c)/h`, for `k = 0..4`.
    sf: [C64; 4],
    sg: [C64; 4],
    scale_f: f64,
    scale_g: f64,
    /// Largest relative panel error accepted on the boundary.
    noise: f64,
    /// Winding number of `f` along the boundary (zeros minus poles).
    winding: i64,
}

enum ScanFail {
    /// A pole or zero sits on the contour to working precision.
    Singular,
    Fatal(Error),
}

impl From<Error> for ScanFail {
    fn from(e: Error) -> Self {
        match e {
            Error::NearPole { .. } => ScanFail::Singular,
            other => ScanFail::Fatal(other),
        }
    }
}

#[derive(Default, Clone, Copy)]
struct Acc {
    m: [C64; 8],
    abs_f: f64,
    abs_g: f64,
    noise: f64,
}

impl Acc {
    fn add(&mut self, o: &Acc) {
        for k in 0..8 {
            self.m[k] += o.m[k];
        }
        self.abs_f += o.abs_f;
        self.abs_g += o.abs_g;
        self.noise = self.noise.max(o.noise);
    }
}

struct Node {
    z: C64,
    f: C64,
}

struct PhaseTracker {
    first: Option<Node>,
    last: Option<Node>,
    total: f64,
}

/// Relative agreement demanded between a panel and its two halves.
const PANEL_TOL: f64 = 1e-13;
/// Largest relative panel error accepted once refinement stalls.
const NOISE_FLOOR: f64 = 1e-4;

const MAX_PHASE_STEP: f64 = PI / 3.0;

impl PhaseTracker {
    fn push<M: Meromorphic + ?Sized>(&mut self, f: &M, node: Node) -> std::result::Result<(), ScanFail> {
        if let Some(last) = self.last.take() {
            self.total += phase_between(f, &last, &node, 0)?;
        } else {
            self.first = Some(Node { z: node.z, f: node.f });
        }
        self.last = Some(node);
        Ok(())
    }

    fn close<M: Meromorphic + ?Sized>(mut self, f: &M) -> std::result::Result<f64, ScanFail> {
        let (first, last) = (self.first.take().unwrap(), self.last.take().unwrap());
        self.total += phase_between(f, &last, &first, 0)?;
        Ok(self.total)
    }
}

fn phase_between<M: Meromorphic + ?Sized>(
    f: &M,
    a: &Node,
    b: &Node,
    depth: usize,
) -> std::result::Result<f64, ScanFail> {
    let d = (b.f / a.f).arg();
    if !d.is_finite() {
        return Err(ScanFail::Singular);
    }
    if d.abs() <= MAX_PHASE_STEP {
        return Ok(d);
    }
    if depth > 40 {
        return Err(ScanFail::Singular);
    }
    let zm = 0.5 * (a.z + b.z);
    let m = Node { z: zm, f: f.value_and_reciprocal(zm)?.0 };
    Ok(phase_between(f, a, &m, depth + 1)? + phase_between(f, &m, b, depth + 1)?)
}

struct Edge {
    a: C64,
    b: C64,
    c: C64,
    h: f64,
}

impl Edge {
    fn panel<M: Meromorphic + ?Sized>(
        &self,
        f: &M,
        s0: f64,
        s1: f64,
    ) -> std::result::Result<(Acc, Vec<Node>), ScanFail> {
        let (x, w) = panel_rule();
        let (mid, half) = (0.5 * (s0 + s1), 0.5 * (s1 - s0));
        let dz = (self.b - self.a) / self.h;
        let mut acc = Acc::default();
        let mut nodes = Vec::with_capacity(x.len());
        for (xi, wi) in x.iter().zip(w) {
            let s = mid + half * xi;
            let z = self.a + (self.b - self.a) * s;
            let (fv, gv) = f.value_and_reciprocal(z)?;
            if !(fv.re.is_finite() && fv.im.is_finite() && gv.re.is_finite() && gv.im.is_finite()) {
                return Err(ScanFail::Singular);
            }
            let tau = (z - self.c) / self.h;
            let wt = dz * (half * wi);
            let mut p = C64::new(1.0, 0.0);
            for k in 0..4 {
                acc.m[k] += p * fv * wt;
                acc.m[4 + k] += p * gv * wt;
                p *= tau;
            }
            acc.abs_f += fv.norm() * wt.norm();
            acc.abs_g += gv.norm() * wt.norm();
            nodes.push(Node { z, f: fv });
        }
        Ok((acc, nodes))
    }

    /// Adaptive panel integration; accepted nodes are fed to the phase
    /// tracker in contour order.
    #[allow(clippy::too_many_arguments)]
    fn adapt<M: Meromorphic + ?Sized>(
        &self,
        f: &M,
        s0: f64,
        s1: f64,
        whole: (Acc, Vec<Node>),
        depth: usize,
        parent_err: f64,
        total: &mut Acc,
        tracker: &mut PhaseTracker,
    ) -> std::result::Result<(), ScanFail> {
        let sm = 0.5 * (s0 + s1);
        let left = self.panel(f, s0, sm)?;
        let right = self.panel(f, sm, s1)?;
        let mut halves = left.0;
        halves.add(&right.0);
        let ef = (0..4).map(|k| (halves.m[k] - whole.0.m[k]).norm()).fold(0.0, f64::max);
        let eg = (4..8).map(|k| (halves.m[k] - whole.0.m[k]).norm()).fold(0.0, f64::max);
        let err = (ef / halves.abs_f.max(1e-300)).max(eg / halves.abs_g.max(1e-300));
        // Refinement that stops paying off at a small error has reached the
        // evaluation noise of `f` and is accepted.
        let stalled = depth >= 3 && err <= NOISE_FLOOR && err > 0.25 * parent_err;
        if err <= PANEL_TOL || stalled {
            halves.noise = err;
            total.add(&halves);
            for n in left.1.into_iter().chain(right.1) {
                tracker.push(f, n)?;
            }
            return Ok(());
        }
        if depth >= 36 {
            return Err(ScanFail::Singular);
        }
        self.adapt(f, s0, sm, left, depth + 1, err, total, tracker)?;
        self.adapt(f, sm, s1, right, depth + 1, err, total, tracker)
    }
}

fn scan_box<M: Meromorphic + ?Sized>(f: &M, rect: &Rect, edge_points: usize) -> std::result::Result<BoxScan, ScanFail> {
    let c = rect.center();
    let h = rect.scale();
    let corners = rect.corners();
    let panels = edge_points.div_ceil(panel_rule().0.len()).max(1);
    let mut total = Acc::default();
    let mut tracker = PhaseTracker { first: None, last: None, total: 0.0 };
    for e in 0..4 {
        let edge = Edge { a: corners[e], b: corners[(e + 1) % 4], c, h };
        for p in 0..panels {
            let (s0, s1) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
            let whole = edge.panel(f, s0, s1)?;
            edge.adapt(f, s0, s1, whole, 0, f64::INFINITY, &mut total, &mut tracker)?;
        }
    }
    let phase = tracker.close(f)?;
    let turns = phase / (2.0 * PI);
    if (turns - turns.round()).abs() > 0.05 {
        return Err(ScanFail::Singular);
    }
    let norm = C64::new(0.0, 2.0 * PI);
    let mut sf = [C64::new(0.0, 0.0); 4];
    let mut sg = [C64::new(0.0, 0.0); 4];
    for k in 0..4 {
        sf[k] = total.m[k] / norm;
        sg[k] = total.m[4 + k] / norm;
    }
    Ok(BoxScan {
        sf,
        sg,
        scale_f: total.abs_f / (2.0 * PI),
        scale_g: total.abs_g / (2.0 * PI),
        noise: total.noise,
        winding: turns.round() as i64,
    })
}

/// Numerical rank of the 2×2 Hankel matrix `[[s0, s1], [s1, s2]]`.
fn hankel_rank(s: &[C64; 4], threshold: f64) -> usize {
    let (a, b, d) = (s[0], s[1], s[2]);
    let t = a.norm_sqr() + 2.0 * b.norm_sqr() + d.norm_sqr();
    let det = (a * d - b * b).norm();
    let s1 = (0.5 * (t + (t * t - 4.0 * det * det).max(0.0).sqrt())).sqrt();
    let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
    usize::from(s1 > threshold) + usize::from(s2 > threshold)
}

/// Roots of `det(H1 − λ H0) = 0` for the 2×2 moment pencil.
fn pencil_roots(s: &[C64; 4]) -> Option<[C64; 2]> {
    let a = s[0] * s[2] - s[1] * s[1];
    let b = -(s[0] * s[3] - s[1] * s[2]);
    let c = s[1] * s[3] - s[2] * s[2];
    if a.norm() == 0.0 {
        return None;
    }
    let disc = (b * b - 4.0 * a * c).sqrt();
    Some([(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)])
}

struct Config<'a> {
    region: &'a ScanRegion,
    newton_abs: f64,
}

#[derive(Default)]
struct Found {
    poles: Vec<PoleLocation>,
    zeros: usize,
    boxes: usize,
}

impl Found {
    fn merge(mut self, o: Found) -> Found {
        self.poles.extend(o.poles);
        self.zeros += o.zeros;
        self.boxes += o.boxes;
        self
    }
}

const SPLITS: [f64; 4] = [0.5137, 0.4711, 0.5389, 0.4463];

fn unresolved(rect: &Rect, reason: impl Into<String>) -> Error {
    Error::UnresolvedRegion { re_lo: rect.x0, re_hi: rect.x1, im_lo: rect.y0, im_hi: rect.y1, reason: reason.into() }
}

fn search<M: Meromorphic + ?Sized>(f: &M, rect: Rect, scan: BoxScan, depth: usize, cfg: &Config) -> Result<Found> {
    let r = cfg.region;
    let tol = r.rank_tol.max(10.0 * scan.noise);
    let p = hankel_rank(&scan.sf, tol * scan.scale_f);
    let z = hankel_rank(&scan.sg, tol * scan.scale_g);
    let consistent = p as i64 - z as i64 == -scan.winding;
    if consistent && p <= 1 && z <= 1 {
        if p == 0 {
            return Ok(Found { poles: vec![], zeros: z, boxes: 1 });
        }
        let tau = scan.sf[1] / scan.sf[0];
        let guess = rect.center() + rect.scale() * tau;
        if let Some(pole) = polish(f, guess, &rect, cfg)? {
            return Ok(Found { poles: vec![pole], zeros: z, boxes: 1 });
        }
    }
    if depth >= r.max_depth {
        let order = z as i64 - scan.winding;
        if order >= 2 && z == 0 {
            if let Some([a, b]) = pencil_roots(&scan.sf) {
                if (a - b).norm() < 1e-3 {
                    return Err(Error::HigherOrderPole { location: rect.center() + rect.scale() * 0.5 * (a + b), order });
                }
            }
        }
        return Err(unresolved(
            &rect,
            format!("maximum subdivision depth reached (pole rank {p}, zero rank {z}, winding {})", scan.winding),
        ));
    }
    for t in SPLITS {
        let (a, b) = rect.split(t);
        let sa = scan_box(f, &a, r.edge_points);
        let sb = scan_box(f, &b, r.edge_points);
        match (sa, sb) {
            (Ok(sa), Ok(sb)) => {
                let (ra, rb) = rayon::join(|| search(f, a, sa, depth + 1, cfg), || search(f, b, sb, depth + 1, cfg));
                return Ok(ra?.merge(rb?));
            }
            (Err(ScanFail::Fatal(e)), _) | (_, Err(ScanFail::Fatal(e))) => return Err(e),
            _ => continue,
        }
    }
    Err(unresolved(&rect, "every split line passes through a singularity"))
}

fn polish<M: Meromorphic + ?Sized>(f: &M, z0: C64, rect: &Rect, cfg: &Config) -> Result<Option<PoleLocation>> {
    let g = |z: C64| -> Result<Option<C64>> {
        match f.value_and_reciprocal(z) {
            // A non-finite value means `z` landed on the pole itself.
            Ok((_, g)) if g.re.is_finite() && g.im.is_finite() => Ok(Some(g)),
            Ok(_) | Err(Error::NearPole { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    // Steps below a few ulps of |z| only chase rounding noise.
    let ulp = 16.0 * f64::EPSILON * z0.norm().max(rect.diag());
    let tol = cfg.newton_abs.max(ulp);
    let hd = (1e-4 * rect.diag()).max(1e3 * ulp);
    let mut z = z0;
    let mut last_step = f64::INFINITY;
    let mut converged = false;
    for _ in 0..80 {
        let Some(gz) = g(z)? else {
            if !rect.contains_padded(z, 1e-9 * rect.diag()) {
                return Ok(None);
            }
            return Ok(Some(PoleLocation { omega: z, residual: 0.0 }));
        };
        let (Some(gp), Some(gm)) = (g(z + hd)?, g(z - hd)?) else {
            break;
        };
        let dg = (gp - gm) / (2.0 * hd);
        if dg.norm() == 0.0 || !dg.re.is_finite() {
            return Ok(None);
        }
        let step = gz / dg;
        z -= step;
        if !rect.contains_padded(z, 0.05 * rect.diag()) {
            return Ok(None);
        }
        let size = step.norm();
        if size <= tol || (size <= 1e-8 * rect.diag() && size >= 0.5 * last_step) {
            converged = true;
            break;
        }
        last_step = size;
    }
    if !converged || !rect.contains_padded(z, 1e-9 * rect.diag()) {
        return Ok(None);
    }
    let residual = g(z)?.map_or(0.0, |v| v.norm());
    Ok(Some(PoleLocation { omega: z, residual }))
}

/// Locates all poles of `f` inside `region`.
///
/// A box is accepted only when its Hankel pole and zero counts agree with the
/// argument principle. Boxes that never reach agreement before
/// `region.max_depth` produce [`Error::UnresolvedRegion`]; a coalesced pair
/// is reported as [`Error::HigherOrderPole`].
pub fn find_poles<M: Meromorphic + ?Sized>(f: &M, region: &ScanRegion) -> Result<PoleSearch> {
    region.validate()?;
    if let Some(bp) = region.crossing_cut(&f.branch_points()) {
        return Err(Error::UnresolvedRegion {
            re_lo: region.re_min,
            re_hi: region.re_max,
            im_lo: region.im_min,
            im_hi: region.im_max,
            reason: format!("the branch cut below {bp} crosses the region"),
        });
    }
    let rect = Rect { x0: region.re_min, x1: region.re_max, y0: region.im_min, y1: region.im_max };
    let cfg = Config { region, newton_abs: region.newton_tol * region.diagonal() };
    let scan = match scan_box(f, &rect, region.edge_points) {
        Ok(s) => s,
        Err(ScanFail::Fatal(e)) => return Err(e),
        Err(ScanFail::Singular) => {
            return Err(unresolved(&rect, "a singularity lies on the region boundary; perturb the region"))
        }
    };
    let found = search(f, rect, scan, 0, &cfg)?;
    let mut poles: Vec<PoleLocation> = found.poles.into_iter().filter(|p| region.contains(p.omega)).collect();
    poles.sort_by(|a, b| a.omega.re.total_cmp(&b.omega.re).then(a.omega.im.total_cmp(&b.omega.im)));
    let radius = region.dedupe();
    let mut unique: Vec<PoleLocation> = Vec::with_capacity(poles.len());
    for p in poles {
        if let Some(q) = unique.iter_mut().find(|q| (q.omega - p.omega).norm() < radius) {
            if p.residual < q.residual {
                *q = p;
            }
        } else {
            unique.push(p);
        }
    }
    Ok(PoleSearch { poles: unique, zeros: found.zeros, boxes: found.boxes })
}
