//! Periodic Kepler billiard orbits shadowing concatenations of limit
//! triangles, realized as critical points of the total Jacobi length over a
//! product of boundary intervals.
//!
//! Two alphabets are supported. `{T, T'}` shadows a non-zero-area triangle
//! through the center in either orientation: each letter contributes a
//! direct arc followed by an indirect one. `{m, M}` shadows the segments from
//! the center to the distance minimum or maximum, with a rotating arc
//! between an antipodal pair of inflection points as transfer.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::birkhoff::RadialKind;
use crate::error::{KbError, KbResult};
use crate::focal::{classify_kind, critical_points_psi, index_additivity, CriticalPoint, Kind};
use crate::kepler_arc::{arg_gap, generating_partials, jacobi_length, solve_arc_with_tol, ArcClass, ArcDomain, KeplerArc};
use crate::birkhoff::matmul2;
use crate::kepler_billiard::{kmap, symplectic_jacobian, BilliardState};
use crate::planar::{circ_diff, wrap_2pi, Pt};
use crate::scene::Scene;
use crate::tables::BoundaryTable;

pub const MAX_WORD_LEN: usize = 64;
pub const FOCAL_GUARD: &str = "focal point of the second kind: no construction applies";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    T,
    TPrime,
    Min,
    Max,
}

impl Letter {
    fn alphabet(self) -> Alphabet {
        match self {
            Letter::T | Letter::TPrime => Alphabet::Triangle,
            Letter::Min | Letter::Max => Alphabet::Degenerate,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::T => "T",
            Letter::TPrime => "T'",
            Letter::Min => "m",
            Letter::Max => "M",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alphabet {
    /// `{T, T'}`
    Triangle,
    /// `{m, M}`
    Degenerate,
}

/// Periodicity modulus of a periodic word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolWord {
    pub letters: Vec<Letter>,
}

impl SymbolWord {
    pub fn new(letters: Vec<Letter>) -> KbResult<Self> {
        if letters.is_empty() {
            return Err(KbError::InvalidParameter("empty word".into()));
        }
        if letters.len() > MAX_WORD_LEN {
            return Err(KbError::InvalidParameter(format!("word length {} exceeds {MAX_WORD_LEN}", letters.len())));
        }
        let a = letters[0].alphabet();
        if letters.iter().any(|l| l.alphabet() != a) {
            return Err(KbError::InvalidParameter("word mixes the {T, T'} and {m, M} alphabets".into()));
        }
        Ok(Self { letters })
    }

    /// Parses `TT'T`, `TT′` or `mMm`.
    pub fn parse(s: &str) -> KbResult<Self> {
        let mut letters = Vec::new();
        let mut chars = s.trim().chars().peekable();
        while let Some(ch) = chars.next() {
            let l = match ch {
                'T' => {
                    if matches!(chars.peek(), Some('\'') | Some('′')) {
                        chars.next();
                        Letter::TPrime
                    } else {
                        Letter::T
                    }
                }
                'm' => Letter::Min,
                'M' => Letter::Max,
                c if c.is_whitespace() => continue,
                c => return Err(KbError::InvalidParameter(format!("unexpected symbol '{c}' in word '{s}'"))),
            };
            letters.push(l);
        }
        Self::new(letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.letters[0].alphabet()
    }

    /// Smallest `p` dividing the length with `s_{i+p} = s_i`.
    pub fn minimal_period(&self) -> usize {
        let n = self.len();
        (1..=n).find(|&p| n % p == 0 && (0..n).all(|i| self.letters[i] == self.letters[(i + p) % n])).unwrap_or(n)
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Closed arc of boundary parameters `[center - radius, center + radius]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub center: f64,
    pub radius: f64,
}

impl Interval {
    pub fn contains(&self, u: f64) -> bool {
        circ_diff(u, self.center).abs() <= self.radius * (1.0 + 1e-12)
    }

    fn clamp(&self, u: f64) -> f64 {
        self.center + circ_diff(u, self.center).clamp(-self.radius, self.radius)
    }

    fn overlaps(&self, other: &Interval) -> bool {
        circ_diff(self.center, other.center).abs() <= self.radius + other.radius
    }

    fn samples(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        (0..n).map(move |k| self.center - self.radius + 2.0 * self.radius * k as f64 / (n - 1) as f64)
    }
}

/// Interval layout shared by every word of one alphabet.
#[derive(Debug, Clone, PartialEq)]
pub enum Template {
    Triangle {
        /// Neighborhood of the first vertex `xi_hat`.
        i: Interval,
        /// Neighborhood of the second vertex `xi_hat'`.
        i_prime: Interval,
        /// The critical point of `Psi` being shadowed.
        vertex: CriticalPoint,
    },
    Degenerate {
        m: Interval,
        big_m: Interval,
        p: Interval,
        q: Interval,
        /// Rotation sense of the transfer arc from `P` to `Q`.
        transfer: ArcClass,
    },
}

/// Intervals and admissibility parameters for one alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct WordDomain {
    pub template: Template,
    pub arcs: ArcDomain,
}

impl WordDomain {
    pub fn alphabet(&self) -> Alphabet {
        match self.template {
            Template::Triangle { .. } => Alphabet::Triangle,
            Template::Degenerate { .. } => Alphabet::Degenerate,
        }
    }

    /// Bounce intervals of one letter, in bounce order.
    pub fn block(&self, l: Letter) -> KbResult<Vec<Interval>> {
        match (&self.template, l) {
            (Template::Triangle { i, i_prime, .. }, Letter::T) => Ok(vec![*i, *i_prime]),
            (Template::Triangle { i, i_prime, .. }, Letter::TPrime) => Ok(vec![*i_prime, *i]),
            (Template::Degenerate { m, p, q, .. }, Letter::Min) => Ok(vec![*m, *p, *q]),
            (Template::Degenerate { big_m, p, q, .. }, Letter::Max) => Ok(vec![*big_m, *p, *q]),
            _ => Err(KbError::InvalidParameter(format!("letter {l} does not belong to the domain's alphabet"))),
        }
    }

    /// Arc classes leaving each bounce of a block; the last arc joins the
    /// next block.
    pub fn block_arcs(&self) -> Vec<ArcClass> {
        match &self.template {
            Template::Triangle { .. } => vec![ArcClass::Direct, ArcClass::Indirect],
            Template::Degenerate { transfer, .. } => vec![ArcClass::Indirect, *transfer, ArcClass::Indirect],
        }
    }

    /// Interval of every bounce for a word.
    pub fn layout(&self, word: &SymbolWord) -> KbResult<Vec<Interval>> {
        if word.alphabet() != self.alphabet() {
            return Err(KbError::InvalidParameter(format!("word {word} does not match the domain alphabet")));
        }
        let mut out = Vec::new();
        for &l in &word.letters {
            out.extend(self.block(l)?);
        }
        Ok(out)
    }

    /// Arc class leaving each bounce for a word.
    pub fn arc_classes(&self, word: &SymbolWord) -> Vec<ArcClass> {
        let b = self.block_arcs();
        (0..word.len()).flat_map(|_| b.iter().cloned()).collect()
    }

    /// Limit configuration: the vertices of the shadowed objects.
    pub fn limit_point(&self, word: &SymbolWord) -> KbResult<Vec<f64>> {
        Ok(self.layout(word)?.iter().map(|i| i.center).collect())
    }

    /// Widths of the intervals of the template.
    pub fn widths(&self) -> Vec<(String, f64)> {
        match &self.template {
            Template::Triangle { i, i_prime, .. } => {
                vec![("I".into(), 2.0 * i.radius), ("I'".into(), 2.0 * i_prime.radius)]
            }
            Template::Degenerate { m, big_m, p, q, .. } => vec![
                ("I_m".into(), 2.0 * m.radius),
                ("I_M".into(), 2.0 * big_m.radius),
                ("I_P".into(), 2.0 * p.radius),
                ("I_Q".into(), 2.0 * q.radius),
            ],
        }
    }
}

fn pairs_admissible(table: &BoundaryTable, c: Pt, a: &Interval, b: &Interval, tilde: bool, dom: &ArcDomain) -> bool {
    let n = 9;
    a.samples(n).all(|x| {
        b.samples(n).all(|y| {
            let p = table.position(x) - c;
            let q = table.position(y) - c;
            if tilde {
                dom.in_k_tilde(p, q)
            } else {
                dom.in_k(p, q)
            }
        })
    })
}

/// Builds a triangle template around a non-zero-area critical point of `Psi`.
pub fn triangle_template(
    table: &BoundaryTable,
    c: Pt,
    vertex: CriticalPoint,
    others: &[CriticalPoint],
    dom: &ArcDomain,
) -> KbResult<WordDomain> {
    let (a, b) = (vertex.xi, vertex.eta);
    let mut r = (0.25f64).min(0.45 * circ_diff(a, b).abs());
    for _ in 0..40 {
        let i = Interval { center: a, radius: r };
        let ip = Interval { center: b, radius: r };
        let unique = others.iter().all(|o| {
            if (o.xi, o.eta) == (vertex.xi, vertex.eta) {
                return true;
            }
            let inside = |x: f64, y: f64| (i.contains(x) && ip.contains(y)) || (ip.contains(x) && i.contains(y));
            !inside(o.xi, o.eta)
        });
        if unique && !i.overlaps(&ip) && pairs_admissible(table, c, &i, &ip, false, dom) {
            return Ok(WordDomain { template: Template::Triangle { i, i_prime: ip, vertex }, arcs: *dom });
        }
        r *= 0.7;
    }
    Err(KbError::NotApplicable(format!(
        "no admissible neighborhoods of ({a}, {b}): the vertices are too close to antipodal for delta = {}",
        dom.delta
    )))
}

/// Builds a degenerate template from the min/max and inflection quadruple.
pub fn degenerate_template(table: &BoundaryTable, c: Pt, m: f64, big_m: f64, p: f64, q: f64, transfer: ArcClass, dom: &ArcDomain) -> KbResult<WordDomain> {
    let centers = [m, big_m, p, q];
    let mut r: f64 = 0.25;
    for (k, &x) in centers.iter().enumerate() {
        for &y in &centers[k + 1..] {
            r = r.min(0.45 * circ_diff(x, y).abs());
        }
    }
    for _ in 0..40 {
        let iv = |x: f64| Interval { center: x, radius: r };
        let (im, ibm, ip, iq) = (iv(m), iv(big_m), iv(p), iv(q));
        let ok = pairs_admissible(table, c, &im, &ip, false, dom)
            && pairs_admissible(table, c, &ibm, &ip, false, dom)
            && pairs_admissible(table, c, &iq, &im, false, dom)
            && pairs_admissible(table, c, &iq, &ibm, false, dom)
            && pairs_admissible(table, c, &ip, &iq, true, dom);
        if ok {
            return Ok(WordDomain {
                template: Template::Degenerate { m: im, big_m: ibm, p: ip, q: iq, transfer },
                arcs: *dom,
            });
        }
        r *= 0.7;
    }
    Err(KbError::NotApplicable("no admissible neighborhoods of the min/max and inflection quadruple".into()))
}

/// Outcome of interval selection for a table and center.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSelection {
    pub triangle: Option<WordDomain>,
    pub degenerate: Option<WordDomain>,
    /// Why each template was not built.
    pub notes: Vec<String>,
}

/// Chooses templates: the `{T, T'}` one around the non-zero-area critical
/// point of `Psi` with non-zero index and largest level; otherwise the
/// `{m, M}` one when the distance function has the required quadruple.
pub fn select_intervals(table: &BoundaryTable, c: Pt, dom: &ArcDomain) -> KbResult<IntervalSelection> {
    let kind = classify_kind(table, c)?;
    if kind.focal.is_focal() && kind.kind == Some(Kind::Second) {
        return Err(KbError::NotApplicable(FOCAL_GUARD.into()));
    }
    let set = critical_points_psi(table, c)?;
    let mut notes = Vec::new();
    let triangle = match pick_triangle_vertex(&set.points) {
        Some(v) => match triangle_template(table, c, v, &set.points, dom) {
            Ok(d) => Some(d),
            Err(e) => {
                notes.push(e.to_string());
                None
            }
        },
        None => {
            notes.push("no non-zero-area critical point of Psi with non-zero index".into());
            None
        }
    };
    let degenerate = if triangle.is_some() {
        None
    } else {
        match degenerate_quadruple(table, c, &kind.critical) {
            Ok((m, big_m, p, q, transfer)) => match degenerate_template(table, c, m, big_m, p, q, transfer, dom) {
                Ok(d) => Some(d),
                Err(e) => {
                    notes.push(e.to_string());
                    None
                }
            },
            Err(e) => {
                notes.push(e.to_string());
                None
            }
        }
    };
    Ok(IntervalSelection { triangle, degenerate, notes })
}

/// Non-zero-area, non-zero-index critical point with the largest level.
pub fn pick_triangle_vertex(points: &[CriticalPoint]) -> Option<CriticalPoint> {
    points
        .iter()
        .filter(|p| !p.zero_area && p.index != 0)
        .max_by(|a, b| a.level.total_cmp(&b.level))
        .copied()
}

fn degenerate_quadruple(
    table: &BoundaryTable,
    c: Pt,
    crit: &[crate::birkhoff::RadialCritical],
) -> KbResult<(f64, f64, f64, f64, ArcClass)> {
    let mins: Vec<_> = crit.iter().filter(|p| p.kind == RadialKind::Min).collect();
    let maxs: Vec<_> = crit.iter().filter(|p| p.kind == RadialKind::Max).collect();
    let infl: Vec<_> = crit.iter().filter(|p| p.kind == RadialKind::Inflection).collect();
    if mins.len() != 1 || maxs.len() != 1 {
        return Err(KbError::NotApplicable(format!(
            "{{m, M}} needs a unique distance minimum and maximum, found {} and {}",
            mins.len(),
            maxs.len()
        )));
    }
    let antipodal = |x: f64, y: f64| (arg_gap(table.position(x) - c, table.position(y) - c) - PI).abs() < 1e-6;
    if !antipodal(mins[0].u, maxs[0].u) {
        return Err(KbError::NotApplicable("distance minimum and maximum are not antipodal".into()));
    }
    for (k, a) in infl.iter().enumerate() {
        for b in &infl[k + 1..] {
            if antipodal(a.u, b.u) {
                let (p, q) = (a.u, b.u);
                let r = 0.25 * circ_diff(p, q).abs().min(0.5);
                let idx = index_additivity(table, c, p, q, r)?;
                let transfer = if idx.a != 0 {
                    ArcClass::Ccw
                } else if idx.c != 0 {
                    ArcClass::Cw
                } else {
                    continue;
                };
                return Ok((mins[0].u, maxs[0].u, p, q, transfer));
            }
        }
    }
    Err(KbError::NotApplicable("no antipodal pair of inflection points of the distance with non-zero index".into()))
}

/// Total Jacobi length of the closed concatenation and its gradient with
/// respect to the raw bounce parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct WValue {
    /// `NaN` when only the gradient was requested.
    pub value: f64,
    pub grad: Vec<f64>,
    /// Gradient with respect to arclength.
    pub grad_unit: Vec<f64>,
    pub arcs: Vec<KeplerArc>,
}

fn w_assemble(scene: &Scene, classes: &[ArcClass], u: &[f64], dom: &ArcDomain, with_value: bool) -> KbResult<WValue> {
    let n = u.len();
    let mut grad = vec![0.0; n];
    let mut arcs = Vec::with_capacity(n);
    let mut value = 0.0;
    for k in 0..n {
        let j = (k + 1) % n;
        let g = generating_partials(scene, u[k], u[j], classes[k], dom)
            .map_err(|e| KbError::NotApplicable(format!("arc {k} ({} -> {}): {e}", u[k], u[j])))?;
        grad[k] += g.d1;
        grad[j] += g.d2;
        if with_value {
            value += jacobi_length(&g.arc)?;
        }
        arcs.push(g.arc);
    }
    let grad_unit = grad.iter().zip(u).map(|(g, &x)| g / scene.table.speed(x)).collect();
    Ok(WValue { value: if with_value { value } else { f64::NAN }, grad, grad_unit, arcs })
}

/// Evaluates `W` (or its degenerate variant) at `u`.
pub fn w_eval(word: &SymbolWord, domain: &WordDomain, scene: &Scene, u: &[f64]) -> KbResult<WValue> {
    w_eval_with(word, domain, scene, u, true)
}

pub fn w_eval_with(word: &SymbolWord, domain: &WordDomain, scene: &Scene, u: &[f64], with_value: bool) -> KbResult<WValue> {
    let classes = domain.arc_classes(word);
    if u.len() != classes.len() {
        return Err(KbError::InvalidParameter(format!("expected {} bounce parameters, got {}", classes.len(), u.len())));
    }
    w_assemble(scene, &classes, u, &domain.arcs, with_value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Words are only solved at energies at or above this.
    pub min_energy: f64,
    /// Stop when every arclength partial of `W` is below this.
    pub grad_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { min_energy: 1e3, grad_tol: 1e-11, max_iter: 60, fd_step: 1e-6 }
    }
}

/// A periodic orbit realizing a word.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedOrbit {
    pub word: SymbolWord,
    pub u: Vec<f64>,
    pub intervals: Vec<Interval>,
    pub classes: Vec<ArcClass>,
    pub arcs: Vec<KeplerArc>,
    /// `d2 S(u_{k-1}, u_k) + d1 S(u_k, u_{k+1})` in arclength at each bounce.
    pub reflection_residuals: Vec<f64>,
    /// Bounces per period of the geometric orbit.
    pub period: usize,
    /// Set when the orbit repeats with a shorter word period.
    pub collapsed_to: Option<usize>,
    pub iterations: usize,
    pub start: usize,
}

impl RealizedOrbit {
    pub fn max_reflection_residual(&self) -> f64 {
        self.reflection_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

fn newton(
    scene: &Scene,
    classes: &[ArcClass],
    layout: &[Interval],
    dom: &ArcDomain,
    mut x: Vec<f64>,
    opts: &SolveOptions,
) -> Option<(Vec<f64>, usize)> {
    let n = x.len();
    let grad = |x: &[f64]| w_assemble(scene, classes, x, dom, false).ok();
    let merit = |w: &WValue| w.grad_unit.iter().map(|g| g * g).sum::<f64>();
    let mut cur = grad(&x)?;
    for it in 0..opts.max_iter {
        let gmax = cur.grad_unit.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < opts.grad_tol {
            return Some((x, it));
        }
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for col in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[col] += opts.fd_step;
            xm[col] -= opts.fd_step;
            let (gp, gm) = (grad(&xp)?, grad(&xm)?);
            for row in 0..n {
                hess[(row, col)] = (gp.grad[row] - gm.grad[row]) / (2.0 * opts.fd_step);
            }
        }
        let hess = 0.5 * (&hess + hess.transpose());
        let rhs = -DVector::from_column_slice(&cur.grad);
        let step = hess.lu().solve(&rhs)?;
        let m0 = merit(&cur);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = (0..n).map(|k| layout[k].clamp(x[k] + t * step[k])).collect();
            if let Some(w) = grad(&trial) {
                if merit(&w) < m0 {
                    accepted = Some((trial, w));
                    break;
                }
            }
            t *= 0.5;
        }
        let (nx, nw) = accepted?;
        let moved = nx.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        x = nx;
        cur = nw;
        if moved < 1e-15 {
            let gmax = cur.grad_unit.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            return (gmax < 1e3 * opts.grad_tol).then_some((x, it + 1));
        }
    }
    None
}

/// Finds an interior critical point of `W` for a periodic word.
pub fn solve_word(word: &SymbolWord, scene: &Scene, domain: &WordDomain, opts: &SolveOptions) -> KbResult<RealizedOrbit> {
    if scene.h < opts.min_energy {
        return Err(KbError::NotApplicable(format!(
            "energy {} is below the configured threshold {}",
            scene.h, opts.min_energy
        )));
    }
    let layout = domain.layout(word)?;
    let classes = domain.arc_classes(word);
    let per_block = domain.block_arcs().len();
    let base = domain.limit_point(word)?;
    let offsets = [0.0, -0.5, 0.5];
    let n_starts = offsets.len().pow(per_block as u32);
    for start in 0..n_starts {
        let mut pattern = Vec::with_capacity(per_block);
        let mut s = start;
        for _ in 0..per_block {
            pattern.push(offsets[s % 3]);
            s /= 3;
        }
        let x0: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(k, &c)| c + pattern[k % per_block] * layout[k].radius)
            .collect();
        let Some((x, iterations)) = newton(scene, &classes, &layout, &domain.arcs, x0, opts) else {
            continue;
        };
        if x.iter().zip(&layout).any(|(&u, iv)| (circ_diff(u, iv.center).abs() - iv.radius).abs() < 1e-12) {
            // critical point of the restriction to a face, not an interior one
            continue;
        }
        let x: Vec<f64> = x.into_iter().map(wrap_2pi).collect();
        let w = w_assemble(scene, &classes, &x, &domain.arcs, false)?;
        let reflection_residuals = w.grad_unit.clone();
        let p = word.minimal_period();
        let collapsed_to = if p < word.len() {
            let shift = p * per_block;
            let n = x.len();
            let same = (0..n).all(|k| circ_diff(x[k], x[(k + shift) % n]).abs() < 1e-8);
            same.then_some(p)
        } else {
            None
        };
        let period = collapsed_to.unwrap_or(word.len()) * per_block;
        return Ok(RealizedOrbit {
            word: word.clone(),
            u: x,
            intervals: layout,
            classes,
            arcs: w.arcs,
            reflection_residuals,
            period,
            collapsed_to,
            iterations,
            start,
        });
    }
    Err(KbError::NoConvergence(format!(
        "no interior critical point found for word {word} after {n_starts} starts (nonexistence is not implied)"
    )))
}

/// Independent audit of a realized orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Reflection condition recomputed from fresh arcs, arclength units.
    pub max_reflection_residual: f64,
    pub max_endpoint_residual: f64,
    /// Energy residual along every arc relative to the local kinetic energy
    /// `h + mu/r`; finite through collisions.
    pub max_energy_residual: f64,
    pub inside_intervals: bool,
    /// Largest depth by which an arc leaves the table (0 when inside).
    pub max_excursion: f64,
    /// Deviation of the impacts of one continuous `kmap` cycle started at
    /// the first bounce, in arclength and relative velocity.
    pub replay_deviation: f64,
    /// Same, restarting `kmap` at every bounce of the orbit.
    pub stepwise_deviation: f64,
    /// Spectral norm of the linearized return map over one period in
    /// (arclength, tangential velocity). A continuous replay cannot be
    /// expected to agree better than about `stepwise_deviation` times this.
    pub monodromy_norm: f64,
    /// Total length at quadrature tolerances `1e-8, 1e-10, 1e-12, 1e-13`.
    pub length_sweep: Vec<(f64, f64)>,
    pub period: usize,
    /// Length gradient after the extended-precision polish.
    pub precise_gradient: f64,
    /// Largest parameter change made by that polish.
    pub precise_shift: f64,
    /// `replay_deviation` recomputed in extended precision from the
    /// polished orbit; infinite if the replay failed.
    pub precise_replay_deviation: f64,
}

pub const REFLECTION_TOL: f64 = 1e-8;
pub const REPLAY_TOL: f64 = 1e-6;

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.passed_with(REFLECTION_TOL, REPLAY_TOL)
    }

    pub fn passed_with(&self, reflection_tol: f64, replay_tol: f64) -> bool {
        self.max_reflection_residual < reflection_tol
            && self.max_endpoint_residual < 1e-8
            && self.max_energy_residual < 1e-8
            && self.inside_intervals
            && self.max_excursion == 0.0
            && self.precise_replay_deviation < replay_tol
    }
}

fn impact_deviation(scene: &Scene, s: &BilliardState, u: f64, v: Pt) -> f64 {
    let du = circ_diff(s.u, u).abs() * scene.table.speed(u);
    let dv = (s.v - v).norm() / v.norm();
    du.max(dv)
}

/// Recomputes all arcs from the bounce parameters and replays the orbit
/// with the billiard map.
pub fn verify_orbit(orbit: &RealizedOrbit, scene: &Scene) -> KbResult<VerifyReport> {
    let n = orbit.u.len();
    let u = &orbit.u;
    let mut arcs = Vec::with_capacity(n);
    for k in 0..n {
        let p0 = scene.rel(u[k]);
        let p1 = scene.rel(u[(k + 1) % n]);
        arcs.push(solve_arc_with_tol(p0, p1, orbit.classes[k], scene.h, scene.mu, 1e-14)?);
    }
    let mut refl = 0.0f64;
    for k in 0..n {
        let prev = &arcs[(k + n - 1) % n];
        let next = &arcs[k];
        let t = scene.table.eval(u[k]).tangent();
        let a = (scene.h + scene.mu / prev.p1.norm()).sqrt() * crate::planar::dot(prev.v1 / prev.v1.norm(), t);
        let b = -(scene.h + scene.mu / next.p0.norm()).sqrt() * crate::planar::dot(next.v0 / next.v0.norm(), t);
        refl = refl.max((a + b).abs());
    }
    let max_endpoint_residual = arcs.iter().fold(0.0f64, |m, a| m.max(a.endpoint_residual()));
    let max_energy_residual = arcs.iter().fold(0.0f64, |m, a| m.max(a.energy_residual_regularized(256)));
    let inside_intervals = u.iter().zip(&orbit.intervals).all(|(&x, iv)| iv.contains(x));
    let mut max_excursion = 0.0f64;
    for a in &arcs {
        for j in 1..256 {
            let tau = a.t_reg * j as f64 / 256.0;
            let (z, _) = a.state_at(tau);
            let g = scene.inside_indicator(z);
            if g > 1e-12 {
                max_excursion = max_excursion.max(g);
            }
        }
    }
    let mut replay_deviation = 0.0f64;
    let mut s = BilliardState { u: u[0], v: arcs[0].v0 };
    for k in 1..=n {
        let j = k % n;
        match kmap(scene, &s) {
            Ok(next) => {
                replay_deviation = replay_deviation.max(impact_deviation(scene, &next, u[j], arcs[j].v0));
                s = next;
            }
            Err(_) => {
                replay_deviation = f64::INFINITY;
                break;
            }
        }
    }
    let mut stepwise_deviation = 0.0f64;
    for k in 0..n {
        let j = (k + 1) % n;
        let dev = match kmap(scene, &BilliardState { u: u[k], v: arcs[k].v0 }) {
            Ok(next) => impact_deviation(scene, &next, u[j], arcs[j].v0),
            Err(_) => f64::INFINITY,
        };
        stepwise_deviation = stepwise_deviation.max(dev);
    }
    let mut mono = [[1.0, 0.0], [0.0, 1.0]];
    for k in 0..n {
        let j = symplectic_jacobian(scene, &BilliardState { u: u[k], v: arcs[k].v0 }, 1e-7)
            .unwrap_or([[f64::NAN; 2]; 2]);
        mono = matmul2(j, mono);
    }
    let monodromy_norm = spectral_norm(mono);
    let mut length_sweep = Vec::new();
    for tol in [1e-8, 1e-10, 1e-12, 1e-13] {
        let mut total = 0.0;
        for a in &arcs {
            total += solve_arc_with_tol(a.p0, a.p1, a.class, scene.h, scene.mu, tol)?.length;
        }
        length_sweep.push((tol, total));
    }
    let (precise_gradient, precise_shift, precise_replay_deviation) = match crate::precise::refine(scene, u, &orbit.classes) {
        Ok(p) => (p.gradient, p.shift, crate::precise::replay(scene, &p).unwrap_or(f64::INFINITY)),
        Err(_) => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
    };
    Ok(VerifyReport {
        precise_gradient,
        precise_shift,
        precise_replay_deviation,
        max_reflection_residual: refl,
        max_endpoint_residual,
        max_energy_residual,
        inside_intervals,
        max_excursion,
        replay_deviation,
        stepwise_deviation,
        monodromy_norm,
        length_sweep,
        period: orbit.period,
    })
}

fn spectral_norm(m: [[f64; 2]; 2]) -> f64 {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    (0.5 * (s + ((s * s - 4.0 * det * det).max(0.0)).sqrt())).sqrt()
}

/// Reflection residuals at an arbitrary configuration, for negative controls.
pub fn reflection_residuals(word: &SymbolWord, domain: &WordDomain, scene: &Scene, u: &[f64]) -> KbResult<Vec<f64>> {
    Ok(w_eval_with(word, domain, scene, u, false)?.grad_unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focal::psi_value_grad;
    use crate::focal::PsiBranch;
    use crate::planar::pt;
    use crate::tables::make_ellipse;

    fn setup(h: f64) -> (Scene, WordDomain) {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let c = pt(0.5, 0.3);
        let sel = select_intervals(&e, c, &ArcDomain::default()).unwrap();
        (Scene::new(e, c, 1.0, h).unwrap(), sel.triangle.expect("triangle template"))
    }

    #[test]
    fn word_parsing() {
        let w = SymbolWord::parse("TT'T′").unwrap();
        assert_eq!(w.letters, vec![Letter::T, Letter::TPrime, Letter::TPrime]);
        assert_eq!(w.to_string(), "TT'T'");
        assert_eq!(SymbolWord::parse("mMm").unwrap().alphabet(), Alphabet::Degenerate);
        assert!(SymbolWord::parse("Tm").is_err());
        assert!(SymbolWord::parse("").is_err());
        assert!(SymbolWord::parse("TX").is_err());
        assert!(SymbolWord::parse(&"T".repeat(65)).is_err());
        assert_eq!(SymbolWord::parse("TT'TT'").unwrap().minimal_period(), 2);
        assert_eq!(SymbolWord::parse("TTT'").unwrap().minimal_period(), 3);
    }

    #[test]
    fn ellipse_template() {
        let (sc, dom) = setup(1e3);
        let Template::Triangle { i, i_prime, vertex } = dom.template else { panic!() };
        assert_eq!(vertex.index, 1);
        assert!(!i.overlaps(&i_prime));
        assert!(i.radius > 0.0);
        assert!(pairs_admissible(&sc.table, sc.c, &i, &i_prime, false, &dom.arcs));
    }

    #[test]
    fn single_letter_w() {
        let (sc, dom) = setup(1e3);
        let w = SymbolWord::parse("T").unwrap();
        let u = dom.limit_point(&w).unwrap();
        let v = w_eval(&w, &dom, &sc, &u).unwrap();
        let d = ArcDomain::default();
        let sd = crate::kepler_arc::generating_s(&sc, u[0], u[1], ArcClass::Direct, &d).unwrap().s;
        let si = crate::kepler_arc::generating_s(&sc, u[1], u[0], ArcClass::Indirect, &d).unwrap().s;
        assert!((v.value - (sd + si)).abs() < 1e-9 * v.value);
    }

    #[test]
    fn gradient_matches_differences() {
        let (sc, dom) = setup(1e3);
        let w = SymbolWord::parse("TT'T").unwrap();
        let mut u = dom.limit_point(&w).unwrap();
        for (k, x) in u.iter_mut().enumerate() {
            *x += 0.003 * ((k as f64) - 2.5);
        }
        let base = w_eval(&w, &dom, &sc, &u).unwrap();
        let h = 1e-6;
        for k in 0..u.len() {
            let mut up = u.clone();
            let mut um = u.clone();
            up[k] += h;
            um[k] -= h;
            let fd = (w_eval(&w, &dom, &sc, &up).unwrap().value - w_eval(&w, &dom, &sc, &um).unwrap().value) / (2.0 * h);
            assert!((fd - base.grad[k]).abs() < 1e-5 * base.grad[k].abs().max(1.0), "{k}: {fd} {}", base.grad[k]);
        }
    }

    #[test]
    fn gradient_is_block_tridiagonal() {
        let (sc, dom) = setup(1e3);
        let w = SymbolWord::parse("TT'TT'T").unwrap();
        let u = dom.limit_point(&w).unwrap();
        let g0 = w_eval_with(&w, &dom, &sc, &u, false).unwrap().grad;
        // moving block 3 leaves the partials of block 0 unchanged
        let mut v = u.clone();
        v[6] += 1e-3;
        v[7] -= 1e-3;
        let g1 = w_eval_with(&w, &dom, &sc, &v, false).unwrap().grad;
        assert_eq!(g0[0], g1[0]);
        assert_eq!(g0[1], g1[1]);
        assert_ne!(g0[5], g1[5]);
    }

    #[test]
    fn high_energy_gradient_tracks_psi() {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let c = pt(0.5, 0.3);
        let dom = select_intervals(&e, c, &ArcDomain::default()).unwrap().triangle.unwrap();
        let w = SymbolWord::parse("T").unwrap();
        let u = dom.limit_point(&w).unwrap();
        let u = [u[0] + 0.004, u[1] - 0.003];
        let gp = psi_value_grad(&e, c, PsiBranch::Psi, u[0], u[1]).unwrap().1;
        let mut dev = Vec::new();
        for h in [1e4, 1e6] {
            let sc = Scene::new(e.clone(), c, 1.0, h).unwrap();
            let g = w_eval_with(&w, &dom, &sc, &u, false).unwrap().grad;
            let d = (0..2).map(|k| (g[k] - h.sqrt() * gp[k]).abs()).fold(0.0, f64::max);
            dev.push(d * h.sqrt() / sc.mu);
        }
        // the scaled remainder stays bounded as h grows
        assert!(dev[1] < 2.0 * dev[0] + 1.0, "{dev:?}");
    }

    #[test]
    fn solves_and_verifies_tt_prime() {
        let (sc, dom) = setup(1e3);
        let w = SymbolWord::parse("TT'").unwrap();
        let orbit = solve_word(&w, &sc, &dom, &SolveOptions::default()).unwrap();
        assert_eq!(orbit.period, 4);
        assert!(orbit.max_reflection_residual() < 1e-8);
        let rep = verify_orbit(&orbit, &sc).unwrap();
        assert!(rep.max_reflection_residual < 1e-8, "{rep:?}");
        assert!(rep.stepwise_deviation < 1e-6, "{rep:?}");
        // negative control
        let mut u = orbit.u.clone();
        u[0] += 1e-3;
        let r = reflection_residuals(&w, &dom, &sc, &u).unwrap();
        assert!(r.iter().any(|x| x.abs() > 1e-4));
    }

    #[test]
    fn period_collapse() {
        let (sc, dom) = setup(1e3);
        let one = solve_word(&SymbolWord::parse("T").unwrap(), &sc, &dom, &SolveOptions::default()).unwrap();
        let three = solve_word(&SymbolWord::parse("TTT").unwrap(), &sc, &dom, &SolveOptions::default()).unwrap();
        assert_eq!(three.collapsed_to, Some(1));
        assert_eq!(three.period, one.period);
        assert!(circ_diff(three.u[0], one.u[0]).abs() < 1e-8);
    }

    #[test]
    fn below_threshold_is_rejected() {
        let (sc, dom) = setup(10.0);
        let r = solve_word(&SymbolWord::parse("T").unwrap(), &sc, &dom, &SolveOptions::default());
        assert!(matches!(r, Err(KbError::NotApplicable(_))));
    }

    #[test]
    fn zero_area_only_falls_back() {
        let v = CriticalPoint { xi: 0.0, eta: PI, grad_norm: 0.0, index: 1, zero_area: true, level: 8.0 };
        assert!(pick_triangle_vertex(&[v]).is_none());
        let e = make_ellipse(2.0, 1.0).unwrap();
        let c = pt(0.0, 0.0);
        let crit = crate::birkhoff::radial_critical_points(&e, c).points;
        // two minima and two maxima: no quadruple
        assert!(degenerate_quadruple(&e, c, &crit).is_err());
    }
}
