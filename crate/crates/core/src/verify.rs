//! Seeded sample fields and inequality verification suites.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Carrier, MarkedRegion};
use crate::norms::Exponent;
use crate::num::{axpy, dot, norm2, Real};
use crate::spectra::{ConstantEstimate, Problem, Ratio};

/// Slack applied to eigen-estimated constants.
pub const EPSILON: f64 = 1e-6;
/// Resampling attempts before a projection collapse is reported.
pub const MAX_RESAMPLES: usize = 10;
/// Default suite size.
pub const DEFAULT_SAMPLES: usize = 100;

/// Function family of a generator. Symbolic names: `polynomial:3`, `trig:4`,
/// `bumps:6`, `mixed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// Random coefficients on all monomials of total degree at most `degree`.
    Polynomial { degree: usize },
    /// Cosine modes `cos(pi/2 k.(y+1) + phi)` on the box mapped to `[-1,1]^d`, with `1 <= |k|_inf <= modes`, amplitudes decaying like `1/(1+|k|^2)`.
    Trigonometric { modes: usize },
    /// Sums of Gaussian bumps with random centres, widths and signs.
    Bumps { count: usize },
    /// Cycles polynomial, trigonometric and bump samples.
    Mixed { degree: usize, modes: usize, count: usize },
}

impl Default for Family {
    fn default() -> Self {
        Family::Mixed { degree: 3, modes: 3, count: 4 }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Polynomial { degree } => write!(f, "polynomial:{degree}"),
            Family::Trigonometric { modes } => write!(f, "trig:{modes}"),
            Family::Bumps { count } => write!(f, "bumps:{count}"),
            Family::Mixed { degree, modes, count } => write!(f, "mixed:{degree}:{modes}:{count}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let nums = parts
            .map(|p| p.parse::<usize>().map_err(|_| Error::Parse(format!("bad family parameter `{p}` in `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        let arg = |i: usize, default: usize| nums.get(i).copied().unwrap_or(default);
        let fam = match name {
            "polynomial" | "poly" => Family::Polynomial { degree: arg(0, 3) },
            "trigonometric" | "trig" => Family::Trigonometric { modes: arg(0, 3) },
            "bumps" => Family::Bumps { count: arg(0, 4) },
            "mixed" => Family::Mixed { degree: arg(0, 3), modes: arg(1, 3), count: arg(2, 4) },
            _ => return Err(Error::Parse(format!("unknown field family `{s}`"))),
        };
        if matches!(
            fam,
            Family::Polynomial { degree: 0 } | Family::Trigonometric { modes: 0 } | Family::Bumps { count: 0 }
        ) {
            return Err(Error::Parse(format!("family `{s}` generates constants only")));
        }
        Ok(fam)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projector {
    #[default]
    None,
    MeanZero,
    ZeroTrace,
    Tangential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldGenerator {
    #[serde(flatten)]
    pub family: Family,
    pub seed: u64,
    #[serde(default)]
    pub projector: Projector,
    /// Values per node; vector fields draw each component independently.
    #[serde(default = "one")]
    pub components: usize,
}

fn one() -> usize {
    1
}

impl FieldGenerator {
    pub fn new(family: Family, seed: u64) -> Self {
        FieldGenerator { family, seed, projector: Projector::None, components: 1 }
    }

    pub fn with_projector(mut self, projector: Projector) -> Self {
        self.projector = projector;
        self
    }

    pub fn with_components(mut self, components: usize) -> Self {
        self.components = components;
        self
    }
}

/// Node positions mapped affinely onto `[-1, 1]` per axis.
fn normalized<T: Real>(positions: &[Vec<T>]) -> Vec<Vec<f64>> {
    let d = positions.first().map_or(0, Vec::len);
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in positions {
        for a in 0..d {
            let v = p[a].to_f64_lossy();
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
    }
    positions
        .iter()
        .map(|p| {
            (0..d)
                .map(|a| {
                    let span = hi[a] - lo[a];
                    if span > 0.0 {
                        2.0 * (p[a].to_f64_lossy() - lo[a]) / span - 1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

fn multi_indices(d: usize, max_total: usize, max_each: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                let used: usize = v.iter().sum();
                (0..=max_each.min(max_total - used.min(max_total))).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

fn draw_scalar(family: Family, index: usize, rng: &mut ChaCha8Rng, y: &[Vec<f64>]) -> Vec<f64> {
    let d = y.first().map_or(0, Vec::len);
    let mut u = |a: f64, b: f64| a + (b - a) * rng.random::<f64>();
    match family {
        Family::Polynomial { degree } => {
            let terms: Vec<(Vec<usize>, f64)> =
                multi_indices(d, degree, degree).into_iter().map(|k| (k, u(-1.0, 1.0))).collect();
            y.iter()
                .map(|p| {
                    terms
                        .iter()
                        .map(|(k, c)| c * k.iter().zip(p).map(|(&e, &x)| x.powi(e as i32)).product::<f64>())
                        .sum()
                })
                .collect()
        }
        Family::Trigonometric { modes } => {
            let terms: Vec<(Vec<usize>, f64, f64)> = multi_indices(d, usize::MAX, modes)
                .into_iter()
                .filter(|k| k.iter().any(|&e| e > 0))
                .map(|k| {
                    let k2: usize = k.iter().map(|e| e * e).sum();
                    let a = u(-1.0, 1.0) / (1.0 + k2 as f64);
                    (k, a, u(0.0, std::f64::consts::TAU))
                })
                .collect();
            y.iter()
                .map(|p| {
                    terms
                        .iter()
                        .map(|(k, a, phi)| {
                            let arg: f64 = k.iter().zip(p).map(|(&e, &x)| e as f64 * (x + 1.0)).sum::<f64>();
                            a * (std::f64::consts::FRAC_PI_2 * arg + phi).cos()
                        })
                        .sum()
                })
                .collect()
        }
        Family::Bumps { count } => {
            let bumps: Vec<(Vec<f64>, f64, f64)> =
                (0..count).map(|_| ((0..d).map(|_| u(-1.0, 1.0)).collect(), u(0.3, 1.0), u(-1.0, 1.0))).collect();
            y.iter()
                .map(|p| {
                    bumps
                        .iter()
                        .map(|(c, s, a)| {
                            let r2: f64 = c.iter().zip(p).map(|(ci, xi)| (xi - ci) * (xi - ci)).sum();
                            a * (-r2 / (s * s)).exp()
                        })
                        .sum()
                })
                .collect()
        }
        Family::Mixed { degree, modes, count } => {
            let f = match index % 3 {
                0 => Family::Polynomial { degree },
                1 => Family::Trigonometric { modes },
                _ => Family::Bumps { count },
            };
            draw_scalar(f, index, rng, y)
        }
    }
}

/// One raw node-major sample from the generator's family.
fn draw<T: Real>(gen: &FieldGenerator, index: usize, rng: &mut ChaCha8Rng, y: &[Vec<f64>]) -> Vec<T> {
    let k = gen.components.max(1);
    let comps: Vec<Vec<f64>> = (0..k).map(|_| draw_scalar(gen.family, index, rng, y)).collect();
    (0..y.len() * k).map(|i| T::lit(comps[i % k][i / k])).collect()
}

fn family_label(family: Family, index: usize) -> String {
    match family {
        Family::Mixed { degree, modes, count } => match index % 3 {
            0 => family_label(Family::Polynomial { degree }, 0),
            1 => family_label(Family::Trigonometric { modes }, 0),
            _ => family_label(Family::Bumps { count }, 0),
        },
        f => f.to_string(),
    }
}

/// Admissibility data for [`generate_fields`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Admissibility<'a, T> {
    pub region: Option<&'a MarkedRegion<T>>,
    /// Unit normals, node-major with `components` entries per node.
    pub normals: Option<&'a [T]>,
}

fn apply_projector<T: Real>(
    projector: Projector,
    f: &mut [T],
    k: usize,
    weights: &[T],
    adm: &Admissibility<'_, T>,
) -> Result<()> {
    match projector {
        Projector::None => {}
        Projector::MeanZero => {
            let total = weights.iter().fold(T::zero(), |a, &w| a + w);
            for c in 0..k {
                let m = weights.iter().enumerate().fold(T::zero(), |a, (i, &w)| a + w * f[i * k + c]) / total;
                (0..weights.len()).for_each(|i| f[i * k + c] -= m);
            }
        }
        Projector::ZeroTrace => {
            let region = adm.region.ok_or_else(|| Error::MissingRegion("zero_trace projector".into()))?;
            for &i in &region.nodes {
                f[i * k..(i + 1) * k].iter_mut().for_each(|v| *v = T::zero());
            }
        }
        Projector::Tangential => {
            let nu = adm.normals.ok_or_else(|| Error::UnsupportedKind {
                kind: "tangential projector".into(),
                carrier: "carrier without normals".into(),
            })?;
            for i in 0..weights.len() {
                let n = &nu[i * k..(i + 1) * k];
                let s = dot(&f[i * k..(i + 1) * k], n);
                axpy(-s, n, &mut f[i * k..(i + 1) * k]);
            }
        }
    }
    Ok(())
}

/// `count` seeded fields (node-major) satisfying the generator's projector.
/// Identical generator and carrier give bitwise-identical fields.
pub fn generate_fields<T: Real, C: Carrier<T> + ?Sized>(
    gen: &FieldGenerator,
    mesh: &C,
    count: usize,
    adm: &Admissibility<'_, T>,
) -> Result<Vec<Vec<T>>> {
    if count == 0 {
        return Err(Error::NoAdmissibleSamples { tried: 0 });
    }
    let k = gen.components.max(1);
    if let Some(nu) = adm.normals {
        if nu.len() != mesh.num_nodes() * k {
            return Err(Error::DimensionMismatch { expected: mesh.num_nodes() * k, found: nu.len() });
        }
    }
    let positions: Vec<Vec<T>> = (0..mesh.num_nodes()).map(|i| mesh.position(i)).collect();
    let y = normalized(&positions);
    let mut rng = ChaCha8Rng::seed_from_u64(gen.seed);
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let mut attempt = 0;
        loop {
            let mut f = draw::<T>(gen, index, &mut rng, &y);
            let before = norm2(&f);
            apply_projector(gen.projector, &mut f, k, mesh.node_weights(), adm)?;
            if norm2(&f) > T::lit(1e-10) * before {
                out.push(f);
                break;
            }
            attempt += 1;
            if attempt >= MAX_RESAMPLES {
                return Err(Error::ProjectionCollapse { attempts: attempt });
            }
        }
    }
    Ok(out)
}

/// Multi-column CSV of node-major fields: `node,f1,f2,...` (vector fields as `f1_u1,...`).
pub fn fields_csv<T: Real>(fields: &[Vec<T>], components: usize) -> String {
    let k = components.max(1);
    let mut out = String::from("node");
    for j in 0..fields.len() {
        if k == 1 {
            out.push_str(&format!(",f{}", j + 1));
        } else {
            (0..k).for_each(|c| out.push_str(&format!(",f{}_u{}", j + 1, c + 1)));
        }
    }
    out.push('\n');
    let nodes = fields.first().map_or(0, |f| f.len() / k);
    for i in 0..nodes {
        out.push_str(&i.to_string());
        for f in fields {
            (0..k).for_each(|c| out.push_str(&format!(",{:e}", f[i * k + c])));
        }
        out.push('\n');
    }
    out
}

/// A verification sample in the problem's reduced unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub descriptor: String,
    pub x: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suite<T> {
    pub id: String,
    pub samples: Vec<Sample<T>>,
}

impl<T: Real> Suite<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn push(&mut self, descriptor: impl Into<String>, x: Vec<T>) {
        self.samples.push(Sample { descriptor: descriptor.into(), x });
    }
}

/// Maps a full field into the admissible space of `problem`. Scalar fields are
/// first shifted by the mean of their values at eliminated nodes, so a zero
/// trace costs as little smoothness as possible.
pub fn admissible_sample<T: Real>(problem: &Problem<T>, full: &[T]) -> Vec<T> {
    let mut f = full.to_vec();
    if problem.components == 1 && problem.reduced_dim() < problem.full_dim() {
        let kept = problem.expand(&vec![T::one(); problem.reduced_dim()]);
        let (mut s, mut n) = (T::zero(), 0usize);
        for (v, k) in f.iter().zip(&kept) {
            if *k == T::zero() {
                s += *v;
                n += 1;
            }
        }
        if n > 0 {
            let m = s / T::from_usize_lossy(n);
            f.iter_mut().for_each(|v| *v -= m);
        }
    }
    problem.project(&problem.restrict(&f))
}

/// `count` seeded samples projected with the problem's own admissibility map
/// (the generator's projector is not used), optionally preceded by the
/// eigenvector of an estimate.
pub fn build_suite<T: Real>(
    problem: &Problem<T>,
    family: Family,
    seed: u64,
    count: usize,
    eigenvector: Option<&ConstantEstimate>,
) -> Result<Suite<T>> {
    let mut suite = Suite { id: problem.id.clone(), samples: Vec::new() };
    if let Some(est) = eigenvector {
        let x = est.eigenvector_as::<T>();
        if x.len() != problem.reduced_dim() {
            return Err(Error::DimensionMismatch { expected: problem.reduced_dim(), found: x.len() });
        }
        // iterative eigenvectors meet the constraints only to solver accuracy
        suite.push("eigenvector", problem.project(&x));
    }
    let gen = FieldGenerator::new(family, seed).with_components(problem.components);
    let y = normalized(&problem.positions);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let remaining = count.saturating_sub(suite.len());
    for index in 0..remaining {
        let mut attempt = 0;
        loop {
            let full = draw::<T>(&gen, index, &mut rng, &y);
            let x = admissible_sample(problem, &full);
            if norm2(&problem.expand(&x)) > T::lit(1e-10) * norm2(&full) {
                suite.push(format!("{}#{index}", family_label(family, index)), x);
                break;
            }
            attempt += 1;
            if attempt >= MAX_RESAMPLES {
                return Err(Error::ProjectionCollapse { attempts: attempt });
            }
        }
    }
    Ok(suite)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    #[serde(with = "crate::num::extended")]
    pub constant: f64,
    pub epsilon: f64,
    pub p: f64,
    pub n_samples: usize,
    /// Samples with both sides zero, excluded from the maximum.
    pub skipped_zero: usize,
    #[serde(with = "crate::num::extended")]
    pub max_ratio: f64,
    pub argmax: Option<String>,
    /// Samples with a vanishing right side but a positive left side.
    pub unbounded: Vec<String>,
    pub pass: bool,
    /// Ratio per sample, `None` for skipped ones.
    #[serde(with = "crate::num::extended::opt_vec")]
    pub ratios: Vec<Option<f64>>,
    /// CSV of the argmax (or first unbounded) field.
    #[serde(skip)]
    pub witness_csv: String,
}

impl InequalityReport {
    pub fn threshold(&self) -> f64 {
        self.constant * (1.0 + self.epsilon)
    }

    /// Aligned-text summary line.
    pub fn table_row(&self) -> String {
        format!(
            "{:<14} C={:<12.6e} max={:<12.6e} n={:<4} skipped={:<3} unbounded={:<3} {}",
            self.id,
            self.constant,
            self.max_ratio,
            self.n_samples,
            self.skipped_zero,
            self.unbounded.len(),
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Evaluates `LHS / RHS` on every suite sample and compares the maximum with
/// `C (1 + epsilon)`.
pub fn verify_inequality<T: Real>(
    problem: &Problem<T>,
    constant: f64,
    suite: &Suite<T>,
    p: Exponent,
    epsilon: f64,
) -> Result<InequalityReport> {
    if !(constant > 0.0) {
        return Err(Error::Parse(format!("constant must be positive, got {constant}")));
    }
    let mut report = InequalityReport {
        id: problem.id.clone(),
        constant,
        epsilon,
        p: p.value(),
        n_samples: suite.len(),
        skipped_zero: 0,
        max_ratio: 0.0,
        argmax: None,
        unbounded: Vec::new(),
        pass: false,
        ratios: Vec::with_capacity(suite.len()),
        witness_csv: String::new(),
    };
    let mut witness: Option<&[T]> = None;
    for (index, s) in suite.samples.iter().enumerate() {
        if s.x.len() != problem.reduced_dim() {
            return Err(Error::InadmissibleSample {
                index,
                reason: format!("{} unknowns, expected {}", s.x.len(), problem.reduced_dim()),
            });
        }
        let defect = problem.constraint_defect(&s.x);
        if defect > T::lit(1e-8) {
            return Err(Error::InadmissibleSample { index, reason: format!("constraint defect {defect:e}") });
        }
        match problem.ratio(&s.x, p) {
            Ratio::Value(r) => {
                let r = r.to_f64_lossy();
                report.ratios.push(Some(r));
                if report.argmax.is_none() || r > report.max_ratio {
                    report.max_ratio = r;
                    report.argmax = Some(s.descriptor.clone());
                    if report.unbounded.is_empty() {
                        witness = Some(&s.x);
                    }
                }
            }
            Ratio::ZeroOverZero => {
                report.ratios.push(None);
                report.skipped_zero += 1;
            }
            Ratio::Unbounded => {
                report.ratios.push(Some(f64::INFINITY));
                if report.unbounded.is_empty() {
                    witness = Some(&s.x);
                }
                report.unbounded.push(s.descriptor.clone());
            }
        }
    }
    report.pass = report.unbounded.is_empty() && report.max_ratio <= report.threshold();
    if let Some(w) = witness {
        report.witness_csv = problem.field_csv(w);
    }
    Ok(report)
}

/// Sampled-quotient constant of a sup-norm problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupCalibration {
    pub id: String,
    #[serde(rename = "C", with = "crate::num::extended")]
    pub c: f64,
    pub pool_size: usize,
    pub argmax: String,
    pub seed: u64,
}

/// Maximum quotient over a calibration pool: linear fields along 64 directions
/// per coordinate plane, distance fields centred at every boundary-extreme node,
/// and `extra` seeded smooth fields. A lower bound for the best constant.
pub fn calibrate_sup_constant<T: Real>(problem: &Problem<T>, seed: u64, extra: usize) -> Result<SupCalibration> {
    if problem.components != 1 {
        return Err(Error::UnsupportedKind { kind: "sup calibration".into(), carrier: "vector problems".into() });
    }
    let pos = &problem.positions;
    let d = pos.first().map_or(0, Vec::len);
    let mut pool: Vec<(String, Vec<T>)> = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            for j in 0..64 {
                let t = std::f64::consts::PI * j as f64 / 64.0;
                let (ca, sb) = (T::lit(t.cos()), T::lit(t.sin()));
                pool.push((format!("linear[{a}{b}]#{j}"), pos.iter().map(|x| ca * x[a] + sb * x[b]).collect()));
            }
        }
        if d == 1 {
            pool.push(("linear".into(), pos.iter().map(|x| x[0]).collect()));
        }
    }
    let y = normalized(pos);
    for (c, yc) in y.iter().enumerate() {
        if yc.iter().all(|v| v.abs() == 1.0) {
            pool.push((
                format!("distance@{c}"),
                pos.iter()
                    .map(|x| x.iter().zip(&pos[c]).fold(T::zero(), |s, (&u, &v)| s + (u - v) * (u - v)).sqrt())
                    .collect(),
            ));
        }
    }
    let gen = FieldGenerator::new(Family::default(), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for index in 0..extra {
        pool.push((format!("{}#{index}", family_label(gen.family, index)), draw(&gen, index, &mut rng, &y)));
    }
    let mut best: Option<(T, String)> = None;
    for (name, full) in &pool {
        let x = admissible_sample(problem, full);
        match problem.ratio(&x, Exponent::INFINITY) {
            Ratio::Value(r) if best.as_ref().is_none_or(|(b, _)| r > *b) => best = Some((r, name.clone())),
            Ratio::Unbounded => {
                return Ok(SupCalibration {
                    id: problem.id.clone(),
                    c: f64::INFINITY,
                    pool_size: pool.len(),
                    argmax: name.clone(),
                    seed,
                })
            }
            _ => {}
        }
    }
    let (c, argmax) = best.ok_or(Error::NoAdmissibleSamples { tried: pool.len() })?;
    Ok(SupCalibration { id: problem.id.clone(), c: c.to_f64_lossy(), pool_size: pool.len(), argmax, seed })
}

/// Independent seed used for calibration pools derived from a suite seed.
pub fn calibration_seed(seed: u64) -> u64 {
    seed ^ 0xCA1B_0000_0000_0001
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mark_region, DomainGrid, RegionKind, ShapeSpec};
    use crate::spectra::{estimate_problem, setup, EigenOptions, InequalityId};

    #[test]
    fn mean_zero_and_zero_trace_projectors() {
        let g = DomainGrid::<f64>::unit(1, 33).unwrap();
        let gen = FieldGenerator::new(Family::Polynomial { degree: 4 }, 7).with_projector(Projector::MeanZero);
        for f in generate_fields(&gen, &g, 20, &Admissibility::default()).unwrap() {
            assert!(dot(g.node_weights(), &f).abs() < 1e-12);
        }
        let g2 = DomainGrid::<f64>::unit(2, 9).unwrap();
        let left = mark_region(&g2, |x| x[0] == 0.0, RegionKind::BoundaryPart).unwrap();
        let gen = FieldGenerator::new(Family::Bumps { count: 3 }, 1).with_projector(Projector::ZeroTrace);
        let adm = Admissibility { region: Some(&left), normals: None };
        for f in generate_fields(&gen, &g2, 10, &adm).unwrap() {
            assert!(left.nodes.iter().all(|&i| f[i] == 0.0));
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let g = DomainGrid::<f64>::unit(2, 7).unwrap();
        let gen = FieldGenerator::new(Family::default(), 0x5EED);
        let a = fields_csv(&generate_fields(&gen, &g, 5, &Admissibility::default()).unwrap(), 1);
        let b = fields_csv(&generate_fields(&gen, &g, 5, &Admissibility::default()).unwrap(), 1);
        assert_eq!(a, b);
    }

    #[test]
    fn family_names_round_trip() {
        for s in ["polynomial:3", "trig:4", "bumps:6", "mixed:2:3:4"] {
            assert_eq!(s.parse::<Family>().unwrap().to_string(), s);
        }
        assert!("spline:2".parse::<Family>().is_err());
        assert!("polynomial:0".parse::<Family>().is_err());
    }

    #[test]
    fn poincare_suite_closes_and_halved_constant_fails() {
        let s = setup::<f64>(InequalityId::PDomain, Some(&ShapeSpec::Interval { a: 0.0, b: 1.0, nodes: 65 }), 0, 4)
            .unwrap();
        let problem = s.problem().unwrap();
        let est = estimate_problem(&problem, &EigenOptions::default()).unwrap();
        let suite = build_suite(&problem, Family::default(), 0x5EED, 100, Some(&est)).unwrap();
        let rep = verify_inequality(&problem, est.c, &suite, Exponent::TWO, EPSILON).unwrap();
        assert!(rep.pass);
        assert!(rep.max_ratio >= 0.9 * est.c && rep.max_ratio <= est.c * (1.0 + EPSILON));
        assert!(((rep.ratios[0].unwrap() - est.c) / est.c).abs() < 1e-6);
        let rep = verify_inequality(&problem, est.c / 2.0, &suite, Exponent::TWO, EPSILON).unwrap();
        assert!(!rep.pass && !rep.witness_csv.is_empty());
    }

    #[test]
    fn zero_sample_is_skipped() {
        let s = setup::<f64>(InequalityId::PDomain, Some(&ShapeSpec::Interval { a: 0.0, b: 1.0, nodes: 17 }), 0, 4)
            .unwrap();
        let problem = s.problem().unwrap();
        let mut suite = Suite { id: problem.id.clone(), samples: vec![] };
        suite.push("zero", vec![0.0; problem.reduced_dim()]);
        let rep = verify_inequality(&problem, 1.0, &suite, Exponent::TWO, EPSILON).unwrap();
        assert_eq!(rep.skipped_zero, 1);
        assert!(rep.pass);
        suite.push("constant", vec![1.0; problem.reduced_dim()]);
        assert!(matches!(
            verify_inequality(&problem, 1.0, &suite, Exponent::TWO, EPSILON),
            Err(Error::InadmissibleSample { index: 1, .. })
        ));
    }

    #[test]
    fn sup_point_calibration_reaches_diagonal() {
        let s = setup::<f64>(InequalityId::SupP0, None, 0, 4).unwrap();
        let problem = s.problem().unwrap();
        let cal = calibrate_sup_constant(&problem, calibration_seed(0x5EED), 200).unwrap();
        assert!((cal.c - 2f64.sqrt()).abs() < 1e-6, "{cal:?}");
    }
}
