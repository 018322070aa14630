//! Brute-force ground truth and the empirical harness.
//!
//! `enumerate_modes` sweeps the full assignment space (partitioned across
//! worker chunks; partitioning never changes the result). The harness
//! generates deterministic instance families, solves the three local
//! relaxations exactly, compares against enumeration, runs saturation and
//! decoding checks, and emits a replayable certificate for every gap,
//! saturation violation, or decode failure. Tightness of the relaxations
//! on cyclic/higher-order families is *measured and reported*, never
//! assumed: a gap is a first-class outcome, not a test failure.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::decode::{atomic_frontier, greedy_decode, DecodeError, DecodeSign, MarginalKind};
use crate::formats::{render_number, serialize_native, Document};
use crate::hypersites::{Hypersite, HypersiteSet};
use crate::lp_solver::LpError;
use crate::model::{decode_config, Assignment, FactorTable, Model, ModelError};
use crate::orthomarginal::{DenseFunction, OrthoError, PseudoMarginalSet};
use crate::relaxation::{
    build_pseudo_delta_emin, build_pseudo_emax, build_pseudo_emin, extract_marginals, RelaxError,
};
use crate::scalar::{checked_pow, Rat, Scalar};

/// Default cap on exhaustive enumeration (number of assignments).
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("assignment space of size {size} exceeds enumeration cap {cap}")]
    EnumerationCap { size: u64, cap: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Ortho(#[from] OrthoError),
    #[error("certificate is missing or has malformed meta key `{0}`")]
    CertificateMeta(String),
    #[error("certificate replay mismatch: {0}")]
    ReplayMismatch(String),
    #[error("harness internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Format(#[from] crate::formats::FormatError),
}

/// Exact modes of a model: both extreme values with their complete
/// argument sets, in assignment-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModesResult<T> {
    pub min_value: T,
    pub max_value: T,
    pub argmin: Vec<Assignment>,
    pub argmax: Vec<Assignment>,
}

struct ChunkModes<T> {
    min_value: T,
    max_value: T,
    argmin: Vec<usize>,
    argmax: Vec<usize>,
}

fn scan_range<T: Scalar>(model: &Model<T>, lo: usize, hi: usize) -> ChunkModes<T> {
    let num_labels = model.num_labels();
    let n = model.num_sites();
    let mut coords = decode_config(lo, num_labels, n);
    let mut best: Option<ChunkModes<T>> = None;
    for idx in lo..hi {
        if idx > lo {
            // Increment little-endian coordinates in place.
            for c in coords.iter_mut() {
                *c += 1;
                if *c < num_labels {
                    break;
                }
                *c = 0;
            }
        }
        let x = Assignment::new(coords.clone());
        let value = model.evaluate(&x).expect("in-range assignment");
        match &mut best {
            None => {
                best = Some(ChunkModes {
                    min_value: value.clone(),
                    max_value: value,
                    argmin: vec![idx],
                    argmax: vec![idx],
                });
            }
            Some(b) => {
                if value < b.min_value {
                    b.min_value = value.clone();
                    b.argmin.clear();
                    b.argmin.push(idx);
                } else if value == b.min_value {
                    b.argmin.push(idx);
                }
                if value > b.max_value {
                    b.max_value = value.clone();
                    b.argmax.clear();
                    b.argmax.push(idx);
                } else if value == b.max_value {
                    b.argmax.push(idx);
                }
            }
        }
    }
    best.expect("non-empty range")
}

/// Exhaustive mode enumeration, split into `chunks` disjoint index ranges
/// scanned in parallel. The merge is order-preserving, so the result is
/// identical for every chunk count.
pub fn enumerate_modes_in_chunks<T: Scalar>(
    model: &Model<T>,
    cap: u64,
    chunks: usize,
) -> Result<ModesResult<T>, OracleError> {
    let size = checked_pow(model.num_labels(), model.num_sites())
        .filter(|&s| (s as u64) <= cap)
        .ok_or(OracleError::EnumerationCap {
            size: (model.num_labels() as u64).saturating_pow(model.num_sites() as u32),
            cap,
        })?;
    let chunks = chunks.clamp(1, size);
    let step = size.div_ceil(chunks);
    let ranges: Vec<(usize, usize)> = (0..chunks)
        .map(|c| (c * step, ((c + 1) * step).min(size)))
        .filter(|(a, b)| a < b)
        .collect();
    let parts: Vec<ChunkModes<T>> =
        ranges.par_iter().map(|&(lo, hi)| scan_range(model, lo, hi)).collect();

    let mut iter = parts.into_iter();
    let mut acc = iter.next().expect("at least one chunk");
    for part in iter {
        if part.min_value < acc.min_value {
            acc.min_value = part.min_value;
            acc.argmin = part.argmin;
        } else if part.min_value == acc.min_value {
            acc.argmin.extend(part.argmin);
        }
        if part.max_value > acc.max_value {
            acc.max_value = part.max_value;
            acc.argmax = part.argmax;
        } else if part.max_value == acc.max_value {
            acc.argmax.extend(part.argmax);
        }
    }
    let to_assignments = |ids: Vec<usize>| {
        ids.into_iter()
            .map(|idx| Assignment::new(decode_config(idx, model.num_labels(), model.num_sites())))
            .collect()
    };
    Ok(ModesResult {
        min_value: acc.min_value,
        max_value: acc.max_value,
        argmin: to_assignments(acc.argmin),
        argmax: to_assignments(acc.argmax),
    })
}

pub fn enumerate_modes<T: Scalar>(
    model: &Model<T>,
    cap: u64,
) -> Result<ModesResult<T>, OracleError> {
    enumerate_modes_in_chunks(model, cap, rayon::current_num_threads().max(1))
}

/// True margins of a dense weight function with respect to every scope.
pub fn exact_marginals<T: Scalar>(
    weights: &DenseFunction<T>,
    scopes: &HypersiteSet,
) -> Result<PseudoMarginalSet<T>, OracleError> {
    Ok(PseudoMarginalSet::margins_of(weights, scopes)?)
}

// ---------------------------------------------------------------------------
// Instance generation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Chain,
    Tree,
    Cycle,
    Grid3x3,
    Hypergraph,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Chain => "chain",
            Family::Tree => "tree",
            Family::Cycle => "cycle",
            Family::Grid3x3 => "grid3x3",
            Family::Hypergraph => "hypergraph",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "chain" => Family::Chain,
            "tree" => Family::Tree,
            "cycle" => Family::Cycle,
            "grid3x3" => Family::Grid3x3,
            "hypergraph" => Family::Hypergraph,
            _ => return None,
        })
    }

    /// Families outside the acyclic-pairwise comfort zone.
    pub fn is_cyclic_or_higher_order(self) -> bool {
        matches!(self, Family::Cycle | Family::Grid3x3 | Family::Hypergraph)
    }

    pub const ALL: [Family; 5] =
        [Family::Chain, Family::Tree, Family::Cycle, Family::Grid3x3, Family::Hypergraph];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn instance_rng(family: Family, seed: u64, index: usize) -> ChaCha8Rng {
    let tag = family.name().bytes().fold(0u64, |a, b| a.wrapping_mul(31).wrapping_add(b as u64));
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag ^ (index as u64))))
}

fn pair(a: usize, b: usize) -> Hypersite {
    Hypersite::from_unsorted(vec![a, b]).expect("distinct pair")
}

fn random_table(rng: &mut ChaCha8Rng, len: usize, range: (i64, i64)) -> Vec<Rat> {
    (0..len).map(|_| Rat::from_int(rng.random_range(range.0..=range.1))).collect()
}

/// Deterministic instance generation: the model is a pure function of
/// (family, seed, index, cost range). Labels are kept small on the larger
/// structures so the exact solves stay inside the runtime budget.
pub fn generate_instance(
    family: Family,
    seed: u64,
    index: usize,
    cost_range: (i64, i64),
) -> Model<Rat> {
    let mut rng = instance_rng(family, seed, index);
    let mut scopes: Vec<Hypersite> = Vec::new();
    let (num_sites, num_labels) = match family {
        Family::Chain => {
            let n = rng.random_range(2..=10usize);
            let l = if n <= 7 && rng.random_bool(0.4) { 3 } else { 2 };
            for i in 1..n {
                scopes.push(pair(i, i + 1));
            }
            (n, l)
        }
        Family::Tree => {
            let n = rng.random_range(2..=8usize);
            let l = if rng.random_bool(0.4) { 3 } else { 2 };
            for i in 2..=n {
                let parent = rng.random_range(1..i);
                scopes.push(pair(parent, i));
            }
            (n, l)
        }
        Family::Cycle => {
            let n = rng.random_range(3..=10usize);
            let l = if n <= 7 && rng.random_bool(0.4) { 3 } else { 2 };
            for i in 1..n {
                scopes.push(pair(i, i + 1));
            }
            scopes.push(pair(1, n));
            (n, l)
        }
        Family::Grid3x3 => {
            let l = if rng.random_bool(0.25) { 3 } else { 2 };
            for row in 0..3usize {
                for col in 0..3usize {
                    let site = 3 * row + col + 1;
                    if col < 2 {
                        scopes.push(pair(site, site + 1));
                    }
                    if row < 2 {
                        scopes.push(pair(site, site + 3));
                    }
                }
            }
            (9, l)
        }
        Family::Hypergraph => {
            let n = rng.random_range(3..=8usize);
            let l = if n <= 6 && rng.random_bool(0.35) { 3 } else { 2 };
            let factors = rng.random_range(n.saturating_sub(1).max(2)..=n + 2);
            for f in 0..factors {
                // Keep at least one genuinely higher-order scope.
                let arity = if f == 0 || rng.random_bool(0.5) { 3.min(n) } else { 2 };
                let mut sites: Vec<usize> = Vec::new();
                while sites.len() < arity {
                    let s = rng.random_range(1..=n);
                    if !sites.contains(&s) {
                        sites.push(s);
                    }
                }
                scopes.push(Hypersite::from_unsorted(sites).expect("distinct sites"));
            }
            // Patch coverage deterministically.
            for site in 1..=n {
                if !scopes.iter().any(|s| s.contains(site)) {
                    scopes.push(pair(site, if site == n { 1 } else { site + 1 }));
                }
            }
            (n, l)
        }
    };
    let factors = scopes
        .into_iter()
        .map(|scope| {
            let len = checked_pow(num_labels, scope.len()).expect("small table");
            let table = random_table(&mut rng, len, cost_range);
            FactorTable::new(scope, table).expect("valid factor")
        })
        .collect();
    Model::new(num_sites, num_labels, factors).expect("valid instance")
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeOutcome {
    /// Both mode decodes returned assignments achieving the exact modes.
    Success,
    /// Greedy decode failed or returned a suboptimal assignment.
    Failure,
    /// Not attempted: the relaxation had a gap.
    SkippedGap,
    /// Not attempted: atomicity filtering lost coverage.
    Unsupported,
}

impl fmt::Display for DecodeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecodeOutcome::Success => "success",
            DecodeOutcome::Failure => "failure",
            DecodeOutcome::SkippedGap => "skipped-gap",
            DecodeOutcome::Unsupported => "unsupported",
        })
    }
}

/// Per-instance measurement row.
#[derive(Debug, Clone)]
pub struct InstanceRecord {
    pub id: String,
    pub family: Family,
    pub seed: u64,
    pub index: usize,
    pub num_sites: usize,
    pub num_labels: usize,
    pub lp_min: Rat,
    pub lp_max: Rat,
    pub lp_delta: Rat,
    pub brute_min: Rat,
    pub brute_max: Rat,
    /// `brute_min - lp_min`, nonnegative by the relaxation direction.
    pub gap_min: Rat,
    /// `brute_max - lp_max`, nonpositive by the relaxation direction.
    pub gap_max: Rat,
    /// `(brute_min - brute_max) - lp_delta`, nonnegative.
    pub gap_delta: Rat,
    /// Outcome of mode decoding from the probability-program marginals
    /// (minimization marginals for the inf mode, maximization marginals
    /// for the sup mode).
    pub decode_outcome: DecodeOutcome,
    /// Outcome of the same decoding driven by the delta-program marginals.
    /// Kept separately: an optimal vertex of the local delta polytope need
    /// not be the margin set of any global optimum, and when it is not,
    /// this decode legitimately fails and certifies that vertex.
    pub delta_decode_outcome: DecodeOutcome,
    /// None when not checked (gap or unsupported instance).
    pub saturation_ok: Option<bool>,
    /// `<kept>of<total>` frontier members surviving atomicity filtering,
    /// with a `-nocover` suffix when the survivors lose coverage.
    pub atomicity_profile: String,
}

impl InstanceRecord {
    pub fn all_gaps_zero(&self) -> bool {
        self.gap_min.is_zero() && self.gap_max.is_zero() && self.gap_delta.is_zero()
    }

    pub fn fully_atomic(&self) -> bool {
        !self.atomicity_profile.contains("nocover")
            && self.atomicity_profile.split_once("of").is_some_and(|(a, b)| a == b)
    }
}

/// An emitted counterexample or failure witness, ready to write to disk.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub file_name: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    Gap,
    Saturation,
    Decode,
    Unsupported,
}

impl CertificateKind {
    fn name(self) -> &'static str {
        match self {
            CertificateKind::Gap => "gap",
            CertificateKind::Saturation => "saturation",
            CertificateKind::Decode => "decode",
            CertificateKind::Unsupported => "unsupported",
        }
    }
}

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub families: Vec<(Family, usize)>,
    pub seed: u64,
    pub cost_range: (i64, i64),
    pub enumeration_cap: u64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            families: Family::ALL.iter().map(|&f| (f, 20)).collect(),
            seed: 1,
            cost_range: (0, 9),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug)]
pub struct TightnessReport {
    pub records: Vec<InstanceRecord>,
    pub certificates: Vec<Certificate>,
}

impl TightnessReport {
    fn rate(&self, family: Option<Family>, pred: impl Fn(&InstanceRecord) -> bool) -> f64 {
        let rows: Vec<&InstanceRecord> =
            self.records.iter().filter(|r| family.is_none_or(|f| r.family == f)).collect();
        if rows.is_empty() {
            return 1.0;
        }
        rows.iter().filter(|r| pred(r)).count() as f64 / rows.len() as f64
    }

    pub fn min_tight_rate(&self, family: Option<Family>) -> f64 {
        self.rate(family, |r| r.gap_min.is_zero())
    }

    pub fn delta_tight_rate(&self, family: Option<Family>) -> f64 {
        self.rate(family, |r| r.gap_delta.is_zero())
    }

    /// One CSV row per instance, fixed column order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "instance_id,family,seed,index,num_sites,num_labels,lp_min,lp_max,lp_delta,\
             brute_min,brute_max,gap_min,gap_max,gap_delta,decode_outcome,saturation_ok,\
             atomicity_profile,delta_decode_outcome\n",
        );
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.id,
                r.family,
                r.seed,
                r.index,
                r.num_sites,
                r.num_labels,
                render_number(&r.lp_min),
                render_number(&r.lp_max),
                render_number(&r.lp_delta),
                render_number(&r.brute_min),
                render_number(&r.brute_max),
                render_number(&r.gap_min),
                render_number(&r.gap_max),
                render_number(&r.gap_delta),
                r.decode_outcome,
                r.saturation_ok.map(|b| b.to_string()).unwrap_or_else(|| "n/a".into()),
                r.atomicity_profile,
                r.delta_decode_outcome,
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "instances {}  certificates {}\n",
            self.records.len(),
            self.certificates.len()
        ));
        for family in Family::ALL {
            let count = self.records.iter().filter(|r| r.family == family).count();
            if count == 0 {
                continue;
            }
            let decode_ok = self
                .records
                .iter()
                .filter(|r| r.family == family && r.decode_outcome == DecodeOutcome::Success)
                .count();
            let delta_decode_ok = self
                .records
                .iter()
                .filter(|r| r.family == family && r.delta_decode_outcome == DecodeOutcome::Success)
                .count();
            out.push_str(&format!(
                "{:<10} count {:>4}  min-tight {:.3}  delta-tight {:.3}  decoded {:>4}  delta-decoded {:>4}\n",
                family.name(),
                count,
                self.min_tight_rate(Some(family)),
                self.delta_tight_rate(Some(family)),
                decode_ok,
                delta_decode_ok,
            ));
        }
        out
    }
}

fn certificate_doc(
    kind: CertificateKind,
    record: &InstanceRecord,
    cost_range: (i64, i64),
    model: &Model<Rat>,
    marginals: Option<(MarginalKind, &PseudoMarginalSet<Rat>)>,
    extra: Vec<(String, String)>,
) -> Certificate {
    let mut meta = vec![
        ("kind".to_string(), kind.name().to_string()),
        ("instance_hash".to_string(), crate::formats::model_fingerprint(model)),
        ("family".to_string(), record.family.name().to_string()),
        ("seed".to_string(), record.seed.to_string()),
        ("index".to_string(), record.index.to_string()),
        ("cost_lo".to_string(), cost_range.0.to_string()),
        ("cost_hi".to_string(), cost_range.1.to_string()),
        ("lp_min".to_string(), render_number(&record.lp_min)),
        ("lp_max".to_string(), render_number(&record.lp_max)),
        ("lp_delta".to_string(), render_number(&record.lp_delta)),
        ("brute_min".to_string(), render_number(&record.brute_min)),
        ("brute_max".to_string(), render_number(&record.brute_max)),
    ];
    meta.extend(extra);
    let doc = Document {
        meta,
        model: model.clone(),
        marginals: marginals
            .map(|(kind, set)| (kind, set.iter().map(|(h, t)| (h.clone(), t.to_vec())).collect())),
        assignment: None,
    };
    Certificate {
        file_name: format!("{}-{}.cert", record.id, kind.name()),
        text: serialize_native(&doc),
    }
}

/// Measures one model against the oracle: relaxation optima, gaps,
/// saturation, and greedy decoding. Returns the record plus any emitted
/// certificates.
pub fn analyze_instance(
    family: Family,
    seed: u64,
    index: usize,
    cost_range: (i64, i64),
    model: &Model<Rat>,
    enumeration_cap: u64,
) -> Result<(InstanceRecord, Vec<Certificate>), OracleError> {
    let merged = model.merge_to_frontier();
    let brute = enumerate_modes(&merged, enumeration_cap)?;

    let (emin_lp, emin_map) = build_pseudo_emin(&merged)?;
    let emin = emin_lp.solve()?;
    let (emax_lp, emax_map) = build_pseudo_emax(&merged)?;
    let emax = emax_lp.solve()?;
    let (delta_lp, delta_map) = build_pseudo_delta_emin(&merged)?;
    let delta = delta_lp.solve()?;

    let lp_min = emin.objective.clone().expect("bounded feasible program");
    let lp_max = emax.objective.clone().expect("bounded feasible program");
    let lp_delta = delta.objective.clone().expect("bounded feasible program");
    let delta_marginals = extract_marginals(&delta, &delta_map)?;

    let gap_min = brute.min_value.sub_ref(&lp_min);
    let gap_max = brute.max_value.sub_ref(&lp_max);
    let gap_delta = brute.min_value.sub_ref(&brute.max_value).sub_ref(&lp_delta);

    let frontier_size = merged.factors().len();
    let (atomic, profile) = match atomic_frontier(&merged) {
        Ok(front) => {
            let profile = format!("{}of{}", front.len(), frontier_size);
            (Some(front), profile)
        }
        Err(DecodeError::CoverageLost { ref missing }) => {
            (None, format!("lost{}of{}-nocover", missing.len(), frontier_size))
        }
        Err(e) => return Err(OracleError::Internal(format!("atomicity analysis: {e}"))),
    };

    let mut record = InstanceRecord {
        id: format!("{}-{}-{}", family.name(), seed, index),
        family,
        seed,
        index,
        num_sites: merged.num_sites(),
        num_labels: merged.num_labels(),
        lp_min,
        lp_max,
        lp_delta,
        brute_min: brute.min_value.clone(),
        brute_max: brute.max_value.clone(),
        gap_min,
        gap_max,
        gap_delta,
        decode_outcome: DecodeOutcome::SkippedGap,
        delta_decode_outcome: DecodeOutcome::SkippedGap,
        saturation_ok: None,
        atomicity_profile: profile,
    };

    let mut certificates = Vec::new();
    if !record.all_gaps_zero() {
        record.decode_outcome = DecodeOutcome::SkippedGap;
        certificates.push(certificate_doc(
            CertificateKind::Gap,
            &record,
            cost_range,
            &merged,
            Some((MarginalKind::Delta, &delta_marginals)),
            vec![],
        ));
        return Ok((record, certificates));
    }

    let Some(front) = atomic else {
        record.decode_outcome = DecodeOutcome::Unsupported;
        record.delta_decode_outcome = DecodeOutcome::Unsupported;
        certificates.push(certificate_doc(
            CertificateKind::Unsupported,
            &record,
            cost_range,
            &merged,
            Some((MarginalKind::Delta, &delta_marginals)),
            vec![],
        ));
        return Ok((record, certificates));
    };

    // L1 saturation of the optimal delta marginals over the atomic frontier.
    let saturated = front
        .iter()
        .all(|s| delta_marginals.table_l1(s).is_some_and(|l1| l1 == Rat::from_int(2)));
    record.saturation_ok = Some(saturated);
    if !saturated {
        certificates.push(certificate_doc(
            CertificateKind::Saturation,
            &record,
            cost_range,
            &merged,
            Some((MarginalKind::Delta, &delta_marginals)),
            vec![],
        ));
    }

    // Greedy decode of both modes, twice: from the probability-program
    // marginals (inf from the minimization solve, sup from the
    // maximization solve), and from the delta marginals. The delta path
    // can hit an optimal vertex that is not the margin set of any global
    // optimum; such a failure is certified as a counterexample to the
    // global-origination claim rather than treated as a code defect.
    let emin_marginals = extract_marginals(&emin, &emin_map)?;
    let emax_marginals = extract_marginals(&emax, &emax_map)?;
    let run_decode = |marginals: &PseudoMarginalSet<Rat>,
                          kind: MarginalKind,
                          sign: DecodeSign,
                          target: &Rat,
                          tags: Vec<(String, String)>,
                          certificates: &mut Vec<Certificate>,
                          record: &InstanceRecord|
     -> Result<bool, OracleError> {
        match greedy_decode(marginals, kind, sign, &merged) {
            Ok(x) => {
                let value = merged.evaluate(&x)?;
                if &value == target {
                    Ok(true)
                } else {
                    let mut extra = tags;
                    extra.push(("decoded_value".into(), render_number(&value)));
                    certificates.push(certificate_doc(
                        CertificateKind::Decode,
                        record,
                        cost_range,
                        &merged,
                        Some((kind, marginals)),
                        extra,
                    ));
                    Ok(false)
                }
            }
            Err(DecodeError::Failure(f)) => {
                let mut extra = tags;
                extra.push(("step".into(), f.step.to_string()));
                extra.push(("scope".into(), f.scope.to_string()));
                certificates.push(certificate_doc(
                    CertificateKind::Decode,
                    record,
                    cost_range,
                    &merged,
                    Some((kind, marginals)),
                    extra,
                ));
                Ok(false)
            }
            Err(e) => Err(OracleError::Internal(format!("decode: {e}"))),
        }
    };
    let tag = |kind: &str, sign: &str| {
        vec![("marginals".to_string(), kind.to_string()), ("sign".to_string(), sign.to_string())]
    };
    let prob_ok = run_decode(
        &emin_marginals,
        MarginalKind::Probability,
        DecodeSign::Inf,
        &brute.min_value,
        tag("prob", "inf"),
        &mut certificates,
        &record,
    )? & run_decode(
        &emax_marginals,
        MarginalKind::Probability,
        DecodeSign::Sup,
        &brute.max_value,
        tag("prob", "sup"),
        &mut certificates,
        &record,
    )?;
    let delta_ok = run_decode(
        &delta_marginals,
        MarginalKind::Delta,
        DecodeSign::Inf,
        &brute.min_value,
        tag("delta", "inf"),
        &mut certificates,
        &record,
    )? & run_decode(
        &delta_marginals,
        MarginalKind::Delta,
        DecodeSign::Sup,
        &brute.max_value,
        tag("delta", "sup"),
        &mut certificates,
        &record,
    )?;
    record.decode_outcome = if prob_ok { DecodeOutcome::Success } else { DecodeOutcome::Failure };
    record.delta_decode_outcome =
        if delta_ok { DecodeOutcome::Success } else { DecodeOutcome::Failure };
    Ok((record, certificates))
}

/// Runs the whole harness: deterministic generation, exact solves,
/// certificates. Instances run in parallel; output order is fixed.
pub fn tightness_report(cfg: &HarnessConfig) -> Result<TightnessReport, OracleError> {
    let mut jobs: Vec<(Family, usize)> = Vec::new();
    for &(family, count) in &cfg.families {
        for index in 0..count {
            jobs.push((family, index));
        }
    }
    let results: Result<Vec<(InstanceRecord, Vec<Certificate>)>, OracleError> = jobs
        .par_iter()
        .map(|&(family, index)| {
            let model = generate_instance(family, cfg.seed, index, cfg.cost_range);
            analyze_instance(family, cfg.seed, index, cfg.cost_range, &model, cfg.enumeration_cap)
        })
        .collect();
    let mut records = Vec::new();
    let mut certificates = Vec::new();
    for (record, certs) in results? {
        records.push(record);
        certificates.extend(certs);
    }
    Ok(TightnessReport { records, certificates })
}

/// Re-checks a certificate from its serialized text: the embedded model is
/// regenerated from (family, seed, index, cost range) and must match, and
/// fresh exact solves must reproduce the recorded optima.
pub fn replay_certificate(text: &str) -> Result<(), OracleError> {
    let doc = crate::formats::parse_native(text)?;
    let get = |key: &str| {
        doc.meta_value(key)
            .map(str::to_string)
            .ok_or_else(|| OracleError::CertificateMeta(key.to_string()))
    };
    let family = Family::from_name(&get("family")?)
        .ok_or_else(|| OracleError::CertificateMeta("family".into()))?;
    let seed: u64 = get("seed")?.parse().map_err(|_| OracleError::CertificateMeta("seed".into()))?;
    let index: usize =
        get("index")?.parse().map_err(|_| OracleError::CertificateMeta("index".into()))?;
    let cost_lo: i64 =
        get("cost_lo")?.parse().map_err(|_| OracleError::CertificateMeta("cost_lo".into()))?;
    let cost_hi: i64 =
        get("cost_hi")?.parse().map_err(|_| OracleError::CertificateMeta("cost_hi".into()))?;

    let regenerated =
        generate_instance(family, seed, index, (cost_lo, cost_hi)).merge_to_frontier();
    if regenerated != doc.model {
        return Err(OracleError::ReplayMismatch(
            "regenerated model differs from the embedded one".into(),
        ));
    }
    let (record, _) = analyze_instance(
        family,
        seed,
        index,
        (cost_lo, cost_hi),
        &doc.model,
        DEFAULT_ENUMERATION_CAP,
    )?;
    for (key, fresh) in [
        ("lp_min", &record.lp_min),
        ("lp_max", &record.lp_max),
        ("lp_delta", &record.lp_delta),
        ("brute_min", &record.brute_min),
        ("brute_max", &record.brute_max),
    ] {
        let recorded = crate::formats::parse_number(&get(key)?)
            .ok_or_else(|| OracleError::CertificateMeta(key.to_string()))?;
        if &recorded != fresh {
            return Err(OracleError::ReplayMismatch(format!(
                "{key}: recorded {recorded} vs fresh {fresh}"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Property-suite runner (backs the CLI `verify` command)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub projection_ok: bool,
    pub lifting_ok: bool,
    pub delta_ok: bool,
    /// Sound completion invariants: the minimum-L1 completion value is
    /// bounded below by the largest per-scope L1 mass, and the solver's
    /// witness reproduces the margins at that value.
    pub completion_ok: bool,
    /// How many completion rounds matched the claimed closed form
    /// `max_s sum |q_s|` exactly. Equality is a measured claim, not an
    /// invariant: mixed dual solutions across overlapping scopes beat the
    /// single-scope bound on many inputs.
    pub completion_equal: usize,
    pub completion_rounds: usize,
}

impl VerifyReport {
    pub fn all_ok(&self) -> bool {
        self.projection_ok && self.lifting_ok && self.delta_ok && self.completion_ok
    }
}

fn random_dense(n: usize, l: usize, rng: &mut ChaCha8Rng, cap: usize) -> DenseFunction<Rat> {
    let size = checked_pow(l, n).expect("dense cap");
    let values = (0..size).map(|_| Rat::from_int(rng.random_range(-9..=9))).collect();
    DenseFunction::with_cap(n, l, values, cap).expect("within cap")
}

/// Property checks instantiated on a concrete model: projection algebra on
/// its scope set, lifting, delta calculus, and the minimum-L1 completion
/// closed form. Exact arithmetic throughout.
pub fn verify_instance(
    model: &Model<Rat>,
    seed: u64,
    rounds: usize,
    cap: usize,
) -> Result<VerifyReport, OracleError> {
    use crate::deltadist::{decompose, is_delta};
    use crate::orthomarginal::{lift, project};
    use crate::relaxation::build_min_l1_completion;

    let n = model.num_sites();
    let l = model.num_labels();
    let size =
        checked_pow(l, n).ok_or(OrthoError::SizeOverflow { num_sites: n, num_labels: l })?;
    if size > cap {
        return Err(OracleError::Ortho(OrthoError::CapExceeded { size, cap }));
    }
    let scopes = model.merge_to_frontier().scope_set();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut projection_ok = true;
    let mut lifting_ok = true;
    let mut delta_ok = true;
    let mut completion_ok = true;
    let mut completion_equal = 0usize;

    for _ in 0..rounds {
        let f = random_dense(n, l, &mut rng, cap);
        let g = random_dense(n, l, &mut rng, cap);
        let pf = project(&f, &scopes)?;
        projection_ok &= project(&pf, &scopes)? == pf;
        let residual = f.zip(&pf, |a, b| a.sub_ref(b));
        projection_ok &= residual.inner(&project(&g, &scopes)?).is_zero();
        for member in scopes.frontier_closure().map_err(OrthoError::from)?.iter() {
            projection_ok &= pf.margin(member)? == f.margin(member)?;
        }

        let margins = PseudoMarginalSet::margins_of(&f, &scopes)?;
        let lifted = lift(&margins, &g)?;
        for scope in scopes.iter() {
            lifting_ok &= lifted.margin(scope)?.as_slice() == margins.table(scope).unwrap();
        }

        // Random distribution pair: the difference must be a valid delta
        // and its decomposition must reconstruct it.
        let raw = random_dense(n, l, &mut rng, cap).map(|v| v.abs().add_ref(&Rat::one()));
        let raw2 = random_dense(n, l, &mut rng, cap).map(|v| v.abs().add_ref(&Rat::one()));
        let p = raw.map(|v| v.div_ref(&raw.total()));
        let p2 = raw2.map(|v| v.div_ref(&raw2.total()));
        let q = p.zip(&p2, |a, b| a.sub_ref(b));
        delta_ok &= is_delta(&q);
        match decompose(&q) {
            Ok(d) => delta_ok &= d.p.zip(&d.p_prime, |a, b| a.sub_ref(b)) == q,
            Err(_) => delta_ok = false,
        }

        // Zero-sum random function: its frontier margins form a consistent
        // zero-sum delta set. The min-L1 completion must dominate every
        // per-scope L1 mass and produce a feasible witness at its own
        // value; equality with the largest per-scope mass is measured.
        let raw_q = random_dense(n, l, &mut rng, cap);
        let mean = raw_q.total().div_ref(&crate::scalar::scalar_pow::<Rat>(l, n));
        let q0 = raw_q.map(|v| v.sub_ref(&mean));
        let front = scopes.frontier().map_err(OrthoError::from)?;
        let qset = PseudoMarginalSet::margins_of(&q0, &front)?;
        let (lp, vmap) = build_min_l1_completion(&qset, n, cap)?;
        let sol = lp.solve()?;
        let optimum = sol.objective.clone().expect("completion is feasible");
        let lower_bound = front
            .iter()
            .map(|s| qset.table_l1(s).unwrap())
            .max_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap_or_else(|| Rat::from_int(0));
        completion_ok &= optimum >= lower_bound && optimum <= q0.l1_norm();
        if let Some(witness) = crate::relaxation::extract_global(&sol, &vmap)? {
            completion_ok &= witness.l1_norm() == optimum;
            for s in front.iter() {
                completion_ok &= witness.margin(s)?.as_slice() == qset.table(s).unwrap();
            }
        }
        if optimum == lower_bound {
            completion_equal += 1;
        }
    }

    Ok(VerifyReport {
        projection_ok,
        lifting_ok,
        delta_ok,
        completion_ok,
        completion_equal,
        completion_rounds: rounds,
    })
}
