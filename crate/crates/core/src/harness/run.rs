use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    compactness_profile, compactness_verdict, connected_components, consistent_selection_defect, gamma_modulus,
    inclusion_chain, sample_orbit_closure, section_anchor, section_coset_defect, selection_containment_defect,
    stabilizer_candidates, surjectivity_defect, vertical_section, AnalysisError, CompactnessVerdict,
    DiagnosticsReport, OrbitClosureSample, Outcome, StridePlan,
};
use crate::base::{Frac128, TorusPoint, BRUTE_FORCE_MAX_N};
use crate::budget::Budget;
use crate::cocycle::{evaluate_cocycle, skew_iterate_stepwise, Cocycle, CocycleError, SkewState};
use crate::estimate::{
    circle_coverage_gap, conjugate_set, conjugation_window, estimate_e, estimate_p, hausdorff_distance,
    hausdorff_within, semigroup_defect, write_estimate, EstimateError, EstimateKind, EstimateOptions, Provenance,
    SetEstimate,
};
use crate::group::{GroupElement, GroupInstance, SearchGrid, SubgroupSpec};

use super::config::{DiagnosticName, ScenarioConfig, SetExpectation, StabilizerExpectation};
use super::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest `N` accepted by the oracle path.
pub const ORACLE_MAX_N: u64 = BRUTE_FORCE_MAX_N;

const CONJUGATION_SAMPLES: usize = 20;
const CONSTANCY_PAIRS: usize = 10;
const SELECTION_SAMPLES: usize = 10;
const GAMMA_ANCHORS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Fast,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Counters {
    pub sample_states: usize,
    pub e_estimates: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub mode: Mode,
    pub name: String,
    pub config_hash: String,
    pub config: Value,
    pub diagnostics: DiagnosticsReport,
    /// Qualitative readings such as the compactness verdict.
    pub verdicts: BTreeMap<String, String>,
    /// Structured results that are not single scalars.
    pub details: BTreeMap<String, Value>,
    pub artifacts: Vec<String>,
    pub counters: Counters,
    pub exit_code: i32,
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario   {}", self.name);
        let _ = writeln!(s, "mode       {}", if self.mode == Mode::Fast { "fast" } else { "oracle" });
        let _ = writeln!(s, "config     {}", self.config_hash);
        let _ = writeln!(s, "exit code  {}", self.exit_code);
        s.push('\n');
        s.push_str(&self.diagnostics.to_text());
        if !self.verdicts.is_empty() {
            s.push('\n');
            for (k, v) in &self.verdicts {
                let _ = writeln!(s, "{k}: {v}");
            }
        }
        s
    }
}

/// Where a run wrote its artifacts, and what it found.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: RunReport,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

/// Runs every configured diagnostic with the fast paths.
pub fn run_scenario(cfg: &ScenarioConfig, out_root: &Path) -> Result<RunOutcome, HarnessError> {
    run(cfg, out_root, Mode::Fast)
}

/// Runs the same diagnostics with linear-scan return times and stepwise
/// products, into `<name>-<hash>-oracle`.
pub fn run_oracle(cfg: &ScenarioConfig, out_root: &Path) -> Result<RunOutcome, HarnessError> {
    if cfg.budgets.n > ORACLE_MAX_N {
        return Err(HarnessError::OracleLimit {
            n: cfg.budgets.n,
            limit: ORACLE_MAX_N,
        });
    }
    run(cfg, out_root, Mode::Oracle)
}

fn is_budget(e: &AnalysisError) -> bool {
    matches!(
        e,
        AnalysisError::Budget(_)
            | AnalysisError::Estimate(EstimateError::Budget(_))
            | AnalysisError::Estimate(EstimateError::Cocycle(CocycleError::Budget { .. } | CocycleError::Exhausted(_)))
            | AnalysisError::Cocycle(CocycleError::Budget { .. } | CocycleError::Exhausted(_))
    )
}

struct Runner<'a> {
    cfg: &'a ScenarioConfig,
    mode: Mode,
    f: Cocycle,
    x0: TorusPoint,
    budget: Budget,
    opts: EstimateOptions,
    dir: PathBuf,
    report: DiagnosticsReport,
    verdicts: BTreeMap<String, String>,
    details: BTreeMap<String, Value>,
    artifacts: Vec<String>,
    counters: Counters,
}

impl Runner<'_> {
    fn r(&self) -> f64 {
        self.cfg.tolerances.r
    }

    fn w(&self) -> f64 {
        self.cfg.tolerances.w
    }

    fn limit(&self, name: &str, default: f64) -> f64 {
        self.cfg.expect.limits.get(name).copied().unwrap_or(default)
    }

    /// Checks against a configured limit, or records the value as info.
    fn maybe_check(&mut self, name: &str, value: f64) {
        match self.cfg.expect.limits.get(name) {
            Some(&t) => {
                self.report.check(name, value, t);
            }
            None => self.report.info(name, value),
        }
    }

    /// Unwraps a diagnostic input, recording truncation or failure under
    /// `name` when it is missing.
    fn attempt<T>(&mut self, name: &str, r: Result<T, AnalysisError>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) if is_budget(&e) => {
                self.truncated(name);
                None
            }
            Err(e) => {
                self.report
                    .push(name, f64::NAN, None, Outcome::Fail, Some(format!("error: {e}")));
                None
            }
        }
    }

    fn truncated(&mut self, name: &str) {
        self.counters.truncated = true;
        self.report
            .push(name, f64::NAN, None, Outcome::Truncated, Some("budget exhausted".into()));
    }

    /// False (after recording truncation) once the wall-clock limit passed.
    fn alive(&mut self, name: &str) -> bool {
        if self.budget.expired() {
            self.truncated(name);
            false
        } else {
            true
        }
    }

    fn expect(&mut self, name: &str, value: f64, ok: bool, note: String) {
        self.report
            .push(name, value, None, if ok { Outcome::Pass } else { Outcome::Fail }, Some(note));
    }

    fn write(&mut self, est: &SetEstimate, name: &str) -> Result<(), HarnessError> {
        let path = write_estimate(est, &self.dir, name)?;
        let csv = path.file_name().expect("file").to_string_lossy().into_owned();
        self.artifacts.push(csv.replace(".csv", ".json"));
        self.artifacts.push(csv);
        Ok(())
    }

    fn write_profile(&mut self, name: &str, header: &str, rows: &[(String, f64)]) -> Result<(), HarnessError> {
        let mut s = format!("{header}\n");
        for (a, b) in rows {
            let _ = writeln!(s, "{a},{b}");
        }
        let file = format!("profile_{name}.csv");
        fs::write(self.dir.join(&file), s)?;
        self.artifacts.push(file);
        Ok(())
    }

    fn e_at(&mut self, x: &TorusPoint) -> Result<SetEstimate, AnalysisError> {
        let t = &self.cfg.tolerances;
        self.counters.e_estimates += 1;
        Ok(estimate_e(
            &self.f,
            x,
            t.eps_fine(),
            t.eta,
            t.m,
            self.cfg.budgets.n,
            t.r,
            t.w,
            self.cfg.seed,
            &self.opts,
        )?)
    }

    fn cocycle_value(&self, n: i64, x: &TorusPoint) -> Result<GroupElement, AnalysisError> {
        match self.mode {
            Mode::Fast => Ok(evaluate_cocycle(&self.f, n, x)?),
            Mode::Oracle => {
                let s = SkewState::new(x.clone(), self.f.target().identity());
                Ok(skew_iterate_stepwise(&self.f, &s, n)?.g)
            }
        }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    fn random_point(rng: &mut ChaCha8Rng, d: usize) -> TorusPoint {
        let coords: Vec<Frac128> = (0..d).map(|_| Frac128(rng.gen::<u128>())).collect();
        TorusPoint::new(&coords)
    }

    fn gamma_points(&self) -> Vec<TorusPoint> {
        let d = self.x0.dim();
        (0..GAMMA_ANCHORS)
            .map(|i| {
                let shift = Frac128::from_f64(i as f64 / GAMMA_ANCHORS as f64);
                let mut v = vec![Frac128::ZERO; d];
                v[0] = shift;
                self.x0.translate(&v)
            })
            .collect()
    }
}

fn checkpoints(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(1000u64), |c| c.checked_mul(10))
        .take_while(|c| *c <= n)
        .collect();
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

/// The identity plus a few elements along each coordinate axis.
pub fn default_probes(g: &GroupInstance) -> Vec<GroupElement> {
    fn steps(g: &GroupInstance, out: &mut Vec<Vec<f64>>) {
        match g {
            GroupInstance::RealVector(d) => out.extend((0..*d).map(|_| vec![-0.5, 0.5])),
            GroupInstance::IntegerLattice(d) => out.extend((0..*d).map(|_| vec![-1.0, 1.0])),
            GroupInstance::Torus(d) => out.extend((0..*d).map(|_| vec![0.25, 0.5, 0.75])),
            GroupInstance::HeisenbergReal => out.extend((0..3).map(|_| vec![-0.5, 0.5])),
            GroupInstance::HeisenbergDiscrete => out.extend((0..3).map(|_| vec![-1.0, 1.0])),
            GroupInstance::DirectProduct(fs) => fs.iter().for_each(|f| steps(f, out)),
        }
    }
    let mut per_axis = Vec::new();
    steps(g, &mut per_axis);
    let mut probes = vec![g.identity()];
    for (i, vals) in per_axis.iter().enumerate() {
        for v in vals {
            let mut c = vec![0.0; per_axis.len()];
            c[i] = *v;
            probes.push(GroupElement::from_f64(&c));
        }
    }
    probes
}

fn run(cfg: &ScenarioConfig, out_root: &Path, mode: Mode) -> Result<RunOutcome, HarnessError> {
    let mut dir_name = cfg.dir_name();
    if mode == Mode::Oracle {
        dir_name.push_str("-oracle");
    }
    let dir = out_root.join(dir_name);
    fs::create_dir_all(&dir)?;
    let budget = match cfg.budgets.max_seconds {
        Some(s) => Budget::UNLIMITED.with_time_limit(Duration::from_secs_f64(s)),
        None => Budget::UNLIMITED,
    };
    let opts = EstimateOptions {
        source: match mode {
            Mode::Fast => crate::estimate::ReturnSource::Fast,
            Mode::Oracle => crate::estimate::ReturnSource::Oracle,
        },
        budget,
    };
    let mut rn = Runner {
        cfg,
        mode,
        f: cfg.cocycle(),
        x0: cfg.start_point(),
        budget,
        opts,
        dir: dir.clone(),
        report: DiagnosticsReport::default(),
        verdicts: BTreeMap::new(),
        details: BTreeMap::new(),
        artifacts: Vec::new(),
        counters: Counters::default(),
    };
    execute(&mut rn)?;

    let exit_code = if rn.report.any(Outcome::Truncated) {
        3
    } else if rn.report.any(Outcome::Fail) {
        2
    } else {
        0
    };
    rn.artifacts.push("report.json".into());
    rn.artifacts.push("report.txt".into());
    rn.artifacts.sort();
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        mode,
        name: cfg.name.clone(),
        config_hash: cfg.hash(),
        config: serde_json::to_value(cfg).expect("config serializes"),
        diagnostics: rn.report,
        verdicts: rn.verdicts,
        details: rn.details,
        artifacts: rn.artifacts,
        counters: rn.counters,
        exit_code,
    };
    let mut json_text = serde_json::to_string_pretty(&report).expect("report serializes");
    json_text.push('\n');
    fs::write(dir.join("report.json"), json_text)?;
    fs::write(dir.join("report.txt"), report.to_text())?;
    Ok(RunOutcome { dir, report })
}

fn execute(rn: &mut Runner<'_>) -> Result<(), HarnessError> {
    let cfg = rn.cfg;
    let t = cfg.tolerances.clone();
    let (r, w) = (rn.r(), rn.w());
    let group = cfg.group.clone();
    let need_e = [
        DiagnosticName::EEstimate,
        DiagnosticName::Components,
        DiagnosticName::Conjugation,
        DiagnosticName::Constancy,
        DiagnosticName::Selection,
        DiagnosticName::Inclusion,
    ]
    .iter()
    .any(|d| cfg.runs(*d));
    let need_sample = [
        DiagnosticName::Surjectivity,
        DiagnosticName::Compactness,
        DiagnosticName::Section,
        DiagnosticName::Gamma,
        DiagnosticName::Stabilizer,
        DiagnosticName::Inclusion,
    ]
    .iter()
    .any(|d| cfg.runs(*d));

    // P-estimate
    let mut p_est = None;
    if (cfg.runs(DiagnosticName::PEstimate) || cfg.runs(DiagnosticName::Inclusion)) && rn.alive("p.count") {
        let res = estimate_p(&rn.f, &rn.x0, &t.eps, cfg.budgets.n, r, w, &rn.opts).map_err(AnalysisError::from);
        p_est = rn.attempt("p.count", res);
    }
    if let Some(p) = &p_est {
        rn.write(p, "p")?;
        rn.report.info("p.count", p.len() as f64);
        if let Some(flag) = p.flag {
            rn.report.note(format!("empty: {flag:?}"));
        }
        let sg = semigroup_defect(p);
        if sg.undefined {
            rn.report.push(
                "p.semigroup-defect",
                sg.defect,
                Some(rn.limit("p.semigroup-defect", 3.0 * r)),
                Outcome::NotApplicable,
                Some("fewer than two points".into()),
            );
        } else {
            let lim = rn.limit("p.semigroup-defect", 3.0 * r);
            rn.report.check("p.semigroup-defect", sg.defect, lim);
        }
        if let Some(exp) = cfg.expect.p_estimate {
            let ok = (exp == SetExpectation::Empty) == p.is_empty();
            rn.expect("expect.p-estimate", p.len() as f64, ok, format!("expected {exp:?}"));
        }
    }

    // E-estimate at the start point
    let mut e_est = None;
    if need_e && rn.alive("e.count") {
        let x0 = rn.x0.clone();
        let res = rn.e_at(&x0);
        e_est = rn.attempt("e.count", res);
    }
    if let Some(e) = &e_est {
        rn.write(e, "e")?;
        rn.report.info("e.count", e.len() as f64);
        if let Some(flag) = e.flag {
            rn.report.note(format!("empty: {flag:?}"));
        }
        rn.maybe_check("e.radius", e.radius());
        if group == GroupInstance::Torus(1) {
            rn.maybe_check("e.circle-gap", circle_coverage_gap(e, 0.001));
        }
        if let Some(exp) = cfg.expect.e_estimate {
            let ok = (exp == SetExpectation::Empty) == e.is_empty();
            rn.expect("expect.e-estimate", e.len() as f64, ok, format!("expected {exp:?}"));
        }
    }

    // orbit sample
    let mut sample: Option<OrbitClosureSample> = None;
    if need_sample && rn.alive("sample.states") {
        let mut plan = StridePlan::new(cfg.budgets.n, cfg.stride()).with_focus(rn.gamma_points(), t.section_eta());
        if rn.mode == Mode::Oracle {
            plan = plan.stepwise();
        }
        let s0 = SkewState::new(rn.x0.clone(), cfg.start_value());
        let res = sample_orbit_closure(&rn.f, &s0, &plan, Some(&cfg.subgroup), &rn.budget);
        sample = rn.attempt("sample.states", res);
        if let Some(s) = &sample {
            rn.counters.sample_states = s.len();
            rn.report.info("sample.states", s.len() as f64);
            if s.truncated {
                rn.truncated("sample.complete");
            }
        }
    }

    if let Some(s) = &sample {
        if cfg.runs(DiagnosticName::Surjectivity) && rn.alive("surjectivity.defect") {
            let res = surjectivity_defect(s, t.grid);
            if let Some(d) = rn.attempt("surjectivity.defect", res) {
                let lim = rn.limit("surjectivity.defect", t.grid);
                rn.report.check("surjectivity.defect", d, lim);
            }
        }
    }

    // compactness; the trivial-quotient verdict also gates the inclusion chain
    let mut trivial_verdict = None;
    if let Some(s) = &sample {
        let cps = checkpoints(cfg.budgets.n);
        if cfg.runs(DiagnosticName::Compactness) && rn.alive("compactness.radius") {
            let res = compactness_profile(s, &cfg.subgroup, &cps);
            if let Some(profile) = rn.attempt("compactness.radius", res) {
                let rows: Vec<(String, f64)> = profile.iter().map(|(n, v)| (n.to_string(), *v)).collect();
                rn.write_profile("compactness", "N,radius", &rows)?;
                let last = profile.last().map_or(0.0, |p| p.1);
                rn.maybe_check("compactness.radius", last);
                let verdict = compactness_verdict(&profile, r);
                rn.verdicts.insert("compactness".into(), format!("{} (mod {})", verdict.name(), cfg.subgroup));
                let ratio = match profile.len() {
                    0 | 1 => 1.0,
                    k => profile[k - 1].1 / profile[k - 2].1.max(f64::MIN_POSITIVE),
                };
                match cfg.expect.compactness {
                    Some(exp) => rn.expect(
                        "compactness.verdict",
                        ratio,
                        exp == verdict,
                        format!("{} (expected {})", verdict.name(), exp.name()),
                    ),
                    None => {
                        rn.report.info("compactness.verdict", ratio);
                        rn.report.note(verdict.name());
                    }
                }
                if cfg.subgroup == SubgroupSpec::trivial() {
                    trivial_verdict = Some(verdict);
                }
            }
        }
        if trivial_verdict.is_none() {
            if let Ok(p) = compactness_profile(s, &SubgroupSpec::trivial(), &cps) {
                trivial_verdict = Some(compactness_verdict(&p, r));
            }
        }
    }

    // vertical section at the start point
    let mut section = None;
    if let Some(s) = &sample {
        if (cfg.runs(DiagnosticName::Section) || cfg.runs(DiagnosticName::Inclusion)) && rn.alive("section.count") {
            let res = vertical_section(s, &rn.x0, t.section_eta(), r, w);
            section = rn.attempt("section.count", res);
        }
    }
    if let Some(sec) = &section {
        rn.write(sec, "section")?;
        if cfg.runs(DiagnosticName::Section) {
            rn.report.info("section.count", sec.len() as f64);
            let lim = rn.limit("section.coset-defect", 3.0 * r);
            if sec.is_empty() {
                rn.report.push(
                    "section.coset-defect",
                    f64::NAN,
                    Some(lim),
                    Outcome::NotApplicable,
                    Some("empty section".into()),
                );
            } else {
                let res = section_coset_defect(sec, &cfg.subgroup);
                if let Some(d) = rn.attempt("section.coset-defect", res) {
                    rn.report.check("section.coset-defect", d, lim);
                    rn.report.note(format!("mod {}", cfg.subgroup));
                }
            }
        }
    }

    if let Some(s) = &sample {
        if cfg.runs(DiagnosticName::Gamma) && rn.alive("gamma.max") {
            let mut anchors = Vec::new();
            for x in rn.gamma_points() {
                if let Ok(sec) = vertical_section(s, &x, t.section_eta(), r, w) {
                    if let Some(a) = section_anchor(&sec) {
                        anchors.push((x, a));
                    }
                }
            }
            rn.report.info("gamma.anchors", anchors.len() as f64);
            if anchors.len() >= 2 {
                let res = gamma_modulus(&group, &cfg.subgroup, &anchors);
                if let Some(mut scatter) = rn.attempt("gamma.max", res) {
                    scatter.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
                    let rows: Vec<(String, f64)> = scatter.iter().map(|(d, q)| (d.to_string(), *q)).collect();
                    rn.write_profile("gamma", "base_distance,quotient_distance", &rows)?;
                    rn.report.info("gamma.max", scatter.iter().map(|p| p.1).fold(0.0, f64::max));
                }
            } else {
                rn.report.push(
                    "gamma.max",
                    f64::NAN,
                    None,
                    Outcome::NotApplicable,
                    Some("fewer than two anchored sections".into()),
                );
            }
        }

        if cfg.runs(DiagnosticName::Stabilizer) && rn.alive("stabilizer.small") {
            let probes = SetEstimate::from_points(
                group.clone(),
                default_probes(&group),
                r,
                w.max(1.0),
                EstimateKind::Derived,
                Provenance::default(),
            )
            .map_err(AnalysisError::from);
            let res = probes.and_then(|p| stabilizer_candidates(s, &p, r, 4.0 * r));
            if let Some(cands) = rn.attempt("stabilizer.small", res) {
                let small = cands.iter().filter(|(_, d)| *d <= 2.0 * r).count();
                rn.report.info("stabilizer.probes", cands.len() as f64);
                rn.report.info("stabilizer.small", small as f64);
                rn.details.insert(
                    "stabilizer".into(),
                    Value::Array(
                        cands
                            .iter()
                            .map(|(h, d)| json!({"probe": h.to_f64_vec(), "defect": finite_or_str(*d)}))
                            .collect(),
                    ),
                );
                if let Some(exp) = cfg.expect.stabilizer {
                    let ok = match exp {
                        StabilizerExpectation::Full => small == cands.len(),
                        StabilizerExpectation::Trivial => cands
                            .iter()
                            .all(|(h, d)| (group.norm_unchecked(h) <= 2.0 * r) == (*d <= 2.0 * r)),
                    };
                    rn.expect("expect.stabilizer", small as f64, ok, format!("expected {exp:?}"));
                }
            }
        }
    }

    if let Some(e) = e_est.clone() {
        if cfg.runs(DiagnosticName::Components) && rn.alive("components.count") {
            if e.is_empty() {
                rn.report.push(
                    "components.count",
                    0.0,
                    None,
                    Outcome::NotApplicable,
                    Some("empty E-estimate".into()),
                );
            } else {
                let res = connected_components(&e, t.scale());
                if let Some(c) = rn.attempt("components.count", res) {
                    match cfg.expect.components {
                        Some(k) => rn.expect("components.count", c.count() as f64, c.count() == k, format!("expected {k}")),
                        None => rn.report.info("components.count", c.count() as f64),
                    }
                    rn.details.insert(
                        "components".into(),
                        json!({"sizes": c.sizes, "radii": c.radii, "min_gap": c.min_gap.map(finite_or_str)}),
                    );
                }
            }
        }

        if cfg.runs(DiagnosticName::Conjugation) && rn.alive("conjugation.defect") {
            let res = conjugation_defect(rn, &e);
            if let Some(d) = rn.attempt("conjugation.defect", res) {
                let lim = rn.limit("conjugation.defect", 3.0 * r + 0.05);
                rn.report.check("conjugation.defect", d, lim);
            }
        }

        if cfg.runs(DiagnosticName::Constancy) && rn.alive("constancy.defect") {
            if group.is_abelian() {
                let res = constancy_defect(rn);
                if let Some(d) = rn.attempt("constancy.defect", res) {
                    let lim = rn.limit("constancy.defect", 3.0 * r);
                    rn.report.check("constancy.defect", d, lim);
                }
            } else {
                rn.report.push(
                    "constancy.defect",
                    f64::NAN,
                    None,
                    Outcome::NotApplicable,
                    Some("non-abelian group".into()),
                );
            }
        }

        if cfg.runs(DiagnosticName::Selection) && rn.alive("selection.conjugation-defect") {
            if let Some(sel) = &cfg.selection {
                let grid = SearchGrid::new(w.min(2.0), r / 5.0);
                let mut rng = rn.rng(3);
                let samples: Vec<(TorusPoint, i64)> = (0..SELECTION_SAMPLES)
                    .map(|_| {
                        let x = Runner::random_point(&mut rng, rn.x0.dim());
                        let n = rng.gen_range(-1000i64..=1000);
                        (x, n)
                    })
                    .collect();
                let res = consistent_selection_defect(&rn.f, sel, &samples, grid);
                if let Some(d) = rn.attempt("selection.conjugation-defect", res) {
                    let lim = rn.limit("selection.conjugation-defect", 1e-9);
                    rn.report.check("selection.conjugation-defect", d, lim);
                    rn.report.note(sel.tag());
                }
                let res = selection_containment_defect(sel, &e, grid);
                if let Some(d) = rn.attempt("selection.containment-defect", res) {
                    let lim = rn.limit("selection.containment-defect", 2.0 * r);
                    rn.report.check("selection.containment-defect", d, lim);
                }
            }
        }

        if cfg.runs(DiagnosticName::Inclusion) && rn.alive("inclusion.p-in-cc") {
            if let (Some(p), Some(sec)) = (&p_est, &section) {
                let lim_p = rn.limit("inclusion.p-in-cc", 3.0 * r);
                let lim_e = rn.limit("inclusion.cc-in-e", 3.0 * r);
                if e.is_empty() && trivial_verdict == Some(CompactnessVerdict::Unbounded) {
                    let why = "E empty and orbit unbounded: no surjective orbit closure";
                    rn.report
                        .push("inclusion.p-in-cc", f64::NAN, Some(lim_p), Outcome::NotApplicable, Some(why.into()));
                    rn.report
                        .push("inclusion.cc-in-e", f64::NAN, Some(lim_e), Outcome::NotApplicable, Some(why.into()));
                } else {
                    let res = inclusion_chain(p, sec, &e, w - 3.0 * r);
                    if let Some(chain) = rn.attempt("inclusion.p-in-cc", res) {
                        rn.report.check("inclusion.p-in-cc", chain.p_in_cc, lim_p);
                        rn.report.check("inclusion.cc-in-e", chain.cc_in_e, lim_e);
                        rn.report.info("inclusion.cc-points", chain.cc_points as f64);
                    }
                }
            }
        }
    }
    Ok(())
}

fn finite_or_str(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(if v.is_nan() { "nan" } else { "inf" })
    }
}

/// Largest windowed Hausdorff distance between `E_{T^n x}` and
/// `f(n,x)·E_x·f(n,x)⁻¹` over seeded `n`.
fn conjugation_defect(rn: &mut Runner<'_>, e: &SetEstimate) -> Result<f64, AnalysisError> {
    let g = rn.cfg.group.clone();
    let w = rn.w();
    let span = rn.cfg.budgets.n.min(10_000) as i64;
    let mut rng = rn.rng(1);
    let ns: Vec<i64> = (0..CONJUGATION_SAMPLES)
        .map(|_| loop {
            let n = rng.gen_range(-span..=span);
            if n != 0 {
                break n;
            }
        })
        .collect();
    let mut worst = 0.0f64;
    let mut per_n = Vec::new();
    for n in ns {
        let c = rn.cocycle_value(n, &rn.x0)?;
        let y = rn.f.system().rotate(&rn.x0, n)?;
        let ey = rn.e_at(&y)?;
        let moved = conjugate_set(e, &c)?;
        let cinv = g.invert_unchecked(&c);
        let mut inner = w / 2.0;
        while conjugation_window(&g, &cinv, inner) > w {
            inner /= 2.0;
        }
        let d = hausdorff_within(&moved, &ey, inner)?;
        per_n.push(json!({"n": n, "defect": finite_or_str(d), "inner": inner}));
        worst = worst.max(d);
    }
    rn.details.insert("conjugation".into(), Value::Array(per_n));
    Ok(worst)
}

/// Largest Hausdorff distance between E-estimates at seeded pairs of points.
fn constancy_defect(rn: &mut Runner<'_>) -> Result<f64, AnalysisError> {
    let mut rng = rn.rng(2);
    let d = rn.x0.dim();
    let pairs: Vec<(TorusPoint, TorusPoint)> = (0..CONSTANCY_PAIRS)
        .map(|_| (Runner::random_point(&mut rng, d), Runner::random_point(&mut rng, d)))
        .collect();
    let mut worst = 0.0f64;
    for (x, y) in pairs {
        let ex = rn.e_at(&x)?;
        let ey = rn.e_at(&y)?;
        worst = worst.max(hausdorff_distance(&ex, &ey)?);
    }
    Ok(worst)
}
