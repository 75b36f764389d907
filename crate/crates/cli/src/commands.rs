use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use uhf_core::actions::{evaluate, induced_action, ProductAction};
use uhf_core::algebra::UnitaryMatrix;
use uhf_core::crossed::{
    connecting_map, simplex_verdict, trace_simplex_diameter, verify_covariance, write_simplex_csv, CrossedGenerator,
    CrossedStage, CROSSED_TOL,
};
use uhf_core::groups::{
    induce, induced_character_defect, supernatural_of, Element, GroupSpec, Order, Representation,
};
use uhf_core::rokhlin::{arc_tower, best_cyclic_tower, certify_schedule, tower_defects, CertifyOptions, EpsilonRule};
use uhf_core::transforms::{
    bump_up, construct_strongly_outer, cut_down, extend_finite_index, rokhlin_action_universal, write_reports_csv,
    ConstructOptions, UniversalOptions,
};
use uhf_core::witness::{flow_series, DEFAULT_THRESHOLD, DEFAULT_WINDOW};

use crate::document::{build_factors, parse_real, InputError, Loaded};

/// Tolerance for structural checks reported by the front end.
const REPORT_TOL: f64 = 1e-10;

pub enum Outcome {
    Pass,
    Fail,
}

pub enum Failure {
    Input(InputError),
    Core(uhf_core::Error),
    Io(std::io::Error),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<uhf_core::Error> for Failure {
    fn from(e: uhf_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Run = Result<Outcome, Failure>;

fn missing(task: &str) -> Failure {
    Failure::Input(InputError::plain(format!("document has no [{task}] table")))
}

fn verdict(pass: bool) -> Outcome {
    if pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

/// Output directory plus the replay plan collected while a command runs.
pub struct Session<'a> {
    pub doc: &'a Loaded,
    pub command: String,
    pub out: PathBuf,
    artifacts: Vec<String>,
    plan: serde_json::Map<String, Value>,
}

impl<'a> Session<'a> {
    pub fn new(doc: &'a Loaded, command: &str, out: PathBuf) -> Self {
        Session { doc, command: command.into(), out, artifacts: Vec::new(), plan: Default::default() }
    }

    fn create(&mut self, name: &str) -> std::io::Result<BufWriter<File>> {
        fs::create_dir_all(&self.out)?;
        self.artifacts.push(name.to_string());
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn record(&mut self, key: &str, v: Value) {
        self.plan.insert(key.into(), v);
    }

    /// Write `plan.json`: the command, the document and everything derived from it.
    pub fn finish(mut self) -> std::io::Result<PathBuf> {
        fs::create_dir_all(&self.out)?;
        let plan = json!({
            "command": self.command,
            "document": self.doc.source,
            "artifacts": std::mem::take(&mut self.artifacts),
            "details": Value::Object(std::mem::take(&mut self.plan)),
        });
        let path = self.out.join("plan.json");
        let mut f = File::create(&path)?;
        serde_json::to_writer_pretty(&mut f, &plan).map_err(std::io::Error::other)?;
        writeln!(f)?;
        Ok(path)
    }
}

fn file_name(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

fn tower_length(group: &GroupSpec, g: &Element, k: Option<u64>) -> Result<Option<u64>, Failure> {
    match (k, group.order_of(g)?) {
        (Some(k), _) => Ok(Some(k)),
        (None, Order::Finite(m)) => Ok(Some(m)),
        (None, Order::Infinite) => Ok(None),
    }
}

pub fn info(s: &mut Session) -> Run {
    let g = &s.doc.group;
    println!("group: {} ({})", g.kind(), g.order().map_or("infinite".to_string(), |n| format!("order {n}")));
    if let Some(els) = g.finite_elements().filter(|e| e.len() <= 64) {
        for e in els {
            println!("  element {} of order {}", g.format_element(&e), g.order_of(&e)?);
        }
    } else {
        for e in g.generators() {
            println!("  generator {} of order {}", g.format_element(&e), g.order_of(&e)?);
        }
    }
    if s.doc.doc.action.is_some() {
        let a = s.doc.action()?;
        let shown = a.factors().len().unwrap_or(8).min(8);
        println!("action: {}", a.label());
        println!("  factors: {:?}{}", a.factors().prefix(shown)?, if a.factors().len().is_none() { " ..." } else { "" });
        println!("  type: {}", supernatural_of(a.factors())?);
        a.verify(shown.min(4))?;
        println!("  homomorphism check on {} factors: ok", shown.min(4));
    } else if let Some(f) = s.doc.factors()? {
        println!("factors: {}", supernatural_of(&f)?);
    }
    Ok(Outcome::Pass)
}

pub fn evaluate_cmd(s: &mut Session) -> Run {
    let t = s.doc.doc.evaluate.as_ref().ok_or_else(|| missing("evaluate"))?;
    let a = s.doc.action()?;
    let g = s.doc.element(&t.element)?;
    let st = evaluate(&a, &g, t.stage)?;
    let trace = st.unitary.normalized_trace();
    let mut entries: Vec<(usize, usize, uhf_core::algebra::C64)> = match st.unitary.exact() {
        Some(x) => x.entries().map(|(i, j, c)| (i, j, c.to_complex())).collect(),
        None => {
            let m = st.unitary.matrix();
            (0..m.dim()).flat_map(|i| (0..m.dim()).map(move |j| (i, j, m[(i, j)]))).filter(|e| e.2.norm() > 0.0).collect()
        }
    };
    entries.sort_by_key(|e| (e.0, e.1));
    let mut w = s.create("evaluate.csv")?;
    writeln!(w, "row,col,re,im")?;
    for (i, j, z) in entries {
        writeln!(w, "{i},{j},{:.16e},{:.16e}", z.re, z.im)?;
    }
    w.flush()?;
    println!("stage {} dims {:?}: normalized trace {:.16e}{:+.16e}i", st.stage, st.dims, trace.re, trace.im);
    s.record("stage", json!({ "stage": st.stage, "dims": st.dims, "trace": [trace.re, trace.im] }));
    Ok(Outcome::Pass)
}

pub fn tower(s: &mut Session) -> Run {
    let t = s.doc.doc.tower.as_ref().ok_or_else(|| missing("tower"))?;
    let a = s.doc.action()?;
    let g = s.doc.element(&t.element)?;
    let u = evaluate(&a, &g, t.stage)?.unitary;
    let k = tower_length(a.group(), &g, t.k)?;
    let tw = match k {
        Some(k) => best_cyclic_tower(&u, k, CertifyOptions::default().cluster_tol)?,
        None => arc_tower(&u, t.length.unwrap_or(t.stage + 1), CertifyOptions::default().cluster_tol)?,
    };
    let d = tower_defects(&tw, &u, &[])?;
    let mut w = s.create("tower.csv")?;
    writeln!(w, "stage,block_size,tower_length,ortho_defect,shift_defect,trace_defect")?;
    writeln!(w, "{},{},{},{:.16e},{:.16e},{:.16e}", t.stage, u.dim(), tw.len(), d.orthogonality, d.shift, d.trace)?;
    w.flush()?;
    println!(
        "tower of length {} at stage {}: orthogonality {:.3e}, shift {:.3e}, trace {:.3e}{}",
        tw.len(),
        t.stage,
        d.orthogonality,
        d.shift,
        d.trace,
        if d.exact { " (exact)" } else { "" }
    );
    s.record("tower", json!({ "stage": t.stage, "k": k, "length": tw.len() }));
    Ok(Outcome::Pass)
}

fn certify_options(max_block: Option<usize>) -> CertifyOptions {
    let mut o = CertifyOptions::default();
    if let Some(m) = max_block {
        o.max_block_factors = m;
    }
    o
}

pub fn certify(s: &mut Session) -> Run {
    let t = s.doc.doc.certify.as_ref().ok_or_else(|| missing("certify"))?;
    let a = s.doc.action()?;
    let g = s.doc.element(&t.element)?;
    let rule = match (&t.epsilon, t.epsilon_base) {
        (Some(v), None) => EpsilonRule::Explicit(v.clone()),
        (None, b) => EpsilonRule::Geometric { base: b.unwrap_or(2.0) },
        (Some(_), Some(_)) => return Err(InputError::plain("give epsilon or epsilon_base, not both").into()),
    };
    let k = tower_length(a.group(), &g, t.k)?;
    let sched = certify_schedule(&a, &g, k, t.l_max, &rule, &certify_options(t.max_block_factors))?;
    sched.write_csv(s.create("certify.csv")?)?;
    for st in &sched.stages {
        println!(
            "stage {}: factors {}..{}, N = {}, length {}, worst defect {:.3e} <= {:.3e}: {}",
            st.stage,
            st.start,
            st.end,
            st.block_size,
            st.tower_length,
            st.defects.worst(),
            st.epsilon,
            if st.pass { "PASS" } else { "FAIL" }
        );
    }
    if let Some(f) = &sched.failure {
        println!("{f}");
    }
    println!("certificate: {}", if sched.pass() { "PASS" } else { "FAIL" });
    s.record("certify", json!({ "element": t.element.get_ref(), "k": k, "l_max": t.l_max, "rule": rule, "blocks": sched.blocks() }));
    Ok(verdict(sched.pass()))
}

pub fn witness(s: &mut Session) -> Run {
    let t = s.doc.doc.witness.as_ref().ok_or_else(|| missing("witness"))?;
    let from_action = s.doc.doc.action.as_ref().filter(|b| b.get_ref().kind == "flow").map(|b| b.get_ref());
    let theta = t.theta.clone().or_else(|| from_action.and_then(|b| b.theta.clone())).unwrap_or_else(|| "sqrt2".into());
    let r = t
        .r
        .clone()
        .or_else(|| from_action.and_then(|b| b.r.as_ref()).and_then(|r| r.first().cloned()))
        .ok_or_else(|| InputError::plain("witness needs r, in [witness] or a flow action"))?;
    let (theta_v, r_v) = (parse_real(&theta).map_err(InputError::plain)?, parse_real(&r).map_err(InputError::plain)?);
    let series = flow_series(theta_v, r_v, t.n_max)?
        .with_window(t.window.unwrap_or(DEFAULT_WINDOW))
        .with_threshold(t.threshold.unwrap_or(DEFAULT_THRESHOLD));
    series.write_csv(s.create("witness.csv")?)?;
    println!("{}", series.verdict_line());
    s.record("witness", json!({ "theta": theta, "r": r, "n_max": t.n_max }));
    Ok(verdict(series.is_witness()))
}

pub fn bump(s: &mut Session) -> Run {
    let t = s.doc.doc.bump_up.as_ref().ok_or_else(|| missing("bump-up"))?;
    let a = s.doc.action()?;
    let g = s.doc.element(&t.element)?;
    let target = build_factors(&t.target).map_err(InputError::plain)?;
    let k = tower_length(a.group(), &g, t.k)?;
    let source = certify_schedule(&a, &g, k, t.l_max, &EpsilonRule::default(), &CertifyOptions::default())?;
    if !source.pass() {
        println!("source towers do not certify: {}", source.failure.as_deref().unwrap_or("failing stage"));
        source.write_csv(s.create("bump-up_source.csv")?)?;
        return Ok(Outcome::Fail);
    }
    let b = bump_up(&a, &source, &target)?;
    b.plan.write_csv(s.create("bump-up_plan.csv")?)?;
    b.schedule.write_csv(s.create("bump-up.csv")?)?;
    print!("{}", b.plan);
    println!("transported towers: {}", if b.schedule.pass() { "PASS" } else { "FAIL" });
    s.record("bump_up", json!({ "element": t.element.get_ref(), "k": k, "source_blocks": source.blocks(), "plan": b.plan }));
    Ok(verdict(b.schedule.pass()))
}

pub fn cut(s: &mut Session) -> Run {
    let t = s.doc.doc.cut_down.as_ref().ok_or_else(|| missing("cut-down"))?;
    let a = s.doc.action()?;
    let g = s.doc.element(&t.element)?;
    let k = tower_length(a.group(), &g, t.k)?.ok_or_else(|| InputError::plain("cut-down needs an element of finite order"))?;
    let opts = CertifyOptions::default();
    let sched = certify_schedule(&a, &g, Some(k), t.l_max, &EpsilonRule::default(), &opts)?;
    let c = cut_down(&a, &sched)?;
    let after = certify_schedule(&c.action, &g, Some(k), t.l_max, &EpsilonRule::default(), &opts)?;
    after.write_csv(s.create("cut-down.csv")?)?;
    println!("first full stage l0 = {}; output type {}", c.l0, supernatural_of(c.action.factors())?);
    println!("towers after cut-down: {}", if after.pass() { "PASS" } else { "FAIL" });
    s.record("cut_down", json!({ "element": t.element.get_ref(), "k": k, "l0": c.l0, "blocks": c.blocks }));
    Ok(verdict(after.pass()))
}

fn subgroup_setup(s: &Session, task: &crate::document::SubgroupTask) -> Result<(Vec<usize>, ProductAction), Failure> {
    let (g, h) = s.doc.subgroup(&task.subgroup)?;
    let sub = g.subgroup_table(&h)?;
    Ok((h, s.doc.subgroup_action(&sub)?))
}

pub fn induce_cmd(s: &mut Session) -> Run {
    let t = s.doc.doc.induce.as_ref().ok_or_else(|| missing("induce"))?;
    let GroupSpec::FiniteTable(g) = &s.doc.group else { unreachable!("checked by subgroup") };
    let (h, a_h) = subgroup_setup(s, t)?;
    let ind = induced_action(&a_h, g, &h)?;
    ind.verify(t.stages)?;
    let mut rows = Vec::with_capacity(t.stages);
    for l in 0..t.stages {
        let f = a_h.factor(l)?;
        let images = (0..h.len()).map(|i| f.image(a_h.group(), &Element::Index(i))).collect::<Result<Vec<_>, _>>()?;
        let rho = Representation::new(&g.subgroup_table(&h)?, images)?;
        let up = induce(&rho, g, &h)?;
        rows.push((l + 1, up.dim(), induced_character_defect(&rho, &up, g, &h)?));
    }
    let mut w = s.create("induce.csv")?;
    writeln!(w, "factor,dim,character_defect")?;
    for (l, d, c) in &rows {
        writeln!(w, "{l},{d},{c:.16e}")?;
    }
    w.flush()?;
    let worst = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    println!("induced action {}: character defect {:.3e} over {} factors", ind.label(), worst, t.stages);
    s.record("induce", json!({ "subgroup": h, "stages": t.stages }));
    Ok(verdict(worst <= REPORT_TOL))
}

pub fn extend(s: &mut Session) -> Run {
    let t = s.doc.doc.extend.as_ref().ok_or_else(|| missing("extend"))?;
    let (h, a_h) = subgroup_setup(s, t)?;
    let e = extend_finite_index(&a_h, &s.doc.group, &h, t.stages)?;
    write_reports_csv(&e.reports, s.create("extend.csv")?)?;
    let worst = e.reports.iter().map(|r| r.worst()).fold(0.0, f64::max);
    println!(
        "index {}, normal core {:?}, quotient order {}, character defect {:.3e}, worst tower defect {:.3e}",
        e.index, e.core, e.quotient_order, e.character_defect, worst
    );
    s.record("extend", json!({ "subgroup": h, "core": e.core, "stages": t.stages }));
    Ok(verdict(worst <= REPORT_TOL && e.character_defect <= REPORT_TOL))
}

pub fn construct(s: &mut Session) -> Run {
    let t = s.doc.doc.construct.as_ref().ok_or_else(|| missing("construct"))?;
    let theta = t.theta.as_deref().map(parse_real).transpose().map_err(InputError::plain)?;
    match t.mode.as_str() {
        "strongly-outer" => {
            let target = match (&t.target, s.doc.factors()?) {
                (Some(b), _) => build_factors(b).map_err(InputError::plain)?,
                (None, Some(f)) => f,
                (None, None) => return Err(InputError::plain("construct needs a target or a factors block").into()),
            };
            let mut opts = ConstructOptions::default();
            if let Some(th) = theta {
                opts.theta = th;
            }
            let copies = t.copies.unwrap_or(2);
            let c = construct_strongly_outer(&s.doc.group, &target, copies, t.l_max, &opts)?;
            let mut plans = Vec::new();
            for e in &c.elements {
                let stem = format!("construct_{}", file_name(&e.name));
                e.schedule.write_csv(s.create(&format!("{stem}_certificate.csv"))?)?;
                e.witness.write_csv(s.create(&format!("{stem}_witness.csv"))?)?;
                e.bump.plan.write_csv(s.create(&format!("{stem}_plan.csv"))?)?;
                println!(
                    "element {}: towers {}, {}",
                    e.name,
                    if e.schedule.pass() { "PASS" } else { "FAIL" },
                    e.witness.verdict_line()
                );
                plans.push(json!({ "element": e.name, "slice_offset": plans.len(), "source_blocks": e.source.blocks(), "plan": e.bump.plan }));
            }
            println!("output type {} (same type as target: {})", supernatural_of(c.output.factors())?, c.same_type);
            println!("construction: {}", if c.pass() { "PASS" } else { "FAIL" });
            s.record("construct", json!({ "mode": t.mode, "copies": copies, "l_max": t.l_max, "elements": plans }));
            Ok(verdict(c.pass()))
        }
        "universal" => {
            let mut opts = UniversalOptions::default();
            if let Some(th) = theta {
                opts.theta = th;
            }
            let u = rokhlin_action_universal(&s.doc.group, t.l_max, &opts)?;
            write_reports_csv(&u.reports, s.create("construct_reports.csv")?)?;
            for r in &u.reports {
                println!("element {} ({:?}): worst defect {:.3e}", r.name, r.route, r.worst());
            }
            let pass = u.worst_finite() <= REPORT_TOL;
            println!("universal Rokhlin action: {}", if pass { "PASS" } else { "FAIL" });
            s.record("construct", json!({ "mode": t.mode, "l_max": t.l_max, "components": u.components.len() }));
            Ok(verdict(pass))
        }
        other => Err(InputError::plain(format!("unknown construct mode '{other}'")).into()),
    }
}

/// Random words in matrix units and canonical unitaries.
pub fn random_words(rng: &mut ChaCha8Rng, dim: usize, order: usize, count: usize, max_len: usize) -> Vec<Vec<CrossedGenerator>> {
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len.max(1));
            (0..len)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        CrossedGenerator::Unit(rng.gen_range(0..dim), rng.gen_range(0..dim))
                    } else {
                        CrossedGenerator::Group(rng.gen_range(0..order))
                    }
                })
                .collect()
        })
        .collect()
}

pub fn crossed(s: &mut Session) -> Run {
    let t = s.doc.doc.crossed.as_ref().ok_or_else(|| missing("crossed"))?;
    let a = s.doc.action()?;
    let GroupSpec::FiniteTable(g) = a.group() else {
        return Err(InputError::plain("crossed products need a finite table group").into());
    };
    let mut rng = ChaCha8Rng::seed_from_u64(t.seed);
    let mut rows = Vec::new();
    let mut pass = true;
    for m in 0..=t.stage {
        let st = CrossedStage::of_action(&a, m)?;
        let cov = verify_covariance(&st)?;
        let mult = if m < t.stage {
            let f = a.factor(m)?;
            let next: Vec<UnitaryMatrix> =
                (0..g.order()).map(|x| f.image(a.group(), &Element::Index(x))).collect::<Result<_, _>>()?;
            let phi = connecting_map(&st, &next)?;
            let words = random_words(&mut rng, st.dim(), g.order(), t.words, t.word_length);
            Some(phi.multiplicativity_defect(&words)?)
        } else {
            None
        };
        let ok = cov.pass && mult.is_none_or(|d| d <= CROSSED_TOL);
        pass &= ok;
        println!("{cov}{}", mult.map_or(String::new(), |d| format!("; multiplicativity defect {d:.3e}")));
        rows.push((m, st.dim(), cov, mult, ok));
    }
    let mut w = s.create("crossed.csv")?;
    writeln!(w, "stage,dim,covariance_defect,representation_defect,multiplicativity_defect,pass")?;
    for (m, d, cov, mult, ok) in rows {
        let mult = mult.map_or(String::new(), |x| format!("{x:.16e}"));
        writeln!(w, "{m},{d},{:.16e},{:.16e},{mult},{ok}", cov.defect, cov.representation_defect)?;
    }
    w.flush()?;
    s.record("crossed", json!({ "stage": t.stage, "words": t.words, "word_length": t.word_length, "seed": t.seed }));
    Ok(verdict(pass))
}

pub fn simplex(s: &mut Session) -> Run {
    let t = s.doc.doc.simplex.as_ref().ok_or_else(|| missing("simplex"))?;
    let a = s.doc.action()?;
    let GroupSpec::FiniteTable(g) = a.group() else {
        return Err(InputError::plain("trace simplices need a finite table group").into());
    };
    let states = trace_simplex_diameter(&a, t.depth)?;
    write_simplex_csv(&states, g, s.create("simplex.csv")?)?;
    for st in &states {
        println!("depth {}: diameter {:.6e}", st.depth, st.diameter);
    }
    println!("{}", simplex_verdict(&states));
    s.record("simplex", json!({ "depth": t.depth }));
    Ok(Outcome::Pass)
}

pub fn default_out(doc: &Loaded, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| doc.doc.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("uhf-out"))
}
