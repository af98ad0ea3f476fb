use std::path::{Path, PathBuf};

use gwsplit::blowup::{blowup_ring, Blowup, CertMode, Certificate};
use gwsplit::doc::{
    dump_algebra, dump_table, from_json, matrix_doc, read_text, AlgebraSource, BlowupDoc, FluxDoc, GwTableDoc,
    ProblemDoc, ResolvedAlgebra, WangSpaceDoc,
};
use gwsplit::flux::{rank_bound, FluxStatus};
use gwsplit::gw::{blanchard_check, csplit_check, ConstraintSystem, CsplitReport, PipelineConfig, RowSource, Verdict};
use gwsplit::scalar::format_scalar;
use gwsplit::wang::{solve_wang_space, LeibnizSign, WangMap};
use gwsplit::{CohomologyClass, Error, GradedAlgebra, Result};
use serde_json::{json, Value};

use crate::report::{Outcome, NEGATIVE, OK};

pub struct Ctx {
    pub verbose: bool,
    pub config: PipelineConfig,
}

const COMPLETION_NOTE: &str = "the blow-up ring uses the standard multiplicative completion of the additive \
     decomposition H*(M) + H*(V)[u]/u^k";

fn other(c: LeibnizSign) -> LeibnizSign {
    match c {
        LeibnizSign::Koszul => LeibnizSign::Flipped,
        LeibnizSign::Flipped => LeibnizSign::Koszul,
    }
}

fn base_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn read_doc<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T> {
    from_json(&read_text(path)?)
}

fn load_algebra_file(path: &Path) -> Result<ResolvedAlgebra> {
    let mut r = read_doc::<AlgebraSource>(path)?.resolve_in(&base_of(path))?;
    r.files.insert(0, path.to_path_buf());
    Ok(r)
}

fn flag_completion(o: &mut Outcome, on: bool) {
    o.metadata.insert("multiplicative_completion".into(), Value::Bool(on));
    if on {
        o.assumptions.push(COMPLETION_NOTE.into());
    }
}

fn id_hex(alg: &GradedAlgebra) -> String {
    format!("{:016x}", alg.id())
}

fn algebra_summary(alg: &GradedAlgebra) -> Value {
    json!({
        "id": id_hex(alg),
        "formal_dimension": alg.top(),
        "dimension": alg.dim(),
        "betti": alg.betti(),
    })
}

pub fn validate(_ctx: &Ctx, path: &Path) -> Result<Outcome> {
    let r = load_algebra_file(path)?;
    let alg = &r.algebra;
    let mut o = Outcome::new(OK, "valid");
    let ps = alg.is_poincare_algebra();
    o.result = json!({ "algebra": algebra_summary(alg), "poincare": ps.ok });
    o.line(format!("valid: formal dimension {}, total dimension {}", alg.top(), alg.dim()));
    o.line(format!("betti: {:?}", alg.betti()));
    o.files = r.files;
    flag_completion(&mut o, r.multiplicative_completion);
    Ok(o)
}

pub fn wang(ctx: &Ctx, path: &Path, ms: &[usize]) -> Result<Outcome> {
    let r = load_algebra_file(path)?;
    let alg = &r.algebra;
    let conv = ctx.config.convention;
    let mut ms: Vec<usize> = if ms.is_empty() { (2..=alg.top() + 1).collect() } else { ms.to_vec() };
    ms.sort();
    ms.dedup();
    if let Some(&m) = ms.iter().find(|&&m| m < 2) {
        return Err(Error::Degree(format!("base dimension {m} is below 2")));
    }
    let mut o = Outcome::new(OK, "solved");
    let mut spaces = Vec::new();
    o.line(format!("{:>4}  {:>9}  {:>9}", "m", "unknowns", "dimension"));
    for &m in &ms {
        let w = solve_wang_space(alg, m, conv)?;
        let alt = solve_wang_space(alg, m, other(conv))?;
        let mut entry = json!({
            "base_dimension": m,
            "unknowns": WangMap::unknown_count(alg, m),
            "dimension": w.dim(),
            "space": WangSpaceDoc::from_space(&w),
        });
        let mut line = format!("{m:>4}  {:>9}  {:>9}", WangMap::unknown_count(alg, m), w.dim());
        if alt.dim() != w.dim() {
            entry["other_convention"] = json!({ "leibniz_sign": other(conv).name(), "dimension": alt.dim() });
            line.push_str(&format!("  ({}: {})", other(conv).name(), alt.dim()));
        }
        if m > alg.top() + 1 {
            let note = format!("m = {m} exceeds 2n+1 = {}; every block has negative target degree", alg.top() + 1);
            entry["note"] = json!(note);
            o.diagnostics.push(note);
        }
        o.line(line);
        spaces.push(entry);
    }
    o.result = json!({ "algebra": algebra_summary(alg), "spaces": spaces });
    o.files = r.files;
    flag_completion(&mut o, r.multiplicative_completion);
    Ok(o)
}

fn describe_source(alg: &GradedAlgebra, sys: &ConstraintSystem, tables: &[String], s: &RowSource) -> String {
    let pool = |t: &[usize]| t.iter().map(|&i| alg.format_class(&sys.pool[i])).collect::<Vec<_>>().join(", ");
    let names = |t: &[usize]| t.iter().map(|&i| alg.name(i).to_string()).collect::<Vec<_>>().join(", ");
    match s {
        RowSource::Survivor { index } => format!("survivor {index} lies in ker d"),
        RowSource::Hamiltonian { power } => format!("d(omega^{power}) = 0"),
        RowSource::CupTable { alpha, beta } => {
            format!("cup table at d({}) against kernel pair {:?}", alg.name(*alpha), beta)
        }
        RowSource::Exact { table, tuple } => format!("table {}: residual at ({})", tables[*table], pool(tuple)),
        RowSource::Certificate { table, tuple, entry } => {
            format!("table {}: residual at ({}) through certificate ({})", tables[*table], pool(tuple), names(entry))
        }
    }
}

fn systems_json(ctx: &Ctx, alg: &GradedAlgebra, rep: &CsplitReport, tables: &[String]) -> Vec<Value> {
    rep.systems
        .iter()
        .map(|sys| {
            let mut v = json!({
                "base_dimension": sys.m,
                "dimension_before": sys.wang.dim(),
                "dimension_after": sys.constrained.dim(),
                "rows": sys.rows.len(),
                "diagnostics": sys.diagnostics,
            });
            if ctx.verbose {
                v["row_sources"] =
                    json!(sys.rows.iter().map(|r| describe_source(alg, sys, tables, &r.source)).collect::<Vec<_>>());
                v["constrained_space"] = json!(WangSpaceDoc::from_space(&sys.constrained));
            }
            v
        })
        .collect()
}

fn dims(rep: &CsplitReport) -> Vec<(usize, usize, usize)> {
    rep.systems.iter().map(|s| (s.m, s.wang.dim(), s.constrained.dim())).collect()
}

fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::Obstructed { m, witness } => {
            json!({ "name": v.name(), "base_dimension": m, "witness": gwsplit::doc::WangDoc::from_map(witness) })
        }
        _ => json!({ "name": v.name() }),
    }
}

fn report_lines(o: &mut Outcome, ctx: &Ctx, alg: &GradedAlgebra, rep: &CsplitReport, tables: &[String]) {
    o.line(format!("{:>4}  {:>6}  {:>5}  {:>5}", "m", "before", "after", "rows"));
    for sys in &rep.systems {
        o.line(format!("{:>4}  {:>6}  {:>5}  {:>5}", sys.m, sys.wang.dim(), sys.constrained.dim(), sys.rows.len()));
        if ctx.verbose {
            for r in &sys.rows {
                o.line(format!("        {}", describe_source(alg, sys, tables, &r.source)));
            }
        }
    }
    o.line(format!("verdict: {}", rep.verdict.name()));
    for sys in &rep.systems {
        o.diagnostics.extend(sys.diagnostics.iter().map(|d| format!("m = {}: {d}", sys.m)));
    }
}

pub fn csplit(ctx: &Ctx, path: &Path, blanchard: bool) -> Result<Outcome> {
    let doc: ProblemDoc = read_doc(path)?;
    let loaded = doc.load(&base_of(path))?;
    let (alg, spec) = (&loaded.algebra, &loaded.value);
    let mut files = vec![path.to_path_buf()];
    files.extend(loaded.files.iter().cloned());
    let tables: Vec<String> = spec.tables.iter().map(|t| t.class_label.clone()).collect();

    let mut o = Outcome::new(OK, "");
    if blanchard {
        let b = blanchard_check(alg, &spec.omega, &ctx.config)?;
        o.result = json!({ "mode": "blanchard", "hard_lefschetz": b.hard_lefschetz });
        match &b.report {
            None => {
                o.code = NEGATIVE;
                o.status = "NotHardLefschetz".into();
                o.line("omega does not satisfy the hard Lefschetz condition".to_string());
            }
            Some(rep) => {
                let names = vec!["cup".to_string()];
                o.result["systems"] = json!(systems_json(ctx, alg, rep, &names));
                o.result["verdict"] = verdict_json(&rep.verdict);
                o.status = rep.verdict.name().into();
                o.code = if rep.verdict == Verdict::CSplit { OK } else { NEGATIVE };
                o.line("omega satisfies the hard Lefschetz condition".to_string());
                report_lines(&mut o, ctx, alg, rep, &names);
            }
        }
        o.assumptions.push("the fibration is Hamiltonian: d(omega^j) = 0".into());
    } else {
        let rep = csplit_check(alg, spec, &ctx.config)?;
        let mut alt_cfg = ctx.config;
        alt_cfg.convention = other(ctx.config.convention);
        let alt = csplit_check(alg, spec, &alt_cfg)?;
        o.result = json!({
            "mode": "pipeline",
            "systems": systems_json(ctx, alg, &rep, &tables),
            "verdict": verdict_json(&rep.verdict),
            "unexamined_base_dimensions": rep.unexamined,
        });
        if dims(&alt) != dims(&rep) || alt.verdict.name() != rep.verdict.name() {
            o.result["other_convention"] = json!({
                "leibniz_sign": alt_cfg.convention.name(),
                "dimensions_after": alt.systems.iter().map(|s| json!([s.m, s.constrained.dim()])).collect::<Vec<_>>(),
                "verdict": alt.verdict.name(),
            });
            o.line(format!("{} convention gives a different result: {}", alt_cfg.convention.name(), alt.verdict.name()));
        }
        o.status = rep.verdict.name().into();
        o.code = if rep.verdict == Verdict::CSplit { OK } else { NEGATIVE };
        report_lines(&mut o, ctx, alg, &rep, &tables);
        if !rep.unexamined.is_empty() {
            o.assumptions.push(format!(
                "base dimensions {:?} are not examined; the verdict covers only {:?}",
                rep.unexamined,
                spec.effective_base_dimensions(alg)
            ));
        }
        if spec.hamiltonian {
            o.assumptions.push("the fibration is Hamiltonian: d(omega^j) = 0".into());
        }
        for (i, s) in spec.survivors.iter().enumerate() {
            o.assumptions.push(format!("survivor {i} = {} lies in ker d (asserted)", alg.format_class(s)));
        }
        for t in &spec.tables {
            o.assumptions.push(format!(
                "table {} (genus {}, arity {}): flux_free = {}, image_nonzero = {} (trusted); unlisted entries are zero",
                t.class_label, t.genus, t.arity, t.flux_free, t.image_nonzero
            ));
        }
        if !spec.realized.is_empty() {
            o.assumptions.push(format!("{} realized Wang map(s) come from actual fibrations (asserted)", spec.realized.len()));
        }
    }
    o.result["algebra"] = algebra_summary(alg);
    o.files = files;
    flag_completion(&mut o, loaded.multiplicative_completion);
    Ok(o)
}

pub fn flux(_ctx: &Ctx, path: &Path) -> Result<Outcome> {
    let doc: FluxDoc = read_doc(path)?;
    let loaded = doc.load(&base_of(path))?;
    let (alg, p) = (&loaded.algebra, &loaded.value);
    let b = rank_bound(alg, p)?;
    let (code, status, why) = match &b.status {
        FluxStatus::Feasible => (OK, "Feasible", None),
        FluxStatus::InfeasibleInputs(s) => (NEGATIVE, "InfeasibleInputs", Some(s.clone())),
    };
    let mut o = Outcome::new(code, status);
    o.result = json!({
        "algebra": algebra_summary(alg),
        "lower": b.lower,
        "upper": b.upper,
        "subspace_dimension": b.subspace.dim(),
        "per_class": b.per_class,
        "omega_kernel_dimension": b.omega_kernel_dim,
        "lefschetz_shortcut": b.lefschetz_shortcut,
        "infeasibility": why,
    });
    o.line(format!("rank of the flux group: lower {} upper {}", b.lower, b.upper));
    o.line(format!("status: {status}"));
    if let Some(w) = why {
        o.line(w);
    }
    o.diagnostics = b.diagnostics;
    o.assumptions = b.assumptions;
    o.files = vec![path.to_path_buf()];
    o.files.extend(loaded.files.iter().cloned());
    flag_completion(&mut o, loaded.multiplicative_completion);
    Ok(o)
}

fn load_blowup(path: &Path) -> Result<(Blowup, Vec<PathBuf>)> {
    let doc: BlowupDoc = read_doc(path)?;
    let (inp, files) = doc.load(&base_of(path))?;
    let mut all = vec![path.to_path_buf()];
    all.extend(files);
    Ok((blowup_ring(&inp)?, all))
}

fn mode_of(relaxed: bool) -> CertMode {
    if relaxed {
        CertMode::Relaxed
    } else {
        CertMode::Strict
    }
}

fn mode_assumptions(o: &mut Outcome, mode: CertMode) {
    o.assumptions.push("the exceptional line class A is represented by a fiber of P(N) -> V".into());
    match mode {
        CertMode::Strict => o.assumptions.push(
            "strict mode: a pair is certified when the fiber count is exactly 1 (theorem statement); the proof \
             only needs an odd count"
                .into(),
        ),
        CertMode::Relaxed => o
            .assumptions
            .push("relaxed mode: any odd fiber count is accepted, extrapolating from the proof".into()),
    }
}

pub fn blowup(_ctx: &Ctx, path: &Path, emit: bool, out: Option<&Path>, relaxed: bool) -> Result<Outcome> {
    let (b, files) = load_blowup(path)?;
    let r = &b.ring;
    let (f, pi, j) = b.maps()?;
    let mut o = Outcome::new(OK, "built");
    let pv_a = b.intersection_with_exceptional(&gwsplit::scalar::one())?;
    o.result = json!({
        "algebra": algebra_summary(r),
        "basis": r.basis().iter().map(|e| json!([e.name, e.degree])).collect::<Vec<_>>(),
        "codim": b.input.codim,
        "exceptional_intersection": format_scalar(&pv_a),
        "line_degree_sum": b.line_degree_sum(),
        "maps": { "f_star": matrix_doc(&f), "pi_push": matrix_doc(&pi), "thom_push": matrix_doc(&j) },
    });
    o.line(format!("blow-up ring: formal dimension {}, total dimension {}", r.top(), r.dim()));
    o.line(format!("betti: {:?}", r.betti()));
    o.line(format!("[P_V].A = {}", format_scalar(&pv_a)));
    let mut written = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(Error::Io)?;
        let p = dir.join("ring.json");
        std::fs::write(&p, dump_algebra(r)).map_err(Error::Io)?;
        written.push(p);
    }
    if emit {
        let mode = mode_of(relaxed);
        let pairs = b.certified_basis_pairs(mode)?;
        let ij: Vec<(usize, usize)> = pairs.iter().map(|&(i, j, _)| (i, j)).collect();
        let table = b.line_table(&ij, mode)?;
        o.result["certificates"] = json!(pairs
            .iter()
            .map(|(i, j, v)| json!({ "args": [r.name(*i), r.name(*j)], "value": format_scalar(v) }))
            .collect::<Vec<_>>());
        o.result["line_table"] = json!(GwTableDoc::from_table(r, &table));
        o.line(format!("certified basis pairs: {}", pairs.len()));
        if let Some(dir) = out {
            let p = dir.join("table_A.json");
            std::fs::write(&p, dump_table(r, &table)).map_err(Error::Io)?;
            written.push(p);
        }
        mode_assumptions(&mut o, mode);
    }
    if out.is_some() {
        o.result["written"] = json!(written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
    }
    o.files = files;
    flag_completion(&mut o, true);
    Ok(o)
}

fn cert_json(v: &GradedAlgebra, c: &Certificate) -> Value {
    json!({
        "value": format_scalar(&c.value),
        "certified": c.certified,
        "v_alpha": v.format_class(&c.v_alpha),
        "v_beta": v.format_class(&c.v_beta),
    })
}

pub fn certify(
    _ctx: &Ctx,
    path: &Path,
    pair: Option<(&str, &str)>,
    family: bool,
    relaxed: bool,
) -> Result<Outcome> {
    let (b, files) = load_blowup(path)?;
    let (r, v) = (&b.ring, &b.input.v_algebra);
    let mode = mode_of(relaxed);
    let mut checks: Vec<(CohomologyClass, CohomologyClass)> = Vec::new();
    if let Some((a, c)) = pair {
        checks.push((r.parse_class(a)?, r.parse_class(c)?));
    }
    if family {
        checks.extend(b.a4_family()?);
    }
    if checks.is_empty() {
        return Err(Error::Schema("certify needs --alpha and --beta, or --family".into()));
    }
    let mut results = Vec::new();
    let mut all = true;
    for (a, c) in &checks {
        let cert = b.gw_certificate(a, c, mode)?;
        all &= cert.certified;
        let mut j = cert_json(v, &cert);
        j["alpha"] = json!(r.format_class(a));
        j["beta"] = json!(r.format_class(c));
        results.push(j);
        let tag = if cert.certified { "certified" } else { "not certified" };
        results.last_mut().unwrap()["summary"] = json!(format!(
            "({}, {}): value {} -> {tag}",
            r.format_class(a),
            r.format_class(c),
            format_scalar(&cert.value)
        ));
    }
    let status = if all { "Certified" } else { "NotCertified" };
    let mut o = Outcome::new(if all { OK } else { NEGATIVE }, status);
    for j in &results {
        o.line(j["summary"].as_str().unwrap_or_default().to_string());
    }
    o.line(format!("status: {status}"));
    o.result = json!({
        "mode": match mode { CertMode::Strict => "strict", CertMode::Relaxed => "relaxed" },
        "line_degree_sum": b.line_degree_sum(),
        "checks": results,
    });
    mode_assumptions(&mut o, mode);
    o.files = files;
    flag_completion(&mut o, true);
    Ok(o)
}
