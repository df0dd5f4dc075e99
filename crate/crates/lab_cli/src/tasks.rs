//! Named tasks. Each writes its artifacts, then fails with an invariant error
//! when one of its asserted checks does not hold.

use dd_coupler::{
    distance_audit, integrability_sum, uniform_bound, DDCoupling, DistanceAudit, IntegrabilitySum,
    SampleMode,
};
use delta_core::{generators, DeltaParams, Generator};
use folner_atlas::{growth_rows, FolnerAtlas, DEFAULT_BUDGET};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use profile_forge::{build_sequences, hypothesis_report};
use serde::{Deserialize, Serialize};
use serde_json::json;
use z_coupler::{
    carry_histogram, cursor_majorant_rows, exhaustive_sweep, gap_sum_rows, majorant_report,
    sampled_sweep, Integrand, ZEncoder,
};

use crate::config::LabConfig;
use crate::criteria;
use crate::oracle::{record_provenance, run_oracle, OracleRequest};
use crate::output::OutDir;
use crate::report::CouplingAudit;
use crate::svg::{line_plot, Series};
use crate::{LabError, Result};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    /// Profile sequences and hypothesis verdicts for both sides.
    Profile,
    /// Marked-group invariants for `s3`, `a5`, `z2xz3` or a table file.
    Group {
        group: String,
    },
    /// Følner cardinalities, enumeration checks and growth rows up to `n_max`.
    Folner {
        n_max: u64,
    },
    ZcouplingVerify {
        n: usize,
    },
    ZcouplingSums,
    DdcouplingVerify {
        n: usize,
    },
    /// `generator` is a generator name such as `t+`, `a1`, `b1`.
    DdcouplingAudit {
        n: usize,
        generator: String,
    },
    DdcouplingSums,
    Oracle {
        request: OracleRequest,
    },
    Criterion {
        id: u8,
    },
}

impl Task {
    pub fn label(&self) -> String {
        match self {
            Task::Profile => "profile".into(),
            Task::Group { group } => format!("group {group}"),
            Task::Folner { n_max } => format!("folner n_max={n_max}"),
            Task::ZcouplingVerify { n } => format!("zcoupling verify n={n}"),
            Task::ZcouplingSums => "zcoupling sums".into(),
            Task::DdcouplingVerify { n } => format!("ddcoupling verify n={n}"),
            Task::DdcouplingAudit { n, generator } => {
                format!("ddcoupling audit n={n} gen={generator}")
            }
            Task::DdcouplingSums => "ddcoupling sums".into(),
            Task::Oracle { request } => format!("oracle {}", request.name()),
            Task::Criterion { id } => format!("criterion {id}"),
        }
    }
}

/// One-line outcome printed by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct TaskOutcome {
    pub task: String,
    pub message: String,
}

pub fn execute(cfg: &LabConfig, task: &Task, out: &mut OutDir) -> Result<TaskOutcome> {
    let message = match task {
        Task::Profile => profile(cfg, out)?,
        Task::Group { group } => group_check(cfg, group, out)?,
        Task::Folner { n_max } => folner(cfg, *n_max, out)?,
        Task::ZcouplingVerify { n } => z_verify(cfg, *n, out)?,
        Task::ZcouplingSums => z_sums(cfg, out)?,
        Task::DdcouplingVerify { n } => dd_verify(cfg, *n, out)?,
        Task::DdcouplingAudit { n, generator } => dd_audit(cfg, *n, generator, out)?,
        Task::DdcouplingSums => dd_sums(cfg, out)?,
        Task::Oracle { request } => {
            let rec = run_oracle(request, cfg)?;
            record_provenance(out, &rec)?;
            format!("{} = {}", rec.name, rec.value)
        }
        Task::Criterion { id } => {
            let r =
                criteria::run(*id).ok_or_else(|| LabError::Config(format!("no criterion {id}")))?;
            out.write_json(&format!("criterion_{id}.json"), &r)?;
            if !r.passed {
                return Err(LabError::invariant(&task.label(), &r.title, r.summary));
            }
            r.line()
        }
    };
    Ok(TaskOutcome {
        task: task.label(),
        message,
    })
}

fn fail(task: &str, check: &str, detail: impl Into<String>) -> LabError {
    LabError::invariant(task, check, detail)
}

#[derive(Serialize)]
struct SeqRow {
    side: &'static str,
    m: usize,
    k: String,
    l: String,
}

fn profile(cfg: &LabConfig, out: &mut OutDir) -> Result<String> {
    let delta = cfg.delta()?;
    let src = build_sequences(&cfg.source.profile, cfg.kappa, cfg.lambda, cfg.m_max)?;
    let tgt = build_sequences(&cfg.target.profile, cfg.kappa, cfg.lambda, cfg.m_max)?;
    let report = hypothesis_report(&cfg.source.profile, &src, cfg.r_max, Some((&tgt, &delta)));
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (side, seq) in [("source", &src), ("target", &tgt)] {
        let mut pts = Vec::new();
        for (m, (k, l)) in seq.k.iter().zip(&seq.l).enumerate() {
            rows.push(SeqRow {
                side,
                m,
                k: k.to_string(),
                l: l.to_string(),
            });
            if let (Some(k), Some(l)) = (k.to_f64(), l.to_f64()) {
                pts.push((k * l, l));
            }
        }
        series.push(Series {
            label: format!("{side}: f at k_m l_m"),
            points: pts,
        });
    }
    out.write_csv("profile_sequences.csv", &rows)?;
    out.write_json(
        "profile.json",
        &json!({
            "kappa": cfg.kappa,
            "lambda": cfg.lambda,
            "delta": cfg.delta,
            "source_profile": cfg.source.profile,
            "target_profile": cfg.target.profile,
            "source_open_ended": src.open_ended,
            "target_open_ended": tgt.open_ended,
            "report": report,
        }),
    )?;
    out.write_text(
        "profile.svg",
        &line_plot("profile breakpoints", "x", "f(x)", &series, true),
    )?;
    // Round trip of the bijective companion at its breakpoints.
    let bij = tgt.rho_bij(&delta)?;
    for (x, y) in bij.points() {
        if bij.inverse(y).ok().as_ref() != Some(x) {
            return Err(fail(
                "profile",
                "bijective round trip",
                format!("breakpoint {x}"),
            ));
        }
    }
    Ok(format!(
        "cursor series summable: {}, lamp series summable: {}",
        report.cursor_series.summable, report.lamp_series.summable
    ))
}

fn group_check(cfg: &LabConfig, name: &str, out: &mut OutDir) -> Result<String> {
    let g = match name {
        "z2xz3" => group_kernel::MarkedGamma::abelian_base(2, 3)
            .map_err(|e| LabError::Config(e.to_string()))?,
        "s3" | "a5" => cfg.group(&crate::config::GroupSpec::Named(name.into()))?,
        path => cfg.group(&crate::config::GroupSpec::Table { table: path.into() })?,
    };
    let gr = g.gamma();
    let order = gr.order();
    let mut gens = g.a_images().to_vec();
    gens.extend_from_slice(g.b_images());
    let bfs = crate::oracle::bfs_diameter(gr, &gens);
    let mut kernel = Vec::new();
    let mut hom = true;
    for x in 0..order as group_kernel::Elem {
        if g.theta(x) == g.ab().identity() {
            kernel.push(x);
        }
        for y in 0..order as group_kernel::Elem {
            hom &= g.theta(gr.mul(x, y)) == g.ab().mul(g.theta(x), g.theta(y));
        }
    }
    let summary = json!({
        "order": order,
        "gamma_prime_order": g.gamma_prime_order(),
        "q": g.q(),
        "diameter": g.diameter(),
        "bfs_diameter": bfs,
        "theta_homomorphism": hom,
        "kernel_is_derived": kernel == g.gamma_prime(),
        "derived_is_normal": gr.is_normal(g.gamma_prime()),
    });
    out.write_json("group.json", &summary)?;
    if g.diameter() != bfs {
        return Err(fail(
            "group",
            "diameter",
            format!("{} vs BFS {bfs}", g.diameter()),
        ));
    }
    if !hom || kernel != g.gamma_prime() || !gr.is_normal(g.gamma_prime()) {
        return Err(fail(
            "group",
            "quotient",
            "θ is not a homomorphism with kernel Γ'",
        ));
    }
    Ok(format!(
        "|Γ| = {order}, |Γ'| = {}, diameter {}",
        g.gamma_prime_order(),
        g.diameter()
    ))
}

fn folner(cfg: &LabConfig, n_max: u64, out: &mut OutDir) -> Result<String> {
    let atlas = FolnerAtlas::new(cfg.source_params()?)?;
    let rows = growth_rows(&atlas, n_max, cfg.budgets.samples, cfg.seed)?;
    out.write_csv("folner.csv", &rows)?;
    let mut checked = 0;
    for idx in atlas.indices(n_max)? {
        let set = atlas.set(idx)?;
        let Some(size) = set
            .size_u64()
            .filter(|&s| s <= cfg.budgets.enumeration.min(DEFAULT_BUDGET))
        else {
            continue;
        };
        let listed = set
            .enumerate(size)?
            .filter(|x| atlas.contains(idx, x))
            .count() as u64;
        if listed != size {
            return Err(fail(
                "folner",
                "cardinality",
                format!("{idx:?}: {listed} listed, {size} expected"),
            ));
        }
        if idx.n >= 2 {
            let b = set.boundary(size)?;
            if !b.law_holds || b.boundary * idx.n != b.size * 2 {
                return Err(fail("folner", "boundary", format!("{idx:?}: {b:?}")));
            }
        }
        checked += 1;
    }
    let series = [Series {
        label: "ln |F|".into(),
        points: rows.iter().map(|r| (r.n as f64, r.ln_size)).collect(),
    }];
    out.write_text(
        "folner.svg",
        &line_plot("Følner growth", "n", "ln |F|", &series, false),
    )?;
    Ok(format!("{} indices, {checked} enumerated", rows.len()))
}

fn z_encoder(cfg: &LabConfig, n: usize) -> Result<(DeltaParams, ZEncoder)> {
    let p = cfg.source_params()?;
    let enc = ZEncoder::new(&p, n)?;
    Ok((p, enc))
}

fn z_verify(cfg: &LabConfig, n: usize, out: &mut OutDir) -> Result<String> {
    let (p, enc) = z_encoder(cfg, n)?;
    let exhaustive = enc
        .size_u128()
        .is_some_and(|s| s <= cfg.budgets.enumeration as u128);
    let rep = if exhaustive {
        exhaustive_sweep(&enc, cfg.budgets.enumeration as u128, 1)?
    } else {
        sampled_sweep(&enc, cfg.budgets.samples, cfg.seed)?
    };
    let total = BigUint::from(rep.elements);
    let audits: Vec<CouplingAudit> = rep
        .stats
        .iter()
        .map(|st| {
            let sums = gap_sum_rows(
                &st.histogram,
                &total,
                &Integrand::Constant { value: 1.0 },
                None,
            );
            CouplingAudit::from_gap_stats(st, rep.elements, p.q() as u64, &sums)
        })
        .collect();
    for a in &audits {
        out.write_csv(
            &format!("zcoupling_gaps_n{n}_{}.csv", file_safe(&a.generator)),
            &a.rows,
        )?;
    }
    out.write_json(
        &format!("zcoupling_verify_n{n}.json"),
        &json!({ "seed": cfg.seed, "report": rep, "audits": audits }),
    )?;
    if rep.collisions > 0 || rep.round_trip_failures > 0 || (exhaustive && !rep.surjective) {
        return Err(fail(
            "zcoupling verify",
            "bijectivity",
            format!(
                "collisions {}, round-trip failures {}, surjective {}",
                rep.collisions, rep.round_trip_failures, rep.surjective
            ),
        ));
    }
    if rep.violations(false) > 0 {
        return Err(fail(
            "zcoupling verify",
            "cursor gap",
            format!("{} violations", rep.violations(false)),
        ));
    }
    if p.levels().is_empty() && rep.violations(true) > 0 {
        return Err(fail(
            "zcoupling verify",
            "lamp gap",
            format!("{} violations", rep.violations(true)),
        ));
    }
    Ok(format!(
        "{} {} elements of {}: bijective, max lamp gap {}, lamp gap violations {}",
        if exhaustive { "exhaustive" } else { "sampled" },
        rep.elements,
        rep.size,
        rep.lamp_max_gap(),
        rep.violations(true)
    ))
}

#[derive(Serialize)]
struct ZSumRow {
    n: usize,
    term: f64,
    partial_sum: f64,
    per_n_majorant: f64,
    uniform_bound: Option<f64>,
}

fn z_sums(cfg: &LabConfig, out: &mut OutDir) -> Result<String> {
    let p = cfg.source_params()?;
    let rho = &cfg.source.profile;
    let rep = majorant_report(rho, cfg.kappa, p.q() as u64, cfg.n.max, cfg.r_max);
    let mut rows = Vec::new();
    for n in 1..=cfg.n.max {
        let enc = ZEncoder::new(&p, n)?;
        let per_n = cursor_majorant_rows(
            &enc,
            &carry_histogram(&enc),
            &Integrand::RhoLog { rho: rho.clone() },
        );
        rows.push(ZSumRow {
            n,
            term: rep.terms[n - 1],
            partial_sum: rep.partial_sums[n - 1],
            per_n_majorant: per_n.last().map_or(0.0, |r| r.partial_sum),
            uniform_bound: rep.uniform_bound,
        });
    }
    out.write_csv("zcoupling_sums.csv", &rows)?;
    out.write_json(
        "zcoupling_sums.json",
        &json!({ "report": rep, "rows": rows }),
    )?;
    let mut series = vec![Series {
        label: "partial sum".into(),
        points: rows.iter().map(|r| (r.n as f64, r.partial_sum)).collect(),
    }];
    if let Some(b) = rep.uniform_bound {
        series.push(Series {
            label: "uniform bound".into(),
            points: rows.iter().map(|r| (r.n as f64, b)).collect(),
        });
    }
    out.write_text(
        "zcoupling_sums.svg",
        &line_plot("cursor majorant sums", "n", "sum", &series, false),
    )?;
    if rep.partial_sums.windows(2).any(|w| w[0] > w[1]) {
        return Err(fail("zcoupling sums", "monotone", "partial sums decrease"));
    }
    if let Some(b) = rep.uniform_bound {
        if rep.partial_sums.iter().any(|&s| s > b) {
            return Err(fail(
                "zcoupling sums",
                "uniform bound",
                format!("a partial sum exceeds {b}"),
            ));
        }
    }
    Ok(match rep.uniform_bound {
        Some(b) => format!("summable, sums <= {b:.4}"),
        None => "not summable: no uniform bound claimed".into(),
    })
}

fn dd_coupling(cfg: &LabConfig, n: usize) -> Result<DDCoupling> {
    let p = cfg.dd_params()?;
    Ok(DDCoupling::new(&p, n)?)
}

fn dd_verify(cfg: &LabConfig, n: usize, out: &mut OutDir) -> Result<String> {
    let c = dd_coupling(cfg, n)?;
    let inj = c.verify_exhaustive(cfg.budgets.enumeration)?;
    let density = c.density(cfg.budgets.enumeration)?;
    out.write_json(
        &format!("ddcoupling_verify_n{n}.json"),
        &json!({
            "index": c.index(),
            "spreading": c.spreading(),
            "carving": c.carving(),
            "thresholds": c.thresholds(),
            "injection": inj,
            "density": density,
            "hypotheses": c.params().hypotheses(),
        }),
    )?;
    if !(inj.triple_bijective && inj.injective && inj.image_in_h) {
        return Err(fail(
            "ddcoupling verify",
            "injection",
            format!(
                "triple bijective {}, injective {}, image in H {}",
                inj.triple_bijective, inj.injective, inj.image_in_h
            ),
        ));
    }
    Ok(format!(
        "{} elements injected; density radius {:?} (bound {}, within: {})",
        inj.size, density.radius, density.bound, density.within_bound
    ))
}

pub fn parse_generator(p: &DeltaParams, name: &str) -> Result<Generator> {
    generators(p)
        .into_iter()
        .find(|g| g.to_string() == name)
        .ok_or_else(|| {
            let names: Vec<String> = generators(p).iter().map(|g| g.to_string()).collect();
            LabError::Config(format!(
                "unknown generator {name:?}; choose from {}",
                names.join(", ")
            ))
        })
}

fn audit_mode(cfg: &LabConfig, c: &DDCoupling) -> SampleMode {
    let per_cursor = c.encoder().size() / BigUint::from(c.index().width);
    match per_cursor.to_u64() {
        Some(s) if s <= cfg.budgets.enumeration => SampleMode::Exhaustive {
            budget: cfg.budgets.enumeration,
        },
        _ => SampleMode::Sampled {
            samples: cfg.budgets.samples,
            seed: cfg.seed,
        },
    }
}

#[derive(Serialize)]
struct AuditCsvRow {
    m: usize,
    observed: u64,
    count: f64,
    shape_majorant: f64,
    fitted_constant: f64,
    explicit_ratio: f64,
    partial_sum: f64,
}

fn write_audit(out: &mut OutDir, a: &DistanceAudit, s: &IntegrabilitySum) -> Result<CouplingAudit> {
    let rows: Vec<AuditCsvRow> = a
        .rows
        .iter()
        .map(|r| AuditCsvRow {
            m: r.m,
            observed: r.observed,
            count: r.count,
            shape_majorant: r.shape_majorant,
            fitted_constant: r.fitted_constant,
            explicit_ratio: r.explicit_ratio,
            partial_sum: r.partial_sum,
        })
        .collect();
    let stem = format!("ddcoupling_audit_n{}_{}", a.n, file_safe(&a.generator));
    out.write_csv(&format!("{stem}.csv"), &rows)?;
    let table = CouplingAudit::from_distance_audit(a, s);
    out.write_json(
        &format!("{stem}.json"),
        &json!({ "audit": a, "sum": s, "table": table }),
    )?;
    Ok(table)
}

fn dd_audit(cfg: &LabConfig, n: usize, generator: &str, out: &mut OutDir) -> Result<String> {
    let c = dd_coupling(cfg, n)?;
    let s = parse_generator(c.params().source().params(), generator)?;
    let a = distance_audit(&c, s, audit_mode(cfg, &c))?;
    let sum = integrability_sum(&c, &a);
    write_audit(out, &a, &sum)?;
    if a.violations > 0 || a.locality_failures > 0 || a.exact_above_certified > 0 {
        return Err(fail(
            "ddcoupling audit",
            "distance shape",
            format!(
                "{} of {} outside the shape ({} with an (E, P) change), {} locality failures",
                a.violations, a.checked, a.violations_with_ep_change, a.locality_failures
            ),
        ));
    }
    Ok(format!(
        "{} elements within the shape, sum {:.4} (low {:.4}, middle {:.4}, high {:.4})",
        a.checked, sum.total, sum.low, sum.middle, sum.high
    ))
}

#[derive(Serialize)]
struct SumCsvRow {
    n: usize,
    generator: String,
    low: f64,
    middle: f64,
    high: f64,
    total: f64,
    total_phi_one: f64,
}

fn dd_sums(cfg: &LabConfig, out: &mut OutDir) -> Result<String> {
    let p = cfg.dd_params()?;
    let couplings: Vec<DDCoupling> = (cfg.n.min..=cfg.n.max)
        .map(|n| DDCoupling::new(&p, n))
        .collect::<std::result::Result<_, _>>()?;
    let gens = generators(p.source().params());
    let mut runs = Vec::new();
    for c in &couplings {
        for &s in &gens {
            let a = distance_audit(c, s, audit_mode(cfg, c))?;
            let sum = integrability_sum(c, &a);
            runs.push((c, a, sum));
        }
    }
    let rows: Vec<SumCsvRow> = runs
        .iter()
        .map(|(_, _, s)| SumCsvRow {
            n: s.n,
            generator: s.generator.clone(),
            low: s.low,
            middle: s.middle,
            high: s.high,
            total: s.total,
            total_phi_one: s.total_phi_one,
        })
        .collect();
    let refs: Vec<_> = runs.iter().map(|(c, a, s)| (*c, a, s)).collect();
    let lamp = uniform_bound(&refs, true);
    let cursor = uniform_bound(&refs, false);
    out.write_csv("ddcoupling_sums.csv", &rows)?;
    out.write_json(
        "ddcoupling_sums.json",
        &json!({
            "seed": cfg.seed,
            "hypotheses": p.hypotheses(),
            "rows": rows,
            "lamp_bound": lamp,
            "cursor_bound": cursor,
        }),
    )?;
    let series: Vec<Series> = gens
        .iter()
        .map(|g| Series {
            label: g.to_string(),
            points: rows
                .iter()
                .filter(|r| r.generator == g.to_string())
                .map(|r| (r.n as f64, r.total))
                .collect(),
        })
        .collect();
    out.write_text(
        "ddcoupling_sums.svg",
        &line_plot("integrability sums", "n", "sum", &series, false),
    )?;
    if let Some(r) = rows.iter().find(|r| r.total_phi_one > 1.0 + 1e-9) {
        return Err(fail(
            "ddcoupling sums",
            "mass",
            format!("n = {} {}: {}", r.n, r.generator, r.total_phi_one),
        ));
    }
    if p.hypotheses().holds {
        for b in [&lamp, &cursor].into_iter().flatten() {
            if !b.bounded {
                return Err(fail(
                    "ddcoupling sums",
                    "uniform bound",
                    format!("{} sums exceed {}", b.generator_class, b.bound),
                ));
            }
        }
        Ok(format!(
            "{} sums; hypotheses hold and the audited sums are bounded",
            rows.len()
        ))
    } else {
        Ok(format!(
            "{} sums; hypotheses fail, no boundedness claimed",
            rows.len()
        ))
    }
}

fn file_safe(s: &str) -> String {
    s.replace('+', "plus").replace('-', "minus")
}
