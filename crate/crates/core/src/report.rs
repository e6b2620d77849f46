//! One function per CLI command, each returning a JSON report, a CSV mirror of its
//! main table and a pass flag.

use crate::config::{budget_from_env, Config, Setup};
use crate::error::{Error, Result};
use crate::gf::FieldCtx;
use crate::groups::{enumerate_gp_rho, lift_closed_form, solve_lift, ActionSpec, GroupSpec};
use crate::kummer::{BranchRule, CoverElemJson};
use crate::localmod::{local_global_compare, LocalCover};
use crate::moduli::{ASClass, FilteredKernel};
use crate::restrict::{analyze_restriction, essential_surjectivity_scan};
use crate::verify;
use serde::Deserialize;
use serde_json::{json, Value};
use std::ops::RangeInclusive;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub ok: bool,
    pub json: Value,
    pub csv: String,
}

impl Report {
    fn new(command: &str, ok: bool, json: Value, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory csv");
        for r in rows {
            w.write_record(&r).expect("in-memory csv");
        }
        let csv = String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 fields");
        Report {
            command: command.into(),
            ok,
            json,
            csv,
        }
    }

    pub fn json_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Overrides applied on top of a configuration file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub levels: Option<RangeInclusive<usize>>,
    pub seed: u64,
}

pub fn load_setup(config: &Config, opts: &RunOptions) -> Result<Setup> {
    let mut s = config.setup()?;
    if let Some(l) = &opts.levels {
        s.levels = l.clone();
    }
    Ok(s)
}

fn kernel(s: &Setup) -> Result<FilteredKernel> {
    FilteredKernel::build(&s.cover, s.rho, s.support.clone(), *s.levels.end())
}

fn header(s: &Setup) -> Value {
    json!({
        "config": s.name,
        "p": s.ctx.p(),
        "q": s.ctx.q(),
        "coefficients": s.ctx.order(),
        "n": s.cover.n,
        "exponents": s.cover.exponents,
        "rho_s": s.rho.s,
        "j0": crate::moduli::kernel_d(&s.cover, &s.rho),
        "support": s.support.iter().map(|&p| s.cover.base.place_label(p)).collect::<Vec<_>>(),
        "levels": [s.levels.start(), s.levels.end()],
    })
}

fn coords_text(s: &Setup, c: &[crate::gf::Fel]) -> String {
    c.iter().map(|&x| s.ctx.format(x)).collect::<Vec<_>>().join(" ")
}

pub fn dims(s: &Setup) -> Result<Report> {
    let fk = kernel(s)?;
    let mut rows = Vec::new();
    let mut csv = Vec::new();
    let mut ok = true;
    for l in s.levels.clone() {
        let (formula, applies) = if l == 0 {
            (None, false)
        } else {
            (Some(fk.floor_formula(l)), fk.floor_applies(l))
        };
        let floor_ok = formula.map(|v| v == fk.d(l) as i64);
        if applies {
            ok &= floor_ok == Some(true);
        }
        rows.push(json!({
            "level": l,
            "dim_kernel": fk.dim_kernel(l),
            "d": fk.d(l),
            "floor_formula": formula,
            "formula_applies": applies,
            "floor_ok": floor_ok,
            "labels": fk.piece(l).labels,
        }));
        csv.push(vec![
            l.to_string(),
            fk.dim_kernel(l).to_string(),
            fk.d(l).to_string(),
            formula.map_or(String::new(), |v| v.to_string()),
            applies.to_string(),
            floor_ok.map_or(String::new(), |v| v.to_string()),
        ]);
    }
    Ok(Report::new(
        "dims",
        ok,
        json!({ "setup": header(s), "rows": rows, "ok": ok }),
        &["level", "dim_kernel", "d", "floor_formula", "formula_applies", "floor_ok"],
        csv,
    ))
}

pub fn enumerate(s: &Setup) -> Result<Report> {
    let fk = kernel(s)?;
    let mut levels = Vec::new();
    let mut csv = Vec::new();
    for l in s.levels.clone() {
        let classes = fk.enumerate_classes(l, s.ctx.big_m(), s.budget)?;
        let listed: Vec<Value> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let rep = fk.cover().label(&fk.representative(c));
                csv.push(vec![l.to_string(), i.to_string(), coords_text(s, &c.coords), rep.clone()]);
                json!({ "coords": c.coords.iter().map(|&x| s.ctx.format(x)).collect::<Vec<_>>(), "representative": rep })
            })
            .collect();
        levels.push(json!({ "level": l, "d": fk.d(l), "count": classes.len(), "classes": listed }));
    }
    Ok(Report::new(
        "enumerate",
        true,
        json!({ "setup": header(s), "levels": levels, "ok": true }),
        &["level", "index", "coords", "representative"],
        csv,
    ))
}

#[derive(Clone, Debug, Deserialize)]
pub struct ReduceInput {
    pub level: usize,
    pub element: CoverElemJson,
}

pub fn reduce(s: &Setup, input: &ReduceInput) -> Result<Report> {
    let mut s = s.clone();
    s.levels = 0..=input.level.max(*s.levels.end());
    let fk = kernel(&s)?;
    let b = fk.cover().from_json(&input.element)?;
    let by_echelon = fk.wp_reduce(&b, input.level)?;
    let by_push = fk.push_up(&b, input.level)?;
    let agree = by_echelon == by_push;
    let rep = fk.cover().label(&fk.representative(&by_echelon));
    Ok(Report::new(
        "reduce",
        agree,
        json!({
            "setup": header(&s),
            "input": fk.cover().label(&b),
            "level": input.level,
            "coords": by_echelon.coords.iter().map(|&x| s.ctx.format(x)).collect::<Vec<_>>(),
            "labels": fk.chain.labels(input.level),
            "representative": rep,
            "routes_agree": agree,
            "ok": agree,
        }),
        &["level", "coords", "representative", "routes_agree"],
        vec![vec![input.level.to_string(), coords_text(&s, &by_echelon.coords), rep, agree.to_string()]],
    ))
}

pub fn iota(s: &Setup) -> Result<Report> {
    let fk = kernel(s)?;
    let mut rows = Vec::new();
    let mut csv = Vec::new();
    let mut ok = true;
    for l in s.levels.clone() {
        let classes = fk.enumerate_classes(l, s.ctx.big_m(), s.budget)?;
        let mut images = std::collections::BTreeSet::new();
        for c in &classes {
            images.insert(fk.iota_eval(c)?);
        }
        let injective = images.len() == classes.len();
        ok &= injective;
        rows.push(json!({
            "level": l,
            "classes": classes.len(),
            "distinct_images": images.len(),
            "target_dim": fk.full_chain()?.d(l),
            "injective": injective,
        }));
        csv.push(vec![
            l.to_string(),
            classes.len().to_string(),
            images.len().to_string(),
            injective.to_string(),
        ]);
    }
    Ok(Report::new(
        "iota",
        ok,
        json!({ "setup": header(s), "rows": rows, "ok": ok }),
        &["level", "classes", "distinct_images", "injective"],
        csv,
    ))
}

pub fn local_dims(s: &Setup) -> Result<Report> {
    let mut places = Vec::new();
    let mut csv = Vec::new();
    let mut ok = true;
    for &place in &s.support {
        let lc = LocalCover::at_point(&s.cover, place, &s.rho)?;
        let dims = lc.local_dims(*s.levels.end());
        let label = s.cover.base.place_label(place);
        let mut rows = Vec::new();
        for l in s.levels.clone() {
            let formula = (l >= 1).then(|| lc.floor_formula(l));
            let good = formula.is_none_or(|v| v == dims[l] as i64);
            ok &= good;
            rows.push(json!({ "level": l, "d_local": dims[l], "floor_formula": formula, "floor_ok": good }));
            csv.push(vec![
                label.clone(),
                l.to_string(),
                dims[l].to_string(),
                formula.map_or(String::new(), |v| v.to_string()),
                good.to_string(),
            ]);
        }
        places.push(json!({
            "place": label,
            "n_t": lc.n_t,
            "i0": lc.i0(),
            "rows": rows,
        }));
    }
    Ok(Report::new(
        "local-dims",
        ok,
        json!({ "setup": header(s), "places": places, "ok": ok }),
        &["place", "level", "d_local", "floor_formula", "floor_ok"],
        csv,
    ))
}

pub fn local_global_check(s: &Setup) -> Result<Report> {
    let ctx: Arc<FieldCtx> = s.ctx.clone();
    let l_max = *s.levels.end();
    let rep = local_global_compare(ctx, s.cover.n, s.rho.s, l_max, 1.min(l_max), s.budget)?;
    let ok = rep.rows.iter().all(|r| r.equal)
        && rep.pieces_equal
        && rep.point_cover_matches
        && rep.elements.bijective
        && rep.classes.bijective;
    let csv = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                r.local_dim.to_string(),
                r.global_dim.to_string(),
                r.equal.to_string(),
            ]
        })
        .collect();
    Ok(Report::new(
        "local-global-check",
        ok,
        json!({ "setup": header(s), "report": rep, "ok": ok }),
        &["level", "local_dim", "global_dim", "equal"],
        csv,
    ))
}

pub fn restrict(s: &Setup) -> Result<Report> {
    let fk = kernel(s)?;
    let lo = (*s.levels.start()).max(1);
    let hi = *s.levels.end();
    if lo > hi {
        return Err(Error::ConfigInvalid("restrict needs a level ≥ 1".into()));
    }
    let rep = analyze_restriction(&fk, lo..=hi, s.rule, 0)?;
    let other = match s.rule {
        BranchRule::Smallest => BranchRule::Largest,
        BranchRule::Largest => BranchRule::Smallest,
    };
    let alt = analyze_restriction(&fk, lo..=hi, other, 1)?;
    let key = |r: &crate::restrict::RestrictReport| {
        r.rows
            .iter()
            .map(|x| (x.kernel_dim, x.rank, x.surjective))
            .collect::<Vec<_>>()
    };
    let covariant = key(&rep) == key(&alt);
    let ok = covariant && rep.verdicts.kernel_p_power;
    let csv = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                format!("{:?}", r.profile),
                r.level.to_string(),
                r.d_global.to_string(),
                r.sum_d_local.to_string(),
                r.kernel_dim.to_string(),
                r.surjective.to_string(),
            ]
        })
        .collect();
    Ok(Report::new(
        "restrict",
        ok,
        json!({
            "setup": header(s),
            "genus": s.cover.genus(),
            "rows": rep.rows,
            "verdicts": rep.verdicts,
            "branch_covariant": covariant,
            "ok": ok,
        }),
        &["profile", "level", "d_global", "sum_d_local", "kernel_dim", "surjective"],
        csv,
    ))
}

pub fn scan_profiles(s: &Setup) -> Result<Report> {
    let l = (*s.levels.end()).max(1);
    let rows = essential_surjectivity_scan(&s.cover.base, s.cover.n, s.rho.e_rho, l, s.budget)?;
    let ok = rows.iter().filter(|r| r.row.is_some()).all(|r| r.status == "surjective");
    let csv = rows
        .iter()
        .map(|r| {
            let row = r.row.as_ref();
            vec![
                format!("{:?}", r.profile),
                r.status.clone(),
                l.to_string(),
                row.map_or(String::new(), |x| x.d_global.to_string()),
                row.map_or(String::new(), |x| x.sum_d_local.to_string()),
                row.map_or(String::new(), |x| x.kernel_dim.to_string()),
                row.map_or(String::new(), |x| x.surjective.to_string()),
            ]
        })
        .collect();
    Ok(Report::new(
        "scan-profiles",
        ok,
        json!({ "setup": header(s), "level": l, "profiles": rows, "ok": ok }),
        &["profile", "status", "level", "d_global", "sum_d_local", "kernel_dim", "surjective"],
        csv,
    ))
}

#[derive(Clone, Debug, Deserialize)]
pub struct GpInput {
    #[serde(rename = "P")]
    pub p: GroupSpec,
    #[serde(rename = "P_prime")]
    pub p_prime: GroupSpec,
    #[serde(default = "trivial_action")]
    pub rho_prime: ActionSpec,
}

fn trivial_action() -> ActionSpec {
    ActionSpec::Named("trivial".into())
}

pub fn gp_rho(input: &GpInput, budget: u128) -> Result<Report> {
    let p = input.p.build()?;
    let pp = input.p_prime.build()?;
    let rho = input.rho_prime.build(&p, &pp)?;
    let rep = enumerate_gp_rho(&p, &pp, &rho, budget)?;
    let ok = rep.rho_prime_class.is_some() && (!p.is_abelian() || rep.classes.len() == 1);
    let csv = rep
        .passing
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let class = rep.classes.iter().position(|c| c.contains(&i)).unwrap();
            let witnesses = a
                .witnesses
                .iter()
                .map(|&w| p.label(w).to_string())
                .collect::<Vec<_>>()
                .join(" ");
            vec![i.to_string(), class.to_string(), witnesses]
        })
        .collect();
    Ok(Report::new(
        "groups gp-rho",
        ok,
        json!({
            "P_labels": p.labels(),
            "P_prime_labels": pp.labels(),
            "P_abelian": p.is_abelian(),
            "report": rep,
            "ok": ok,
        }),
        &["action", "class", "witnesses"],
        csv,
    ))
}

#[derive(Clone, Debug, Deserialize)]
pub struct LiftInput {
    pub p: u64,
    pub m: u32,
    pub n: u64,
    pub e: String,
    pub v: String,
}

pub fn solve_lift_report(input: &LiftInput) -> Result<Report> {
    let f = FieldCtx::new(input.p, input.m, input.m)?;
    let e = f.parse(&input.e)?;
    let v = f.parse(&input.v)?;
    let scan = solve_lift(&f, e, input.n, v)?;
    let closed = lift_closed_form(&f, e, input.n, v)?;
    let ok = scan == closed;
    let fmt = |xs: &[crate::gf::Fel]| xs.iter().map(|&x| f.format(x)).collect::<Vec<_>>();
    Ok(Report::new(
        "groups solve-lift",
        ok,
        json!({
            "q": f.q(),
            "n": input.n,
            "e": input.e,
            "v": input.v,
            "solutions": fmt(&scan),
            "closed_form": fmt(&closed),
            "agree": ok,
            "ok": ok,
        }),
        &["h"],
        scan.iter().map(|&h| vec![f.format(h)]).collect(),
    ))
}

pub fn verify_report(seed: u64) -> Result<Report> {
    let budget = budget_from_env(None)?;
    let rep = verify::verify(budget, seed)?;
    let csv = rep
        .criteria
        .iter()
        .map(|c| vec![c.id.to_string(), c.name.clone(), if c.pass { "PASS" } else { "FAIL" }.into()])
        .collect();
    Ok(Report::new(
        "verify",
        rep.all_pass,
        serde_json::to_value(&rep).expect("report serializes"),
        &["criterion", "name", "result"],
        csv,
    ))
}

/// ASClass coordinates of every class at a level, for callers outside the CLI.
pub fn class_list(fk: &FilteredKernel, l: usize, budget: u128) -> Result<Vec<ASClass>> {
    fk.enumerate_classes(l, fk.f().big_m(), budget)
}
