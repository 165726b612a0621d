//! Plain-text tables and trees for the CLI.

use std::fmt::Write;

use crate::bohm::{HiddenConfig, Path, TrajectorySet};
use crate::epistemic::{Classification, TraceReport};
use crate::hardy::MeasurementContext;
use crate::numfmt::display_probability;
use crate::qcore::OutcomeDistribution;

use super::{BohmOutput, ChshOutput, MemoryOutput};

fn table_rows(out: &mut String, table: &OutcomeDistribution, indent: &str) {
    for (labels, p) in table.entries() {
        let names: Vec<String> = labels.iter().map(|o| format!("{:<8}", o.symbol())).collect();
        let _ = writeln!(out, "{indent}{} {}", names.join(" "), display_probability(p));
    }
}

pub fn contexts(tables: &[(MeasurementContext, OutcomeDistribution)]) -> String {
    let mut out = String::new();
    for (ctx, table) in tables {
        let _ = writeln!(out, "{ctx}");
        table_rows(&mut out, table, "  ");
    }
    out
}

fn tree(out: &mut String, paths: &[&Path], depth: usize) {
    let indent = "  ".repeat(depth + 1);
    let mut groups: Vec<(crate::bohm::Transition, Vec<&Path>)> = Vec::new();
    for p in paths {
        let Some(t) = p.events.get(depth) else {
            let _ = writeln!(out, "{indent}⇒ {}  {}", p.final_config, display_probability(p.weight));
            continue;
        };
        match groups.iter_mut().find(|(g, _)| g == t) {
            Some((_, members)) => members.push(p),
            None => groups.push((*t, vec![p])),
        }
    }
    for (t, members) in groups {
        let weight: f64 = members.iter().map(|p| p.weight).sum();
        let _ = writeln!(
            out,
            "{indent}{} {} → {}  {}",
            t.system,
            t.from.symbol(),
            t.to.symbol(),
            display_probability(weight)
        );
        tree(out, &members, depth + 1);
    }
}

fn trajectory_set(out: &mut String, set: &TrajectorySet) {
    let _ = writeln!(
        out,
        "foliation {}, coupling {:?}, context {}",
        set.foliation,
        set.coupling,
        set.context
    );
    let mut initials: Vec<HiddenConfig> = set.paths.iter().map(|p| p.initial).collect();
    initials.dedup();
    for initial in initials {
        let members: Vec<&Path> = set.paths_from(initial).collect();
        let weight: f64 = members.iter().map(|p| p.weight).sum();
        let _ = writeln!(out, "{initial}  {}", display_probability(weight));
        tree(out, &members, 0);
    }
    let _ = writeln!(out, "final marginal:");
    table_rows(out, &set.final_marginal(), "  ");
    let _ = writeln!(out, "origins:");
    for (labels, _) in set.final_marginal().entries() {
        if let Ok(origin) = set.origin_of(labels[0], labels[1]) {
            let parts: Vec<String> =
                origin.iter().map(|(c, p)| format!("{c} {}", display_probability(*p))).collect();
            let _ = writeln!(
                out,
                "  ({},{}) ← {}",
                labels[0].symbol(),
                labels[1].symbol(),
                parts.join(", ")
            );
        }
    }
}

pub fn bohm(output: &BohmOutput) -> Result<String, crate::Error> {
    let mut out = String::new();
    for set in &output.sets {
        trajectory_set(&mut out, set);
        out.push('\n');
    }
    if let Some(cmp) = &output.comparison {
        let differ: Vec<String> = cmp
            .outcomes
            .iter()
            .filter(|o| o.differs)
            .map(|o| format!("({},{})", o.coin.symbol(), o.spin.symbol()))
            .collect();
        let origins = if differ.is_empty() { "origins agree" } else { "origins differ" };
        let marginals = if cmp.marginals_identical { "marginals identical" } else { "marginals differ" };
        let _ = writeln!(out, "{origins}; {marginals}");
        if !differ.is_empty() {
            let _ = writeln!(out, "  differing outcomes: {}", differ.join(" "));
        }
    }
    for mc in &output.monte_carlo {
        let verdict = if mc.all_within_four_sigma() { "all paths within 4σ" } else { "DEVIATION beyond 4σ" };
        let _ = writeln!(out, "monte carlo: {} runs, seed {}: {verdict}", mc.runs, mc.seed);
        for p in &mc.paths {
            let steps: Vec<String> =
                p.events.iter().map(|t| format!("{}→{}", t.from.symbol(), t.to.symbol())).collect();
            let _ = writeln!(
                out,
                "  {} {:<16} expected {:.6} observed {:.6} (σ {:.1e})",
                p.initial,
                steps.join(" "),
                p.weight,
                p.frequency,
                p.sigma
            );
        }
    }
    Ok(out)
}

pub fn agents(report: &TraceReport) -> String {
    let mut out = String::new();
    let a = report.axioms;
    let _ = writeln!(
        out,
        "axioms Q={} C={} S={}, counterfactual composition {}",
        a.Q,
        a.C,
        a.S,
        if report.counterfactual_composition { "allowed" } else { "forbidden" }
    );
    for v in &report.statements {
        let class = match v.classification {
            Classification::ContextValid => "ContextValid",
            Classification::Counterfactual => "Counterfactual",
            Classification::CounterfactualDerived => "CounterfactualDerived",
        };
        let evidence = v.evidence.map(display_probability).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<9} {:<5} {:<22} {:<8} {:<24} {}",
            v.id,
            v.author.to_string(),
            class,
            if v.derived { "derived" } else { "-" },
            evidence,
            v.text
        );
    }
    match &report.contradiction {
        Some(c) => {
            let _ = writeln!(out, "contradiction in {}", c.statements.join(", "));
            let _ = writeln!(
                out,
                "  witness: composed {} vs actual {}",
                display_probability(c.witness.composed),
                display_probability(c.witness.actual)
            );
            let chain: Vec<String> = c.certificate.chain.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(out, "  chain: {}", chain.join("; "));
            let _ = writeln!(out, "  counterfactual roots: {}", c.counterfactual_roots.join(", "));
        }
        None => {
            let _ = writeln!(out, "no contradiction");
        }
    }
    out
}

pub fn memory(output: &MemoryOutput) -> String {
    let mut out = String::new();
    let names = |fs: &[crate::memory::Friend]| {
        if fs.is_empty() {
            "none".to_string()
        } else {
            fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",")
        }
    };
    let ctx = MeasurementContext::WBAR_W.to_string();
    let (left, right) = (&output.erased, &output.compared);
    let kept: Vec<_> = right.agents.iter().filter(|a| !right.erased.contains(a)).copied().collect();
    let _ = writeln!(
        out,
        "{ctx}: erased by {} ({:?})  |  kept by {} ({:?})",
        names(&left.erased),
        left.status,
        names(&kept),
        right.status
    );
    let (l, r) = (&left.tables[&ctx], &right.tables[&ctx]);
    for ((labels, p), (_, q)) in l.entries().into_iter().zip(r.entries()) {
        let _ = writeln!(
            out,
            "  {:<8} {:<8} {:<28} {}",
            labels[0].symbol(),
            labels[1].symbol(),
            display_probability(p),
            display_probability(q)
        );
    }
    let flag = &output.flag;
    let _ = writeln!(
        out,
        "definite-outcome flag for {}: {}, carries which-outcome information: {}",
        names(&flag.agents),
        if flag.set { "set" } else { "unset" },
        if flag.outcome_independent { "no" } else { "yes" }
    );
    out
}

pub fn chsh(output: &ChshOutput) -> String {
    let mut out = String::new();
    let r = &output.report;
    let _ = writeln!(out, "quad {}", r.quad);
    let _ = writeln!(out, "  S quantum {:.9}", r.s_quantum);
    let _ = writeln!(out, "  S local   {:.9}", r.s_lhv);
    let _ = writeln!(
        out,
        "local model max over {}^4 grid + refinement: {:.9} at {}",
        r.grid_resolution,
        r.s_lhv_max,
        r.argmax_quad
    );
    if let Some(s) = &output.quantum_scan {
        let _ = writeln!(
            out,
            "quantum max over {}^4 grid: {:.9}, refined: {:.9} at {}",
            s.resolution,
            s.grid_max,
            s.max,
            s.argmax
        );
    }
    if let Some(e) = &output.erased_vs_kept {
        let _ = writeln!(out, "erased records: S {:.9} (coherent: {})", e.erased_s, e.erased_coherent);
        let _ = writeln!(out, "kept records:   S {:.9}, max {:.9}", e.kept_s, e.kept_s_max);
        let _ = writeln!(
            out,
            "kept vs −cos α cos β on {}×{} grid: max gap {:.1e}",
            e.grid_points,
            e.grid_points,
            e.kept_vs_lhv_gap
        );
    }
    out
}
