//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use petriforge::models::params::ModelParams;
use petriforge::models::{build_model, validate_model, ModelVariant};
use petriforge::net::{blade_net, Marking, TransitionId};
use petriforge::pnml::{parse_pnml, write_pnml, PNML_NAMESPACE};
use petriforge::reachability::{build_reachability_graph, deadlock_markings, ExplorationLimits};

/// Number of random nets for the property criterion.
const RANDOM_NETS: usize = 1_000;
const PROPERTY_BUDGET: Duration = Duration::from_secs(60);
const SWEEP_BUDGET: Duration = Duration::from_secs(300);
const POINT_BUDGET: Duration = Duration::from_secs(30);
/// "Roughly 2x": variant / O. schinzii at p = 1 and 2 must lie in this band.
const VARIANT_RATIO_BAND: (f64, f64) = (1.5, 2.5);
/// Reference state-space sizes; `None` marks points without a reference.
const REFERENCE: [(ModelVariant, [Option<usize>; 11]); 3] = [
    (
        ModelVariant::ACoranica,
        [
            Some(621),
            Some(4488),
            None,
            None,
            None,
            None,
            None,
            None,
            None,
            None,
            Some(34228),
        ],
    ),
    (
        ModelVariant::OSchinzii,
        [
            Some(663),
            Some(4350),
            None,
            Some(14074),
            Some(14074),
            Some(14074),
            Some(14074),
            Some(14074),
            Some(14074),
            Some(14074),
            Some(14074),
        ],
    ),
    (
        ModelVariant::OSchinziiNoReturn,
        [
            Some(1203),
            Some(8597),
            None,
            Some(29333),
            Some(29333),
            Some(29333),
            Some(29333),
            Some(29333),
            Some(29333),
            Some(29333),
            Some(29333),
        ],
    ),
];
const DEVIATION_DOC: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/state-space.md");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let mn = blade_net(3, 2);
    let next = mn.net.fire(&mn.initial, TransitionId(0)).unwrap();
    outcome(
        next == Marking::new(vec![1, 1, 1]),
        format!("blade {} --t1--> {}", mn.initial, next),
    )
}

fn criterion_2() -> Outcome {
    let sizes = |tools, cores| {
        let g = build_reachability_graph(&blade_net(tools, cores), ExplorationLimits::default())
            .unwrap();
        (g.node_count(), g.edge_count())
    };
    let small = sizes(3, 1);
    let large = sizes(6, 3);
    outcome(
        small == (2, 1) && large == (4, 3),
        format!(
            "(3,1,0): {} nodes/{} edges; (6,3,0): {} nodes/{} edges",
            small.0, small.1, large.0, large.1
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let start = Instant::now();
    let mut failures = Vec::new();
    for i in 0..RANDOM_NETS {
        let spec = common::random_spec(|| rng.next_u64());
        if let Err(msg) = common::check_net(&spec) {
            failures.push(format!("net {i}: {msg}"));
        }
    }
    let elapsed = start.elapsed();
    let mut detail = format!(
        "{RANDOM_NETS} nets, {} failures, {:.2?}",
        failures.len(),
        elapsed
    );
    if let Some(first) = failures.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    outcome(failures.is_empty() && elapsed < PROPERTY_BUDGET, detail)
}

fn criterion_4() -> Outcome {
    let mut passed = 0;
    let mut failed = Vec::new();
    for v in [ModelVariant::ACoranica, ModelVariant::OSchinzii] {
        for r in validate_model(v).unwrap() {
            if r.satisfied {
                passed += 1;
            } else {
                failed.push(format!("{v}/{}", r.subprocess));
            }
        }
    }
    outcome(
        passed == 16 && failed.is_empty(),
        format!(
            "{passed}/16 contracts hold{}",
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", failed.join(", "))
            }
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut missing = Vec::new();
    for v in [
        ModelVariant::ACoranica,
        ModelVariant::OSchinzii,
        ModelVariant::OSchinziiNoReturn,
    ] {
        for p in [1, 2, 4] {
            let mn = build_model(v, &ModelParams::with_people(p)).unwrap();
            let g = build_reachability_graph(&mn, ExplorationLimits::default()).unwrap();
            let adhesive = mn.net.place_by_name("Adhesive").unwrap().index();
            let goal = deadlock_markings(&mn.net, &g)
                .into_iter()
                .any(|n| g.tokens(n)[adhesive] == 1);
            if !goal {
                missing.push(format!("{v} p={p}"));
            }
        }
    }
    outcome(
        missing.is_empty(),
        if missing.is_empty() {
            "goal deadlock present for all 9 (variant, p) pairs (the blade example has no Adhesive place)".to_string()
        } else {
            format!("no goal deadlock: {}", missing.join(", "))
        },
    )
}

/// States per p = 1..=11 for the three families, with timings.
struct Sweep {
    sizes: Vec<(ModelVariant, Vec<usize>)>,
    total: Duration,
    slowest: Duration,
}

fn run_sweep() -> Sweep {
    let start = Instant::now();
    let mut slowest = Duration::ZERO;
    let mut sizes = Vec::new();
    for (v, _) in REFERENCE {
        let mut row = Vec::new();
        for p in 1..=11 {
            let t = Instant::now();
            let mn = build_model(v, &ModelParams::with_people(p)).unwrap();
            let g = build_reachability_graph(&mn, ExplorationLimits::default()).unwrap();
            row.push(g.node_count());
            slowest = slowest.max(t.elapsed());
        }
        sizes.push((v, row));
    }
    Sweep {
        sizes,
        total: start.elapsed(),
        slowest,
    }
}

fn qualitative(sweep: &Sweep) -> Vec<(char, bool, String)> {
    let get = |v: ModelVariant| &sweep.sizes.iter().find(|(w, _)| *w == v).unwrap().1;
    let ac = get(ModelVariant::ACoranica);
    let os = get(ModelVariant::OSchinzii);
    let nr = get(ModelVariant::OSchinziiNoReturn);
    let families = [("a-coranica", ac), ("o-schinzii", os), ("no-return", nr)];

    let a = families
        .iter()
        .all(|(_, s)| s.windows(2).all(|w| w[0] <= w[1]));
    let b = families.iter().all(|(_, s)| {
        let jumps: Vec<f64> = s.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect();
        jumps.iter().skip(1).all(|&j| j < jumps[0])
    });
    let ratios: Vec<f64> = (0..2).map(|i| nr[i] as f64 / os[i] as f64).collect();
    let c = nr.iter().zip(os.iter()).all(|(x, y)| x >= y)
        && ratios
            .iter()
            .all(|&r| r >= VARIANT_RATIO_BAND.0 && r <= VARIANT_RATIO_BAND.1);
    let saturates_at_4 = |s: &Vec<usize>| s[2] < s[3] && s[3..].iter().all(|&x| x == s[3]);
    let d = saturates_at_4(os) && saturates_at_4(nr) && ac[4] > ac[3] && ac[10] > ac[3];
    let e = ac[0] < os[0] && os[0] < nr[0];
    vec![
        ('a', a, "nondecreasing in p".into()),
        ('b', b, "largest relative jump is p=1 -> 2".into()),
        (
            'c',
            c,
            format!(
                "variant >= o-schinzii; ratio at p=1,2 = {:.2}, {:.2}",
                ratios[0], ratios[1]
            ),
        ),
        (
            'd',
            d,
            format!(
                "o-schinzii/variant flat from p=4 ({}, {}); a-coranica {} -> {} -> {} (p=4,5,11)",
                os[3], nr[3], ac[3], ac[4], ac[10]
            ),
        ),
        ('e', e, format!("p=1: {} < {} < {}", ac[0], os[0], nr[0])),
    ]
}

fn criterion_6(sweep: &Sweep) -> Outcome {
    let mut deviations = Vec::new();
    let mut exact = 0;
    for (v, reference) in REFERENCE {
        let got = &sweep.sizes.iter().find(|(w, _)| *w == v).unwrap().1;
        for (i, r) in reference.iter().enumerate() {
            if let Some(r) = r {
                if got[i] == *r {
                    exact += 1;
                } else {
                    deviations.push((v, i + 1, *r, got[i]));
                }
            }
        }
    }
    let total = exact + deviations.len();
    println!("  6 exact     {exact}/{total} reference points reproduced");
    if deviations.is_empty() {
        return outcome(true, "all reference counts reproduced exactly");
    }
    let checks = qualitative(sweep);
    for (tag, ok, text) in &checks {
        println!(
            "  6{tag}          {} {text}",
            if *ok { "PASS" } else { "FAIL" }
        );
    }
    // The fallback also requires the committed deviation table to list the
    // counts this build actually produces.
    let doc = std::fs::read_to_string(DEVIATION_DOC).unwrap_or_default();
    let documented = deviations
        .iter()
        .all(|(v, p, r, got)| doc.contains(&format!("| {v} | {p} | {r} | {got} |")));
    println!(
        "  6 table     {} deviation table lists every deviating point",
        if documented { "PASS" } else { "FAIL" }
    );
    let qualitative_ok = checks.iter().all(|(_, ok, _)| *ok);
    outcome(
        qualitative_ok && documented,
        format!(
            "exact match on {exact}/{total} points; qualitative fallback and deviation table {}",
            if qualitative_ok && documented {
                "hold"
            } else {
                "do not hold"
            }
        ),
    )
}

fn criterion_7(sweep: &Sweep) -> Outcome {
    outcome(
        sweep.total < SWEEP_BUDGET && sweep.slowest < POINT_BUDGET,
        format!(
            "33 points in {:.2?} (slowest point {:.2?})",
            sweep.total, sweep.slowest
        ),
    )
}

fn elements<'a, 'i>(node: roxmltree::Node<'a, 'i>) -> Vec<roxmltree::Node<'a, 'i>> {
    node.children().filter(|c| c.is_element()).collect()
}

/// `None` if `node` has no `label` child; otherwise the text of its single
/// `<text>` element, or `None` inside if that shape is violated.
fn text_of(node: roxmltree::Node<'_, '_>, label: &str) -> Option<Option<String>> {
    let el = elements(node)
        .into_iter()
        .find(|c| c.tag_name().name() == label)?;
    let texts: Vec<_> = elements(el)
        .into_iter()
        .filter(|c| c.tag_name().name() == "text")
        .collect();
    Some(if texts.len() == 1 {
        Some(texts[0].text().unwrap_or("").to_string())
    } else {
        None
    })
}

/// Structural check of a document against the PNML 2009 P/T grammar.
fn schema_errors(doc: &str) -> Vec<String> {
    let mut errors = Vec::new();
    let parsed = match roxmltree::Document::parse(doc) {
        Ok(d) => d,
        Err(e) => return vec![format!("not XML: {e}")],
    };
    let root = parsed.root_element();
    if root.tag_name().name() != "pnml" || root.tag_name().namespace() != Some(PNML_NAMESPACE) {
        errors.push("root must be <pnml> in the PNML namespace".into());
    }
    let nets = elements(root);
    if nets.is_empty() || nets.iter().any(|n| n.tag_name().name() != "net") {
        errors.push("<pnml> must contain only <net> elements".into());
    }
    let mut ids = HashSet::new();
    let mut kinds = std::collections::HashMap::new();
    for net in &nets {
        if net.attribute("id").is_none() {
            errors.push("<net> needs an id".into());
        }
        if net.attribute("type") != Some("http://www.pnml.org/version-2009/grammar/ptnet") {
            errors.push("<net> type must be the P/T net type".into());
        }
        let pages = elements(*net);
        if pages.is_empty()
            || pages
                .iter()
                .any(|p| !matches!(p.tag_name().name(), "page" | "name"))
        {
            errors.push("<net> must contain <page> elements".into());
        }
        for page in pages.iter().filter(|p| p.tag_name().name() == "page") {
            for node in elements(*page) {
                let tag = node.tag_name().name();
                let Some(id) = node.attribute("id") else {
                    errors.push(format!("<{tag}> without id"));
                    continue;
                };
                if !ids.insert(id.to_string()) {
                    errors.push(format!("duplicate id {id}"));
                }
                kinds.insert(id.to_string(), tag.to_string());
                let allowed: &[&str] = match tag {
                    "place" => &["name", "initialMarking"],
                    "transition" => &["name"],
                    "arc" => &["inscription"],
                    other => {
                        errors.push(format!("unexpected <{other}> in page"));
                        continue;
                    }
                };
                for child in elements(node) {
                    if !allowed.contains(&child.tag_name().name()) {
                        errors.push(format!("unexpected <{}> in {id}", child.tag_name().name()));
                    }
                }
                if let Some(name) = text_of(node, "name") {
                    if name.is_none() {
                        errors.push(format!("{id}: <name> needs exactly one <text>"));
                    }
                }
                if let Some(marking) = text_of(node, "initialMarking") {
                    if marking.and_then(|t| t.parse::<u64>().ok()).is_none() {
                        errors.push(format!(
                            "{id}: initialMarking must be a nonnegative integer"
                        ));
                    }
                }
                if let Some(weight) = text_of(node, "inscription") {
                    if !matches!(weight.and_then(|t| t.parse::<u64>().ok()), Some(w) if w >= 1) {
                        errors.push(format!("{id}: inscription must be a positive integer"));
                    }
                }
            }
            for arc in elements(*page)
                .into_iter()
                .filter(|n| n.tag_name().name() == "arc")
            {
                let id = arc.attribute("id").unwrap_or("?");
                let kind = |attr: &str| arc.attribute(attr).and_then(|r| kinds.get(r)).cloned();
                match (kind("source").as_deref(), kind("target").as_deref()) {
                    (Some("place"), Some("transition")) | (Some("transition"), Some("place")) => {}
                    _ => errors.push(format!("arc {id} must join a place and a transition")),
                }
            }
        }
    }
    errors
}

fn criterion_8() -> Outcome {
    let mut problems = Vec::new();
    for v in ModelVariant::ALL {
        let mn = build_model(v, &ModelParams::default()).unwrap();
        let first = write_pnml(&mn);
        for e in schema_errors(&first) {
            problems.push(format!("{v}: {e}"));
        }
        match parse_pnml(first.as_bytes()) {
            Ok(import) => {
                let second = write_pnml(&import.net);
                let third = parse_pnml(second.as_bytes()).map(|i| write_pnml(&i.net));
                if import.net != mn || second != first || third.as_deref() != Ok(first.as_str()) {
                    problems.push(format!("{v}: parse/write is not a fixpoint"));
                }
            }
            Err(e) => problems.push(format!("{v}: {e}")),
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            "4 variants schema-valid and byte-identical after parse->write->parse".to_string()
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    let mut all = true;
    let mut report = |n: u8, o: Outcome| {
        all &= o.pass;
        println!(
            "criterion {n}: {} - {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    report(5, criterion_5());
    let sweep = run_sweep();
    for (v, sizes) in &sweep.sizes {
        let row: Vec<String> = sizes.iter().map(usize::to_string).collect();
        println!("  sweep {v:<22} {}", row.join(" "));
    }
    report(6, criterion_6(&sweep));
    report(7, criterion_7(&sweep));
    report(8, criterion_8());
    if !all {
        std::process::exit(1);
    }
}
