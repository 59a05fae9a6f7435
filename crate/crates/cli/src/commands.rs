use std::fs::File;
use std::io::BufWriter;

use cbound::bounds::{
    azuma_bentkus5, bentkus, chernoff, fan_chernoff, freedman_bentkus_binom, freedman_bentkus_poisson,
    fuk_nagaev_threshold, log_concave_majorant, poisson_majorant, poisson_majorant_bound, q_alpha_min,
    winsorized_freedman, TailSpec,
};
use cbound::dist::write_lattice_csv;
use cbound::dominance::{default_step, discretize, splice, xi_zero_mean};
use cbound::verify::{
    adversarial_search, conjecture_probe, doob_demo, families, mc_union_prob, verify_exact, DoobDemo, DoobKind,
    EventKind, EventSpec, Family, McConfig, StrategyTree,
};
use cbound::{parse_dist, BoundResult, Dist, Method};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{num, to_value, Body, Doc, Format};
use crate::{
    BoundArgs, CliError, ConjectureArgs, DoobArg, DoobArgs, DpArgs, EventArg, EventArgs, FamilyArg, FamilyArgs,
    MajorantArgs, McArgs, ModelArgs, QalphaArgs, SearchArgs, SweepArgs, XiArgs,
};

pub struct Globals {
    pub format: Format,
    pub seed: u64,
}

type Out = Result<(String, u8), CliError>;

const MAX_GRID: usize = 1_000_000;

fn config<T: Serialize>(args: &T, seed: Option<u64>) -> Value {
    let mut v = to_value(args);
    if let (Some(s), Value::Object(m)) = (seed, &mut v) {
        m.insert("seed".into(), Value::from(s));
    }
    v
}

fn need<T: Copy>(v: Option<T>, flag: &str, method: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::usage(format!("{method} needs --{flag}")))
}

fn dist_arg(m: &ModelArgs, method: &str) -> Result<Dist, CliError> {
    let spec = m.dist.as_deref().ok_or_else(|| CliError::usage(format!("{method} needs --dist")))?;
    Ok(parse_dist(spec)?)
}

fn eval_bound(method: Method, x: f64, m: &ModelArgs) -> Result<BoundResult, CliError> {
    let name = method.name();
    let r = match method {
        Method::Chernoff => chernoff(&dist_arg(m, name)?, x)?,
        Method::Bentkus1 => bentkus(&dist_arg(m, name)?, x, 1.0)?,
        Method::Bentkus2 => bentkus(&dist_arg(m, name)?, x, 2.0)?,
        Method::Bentkus5 => bentkus(&dist_arg(m, name)?, x, 5.0)?,
        Method::Fan => fan_chernoff(need(m.n, "n", name)?, need(m.v2, "v2", name)?, x)?,
        Method::FreedmanBinom => freedman_bentkus_binom(need(m.n, "n", name)?, need(m.v2, "v2", name)?, x)?,
        Method::FreedmanPoisson => freedman_bentkus_poisson(need(m.v2, "v2", name)?, x)?,
        Method::PoissonMajorant => poisson_majorant_bound(need(m.v2, "v2", name)?, x)?,
        Method::AzumaGauss5 => azuma_bentkus5(scale(m, name)?, x)?.result,
        Method::Winsorized => winsorized_freedman(need(m.v2, "v2", name)?, x, need(m.y, "y", name)?, m.p_exceed)?,
        Method::FukNagaev => {
            return Err(CliError::usage("fuk-nagaev is a threshold, not a tail bound; use `bound fuk-nagaev`"))
        }
    };
    Ok(r)
}

/// `--v`, or `sqrt(--v2)` when only the variance is given.
fn scale(m: &ModelArgs, method: &str) -> Result<f64, CliError> {
    match (m.v, m.v2) {
        (Some(v), _) => Ok(v),
        (None, Some(v2)) => Ok(v2.sqrt()),
        _ => Err(CliError::usage(format!("{method} needs --v or --v2"))),
    }
}

pub fn bound(g: &Globals, a: &BoundArgs) -> Out {
    let cfg = config(a, None);
    let doc = match a.method {
        Method::FukNagaev => {
            let name = "fuk-nagaev";
            let tail = match a.model.tail_q {
                Some(q) => TailSpec::Power { q },
                None => TailSpec::Bounded,
            };
            let fk = fuk_nagaev_threshold(scale(&a.model, name)?, need(a.model.delta, "delta", name)?, need(a.model.y, "y", name)?, &tail)?;
            let rec = json!({ "method": name, "x1": num(fk.x1), "x2": num(fk.x2), "threshold": num(fk.threshold()) });
            Doc::record("bound", cfg, &rec)
        }
        Method::AzumaGauss5 => {
            let x = need(a.x, "x", "azuma5")?;
            Doc::record("bound", cfg, &azuma_bentkus5(scale(&a.model, "azuma5")?, x)?)
        }
        m => {
            let x = need(a.x, "x", m.name())?;
            Doc::record("bound", cfg, &eval_bound(m, x, &a.model)?)
        }
    };
    Ok((doc.render(g.format), 0))
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("--x-grid `{s}` must be lo:hi:step with lo <= hi and step > 0"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(lo.is_finite() && hi.is_finite() && step > 0.0 && step.is_finite() && lo <= hi) {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() + 1.0;
    if count > MAX_GRID as f64 {
        return Err(CliError::usage(format!("--x-grid has more than {MAX_GRID} points")));
    }
    Ok((0..count as usize).map(|i| lo + i as f64 * step).collect())
}

pub fn sweep(g: &Globals, a: &SweepArgs) -> Out {
    let mut methods = Vec::new();
    for name in a.methods.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m: Method = name.parse()?;
        if m == Method::FukNagaev {
            return Err(CliError::usage("fuk-nagaev has no x and cannot be swept"));
        }
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        return Err(CliError::usage("--methods lists no method"));
    }
    methods.sort_by_key(|m| m.name());
    let xs = parse_grid(&a.x_grid)?;
    let mut rows = Vec::with_capacity(xs.len() * methods.len());
    for &x in &xs {
        for &m in &methods {
            let r = eval_bound(m, x, &a.model)?;
            rows.push(vec![num(x), Value::from(m.name()), num(r.bound), num(r.optimizer)]);
        }
    }
    let header = ["x", "method", "bound", "optimizer"].map(String::from).to_vec();
    let doc = Doc { command: "sweep", config: config(a, None), body: Body::Table { header, rows, json_key: "rows" } };
    Ok((doc.render(g.format), 0))
}

pub fn majorant(g: &Globals, a: &MajorantArgs) -> Out {
    let f = match (&a.survival, a.v2) {
        (Some(s), _) => {
            let vals: Vec<f64> = s
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::usage(format!("--survival `{s}` is not a comma-separated list of numbers")))?;
            log_concave_majorant(&vals)?
        }
        (None, Some(v2)) => poisson_majorant(v2)?,
        (None, None) => return Err(CliError::usage("majorant needs --v2 or --survival")),
    };
    let doc = match a.x {
        Some(x) => {
            let mut rec = json!({ "x": num(x), "majorant": num(f.eval(x)) });
            if let (Some(v2), None) = (a.v2, &a.survival) {
                rec["bound"] = num(poisson_majorant_bound(v2, x)?.bound);
            }
            Doc::record("majorant", config(a, None), &rec)
        }
        None => {
            // Hull vertices are stored as (x, ln S).
            let rows = f.hull().iter().map(|&(x, ls)| vec![num(x), num(ls.exp())]).collect();
            let header = vec!["x".to_string(), "majorant".to_string()];
            Doc { command: "majorant", config: config(a, None), body: Body::Table { header, rows, json_key: "hull" } }
        }
    };
    Ok((doc.render(g.format), 0))
}

pub fn xi(g: &Globals, a: &XiArgs) -> Out {
    let t = parse_dist(&a.t)?;
    let w = parse_dist(&a.w)?;
    let s = match a.q {
        Some(q) => splice(&t, &w, q)?,
        None => xi_zero_mean(&t, &w)?,
    };
    let (mean, var) = s.mean_var()?;
    let mut rec = json!({
        "q": num(s.q()),
        "a_q": num(s.a_q()),
        "b_q": num(s.b_q()),
        "mean": num(mean),
        "var": num(var),
    });
    if let Some(path) = &a.out {
        let d = s.to_dist();
        let lattice = match d.atoms() {
            Some(_) if a.step.is_none() => d,
            _ => discretize(&d, a.step.unwrap_or_else(|| default_step(std::slice::from_ref(&d))))?,
        };
        let atoms = lattice.atoms().expect("discretized law has atoms");
        let file = File::create(path).map_err(cbound::Error::from)?;
        write_lattice_csv(BufWriter::new(file), atoms.values(), atoms.probs())?;
        rec["atoms"] = Value::from(atoms.len());
        rec["out"] = Value::from(path.display().to_string());
    }
    Ok((Doc::record("xi", config(a, None), &rec).render(g.format), 0))
}

pub fn qalpha(g: &Globals, a: &QalphaArgs) -> Out {
    let d = parse_dist(&a.dist)?;
    let m = q_alpha_min(&d, a.delta, a.alpha)?;
    let rec = json!({ "value": num(m.value), "argmin": num(m.arg), "status": to_value(&m.status) });
    Ok((Doc::record("qalpha", config(a, None), &rec).render(g.format), 0))
}

fn event(e: &EventArgs) -> Result<EventSpec, CliError> {
    let kind = match e.event {
        EventArg::Freedman => EventKind::FreedmanUnion,
        EventArg::Azuma => EventKind::AzumaUnion,
        EventArg::Winsorized => EventKind::WinsorizedUnion,
        EventArg::Conjecture => EventKind::ConjectureUnion,
    };
    Ok(EventSpec::new(kind, e.x, e.v2, e.y)?)
}

fn family(f: &FamilyArgs, v2: f64, y: Option<f64>) -> Result<Family, CliError> {
    let need_y = |name: &str| y.ok_or_else(|| CliError::usage(format!("family {name} needs --y")));
    Ok(match f.family {
        FamilyArg::BudgetTwoPoint => families::iid_budget_two_point(f.n, v2),
        FamilyArg::UpperAtom => families::iid_upper_atom(f.n, v2),
        FamilyArg::TwoPoint => families::iid_two_point(f.n),
        FamilyArg::FrontLoading => families::front_loading(f.n, v2),
        FamilyArg::AboveY => families::iid_above_y(f.n, need_y("above-y")?),
        FamilyArg::ThreePointAboveY => families::iid_three_point_above_y(f.n, need_y("three-point-above-y")?),
    })
}

fn verdict(pass: bool) -> u8 {
    if pass {
        0
    } else {
        3
    }
}

pub fn verify_dp(g: &Globals, a: &DpArgs) -> Out {
    let strat = StrategyTree::from_path(&a.strategy)?;
    let r = verify_exact(&strat, &event(&a.event)?)?;
    Ok((Doc::record("verify dp", config(a, None), &r).render(g.format), verdict(r.pass)))
}

pub fn verify_mc(g: &Globals, a: &McArgs) -> Out {
    let strat = StrategyTree::from_path(&a.strategy)?;
    let r = mc_union_prob(&strat, &event(&a.event)?, &McConfig::new(a.trials, g.seed))?;
    Ok((Doc::record("verify mc", config(a, Some(g.seed)), &r).render(g.format), verdict(r.pass)))
}

pub fn verify_probe(g: &Globals, a: &ConjectureArgs) -> Out {
    let fam = family(&a.family, a.v2, Some(a.y))?;
    let r = conjecture_probe(&fam, a.x, a.v2, a.y, a.family.budget, g.seed)?;
    let code = verdict(r.rational_confirms != Some(true));
    Ok((Doc::record("verify probe", config(a, Some(g.seed)), &r).render(g.format), code))
}

pub fn verify_doob(g: &Globals, a: &DoobArgs) -> Out {
    let kind = match a.kind {
        DoobArg::Sum => DoobKind::Sum,
        DoobArg::Norms => DoobKind::Norms,
        DoobArg::Lipschitz => DoobKind::Lipschitz,
    };
    let mut demo = DoobDemo::new(kind, a.n, a.x, a.trials, g.seed);
    demo.sigma = a.sigma;
    if let Some(m) = a.mean_trials {
        demo.mean_trials = m;
    }
    if let Some(l) = &a.lipschitz {
        demo.lipschitz = l
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::usage(format!("--lipschitz `{l}` is not a comma-separated list of numbers")))?;
    }
    let r = doob_demo(&demo)?;
    Ok((Doc::record("verify doob", config(a, Some(g.seed)), &r).render(g.format), verdict(r.pass)))
}

pub fn probe(g: &Globals, a: &SearchArgs) -> Out {
    let ev = event(&a.event)?;
    let fam = family(&a.family, a.event.v2, a.event.y)?;
    let r = adversarial_search(&fam, &ev, a.family.budget, g.seed)?;
    Ok((Doc::record("probe", config(a, Some(g.seed)), &r).render(g.format), verdict(r.within_bound)))
}
