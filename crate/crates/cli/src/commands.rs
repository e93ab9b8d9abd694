use serde_json::Value;
use thetaquad::bounds::{
    certify, CertificateKind, DerivativeBand, ErrorCertificate, KnownNorms, NormData, Provenance,
    Side,
};
use thetaquad::builtin::Builtin;
use thetaquad::integrate::{
    composite_integrate, composite_value, end_to_end_sharpness, reference_integral,
    sharpness_identity, CompositeResult, PanelNorms,
};
use thetaquad::kernel::{cross_check, kernel_stats_closed, RuleSpec};
use thetaquad::rules::RulePreset;
use thetaquad::sweep::{theta_grid, theta_sweep};
use thetaquad::{Execution, QuadError, Result};

use crate::args::{
    BoundArgs, BoundChoice, CertificateArgs, Cli, Command, Format, IntegrateArgs, KernelArgs,
    RuleArgs, SharpnessArgs, SweepArgs,
};
use crate::output::{num, opt, table_csv, Record};

pub fn dispatch(cli: &Cli, tol: f64) -> Result<String> {
    match &cli.command {
        Command::Integrate(a) => integrate(a, tol),
        Command::Bound(a) => bound(a),
        Command::Kernel(a) => kernel(a),
        Command::Sweep(a) => sweep(a, tol),
        Command::Sharpness(a) => sharpness(a, tol),
    }
}

fn invalid(msg: impl Into<String>) -> QuadError {
    QuadError::InvalidArgument(msg.into())
}

fn resolve_spec(r: &RuleArgs) -> Result<RuleSpec> {
    let theta = match (&r.rule, r.theta) {
        (Some(name), _) => name.parse::<RulePreset>()?.theta(),
        (None, Some(t)) => t,
        (None, None) => return Err(QuadError::Validation("one of --theta or --rule is required".into())),
    };
    RuleSpec::new(theta, r.n, r.a, r.b)
}

fn rule_inputs(rec: &mut Record, r: &RuleArgs, spec: &RuleSpec) {
    rec.input("n", r.n);
    if let Some(name) = &r.rule {
        rec.input("rule", name.as_str());
    }
    rec.input("theta", num(spec.theta()));
    rec.input("a", num(r.a));
    rec.input("b", num(r.b));
}

fn kinds_for(choice: BoundChoice, n: usize) -> Vec<CertificateKind> {
    use CertificateKind::*;
    let odd = n % 2 == 1;
    match choice {
        BoundChoice::L1 => vec![L1],
        BoundChoice::L2 => vec![L2],
        BoundChoice::Linf => vec![Linf],
        BoundChoice::Band if odd => vec![BandOdd],
        BoundChoice::Band => vec![PerturbedEvenLower, PerturbedEvenUpper],
        BoundChoice::BandLower if odd => vec![OneSidedOddLower],
        BoundChoice::BandLower => vec![PerturbedEvenLower],
        BoundChoice::BandUpper if odd => vec![OneSidedOddUpper],
        BoundChoice::BandUpper => vec![PerturbedEvenUpper],
        BoundChoice::Sharp if odd => vec![SharpOdd],
        BoundChoice::Sharp => vec![SharpEven],
    }
}

fn choice_name(choice: BoundChoice) -> &'static str {
    match choice {
        BoundChoice::L1 => "l1",
        BoundChoice::L2 => "l2",
        BoundChoice::Linf => "linf",
        BoundChoice::Band => "band",
        BoundChoice::BandLower => "band-lower",
        BoundChoice::BandUpper => "band-upper",
        BoundChoice::Sharp => "sharp",
    }
}

/// Norms and band for a certificate: flags first, then the builtin's exact
/// values. Any flag makes the provenance user-supplied.
struct CertificateData {
    norms: NormData,
    band: Option<DerivativeBand>,
    has_lower: bool,
    has_upper: bool,
    user_supplied: bool,
}

impl CertificateData {
    fn resolve(cert: &CertificateArgs, f: Option<&Builtin>, n: usize, a: f64, b: f64) -> Result<Self> {
        let (mut norms, exact_band) = match f {
            Some(f) => (f.norm_data(n, a, b)?, Some(f.band(n, a, b)?)),
            None => (NormData::default(), None),
        };
        let flags = [cert.l1, cert.l2, cert.linf, cert.lower, cert.upper, cert.rate, cert.sigma];
        let user_supplied = flags.iter().any(Option::is_some);
        norms.l1 = cert.l1.or(norms.l1);
        norms.l2 = cert.l2.or(norms.l2);
        norms.linf = cert.linf.or(norms.linf);
        norms.endpoint_diff_rate = cert.rate.or(norms.endpoint_diff_rate);
        norms.sigma = cert.sigma.or(norms.sigma);
        norms.provenance = if user_supplied || f.is_none() {
            Provenance::UserSupplied
        } else {
            Provenance::Exact
        };
        let lower = cert.lower.or(exact_band.map(|b| b.lower));
        let upper = cert.upper.or(exact_band.map(|b| b.upper));
        // A one-sided certificate reads only its own edge; the other edge of
        // the band is then a stand-in equal to the known one.
        let band = match (lower, upper) {
            (Some(l), Some(u)) => Some(DerivativeBand::new(l, u, n)?),
            (Some(l), None) => Some(DerivativeBand::new(l, l, n)?),
            (None, Some(u)) => Some(DerivativeBand::new(u, u, n)?),
            (None, None) => None,
        };
        Ok(Self {
            norms,
            band,
            has_lower: lower.is_some(),
            has_upper: upper.is_some(),
            user_supplied,
        })
    }

    fn check(&self, kind: CertificateKind, rate_from_f: bool) -> Result<()> {
        use CertificateKind::*;
        let missing = |what: &str| Err(QuadError::Validation(format!("{kind} certificate needs {what}")));
        let needs_rate = matches!(kind, OneSidedOddLower | OneSidedOddUpper | PerturbedEvenLower | PerturbedEvenUpper);
        if needs_rate && !rate_from_f && self.norms.endpoint_diff_rate.is_none() {
            return missing("--rate");
        }
        match kind {
            L1 if self.norms.l1.is_none() => missing("--l1"),
            L2 if self.norms.l2.is_none() => missing("--l2"),
            Linf if self.norms.linf.is_none() => missing("--linf"),
            BandOdd if !(self.has_lower && self.has_upper) => missing("--lower and --upper"),
            OneSidedOddLower | PerturbedEvenLower if !self.has_lower => missing("--lower"),
            OneSidedOddUpper | PerturbedEvenUpper if !self.has_upper => missing("--upper"),
            SharpOdd | SharpEven if self.norms.sigma.is_none() => missing("--sigma"),
            _ => Ok(()),
        }
    }
}

fn cert_inputs(rec: &mut Record, cert: &CertificateArgs) {
    for (k, v) in [
        ("l1", cert.l1),
        ("l2", cert.l2),
        ("linf", cert.linf),
        ("lower", cert.lower),
        ("upper", cert.upper),
        ("rate", cert.rate),
        ("sigma", cert.sigma),
    ] {
        if let Some(v) = v {
            rec.input(k, num(v));
        }
    }
}

fn pick_min<T>(items: Vec<T>, key: impl Fn(&T) -> f64) -> T {
    items
        .into_iter()
        .reduce(|best, x| if key(&x) < key(&best) { x } else { best })
        .expect("at least one certificate kind")
}

fn integrate(args: &IntegrateArgs, tol: f64) -> Result<String> {
    let f = Builtin::parse(&args.f)?;
    let spec = resolve_spec(&args.rule)?;
    if args.panels == 0 {
        return Err(QuadError::Validation("--panels must be at least 1".into()));
    }
    if args.perturbed && !spec.is_even() {
        return Err(invalid("--perturbed needs even n"));
    }

    let mut rec = Record::new("integrate");
    rec.input("f", f.to_string());
    rule_inputs(&mut rec, &args.rule, &spec);
    rec.input("panels", args.panels);
    rec.input("perturbed", args.perturbed);
    if let Some(choice) = args.cert.bound {
        rec.input("bound", choice_name(choice));
    }
    cert_inputs(&mut rec, &args.cert);

    let certified: Option<CompositeResult> = match args.cert.bound {
        None => None,
        Some(choice) => {
            let kinds = kinds_for(choice, spec.n());
            let covers = kinds[0].covers_perturbed_rule();
            if args.perturbed && !covers {
                return Err(invalid(format!(
                    "the {} certificate bounds the unperturbed rule; drop --perturbed",
                    choice_name(choice)
                )));
            }
            let data = CertificateData::resolve(&args.cert, Some(&f), spec.n(), spec.a(), spec.b())?;
            let source = if data.user_supplied {
                PanelNorms::Global {
                    norms: data.norms,
                    band: data.band,
                }
            } else {
                PanelNorms::Known(&f)
            };
            let results = kinds
                .iter()
                .map(|&k| {
                    data.check(k, true)?;
                    composite_integrate(&f, &spec, args.panels, k, &source)
                })
                .collect::<Result<Vec<_>>>()?;
            Some(pick_min(results, |r| r.total_bound))
        }
    };
    let (value, perturbed) = match &certified {
        Some(r) => (r.value, r.perturbed),
        None => (
            composite_value(&f, &spec, args.panels, args.perturbed, Execution::default())?,
            args.perturbed,
        ),
    };
    let exact = reference_integral(&f, spec.a(), spec.b(), tol)?;

    rec.result("value", num(value));
    rec.result("exact", num(exact));
    rec.result("true_error", num((value - exact).abs()));
    rec.result("perturbed", perturbed);
    if let Some(r) = &certified {
        rec.result("certificate", r.certificate_kind.name());
        rec.result("bound", num(r.total_bound));
        rec.result("rigor", r.rigor.name());
        rec.result(
            "per_panel_bound",
            Value::Array(r.per_panel_bound.iter().map(|&b| num(b)).collect()),
        );
    }
    rec.render(args.format)
}

fn bound(args: &BoundArgs) -> Result<String> {
    let f = args.f.as_deref().map(Builtin::parse).transpose()?;
    let spec = resolve_spec(&args.rule)?;
    let choice = args
        .cert
        .bound
        .ok_or_else(|| QuadError::Validation("bound needs --bound".into()))?;

    let mut rec = Record::new("bound");
    if let Some(f) = &f {
        rec.input("f", f.to_string());
    }
    rule_inputs(&mut rec, &args.rule, &spec);
    rec.input("bound", choice_name(choice));
    cert_inputs(&mut rec, &args.cert);

    let data = CertificateData::resolve(&args.cert, f.as_ref(), spec.n(), spec.a(), spec.b())?;
    let certs = kinds_for(choice, spec.n())
        .into_iter()
        .map(|k| {
            data.check(k, false)?;
            certify(&spec, k, &data.norms, data.band.as_ref())
        })
        .collect::<Result<Vec<_>>>()?;
    let cert: ErrorCertificate = pick_min(certs, |c| c.bound);

    rec.result("certificate", cert.kind.name());
    rec.result("bound", num(cert.bound));
    rec.result("covers_perturbed_rule", cert.covers_perturbed_rule);
    rec.result("rigor", cert.rigor.name());
    let used = &cert.inputs;
    for (k, v) in [
        ("l1", used.norms.l1),
        ("l2", used.norms.l2),
        ("linf", used.norms.linf),
        ("rate", used.norms.endpoint_diff_rate),
        ("sigma", used.norms.sigma),
        ("lower", used.band.map(|b| b.lower)),
        ("upper", used.band.map(|b| b.upper)),
    ] {
        if let Some(v) = v {
            rec.result(&format!("used_{k}"), num(v));
        }
    }
    if let Some((side, edge)) = used.band_edge {
        let key = match side {
            Side::Lower => "used_lower",
            Side::Upper => "used_upper",
        };
        rec.result(key, num(edge));
    }
    rec.render(args.format)
}

fn kernel(args: &KernelArgs) -> Result<String> {
    let spec = resolve_spec(&args.rule)?;
    let mut rec = Record::new("kernel");
    rule_inputs(&mut rec, &args.rule, &spec);
    rec.input("brute_force", args.brute_force);

    let closed = kernel_stats_closed(&spec);
    rec.result("integral", num(closed.integral));
    rec.result("abs_integral", num(closed.abs_integral));
    rec.result("max_abs", num(closed.max_abs));
    rec.result("l2_sq", num(closed.l2_sq));
    rec.result("centered_max", opt(closed.centered_max_abs));
    if args.brute_force {
        let check = cross_check(&spec);
        let brute = check.brute;
        rec.result("brute_integral", num(brute.integral));
        rec.result("brute_abs_integral", num(brute.abs_integral));
        rec.result("brute_max_abs", num(brute.max_abs));
        rec.result("brute_l2_sq", num(brute.l2_sq));
        rec.result("brute_centered_max", opt(brute.centered_max_abs));
        rec.result("max_rel_diff", num(check.max_rel_diff));
    }
    rec.render(args.format)
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || QuadError::Validation(format!("--theta-grid expects start:step:end, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    theta_grid(v[0], v[1], v[2])
}

fn sweep(args: &SweepArgs, tol: f64) -> Result<String> {
    let f = Builtin::parse(&args.f)?;
    let thetas = parse_grid(&args.theta_grid)?;
    RuleSpec::new(thetas[0], args.n, args.a, args.b)?;
    let rows = theta_sweep(&f, args.n, args.a, args.b, &thetas, tol, Execution::default())?;

    let even = args.n % 2 == 0;
    let mut header: Vec<String> = vec!["theta".into(), "f_n".into(), "true_error".into()];
    if even {
        header.push("perturbed_error".into());
    }
    if let Some(first) = rows.first() {
        header.extend(first.certificates.iter().map(|c| format!("bound_{}", c.kind.name())));
    }
    let table: Vec<Vec<Value>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![num(r.theta), num(r.f_n_value), num(r.true_error)];
            if even {
                row.push(opt(r.perturbed_error));
            }
            row.extend(r.certificates.iter().map(|c| num(c.bound)));
            row
        })
        .collect();

    match args.format {
        Format::Csv => table_csv(&header, &table),
        Format::Json => {
            let mut rec = Record::new("sweep");
            rec.input("f", f.to_string());
            rec.input("n", args.n);
            rec.input("a", num(args.a));
            rec.input("b", num(args.b));
            rec.input("theta_grid", args.theta_grid.as_str());
            let objects: Vec<Value> = table
                .into_iter()
                .map(|row| Value::Object(header.iter().cloned().zip(row).collect()))
                .collect();
            rec.result("rows", Value::Array(objects));
            Ok(rec.to_json())
        }
    }
}

fn sharpness(args: &SharpnessArgs, tol: f64) -> Result<String> {
    let spec = resolve_spec(&args.rule)?;
    let mut rec = Record::new("sharpness");
    rule_inputs(&mut rec, &args.rule, &spec);
    rec.input("end_to_end", args.end_to_end);

    let report = sharpness_identity(&spec)?;
    rec.result("lhs", num(report.lhs));
    rec.result("rhs", num(report.rhs));
    rec.result("ratio", num(report.ratio));
    rec.result("sharp", report.is_sharp());
    if args.end_to_end {
        let e2e = end_to_end_sharpness(&spec, tol)?;
        rec.result("end_to_end_true_error", num(e2e.true_error));
        rec.result("end_to_end_rel_diff", num(e2e.rel_diff));
    }
    rec.render(args.format)
}
