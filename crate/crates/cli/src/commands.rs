use std::path::PathBuf;

use csext::dissipative::{check_defect_identities, dissipativity_margin};
use csext::extensions::{bounded_certificate, check_defect_symmetry, t_z0};
use csext::linalg::{fro, operator_norm};
use csext::oracle::{certify_center, coverage_search, grid_enumerate_2x2};
use csext::{
    bounded_extend, cayley_forward, center_w0, cself_contractive_extend, dissipative_uniqueness, glazman_extend,
    operator_ball, uniqueness_report, BoundedParam, Certificate, Complex64, ContractiveParam, DissipativeOperator,
    ExtensionKit, ProblemInstance, Tolerance,
};
use serde_json::{json, Value};

use crate::io::{
    complex_json, instance_json, load_instance, load_param, matrix_json, to_value, CliError, CliResult, InstanceFile,
    Kind, ParamFile,
};

const UNIQUENESS_PROBES: usize = 32;

pub struct Options {
    pub input: PathBuf,
    pub param: Option<PathBuf>,
    pub tol: Tolerance,
    pub seed: u64,
    pub trials: usize,
    pub lambda: Option<Complex64>,
    pub grid_step: Option<f64>,
}

impl Options {
    fn lambda(&self, inst: &InstanceFile) -> Complex64 {
        self.lambda.or(inst.lambda).unwrap_or(Complex64::new(0.0, 1.0))
    }

    fn param(&self, dim: usize) -> CliResult<Option<ParamFile>> {
        self.param.as_deref().map(|p| load_param(p, dim)).transpose()
    }
}

struct Validation {
    c_symmetry_residual: f64,
    c_symmetric: bool,
    norm: f64,
    contraction: bool,
    margin: f64,
    dissipative: bool,
}

fn inspect(inst: &InstanceFile, tol: Tolerance) -> CliResult<Validation> {
    let norm = inst.op.norm();
    let scale = 1.0 + norm;
    let c_symmetry_residual = inst.op.c_symmetry_residual(&inst.conj)?;
    let margin = dissipativity_margin(&inst.op);
    Ok(Validation {
        c_symmetry_residual,
        c_symmetric: c_symmetry_residual <= tol.residual_tol * scale,
        norm,
        contraction: norm <= 1.0 + tol.residual_tol,
        margin,
        dissipative: margin >= -tol.residual_tol * scale,
    })
}

fn require(inst: &InstanceFile, kind: Kind, tol: Tolerance) -> CliResult<Validation> {
    let v = inspect(inst, tol)?;
    if !v.c_symmetric {
        return Err(CliError::validation(
            "NotCSymmetric",
            "operator is not C-symmetric",
            v.c_symmetry_residual,
        ));
    }
    match kind {
        Kind::Contraction if !v.contraction => Err(CliError::validation(
            "NotContraction",
            "operator is not a contraction",
            v.norm,
        )),
        Kind::Dissipative if !v.dissipative => Err(CliError::validation(
            "NotDissipative",
            "operator is not dissipative",
            v.margin,
        )),
        _ => Ok(v),
    }
}

fn kit(inst: &InstanceFile, opts: &Options) -> CliResult<ExtensionKit> {
    require(inst, Kind::Contraction, opts.tol)?;
    Ok(csext::build_kit(&inst.op, &inst.conj, opts.tol)?)
}

fn certificate_json(cert: &Certificate) -> Value {
    json!({ "passed": cert.passed(), "checks": to_value(&cert.checks) })
}

fn header(command: &str, inst: &InstanceFile) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("dim".into(), json!(inst.op.ambient_dim()));
    m.insert("domain_dim".into(), json!(inst.op.domain_dim()));
    m
}

fn extend(mut base: serde_json::Map<String, Value>, extra: Value) -> Value {
    if let Value::Object(more) = extra {
        base.extend(more);
    }
    Value::Object(base)
}

pub fn validate(opts: &Options) -> CliResult<Value> {
    let inst = load_instance(&opts.input, opts.tol)?;
    let v = require(&inst, inst.kind, opts.tol)?;
    Ok(extend(
        header("validate", &inst),
        json!({
            "kind": inst.kind,
            "c_symmetric": v.c_symmetric,
            "c_symmetry_residual": v.c_symmetry_residual,
            "contraction": v.contraction,
            "norm": v.norm,
            "dissipative": v.dissipative,
            "dissipativity_margin": v.margin,
        }),
    ))
}

pub fn extend_bounded(opts: &Options) -> CliResult<Value> {
    let inst = load_instance(&opts.input, opts.tol)?;
    let kit = kit(&inst, opts)?;
    let n = kit.ambient_dim();
    let param = match opts.param(n)? {
        None => BoundedParam::Tz(csext::linalg::zeros(n, n)),
        Some(ParamFile { variant, matrix }) => match variant.as_deref() {
            None | Some("tz") => BoundedParam::Tz(matrix),
            Some("raikh") => BoundedParam::Raikh(matrix),
            Some(other) => return Err(CliError::Parse(format!("unknown bounded variant {other:?}"))),
        },
    };
    let t = bounded_extend(&kit, &param)?;
    let cert = bounded_certificate(&kit, &t);
    Ok(extend(
        header("extend-bounded", &inst),
        json!({
            "variant": param.variant(),
            "extension": matrix_json(&t),
            "base": matrix_json(&t_z0(&kit)),
            "certificate": certificate_json(&cert),
            "extension_instance": instance_json(&inst.conj, &t, Kind::Bounded),
        }),
    ))
}

pub fn extend_contractive(opts: &Options) -> CliResult<Value> {
    let inst = load_instance(&opts.input, opts.tol)?;
    let kit = kit(&inst, opts)?;
    let n = kit.ambient_dim();
    let param = match opts.param(n)? {
        None => ContractiveParam::zero(n),
        Some(p) => ContractiveParam::project(&kit, &p.matrix)?,
    };
    let ext = cself_contractive_extend(&kit, &param)?;
    Ok(extend(
        header("extend-contractive", &inst),
        json!({
            "parameter": matrix_json(param.matrix()),
            "extension": matrix_json(&ext.w),
            "crandall_parameter": matrix_json(&ext.k),
            "norm": operator_norm(&ext.w),
            "certificate": certificate_json(&ext.certificate),
            "defect_symmetry": certificate_json(&check_defect_symmetry(&kit, &ext.w)),
            "extension_instance": instance_json(&inst.conj, &ext.w, Kind::Contraction),
        }),
    ))
}

pub fn center(opts: &Options) -> CliResult<Value> {
    let inst = load_instance(&opts.input, opts.tol)?;
    let kit = kit(&inst, opts)?;
    let c = center_w0(&kit);
    let (_, worst) = certify_center(&kit);
    Ok(extend(
        header("center", &inst),
        json!({
            "center": matrix_json(&c.w0),
            "crandall_center": matrix_json(&c.crandall_center),
            "center_gap": fro(&(&c.w0 - &c.crandall_center)),
            "expanded_residual": c.expanded_residual,
            "corrected_residual": c.corrected_residual,
            "certificate_residual": worst,
            "extension_instance": instance_json(&inst.conj, &c.w0, Kind::Contraction),
        }),
    ))
}

pub fn ball(opts: &Options) -> CliResult<Value> {
    let inst = load_instance(&opts.input, opts.tol)?;
    let kit = kit(&inst, opts)?;
    let b = operator_ball(&kit)?;
    Ok(extend(
        header("ball", &inst),
        json!({
            "center": matrix_json(&b.center),
            "left_radius": matrix_json(&b.r_l),
            "right_radius": matrix_json(&b.r_r),
            "left_radius_norm": operator_norm(&b.r_l),
            "shorted_residual": b.shorted_residual,
            "right_radius_residual": b.right_radius_residual,
            "is_point": b.is_point(opts.tol.residual_tol),
            "extension_instance": instance_json(&inst.conj, &b.center, Kind::Contraction),
        }),
    ))
}

pub fn unique(opts: &Options) -> CliResult<Value> {
    let inst = load_instance(&opts.input, opts.tol)?;
    let kit = kit(&inst, opts)?;
    let report = uniqueness_report(&kit, UNIQUENESS_PROBES, opts.seed)?;
    Ok(extend(header("unique", &inst), to_value(&report)))
}

fn dissipative(inst: &InstanceFile, opts: &Options) -> CliResult<DissipativeOperator> {
    Ok(DissipativeOperator::new(inst.op.clone(), opts.tol)?)
}

pub fn cayley(opts: &Options) -> CliResult<Value> {
    let inst = load_instance(&opts.input, opts.tol)?;
    let t = dissipative(&inst, opts)?;
    let lambda = opts.lambda(&inst);
    let data = cayley_forward(&t, lambda, Some(&inst.conj), opts.tol)?;
    let v = &data.v_lambda;
    let mut out = json!({
        "lambda": complex_json(lambda),
        "dissipativity_margin": t.margin(),
        "cayley_domain_basis": matrix_json(v.domain().basis()),
        "cayley_action": matrix_json(v.action()),
        "cayley_norm": v.norm(),
        "deficiency_basis": matrix_json(data.n_lambda.basis()),
        "maximal_extension": matrix_json(&data.t_tilde),
        "cayley_residual": data.cayley_residual,
        "cayley_c_symmetry_residual": v.c_symmetry_residual(&inst.conj)?,
    });
    if let Some(g) = &data.g_lambda {
        out["g_lambda_basis"] = matrix_json(g.basis());
    }
    if t.is_maximal() {
        out["defect_identities"] = certificate_json(&check_defect_identities(&t, lambda, 16, opts.seed, opts.tol)?);
    }
    Ok(extend(header("cayley", &inst), out))
}

pub fn glazman(opts: &Options) -> CliResult<Value> {
    let inst = load_instance(&opts.input, opts.tol)?;
    let t = dissipative(&inst, opts)?;
    let lambda = opts.lambda(&inst);
    let param = match opts.param(inst.op.ambient_dim())? {
        None => None,
        Some(p) => {
            let kit = csext::dissipative::cayley_kit(&t, &inst.conj, lambda, opts.tol)?;
            Some(ContractiveParam::project(&kit, &p.matrix)?.into_matrix())
        }
    };
    let ext = glazman_extend(&t, &inst.conj, lambda, param.as_ref(), opts.tol)?;
    let uniq = dissipative_uniqueness(&t, &inst.conj, lambda, UNIQUENESS_PROBES, opts.seed, opts.tol)?;
    Ok(extend(
        header("glazman", &inst),
        json!({
            "lambda": complex_json(lambda),
            "extension": matrix_json(&ext.matrix),
            "cayley_extension": matrix_json(&ext.contraction),
            "certificate": certificate_json(&ext.certificate),
            "unique": uniq.unique,
            "uniqueness": to_value(&uniq),
            "extension_instance": instance_json(&inst.conj, &ext.matrix, Kind::Dissipative),
        }),
    ))
}

pub fn fuzz(opts: &Options) -> CliResult<Value> {
    let file = load_instance(&opts.input, opts.tol)?;
    kit(&file, opts)?;
    if opts.trials == 0 {
        return Err(CliError::Parse("--trials must be positive".into()));
    }
    let inst = ProblemInstance {
        conj: file.conj.clone(),
        v: file.op.clone(),
        seed: opts.seed,
    };
    let report = coverage_search(&inst, opts.trials, opts.tol)?;
    let mut out = json!({
        "seed": opts.seed,
        "search": to_value(&report),
        "witnesses": report.witnesses.iter().map(matrix_json).collect::<Vec<_>>(),
        "passed": report.witnesses.is_empty() && report.max_distance_to_formula_set <= opts.tol.residual_tol,
    });
    if let Some(step) = opts.grid_step {
        if !(step > 0.0) {
            return Err(CliError::Parse("--grid-step must be positive".into()));
        }
        out["grid"] = to_value(&grid_enumerate_2x2(&inst, step, opts.tol)?);
    }
    Ok(extend(header("fuzz", &file), out))
}
