//! The `verify` report: every operator inequality evaluated on one model.

use std::io::Write;
use std::sync::Arc;

use fractalis_core::field::{constant, difference, FieldRef};
use fractalis_core::fractal::{boundary_consistency_check, interpolation_check, FifData};
use fractalis_core::lp::{
    complex_perturbation_gap, complexify_apply, lp_perturbation_gap, m_constant, ComplexFieldPair,
    QuadratureRule,
};
use fractalis_core::operator::{
    alpha_sequence_convergence, bounded_below_gap, fixed_point_check, linearity_check,
    neumann_inverse, operator_sequence_convergence, perturbation_gap, sampled_operator_norm,
    vanishing_invariance_check, BoundsReport, NetInterpolant, OperatorKind,
};
use fractalis_core::sampling::{random_points, random_smooth_field};
use fractalis_core::{Error, FractalConfig, UniformGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::AlphaModel;
use crate::output::number;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    /// The inequality or identity being tested.
    pub property: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<CheckRow>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    fn bounds(&mut self, name: &str, property: &str, result: Result<BoundsReport, Error>) {
        match result {
            Ok(b) => self.rows.push(CheckRow {
                name: name.into(),
                property: property.into(),
                lhs: b.lhs,
                rhs: b.rhs,
                slack: b.slack,
                pass: b.pass,
                note: None,
            }),
            Err(e) => self.failed(name, property, e),
        }
    }

    fn failed(&mut self, name: &str, property: &str, err: Error) {
        self.rows.push(CheckRow {
            name: name.into(),
            property: property.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            pass: false,
            note: Some(err.to_string()),
        });
    }

    /// Aligned table followed by `CHECK <name> <lhs> <rhs> <pass>` lines.
    pub fn write(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let name_w = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(5);
        let prop_w = self.rows.iter().map(|r| r.property.len()).max().unwrap_or(8).max(8);
        writeln!(
            out,
            "{:<name_w$}  {:<prop_w$}  {:>24}  {:>24}  {:>24}  pass",
            "check", "property", "lhs", "rhs", "slack"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{:<name_w$}  {:<prop_w$}  {:>24}  {:>24}  {:>24}  {}{}",
                r.name,
                r.property,
                number(r.lhs),
                number(r.rhs),
                number(r.slack),
                if r.pass { "yes" } else { "NO" },
                r.note.as_ref().map(|n| format!("  ({n})")).unwrap_or_default()
            )?;
        }
        for r in &self.rows {
            writeln!(out, "CHECK {} {} {} {}", r.name, number(r.lhs), number(r.rhs), r.pass)?;
        }
        writeln!(out, "overall {}", if self.pass() { "pass" } else { "FAIL" })
    }
}

fn aggregate(reports: Result<Vec<BoundsReport>, Error>) -> Result<BoundsReport, Error> {
    let reports = reports?;
    let last = *reports
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty sequence".into()))?;
    Ok(BoundsReport {
        pass: reports.iter().all(|r| r.pass),
        ..last
    })
}

pub struct VerifySettings {
    pub points: usize,
    pub tol: f64,
    pub seed: u64,
    pub p: Vec<f64>,
}

/// Interpolation of the node data.
pub fn verify_fif(data: &FifData, tol: f64) -> VerifyReport {
    let mut report = VerifyReport::default();
    let result = (|| {
        let mut worst = 0.0f64;
        for (i, node) in data.net().nodes().enumerate() {
            worst = worst.max((data.eval(&node, tol)?.value - data.values()[i]).abs());
        }
        Ok(BoundsReport::new(worst, 0.0, tol))
    })();
    report.bounds("interpolation", "A(node) = z", result);
    report
}

pub fn verify_alpha(model: &AlphaModel, cfg: &FractalConfig, s: &VerifySettings) -> VerifyReport {
    let mut report = VerifyReport::default();
    let (tol, points) = (s.tol, s.points);
    let net = cfg.net();
    let k = net.dim();

    report.bounds(
        "interpolation",
        "f^a(node) = f(node)",
        interpolation_check(cfg, tol).map(|r| BoundsReport::new(r.max_error, 0.0, tol)),
    );
    report.bounds(
        "boundary-consistency",
        "adjacent cell recursions agree on faces",
        boundary_consistency_check(cfg, tol, 20, s.seed)
            .map(|r| BoundsReport { pass: r.pass, ..BoundsReport::new(r.max_mismatch, r.allowance, 0.0) }),
    );
    let perturbation = perturbation_gap(cfg, points, tol);
    report.bounds(
        "perturbation",
        "|f^a - f| <= a/(1-a) |f - s|",
        perturbation.as_ref().map(|r| r.gap).map_err(Clone::clone),
    );
    let a = cfg.alpha_sup();
    let alphas: Vec<f64> = (1..=6).map(|n| a / n as f64).collect();
    report.bounds(
        "alpha-sequence",
        "|f^(a/n) - f| <= (a/n)/(1-a/n) |f - s|",
        aggregate(alpha_sequence_convergence(
            net,
            cfg.germ().clone(),
            cfg.base().clone(),
            &alphas,
            points,
            tol,
        )),
    );
    let rule = QuadratureRule::for_net(net, points);
    for &p in &s.p {
        let result = rule.clone().and_then(|rule| lp_perturbation_gap(cfg, p, &rule, tol));
        report.bounds(
            &format!("lp-perturbation-p{p}"),
            "|f^a - f|_p <= a/(1-a) |f - s|_p",
            result,
        );
    }

    let Some(op) = model.operator() else {
        return report;
    };
    report.bounds(
        "perturbation-norm-form",
        "|f^a - f| <= a |Id - D|/(1-a) |f|",
        perturbation.and_then(|r| r.norm_form.ok_or_else(|| Error::Precondition("no operator".into()))),
    );
    let fop = match model.fractal_operator(op) {
        Ok(fop) => fop.with_points(points),
        Err(e) => {
            report.failed("operator", "scale function admissible", Error::Precondition(e.to_string()));
            return report;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let samples: Vec<FieldRef> = (0..20).map(|_| random_smooth_field(k, 3, rng.gen())).collect();
    report.bounds(
        "operator-norm",
        "|F f| / |f| <= 1 + a |Id - D|/(1-a)",
        sampled_operator_norm(&fop, &samples, points, tol),
    );
    let g = random_smooth_field(k, 3, rng.gen());
    let (beta, gamma) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let lin_points = random_points(net.domain(), 200, s.seed);
    report.bounds(
        "linearity",
        "(bf + cg)^a = b f^a + c g^a",
        linearity_check(&fop, cfg.germ().clone(), g.clone(), beta, gamma, &lin_points, tol)
            .map(|r| BoundsReport { pass: r.pass, ..BoundsReport::new(r.max_deviation, r.max_allowance, 0.0) }),
    );
    report.bounds(
        "bounded-below",
        "|f| <= (1+a)/(1-a|D|) |f^a|",
        bounded_below_gap(cfg, points, tol),
    );
    let neumann_grid = UniformGrid::aligned(net, points.min(if k == 1 { 129 } else { 33 }));
    let neumann_tol = tol.max(1e-8);
    match neumann_grid.and_then(|grid| neumann_inverse(&fop, cfg.germ().as_ref(), &grid, neumann_tol, 500)) {
        Ok(sol) => {
            let residual = *sol.residuals.last().unwrap_or(&f64::NAN);
            report.bounds(
                "neumann-inverse",
                "|F(F^-1 g) - g| <= tol",
                Ok(BoundsReport::new(residual, neumann_tol, 0.0)),
            );
            report.bounds("inverse-norm", "|F^-1 g| <= (1+a)/(1-a|D|) |g|", Ok(sol.norm_check));
            report.bounds(
                "neumann-contraction",
                "residual ratio <= 1.1 a|Id-D|/(1-a)",
                Ok(BoundsReport::new(sol.observed_contraction, sol.contraction_bound, 0.1 * sol.contraction_bound)),
            );
        }
        Err(e) => report.failed("neumann-inverse", "a < 1/(1 + |Id - D|)", e),
    }
    let fixed: Result<FieldRef, Error> = match op.kind() {
        OperatorKind::Blend { .. } => {
            NetInterpolant::new(net, cfg.germ().as_ref()).map(|l| Arc::new(l) as FieldRef)
        }
        OperatorKind::Multiplication { .. } => Ok(constant(0.0, k)),
    };
    report.bounds(
        "fixed-point",
        "Df = f implies f^a = f",
        fixed.and_then(|f| fixed_point_check(&fop, f, points, tol)),
    );
    report.bounds(
        "operator-sequence",
        "|f^a(D_n) - f| <= a/(1-a) (1/n) |Lf - f|",
        aggregate(operator_sequence_convergence(
            net,
            cfg.germ().clone(),
            cfg.alpha().clone(),
            &[1, 2, 4, 8],
            model.admission,
            tol,
        )),
    );
    let vanishing = NetInterpolant::new(net, cfg.germ().as_ref())
        .and_then(|l| difference(cfg.germ().clone(), Arc::new(l)))
        .and_then(|h| vanishing_invariance_check(&fop, h, 2, 3, s.seed, tol));
    report.bounds(
        "vanishing-invariance",
        "g = 0 on nodes implies F(g) = 0 on nodes",
        vanishing.map(|r| BoundsReport { pass: r.pass, ..BoundsReport::new(r.max_node_magnitude, r.allowance, 0.0) }),
    );
    for &p in &s.p {
        let result = ComplexFieldPair::new(cfg.germ().clone(), g.clone()).and_then(|pair| {
            let complex = complexify_apply(&fop, &pair)?;
            let m = m_constant(p)?.general;
            let rule = QuadratureRule::for_net(net, points)?;
            complex_perturbation_gap(&complex, p, m, &rule, tol)
        });
        report.bounds(
            &format!("complex-perturbation-p{p}"),
            "|F_C f - f|_p <= M a |F_C f - D_C f|_p",
            result,
        );
    }
    report
}
