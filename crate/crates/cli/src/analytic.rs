//! `analytics`: large-N reference curves and boundary predictions.

use bellfringe::analytics::{analytic_boundary_sigma, analytic_boundary_t, bell_thresholds, semiclassical_ab};

use crate::output::number;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticRow {
    pub lambda: f64,
    pub regime: Option<&'static str>,
    pub xi2: Option<f64>,
    pub nu: Option<f64>,
    pub a_param: Option<f64>,
    pub b_param: Option<f64>,
    pub boundary_temperature: Option<f64>,
    pub boundary_sigma: Option<f64>,
}

pub fn analytic_rows(lambdas: &[f64], k_fringe: f64) -> Vec<AnalyticRow> {
    lambdas
        .iter()
        .map(|&lambda| {
            let p = semiclassical_ab(lambda).ok();
            AnalyticRow {
                lambda,
                regime: p.map(|p| p.regime.name()),
                xi2: p.map(|p| p.xi2),
                nu: p.map(|p| p.nu),
                a_param: p.map(|p| p.a_param),
                b_param: p.map(|p| p.b_param),
                boundary_temperature: p.and_then(|_| analytic_boundary_t(lambda).ok()),
                boundary_sigma: analytic_boundary_sigma(lambda, k_fringe).ok(),
            }
        })
        .collect()
}

pub fn analytic_csv(rows: &[AnalyticRow]) -> String {
    let opt = |x: Option<f64>| x.map(number).unwrap_or_default();
    let mut out = String::from("lambda,regime,xi2,nu,a_param,b_param,boundary_temperature,boundary_sigma\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            number(r.lambda),
            r.regime.unwrap_or(""),
            opt(r.xi2),
            opt(r.nu),
            opt(r.a_param),
            opt(r.b_param),
            opt(r.boundary_temperature),
            opt(r.boundary_sigma)
        ));
    }
    out
}

pub fn thresholds_csv() -> String {
    let (a, b, c) = bell_thresholds::<f64>();
    format!("threshold,lambda\nattractive_para,{}\nattractive_ferro,{}\nrepulsive,{}\n", number(a), number(b), number(c))
}
