//! wasm-bindgen surface for the static demo page in `www/`.
//!
//! Every export takes the instance as whitespace separated text and returns
//! JSON; errors come back as JS strings.

use denumerant::arith::{fmt_rat, Int};
use denumerant::factor::factorize;
use denumerant::oracle::dp_table;
use denumerant::pipeline::{top_k, KnapsackInstance};
use denumerant::poset::largest_nontrivial_sublists;
use num_traits::ToPrimitive;
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_CURVE_POINTS: u32 = 20_000;

fn parse_entries(text: &str) -> Result<Vec<Int>, String> {
    let v = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Int>().map_err(|_| format!("'{s}' is not an integer")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() < 2 {
        return Err("enter at least two positive integers".into());
    }
    Ok(v)
}

fn instance(text: &str) -> Result<KnapsackInstance, String> {
    KnapsackInstance::new(parse_entries(text)?).map_err(|e| e.to_string())
}

pub fn topk_formula_json(entries: &str, k: u32) -> Result<String, String> {
    let inst = instance(entries)?;
    let k = (k as usize).min(inst.n());
    let res = top_k(&inst, k).map_err(|e| e.to_string())?;
    let degrees: Vec<_> = res
        .coefficients
        .iter()
        .rev()
        .map(|(m, p)| json!({ "degree": m, "coefficient": p.display_with("t"), "terms": p.len() }))
        .collect();
    Ok(json!({
        "n": inst.n(),
        "k": k,
        "gcd": inst.gcd().to_string(),
        "formula": res.display_formula(),
        "degrees": degrees,
        "period_bound": res.period_bound.to_string(),
    })
    .to_string())
}

/// Exact counts next to the truncated formula on `t = 0..=t_max`.
pub fn counts_curve_json(entries: &str, k: u32, t_max: u32) -> Result<String, String> {
    if t_max > MAX_CURVE_POINTS {
        return Err(format!("t_max is limited to {MAX_CURVE_POINTS}"));
    }
    let alphas = parse_entries(entries)?;
    if alphas.iter().any(|a| a.to_usize().is_none_or(|a| a > 1_000_000)) {
        return Err("entries above 10^6 are too large for the counting curve".into());
    }
    let inst = KnapsackInstance::new(alphas.clone()).map_err(|e| e.to_string())?;
    let k = (k as usize).min(inst.n());
    let res = top_k(&inst, k).map_err(|e| e.to_string())?;
    let counts = dp_table(&alphas, t_max as usize);
    let eval = res.evaluator(1 << 16);
    let g = inst.gcd().to_u32().unwrap_or(u32::MAX);
    let approx: Vec<f64> = (0..=t_max)
        .map(|t| if t % g == 0 { eval(&Int::from(t / g)).to_f64().unwrap_or(f64::NAN) } else { 0.0 })
        .collect();
    let exact: Vec<f64> = counts.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    Ok(json!({ "k": k, "exact": exact, "approx": approx }).to_string())
}

pub fn predict_periodicity_json(entries: &str) -> Result<String, String> {
    let alphas = parse_entries(entries)?;
    let factored: Vec<_> = alphas.iter().map(|a| factorize(a).0).collect();
    let fan = largest_nontrivial_sublists(&alphas, &factored).map_err(|e| e.to_string())?;
    let spectrum: Vec<_> = fan
        .mobius
        .iter()
        .map(|(f, mu)| json!({ "f": f.to_string(), "mu": mu.to_string() }))
        .collect();
    Ok(json!({
        "factorizations": factored.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        "ell": fan.ell,
        "first_nonconstant_degree": fan.first_nonconstant_degree(),
        "sublists": fan.sublists.iter().map(|s| s.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "spectrum": spectrum,
        "period": fan.predicted_period().to_string(),
        "leading": fmt_rat(&KnapsackInstance::new(alphas.clone()).map_err(|e| e.to_string())?.leading_coefficient()),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn topk_formula(entries: &str, k: u32) -> Result<String, JsValue> {
    topk_formula_json(entries, k).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn counts_curve(entries: &str, k: u32, t_max: u32) -> Result<String, JsValue> {
    counts_curve_json(entries, k, t_max).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn predict_periodicity(entries: &str) -> Result<String, JsValue> {
    predict_periodicity_json(entries).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn formula_for_six_two_three() {
        let v: Value = serde_json::from_str(&topk_formula_json("6 2 3", 2).unwrap()).unwrap();
        assert!(v["formula"].as_str().unwrap().starts_with("1/72 t^2 + (1/4"));
        assert_eq!(v["degrees"].as_array().unwrap().len(), 3);
        assert_eq!(v["period_bound"], "6");
        let v: Value = serde_json::from_str(&topk_formula_json("6, 2, 3", 9).unwrap()).unwrap();
        assert_eq!(v["k"], 2);
    }

    #[test]
    fn curve_matches_counts_in_full_mode() {
        let v: Value = serde_json::from_str(&counts_curve_json("6 2 3", 2, 30).unwrap()).unwrap();
        assert_eq!(v["exact"], v["approx"]);
        assert_eq!(v["exact"][6], 3.0);
        let v: Value = serde_json::from_str(&counts_curve_json("4 6 10", 2, 12).unwrap()).unwrap();
        assert_eq!(v["exact"], v["approx"]);
        assert!(counts_curve_json("6 2 3", 1, MAX_CURVE_POINTS + 1).is_err());
    }

    #[test]
    fn periodicity_prediction() {
        let v: Value = serde_json::from_str(&predict_periodicity_json("1 2 3 4 5 6 7 8").unwrap()).unwrap();
        assert_eq!(v["ell"], 4);
        assert_eq!(v["first_nonconstant_degree"], 3);
        assert_eq!(v["period"], "2");
        assert!(predict_periodicity_json("4 6").is_err());
        assert!(predict_periodicity_json("7").is_err());
        assert!(predict_periodicity_json("1 x").is_err());
    }
}
