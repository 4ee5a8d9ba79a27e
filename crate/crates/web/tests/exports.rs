use locograph_web::{census_gamma, count_vs_saddle, sample};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn census_matches_cycles() {
    let v = parse(census_gamma(1, 1, 8));
    assert_eq!(v["gamma"], serde_json::json!([0, 0, 0, 1, 1, 1, 1, 1]));
    assert_eq!(v["first_nonzero"], 4);
}

#[test]
fn sample_coordinates_cover_each_torus() {
    let v = parse(sample(2, 2, 150, 5));
    assert_eq!(v["n"], 150);
    let mut total = 0;
    for c in v["components"].as_array().unwrap() {
        let [a, b] = [c["vertices"][0].as_u64().unwrap(), c["vertices"][1].as_u64().unwrap()];
        let coords = c["coords"].as_array().unwrap();
        assert_eq!(coords.len() as u64, b - a);
        let sides: Vec<i64> = c["box_sides"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
        assert_eq!(sides.iter().product::<i64>() as u64, b - a);
        total += b - a;
    }
    assert_eq!(total, 150);
    assert_eq!(v["edges"].as_array().unwrap().len(), 300);
    assert_eq!(parse(sample(2, 2, 150, 5)), v);
}

#[test]
fn errors_are_json() {
    assert!(parse(sample(2, 2, 17, 0))["error"].is_string());
    assert!(parse(census_gamma(2, 1, 10))["error"].is_string());
    assert!(parse(sample(1, 1, 0, 0))["error"].is_string());
}

#[test]
fn saddle_rows_bound_the_count() {
    let v = parse(count_vs_saddle(2, 2, 200));
    let rows = v.as_array().unwrap();
    assert_eq!(rows[0]["n"], 18);
    for row in rows {
        assert!(row["log_cum_exact"].as_f64().unwrap() <= row["saddle_upper"].as_f64().unwrap() + 1e-9);
    }
}
