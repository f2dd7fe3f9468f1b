//! Parser entry points: the fuzz corpus replayed as regression inputs, plus
//! random inputs that must never panic.

use std::fs;
use std::path::PathBuf;

use dglm_ppm::config::RunConfig;
use dglm_ppm::gibbs::ChainSample;
use dglm_ppm::io::parse_series_csv;
use dglm_ppm::partition::{to_indicator, to_partition, IndicatorVector, Partition};
use proptest::prelude::*;

fn corpus(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files.iter().map(|p| fs::read_to_string(p).unwrap()).collect()
}

fn check_series(text: &str) {
    if let Ok(s) = parse_series_csv(text) {
        assert_eq!(s.t.len(), s.y.len());
        assert!(s.y.iter().all(|v| v.is_finite()));
        assert!(s.x.is_empty() || s.x.len() == s.y.len());
    }
}

fn check_config(text: &str) {
    if let Ok(cfg) = RunConfig::from_toml_str(text) {
        assert_eq!(RunConfig::from_toml_str(&cfg.to_toml()).unwrap(), cfg);
    }
}

fn check_record(line: &str) {
    if let Ok(s) = ChainSample::from_json_line(line) {
        assert!(s.delta > 0.0 && s.delta < 1.0);
        assert_eq!(ChainSample::from_json_line(&s.to_json_line()).unwrap().u, s.u);
    }
}

fn check_partition(text: &str) {
    if let Ok(p) = Partition::from_json(text) {
        assert_eq!(to_partition(&to_indicator(&p)), p);
        assert_eq!(Partition::from_json(&p.to_json()).unwrap(), p);
    }
}

fn check_indicator(text: &str) {
    if let Ok(u) = text.parse::<IndicatorVector>() {
        assert_eq!(u.to_string().parse::<IndicatorVector>().unwrap(), u);
        assert_eq!(u.num_blocks(), u.n() - u.ones());
    }
}

#[test]
fn corpus_seeds() {
    let parsed = corpus("series_csv")
        .iter()
        .filter(|t| parse_series_csv(t).is_ok())
        .count();
    assert!(parsed >= 3);
    corpus("series_csv").iter().for_each(|t| check_series(t));
    let parsed = corpus("run_config")
        .iter()
        .filter(|t| RunConfig::from_toml_str(t).is_ok())
        .count();
    assert_eq!(parsed, 4);
    corpus("run_config").iter().for_each(|t| check_config(t));
    corpus("chain_record").iter().for_each(|t| {
        assert!(ChainSample::from_json_line(t.trim()).is_ok());
        check_record(t.trim());
    });
    let parsed: Vec<bool> = corpus("partition_json")
        .iter()
        .map(|t| Partition::from_json(t.trim()).is_ok())
        .collect();
    assert_eq!(parsed, vec![false, true, true]);
    corpus("partition_json").iter().for_each(|t| check_partition(t));
    corpus("indicator_string").iter().for_each(|t| check_indicator(t));
}

proptest! {
    #[test]
    fn series_parser_never_panics(text in "(t,y(,x[0-9])*\n)?([0-9a-z.,# -]{0,12}\n){0,6}") {
        check_series(&text);
    }

    #[test]
    fn config_parser_never_panics(
        section in prop::sample::select(vec!["data", "model", "prior", "chain", "simulate", "output", "x"]),
        key in "[a-z_]{1,12}",
        value in prop_oneof![Just("1".to_string()), Just("-3.5".to_string()), Just("\"ppm\"".to_string()), Just("[1.0, 2.0]".to_string()), "[0-9.e+-]{1,6}"],
    ) {
        check_config(&format!("[{section}]\n{key} = {value}\n"));
    }

    #[test]
    fn chain_record_parser_never_panics(u in "[01x]{0,10}", delta in -1.0f64..2.0, iter in 0usize..100) {
        check_record(&format!(r#"{{"iter":{iter},"u":"{u}","delta":{delta},"logPosterior":-1.0,"logPred":-2.0}}"#));
    }

    #[test]
    fn partition_parser_never_panics(v in prop::collection::vec(0usize..20, 0..8)) {
        check_partition(&serde_json::to_string(&v).unwrap());
    }

    #[test]
    fn indicator_parser_never_panics(text in "[01 a]{0,20}") {
        check_indicator(&text);
    }
}
