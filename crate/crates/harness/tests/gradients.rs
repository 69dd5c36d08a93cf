use skysweep_harness::gradcheck::{registry, run_suite, END_TO_END_TOLERANCE, OP_TOLERANCE};

#[test]
fn registry_names_are_unique() {
    let names: Vec<&str> = registry().iter().map(|c| c.name()).collect();
    let mut sorted = names.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), names.len());
    assert_eq!(names.len(), 11);
}

#[test]
fn every_case_passes_its_tolerance() {
    let outcomes = run_suite(7).unwrap();
    for o in &outcomes {
        println!("{:<22} {:>10.3e} {:>6} {:>8.2?} {}", o.name, o.report.max_rel_error, o.report.checked, o.elapsed, o.report.worst);
        assert!(o.tolerance == OP_TOLERANCE || o.tolerance == END_TO_END_TOLERANCE);
    }
    for o in &outcomes {
        assert!(o.passed(), "{}: {:?}", o.name, o.report);
    }
}
