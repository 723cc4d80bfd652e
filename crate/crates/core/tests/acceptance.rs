use lattika::acceptance::{run_all, CRITERIA};

#[test]
fn acceptance_criteria() {
    let reports = run_all();
    assert_eq!(reports.len(), CRITERIA);
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
