//! Rewrites suites/default.json from the generator. Run after changing
//! `default_suite`; a regression test pins the committed file to it.

fn main() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../suites/default.json"
    );
    let mut text = serde_json::to_string_pretty(&bbl_lab::generate::default_suite())
        .expect("suite serializes");
    text.push('\n');
    std::fs::write(path, text).expect("write default suite");
    println!("wrote {path}");
}
