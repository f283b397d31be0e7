//! Instances round-trip through JSON with exact rational strings.

use impartial::cli::io::{instance_to_json, parse_instance};
use impartial::verify::generators::{gen_fig4, Fig4Variant};
use impartial::Result;

fn main() -> Result<()> {
    let inst = gen_fig4(Fig4Variant::B);
    let json = instance_to_json(&inst);
    print!("{json}");
    assert_eq!(parse_instance(&json)?, inst);

    let bad = r#"{"m": 2, "system": {"kind": "uniform", "k": 1}, "scores": [[0, 1, "1/0"]]}"#;
    println!("rejected: {}", parse_instance(bad).unwrap_err());
    Ok(())
}
