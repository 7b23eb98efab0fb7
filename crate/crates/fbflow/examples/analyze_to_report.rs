// Usage: cargo run --example analyze_to_report
//
// The same entry point the `fbflow` binary uses, driven in-process: write a
// system spec to disk, run `analyze`, and pick results out of the JSON
// report. Exit code 0 means every identity check passed.

use fbflow::report::InfoReport;

// Row order within a table: the full input block, then the strictly earlier
// output block, earliest symbol most significant. At time 2 the channel rows
// run over (x1, x2, y1) with y1 in the last position, so a memoryless BSC
// repeats each matrix row twice before switching.
const SYSTEM: &str = r#"{
  "n": 2,
  "alphabets": { "X": 2, "Y": 2, "Z": 2 },
  "channel": [
    [[0.85, 0.15], [0.15, 0.85]],
    [[0.85, 0.15], [0.85, 0.15], [0.15, 0.85], [0.15, 0.85],
     [0.85, 0.15], [0.85, 0.15], [0.15, 0.85], [0.15, 0.85]]
  ],
  "feedback": [
    [[0.9, 0.1], [0.1, 0.9]],
    [[0.9, 0.1], [0.9, 0.1], [0.1, 0.9], [0.1, 0.9],
     [0.9, 0.1], [0.9, 0.1], [0.1, 0.9], [0.1, 0.9]]
  ],
  "encoder": {
    "M": 2,
    "code_functions": [
      [[0], [0, 1]],
      [[1], [1, 1]]
    ]
  }
}"#;

fn main() {
    let dir = std::env::temp_dir();
    let system = dir.join("fbflow-example-system.json");
    let report_path = dir.join("fbflow-example-report.json");
    let csv_path = dir.join("fbflow-example-series.csv");
    std::fs::write(&system, SYSTEM).unwrap();

    let code = fbflow::cli::run([
        "fbflow",
        "analyze",
        "--system",
        system.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    println!("exit code {code}");

    let report = InfoReport::from_json(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    println!(
        "link classified as {} feedback",
        if report.feedback_link.as_ref().unwrap().noisy {
            "noisy"
        } else {
            "clean"
        }
    );
    println!("\nchecks:");
    for check in &report.checks {
        println!(
            "  [{}] {:40} residual {:.2e}",
            if check.pass { "ok" } else { "FAIL" },
            check.name,
            check.residual_bits
        );
    }
    println!("\nper-horizon series (CSV):");
    print!("{}", std::fs::read_to_string(&csv_path).unwrap());

    for p in [&system, &report_path, &csv_path] {
        let _ = std::fs::remove_file(p);
    }
}
