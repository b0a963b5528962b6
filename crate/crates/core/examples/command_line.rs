//! The batch workflow of the `mvaug` binary driven in-process:
//! synth, augment, detect, eval, render.
//!
//! Run with `cargo run --example command_line`.

use mvaug::io::{self, ToolConfig};

fn main() -> mvaug::Result<()> {
    let dir = std::env::temp_dir().join(format!("mvaug-cli-{}", std::process::id()));
    io::create_dir_all(&dir)?;
    let cfg = dir.join("config.json");
    io::save_tool_config(&cfg, &ToolConfig::default())?;
    let path = |name: &str| dir.join(name).display().to_string();

    let steps: [Vec<String>; 5] = [
        vec!["synth".into(), "--config".into(), path("config.json"), "--out".into(), path("synth")],
        vec!["augment".into(), "--dataset".into(), path("synth"), "--seed".into(), "1".into(), "--out".into(), path("aug")],
        vec!["detect".into(), "--dataset".into(), path("aug"), "--out".into(), path("dets.jsonl")],
        vec!["eval".into(), "--detections".into(), path("dets.jsonl"), "--gt".into(), path("aug/annotations.jsonl")],
        vec!["render".into(), "--dataset".into(), path("synth"), "--frame".into(), "2".into(), "--view".into(), "1".into(), "--out".into(), path("overlay.png")],
    ];
    for args in steps {
        println!("$ mvaug --json {}", args.join(" "));
        let code = mvaug::cli::run(["mvaug", "--json"].into_iter().map(String::from).chain(args));
        if code != 0 {
            eprintln!("exit code {code}");
            std::process::exit(code);
        }
    }
    println!("outputs in {}", dir.display());
    Ok(())
}
