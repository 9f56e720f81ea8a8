//! Regenerates the bundled session fixture: `cargo run -p lumbar-core --example make_fixtures -- <dir>`.

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    match lumbar_core::synth::write_session_fixture(std::path::Path::new(&dir)) {
        Ok(p) => println!("wrote {}", p.display()),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}
